//! Reproduction checks behind `paper-numbers` and the acceptance tests.
//!
//! Each check recomputes a published or derived number from scratch and
//! compares it at a fixed tolerance within a wall-clock budget.

use std::time::{Duration, Instant};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use infocap::bounds::{
    bound_eps, bound_for, bound_overlap, bound_vacuum, lemma_check, lemma_margin,
    min_overlap_vacuum,
};
use infocap::discrimination::{guess_value, pgm};
use infocap::ensembles::{
    basis_ensemble, bordered_vacuum_gram, dense_coding_ensemble, equiangular_ensemble,
    vacuum_cone_ensemble,
};
use infocap::matcore::{min_eigenvalue, ComplexMatrix};
use infocap::randomness::{
    bound_at_parameter, check_average, concavity_probe, concavity_probe_fn,
    ea_average_counterexample, embed_cq, mixture_guess_value, Branch, ConcavityTarget, SrStrategy,
};
use infocap::sampling::{
    random_ket, random_pure_ensemble, random_unitary, sample_almost_dim, sample_almost_dim_with,
    sample_dimension, sample_dimension_with, sample_distrust, sample_distrust_with,
    sample_ea_dimension, sample_overlap, sample_overlap_with, sample_vacuum, sample_vacuum_with,
    Sample,
};
use infocap::search::{tightness_search, SearchConfig};
use infocap::{
    accessible_information, optimize_discrimination, Assumption, Ket, OracleOptions, StateEnsemble,
};

use crate::args::{Format, Kind, OracleFlags, OutputArgs, ParamArgs, SearchArgs, SweepArgs};
use crate::commands::{cmd_search, cmd_sweep};

#[derive(Clone, Debug, Serialize)]
pub struct CheckOutcome {
    pub id: usize,
    pub name: &'static str,
    pub passed: bool,
    pub seconds: f64,
    pub limit_seconds: f64,
    pub detail: String,
}

impl CheckOutcome {
    pub fn line(&self) -> String {
        format!(
            "[{}] {:>2} {} ({:.2}s / {:.0}s): {}",
            if self.passed { "PASS" } else { "FAIL" },
            self.id,
            self.name,
            self.seconds,
            self.limit_seconds,
            self.detail
        )
    }
}

type CheckFn = fn() -> (bool, String);

pub struct Check {
    pub id: usize,
    pub name: &'static str,
    pub limit: Duration,
    run: CheckFn,
}

impl Check {
    pub fn run(&self) -> CheckOutcome {
        let start = Instant::now();
        let (ok, detail) = (self.run)();
        let elapsed = start.elapsed();
        let in_time = elapsed <= self.limit;
        CheckOutcome {
            id: self.id,
            name: self.name,
            passed: ok && in_time,
            seconds: elapsed.as_secs_f64(),
            limit_seconds: self.limit.as_secs_f64(),
            detail: if in_time {
                detail
            } else {
                format!("{detail}; exceeded time budget")
            },
        }
    }
}

pub fn all_checks() -> Vec<Check> {
    let c = |id, name, secs, run| Check {
        id,
        name,
        limit: Duration::from_secs(secs),
        run,
    };
    vec![
        c(
            1,
            "dimension_saturation",
            10,
            dimension_saturation as CheckFn,
        ),
        c(2, "ea_dimension_saturation", 60, ea_dimension_saturation),
        c(3, "ea_counterexample", 30, ea_counterexample),
        c(4, "overlap_pgm", 20, overlap_pgm),
        c(5, "helstrom_pairs", 5, helstrom_pairs),
        c(6, "vacuum_saturation n=2..6", 30, vacuum_saturation),
        c(7, "lemma_regression", 30, lemma_regression),
        c(8, "eps_vacuum_identity", 1, eps_vacuum_identity),
        c(9, "almost_dim_tightness", 120, almost_dim_tightness),
        c(10, "soundness_sweep", 300, soundness_sweep),
        c(11, "concavity_average", 300, concavity_average),
        c(12, "cq_embedding", 120, cq_embedding),
        c(13, "determinism", 120, determinism),
    ]
}

pub fn find(name: &str) -> Option<Check> {
    all_checks().into_iter().find(|c| c.name == name)
}

/// Runs the checks whose name contains `filter` (all when `None`), in order.
pub fn run_checks(filter: Option<&str>) -> Vec<CheckOutcome> {
    all_checks()
        .iter()
        .filter(|c| filter.is_none_or(|f| c.name.contains(f)))
        .map(Check::run)
        .collect()
}

fn opts() -> OracleOptions {
    OracleOptions::default()
}

fn dimension_saturation() -> (bool, String) {
    let cases: Vec<(usize, usize)> = (1..=4)
        .flat_map(|d| (1..=12).map(move |n| (d, n)))
        .collect();
    let devs = cases
        .par_iter()
        .map(|&(d, n)| {
            let r = optimize_discrimination(&basis_ensemble(d, n).unwrap(), &opts());
            let expected = (d as f64 / n as f64).min(1.0);
            let info = accessible_information(n, r.value).bits;
            ((r.value - expected).abs(), info - (d as f64).log2())
        })
        .collect::<Vec<_>>();
    let dev = devs.iter().map(|p| p.0).fold(0.0, f64::max);
    let excess = devs.iter().map(|p| p.1).fold(f64::NEG_INFINITY, f64::max);
    (
        dev <= 1e-8 && excess <= 1e-9,
        format!(
            "{} cases, max |P_g - d/n| = {dev:.1e}, max I - log2 d = {excess:.1e}",
            cases.len()
        ),
    )
}

fn ea_dimension_saturation() -> (bool, String) {
    let cases: Vec<(usize, usize)> = [2usize, 3]
        .iter()
        .flat_map(|&d| [d * d, 2 * d * d, 30].map(|n| (d, n)))
        .collect();
    let devs = cases
        .par_iter()
        .map(|&(d, n)| {
            let r = optimize_discrimination(&dense_coding_ensemble(d, n).unwrap(), &opts());
            let expected = ((d * d) as f64 / n as f64).min(1.0);
            let info = accessible_information(n, r.value).bits;
            ((r.value - expected).abs(), info - 2.0 * (d as f64).log2())
        })
        .collect::<Vec<_>>();
    let dev = devs.iter().map(|p| p.0).fold(0.0, f64::max);
    let excess = devs.iter().map(|p| p.1).fold(f64::NEG_INFINITY, f64::max);
    (
        dev <= 1e-6 && excess <= 1e-6,
        format!("max |P_g - d^2/n| = {dev:.1e}, max I - 2 log2 d = {excess:.1e}"),
    )
}

fn ea_counterexample() -> (bool, String) {
    match ea_average_counterexample(&opts()) {
        Ok(v) => (
            (v.peak_value - 0.3).abs() <= 1e-6
                && (v.average_value - 11.0 / 30.0).abs() <= 1e-6
                && v.average_value > v.peak_bound,
            format!(
                "peak {:.6}, average {:.6}, peak bound {:.6}",
                v.peak_value, v.average_value, v.peak_bound
            ),
        ),
        Err(e) => (false, e.to_string()),
    }
}

fn overlap_pgm() -> (bool, String) {
    let cases: Vec<(usize, f64)> = (2..=6)
        .flat_map(|n| (0..=20).map(move |k| (n, k as f64 / 20.0)))
        .collect();
    let res = cases
        .par_iter()
        .map(|&(n, a)| {
            let e = equiangular_ensemble(n, a).unwrap();
            let bound = bound_overlap(n, a).unwrap().pg_bound;
            let p = guess_value(&e, &pgm(&e)).unwrap();
            let o = optimize_discrimination(&e, &opts()).value;
            ((p - bound).abs(), o - bound)
        })
        .collect::<Vec<_>>();
    let dev = res.iter().map(|r| r.0).fold(0.0, f64::max);
    let excess = res.iter().map(|r| r.1).fold(f64::NEG_INFINITY, f64::max);
    (
        dev <= 1e-10 && excess <= 1e-8,
        format!("max |PGM - bound| = {dev:.1e}, max oracle - bound = {excess:.1e}"),
    )
}

fn helstrom_pairs() -> (bool, String) {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let pairs: Vec<Vec<Ket>> = (0..100)
        .map(|_| {
            let dim = rng.random_range(2..=4);
            vec![random_ket(dim, &mut rng), random_ket(dim, &mut rng)]
        })
        .collect();
    let dev = pairs
        .par_iter()
        .map(|kets| {
            let a = kets[0].dotc(&kets[1]).norm().min(1.0);
            let e = StateEnsemble::from_kets(kets).unwrap();
            let v = optimize_discrimination(&e, &opts()).value;
            (v - (1.0 + (1.0 - a * a).sqrt()) / 2.0).abs()
        })
        .reduce(|| 0.0, f64::max);
    (dev <= 1e-8, format!("100 pairs, max deviation {dev:.1e}"))
}

fn vacuum_saturation() -> (bool, String) {
    let cases: Vec<(usize, f64)> = (2..=6)
        .flat_map(|n| {
            let limit = (n as f64 - 1.0) / n as f64;
            (0..=10).map(move |k| (n, limit * k as f64 / 10.0))
        })
        .collect();
    let res = cases
        .par_iter()
        .map(|&(n, omega)| {
            let (e, _) = vacuum_cone_ensemble(n, omega).unwrap();
            let v = optimize_discrimination(&e, &opts()).value;
            let bound = bound_vacuum(n, omega).unwrap().pg_bound;
            let a = min_overlap_vacuum(n, omega).unwrap();
            let g = bordered_vacuum_gram(n, a, (1.0 - omega).sqrt());
            ((v - bound).abs(), min_eigenvalue(&g).unwrap().abs())
        })
        .collect::<Vec<_>>();
    let dev = res.iter().map(|r| r.0).fold(0.0, f64::max);
    let eig = res.iter().map(|r| r.1).fold(0.0, f64::max);
    (
        dev <= 1e-6 && eig <= 1e-9,
        format!(
            "{} points, max |P_g - bound| = {dev:.1e}, max |min eig at a*| = {eig:.1e}",
            cases.len()
        ),
    )
}

/// Random `(phi, Pi, mu)` with `phi` not orthogonal to `Pi`.
fn lemma_instance(rng: &mut ChaCha8Rng) -> (Ket, ComplexMatrix, f64) {
    let dim = rng.random_range(2..=6);
    let rank = rng.random_range(1..dim);
    let u = random_unitary(dim, rng);
    let cols: Vec<Ket> = (0..rank).map(|j| u.column(j)).collect();
    let pi = ComplexMatrix::span_projector(&cols);
    let mu = if rng.random_bool(0.5) {
        rng.random_range(-1.0..=1.0)
    } else {
        rng.random_range(-1.0f64..=4.0).exp2()
    };
    loop {
        let phi = random_ket(dim, rng);
        if pi.expectation(&phi) > 1e-6 {
            return (phi, pi, mu);
        }
    }
}

fn lemma_regression() -> (bool, String) {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let trials = 1000;
    let mut holds = 0;
    let mut control_fails = 0;
    for _ in 0..trials {
        let (phi, pi, mu) = lemma_instance(&mut rng);
        if lemma_check(&phi, &pi, mu, 1e-9).unwrap() {
            holds += 1;
        }
        if lemma_margin(&phi, &pi, mu, 0.5).unwrap() < -1e-9 {
            control_fails += 1;
        }
    }
    (
        holds == trials && control_fails * 100 > 95 * trials,
        format!("holds {holds}/{trials}, halved-h control fails {control_fails}/{trials}"),
    )
}

fn eps_vacuum_identity() -> (bool, String) {
    let mut dev: f64 = 0.0;
    for n in 2..=51 {
        for k in 0..50 {
            let omega = k as f64 / 49.0;
            let a = bound_eps(1.0 / n as f64, omega).unwrap();
            let b = bound_vacuum(n, omega).unwrap().pg_bound;
            dev = dev.max((a - b).abs());
        }
    }
    (dev <= 1e-12, format!("50x50 grid, max deviation {dev:.1e}"))
}

fn almost_dim_tightness() -> (bool, String) {
    let mut parts = Vec::new();
    let mut ok = true;
    for eps in [0.01, 0.05, 0.1] {
        let cfg = SearchConfig::new(
            Assumption::AlmostDim {
                d: 2,
                eps,
                projector: None,
            },
            4,
        );
        match tightness_search(&cfg) {
            Ok(rep) => {
                ok &= rep.gap <= 1e-3;
                parts.push(format!("eps {eps}: gap {:.1e}", rep.gap));
            }
            Err(e) => {
                ok = false;
                parts.push(format!("eps {eps}: {e}"));
            }
        }
    }
    (ok, parts.join(", "))
}

type Sampler = fn(&mut ChaCha8Rng) -> infocap::Result<Sample>;

fn soundness_sweep() -> (bool, String) {
    let samplers: [(&str, Sampler); 6] = [
        ("dimension", sample_dimension),
        ("ea_dimension", sample_ea_dimension),
        ("vacuum", sample_vacuum),
        ("overlap", sample_overlap),
        ("almost_dim", sample_almost_dim),
        ("distrust", sample_distrust),
    ];
    let mut ok = true;
    let mut parts = Vec::new();
    for (i, (name, sampler)) in samplers.iter().enumerate() {
        let mut rng = ChaCha8Rng::seed_from_u64(1000 + i as u64);
        let samples: Vec<Sample> = (0..1000).map(|_| sampler(&mut rng).unwrap()).collect();
        let res = samples
            .par_iter()
            .map(|s| {
                let member = infocap::check_assumption(&s.ensemble, &s.assumption, &s.context)
                    .map(|r| r.satisfied)
                    .unwrap_or(false);
                let bound = bound_for(&s.assumption, s.ensemble.n(), &opts()).map(|b| b.pg_bound);
                let r = optimize_discrimination(&s.ensemble, &opts());
                (member, bound.map(|b| r.value - b), r.converged)
            })
            .collect::<Vec<_>>();
        let members = res.iter().filter(|r| r.0).count();
        let errors = res.iter().filter(|r| r.1.is_err()).count();
        let unconverged = res.iter().filter(|r| !r.2).count();
        let excess = res
            .iter()
            .filter_map(|r| r.1.as_ref().ok().copied())
            .fold(f64::NEG_INFINITY, f64::max);
        ok &= members == 1000 && errors == 0 && excess <= 1e-6;
        parts.push(format!(
            "{name}: max excess {excess:.1e} ({members} members, {unconverged} unconverged)"
        ));
    }
    (ok, parts.join("; "))
}

/// Normalized random weights for `k` branches.
fn random_weights(k: usize, rng: &mut ChaCha8Rng) -> Vec<f64> {
    let raw: Vec<f64> = (0..k).map(|_| rng.random_range(0.05..1.0)).collect();
    let total: f64 = raw.iter().sum();
    let mut q: Vec<f64> = raw.iter().map(|r| r / total).collect();
    let head: f64 = q[..k - 1].iter().sum();
    q[k - 1] = 1.0 - head;
    q
}

fn strategy_from(samples: Vec<Sample>, q: Vec<f64>) -> infocap::Result<SrStrategy> {
    SrStrategy::new(
        samples
            .into_iter()
            .zip(q)
            .map(|(s, q)| Branch {
                q,
                ensemble: s.ensemble,
                gamma: s.assumption,
                vacuum: s.context.vacuum,
            })
            .collect(),
    )
}

fn random_average_strategy(kind: &str, rng: &mut ChaCha8Rng) -> infocap::Result<SrStrategy> {
    let k = rng.random_range(2..=3);
    let n = rng.random_range(2..=5);
    let q = random_weights(k, rng);
    let samples = match kind {
        "dimension" => (0..k)
            .map(|_| sample_dimension_with(n, rng))
            .collect::<Result<Vec<_>, _>>()?,
        "vacuum" => (0..k)
            .map(|_| sample_vacuum_with(n, rng))
            .collect::<Result<Vec<_>, _>>()?,
        "overlap" => (0..k)
            .map(|_| sample_overlap_with(n, rng))
            .collect::<Result<Vec<_>, _>>()?,
        "almost_dim" => {
            let d = rng.random_range(1..=n.min(3));
            (0..k)
                .map(|_| sample_almost_dim_with(d, n, rng))
                .collect::<Result<Vec<_>, _>>()?
        }
        _ => {
            let tdim = rng.random_range(n..=n + 1);
            let targets: Vec<Ket> = (0..n).map(|_| random_ket(tdim, rng)).collect();
            (0..k)
                .map(|_| sample_distrust_with(targets.clone(), rng))
                .collect::<Result<Vec<_>, _>>()?
        }
    };
    strategy_from(samples, q)
}

fn concavity_average() -> (bool, String) {
    let mut ok = true;
    let mut parts = Vec::new();
    let targets = [
        ("vacuum", ConcavityTarget::Vacuum { n: 4 }),
        ("overlap", ConcavityTarget::Overlap { n: 3 }),
        ("eps", ConcavityTarget::Eps { pg0: 0.3 }),
        ("almost_dim", ConcavityTarget::AlmostDim { n: 5 }),
    ];
    for (i, (name, t)) in targets.iter().enumerate() {
        let rep = concavity_probe(*t, 1000, 20 + i as u64);
        ok &= rep.passed();
        parts.push(format!("{name} concave ({} failures)", rep.failures));
    }
    let control = concavity_probe_fn(|g| g[0] * g[0], &[(0.0, 1.0)], 1000, 30);
    ok &= !control.passed();
    // gap target 1e-8, well inside the 1e-6 acceptance tolerance
    let oracle = OracleOptions {
        tol: 1e-9,
        restarts: 4,
        ..opts()
    };
    for (i, kind) in ["dimension", "vacuum", "overlap", "almost_dim", "distrust"]
        .iter()
        .enumerate()
    {
        let mut rng = ChaCha8Rng::seed_from_u64(2000 + i as u64);
        let strategies: Vec<SrStrategy> = (0..100)
            .map(|_| random_average_strategy(kind, &mut rng).unwrap())
            .collect();
        let res = strategies
            .par_iter()
            .map(|s| -> infocap::Result<(f64, bool)> {
                let avg = infocap::randomness::average_parameter(s)?;
                let member = check_average(s, avg)?.satisfied;
                let bound = bound_at_parameter(&s.branches()[0].gamma, avg, s.n(), &oracle)?;
                Ok((mixture_guess_value(s, &oracle)? - bound, member))
            })
            .collect::<Vec<_>>();
        let errors = res.iter().filter(|r| r.is_err()).count();
        let members = res.iter().filter(|r| matches!(r, Ok((_, true)))).count();
        let excess = res
            .iter()
            .filter_map(|r| r.as_ref().ok().map(|p| p.0))
            .fold(f64::NEG_INFINITY, f64::max);
        ok &= errors == 0 && members == 100 && excess <= 1e-6;
        let first_error = res
            .iter()
            .find_map(|r| r.as_ref().err().map(|e| e.to_string()));
        parts.push(match first_error {
            Some(e) => format!("{kind} average: {errors} errors (first: {e})"),
            None => format!("{kind} average: max excess {excess:.1e} ({members}/100 members)"),
        });
    }
    (ok, parts.join("; "))
}

fn cq_embedding() -> (bool, String) {
    let mut rng = ChaCha8Rng::seed_from_u64(12);
    let strategies: Vec<SrStrategy> = (0..100)
        .map(|_| {
            let k = rng.random_range(2..=3);
            let n = rng.random_range(2..=4);
            let q = random_weights(k, &mut rng);
            let branches = q
                .into_iter()
                .map(|q| {
                    let dim = rng.random_range(n..=n + 1);
                    Branch::new(
                        q,
                        random_pure_ensemble(n, dim, &mut rng).unwrap(),
                        Assumption::Dimension { d: dim },
                    )
                })
                .collect();
            SrStrategy::new(branches).unwrap()
        })
        .collect();
    let res = strategies
        .par_iter()
        .map(|s| -> infocap::Result<f64> {
            let embedded = optimize_discrimination(&embed_cq(s)?, &opts()).value;
            Ok((embedded - mixture_guess_value(s, &opts())?).abs())
        })
        .collect::<Vec<_>>();
    let errors = res.iter().filter(|r| r.is_err()).count();
    let dev = res
        .iter()
        .filter_map(|r| r.as_ref().ok().copied())
        .fold(0.0, f64::max);
    (
        errors == 0 && dev <= 1e-6,
        format!("100 strategies, max deviation {dev:.1e}, {errors} errors"),
    )
}

fn oracle_flags() -> OracleFlags {
    OracleFlags {
        tol: 1e-10,
        max_iter: 10_000,
        oracle_restarts: 0,
    }
}

fn search_args(format: Format) -> SearchArgs {
    SearchArgs {
        kind: Kind::AlmostDim,
        params: ParamArgs {
            n: vec![4],
            d: vec![2],
            eps: vec![0.05],
            ..ParamArgs::default()
        },
        restarts: 6,
        seed: 42,
        perturbation: 0.3,
        rounds: 8,
        oracle: oracle_flags(),
        best_out: None,
        out: OutputArgs {
            format: Some(format),
            output: None,
        },
    }
}

fn sweep_args() -> SweepArgs {
    SweepArgs {
        kind: Kind::Vacuum,
        axis: "omega".into(),
        from: 0.0,
        to: 0.75,
        points: 20,
        with_oracle: true,
        params: ParamArgs {
            n: vec![4],
            ..ParamArgs::default()
        },
        oracle: oracle_flags(),
        out: OutputArgs {
            format: Some(Format::Csv),
            output: None,
        },
    }
}

/// Runs `f` inside a dedicated pool with `threads` workers.
fn with_threads<T: Send>(threads: usize, f: impl FnOnce() -> T + Send) -> T {
    rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build()
        .expect("thread pool")
        .install(f)
}

fn determinism() -> (bool, String) {
    let run = || {
        let json = cmd_search(&search_args(Format::Json)).map(|r| r.0.text);
        let csv = cmd_search(&search_args(Format::Csv)).map(|r| r.0.text);
        let sweep = cmd_sweep(&sweep_args()).map(|r| r.text);
        (json.ok(), csv.ok(), sweep.ok())
    };
    let a = with_threads(1, run);
    let b = with_threads(4, run);
    let c = run();
    let complete = a.0.is_some() && a.1.is_some() && a.2.is_some();
    let same = a == b && b == c;
    (
        complete && same,
        format!(
            "search json/csv and sweep csv identical across 3 runs (1, 4, default threads): {same}"
        ),
    )
}
