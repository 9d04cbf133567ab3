use std::path::Path;

use rayon::prelude::*;
use serde::Serialize;
use serde_json::{json, Map, Value};

use infocap::bounds::{
    bound_almost_dim, bound_dimension, bound_distrust, bound_ea_dimension, bound_for,
    bound_overlap, bound_vacuum, coherent_capacity,
};
use infocap::discrimination::{dual_certificate, guess_value};
use infocap::ensembles::{
    almost_qudit_simplex_ensemble, basis_ensemble, coherent_psk_ensemble, dense_coding_ensemble,
    equiangular_ensemble, equiangular_kets, vacuum_cone_ensemble,
};
use infocap::io::{ensemble_to_json, read_ensemble, read_json, read_kets};
use infocap::randomness::{
    average_parameter, averaged_log_pg, bound_at_parameter, branch_values,
    ea_average_counterexample, embed_cq, StrategyFile,
};
use infocap::search::{tightness_search, SearchConfig};
use infocap::{
    accessible_information, optimize_discrimination, Assumption, BoundResult, Ket, OracleOptions,
    Povm, StateEnsemble,
};

use crate::args::{
    BoundArgs, CertifyArgs, Format, Kind, OracleArgs, OracleFlags, ParamArgs, SearchArgs,
    SrDemoArgs, SweepArgs,
};
use crate::error::{input_error, CliError, CliResult};
use crate::output::{csv_string, json_string, sig9};

/// Rendered command output; `failure` is set when the command ran but its
/// target was not met (exit code 1).
#[derive(Debug, Clone, PartialEq)]
pub struct Report {
    pub text: String,
    pub failure: Option<String>,
}

impl Report {
    fn ok(text: String) -> Self {
        Self {
            text,
            failure: None,
        }
    }
}

pub fn oracle_options(f: &OracleFlags, seed: u64) -> CliResult<OracleOptions> {
    if f.tol.is_nan() || f.tol <= 0.0 {
        return Err(CliError::Param(format!("tol = {} must be > 0", f.tol)));
    }
    Ok(OracleOptions {
        tol: f.tol,
        max_iter: f.max_iter,
        restarts: f.oracle_restarts,
        seed,
    })
}

/// Column names of the kind-specific parameters, in output order.
pub fn param_names(kind: Kind) -> &'static [&'static str] {
    match kind {
        Kind::Dimension | Kind::EaDimension => &["d"],
        Kind::Vacuum => &["omega"],
        Kind::Overlap => &["a"],
        Kind::AlmostDim => &["d", "eps"],
        Kind::Distrust => &["eps"],
        Kind::Information => &["alpha"],
        Kind::Coherent => &["mean_photons"],
    }
}

fn values_of(p: &ParamArgs, name: &str) -> Vec<f64> {
    match name {
        "d" => p.d.iter().map(|&d| d as f64).collect(),
        "omega" => p.omega.clone(),
        "a" => p.a.clone(),
        "eps" => p.eps.clone(),
        "alpha" => p.alpha.clone(),
        "mean_photons" => p.mean_photons.clone(),
        _ => Vec::new(),
    }
}

fn flag(name: &str) -> String {
    format!("--{}", name.replace('_', "-"))
}

fn require_values(p: &ParamArgs, name: &str) -> CliResult<Vec<f64>> {
    let v = values_of(p, name);
    if v.is_empty() {
        return Err(CliError::Param(format!("missing {}", flag(name))));
    }
    Ok(v)
}

fn single<T: Copy>(v: &[T], name: &str) -> CliResult<T> {
    match v {
        [x] => Ok(*x),
        [] => Err(CliError::Param(format!("missing {}", flag(name)))),
        _ => Err(CliError::Param(format!(
            "{} takes a single value here",
            flag(name)
        ))),
    }
}

/// Distrust targets from `--targets` or `--target-overlap`.
fn targets(p: &ParamArgs, n: Option<usize>) -> CliResult<Vec<Ket>> {
    if let Some(path) = &p.targets {
        return read_kets(path).map_err(input_error);
    }
    match (p.target_overlap, n) {
        (Some(a), Some(n)) => Ok(equiangular_kets(n, a)?),
        (Some(_), None) => Err(CliError::Param("--target-overlap needs --n".into())),
        (None, _) => Err(CliError::Param(
            "distrust needs --targets or --target-overlap".into(),
        )),
    }
}

fn input_count(p: &ParamArgs, kind: Kind) -> CliResult<Vec<usize>> {
    if p.n.is_empty() {
        if kind == Kind::Distrust && p.targets.is_some() {
            return Ok(vec![targets(p, None)?.len()]);
        }
        return Err(CliError::Param("missing --n".into()));
    }
    Ok(p.n.clone())
}

fn as_dim(x: f64) -> CliResult<usize> {
    if x >= 1.0 && x.fract() == 0.0 {
        Ok(x as usize)
    } else {
        Err(CliError::Param(format!(
            "d = {x} must be a positive integer"
        )))
    }
}

/// Direct call into the bounds module for one grid point.
pub fn bound_point(
    kind: Kind,
    values: &[f64],
    n: usize,
    p: &ParamArgs,
    opts: &OracleOptions,
) -> CliResult<BoundResult> {
    Ok(match kind {
        Kind::Dimension => bound_dimension(as_dim(values[0])?, n)?,
        Kind::EaDimension => bound_ea_dimension(as_dim(values[0])?, n)?,
        Kind::Vacuum => bound_vacuum(n, values[0])?,
        Kind::Overlap => bound_overlap(n, values[0])?,
        Kind::AlmostDim => bound_almost_dim(as_dim(values[0])?, n, values[1])?,
        Kind::Distrust => {
            let t = targets(p, Some(n))?;
            if t.len() != n {
                return Err(CliError::Param(format!(
                    "{} targets given for n = {n}",
                    t.len()
                )));
            }
            let e = StateEnsemble::from_kets(&t).map_err(input_error)?;
            bound_distrust(&e, values[0], opts)?
        }
        Kind::Information => bound_for(&Assumption::Information { alpha: values[0] }, n, opts)?,
        Kind::Coherent => coherent_capacity(values[0], n)?,
    })
}

fn cartesian(lists: &[Vec<f64>]) -> Vec<Vec<f64>> {
    lists.iter().fold(vec![Vec::new()], |acc, list| {
        acc.iter()
            .flat_map(|prefix| {
                list.iter().map(move |&v| {
                    let mut p = prefix.clone();
                    p.push(v);
                    p
                })
            })
            .collect()
    })
}

fn param_cell(name: &str, v: f64) -> String {
    if name == "d" {
        format!("{}", v as usize)
    } else {
        sig9(v)
    }
}

fn param_json(name: &str, v: f64) -> Value {
    if name == "d" {
        json!(v as usize)
    } else {
        json!(v)
    }
}

pub fn cmd_bound(args: &BoundArgs) -> CliResult<Report> {
    let kind = args.kind;
    let opts = oracle_options(&args.oracle, 0)?;
    let names = param_names(kind);
    let lists = names
        .iter()
        .map(|n| require_values(&args.params, n))
        .collect::<CliResult<Vec<_>>>()?;
    let ns = input_count(&args.params, kind)?;
    let points: Vec<(usize, Vec<f64>)> = ns
        .iter()
        .flat_map(|&n| cartesian(&lists).into_iter().map(move |v| (n, v)))
        .collect();
    let results = points
        .par_iter()
        .map(|(n, v)| bound_point(kind, v, *n, &args.params, &opts))
        .collect::<CliResult<Vec<_>>>()?;
    let text = match args.out.format.unwrap_or(Format::Csv) {
        Format::Csv => {
            let mut header = vec!["assumption".to_string()];
            header.extend(names.iter().map(|s| s.to_string()));
            header.extend(["n", "pg_bound", "info_bits", "validity"].map(String::from));
            let rows: Vec<Vec<String>> = points
                .iter()
                .zip(&results)
                .map(|((n, v), r)| {
                    let mut row = vec![kind.name().to_string()];
                    row.extend(names.iter().zip(v).map(|(name, &x)| param_cell(name, x)));
                    row.push(n.to_string());
                    row.push(sig9(r.pg_bound));
                    row.push(sig9(r.info_bound));
                    row.push(r.validity.as_str().to_string());
                    row
                })
                .collect();
            csv_string(&header, &rows)?
        }
        Format::Json => {
            let rows: Vec<Value> = points
                .iter()
                .zip(&results)
                .map(|((n, v), r)| {
                    let mut m = Map::new();
                    m.insert("assumption".into(), json!(kind.name()));
                    for (name, &x) in names.iter().zip(v) {
                        m.insert(name.to_string(), param_json(name, x));
                    }
                    m.insert("n".into(), json!(n));
                    m.insert("pg_bound".into(), json!(r.pg_bound));
                    m.insert("info_bits".into(), json!(r.info_bound));
                    m.insert("validity".into(), json!(r.validity.as_str()));
                    if let Some(note) = &r.note {
                        m.insert("note".into(), json!(note));
                    }
                    Value::Object(m)
                })
                .collect();
            json_string(&rows)
        }
    };
    Ok(Report::ok(text))
}

#[derive(Serialize)]
struct OracleReport {
    n: usize,
    dim: usize,
    value: f64,
    certified_upper: f64,
    gap: f64,
    iterations: usize,
    converged: bool,
    info_bits: f64,
}

pub fn cmd_oracle(args: &OracleArgs) -> CliResult<(Report, Option<String>)> {
    let opts = oracle_options(&args.oracle, args.seed)?;
    let e = read_ensemble(&args.ensemble).map_err(input_error)?;
    let r = optimize_discrimination(&e, &opts);
    let report = OracleReport {
        n: e.n(),
        dim: e.dim(),
        value: r.value,
        certified_upper: r.certificate.certified_upper,
        gap: r.gap(),
        iterations: r.iterations,
        converged: r.converged,
        info_bits: accessible_information(e.n(), r.value).bits,
    };
    let povm = args.povm_out.as_ref().map(|_| json_string(&r.povm));
    Ok((
        Report {
            text: json_string(&report),
            failure: (!r.converged).then(|| format!("oracle did not converge (gap {:e})", r.gap())),
        },
        povm,
    ))
}

#[derive(Serialize)]
struct CertifyReport {
    value: f64,
    trace_value: f64,
    certified_upper: f64,
    min_slack: f64,
    gap: f64,
    valid: bool,
}

pub fn cmd_certify(args: &CertifyArgs) -> CliResult<Report> {
    let e = read_ensemble(&args.ensemble).map_err(input_error)?;
    let m: Povm = read_json(&args.povm).map_err(input_error)?;
    let value = guess_value(&e, &m).map_err(input_error)?;
    let c = dual_certificate(&e, &m).map_err(input_error)?;
    let report = CertifyReport {
        value,
        trace_value: c.trace_value,
        certified_upper: c.certified_upper,
        min_slack: c.min_slack,
        gap: c.certified_upper - value,
        valid: c.is_valid(),
    };
    Ok(Report::ok(json_string(&report)))
}

/// Assumption with single-valued parameters taken from the flags.
pub fn single_assumption(kind: Kind, p: &ParamArgs, n: usize) -> CliResult<Assumption> {
    Ok(match kind {
        Kind::Dimension => Assumption::Dimension {
            d: single(&p.d, "d")?,
        },
        Kind::EaDimension => Assumption::EaDimension {
            d: single(&p.d, "d")?,
        },
        Kind::Vacuum => Assumption::Vacuum {
            omega: single(&p.omega, "omega")?,
        },
        Kind::Overlap => Assumption::UniformOverlap {
            a: single(&p.a, "a")?,
        },
        Kind::AlmostDim => Assumption::AlmostDim {
            d: single(&p.d, "d")?,
            eps: single(&p.eps, "eps")?,
            projector: None,
        },
        Kind::Distrust => Assumption::Distrust {
            targets: targets(p, Some(n))?,
            eps: single(&p.eps, "eps")?,
        },
        Kind::Information => Assumption::Information {
            alpha: single(&p.alpha, "alpha")?,
        },
        Kind::Coherent => {
            return Err(CliError::Param(
                "coherent is not an assumption set; use almost-dim".into(),
            ))
        }
    })
}

#[derive(Serialize)]
struct SearchOutput<'a> {
    kind: &'a str,
    n: usize,
    restarts: usize,
    seed: u64,
    perturbation: f64,
    rounds: usize,
    #[serde(flatten)]
    report: &'a infocap::search::SearchReport,
}

pub fn search_config(args: &SearchArgs) -> CliResult<SearchConfig> {
    if !matches!(
        args.kind,
        Kind::AlmostDim | Kind::Distrust | Kind::Overlap | Kind::Vacuum
    ) {
        return Err(CliError::Param(format!(
            "search supports almost-dim, distrust, overlap and vacuum, not {}",
            args.kind.name()
        )));
    }
    let n = single(&input_count(&args.params, args.kind)?, "n")?;
    let assumption = single_assumption(args.kind, &args.params, n)?;
    assumption.validate()?;
    Ok(SearchConfig {
        assumption,
        n,
        restarts: args.restarts,
        seed: args.seed,
        perturbation: args.perturbation,
        rounds: args.rounds,
        oracle: oracle_options(&args.oracle, args.seed)?,
    })
}

/// Runs the search; returns the report text and the best ensemble as JSON.
pub fn cmd_search(args: &SearchArgs) -> CliResult<(Report, Option<String>)> {
    let cfg = search_config(args)?;
    let rep = tightness_search(&cfg)?;
    let text = match args.out.format.unwrap_or(Format::Json) {
        Format::Json => json_string(&SearchOutput {
            kind: args.kind.name(),
            n: cfg.n,
            restarts: cfg.restarts,
            seed: cfg.seed,
            perturbation: cfg.perturbation,
            rounds: cfg.rounds,
            report: &rep,
        }),
        Format::Csv => {
            let header = [
                "assumption",
                "n",
                "restart",
                "seed",
                "value",
                "converged",
                "bound",
                "gap",
            ]
            .map(String::from);
            let rows: Vec<Vec<String>> = rep
                .per_restart
                .iter()
                .map(|o| {
                    vec![
                        args.kind.name().to_string(),
                        cfg.n.to_string(),
                        o.restart.to_string(),
                        o.seed.to_string(),
                        sig9(o.value),
                        o.converged.to_string(),
                        sig9(rep.bound),
                        sig9(rep.bound - o.value),
                    ]
                })
                .collect();
            csv_string(&header, &rows)?
        }
    };
    let best = rep.best_ensemble.as_ref().map(ensemble_to_json);
    Ok((Report::ok(text), best))
}

/// Ensemble reaching (or probing) the bound of `kind` at one sweep point.
fn saturating_ensemble(kind: Kind, values: &[f64], n: usize) -> CliResult<StateEnsemble> {
    Ok(match kind {
        Kind::Dimension => basis_ensemble(as_dim(values[0])?, n)?,
        Kind::EaDimension => dense_coding_ensemble(as_dim(values[0])?, n)?,
        Kind::Vacuum => {
            let limit = (n as f64 - 1.0) / n as f64;
            vacuum_cone_ensemble(n, values[0].min(limit))?.0
        }
        Kind::Overlap => equiangular_ensemble(n, values[0])?,
        Kind::AlmostDim => almost_qudit_simplex_ensemble(as_dim(values[0])?, n, values[1])?.0,
        Kind::Coherent => {
            let mut cutoff = 8;
            loop {
                match coherent_psk_ensemble(values[0], n, cutoff) {
                    Err(infocap::Error::CutoffTooSmall { .. }) if cutoff < 4096 => cutoff *= 2,
                    other => break other?,
                }
            }
        }
        Kind::Distrust | Kind::Information => {
            return Err(CliError::Param(format!(
                "no saturating construction for {}; drop --with-oracle",
                kind.name()
            )))
        }
    })
}

#[derive(Serialize)]
struct SweepRow {
    axis_value: f64,
    pg_bound: f64,
    info_bits: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    oracle_value: Option<f64>,
}

pub fn cmd_sweep(args: &SweepArgs) -> CliResult<Report> {
    let kind = args.kind;
    let names = param_names(kind);
    let axis_pos = names
        .iter()
        .position(|&n| n == args.axis && n != "d")
        .ok_or_else(|| {
            CliError::Param(format!(
                "axis {} is not a real parameter of {}",
                args.axis,
                kind.name()
            ))
        })?;
    if args.points == 0 {
        return Err(CliError::Param("--points must be >= 1".into()));
    }
    let n = single(&input_count(&args.params, kind)?, "n")?;
    let opts = oracle_options(&args.oracle, 0)?;
    let mut fixed = Vec::with_capacity(names.len());
    for (i, name) in names.iter().enumerate() {
        fixed.push(if i == axis_pos {
            0.0
        } else {
            single(&values_of(&args.params, name), name)?
        });
    }
    let axis: Vec<f64> = (0..args.points)
        .map(|i| {
            if args.points == 1 {
                args.from
            } else {
                args.from + (args.to - args.from) * i as f64 / (args.points - 1) as f64
            }
        })
        .collect();
    let rows = axis
        .par_iter()
        .map(|&x| {
            let mut v = fixed.clone();
            v[axis_pos] = x;
            let b = bound_point(kind, &v, n, &args.params, &opts)?;
            let oracle_value = if args.with_oracle {
                let e = saturating_ensemble(kind, &v, n)?;
                let r = optimize_discrimination(&e, &opts);
                if !r.converged {
                    return Err(CliError::Failure(format!(
                        "oracle did not converge at {} = {x}",
                        args.axis
                    )));
                }
                Some(r.value)
            } else {
                None
            };
            Ok(SweepRow {
                axis_value: x,
                pg_bound: b.pg_bound,
                info_bits: b.info_bound,
                oracle_value,
            })
        })
        .collect::<CliResult<Vec<_>>>()?;
    let text = match args.out.format.unwrap_or(Format::Csv) {
        Format::Json => json_string(&rows),
        Format::Csv => {
            let mut header = ["axis_value", "pg_bound", "info_bits"]
                .map(String::from)
                .to_vec();
            if args.with_oracle {
                header.push("oracle_value".into());
            }
            let body: Vec<Vec<String>> = rows
                .iter()
                .map(|r| {
                    let mut row = vec![sig9(r.axis_value), sig9(r.pg_bound), sig9(r.info_bits)];
                    if let Some(o) = r.oracle_value {
                        row.push(sig9(o));
                    }
                    row
                })
                .collect();
            csv_string(&header, &body)?
        }
    };
    Ok(Report::ok(text))
}

#[derive(Serialize)]
struct BranchSummary {
    q: f64,
    kind: &'static str,
    parameter: Option<f64>,
    value: f64,
}

#[derive(Serialize)]
struct StrategyReport {
    n: usize,
    branches: Vec<BranchSummary>,
    mixture_value: f64,
    embedded_value: f64,
    averaged_log_pg_bits: f64,
    average_parameter: Option<f64>,
    bound_at_average: Option<f64>,
}

pub fn cmd_sr_demo(args: &SrDemoArgs) -> CliResult<Report> {
    let opts = oracle_options(&args.oracle, 0)?;
    let Some(path) = &args.strategy else {
        let v = ea_average_counterexample(&opts)?;
        let text = json_string(&json!({
            "example": "entanglement-assisted qutrit vs. qubit/5-dimensional mixture, n = 30",
            "peak_value": v.peak_value,
            "average_value": v.average_value,
            "peak_bound": v.peak_bound,
            "average_exceeds_bound": v.average_value > v.peak_bound,
        }));
        return Ok(Report::ok(text));
    };
    let file: StrategyFile = read_json(path).map_err(input_error)?;
    let s = file.into_strategy().map_err(input_error)?;
    let values = branch_values(&s, &opts)?;
    let embedded = optimize_discrimination(&embed_cq(&s).map_err(input_error)?, &opts);
    let average = average_parameter(&s).ok();
    let template = &s.branches()[0].gamma;
    let bound_at_average = match average {
        Some(g) => bound_at_parameter(template, g, s.n(), &opts).ok(),
        None => None,
    };
    let report = StrategyReport {
        n: s.n(),
        branches: s
            .branches()
            .iter()
            .zip(&values)
            .map(|(b, &value)| BranchSummary {
                q: b.q,
                kind: b.gamma.kind_name(),
                parameter: infocap::randomness::scalar_parameter(&b.gamma).ok(),
                value,
            })
            .collect(),
        mixture_value: s.branches().iter().zip(&values).map(|(b, v)| b.q * v).sum(),
        embedded_value: embedded.value,
        averaged_log_pg_bits: averaged_log_pg(&s, &opts)?,
        average_parameter: average,
        bound_at_average,
    };
    Ok(Report::ok(json_string(&report)))
}

pub fn write_side_file(path: &Path, text: &str) -> CliResult<()> {
    std::fs::write(path, text)
        .map_err(|e| CliError::Input(format!("cannot write {}: {e}", path.display())))
}
