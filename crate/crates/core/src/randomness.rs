//! Shared randomness between sender and receiver.
//!
//! A strategy is a distribution `q` over branches `lambda`, each with its own
//! ensemble and assumption parameter. Peak semantics require every branch to
//! satisfy the common assumption; average semantics only require the
//! `q`-weighted parameter to meet the target.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::bounds::{almost_dim_relaxed_pg, bound_ea_dimension, bound_eps, overlap_pg, vacuum_pg};
use crate::discrimination::{optimize_discrimination, OracleOptions};
use crate::ensembles::{
    check_assumption, dense_coding_ensemble, Assumption, CheckContext, MembershipReport,
    StateDiagnostic, StateEnsemble,
};
use crate::error::{Error, Result};
use crate::matcore::{ComplexMatrix, Ket};

const WEIGHT_TOL: f64 = 1e-12;
const AVERAGE_TOL: f64 = 1e-10;
/// Tolerance of the concavity inequality.
pub const CONCAVITY_TOL: f64 = 1e-10;

#[derive(Clone, Debug)]
pub struct Branch {
    pub q: f64,
    pub ensemble: StateEnsemble,
    pub gamma: Assumption,
    /// Vacuum vector used when `gamma` is a vacuum assumption.
    pub vacuum: Option<Ket>,
}

impl Branch {
    pub fn new(q: f64, ensemble: StateEnsemble, gamma: Assumption) -> Self {
        Self {
            q,
            ensemble,
            gamma,
            vacuum: None,
        }
    }

    fn context(&self) -> CheckContext {
        CheckContext {
            vacuum: self.vacuum.clone(),
            ..CheckContext::default()
        }
    }
}

#[derive(Clone, Debug)]
pub struct SrStrategy {
    branches: Vec<Branch>,
}

impl SrStrategy {
    pub fn new(branches: Vec<Branch>) -> Result<Self> {
        let first = branches
            .first()
            .ok_or_else(|| Error::InvalidStrategy("no branches".into()))?;
        let n = first.ensemble.n();
        let kind = first.gamma.kind_name();
        let mut total = 0.0;
        for (i, b) in branches.iter().enumerate() {
            if !(0.0..=1.0).contains(&b.q) {
                return Err(Error::InvalidStrategy(format!(
                    "branch {i} has weight {}",
                    b.q
                )));
            }
            if b.ensemble.n() != n {
                return Err(Error::InvalidStrategy(format!(
                    "branch {i} has {} inputs, expected {n}",
                    b.ensemble.n()
                )));
            }
            if b.gamma.kind_name() != kind {
                return Err(Error::KindMismatch {
                    expected: kind.into(),
                    got: b.gamma.kind_name().into(),
                });
            }
            total += b.q;
        }
        if (total - 1.0).abs() > WEIGHT_TOL {
            return Err(Error::InvalidStrategy(format!("weights sum to {total}")));
        }
        Ok(Self { branches })
    }

    pub fn branches(&self) -> &[Branch] {
        &self.branches
    }

    pub fn n(&self) -> usize {
        self.branches[0].ensemble.n()
    }
}

/// `P_g` of each branch (the receiver knows `lambda`).
pub fn branch_values(s: &SrStrategy, opts: &OracleOptions) -> Result<Vec<f64>> {
    s.branches
        .par_iter()
        .map(|b| {
            let r = optimize_discrimination(&b.ensemble, opts);
            if r.converged {
                Ok(r.value)
            } else {
                Err(Error::OracleNotConverged { gap: r.gap() })
            }
        })
        .collect()
}

/// `sum_lambda q_lambda P_g({rho_x^lambda})`.
pub fn mixture_guess_value(s: &SrStrategy, opts: &OracleOptions) -> Result<f64> {
    Ok(s.branches
        .iter()
        .zip(branch_values(s, opts)?)
        .map(|(b, v)| b.q * v)
        .sum())
}

/// `log2 n + sum_lambda q_lambda log2 P_g({rho_x^lambda})`: information
/// averaged over the shared randomness. Reported only; no membership semantics.
pub fn averaged_log_pg(s: &SrStrategy, opts: &OracleOptions) -> Result<f64> {
    let n = s.n() as f64;
    Ok(n.log2()
        + s.branches
            .iter()
            .zip(branch_values(s, opts)?)
            .map(|(b, v)| b.q * v.log2())
            .sum::<f64>())
}

/// Classical-quantum states `sum_lambda q_lambda |lambda><lambda| (x) rho_x^lambda`,
/// block diagonal on dimension `sum_lambda dim_lambda`.
pub fn embed_cq(s: &SrStrategy) -> Result<StateEnsemble> {
    let states = (0..s.n())
        .map(|x| {
            let blocks: Vec<ComplexMatrix> = s
                .branches
                .iter()
                .map(|b| b.ensemble.state(x).scale(b.q))
                .collect();
            ComplexMatrix::direct_sum(&blocks.iter().collect::<Vec<_>>())
        })
        .collect();
    StateEnsemble::new(states)
}

/// Peak semantics: every branch satisfies `gamma`.
pub fn check_peak(s: &SrStrategy, gamma: &Assumption) -> Result<MembershipReport> {
    let mut detail = Vec::with_capacity(s.branches.len());
    for (index, b) in s.branches.iter().enumerate() {
        if b.gamma.kind_name() != gamma.kind_name() {
            return Err(Error::KindMismatch {
                expected: gamma.kind_name().into(),
                got: b.gamma.kind_name().into(),
            });
        }
        let rep = check_assumption(&b.ensemble, gamma, &b.context())?;
        detail.push(StateDiagnostic {
            index,
            slack: rep.worst_slack,
        });
    }
    let worst_slack = detail.iter().map(|d| d.slack).fold(f64::INFINITY, f64::min);
    Ok(MembershipReport {
        satisfied: worst_slack >= -crate::ensembles::MEMBERSHIP_SLACK,
        worst_slack,
        detail,
        note: Some("per-branch worst slack".into()),
    })
}

/// Scalar parameter averaged under average-gamma semantics.
pub fn scalar_parameter(a: &Assumption) -> Result<f64> {
    match a {
        Assumption::Dimension { d } | Assumption::EaDimension { d } => Ok(*d as f64),
        Assumption::Vacuum { omega } => Ok(*omega),
        Assumption::UniformOverlap { a } => Ok(*a),
        Assumption::AlmostDim { eps, .. } | Assumption::Distrust { eps, .. } => Ok(*eps),
        Assumption::Information { .. } => Err(Error::NonScalarParameter(
            "information is averaged at the level of P_g, not alpha".into(),
        )),
    }
}

/// Overlap is a lower-bound constraint; every other parameter is an upper bound.
fn larger_is_looser(a: &Assumption) -> bool {
    !matches!(a, Assumption::UniformOverlap { .. })
}

/// Parts of the assumption that must agree across branches when averaging.
fn fixed_part_matches(a: &Assumption, b: &Assumption) -> bool {
    match (a, b) {
        (Assumption::AlmostDim { d: d1, .. }, Assumption::AlmostDim { d: d2, .. }) => d1 == d2,
        (Assumption::Distrust { targets: t1, .. }, Assumption::Distrust { targets: t2, .. }) => {
            t1.len() == t2.len()
                && t1
                    .iter()
                    .zip(t2)
                    .all(|(x, y)| x.len() == y.len() && (x - y).norm() < 1e-12)
        }
        _ => true,
    }
}

/// `q`-weighted parameter of the branches.
pub fn average_parameter(s: &SrStrategy) -> Result<f64> {
    s.branches
        .iter()
        .map(|b| Ok(b.q * scalar_parameter(&b.gamma)?))
        .sum()
}

/// Average semantics: each branch satisfies its own `gamma_lambda` and the
/// weighted parameter meets `gamma_target`.
pub fn check_average(s: &SrStrategy, gamma_target: f64) -> Result<MembershipReport> {
    let reference = &s.branches[0].gamma;
    for b in &s.branches {
        if !fixed_part_matches(reference, &b.gamma) {
            return Err(Error::NonScalarParameter(format!(
                "{} branches differ beyond the averaged parameter",
                reference.kind_name()
            )));
        }
    }
    let avg = average_parameter(s)?;
    let mut detail = Vec::with_capacity(s.branches.len());
    for (index, b) in s.branches.iter().enumerate() {
        let rep = check_assumption(&b.ensemble, &b.gamma, &b.context())?;
        detail.push(StateDiagnostic {
            index,
            slack: rep.worst_slack,
        });
    }
    let branch_worst = detail.iter().map(|d| d.slack).fold(f64::INFINITY, f64::min);
    let avg_slack = if larger_is_looser(reference) {
        gamma_target - avg
    } else {
        avg - gamma_target
    };
    Ok(MembershipReport {
        satisfied: branch_worst >= -crate::ensembles::MEMBERSHIP_SLACK && avg_slack >= -AVERAGE_TOL,
        worst_slack: branch_worst.min(avg_slack),
        detail,
        note: Some(format!("average parameter {avg}")),
    })
}

/// Bound of the strategy's assumption kind evaluated at a (possibly
/// non-integer) averaged parameter.
pub fn bound_at_parameter(
    template: &Assumption,
    gamma: f64,
    n: usize,
    opts: &OracleOptions,
) -> Result<f64> {
    match template {
        Assumption::Dimension { .. } => Ok(crate::bounds::dimension_pg(gamma, n)),
        Assumption::EaDimension { .. } => Ok(crate::bounds::dimension_pg(gamma * gamma, n)),
        Assumption::Vacuum { .. } => Ok(vacuum_pg(n, gamma)),
        Assumption::UniformOverlap { .. } => Ok(overlap_pg(n, gamma)),
        Assumption::AlmostDim { d, .. } => Ok(almost_dim_relaxed_pg(*d as f64 / n as f64, gamma)),
        Assumption::Distrust { targets, .. } => {
            let b = crate::bounds::bound_distrust(&StateEnsemble::from_kets(targets)?, 0.0, opts)?;
            bound_eps(b.pg_bound, gamma)
        }
        Assumption::Information { .. } => Err(Error::NonScalarParameter("information".into())),
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct CounterexampleValues {
    /// EA qutrit, dense coding, `n = 30`.
    pub peak_value: f64,
    /// Qubit (weight 2/3) mixed with a 5-dimensional system (weight 1/3).
    pub average_value: f64,
    /// `bound_ea_dimension(3, 30)`.
    pub peak_bound: f64,
}

/// Dense-coding strategies showing that the entanglement-assisted bound
/// fails under average-gamma semantics.
pub fn ea_average_counterexample(opts: &OracleOptions) -> Result<CounterexampleValues> {
    let n = 30;
    let peak = optimize_discrimination(&dense_coding_ensemble(3, n)?, opts);
    if !peak.converged {
        return Err(Error::OracleNotConverged { gap: peak.gap() });
    }
    let strategy = SrStrategy::new(vec![
        Branch::new(
            2.0 / 3.0,
            dense_coding_ensemble(2, n)?,
            Assumption::EaDimension { d: 2 },
        ),
        Branch::new(
            1.0 / 3.0,
            dense_coding_ensemble(5, n)?,
            Assumption::EaDimension { d: 5 },
        ),
    ])?;
    Ok(CounterexampleValues {
        peak_value: peak.value,
        average_value: mixture_guess_value(&strategy, opts)?,
        peak_bound: bound_ea_dimension(3, n)?.pg_bound,
    })
}

/// Bound whose concavity is probed.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum ConcavityTarget {
    /// `omega -> vacuum bound`, `n` fixed.
    Vacuum { n: usize },
    /// `a -> overlap bound`, `n` fixed.
    Overlap { n: usize },
    /// `eps -> bound_eps(pg0, eps)`.
    Eps { pg0: f64 },
    /// `(eps, d/n) -> almost-dimension bound`, jointly.
    AlmostDim { n: usize },
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ConcavityReport {
    pub samples: usize,
    pub failures: usize,
    /// Smallest `f(q g1 + (1-q) g2) - (q f(g1) + (1-q) f(g2))` observed.
    pub min_margin: f64,
}

impl ConcavityReport {
    pub fn passed(&self) -> bool {
        self.failures == 0
    }
}

/// Midpoint-style concavity test of `f` on random pairs in the box `domain`.
pub fn concavity_probe_fn(
    f: impl Fn(&[f64]) -> f64,
    domain: &[(f64, f64)],
    samples: usize,
    seed: u64,
) -> ConcavityReport {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut failures = 0;
    let mut min_margin = f64::INFINITY;
    for _ in 0..samples {
        let g1: Vec<f64> = domain
            .iter()
            .map(|&(lo, hi)| rng.random_range(lo..=hi))
            .collect();
        let g2: Vec<f64> = domain
            .iter()
            .map(|&(lo, hi)| rng.random_range(lo..=hi))
            .collect();
        let q: f64 = rng.random_range(0.0..=1.0);
        let mix: Vec<f64> = g1
            .iter()
            .zip(&g2)
            .map(|(a, b)| q * a + (1.0 - q) * b)
            .collect();
        let margin = f(&mix) - (q * f(&g1) + (1.0 - q) * f(&g2));
        if margin < -CONCAVITY_TOL {
            failures += 1;
        }
        min_margin = min_margin.min(margin);
    }
    ConcavityReport {
        samples,
        failures,
        min_margin,
    }
}

pub fn concavity_probe(target: ConcavityTarget, samples: usize, seed: u64) -> ConcavityReport {
    match target {
        ConcavityTarget::Vacuum { n } => {
            concavity_probe_fn(|g| vacuum_pg(n, g[0]), &[(0.0, 1.0)], samples, seed)
        }
        ConcavityTarget::Overlap { n } => {
            concavity_probe_fn(|g| overlap_pg(n, g[0]), &[(0.0, 1.0)], samples, seed)
        }
        ConcavityTarget::Eps { pg0 } => concavity_probe_fn(
            |g| almost_dim_relaxed_pg(pg0, g[0]),
            &[(0.0, 1.0)],
            samples,
            seed,
        ),
        ConcavityTarget::AlmostDim { n } => concavity_probe_fn(
            |g| almost_dim_relaxed_pg(g[1], g[0]),
            &[(0.0, 1.0), (1.0 / n as f64, 1.0)],
            samples,
            seed,
        ),
    }
}

#[derive(Serialize, Deserialize)]
struct BranchRepr {
    q: f64,
    ensemble: crate::io::EnsembleFile,
    gamma: Assumption,
    #[serde(default, skip_serializing_if = "Option::is_none", with = "opt_ket")]
    vacuum: Option<Ket>,
}

/// `{"branches": [{"q", "ensemble", "gamma", "vacuum"?}]}`.
#[derive(Serialize, Deserialize)]
pub struct StrategyFile {
    branches: Vec<BranchRepr>,
}

impl StrategyFile {
    pub fn from_strategy(s: &SrStrategy) -> Self {
        Self {
            branches: s
                .branches
                .iter()
                .map(|b| BranchRepr {
                    q: b.q,
                    ensemble: crate::io::EnsembleFile::from_ensemble(&b.ensemble),
                    gamma: b.gamma.clone(),
                    vacuum: b.vacuum.clone(),
                })
                .collect(),
        }
    }

    pub fn into_strategy(self) -> Result<SrStrategy> {
        SrStrategy::new(
            self.branches
                .into_iter()
                .map(|b| {
                    Ok(Branch {
                        q: b.q,
                        ensemble: b.ensemble.into_ensemble()?,
                        gamma: b.gamma,
                        vacuum: b.vacuum,
                    })
                })
                .collect::<Result<Vec<_>>>()?,
        )
    }
}

mod opt_ket {
    use crate::matcore::{c64, Ket};
    use serde::{Deserialize, Deserializer, Serialize, Serializer};

    pub fn serialize<S: Serializer>(v: &Option<Ket>, s: S) -> Result<S::Ok, S::Error> {
        v.as_ref()
            .map(|k| k.iter().map(|z| [z.re, z.im]).collect::<Vec<_>>())
            .serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Option<Ket>, D::Error> {
        let raw: Option<Vec<[f64; 2]>> = Option::deserialize(d)?;
        Ok(raw.map(|v| Ket::from_iterator(v.len(), v.into_iter().map(|p| c64(p[0], p[1])))))
    }
}
