//! Tightness search: look for ensembles inside an assumption set whose
//! guessing probability reaches the analytic bound.
//!
//! Each restart starts from a saturating construction (restart 0 unperturbed,
//! later restarts randomly perturbed and projected back onto the boundary of
//! the set), then alternates the discrimination oracle with a state update
//! that maximizes `<psi_x|N_x|psi_x>` over the set. Restart `r` uses the seed
//! `seed + r`.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::bounds::{bound_almost_dim, bound_for};
use crate::discrimination::{optimize_discrimination, OracleOptions};
use crate::ensembles::{
    almost_qudit_simplex_ensemble, equiangular_kets, vacuum_cone_ensemble, Assumption,
    StateEnsemble,
};
use crate::error::{Error, Result};
use crate::matcore::{
    basis_ket, c64, embed_ket, gram_matrix, hermitian_eig, normalize, vectors_from_gram, Ket, C64,
};
use crate::sampling::random_ket;

#[derive(Clone, Debug)]
pub struct SearchConfig {
    /// Template assumption; one of vacuum, overlap, almost_dim, distrust.
    pub assumption: Assumption,
    pub n: usize,
    pub restarts: usize,
    pub seed: u64,
    /// Size of the random perturbation applied for restarts `r >= 1`.
    pub perturbation: f64,
    /// Oracle / state-update rounds per restart.
    pub rounds: usize,
    pub oracle: OracleOptions,
}

impl SearchConfig {
    pub fn new(assumption: Assumption, n: usize) -> Self {
        Self {
            assumption,
            n,
            restarts: 16,
            seed: 0,
            perturbation: 0.3,
            rounds: 8,
            oracle: OracleOptions::default(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct RestartOutcome {
    pub restart: usize,
    pub seed: u64,
    pub value: f64,
    pub converged: bool,
}

#[derive(Clone, Debug, Serialize)]
pub struct SearchReport {
    pub assumption: String,
    pub n: usize,
    pub best: f64,
    pub best_restart: usize,
    pub bound: f64,
    /// `bound - best`; positive when the search stays below the bound.
    pub gap: f64,
    pub per_restart: Vec<RestartOutcome>,
    #[serde(skip)]
    pub best_ensemble: Option<StateEnsemble>,
}

/// The constraint set as a projection rule on pure states.
enum Set {
    /// `|<c|psi>|^2 = 1 - w` for the fixed unit vector `c`, remainder free.
    Anchored { anchors: Vec<Ket>, weight: f64 },
    /// `||P psi||^2 = 1 - w` with `P` the projector on the first `d` coordinates.
    Leading { d: usize, weight: f64 },
    /// `|<psi_x|psi_y>| = a` for all pairs.
    Overlap { a: f64 },
}

fn split_leading(v: &Ket, d: usize) -> (Ket, Ket) {
    let mut core = v.clone();
    let mut rest = v.clone();
    for i in 0..v.len() {
        if i < d {
            rest[i] = C64::new(0.0, 0.0);
        } else {
            core[i] = C64::new(0.0, 0.0);
        }
    }
    (core, rest)
}

/// Combine a core and a complement direction with the prescribed weights.
/// Degenerate directions fall back to `fallback_*`.
fn combine(core: &Ket, rest: &Ket, weight: f64, fallback_core: &Ket, fallback_rest: &Ket) -> Ket {
    let pick = |v: &Ket, f: &Ket| {
        if v.norm() > 1e-12 {
            normalize(v)
        } else {
            f.clone()
        }
    };
    pick(core, fallback_core) * c64((1.0 - weight).sqrt(), 0.0)
        + pick(rest, fallback_rest) * c64(weight.sqrt(), 0.0)
}

impl Set {
    /// Closest-in-form point of the set along direction `g`: keeps the
    /// directions of the core and complement parts of `g`, fixes their weights.
    fn project(&self, x: usize, g: &Ket, current: &Ket) -> Ket {
        match self {
            Set::Anchored { anchors, weight } => {
                let c = &anchors[x];
                let overlap = c.dotc(g);
                let phase = if overlap.norm() > 1e-12 {
                    overlap / overlap.norm()
                } else {
                    c64(1.0, 0.0)
                };
                let rest = g - c * overlap;
                let cur_rest = current - c * c.dotc(current);
                combine(&(c * phase), &rest, *weight, c, &cur_rest)
            }
            Set::Leading { d, weight } => {
                let (core, rest) = split_leading(g, *d);
                let (cur_core, cur_rest) = split_leading(current, *d);
                combine(&core, &rest, *weight, &cur_core, &cur_rest)
            }
            Set::Overlap { .. } => current.clone(),
        }
    }
}

struct Problem {
    set: Set,
    seed: Vec<Ket>,
    bound: f64,
}

fn problem(cfg: &SearchConfig) -> Result<Problem> {
    let n = cfg.n;
    let bound = bound_for(&cfg.assumption, n, &cfg.oracle)?.pg_bound;
    match &cfg.assumption {
        Assumption::Vacuum { omega } => {
            let (e, vac) = vacuum_cone_ensemble(n, *omega)?;
            let dim = e.dim();
            Ok(Problem {
                set: Set::Anchored {
                    anchors: vec![vac; n],
                    weight: *omega,
                },
                seed: kets_of(&e, dim)?,
                bound,
            })
        }
        Assumption::UniformOverlap { a } => Ok(Problem {
            set: Set::Overlap { a: *a },
            seed: equiangular_kets(n, *a)?,
            bound,
        }),
        Assumption::AlmostDim { d, eps, .. } => {
            let (e, _) = almost_qudit_simplex_ensemble(*d, n, *eps)?;
            let dim = e.dim();
            Ok(Problem {
                set: Set::Leading {
                    d: *d,
                    weight: *eps,
                },
                seed: kets_of(&e, dim)?,
                bound: bound_almost_dim(*d, n, *eps)?.pg_bound,
            })
        }
        Assumption::Distrust { targets, eps } => {
            if targets.len() != n {
                return Err(Error::DimensionMismatch {
                    expected: n,
                    got: targets.len(),
                });
            }
            let tdim = targets.iter().map(|t| t.len()).max().unwrap_or(1);
            let dim = tdim + n;
            let anchors = targets
                .iter()
                .map(|t| embed_ket(&normalize(t), dim))
                .collect::<Result<Vec<_>>>()?;
            let seed = anchors
                .iter()
                .enumerate()
                .map(|(x, t)| {
                    t * c64((1.0 - eps).sqrt(), 0.0)
                        + basis_ket(dim, tdim + x) * c64(eps.sqrt(), 0.0)
                })
                .collect();
            Ok(Problem {
                set: Set::Anchored {
                    anchors,
                    weight: *eps,
                },
                seed,
                bound,
            })
        }
        other => Err(Error::ParamOutOfRange(format!(
            "no tightness search for {} assumptions",
            other.kind_name()
        ))),
    }
}

/// Unit vectors of a pure ensemble, as the leading eigenvector of each state.
fn kets_of(e: &StateEnsemble, dim: usize) -> Result<Vec<Ket>> {
    e.states()
        .iter()
        .map(|r| Ok(hermitian_eig(r)?.eigenvector(0)))
        .map(|k: Result<Ket>| embed_ket(&k?, dim))
        .collect()
}

/// Random point of the set near `seed`.
fn perturb(p: &Problem, scale: f64, rng: &mut ChaCha8Rng) -> Result<Vec<Ket>> {
    match &p.set {
        Set::Overlap { a } => {
            // Random phases on the off-diagonal Gram entries, shrunk until PSD.
            let n = p.seed.len();
            let base = gram_matrix(&p.seed);
            let phases: Vec<f64> = (0..n * n).map(|_| rng.random_range(-1.0..1.0)).collect();
            let mut s = scale;
            for _ in 0..40 {
                let g = crate::matcore::ComplexMatrix::from_fn(n, n, |x, y| {
                    if x == y {
                        c64(1.0, 0.0)
                    } else {
                        let (i, j) = if x < y { (x, y) } else { (y, x) };
                        let theta = s * std::f64::consts::PI * phases[i * n + j];
                        let z = C64::from_polar(*a, theta);
                        if x < y {
                            z
                        } else {
                            z.conj()
                        }
                    }
                });
                if crate::matcore::min_eigenvalue(&g)? >= -1e-12 {
                    return vectors_from_gram(&g);
                }
                s *= 0.5;
            }
            vectors_from_gram(&base)
        }
        set => Ok(p
            .seed
            .iter()
            .enumerate()
            .map(|(x, k)| {
                let noise = random_ket(k.len(), rng) * c64(scale, 0.0);
                let moved = k + noise;
                set.project(x, &moved, k)
            })
            .collect()),
    }
}

fn run_restart(
    p: &Problem,
    cfg: &SearchConfig,
    restart: usize,
) -> Result<(RestartOutcome, StateEnsemble)> {
    let seed = cfg.seed.wrapping_add(restart as u64);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut kets = if restart == 0 {
        p.seed.clone()
    } else {
        perturb(p, cfg.perturbation, &mut rng)?
    };
    let mut best: Option<(f64, bool, StateEnsemble)> = None;
    for _ in 0..cfg.rounds.max(1) {
        let e = StateEnsemble::from_kets(&kets)?;
        let res = optimize_discrimination(&e, &cfg.oracle);
        let improved = best.as_ref().is_none_or(|(v, _, _)| res.value > *v + 1e-14);
        if improved {
            best = Some((res.value, res.converged, e));
        } else {
            break;
        }
        if matches!(p.set, Set::Overlap { .. }) {
            break;
        }
        kets = kets
            .iter()
            .zip(res.povm.elements())
            .enumerate()
            .map(|(x, (k, m))| p.set.project(x, &m.apply(k), k))
            .collect();
    }
    let (value, converged, e) = best.expect("at least one round");
    Ok((
        RestartOutcome {
            restart,
            seed,
            value,
            converged,
        },
        e,
    ))
}

/// Runs `cfg.restarts` (at least one) seeded searches in parallel; results are
/// ordered by restart index regardless of scheduling.
pub fn tightness_search(cfg: &SearchConfig) -> Result<SearchReport> {
    let p = problem(cfg)?;
    let outcomes = (0..cfg.restarts.max(1))
        .into_par_iter()
        .map(|r| run_restart(&p, cfg, r))
        .collect::<Result<Vec<_>>>()?;
    let (best_restart, best) =
        outcomes
            .iter()
            .enumerate()
            .fold((0, f64::NEG_INFINITY), |(bi, bv), (i, (o, _))| {
                if o.value > bv {
                    (i, o.value)
                } else {
                    (bi, bv)
                }
            });
    let best_ensemble = Some(outcomes[best_restart].1.clone());
    Ok(SearchReport {
        assumption: cfg.assumption.kind_name().to_string(),
        n: cfg.n,
        best,
        best_restart,
        bound: p.bound,
        gap: p.bound - best,
        per_restart: outcomes.into_iter().map(|(o, _)| o).collect(),
        best_ensemble,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ensembles::{check_assumption, CheckContext};

    #[test]
    fn vacuum_search_is_tight() {
        let mut cfg = SearchConfig::new(Assumption::Vacuum { omega: 0.2 }, 3);
        cfg.restarts = 4;
        let rep = tightness_search(&cfg).unwrap();
        assert!(rep.gap.abs() <= 1e-6, "gap {}", rep.gap);
    }

    #[test]
    fn almost_dim_search_is_tight() {
        for eps in [0.01, 0.05, 0.1] {
            let mut cfg = SearchConfig::new(
                Assumption::AlmostDim {
                    d: 2,
                    eps,
                    projector: None,
                },
                4,
            );
            cfg.restarts = 4;
            let rep = tightness_search(&cfg).unwrap();
            assert!(
                rep.gap <= 1e-3 && rep.gap >= -1e-6,
                "eps {eps}: gap {}",
                rep.gap
            );
        }
    }

    #[test]
    fn perturbed_restarts_stay_in_the_set() {
        let a = Assumption::AlmostDim {
            d: 2,
            eps: 0.05,
            projector: None,
        };
        let cfg = SearchConfig::new(a.clone(), 4);
        let p = problem(&cfg).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let kets = perturb(&p, 0.5, &mut rng).unwrap();
        let e = StateEnsemble::from_kets(&kets).unwrap();
        let with_pi = Assumption::AlmostDim {
            d: 2,
            eps: 0.05 + 1e-9,
            projector: Some(crate::ensembles::leading_projector(e.dim(), 2)),
        };
        assert!(
            check_assumption(&e, &with_pi, &CheckContext::default())
                .unwrap()
                .satisfied
        );

        let cfg = SearchConfig::new(Assumption::UniformOverlap { a: 0.4 }, 4);
        let p = problem(&cfg).unwrap();
        let kets = perturb(&p, 0.5, &mut rng).unwrap();
        let e = StateEnsemble::from_kets(&kets).unwrap();
        let rep = check_assumption(
            &e,
            &Assumption::UniformOverlap { a: 0.4 - 1e-9 },
            &CheckContext::default(),
        )
        .unwrap();
        assert!(rep.satisfied);
    }

    #[test]
    fn distrust_search_reports_a_gap() {
        let targets = equiangular_kets(3, 0.5).unwrap();
        let mut cfg = SearchConfig::new(Assumption::Distrust { targets, eps: 0.05 }, 3);
        cfg.restarts = 3;
        let rep = tightness_search(&cfg).unwrap();
        assert!(rep.gap >= -1e-6);
    }

    #[test]
    fn search_is_deterministic() {
        let mut cfg = SearchConfig::new(
            Assumption::AlmostDim {
                d: 2,
                eps: 0.05,
                projector: None,
            },
            4,
        );
        cfg.restarts = 3;
        cfg.seed = 11;
        let a = serde_json::to_string(&tightness_search(&cfg).unwrap()).unwrap();
        let b = serde_json::to_string(&tightness_search(&cfg).unwrap()).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn unsupported_kind_is_rejected() {
        let cfg = SearchConfig::new(Assumption::Dimension { d: 2 }, 4);
        assert!(tightness_search(&cfg).is_err());
    }
}
