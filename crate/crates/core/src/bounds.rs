//! Closed-form upper bounds on the guessing probability of `n` equiprobable
//! pure states under each communication assumption, plus the operator
//! inequality behind the almost-dimension and distrust bounds.
//!
//! All bounds are reported in `[1/n, 1]` together with the accessible
//! information `log2 n + log2 P_g` in bits.

use serde::{Deserialize, Serialize};

use crate::discrimination::{accessible_information, optimize_discrimination, OracleOptions};
use crate::ensembles::{almost_qubit_epsilon, Assumption, StateEnsemble};
use crate::error::{Error, Result};
use crate::matcore::{hermitian_eig, min_eigenvalue, ComplexMatrix, Ket};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Validity {
    /// Closed form evaluated inside its domain.
    Valid,
    /// Parameter beyond the point where perfect discrimination is possible.
    TriviallyOne,
    /// No closed form applies; value is the defining constraint itself.
    OutOfDomain,
}

impl Validity {
    pub fn as_str(&self) -> &'static str {
        match self {
            Self::Valid => "valid",
            Self::TriviallyOne => "trivially_one",
            Self::OutOfDomain => "out_of_domain",
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct BoundResult {
    pub pg_bound: f64,
    #[serde(rename = "info_bits")]
    pub info_bound: f64,
    pub validity: Validity,
    pub assumption: Assumption,
    pub n: usize,
    /// Free-form caveat, e.g. non-tightness of the distrust bound.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub note: Option<String>,
}

impl BoundResult {
    fn new(pg: f64, n: usize, assumption: Assumption, validity: Validity) -> Self {
        let pg_bound = pg.clamp(1.0 / n as f64, 1.0);
        Self {
            pg_bound,
            info_bound: accessible_information(n, pg_bound).bits,
            validity,
            assumption,
            n,
            note: None,
        }
    }
}

fn out_of_range(msg: String) -> Error {
    Error::ParamOutOfRange(msg)
}

fn require_n(n: usize, min: usize) -> Result<()> {
    if n >= min {
        Ok(())
    } else {
        Err(out_of_range(format!("n = {n} < {min}")))
    }
}

fn require_unit(name: &str, v: f64) -> Result<()> {
    if (0.0..=1.0).contains(&v) {
        Ok(())
    } else {
        Err(out_of_range(format!("{name} = {v} not in [0, 1]")))
    }
}

/// `min(1, d/n)` for real-valued `d` (used for averaged dimensions).
pub fn dimension_pg(d: f64, n: usize) -> f64 {
    (d / n as f64).min(1.0)
}

pub fn bound_dimension(d: usize, n: usize) -> Result<BoundResult> {
    require_n(n, 1)?;
    if d == 0 {
        return Err(out_of_range("d = 0".into()));
    }
    let validity = if d >= n {
        Validity::TriviallyOne
    } else {
        Validity::Valid
    };
    Ok(BoundResult::new(
        dimension_pg(d as f64, n),
        n,
        Assumption::Dimension { d },
        validity,
    ))
}

/// `min(1, d^2/n)`.
pub fn bound_ea_dimension(d: usize, n: usize) -> Result<BoundResult> {
    require_n(n, 1)?;
    if d == 0 {
        return Err(out_of_range("d = 0".into()));
    }
    let validity = if d * d >= n {
        Validity::TriviallyOne
    } else {
        Validity::Valid
    };
    Ok(BoundResult::new(
        dimension_pg((d * d) as f64, n),
        n,
        Assumption::EaDimension { d },
        validity,
    ))
}

/// Guessing probability of the equiangular ensemble with overlap `a`:
/// `((n-1) sqrt(1-a) + sqrt((n-1)a + 1))^2 / n^2`.
pub fn overlap_pg(n: usize, a: f64) -> f64 {
    let m = n as f64 - 1.0;
    let s = m * (1.0 - a).max(0.0).sqrt() + (m * a + 1.0).max(0.0).sqrt();
    s * s / (n as f64 * n as f64)
}

pub fn bound_overlap(n: usize, a: f64) -> Result<BoundResult> {
    require_n(n, 2)?;
    require_unit("a", a)?;
    Ok(BoundResult::new(
        overlap_pg(n, a),
        n,
        Assumption::UniformOverlap { a },
        Validity::Valid,
    ))
}

/// Smallest pairwise overlap of `n` pure states at vacuum overlap
/// `sqrt(1 - omega)`: `a* = 1 - n omega / (n - 1)`.
pub fn min_overlap_vacuum(n: usize, omega: f64) -> Result<f64> {
    require_n(n, 2)?;
    let limit = (n as f64 - 1.0) / n as f64;
    if !(0.0..=limit + 1e-12).contains(&omega) {
        return Err(out_of_range(format!(
            "omega = {omega} not in [0, (n-1)/n = {limit}]"
        )));
    }
    Ok((1.0 - n as f64 * omega / (n as f64 - 1.0)).clamp(0.0, 1.0))
}

/// `(sqrt(omega (n-1)) + sqrt(1 - omega))^2 / n` on `0 <= omega <= (n-1)/n`.
pub fn vacuum_pg(n: usize, omega: f64) -> f64 {
    let limit = (n as f64 - 1.0) / n as f64;
    if omega >= limit {
        return 1.0;
    }
    let s = (omega * (n as f64 - 1.0)).sqrt() + (1.0 - omega).sqrt();
    (s * s / n as f64).min(1.0)
}

pub fn bound_vacuum(n: usize, omega: f64) -> Result<BoundResult> {
    require_n(n, 2)?;
    require_unit("omega", omega)?;
    let limit = (n as f64 - 1.0) / n as f64;
    let validity = if omega > limit {
        Validity::TriviallyOne
    } else {
        Validity::Valid
    };
    Ok(BoundResult::new(
        vacuum_pg(n, omega),
        n,
        Assumption::Vacuum { omega },
        validity,
    ))
}

/// `h(eps, mu) = (sqrt(mu^2 + 4 eps (1 + mu)) - mu) / 2`.
pub fn h_func(eps: f64, mu: f64) -> Result<f64> {
    require_unit("eps", eps)?;
    if mu < -1.0 {
        return Err(out_of_range(format!("mu = {mu} < -1")));
    }
    Ok(h_unchecked(eps, mu))
}

fn h_unchecked(eps: f64, mu: f64) -> f64 {
    ((mu * mu + 4.0 * eps * (1.0 + mu)).max(0.0).sqrt() - mu) / 2.0
}

/// Smallest eigenvalue of `(1+mu) sigma + s h(eps, mu) 1 - |phi><phi|`, where
/// `sigma` is the normalized projection of `phi` onto `pi`, `eps` its weight
/// outside `pi`, and `s = h_scale` (1 for the inequality itself).
pub fn lemma_margin(phi: &Ket, pi: &ComplexMatrix, mu: f64, h_scale: f64) -> Result<f64> {
    if mu < -1.0 {
        return Err(out_of_range(format!("mu = {mu} < -1")));
    }
    if pi.rows() != phi.len() {
        return Err(Error::DimensionMismatch {
            expected: phi.len(),
            got: pi.rows(),
        });
    }
    let weight = pi.expectation(phi);
    if weight <= 1e-14 {
        return Err(Error::ZeroProjection);
    }
    let eps = (1.0 - weight).clamp(0.0, 1.0);
    let projected = pi.apply(phi);
    let sigma = ComplexMatrix::projector(&projected).scale(1.0 / weight);
    let dim = phi.len();
    let lhs = &(&sigma.scale(1.0 + mu)
        + &ComplexMatrix::identity(dim).scale(h_scale * h_unchecked(eps, mu)))
        - &ComplexMatrix::projector(phi);
    min_eigenvalue(&lhs.hermitian_part())
}

/// Whether `|phi><phi| <= (1+mu) sigma + h(eps, mu) 1` holds within `tol`.
pub fn lemma_check(phi: &Ket, pi: &ComplexMatrix, mu: f64, tol: f64) -> Result<bool> {
    Ok(lemma_margin(phi, pi, mu, 1.0)? >= -tol)
}

/// Member `(1 + mu) pg0 + h(eps, mu)` of the family minimized by [`bound_eps`].
pub fn eps_family_value(pg0: f64, eps: f64, mu: f64) -> Result<f64> {
    Ok((1.0 + mu) * pg0 + h_func(eps, mu)?)
}

/// `pg0 + (1 - 2 pg0) eps + 2 sqrt(pg0 (1 - pg0)) sqrt(eps (1 - eps))`, equal to
/// 1 once `eps >= 1 - pg0` (where the closed form peaks).
pub fn bound_eps(pg0: f64, eps: f64) -> Result<f64> {
    require_unit("pg0", pg0)?;
    require_unit("eps", eps)?;
    Ok(eps_pg_unchecked(pg0, eps))
}

fn eps_pg_unchecked(pg0: f64, eps: f64) -> f64 {
    if eps >= 1.0 - pg0 {
        return 1.0;
    }
    let v = pg0
        + (1.0 - 2.0 * pg0) * eps
        + 2.0 * (pg0 * (1.0 - pg0)).sqrt() * (eps * (1.0 - eps)).sqrt();
    v.clamp(pg0, 1.0)
}

/// Almost-dimension bound with the dimension relaxed to the real ratio `r = d/n`.
pub fn almost_dim_relaxed_pg(ratio: f64, eps: f64) -> f64 {
    eps_pg_unchecked(ratio.clamp(0.0, 1.0), eps.clamp(0.0, 1.0))
}

pub fn bound_almost_dim(d: usize, n: usize, eps: f64) -> Result<BoundResult> {
    require_n(n, 1)?;
    if d == 0 {
        return Err(out_of_range("d = 0".into()));
    }
    require_unit("eps", eps)?;
    let pg0 = dimension_pg(d as f64, n);
    let validity = if eps >= 1.0 - pg0 {
        Validity::TriviallyOne
    } else {
        Validity::Valid
    };
    Ok(BoundResult::new(
        bound_eps(pg0, eps)?,
        n,
        Assumption::AlmostDim {
            d,
            eps,
            projector: None,
        },
        validity,
    ))
}

/// Distrust bound: the target ensemble's own guessing probability, computed by
/// the oracle and inflated to a certified upper value, pushed through
/// [`bound_eps`].
pub fn bound_distrust(
    targets: &StateEnsemble,
    eps: f64,
    opts: &OracleOptions,
) -> Result<BoundResult> {
    require_unit("eps", eps)?;
    if let Some(x) = targets.pure_flags().iter().position(|&p| !p) {
        return Err(out_of_range(format!("distrust target {x} is not pure")));
    }
    let res = optimize_discrimination(targets, opts);
    if !res.converged {
        return Err(Error::OracleNotConverged { gap: res.gap() });
    }
    let n = targets.n();
    let pg0 = (res.value + n as f64 * opts.tol)
        .max(res.certificate.certified_upper)
        .min(1.0);
    let validity = if eps >= 1.0 - pg0 {
        Validity::TriviallyOne
    } else {
        Validity::Valid
    };
    let kets = targets
        .states()
        .iter()
        .map(|r| Ok(hermitian_eig(r)?.eigenvector(0)))
        .collect::<Result<Vec<_>>>()?;
    let mut out = BoundResult::new(
        bound_eps(pg0, eps)?,
        n,
        Assumption::Distrust { targets: kets, eps },
        validity,
    );
    out.note = Some(format!(
        "target P_g = {:.12}; generally not tight unless the targets are optimal for discrimination",
        res.value
    ));
    Ok(out)
}

/// Capacity bound for `n` coherent states of mean photon number `N`, treated
/// as an almost qubit with `eps = 1 - e^{-N}(1 + N)`.
pub fn coherent_capacity(mean_photons: f64, n: usize) -> Result<BoundResult> {
    require_n(n, 2)?;
    if !(mean_photons >= 0.0 && mean_photons.is_finite()) {
        return Err(out_of_range(format!("N = {mean_photons} must be >= 0")));
    }
    let mut out = bound_almost_dim(2, n, almost_qubit_epsilon(mean_photons))?;
    out.note = Some(format!(
        "coherent states, mean photon number {mean_photons}"
    ));
    Ok(out)
}

/// Dispatches to the bound matching `assumption`.
pub fn bound_for(assumption: &Assumption, n: usize, opts: &OracleOptions) -> Result<BoundResult> {
    assumption.validate()?;
    match assumption {
        Assumption::Dimension { d } => bound_dimension(*d, n),
        Assumption::EaDimension { d } => bound_ea_dimension(*d, n),
        Assumption::Vacuum { omega } => bound_vacuum(n, *omega),
        Assumption::UniformOverlap { a } => bound_overlap(n, *a),
        Assumption::AlmostDim { d, eps, .. } => bound_almost_dim(*d, n, *eps),
        Assumption::Distrust { targets, eps } => {
            if targets.len() != n {
                return Err(Error::DimensionMismatch {
                    expected: n,
                    got: targets.len(),
                });
            }
            bound_distrust(&StateEnsemble::from_kets(targets)?, *eps, opts)
        }
        Assumption::Information { alpha } => Ok(BoundResult::new(
            2f64.powf(*alpha) / n as f64,
            n,
            assumption.clone(),
            Validity::OutOfDomain,
        )),
    }
}
