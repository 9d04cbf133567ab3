//! Minimum-error discrimination of equiprobable states.
//!
//! The numerical oracle is the fixed-point iteration
//! `N_x <- T^{-1/2} r_x N_x r_x T^{-1/2}` with `r_x = rho_x / n` and
//! `T = sum_y r_y N_y r_y`, started from the pretty good measurement. Every
//! result carries a dual certificate `K >= r_x` whose trace bounds the optimum
//! from above.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::ensembles::StateEnsemble;
use crate::error::{Error, Result};
use crate::matcore::{
    c64, hermitian_eig, inv_sqrt_scalar, min_eigenvalue, trace_norm, ComplexMatrix, KERNEL_CUTOFF,
    PSD_SLACK,
};

const COMPLETENESS_TOL: f64 = 1e-8;
const IMAG_RESIDUE_TOL: f64 = 1e-10;
const MONOTONE_SLACK: f64 = 1e-12;
/// Iterations between dual-certificate evaluations once increments fall below `tol`.
const GAP_CHECK_EVERY: usize = 10;
/// A run is converged when the certificate gap is at most this multiple of `tol`.
const CONVERGENCE_FACTOR: f64 = 10.0;
/// Certificates with `min_slack` below this are not considered valid.
pub const CERTIFICATE_SLACK: f64 = 1e-7;

/// Measurement `{N_x}` with `N_x >= 0` and `sum_x N_x = 1`.
#[derive(Clone, Debug, PartialEq)]
pub struct Povm {
    elements: Vec<ComplexMatrix>,
}

impl Povm {
    pub fn new(elements: Vec<ComplexMatrix>) -> Result<Self> {
        let first = elements
            .first()
            .ok_or_else(|| Error::InvalidPovm("no elements".into()))?;
        let dim = first.rows();
        let mut total = ComplexMatrix::zeros(dim, dim);
        for (x, el) in elements.iter().enumerate() {
            if !el.is_square() || el.rows() != dim {
                return Err(Error::InvalidPovm(format!("element {x} has wrong shape")));
            }
            if !el.is_hermitian() {
                return Err(Error::InvalidPovm(format!("element {x} is not Hermitian")));
            }
            let min = min_eigenvalue(el)?;
            if min < -PSD_SLACK {
                return Err(Error::InvalidPovm(format!(
                    "element {x} has eigenvalue {min:e}"
                )));
            }
            total = &total + el;
        }
        let dev = (&total - &ComplexMatrix::identity(dim)).frobenius_norm();
        if dev > COMPLETENESS_TOL {
            return Err(Error::InvalidPovm(format!("|sum N_x - 1|_F = {dev:e}")));
        }
        Ok(Self { elements })
    }

    fn from_parts(elements: Vec<ComplexMatrix>) -> Self {
        Self { elements }
    }

    /// `{1/n, ..., 1/n}`.
    pub fn uniform(n: usize, dim: usize) -> Self {
        Self::from_parts(vec![ComplexMatrix::identity(dim).scale(1.0 / n as f64); n])
    }

    pub fn elements(&self) -> &[ComplexMatrix] {
        &self.elements
    }

    pub fn len(&self) -> usize {
        self.elements.len()
    }

    pub fn is_empty(&self) -> bool {
        self.elements.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.elements[0].rows()
    }

    pub fn completeness_error(&self) -> f64 {
        let dim = self.dim();
        let total = self
            .elements
            .iter()
            .fold(ComplexMatrix::zeros(dim, dim), |acc, e| &acc + e);
        (&total - &ComplexMatrix::identity(dim)).frobenius_norm()
    }
}

#[derive(Serialize, Deserialize)]
struct PovmRepr {
    n: usize,
    dim: usize,
    elements: Vec<ComplexMatrix>,
}

impl Serialize for Povm {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        PovmRepr {
            n: self.len(),
            dim: self.dim(),
            elements: self.elements.clone(),
        }
        .serialize(s)
    }
}

impl<'de> Deserialize<'de> for Povm {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let repr = PovmRepr::deserialize(d)?;
        if repr.elements.len() != repr.n {
            return Err(serde::de::Error::custom("element count differs from n"));
        }
        if repr.elements.iter().any(|e| e.rows() != repr.dim) {
            return Err(serde::de::Error::custom(
                "element dimension differs from dim",
            ));
        }
        Povm::new(repr.elements).map_err(serde::de::Error::custom)
    }
}

/// Hermitian `K` with `K >= rho_x / n` (up to `min_slack`).
#[derive(Clone, Debug, Serialize)]
pub struct DualCertificate {
    #[serde(skip)]
    pub k: ComplexMatrix,
    pub trace_value: f64,
    /// `min_x lambda_min(K - rho_x / n)`.
    pub min_slack: f64,
    /// `tr K + dim * max(0, -min_slack)`: the trace of `K` shifted by the
    /// identity until it is exactly feasible, hence always an upper bound.
    pub certified_upper: f64,
}

impl DualCertificate {
    pub fn is_valid(&self) -> bool {
        self.min_slack >= -CERTIFICATE_SLACK
    }
}

#[derive(Clone, Debug)]
pub struct GuessingResult {
    pub value: f64,
    pub povm: Povm,
    pub iterations: usize,
    pub converged: bool,
    pub certificate: DualCertificate,
    /// Objective after initialization and after each accepted iteration.
    pub history: Vec<f64>,
}

impl GuessingResult {
    pub fn gap(&self) -> f64 {
        self.certificate.certified_upper - self.value
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct OracleOptions {
    pub tol: f64,
    pub max_iter: usize,
    /// Randomly initialized restarts tried when the PGM-seeded run does not converge.
    pub restarts: usize,
    pub seed: u64,
}

impl Default for OracleOptions {
    fn default() -> Self {
        Self {
            tol: 1e-10,
            max_iter: 10_000,
            restarts: 0,
            seed: 0,
        }
    }
}

impl OracleOptions {
    pub fn with_tol(tol: f64) -> Self {
        Self {
            tol,
            ..Self::default()
        }
    }
}

fn check_dims(e: &StateEnsemble, m: &Povm) -> Result<()> {
    if m.len() != e.n() {
        return Err(Error::DimensionMismatch {
            expected: e.n(),
            got: m.len(),
        });
    }
    if m.dim() != e.dim() {
        return Err(Error::DimensionMismatch {
            expected: e.dim(),
            got: m.dim(),
        });
    }
    Ok(())
}

fn raw_value(states: &[ComplexMatrix], elements: &[ComplexMatrix]) -> f64 {
    let n = states.len() as f64;
    states
        .iter()
        .zip(elements)
        .map(|(r, m)| r.trace_product(m).re)
        .sum::<f64>()
        / n
}

/// `(1/n) sum_x tr(rho_x N_x)`.
pub fn guess_value(e: &StateEnsemble, m: &Povm) -> Result<f64> {
    check_dims(e, m)?;
    let total = e
        .states()
        .iter()
        .zip(m.elements())
        .fold(c64(0.0, 0.0), |acc, (r, el)| acc + r.trace_product(el));
    let v = total / e.n() as f64;
    if v.im.abs() > IMAG_RESIDUE_TOL {
        return Err(Error::InvalidPovm(format!(
            "objective has imaginary residue {:e}",
            v.im
        )));
    }
    Ok(v.re.clamp(0.0, 1.0))
}

/// Pretty good measurement `N_x = S^{-1/2} rho_x S^{-1/2}`, `S = sum_x rho_x`,
/// with the kernel of `S` split equally across the elements.
pub fn pgm(e: &StateEnsemble) -> Povm {
    let dim = e.dim();
    let s = e
        .states()
        .iter()
        .fold(ComplexMatrix::zeros(dim, dim), |acc, r| &acc + r);
    let eig = hermitian_eig(&s).expect("sum of density matrices is Hermitian");
    let inv_sqrt = eig.map_spectrum(inv_sqrt_scalar);
    let kernel = eig
        .map_spectrum(|lam| if lam < KERNEL_CUTOFF { 1.0 } else { 0.0 })
        .scale(1.0 / e.n() as f64);
    Povm::from_parts(
        e.states()
            .iter()
            .map(|r| (&(&(&inv_sqrt * r) * &inv_sqrt) + &kernel).hermitian_part())
            .collect(),
    )
}

/// Optimal two-state guessing value `1/2 + |rho1 - rho2|_tr / 4`.
pub fn helstrom_two(rho1: &ComplexMatrix, rho2: &ComplexMatrix) -> Result<f64> {
    if rho1.rows() != rho2.rows() {
        return Err(Error::DimensionMismatch {
            expected: rho1.rows(),
            got: rho2.rows(),
        });
    }
    Ok((0.5 + 0.25 * trace_norm(&(rho1 - rho2).hermitian_part())?).min(1.0))
}

/// `K = (1/2) sum_x (r_x N_x + N_x r_x)` with `r_x = rho_x / n`.
pub fn dual_certificate(e: &StateEnsemble, m: &Povm) -> Result<DualCertificate> {
    check_dims(e, m)?;
    Ok(certificate_unchecked(e, m))
}

fn certificate_unchecked(e: &StateEnsemble, m: &Povm) -> DualCertificate {
    let weighted: Vec<ComplexMatrix> = e.states().iter().map(|r| r.scale(e.prior())).collect();
    certificate_from(&weighted, m.elements())
}

/// Certificate from the weighted states `r_x = rho_x / n`. Two feasible
/// completions of `K` are compared: `K + lambda 1` with `lambda` the largest
/// violation, and `K + sum_x (r_x - K)_+`; the smaller trace is reported.
fn certificate_from(weighted: &[ComplexMatrix], elements: &[ComplexMatrix]) -> DualCertificate {
    let dim = weighted[0].rows();
    let k = weighted
        .iter()
        .zip(elements)
        .fold(ComplexMatrix::zeros(dim, dim), |acc, (r, el)| {
            &acc + &(r * el)
        })
        .hermitian_part();
    let mut min_slack = f64::INFINITY;
    let mut positive_parts = 0.0;
    for r in weighted {
        let eig = hermitian_eig(&(&k - r)).expect("Hermitian by construction");
        min_slack = min_slack.min(*eig.eigenvalues.last().expect("nonempty"));
        positive_parts += eig.eigenvalues.iter().map(|&l| (-l).max(0.0)).sum::<f64>();
    }
    let trace_value = k.trace_re();
    let uniform = dim as f64 * (-min_slack).max(0.0);
    DualCertificate {
        certified_upper: trace_value + uniform.min(positive_parts),
        k,
        trace_value,
        min_slack,
    }
}

/// One fixed-point update; the returned elements sum to the identity.
fn fixed_point_step(weighted: &[ComplexMatrix], elements: &[ComplexMatrix]) -> Vec<ComplexMatrix> {
    let n = weighted.len();
    let dim = weighted[0].rows();
    let sandwiches: Vec<ComplexMatrix> = weighted
        .iter()
        .zip(elements)
        .map(|(r, el)| (&(r * el) * r).hermitian_part())
        .collect();
    let t = sandwiches
        .iter()
        .fold(ComplexMatrix::zeros(dim, dim), |acc, s| &acc + s)
        .hermitian_part();
    let eig = hermitian_eig(&t).expect("T is Hermitian");
    let scale = eig.eigenvalues[0];
    if scale <= 0.0 {
        return elements.to_vec();
    }
    // kernel cutoff relative to the largest eigenvalue of T
    let inv_sqrt = eig.map_spectrum(|lam| inv_sqrt_scalar(lam / scale) / scale.sqrt());
    let kernel = eig
        .map_spectrum(|lam| {
            if lam / scale < KERNEL_CUTOFF {
                1.0
            } else {
                0.0
            }
        })
        .scale(1.0 / n as f64);
    sandwiches
        .iter()
        .map(|s| (&(&(&inv_sqrt * s) * &inv_sqrt) + &kernel).hermitian_part())
        .collect()
}

struct Run {
    elements: Vec<ComplexMatrix>,
    value: f64,
    iterations: usize,
    history: Vec<f64>,
}

fn iterate(e: &StateEnsemble, start: Vec<ComplexMatrix>, opts: &OracleOptions) -> Run {
    let weighted: Vec<ComplexMatrix> = e.states().iter().map(|r| r.scale(e.prior())).collect();
    let mut elements = start;
    let mut value = raw_value(e.states(), &elements);
    let mut history = vec![value];
    let mut iterations = 0;
    while iterations < opts.max_iter {
        let next = fixed_point_step(&weighted, &elements);
        let next_value = raw_value(e.states(), &next);
        iterations += 1;
        if next_value < value - MONOTONE_SLACK {
            // numerical breakdown of the monotone map; keep the last iterate
            break;
        }
        let increment = next_value - value;
        elements = next;
        value = next_value;
        history.push(value);
        // Small increments alone do not mean convergence: measurement weight
        // on directions that must vanish shrinks slowly while the value is
        // already flat, so keep going until the dual certificate closes.
        if increment < opts.tol && iterations % GAP_CHECK_EVERY == 0 {
            let upper = certificate_from(&weighted, &elements).certified_upper;
            if upper - value <= CONVERGENCE_FACTOR * opts.tol {
                break;
            }
        }
    }
    Run {
        elements,
        value,
        iterations,
        history,
    }
}

fn random_povm(n: usize, dim: usize, rng: &mut impl Rng) -> Vec<ComplexMatrix> {
    let raw: Vec<ComplexMatrix> = (0..n)
        .map(|_| {
            let g = ComplexMatrix::from_fn(dim, dim, |_, _| {
                c64(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0))
            });
            (&g * &g.adjoint()).hermitian_part()
        })
        .collect();
    let total = raw
        .iter()
        .fold(ComplexMatrix::zeros(dim, dim), |acc, a| &acc + a);
    let eig = hermitian_eig(&total).expect("Hermitian");
    let inv_sqrt = eig.map_spectrum(inv_sqrt_scalar);
    let kernel = eig
        .map_spectrum(|lam| if lam < KERNEL_CUTOFF { 1.0 } else { 0.0 })
        .scale(1.0 / n as f64);
    raw.iter()
        .map(|a| (&(&(&inv_sqrt * a) * &inv_sqrt) + &kernel).hermitian_part())
        .collect()
}

/// Numerical optimum of `P_g` by the fixed-point iteration, seeded from the
/// PGM. `converged` is set when the dual certificate closes the gap to
/// `10 * tol`. Restarts (only run while unconverged) start from random
/// measurements; the run with the smallest certificate gap is returned.
pub fn optimize_discrimination(e: &StateEnsemble, opts: &OracleOptions) -> GuessingResult {
    let weighted: Vec<ComplexMatrix> = e.states().iter().map(|r| r.scale(e.prior())).collect();
    let finish = |run: Run, iterations: usize| {
        let certificate = certificate_from(&weighted, &run.elements);
        let value = run.value.clamp(0.0, 1.0);
        GuessingResult {
            converged: certificate.certified_upper - value <= CONVERGENCE_FACTOR * opts.tol,
            value,
            povm: Povm::from_parts(run.elements),
            iterations,
            certificate,
            history: run.history,
        }
    };
    let first = iterate(e, pgm(e).elements, opts);
    let mut total = first.iterations;
    let mut best = finish(first, total);
    for r in 0..opts.restarts {
        if best.converged {
            break;
        }
        let mut rng = ChaCha8Rng::seed_from_u64(opts.seed.wrapping_add(r as u64));
        let run = iterate(e, random_povm(e.n(), e.dim(), &mut rng), opts);
        total += run.iterations;
        let candidate = finish(run, total);
        if candidate.gap() < best.gap() {
            best = candidate;
        }
        best.iterations = total;
    }
    best
}

/// Accessible information in bits.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct InformationValue {
    pub bits: f64,
    /// Set when `pg` was outside `[1/n, 1]` and had to be clamped.
    pub clamped: bool,
}

/// `log2(n) + log2(pg)` with `pg` clamped into `[1/n, 1]`.
pub fn accessible_information(n: usize, pg: f64) -> InformationValue {
    let lo = 1.0 / n as f64;
    let clamped_pg = pg.clamp(lo, 1.0);
    InformationValue {
        bits: ((n as f64).log2() + clamped_pg.log2()).max(0.0),
        clamped: clamped_pg != pg,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bounds::{bound_overlap, bound_vacuum};
    use crate::ensembles::{
        basis_ensemble, equiangular_ensemble, equiangular_kets, vacuum_cone_ensemble,
    };
    use crate::matcore::{normalize, Ket};

    fn projective_basis(d: usize) -> Povm {
        Povm::new(
            (0..d)
                .map(|i| {
                    let mut diag = vec![0.0; d];
                    diag[i] = 1.0;
                    ComplexMatrix::from_diagonal(&diag)
                })
                .collect(),
        )
        .unwrap()
    }

    #[test]
    fn guess_value_examples() {
        let e = basis_ensemble(2, 2).unwrap();
        assert!((guess_value(&e, &projective_basis(2)).unwrap() - 1.0).abs() < 1e-15);

        let e = equiangular_ensemble(4, 0.3).unwrap();
        let v = guess_value(&e, &Povm::uniform(4, e.dim())).unwrap();
        assert!((v - 0.25).abs() < 1e-14);

        let e = equiangular_ensemble(3, 0.5).unwrap();
        let v = guess_value(&e, &pgm(&e)).unwrap();
        assert!((v - bound_overlap(3, 0.5).unwrap().pg_bound).abs() < 1e-10);
    }

    #[test]
    fn guess_value_rejects_mismatch() {
        let e = basis_ensemble(2, 2).unwrap();
        assert!(guess_value(&e, &Povm::uniform(3, 2)).is_err());
        assert!(guess_value(&e, &Povm::uniform(2, 3)).is_err());
    }

    #[test]
    fn povm_validation() {
        assert!(Povm::new(vec![ComplexMatrix::identity(2).scale(0.4); 2]).is_err());
        assert!(Povm::new(vec![
            ComplexMatrix::from_diagonal(&[1.5, 0.0]),
            ComplexMatrix::from_diagonal(&[-0.5, 1.0]),
        ])
        .is_err());
        assert!(Povm::new(vec![ComplexMatrix::identity(3)]).is_ok());
    }

    #[test]
    fn pgm_examples() {
        let e = basis_ensemble(3, 3).unwrap();
        let m = pgm(&e);
        for (x, el) in m.elements().iter().enumerate() {
            assert!((el - e.state(x)).max_abs() < 1e-14);
        }

        let single = StateEnsemble::from_kets(&[normalize(&Ket::from_vec(vec![
            c64(1.0, 0.0),
            c64(0.0, 2.0),
        ]))])
        .unwrap();
        let m = pgm(&single);
        assert!((&m.elements()[0] - &ComplexMatrix::identity(2)).max_abs() < 1e-12);

        let e = equiangular_ensemble(4, 1.0 / 3.0).unwrap();
        let m = pgm(&e);
        assert!(m.completeness_error() < 1e-8);
        Povm::new(m.elements().to_vec()).unwrap();
    }

    #[test]
    fn pgm_fills_kernel() {
        // states span only the first two of three dimensions
        let e = basis_ensemble(2, 2).unwrap().embed(3).unwrap();
        let m = pgm(&e);
        assert!(m.completeness_error() < 1e-12);
    }

    #[test]
    fn helstrom_examples() {
        let e = basis_ensemble(2, 2).unwrap();
        assert!((helstrom_two(e.state(0), e.state(1)).unwrap() - 1.0).abs() < 1e-14);
        assert!((helstrom_two(e.state(0), e.state(0)).unwrap() - 0.5).abs() < 1e-14);

        let e = equiangular_ensemble(2, 0.6).unwrap();
        let h = helstrom_two(e.state(0), e.state(1)).unwrap();
        assert!((h - 0.9).abs() < 1e-12);
        let r = optimize_discrimination(&e, &OracleOptions::default());
        assert!((r.value - h).abs() < 1e-8);
    }

    #[test]
    fn oracle_examples() {
        let e = basis_ensemble(3, 3).unwrap();
        let r = optimize_discrimination(&e, &OracleOptions::default());
        assert!((r.value - 1.0).abs() < 1e-12);
        assert!(r.converged);

        let e = equiangular_ensemble(2, 0.6).unwrap();
        let r = optimize_discrimination(&e, &OracleOptions::default());
        assert!((r.value - 0.9).abs() < 1e-8);

        let (e, _) = vacuum_cone_ensemble(4, 0.1).unwrap();
        let r = optimize_discrimination(&e, &OracleOptions::default());
        // 0.25 * (sqrt(0.3) + sqrt(0.9))^2
        assert!((r.value - 0.559_807_621_135_331_6).abs() < 1e-6);
        assert!((r.value - bound_vacuum(4, 0.1).unwrap().pg_bound).abs() < 1e-6);
        assert!(r.converged);
    }

    #[test]
    fn oracle_is_monotone_on_non_symmetric_ensemble() {
        // three pure states with unequal overlaps: PGM is not optimal here
        let kets = vec![
            normalize(&Ket::from_vec(vec![
                c64(1.0, 0.0),
                c64(0.0, 0.0),
                c64(0.0, 0.0),
            ])),
            normalize(&Ket::from_vec(vec![
                c64(0.9, 0.0),
                c64(0.4, 0.1),
                c64(0.0, 0.0),
            ])),
            normalize(&Ket::from_vec(vec![
                c64(0.2, 0.0),
                c64(0.3, 0.0),
                c64(0.9, 0.2),
            ])),
        ];
        let e = StateEnsemble::from_kets(&kets).unwrap();
        let r = optimize_discrimination(&e, &OracleOptions::default());
        assert!(r.history.windows(2).all(|w| w[1] >= w[0] - 1e-12));
        assert!(r.value > guess_value(&e, &pgm(&e)).unwrap());
        assert!(r.converged, "gap {}", r.gap());
        assert!(r.gap() <= 1e-9);
        assert!((guess_value(&e, &r.povm).unwrap() - r.value).abs() < 1e-12);
    }

    #[test]
    fn certificate_examples() {
        let e = basis_ensemble(3, 3).unwrap();
        let c = dual_certificate(&e, &projective_basis(3)).unwrap();
        assert!((c.trace_value - 1.0).abs() < 1e-14);
        assert!(c.min_slack.abs() < 1e-14);
        assert!((&c.k - &ComplexMatrix::identity(3).scale(1.0 / 3.0)).max_abs() < 1e-14);

        let e = equiangular_ensemble(3, 0.5).unwrap();
        let c = dual_certificate(&e, &pgm(&e)).unwrap();
        let v = guess_value(&e, &pgm(&e)).unwrap();
        assert!(c.is_valid());
        assert!(c.certified_upper - v <= 1e-7);

        let e = basis_ensemble(2, 2).unwrap();
        let c = dual_certificate(&e, &Povm::uniform(2, 2)).unwrap();
        assert!((c.trace_value - 0.5).abs() < 1e-14);
        assert!(c.min_slack < 0.0);
        assert!(!c.is_valid());
        // the shifted certificate is still a true upper bound
        assert!(c.certified_upper >= 1.0 - 1e-12);
    }

    #[test]
    fn restarts_are_deterministic() {
        let kets = equiangular_kets(3, 0.4).unwrap();
        let e = StateEnsemble::from_kets(&kets).unwrap();
        let opts = OracleOptions {
            max_iter: 3,
            restarts: 4,
            seed: 99,
            ..OracleOptions::default()
        };
        let a = optimize_discrimination(&e, &opts);
        let b = optimize_discrimination(&e, &opts);
        assert_eq!(a.value.to_bits(), b.value.to_bits());
    }

    #[test]
    fn accessible_information_examples() {
        assert_eq!(accessible_information(4, 1.0).bits, 2.0);
        assert_eq!(accessible_information(4, 0.25).bits, 0.0);
        assert_eq!(accessible_information(4, 0.5).bits, 1.0);
        let low = accessible_information(4, 0.2);
        assert!(low.clamped);
        assert_eq!(low.bits, 0.0);
        assert!(!accessible_information(4, 0.3).clamped);
    }

    #[test]
    fn povm_json_round_trip() {
        let e = equiangular_ensemble(3, 0.2).unwrap();
        let m = pgm(&e);
        let s = serde_json::to_string(&m).unwrap();
        let back: Povm = serde_json::from_str(&s).unwrap();
        assert!((&back.elements()[1] - &m.elements()[1]).max_abs() < 1e-15);
    }
}
