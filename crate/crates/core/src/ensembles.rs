//! State ensembles, communication assumptions, and their saturating constructions.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::bounds::min_overlap_vacuum;
use crate::discrimination::{optimize_discrimination, OracleOptions};
use crate::error::{Error, Result};
use crate::matcore::{
    basis_ket, c64, embed_ket, hermitian_eig, min_eigenvalue, normalize, numerical_rank,
    partial_trace, vectors_from_gram, ComplexMatrix, Ket, TraceOut, C64, PSD_SLACK,
};

/// Slack within which a constraint counts as satisfied.
pub const MEMBERSHIP_SLACK: f64 = 1e-8;

const TRACE_TOL: f64 = 1e-10;
const PURITY_TOL: f64 = 1e-8;
const UNIT_KET_TOL: f64 = 1e-10;
const FOCK_TAIL_LIMIT: f64 = 1e-12;

/// `n` density matrices of a common dimension, sent with uniform prior `1/n`.
#[derive(Clone, Debug, PartialEq)]
pub struct StateEnsemble {
    dim: usize,
    states: Vec<ComplexMatrix>,
    pure_flags: Vec<bool>,
}

impl StateEnsemble {
    /// Validates each state (Hermitian, PSD, unit trace) and records purity.
    pub fn new(states: Vec<ComplexMatrix>) -> Result<Self> {
        let dim = states
            .first()
            .ok_or_else(|| {
                Error::ParamOutOfRange("ensemble must contain at least one state".into())
            })?
            .rows();
        let mut pure_flags = Vec::with_capacity(states.len());
        for (index, rho) in states.iter().enumerate() {
            let invalid = |reason: String| Error::InvalidState { index, reason };
            if !rho.is_square() || rho.rows() != dim {
                return Err(invalid(format!(
                    "shape {}x{} (expected {dim}x{dim})",
                    rho.rows(),
                    rho.cols()
                )));
            }
            if !rho.is_hermitian() {
                return Err(invalid("not Hermitian".into()));
            }
            let tr = rho.trace();
            if (tr.re - 1.0).abs() > TRACE_TOL || tr.im.abs() > TRACE_TOL {
                return Err(invalid(format!("trace {tr}")));
            }
            let min = min_eigenvalue(rho)?;
            if min < -PSD_SLACK {
                return Err(invalid(format!("min eigenvalue {min:e}")));
            }
            pure_flags.push(rho.trace_product(rho).re >= 1.0 - PURITY_TOL);
        }
        Ok(Self {
            dim,
            states,
            pure_flags,
        })
    }

    /// Pure ensemble from kets; each ket must have unit norm.
    pub fn from_kets(kets: &[Ket]) -> Result<Self> {
        for (index, k) in kets.iter().enumerate() {
            if (k.norm() - 1.0).abs() > UNIT_KET_TOL {
                return Err(Error::InvalidState {
                    index,
                    reason: format!("ket norm {}", k.norm()),
                });
            }
        }
        Self::new(kets.iter().map(ComplexMatrix::projector).collect())
    }

    pub fn n(&self) -> usize {
        self.states.len()
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn states(&self) -> &[ComplexMatrix] {
        &self.states
    }

    pub fn state(&self, x: usize) -> &ComplexMatrix {
        &self.states[x]
    }

    pub fn pure_flags(&self) -> &[bool] {
        &self.pure_flags
    }

    pub fn is_pure(&self) -> bool {
        self.pure_flags.iter().all(|&p| p)
    }

    pub fn prior(&self) -> f64 {
        1.0 / self.n() as f64
    }

    /// `(1/n) sum_x rho_x`.
    pub fn average_state(&self) -> ComplexMatrix {
        self.states
            .iter()
            .fold(ComplexMatrix::zeros(self.dim, self.dim), |acc, r| &acc + r)
            .scale(self.prior())
    }

    /// Zero-pads every state to dimension `dim`.
    pub fn embed(&self, dim: usize) -> Result<Self> {
        Self::new(
            self.states
                .iter()
                .map(|r| r.embed(dim))
                .collect::<Result<Vec<_>>>()?,
        )
    }

    /// `|<psi_x|psi_y>|` for pure states, computed as `sqrt(tr(rho_x rho_y))`.
    pub fn pure_overlap(&self, x: usize, y: usize) -> Result<f64> {
        for i in [x, y] {
            if !self.pure_flags[i] {
                return Err(Error::MixedStateOverlapCheck(i));
            }
        }
        Ok(self.states[x]
            .trace_product(&self.states[y])
            .re
            .max(0.0)
            .sqrt())
    }
}

/// Communication assumption: the parameter set gamma selecting S_gamma.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Assumption {
    /// States live in dimension `d`.
    Dimension { d: usize },
    /// `d`-dimensional message assisted by unbounded shared entanglement.
    EaDimension { d: usize },
    /// `tr(H rho_x) <= omega` with `H = 1 - |vac><vac|`.
    Vacuum { omega: f64 },
    /// `|<psi_x|psi_y>| >= a` for all `x != y`.
    #[serde(rename = "overlap")]
    UniformOverlap { a: f64 },
    /// `tr(rho_x Pi_d) >= 1 - eps` for a common rank-`d` projector.
    AlmostDim {
        d: usize,
        eps: f64,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        projector: Option<ComplexMatrix>,
    },
    /// `<psi_x|rho_x|psi_x> >= 1 - eps` for the target states.
    Distrust {
        #[serde(with = "ket_list")]
        targets: Vec<Ket>,
        eps: f64,
    },
    /// `log2 n + log2 P_g <= alpha`.
    Information { alpha: f64 },
}

impl Assumption {
    pub fn kind_name(&self) -> &'static str {
        match self {
            Self::Dimension { .. } => "dimension",
            Self::EaDimension { .. } => "ea_dimension",
            Self::Vacuum { .. } => "vacuum",
            Self::UniformOverlap { .. } => "overlap",
            Self::AlmostDim { .. } => "almost_dim",
            Self::Distrust { .. } => "distrust",
            Self::Information { .. } => "information",
        }
    }

    /// Checks the declared parameter ranges.
    pub fn validate(&self) -> Result<()> {
        let unit = |name: &str, v: f64| {
            if (0.0..=1.0).contains(&v) {
                Ok(())
            } else {
                Err(Error::ParamOutOfRange(format!(
                    "{name} = {v} not in [0, 1]"
                )))
            }
        };
        let positive = |d: usize| {
            if d >= 1 {
                Ok(())
            } else {
                Err(Error::ParamOutOfRange("d must be >= 1".into()))
            }
        };
        match self {
            Self::Dimension { d } | Self::EaDimension { d } => positive(*d),
            Self::Vacuum { omega } => unit("omega", *omega),
            Self::UniformOverlap { a } => unit("a", *a),
            Self::AlmostDim { d, eps, .. } => {
                positive(*d)?;
                unit("eps", *eps)
            }
            Self::Distrust { targets, eps } => {
                unit("eps", *eps)?;
                for (i, t) in targets.iter().enumerate() {
                    if (t.norm() - 1.0).abs() > UNIT_KET_TOL {
                        return Err(Error::ParamOutOfRange(format!(
                            "distrust target {i} has norm {}",
                            t.norm()
                        )));
                    }
                }
                Ok(())
            }
            Self::Information { alpha } => {
                if *alpha >= 0.0 {
                    Ok(())
                } else {
                    Err(Error::ParamOutOfRange(format!("alpha = {alpha} < 0")))
                }
            }
        }
    }
}

pub(crate) mod ket_list {
    use super::{c64, Ket};
    use serde::{Deserialize, Deserializer, Serialize, Serializer};

    pub fn serialize<S: Serializer>(kets: &[Ket], s: S) -> Result<S::Ok, S::Error> {
        let raw: Vec<Vec<[f64; 2]>> = kets
            .iter()
            .map(|k| k.iter().map(|z| [z.re, z.im]).collect())
            .collect();
        raw.serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Vec<Ket>, D::Error> {
        let raw: Vec<Vec<[f64; 2]>> = Vec::deserialize(d)?;
        Ok(raw
            .into_iter()
            .map(|v| Ket::from_iterator(v.len(), v.into_iter().map(|p| c64(p[0], p[1]))))
            .collect())
    }
}

/// Extra inputs some membership checks need.
#[derive(Clone, Debug, Default)]
pub struct CheckContext {
    /// Designated vacuum vector for `Vacuum`.
    pub vacuum: Option<Ket>,
    /// Oracle settings for `Information`.
    pub oracle: OracleOptions,
}

impl CheckContext {
    pub fn with_vacuum(vacuum: Ket) -> Self {
        Self {
            vacuum: Some(vacuum),
            ..Self::default()
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct StateDiagnostic {
    pub index: usize,
    pub slack: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct MembershipReport {
    pub satisfied: bool,
    /// Most-violated constraint margin; negative means violated.
    pub worst_slack: f64,
    pub detail: Vec<StateDiagnostic>,
    /// Which witness (projector, vacuum, certificate) the check used.
    pub note: Option<String>,
}

impl MembershipReport {
    pub(crate) fn from_slacks(slacks: Vec<f64>, note: Option<String>) -> Self {
        let worst_slack = slacks.iter().copied().fold(f64::INFINITY, f64::min);
        Self {
            satisfied: worst_slack >= -MEMBERSHIP_SLACK,
            worst_slack,
            detail: slacks
                .into_iter()
                .enumerate()
                .map(|(index, slack)| StateDiagnostic { index, slack })
                .collect(),
            note,
        }
    }

    pub(crate) fn single(slack: f64, note: Option<String>) -> Self {
        Self {
            satisfied: slack >= -MEMBERSHIP_SLACK,
            worst_slack: slack,
            detail: Vec::new(),
            note,
        }
    }
}

/// Checks whether `e` belongs to the set selected by `a`.
pub fn check_assumption(
    e: &StateEnsemble,
    a: &Assumption,
    ctx: &CheckContext,
) -> Result<MembershipReport> {
    a.validate()?;
    match a {
        Assumption::Dimension { d } => {
            let support = e
                .states()
                .iter()
                .fold(ComplexMatrix::zeros(e.dim(), e.dim()), |acc, r| &acc + r);
            let rank = numerical_rank(&support)?;
            Ok(MembershipReport::single(
                *d as f64 - rank as f64,
                Some(format!("support rank {rank}")),
            ))
        }
        Assumption::EaDimension { d } => check_ea_dimension(e, *d),
        Assumption::Vacuum { omega } => {
            let vac = ctx.vacuum.as_ref().ok_or_else(|| {
                Error::MissingContext("vacuum check needs a vacuum vector".into())
            })?;
            if vac.len() != e.dim() {
                return Err(Error::DimensionMismatch {
                    expected: e.dim(),
                    got: vac.len(),
                });
            }
            let vac = normalize(vac);
            let slacks = e
                .states()
                .iter()
                .map(|r| omega - (1.0 - r.expectation(&vac)))
                .collect();
            Ok(MembershipReport::from_slacks(slacks, None))
        }
        Assumption::UniformOverlap { a } => {
            if let Some(x) = e.pure_flags().iter().position(|&p| !p) {
                return Err(Error::MixedStateOverlapCheck(x));
            }
            let n = e.n();
            let mut slacks = vec![f64::INFINITY; n];
            for x in 0..n {
                for y in (x + 1)..n {
                    let s = e.pure_overlap(x, y)? - a;
                    slacks[x] = slacks[x].min(s);
                    slacks[y] = slacks[y].min(s);
                }
            }
            Ok(MembershipReport::from_slacks(slacks, None))
        }
        Assumption::AlmostDim { d, eps, projector } => {
            let (pi, note) = match projector {
                Some(p) => {
                    validate_projector(p, *d, e.dim())?;
                    (p.clone(), "supplied projector".to_string())
                }
                None => (
                    top_eigenspace_projector(&e.average_state(), *d)?,
                    format!("top-{d} eigenspace of the average state"),
                ),
            };
            let slacks = e
                .states()
                .iter()
                .map(|r| r.trace_product(&pi).re - (1.0 - eps))
                .collect();
            Ok(MembershipReport::from_slacks(slacks, Some(note)))
        }
        Assumption::Distrust { targets, eps } => {
            if targets.len() != e.n() {
                return Err(Error::DimensionMismatch {
                    expected: e.n(),
                    got: targets.len(),
                });
            }
            let slacks = targets
                .iter()
                .zip(e.states())
                .map(|(t, r)| Ok(r.expectation(&embed_ket(t, e.dim())?) - (1.0 - eps)))
                .collect::<Result<Vec<_>>>()?;
            Ok(MembershipReport::from_slacks(slacks, None))
        }
        Assumption::Information { alpha } => {
            let res = optimize_discrimination(e, &ctx.oracle);
            let upper = res.certificate.certified_upper;
            let limit = 2f64.powf(*alpha) / e.n() as f64;
            Ok(MembershipReport::single(
                limit - upper,
                Some(format!("certified P_g upper bound {upper}")),
            ))
        }
    }
}

fn check_ea_dimension(e: &StateEnsemble, d: usize) -> Result<MembershipReport> {
    // Layout: C^{d_shared} (x) C^{d}, message last.
    if !e.dim().is_multiple_of(d) {
        return Err(Error::DimensionMismatch {
            expected: d * (e.dim() / d).max(1),
            got: e.dim(),
        });
    }
    let d_shared = e.dim() / d;
    let marginals = e
        .states()
        .iter()
        .map(|r| partial_trace(r, d_shared, d, TraceOut::Second))
        .collect::<Result<Vec<_>>>()?;
    let mut slacks = Vec::with_capacity(e.n());
    let mut max_schmidt = 0;
    for (x, m) in marginals.iter().enumerate() {
        let mut slack = -(m - &marginals[0]).max_abs();
        if e.pure_flags()[x] {
            let schmidt = numerical_rank(m)?;
            max_schmidt = max_schmidt.max(schmidt);
            if schmidt > d {
                slack = slack.min(d as f64 - schmidt as f64);
            }
        }
        slacks.push(slack);
    }
    Ok(MembershipReport::from_slacks(
        slacks,
        Some(format!(
            "necessary conditions only (shared dim {d_shared}, max Schmidt rank {max_schmidt})"
        )),
    ))
}

fn validate_projector(p: &ComplexMatrix, d: usize, dim: usize) -> Result<()> {
    if p.rows() != dim || !p.is_square() {
        return Err(Error::DimensionMismatch {
            expected: dim,
            got: p.rows(),
        });
    }
    let idem = (&(p * p) - p).max_abs();
    if !p.is_hermitian() || idem > 1e-8 {
        return Err(Error::ParamOutOfRange(format!(
            "supplied Pi_d is not an orthogonal projector (|P^2 - P| = {idem:e})"
        )));
    }
    let rank = p.trace_re();
    if rank > d as f64 + 1e-8 {
        return Err(Error::ParamOutOfRange(format!(
            "supplied Pi_d has rank {rank:.3} > d = {d}"
        )));
    }
    Ok(())
}

/// Projector onto the span of the `d` leading eigenvectors.
pub fn top_eigenspace_projector(a: &ComplexMatrix, d: usize) -> Result<ComplexMatrix> {
    let eig = hermitian_eig(a)?;
    let cols: Vec<Ket> = (0..d.min(a.rows())).map(|i| eig.eigenvector(i)).collect();
    Ok(ComplexMatrix::span_projector(&cols))
}

fn require(cond: bool, msg: impl FnOnce() -> String) -> Result<()> {
    if cond {
        Ok(())
    } else {
        Err(Error::ParamOutOfRange(msg()))
    }
}

/// `|e_{x mod d}>` for `x = 0..n`.
pub fn basis_ensemble(d: usize, n: usize) -> Result<StateEnsemble> {
    require(d >= 1 && n >= 1, || {
        format!("need d, n >= 1 (d = {d}, n = {n})")
    })?;
    StateEnsemble::from_kets(&(0..n).map(|x| basis_ket(d, x % d)).collect::<Vec<_>>())
}

/// Generalized Pauli `X^j Z^k` on `C^d`.
pub fn weyl_operator(d: usize, j: usize, k: usize) -> ComplexMatrix {
    let omega = 2.0 * PI / d as f64;
    ComplexMatrix::from_fn(d, d, |r, c| {
        if r == (c + j) % d {
            C64::from_polar(1.0, omega * ((c * k) % d) as f64)
        } else {
            C64::default()
        }
    })
}

/// Maximally entangled `|Phi_d> = sum_i |ii> / sqrt(d)`.
pub fn max_entangled(d: usize) -> Ket {
    let s = 1.0 / (d as f64).sqrt();
    Ket::from_fn(d * d, |idx, _| {
        if idx / d == idx % d {
            c64(s, 0.0)
        } else {
            C64::default()
        }
    })
}

/// Dense-coding states `(1 (x) X^j Z^k)|Phi_d>` on `C^d (x) C^d`, pairs
/// `(j, k)` in lexicographic order, cycling when `n > d^2`.
pub fn dense_coding_ensemble(d: usize, n: usize) -> Result<StateEnsemble> {
    require(d >= 1 && n >= 1, || {
        format!("need d, n >= 1 (d = {d}, n = {n})")
    })?;
    let phi = max_entangled(d);
    let id = ComplexMatrix::identity(d);
    let kets: Vec<Ket> = (0..n)
        .map(|x| {
            let pair = x % (d * d);
            let u = id.kron(&weyl_operator(d, pair / d, pair % d));
            u.apply(&phi)
        })
        .collect();
    StateEnsemble::from_kets(&kets)
}

/// Real unit vectors with Gram `(1 - a) I + a J`.
pub fn equiangular_kets(n: usize, a: f64) -> Result<Vec<Ket>> {
    require(n >= 2, || format!("need n >= 2 (n = {n})"))?;
    let lower = -1.0 / (n as f64 - 1.0);
    if !(lower - 1e-12..=1.0 + 1e-12).contains(&a) {
        return Err(Error::GramNotPsd { n, a });
    }
    let g = ComplexMatrix::from_fn(n, n, |i, j| c64(if i == j { 1.0 } else { a }, 0.0));
    vectors_from_gram(&g)
}

pub fn equiangular_ensemble(n: usize, a: f64) -> Result<StateEnsemble> {
    StateEnsemble::from_kets(&equiangular_kets(n, a)?)
}

/// Pure states on the boundary of the vacuum cone with minimal pairwise
/// overlap `a* = 1 - n omega / (n - 1)`. Returns the ensemble and the vacuum.
pub fn vacuum_cone_ensemble(n: usize, omega: f64) -> Result<(StateEnsemble, Ket)> {
    require(n >= 2, || format!("need n >= 2 (n = {n})"))?;
    let limit = (n as f64 - 1.0) / n as f64;
    if omega > limit + 1e-15 {
        return Err(Error::OmegaOutOfRange { n, omega, limit });
    }
    require(omega >= 0.0, || format!("omega = {omega} < 0"))?;
    let a = min_overlap_vacuum(n, omega)?;
    let b = (1.0 - omega).sqrt();
    let g = bordered_vacuum_gram(n, a, b);
    let mut vecs = vectors_from_gram(&g)?;
    let vacuum = vecs.pop().expect("n + 1 vectors");
    Ok((StateEnsemble::from_kets(&vecs)?, vacuum))
}

/// Gram of `{psi_1..psi_n, |0>}` with pairwise overlap `a` and vacuum overlap `b`.
pub fn bordered_vacuum_gram(n: usize, a: f64, b: f64) -> ComplexMatrix {
    ComplexMatrix::from_fn(n + 1, n + 1, |i, j| {
        let v = if i == j {
            1.0
        } else if i == n || j == n {
            b
        } else {
            a
        };
        c64(v, 0.0)
    })
}

fn check_almost_qudit_params(d: usize, n: usize, eps: f64) -> Result<()> {
    require(d >= 1 && d <= n, || {
        format!("need 1 <= d <= n (d = {d}, n = {n})")
    })?;
    require((0.0..=1.0).contains(&eps), || {
        format!("eps = {eps} not in [0, 1]")
    })
}

/// `|phi_x> = sqrt(1-eps)|e_{x mod d}> + sqrt(eps)|f_x>` with orthonormal tails
/// `f_x`, on dimension `d + n`. Returns the ensemble and `Pi_d`.
pub fn almost_qudit_ensemble(
    d: usize,
    n: usize,
    eps: f64,
) -> Result<(StateEnsemble, ComplexMatrix)> {
    check_almost_qudit_params(d, n, eps)?;
    let dim = d + n;
    let (core, tail) = ((1.0 - eps).sqrt(), eps.sqrt());
    let kets: Vec<Ket> = (0..n)
        .map(|x| basis_ket(dim, x % d).scale(core) + basis_ket(dim, d + x).scale(tail))
        .collect();
    Ok((StateEnsemble::from_kets(&kets)?, leading_projector(dim, d)))
}

/// Variant of [`almost_qudit_ensemble`] whose tails within each residue class
/// `x mod d` form a regular simplex, so each class is a saturating vacuum cone
/// around its basis vector. Tail weight is capped at `(m-1)/m` for a class of
/// size `m`, beyond which the class is already perfectly distinguishable.
pub fn almost_qudit_simplex_ensemble(
    d: usize,
    n: usize,
    eps: f64,
) -> Result<(StateEnsemble, ComplexMatrix)> {
    check_almost_qudit_params(d, n, eps)?;
    let dim = d + n;
    let mut kets = vec![Ket::zeros(dim); n];
    let mut offset = d;
    for g in 0..d {
        let members: Vec<usize> = (g..n).step_by(d).collect();
        let m = members.len();
        let eps_eff = eps.min((m as f64 - 1.0) / m as f64);
        let (core, tail) = ((1.0 - eps_eff).sqrt(), eps_eff.sqrt());
        let tails = simplex_vectors(m);
        for (i, &x) in members.iter().enumerate() {
            let mut k = basis_ket(dim, g).scale(core);
            for (r, &t) in tails[i].iter().enumerate() {
                k[offset + r] += c64(tail * t, 0.0);
            }
            kets[x] = k;
        }
        offset += m;
    }
    Ok((StateEnsemble::from_kets(&kets)?, leading_projector(dim, d)))
}

/// `m` unit vectors in `R^m` with pairwise inner product `-1/(m-1)`
/// (a single vector `e_0` when `m = 1`).
fn simplex_vectors(m: usize) -> Vec<Vec<f64>> {
    if m == 1 {
        return vec![vec![1.0]];
    }
    let norm = ((m as f64 - 1.0) / m as f64).sqrt();
    (0..m)
        .map(|i| {
            (0..m)
                .map(|r| ((if r == i { 1.0 } else { 0.0 }) - 1.0 / m as f64) / norm)
                .collect()
        })
        .collect()
}

/// Projector onto the first `d` coordinates of `C^dim`.
pub fn leading_projector(dim: usize, d: usize) -> ComplexMatrix {
    ComplexMatrix::from_fn(dim, dim, |i, j| {
        if i == j && i < d {
            c64(1.0, 0.0)
        } else {
            C64::default()
        }
    })
}

/// Truncated Fock vector of `|alpha>`, levels `0..=cutoff`, renormalized.
pub fn coherent_state(alpha_mag: f64, phase: f64, cutoff: usize) -> Result<Ket> {
    require(alpha_mag >= 0.0 && alpha_mag.is_finite(), || {
        format!("|alpha| = {alpha_mag} must be finite and >= 0")
    })?;
    let mean = alpha_mag * alpha_mag;
    let tail = poisson_tail(mean, cutoff);
    if tail > FOCK_TAIL_LIMIT {
        return Err(Error::CutoffTooSmall { cutoff, tail });
    }
    // amplitude_k = e^{-N/2} |alpha|^k e^{i k theta} / sqrt(k!)
    let mut amps = Vec::with_capacity(cutoff + 1);
    let mut mag = (-mean / 2.0).exp();
    for k in 0..=cutoff {
        if k > 0 {
            mag *= alpha_mag / (k as f64).sqrt();
        }
        amps.push(C64::from_polar(mag, phase * k as f64));
    }
    Ok(normalize(&Ket::from_vec(amps)))
}

/// Poisson mass strictly above `cutoff`.
fn poisson_tail(mean: f64, cutoff: usize) -> f64 {
    if mean == 0.0 {
        return 0.0;
    }
    let mut term = (-mean).exp();
    for k in 1..=cutoff + 1 {
        term *= mean / k as f64;
    }
    // term = P(cutoff + 1); sum forward until negligible
    let mut tail = 0.0;
    let mut k = cutoff + 1;
    while term > 0.0 && (term > tail * 1e-17 || (k as f64) < mean) {
        tail += term;
        k += 1;
        term *= mean / k as f64;
        if k > cutoff + 100_000 {
            break;
        }
    }
    tail
}

/// Phase-shift-keyed coherent states `|sqrt(N) e^{2 pi i x / n}>`.
pub fn coherent_psk_ensemble(mean_photons: f64, n: usize, cutoff: usize) -> Result<StateEnsemble> {
    require(mean_photons >= 0.0, || format!("N = {mean_photons} < 0"))?;
    let mag = mean_photons.sqrt();
    let kets = (0..n)
        .map(|x| coherent_state(mag, 2.0 * PI * x as f64 / n as f64, cutoff))
        .collect::<Result<Vec<_>>>()?;
    StateEnsemble::from_kets(&kets)
}

/// Fock weight outside `span{|0>, |1>}` of a coherent state with mean photon
/// number `N`: `1 - e^{-N}(1 + N)`.
pub fn almost_qubit_epsilon(mean_photons: f64) -> f64 {
    let n = mean_photons.max(0.0);
    // -expm1(-N) - N e^{-N} avoids cancellation for small N
    (-(-n).exp_m1() - n * (-n).exp()).max(0.0)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::discrimination::optimize_discrimination;

    fn max_dev(a: &ComplexMatrix, b: &ComplexMatrix) -> f64 {
        (a - b).max_abs()
    }

    #[test]
    fn basis_examples() {
        let e = basis_ensemble(2, 2).unwrap();
        assert_eq!(e.n(), 2);
        assert_eq!(e.dim(), 2);
        assert!(max_dev(e.state(1), &ComplexMatrix::from_diagonal(&[0.0, 1.0])) < 1e-15);

        let e = basis_ensemble(2, 4).unwrap();
        assert_eq!(e.state(2), e.state(0));
        assert_eq!(e.state(3), e.state(1));

        let e = basis_ensemble(3, 3).unwrap();
        let r = optimize_discrimination(&e, &OracleOptions::default());
        assert!((r.value - 1.0).abs() < 1e-12);
        assert!(basis_ensemble(0, 3).is_err());
    }

    #[test]
    fn dense_coding_examples() {
        let e = dense_coding_ensemble(2, 4).unwrap();
        assert_eq!(e.dim(), 4);
        for x in 0..4 {
            for y in 0..4 {
                let ov = e.state(x).trace_product(e.state(y)).re;
                let expected = if x == y { 1.0 } else { 0.0 };
                assert!((ov - expected).abs() < 1e-12, "({x},{y}) -> {ov}");
            }
        }
        let single = dense_coding_ensemble(2, 1).unwrap();
        assert!(
            max_dev(
                single.state(0),
                &ComplexMatrix::projector(&max_entangled(2))
            ) < 1e-15
        );

        let e = dense_coding_ensemble(3, 9).unwrap();
        let r = optimize_discrimination(&e, &OracleOptions::default());
        assert!((r.value - 1.0).abs() < 1e-10);
    }

    #[test]
    fn dense_coding_marginals_constant() {
        for d in 2..=3 {
            let e = dense_coding_ensemble(d, d * d + 2).unwrap();
            let target = ComplexMatrix::identity(d).scale(1.0 / d as f64);
            for rho in e.states() {
                for which in [TraceOut::First, TraceOut::Second] {
                    let m = partial_trace(rho, d, d, which).unwrap();
                    assert!(max_dev(&m, &target) < 1e-10);
                }
            }
            let rep =
                check_assumption(&e, &Assumption::EaDimension { d }, &CheckContext::default())
                    .unwrap();
            assert!(rep.satisfied);
        }
    }

    #[test]
    fn equiangular_examples() {
        let e = equiangular_ensemble(3, 0.0).unwrap();
        for x in 0..3 {
            for y in (x + 1)..3 {
                assert!(e.pure_overlap(x, y).unwrap() < 1e-12);
            }
        }
        let e = equiangular_ensemble(2, 0.6).unwrap();
        assert!((e.pure_overlap(0, 1).unwrap() - 0.6).abs() < 1e-12);

        let kets = equiangular_kets(4, 1.0 / 3.0).unwrap();
        let g = crate::matcore::gram_matrix(&kets);
        let expected =
            ComplexMatrix::from_fn(4, 4, |i, j| c64(if i == j { 1.0 } else { 1.0 / 3.0 }, 0.0));
        assert!(max_dev(&g, &expected) < 1e-8);

        assert!(matches!(
            equiangular_ensemble(3, -0.6),
            Err(Error::GramNotPsd { .. })
        ));
        assert!(matches!(
            equiangular_ensemble(3, 1.2),
            Err(Error::GramNotPsd { .. })
        ));
    }

    #[test]
    fn vacuum_cone_examples() {
        let (e, vac) = vacuum_cone_ensemble(2, 0.0).unwrap();
        for rho in e.states() {
            assert!((rho.expectation(&vac) - 1.0).abs() < 1e-12);
        }

        let (e, vac) = vacuum_cone_ensemble(3, 0.2).unwrap();
        for x in 0..3 {
            assert!((e.state(x).expectation(&vac) - 0.8).abs() < 1e-8);
            for y in (x + 1)..3 {
                assert!((e.pure_overlap(x, y).unwrap() - 0.7).abs() < 1e-8);
            }
        }
        let rep = check_assumption(
            &e,
            &Assumption::Vacuum { omega: 0.2 },
            &CheckContext::with_vacuum(vac.clone()),
        )
        .unwrap();
        assert!(rep.satisfied);
        assert!(rep.worst_slack.abs() < 1e-8);

        let (e, _) = vacuum_cone_ensemble(4, 0.75).unwrap();
        for x in 0..4 {
            for y in (x + 1)..4 {
                assert!(e.pure_overlap(x, y).unwrap() < 1e-8);
            }
        }
        let r = optimize_discrimination(&e, &OracleOptions::default());
        assert!((r.value - 1.0).abs() < 1e-8);

        assert!(matches!(
            vacuum_cone_ensemble(3, 0.7),
            Err(Error::OmegaOutOfRange { .. })
        ));
    }

    #[test]
    fn vacuum_check_needs_context() {
        let (e, _) = vacuum_cone_ensemble(3, 0.2).unwrap();
        let err = check_assumption(
            &e,
            &Assumption::Vacuum { omega: 0.2 },
            &CheckContext::default(),
        );
        assert!(matches!(err, Err(Error::MissingContext(_))));
    }

    #[test]
    fn almost_qudit_examples() {
        let (e, pi) = almost_qudit_ensemble(2, 4, 0.0).unwrap();
        assert_eq!(e.dim(), 6);
        let padded = basis_ensemble(2, 4).unwrap().embed(6).unwrap();
        assert_eq!(e.states(), padded.states());
        assert!((pi.trace_re() - 2.0).abs() < 1e-15);

        let omega = 0.3;
        let (e, pi) = almost_qudit_ensemble(1, 3, omega).unwrap();
        let vac = basis_ket(4, 0);
        for x in 0..3 {
            assert!((e.state(x).expectation(&vac) - (1.0 - omega)).abs() < 1e-12);
            assert!((e.state(x).trace_product(&pi).re - (1.0 - omega)).abs() < 1e-10);
            for y in (x + 1)..3 {
                assert!((e.pure_overlap(x, y).unwrap() - (1.0 - omega)).abs() < 1e-12);
            }
        }

        for eps in [0.0, 0.1, 0.5, 1.0] {
            let (e, pi) = almost_qudit_ensemble(2, 4, eps).unwrap();
            let rep = check_assumption(
                &e,
                &Assumption::AlmostDim {
                    d: 2,
                    eps,
                    projector: Some(pi),
                },
                &CheckContext::default(),
            )
            .unwrap();
            assert!(rep.satisfied && rep.worst_slack.abs() < 1e-10);
        }
    }

    #[test]
    fn simplex_seed_groups_are_vacuum_cones() {
        let (e, pi) = almost_qudit_simplex_ensemble(2, 4, 0.1).unwrap();
        // x = 0 and x = 2 share e_0 with antiparallel tails
        let ov = e.state(0).trace_product(e.state(2)).re.sqrt();
        assert!((ov - 0.8).abs() < 1e-12);
        assert!(e.state(0).trace_product(e.state(1)).re.abs() < 1e-12);
        for rho in e.states() {
            assert!((rho.trace_product(&pi).re - 0.9).abs() < 1e-12);
        }
    }

    #[test]
    fn coherent_state_examples() {
        let v = coherent_state(0.0, 0.3, 5).unwrap();
        assert!((v[0] - c64(1.0, 0.0)).norm() < 1e-15);
        let v = coherent_state(1.0, 0.0, 20).unwrap();
        assert!((v[0].re - (-0.5f64).exp()).abs() < 1e-10);
        for (mag, phase) in [(0.3, 1.0), (2.0, -0.4), (1.5, 3.0)] {
            let v = coherent_state(mag, phase, 60).unwrap();
            assert!((v.norm() - 1.0).abs() < 1e-12);
        }
        assert!(matches!(
            coherent_state(3.0, 0.0, 5),
            Err(Error::CutoffTooSmall { .. })
        ));
    }

    #[test]
    fn almost_qubit_epsilon_examples() {
        assert_eq!(almost_qubit_epsilon(0.0), 0.0);
        assert!((almost_qubit_epsilon(0.1) - 0.004679).abs() < 1e-6);
        assert!((almost_qubit_epsilon(1.0) - (1.0 - 2.0 * (-1.0f64).exp())).abs() < 1e-15);
        // equals the Fock weight outside span{|0>,|1>}
        let v = coherent_state(0.5f64.sqrt(), 0.7, 40).unwrap();
        let weight: f64 = v.iter().skip(2).map(|z| z.norm_sqr()).sum();
        assert!((weight - almost_qubit_epsilon(0.5)).abs() < 1e-12);
    }

    #[test]
    fn almost_qubit_epsilon_monotone() {
        let grid: Vec<f64> = (0..=200).map(|i| i as f64 * 0.05).collect();
        let eps: Vec<f64> = grid.iter().map(|&n| almost_qubit_epsilon(n)).collect();
        assert!(eps.windows(2).all(|w| w[1] >= w[0]));
        assert!(eps.iter().all(|&e| (0.0..1.0).contains(&e)));
    }

    #[test]
    fn membership_examples() {
        let e = basis_ensemble(2, 4).unwrap();
        let rep = check_assumption(
            &e,
            &Assumption::Dimension { d: 2 },
            &CheckContext::default(),
        )
        .unwrap();
        assert!(rep.satisfied);
        let rep = check_assumption(
            &e,
            &Assumption::Dimension { d: 1 },
            &CheckContext::default(),
        )
        .unwrap();
        assert!(!rep.satisfied);

        let e = equiangular_ensemble(3, 0.5).unwrap();
        let rep = check_assumption(
            &e,
            &Assumption::UniformOverlap { a: 0.6 },
            &CheckContext::default(),
        )
        .unwrap();
        assert!(!rep.satisfied);
        assert!((rep.worst_slack + 0.1).abs() < 1e-10);
    }

    #[test]
    fn overlap_check_rejects_mixed() {
        let mixed = StateEnsemble::new(vec![
            ComplexMatrix::identity(2).scale(0.5),
            ComplexMatrix::from_diagonal(&[1.0, 0.0]),
        ])
        .unwrap();
        assert_eq!(mixed.pure_flags(), &[false, true]);
        let err = check_assumption(
            &mixed,
            &Assumption::UniformOverlap { a: 0.1 },
            &CheckContext::default(),
        );
        assert!(matches!(err, Err(Error::MixedStateOverlapCheck(0))));
    }

    #[test]
    fn almost_dim_heuristic_projector() {
        let (e, _) = almost_qudit_ensemble(2, 4, 0.05).unwrap();
        let rep = check_assumption(
            &e,
            &Assumption::AlmostDim {
                d: 2,
                eps: 0.05,
                projector: None,
            },
            &CheckContext::default(),
        )
        .unwrap();
        assert!(rep.satisfied);
        assert!(rep.note.unwrap().contains("top-2"));
    }

    #[test]
    fn distrust_and_information_checks() {
        let targets = equiangular_kets(2, 0.6).unwrap();
        let e = StateEnsemble::from_kets(&targets).unwrap();
        let a = Assumption::Distrust {
            targets: targets.clone(),
            eps: 0.0,
        };
        assert!(
            check_assumption(&e, &a, &CheckContext::default())
                .unwrap()
                .satisfied
        );

        // P_g = 0.9 for this pair: log2(2 * 0.9) = 0.848 bits
        let ok = Assumption::Information { alpha: 0.85 };
        let bad = Assumption::Information { alpha: 0.8 };
        assert!(
            check_assumption(&e, &ok, &CheckContext::default())
                .unwrap()
                .satisfied
        );
        assert!(
            !check_assumption(&e, &bad, &CheckContext::default())
                .unwrap()
                .satisfied
        );
    }

    #[test]
    fn invalid_states_rejected() {
        let not_unit = ComplexMatrix::from_diagonal(&[0.5, 0.4]);
        assert!(matches!(
            StateEnsemble::new(vec![not_unit]),
            Err(Error::InvalidState { index: 0, .. })
        ));
        let negative = ComplexMatrix::from_diagonal(&[1.5, -0.5]);
        assert!(StateEnsemble::new(vec![negative]).is_err());
        assert!(StateEnsemble::new(vec![]).is_err());
    }

    #[test]
    fn assumption_json() {
        let a = Assumption::Vacuum { omega: 0.1 };
        assert_eq!(
            serde_json::to_string(&a).unwrap(),
            r#"{"kind":"vacuum","omega":0.1}"#
        );
        let back: Assumption =
            serde_json::from_str(r#"{"kind":"distrust","targets":[[[1,0],[0,0]]],"eps":0.2}"#)
                .unwrap();
        match back {
            Assumption::Distrust { targets, eps } => {
                assert_eq!(targets.len(), 1);
                assert_eq!(eps, 0.2);
            }
            other => panic!("{other:?}"),
        }
        let ov: Assumption = serde_json::from_str(r#"{"kind":"overlap","a":0.3}"#).unwrap();
        assert_eq!(ov, Assumption::UniformOverlap { a: 0.3 });
    }
}
