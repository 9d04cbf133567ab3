//! Random states, unitaries and assumption-respecting ensembles.
//!
//! Every sampler that produces an ensemble for an assumption sets the
//! assumption parameter to the tightest value the ensemble satisfies, so
//! soundness checks probe the bound at its edge.

use rand::Rng;
use rand_distr::StandardNormal;

use crate::ensembles::{leading_projector, Assumption, CheckContext, StateEnsemble};
use crate::error::Result;
use crate::matcore::{basis_ket, c64, normalize, partial_trace, ComplexMatrix, Ket, TraceOut, C64};

fn gaussian_c64(rng: &mut impl Rng) -> C64 {
    c64(rng.sample(StandardNormal), rng.sample(StandardNormal))
}

/// Haar-random unit vector.
pub fn random_ket(dim: usize, rng: &mut impl Rng) -> Ket {
    loop {
        let v = Ket::from_fn(dim, |_, _| gaussian_c64(rng));
        if v.norm() > 1e-8 {
            return normalize(&v);
        }
    }
}

/// Haar-random unitary (QR of a Ginibre matrix with phase correction).
pub fn random_unitary(dim: usize, rng: &mut impl Rng) -> ComplexMatrix {
    let g = ComplexMatrix::from_fn(dim, dim, |_, _| gaussian_c64(rng)).into_matrix();
    let qr = g.qr();
    let (mut q, r) = (qr.q(), qr.r());
    for j in 0..dim {
        let d = r[(j, j)];
        if d.norm() > 0.0 {
            let phase = d / d.norm();
            q.column_mut(j).iter_mut().for_each(|z| *z *= phase);
        }
    }
    ComplexMatrix::from_matrix(q)
}

/// Random density matrix of the given rank (induced measure).
pub fn random_density(dim: usize, rank: usize, rng: &mut impl Rng) -> ComplexMatrix {
    let g = ComplexMatrix::from_fn(dim, rank.max(1), |_, _| gaussian_c64(rng));
    let rho = (&g * &g.adjoint()).hermitian_part();
    rho.scale(1.0 / rho.trace_re())
}

/// Random unit vector orthogonal to all `avoid` vectors (assumed orthonormal).
pub fn random_ket_orthogonal(dim: usize, avoid: &[Ket], rng: &mut impl Rng) -> Ket {
    loop {
        let mut v = Ket::from_fn(dim, |_, _| gaussian_c64(rng));
        for a in avoid {
            let c = a.dotc(&v);
            v -= a * c;
        }
        if v.norm() > 1e-6 {
            return normalize(&v);
        }
    }
}

pub fn random_pure_ensemble(n: usize, dim: usize, rng: &mut impl Rng) -> Result<StateEnsemble> {
    let kets: Vec<Ket> = (0..n).map(|_| random_ket(dim, rng)).collect();
    StateEnsemble::from_kets(&kets)
}

/// A sampled ensemble together with the assumption it saturates.
#[derive(Clone, Debug)]
pub struct Sample {
    pub ensemble: StateEnsemble,
    pub assumption: Assumption,
    pub context: CheckContext,
}

/// States supported on a random `d`-dimensional subspace of a larger space.
pub fn sample_dimension(rng: &mut impl Rng) -> Result<Sample> {
    let n = rng.random_range(2..=6);
    sample_dimension_with(n, rng)
}

pub fn sample_dimension_with(n: usize, rng: &mut impl Rng) -> Result<Sample> {
    let d = rng.random_range(1..=4);
    let extra = rng.random_range(0..=2);
    let dim = d + extra;
    let u = random_unitary(dim, rng);
    let states = (0..n)
        .map(|_| {
            let rank = if rng.random_bool(0.5) {
                1
            } else {
                rng.random_range(1..=d)
            };
            let rho = random_density(d, rank, rng).embed(dim)?;
            Ok((&(&u * &rho) * &u.adjoint()).hermitian_part())
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(Sample {
        ensemble: StateEnsemble::new(states)?,
        assumption: Assumption::Dimension { d },
        context: CheckContext::default(),
    })
}

/// Entanglement-assisted messages: a shared pure state on
/// `C^{d_shared} (x) C^{k}`, Alice's half sent through a random channel with
/// `d`-dimensional output. Layout `C^{d_shared} (x) C^{d}`.
pub fn sample_ea_dimension(rng: &mut impl Rng) -> Result<Sample> {
    let d: usize = rng.random_range(2..=3);
    let d_shared = rng.random_range(1..=d + 1);
    let k = rng.random_range(1..=d + 1);
    let n = rng.random_range(2..=(2 * d * d + 1));
    let env = rng.random_range(1..=2).max(k.div_ceil(d));
    let shared = ComplexMatrix::projector(&random_ket(d_shared * k, rng));
    let id_b = ComplexMatrix::identity(d_shared);
    let states = (0..n)
        .map(|_| {
            // Stinespring isometry C^k -> C^d (x) C^env
            let u = random_unitary(d * env, rng);
            let v = ComplexMatrix::from_fn(d * env, k, |i, j| u.get(i, j));
            let big = id_b.kron(&v);
            let out = &(&big * &shared) * &big.adjoint();
            Ok(partial_trace(&out, d_shared * d, env, TraceOut::Second)?.hermitian_part())
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(Sample {
        ensemble: StateEnsemble::new(states)?,
        assumption: Assumption::EaDimension { d },
        context: CheckContext::default(),
    })
}

/// Pure states `sqrt(1-w)|0> + sqrt(w)|t>` (occasionally mixed pairs of them).
pub fn sample_vacuum(rng: &mut impl Rng) -> Result<Sample> {
    let n = rng.random_range(2..=5);
    sample_vacuum_with(n, rng)
}

pub fn sample_vacuum_with(n: usize, rng: &mut impl Rng) -> Result<Sample> {
    let dim = rng.random_range(2..=n + 2);
    let w_max: f64 = rng.random_range(0.0..1.0);
    let vac = basis_ket(dim, 0);
    fn cone_ket(vac: &Ket, w_max: f64, rng: &mut impl Rng) -> Ket {
        let w: f64 = rng.random_range(0.0..=w_max);
        let t = random_ket_orthogonal(vac.len(), std::slice::from_ref(vac), rng);
        let phase = C64::from_polar(1.0, rng.random_range(0.0..std::f64::consts::TAU));
        (vac * c64((1.0 - w).sqrt(), 0.0) + t * c64(w.sqrt(), 0.0)) * phase
    }
    let states: Vec<ComplexMatrix> = (0..n)
        .map(|_| {
            if rng.random_bool(0.2) {
                let p: f64 = rng.random_range(0.0..1.0);
                let a = ComplexMatrix::projector(&cone_ket(&vac, w_max, rng));
                let b = ComplexMatrix::projector(&cone_ket(&vac, w_max, rng));
                &a.scale(p) + &b.scale(1.0 - p)
            } else {
                ComplexMatrix::projector(&cone_ket(&vac, w_max, rng))
            }
        })
        .collect();
    let ensemble = StateEnsemble::new(states)?;
    let omega = ensemble
        .states()
        .iter()
        .map(|r| 1.0 - r.expectation(&vac))
        .fold(0.0f64, f64::max)
        .clamp(0.0, 1.0);
    Ok(Sample {
        ensemble,
        assumption: Assumption::Vacuum { omega },
        context: CheckContext::with_vacuum(vac),
    })
}

/// Pure states clustered around a common direction; `a` is their smallest
/// pairwise overlap.
pub fn sample_overlap(rng: &mut impl Rng) -> Result<Sample> {
    let n = rng.random_range(2..=5);
    sample_overlap_with(n, rng)
}

pub fn sample_overlap_with(n: usize, rng: &mut impl Rng) -> Result<Sample> {
    let dim = rng.random_range(2..=n + 1);
    let center = random_ket(dim, rng);
    let spread: f64 = rng.random_range(0.05..2.0);
    let kets: Vec<Ket> = (0..n)
        .map(|_| {
            let r = random_ket(dim, rng);
            let phase = C64::from_polar(1.0, rng.random_range(0.0..std::f64::consts::TAU));
            normalize(&(&center + r * c64(spread, 0.0))) * phase
        })
        .collect();
    let ensemble = StateEnsemble::from_kets(&kets)?;
    let mut a = 1.0f64;
    for x in 0..n {
        for y in (x + 1)..n {
            a = a.min(ensemble.pure_overlap(x, y)?);
        }
    }
    Ok(Sample {
        ensemble,
        assumption: Assumption::UniformOverlap {
            a: a.clamp(0.0, 1.0),
        },
        context: CheckContext::default(),
    })
}

/// States with most of their weight on the first `d` coordinates.
pub fn sample_almost_dim(rng: &mut impl Rng) -> Result<Sample> {
    let d = rng.random_range(1..=3);
    let n = rng.random_range(d.max(2)..=6);
    sample_almost_dim_with(d, n, rng)
}

pub fn sample_almost_dim_with(d: usize, n: usize, rng: &mut impl Rng) -> Result<Sample> {
    let dim = d + rng.random_range(1..=n);
    let eps_max: f64 = rng.random_range(0.0..0.5);
    let core_basis: Vec<Ket> = (0..d).map(|i| basis_ket(dim, i)).collect();
    let kets: Vec<Ket> = (0..n)
        .map(|_| {
            let w: f64 = rng.random_range(0.0..=eps_max);
            let u = random_ket(d, rng);
            let mut core = Ket::zeros(dim);
            core.rows_mut(0, d).copy_from(&u);
            let t = random_ket_orthogonal(dim, &core_basis, rng);
            core * c64((1.0 - w).sqrt(), 0.0) + t * c64(w.sqrt(), 0.0)
        })
        .collect();
    let ensemble = StateEnsemble::from_kets(&kets)?;
    let pi = leading_projector(dim, d);
    let eps = ensemble
        .states()
        .iter()
        .map(|r| 1.0 - r.trace_product(&pi).re)
        .fold(0.0f64, f64::max)
        .clamp(0.0, 1.0);
    Ok(Sample {
        ensemble,
        assumption: Assumption::AlmostDim {
            d,
            eps,
            projector: Some(pi),
        },
        context: CheckContext::default(),
    })
}

/// Lab states near random pure targets, possibly in a larger space.
pub fn sample_distrust(rng: &mut impl Rng) -> Result<Sample> {
    let n = rng.random_range(2..=4);
    let target_dim = rng.random_range(n..=n + 1);
    let targets: Vec<Ket> = (0..n).map(|_| random_ket(target_dim, rng)).collect();
    sample_distrust_with(targets, rng)
}

/// Lab states near the given targets, embedded in a space up to `n`
/// dimensions larger than theirs.
pub fn sample_distrust_with(targets: Vec<Ket>, rng: &mut impl Rng) -> Result<Sample> {
    let n = targets.len();
    let target_dim = targets.iter().map(|t| t.len()).max().unwrap_or(1);
    let dim = target_dim + rng.random_range(0..=n);
    let eps_max: f64 = rng.random_range(0.0..0.5);
    let kets = targets
        .iter()
        .map(|t| {
            let w: f64 = rng.random_range(0.0..=eps_max);
            let te = crate::matcore::embed_ket(t, dim)?;
            let o = random_ket_orthogonal(dim, std::slice::from_ref(&te), rng);
            Ok(te * c64((1.0 - w).sqrt(), 0.0) + o * c64(w.sqrt(), 0.0))
        })
        .collect::<Result<Vec<_>>>()?;
    let ensemble = StateEnsemble::from_kets(&kets)?;
    let eps = targets
        .iter()
        .zip(ensemble.states())
        .map(|(t, r)| Ok(1.0 - r.expectation(&crate::matcore::embed_ket(t, dim)?)))
        .collect::<Result<Vec<_>>>()?
        .into_iter()
        .fold(0.0f64, f64::max)
        .clamp(0.0, 1.0);
    Ok(Sample {
        ensemble,
        assumption: Assumption::Distrust { targets, eps },
        context: CheckContext::default(),
    })
}
