//! Values frozen from an independent semidefinite-programming solver and from
//! arbitrary-precision evaluation of the closed forms.

#![allow(clippy::excessive_precision)]

use infocap::bounds::{bound_eps, bound_overlap, bound_vacuum, coherent_capacity};
use infocap::ensembles::almost_qubit_epsilon;
use infocap::matcore::{c64, normalize, ComplexMatrix, Ket};
use infocap::{optimize_discrimination, OracleOptions, StateEnsemble};

fn ket(entries: &[(f64, f64)]) -> Ket {
    normalize(&Ket::from_iterator(
        entries.len(),
        entries.iter().map(|&(re, im)| c64(re, im)),
    ))
}

fn proj(entries: &[(f64, f64)]) -> ComplexMatrix {
    ComplexMatrix::projector(&ket(entries))
}

fn oracle(states: Vec<ComplexMatrix>) -> f64 {
    let e = StateEnsemble::new(states).unwrap();
    let r = optimize_discrimination(&e, &OracleOptions::default());
    assert!(r.converged, "gap {}", r.gap());
    r.value
}

#[test]
fn real_qubit_triple() {
    let states = [0.0f64, 60.0, 150.0]
        .iter()
        .map(|t| {
            let h = t.to_radians() / 2.0;
            proj(&[(h.cos(), 0.0), (h.sin(), 0.0)])
        })
        .collect();
    assert!((oracle(states) - 0.655308608740).abs() < 1e-8);
}

#[test]
fn complex_qutrit_quadruple() {
    let states = vec![
        proj(&[(1.0, 0.0), (0.0, 0.5), (0.2, 0.0)]),
        proj(&[(0.3, 0.0), (1.0, 0.0), (0.0, -0.4)]),
        proj(&[(0.1, -0.2), (0.3, 0.0), (1.0, 0.0)]),
        proj(&[(1.0, 0.0), (1.0, 0.0), (0.0, 1.0)]),
    ];
    assert!((oracle(states) - 0.691561961431).abs() < 1e-8);
}

#[test]
fn mixed_qubit_triple() {
    let mix = |p: f64, a: ComplexMatrix, b: ComplexMatrix| &a.scale(p) + &b.scale(1.0 - p);
    let states = vec![
        mix(
            0.7,
            proj(&[(1.0, 0.0), (0.0, 0.0)]),
            proj(&[(0.0, 0.0), (1.0, 0.0)]),
        ),
        mix(
            0.6,
            proj(&[(1.0, 0.0), (1.0, 0.0)]),
            proj(&[(1.0, 0.0), (-1.0, 0.0)]),
        ),
        mix(
            0.5,
            proj(&[(1.0, 0.0), (0.0, 1.0)]),
            proj(&[(1.0, 0.0), (0.0, 0.0)]),
        ),
    ];
    assert!((oracle(states) - 0.455807820309).abs() < 1e-8);
}

#[test]
fn closed_forms_at_high_precision() {
    let cases = [
        (bound_vacuum(4, 0.1).unwrap().pg_bound, 0.559807621135331594),
        (bound_vacuum(3, 0.2).unwrap().pg_bound, 0.777123616632825346),
        (
            bound_overlap(3, 0.5).unwrap().pg_bound,
            0.888888888888888889,
        ),
        (
            bound_overlap(5, 0.3).unwrap().pg_bound,
            0.933109556671707411,
        ),
        (bound_eps(0.5, 0.05).unwrap(), 0.717944947177033678),
        (bound_eps(0.25, 0.1).unwrap(), 0.559807621135331594),
        (almost_qubit_epsilon(0.5), 0.0902040104310498646),
        (
            coherent_capacity(0.5, 8).unwrap().pg_bound,
            0.543195606906305511,
        ),
    ];
    for (i, (got, want)) in cases.iter().enumerate() {
        assert!((got - want).abs() < 1e-14, "case {i}: {got} vs {want}");
    }
}
