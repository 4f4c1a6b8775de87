use kerrsim_core::channels::*;
use kerrsim_core::fock::*;
use kerrsim_core::linalg::{eigh, CMatrix};
use kerrsim_core::{Tolerances, C64};
use proptest::prelude::*;

const TOL: Tolerances = Tolerances::DEFAULT;

fn complex_vec(len: usize) -> impl Strategy<Value = Vec<C64>> {
    prop::collection::vec((-1.0..1.0f64, -1.0..1.0f64), len)
        .prop_map(|v| v.into_iter().map(|(re, im)| C64::new(re, im)).collect())
}

fn random_density(dim: usize) -> impl Strategy<Value = DensityMatrix> {
    prop::collection::vec(complex_vec(dim), 1..4).prop_map(move |vs| {
        let mut m = CMatrix::zeros(dim);
        for v in &vs {
            m = m.add(&CMatrix::outer(v, v));
        }
        let tr = m.trace().re.max(1e-300);
        DensityMatrix::from_matrix_unchecked(m.scale(C64::new(1.0 / tr, 0.0)))
    })
}

/// Hermitian operator with spectrum inside [0, 1].
fn random_effect(dim: usize) -> impl Strategy<Value = CMatrix> {
    complex_vec(dim * dim).prop_map(move |v| {
        let h = CMatrix::from_fn(dim, |r, c| v[r * dim + c]).hermitian_part();
        let e = eigh(&h);
        let (lo, hi) = (e.min_value(), e.max_value());
        e.map_values(|x| if hi > lo { (x - lo) / (hi - lo) } else { 0.5 })
    })
}

#[test]
fn unit_efficiency_is_identity() {
    let rho = density_from_pure(&coherent_state(CoherentParams::real(0.79), 12, &TOL).unwrap()).unwrap();
    let ch = LossChannel::new(1.0).unwrap();
    assert!(apply_loss(&rho, ch).matrix().max_abs_diff(rho.matrix()) < 1e-15);
    let e = CMatrix::from_fn(4, |r, c| C64::new(0.1 * (r + c) as f64, 0.05 * (r as f64 - c as f64)));
    assert!(ch.adjoint_matrix(&e).max_abs_diff(&e) < 1e-15);
}

#[test]
fn adjoint_is_unital() {
    for eta in [0.0, 0.3, 0.66, 1.0] {
        let ch = LossChannel::new(eta).unwrap();
        let out = loss_adjoint_on_operator(&CMatrix::identity(9), ch, &TOL).unwrap();
        assert!(out.max_abs_diff(&CMatrix::identity(9)) < 1e-12, "eta {eta}");
    }
}

#[test]
fn loss_on_coherent_state_shrinks_amplitude() {
    // pure loss maps |α> to |√η α>; the corner entries of a truncated
    // matrix miss terms from above the cutoff, so compare a sub-block
    let rho = density_from_pure(&coherent_state(CoherentParams::real(0.79), 28, &TOL).unwrap()).unwrap();
    let out = apply_loss(&rho, LossChannel::new(0.66).unwrap()).truncated(16);
    let expected =
        density_from_pure(&coherent_state(CoherentParams::real(0.79 * 0.66f64.sqrt()), 16, &TOL).unwrap()).unwrap();
    let d = out.matrix().max_abs_diff(expected.matrix());
    assert!(d < 1e-14, "{d}");
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(100))]

    #[test]
    fn duality_identity(rho in random_density(6), e in random_effect(6), eta in 0.0..=1.0f64) {
        let ch = LossChannel::new(eta).unwrap();
        let lhs = rho.matrix().trace_product(&loss_adjoint_on_operator(&e, ch, &TOL).unwrap());
        let rhs = apply_loss(&rho, ch).matrix().trace_product(&e);
        prop_assert!((lhs - rhs).norm() <= 1e-10);
    }

    #[test]
    fn adjoint_keeps_effects_bounded(e in random_effect(6), eta in 0.0..=1.0f64) {
        let out = LossChannel::new(eta).unwrap().adjoint_matrix(&e);
        prop_assert!(out.hermitian_deviation() <= 1e-10);
        let spec = eigh(&out);
        prop_assert!(spec.min_value() >= -1e-10);
        prop_assert!(spec.max_value() <= 1.0 + 1e-10);
    }

    #[test]
    fn loss_is_physical(rho in random_density(7), eta in 0.0..=1.0f64) {
        let out = apply_loss(&rho, LossChannel::new(eta).unwrap());
        prop_assert!((out.trace() - rho.trace()).abs() <= 1e-10);
        prop_assert!(out.min_eigenvalue() >= -1e-9);
        prop_assert!(out.hermitian_deviation() <= 1e-12);
    }

    #[test]
    fn semigroup(rho in random_density(7), a in 0.0..=1.0f64, b in 0.0..=1.0f64) {
        let two_step = apply_loss(&apply_loss(&rho, LossChannel::new(a).unwrap()), LossChannel::new(b).unwrap());
        let one_step = apply_loss(&rho, LossChannel::new(a * b).unwrap());
        prop_assert!(two_step.matrix().max_abs_diff(one_step.matrix()) <= 1e-9);
    }
}
