use std::f64::consts::{FRAC_PI_2, PI, SQRT_2};

use kerrsim_core::fock::*;
use kerrsim_core::gate::*;
use kerrsim_core::{Tolerances, C64};
use proptest::prelude::*;

const TOL: Tolerances = Tolerances::DEFAULT;

#[test]
fn gain_solution() {
    let s = solve_superposition();
    assert!((s.ratio - (-3.0 - SQRT_2)).abs() < 1e-12);
    assert!((s.gain - (SQRT_2 + 1.0)).abs() < 1e-12);
    let (r1, r2) = s.residuals();
    assert!(r1.abs() <= 1e-12 && r2.abs() <= 1e-12);
}

#[test]
fn rejected_branch_has_negative_gain() {
    // quadratic formula on r² + 6r + 7 = 0
    let disc: f64 = 36.0 - 28.0;
    let roots = [(-6.0 - disc.sqrt()) / 2.0, (-6.0 + disc.sqrt()) / 2.0];
    let [accepted, rejected] = superposition_roots();
    assert!((accepted.ratio - roots[0]).abs() < 1e-14);
    assert!((rejected.ratio - roots[1]).abs() < 1e-14);
    assert!((rejected.gain - (1.0 - SQRT_2)).abs() < 1e-14);
    assert!(rejected.gain < 0.0);
    for root in roots {
        assert!((root * root + 6.0 * root + 7.0).abs() < 1e-13);
    }
}

#[test]
fn ideal_superposition_values() {
    let v = build_superposition_operator(SuperpositionParams::ideal(), 8).unwrap();
    let expected = [1.0, -(1.0 + SQRT_2), -(3.0 + 2.0 * SQRT_2), -(5.0 + 3.0 * SQRT_2)];
    for (n, e) in expected.iter().enumerate() {
        assert!((v.values()[n].re - e).abs() < 1e-13, "level {n}");
        assert_eq!(v.values()[n].im, 0.0);
    }
    let ratio = v.values()[2] / v.values()[1];
    assert!((ratio.re - (1.0 + SQRT_2)).abs() < 1e-13);
}

#[test]
fn best_fit_operator_is_complex() {
    let v = build_superposition_operator(SuperpositionParams::best_fit(), 8).unwrap();
    assert_eq!(v.values()[0], C64::new(1.0, 0.0));
    assert!(v.values()[1].im.abs() > 1.0);
}

#[test]
fn kerr_quarter_turn() {
    let k = ideal_kerr(FRAC_PI_2, 8);
    let expected = [1.0, 1.0, -1.0, -1.0, 1.0, 1.0, -1.0, -1.0];
    for (v, e) in k.values().iter().zip(expected) {
        assert!((v - C64::new(e, 0.0)).norm() < 1e-12);
    }
    assert_eq!(ideal_kerr(0.0, 5), DiagonalOperator::identity(5));
}

#[test]
fn amplification_and_attenuation() {
    let g = 1.0 + SQRT_2;
    let t = noiseless_attenuate(1.0 / g, 6).unwrap();
    assert!((t.values()[2].re - (3.0 - 2.0 * SQRT_2)).abs() < 1e-14);
    let round = t.compose(&noiseless_amplify(g, 6).unwrap()).unwrap();
    for v in round.values() {
        assert!((v - C64::new(1.0, 0.0)).norm() < 1e-12);
    }
}

#[test]
fn identity_conditional_has_unit_weight() {
    let s = coherent_state(CoherentParams::real(0.53), 12, &TOL).unwrap();
    let out = apply_conditional(&DiagonalOperator::identity(12), &s, &TOL).unwrap();
    assert!((out.weight - 1.0).abs() < 1e-15);
}

// weight of V|0.53> on levels n >= 3, 30-digit reference
const OUTSIDE_WEIGHT_053: f64 = 0.083_244_953_111_205_53;

#[test]
fn superposition_on_coherent_state_matches_amplified_target() {
    let c = coherent_state(CoherentParams::real(0.53), 16, &TOL).unwrap();
    let v = build_superposition_operator(SuperpositionParams::ideal(), 16).unwrap();
    let out = apply_conditional(&v, &c, &TOL).unwrap().state.normalized().unwrap();

    let g = 1.0 + SQRT_2;
    let amps = c.amps();
    let target = FockVector::new(vec![-amps[0], amps[1] * g, amps[2] * g * g]).unwrap();
    let target = target.normalized().unwrap();
    let restricted = out.resized(3).normalized().unwrap();
    let residual = 1.0 - inner_product(&target, &restricted).unwrap().norm_sqr();
    assert!(residual <= 2e-2, "residual {residual}");
    assert!(residual.abs() < 1e-14);

    let outside = 1.0 - out.resized(3).norm_sqr();
    assert!((outside - OUTSIDE_WEIGHT_053).abs() < 1e-12, "{outside}");
}

#[test]
fn sign_flip_examples() {
    assert_eq!(
        nonlinear_sign_target(&FockVector::basis(0, 3)).unwrap(),
        FockVector::basis(0, 3).scaled(C64::new(-1.0, 0.0))
    );
    assert_eq!(
        nonlinear_sign_target(&FockVector::basis(1, 3)).unwrap(),
        FockVector::basis(1, 3)
    );
    let s = 1.0 / 3f64.sqrt();
    let out = nonlinear_sign_target(&FockVector::from_real(&[s, s, s]).unwrap()).unwrap();
    assert_eq!(out, FockVector::from_real(&[-s, s, s]).unwrap());
    assert!(nonlinear_sign_target(&FockVector::basis(0, 2)).is_err());
}

#[test]
fn amplified_target_examples() {
    let g = 1.0 + SQRT_2;
    let vac = gkerr_target(&FockVector::basis(0, 3), g, &TOL).unwrap();
    assert_eq!(vac, FockVector::from_real(&[-1.0, 0.0, 0.0]).unwrap());
    let two = gkerr_target(&FockVector::basis(2, 3), g, &TOL).unwrap();
    assert!((two.amp(2).re - (3.0 + 2.0 * SQRT_2)).abs() < 1e-14);
    let s = FockVector::from_real(&[0.3, -0.5, 0.8, 0.0]).unwrap();
    assert_eq!(gkerr_target(&s, 1.0, &TOL).unwrap(), nonlinear_sign_target(&s).unwrap());
}

fn subspace_state(dim: usize) -> impl Strategy<Value = FockVector> {
    prop::collection::vec((-1.0..1.0f64, -1.0..1.0f64), 3).prop_map(move |v| {
        let amps: Vec<C64> = v.into_iter().map(|(re, im)| C64::new(re, im)).collect();
        FockVector::new(amps).unwrap().resized(dim)
    })
}

fn max_diff(a: &FockVector, b: &FockVector) -> f64 {
    a.amps()
        .iter()
        .zip(b.amps())
        .map(|(x, y)| (x - y).norm())
        .fold(0.0, f64::max)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(100))]

    #[test]
    fn kerr_plus_linear_phase_is_minus_sign_flip(s in subspace_state(8)) {
        let kerr = ideal_kerr(FRAC_PI_2, 8);
        let lin = linear_phase(PI, 8);
        let out = lin.apply(&kerr.apply(&s).unwrap()).unwrap();
        let target = nonlinear_sign_target(&s).unwrap().scaled(C64::new(-1.0, 0.0));
        prop_assert!(max_diff(&out, &target) <= 1e-12);
    }

    #[test]
    fn superposition_equals_minus_amplified_target(s in subspace_state(8)) {
        let sol = solve_superposition();
        let v = build_superposition_operator(SuperpositionParams::ideal(), 8).unwrap();
        let out = apply_conditional(&v, &s, &TOL).unwrap().state;
        let target = gkerr_target(&s, sol.gain, &TOL).unwrap().scaled(C64::new(-1.0, 0.0));
        prop_assert!(max_diff(&out, &target) <= 1e-12);
    }

    #[test]
    fn attenuation_restores_sign_flip(s in subspace_state(8)) {
        let g = solve_superposition().gain;
        let amplified = gkerr_target(&s, g, &TOL).unwrap();
        let restored = noiseless_attenuate(1.0 / g, 8).unwrap().apply(&amplified).unwrap();
        prop_assert!(max_diff(&restored, &nonlinear_sign_target(&s).unwrap()) <= 1e-12);
    }

    #[test]
    fn diagonal_operators_commute(
        amps in prop::collection::vec((-1.0..1.0f64, -1.0..1.0f64), 10),
        phi in -3.0..3.0f64,
    ) {
        let s = FockVector::new(amps.into_iter().map(|(re, im)| C64::new(re, im)).collect()).unwrap();
        let v = build_superposition_operator(SuperpositionParams::best_fit(), 10).unwrap();
        let k = ideal_kerr(phi, 10);
        let a = k.apply(&v.apply(&s).unwrap()).unwrap();
        let b = v.apply(&k.apply(&s).unwrap()).unwrap();
        prop_assert!(max_diff(&a, &b) <= 1e-12);
    }
}
