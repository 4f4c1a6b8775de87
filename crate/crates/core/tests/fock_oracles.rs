use kerrsim_core::fock::*;
use kerrsim_core::gate::{ideal_kerr, linear_phase, DiagonalOperator};
use kerrsim_core::linalg::{eigh, CMatrix};
use kerrsim_core::{Tolerances, C64};
use nalgebra::{Complex, DMatrix};
use proptest::prelude::*;

const TOL: Tolerances = Tolerances::DEFAULT;

// Reference values evaluated with 40-digit arithmetic (mpmath).
const C0_ALPHA_023: f64 = 0.973_896_737_455_057_2;
const C1_ALPHA_023: f64 = 0.223_996_249_614_663_15;
const TAIL8_ALPHA_079: f64 = 3.284_325_597_362_834e-7;
const CREATION_NORM_ALPHA_053: f64 = 1.2809;
const OVERLAP_023_053: f64 = 0.955_997_481_833_099_9;

fn coherent(alpha: f64, dim: usize) -> FockVector {
    coherent_state(CoherentParams::real(alpha), dim, &TOL).unwrap()
}

#[test]
fn coherent_amplitudes_match_closed_form() {
    let s = coherent(0.23, 8);
    assert!((s.amp(0).re - C0_ALPHA_023).abs() < 1e-15);
    assert!((s.amp(1).re - C1_ALPHA_023).abs() < 1e-15);
    assert!(s.is_normalized(1e-10));
}

#[test]
fn coherent_tail_weight() {
    let s = coherent(0.79, 8);
    let tail = 1.0 - s.norm_sqr();
    assert!(s.norm_sqr() >= 1.0 - 1e-6);
    assert!((tail - TAIL8_ALPHA_079).abs() < 1e-13);
}

#[test]
fn creation_norm_on_coherent_state() {
    let s = coherent(0.53, 16);
    let out = apply_creation(&s, &TOL).unwrap();
    assert!((out.norm_sqr() - CREATION_NORM_ALPHA_053).abs() < 1e-6);
    // at D = 8 the top level is already too populated
    assert!(apply_creation(&coherent(0.53, 8), &TOL).is_err());
}

#[test]
fn annihilation_eigenstate() {
    let s = coherent(0.53, 12);
    let out = apply_annihilation(&s).normalized().unwrap();
    for n in 0..11 {
        assert!((out.amp(n) - s.amp(n)).norm() < 1e-8, "level {n}");
    }
    // ‖âψ - αψ‖ is bounded by the discarded level's contribution
    let diff: f64 = (0..12)
        .map(|n| (apply_annihilation(&s).amp(n) - s.amp(n) * 0.53).norm_sqr())
        .sum::<f64>()
        .sqrt();
    let bound = 0.53 * s.amp(11).norm() + 1e-15;
    assert!(diff <= bound, "{diff} > {bound}");
}

#[test]
fn parity_rotation_flips_coherent_amplitude() {
    let s = coherent(0.53, 12);
    let flipped = apply_diagonal(&linear_phase(std::f64::consts::PI, 12), &s).unwrap();
    let target = coherent(-0.53, 12);
    for n in 0..12 {
        assert!((flipped.amp(n) - target.amp(n)).norm() < 1e-10);
    }
}

#[test]
fn diagonal_number_operator() {
    let n_op = DiagonalOperator::from_fn(4, |n| C64::new(n as f64, 0.0)).unwrap();
    let out = apply_diagonal(&n_op, &FockVector::basis(2, 4)).unwrap();
    assert_eq!(out, FockVector::basis(2, 4).scaled(C64::new(2.0, 0.0)));
    let id = apply_diagonal(&DiagonalOperator::identity(4), &coherent(0.2, 4)).unwrap();
    assert_eq!(id, coherent(0.2, 4));
}

#[test]
fn coherent_overlap_closed_form() {
    let a = coherent(0.23, 16);
    let b = coherent(0.53, 16);
    let ip = inner_product(&a, &b).unwrap();
    assert!((ip.re - OVERLAP_023_053).abs() < 1e-6);
    assert!(ip.im.abs() < 1e-15);
    assert_eq!(
        inner_product(&FockVector::basis(0, 3), &FockVector::basis(1, 3)).unwrap(),
        C64::new(0.0, 0.0)
    );
    assert!(inner_product(&a, &FockVector::basis(0, 3)).is_err());
}

#[test]
fn commutator_on_number_states() {
    let d = 10;
    for n in 0..=d - 3 {
        let ket = FockVector::basis(n, d);
        let a_adag = apply_annihilation(&apply_creation(&ket, &TOL).unwrap());
        let adag_a = apply_creation(&apply_annihilation(&ket), &TOL).unwrap();
        for k in 0..d {
            let comm = a_adag.amp(k) - adag_a.amp(k);
            assert!((comm - ket.amp(k)).norm() < 1e-14, "n = {n}, level {k}");
        }
        let expected = ket.scaled(C64::new((n + 1) as f64, 0.0));
        assert!((a_adag.amp(n) - expected.amp(n)).norm() < 1e-14);
    }
}

fn to_nalgebra(m: &CMatrix) -> DMatrix<Complex<f64>> {
    DMatrix::from_fn(m.dim(), m.dim(), |r, c| m[(r, c)])
}

fn clamp_noise(values: &[f64]) -> f64 {
    let scale = values.iter().fold(0.0f64, |a, v| a.max(v.abs()));
    4.0 * values.len() as f64 * f64::EPSILON * scale
}

fn sqrt_psd(m: DMatrix<Complex<f64>>) -> DMatrix<Complex<f64>> {
    let eig = m.symmetric_eigen();
    let vals: Vec<f64> = eig.eigenvalues.iter().copied().collect();
    let floor = clamp_noise(&vals);
    let roots = eig
        .eigenvalues
        .map(|v| Complex::new(if v > floor { v.sqrt() } else { 0.0 }, 0.0));
    &eig.eigenvectors * DMatrix::from_diagonal(&roots) * eig.eigenvectors.adjoint()
}

/// Uhlmann fidelity as the squared nuclear norm of √ρ·√σ (nalgebra SVD).
fn fidelity_oracle(rho: &DensityMatrix, sigma: &DensityMatrix) -> f64 {
    let r = to_nalgebra(rho.matrix());
    let s = to_nalgebra(sigma.matrix());
    let tr_r = r.trace().re;
    let tr_s = s.trace().re;
    let x = sqrt_psd(r) * sqrt_psd(s);
    let nuclear: f64 = x.singular_values().iter().sum();
    nuclear * nuclear / (tr_r * tr_s)
}

#[test]
fn fidelity_against_eigendecomposition_oracle() {
    use kerrsim_core::gate::{apply_conditional, build_superposition_operator, SuperpositionParams};
    let input = coherent(0.53, 16);
    let v = build_superposition_operator(SuperpositionParams::ideal(), 16).unwrap();
    let output = apply_conditional(&v, &input, &TOL).unwrap().state;
    let rho = density_from_pure(&input).unwrap();
    let sigma = density_from_pure(&output).unwrap();
    let ours = fidelity(&rho, &sigma, &TOL).unwrap();
    let oracle = fidelity_oracle(&rho, &sigma);
    assert!((ours - oracle).abs() < 1e-8, "{ours} vs {oracle}");

    // mixed states: pass both through loss
    let ch = kerrsim_core::channels::LossChannel::new(0.66).unwrap();
    let rho_m = kerrsim_core::channels::apply_loss(&rho, ch);
    let sigma_m = kerrsim_core::channels::apply_loss(&sigma, ch);
    let ours = fidelity(&rho_m, &sigma_m, &TOL).unwrap();
    let oracle = fidelity_oracle(&rho_m, &sigma_m);
    assert!((ours - oracle).abs() < 1e-8, "{ours} vs {oracle}");
}

fn complex_vec(len: usize) -> impl Strategy<Value = Vec<C64>> {
    prop::collection::vec((-1.0..1.0f64, -1.0..1.0f64), len)
        .prop_map(|v| v.into_iter().map(|(re, im)| C64::new(re, im)).collect())
}

fn random_hermitian(dim: usize) -> impl Strategy<Value = CMatrix> {
    complex_vec(dim * dim).prop_map(move |v| CMatrix::from_fn(dim, |r, c| v[r * dim + c]).hermitian_part())
}

fn random_density(dim: usize, rank: usize) -> impl Strategy<Value = DensityMatrix> {
    prop::collection::vec(complex_vec(dim), rank).prop_map(move |vs| {
        let mut m = CMatrix::zeros(dim);
        for v in &vs {
            m = m.add(&CMatrix::outer(v, v));
        }
        let tr = m.trace().re.max(1e-300);
        DensityMatrix::from_matrix_unchecked(m.scale(C64::new(1.0 / tr, 0.0)))
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn eigh_agrees_with_nalgebra(m in random_hermitian(7)) {
        let ours = eigh(&m);
        let mut theirs: Vec<f64> = to_nalgebra(&m).symmetric_eigen().eigenvalues.iter().copied().collect();
        theirs.sort_by(f64::total_cmp);
        for (a, b) in ours.values.iter().zip(&theirs) {
            prop_assert!((a - b).abs() < 1e-12);
        }
        prop_assert!(ours.map_values(|x| x).max_abs_diff(&m) < 1e-12);
    }

    #[test]
    fn fidelity_matches_oracle_and_is_symmetric(rho in random_density(5, 2), sigma in random_density(5, 3)) {
        let f = fidelity(&rho, &sigma, &TOL).unwrap();
        let g = fidelity(&sigma, &rho, &TOL).unwrap();
        prop_assert!((f - g).abs() < 1e-9);
        prop_assert!((f - fidelity_oracle(&rho, &sigma)).abs() < 1e-8);
        prop_assert!((fidelity(&rho, &rho, &TOL).unwrap() - 1.0).abs() < 1e-9);
    }

    #[test]
    fn fidelity_ignores_global_phase(a in complex_vec(4), b in complex_vec(4), phase in 0.0..6.3f64) {
        let a = FockVector::new(a).unwrap();
        let b = FockVector::new(b).unwrap();
        prop_assume!(a.norm() > 1e-3 && b.norm() > 1e-3);
        let ra = density_from_pure(&a).unwrap();
        let rb = density_from_pure(&b).unwrap();
        let rb_phase = density_from_pure(&b.scaled(C64::from_polar(1.0, phase))).unwrap();
        let f1 = fidelity(&ra, &rb, &TOL).unwrap();
        let f2 = fidelity(&ra, &rb_phase, &TOL).unwrap();
        prop_assert!((f1 - f2).abs() < 1e-12);
        // pure states: |<a|b>|²
        let overlap = inner_product(&a, &b).unwrap().norm_sqr() / (a.norm_sqr() * b.norm_sqr());
        prop_assert!((f1 - overlap).abs() < 1e-7);
    }

    #[test]
    fn creation_then_annihilation(n in 0usize..7) {
        let ket = FockVector::basis(n, 8);
        let out = apply_annihilation(&apply_creation(&ket, &TOL).unwrap());
        let expected = ket.scaled(C64::new((n + 1) as f64, 0.0));
        for k in 0..8 {
            prop_assert!((out.amp(k) - expected.amp(k)).norm() < 1e-14);
        }
    }

    #[test]
    fn kerr_phase_is_unit_modulus(phi in -4.0..4.0f64) {
        let k = ideal_kerr(phi, 8);
        prop_assert!(k.values().iter().all(|v| (v.norm() - 1.0).abs() < 1e-15));
    }
}
