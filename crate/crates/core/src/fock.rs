//! Truncated single-mode Fock space.
//!
//! A [`FockVector`] holds amplitudes over `|0>..|D-1>` and may be unnormalized,
//! in which case its squared norm carries a conditional weight. Ladder
//! operators act inside the truncation: â† refuses to push population past
//! the top level rather than silently clipping it.

use alloc::vec;
use alloc::vec::Vec;

use num_traits::Zero;

use crate::gate::DiagonalOperator;
use crate::linalg::{eigh, noise_floor, psd_sqrt, CMatrix};
use crate::{Error, Result, Tolerances, C64};

/// Default truncation used for reconstruction.
pub const DEFAULT_DIM: usize = 8;
/// Truncation used for forward simulations before projecting down.
pub const FORWARD_DIM: usize = 16;

#[derive(Debug, Clone, PartialEq)]
pub struct FockVector {
    amps: Vec<C64>,
}

impl FockVector {
    pub fn new(amps: Vec<C64>) -> Result<Self> {
        if amps.is_empty() {
            return Err(Error::InvalidParameter {
                name: "dim",
                reason: "must be at least 1",
            });
        }
        if amps.iter().any(|a| !a.re.is_finite() || !a.im.is_finite()) {
            return Err(Error::InvalidParameter {
                name: "amps",
                reason: "amplitudes must be finite",
            });
        }
        Ok(FockVector { amps })
    }

    pub fn from_real(amps: &[f64]) -> Result<Self> {
        Self::new(amps.iter().map(|&a| C64::new(a, 0.0)).collect())
    }

    pub fn zeros(dim: usize) -> Self {
        assert!(dim > 0, "Fock dimension must be positive");
        FockVector {
            amps: vec![C64::zero(); dim],
        }
    }

    /// Number state `|n>`.
    pub fn basis(n: usize, dim: usize) -> Self {
        assert!(n < dim, "level {n} outside truncation {dim}");
        let mut v = Self::zeros(dim);
        v.amps[n] = C64::new(1.0, 0.0);
        v
    }

    pub fn dim(&self) -> usize {
        self.amps.len()
    }

    pub fn amps(&self) -> &[C64] {
        &self.amps
    }

    pub fn amp(&self, n: usize) -> C64 {
        self.amps[n]
    }

    pub fn norm_sqr(&self) -> f64 {
        self.amps.iter().map(|a| a.norm_sqr()).sum()
    }

    pub fn norm(&self) -> f64 {
        self.norm_sqr().sqrt()
    }

    pub fn is_normalized(&self, tol: f64) -> bool {
        (self.norm() - 1.0).abs() <= tol
    }

    pub fn normalized(&self) -> Result<Self> {
        let norm = self.norm();
        if norm == 0.0 {
            return Err(Error::ZeroNorm);
        }
        Ok(self.scaled(C64::new(1.0 / norm, 0.0)))
    }

    pub fn scaled(&self, s: C64) -> Self {
        FockVector {
            amps: self.amps.iter().map(|a| a * s).collect(),
        }
    }

    /// Keeps the first `dim` levels, zero-padding when enlarging.
    pub fn resized(&self, dim: usize) -> Self {
        let mut amps = vec![C64::zero(); dim];
        for (dst, src) in amps.iter_mut().zip(&self.amps) {
            *dst = *src;
        }
        FockVector { amps }
    }

    /// Multiplies by the phase that makes the first amplitude of magnitude
    /// above `threshold`, searched from `level` upward, real and nonnegative.
    pub fn phase_fixed(&self, level: usize, threshold: f64) -> Self {
        match self.amps.iter().skip(level).find(|a| a.norm() > threshold) {
            Some(a) => self.scaled(a.conj() / a.norm()),
            None => self.clone(),
        }
    }
}

/// Hermitian positive-semidefinite D×D matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct DensityMatrix {
    elems: CMatrix,
}

impl DensityMatrix {
    /// Wraps a matrix without checking physicality.
    pub fn from_matrix_unchecked(elems: CMatrix) -> Self {
        DensityMatrix { elems }
    }

    /// Wraps a matrix after checking Hermiticity, positivity and the trace bound.
    pub fn new(elems: CMatrix, tol: &Tolerances) -> Result<Self> {
        let rho = DensityMatrix { elems };
        rho.check_physical(tol)?;
        Ok(rho)
    }

    pub fn pure(state: &FockVector) -> Result<Self> {
        density_from_pure(state)
    }

    pub fn dim(&self) -> usize {
        self.elems.dim()
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.elems
    }

    pub fn get(&self, m: usize, n: usize) -> C64 {
        self.elems[(m, n)]
    }

    pub fn trace(&self) -> f64 {
        self.elems.trace().re
    }

    pub fn hermitian_deviation(&self) -> f64 {
        self.elems.hermitian_deviation()
    }

    pub fn min_eigenvalue(&self) -> f64 {
        eigh(&self.elems).min_value()
    }

    pub fn check_physical(&self, tol: &Tolerances) -> Result<()> {
        let deviation = self.hermitian_deviation();
        if deviation > tol.hermitian {
            return Err(Error::NotHermitian { deviation });
        }
        let min_eigenvalue = self.min_eigenvalue();
        if min_eigenvalue < -tol.psd {
            return Err(Error::NotPositiveSemidefinite { min_eigenvalue });
        }
        let trace = self.trace();
        if !(trace > 0.0 && trace <= 1.0 + tol.trace) {
            return Err(Error::InvalidParameter {
                name: "trace",
                reason: "physical states need trace in (0, 1]",
            });
        }
        Ok(())
    }

    /// Divides by the trace.
    pub fn normalized(&self) -> Result<Self> {
        let tr = self.trace();
        if tr <= 0.0 {
            return Err(Error::ZeroNorm);
        }
        Ok(DensityMatrix {
            elems: self.elems.scale(C64::new(1.0 / tr, 0.0)),
        })
    }

    /// Leading block on the first `dim` levels (population above is dropped).
    pub fn truncated(&self, dim: usize) -> Self {
        DensityMatrix {
            elems: self.elems.resized(dim),
        }
    }

    /// `e^{iφn̂} ρ e^{-iφn̂}`
    pub fn phase_rotated(&self, phi: f64) -> Self {
        DensityMatrix {
            elems: CMatrix::from_fn(self.dim(), |m, n| {
                self.elems[(m, n)] * C64::from_polar(1.0, phi * (m as f64 - n as f64))
            }),
        }
    }

    /// `Σ_n n ρ_nn`
    pub fn mean_photon_number(&self) -> f64 {
        (0..self.dim()).map(|n| n as f64 * self.elems[(n, n)].re).sum()
    }
}

/// Coherent amplitude α.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CoherentParams {
    pub alpha: C64,
}

impl CoherentParams {
    pub fn real(alpha: f64) -> Self {
        CoherentParams {
            alpha: C64::new(alpha, 0.0),
        }
    }
}

/// `c_n = e^{-|α|²/2} αⁿ/√(n!)`, truncated to `dim` levels.
pub fn coherent_state(params: CoherentParams, dim: usize, tol: &Tolerances) -> Result<FockVector> {
    if dim == 0 {
        return Err(Error::InvalidParameter {
            name: "dim",
            reason: "must be at least 1",
        });
    }
    let alpha = params.alpha;
    if !alpha.re.is_finite() || !alpha.im.is_finite() {
        return Err(Error::InvalidParameter {
            name: "alpha",
            reason: "must be finite",
        });
    }
    let mut amps = Vec::with_capacity(dim);
    let mut c = C64::new((-alpha.norm_sqr() / 2.0).exp(), 0.0);
    for n in 0..dim {
        amps.push(c);
        c = c * alpha / ((n + 1) as f64).sqrt();
    }
    let state = FockVector { amps };
    let tail = 1.0 - state.norm_sqr();
    if tail > tol.tail {
        return Err(Error::TruncationTail {
            tail,
            tolerance: tol.tail,
        });
    }
    Ok(state)
}

/// `â†`: `out[n+1] = √(n+1)·in[n]`.
pub fn apply_creation(state: &FockVector, tol: &Tolerances) -> Result<FockVector> {
    let dim = state.dim();
    let population = state.amps[dim - 1].norm_sqr();
    if population > tol.overflow {
        return Err(Error::CreationOverflow {
            population,
            tolerance: tol.overflow,
        });
    }
    let mut out = FockVector::zeros(dim);
    for n in 0..dim - 1 {
        out.amps[n + 1] = state.amps[n] * ((n + 1) as f64).sqrt();
    }
    Ok(out)
}

/// `â`: `out[n-1] = √n·in[n]`.
pub fn apply_annihilation(state: &FockVector) -> FockVector {
    let dim = state.dim();
    let mut out = FockVector::zeros(dim);
    for n in 1..dim {
        out.amps[n - 1] = state.amps[n] * (n as f64).sqrt();
    }
    out
}

/// `out[n] = f(n)·in[n]`.
pub fn apply_diagonal(op: &DiagonalOperator, state: &FockVector) -> Result<FockVector> {
    if op.dim() != state.dim() {
        return Err(Error::DimensionMismatch {
            expected: state.dim(),
            found: op.dim(),
        });
    }
    Ok(FockVector {
        amps: op.values().iter().zip(&state.amps).map(|(f, a)| f * a).collect(),
    })
}

/// `<a|b> = Σ conj(a_n) b_n`.
pub fn inner_product(a: &FockVector, b: &FockVector) -> Result<C64> {
    if a.dim() != b.dim() {
        return Err(Error::DimensionMismatch {
            expected: a.dim(),
            found: b.dim(),
        });
    }
    Ok(a.amps.iter().zip(&b.amps).map(|(x, y)| x.conj() * y).sum())
}

/// `|ψ><ψ| / <ψ|ψ>`.
pub fn density_from_pure(state: &FockVector) -> Result<DensityMatrix> {
    let norm_sqr = state.norm_sqr();
    if norm_sqr == 0.0 {
        return Err(Error::ZeroNorm);
    }
    let m = CMatrix::outer(&state.amps, &state.amps).scale(C64::new(1.0 / norm_sqr, 0.0));
    Ok(DensityMatrix { elems: m })
}

/// Uhlmann fidelity `(Tr √(√ρ σ √ρ))²` between the trace-normalized arguments.
///
/// Both inputs are checked for physicality. Matrices of different sizes are
/// compared on the larger space after zero-padding.
pub fn fidelity(rho: &DensityMatrix, sigma: &DensityMatrix, tol: &Tolerances) -> Result<f64> {
    rho.check_physical(tol)?;
    sigma.check_physical(tol)?;
    let dim = rho.dim().max(sigma.dim());
    let rho = rho.normalized()?.elems.resized(dim);
    let sigma = sigma.normalized()?.elems.resized(dim);

    let sqrt_rho = psd_sqrt(&rho);
    let inner = sqrt_rho.mul(&sigma).mul(&sqrt_rho);
    let values = eigh(&inner).values;
    let floor = noise_floor(&values);
    let root_sum: f64 = values.iter().filter(|&&v| v > floor).map(|v| v.sqrt()).sum();
    Ok((root_sum * root_sum).clamp(0.0, 1.0))
}

#[cfg(test)]
mod tests {
    use super::*;

    const TOL: Tolerances = Tolerances::DEFAULT;

    #[test]
    fn vacuum_coherent_state() {
        let v = coherent_state(CoherentParams::real(0.0), 8, &TOL).unwrap();
        assert_eq!(v, FockVector::basis(0, 8));
    }

    #[test]
    fn coherent_state_rejects_small_truncation() {
        let err = coherent_state(CoherentParams::real(0.79), 4, &TOL).unwrap_err();
        assert!(matches!(err, Error::TruncationTail { .. }));
    }

    #[test]
    fn ladder_on_number_states() {
        let one = apply_creation(&FockVector::basis(0, 4), &TOL).unwrap();
        assert_eq!(one, FockVector::basis(1, 4));
        let two = apply_creation(&one, &TOL).unwrap();
        assert!((two.amp(2).re - 2f64.sqrt()).abs() < 1e-15);

        assert_eq!(apply_annihilation(&FockVector::basis(1, 4)), FockVector::basis(0, 4));
        assert_eq!(apply_annihilation(&FockVector::basis(0, 4)).norm(), 0.0);
    }

    #[test]
    fn creation_overflow_is_an_error() {
        let top = FockVector::basis(3, 4);
        assert!(matches!(
            apply_creation(&top, &TOL),
            Err(Error::CreationOverflow { .. })
        ));
    }

    #[test]
    fn diagonal_dimension_mismatch() {
        let op = DiagonalOperator::identity(3);
        assert!(matches!(
            apply_diagonal(&op, &FockVector::basis(0, 4)),
            Err(Error::DimensionMismatch { .. })
        ));
    }

    #[test]
    fn pure_density_matrices() {
        let plus = FockVector::from_real(&[1.0, 1.0]).unwrap().normalized().unwrap();
        let rho = density_from_pure(&plus).unwrap();
        for m in 0..2 {
            for n in 0..2 {
                assert!((rho.get(m, n).re - 0.5).abs() < 1e-15);
            }
        }
        let a = density_from_pure(&FockVector::basis(1, 3).scaled(C64::new(2.0, 0.0))).unwrap();
        assert_eq!(a, density_from_pure(&FockVector::basis(1, 3)).unwrap());
        assert_eq!(density_from_pure(&FockVector::zeros(3)), Err(Error::ZeroNorm));
    }

    #[test]
    fn fidelity_of_number_states() {
        let r0 = density_from_pure(&FockVector::basis(0, 3)).unwrap();
        let r1 = density_from_pure(&FockVector::basis(1, 3)).unwrap();
        assert!((fidelity(&r0, &r0, &TOL).unwrap() - 1.0).abs() < 1e-12);
        assert!(fidelity(&r0, &r1, &TOL).unwrap().abs() < 1e-12);
    }

    #[test]
    fn fidelity_rejects_negative_matrix() {
        let bad = DensityMatrix::from_matrix_unchecked(CMatrix::diagonal(&[C64::new(1.2, 0.0), C64::new(-0.2, 0.0)]));
        let good = density_from_pure(&FockVector::basis(0, 2)).unwrap();
        assert!(matches!(
            fidelity(&bad, &good, &TOL),
            Err(Error::NotPositiveSemidefinite { .. })
        ));
    }
}
