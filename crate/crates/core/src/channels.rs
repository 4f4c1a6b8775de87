//! Beam-splitter photon loss with survival probability η.
//!
//! `L(ρ)_{mn} = Σ_k B_k(m,n) ρ_{m+k,n+k}` with
//! `B_k(m,n) = √(C(m+k,k)·C(n+k,k)) η^{(m+n)/2} (1-η)^k`.
//!
//! Loss only moves population downward, so inside a truncated space the map
//! is exactly trace preserving and nothing leaks past the top level.

use crate::fock::DensityMatrix;
use crate::linalg::{eigh, CMatrix};
use crate::{Error, Result, Tolerances, C64};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LossChannel {
    eta: f64,
}

impl LossChannel {
    pub fn new(eta: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&eta) {
            return Err(Error::InvalidParameter {
                name: "eta",
                reason: "efficiency must lie in [0, 1]",
            });
        }
        Ok(LossChannel { eta })
    }

    pub fn eta(&self) -> f64 {
        self.eta
    }

    fn coefficient(&self, m: usize, n: usize, k: usize) -> f64 {
        let binomials = binomial(m + k, k) * binomial(n + k, k);
        binomials.sqrt() * self.eta.sqrt().powi((m + n) as i32) * (1.0 - self.eta).powi(k as i32)
    }

    /// Applies the channel to any square matrix.
    pub fn apply_matrix(&self, rho: &CMatrix) -> CMatrix {
        let d = rho.dim();
        CMatrix::from_fn(d, |m, n| {
            let kmax = d - m.max(n);
            (0..kmax).map(|k| rho[(m + k, n + k)] * self.coefficient(m, n, k)).sum()
        })
    }

    /// Heisenberg-picture adjoint: `Tr[ρ·L†(E)] = Tr[L(ρ)·E]`.
    pub fn adjoint_matrix(&self, e: &CMatrix) -> CMatrix {
        let d = e.dim();
        CMatrix::from_fn(d, |a, b| {
            (0..=a.min(b))
                .map(|k| e[(a - k, b - k)] * self.coefficient(a - k, b - k, k))
                .sum::<C64>()
        })
    }
}

pub fn apply_loss(rho: &DensityMatrix, channel: LossChannel) -> DensityMatrix {
    DensityMatrix::from_matrix_unchecked(channel.apply_matrix(rho.matrix()))
}

/// Adjoint channel on a measurement operator `0 ≤ E ≤ I`.
pub fn loss_adjoint_on_operator(e: &CMatrix, channel: LossChannel, tol: &Tolerances) -> Result<CMatrix> {
    let deviation = e.hermitian_deviation();
    if deviation > tol.hermitian {
        return Err(Error::NotHermitian { deviation });
    }
    let spectrum = eigh(e);
    if spectrum.min_value() < -tol.psd {
        return Err(Error::NotPositiveSemidefinite {
            min_eigenvalue: spectrum.min_value(),
        });
    }
    if spectrum.max_value() > 1.0 + tol.psd {
        return Err(Error::OperatorAboveIdentity {
            max_eigenvalue: spectrum.max_value(),
        });
    }
    Ok(channel.adjoint_matrix(e))
}

pub(crate) fn binomial(n: usize, k: usize) -> f64 {
    if k > n {
        return 0.0;
    }
    let k = k.min(n - k);
    (0..k).fold(1.0, |acc, i| acc * (n - i) as f64 / (i + 1) as f64)
}
