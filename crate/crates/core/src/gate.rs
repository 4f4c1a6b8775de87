//! Fock-diagonal gates built from photon addition and subtraction.
//!
//! The heralded superposition `A·â↠+ B·â†â` acts as the diagonal operator
//! `V(n) = A·(n+1) + B·n`. Choosing `B/A = -3-√2` makes `V` reproduce the
//! vacuum sign flip on span{|0>,|1>,|2>} together with a noiseless gain
//! `g = 1+√2`:
//!
//! ```text
//! c0|0> + c1|1> + c2|2>  ->  -c0|0> + g·c1|1> + g²·c2|2>     (up to a global -1)
//! ```
//!
//! Attenuating with `t = 1/g` afterwards recovers the plain sign flip.

use alloc::vec::Vec;
use core::f64::consts::{PI, SQRT_2};

use num_traits::Zero;

use crate::fock::{apply_diagonal, FockVector};
use crate::{Error, Result, Tolerances, C64};

/// Operator `f(n̂)` stored as one complex value per Fock level.
#[derive(Debug, Clone, PartialEq)]
pub struct DiagonalOperator {
    values: Vec<C64>,
}

impl DiagonalOperator {
    pub fn new(values: Vec<C64>) -> Result<Self> {
        if values.is_empty() {
            return Err(Error::InvalidParameter {
                name: "dim",
                reason: "must be at least 1",
            });
        }
        if values.iter().any(|v| !v.re.is_finite() || !v.im.is_finite()) {
            return Err(Error::InvalidParameter {
                name: "values",
                reason: "diagonal entries must be finite",
            });
        }
        Ok(DiagonalOperator { values })
    }

    pub fn from_fn(dim: usize, f: impl Fn(usize) -> C64) -> Result<Self> {
        Self::new((0..dim).map(f).collect())
    }

    pub fn identity(dim: usize) -> Self {
        DiagonalOperator {
            values: (0..dim).map(|_| C64::new(1.0, 0.0)).collect(),
        }
    }

    pub fn dim(&self) -> usize {
        self.values.len()
    }

    pub fn values(&self) -> &[C64] {
        &self.values
    }

    /// `self ∘ other` (diagonal operators commute, so order is immaterial).
    pub fn compose(&self, other: &DiagonalOperator) -> Result<DiagonalOperator> {
        if self.dim() != other.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.dim(),
                found: other.dim(),
            });
        }
        Ok(DiagonalOperator {
            values: self.values.iter().zip(&other.values).map(|(a, b)| a * b).collect(),
        })
    }

    pub fn apply(&self, state: &FockVector) -> Result<FockVector> {
        apply_diagonal(self, state)
    }
}

/// Weights of the two operator orderings: `A·â↠+ B·â†â`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SuperpositionParams {
    pub a: C64,
    pub b: C64,
}

/// Magnitude of the fitted `B/A`.
pub const BEST_FIT_RATIO_MAGNITUDE: f64 = 5.97;
/// Extra relative phase of the fitted superposition.
pub const BEST_FIT_EXTRA_PHASE: f64 = -PI / 7.0;

impl SuperpositionParams {
    pub fn new(a: C64, b: C64) -> Result<Self> {
        if a.is_zero() && b.is_zero() {
            return Err(Error::InvalidParameter {
                name: "A, B",
                reason: "at least one weight must be nonzero",
            });
        }
        Ok(SuperpositionParams { a, b })
    }

    /// `A = 1`, `B = B/A` from [`solve_superposition`].
    pub fn ideal() -> Self {
        SuperpositionParams {
            a: C64::new(1.0, 0.0),
            b: C64::new(solve_superposition().ratio, 0.0),
        }
    }

    /// `A = 1`, `B = 5.97·e^{i(π - π/7)}`.
    pub fn best_fit() -> Self {
        SuperpositionParams {
            a: C64::new(1.0, 0.0),
            b: C64::from_polar(BEST_FIT_RATIO_MAGNITUDE, PI + BEST_FIT_EXTRA_PHASE),
        }
    }

    pub fn ratio(&self) -> C64 {
        self.b / self.a
    }

    /// `V(n) = A(n+1) + Bn`.
    pub fn value(&self, n: usize) -> C64 {
        self.a * (n as f64 + 1.0) + self.b * n as f64
    }
}

/// Accepted root of the gain equations.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GainSolution {
    /// `B/A`
    pub ratio: f64,
    /// `g = -(2 + B/A)`
    pub gain: f64,
}

impl GainSolution {
    /// `(V(1)/V(0) + g, V(2)/V(1) - g)` for `A = 1`.
    pub fn residuals(&self) -> (f64, f64) {
        let v = |n: f64| (n + 1.0) + self.ratio * n;
        (v(1.0) / v(0.0) + self.gain, v(2.0) / v(1.0) - self.gain)
    }
}

/// Both roots of `r² + 6r + 7 = 0`, paired with `g = -(2 + r)`; the gain
/// branch (`g > 1`) comes first.
pub fn superposition_roots() -> [GainSolution; 2] {
    // V(1)/V(0) = -g and V(2)/V(1) = g with A = 1 give 3 + 2r = -(2 + r)².
    let accepted = -3.0 - SQRT_2;
    let rejected = -3.0 + SQRT_2;
    [accepted, rejected].map(|ratio| GainSolution {
        ratio,
        gain: -(2.0 + ratio),
    })
}

/// The solution `B/A = -3-√2`, `g = 1+√2`.
pub fn solve_superposition() -> GainSolution {
    superposition_roots()[0]
}

pub fn build_superposition_operator(params: SuperpositionParams, dim: usize) -> Result<DiagonalOperator> {
    if dim < 3 {
        return Err(Error::InvalidParameter {
            name: "dim",
            reason: "the superposition needs at least levels 0..2",
        });
    }
    DiagonalOperator::from_fn(dim, |n| params.value(n))
}

/// `e^{iΦ n(n-1)}`
pub fn ideal_kerr(phi: f64, dim: usize) -> DiagonalOperator {
    DiagonalOperator {
        values: (0..dim)
            .map(|n| {
                let k = (n * n.saturating_sub(1)) as f64;
                C64::from_polar(1.0, phi * k)
            })
            .collect(),
    }
}

/// `e^{iφn}`
pub fn linear_phase(phi: f64, dim: usize) -> DiagonalOperator {
    DiagonalOperator {
        values: (0..dim).map(|n| C64::from_polar(1.0, phi * n as f64)).collect(),
    }
}

/// `gⁿ` for `g ≥ 1`.
pub fn noiseless_amplify(gain: f64, dim: usize) -> Result<DiagonalOperator> {
    if !(gain >= 1.0 && gain.is_finite()) {
        return Err(Error::InvalidParameter {
            name: "gain",
            reason: "must be finite and at least 1",
        });
    }
    Ok(power_ladder(gain, dim))
}

/// `tⁿ` for `t ∈ (0, 1]`.
pub fn noiseless_attenuate(transmittance: f64, dim: usize) -> Result<DiagonalOperator> {
    if !(transmittance > 0.0 && transmittance <= 1.0) {
        return Err(Error::InvalidParameter {
            name: "transmittance",
            reason: "must lie in (0, 1]",
        });
    }
    Ok(power_ladder(transmittance, dim))
}

fn power_ladder(base: f64, dim: usize) -> DiagonalOperator {
    DiagonalOperator {
        values: (0..dim).map(|n| C64::new(base.powi(n as i32), 0.0)).collect(),
    }
}

/// Unnormalized heralded output together with its relative weight.
#[derive(Debug, Clone, PartialEq)]
pub struct ConditionalOutput {
    pub state: FockVector,
    /// `‖op·ψ‖² / ‖ψ‖²`. Relative: absolute heralding rates also depend on
    /// source and tap parameters that are not modelled here.
    pub weight: f64,
    /// Set when `weight` is below the vanishing threshold.
    pub vanishing: bool,
}

pub fn apply_conditional(op: &DiagonalOperator, state: &FockVector, tol: &Tolerances) -> Result<ConditionalOutput> {
    let input = state.norm_sqr();
    if input == 0.0 {
        return Err(Error::ZeroNorm);
    }
    let out = apply_diagonal(op, state)?;
    let weight = out.norm_sqr() / input;
    Ok(ConditionalOutput {
        state: out,
        weight,
        vanishing: weight < tol.vanishing_weight,
    })
}

/// Vacuum sign flip: `(c0, c1, c2, ...) -> (-c0, c1, c2, ...)`.
pub fn nonlinear_sign_target(state: &FockVector) -> Result<FockVector> {
    if state.dim() < 3 {
        return Err(Error::InvalidParameter {
            name: "dim",
            reason: "needs at least levels 0..2",
        });
    }
    let mut amps = state.amps().to_vec();
    amps[0] = -amps[0];
    FockVector::new(amps)
}

/// Amplified sign flip `(-c0, g·c1, g²·c2, 0, ...)`. Support above |2> must be
/// negligible; it is reported as an error rather than projected away.
pub fn gkerr_target(state: &FockVector, gain: f64, tol: &Tolerances) -> Result<FockVector> {
    if state.dim() < 3 {
        return Err(Error::InvalidParameter {
            name: "dim",
            reason: "needs at least levels 0..2",
        });
    }
    if let Some((level, a)) = state
        .amps()
        .iter()
        .enumerate()
        .skip(3)
        .find(|(_, a)| a.norm() > tol.subspace)
    {
        return Err(Error::SubspaceViolation {
            level,
            amplitude: a.norm(),
        });
    }
    let c = state.amps();
    let mut amps = alloc::vec![C64::zero(); state.dim()];
    amps[0] = -c[0];
    amps[1] = c[1] * gain;
    amps[2] = c[2] * gain * gain;
    FockVector::new(amps)
}
