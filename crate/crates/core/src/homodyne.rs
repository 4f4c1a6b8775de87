//! Homodyne quadrature statistics and seeded sampling.
//!
//! The quadrature measured at local-oscillator phase θ is
//! `x_θ = (â e^{-iθ} + â† e^{iθ})/√2`; its eigenstates have Fock components
//! `<n|x_θ> = e^{inθ} ψ_n(x)` with the oscillator eigenfunctions
//! `ψ_n(x) = π^{-1/4} (2ⁿ n!)^{-1/2} H_n(x) e^{-x²/2}`. Hence
//!
//! ```text
//! p(x|θ) = Σ_mn ρ_mn e^{-i(m-n)θ} ψ_m(x) ψ_n(x)
//! ```
//!
//! and a coherent state |α> has mean `√2·|α|·cos(θ - arg α)`.

use alloc::vec;
use alloc::vec::Vec;
use core::f64::consts::PI;

use rand_chacha::ChaCha8Rng;
use rand_core::{RngCore, SeedableRng};

use crate::channels::{apply_loss, LossChannel};
use crate::fock::DensityMatrix;
use crate::linalg::CMatrix;
use crate::{Error, Result, Tolerances, C64};

/// Half-width of the tabulated quadrature grid.
pub const GRID_HALF_WIDTH: f64 = 6.0;
/// Spacing of the tabulated quadrature grid.
pub const GRID_STEP: f64 = 0.01;
/// Phases used when no schedule is given.
pub const DEFAULT_PHASES: usize = 12;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadratureSample {
    pub theta: f64,
    pub x: f64,
}

/// Local-oscillator phases with their sample counts, plus the RNG seed.
#[derive(Debug, Clone, PartialEq)]
pub struct PhaseSchedule {
    entries: Vec<(f64, usize)>,
    seed: u64,
}

impl PhaseSchedule {
    pub fn new(entries: Vec<(f64, usize)>, seed: u64) -> Result<Self> {
        if entries.is_empty() {
            return Err(Error::EmptyData);
        }
        for (i, &(theta, count)) in entries.iter().enumerate() {
            if !(0.0..PI).contains(&theta) {
                return Err(Error::InvalidParameter {
                    name: "theta",
                    reason: "phases must lie in [0, π)",
                });
            }
            if count == 0 {
                return Err(Error::InvalidParameter {
                    name: "count",
                    reason: "every phase needs at least one sample",
                });
            }
            if entries[..i].iter().any(|&(t, _)| t == theta) {
                return Err(Error::InvalidParameter {
                    name: "theta",
                    reason: "phases must be distinct",
                });
            }
        }
        Ok(PhaseSchedule { entries, seed })
    }

    /// `phases` equally spaced phases `kπ/phases`, each with `per_phase` samples.
    pub fn uniform(phases: usize, per_phase: usize, seed: u64) -> Result<Self> {
        if phases == 0 {
            return Err(Error::InvalidParameter {
                name: "phases",
                reason: "need at least one phase",
            });
        }
        let entries = (0..phases)
            .map(|k| (k as f64 * PI / phases as f64, per_phase))
            .collect();
        Self::new(entries, seed)
    }

    pub fn entries(&self) -> &[(f64, usize)] {
        &self.entries
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn total_samples(&self) -> usize {
        self.entries.iter().map(|e| e.1).sum()
    }
}

/// `ψ_n(x)` through the three-term recurrence.
pub fn quadrature_wavefunction(n: usize, x: f64) -> f64 {
    wavefunctions(n + 1, x)[n]
}

/// `[ψ_0(x), ..., ψ_{count-1}(x)]`.
pub fn wavefunctions(count: usize, x: f64) -> Vec<f64> {
    let mut out = vec![0.0; count];
    if count == 0 {
        return out;
    }
    out[0] = PI.powf(-0.25) * (-x * x / 2.0).exp();
    if count > 1 {
        out[1] = 2f64.sqrt() * x * out[0];
    }
    for n in 1..count.saturating_sub(1) {
        let nf = n as f64;
        out[n + 1] = (2.0 / (nf + 1.0)).sqrt() * x * out[n] - (nf / (nf + 1.0)).sqrt() * out[n - 1];
    }
    out
}

/// `p(x|θ)` for a fixed state and phase, after one physicality check.
#[derive(Debug, Clone)]
pub struct QuadratureDistribution {
    // ρ_mn e^{-i(m-n)θ}, Hermitian.
    rotated: CMatrix,
}

impl QuadratureDistribution {
    pub fn new(rho: &DensityMatrix, theta: f64, tol: &Tolerances) -> Result<Self> {
        rho.check_physical(tol)?;
        Ok(Self::new_unchecked(rho, theta))
    }

    fn new_unchecked(rho: &DensityMatrix, theta: f64) -> Self {
        let m = rho.matrix();
        let rotated = CMatrix::from_fn(m.dim(), |r, c| {
            m[(r, c)] * C64::from_polar(1.0, -theta * (r as f64 - c as f64))
        });
        QuadratureDistribution { rotated }
    }

    pub fn pdf(&self, x: f64) -> f64 {
        let d = self.rotated.dim();
        let psi = wavefunctions(d, x);
        let mut acc = 0.0;
        for m in 0..d {
            acc += self.rotated[(m, m)].re * psi[m] * psi[m];
            for n in (m + 1)..d {
                acc += 2.0 * self.rotated[(m, n)].re * psi[m] * psi[n];
            }
        }
        acc
    }
}

pub fn quadrature_pdf(rho: &DensityMatrix, theta: f64, x: f64, tol: &Tolerances) -> Result<f64> {
    Ok(QuadratureDistribution::new(rho, theta, tol)?.pdf(x))
}

/// `|x_θ><x_θ|` in the Fock basis: entries `e^{i(m-n)θ} ψ_m(x) ψ_n(x)`.
pub fn projector_matrix(theta: f64, x: f64, dim: usize) -> CMatrix {
    let psi = wavefunctions(dim, x);
    CMatrix::from_fn(dim, |m, n| {
        C64::from_polar(psi[m] * psi[n], theta * (m as f64 - n as f64))
    })
}

/// Tabulated inverse CDF on `[-6, 6]`.
struct InverseCdf {
    grid: Vec<f64>,
    cdf: Vec<f64>,
}

impl InverseCdf {
    fn build(dist: &QuadratureDistribution, expected_mass: f64, tol: &Tolerances) -> Result<Self> {
        let points = (2.0 * GRID_HALF_WIDTH / GRID_STEP).round() as usize + 1;
        let grid: Vec<f64> = (0..points).map(|i| -GRID_HALF_WIDTH + i as f64 * GRID_STEP).collect();
        let pdf: Vec<f64> = grid.iter().map(|&x| dist.pdf(x).max(0.0)).collect();
        let mut cdf = Vec::with_capacity(points);
        let mut acc = 0.0;
        cdf.push(0.0);
        for w in pdf.windows(2) {
            acc += 0.5 * (w[0] + w[1]) * GRID_STEP;
            cdf.push(acc);
        }
        let deficit = (expected_mass - acc).abs();
        if deficit > tol.grid_mass {
            return Err(Error::GridMassDeficit { deficit });
        }
        Ok(InverseCdf { grid, cdf })
    }

    fn sample(&self, u: f64) -> f64 {
        let total = *self.cdf.last().expect("grid is never empty");
        let target = u * total;
        // first index with cdf > target
        let hi = self.cdf.partition_point(|&c| c <= target).clamp(1, self.cdf.len() - 1);
        let lo = hi - 1;
        let span = self.cdf[hi] - self.cdf[lo];
        let frac = if span > 0.0 {
            (target - self.cdf[lo]) / span
        } else {
            0.5
        };
        self.grid[lo] + frac * (self.grid[hi] - self.grid[lo])
    }
}

/// Uniform deviate in `[0, 1)` with 53 random bits.
fn unit_uniform(rng: &mut ChaCha8Rng) -> f64 {
    (rng.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
}

/// Draws homodyne samples from `ρ` seen through a detector of efficiency `eta`.
///
/// Every phase block uses its own ChaCha stream (stream id = block index), so
/// blocks are independent and the output depends only on the seed and the
/// schedule order.
pub fn sample_quadratures(
    rho: &DensityMatrix,
    schedule: &PhaseSchedule,
    eta: f64,
    tol: &Tolerances,
) -> Result<Vec<QuadratureSample>> {
    rho.check_physical(tol)?;
    let detected = apply_loss(rho, LossChannel::new(eta)?);
    let mass = detected.trace();
    let mut samples = Vec::with_capacity(schedule.total_samples());
    for (block, &(theta, count)) in schedule.entries().iter().enumerate() {
        samples.extend(sample_block(
            &detected,
            theta,
            count,
            schedule.seed(),
            block as u64,
            mass,
            tol,
        )?);
    }
    Ok(samples)
}

/// One phase block of [`sample_quadratures`]; `rho` is the state after loss.
pub fn sample_block(
    rho: &DensityMatrix,
    theta: f64,
    count: usize,
    seed: u64,
    stream: u64,
    expected_mass: f64,
    tol: &Tolerances,
) -> Result<Vec<QuadratureSample>> {
    let dist = QuadratureDistribution::new_unchecked(rho, theta);
    let table = InverseCdf::build(&dist, expected_mass, tol)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    Ok((0..count)
        .map(|_| QuadratureSample {
            theta,
            x: table.sample(unit_uniform(&mut rng)),
        })
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fock::{density_from_pure, FockVector};

    const TOL: Tolerances = Tolerances::DEFAULT;

    #[test]
    fn ground_state_values() {
        assert!((quadrature_wavefunction(0, 0.0) - 0.751_125_544_464_942_5).abs() < 1e-15);
        assert_eq!(quadrature_wavefunction(1, 0.0), 0.0);
    }

    #[test]
    fn high_levels_stay_finite() {
        for &x in &[-6.0, -1.3, 0.0, 2.2, 6.0] {
            let psi = wavefunctions(33, x);
            assert!(psi.iter().all(|v| v.is_finite()));
        }
    }

    #[test]
    fn vacuum_and_single_photon_pdf() {
        let vac = density_from_pure(&FockVector::basis(0, 4)).unwrap();
        let p = quadrature_pdf(&vac, 1.1, 0.0, &TOL).unwrap();
        assert!((p - 0.564_189_583_547_756_3).abs() < 1e-15);
        let one = density_from_pure(&FockVector::basis(1, 4)).unwrap();
        assert_eq!(quadrature_pdf(&one, 0.3, 0.0, &TOL).unwrap(), 0.0);
    }

    #[test]
    fn schedule_validation() {
        assert!(PhaseSchedule::new(vec![(0.0, 10), (0.0, 5)], 1).is_err());
        assert!(PhaseSchedule::new(vec![(PI, 10)], 1).is_err());
        assert!(PhaseSchedule::new(vec![(0.2, 0)], 1).is_err());
        let s = PhaseSchedule::uniform(12, 100, 9).unwrap();
        assert_eq!(s.total_samples(), 1200);
        assert!(s.entries().iter().all(|e| e.0 < PI));
    }

    #[test]
    fn inverse_cdf_edges() {
        let vac = density_from_pure(&FockVector::basis(0, 2)).unwrap();
        let dist = QuadratureDistribution::new(&vac, 0.0, &TOL).unwrap();
        let table = InverseCdf::build(&dist, 1.0, &TOL).unwrap();
        assert!(table.sample(0.0) >= -GRID_HALF_WIDTH);
        assert!(table.sample(1.0 - 1e-16) <= GRID_HALF_WIDTH);
        assert!(table.sample(0.5).abs() < 1e-9);
    }
}
