//! Maximum-likelihood reconstruction from binned homodyne data.
//!
//! Samples are histogrammed per phase into half-open bins `[lo, lo + w)`.
//! Each bin gets the POVM element `E_j = L†(∫_bin |x_θ><x_θ| dx)`, where `L†`
//! is the adjoint loss channel, so the estimate is the state *before* the
//! inefficient detector. The estimate maximizes `Σ_j f_j ln Tr[ρ E_j]` through
//! the diluted iteration
//!
//! ```text
//! R(ρ) = Σ_j (f_j / p_j) E_j / N,   ρ ← (I + λR) ρ (I + λR) / Tr[...]
//! ```
//!
//! with λ halved whenever a step would lower the likelihood.

use alloc::vec;
use alloc::vec::Vec;

use crate::channels::LossChannel;
use crate::fock::DensityMatrix;
use crate::homodyne::{wavefunctions, QuadratureSample};
use crate::linalg::CMatrix;
use crate::{Error, Result, Tolerances, C64};

/// Probability floor inside the logarithm.
pub const PROBABILITY_FLOOR: f64 = 1e-300;

// Gauss-Legendre nodes and weights on [-1, 1], 8 points.
const GL_NODES: [f64; 8] = [
    -0.960_289_856_497_536_3,
    -0.796_666_477_413_626_7,
    -0.525_532_409_916_329,
    -0.183_434_642_495_649_8,
    0.183_434_642_495_649_8,
    0.525_532_409_916_329,
    0.796_666_477_413_626_7,
    0.960_289_856_497_536_3,
];
const GL_WEIGHTS: [f64; 8] = [
    0.101_228_536_290_376_3,
    0.222_381_034_453_374_5,
    0.313_706_645_877_887_3,
    0.362_683_783_378_362,
    0.362_683_783_378_362,
    0.313_706_645_877_887_3,
    0.222_381_034_453_374_5,
    0.101_228_536_290_376_3,
];

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TomographyConfig {
    pub dim: usize,
    pub eta: f64,
    pub bin_width: f64,
    /// Bins cover `[-x_range, x_range)`.
    pub x_range: f64,
    pub max_iterations: usize,
    /// Initial dilution λ ∈ (0, 1].
    pub dilution: f64,
    /// Stop once the log-likelihood gain per sample drops below this.
    pub stop_tolerance: f64,
}

impl Default for TomographyConfig {
    fn default() -> Self {
        TomographyConfig {
            dim: 8,
            eta: 0.66,
            bin_width: 0.05,
            x_range: 6.0,
            max_iterations: 2000,
            dilution: 0.5,
            stop_tolerance: 1e-9,
        }
    }
}

impl TomographyConfig {
    pub fn validate(&self) -> Result<()> {
        let bad = |name, reason| Err(Error::InvalidParameter { name, reason });
        if self.dim < 3 {
            return bad("dim", "reconstruction needs at least 3 levels");
        }
        if !(self.eta > 0.0 && self.eta <= 1.0) {
            return bad("eta", "must lie in (0, 1]");
        }
        if !(self.bin_width > 0.0 && self.x_range > 0.0) {
            return bad("bin_width", "bin width and range must be positive");
        }
        if self.max_iterations == 0 {
            return bad("max_iterations", "must be positive");
        }
        if !(self.dilution > 0.0 && self.dilution <= 1.0) {
            return bad("dilution", "must lie in (0, 1]");
        }
        if self.stop_tolerance.is_nan() || self.stop_tolerance <= 0.0 {
            return bad("stop_tolerance", "must be positive");
        }
        Ok(())
    }

    pub fn bins_per_phase(&self) -> usize {
        let n = (2.0 * self.x_range / self.bin_width).round() as usize;
        n.max(1)
    }

    fn effective_width(&self) -> f64 {
        2.0 * self.x_range / self.bins_per_phase() as f64
    }

    /// Lower edge of bin `j`.
    pub fn bin_lower_edge(&self, j: usize) -> f64 {
        -self.x_range + j as f64 * self.effective_width()
    }

    pub fn bin_center(&self, j: usize) -> f64 {
        self.bin_lower_edge(j) + 0.5 * self.effective_width()
    }

    /// Bin index of `x`, or `None` outside `[-x_range, x_range)`.
    pub fn bin_index(&self, x: f64) -> Option<usize> {
        if !(x >= -self.x_range && x < self.x_range) {
            return None;
        }
        let j = ((x + self.x_range) / self.effective_width()).floor() as usize;
        let j = j.min(self.bins_per_phase() - 1);
        // guard against the floor landing one bin low on an exact edge
        if j + 1 < self.bins_per_phase() && x >= self.bin_lower_edge(j + 1) {
            Some(j + 1)
        } else if x < self.bin_lower_edge(j) {
            Some(j - 1)
        } else {
            Some(j)
        }
    }
}

/// Histogram over phases × bins, phase-major.
#[derive(Debug, Clone, PartialEq)]
pub struct BinnedData {
    phases: Vec<f64>,
    bins_per_phase: usize,
    counts: Vec<f64>,
    total: f64,
    out_of_range: usize,
}

impl BinnedData {
    /// Builds binned data from explicit (possibly fractional) counts.
    pub fn from_counts(phases: Vec<f64>, bins_per_phase: usize, counts: Vec<f64>) -> Result<Self> {
        if counts.len() != phases.len() * bins_per_phase {
            return Err(Error::DimensionMismatch {
                expected: phases.len() * bins_per_phase,
                found: counts.len(),
            });
        }
        if counts.iter().any(|&c| !(c >= 0.0 && c.is_finite())) {
            return Err(Error::InvalidParameter {
                name: "counts",
                reason: "counts must be finite and nonnegative",
            });
        }
        let total: f64 = counts.iter().sum();
        if total <= 0.0 {
            return Err(Error::EmptyData);
        }
        Ok(BinnedData {
            phases,
            bins_per_phase,
            counts,
            total,
            out_of_range: 0,
        })
    }

    pub fn phases(&self) -> &[f64] {
        &self.phases
    }

    pub fn bins_per_phase(&self) -> usize {
        self.bins_per_phase
    }

    pub fn counts(&self) -> &[f64] {
        &self.counts
    }

    pub fn count(&self, phase: usize, bin: usize) -> f64 {
        self.counts[phase * self.bins_per_phase + bin]
    }

    pub fn total(&self) -> f64 {
        self.total
    }

    /// Samples that fell outside the binned range and were dropped.
    pub fn out_of_range(&self) -> usize {
        self.out_of_range
    }

    /// `(theta, bin center, count)` for every cell.
    pub fn cells<'a>(&'a self, config: &'a TomographyConfig) -> impl Iterator<Item = (f64, f64, f64)> + 'a {
        self.counts.iter().enumerate().map(move |(i, &c)| {
            let (p, j) = (i / self.bins_per_phase, i % self.bins_per_phase);
            (self.phases[p], config.bin_center(j), c)
        })
    }
}

pub fn bin_samples(samples: &[QuadratureSample], config: &TomographyConfig) -> Result<BinnedData> {
    config.validate()?;
    if samples.is_empty() {
        return Err(Error::EmptyData);
    }
    let mut phases: Vec<f64> = samples.iter().map(|s| s.theta).collect();
    phases.sort_by(f64::total_cmp);
    phases.dedup();

    let bins = config.bins_per_phase();
    let mut counts = vec![0.0; phases.len() * bins];
    let mut out_of_range = 0;
    for s in samples {
        let p = phases
            .binary_search_by(|t| t.total_cmp(&s.theta))
            .expect("phase list built from the samples");
        match config.bin_index(s.x) {
            Some(j) => counts[p * bins + j] += 1.0,
            None => out_of_range += 1,
        }
    }
    let total: f64 = counts.iter().sum();
    if total == 0.0 {
        return Err(Error::EmptyData);
    }
    Ok(BinnedData {
        phases,
        bins_per_phase: bins,
        counts,
        total,
        out_of_range,
    })
}

/// Efficiency-corrected bin POVM, phase-major like [`BinnedData`].
#[derive(Debug, Clone)]
pub struct Povm {
    phases: Vec<f64>,
    bins_per_phase: usize,
    elements: Vec<CMatrix>,
    completeness_residual: f64,
}

impl Povm {
    pub fn phases(&self) -> &[f64] {
        &self.phases
    }

    pub fn elements(&self) -> &[CMatrix] {
        &self.elements
    }

    pub fn element(&self, phase: usize, bin: usize) -> &CMatrix {
        &self.elements[phase * self.bins_per_phase + bin]
    }

    pub fn bins_per_phase(&self) -> usize {
        self.bins_per_phase
    }

    /// Largest entrywise deviation of a per-phase sum from the identity.
    pub fn completeness_residual(&self) -> f64 {
        self.completeness_residual
    }
}

/// `∫ ψ_m ψ_n dx` over `[lo, hi)`.
fn bin_overlap(dim: usize, lo: f64, hi: f64) -> Vec<f64> {
    // split wide bins so the 8-point rule stays exact to round-off
    let pieces = ((hi - lo) / 0.1).ceil().max(1.0) as usize;
    let h = (hi - lo) / pieces as f64;
    let mut g = vec![0.0; dim * dim];
    for piece in 0..pieces {
        let a = lo + piece as f64 * h;
        let mid = a + 0.5 * h;
        for (node, weight) in GL_NODES.iter().zip(GL_WEIGHTS) {
            let x = mid + 0.5 * h * node;
            let psi = wavefunctions(dim, x);
            let w = 0.5 * h * weight;
            for m in 0..dim {
                for n in 0..dim {
                    g[m * dim + n] += w * psi[m] * psi[n];
                }
            }
        }
    }
    g
}

pub fn build_povm(config: &TomographyConfig, phases: &[f64], tol: &Tolerances) -> Result<Povm> {
    config.validate()?;
    if phases.is_empty() {
        return Err(Error::EmptyData);
    }
    let dim = config.dim;
    let bins = config.bins_per_phase();
    let channel = LossChannel::new(config.eta)?;
    let overlaps: Vec<Vec<f64>> = (0..bins)
        .map(|j| bin_overlap(dim, config.bin_lower_edge(j), config.bin_lower_edge(j + 1)))
        .collect();

    let mut elements = Vec::with_capacity(phases.len() * bins);
    let mut residual = 0.0_f64;
    for &theta in phases {
        let mut sum = CMatrix::zeros(dim);
        for g in &overlaps {
            let e = CMatrix::from_fn(dim, |m, n| {
                C64::from_polar(g[m * dim + n], theta * (m as f64 - n as f64))
            });
            let e = channel.adjoint_matrix(&e);
            sum = sum.add(&e);
            elements.push(e);
        }
        residual = residual.max(sum.max_abs_diff(&CMatrix::identity(dim)));
    }
    if residual > tol.completeness {
        return Err(Error::IncompletePovm { residual });
    }
    Ok(Povm {
        phases: phases.to_vec(),
        bins_per_phase: bins,
        elements,
        completeness_residual: residual,
    })
}

/// Log-likelihood with the number of cells that hit the probability floor.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LogLikelihood {
    pub value: f64,
    pub floored: usize,
}

fn check_alignment(data: &BinnedData, povm: &Povm) -> Result<()> {
    if data.bins_per_phase != povm.bins_per_phase {
        return Err(Error::DimensionMismatch {
            expected: povm.bins_per_phase,
            found: data.bins_per_phase,
        });
    }
    if data.phases.len() != povm.phases.len() {
        return Err(Error::DimensionMismatch {
            expected: povm.phases.len(),
            found: data.phases.len(),
        });
    }
    for (a, b) in data.phases.iter().zip(&povm.phases) {
        if a != b {
            return Err(Error::PhaseMismatch { theta: *a });
        }
    }
    Ok(())
}

/// `Σ_j f_j ln Tr[ρ E_j]` over occupied cells.
pub fn loglikelihood(rho: &DensityMatrix, data: &BinnedData, povm: &Povm) -> Result<LogLikelihood> {
    check_alignment(data, povm)?;
    if rho.dim() != povm.elements[0].dim() {
        return Err(Error::DimensionMismatch {
            expected: povm.elements[0].dim(),
            found: rho.dim(),
        });
    }
    Ok(loglikelihood_of(rho.matrix(), data, povm))
}

fn loglikelihood_of(rho: &CMatrix, data: &BinnedData, povm: &Povm) -> LogLikelihood {
    let mut value = 0.0;
    let mut floored = 0;
    for (f, e) in data.counts.iter().zip(&povm.elements) {
        if *f == 0.0 {
            continue;
        }
        let p = rho.trace_product(e).re;
        let p = if p < PROBABILITY_FLOOR {
            floored += 1;
            PROBABILITY_FLOOR
        } else {
            p
        };
        value += f * p.ln();
    }
    LogLikelihood { value, floored }
}

/// `R(ρ) = Σ_j (f_j / (N·p_j)) E_j`; equals the identity at a stationary point.
pub fn r_operator(rho: &DensityMatrix, data: &BinnedData, povm: &Povm) -> Result<CMatrix> {
    check_alignment(data, povm)?;
    Ok(r_operator_of(rho.matrix(), data, povm))
}

fn r_operator_of(rho: &CMatrix, data: &BinnedData, povm: &Povm) -> CMatrix {
    let mut r = CMatrix::zeros(rho.dim());
    for (f, e) in data.counts.iter().zip(&povm.elements) {
        if *f == 0.0 {
            continue;
        }
        let p = rho.trace_product(e).re.max(PROBABILITY_FLOOR);
        r.add_scaled(e, f / (data.total * p));
    }
    r.hermitian_part()
}

/// `(I + λR) ρ (I + λR) / Tr[...]`.
pub fn diluted_step(rho: &CMatrix, r: &CMatrix, lambda: f64) -> CMatrix {
    let dim = rho.dim();
    let m = CMatrix::identity(dim).add(&r.scale(C64::new(lambda, 0.0)));
    let next = m.mul(rho).mul(&m).hermitian_part();
    let tr = next.trace().re;
    next.scale(C64::new(1.0 / tr, 0.0))
}

#[derive(Debug, Clone, PartialEq)]
pub struct Diagnostics {
    pub iterations: usize,
    pub log_likelihood: f64,
    /// Log-likelihood after each accepted step, starting from the initial state.
    pub history: Vec<f64>,
    pub converged: bool,
    pub completeness_residual: f64,
    /// Fewer than two distinct phases: off-diagonal elements are unreliable.
    pub phase_insensitive: bool,
    /// Occupied cells whose probability hit the floor at the final iterate.
    pub floored_cells: usize,
    /// Steps where the dilution had to be reduced.
    pub backtracks: usize,
    /// Population of the highest retained Fock level.
    pub top_level_population: f64,
    pub out_of_range_samples: usize,
}

/// Diluted RρR starting from the maximally mixed state.
pub fn reconstruct(
    data: &BinnedData,
    config: &TomographyConfig,
    tol: &Tolerances,
) -> Result<(DensityMatrix, Diagnostics)> {
    let povm = build_povm(config, data.phases(), tol)?;
    let start = CMatrix::identity(config.dim).scale(C64::new(1.0 / config.dim as f64, 0.0));
    reconstruct_from(data, config, &povm, start)
}

/// Diluted RρR from a given starting matrix and prebuilt POVM.
pub fn reconstruct_from(
    data: &BinnedData,
    config: &TomographyConfig,
    povm: &Povm,
    start: CMatrix,
) -> Result<(DensityMatrix, Diagnostics)> {
    config.validate()?;
    check_alignment(data, povm)?;
    if data.total <= 0.0 {
        return Err(Error::EmptyData);
    }
    let mut rho = start;
    let mut ll = loglikelihood_of(&rho, data, povm).value;
    let mut history = vec![ll];
    let mut lambda = config.dilution;
    let mut converged = false;
    let mut backtracks = 0;
    let mut iterations = 0;

    while iterations < config.max_iterations {
        iterations += 1;
        let r = r_operator_of(&rho, data, povm);
        let mut step = lambda;
        let accepted = loop {
            let candidate = diluted_step(&rho, &r, step);
            let cand_ll = loglikelihood_of(&candidate, data, povm).value;
            if cand_ll >= ll {
                break Some((candidate, cand_ll));
            }
            backtracks += 1;
            step *= 0.5;
            if step < 1e-12 {
                break None;
            }
        };
        let Some((next, next_ll)) = accepted else {
            converged = true;
            break;
        };
        let gain = next_ll - ll;
        rho = next;
        ll = next_ll;
        history.push(ll);
        // let the step size recover after a backtrack
        lambda = (step * 2.0).min(config.dilution);
        if gain < config.stop_tolerance * data.total {
            converged = true;
            break;
        }
    }

    let final_ll = loglikelihood_of(&rho, data, povm);
    let dim = rho.dim();
    let diagnostics = Diagnostics {
        iterations,
        log_likelihood: final_ll.value,
        history,
        converged,
        completeness_residual: povm.completeness_residual,
        phase_insensitive: data.phases.len() < 2,
        floored_cells: final_ll.floored,
        backtracks,
        top_level_population: rho[(dim - 1, dim - 1)].re,
        out_of_range_samples: data.out_of_range,
    };
    Ok((DensityMatrix::from_matrix_unchecked(rho), diagnostics))
}
