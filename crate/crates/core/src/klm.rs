//! Linear-optics simulation of the heralded nonlinear sign gate.
//!
//! Mode 0 is the signal, mode 1 carries the ancilla photon and mode 2 the
//! vacuum ancilla. The interferometer is
//!
//! ```text
//! BS(1,2; t1) → BS(0,1; t2) → BS(1,2; t3)
//! ```
//!
//! and success is heralded by exactly one photon in mode 1 and none in mode 2.
//! On signal levels {0,1,2} the heralded map is `λ0·diag(1, -1, -1)`, which is
//! the vacuum sign flip up to a global sign, and `diag(1, 1, -1)` after a
//! linear π phase shift `e^{iπn̂}`.
//!
//! Beam-splitter convention for modes (i, j) with `r = √(1-t²)`:
//!
//! ```text
//! a_i† → t·a_i† + r·e^{iφ}·a_j†
//! a_j† → -r·e^{-iφ}·a_i† + t·a_j†
//! ```

use alloc::collections::BTreeMap;
use alloc::sync::Arc;
use alloc::vec;
use alloc::vec::Vec;
use core::f64::consts::{FRAC_PI_2, PI};

use num_traits::Zero;

use crate::channels::binomial;
use crate::fock::{density_from_pure, fidelity, DensityMatrix, FockVector};
use crate::gate::nonlinear_sign_target;
use crate::linalg::CMatrix;
use crate::{Error, Result, Tolerances, C64};

/// Occupation tuples with total photon number at most `cutoff`.
#[derive(Debug, PartialEq, Eq)]
struct Simplex {
    modes: usize,
    cutoff: usize,
    occupations: Vec<Vec<u8>>,
    index: BTreeMap<Vec<u8>, usize>,
}

impl Simplex {
    fn new(modes: usize, cutoff: usize) -> Self {
        let mut occupations = Vec::new();
        let mut current = vec![0u8; modes];
        enumerate(&mut current, 0, cutoff, &mut occupations);
        let index = occupations.iter().enumerate().map(|(i, o)| (o.clone(), i)).collect();
        Simplex {
            modes,
            cutoff,
            occupations,
            index,
        }
    }
}

fn enumerate(current: &mut Vec<u8>, mode: usize, remaining: usize, out: &mut Vec<Vec<u8>>) {
    if mode == current.len() {
        out.push(current.clone());
        return;
    }
    for n in 0..=remaining {
        current[mode] = n as u8;
        enumerate(current, mode + 1, remaining - n, out);
    }
    current[mode] = 0;
}

/// Amplitudes over multimode occupations with a total-photon cutoff.
#[derive(Debug, Clone, PartialEq)]
pub struct MultimodeState {
    basis: Arc<Simplex>,
    amps: Vec<C64>,
}

impl MultimodeState {
    pub fn vacuum(modes: usize, cutoff: usize) -> Self {
        let mut s = Self::zeros(modes, cutoff);
        s.amps[0] = C64::new(1.0, 0.0);
        s
    }

    pub fn zeros(modes: usize, cutoff: usize) -> Self {
        assert!(modes > 0, "need at least one mode");
        let basis = Arc::new(Simplex::new(modes, cutoff));
        let amps = vec![C64::zero(); basis.occupations.len()];
        MultimodeState { basis, amps }
    }

    /// Tensor product of single-mode states. Components above the cutoff must vanish.
    pub fn product(factors: &[FockVector], cutoff: usize) -> Result<Self> {
        let mut out = Self::zeros(factors.len(), cutoff);
        let mut occ = vec![0usize; factors.len()];
        loop {
            let amp = factors
                .iter()
                .zip(&occ)
                .fold(C64::new(1.0, 0.0), |acc, (f, &n)| acc * f.amp(n));
            if !amp.is_zero() {
                let key: Vec<u8> = occ.iter().map(|&n| n as u8).collect();
                match out.basis.index.get(&key) {
                    Some(&i) => out.amps[i] = amp,
                    None => return Err(Error::CutoffExceeded { cutoff }),
                }
            }
            // odometer over the factor dimensions
            let mut k = 0;
            loop {
                if k == factors.len() {
                    return Ok(out);
                }
                occ[k] += 1;
                if occ[k] < factors[k].dim() {
                    break;
                }
                occ[k] = 0;
                k += 1;
            }
        }
    }

    pub fn modes(&self) -> usize {
        self.basis.modes
    }

    pub fn cutoff(&self) -> usize {
        self.basis.cutoff
    }

    pub fn occupations(&self) -> impl Iterator<Item = (&[u8], C64)> {
        self.basis
            .occupations
            .iter()
            .map(|o| o.as_slice())
            .zip(self.amps.iter().copied())
    }

    pub fn amplitude(&self, occupation: &[u8]) -> C64 {
        self.basis.index.get(occupation).map_or(C64::zero(), |&i| self.amps[i])
    }

    pub fn set_amplitude(&mut self, occupation: &[u8], amp: C64) -> Result<()> {
        match self.basis.index.get(occupation) {
            Some(&i) => {
                self.amps[i] = amp;
                Ok(())
            }
            None => Err(Error::CutoffExceeded { cutoff: self.cutoff() }),
        }
    }

    pub fn norm_sqr(&self) -> f64 {
        self.amps.iter().map(|a| a.norm_sqr()).sum()
    }

    /// Single-mode view (`cutoff + 1` levels) of a one-mode state.
    pub fn to_fock(&self) -> Result<FockVector> {
        if self.modes() != 1 {
            return Err(Error::InvalidParameter {
                name: "modes",
                reason: "only one-mode states convert to a Fock vector",
            });
        }
        let mut amps = vec![C64::zero(); self.cutoff() + 1];
        for (occ, a) in self.occupations() {
            amps[occ[0] as usize] = a;
        }
        FockVector::new(amps)
    }
}

/// Two-mode mixer acting on `(mode_i, mode_j)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BeamSplitterSpec {
    pub mode_i: usize,
    pub mode_j: usize,
    /// Amplitude transmittance in `[0, 1]`.
    pub t: f64,
    pub phi: f64,
}

impl BeamSplitterSpec {
    pub fn new(mode_i: usize, mode_j: usize, t: f64, phi: f64) -> Result<Self> {
        if mode_i == mode_j {
            return Err(Error::InvalidParameter {
                name: "modes",
                reason: "a beam splitter needs two distinct modes",
            });
        }
        if !(0.0..=1.0).contains(&t) {
            return Err(Error::InvalidParameter {
                name: "t",
                reason: "transmittance must lie in [0, 1]",
            });
        }
        Ok(BeamSplitterSpec { mode_i, mode_j, t, phi })
    }

    /// Real mixer with `t = |cos θ|` and the sign of `sin θ` carried by `φ ∈ {0, π}`.
    pub fn from_angle(mode_i: usize, mode_j: usize, theta: f64) -> Result<Self> {
        let phi = if theta.sin() < 0.0 { PI } else { 0.0 };
        Self::new(mode_i, mode_j, theta.cos().abs().min(1.0), phi)
    }

    pub fn reflectance(&self) -> f64 {
        (1.0 - self.t * self.t).max(0.0).sqrt()
    }

    /// The splitter that undoes this one.
    pub fn inverse(&self) -> Self {
        BeamSplitterSpec {
            phi: self.phi + PI,
            ..*self
        }
    }

    /// 2×2 map of creation operators: column k gives the image of the k-th input.
    fn coefficients(&self) -> [[C64; 2]; 2] {
        let t = C64::new(self.t, 0.0);
        let r = self.reflectance();
        let u = C64::from_polar(r, self.phi);
        let v = -C64::from_polar(r, -self.phi);
        // a_i† → t a_i† + u a_j†,  a_j† → v a_i† + t a_j†
        [[t, v], [u, t]]
    }

    /// Mode-space unitary on `modes` modes (creation-operator images in columns).
    pub fn mode_matrix(&self, modes: usize) -> CMatrix {
        let mut m = CMatrix::identity(modes);
        let c = self.coefficients();
        let (i, j) = (self.mode_i, self.mode_j);
        m[(i, i)] = c[0][0];
        m[(i, j)] = c[0][1];
        m[(j, i)] = c[1][0];
        m[(j, j)] = c[1][1];
        m
    }
}

fn factorial(n: usize) -> f64 {
    (1..=n).fold(1.0, |acc, k| acc * k as f64)
}

pub fn apply_beam_splitter(state: &MultimodeState, spec: &BeamSplitterSpec) -> Result<MultimodeState> {
    let modes = state.modes();
    for m in [spec.mode_i, spec.mode_j] {
        if m >= modes {
            return Err(Error::InvalidMode { mode: m, modes });
        }
    }
    let c = spec.coefficients();
    let (t, u, v) = (c[0][0], c[1][0], c[0][1]);
    let (i, j) = (spec.mode_i, spec.mode_j);

    let mut out = MultimodeState {
        basis: state.basis.clone(),
        amps: vec![C64::zero(); state.amps.len()],
    };
    for (occ, amp) in state.basis.occupations.iter().zip(&state.amps) {
        if amp.is_zero() {
            continue;
        }
        let (p, q) = (occ[i] as usize, occ[j] as usize);
        let norm_in = (factorial(p) * factorial(q)).sqrt();
        let mut target = occ.clone();
        // (t x + u y)^p (v x + t y)^q with x = a_i†, y = a_j†
        for a in 0..=p {
            let ca = binomial(p, a) * t.powu(a as u32) * u.powu((p - a) as u32);
            for b in 0..=q {
                let cb = binomial(q, b) * v.powu(b as u32) * t.powu((q - b) as u32);
                let nx = a + b;
                let ny = p + q - nx;
                let coef = ca * cb * (factorial(nx) * factorial(ny)).sqrt() / norm_in;
                target[i] = nx as u8;
                target[j] = ny as u8;
                let k = state.basis.index[&target];
                out.amps[k] += amp * coef;
            }
        }
    }
    Ok(out)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DetectorKind {
    PhotonNumberResolving,
    OnOff,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DetectorModel {
    pub kind: DetectorKind,
    pub efficiency: f64,
}

impl DetectorModel {
    pub fn new(kind: DetectorKind, efficiency: f64) -> Result<Self> {
        if !(efficiency > 0.0 && efficiency <= 1.0) {
            return Err(Error::InvalidParameter {
                name: "efficiency",
                reason: "must lie in (0, 1]",
            });
        }
        Ok(DetectorModel { kind, efficiency })
    }

    pub fn ideal_pnr() -> Self {
        DetectorModel {
            kind: DetectorKind::PhotonNumberResolving,
            efficiency: 1.0,
        }
    }

    /// Probability of reporting `outcome` when `photons` arrive. For on-off
    /// detectors outcome 0 is "no click" and any positive outcome is "click".
    pub fn outcome_probability(&self, outcome: usize, photons: usize) -> f64 {
        let eta = self.efficiency;
        match self.kind {
            DetectorKind::PhotonNumberResolving => {
                if outcome > photons {
                    0.0
                } else {
                    binomial(photons, outcome) * eta.powi(outcome as i32) * (1.0 - eta).powi((photons - outcome) as i32)
                }
            }
            DetectorKind::OnOff => {
                let dark = (1.0 - eta).powi(photons as i32);
                if outcome == 0 {
                    dark
                } else {
                    1.0 - dark
                }
            }
        }
    }
}

/// Weighted pure branches; the mixed state is `Σ_b |b><b|`.
#[derive(Debug, Clone, PartialEq)]
pub struct Ensemble {
    pub branches: Vec<MultimodeState>,
}

impl Ensemble {
    pub fn pure(state: MultimodeState) -> Self {
        Ensemble { branches: vec![state] }
    }

    pub fn weight(&self) -> f64 {
        self.branches.iter().map(MultimodeState::norm_sqr).sum()
    }

    /// Unnormalized density matrix of a one-mode ensemble on `dim` levels.
    pub fn to_density(&self, dim: usize) -> Result<DensityMatrix> {
        let mut m = CMatrix::zeros(dim);
        for b in &self.branches {
            let v = b.to_fock()?.resized(dim);
            m = m.add(&CMatrix::outer(v.amps(), v.amps()));
        }
        Ok(DensityMatrix::from_matrix_unchecked(m))
    }
}

/// Measures `mode` and keeps the branches compatible with `outcome`.
///
/// Returns the post-measurement ensemble on the remaining modes and the
/// outcome probability relative to the input norm.
pub fn herald_project(
    state: &MultimodeState,
    mode: usize,
    outcome: usize,
    detector: &DetectorModel,
) -> Result<(Ensemble, f64)> {
    let ensemble = herald_branches(core::slice::from_ref(state), mode, outcome, detector)?;
    let norm = state.norm_sqr();
    if norm == 0.0 {
        return Err(Error::ZeroNorm);
    }
    let p = ensemble.weight() / norm;
    Ok((ensemble, p))
}

/// Applies a herald to every branch of an ensemble.
pub fn herald_ensemble(ensemble: &Ensemble, mode: usize, outcome: usize, detector: &DetectorModel) -> Result<Ensemble> {
    herald_branches(&ensemble.branches, mode, outcome, detector)
}

fn herald_branches(
    states: &[MultimodeState],
    mode: usize,
    outcome: usize,
    detector: &DetectorModel,
) -> Result<Ensemble> {
    let mut branches = Vec::new();
    for state in states {
        let modes = state.modes();
        if mode >= modes {
            return Err(Error::InvalidMode { mode, modes });
        }
        if modes == 1 {
            return Err(Error::InvalidParameter {
                name: "mode",
                reason: "cannot herald the last remaining mode",
            });
        }
        for photons in 0..=state.cutoff() {
            let w = detector.outcome_probability(outcome, photons);
            if w == 0.0 {
                continue;
            }
            let mut branch = MultimodeState::zeros(modes - 1, state.cutoff() - photons);
            let mut any = false;
            let mut key = Vec::with_capacity(modes - 1);
            for (occ, a) in state.occupations() {
                if occ[mode] as usize != photons || a.is_zero() {
                    continue;
                }
                key.clear();
                key.extend(occ.iter().enumerate().filter(|&(k, _)| k != mode).map(|(_, &n)| n));
                let k = branch.basis.index[&key];
                branch.amps[k] = a * w.sqrt();
                any = true;
            }
            if any {
                branches.push(branch);
            }
        }
    }
    Ok(Ensemble { branches })
}

/// Signal map `diag(λ0, λ1, λ2)` heralded by one photon in mode 1 and none in
/// mode 2 with ideal detectors, computed from permanents of the 3×3 mode
/// unitary.
pub fn heralded_map(splitters: &[BeamSplitterSpec]) -> [C64; 3] {
    let mut u = CMatrix::identity(3);
    for bs in splitters {
        u = bs.mode_matrix(3).mul(&u);
    }
    let mut lambdas = [C64::zero(); 3];
    for (n, lambda) in lambdas.iter_mut().enumerate() {
        // photons: n in mode 0 and one in mode 1, both before and after
        let mut idx = vec![0usize; n];
        idx.push(1);
        let sub = CMatrix::from_fn(n + 1, |r, c| u[(idx[r], idx[c])]);
        *lambda = permanent(&sub) / factorial(n);
    }
    lambdas
}

fn permanent(m: &CMatrix) -> C64 {
    let n = m.dim();
    let mut perm: Vec<usize> = (0..n).collect();
    let mut total = C64::zero();
    permute(&mut perm, 0, &mut |p| {
        total += p
            .iter()
            .enumerate()
            .fold(C64::new(1.0, 0.0), |acc, (r, &c)| acc * m[(r, c)]);
    });
    total
}

fn permute(p: &mut Vec<usize>, k: usize, f: &mut impl FnMut(&[usize])) {
    if k == p.len() {
        f(p);
        return;
    }
    for i in k..p.len() {
        p.swap(k, i);
        permute(p, k + 1, f);
        p.swap(k, i);
    }
}

/// Solved interferometer of the nonlinear sign gate.
#[derive(Debug, Clone, PartialEq)]
pub struct NsSolution {
    pub splitters: [BeamSplitterSpec; 3],
    /// Heralded signal map on levels 0..2 as realized by the interferometer.
    pub lambdas: [C64; 3],
    /// `|λ0|²`: heralding probability for any normalized input in span{0,1,2}.
    pub success_probability: f64,
    /// Largest residual of the two ratio conditions.
    pub residual: f64,
}

impl NsSolution {
    pub fn transmittances(&self) -> [f64; 3] {
        self.splitters.map(|s| s.t)
    }

    /// `λ_n·(-1)ⁿ`: the map after a linear π phase shift, `∝ diag(1, 1, -1)`.
    pub fn kerr_form(&self) -> [C64; 3] {
        [self.lambdas[0], -self.lambdas[1], self.lambdas[2]]
    }
}

fn splitters_from_angles(angles: [f64; 3]) -> [BeamSplitterSpec; 3] {
    let pairs = [(1, 2), (0, 1), (1, 2)];
    core::array::from_fn(|k| BeamSplitterSpec::from_angle(pairs[k].0, pairs[k].1, angles[k]).expect("valid angle"))
}

/// `(λ1/λ0 + 1, λ2/λ0 + 1)` in real arithmetic.
fn ratio_conditions(angles: [f64; 3]) -> ([f64; 2], f64) {
    let l = heralded_map(&splitters_from_angles(angles));
    let l0 = l[0].re;
    ([(l[1].re + l0), (l[2].re + l0)], l0)
}

/// Newton solve of the ratio conditions in `(θ2, θ3)` for fixed `θ1`.
fn solve_for_fixed_first(first: f64, guess: [f64; 2]) -> Option<([f64; 2], f64)> {
    let mut x = guess;
    let h = 1e-7;
    for _ in 0..60 {
        let (f, l0) = ratio_conditions([first, x[0], x[1]]);
        let res = f[0].abs().max(f[1].abs());
        if res < 1e-14 {
            return (l0.abs() > 1e-6).then_some((x, l0));
        }
        let (f_a, _) = ratio_conditions([first, x[0] + h, x[1]]);
        let (f_b, _) = ratio_conditions([first, x[0], x[1] + h]);
        let j = [
            [(f_a[0] - f[0]) / h, (f_b[0] - f[0]) / h],
            [(f_a[1] - f[1]) / h, (f_b[1] - f[1]) / h],
        ];
        let det = j[0][0] * j[1][1] - j[0][1] * j[1][0];
        if det.abs() < 1e-14 {
            return None;
        }
        let dx = [
            (j[1][1] * f[0] - j[0][1] * f[1]) / det,
            (-j[1][0] * f[0] + j[0][0] * f[1]) / det,
        ];
        x = [x[0] - dx[0], x[1] - dx[1]];
        if !x[0].is_finite() || !x[1].is_finite() {
            return None;
        }
    }
    let (f, l0) = ratio_conditions([first, x[0], x[1]]);
    (f[0].abs().max(f[1].abs()) < 1e-11 && l0.abs() > 1e-6).then_some((x, l0))
}

/// Transmittances making the heralded signal map `∝ diag(1, -1, -1)` with the
/// largest success probability.
///
/// Coarse multistart over the first angle, Newton on the two ratio
/// conditions for the others, then golden-section refinement of `|λ0|²`
/// along the solution curve.
pub fn solve_ns_transmittances() -> Result<NsSolution> {
    const COARSE: usize = 48;
    const STARTS: usize = 8;
    let span = |k: usize, n: usize| -FRAC_PI_2 + PI * (k as f64 + 0.5) / n as f64;

    let mut best: Option<(f64, [f64; 2], f64)> = None;
    for a in 0..COARSE {
        let first = span(a, COARSE);
        for s in 0..STARTS * STARTS {
            let guess = [span(s / STARTS, STARTS), span(s % STARTS, STARTS)];
            if let Some((x, l0)) = solve_for_fixed_first(first, guess) {
                if best.is_none_or(|b| l0 * l0 > b.2) {
                    best = Some((first, x, l0 * l0));
                }
            }
        }
    }
    let (first, mut rest, _) = best.ok_or(Error::SolverDidNotConverge { residual: f64::NAN })?;

    // golden-section search on θ1, following the solution branch
    let objective = |theta: f64, rest: &mut [f64; 2]| -> f64 {
        match solve_for_fixed_first(theta, *rest) {
            Some((x, l0)) => {
                *rest = x;
                l0 * l0
            }
            None => f64::NEG_INFINITY,
        }
    };
    let step = PI / COARSE as f64;
    let (mut lo, mut hi) = (first - step, first + step);
    let ratio = (5f64.sqrt() - 1.0) / 2.0;
    let mut x1 = hi - ratio * (hi - lo);
    let mut x2 = lo + ratio * (hi - lo);
    let mut r1 = rest;
    let mut r2 = rest;
    let mut f1 = objective(x1, &mut r1);
    let mut f2 = objective(x2, &mut r2);
    while hi - lo > 1e-10 {
        if f1 >= f2 {
            hi = x2;
            x2 = x1;
            f2 = f1;
            r2 = r1;
            x1 = hi - ratio * (hi - lo);
            f1 = objective(x1, &mut r1);
        } else {
            lo = x1;
            x1 = x2;
            f1 = f2;
            r1 = r2;
            x2 = lo + ratio * (hi - lo);
            f2 = objective(x2, &mut r2);
        }
    }
    let theta1 = 0.5 * (lo + hi);
    rest = if f1 >= f2 { r1 } else { r2 };
    let (rest, _) = solve_for_fixed_first(theta1, rest).ok_or(Error::SolverDidNotConverge { residual: f64::NAN })?;

    let angles = [theta1, rest[0], rest[1]];
    let splitters = splitters_from_angles(angles);
    let lambdas = heralded_map(&splitters);
    let residual = ns_residual(&lambdas);
    if residual > 1e-10 {
        return Err(Error::SolverDidNotConverge { residual });
    }
    Ok(NsSolution {
        splitters,
        lambdas,
        success_probability: lambdas[0].norm_sqr(),
        residual,
    })
}

/// Largest deviation of `(λ1/λ0, λ2/λ0)` from `(-1, -1)`.
pub fn ns_residual(lambdas: &[C64; 3]) -> f64 {
    let r1 = (lambdas[1] / lambdas[0] + 1.0).norm();
    let r2 = (lambdas[2] / lambdas[0] + 1.0).norm();
    r1.max(r2)
}

/// Outcome of one run of the heralded gate.
#[derive(Debug, Clone)]
pub struct NsGateResult {
    /// Heralded signal ensemble on levels 0..2 (trace = success probability).
    pub output: DensityMatrix,
    pub success_probability: f64,
    /// Fidelity of the normalized output with the vacuum-sign-flipped input.
    pub fidelity: f64,
}

/// Herald outcomes: one photon on mode 1, none on mode 2.
pub const NS_HERALD: [(usize, usize); 2] = [(1, 1), (2, 0)];

/// Runs the gate on a signal supported on levels {0,1,2}.
///
/// `detectors[0]` watches mode 1, `detectors[1]` mode 2. The ancilla photon
/// is an ideal |1>.
pub fn run_ns_gate(
    input: &FockVector,
    solution: &NsSolution,
    detectors: [DetectorModel; 2],
    tol: &Tolerances,
) -> Result<NsGateResult> {
    if input.amps().iter().skip(3).any(|a| a.norm() > tol.subspace) {
        return Err(Error::SubspaceViolation {
            level: 3,
            amplitude: input.amps().iter().skip(3).map(|a| a.norm()).fold(0.0, f64::max),
        });
    }
    let signal = input.resized(3).normalized()?;
    let ancilla = FockVector::basis(1, 2);
    let vacuum = FockVector::basis(0, 1);
    let mut state = MultimodeState::product(&[signal.clone(), ancilla, vacuum], 3)?;
    for bs in &solution.splitters {
        state = apply_beam_splitter(&state, bs)?;
    }
    // herald mode 2 first so mode 1 keeps its index
    let (after_c, _) = herald_project(&state, NS_HERALD[1].0, NS_HERALD[1].1, &detectors[1])?;
    let after_b = herald_ensemble(&after_c, NS_HERALD[0].0, NS_HERALD[0].1, &detectors[0])?;
    let output = after_b.to_density(3)?;
    let success_probability = output.trace();

    let target = density_from_pure(&nonlinear_sign_target(&signal)?)?;
    let fidelity = if success_probability > 0.0 {
        fidelity(&output.normalized()?, &target, tol)?
    } else {
        0.0
    };
    Ok(NsGateResult {
        output,
        success_probability,
        fidelity,
    })
}
