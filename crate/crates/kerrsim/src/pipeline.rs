//! coherent state → V(n̂) → loss → homodyne sampling → tomography → comparison

use std::path::{Path, PathBuf};
use std::thread;

use kerrsim_core::fock::{coherent_state, density_from_pure, fidelity, CoherentParams, DensityMatrix};
use kerrsim_core::gate::{apply_conditional, build_superposition_operator};
use kerrsim_core::homodyne::{sample_quadratures, PhaseSchedule, QuadratureSample};
use kerrsim_core::tomography::{bin_samples, reconstruct, Diagnostics};
use kerrsim_core::Tolerances;
use rand_chacha::ChaCha8Rng;
use rand_core::{RngCore, SeedableRng};
use serde::{Deserialize, Serialize};

use crate::config::{ExperimentConfig, ParameterMode, SCHEMA_VERSION};
use crate::error::{AtStage, Error, Result, Stage};
use crate::io::{self, MatrixRecord, SampleMetadata};

/// Signs of the low off-diagonal elements.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SignSummary {
    pub re01: f64,
    pub re02: f64,
    pub re12: f64,
    pub im01: f64,
    /// `Re ρ01 < 0`, `Re ρ02 < 0`: the vacuum-containing coherences are negative.
    pub vacuum_negative: bool,
    /// `Re ρ12 > 0`: only the vacuum component was flipped.
    pub one_two_positive: bool,
}

impl SignSummary {
    pub fn of(rho: &DensityMatrix) -> Self {
        let (r01, r02, r12) = (rho.get(0, 1), rho.get(0, 2), rho.get(1, 2));
        SignSummary {
            re01: r01.re,
            re02: r02.re,
            re12: r12.re,
            im01: r01.im,
            vacuum_negative: r01.re < 0.0 && r02.re < 0.0,
            one_two_positive: r12.re > 0.0,
        }
    }

    pub fn full_signature(&self) -> bool {
        self.vacuum_negative && self.one_two_positive
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DiagnosticsRecord {
    pub iterations: usize,
    pub converged: bool,
    pub log_likelihood: f64,
    pub history_monotone: bool,
    pub completeness_residual: f64,
    pub phase_insensitive: bool,
    pub floored_cells: usize,
    pub backtracks: usize,
    pub top_level_population: f64,
    pub out_of_range_samples: usize,
}

impl From<&Diagnostics> for DiagnosticsRecord {
    fn from(d: &Diagnostics) -> Self {
        DiagnosticsRecord {
            iterations: d.iterations,
            converged: d.converged,
            log_likelihood: d.log_likelihood,
            history_monotone: d.history.windows(2).all(|w| w[1] >= w[0]),
            completeness_residual: d.completeness_residual,
            phase_insensitive: d.phase_insensitive,
            floored_cells: d.floored_cells,
            backtracks: d.backtracks,
            top_level_population: d.top_level_population,
            out_of_range_samples: d.out_of_range_samples,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AlphaRecord {
    pub alpha: f64,
    pub seed: u64,
    /// Input coherent state on the reconstruction space.
    pub input: MatrixRecord,
    /// Gate output truncated to the reconstruction space and renormalized.
    pub model: MatrixRecord,
    pub reconstructed: MatrixRecord,
    pub fidelity: f64,
    /// Weight of the gate output above the reconstruction space.
    pub model_tail: f64,
    /// `‖V|α>‖²` relative to a unit-weight identity gate.
    pub success_weight: f64,
    pub forward_signs: SignSummary,
    pub reconstructed_signs: SignSummary,
    pub diagnostics: DiagnosticsRecord,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunReport {
    pub schema_version: u32,
    pub version: String,
    pub config: ExperimentConfig,
    pub records: Vec<AlphaRecord>,
}

/// Report plus the raw samples behind it.
#[derive(Debug, Clone)]
pub struct PipelineRun {
    pub report: RunReport,
    pub samples: Vec<Vec<QuadratureSample>>,
    pub schedules: Vec<PhaseSchedule>,
}

/// Seed of the `index`-th α, derived from the run seed.
pub fn alpha_seed(seed: u64, index: usize) -> u64 {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(1 + index as u64);
    rng.next_u64()
}

/// Gate output `V|α>/‖V|α>‖` on the forward space, with its weight.
pub fn forward_model(
    alpha: f64,
    mode: &ParameterMode,
    dim: usize,
    tol: &Tolerances,
) -> Result<(DensityMatrix, DensityMatrix, f64)> {
    let a = Some(alpha);
    let input = coherent_state(CoherentParams::real(alpha), dim, tol).at(Stage::Prepare, a)?;
    let params = mode.params()?;
    let v = build_superposition_operator(params, dim).at(Stage::Gate, a)?;
    let out = apply_conditional(&v, &input, tol).at(Stage::Gate, a)?;
    let input = density_from_pure(&input).at(Stage::Prepare, a)?;
    let output = density_from_pure(&out.state).at(Stage::Gate, a)?;
    Ok((input, output, out.weight))
}

fn check_signature(alpha: f64, mode: &ParameterMode, signs: &SignSummary) -> Result<()> {
    if !mode.expects_signature() || alpha == 0.0 {
        return Ok(());
    }
    let holds = match mode {
        ParameterMode::Ideal => signs.full_signature(),
        _ => signs.vacuum_negative,
    };
    if holds {
        Ok(())
    } else {
        Err(Error::Signature {
            alpha,
            detail: format!(
                "forward model has Re ρ01 = {:.3e}, Re ρ02 = {:.3e}, Re ρ12 = {:.3e}",
                signs.re01, signs.re02, signs.re12
            ),
        })
    }
}

fn run_alpha(
    config: &ExperimentConfig,
    index: usize,
    tol: &Tolerances,
) -> Result<(AlphaRecord, Vec<QuadratureSample>, PhaseSchedule)> {
    let alpha = config.alphas[index];
    let a = Some(alpha);
    let seed = alpha_seed(config.seed, index);
    let tomo = config.tomography_config();

    let (input, output, weight) = forward_model(alpha, &config.mode, config.forward_dim, tol)?;
    let forward_signs = SignSummary::of(&output);
    check_signature(alpha, &config.mode, &forward_signs)?;

    let schedule = PhaseSchedule::uniform(config.phases, config.samples_per_phase, seed).at(Stage::Sample, a)?;
    let samples = sample_quadratures(&output, &schedule, config.eta, tol).at(Stage::Sample, a)?;
    let data = bin_samples(&samples, &tomo).at(Stage::Bin, a)?;
    let (estimate, diagnostics) = reconstruct(&data, &tomo, tol).at(Stage::Reconstruct, a)?;

    let model_cut = output.truncated(tomo.dim);
    let model_tail = 1.0 - model_cut.trace();
    let model = model_cut.normalized().at(Stage::Compare, a)?;
    let input = input.truncated(tomo.dim).normalized().at(Stage::Compare, a)?;
    let f = fidelity(&estimate, &model, tol).at(Stage::Compare, a)?;

    let record = AlphaRecord {
        alpha,
        seed,
        input: MatrixRecord::from_density(&input),
        model: MatrixRecord::from_density(&model),
        reconstructed: MatrixRecord::from_density(&estimate),
        fidelity: f,
        model_tail,
        success_weight: weight,
        forward_signs,
        reconstructed_signs: SignSummary::of(&estimate),
        diagnostics: DiagnosticsRecord::from(&diagnostics),
    };
    Ok((record, samples, schedule))
}

/// Runs every α of the config, one thread per α. Deterministic for a fixed seed.
pub fn run_pipeline(config: &ExperimentConfig) -> Result<PipelineRun> {
    config.validate()?;
    let tol = Tolerances::DEFAULT;
    let results: Vec<Result<_>> = thread::scope(|s| {
        let handles: Vec<_> = (0..config.alphas.len())
            .map(|i| s.spawn(move || run_alpha(config, i, &tol)))
            .collect();
        handles
            .into_iter()
            .map(|h| h.join().expect("pipeline worker panicked"))
            .collect()
    });

    let mut records = Vec::new();
    let mut samples = Vec::new();
    let mut schedules = Vec::new();
    for r in results {
        let (record, s, sched) = r?;
        records.push(record);
        samples.push(s);
        schedules.push(sched);
    }
    Ok(PipelineRun {
        report: RunReport {
            schema_version: SCHEMA_VERSION,
            version: env!("CARGO_PKG_VERSION").to_string(),
            config: config.clone(),
            records,
        },
        samples,
        schedules,
    })
}

/// Directory name of one α, e.g. `alpha_0.53`.
pub fn alpha_dir_name(alpha: f64) -> String {
    format!("alpha_{alpha}")
}

/// Writes `report.json`, per-α matrices, samples with metadata, and tables.
pub fn write_artifacts(run: &PipelineRun, dir: &Path) -> Result<Vec<PathBuf>> {
    io::ensure_dir(dir)?;
    let mut written = Vec::new();
    let report_path = dir.join("report.json");
    io::write_json(&report_path, &run.report)?;
    written.push(report_path);

    for ((record, samples), schedule) in run.report.records.iter().zip(&run.samples).zip(&run.schedules) {
        let sub = dir.join(alpha_dir_name(record.alpha));
        for (name, m) in [
            ("input", &record.input),
            ("model", &record.model),
            ("reconstructed", &record.reconstructed),
        ] {
            let p = sub.join(format!("{name}.json"));
            io::write_json(&p, m)?;
            written.push(p);
        }
        let p = sub.join("diagnostics.json");
        io::write_json(&p, &record.diagnostics)?;
        written.push(p);

        let p = sub.join("samples.csv");
        io::write_samples(&p, samples)?;
        let meta = SampleMetadata {
            schema_version: SCHEMA_VERSION,
            seed: schedule.seed(),
            eta: run.report.config.eta,
            alpha: Some(record.alpha),
            schedule: schedule.entries().to_vec(),
        };
        let mp = io::metadata_path(&p);
        io::write_json(&mp, &meta)?;
        written.push(p);
        written.push(mp);
    }
    written.extend(report_density_matrix_tables(&run.report, &dir.join("tables"))?);
    Ok(written)
}

/// One Re and one Im CSV per panel (input, model, reconstructed) and α.
pub fn report_density_matrix_tables(report: &RunReport, dir: &Path) -> Result<Vec<PathBuf>> {
    let mut written = Vec::new();
    for record in &report.records {
        for (name, m) in [
            ("input", &record.input),
            ("model", &record.model),
            ("reconstructed", &record.reconstructed),
        ] {
            let matrix = m.to_matrix().map_err(|message| Error::Format {
                path: dir.to_path_buf(),
                message,
            })?;
            let stem = format!("{}_{name}", alpha_dir_name(record.alpha));
            written.extend(io::write_tables(dir, &stem, &matrix)?);
        }
    }
    Ok(written)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn alpha_seeds_differ_and_repeat() {
        assert_eq!(alpha_seed(5, 0), alpha_seed(5, 0));
        assert_ne!(alpha_seed(5, 0), alpha_seed(5, 1));
        assert_ne!(alpha_seed(5, 0), alpha_seed(6, 0));
    }

    #[test]
    fn ideal_forward_signature() {
        let tol = Tolerances::DEFAULT;
        for alpha in [0.23, 0.53, 0.79] {
            let (_, out, _) = forward_model(alpha, &ParameterMode::Ideal, 16, &tol).unwrap();
            let s = SignSummary::of(&out);
            assert!(s.full_signature(), "alpha {alpha}: {s:?}");
            check_signature(alpha, &ParameterMode::Ideal, &s).unwrap();
        }
    }

    #[test]
    fn identity_gate_fails_signature() {
        let tol = Tolerances::DEFAULT;
        let mode = ParameterMode::Custom {
            a_re: 1.0,
            a_im: 0.0,
            b_re: 0.0,
            b_im: 0.0,
        };
        let (_, out, w) = forward_model(0.53, &mode, 16, &tol).unwrap();
        // ⟨(n+1)²⟩ on a coherent state
        let a2 = 0.53f64 * 0.53;
        assert!((w - (a2 * a2 + 3.0 * a2 + 1.0)).abs() < 1e-12, "{w}");
        let s = SignSummary::of(&out);
        assert!(!s.vacuum_negative);
        assert!(check_signature(0.53, &ParameterMode::Ideal, &s).is_err());
    }
}
