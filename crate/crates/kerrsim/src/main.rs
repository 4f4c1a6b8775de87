use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use kerrsim::config::{ExperimentConfig, ParameterMode};
use kerrsim::io::{self, MatrixRecord, SampleMetadata};
use kerrsim::klm_compare::{klm_compare, rows_csv};
use kerrsim::pipeline::{alpha_dir_name, alpha_seed, forward_model, run_pipeline, write_artifacts, DiagnosticsRecord};
use kerrsim::{Error, Result, Stage};
use kerrsim_core::gate::{superposition_roots, SuperpositionParams};
use kerrsim_core::homodyne::{sample_quadratures, PhaseSchedule};
use kerrsim_core::klm::solve_ns_transmittances;
use kerrsim_core::tomography::{bin_samples, reconstruct};
use kerrsim_core::Tolerances;

#[derive(Parser)]
#[command(
    name = "kerrsim",
    version,
    about = "Heralded Kerr-gate simulation, homodyne sampling and tomography"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Full run: gate, loss, sampling, reconstruction, reports.
    Pipeline(Common),
    /// Forward model only: input and gate-output density matrices.
    Simulate(Common),
    /// Write homodyne samples of the gate output for each α.
    Sample(Common),
    /// Reconstruct a density matrix from a sample CSV.
    Reconstruct(ReconstructArgs),
    /// Sign-gate versus superposition-scheme comparison table.
    Klm {
        #[arg(long, default_value = "out")]
        out: PathBuf,
    },
    /// Print the gain solution and the sign-gate transmittances.
    Solve,
}

#[derive(Clone, Copy, ValueEnum)]
enum ModeArg {
    Ideal,
    Bestfit,
}

#[derive(Args)]
struct Common {
    /// JSON experiment config; flags below override it.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Coherent amplitudes, comma separated.
    #[arg(long, value_delimiter = ',')]
    alpha: Option<Vec<f64>>,
    #[arg(long, value_enum)]
    mode: Option<ModeArg>,
    #[arg(long)]
    eta: Option<f64>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    samples_per_phase: Option<usize>,
    #[arg(long)]
    phases: Option<usize>,
    #[arg(long)]
    out: Option<PathBuf>,
}

impl Common {
    fn resolve(&self) -> Result<ExperimentConfig> {
        let mut c = match &self.config {
            Some(p) => ExperimentConfig::load(p)?,
            None => ExperimentConfig::default(),
        };
        if let Some(a) = &self.alpha {
            c.alphas = a.clone();
        }
        if let Some(m) = self.mode {
            c.mode = match m {
                ModeArg::Ideal => ParameterMode::Ideal,
                ModeArg::Bestfit => ParameterMode::BestFit,
            };
        }
        if let Some(v) = self.eta {
            c.eta = v;
        }
        if let Some(v) = self.seed {
            c.seed = v;
        }
        if let Some(v) = self.samples_per_phase {
            c.samples_per_phase = v;
        }
        if let Some(v) = self.phases {
            c.phases = v;
        }
        if let Some(v) = &self.out {
            c.output_dir = v.clone();
        }
        c.validate()?;
        Ok(c)
    }
}

#[derive(Args)]
struct ReconstructArgs {
    /// CSV with header `theta,x`.
    #[arg(long)]
    samples: PathBuf,
    /// Efficiency to compensate; defaults to the sidecar metadata, then 0.66.
    #[arg(long)]
    eta: Option<f64>,
    #[arg(long, default_value_t = 8)]
    dim: usize,
    #[arg(long, default_value = "out")]
    out: PathBuf,
}

fn cmd_pipeline(c: &ExperimentConfig) -> Result<()> {
    let run = run_pipeline(c)?;
    write_artifacts(&run, &c.output_dir)?;
    println!("mode {}  eta {}  seed {}", c.mode.name(), c.eta, c.seed);
    println!(
        "{:>6} {:>9} {:>10} {:>10} {:>10} {:>6} {:>5}",
        "alpha", "fidelity", "Re r01", "Re r02", "Re r12", "iters", "conv"
    );
    for r in &run.report.records {
        let s = &r.reconstructed_signs;
        println!(
            "{:>6} {:>9.5} {:>10.4} {:>10.4} {:>10.4} {:>6} {:>5}",
            r.alpha, r.fidelity, s.re01, s.re02, s.re12, r.diagnostics.iterations, r.diagnostics.converged
        );
    }
    println!("artifacts in {}", c.output_dir.display());
    Ok(())
}

fn cmd_simulate(c: &ExperimentConfig) -> Result<()> {
    let tol = Tolerances::DEFAULT;
    for &alpha in &c.alphas {
        let (input, output, weight) = forward_model(alpha, &c.mode, c.forward_dim, &tol)?;
        let dir = c.output_dir.join(alpha_dir_name(alpha));
        io::write_json(&dir.join("input.json"), &MatrixRecord::from_density(&input))?;
        io::write_json(&dir.join("model.json"), &MatrixRecord::from_density(&output))?;
        let tables = c.output_dir.join("tables");
        let stem = alpha_dir_name(alpha);
        io::write_tables(&tables, &format!("{stem}_input"), input.matrix())?;
        io::write_tables(&tables, &format!("{stem}_model"), output.matrix())?;
        println!(
            "alpha {alpha}: weight {weight:.6}  Re r01 {:.5}  Re r02 {:.5}  Re r12 {:.5}",
            output.get(0, 1).re,
            output.get(0, 2).re,
            output.get(1, 2).re
        );
    }
    Ok(())
}

fn cmd_sample(c: &ExperimentConfig) -> Result<()> {
    let tol = Tolerances::DEFAULT;
    for (i, &alpha) in c.alphas.iter().enumerate() {
        let (_, output, _) = forward_model(alpha, &c.mode, c.forward_dim, &tol)?;
        let seed = alpha_seed(c.seed, i);
        let num = |source| Error::Numerical {
            stage: Stage::Sample,
            alpha: Some(alpha),
            source,
        };
        let schedule = PhaseSchedule::uniform(c.phases, c.samples_per_phase, seed).map_err(num)?;
        let samples = sample_quadratures(&output, &schedule, c.eta, &tol).map_err(num)?;
        let path = c.output_dir.join(alpha_dir_name(alpha)).join("samples.csv");
        io::write_samples(&path, &samples)?;
        let meta = SampleMetadata {
            schema_version: kerrsim::config::SCHEMA_VERSION,
            seed,
            eta: c.eta,
            alpha: Some(alpha),
            schedule: schedule.entries().to_vec(),
        };
        io::write_json(&io::metadata_path(&path), &meta)?;
        println!("alpha {alpha}: {} samples -> {}", samples.len(), path.display());
    }
    Ok(())
}

fn cmd_reconstruct(args: &ReconstructArgs) -> Result<()> {
    let tol = Tolerances::DEFAULT;
    let samples = io::read_samples(&args.samples)?;
    let meta_path = io::metadata_path(&args.samples);
    let eta = match args.eta {
        Some(e) => e,
        None if Path::new(&meta_path).exists() => io::read_json::<SampleMetadata>(&meta_path)?.eta,
        None => 0.66,
    };
    let config = kerrsim_core::tomography::TomographyConfig {
        dim: args.dim,
        eta,
        ..Default::default()
    };
    config.validate().map_err(|e| Error::Config(e.to_string()))?;
    let num = |stage| {
        move |source| Error::Numerical {
            stage,
            alpha: None,
            source,
        }
    };
    let data = bin_samples(&samples, &config).map_err(num(Stage::Bin))?;
    let (rho, diag) = reconstruct(&data, &config, &tol).map_err(num(Stage::Reconstruct))?;
    io::write_json(&args.out.join("reconstructed.json"), &MatrixRecord::from_density(&rho))?;
    io::write_json(&args.out.join("diagnostics.json"), &DiagnosticsRecord::from(&diag))?;
    io::write_tables(&args.out.join("tables"), "reconstructed", rho.matrix())?;
    println!(
        "{} samples, eta {eta}: {} iterations, converged {}, log-likelihood {:.4}",
        samples.len(),
        diag.iterations,
        diag.converged,
        diag.log_likelihood
    );
    Ok(())
}

fn cmd_klm(out: &Path) -> Result<()> {
    let report = klm_compare()?;
    io::write_json(&out.join("klm.json"), &report)?;
    io::write_atomic(&out.join("klm.csv"), &rows_csv(&report.rows))?;
    let t = report.transmittances;
    println!(
        "transmittances {:.6} {:.6} {:.6}  P = {:.9}",
        t[0], t[1], t[2], report.ns_success_probability
    );
    println!(
        "{:<14} {:<7} {:>5} {:<22} {:>10} {:>10}",
        "scheme", "det", "eta", "probe", "fidelity", "success"
    );
    for r in &report.rows {
        let scheme = serde_json::to_value(r.scheme)
            .expect("enum")
            .as_str()
            .unwrap_or_default()
            .to_string();
        println!(
            "{:<14} {:<7} {:>5} {:<22} {:>10.6} {:>10.6}",
            scheme, r.detector, r.eta, r.probe, r.fidelity, r.success
        );
    }
    Ok(())
}

fn cmd_solve() -> Result<()> {
    let [accepted, rejected] = superposition_roots();
    let (r1, r2) = accepted.residuals();
    println!(
        "B/A = {:.15}  g = {:.15}  residuals {r1:.1e} {r2:.1e}",
        accepted.ratio, accepted.gain
    );
    println!(
        "rejected root B/A = {:.15} (g = {:.15} < 0)",
        rejected.ratio, rejected.gain
    );
    let bf = SuperpositionParams::best_fit().ratio();
    println!("best-fit B/A = {:.4} {:+.4}i", bf.re, bf.im);
    let ns = solve_ns_transmittances().map_err(|source| Error::Numerical {
        stage: Stage::Klm,
        alpha: None,
        source,
    })?;
    let t = ns.transmittances();
    println!(
        "sign gate: t = {:.12} {:.12} {:.12}  P = {:.12}  residual {:.1e}",
        t[0], t[1], t[2], ns.success_probability, ns.residual
    );
    Ok(())
}

fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Pipeline(c) => cmd_pipeline(&c.resolve()?),
        Command::Simulate(c) => cmd_simulate(&c.resolve()?),
        Command::Sample(c) => cmd_sample(&c.resolve()?),
        Command::Reconstruct(args) => cmd_reconstruct(&args),
        Command::Klm { out } => cmd_klm(&out),
        Command::Solve => cmd_solve(),
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
