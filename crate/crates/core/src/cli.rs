//! Command-line front end. Every subcommand writes its outputs and a
//! `manifest.json` into `--out`; numerical outputs depend only on the
//! inputs and `--seed`.

use std::fs;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::{Deserialize, Serialize};

use crate::fock::{max_fidelity_over_rotation, uhlmann_fidelity, DensityOperator, FockVector};
use crate::herald::{herald, perturbative_output, HeraldConfig, TruncationWarning};
use crate::io::{self, MatrixJson};
use crate::synth::{root_residuals, solve_displacements, Preset, TargetSuperposition};
use crate::tomo::{self, MetricsReport, PhaseSchedule, TomoDiagnostics, TomoSettings};
use crate::wigner::{self, CutSpec, GridSpec};
use crate::{Error, Result, C64};

pub const DEFAULT_SEED: u64 = 1;
pub const DEFAULT_Q: f64 = 0.05;
pub const MANIFEST_FILE: &str = "manifest.json";

pub const EXIT_OK: i32 = 0;
pub const EXIT_INPUT: i32 = 2;
pub const EXIT_NUMERICAL: i32 = 3;

#[derive(Debug, Parser)]
#[command(name = "photonsynth", version, about = "Heralded zero-to-three photon state synthesis")]
pub struct Cli {
    #[command(flatten)]
    pub common: CommonArgs,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Args)]
pub struct CommonArgs {
    /// Directory for outputs and the run manifest.
    #[arg(long, global = true, default_value = ".")]
    pub out: PathBuf,
    /// Seed for every random draw.
    #[arg(long, global = true, default_value_t = DEFAULT_SEED)]
    pub seed: u64,
    /// Hilbert-space truncation (herald: signal and idler; tomo: reconstruction).
    #[arg(long, global = true)]
    pub dim: Option<usize>,
    /// Treat truncation warnings as errors.
    #[arg(long, global = true)]
    pub strict: bool,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Solve for the three displacements that produce a target superposition.
    Synth(SynthArgs),
    /// Simulate triple-click heralding and write the conditional signal state.
    Herald(HeraldArgs),
    /// Evaluate the Wigner function on a grid and report its negativity.
    Wigner(WignerArgs),
    /// Reconstruct a state from homodyne records, simulated or given.
    Tomo(TomoArgs),
    /// Print populations, purity and related numbers for a state.
    Metrics(MetricsArgs),
}

#[derive(Debug, Args)]
pub struct SynthArgs {
    /// Target state vector JSON (`{"dim", "entries"}`, support on |0⟩..|3⟩).
    #[arg(long, conflicts_with = "preset")]
    pub config: Option<PathBuf>,
    #[arg(long)]
    pub preset: Option<Preset>,
    #[arg(long, default_value_t = DEFAULT_Q)]
    pub q: f64,
}

#[derive(Debug, Args)]
pub struct HeraldArgs {
    /// Heralding configuration JSON; a `synth` recipe is accepted as is.
    #[arg(long, conflicts_with = "preset")]
    pub config: Option<PathBuf>,
    #[arg(long)]
    pub preset: Option<Preset>,
    /// Pump parameter for `--preset` runs.
    #[arg(long)]
    pub q: Option<f64>,
    #[arg(long)]
    pub eta_signal: Option<f64>,
    #[arg(long)]
    pub eta_detector: Option<f64>,
    #[arg(long)]
    pub dark_prob: Option<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum GridFormat {
    Csv,
    Json,
}

#[derive(Debug, Args)]
pub struct WignerArgs {
    /// Density-operator JSON.
    #[arg(long, required_unless_present = "fock")]
    pub rho: Option<PathBuf>,
    /// Use the Fock state |n⟩ instead of a file.
    #[arg(long, conflicts_with = "rho")]
    pub fock: Option<usize>,
    /// `xmin,xmax,pmin,pmax,nx,np`.
    #[arg(long, allow_hyphen_values = true)]
    pub grid: Option<GridSpec>,
    /// Direction of the cut used to count negative intervals.
    #[arg(long, default_value_t = 0.0, allow_negative_numbers = true)]
    pub cut_angle: f64,
    #[arg(long, value_enum, default_value_t = GridFormat::Csv)]
    pub format: GridFormat,
}

#[derive(Debug, Args)]
pub struct TomoArgs {
    /// True state to sample from (simulate mode).
    #[arg(long, required_unless_present = "records", conflicts_with = "records")]
    pub rho: Option<PathBuf>,
    /// Records to fit (`theta,x` CSV or JSON array).
    #[arg(long)]
    pub records: Option<PathBuf>,
    /// Reconstruction settings JSON; `--dim` overrides its `dim`.
    #[arg(long)]
    pub config: Option<PathBuf>,
    #[arg(long, default_value_t = 10_000)]
    pub samples: usize,
    /// Number of equally spaced phases in `[0, π)`.
    #[arg(long, default_value_t = tomo::DEFAULT_PHASES)]
    pub phases: usize,
    #[arg(long)]
    pub max_iters: Option<usize>,
}

#[derive(Debug, Args)]
pub struct MetricsArgs {
    #[arg(long)]
    pub rho: PathBuf,
    /// Also report the fidelity with this preset's target, maximized over rotations.
    #[arg(long)]
    pub preset: Option<Preset>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub command: String,
    pub args: Vec<String>,
    pub inputs: Vec<String>,
    pub outputs: Vec<String>,
    pub seed: u64,
    pub version: String,
    pub timestamp: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SynthReport {
    pub q: f64,
    #[serde(with = "crate::io::complex_triple")]
    pub betas: [C64; 3],
    pub target: MatrixJson,
    /// Normalized lowest-order output of the recipe.
    pub predicted: MatrixJson,
    /// Largest `|P(β)|` over the three roots, relative to the coefficient scale.
    pub max_root_residual: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HeraldReport {
    pub probability: f64,
    /// Fidelity with the normalized lowest-order prediction for the same displacements.
    pub fidelity_to_prediction: f64,
    pub metrics: MetricsReport,
    pub warnings: Vec<TruncationWarning>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NegativityReport {
    pub cut_angle: f64,
    pub negative_intervals: usize,
    pub negative_volume: f64,
    pub min_value: f64,
    pub max_abs: f64,
    pub integral: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TomoReport {
    pub settings: TomoSettings,
    pub diagnostics: TomoDiagnostics,
    pub metrics: MetricsReport,
    /// Present in simulate mode.
    pub fidelity_to_truth: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricsOutput {
    #[serde(flatten)]
    pub metrics: MetricsReport,
    pub preset: Option<String>,
    pub fidelity_to_target: Option<f64>,
    pub best_rotation: Option<f64>,
}

/// Exit code for a failed run.
pub fn exit_code(err: &Error) -> i32 {
    match err {
        Error::Numerical(_) | Error::NoHeraldEvent => EXIT_NUMERICAL,
        _ => EXIT_INPUT,
    }
}

struct Run<'a> {
    common: &'a CommonArgs,
    inputs: Vec<String>,
    outputs: Vec<String>,
}

impl<'a> Run<'a> {
    fn new(common: &'a CommonArgs) -> Result<Self> {
        fs::create_dir_all(&common.out)?;
        Ok(Self {
            common,
            inputs: Vec::new(),
            outputs: Vec::new(),
        })
    }

    fn read(&mut self, path: &Path) -> Result<String> {
        self.inputs.push(path.display().to_string());
        fs::read_to_string(path)
            .map_err(|e| Error::invalid(format!("cannot read {}: {e}", path.display())))
    }

    fn write(&mut self, name: &str, contents: &str) -> Result<PathBuf> {
        let path = self.common.out.join(name);
        fs::write(&path, contents)?;
        self.outputs.push(path.display().to_string());
        Ok(path)
    }

    fn finish(self, command: &str, args: &[String]) -> Result<()> {
        let manifest = RunManifest {
            command: command.to_string(),
            args: args.to_vec(),
            inputs: self.inputs,
            outputs: self.outputs,
            seed: self.common.seed,
            version: env!("CARGO_PKG_VERSION").to_string(),
            timestamp: chrono::Utc::now().to_rfc3339_opts(chrono::SecondsFormat::Secs, true),
        };
        fs::write(
            self.common.out.join(MANIFEST_FILE),
            serde_json::to_string_pretty(&manifest)? + "\n",
        )?;
        Ok(())
    }
}

fn pretty<T: Serialize>(value: &T) -> Result<String> {
    Ok(serde_json::to_string_pretty(value)? + "\n")
}

fn read_density(run: &mut Run, path: &Path) -> Result<DensityOperator> {
    let text = run.read(path)?;
    io::density_from_json(&text).map_err(|e| match e {
        Error::Json(j) => Error::InvalidDensity(format!("{}: {j}", path.display())),
        other => other,
    })
}

/// Runs one command. `args` is the full command line, recorded in the manifest.
pub fn run(cli: &Cli, args: &[String]) -> Result<()> {
    let mut run = Run::new(&cli.common)?;
    let name = match &cli.command {
        Command::Synth(a) => {
            cmd_synth(&mut run, a)?;
            "synth"
        }
        Command::Herald(a) => {
            cmd_herald(&mut run, a)?;
            "herald"
        }
        Command::Wigner(a) => {
            cmd_wigner(&mut run, a)?;
            "wigner"
        }
        Command::Tomo(a) => {
            cmd_tomo(&mut run, a)?;
            "tomo"
        }
        Command::Metrics(a) => {
            cmd_metrics(&mut run, a)?;
            "metrics"
        }
    };
    run.finish(name, args)
}

fn cmd_synth(run: &mut Run, a: &SynthArgs) -> Result<()> {
    let target = match (&a.config, a.preset) {
        (Some(path), _) => {
            let text = run.read(path)?;
            TargetSuperposition::from_fock_vector(&io::vector_from_json(&text)?)?
        }
        (None, Some(p)) => p.target(),
        (None, None) => return Err(Error::invalid("synth needs --config or --preset")),
    };
    let recipe = match a.preset {
        // Presets carry closed-form displacements.
        Some(p) if a.config.is_none() => p.recipe(a.q),
        _ => solve_displacements(&target, a.q)?,
    };
    let (residuals, scale) = root_residuals(&target, &recipe);
    let residual = residuals.into_iter().fold(0.0, f64::max) / scale;
    let predicted = perturbative_output(a.q, &recipe.betas).normalized()?;
    let report = SynthReport {
        q: a.q,
        betas: recipe.betas,
        target: MatrixJson::from_vector(&target.to_fock_vector(4)?),
        predicted: MatrixJson::from_vector(&predicted),
        max_root_residual: residual,
    };
    run.write("recipe.json", &pretty(&report)?)?;
    for (k, b) in recipe.betas.iter().enumerate() {
        println!("beta{} = {:+.9} {:+.9}i", k + 1, b.re, b.im);
    }
    let c = predicted.to_vec();
    println!(
        "predicted = ({:.6}) |0> + ({:.6}) |1> + ({:.6}) |2> + ({:.6}) |3>",
        c[0], c[1], c[2], c[3]
    );
    Ok(())
}

fn cmd_herald(run: &mut Run, a: &HeraldArgs) -> Result<()> {
    let mut config = match (&a.config, a.preset) {
        (Some(path), _) => {
            let text = run.read(path)?;
            serde_json::from_str::<HeraldConfig>(&text)?
        }
        (None, Some(p)) => HeraldConfig::from_recipe(&p.recipe(a.q.unwrap_or(DEFAULT_Q))),
        (None, None) => return Err(Error::invalid("herald needs --config or --preset")),
    };
    if a.config.is_some() {
        if let Some(q) = a.q {
            config.q = q;
        }
    }
    if let Some(d) = run.common.dim {
        config.signal_dim = d;
        config.idler_dim = d;
    }
    if let Some(v) = a.eta_signal {
        config.eta_signal = v;
    }
    if let Some(v) = a.eta_detector {
        config.eta_detector = v;
    }
    if let Some(v) = a.dark_prob {
        config.dark_prob = v;
    }

    let outcome = herald(&config)?;
    for w in &outcome.warnings {
        eprintln!("warning: {w}");
    }
    if run.common.strict && !outcome.is_trustworthy() {
        return Err(Error::Numerical(format!(
            "{} truncation warning(s) with --strict",
            outcome.warnings.len()
        )));
    }
    let predicted = perturbative_output(config.q, &config.betas)
        .normalized()?
        .resized(config.signal_dim)?;
    let report = HeraldReport {
        probability: outcome.probability,
        fidelity_to_prediction: crate::fock::fidelity(&outcome.rho, &predicted)?,
        metrics: tomo::metrics(&outcome.rho),
        warnings: outcome.warnings.clone(),
    };
    run.write("config.json", &pretty(&config)?)?;
    run.write("outcome.json", &(io::outcome_to_json(&outcome)? + "\n"))?;
    run.write("herald_report.json", &pretty(&report)?)?;
    println!("probability = {:.6e}", report.probability);
    println!("fidelity_to_prediction = {:.6}", report.fidelity_to_prediction);
    for (n, p) in report.metrics.populations.iter().enumerate() {
        println!("rho{n}{n} = {p:.6}");
    }
    Ok(())
}

fn cmd_wigner(run: &mut Run, a: &WignerArgs) -> Result<()> {
    let rho = match (&a.rho, a.fock) {
        (Some(path), _) => read_density(run, path)?,
        (None, Some(n)) => DensityOperator::fock(n, (n + 1).max(4))?,
        (None, None) => return Err(Error::invalid("wigner needs --rho or --fock")),
    };
    let spec = a.grid.unwrap_or_default();
    let grid = wigner::wigner_grid(&rho, &spec)?;
    let report = NegativityReport {
        cut_angle: a.cut_angle,
        negative_intervals: wigner::count_negative_intervals(&rho, &CutSpec::along(a.cut_angle))?,
        negative_volume: grid.negative_volume(),
        min_value: grid.min_value(),
        max_abs: grid.max_abs(),
        integral: grid.integral(),
    };
    match a.format {
        GridFormat::Csv => {
            let mut buf = Vec::new();
            grid.write_csv(&mut buf)?;
            run.write("wigner.csv", &String::from_utf8(buf).expect("csv is ascii"))?;
        }
        GridFormat::Json => {
            run.write("wigner.json", &(grid.to_json()? + "\n"))?;
        }
    }
    run.write("negativity.json", &pretty(&report)?)?;
    println!("negative_intervals = {}", report.negative_intervals);
    println!("negative_volume = {:.6}", report.negative_volume);
    println!("integral = {:.6}", report.integral);
    Ok(())
}

fn cmd_tomo(run: &mut Run, a: &TomoArgs) -> Result<()> {
    let mut settings = match &a.config {
        Some(path) => {
            let text = run.read(path)?;
            serde_json::from_str::<TomoSettings>(&text)?
        }
        None => TomoSettings::default(),
    };
    if let Some(d) = run.common.dim {
        settings.dim = d;
    }
    if let Some(m) = a.max_iters {
        settings.max_iters = m;
    }

    let (records, truth) = match (&a.rho, &a.records) {
        (Some(path), _) => {
            let truth = read_density(run, path)?;
            let schedule = PhaseSchedule::UniformScan { phases: a.phases };
            let records = tomo::sample_quadratures(&truth, a.samples, &schedule, run.common.seed)?;
            let mut buf = Vec::new();
            io::write_records_csv(&records, &mut buf)?;
            run.write("records.csv", &String::from_utf8(buf).expect("csv is ascii"))?;
            (records, Some(truth))
        }
        (None, Some(path)) => {
            let text = run.read(path)?;
            let records = if text.trim_start().starts_with('[') {
                io::records_from_json(&text)?
            } else {
                io::read_records_csv(text.as_bytes())?
            };
            (records, None)
        }
        (None, None) => return Err(Error::invalid("tomo needs --rho or --records")),
    };

    let recon = tomo::mle_reconstruct(&records, &settings)?;
    recon.rho.validate()?;
    let fidelity_to_truth = match &truth {
        Some(t) => {
            let d = t.dim().max(recon.rho.dim());
            Some(uhlmann_fidelity(&recon.rho.resized(d)?, &t.resized(d)?)?)
        }
        None => None,
    };
    if !recon.diagnostics.converged {
        eprintln!(
            "warning: reconstruction stopped after {} iterations without converging",
            recon.diagnostics.iterations
        );
    }
    let report = TomoReport {
        settings,
        diagnostics: recon.diagnostics,
        metrics: tomo::metrics(&recon.rho),
        fidelity_to_truth,
    };
    run.write("reconstruction.json", &(io::density_to_json(&recon.rho)? + "\n"))?;
    run.write("tomo_report.json", &pretty(&report)?)?;
    println!("records = {}", report.diagnostics.records);
    println!("iterations = {}", report.diagnostics.iterations);
    if let Some(f) = fidelity_to_truth {
        println!("fidelity_to_truth = {f:.6}");
    }
    Ok(())
}

fn cmd_metrics(run: &mut Run, a: &MetricsArgs) -> Result<()> {
    let rho = read_density(run, &a.rho)?;
    let metrics = tomo::metrics(&rho);
    let (fidelity_to_target, best_rotation) = match a.preset {
        Some(p) => {
            let d = rho.dim().max(4);
            let target: FockVector = p.target().to_fock_vector(d)?;
            let best = max_fidelity_over_rotation(&rho.resized(d)?, &target)?;
            (Some(best.fidelity), Some(best.theta))
        }
        None => (None, None),
    };
    let out = MetricsOutput {
        metrics,
        preset: a.preset.map(|p| p.name().to_string()),
        fidelity_to_target,
        best_rotation,
    };
    run.write("metrics.json", &pretty(&out)?)?;
    for (n, p) in out.metrics.populations.iter().enumerate() {
        println!("rho{n}{n} = {p:.6}");
    }
    println!("purity = {:.6}", out.metrics.purity);
    println!("mean_photon_number = {:.6}", out.metrics.mean_photon_number);
    if let Some(f) = fidelity_to_target {
        println!("fidelity_to_target = {f:.6}");
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_global_flags_after_subcommand() {
        let cli = Cli::try_parse_from([
            "photonsynth", "herald", "--preset", "fock3", "--q", "0.05", "--out", "x", "--strict", "--dim", "7",
        ])
        .unwrap();
        assert!(cli.common.strict);
        assert_eq!(cli.common.dim, Some(7));
        assert_eq!(cli.common.seed, DEFAULT_SEED);
        match cli.command {
            Command::Herald(h) => assert_eq!(h.preset, Some(Preset::Fock3)),
            _ => panic!("wrong subcommand"),
        }
    }

    #[test]
    fn grid_flag_parses() {
        let cli = Cli::try_parse_from(["photonsynth", "wigner", "--fock", "1", "--grid", "-2,2,-3,3,11,21"]).unwrap();
        match cli.command {
            Command::Wigner(w) => {
                let g = w.grid.unwrap();
                assert_eq!((g.nx, g.np), (11, 21));
                assert_eq!(g.p_min, -3.0);
            }
            _ => panic!("wrong subcommand"),
        }
    }

    #[test]
    fn exit_codes() {
        assert_eq!(exit_code(&Error::DegenerateTarget { c3_abs: 0.0 }), EXIT_INPUT);
        assert_eq!(exit_code(&Error::EmptyRecords), EXIT_INPUT);
        assert_eq!(exit_code(&Error::Numerical("x".into())), EXIT_NUMERICAL);
    }
}
