//! Argument handling and command execution for the `ksnudge` binary.

use std::fs;
use std::path::PathBuf;

use anyhow::{bail, Context};
use clap::{Args, Parser, Subcommand, ValueEnum};
use ksnudge::harness::{self, Execution, MethodSpec, RunArtifacts, ScenarioConfig, Summary};
use ksnudge::LawKind;

/// Environment variable naming the default output directory.
pub const OUT_ENV: &str = "KSNUDGE_OUT";
const DEFAULT_OUT: &str = "ksnudge-out";
const DEFAULT_SWEEP: [f64; 5] = [0.0, 0.05, 0.075, 0.1, 0.125];

#[derive(Debug, Parser)]
#[command(name = "ksnudge", version, about = "Nudging data assimilation for the Kuramoto-Sivashinsky equation")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Run one scenario and write its artifacts.
    Run(ScenarioArgs),
    /// Run several feedback laws side by side and report speedups.
    Compare(ScenarioArgs),
    /// Run the power law for a list of exponents.
    GammaSweep {
        #[command(flatten)]
        scenario: ScenarioArgs,
        /// Comma-separated exponents, e.g. 0,0.05,0.1
        #[arg(long, value_delimiter = ',')]
        gammas: Option<Vec<f64>>,
    },
    /// Run a scenario and report time-averaged spectra.
    Spectrum {
        #[command(flatten)]
        scenario: ScenarioArgs,
        /// Averaging window as `start,end`.
        #[arg(long, value_delimiter = ',')]
        window: Option<Vec<f64>>,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Preset {
    /// N = 8192, dt = 2^-13
    Full,
    /// N = 1024, dt = 2^-10
    Desk,
}

#[derive(Debug, Clone, Args)]
pub struct ScenarioArgs {
    /// Flat JSON scenario file; flags override its values.
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Base configuration that the file and flags are applied on top of.
    #[arg(long, value_enum, default_value = "full")]
    pub preset: Preset,
    #[arg(long)]
    pub lambda: Option<f64>,
    #[arg(long)]
    pub mu: Option<f64>,
    /// Exponent applied to every nonlinear method.
    #[arg(long)]
    pub gamma: Option<f64>,
    /// Grid size.
    #[arg(long)]
    pub n: Option<usize>,
    #[arg(long)]
    pub dt: Option<f64>,
    #[arg(long = "t-end")]
    pub t_end: Option<f64>,
    /// Number of observed Fourier modes.
    #[arg(long)]
    pub modes: Option<usize>,
    /// `fresh` or `chaotic`.
    #[arg(long)]
    pub init: Option<String>,
    /// Comma-separated laws: linear, power, hybrid, cc.
    #[arg(long, value_delimiter = ',')]
    pub methods: Option<Vec<String>>,
    /// Steps between recorded samples.
    #[arg(long)]
    pub stride: Option<usize>,
    /// Convergence threshold on the L2 error.
    #[arg(long)]
    pub threshold: Option<f64>,
    /// Output directory (default: $KSNUDGE_OUT, else ./ksnudge-out).
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Advance methods on worker threads.
    #[arg(long)]
    pub parallel: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Action {
    Run,
    Compare,
    GammaSweep,
    Spectrum,
}

/// A fully resolved command line.
#[derive(Debug, Clone, PartialEq)]
pub struct Invocation {
    pub action: Action,
    pub config: ScenarioConfig,
    pub out_dir: PathBuf,
    pub execution: Execution,
}

fn parse_methods(names: &[String], gamma: f64) -> anyhow::Result<Vec<MethodSpec>> {
    names
        .iter()
        .map(|name| {
            let kind: LawKind = name.parse()?;
            let gamma = if kind == LawKind::Linear { 0.0 } else { gamma };
            Ok(MethodSpec::new(kind, gamma))
        })
        .collect()
}

fn resolve(args: &ScenarioArgs) -> anyhow::Result<ScenarioConfig> {
    let base = match args.preset {
        Preset::Full => ScenarioConfig::full(),
        Preset::Desk => ScenarioConfig::desk(),
    };
    let mut cfg = match &args.config {
        None => base,
        Some(path) => {
            let text = fs::read_to_string(path)
                .with_context(|| format!("reading config {}", path.display()))?;
            let overlay: serde_json::Value = serde_json::from_str(&text)
                .with_context(|| format!("parsing config {}", path.display()))?;
            let serde_json::Value::Object(overlay) = overlay else {
                bail!("{}: config must be a flat JSON object", path.display());
            };
            let mut merged = serde_json::to_value(&base)?;
            let fields = merged.as_object_mut().expect("config serializes to an object");
            for (k, v) in overlay {
                fields.insert(k, v);
            }
            serde_json::from_value(merged)
                .with_context(|| format!("invalid config {}", path.display()))?
        }
    };
    if let Some(v) = args.lambda {
        cfg.lambda = v;
    }
    if let Some(v) = args.mu {
        cfg.mu = v;
    }
    if let Some(v) = args.n {
        cfg.n_points = v;
    }
    if let Some(v) = args.dt {
        cfg.dt = v;
    }
    if let Some(v) = args.t_end {
        cfg.t_end = v;
    }
    if let Some(v) = args.modes {
        cfg.mode_cutoff = v;
    }
    if let Some(v) = &args.init {
        cfg.init = v.parse()?;
    }
    if let Some(v) = args.stride {
        cfg.sample_stride = v;
    }
    if let Some(v) = args.threshold {
        cfg.threshold = v;
    }
    match (&args.methods, args.gamma) {
        (Some(names), gamma) => {
            let gamma = gamma.unwrap_or_else(|| {
                cfg.methods
                    .iter()
                    .find(|m| m.kind != LawKind::Linear)
                    .map_or(0.1, |m| m.gamma)
            });
            cfg.methods = parse_methods(names, gamma)?;
        }
        (None, Some(gamma)) => {
            for m in cfg.methods.iter_mut().filter(|m| m.kind != LawKind::Linear) {
                m.gamma = gamma;
            }
        }
        (None, None) => {}
    }
    Ok(cfg)
}

/// Parses `argv` (including the program name) into a validated invocation.
pub fn parse_and_validate<I, T>(argv: I) -> anyhow::Result<Invocation>
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = Cli::try_parse_from(argv)?;
    let env_out = std::env::var_os(OUT_ENV).map(PathBuf::from);
    invocation_from(cli, env_out)
}

fn invocation_from(cli: Cli, env_out: Option<PathBuf>) -> anyhow::Result<Invocation> {
    let (action, args) = match &cli.command {
        Command::Run(a) => (Action::Run, a),
        Command::Compare(a) => (Action::Compare, a),
        Command::GammaSweep { scenario, .. } => (Action::GammaSweep, scenario),
        Command::Spectrum { scenario, .. } => (Action::Spectrum, scenario),
    };
    let mut config = resolve(args)?;
    match &cli.command {
        Command::GammaSweep { gammas, .. } => {
            let gammas = gammas.clone().unwrap_or_else(|| DEFAULT_SWEEP.to_vec());
            config.methods = gammas
                .into_iter()
                .map(|g| MethodSpec::new(LawKind::Power, g))
                .collect();
        }
        Command::Spectrum {
            window: Some(w), ..
        } => {
            let [start, end] = w[..] else {
                bail!("--window takes exactly two values, got {}", w.len());
            };
            config.spectrum_window = [start, end];
        }
        Command::Compare(_) if config.methods.len() < 2 => {
            bail!("compare needs at least two methods");
        }
        _ => {}
    }
    config.validate()?;
    let out_dir = args
        .out
        .clone()
        .or(env_out)
        .unwrap_or_else(|| PathBuf::from(DEFAULT_OUT));
    Ok(Invocation {
        action,
        config,
        out_dir,
        execution: if args.parallel {
            Execution::Parallel
        } else {
            Execution::Serial
        },
    })
}

/// JSON rendering of an optional number, as it appears in `summary.json`.
fn json_num(v: Option<f64>) -> String {
    serde_json::to_string(&v).expect("numbers serialize")
}

/// Human-readable table; every number is printed exactly as serialized.
pub fn format_summary(summary: &Summary) -> String {
    let cfg = &summary.scenario;
    let mut out = format!(
        "N={} L={} lambda={} mu={} M={} dt={} t_end={} init={} steps={}\n",
        cfg.n_points,
        json_num(Some(cfg.length)),
        json_num(Some(cfg.lambda)),
        json_num(Some(cfg.mu)),
        cfg.mode_cutoff,
        json_num(Some(cfg.dt)),
        json_num(Some(cfg.t_end)),
        serde_json::to_string(&cfg.init).expect("enum serializes"),
        summary.steps,
    );
    out.push_str(&format!(
        "{:<16} {:>24} {:>24} {:>24}\n",
        "method", "t*", "speedup", "final_err_l2"
    ));
    for m in &summary.methods {
        out.push_str(&format!(
            "{:<16} {:>24} {:>24} {:>24}\n",
            m.label,
            json_num(m.convergence_time),
            json_num(m.speedup),
            json_num(Some(m.final_error_l2)),
        ));
    }
    out
}

fn format_spectra(r: &RunArtifacts) -> String {
    let cutoff = r.grid.dealias_cutoff();
    let describe = |label: &str, spectrum: &[f64]| {
        if spectrum.is_empty() {
            return format!("{label:<16} (no samples in window)\n");
        }
        let peak = spectrum.iter().copied().fold(0.0, f64::max);
        let floor = spectrum[1..=cutoff].iter().copied().fold(f64::INFINITY, f64::min);
        format!(
            "{label:<16} peak={} min_ratio_below_cutoff={}\n",
            json_num(Some(peak)),
            json_num(Some(floor / peak))
        )
    };
    let mut out = format!(
        "time-averaged spectra over [{}, {}]\n",
        r.config.spectrum_window[0], r.config.spectrum_window[1]
    );
    out.push_str(&describe("reference", &r.reference.spectrum));
    for m in &r.methods {
        out.push_str(&describe(&m.label, &m.spectrum));
    }
    out
}

/// Runs the scenario, writes artifacts and prints the summary.
pub fn execute(inv: &Invocation) -> anyhow::Result<RunArtifacts> {
    let artifacts = harness::run_scenario_with(&inv.config, inv.execution)?;
    harness::write_artifacts(&artifacts, &inv.out_dir)?;
    print!("{}", format_summary(&artifacts.summary()));
    if inv.action == Action::Spectrum {
        print!("{}", format_spectra(&artifacts));
    }
    println!("artifacts written to {}", inv.out_dir.display());
    Ok(artifacts)
}
