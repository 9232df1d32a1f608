//! Command-line driver.
//!
//! Every command resolves its arguments into a [`RunConfig`], runs it and
//! embeds the config in its output: as a `config` field in JSON, or as a
//! leading `# config: {...}` line in CSV. `dimcert rerun <file>` reads that
//! config back and reproduces the output byte for byte.

use std::fs;
use std::io::Write as _;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::{Deserialize, Serialize};
use serde_json::json;

use crate::boundary::{
    classify_point, curve_table, fmt, region_scatter, write_curve_csv, write_scatter_csv,
    ClassifyMode,
};
use crate::correlation::CorrelationData;
use crate::criteria::compare_all;
use crate::error::{Error, Result};
use crate::moments::exact_moments;
use crate::qmat::{
    family_state, isotropic, max_entangled, random_mixed, random_pure, random_pure_with_rank,
    read_state, rho_w, DensityMatrix, Family,
};
use crate::randsim::{
    detect_with_geometry, noise_tolerance, predicted_variance, Estimator, Geometry, SamplingPath,
    DEFAULT_R8_SAMPLES,
};
use crate::rng::{stream, Domain};

pub const DEFAULT_SEED: u64 = 2024;
pub const THREADS_ENV: &str = "DIMCERT_THREADS";

#[derive(Parser, Debug)]
#[command(
    name = "dimcert",
    version,
    about = "Schmidt-number certification for bipartite qudit states"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Lower boundary curves, two-norm lines and (d = 3) outer curves as CSV.
    Boundary(BoundaryArgs),
    /// Every criterion plus the exact moment classification, as JSON.
    Certify(CertifyArgs),
    /// Simulated randomized measurements with a confidence certificate.
    Simulate(SimulateArgs),
    /// Exact moments of random states.
    Scatter(ScatterArgs),
    /// White-noise thresholds of the isotropic family.
    NoiseTolerance(NoiseArgs),
    /// Re-run the config embedded in an earlier output.
    Rerun(RerunArgs),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum StateName {
    MaxEntangled,
    Isotropic,
    RhoW,
    FamilyA,
    FamilyB,
    FamilyC,
    FamilyD,
    RandomPure,
    RandomMixed,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Csv,
    Json,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum PathArg {
    Haar,
    Bloch,
}

impl StateName {
    pub fn label(self) -> String {
        self.to_possible_value()
            .map_or_else(String::new, |v| v.get_name().to_string())
    }
}

impl From<PathArg> for SamplingPath {
    fn from(p: PathArg) -> Self {
        match p {
            PathArg::Haar => SamplingPath::HaarObservable,
            PathArg::Bloch => SamplingPath::BlochSphere,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum GeometryArg {
    Ellipse,
    Rectangle,
}

#[derive(Args, Debug, Clone)]
pub struct StateArgs {
    /// Named state.
    #[arg(long, value_enum)]
    pub state: Option<StateName>,
    /// JSON state file with dim_a, dim_b, re, im.
    #[arg(long)]
    pub state_file: Option<PathBuf>,
    /// Local dimension (default 3).
    #[arg(long)]
    pub d: Option<usize>,
    /// Noise or mixing parameter.
    #[arg(long)]
    pub p: Option<f64>,
    /// Schmidt weight parameter of families B and C.
    #[arg(long)]
    pub lambda: Option<f64>,
    /// Schmidt rank of max-entangled and random-pure, ancilla rank of random-mixed.
    #[arg(long)]
    pub r: Option<usize>,
}

#[derive(Args, Debug)]
pub struct BoundaryArgs {
    #[arg(long, default_value_t = 3)]
    pub d: usize,
    /// Comma-separated Schmidt numbers (default 1..=d).
    #[arg(long, value_delimiter = ',')]
    pub r: Vec<usize>,
    #[arg(long, default_value_t = 500)]
    pub grid: usize,
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = Format::Csv)]
    pub format: Format,
}

#[derive(Args, Debug)]
pub struct CertifyArgs {
    #[command(flatten)]
    pub state: StateArgs,
    /// Seed for random named states.
    #[arg(long, default_value_t = DEFAULT_SEED)]
    pub seed: u64,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Args, Debug)]
pub struct SimulateArgs {
    #[command(flatten)]
    pub state: StateArgs,
    #[arg(long, default_value_t = 1000)]
    pub n: usize,
    #[arg(long, default_value_t = DEFAULT_SEED)]
    pub seed: u64,
    /// Confidence level in standard deviations.
    #[arg(long, default_value_t = 3.0)]
    pub k: f64,
    /// Sampling path (default haar for odd d, bloch otherwise).
    #[arg(long, value_enum)]
    pub path: Option<PathArg>,
    #[arg(long, value_enum, default_value_t = GeometryArg::Ellipse)]
    pub geometry: GeometryArg,
    /// Eighth-moment samples for predicted variances; 0 skips the prediction.
    #[arg(long, default_value_t = DEFAULT_R8_SAMPLES)]
    pub r8_samples: usize,
    /// Write the raw correlators to this CSV (one `x` per row).
    #[arg(long)]
    pub samples_out: Option<PathBuf>,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Args, Debug)]
pub struct ScatterArgs {
    #[arg(long, default_value_t = 3)]
    pub d: usize,
    #[arg(long, default_value_t = 10_000)]
    pub n: usize,
    #[arg(long, default_value_t = DEFAULT_SEED)]
    pub seed: u64,
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = Format::Csv)]
    pub format: Format,
}

#[derive(Args, Debug)]
pub struct NoiseArgs {
    #[arg(long, default_value_t = 3)]
    pub d: usize,
    /// Comma-separated target bounds (default 2..=d).
    #[arg(long, value_delimiter = ',')]
    pub r: Vec<usize>,
    #[arg(long, default_value_t = 10_000)]
    pub n: usize,
    #[arg(long, default_value_t = 2.0)]
    pub k: f64,
    #[arg(long, default_value_t = DEFAULT_SEED)]
    pub seed: u64,
    #[arg(long, value_enum)]
    pub path: Option<PathArg>,
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = Format::Json)]
    pub format: Format,
}

#[derive(Args, Debug)]
pub struct RerunArgs {
    /// Output of an earlier run (JSON or CSV).
    pub input: PathBuf,
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Raw-sample CSV for a rerun simulation.
    #[arg(long)]
    pub samples_out: Option<PathBuf>,
}

/// A state source with every default filled in.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "source", rename_all = "snake_case")]
pub enum StateSpec {
    Named {
        name: StateName,
        d: usize,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        p: Option<f64>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        lambda: Option<f64>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        r: Option<usize>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        seed: Option<u64>,
    },
    File {
        path: PathBuf,
    },
}

/// Fully resolved run configuration, echoed into every output.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "command", rename_all = "kebab-case")]
pub enum RunConfig {
    Boundary {
        d: usize,
        r: Vec<usize>,
        grid: usize,
        format: Format,
    },
    Certify {
        state: StateSpec,
    },
    Simulate {
        state: StateSpec,
        n_tot: usize,
        seed: u64,
        k_sigma: f64,
        path: SamplingPath,
        geometry: Geometry,
        r8_samples: usize,
    },
    Scatter {
        d: usize,
        n_states: usize,
        seed: u64,
        format: Format,
    },
    NoiseTolerance {
        d: usize,
        r: Vec<usize>,
        n_tot: usize,
        k_sigma: f64,
        seed: u64,
        path: SamplingPath,
        format: Format,
    },
}

fn resolve_state(args: &StateArgs, seed: u64) -> Result<StateSpec> {
    match (&args.state, &args.state_file) {
        (Some(_), Some(_)) => Err(Error::InvalidParameter(
            "give either --state or --state-file, not both".into(),
        )),
        (None, None) => Err(Error::InvalidParameter(
            "a state is required: --state NAME or --state-file PATH".into(),
        )),
        (None, Some(path)) => Ok(StateSpec::File { path: path.clone() }),
        (Some(name), None) => {
            let name = *name;
            let fixed_d3 = matches!(
                name,
                StateName::RhoW
                    | StateName::FamilyA
                    | StateName::FamilyB
                    | StateName::FamilyC
                    | StateName::FamilyD
            );
            let d = if name == StateName::RhoW {
                4
            } else if fixed_d3 {
                3
            } else {
                args.d.unwrap_or(3)
            };
            if fixed_d3 && args.d.is_some_and(|given| given != d) {
                return Err(Error::InvalidParameter(format!(
                    "state {} has fixed local dimension {d}",
                    name.label()
                )));
            }
            let need = |v: Option<f64>, flag: &str| {
                v.ok_or_else(|| {
                    Error::InvalidParameter(format!("state {} needs --{flag}", name.label()))
                })
            };
            let (p, lambda, r, seed) = match name {
                StateName::MaxEntangled => (None, None, Some(args.r.unwrap_or(d)), None),
                StateName::Isotropic | StateName::FamilyA | StateName::FamilyD => {
                    (Some(need(args.p, "p")?), None, None, None)
                }
                StateName::FamilyB | StateName::FamilyC => {
                    (None, Some(need(args.lambda, "lambda")?), None, None)
                }
                StateName::RhoW => (None, None, None, None),
                StateName::RandomPure => (None, None, args.r, Some(seed)),
                StateName::RandomMixed => (None, None, Some(args.r.unwrap_or(d * d)), Some(seed)),
            };
            Ok(StateSpec::Named {
                name,
                d,
                p,
                lambda,
                r,
                seed,
            })
        }
    }
}

pub fn build_state(spec: &StateSpec) -> Result<DensityMatrix> {
    let (name, d, p, lambda, r, seed) = match spec {
        StateSpec::File { path } => return read_state(path),
        StateSpec::Named {
            name,
            d,
            p,
            lambda,
            r,
            seed,
        } => (*name, *d, *p, *lambda, *r, seed.unwrap_or(DEFAULT_SEED)),
    };
    let p = || p.ok_or_else(|| Error::InvalidParameter("missing p".into()));
    let lambda = || lambda.ok_or_else(|| Error::InvalidParameter("missing lambda".into()));
    match name {
        StateName::MaxEntangled => Ok(max_entangled(r.unwrap_or(d), d)?.to_density()),
        StateName::Isotropic => isotropic(d, p()?),
        StateName::RhoW => Ok(rho_w()),
        StateName::FamilyA => family_state(Family::A, p()?),
        StateName::FamilyB => family_state(Family::B, lambda()?),
        StateName::FamilyC => family_state(Family::C, lambda()?),
        StateName::FamilyD => family_state(Family::D, p()?),
        StateName::RandomPure => match r {
            Some(k) => {
                let mut rng = stream(seed, Domain::State, 2);
                Ok(random_pure_with_rank(&mut rng, d, d, k)?.to_density())
            }
            None => Ok(random_pure(d, d, seed)?.to_density()),
        },
        StateName::RandomMixed => random_mixed(d, d, r.unwrap_or(d * d), seed),
    }
}

fn resolve_path(path: Option<PathArg>, d: usize) -> SamplingPath {
    path.map_or_else(|| SamplingPath::default_for(d), SamplingPath::from)
}

fn state_dim(spec: &StateSpec) -> Option<usize> {
    match spec {
        StateSpec::Named { d, .. } => Some(*d),
        StateSpec::File { .. } => None,
    }
}

/// Output paths are not part of the config, so reruns may write elsewhere.
pub struct Outputs {
    pub out: Option<PathBuf>,
    pub samples_out: Option<PathBuf>,
}

pub fn resolve(command: Command) -> Result<(RunConfig, Outputs)> {
    Ok(match command {
        Command::Boundary(a) => {
            let r = if a.r.is_empty() {
                (1..=a.d).collect()
            } else {
                a.r
            };
            (
                RunConfig::Boundary {
                    d: a.d,
                    r,
                    grid: a.grid,
                    format: a.format,
                },
                Outputs {
                    out: a.out,
                    samples_out: None,
                },
            )
        }
        Command::Certify(a) => (
            RunConfig::Certify {
                state: resolve_state(&a.state, a.seed)?,
            },
            Outputs {
                out: a.out,
                samples_out: None,
            },
        ),
        Command::Simulate(a) => {
            let state = resolve_state(&a.state, a.seed)?;
            let d = match state_dim(&state) {
                Some(d) => d,
                None => build_state(&state)?.dim_a(),
            };
            (
                RunConfig::Simulate {
                    state,
                    n_tot: a.n,
                    seed: a.seed,
                    k_sigma: a.k,
                    path: resolve_path(a.path, d),
                    geometry: match a.geometry {
                        GeometryArg::Ellipse => Geometry::Ellipse,
                        GeometryArg::Rectangle => Geometry::Rectangle,
                    },
                    r8_samples: a.r8_samples,
                },
                Outputs {
                    out: a.out,
                    samples_out: a.samples_out,
                },
            )
        }
        Command::Scatter(a) => (
            RunConfig::Scatter {
                d: a.d,
                n_states: a.n,
                seed: a.seed,
                format: a.format,
            },
            Outputs {
                out: a.out,
                samples_out: None,
            },
        ),
        Command::NoiseTolerance(a) => {
            let r = if a.r.is_empty() {
                (2..=a.d).collect()
            } else {
                a.r
            };
            (
                RunConfig::NoiseTolerance {
                    d: a.d,
                    r,
                    n_tot: a.n,
                    k_sigma: a.k,
                    seed: a.seed,
                    path: resolve_path(a.path, a.d),
                    format: a.format,
                },
                Outputs {
                    out: a.out,
                    samples_out: None,
                },
            )
        }
        Command::Rerun(a) => {
            let text = fs::read_to_string(&a.input).map_err(|e| Error::io(&a.input, e))?;
            (
                extract_config(&text)?,
                Outputs {
                    out: a.out,
                    samples_out: a.samples_out,
                },
            )
        }
    })
}

const CSV_CONFIG_PREFIX: &str = "# config: ";

/// Config embedded in a JSON or CSV output.
pub fn extract_config(text: &str) -> Result<RunConfig> {
    let parse = |s: &str| {
        serde_json::from_str::<RunConfig>(s)
            .map_err(|e| Error::Parse(format!("embedded config: {e}")))
    };
    if let Some(rest) = text.strip_prefix(CSV_CONFIG_PREFIX) {
        return parse(rest.lines().next().unwrap_or(""));
    }
    let value: serde_json::Value = serde_json::from_str(text)
        .map_err(|_| Error::Parse("output has no embedded config".into()))?;
    let config = value
        .get("config")
        .ok_or_else(|| Error::Parse("output has no embedded config".into()))?;
    parse(&config.to_string())
}

fn json_text(value: &serde_json::Value) -> Result<String> {
    let mut s = serde_json::to_string_pretty(value).map_err(|e| Error::Parse(e.to_string()))?;
    s.push('\n');
    Ok(s)
}

fn csv_text(config: &RunConfig, body: impl FnOnce(&mut Vec<u8>) -> Result<()>) -> Result<String> {
    let mut buf = Vec::new();
    let header = serde_json::to_string(config).map_err(|e| Error::Parse(e.to_string()))?;
    writeln!(buf, "{CSV_CONFIG_PREFIX}{header}").map_err(|e| Error::io("csv output", e))?;
    body(&mut buf)?;
    String::from_utf8(buf).map_err(|e| Error::Parse(e.to_string()))
}

fn write_file(path: &Path, text: &str) -> Result<()> {
    fs::write(path, text).map_err(|e| Error::io(path, e))
}

/// Run a resolved config and return the main output text.
pub fn execute(config: &RunConfig, samples_out: Option<&Path>) -> Result<String> {
    match config {
        RunConfig::Boundary { d, r, grid, format } => {
            let table = curve_table(*d, r, *grid)?;
            match format {
                Format::Csv => csv_text(config, |buf| write_curve_csv(buf, &table)),
                Format::Json => json_text(&json!({ "config": config, "curves": table })),
            }
        }
        RunConfig::Certify { state } => {
            let rho = build_state(state)?;
            let report = compare_all(&rho)?;
            let (moments, moment_certificate) = if rho.dim_a() == rho.dim_b() {
                let m = exact_moments(&CorrelationData::canonical(&rho)?)?;
                let c = classify_point(m.s2, m.s4, rho.dim_a(), &ClassifyMode::Exact)?;
                (Some(m), Some(c))
            } else {
                (None, None)
            };
            let max_bound = report.max_bound.max(
                moment_certificate
                    .as_ref()
                    .map_or(1, |c| c.certified_lower_bound),
            );
            json_text(&json!({
                "config": config,
                "dims": [rho.dim_a(), rho.dim_b()],
                "max_bound": max_bound,
                "report": report,
                "moments": moments,
                "moment_certificate": moment_certificate,
            }))
        }
        RunConfig::Simulate {
            state,
            n_tot,
            seed,
            k_sigma,
            path,
            geometry,
            r8_samples,
        } => {
            let rho = build_state(state)?;
            let mut detection =
                detect_with_geometry(&rho, *n_tot, *k_sigma, *seed, *path, *geometry)?;
            if *r8_samples > 0 {
                detection.estimate.predicted =
                    Some(predicted_variance(&rho, *path, *n_tot, *r8_samples, *seed)?);
            }
            if let Some(p) = samples_out {
                let xs = Estimator::new(&rho, *path)?.sample_values(*n_tot, *seed);
                let mut text = String::with_capacity(26 * xs.len() + 2);
                text.push_str("x\n");
                for x in xs {
                    text.push_str(&fmt(x));
                    text.push('\n');
                }
                write_file(p, &text)?;
            }
            let exact = if rho.dim_a() == rho.dim_b() {
                Some(exact_moments(&CorrelationData::canonical(&rho)?)?)
            } else {
                None
            };
            json_text(&json!({
                "config": config,
                "estimate": detection.estimate,
                "certificate": detection.certificate,
                "k_sigma": detection.k_sigma,
                "geometry": detection.geometry,
                "exact_moments": exact,
            }))
        }
        RunConfig::Scatter {
            d,
            n_states,
            seed,
            format,
        } => {
            let points = region_scatter(*d, *n_states, *seed)?;
            match format {
                Format::Csv => csv_text(config, |buf| write_scatter_csv(buf, &points)),
                Format::Json => json_text(&json!({ "config": config, "points": points })),
            }
        }
        RunConfig::NoiseTolerance {
            d,
            r,
            n_tot,
            k_sigma,
            seed,
            path,
            format,
        } => {
            let results = r
                .iter()
                .map(|&b| noise_tolerance(*d, b, *n_tot, *k_sigma, *seed, *path))
                .collect::<Result<Vec<_>>>()?;
            match format {
                Format::Json => json_text(&json!({ "config": config, "thresholds": results })),
                Format::Csv => csv_text(config, |buf| {
                    let io = |e| Error::io("csv output", e);
                    writeln!(buf, "target_bound,analytic,exact_moments,finite").map_err(io)?;
                    for t in &results {
                        let finite = t.finite.map(fmt).unwrap_or_default();
                        writeln!(
                            buf,
                            "{},{},{},{}",
                            t.target_bound,
                            fmt(t.analytic),
                            fmt(t.exact_moments),
                            finite
                        )
                        .map_err(io)?;
                    }
                    Ok(())
                }),
            }
        }
    }
}

fn configure_threads() -> Result<()> {
    let Ok(value) = std::env::var(THREADS_ENV) else {
        return Ok(());
    };
    let n: usize = value.trim().parse().map_err(|_| {
        Error::InvalidParameter(format!("{THREADS_ENV} = {value:?} is not a thread count"))
    })?;
    // A pool may already exist when called twice in one process; that is harmless.
    let _ = rayon::ThreadPoolBuilder::new()
        .num_threads(n)
        .build_global();
    Ok(())
}

pub fn run(cli: Cli) -> Result<()> {
    configure_threads()?;
    let (config, outputs) = resolve(cli.command)?;
    let text = execute(&config, outputs.samples_out.as_deref())?;
    match &outputs.out {
        Some(path) => write_file(path, &text),
        None => {
            let mut stdout = std::io::stdout().lock();
            stdout
                .write_all(text.as_bytes())
                .map_err(|e| Error::io("<stdout>", e))
        }
    }
}

/// Parse arguments, run, and return the process exit code: 0 on success,
/// 1 on invalid input, 2 on numerical-consistency failures.
pub fn main_with_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return code;
        }
    };
    match run(cli) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}
