//! Command-line front end of the `dle` binary.
//!
//! Every subcommand accepts `--config FILE`, a JSON object whose keys are the
//! long flag names; flags given on the command line override file values.

use std::ffi::OsString;
use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::str::FromStr;

use clap::{Args, Parser, Subcommand};
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};
use serde_json::{Map, Value};

use crate::bessel::{drift_estimate, simulate_chain_stream, ChainConfig, DriftEstimate};
use crate::error::{Error, Result};
use crate::experiments::{
    continuity_bound_sweep, convergence_sweep, fmt_real, perturbation_sweep, random_driver_pairs,
    reflection_test, stationarity_test, ContinuityReport, ConvergenceConfig, DistributionConfig,
    DistributionReport, PerturbationReport, continuity_threshold,
};
use crate::forest::{build_forest, forest_stats, ForestStats, HullForest, EPS_ROOT};
use crate::halfplane::SlitChain;
use crate::loewner::capacity_estimate;
use crate::measure::{monotone_convolve, CompactMeasure, ConvolutionGrid};
use crate::parallel::try_par_map;
use crate::svg::render_forest;
use crate::walk::{sample_walk, IncrementLaw};

/// Exit code for configuration and usage errors.
pub const EXIT_CONFIG: i32 = 1;
/// Exit code for numerical failures.
pub const EXIT_NUMERICAL: i32 = 2;

#[derive(Parser)]
#[command(name = "dle", version, about = "Discrete Loewner evolution toolkit")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Sample a walk, build its slit chain and hull forest, write JSON.
    Simulate(SimulateArgs),
    /// Render the hull forest of a sampled chain as SVG.
    Hulls(SimulateArgs),
    /// Bessel-type chain trajectories and drift tables as CSV.
    Chain(ChainArgs),
    /// Discrete versus continuous flow convergence sweep.
    Converge(ConvergeArgs),
    /// Stationarity, reflection and continuity test suites.
    Tests(TestsArgs),
    /// Monotone convolution of two measure files.
    Convolve(ConvolveArgs),
}

/// Increment law given by name or, in a config file, as a full object.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(untagged)]
enum LawArg {
    Name(String),
    Law(IncrementLaw),
}

impl FromStr for LawArg {
    type Err = std::convert::Infallible;
    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        Ok(Self::Name(s.to_string()))
    }
}

impl LawArg {
    fn resolve(&self, kappa: f64) -> Result<IncrementLaw> {
        match self {
            Self::Name(name) => IncrementLaw::from_name(name, kappa),
            Self::Law(law) => law.clone().validated(),
        }
    }
}

fn law_or_default(law: &Option<LawArg>, default: &str, kappa: f64) -> Result<IncrementLaw> {
    law.clone()
        .unwrap_or_else(|| LawArg::Name(default.into()))
        .resolve(kappa)
}

#[derive(Args, Debug, Default, Serialize, Deserialize)]
#[command(allow_negative_numbers = true)]
#[serde(rename_all = "kebab-case", deny_unknown_fields)]
struct SimulateArgs {
    /// JSON file with default values for the flags.
    #[arg(long)]
    #[serde(skip)]
    config: Option<PathBuf>,
    #[arg(long)]
    kappa: Option<f64>,
    /// Walk scale.
    #[arg(long)]
    n: Option<u32>,
    /// Number of steps.
    #[arg(long)]
    m: Option<usize>,
    /// bernoulli, uniform, gaussian or degenerate.
    #[arg(long)]
    law: Option<LawArg>,
    #[arg(long)]
    seed: Option<u64>,
    /// JSON output (simulate); stdout when absent.
    #[arg(long)]
    out: Option<PathBuf>,
    /// SVG output (hulls); stdout when absent.
    #[arg(long)]
    svg: Option<PathBuf>,
}

#[derive(Args, Debug, Default, Serialize, Deserialize)]
#[command(allow_negative_numbers = true)]
#[serde(rename_all = "kebab-case", deny_unknown_fields)]
struct ChainArgs {
    #[arg(long)]
    #[serde(skip)]
    config: Option<PathBuf>,
    #[arg(long)]
    kappa: Option<f64>,
    /// Starting value.
    #[arg(long)]
    y0: Option<f64>,
    /// Steps per trajectory.
    #[arg(long = "M")]
    #[serde(rename = "M")]
    m: Option<usize>,
    #[arg(long)]
    replicas: Option<usize>,
    /// Law of the unit-variance increments.
    #[arg(long)]
    law: Option<LawArg>,
    #[arg(long)]
    seed: Option<u64>,
    /// Write every `every`-th step of each trajectory.
    #[arg(long)]
    every: Option<usize>,
    /// Trajectory CSV (replica, step, y); stdout when absent.
    #[arg(long)]
    csv: Option<PathBuf>,
    /// Levels at which to estimate the one-step drift.
    #[arg(long, value_delimiter = ',')]
    drift_y: Option<Vec<f64>>,
    #[arg(long)]
    drift_samples: Option<usize>,
    /// Drift table CSV.
    #[arg(long)]
    drift_csv: Option<PathBuf>,
}

#[derive(Args, Debug, Default, Serialize, Deserialize)]
#[command(allow_negative_numbers = true)]
#[serde(rename_all = "kebab-case", deny_unknown_fields)]
struct ConvergeArgs {
    #[arg(long)]
    #[serde(skip)]
    config: Option<PathBuf>,
    #[arg(long)]
    kappa: Option<f64>,
    #[arg(long)]
    law: Option<LawArg>,
    /// Horizon.
    #[arg(long)]
    t: Option<f64>,
    /// Comma separated increasing walk scales.
    #[arg(long, value_delimiter = ',')]
    n_list: Option<Vec<u32>>,
    #[arg(long)]
    replicas: Option<usize>,
    #[arg(long)]
    seed: Option<u64>,
    /// Points on the comparison line.
    #[arg(long)]
    points: Option<usize>,
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long)]
    csv: Option<PathBuf>,
}

#[derive(Args, Debug, Default, Serialize, Deserialize)]
#[command(allow_negative_numbers = true)]
#[serde(rename_all = "kebab-case", deny_unknown_fields)]
struct TestsArgs {
    #[arg(long)]
    #[serde(skip)]
    config: Option<PathBuf>,
    /// stationarity, reflection, continuity, perturbation or all.
    #[arg(long)]
    which: Option<String>,
    #[arg(long)]
    kappa: Option<f64>,
    #[arg(long)]
    law: Option<LawArg>,
    #[arg(long)]
    n: Option<u32>,
    /// Steps before the increment (stationarity) or chain length (reflection).
    #[arg(long)]
    m: Option<usize>,
    /// Increment length.
    #[arg(long)]
    k: Option<usize>,
    #[arg(long)]
    replicas: Option<usize>,
    #[arg(long)]
    seed: Option<u64>,
    /// Horizon of the continuity sweeps.
    #[arg(long)]
    t: Option<f64>,
    #[arg(long)]
    delta: Option<f64>,
    /// Random driver pairs per continuity sweep.
    #[arg(long)]
    pairs: Option<usize>,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args, Debug, Default, Serialize, Deserialize)]
#[command(allow_negative_numbers = true)]
#[serde(rename_all = "kebab-case", deny_unknown_fields)]
struct ConvolveArgs {
    #[arg(long)]
    #[serde(skip)]
    config: Option<PathBuf>,
    /// Measure file of the left factor.
    #[arg(long)]
    mu: Option<PathBuf>,
    /// Measure file of the right factor.
    #[arg(long)]
    nu: Option<PathBuf>,
    #[arg(long)]
    cells: Option<usize>,
    #[arg(long)]
    out: Option<PathBuf>,
}

/// Run the CLI on `args` (including the program name) and return the exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { EXIT_CONFIG } else { 0 };
        }
    };
    match dispatch(cli.command) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {e}");
            exit_code(&e)
        }
    }
}

/// Exit code associated with an error.
pub fn exit_code(e: &Error) -> i32 {
    match e {
        Error::Config(_) | Error::Domain(_) => EXIT_CONFIG,
        Error::Numerical(_) | Error::BoundaryCollision { .. } => EXIT_NUMERICAL,
    }
}

fn dispatch(command: Command) -> Result<()> {
    match command {
        Command::Simulate(a) => {
            let path = a.config.clone();
            simulate(merged(a, path.as_deref())?)
        }
        Command::Hulls(a) => {
            let path = a.config.clone();
            hulls(merged(a, path.as_deref())?)
        }
        Command::Chain(a) => {
            let path = a.config.clone();
            chain(merged(a, path.as_deref())?)
        }
        Command::Converge(a) => {
            let path = a.config.clone();
            converge(merged(a, path.as_deref())?)
        }
        Command::Tests(a) => {
            let path = a.config.clone();
            tests(merged(a, path.as_deref())?)
        }
        Command::Convolve(a) => {
            let path = a.config.clone();
            convolve(merged(a, path.as_deref())?)
        }
    }
}

fn config_err(context: &str, e: impl std::fmt::Display) -> Error {
    Error::Config(format!("{context}: {e}"))
}

/// Overlay the flags given on the command line onto the config file values.
fn merged<T: Serialize + DeserializeOwned>(flags: T, config: Option<&Path>) -> Result<T> {
    let mut base = match config {
        Some(path) => {
            let text = std::fs::read_to_string(path).map_err(|e| config_err(&path.display().to_string(), e))?;
            match serde_json::from_str(&text).map_err(|e| config_err("malformed config", e))? {
                Value::Object(map) => map,
                _ => return Err(Error::Config("config must be a JSON object".into())),
            }
        }
        None => Map::new(),
    };
    if let Value::Object(over) = serde_json::to_value(&flags).map_err(|e| config_err("flags", e))? {
        for (k, v) in over {
            if !v.is_null() {
                base.insert(k, v);
            }
        }
    }
    serde_json::from_value(Value::Object(base)).map_err(|e| config_err("malformed config", e))
}

fn open_output(path: &Option<PathBuf>) -> Result<Box<dyn Write>> {
    Ok(match path {
        Some(p) => Box::new(BufWriter::new(
            File::create(p).map_err(|e| config_err(&p.display().to_string(), e))?,
        )),
        None => Box::new(BufWriter::new(io::stdout().lock())),
    })
}

fn write_output(path: &Option<PathBuf>, content: &str) -> Result<()> {
    let mut w = open_output(path)?;
    w.write_all(content.as_bytes())
        .and_then(|()| w.flush())
        .map_err(|e| config_err("write failed", e))
}

fn to_json<T: Serialize>(value: &T) -> Result<String> {
    serde_json::to_string_pretty(value)
        .map(|s| s + "\n")
        .map_err(|e| Error::Numerical(format!("serialisation failed: {e}")))
}

fn require<T>(value: Option<T>, flag: &str) -> Result<T> {
    value.ok_or_else(|| Error::Config(format!("missing required --{flag}")))
}

#[derive(Serialize)]
struct SimulateOutput {
    kappa: f64,
    n: u32,
    m: usize,
    seed: u64,
    law: IncrementLaw,
    drivers: Vec<f64>,
    /// Exact half-plane capacity `m / n`.
    capacity: f64,
    /// Capacity fitted from the expansion at infinity.
    capacity_estimate: f64,
    hull_endpoints: Option<(f64, f64)>,
    stats: ForestStats,
    forest: HullForest,
}

fn sample_chain(a: &SimulateArgs) -> Result<(f64, u32, usize, u64, IncrementLaw, SlitChain)> {
    let kappa = require(a.kappa, "kappa")?;
    let n = a.n.unwrap_or(1);
    let m = require(a.m, "m")?;
    let seed = a.seed.unwrap_or(0);
    let law = law_or_default(&a.law, "bernoulli", kappa)?;
    let chain = sample_walk(&law, n, m, seed)?.to_chain();
    Ok((kappa, n, m, seed, law, chain))
}

fn simulate(a: SimulateArgs) -> Result<()> {
    let (kappa, n, m, seed, law, chain) = sample_chain(&a)?;
    let forest = build_forest(&chain, EPS_ROOT)?;
    let out = SimulateOutput {
        kappa,
        n,
        m,
        seed,
        law,
        drivers: chain.drivers().to_vec(),
        capacity: chain.capacity(),
        capacity_estimate: capacity_estimate(|z| chain.eval(z), 1e3),
        hull_endpoints: chain.hull_endpoints(),
        stats: forest_stats(&forest),
        forest,
    };
    write_output(&a.out, &to_json(&out)?)
}

fn hulls(a: SimulateArgs) -> Result<()> {
    let (.., chain) = sample_chain(&a)?;
    let forest = build_forest(&chain, EPS_ROOT)?;
    write_output(&a.svg, &render_forest(&chain, &forest))
}

fn chain(a: ChainArgs) -> Result<()> {
    let kappa = require(a.kappa, "kappa")?;
    let law = law_or_default(&a.law, "bernoulli", 1.0)?;
    let cfg = ChainConfig {
        kappa,
        law: law.clone(),
        y0: require(a.y0, "y0")?,
        steps: require(a.m, "M")?,
        seed: a.seed.unwrap_or(0),
    };
    cfg.validate()?;
    let replicas = a.replicas.unwrap_or(1);
    let every = a.every.unwrap_or(1).max(1);
    let paths = try_par_map(replicas, |r| simulate_chain_stream(&cfg, r as u64))?;
    let mut w = open_output(&a.csv)?;
    let io_err = |e: io::Error| config_err("write failed", e);
    writeln!(w, "replica,step,y").map_err(io_err)?;
    for (r, path) in paths.iter().enumerate() {
        for (step, y) in path.iter().enumerate().step_by(every) {
            writeln!(w, "{r},{step},{}", fmt_real(*y)).map_err(io_err)?;
        }
    }
    w.flush().map_err(io_err)?;

    if let Some(levels) = &a.drift_y {
        let samples = a.drift_samples.unwrap_or(100_000);
        let rows: Vec<DriftEstimate> = levels
            .iter()
            .enumerate()
            .map(|(i, &y)| drift_estimate(y, kappa, &law, samples, cfg.seed.wrapping_add(i as u64)))
            .collect::<Result<_>>()?;
        let mut table = String::from("kappa,y,scaled_drift,scaled_drift_se,second_moment,second_moment_se,samples\n");
        for d in rows {
            table.push_str(&format!(
                "{},{},{},{},{},{},{}\n",
                fmt_real(d.kappa),
                fmt_real(d.y),
                fmt_real(d.scaled_drift),
                fmt_real(d.scaled_drift_se),
                fmt_real(d.second_moment),
                fmt_real(d.second_moment_se),
                d.samples
            ));
        }
        write_output(&a.drift_csv, &table)?;
    }
    Ok(())
}

fn converge(a: ConvergeArgs) -> Result<()> {
    let kappa = a.kappa.unwrap_or(4.0);
    let law = law_or_default(&a.law, "bernoulli", kappa)?;
    let mut cfg = ConvergenceConfig::new(
        law,
        a.t.unwrap_or(1.0),
        a.n_list.clone().unwrap_or_else(|| vec![4, 16, 64]),
        a.seed.unwrap_or(0),
    );
    cfg.replicas = a.replicas.unwrap_or(1);
    if let Some(p) = a.points {
        cfg.points = p;
    }
    let report = convergence_sweep(&cfg)?;
    if a.csv.is_some() {
        write_output(&a.csv, &report.to_csv())?;
    }
    if a.out.is_some() || a.csv.is_none() {
        write_output(&a.out, &to_json(&report)?)?;
    }
    Ok(())
}

#[derive(Serialize, Default)]
struct TestsOutput {
    #[serde(skip_serializing_if = "Option::is_none")]
    stationarity: Option<DistributionReport>,
    #[serde(skip_serializing_if = "Option::is_none")]
    reflection: Option<DistributionReport>,
    #[serde(skip_serializing_if = "Option::is_none")]
    continuity: Option<ContinuityReport>,
    #[serde(skip_serializing_if = "Option::is_none")]
    perturbation: Option<PerturbationReport>,
    passed: bool,
}

fn tests(a: TestsArgs) -> Result<()> {
    let which = a.which.clone().unwrap_or_else(|| "all".into());
    let run = |name: &str| which == "all" || which == name;
    if !["all", "stationarity", "reflection", "continuity", "perturbation"].contains(&which.as_str()) {
        return Err(Error::Config(format!("unknown test suite '{which}'")));
    }
    let kappa = a.kappa.unwrap_or(4.0);
    let seed = a.seed.unwrap_or(0);
    let dist = DistributionConfig {
        law: law_or_default(&a.law, "bernoulli", kappa)?,
        n: a.n.unwrap_or(1),
        replicas: a.replicas.unwrap_or(2000),
        seed,
    };
    let m = a.m.unwrap_or(10);
    let k = a.k.unwrap_or(5);
    let t = a.t.unwrap_or(0.1);
    let delta = a.delta.unwrap_or(0.5);
    let pairs = a.pairs.unwrap_or(100);

    let mut out = TestsOutput::default();
    let mut passed = true;
    if run("stationarity") {
        let r = stationarity_test(&dist, m, k)?;
        passed &= r.passes();
        out.stationarity = Some(r);
    }
    if run("reflection") {
        let r = reflection_test(&dist, m)?;
        passed &= r.passes();
        out.reflection = Some(r);
    }
    if run("continuity") {
        let drivers = random_driver_pairs(pairs, t, continuity_threshold(t, delta), seed)?;
        let r = continuity_bound_sweep(&drivers, t, delta, 1e-9)?;
        passed &= r.violations == 0;
        out.continuity = Some(r);
    }
    if run("perturbation") {
        let drivers = random_driver_pairs(pairs, t, 0.05, seed)?;
        let r = perturbation_sweep(&drivers, t, 1.0, 9, 1e-10)?;
        passed &= r.violations == 0;
        out.perturbation = Some(r);
    }
    out.passed = passed;
    write_output(&a.out, &to_json(&out)?)
}

#[derive(Serialize)]
struct ConvolveOutput {
    mean: f64,
    variance: f64,
    support: (f64, f64),
    measure: CompactMeasure,
}

fn read_measure(path: &Path) -> Result<CompactMeasure> {
    let text = std::fs::read_to_string(path).map_err(|e| config_err(&path.display().to_string(), e))?;
    serde_json::from_str(&text).map_err(|e| config_err(&format!("malformed measure {}", path.display()), e))
}

fn convolve(a: ConvolveArgs) -> Result<()> {
    let mu = read_measure(&require(a.mu.clone(), "mu")?)?;
    let nu = read_measure(&require(a.nu.clone(), "nu")?)?;
    let mut grid = ConvolutionGrid::default();
    if let Some(c) = a.cells {
        grid.cells = c;
    }
    let measure = monotone_convolve(&mu, &nu, &grid)?;
    let out = ConvolveOutput {
        mean: measure.mean(),
        variance: measure.variance(),
        support: measure.support(),
        measure,
    };
    write_output(&a.out, &to_json(&out)?)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn flags_override_config() {
        let dir = tempfile::tempdir().unwrap();
        let cfg = dir.path().join("c.json");
        std::fs::write(&cfg, r#"{"kappa": 2.0, "m": 7, "seed": 3}"#).unwrap();
        let flags = SimulateArgs {
            m: Some(9),
            ..Default::default()
        };
        let a: SimulateArgs = merged(flags, Some(&cfg)).unwrap();
        assert_eq!((a.kappa, a.m, a.seed), (Some(2.0), Some(9), Some(3)));
        std::fs::write(&cfg, r#"{"kapa": 2.0}"#).unwrap();
        assert!(merged(SimulateArgs::default(), Some(&cfg)).is_err());
    }

    #[test]
    fn law_from_config_object() {
        let dir = tempfile::tempdir().unwrap();
        let cfg = dir.path().join("c.json");
        std::fs::write(&cfg, r#"{"law": {"kind": "gaussian", "kappa": 2.0}}"#).unwrap();
        let a: SimulateArgs = merged(SimulateArgs::default(), Some(&cfg)).unwrap();
        let law = law_or_default(&a.law, "bernoulli", 9.0).unwrap();
        assert_eq!(law.variance(), 2.0);
    }

    #[test]
    fn exit_codes() {
        assert_eq!(run(["dle", "--help"]), 0);
        assert_eq!(run(["dle", "simulate", "--bogus"]), EXIT_CONFIG);
        assert_eq!(run(["dle", "frobnicate"]), EXIT_CONFIG);
        assert_eq!(run(["dle", "simulate", "--kappa", "-1", "--m", "3"]), EXIT_CONFIG);
        assert_eq!(exit_code(&Error::BoundaryCollision { time: 1.0 }), EXIT_NUMERICAL);
    }
}
