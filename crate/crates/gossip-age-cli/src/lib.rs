//! Scenario harness: loads a sweep configuration, dispatches every sweep
//! point to the requested engines, and writes `results.csv`, `manifest.json`,
//! and `plot.svg` into the output directory.
//!
//! The manifest embeds the fully resolved configuration (seed included), so
//! feeding `manifest.json` back through [`run`] reproduces `results.csv`
//! byte for byte.

mod svg;

use std::fmt;
use std::fs;
use std::path::PathBuf;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use gossip_age::solver::AgeTable;
use gossip_age::{
    disconnected_bound_recursion, disconnected_pairs, disconnected_scaling_bound, fc_plus_single,
    fc_single_bound_recursion, fc_single_log_bound, fully_connected, simulate, solve_all,
    toy_ages, toy_no_mobility, toy_variant_12, toy_variant_13, uniform_clique_node_age, validate,
    NetworkSpec, SimConfig, SimEstimate, ToyVariant,
};

pub use svg::{emit_plot, PlotStyle};

pub const CODE_VERSION: &str = env!("CARGO_PKG_VERSION");

const DEFAULT_REPLICATIONS: usize = 10;
const DEFAULT_SIM_SEED: u64 = 17;

#[derive(Debug, thiserror::Error)]
pub enum HarnessError {
    #[error("unknown preset `{0}` (expected one of fig6, fig7, fig8, fig9)")]
    UnknownPreset(String),
    #[error("nothing to plot: the sweep produced no numeric rows")]
    EmptyResult,
    #[error("config: {0}")]
    Config(String),
    #[error("{path}: {message}")]
    Io { path: String, message: String },
}

fn io_err(path: &std::path::Path, e: std::io::Error) -> HarnessError {
    HarnessError::Io {
        path: path.display().to_string(),
        message: e.to_string(),
    }
}

/// Engines a sweep can dispatch to.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Engine {
    Exact,
    Simulate,
    Bounds,
    NoMobilityReference,
}

impl fmt::Display for Engine {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Engine::Exact => "exact",
            Engine::Simulate => "simulate",
            Engine::Bounds => "bounds",
            Engine::NoMobilityReference => "no_mobility_reference",
        })
    }
}

/// Mobility scaling f(n) for the disconnected-pairs family; the swap rate is
/// λ_m = λ / f(n).
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FOfN {
    N,
    SqrtN,
    Const(f64),
}

impl FOfN {
    pub fn eval(self, n: usize) -> f64 {
        match self {
            FOfN::N => n as f64,
            FOfN::SqrtN => (n as f64).sqrt(),
            FOfN::Const(k) => k,
        }
    }
}

/// Network family under study. `toy` runs all three exchange variants of the
/// three-position example side by side.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "name", rename_all = "snake_case", deny_unknown_fields)]
pub enum Scenario {
    Toy {
        lambda_e: f64,
        lambda: f64,
    },
    FullyConnected {
        n: usize,
        lambda_e: f64,
        lambda: f64,
        #[serde(default = "default_true")]
        full_mobility: bool,
    },
    /// The single-extra-position family pins λ_m = λ; the optional field only
    /// echoes that rate into manifests.
    FcPlusSingle {
        lambda_e: f64,
        lambda: f64,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        lambda_m: Option<f64>,
    },
    DisconnectedPairs {
        lambda_e: f64,
        lambda: f64,
        f_of_n: FOfN,
    },
}

impl Scenario {
    fn label(&self) -> &'static str {
        match self {
            Scenario::Toy { .. } => "toy",
            Scenario::FullyConnected { .. } => "fully_connected",
            Scenario::FcPlusSingle { .. } => "fc_plus_single",
            Scenario::DisconnectedPairs { .. } => "disconnected_pairs",
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SweepParameter {
    LambdaM,
    N,
}

impl SweepParameter {
    fn label(self) -> &'static str {
        match self {
            SweepParameter::LambdaM => "lambda_m",
            SweepParameter::N => "n",
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Sweep {
    pub parameter: SweepParameter,
    pub values: Vec<f64>,
}

/// Simulation block of a config; omitted fields get the preset defaults
/// (10% warmup, 10 replications) when the config is resolved.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SimBlock {
    pub horizon: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub warmup: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub replications: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
}

/// Which per-point quantities the toy and fully-connected scenarios report.
/// The structured families always report their named roles.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Report {
    Mean,
    Positions,
    #[default]
    All,
}

fn default_true() -> bool {
    true
}

fn default_output_dir() -> PathBuf {
    PathBuf::from("out")
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioConfig {
    pub scenario: Scenario,
    pub engines: Vec<Engine>,
    pub sweep: Sweep,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sim: Option<SimBlock>,
    #[serde(default = "default_output_dir")]
    pub output_dir: PathBuf,
    #[serde(default = "default_true")]
    pub plot: bool,
    #[serde(default)]
    pub report: Report,
}

/// One engine failure at one sweep point. The row stream keeps a marker row;
/// the message lives here in the manifest.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct FailureRecord {
    pub sweep_value: f64,
    pub engine: Engine,
    pub message: String,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct Manifest {
    pub code_version: String,
    pub config: ScenarioConfig,
    pub failures: Vec<FailureRecord>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct SweepRow {
    pub sweep_value: f64,
    pub engine: Engine,
    pub target: String,
    pub value: Option<f64>,
    pub stderr: Option<f64>,
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct SweepResult {
    pub rows: Vec<SweepRow>,
}

fn fmt_sweep_value(v: f64) -> String {
    if v.fract() == 0.0 && v.abs() < 1e15 {
        format!("{}", v as i64)
    } else {
        format!("{v}")
    }
}

impl SweepResult {
    /// Columns: `sweep_value,engine,target,value,stderr`; failed cells stay
    /// empty and the target carries an `error:` marker.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("sweep_value,engine,target,value,stderr\n");
        for r in &self.rows {
            out.push_str(&fmt_sweep_value(r.sweep_value));
            out.push(',');
            out.push_str(&r.engine.to_string());
            out.push(',');
            out.push_str(&r.target);
            out.push(',');
            if let Some(v) = r.value {
                out.push_str(&v.to_string());
            }
            out.push(',');
            if let Some(s) = r.stderr {
                out.push_str(&s.to_string());
            }
            out.push('\n');
        }
        out
    }
}

/// Desk-scale configurations reproducing the four comparison figures.
pub fn preset(name: &str) -> Result<ScenarioConfig, HarnessError> {
    let lambda_m_grid = vec![0.001, 0.01, 0.1, 1.0, 10.0, 100.0, 1000.0];
    match name {
        "fig6" => Ok(ScenarioConfig {
            scenario: Scenario::Toy {
                lambda_e: 1.0,
                lambda: 1.0,
            },
            engines: vec![Engine::Exact, Engine::Bounds],
            sweep: Sweep {
                parameter: SweepParameter::LambdaM,
                values: lambda_m_grid,
            },
            sim: None,
            output_dir: PathBuf::from("out/fig6"),
            plot: true,
            report: Report::Mean,
        }),
        "fig7" => Ok(ScenarioConfig {
            scenario: Scenario::Toy {
                lambda_e: 1.0,
                lambda: 1.0,
            },
            engines: vec![Engine::Exact, Engine::Bounds],
            sweep: Sweep {
                parameter: SweepParameter::LambdaM,
                values: lambda_m_grid,
            },
            sim: None,
            output_dir: PathBuf::from("out/fig7"),
            plot: true,
            report: Report::Positions,
        }),
        "fig8" => Ok(ScenarioConfig {
            scenario: Scenario::FcPlusSingle {
                lambda_e: 1.0,
                lambda: 1.0,
                lambda_m: Some(1.0),
            },
            engines: vec![Engine::Simulate, Engine::Bounds, Engine::NoMobilityReference],
            sweep: Sweep {
                parameter: SweepParameter::N,
                values: vec![8.0, 16.0, 32.0, 64.0, 128.0],
            },
            sim: Some(SimBlock {
                horizon: 2e5,
                warmup: None,
                replications: None,
                seed: Some(8),
            }),
            output_dir: PathBuf::from("out/fig8"),
            plot: true,
            report: Report::All,
        }),
        "fig9" => Ok(ScenarioConfig {
            scenario: Scenario::DisconnectedPairs {
                lambda_e: 1.0,
                lambda: 1.0,
                f_of_n: FOfN::N,
            },
            engines: vec![Engine::Simulate, Engine::Bounds, Engine::NoMobilityReference],
            sweep: Sweep {
                parameter: SweepParameter::N,
                values: vec![8.0, 16.0, 32.0, 64.0, 128.0, 256.0],
            },
            sim: Some(SimBlock {
                horizon: 2e5,
                warmup: None,
                replications: None,
                seed: Some(9),
            }),
            output_dir: PathBuf::from("out/fig9"),
            plot: true,
            report: Report::All,
        }),
        other => Err(HarnessError::UnknownPreset(other.to_string())),
    }
}

/// Parses a config document; a manifest written by [`run`] is also accepted
/// and yields its embedded config.
pub fn parse_config_doc(doc: &str) -> Result<ScenarioConfig, HarnessError> {
    match serde_json::from_str::<ScenarioConfig>(doc) {
        Ok(c) => Ok(c),
        Err(first) => match serde_json::from_str::<Manifest>(doc) {
            Ok(m) => Ok(m.config),
            Err(_) => Err(HarnessError::Config(format!(
                "not a scenario config or manifest: {first}"
            ))),
        },
    }
}

pub fn load_config(path: &std::path::Path) -> Result<ScenarioConfig, HarnessError> {
    let doc = fs::read_to_string(path).map_err(|e| io_err(path, e))?;
    parse_config_doc(&doc)
}

#[derive(Clone, Debug, Default)]
pub struct RunOptions {
    pub out: Option<PathBuf>,
    pub seed: Option<u64>,
    pub workers: Option<usize>,
    pub no_plot: bool,
}

#[derive(Debug)]
pub struct RunOutcome {
    pub result: SweepResult,
    pub failures: Vec<FailureRecord>,
    pub output_dir: PathBuf,
}

fn bad(msg: impl Into<String>) -> HarnessError {
    HarnessError::Config(msg.into())
}

fn check_rate(name: &str, v: f64) -> Result<(), HarnessError> {
    if v.is_finite() && v > 0.0 {
        Ok(())
    } else {
        Err(bad(format!("{name} must be finite and positive, got {v}")))
    }
}

/// Applies CLI overrides, fills sim defaults, and validates the whole config.
fn resolve(mut config: ScenarioConfig, options: &RunOptions) -> Result<ScenarioConfig, HarnessError> {
    if let Some(out) = &options.out {
        config.output_dir = out.clone();
    }
    if options.no_plot {
        config.plot = false;
    }
    if let Some(seed) = options.seed {
        match &mut config.sim {
            Some(sim) => sim.seed = Some(seed),
            None => return Err(bad("--seed was given but the config has no sim block")),
        }
    }
    if let Some(sim) = &mut config.sim {
        if !sim.horizon.is_finite() || sim.horizon <= 0.0 {
            return Err(bad(format!("sim.horizon must be positive, got {}", sim.horizon)));
        }
        let warmup = *sim.warmup.get_or_insert(0.1 * sim.horizon);
        if !warmup.is_finite() || warmup < 0.0 || warmup >= sim.horizon {
            return Err(bad(format!(
                "sim.warmup must lie in [0, horizon), got {warmup}"
            )));
        }
        if *sim.replications.get_or_insert(DEFAULT_REPLICATIONS) == 0 {
            return Err(bad("sim.replications must be at least 1"));
        }
        sim.seed.get_or_insert(DEFAULT_SIM_SEED);
    }

    if config.engines.is_empty() {
        return Err(bad("engines must be nonempty"));
    }
    if config.engines.contains(&Engine::Simulate) && config.sim.is_none() {
        return Err(bad("the simulate engine requires a sim block"));
    }
    if config.sweep.values.is_empty() {
        return Err(bad("sweep.values must be nonempty"));
    }
    for &v in &config.sweep.values {
        if !v.is_finite() || v <= 0.0 {
            return Err(bad(format!("sweep values must be positive, got {v}")));
        }
    }

    let wants = |p: SweepParameter| -> Result<(), HarnessError> {
        if config.sweep.parameter == p {
            Ok(())
        } else {
            Err(bad(format!(
                "scenario {} sweeps {}, not {}",
                config.scenario.label(),
                p.label(),
                config.sweep.parameter.label()
            )))
        }
    };
    match &config.scenario {
        Scenario::Toy { lambda_e, lambda } => {
            wants(SweepParameter::LambdaM)?;
            check_rate("lambda_e", *lambda_e)?;
            check_rate("lambda", *lambda)?;
        }
        Scenario::FullyConnected {
            n,
            lambda_e,
            lambda,
            ..
        } => {
            wants(SweepParameter::LambdaM)?;
            check_rate("lambda_e", *lambda_e)?;
            check_rate("lambda", *lambda)?;
            if *n < 2 {
                return Err(bad("fully_connected needs n >= 2"));
            }
            if config.engines.contains(&Engine::Bounds) {
                return Err(bad(
                    "no bound family is defined for fully_connected; drop the bounds engine",
                ));
            }
        }
        Scenario::FcPlusSingle {
            lambda_e,
            lambda,
            lambda_m,
        } => {
            wants(SweepParameter::N)?;
            check_rate("lambda_e", *lambda_e)?;
            check_rate("lambda", *lambda)?;
            if let Some(m) = lambda_m {
                if m != lambda {
                    return Err(bad(format!(
                        "fc_plus_single is defined at lambda_m = lambda; got lambda_m = {m}"
                    )));
                }
            }
        }
        Scenario::DisconnectedPairs {
            lambda_e,
            lambda,
            f_of_n,
        } => {
            wants(SweepParameter::N)?;
            check_rate("lambda_e", *lambda_e)?;
            check_rate("lambda", *lambda)?;
            if let FOfN::Const(k) = f_of_n {
                check_rate("f_of_n const", *k)?;
            }
        }
    }
    if config.sweep.parameter == SweepParameter::N {
        for &v in &config.sweep.values {
            if v.fract() != 0.0 || v < 2.0 || v > 1e6 {
                return Err(bad(format!("n sweep values must be integers >= 2, got {v}")));
            }
        }
    }
    Ok(config)
}

/// Executes the sweep and writes the output files. Engine failures do not
/// abort the run; they surface in the outcome (and as `error:` rows).
pub fn run(config: ScenarioConfig, options: &RunOptions) -> Result<RunOutcome, HarnessError> {
    let config = resolve(config, options)?;

    let execute = || -> (Vec<SweepRow>, Vec<FailureRecord>) {
        let mut per_point: Vec<(Vec<SweepRow>, Vec<FailureRecord>)> = Vec::new();
        (0..config.sweep.values.len())
            .into_par_iter()
            .map(|idx| run_point(&config, idx))
            .collect_into_vec(&mut per_point);
        let mut rows = Vec::new();
        let mut failures = Vec::new();
        for (r, f) in per_point {
            rows.extend(r);
            failures.extend(f);
        }
        // points run in config order; rows are reported in sweep order, with
        // the configured engine order within a point
        rows.sort_by(|a, b| a.sweep_value.partial_cmp(&b.sweep_value).expect("finite"));
        failures.sort_by(|a, b| a.sweep_value.partial_cmp(&b.sweep_value).expect("finite"));
        (rows, failures)
    };
    let (rows, failures) = match options.workers {
        Some(k) => {
            let pool = rayon::ThreadPoolBuilder::new()
                .num_threads(k.max(1))
                .build()
                .map_err(|e| bad(format!("worker pool: {e}")))?;
            pool.install(execute)
        }
        None => execute(),
    };
    let result = SweepResult { rows };

    let dir = &config.output_dir;
    fs::create_dir_all(dir).map_err(|e| io_err(dir, e))?;
    let csv_path = dir.join("results.csv");
    fs::write(&csv_path, result.to_csv()).map_err(|e| io_err(&csv_path, e))?;

    let manifest = Manifest {
        code_version: CODE_VERSION.to_string(),
        config: config.clone(),
        failures: failures.clone(),
    };
    let manifest_path = dir.join("manifest.json");
    let doc = serde_json::to_string_pretty(&manifest).expect("manifest serializes") + "\n";
    fs::write(&manifest_path, doc).map_err(|e| io_err(&manifest_path, e))?;

    if config.plot && result.rows.iter().any(|r| r.value.is_some()) {
        let style = PlotStyle {
            title: format!("{} over {}", config.scenario.label(), config.sweep.parameter.label()),
            x_label: config.sweep.parameter.label().to_string(),
            y_label: "version age".to_string(),
            log_x: plot_wants_log_x(&config),
        };
        let svg = emit_plot(&result, &style)?;
        let plot_path = dir.join("plot.svg");
        fs::write(&plot_path, svg).map_err(|e| io_err(&plot_path, e))?;
    }

    Ok(RunOutcome {
        result,
        failures,
        output_dir: config.output_dir.clone(),
    })
}

fn plot_wants_log_x(config: &ScenarioConfig) -> bool {
    match config.sweep.parameter {
        SweepParameter::LambdaM => true,
        SweepParameter::N => {
            let lo = config.sweep.values.iter().copied().fold(f64::INFINITY, f64::min);
            let hi = config.sweep.values.iter().copied().fold(0.0, f64::max);
            hi / lo >= 8.0
        }
    }
}

type Cells = Vec<(String, f64, Option<f64>)>;

fn run_point(config: &ScenarioConfig, idx: usize) -> (Vec<SweepRow>, Vec<FailureRecord>) {
    let value = config.sweep.values[idx];
    let mut rows = Vec::new();
    let mut failures = Vec::new();
    for &engine in &config.engines {
        match run_engine(config, engine, idx, value) {
            Ok(cells) => {
                for (target, v, stderr) in cells {
                    rows.push(SweepRow {
                        sweep_value: value,
                        engine,
                        target,
                        value: Some(v),
                        stderr,
                    });
                }
            }
            Err(e) => {
                rows.push(SweepRow {
                    sweep_value: value,
                    engine,
                    target: format!("error:{}", error_kind(&e)),
                    value: None,
                    stderr: None,
                });
                failures.push(FailureRecord {
                    sweep_value: value,
                    engine,
                    message: e.to_string(),
                });
            }
        }
    }
    (rows, failures)
}

fn error_kind(e: &gossip_age::Error) -> &'static str {
    use gossip_age::Error as E;
    match e {
        E::NegativeRate { .. } => "NegativeRate",
        E::AsymmetricMobility { .. } => "AsymmetricMobility",
        E::NonzeroDiagonal { .. } => "NonzeroDiagonal",
        E::ZeroSourceTotal => "ZeroSourceTotal",
        E::BadShape(_) => "BadShape",
        E::BadScale(_) => "BadScale",
        E::SingularLevelSystem { .. } => "SingularLevelSystem",
        E::CapExceeded { .. } => "CapExceeded",
        E::NoConvergence { .. } => "NoConvergence",
        E::DegenerateHorizon { .. } => "DegenerateHorizon",
        E::RateOverflow(_) => "RateOverflow",
    }
}

fn sim_config_for_point(config: &ScenarioConfig, idx: usize) -> SimConfig {
    let sim = config.sim.as_ref().expect("validated: sim block present");
    let mut sc = SimConfig::new(sim.horizon, sim.seed.expect("resolved").wrapping_add(idx as u64));
    sc.warmup = sim.warmup.expect("resolved");
    sc.replications = sim.replications.expect("resolved");
    sc
}

fn mean_and_stderr(xs: &[f64]) -> (f64, f64) {
    let m = xs.len() as f64;
    let mean = xs.iter().sum::<f64>() / m;
    if xs.len() < 2 {
        return (mean, 0.0);
    }
    let var = xs.iter().map(|x| (x - mean) * (x - mean)).sum::<f64>() / (m - 1.0);
    (mean, (var / m).sqrt())
}

fn run_engine(
    config: &ScenarioConfig,
    engine: Engine,
    idx: usize,
    value: f64,
) -> Result<Cells, gossip_age::Error> {
    match &config.scenario {
        Scenario::Toy { lambda_e, lambda } => {
            toy_point(config, engine, idx, value, *lambda_e, *lambda)
        }
        Scenario::FullyConnected {
            n,
            lambda_e,
            lambda,
            full_mobility,
        } => fully_connected_point(config, engine, idx, value, *n, *lambda_e, *lambda, *full_mobility),
        Scenario::FcPlusSingle {
            lambda_e, lambda, ..
        } => fc_plus_single_point(config, engine, idx, value as usize, *lambda_e, *lambda),
        Scenario::DisconnectedPairs {
            lambda_e,
            lambda,
            f_of_n,
        } => disconnected_point(config, engine, idx, value as usize, *lambda_e, *lambda, *f_of_n),
    }
}

const TOY_VARIANTS: [(ToyVariant, &str); 3] = [
    (ToyVariant::None, "none"),
    (ToyVariant::Exchange13, "exchange_13"),
    (ToyVariant::Exchange12, "exchange_12"),
];

fn toy_spec(
    variant: ToyVariant,
    lambda_e: f64,
    lambda: f64,
    lambda_m: f64,
) -> gossip_age::Result<NetworkSpec> {
    match variant {
        ToyVariant::None => toy_no_mobility(lambda_e, lambda),
        ToyVariant::Exchange13 => toy_variant_13(lambda_e, lambda, lambda_m),
        ToyVariant::Exchange12 => toy_variant_12(lambda_e, lambda, lambda_m),
    }
}

fn push_reported(cells: &mut Cells, prefix: &str, report: Report, mean: (f64, Option<f64>), positions: &[(f64, Option<f64>)]) {
    let sep = if prefix.is_empty() { "" } else { ":" };
    if report != Report::Positions {
        cells.push((format!("{prefix}{sep}mean"), mean.0, mean.1));
    }
    if report != Report::Mean {
        for (i, &(v, s)) in positions.iter().enumerate() {
            cells.push((format!("{prefix}{sep}v{}", i + 1), v, s));
        }
    }
}

fn table_cells(cells: &mut Cells, prefix: &str, report: Report, table: &AgeTable) {
    let positions: Vec<(f64, Option<f64>)> =
        table.position_ages.iter().map(|&v| (v, None)).collect();
    push_reported(cells, prefix, report, (table.mean_age, None), &positions);
}

fn sim_cells(cells: &mut Cells, prefix: &str, report: Report, est: &SimEstimate) {
    let positions: Vec<(f64, Option<f64>)> = est
        .per_position_mean
        .iter()
        .zip(&est.per_position_stderr)
        .map(|(&v, &s)| (v, Some(s)))
        .collect();
    push_reported(
        cells,
        prefix,
        report,
        (est.mean_age, Some(est.mean_stderr)),
        &positions,
    );
}

fn toy_point(
    config: &ScenarioConfig,
    engine: Engine,
    idx: usize,
    lambda_m: f64,
    lambda_e: f64,
    lambda: f64,
) -> Result<Cells, gossip_age::Error> {
    let mut cells = Cells::new();
    match engine {
        Engine::Exact => {
            for (variant, prefix) in TOY_VARIANTS {
                let table = solve_all(&validate(toy_spec(variant, lambda_e, lambda, lambda_m)?)?)?;
                table_cells(&mut cells, prefix, config.report, &table);
            }
        }
        Engine::Bounds => {
            for (variant, prefix) in TOY_VARIANTS {
                let ages = toy_ages(variant, lambda_e, lambda, lambda_m)?;
                let positions = [(ages.v1, None), (ages.v2, None), (ages.v3, None)];
                push_reported(&mut cells, prefix, config.report, (ages.mean(), None), &positions);
            }
        }
        Engine::Simulate => {
            for (variant, prefix) in TOY_VARIANTS {
                let net = validate(toy_spec(variant, lambda_e, lambda, lambda_m)?)?;
                let est = simulate(&net, &sim_config_for_point(config, idx))?;
                sim_cells(&mut cells, prefix, config.report, &est);
            }
        }
        Engine::NoMobilityReference => {
            let net = validate(toy_no_mobility(lambda_e, lambda)?)?;
            let table = gossip_age::no_mobility_reference(&net)?;
            table_cells(&mut cells, "none", config.report, &table);
        }
    }
    Ok(cells)
}

#[allow(clippy::too_many_arguments)]
fn fully_connected_point(
    config: &ScenarioConfig,
    engine: Engine,
    idx: usize,
    lambda_m: f64,
    n: usize,
    lambda_e: f64,
    lambda: f64,
    full_mobility: bool,
) -> Result<Cells, gossip_age::Error> {
    let mut cells = Cells::new();
    match engine {
        Engine::Exact => {
            let table = solve_all(&validate(fully_connected(
                n,
                lambda_e,
                lambda,
                full_mobility,
                lambda_m,
            )?)?)?;
            table_cells(&mut cells, "", config.report, &table);
        }
        Engine::Simulate => {
            let net = validate(fully_connected(n, lambda_e, lambda, full_mobility, lambda_m)?)?;
            let est = simulate(&net, &sim_config_for_point(config, idx))?;
            sim_cells(&mut cells, "", config.report, &est);
        }
        Engine::NoMobilityReference => {
            // the clique is symmetric, so one recursion covers every position
            let v = uniform_clique_node_age(n, lambda_e, lambda, lambda)?;
            let positions = vec![(v, None); n];
            push_reported(&mut cells, "", config.report, (v, None), &positions);
        }
        Engine::Bounds => unreachable!("rejected when the config was resolved"),
    }
    Ok(cells)
}

fn fc_plus_single_point(
    config: &ScenarioConfig,
    engine: Engine,
    idx: usize,
    n: usize,
    lambda_e: f64,
    lambda: f64,
) -> Result<Cells, gossip_age::Error> {
    let mut cells = Cells::new();
    match engine {
        Engine::Exact => {
            let table = solve_all(&validate(fc_plus_single(n, lambda_e, lambda)?)?)?;
            cells.push(("fc_node".into(), table.position_ages[0], None));
            cells.push(("single_node".into(), table.position_ages[n - 1], None));
        }
        Engine::Simulate => {
            let net = validate(fc_plus_single(n, lambda_e, lambda)?)?;
            let est = simulate(&net, &sim_config_for_point(config, idx))?;
            // the n-1 connected positions share one limiting age; averaging
            // them per replication sharpens the estimate
            let rep_fc: Vec<f64> = est
                .replication_means
                .iter()
                .map(|row| row[..n - 1].iter().sum::<f64>() / (n - 1) as f64)
                .collect();
            let (fc, fc_se) = mean_and_stderr(&rep_fc);
            cells.push(("fc_node".into(), fc, Some(fc_se)));
            cells.push((
                "single_node".into(),
                est.per_position_mean[n - 1],
                Some(est.per_position_stderr[n - 1]),
            ));
        }
        Engine::Bounds => {
            cells.push((
                "bound_recursion".into(),
                fc_single_bound_recursion(n, lambda_e, lambda)?,
                None,
            ));
            cells.push((
                "bound_log".into(),
                fc_single_log_bound(n, lambda_e, lambda)?,
                None,
            ));
        }
        Engine::NoMobilityReference => {
            // without swaps the clique of n-1 and the lone position decouple
            let fc = uniform_clique_node_age(n - 1, lambda_e, lambda / 2.0, lambda)?;
            let single = uniform_clique_node_age(1, lambda_e, lambda / 2.0, 0.0)?;
            cells.push(("fc_node".into(), fc, None));
            cells.push(("single_node".into(), single, None));
        }
    }
    Ok(cells)
}

#[allow(clippy::too_many_arguments)]
fn disconnected_point(
    config: &ScenarioConfig,
    engine: Engine,
    idx: usize,
    n: usize,
    lambda_e: f64,
    lambda: f64,
    f_of_n: FOfN,
) -> Result<Cells, gossip_age::Error> {
    let f = f_of_n.eval(n);
    let lambda_m = lambda / f;
    let mut cells = Cells::new();
    match engine {
        Engine::Exact => {
            let table = solve_all(&validate(disconnected_pairs(n, lambda_e, lambda, lambda_m)?)?)?;
            cells.push(("single_node".into(), table.position_ages[0], None));
        }
        Engine::Simulate => {
            let net = validate(disconnected_pairs(n, lambda_e, lambda, lambda_m)?)?;
            let est = simulate(&net, &sim_config_for_point(config, idx))?;
            // all positions play one role here
            cells.push(("single_node".into(), est.mean_age, Some(est.mean_stderr)));
        }
        Engine::Bounds => {
            cells.push((
                "bound_recursion".into(),
                disconnected_bound_recursion(n, lambda_e, lambda, f)?,
                None,
            ));
            cells.push((
                "bound_scaling".into(),
                disconnected_scaling_bound(n, lambda_e, lambda, f)?,
                None,
            ));
        }
        Engine::NoMobilityReference => {
            // an isolated pair is a 2-clique fed at 2λ/n total
            let v = uniform_clique_node_age(2, lambda_e, 2.0 * lambda / n as f64, lambda)?;
            cells.push(("single_node".into(), v, None));
        }
    }
    Ok(cells)
}
