//! Command-line arguments and the serializable run configuration.

use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::{Deserialize, Serialize};

#[derive(Parser, Debug)]
#[command(
    name = "nifrontier",
    version,
    about = "Design, analyse and simulate binary-outcome non-inferiority trials"
)]
pub struct Cli {
    /// Output format; defaults to json for design/analyze and csv otherwise.
    #[arg(long, value_enum, global = true)]
    pub format: Option<Format>,

    /// Write the main output here instead of standard output.
    #[arg(long, short, global = true)]
    pub output: Option<PathBuf>,

    /// Save the resolved run configuration as JSON for later replay.
    #[arg(long, global = true)]
    pub save_config: Option<PathBuf>,

    #[command(subcommand)]
    pub invocation: Invocation,
}

#[derive(Subcommand, Debug)]
pub enum Invocation {
    #[command(flatten)]
    Run(Command),
    /// Re-run a saved configuration.
    Replay { config: PathBuf },
}

/// Everything needed to reproduce one run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunConfig {
    pub command: Command,
    pub format: Format,
    pub output: Option<PathBuf>,
}

#[derive(Subcommand, Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "name", rename_all = "snake_case")]
pub enum Command {
    /// Sample size per arm, optionally at a reduced testing level.
    Design(DesignArgs),
    /// Analyse one trial.
    Analyze(AnalyzeArgs),
    /// Tabulate a frontier over a grid of control risks.
    Frontier(FrontierArgs),
    /// Monte Carlo operating characteristics over a grid of control risks.
    Simulate(SimulateArgs),
    /// Choose the testing level from the observed control risk.
    Calibrate(CalibrateArgs),
}

impl Command {
    pub fn default_format(&self) -> Format {
        match self {
            Command::Design(_) | Command::Analyze(_) => Format::Json,
            _ => Format::Csv,
        }
    }
}

#[derive(ValueEnum, Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Format {
    Json,
    Csv,
}

#[derive(ValueEnum, Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ScaleArg {
    Rd,
    Rr,
    As,
}

#[derive(Args, Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DesignFlags {
    /// Expected control-arm event risk.
    #[arg(long)]
    pub pi_e0: f64,
    /// Expected active-arm event risk [default: pi-e0].
    #[arg(long)]
    pub pi_e1: Option<f64>,
    /// Largest tolerable active-arm risk at the expected control risk.
    #[arg(long)]
    pub pi_f1: f64,
    /// One-sided significance level.
    #[arg(long, default_value_t = 0.025)]
    pub alpha: f64,
    #[arg(long, default_value_t = 0.9)]
    pub power: f64,
    /// Allocation ratio n1/n0.
    #[arg(long, default_value_t = 1.0)]
    pub ratio: f64,
}

#[derive(Args, Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DesignArgs {
    #[arg(long, value_enum)]
    pub scale: ScaleArg,
    #[command(flatten)]
    pub design: DesignFlags,
    /// Also report the size needed when testing at this smaller level.
    #[arg(long)]
    pub inflate_alpha: Option<f64>,
}

#[derive(ValueEnum, Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MethodArg {
    /// Test and report on the arcsine scale.
    As,
    /// Arcsine test, reported on the RD scale with a back-calculated margin.
    BackcalcMargin,
    /// Arcsine test, reported on the RD scale with a back-calculated level.
    BackcalcAlpha,
    /// Modify the margin only if the control risk is far from expected.
    Conditional,
    /// Plain test at the design margin.
    Fixed,
}

#[derive(Args, Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AnalyzeArgs {
    #[arg(long)]
    pub n0: u64,
    #[arg(long)]
    pub e0: u64,
    #[arg(long)]
    pub n1: u64,
    #[arg(long)]
    pub e1: u64,
    #[arg(long, value_enum)]
    pub method: MethodArg,
    /// Analysis scale for the conditional and fixed methods.
    #[arg(long, value_enum, default_value = "rd")]
    pub scale: ScaleArg,
    /// Modification threshold [default: 0.0125 on rd, ln 1.25 on rr].
    #[arg(long)]
    pub epsilon: Option<f64>,
    /// nominal, fixed:<alpha> or lookup:<file>.
    #[arg(long, default_value = "nominal")]
    pub alpha_strategy: String,
    #[command(flatten)]
    pub design: DesignFlags,
}

#[derive(ValueEnum, Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ShapeArg {
    #[value(alias = "ps")]
    PowerStabilising,
    #[value(alias = "rd")]
    FixedRd,
    #[value(alias = "rr")]
    FixedRr,
}

#[derive(Args, Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FrontierArgs {
    #[arg(long, value_enum)]
    pub shape: ShapeArg,
    #[arg(long)]
    pub pi_e0: f64,
    #[arg(long)]
    pub pi_f1: f64,
    /// Control risks as start:stop:step.
    #[arg(long, default_value = "0.005:0.2:0.005")]
    pub grid: String,
}

#[derive(ValueEnum, Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ProcedureArg {
    None,
    Large,
    Medium,
    Small,
}

#[derive(ValueEnum, Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum HypothesisArg {
    Null,
    Alt,
}

#[derive(Args, Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScenarioFlags {
    /// Preset (base, alt1 .. alt7) or path to a scenario JSON file.
    #[arg(long, default_value = "base")]
    pub scenario: String,
    /// Scale the scenario is designed and analysed on (presets only).
    #[arg(long, value_enum, default_value = "rd")]
    pub scale: ScaleArg,
    #[arg(long, default_value_t = 100_000)]
    pub reps: u64,
    #[arg(long)]
    pub seed: u64,
    /// Control risks as start:stop:step.
    #[arg(long, default_value = "0.005:0.2:0.005")]
    pub grid: String,
}

#[derive(Args, Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimulateArgs {
    #[command(flatten)]
    pub scenario: ScenarioFlags,
    #[arg(long, value_enum, default_value = "small")]
    pub procedure: ProcedureArg,
    #[arg(long, value_enum, default_value = "null")]
    pub hypothesis: HypothesisArg,
    /// nominal, fixed:<alpha> or lookup:<file>.
    #[arg(long, default_value = "nominal")]
    pub alpha_strategy: String,
}

#[derive(Args, Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CalibrateArgs {
    #[command(flatten)]
    pub scenario: ScenarioFlags,
    #[arg(long, value_enum, default_value = "small")]
    pub procedure: ProcedureArg,
    /// Candidate levels, ascending.
    #[arg(long, value_delimiter = ',', default_value = "0.01,0.015,0.02,0.025")]
    pub alphas: Vec<f64>,
    /// Monte Carlo standard errors a rate may exceed the design level by.
    #[arg(long, default_value_t = 0.0)]
    pub slack: f64,
    /// Write the lookup table here; standard error otherwise.
    #[arg(long)]
    pub lookup_out: Option<PathBuf>,
}
