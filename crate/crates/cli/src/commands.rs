use std::fmt;
use std::fs;

use nifrontier::analysis::{default_epsilon_rr, DEFAULT_EPSILON_RD};
use nifrontier::sim::{
    calibrate_alpha, run_grid, GridResult, Hypothesis, ModifyKind, Procedure, ScenarioSpec, PRESETS,
};
use nifrontier::{
    analyze_arcsine, analyze_fixed_margin, backcalc_alpha_rd, backcalc_margin_rd,
    conditional_modify_margin, inflated_design, sample_size, AlphaLookup, AlphaStrategy,
    AnalysisReport, ConditionalRule, DesignSpec, Frontier, FrontierShape, Risk, Scale, TrialData,
};
use serde_json::{json, Value};

use crate::config::*;
use crate::output::{csv_table, sig6, to_json};

/// Failure with the process exit code it maps to.
#[derive(Debug)]
pub struct CliError {
    pub code: u8,
    pub message: String,
}

impl CliError {
    pub fn input(message: impl Into<String>) -> Self {
        CliError {
            code: 2,
            message: message.into(),
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.message)
    }
}

impl From<nifrontier::Error> for CliError {
    fn from(e: nifrontier::Error) -> Self {
        let code = if matches!(e, nifrontier::Error::UncontrollableCell(_)) {
            3
        } else {
            2
        };
        CliError {
            code,
            message: e.to_string(),
        }
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::input(e.to_string())
    }
}

impl From<serde_json::Error> for CliError {
    fn from(e: serde_json::Error) -> Self {
        CliError::input(e.to_string())
    }
}

pub type CliResult<T> = std::result::Result<T, CliError>;

/// What a run produces: the main document and, for calibration, the lookup table.
pub struct Emitted {
    pub main: String,
    pub lookup: Option<String>,
}

pub fn execute(cfg: &RunConfig) -> CliResult<Emitted> {
    let main = match &cfg.command {
        Command::Design(a) => design(a, cfg.format)?,
        Command::Analyze(a) => analyze(a, cfg.format)?,
        Command::Frontier(a) => frontier(a, cfg.format)?,
        Command::Simulate(a) => simulate(a, cfg.format)?,
        Command::Calibrate(a) => return calibrate(a, cfg.format),
    };
    Ok(Emitted { main, lookup: None })
}

fn scale(s: ScaleArg) -> Scale {
    match s {
        ScaleArg::Rd => Scale::RiskDifference,
        ScaleArg::Rr => Scale::LogRiskRatio,
        ScaleArg::As => Scale::ArcsineDifference,
    }
}

fn design_spec(f: &DesignFlags) -> CliResult<DesignSpec> {
    Ok(DesignSpec::new(
        f.pi_e0,
        f.pi_e1.unwrap_or(f.pi_e0),
        f.pi_f1,
        f.ratio,
        f.alpha,
        f.power,
    )?)
}

/// Parses `nominal`, `fixed:<alpha>` or `lookup:<file>`.
pub fn parse_strategy(text: &str, nominal: f64) -> CliResult<AlphaStrategy> {
    let strategy = match text.split_once(':') {
        None if text == "nominal" => AlphaStrategy::Nominal(nominal),
        Some(("fixed", a)) => AlphaStrategy::ReducedFixed(
            a.parse()
                .map_err(|_| CliError::input(format!("invalid level '{a}'")))?,
        ),
        Some(("lookup", path)) => {
            let text =
                fs::read_to_string(path).map_err(|e| CliError::input(format!("{path}: {e}")))?;
            AlphaStrategy::Lookup(serde_json::from_str::<AlphaLookup>(&text)?)
        }
        _ => return Err(CliError::input(format!("unknown alpha strategy '{text}'"))),
    };
    strategy.validate()?;
    Ok(strategy)
}

/// Parses `start:stop:step` into evenly spaced points, both ends included.
pub fn parse_grid(text: &str) -> CliResult<Vec<f64>> {
    let bad = || CliError::input(format!("invalid grid '{text}', expected start:stop:step"));
    let parts: Vec<f64> = text
        .split(':')
        .map(|p| p.trim().parse::<f64>())
        .collect::<Result<_, _>>()
        .map_err(|_| bad())?;
    let [start, stop, step] = parts[..] else {
        return Err(bad());
    };
    if !(step > 0.0)
        || !(stop >= start)
        || !(0.0..=1.0).contains(&start)
        || !(0.0..=1.0).contains(&stop)
    {
        return Err(bad());
    }
    let count = ((stop - start) / step + 1e-9).floor() as usize + 1;
    Ok((0..count).map(|i| start + i as f64 * step).collect())
}

fn design(a: &DesignArgs, format: Format) -> CliResult<String> {
    let d = design_spec(&a.design)?;
    let s = scale(a.scale);
    let mut rows = vec![(d.alpha, sample_size(&d, s)?)];
    if let Some(alpha) = a.inflate_alpha {
        rows.push((alpha, inflated_design(&d, s, alpha)?));
    }
    Ok(match format {
        Format::Json => {
            let size = |(alpha, n): &(f64, nifrontier::SampleSize)| json!({ "alpha": alpha, "n0": n.n0, "n1": n.n1, "total": n.total });
            let mut v = json!({ "scale": s.short_name() });
            v["n0"] = json!(rows[0].1.n0);
            v["n1"] = json!(rows[0].1.n1);
            v["total"] = json!(rows[0].1.total);
            if let Some(row) = rows.get(1) {
                v["inflated"] = size(row);
            }
            to_json(v)?
        }
        Format::Csv => csv_table(
            &["scale", "alpha", "n0", "n1", "total"],
            rows.iter().map(|(alpha, n)| {
                vec![
                    s.short_name().into(),
                    sig6(*alpha),
                    n.n0.to_string(),
                    n.n1.to_string(),
                    n.total.to_string(),
                ]
            }),
        ),
    })
}

fn analyze(a: &AnalyzeArgs, format: Format) -> CliResult<String> {
    let d = design_spec(&a.design)?;
    let t = TrialData::new(a.n0, a.n1, a.e0, a.e1)?;
    let strategy = parse_strategy(&a.alpha_strategy, d.alpha)?;
    let pi0_hat = a.e0 as f64 / a.n0 as f64;
    let s = scale(a.scale);
    let report = match a.method {
        MethodArg::As => analyze_arcsine(&t, &d.frontier()?, strategy.alpha_for(pi0_hat)?)?,
        MethodArg::BackcalcMargin => {
            backcalc_margin_rd(&t, &d.frontier()?, strategy.alpha_for(pi0_hat)?)?
        }
        MethodArg::BackcalcAlpha => {
            backcalc_alpha_rd(&t, &d.frontier()?, strategy.alpha_for(pi0_hat)?)?
        }
        MethodArg::Fixed => analyze_fixed_margin(&t, &d, s, strategy.alpha_for(pi0_hat)?)?,
        MethodArg::Conditional => {
            let eps = a.epsilon.unwrap_or(match s {
                Scale::LogRiskRatio => default_epsilon_rr(),
                _ => DEFAULT_EPSILON_RD,
            });
            conditional_modify_margin(&t, &d, &ConditionalRule::new(s, eps, strategy)?)?
        }
    };
    Ok(match format {
        Format::Json => to_json(report_json(&report))?,
        Format::Csv => csv_table(
            &[
                "method",
                "scale",
                "estimate",
                "se",
                "margin_tested",
                "margin_reported",
                "alpha_used",
                "ci_level",
                "ci_low",
                "ci_high",
                "z",
                "p",
                "margin_modified",
                "noninferior",
            ],
            [vec![
                report.method.to_string(),
                report.scale_reported.short_name().into(),
                sig6(report.estimate),
                sig6(report.se),
                sig6(report.margin_tested),
                sig6(report.reported_margin()),
                sig6(report.alpha_used),
                sig6(report.ci_level),
                sig6(report.ci.0),
                sig6(report.ci.1),
                sig6(report.z),
                sig6(report.p),
                report.margin_modified.to_string(),
                report.noninferior.to_string(),
            ]],
        ),
    })
}

fn report_json(r: &AnalysisReport) -> Value {
    let mut v = serde_json::to_value(r).expect("reports serialize");
    v["margin_reported"] = json!(r.reported_margin());
    v
}

fn frontier(a: &FrontierArgs, format: Format) -> CliResult<String> {
    let shape = match a.shape {
        ShapeArg::PowerStabilising => FrontierShape::PowerStabilising,
        ShapeArg::FixedRd => FrontierShape::FixedRiskDifference,
        ShapeArg::FixedRr => FrontierShape::FixedRiskRatio,
    };
    let f = Frontier::new(shape, Risk::new(a.pi_e0)?, Risk::new(a.pi_f1)?)?;
    let header = [
        "pi0",
        "pi_f1_star",
        "margin_rd",
        "margin_logrr",
        "margin_as",
    ];
    let mut rows = vec![];
    for p in parse_grid(&a.grid)? {
        let pi0 = Risk::new(p)?;
        // undefined log-ratio margins are left empty
        let margin = |s| f.margin_on_scale(pi0, s).ok();
        rows.push([
            Some(p),
            Some(f.tolerable_active_risk(pi0).get()),
            margin(Scale::RiskDifference),
            margin(Scale::LogRiskRatio),
            margin(Scale::ArcsineDifference),
        ]);
    }
    Ok(match format {
        Format::Csv => csv_table(
            &header,
            rows.iter().map(|r| {
                r.iter()
                    .map(|x| x.map(sig6).unwrap_or_default())
                    .collect::<Vec<_>>()
            }),
        ),
        Format::Json => to_json(Value::Array(
            rows.iter()
                .map(|r| {
                    header
                        .iter()
                        .zip(r)
                        .map(|(k, v)| (k.to_string(), json!(v)))
                        .collect()
                })
                .collect(),
        ))?,
    })
}

fn scenario(flags: &ScenarioFlags) -> CliResult<ScenarioSpec> {
    if PRESETS.contains(&flags.scenario.as_str()) {
        return Ok(ScenarioSpec::preset(&flags.scenario, scale(flags.scale))?);
    }
    let text = fs::read_to_string(&flags.scenario).map_err(|e| {
        CliError::input(format!(
            "scenario '{}' is neither a preset nor a readable file: {e}",
            flags.scenario
        ))
    })?;
    let s: ScenarioSpec = serde_json::from_str(&text)?;
    s.validate()?;
    Ok(s)
}

fn kind(p: ProcedureArg) -> ModifyKind {
    match p {
        ProcedureArg::None => ModifyKind::DoNotModify,
        ProcedureArg::Large => ModifyKind::ModifyLarge,
        ProcedureArg::Medium => ModifyKind::ModifyMedium,
        ProcedureArg::Small => ModifyKind::ModifySmall,
    }
}

const GRID_HEADER: [&str; 7] = [
    "pi0",
    "rate",
    "mc_se",
    "modification_rate",
    "degenerate_rate",
    "reps",
    "alpha_used",
];

fn grid_row(g: &GridResult) -> Vec<String> {
    vec![
        sig6(g.pi0),
        sig6(g.rejection_rate),
        sig6(g.mc_se),
        sig6(g.modification_rate),
        sig6(g.degenerate_rate),
        g.reps.to_string(),
        sig6(g.alpha_used),
    ]
}

fn simulate(a: &SimulateArgs, format: Format) -> CliResult<String> {
    let s = scenario(&a.scenario)?;
    let proc = Procedure::new(
        kind(a.procedure),
        parse_strategy(&a.alpha_strategy, s.alpha_design)?,
    )?;
    let hypothesis = match a.hypothesis {
        HypothesisArg::Null => Hypothesis::Null,
        HypothesisArg::Alt => Hypothesis::Alternative,
    };
    let grid = parse_grid(&a.scenario.grid)?;
    let results = run_grid(
        &s,
        &proc,
        hypothesis,
        &grid,
        a.scenario.reps,
        a.scenario.seed,
    )?;
    Ok(match format {
        Format::Csv => csv_table(&GRID_HEADER, results.iter().map(grid_row)),
        Format::Json => to_json(serde_json::to_value(&results)?)?,
    })
}

fn calibrate(a: &CalibrateArgs, format: Format) -> CliResult<Emitted> {
    let s = scenario(&a.scenario)?;
    let grid = parse_grid(&a.scenario.grid)?;
    let cal = calibrate_alpha(
        &s,
        kind(a.procedure),
        &grid,
        &a.alphas,
        a.scenario.reps,
        a.scenario.seed,
        a.slack,
    )?;
    let main = match format {
        Format::Csv => csv_table(&GRID_HEADER, cal.cells.iter().map(|c| grid_row(&c.result))),
        Format::Json => to_json(serde_json::to_value(&cal)?)?,
    };
    Ok(Emitted {
        main,
        lookup: Some(serde_json::to_string_pretty(&cal.lookup)? + "\n"),
    })
}
