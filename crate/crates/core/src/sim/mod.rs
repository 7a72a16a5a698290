//! Monte Carlo operating characteristics of the conditionally-modify-margin
//! procedures.
//!
//! Trials are generated with independent binomial arms. Under the null the
//! active risk sits exactly on the power-stabilising frontier; under the
//! alternative the two arms share the same risk. Each grid cell owns an
//! independent random stream (see [`rng`]), so results do not depend on how
//! cells are scheduled across threads.

pub mod calibrate;
pub mod exact;
pub mod rng;

use std::fmt;

use rand::Rng;
use rand_distr::{Binomial, Distribution};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::analysis::{conditional_modify_margin, AlphaStrategy, ConditionalRule, TrialData};
use crate::design::{sample_size, DesignSpec, SampleSize};
use crate::error::{Error, Result};
use crate::frontier::{Frontier, FrontierShape, Risk, Scale};

pub use calibrate::{calibrate_alpha, Calibration, CalibrationCell};
pub use exact::{exact_rejection_probability, ENUMERATION_LIMIT};
pub use rng::{CellRng, StreamKey};

/// Design parameters of one simulation scenario.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScenarioSpec {
    pub name: String,
    pub pi_e0: Risk,
    pub pi_e1: Risk,
    pub pi_f1: Risk,
    pub ratio: f64,
    pub power: f64,
    pub scale: Scale,
    pub alpha_design: f64,
}

/// Names accepted by [`ScenarioSpec::preset`].
pub const PRESETS: [&str; 8] = [
    "base", "alt1", "alt2", "alt3", "alt4", "alt5", "alt6", "alt7",
];

impl ScenarioSpec {
    /// One of the eight standard scenarios: the base case and seven
    /// one-at-a-time departures from it.
    pub fn preset(name: &str, scale: Scale) -> Result<Self> {
        // (π_e0, π_e1 / π_e0, π_f1, r, power)
        let (pi_e0, rel_e1, pi_f1, ratio, power) = match name {
            "base" => (0.05, 1.0, 0.10, 1.0, 0.90),
            "alt1" => (0.10, 1.0, 0.15, 1.0, 0.90),
            "alt2" => (0.05, 0.5, 0.10, 1.0, 0.90),
            "alt3" => (0.05, 1.0, 0.075, 1.0, 0.90),
            "alt4" => (0.05, 1.0, 0.15, 1.0, 0.90),
            "alt5" => (0.05, 1.0, 0.10, 0.5, 0.90),
            "alt6" => (0.05, 1.0, 0.10, 2.0, 0.90),
            "alt7" => (0.05, 1.0, 0.10, 1.0, 0.80),
            other => {
                return Err(Error::InvalidDesign(format!(
                    "unknown scenario '{other}', expected one of {PRESETS:?}"
                )))
            }
        };
        let s = ScenarioSpec {
            name: name.to_string(),
            pi_e0: Risk::new(pi_e0)?,
            pi_e1: Risk::new(pi_e0 * rel_e1)?,
            pi_f1: Risk::new(pi_f1)?,
            ratio,
            power,
            scale,
            alpha_design: 0.025,
        };
        s.validate()?;
        Ok(s)
    }

    pub fn validate(&self) -> Result<()> {
        if self.scale == Scale::ArcsineDifference {
            return Err(Error::InvalidDesign(
                "simulation scenarios are analysed on the RD or RR scale".into(),
            ));
        }
        self.design().validate()
    }

    pub fn design(&self) -> DesignSpec {
        DesignSpec {
            pi_e0: self.pi_e0,
            pi_e1: self.pi_e1,
            pi_f1: self.pi_f1,
            ratio: self.ratio,
            alpha: self.alpha_design,
            power: self.power,
        }
    }

    pub fn frontier(&self) -> Result<Frontier> {
        Frontier::power_stabilising(self.pi_e0, self.pi_f1)
    }

    /// Sample size from the design formulas on the scenario's scale.
    pub fn sample_size(&self) -> Result<SampleSize> {
        sample_size(&self.design(), self.scale)
    }

    /// Identifier keying the random streams of a run.
    pub fn stream_id(&self, hypothesis: Hypothesis) -> String {
        format!("{}:{}:{}", self.name, self.scale, hypothesis)
    }
}

/// Margin-modification threshold of a procedure.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ModifyKind {
    DoNotModify,
    ModifyLarge,
    ModifyMedium,
    ModifySmall,
}

impl ModifyKind {
    /// ε for this procedure on `scale`; `None` for [`ModifyKind::DoNotModify`].
    pub fn epsilon(self, scale: Scale) -> Option<f64> {
        let rr = scale == Scale::LogRiskRatio;
        match self {
            ModifyKind::DoNotModify => None,
            ModifyKind::ModifyLarge => Some(if rr { 2f64.ln() } else { 0.05 }),
            ModifyKind::ModifyMedium => Some(if rr { 1.5f64.ln() } else { 0.025 }),
            ModifyKind::ModifySmall => Some(if rr { 1.25f64.ln() } else { 0.0125 }),
        }
    }
}

/// An analysis procedure applied to every simulated trial.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Procedure {
    pub kind: ModifyKind,
    pub alpha_strategy: AlphaStrategy,
}

impl Procedure {
    pub fn new(kind: ModifyKind, alpha_strategy: AlphaStrategy) -> Result<Self> {
        alpha_strategy.validate()?;
        Ok(Procedure {
            kind,
            alpha_strategy,
        })
    }

    pub fn nominal(kind: ModifyKind, alpha: f64) -> Result<Self> {
        Self::new(kind, AlphaStrategy::Nominal(alpha))
    }

    /// The conditional rule this procedure applies on `scale`. Never modifying
    /// is the rule with an infinite threshold.
    pub fn rule(&self, scale: Scale) -> Result<ConditionalRule> {
        let eps = self.kind.epsilon(scale).unwrap_or(f64::INFINITY);
        ConditionalRule::new(scale, eps, self.alpha_strategy.clone())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Hypothesis {
    Null,
    Alternative,
}

impl fmt::Display for Hypothesis {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Hypothesis::Null => "null",
            Hypothesis::Alternative => "alt",
        })
    }
}

/// Operating characteristics at one control risk.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GridResult {
    pub pi0: f64,
    pub pi1: f64,
    pub rejection_rate: f64,
    pub mc_se: f64,
    pub modification_rate: f64,
    /// Share of trials whose analysis was undefined (zero cells, zero variance).
    pub degenerate_rate: f64,
    /// Mean one-sided level used over the replicates.
    pub alpha_used: f64,
    pub reps: u64,
    pub hypothesis: Hypothesis,
}

/// Outcome of analysing one simulated trial.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Decision {
    pub rejected: bool,
    pub modified: bool,
    pub degenerate: bool,
    pub alpha: f64,
}

/// Applies a conditional rule to a simulated trial. Degenerate analyses count
/// as failures to reject.
pub fn decide(t: &TrialData, design: &DesignSpec, rule: &ConditionalRule) -> Decision {
    let pi0_hat = t.e0 as f64 / t.n0 as f64;
    let modified = rule.exceeds_threshold(pi0_hat, design.pi_e0.get());
    match conditional_modify_margin(t, design, rule) {
        Ok(r) => Decision {
            rejected: r.noninferior,
            modified,
            degenerate: false,
            alpha: r.alpha_used,
        },
        Err(_) => Decision {
            rejected: false,
            modified,
            degenerate: true,
            alpha: rule.strategy.alpha_for(pi0_hat).unwrap_or(f64::NAN),
        },
    }
}

/// Binomial trial generator for fixed risks and arm sizes.
#[derive(Debug, Clone, Copy)]
pub struct TrialGenerator {
    n: SampleSize,
    control: Binomial,
    active: Binomial,
}

impl TrialGenerator {
    pub fn new(pi0: Risk, pi1: Risk, n: SampleSize) -> Result<Self> {
        let bin = |n: u64, p: Risk| {
            Binomial::new(n, p.get())
                .map_err(|e| Error::InvalidDesign(format!("binomial({n}, {p}): {e}")))
        };
        Ok(TrialGenerator {
            n,
            control: bin(n.n0, pi0)?,
            active: bin(n.n1, pi1)?,
        })
    }

    #[inline]
    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> TrialData {
        TrialData {
            n0: self.n.n0,
            n1: self.n.n1,
            e0: self.control.sample(rng),
            e1: self.active.sample(rng),
        }
    }
}

/// Draw one trial with independent binomial arms.
pub fn generate_trial<R: Rng + ?Sized>(
    pi0: Risk,
    pi1: Risk,
    n: SampleSize,
    rng: &mut R,
) -> Result<TrialData> {
    Ok(TrialGenerator::new(pi0, pi1, n)?.sample(rng))
}

#[derive(Debug, Clone, Copy, Default)]
struct Tally {
    rejected: u64,
    modified: u64,
    degenerate: u64,
    alpha_sum: f64,
}

impl Tally {
    fn add(&mut self, d: Decision) {
        self.rejected += d.rejected as u64;
        self.modified += d.modified as u64;
        self.degenerate += d.degenerate as u64;
        self.alpha_sum += d.alpha;
    }

    fn finish(self, pi0: f64, pi1: f64, reps: u64, hypothesis: Hypothesis) -> GridResult {
        let n = reps as f64;
        let rate = self.rejected as f64 / n;
        GridResult {
            pi0,
            pi1,
            rejection_rate: rate,
            mc_se: (rate * (1.0 - rate) / n).sqrt(),
            modification_rate: self.modified as f64 / n,
            degenerate_rate: self.degenerate as f64 / n,
            alpha_used: self.alpha_sum / n,
            reps,
            hypothesis,
        }
    }
}

/// Runs `reps` trials at fixed risks and applies every analysis in `analyses`
/// to each trial (common random numbers across analyses).
pub fn simulate_cell<R, F>(
    generator: &TrialGenerator,
    reps: u64,
    rng: &mut R,
    analyses: &[F],
    pi0: f64,
    pi1: f64,
    hypothesis: Hypothesis,
) -> Vec<GridResult>
where
    R: Rng + ?Sized,
    F: Fn(&TrialData) -> Decision,
{
    let mut tallies = vec![Tally::default(); analyses.len()];
    for _ in 0..reps {
        let t = generator.sample(rng);
        for (tally, analysis) in tallies.iter_mut().zip(analyses) {
            tally.add(analysis(&t));
        }
    }
    tallies
        .into_iter()
        .map(|t| t.finish(pi0, pi1, reps, hypothesis))
        .collect()
}

/// Evenly spaced control risks `0.005, 0.010, …, 0.200`.
pub fn default_grid() -> Vec<f64> {
    (1..=40).map(|i| i as f64 * 0.005).collect()
}

/// Active risk on the frontier at control risk `pi0`: the boundary null.
pub fn null_active_risk(pi0: Risk, f: &Frontier) -> Result<Risk> {
    if f.shape() != FrontierShape::PowerStabilising {
        return Err(Error::InvalidFrontier(
            "null risks come from the power-stabilising frontier".into(),
        ));
    }
    Ok(f.tolerable_active_risk(pi0))
}

fn active_risk(scenario: &ScenarioSpec, hypothesis: Hypothesis, pi0: Risk) -> Result<Risk> {
    match hypothesis {
        Hypothesis::Null => null_active_risk(pi0, &scenario.frontier()?),
        Hypothesis::Alternative => Ok(pi0),
    }
}

pub(crate) fn validate_grid(grid: &[f64], reps: u64) -> Result<()> {
    if grid.is_empty() {
        return Err(Error::InvalidGrid("grid is empty".into()));
    }
    if reps == 0 {
        return Err(Error::InvalidGrid("reps must be positive".into()));
    }
    for &p in grid {
        Risk::new(p)?;
    }
    Ok(())
}

/// Runs several procedures over the same simulated trials, one result vector
/// per procedure (outer index) and grid point (inner index).
pub fn run_grid_multi(
    scenario: &ScenarioSpec,
    procs: &[Procedure],
    hypothesis: Hypothesis,
    grid: &[f64],
    reps: u64,
    master_seed: u64,
) -> Result<Vec<Vec<GridResult>>> {
    scenario.validate()?;
    validate_grid(grid, reps)?;
    let design = scenario.design();
    let n = scenario.sample_size()?;
    let rules = procs
        .iter()
        .map(|p| p.rule(scenario.scale))
        .collect::<Result<Vec<_>>>()?;
    let key = StreamKey::new(master_seed, &scenario.stream_id(hypothesis));

    let cells: Vec<(f64, Risk, TrialGenerator)> = grid
        .iter()
        .map(|&p| {
            let pi0 = Risk::new(p)?;
            let pi1 = active_risk(scenario, hypothesis, pi0)?;
            Ok((p, pi1, TrialGenerator::new(pi0, pi1, n)?))
        })
        .collect::<Result<_>>()?;

    let per_cell: Vec<Vec<GridResult>> = cells
        .par_iter()
        .enumerate()
        .map(|(i, (pi0, pi1, generator))| {
            let analyses: Vec<_> = rules
                .iter()
                .map(|r| move |t: &TrialData| decide(t, &design, r))
                .collect();
            let mut rng = key.cell(i as u64);
            simulate_cell(
                generator,
                reps,
                &mut rng,
                &analyses,
                *pi0,
                pi1.get(),
                hypothesis,
            )
        })
        .collect();

    // transpose to procedure-major
    Ok((0..procs.len())
        .map(|k| per_cell.iter().map(|cell| cell[k]).collect())
        .collect())
}

/// Operating characteristics of one procedure over a grid of control risks.
pub fn run_grid(
    scenario: &ScenarioSpec,
    proc: &Procedure,
    hypothesis: Hypothesis,
    grid: &[f64],
    reps: u64,
    master_seed: u64,
) -> Result<Vec<GridResult>> {
    let mut out = run_grid_multi(
        scenario,
        std::slice::from_ref(proc),
        hypothesis,
        grid,
        reps,
        master_seed,
    )?;
    Ok(out.pop().unwrap_or_default())
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;

    fn base(scale: Scale) -> ScenarioSpec {
        ScenarioSpec::preset("base", scale).unwrap()
    }

    #[test]
    fn presets() {
        for name in PRESETS {
            for scale in [Scale::RiskDifference, Scale::LogRiskRatio] {
                let s = ScenarioSpec::preset(name, scale).unwrap();
                assert!(s.sample_size().unwrap().n0 > 0);
            }
        }
        assert!(ScenarioSpec::preset("alt8", Scale::RiskDifference).is_err());
        assert!(ScenarioSpec::preset("base", Scale::ArcsineDifference).is_err());
        assert_eq!(base(Scale::RiskDifference).sample_size().unwrap().n0, 400);
        assert_eq!(base(Scale::LogRiskRatio).sample_size().unwrap().n0, 832);
        let alt2 = ScenarioSpec::preset("alt2", Scale::RiskDifference).unwrap();
        assert_eq!(alt2.pi_e1.get(), 0.025);
    }

    #[test]
    fn null_risks() {
        let f = base(Scale::RiskDifference).frontier().unwrap();
        let r = |x| Risk::new(x).unwrap();
        assert!((null_active_risk(r(0.05), &f).unwrap().get() - 0.10).abs() < 1e-12);
        assert!((null_active_risk(r(0.10), &f).unwrap().get() - 0.164_77).abs() < 1e-5);
        assert!((null_active_risk(r(0.005), &f).unwrap().get() - 0.027_63).abs() < 1e-5);
    }

    #[test]
    fn degenerate_generators() {
        let n = SampleSize::new(50, 60).unwrap();
        let mut rng = CellRng::seed_from_u64(1);
        for _ in 0..100 {
            let t = generate_trial(
                Risk::new(1.0).unwrap(),
                Risk::new(0.0).unwrap(),
                n,
                &mut rng,
            )
            .unwrap();
            assert_eq!((t.e0, t.e1), (50, 0));
        }
    }

    #[test]
    fn generation_is_seeded() {
        let n = SampleSize::new(100, 100).unwrap();
        let r = Risk::new(0.3).unwrap();
        let a: Vec<_> = {
            let mut rng = CellRng::seed_from_u64(9);
            (0..20)
                .map(|_| generate_trial(r, r, n, &mut rng).unwrap())
                .collect()
        };
        let b: Vec<_> = {
            let mut rng = CellRng::seed_from_u64(9);
            (0..20)
                .map(|_| generate_trial(r, r, n, &mut rng).unwrap())
                .collect()
        };
        assert_eq!(a, b);
    }

    #[test]
    fn epsilons() {
        assert_eq!(ModifyKind::DoNotModify.epsilon(Scale::RiskDifference), None);
        assert_eq!(
            ModifyKind::ModifyLarge.epsilon(Scale::RiskDifference),
            Some(0.05)
        );
        assert_eq!(
            ModifyKind::ModifyMedium.epsilon(Scale::RiskDifference),
            Some(0.025)
        );
        assert_eq!(
            ModifyKind::ModifySmall.epsilon(Scale::RiskDifference),
            Some(0.0125)
        );
        assert!(
            (ModifyKind::ModifyMedium
                .epsilon(Scale::LogRiskRatio)
                .unwrap()
                - 1.5f64.ln())
            .abs()
                < 1e-15
        );
    }

    #[test]
    fn do_not_modify_never_modifies() {
        let s = base(Scale::LogRiskRatio);
        let p = Procedure::nominal(ModifyKind::DoNotModify, 0.025).unwrap();
        let res = run_grid(&s, &p, Hypothesis::Null, &[0.005, 0.05, 0.2], 500, 3).unwrap();
        assert!(res.iter().all(|r| r.modification_rate == 0.0));
        // tiny control risks on the RR scale produce zero cells
        assert!(res[0].degenerate_rate > 0.0);
    }

    #[test]
    fn grid_validation() {
        let s = base(Scale::RiskDifference);
        let p = Procedure::nominal(ModifyKind::ModifySmall, 0.025).unwrap();
        assert!(run_grid(&s, &p, Hypothesis::Null, &[], 10, 1).is_err());
        assert!(run_grid(&s, &p, Hypothesis::Null, &[0.1], 0, 1).is_err());
        assert!(run_grid(&s, &p, Hypothesis::Null, &[1.1], 10, 1).is_err());
    }

    #[test]
    fn deterministic_and_order_free() {
        let s = base(Scale::RiskDifference);
        let p = Procedure::nominal(ModifyKind::ModifySmall, 0.025).unwrap();
        let grid = [0.02, 0.05, 0.12];
        let a = run_grid(&s, &p, Hypothesis::Null, &grid, 2000, 11).unwrap();
        let b = run_grid(&s, &p, Hypothesis::Null, &grid, 2000, 11).unwrap();
        assert_eq!(a, b);
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(3)
            .build()
            .unwrap();
        let c = pool.install(|| run_grid(&s, &p, Hypothesis::Null, &grid, 2000, 11).unwrap());
        assert_eq!(a, c);
        // a cell's result depends only on its index, not on its neighbours
        let d = run_grid(&s, &p, Hypothesis::Null, &grid[..1], 2000, 11).unwrap();
        assert_eq!(a[0], d[0]);
        let e = run_grid(&s, &p, Hypothesis::Null, &grid, 2000, 12).unwrap();
        assert_ne!(a, e);
    }

    #[test]
    fn multi_matches_single() {
        let s = base(Scale::RiskDifference);
        let procs = [
            Procedure::nominal(ModifyKind::DoNotModify, 0.025).unwrap(),
            Procedure::nominal(ModifyKind::ModifySmall, 0.025).unwrap(),
        ];
        let grid = [0.03, 0.08];
        let multi = run_grid_multi(&s, &procs, Hypothesis::Alternative, &grid, 1000, 5).unwrap();
        for (k, p) in procs.iter().enumerate() {
            assert_eq!(
                multi[k],
                run_grid(&s, p, Hypothesis::Alternative, &grid, 1000, 5).unwrap()
            );
        }
    }

    #[test]
    fn mc_se_formula() {
        let s = base(Scale::RiskDifference);
        let p = Procedure::nominal(ModifyKind::DoNotModify, 0.025).unwrap();
        for r in run_grid(&s, &p, Hypothesis::Alternative, &[0.05], 1000, 2).unwrap() {
            let expect = (r.rejection_rate * (1.0 - r.rejection_rate) / 1000.0).sqrt();
            assert_eq!(r.mc_se, expect);
            assert_eq!(r.pi1, r.pi0);
            assert!((r.alpha_used - 0.025).abs() < 1e-12);
        }
    }
}
