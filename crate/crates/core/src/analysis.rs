//! Effect estimation, Wald non-inferiority tests and the reporting procedures
//! built on the power-stabilising frontier.
//!
//! Events are unfavourable throughout: non-inferiority is concluded when the
//! estimated effect (active minus control) lies credibly below the margin, so
//! `z = (estimate − margin) / se` and the one-sided p-value is `Φ(z)`.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::design::DesignSpec;
use crate::error::{Error, Result};
use crate::frontier::{asin_sqrt_raw, Frontier, FrontierShape, Scale};
use crate::normal::{normal_cdf, upper_critical};

/// Anything that provides arm sizes and observed risks for a two-arm trial.
pub trait ArmOutcomes {
    /// `(n0, n1)`: control and active arm sizes.
    fn arm_sizes(&self) -> (f64, f64);
    /// `(π̂0, π̂1)`: observed control and active event risks.
    fn observed_risks(&self) -> (f64, f64);
}

/// Patient-level counts from a completed (or simulated) trial.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct TrialData {
    pub n0: u64,
    pub n1: u64,
    pub e0: u64,
    pub e1: u64,
}

impl TrialData {
    pub fn new(n0: u64, n1: u64, e0: u64, e1: u64) -> Result<Self> {
        if n0 == 0 || n1 == 0 {
            return Err(Error::InvalidTrialData("arm sizes must be positive".into()));
        }
        if e0 > n0 || e1 > n1 {
            return Err(Error::InvalidTrialData(format!(
                "event counts ({e0}, {e1}) exceed arm sizes ({n0}, {n1})"
            )));
        }
        Ok(TrialData { n0, n1, e0, e1 })
    }

    /// The same trial with the arms exchanged.
    pub fn swapped(&self) -> Self {
        TrialData {
            n0: self.n1,
            n1: self.n0,
            e0: self.e1,
            e1: self.e0,
        }
    }
}

impl ArmOutcomes for TrialData {
    #[inline]
    fn arm_sizes(&self) -> (f64, f64) {
        (self.n0 as f64, self.n1 as f64)
    }

    #[inline]
    fn observed_risks(&self) -> (f64, f64) {
        (
            self.e0 as f64 / self.n0 as f64,
            self.e1 as f64 / self.n1 as f64,
        )
    }
}

/// Summary-level data: arm sizes plus reported proportions, for analysing
/// published results that give risks rather than counts.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ObservedRisks {
    pub n0: u64,
    pub n1: u64,
    pub pi0: f64,
    pub pi1: f64,
}

impl ObservedRisks {
    pub fn new(n0: u64, n1: u64, pi0: f64, pi1: f64) -> Result<Self> {
        if n0 == 0 || n1 == 0 {
            return Err(Error::InvalidTrialData("arm sizes must be positive".into()));
        }
        for p in [pi0, pi1] {
            if !(0.0..=1.0).contains(&p) {
                return Err(Error::InvalidRisk(p));
            }
        }
        Ok(ObservedRisks { n0, n1, pi0, pi1 })
    }
}

impl ArmOutcomes for ObservedRisks {
    fn arm_sizes(&self) -> (f64, f64) {
        (self.n0 as f64, self.n1 as f64)
    }

    fn observed_risks(&self) -> (f64, f64) {
        (self.pi0, self.pi1)
    }
}

/// A point estimate with its standard error on one scale.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EffectEstimate {
    pub scale: Scale,
    pub estimate: f64,
    pub se: f64,
}

/// Wald statistic, one-sided p-value and symmetric interval.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct WaldTest {
    pub z: f64,
    pub p: f64,
    pub ci: (f64, f64),
}

/// Estimate the effect of active versus control on `scale`.
pub fn estimate_effect<T: ArmOutcomes + ?Sized>(t: &T, scale: Scale) -> Result<EffectEstimate> {
    let (n0, n1) = t.arm_sizes();
    let (p0, p1) = t.observed_risks();
    let (estimate, se) = match scale {
        Scale::RiskDifference => {
            let se = (p0 * (1.0 - p0) / n0 + p1 * (1.0 - p1) / n1).sqrt();
            if !(se > 0.0) {
                return Err(Error::DegenerateVariance);
            }
            (p1 - p0, se)
        }
        Scale::LogRiskRatio => {
            if p0 <= 0.0 {
                return Err(Error::DegenerateRatio("control arm"));
            }
            if p1 <= 0.0 {
                return Err(Error::DegenerateRatio("active arm"));
            }
            let se = ((1.0 - p0) / (n0 * p0) + (1.0 - p1) / (n1 * p1)).sqrt();
            if !(se > 0.0) {
                // both arms all events
                return Err(Error::DegenerateVariance);
            }
            ((p1 / p0).ln(), se)
        }
        Scale::ArcsineDifference => (
            asin_sqrt_raw(p1) - asin_sqrt_raw(p0),
            (0.25 / n0 + 0.25 / n1).sqrt(),
        ),
    };
    Ok(EffectEstimate {
        scale,
        estimate,
        se,
    })
}

/// Test `H0: effect ≥ margin` at one-sided level `alpha`; the interval is
/// `estimate ± z_{1−α}·se`, i.e. two-sided level `1 − 2α`.
pub fn wald_test(e: &EffectEstimate, margin: f64, alpha: f64) -> Result<WaldTest> {
    check_alpha(alpha)?;
    let z = (e.estimate - margin) / e.se;
    let half = upper_critical(alpha)? * e.se;
    Ok(WaldTest {
        z,
        p: normal_cdf(z),
        ci: (e.estimate - half, e.estimate + half),
    })
}

fn check_alpha(alpha: f64) -> Result<()> {
    if alpha > 0.0 && alpha < 0.5 {
        Ok(())
    } else {
        Err(Error::InvalidStrategy(format!(
            "one-sided alpha {alpha} must lie in (0, 0.5)"
        )))
    }
}

/// Which reporting procedure produced a report.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Method {
    /// Test and report on the arcsine scale.
    Arcsine,
    /// Arcsine test reported on the RD scale against a back-calculated margin.
    BackcalcMargin,
    /// Arcsine test reported on the RD scale at a back-calculated level.
    BackcalcAlpha,
    /// Standard test at the fixed design margin.
    FixedMargin,
    /// Conditionally modify margin.
    Conditional,
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Method::Arcsine => "arcsine",
            Method::BackcalcMargin => "backcalc-margin",
            Method::BackcalcAlpha => "backcalc-alpha",
            Method::FixedMargin => "fixed-margin",
            Method::Conditional => "conditional",
        })
    }
}

/// Result of one analysis.
///
/// `estimate`, `se` and `margin_tested` are on the analysis scale (log scale
/// for risk ratios); `ci` is on the reporting scale, so risk-ratio intervals
/// are exponentiated.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AnalysisReport {
    pub method: Method,
    pub scale_reported: Scale,
    pub estimate: f64,
    pub se: f64,
    pub margin_tested: f64,
    /// One-sided level the interval and test were built with.
    pub alpha_used: f64,
    /// Two-sided confidence level reported alongside the interval.
    pub ci_level: f64,
    pub ci: (f64, f64),
    pub z: f64,
    pub p: f64,
    pub margin_modified: bool,
    pub noninferior: bool,
}

impl AnalysisReport {
    /// Margin on the reporting scale (a ratio for risk-ratio reports).
    pub fn reported_margin(&self) -> f64 {
        match self.scale_reported {
            Scale::LogRiskRatio => self.margin_tested.exp(),
            _ => self.margin_tested,
        }
    }
}

fn to_reporting_scale(scale: Scale, ci: (f64, f64)) -> (f64, f64) {
    match scale {
        Scale::LogRiskRatio => (ci.0.exp(), ci.1.exp()),
        _ => ci,
    }
}

fn require_power_stabilising(f: &Frontier) -> Result<()> {
    if f.shape() == FrontierShape::PowerStabilising {
        Ok(())
    } else {
        Err(Error::InvalidFrontier(format!(
            "procedure requires the power-stabilising frontier, got {:?}",
            f.shape()
        )))
    }
}

/// Test and report on the arcsine scale at the frontier's arcsine margin.
pub fn analyze_arcsine<T: ArmOutcomes + ?Sized>(
    t: &T,
    f: &Frontier,
    alpha: f64,
) -> Result<AnalysisReport> {
    require_power_stabilising(f)?;
    let e = estimate_effect(t, Scale::ArcsineDifference)?;
    let margin = f.arcsine_margin();
    let w = wald_test(&e, margin, alpha)?;
    Ok(AnalysisReport {
        method: Method::Arcsine,
        scale_reported: Scale::ArcsineDifference,
        estimate: e.estimate,
        se: e.se,
        margin_tested: margin,
        alpha_used: alpha,
        ci_level: 1.0 - 2.0 * alpha,
        ci: w.ci,
        z: w.z,
        p: w.p,
        margin_modified: false,
        noninferior: w.p < alpha,
    })
}

/// Arcsine test reported on the risk-difference scale: the RD margin is the
/// one whose Wald statistic equals the arcsine statistic.
pub fn backcalc_margin_rd<T: ArmOutcomes + ?Sized>(
    t: &T,
    f: &Frontier,
    alpha: f64,
) -> Result<AnalysisReport> {
    let arcsine = analyze_arcsine(t, f, alpha)?;
    let rd = estimate_effect(t, Scale::RiskDifference)?;
    let margin = rd.estimate - arcsine.z * rd.se;
    let half = upper_critical(alpha)? * rd.se;
    Ok(AnalysisReport {
        method: Method::BackcalcMargin,
        scale_reported: Scale::RiskDifference,
        estimate: rd.estimate,
        se: rd.se,
        margin_tested: margin,
        alpha_used: alpha,
        ci_level: 1.0 - 2.0 * alpha,
        ci: (rd.estimate - half, rd.estimate + half),
        z: arcsine.z,
        p: arcsine.p,
        margin_modified: true,
        noninferior: arcsine.noninferior,
    })
}

/// Arcsine test reported on the risk-difference scale against the frontier
/// margin at `π̂0`, with the level rescaled so the RD interval agrees with the
/// arcsine decision: `z_{1−α*} = z_{1−α} · Z_RD / Z_AS`.
pub fn backcalc_alpha_rd<T: ArmOutcomes + ?Sized>(
    t: &T,
    f: &Frontier,
    alpha: f64,
) -> Result<AnalysisReport> {
    let arcsine = analyze_arcsine(t, f, alpha)?;
    let rd = estimate_effect(t, Scale::RiskDifference)?;
    let (p0, _) = t.observed_risks();
    let margin = f.margin_raw(p0, Scale::RiskDifference)?;
    let z_rd = (rd.estimate - margin) / rd.se;
    if arcsine.z == 0.0 {
        return Err(Error::UndefinedRatio);
    }
    let ratio = z_rd / arcsine.z;
    if !(ratio > 0.0) {
        return Err(Error::InconsistentDirection);
    }
    let crit = upper_critical(alpha)? * ratio;
    let alpha_star = normal_cdf(-crit);
    let half = crit * rd.se;
    Ok(AnalysisReport {
        method: Method::BackcalcAlpha,
        scale_reported: Scale::RiskDifference,
        estimate: rd.estimate,
        se: rd.se,
        margin_tested: margin,
        alpha_used: alpha_star,
        ci_level: 1.0 - 2.0 * alpha_star,
        ci: (rd.estimate - half, rd.estimate + half),
        z: arcsine.z,
        p: arcsine.p,
        margin_modified: true,
        noninferior: arcsine.noninferior,
    })
}

/// Standard Wald test at the fixed design margin on `scale`.
pub fn analyze_fixed_margin<T: ArmOutcomes + ?Sized>(
    t: &T,
    d: &DesignSpec,
    scale: Scale,
    alpha: f64,
) -> Result<AnalysisReport> {
    let e = estimate_effect(t, scale)?;
    let margin = d.margin(scale)?;
    let w = wald_test(&e, margin, alpha)?;
    Ok(AnalysisReport {
        method: Method::FixedMargin,
        scale_reported: scale,
        estimate: e.estimate,
        se: e.se,
        margin_tested: margin,
        alpha_used: alpha,
        ci_level: 1.0 - 2.0 * alpha,
        ci: to_reporting_scale(scale, w.ci),
        z: w.z,
        p: w.p,
        margin_modified: false,
        noninferior: w.p < alpha,
    })
}

/// One range of an α lookup table: applies from `lower` (inclusive) up to
/// the next breakpoint's `lower`, or through 1 for the last entry.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Breakpoint {
    pub lower: f64,
    pub alpha: f64,
}

/// Observed-control-risk → one-sided α table.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "LookupRepr", into = "LookupRepr")]
pub struct AlphaLookup {
    breakpoints: Vec<Breakpoint>,
}

#[derive(Serialize, Deserialize)]
struct LookupRepr {
    breakpoints: Vec<Breakpoint>,
}

impl TryFrom<LookupRepr> for AlphaLookup {
    type Error = Error;
    fn try_from(r: LookupRepr) -> Result<Self> {
        AlphaLookup::new(r.breakpoints)
    }
}

impl From<AlphaLookup> for LookupRepr {
    fn from(l: AlphaLookup) -> Self {
        LookupRepr {
            breakpoints: l.breakpoints,
        }
    }
}

impl AlphaLookup {
    pub fn new(breakpoints: Vec<Breakpoint>) -> Result<Self> {
        if breakpoints.is_empty() {
            return Err(Error::InvalidStrategy("lookup table is empty".into()));
        }
        for b in &breakpoints {
            if !(0.0..1.0).contains(&b.lower) {
                return Err(Error::InvalidStrategy(format!(
                    "breakpoint {} outside [0, 1)",
                    b.lower
                )));
            }
            check_alpha(b.alpha)?;
        }
        if breakpoints.windows(2).any(|w| w[1].lower <= w[0].lower) {
            return Err(Error::InvalidStrategy(
                "breakpoints must be strictly increasing".into(),
            ));
        }
        Ok(AlphaLookup { breakpoints })
    }

    pub fn breakpoints(&self) -> &[Breakpoint] {
        &self.breakpoints
    }

    /// True when the table assigns an α to every risk in `[0, 1]`.
    pub fn is_total(&self) -> bool {
        self.breakpoints[0].lower == 0.0
    }

    pub fn alpha_for(&self, pi0_hat: f64) -> Result<f64> {
        if !(0.0..=1.0).contains(&pi0_hat) {
            return Err(Error::LookupNotCovering(pi0_hat));
        }
        // last breakpoint with lower <= pi0_hat
        let idx = self.breakpoints.partition_point(|b| b.lower <= pi0_hat);
        if idx == 0 {
            return Err(Error::LookupNotCovering(pi0_hat));
        }
        Ok(self.breakpoints[idx - 1].alpha)
    }
}

/// How the one-sided testing level is chosen.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AlphaStrategy {
    Nominal(f64),
    ReducedFixed(f64),
    Lookup(AlphaLookup),
}

impl AlphaStrategy {
    pub fn validate(&self) -> Result<()> {
        match self {
            AlphaStrategy::Nominal(a) | AlphaStrategy::ReducedFixed(a) => check_alpha(*a),
            AlphaStrategy::Lookup(_) => Ok(()),
        }
    }

    /// Testing level given the observed control risk.
    pub fn alpha_for(&self, pi0_hat: f64) -> Result<f64> {
        match self {
            AlphaStrategy::Nominal(a) | AlphaStrategy::ReducedFixed(a) => Ok(*a),
            AlphaStrategy::Lookup(l) => l.alpha_for(pi0_hat),
        }
    }
}

/// Default modification thresholds (smallest of the studied ones).
pub const DEFAULT_EPSILON_RD: f64 = 0.0125;
pub fn default_epsilon_rr() -> f64 {
    1.25f64.ln()
}

/// Parameters of the conditionally-modify-margin procedure.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConditionalRule {
    /// Risk difference or log risk ratio.
    pub scale: Scale,
    /// Threshold on `|π̂0 − π_e0|` (RD) or `|log(π̂0/π_e0)|` (RR).
    pub epsilon: f64,
    pub strategy: AlphaStrategy,
}

impl ConditionalRule {
    pub fn new(scale: Scale, epsilon: f64, strategy: AlphaStrategy) -> Result<Self> {
        if scale == Scale::ArcsineDifference {
            return Err(Error::InvalidStrategy(
                "conditional modification is defined on the RD and RR scales only".into(),
            ));
        }
        if !(epsilon > 0.0) {
            return Err(Error::InvalidStrategy(format!(
                "threshold {epsilon} must be positive"
            )));
        }
        strategy.validate()?;
        Ok(ConditionalRule {
            scale,
            epsilon,
            strategy,
        })
    }

    /// Whether `π̂0` is far enough from `π_e0` to trigger modification.
    pub fn exceeds_threshold(&self, pi0_hat: f64, pi_e0: f64) -> bool {
        let distance = match self.scale {
            Scale::LogRiskRatio => (pi0_hat / pi_e0).ln().abs(),
            _ => (pi0_hat - pi_e0).abs(),
        };
        distance > self.epsilon
    }
}

/// Conditionally modify margin: keep the design margin unless `π̂0` strays
/// more than `ε` from `π_e0`, in which case test against the power-stabilising
/// frontier's margin at `π̂0`.
///
/// The interval half-width uses the testing level from the strategy, while
/// `ci_level` keeps the nominal `1 − 2α` label of the design.
pub fn conditional_modify_margin<T: ArmOutcomes + ?Sized>(
    t: &T,
    d: &DesignSpec,
    rule: &ConditionalRule,
) -> Result<AnalysisReport> {
    let scale = rule.scale;
    let e = estimate_effect(t, scale)?;
    let (p0, _) = t.observed_risks();
    let pi_e0 = d.pi_e0.get();
    let modified = rule.exceeds_threshold(p0, pi_e0);
    let margin = if modified {
        d.frontier()?.margin_raw(p0, scale)?
    } else {
        d.margin(scale)?
    };
    let alpha = rule.strategy.alpha_for(p0)?;
    let w = wald_test(&e, margin, alpha)?;
    Ok(AnalysisReport {
        method: Method::Conditional,
        scale_reported: scale,
        estimate: e.estimate,
        se: e.se,
        margin_tested: margin,
        alpha_used: alpha,
        ci_level: 1.0 - 2.0 * d.alpha,
        ci: to_reporting_scale(scale, w.ci),
        z: w.z,
        p: w.p,
        margin_modified: modified,
        noninferior: w.p < alpha,
    })
}
