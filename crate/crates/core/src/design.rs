//! Sample size and power for non-inferiority designs with a binary outcome.
//!
//! All three scales use the same normal-approximation identity
//!
//! ```text
//! n0 = (z_{1-α} + z_{1-β})² · V / (θ_e − δ)²
//! ```
//!
//! where `θ_e` is the expected effect, `δ` the margin and `V` the per-control-patient
//! variance of the estimator: `π0(1−π0) + π1(1−π1)/r` for the risk difference,
//! `(1−π0)/π0 + (1−π1)/(r·π1)` for the log risk ratio and `1/4 + 1/(4r)` for the
//! arcsine difference.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::frontier::{asin_sqrt_raw, Frontier, Risk, Scale};
use crate::normal::upper_critical;

pub use crate::normal::{normal_cdf, normal_quantile};

/// Design-stage assumptions.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DesignSpec {
    /// Expected control-arm risk.
    pub pi_e0: Risk,
    /// Expected active-arm risk.
    pub pi_e1: Risk,
    /// Largest tolerable active-arm risk when the control risk equals `pi_e0`.
    pub pi_f1: Risk,
    /// Allocation ratio n1 / n0.
    pub ratio: f64,
    /// One-sided significance level.
    pub alpha: f64,
    /// Target power.
    pub power: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct SampleSize {
    pub n0: u64,
    pub n1: u64,
    pub total: u64,
}

impl SampleSize {
    pub fn new(n0: u64, n1: u64) -> Result<Self> {
        if n0 == 0 || n1 == 0 {
            return Err(Error::InvalidDesign("arm sizes must be positive".into()));
        }
        Ok(SampleSize {
            n0,
            n1,
            total: n0 + n1,
        })
    }
}

impl DesignSpec {
    pub fn new(
        pi_e0: f64,
        pi_e1: f64,
        pi_f1: f64,
        ratio: f64,
        alpha: f64,
        power: f64,
    ) -> Result<Self> {
        let spec = DesignSpec {
            pi_e0: Risk::new(pi_e0)?,
            pi_e1: Risk::new(pi_e1)?,
            pi_f1: Risk::new(pi_f1)?,
            ratio,
            alpha,
            power,
        };
        spec.validate()?;
        Ok(spec)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.ratio > 0.0 && self.ratio.is_finite()) {
            return Err(Error::InvalidDesign(format!(
                "allocation ratio {} must be positive",
                self.ratio
            )));
        }
        if !(self.alpha > 0.0 && self.alpha < 0.5) {
            return Err(Error::InvalidDesign(format!(
                "one-sided alpha {} must lie in (0, 0.5)",
                self.alpha
            )));
        }
        if !(self.power >= 0.5 && self.power < 1.0) {
            return Err(Error::InvalidDesign(format!(
                "power {} must lie in [0.5, 1)",
                self.power
            )));
        }
        // anchors must define a frontier
        self.frontier()?;
        Ok(())
    }

    /// The power-stabilising frontier through `(pi_e0, pi_f1)`.
    pub fn frontier(&self) -> Result<Frontier> {
        Frontier::power_stabilising(self.pi_e0, self.pi_f1)
    }

    /// Design margin on `scale`, fixed by the anchors.
    pub fn margin(&self, scale: Scale) -> Result<f64> {
        self.frontier()?.margin_on_scale(self.pi_e0, scale)
    }

    pub fn with_alpha(&self, alpha: f64) -> Self {
        DesignSpec { alpha, ..*self }
    }
}

fn effect(scale: Scale, p0: f64, p1: f64) -> Result<f64> {
    match scale {
        Scale::RiskDifference => Ok(p1 - p0),
        Scale::LogRiskRatio => {
            if p0 <= 0.0 {
                Err(Error::DegenerateRatio("control arm"))
            } else if p1 <= 0.0 {
                Err(Error::DegenerateRatio("active arm"))
            } else {
                Ok((p1 / p0).ln())
            }
        }
        Scale::ArcsineDifference => Ok(asin_sqrt_raw(p1) - asin_sqrt_raw(p0)),
    }
}

/// Variance of the effect estimator with `n0`, `n1` patients.
fn estimator_variance(scale: Scale, p0: f64, p1: f64, n0: f64, n1: f64) -> Result<f64> {
    let v = match scale {
        Scale::RiskDifference => p0 * (1.0 - p0) / n0 + p1 * (1.0 - p1) / n1,
        Scale::LogRiskRatio => {
            if p0 <= 0.0 || p1 <= 0.0 {
                return Err(Error::DegenerateRatio("expected risks"));
            }
            (1.0 - p0) / (n0 * p0) + (1.0 - p1) / (n1 * p1)
        }
        Scale::ArcsineDifference => 0.25 / n0 + 0.25 / n1,
    };
    if v > 0.0 {
        Ok(v)
    } else {
        Err(Error::DegenerateVariance)
    }
}

/// Unrounded control-arm size solving the design identity.
pub fn required_n0(d: &DesignSpec, scale: Scale) -> Result<f64> {
    d.validate()?;
    let (p0, p1) = (d.pi_e0.get(), d.pi_e1.get());
    let gap = d.margin(scale)? - effect(scale, p0, p1)?;
    if !(gap > 0.0) {
        return Err(Error::InfeasibleDesign);
    }
    let z = upper_critical(d.alpha)? + upper_critical(1.0 - d.power)?;
    let per_control = estimator_variance(scale, p0, p1, 1.0, d.ratio)?;
    Ok(z * z * per_control / (gap * gap))
}

/// Per-arm sample size: `n0` rounded up, then `n1 = ⌈r · n0⌉`.
pub fn sample_size(d: &DesignSpec, scale: Scale) -> Result<SampleSize> {
    let n0 = required_n0(d, scale)?;
    // guard against 400.0000000001 from rounding in the quantiles
    let n0 = (n0 - 1e-9).ceil().max(1.0);
    let n1 = (d.ratio * n0 - 1e-9).ceil().max(1.0);
    SampleSize::new(n0 as u64, n1 as u64)
}

/// Sample size recomputed at a reduced one-sided level `alpha_used`.
pub fn inflated_design(d: &DesignSpec, scale: Scale, alpha_used: f64) -> Result<SampleSize> {
    if !(alpha_used > 0.0 && alpha_used <= d.alpha) {
        return Err(Error::InvalidDesign(format!(
            "inflation level {alpha_used} must lie in (0, {}]",
            d.alpha
        )));
    }
    sample_size(&d.with_alpha(alpha_used), scale)
}

/// Approximate power of the fixed-margin Wald test at the true risks.
///
/// The margin stays at its design value on `scale`; only the variance and the
/// expected effect move with the true risks.
pub fn power(
    d: &DesignSpec,
    scale: Scale,
    n: &SampleSize,
    true_pi0: Risk,
    true_pi1: Risk,
) -> Result<f64> {
    power_real(d, scale, n.n0 as f64, n.n1 as f64, true_pi0, true_pi1)
}

/// [`power`] for real-valued arm sizes.
pub fn power_real(
    d: &DesignSpec,
    scale: Scale,
    n0: f64,
    n1: f64,
    true_pi0: Risk,
    true_pi1: Risk,
) -> Result<f64> {
    d.validate()?;
    let (p0, p1) = (true_pi0.get(), true_pi1.get());
    let gap = d.margin(scale)? - effect(scale, p0, p1)?;
    let se = estimator_variance(scale, p0, p1, n0, n1)?.sqrt();
    Ok(normal_cdf(gap / se - upper_critical(d.alpha)?))
}
