//! Variance-stabilising transforms and non-inferiority frontiers.
//!
//! A frontier maps any control-arm event risk to the largest active-arm risk
//! that would still be judged non-inferior. Three shapes are supported: a fixed
//! risk difference, a fixed risk ratio, and the power-stabilising frontier that
//! holds the arcsine difference `asin(√π₁) − asin(√π₀)` constant.

use std::f64::consts::FRAC_PI_2;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// An event probability in `[0, 1]`.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd, Serialize, Deserialize)]
#[serde(try_from = "f64", into = "f64")]
pub struct Risk(f64);

impl Risk {
    pub fn new(value: f64) -> Result<Self> {
        if (0.0..=1.0).contains(&value) {
            Ok(Risk(value))
        } else {
            Err(Error::InvalidRisk(value))
        }
    }

    #[inline]
    pub fn get(self) -> f64 {
        self.0
    }
}

impl TryFrom<f64> for Risk {
    type Error = Error;
    fn try_from(value: f64) -> Result<Self> {
        Risk::new(value)
    }
}

impl From<Risk> for f64 {
    fn from(r: Risk) -> f64 {
        r.0
    }
}

impl fmt::Display for Risk {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.0.fmt(f)
    }
}

/// Effect scale on which margins, estimates and tests are expressed.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Scale {
    RiskDifference,
    LogRiskRatio,
    ArcsineDifference,
}

impl Scale {
    pub fn short_name(self) -> &'static str {
        match self {
            Scale::RiskDifference => "rd",
            Scale::LogRiskRatio => "rr",
            Scale::ArcsineDifference => "as",
        }
    }
}

impl fmt::Display for Scale {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.short_name())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FrontierShape {
    FixedRiskDifference,
    FixedRiskRatio,
    PowerStabilising,
}

/// A frontier anchored at the expected control risk and the largest tolerable
/// active risk at that control risk.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Frontier {
    shape: FrontierShape,
    anchor_control: Risk,
    anchor_tolerable: Risk,
}

/// `asin(√p)`, in radians on `[0, π/2]`.
#[inline]
pub fn asin_sqrt(p: Risk) -> f64 {
    asin_sqrt_raw(p.get())
}

#[inline]
pub(crate) fn asin_sqrt_raw(p: f64) -> f64 {
    p.sqrt().asin()
}

/// `sin(a)²`, the inverse of [`asin_sqrt`] on `[0, π/2]`.
pub fn inv_asin_sqrt(angle: f64) -> Result<Risk> {
    if !(0.0..=FRAC_PI_2).contains(&angle) {
        return Err(Error::InvalidAngle(angle));
    }
    let s = angle.sin();
    // sin(π/2)² may round a hair above or below 1
    Ok(Risk((s * s).clamp(0.0, 1.0)))
}

impl Frontier {
    pub fn new(shape: FrontierShape, anchor_control: Risk, anchor_tolerable: Risk) -> Result<Self> {
        let (c, t) = (anchor_control.get(), anchor_tolerable.get());
        if !(c > 0.0 && c < 1.0 && t > 0.0 && t < 1.0) {
            return Err(Error::InvalidFrontier(format!(
                "anchors must lie strictly inside (0, 1), got ({c}, {t})"
            )));
        }
        if t <= c {
            return Err(Error::InvalidFrontier(format!(
                "tolerable risk {t} must exceed control risk {c}"
            )));
        }
        Ok(Frontier {
            shape,
            anchor_control,
            anchor_tolerable,
        })
    }

    pub fn power_stabilising(anchor_control: Risk, anchor_tolerable: Risk) -> Result<Self> {
        Self::new(
            FrontierShape::PowerStabilising,
            anchor_control,
            anchor_tolerable,
        )
    }

    pub fn shape(&self) -> FrontierShape {
        self.shape
    }

    pub fn anchor_control(&self) -> Risk {
        self.anchor_control
    }

    pub fn anchor_tolerable(&self) -> Risk {
        self.anchor_tolerable
    }

    /// Constant arcsine-difference margin implied by the anchors.
    pub fn arcsine_margin(&self) -> f64 {
        asin_sqrt(self.anchor_tolerable) - asin_sqrt(self.anchor_control)
    }

    /// Largest active-arm risk tolerated when the control risk is `pi0`.
    ///
    /// The result is clamped at 1 for shapes that would otherwise leave the
    /// unit interval at high control risk.
    pub fn tolerable_active_risk(&self, pi0: Risk) -> Risk {
        Risk(self.tolerable_raw(pi0.get()))
    }

    #[inline]
    pub(crate) fn tolerable_raw(&self, p0: f64) -> f64 {
        let c = self.anchor_control.get();
        let t = self.anchor_tolerable.get();
        match self.shape {
            FrontierShape::FixedRiskDifference => (p0 + (t - c)).min(1.0),
            FrontierShape::FixedRiskRatio => (p0 * (t / c)).min(1.0),
            FrontierShape::PowerStabilising => {
                let a = (asin_sqrt_raw(p0) + self.arcsine_margin()).min(FRAC_PI_2);
                let s = a.sin();
                (s * s).min(1.0)
            }
        }
    }

    /// Margin implied by the frontier at control risk `pi0`, expressed on `scale`.
    pub fn margin_on_scale(&self, pi0: Risk, scale: Scale) -> Result<f64> {
        self.margin_raw(pi0.get(), scale)
    }

    #[inline]
    pub(crate) fn margin_raw(&self, p0: f64, scale: Scale) -> Result<f64> {
        let p1 = self.tolerable_raw(p0);
        match scale {
            Scale::RiskDifference => Ok(p1 - p0),
            Scale::LogRiskRatio => {
                if p0 <= 0.0 {
                    Err(Error::DegenerateRatio("control arm"))
                } else {
                    Ok((p1 / p0).ln())
                }
            }
            Scale::ArcsineDifference => Ok(asin_sqrt_raw(p1) - asin_sqrt_raw(p0)),
        }
    }
}
