//! Design and analysis of binary-outcome non-inferiority trials under an
//! explicit non-inferiority frontier.
//!
//! - [`frontier`]: arcsine transforms and the fixed-RD, fixed-RR and
//!   power-stabilising frontiers.
//! - [`design`]: sample size and power on the three effect scales.
//! - [`analysis`]: estimates, Wald tests and the reporting procedures,
//!   including conditional margin modification.
//! - [`sim`]: Monte Carlo operating characteristics, α calibration and an
//!   exact enumeration oracle.

pub mod analysis;
pub mod design;
pub mod error;
pub mod frontier;
pub mod normal;
pub mod sim;

pub use analysis::{
    analyze_arcsine, analyze_fixed_margin, backcalc_alpha_rd, backcalc_margin_rd,
    conditional_modify_margin, estimate_effect, wald_test, AlphaLookup, AlphaStrategy,
    AnalysisReport, ArmOutcomes, Breakpoint, ConditionalRule, EffectEstimate, Method,
    ObservedRisks, TrialData, WaldTest,
};
pub use design::{inflated_design, power, sample_size, DesignSpec, SampleSize};
pub use error::{Error, Result};
pub use frontier::{asin_sqrt, inv_asin_sqrt, Frontier, FrontierShape, Risk, Scale};
pub use normal::{normal_cdf, normal_quantile};
