//! Choosing the testing level from the observed control risk.
//!
//! For every control risk on the grid, the boundary-null rejection rate is
//! simulated at each candidate level and the largest level whose rate stays
//! within `alpha_design + slack · mc_se` is kept. Runs of grid points sharing
//! a level collapse into one lookup range, keyed on the observed control risk.

use serde::{Deserialize, Serialize};

use super::{
    run_grid_multi, validate_grid, GridResult, Hypothesis, ModifyKind, Procedure, ScenarioSpec,
};
use crate::analysis::{AlphaLookup, AlphaStrategy, Breakpoint};
use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CalibrationCell {
    pub pi0: f64,
    /// Selected level.
    pub alpha: f64,
    /// Null operating characteristics at the selected level.
    pub result: GridResult,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Calibration {
    pub lookup: AlphaLookup,
    pub cells: Vec<CalibrationCell>,
}

impl Calibration {
    pub fn strategy(&self) -> AlphaStrategy {
        AlphaStrategy::Lookup(self.lookup.clone())
    }
}

/// Calibrates a control-risk-dependent α for procedure `kind`.
///
/// `slack` is the number of Monte Carlo standard errors a rate may exceed
/// `alpha_design` by; zero is the strict rule.
pub fn calibrate_alpha(
    scenario: &ScenarioSpec,
    kind: ModifyKind,
    grid: &[f64],
    candidates: &[f64],
    reps: u64,
    master_seed: u64,
    slack: f64,
) -> Result<Calibration> {
    validate_grid(grid, reps)?;
    if candidates.is_empty() {
        return Err(Error::InvalidStrategy("no candidate levels".into()));
    }
    if candidates.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::InvalidStrategy(
            "candidate levels must be strictly ascending".into(),
        ));
    }
    let nominal = scenario.alpha_design;
    if candidates[0] <= 0.0 || candidates[candidates.len() - 1] > nominal {
        return Err(Error::InvalidStrategy(format!(
            "candidate levels must lie in (0, {nominal}]"
        )));
    }
    if !(slack >= 0.0) {
        return Err(Error::InvalidStrategy(format!(
            "slack {slack} must be non-negative"
        )));
    }
    if grid.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::InvalidGrid(
            "calibration grid must be strictly ascending".into(),
        ));
    }

    let procs = candidates
        .iter()
        .map(|&a| {
            let strategy = if a == nominal {
                AlphaStrategy::Nominal(a)
            } else {
                AlphaStrategy::ReducedFixed(a)
            };
            Procedure::new(kind, strategy)
        })
        .collect::<Result<Vec<_>>>()?;
    let results = run_grid_multi(scenario, &procs, Hypothesis::Null, grid, reps, master_seed)?;

    let mut cells = Vec::with_capacity(grid.len());
    let mut failed = Vec::new();
    for (i, &pi0) in grid.iter().enumerate() {
        let chosen = (0..candidates.len()).rev().find(|&k| {
            let r = &results[k][i];
            r.rejection_rate <= nominal + slack * r.mc_se
        });
        match chosen {
            Some(k) => cells.push(CalibrationCell {
                pi0,
                alpha: candidates[k],
                result: results[k][i],
            }),
            None => failed.push(pi0),
        }
    }
    if !failed.is_empty() {
        return Err(Error::UncontrollableCell(failed));
    }

    let mut breakpoints: Vec<Breakpoint> = Vec::new();
    for cell in &cells {
        match breakpoints.last() {
            Some(b) if b.alpha == cell.alpha => {}
            Some(_) => breakpoints.push(Breakpoint {
                lower: cell.pi0,
                alpha: cell.alpha,
            }),
            None => breakpoints.push(Breakpoint {
                lower: 0.0,
                alpha: cell.alpha,
            }),
        }
    }
    Ok(Calibration {
        lookup: AlphaLookup::new(breakpoints)?,
        cells,
    })
}
