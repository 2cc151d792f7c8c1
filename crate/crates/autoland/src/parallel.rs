//! Rayon-parallel versions of the sweep and the tolerance searches.
//!
//! Each worker builds its own simulator state from the shared scenario, and
//! all randomness comes from per-cell or per-draw seeds, so results match
//! the sequential versions exactly.

use autoland_core::falsify::{
    evaluate_cell, tolerance_search, Channel, FalsifierConfig, SatisfactionMap, SweepConfig, ToleranceResult,
};
use autoland_core::{Result, Scenario};
use rayon::prelude::*;

pub fn ic_sweep(scenario: &Scenario, cfg: &SweepConfig) -> Result<SatisfactionMap> {
    let cells = cfg
        .cells()?
        .par_iter()
        .map(|c| evaluate_cell(scenario, c))
        .collect::<Result<Vec<_>>>()?;
    SatisfactionMap::from_cells(cfg.grid.0, cfg.grid.1, cells)
}

/// One tolerance search per channel, in the order given.
pub fn tolerance_searches(
    scenario: &Scenario,
    channels: &[Channel],
    cfg: &FalsifierConfig,
) -> Result<Vec<ToleranceResult>> {
    channels
        .par_iter()
        .map(|c| tolerance_search(scenario, *c, cfg))
        .collect()
}
