//! Shared inputs for the benchmarks.

use ghzsim_core::history::{default_grid, HistoryEngine};
use ghzsim_core::CircuitLayout;

pub fn standard_engine() -> HistoryEngine {
    HistoryEngine::new(CircuitLayout::standard())
}

pub fn sweep_grid() -> Vec<f64> {
    default_grid()
}
