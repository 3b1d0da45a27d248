//! Parameter grid of the published three-outcome design table
//! (HR0, HR1, alpha, beta, eta, pi), all with 1:1 allocation.

use serde::Serialize;
use tte3o_core::{solve_fixed_design, DesignSpec, Result};

pub const GRID: [(f64, f64, f64, f64, f64, f64); 34] = [
    (1.0, 0.5, 0.1, 0.1, 0.8, 0.8),
    (1.0, 0.5, 0.15, 0.15, 0.75, 0.75),
    (1.0, 0.55, 0.1, 0.1, 0.8, 0.8),
    (1.0, 0.55, 0.15, 0.15, 0.75, 0.75),
    (1.0, 0.55, 0.15, 0.15, 0.7, 0.7),
    (1.0, 0.6, 0.1, 0.1, 0.8, 0.8),
    (1.0, 0.6, 0.15, 0.15, 0.75, 0.75),
    (1.0, 0.6, 0.15, 0.15, 0.7, 0.7),
    (1.0, 0.6, 0.2, 0.2, 0.7, 0.7),
    (1.0, 0.65, 0.1, 0.1, 0.8, 0.8),
    (1.0, 0.65, 0.15, 0.15, 0.75, 0.75),
    (1.0, 0.65, 0.15, 0.15, 0.7, 0.7),
    (1.0, 0.65, 0.2, 0.2, 0.7, 0.7),
    (1.0, 0.65, 0.25, 0.25, 0.7, 0.7),
    (1.0, 0.7, 0.1, 0.1, 0.8, 0.8),
    (1.0, 0.7, 0.15, 0.15, 0.75, 0.75),
    (1.0, 0.7, 0.15, 0.15, 0.7, 0.7),
    (1.0, 0.7, 0.2, 0.2, 0.7, 0.7),
    (1.0, 0.7, 0.25, 0.25, 0.7, 0.7),
    (1.0, 0.75, 0.15, 0.15, 0.75, 0.75),
    (1.0, 0.75, 0.15, 0.15, 0.7, 0.7),
    (1.0, 0.75, 0.2, 0.2, 0.7, 0.7),
    (1.0, 0.75, 0.25, 0.25, 0.7, 0.7),
    (1.0, 0.8, 0.2, 0.2, 0.7, 0.7),
    (1.0, 0.8, 0.25, 0.25, 0.7, 0.7),
    (1.1, 0.8, 0.15, 0.15, 0.75, 0.75),
    (1.1, 0.8, 0.15, 0.15, 0.7, 0.7),
    (1.1, 0.8, 0.2, 0.2, 0.7, 0.7),
    (1.1, 0.8, 0.25, 0.25, 0.7, 0.7),
    (1.2, 0.8, 0.1, 0.1, 0.8, 0.8),
    (1.2, 0.8, 0.15, 0.15, 0.75, 0.75),
    (1.2, 0.8, 0.15, 0.15, 0.7, 0.7),
    (1.2, 0.8, 0.2, 0.2, 0.7, 0.7),
    (1.2, 0.8, 0.25, 0.25, 0.7, 0.7),
];

#[derive(Debug, Clone, Copy, Serialize)]
pub struct TableRow {
    pub hr0: f64,
    pub hr1: f64,
    pub alpha: f64,
    pub beta: f64,
    pub eta: f64,
    pub pi: f64,
    pub d: u64,
    pub hr_lower: f64,
    pub hr_upper: f64,
}

pub fn rows() -> Result<Vec<TableRow>> {
    GRID.iter()
        .map(|&(hr0, hr1, alpha, beta, eta, pi)| {
            let d =
                solve_fixed_design(&DesignSpec::new(hr0, hr1, alpha, beta, pi, eta, 1.0), true)?;
            Ok(TableRow {
                hr0,
                hr1,
                alpha,
                beta,
                eta,
                pi,
                d: d.n_events_d,
                hr_lower: d.boundary_lower_hr,
                hr_upper: d.boundary_upper_hr,
            })
        })
        .collect()
}
