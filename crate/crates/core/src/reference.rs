//! Reference operating points for the regression table.
//!
//! Eight published `(eta, N)` pairs with the mutual information (in bits)
//! of the optimized number-state channel, the thermal-prior number-state
//! channel, and the coherent-state channel, plus the percent improvement
//! from the optimization. The tolerances are what the regression suite
//! and the `table` subcommand enforce; [`compute_table`] recomputes all
//! eight rows from scratch.

use rayon::prelude::*;

use crate::blahut::{solve_power, BlahutConfig, BlahutRun};
use crate::error::Result;
use crate::gaussian::heterodyne_capacity;
use crate::number::{discrete_mi, LossKernel};
use crate::types::{thermal_prior, ChannelPoint, Information};

/// One row of the reference table.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ReferenceRow {
    pub label: char,
    pub eta: f64,
    pub n_mean: f64,
    pub i_opt_bits: f64,
    pub i_th_bits: f64,
    pub i_coh_bits: f64,
    pub improvement_pct: f64,
}

/// The eight reference rows (a-h).
pub const TABLE: [ReferenceRow; 8] = [
    ReferenceRow {
        label: 'a',
        eta: 0.90,
        n_mean: 8.575,
        i_opt_bits: 3.157,
        i_th_bits: 3.097,
        i_coh_bits: 3.124,
        improvement_pct: 1.93,
    },
    ReferenceRow {
        label: 'b',
        eta: 0.75,
        n_mean: 2.827,
        i_opt_bits: 1.775,
        i_th_bits: 1.699,
        i_coh_bits: 1.642,
        improvement_pct: 4.50,
    },
    ReferenceRow {
        label: 'c',
        eta: 0.60,
        n_mean: 2.414,
        i_opt_bits: 1.340,
        i_th_bits: 1.218,
        i_coh_bits: 1.292,
        improvement_pct: 10.03,
    },
    ReferenceRow {
        label: 'd',
        eta: 0.60,
        n_mean: 6.930,
        i_opt_bits: 1.935,
        i_th_bits: 1.745,
        i_coh_bits: 2.367,
        improvement_pct: 10.90,
    },
    ReferenceRow {
        label: 'e',
        eta: 0.55,
        n_mean: 2.288,
        i_opt_bits: 1.219,
        i_th_bits: 1.083,
        i_coh_bits: 1.175,
        improvement_pct: 12.56,
    },
    ReferenceRow {
        label: 'f',
        eta: 0.55,
        n_mean: 6.729,
        i_opt_bits: 1.803,
        i_th_bits: 1.595,
        i_coh_bits: 2.233,
        improvement_pct: 13.07,
    },
    ReferenceRow {
        label: 'g',
        eta: 0.40,
        n_mean: 1.888,
        i_opt_bits: 0.887,
        i_th_bits: 0.715,
        i_coh_bits: 0.812,
        improvement_pct: 24.18,
    },
    ReferenceRow {
        label: 'h',
        eta: 0.15,
        n_mean: 4.040,
        i_opt_bits: 0.720,
        i_th_bits: 0.416,
        i_coh_bits: 0.684,
        improvement_pct: 73.08,
    },
];

/// Regression tolerances, one per table column.
pub mod tolerance {
    /// Coherent column: closed form, tight.
    pub const I_COH_BITS: f64 = 0.001;
    /// Thermal column: dim-200 numerical evaluation.
    pub const I_TH_BITS: f64 = 0.002;
    /// Optimized column at the 1e4-iteration regression budget.
    pub const I_OPT_BITS: f64 = 0.01;
    /// Percent-improvement column, in percentage points.
    pub const IMPROVEMENT_PCT: f64 = 1.0;
}

/// Iteration budget the `i_opt` tolerance is calibrated against.
pub const REGRESSION_MAX_ITERS: usize = 10_000;

/// Optimizer configuration for the regression table: the default run
/// settings with the iteration budget the tolerances were pinned at.
pub fn regression_config() -> BlahutConfig {
    BlahutConfig {
        max_iters: REGRESSION_MAX_ITERS,
        ..Default::default()
    }
}

/// A reference row recomputed from scratch.
#[derive(Debug, Clone)]
pub struct ComputedRow {
    pub reference: ReferenceRow,
    /// The optimizer run that produced `i_opt` (power within 0.1% of the
    /// row's published mean photon number).
    pub run: BlahutRun,
    pub i_opt: Information,
    pub i_th: Information,
    pub i_coh: Information,
    pub improvement_pct: f64,
}

impl ComputedRow {
    pub fn delta_i_opt_bits(&self) -> f64 {
        self.i_opt.bits() - self.reference.i_opt_bits
    }

    pub fn delta_i_th_bits(&self) -> f64 {
        self.i_th.bits() - self.reference.i_th_bits
    }

    pub fn delta_i_coh_bits(&self) -> f64 {
        self.i_coh.bits() - self.reference.i_coh_bits
    }

    pub fn delta_improvement_pct(&self) -> f64 {
        self.improvement_pct - self.reference.improvement_pct
    }

    /// Whether every column sits within its regression tolerance.
    pub fn within_tolerances(&self) -> bool {
        self.delta_i_coh_bits().abs() <= tolerance::I_COH_BITS
            && self.delta_i_th_bits().abs() <= tolerance::I_TH_BITS
            && self.delta_i_opt_bits().abs() <= tolerance::I_OPT_BITS
            && self.delta_improvement_pct().abs() <= tolerance::IMPROVEMENT_PCT
    }
}

/// Recomputes one reference row: closed-form coherent capacity, thermal
/// mutual information at the published power, and the power-targeted
/// prior optimization.
pub fn compute_row(row: &ReferenceRow, cfg: &BlahutConfig) -> Result<ComputedRow> {
    let pt = ChannelPoint::new(row.eta, row.n_mean)?;
    let i_coh = heterodyne_capacity(pt);
    let kernel = LossKernel::new(row.eta, cfg.dim)?;
    let i_th = discrete_mi(&thermal_prior(row.n_mean, cfg.dim)?, &kernel)?;
    let run = solve_power(row.eta, row.n_mean, cfg)?;
    let i_opt = run.mi;
    let improvement_pct = 100.0 * (i_opt.nats() - i_th.nats()) / i_th.nats();
    Ok(ComputedRow {
        reference: *row,
        run,
        i_opt,
        i_th,
        i_coh,
        improvement_pct,
    })
}

/// Recomputes all eight rows; rows are independent, so they run in
/// parallel.
pub fn compute_table(cfg: &BlahutConfig) -> Result<Vec<ComputedRow>> {
    TABLE.par_iter().map(|row| compute_row(row, cfg)).collect()
}
