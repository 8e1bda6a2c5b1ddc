//! Optimality diagrams and curve families over the loss-power plane.
//!
//! A sweep evaluates the mutual information of a chosen set of channels
//! on an `(eta, N)` grid and labels each cell with the winning channel,
//! producing the data behind the optimality-region diagrams. The curve
//! helpers cover the optimal squeezing-photon budget versus power, the
//! percent gain of loss-aware squeezing, and the degradation of each
//! channel with attenuation at fixed power.
//!
//! Cells are independent, so sweeps evaluate in parallel; results are
//! assembled in row-major order (power outer, attenuation inner) no
//! matter the execution order.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use rayon::prelude::*;

use crate::blahut::{solve_power, BlahutConfig};
use crate::error::{Error, Result};
use crate::gaussian::{
    heterodyne_capacity, optimal_xi, optimized_homodyne_mi, unoptimized_homodyne_mi,
};
use crate::number::{discrete_mi, LossKernel};
use crate::types::{thermal_prior, ChannelPoint, Information};

/// Two capacities closer than this (in nats) count as a tie; ties go to
/// the channel earlier in the [`ChannelKind`] order.
pub const TIE_TOL_NATS: f64 = 1e-9;

/// The channels a sweep can compare. The declaration order is the fixed
/// tie-breaking order: coherent < squeezed < number.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum ChannelKind {
    /// Heterodyne detection of coherent states.
    Coherent,
    /// Homodyne detection of squeezed states, squeezing frozen at the
    /// lossless optimum.
    SqueezedLosslessPrior,
    /// Homodyne detection of squeezed states, squeezing re-optimized for
    /// the loss.
    SqueezedOptimized,
    /// Photon counting with the thermal prior.
    NumberThermal,
    /// Photon counting with the power-constrained optimized prior.
    NumberOptimized,
}

impl ChannelKind {
    pub const ALL: [ChannelKind; 5] = [
        ChannelKind::Coherent,
        ChannelKind::SqueezedLosslessPrior,
        ChannelKind::SqueezedOptimized,
        ChannelKind::NumberThermal,
        ChannelKind::NumberOptimized,
    ];

    pub fn label(self) -> &'static str {
        match self {
            ChannelKind::Coherent => "coherent",
            ChannelKind::SqueezedLosslessPrior => "squeezed_lossless_prior",
            ChannelKind::SqueezedOptimized => "squeezed_optimized",
            ChannelKind::NumberThermal => "number_thermal",
            ChannelKind::NumberOptimized => "number_optimized",
        }
    }

    /// Whether the capacity is a closed-form expression (no iteration).
    pub fn is_closed_form(self) -> bool {
        !matches!(
            self,
            ChannelKind::NumberThermal | ChannelKind::NumberOptimized
        )
    }
}

impl fmt::Display for ChannelKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label())
    }
}

impl FromStr for ChannelKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        ChannelKind::ALL
            .into_iter()
            .find(|k| k.label() == s)
            .ok_or_else(|| Error::InvalidConfig(format!("unknown channel label `{s}`")))
    }
}

/// One grid cell: the capacities of the requested channels at a point and
/// the label that attains the maximum.
#[derive(Debug, Clone)]
pub struct OptimalityCell {
    pub point: ChannelPoint,
    pub capacities: BTreeMap<ChannelKind, Information>,
    pub winner: ChannelKind,
}

/// A sweep request: strictly increasing grids, the channel set to
/// compare, and (only when the optimized number channel is requested) the
/// per-cell optimizer budget.
#[derive(Debug, Clone)]
pub struct SweepSpec {
    pub eta_grid: Vec<f64>,
    pub n_grid: Vec<f64>,
    pub channels: Vec<ChannelKind>,
    pub blahut_cfg: Option<BlahutConfig>,
}

impl SweepSpec {
    pub fn new(
        eta_grid: Vec<f64>,
        n_grid: Vec<f64>,
        channels: Vec<ChannelKind>,
        blahut_cfg: Option<BlahutConfig>,
    ) -> Result<Self> {
        let spec = Self {
            eta_grid,
            n_grid,
            channels,
            blahut_cfg,
        };
        spec.validate()?;
        Ok(spec)
    }

    pub fn validate(&self) -> Result<()> {
        if self.eta_grid.is_empty() || self.n_grid.is_empty() {
            return Err(Error::InvalidConfig("sweep grids must be nonempty".into()));
        }
        for w in self.eta_grid.windows(2) {
            if w[1] <= w[0] {
                return Err(Error::InvalidConfig(
                    "eta grid must be strictly increasing".into(),
                ));
            }
        }
        for w in self.n_grid.windows(2) {
            if w[1] <= w[0] {
                return Err(Error::InvalidConfig(
                    "power grid must be strictly increasing".into(),
                ));
            }
        }
        for &eta in &self.eta_grid {
            if !eta.is_finite() || eta <= 0.0 || eta > 1.0 {
                return Err(Error::InvalidEta(eta));
            }
        }
        if self.n_grid[0] < 0.0 || !self.n_grid.iter().all(|n| n.is_finite()) {
            return Err(Error::InvalidMeanPhotons(self.n_grid[0]));
        }
        if self.channels.is_empty() {
            return Err(Error::InvalidConfig(
                "at least one channel must be requested".into(),
            ));
        }
        if self.channels.contains(&ChannelKind::NumberOptimized) && self.blahut_cfg.is_none() {
            return Err(Error::MissingBlahutConfig);
        }
        if let Some(cfg) = &self.blahut_cfg {
            cfg.validate()?;
        }
        Ok(())
    }
}

/// Uniformly spaced grid including both endpoints.
pub fn linear_grid(lo: f64, hi: f64, steps: usize) -> Result<Vec<f64>> {
    if steps < 2 || !lo.is_finite() || !hi.is_finite() || lo >= hi {
        return Err(Error::InvalidConfig(format!(
            "bad linear grid {lo}:{hi}:{steps}"
        )));
    }
    let h = (hi - lo) / (steps - 1) as f64;
    let mut grid: Vec<f64> = (0..steps).map(|k| lo + k as f64 * h).collect();
    grid[steps - 1] = hi;
    Ok(grid)
}

/// Logarithmically spaced grid including both endpoints.
pub fn log_grid(lo: f64, hi: f64, steps: usize) -> Result<Vec<f64>> {
    if lo.is_nan() || lo <= 0.0 {
        return Err(Error::InvalidConfig(format!(
            "log grid needs a positive lower bound, got {lo}"
        )));
    }
    let mut grid: Vec<f64> = linear_grid(lo.ln(), hi.ln(), steps)?
        .into_iter()
        .map(f64::exp)
        .collect();
    grid[0] = lo;
    grid[steps - 1] = hi;
    Ok(grid)
}

/// Default attenuation grid: 50 linear steps on [0.02, 1].
pub fn default_eta_grid() -> Vec<f64> {
    linear_grid(0.02, 1.0, 50).expect("static grid")
}

/// Default power grid: 60 logarithmic steps on [0.1, 100].
pub fn default_n_grid() -> Vec<f64> {
    log_grid(0.1, 100.0, 60).expect("static grid")
}

/// Default power grid for sweeps involving the number channels: capped at
/// N = 40 so the default truncation of 200 photons stays comfortably
/// above the occupied Fock space.
pub fn default_number_n_grid() -> Vec<f64> {
    log_grid(0.1, 40.0, 60).expect("static grid")
}

/// Per-cell optimizer budget used by diagram sweeps; region labels don't
/// need the full regression budget.
pub fn diagram_blahut_cfg() -> BlahutConfig {
    BlahutConfig {
        max_iters: 2000,
        ..Default::default()
    }
}

fn capacity_of(
    kind: ChannelKind,
    pt: ChannelPoint,
    cfg: Option<&BlahutConfig>,
    kernel: Option<&LossKernel>,
) -> Result<Information> {
    match kind {
        ChannelKind::Coherent => Ok(heterodyne_capacity(pt)),
        ChannelKind::SqueezedLosslessPrior => Ok(unoptimized_homodyne_mi(pt)),
        ChannelKind::SqueezedOptimized => Ok(optimized_homodyne_mi(pt)),
        ChannelKind::NumberThermal => {
            let dim = cfg.map_or_else(|| BlahutConfig::default().dim, |c| c.dim);
            let prior = thermal_prior(pt.n_mean(), dim)?;
            match kernel {
                Some(k) => discrete_mi(&prior, k),
                None => discrete_mi(&prior, &LossKernel::new(pt.eta(), dim)?),
            }
        }
        ChannelKind::NumberOptimized => {
            if pt.n_mean() == 0.0 {
                return Ok(Information::ZERO);
            }
            let cfg = cfg.ok_or(Error::MissingBlahutConfig)?;
            Ok(solve_power(pt.eta(), pt.n_mean(), cfg)?.mi)
        }
    }
}

fn classify_inner(
    pt: ChannelPoint,
    channels: &[ChannelKind],
    cfg: Option<&BlahutConfig>,
    kernel: Option<&LossKernel>,
) -> Result<OptimalityCell> {
    if channels.is_empty() {
        return Err(Error::InvalidConfig(
            "at least one channel must be requested".into(),
        ));
    }
    let mut capacities = BTreeMap::new();
    for &kind in channels {
        if let std::collections::btree_map::Entry::Vacant(slot) = capacities.entry(kind) {
            slot.insert(capacity_of(kind, pt, cfg, kernel)?);
        }
    }
    let top = capacities
        .values()
        .map(|i| i.nats())
        .fold(f64::NEG_INFINITY, f64::max);
    let winner = *capacities
        .iter()
        .find(|(_, v)| v.nats() >= top - TIE_TOL_NATS)
        .expect("nonempty capacity map")
        .0;
    Ok(OptimalityCell {
        point: pt,
        capacities,
        winner,
    })
}

/// Evaluates the requested channels at one point and labels the winner.
pub fn classify_point(
    pt: ChannelPoint,
    channels: &[ChannelKind],
    blahut_cfg: Option<&BlahutConfig>,
) -> Result<OptimalityCell> {
    classify_inner(pt, channels, blahut_cfg, None)
}

/// Classifies every cell of the grid, row-major over `n_grid x eta_grid`.
pub fn sweep(spec: &SweepSpec) -> Result<Vec<OptimalityCell>> {
    spec.validate()?;
    let dim = spec
        .blahut_cfg
        .as_ref()
        .map_or_else(|| BlahutConfig::default().dim, |c| c.dim);
    let kernels: Option<Vec<LossKernel>> = if spec.channels.contains(&ChannelKind::NumberThermal) {
        Some(
            spec.eta_grid
                .iter()
                .map(|&eta| LossKernel::new(eta, dim))
                .collect::<Result<_>>()?,
        )
    } else {
        None
    };

    let width = spec.eta_grid.len();
    (0..spec.n_grid.len() * width)
        .into_par_iter()
        .map(|idx| {
            let pt = ChannelPoint::new(spec.eta_grid[idx % width], spec.n_grid[idx / width])?;
            classify_inner(
                pt,
                &spec.channels,
                spec.blahut_cfg.as_ref(),
                kernels.as_ref().map(|k| &k[idx % width]),
            )
        })
        .collect()
}

/// Optimal squeezing-photon budget `sinh^2 r` versus power at fixed
/// attenuation. Curves for larger `eta` lie above curves for smaller.
pub fn squeeze_photon_curve(eta: f64, n_grid: &[f64]) -> Result<Vec<(f64, f64)>> {
    n_grid
        .iter()
        .map(|&n| {
            let pt = ChannelPoint::new(eta, n)?;
            Ok((n, optimal_xi(pt).squeeze_photons()))
        })
        .collect()
}

/// Mutual information versus attenuation at fixed power for the three
/// channels with their lossless-case priors.
#[derive(Debug, Clone)]
pub struct DegradationCurve {
    pub n_mean: f64,
    pub eta: Vec<f64>,
    pub number_thermal: Vec<Information>,
    pub coherent: Vec<Information>,
    pub squeezed_lossless_prior: Vec<Information>,
}

pub fn degradation_curve(n_fixed: f64, eta_grid: &[f64], dim: usize) -> Result<DegradationCurve> {
    if eta_grid.is_empty() {
        return Err(Error::InvalidConfig("eta grid must be nonempty".into()));
    }
    let prior = thermal_prior(n_fixed, dim)?;
    let rows: Vec<(Information, Information, Information)> = eta_grid
        .par_iter()
        .map(|&eta| {
            let pt = ChannelPoint::new(eta, n_fixed)?;
            let kernel = LossKernel::new(eta, dim)?;
            Ok((
                discrete_mi(&prior, &kernel)?,
                heterodyne_capacity(pt),
                unoptimized_homodyne_mi(pt),
            ))
        })
        .collect::<Result<_>>()?;
    let mut curve = DegradationCurve {
        n_mean: n_fixed,
        eta: eta_grid.to_vec(),
        number_thermal: Vec::with_capacity(rows.len()),
        coherent: Vec::with_capacity(rows.len()),
        squeezed_lossless_prior: Vec::with_capacity(rows.len()),
    };
    for (nt, coh, sq) in rows {
        curve.number_thermal.push(nt);
        curve.coherent.push(coh);
        curve.squeezed_lossless_prior.push(sq);
    }
    Ok(curve)
}

/// The power at which two closed-form channels exchange the lead at fixed
/// attenuation, found by bisection on `[n_lo, n_hi]`; `None` when there
/// is no crossing in range. Only closed-form channels are supported —
/// pairing an iteratively solved channel here would hide minutes of
/// computation behind an innocuous call.
pub fn crossing_power(
    a: ChannelKind,
    b: ChannelKind,
    eta: f64,
    n_lo: f64,
    n_hi: f64,
) -> Result<Option<f64>> {
    if !a.is_closed_form() || !b.is_closed_form() {
        return Err(Error::InvalidConfig(
            "crossing_power requires closed-form channels".into(),
        ));
    }
    if !(n_lo > 0.0 && n_hi > n_lo) {
        return Err(Error::InvalidConfig(format!(
            "bad crossing range [{n_lo}, {n_hi}]"
        )));
    }
    let diff = |n: f64| -> Result<f64> {
        let pt = ChannelPoint::new(eta, n)?;
        Ok(capacity_of(a, pt, None, None)?.nats() - capacity_of(b, pt, None, None)?.nats())
    };

    const SCAN: usize = 64;
    let grid = log_grid(n_lo, n_hi, SCAN)?;
    let mut lo = grid[0];
    let mut d_lo = diff(lo)?;
    let mut bracket = None;
    for &n in &grid[1..] {
        let d = diff(n)?;
        if d == 0.0 {
            return Ok(Some(n));
        }
        if d_lo.signum() != d.signum() {
            bracket = Some((lo, n));
            break;
        }
        lo = n;
        d_lo = d;
    }
    let Some((mut lo, mut hi)) = bracket else {
        return Ok(None);
    };
    let sign_lo = diff(lo)?.signum();
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if diff(mid)?.signum() == sign_lo {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(Some(0.5 * (lo + hi)))
}
