//! The direct-detection photon-number channel under loss.
//!
//! Sending the number state `|n>` through a line with attenuation `eta`
//! and counting photons at the receiver yields `m` photons with the
//! binomial probability
//!
//! Q_{m,n}(eta) = C(n, m) eta^m (1 - eta)^{n-m},  m <= n,
//!
//! which collapses to the Kronecker delta at `eta = 1`. [`LossKernel`]
//! tabulates these conditionals on a truncated Fock space and
//! [`discrete_mi`] evaluates the mutual information of any prior through
//! them.
//!
//! Binomial weights are evaluated in the log domain from a compensated
//! cumulative log-factorial table; direct products of factorials overflow
//! long before the default truncation of 200.

use crate::error::{Error, Result};
use crate::types::{thermal_prior, Information, PhotonDistribution};

/// Hard cap on the truncation dimension.
pub const DIM_CAP: usize = 4096;

/// A posterior weight below this is treated as an exact zero; its
/// numerator is necessarily zero as well, so the 0 ln 0 = 0 convention
/// applies instead of a spurious -inf from underflow.
pub(crate) const POSTERIOR_FLOOR: f64 = 1e-300;

/// Column-stochastic conditional-probability matrix of the lossy
/// photon-number channel, stored column-major by input letter `n` and
/// packed lower-triangular (entries `m = 0 ..= n` only).
#[derive(Debug, Clone)]
pub struct LossKernel {
    eta: f64,
    dim: usize,
    probs: Vec<f64>,
    ln_probs: Vec<f64>,
}

#[inline]
fn col_offset(n: usize) -> usize {
    n * (n + 1) / 2
}

/// Cumulative table of `ln k!` built with compensated summation, so the
/// absolute error stays near one ulp of the final value even at the cap.
fn ln_factorials(max_n: usize) -> Vec<f64> {
    let mut table = Vec::with_capacity(max_n + 1);
    table.push(0.0);
    let mut sum = 0.0f64;
    let mut carry = 0.0f64;
    for k in 1..=max_n {
        let term = (k as f64).ln() - carry;
        let next = sum + term;
        carry = (next - sum) - term;
        sum = next;
        table.push(sum);
    }
    table
}

impl LossKernel {
    /// Tabulates `Q_{m,n}(eta)` for `n < dim`.
    pub fn new(eta: f64, dim: usize) -> Result<Self> {
        if !eta.is_finite() || eta <= 0.0 || eta > 1.0 {
            return Err(Error::InvalidEta(eta));
        }
        if dim == 0 {
            return Err(Error::DimTooSmall { min: 1, got: 0 });
        }
        if dim > DIM_CAP {
            return Err(Error::DimTooLarge {
                got: dim,
                cap: DIM_CAP,
            });
        }

        let len = col_offset(dim);
        let mut probs = vec![0.0; len];
        let mut ln_probs = vec![0.0; len];

        if eta == 1.0 {
            // The identity: every input is counted intact.
            for n in 0..dim {
                probs[col_offset(n) + n] = 1.0;
            }
            return Ok(Self {
                eta,
                dim,
                probs,
                ln_probs,
            });
        }

        let ln_eta = eta.ln();
        let ln_one_minus = (-eta).ln_1p();
        let lnfac = ln_factorials(dim - 1);
        for n in 0..dim {
            let base = col_offset(n);
            for m in 0..=n {
                let ln_c = lnfac[n] - lnfac[m] - lnfac[n - m];
                let ln_q = ln_c + m as f64 * ln_eta + (n - m) as f64 * ln_one_minus;
                let q = ln_q.exp();
                probs[base + m] = q;
                // Keep the log only where the weight survived; underflowed
                // entries fall under the 0 ln 0 convention.
                ln_probs[base + m] = if q > 0.0 { ln_q } else { 0.0 };
            }
        }

        Ok(Self {
            eta,
            dim,
            probs,
            ln_probs,
        })
    }

    pub fn eta(&self) -> f64 {
        self.eta
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    /// `Q_{m,n}`: probability of counting `m` photons when `n` were sent.
    pub fn prob(&self, m: usize, n: usize) -> f64 {
        if m > n || n >= self.dim {
            0.0
        } else {
            self.probs[col_offset(n) + m]
        }
    }

    /// The conditional distribution of the output given input `n`,
    /// as the packed slice of entries `m = 0 ..= n`.
    pub fn column(&self, n: usize) -> &[f64] {
        &self.probs[col_offset(n)..col_offset(n) + n + 1]
    }

    pub(crate) fn ln_column(&self, n: usize) -> &[f64] {
        &self.ln_probs[col_offset(n)..col_offset(n) + n + 1]
    }

    /// Accumulates the output (a posteriori) weights `f_m = sum_n p_n Q_{m,n}`
    /// into `out`, which must have length `dim`.
    pub(crate) fn accumulate_output(&self, prior: &[f64], out: &mut [f64]) {
        debug_assert_eq!(prior.len(), self.dim);
        debug_assert_eq!(out.len(), self.dim);
        out.fill(0.0);
        for (n, &p) in prior.iter().enumerate() {
            if p > 0.0 {
                for (m, &q) in self.column(n).iter().enumerate() {
                    out[m] += p * q;
                }
            }
        }
    }

    /// Distribution of the photon count at the receiver.
    pub fn output_distribution(&self, prior: &PhotonDistribution) -> Result<PhotonDistribution> {
        if prior.dim() != self.dim {
            return Err(Error::DimMismatch {
                prior: prior.dim(),
                kernel: self.dim,
            });
        }
        let mut out = vec![0.0; self.dim];
        self.accumulate_output(prior.probs(), &mut out);
        PhotonDistribution::from_weights(out)
    }
}

/// Mutual information of a prior over photon number through the lossy
/// counting channel, in nats:
///
/// I = sum_n p_n sum_m Q_{m,n} ln( Q_{m,n} / f_m ),   f_m = sum_k p_k Q_{m,k},
///
/// with 0 ln 0 = 0 throughout.
pub fn discrete_mi(prior: &PhotonDistribution, kernel: &LossKernel) -> Result<Information> {
    if prior.dim() != kernel.dim() {
        return Err(Error::DimMismatch {
            prior: prior.dim(),
            kernel: kernel.dim(),
        });
    }
    let mut output = vec![0.0; kernel.dim()];
    kernel.accumulate_output(prior.probs(), &mut output);
    let ln_output: Vec<f64> = output
        .iter()
        .map(|&f| if f >= POSTERIOR_FLOOR { f.ln() } else { 0.0 })
        .collect();

    let mut nats = 0.0;
    for (n, &p) in prior.probs().iter().enumerate() {
        if p > 0.0 {
            nats += p * column_divergence(kernel, n, &output, &ln_output);
        }
    }
    Ok(Information::from_nats(nats))
}

/// Relative entropy of input letter `n`'s conditional against the output
/// weights: `sum_m Q_{m,n} ln(Q_{m,n} / f_m)`. Shared by the mutual
/// information and the prior-optimization recursion.
pub(crate) fn column_divergence(
    kernel: &LossKernel,
    n: usize,
    output: &[f64],
    ln_output: &[f64],
) -> f64 {
    let col = kernel.column(n);
    let ln_col = kernel.ln_column(n);
    let mut acc = 0.0;
    for m in 0..=n {
        let q = col[m];
        if q > 0.0 && output[m] >= POSTERIOR_FLOOR {
            acc += q * (ln_col[m] - ln_output[m]);
        }
    }
    acc
}

/// Mutual information of the thermal prior across a grid of mean photon
/// numbers at fixed attenuation, for degradation plots.
pub fn thermal_mi_curve(eta: f64, n_grid: &[f64], dim: usize) -> Result<Vec<(f64, Information)>> {
    let kernel = LossKernel::new(eta, dim)?;
    n_grid
        .iter()
        .map(|&n| {
            let prior = thermal_prior(n, dim)?;
            Ok((n, discrete_mi(&prior, &kernel)?))
        })
        .collect()
}
