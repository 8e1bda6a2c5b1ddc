//! Closed-form capacities of the Gaussian channels under loss.
//!
//! Two encodings are covered. The heterodyne channel sends a complex
//! amplitude on a coherent state and measures both quadratures; loss only
//! rescales the amplitude, so its capacity is `ln(1 + eta N)` with the
//! same Gaussian prior as in the lossless case. The homodyne channel
//! sends a real displacement on a quadrature-squeezed state and measures
//! the squeezed quadrature; there the split of the photon budget between
//! squeezing and signal depends on the loss, and this module carries both
//! the loss-optimal split and the split frozen at its lossless value.
//!
//! With `xi = e^{-2r}` the measured-quadrature variance after attenuation
//! `eta` is `[1 - eta (1 - xi)] / 4`, and a Gaussian prior of variance
//! `sigma^2 = N - sinh^2 r` gives
//!
//! I = 1/2 ln(1 + 4 eta sigma^2 / (1 - eta (1 - xi))).

use crate::error::{Error, Result};
use crate::types::{ChannelPoint, Information};

/// How a fixed photon budget is split between squeezing and signal.
///
/// `squeeze_xi` is `e^{-2r}` in (0, 1] (only noise reduction of the
/// measured quadrature is encoded), `squeeze_photons = sinh^2 r`
/// = `(xi + 1/xi - 2) / 4`, and `signal_variance` is the Gaussian prior
/// variance `N - sinh^2 r` left for the displacement.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SqueezedEncoding {
    squeeze_xi: f64,
    squeeze_photons: f64,
    signal_variance: f64,
}

impl SqueezedEncoding {
    /// Builds the encoding with squeezing `xi` under photon budget `n_mean`.
    ///
    /// Fails if `xi` leaves (0, 1] or if the squeezing alone already
    /// exceeds the budget.
    pub fn from_xi(xi: f64, n_mean: f64) -> Result<Self> {
        if !xi.is_finite() || xi <= 0.0 || xi > 1.0 {
            return Err(Error::InvalidXi(xi));
        }
        if !n_mean.is_finite() || n_mean < 0.0 {
            return Err(Error::InvalidMeanPhotons(n_mean));
        }
        let squeeze_photons = squeeze_photons_of_xi(xi);
        if squeeze_photons > n_mean {
            return Err(Error::PowerConstraintViolated {
                squeeze: squeeze_photons,
                budget: n_mean,
            });
        }
        Ok(Self {
            squeeze_xi: xi,
            squeeze_photons,
            signal_variance: n_mean - squeeze_photons,
        })
    }

    /// The split that is optimal for a lossless line:
    /// `xi = 1/(2N+1)`, i.e. `sinh^2 r = N^2 / (2N+1)`.
    pub fn lossless_optimal(n_mean: f64) -> Result<Self> {
        if !n_mean.is_finite() || n_mean < 0.0 {
            return Err(Error::InvalidMeanPhotons(n_mean));
        }
        Self::from_xi(1.0 / (2.0 * n_mean + 1.0), n_mean)
    }

    pub fn squeeze_xi(self) -> f64 {
        self.squeeze_xi
    }

    /// Photons spent narrowing the measured quadrature, `sinh^2 r`.
    pub fn squeeze_photons(self) -> f64 {
        self.squeeze_photons
    }

    /// Gaussian prior variance available for the signal.
    pub fn signal_variance(self) -> f64 {
        self.signal_variance
    }
}

fn squeeze_photons_of_xi(xi: f64) -> f64 {
    (xi + 1.0 / xi - 2.0) / 4.0
}

/// Capacity of the heterodyne (coherent-state) channel, `ln(1 + eta N)`.
///
/// The capacity-achieving Gaussian prior does not depend on the loss, so
/// no optimization step is needed for this channel.
pub fn heterodyne_capacity(pt: ChannelPoint) -> Information {
    Information::from_nats((pt.eta() * pt.n_mean()).ln_1p())
}

/// Mutual information of the lossy homodyne channel for a given split.
///
/// The signal variance is recomputed against `pt.n_mean()`, so an
/// encoding may be reused across channel points as long as its squeezing
/// fits the budget; otherwise the power-constraint error is returned.
pub fn homodyne_mi(pt: ChannelPoint, enc: SqueezedEncoding) -> Result<Information> {
    let budget = pt.n_mean();
    if enc.squeeze_photons > budget {
        return Err(Error::PowerConstraintViolated {
            squeeze: enc.squeeze_photons,
            budget,
        });
    }
    let signal_variance = budget - enc.squeeze_photons;
    // 1 - eta (1 - xi) >= xi > 0 for eta in (0, 1]; no singular path.
    let noise = 1.0 - pt.eta() * (1.0 - enc.squeeze_xi);
    let nats = 0.5 * (4.0 * pt.eta() * signal_variance / noise).ln_1p();
    Ok(Information::from_nats(nats))
}

/// The squeezing that maximizes [`homodyne_mi`] at a given channel point:
///
/// xi = (eta + sqrt(1 + 4 eta (1 - eta) N)) / ((4N + 1) eta + 1).
///
/// At `eta = 1` this reduces to the lossless split `xi = 1/(2N+1)`. For
/// `N = 0` the encoding degenerates to `xi = 1` (nothing to allocate).
pub fn optimal_xi(pt: ChannelPoint) -> SqueezedEncoding {
    let n = pt.n_mean();
    if n == 0.0 {
        return SqueezedEncoding::from_xi(1.0, 0.0).expect("xi = 1 is always valid");
    }
    let eta = pt.eta();
    let xi = (eta + (1.0 + 4.0 * eta * (1.0 - eta) * n).sqrt()) / ((4.0 * n + 1.0) * eta + 1.0);
    SqueezedEncoding::from_xi(xi.min(1.0), n)
        .expect("the maximizing squeezing always fits the budget")
}

/// Mutual information of the homodyne channel with the loss-optimal split.
pub fn optimized_homodyne_mi(pt: ChannelPoint) -> Information {
    homodyne_mi(pt, optimal_xi(pt)).expect("optimal encoding satisfies the power constraint")
}

/// Mutual information of the lossy homodyne channel when the squeezing
/// fraction stays frozen at its lossless optimum `sinh^2 r = N^2/(2N+1)`.
pub fn unoptimized_homodyne_mi(pt: ChannelPoint) -> Information {
    let enc = SqueezedEncoding::lossless_optimal(pt.n_mean())
        .expect("lossless split always fits the budget");
    homodyne_mi(pt, enc).expect("lossless split satisfies the power constraint")
}

/// Information exclusion bound for any lossy channel decoded by homodyne
/// detection: `I <= ln(1 + 2 eta N)`. Achieved only at `eta = 1`.
pub fn hall_bound(pt: ChannelPoint) -> Information {
    Information::from_nats((2.0 * pt.eta() * pt.n_mean()).ln_1p())
}
