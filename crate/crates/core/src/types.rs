//! Shared domain primitives: channel operating points, information
//! quantities with explicit units, and truncated photon-number
//! distributions.
//!
//! Everything in this crate computes in nats internally; bits appear only
//! through [`Information::bits`]. All types are immutable values after
//! construction, so they are safe to share across threads.

use crate::error::{Error, Result};

/// Tolerance used when checking that a probability vector is normalized.
pub const NORMALIZATION_TOL: f64 = 1e-12;

/// An operating point of a lossy bosonic line: the energy attenuation
/// `eta` in (0, 1] together with the mean photon number `n_mean` >= 0
/// available at the transmitter.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ChannelPoint {
    eta: f64,
    n_mean: f64,
}

impl ChannelPoint {
    pub fn new(eta: f64, n_mean: f64) -> Result<Self> {
        if !eta.is_finite() || eta <= 0.0 || eta > 1.0 {
            return Err(Error::InvalidEta(eta));
        }
        if !n_mean.is_finite() || n_mean < 0.0 {
            return Err(Error::InvalidMeanPhotons(n_mean));
        }
        Ok(Self { eta, n_mean })
    }

    /// Energy attenuation factor of the line.
    pub fn eta(self) -> f64 {
        self.eta
    }

    /// Mean photon number at the transmitter.
    pub fn n_mean(self) -> f64 {
        self.n_mean
    }
}

/// A nonnegative amount of information.
///
/// Stored in nats; `bits()` is exactly `nats / ln 2`. Keeping the unit in
/// the type means conversion happens at exactly one place.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd, Default)]
pub struct Information {
    nats: f64,
}

impl Information {
    pub const ZERO: Self = Self { nats: 0.0 };

    /// Wraps a nat value. Tiny negatives (roundoff from entropy-like sums)
    /// are clamped to zero; anything below -1e-9 is a computation bug.
    pub fn from_nats(nats: f64) -> Self {
        assert!(nats.is_finite(), "information must be finite, got {nats}");
        assert!(
            nats > -1e-9,
            "information must be nonnegative, got {nats} nats"
        );
        Self {
            nats: nats.max(0.0),
        }
    }

    pub fn from_bits(bits: f64) -> Self {
        Self::from_nats(bits * std::f64::consts::LN_2)
    }

    pub fn nats(self) -> f64 {
        self.nats
    }

    pub fn bits(self) -> f64 {
        self.nats / std::f64::consts::LN_2
    }
}

/// A probability distribution over photon number, truncated at dimension
/// `dim`: entries `p_0 .. p_{dim-1}`, each nonnegative, summing to one
/// within [`NORMALIZATION_TOL`].
#[derive(Debug, Clone, PartialEq)]
pub struct PhotonDistribution {
    probs: Vec<f64>,
}

impl PhotonDistribution {
    /// Validates an explicit probability vector.
    pub fn from_probs(probs: Vec<f64>) -> Result<Self> {
        if probs.is_empty() {
            return Err(Error::DimTooSmall { min: 1, got: 0 });
        }
        for (index, &value) in probs.iter().enumerate() {
            if !value.is_finite() || value < 0.0 {
                return Err(Error::InvalidProbability { index, value });
            }
        }
        let sum: f64 = probs.iter().sum();
        if (sum - 1.0).abs() > NORMALIZATION_TOL {
            return Err(Error::NotNormalized {
                sum,
                tol: NORMALIZATION_TOL,
            });
        }
        Ok(Self { probs })
    }

    /// Normalizes a vector of nonnegative weights.
    pub fn from_weights(weights: Vec<f64>) -> Result<Self> {
        if weights.is_empty() {
            return Err(Error::DimTooSmall { min: 1, got: 0 });
        }
        for (index, &value) in weights.iter().enumerate() {
            if !value.is_finite() || value < 0.0 {
                return Err(Error::InvalidProbability { index, value });
            }
        }
        let total: f64 = weights.iter().sum();
        if total <= 0.0 || !total.is_finite() {
            return Err(Error::DegeneratePrior);
        }
        let mut probs = weights;
        for p in &mut probs {
            *p /= total;
        }
        Ok(Self { probs })
    }

    /// Uniform distribution on `0 .. dim-1`.
    pub fn uniform(dim: usize) -> Result<Self> {
        if dim == 0 {
            return Err(Error::DimTooSmall { min: 1, got: 0 });
        }
        Ok(Self {
            probs: vec![1.0 / dim as f64; dim],
        })
    }

    /// Point mass on photon number `n`.
    pub fn point_mass(n: usize, dim: usize) -> Result<Self> {
        if dim == 0 {
            return Err(Error::DimTooSmall { min: 1, got: 0 });
        }
        if n >= dim {
            return Err(Error::InvalidConfig(format!(
                "point mass at {n} does not fit in dimension {dim}"
            )));
        }
        let mut probs = vec![0.0; dim];
        probs[n] = 1.0;
        Ok(Self { probs })
    }

    pub fn dim(&self) -> usize {
        self.probs.len()
    }

    pub fn probs(&self) -> &[f64] {
        &self.probs
    }

    /// Probability of photon number `n` (zero beyond the truncation).
    pub fn prob(&self, n: usize) -> f64 {
        self.probs.get(n).copied().unwrap_or(0.0)
    }

    /// Mean photon number `sum_n n p_n`.
    pub fn mean_photons(&self) -> f64 {
        self.probs
            .iter()
            .enumerate()
            .map(|(n, &p)| n as f64 * p)
            .sum()
    }
}

/// Geometric (thermal) photon-number distribution with mean `n_mean`,
/// truncated at `dim` and renormalized:
///
/// p_n ∝ (1 / (1+N)) (N / (1+N))^n,  n = 0 .. dim-1.
///
/// The renormalization keeps the vector an exact probability distribution;
/// for `n_mean = 0` this is the vacuum point mass.
pub fn thermal_prior(n_mean: f64, dim: usize) -> Result<PhotonDistribution> {
    if dim == 0 {
        return Err(Error::DimTooSmall { min: 1, got: 0 });
    }
    if !n_mean.is_finite() || n_mean < 0.0 {
        return Err(Error::InvalidMeanPhotons(n_mean));
    }
    if n_mean == 0.0 {
        return PhotonDistribution::point_mass(0, dim);
    }
    let ratio = n_mean / (1.0 + n_mean);
    let mut weights = Vec::with_capacity(dim);
    let mut w = 1.0;
    for _ in 0..dim {
        weights.push(w);
        w *= ratio;
    }
    PhotonDistribution::from_weights(weights)
}

/// Capacity of the lossless photon-number channel at mean photon number
/// `n_mean` (the Holevo bound for fixed average power):
///
/// C = ln(1 + N) + N ln(1 + 1/N)   nats,
///
/// with the continuity value 0 at N = 0. This is the entropy of the
/// thermal distribution with mean N, achieved by photon counting on
/// number states drawn from that prior.
pub fn ultimate_capacity(n_mean: f64) -> Result<Information> {
    if !n_mean.is_finite() || n_mean < 0.0 {
        return Err(Error::InvalidMeanPhotons(n_mean));
    }
    if n_mean == 0.0 {
        return Ok(Information::ZERO);
    }
    let nats = n_mean.ln_1p() + n_mean * (1.0 / n_mean).ln_1p();
    Ok(Information::from_nats(nats))
}

#[cfg(test)]
mod tests {
    use super::*;

    const LN_2: f64 = std::f64::consts::LN_2;

    #[test]
    fn channel_point_rejects_bad_inputs() {
        assert!(ChannelPoint::new(0.0, 1.0).is_err());
        assert!(ChannelPoint::new(1.0 + 1e-12, 1.0).is_err());
        assert!(ChannelPoint::new(f64::NAN, 1.0).is_err());
        assert!(ChannelPoint::new(0.5, -1.0).is_err());
        assert!(ChannelPoint::new(0.5, f64::INFINITY).is_err());
        let pt = ChannelPoint::new(1.0, 0.0).unwrap();
        assert_eq!(pt.eta(), 1.0);
        assert_eq!(pt.n_mean(), 0.0);
    }

    #[test]
    fn information_units() {
        let i = Information::from_nats(LN_2);
        assert!((i.bits() - 1.0).abs() < 1e-15);
        assert_eq!(Information::from_bits(2.0).nats(), 2.0 * LN_2);
        // Roundoff-scale negatives clamp to zero.
        assert_eq!(Information::from_nats(-1e-15).nats(), 0.0);
    }

    #[test]
    #[should_panic(expected = "nonnegative")]
    fn information_rejects_substantial_negatives() {
        let _ = Information::from_nats(-1e-3);
    }

    #[test]
    fn distribution_validation() {
        assert!(PhotonDistribution::from_probs(vec![]).is_err());
        assert!(PhotonDistribution::from_probs(vec![0.5, 0.4]).is_err());
        assert!(PhotonDistribution::from_probs(vec![1.1, -0.1]).is_err());
        let p = PhotonDistribution::from_probs(vec![0.25, 0.75]).unwrap();
        assert_eq!(p.dim(), 2);
        assert!((p.mean_photons() - 0.75).abs() < 1e-15);
        assert_eq!(p.prob(5), 0.0);
    }

    #[test]
    fn vacuum_limit_is_point_mass() {
        let p = thermal_prior(0.0, 5).unwrap();
        assert_eq!(p.probs(), &[1.0, 0.0, 0.0, 0.0, 0.0]);
    }

    #[test]
    fn thermal_at_unit_mean_is_dyadic() {
        // At N = 1 the untruncated weights are 2^-(n+1); the truncated
        // distribution preserves their ratios exactly.
        let p = thermal_prior(1.0, 40).unwrap();
        for n in 1..40 {
            let ratio = p.prob(n) / p.prob(n - 1);
            assert!((ratio - 0.5).abs() < 1e-14, "ratio at n={n} was {ratio}");
        }
        // Truncation deficit at dim 40 is 2^-40; p_0 is within that of 1/2.
        assert!((p.prob(0) - 0.5).abs() < 1e-11);
    }

    #[test]
    fn thermal_mean_matches_target_at_large_dim() {
        // Independent route: sum the geometric series directly.
        let n_mean = 4.040;
        let dim = 200;
        let ratio: f64 = n_mean / (1.0 + n_mean);
        let mut norm = 0.0;
        let mut first_moment = 0.0;
        let mut w = 1.0;
        for n in 0..dim {
            norm += w;
            first_moment += n as f64 * w;
            w *= ratio;
        }
        let oracle_mean = first_moment / norm;

        let p = thermal_prior(n_mean, dim).unwrap();
        assert!((p.mean_photons() - oracle_mean).abs() < 1e-12);
        assert!(
            (p.mean_photons() - n_mean).abs() < 1e-6,
            "truncated mean {} too far from {}",
            p.mean_photons(),
            n_mean
        );
    }

    #[test]
    fn thermal_is_monotone_nonincreasing() {
        for &n_mean in &[0.1, 0.5, 1.0, 4.040, 10.0] {
            let p = thermal_prior(n_mean, 200).unwrap();
            for n in 1..p.dim() {
                assert!(p.prob(n) <= p.prob(n - 1));
            }
        }
    }

    #[test]
    fn thermal_mean_converges_for_moderate_power() {
        // The truncation bias at dim 200 grows with N; at N = 10 it is
        // 1.05e-6 absolute, so the 1e-6 guarantee is relative.
        for &n_mean in &[0.5, 1.0, 2.0, 5.0, 10.0] {
            let p = thermal_prior(n_mean, 200).unwrap();
            assert!(
                (p.mean_photons() - n_mean).abs() < 1e-6 * n_mean.max(1.0),
                "N={n_mean}: mean {}",
                p.mean_photons()
            );
        }
    }

    #[test]
    fn ultimate_capacity_known_values() {
        assert_eq!(ultimate_capacity(0.0).unwrap().nats(), 0.0);
        // N = 1: C = 2 ln 2 nats = 2 bits.
        let c1 = ultimate_capacity(1.0).unwrap();
        assert!((c1.nats() - 2.0 * LN_2).abs() < 1e-15);
        assert!((c1.bits() - 2.0).abs() < 1e-14);
        // N = 10: C = ln 11 + 10 ln 1.1.
        let c10 = ultimate_capacity(10.0).unwrap();
        assert!((c10.nats() - 3.35099707084162).abs() < 1e-13);
        assert!(ultimate_capacity(f64::NAN).is_err());
        assert!(ultimate_capacity(-0.5).is_err());
    }

    #[test]
    fn ultimate_capacity_is_increasing_and_concave() {
        let grid: Vec<f64> = (1..=400).map(|k| k as f64 * 0.05).collect();
        let caps: Vec<f64> = grid
            .iter()
            .map(|&n| ultimate_capacity(n).unwrap().nats())
            .collect();
        for w in caps.windows(2) {
            assert!(w[1] > w[0], "capacity must increase");
        }
        // Second difference negative on the uniform grid.
        for w in caps.windows(3) {
            assert!(w[2] - 2.0 * w[1] + w[0] < 0.0, "capacity must be concave");
        }
    }
}
