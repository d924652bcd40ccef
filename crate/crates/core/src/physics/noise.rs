//! Measurement noise on feature maps.
//!
//! Homodyne readouts carry unit quadrature noise plus the detector's
//! electronic noise, `σ² = 1 + 10^(−clearance/10)` in vacuum units. After the
//! digital gain `1/a` the normalized readout becomes
//! `ỹ + ε·sqrt(σ² / snr)` with `snr = a² = 4β n_sig`.
//! The conventional receiver adds `N(0, 1/SNR)` to the digitized envelope.

use rand::Rng;
use rand_distr::{Distribution, StandardNormal};

use super::kernel::FeatureMap;
use crate::constants::db_to_linear;
use crate::error::{domain, Result};
use crate::scalar::Scalar;

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Detector {
    /// Balanced homodyne receiver with the given LO shot-noise clearance
    /// over electronic noise (dB).
    Homodyne { clearance_db: f64 },
    /// Super-heterodyne receiver; the SNR already folds in all noise.
    Receiver,
}

impl Detector {
    /// Noise variance at unit SNR scale.
    pub fn noise_variance(&self) -> f64 {
        match *self {
            Detector::Homodyne { clearance_db } => 1.0 + db_to_linear(-clearance_db),
            Detector::Receiver => 1.0,
        }
    }

    /// Standard deviation of the noise on a normalized readout.
    pub fn readout_sigma(&self, snr_scale: f64) -> Result<f64> {
        if !(snr_scale > 0.0) {
            return domain(format!("SNR scale must be positive for noisy evaluation, got {snr_scale}"));
        }
        Ok((self.noise_variance() / snr_scale).sqrt())
    }
}

/// Returns a noisy copy of `features`. `snr_scale = ∞` returns the noiseless
/// values unchanged.
pub fn apply_measurement_noise<T: Scalar>(
    features: &FeatureMap<T>,
    snr_scale: f64,
    detector: Detector,
    rng: &mut impl Rng,
) -> Result<FeatureMap<T>> {
    let mut out = features.clone();
    add_measurement_noise(&mut out.values, snr_scale, detector, rng)?;
    out.noisy = true;
    Ok(out)
}

/// In-place variant over raw readouts.
pub fn add_measurement_noise<T: Scalar>(
    values: &mut [T],
    snr_scale: f64,
    detector: Detector,
    rng: &mut impl Rng,
) -> Result<()> {
    let sigma = detector.readout_sigma(snr_scale)?;
    if sigma == 0.0 {
        return Ok(());
    }
    for v in values.iter_mut() {
        let e: f64 = StandardNormal.sample(rng);
        *v += T::lit(sigma * e);
    }
    Ok(())
}
