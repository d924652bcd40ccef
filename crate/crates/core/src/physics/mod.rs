//! Physics of the sensing chain.

pub mod kernel;
pub mod link;
pub mod noise;
pub mod params;
pub mod validate;

pub use kernel::{
    accumulate_pump_grad, conventional_forward, damped_readout, decimate, damped_readout_adjoint, decay_grad,
    mirp_forward, mirp_forward_with_decay, physical_layer_backward, pump_grad_through_rms,
    untrained_forward, untrained_forward_with_decay, Decimation, FeatureMap, WeightBank,
};
pub use link::{
    antenna_transmissivity, photons_per_bin, resonator_derive, snr_conventional, snr_mirp,
    snr_untrained, sr_noise_power, sr_noise_temperature, Resonator,
};
pub use noise::{add_measurement_noise, apply_measurement_noise, Detector};
pub use params::{decay_factor, CarrierConvention, HomodyneParams, RfChainParams, RingParams, SrParams};
pub use validate::{
    beta_from_params, homodyne_shot_noise, mu_from_beta, pump_photons_per_bin, validate_assumptions,
    ShotNoise, ValidationReport,
};
