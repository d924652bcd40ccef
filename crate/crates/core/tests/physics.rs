use mirp_core::physics::{
    add_measurement_noise, resonator_derive, snr_conventional, snr_mirp, snr_untrained, Detector, RfChainParams,
    SrParams,
};
use mirp_core::rng::noise_stream;
use proptest::prelude::*;

proptest! {
    #[test]
    fn snr_is_linear_and_increasing_in_power(p in 1e-20f64..1e-3, factor in 1.001f64..1e6) {
        let res = resonator_derive(&RfChainParams::default()).unwrap();
        let sr = SrParams::default();
        let beta = 0.0118;
        let f: [&dyn Fn(f64) -> f64; 3] = [
            &|p| snr_conventional(p, &sr),
            &|p| snr_mirp(p, beta, res.transmissivity, 0.5e-9, res.carrier),
            &|p| snr_untrained(p, beta, res.transmissivity, 0.5e-9, res.carrier),
        ];
        for g in f {
            let (a, b) = (g(p), g(p * factor));
            prop_assert!(b > a);
            prop_assert!((b / a - factor).abs() <= 1e-12 * factor);
        }
    }
}

#[test]
fn noise_moments_within_three_standard_errors() {
    let n = 200_000;
    for (detector, scale) in [
        (Detector::Homodyne { clearance_db: 45.0 }, 1.0),
        (Detector::Homodyne { clearance_db: 10.0 }, 0.25),
        (Detector::Receiver, 40.0),
    ] {
        let mut v = vec![0.0f64; n];
        add_measurement_noise(&mut v, scale, detector, &mut noise_stream(9, 0, 0, 0)).unwrap();
        let var_true = detector.noise_variance() / scale;
        let mean = v.iter().sum::<f64>() / n as f64;
        let var = v.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1) as f64;
        assert!(mean.abs() < 3.0 * (var_true / n as f64).sqrt(), "{detector:?}: mean {mean}");
        let se_var = var_true * (2.0 / (n - 1) as f64).sqrt();
        assert!((var - var_true).abs() < 3.0 * se_var, "{detector:?}: var {var} vs {var_true}");
    }
}

#[test]
fn noise_streams_are_reproducible_and_distinct() {
    let draw = |r, p, t| {
        let mut v = vec![0.0f64; 16];
        add_measurement_noise(&mut v, 1.0, Detector::Receiver, &mut noise_stream(1, r, p, t)).unwrap();
        v
    };
    assert_eq!(draw(3, 2, 1), draw(3, 2, 1));
    assert_ne!(draw(3, 2, 1), draw(3, 2, 2));
    assert_ne!(draw(3, 2, 1), draw(2, 3, 1));
}
