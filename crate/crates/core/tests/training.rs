use mirp_core::datasets::synth_rfmod;
use mirp_core::nn::{AdamConfig, FrontEnd, Model, ModelSpec, TrainState};

#[test]
fn overfits_eight_records() {
    let ds = synth_rfmod(5, 2, 512, 25.0).unwrap();
    let batch: Vec<_> = ds.records.iter().collect();
    assert_eq!(batch.len(), 8);
    for fe in [FrontEnd::Mirp, FrontEnd::Untrained, FrontEnd::Conventional] {
        let spec = ModelSpec { scale: 8, ..ModelSpec::new(fe, 2, 512, 16, 4) };
        let mut state = TrainState::new(Model::new(spec, 0.5, 1).unwrap(), AdamConfig::default(), 1);
        let mut epochs = 0;
        for epoch in 1..=500 {
            let stats = state.step(&batch, None, 1e-3).unwrap();
            epochs = epoch;
            if stats.correct == batch.len() && stats.loss_sum / 8.0 < 0.05 {
                break;
            }
        }
        let correct = batch.iter().filter(|r| state.model.predict(r).unwrap() == r.label).count();
        assert_eq!(correct, 8, "{fe:?} after {epochs} epochs");
    }
}

#[test]
fn identical_seeds_train_identically() {
    let ds = synth_rfmod(2, 3, 128, 25.0).unwrap();
    let batch: Vec<_> = ds.records.iter().collect();
    let run = || {
        let spec = ModelSpec { scale: 16, modes: 4, ..ModelSpec::new(FrontEnd::Mirp, 2, 128, 8, 4) };
        let mut s = TrainState::new(Model::new(spec, 0.5, 3).unwrap(), AdamConfig::default(), 3);
        for _ in 0..5 {
            s.step(&batch, None, 1e-3).unwrap();
        }
        s.to_checkpoint([0; 32]).to_bytes()
    };
    assert_eq!(run(), run());
}
