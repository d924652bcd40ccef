use std::sync::OnceLock;

use mirp_core::nn::TrainState;
use mirp_harness::config::ExperimentConfig;
use mirp_harness::{load_task, power_sweep, run_training, Mode, Task, TaskData};
use proptest::prelude::*;

fn small_cfg() -> ExperimentConfig {
    let mut cfg = ExperimentConfig::default();
    cfg.experiment.task = Task::Rfmod;
    cfg.experiment.stride = 16;
    cfg.data.train_records = 64;
    cfg.data.validation_records = 0;
    cfg.data.test_records = 200;
    cfg.data.rfmod_len = 256;
    cfg.model.scale = 16;
    cfg.ring.modes = 4;
    cfg.optim.epochs = 6;
    cfg.optim.batch = 16;
    cfg.optim.lr = 3e-3;
    cfg.sweep.powers_watt = vec![1e-18, 1e-6];
    cfg.sweep.trials = 10;
    cfg
}

fn trained() -> &'static (ExperimentConfig, TaskData, Vec<TrainState<f64>>) {
    static CELL: OnceLock<(ExperimentConfig, TaskData, Vec<TrainState<f64>>)> = OnceLock::new();
    CELL.get_or_init(|| {
        let cfg = small_cfg();
        let data = load_task(&cfg).unwrap();
        let states = Mode::ALL.iter().map(|&m| run_training(&cfg, &data, m).unwrap().state).collect();
        (cfg, data, states)
    })
}

#[test]
fn high_power_beats_low_power_and_floor_is_chance() {
    let (cfg, data, states) = trained();
    for state in states {
        let r = power_sweep(state, cfg, &data.test.records).unwrap();
        assert!(r.mean(1) >= r.mean(0), "{:?}: {} < {}", r.mode, r.mean(1), r.mean(0));
        assert_eq!(r.config_hash, hex::encode(cfg.config_hash()));
        if r.mode == Mode::Conventional {
            let chance = 0.25;
            let n = data.test.len() as f64;
            // trials at the floor are independent guesses, so the binomial
            // spread is the relevant scale
            let se = (chance * (1.0 - chance) / n).sqrt();
            assert!((r.mean(0) - chance).abs() <= 3.0 * se.max(r.std(0)), "floor {} ± {}", r.mean(0), r.std(0));
        }
    }
}

#[test]
fn sweeps_reproduce_exactly() {
    let (cfg, data, states) = trained();
    let a = power_sweep(&states[0], cfg, &data.test.records).unwrap();
    let b = power_sweep(&states[0], cfg, &data.test.records).unwrap();
    assert_eq!(serde_json::to_string(&a).unwrap(), serde_json::to_string(&b).unwrap());
    let mut reseeded = cfg.clone();
    reseeded.experiment.seed += 1;
    let c = power_sweep(&states[0], &reseeded, &data.test.records).unwrap();
    assert_ne!(a.accuracy, c.accuracy);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn physics_changes_move_the_hash(field in 0usize..8, factor in 1.0001f64..10.0) {
        let base = ExperimentConfig::default();
        let mut c = base.clone();
        match field {
            0 => c.rf_chain.capacitance *= factor,
            1 => c.rf_chain.resistance *= factor,
            2 => c.ring.linewidth_hz *= factor,
            3 => c.ring.coupling_hz *= factor,
            4 => c.ring.beta /= factor,
            5 => c.homodyne.lo_power *= factor,
            6 => c.receiver.bandwidth *= factor,
            _ => c.receiver.rf_noise_figure_db *= factor,
        }
        prop_assert_ne!(base.config_hash(), c.config_hash());
        prop_assert_ne!(base.model_hash(), c.model_hash());
    }

    #[test]
    fn power_grid_must_increase(grid in prop::collection::vec(1e-20f64..1e-3, 1..8)) {
        let mut c = ExperimentConfig::default();
        c.sweep.powers_watt = grid.clone();
        let increasing = grid.windows(2).all(|w| w[0] < w[1]);
        prop_assert_eq!(c.validate().is_ok(), increasing);
    }
}
