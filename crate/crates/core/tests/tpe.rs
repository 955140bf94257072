use proptest::prelude::*;
use ror_core::controller::DdpgParams;
use ror_core::cyber::ModelConfig;
use ror_core::envs::Task;
use ror_core::numerics::RngStream;
use ror_core::tpe::{compute_kc, sampling_reset_real, select_start_state, Tpe, TpeAction, TpeConfig, TpeObsMode};
use ror_core::Error;

fn small(k_real: usize, budget: usize, init: usize) -> TpeConfig {
    TpeConfig {
        k_real,
        t_real: 1,
        budget_n: budget,
        init_samples: init,
        model: ModelConfig { hidden: vec![8], epochs: 1, max_batches_per_epoch: Some(1), ..ModelConfig::default() },
        ddpg: DdpgParams { hidden: vec![8], batch_size: 8, warmup_size: 8, ..DdpgParams::default() },
        ..TpeConfig::default()
    }
}

/// `round(k · (q − p) / p)` for `a2 = p / q`, ties to even, in exact integers.
fn oracle(k: u64, p: u64, q: u64) -> u64 {
    let num = k * (q - p);
    let (d, r) = (num / p, num % p);
    match (2 * r).cmp(&p) {
        std::cmp::Ordering::Greater => d + 1,
        std::cmp::Ordering::Equal if d % 2 == 1 => d + 1,
        _ => d,
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn synthetic_counts_match_rational_rounding(k in 0u64..1000, p in 1u64..=20) {
        let a2 = p as f64 / 20.0;
        prop_assert_eq!(compute_kc(k as usize, a2).unwrap() as u64, oracle(k, p, 20));
    }

    #[test]
    fn rewards_are_signs_and_budget_holds(seed in 0u64..1000, picks in prop::collection::vec((0usize..5, 0usize..5, 0usize..5), 1..12)) {
        let levels = [0.2, 0.4, 0.6, 0.8, 1.0];
        let mut tpe = Tpe::for_task(Task::Pendulum, small(9, 80, 10), seed).unwrap();
        for (i, j, k) in picks {
            if tpe.is_done() {
                prop_assert!(matches!(tpe.step(TpeAction::all_real()), Err(Error::State(_))));
                break;
            }
            let r = tpe.step(TpeAction::new(levels[i], levels[j], levels[k]).unwrap()).unwrap();
            prop_assert!([-1, 0, 1].contains(&r.reward));
            prop_assert!(r.real_samples_used_total <= 80);
            prop_assert_eq!(tpe.real_env().total_steps() as usize, r.real_samples_used_total);
            prop_assert_eq!(r.done, r.real_samples_used_total >= 80);
        }
    }
}

#[test]
fn sample_ratio_observation() {
    let mut cfg = small(10, 1000, 500);
    cfg.obs_mode = TpeObsMode::SampleRatio;
    let tpe = Tpe::for_task(Task::Pendulum, cfg, 0).unwrap();
    assert_eq!(tpe.observation(), 0.5);
}

#[test]
fn last_average_reward_observation_is_step_mean() {
    let mut cfg = small(2, 100, 0);
    cfg.obs_mode = TpeObsMode::LastAvgReward;
    let mut tpe = Tpe::for_task(Task::Pendulum, cfg, 1).unwrap();
    let r = tpe.step(TpeAction::all_real()).unwrap();
    let rewards: Vec<f64> = tpe.real_buffer().iter().map(|t| t.reward).collect();
    assert_eq!(rewards.len(), 2);
    assert!((r.observation - (rewards[0] + rewards[1]) / 2.0).abs() < 1e-12);
}

#[test]
fn start_selection_trial_bounds() {
    let mut rng = RngStream::new(8);
    for _ in 0..200 {
        let (_, trials) = select_start_state(50, 5, || (), |_| Ok(rng.uniform())).unwrap();
        assert!((6..=50).contains(&trials));
    }
}

#[test]
fn real_reset_lands_on_an_initial_state() {
    let tpe = Tpe::for_task(Task::MountainCar, small(5, 100, 0), 3).unwrap();
    let mut env = Task::MountainCar.make_env();
    let mut rng = RngStream::new(4);
    for a0 in [0.0, 0.5, 1.0] {
        let s = sampling_reset_real(env.as_mut(), a0, tpe.controller(), 50, 5, &mut rng).unwrap();
        assert!((-0.6..=-0.4).contains(&s[0]) && s[1] == 0.0);
        assert_eq!(env.current_state().unwrap(), s.as_slice());
    }
}
