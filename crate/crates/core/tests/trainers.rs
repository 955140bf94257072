use proptest::prelude::*;
use ror_core::numerics::RngStream;
use ror_core::trainers::{
    epsilon_at, ActionTable, BaselineKind, BaselineTrainer, CappedReplay, ReinforceConfig, ReinforceStep,
    ReinforceTrainer, Trainer, TrainerSample,
};

proptest! {
    #[test]
    fn capped_replay_respects_caps(
        actions in 1usize..20,
        extra in 0usize..100,
        inserts in prop::collection::vec(any::<u32>(), 0..500),
        seed in any::<u64>(),
    ) {
        let capacity = actions + extra;
        let mut memory = CappedReplay::new(capacity, actions).unwrap();
        let cap = capacity / actions;
        let mut rng = RngStream::new(seed);
        let mut seen = vec![0usize; actions];
        for (i, v) in inserts.iter().enumerate() {
            let a = *v as usize % actions;
            memory.store(TrainerSample { obs: i as f64, action: a, reward: 0.0, next_obs: 0.0 }, &mut rng).unwrap();
            seen[a] += 1;
            prop_assert!(memory.len() <= capacity);
            for b in 0..actions {
                prop_assert!(memory.action_len(b) <= cap);
                prop_assert_eq!(memory.action_len(b), seen[b].min(cap));
            }
        }
    }

    #[test]
    fn epsilon_bounded_and_monotone(t_max in 0usize..5000, a in 0usize..6000, b in 0usize..6000) {
        let (lo, hi) = (a.min(b), a.max(b));
        let e_lo = epsilon_at(lo, t_max, 1.0, 0.1, 0.1);
        let e_hi = epsilon_at(hi, t_max, 1.0, 0.1, 0.1);
        prop_assert!((0.1..=1.0).contains(&e_lo) && (0.1..=1.0).contains(&e_hi));
        prop_assert!(e_hi <= e_lo);
    }

    #[test]
    fn reinforce_keeps_a_distribution(seed in any::<u64>(), rewards in prop::collection::vec(-50.0f64..50.0, 5), action in 0usize..8) {
        let mut rng = RngStream::new(seed);
        let mut t = ReinforceTrainer::new(ActionTable::two_level(), ReinforceConfig::default(), &mut rng).unwrap();
        let episode: Vec<ReinforceStep> = rewards.iter().map(|&reward| ReinforceStep { obs: 0.3, action, reward }).collect();
        t.update(&episode).unwrap();
        let p = t.probabilities(0.3).unwrap();
        prop_assert!((p.iter().sum::<f64>() - 1.0).abs() < 1e-9);
        prop_assert!(p.iter().all(|x| *x >= 0.0));
    }
}

#[test]
fn random_marginals_are_uniform_per_dimension() {
    let table = ActionTable::two_level();
    let trainer = BaselineTrainer::new(BaselineKind::Random, table);
    let mut rng = RngStream::new(21);
    let n = 10_000;
    let mut high = [0usize; 3];
    for _ in 0..n {
        let a = trainer.select(&mut rng).action.as_array();
        for d in 0..3 {
            if a[d] == 1.0 {
                high[d] += 1;
            }
        }
    }
    for h in high {
        // Two cells, one degree of freedom; 1% critical value 6.635.
        let e = n as f64 / 2.0;
        let chi2 = 2.0 * (h as f64 - e).powi(2) / e;
        assert!(chi2 < 6.635, "{chi2}");
    }
}

#[test]
fn baseline_trainers_ignore_feedback() {
    let mut rng = RngStream::new(0);
    let mut t = Trainer::Baseline(BaselineTrainer::new(BaselineKind::NoCyber, ActionTable::two_level()));
    for step in 0..10 {
        let c = t.select(0.0, step, &mut rng).unwrap();
        assert_eq!(c.action.as_array(), [0.0, 0.0, 1.0]);
        t.observe(0.0, c, 1.0, 0.0, &mut rng).unwrap();
    }
    assert_eq!(t.name(), "nocyber");
}

#[test]
fn five_level_table_contents() {
    let t = ActionTable::five_level();
    assert_eq!(t.len(), 125);
    assert!(t.actions().iter().all(|a| a.a2 > 0.0));
    assert_eq!(t.nearest(&ror_core::tpe::TpeAction::new(0.6, 0.6, 0.6).unwrap()), 62);
}
