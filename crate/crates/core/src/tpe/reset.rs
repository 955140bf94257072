use super::formulas::quality_from_parts;
use crate::controller::{DdpgController, ReplayBuffer};
use crate::envs::Environment;
use crate::error::Result;
use crate::numerics::RngStream;

/// Start-state quality `Φ(s)` blending the critic's value of `s` under the
/// current policy with a fresh uniform draw.
pub fn quality(state: &[f64], a0: f64, controller: &DdpgController, rng: &mut RngStream) -> Result<f64> {
    let u = rng.uniform();
    let q = if a0 == 0.0 { 0.0 } else { controller.state_value(state)? };
    Ok(quality_from_parts(a0, q, u))
}

/// Draws candidates until, past the first `m2`, one scores at least the
/// running maximum (itself included), or `m1` candidates have been drawn.
/// Returns the last candidate and the number of trials.
pub fn select_start_state<S, C, Q>(m1: usize, m2: usize, mut candidate: C, mut score: Q) -> Result<(S, usize)>
where
    C: FnMut() -> S,
    Q: FnMut(&S) -> Result<f64>,
{
    let mut best = f64::NEG_INFINITY;
    let mut last = None;
    let mut trials = 0;
    for i in 1..=m1.max(1) {
        let s = candidate();
        let phi = score(&s)?;
        best = best.max(phi);
        last = Some(s);
        trials = i;
        if i > m2 && phi >= best {
            break;
        }
    }
    Ok((last.expect("at least one candidate is drawn"), trials))
}

/// Picks and applies the start state of a real episode.
pub fn sampling_reset_real(
    env: &mut dyn Environment,
    a0: f64,
    controller: &DdpgController,
    m1: usize,
    m2: usize,
    rng: &mut RngStream,
) -> Result<Vec<f64>> {
    let rng_cell = std::cell::RefCell::new(rng);
    let (start, _) = select_start_state(
        m1,
        m2,
        || env.sample_initial_state(&mut rng_cell.borrow_mut()),
        |s: &Vec<f64>| quality(s, a0, controller, &mut rng_cell.borrow_mut()),
    )?;
    env.reset_to(&start)
}

/// How a synthetic episode's start state was chosen.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CyberStart {
    FromBuffer,
    Uniform,
    /// The buffer branch was drawn but the buffer was empty.
    EmptyBufferFallback,
}

/// With probability `a1`, restarts the synthetic environment from a stored
/// real state; otherwise from a uniform draw over the state box.
pub fn sampling_reset_cyber(
    cyber: &mut dyn Environment,
    a1: f64,
    real_buffer: &ReplayBuffer,
    rng: &mut RngStream,
) -> Result<(Vec<f64>, CyberStart)> {
    let from_buffer = rng.uniform() < a1;
    if from_buffer {
        if let Some(s) = real_buffer.random_state(rng) {
            let s = s.to_vec();
            return Ok((cyber.reset_to(&s)?, CyberStart::FromBuffer));
        }
    }
    let s = cyber.sample_state_uniform(rng)?;
    let kind = if from_buffer { CyberStart::EmptyBufferFallback } else { CyberStart::Uniform };
    Ok((cyber.reset_to(&s)?, kind))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::controller::DdpgParams;
    use crate::envs::{Task, Transition};
    use crate::numerics::{Activation, Mlp};

    fn controller(seed: u64) -> DdpgController {
        let params = DdpgParams { hidden: vec![8], ..DdpgParams::default() };
        DdpgController::new(&Task::Pendulum.spec(), Task::Pendulum.observer(), params, &mut RngStream::new(seed))
            .unwrap()
    }

    #[test]
    fn scripted_trace_breaks_on_new_maximum() {
        let script = [0.1, 0.9, 0.2, 0.95];
        let mut k = 0;
        let (s, trials) = select_start_state(
            50,
            1,
            || {
                k += 1;
                k
            },
            |c: &usize| Ok(script[c - 1]),
        )
        .unwrap();
        assert_eq!((s, trials), (2, 2));
    }

    #[test]
    fn constant_quality_breaks_right_after_minimum() {
        for m2 in [1, 5, 10] {
            let mut k = 0;
            let (s, trials) = select_start_state(
                50,
                m2,
                || {
                    k += 1;
                    k
                },
                |_: &usize| Ok(2.0),
            )
            .unwrap();
            assert_eq!(trials, m2 + 1);
            assert_eq!(s, m2 + 1);
        }
    }

    #[test]
    fn decreasing_quality_runs_to_maximum_trials() {
        let mut k = 0;
        let (_, trials) = select_start_state(
            50,
            5,
            || {
                k += 1;
                k
            },
            |c: &usize| Ok(-(*c as f64)),
        )
        .unwrap();
        assert_eq!(trials, 50);
    }

    #[test]
    fn trials_always_within_bounds() {
        let mut rng = RngStream::new(3);
        for _ in 0..200 {
            let (_, t) = select_start_state(50, 5, || (), |_| Ok(rng.uniform())).unwrap();
            assert!((6..=50).contains(&t));
        }
    }

    #[test]
    fn quality_endpoints_with_controller() {
        let c = controller(1);
        let s = [0.4, -1.0];
        let phi = quality(&s, 1.0, &c, &mut RngStream::new(0)).unwrap();
        let a = c.act(&s, false, &mut RngStream::new(0)).unwrap();
        assert_eq!(phi, c.q_value(&s, &a).unwrap());
        let mut rng = RngStream::new(5);
        for _ in 0..100 {
            let phi = quality(&s, 0.0, &c, &mut rng).unwrap();
            assert!((0.0..1.0).contains(&phi));
        }
    }

    #[test]
    fn constant_critic_real_reset_uses_m2_plus_one_candidates() {
        let mut c = controller(2);
        let critic = Mlp::zeros(c.critic().layer_sizes(), Activation::Tanh, Activation::Identity).unwrap();
        let actor = c.actor().clone();
        c.set_networks(actor, critic).unwrap();
        let mut env = Task::Pendulum.make_env();
        // Replaying the same draws by hand: the 6th candidate is returned.
        let mut rng = RngStream::new(8);
        let start = sampling_reset_real(env.as_mut(), 1.0, &c, 50, 5, &mut rng).unwrap();
        let mut replay = RngStream::new(8);
        let mut expected = Vec::new();
        for _ in 0..6 {
            expected = env.sample_initial_state(&mut replay);
            replay.uniform();
        }
        assert_eq!(start, expected);
        assert_eq!(env.current_state().unwrap(), expected.as_slice());
    }

    #[test]
    fn cyber_reset_endpoints() {
        let mut env = Task::Pendulum.make_env();
        let mut buffer = ReplayBuffer::new(4);
        let mut rng = RngStream::new(0);
        let (_, kind) = sampling_reset_cyber(env.as_mut(), 1.0, &buffer, &mut rng).unwrap();
        assert_eq!(kind, CyberStart::EmptyBufferFallback);
        let s = vec![0.25, -3.0];
        buffer.push(Transition {
            state: s.clone(),
            action: vec![0.0],
            reward: 0.0,
            next_state: s.clone(),
            done: false,
        });
        let (start, kind) = sampling_reset_cyber(env.as_mut(), 1.0, &buffer, &mut rng).unwrap();
        assert_eq!((start, kind), (s, CyberStart::FromBuffer));
        for _ in 0..50 {
            let (start, kind) = sampling_reset_cyber(env.as_mut(), 0.0, &buffer, &mut rng).unwrap();
            assert_eq!(kind, CyberStart::Uniform);
            assert!(env.spec().contains_state(&start));
        }
    }

    #[test]
    fn cyber_reset_branch_frequency() {
        let mut env = Task::Pendulum.make_env();
        let mut buffer = ReplayBuffer::new(4);
        buffer.push(Transition {
            state: vec![0.0, 0.0],
            action: vec![0.0],
            reward: 0.0,
            next_state: vec![0.0, 0.0],
            done: false,
        });
        let mut rng = RngStream::new(12);
        let n = 10_000;
        let hits = (0..n)
            .filter(|_| sampling_reset_cyber(env.as_mut(), 0.7, &buffer, &mut rng).unwrap().1 == CyberStart::FromBuffer)
            .count();
        assert!(((hits as f64 / n as f64) - 0.7).abs() < 0.02);
    }
}
