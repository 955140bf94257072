use crate::controller::DdpgController;
use crate::envs::Environment;
use crate::error::{Error, Result};
use crate::numerics::RngStream;

/// Runs `episodes` complete episodes of `policy` on `env` and returns the
/// mean and population standard deviation of the episode returns. Episodes
/// start from `start` when given, otherwise from the initial distribution.
pub fn evaluate_policy<F>(
    env: &mut dyn Environment,
    episodes: usize,
    rng: &mut RngStream,
    start: Option<&[f64]>,
    mut policy: F,
) -> Result<(f64, f64)>
where
    F: FnMut(&[f64]) -> Result<Vec<f64>>,
{
    if episodes == 0 {
        return Err(Error::InvalidArgument("need at least one evaluation episode".into()));
    }
    let mut returns = Vec::with_capacity(episodes);
    for _ in 0..episodes {
        match start {
            Some(s) => env.reset_to(s)?,
            None => env.reset_random(rng),
        };
        let mut total = 0.0;
        loop {
            let state = env.current_state().expect("environment was reset").to_vec();
            let action = policy(&state)?;
            let out = env.step(&action)?;
            total += out.reward;
            if out.done() {
                break;
            }
        }
        returns.push(total);
    }
    let n = returns.len() as f64;
    let mean = returns.iter().sum::<f64>() / n;
    let var = returns.iter().map(|r| (r - mean) * (r - mean)).sum::<f64>() / n;
    Ok((mean, var.sqrt()))
}

/// Greedy (noise-free) evaluation of a controller.
pub fn evaluate(
    controller: &DdpgController,
    env: &mut dyn Environment,
    episodes: usize,
    rng: &mut RngStream,
) -> Result<(f64, f64)> {
    let mut noise_rng = rng.fork();
    evaluate_policy(env, episodes, rng, None, |s| controller.act(s, false, &mut noise_rng))
}
