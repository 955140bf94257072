use crate::error::{Error, Result};

/// `a2` as an exact fraction `p / 1_000_000`.
fn a2_as_fraction(a2: f64) -> Result<u64> {
    if !(a2 > 0.0 && a2 <= 1.0) {
        return Err(Error::InvalidArgument(format!("a2 must lie in (0, 1], got {a2}")));
    }
    let p = (a2 * 1_000_000.0).round() as u64;
    if p == 0 {
        return Err(Error::InvalidArgument(format!("a2 = {a2} is too close to zero")));
    }
    Ok(p)
}

/// `round(count · (1 − a2) / a2)` with ties to even, evaluated in integer
/// arithmetic so tabulated ratios such as 0.2 or 0.4 are exact.
fn synthetic_count(count: usize, a2: f64) -> Result<usize> {
    const Q: u64 = 1_000_000;
    let p = a2_as_fraction(a2)?;
    let num = count as u64 * (Q - p);
    let (quot, rem) = (num / p, num % p);
    let rounded = match (2 * rem).cmp(&p) {
        std::cmp::Ordering::Less => quot,
        std::cmp::Ordering::Greater => quot + 1,
        std::cmp::Ordering::Equal => quot + (quot % 2),
    };
    Ok(rounded as usize)
}

/// Synthetic samples to draw per step for `k_real` real samples.
pub fn compute_kc(k_real: usize, a2: f64) -> Result<usize> {
    synthetic_count(k_real, a2)
}

/// Synthetic mini-batches per step for `t_real` real mini-batches.
pub fn compute_tc(t_real: usize, a2: f64) -> Result<usize> {
    synthetic_count(t_real, a2)
}

/// `Φ = a0·q + (1 − a0)·u`
pub fn quality_from_parts(a0: f64, q: f64, u: f64) -> f64 {
    a0 * q + (1.0 - a0) * u
}

/// Sign of the change in average sampling reward.
pub fn reward_sign(previous: f64, current: f64) -> i8 {
    if current > previous {
        1
    } else if current < previous {
        -1
    } else {
        0
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn tabulated_counts() {
        assert_eq!(compute_kc(10, 0.5).unwrap(), 10);
        assert_eq!(compute_kc(10, 1.0).unwrap(), 0);
        assert_eq!(compute_kc(10, 0.2).unwrap(), 40);
        assert_eq!(compute_tc(4, 0.5).unwrap(), 4);
        assert_eq!(compute_tc(4, 1.0).unwrap(), 0);
        assert_eq!(compute_tc(4, 0.2).unwrap(), 16);
    }

    #[test]
    fn ties_round_to_even() {
        // 1 · 0.6 / 0.4 = 1.5 → 2;  3 · 0.6 / 0.4 = 4.5 → 4
        assert_eq!(compute_kc(1, 0.4).unwrap(), 2);
        assert_eq!(compute_kc(3, 0.4).unwrap(), 4);
    }

    #[test]
    fn non_positive_a2_is_rejected() {
        assert!(matches!(compute_kc(10, 0.0), Err(Error::InvalidArgument(_))));
        assert!(compute_tc(10, -0.5).is_err());
        assert!(compute_tc(10, 1.5).is_err());
    }

    #[test]
    fn quality_endpoints() {
        assert_eq!(quality_from_parts(1.0, 3.5, 0.9), 3.5);
        assert_eq!(quality_from_parts(0.0, 3.5, 0.9), 0.9);
        assert!((quality_from_parts(0.5, 2.0, 0.4) - 1.2).abs() < 1e-12);
    }

    #[test]
    fn sign_cases() {
        assert_eq!(reward_sign(3.0, 5.0), 1);
        assert_eq!(reward_sign(3.0, 3.0), 0);
        assert_eq!(reward_sign(4.0, 2.0), -1);
    }
}
