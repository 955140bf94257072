use crate::error::{Error, Result};
use crate::numerics::RngStream;

/// One trainer-level transition.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TrainerSample {
    pub obs: f64,
    pub action: usize,
    pub reward: f64,
    pub next_obs: f64,
}

/// Replay memory of total capacity `M` split into one store per action,
/// each capped at `floor(M / |A|)`. A full store overwrites a random entry
/// of its own, so actions never evict each other.
#[derive(Debug, Clone)]
pub struct CappedReplay {
    capacity: usize,
    per_action_cap: usize,
    stores: Vec<Vec<TrainerSample>>,
}

impl CappedReplay {
    pub fn new(capacity: usize, num_actions: usize) -> Result<Self> {
        if num_actions == 0 || capacity < num_actions {
            return Err(Error::InvalidArgument(format!(
                "memory of {capacity} cannot hold one sample for each of {num_actions} actions"
            )));
        }
        Ok(CappedReplay { capacity, per_action_cap: capacity / num_actions, stores: vec![Vec::new(); num_actions] })
    }

    pub fn capacity(&self) -> usize {
        self.capacity
    }

    pub fn per_action_cap(&self) -> usize {
        self.per_action_cap
    }

    pub fn num_actions(&self) -> usize {
        self.stores.len()
    }

    pub fn len(&self) -> usize {
        self.stores.iter().map(Vec::len).sum()
    }

    pub fn is_empty(&self) -> bool {
        self.stores.iter().all(Vec::is_empty)
    }

    pub fn action_len(&self, action: usize) -> usize {
        self.stores.get(action).map_or(0, Vec::len)
    }

    pub fn store_of(&self, action: usize) -> &[TrainerSample] {
        &self.stores[action]
    }

    pub fn store(&mut self, sample: TrainerSample, rng: &mut RngStream) -> Result<()> {
        let cap = self.per_action_cap;
        let store = self
            .stores
            .get_mut(sample.action)
            .ok_or_else(|| Error::InvalidArgument(format!("action index {} out of range", sample.action)))?;
        if store.len() < cap {
            store.push(sample);
        } else {
            let slot = rng.index(cap);
            store[slot] = sample;
        }
        Ok(())
    }

    /// Entry `i` in store order (action 0 first).
    pub fn get(&self, mut i: usize) -> Option<&TrainerSample> {
        for s in &self.stores {
            if i < s.len() {
                return s.get(i);
            }
            i -= s.len();
        }
        None
    }

    /// `count` entries drawn uniformly across all stores; without replacement
    /// when the memory holds at least `count` entries.
    pub fn sample(&self, count: usize, rng: &mut RngStream) -> Vec<TrainerSample> {
        let total = self.len();
        if total == 0 {
            return Vec::new();
        }
        let indices: Vec<usize> = if total >= count {
            let mut all: Vec<usize> = (0..total).collect();
            for k in 0..count {
                let j = k + rng.index(total - k);
                all.swap(k, j);
            }
            all.truncate(count);
            all
        } else {
            (0..count).map(|_| rng.index(total)).collect()
        };
        indices.into_iter().map(|i| *self.get(i).expect("index in range")).collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sample(action: usize, reward: f64) -> TrainerSample {
        TrainerSample { obs: 0.0, action, reward, next_obs: 0.0 }
    }

    #[test]
    fn cap_matches_memory_split() {
        let m = CappedReplay::new(32, 8).unwrap();
        assert_eq!(m.per_action_cap(), 4);
        assert_eq!(CappedReplay::new(2000, 8).unwrap().per_action_cap(), 250);
        assert!(CappedReplay::new(32, 125).is_err());
    }

    #[test]
    fn fifth_insert_replaces_exactly_one() {
        let mut rng = RngStream::new(1);
        let mut m = CappedReplay::new(32, 8).unwrap();
        for k in 0..5 {
            m.store(sample(3, k as f64), &mut rng).unwrap();
        }
        assert_eq!(m.action_len(3), 4);
        let kept: Vec<f64> = m.store_of(3).iter().map(|s| s.reward).collect();
        assert!(kept.contains(&4.0));
        assert_eq!((0..4).filter(|k| kept.contains(&(*k as f64))).count(), 3);
    }

    #[test]
    fn actions_are_isolated() {
        let mut rng = RngStream::new(2);
        let mut m = CappedReplay::new(32, 8).unwrap();
        for k in 0..4 {
            m.store(sample(0, k as f64), &mut rng).unwrap();
        }
        for _ in 0..50 {
            m.store(sample(1, -1.0), &mut rng).unwrap();
        }
        let kept: Vec<f64> = m.store_of(0).iter().map(|s| s.reward).collect();
        assert_eq!(kept, vec![0.0, 1.0, 2.0, 3.0]);
        assert_eq!(m.len(), 8);
    }

    #[test]
    fn bad_action_rejected() {
        let mut m = CappedReplay::new(32, 8).unwrap();
        assert!(m.store(sample(8, 0.0), &mut RngStream::new(0)).is_err());
    }

    #[test]
    fn sampling_small_memory_uses_replacement() {
        let mut rng = RngStream::new(3);
        let mut m = CappedReplay::new(32, 8).unwrap();
        assert!(m.sample(8, &mut rng).is_empty());
        m.store(sample(2, 1.0), &mut rng).unwrap();
        let batch = m.sample(8, &mut rng);
        assert_eq!(batch.len(), 8);
        assert!(batch.iter().all(|s| s.action == 2));
    }

    #[test]
    fn sampling_large_memory_has_no_duplicates() {
        let mut rng = RngStream::new(4);
        let mut m = CappedReplay::new(32, 8).unwrap();
        for a in 0..8 {
            for k in 0..4 {
                m.store(sample(a, (a * 4 + k) as f64), &mut rng).unwrap();
            }
        }
        let mut r: Vec<i64> = m.sample(8, &mut rng).iter().map(|s| s.reward as i64).collect();
        r.sort_unstable();
        r.dedup();
        assert_eq!(r.len(), 8);
    }
}
