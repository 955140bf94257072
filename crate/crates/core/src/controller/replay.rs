use crate::envs::Transition;
use crate::numerics::RngStream;

/// Fixed-capacity ring of transitions with uniform sampling.
#[derive(Debug, Clone)]
pub struct ReplayBuffer {
    capacity: usize,
    storage: Vec<Transition>,
    cursor: usize,
}

impl ReplayBuffer {
    pub fn new(capacity: usize) -> Self {
        assert!(capacity > 0, "replay capacity must be positive");
        ReplayBuffer { capacity, storage: Vec::new(), cursor: 0 }
    }

    pub fn capacity(&self) -> usize {
        self.capacity
    }

    pub fn len(&self) -> usize {
        self.storage.len()
    }

    pub fn is_empty(&self) -> bool {
        self.storage.is_empty()
    }

    /// Appends, overwriting the oldest entry once full.
    pub fn push(&mut self, t: Transition) {
        if self.storage.len() < self.capacity {
            self.storage.push(t);
        } else {
            self.storage[self.cursor] = t;
        }
        self.cursor = (self.cursor + 1) % self.capacity;
    }

    pub fn extend<I: IntoIterator<Item = Transition>>(&mut self, items: I) {
        for t in items {
            self.push(t);
        }
    }

    pub fn get(&self, i: usize) -> &Transition {
        &self.storage[i]
    }

    /// Entries from oldest to newest.
    pub fn iter(&self) -> impl Iterator<Item = &Transition> {
        let split = if self.storage.len() < self.capacity { 0 } else { self.cursor };
        self.storage[split..].iter().chain(self.storage[..split].iter())
    }

    /// Storage in slot order (not age order).
    pub fn as_slice(&self) -> &[Transition] {
        &self.storage
    }

    /// `n` indices drawn uniformly with replacement.
    pub fn sample_indices(&self, n: usize, rng: &mut RngStream) -> Vec<usize> {
        if self.storage.is_empty() {
            return Vec::new();
        }
        (0..n).map(|_| rng.index(self.storage.len())).collect()
    }

    /// A uniformly chosen stored state.
    pub fn random_state(&self, rng: &mut RngStream) -> Option<&[f64]> {
        if self.storage.is_empty() {
            None
        } else {
            Some(&self.storage[rng.index(self.storage.len())].state)
        }
    }
}
