use super::{ActionTable, Choice};
use crate::numerics::RngStream;
use crate::tpe::TpeAction;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BaselineKind {
    /// Uniform over the action table.
    Random,
    /// Always `(0.6, 0.6, 0.6)`.
    Fixed,
    /// Always real data only.
    NoCyber,
}

impl BaselineKind {
    pub fn name(self) -> &'static str {
        match self {
            BaselineKind::Random => "random",
            BaselineKind::Fixed => "fixed",
            BaselineKind::NoCyber => "nocyber",
        }
    }
}

#[derive(Debug, Clone)]
pub struct BaselineTrainer {
    kind: BaselineKind,
    table: ActionTable,
    fixed: TpeAction,
}

impl BaselineTrainer {
    pub fn new(kind: BaselineKind, table: ActionTable) -> Self {
        let fixed = match kind {
            BaselineKind::NoCyber => TpeAction::all_real(),
            _ => TpeAction { a0: 0.6, a1: 0.6, a2: 0.6 },
        };
        BaselineTrainer { kind, table, fixed }
    }

    /// Overrides the constant action of a `Fixed` trainer.
    pub fn with_fixed_action(mut self, action: TpeAction) -> Self {
        if self.kind == BaselineKind::Fixed {
            self.fixed = action;
        }
        self
    }

    pub fn kind(&self) -> BaselineKind {
        self.kind
    }

    pub fn table(&self) -> &ActionTable {
        &self.table
    }

    pub fn select(&self, rng: &mut RngStream) -> Choice {
        match self.kind {
            BaselineKind::Random => {
                let i = rng.index(self.table.len());
                Choice { index: Some(i), action: self.table.actions()[i] }
            }
            _ => Choice { index: None, action: self.fixed },
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::tpe::{compute_kc, compute_tc};

    #[test]
    fn constant_baselines() {
        let mut rng = RngStream::new(0);
        let fixed = BaselineTrainer::new(BaselineKind::Fixed, ActionTable::two_level());
        let none = BaselineTrainer::new(BaselineKind::NoCyber, ActionTable::two_level());
        for _ in 0..100 {
            assert_eq!(fixed.select(&mut rng).action.as_array(), [0.6, 0.6, 0.6]);
            let a = none.select(&mut rng).action;
            assert_eq!(a.a2, 1.0);
            assert_eq!(compute_kc(50, a.a2).unwrap(), 0);
            assert_eq!(compute_tc(50, a.a2).unwrap(), 0);
        }
    }

    #[test]
    fn random_is_uniform_over_table() {
        let t = BaselineTrainer::new(BaselineKind::Random, ActionTable::two_level());
        let mut rng = RngStream::new(11);
        let n = 10_000;
        let mut counts = [0f64; 8];
        for _ in 0..n {
            let c = t.select(&mut rng);
            let i = c.index.unwrap();
            assert_eq!(t.table().actions()[i], c.action);
            counts[i] += 1.0;
        }
        let expected = n as f64 / 8.0;
        let chi2: f64 = counts.iter().map(|c| (c - expected).powi(2) / expected).sum();
        // Upper 1% point of chi-square with 7 degrees of freedom.
        assert!(chi2 < 18.475, "chi2 = {chi2}");
    }
}
