use crate::budget::Budget;
use crate::error::Result;
use crate::mover::Mover;
use crate::semigroup::InverseSemigroup;
use crate::space::SpaceRef;

/// A base space with the inverse semigroup generated by named movers.
#[derive(Clone, Debug)]
pub struct ActionModel {
    pub space: SpaceRef,
    pub generators: Vec<(String, Mover)>,
    pub semigroup: InverseSemigroup,
    pub budget: Budget,
}

impl ActionModel {
    /// Finite spaces get the full closure; path spaces the closure up to
    /// `budget.len`.
    pub fn new(space: &SpaceRef, generators: Vec<(String, Mover)>, budget: Budget) -> Result<Self> {
        let max_len = if space.is_finite() { None } else { Some(budget.len) };
        let semigroup = InverseSemigroup::closure(space, &generators, max_len)?;
        Ok(ActionModel {
            space: space.clone(),
            generators,
            semigroup,
            budget,
        })
    }

    pub fn with_budget(&self, budget: Budget) -> Result<Self> {
        ActionModel::new(&self.space, self.generators.clone(), budget)
    }

    pub fn is_finite(&self) -> bool {
        self.space.is_finite()
    }
}
