use serde::{Deserialize, Serialize};

use super::Individual;

/// `a` is no worse than `b` everywhere and strictly better somewhere.
pub fn dominates(a: &[f64], b: &[f64]) -> bool {
    let mut strictly = false;
    for (x, y) in a.iter().zip(b) {
        if x > y {
            return false;
        }
        if x < y {
            strictly = true;
        }
    }
    strictly
}

/// Feasible, mutually non-dominated individuals seen so far. Candidates whose
/// objective vector equals a member's are not added.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Archive {
    members: Vec<Individual>,
}

impl Archive {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn members(&self) -> &[Individual] {
        &self.members
    }

    pub fn len(&self) -> usize {
        self.members.len()
    }

    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }

    /// Returns whether the candidate entered the archive.
    pub fn insert(&mut self, candidate: &Individual) -> bool {
        if !candidate.is_feasible() {
            return false;
        }
        let f = &candidate.objectives;
        if self.members.iter().any(|m| m.objectives == *f || dominates(&m.objectives, f)) {
            return false;
        }
        self.members.retain(|m| !dominates(f, &m.objectives));
        self.members.push(candidate.clone());
        true
    }

    pub fn into_members(self) -> Vec<Individual> {
        self.members
    }
}
