use serde::{Deserialize, Serialize};
use std::time::{Duration, Instant};

/// Effort cap for a tree search. Node limits are the reproducible budget;
/// the wall-clock cap is optional and off unless requested.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct SearchBudget {
    pub node_limit: Option<u64>,
    pub wall_millis: Option<u64>,
}

impl SearchBudget {
    pub const UNLIMITED: SearchBudget = SearchBudget {
        node_limit: None,
        wall_millis: None,
    };

    pub fn nodes(limit: u64) -> Self {
        SearchBudget {
            node_limit: Some(limit),
            wall_millis: None,
        }
    }

    pub fn is_unlimited(&self) -> bool {
        self.node_limit.is_none() && self.wall_millis.is_none()
    }

    pub(crate) fn meter(&self) -> Meter {
        Meter {
            nodes: 0,
            limit: self.node_limit,
            deadline: self
                .wall_millis
                .map(|ms| Instant::now() + Duration::from_millis(ms)),
        }
    }
}

/// Running node counter for one search.
#[derive(Debug, Clone)]
pub(crate) struct Meter {
    pub nodes: u64,
    limit: Option<u64>,
    deadline: Option<Instant>,
}

impl Meter {
    /// Counts one node; `false` once the budget is spent.
    pub fn tick(&mut self) -> bool {
        self.nodes += 1;
        if let Some(limit) = self.limit {
            if self.nodes > limit {
                return false;
            }
        }
        if let Some(deadline) = self.deadline {
            // Checking the clock on every node is measurable; every 256th is enough.
            if self.nodes & 0xff == 0 && Instant::now() >= deadline {
                return false;
            }
        }
        true
    }
}
