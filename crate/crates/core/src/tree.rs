//! Index-based search-tree arena.
//!
//! History nodes and action nodes live in two flat tables and refer to each
//! other by [`HistoryId`] / [`ActionId`]. The arena only grows during a
//! search, so ids handed out stay valid until the tree is dropped. Each
//! planner variant stores its own per-history payload `P` (observation and
//! particles, or a particle belief).

use alloc::vec::Vec;

use crate::model::{zero_costs, Costs};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct HistoryId(pub u32);

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct ActionId(pub u32);

/// Id of the root history node in every tree.
pub const ROOT: HistoryId = HistoryId(0);

/// Running statistics of an action node: `N`, `Q`, `Q_C` and `c̄`.
#[derive(Debug, Clone, PartialEq)]
pub struct ActionStats {
    pub visits: u32,
    pub reward_value: f64,
    pub cost_value: Costs,
    pub immediate_cost: Costs,
}

impl ActionStats {
    pub fn new(k: usize) -> Self {
        Self {
            visits: 0,
            reward_value: 0.0,
            cost_value: zero_costs(k),
            immediate_cost: zero_costs(k),
        }
    }

    /// Incremental-mean backup of one sample.
    pub fn record(&mut self, value: f64, cost_return: &[f64], immediate: &[f64]) {
        self.visits += 1;
        let n = self.visits as f64;
        self.reward_value += (value - self.reward_value) / n;
        for (q, c) in self.cost_value.iter_mut().zip(cost_return) {
            *q += (c - *q) / n;
        }
        for (q, c) in self.immediate_cost.iter_mut().zip(immediate) {
            *q += (c - *q) / n;
        }
    }
}

#[derive(Debug, Clone)]
pub struct HistoryNode<P> {
    pub visits: u32,
    pub children: Vec<ActionId>,
    pub payload: P,
}

#[derive(Debug, Clone)]
pub struct ActionNode<A> {
    pub action: A,
    pub parent: HistoryId,
    pub stats: ActionStats,
    pub children: Vec<HistoryId>,
}

#[derive(Debug, Clone)]
pub struct Tree<A, P> {
    histories: Vec<HistoryNode<P>>,
    actions: Vec<ActionNode<A>>,
    n_costs: usize,
}

impl<A, P> Tree<A, P> {
    /// New tree holding only the root history node.
    pub fn new(root: P, n_costs: usize) -> Self {
        Self {
            histories: alloc::vec![HistoryNode {
                visits: 0,
                children: Vec::new(),
                payload: root,
            }],
            actions: Vec::new(),
            n_costs,
        }
    }

    pub fn n_costs(&self) -> usize {
        self.n_costs
    }

    pub fn history(&self, id: HistoryId) -> &HistoryNode<P> {
        &self.histories[id.0 as usize]
    }

    pub fn history_mut(&mut self, id: HistoryId) -> &mut HistoryNode<P> {
        &mut self.histories[id.0 as usize]
    }

    pub fn action(&self, id: ActionId) -> &ActionNode<A> {
        &self.actions[id.0 as usize]
    }

    pub fn action_mut(&mut self, id: ActionId) -> &mut ActionNode<A> {
        &mut self.actions[id.0 as usize]
    }

    pub fn n_histories(&self) -> usize {
        self.histories.len()
    }

    pub fn n_actions(&self) -> usize {
        self.actions.len()
    }

    pub fn add_action(&mut self, parent: HistoryId, action: A) -> ActionId {
        let id = ActionId(self.actions.len() as u32);
        self.actions.push(ActionNode {
            action,
            parent,
            stats: ActionStats::new(self.n_costs),
            children: Vec::new(),
        });
        self.histories[parent.0 as usize].children.push(id);
        id
    }

    pub fn add_history(&mut self, parent: ActionId, payload: P) -> HistoryId {
        let id = HistoryId(self.histories.len() as u32);
        self.histories.push(HistoryNode {
            visits: 0,
            children: Vec::new(),
            payload,
        });
        self.actions[parent.0 as usize].children.push(id);
        id
    }

    /// Child actions of a history node with their statistics.
    pub fn child_stats(&self, id: HistoryId) -> impl Iterator<Item = (ActionId, &ActionNode<A>)> {
        self.history(id).children.iter().map(move |a| (*a, self.action(*a)))
    }
}
