//! Best-first A* over an arbitrary [`SearchDomain`].
//!
//! The driver checks both limits at the top of every expansion iteration,
//! orders the open list by `(f, domain tiebreak, insertion index)` and
//! counts only successors that are admitted to the open list.

use std::cmp::Ordering;
use std::collections::{BinaryHeap, HashMap, HashSet};
use std::hash::Hash;
use std::time::Instant;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::scalar::Score;

/// Problem definition consumed by [`astar`].
pub trait SearchDomain {
    type State: Clone + Eq + Hash;
    type Move: Clone;

    fn validate(&self, state: &Self::State) -> Result<(), String>;
    fn is_goal(&self, state: &Self::State) -> bool;
    /// Successors in the order the driver should admit them.
    fn neighbors(&self, state: &Self::State) -> Vec<(Self::Move, Self::State)>;
    /// Secondary priority between `f` and the insertion counter.
    fn tiebreak(&self, _mv: &Self::Move, _state: &Self::State) -> i64 {
        0
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SearchLimits {
    pub timeout_seconds: f64,
    pub max_evaluated_nodes: u64,
    /// Objective reported for an unsolved instance.
    pub max_moves_penalty: u32,
}

impl SearchLimits {
    /// 60 s, 100 000 nodes, penalty 100.
    pub const UPMP: SearchLimits =
        SearchLimits { timeout_seconds: 60.0, max_evaluated_nodes: 100_000, max_moves_penalty: 100 };
    /// 60 s, 1 000 000 nodes, penalty 200.
    pub const SPP: SearchLimits =
        SearchLimits { timeout_seconds: 60.0, max_evaluated_nodes: 1_000_000, max_moves_penalty: 200 };

    pub fn validate(&self) -> Result<(), String> {
        if !(self.timeout_seconds > 0.0) {
            return Err(format!("timeout_seconds must be positive, got {}", self.timeout_seconds));
        }
        if self.max_moves_penalty == 0 {
            return Err("max_moves_penalty must be positive".into());
        }
        Ok(())
    }
}

/// How already-seen states are treated.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum DuplicatePolicy {
    /// States are marked visited when pushed and never re-opened.
    #[default]
    Paper,
    /// States are closed on expansion; a cheaper path to an open state
    /// supersedes the older entry. Optimal for consistent heuristics.
    Strict,
}

impl std::str::FromStr for DuplicatePolicy {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "paper" => Ok(DuplicatePolicy::Paper),
            "strict" => Ok(DuplicatePolicy::Strict),
            other => Err(format!("unknown duplicate policy `{other}` (expected paper|strict)")),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Termination {
    Goal,
    Timeout,
    NodeLimit,
    Exhausted,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SearchResult<M> {
    pub solved: bool,
    pub moves: Vec<M>,
    pub objective_value: u32,
    pub evaluated_nodes: u64,
    pub elapsed_seconds: f64,
    pub termination: Termination,
}

/// Failure of the scoring function itself.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum ScoreError {
    #[error("heuristic failed: {0}")]
    Failed(String),
    #[error("heuristic returned a non-numeric score: {0}")]
    NonNumeric(String),
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SearchError {
    #[error("invalid start state: {0}")]
    InvalidStart(String),
    #[error(transparent)]
    Score(#[from] ScoreError),
}

pub type NodeId = usize;

#[derive(Debug, Clone)]
pub struct SearchNode<St, Mv, S> {
    pub state: St,
    pub g: u32,
    pub h: S,
    pub f: S,
    pub parent: Option<NodeId>,
    pub mv: Option<Mv>,
    pub insertion_index: u64,
}

/// Arena of every node created by one search.
#[derive(Debug, Clone)]
pub struct SearchTree<St, Mv, S> {
    nodes: Vec<SearchNode<St, Mv, S>>,
}

impl<St, Mv, S> Default for SearchTree<St, Mv, S> {
    fn default() -> Self {
        SearchTree { nodes: Vec::new() }
    }
}

impl<St: Clone, Mv: Clone, S: Score> SearchTree<St, Mv, S> {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn push_root(&mut self, state: St, h: S) -> NodeId {
        self.push(SearchNode { state, g: 0, h, f: h, parent: None, mv: None, insertion_index: 0 })
    }

    pub fn push_child(&mut self, parent: NodeId, mv: Mv, state: St, h: S) -> NodeId {
        let g = self.nodes[parent].g + 1;
        let insertion_index = self.nodes.len() as u64;
        self.push(SearchNode {
            state,
            g,
            h,
            f: S::from_path_cost(g) + h,
            parent: Some(parent),
            mv: Some(mv),
            insertion_index,
        })
    }

    fn push(&mut self, node: SearchNode<St, Mv, S>) -> NodeId {
        self.nodes.push(node);
        self.nodes.len() - 1
    }

    pub fn node(&self, id: NodeId) -> &SearchNode<St, Mv, S> {
        &self.nodes[id]
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    /// Moves and resulting states from the root to `goal`, in forward order.
    pub fn reconstruct_path(&self, goal: NodeId) -> Vec<(Mv, St)> {
        let mut path = Vec::with_capacity(self.nodes[goal].g as usize);
        let mut current = goal;
        while let Some(parent) = self.nodes[current].parent {
            let node = &self.nodes[current];
            path.push((node.mv.clone().expect("non-root node carries a move"), node.state.clone()));
            current = parent;
        }
        path.reverse();
        path
    }
}

struct OpenEntry<S> {
    f: S,
    tiebreak: i64,
    insertion_index: u64,
    id: NodeId,
}

impl<S: Score> PartialEq for OpenEntry<S> {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}

impl<S: Score> Eq for OpenEntry<S> {}

impl<S: Score> PartialOrd for OpenEntry<S> {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl<S: Score> Ord for OpenEntry<S> {
    // Reversed: BinaryHeap is a max-heap, the smallest key must pop first.
    fn cmp(&self, other: &Self) -> Ordering {
        other
            .f
            .order(&self.f)
            .then_with(|| other.tiebreak.cmp(&self.tiebreak))
            .then_with(|| other.insertion_index.cmp(&self.insertion_index))
    }
}

fn checked<S: Score>(value: Result<S, ScoreError>) -> Result<S, ScoreError> {
    let value = value?;
    if value.is_valid() {
        Ok(value)
    } else {
        Err(ScoreError::NonNumeric(format!("{value:?}")))
    }
}

/// Run A* and report the outcome.
pub fn astar<D, S, F>(
    domain: &D,
    score: F,
    start: &D::State,
    limits: &SearchLimits,
    policy: DuplicatePolicy,
) -> Result<SearchResult<D::Move>, SearchError>
where
    D: SearchDomain,
    S: Score,
    F: FnMut(&D::State) -> Result<S, ScoreError>,
{
    astar_observed(domain, score, start, limits, policy, |_| {})
}

/// [`astar`] with a callback invoked on every node popped for expansion.
pub fn astar_observed<D, S, F, O>(
    domain: &D,
    mut score: F,
    start: &D::State,
    limits: &SearchLimits,
    policy: DuplicatePolicy,
    mut on_pop: O,
) -> Result<SearchResult<D::Move>, SearchError>
where
    D: SearchDomain,
    S: Score,
    F: FnMut(&D::State) -> Result<S, ScoreError>,
    O: FnMut(&SearchNode<D::State, D::Move, S>),
{
    domain.validate(start).map_err(SearchError::InvalidStart)?;

    let clock = Instant::now();
    let mut tree: SearchTree<D::State, D::Move, S> = SearchTree::new();
    let mut open = BinaryHeap::new();
    let mut evaluated_nodes: u64 = 0;

    // Paper policy: every state ever pushed. Strict policy: best g seen so
    // far plus the set of expanded states.
    let mut visited: HashSet<D::State> = HashSet::new();
    let mut best_g: HashMap<D::State, u32> = HashMap::new();
    let mut closed: HashSet<D::State> = HashSet::new();

    let h0 = checked(score(start))?;
    let root = tree.push_root(start.clone(), h0);
    open.push(OpenEntry { f: h0, tiebreak: 0, insertion_index: 0, id: root });
    match policy {
        DuplicatePolicy::Paper => {
            visited.insert(start.clone());
        }
        DuplicatePolicy::Strict => {
            best_g.insert(start.clone(), 0);
        }
    }

    let finish =
        |termination: Termination, moves: Option<Vec<D::Move>>, evaluated_nodes: u64| -> SearchResult<D::Move> {
            let elapsed_seconds = clock.elapsed().as_secs_f64();
            match moves {
                Some(moves) => SearchResult {
                    solved: true,
                    objective_value: moves.len() as u32,
                    moves,
                    evaluated_nodes,
                    elapsed_seconds,
                    termination,
                },
                None => SearchResult {
                    solved: false,
                    moves: Vec::new(),
                    objective_value: limits.max_moves_penalty,
                    evaluated_nodes,
                    elapsed_seconds,
                    termination,
                },
            }
        };

    while !open.is_empty() {
        if evaluated_nodes > limits.max_evaluated_nodes {
            return Ok(finish(Termination::NodeLimit, None, evaluated_nodes));
        }
        if clock.elapsed().as_secs_f64() > limits.timeout_seconds {
            return Ok(finish(Termination::Timeout, None, evaluated_nodes));
        }

        let entry = open.pop().expect("open list checked non-empty");
        let current = entry.id;

        if policy == DuplicatePolicy::Strict {
            let state = &tree.node(current).state;
            if closed.contains(state) {
                continue;
            }
            closed.insert(state.clone());
        }

        on_pop(tree.node(current));

        if domain.is_goal(&tree.node(current).state) {
            let moves = tree.reconstruct_path(current).into_iter().map(|(mv, _)| mv).collect();
            return Ok(finish(Termination::Goal, Some(moves), evaluated_nodes));
        }

        let g = tree.node(current).g + 1;
        for (mv, next) in domain.neighbors(&tree.node(current).state) {
            match policy {
                DuplicatePolicy::Paper => {
                    if visited.contains(&next) {
                        continue;
                    }
                    visited.insert(next.clone());
                }
                DuplicatePolicy::Strict => {
                    if closed.contains(&next) {
                        continue;
                    }
                    if best_g.get(&next).is_some_and(|&seen| seen <= g) {
                        continue;
                    }
                    best_g.insert(next.clone(), g);
                }
            }
            evaluated_nodes += 1;
            let h = checked(score(&next))?;
            let tiebreak = domain.tiebreak(&mv, &next);
            let id = tree.push_child(current, mv, next, h);
            let node = tree.node(id);
            open.push(OpenEntry { f: node.f, tiebreak, insertion_index: node.insertion_index, id });
        }
    }

    Ok(finish(Termination::Exhausted, None, evaluated_nodes))
}
