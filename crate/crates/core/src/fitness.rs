//! Fitness of a heuristic: mean relative deviation of the achieved move
//! counts from the per-instance lower bounds.

use num_traits::{FromPrimitive, Num};
use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Outcome of one heuristic on one instance.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InstanceResult {
    pub instance_seed: u64,
    /// Moves of the found solution, or the penalty when unsolved.
    pub moves: u32,
    pub lower_bound: u32,
    pub solved: bool,
    pub evaluated_nodes: u64,
    pub elapsed_seconds: f64,
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum FitnessError {
    #[error("fitness needs at least one instance result")]
    Empty,
}

/// `(1/|I|) Σ (m_i − lb_i) / lb_i`, summed in list order.
///
/// A zero lower bound divides by one instead, so the term is the move
/// count itself. Generic over the scalar so the same expression can be
/// evaluated exactly over rationals.
pub fn fitness<T>(results: &[InstanceResult]) -> Result<T, FitnessError>
where
    T: Num + FromPrimitive + Copy,
{
    if results.is_empty() {
        return Err(FitnessError::Empty);
    }
    let lift = |v: u32| T::from_u32(v).expect("u32 lifts into the fitness scalar");
    let mut total = T::zero();
    for r in results {
        let lb = lift(r.lower_bound.max(1));
        total = total + (lift(r.moves) - lift(r.lower_bound)) / lb;
    }
    Ok(total / T::from_usize(results.len()).expect("instance count lifts"))
}

/// Summary in the benchmark-table convention: fitness and time are
/// averaged over solved instances only.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SolvedSummary {
    pub instances: usize,
    pub solved: usize,
    pub mean_fitness_solved: Option<f64>,
    pub mean_seconds_solved: Option<f64>,
}

pub fn solved_summary(results: &[InstanceResult]) -> SolvedSummary {
    let solved: Vec<InstanceResult> = results.iter().filter(|r| r.solved).cloned().collect();
    let mean_seconds_solved = if solved.is_empty() {
        None
    } else {
        Some(solved.iter().map(|r| r.elapsed_seconds).sum::<f64>() / solved.len() as f64)
    };
    SolvedSummary {
        instances: results.len(),
        solved: solved.len(),
        mean_fitness_solved: fitness::<f64>(&solved).ok(),
        mean_seconds_solved,
    }
}
