//! Unit-load pre-marshalling in a single bay with one access direction.
//!
//! A bay is a list of lanes. Slot 0 of a lane is the access side; empty
//! slots (`0`) always sit in front of the stored loads. Loads carry a
//! priority class `1..=K`, where 1 is retrieved first.

use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::rng::SeededStream;
use crate::search::SearchDomain;

#[derive(Debug, Error, PartialEq)]
pub enum WarehouseError {
    #[error("depth must be at least 1")]
    ZeroDepth,
    #[error("num_classes must be at least 1")]
    NoClasses,
    #[error("lane {lane} has {len} slots, expected {depth}")]
    LaneLength { lane: usize, len: usize, depth: usize },
    #[error("lane {lane} holds class {value}, outside 0..={max}")]
    ClassRange { lane: usize, value: u8, max: u8 },
    #[error("lane {lane} has an empty slot behind a load")]
    ZeroPrefix { lane: usize },
    #[error("fill_fraction must lie strictly between 0 and 1, got {0}")]
    FillFraction(f64),
    #[error("{loads} loads do not fit {slots} slots with at least one empty slot")]
    LoadCount { loads: usize, slots: usize },
    #[error("no non-goal layout found after {0} attempts")]
    AlwaysSorted(usize),
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct WarehouseState {
    lanes: Vec<Vec<u8>>,
    depth: usize,
    num_classes: u8,
}

/// Relocation of the outermost load of `from_lane` into `to_lane`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct LaneMove {
    pub from_lane: usize,
    pub to_lane: usize,
}

impl fmt::Display for LaneMove {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}->{}", self.from_lane, self.to_lane)
    }
}

fn check_lane(lane_idx: usize, lane: &[u8], depth: usize, num_classes: u8) -> Result<(), WarehouseError> {
    if lane.len() != depth {
        return Err(WarehouseError::LaneLength { lane: lane_idx, len: lane.len(), depth });
    }
    if let Some(&value) = lane.iter().find(|&&v| v > num_classes) {
        return Err(WarehouseError::ClassRange { lane: lane_idx, value, max: num_classes });
    }
    let first_load = lane.iter().position(|&v| v != 0).unwrap_or(depth);
    if lane[first_load..].contains(&0) {
        return Err(WarehouseError::ZeroPrefix { lane: lane_idx });
    }
    Ok(())
}

impl WarehouseState {
    pub fn new(lanes: Vec<Vec<u8>>, depth: usize, num_classes: u8) -> Result<Self, WarehouseError> {
        let state = WarehouseState { lanes, depth, num_classes };
        state.check()?;
        Ok(state)
    }

    /// Infers depth from the first lane and classes from the largest value.
    pub fn from_lanes(lanes: Vec<Vec<u8>>) -> Result<Self, WarehouseError> {
        let depth = lanes.first().map_or(1, Vec::len);
        let num_classes = lanes.iter().flatten().copied().max().unwrap_or(0).max(1);
        Self::new(lanes, depth, num_classes)
    }

    fn check(&self) -> Result<(), WarehouseError> {
        if self.depth == 0 {
            return Err(WarehouseError::ZeroDepth);
        }
        if self.num_classes == 0 {
            return Err(WarehouseError::NoClasses);
        }
        for (i, lane) in self.lanes.iter().enumerate() {
            check_lane(i, lane, self.depth, self.num_classes)?;
        }
        Ok(())
    }

    pub fn lanes(&self) -> &[Vec<u8>] {
        &self.lanes
    }

    pub fn depth(&self) -> usize {
        self.depth
    }

    pub fn num_classes(&self) -> u8 {
        self.num_classes
    }

    pub fn load_count(&self) -> usize {
        self.lanes.iter().flatten().filter(|&&v| v != 0).count()
    }

    /// Every lane non-decreasing from the access side inwards.
    pub fn is_goal(&self) -> bool {
        self.lanes.iter().all(|lane| lane.windows(2).all(|w| w[0] <= w[1]))
    }

    /// State after `mv`, or `None` if the source is empty or the target full.
    pub fn apply(&self, mv: LaneMove) -> Option<WarehouseState> {
        if mv.from_lane == mv.to_lane || mv.from_lane >= self.lanes.len() || mv.to_lane >= self.lanes.len() {
            return None;
        }
        let from = self.lanes[mv.from_lane].iter().position(|&v| v != 0)?;
        let empty_in_target = self.lanes[mv.to_lane].iter().take_while(|&&v| v == 0).count();
        if empty_in_target == 0 {
            return None;
        }
        let mut lanes = self.lanes.clone();
        let load = lanes[mv.from_lane][from];
        lanes[mv.from_lane][from] = 0;
        lanes[mv.to_lane][empty_in_target - 1] = load;
        Some(WarehouseState { lanes, depth: self.depth, num_classes: self.num_classes })
    }

    /// One successor per (loaded lane, lane with an empty slot) pair,
    /// source-major.
    pub fn neighbors(&self) -> Vec<(LaneMove, WarehouseState)> {
        let loaded: Vec<usize> = (0..self.lanes.len()).filter(|&i| self.lanes[i].iter().any(|&v| v != 0)).collect();
        let with_slot: Vec<usize> = (0..self.lanes.len()).filter(|&i| self.lanes[i].contains(&0)).collect();
        let mut out = Vec::with_capacity(loaded.len() * with_slot.len());
        for &from_lane in &loaded {
            for &to_lane in &with_slot {
                if from_lane == to_lane {
                    continue;
                }
                let mv = LaneMove { from_lane, to_lane };
                out.push((mv, self.apply(mv).expect("source loaded and target has a slot")));
            }
        }
        out
    }
}

/// Loads that sit in front of a strictly higher-priority load of the same
/// lane. Each of them has to move at least once.
pub fn blocking_count(state: &WarehouseState) -> u32 {
    state.lanes.iter().map(|lane| lane_blocking(lane)).sum()
}

/// Blocking loads in one lane, access side first.
pub fn lane_blocking(lane: &[u8]) -> u32 {
    // scan from the innermost slot keeping the best priority seen behind
    let mut best_behind = u8::MAX;
    let mut blocking = 0;
    for &v in lane.iter().rev() {
        if v == 0 {
            continue;
        }
        if v > best_behind {
            blocking += 1;
        }
        best_behind = best_behind.min(v);
    }
    blocking
}

/// Random bay with `round(num_lanes · depth · fill_fraction)` loads.
///
/// Lane assignment shuffles one token per slot and keeps the first
/// `loads` tokens; classes are then drawn uniformly in token order. The
/// stream keeps advancing until the layout is not already sorted.
pub fn generate(
    num_lanes: usize,
    depth: usize,
    num_classes: u8,
    fill_fraction: f64,
    seed: u64,
) -> Result<WarehouseState, WarehouseError> {
    const MAX_ATTEMPTS: usize = 10_000;
    if depth == 0 {
        return Err(WarehouseError::ZeroDepth);
    }
    if num_classes == 0 {
        return Err(WarehouseError::NoClasses);
    }
    if !(fill_fraction > 0.0 && fill_fraction < 1.0) {
        return Err(WarehouseError::FillFraction(fill_fraction));
    }
    let slots = num_lanes * depth;
    let loads = (slots as f64 * fill_fraction).round() as usize;
    if loads == 0 || loads >= slots {
        return Err(WarehouseError::LoadCount { loads, slots });
    }

    let mut rng = SeededStream::new(seed);
    for _ in 0..MAX_ATTEMPTS {
        let mut tokens: Vec<usize> = (0..num_lanes).flat_map(|lane| std::iter::repeat_n(lane, depth)).collect();
        rng.shuffle(&mut tokens);
        let mut per_lane: Vec<Vec<u8>> = vec![Vec::new(); num_lanes];
        for &lane in &tokens[..loads] {
            per_lane[lane].push(rng.pick(num_classes as usize) as u8 + 1);
        }
        let lanes = per_lane
            .into_iter()
            .map(|stored| {
                let mut lane = vec![0u8; depth - stored.len()];
                lane.extend(stored);
                lane
            })
            .collect();
        let state = WarehouseState { lanes, depth, num_classes };
        if !state.is_goal() {
            return Ok(state);
        }
    }
    Err(WarehouseError::AlwaysSorted(MAX_ATTEMPTS))
}

/// [`SearchDomain`] adapter for pre-marshalling.
///
/// The open-list tiebreak is constant: the travel-distance tiebreak of
/// multi-bay layouts has no meaning in a single bay.
#[derive(Debug, Clone, Copy, Default)]
pub struct Premarshalling;

impl SearchDomain for Premarshalling {
    type State = WarehouseState;
    type Move = LaneMove;

    fn validate(&self, state: &WarehouseState) -> Result<(), String> {
        state.check().map_err(|e| e.to_string())
    }

    fn is_goal(&self, state: &WarehouseState) -> bool {
        state.is_goal()
    }

    fn neighbors(&self, state: &WarehouseState) -> Vec<(LaneMove, WarehouseState)> {
        state.neighbors()
    }
}
