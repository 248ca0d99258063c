//! Reference scorers, each available as native code and as equivalent
//! `score_state` source text.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::instance::{Instance, Problem};
use crate::spp::{self, PuzzleState};
use crate::upmp::{self, WarehouseState};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ScorerKind {
    Zero,
    Misplaced,
    Manhattan,
    LinearConflict,
    BlockingCount,
    UnsortedLanes,
    BlockingPlusUnsorted,
}

impl ScorerKind {
    pub const ALL: [ScorerKind; 7] = [
        ScorerKind::Zero,
        ScorerKind::Misplaced,
        ScorerKind::Manhattan,
        ScorerKind::LinearConflict,
        ScorerKind::BlockingCount,
        ScorerKind::UnsortedLanes,
        ScorerKind::BlockingPlusUnsorted,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            ScorerKind::Zero => "zero",
            ScorerKind::Misplaced => "misplaced",
            ScorerKind::Manhattan => "manhattan",
            ScorerKind::LinearConflict => "linear_conflict",
            ScorerKind::BlockingCount => "blocking_count",
            ScorerKind::UnsortedLanes => "unsorted_lanes",
            ScorerKind::BlockingPlusUnsorted => "blocking_plus_unsorted",
        }
    }

    /// Problems the scorer understands. `Zero` works for both.
    pub fn supports(self, problem: Problem) -> bool {
        match self {
            ScorerKind::Zero => true,
            ScorerKind::Misplaced | ScorerKind::Manhattan | ScorerKind::LinearConflict => problem == Problem::Spp,
            ScorerKind::BlockingCount | ScorerKind::UnsortedLanes | ScorerKind::BlockingPlusUnsorted => {
                problem == Problem::Upmp
            }
        }
    }
}

/// A reference scorer, optionally scaled by an integer weight.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct BuiltinScorer {
    pub kind: ScorerKind,
    pub weight: u32,
}

/// Largest weight in [`BuiltinScorer::catalog`].
pub const MAX_CATALOG_WEIGHT: u32 = 5;

impl BuiltinScorer {
    pub fn new(kind: ScorerKind) -> Self {
        BuiltinScorer { kind, weight: 1 }
    }

    pub fn weighted(kind: ScorerKind, weight: u32) -> Self {
        BuiltinScorer { kind, weight }
    }

    /// Every scorer applicable to `problem`, weights 1 to
    /// [`MAX_CATALOG_WEIGHT`] (`Zero` only once).
    pub fn catalog(problem: Problem) -> Vec<BuiltinScorer> {
        let mut out = Vec::new();
        for kind in ScorerKind::ALL.into_iter().filter(|k| k.supports(problem)) {
            let top = if kind == ScorerKind::Zero { 1 } else { MAX_CATALOG_WEIGHT };
            out.extend((1..=top).map(|w| BuiltinScorer::weighted(kind, w)));
        }
        out
    }

    pub fn name(&self) -> String {
        if self.weight == 1 {
            self.kind.as_str().to_string()
        } else {
            format!("{}_x{}", self.kind.as_str(), self.weight)
        }
    }

    /// Inverse of [`BuiltinScorer::name`].
    pub fn parse(name: &str) -> Option<Self> {
        let (base, weight) = match name.rsplit_once("_x") {
            Some((b, w)) if !w.is_empty() && w.bytes().all(|c| c.is_ascii_digit()) => (b, w.parse().ok()?),
            _ => (name, 1),
        };
        if weight == 0 {
            return None;
        }
        let kind = ScorerKind::ALL.into_iter().find(|k| k.as_str() == base)?;
        Some(BuiltinScorer { kind, weight })
    }

    pub fn supports(&self, problem: Problem) -> bool {
        self.kind.supports(problem)
    }

    pub fn score_puzzle(&self, state: &PuzzleState) -> f64 {
        let raw = match self.kind {
            ScorerKind::Zero => 0,
            ScorerKind::Misplaced => spp::misplaced_tiles(state),
            ScorerKind::Manhattan => spp::manhattan(state),
            ScorerKind::LinearConflict => spp::linear_conflict(state),
            other => panic!("{} does not score sliding puzzles", other.as_str()),
        };
        f64::from(raw) * f64::from(self.weight)
    }

    pub fn score_warehouse(&self, state: &WarehouseState) -> f64 {
        let raw = match self.kind {
            ScorerKind::Zero => 0,
            ScorerKind::BlockingCount => upmp::blocking_count(state),
            ScorerKind::UnsortedLanes => unsorted_lanes(state),
            ScorerKind::BlockingPlusUnsorted => upmp::blocking_count(state) + unsorted_lanes(state),
            other => panic!("{} does not score warehouse bays", other.as_str()),
        };
        f64::from(raw) * f64::from(self.weight)
    }

    pub fn score_instance(&self, instance: &Instance) -> f64 {
        match instance {
            Instance::Spp { state, .. } => self.score_puzzle(state),
            Instance::Upmp { state, .. } => self.score_warehouse(state),
        }
    }

    /// Equivalent `score_state` program text.
    pub fn source(&self) -> String {
        let body = match self.kind {
            ScorerKind::Zero => ZERO_BODY,
            ScorerKind::Misplaced => MISPLACED_BODY,
            ScorerKind::Manhattan => MANHATTAN_BODY,
            ScorerKind::LinearConflict => LINEAR_CONFLICT_BODY,
            ScorerKind::BlockingCount => BLOCKING_BODY,
            ScorerKind::UnsortedLanes => UNSORTED_BODY,
            ScorerKind::BlockingPlusUnsorted => BLOCKING_PLUS_UNSORTED_BODY,
        };
        format!("def score_state(state):\n{body}    return {} * total\n", self.weight)
    }
}

impl fmt::Display for BuiltinScorer {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.name())
    }
}

/// Lanes holding at least one blocking load.
pub fn unsorted_lanes(state: &WarehouseState) -> u32 {
    state.lanes().iter().filter(|lane| upmp::lane_blocking(lane) > 0).count() as u32
}

const ZERO_BODY: &str = "    total = 0\n";

const MISPLACED_BODY: &str = "    n = len(state)
    total = 0
    for r in range(n):
        for c in range(n):
            t = state[r][c]
            if t != 0 and t != r * n + c + 1:
                total += 1
";

const MANHATTAN_BODY: &str = "    n = len(state)
    total = 0
    for r in range(n):
        for c in range(n):
            t = state[r][c]
            if t != 0:
                total += abs(r - (t - 1) // n) + abs(c - (t - 1) % n)
";

const LINEAR_CONFLICT_BODY: &str = "    n = len(state)
    total = 0
    for r in range(n):
        for c in range(n):
            t = state[r][c]
            if t != 0:
                total += abs(r - (t - 1) // n) + abs(c - (t - 1) % n)
    lines = []
    for k in range(n):
        row = []
        col = []
        for j in range(n):
            t = state[k][j]
            if t != 0 and (t - 1) // n == k:
                row.append((t, j, (t - 1) % n))
            t = state[j][k]
            if t != 0 and (t - 1) % n == k:
                col.append((t, j, (t - 1) // n))
        lines.append(row)
        lines.append(col)
    for line in lines:
        for _ in range(len(line)):
            worst = None
            for a in line:
                conflicts = 0
                for b in line:
                    if (a[1] < b[1] and a[2] > b[2]) or (a[1] > b[1] and a[2] < b[2]):
                        conflicts += 1
                if conflicts > 0 and (worst is None or conflicts > worst[0] or (conflicts == worst[0] and a[0] < worst[1][0])):
                    worst = (conflicts, a)
            if worst is None:
                break
            line.remove(worst[1])
            total += 2
";

const BLOCKING_BODY: &str = "    total = 0
    for lane in state:
        best = None
        for v in reversed(lane):
            if v == 0:
                continue
            if best is not None and v > best:
                total += 1
            if best is None or v < best:
                best = v
";

const UNSORTED_BODY: &str = "    total = 0
    for lane in state:
        best = None
        blocked = False
        for v in reversed(lane):
            if v == 0:
                continue
            if best is not None and v > best:
                blocked = True
            if best is None or v < best:
                best = v
        if blocked:
            total += 1
";

const BLOCKING_PLUS_UNSORTED_BODY: &str = "    total = 0
    for lane in state:
        best = None
        blocked = False
        for v in reversed(lane):
            if v == 0:
                continue
            if best is not None and v > best:
                total += 1
                blocked = True
            if best is None or v < best:
                best = v
        if blocked:
            total += 1
";
