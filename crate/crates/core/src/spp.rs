//! Sliding puzzle: state model, moves, instance generation and the
//! classical lower bounds (misplaced tiles, Manhattan distance, linear
//! conflicts).

use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::rng::SeededStream;
use crate::search::SearchDomain;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum PuzzleError {
    #[error("puzzle side must be at least 2, got {0}")]
    TooSmall(usize),
    #[error("expected {expected} rows of {expected} tiles")]
    Shape { expected: usize },
    #[error("tiles are not a permutation of 0..{0}")]
    NotPermutation(usize),
    #[error("shuffle_moves must be at least 1")]
    NoShuffle,
}

/// An `n × n` grid stored row-major; row 0 is the top row, `0` is the blank.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct PuzzleState {
    n: usize,
    tiles: Vec<u16>,
}

/// Displacement of the blank: `U` moves the blank one row up.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum PuzzleMove {
    U,
    D,
    L,
    R,
}

impl PuzzleMove {
    pub const ALL: [PuzzleMove; 4] = [PuzzleMove::U, PuzzleMove::D, PuzzleMove::L, PuzzleMove::R];

    pub fn inverse(self) -> PuzzleMove {
        match self {
            PuzzleMove::U => PuzzleMove::D,
            PuzzleMove::D => PuzzleMove::U,
            PuzzleMove::L => PuzzleMove::R,
            PuzzleMove::R => PuzzleMove::L,
        }
    }

    fn delta(self) -> (isize, isize) {
        match self {
            PuzzleMove::U => (-1, 0),
            PuzzleMove::D => (1, 0),
            PuzzleMove::L => (0, -1),
            PuzzleMove::R => (0, 1),
        }
    }
}

impl fmt::Display for PuzzleMove {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{self:?}")
    }
}

impl PuzzleState {
    pub fn goal(n: usize) -> Result<Self, PuzzleError> {
        if n < 2 {
            return Err(PuzzleError::TooSmall(n));
        }
        let cells = n * n;
        let tiles = (1..cells as u16).chain(std::iter::once(0)).collect();
        Ok(PuzzleState { n, tiles })
    }

    pub fn from_rows(rows: &[Vec<u16>]) -> Result<Self, PuzzleError> {
        let n = rows.len();
        if n < 2 {
            return Err(PuzzleError::TooSmall(n));
        }
        if rows.iter().any(|r| r.len() != n) {
            return Err(PuzzleError::Shape { expected: n });
        }
        let state = PuzzleState { n, tiles: rows.concat() };
        state.check()?;
        Ok(state)
    }

    fn check(&self) -> Result<(), PuzzleError> {
        let cells = self.n * self.n;
        if self.tiles.len() != cells {
            return Err(PuzzleError::Shape { expected: self.n });
        }
        let mut seen = vec![false; cells];
        for &t in &self.tiles {
            let t = t as usize;
            if t >= cells || seen[t] {
                return Err(PuzzleError::NotPermutation(cells));
            }
            seen[t] = true;
        }
        Ok(())
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn tiles(&self) -> &[u16] {
        &self.tiles
    }

    pub fn rows(&self) -> Vec<Vec<u16>> {
        self.tiles.chunks(self.n).map(<[u16]>::to_vec).collect()
    }

    pub fn at(&self, row: usize, col: usize) -> u16 {
        self.tiles[row * self.n + col]
    }

    pub fn blank(&self) -> (usize, usize) {
        let idx = self.tiles.iter().position(|&t| t == 0).expect("valid puzzle has a blank");
        (idx / self.n, idx % self.n)
    }

    pub fn is_goal(&self) -> bool {
        let last = self.tiles.len() - 1;
        self.tiles[last] == 0 && self.tiles[..last].iter().enumerate().all(|(i, &t)| t as usize == i + 1)
    }

    /// State after sliding the blank by `mv`, or `None` if it leaves the grid.
    pub fn apply(&self, mv: PuzzleMove) -> Option<PuzzleState> {
        let (r, c) = self.blank();
        let (dr, dc) = mv.delta();
        let nr = r.checked_add_signed(dr)?;
        let nc = c.checked_add_signed(dc)?;
        if nr >= self.n || nc >= self.n {
            return None;
        }
        let mut tiles = self.tiles.clone();
        tiles.swap(r * self.n + c, nr * self.n + nc);
        Some(PuzzleState { n: self.n, tiles })
    }

    /// Successors in `U, D, L, R` order.
    pub fn neighbors(&self) -> Vec<(PuzzleMove, PuzzleState)> {
        PuzzleMove::ALL.iter().filter_map(|&mv| self.apply(mv).map(|s| (mv, s))).collect()
    }

    /// Permutation parity test: whether the goal is reachable at all.
    pub fn is_solvable(&self) -> bool {
        let tiles: Vec<u16> = self.tiles.iter().copied().filter(|&t| t != 0).collect();
        let mut inversions = 0usize;
        for i in 0..tiles.len() {
            for j in i + 1..tiles.len() {
                if tiles[i] > tiles[j] {
                    inversions += 1;
                }
            }
        }
        if self.n % 2 == 1 {
            inversions.is_multiple_of(2)
        } else {
            let blank_row_from_bottom = self.n - self.blank().0;
            (inversions + blank_row_from_bottom) % 2 == 1
        }
    }
}

pub fn goal_cell(tile: u16, n: usize) -> (usize, usize) {
    let idx = tile as usize - 1;
    (idx / n, idx % n)
}

/// Non-blank tiles away from their goal cell.
pub fn misplaced_tiles(state: &PuzzleState) -> u32 {
    state.tiles.iter().enumerate().filter(|&(i, &t)| t != 0 && t as usize != i + 1).count() as u32
}

pub fn manhattan(state: &PuzzleState) -> u32 {
    let n = state.n;
    state
        .tiles
        .iter()
        .enumerate()
        .filter(|&(_, &t)| t != 0)
        .map(|(i, &t)| {
            let (gr, gc) = goal_cell(t, n);
            ((i / n).abs_diff(gr) + (i % n).abs_diff(gc)) as u32
        })
        .sum()
}

/// Tiles that must leave one line, given `(tile, position, goal position)`
/// for every tile already in its goal line. Repeatedly drops the tile in
/// the most conflicts, lowest tile number on ties.
fn line_removals(mut line: Vec<(u16, usize, usize)>) -> u32 {
    let mut removed = 0;
    loop {
        let mut worst: Option<(usize, usize, u16)> = None;
        for (a, &(tile_a, pos_a, goal_a)) in line.iter().enumerate() {
            let conflicts = line
                .iter()
                .filter(|&&(_, pos_b, goal_b)| (pos_a < pos_b && goal_a > goal_b) || (pos_a > pos_b && goal_a < goal_b))
                .count();
            if conflicts == 0 {
                continue;
            }
            let better = match worst {
                None => true,
                Some((_, c, t)) => conflicts > c || (conflicts == c && tile_a < t),
            };
            if better {
                worst = Some((a, conflicts, tile_a));
            }
        }
        match worst {
            Some((idx, _, _)) => {
                line.swap_remove(idx);
                removed += 1;
            }
            None => return removed,
        }
    }
}

/// Manhattan distance plus two moves for every tile that has to leave its
/// row or column to let a reversed partner pass.
pub fn linear_conflict(state: &PuzzleState) -> u32 {
    let n = state.n;
    let mut extra = 0;
    for line in 0..n {
        let mut row = Vec::new();
        let mut col = Vec::new();
        for k in 0..n {
            let t = state.at(line, k);
            if t != 0 {
                let (gr, gc) = goal_cell(t, n);
                if gr == line {
                    row.push((t, k, gc));
                }
            }
            let t = state.at(k, line);
            if t != 0 {
                let (gr, gc) = goal_cell(t, n);
                if gc == line {
                    col.push((t, k, gr));
                }
            }
        }
        extra += line_removals(row) + line_removals(col);
    }
    manhattan(state) + 2 * extra
}

/// Random walk of `shuffle_moves` legal blank moves from the goal.
///
/// The immediate inverse of the previous move is excluded unless
/// `allow_inversions` is set. If the walk ends on the goal it keeps
/// walking until it leaves it.
pub fn generate(n: usize, shuffle_moves: u32, seed: u64, allow_inversions: bool) -> Result<PuzzleState, PuzzleError> {
    if shuffle_moves == 0 {
        return Err(PuzzleError::NoShuffle);
    }
    let mut state = PuzzleState::goal(n)?;
    let mut rng = SeededStream::new(seed);
    let mut previous: Option<PuzzleMove> = None;
    let mut steps = 0u32;
    while steps < shuffle_moves || state.is_goal() {
        let options: Vec<(PuzzleMove, PuzzleState)> = state
            .neighbors()
            .into_iter()
            .filter(|(mv, _)| allow_inversions || previous != Some(mv.inverse()))
            .collect();
        let pick = rng.pick(options.len());
        let (mv, next) = options.into_iter().nth(pick).expect("index within options");
        state = next;
        previous = Some(mv);
        steps += 1;
    }
    Ok(state)
}

/// [`SearchDomain`] adapter for sliding puzzles.
#[derive(Debug, Clone, Copy, Default)]
pub struct SlidingPuzzle;

impl SearchDomain for SlidingPuzzle {
    type State = PuzzleState;
    type Move = PuzzleMove;

    fn validate(&self, state: &PuzzleState) -> Result<(), String> {
        state.check().map_err(|e| e.to_string())
    }

    fn is_goal(&self, state: &PuzzleState) -> bool {
        state.is_goal()
    }

    fn neighbors(&self, state: &PuzzleState) -> Vec<(PuzzleMove, PuzzleState)> {
        state.neighbors()
    }
}
