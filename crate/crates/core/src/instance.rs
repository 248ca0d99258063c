//! Problem instances, their on-disk records and per-problem parameters.

use std::fmt;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::spp::{self, PuzzleError, PuzzleState};
use crate::upmp::{self, WarehouseError, WarehouseState};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Problem {
    Spp,
    Upmp,
}

impl Problem {
    pub const ALL: [Problem; 2] = [Problem::Spp, Problem::Upmp];

    pub fn as_str(self) -> &'static str {
        match self {
            Problem::Spp => "spp",
            Problem::Upmp => "upmp",
        }
    }
}

impl fmt::Display for Problem {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl std::str::FromStr for Problem {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "spp" => Ok(Problem::Spp),
            "upmp" => Ok(Problem::Upmp),
            other => Err(format!("unknown problem `{other}` (expected spp|upmp)")),
        }
    }
}

#[derive(Debug, Error)]
pub enum InstanceError {
    #[error(transparent)]
    Puzzle(#[from] PuzzleError),
    #[error(transparent)]
    Warehouse(#[from] WarehouseError),
    #[error("{path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },
    #[error("{path}: {source}")]
    Parse { path: PathBuf, source: serde_json::Error },
}

/// One instance file. Field names and order are fixed.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "problem", rename_all = "lowercase")]
pub enum InstanceRecord {
    Spp { n: usize, seed: u64, shuffle_moves: u32, tiles: Vec<Vec<u16>> },
    Upmp { seed: u64, depth: usize, num_classes: u8, lanes: Vec<Vec<u8>> },
}

/// A parsed, validated instance.
#[derive(Debug, Clone, PartialEq)]
pub enum Instance {
    Spp { seed: u64, state: PuzzleState },
    Upmp { seed: u64, state: WarehouseState },
}

impl Instance {
    pub fn seed(&self) -> u64 {
        match self {
            Instance::Spp { seed, .. } | Instance::Upmp { seed, .. } => *seed,
        }
    }

    pub fn problem(&self) -> Problem {
        match self {
            Instance::Spp { .. } => Problem::Spp,
            Instance::Upmp { .. } => Problem::Upmp,
        }
    }

    /// Lower bound used by the fitness: misplaced tiles (SPP) or blocking
    /// loads (UPMP).
    pub fn lower_bound(&self) -> u32 {
        match self {
            Instance::Spp { state, .. } => spp::misplaced_tiles(state),
            Instance::Upmp { state, .. } => upmp::blocking_count(state),
        }
    }

    /// The `state` argument handed to a heuristic: rows or lanes.
    pub fn state_rows(&self) -> Vec<Vec<u32>> {
        match self {
            Instance::Spp { state, .. } => {
                state.rows().into_iter().map(|r| r.into_iter().map(u32::from).collect()).collect()
            }
            Instance::Upmp { state, .. } => {
                state.lanes().iter().map(|l| l.iter().map(|&v| u32::from(v)).collect()).collect()
            }
        }
    }

    pub fn to_record(&self, params: Option<&InstanceParams>) -> InstanceRecord {
        match self {
            Instance::Spp { seed, state } => InstanceRecord::Spp {
                n: state.n(),
                seed: *seed,
                shuffle_moves: match params {
                    Some(InstanceParams::Spp { shuffle_moves, .. }) => *shuffle_moves,
                    _ => 0,
                },
                tiles: state.rows(),
            },
            Instance::Upmp { seed, state } => InstanceRecord::Upmp {
                seed: *seed,
                depth: state.depth(),
                num_classes: state.num_classes(),
                lanes: state.lanes().to_vec(),
            },
        }
    }

    pub fn from_record(record: &InstanceRecord) -> Result<Self, InstanceError> {
        Ok(match record {
            InstanceRecord::Spp { n, seed, tiles, .. } => {
                let state = PuzzleState::from_rows(tiles)?;
                if state.n() != *n {
                    return Err(PuzzleError::Shape { expected: *n }.into());
                }
                Instance::Spp { seed: *seed, state }
            }
            InstanceRecord::Upmp { seed, depth, num_classes, lanes } => {
                Instance::Upmp { seed: *seed, state: WarehouseState::new(lanes.clone(), *depth, *num_classes)? }
            }
        })
    }
}

/// Generator settings for one problem class.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "problem", rename_all = "lowercase")]
pub enum InstanceParams {
    Spp {
        n: usize,
        shuffle_moves: u32,
        #[serde(default)]
        allow_inversions: bool,
    },
    Upmp {
        num_lanes: usize,
        depth: usize,
        num_classes: u8,
        fill_fraction: f64,
    },
}

impl InstanceParams {
    /// 20 × 20 puzzles shuffled by 200 moves.
    pub fn spp_default() -> Self {
        InstanceParams::Spp { n: 20, shuffle_moves: 200, allow_inversions: false }
    }

    /// 5 × 5 bay, five classes, 60 % full.
    pub fn upmp_default() -> Self {
        InstanceParams::Upmp { num_lanes: 5, depth: 5, num_classes: 5, fill_fraction: 0.6 }
    }

    pub fn default_for(problem: Problem) -> Self {
        match problem {
            Problem::Spp => Self::spp_default(),
            Problem::Upmp => Self::upmp_default(),
        }
    }

    pub fn problem(&self) -> Problem {
        match self {
            InstanceParams::Spp { .. } => Problem::Spp,
            InstanceParams::Upmp { .. } => Problem::Upmp,
        }
    }

    pub fn generate(&self, seed: u64) -> Result<Instance, InstanceError> {
        Ok(match *self {
            InstanceParams::Spp { n, shuffle_moves, allow_inversions } => {
                Instance::Spp { seed, state: spp::generate(n, shuffle_moves, seed, allow_inversions)? }
            }
            InstanceParams::Upmp { num_lanes, depth, num_classes, fill_fraction } => {
                Instance::Upmp { seed, state: upmp::generate(num_lanes, depth, num_classes, fill_fraction, seed)? }
            }
        })
    }

    /// File name for the instance with `seed`; encodes every parameter.
    pub fn file_name(&self, seed: u64) -> String {
        match *self {
            InstanceParams::Spp { n, shuffle_moves, allow_inversions } => {
                let inv = if allow_inversions { "-inv" } else { "" };
                format!("spp-n{n}-m{shuffle_moves}{inv}-seed{seed}.json")
            }
            InstanceParams::Upmp { num_lanes, depth, num_classes, fill_fraction } => {
                format!("upmp-{num_lanes}x{depth}-k{num_classes}-f{fill_fraction:.2}-seed{seed}.json")
            }
        }
    }
}

pub fn render_record(record: &InstanceRecord) -> String {
    let mut text = serde_json::to_string_pretty(record).expect("instance records serialize");
    text.push('\n');
    text
}

pub fn write_instance(path: &Path, record: &InstanceRecord) -> Result<(), InstanceError> {
    std::fs::write(path, render_record(record)).map_err(|source| InstanceError::Io { path: path.into(), source })
}

pub fn read_instance(path: &Path) -> Result<Instance, InstanceError> {
    let text = std::fs::read_to_string(path).map_err(|source| InstanceError::Io { path: path.into(), source })?;
    let record: InstanceRecord =
        serde_json::from_str(&text).map_err(|source| InstanceError::Parse { path: path.into(), source })?;
    Instance::from_record(&record)
}

/// Generate one file per seed into `out_dir`; returns the written paths.
pub fn write_instances(params: &InstanceParams, seeds: &[u64], out_dir: &Path) -> Result<Vec<PathBuf>, InstanceError> {
    std::fs::create_dir_all(out_dir).map_err(|source| InstanceError::Io { path: out_dir.into(), source })?;
    seeds
        .iter()
        .map(|&seed| {
            let instance = params.generate(seed)?;
            let path = out_dir.join(params.file_name(seed));
            write_instance(&path, &instance.to_record(Some(params)))?;
            Ok(path)
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn key_order(text: &str) -> Vec<String> {
        let re = regex::Regex::new(r#""([a-z_]+)":"#).unwrap();
        re.captures_iter(text).map(|c| c[1].to_string()).collect()
    }

    #[test]
    fn record_field_names() {
        let params = InstanceParams::Spp { n: 2, shuffle_moves: 3, allow_inversions: false };
        let inst = params.generate(4).unwrap();
        let text = render_record(&inst.to_record(Some(&params)));
        assert_eq!(key_order(&text), ["problem", "n", "seed", "shuffle_moves", "tiles"]);
        assert!(text.contains(r#""problem": "spp""#));

        let params = InstanceParams::upmp_default();
        let text = render_record(&params.generate(0).unwrap().to_record(Some(&params)));
        assert_eq!(key_order(&text), ["problem", "seed", "depth", "num_classes", "lanes"]);
    }

    #[test]
    fn pretty_output_keeps_declared_order() {
        let text = render_record(&InstanceRecord::Upmp { seed: 1, depth: 2, num_classes: 3, lanes: vec![vec![0, 1]] });
        let p = text.find("\"problem\"").unwrap();
        let s = text.find("\"seed\"").unwrap();
        let l = text.find("\"lanes\"").unwrap();
        assert!(p < s && s < l);
    }

    #[test]
    fn files_round_trip_and_reject_garbage() {
        let dir = tempfile::tempdir().unwrap();
        let params = InstanceParams::Upmp { num_lanes: 3, depth: 3, num_classes: 3, fill_fraction: 0.5 };
        let paths = write_instances(&params, &[0, 1, 2], dir.path()).unwrap();
        assert_eq!(paths.len(), 3);
        for (seed, path) in paths.iter().enumerate() {
            assert_eq!(read_instance(path).unwrap(), params.generate(seed as u64).unwrap());
        }
        let bad = dir.path().join("bad.json");
        std::fs::write(&bad, r#"{"problem":"upmp","seed":0,"depth":2,"num_classes":2,"lanes":[[1,0]]}"#).unwrap();
        assert!(matches!(read_instance(&bad), Err(InstanceError::Warehouse(_))));
        std::fs::write(&bad, "not json").unwrap();
        assert!(matches!(read_instance(&bad), Err(InstanceError::Parse { .. })));
        assert!(matches!(read_instance(&dir.path().join("missing.json")), Err(InstanceError::Io { .. })));
    }

    #[test]
    fn lower_bounds_are_positive_for_generated_instances() {
        for seed in 0..10 {
            assert!(InstanceParams::upmp_default().generate(seed).unwrap().lower_bound() >= 1);
            let p = InstanceParams::Spp { n: 4, shuffle_moves: 20, allow_inversions: false };
            assert!(p.generate(seed).unwrap().lower_bound() >= 1);
        }
    }
}
