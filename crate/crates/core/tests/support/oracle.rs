//! Breadth-first reference solvers with their own move generation.

#![allow(dead_code)]

use std::collections::{HashMap, VecDeque};

/// Distance to the goal for every puzzle state reachable from it, keyed by
/// row-major tiles with `0` as the blank.
pub fn puzzle_distances(n: usize) -> HashMap<Vec<u16>, u32> {
    let mut goal: Vec<u16> = (1..(n * n) as u16).collect();
    goal.push(0);
    let mut dist = HashMap::from([(goal.clone(), 0u32)]);
    let mut queue = VecDeque::from([goal]);
    while let Some(tiles) = queue.pop_front() {
        let d = dist[&tiles];
        let b = tiles.iter().position(|&t| t == 0).unwrap();
        let (r, c) = (b / n, b % n);
        let mut targets = Vec::new();
        if r > 0 {
            targets.push(b - n);
        }
        if r + 1 < n {
            targets.push(b + n);
        }
        if c > 0 {
            targets.push(b - 1);
        }
        if c + 1 < n {
            targets.push(b + 1);
        }
        for t in targets {
            let mut next = tiles.clone();
            next.swap(b, t);
            if !dist.contains_key(&next) {
                dist.insert(next.clone(), d + 1);
                queue.push_back(next);
            }
        }
    }
    dist
}

fn sorted(lanes: &[Vec<u8>]) -> bool {
    lanes.iter().all(|l| l.iter().zip(l.iter().skip(1)).all(|(a, b)| a <= b))
}

fn relocations(lanes: &[Vec<u8>]) -> Vec<Vec<Vec<u8>>> {
    let mut out = Vec::new();
    for from in 0..lanes.len() {
        let Some(top) = lanes[from].iter().position(|&v| v != 0) else { continue };
        for to in 0..lanes.len() {
            let free = lanes[to].iter().filter(|&&v| v == 0).count();
            if to == from || free == 0 {
                continue;
            }
            let mut next = lanes.to_vec();
            let load = next[from][top];
            next[from][top] = 0;
            next[to][free - 1] = load;
            out.push(next);
        }
    }
    out
}

/// Every bay layout with `lanes` lanes of `depth` slots and classes
/// `1..=classes`, loads packed towards the inner end.
pub fn all_bays(lanes: usize, depth: usize, classes: u8) -> Vec<Vec<Vec<u8>>> {
    let mut lane_options = Vec::new();
    for loads in 0..=depth {
        let mut filled: Vec<Vec<u8>> = vec![vec![]];
        for _ in 0..loads {
            filled =
                filled.into_iter().flat_map(|p| (1..=classes).map(move |c| [p.clone(), vec![c]].concat())).collect();
        }
        for f in filled {
            lane_options.push([vec![0; depth - loads], f].concat());
        }
    }
    let mut bays: Vec<Vec<Vec<u8>>> = vec![vec![]];
    for _ in 0..lanes {
        bays = bays
            .into_iter()
            .flat_map(|b| lane_options.iter().map(move |l| [b.clone(), vec![l.clone()]].concat()))
            .collect();
    }
    bays
}

/// Fewest relocations to a sorted bay for every layout in `bays`, by a
/// multi-source search from all sorted layouts. Relocations are
/// reversible, so distances from the goals are distances to them.
pub fn bay_distances(bays: &[Vec<Vec<u8>>]) -> HashMap<Vec<Vec<u8>>, u32> {
    let mut dist = HashMap::new();
    let mut queue = VecDeque::new();
    for b in bays.iter().filter(|b| sorted(b)) {
        dist.insert(b.clone(), 0u32);
        queue.push_back(b.clone());
    }
    while let Some(b) = queue.pop_front() {
        let d = dist[&b];
        for next in relocations(&b) {
            if !dist.contains_key(&next) {
                dist.insert(next.clone(), d + 1);
                queue.push_back(next);
            }
        }
    }
    dist
}

pub fn bay_is_sorted(lanes: &[Vec<u8>]) -> bool {
    sorted(lanes)
}

/// Fewest relocations from one layout, searched forwards.
pub fn bay_distance(start: &[Vec<u8>]) -> Option<u32> {
    let mut dist = HashMap::from([(start.to_vec(), 0u32)]);
    let mut queue = VecDeque::from([start.to_vec()]);
    while let Some(b) = queue.pop_front() {
        let d = dist[&b];
        if sorted(&b) {
            return Some(d);
        }
        for next in relocations(&b) {
            if !dist.contains_key(&next) {
                dist.insert(next.clone(), d + 1);
                queue.push_back(next);
            }
        }
    }
    None
}
