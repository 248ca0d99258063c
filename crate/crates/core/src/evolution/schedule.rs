use serde::{Deserialize, Serialize};

use crate::prompt::StrategyKind;

/// One request of a run.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct PromptSlot {
    /// Position in the run, starting at 0 with the first initial prompt.
    pub index: u64,
    /// 0 for initialisation, then 1-based generation numbers.
    pub generation: u32,
    pub strategy: StrategyKind,
}

/// The fixed order of all prompts: `init_calls` I1 prompts, then per
/// generation `repetitions` prompts of each of E1, E2, M1, M2.
#[derive(Debug, Clone)]
pub struct Schedule {
    init_calls: u64,
    generations: u32,
    repetitions: u64,
    next: u64,
}

impl Schedule {
    pub fn new(init_calls: usize, generations: u32, repetitions: usize) -> Self {
        Schedule { init_calls: init_calls as u64, generations, repetitions: repetitions as u64, next: 0 }
    }

    pub fn len(&self) -> u64 {
        self.init_calls + u64::from(self.generations) * 4 * self.repetitions
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn slot(&self, index: u64) -> Option<PromptSlot> {
        if index >= self.len() {
            return None;
        }
        if index < self.init_calls {
            return Some(PromptSlot { index, generation: 0, strategy: StrategyKind::I1 });
        }
        let offset = index - self.init_calls;
        let per_generation = 4 * self.repetitions;
        let generation = (offset / per_generation) as u32 + 1;
        let strategy = StrategyKind::EVOLUTION[((offset % per_generation) / self.repetitions) as usize];
        Some(PromptSlot { index, generation, strategy })
    }

    /// Slots of one generation (0 = initialisation).
    pub fn generation(&self, generation: u32) -> impl Iterator<Item = PromptSlot> + '_ {
        let range = if generation == 0 {
            0..self.init_calls
        } else {
            let start = self.init_calls + u64::from(generation - 1) * 4 * self.repetitions;
            start..start + 4 * self.repetitions
        };
        range.filter_map(|i| self.slot(i))
    }
}

impl Iterator for Schedule {
    type Item = PromptSlot;

    fn next(&mut self) -> Option<PromptSlot> {
        let slot = self.slot(self.next)?;
        self.next += 1;
        Some(slot)
    }
}
