use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::instance::Problem;
use crate::prompt::AugmentationMode;

/// Token counts of one answered prompt.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct UsageSample {
    pub problem: Problem,
    pub mode: AugmentationMode,
    pub input_tokens: u64,
    pub output_tokens: u64,
}

/// Mean token counts per (problem, mode).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct UsageRow {
    pub problem: Problem,
    pub mode: AugmentationMode,
    pub prompts: u64,
    pub total_input_tokens: u64,
    pub total_output_tokens: u64,
    pub mean_input_tokens: f64,
    pub mean_output_tokens: f64,
}

/// Rows ordered by problem then mode; an empty input gives no rows.
pub fn usage_report(samples: &[UsageSample]) -> Vec<UsageRow> {
    let mut groups: BTreeMap<(Problem, AugmentationMode), (u64, u64, u64)> = BTreeMap::new();
    for s in samples {
        let g = groups.entry((s.problem, s.mode)).or_default();
        g.0 += 1;
        g.1 += s.input_tokens;
        g.2 += s.output_tokens;
    }
    groups
        .into_iter()
        .map(|((problem, mode), (n, input, output))| UsageRow {
            problem,
            mode,
            prompts: n,
            total_input_tokens: input,
            total_output_tokens: output,
            mean_input_tokens: input as f64 / n as f64,
            mean_output_tokens: output as f64 / n as f64,
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn s(mode: AugmentationMode, input: u64, output: u64) -> UsageSample {
        UsageSample { problem: Problem::Upmp, mode, input_tokens: input, output_tokens: output }
    }

    #[test]
    fn means_per_mode() {
        let rows = usage_report(&[
            s(AugmentationMode::Eoh, 100, 10),
            s(AugmentationMode::PaCeoh, 300, 7),
            s(AugmentationMode::Eoh, 200, 30),
        ]);
        assert_eq!(rows.len(), 2);
        assert_eq!(rows[0].mode, AugmentationMode::Eoh);
        assert_eq!(rows[0].mean_input_tokens, 150.0);
        assert_eq!(rows[0].mean_output_tokens, 20.0);
        assert_eq!(rows[0].total_input_tokens, 300);
        assert_eq!(rows[1].mean_input_tokens, 300.0);
        assert_eq!(rows[1].prompts, 1);
        assert!(usage_report(&[]).is_empty());
    }
}
