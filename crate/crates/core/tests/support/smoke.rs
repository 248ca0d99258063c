//! The small offline run shared by the fixture recorder and the tests.
//! Mirrors `configs/replay_smoke.toml`.

use std::path::{Path, PathBuf};

use ceoh_core::evolution::EvolutionConfig;
use ceoh_core::instance::Problem;
use ceoh_core::prompt::AugmentationMode;

pub fn fixture_path() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../fixtures/replay_upmp_smoke.json")
}

pub fn smoke_config(output_dir: &Path) -> EvolutionConfig {
    EvolutionConfig {
        problem: Problem::Upmp,
        mode: AugmentationMode::PaCeoh,
        generations: 3,
        survivors: 5,
        repetitions: 2,
        parents: 5,
        output_dir: output_dir.to_path_buf(),
        ..EvolutionConfig::default()
    }
}
