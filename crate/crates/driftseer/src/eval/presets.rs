//! First-class experiment presets: the benchmark table rows and the
//! window/memory sensitivity grid.

use super::{EvalError, ExperimentConfig, Mode};
use crate::data::{GeneratorKind, StreamSpec};

pub fn preset_names() -> Vec<&'static str> {
    vec![
        "table2-sine-none",
        "table2-sine-pht",
        "table2-sine-cdseer",
        "table2-sine-pseudo-gt",
        "table2-sea-none",
        "table2-sea-pht",
        "table2-sea-cdseer",
        "table2-sea-pseudo-gt",
        "table3-grid",
    ]
}

fn benchmark_stream(generator: GeneratorKind) -> StreamSpec {
    StreamSpec::synthetic(generator, 16_000, 0)
}

fn table2(generator: GeneratorKind, mode: Mode, name: &str) -> ExperimentConfig {
    ExperimentConfig::new(name, benchmark_stream(generator), mode)
}

/// Expand a preset into its runs. `base_generator` selects the dataset for
/// the sensitivity grid (the table2 presets carry their own).
pub fn expand_preset(
    name: &str,
    base_generator: GeneratorKind,
) -> Result<Vec<ExperimentConfig>, EvalError> {
    let one = |cfg: ExperimentConfig| Ok(vec![cfg]);
    match name {
        "table2-sine-none" => one(table2(GeneratorKind::Sine, Mode::None, name)),
        "table2-sine-pht" => one(table2(GeneratorKind::Sine, Mode::SupervisedPht, name)),
        "table2-sine-cdseer" => one(table2(GeneratorKind::Sine, Mode::CdSeer, name)),
        "table2-sine-pseudo-gt" => one(table2(GeneratorKind::Sine, Mode::PhtNoRetrainGt, name)),
        "table2-sea-none" => one(table2(GeneratorKind::Sea, Mode::None, name)),
        "table2-sea-pht" => one(table2(GeneratorKind::Sea, Mode::SupervisedPht, name)),
        "table2-sea-cdseer" => one(table2(GeneratorKind::Sea, Mode::CdSeer, name)),
        "table2-sea-pseudo-gt" => one(table2(GeneratorKind::Sea, Mode::PhtNoRetrainGt, name)),
        "table3-grid" => {
            let mut runs = Vec::new();
            for &window in &[500usize, 1_000] {
                for &memory in &[10usize, 15] {
                    let mut cfg = table2(
                        base_generator,
                        Mode::CdSeer,
                        &format!(
                            "table3-{}-w{window}-m{memory}",
                            base_generator.as_str()
                        ),
                    );
                    cfg.seer.window = window;
                    cfg.seer.memory = memory;
                    runs.push(cfg);
                }
            }
            Ok(runs)
        }
        other => Err(EvalError::UnknownPreset {
            name: other.to_string(),
            known: preset_names().join(", "),
        }),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn every_preset_expands() {
        for name in preset_names() {
            let runs = expand_preset(name, GeneratorKind::Sine).unwrap();
            assert!(!runs.is_empty());
        }
    }

    #[test]
    fn grid_preset_is_four_cells() {
        let runs = expand_preset("table3-grid", GeneratorKind::Sea).unwrap();
        assert_eq!(runs.len(), 4);
        let mut cells: Vec<(usize, usize)> = runs
            .iter()
            .map(|c| (c.seer.window, c.seer.memory))
            .collect();
        cells.sort_unstable();
        assert_eq!(cells, vec![(500, 10), (500, 15), (1_000, 10), (1_000, 15)]);
    }

    #[test]
    fn unknown_preset_is_an_error() {
        assert!(matches!(
            expand_preset("table9", GeneratorKind::Sine),
            Err(EvalError::UnknownPreset { .. })
        ));
    }
}
