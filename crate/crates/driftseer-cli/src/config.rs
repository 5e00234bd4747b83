//! Flat INI-style configuration with dotted keys inside sections.
//!
//! Precedence: CLI `--set` overrides > config file > built-in defaults.
//! Validation reports every problem at once instead of stopping at the
//! first.

use std::collections::{BTreeMap, BTreeSet};

use driftseer::classify::ClassifierKind;
use driftseer::data::{CsvSchema, DriftSchedule, GeneratorKind, StreamSpec};
use driftseer::detect::{DdmConfig, DetectorConfig, PhtConfig};
use driftseer::eval::{ExperimentConfig, Mode, OraclePolicyChoice};
use driftseer::spread::GraphMode;

/// Ordered key/value view of a config. Keys are `section.key` (dotted
/// subkeys allowed, e.g. `seer.spread.knn`).
pub type ConfigMap = BTreeMap<String, String>;

pub fn defaults() -> ConfigMap {
    let pht = PhtConfig::default();
    let ddm = DdmConfig::default();
    let entries: [(&str, String); 27] = [
        ("experiment.dataset", "sine".into()),
        ("experiment.mode", "cdseer".into()),
        ("experiment.n", "16000".into()),
        ("experiment.train_prefix", "1000".into()),
        ("experiment.seeds", "1,2,3,4,5".into()),
        ("experiment.horizon", "0".into()),
        ("experiment.drifts", "3000:1,10000:2".into()),
        ("experiment.csv_path", String::new()),
        ("model.kind", "random_forest".into()),
        ("model.trees", "100".into()),
        ("model.max_depth", "0".into()),
        ("model.min_samples_split", "2".into()),
        ("model.bootstrap", "true".into()),
        ("detector.kind", "pht".into()),
        ("detector.pht.delta", pht.delta.to_string()),
        ("detector.pht.lambda", pht.lambda.to_string()),
        ("detector.pht.alpha", pht.alpha.to_string()),
        ("detector.ddm.warmup", ddm.warmup.to_string()),
        ("seer.window", "1000".into()),
        ("seer.memory", "15".into()),
        ("seer.sampling_period", "0".into()),
        ("seer.per_stratum", "1".into()),
        ("seer.budget", "0.01".into()),
        ("seer.retrain_online_on_alarm", "true".into()),
        ("seer.reestimate_epsilon", "false".into()),
        ("seer.oracle", "budget_capped".into()),
        ("seer.oracle_fraction", "1.0".into()),
    ];
    let mut map: ConfigMap = entries
        .into_iter()
        .map(|(k, v)| (k.to_string(), v))
        .collect();
    map.insert("seer.spread.knn".into(), "7".into());
    map.insert("seer.spread.alpha".into(), "0.2".into());
    map.insert("seer.spread.max_iter".into(), "30".into());
    map.insert("seer.spread.tolerance".into(), "0.001".into());
    map.insert("seer.spread.graph".into(), "knn".into());
    map
}

/// Render a map as INI text, grouped by section.
pub fn to_ini(map: &ConfigMap) -> String {
    let mut out = String::new();
    let mut section = String::new();
    for (key, value) in map {
        let (sect, rest) = key.split_once('.').unwrap_or(("", key));
        if sect != section {
            if !out.is_empty() {
                out.push('\n');
            }
            out.push_str(&format!("[{sect}]\n"));
            section = sect.to_string();
        }
        out.push_str(&format!("{rest} = {value}\n"));
    }
    out
}

/// Parse INI text into dotted keys. Unknown keys are the caller's problem;
/// syntax errors are collected with line numbers.
pub fn parse_ini(text: &str) -> Result<ConfigMap, Vec<String>> {
    let mut map = ConfigMap::new();
    let mut errors = Vec::new();
    let mut section = String::new();
    for (i, raw) in text.lines().enumerate() {
        let line = raw.split(&['#', ';'][..]).next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        if let Some(name) = line.strip_prefix('[').and_then(|s| s.strip_suffix(']')) {
            section = name.trim().to_string();
            continue;
        }
        match line.split_once('=') {
            Some((key, value)) => {
                let full = if section.is_empty() {
                    key.trim().to_string()
                } else {
                    format!("{section}.{}", key.trim())
                };
                map.insert(full, value.trim().to_string());
            }
            None => errors.push(format!("line {}: expected 'key = value'", i + 1)),
        }
    }
    if errors.is_empty() {
        Ok(map)
    } else {
        Err(errors)
    }
}

/// The final merged view plus which keys were explicitly set (file or CLI),
/// so presets only get overridden where the user said so.
#[derive(Debug)]
pub struct ResolvedConfig {
    pub map: ConfigMap,
    pub explicit: BTreeSet<String>,
}

pub fn resolve(
    file: Option<&str>,
    sets: &[(String, String)],
) -> Result<ResolvedConfig, Vec<String>> {
    let mut errors = Vec::new();
    let known = defaults();
    let mut map = known.clone();
    let mut explicit = BTreeSet::new();

    if let Some(text) = file {
        match parse_ini(text) {
            Ok(parsed) => {
                for (key, value) in parsed {
                    if !known.contains_key(&key) {
                        errors.push(format!("unknown config key '{key}'"));
                        continue;
                    }
                    explicit.insert(key.clone());
                    map.insert(key, value);
                }
            }
            Err(mut parse_errors) => errors.append(&mut parse_errors),
        }
    }
    for (key, value) in sets {
        if !known.contains_key(key) {
            errors.push(format!("unknown override key '{key}'"));
            continue;
        }
        explicit.insert(key.clone());
        map.insert(key.clone(), value.clone());
    }
    if errors.is_empty() {
        Ok(ResolvedConfig { map, explicit })
    } else {
        Err(errors)
    }
}

fn parse_drifts(value: &str) -> Result<DriftSchedule, String> {
    if value.trim().is_empty() {
        return Ok(DriftSchedule::none());
    }
    let mut changes = Vec::new();
    for part in value.split(',') {
        let (index, concept) = part
            .trim()
            .split_once(':')
            .ok_or_else(|| format!("drift '{part}' must be 'index:concept'"))?;
        let index: u64 = index
            .trim()
            .parse()
            .map_err(|_| format!("bad drift index '{index}'"))?;
        let concept: u8 = concept
            .trim()
            .parse()
            .map_err(|_| format!("bad concept id '{concept}'"))?;
        changes.push((index, concept));
    }
    DriftSchedule::new(changes).map_err(|e| e.to_string())
}

pub fn parse_seeds(value: &str) -> Result<Vec<u64>, String> {
    let seeds: Result<Vec<u64>, _> = value
        .split(',')
        .map(|s| s.trim().parse::<u64>())
        .collect();
    let seeds = seeds.map_err(|_| format!("bad seed list '{value}'"))?;
    if seeds.is_empty() {
        return Err("seed list is empty".into());
    }
    Ok(seeds)
}

/// Apply one dotted key to the experiment config.
fn apply_key(cfg: &mut ExperimentConfig, key: &str, value: &str) -> Result<(), String> {
    let bad = |what: &str| format!("bad value '{value}' for {key} ({what})");
    let parse_usize = |v: &str| v.parse::<usize>().map_err(|_| bad("expected integer"));
    let parse_f64 = |v: &str| v.parse::<f64>().map_err(|_| bad("expected number"));
    let parse_bool = |v: &str| v.parse::<bool>().map_err(|_| bad("expected true/false"));
    match key {
        "experiment.dataset" => {
            cfg.stream.generator = GeneratorKind::by_name(value).map_err(|e| e.to_string())?;
        }
        "experiment.mode" => cfg.mode = Mode::by_name(value).map_err(|e| e.to_string())?,
        "experiment.n" => cfg.stream.n = parse_usize(value)?,
        "experiment.train_prefix" => cfg.train_prefix = parse_usize(value)?,
        "experiment.seeds" => {} // consumed by the runner, validated there
        "experiment.horizon" => {
            let h = value.parse::<u64>().map_err(|_| bad("expected integer"))?;
            cfg.horizon = (h > 0).then_some(h);
        }
        "experiment.drifts" => cfg.stream.schedule = parse_drifts(value)?,
        "experiment.csv_path" => {
            cfg.stream.csv_path = (!value.is_empty()).then(|| value.to_string());
            if cfg.stream.csv_path.is_some() {
                cfg.stream.csv_schema = CsvSchema::default();
            }
        }
        "model.kind" => {
            cfg.model_kind = match value {
                "random_forest" => ClassifierKind::RandomForest,
                "decision_tree" => ClassifierKind::DecisionTree,
                _ => return Err(bad("expected random_forest|decision_tree")),
            };
        }
        "model.trees" => cfg.model.n_trees = parse_usize(value)?,
        "model.max_depth" => {
            let d = parse_usize(value)?;
            cfg.model.max_depth = (d > 0).then_some(d);
        }
        "model.min_samples_split" => cfg.model.min_samples_split = parse_usize(value)?,
        "model.bootstrap" => cfg.model.bootstrap = parse_bool(value)?,
        "detector.kind" => {
            // Parameters for the selected detector are applied separately;
            // keep whatever pht/ddm keys already set by re-reading them
            // later. Selection itself is recorded here.
            cfg.seer.detector = DetectorConfig::by_name(value).map_err(|e| e.to_string())?;
        }
        "detector.pht.delta" | "detector.pht.lambda" | "detector.pht.alpha" => {
            if let DetectorConfig::PageHinkley(pht) = &mut cfg.seer.detector {
                let v = parse_f64(value)?;
                match key {
                    "detector.pht.delta" => pht.delta = v,
                    "detector.pht.lambda" => pht.lambda = v,
                    _ => pht.alpha = v,
                }
            }
        }
        "detector.ddm.warmup" => {
            if let DetectorConfig::Ddm(ddm) = &mut cfg.seer.detector {
                ddm.warmup = value.parse::<u64>().map_err(|_| bad("expected integer"))?;
            }
        }
        "seer.window" => cfg.seer.window = parse_usize(value)?,
        "seer.memory" => cfg.seer.memory = parse_usize(value)?,
        "seer.sampling_period" => {
            let p = parse_usize(value)?;
            cfg.seer.sampling_period = (p > 0).then_some(p);
        }
        "seer.per_stratum" => cfg.seer.per_stratum = parse_usize(value)?,
        "seer.budget" => cfg.seer.budget_fraction = parse_f64(value)?,
        "seer.retrain_online_on_alarm" => cfg.seer.retrain_online_on_alarm = parse_bool(value)?,
        "seer.reestimate_epsilon" => cfg.seer.reestimate_epsilon = parse_bool(value)?,
        "seer.spread.knn" => {
            if let GraphMode::Knn(_) = cfg.seer.spread.graph {
                cfg.seer.spread.graph = GraphMode::Knn(parse_usize(value)?);
            }
        }
        "seer.spread.alpha" => cfg.seer.spread.alpha = parse_f64(value)?,
        "seer.spread.max_iter" => cfg.seer.spread.max_iter = parse_usize(value)?,
        "seer.spread.tolerance" => cfg.seer.spread.tolerance = parse_f64(value)?,
        "seer.spread.graph" => {
            cfg.seer.spread.graph = match value {
                "knn" => GraphMode::Knn(7),
                "complete" => GraphMode::Complete,
                _ => return Err(bad("expected knn|complete")),
            };
        }
        "seer.oracle" => {
            cfg.oracle = match value {
                "all" => OraclePolicyChoice::All,
                "fraction" => OraclePolicyChoice::Fraction(1.0),
                "budget_capped" => OraclePolicyChoice::BudgetCapped,
                _ => return Err(bad("expected all|fraction|budget_capped")),
            };
        }
        "seer.oracle_fraction" => {
            if let OraclePolicyChoice::Fraction(_) = cfg.oracle {
                cfg.oracle = OraclePolicyChoice::Fraction(parse_f64(value)?);
            }
        }
        other => return Err(format!("unknown config key '{other}'")),
    }
    Ok(())
}

/// Keys whose relative order matters when applying (selectors before their
/// parameters).
fn apply_order(keys: impl Iterator<Item = String>) -> Vec<String> {
    let mut keys: Vec<String> = keys.collect();
    let rank = |k: &str| match k {
        "detector.kind" | "seer.spread.graph" | "seer.oracle" | "model.kind" => 0,
        _ => 1,
    };
    keys.sort_by(|a, b| rank(a).cmp(&rank(b)).then(a.cmp(b)));
    keys
}

/// Build a full experiment config from the merged map.
pub fn build_config(resolved: &ResolvedConfig, name: &str) -> Result<ExperimentConfig, Vec<String>> {
    let mut cfg = ExperimentConfig::new(
        name,
        StreamSpec::synthetic(GeneratorKind::Sine, 16_000, 0),
        Mode::CdSeer,
    );
    let mut errors = Vec::new();
    for key in apply_order(resolved.map.keys().cloned()) {
        if let Err(e) = apply_key(&mut cfg, &key, &resolved.map[&key]) {
            errors.push(e);
        }
    }
    validate_into(&cfg, &mut errors);
    if errors.is_empty() {
        Ok(cfg)
    } else {
        Err(errors)
    }
}

/// Overlay only the explicitly-set keys on a preset-produced config.
pub fn apply_explicit(
    cfg: &mut ExperimentConfig,
    resolved: &ResolvedConfig,
) -> Result<(), Vec<String>> {
    let mut errors = Vec::new();
    for key in apply_order(resolved.explicit.iter().cloned()) {
        if let Err(e) = apply_key(cfg, &key, &resolved.map[&key]) {
            errors.push(e);
        }
    }
    validate_into(cfg, &mut errors);
    if errors.is_empty() {
        Ok(())
    } else {
        Err(errors)
    }
}

fn validate_into(cfg: &ExperimentConfig, errors: &mut Vec<String>) {
    if let Err(e) = cfg.seer.validate() {
        errors.push(e.to_string());
    }
    if cfg.stream.n == 0 {
        errors.push("experiment.n must be positive".into());
    }
    if cfg.train_prefix == 0 {
        errors.push("experiment.train_prefix must be positive".into());
    }
    if cfg.stream.generator == GeneratorKind::Csv && cfg.stream.csv_path.is_none() {
        errors.push("experiment.csv_path is required when dataset = csv".into());
    }
}
