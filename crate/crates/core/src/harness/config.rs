use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::operators::DEFAULT_TOURNAMENT_SIZE;
use crate::problems::{ProblemSpec, PROBLEM_NAMES};
use crate::solvers::{Detection, SolverConfig, Variant};

/// A validated experiment description. Serializes to the same JSON the
/// loader accepts.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentConfig {
    pub problem: ProblemSpec,
    pub variant: Variant,
    pub population_size: usize,
    pub tournament_size: usize,
    pub generations: usize,
    pub cycle: u64,
    pub runs: usize,
    pub base_seed: u64,
    pub output_dir: PathBuf,
    #[serde(default)]
    pub detection: Detection,
}

impl ExperimentConfig {
    pub fn new(problem: ProblemSpec, variant: Variant) -> Self {
        ExperimentConfig {
            problem,
            variant,
            population_size: 5000,
            tournament_size: DEFAULT_TOURNAMENT_SIZE,
            generations: 100,
            cycle: 5,
            runs: 30,
            base_seed: 1,
            output_dir: PathBuf::from("results"),
            detection: Detection::Oracle,
        }
    }

    pub fn solver(&self) -> SolverConfig {
        SolverConfig {
            variant: self.variant,
            population_size: self.population_size,
            tournament_size: self.tournament_size,
            generations: self.generations,
            cycle: self.cycle,
            detection: self.detection,
            ..SolverConfig::default()
        }
    }

    /// Multiply population size and run count by `factor` (each at least
    /// its minimum), clamping the tournament to the new population.
    pub fn scaled(&self, factor: f64) -> Result<Self> {
        if !(factor > 0.0 && factor.is_finite()) {
            return Err(Error::config("scale must be a positive number"));
        }
        let mut c = self.clone();
        c.population_size = ((self.population_size as f64 * factor).round() as usize).max(2);
        c.runs = ((self.runs as f64 * factor).round() as usize).max(1);
        c.tournament_size = c.tournament_size.min(c.population_size);
        Ok(c)
    }

    pub fn validate(&self) -> Result<()> {
        if self.runs == 0 {
            return Err(Error::config("runs must be ≥ 1"));
        }
        self.problem.build()?;
        self.solver().validate()
    }
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawConfig {
    problem: Option<serde_json::Value>,
    variant: Option<serde_json::Value>,
    population_size: Option<i64>,
    tournament_size: Option<i64>,
    generations: Option<i64>,
    cycle: Option<i64>,
    runs: Option<i64>,
    base_seed: Option<u64>,
    output_dir: Option<PathBuf>,
    detection: Option<serde_json::Value>,
}

fn at_least(field: &str, value: Option<i64>, default: i64, min: i64) -> Result<i64> {
    let v = value.unwrap_or(default);
    if v < min {
        return Err(Error::config(format!("{field} must be ≥ {min}, got {v}")));
    }
    Ok(v)
}

fn named<T: for<'de> Deserialize<'de>>(field: &str, value: serde_json::Value, choices: &str) -> Result<T> {
    serde_json::from_value(value.clone())
        .map_err(|e| Error::config(format!("{field}: {e} (got {value}; known: {choices})")))
}

/// Parse and validate a JSON config, applying defaults.
pub fn parse_config(text: &str) -> Result<ExperimentConfig> {
    let raw: RawConfig = serde_json::from_str(text)?;
    let problem_value = raw.problem.ok_or_else(|| Error::config("problem is required"))?;
    let problem: ProblemSpec = named("problem", problem_value, &PROBLEM_NAMES.join(", "))?;
    let variant_value = raw.variant.ok_or_else(|| Error::config("variant is required"))?;
    let variant: Variant = named("variant", variant_value, "ecga_static, dcga1, dcga2, uga")?;
    let detection = match raw.detection {
        Some(v) => named("detection", v, "oracle, sentinel")?,
        None => Detection::Oracle,
    };
    let defaults = ExperimentConfig::new(problem.clone(), variant);
    let population_size = at_least("population_size", raw.population_size, defaults.population_size as i64, 2)?;
    let tournament_size = at_least("tournament_size", raw.tournament_size, defaults.tournament_size as i64, 2)?;
    if tournament_size > population_size {
        return Err(Error::config(format!(
            "tournament_size must be ≤ population_size ({population_size}), got {tournament_size}"
        )));
    }
    let config = ExperimentConfig {
        problem,
        variant,
        population_size: population_size as usize,
        tournament_size: tournament_size as usize,
        generations: at_least("generations", raw.generations, defaults.generations as i64, 1)? as usize,
        cycle: at_least("cycle", raw.cycle, defaults.cycle as i64, 1)? as u64,
        runs: at_least("runs", raw.runs, defaults.runs as i64, 1)? as usize,
        base_seed: raw.base_seed.unwrap_or(defaults.base_seed),
        output_dir: raw.output_dir.unwrap_or(defaults.output_dir),
        detection,
    };
    config
        .problem
        .build()
        .map_err(|e| Error::config(format!("problem: {}", strip_prefix(&e))))?;
    config.validate()?;
    Ok(config)
}

fn strip_prefix(e: &Error) -> String {
    match e {
        Error::Config(m) => m.clone(),
        other => other.to_string(),
    }
}

pub fn load_config(path: impl AsRef<Path>) -> Result<ExperimentConfig> {
    let text = fs::read_to_string(path.as_ref())?;
    parse_config(&text)
}
