//! Generational loops: static ecGA, dcGA(1), dcGA(2) and the uniform-crossover baseline.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::clock::{sentinel_change_detected, EnvironmentClock, SENTINEL_TOLERANCE};
use crate::error::{Error, Result};
use crate::genome::{random_population, Individual, Population};
use crate::model::{GenePartition, MarginalProductModel, ModelSearch, DEFAULT_MERGE_CAP};
use crate::operators::{bb_wise_crossover, tournament_select, uniform_crossover, DEFAULT_TOURNAMENT_SIZE};
use crate::problems::{DynamicProblem, Sense};
use crate::rng::{RandomStream, Role};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Variant {
    /// ecGA that ignores environment changes.
    EcgaStatic,
    /// Restart on change, biased by the last learned partition.
    Dcga1,
    /// Plain random restart on change.
    Dcga2,
    /// Uniform crossover instead of model building; no restart.
    Uga,
}

impl Variant {
    pub const ALL: [Variant; 4] = [Variant::EcgaStatic, Variant::Dcga1, Variant::Dcga2, Variant::Uga];

    pub fn name(self) -> &'static str {
        match self {
            Variant::EcgaStatic => "ecga_static",
            Variant::Dcga1 => "dcga1",
            Variant::Dcga2 => "dcga2",
            Variant::Uga => "uga",
        }
    }

    pub fn builds_model(self) -> bool {
        !matches!(self, Variant::Uga)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum Detection {
    #[default]
    Oracle,
    /// Re-evaluate the previous generation's best individual.
    Sentinel,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SolverConfig {
    pub variant: Variant,
    pub population_size: usize,
    pub tournament_size: usize,
    pub generations: usize,
    pub cycle: u64,
    pub detection: Detection,
    pub merge_cap: usize,
}

impl Default for SolverConfig {
    fn default() -> Self {
        SolverConfig {
            variant: Variant::Dcga1,
            population_size: 5000,
            tournament_size: DEFAULT_TOURNAMENT_SIZE,
            generations: 100,
            cycle: 5,
            detection: Detection::Oracle,
            merge_cap: DEFAULT_MERGE_CAP,
        }
    }
}

impl SolverConfig {
    pub fn validate(&self) -> Result<()> {
        if self.population_size < 2 {
            return Err(Error::config("population_size must be ≥ 2"));
        }
        if self.tournament_size < 2 || self.tournament_size > self.population_size {
            return Err(Error::config(format!(
                "tournament_size must be in 2..={}",
                self.population_size
            )));
        }
        if self.generations == 0 {
            return Err(Error::config("generations must be ≥ 1"));
        }
        if self.cycle == 0 {
            return Err(Error::config("cycle must be ≥ 1"));
        }
        if self.merge_cap == 0 {
            return Err(Error::config("merge_cap must be ≥ 1"));
        }
        Ok(())
    }

    fn search(&self) -> ModelSearch {
        ModelSearch {
            merge_cap: self.merge_cap,
        }
    }
}

/// One generation of a run.
#[derive(Debug, Clone, PartialEq)]
pub struct TraceRecord {
    pub generation: usize,
    pub phase: usize,
    pub changed: bool,
    pub best: f64,
    pub mean: f64,
    pub optimum: f64,
    /// Model learned this generation; `None` for the uniform-crossover GA.
    pub partition: Option<GenePartition>,
    /// Partition that biased the restart at this generation (dcGA(1) only).
    pub restart_partition: Option<GenePartition>,
    /// Cumulative objective evaluations including this generation.
    pub evals: u64,
}

impl TraceRecord {
    pub fn groups(&self) -> usize {
        self.partition.as_ref().map_or(0, GenePartition::group_count)
    }

    pub fn largest_group(&self) -> usize {
        self.partition.as_ref().map_or(0, GenePartition::largest_group)
    }

    pub fn partition_string(&self) -> String {
        self.partition.as_ref().map(ToString::to_string).unwrap_or_default()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunTrace {
    pub seed: u64,
    pub sense: Sense,
    pub records: Vec<TraceRecord>,
    /// Change events on which a restart handler ran.
    pub restarts: u64,
}

impl RunTrace {
    pub fn best_series(&self) -> Vec<f64> {
        self.records.iter().map(|r| r.best).collect()
    }

    pub fn total_evaluations(&self) -> u64 {
        self.records.last().map_or(0, |r| r.evals)
    }

    /// First generation whose best fitness is within `tolerance` of the optimum.
    pub fn first_hit(&self, tolerance: f64) -> Option<&TraceRecord> {
        self.records
            .iter()
            .find(|r| (r.best - r.optimum).abs() <= tolerance)
    }
}

/// What one generation step produced.
#[derive(Debug, Clone)]
pub struct StepOutcome {
    pub next: Population,
    pub model: Option<MarginalProductModel>,
    pub best: Individual,
    pub mean: f64,
    pub evaluations: u64,
}

/// Per-run random streams, one per purpose.
#[derive(Debug, Clone)]
pub struct RunStreams {
    pub init: RandomStream,
    pub selection: RandomStream,
    pub variation: RandomStream,
    pub restart: RandomStream,
}

impl RunStreams {
    pub fn new(seed: u64) -> Self {
        let root = RandomStream::new(seed);
        RunStreams {
            init: root.derive(0, Role::Init),
            selection: root.derive(0, Role::Selection),
            variation: root.derive(0, Role::Variation),
            restart: root.derive(0, Role::Restart),
        }
    }
}

fn evaluate_and_select<P: DynamicProblem + ?Sized>(
    mut pop: Population,
    problem: &P,
    phase: usize,
    config: &SolverConfig,
    rng: &mut RandomStream,
) -> Result<(Population, Population, u64)> {
    if pop.len() != config.population_size {
        return Err(Error::logic(format!(
            "population has {} members, expected {}",
            pop.len(),
            config.population_size
        )));
    }
    let evaluations = pop.evaluate(problem, phase)?;
    let selected = tournament_select(&pop, config.tournament_size, problem.sense(), rng)?;
    Ok((pop, selected, evaluations))
}

fn outcome(
    evaluated: &Population,
    sense: Sense,
    next: Population,
    model: Option<MarginalProductModel>,
    evaluations: u64,
) -> Result<StepOutcome> {
    Ok(StepOutcome {
        best: evaluated.best(sense)?.clone(),
        mean: evaluated.mean_fitness()?,
        next,
        model,
        evaluations,
    })
}

/// Evaluate, select, learn a model from the selected set and sample it.
pub fn step_ecga<P: DynamicProblem + ?Sized>(
    pop: Population,
    problem: &P,
    phase: usize,
    config: &SolverConfig,
    streams: &mut RunStreams,
) -> Result<StepOutcome> {
    let (evaluated, selected, evaluations) =
        evaluate_and_select(pop, problem, phase, config, &mut streams.selection)?;
    let model = config.search().search(&selected)?.model;
    let next = bb_wise_crossover(
        &selected,
        model.partition(),
        config.population_size,
        &mut streams.variation,
    )?;
    outcome(&evaluated, problem.sense(), next, Some(model), evaluations)
}

/// Evaluate, select and apply uniform crossover.
pub fn step_uga<P: DynamicProblem + ?Sized>(
    pop: Population,
    problem: &P,
    phase: usize,
    config: &SolverConfig,
    streams: &mut RunStreams,
) -> Result<StepOutcome> {
    let (evaluated, selected, evaluations) =
        evaluate_and_select(pop, problem, phase, config, &mut streams.selection)?;
    let next = uniform_crossover(&selected, config.population_size, &mut streams.variation)?;
    outcome(&evaluated, problem.sense(), next, None, evaluations)
}

/// Restart biased by the last partition: random population, evaluated at
/// the new phase, selected, then recombined block-wise along `last`.
///
/// Falls back to [`on_change_dcga2`] when no partition exists yet.
/// Returns the new population and the evaluations spent.
pub fn on_change_dcga1<P: DynamicProblem + ?Sized>(
    problem: &P,
    phase: usize,
    last: Option<&GenePartition>,
    config: &SolverConfig,
    streams: &mut RunStreams,
) -> Result<(Population, u64)> {
    let Some(partition) = last else {
        return Ok((on_change_dcga2(problem.genome_length(), config, streams)?, 0));
    };
    let fresh = random_population(config.population_size, problem.genome_length(), &mut streams.restart)?;
    let (_, selected, evaluations) =
        evaluate_and_select(fresh, problem, phase, config, &mut streams.selection)?;
    let next = bb_wise_crossover(&selected, partition, config.population_size, &mut streams.variation)?;
    Ok((next, evaluations))
}

/// Plain restart: a fresh, unevaluated random population.
pub fn on_change_dcga2(
    genome_length: usize,
    config: &SolverConfig,
    streams: &mut RunStreams,
) -> Result<Population> {
    random_population(config.population_size, genome_length, &mut streams.restart)
}

/// Execute `config.generations` generations on a private copy of `problem`.
///
/// Each generation: advance the environment if the clock says so, detect,
/// run the variant's change handler, then step.
pub fn run<P: DynamicProblem + Clone>(config: &SolverConfig, problem: &P, seed: u64) -> Result<RunTrace> {
    config.validate()?;
    let mut problem = problem.clone();
    let clock = EnvironmentClock::new(config.cycle, problem.phase_count())?;
    let mut streams = RunStreams::new(seed);
    let l = problem.genome_length();
    let sense = problem.sense();

    let mut pop = random_population(config.population_size, l, &mut streams.init)?;
    let mut last_partition: Option<GenePartition> = None;
    let mut sentinel: Option<Individual> = None;
    let mut evals = 0u64;
    let mut restarts = 0u64;
    let mut records = Vec::with_capacity(config.generations);

    for t in 0..config.generations {
        let t64 = t as u64;
        let phase = clock.phase(t64);
        if clock.oracle_change_detected(t64) {
            problem.on_change();
        }
        let changed = match config.detection {
            Detection::Oracle => clock.oracle_change_detected(t64),
            Detection::Sentinel => match &sentinel {
                Some(s) => {
                    evals += 1;
                    sentinel_change_detected(s, &problem, phase, SENTINEL_TOLERANCE)?
                }
                None => false,
            },
        };

        let mut restart_partition = None;
        if changed {
            match config.variant {
                Variant::Dcga1 => {
                    let (next, used) =
                        on_change_dcga1(&problem, phase, last_partition.as_ref(), config, &mut streams)?;
                    if used > 0 {
                        restart_partition = last_partition.clone();
                    }
                    pop = next;
                    evals += used;
                    restarts += 1;
                }
                Variant::Dcga2 => {
                    pop = on_change_dcga2(l, config, &mut streams)?;
                    restarts += 1;
                }
                Variant::EcgaStatic | Variant::Uga => {}
            }
        }

        let step = if config.variant.builds_model() {
            step_ecga(pop, &problem, phase, config, &mut streams)?
        } else {
            step_uga(pop, &problem, phase, config, &mut streams)?
        };
        evals += step.evaluations;
        let partition = step.model.map(|m| m.partition().clone());
        if let Some(p) = &partition {
            last_partition = Some(p.clone());
        }
        records.push(TraceRecord {
            generation: t,
            phase,
            changed,
            best: step.best.fitness()?,
            mean: step.mean,
            optimum: problem.optimum_value(phase),
            partition,
            restart_partition,
            evals,
        });
        sentinel = Some(step.best);
        pop = step.next;
    }

    Ok(RunTrace {
        seed,
        sense,
        records,
        restarts,
    })
}

/// Generations to convergence predicted by `π √l / I` for selection intensity `I`.
pub fn predicted_convergence_time(genome_length: usize, selection_intensity: f64) -> Result<f64> {
    if genome_length == 0 {
        return Err(Error::config("genome length must be ≥ 1"));
    }
    if !(selection_intensity > 0.0) {
        return Err(Error::config("selection intensity must be positive"));
    }
    Ok(PI * (genome_length as f64).sqrt() / selection_intensity)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::genome::Genome;
    use crate::problems::{DynamicTrap, ProblemSpec};
    use approx::assert_abs_diff_eq;

    fn small(variant: Variant) -> SolverConfig {
        SolverConfig {
            variant,
            population_size: 200,
            tournament_size: 8,
            generations: 20,
            cycle: 5,
            ..SolverConfig::default()
        }
    }

    #[test]
    fn convergence_time_examples() {
        assert_abs_diff_eq!(predicted_convergence_time(100, 1.0).unwrap(), PI * 10.0, epsilon = 1e-9);
        assert_abs_diff_eq!(predicted_convergence_time(1, PI).unwrap(), 1.0, epsilon = 1e-12);
        let a = predicted_convergence_time(25, 2.0).unwrap();
        let b = predicted_convergence_time(100, 2.0).unwrap();
        assert_abs_diff_eq!(b, 2.0 * a, epsilon = 1e-12);
        assert!(predicted_convergence_time(10, 0.0).is_err());
        assert!(predicted_convergence_time(10, -1.0).is_err());
    }

    #[test]
    fn converged_population_stays_put() {
        let trap = DynamicTrap::new(3, 2).unwrap();
        let config = SolverConfig {
            population_size: 20,
            tournament_size: 4,
            ..SolverConfig::default()
        };
        let pop = Population::from_genomes(vec!["011010".parse::<Genome>().unwrap(); 20]).unwrap();
        let out = step_ecga(pop.clone(), &trap, 0, &config, &mut RunStreams::new(1)).unwrap();
        let model = out.model.unwrap();
        assert_eq!(model.partition(), &GenePartition::singletons(6));
        assert!(out.next.genomes().all(|g| g.to_string() == "011010"));
        assert_eq!(out.evaluations, 20);

        let out = step_uga(pop, &trap, 0, &config, &mut RunStreams::new(1)).unwrap();
        assert!(out.next.genomes().all(|g| g.to_string() == "011010"));
    }

    #[test]
    fn restart_counts_and_accounting() {
        let problem = ProblemSpec::DynamicTrap { k: 3, blocks: 3 }.build().unwrap();
        for variant in [Variant::Dcga1, Variant::Dcga2, Variant::Uga, Variant::EcgaStatic] {
            let config = small(variant);
            let trace = run(&config, &problem, 3).unwrap();
            assert_eq!(trace.records.len(), 20);
            let changes = trace.records.iter().filter(|r| r.changed).count() as u64;
            assert_eq!(changes, 3);
            let extra = if variant == Variant::Dcga1 { changes } else { 0 };
            assert_eq!(trace.total_evaluations(), (20 + extra) * 200);
            let expected_restarts = if matches!(variant, Variant::Dcga1 | Variant::Dcga2) { 3 } else { 0 };
            assert_eq!(trace.restarts, expected_restarts);
            for r in &trace.records {
                assert!(r.best <= r.optimum + 1e-12);
                assert_eq!(r.phase, (r.generation / 5) % 2);
            }
        }
    }

    #[test]
    fn dcga1_reuses_previous_partition() {
        let problem = ProblemSpec::DynamicTrap { k: 3, blocks: 4 }.build().unwrap();
        let trace = run(&small(Variant::Dcga1), &problem, 8).unwrap();
        for pair in trace.records.windows(2) {
            if pair[1].changed {
                assert_eq!(pair[1].restart_partition, pair[0].partition);
            } else {
                assert!(pair[1].restart_partition.is_none());
            }
        }
    }

    #[test]
    fn runs_are_deterministic() {
        let problem = ProblemSpec::moving_parabola().build().unwrap();
        let config = small(Variant::Dcga1);
        assert_eq!(run(&config, &problem, 4).unwrap(), run(&config, &problem, 4).unwrap());
        assert_ne!(
            run(&config, &problem, 4).unwrap().best_series(),
            run(&config, &problem, 5).unwrap().best_series()
        );
    }

    #[test]
    fn static_ecga_without_changes_is_plain_ecga() {
        let problem = ProblemSpec::StaticTrap { k: 3, blocks: 3 }.build().unwrap();
        let mut config = small(Variant::EcgaStatic);
        config.cycle = 1000;
        let trace = run(&config, &problem, 6).unwrap();
        assert!(trace.records.iter().all(|r| !r.changed));
        assert_eq!(trace.total_evaluations(), 20 * 200);
    }

    #[test]
    fn sentinel_detection_finds_trap_switches() {
        let problem = ProblemSpec::DynamicTrap { k: 3, blocks: 4 }.build().unwrap();
        let mut config = small(Variant::Dcga2);
        config.detection = Detection::Sentinel;
        let trace = run(&config, &problem, 2).unwrap();
        let flagged: Vec<usize> = trace.records.iter().filter(|r| r.changed).map(|r| r.generation).collect();
        // Every true change alters the sentinel's value; nothing else can.
        for g in &flagged {
            assert_eq!(g % 5, 0);
        }
        assert_eq!(trace.total_evaluations(), 20 * 200 + 19);
    }

    #[test]
    fn invalid_configs_rejected() {
        let problem = ProblemSpec::DynamicTrap { k: 3, blocks: 1 }.build().unwrap();
        let mut c = small(Variant::Dcga1);
        c.cycle = 0;
        assert!(matches!(run(&c, &problem, 0), Err(Error::Config(_))));
        let mut c = small(Variant::Dcga1);
        c.tournament_size = 500;
        assert!(run(&c, &problem, 0).is_err());
        let mut c = small(Variant::Dcga1);
        c.generations = 0;
        assert!(run(&c, &problem, 0).is_err());
    }
}
