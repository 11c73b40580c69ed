use crate::problems::ProblemSpec;
use crate::solvers::RunTrace;

/// How quickly one environment cycle reached its optimum.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CycleRecovery {
    pub cycle: usize,
    pub start: usize,
    /// Generations after `start` until the optimum was hit, if ever.
    pub recovered_after: Option<usize>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RecoveryReport {
    pub cycles: Vec<CycleRecovery>,
}

impl RecoveryReport {
    pub fn recovered_fraction(&self) -> f64 {
        if self.cycles.is_empty() {
            return 0.0;
        }
        let hit = self.cycles.iter().filter(|c| c.recovered_after.is_some()).count();
        hit as f64 / self.cycles.len() as f64
    }

    /// Same statistic restricted to cycles starting at or after `from_cycle`.
    pub fn recovered_fraction_from(&self, from_cycle: usize) -> f64 {
        RecoveryReport {
            cycles: self.cycles.iter().filter(|c| c.cycle >= from_cycle).cloned().collect(),
        }
        .recovered_fraction()
    }
}

/// Split the trace into cycles of `cycle` generations and find, per cycle,
/// the first generation with `|best - optimum| <= tolerance`.
pub fn recovery_statistics(trace: &RunTrace, cycle: usize, tolerance: f64) -> RecoveryReport {
    let cycle = cycle.max(1);
    let cycles = trace
        .records
        .chunks(cycle)
        .enumerate()
        .map(|(i, chunk)| CycleRecovery {
            cycle: i,
            start: i * cycle,
            recovered_after: chunk
                .iter()
                .position(|r| (r.best - r.optimum).abs() <= tolerance),
        })
        .collect();
    RecoveryReport { cycles }
}

/// Exact hits for the traps; the decoding-grid floor for the moving parabola.
pub fn default_recovery_tolerance(problem: &ProblemSpec) -> f64 {
    match problem {
        ProblemSpec::MovingParabola { .. } => 0.02,
        _ => 1e-9,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::problems::Sense;
    use crate::solvers::TraceRecord;

    fn trace(best: &[f64], optimum: f64) -> RunTrace {
        RunTrace {
            seed: 0,
            sense: Sense::Maximize,
            restarts: 0,
            records: best
                .iter()
                .enumerate()
                .map(|(t, &b)| TraceRecord {
                    generation: t,
                    phase: 0,
                    changed: false,
                    best: b,
                    mean: b,
                    optimum,
                    partition: None,
                    restart_partition: None,
                    evals: 0,
                })
                .collect(),
        }
    }

    #[test]
    fn pinned_at_optimum() {
        let r = recovery_statistics(&trace(&[5.0; 10], 5.0), 5, 1e-9);
        assert_eq!(r.cycles.len(), 2);
        assert!(r.cycles.iter().all(|c| c.recovered_after == Some(0)));
        assert_eq!(r.recovered_fraction(), 1.0);
    }

    #[test]
    fn never_reaching_optimum() {
        let r = recovery_statistics(&trace(&[4.0; 10], 5.0), 5, 1e-9);
        assert_eq!(r.recovered_fraction(), 0.0);
        assert!(r.cycles.iter().all(|c| c.recovered_after.is_none()));
    }

    #[test]
    fn partial_recovery() {
        let best = [1.0, 2.0, 5.0, 5.0, 1.0, 3.0, 4.0, 4.5];
        let r = recovery_statistics(&trace(&best, 5.0), 4, 1e-9);
        assert_eq!(r.cycles[0].recovered_after, Some(2));
        assert_eq!(r.cycles[1].recovered_after, None);
        assert_eq!(r.recovered_fraction(), 0.5);
        assert_eq!(r.recovered_fraction_from(1), 0.0);
    }
}
