//! Cyclic environment clock and change detection.

use crate::error::{Error, Result};
use crate::genome::Individual;
use crate::problems::DynamicProblem;

/// Absolute tolerance used by [`sentinel_change_detected`].
pub const SENTINEL_TOLERANCE: f64 = 1e-9;

/// The environment switches phase every `cycle` generations and wraps after
/// `phase_count` phases.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct EnvironmentClock {
    cycle: u64,
    phase_count: usize,
}

impl EnvironmentClock {
    pub fn new(cycle: u64, phase_count: usize) -> Result<Self> {
        if cycle == 0 {
            return Err(Error::config("cycle must be ≥ 1"));
        }
        if phase_count == 0 {
            return Err(Error::config("phase count must be ≥ 1"));
        }
        Ok(EnvironmentClock { cycle, phase_count })
    }

    pub fn cycle(&self) -> u64 {
        self.cycle
    }

    pub fn phase_count(&self) -> usize {
        self.phase_count
    }

    /// Index of the cycle containing generation `t`, i.e. changes seen so far.
    pub fn epoch(&self, t: u64) -> u64 {
        t / self.cycle
    }

    pub fn phase(&self, t: u64) -> usize {
        (self.epoch(t) % self.phase_count as u64) as usize
    }

    /// Oracle detection: a change happens at every positive multiple of the cycle.
    pub fn oracle_change_detected(&self, t: u64) -> bool {
        t > 0 && t.is_multiple_of(self.cycle)
    }
}

/// Re-evaluate a previously evaluated individual and report whether its
/// fitness moved by more than `tolerance`.
pub fn sentinel_change_detected<P: DynamicProblem + ?Sized>(
    sentinel: &Individual,
    problem: &P,
    phase: usize,
    tolerance: f64,
) -> Result<bool> {
    let stored = sentinel.fitness()?;
    let now = problem.evaluate(&sentinel.genome, phase)?;
    Ok((now - stored).abs() > tolerance)
}
