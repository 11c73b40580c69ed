//! Dynamic bounded-difficulty benchmarks.
//!
//! All trap families are additively separable over consecutive blocks
//! (block `j` covers indices `j*k .. j*k + k - 1`). Value tables are indexed
//! by the number of ones `u` in a block.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::genome::Genome;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Sense {
    Maximize,
    Minimize,
}

impl Sense {
    /// Strictly better.
    #[inline]
    pub fn better(self, a: f64, b: f64) -> bool {
        match self {
            Sense::Maximize => a > b,
            Sense::Minimize => a < b,
        }
    }

    /// `a` is at least as good as `b`.
    pub fn at_least(self, a: f64, b: f64) -> bool {
        !self.better(b, a)
    }
}

/// Phase-dependent fitness function.
pub trait DynamicProblem {
    fn genome_length(&self) -> usize;

    fn sense(&self) -> Sense;

    fn phase_count(&self) -> usize {
        2
    }

    /// Pure function of `(genome, phase)` and the current environment state.
    fn evaluate(&self, genome: &Genome, phase: usize) -> Result<f64>;

    /// Best achievable value in `phase` under the current environment state.
    fn optimum_value(&self, phase: usize) -> f64;

    /// Called once per change event, between generations.
    fn on_change(&mut self) {}

    /// Gene index groups that form the building blocks in `phase`, if known.
    fn blocks(&self, _phase: usize) -> Option<Vec<Vec<usize>>> {
        None
    }
}

fn check_length(genome: &Genome, expected: usize) -> Result<()> {
    if genome.len() != expected {
        return Err(Error::config(format!(
            "genome length {} does not match problem length {expected}",
            genome.len()
        )));
    }
    Ok(())
}

fn check_phase(phase: usize, count: usize) -> Result<()> {
    if phase >= count {
        return Err(Error::logic(format!("phase {phase} out of range 0..{count}")));
    }
    Ok(())
}

fn consecutive_blocks(length: usize, width: usize) -> Vec<Vec<usize>> {
    (0..length / width)
        .map(|j| (j * width..(j + 1) * width).collect())
        .collect()
}

fn sum_blocks(genome: &Genome, width: usize, table: &[f64]) -> f64 {
    (0..genome.len() / width)
        .map(|j| table[genome.count_ones_in(j * width, width)])
        .sum()
}

/// Deceptive trap of order `k` over the ones-count `u`:
/// `high` at `u == k`, otherwise `low - u * low / (k - 1)`.
pub fn trap_value(u: usize, k: usize, low: f64, high: f64) -> Result<f64> {
    if k < 2 {
        return Err(Error::logic(format!("trap order must be ≥ 2, got {k}")));
    }
    if u > k {
        return Err(Error::logic(format!("ones count {u} exceeds trap order {k}")));
    }
    Ok(if u == k {
        high
    } else {
        low - u as f64 * low / (k - 1) as f64
    })
}

/// Cyclic trap-k: the optimum alternates between all zeros (even phases)
/// and all ones (odd phases). The static variant always rewards all ones.
#[derive(Debug, Clone, PartialEq)]
pub struct DynamicTrap {
    k: usize,
    blocks: usize,
    low: f64,
    high: f64,
    dynamic: bool,
    table: Vec<f64>,
}

impl DynamicTrap {
    /// `low = k`, `high = k + 1`.
    pub fn new(k: usize, blocks: usize) -> Result<Self> {
        Self::with_values(k, blocks, k as f64, (k + 1) as f64, true)
    }

    pub fn static_trap(k: usize, blocks: usize) -> Result<Self> {
        Self::with_values(k, blocks, k as f64, (k + 1) as f64, false)
    }

    pub fn with_values(k: usize, blocks: usize, low: f64, high: f64, dynamic: bool) -> Result<Self> {
        if k < 2 {
            return Err(Error::config(format!("trap order k must be ≥ 2, got {k}")));
        }
        if blocks == 0 {
            return Err(Error::config("blocks must be ≥ 1"));
        }
        if high <= low {
            return Err(Error::config("trap high must exceed low"));
        }
        let table = (0..=k)
            .map(|u| trap_value(u, k, low, high))
            .collect::<Result<_>>()?;
        Ok(DynamicTrap {
            k,
            blocks,
            low,
            high,
            dynamic,
            table,
        })
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn block_count(&self) -> usize {
        self.blocks
    }

    pub fn is_dynamic(&self) -> bool {
        self.dynamic
    }

    /// Block score given the raw ones-count of a block.
    pub fn block_value(&self, ones: usize, phase: usize) -> f64 {
        let u = if self.dynamic && phase.is_multiple_of(2) {
            self.k - ones
        } else {
            ones
        };
        self.table[u]
    }
}

impl DynamicProblem for DynamicTrap {
    fn genome_length(&self) -> usize {
        self.k * self.blocks
    }

    fn sense(&self) -> Sense {
        Sense::Maximize
    }

    fn phase_count(&self) -> usize {
        if self.dynamic {
            2
        } else {
            1
        }
    }

    fn evaluate(&self, genome: &Genome, phase: usize) -> Result<f64> {
        check_length(genome, self.genome_length())?;
        check_phase(phase, self.phase_count())?;
        Ok((0..self.blocks)
            .map(|j| self.block_value(genome.count_ones_in(j * self.k, self.k), phase))
            .sum())
    }

    fn optimum_value(&self, _phase: usize) -> f64 {
        self.blocks as f64 * self.high.max(self.low)
    }

    fn blocks(&self, _phase: usize) -> Option<Vec<Vec<usize>>> {
        Some(consecutive_blocks(self.genome_length(), self.k))
    }
}

/// Phase-0 table of the asymmetric trap-4: optimum 5 at `u = 0`, deceptive
/// attractor 4 at `u = 3`, value `4u/3` for `1 <= u <= 3` and 0 at `u = 4`.
pub const MODIFIED_TRAP4_PHASE0: [f64; 5] = [5.0, 4.0 / 3.0, 8.0 / 3.0, 4.0, 0.0];
/// Phase-1 table: the phase-0 table read with `u -> 4 - u`.
pub const MODIFIED_TRAP4_PHASE1: [f64; 5] = [0.0, 4.0, 8.0 / 3.0, 4.0 / 3.0, 5.0];
/// Order-3 table of the switching trap: optimum 4 at `u = 3`, attractor 3 at `u = 1`.
pub const SWITCHING_TRAP3: [f64; 4] = [0.0, 3.0, 1.5, 4.0];

/// Trap-4 whose attractors are not bit complements of each other.
#[derive(Debug, Clone, PartialEq)]
pub struct ModifiedTrap4 {
    blocks: usize,
    tables: [Vec<f64>; 2],
}

impl ModifiedTrap4 {
    pub fn new(blocks: usize) -> Result<Self> {
        Self::with_tables(
            blocks,
            MODIFIED_TRAP4_PHASE0.to_vec(),
            MODIFIED_TRAP4_PHASE1.to_vec(),
        )
    }

    pub fn with_tables(blocks: usize, phase0: Vec<f64>, phase1: Vec<f64>) -> Result<Self> {
        if blocks == 0 {
            return Err(Error::config("blocks must be ≥ 1"));
        }
        if phase0.len() != 5 || phase1.len() != 5 {
            return Err(Error::config("modified trap-4 tables need 5 entries"));
        }
        Ok(ModifiedTrap4 {
            blocks,
            tables: [phase0, phase1],
        })
    }

    pub fn table(&self, phase: usize) -> &[f64] {
        &self.tables[phase % 2]
    }
}

impl DynamicProblem for ModifiedTrap4 {
    fn genome_length(&self) -> usize {
        4 * self.blocks
    }

    fn sense(&self) -> Sense {
        Sense::Maximize
    }

    fn evaluate(&self, genome: &Genome, phase: usize) -> Result<f64> {
        check_length(genome, self.genome_length())?;
        check_phase(phase, 2)?;
        Ok(sum_blocks(genome, 4, self.table(phase)))
    }

    fn optimum_value(&self, phase: usize) -> f64 {
        self.blocks as f64 * self.table(phase).iter().cloned().fold(f64::MIN, f64::max)
    }

    fn blocks(&self, _phase: usize) -> Option<Vec<Vec<usize>>> {
        Some(consecutive_blocks(self.genome_length(), 4))
    }
}

/// Alternates between order-4 blocks (phase 0, optimum all zeros) and
/// order-3 blocks (phase 1, optimum all ones), so the linkage itself moves.
#[derive(Debug, Clone, PartialEq)]
pub struct SwitchingTrap {
    length: usize,
    trap4: Vec<f64>,
    trap3: Vec<f64>,
}

impl SwitchingTrap {
    pub fn new(length: usize) -> Result<Self> {
        Self::with_tables(length, MODIFIED_TRAP4_PHASE0.to_vec(), SWITCHING_TRAP3.to_vec())
    }

    pub fn with_tables(length: usize, trap4: Vec<f64>, trap3: Vec<f64>) -> Result<Self> {
        if length == 0 || !length.is_multiple_of(12) {
            return Err(Error::config(format!(
                "switching trap length must be a positive multiple of 12, got {length}"
            )));
        }
        if trap4.len() != 5 || trap3.len() != 4 {
            return Err(Error::config("switching trap tables need 5 and 4 entries"));
        }
        Ok(SwitchingTrap {
            length,
            trap4,
            trap3,
        })
    }

    fn width(phase: usize) -> usize {
        if phase.is_multiple_of(2) {
            4
        } else {
            3
        }
    }

    fn table(&self, phase: usize) -> &[f64] {
        if phase.is_multiple_of(2) {
            &self.trap4
        } else {
            &self.trap3
        }
    }
}

impl DynamicProblem for SwitchingTrap {
    fn genome_length(&self) -> usize {
        self.length
    }

    fn sense(&self) -> Sense {
        Sense::Maximize
    }

    fn evaluate(&self, genome: &Genome, phase: usize) -> Result<f64> {
        check_length(genome, self.length)?;
        check_phase(phase, 2)?;
        Ok(sum_blocks(genome, Self::width(phase), self.table(phase)))
    }

    fn optimum_value(&self, phase: usize) -> f64 {
        let best = self.table(phase).iter().cloned().fold(f64::MIN, f64::max);
        (self.length / Self::width(phase)) as f64 * best
    }

    fn blocks(&self, phase: usize) -> Option<Vec<Vec<usize>>> {
        Some(consecutive_blocks(self.length, Self::width(phase)))
    }
}

/// Map an unsigned `width`-bit integer onto `[lower, upper]`.
#[inline]
pub fn decode_uint(value: u64, width: u32, lower: f64, upper: f64) -> f64 {
    let max = ((1u128 << width) - 1) as f64;
    lower + (upper - lower) * value as f64 / max
}

/// Big-endian plain-binary decoding of `bits` onto `[lower, upper]`.
pub fn decode_binary(bits: &[bool], lower: f64, upper: f64) -> Result<f64> {
    if bits.is_empty() || bits.len() > 64 {
        return Err(Error::config("decode_binary needs 1..=64 bits"));
    }
    let v = bits.iter().fold(0u64, |acc, &b| (acc << 1) | b as u64);
    Ok(decode_uint(v, bits.len() as u32, lower, upper))
}

/// `f(x) = Σ (x_i + δ_i)²`, minimised; every change adds `severity` to each `δ_i`.
#[derive(Debug, Clone, PartialEq)]
pub struct MovingParabola {
    variables: usize,
    bits_per_var: u32,
    bound: f64,
    severity: f64,
    offset: Vec<f64>,
}

impl Default for MovingParabola {
    fn default() -> Self {
        MovingParabola::new(10, 10, 40.0, 1.0).expect("default parabola is valid")
    }
}

impl MovingParabola {
    pub fn new(variables: usize, bits_per_var: u32, bound: f64, severity: f64) -> Result<Self> {
        if variables == 0 {
            return Err(Error::config("variables must be ≥ 1"));
        }
        if bits_per_var == 0 || bits_per_var > 32 {
            return Err(Error::config("bits_per_var must be in 1..=32"));
        }
        if !(bound > 0.0 && bound.is_finite()) {
            return Err(Error::config("bound must be positive"));
        }
        if !severity.is_finite() {
            return Err(Error::config("severity must be finite"));
        }
        Ok(MovingParabola {
            variables,
            bits_per_var,
            bound,
            severity,
            offset: vec![0.0; variables],
        })
    }

    pub fn offset(&self) -> &[f64] {
        &self.offset
    }

    pub fn set_offset(&mut self, offset: Vec<f64>) -> Result<()> {
        if offset.len() != self.variables {
            return Err(Error::config("offset length must equal the variable count"));
        }
        self.offset = offset;
        Ok(())
    }

    /// `δ_i += severity` for every variable.
    pub fn advance_environment(&mut self) {
        for d in &mut self.offset {
            *d += self.severity;
        }
    }

    pub fn decode(&self, genome: &Genome) -> Vec<f64> {
        let w = self.bits_per_var as usize;
        (0..self.variables)
            .map(|i| decode_uint(genome.read_uint(i * w, w), self.bits_per_var, -self.bound, self.bound))
            .collect()
    }

    /// Smallest `(x + δ)²` over the decoding grid.
    fn best_term(&self, delta: f64) -> f64 {
        let max = ((1u64 << self.bits_per_var) - 1) as f64;
        let ideal = (-delta + self.bound) / (2.0 * self.bound) * max;
        let centre = ideal.round().clamp(0.0, max) as i64;
        (centre - 1..=centre + 1)
            .filter(|&v| v >= 0 && v as f64 <= max)
            .map(|v| {
                let x = decode_uint(v as u64, self.bits_per_var, -self.bound, self.bound);
                (x + delta).powi(2)
            })
            .fold(f64::INFINITY, f64::min)
    }
}

impl DynamicProblem for MovingParabola {
    fn genome_length(&self) -> usize {
        self.variables * self.bits_per_var as usize
    }

    fn sense(&self) -> Sense {
        Sense::Minimize
    }

    fn evaluate(&self, genome: &Genome, _phase: usize) -> Result<f64> {
        check_length(genome, self.genome_length())?;
        Ok(self
            .decode(genome)
            .iter()
            .zip(&self.offset)
            .map(|(x, d)| (x + d).powi(2))
            .sum())
    }

    fn optimum_value(&self, _phase: usize) -> f64 {
        self.offset.iter().map(|&d| self.best_term(d)).sum()
    }

    fn on_change(&mut self) {
        self.advance_environment();
    }
}

fn default_variables() -> usize {
    10
}
fn default_bits() -> u32 {
    10
}
fn default_bound() -> f64 {
    40.0
}
fn default_severity() -> f64 {
    1.0
}

/// Serializable problem description used in configs and on the CLI.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum ProblemSpec {
    DynamicTrap {
        k: usize,
        blocks: usize,
    },
    StaticTrap {
        k: usize,
        blocks: usize,
    },
    #[serde(rename = "modified_trap4")]
    ModifiedTrap4 {
        blocks: usize,
    },
    SwitchingTrap {
        length: usize,
    },
    MovingParabola {
        #[serde(default = "default_variables")]
        variables: usize,
        #[serde(default = "default_bits")]
        bits_per_var: u32,
        #[serde(default = "default_bound")]
        bound: f64,
        #[serde(default = "default_severity")]
        severity: f64,
    },
}

/// Catalog names accepted in the `type` field.
pub const PROBLEM_NAMES: [&str; 5] = [
    "dynamic_trap",
    "modified_trap4",
    "switching_trap",
    "moving_parabola",
    "static_trap",
];

impl ProblemSpec {
    pub fn moving_parabola() -> Self {
        ProblemSpec::MovingParabola {
            variables: default_variables(),
            bits_per_var: default_bits(),
            bound: default_bound(),
            severity: default_severity(),
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            ProblemSpec::DynamicTrap { .. } => "dynamic_trap",
            ProblemSpec::StaticTrap { .. } => "static_trap",
            ProblemSpec::ModifiedTrap4 { .. } => "modified_trap4",
            ProblemSpec::SwitchingTrap { .. } => "switching_trap",
            ProblemSpec::MovingParabola { .. } => "moving_parabola",
        }
    }

    pub fn build(&self) -> Result<Problem> {
        Ok(match *self {
            ProblemSpec::DynamicTrap { k, blocks } => Problem::Trap(DynamicTrap::new(k, blocks)?),
            ProblemSpec::StaticTrap { k, blocks } => Problem::Trap(DynamicTrap::static_trap(k, blocks)?),
            ProblemSpec::ModifiedTrap4 { blocks } => Problem::ModifiedTrap4(ModifiedTrap4::new(blocks)?),
            ProblemSpec::SwitchingTrap { length } => Problem::SwitchingTrap(SwitchingTrap::new(length)?),
            ProblemSpec::MovingParabola {
                variables,
                bits_per_var,
                bound,
                severity,
            } => Problem::MovingParabola(MovingParabola::new(variables, bits_per_var, bound, severity)?),
        })
    }
}

/// Any catalog problem.
#[derive(Debug, Clone, PartialEq)]
pub enum Problem {
    Trap(DynamicTrap),
    ModifiedTrap4(ModifiedTrap4),
    SwitchingTrap(SwitchingTrap),
    MovingParabola(MovingParabola),
}

macro_rules! delegate {
    ($self:ident, $p:ident => $e:expr) => {
        match $self {
            Problem::Trap($p) => $e,
            Problem::ModifiedTrap4($p) => $e,
            Problem::SwitchingTrap($p) => $e,
            Problem::MovingParabola($p) => $e,
        }
    };
}

impl DynamicProblem for Problem {
    fn genome_length(&self) -> usize {
        delegate!(self, p => p.genome_length())
    }

    fn sense(&self) -> Sense {
        delegate!(self, p => p.sense())
    }

    fn phase_count(&self) -> usize {
        delegate!(self, p => p.phase_count())
    }

    fn evaluate(&self, genome: &Genome, phase: usize) -> Result<f64> {
        delegate!(self, p => p.evaluate(genome, phase))
    }

    fn optimum_value(&self, phase: usize) -> f64 {
        delegate!(self, p => p.optimum_value(phase))
    }

    fn on_change(&mut self) {
        delegate!(self, p => p.on_change())
    }

    fn blocks(&self, phase: usize) -> Option<Vec<Vec<usize>>> {
        delegate!(self, p => p.blocks(phase))
    }
}

/// Exhaustive search diagnostic: evaluations needed to enumerate every
/// configuration of `blocks` independent order-`k` blocks.
pub fn block_enumeration_cost(blocks: u64, k: u32) -> u64 {
    blocks * (1u64 << k)
}
