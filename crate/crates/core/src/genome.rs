//! Bit-string genomes, evaluated individuals and populations.

use std::fmt;
use std::str::FromStr;

use rand::{Rng, RngCore};

use crate::error::{Error, Result};
use crate::problems::{DynamicProblem, Sense};

const WORD: usize = 64;

/// Fixed-length binary string, packed 64 alleles per word.
///
/// Bits beyond `len` in the last word are always zero.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct Genome {
    words: Vec<u64>,
    len: usize,
}

impl Genome {
    pub fn zeros(len: usize) -> Self {
        Genome {
            words: vec![0; len.div_ceil(WORD)],
            len,
        }
    }

    pub fn ones(len: usize) -> Self {
        let mut g = Genome {
            words: vec![u64::MAX; len.div_ceil(WORD)],
            len,
        };
        g.clear_tail();
        g
    }

    pub fn from_bits<I: IntoIterator<Item = bool>>(bits: I) -> Self {
        let bits: Vec<bool> = bits.into_iter().collect();
        let mut g = Genome::zeros(bits.len());
        for (i, b) in bits.into_iter().enumerate() {
            g.set(i, b);
        }
        g
    }

    /// Each allele independently 0 or 1 with probability 1/2.
    pub fn random<R: RngCore + ?Sized>(len: usize, rng: &mut R) -> Self {
        let mut g = Genome {
            words: (0..len.div_ceil(WORD)).map(|_| rng.next_u64()).collect(),
            len,
        };
        g.clear_tail();
        g
    }

    fn clear_tail(&mut self) {
        let rem = self.len % WORD;
        if rem != 0 {
            if let Some(last) = self.words.last_mut() {
                *last &= (1u64 << rem) - 1;
            }
        }
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    #[inline]
    pub fn get(&self, i: usize) -> bool {
        debug_assert!(i < self.len);
        (self.words[i / WORD] >> (i % WORD)) & 1 == 1
    }

    #[inline]
    pub fn set(&mut self, i: usize, bit: bool) {
        debug_assert!(i < self.len);
        let mask = 1u64 << (i % WORD);
        if bit {
            self.words[i / WORD] |= mask;
        } else {
            self.words[i / WORD] &= !mask;
        }
    }

    pub fn count_ones(&self) -> usize {
        self.words.iter().map(|w| w.count_ones() as usize).sum()
    }

    /// Number of ones among indices `start..start + width`.
    pub fn count_ones_in(&self, start: usize, width: usize) -> usize {
        debug_assert!(start + width <= self.len);
        let mut count = 0;
        let mut pos = start;
        let end = start + width;
        while pos < end {
            let offset = pos % WORD;
            let take = (WORD - offset).min(end - pos);
            let mask = if take == WORD { u64::MAX } else { ((1u64 << take) - 1) << offset };
            count += (self.words[pos / WORD] & mask).count_ones() as usize;
            pos += take;
        }
        count
    }

    /// Alleles `start..start + width` read as a big-endian unsigned integer.
    pub fn read_uint(&self, start: usize, width: usize) -> u64 {
        (start..start + width).fold(0, |acc, i| (acc << 1) | self.get(i) as u64)
    }

    pub fn complement(&self) -> Genome {
        let mut g = Genome {
            words: self.words.iter().map(|w| !w).collect(),
            len: self.len,
        };
        g.clear_tail();
        g
    }

    pub fn iter(&self) -> impl Iterator<Item = bool> + '_ {
        (0..self.len).map(|i| self.get(i))
    }

    pub fn words(&self) -> &[u64] {
        &self.words
    }

    pub(crate) fn from_words(words: Vec<u64>, len: usize) -> Self {
        debug_assert_eq!(words.len(), len.div_ceil(WORD));
        let mut g = Genome { words, len };
        g.clear_tail();
        g
    }
}

impl fmt::Display for Genome {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for b in self.iter() {
            f.write_str(if b { "1" } else { "0" })?;
        }
        Ok(())
    }
}

impl fmt::Debug for Genome {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Genome({self})")
    }
}

impl FromStr for Genome {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        s.chars()
            .map(|c| match c {
                '0' => Ok(false),
                '1' => Ok(true),
                other => Err(Error::config(format!("invalid allele {other:?}"))),
            })
            .collect::<Result<Vec<_>>>()
            .map(Genome::from_bits)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Individual {
    pub genome: Genome,
    pub fitness: Option<f64>,
    pub evaluated_phase: Option<usize>,
}

impl Individual {
    pub fn new(genome: Genome) -> Self {
        Individual {
            genome,
            fitness: None,
            evaluated_phase: None,
        }
    }

    pub fn fitness(&self) -> Result<f64> {
        self.fitness
            .ok_or_else(|| Error::logic("individual has not been evaluated"))
    }

    pub fn evaluate<P: DynamicProblem + ?Sized>(&mut self, problem: &P, phase: usize) -> Result<()> {
        let value = problem.evaluate(&self.genome, phase)?;
        self.fitness = Some(value);
        self.evaluated_phase = Some(phase);
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Population {
    members: Vec<Individual>,
    genome_length: usize,
}

impl Population {
    /// Build from genomes that must all share one length.
    pub fn from_genomes(genomes: Vec<Genome>) -> Result<Self> {
        let genome_length = genomes
            .first()
            .map(Genome::len)
            .ok_or_else(|| Error::config("population must not be empty"))?;
        if genomes.iter().any(|g| g.len() != genome_length) {
            return Err(Error::config("genomes in a population must share one length"));
        }
        Ok(Population {
            members: genomes.into_iter().map(Individual::new).collect(),
            genome_length,
        })
    }

    pub(crate) fn from_members(members: Vec<Individual>, genome_length: usize) -> Self {
        debug_assert!(members.iter().all(|m| m.genome.len() == genome_length));
        Population {
            members,
            genome_length,
        }
    }

    pub fn len(&self) -> usize {
        self.members.len()
    }

    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }

    pub fn genome_length(&self) -> usize {
        self.genome_length
    }

    pub fn members(&self) -> &[Individual] {
        &self.members
    }

    pub fn genomes(&self) -> impl Iterator<Item = &Genome> {
        self.members.iter().map(|m| &m.genome)
    }

    pub fn into_members(self) -> Vec<Individual> {
        self.members
    }

    pub fn is_evaluated(&self) -> bool {
        self.members.iter().all(|m| m.fitness.is_some())
    }

    /// Evaluate every member at `phase`; returns the number of evaluations.
    pub fn evaluate<P: DynamicProblem + ?Sized>(&mut self, problem: &P, phase: usize) -> Result<u64> {
        if problem.genome_length() != self.genome_length {
            return Err(Error::config(format!(
                "genome length {} does not match problem length {}",
                self.genome_length,
                problem.genome_length()
            )));
        }
        for m in &mut self.members {
            m.evaluate(problem, phase)?;
        }
        Ok(self.members.len() as u64)
    }

    /// Member with the best fitness under `sense`; ties go to the lowest index.
    pub fn best(&self, sense: Sense) -> Result<&Individual> {
        let mut best: Option<(&Individual, f64)> = None;
        for m in &self.members {
            let f = m.fitness()?;
            if best.is_none_or(|(_, b)| sense.better(f, b)) {
                best = Some((m, f));
            }
        }
        best.map(|(m, _)| m)
            .ok_or_else(|| Error::logic("empty population"))
    }

    pub fn mean_fitness(&self) -> Result<f64> {
        let mut sum = 0.0;
        for m in &self.members {
            sum += m.fitness()?;
        }
        Ok(sum / self.members.len() as f64)
    }

    /// Fraction of members carrying a 1 at `locus`.
    pub fn allele_frequency(&self, locus: usize) -> f64 {
        let ones = self.genomes().filter(|g| g.get(locus)).count();
        ones as f64 / self.len() as f64
    }
}

/// Uniformly random, unevaluated population.
pub fn random_population<R: RngCore + ?Sized>(
    size: usize,
    genome_length: usize,
    rng: &mut R,
) -> Result<Population> {
    if size < 2 {
        return Err(Error::config(format!("population size must be ≥ 2, got {size}")));
    }
    if genome_length == 0 {
        return Err(Error::config("genome length must be ≥ 1"));
    }
    let genomes = (0..size).map(|_| Genome::random(genome_length, rng)).collect();
    Population::from_genomes(genomes)
}

/// Uniform index in `0..n`.
#[inline]
pub(crate) fn pick<R: RngCore + ?Sized>(rng: &mut R, n: usize) -> usize {
    rng.random_range(0..n)
}
