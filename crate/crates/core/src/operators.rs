//! Selection and variation operators. None of them mutate alleles.

use rand::seq::SliceRandom;
use rand::RngCore;

use crate::error::{Error, Result};
use crate::genome::{pick, Genome, Individual, Population};
use crate::model::GenePartition;
use crate::problems::Sense;

pub const DEFAULT_TOURNAMENT_SIZE: usize = 16;

/// Tournament selection without replacement.
///
/// Each pass shuffles the population, cuts it into consecutive blocks of
/// `size` (a short trailing block is dropped) and keeps each block's best
/// member. Passes repeat until `pop.len()` winners exist; the last pass is
/// truncated. Ties inside a block go to the earlier position in the shuffle.
pub fn tournament_select<R: RngCore + ?Sized>(
    pop: &Population,
    size: usize,
    sense: Sense,
    rng: &mut R,
) -> Result<Population> {
    let n = pop.len();
    if size < 2 || size > n {
        return Err(Error::config(format!(
            "tournament size must be in 2..={n}, got {size}"
        )));
    }
    let fitness = pop
        .members()
        .iter()
        .map(Individual::fitness)
        .collect::<Result<Vec<_>>>()?;

    let mut order: Vec<usize> = (0..n).collect();
    let mut winners = Vec::with_capacity(n);
    while winners.len() < n {
        order.shuffle(rng);
        for block in order.chunks_exact(size) {
            let mut best = block[0];
            for &c in &block[1..] {
                if sense.better(fitness[c], fitness[best]) {
                    best = c;
                }
            }
            winners.push(pop.members()[best].clone());
            if winners.len() == n {
                break;
            }
        }
    }
    Ok(Population::from_members(winners, pop.genome_length()))
}

/// Building-block-wise crossover: every group of every offspring is copied
/// from an independently chosen member of `selected`.
///
/// This samples the marginal product model estimated from `selected`
/// without materialising its tables.
pub fn bb_wise_crossover<R: RngCore + ?Sized>(
    selected: &Population,
    partition: &GenePartition,
    out_size: usize,
    rng: &mut R,
) -> Result<Population> {
    if selected.is_empty() {
        return Err(Error::logic("crossover needs at least one selected individual"));
    }
    let l = selected.genome_length();
    if partition.genome_length() != l {
        return Err(Error::config(format!(
            "partition covers {} genes but genomes have {l}",
            partition.genome_length()
        )));
    }
    let parents = selected.members();
    let offspring = (0..out_size)
        .map(|_| {
            let mut child = Genome::zeros(l);
            for group in partition.groups() {
                let donor = &parents[pick(rng, parents.len())].genome;
                for &i in group {
                    if donor.get(i) {
                        child.set(i, true);
                    }
                }
            }
            Individual::new(child)
        })
        .collect();
    Ok(Population::from_members(offspring, l))
}

/// Uniform crossover with probability 1 over random disjoint parent pairs.
///
/// Each pair yields two complementary children: every locus is swapped
/// between the parents with probability 1/2. Pairing repeats on fresh
/// shuffles until `out_size` children exist.
pub fn uniform_crossover<R: RngCore + ?Sized>(
    selected: &Population,
    out_size: usize,
    rng: &mut R,
) -> Result<Population> {
    let n = selected.len();
    if n < 2 {
        return Err(Error::logic("uniform crossover needs at least two parents"));
    }
    let l = selected.genome_length();
    let parents = selected.members();
    let mut order: Vec<usize> = (0..n).collect();
    let mut offspring = Vec::with_capacity(out_size);
    while offspring.len() < out_size {
        order.shuffle(rng);
        for pair in order.chunks_exact(2) {
            let a = parents[pair[0]].genome.words();
            let b = parents[pair[1]].genome.words();
            let mut c1 = Vec::with_capacity(a.len());
            let mut c2 = Vec::with_capacity(a.len());
            for (&wa, &wb) in a.iter().zip(b) {
                let swap = rng.next_u64();
                c1.push((wa & !swap) | (wb & swap));
                c2.push((wb & !swap) | (wa & swap));
            }
            for child in [c1, c2] {
                if offspring.len() < out_size {
                    offspring.push(Individual::new(Genome::from_words(child, l)));
                }
            }
            if offspring.len() == out_size {
                break;
            }
        }
    }
    Ok(Population::from_members(offspring, l))
}
