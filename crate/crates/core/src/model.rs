//! Marginal product models and MDL-guided linkage learning.
//!
//! Entropies are in bits. A group's configuration key reads its genes in
//! ascending index order with the lowest index as the most significant bit.

use std::collections::BTreeMap;
use std::fmt;

use crate::error::{Error, Result};
use crate::genome::Population;

/// Largest group size the search will create (tables of `2^20` entries).
pub const DEFAULT_MERGE_CAP: usize = 20;

/// Relative tolerance under which two merge gains are treated as tied.
pub const TIE_TOLERANCE: f64 = 1e-12;

/// Disjoint cover of `0..length` by non-empty index groups, kept canonical:
/// indices ascending inside a group, groups ordered by smallest index.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct GenePartition {
    groups: Vec<Vec<usize>>,
    length: usize,
}

impl GenePartition {
    pub fn singletons(length: usize) -> Self {
        GenePartition {
            groups: (0..length).map(|i| vec![i]).collect(),
            length,
        }
    }

    pub fn new(mut groups: Vec<Vec<usize>>, length: usize) -> Result<Self> {
        let mut seen = vec![false; length];
        for g in &mut groups {
            if g.is_empty() {
                return Err(Error::config("partition groups must be non-empty"));
            }
            g.sort_unstable();
            for &i in g.iter() {
                if i >= length {
                    return Err(Error::config(format!("gene index {i} out of range 0..{length}")));
                }
                if std::mem::replace(&mut seen[i], true) {
                    return Err(Error::config(format!("gene index {i} appears in two groups")));
                }
            }
        }
        if let Some(missing) = seen.iter().position(|s| !s) {
            return Err(Error::config(format!("gene index {missing} is not covered")));
        }
        groups.sort_unstable_by_key(|g| g[0]);
        Ok(GenePartition { groups, length })
    }

    pub fn groups(&self) -> &[Vec<usize>] {
        &self.groups
    }

    pub fn genome_length(&self) -> usize {
        self.length
    }

    pub fn group_count(&self) -> usize {
        self.groups.len()
    }

    pub fn largest_group(&self) -> usize {
        self.groups.iter().map(Vec::len).max().unwrap_or(0)
    }

    /// True when `block` is exactly a union of groups of this partition.
    pub fn covers(&self, block: &[usize]) -> bool {
        self.groups.iter().all(|g| {
            let inside = g.iter().filter(|i| block.contains(i)).count();
            inside == 0 || inside == g.len()
        })
    }

    fn check_population(&self, pop: &Population) -> Result<()> {
        if pop.genome_length() != self.length {
            return Err(Error::config(format!(
                "partition covers {} genes but genomes have {}",
                self.length,
                pop.genome_length()
            )));
        }
        Ok(())
    }
}

/// Canonical text form, e.g. `[0,1,2|3,4|5]`.
impl fmt::Display for GenePartition {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("[")?;
        for (gi, g) in self.groups.iter().enumerate() {
            if gi > 0 {
                f.write_str("|")?;
            }
            for (i, idx) in g.iter().enumerate() {
                if i > 0 {
                    f.write_str(",")?;
                }
                write!(f, "{idx}")?;
            }
        }
        f.write_str("]")
    }
}

/// Configuration counts of one group.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum FrequencyTable {
    Dense(Vec<u32>),
    /// Used when `2^ν` exceeds the population size.
    Sparse(BTreeMap<u64, u32>),
}

impl FrequencyTable {
    pub fn count(&self, config: u64) -> u32 {
        match self {
            FrequencyTable::Dense(v) => v.get(config as usize).copied().unwrap_or(0),
            FrequencyTable::Sparse(m) => m.get(&config).copied().unwrap_or(0),
        }
    }

    pub fn total(&self) -> u64 {
        self.nonzero().map(|(_, c)| c as u64).sum()
    }

    /// `(configuration, count)` pairs with positive count, ascending by configuration.
    pub fn nonzero(&self) -> Box<dyn Iterator<Item = (u64, u32)> + '_> {
        match self {
            FrequencyTable::Dense(v) => Box::new(
                v.iter()
                    .enumerate()
                    .filter(|(_, &c)| c > 0)
                    .map(|(k, &c)| (k as u64, c)),
            ),
            FrequencyTable::Sparse(m) => Box::new(m.iter().map(|(&k, &c)| (k, c))),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct MarginalProductModel {
    partition: GenePartition,
    tables: Vec<FrequencyTable>,
    population_size: usize,
}

impl MarginalProductModel {
    pub fn partition(&self) -> &GenePartition {
        &self.partition
    }

    pub fn tables(&self) -> &[FrequencyTable] {
        &self.tables
    }

    pub fn population_size(&self) -> usize {
        self.population_size
    }

    /// Empirical probability of `config` in group `group`.
    pub fn probability(&self, group: usize, config: u64) -> f64 {
        self.tables[group].count(config) as f64 / self.population_size as f64
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MdlScore {
    pub compressed_population_complexity: f64,
    pub model_complexity: f64,
    pub total: f64,
}

/// Configuration key of `group` for every member of `pop`.
fn group_keys(pop: &Population, group: &[usize]) -> Vec<u64> {
    pop.genomes()
        .map(|g| group.iter().fold(0u64, |acc, &i| (acc << 1) | g.get(i) as u64))
        .collect()
}

fn entropy_of_counts<I: IntoIterator<Item = u64>>(counts: I, n: usize) -> f64 {
    let n = n as f64;
    let h: f64 = counts
        .into_iter()
        .filter(|&c| c > 0)
        .map(|c| {
            let p = c as f64 / n;
            -p * p.log2()
        })
        .sum();
    h.max(0.0)
}

/// Shannon entropy (bits) of the joint configuration of `group` in `pop`.
pub fn group_entropy(pop: &Population, group: &[usize]) -> Result<f64> {
    if pop.is_empty() {
        return Err(Error::config("population must not be empty"));
    }
    if group.is_empty() {
        return Err(Error::config("group must not be empty"));
    }
    if let Some(&bad) = group.iter().find(|&&i| i >= pop.genome_length()) {
        return Err(Error::config(format!(
            "gene index {bad} out of range 0..{}",
            pop.genome_length()
        )));
    }
    if group.len() > 64 {
        return Err(Error::config("groups larger than 64 genes are not supported"));
    }
    let mut counts: BTreeMap<u64, u64> = BTreeMap::new();
    for k in group_keys(pop, group) {
        *counts.entry(k).or_default() += 1;
    }
    Ok(entropy_of_counts(counts.into_values(), pop.len()))
}

/// `N * Σ_I H(group_I)`.
pub fn compressed_population_complexity(pop: &Population, partition: &GenePartition) -> Result<f64> {
    partition.check_population(pop)?;
    let mut sum = 0.0;
    for g in partition.groups() {
        sum += group_entropy(pop, g)?;
    }
    Ok(pop.len() as f64 * sum)
}

/// `log2(N + 1) * Σ_I (2^ν_I - 1)`.
pub fn model_complexity(partition: &GenePartition, n: usize) -> f64 {
    let params: f64 = partition
        .groups()
        .iter()
        .map(|g| 2f64.powi(g.len() as i32) - 1.0)
        .sum();
    (n as f64 + 1.0).log2() * params
}

pub fn mdl_score(pop: &Population, partition: &GenePartition) -> Result<MdlScore> {
    let cpc = compressed_population_complexity(pop, partition)?;
    let mc = model_complexity(partition, pop.len());
    Ok(MdlScore {
        compressed_population_complexity: cpc,
        model_complexity: mc,
        total: cpc + mc,
    })
}

/// Exact configuration counts of every group of `partition` in `pop`.
pub fn estimate_tables(partition: &GenePartition, pop: &Population) -> Result<MarginalProductModel> {
    partition.check_population(pop)?;
    if pop.is_empty() {
        return Err(Error::config("population must not be empty"));
    }
    let n = pop.len();
    let tables = partition
        .groups()
        .iter()
        .map(|g| {
            if g.len() > 63 {
                return Err(Error::config("groups larger than 63 genes are not supported"));
            }
            let keys = group_keys(pop, g);
            let size = 1usize << g.len();
            Ok(if size <= n.max(2) {
                let mut dense = vec![0u32; size];
                for k in keys {
                    dense[k as usize] += 1;
                }
                FrequencyTable::Dense(dense)
            } else {
                let mut sparse = BTreeMap::new();
                for k in keys {
                    *sparse.entry(k).or_insert(0u32) += 1;
                }
                FrequencyTable::Sparse(sparse)
            })
        })
        .collect::<Result<_>>()?;
    Ok(MarginalProductModel {
        partition: partition.clone(),
        tables,
        population_size: n,
    })
}

/// Result of a greedy search together with the MDL totals it passed through.
#[derive(Debug, Clone)]
pub struct SearchOutcome {
    pub model: MarginalProductModel,
    /// Total MDL of the all-singleton partition.
    pub initial_total: f64,
    /// Total MDL after each accepted merge.
    pub accepted_totals: Vec<f64>,
}

impl SearchOutcome {
    pub fn final_total(&self) -> f64 {
        self.accepted_totals.last().copied().unwrap_or(self.initial_total)
    }
}

/// Greedy pairwise merging from all singletons, stopping when no merge
/// strictly lowers the total MDL.
#[derive(Debug, Clone, Copy)]
pub struct ModelSearch {
    pub merge_cap: usize,
}

impl Default for ModelSearch {
    fn default() -> Self {
        ModelSearch {
            merge_cap: DEFAULT_MERGE_CAP,
        }
    }
}

pub fn greedy_model_search(pop: &Population) -> Result<MarginalProductModel> {
    ModelSearch::default().search(pop).map(|o| o.model)
}

struct GroupState {
    members: Vec<usize>,
    /// Per-individual configuration, members in `members` order.
    keys: Vec<u32>,
    entropy: f64,
}

struct Scorer {
    n: usize,
    log_n1: f64,
    /// `c * log2(c)` for `c = 0..=n`.
    clog: Vec<f64>,
    dense: Vec<u32>,
    touched: Vec<u32>,
    sorted: Vec<u32>,
}

impl Scorer {
    fn new(n: usize) -> Self {
        let clog = (0..=n)
            .map(|c| if c == 0 { 0.0 } else { c as f64 * (c as f64).log2() })
            .collect();
        Scorer {
            n,
            log_n1: (n as f64 + 1.0).log2(),
            clog,
            dense: Vec::new(),
            touched: Vec::new(),
            sorted: Vec::new(),
        }
    }

    fn entropy_from_clog(&self, sum_clog: f64) -> f64 {
        let n = self.n as f64;
        (n.log2() - sum_clog / n).max(0.0)
    }

    fn table_cost(&self, width: usize) -> f64 {
        self.log_n1 * ((1u64 << width) - 1) as f64
    }

    fn group_cost(&self, g: &GroupState) -> f64 {
        self.n as f64 * g.entropy + self.table_cost(g.members.len())
    }

    /// Entropy of the concatenated configuration `(a << width_b) | b`.
    fn merged_entropy(&mut self, a: &[u32], b: &[u32], width_b: usize, width: usize) -> f64 {
        let size = 1usize << width;
        let sum = if size <= (4 * self.n).max(1 << 12) {
            if self.dense.len() < size {
                self.dense.resize(size, 0);
            }
            self.touched.clear();
            for (&ka, &kb) in a.iter().zip(b) {
                let k = (ka << width_b) | kb;
                let slot = &mut self.dense[k as usize];
                if *slot == 0 {
                    self.touched.push(k);
                }
                *slot += 1;
            }
            let mut sum = 0.0;
            for &k in &self.touched {
                let slot = &mut self.dense[k as usize];
                sum += self.clog[*slot as usize];
                *slot = 0;
            }
            sum
        } else {
            self.sorted.clear();
            self.sorted
                .extend(a.iter().zip(b).map(|(&ka, &kb)| (ka << width_b) | kb));
            self.sorted.sort_unstable();
            let mut sum = 0.0;
            for run in self.sorted.chunk_by(|x, y| x == y) {
                sum += self.clog[run.len()];
            }
            sum
        };
        self.entropy_from_clog(sum)
    }
}

impl ModelSearch {
    pub fn search(&self, pop: &Population) -> Result<SearchOutcome> {
        if pop.is_empty() {
            return Err(Error::config("population must not be empty"));
        }
        if self.merge_cap == 0 || self.merge_cap > 31 {
            return Err(Error::config("merge cap must be in 1..=31"));
        }
        let n = pop.len();
        let l = pop.genome_length();
        let mut scorer = Scorer::new(n);

        // Bit columns: column[locus] holds that allele for every individual.
        let words = n.div_ceil(64);
        let mut columns = vec![vec![0u64; words]; l];
        for (i, g) in pop.genomes().enumerate() {
            for (locus, col) in columns.iter_mut().enumerate() {
                if g.get(locus) {
                    col[i / 64] |= 1 << (i % 64);
                }
            }
        }
        let ones: Vec<usize> = columns
            .iter()
            .map(|c| c.iter().map(|w| w.count_ones() as usize).sum())
            .collect();

        let mut groups: Vec<Option<GroupState>> = (0..l)
            .map(|locus| {
                let keys = (0..n)
                    .map(|i| ((columns[locus][i / 64] >> (i % 64)) & 1) as u32)
                    .collect();
                let sum = scorer.clog[ones[locus]] + scorer.clog[n - ones[locus]];
                Some(GroupState {
                    members: vec![locus],
                    keys,
                    entropy: scorer.entropy_from_clog(sum),
                })
            })
            .collect();

        let mut total: f64 = groups.iter().flatten().map(|g| scorer.group_cost(g)).sum();
        let initial_total = total;
        let mut accepted_totals = Vec::new();

        // delta[i][j] (i < j): change in total MDL from merging slots i and j.
        // A group always lives in the slot of its smallest gene index.
        let mut delta = vec![vec![f64::INFINITY; l]; l];
        let pair_cost_singletons = scorer.table_cost(2) - 2.0 * scorer.table_cost(1);
        if self.merge_cap >= 2 {
            for i in 0..l {
                for j in i + 1..l {
                    let gi = groups[i].as_ref().unwrap();
                    let gj = groups[j].as_ref().unwrap();
                    if n as f64 * gi.entropy.min(gj.entropy) <= pair_cost_singletons {
                        continue;
                    }
                    let c11: usize = columns[i]
                        .iter()
                        .zip(&columns[j])
                        .map(|(a, b)| (a & b).count_ones() as usize)
                        .sum();
                    let c10 = ones[i] - c11;
                    let c01 = ones[j] - c11;
                    let c00 = n + c11 - ones[i] - ones[j];
                    let sum = [c11, c10, c01, c00].iter().map(|&c| scorer.clog[c]).sum();
                    let merged = scorer.entropy_from_clog(sum);
                    delta[i][j] = n as f64 * (merged - gi.entropy - gj.entropy) + pair_cost_singletons;
                }
            }
        }

        loop {
            let mut best: Option<(usize, usize, f64)> = None;
            for i in 0..l {
                if groups[i].is_none() {
                    continue;
                }
                for j in i + 1..l {
                    let d = delta[i][j];
                    if !(d < 0.0) || groups[j].is_none() {
                        continue;
                    }
                    let better = match best {
                        None => true,
                        Some((_, _, b)) => d < b && (b - d) > TIE_TOLERANCE * d.abs().max(b.abs()),
                    };
                    if better {
                        best = Some((i, j, d));
                    }
                }
            }
            let Some((i, j, d)) = best else { break };

            let b = groups[j].take().unwrap();
            let a = groups[i].take().unwrap();
            let width_b = b.members.len();
            let keys: Vec<u32> = a.keys.iter().zip(&b.keys).map(|(&ka, &kb)| (ka << width_b) | kb).collect();
            let mut members = a.members;
            members.extend(b.members);
            let width = members.len();
            let entropy = scorer.merged_entropy(&a.keys, &b.keys, width_b, width);
            groups[i] = Some(GroupState {
                members,
                keys,
                entropy,
            });
            total += d;
            accepted_totals.push(total);

            for row in delta.iter_mut() {
                row[j] = f64::INFINITY;
            }
            delta[j].fill(f64::INFINITY);

            let merged = groups[i].take().unwrap();
            let merged_cost = scorer.group_cost(&merged);
            let merged_width = merged.members.len();
            for other in 0..l {
                if other == i {
                    continue;
                }
                let (lo, hi) = if other < i { (other, i) } else { (i, other) };
                delta[lo][hi] = f64::INFINITY;
                let Some(o) = groups[other].as_ref() else { continue };
                let width = merged_width + o.members.len();
                if width > self.merge_cap {
                    continue;
                }
                // The gain N*(H_a + H_b - H_ab) never exceeds N*min(H_a, H_b).
                let extra_tables = scorer.table_cost(width)
                    - scorer.table_cost(merged_width)
                    - scorer.table_cost(o.members.len());
                if n as f64 * merged.entropy.min(o.entropy) <= extra_tables {
                    continue;
                }
                let h = scorer.merged_entropy(&merged.keys, &o.keys, o.members.len(), width);
                let cost = n as f64 * h + scorer.table_cost(width);
                delta[lo][hi] = cost - merged_cost - scorer.group_cost(o);
            }
            groups[i] = Some(merged);
        }

        let partition = GenePartition::new(
            groups.into_iter().flatten().map(|g| g.members).collect(),
            l,
        )?;
        let model = estimate_tables(&partition, pop)?;
        Ok(SearchOutcome {
            model,
            initial_total,
            accepted_totals,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::genome::Genome;
    use approx::assert_abs_diff_eq;

    fn pop(rows: &[&str]) -> Population {
        Population::from_genomes(rows.iter().map(|r| r.parse::<Genome>().unwrap()).collect()).unwrap()
    }

    #[test]
    fn entropy_examples() {
        let uniform = pop(&["00", "01", "10", "11"]);
        assert_abs_diff_eq!(group_entropy(&uniform, &[0, 1]).unwrap(), 2.0, epsilon = 1e-12);
        let same = pop(&["101", "101", "101"]);
        assert_eq!(group_entropy(&same, &[0, 1, 2]).unwrap(), 0.0);
        let skew = pop(&["1", "1", "1", "0"]);
        assert_abs_diff_eq!(group_entropy(&skew, &[0]).unwrap(), 0.811_278, epsilon = 1e-6);
        assert!(matches!(group_entropy(&skew, &[1]), Err(Error::Config(_))));
    }

    #[test]
    fn mdl_examples() {
        let uniform = pop(&["00", "01", "10", "11"]);
        let correlated = pop(&["00", "00", "11", "11"]);
        let singles = GenePartition::singletons(2);
        let merged = GenePartition::new(vec![vec![0, 1]], 2).unwrap();

        assert_abs_diff_eq!(compressed_population_complexity(&uniform, &singles).unwrap(), 8.0, epsilon = 1e-12);
        assert_abs_diff_eq!(compressed_population_complexity(&uniform, &merged).unwrap(), 8.0, epsilon = 1e-12);
        assert_abs_diff_eq!(compressed_population_complexity(&correlated, &merged).unwrap(), 4.0, epsilon = 1e-12);
        assert_abs_diff_eq!(model_complexity(&singles, 4), 4.643_856, epsilon = 1e-6);
        assert_abs_diff_eq!(model_complexity(&merged, 4), 6.965_784, epsilon = 1e-6);
        assert_eq!(model_complexity(&GenePartition::new(vec![vec![0, 1], vec![2]], 3).unwrap(), 1), 4.0);

        let s = mdl_score(&uniform, &singles).unwrap();
        assert_abs_diff_eq!(s.total, 12.6439, epsilon = 1e-3);
        assert_abs_diff_eq!(s.total, s.compressed_population_complexity + s.model_complexity, epsilon = 1e-12);
        assert_abs_diff_eq!(mdl_score(&uniform, &merged).unwrap().total, 14.9658, epsilon = 1e-3);
        assert_abs_diff_eq!(mdl_score(&correlated, &merged).unwrap().total, 10.9658, epsilon = 1e-3);
    }

    #[test]
    fn greedy_examples() {
        let correlated = greedy_model_search(&pop(&["00", "00", "11", "11"])).unwrap();
        assert_eq!(correlated.partition().to_string(), "[0,1]");
        let uniform = greedy_model_search(&pop(&["00", "01", "10", "11"])).unwrap();
        assert_eq!(uniform.partition().to_string(), "[0|1]");
        let single = greedy_model_search(&pop(&["1", "0"])).unwrap();
        assert_eq!(single.partition().to_string(), "[0]");
    }

    #[test]
    fn converged_population_keeps_singletons() {
        let p = pop(&["0110", "0110", "0110", "0110", "0110"]);
        let model = greedy_model_search(&p).unwrap();
        assert_eq!(model.partition(), &GenePartition::singletons(4));
    }

    #[test]
    fn tables_count_configurations() {
        let correlated = pop(&["00", "00", "11", "11"]);
        let merged = GenePartition::new(vec![vec![0, 1]], 2).unwrap();
        let m = estimate_tables(&merged, &correlated).unwrap();
        let t = &m.tables()[0];
        assert_eq!((t.count(0b00), t.count(0b01), t.count(0b10), t.count(0b11)), (2, 0, 0, 2));
        assert_eq!(t.total(), 4);
        assert_eq!(m.probability(0, 0b11), 0.5);

        let one = pop(&["1011", "1011"]);
        let m = estimate_tables(&GenePartition::new(vec![vec![0, 3], vec![1, 2]], 4).unwrap(), &one).unwrap();
        for t in m.tables() {
            assert_eq!(t.nonzero().count(), 1);
            assert_eq!(t.total(), 2);
        }
        // 2^3 > N = 2, so this group is stored sparsely.
        let m = estimate_tables(&GenePartition::new(vec![vec![0, 1, 2], vec![3]], 4).unwrap(), &one).unwrap();
        assert!(matches!(m.tables()[0], FrequencyTable::Sparse(_)));
        assert_eq!(m.tables()[0].count(0b101), 2);
    }

    #[test]
    fn partition_validation_and_format() {
        let p = GenePartition::new(vec![vec![5], vec![4, 3], vec![2, 0, 1]], 6).unwrap();
        assert_eq!(p.to_string(), "[0,1,2|3,4|5]");
        assert_eq!(p.group_count(), 3);
        assert_eq!(p.largest_group(), 3);
        assert!(p.covers(&[0, 1, 2]));
        assert!(p.covers(&[3, 4, 5]));
        assert!(!p.covers(&[0, 1]));
        assert!(GenePartition::new(vec![vec![0, 1], vec![1]], 2).is_err());
        assert!(GenePartition::new(vec![vec![0]], 2).is_err());
        assert!(GenePartition::new(vec![vec![0, 2]], 2).is_err());
        assert!(GenePartition::new(vec![vec![], vec![0, 1]], 2).is_err());
    }

    #[test]
    fn merge_cap_limits_group_size() {
        // Fully correlated 4-bit population: unrestricted search merges everything.
        let rows: Vec<&str> = (0..64).map(|i| if i % 2 == 0 { "0000" } else { "1111" }).collect();
        let p = pop(&rows);
        let free = ModelSearch::default().search(&p).unwrap();
        assert_eq!(free.model.partition().largest_group(), 4);
        let capped = ModelSearch { merge_cap: 2 }.search(&p).unwrap();
        assert_eq!(capped.model.partition().largest_group(), 2);
    }
}
