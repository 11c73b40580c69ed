//! Brute-force MDL reference shared by the oracle and acceptance tests.
//! Written without any of the crate's model code.

use std::collections::HashMap;

use dcga::genome::{Genome, Population};

pub fn naive_mdl(rows: &[Vec<bool>], groups: &[Vec<usize>]) -> f64 {
    let n = rows.len() as f64;
    let mut data = 0.0;
    let mut params = 0.0;
    for g in groups {
        let mut counts: HashMap<Vec<bool>, usize> = HashMap::new();
        for r in rows {
            *counts.entry(g.iter().map(|&i| r[i]).collect()).or_default() += 1;
        }
        let h: f64 = counts
            .values()
            .map(|&c| {
                let p = c as f64 / n;
                -p * p.log2()
            })
            .sum();
        data += n * h;
        params += (2f64.powi(g.len() as i32) - 1.0) * (n + 1.0).log2();
    }
    data + params
}

/// Every set partition of `0..len`, by restricted growth strings.
pub fn all_partitions(len: usize) -> Vec<Vec<Vec<usize>>> {
    fn grow(i: usize, len: usize, labels: &mut Vec<usize>, out: &mut Vec<Vec<Vec<usize>>>) {
        if i == len {
            let k = labels.iter().max().map_or(0, |m| m + 1);
            let mut groups = vec![Vec::new(); k];
            for (locus, &l) in labels.iter().enumerate() {
                groups[l].push(locus);
            }
            out.push(groups);
            return;
        }
        let next = labels.iter().max().map_or(0, |m| m + 1);
        for l in 0..=next {
            labels.push(l);
            grow(i + 1, len, labels, out);
            labels.pop();
        }
    }
    let mut out = Vec::new();
    grow(0, len, &mut Vec::new(), &mut out);
    out
}

pub fn to_population(rows: &[Vec<bool>]) -> Population {
    Population::from_genomes(rows.iter().map(|r| Genome::from_bits(r.iter().copied())).collect()).unwrap()
}

pub fn parse_rows(rows: &[&str]) -> Vec<Vec<bool>> {
    rows.iter().map(|r| r.chars().map(|c| c == '1').collect()).collect()
}
