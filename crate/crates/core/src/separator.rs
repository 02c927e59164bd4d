//! Minimum balanced vertex separators.

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::graph::MaxCutInstance;
use crate::scalar::Weight;

pub const DEFAULT_BALANCE_FRACTION: f64 = 0.6;

/// Partition `{A, B, S}` of the vertices with no edge between `A` and `B`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SeparatorDecomposition {
    pub a: Vec<usize>,
    pub b: Vec<usize>,
    pub s: Vec<usize>,
    /// Maximum allowed size of either side.
    pub balance_bound: usize,
}

#[derive(Serialize, Deserialize)]
struct DecompositionJson {
    #[serde(rename = "A")]
    a: Vec<usize>,
    #[serde(rename = "B")]
    b: Vec<usize>,
    #[serde(rename = "S")]
    s: Vec<usize>,
}

impl SeparatorDecomposition {
    pub fn to_json(&self) -> String {
        let dto = DecompositionJson { a: self.a.clone(), b: self.b.clone(), s: self.s.clone() };
        serde_json::to_string(&dto).expect("plain vectors serialize")
    }

    /// Reads `{"A":[..],"B":[..],"S":[..]}`. The balance bound is set to the
    /// larger side.
    pub fn from_json(text: &str) -> Result<Self> {
        let dto: DecompositionJson = serde_json::from_str(text)?;
        let balance_bound = dto.a.len().max(dto.b.len());
        let mut dec = Self { a: dto.a, b: dto.b, s: dto.s, balance_bound };
        dec.a.sort_unstable();
        dec.b.sort_unstable();
        dec.s.sort_unstable();
        Ok(dec)
    }
}

/// `ceil(fraction * n)`, tolerant of binary rounding in the product.
pub fn balance_bound(n: usize, fraction: f64) -> usize {
    (fraction * n as f64 - 1e-9).ceil().max(0.0) as usize
}

/// Returns a separator of minimum cardinality among all decompositions whose
/// sides have at most `ceil(balance_fraction * n)` vertices.
///
/// Candidate separators are enumerated by increasing size and, within a
/// size, in lexicographic order. For each candidate the components of
/// `G - S` are packed into two sides by subset sum; the candidate with the
/// largest smaller side wins, earlier (lexicographically smaller) candidates
/// winning ties. Side `A` always holds the lowest-indexed non-separator
/// vertex. Exhausting every size is a proof of infeasibility.
pub fn find_separator<W: Weight>(
    inst: &MaxCutInstance<W>,
    balance_fraction: f64,
) -> Result<SeparatorDecomposition> {
    let n = inst.num_vertices();
    if n < 3 {
        return Err(invalid(format!("separator search needs at least 3 vertices, got {n}")));
    }
    if !(0.5..1.0).contains(&balance_fraction) {
        return Err(invalid(format!("balance fraction {balance_fraction} outside [0.5, 1)")));
    }
    let bound = balance_bound(n, balance_fraction);
    let adj: Vec<Vec<usize>> = inst.adjacency().into_iter().map(|l| l.into_iter().map(|(u, _)| u).collect()).collect();

    for k in 0..=n - 2 {
        let best_possible = (n - k) / 2;
        let mut best: Option<(usize, Vec<usize>, Vec<Vec<usize>>)> = None;
        let mut combo: Vec<usize> = (0..k).collect();
        loop {
            let components = components_without(&adj, &combo);
            if let Some(score) = best_split_score(&components, bound) {
                if best.as_ref().is_none_or(|(s, _, _)| score > *s) {
                    best = Some((score, combo.clone(), components));
                    if score == best_possible {
                        break;
                    }
                }
            }
            if !next_combination(&mut combo, n) {
                break;
            }
        }
        if let Some((score, s, components)) = best {
            let (a, b) = split_components(&components, bound, score);
            return Ok(SeparatorDecomposition { a, b, s, balance_bound: bound });
        }
    }
    Err(Error::Infeasible(format!(
        "no vertex separator leaves two nonempty sides of at most {bound} vertices"
    )))
}

/// Checks the partition, nonempty sides, the balance bound and the absence
/// of `A`–`B` edges.
pub fn verify_separator<W: Weight>(inst: &MaxCutInstance<W>, dec: &SeparatorDecomposition) -> bool {
    let n = inst.num_vertices();
    let mut label = vec![0u8; n];
    for (tag, set) in [(1u8, &dec.a), (2, &dec.b), (3, &dec.s)] {
        for &v in set {
            if v >= n || label[v] != 0 {
                return false;
            }
            label[v] = tag;
        }
    }
    if label.contains(&0) || dec.a.is_empty() || dec.b.is_empty() {
        return false;
    }
    if dec.a.len().max(dec.b.len()) > dec.balance_bound {
        return false;
    }
    inst.edges().iter().all(|e| {
        let pair = (label[e.u], label[e.v]);
        pair != (1, 2) && pair != (2, 1)
    })
}

/// Connected components of the graph with `removed` deleted, ordered by their
/// lowest vertex, each sorted.
fn components_without(adj: &[Vec<usize>], removed: &[usize]) -> Vec<Vec<usize>> {
    let n = adj.len();
    let mut seen = vec![false; n];
    for &v in removed {
        seen[v] = true;
    }
    let mut components = Vec::new();
    for start in 0..n {
        if seen[start] {
            continue;
        }
        seen[start] = true;
        let mut comp = vec![start];
        let mut i = 0;
        while i < comp.len() {
            let v = comp[i];
            i += 1;
            for &u in &adj[v] {
                if !seen[u] {
                    seen[u] = true;
                    comp.push(u);
                }
            }
        }
        comp.sort_unstable();
        components.push(comp);
    }
    components
}

/// Achievable sizes of side `A` (always containing the first component).
fn reachable_a_sizes(components: &[Vec<usize>]) -> Vec<bool> {
    let total: usize = components.iter().map(Vec::len).sum();
    let mut reach = vec![false; total + 1];
    reach[components[0].len()] = true;
    for comp in &components[1..] {
        for size in (comp.len()..=total).rev() {
            if reach[size - comp.len()] {
                reach[size] = true;
            }
        }
    }
    reach
}

fn best_split_score(components: &[Vec<usize>], bound: usize) -> Option<usize> {
    if components.len() < 2 {
        return None;
    }
    let total: usize = components.iter().map(Vec::len).sum();
    let reach = reachable_a_sizes(components);
    (1..total)
        .filter(|&a| reach[a] && a.max(total - a) <= bound)
        .map(|a| a.min(total - a))
        .max()
}

/// Packs components into sides achieving `score`, preferring the larger `A`.
fn split_components(components: &[Vec<usize>], bound: usize, score: usize) -> (Vec<usize>, Vec<usize>) {
    let total: usize = components.iter().map(Vec::len).sum();
    let reach = reachable_a_sizes(components);
    let target = (1..total)
        .rev()
        .find(|&a| reach[a] && a.max(total - a) <= bound && a.min(total - a) == score)
        .expect("score was achievable");

    // suffix[i][s]: size s reachable using components i.. (excluding the first).
    let m = components.len();
    let mut suffix = vec![vec![false; total + 1]; m + 1];
    suffix[m][0] = true;
    for i in (1..m).rev() {
        let len = components[i].len();
        for s in 0..=total {
            suffix[i][s] = suffix[i + 1][s] || (s >= len && suffix[i + 1][s - len]);
        }
    }
    let mut a = components[0].clone();
    let mut b = Vec::new();
    let mut remaining = target - components[0].len();
    for i in 1..m {
        let len = components[i].len();
        if remaining >= len && suffix[i + 1][remaining - len] {
            a.extend(&components[i]);
            remaining -= len;
        } else {
            b.extend(&components[i]);
        }
    }
    debug_assert_eq!(remaining, 0);
    a.sort_unstable();
    b.sort_unstable();
    (a, b)
}

/// Advances to the next `k`-subset of `0..n` in lexicographic order.
fn next_combination(combo: &mut [usize], n: usize) -> bool {
    let k = combo.len();
    for i in (0..k).rev() {
        if combo[i] < n - k + i {
            combo[i] += 1;
            for j in i + 1..k {
                combo[j] = combo[j - 1] + 1;
            }
            return true;
        }
    }
    false
}
