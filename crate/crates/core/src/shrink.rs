//! Correlation-guided shrinking of the separator to a single vertex.
//!
//! Merging vertex `j` into `i` with sign `sigma` fixes `x_j = x_i` for
//! `sigma = +1` and `x_j = 1 - x_i` for `sigma = -1`. The objective is
//! rewritten exactly, so every shrunk assignment expands to an original
//! assignment with the same objective value.

use std::collections::BTreeMap;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::exact::{enumerate_optima, flip_gain};
use crate::graph::{Bits, MaxCutInstance};
use crate::scalar::Weight;
use crate::separator::SeparatorDecomposition;

/// Correlation estimates keyed by `(min, max)` vertex pair.
pub type Correlations = BTreeMap<(usize, usize), f64>;

/// Source of pairwise spin correlations `E[s_i s_j]` over good solutions,
/// with `s = 1 - 2x`.
pub trait CorrelationOracle<W: Weight> {
    fn estimate(&self, inst: &MaxCutInstance<W>, pairs: &[(usize, usize)]) -> Result<Correlations>;
}

/// Averages over every optimal assignment. Exponential in `n`.
#[derive(Clone, Copy, Debug, Default)]
pub struct ExhaustiveOracle;

pub const EXHAUSTIVE_MAX_VERTICES: usize = 16;

impl<W: Weight> CorrelationOracle<W> for ExhaustiveOracle {
    fn estimate(&self, inst: &MaxCutInstance<W>, pairs: &[(usize, usize)]) -> Result<Correlations> {
        if pairs.is_empty() {
            return Ok(Correlations::new());
        }
        if inst.num_vertices() > EXHAUSTIVE_MAX_VERTICES {
            return Err(invalid(format!(
                "exhaustive correlations limited to {EXHAUSTIVE_MAX_VERTICES} vertices, got {}",
                inst.num_vertices()
            )));
        }
        let (_, optima) = enumerate_optima(inst);
        Ok(ensemble_correlations(&optima, pairs))
    }
}

/// Averages over the best `keep` outcomes of `restarts` randomized 1-flip
/// local ascents.
#[derive(Clone, Copy, Debug)]
pub struct LocalSearchOracle {
    pub restarts: usize,
    pub keep: usize,
    pub seed: u64,
}

impl Default for LocalSearchOracle {
    fn default() -> Self {
        Self { restarts: 200, keep: 32, seed: 0 }
    }
}

impl<W: Weight> CorrelationOracle<W> for LocalSearchOracle {
    fn estimate(&self, inst: &MaxCutInstance<W>, pairs: &[(usize, usize)]) -> Result<Correlations> {
        if pairs.is_empty() {
            return Ok(Correlations::new());
        }
        if self.restarts == 0 || self.keep == 0 {
            return Err(invalid("local search needs at least one restart and one kept outcome"));
        }
        let n = inst.num_vertices();
        let adj = inst.adjacency();
        let mut outcomes: Vec<(W, usize, Bits)> = (0..self.restarts)
            .map(|restart| {
                let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
                rng.set_stream(restart as u64);
                let mut x: Bits = rng.gen::<u64>() & mask(n);
                // Steepest ascent; ties go to the lowest vertex.
                loop {
                    let mut best: Option<(W, usize)> = None;
                    for v in 0..n {
                        let gain = flip_gain(inst, &adj, x, v);
                        if gain.is_positive() && best.as_ref().is_none_or(|(g, _)| gain > *g) {
                            best = Some((gain, v));
                        }
                    }
                    match best {
                        Some((_, v)) => x ^= 1 << v,
                        None => break,
                    }
                }
                (inst.cut_value_bits(x), restart, x)
            })
            .collect();
        outcomes.sort_by(|a, b| b.0.cmp_total(&a.0).then(a.1.cmp(&b.1)));
        let ensemble: Vec<Bits> = outcomes.iter().take(self.keep).map(|o| o.2).collect();
        Ok(ensemble_correlations(&ensemble, pairs))
    }
}

fn mask(n: usize) -> Bits {
    if n >= 64 {
        Bits::MAX
    } else {
        (1 << n) - 1
    }
}

fn ensemble_correlations(ensemble: &[Bits], pairs: &[(usize, usize)]) -> Correlations {
    pairs
        .iter()
        .map(|&(i, j)| {
            let sum: i64 = ensemble
                .iter()
                .map(|x| if (x >> i) & 1 == (x >> j) & 1 { 1 } else { -1 })
                .sum();
            ((i.min(j), i.max(j)), sum as f64 / ensemble.len() as f64)
        })
        .collect()
}

/// All unordered pairs within a vertex set.
pub fn separator_pairs(s: &[usize]) -> Vec<(usize, usize)> {
    let mut pairs = Vec::new();
    for (k, &i) in s.iter().enumerate() {
        for &j in &s[k + 1..] {
            pairs.push((i.min(j), i.max(j)));
        }
    }
    pairs
}

/// Convenience wrapper over [`CorrelationOracle::estimate`].
pub fn estimate_correlations<W: Weight>(
    inst: &MaxCutInstance<W>,
    pairs: &[(usize, usize)],
    oracle: &dyn CorrelationOracle<W>,
) -> Result<Correlations> {
    oracle.estimate(inst, pairs)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct MergeRecord {
    pub kept: usize,
    pub removed: usize,
    /// `+1`: `x_removed = x_kept`; `-1`: `x_removed = 1 - x_kept`.
    pub sigma: i8,
}

#[derive(Clone, Debug, PartialEq)]
pub struct ShrinkTrace<W> {
    pub original_n: usize,
    pub records: Vec<MergeRecord>,
    /// Shrunk vertex `k` is original vertex `vertex_map[k]`.
    pub vertex_map: Vec<usize>,
    pub offset_delta: W,
}

#[derive(Serialize, Deserialize)]
struct TraceJson {
    original_n: usize,
    vertex_map: Vec<usize>,
    records: Vec<MergeRecord>,
    offset_delta: String,
}

impl<W: Weight> ShrinkTrace<W> {
    pub fn identity(n: usize) -> Self {
        Self { original_n: n, records: Vec::new(), vertex_map: (0..n).collect(), offset_delta: W::zero() }
    }

    pub fn shrunk_n(&self) -> usize {
        self.vertex_map.len()
    }

    pub fn to_json(&self) -> String {
        let dto = TraceJson {
            original_n: self.original_n,
            vertex_map: self.vertex_map.clone(),
            records: self.records.clone(),
            offset_delta: self.offset_delta.to_text(),
        };
        serde_json::to_string_pretty(&dto).expect("trace serializes")
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let dto: TraceJson = serde_json::from_str(text)?;
        let offset_delta = W::parse_weight(&dto.offset_delta)
            .ok_or_else(|| invalid(format!("bad offset_delta {:?}", dto.offset_delta)))?;
        if dto.records.iter().any(|r| r.sigma != 1 && r.sigma != -1) {
            return Err(invalid("merge sign must be +1 or -1"));
        }
        Ok(Self { original_n: dto.original_n, records: dto.records, vertex_map: dto.vertex_map, offset_delta })
    }

    /// Maps a decomposition of the original graph onto the shrunk graph.
    /// Merged-away separator vertices disappear.
    pub fn map_decomposition(&self, dec: &SeparatorDecomposition) -> SeparatorDecomposition {
        let mut inverse = vec![None; self.original_n];
        for (k, &v) in self.vertex_map.iter().enumerate() {
            inverse[v] = Some(k);
        }
        let map = |set: &[usize]| -> Vec<usize> { set.iter().filter_map(|&v| inverse[v]).collect() };
        SeparatorDecomposition { a: map(&dec.a), b: map(&dec.b), s: map(&dec.s), balance_bound: dec.balance_bound }
    }
}

/// Merges separator vertices pairwise until one remains.
///
/// At each step the pair of surviving separator vertices with the largest
/// `|C|` is merged (ties: larger `C`, then lexicographically smallest pair);
/// the higher-indexed vertex is removed into the lower one with
/// `sigma = sign(C)`, zero counting as `+1`.
pub fn shrink_separator<W: Weight>(
    inst: &MaxCutInstance<W>,
    dec: &SeparatorDecomposition,
    correlations: &Correlations,
) -> Result<(MaxCutInstance<W>, ShrinkTrace<W>)> {
    if dec.s.is_empty() {
        return Err(invalid("separator is empty"));
    }
    let n = inst.num_vertices();
    let mut weights: BTreeMap<(usize, usize), W> =
        inst.edges().iter().map(|e| ((e.u, e.v), e.w.clone())).collect();
    let mut linear = inst.linear().to_vec();
    let mut delta = W::zero();
    let mut alive = vec![true; n];
    let mut group: Vec<usize> = dec.s.clone();
    group.sort_unstable();
    let mut records = Vec::new();

    while group.len() > 1 {
        let mut best: Option<((usize, usize), f64)> = None;
        for pair in separator_pairs(&group) {
            let c = *correlations.get(&pair).ok_or_else(|| {
                Error::InvalidArgument(format!("missing correlation for pair {pair:?}"))
            })?;
            let better = match best {
                None => true,
                Some((bp, bc)) => {
                    c.abs() > bc.abs() || (c.abs() == bc.abs() && (c > bc || (c == bc && pair < bp)))
                }
            };
            if better {
                best = Some((pair, c));
            }
        }
        let ((i, j), c) = best.expect("at least one pair");
        let sigma: i8 = if c < 0.0 { -1 } else { 1 };
        merge(&mut weights, &mut linear, &mut delta, i, j, sigma);
        alive[j] = false;
        group.retain(|&v| v != j);
        records.push(MergeRecord { kept: i, removed: j, sigma });
    }

    let vertex_map: Vec<usize> = (0..n).filter(|&v| alive[v]).collect();
    let mut compact = vec![usize::MAX; n];
    for (k, &v) in vertex_map.iter().enumerate() {
        compact[v] = k;
    }
    let edges = weights.into_iter().map(|((u, v), w)| (compact[u], compact[v], w));
    let shrunk_linear = vertex_map.iter().map(|&v| linear[v].clone()).collect();
    let shrunk = MaxCutInstance::with_terms(
        vertex_map.len(),
        edges,
        shrunk_linear,
        inst.offset().clone() + delta.clone(),
    )?;
    Ok((shrunk, ShrinkTrace { original_n: n, records, vertex_map, offset_delta: delta }))
}

fn merge<W: Weight>(
    weights: &mut BTreeMap<(usize, usize), W>,
    linear: &mut [W],
    delta: &mut W,
    kept: usize,
    removed: usize,
    sigma: i8,
) {
    let touching: Vec<((usize, usize), W)> = weights
        .iter()
        .filter(|((u, v), _)| *u == removed || *v == removed)
        .map(|(k, w)| (*k, w.clone()))
        .collect();
    for (key, w) in touching {
        weights.remove(&key);
        let other = if key.0 == removed { key.1 } else { key.0 };
        if sigma < 0 {
            // [1 - x_i != x_k] = 1 - [x_i != x_k]; for k = i the edge is always cut.
            *delta = delta.clone() + w.clone();
        }
        if other == kept {
            continue;
        }
        let signed = if sigma < 0 { -w } else { w };
        let key = (kept.min(other), kept.max(other));
        let entry = weights.entry(key).or_insert_with(W::zero);
        *entry = entry.clone() + signed;
        if entry.is_zero() {
            weights.remove(&key);
        }
    }
    let h = std::mem::replace(&mut linear[removed], W::zero());
    if sigma < 0 {
        *delta = delta.clone() + h.clone();
        linear[kept] = linear[kept].clone() - h;
    } else {
        linear[kept] = linear[kept].clone() + h;
    }
}

/// Lifts a shrunk assignment back to the original vertices by replaying the
/// merge records in reverse.
pub fn expand_solution<W: Weight>(trace: &ShrinkTrace<W>, x_shrunk: &[bool]) -> Result<Vec<bool>> {
    if x_shrunk.len() != trace.shrunk_n() {
        return Err(Error::LengthMismatch { expected: trace.shrunk_n(), actual: x_shrunk.len() });
    }
    let bits = expand_bits(trace, crate::graph::bits_from_bools(x_shrunk));
    Ok(crate::graph::bits_to_bools(bits, trace.original_n))
}

/// Packed form of [`expand_solution`]; bits above the shrunk length are ignored.
pub fn expand_bits<W: Weight>(trace: &ShrinkTrace<W>, y: Bits) -> Bits {
    let mut x: Bits = 0;
    for (k, &v) in trace.vertex_map.iter().enumerate() {
        x |= ((y >> k) & 1) << v;
    }
    for rec in trace.records.iter().rev() {
        let bit = ((x >> rec.kept) & 1) ^ (rec.sigma < 0) as Bits;
        x = (x & !(1 << rec.removed)) | (bit << rec.removed);
    }
    x
}
