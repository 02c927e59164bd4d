//! MaxCut instances: construction, the text file format and objective
//! evaluation.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use sha2::{Digest, Sha256};

use crate::error::{invalid, Error, Result};
use crate::scalar::Weight;

/// Assignment packed into a machine word: bit `v` holds `x_v`.
pub type Bits = u64;

/// Largest vertex count representable by [`Bits`].
pub const MAX_VERTICES: usize = 64;

#[derive(Clone, Debug, PartialEq)]
pub struct Edge<W> {
    pub u: usize,
    pub v: usize,
    pub w: W,
}

/// Weighted MaxCut objective
/// `offset + sum_edges w [x_u != x_v] + sum_v h_v x_v`.
///
/// Edges are stored once per unordered pair with `u < v`, sorted, and
/// zero-weight edges are dropped.
#[derive(Clone, Debug, PartialEq)]
pub struct MaxCutInstance<W> {
    n: usize,
    edges: Vec<Edge<W>>,
    linear: Vec<W>,
    offset: W,
}

impl<W: Weight> MaxCutInstance<W> {
    /// Builds an instance with no linear terms and zero offset. Parallel edges
    /// are merged additively.
    pub fn new(n: usize, edges: impl IntoIterator<Item = (usize, usize, W)>) -> Result<Self> {
        Self::with_terms(n, edges, vec![W::zero(); n], W::zero())
    }

    pub fn with_terms(
        n: usize,
        edges: impl IntoIterator<Item = (usize, usize, W)>,
        linear: Vec<W>,
        offset: W,
    ) -> Result<Self> {
        if n > MAX_VERTICES {
            return Err(invalid(format!("{n} vertices exceeds the limit of {MAX_VERTICES}")));
        }
        if linear.len() != n {
            return Err(Error::LengthMismatch { expected: n, actual: linear.len() });
        }
        let mut merged: BTreeMap<(usize, usize), W> = BTreeMap::new();
        for (u, v, w) in edges {
            if u >= n || v >= n {
                return Err(invalid(format!("edge ({u}, {v}) out of range for {n} vertices")));
            }
            if u == v {
                return Err(invalid(format!("self-loop at vertex {u}")));
            }
            let key = (u.min(v), u.max(v));
            let entry = merged.entry(key).or_insert_with(W::zero);
            *entry = entry.clone() + w;
        }
        let edges = merged
            .into_iter()
            .filter(|(_, w)| !w.is_zero())
            .map(|((u, v), w)| Edge { u, v, w })
            .collect();
        Ok(Self { n, edges, linear, offset })
    }

    /// Unit-weight graph.
    pub fn unweighted(n: usize, edges: &[(usize, usize)]) -> Result<Self> {
        Self::new(n, edges.iter().map(|&(u, v)| (u, v, W::one())))
    }

    pub fn num_vertices(&self) -> usize {
        self.n
    }

    pub fn num_edges(&self) -> usize {
        self.edges.len()
    }

    pub fn edges(&self) -> &[Edge<W>] {
        &self.edges
    }

    pub fn linear(&self) -> &[W] {
        &self.linear
    }

    pub fn offset(&self) -> &W {
        &self.offset
    }

    pub fn has_linear_terms(&self) -> bool {
        self.linear.iter().any(|h| !h.is_zero())
    }

    /// Neighbor lists with edge weights, sorted by neighbor id.
    pub fn adjacency(&self) -> Vec<Vec<(usize, W)>> {
        let mut adj = vec![Vec::new(); self.n];
        for e in &self.edges {
            adj[e.u].push((e.v, e.w.clone()));
            adj[e.v].push((e.u, e.w.clone()));
        }
        for list in &mut adj {
            list.sort_by_key(|&(k, _)| k);
        }
        adj
    }

    pub fn degrees(&self) -> Vec<usize> {
        let mut deg = vec![0; self.n];
        for e in &self.edges {
            deg[e.u] += 1;
            deg[e.v] += 1;
        }
        deg
    }

    pub fn total_edge_weight(&self) -> W {
        self.edges.iter().fold(W::zero(), |acc, e| acc + e.w.clone())
    }

    /// Expected objective of a uniformly random assignment. For a plain
    /// unit-weight graph this is `|E| / 2`.
    pub fn random_expectation(&self) -> W {
        let two = W::from_int(2);
        let linear = self.linear.iter().fold(W::zero(), |acc, h| acc + h.clone());
        self.offset.clone() + (self.total_edge_weight() + linear) / two
    }

    pub fn cut_value(&self, x: &[bool]) -> Result<W> {
        if x.len() != self.n {
            return Err(Error::LengthMismatch { expected: self.n, actual: x.len() });
        }
        Ok(self.cut_value_bits(bits_from_bools(x)))
    }

    /// Objective of a packed assignment. Bits above `n` are ignored.
    pub fn cut_value_bits(&self, x: Bits) -> W {
        let mut value = self.offset.clone();
        for e in &self.edges {
            if (x >> e.u) & 1 != (x >> e.v) & 1 {
                value = value + e.w.clone();
            }
        }
        for (v, h) in self.linear.iter().enumerate() {
            if (x >> v) & 1 == 1 && !h.is_zero() {
                value = value + h.clone();
            }
        }
        value
    }

    /// Same objective evaluated in `f64`, for hot loops.
    pub fn cut_value_f64(&self, x: Bits) -> f64 {
        self.cut_value_bits(x).as_f64()
    }

    /// Canonical text form: header, sorted edges, nonzero linear terms and a
    /// nonzero offset.
    pub fn to_text(&self) -> String {
        let mut out = format!("{} {}\n", self.n, self.edges.len());
        for e in &self.edges {
            let _ = writeln!(out, "{} {} {}", e.u, e.v, e.w.to_text());
        }
        for (v, h) in self.linear.iter().enumerate() {
            if !h.is_zero() {
                let _ = writeln!(out, "h {v} {}", h.to_text());
            }
        }
        if !self.offset.is_zero() {
            let _ = writeln!(out, "c {}", self.offset.to_text());
        }
        out
    }

    /// Short hex digest of the canonical text form.
    pub fn digest(&self) -> String {
        short_digest(self.to_text().as_bytes())
    }

    /// Converts weights to another scalar type.
    pub fn map_weights<V: Weight>(&self, f: impl Fn(&W) -> V) -> MaxCutInstance<V> {
        MaxCutInstance {
            n: self.n,
            edges: self.edges.iter().map(|e| Edge { u: e.u, v: e.v, w: f(&e.w) }).collect(),
            linear: self.linear.iter().map(&f).collect(),
            offset: f(&self.offset),
        }
    }
}

/// Parses the instance text format.
///
/// ```text
/// # comment
/// n m
/// u v w        (m edge lines, 0-indexed)
/// h v value    (optional linear term)
/// c value      (optional constant offset)
/// ```
///
/// The `m` in the header is informational; every edge line is read and
/// repeated pairs are merged additively.
pub fn parse_instance<W: Weight>(text: &str) -> Result<MaxCutInstance<W>> {
    let parse_err = |line: usize, message: String| Error::Parse { line, message };
    let mut n: Option<usize> = None;
    let mut edges = Vec::new();
    let mut linear: Vec<W> = Vec::new();
    let mut offset = W::zero();

    for (idx, raw) in text.lines().enumerate() {
        let line_no = idx + 1;
        let content = raw.split('#').next().unwrap_or("").trim();
        if content.is_empty() {
            continue;
        }
        let fields: Vec<&str> = content.split_whitespace().collect();
        let Some(n) = n else {
            if fields.len() != 2 {
                return Err(parse_err(line_no, "header must be \"n m\"".into()));
            }
            let nv: usize = fields[0]
                .parse()
                .map_err(|_| parse_err(line_no, format!("bad vertex count {:?}", fields[0])))?;
            fields[1]
                .parse::<usize>()
                .map_err(|_| parse_err(line_no, format!("bad edge count {:?}", fields[1])))?;
            if nv > MAX_VERTICES {
                return Err(parse_err(line_no, format!("vertex count {nv} exceeds {MAX_VERTICES}")));
            }
            n = Some(nv);
            linear = vec![W::zero(); nv];
            continue;
        };
        let vertex = |field: &str| -> Result<usize> {
            let v: usize = field
                .parse()
                .map_err(|_| parse_err(line_no, format!("bad vertex id {field:?}")))?;
            if v >= n {
                return Err(parse_err(line_no, format!("vertex {v} out of range 0..{n}")));
            }
            Ok(v)
        };
        let weight = |field: &str| -> Result<W> {
            W::parse_weight(field).ok_or_else(|| parse_err(line_no, format!("bad weight {field:?}")))
        };
        match fields.as_slice() {
            ["h", v, value] => {
                let v = vertex(v)?;
                linear[v] = linear[v].clone() + weight(value)?;
            }
            ["c", value] => offset = offset + weight(value)?,
            [u, v, w] => {
                let (u, v) = (vertex(u)?, vertex(v)?);
                if u == v {
                    return Err(parse_err(line_no, format!("self-loop at vertex {u}")));
                }
                edges.push((u, v, weight(w)?));
            }
            _ => return Err(parse_err(line_no, format!("unrecognized line {content:?}"))),
        }
    }
    let n = n.ok_or_else(|| parse_err(1, "missing header".into()))?;
    MaxCutInstance::with_terms(n, edges, linear, offset)
}

pub fn bits_from_bools(x: &[bool]) -> Bits {
    x.iter().enumerate().fold(0, |acc, (i, &b)| acc | ((b as Bits) << i))
}

pub fn bits_to_bools(x: Bits, n: usize) -> Vec<bool> {
    (0..n).map(|i| (x >> i) & 1 == 1).collect()
}

/// Renders an assignment with vertex 0 first.
pub fn format_bits(x: Bits, n: usize) -> String {
    (0..n).map(|i| if (x >> i) & 1 == 1 { '1' } else { '0' }).collect()
}

pub fn parse_bits(text: &str) -> Option<(Bits, usize)> {
    if text.len() > MAX_VERTICES {
        return None;
    }
    let mut bits = 0;
    for (i, c) in text.chars().enumerate() {
        match c {
            '0' => {}
            '1' => bits |= 1 << i,
            _ => return None,
        }
    }
    Some((bits, text.len()))
}

pub(crate) fn short_digest(bytes: &[u8]) -> String {
    let hash = Sha256::digest(bytes);
    hash.iter().take(8).map(|b| format!("{b:02x}")).collect()
}
