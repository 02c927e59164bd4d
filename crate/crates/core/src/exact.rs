//! Exact MaxCut solving: branch-and-bound and full enumeration.

use std::time::{Duration, Instant};

use crate::graph::{Bits, MaxCutInstance};
use crate::scalar::Weight;

#[derive(Clone, Debug, PartialEq)]
pub struct ExactSolution<W> {
    pub best_value: W,
    pub best_assignment: Bits,
    /// Search finished, so `best_value` is the optimum.
    pub proven: bool,
    pub nodes: u64,
}

/// Maximizes the objective by depth-first branch-and-bound.
///
/// Vertices are fixed in order of decreasing degree. The bound adds, for
/// every undecided vertex, the better of its two contributions towards
/// decided neighbors, plus all positive weight between undecided vertices.
/// Without linear terms the first vertex is pinned to 0 (complement
/// symmetry). With `time_limit` set, the best incumbent is returned with
/// `proven = false` once the limit is hit.
pub fn solve_exact<W: Weight>(
    inst: &MaxCutInstance<W>,
    time_limit: Option<Duration>,
) -> ExactSolution<W> {
    let n = inst.num_vertices();
    if n == 0 {
        return ExactSolution { best_value: inst.offset().clone(), best_assignment: 0, proven: true, nodes: 0 };
    }
    let deg = inst.degrees();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| deg[b].cmp(&deg[a]).then(a.cmp(&b)));

    let (inc_value, inc_bits) = local_search_incumbent(inst);
    let mut search = Search {
        adj: inst.adjacency(),
        order,
        assigned: vec![None; n],
        gain: inst.linear().iter().map(|h| [W::zero(), h.clone()]).collect(),
        free_positive: inst
            .edges()
            .iter()
            .fold(W::zero(), |acc, e| if e.w.is_positive() { acc + e.w.clone() } else { acc }),
        decided: inst.offset().clone(),
        best_value: inc_value,
        best_bits: inc_bits,
        nodes: 0,
        deadline: time_limit.map(|t| Instant::now() + t),
        timed_out: false,
    };
    let pin_first = !inst.has_linear_terms();
    search.branch(0, pin_first);
    ExactSolution {
        best_value: search.best_value,
        best_assignment: search.best_bits,
        proven: !search.timed_out,
        nodes: search.nodes,
    }
}

struct Search<W> {
    adj: Vec<Vec<(usize, W)>>,
    order: Vec<usize>,
    assigned: Vec<Option<bool>>,
    /// Objective contribution of each undecided vertex for value 0 / 1,
    /// counting only edges to decided vertices and its own linear term.
    gain: Vec<[W; 2]>,
    /// Sum of positive weights on edges with both endpoints undecided.
    free_positive: W,
    decided: W,
    best_value: W,
    best_bits: Bits,
    nodes: u64,
    deadline: Option<Instant>,
    timed_out: bool,
}

impl<W: Weight> Search<W> {
    fn bound(&self, depth: usize) -> W {
        let mut bound = self.decided.clone() + self.free_positive.clone();
        for &v in &self.order[depth..] {
            let [g0, g1] = &self.gain[v];
            bound = bound + if g0 > g1 { g0.clone() } else { g1.clone() };
        }
        bound
    }

    fn branch(&mut self, depth: usize, pin: bool) {
        if self.timed_out {
            return;
        }
        self.nodes += 1;
        if self.nodes.is_multiple_of(4096) {
            if let Some(deadline) = self.deadline {
                if Instant::now() >= deadline {
                    self.timed_out = true;
                    return;
                }
            }
        }
        if depth == self.order.len() {
            if self.decided > self.best_value {
                self.best_value = self.decided.clone();
                self.best_bits = self
                    .assigned
                    .iter()
                    .enumerate()
                    .fold(0, |acc, (v, b)| acc | ((b.unwrap_or(false) as Bits) << v));
            }
            return;
        }
        if self.bound(depth) <= self.best_value {
            return;
        }
        let v = self.order[depth];
        let first = if pin { false } else { self.gain[v][1] > self.gain[v][0] };
        let choices: &[bool] = if pin { &[false] } else if first { &[true, false] } else { &[false, true] };
        for &value in choices {
            self.assign(v, value);
            self.branch(depth + 1, false);
            self.unassign(v, value);
        }
    }

    fn assign(&mut self, v: usize, value: bool) {
        self.assigned[v] = Some(value);
        self.decided = self.decided.clone() + self.gain[v][value as usize].clone();
        for (u, w) in &self.adj[v] {
            if self.assigned[*u].is_none() {
                if w.is_positive() {
                    self.free_positive = self.free_positive.clone() - w.clone();
                }
                let slot = &mut self.gain[*u][!value as usize];
                *slot = slot.clone() + w.clone();
            }
        }
    }

    fn unassign(&mut self, v: usize, value: bool) {
        for (u, w) in &self.adj[v] {
            if self.assigned[*u].is_none() {
                if w.is_positive() {
                    self.free_positive = self.free_positive.clone() + w.clone();
                }
                let slot = &mut self.gain[*u][!value as usize];
                *slot = slot.clone() - w.clone();
            }
        }
        self.decided = self.decided.clone() - self.gain[v][value as usize].clone();
        self.assigned[v] = None;
    }
}

/// 1-flip ascent from the all-zero assignment.
fn local_search_incumbent<W: Weight>(inst: &MaxCutInstance<W>) -> (W, Bits) {
    let mut x: Bits = 0;
    let adj = inst.adjacency();
    loop {
        let mut improved = false;
        for v in 0..inst.num_vertices() {
            if flip_gain(inst, &adj, x, v).is_positive() {
                x ^= 1 << v;
                improved = true;
            }
        }
        if !improved {
            break;
        }
    }
    (inst.cut_value_bits(x), x)
}

/// Objective change from flipping vertex `v` in `x`.
pub(crate) fn flip_gain<W: Weight>(
    inst: &MaxCutInstance<W>,
    adj: &[Vec<(usize, W)>],
    x: Bits,
    v: usize,
) -> W {
    let xv = (x >> v) & 1;
    let mut gain = W::zero();
    for (u, w) in &adj[v] {
        if (x >> u) & 1 == xv {
            gain = gain + w.clone();
        } else {
            gain = gain - w.clone();
        }
    }
    let h = &inst.linear()[v];
    if xv == 0 {
        gain + h.clone()
    } else {
        gain - h.clone()
    }
}

/// Maximum objective and every assignment attaining it, by enumeration of
/// all `2^n` assignments.
pub fn enumerate_optima<W: Weight>(inst: &MaxCutInstance<W>) -> (W, Vec<Bits>) {
    let n = inst.num_vertices();
    assert!(n <= 30, "enumeration limited to 30 vertices");
    let mut best = inst.cut_value_bits(0);
    let mut optima = vec![0];
    for x in 1..(1u64 << n) {
        let value = inst.cut_value_bits(x);
        match value.partial_cmp(&best) {
            Some(std::cmp::Ordering::Greater) => {
                best = value;
                optima.clear();
                optima.push(x);
            }
            Some(std::cmp::Ordering::Equal) => optima.push(x),
            _ => {}
        }
    }
    (best, optima)
}
