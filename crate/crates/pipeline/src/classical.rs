//! Baseline that fixes the separator vertex instead of cutting its wire.

use cutqaoa::error::{invalid, Result};
use cutqaoa::qaoa::{train, QaoaParams, TrainOptions};
use cutqaoa::rng::derive_seed;
use cutqaoa::separator::SeparatorDecomposition;
use cutqaoa::sim::NoiseModel;
use cutqaoa::{Bits, ExactInstance, Rational};

use crate::run::sample_uncut;

/// One side of the graph with the separator value folded into linear terms
/// and the offset.
#[derive(Clone, Debug)]
pub struct PinnedSide {
    /// Shrunk vertex of each local vertex.
    pub vertices: Vec<usize>,
    pub instance: ExactInstance,
}

/// Sub-instances on `A` and on `B` with `x_s = value`. The objective of the
/// full instance equals the sum of the two; constants go to the `A` side.
pub fn pinned_sides(
    inst: &ExactInstance,
    dec: &SeparatorDecomposition,
    value: bool,
) -> Result<(PinnedSide, PinnedSide)> {
    if dec.s.len() != 1 {
        return Err(invalid(format!("classical cutting needs one separator vertex, got {}", dec.s.len())));
    }
    let s = dec.s[0];
    let side = |members: &[usize], constants: Rational| -> Result<PinnedSide> {
        let mut vertices = members.to_vec();
        vertices.sort_unstable();
        let mut local = vec![usize::MAX; inst.num_vertices()];
        for (i, &v) in vertices.iter().enumerate() {
            local[v] = i;
        }
        let mut linear: Vec<Rational> = vertices.iter().map(|&v| inst.linear()[v]).collect();
        let mut offset = constants;
        let mut edges = Vec::new();
        for e in inst.edges() {
            let (lu, lv) = (local[e.u], local[e.v]);
            match (lu != usize::MAX, lv != usize::MAX) {
                (true, true) => edges.push((lu, lv, e.w)),
                (true, false) | (false, true) => {
                    let (inner, other) = if lu != usize::MAX { (lu, e.v) } else { (lv, e.u) };
                    if other != s {
                        return Err(invalid("decomposition has an edge between the two sides"));
                    }
                    // w [x_u != value]
                    if value {
                        offset += e.w;
                        linear[inner] -= e.w;
                    } else {
                        linear[inner] += e.w;
                    }
                }
                (false, false) => {}
            }
        }
        Ok(PinnedSide { vertices, instance: ExactInstance::with_terms(members.len(), edges, linear, offset)? })
    };
    let pinned_constant = if value { inst.linear()[s] } else { Rational::from_integer(0) };
    let a = side(&dec.a, *inst.offset() + pinned_constant)?;
    let b = side(&dec.b, Rational::from_integer(0))?;
    Ok((a, b))
}

#[derive(Clone, Debug)]
pub struct ClassicalTraining {
    pub value: bool,
    pub side: char,
    pub params: QaoaParams<f64>,
    pub initial_expectation: f64,
    pub final_expectation: f64,
}

#[derive(Clone, Debug)]
pub struct ClassicalRun {
    /// Shrunk-level bitstrings, `ceil(N/2)` with `x_s = 0` first.
    pub samples: Vec<Bits>,
    pub training: Vec<ClassicalTraining>,
}

#[derive(Clone, Copy, Debug)]
pub struct ClassicalOptions {
    pub p: usize,
    pub dt: f64,
    pub budget: usize,
    pub shots: usize,
    pub seed: u64,
    pub reuse: usize,
}

/// Trains and samples independent QAOA circuits on both sides for each
/// separator value and joins the shots pairwise.
pub fn classical_cut_run(
    inst: &ExactInstance,
    dec: &SeparatorDecomposition,
    opts: &ClassicalOptions,
    noise: Option<&NoiseModel>,
) -> Result<ClassicalRun> {
    if opts.shots == 0 {
        return Err(invalid("classical cutting needs at least one shot"));
    }
    let train_opts = TrainOptions { budget: opts.budget, ..Default::default() };
    let mut samples = Vec::with_capacity(opts.shots);
    let mut training = Vec::new();
    for value in [false, true] {
        let shots = if value { opts.shots / 2 } else { opts.shots.div_ceil(2) };
        let (a, b) = pinned_sides(inst, dec, value)?;
        let mut draws = Vec::new();
        for (label, side) in [('A', &a), ('B', &b)] {
            let trained = train::<f64, _>(&side.instance, opts.p, opts.dt, &train_opts)?;
            let seed = derive_seed(opts.seed, &format!("classical-{label}-{}", value as u8));
            draws.push(sample_uncut(&side.instance, &trained.params, noise, seed, shots, opts.reuse)?);
            training.push(ClassicalTraining {
                value,
                side: label,
                params: trained.params,
                initial_expectation: trained.initial_expectation,
                final_expectation: trained.final_expectation,
            });
        }
        let s = dec.s[0];
        for (&xa, &xb) in draws[0].iter().zip(&draws[1]) {
            let mut x: Bits = (value as Bits) << s;
            for (i, &v) in a.vertices.iter().enumerate() {
                x |= ((xa >> i) & 1) << v;
            }
            for (j, &v) in b.vertices.iter().enumerate() {
                x |= ((xb >> j) & 1) << v;
            }
            samples.push(x);
        }
    }
    Ok(ClassicalRun { samples, training })
}
