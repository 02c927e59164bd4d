//! Planted-separator instance generator.

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::graph::MaxCutInstance;
use crate::scalar::Weight;

/// Generated instance together with its planted layout.
#[derive(Clone, Debug)]
pub struct GeneratedInstance<W> {
    pub instance: MaxCutInstance<W>,
    pub community_a: Vec<usize>,
    pub community_b: Vec<usize>,
    pub separator: Vec<usize>,
}

/// Unit-weight graph with `n` vertices and exactly `m` edges: two
/// communities of near-equal size joined only through `separator_size`
/// separator vertices, each adjacent to both communities.
///
/// Each community gets a random spanning tree, each separator vertex one edge
/// into each community, and the remaining edges are drawn uniformly from all
/// pairs that do not cross between the communities. Labels are shuffled.
pub fn generate_instance<W: Weight>(
    n: usize,
    m: usize,
    separator_size: usize,
    seed: u64,
) -> Result<GeneratedInstance<W>> {
    let infeasible = |msg: String| Error::InvalidArgument(format!("infeasible generator parameters: {msg}"));
    if n < 1 || m + 1 < n {
        return Err(infeasible(format!("cannot connect {n} nodes with {m} edges")));
    }
    if separator_size == 0 {
        return Err(infeasible("separator size must be at least 1".into()));
    }
    if n < separator_size + 2 {
        return Err(infeasible(format!("{n} nodes leave no room for two communities around {separator_size} separator nodes")));
    }
    if n > crate::graph::MAX_VERTICES {
        return Err(infeasible(format!("{n} nodes exceeds {}", crate::graph::MAX_VERTICES)));
    }
    let rest = n - separator_size;
    let (na, nb) = (rest.div_ceil(2), rest / 2);
    let min_edges = (na - 1) + (nb - 1) + 2 * separator_size;
    let pairs = |k: usize| k * (k.saturating_sub(1)) / 2;
    let max_edges = pairs(na) + pairs(nb) + separator_size * rest + pairs(separator_size);
    if m < min_edges {
        return Err(infeasible(format!("{m} edges cannot connect the planted layout (needs {min_edges})")));
    }
    if m > max_edges {
        return Err(infeasible(format!("{m} edges exceed the {max_edges} allowed by the planted layout")));
    }

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut labels: Vec<usize> = (0..n).collect();
    labels.shuffle(&mut rng);
    let community_a: Vec<usize> = labels[..na].to_vec();
    let community_b: Vec<usize> = labels[na..rest].to_vec();
    let separator: Vec<usize> = labels[rest..].to_vec();

    let mut present = vec![vec![false; n]; n];
    let mut edges = Vec::with_capacity(m);
    let mut add = |u: usize, v: usize, edges: &mut Vec<(usize, usize)>| {
        if !present[u][v] {
            present[u][v] = true;
            present[v][u] = true;
            edges.push((u, v));
        }
    };
    for side in [&community_a, &community_b] {
        for i in 1..side.len() {
            let j = rng.gen_range(0..i);
            add(side[i], side[j], &mut edges);
        }
    }
    for &s in &separator {
        let a = community_a[rng.gen_range(0..na)];
        let b = community_b[rng.gen_range(0..nb)];
        add(s, a, &mut edges);
        add(s, b, &mut edges);
    }

    let mut candidates = Vec::new();
    let groups = [&community_a, &community_b];
    for g in groups {
        for (i, &u) in g.iter().enumerate() {
            for &v in &g[i + 1..] {
                candidates.push((u, v));
            }
        }
    }
    for (i, &s) in separator.iter().enumerate() {
        for &v in community_a.iter().chain(&community_b).chain(&separator[i + 1..]) {
            candidates.push((s, v));
        }
    }
    candidates.retain(|&(u, v)| !present[u][v]);
    candidates.shuffle(&mut rng);
    let missing = m - edges.len();
    edges.extend(candidates.into_iter().take(missing));

    let sorted = |mut v: Vec<usize>| {
        v.sort_unstable();
        v
    };
    Ok(GeneratedInstance {
        instance: MaxCutInstance::unweighted(n, &edges)?,
        community_a: sorted(community_a),
        community_b: sorted(community_b),
        separator: sorted(separator),
    })
}
