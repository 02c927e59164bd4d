//! Objective-value histograms, the normalized objective and percentiles.

use std::cmp::Ordering;
use std::collections::BTreeMap;
use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::graph::{Bits, MaxCutInstance};
use crate::scalar::Weight;
use crate::shrink::{expand_bits, ShrinkTrace};
use crate::wirecut::SignedSampleSet;

/// Histogram key ordered by [`Weight::cmp_total`].
#[derive(Clone, Debug)]
pub struct Objective<W>(pub W);

impl<W: Weight> PartialEq for Objective<W> {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}

impl<W: Weight> Eq for Objective<W> {}

impl<W: Weight> PartialOrd for Objective<W> {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl<W: Weight> Ord for Objective<W> {
    fn cmp(&self, other: &Self) -> Ordering {
        self.0.cmp_total(&other.0)
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct Bin {
    /// Signed before clamping.
    pub weight: f64,
    /// Shots that landed in this bin, regardless of sign.
    pub count: usize,
}

#[derive(Clone, Debug, PartialEq)]
pub struct ObjectiveHistogram<W: Weight> {
    pub bins: BTreeMap<Objective<W>, Bin>,
    pub shots: usize,
    pub normalized: bool,
}

impl<W: Weight> Default for ObjectiveHistogram<W> {
    fn default() -> Self {
        Self { bins: BTreeMap::new(), shots: 0, normalized: false }
    }
}

impl<W: Weight> ObjectiveHistogram<W> {
    /// Builds a histogram directly from `(objective, weight)` pairs.
    pub fn from_weights(weights: impl IntoIterator<Item = (W, f64)>) -> Self {
        let mut h = Self::default();
        for (c, w) in weights {
            h.add(c, w, 1);
        }
        h
    }

    pub fn add(&mut self, objective: W, weight: f64, count: usize) {
        let bin = self.bins.entry(Objective(objective)).or_default();
        bin.weight += weight;
        bin.count += count;
        self.shots += count;
        self.normalized = false;
    }

    /// Bin-wise sum; associative and commutative.
    pub fn merge(&mut self, other: &Self) {
        for (k, b) in &other.bins {
            self.add(k.0.clone(), b.weight, b.count);
        }
    }

    pub fn total_weight(&self) -> f64 {
        self.bins.values().map(|b| b.weight).sum()
    }

    /// Sum of negative bin weights as a fraction of the absolute total.
    pub fn negative_mass_fraction(&self) -> f64 {
        let abs: f64 = self.bins.values().map(|b| b.weight.abs()).sum();
        if abs == 0.0 {
            return 0.0;
        }
        let negative = self.bins.values().filter(|b| b.weight < 0.0).fold(0.0, |acc, b| acc - b.weight);
        negative / abs
    }

    pub fn weight(&self, objective: &W) -> f64 {
        self.bins.get(&Objective(objective.clone())).map_or(0.0, |b| b.weight)
    }

    /// Objective values that received at least one shot.
    pub fn observed(&self) -> impl Iterator<Item = &W> {
        self.bins.iter().filter(|(_, b)| b.count > 0).map(|(k, _)| &k.0)
    }

    pub fn to_csv(&self, instance_digest: &str, kappa: Option<f64>) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "# instance={instance_digest}");
        let _ = writeln!(out, "# shots={}", self.shots);
        if let Some(k) = kappa {
            let _ = writeln!(out, "# kappa={k}");
        }
        let _ = writeln!(out, "# negative_mass={}", self.negative_mass_fraction());
        out.push_str("objective,weight\n");
        for (k, b) in &self.bins {
            let _ = writeln!(out, "{},{}", k.0.to_text(), b.weight);
        }
        out
    }

    /// Reads the `objective,weight` rows written by [`Self::to_csv`]. Counts
    /// and shot totals are not stored there and come back as zero.
    pub fn from_csv(text: &str) -> Result<Self> {
        let mut h = Self::default();
        for (i, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') || line == "objective,weight" {
                continue;
            }
            let err = |message: String| Error::Parse { line: i + 1, message };
            let (c, w) = line.split_once(',').ok_or_else(|| err("expected objective,weight".into()))?;
            let c = W::parse_weight(c).ok_or_else(|| err(format!("bad objective {c:?}")))?;
            let w: f64 = w.trim().parse().map_err(|_| err(format!("bad weight {w:?}")))?;
            h.bins.entry(Objective(c)).or_default().weight += w;
        }
        Ok(h)
    }
}

/// Shots to histogram.
#[derive(Clone, Copy, Debug)]
pub enum Samples<'a> {
    /// Unsigned bitstrings, weight `1/N` each.
    Plain { num_vertices: usize, bits: &'a [Bits] },
    /// Signed shots, weight `sign * kappa / N` each.
    Signed(&'a SignedSampleSet),
}

impl Samples<'_> {
    fn num_vertices(&self) -> usize {
        match self {
            Samples::Plain { num_vertices, .. } => *num_vertices,
            Samples::Signed(set) => set.num_vertices,
        }
    }

    fn len(&self) -> usize {
        match self {
            Samples::Plain { bits, .. } => bits.len(),
            Samples::Signed(set) => set.samples.len(),
        }
    }
}

/// Objective histogram of `samples` on `inst`, expanding each sample
/// through `trace` first when given.
pub fn histogram_from_samples<W: Weight>(
    samples: Samples<'_>,
    inst: &MaxCutInstance<W>,
    trace: Option<&ShrinkTrace<W>>,
) -> Result<ObjectiveHistogram<W>> {
    let width = samples.num_vertices();
    let target = match trace {
        Some(t) => {
            if t.shrunk_n() != width {
                return Err(Error::LengthMismatch { expected: t.shrunk_n(), actual: width });
            }
            t.original_n
        }
        None => width,
    };
    if target != inst.num_vertices() {
        return Err(Error::LengthMismatch { expected: inst.num_vertices(), actual: target });
    }
    let n = samples.len();
    let mut h = ObjectiveHistogram::default();
    if n == 0 {
        return Ok(h);
    }
    let mut memo: BTreeMap<Bits, W> = BTreeMap::new();
    let mut value = |x: Bits| -> W {
        memo.entry(x)
            .or_insert_with(|| {
                let y = trace.map_or(x, |t| expand_bits(t, x));
                inst.cut_value_bits(y)
            })
            .clone()
    };
    // (net signed count, shots) per bin; weights from integers at the end
    let mut tally: BTreeMap<Objective<W>, (i64, usize)> = BTreeMap::new();
    let unit = match samples {
        Samples::Plain { bits, .. } => {
            for &x in bits {
                let t = tally.entry(Objective(value(x))).or_default();
                t.0 += 1;
                t.1 += 1;
            }
            1.0 / n as f64
        }
        Samples::Signed(set) => {
            for &(x, sign) in &set.samples {
                let t = tally.entry(Objective(value(x))).or_default();
                t.0 += i64::from(sign);
                t.1 += 1;
            }
            set.kappa / n as f64
        }
    };
    for (k, (net, count)) in tally {
        h.add(k.0, net as f64 * unit, count);
    }
    Ok(h)
}

/// `r = (c - c0) / (c* - c0)` with `c0` the expectation under uniformly
/// random assignments. Computed exactly in `W`.
pub fn normalized_objective<W: Weight>(c: &W, inst: &MaxCutInstance<W>, c_star: &W) -> Result<f64> {
    let c0 = inst.random_expectation();
    let denom = c_star.clone() - c0.clone();
    if denom <= W::zero() {
        return Err(invalid(format!("optimum {c_star} does not exceed the random expectation {c0}")));
    }
    Ok(((c.clone() - c0) / denom).as_f64())
}

/// Negative bins dropped, the rest scaled to total 1.
pub fn clamp_normalize<W: Weight>(h: &ObjectiveHistogram<W>) -> Result<ObjectiveHistogram<W>> {
    let positive: f64 = h.bins.values().filter(|b| b.weight > 0.0).map(|b| b.weight).sum();
    if positive <= 0.0 {
        return Err(invalid("histogram has no positive weight"));
    }
    let bins = h
        .bins
        .iter()
        .filter(|(_, b)| b.weight > 0.0)
        .map(|(k, b)| (k.clone(), Bin { weight: b.weight / positive, count: b.count }))
        .collect();
    Ok(ObjectiveHistogram { bins, shots: h.shots, normalized: true })
}

/// Smallest key whose cumulative weight reaches `q`.
pub fn percentile<W: Weight>(h: &ObjectiveHistogram<W>, q: f64) -> Result<W> {
    if !h.normalized {
        return Err(invalid("percentile needs a normalized histogram"));
    }
    if !(q > 0.0 && q < 1.0) {
        return Err(invalid(format!("quantile {q} outside (0, 1)")));
    }
    let mut acc = 0.0;
    for (k, b) in &h.bins {
        acc += b.weight;
        if acc >= q - 1e-12 {
            return Ok(k.0.clone());
        }
    }
    h.bins.keys().next_back().map(|k| k.0.clone()).ok_or_else(|| invalid("empty histogram"))
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Summary {
    pub best_r: f64,
    pub mean_r: f64,
    pub min_r: f64,
    pub p95_objective: f64,
    pub p95_r: f64,
    pub negative_mass_clamped: f64,
    pub shots: usize,
    pub c_star: f64,
    pub c0: f64,
}

/// Metrics of a histogram on `inst`. Best and worst values range over
/// observed shots; mean and percentile use the clamped distribution.
pub fn summarize<W: Weight>(h: &ObjectiveHistogram<W>, inst: &MaxCutInstance<W>, c_star: &W) -> Result<Summary> {
    let clamped = clamp_normalize(h)?;
    let r = |c: &W| normalized_objective(c, inst, c_star);
    let best = h.observed().max_by(|a, b| a.cmp_total(b)).ok_or_else(|| invalid("empty histogram"))?;
    let worst = h.observed().min_by(|a, b| a.cmp_total(b)).ok_or_else(|| invalid("empty histogram"))?;
    let mut mean_r = 0.0;
    for (k, b) in &clamped.bins {
        mean_r += b.weight * r(&k.0)?;
    }
    let p95 = percentile(&clamped, 0.95)?;
    Ok(Summary {
        best_r: r(best)?,
        mean_r,
        min_r: r(worst)?,
        p95_objective: p95.as_f64(),
        p95_r: r(&p95)?,
        negative_mass_clamped: h.negative_mass_fraction(),
        shots: h.shots,
        c_star: c_star.as_f64(),
        c0: inst.random_expectation().as_f64(),
    })
}
