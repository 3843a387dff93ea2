use std::cmp::Ordering;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use super::ChangepointError;

/// Objectives within this distance are treated as equal.
pub const TIE_TOLERANCE: f64 = 1e-9;
pub const DEFAULT_ORACLE_LIMIT: usize = 16;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum CostKind {
    MeanShift,
    VarianceShift,
    NormalMeanVar,
}

impl CostKind {
    pub const ALL: [CostKind; 3] = [CostKind::MeanShift, CostKind::VarianceShift, CostKind::NormalMeanVar];
}

impl FromStr for CostKind {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        match s.trim().to_ascii_lowercase().replace(['_', '-'], "").as_str() {
            "meanshift" | "mean" => Ok(CostKind::MeanShift),
            "varianceshift" | "variance" => Ok(CostKind::VarianceShift),
            "normalmeanvar" | "meanvar" | "normal" => Ok(CostKind::NormalMeanVar),
            _ => Err(format!("unknown cost model {s:?}")),
        }
    }
}

impl fmt::Display for CostKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            CostKind::MeanShift => "MeanShift",
            CostKind::VarianceShift => "VarianceShift",
            CostKind::NormalMeanVar => "NormalMeanVar",
        })
    }
}

/// Segment cost functional plus the shortest admissible segment.
///
/// * `MeanShift`: residual sum of squares about the segment mean.
/// * `VarianceShift`: Gaussian negative log-likelihood (constants dropped)
///   with the mean fixed at the whole-series mean and a free variance.
/// * `NormalMeanVar`: the same with a free segment mean.
///
/// Variances are constrained to at least `variance_floor`, giving
/// `n ln max(v, floor) + n min(v / floor, 1)` for a segment of length `n`
/// with maximum-likelihood variance `v`. Being a constrained minimum, every
/// cost is superadditive under splitting, which keeps PELT pruning exact.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CostModel {
    pub kind: CostKind,
    pub variance_floor: f64,
    /// Variance costs of one- or two-point segments are unbounded below in
    /// practice, so they default to a minimum length of 2.
    pub min_segment_len: usize,
}

impl CostModel {
    pub fn new(kind: CostKind) -> Self {
        Self {
            kind,
            variance_floor: 1e-8,
            min_segment_len: if kind == CostKind::MeanShift { 1 } else { 2 },
        }
    }

    pub fn with_min_segment_len(mut self, m: usize) -> Self {
        self.min_segment_len = m;
        self
    }

    fn validate(&self) -> Result<(), ChangepointError> {
        if !(self.variance_floor > 0.0) {
            return Err(ChangepointError::Contract("variance_floor must be positive".into()));
        }
        if self.min_segment_len == 0 {
            return Err(ChangepointError::Contract("min_segment_len must be at least 1".into()));
        }
        Ok(())
    }
}

impl Default for CostModel {
    fn default() -> Self {
        Self::new(CostKind::NormalMeanVar)
    }
}

/// O(1) segment costs from prefix sums of the mean-centered series.
pub struct SegmentCosts {
    model: CostModel,
    centered: Vec<f64>,
    s1: Vec<f64>,
    s2: Vec<f64>,
}

impl SegmentCosts {
    pub fn new(values: &[f64], model: CostModel) -> Result<Self, ChangepointError> {
        model.validate()?;
        if values.iter().any(|v| !v.is_finite()) {
            return Err(ChangepointError::Contract("series contains non-finite values".into()));
        }
        let mean = if values.is_empty() {
            0.0
        } else {
            values.iter().sum::<f64>() / values.len() as f64
        };
        let centered: Vec<f64> = values.iter().map(|v| v - mean).collect();
        let mut s1 = vec![0.0; values.len() + 1];
        let mut s2 = vec![0.0; values.len() + 1];
        for (i, c) in centered.iter().enumerate() {
            s1[i + 1] = s1[i] + c;
            s2[i + 1] = s2[i] + c * c;
        }
        Ok(Self {
            model,
            centered,
            s1,
            s2,
        })
    }

    pub fn len(&self) -> usize {
        self.s1.len() - 1
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn model(&self) -> &CostModel {
        &self.model
    }

    /// Cost of the 1-based inclusive segment `s..=t`.
    pub fn cost(&self, s: usize, t: usize) -> f64 {
        debug_assert!(1 <= s && s <= t && t <= self.len());
        let n = (t - s + 1) as f64;
        let a = self.s1[t] - self.s1[s - 1];
        let b = self.s2[t] - self.s2[s - 1];
        let floor = self.model.variance_floor;
        let gauss = |v: f64| n * v.max(floor).ln() + n * (v / floor).min(1.0);
        // The prefix difference loses precision when the segment's sum of
        // squares is tiny next to the cumulative sum; the log and the floor
        // term then amplify the error, so recompute such segments directly.
        let cancelled = |ss: f64| ss < 1e-4 * self.s2[t];
        let seg = &self.centered[s - 1..t];
        let direct = |center: f64| seg.iter().map(|c| (c - center).powi(2)).sum::<f64>();
        match self.model.kind {
            CostKind::MeanShift => (b - a * a / n).max(0.0),
            CostKind::VarianceShift => {
                let ss = if cancelled(b) { direct(0.0) } else { b };
                gauss(ss.max(0.0) / n)
            }
            CostKind::NormalMeanVar => {
                let mut ss = b - a * a / n;
                if cancelled(ss) {
                    ss = direct(seg.iter().sum::<f64>() / n);
                }
                gauss(ss.max(0.0) / n)
            }
        }
    }
}

/// Cost of `values[s-1..t]` (1-based, inclusive).
pub fn segment_cost(values: &[f64], s: usize, t: usize, model: &CostModel) -> Result<f64, ChangepointError> {
    if s < 1 || s > t || t > values.len() {
        return Err(ChangepointError::Contract(format!(
            "segment {s}..={t} is outside 1..={}",
            values.len()
        )));
    }
    Ok(SegmentCosts::new(values, *model)?.cost(s, t))
}

/// Breakpoints `τ` are the last index of a segment (1-based), so the next
/// segment starts at day `τ + 1`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Segmentation {
    pub breakpoints: Vec<usize>,
    pub objective: f64,
}

impl Segmentation {
    /// 1-based inclusive `(start, end)` pairs for a series of length `n`.
    pub fn segments(&self, n: usize) -> Vec<(usize, usize)> {
        let mut out = Vec::with_capacity(self.breakpoints.len() + 1);
        let mut start = 1;
        for &b in &self.breakpoints {
            out.push((start, b));
            start = b + 1;
        }
        out.push((start, n));
        out
    }
}

/// Sum of segment costs plus `beta` per segment, accumulated in segment
/// order.
pub fn objective(costs: &SegmentCosts, breakpoints: &[usize], beta: f64) -> f64 {
    let seg = Segmentation {
        breakpoints: breakpoints.to_vec(),
        objective: 0.0,
    };
    seg.segments(costs.len())
        .iter()
        .fold(0.0, |acc, &(s, t)| acc + costs.cost(s, t) + beta)
}

/// Lower objective wins; near-ties go to fewer, then earlier, breakpoints.
fn better(a_obj: f64, a: &[usize], b_obj: f64, b: &[usize]) -> bool {
    if (a_obj - b_obj).abs() > TIE_TOLERANCE {
        return a_obj < b_obj;
    }
    match a.len().cmp(&b.len()) {
        Ordering::Less => true,
        Ordering::Greater => false,
        Ordering::Equal => a < b,
    }
}

fn check_beta(beta: f64) -> Result<(), ChangepointError> {
    if beta > 0.0 && beta.is_finite() {
        Ok(())
    } else {
        Err(ChangepointError::Contract(format!("beta must be positive, got {beta}")))
    }
}

/// Default penalty `2 ln N`.
pub fn default_beta(n: usize) -> f64 {
    2.0 * (n.max(2) as f64).ln()
}

/// Exact penalized segmentation by PELT with minimum segment length.
pub fn pelt(values: &[f64], model: &CostModel, beta: f64) -> Result<Segmentation, ChangepointError> {
    check_beta(beta)?;
    let n = values.len();
    if n < 2 {
        return Err(ChangepointError::Contract(format!("series length {n} is below 2")));
    }
    let costs = SegmentCosts::new(values, *model)?;
    let m = model.min_segment_len;
    if n < m {
        return Err(ChangepointError::Contract(format!(
            "series length {n} is shorter than the minimum segment length {m}"
        )));
    }
    // f[t] is the optimal penalized cost of y[1..=t]; paths[t] its breakpoints
    let mut f: Vec<Option<f64>> = vec![None; n + 1];
    let mut paths: Vec<Vec<usize>> = vec![Vec::new(); n + 1];
    f[0] = Some(0.0);
    // (candidate, time from which it is discarded)
    let mut candidates: Vec<(usize, usize)> = Vec::new();
    let mut pending = 0usize; // next s to enter the candidate set
    for t in m..=n {
        // s becomes usable at t once t - s >= m
        while pending + m <= t {
            if f[pending].is_some() {
                candidates.push((pending, usize::MAX));
            }
            pending += 1;
        }
        candidates.retain(|&(_, drop_at)| drop_at > t);
        let mut best: Option<(f64, Vec<usize>)> = None;
        let mut vals = Vec::with_capacity(candidates.len());
        for &(s, _) in &candidates {
            let fs = f[s].expect("candidates are feasible");
            let partial = fs + costs.cost(s + 1, t);
            vals.push(partial);
            let total = partial + beta;
            let mut path = paths[s].clone();
            if s > 0 {
                path.push(s);
            }
            if best.as_ref().map_or(true, |(b, bp)| better(total, &path, *b, bp)) {
                best = Some((total, path));
            }
        }
        let Some((ft, path)) = best else { continue };
        f[t] = Some(ft);
        paths[t] = path;
        // a candidate dominated now stays dominated for every end >= t + m
        for (c, partial) in candidates.iter_mut().zip(vals) {
            if partial > ft + TIE_TOLERANCE && c.1 == usize::MAX {
                c.1 = t + m;
            }
        }
    }
    let objective = f[n].ok_or_else(|| {
        ChangepointError::Contract("no admissible segmentation".into())
    })?;
    Ok(Segmentation {
        breakpoints: std::mem::take(&mut paths[n]),
        objective,
    })
}

/// Exhaustive search over all `2^(N-1)` segmentations, refusing series
/// longer than `limit`.
pub fn brute_force(
    values: &[f64],
    model: &CostModel,
    beta: f64,
    limit: usize,
) -> Result<Segmentation, ChangepointError> {
    check_beta(beta)?;
    let n = values.len();
    if n > limit {
        return Err(ChangepointError::OracleLimit { n, limit });
    }
    if n == 0 {
        return Err(ChangepointError::Contract("empty series".into()));
    }
    let costs = SegmentCosts::new(values, *model)?;
    let m = model.min_segment_len;
    let mut table = vec![vec![0.0; n + 1]; n + 1];
    for s in 1..=n {
        for t in s..=n {
            table[s][t] = costs.cost(s, t);
        }
    }
    let mut best: Option<(f64, Vec<usize>)> = None;
    for mask in 0u32..(1u32 << (n - 1)) {
        let bps: Vec<usize> = (1..n).filter(|b| mask & (1 << (b - 1)) != 0).collect();
        let mut start = 1;
        let mut total = 0.0;
        let mut ok = true;
        for end in bps.iter().copied().chain(std::iter::once(n)) {
            if end + 1 - start < m {
                ok = false;
                break;
            }
            total = total + table[start][end] + beta;
            start = end + 1;
        }
        if ok && best.as_ref().map_or(true, |(b, bp)| better(total, &bps, *b, bp)) {
            best = Some((total, bps));
        }
    }
    let (objective, breakpoints) =
        best.ok_or_else(|| ChangepointError::Contract("no admissible segmentation".into()))?;
    Ok(Segmentation {
        breakpoints,
        objective,
    })
}
