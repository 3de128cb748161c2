//! Cauchy sequences, the relation between them, double limits, quasi-distances
//! on classes and boundary classification on finite samples.
//!
//! Limits are estimated on tail windows: the last `⌈N/4⌉` terms of a sequence
//! of `N` terms. Indices reported to callers are 1-based.

use crate::extended::Ext;
use crate::metric::{DistanceMatrix, DistanceOracle, Reversed};
use crate::scalar::{lit, to_f64, Scalar};
use serde::Serialize;
use std::sync::Arc;
use thiserror::Error;

/// Minimum number of terms for any verdict.
pub const MIN_TERMS: usize = 8;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum CompletionError {
    #[error("sequence `{source_tag}` has {len} terms; at least {MIN_TERMS} are needed")]
    TooShort { source_tag: String, len: usize },
    #[error("sequence `{0}` is neither forward nor backward Cauchy")]
    NotCauchy(String),
    #[error("sequence `{0}` is not forward Cauchy")]
    NotForwardCauchy(String),
    #[error("sequence `{0}` is not alternative Cauchy")]
    NotAlternativeCauchy(String),
    #[error("extraction from `{0}` did not yield a Cauchy subsequence related to the input")]
    ExtractionFailed(String),
    #[error("evenly-pairing check needs at least two truncations")]
    TooFewTruncations,
    #[error("point id {0} outside the sample")]
    BadId(usize),
}

/// Ordered list of sample ids.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct PointSequence {
    pub ids: Vec<usize>,
    pub source: String,
}

impl PointSequence {
    pub fn new(ids: Vec<usize>, source: impl Into<String>) -> Self {
        PointSequence { ids, source: source.into() }
    }

    pub fn constant(id: usize, len: usize) -> Self {
        PointSequence { ids: vec![id; len], source: format!("const:{id}") }
    }

    /// Truncation `N`.
    pub fn len(&self) -> usize {
        self.ids.len()
    }

    pub fn is_empty(&self) -> bool {
        self.ids.is_empty()
    }

    /// Terms at the given 0-based positions.
    pub fn subsequence(&self, positions: &[usize], tag: &str) -> PointSequence {
        PointSequence { ids: positions.iter().map(|&p| self.ids[p]).collect(), source: format!("{}:{tag}", self.source) }
    }

    pub fn prefix(&self, n: usize) -> PointSequence {
        PointSequence { ids: self.ids[..n.min(self.len())].to_vec(), source: format!("{}[..{n}]", self.source) }
    }

    fn check(&self, n_points: usize) -> Result<(), CompletionError> {
        if self.len() < MIN_TERMS {
            return Err(CompletionError::TooShort { source_tag: self.source.clone(), len: self.len() });
        }
        match self.ids.iter().find(|&&i| i >= n_points) {
            Some(&bad) => Err(CompletionError::BadId(bad)),
            None => Ok(()),
        }
    }
}

/// Size of the tail window for `n` terms.
pub fn tail_window(n: usize) -> usize {
    n.div_ceil(4).max(1)
}

/// Monotone behavior of a windowed estimate.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Trend {
    Stable,
    Increasing,
    Decreasing,
    Oscillating,
}

/// Trend of a window of values at tolerance `tol`.
pub fn trend_of<T: Scalar>(values: &[Ext<T>], tol: T) -> Trend {
    if values.len() < 2 {
        return Trend::Stable;
    }
    let lo = values.iter().copied().min().expect("nonempty");
    let hi = values.iter().copied().max().expect("nonempty");
    if hi.approx_eq(&lo, tol) {
        return Trend::Stable;
    }
    let up = values.windows(2).all(|w| w[0].le_tol(&w[1], tol));
    let down = values.windows(2).all(|w| w[1].le_tol(&w[0], tol));
    match (up, down) {
        (true, _) => Trend::Increasing,
        (_, true) => Trend::Decreasing,
        _ => Trend::Oscillating,
    }
}

/// Pairwise matrix `m[a][b] = d(x_a, x_b)` over the terms of a sequence.
struct SeqMatrix<T> {
    n: usize,
    d: Vec<Ext<T>>,
}

impl<T: Scalar> SeqMatrix<T> {
    fn new(seq: &PointSequence, d: &dyn DistanceOracle<T>) -> Self {
        let n = seq.len();
        let mut out = Vec::with_capacity(n * n);
        let mut rows: Vec<(usize, Arc<[Ext<T>]>)> = Vec::new();
        for &a in &seq.ids {
            let row = match rows.iter().find(|r| r.0 == a) {
                Some(r) => r.1.clone(),
                None => {
                    let r = d.row_from(a);
                    rows.push((a, r.clone()));
                    r
                }
            };
            out.extend(seq.ids.iter().map(|&b| row[b]));
        }
        SeqMatrix { n, d: out }
    }

    fn get(&self, a: usize, b: usize, reversed: bool) -> Ext<T> {
        if reversed {
            self.d[b * self.n + a]
        } else {
            self.d[a * self.n + b]
        }
    }
}

/// Outcome of the Cauchy tests on one sequence.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CauchyVerdict {
    pub forward: bool,
    pub backward: bool,
    pub alternative_forward: bool,
    pub epsilon_schedule: Vec<f64>,
    /// Per ε: the 1-based `n₀` found by the forward test.
    pub forward_n0: Vec<Option<usize>>,
    /// Per ε: the 1-based `n₀` found by the alternative test.
    pub alternative_n0: Vec<Option<usize>>,
    /// Forward-test failures: 1-based `(n, m)` with `d(x_n, x_m) ≥ ε`,
    /// the first violating `m` for each `n` in the second half.
    pub witnesses: Vec<(usize, usize)>,
}

fn forward_test<T: Scalar>(m: &SeqMatrix<T>, eps: T, reversed: bool) -> (Option<usize>, Vec<(usize, usize)>) {
    let n = m.n;
    // suffix[a] = max over a ≤ i ≤ j < n of d(x_i, x_j)
    let mut suffix = vec![Ext::zero(); n + 1];
    for a in (0..n).rev() {
        let mut row_max = Ext::zero();
        for b in a..n {
            row_max = row_max.max(m.get(a, b, reversed));
        }
        suffix[a] = suffix[a + 1].max(row_max);
    }
    let half = n / 2;
    let n0 = (0..=half.min(n - 1)).find(|&a| suffix[a].lt_real(eps));
    let mut witnesses = Vec::new();
    if n0.is_none() {
        for a in half..n {
            if let Some(b) = (a + 1..n).find(|&b| !m.get(a, b, reversed).lt_real(eps)) {
                witnesses.push((a + 1, b + 1));
            }
        }
    }
    (n0.map(|a| a + 1), witnesses)
}

fn alternative_test<T: Scalar>(m: &SeqMatrix<T>, eps: T) -> Option<usize> {
    let n = m.n;
    let w_start = n - tail_window(n);
    let half = n / 2;
    // m0(a): first index after a from which every later term is ε-close.
    let good = |a: usize| -> bool {
        let mut m0 = n;
        for b in (a + 1..n).rev() {
            if m.get(a, b, false).lt_real(eps) {
                m0 = b;
            } else {
                break;
            }
        }
        m0 <= w_start.max(a + 1)
    };
    let mut n0 = None;
    for a in (0..=half).rev() {
        if good(a) {
            n0 = Some(a);
        } else {
            break;
        }
    }
    n0.map(|a| a + 1)
}

fn verdict_from_matrix<T: Scalar>(m: &SeqMatrix<T>, schedule: &[T]) -> CauchyVerdict {
    let mut v = CauchyVerdict {
        forward: true,
        backward: true,
        alternative_forward: true,
        epsilon_schedule: schedule.iter().map(|e| to_f64(*e)).collect(),
        forward_n0: vec![],
        alternative_n0: vec![],
        witnesses: vec![],
    };
    for &eps in schedule {
        let (f0, wit) = forward_test(m, eps, false);
        let (b0, _) = forward_test(m, eps, true);
        let a0 = alternative_test(m, eps);
        v.forward &= f0.is_some();
        v.backward &= b0.is_some();
        v.alternative_forward &= a0.is_some() || f0.is_some();
        v.forward_n0.push(f0);
        v.alternative_n0.push(a0.or(f0));
        if v.witnesses.is_empty() {
            v.witnesses = wit;
        }
    }
    v
}

/// Forward, backward and alternative Cauchy tests over an ε-schedule.
///
/// For each ε the forward test looks for `n₀ ≤ N/2` with `d(x_n, x_m) < ε`
/// for all `n₀ ≤ n ≤ m ≤ N`; the backward test does the same for `d^rev`.
pub fn is_forward_cauchy<T: Scalar>(
    seq: &PointSequence,
    d: &dyn DistanceOracle<T>,
    schedule: &[T],
) -> Result<CauchyVerdict, CompletionError> {
    seq.check(d.len())?;
    Ok(verdict_from_matrix(&SeqMatrix::new(seq, d), schedule))
}

/// Alternative Cauchy test: for each ε some `n₀ ≤ N/2` such that every
/// `n ∈ [n₀, N/2]` has an `m₀(n)` no later than the tail window after which
/// all terms stay within ε of `x_n`.
pub fn is_alternative_cauchy<T: Scalar>(
    seq: &PointSequence,
    d: &dyn DistanceOracle<T>,
    schedule: &[T],
) -> Result<CauchyVerdict, CompletionError> {
    is_forward_cauchy(seq, d, schedule)
}

/// Estimate of `lim_n lim_m d(a_n, b_m)`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct DoubleLimit {
    pub value: f64,
    pub finite: bool,
    pub trend: Trend,
    /// 1-based tail window of `a` used for the outer limit.
    pub outer_window: (usize, usize),
    /// 1-based tail window of `b` used for the inner limits.
    pub inner_window: (usize, usize),
    pub inner_stable: bool,
    pub outer_stable: bool,
    pub diagnostic: Option<String>,
}

impl DoubleLimit {
    pub fn ext<T: Scalar>(&self) -> Ext<T> {
        if self.finite {
            Ext::Finite(lit(self.value))
        } else {
            Ext::Infinite
        }
    }
}

/// Double limit estimated by tail-window stabilization.
///
/// The inner limit for `a_n` is `d(a_n, b_N)`, stable when the values over
/// the inner window vary by less than `tol`; the outer limit is the inner
/// estimate at the last term of `a`.
pub fn double_limit<T: Scalar>(
    a: &PointSequence,
    b: &PointSequence,
    d: &dyn DistanceOracle<T>,
    tol: T,
) -> DoubleLimit {
    let (na, nb) = (a.len(), b.len());
    assert!(na > 0 && nb > 0, "double limit of an empty sequence");
    let (wa, wb) = (tail_window(na), tail_window(nb));
    let b_tail = &b.ids[nb - wb..];
    let mut inner = Vec::with_capacity(wa);
    let mut inner_stable = true;
    let mut worst: Option<(usize, f64)> = None;
    for (k, &x) in a.ids[na - wa..].iter().enumerate() {
        let row = d.row_from(x);
        let vals: Vec<Ext<T>> = b_tail.iter().map(|&y| row[y]).collect();
        let est = *vals.last().expect("nonempty window");
        if trend_of(&vals, tol) != Trend::Stable {
            inner_stable = false;
            let spread = vals.iter().max().unwrap().to_f64() - vals.iter().min().unwrap().to_f64();
            if worst.is_none_or(|w| spread > w.1) {
                worst = Some((na - wa + k + 1, spread));
            }
        }
        inner.push(est);
    }
    let trend = trend_of(&inner, tol);
    let value = *inner.last().expect("nonempty window");
    DoubleLimit {
        value: value.to_f64(),
        finite: value.is_finite(),
        trend,
        outer_window: (na - wa + 1, na),
        inner_window: (nb - wb + 1, nb),
        inner_stable,
        outer_stable: trend == Trend::Stable,
        diagnostic: worst.map(|(n, s)| format!("inner limit for n = {n} varies by {s:.3e} over the window")),
    }
}

/// Settings shared by catalog-level operations.
#[derive(Clone, Debug, PartialEq)]
pub struct CompletionConfig<T> {
    /// Tolerance for limits and class comparisons.
    pub tol: T,
    /// ε-schedule for Cauchy preconditions.
    pub schedule: Vec<T>,
}

impl<T: Scalar> CompletionConfig<T> {
    pub fn new(tol: T, schedule: &[f64]) -> Self {
        CompletionConfig { tol, schedule: schedule.iter().map(|&e| lit(e)).collect() }
    }
}

/// Both double limits between two sequences are within `tol` of zero.
pub fn related<T: Scalar>(a: &PointSequence, b: &PointSequence, d: &dyn DistanceOracle<T>, tol: T) -> bool {
    let ab = double_limit(a, b, d, tol);
    let ba = double_limit(b, a, d, tol);
    ab.ext::<T>().le_tol(&Ext::zero(), tol) && ba.ext::<T>().le_tol(&Ext::zero(), tol)
}

/// Equivalence of two forward-Cauchy sequences.
pub fn are_equivalent<T: Scalar>(
    a: &PointSequence,
    b: &PointSequence,
    d: &dyn DistanceOracle<T>,
    cfg: &CompletionConfig<T>,
) -> Result<bool, CompletionError> {
    for s in [a, b] {
        if !is_forward_cauchy(s, d, &cfg.schedule)?.forward {
            return Err(CompletionError::NotForwardCauchy(s.source.clone()));
        }
    }
    Ok(related(a, b, d, cfg.tol))
}

/// Extracts a forward-Cauchy subsequence from an alternative-Cauchy one.
///
/// Step `k` uses `ε_k = 1/k`: the next term is the first `n ≥ m(n_{k−1})`
/// whose later terms all lie within `ε_k` from some index `m(n)` on, and
/// `m(n)` becomes the lower bound for the following step.
pub fn extract_cauchy_subsequence<T: Scalar>(
    seq: &PointSequence,
    d: &dyn DistanceOracle<T>,
    cfg: &CompletionConfig<T>,
) -> Result<PointSequence, CompletionError> {
    let verdict = is_alternative_cauchy(seq, d, &cfg.schedule)?;
    if !verdict.alternative_forward {
        return Err(CompletionError::NotAlternativeCauchy(seq.source.clone()));
    }
    let m = SeqMatrix::new(seq, d);
    let n = seq.len();
    let m_of = |a: usize, eps: T| -> usize {
        let mut m0 = n;
        for b in (a + 1..n).rev() {
            if m.get(a, b, false).lt_real(eps) {
                m0 = b;
            } else {
                break;
            }
        }
        m0
    };
    let mut picked = Vec::new();
    let mut start = 0;
    let mut k = 1usize;
    while start < n {
        let eps: T = T::one() / lit(k as f64);
        // First index whose ε-tail is non-empty; when none is left the
        // truncation is exhausted and the remaining term closes the list.
        match (start..n).find_map(|a| {
            let next = m_of(a, eps);
            (next < n).then_some((a, next))
        }) {
            Some((a, next)) => {
                picked.push(a);
                start = next.max(a + 1);
            }
            None => {
                picked.push(start);
                break;
            }
        }
        k += 1;
    }
    let out = seq.subsequence(&picked, "cauchy-subsequence");
    if out.len() < MIN_TERMS
        || !is_forward_cauchy(&out, d, &cfg.schedule)?.forward
        || !tail_follows(seq, &picked, d, cfg.tol)
    {
        return Err(CompletionError::ExtractionFailed(seq.source.clone()));
    }
    Ok(out)
}

/// Ordered relation between a sequence and its extracted indices: over
/// the tail, each picked term reaches every later term of `seq` from the
/// next pick on within `tol`.
fn tail_follows<T: Scalar>(seq: &PointSequence, picked: &[usize], d: &dyn DistanceOracle<T>, tol: T) -> bool {
    let tol = Ext::Finite(tol);
    let from = picked.len().saturating_sub(tail_window(picked.len()));
    picked.windows(2).skip(from).all(|w| {
        let row = d.row_from(seq.ids[w[0]]);
        seq.ids[w[1]..].iter().all(|&b| row[b].le_tol(&tol, T::zero()))
    })
}

/// Kind of a Cauchy class.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum ClassKind {
    Interior,
    ForwardBoundary,
    BackwardBoundary,
    SymmetrizedBoundary,
}

impl ClassKind {
    pub fn is_forward(self) -> bool {
        matches!(self, ClassKind::ForwardBoundary | ClassKind::SymmetrizedBoundary)
    }
    pub fn is_backward(self) -> bool {
        matches!(self, ClassKind::BackwardBoundary | ClassKind::SymmetrizedBoundary)
    }
    pub fn is_boundary(self) -> bool {
        self != ClassKind::Interior
    }
}

/// A class, identified by a canonical representative sequence.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CauchyClass {
    pub label: String,
    pub representative: PointSequence,
    pub kind: ClassKind,
    pub limit_id: Option<usize>,
}

impl CauchyClass {
    pub fn interior(id: usize) -> Self {
        CauchyClass {
            label: format!("p{id}"),
            representative: PointSequence::constant(id, MIN_TERMS),
            kind: ClassKind::Interior,
            limit_id: Some(id),
        }
    }

    /// Sample id standing for the class at this truncation: the last term.
    pub fn anchor(&self) -> usize {
        *self.representative.ids.last().expect("nonempty representative")
    }
}

/// Interior limit of a sequence: a sample within `tol` of every tail term in
/// both directions that is not itself within `tol` of a frontier sample.
/// Samples that close to the frontier cannot be told apart from the missing
/// points beyond it at this resolution.
pub fn interior_limit<T: Scalar>(seq: &PointSequence, d: &dyn DistanceOracle<T>, tol: T) -> Option<usize> {
    let n = seq.len();
    let tail = &seq.ids[n - tail_window(n)..];
    let mut candidates: Vec<usize> = tail.to_vec();
    candidates.sort_unstable();
    candidates.dedup();
    let tol_ext = Ext::Finite(tol);
    let near = |from: &[Ext<T>], to: &[Ext<T>], x: usize| from[x].le_tol(&tol_ext, T::zero()) && to[x].le_tol(&tol_ext, T::zero());
    candidates.into_iter().filter(|&c| !d.is_frontier(c)).find(|&c| {
        let from = d.row_from(c);
        let to = d.row_to(c);
        tail.iter().all(|&x| near(&from, &to, x)) && !(0..d.len()).any(|f| d.is_frontier(f) && near(&from, &to, f))
    })
}

/// Tags a Cauchy sequence as interior or as a boundary class.
pub fn classify_boundary_point<T: Scalar>(
    seq: &PointSequence,
    d_forward: &dyn DistanceOracle<T>,
    d_backward: &dyn DistanceOracle<T>,
    cfg: &CompletionConfig<T>,
) -> Result<CauchyClass, CompletionError> {
    let f = is_forward_cauchy(seq, d_forward, &cfg.schedule)?.forward;
    let b = is_forward_cauchy(seq, d_backward, &cfg.schedule)?.forward;
    if !f && !b {
        return Err(CompletionError::NotCauchy(seq.source.clone()));
    }
    if let Some(id) = interior_limit(seq, d_forward, cfg.tol) {
        return Ok(CauchyClass {
            label: seq.source.clone(),
            representative: seq.clone(),
            kind: ClassKind::Interior,
            limit_id: Some(id),
        });
    }
    let kind = match (f, b) {
        (true, true) => ClassKind::SymmetrizedBoundary,
        (true, false) => ClassKind::ForwardBoundary,
        _ => ClassKind::BackwardBoundary,
    };
    Ok(CauchyClass { label: seq.source.clone(), representative: seq.clone(), kind, limit_id: None })
}

/// Quasi-distance between classes: the double limit of representatives.
pub fn quasi_distance<T: Scalar>(a: &CauchyClass, b: &CauchyClass, d: &dyn DistanceOracle<T>, tol: T) -> Ext<T> {
    double_limit(&a.representative, &b.representative, d, tol).ext()
}

/// Classes of one sampled space with their quasi-distance matrix.
#[derive(Clone, Debug)]
pub struct CompletionCatalog<T: Scalar> {
    pub classes: Vec<CauchyClass>,
    pub interior_ids: Vec<usize>,
    /// Over `classes` followed by `interior_ids`.
    pub dq: DistanceMatrix<T>,
    pub tol: T,
    to_rows: Vec<Arc<[Ext<T>]>>,
    from_rows: Vec<Arc<[Ext<T>]>>,
}

impl<T: Scalar> CompletionCatalog<T> {
    /// Computes `d_Q` over classes and interior points.
    pub fn build(d: &dyn DistanceOracle<T>, classes: Vec<CauchyClass>, interior_ids: Vec<usize>, tol: T) -> Self {
        let mut all: Vec<CauchyClass> = classes.clone();
        all.extend(interior_ids.iter().map(|&i| CauchyClass::interior(i)));
        let dq = DistanceMatrix::from_fn(all.len(), |i, j| {
            if i == j {
                Ext::zero()
            } else if all[i].kind == ClassKind::Interior && all[j].kind == ClassKind::Interior {
                d.distance(all[i].anchor(), all[j].anchor())
            } else {
                quasi_distance(&all[i], &all[j], d, tol)
            }
        });
        let to_rows = classes.iter().map(|c| d.row_to(c.anchor())).collect();
        let from_rows = classes.iter().map(|c| d.row_from(c.anchor())).collect();
        CompletionCatalog { classes, interior_ids, dq, tol, to_rows, from_rows }
    }

    pub fn index_of(&self, label: &str) -> Option<usize> {
        self.classes.iter().position(|c| c.label == label)
    }

    pub fn class(&self, label: &str) -> Option<&CauchyClass> {
        self.classes.iter().find(|c| c.label == label)
    }

    /// `d_Q` between two catalog classes by label.
    pub fn dq_between(&self, a: &str, b: &str) -> Option<Ext<T>> {
        Some(self.dq.get(self.index_of(a)?, self.index_of(b)?))
    }

    /// `y ↦ d(y, z)` for class `k`, estimated at the anchor.
    pub fn to_class(&self, k: usize) -> &Arc<[Ext<T>]> {
        &self.to_rows[k]
    }

    /// `y ↦ d(z, y)` for class `k`, estimated at the anchor.
    pub fn from_class(&self, k: usize) -> &Arc<[Ext<T>]> {
        &self.from_rows[k]
    }

    /// Labels of the classes in both the forward and backward boundary.
    pub fn symmetrized_boundary(&self) -> Vec<&str> {
        self.classes.iter().filter(|c| c.kind == ClassKind::SymmetrizedBoundary).map(|c| c.label.as_str()).collect()
    }

    pub fn labels(&self) -> Vec<String> {
        self.classes
            .iter()
            .map(|c| c.label.clone())
            .chain(self.interior_ids.iter().map(|i| format!("p{i}")))
            .collect()
    }

    pub fn to_json(&self) -> serde_json::Value {
        let dq: Vec<Vec<serde_json::Value>> = (0..self.dq.len())
            .map(|i| {
                (0..self.dq.len())
                    .map(|j| match self.dq.get(i, j) {
                        Ext::Finite(v) => serde_json::json!(to_f64(v)),
                        Ext::Infinite => serde_json::json!("inf"),
                    })
                    .collect()
            })
            .collect();
        serde_json::json!({
            "classes": self.classes,
            "interior_ids": self.interior_ids,
            "labels": self.labels(),
            "tol": to_f64(self.tol),
            "dq": dq,
        })
    }

    pub fn dq_csv(&self) -> String {
        let mut out = self.labels().join(",");
        out.push('\n');
        out.push_str(&self.dq.to_csv());
        out
    }
}

/// Large-value verdict across truncations: every value exceeds `T/4` and
/// the values strictly increase with `T`.
pub fn diverges_with_truncation<T: Scalar>(values: &[(T, Ext<T>)]) -> bool {
    values.len() >= 2
        && values.iter().all(|(t, v)| !v.le_tol(&Ext::Finite(*t / lit(4.0)), T::zero()))
        && values.windows(2).all(|w| w[1].1 > w[0].1)
}

/// One truncation of a space for the evenly-pairing check.
pub struct TruncationObservation<'a, T: Scalar> {
    pub truncation: T,
    pub oracle: &'a dyn DistanceOracle<T>,
    pub catalog: &'a CompletionCatalog<T>,
    pub probe: usize,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum PairingVerdict {
    EvenlyPairing,
    NotEvenlyPairing,
    Undetermined,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ClassPairing {
    pub label: String,
    pub kind: ClassKind,
    /// `(T, d_Q(class, x))` for forward classes, `(T, d_Q(x, class))` for backward ones.
    pub values: Vec<(f64, f64)>,
    pub verdict: PairingVerdict,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct EvenlyPairingReport {
    pub classes: Vec<ClassPairing>,
    pub evenly_pairing: bool,
}

/// Checks whether non-symmetrized boundary classes sit at infinite distance
/// from an interior probe, using the growth of `d_Q` across truncations.
pub fn evenly_pairing_check<T: Scalar>(
    observations: &[TruncationObservation<'_, T>],
) -> Result<EvenlyPairingReport, CompletionError> {
    if observations.len() < 2 {
        return Err(CompletionError::TooFewTruncations);
    }
    let first = observations[0].catalog;
    let mut classes = Vec::new();
    for class in &first.classes {
        if !matches!(class.kind, ClassKind::ForwardBoundary | ClassKind::BackwardBoundary) {
            continue;
        }
        let mut values = Vec::new();
        for obs in observations {
            let Some(c) = obs.catalog.class(&class.label) else { continue };
            let probe = PointSequence::constant(obs.probe, MIN_TERMS);
            let v: Ext<T> = if c.kind == ClassKind::ForwardBoundary {
                double_limit(&c.representative, &probe, obs.oracle, obs.catalog.tol).ext()
            } else {
                double_limit(&probe, &c.representative, obs.oracle, obs.catalog.tol).ext()
            };
            values.push((obs.truncation, v));
        }
        let tol = first.tol;
        let stable = values.len() >= 2
            && values.iter().all(|v| v.1.is_finite())
            && values.windows(2).all(|w| w[0].1.approx_eq(&w[1].1, tol));
        let verdict = if diverges_with_truncation(&values) {
            PairingVerdict::EvenlyPairing
        } else if stable {
            PairingVerdict::NotEvenlyPairing
        } else {
            PairingVerdict::Undetermined
        };
        classes.push(ClassPairing {
            label: class.label.clone(),
            kind: class.kind,
            values: values.iter().map(|(t, v)| (to_f64(*t), v.to_f64())).collect(),
            verdict,
        });
    }
    let evenly_pairing = classes.iter().all(|c| c.verdict == PairingVerdict::EvenlyPairing);
    Ok(EvenlyPairingReport { classes, evenly_pairing })
}

/// Backward view used when a caller only holds the forward oracle.
pub fn backward<T: Scalar, O: DistanceOracle<T>>(d: O) -> Reversed<O> {
    Reversed(d)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::{build_from_spec, FieldsSpec, Interval, SampledSpace, SpaceSpec};
    use crate::metric::{Chart, DistanceMatrix};
    use crate::randers::MetricForm;

    fn flat_square(h: f64) -> SampledSpace<f64> {
        let spec = SpaceSpec::grid(
            2,
            Chart::Cartesian,
            vec![Interval::closed(0.0, 1.0), Interval::closed(0.0, 1.0)],
            vec![h],
            FieldsSpec { form: MetricForm::Standard, g0: vec!["1".into(), "0".into(), "1".into()], omega: vec!["0".into(), "0".into()] },
        );
        build_from_spec(&spec).unwrap()
    }

    fn line_matrix(xs: &[f64]) -> DistanceMatrix<f64> {
        DistanceMatrix::from_fn(xs.len(), |i, j| Ext::Finite((xs[i] - xs[j]).abs()))
    }

    #[test]
    fn convergent_sequence_is_cauchy() {
        let s = flat_square(0.01);
        let ids: Vec<usize> = (2..=41).map(|n| s.nearest([1.0 / n as f64, 0.0])).collect();
        let seq = PointSequence::new(ids, "1/n");
        let v = is_forward_cauchy(&seq, &s, &[1.0, 0.3, 0.1]).unwrap();
        assert!(v.forward && v.backward && v.alternative_forward);
        let c = PointSequence::constant(5, 12);
        let v = is_forward_cauchy(&c, &s, &[1e-9]).unwrap();
        assert!(v.forward);
    }

    #[test]
    fn alternating_points_fail() {
        let m = line_matrix(&[0.0, 1.0]);
        let seq = PointSequence::new((0..20).map(|k| k % 2).collect(), "alt");
        let v = is_forward_cauchy(&seq, &m, &[0.5]).unwrap();
        assert!(!v.forward && !v.alternative_forward && !v.backward);
        assert!(!v.witnesses.is_empty());
        let cfg = CompletionConfig::new(0.01, &[0.5]);
        assert!(matches!(extract_cauchy_subsequence(&seq, &m, &cfg), Err(CompletionError::NotAlternativeCauchy(_))));
    }

    #[test]
    fn short_sequences_rejected() {
        let m = line_matrix(&[0.0, 1.0]);
        let seq = PointSequence::new(vec![0, 1, 0], "short");
        assert!(matches!(is_forward_cauchy(&seq, &m, &[0.5]), Err(CompletionError::TooShort { .. })));
    }

    #[test]
    fn double_limit_of_constants() {
        let m = line_matrix(&[0.0, 2.5, 4.0]);
        let a = PointSequence::constant(0, 8);
        let b = PointSequence::constant(2, 8);
        let dl = double_limit(&a, &b, &m, 1e-9);
        assert_eq!(dl.value, 4.0);
        assert!(dl.inner_stable && dl.outer_stable);
    }

    #[test]
    fn equivalence_examples() {
        let s = flat_square(0.01);
        let cfg = CompletionConfig::new(0.02, &[1.0, 0.3]);
        let a = PointSequence::new((2..=41).map(|n| s.nearest([0.5 + 1.0 / n as f64 / 4.0, 0.5])).collect(), "a");
        let b = PointSequence::new((2..=41).map(|n| s.nearest([0.5, 0.5 - 1.0 / n as f64 / 4.0])).collect(), "b");
        assert!(are_equivalent(&a, &b, &s, &cfg).unwrap());
        let evens: Vec<usize> = (0..a.len()).filter(|k| k % 2 == 1).collect();
        let sub = a.subsequence(&evens, "even");
        assert!(are_equivalent(&a, &sub, &s, &cfg).unwrap());
        let far = PointSequence::constant(s.nearest([0.9, 0.9]), 40);
        assert!(!are_equivalent(&a, &far, &s, &cfg).unwrap());
    }

    #[test]
    fn extraction_keeps_cauchy_input() {
        let s = flat_square(0.01);
        let cfg = CompletionConfig::new(0.02, &[1.0, 0.3, 0.1]);
        let a = PointSequence::new((2..=41).map(|n| s.nearest([0.5 + 1.0 / n as f64 / 4.0, 0.5])).collect(), "a");
        let out = extract_cauchy_subsequence(&a, &s, &cfg).unwrap();
        assert!(is_forward_cauchy(&out, &s, &cfg.schedule).unwrap().forward);
        assert!(are_equivalent(&a, &out, &s, &cfg).unwrap());
    }

    #[test]
    fn interior_classification() {
        let s = flat_square(0.01);
        let cfg = CompletionConfig::new(0.005, &[1.0, 0.3, 0.1]);
        let target = s.nearest([0.5, 0.5]);
        let seq = PointSequence::new((2..=41).map(|n| s.nearest([0.5 + 0.1 / (n * n) as f64, 0.5])).collect(), "conv");
        let c = classify_boundary_point(&seq, &s, &Reversed(&s), &cfg).unwrap();
        assert_eq!(c.kind, ClassKind::Interior);
        assert_eq!(c.limit_id, Some(target));
        let edge = PointSequence::new((2..=41).map(|n| s.nearest([1.0 / n as f64, 0.5])).collect(), "edge");
        let c = classify_boundary_point(&edge, &s, &Reversed(&s), &cfg).unwrap();
        assert_eq!(c.kind, ClassKind::SymmetrizedBoundary);
    }

    #[test]
    fn trends() {
        let e = |v: f64| Ext::Finite(v);
        assert_eq!(trend_of(&[e(1.0), e(1.0)], 1e-9), Trend::Stable);
        assert_eq!(trend_of(&[e(1.0), e(2.0), e(3.0)], 1e-9), Trend::Increasing);
        assert_eq!(trend_of(&[e(3.0), e(2.0)], 1e-9), Trend::Decreasing);
        assert_eq!(trend_of(&[e(1.0), e(3.0), e(2.0)], 1e-9), Trend::Oscillating);
        assert!(diverges_with_truncation(&[(20.0, e(10.0)), (40.0, e(30.0))]));
        assert!(!diverges_with_truncation(&[(20.0, e(10.0)), (40.0, e(9.0))]));
    }
}
