//! 1-Lipschitz functions modulo constants: the horofunction side.

use crate::completion::{interior_limit, tail_window, CompletionCatalog, PointSequence};
use crate::extended::Ext;
use crate::function::{SampledFunction, Window};
use crate::graph::SampledSpace;
use crate::metric::DistanceOracle;
use crate::scalar::{lit, to_f64, Scalar};
use serde::Serialize;

/// Outcome of an edgewise Lipschitz audit.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct LipschitzAudit {
    pub ok: bool,
    /// Edge `(i, j)` maximizing `f(j) − f(i) − w(i→j)`.
    pub worst_edge: Option<(usize, usize)>,
    pub worst_excess: f64,
}

/// Checks `f(j) − f(i) ≤ w(i→j) + tol` on every edge inside the window.
pub fn is_lipschitz1<T: Scalar>(f: &SampledFunction<T>, space: &SampledSpace<T>, tol: T) -> LipschitzAudit {
    let mut pos = vec![usize::MAX; space.len()];
    for (p, &i) in f.ids().iter().enumerate() {
        pos[i] = p;
    }
    let vals = f.values();
    let mut worst = (f64::NEG_INFINITY, None);
    for (p, &i) in f.ids().iter().enumerate() {
        for (j, w) in space.out_edges(i) {
            let q = pos[j];
            if q == usize::MAX {
                continue;
            }
            let excess = to_f64(vals[q] - vals[p] - w);
            if excess > worst.0 {
                worst = (excess, Some((i, j)));
            }
        }
    }
    if worst.1.is_none() {
        worst.0 = 0.0;
    }
    LipschitzAudit { ok: worst.0 <= to_f64(tol), worst_edge: worst.1, worst_excess: worst.0 }
}

/// Pairwise audit `f(y) − f(x) ≤ d(x, y) + tol` for any oracle.
pub fn is_lipschitz1_pairwise<T: Scalar>(f: &SampledFunction<T>, d: &dyn DistanceOracle<T>, tol: T) -> LipschitzAudit {
    let vals = f.values();
    let mut worst = (f64::NEG_INFINITY, None);
    for (p, &x) in f.ids().iter().enumerate() {
        let row = d.row_from(x);
        for (q, &y) in f.ids().iter().enumerate() {
            if let Ext::Finite(dxy) = row[y] {
                let excess = to_f64(vals[q] - vals[p] - dxy);
                if excess > worst.0 {
                    worst = (excess, Some((x, y)));
                }
            }
        }
    }
    if worst.1.is_none() {
        worst.0 = 0.0;
    }
    LipschitzAudit { ok: worst.0 <= to_f64(tol), worst_edge: worst.1, worst_excess: worst.0 }
}

/// Representative with value zero at the base point.
#[derive(Clone, Debug, PartialEq)]
pub struct NormalizedClass<T>(SampledFunction<T>);

impl<T: Scalar> NormalizedClass<T> {
    pub fn function(&self) -> &SampledFunction<T> {
        &self.0
    }
    pub fn into_function(self) -> SampledFunction<T> {
        self.0
    }
    /// Sup-norm distance between normalized representatives.
    pub fn distance(&self, other: &Self) -> T {
        self.0.sup_distance(&other.0)
    }
}

/// `f − f(base)`.
pub fn normalize_at<T: Scalar>(f: &SampledFunction<T>, base_id: usize) -> NormalizedClass<T> {
    let g = f.with_base(base_id);
    let b = g.at_base();
    NormalizedClass(g.map(|v| v - b))
}

/// Weighted sup distance `sup |f1 − f2| / (1 + d̃(x, base)²)` with
/// `d̃ = max(dˢ, Euclidean distance of positions)`.
pub fn d1_metric<T: Scalar>(f1: &SampledFunction<T>, f2: &SampledFunction<T>, base_id: usize, d: &dyn DistanceOracle<T>) -> T {
    let from = d.row_from(base_id);
    let to = d.row_to(base_id);
    let base_label = d.label(base_id);
    let mut best = T::zero();
    for ((&x, &a), &b) in f1.ids().iter().zip(f1.values()).zip(f2.values()) {
        let ds = from[x].mean(to[x]).to_float();
        let eu = match (base_label, d.label(x)) {
            (Some(p), Some(q)) => p.euclidean_to(&q),
            _ => T::zero(),
        };
        let dt = ds.max(eu);
        let v = if dt.is_finite() { (a - b).abs() / (T::one() + dt * dt) } else { T::zero() };
        best = best.max(v);
    }
    best
}

/// Result of a pointwise limit estimate.
#[derive(Clone, Debug, PartialEq)]
pub enum PointwiseLimit<T> {
    Converges(NormalizedClass<T>),
    /// `+1` for `+∞`, `−1` for `−∞`.
    Diverges(i8),
    NoLimit { worst_id: usize, oscillation: T },
}

impl<T: Scalar> PointwiseLimit<T> {
    pub fn limit(&self) -> Option<&NormalizedClass<T>> {
        match self {
            PointwiseLimit::Converges(c) => Some(c),
            _ => None,
        }
    }
}

fn runs_away<T: Scalar>(vals: &[T], tol: T) -> i8 {
    let n = vals.len();
    if n < 4 {
        return 0;
    }
    let half = n / 2;
    let up = vals.windows(2).all(|w| w[1] >= w[0]);
    let down = vals.windows(2).all(|w| w[1] <= w[0]);
    let first = (vals[half] - vals[0]).abs();
    let second = (vals[n - 1] - vals[half]).abs();
    // Monotone without slowing down: a convergent tail decelerates.
    let steady = second >= first * lit(0.5) && second > tol;
    match (up, down, steady) {
        (true, _, true) => 1,
        (_, true, true) => -1,
        _ => 0,
    }
}

/// Per-sample tail-window limit of normalized classes.
pub fn pointwise_limit<T: Scalar>(seq: &[NormalizedClass<T>], tol: T) -> PointwiseLimit<T> {
    assert!(seq.len() >= crate::completion::MIN_TERMS, "pointwise limit needs at least 8 terms");
    let n = seq.len();
    let tail = &seq[n - tail_window(n).max(4)..];
    let last = tail.last().expect("nonempty").function().clone();
    let ids = last.ids().clone();
    let mut worst: Option<(usize, T)> = None;
    let mut direction = 0i8;
    for p in 0..ids.len() {
        let vals: Vec<T> = tail.iter().map(|c| c.function().values()[p]).collect();
        let lo = vals.iter().copied().fold(T::infinity(), T::min);
        let hi = vals.iter().copied().fold(T::neg_infinity(), T::max);
        if hi - lo <= tol {
            continue;
        }
        match runs_away(&vals, tol) {
            0 => {
                if worst.is_none_or(|w| hi - lo > w.1) {
                    worst = Some((ids[p], hi - lo));
                }
            }
            s => {
                if direction != 0 && direction != s {
                    worst = worst.or(Some((ids[p], hi - lo)));
                }
                direction = s;
            }
        }
    }
    if let Some((worst_id, oscillation)) = worst {
        return PointwiseLimit::NoLimit { worst_id, oscillation };
    }
    if direction != 0 {
        return PointwiseLimit::Diverges(direction);
    }
    PointwiseLimit::Converges(normalize_at(&last, last.base_id()))
}

/// Normalized class of `−d(·, x)` on a window.
pub fn distance_class<T: Scalar>(window: &Window, row_to_x: &[Ext<T>], base_id: usize) -> Option<NormalizedClass<T>> {
    SampledFunction::from_row(window.clone(), row_to_x, -T::one(), T::zero(), base_id).map(|f| normalize_at(&f, base_id))
}

/// Gromov boundary type of a pointwise limit.
#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(rename_all = "snake_case", tag = "kind")]
pub enum GromovKind {
    MPoint { id: usize },
    /// Bounded witness; `class` is `None` for the residual part.
    CauchyGromov { class: Option<String> },
    ProperGromov,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct GromovClassification {
    pub kind: GromovKind,
    pub bounded: bool,
    /// Sup distance to the best matching catalog class.
    pub best_match_error: f64,
}

/// Whether a witness stays in a bounded forward ball: the tail radius
/// `max d(x_1, x_n)` must not exceed 1.5 times the radius reached by the
/// first half of the sequence (plus `tol`).
pub fn witness_bounded<T: Scalar>(witness: &PointSequence, d: &dyn DistanceOracle<T>, tol: T) -> bool {
    let row = d.row_from(witness.ids[0]);
    let r: Vec<Ext<T>> = witness.ids.iter().map(|&i| row[i]).collect();
    let n = r.len();
    let head = r[..n / 2].iter().copied().max().unwrap_or(Ext::zero());
    let tail = r[n - tail_window(n)..].iter().copied().max().unwrap_or(Ext::zero());
    match (head, tail) {
        (_, Ext::Infinite) => false,
        (Ext::Infinite, _) => true,
        (Ext::Finite(h), Ext::Finite(t)) => t <= h * lit(1.5) + tol,
    }
}

/// Classifies a limit obtained from `witness`.
pub fn gromov_classify<T: Scalar>(
    limit: &NormalizedClass<T>,
    catalog: &CompletionCatalog<T>,
    witness: &PointSequence,
    d: &dyn DistanceOracle<T>,
    tol: T,
) -> GromovClassification {
    let window = limit.function().ids().clone();
    let base = limit.function().base_id();
    if let Some(id) = interior_limit(witness, d, tol) {
        if let Some(c) = distance_class(&window, &d.row_to(id), base) {
            let err = c.distance(limit);
            if err <= tol {
                return GromovClassification { kind: GromovKind::MPoint { id }, bounded: true, best_match_error: to_f64(err) };
            }
        }
    }
    let bounded = witness_bounded(witness, d, tol);
    let mut best: (T, Option<String>) = (T::infinity(), None);
    for (k, class) in catalog.classes.iter().enumerate() {
        if !class.kind.is_boundary() {
            continue;
        }
        if let Some(c) = distance_class(&window, catalog.to_class(k), base) {
            let err = c.distance(limit);
            if err < best.0 {
                best = (err, Some(class.label.clone()));
            }
        }
    }
    let kind = if !bounded {
        GromovKind::ProperGromov
    } else if best.0 <= tol {
        GromovKind::CauchyGromov { class: best.1 }
    } else {
        GromovKind::CauchyGromov { class: None }
    };
    GromovClassification { kind, bounded, best_match_error: to_f64(best.0) }
}
