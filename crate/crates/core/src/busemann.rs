//! Busemann functions of speed-bounded curves and the `d_p` family.

use crate::completion::{CompletionCatalog, ClassKind};
use crate::extended::Ext;
use crate::function::{SampledFunction, Window};
use crate::graph::SampledSpace;
use crate::metric::DistanceOracle;
use crate::scalar::{lit, to_f64, Scalar};
use serde::Serialize;
use thiserror::Error;

/// Speed used by builders when the strict bound `F(ċ) < 1` matters.
pub const STRICT_SPEED: f64 = 1.0 - 1e-6;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Direction {
    Forward,
    Backward,
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum BusemannError {
    #[error("curve parameters must strictly increase (sample {0})")]
    NotIncreasing(usize),
    #[error("curve needs at least two samples")]
    TooShort,
    #[error("segment {k} has length {length} above its parameter step {ds}")]
    SpeedViolation { k: usize, length: f64, ds: f64 },
    #[error("point id {0} outside the sample")]
    BadId(usize),
    #[error("the Busemann function is infinite")]
    Infinite,
    #[error("finite end parameter but no catalog class matches (best error {best_error})")]
    CatalogIncomplete { best_error: f64 },
    #[error("curve CSV: {0}")]
    Csv(String),
}

/// Samples `(s_k, c(s_k))` of a curve with `F(ċ) ≤ 1` (forward) or
/// `F^rev(ċ) ≤ 1` (backward).
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SpeedBoundedCurve<T> {
    samples: Vec<(T, usize)>,
    omega_end: Option<T>,
    direction: Direction,
    pub label: String,
}

impl<T: Scalar> SpeedBoundedCurve<T> {
    /// `omega_end = None` declares `Ω = ∞`.
    pub fn new(samples: Vec<(T, usize)>, omega_end: Option<T>, direction: Direction, label: impl Into<String>) -> Result<Self, BusemannError> {
        if samples.len() < 2 {
            return Err(BusemannError::TooShort);
        }
        if let Some(k) = samples.windows(2).position(|w| !(w[1].0 > w[0].0)) {
            return Err(BusemannError::NotIncreasing(k + 1));
        }
        Ok(SpeedBoundedCurve { samples, omega_end, direction, label: label.into() })
    }

    /// Parametrizes a path of sample ids by accumulated edge length divided
    /// by `speed`; backward curves use reverse-edge weights. Non-adjacent
    /// consecutive ids use the graph distance.
    pub fn from_path(
        space: &SampledSpace<T>,
        ids: &[usize],
        speed: T,
        direction: Direction,
        infinite: bool,
        label: impl Into<String>,
    ) -> Result<Self, BusemannError> {
        if let Some(&bad) = ids.iter().find(|&&i| i >= space.len()) {
            return Err(BusemannError::BadId(bad));
        }
        let mut s = T::zero();
        let mut samples = vec![(s, ids[0])];
        for w in ids.windows(2) {
            let (a, b) = match direction {
                Direction::Forward => (w[0], w[1]),
                Direction::Backward => (w[1], w[0]),
            };
            let len = space.edge_weight(a, b).or_else(|| space.distance(a, b).finite()).ok_or(BusemannError::BadId(b))?;
            s = s + len / speed;
            samples.push((s, w[1]));
        }
        let omega = if infinite { None } else { Some(s) };
        Self::new(samples, omega, direction, label)
    }

    /// Constant curve at `x` sampled on `[−1, 0)`, or on `[0, k)` when infinite.
    pub fn constant(x: usize, k: usize, infinite: bool, direction: Direction) -> Self {
        let samples = (0..k.max(2))
            .map(|i| {
                let s = if infinite { lit::<T>(i as f64) } else { lit::<T>(-1.0 + i as f64 / k.max(2) as f64) };
                (s, x)
            })
            .collect();
        let omega = if infinite { None } else { Some(T::zero()) };
        SpeedBoundedCurve { samples, omega_end: omega, direction, label: format!("const{x}") }
    }

    /// Reads `s,x,y` rows and snaps coordinates to the nearest sample.
    pub fn from_csv(text: &str, space: &SampledSpace<T>, omega_end: Option<T>, direction: Direction, label: &str) -> Result<Self, BusemannError> {
        let mut samples = Vec::new();
        for (n, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') || (n == 0 && line.starts_with('s')) {
                continue;
            }
            let vals: Result<Vec<f64>, _> = line.split(',').map(|c| c.trim().parse::<f64>()).collect();
            let vals = vals.map_err(|e| BusemannError::Csv(format!("line {}: {e}", n + 1)))?;
            if vals.len() < 2 {
                return Err(BusemannError::Csv(format!("line {}: expected s and coordinates", n + 1)));
            }
            let y = vals.get(2).copied().unwrap_or(0.0);
            samples.push((lit::<T>(vals[0]), space.nearest([lit(vals[1]), lit(y)])));
        }
        Self::new(samples, omega_end, direction, label)
    }

    pub fn samples(&self) -> &[(T, usize)] {
        &self.samples
    }
    pub fn omega_end(&self) -> Option<T> {
        self.omega_end
    }
    pub fn direction(&self) -> Direction {
        self.direction
    }
    pub fn len(&self) -> usize {
        self.samples.len()
    }
    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    /// Samples from position `start` on.
    pub fn tail(&self, start: usize) -> Self {
        SpeedBoundedCurve { samples: self.samples[start..].to_vec(), ..self.clone() }
    }

    /// First `k` samples.
    pub fn prefix(&self, k: usize) -> Self {
        SpeedBoundedCurve { samples: self.samples[..k].to_vec(), ..self.clone() }
    }

    /// Checks `d(c_k, c_{k+1}) ≤ Δs` (reverse order for backward curves).
    pub fn audit_speed(&self, d: &dyn DistanceOracle<T>) -> Result<(), BusemannError> {
        for (k, w) in self.samples.windows(2).enumerate() {
            let (a, b) = match self.direction {
                Direction::Forward => (w[0].1, w[1].1),
                Direction::Backward => (w[1].1, w[0].1),
            };
            let ds = w[1].0 - w[0].0;
            let len = d.distance(a, b);
            if !len.le_tol(&Ext::Finite(ds), ds * lit(1e-12)) {
                return Err(BusemannError::SpeedViolation { k, length: len.to_f64(), ds: to_f64(ds) });
            }
        }
        Ok(())
    }

    /// Total parameter length covered by the samples.
    pub fn parameter_length(&self) -> T {
        self.samples[self.samples.len() - 1].0 - self.samples[0].0
    }
}

/// Busemann type of a function.
#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(rename_all = "snake_case", tag = "kind")]
pub enum BusemannKind {
    /// Not yet matched against a catalog.
    Unclassified,
    CauchyType { omega: f64, class: String, error: f64 },
    ProperlyBusemann,
    Infinite,
}

#[derive(Clone, Debug, PartialEq)]
pub struct BusemannFunction<T> {
    /// `None` when the function is identically `+∞` (forward) or `−∞` (backward).
    pub values: Option<SampledFunction<T>>,
    pub kind: BusemannKind,
    pub curve: String,
    pub direction: Direction,
    pub omega_end: Option<T>,
    /// Values at the first curve point for truncations `K/2, 3K/4, K`.
    pub truncation_probe: Vec<T>,
}

impl<T: Scalar> BusemannFunction<T> {
    pub fn is_finite(&self) -> bool {
        self.values.is_some()
    }
}

fn sup_over_curve<T: Scalar>(samples: &[(T, usize)], direction: Direction, space: &SampledSpace<T>) -> Vec<T> {
    let sources: Vec<(usize, T)> = samples.iter().map(|&(s, c)| (c, -s)).collect();
    match direction {
        // sup_k (s_k − d(x, c_k)) = −min_k (d(x, c_k) − s_k)
        Direction::Forward => space.raw_to(&sources).into_iter().map(|v| -v).collect(),
        // inf_k (d(c_k, x) − s_k)
        Direction::Backward => space.raw_from(&sources),
    }
}

/// `x ↦ sup_k (s_k − d(x, c_k))` on a forward curve, `inf_k (d(c_k, x) − s_k)`
/// on a backward one, restricted to `targets`.
///
/// With `Ω = ∞` the function is flagged infinite when its value at the first
/// curve point exceeds a quarter of the parameter length and strictly grows
/// over the truncations `K/2, 3K/4, K`.
pub fn busemann_eval<T: Scalar>(
    c: &SpeedBoundedCurve<T>,
    targets: &Window,
    base_id: usize,
    space: &SampledSpace<T>,
) -> Result<BusemannFunction<T>, BusemannError> {
    c.audit_speed(space)?;
    let sign = match c.direction {
        Direction::Forward => T::one(),
        Direction::Backward => -T::one(),
    };
    let k = c.len();
    let c0 = c.samples[0].1;
    let s0 = c.samples[0].0;
    let mut probe = Vec::new();
    for m in [k.div_ceil(2), (3 * k).div_ceil(4), k] {
        let raw = sup_over_curve(&c.samples[..m.max(1)], c.direction, space);
        probe.push(sign * raw[c0]);
    }
    let infinite = c.omega_end.is_none() && {
        let growth = probe[2] - s0;
        growth > (c.parameter_length()) / lit(4.0) && probe[0] < probe[1] && probe[1] < probe[2]
    };
    let raw = sup_over_curve(&c.samples, c.direction, space);
    let values = if infinite { None } else { SampledFunction::from_raw(targets.clone(), &raw, base_id) };
    let kind = if values.is_none() { BusemannKind::Infinite } else { BusemannKind::Unclassified };
    Ok(BusemannFunction { values, kind, curve: c.label.clone(), direction: c.direction, omega_end: c.omega_end, truncation_probe: probe })
}

/// Largest decrease of `s_k − d(x, c_k)` between consecutive samples
/// (increase of `−s_k + d(c_k, x)` for backward curves). Negative values
/// mean strict monotonicity.
pub fn monotonicity_check<T: Scalar>(c: &SpeedBoundedCurve<T>, x: usize, d: &dyn DistanceOracle<T>) -> T {
    let g: Vec<Ext<T>> = match c.direction {
        Direction::Forward => {
            let row = d.row_from(x);
            c.samples.iter().map(|&(_, ck)| row[ck]).collect()
        }
        Direction::Backward => {
            let row = d.row_to(x);
            c.samples.iter().map(|&(_, ck)| row[ck]).collect()
        }
    };
    let mut worst = T::neg_infinity();
    for k in 0..c.len() - 1 {
        let (Ext::Finite(a), Ext::Finite(b)) = (g[k], g[k + 1]) else { continue };
        let (s0, s1) = (c.samples[k].0, c.samples[k + 1].0);
        let v = match c.direction {
            Direction::Forward => (s0 - a) - (s1 - b),
            Direction::Backward => (-s1 + b) - (-s0 + a),
        };
        worst = worst.max(v);
    }
    worst
}

/// Suggested matching tolerance `5h · length / diameter`, at least `5h`.
pub fn classification_tol<T: Scalar>(h: T, curve_length: T, diameter: T) -> T {
    let five_h = h * lit(5.0);
    if diameter > T::zero() {
        five_h.max(five_h * curve_length / diameter)
    } else {
        five_h
    }
}

/// Matches `b` against `Ω − d(·, z)` (forward) or `Ω + d(z, ·)` (backward)
/// for every compatible catalog class.
pub fn classify_busemann<T: Scalar>(b: &BusemannFunction<T>, catalog: &CompletionCatalog<T>, tol: T) -> Result<BusemannKind, BusemannError> {
    let Some(f) = &b.values else { return Ok(BusemannKind::Infinite) };
    let mut best: Option<(T, T, usize)> = None;
    for (k, class) in catalog.classes.iter().enumerate() {
        let compatible = match b.direction {
            Direction::Forward => class.kind.is_forward() || class.kind == ClassKind::Interior,
            Direction::Backward => class.kind.is_backward() || class.kind == ClassKind::Interior,
        };
        if !compatible {
            continue;
        }
        let (row, sign) = match b.direction {
            Direction::Forward => (catalog.to_class(k), T::one()),
            Direction::Backward => (catalog.from_class(k), -T::one()),
        };
        // Ω estimate from b(x) + d(x, z) (forward) or b(x) − d(z, x) (backward).
        let mut lo = T::infinity();
        let mut hi = T::neg_infinity();
        let mut finite = true;
        for (&x, &v) in f.ids().iter().zip(f.values()) {
            match row[x] {
                Ext::Finite(dx) => {
                    let w = v + sign * dx;
                    lo = lo.min(w);
                    hi = hi.max(w);
                }
                Ext::Infinite => {
                    finite = false;
                    break;
                }
            }
        }
        if !finite {
            continue;
        }
        let err = (hi - lo) / lit(2.0);
        if best.is_none_or(|b| err < b.0) {
            best = Some((err, (hi + lo) / lit(2.0), k));
        }
    }
    match best {
        Some((err, omega, k)) if err <= tol => {
            Ok(BusemannKind::CauchyType { omega: to_f64(omega), class: catalog.classes[k].label.clone(), error: to_f64(err) })
        }
        other => {
            if b.omega_end.is_none() {
                Ok(BusemannKind::ProperlyBusemann)
            } else {
                Err(BusemannError::CatalogIncomplete { best_error: other.map_or(f64::INFINITY, |b| to_f64(b.0)) })
            }
        }
    }
}

/// Target of a `d_p` function.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum DpTarget {
    Point(usize),
    /// Index into a catalog's classes.
    Class(usize),
}

/// `t − d(·, x)` for `sign = +`, `t + d(x, ·)` for `sign = −`.
pub fn dp_function<T: Scalar>(
    t: T,
    target: DpTarget,
    d: &dyn DistanceOracle<T>,
    catalog: Option<&CompletionCatalog<T>>,
    forward: bool,
    window: &Window,
    base_id: usize,
) -> Option<SampledFunction<T>> {
    let row = match (target, forward) {
        (DpTarget::Point(x), true) => d.row_to(x),
        (DpTarget::Point(x), false) => d.row_from(x),
        (DpTarget::Class(k), true) => catalog?.to_class(k).clone(),
        (DpTarget::Class(k), false) => catalog?.from_class(k).clone(),
    };
    let sign = if forward { -T::one() } else { T::one() };
    SampledFunction::from_row(window.clone(), &row, sign, t, base_id)
}

/// `d_{p1}⁺ ≪ d_{p2}⁺` iff `d(x1, x2) < t2 − t1`.
pub fn dp_strict_order<T: Scalar>(p1: (T, usize), p2: (T, usize), d: &dyn DistanceOracle<T>) -> bool {
    match d.distance(p1.1, p2.1) {
        Ext::Finite(v) => v < p2.0 - p1.0,
        Ext::Infinite => false,
    }
}

/// Sample-wise `f < g` on the whole window.
pub fn pointwise_strictly_below<T: Scalar>(f: &SampledFunction<T>, g: &SampledFunction<T>) -> bool {
    f.values().iter().zip(g.values()).all(|(a, b)| a < b)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::completion::CauchyClass;
    use crate::graph::{build_from_spec, FieldsSpec, Interval, SpaceSpec};
    use crate::metric::Chart;
    use crate::randers::MetricForm;

    fn flat(n: f64, h: f64, radius: usize) -> SampledSpace<f64> {
        let mut spec = SpaceSpec::grid(
            2,
            Chart::Cartesian,
            vec![Interval::closed(0.0, n), Interval::closed(0.0, n)],
            vec![h],
            FieldsSpec { form: MetricForm::Fermat, g0: vec!["1".into(), "0".into(), "1".into()], omega: vec!["0".into(), "0".into()] },
        );
        spec.stencil_radius = radius;
        build_from_spec(&spec).unwrap()
    }

    #[test]
    fn constant_curve_gives_distance_function() {
        let s = flat(2.0, 0.25, 1);
        let x = s.nearest([1.0, 1.0]);
        let w: Window = (0..s.len()).collect::<Vec<_>>().into();
        let c = SpeedBoundedCurve::constant(x, 8, false, Direction::Forward);
        let b = busemann_eval(&c, &w, x, &s).unwrap();
        let f = b.values.unwrap();
        let row = s.row_to(x);
        let last_s = c.samples().last().unwrap().0;
        for (&i, &v) in f.ids().iter().zip(f.values()) {
            assert_eq!(v, last_s - row[i].finite().unwrap());
        }
        let inf = SpeedBoundedCurve::constant(x, 40, true, Direction::Forward);
        assert!(busemann_eval(&inf, &w, x, &s).unwrap().values.is_none());
    }

    #[test]
    fn reversed_parameters_rejected() {
        assert_eq!(
            SpeedBoundedCurve::new(vec![(1.0, 0), (0.5, 1)], None, Direction::Forward, "c").unwrap_err(),
            BusemannError::NotIncreasing(1)
        );
    }

    #[test]
    fn strict_curve_is_monotone() {
        let s = flat(3.0, 0.25, 1);
        let path: Vec<usize> = (0..=12).map(|i| s.nearest([i as f64 * 0.25, 1.0])).collect();
        let c = SpeedBoundedCurve::from_path(&s, &path, STRICT_SPEED, Direction::Forward, true, "ray").unwrap();
        for x in 0..s.len() {
            assert!(monotonicity_check(&c, x, &s) <= 0.0);
        }
        let tail = c.tail(c.len() / 2);
        let w: Window = (0..s.len()).collect::<Vec<_>>().into();
        let b1 = busemann_eval(&c, &w, path[0], &s).unwrap();
        let b2 = busemann_eval(&tail, &w, path[0], &s).unwrap();
        assert_eq!(b1.values, b2.values);
    }

    #[test]
    fn strict_order_examples() {
        let s = flat(3.0, 0.5, 1);
        let x = s.nearest([0.0, 0.0]);
        let y = s.nearest([1.0, 0.0]);
        assert!(dp_strict_order((0.0, x), (2.0, y), &s));
        assert!(!dp_strict_order((0.0, x), (1.0, y), &s));
        assert!(!dp_strict_order((0.0, x), (0.0, x), &s));
        let w: Window = (0..s.len()).collect::<Vec<_>>().into();
        let f1 = dp_function(0.0, DpTarget::Point(x), &s, None, true, &w, x).unwrap();
        let f2 = dp_function(2.0, DpTarget::Point(y), &s, None, true, &w, x).unwrap();
        assert!(pointwise_strictly_below(&f1, &f2));
        let f3 = dp_function(1.0, DpTarget::Point(y), &s, None, true, &w, x).unwrap();
        assert!(!pointwise_strictly_below(&f1, &f3));
        let shifted = dp_function(3.5, DpTarget::Point(x), &s, None, true, &w, x).unwrap();
        assert_eq!(shifted, f1.shift(3.5));
    }

    #[test]
    fn interior_class_match() {
        let s = flat(2.0, 0.25, 1);
        let x = s.nearest([1.0, 1.0]);
        let w: Window = (0..s.len()).collect::<Vec<_>>().into();
        let cat = CompletionCatalog::build(&s, vec![CauchyClass::interior(x)], vec![], 1e-9);
        let c = SpeedBoundedCurve::constant(x, 8, false, Direction::Forward);
        let b = busemann_eval(&c, &w, x, &s).unwrap();
        match classify_busemann(&b, &cat, 1e-9).unwrap() {
            BusemannKind::CauchyType { omega, .. } => assert!((omega - c.samples().last().unwrap().0).abs() < 1e-12),
            k => panic!("{k:?}"),
        }
    }
}
