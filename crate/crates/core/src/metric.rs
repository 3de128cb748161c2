//! Finite distance oracles and axiom testers for generalized distances.

use crate::extended::Ext;
use crate::scalar::{lit, Scalar};
use serde::{Deserialize, Serialize};
use std::fmt::Write as _;
use std::sync::Arc;

/// Coordinate chart of a sample point.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum Chart {
    #[default]
    Cartesian,
    Polar,
}

/// Per-point metadata: chart coordinates and chart tag.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PointLabel<T> {
    pub coords: [T; 2],
    pub chart: Chart,
}

impl<T: Scalar> PointLabel<T> {
    /// Cartesian position of the point.
    pub fn cartesian(&self) -> [T; 2] {
        match self.chart {
            Chart::Cartesian => self.coords,
            Chart::Polar => {
                let [r, th] = self.coords;
                [r * th.cos(), r * th.sin()]
            }
        }
    }

    pub fn euclidean_to(&self, other: &Self) -> T {
        let a = self.cartesian();
        let b = other.cartesian();
        (a[0] - b[0]).hypot(a[1] - b[1])
    }
}

/// A finite, possibly asymmetric, distance with values in `[0, ∞]`.
pub trait DistanceOracle<T: Scalar>: Sync {
    fn len(&self) -> usize;

    fn is_empty(&self) -> bool {
        self.len() == 0
    }

    fn distance(&self, from: usize, to: usize) -> Ext<T>;

    /// `d(from, ·)` for every point.
    fn row_from(&self, from: usize) -> Arc<[Ext<T>]> {
        (0..self.len()).map(|j| self.distance(from, j)).collect()
    }

    /// `d(·, to)` for every point.
    fn row_to(&self, to: usize) -> Arc<[Ext<T>]> {
        (0..self.len()).map(|i| self.distance(i, to)).collect()
    }

    fn label(&self, _id: usize) -> Option<PointLabel<T>> {
        None
    }

    /// Whether the point borders a missing part of the sampled domain.
    fn is_frontier(&self, _id: usize) -> bool {
        false
    }
}

impl<T: Scalar, O: DistanceOracle<T> + ?Sized> DistanceOracle<T> for &O {
    fn len(&self) -> usize {
        (**self).len()
    }
    fn distance(&self, from: usize, to: usize) -> Ext<T> {
        (**self).distance(from, to)
    }
    fn row_from(&self, from: usize) -> Arc<[Ext<T>]> {
        (**self).row_from(from)
    }
    fn row_to(&self, to: usize) -> Arc<[Ext<T>]> {
        (**self).row_to(to)
    }
    fn label(&self, id: usize) -> Option<PointLabel<T>> {
        (**self).label(id)
    }
    fn is_frontier(&self, id: usize) -> bool {
        (**self).is_frontier(id)
    }
}

/// Dense row-major distance matrix.
#[derive(Clone, Debug, PartialEq)]
pub struct DistanceMatrix<T> {
    n: usize,
    data: Vec<Ext<T>>,
    labels: Vec<Option<PointLabel<T>>>,
}

impl<T: Scalar> DistanceMatrix<T> {
    pub fn from_fn(n: usize, mut f: impl FnMut(usize, usize) -> Ext<T>) -> Self {
        let mut data = Vec::with_capacity(n * n);
        for i in 0..n {
            for j in 0..n {
                data.push(f(i, j));
            }
        }
        DistanceMatrix { n, data, labels: vec![None; n] }
    }

    /// Builds from real rows; `f64::INFINITY` becomes `∞`.
    pub fn from_rows(rows: &[Vec<f64>]) -> Self {
        let n = rows.len();
        Self::from_fn(n, |i, j| {
            assert_eq!(rows[i].len(), n, "square matrix expected");
            Ext::new(lit::<T>(rows[i][j])).expect("nonnegative entries")
        })
    }

    /// Materializes an oracle restricted to `ids` (matrix index k ↦ oracle id `ids[k]`).
    pub fn from_oracle(d: &dyn DistanceOracle<T>, ids: &[usize]) -> Self {
        let rows: Vec<_> = ids.iter().map(|&i| d.row_from(i)).collect();
        let mut m = Self::from_fn(ids.len(), |a, b| rows[a][ids[b]]);
        m.labels = ids.iter().map(|&i| d.label(i)).collect();
        m
    }

    pub fn with_labels(mut self, labels: Vec<PointLabel<T>>) -> Self {
        assert_eq!(labels.len(), self.n);
        self.labels = labels.into_iter().map(Some).collect();
        self
    }

    pub fn get(&self, i: usize, j: usize) -> Ext<T> {
        self.data[i * self.n + j]
    }

    /// CSV with row = source, column = target and `inf` for `∞`.
    pub fn to_csv(&self) -> String {
        let mut out = String::new();
        for i in 0..self.n {
            for j in 0..self.n {
                if j > 0 {
                    out.push(',');
                }
                let _ = write!(out, "{}", self.get(i, j));
            }
            out.push('\n');
        }
        out
    }

    pub fn from_csv(text: &str) -> Result<Self, String> {
        let rows: Vec<Vec<Ext<T>>> = text
            .lines()
            .filter(|l| !l.trim().is_empty())
            .map(|l| l.split(',').map(|c| c.parse::<Ext<T>>()).collect::<Result<Vec<_>, _>>())
            .collect::<Result<_, _>>()?;
        let n = rows.len();
        if rows.iter().any(|r| r.len() != n) {
            return Err("distance matrix must be square".into());
        }
        Ok(Self::from_fn(n, |i, j| rows[i][j]))
    }
}

impl<T: Scalar> DistanceOracle<T> for DistanceMatrix<T> {
    fn len(&self) -> usize {
        self.n
    }
    fn distance(&self, from: usize, to: usize) -> Ext<T> {
        self.get(from, to)
    }
    fn label(&self, id: usize) -> Option<PointLabel<T>> {
        self.labels[id]
    }
}

/// `d^rev(x, y) = d(y, x)` as a zero-copy view.
pub struct Reversed<O>(pub O);

impl<T: Scalar, O: DistanceOracle<T>> DistanceOracle<T> for Reversed<O> {
    fn len(&self) -> usize {
        self.0.len()
    }
    fn distance(&self, from: usize, to: usize) -> Ext<T> {
        self.0.distance(to, from)
    }
    fn row_from(&self, from: usize) -> Arc<[Ext<T>]> {
        self.0.row_to(from)
    }
    fn row_to(&self, to: usize) -> Arc<[Ext<T>]> {
        self.0.row_from(to)
    }
    fn label(&self, id: usize) -> Option<PointLabel<T>> {
        self.0.label(id)
    }
    fn is_frontier(&self, id: usize) -> bool {
        self.0.is_frontier(id)
    }
}

/// `dˢ(x, y) = ½(d(x, y) + d(y, x))` as a view.
pub struct Symmetrized<O>(pub O);

impl<T: Scalar, O: DistanceOracle<T>> DistanceOracle<T> for Symmetrized<O> {
    fn len(&self) -> usize {
        self.0.len()
    }
    fn distance(&self, from: usize, to: usize) -> Ext<T> {
        self.0.distance(from, to).mean(self.0.distance(to, from))
    }
    fn row_from(&self, from: usize) -> Arc<[Ext<T>]> {
        let a = self.0.row_from(from);
        let b = self.0.row_to(from);
        a.iter().zip(b.iter()).map(|(x, y)| x.mean(*y)).collect()
    }
    fn row_to(&self, to: usize) -> Arc<[Ext<T>]> {
        self.row_from(to)
    }
    fn label(&self, id: usize) -> Option<PointLabel<T>> {
        self.0.label(id)
    }
    fn is_frontier(&self, id: usize) -> bool {
        self.0.is_frontier(id)
    }
}

/// Transposed matrix.
pub fn reverse<T: Scalar>(d: &DistanceMatrix<T>) -> DistanceMatrix<T> {
    let mut m = DistanceMatrix::from_fn(d.n, |i, j| d.get(j, i));
    m.labels = d.labels.clone();
    m
}

/// Symmetrized matrix.
pub fn symmetrize<T: Scalar>(d: &DistanceMatrix<T>) -> DistanceMatrix<T> {
    let mut m = DistanceMatrix::from_fn(d.n, |i, j| d.get(i, j).mean(d.get(j, i)));
    m.labels = d.labels.clone();
    m
}

/// Outcome of [`check_generalized_axioms`].
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct AxiomReport {
    pub a1_ok: bool,
    pub a2_ok: bool,
    pub a3_ok: bool,
    /// Largest `d(i,k) − d(i,j) − d(j,k) − tol` over all triples.
    pub a3_worst_violation: f64,
    pub a3_worst_triple: Option<(usize, usize, usize)>,
    pub zero_symmetry_ok: bool,
}

impl AxiomReport {
    pub fn all_ok(&self) -> bool {
        self.a1_ok && self.a2_ok && self.a3_ok && self.zero_symmetry_ok
    }
}

/// Checks (a1)–(a3) and the zero-symmetry surrogate for (a4).
///
/// `tol` is the slack allowed in the triangle inequality and the threshold
/// below which a distance counts as zero for zero-symmetry.
pub fn check_generalized_axioms<T: Scalar>(d: &dyn DistanceOracle<T>, tol: T) -> AxiomReport {
    let ids: Vec<usize> = (0..d.len()).collect();
    check_generalized_axioms_on(d, &ids, tol)
}

/// As [`check_generalized_axioms`], restricted to the points `ids`.
pub fn check_generalized_axioms_on<T: Scalar>(
    d: &dyn DistanceOracle<T>,
    ids: &[usize],
    tol: T,
) -> AxiomReport {
    let rows: Vec<_> = ids.iter().map(|&i| d.row_from(i)).collect();
    let at = |a: usize, b: usize| rows[a][ids[b]];
    let n = ids.len();
    let zero = Ext::zero();
    let mut a1_ok = true;
    let mut a2_ok = true;
    let mut zero_symmetry_ok = true;
    for a in 0..n {
        for b in 0..n {
            let v = at(a, b);
            if let Some(x) = v.finite() {
                a1_ok &= x >= T::zero();
            }
            if a == b {
                a2_ok &= v == zero;
            } else {
                a2_ok &= !(v == zero && at(b, a) == zero) || ids[a] == ids[b];
                if v.lt_real(tol) || v == zero {
                    zero_symmetry_ok &= at(b, a).le_tol(&Ext::Finite(tol), T::zero());
                }
            }
        }
    }
    let mut worst = f64::NEG_INFINITY;
    let mut worst_triple = None;
    for a in 0..n {
        for b in 0..n {
            let ab = at(a, b);
            if ab.is_infinite() {
                continue;
            }
            for c in 0..n {
                let bc = at(b, c);
                let via = ab + bc;
                let direct = at(a, c);
                let excess = match (direct, via) {
                    (_, Ext::Infinite) => continue,
                    (Ext::Infinite, _) => f64::INFINITY,
                    (Ext::Finite(x), Ext::Finite(y)) => crate::scalar::to_f64(x - y - tol),
                };
                if excess > worst {
                    worst = excess;
                    worst_triple = Some((ids[a], ids[b], ids[c]));
                }
            }
        }
    }
    if n == 0 {
        worst = 0.0;
    }
    AxiomReport {
        a1_ok,
        a2_ok,
        a3_ok: worst <= 0.0,
        a3_worst_violation: worst,
        a3_worst_triple: worst_triple,
        zero_symmetry_ok,
    }
}

/// Ball direction.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum BallKind {
    Forward,
    Backward,
    Symmetric,
}

/// Strict membership of `probe` in the open ball of `radius` about `center`.
pub fn ball_membership<T: Scalar>(
    d: &dyn DistanceOracle<T>,
    center: usize,
    radius: T,
    kind: BallKind,
    probe: usize,
) -> bool {
    let v = match kind {
        BallKind::Forward => d.distance(center, probe),
        BallKind::Backward => d.distance(probe, center),
        BallKind::Symmetric => d.distance(center, probe).mean(d.distance(probe, center)),
    };
    v.lt_real(radius)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn euclid4() -> DistanceMatrix<f64> {
        let pts = [(0.0, 0.0), (1.0, 0.0), (0.0, 1.0), (1.0, 1.0)];
        DistanceMatrix::from_fn(4, |i, j| {
            let (a, b) = (pts[i], pts[j]);
            Ext::Finite(((a.0 - b.0) as f64).hypot(a.1 - b.1))
        })
    }

    #[test]
    fn euclidean_passes() {
        let r = check_generalized_axioms(&euclid4(), 1e-12);
        assert!(r.all_ok(), "{r:?}");
        assert!(r.a3_worst_violation <= 0.0);
    }

    #[test]
    fn zero_symmetry_failure() {
        let m = DistanceMatrix::<f64>::from_rows(&[vec![0.0, 0.0], vec![1.0, 0.0]]);
        let r = check_generalized_axioms(&m, 1e-9);
        assert!(!r.zero_symmetry_ok);
        assert!(r.a2_ok);
    }

    #[test]
    fn triangle_failure() {
        let m = DistanceMatrix::<f64>::from_rows(&[
            vec![0.0, 1.0, 5.0],
            vec![1.0, 0.0, 1.0],
            vec![5.0, 1.0, 0.0],
        ]);
        let r = check_generalized_axioms(&m, 0.0);
        assert!(!r.a3_ok);
        assert!((r.a3_worst_violation - 3.0).abs() < 1e-12);
        assert_eq!(r.a3_worst_triple, Some((0, 1, 2)));
    }

    #[test]
    fn reverse_and_symmetrize() {
        let m = DistanceMatrix::<f64>::from_rows(&[vec![0.0, 1.0], vec![3.0, 0.0]]);
        let s = symmetrize(&m);
        assert_eq!(s.get(0, 1), Ext::Finite(2.0));
        assert_eq!(s.get(1, 0), Ext::Finite(2.0));
        assert_eq!(reverse(&reverse(&m)), m);
        assert_eq!(symmetrize(&reverse(&m)), s);
        let e = euclid4();
        assert_eq!(reverse(&e), e);
        assert_eq!(symmetrize(&e), e);
        let view = Reversed(&m);
        assert_eq!(view.distance(0, 1), Ext::Finite(3.0));
        assert_eq!(Symmetrized(&m).distance(1, 0), Ext::Finite(2.0));
    }

    #[test]
    fn balls() {
        let m = DistanceMatrix::<f64>::from_rows(&[vec![0.0, 1.0], vec![3.0, 0.0]]);
        assert!(ball_membership(&m, 0, 0.5, BallKind::Forward, 0));
        assert!(!ball_membership(&m, 0, 0.0, BallKind::Forward, 0));
        assert!(ball_membership(&m, 0, 1.5, BallKind::Forward, 1));
        assert!(!ball_membership(&m, 0, 1.5, BallKind::Backward, 1));
        assert!(!ball_membership(&m, 0, 2.0, BallKind::Symmetric, 1));
        assert!(ball_membership(&m, 0, 2.5, BallKind::Symmetric, 1));
    }

    #[test]
    fn csv_roundtrip_with_infinity() {
        let m = DistanceMatrix::<f64>::from_fn(2, |i, j| if i == j { Ext::zero() } else if i == 0 { Ext::Infinite } else { Ext::Finite(0.25) });
        let text = m.to_csv();
        assert!(text.contains("inf"));
        assert_eq!(DistanceMatrix::<f64>::from_csv(&text).unwrap(), m);
    }
}
