//! Randers norms built from a Riemannian part `g0` and a one-form `ω`.

use crate::fieldexpr::{Coords, EvalError, FieldExpr, ParseError};
use crate::metric::Chart;
use crate::scalar::{lit, Scalar};
use serde::{Deserialize, Serialize};
use thiserror::Error;

/// How `g0` and `ω` combine into a norm.
///
/// * `Fermat`: `F(v) = sqrt(g0(v,v) + ω(v)²) + ω(v)`, positive whenever `g0` is.
/// * `Standard`: `F(v) = sqrt(g0(v,v)) + ω(v)`, positive iff `‖ω‖_{g0} < 1`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum MetricForm {
    #[default]
    Fermat,
    Standard,
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum RandersError {
    #[error("field `{field}`: {source}")]
    Parse { field: String, source: ParseError },
    #[error("field evaluation failed at {at:?}: {source}")]
    Eval { at: [f64; 2], source: EvalError },
    #[error("g0 is not positive definite at {at:?}")]
    NotPositiveDefinite { at: [f64; 2] },
    #[error("one-form norm {norm} >= 1 at {at:?}")]
    OneFormTooLarge { at: [f64; 2], norm: f64 },
    #[error("metric data needs {expected} components, got {got}")]
    Shape { expected: usize, got: usize },
}

/// Coefficient fields of a Randers metric in a chart.
#[derive(Clone, Debug, PartialEq)]
pub struct RandersData {
    pub dim: usize,
    pub chart: Chart,
    pub form: MetricForm,
    /// `[g11, g12, g22]`; only `g11` is used in dimension one.
    pub g0: [FieldExpr; 3],
    pub omega: [FieldExpr; 2],
}

/// Field values at one point.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct LocalMetric<T> {
    pub g: [T; 3],
    pub w: [T; 2],
    pub form: MetricForm,
}

impl<T: Scalar> LocalMetric<T> {
    pub fn g0_norm_sq(&self, v: [T; 2]) -> T {
        let [g11, g12, g22] = self.g;
        g11 * v[0] * v[0] + (g12 + g12) * v[0] * v[1] + g22 * v[1] * v[1]
    }

    pub fn omega(&self, v: [T; 2]) -> T {
        self.w[0] * v[0] + self.w[1] * v[1]
    }

    pub fn norm(&self, v: [T; 2]) -> T {
        let a = self.g0_norm_sq(v);
        let b = self.omega(v);
        match self.form {
            MetricForm::Standard => a.sqrt() + b,
            MetricForm::Fermat => {
                let root = (a + b * b).sqrt();
                if b >= T::zero() {
                    root + b
                } else if a == T::zero() {
                    T::zero()
                } else {
                    // root + b loses all digits when |b| dominates.
                    a / (root - b)
                }
            }
        }
    }

    fn positive_definite(&self, dim: usize) -> bool {
        let [g11, g12, g22] = self.g;
        if dim == 1 {
            g11 > T::zero()
        } else {
            g11 > T::zero() && g11 * g22 - g12 * g12 > T::zero()
        }
    }

    /// `‖ω‖` measured with `g0`.
    pub fn omega_norm(&self, dim: usize) -> T {
        let [g11, g12, g22] = self.g;
        let [w1, w2] = self.w;
        if dim == 1 {
            (w1 * w1 / g11).sqrt()
        } else {
            let det = g11 * g22 - g12 * g12;
            ((g22 * w1 * w1 - (g12 + g12) * w1 * w2 + g11 * w2 * w2) / det).sqrt()
        }
    }
}

impl RandersData {
    /// Parses `g0` entries (`[g11]`, or `[g11, g12, g22]`) and `ω` entries.
    pub fn parse(dim: usize, chart: Chart, form: MetricForm, g0: &[&str], omega: &[&str]) -> Result<Self, RandersError> {
        let p = |name: String, s: &str| FieldExpr::parse(s).map_err(|e| RandersError::Parse { field: name, source: e });
        let zero = FieldExpr::constant(0.0);
        let g = match (dim, g0.len()) {
            (1, 1) => [p("g0[0]".into(), g0[0])?, zero.clone(), FieldExpr::constant(1.0)],
            (2, 3) => [p("g0[0]".into(), g0[0])?, p("g0[1]".into(), g0[1])?, p("g0[2]".into(), g0[2])?],
            (_, got) => return Err(RandersError::Shape { expected: if dim == 1 { 1 } else { 3 }, got }),
        };
        let w = match (dim, omega.len()) {
            (1, 1) => [p("omega[0]".into(), omega[0])?, zero],
            (2, 2) => [p("omega[0]".into(), omega[0])?, p("omega[1]".into(), omega[1])?],
            (_, got) => return Err(RandersError::Shape { expected: dim, got }),
        };
        Ok(RandersData { dim, chart, form, g0: g, omega: w })
    }

    /// Flat Euclidean metric plus a constant one-form.
    pub fn flat(form: MetricForm, w: [f64; 2]) -> Self {
        RandersData {
            dim: 2,
            chart: Chart::Cartesian,
            form,
            g0: [FieldExpr::constant(1.0), FieldExpr::constant(0.0), FieldExpr::constant(1.0)],
            omega: [FieldExpr::constant(w[0]), FieldExpr::constant(w[1])],
        }
    }

    /// Same `g0`, one-form `−ω`: the reverse metric.
    pub fn negated(&self) -> Self {
        use crate::fieldexpr::Expr;
        let neg = |f: &FieldExpr| {
            let s = format!("-({f})");
            let parsed = FieldExpr::parse(&s).expect("negation of a valid field parses");
            debug_assert!(matches!(parsed.ast(), Expr::Neg(_)));
            parsed
        };
        RandersData { omega: [neg(&self.omega[0]), neg(&self.omega[1])], ..self.clone() }
    }

    /// True when every field is a constant.
    pub fn is_constant(&self) -> bool {
        self.g0.iter().chain(self.omega.iter()).all(FieldExpr::is_constant)
    }

    pub fn coords<T: Scalar>(&self, p: [T; 2]) -> Coords<T> {
        match self.chart {
            Chart::Cartesian => Coords::cartesian(p[0], p[1]),
            Chart::Polar => Coords::polar(p[0], p[1]),
        }
    }

    /// Field values at chart point `p`, without positivity checks.
    pub fn local<T: Scalar>(&self, p: [T; 2]) -> Result<LocalMetric<T>, RandersError> {
        let c = self.coords(p);
        let err = |e| RandersError::Eval { at: [crate::scalar::to_f64(p[0]), crate::scalar::to_f64(p[1])], source: e };
        let ev = |f: &FieldExpr| f.eval(&c).map_err(err);
        let g = [ev(&self.g0[0])?, ev(&self.g0[1])?, ev(&self.g0[2])?];
        let w = [ev(&self.omega[0])?, ev(&self.omega[1])?];
        Ok(LocalMetric { g, w, form: self.form })
    }

    /// Field values at `p` after checking positivity of the norm there.
    pub fn checked_local<T: Scalar>(&self, p: [T; 2]) -> Result<LocalMetric<T>, RandersError> {
        let m = self.local(p)?;
        let at = [crate::scalar::to_f64(p[0]), crate::scalar::to_f64(p[1])];
        if !m.positive_definite(self.dim) {
            return Err(RandersError::NotPositiveDefinite { at });
        }
        if self.form == MetricForm::Standard {
            let n = m.omega_norm(self.dim);
            if !(n < T::one()) {
                return Err(RandersError::OneFormTooLarge { at, norm: crate::scalar::to_f64(n) });
            }
        }
        Ok(m)
    }
}

/// `F(at, v)`.
pub fn randers_norm<T: Scalar>(r: &RandersData, at: [T; 2], v: [T; 2]) -> Result<T, RandersError> {
    Ok(r.checked_local(at)?.norm(v))
}

/// Composite-midpoint `F`-length of the straight chart segment `a → b`.
///
/// Midpoints are laid out from the lexicographically smaller endpoint, so the
/// segment `b → a` under `−ω` is evaluated on the same nodes in the same order.
/// `map` sends chart points to the representative used for field evaluation
/// (identity unless the chart is glued).
pub fn segment_length_mapped<T: Scalar>(
    r: &RandersData,
    a: [T; 2],
    b: [T; 2],
    steps: usize,
    map: &dyn Fn([T; 2]) -> [T; 2],
) -> Result<T, RandersError> {
    let steps = steps.max(1);
    let v = [b[0] - a[0], b[1] - a[1]];
    let (s, o) = if (a[0], a[1]) <= (b[0], b[1]) { (a, b) } else { (b, a) };
    let n: T = lit(steps as f64);
    if r.is_constant() {
        return r.checked_local(map(s)).map(|m| m.norm(v));
    }
    let mut total = T::zero();
    for k in 0..steps {
        let t = (lit::<T>(k as f64) + lit(0.5)) / n;
        let p = [s[0] + t * (o[0] - s[0]), s[1] + t * (o[1] - s[1])];
        total = total + r.checked_local(map(p))?.norm(v);
    }
    Ok(total / n)
}

/// [`segment_length_mapped`] without gluing.
pub fn segment_length<T: Scalar>(r: &RandersData, a: [T; 2], b: [T; 2], steps: usize) -> Result<T, RandersError> {
    segment_length_mapped(r, a, b, steps, &|p| p)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn norm_examples() {
        let e = RandersData::flat(MetricForm::Standard, [0.0, 0.0]);
        assert_eq!(randers_norm(&e, [0.0, 0.0], [3.0, 4.0]).unwrap(), 5.0);
        let r = RandersData::flat(MetricForm::Fermat, [0.5, 0.0]);
        let f = randers_norm(&r, [0.0, 0.0], [1.0f64, 0.0]).unwrap();
        assert!((f - (1.25f64.sqrt() + 0.5)).abs() < 1e-15);
        let b = randers_norm(&r, [0.0, 0.0], [-1.0f64, 0.0]).unwrap();
        assert!((b - (1.25f64.sqrt() - 0.5)).abs() < 1e-15);
        let rev = randers_norm(&r.negated(), [0.0, 0.0], [1.0f64, 0.0]).unwrap();
        assert_eq!(rev, b);
    }

    #[test]
    fn standard_form_requires_small_one_form() {
        let bad = RandersData::flat(MetricForm::Standard, [1.2, 0.0]);
        assert!(matches!(randers_norm(&bad, [0.0, 0.0], [1.0f64, 0.0]), Err(RandersError::OneFormTooLarge { .. })));
        let ok = RandersData::flat(MetricForm::Fermat, [1.2, 0.0]);
        assert!(randers_norm(&ok, [0.0, 0.0], [-1.0f64, 0.0]).unwrap() > 0.0);
    }

    #[test]
    fn segment_examples() {
        let e = RandersData::flat(MetricForm::Standard, [0.0, 0.0]);
        let l = segment_length(&e, [0.0, 0.0], [3.0f64, 4.0], 20).unwrap();
        assert!((l - 5.0).abs() < 1e-9);
        let w = RandersData::flat(MetricForm::Standard, [0.5, 0.0]);
        assert_eq!(segment_length(&w, [0.0, 0.0], [1.0f64, 0.0], 8).unwrap(), 1.5);
        assert_eq!(segment_length(&w, [1.0, 0.0], [0.0f64, 0.0], 8).unwrap(), 0.5);
    }

    #[test]
    fn reversal_is_bitwise() {
        let r = RandersData::parse(2, Chart::Cartesian, MetricForm::Fermat, &["1+x*x", "0.1*y", "2"], &["sin(x*y)", "-(x+y)"]).unwrap();
        let n = r.negated();
        let a = [0.3f64, -1.2];
        let b = [1.7f64, 0.4];
        assert_eq!(segment_length(&r, a, b, 13).unwrap(), segment_length(&n, b, a, 13).unwrap());
        assert_eq!(segment_length(&r, b, a, 13).unwrap(), segment_length(&n, a, b, 13).unwrap());
    }

    #[test]
    fn positive_homogeneity() {
        let r = RandersData::parse(2, Chart::Polar, MetricForm::Fermat, &["1", "0", "r^2+(1-r)^2"], &["0", "-(1-r)"]).unwrap();
        let p = [0.4f64, 1.0];
        let v = [0.3f64, -0.8];
        let f = randers_norm(&r, p, v).unwrap();
        for lam in [0.5, 2.0, 7.0] {
            let g = randers_norm(&r, p, [lam * v[0], lam * v[1]]).unwrap();
            assert!((g - lam * f).abs() <= 1e-14 * g.abs().max(1.0));
        }
    }

    #[test]
    fn one_dimensional_data() {
        let r = RandersData::parse(1, Chart::Cartesian, MetricForm::Fermat, &["1/(1+x^2)"], &["-1"]).unwrap();
        let fwd = segment_length(&r, [1.0f64, 0.0], [2.0, 0.0], 40).unwrap();
        let bwd = segment_length(&r, [2.0f64, 0.0], [1.0, 0.0], 40).unwrap();
        assert!(fwd < 0.2 && bwd > 2.0, "{fwd} {bwd}");
    }
}
