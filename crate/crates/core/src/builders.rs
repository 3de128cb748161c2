//! Named example spaces with their distinguished sequences and curves.
//!
//! Several examples are only described qualitatively; the concrete metric
//! data chosen for each one is documented on its builder function.

use crate::busemann::{BusemannError, Direction, SpeedBoundedCurve, STRICT_SPEED};
use crate::completion::{classify_boundary_point, CompletionCatalog, CompletionConfig, CompletionError, PointSequence};
use crate::function::Window;
use crate::graph::{build_graph, BuildError, Excision, FieldsSpec, GraphBuilder, Identification, Interval, SampledSpace, SpaceSpec};
use crate::metric::{Chart, DistanceOracle, Reversed};
use crate::randers::{MetricForm, RandersData};
use crate::scalar::{lit, to_f64, Scalar};
use serde::Serialize;
use std::collections::BTreeMap;
use std::f64::consts::PI;
use thiserror::Error;

pub const EXAMPLE_NAMES: &[&str] = &[
    "halfline_r2",
    "punctured_disk",
    "punctured_square",
    "staircase_fig1",
    "cylinder_fig2",
    "comb_basic",
    "comb_extended",
    "ladder_fig6",
    "chimney1",
    "chimney2",
    "double_fig2",
];

#[derive(Debug, Error)]
pub enum ExampleError {
    #[error("unknown example `{0}`")]
    Unknown(String),
    #[error("unknown variant `{variant}` for {name}")]
    Variant { name: String, variant: String },
    #[error("no annotation named `{0}`")]
    Missing(String),
    #[error(transparent)]
    Build(#[from] BuildError),
    #[error(transparent)]
    Curve(#[from] BusemannError),
    #[error(transparent)]
    Completion(#[from] CompletionError),
}

/// Overrides for a builder's defaults.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct ExampleParams {
    pub truncation: Option<f64>,
    pub resolution: Option<f64>,
    pub variant: Option<String>,
    /// Multiplies the one-form.
    pub omega_scale: Option<f64>,
    pub stencil_radius: Option<usize>,
    /// Number of sequence terms (teeth for the combs).
    pub terms: Option<usize>,
}

/// A path of sample ids to be parametrized as a speed-bounded curve.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CurveAnnotation {
    pub ids: Vec<usize>,
    pub direction: Direction,
    /// Declared `Ω = ∞`.
    pub infinite: bool,
    pub speed: f64,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize)]
pub struct Annotations {
    pub sequences: BTreeMap<String, Vec<usize>>,
    pub curves: BTreeMap<String, CurveAnnotation>,
    pub points: BTreeMap<String, usize>,
    /// Boundary class label → name of its representative sequence.
    pub classes: BTreeMap<String, String>,
    /// Samples on which functions are compared.
    pub window: Vec<usize>,
    pub base: usize,
    /// Interior samples added to catalogs.
    pub interior: Vec<usize>,
    pub truncation: f64,
    pub resolution: f64,
    /// Default comparison tolerance.
    pub tol: f64,
    /// Default ε-schedule.
    pub schedule: Vec<f64>,
    pub notes: Vec<String>,
}

/// A built example space.
#[derive(Clone, Debug)]
pub struct Example<T: Scalar> {
    pub name: String,
    pub space: SampledSpace<T>,
    pub annotations: Annotations,
}

impl<T: Scalar> Example<T> {
    pub fn sequence(&self, name: &str) -> Result<PointSequence, ExampleError> {
        let ids = self.annotations.sequences.get(name).ok_or_else(|| ExampleError::Missing(name.into()))?;
        Ok(PointSequence::new(ids.clone(), name))
    }

    pub fn curve(&self, name: &str) -> Result<SpeedBoundedCurve<T>, ExampleError> {
        let c = self.annotations.curves.get(name).ok_or_else(|| ExampleError::Missing(name.into()))?;
        Ok(SpeedBoundedCurve::from_path(&self.space, &c.ids, lit(c.speed), c.direction, c.infinite, name)?)
    }

    pub fn point(&self, name: &str) -> Result<usize, ExampleError> {
        self.annotations.points.get(name).copied().ok_or_else(|| ExampleError::Missing(name.into()))
    }

    pub fn window(&self) -> Window {
        self.annotations.window.clone().into()
    }

    pub fn base(&self) -> usize {
        self.annotations.base
    }

    pub fn tol(&self) -> T {
        lit(self.annotations.tol)
    }

    pub fn config(&self) -> CompletionConfig<T> {
        CompletionConfig::new(self.tol(), &self.annotations.schedule)
    }

    /// Classifies every annotated class sequence and builds the catalog.
    pub fn catalog(&self, cfg: &CompletionConfig<T>) -> Result<CompletionCatalog<T>, ExampleError> {
        let back = Reversed(&self.space);
        let mut classes = Vec::new();
        for (label, seq) in &self.annotations.classes {
            let mut c = classify_boundary_point(&self.sequence(seq)?, &self.space, &back, cfg)?;
            c.label = label.clone();
            classes.push(c);
        }
        Ok(CompletionCatalog::build(&self.space, classes, self.annotations.interior.clone(), cfg.tol))
    }

    /// Sample nearest to chart coordinates `p`.
    pub fn at(&self, p: [f64; 2]) -> usize {
        at(&self.space, p)
    }
}

fn at<T: Scalar>(space: &SampledSpace<T>, p: [f64; 2]) -> usize {
    space.nearest([lit(p[0]), lit(p[1])])
}

/// Samples along the chart segment `p → q` every `h`, without repeats.
fn trace<T: Scalar>(space: &SampledSpace<T>, p: [f64; 2], q: [f64; 2], h: f64) -> Vec<usize> {
    let n = (((q[0] - p[0]).hypot(q[1] - p[1]) / h).round() as usize).max(1);
    let mut out: Vec<usize> = Vec::with_capacity(n + 1);
    for k in 0..=n {
        let t = k as f64 / n as f64;
        let id = at(space, [p[0] + t * (q[0] - p[0]), p[1] + t * (q[1] - p[1])]);
        if out.last() != Some(&id) {
            out.push(id);
        }
    }
    out
}

fn curve(ids: Vec<usize>, direction: Direction, infinite: bool) -> CurveAnnotation {
    CurveAnnotation { ids, direction, infinite, speed: STRICT_SPEED }
}

fn window_where<T: Scalar>(space: &SampledSpace<T>, keep: impl Fn([f64; 2]) -> bool) -> Vec<usize> {
    (0..space.len()).filter(|&i| keep(space.coords(i).map(to_f64))).collect()
}

fn num(v: f64) -> String {
    format!("{v:?}")
}

fn grid_spec(kind: &str, dim: usize, chart: Chart, domain: Vec<Interval>, resolution: Vec<f64>, form: MetricForm, g0: Vec<String>, omega: Vec<String>) -> SpaceSpec {
    let mut s = SpaceSpec::grid(dim, chart, domain, resolution, FieldsSpec { form, g0, omega });
    s.kind = kind.to_string();
    s
}

fn build<T: Scalar>(spec: SpaceSpec, params: &ExampleParams) -> Result<SampledSpace<T>, ExampleError> {
    let mut spec = spec;
    if let Some(r) = params.stencil_radius {
        spec.stencil_radius = r;
    }
    let metric = spec.metric()?;
    Ok(build_graph(&spec, &metric)?)
}

fn check_variant(name: &str, params: &ExampleParams, allowed: &[&str]) -> Result<String, ExampleError> {
    let v = params.variant.clone().unwrap_or_else(|| "default".into());
    if v == "default" || allowed.contains(&v.as_str()) {
        Ok(v)
    } else {
        Err(ExampleError::Variant { name: name.into(), variant: v })
    }
}

/// Builds a named example.
pub fn build_example<T: Scalar>(name: &str, params: &ExampleParams) -> Result<Example<T>, ExampleError> {
    let (space, annotations) = match name {
        "halfline_r2" => halfline_r2(params)?,
        "punctured_disk" => punctured_disk(params)?,
        "punctured_square" => punctured_square(params)?,
        "staircase_fig1" => staircase_fig1(params)?,
        "cylinder_fig2" => cylinder_fig2(params)?,
        "comb_basic" => comb(params, false)?,
        "comb_extended" => comb(params, true)?,
        "ladder_fig6" => ladder_fig6(params)?,
        "chimney1" => chimneys(params, &[0.0])?,
        "chimney2" => chimneys(params, &[-3.0, 3.0])?,
        "double_fig2" => double_fig2(params)?,
        other => return Err(ExampleError::Unknown(other.into())),
    };
    Ok(Example { name: name.to_string(), space, annotations })
}

/// Half line `(0, T]` with `g₀ = dx²/(1+x²)` and `ω = −dx` in Fermat form.
/// Moving right costs about `1/(2(1+x²))` per unit, moving left about 2.
/// Sequence `x`: `n + (−1)^{n+1}` for `n = 1..N`; class `z_inf` from the
/// integer sequence `ray`.
fn halfline_r2<T: Scalar>(p: &ExampleParams) -> Result<(SampledSpace<T>, Annotations), ExampleError> {
    check_variant("halfline_r2", p, &[])?;
    let t = p.truncation.unwrap_or(200.0);
    let h = p.resolution.unwrap_or(0.05);
    let w = p.omega_scale.unwrap_or(1.0);
    let n = p.terms.unwrap_or(80);
    let spec = grid_spec(
        "halfline_r2",
        1,
        Chart::Cartesian,
        vec![Interval::left_open(0.0, t)],
        vec![h],
        MetricForm::Fermat,
        vec!["1/(1+x^2)".into()],
        vec![num(-w)],
    );
    let space: SampledSpace<T> = build(spec, p)?;
    let mut a = Annotations { truncation: t, resolution: h, tol: 0.05, schedule: vec![1.0, 0.3, 0.1, 0.03], ..Default::default() };
    let alt: Vec<usize> = (1..=n).map(|k| at(&space, [k as f64 + if k % 2 == 1 { 1.0 } else { -1.0 }, 0.0])).collect();
    let ray: Vec<usize> = (1..=n).map(|k| at(&space, [k as f64, 0.0])).collect();
    a.sequences.insert("x".into(), alt);
    a.sequences.insert("ray".into(), ray);
    a.classes.insert("z_inf".into(), "ray".into());
    a.curves.insert("c".into(), curve(trace(&space, [1.0, 0.0], [t, 0.0], h), Direction::Forward, false));
    a.window = window_where(&space, |q| q[0] <= t / 2.0);
    a.base = at(&space, [1.0, 0.0]);
    a.points.insert("x".into(), a.base);
    a.interior = vec![at(&space, [5.0, 0.0]), at(&space, [20.0, 0.0])];
    Ok((space, a))
}

/// Punctured unit disk in polar coordinates, `r ∈ (0, 1)`, `θ ∈ (−π, π)`
/// (the slit `θ = ±π` is not glued), with
/// `F = √(dr² + r²dθ² + (1−r)²dθ²) − (1−r)dθ`.
/// Sequences `x = (1/n, 0)` and `xp = (1/n, π/2)` for `n = 2..N+1`.
fn punctured_disk<T: Scalar>(p: &ExampleParams) -> Result<(SampledSpace<T>, Annotations), ExampleError> {
    check_variant("punctured_disk", p, &[])?;
    let hr = p.resolution.unwrap_or(0.01);
    let ht = hr * PI / 2.0;
    let w = p.omega_scale.unwrap_or(1.0);
    let n = p.terms.unwrap_or(40);
    let spec = grid_spec(
        "punctured_disk",
        2,
        Chart::Polar,
        vec![Interval::open(0.0, 1.0), Interval::open(-PI, PI)],
        vec![hr, ht],
        MetricForm::Fermat,
        vec!["1".into(), "0".into(), "r^2".into()],
        vec!["0".into(), format!("-({})*(1-r)", num(w))],
    );
    let space: SampledSpace<T> = build(spec, p)?;
    let mut a = Annotations { truncation: 1.0, resolution: hr, tol: 0.05, schedule: vec![0.3, 0.1], ..Default::default() };
    let seq = |theta: f64| -> Vec<usize> { (2..n + 2).map(|k| at(&space, [1.0 / k as f64, theta])).collect() };
    a.sequences.insert("x".into(), seq(0.0));
    a.sequences.insert("xp".into(), seq(PI / 2.0));
    a.classes.insert("z".into(), "x".into());
    a.classes.insert("zp".into(), "xp".into());
    a.curves.insert("c".into(), curve(trace(&space, [0.5, 0.0], [hr, 0.0], hr), Direction::Forward, false));
    a.window = window_where(&space, |q| q[0] >= 0.1);
    a.base = at(&space, [0.5, 0.0]);
    a.interior = vec![at(&space, [0.5, PI / 2.0]), at(&space, [0.3, -PI / 2.0])];
    Ok((space, a))
}

/// Flat square `[−1, 1]²` with the origin removed and `ω = 0`. Sequence
/// `z0 = (1/(n+1), 0)` snapped to the grid, ending at the sample next to
/// the puncture; curves approach the puncture along the positive x-axis.
fn punctured_square<T: Scalar>(p: &ExampleParams) -> Result<(SampledSpace<T>, Annotations), ExampleError> {
    check_variant("punctured_square", p, &[])?;
    let h = p.resolution.unwrap_or(0.05);
    let w = p.omega_scale.unwrap_or(0.0);
    let n = p.terms.unwrap_or(16);
    let mut spec = grid_spec(
        "punctured_square",
        2,
        Chart::Cartesian,
        vec![Interval::closed(-1.0, 1.0), Interval::closed(-1.0, 1.0)],
        vec![h],
        MetricForm::Fermat,
        vec!["1".into(), "0".into(), "1".into()],
        vec![num(w), "0".into()],
    );
    spec.excisions = vec![Excision::Disk { center: [0.0, 0.0], radius: h / 2.0 }];
    let space: SampledSpace<T> = build(spec, p)?;
    let mut a = Annotations { truncation: 1.0, resolution: h, tol: 3.0 * h, schedule: vec![1.0, 0.3, 0.1], ..Default::default() };
    a.sequences.insert("z0".into(), (1..=n).map(|k| at(&space, [1.0 / (k + 1) as f64, 0.0])).collect());
    a.classes.insert("z0".into(), "z0".into());
    let path = trace(&space, [0.9, 0.0], [h, 0.0], h);
    a.curves.insert("c_in".into(), curve(path.clone(), Direction::Forward, false));
    a.curves.insert("c_out".into(), curve(path, Direction::Backward, false));
    a.window = (0..space.len()).collect();
    a.base = at(&space, [0.5, 0.5]);
    a.interior = vec![at(&space, [-0.5, 0.0]), at(&space, [0.0, 0.5])];
    Ok((space, a))
}

/// First quadrant `[0, T]²` minus the unit disk, Fermat form with
/// `ω = −r((x−y)dx + (x+y)dy)`, i.e. `−r²dr − r³dθ`. Outward radial motion
/// costs about `1/(2r²)` per unit, counterclockwise motion is cheap and
/// clockwise motion costs about `2r³` per radian. The rays `c1` (x-axis)
/// and `c2` (y-axis) define the classes `z1` and `z2`.
fn staircase_fig1<T: Scalar>(p: &ExampleParams) -> Result<(SampledSpace<T>, Annotations), ExampleError> {
    check_variant("staircase_fig1", p, &[])?;
    let t = p.truncation.unwrap_or(20.0);
    let h = p.resolution.unwrap_or(0.5);
    let w = p.omega_scale.unwrap_or(1.0);
    let n = p.terms.unwrap_or(16);
    let r = "sqrt(x^2+y^2)";
    let mut spec = grid_spec(
        "staircase_fig1",
        2,
        Chart::Cartesian,
        vec![Interval::closed(0.0, t), Interval::closed(0.0, t)],
        vec![h],
        MetricForm::Fermat,
        vec!["1".into(), "0".into(), "1".into()],
        vec![format!("-({})*{r}*(x-y)", num(w)), format!("-({})*{r}*(x+y)", num(w))],
    );
    spec.excisions = vec![Excision::Disk { center: [0.0, 0.0], radius: 1.0 - 1e-9 }];
    let space: SampledSpace<T> = build(spec, p)?;
    let mut a = Annotations { truncation: t, resolution: h, tol: 0.05, schedule: vec![1.0, 0.3, 0.1], ..Default::default() };
    let radii: Vec<f64> = (1..=n).map(|k| 1.0 + (t - 1.0) * k as f64 / n as f64).collect();
    a.sequences.insert("c1".into(), radii.iter().map(|&s| at(&space, [s, 0.0])).collect());
    a.sequences.insert("c2".into(), radii.iter().map(|&s| at(&space, [0.0, s])).collect());
    a.classes.insert("z1".into(), "c1".into());
    a.classes.insert("z2".into(), "c2".into());
    a.curves.insert("c1".into(), curve(trace(&space, [1.0, 0.0], [t, 0.0], h), Direction::Forward, false));
    a.curves.insert("c2".into(), curve(trace(&space, [0.0, 1.0], [0.0, t], h), Direction::Forward, false));
    a.window = window_where(&space, |q| q[0].hypot(q[1]) <= t / 2.0);
    a.base = at(&space, [2.0, 2.0]);
    a.interior = vec![at(&space, [t / 4.0, t / 4.0])];
    Ok((space, a))
}

/// `max(0, min(1, (1 − |x − c|)/0.75))`: 1 on the strip core `|x − c| ≤ 1/4`,
/// 0 outside `|x − c| < 1`.
fn strip(c: f64) -> String {
    format!("max(0, min(1, (1-abs(x-({})))/0.75))", num(c))
}

/// Rate `1 − 1/(2+y)²` along the strips; the complementary cost
/// `1/(2+y)²` is integrable on `(−1, ∞)`.
const STRIP_RATE: &str = "(1-1/(2+y)^2)";

fn vertical_sequence<T: Scalar>(space: &SampledSpace<T>, x: f64, t: f64, n: usize) -> Vec<usize> {
    (1..=n).map(|k| at(space, [x, t * k as f64 / n as f64])).collect()
}

/// Half cylinder `[−6, 6) × (−1, T]`, glued along `x`, standard form with
/// `g₀` Euclidean and `ω = (−φ(x+3) + φ(x−3))·(1 − 1/(2+y)²) dy`, `φ` a strip
/// bump. Upward motion on `x = −3` and downward motion on `x = 3` are cheap.
/// Variant `one_region` keeps only the strip at `x = −3`.
fn cylinder_fig2<T: Scalar>(p: &ExampleParams) -> Result<(SampledSpace<T>, Annotations), ExampleError> {
    let variant = check_variant("cylinder_fig2", p, &["one_region"])?;
    let t = p.truncation.unwrap_or(20.0);
    let h = p.resolution.unwrap_or(0.25);
    let w = p.omega_scale.unwrap_or(1.0);
    let n = p.terms.unwrap_or(16);
    let two = variant != "one_region";
    let bump = if two { format!("(-{}+{})", strip(-3.0), strip(3.0)) } else { format!("(-{})", strip(-3.0)) };
    let mut spec = grid_spec(
        "cylinder_fig2",
        2,
        Chart::Cartesian,
        vec![Interval::closed(-6.0, 6.0), Interval::left_open(-1.0, t)],
        vec![h],
        MetricForm::Standard,
        vec!["1".into(), "0".into(), "1".into()],
        vec!["0".into(), format!("({})*{bump}*{STRIP_RATE}", num(w))],
    );
    spec.identifications = vec![Identification { axis: 0 }];
    spec.params.insert("variant".into(), variant.clone().into());
    let space: SampledSpace<T> = build(spec, p)?;
    let mut a = Annotations { truncation: t, resolution: h, tol: 0.1, schedule: vec![1.0, 0.3, 0.1], ..Default::default() };
    a.sequences.insert("c1".into(), vertical_sequence(&space, -3.0, t, n));
    a.sequences.insert("c2".into(), vertical_sequence(&space, 3.0, t, n));
    a.classes.insert("z+".into(), "c1".into());
    a.curves.insert("c1".into(), curve(trace(&space, [-3.0, 0.0], [-3.0, t], h), Direction::Forward, false));
    if two {
        a.classes.insert("z-".into(), "c2".into());
        a.curves.insert("c2".into(), curve(trace(&space, [3.0, 0.0], [3.0, t], h), Direction::Backward, false));
    }
    a.curves.insert("c0".into(), curve(trace(&space, [0.0, 0.0], [0.0, t], h), Direction::Forward, true));
    a.window = window_where(&space, |q| q[1] <= t / 2.0);
    a.base = at(&space, [0.0, 0.0]);
    a.points.insert("x".into(), a.base);
    a.interior = vec![a.base];
    Ok((space, a))
}

/// Comb made of teeth `{1/n} × [0, 1)` for `n = 1..K` on the spine
/// `(0, 1] × {0}`; the extended comb closes the teeth and adds the spine
/// `(0, 1] × {1}`. Samples with `x < 2/K` stand next to the missing line
/// `x = 0` and are marked as frontier, as are open tooth ends.
fn comb<T: Scalar>(p: &ExampleParams, extended: bool) -> Result<(SampledSpace<T>, Annotations), ExampleError> {
    let name = if extended { "comb_extended" } else { "comb_basic" };
    check_variant(name, p, &[])?;
    let k = p.terms.unwrap_or(40);
    // Snapped so that y = 1/2 is sampled on every tooth.
    let h = 0.5 / (0.5 / p.resolution.unwrap_or(0.02)).round().max(1.0);
    let mut b: GraphBuilder<T> = GraphBuilder::new(RandersData::flat(MetricForm::Standard, [0.0, 0.0]), 1e-7);
    let top = if extended { 1.0 } else { 1.0 - h };
    let xs: Vec<f64> = (1..=k).map(|n| 1.0 / n as f64).collect();
    for &x in &xs {
        let tooth = b.polyline([x, 0.0], [x, top], h)?;
        if !extended {
            b.mark_frontier(*tooth.last().expect("tooth has samples"));
        }
    }
    let spines: &[f64] = if extended { &[0.0, 1.0] } else { &[0.0] };
    for &y in spines {
        for w in xs.windows(2) {
            b.polyline([w[1], y], [w[0], y], h)?;
        }
    }
    let edge = 2.0 / k as f64;
    for id in 0..b.len() {
        if to_f64(b.coords(id)[0]) < edge {
            b.mark_frontier(id);
        }
    }
    let mut spec = SpaceSpec {
        kind: name.into(),
        dim: 2,
        chart: Chart::Cartesian,
        domain: vec![],
        resolution: vec![h],
        stencil_radius: 1,
        fields: None,
        identifications: vec![],
        excisions: vec![],
        params: Default::default(),
    };
    spec.params.insert("teeth".into(), k.into());
    let mut a = Annotations { truncation: 1.0 / k as f64, resolution: h, tol: 3.0 * h, schedule: vec![1.0, 0.3, 0.1], ..Default::default() };
    let ids_at = |b: &GraphBuilder<T>, y: f64| -> Vec<usize> { xs.iter().map(|&x| b.find([x, y]).expect("comb sample")).collect() };
    a.sequences.insert("x".into(), ids_at(&b, 0.5));
    a.sequences.insert("z00".into(), ids_at(&b, 0.0));
    if extended {
        a.sequences.insert("z01".into(), ids_at(&b, 1.0));
    }
    let base = b.find([1.0, 0.0]).expect("spine end");
    let mid = b.find([1.0, 0.5]).expect("first tooth");
    let second = b.find([0.5, 0.5]).expect("second tooth");
    let down: Vec<usize> = (0..=(0.5 / h).round() as usize).map(|j| b.find([1.0, 0.5 - j as f64 * h]).expect("first tooth")).collect();
    let space = b.finish(spec, h);
    a.classes.insert("z00".into(), "z00".into());
    if extended {
        a.classes.insert("z01".into(), "z01".into());
    }
    a.window = window_where(&space, |q| q[0] >= edge);
    a.base = base;
    a.interior = vec![mid, second];
    a.points.insert("p".into(), mid);
    a.curves.insert("down".into(), curve(down, Direction::Forward, false));
    Ok((space, a))
}

/// Ladder: rails `y = 0` and `y = 1` over `[0, L]` joined by unit rungs at
/// integer `x`. Sequence `x = (n, 1/2)`; the rails are the rays `c1`, `c2`.
fn ladder_fig6<T: Scalar>(p: &ExampleParams) -> Result<(SampledSpace<T>, Annotations), ExampleError> {
    check_variant("ladder_fig6", p, &[])?;
    let l = p.truncation.unwrap_or(40.0).round().max(8.0) as usize;
    let h = p.resolution.unwrap_or(0.1);
    let mut b: GraphBuilder<T> = GraphBuilder::new(RandersData::flat(MetricForm::Standard, [0.0, 0.0]), 1e-7);
    let mut rails = [Vec::new(), Vec::new()];
    for x in 0..l {
        for (r, y) in [0.0, 1.0].into_iter().enumerate() {
            let seg = b.polyline([x as f64, y], [(x + 1) as f64, y], h)?;
            if rails[r].is_empty() {
                rails[r].extend(seg);
            } else {
                rails[r].extend(seg.into_iter().skip(1));
            }
        }
    }
    for x in 0..=l {
        b.polyline([x as f64, 0.0], [x as f64, 1.0], h)?;
    }
    let xs: Vec<usize> = (1..=l).map(|n| b.find([n as f64, 0.5]).expect("rung midpoint")).collect();
    let base = b.find([0.0, 0.0]).expect("origin");
    let interior = vec![
        b.find([(l / 8) as f64, 0.0]).expect("rail"),
        b.find([(l / 8) as f64, 0.5]).expect("rung"),
        b.find([(l / 4) as f64, 1.0]).expect("rail"),
    ];
    let spec = SpaceSpec {
        kind: "ladder_fig6".into(),
        dim: 2,
        chart: Chart::Cartesian,
        domain: vec![],
        resolution: vec![h],
        stencil_radius: 1,
        fields: None,
        identifications: vec![],
        excisions: vec![],
        params: Default::default(),
    };
    for id in 0..b.len() {
        if to_f64(b.coords(id)[0]) >= l as f64 {
            b.mark_frontier(id);
        }
    }
    let space = b.finish(spec, h);
    let lf = l as f64;
    let mut a = Annotations { truncation: lf, resolution: h, tol: 5.0 * h, schedule: vec![1.0, 0.3, 0.1], ..Default::default() };
    a.sequences.insert("x".into(), xs);
    let [r0, r1] = rails;
    a.curves.insert("c1".into(), curve(r0, Direction::Forward, true));
    a.curves.insert("c2".into(), curve(r1, Direction::Forward, true));
    a.window = window_where(&space, |q| q[0] <= lf / 2.0);
    a.base = base;
    a.interior = interior;
    a.notes.push("interior catalog entries sit at x ≤ L/4".into());
    Ok((space, a))
}

fn chimney_factor(centers: &[f64], decay: &str) -> String {
    let bumps: Vec<String> = centers.iter().map(|&c| format!("max(0, 1-abs(x-({})))", num(c))).collect();
    format!("(1-({})*(1-{decay}))", bumps.join("+"))
}

/// Half cylinder `[−6, 6) × [0, T]` glued along `x`, `ω = 0`, conformal
/// factor `λ = 1 − β(x)(1 − e^{−y})` with tent bumps `β` of half-width 1 at
/// the chimney centers. Central chimney curves have finite length; the
/// other vertical curves `c_a` escape to infinity.
fn chimneys<T: Scalar>(p: &ExampleParams, centers: &[f64]) -> Result<(SampledSpace<T>, Annotations), ExampleError> {
    let name = if centers.len() == 1 { "chimney1" } else { "chimney2" };
    check_variant(name, p, &[])?;
    let t = p.truncation.unwrap_or(20.0);
    let h = p.resolution.unwrap_or(0.1);
    let n = p.terms.unwrap_or(16);
    let lam = chimney_factor(centers, "exp(-y)");
    let g = format!("{lam}^2");
    let mut spec = grid_spec(
        name,
        2,
        Chart::Cartesian,
        vec![Interval::closed(-6.0, 6.0), Interval::closed(0.0, t)],
        vec![h],
        MetricForm::Standard,
        vec![g.clone(), "0".into(), g],
        vec!["0".into(), "0".into()],
    );
    spec.identifications = vec![Identification { axis: 0 }];
    let space: SampledSpace<T> = build(spec, p)?;
    let mut a = Annotations { truncation: t, resolution: h, tol: 0.3, schedule: vec![1.0, 0.3, 0.1], ..Default::default() };
    for x in [-3.0, -1.0, 0.0, 1.0, 3.0] {
        let label = format!("c{x}");
        a.sequences.insert(label.clone(), vertical_sequence(&space, x, t, n));
        let chimney = centers.contains(&x);
        a.curves.insert(label.clone(), curve(trace(&space, [x, 0.0], [x, t], h), Direction::Forward, !chimney));
        if chimney {
            a.classes.insert(format!("z{x}"), label);
        }
    }
    // Vertical detours from high window points must cost more than the
    // chimney route for the tail terms, hence the low window.
    a.window = window_where(&space, |q| q[1] <= t / 4.0);
    a.base = at(&space, [-3.0, 0.0]);
    a.interior = vec![at(&space, [-4.5, 1.0]), at(&space, [4.5, 2.0]), at(&space, [1.5, 0.5])];
    Ok((space, a))
}

/// Two copies of the cylinder glued side by side: `[−12, 12) × (−1, T]`
/// with forward strips at `x = −9, 3` and backward strips at `x = −3, 9`.
/// Variant `static` sets `ω = 0` and places conformal chimneys
/// `λ = 1 − β(1 − 1/(2+y)²)` at the four strip positions instead.
fn double_fig2<T: Scalar>(p: &ExampleParams) -> Result<(SampledSpace<T>, Annotations), ExampleError> {
    let variant = check_variant("double_fig2", p, &["static"])?;
    let t = p.truncation.unwrap_or(20.0);
    let h = p.resolution.unwrap_or(0.25);
    let w = p.omega_scale.unwrap_or(1.0);
    let n = p.terms.unwrap_or(16);
    let is_static = variant == "static";
    let (g0, omega) = if is_static {
        let lam = chimney_factor(&[-9.0, -3.0, 3.0, 9.0], "1/(2+y)^2");
        let g = format!("{lam}^2");
        (vec![g.clone(), "0".into(), g], vec!["0".into(), "0".into()])
    } else {
        let bump = format!("(-{}-{}+{}+{})", strip(-9.0), strip(3.0), strip(-3.0), strip(9.0));
        (vec!["1".into(), "0".into(), "1".into()], vec!["0".into(), format!("({})*{bump}*{STRIP_RATE}", num(w))])
    };
    let mut spec = grid_spec(
        "double_fig2",
        2,
        Chart::Cartesian,
        vec![Interval::closed(-12.0, 12.0), Interval::left_open(-1.0, t)],
        vec![h],
        MetricForm::Standard,
        g0,
        omega,
    );
    spec.identifications = vec![Identification { axis: 0 }];
    spec.params.insert("variant".into(), variant.clone().into());
    let space: SampledSpace<T> = build(spec, p)?;
    let mut a = Annotations { truncation: t, resolution: h, tol: 0.1, schedule: vec![1.0, 0.3, 0.1], ..Default::default() };
    let strips: [(&str, f64, Direction); 4] = if is_static {
        [("s-9", -9.0, Direction::Forward), ("s-3", -3.0, Direction::Forward), ("s3", 3.0, Direction::Forward), ("s9", 9.0, Direction::Forward)]
    } else {
        [("z1+", -9.0, Direction::Forward), ("z2+", 3.0, Direction::Forward), ("z1-", -3.0, Direction::Backward), ("z2-", 9.0, Direction::Backward)]
    };
    for (label, x, dir) in strips {
        a.sequences.insert(label.into(), vertical_sequence(&space, x, t, n));
        a.classes.insert(label.into(), label.into());
        let path = trace(&space, [x, 0.0], [x, t], h);
        if is_static {
            a.curves.insert(format!("{label}_up"), curve(path.clone(), Direction::Forward, false));
            a.curves.insert(format!("{label}_down"), curve(path, Direction::Backward, false));
        } else {
            a.curves.insert(label.into(), curve(path, dir, false));
        }
    }
    a.curves.insert("c0".into(), curve(trace(&space, [0.0, 0.0], [0.0, t], h), Direction::Forward, true));
    a.window = window_where(&space, |q| q[1] <= t / 2.0);
    a.base = at(&space, [0.0, 0.0]);
    a.interior = vec![a.base];
    Ok((space, a))
}
