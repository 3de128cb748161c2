//! Sampled spaces: grid or complex samples joined by directed edges whose
//! weights are Randers lengths of straight chart segments.

use crate::extended::Ext;
use crate::metric::{Chart, DistanceOracle, PointLabel};
use crate::randers::{segment_length_mapped, MetricForm, RandersData, RandersError};
use crate::scalar::{lit, to_f64, Scalar};
use serde::{Deserialize, Serialize};
use std::cmp::Ordering;
use std::collections::{BinaryHeap, HashMap, VecDeque};
use std::sync::{Arc, Mutex};
use thiserror::Error;

/// Closed or half-open coordinate range.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Interval {
    pub min: f64,
    pub max: f64,
    #[serde(default)]
    pub open_min: bool,
    #[serde(default)]
    pub open_max: bool,
}

impl Interval {
    pub fn closed(min: f64, max: f64) -> Self {
        Interval { min, max, open_min: false, open_max: false }
    }
    pub fn open(min: f64, max: f64) -> Self {
        Interval { min, max, open_min: true, open_max: true }
    }
    pub fn left_open(min: f64, max: f64) -> Self {
        Interval { min, max, open_min: true, open_max: false }
    }
}

/// Metric fields as written in a spec file.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FieldsSpec {
    #[serde(default)]
    pub form: MetricForm,
    /// `[g11]` in dimension one, `[g11, g12, g22]` in dimension two.
    pub g0: Vec<String>,
    pub omega: Vec<String>,
}

/// Periodic gluing of the two ends of one coordinate axis.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Identification {
    pub axis: usize,
}

/// Region removed from the domain, in chart coordinates.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "lowercase")]
pub enum Excision {
    Disk { center: [f64; 2], radius: f64 },
    Rect { min: [f64; 2], max: [f64; 2] },
    Segment { a: [f64; 2], b: [f64; 2] },
}

/// Declarative description of a sampled space.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SpaceSpec {
    /// `"grid"` for a spec-driven grid, otherwise a builder name.
    pub kind: String,
    #[serde(default = "default_dim")]
    pub dim: usize,
    #[serde(default)]
    pub chart: Chart,
    #[serde(default)]
    pub domain: Vec<Interval>,
    /// Grid step; a second entry sets the step of the second axis.
    #[serde(default)]
    pub resolution: Vec<f64>,
    #[serde(default = "default_radius")]
    pub stencil_radius: usize,
    #[serde(default)]
    pub fields: Option<FieldsSpec>,
    #[serde(default)]
    pub identifications: Vec<Identification>,
    #[serde(default)]
    pub excisions: Vec<Excision>,
    #[serde(default)]
    pub params: serde_json::Map<String, serde_json::Value>,
}

fn default_dim() -> usize {
    2
}
fn default_radius() -> usize {
    1
}

impl SpaceSpec {
    pub fn grid(dim: usize, chart: Chart, domain: Vec<Interval>, resolution: Vec<f64>, fields: FieldsSpec) -> Self {
        SpaceSpec {
            kind: "grid".into(),
            dim,
            chart,
            domain,
            resolution,
            stencil_radius: 1,
            fields: Some(fields),
            identifications: vec![],
            excisions: vec![],
            params: Default::default(),
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("spec serializes")
    }

    pub fn from_json(text: &str) -> Result<Self, BuildError> {
        serde_json::from_str(text).map_err(|e| BuildError::Spec(e.to_string()))
    }

    pub fn metric(&self) -> Result<RandersData, BuildError> {
        let f = self.fields.as_ref().ok_or_else(|| BuildError::Spec("missing `fields`".into()))?;
        let g: Vec<&str> = f.g0.iter().map(String::as_str).collect();
        let w: Vec<&str> = f.omega.iter().map(String::as_str).collect();
        Ok(RandersData::parse(self.dim, self.chart, f.form, &g, &w)?)
    }
}

#[derive(Debug, Error)]
pub enum BuildError {
    #[error("invalid space spec: {0}")]
    Spec(String),
    #[error(transparent)]
    Metric(#[from] RandersError),
    #[error("unknown builder `{0}`")]
    UnknownBuilder(String),
}

/// Compressed adjacency with neighbor lists sorted by id.
#[derive(Clone, Debug, Default)]
struct Csr<T> {
    offsets: Vec<usize>,
    targets: Vec<u32>,
    weights: Vec<T>,
}

impl<T: Scalar> Csr<T> {
    fn from_edges(n: usize, edges: &mut [(u32, u32, T)]) -> Self {
        edges.sort_by_key(|e| (e.0, e.1));
        let mut offsets = vec![0usize; n + 1];
        for e in edges.iter() {
            offsets[e.0 as usize + 1] += 1;
        }
        for i in 0..n {
            offsets[i + 1] += offsets[i];
        }
        Csr {
            offsets,
            targets: edges.iter().map(|e| e.1).collect(),
            weights: edges.iter().map(|e| e.2).collect(),
        }
    }

    fn neighbors(&self, u: usize) -> impl Iterator<Item = (usize, T)> + '_ {
        let r = self.offsets[u]..self.offsets[u + 1];
        self.targets[r.clone()].iter().zip(&self.weights[r]).map(|(&v, &w)| (v as usize, w))
    }
}

#[derive(Clone, Copy)]
struct HeapItem<T>(T, u32);

impl<T: Scalar> PartialEq for HeapItem<T> {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}
impl<T: Scalar> Eq for HeapItem<T> {}
impl<T: Scalar> PartialOrd for HeapItem<T> {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl<T: Scalar> Ord for HeapItem<T> {
    // Reversed: BinaryHeap is a max-heap.
    fn cmp(&self, other: &Self) -> Ordering {
        other.0.partial_cmp(&self.0).expect("finite labels").then_with(|| other.1.cmp(&self.1))
    }
}

/// Multi-source Dijkstra with arbitrary real initial labels.
fn dijkstra<T: Scalar>(g: &Csr<T>, n: usize, sources: &[(usize, T)]) -> Vec<T> {
    let mut dist = vec![T::infinity(); n];
    let mut heap = BinaryHeap::new();
    for &(s, d0) in sources {
        if d0 < dist[s] {
            dist[s] = d0;
            heap.push(HeapItem(d0, s as u32));
        }
    }
    while let Some(HeapItem(d, u)) = heap.pop() {
        let u = u as usize;
        if d > dist[u] {
            continue;
        }
        for (v, w) in g.neighbors(u) {
            let nd = d + w;
            if nd < dist[v] {
                dist[v] = nd;
                heap.push(HeapItem(nd, v as u32));
            }
        }
    }
    dist
}

const ROW_CACHE_CAPACITY: usize = 192;

#[derive(Default)]
struct RowCache<T> {
    rows: HashMap<usize, Arc<[Ext<T>]>>,
    order: VecDeque<usize>,
}

impl<T> RowCache<T> {
    fn get(&self, k: usize) -> Option<Arc<[Ext<T>]>> {
        self.rows.get(&k).cloned()
    }
    fn put(&mut self, k: usize, row: Arc<[Ext<T>]>) {
        if self.rows.insert(k, row).is_none() {
            self.order.push_back(k);
            if self.order.len() > ROW_CACHE_CAPACITY {
                if let Some(old) = self.order.pop_front() {
                    self.rows.remove(&old);
                }
            }
        }
    }
}

/// Grid bookkeeping for spaces built from a spec.
#[derive(Clone, Debug)]
pub struct GridIndex {
    pub axis_values: [Vec<f64>; 2],
    /// `ids[i * ny + j]`, `None` where excised.
    pub ids: Vec<Option<usize>>,
    pub periodic: [bool; 2],
}

impl GridIndex {
    pub fn id(&self, i: usize, j: usize) -> Option<usize> {
        let ny = self.axis_values[1].len();
        self.ids.get(i * ny + j).copied().flatten()
    }
}

/// Finite sample of a Finsler space with asymmetric edge weights.
pub struct SampledSpace<T: Scalar> {
    spec: SpaceSpec,
    metric: RandersData,
    labels: Vec<PointLabel<T>>,
    frontier: Vec<bool>,
    fwd: Csr<T>,
    rev: Csr<T>,
    resolution: T,
    grid: Option<GridIndex>,
    from_cache: Mutex<RowCache<T>>,
    to_cache: Mutex<RowCache<T>>,
}

impl<T: Scalar> Clone for SampledSpace<T> {
    fn clone(&self) -> Self {
        SampledSpace {
            spec: self.spec.clone(),
            metric: self.metric.clone(),
            labels: self.labels.clone(),
            frontier: self.frontier.clone(),
            fwd: self.fwd.clone(),
            rev: self.rev.clone(),
            resolution: self.resolution,
            grid: self.grid.clone(),
            from_cache: Default::default(),
            to_cache: Default::default(),
        }
    }
}

impl<T: Scalar> std::fmt::Debug for SampledSpace<T> {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("SampledSpace")
            .field("kind", &self.spec.kind)
            .field("points", &self.len())
            .field("edges", &self.edge_count())
            .finish()
    }
}

/// Summary statistics of a sampled space.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct GraphSummary {
    pub kind: String,
    pub points: usize,
    pub edges: usize,
    pub resolution: f64,
    pub min_weight: f64,
    pub max_weight: f64,
    pub frontier_points: usize,
}

impl<T: Scalar> SampledSpace<T> {
    pub fn spec(&self) -> &SpaceSpec {
        &self.spec
    }
    pub fn metric(&self) -> &RandersData {
        &self.metric
    }
    pub fn resolution(&self) -> T {
        self.resolution
    }
    pub fn grid(&self) -> Option<&GridIndex> {
        self.grid.as_ref()
    }
    pub fn labels(&self) -> &[PointLabel<T>] {
        &self.labels
    }
    pub fn coords(&self, id: usize) -> [T; 2] {
        self.labels[id].coords
    }
    /// Whether the point sits next to a missing part of the domain
    /// (excision, open end or truncation).
    pub fn is_frontier(&self, id: usize) -> bool {
        self.frontier[id]
    }
    pub fn edge_count(&self) -> usize {
        self.fwd.targets.len()
    }

    /// Outgoing edges `(target, weight)` of `u`, sorted by target.
    pub fn out_edges(&self, u: usize) -> impl Iterator<Item = (usize, T)> + '_ {
        self.fwd.neighbors(u)
    }

    /// Incoming edges `(source, weight)` of `v`, sorted by source.
    pub fn in_edges(&self, v: usize) -> impl Iterator<Item = (usize, T)> + '_ {
        self.rev.neighbors(v)
    }

    pub fn edge_weight(&self, u: usize, v: usize) -> Option<T> {
        self.out_edges(u).find(|e| e.0 == v).map(|e| e.1)
    }

    /// All directed edges `(u, v, w)`.
    pub fn edges(&self) -> impl Iterator<Item = (usize, usize, T)> + '_ {
        (0..self.len()).flat_map(move |u| self.out_edges(u).map(move |(v, w)| (u, v, w)))
    }

    /// `d(src, ·)` as raw floats (`+∞` when unreachable).
    pub fn raw_from(&self, sources: &[(usize, T)]) -> Vec<T> {
        dijkstra(&self.fwd, self.len(), sources)
    }

    /// `min_k (d(·, c_k) + offset_k)` for sources `(c_k, offset_k)`.
    pub fn raw_to(&self, sources: &[(usize, T)]) -> Vec<T> {
        dijkstra(&self.rev, self.len(), sources)
    }

    /// Single-source distances to `targets`.
    pub fn shortest_distance(&self, from: usize, targets: &[usize]) -> Vec<Ext<T>> {
        let row = self.row_from(from);
        targets.iter().map(|&t| row[t]).collect()
    }

    /// The same sample with every edge reversed: the metric with `−ω`.
    pub fn reversed(&self) -> SampledSpace<T> {
        let mut s = self.clone();
        std::mem::swap(&mut s.fwd, &mut s.rev);
        s.metric = self.metric.negated();
        s.spec.fields = s.spec.fields.take().map(|mut f| {
            f.omega = f.omega.iter().map(|w| format!("-({w})")).collect();
            f
        });
        s
    }

    /// Nearest sample (in Cartesian position) to the chart point `p`.
    pub fn nearest(&self, p: [T; 2]) -> usize {
        if let Some(id) = self.grid_nearest(p) {
            return id;
        }
        let probe = PointLabel { coords: p, chart: self.spec.chart };
        let mut best = (T::infinity(), 0);
        for (i, l) in self.labels.iter().enumerate() {
            let d = probe.euclidean_to(l);
            if d < best.0 {
                best = (d, i);
            }
        }
        best.1
    }

    /// Grid sample at the closest axis values, when it was not excised.
    fn grid_nearest(&self, p: [T; 2]) -> Option<usize> {
        let g = self.grid.as_ref()?;
        let mut idx = [0usize; 2];
        for a in 0..2 {
            let vals = &g.axis_values[a];
            let mut v = to_f64(p[a]);
            if g.periodic[a] && vals.len() > 1 {
                let h = vals[1] - vals[0];
                let period = h * vals.len() as f64;
                v = vals[0] + (v - vals[0]).rem_euclid(period);
                if v > vals[vals.len() - 1] + h / 2.0 {
                    v -= period;
                }
            }
            let k = vals.partition_point(|&w| w < v);
            idx[a] = match (k.checked_sub(1), vals.get(k)) {
                (Some(j), Some(&hi)) => if hi - v < v - vals[j] { k } else { j },
                (Some(j), None) => j,
                (None, _) => 0,
            };
        }
        g.id(idx[0], idx[1])
    }

    /// Strong connectivity of the whole sample.
    pub fn is_strongly_connected(&self) -> bool {
        if self.is_empty() {
            return true;
        }
        let f = self.raw_from(&[(0, T::zero())]);
        let b = self.raw_to(&[(0, T::zero())]);
        f.iter().chain(b.iter()).all(|v| v.is_finite())
    }

    pub fn summary(&self) -> GraphSummary {
        let (mut lo, mut hi) = (f64::INFINITY, 0.0f64);
        for &w in &self.fwd.weights {
            lo = lo.min(to_f64(w));
            hi = hi.max(to_f64(w));
        }
        GraphSummary {
            kind: self.spec.kind.clone(),
            points: self.len(),
            edges: self.edge_count(),
            resolution: to_f64(self.resolution),
            min_weight: lo,
            max_weight: hi,
            frontier_points: self.frontier.iter().filter(|f| **f).count(),
        }
    }

    /// Text dump of points and edges; identical builds give identical text.
    pub fn to_edge_list(&self) -> String {
        use std::fmt::Write as _;
        let mut out = String::new();
        let _ = writeln!(out, "# points {}", self.len());
        for (i, l) in self.labels.iter().enumerate() {
            let _ = writeln!(out, "p,{i},{:?},{:?},{}", to_f64(l.coords[0]), to_f64(l.coords[1]), u8::from(self.frontier[i]));
        }
        let _ = writeln!(out, "# edges {}", self.edge_count());
        for (u, v, w) in self.edges() {
            let _ = writeln!(out, "e,{u},{v},{:?}", to_f64(w));
        }
        out
    }
}

impl<T: Scalar> DistanceOracle<T> for SampledSpace<T> {
    fn len(&self) -> usize {
        self.labels.len()
    }

    fn distance(&self, from: usize, to: usize) -> Ext<T> {
        self.row_from(from)[to]
    }

    fn row_from(&self, from: usize) -> Arc<[Ext<T>]> {
        if let Some(r) = self.from_cache.lock().expect("cache lock").get(from) {
            return r;
        }
        let row: Arc<[Ext<T>]> = self.raw_from(&[(from, T::zero())]).into_iter().map(Ext::clamped).collect();
        self.from_cache.lock().expect("cache lock").put(from, row.clone());
        row
    }

    fn row_to(&self, to: usize) -> Arc<[Ext<T>]> {
        if let Some(r) = self.to_cache.lock().expect("cache lock").get(to) {
            return r;
        }
        let row: Arc<[Ext<T>]> = self.raw_to(&[(to, T::zero())]).into_iter().map(Ext::clamped).collect();
        self.to_cache.lock().expect("cache lock").put(to, row.clone());
        row
    }

    fn label(&self, id: usize) -> Option<PointLabel<T>> {
        Some(self.labels[id])
    }

    fn is_frontier(&self, id: usize) -> bool {
        self.frontier[id]
    }
}

fn axis_samples(iv: &Interval, h: f64, periodic: bool) -> Vec<f64> {
    let eps = 1e-9 * h;
    if periodic {
        let n = ((iv.max - iv.min) / h).round() as usize;
        return (0..n).map(|k| iv.min + k as f64 * h).collect();
    }
    let mut out = Vec::new();
    let kmax = ((iv.max - iv.min) / h + 1e-9).floor() as i64;
    for k in 0..=kmax {
        let v = iv.min + k as f64 * h;
        if iv.open_min && v <= iv.min + eps {
            continue;
        }
        if iv.open_max && v >= iv.max - eps {
            continue;
        }
        out.push(v);
    }
    out
}

fn seg_dist_to_point(a: [f64; 2], b: [f64; 2], p: [f64; 2]) -> f64 {
    let d = [b[0] - a[0], b[1] - a[1]];
    let len2 = d[0] * d[0] + d[1] * d[1];
    let t = if len2 == 0.0 { 0.0 } else { (((p[0] - a[0]) * d[0] + (p[1] - a[1]) * d[1]) / len2).clamp(0.0, 1.0) };
    let q = [a[0] + t * d[0], a[1] + t * d[1]];
    (p[0] - q[0]).hypot(p[1] - q[1])
}

fn cross(o: [f64; 2], a: [f64; 2], b: [f64; 2]) -> f64 {
    (a[0] - o[0]) * (b[1] - o[1]) - (a[1] - o[1]) * (b[0] - o[0])
}

fn segments_intersect(p1: [f64; 2], p2: [f64; 2], q1: [f64; 2], q2: [f64; 2]) -> bool {
    let d1 = cross(q1, q2, p1);
    let d2 = cross(q1, q2, p2);
    let d3 = cross(p1, p2, q1);
    let d4 = cross(p1, p2, q2);
    let tiny = 1e-12;
    if ((d1 > tiny && d2 < -tiny) || (d1 < -tiny && d2 > tiny)) && ((d3 > tiny && d4 < -tiny) || (d3 < -tiny && d4 > tiny)) {
        return true;
    }
    seg_dist_to_point(q1, q2, p1) < tiny
        || seg_dist_to_point(q1, q2, p2) < tiny
        || seg_dist_to_point(p1, p2, q1) < tiny
        || seg_dist_to_point(p1, p2, q2) < tiny
}

impl Excision {
    fn contains(&self, p: [f64; 2]) -> bool {
        match self {
            Excision::Disk { center, radius } => (p[0] - center[0]).hypot(p[1] - center[1]) <= *radius,
            Excision::Rect { min, max } => p[0] >= min[0] && p[0] <= max[0] && p[1] >= min[1] && p[1] <= max[1],
            Excision::Segment { a, b } => seg_dist_to_point(*a, *b, p) < 1e-12,
        }
    }

    fn crossed_by(&self, a: [f64; 2], b: [f64; 2]) -> bool {
        match self {
            Excision::Disk { center, radius } => seg_dist_to_point(a, b, *center) <= *radius,
            Excision::Rect { min, max } => {
                if self.contains(a) || self.contains(b) {
                    return true;
                }
                let c = [[min[0], min[1]], [max[0], min[1]], [max[0], max[1]], [min[0], max[1]]];
                (0..4).any(|k| segments_intersect(a, b, c[k], c[(k + 1) % 4]))
            }
            Excision::Segment { a: s, b: e } => segments_intersect(a, b, *s, *e),
        }
    }
}

fn primitive_offsets(radius: usize) -> Vec<(i64, i64)> {
    fn gcd(a: i64, b: i64) -> i64 {
        if b == 0 {
            a
        } else {
            gcd(b, a % b)
        }
    }
    let r = radius.max(1) as i64;
    let mut out = Vec::new();
    for di in -r..=r {
        for dj in -r..=r {
            if (di, dj) != (0, 0) && gcd(di.abs(), dj.abs()) == 1 {
                out.push((di, dj));
            }
        }
    }
    out
}

/// Builds the directed graph of a grid spec.
///
/// In two dimensions the stencil joins each sample to every grid offset
/// `(i, j)` with `max(|i|, |j|) ≤ stencil_radius` and `gcd(|i|, |j|) = 1`;
/// radius 1 is the 8-neighbor stencil. In one dimension samples are joined
/// to their two neighbors.
pub fn build_graph<T: Scalar>(spec: &SpaceSpec, metric: &RandersData) -> Result<SampledSpace<T>, BuildError> {
    if spec.dim != 1 && spec.dim != 2 {
        return Err(BuildError::Spec(format!("dimension {} unsupported", spec.dim)));
    }
    if spec.domain.len() != spec.dim {
        return Err(BuildError::Spec(format!("domain needs {} intervals", spec.dim)));
    }
    let h0 = *spec.resolution.first().ok_or_else(|| BuildError::Spec("missing resolution".into()))?;
    let h1 = spec.resolution.get(1).copied().unwrap_or(h0);
    if !(h0 > 0.0 && h1 > 0.0) {
        return Err(BuildError::Spec("resolution must be positive".into()));
    }
    let mut periodic = [false, false];
    for id in &spec.identifications {
        if id.axis >= spec.dim {
            return Err(BuildError::Spec(format!("identification axis {} out of range", id.axis)));
        }
        periodic[id.axis] = true;
    }
    let xs = axis_samples(&spec.domain[0], h0, periodic[0]);
    let ys = if spec.dim == 2 { axis_samples(&spec.domain[1], h1, periodic[1]) } else { vec![0.0] };
    let (nx, ny) = (xs.len(), ys.len());
    if nx == 0 || ny == 0 {
        return Err(BuildError::Spec("empty domain".into()));
    }
    let period = [spec.domain[0].max - spec.domain[0].min, spec.domain.get(1).map(|d| d.max - d.min).unwrap_or(0.0)];

    let mut ids = vec![None; nx * ny];
    let mut labels = Vec::new();
    let mut gpos = Vec::new();
    for i in 0..nx {
        for j in 0..ny {
            let p = [xs[i], ys[j]];
            if spec.excisions.iter().any(|e| e.contains(p)) {
                continue;
            }
            ids[i * ny + j] = Some(labels.len());
            labels.push(PointLabel { coords: [lit::<T>(p[0]), lit::<T>(p[1])], chart: spec.chart });
            gpos.push((i, j));
        }
    }
    for l in &labels {
        metric.checked_local(l.coords)?;
    }

    let offsets: Vec<(i64, i64)> = if spec.dim == 1 { vec![(-1, 0), (1, 0)] } else { primitive_offsets(spec.stencil_radius) };
    let near: Vec<(i64, i64)> = if spec.dim == 1 { vec![(-1, 0), (1, 0)] } else { primitive_offsets(1) };
    let step = |i: usize, di: i64, n: usize, per: bool| -> Option<(usize, i64)> {
        let k = i as i64 + di;
        if per {
            let m = k.rem_euclid(n as i64);
            Some((m as usize, (k - m) / n as i64))
        } else if k < 0 || k >= n as i64 {
            None
        } else {
            Some((k as usize, 0))
        }
    };
    let hmin = h0.min(if spec.dim == 2 { h1 } else { h0 });
    let lo = [spec.domain[0].min, spec.domain.get(1).map(|d| d.min).unwrap_or(0.0)];
    let wrap = |p: [T; 2]| -> [T; 2] {
        let mut q = p;
        for a in 0..2 {
            if periodic[a] {
                let per: T = lit(period[a]);
                let l: T = lit(lo[a]);
                let shifted = q[a] - l;
                q[a] = l + shifted - per * (shifted / per).floor();
            }
        }
        q
    };

    let mut edges: Vec<(u32, u32, T)> = Vec::new();
    let mut frontier = vec![false; labels.len()];
    for (u, &(i, j)) in gpos.iter().enumerate() {
        for &(di, dj) in &near {
            let ok = match (step(i, di, nx, periodic[0]), step(j, dj, ny, periodic[1])) {
                (Some((a, _)), Some((b, _))) => ids[a * ny + b].is_some(),
                _ => false,
            };
            if !ok {
                frontier[u] = true;
            }
        }
        let pa = [xs[i], ys[j]];
        for &(di, dj) in &offsets {
            let (Some((a, wa)), Some((b, wb))) = (step(i, di, nx, periodic[0]), step(j, dj, ny, periodic[1])) else {
                continue;
            };
            let Some(v) = ids[a * ny + b] else { continue };
            // Both directions of a pair share the frame of the smaller id, so
            // the reversed edge integrates over identical nodes.
            let (pa, pb) = if u < v {
                (pa, [xs[a] + wa as f64 * period[0], ys[b] + wb as f64 * period[1]])
            } else {
                ([xs[i] - wa as f64 * period[0], ys[j] - wb as f64 * period[1]], [xs[a], ys[b]])
            };
            let blocked = spec.excisions.iter().any(|e| {
                let mut hit = e.crossed_by(pa, pb);
                for ax in 0..2 {
                    if periodic[ax] {
                        for sgn in [-1.0, 1.0] {
                            let mut a2 = pa;
                            let mut b2 = pb;
                            a2[ax] += sgn * period[ax];
                            b2[ax] += sgn * period[ax];
                            hit |= e.crossed_by(a2, b2);
                        }
                    }
                }
                hit
            });
            if blocked {
                frontier[u] = true;
                continue;
            }
            let len = (pb[0] - pa[0]).hypot(pb[1] - pa[1]);
            let steps = ((len / hmin - 1e-9).ceil().max(1.0) as usize) * 4;
            let a_t = [lit::<T>(pa[0]), lit::<T>(pa[1])];
            let b_t = [lit::<T>(pb[0]), lit::<T>(pb[1])];
            let w = segment_length_mapped(metric, a_t, b_t, steps, &wrap)?;
            edges.push((u as u32, v as u32, w));
        }
    }
    let n = labels.len();
    let mut rev_edges: Vec<(u32, u32, T)> = edges.iter().map(|&(u, v, w)| (v, u, w)).collect();
    let fwd = Csr::from_edges(n, &mut edges);
    let rev = Csr::from_edges(n, &mut rev_edges);
    Ok(SampledSpace {
        spec: spec.clone(),
        metric: metric.clone(),
        labels,
        frontier,
        fwd,
        rev,
        resolution: lit(hmin),
        grid: Some(GridIndex { axis_values: [xs, ys], ids, periodic }),
        from_cache: Default::default(),
        to_cache: Default::default(),
    })
}

/// Builds a grid space from a spec carrying its own `fields`.
pub fn build_from_spec<T: Scalar>(spec: &SpaceSpec) -> Result<SampledSpace<T>, BuildError> {
    let metric = spec.metric()?;
    build_graph(spec, &metric)
}

/// Assembles spaces made of straight segments (combs, ladders).
pub struct GraphBuilder<T: Scalar> {
    metric: RandersData,
    labels: Vec<PointLabel<T>>,
    frontier: Vec<bool>,
    index: HashMap<(i64, i64), usize>,
    edges: Vec<(u32, u32, T)>,
    quantum: f64,
}

impl<T: Scalar> GraphBuilder<T> {
    /// `quantum` is the coordinate grid used to merge coincident points.
    pub fn new(metric: RandersData, quantum: f64) -> Self {
        GraphBuilder { metric, labels: vec![], frontier: vec![], index: HashMap::new(), edges: vec![], quantum }
    }

    fn key(&self, p: [f64; 2]) -> (i64, i64) {
        ((p[0] / self.quantum).round() as i64, (p[1] / self.quantum).round() as i64)
    }

    /// Id of the point at `p`, created on first use.
    pub fn point(&mut self, p: [f64; 2]) -> usize {
        let k = self.key(p);
        if let Some(&id) = self.index.get(&k) {
            return id;
        }
        let id = self.labels.len();
        self.labels.push(PointLabel { coords: [lit(p[0]), lit(p[1])], chart: Chart::Cartesian });
        self.frontier.push(false);
        self.index.insert(k, id);
        id
    }

    pub fn find(&self, p: [f64; 2]) -> Option<usize> {
        self.index.get(&self.key(p)).copied()
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    pub fn coords(&self, id: usize) -> [T; 2] {
        self.labels[id].coords
    }

    pub fn mark_frontier(&mut self, id: usize) {
        self.frontier[id] = true;
    }

    /// Adds both directed edges of the straight segment between two points.
    pub fn link(&mut self, a: usize, b: usize) -> Result<(), BuildError> {
        let pa = self.labels[a].coords;
        let pb = self.labels[b].coords;
        let len = to_f64((pa[0] - pb[0]).hypot(pa[1] - pb[1]));
        let steps = ((len / self.quantum).ceil().max(1.0) as usize).min(64) * 4;
        let w_ab = segment_length_mapped(&self.metric, pa, pb, steps, &|p| p)?;
        let w_ba = segment_length_mapped(&self.metric, pb, pa, steps, &|p| p)?;
        self.edges.push((a as u32, b as u32, w_ab));
        self.edges.push((b as u32, a as u32, w_ba));
        Ok(())
    }

    /// Samples the segment `p → q` every `h` (endpoints included) and links it.
    pub fn polyline(&mut self, p: [f64; 2], q: [f64; 2], h: f64) -> Result<Vec<usize>, BuildError> {
        let len = (q[0] - p[0]).hypot(q[1] - p[1]);
        let n = ((len / h) - 1e-9).ceil().max(1.0) as usize;
        let mut ids = Vec::with_capacity(n + 1);
        for k in 0..=n {
            let t = k as f64 / n as f64;
            ids.push(self.point([p[0] + t * (q[0] - p[0]), p[1] + t * (q[1] - p[1])]));
        }
        for w in ids.windows(2) {
            if w[0] != w[1] {
                self.link(w[0], w[1])?;
            }
        }
        Ok(ids)
    }

    pub fn finish(mut self, spec: SpaceSpec, resolution: f64) -> SampledSpace<T> {
        let n = self.labels.len();
        self.edges.sort_by_key(|e| (e.0, e.1));
        self.edges.dedup_by(|a, b| a.0 == b.0 && a.1 == b.1);
        let mut rev_edges: Vec<(u32, u32, T)> = self.edges.iter().map(|&(u, v, w)| (v, u, w)).collect();
        let fwd = Csr::from_edges(n, &mut self.edges);
        let rev = Csr::from_edges(n, &mut rev_edges);
        SampledSpace {
            spec,
            metric: self.metric,
            labels: self.labels,
            frontier: self.frontier,
            fwd,
            rev,
            resolution: lit(resolution),
            grid: None,
            from_cache: Default::default(),
            to_cache: Default::default(),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn flat_spec(h: f64, radius: usize, w: [f64; 2], form: MetricForm) -> SpaceSpec {
        let mut s = SpaceSpec::grid(
            2,
            Chart::Cartesian,
            vec![Interval::closed(-1.0, 5.0), Interval::closed(-1.0, 5.0)],
            vec![h],
            FieldsSpec { form, g0: vec!["1".into(), "0".into(), "1".into()], omega: vec![w[0].to_string(), w[1].to_string()] },
        );
        s.stencil_radius = radius;
        s
    }

    #[test]
    fn interval_count() {
        let spec = SpaceSpec::grid(
            1,
            Chart::Cartesian,
            vec![Interval::left_open(0.0, 10.0)],
            vec![0.1],
            FieldsSpec { form: MetricForm::Fermat, g0: vec!["1".into()], omega: vec!["0".into()] },
        );
        let s: SampledSpace<f64> = build_from_spec(&spec).unwrap();
        assert_eq!(s.len(), 100);
        assert_eq!(s.edge_count(), 198);
        assert!(s.is_frontier(0) && s.is_frontier(99) && !s.is_frontier(50));
    }

    #[test]
    fn flat_distance_with_radius_three() {
        let s: SampledSpace<f64> = build_from_spec(&flat_spec(0.05, 3, [0.0, 0.0], MetricForm::Standard)).unwrap();
        let a = s.nearest([0.0, 0.0]);
        let b = s.nearest([3.0, 4.0]);
        let d = s.distance(a, b).finite().unwrap();
        assert!((d - 5.0).abs() < 0.03, "{d}");
        assert_eq!(s.distance(a, a), Ext::zero());
    }

    #[test]
    fn constant_one_form_distances() {
        let s: SampledSpace<f64> = build_from_spec(&flat_spec(0.05, 1, [0.5, 0.0], MetricForm::Standard)).unwrap();
        let a = s.nearest([0.0, 0.0]);
        let b = s.nearest([1.0, 0.0]);
        assert!((s.distance(a, b).finite().unwrap() - 1.5).abs() < 0.02);
        assert!((s.distance(b, a).finite().unwrap() - 0.5).abs() < 0.02);
    }

    #[test]
    fn reversed_graph_matches_negated_build() {
        let spec = flat_spec(0.5, 2, [0.3, -0.2], MetricForm::Standard);
        let s: SampledSpace<f64> = build_from_spec(&spec).unwrap();
        let mut neg = spec.clone();
        neg.fields.as_mut().unwrap().omega = vec!["-0.3".into(), "0.2".into()];
        let t: SampledSpace<f64> = build_from_spec(&neg).unwrap();
        for i in 0..s.len() {
            assert_eq!(&*s.row_to(i), &*t.row_from(i));
        }
        let r = s.reversed();
        for i in [0, 7, 40] {
            assert_eq!(&*r.row_from(i), &*t.row_from(i));
        }
    }

    #[test]
    fn gluing_and_excision() {
        let mut spec = flat_spec(0.5, 1, [0.0, 0.0], MetricForm::Standard);
        spec.domain = vec![Interval::closed(-6.0, 6.0), Interval::closed(0.0, 2.0)];
        spec.identifications = vec![Identification { axis: 0 }];
        let s: SampledSpace<f64> = build_from_spec(&spec).unwrap();
        let left = s.nearest([-6.0, 1.0]);
        let right = s.nearest([5.5, 1.0]);
        assert!((s.distance(left, right).finite().unwrap() - 0.5).abs() < 1e-12);
        assert!(s.grid().unwrap().axis_values[0].iter().all(|&x| x < 6.0));

        let mut cut = flat_spec(0.5, 2, [0.0, 0.0], MetricForm::Standard);
        cut.excisions = vec![Excision::Segment { a: [1.25, -1.0], b: [1.25, 3.0] }];
        let c: SampledSpace<f64> = build_from_spec(&cut).unwrap();
        for (u, v, _) in c.edges() {
            let (a, b) = (c.coords(u), c.coords(v));
            assert!(!((a[0] < 1.25 && b[0] > 1.25) && a[1].max(b[1]) <= 3.0));
        }
        let d = c.distance(c.nearest([1.0, 0.0]), c.nearest([1.5, 0.0])).finite().unwrap();
        assert!(d > 4.0, "{d}");
    }

    #[test]
    fn unreachable_is_infinite() {
        let mut cut = flat_spec(0.5, 1, [0.0, 0.0], MetricForm::Standard);
        cut.excisions = vec![Excision::Rect { min: [1.1, -2.0], max: [1.4, 6.0] }];
        let c: SampledSpace<f64> = build_from_spec(&cut).unwrap();
        assert!(c.distance(c.nearest([0.0, 0.0]), c.nearest([3.0, 0.0])).is_infinite());
        assert!(!c.is_strongly_connected());
    }

    #[test]
    fn invalid_one_form_rejected() {
        let r = build_from_spec::<f64>(&flat_spec(0.5, 1, [1.5, 0.0], MetricForm::Standard));
        assert!(matches!(r, Err(BuildError::Metric(RandersError::OneFormTooLarge { .. }))));
    }

    #[test]
    fn spec_json_roundtrip() {
        let mut spec = flat_spec(0.5, 1, [0.0, 0.0], MetricForm::Fermat);
        spec.excisions = vec![Excision::Disk { center: [0.0, 0.0], radius: 0.2 }];
        let back = SpaceSpec::from_json(&spec.to_json()).unwrap();
        assert_eq!(back, spec);
    }
}
