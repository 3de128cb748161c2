//! Standard stationary spacetimes `ℝ × M` with `Λ ≡ 1`: chronology through
//! the Fermat metrics, terminal sets and boundary lines.

use crate::busemann::{busemann_eval, classify_busemann, BusemannError, BusemannKind, Direction, SpeedBoundedCurve};
use crate::completion::{ClassKind, CompletionCatalog};
use crate::extended::Ext;
use crate::function::{SampledFunction, Window};
use crate::graph::{build_from_spec, BuildError, SampledSpace, SpaceSpec};
use crate::gromov::is_lipschitz1;
use crate::metric::DistanceOracle;
use crate::scalar::{lit, to_f64, Scalar};
use serde::Serialize;
use std::fmt::Write as _;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum SpacetimeError {
    #[error(transparent)]
    Build(#[from] BuildError),
    #[error(transparent)]
    Busemann(#[from] BusemannError),
    #[error("function is not 1-Lipschitz for the future Fermat metric (excess {excess} on edge {edge:?})")]
    NotLipschitz { excess: f64, edge: Option<(usize, usize)> },
    #[error("point {0} lies outside the function window")]
    OutsideWindow(usize),
    #[error("descriptor {0} has no finite function")]
    NotFinite(String),
    #[error("class {0} is not in the catalog")]
    UnknownClass(String),
    #[error("descriptor {0} is on the wrong side")]
    WrongSide(String),
}

/// `ℝ × M` with metric `−dt² + ω ⊗ dt + dt ⊗ ω + g0`; `plus` holds `F⁺`
/// and `minus` its reverse `F⁻`.
pub struct StationarySpacetime<T: Scalar> {
    plus: SampledSpace<T>,
    minus: SampledSpace<T>,
}

impl<T: Scalar> StationarySpacetime<T> {
    pub fn plus(&self) -> &SampledSpace<T> {
        &self.plus
    }
    pub fn minus(&self) -> &SampledSpace<T> {
        &self.minus
    }
    pub fn len(&self) -> usize {
        self.plus.len()
    }
    pub fn is_empty(&self) -> bool {
        self.plus.is_empty()
    }
    pub fn d_plus(&self, x: usize, y: usize) -> Ext<T> {
        self.plus.distance(x, y)
    }
    pub fn d_minus(&self, x: usize, y: usize) -> Ext<T> {
        self.minus.distance(x, y)
    }
}

/// Wraps a sampled `F⁺` graph; `F⁻` is its edge reversal.
pub fn fermat_graphs<T: Scalar>(plus: SampledSpace<T>) -> StationarySpacetime<T> {
    let minus = plus.reversed();
    StationarySpacetime { plus, minus }
}

/// Builds `F⁺` from a spec (Fermat form expected) and pairs it with `F⁻`.
pub fn fermat_graphs_from_spec<T: Scalar>(spec: &SpaceSpec) -> Result<StationarySpacetime<T>, SpacetimeError> {
    Ok(fermat_graphs(build_from_spec(spec)?))
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct Event<T> {
    pub t: T,
    pub x: usize,
}

impl<T> Event<T> {
    pub fn new(t: T, x: usize) -> Self {
        Event { t, x }
    }
}

/// `a ≪ b` iff `d⁺(a.x, b.x) < b.t − a.t`.
pub fn chron_rel<T: Scalar>(a: Event<T>, b: Event<T>, s: &StationarySpacetime<T>) -> bool {
    s.d_plus(a.x, b.x).lt_real(b.t - a.t)
}

/// Past set `{t < f(x)}`; `None` stands for `f ≡ +∞`.
#[derive(Clone, Debug, PartialEq)]
pub struct PastSet<T>(Option<SampledFunction<T>>);

/// Future set `{t > g(x)}`; `None` stands for `g ≡ −∞`.
#[derive(Clone, Debug, PartialEq)]
pub struct FutureSet<T>(Option<SampledFunction<T>>);

fn audit<T: Scalar>(f: &Option<SampledFunction<T>>, s: &StationarySpacetime<T>, tol: T) -> Result<(), SpacetimeError> {
    if let Some(f) = f {
        let a = is_lipschitz1(f, s.plus(), tol);
        if !a.ok {
            return Err(SpacetimeError::NotLipschitz { excess: a.worst_excess, edge: a.worst_edge });
        }
    }
    Ok(())
}

impl<T: Scalar> PastSet<T> {
    /// Audits `f(y) − f(x) ≤ d⁺(x, y)` on edges inside the window.
    pub fn new(f: Option<SampledFunction<T>>, s: &StationarySpacetime<T>, tol: T) -> Result<Self, SpacetimeError> {
        audit(&f, s, tol)?;
        Ok(PastSet(f))
    }
    pub fn function(&self) -> Option<&SampledFunction<T>> {
        self.0.as_ref()
    }
    pub fn contains(&self, e: Event<T>) -> Result<bool, SpacetimeError> {
        match &self.0 {
            None => Ok(true),
            Some(f) => f.at(e.x).map(|v| e.t < v).ok_or(SpacetimeError::OutsideWindow(e.x)),
        }
    }
}

impl<T: Scalar> FutureSet<T> {
    pub fn new(g: Option<SampledFunction<T>>, s: &StationarySpacetime<T>, tol: T) -> Result<Self, SpacetimeError> {
        audit(&g, s, tol)?;
        Ok(FutureSet(g))
    }
    pub fn function(&self) -> Option<&SampledFunction<T>> {
        self.0.as_ref()
    }
    pub fn contains(&self, e: Event<T>) -> Result<bool, SpacetimeError> {
        match &self.0 {
            None => Ok(true),
            Some(g) => g.at(e.x).map(|v| e.t > v).ok_or(SpacetimeError::OutsideWindow(e.x)),
        }
    }
}

/// Membership of `e` in `P(f)` after a Lipschitz audit.
pub fn past_membership<T: Scalar>(f: Option<&SampledFunction<T>>, e: Event<T>, s: &StationarySpacetime<T>, tol: T) -> Result<bool, SpacetimeError> {
    PastSet::new(f.cloned(), s, tol)?.contains(e)
}

/// Membership of `e` in `F(g)` after a Lipschitz audit.
pub fn future_membership<T: Scalar>(g: Option<&SampledFunction<T>>, e: Event<T>, s: &StationarySpacetime<T>, tol: T) -> Result<bool, SpacetimeError> {
    FutureSet::new(g.cloned(), s, tol)?.contains(e)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum Side {
    #[serde(rename = "TIP")]
    Tip,
    #[serde(rename = "TIF")]
    Tif,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(rename_all = "snake_case", tag = "kind")]
pub enum DescriptorKind {
    Cauchy { omega: f64, class: String },
    ProperlyBusemann { id: String },
    Apex,
}

/// A terminal indecomposable past or future set.
#[derive(Clone, Debug, PartialEq)]
pub struct TerminalDescriptor<T> {
    pub label: String,
    pub side: Side,
    pub kind: DescriptorKind,
    /// `d_p⁺` for a TIP, `d_p⁻` for a TIF; `None` for the apex.
    pub function: Option<SampledFunction<T>>,
}

impl<T: Scalar> TerminalDescriptor<T> {
    pub fn omega(&self) -> Option<f64> {
        match self.kind {
            DescriptorKind::Cauchy { omega, .. } => Some(omega),
            _ => None,
        }
    }
    pub fn class(&self) -> Option<&str> {
        match &self.kind {
            DescriptorKind::Cauchy { class, .. } => Some(class),
            _ => None,
        }
    }

    /// Same descriptor with `Ω` replaced; the function is shifted accordingly.
    pub fn with_omega(&self, omega: f64) -> Self {
        let mut d = self.clone();
        if let DescriptorKind::Cauchy { omega: old, class } = &self.kind {
            let delta: T = lit(omega - old);
            d.function = self.function.as_ref().map(|f| f.shift(delta));
            d.kind = DescriptorKind::Cauchy { omega, class: class.clone() };
        }
        d
    }

    pub fn to_json(&self) -> serde_json::Value {
        serde_json::json!({ "label": self.label, "side": self.side, "kind": self.kind })
    }
}

/// Catalog, window and tolerance shared by the boundary operations.
pub struct BoundaryContext<'a, T: Scalar> {
    pub spacetime: &'a StationarySpacetime<T>,
    /// Completion catalog over `F⁺`.
    pub catalog: &'a CompletionCatalog<T>,
    pub window: Window,
    pub base_id: usize,
    pub tol: T,
}

impl<'a, T: Scalar> BoundaryContext<'a, T> {
    fn class_index(&self, label: &str) -> Result<usize, SpacetimeError> {
        self.catalog.index_of(label).ok_or_else(|| SpacetimeError::UnknownClass(label.to_string()))
    }

    /// `Ω − d⁺(·, z)`.
    pub fn tip_function(&self, omega: T, class: &str) -> Result<Option<SampledFunction<T>>, SpacetimeError> {
        let k = self.class_index(class)?;
        Ok(SampledFunction::from_row(self.window.clone(), self.catalog.to_class(k), -T::one(), omega, self.base_id))
    }

    /// `Ω + d⁻(·, z) = Ω + d⁺(z, ·)`.
    pub fn tif_function(&self, omega: T, class: &str) -> Result<Option<SampledFunction<T>>, SpacetimeError> {
        let k = self.class_index(class)?;
        Ok(SampledFunction::from_row(self.window.clone(), self.catalog.from_class(k), T::one(), omega, self.base_id))
    }

    pub fn cauchy_descriptor(&self, side: Side, omega: T, class: &str) -> Result<TerminalDescriptor<T>, SpacetimeError> {
        let function = match side {
            Side::Tip => self.tip_function(omega, class)?,
            Side::Tif => self.tif_function(omega, class)?,
        };
        let tag = if side == Side::Tip { "+" } else { "-" };
        Ok(TerminalDescriptor {
            label: format!("{class}{tag}"),
            side,
            kind: DescriptorKind::Cauchy { omega: to_f64(omega), class: class.to_string() },
            function,
        })
    }

    fn wrap(&self, side: Side, c: &SpeedBoundedCurve<T>) -> Result<TerminalDescriptor<T>, SpacetimeError> {
        let b = busemann_eval(c, &self.window, self.base_id, self.spacetime.plus())?;
        let kind = classify_busemann(&b, self.catalog, self.tol)?;
        let kind = match kind {
            BusemannKind::CauchyType { omega, class, .. } => DescriptorKind::Cauchy { omega, class },
            BusemannKind::ProperlyBusemann => DescriptorKind::ProperlyBusemann { id: c.label.clone() },
            BusemannKind::Infinite | BusemannKind::Unclassified => DescriptorKind::Apex,
        };
        Ok(TerminalDescriptor { label: c.label.clone(), side, kind, function: b.values })
    }
}

/// TIP `I⁻[γ]` of `γ(t) = (t, c(t))` for a forward curve `c`.
pub fn past_of_curve<T: Scalar>(c: &SpeedBoundedCurve<T>, ctx: &BoundaryContext<'_, T>) -> Result<TerminalDescriptor<T>, SpacetimeError> {
    if c.direction() != Direction::Forward {
        return Err(SpacetimeError::WrongSide(c.label.clone()));
    }
    ctx.wrap(Side::Tip, c)
}

/// TIF `I⁺[γ]` of `γ(t) = (−t, c(t))` for a backward curve `c`.
pub fn future_of_curve<T: Scalar>(c: &SpeedBoundedCurve<T>, ctx: &BoundaryContext<'_, T>) -> Result<TerminalDescriptor<T>, SpacetimeError> {
    if c.direction() != Direction::Backward {
        return Err(SpacetimeError::WrongSide(c.label.clone()));
    }
    ctx.wrap(Side::Tif, c)
}

/// Common future `↑P`: `F(d_p⁻)` for Cauchy TIPs, empty otherwise.
pub fn common_future<T: Scalar>(p: &TerminalDescriptor<T>, ctx: &BoundaryContext<'_, T>) -> Result<Option<TerminalDescriptor<T>>, SpacetimeError> {
    if p.side != Side::Tip {
        return Err(SpacetimeError::WrongSide(p.label.clone()));
    }
    match &p.kind {
        DescriptorKind::Cauchy { omega, class } => {
            let d = ctx.cauchy_descriptor(Side::Tif, lit(*omega), class)?;
            Ok(d.function.is_some().then_some(d))
        }
        _ => Ok(None),
    }
}

/// Common past `↓F`: `P(d_p⁺)` for Cauchy TIFs, empty otherwise.
pub fn common_past<T: Scalar>(f: &TerminalDescriptor<T>, ctx: &BoundaryContext<'_, T>) -> Result<Option<TerminalDescriptor<T>>, SpacetimeError> {
    if f.side != Side::Tif {
        return Err(SpacetimeError::WrongSide(f.label.clone()));
    }
    match &f.kind {
        DescriptorKind::Cauchy { omega, class } => {
            let d = ctx.cauchy_descriptor(Side::Tip, lit(*omega), class)?;
            Ok(d.function.is_some().then_some(d))
        }
        _ => Ok(None),
    }
}

fn finite<T: Scalar>(d: &TerminalDescriptor<T>) -> Result<(T, &str, &SampledFunction<T>), SpacetimeError> {
    match (&d.kind, &d.function) {
        (DescriptorKind::Cauchy { omega, class }, Some(f)) => Ok((lit(*omega), class, f)),
        _ => Err(SpacetimeError::NotFinite(d.label.clone())),
    }
}

/// S-relation between a Cauchy TIP and a Cauchy TIF. Maximality is checked
/// against the TIP and TIF classes listed in `tips` and `tifs`.
pub fn s_related<T: Scalar>(
    p: &TerminalDescriptor<T>,
    f: &TerminalDescriptor<T>,
    ctx: &BoundaryContext<'_, T>,
    tips: &[TerminalDescriptor<T>],
    tifs: &[TerminalDescriptor<T>],
) -> Result<bool, SpacetimeError> {
    if p.side != Side::Tip || f.side != Side::Tif {
        return Err(SpacetimeError::WrongSide(format!("{}/{}", p.label, f.label)));
    }
    let tol = ctx.tol;
    let (op, z, dp) = finite(p)?;
    let (of, w, df) = finite(f)?;
    let zk = ctx.class_index(z)?;
    if z == w && ctx.catalog.classes[zk].kind == ClassKind::SymmetrizedBoundary {
        return Ok((of - op).abs() <= tol);
    }
    // F ⊆ ↑P and P ⊆ ↓F.
    let up_p = ctx.tif_function(op, z)?.ok_or_else(|| SpacetimeError::NotFinite(p.label.clone()))?;
    let down_f = ctx.tip_function(of, w)?.ok_or_else(|| SpacetimeError::NotFinite(f.label.clone()))?;
    if !up_p.le(df, tol) || !dp.le(&down_f, tol) {
        return Ok(false);
    }
    // Ω⁻ − Ω⁺ = d(z, w).
    let dq = ctx.catalog.dq_between(z, w).ok_or_else(|| SpacetimeError::UnknownClass(w.to_string()))?;
    if !dq.approx_eq(&Ext::Finite(of - op), tol) {
        return Ok(false);
    }
    // F maximal inside ↑P. The smallest admissible Ω for class w' is
    // Ω⁺ + d_Q(z, w'); the window-restricted sup is only a fallback.
    for other in tifs.iter().filter_map(|d| d.class()) {
        let Some(g) = ctx.tif_function(T::zero(), other)? else { continue };
        let shift = match ctx.catalog.dq_between(z, other) {
            Some(Ext::Finite(v)) => op + v,
            _ => up_p.sup_minus(&g),
        };
        let g = g.shift(shift);
        if g.le(df, tol) && df.sup_minus(&g) > tol {
            return Ok(false);
        }
    }
    // P maximal inside ↓F, with largest admissible Ω = Ω⁻ − d_Q(z', w).
    for other in tips.iter().filter_map(|d| d.class()) {
        let Some(g) = ctx.tip_function(T::zero(), other)? else { continue };
        let shift = match ctx.catalog.dq_between(other, w) {
            Some(Ext::Finite(v)) => of - v,
            _ => down_f.inf_minus(&g),
        };
        let g = g.shift(shift);
        if dp.le(&g, tol) && g.sup_minus(dp) > tol {
            return Ok(false);
        }
    }
    Ok(true)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum LineCharacter {
    Timelike,
    Horismotic,
    LocallyHorismotic,
}

/// Line over `(P, F)`; either side may be empty.
#[derive(Clone, Debug, PartialEq)]
pub struct BoundaryLine<T> {
    pub past: Option<TerminalDescriptor<T>>,
    pub future: Option<TerminalDescriptor<T>>,
    pub character: LineCharacter,
    /// `Ω⁻ − Ω⁺` for locally horismotic lines.
    pub gap: Option<f64>,
}

impl<T: Scalar> BoundaryLine<T> {
    pub fn label(&self) -> String {
        let name = |d: &Option<TerminalDescriptor<T>>| d.as_ref().map_or("∅".to_string(), |d| d.label.clone());
        format!("({}, {})", name(&self.past), name(&self.future))
    }
}

/// Causal character of a line.
pub fn line_causality<T: Scalar>(
    past: Option<&TerminalDescriptor<T>>,
    future: Option<&TerminalDescriptor<T>>,
    ctx: &BoundaryContext<'_, T>,
) -> (LineCharacter, Option<f64>) {
    match (past, future) {
        (Some(p), Some(f)) => {
            let (op, of) = (p.omega().unwrap_or(0.0), f.omega().unwrap_or(0.0));
            let symmetric = match (p.class(), f.class()) {
                (Some(z), Some(w)) => {
                    z == w && ctx.catalog.class(z).is_some_and(|c| c.kind == ClassKind::SymmetrizedBoundary)
                }
                _ => false,
            };
            if symmetric && (of - op).abs() <= to_f64(ctx.tol) {
                (LineCharacter::Timelike, None)
            } else {
                (LineCharacter::LocallyHorismotic, Some(of - op))
            }
        }
        _ => (LineCharacter::Horismotic, None),
    }
}

/// Whether the line points at parameters `k1 < k2` are chronologically
/// related: some sample `x` has `d(w, x) + d(x, z) < Ω⁺ − Ω⁻ + (k2 − k1)`.
pub fn line_witness<T: Scalar>(line: &BoundaryLine<T>, k1: T, k2: T, ctx: &BoundaryContext<'_, T>) -> Result<Option<usize>, SpacetimeError> {
    let (Some(p), Some(f)) = (&line.past, &line.future) else { return Ok(None) };
    let (op, z, _) = finite(p)?;
    let (of, w, _) = finite(f)?;
    let to_z = ctx.catalog.to_class(ctx.class_index(z)?);
    let from_w = ctx.catalog.from_class(ctx.class_index(w)?);
    let budget = op - of + (k2 - k1);
    Ok(ctx.window.iter().copied().find(|&x| (from_w[x] + to_z[x]).lt_real(budget)))
}

#[derive(Clone, Debug, PartialEq)]
pub struct BoundaryReport<T> {
    pub tips: Vec<TerminalDescriptor<T>>,
    pub tifs: Vec<TerminalDescriptor<T>>,
    pub lines: Vec<BoundaryLine<T>>,
    /// `(tip index, tif index)` of every S-related pair.
    pub pairs: Vec<(usize, usize)>,
    pub simple: bool,
    /// Labels of apex descriptors (cone vertices `i±`).
    pub apexes: Vec<String>,
}

/// Pairs every Cauchy TIP (normalized to `Ω⁺ = 0`) with every TIF class at
/// the `Ω⁻` forced by the S-relation; all pairings are kept.
pub fn assemble_boundary<T: Scalar>(
    tips: Vec<TerminalDescriptor<T>>,
    tifs: Vec<TerminalDescriptor<T>>,
    ctx: &BoundaryContext<'_, T>,
) -> Result<BoundaryReport<T>, SpacetimeError> {
    let tips: Vec<_> = tips.into_iter().map(|d| if d.omega().is_some() { d.with_omega(0.0) } else { d }).collect();
    let mut pairs = Vec::new();
    let mut lines = Vec::new();
    let mut tif_used = vec![false; tifs.len()];
    let mut partners = vec![0usize; tips.len()];
    let mut tif_partners = vec![0usize; tifs.len()];
    let mut apexes = Vec::new();
    for (i, p) in tips.iter().enumerate() {
        if p.kind == DescriptorKind::Apex {
            apexes.push(p.label.clone());
            continue;
        }
        let Some(z) = p.class() else {
            let (character, gap) = line_causality(Some(p), None, ctx);
            lines.push(BoundaryLine { past: Some(p.clone()), future: None, character, gap });
            continue;
        };
        let mut any = false;
        for (j, f) in tifs.iter().enumerate() {
            let Some(w) = f.class() else { continue };
            let Some(Ext::Finite(dq)) = ctx.catalog.dq_between(z, w) else { continue };
            let candidate = f.with_omega(to_f64(dq));
            let candidate = match ctx.tif_function(lit(to_f64(dq)), w)? {
                Some(func) => TerminalDescriptor { function: Some(func), ..candidate },
                None => continue,
            };
            if s_related(p, &candidate, ctx, &tips, &tifs)? {
                any = true;
                tif_used[j] = true;
                partners[i] += 1;
                tif_partners[j] += 1;
                pairs.push((i, j));
                let (character, gap) = line_causality(Some(p), Some(&candidate), ctx);
                lines.push(BoundaryLine { past: Some(p.clone()), future: Some(candidate), character, gap });
            }
        }
        if !any {
            let (character, gap) = line_causality(Some(p), None, ctx);
            lines.push(BoundaryLine { past: Some(p.clone()), future: None, character, gap });
        }
    }
    for (j, f) in tifs.iter().enumerate() {
        if f.kind == DescriptorKind::Apex {
            apexes.push(f.label.clone());
            continue;
        }
        if !tif_used[j] {
            let f = if f.omega().is_some() { f.with_omega(0.0) } else { f.clone() };
            let (character, gap) = line_causality(None, Some(&f), ctx);
            lines.push(BoundaryLine { past: None, future: Some(f), character, gap });
        }
    }
    let simple = partners.iter().chain(&tif_partners).all(|&n| n <= 1);
    Ok(BoundaryReport { tips, tifs, lines, pairs, simple, apexes })
}

impl<T: Scalar> BoundaryReport<T> {
    pub fn to_json(&self) -> serde_json::Value {
        let lines: Vec<_> = self
            .lines
            .iter()
            .map(|l| {
                serde_json::json!({
                    "label": l.label(),
                    "past": l.past.as_ref().map(|d| d.to_json()),
                    "future": l.future.as_ref().map(|d| d.to_json()),
                    "character": l.character,
                    "gap": l.gap,
                })
            })
            .collect();
        let pairs: Vec<_> = self.pairs.iter().map(|&(i, j)| [self.tips[i].label.clone(), self.tifs[j].label.clone()]).collect();
        serde_json::json!({
            "tips": self.tips.iter().map(|d| d.to_json()).collect::<Vec<_>>(),
            "tifs": self.tifs.iter().map(|d| d.to_json()).collect::<Vec<_>>(),
            "pairs": pairs,
            "lines": lines,
            "simple": self.simple,
            "cone": { "apexes": self.apexes },
        })
    }

    /// Pairing graph in Graphviz DOT.
    pub fn to_dot(&self) -> String {
        let mut out = String::from("digraph pairing {\n  rankdir=LR;\n");
        for (i, p) in self.tips.iter().enumerate() {
            let _ = writeln!(out, "  tip{i} [label=\"{}\", shape=box];", p.label);
        }
        for (j, f) in self.tifs.iter().enumerate() {
            let _ = writeln!(out, "  tif{j} [label=\"{}\", shape=ellipse];", f.label);
        }
        for &(i, j) in &self.pairs {
            let _ = writeln!(out, "  tip{i} -> tif{j};");
        }
        out.push_str("}\n");
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::{FieldsSpec, Interval};
    use crate::metric::Chart;
    use crate::randers::MetricForm;

    fn flat(wx: &str) -> StationarySpacetime<f64> {
        let spec = SpaceSpec::grid(
            2,
            Chart::Cartesian,
            vec![Interval::closed(-2.0, 2.0), Interval::closed(-2.0, 2.0)],
            vec![0.5],
            FieldsSpec { form: MetricForm::Fermat, g0: vec!["1".into(), "0".into(), "1".into()], omega: vec![wx.into(), "0".into()] },
        );
        fermat_graphs_from_spec(&spec).unwrap()
    }

    #[test]
    fn flat_chronology() {
        let s = flat("0");
        let o = s.plus().nearest([0.0, 0.0]);
        let e = s.plus().nearest([1.0, 0.0]);
        assert!(chron_rel(Event::new(0.0, o), Event::new(2.0, e), &s));
        assert!(!chron_rel(Event::new(0.0, o), Event::new(1.0, e), &s));
        assert_eq!(s.d_plus(o, e), s.d_minus(o, e));
    }

    #[test]
    fn constant_wind_chronology() {
        // F± = sqrt(1 + ω²) ± ω with sqrt(1 + 0.5625) = 1.25 for ω = 0.75.
        let s = flat("0.75");
        let o = s.plus().nearest([0.0, 0.0]);
        let e = s.plus().nearest([1.0, 0.0]);
        assert!((s.d_plus(o, e).to_f64() - 2.0).abs() < 1e-12);
        assert!((s.d_minus(o, e).to_f64() - 0.5).abs() < 1e-12);
        assert!(!chron_rel(Event::new(0.0, o), Event::new(1.2, e), &s));
        assert!(chron_rel(Event::new(0.0, e), Event::new(1.2, o), &s));
        for u in 0..s.len() {
            for (v, w) in s.plus().out_edges(u) {
                assert_eq!(s.minus().edge_weight(v, u), Some(w));
            }
        }
    }

    #[test]
    fn past_set_membership() {
        let s = flat("0.3");
        let x0 = s.plus().nearest([0.0, 0.0]);
        let w: Window = (0..s.len()).collect::<Vec<_>>().into();
        let f = SampledFunction::from_row(w.clone(), &s.plus().row_to(x0), -1.0, 0.0, x0).unwrap();
        assert!(past_membership(Some(&f), Event::new(-0.1, x0), &s, 1e-9).unwrap());
        assert!(!past_membership(Some(&f), Event::new(0.0, x0), &s, 1e-9).unwrap());
        assert!(past_membership(None, Event::new(1e9, x0), &s, 1e-9).unwrap());
        let steep = f.map(|v| 3.0 * v);
        assert!(matches!(past_membership(Some(&steep), Event::new(0.0, x0), &s, 1e-9), Err(SpacetimeError::NotLipschitz { .. })));
    }
}
