//! End-to-end runs over the example spaces, each reduced to named verdicts.

use crate::builders::{build_example, Example, ExampleError, ExampleParams};
use crate::busemann::{busemann_eval, classify_busemann, dp_function, BusemannError, BusemannKind, Direction, DpTarget};
use crate::chrono::{chr_limits, CatalogEntry, ChronoError, EntryKind, FunctionCatalog};
use crate::completion::{
    double_limit, evenly_pairing_check, extract_cauchy_subsequence, is_alternative_cauchy, is_forward_cauchy, ClassKind,
    CompletionError, PairingVerdict, PointSequence, TruncationObservation,
};
use crate::function::SampledFunction;
use crate::gromov::{distance_class, gromov_classify, normalize_at, pointwise_limit, GromovKind, NormalizedClass, PointwiseLimit};
use crate::metric::DistanceOracle;
use crate::spacetime::{assemble_boundary, fermat_graphs, future_of_curve, past_of_curve, BoundaryContext, BoundaryReport, LineCharacter, SpacetimeError, TerminalDescriptor};
use serde::Serialize;
use serde_json::json;
use std::f64::consts::PI;
use thiserror::Error;

pub const SCENARIO_IDS: &[&str] = &["ex-3.8", "ex-3.22", "fig-1", "fig-2", "comb", "comb-ext", "fig-6", "fig-7a", "fig-7b", "fig-8", "flat-static"];

#[derive(Debug, Error)]
pub enum ScenarioError {
    #[error("unknown scenario `{0}`")]
    Unknown(String),
    #[error(transparent)]
    Example(#[from] ExampleError),
    #[error(transparent)]
    Completion(#[from] CompletionError),
    #[error(transparent)]
    Busemann(#[from] BusemannError),
    #[error(transparent)]
    Chrono(#[from] ChronoError),
    #[error(transparent)]
    Spacetime(#[from] SpacetimeError),
    #[error("{0}")]
    Pipeline(String),
}

#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(untagged)]
pub enum VerdictValue {
    Bool(bool),
    Real(f64),
}

/// One named outcome, tagged with the example feature it checks.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Verdict {
    pub name: String,
    pub location: String,
    pub value: VerdictValue,
    pub pass: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ScenarioResult {
    pub id: String,
    pub verdicts: Vec<Verdict>,
    pub artifacts: Vec<String>,
    /// Supporting numbers (distances, pairings, diagnostics).
    pub details: serde_json::Value,
}

impl ScenarioResult {
    fn new(id: &str) -> Self {
        ScenarioResult { id: id.to_string(), verdicts: vec![], artifacts: vec![], details: json!({}) }
    }

    fn flag(&mut self, name: &str, location: &str, value: bool, expected: bool) {
        self.verdicts.push(Verdict { name: name.into(), location: location.into(), value: VerdictValue::Bool(value), pass: value == expected });
    }

    fn real(&mut self, name: &str, location: &str, value: f64, pass: bool) {
        self.verdicts.push(Verdict { name: name.into(), location: location.into(), value: VerdictValue::Real(value), pass });
    }

    fn detail(&mut self, key: &str, value: serde_json::Value) {
        self.details[key] = value;
    }

    pub fn passed(&self) -> bool {
        !self.verdicts.is_empty() && self.verdicts.iter().all(|v| v.pass)
    }

    pub fn verdict(&self, name: &str) -> Option<&Verdict> {
        self.verdicts.iter().find(|v| v.name == name)
    }

    pub fn to_json(&self) -> serde_json::Value {
        serde_json::to_value(self).expect("result serializes")
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from("scenario,verdict,location,value,pass\n");
        for v in &self.verdicts {
            let value = match v.value {
                VerdictValue::Bool(b) => b.to_string(),
                VerdictValue::Real(r) => format!("{r}"),
            };
            out.push_str(&format!("{},{},\"{}\",{},{}\n", self.id, v.name, v.location, value, v.pass));
        }
        out
    }
}

/// Overrides shared by all scenarios; `None` keeps each scenario's default.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct ScenarioOptions {
    pub truncation: Option<f64>,
    pub resolution: Option<f64>,
    pub tol: Option<f64>,
}

impl ScenarioOptions {
    fn params(&self) -> ExampleParams {
        ExampleParams { truncation: self.truncation, resolution: self.resolution, ..Default::default() }
    }

    fn tol(&self, e: &Example<f64>) -> f64 {
        self.tol.unwrap_or(e.annotations.tol)
    }

    fn truncations(&self, default: &[f64]) -> Vec<f64> {
        match self.truncation {
            Some(t) => vec![t, 2.0 * t, 4.0 * t],
            None => default.to_vec(),
        }
    }
}

pub fn run_scenario(id: &str, opts: &ScenarioOptions) -> Result<ScenarioResult, ScenarioError> {
    match id {
        "ex-3.8" => halfline(opts),
        "ex-3.22" => punctured_disk(opts),
        "fig-1" => staircase(opts),
        "fig-2" => cylinder(opts),
        "comb" => comb(opts, false),
        "comb-ext" => comb(opts, true),
        "fig-6" => ladder(opts),
        "fig-7a" => chimney_single(opts),
        "fig-7b" => chimney_double(opts),
        "fig-8" => double_cylinder(opts),
        "flat-static" => flat_static(opts),
        other => Err(ScenarioError::Unknown(other.into())),
    }
}

/// Normalized `−d(·, x_n)` over the example window.
pub fn distance_classes(e: &Example<f64>, seq: &PointSequence) -> Result<Vec<NormalizedClass<f64>>, ScenarioError> {
    let w = e.window();
    seq.ids
        .iter()
        .map(|&i| distance_class(&w, &e.space.row_to(i), e.base()).ok_or_else(|| ScenarioError::Pipeline(format!("sample {i} unreachable from the window"))))
        .collect()
}

fn halfline(opts: &ScenarioOptions) -> Result<ScenarioResult, ScenarioError> {
    let mut r = ScenarioResult::new("ex-3.8");
    let e: Example<f64> = build_example("halfline_r2", &opts.params())?;
    let mut cfg = e.config();
    cfg.tol = opts.tol(&e);
    let x = e.sequence("x")?;
    let gaps: Vec<f64> = x.ids.chunks(2).filter(|c| c.len() == 2).map(|c| e.space.distance(c[0], c[1]).to_f64()).collect();
    let min_gap = gaps.iter().copied().fold(f64::INFINITY, f64::min);
    let loc = "half line, alternating sequence n + (-1)^(n+1)";
    r.real("min_pair_distance", loc, min_gap, min_gap >= 1.95);
    let v = is_alternative_cauchy(&x, &e.space, &cfg.schedule)?;
    r.flag("forward_cauchy", loc, v.forward, false);
    r.flag("alt_cauchy", loc, v.alternative_forward, true);
    let extraction = extract_cauchy_subsequence(&x, &e.space, &cfg);
    r.flag("extraction_ok", loc, extraction.is_ok(), true);
    r.detail("pair_distances", json!(gaps));
    r.detail("verdict", json!(v));
    if let Ok(sub) = extraction {
        r.detail("subsequence", json!(sub.ids));
    }
    Ok(r)
}

fn punctured_disk(opts: &ScenarioOptions) -> Result<ScenarioResult, ScenarioError> {
    let mut r = ScenarioResult::new("ex-3.22");
    let e: Example<f64> = build_example("punctured_disk", &opts.params())?;
    let tol = opts.tol(&e);
    let (x, xp) = (e.sequence("x")?, e.sequence("xp")?);
    let fwd = double_limit(&x, &xp, &e.space, tol);
    let bwd = double_limit(&xp, &x, &e.space, tol);
    let loc = "punctured disk, radial sequences at angles 0 and pi/2";
    r.real("forward_dl", loc, fwd.value, fwd.value < 0.05);
    r.real("backward_dl", loc, bwd.value, bwd.value >= PI / 4.0 - 0.05);
    r.detail("forward", json!(fwd));
    r.detail("backward", json!(bwd));
    Ok(r)
}

fn staircase(opts: &ScenarioOptions) -> Result<ScenarioResult, ScenarioError> {
    let mut r = ScenarioResult::new("fig-1");
    let mut rows = Vec::new();
    let mut d21 = Vec::new();
    let loc = "quadrant with rotating wind, rays c1 and c2";
    for t in opts.truncations(&[20.0, 40.0, 80.0]) {
        let e: Example<f64> = build_example("staircase_fig1", &ExampleParams { truncation: Some(t), ..opts.params() })?;
        let mut cfg = e.config();
        cfg.tol = opts.tol(&e);
        let cat = e.catalog(&cfg)?;
        let a = cat.dq_between("z1", "z2").map_or(f64::INFINITY, |v| v.to_f64());
        let b = cat.dq_between("z2", "z1").map_or(f64::INFINITY, |v| v.to_f64());
        r.real(&format!("dq_z1_z2_T{t}"), loc, a, a < 0.1);
        r.real(&format!("dq_z2_z1_T{t}"), loc, b, b > t / 4.0);
        d21.push((t, b));
        rows.push(json!({"T": t, "dq_z1_z2": a, "dq_z2_z1": b}));
    }
    let increasing = d21.windows(2).all(|w| w[1].1 > w[0].1);
    r.flag("dq_z2_z1_increasing", loc, increasing, true);
    r.detail("truncations", json!(rows));
    Ok(r)
}

fn cylinder(opts: &ScenarioOptions) -> Result<ScenarioResult, ScenarioError> {
    let mut r = ScenarioResult::new("fig-2");
    let loc = "glued strip with opposite wind regions";
    for variant in ["default", "one_region"] {
        let mut examples = Vec::new();
        for t in opts.truncations(&[20.0, 40.0, 80.0]) {
            let p = ExampleParams { truncation: Some(t), variant: Some(variant.into()), ..opts.params() };
            examples.push(build_example::<f64>("cylinder_fig2", &p)?);
        }
        let mut catalogs = Vec::new();
        for e in &examples {
            let mut cfg = e.config();
            cfg.tol = opts.tol(e);
            catalogs.push(e.catalog(&cfg)?);
        }
        let obs: Vec<TruncationObservation<'_, f64>> = examples
            .iter()
            .zip(&catalogs)
            .map(|(e, c)| TruncationObservation { truncation: e.annotations.truncation, oracle: &e.space, catalog: c, probe: e.annotations.base })
            .collect();
        let report = evenly_pairing_check(&obs)?;
        let cat = &catalogs[0];
        if variant == "default" {
            let kind = |l: &str| cat.class(l).map(|c| c.kind);
            r.flag("z_plus_forward_only", loc, kind("z+") == Some(ClassKind::ForwardBoundary), true);
            r.flag("z_minus_backward_only", loc, kind("z-") == Some(ClassKind::BackwardBoundary), true);
            r.flag("symmetrized_empty", loc, cat.symmetrized_boundary().is_empty(), true);
            let zp = report.classes.iter().find(|c| c.label == "z+");
            r.flag("dq_z_plus_x_stable", loc, zp.is_some_and(|c| c.verdict == PairingVerdict::NotEvenlyPairing), true);
            r.flag("evenly_pairing", loc, report.evenly_pairing, false);
        } else {
            r.flag("one_region_evenly_pairing", &format!("{loc}, single region"), report.evenly_pairing, true);
        }
        r.detail(variant, json!(report));
    }
    Ok(r)
}

fn comb(opts: &ScenarioOptions, extended: bool) -> Result<ScenarioResult, ScenarioError> {
    let id = if extended { "comb-ext" } else { "comb" };
    let name = if extended { "comb_extended" } else { "comb_basic" };
    let mut r = ScenarioResult::new(id);
    let e: Example<f64> = build_example(name, &opts.params())?;
    let mut cfg = e.config();
    cfg.tol = opts.tol(&e);
    let cat = e.catalog(&cfg)?;
    let x = e.sequence("x")?;
    let fs = distance_classes(&e, &x)?;
    let loc = if extended { "comb with both spines, sequence (1/n, 1/2)" } else { "comb, sequence (1/n, 1/2)" };
    let limit = match pointwise_limit(&fs, cfg.tol) {
        PointwiseLimit::Converges(l) => l,
        other => {
            r.flag("pointwise_converges", loc, false, true);
            r.detail("limit", json!(format!("{:?}", matches!(other, PointwiseLimit::Diverges(_)))));
            return Ok(r);
        }
    };
    r.flag("pointwise_converges", loc, true, true);
    let h = e.annotations.resolution;
    // Closed-form distances on the comb: d((x, y), (0, 0)) = x + y, and on
    // the extended comb d((x, y), (0, 1)) = x + 1 − y.
    let w = e.window();
    let oracle: Vec<f64> = w
        .iter()
        .map(|&i| {
            let [cx, cy] = e.space.coords(i);
            if extended {
                -(cx + cy.min(1.0 - cy))
            } else {
                -(cx + cy)
            }
        })
        .collect();
    let oracle = normalize_at(&SampledFunction::new(w.clone(), oracle, e.base()), e.base());
    let err = oracle.distance(&limit);
    r.real("limit_sup_error", loc, err, err <= 3.0 * h);
    let g = gromov_classify(&limit, &cat, &x, &e.space, cfg.tol);
    if extended {
        r.flag("residual", loc, g.kind == GromovKind::CauchyGromov { class: None }, true);
    } else {
        r.flag("matches_z00", loc, g.kind == GromovKind::CauchyGromov { class: Some("z00".into()) }, true);
    }
    r.detail("gromov", json!(g));
    Ok(r)
}

/// Finite Busemann functions of the named curves plus the interior point
/// functions of the example.
pub fn busemann_catalog(e: &Example<f64>, curves: &[&str], tol: f64) -> Result<FunctionCatalog<f64>, ScenarioError> {
    let w = e.window();
    let mut cat = FunctionCatalog::new();
    for &c in curves {
        let b = busemann_eval(&e.curve(c)?, &w, e.base(), &e.space)?;
        if b.is_finite() {
            cat.push_busemann(c, &b, tol)?;
        }
    }
    for &p in &e.annotations.interior {
        let f = dp_function(0.0, DpTarget::Point(p), &e.space, None, true, &w, e.base())
            .ok_or_else(|| ScenarioError::Pipeline(format!("interior sample {p} unreachable")))?;
        cat.push(CatalogEntry { label: format!("p{p}"), kind: EntryKind::Interior(p), function: f }, tol)?;
    }
    Ok(cat)
}

fn ladder(opts: &ScenarioOptions) -> Result<ScenarioResult, ScenarioError> {
    let mut r = ScenarioResult::new("fig-6");
    let e: Example<f64> = build_example("ladder_fig6", &opts.params())?;
    let tol = opts.tol(&e);
    let cat = busemann_catalog(&e, &["c1", "c2"], tol)?;
    let x = e.sequence("x")?;
    let fs = distance_classes(&e, &x)?;
    let funcs: Vec<SampledFunction<f64>> = fs.iter().map(|f| f.function().clone()).collect();
    let res = chr_limits(&funcs, &cat, tol)?;
    let loc = "ladder, rung midpoints (n, 1/2)";
    r.real("chr_members", loc, res.members.len() as f64, res.members.len() == 2);
    r.flag("hausdorff_witness", loc, res.hausdorff_witness, true);
    let single = matches!(pointwise_limit(&fs, tol), PointwiseLimit::Converges(_));
    r.flag("gromov_single_limit", loc, single, true);
    r.detail("chr", json!({"members": res.members, "diagnostics": res.diagnostics}));
    Ok(r)
}

fn chimney_single(opts: &ScenarioOptions) -> Result<ScenarioResult, ScenarioError> {
    let mut r = ScenarioResult::new("fig-7a");
    let e: Example<f64> = build_example("chimney1", &opts.params())?;
    let tol = opts.tol(&e);
    let curves: Vec<String> = e.annotations.curves.keys().cloned().collect();
    let names: Vec<&str> = curves.iter().map(String::as_str).collect();
    let cat = busemann_catalog(&e, &names, tol)?;
    let x = e.sequence("c3")?;
    let fs = distance_classes(&e, &x)?;
    let funcs: Vec<SampledFunction<f64>> = fs.iter().map(|f| f.function().clone()).collect();
    let res = chr_limits(&funcs, &cat, tol)?;
    let loc = "single chimney, vertical sequence at x = 3";
    r.real("chr_members", loc, res.members.len() as f64, res.members.len() == 1);
    r.flag("hausdorff_witness", loc, res.hausdorff_witness, false);
    r.detail("chr", json!({"members": res.members, "diagnostics": res.diagnostics}));
    Ok(r)
}

fn chimney_double(opts: &ScenarioOptions) -> Result<ScenarioResult, ScenarioError> {
    let mut r = ScenarioResult::new("fig-7b");
    let e: Example<f64> = build_example("chimney2", &opts.params())?;
    let tol = opts.tol(&e);
    let mut cfg = e.config();
    cfg.tol = tol;
    let cat = e.catalog(&cfg)?;
    let w = e.window();
    let loc = "two chimneys, vertical curves c_a";
    let mut limits = Vec::new();
    let mut finite_classes = Vec::new();
    let mut kinds = serde_json::Map::new();
    for a in [-3, -1, 0, 1, 3] {
        let label = format!("c{a}");
        let fs = distance_classes(&e, &e.sequence(&label)?)?;
        match pointwise_limit(&fs, tol) {
            PointwiseLimit::Converges(l) => limits.push(l),
            _ => r.flag(&format!("limit_{label}"), loc, false, true),
        }
        let b = busemann_eval(&e.curve(&label)?, &w, e.base(), &e.space)?;
        let kind = classify_busemann(&b, &cat, tol)?;
        if let BusemannKind::CauchyType { class, .. } = &kind {
            if !finite_classes.contains(class) {
                finite_classes.push(class.clone());
            }
        }
        kinds.insert(label, json!(kind));
    }
    let mut min_gap = f64::INFINITY;
    for i in 0..limits.len() {
        for j in 0..i {
            min_gap = min_gap.min(limits[i].distance(&limits[j]));
        }
    }
    r.real("gromov_min_separation", loc, min_gap, limits.len() == 5 && min_gap > 5.0 * tol);
    finite_classes.sort();
    r.real("busemann_finite_classes", loc, finite_classes.len() as f64, finite_classes == ["z-3", "z3"]);
    r.detail("busemann", serde_json::Value::Object(kinds));
    Ok(r)
}

/// Tips from forward curves and tifs from backward curves of an example.
fn terminal_sets(e: &Example<f64>, ctx: &BoundaryContext<'_, f64>, skip: &[&str]) -> Result<(Vec<TerminalDescriptor<f64>>, Vec<TerminalDescriptor<f64>>), ScenarioError> {
    let mut tips = Vec::new();
    let mut tifs = Vec::new();
    for (name, c) in &e.annotations.curves {
        if skip.contains(&name.as_str()) {
            continue;
        }
        let curve = e.curve(name)?;
        match c.direction {
            Direction::Forward => tips.push(past_of_curve(&curve, ctx)?),
            Direction::Backward => tifs.push(future_of_curve(&curve, ctx)?),
        }
    }
    Ok((tips, tifs))
}

/// Boundary of the standard stationary spacetime whose `F⁺` is the example.
pub fn example_boundary(e: &Example<f64>, tol: f64, skip: &[&str]) -> Result<BoundaryReport<f64>, ScenarioError> {
    let mut cfg = e.config();
    cfg.tol = tol;
    let cat = e.catalog(&cfg)?;
    let st = fermat_graphs(e.space.clone());
    let ctx = BoundaryContext { spacetime: &st, catalog: &cat, window: e.window(), base_id: e.base(), tol };
    let (tips, tifs) = terminal_sets(e, &ctx, skip)?;
    Ok(assemble_boundary(tips, tifs, &ctx)?)
}

fn double_cylinder(opts: &ScenarioOptions) -> Result<ScenarioResult, ScenarioError> {
    let mut r = ScenarioResult::new("fig-8");
    let e: Example<f64> = build_example("double_fig2", &opts.params())?;
    let tol = opts.tol(&e);
    let report = example_boundary(&e, tol, &["c0"])?;
    let loc = "two glued strips, forward and backward regions";
    let mut cross: Vec<(String, String)> = report.pairs.iter().map(|&(i, j)| (report.tips[i].label.clone(), report.tifs[j].label.clone())).collect();
    cross.sort();
    let expected: Vec<(String, String)> =
        [("z1+", "z1-"), ("z1+", "z2-"), ("z2+", "z1-"), ("z2+", "z2-")].iter().map(|(a, b)| (a.to_string(), b.to_string())).collect();
    r.real("pairings", loc, cross.len() as f64, cross == expected);
    r.flag("simple", loc, report.simple, false);
    // Measured d⁺ between the curve ends standing for z_i⁺ and z_j⁻.
    let end = |name: &str| -> Result<usize, ScenarioError> {
        e.annotations.curves.get(name).and_then(|c| c.ids.last().copied()).ok_or_else(|| ScenarioError::Pipeline(format!("missing curve {name}")))
    };
    let mut worst = 0.0f64;
    let mut all_local = true;
    for line in report.lines.iter().filter(|l| l.past.is_some() && l.future.is_some()) {
        let (p, f) = (line.past.as_ref().expect("past"), line.future.as_ref().expect("future"));
        all_local &= line.character == LineCharacter::LocallyHorismotic;
        let d = e.space.distance(end(&p.label)?, end(&f.label)?).to_f64();
        let gap = line.gap.unwrap_or(f64::NAN);
        worst = worst.max(((gap - d) / d).abs());
    }
    r.flag("locally_horismotic", loc, all_local, true);
    r.real("gap_relative_error", loc, worst, worst <= 0.1);
    r.detail("boundary", report.to_json());

    let s: Example<f64> = build_example("double_fig2", &ExampleParams { variant: Some("static".into()), ..opts.params() })?;
    let report = example_boundary(&s, opts.tol(&s), &["c0"])?;
    let loc = "static analog with four chimneys";
    r.flag("static_simple", loc, report.simple, true);
    let timelike = report.lines.iter().filter(|l| l.character == LineCharacter::Timelike).count();
    r.real("static_timelike_lines", loc, timelike as f64, timelike == 4 && report.lines.len() == 4);
    r.detail("static_boundary", report.to_json());
    Ok(r)
}

fn flat_static(opts: &ScenarioOptions) -> Result<ScenarioResult, ScenarioError> {
    let mut r = ScenarioResult::new("flat-static");
    let e: Example<f64> = build_example("punctured_square", &opts.params())?;
    let tol = opts.tol(&e);
    let loc = "flat static square with one removed point";
    let st = fermat_graphs(e.space.clone());
    let symmetric_edges = st.plus().edges().all(|(u, v, w)| st.minus().edge_weight(u, v) == Some(w));
    let report = example_boundary(&e, tol, &[])?;
    // With symmetric d the past of a class is the negated future, up to the
    // additive constant fixed at the base sample.
    let mirrored = report.tips.len() == report.tifs.len()
        && report.tips.iter().all(|p| {
            report.tifs.iter().any(|f| {
                f.class() == p.class()
                    && match (&p.function, &f.function) {
                        (Some(a), Some(b)) => a.shift(-a.at_base()).sup_distance(&b.map(|v| b.at_base() - v)) <= tol,
                        (None, None) => true,
                        _ => false,
                    }
            })
        });
    r.flag("cone_static_symmetric", loc, symmetric_edges && mirrored, true);
    let all_timelike = !report.lines.is_empty() && report.lines.iter().all(|l| l.character == LineCharacter::Timelike);
    r.flag("lines_timelike", loc, all_timelike, true);
    r.flag("simple", loc, report.simple, true);
    let class_ok = e.catalog(&e.config())?.classes.iter().all(|c| c.kind == ClassKind::SymmetrizedBoundary);
    r.flag("cauchy_boundary_symmetrized", loc, class_ok, true);
    r.detail("boundary", report.to_json());
    Ok(r)
}

/// Forward-Cauchy flag of a sequence under `d`.
pub fn forward_cauchy(seq: &PointSequence, d: &dyn DistanceOracle<f64>, schedule: &[f64]) -> Result<bool, ScenarioError> {
    Ok(is_forward_cauchy(seq, d, schedule)?.forward)
}
