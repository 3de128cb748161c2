//! Acceptance run: one line per criterion, nonzero exit on any failure.

use finsler_completion::builders::{build_example, Example, ExampleParams, EXAMPLE_NAMES};
use finsler_completion::busemann::{busemann_eval, dp_function, dp_strict_order, monotonicity_check, pointwise_strictly_below, DpTarget};
use finsler_completion::chrono::chr_limits;
use finsler_completion::completion::{extract_cauchy_subsequence, is_alternative_cauchy, is_forward_cauchy};
use finsler_completion::extended::Ext;
use finsler_completion::function::{SampledFunction, Window};
use finsler_completion::graph::{build_from_spec, build_graph, FieldsSpec, Interval, SpaceSpec};
use finsler_completion::gromov::is_lipschitz1;
use finsler_completion::metric::{Chart, DistanceOracle, Reversed};
use finsler_completion::randers::MetricForm;
use finsler_completion::scenarios::{distance_classes, run_scenario, ScenarioOptions, ScenarioResult};
use finsler_completion::spacetime::{chron_rel, fermat_graphs, Event};
use finsler_completion::Space;
use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};
use std::process::ExitCode;
use std::time::{Duration, Instant};

type Outcome = Result<(bool, String), String>;

fn scenario(id: &str, budget: Option<Duration>) -> Outcome {
    let start = Instant::now();
    let r: ScenarioResult = run_scenario(id, &ScenarioOptions::default()).map_err(|e| e.to_string())?;
    let elapsed = start.elapsed();
    let failed: Vec<&str> = r.verdicts.iter().filter(|v| !v.pass).map(|v| v.name.as_str()).collect();
    let in_time = budget.is_none_or(|b| elapsed <= b);
    let detail = format!(
        "{} verdicts, failed [{}], {:.2}s{}",
        r.verdicts.len(),
        failed.join(", "),
        elapsed.as_secs_f64(),
        budget.map_or(String::new(), |b| format!(" (budget {}s)", b.as_secs()))
    );
    Ok((r.passed() && in_time, detail))
}

const FLAT_SIDE: f64 = 10.0;
const FLAT_STEP: f64 = 0.25;
const FLAT_RADIUS: usize = 3;

/// Flat square with `F(v) = |v| + ⟨w, v⟩`, so both cones have closed forms.
fn flat_space(w: [f64; 2]) -> Space {
    let fields = FieldsSpec { form: MetricForm::Standard, g0: vec!["1".into(), "0".into(), "1".into()], omega: vec![w[0].to_string(), w[1].to_string()] };
    let mut spec = SpaceSpec::grid(2, Chart::Cartesian, vec![Interval::closed(0.0, FLAT_SIDE); 2], vec![FLAT_STEP], fields);
    spec.stencil_radius = FLAT_RADIUS;
    build_from_spec(&spec).expect("flat space builds")
}

fn closed_form(w: [f64; 2], a: [f64; 2], b: [f64; 2], sign: f64) -> f64 {
    let v = [b[0] - a[0], b[1] - a[1]];
    v[0].hypot(v[1]) + sign * (w[0] * v[0] + w[1] * v[1])
}

/// Relative excess of the stencil over the norm: the widest angular gap of
/// the primitive offsets, inflated by the wind anisotropy.
fn stencil_margin(w: [f64; 2]) -> f64 {
    let r = FLAT_RADIUS as f64;
    let gap = (1.0 / r).atan();
    let wn = w[0].hypot(w[1]);
    (1.0 / (gap / 2.0).cos() - 1.0) * (1.0 + wn) / (1.0 - wn)
}

fn chronology_oracle() -> Outcome {
    let mut rng = StdRng::seed_from_u64(8);
    let mut report = Vec::new();
    let mut ok = true;
    for w in [[0.0, 0.0], [0.3, -0.2]] {
        let space = flat_space(w);
        let st = fermat_graphs(space);
        let n = st.len();
        let sources: Vec<usize> = (0..100).map(|_| rng.gen_range(0..n)).collect();
        let margin = stencil_margin(w);
        let (mut total, mut disagree, mut outside) = (0usize, 0usize, 0usize);
        for _ in 0..10_000 {
            let x = sources[rng.gen_range(0..sources.len())];
            let y = rng.gen_range(0..n);
            let (px, py) = (st.plus().coords(x), st.plus().coords(y));
            // Future and past cones through the same pair of samples.
            let future = rng.gen_bool(0.5);
            let sign = if future { 1.0 } else { -1.0 };
            let f = closed_form(w, px, py, sign);
            let dt = f * rng.gen_range(0.0..2.0) + rng.gen_range(0.0..FLAT_STEP);
            let graph = if future {
                chron_rel(Event::new(0.0, x), Event::new(dt, y), &st)
            } else {
                st.d_minus(x, y).lt_real(dt)
            };
            let closed = f < dt;
            total += 1;
            if graph != closed {
                disagree += 1;
                if (dt - f).abs() > margin * f + 1e-9 {
                    outside += 1;
                }
            }
        }
        let rate = disagree as f64 / total as f64;
        ok &= rate <= 0.005 && outside == 0;
        report.push(format!("w={w:?}: {disagree}/{total} disagree ({:.3}%), {outside} outside margin {:.2}%", 100.0 * rate, 100.0 * margin));
    }
    Ok((ok, report.join("; ")))
}

fn strict_order_oracle() -> Outcome {
    let mut rng = StdRng::seed_from_u64(9);
    let mut report = Vec::new();
    let mut ok = true;
    let mut spaces: Vec<(String, Space, f64)> = vec![
        ("flat".into(), flat_space([0.0, 0.0]), 1e-6),
        ("constant wind".into(), flat_space([0.3, -0.2]), 1e-6),
    ];
    let e: Example<f64> = build_example("staircase_fig1", &ExampleParams::default()).map_err(|e| e.to_string())?;
    spaces.push(("rotating wind".into(), e.space, 1e-6));
    for (name, space, band) in &spaces {
        let n = space.len();
        let window: Window = (0..n).collect::<Vec<_>>().into();
        let (mut agree, mut compared, mut skipped) = (0usize, 0usize, 0usize);
        for _ in 0..500 {
            let (x1, x2) = (rng.gen_range(0..n), rng.gen_range(0..n));
            let t1 = rng.gen_range(0.0..5.0);
            let d12 = space.distance(x1, x2).to_f64();
            let t2 = t1 + if d12.is_finite() { d12 * rng.gen_range(0.0..2.0) } else { 5.0 };
            if (d12 - (t2 - t1)).abs() < *band {
                skipped += 1;
                continue;
            }
            let f1 = dp_function(t1, DpTarget::Point(x1), space, None, true, &window, 0);
            let f2 = dp_function(t2, DpTarget::Point(x2), space, None, true, &window, 0);
            let exhaustive = match (f1, f2) {
                (Some(a), Some(b)) => pointwise_strictly_below(&a, &b),
                _ => false,
            };
            compared += 1;
            agree += usize::from(exhaustive == dp_strict_order((t1, x1), (t2, x2), space));
        }
        ok &= agree == compared;
        report.push(format!("{name}: {agree}/{compared} agree, {skipped} in band"));
    }
    Ok((ok, report.join("; ")))
}

fn examples() -> Result<Vec<Example<f64>>, String> {
    EXAMPLE_NAMES.iter().map(|n| build_example::<f64>(n, &ExampleParams::default()).map_err(|e| format!("{n}: {e}"))).collect()
}

fn rows_match(a: &[Ext<f64>], b: &[Ext<f64>]) -> bool {
    a.iter().zip(b).all(|(x, y)| match (x, y) {
        (Ext::Finite(p), Ext::Finite(q)) => (p - q).abs() <= 1e-9 * p.abs().max(1.0),
        (Ext::Infinite, Ext::Infinite) => true,
        _ => false,
    })
}

fn property_suites() -> Outcome {
    let all = examples()?;
    let mut failures = Vec::new();
    let mut counts = [0usize; 6];
    let mut rng = StdRng::seed_from_u64(11);
    for e in &all {
        let tol = e.annotations.tol;
        let h = e.annotations.resolution;
        let w = e.window();

        // Quasi-distance triangle inequality over all catalog triples.
        let cat = e.catalog(&e.config()).map_err(|err| format!("{}: {err}", e.name))?;
        let m = cat.dq.len();
        let slack = Ext::Finite(3.0 * tol);
        for i in 0..m {
            for j in 0..m {
                for k in 0..m {
                    counts[0] += 1;
                    if cat.dq.get(i, k) > cat.dq.get(i, j) + cat.dq.get(j, k) + slack {
                        failures.push(format!("{}: d_Q triangle ({i},{j},{k})", e.name));
                    }
                }
            }
        }

        // Busemann monotonicity and 1-Lipschitz finite Busemann functions.
        let probes: Vec<usize> = std::iter::once(e.base()).chain((0..4).map(|_| w[rng.gen_range(0..w.len())])).collect();
        for name in e.annotations.curves.keys() {
            let c = e.curve(name).map_err(|err| err.to_string())?;
            for &x in &probes {
                counts[1] += 1;
                let v = monotonicity_check(&c, x, &e.space);
                if v > 2.0 * h {
                    failures.push(format!("{}: monotonicity {name} at {x}: {v:.3}", e.name));
                }
            }
            let b = busemann_eval(&c, &w, e.base(), &e.space).map_err(|err| err.to_string())?;
            if let Some(f) = &b.values {
                counts[2] += 1;
                let audit = is_lipschitz1(f, &e.space, 1e-9);
                if !audit.ok {
                    failures.push(format!("{}: Busemann {name} not 1-Lipschitz ({:.2e})", e.name, audit.worst_excess));
                }
            }
        }

        // Reversal and wind negation dualities.
        let spec = e.space.spec().clone();
        let dual: Option<Space> = if spec.fields.is_some() {
            let neg = spec.metric().map_err(|err| err.to_string())?.negated();
            Some(build_graph(&spec, &neg).map_err(|err| err.to_string())?)
        } else {
            None
        };
        let back = Reversed(&e.space);
        for _ in 0..3 {
            let s = rng.gen_range(0..e.space.len());
            counts[3] += 1;
            let to = e.space.row_to(s);
            let mut ok = rows_match(&back.row_from(s), &to);
            if let Some(d) = &dual {
                ok &= rows_match(&d.row_from(s), &to);
            }
            if !ok {
                failures.push(format!("{}: duality at source {s}", e.name));
            }
        }

        // Extraction postconditions on every annotated sequence.
        let cfg = e.config();
        for name in e.annotations.sequences.keys() {
            let seq = e.sequence(name).map_err(|err| err.to_string())?;
            let v = is_alternative_cauchy(&seq, &e.space, &cfg.schedule).map_err(|err| err.to_string())?;
            if !v.alternative_forward {
                continue;
            }
            counts[4] += 1;
            match extract_cauchy_subsequence(&seq, &e.space, &cfg) {
                Ok(sub) if is_forward_cauchy(&sub, &e.space, &cfg.schedule).map_err(|err| err.to_string())?.forward => {}
                Ok(_) => failures.push(format!("{}: extracted {name} not forward Cauchy", e.name)),
                Err(err) => failures.push(format!("{}: extraction {name}: {err}", e.name)),
            }
        }
    }

    // Chronological limits grow along subsequences.
    for (name, seq) in [("ladder_fig6", "x"), ("chimney1", "c3"), ("chimney2", "c-3")] {
        let e = all.iter().find(|e| e.name == name).ok_or("missing example")?;
        let curves: Vec<&str> = e.annotations.curves.keys().map(String::as_str).collect();
        let tol = e.annotations.tol;
        let mut cat = finsler_completion::chrono::FunctionCatalog::new();
        for c in &curves {
            let b = busemann_eval(&e.curve(c).map_err(|err| err.to_string())?, &e.window(), e.base(), &e.space).map_err(|err| err.to_string())?;
            if b.is_finite() {
                cat.push_busemann(c, &b, tol).map_err(|err| err.to_string())?;
            }
        }
        let fs: Vec<SampledFunction<f64>> = distance_classes(e, &e.sequence(seq).map_err(|err| err.to_string())?)
            .map_err(|err| err.to_string())?
            .into_iter()
            .map(|f| f.into_function())
            .collect();
        let sub: Vec<SampledFunction<f64>> = fs.iter().step_by(2).cloned().collect();
        let full = chr_limits(&fs, &cat, tol).map_err(|err| err.to_string())?;
        let part = chr_limits(&sub, &cat, tol).map_err(|err| err.to_string())?;
        counts[5] += 1;
        if !full.members.iter().all(|m| part.members.contains(m)) {
            failures.push(format!("{name}: chronological limits shrink on a subsequence"));
        }
    }

    let detail = format!(
        "{} builders; {} d_Q triples, {} monotonicity probes, {} Lipschitz audits, {} duality rows, {} extractions, {} subsequence checks; failures: [{}]",
        all.len(),
        counts[0],
        counts[1],
        counts[2],
        counts[3],
        counts[4],
        counts[5],
        failures.join("; ")
    );
    Ok((failures.is_empty(), detail))
}

fn main() -> ExitCode {
    let criteria: Vec<(&str, Box<dyn Fn() -> Outcome>)> = vec![
        ("half line alternating sequence", Box::new(|| scenario("ex-3.8", Some(Duration::from_secs(10))))),
        ("punctured disk double limits", Box::new(|| scenario("ex-3.22", Some(Duration::from_secs(120))))),
        ("rotating wind quasi-distance asymmetry", Box::new(|| scenario("fig-1", None))),
        ("opposite wind strips boundary kinds", Box::new(|| scenario("fig-2", None))),
        ("comb Gromov limits", Box::new(|| {
            let a = scenario("comb", None)?;
            let b = scenario("comb-ext", None)?;
            Ok((a.0 && b.0, format!("basic: {}; extended: {}", a.1, b.1)))
        })),
        ("ladder chronological limits", Box::new(|| scenario("fig-6", None))),
        ("chimney spaces", Box::new(|| {
            let a = scenario("fig-7a", None)?;
            let b = scenario("fig-7b", None)?;
            Ok((a.0 && b.0, format!("single: {}; double: {}", a.1, b.1)))
        })),
        ("chronology against closed-form cones", Box::new(chronology_oracle)),
        ("strict order of point functions", Box::new(strict_order_oracle)),
        ("causal boundary of two strips", Box::new(|| scenario("fig-8", None))),
        ("property suites on every builder", Box::new(property_suites)),
    ];
    let mut failed = 0;
    for (i, (name, check)) in criteria.iter().enumerate() {
        let (pass, detail) = match check() {
            Ok(v) => v,
            Err(e) => (false, format!("error: {e}")),
        };
        if !pass {
            failed += 1;
        }
        println!("{} criterion {:>2} {name}: {detail}", if pass { "PASS" } else { "FAIL" }, i + 1);
    }
    println!("{} of {} criteria passed", criteria.len() - failed, criteria.len());
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
