use clap::{Args, Parser, Subcommand, ValueEnum};
use finsler_completion::builders::{build_example, Example, ExampleParams, EXAMPLE_NAMES};
use finsler_completion::busemann::{busemann_eval, classify_busemann, Direction, SpeedBoundedCurve};
use finsler_completion::chrono::chr_limits;
use finsler_completion::completion::{classify_boundary_point, extract_cauchy_subsequence, is_alternative_cauchy, CompletionConfig, PointSequence};
use finsler_completion::extended::Ext;
use finsler_completion::function::{SampledFunction, Window};
use finsler_completion::graph::{build_from_spec, SpaceSpec};
use finsler_completion::metric::{DistanceOracle, Reversed};
use finsler_completion::scenarios::{busemann_catalog, distance_classes, example_boundary, run_scenario, ScenarioOptions, SCENARIO_IDS};
use finsler_completion::Space;
use serde_json::{json, Value};
use std::fs;
use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

#[derive(Parser)]
#[command(name = "fcomp", version, about = "Completions of sampled Randers spaces and causal boundaries of stationary spacetimes")]
struct Cli {
    #[command(flatten)]
    common: Common,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Clone)]
struct Common {
    /// Builder name (see `list-examples`) or path to a JSON space spec.
    #[arg(long, global = true)]
    space: Option<String>,
    /// Builder variant, e.g. `one_region` or `static`.
    #[arg(long, global = true)]
    variant: Option<String>,
    /// Grid step override.
    #[arg(long, global = true)]
    resolution: Option<f64>,
    /// Truncation override for builders with an unbounded end.
    #[arg(long, global = true)]
    truncation: Option<f64>,
    /// Matching tolerance override.
    #[arg(long, global = true)]
    tol: Option<f64>,
    /// Directory receiving output files; stdout only when absent.
    #[arg(long, global = true)]
    out_dir: Option<PathBuf>,
    #[arg(long, global = true, value_enum, default_value_t = Format::Csv)]
    format: Format,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Csv,
    Json,
}

#[derive(Subcommand)]
enum Command {
    /// Builds a space and writes its edge list and summary.
    Build,
    /// Distances from (or, with --reverse, to) one sample.
    Dist {
        /// Sample id.
        #[arg(long, conflicts_with = "at")]
        from: Option<usize>,
        /// Chart coordinates `x,y`; the nearest sample is used.
        #[arg(long)]
        at: Option<String>,
        #[arg(long)]
        reverse: bool,
    },
    /// Busemann function of an annotated curve or of a curve file with `s,x,y` rows.
    Busemann {
        #[arg(long, required_unless_present = "curve_csv")]
        curve: Option<String>,
        #[arg(long)]
        curve_csv: Option<PathBuf>,
        /// Treat the curve file as a backward curve.
        #[arg(long)]
        backward: bool,
    },
    /// Cauchy tests, classification and subsequence extraction of a sequence.
    ClassifySeq {
        /// Annotated sequence name.
        #[arg(long, required_unless_present = "ids")]
        seq: Option<String>,
        /// Comma separated sample ids.
        #[arg(long)]
        ids: Option<String>,
    },
    /// Quasi-distance matrix over the annotated classes and interior points.
    DqMatrix,
    /// Chronological limits of the normalized distance functions of a sequence.
    ChrLimits {
        #[arg(long)]
        seq: String,
    },
    /// Causal boundary of the standard stationary spacetime over a builder.
    Cboundary {
        /// Curves left out of the terminal sets.
        #[arg(long, value_delimiter = ',')]
        skip: Vec<String>,
    },
    /// Runs one named scenario and reports its verdicts.
    RunExample { id: String },
    /// Lists scenario ids and builder names.
    ListExamples,
}

enum Failure {
    Input(String),
    Verdict,
}

impl<E: std::fmt::Display> From<E> for Failure {
    fn from(e: E) -> Self {
        Failure::Input(e.to_string())
    }
}

type CliResult = Result<(), Failure>;

enum Loaded {
    Example(Box<Example<f64>>),
    Spec(Space),
}

impl Loaded {
    fn space(&self) -> &Space {
        match self {
            Loaded::Example(e) => &e.space,
            Loaded::Spec(s) => s,
        }
    }

    fn example(&self, what: &str) -> Result<&Example<f64>, Failure> {
        match self {
            Loaded::Example(e) => Ok(e),
            Loaded::Spec(_) => Err(Failure::Input(format!("{what} needs a builder space, not a spec file"))),
        }
    }

    fn window(&self) -> Window {
        match self {
            Loaded::Example(e) => e.window(),
            Loaded::Spec(s) => (0..s.len()).collect::<Vec<_>>().into(),
        }
    }

    fn base(&self) -> usize {
        match self {
            Loaded::Example(e) => e.base(),
            Loaded::Spec(_) => 0,
        }
    }

    fn tol(&self, c: &Common) -> f64 {
        c.tol.unwrap_or(match self {
            Loaded::Example(e) => e.annotations.tol,
            Loaded::Spec(s) => 3.0 * s.resolution(),
        })
    }

    fn config(&self, c: &Common) -> CompletionConfig<f64> {
        match self {
            Loaded::Example(e) => CompletionConfig::new(self.tol(c), &e.annotations.schedule),
            Loaded::Spec(_) => CompletionConfig::new(self.tol(c), &[1.0, 0.3, 0.1, 0.03]),
        }
    }
}

fn load(c: &Common) -> Result<Loaded, Failure> {
    let name = c.space.as_deref().ok_or_else(|| Failure::Input("--space is required".into()))?;
    if EXAMPLE_NAMES.contains(&name) {
        let p = ExampleParams { truncation: c.truncation, resolution: c.resolution, variant: c.variant.clone(), ..Default::default() };
        return Ok(Loaded::Example(Box::new(build_example(name, &p)?)));
    }
    let text = fs::read_to_string(name).map_err(|e| Failure::Input(format!("`{name}` is neither a builder nor a readable spec file: {e}")))?;
    let mut spec = SpaceSpec::from_json(&text)?;
    if let Some(h) = c.resolution {
        spec.resolution = vec![h];
    }
    Ok(Loaded::Spec(build_from_spec(&spec)?))
}

/// Prints the chosen rendering and mirrors it into `--out-dir`.
fn emit(c: &Common, stem: &str, csv: impl FnOnce() -> String, json: impl FnOnce() -> Value) -> Result<Option<PathBuf>, Failure> {
    let (text, ext) = match c.format {
        Format::Csv => (csv(), "csv"),
        Format::Json => (serde_json::to_string_pretty(&json())? + "\n", "json"),
    };
    // A closed pipe (e.g. `| head`) is not an error for a report.
    let _ = std::io::stdout().lock().write_all(text.as_bytes());
    write_artifact(c, &format!("{stem}.{ext}"), &text)
}

fn write_artifact(c: &Common, file: &str, text: &str) -> Result<Option<PathBuf>, Failure> {
    let Some(dir) = &c.out_dir else { return Ok(None) };
    fs::create_dir_all(dir)?;
    let path = dir.join(file);
    fs::write(&path, text)?;
    Ok(Some(path))
}

fn ext_json(v: Ext<f64>) -> Value {
    match v {
        Ext::Finite(x) => json!(x),
        Ext::Infinite => json!("inf"),
    }
}

fn coords_of(space: &Space) -> impl Fn(usize) -> [f64; 2] + '_ {
    |i| space.coords(i)
}

fn parse_point(s: &str) -> Result<[f64; 2], Failure> {
    let v: Result<Vec<f64>, _> = s.split(',').map(|p| p.trim().parse::<f64>()).collect();
    match v?.as_slice() {
        [x] => Ok([*x, 0.0]),
        [x, y] => Ok([*x, *y]),
        _ => Err(Failure::Input(format!("expected `x` or `x,y`, got `{s}`"))),
    }
}

fn cmd_build(c: &Common) -> CliResult {
    let l = load(c)?;
    let s = l.space();
    write_artifact(c, "graph.csv", &s.to_edge_list())?;
    let summary = s.summary();
    emit(
        c,
        "summary",
        || {
            format!(
                "kind,points,edges,resolution,min_weight,max_weight,frontier_points\n{},{},{},{},{},{},{}\n",
                summary.kind, summary.points, summary.edges, summary.resolution, summary.min_weight, summary.max_weight, summary.frontier_points
            )
        },
        || json!(summary),
    )?;
    Ok(())
}

fn cmd_dist(c: &Common, from: Option<usize>, at: Option<String>, reverse: bool) -> CliResult {
    let l = load(c)?;
    let s = l.space();
    let source = match (from, at) {
        (Some(i), _) if i < s.len() => i,
        (Some(i), _) => return Err(Failure::Input(format!("sample {i} out of range 0..{}", s.len()))),
        (None, Some(p)) => s.nearest(parse_point(&p)?),
        (None, None) => l.base(),
    };
    let row = if reverse { Reversed(s).row_from(source) } else { s.row_from(source) };
    emit(
        c,
        "dist",
        || {
            let mut out = String::from("id,x,y,distance\n");
            for (i, d) in row.iter().enumerate() {
                let p = s.coords(i);
                out.push_str(&format!("{i},{},{},{d}\n", p[0], p[1]));
            }
            out
        },
        || json!({"source": source, "reverse": reverse, "distances": row.iter().map(|&d| ext_json(d)).collect::<Vec<_>>()}),
    )?;
    Ok(())
}

fn cmd_busemann(c: &Common, curve: Option<String>, curve_csv: Option<PathBuf>, backward: bool) -> CliResult {
    let l = load(c)?;
    let s = l.space();
    let curve: SpeedBoundedCurve<f64> = match (curve, curve_csv) {
        (_, Some(path)) => {
            let direction = if backward { Direction::Backward } else { Direction::Forward };
            SpeedBoundedCurve::from_csv(&fs::read_to_string(&path)?, s, None, direction, &path.display().to_string())?
        }
        (Some(name), None) => l.example("--curve")?.curve(&name)?,
        (None, None) => return Err(Failure::Input("--curve or --curve-csv is required".into())),
    };
    let b = busemann_eval(&curve, &l.window(), l.base(), s)?;
    let kind = match &l {
        Loaded::Example(e) if !e.annotations.classes.is_empty() => Some(classify_busemann(&b, &e.catalog(&l.config(c))?, l.tol(c))?),
        _ => None,
    };
    emit(
        c,
        "busemann",
        || b.values.as_ref().map_or_else(|| "id,x,y,value\n".to_string(), |f| f.to_csv(coords_of(s))),
        || json!({"curve": b.curve, "finite": b.is_finite(), "kind": kind, "values": b.values.as_ref().map(SampledFunction::to_json), "truncation_probe": b.truncation_probe}),
    )?;
    Ok(())
}

fn cmd_classify_seq(c: &Common, seq: Option<String>, ids: Option<String>) -> CliResult {
    let l = load(c)?;
    let s = l.space();
    let seq = match (seq, ids) {
        (_, Some(list)) => {
            let ids: Result<Vec<usize>, _> = list.split(',').map(|p| p.trim().parse::<usize>()).collect();
            let ids = ids?;
            if let Some(bad) = ids.iter().find(|&&i| i >= s.len()) {
                return Err(Failure::Input(format!("sample {bad} out of range 0..{}", s.len())));
            }
            PointSequence::new(ids, "ids")
        }
        (Some(name), None) => l.example("--seq")?.sequence(&name)?,
        (None, None) => return Err(Failure::Input("--seq or --ids is required".into())),
    };
    let cfg = l.config(c);
    let verdict = is_alternative_cauchy(&seq, s, &cfg.schedule)?;
    let class = classify_boundary_point(&seq, s, &Reversed(s), &cfg).ok();
    let extracted = if verdict.alternative_forward { extract_cauchy_subsequence(&seq, s, &cfg).ok() } else { None };
    emit(
        c,
        "classify",
        || {
            format!(
                "sequence,forward,backward,alternative_forward,kind,extracted_terms\n{},{},{},{},{},{}\n",
                seq.source,
                verdict.forward,
                verdict.backward,
                verdict.alternative_forward,
                class.as_ref().map_or("not_cauchy".to_string(), |k| json!(k.kind).as_str().unwrap_or_default().to_string()),
                extracted.as_ref().map_or(0, |x| x.len())
            )
        },
        || json!({"sequence": seq.source, "verdict": verdict, "class": class, "subsequence": extracted.as_ref().map(|x| x.ids.clone())}),
    )?;
    Ok(())
}

fn cmd_dq_matrix(c: &Common) -> CliResult {
    let l = load(c)?;
    let cat = l.example("dq-matrix")?.catalog(&l.config(c))?;
    emit(c, "dq", || cat.dq_csv(), || cat.to_json())?;
    Ok(())
}

fn cmd_chr_limits(c: &Common, seq: &str) -> CliResult {
    let l = load(c)?;
    let e = l.example("chr-limits")?;
    let tol = l.tol(c);
    let names: Vec<&str> = e.annotations.curves.keys().map(String::as_str).collect();
    let cat = busemann_catalog(e, &names, tol)?;
    let fs: Vec<SampledFunction<f64>> = distance_classes(e, &e.sequence(seq)?)?.into_iter().map(|f| f.into_function()).collect();
    let res = chr_limits(&fs, &cat, tol)?;
    let labels = cat.labels();
    emit(
        c,
        "chr_limits",
        || {
            let mut out = String::from("entry,member\n");
            for label in &labels {
                out.push_str(&format!("{label},{}\n", res.members.iter().any(|m| m == label)));
            }
            out
        },
        || res.to_json(),
    )?;
    Ok(())
}

fn cmd_cboundary(c: &Common, skip: &[String]) -> CliResult {
    let l = load(c)?;
    let e = l.example("cboundary")?;
    let skip: Vec<&str> = skip.iter().map(String::as_str).collect();
    let report = example_boundary(e, l.tol(c), &skip)?;
    emit(
        c,
        "cboundary",
        || {
            let mut out = String::from("line,past,future,character,gap\n");
            for line in &report.lines {
                let label = |d: &Option<_>| d.as_ref().map_or(String::new(), |t: &finsler_completion::spacetime::TerminalDescriptor<f64>| t.label.clone());
                out.push_str(&format!(
                    "{},{},{},{},{}\n",
                    line.label(),
                    label(&line.past),
                    label(&line.future),
                    json!(line.character).as_str().unwrap_or_default(),
                    line.gap.map_or(String::new(), |g| g.to_string())
                ));
            }
            out
        },
        || report.to_json(),
    )?;
    Ok(())
}

fn cmd_run_example(c: &Common, id: &str) -> CliResult {
    let opts = ScenarioOptions { truncation: c.truncation, resolution: c.resolution, tol: c.tol };
    let mut result = run_scenario(id, &opts)?;
    if c.out_dir.is_some() {
        let details = serde_json::to_string_pretty(&result.details)? + "\n";
        if let Some(p) = write_artifact(c, &format!("{id}_details.json"), &details)? {
            result.artifacts.push(p.display().to_string());
        }
        let ext = if c.format == Format::Csv { "csv" } else { "json" };
        result.artifacts.push(c.out_dir.as_ref().expect("checked").join(format!("{id}.{ext}")).display().to_string());
    }
    emit(c, id, || result.to_csv(), || json!({"id": result.id, "passed": result.passed(), "verdicts": result.verdicts, "artifacts": result.artifacts}))?;
    if result.passed() {
        Ok(())
    } else {
        Err(Failure::Verdict)
    }
}

fn cmd_list(c: &Common) -> CliResult {
    emit(
        c,
        "examples",
        || {
            let mut out = String::from("kind,name\n");
            SCENARIO_IDS.iter().for_each(|s| out.push_str(&format!("scenario,{s}\n")));
            EXAMPLE_NAMES.iter().for_each(|s| out.push_str(&format!("builder,{s}\n")));
            out
        },
        || json!({"scenarios": SCENARIO_IDS, "builders": EXAMPLE_NAMES}),
    )?;
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let c = &cli.common;
    let res = match cli.command {
        Command::Build => cmd_build(c),
        Command::Dist { from, at, reverse } => cmd_dist(c, from, at, reverse),
        Command::Busemann { curve, curve_csv, backward } => cmd_busemann(c, curve, curve_csv, backward),
        Command::ClassifySeq { seq, ids } => cmd_classify_seq(c, seq, ids),
        Command::DqMatrix => cmd_dq_matrix(c),
        Command::ChrLimits { seq } => cmd_chr_limits(c, &seq),
        Command::Cboundary { skip } => cmd_cboundary(c, &skip),
        Command::RunExample { id } => cmd_run_example(c, &id),
        Command::ListExamples => cmd_list(c),
    };
    match res {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Verdict) => ExitCode::from(1),
        Err(Failure::Input(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
    }
}
