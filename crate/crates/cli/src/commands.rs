use std::io::Write;
use std::path::{Path, PathBuf};
use std::sync::Arc;

use num_bigint::BigUint;
use serde::Serialize;

use profgen_core::generator::eval_generator_with;
use profgen_core::oracle;
use profgen_core::profile::{
    count_profiles, enumerate_matrix, export_matrix, max_profile, write_labeled_header,
    write_labeled_profile, write_mp_csv, SymbolTable,
};
use profgen_core::reducer::{conditional_pair, mpcs_max_conditional, ConditionalOptions, Segmentation};
use profgen_core::similarity::{cosine, mpcs, Aggregation, MpcsResult};
use profgen_core::spec_io::{self, Format, Severity};
use profgen_core::{DisorderSpec, Error, SymptomSet};

use crate::output::Sink;
use crate::load::{self, located};
use crate::{Agg, Command, Context, Failure, Mode, OutputFormat, SpecFormat};

/// Above this many profiles `--mode auto` switches MPCS_max to conditional generators.
const AUTO_THRESHOLD: u64 = 10_000;

pub fn run(ctx: &Context, cmd: Command, out: &mut Sink) -> Result<u8, Failure> {
    match cmd {
        Command::Validate { paths } => validate(ctx, &paths, out),
        Command::Count { operands } => count(ctx, &operands, out),
        Command::Export { paths, mp } => export(ctx, &paths, mp, out),
        Command::Mpcs {
            a,
            b,
            agg,
            mode,
            oracle,
            mp,
        } => mpcs_cmd(ctx, &a, &b, agg, mode, oracle, mp, out),
        Command::Reduce { a, b } => reduce(ctx, &a, &b, out),
        Command::Eval {
            generator,
            file,
            oracle,
        } => eval(ctx, generator, file, oracle, out),
        Command::Convert { path, to } => convert(&path, to, out),
    }
}

fn json(out: &mut Sink, value: &impl Serialize) -> Result<(), Failure> {
    serde_json::to_writer_pretty(&mut *out, value).map_err(|e| Failure::Io(e.to_string()))?;
    writeln!(out)?;
    Ok(())
}

/// `~1.72e9`-style approximation.
fn approx(n: &BigUint) -> String {
    let x: f64 = n.to_string().parse().expect("decimal digits");
    format!("~{x:.2e}")
}

fn names(s: &SymptomSet) -> Vec<String> {
    s.iter().map(|x| x.to_string()).collect()
}

#[derive(Serialize)]
struct DiagnosticJson {
    severity: &'static str,
    line: usize,
    col: usize,
    code: &'static str,
    message: String,
}

#[derive(Serialize)]
struct ValidateJson {
    path: String,
    ok: bool,
    name: Option<String>,
    criteria: Option<usize>,
    disjoint_criteria: Option<bool>,
    diagnostics: Vec<DiagnosticJson>,
}

fn validate(ctx: &Context, paths: &[PathBuf], out: &mut Sink) -> Result<u8, Failure> {
    let files = load::expand(paths)?;
    let (mut io_failed, mut invalid) = (false, false);
    let mut reports = Vec::new();
    let mut text = String::new();
    for path in &files {
        let mut report = ValidateJson {
            path: path.display().to_string(),
            ok: false,
            name: None,
            criteria: None,
            disjoint_criteria: None,
            diagnostics: vec![],
        };
        let diags = match load::parse(path) {
            Err(f) => {
                io_failed = true;
                text.push_str(&format!("{}: error[io]: {}\n", path.display(), f.message()));
                report.diagnostics.push(DiagnosticJson {
                    severity: "error",
                    line: 0,
                    col: 0,
                    code: "io",
                    message: f.message().to_string(),
                });
                reports.push(report);
                continue;
            }
            Ok(Ok((d, diags))) => {
                let n = d.criteria().len();
                let noun = if n == 1 { "criterion" } else { "criteria" };
                text.push_str(&format!("{}: ok ({}, {n} {noun})\n", path.display(), d.name()));
                report.ok = true;
                report.name = Some(d.name().to_string());
                report.criteria = Some(d.criteria().len());
                report.disjoint_criteria = Some(d.disjoint_criteria());
                diags
            }
            Ok(Err(diags)) => {
                invalid = true;
                text.push_str(&format!("{}: invalid\n", path.display()));
                diags
            }
        };
        for d in &diags.items {
            text.push_str(&format!("  {}\n", located(path, d)));
            report.diagnostics.push(DiagnosticJson {
                severity: match d.severity {
                    Severity::Error => "error",
                    Severity::Warning => "warning",
                },
                line: d.line,
                col: d.col,
                code: d.code,
                message: d.message.clone(),
            });
        }
        reports.push(report);
    }
    match ctx.format {
        OutputFormat::Text => out.write_all(text.as_bytes())?,
        OutputFormat::Json => json(out, &reports)?,
    }
    Ok(if io_failed {
        2
    } else if invalid {
        1
    } else {
        0
    })
}

#[derive(Serialize)]
struct CountJson {
    name: String,
    profiles: String,
    approx: String,
    source: &'static str,
}

#[derive(Serialize)]
struct PairJson {
    a: String,
    b: String,
    comparisons: String,
    approx: String,
}

#[derive(Serialize)]
struct CountReport {
    disorders: Vec<CountJson>,
    pairs: Vec<PairJson>,
}

fn count(ctx: &Context, operands: &[String], out: &mut Sink) -> Result<u8, Failure> {
    let mut rows: Vec<(String, BigUint, &'static str)> = Vec::new();
    for op in operands {
        let path = Path::new(op);
        if path.exists() {
            let d = load::spec(path)?;
            let n = count_profiles(&d, &ctx.limits).map_err(|e| match e {
                Error::OverlappingCriteria { .. } => Failure::Domain(format!(
                    "{e}; the product formula does not apply, use `export` to enumerate the deduplicated profiles"
                )),
                e => e.into(),
            })?;
            rows.push((d.name().to_string(), n, "computed"));
        } else if let Some(n) = ctx.published.get(op) {
            rows.push((op.clone(), n.clone(), "published"));
        } else {
            return Err(Failure::Io(format!(
                "{op}: no such file and no --published-count {op}=N given"
            )));
        }
    }
    let mut report = CountReport {
        disorders: vec![],
        pairs: vec![],
    };
    for (name, n, source) in &rows {
        report.disorders.push(CountJson {
            name: name.clone(),
            profiles: n.to_string(),
            approx: approx(n),
            source,
        });
    }
    for (i, (a, na, _)) in rows.iter().enumerate() {
        for (b, nb, _) in &rows[i + 1..] {
            let c = na * nb;
            report.pairs.push(PairJson {
                a: a.clone(),
                b: b.clone(),
                comparisons: c.to_string(),
                approx: approx(&c),
            });
        }
    }
    match ctx.format {
        OutputFormat::Json => json(out, &report)?,
        OutputFormat::Text => {
            for d in &report.disorders {
                let note = if d.source == "published" { " [published]" } else { "" };
                writeln!(out, "{}: {} profiles ({}){note}", d.name, d.profiles, d.approx)?;
            }
            for p in &report.pairs {
                writeln!(out, "{} x {}: {} comparisons ({})", p.a, p.b, p.comparisons, p.approx)?;
            }
        }
    }
    Ok(0)
}

fn export(ctx: &Context, paths: &[PathBuf], mp: bool, out: &mut Sink) -> Result<u8, Failure> {
    let specs: Vec<DisorderSpec> = paths.iter().map(|p| load::spec(p)).collect::<Result<_, _>>()?;
    let refs: Vec<&DisorderSpec> = specs.iter().collect();
    let table = Arc::new(SymbolTable::intern(&refs));
    if let [d] = refs.as_slice() {
        if mp {
            write_mp_csv(&max_profile(d, &table)?, &table, out)?;
        } else {
            export_matrix(d, table, out, &ctx.limits)?;
        }
        return Ok(0);
    }
    // enumerate everything first so a failure leaves the output untouched
    if mp {
        let rows = refs
            .iter()
            .map(|d| max_profile(d, &table))
            .collect::<Result<Vec<_>, _>>()?;
        write_labeled_header(&table, out)?;
        for (d, p) in refs.iter().zip(&rows) {
            write_labeled_profile(d.name(), p, &table, out)?;
        }
    } else {
        let matrices = refs
            .iter()
            .map(|d| enumerate_matrix(d, table.clone(), &ctx.limits))
            .collect::<Result<Vec<_>, _>>()?;
        write_labeled_header(&table, out)?;
        for (d, m) in refs.iter().zip(&matrices) {
            m.write_labeled_rows(d.name(), out)?;
        }
    }
    Ok(0)
}

#[derive(Serialize)]
struct WitnessJson {
    a_index: usize,
    b_index: usize,
    a: Vec<String>,
    b: Vec<String>,
    shared: u32,
    size_a: u32,
    size_b: u32,
}

#[derive(Serialize)]
struct SegmentationJson {
    shared: Vec<String>,
    minimize_a: Vec<String>,
    minimize_b: Vec<String>,
    untouched: Vec<String>,
    necessary_a: Vec<String>,
    necessary_b: Vec<String>,
    forced_a: Vec<String>,
    forced_b: Vec<String>,
}

impl From<&Segmentation> for SegmentationJson {
    fn from(s: &Segmentation) -> Self {
        SegmentationJson {
            shared: names(&s.shared),
            minimize_a: names(&s.minimize_a),
            minimize_b: names(&s.minimize_b),
            untouched: names(&s.untouched),
            necessary_a: names(&s.necessary_a),
            necessary_b: names(&s.necessary_b),
            forced_a: names(&s.forced_a),
            forced_b: names(&s.forced_b),
        }
    }
}

#[derive(Serialize)]
struct OracleJson {
    checked: bool,
    agrees: Option<bool>,
    value: Option<f64>,
    note: Option<String>,
}

#[derive(Serialize)]
struct MpcsJson {
    a: String,
    b: String,
    profiles_a: Option<String>,
    profiles_b: Option<String>,
    aggregation: Aggregation,
    mode: &'static str,
    note: Option<String>,
    value: f64,
    value_3dp: String,
    phi_ab: f64,
    phi_ba: f64,
    witness: Option<WitnessJson>,
    comparisons: String,
    comparisons_before: Option<String>,
    comparisons_after: String,
    reduced_a: Option<String>,
    reduced_b: Option<String>,
    reduced_rows_a: Option<usize>,
    reduced_rows_b: Option<usize>,
    segmentation: Option<SegmentationJson>,
    oracle: Option<OracleJson>,
}

/// Profile count from a published override, else computed; `None` if unavailable.
fn profiles(ctx: &Context, d: &DisorderSpec) -> Option<BigUint> {
    ctx.published
        .get(d.name())
        .cloned()
        .or_else(|| count_profiles(d, &ctx.limits).ok())
}

/// Reduced disorder notation: a single generator, or a bracketed list of them.
fn notation(d: &DisorderSpec) -> String {
    let gens: Vec<String> = d.generators().map(|g| g.to_string()).collect();
    match gens.as_slice() {
        [one] => one.clone(),
        many => format!("[{}]", many.join(", ")),
    }
}

fn witness_json(r: &MpcsResult) -> Option<WitnessJson> {
    r.witness.as_ref().map(|w| WitnessJson {
        a_index: w.a_index,
        b_index: w.b_index,
        a: names(&w.a),
        b: names(&w.b),
        shared: w.score.shared,
        size_a: w.score.left,
        size_b: w.score.right,
    })
}

#[allow(clippy::too_many_arguments)]
fn mpcs_cmd(
    ctx: &Context,
    a_path: &Path,
    b_path: &Path,
    agg: Agg,
    mode: Mode,
    check: bool,
    mp: bool,
    out: &mut Sink,
) -> Result<u8, Failure> {
    let agg: Aggregation = agg.into();
    if mode == Mode::Conditional && agg == Aggregation::Mean {
        return Err(Failure::Io(
            "--mode conditional requires --agg max; conditional generators only preserve the maximum".into(),
        ));
    }
    let a = load::spec(a_path)?;
    let b = load::spec(b_path)?;
    let (pa, pb) = (profiles(ctx, &a), profiles(ctx, &b));
    let mut report = MpcsJson {
        a: a.name().to_string(),
        b: b.name().to_string(),
        profiles_a: pa.as_ref().map(BigUint::to_string),
        profiles_b: pb.as_ref().map(BigUint::to_string),
        aggregation: agg,
        mode: "brute",
        note: None,
        value: 0.0,
        value_3dp: String::new(),
        phi_ab: 0.0,
        phi_ba: 0.0,
        witness: None,
        comparisons: String::new(),
        comparisons_before: None,
        comparisons_after: String::new(),
        reduced_a: None,
        reduced_b: None,
        reduced_rows_a: None,
        reduced_rows_b: None,
        segmentation: None,
        oracle: None,
    };

    if mp {
        let table = SymbolTable::intern(&[&a, &b]);
        let value = cosine(&max_profile(&a, &table)?, &max_profile(&b, &table)?)?;
        report.mode = "mp";
        report.value = value;
        report.phi_ab = value;
        report.phi_ba = value;
        report.comparisons = "1".into();
        report.comparisons_before = Some("1".into());
        report.comparisons_after = "1".into();
    } else {
        let large = |n: &Option<BigUint>| n.as_ref().is_none_or(|n| *n > BigUint::from(AUTO_THRESHOLD));
        let conditional = match mode {
            Mode::Conditional => true,
            Mode::Brute => false,
            Mode::Auto => agg == Aggregation::Max && (large(&pa) || large(&pb)),
        };
        let mut done = false;
        if conditional {
            let opts = ConditionalOptions {
                limits: ctx.limits,
                published_a: ctx.published.get(a.name()).cloned(),
                published_b: ctx.published.get(b.name()).cloned(),
                verify: check,
            };
            match mpcs_max_conditional(&a, &b, &opts) {
                Ok(r) => {
                    report.mode = "conditional";
                    fill_result(&mut report, &r.result);
                    report.comparisons_before = r.comparisons_before.as_ref().map(BigUint::to_string);
                    report.comparisons_after = r.comparisons_after.to_string();
                    report.reduced_a = Some(notation(&r.reduced_a));
                    report.reduced_b = Some(notation(&r.reduced_b));
                    report.reduced_rows_a = Some(r.matrix_a.len());
                    report.reduced_rows_b = Some(r.matrix_b.len());
                    report.segmentation = Some((&r.segmentation).into());
                    if check {
                        report.oracle = Some(match r.verified {
                            Some(ok) => OracleJson {
                                checked: true,
                                agrees: Some(ok),
                                value: None,
                                note: None,
                            },
                            None => OracleJson {
                                checked: false,
                                agrees: None,
                                value: None,
                                note: Some("disorders too large for the reference implementation".into()),
                            },
                        });
                    }
                    done = true;
                }
                Err(e) if mode == Mode::Auto => {
                    report.note = Some(format!("conditional generators unavailable ({e}); used brute force"));
                }
                Err(e) => return Err(e.into()),
            }
        }
        if !done {
            let table = Arc::new(SymbolTable::intern(&[&a, &b]));
            let ma = enumerate_matrix(&a, table.clone(), &ctx.limits)?;
            let mb = enumerate_matrix(&b, table, &ctx.limits)?;
            let r = mpcs(&ma, &mb, agg)?;
            fill_result(&mut report, &r);
            report.comparisons_before = Some(r.comparisons.to_string());
            report.comparisons_after = r.comparisons.to_string();
            if check {
                report.oracle = Some(match oracle::naive_mpcs(&a, &b, agg, &ctx.limits) {
                    Ok(n) => OracleJson {
                        checked: true,
                        agrees: Some((n.value - r.value).abs() <= 1e-12),
                        value: Some(n.value),
                        note: None,
                    },
                    Err(Error::OracleTooLarge { size, cap }) => OracleJson {
                        checked: false,
                        agrees: None,
                        value: None,
                        note: Some(format!("too large for the reference implementation: {size}, cap {cap}")),
                    },
                    Err(e) => return Err(e.into()),
                });
            }
        }
    }
    report.value_3dp = format!("{:.3}", report.value);

    match ctx.format {
        OutputFormat::Json => json(out, &report)?,
        OutputFormat::Text => write_mpcs_text(out, &report)?,
    }
    let disagrees = report.oracle.as_ref().is_some_and(|o| o.agrees == Some(false));
    if disagrees {
        return Err(Failure::Domain("the reference implementation disagrees".into()));
    }
    Ok(0)
}

fn fill_result(report: &mut MpcsJson, r: &MpcsResult) {
    report.value = r.value;
    report.phi_ab = r.phi_ab;
    report.phi_ba = r.phi_ba;
    report.comparisons = r.comparisons.to_string();
    report.witness = witness_json(r);
}

fn braces(v: &[String]) -> String {
    format!("{{{}}}", v.join(", "))
}

fn write_mpcs_text(out: &mut Sink, r: &MpcsJson) -> std::io::Result<()> {
    let or_unknown = |x: &Option<String>| x.clone().unwrap_or_else(|| "unknown".into());
    writeln!(out, "A: {} ({} profiles)", r.a, or_unknown(&r.profiles_a))?;
    writeln!(out, "B: {} ({} profiles)", r.b, or_unknown(&r.profiles_b))?;
    writeln!(out, "aggregation: {}", r.aggregation)?;
    writeln!(out, "mode: {}", r.mode)?;
    if let Some(note) = &r.note {
        writeln!(out, "note: {note}")?;
    }
    writeln!(out, "value: {}", r.value)?;
    writeln!(out, "value (3 dp): {}", r.value_3dp)?;
    writeln!(out, "phi(A,B): {}", r.phi_ab)?;
    writeln!(out, "phi(B,A): {}", r.phi_ba)?;
    if let Some(w) = &r.witness {
        writeln!(out, "witness A[{}]: {}", w.a_index, braces(&w.a))?;
        writeln!(out, "witness B[{}]: {}", w.b_index, braces(&w.b))?;
        writeln!(out, "witness score: {}/sqrt({}*{})", w.shared, w.size_a, w.size_b)?;
    }
    if let (Some(ra), Some(rb)) = (&r.reduced_a, &r.reduced_b) {
        writeln!(out, "A** = {ra}")?;
        writeln!(out, "B** = {rb}")?;
        writeln!(
            out,
            "reduced rows: {} x {}",
            r.reduced_rows_a.unwrap_or(0),
            r.reduced_rows_b.unwrap_or(0)
        )?;
    }
    writeln!(out, "comparisons: {}", r.comparisons)?;
    writeln!(out, "comparisons before: {}", or_unknown(&r.comparisons_before))?;
    writeln!(out, "comparisons after: {}", r.comparisons_after)?;
    if let Some(o) = &r.oracle {
        match (o.agrees, &o.note) {
            (Some(true), _) => writeln!(out, "oracle: agrees")?,
            (Some(false), _) => writeln!(out, "oracle: DISAGREES ({})", o.value.unwrap_or(f64::NAN))?,
            (None, Some(note)) => writeln!(out, "oracle: skipped, {note}")?,
            (None, None) => writeln!(out, "oracle: skipped")?,
        }
    }
    Ok(())
}

#[derive(Serialize)]
struct ReduceJson {
    a: String,
    b: String,
    segmentation: SegmentationJson,
    reduced_a: String,
    reduced_b: String,
    reduced_a_spec: String,
    reduced_b_spec: String,
    profiles_a: Option<String>,
    profiles_b: Option<String>,
    reduced_rows_a: usize,
    reduced_rows_b: usize,
}

fn reduce(ctx: &Context, a_path: &Path, b_path: &Path, out: &mut Sink) -> Result<u8, Failure> {
    let a = load::spec(a_path)?;
    let b = load::spec(b_path)?;
    let pair = conditional_pair(&a, &b, &ctx.limits)?;
    let table = Arc::new(SymbolTable::intern(&[&a, &b]));
    let rows_a = enumerate_matrix(&pair.reduced_a, table.clone(), &ctx.limits)?.len();
    let rows_b = enumerate_matrix(&pair.reduced_b, table, &ctx.limits)?.len();
    let report = ReduceJson {
        a: a.name().to_string(),
        b: b.name().to_string(),
        segmentation: (&pair.segmentation).into(),
        reduced_a: notation(&pair.reduced_a),
        reduced_b: notation(&pair.reduced_b),
        reduced_a_spec: spec_io::serialize(&pair.reduced_a, Format::Dsl),
        reduced_b_spec: spec_io::serialize(&pair.reduced_b, Format::Dsl),
        profiles_a: profiles(ctx, &a).map(|n| n.to_string()),
        profiles_b: profiles(ctx, &b).map(|n| n.to_string()),
        reduced_rows_a: rows_a,
        reduced_rows_b: rows_b,
    };
    match ctx.format {
        OutputFormat::Json => json(out, &report)?,
        OutputFormat::Text => {
            let s = &report.segmentation;
            writeln!(out, "A: {}", report.a)?;
            writeln!(out, "B: {}", report.b)?;
            writeln!(out)?;
            let rows = [
                ("shared (maximized)", &s.shared),
                ("minimized in A", &s.minimize_a),
                ("minimized in B", &s.minimize_b),
                ("untouched (G3)", &s.untouched),
                ("necessary in A", &s.necessary_a),
                ("necessary in B", &s.necessary_b),
                ("forced in A", &s.forced_a),
                ("forced in B", &s.forced_b),
            ];
            for (label, set) in rows {
                writeln!(out, "{label:<20} {}", braces(set))?;
            }
            writeln!(out)?;
            writeln!(out, "A** = {}", report.reduced_a)?;
            writeln!(out, "B** = {}", report.reduced_b)?;
            let unknown = || "unknown".to_string();
            writeln!(
                out,
                "rows A: {} -> {}",
                report.profiles_a.clone().unwrap_or_else(unknown),
                report.reduced_rows_a
            )?;
            writeln!(
                out,
                "rows B: {} -> {}",
                report.profiles_b.clone().unwrap_or_else(unknown),
                report.reduced_rows_b
            )?;
        }
    }
    Ok(0)
}

#[derive(Serialize)]
struct EvalJson {
    generator: String,
    kind: String,
    count: usize,
    sets: Vec<Vec<String>>,
    oracle: Option<bool>,
}

fn eval(
    ctx: &Context,
    generator: Option<String>,
    file: Option<PathBuf>,
    check: bool,
    out: &mut Sink,
) -> Result<u8, Failure> {
    let text = match (generator, file) {
        (Some(t), _) => t,
        (None, Some(p)) => load::read(&p)?,
        (None, None) => return Err(Failure::Io("no generator given".into())),
    };
    let g = match spec_io::parse_generator_dsl(&text) {
        Ok((g, diags)) => {
            for w in diags.warnings() {
                eprintln!("{w}");
            }
            g
        }
        Err(diags) => match spec_io::parse_dsl(&text) {
            // A disorder file with a single criterion is accepted too.
            Ok((d, _)) if d.criteria().len() == 1 => d.criteria()[0].generator.clone(),
            Ok((d, _)) => {
                return Err(Failure::Domain(format!(
                    "eval takes one generator; {} has {} criteria",
                    d.name(),
                    d.criteria().len()
                )))
            }
            Err(_) => {
                return Err(Failure::Domain(format!("invalid generator\n{}", diags.to_string().trim_end())))
            }
        },
    };
    let family = eval_generator_with(&g, &ctx.limits)?;
    let oracle = if check {
        let naive = oracle::naive_eval(&g, &ctx.limits)?;
        Some(naive == family)
    } else {
        None
    };
    let sets: Vec<Vec<String>> = family.iter().map(|s| s.sorted_names()).collect();
    match ctx.format {
        OutputFormat::Json => json(
            out,
            &EvalJson {
                generator: g.to_canonical_string(),
                kind: g.kind().to_string(),
                count: sets.len(),
                sets,
                oracle,
            },
        )?,
        OutputFormat::Text => {
            for s in &sets {
                writeln!(out, "{}", braces(s))?;
            }
            if let Some(ok) = oracle {
                let verdict = if ok { "agrees" } else { "DISAGREES" };
                writeln!(out, "# oracle: {verdict}")?;
            }
        }
    }
    if oracle == Some(false) {
        return Err(Failure::Domain("the reference implementation disagrees".into()));
    }
    Ok(0)
}

fn convert(path: &Path, to: SpecFormat, out: &mut Sink) -> Result<u8, Failure> {
    let d = load::spec(path)?;
    let format = match to {
        SpecFormat::Dsl => Format::Dsl,
        SpecFormat::Toml => Format::Canonical,
    };
    out.write_all(spec_io::serialize(&d, format).as_bytes())?;
    Ok(0)
}
