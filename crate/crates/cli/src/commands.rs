use std::fmt::Write as _;
use std::path::Path;
use std::time::Instant;

use coarse_core::double::validate_double;
use coarse_core::dsl::{eval_cross_expr, parse_cross_expr, EvalError};
use coarse_core::fundamental::{
    extract_witness, fundamentality_experiment, sparsify_witness, verify_lemma_main, Direction, LemmaMainReport,
};
use coarse_core::order::{check_controls, check_equivalent, EquivalenceStatus, EquivalenceVerdict, Verdict};
use coarse_core::tropical::bench_minplus;
use coarse_core::{compose, validate_metric, ComposeOptions, Dist, FundamentalError};
use serde_json::{json, Value};

use crate::codec::{build_metric, double_to_json, load_double, parse_document, read_text, write_text, Document};
use crate::config::{load_pair, OptionsConfig, Pair};
use crate::error::{exit, CliError};
use crate::report::{bytes_hash, to_json, Report};
use crate::{Cli, Command, Outcome, PipelineArgs};

pub fn execute(cli: &Cli) -> Result<Outcome, CliError> {
    let start = Instant::now();
    let (report, code) = match &cli.command {
        Command::Validate { file, double } => validate(file, *double)?,
        Command::Compose { a, b, penalty, output } => match output {
            Some(out) => compose_cmd(a, b, *penalty, out)?,
            None => {
                let d = compose(&load_double(a)?, &load_double(b)?, ComposeOptions::with_penalty(*penalty))?;
                return Ok(Outcome { stdout: double_to_json(&d), code: exit::OK });
            }
        },
        Command::CheckOrder { f, g, pipeline } => check_order(f, g, pipeline)?,
        Command::CheckEquiv { f, g, pipeline } => check_equiv(f, g, pipeline)?,
        Command::Witness { b, c, pipeline } => witness(b, c, pipeline)?,
        Command::LemmaMain { b, c, pipeline, emit_csv } => lemma_main(b, c, pipeline, emit_csv.as_deref())?,
        Command::Fundamentality { s, t, pipeline } => fundamentality(s, t, pipeline)?,
        Command::EvalDsl { expr, x, y, dxy } => return eval_dsl(expr, x, y, *dxy),
        Command::Bench { n, threads, seed } => bench(*n, *threads, *seed)?,
    };
    let mut report = report;
    if cli.timings && report.timings.is_none() {
        report.timings = Some(json!({ "elapsed_ms": start.elapsed().as_secs_f64() * 1e3 }));
    }
    Ok(Outcome { stdout: report.render(), code })
}

type Run = (Report, i32);

fn file_config(command: &str, files: &[&Path], extra: Value) -> Result<Value, CliError> {
    let mut hashes = Vec::new();
    for f in files {
        let bytes = std::fs::read(f).map_err(|source| CliError::Io { path: f.to_path_buf(), source })?;
        hashes.push(bytes_hash(&bytes));
    }
    Ok(json!({ "command": command, "inputs": hashes, "options": extra }))
}

fn validate(file: &Path, require_double: bool) -> Result<Run, CliError> {
    let config = file_config("validate", &[file], json!({ "double": require_double }))?;
    let doc = match parse_document(&read_text(file)?, file) {
        Ok(doc) => doc,
        Err(e @ CliError::Negative { .. }) => {
            let report = Report::new("validate", config, "invalid").metrics(json!({ "error": e.to_string() }));
            return Ok((report, exit::NEGATIVE));
        }
        Err(e) => return Err(e),
    };
    let (kind, raw, cross) = match doc {
        Document::Metric(_) if require_double => {
            return Err(CliError::SchemaKind { expected: "double", found: "metric".into() })
        }
        Document::Metric(raw) => ("metric", raw, None),
        Document::Double { base, cross } => ("double", base, Some(cross)),
    };
    let n = raw.dist.n();
    let base_report = validate_metric(&raw.dist);
    let mut metrics = json!({ "kind": kind, "n": n, "base": to_json(&base_report) });
    let mut ok = base_report.ok;
    if let (true, Some(cross)) = (ok, cross) {
        if cross.n() != n {
            return Err(CliError::Config(format!("cross block is {} x {0} but the base has {n} points", cross.n())));
        }
        let base = build_metric(raw)?;
        let cross_report = validate_double(&base, &cross);
        ok = cross_report.ok;
        metrics["cross"] = to_json(&cross_report);
    }
    let (verdict, code) = if ok { ("valid", exit::OK) } else { ("invalid", exit::NEGATIVE) };
    Ok((Report::new("validate", config, verdict).metrics(metrics), code))
}

fn compose_cmd(a: &Path, b: &Path, penalty: u64, out: &Path) -> Result<Run, CliError> {
    let config = file_config("compose", &[a, b], json!({ "penalty": penalty }))?;
    let d = compose(&load_double(a)?, &load_double(b)?, ComposeOptions::with_penalty(penalty))?;
    let text = double_to_json(&d);
    write_text(out, &text)?;
    let metrics = json!({
        "n": d.n(),
        "floor": d.floor().0,
        "output_sha256": bytes_hash(text.as_bytes()),
    });
    Ok((Report::new("compose", config, "ok").metrics(metrics), exit::OK))
}

fn load(command: &'static str, first: &Path, second: &Path, args: &PipelineArgs) -> Result<(Pair, Value), CliError> {
    let overrides =
        OptionsConfig { penalty: args.penalty, window: args.window, delta: args.delta, min_witness: args.min_witness };
    let pair = load_pair(first, second, args.levels.clone(), overrides)?;
    let config = json!({
        "command": command,
        "families": [to_json(&pair.configs[0]), to_json(&pair.configs[1])],
        "options": pair.options.to_json(),
    });
    Ok((pair, config))
}

fn pair_metrics(pair: &Pair) -> Value {
    json!({
        "space": pair.ladder.space().to_string(),
        "levels_used": pair.ladder.levels(),
        "families": [pair.families[0].describe(), pair.families[1].describe()],
        "options": pair.options.to_json(),
    })
}

fn verdict_code(v: &Verdict) -> i32 {
    match v {
        Verdict::Holds(_) => exit::OK,
        Verdict::Fails(_) => exit::NEGATIVE,
        Verdict::Inconclusive(_) => exit::INCONCLUSIVE,
    }
}

fn with_verdict(mut report: Report, v: &Verdict) -> Report {
    match v {
        Verdict::Holds(phi) => report.certificate(to_json(phi)),
        Verdict::Fails(w) => {
            report.metrics["witness_len"] = json!(w.len());
            report.witness(to_json(w))
        }
        Verdict::Inconclusive(reason) => {
            report.metrics["reason"] = json!(reason);
            report
        }
    }
}

fn check_order(f: &Path, g: &Path, args: &PipelineArgs) -> Result<Run, CliError> {
    let (pair, config) = load("check-order", f, g, args)?;
    let v = check_controls(&pair.families[0], &pair.families[1], &pair.options.params)?;
    let report = Report::new("check-order", config, v.status().to_string()).metrics(pair_metrics(&pair));
    Ok((with_verdict(report, &v), verdict_code(&v)))
}

fn equivalence_json(eq: &EquivalenceVerdict) -> Value {
    json!({ "forward": eq.forward.status().to_string(), "backward": eq.backward.status().to_string() })
}

fn check_equiv(f: &Path, g: &Path, args: &PipelineArgs) -> Result<Run, CliError> {
    let (pair, config) = load("check-equiv", f, g, args)?;
    let eq = check_equivalent(&pair.families[0], &pair.families[1], &pair.options.params)?;
    let status = eq.status();
    let mut metrics = pair_metrics(&pair);
    metrics["directions"] = equivalence_json(&eq);
    let mut report = Report::new("check-equiv", config, status.to_string()).metrics(metrics);
    let code = match status {
        EquivalenceStatus::Equivalent => {
            report = report.certificate(json!({
                "forward": to_json(&eq.forward.homeomorphism()),
                "backward": to_json(&eq.backward.homeomorphism()),
            }));
            exit::OK
        }
        EquivalenceStatus::NotEquivalent => {
            let (direction, w) = match (&eq.forward, &eq.backward) {
                (Verdict::Fails(w), _) => ("forward", w),
                (_, Verdict::Fails(w)) => ("backward", w),
                _ => unreachable!("not equivalent implies a failing direction"),
            };
            report.metrics["witness_len"] = json!(w.len());
            report = report.witness(json!({ "direction": direction, "bound": w.bound, "entries": w.entries }));
            exit::NEGATIVE
        }
        EquivalenceStatus::Inconclusive => {
            let reasons: Vec<&String> = [&eq.forward, &eq.backward]
                .into_iter()
                .filter_map(|v| match v {
                    Verdict::Inconclusive(r) => Some(r),
                    _ => None,
                })
                .collect();
            report.metrics["reason"] = json!(reasons);
            exit::INCONCLUSIVE
        }
    };
    Ok((report, code))
}

fn witness(b: &Path, c: &Path, args: &PipelineArgs) -> Result<Run, CliError> {
    let (pair, config) = load("witness", b, c, args)?;
    let [fb, fc] = &pair.families;
    let extracted = extract_witness(fb, fc, &pair.options.params)?;
    let mut metrics = pair_metrics(&pair);
    metrics["witness_len"] = json!(extracted.witness.len());
    metrics["x_radius"] = to_json(&extracted.x_radius);
    metrics["y_radius"] = to_json(&extracted.y_radius);
    match sparsify_witness(&extracted.witness, fc) {
        Ok(sparse) => metrics["sparse"] = to_json(&sparse),
        Err(e @ FundamentalError::TooFewSurvivors { .. }) => metrics["sparse_error"] = json!(e.to_string()),
        Err(e) => return Err(e.into()),
    }
    let report = Report::new("witness", config, "found").witness(to_json(&extracted.witness)).metrics(metrics);
    Ok((report, exit::OK))
}

fn lemma_csv(r: &LemmaMainReport) -> String {
    let mut out = String::from("k,x,y,diag_aba,diag_aca,closed_form\n");
    for (k, p) in r.witness.points.iter().enumerate() {
        let _ = writeln!(out, "{k},{},{},{},{},{}", p.x, p.y, r.diag_aba[k].0, r.diag_aca[k].0, r.closed_form[k].0);
    }
    out
}

fn lemma_main(b: &Path, c: &Path, args: &PipelineArgs, csv: Option<&Path>) -> Result<Run, CliError> {
    let (pair, config) = load("lemma-main", b, c, args)?;
    let [fb, fc] = &pair.families;
    let r = verify_lemma_main(fb, fc, &pair.options.params, pair.options.compose)?;
    if let Some(path) = csv {
        write_text(path, &lemma_csv(&r))?;
    }
    let mut metrics = pair_metrics(&pair);
    let m = metrics.as_object_mut().expect("object");
    m.insert("bound".into(), json!(r.witness.bound));
    m.insert("penalty".into(), json!(r.penalty));
    m.insert("diag_aba".into(), to_json(&r.diag_aba));
    m.insert("diag_aca".into(), to_json(&r.diag_aca));
    m.insert("sup_diag_aba".into(), json!(r.sup_diag_aba));
    m.insert("aba_bound".into(), json!(r.aba_bound));
    m.insert("closed_form".into(), to_json(&r.closed_form));
    m.insert("closed_form_ok".into(), json!(r.closed_form_ok));
    m.insert("aca_increasing".into(), json!(r.aca_increasing));
    m.insert("aca_exceeds".into(), json!(r.aca_exceeds));
    m.insert("dominance".into(), json!([r.dominance.0, r.dominance.1]));
    m.insert("equivalence".into(), json!(r.equivalence.status().to_string()));
    m.insert("directions".into(), equivalence_json(&r.equivalence));
    let (verdict, code) = if r.passed() { ("passed", exit::OK) } else { ("failed", exit::NEGATIVE) };
    let report = Report::new("lemma-main", config, verdict).witness(to_json(&r.witness)).metrics(metrics);
    Ok((report, code))
}

fn fundamentality(s: &Path, t: &Path, args: &PipelineArgs) -> Result<Run, CliError> {
    let (pair, config) = load("fundamentality", s, t, args)?;
    let [fs, ft] = &pair.families;
    let r = fundamentality_experiment(fs, ft, &pair.options.params, pair.options.compose)?;
    let xs = r.witness.x_points();
    let diag = |f: &coarse_core::order::MetricFamily| -> Vec<Dist> { xs.iter().map(|&x| f.top().at(x, x)).collect() };
    let mut metrics = pair_metrics(&pair);
    let m = metrics.as_object_mut().expect("object");
    let direction = match r.failing_direction {
        Direction::SDoesNotControlT => "s-does-not-control-t",
        Direction::TDoesNotControlS => "t-does-not-control-s",
    };
    m.insert("failing_direction".into(), json!(direction));
    m.insert("extracted_len".into(), json!(r.extracted.witness.len()));
    m.insert("sparse".into(), to_json(&r.witness));
    m.insert("separator".into(), json!(r.separator.describe()));
    m.insert("idempotent_e".into(), json!(r.idempotent_e.describe()));
    m.insert("mu_s".into(), json!(r.mu_s.describe()));
    m.insert("mu_t".into(), json!(r.mu_t.describe()));
    m.insert("mu_s_diag".into(), to_json(&diag(&r.mu_s)));
    m.insert("mu_t_diag".into(), to_json(&diag(&r.mu_t)));
    m.insert("directions".into(), equivalence_json(&r.separation));
    let status = r.separation.status();
    let (verdict, code) = match status {
        EquivalenceStatus::NotEquivalent => ("separated", exit::OK),
        EquivalenceStatus::Equivalent => ("not-separated", exit::NEGATIVE),
        EquivalenceStatus::Inconclusive => ("inconclusive", exit::INCONCLUSIVE),
    };
    let mut report = Report::new("fundamentality", config, verdict).metrics(metrics);
    if let Some(w) = r.separation.forward.witness().or(r.separation.backward.witness()) {
        report = report.witness(to_json(w));
    }
    Ok((report, code))
}

fn eval_dsl(expr: &str, x: &[i64], y: &[i64], dxy: u64) -> Result<Outcome, CliError> {
    let e = parse_cross_expr(expr).map_err(|err| CliError::Usage(format!("cannot parse `{expr}`: {err}")))?;
    match eval_cross_expr(&e, x, y, Dist(dxy)) {
        Ok(v) => Ok(Outcome { stdout: format!("{}\n", v.0), code: exit::OK }),
        Err(EvalError::BelowFloor(v)) => {
            eprintln!("value {v} is below the floor of one quantum");
            Ok(Outcome { stdout: format!("{v}\n"), code: exit::NEGATIVE })
        }
        Err(err) => Err(CliError::Usage(err.to_string())),
    }
}

fn bench(n: usize, threads: usize, seed: u64) -> Result<Run, CliError> {
    if n > 4096 {
        return Err(CliError::Usage(format!("--n {n} exceeds the cap of 4096")));
    }
    let config = json!({ "command": "bench", "n": n, "threads": threads, "seed": seed });
    let r = bench_minplus(n, threads, seed).map_err(|e| CliError::Usage(e.to_string()))?;
    let metrics = json!({ "n": r.n, "threads": r.threads, "seed": r.seed, "checksum": r.checksum });
    let mut report = Report::new("bench", config, "ok").metrics(metrics);
    report.timings = Some(json!({ "elapsed_ns": r.elapsed_ns, "ns_per_op": r.ns_per_op }));
    Ok((report, exit::OK))
}
