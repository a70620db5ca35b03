use std::collections::BTreeMap;
use std::fs;
use std::path::Path;

use anyhow::{Context, Result};
use serde::Serialize;
use serde_json::json;

use stataudit::apa::{check_consistency, parse_statistics, ConsistencyStatus, ReportedTest, SourceSpan};
use stataudit::corpus::{
    apply_exclusions, ingest_dir, write_papers_csv, write_tests_csv, Corpus, IngestDiagnostic,
};
use stataudit::effect::ThresholdTable;
use stataudit::pipeline::{
    estimate_all, power_table, run_audit, upper_bound_table, Audit, AuditConfig, BiasReport,
};
use stataudit::report::{self, digest_file, svg, Format, RunWriter};
use stataudit::sim::{simulate_field, FieldConfig};

use crate::{AnalysisArgs, Cli, Command};

pub fn run(cli: Cli) -> Result<()> {
    if let Some(n) = cli.workers {
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .context("configuring the worker pool")?;
    }
    let requested: Vec<Format> = cli.format.iter().map(|&f| f.into()).collect();
    let formats = |supported: &[Format]| -> Vec<Format> {
        if requested.is_empty() {
            supported.to_vec()
        } else {
            supported.iter().copied().filter(|f| requested.contains(f)).collect()
        }
    };
    let out = cli.out.as_path();
    match cli.command {
        Command::Extract { inputs, alpha } => {
            extract(&inputs, alpha, out, &formats(&[Format::Csv, Format::Json]))
        }
        Command::Audit { corpus, analysis } => audit(&corpus, &analysis, out, &formats(&Format::ALL)),
        Command::Power { corpus, analysis, upper_bound, per_test } => {
            let both = !upper_bound && !per_test;
            power(&corpus, &analysis, upper_bound || both, per_test || both, out, &formats(&Format::ALL))
        }
        Command::Bias { corpus, analysis, funnel, winners_curse, chasing, mcc_contingency } => {
            let all = !(funnel || winners_curse || chasing || mcc_contingency);
            let sel = BiasSelection {
                funnel: funnel || all,
                winners_curse: winners_curse || all,
                chasing: chasing || all,
                mcc_contingency: mcc_contingency || all,
            };
            bias(&corpus, &analysis, sel, out, &formats(&Format::ALL))
        }
        Command::Simulate { config, seed } => {
            simulate(&config, seed, out, &formats(&[Format::Csv, Format::Json]))
        }
        Command::Report { run } => rerender(&run, out, &formats(&Format::ALL)),
    }
}

fn file_name(p: &Path) -> String {
    p.file_name().map_or_else(|| p.display().to_string(), |n| n.to_string_lossy().into_owned())
}

fn jsonl<T: Serialize>(items: &[T]) -> Result<Vec<u8>> {
    let mut buf = Vec::new();
    for item in items {
        serde_json::to_writer(&mut buf, item)?;
        buf.push(b'\n');
    }
    Ok(buf)
}

fn tag<T: Serialize>(v: &T) -> String {
    serde_json::to_value(v)
        .ok()
        .and_then(|v| v.as_str().map(str::to_string))
        .unwrap_or_default()
}

/// Ingest a corpus directory and digest exactly the files that were read.
fn load_corpus(dir: &Path) -> Result<(Corpus, Vec<IngestDiagnostic>, BTreeMap<String, String>)> {
    let (corpus, diags) =
        ingest_dir(dir).with_context(|| format!("reading corpus {}", dir.display()))?;
    let mut inputs = BTreeMap::new();
    let papers = ["papers.csv", "papers.json"].into_iter().find(|n| dir.join(n).exists());
    let tests = if dir.join("tests.csv").exists() || !dir.join("tests.json").exists() {
        "tests.csv"
    } else {
        "tests.json"
    };
    for name in papers.into_iter().chain([tests]) {
        inputs.insert(name.to_string(), digest_file(&dir.join(name))?);
    }
    Ok((corpus, diags, inputs))
}

fn audit_config(a: &AnalysisArgs) -> Result<AuditConfig> {
    let thresholds = match &a.thresholds {
        Some(p) => {
            let bytes = fs::read(p).with_context(|| format!("reading {}", p.display()))?;
            serde_json::from_slice::<ThresholdTable>(&bytes)
                .with_context(|| format!("parsing thresholds {}", p.display()))?
        }
        None => ThresholdTable::default(),
    };
    let cfg = AuditConfig { alpha: a.alpha, thresholds, mcc: a.mcc.into(), ..AuditConfig::default() };
    cfg.validate()?;
    Ok(cfg)
}

#[derive(Serialize)]
struct Extracted<'a> {
    file: String,
    #[serde(flatten)]
    test: &'a ReportedTest,
    apa: String,
    p_recomputed: Option<f64>,
    status: Option<ConsistencyStatus>,
    note: Option<String>,
}

#[derive(Serialize)]
struct ExtractDiagnostic<'a> {
    file: String,
    span: SourceSpan,
    fragment: &'a str,
    reason: &'a str,
}

const EXTRACT_COLUMNS: &[&str] = &[
    "file", "start", "end", "statistic", "df1", "df2", "n", "value", "p_comparator", "p_reported",
    "tails", "p_recomputed", "status", "apa",
];

fn extract(inputs: &[std::path::PathBuf], alpha: f64, out: &Path, formats: &[Format]) -> Result<()> {
    if !(alpha > 0.0 && alpha < 1.0) {
        return Err(stataudit::Error::Invalid(format!("alpha {alpha} outside (0, 1)")).into());
    }
    let mut digests = BTreeMap::new();
    let mut outcomes = Vec::new();
    for path in inputs {
        let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
        digests.insert(path.display().to_string(), report::sha256_hex(text.as_bytes()));
        outcomes.push((file_name(path), parse_statistics(&text)));
    }

    let mut records = Vec::new();
    let mut diagnostics = Vec::new();
    for (file, outcome) in &outcomes {
        for t in &outcome.tests {
            let (verdict, note) = match check_consistency(t, alpha) {
                Ok(v) => (Some(v), None),
                Err(e) => (None, Some(e.to_string())),
            };
            records.push(Extracted {
                file: file.clone(),
                test: t,
                apa: t.to_string(),
                p_recomputed: verdict.map(|v| v.p_recomputed),
                status: verdict.map(|v| v.status),
                note,
            });
        }
        for d in &outcome.diagnostics {
            diagnostics.push(ExtractDiagnostic {
                file: file.clone(),
                span: d.span,
                fragment: &d.fragment,
                reason: &d.reason,
            });
        }
    }

    let mut w = RunWriter::create(out)?;
    w.write("diagnostics.jsonl", &jsonl(&diagnostics)?)?;
    if formats.contains(&Format::Json) {
        w.write("extracted.jsonl", &jsonl(&records)?)?;
    }
    if formats.contains(&Format::Csv) {
        let opt = |x: Option<f64>| x.map(|v| v.to_string()).unwrap_or_default();
        let mut csv = csv::Writer::from_writer(Vec::new());
        csv.write_record(EXTRACT_COLUMNS)?;
        for r in &records {
            let span = r.test.source_span;
            csv.write_record([
                r.file.clone(),
                span.map(|s| s.start.to_string()).unwrap_or_default(),
                span.map(|s| s.end.to_string()).unwrap_or_default(),
                r.test.statistic.as_str().to_string(),
                opt(r.test.df1),
                opt(r.test.df2),
                r.test.sample_n.map(|n| n.to_string()).unwrap_or_default(),
                r.test.value.to_string(),
                r.test.p_comparator.as_str().to_string(),
                opt(r.test.p_reported),
                tag(&r.test.tails),
                opt(r.p_recomputed),
                r.status.map(|s| tag(&s)).unwrap_or_default(),
                r.apa.clone(),
            ])?;
        }
        w.write("extracted.csv", &csv.into_inner()?)?;
    }
    let errors = records.iter().filter(|r| matches!(r.status, Some(ConsistencyStatus::ComputationError | ConsistencyStatus::DecisionError))).count();
    w.finish("extract", &json!({ "alpha": alpha, "formats": formats }), vec![], digests)?;
    println!(
        "extracted {} statistics from {} files ({} inconsistent, {} diagnostics) into {}",
        records.len(),
        inputs.len(),
        errors,
        diagnostics.len(),
        out.display()
    );
    Ok(())
}

fn audit(corpus_dir: &Path, args: &AnalysisArgs, out: &Path, formats: &[Format]) -> Result<()> {
    let cfg = audit_config(args)?;
    let (corpus, diags, inputs) = load_corpus(corpus_dir)?;
    let audit = run_audit(&corpus, &cfg)?;
    let mut w = RunWriter::create(out)?;
    w.write("ingest_diagnostics.jsonl", &jsonl(&diags)?)?;
    report::write_audit(&audit, &mut w, formats)?;
    w.finish("audit", &json!({ "audit": cfg, "formats": formats }), vec![], inputs)?;
    println!(
        "audited {} tests ({} retained, {} estimates) from {} papers into {}",
        audit.exclusion.total,
        audit.exclusion.retained.len(),
        audit.estimates.len(),
        audit.summary.papers,
        out.display()
    );
    Ok(())
}

fn power(
    corpus_dir: &Path,
    args: &AnalysisArgs,
    upper_bound: bool,
    per_test: bool,
    out: &Path,
    formats: &[Format],
) -> Result<()> {
    let cfg = audit_config(args)?;
    let (corpus, diags, inputs) = load_corpus(corpus_dir)?;
    let ub = if upper_bound { upper_bound_table(&corpus, &cfg.thresholds, cfg.alpha)? } else { Vec::new() };
    let rows = if per_test {
        let ex = apply_exclusions(&corpus);
        let est = estimate_all(&ex, cfg.alpha)?;
        let mcc = cfg.mcc != stataudit::pipeline::MccMode::Off;
        power_table(&ex.retained, &est, &cfg.thresholds, cfg.alpha, mcc)?
    } else {
        Vec::new()
    };

    let mut w = RunWriter::create(out)?;
    w.write("ingest_diagnostics.jsonl", &jsonl(&diags)?)?;
    if formats.contains(&Format::Csv) {
        if upper_bound {
            w.write("power_upper_bound.csv", &report::upper_bound_csv(&ub)?)?;
        }
        if per_test {
            w.write("power_per_test.csv", &report::test_power_csv(&rows)?)?;
        }
    }
    if formats.contains(&Format::Json) {
        w.write_json("power.json", &json!({ "upper_bound": ub, "per_test": rows }))?;
    }
    if formats.contains(&Format::Svg) && upper_bound {
        w.write("power.svg", svg::power(&ub).as_bytes())?;
    }
    let config = json!({
        "alpha": cfg.alpha,
        "thresholds": cfg.thresholds,
        "mcc": cfg.mcc,
        "upper_bound": upper_bound,
        "per_test": per_test,
        "formats": formats,
    });
    w.finish("power", &config, vec![], inputs)?;
    println!("{} upper-bound rows, {} per-test rows into {}", ub.len(), rows.len(), out.display());
    Ok(())
}

#[derive(Debug, Clone, Copy, Serialize)]
struct BiasSelection {
    funnel: bool,
    winners_curse: bool,
    chasing: bool,
    mcc_contingency: bool,
}

fn bias(corpus_dir: &Path, args: &AnalysisArgs, sel: BiasSelection, out: &Path, formats: &[Format]) -> Result<()> {
    let cfg = audit_config(args)?;
    let (corpus, diags, inputs) = load_corpus(corpus_dir)?;
    let b = run_audit(&corpus, &cfg)?.bias;
    let report = BiasReport {
        funnel: if sel.funnel { b.funnel } else { Vec::new() },
        begg: b.begg.filter(|_| sel.funnel),
        winners_curse: b.winners_curse.filter(|_| sel.winners_curse),
        contingency: b.contingency.filter(|_| sel.mcc_contingency),
        chasing: if sel.chasing { b.chasing } else { Vec::new() },
        skipped: b.skipped,
    };

    let mut w = RunWriter::create(out)?;
    w.write("ingest_diagnostics.jsonl", &jsonl(&diags)?)?;
    if formats.contains(&Format::Json) {
        w.write_json("bias.json", &report)?;
    }
    if formats.contains(&Format::Csv) {
        if sel.funnel {
            w.write("funnel.csv", &report::funnel_csv(&report.funnel)?)?;
        }
        if sel.chasing {
            w.write("chasing.csv", &report::chasing_csv(&report.chasing)?)?;
        }
    }
    if formats.contains(&Format::Svg) {
        if sel.funnel {
            w.write("funnel.svg", svg::funnel(&report.funnel).as_bytes())?;
        }
        if sel.chasing {
            w.write("chasing.svg", svg::chasing(&report.chasing).as_bytes())?;
        }
    }
    w.finish("bias", &json!({ "audit": cfg, "selection": sel, "formats": formats }), vec![], inputs)?;
    if let Some(begg) = &report.begg {
        println!("funnel asymmetry: tau = {:.3}, p = {:.4} (N = {})", begg.tau, begg.p_value, begg.n);
    }
    for s in &report.skipped {
        println!("skipped {s}");
    }
    Ok(())
}

fn simulate(config: &Path, seed: Option<u64>, out: &Path, formats: &[Format]) -> Result<()> {
    let bytes = fs::read(config).with_context(|| format!("reading {}", config.display()))?;
    let mut cfg: FieldConfig = serde_json::from_slice(&bytes)
        .with_context(|| format!("parsing field configuration {}", config.display()))?;
    if let Some(s) = seed {
        cfg.seed = s;
    }
    let field = simulate_field(&cfg)?;

    let mut w = RunWriter::create(out)?;
    if formats.contains(&Format::Csv) {
        let mut papers = Vec::new();
        write_papers_csv(&field.corpus.papers, &mut papers)?;
        let mut tests = Vec::new();
        write_tests_csv(&field.corpus.tests, &mut tests)?;
        w.write("papers.csv", &papers)?;
        w.write("tests.csv", &tests)?;
    }
    if formats.contains(&Format::Json) {
        w.write_json("papers.json", &field.corpus.papers)?;
        w.write_json("tests.json", &field.corpus.tests)?;
        w.write_json("studies.json", &field.studies)?;
    }
    let inputs = BTreeMap::from([(file_name(config), report::sha256_hex(&bytes))]);
    let seed = cfg.seed;
    w.finish("simulate", &json!({ "field": cfg, "formats": formats }), vec![seed], inputs)?;
    println!(
        "simulated {} published studies from {} candidates into {}",
        field.studies.len(),
        field.candidates_drawn,
        out.display()
    );
    Ok(())
}

fn rerender(run: &Path, out: &Path, formats: &[Format]) -> Result<()> {
    let path = run.join("audit.json");
    let bytes = fs::read(&path).with_context(|| format!("reading {}", path.display()))?;
    let audit: Audit = serde_json::from_slice(&bytes)
        .with_context(|| format!("parsing {}", path.display()))?;
    let mut w = RunWriter::create(out)?;
    report::write_audit(&audit, &mut w, formats)?;
    let inputs = BTreeMap::from([("audit.json".to_string(), report::sha256_hex(&bytes))]);
    w.finish("report", &json!({ "formats": formats }), vec![], inputs)?;
    println!("rendered {} artifacts into {}", w_count(formats), out.display());
    Ok(())
}

fn w_count(formats: &[Format]) -> usize {
    formats
        .iter()
        .map(|f| match f {
            Format::Csv => 8,
            Format::Json => 3,
            Format::Svg => 4,
        })
        .sum()
}
