use std::collections::HashMap;
use std::fs::File;
use std::io::{Read, Write};
use std::path::Path;

use serde::Serialize;

use super::model::{CodedTest, Corpus, Design, PaperRecord};
use crate::apa::{decimals_of, Comparator, ReportedTest, Statistic};
use crate::{Error, Result};

pub const PAPER_COLUMNS: &[&str] = &["paper_id", "total_n", "mturk", "mcc", "venue", "year"];

pub const TEST_COLUMNS: &[&str] = &[
    "test_id", "paper_id", "family_id", "statistic", "df1", "df2", "n_value", "value",
    "p_reported", "p_comparator", "n1", "n2", "m1", "m2", "sd1", "sd2", "design", "cont_rows",
    "cont_cols",
];

/// Optional refinement columns; files without them ingest with defaults.
pub const TEST_EXTRA_COLUMNS: &[&str] = &["sample_design", "correlation", "proportion", "ways"];

/// A record that failed validation. `line` is 1-based and counts the header.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct IngestDiagnostic {
    pub file: String,
    pub line: u64,
    pub message: String,
}

struct Row<'a> {
    cols: &'a HashMap<String, usize>,
    rec: &'a csv::StringRecord,
}

type Field<T> = std::result::Result<T, String>;

impl Row<'_> {
    fn raw(&self, name: &str) -> Option<&str> {
        let v = self.rec.get(*self.cols.get(name)?)?.trim();
        (!v.is_empty()).then_some(v)
    }

    fn text(&self, name: &str) -> String {
        self.raw(name).unwrap_or_default().to_string()
    }

    fn parse<T: std::str::FromStr>(&self, name: &str) -> Field<Option<T>> {
        self.raw(name)
            .map(|v| v.parse::<T>().map_err(|_| format!("{name}: cannot read '{v}'")))
            .transpose()
    }

    fn real(&self, name: &str) -> Field<Option<f64>> {
        match self.parse::<f64>(name)? {
            Some(v) if !v.is_finite() => Err(format!("{name}: must be finite")),
            v => Ok(v),
        }
    }

    fn flag(&self, name: &str) -> Field<Option<bool>> {
        match self.raw(name) {
            None => Ok(None),
            Some("1") => Ok(Some(true)),
            Some("0") => Ok(Some(false)),
            Some(v) => Err(format!("{name}: expected 0 or 1, got '{v}'")),
        }
    }

    fn design(&self, name: &str) -> Field<Option<Design>> {
        self.raw(name)
            .map(|v| Design::parse(v).ok_or_else(|| format!("{name}: unknown design '{v}'")))
            .transpose()
    }
}

fn columns(
    rdr: &mut csv::Reader<impl Read>,
    required: &[&str],
    file: &str,
) -> Result<Option<HashMap<String, usize>>> {
    let headers = rdr.headers()?.clone();
    if headers.is_empty() {
        return Ok(None);
    }
    let cols: HashMap<String, usize> =
        headers.iter().enumerate().map(|(i, h)| (h.trim().to_string(), i)).collect();
    if let Some(missing) = required.iter().find(|c| !cols.contains_key(**c)) {
        return Err(Error::Invalid(format!("{file}: missing column '{missing}'")));
    }
    Ok(Some(cols))
}

fn reader<R: Read>(input: R) -> csv::Reader<R> {
    csv::ReaderBuilder::new().flexible(true).from_reader(input)
}

fn paper_row(row: &Row) -> Field<PaperRecord> {
    let paper = PaperRecord {
        paper_id: row.text("paper_id"),
        total_n: row.parse("total_n")?,
        mturk: row.flag("mturk")?,
        mcc: row.flag("mcc")?,
        venue: row.raw("venue").map(str::to_string),
        year: row.parse("year")?,
    };
    if paper.paper_id.is_empty() {
        return Err("paper_id is required".into());
    }
    if paper.total_n == Some(0) {
        return Err("total_n must be at least 1".into());
    }
    Ok(paper)
}

fn test_row(row: &Row) -> Field<CodedTest> {
    let stat_raw = row.raw("statistic").ok_or("statistic is required")?;
    let statistic =
        Statistic::parse(stat_raw).ok_or_else(|| format!("unknown statistic '{stat_raw}'"))?;
    let value = row.real("value")?.ok_or("value is required")?;
    let cmp_raw = row.raw("p_comparator").ok_or("p_comparator is required")?;
    let p_comparator =
        Comparator::parse(cmp_raw).ok_or_else(|| format!("unknown comparator '{cmp_raw}'"))?;
    let p_reported = row.real("p_reported")?;
    let p_decimals = row
        .raw("p_reported")
        .map(|s| s.split_once('.').map_or(0, |(_, f)| f.len() as u32));

    let mut test = ReportedTest::new(statistic, row.real("df1")?, row.real("df2")?, value);
    test.sample_n = row.parse("n_value")?;
    test.p_reported = p_reported;
    test.p_decimals = p_decimals;
    test.p_comparator = p_comparator;

    let mut coded = CodedTest::new(
        &row.text("test_id"),
        &row.text("paper_id"),
        &row.text("family_id"),
        test,
    );
    coded.n1 = row.parse("n1")?;
    coded.n2 = row.parse("n2")?;
    coded.m1 = row.real("m1")?;
    coded.m2 = row.real("m2")?;
    coded.sd1 = row.real("sd1")?;
    coded.sd2 = row.real("sd2")?;
    coded.design = row.design("design")?.unwrap_or_default();
    coded.contingency_shape = match (row.parse("cont_rows")?, row.parse("cont_cols")?) {
        (Some(r), Some(c)) => Some((r, c)),
        (None, None) => None,
        _ => return Err("cont_rows and cont_cols must be coded together".into()),
    };
    coded.sample_design = row.design("sample_design")?;
    coded.correlation = row.real("correlation")?;
    coded.proportion = row.flag("proportion")?.unwrap_or(false);
    coded.ways = row.parse("ways")?;
    coded.validate()?;
    Ok(coded)
}

fn read_rows<T, R: Read>(
    input: R,
    file: &str,
    required: &[&str],
    build: impl Fn(&Row) -> Field<T>,
) -> Result<(Vec<T>, Vec<IngestDiagnostic>)> {
    let mut rdr = reader(input);
    let Some(cols) = columns(&mut rdr, required, file)? else {
        return Ok((Vec::new(), Vec::new()));
    };
    let mut out = Vec::new();
    let mut diags = Vec::new();
    for rec in rdr.records() {
        let rec = rec?;
        let line = rec.position().map_or(0, |p| p.line());
        match build(&Row { cols: &cols, rec: &rec }) {
            Ok(v) => out.push(v),
            Err(message) => diags.push(IngestDiagnostic { file: file.to_string(), line, message }),
        }
    }
    Ok((out, diags))
}

pub fn read_papers_csv<R: Read>(
    input: R,
    file: &str,
) -> Result<(Vec<PaperRecord>, Vec<IngestDiagnostic>)> {
    read_rows(input, file, PAPER_COLUMNS, paper_row)
}

pub fn read_tests_csv<R: Read>(
    input: R,
    file: &str,
) -> Result<(Vec<CodedTest>, Vec<IngestDiagnostic>)> {
    read_rows(input, file, TEST_COLUMNS, test_row)
}

fn read_json<T: serde::de::DeserializeOwned>(
    path: &Path,
    validate: impl Fn(&T) -> Field<()>,
) -> Result<(Vec<T>, Vec<IngestDiagnostic>)> {
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    let values: Vec<serde_json::Value> = serde_json::from_reader(file)?;
    let mut out = Vec::new();
    let mut diags = Vec::new();
    for (i, v) in values.into_iter().enumerate() {
        let checked = serde_json::from_value::<T>(v)
            .map_err(|e| e.to_string())
            .and_then(|t| validate(&t).map(|_| t));
        match checked {
            Ok(t) => out.push(t),
            Err(message) => diags.push(IngestDiagnostic {
                file: path.display().to_string(),
                line: i as u64 + 1,
                message,
            }),
        }
    }
    Ok((out, diags))
}

/// Ingest `papers.csv` and `tests.csv` (or their `.json` mirrors) from a
/// directory. A missing papers file yields no paper records.
pub fn ingest_dir(dir: &Path) -> Result<(Corpus, Vec<IngestDiagnostic>)> {
    let mut diags = Vec::new();
    let open = |name: &str| {
        let p = dir.join(name);
        File::open(&p).map_err(|e| Error::io(&p, e))
    };
    let papers = if dir.join("papers.csv").exists() {
        read_papers_csv(open("papers.csv")?, "papers.csv")?
    } else if dir.join("papers.json").exists() {
        read_json(&dir.join("papers.json"), |_: &PaperRecord| Ok(()))?
    } else {
        (Vec::new(), Vec::new())
    };
    diags.extend(papers.1);
    let tests = if dir.join("tests.csv").exists() || !dir.join("tests.json").exists() {
        read_tests_csv(open("tests.csv")?, "tests.csv")?
    } else {
        read_json(&dir.join("tests.json"), |t: &CodedTest| t.validate())?
    };
    diags.extend(tests.1);
    Ok((Corpus { papers: papers.0, tests: tests.0 }, diags))
}

fn opt<T: ToString>(v: Option<T>) -> String {
    v.map(|v| v.to_string()).unwrap_or_default()
}

fn flag(v: Option<bool>) -> String {
    opt(v.map(|b| if b { "1" } else { "0" }))
}

pub fn write_papers_csv<W: Write>(papers: &[PaperRecord], out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(PAPER_COLUMNS)?;
    for p in papers {
        w.write_record([
            p.paper_id.clone(),
            opt(p.total_n),
            flag(p.mturk),
            flag(p.mcc),
            opt(p.venue.clone()),
            opt(p.year),
        ])?;
    }
    w.flush().map_err(|e| Error::io("<csv>", e))?;
    Ok(())
}

pub fn write_tests_csv<W: Write>(tests: &[CodedTest], out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(TEST_COLUMNS.iter().chain(TEST_EXTRA_COLUMNS))?;
    for t in tests {
        let r = &t.test;
        let p = r.p_reported.map(|p| {
            let d = r.p_decimals.unwrap_or_else(|| decimals_of(p));
            format!("{:.*}", d as usize, p)
        });
        w.write_record([
            t.test_id.clone(),
            t.paper_id.clone(),
            t.family_id.clone(),
            r.statistic.as_str().to_string(),
            opt(r.df1),
            opt(r.df2),
            opt(r.sample_n),
            r.value.to_string(),
            opt(p),
            r.p_comparator.as_str().to_string(),
            opt(t.n1),
            opt(t.n2),
            opt(t.m1),
            opt(t.m2),
            opt(t.sd1),
            opt(t.sd2),
            t.design.as_str().to_string(),
            opt(t.contingency_shape.map(|s| s.0)),
            opt(t.contingency_shape.map(|s| s.1)),
            opt(t.sample_design.map(|d| d.as_str())),
            opt(t.correlation),
            if t.proportion { "1".into() } else { String::new() },
            opt(t.ways),
        ])?;
    }
    w.flush().map_err(|e| Error::io("<csv>", e))?;
    Ok(())
}

/// Write the corpus as `papers.csv` and `tests.csv` in `dir`.
pub fn write_csv(corpus: &Corpus, dir: &Path) -> Result<()> {
    let create = |name: &str| {
        let p = dir.join(name);
        File::create(&p).map_err(|e| Error::io(&p, e))
    };
    write_papers_csv(&corpus.papers, create("papers.csv")?)?;
    write_tests_csv(&corpus.tests, create("tests.csv")?)
}
