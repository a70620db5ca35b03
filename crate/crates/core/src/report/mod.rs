//! Writing audit artifacts: CSV tables, JSON reports, SVG figures, and a
//! manifest that pins every input and output by SHA-256.
//!
//! Files are written to a temporary sibling and renamed into place, so a
//! crashed run never leaves a half-written artifact behind. Nothing
//! time-dependent goes into any output; identical inputs and configuration
//! give byte-identical directories.

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::pipeline::Audit;
use crate::{Error, Result};

pub mod svg;
pub mod tables;

pub use tables::{
    chasing_csv, consistency_csv, estimates_csv, exclusions_csv, funnel_csv, refinement_csv,
    test_power_csv, upper_bound_csv,
};

pub const TOOL: &str = "stataudit";
pub const VERSION: &str = env!("CARGO_PKG_VERSION");

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Csv,
    Json,
    Svg,
}

impl Format {
    pub const ALL: [Format; 3] = [Format::Csv, Format::Json, Format::Svg];
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

pub fn digest_file(path: &Path) -> Result<String> {
    let bytes = fs::read(path).map_err(|e| Error::io(path, e))?;
    Ok(sha256_hex(&bytes))
}

/// Write via a temporary file in the same directory and rename over the
/// target.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> Result<()> {
    let name = path
        .file_name()
        .ok_or_else(|| Error::Invalid(format!("{} is not a file path", path.display())))?;
    let tmp = path.with_file_name(format!(".{}.tmp", name.to_string_lossy()));
    fs::write(&tmp, bytes).map_err(|e| Error::io(&tmp, e))?;
    fs::rename(&tmp, path).map_err(|e| {
        let _ = fs::remove_file(&tmp);
        Error::io(path, e)
    })
}

fn to_json<T: Serialize>(value: &T) -> Result<Vec<u8>> {
    let mut v = serde_json::to_vec_pretty(value)?;
    v.push(b'\n');
    Ok(v)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Manifest {
    pub tool: String,
    pub version: String,
    pub command: String,
    /// SHA-256 over the command, configuration, and input digests.
    pub run_id: String,
    pub config: serde_json::Value,
    pub seeds: Vec<u64>,
    /// Input name → SHA-256.
    pub inputs: BTreeMap<String, String>,
    /// Output file (relative to the run directory) → SHA-256.
    pub outputs: BTreeMap<String, String>,
}

impl Manifest {
    pub fn read(dir: &Path) -> Result<Manifest> {
        let p = dir.join("manifest.json");
        let bytes = fs::read(&p).map_err(|e| Error::io(&p, e))?;
        Ok(serde_json::from_slice(&bytes)?)
    }
}

pub fn run_id(
    command: &str,
    config: &serde_json::Value,
    inputs: &BTreeMap<String, String>,
) -> String {
    let key = serde_json::json!({
        "tool": TOOL,
        "version": VERSION,
        "command": command,
        "config": config,
        "inputs": inputs,
    });
    sha256_hex(key.to_string().as_bytes())
}

/// Collects the outputs of one run in a directory and seals them with a
/// manifest.
#[derive(Debug)]
pub struct RunWriter {
    dir: PathBuf,
    outputs: BTreeMap<String, String>,
}

impl RunWriter {
    pub fn create(dir: &Path) -> Result<Self> {
        fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
        Ok(RunWriter { dir: dir.to_path_buf(), outputs: BTreeMap::new() })
    }

    pub fn dir(&self) -> &Path {
        &self.dir
    }

    pub fn write(&mut self, name: &str, bytes: &[u8]) -> Result<()> {
        write_atomic(&self.dir.join(name), bytes)?;
        self.outputs.insert(name.to_string(), sha256_hex(bytes));
        Ok(())
    }

    pub fn write_json<T: Serialize>(&mut self, name: &str, value: &T) -> Result<()> {
        self.write(name, &to_json(value)?)
    }

    pub fn outputs(&self) -> &BTreeMap<String, String> {
        &self.outputs
    }

    /// Write `manifest.json` last, after every listed output is in place.
    pub fn finish<C: Serialize>(
        self,
        command: &str,
        config: &C,
        seeds: Vec<u64>,
        inputs: BTreeMap<String, String>,
    ) -> Result<Manifest> {
        let config = serde_json::to_value(config)?;
        let manifest = Manifest {
            tool: TOOL.to_string(),
            version: VERSION.to_string(),
            command: command.to_string(),
            run_id: run_id(command, &config, &inputs),
            config,
            seeds,
            inputs,
            outputs: self.outputs,
        };
        write_atomic(&self.dir.join("manifest.json"), &to_json(&manifest)?)?;
        Ok(manifest)
    }
}

/// Every artifact of an audit in the requested formats. `audit.json` holds
/// the whole run and is what `report` re-renders from.
pub fn write_audit(audit: &Audit, w: &mut RunWriter, formats: &[Format]) -> Result<()> {
    if formats.contains(&Format::Json) {
        w.write_json("audit.json", audit)?;
        w.write_json("bias.json", &audit.bias)?;
        w.write_json("summary.json", &audit.summary)?;
    }
    if formats.contains(&Format::Csv) {
        w.write("exclusions.csv", &exclusions_csv(&audit.exclusion)?)?;
        w.write("refinement.csv", &refinement_csv(&audit.exclusion)?)?;
        w.write("consistency.csv", &consistency_csv(&audit.consistency)?)?;
        w.write("estimates.csv", &estimates_csv(&audit.estimates, &audit.magnitudes)?)?;
        w.write("power_per_test.csv", &test_power_csv(&audit.test_power)?)?;
        w.write("power_upper_bound.csv", &upper_bound_csv(&audit.upper_bound)?)?;
        w.write("funnel.csv", &funnel_csv(&audit.bias.funnel)?)?;
        w.write("chasing.csv", &chasing_csv(&audit.bias.chasing)?)?;
    }
    if formats.contains(&Format::Svg) {
        w.write("caterpillar.svg", svg::caterpillar(&audit.estimates).as_bytes())?;
        w.write("funnel.svg", svg::funnel(&audit.bias.funnel).as_bytes())?;
        w.write("power.svg", svg::power(&audit.upper_bound).as_bytes())?;
        w.write("chasing.svg", svg::chasing(&audit.bias.chasing).as_bytes())?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::pipeline::{run_audit, AuditConfig};
    use crate::sim::{simulate_field, FieldConfig};

    #[test]
    fn digest_matches_known_vector() {
        assert_eq!(
            sha256_hex(b"abc"),
            "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad"
        );
    }

    #[test]
    fn atomic_write_leaves_no_temporary() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("x.csv");
        write_atomic(&p, b"a\n").unwrap();
        write_atomic(&p, b"b\n").unwrap();
        assert_eq!(fs::read(&p).unwrap(), b"b\n");
        assert_eq!(fs::read_dir(dir.path()).unwrap().count(), 1);
    }

    #[test]
    fn audit_artifacts_are_reproducible() {
        let field = simulate_field(&FieldConfig { n_papers: 20, ..FieldConfig::default() }).unwrap();
        let audit = run_audit(&field.corpus, &AuditConfig::default()).unwrap();
        let run = |dir: &Path| {
            let mut w = RunWriter::create(dir).unwrap();
            write_audit(&audit, &mut w, &Format::ALL).unwrap();
            w.finish("audit", &audit.config, vec![], BTreeMap::new()).unwrap()
        };
        let (a, b) = (tempfile::tempdir().unwrap(), tempfile::tempdir().unwrap());
        let (ma, mb) = (run(a.path()), run(b.path()));
        assert_eq!(ma, mb);
        assert_eq!(ma.outputs.len(), 15);
        for name in ma.outputs.keys() {
            assert_eq!(digest_file(&a.path().join(name)).unwrap(), ma.outputs[name]);
        }
        assert_eq!(Manifest::read(a.path()).unwrap(), ma);
        let back: Audit = serde_json::from_slice(&fs::read(a.path().join("audit.json")).unwrap()).unwrap();
        assert_eq!(back.estimates.len(), audit.estimates.len());
    }
}
