//! Serializable run configuration and report, plus the writers for the
//! on-disk artifacts (canonical JSON, CSV dumps, content hashes).
//!
//! A run is a pure function of its [`RunConfig`]: everything below is
//! deterministic, field order is fixed by the struct definitions, and the
//! report hash covers exactly the bytes of `report.json`. Wall-clock
//! metadata lives in `metadata.json`, which is excluded from hashing.

use std::collections::BTreeMap;
use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use krieger_core::analytics::{ConservativenessCertificate, SeriesVerdict, TypeVerdict};
use krieger_core::group::FolnerReport;
use krieger_core::sim::{
    Delta1Report, PointConfiguration, RatioSetEstimate, RnEstimate, SkellamSpec, TruncationBudget,
};
use krieger_core::system::SystemSpec;

pub type AnyError = Box<dyn std::error::Error + Send + Sync>;
pub type AnyResult<T> = std::result::Result<T, AnyError>;

/// Fully resolved inputs of a run. Flags and config-file values are merged
/// before this is built, so two runs with equal `RunConfig` are bit-identical.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunConfig {
    pub command: String,
    pub spec: SystemSpec,
    pub horizon: u64,
    pub samples: u64,
    pub n_blocks: u64,
    pub shell_radius: i64,
    pub seed: u64,
    /// Enumeration indices of the group elements under test.
    pub elements: Vec<u64>,
    /// Blocks whose tower counts are conditioned to zero (ratio-set runs).
    pub condition: Vec<u64>,
}

/// Optional JSON config file; explicit command-line flags override fields.
#[derive(Debug, Clone, Default, Deserialize)]
pub struct ConfigFile {
    pub horizon: Option<u64>,
    pub samples: Option<u64>,
    pub n_blocks: Option<u64>,
    pub shell_radius: Option<i64>,
    pub seed: Option<u64>,
    pub elements: Option<Vec<u64>>,
    pub condition: Option<Vec<u64>>,
}

impl ConfigFile {
    pub fn load(path: Option<&Path>) -> AnyResult<ConfigFile> {
        match path {
            None => Ok(ConfigFile::default()),
            Some(p) => {
                let text = fs::read_to_string(p)
                    .map_err(|e| format!("reading config {}: {e}", p.display()))?;
                Ok(serde_json::from_str(&text)?)
            }
        }
    }
}

/// Per-element certified series results.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ElementSeries {
    pub element_index: u64,
    pub shift: i64,
    pub chi: f64,
    pub l1: SeriesVerdict,
    pub quadratic: SeriesVerdict,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct AnalyticsReport {
    pub folner: FolnerReport,
    pub folner_horizon: u64,
    pub displacement: Vec<ElementSeries>,
    pub conservativeness: ConservativenessCertificate,
    /// Certified growth majorant `B_k` of the quadratic integral at probe
    /// depths — the quantity whose exponential enters the summability check.
    pub growth_profile: Vec<GrowthProbe>,
    pub hellinger_sum: SeriesVerdict,
    pub restricted_product_mass: SeriesVerdict,
    pub kakutani: SeriesVerdict,
    pub classification: TypeVerdict,
    pub classified_as: String,
    pub declared_kind: String,
    pub matches_declared: bool,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct GrowthProbe {
    pub k: u64,
    pub bound: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SkellamSection {
    pub window: SkellamSpec,
    pub delta1: Delta1Report,
    pub samples: u64,
    pub empirical_mean: f64,
    pub empirical_variance: f64,
    pub expected_mean: f64,
    pub expected_variance: f64,
    pub tv_distance: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SimulationReport {
    pub rn: RnEstimate,
    /// |mean − 1| ≤ 4·SE for the Radon–Nikodym unit-expectation check.
    pub rn_within_4se: bool,
    pub budget: TruncationBudget,
    pub skellam: Option<SkellamSection>,
    pub ratio_set: Option<RatioSetEstimate>,
    /// Set instead of `ratio_set` when the run produced no usable
    /// observations (exit code 2).
    pub ratio_set_undetermined: Option<String>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RunReport {
    pub config: RunConfig,
    pub analytics: Option<AnalyticsReport>,
    pub simulation: Option<SimulationReport>,
}

/// Wall-clock data, isolated from the deterministic report so hashes of
/// repeat runs agree.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RunMetadata {
    pub created_unix_ms: u128,
    pub elapsed_ms: u128,
    pub report_sha256: String,
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    let mut h = Sha256::new();
    h.update(bytes);
    let digest = h.finalize();
    let mut out = String::with_capacity(64);
    for b in digest {
        out.push_str(&format!("{b:02x}"));
    }
    out
}

/// Writes `report.json` and `metadata.json` into `dir`; returns the report
/// hash.
pub fn write_report(dir: &Path, report: &RunReport, elapsed_ms: u128) -> AnyResult<String> {
    fs::create_dir_all(dir)?;
    let mut bytes = serde_json::to_vec_pretty(report)?;
    bytes.push(b'\n');
    fs::write(dir.join("report.json"), &bytes)?;
    let hash = sha256_hex(&bytes);
    let created_unix_ms = std::time::SystemTime::now()
        .duration_since(std::time::UNIX_EPOCH)
        .map(|d| d.as_millis())
        .unwrap_or(0);
    let meta = RunMetadata { created_unix_ms, elapsed_ms, report_sha256: hash.clone() };
    let mut meta_bytes = serde_json::to_vec_pretty(&meta)?;
    meta_bytes.push(b'\n');
    fs::write(dir.join("metadata.json"), meta_bytes)?;
    Ok(hash)
}

pub fn read_report(dir: &Path) -> AnyResult<RunReport> {
    let text = fs::read_to_string(dir.join("report.json"))
        .map_err(|e| format!("reading {}/report.json: {e}", dir.display()))?;
    Ok(serde_json::from_str(&text)?)
}

/// `samples.csv`: one row per populated cell of the dumped configurations.
pub fn write_samples_csv(path: &Path, dumps: &[(u64, PointConfiguration)]) -> AnyResult<()> {
    let mut w = csv::Writer::from_path(path)?;
    w.write_record(["sample_id", "block", "level", "region", "count"])?;
    for (id, omega) in dumps {
        for (cell, count) in &omega.counts {
            w.write_record([
                id.to_string(),
                cell.block.to_string(),
                cell.level.to_string(),
                if cell.is_tower { "tower" } else { "shell" }.to_string(),
                count.to_string(),
            ])?;
        }
    }
    w.flush()?;
    Ok(())
}

/// One cocycle evaluation row of `cocycles.csv`.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CocycleRow {
    pub sample_id: u64,
    pub element_index: u64,
    pub shift: i64,
    /// `generator:exponent` pairs joined with `;` (empty for the identity).
    pub exponents: String,
    pub log_value: f64,
    pub truncation_valid: bool,
}

pub fn write_cocycles_csv(path: &Path, rows: &[CocycleRow]) -> AnyResult<()> {
    let mut w = csv::Writer::from_path(path)?;
    for row in rows {
        w.serialize(row)?;
    }
    w.flush()?;
    Ok(())
}

pub fn read_cocycles_csv(path: &Path) -> AnyResult<Vec<CocycleRow>> {
    let mut r = csv::Reader::from_path(path)?;
    let mut rows = Vec::new();
    for rec in r.deserialize() {
        rows.push(rec?);
    }
    Ok(rows)
}

pub fn write_theta_csv(path: &Path, counts: &BTreeMap<i64, u64>) -> AnyResult<()> {
    let mut w = csv::Writer::from_path(path)?;
    w.write_record(["theta", "count"])?;
    for (t, c) in counts {
        w.write_record([t.to_string(), c.to_string()])?;
    }
    w.flush()?;
    Ok(())
}

pub fn read_theta_csv(path: &Path) -> AnyResult<BTreeMap<i64, u64>> {
    let mut r = csv::Reader::from_path(path)?;
    let mut out = BTreeMap::new();
    for rec in r.records() {
        let rec = rec?;
        let t: i64 = rec.get(0).ok_or("missing theta column")?.parse()?;
        let c: u64 = rec.get(1).ok_or("missing count column")?.parse()?;
        out.insert(t, c);
    }
    Ok(out)
}
