//! Run directories: CSV traces, Q-table dumps, indicator tables, metadata
//! and a checksummed manifest.
//!
//! Floats are written in Rust's shortest round-trip form, so every CSV
//! parses back to bit-identical values.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::learner::{EpisodeTrace, SlotRecord};
use crate::pls::{ActionProfile, AgentAction, PlsPolicy};
use crate::utility::{AgentScore, UtilityBreakdown};

use super::experiment::{IndicatorCell, Metric, RelativeIndicatorReport, RunOutput};
use super::scenario::ScenarioConfig;

pub const TRACE_COLUMNS: [&str; 13] = [
    "slot",
    "agent",
    "policy",
    "config",
    "s",
    "q",
    "c",
    "delta",
    "utility",
    "network_utility",
    "policy_reward",
    "config_reward",
    "explored",
];

fn csv_err(path: &Path) -> impl Fn(csv::Error) -> Error + '_ {
    move |source| Error::Csv {
        path: path.to_path_buf(),
        source,
    }
}

fn parse_err(path: &Path, message: impl Into<String>) -> Error {
    Error::Parse {
        path: path.to_path_buf(),
        message: message.into(),
    }
}

/// One row per (slot, agent).
pub fn write_trace<W: Write>(trace: &EpisodeTrace, scenario: &ScenarioConfig, out: W) -> csv::Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(TRACE_COLUMNS)?;
    for s in &trace.slots {
        for (i, a) in s.breakdown.agents.iter().enumerate() {
            let action = s.profile[i];
            w.write_record([
                s.slot.to_string(),
                (i + 1).to_string(),
                scenario.policies[i][action.policy].name().to_string(),
                scenario.configs[i][action.config].label(),
                a.security.to_string(),
                a.qos.to_string(),
                a.cost.to_string(),
                a.delta.to_string(),
                a.utility.to_string(),
                s.breakdown.network_utility.to_string(),
                s.policy_rewards[i].to_string(),
                s.config_rewards[i].to_string(),
                s.explored[i].to_string(),
            ])?;
        }
    }
    w.flush()?;
    Ok(())
}

#[derive(Debug, Deserialize)]
struct TraceRow {
    slot: usize,
    agent: usize,
    policy: String,
    config: String,
    s: f64,
    q: f64,
    c: f64,
    delta: f64,
    utility: f64,
    network_utility: f64,
    policy_reward: f64,
    config_reward: f64,
    explored: bool,
}

/// Inverse of [`write_trace`]; labels are resolved against `scenario`.
pub fn read_trace(path: &Path, scenario: &ScenarioConfig) -> Result<EpisodeTrace> {
    let mut reader = csv::Reader::from_path(path).map_err(csv_err(path))?;
    let headers = reader.headers().map_err(csv_err(path))?.clone();
    if headers.iter().ne(TRACE_COLUMNS) {
        return Err(parse_err(path, format!("unexpected trace header {headers:?}")));
    }
    let n = scenario.agent_count();
    let mut slots: Vec<SlotRecord> = Vec::new();
    for row in reader.deserialize::<TraceRow>() {
        let row = row.map_err(csv_err(path))?;
        if row.agent == 0 || row.agent > n {
            return Err(parse_err(path, format!("agent {} out of range", row.agent)));
        }
        let i = row.agent - 1;
        let policy: PlsPolicy = row.policy.parse().map_err(|e: Error| parse_err(path, e.to_string()))?;
        let k = scenario.policies[i]
            .iter()
            .position(|p| *p == policy)
            .ok_or_else(|| parse_err(path, format!("policy {policy} not available to agent {}", row.agent)))?;
        let m = scenario.configs[i]
            .iter()
            .position(|c| c.label() == row.config)
            .ok_or_else(|| parse_err(path, format!("config {} not available to agent {}", row.config, row.agent)))?;
        if i == 0 {
            slots.push(SlotRecord {
                slot: row.slot,
                profile: ActionProfile(Vec::with_capacity(n)),
                breakdown: UtilityBreakdown {
                    agents: Vec::with_capacity(n),
                    network_utility: row.network_utility,
                },
                policy_rewards: Vec::with_capacity(n),
                config_rewards: Vec::with_capacity(n),
                explored: Vec::with_capacity(n),
            });
        }
        let record = slots
            .last_mut()
            .filter(|r| r.slot == row.slot && r.profile.len() == i)
            .ok_or_else(|| parse_err(path, format!("rows out of order at slot {} agent {}", row.slot, row.agent)))?;
        record.profile.0.push(AgentAction::new(k, m));
        record.breakdown.agents.push(AgentScore {
            security: row.s,
            qos: row.q,
            cost: row.c,
            delta: row.delta,
            utility: row.utility,
        });
        record.policy_rewards.push(row.policy_reward);
        record.config_rewards.push(row.config_reward);
        record.explored.push(row.explored);
    }
    if slots.iter().any(|s| s.profile.len() != n) {
        return Err(parse_err(path, "incomplete slot"));
    }
    Ok(EpisodeTrace { slots })
}

/// `slot,adaptive,<baseline policies…>` network-utility series.
pub fn write_network_utility<W: Write>(run: &RunOutput, out: W) -> csv::Result<()> {
    let mut w = csv::Writer::from_writer(out);
    let mut header = vec!["slot".to_string(), "adaptive".to_string()];
    header.extend(run.baselines.iter().map(|(p, _)| format!("baseline_{}", p.name())));
    w.write_record(&header)?;
    for (t, s) in run.trace.slots.iter().enumerate() {
        let mut row = vec![s.slot.to_string(), s.breakdown.network_utility.to_string()];
        row.extend(run.baselines.iter().map(|(_, b)| b.slots[t].breakdown.network_utility.to_string()));
        w.write_record(&row)?;
    }
    w.flush()?;
    Ok(())
}

/// `agent,baseline,metric,relative_indicator_percent`; undefined cells are
/// written as `undefined`.
pub fn write_report<W: Write>(report: &RelativeIndicatorReport, out: W) -> csv::Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["agent", "baseline", "metric", "relative_indicator_percent"])?;
    for c in &report.cells {
        w.write_record([
            c.agent.to_string(),
            c.baseline.name().to_string(),
            c.metric.name().to_string(),
            c.percent.map_or_else(|| "undefined".to_string(), |v| v.to_string()),
        ])?;
    }
    w.flush()?;
    Ok(())
}

pub fn read_report(path: &Path) -> Result<RelativeIndicatorReport> {
    let mut reader = csv::Reader::from_path(path).map_err(csv_err(path))?;
    let mut cells = Vec::new();
    for row in reader.records() {
        let row = row.map_err(csv_err(path))?;
        if row.len() != 4 {
            return Err(parse_err(path, "expected 4 columns"));
        }
        let bad = |what: &str| parse_err(path, format!("bad {what} `{}`", row.iter().collect::<Vec<_>>().join(",")));
        cells.push(IndicatorCell {
            agent: row[0].parse().map_err(|_| bad("agent"))?,
            baseline: row[1].parse().map_err(|_| bad("baseline"))?,
            metric: row[2].parse::<Metric>().map_err(|_| bad("metric"))?,
            percent: match &row[3] {
                "undefined" => None,
                v => Some(v.parse().map_err(|_| bad("percentage"))?),
            },
        });
    }
    Ok(RelativeIndicatorReport { cells })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ManifestEntry {
    pub path: String,
    pub bytes: u64,
    pub sha256: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Manifest {
    pub files: Vec<ManifestEntry>,
}

impl Manifest {
    pub fn load(dir: &Path) -> Result<Self> {
        let path = dir.join(MANIFEST);
        let text = fs::read_to_string(&path).map_err(|e| Error::io(&path, e))?;
        serde_json::from_str(&text).map_err(|e| parse_err(&path, e.to_string()))
    }

    /// Files whose content no longer matches the recorded checksum.
    pub fn verify(&self, dir: &Path) -> Result<Vec<String>> {
        let mut bad = Vec::new();
        for f in &self.files {
            let path = dir.join(&f.path);
            let bytes = fs::read(&path).map_err(|e| Error::io(&path, e))?;
            if sha256_hex(&bytes) != f.sha256 || bytes.len() as u64 != f.bytes {
                bad.push(f.path.clone());
            }
        }
        Ok(bad)
    }
}

pub const MANIFEST: &str = "manifest.json";

pub fn sha256_hex(bytes: &[u8]) -> String {
    Sha256::digest(bytes).iter().map(|b| format!("{b:02x}")).collect()
}

#[derive(Debug, Serialize)]
struct Metadata<'a> {
    scenario: String,
    mode: &'a str,
    seed: u64,
    crate_version: &'static str,
    slots: usize,
    episodes: usize,
    mean_network_utility: f64,
    greedy_actions: Vec<String>,
    timings: super::experiment::Timings,
}

fn write_file(dir: &Path, name: &str, bytes: &[u8], files: &mut Vec<ManifestEntry>) -> Result<()> {
    let path = dir.join(name);
    fs::write(&path, bytes).map_err(|e| Error::io(&path, e))?;
    files.push(ManifestEntry {
        path: name.to_string(),
        bytes: bytes.len() as u64,
        sha256: sha256_hex(bytes),
    });
    Ok(())
}

fn to_bytes(path: &Path, f: impl FnOnce(&mut Vec<u8>) -> csv::Result<()>) -> Result<Vec<u8>> {
    let mut buf = Vec::new();
    f(&mut buf).map_err(csv_err(path))?;
    Ok(buf)
}

pub fn baseline_file(policy: PlsPolicy) -> String {
    format!("baseline-{}.csv", policy.name().to_ascii_lowercase())
}

/// Writes every artifact of `run` into `dir` and returns the manifest (also
/// written as `manifest.json`).
pub fn emit_outputs(run: &RunOutput, dir: &Path) -> Result<Manifest> {
    fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    let mut files = Vec::new();
    let sc = &run.scenario;

    write_file(dir, "scenario.toml", sc.to_toml().as_bytes(), &mut files)?;
    let trace = to_bytes(&dir.join("trace.csv"), |b| write_trace(&run.trace, sc, b))?;
    write_file(dir, "trace.csv", &trace, &mut files)?;
    for (policy, b) in &run.baselines {
        let name = baseline_file(*policy);
        let bytes = to_bytes(&dir.join(&name), |buf| write_trace(b, sc, buf))?;
        write_file(dir, &name, &bytes, &mut files)?;
    }
    let nu = to_bytes(&dir.join("network-utility.csv"), |b| write_network_utility(run, b))?;
    write_file(dir, "network-utility.csv", &nu, &mut files)?;
    let q = to_bytes(&dir.join("qtable.csv"), |b| run.tables.write_csv(&run.env, b))?;
    write_file(dir, "qtable.csv", &q, &mut files)?;
    let ri = to_bytes(&dir.join("relative-indicator.csv"), |b| write_report(&run.report, b))?;
    write_file(dir, "relative-indicator.csv", &ri, &mut files)?;

    let hp = sc.hyperparams(run.mode);
    let greedy_actions = run.trace.slots.first().map_or_else(Vec::new, |s| {
        s.profile
            .0
            .iter()
            .enumerate()
            .map(|(i, a)| format!("{} {}", sc.policies[i][a.policy].name(), sc.configs[i][a.config].label()))
            .collect()
    });
    let meta = Metadata {
        scenario: sc.name(),
        mode: run.mode.name(),
        seed: run.seed,
        crate_version: env!("CARGO_PKG_VERSION"),
        slots: hp.slots,
        episodes: hp.episodes,
        mean_network_utility: run.trace.mean_network_utility(),
        greedy_actions,
        timings: run.timings,
    };
    let meta = serde_json::to_vec_pretty(&meta).map_err(|e| parse_err(&dir.join("metadata.json"), e.to_string()))?;
    write_file(dir, "metadata.json", &meta, &mut files)?;

    let manifest = Manifest { files };
    let path = dir.join(MANIFEST);
    let bytes = serde_json::to_vec_pretty(&manifest).map_err(|e| parse_err(&path, e.to_string()))?;
    fs::write(&path, bytes).map_err(|e| Error::io(&path, e))?;
    Ok(manifest)
}

/// A run directory read back from disk.
#[derive(Debug, Clone)]
pub struct LoadedRun {
    pub dir: PathBuf,
    pub scenario: ScenarioConfig,
    pub trace: EpisodeTrace,
    pub baselines: Vec<(PlsPolicy, EpisodeTrace)>,
}

impl LoadedRun {
    pub fn load(dir: &Path) -> Result<Self> {
        let scenario = ScenarioConfig::load(&dir.join("scenario.toml"))?;
        let trace = read_trace(&dir.join("trace.csv"), &scenario)?;
        let mut baselines = Vec::new();
        for p in PlsPolicy::ALL {
            let path = dir.join(baseline_file(p));
            if path.exists() {
                baselines.push((p, read_trace(&path, &scenario)?));
            }
        }
        Ok(Self {
            dir: dir.to_path_buf(),
            scenario,
            trace,
            baselines,
        })
    }

    pub fn report(&self) -> Result<RelativeIndicatorReport> {
        RelativeIndicatorReport::build(&self.trace, &self.baselines, self.scenario.agent_count())
    }
}

/// Run directories at or directly below `root`, sorted by path.
pub fn find_runs(root: &Path) -> Result<Vec<PathBuf>> {
    let is_run = |p: &Path| p.join("trace.csv").is_file() && p.join("scenario.toml").is_file();
    if is_run(root) {
        return Ok(vec![root.to_path_buf()]);
    }
    let mut runs = Vec::new();
    for entry in fs::read_dir(root).map_err(|e| Error::io(root, e))? {
        let p = entry.map_err(|e| Error::io(root, e))?.path();
        if p.is_dir() && is_run(&p) {
            runs.push(p);
        }
    }
    runs.sort();
    Ok(runs)
}

/// Per-run and seed-averaged indicator tables for every run under `root`,
/// rebuilt from the traces. Writes `report-runs.csv` and `report-mean.csv`
/// into `root`.
pub fn report_dir(root: &Path) -> Result<(Vec<(PathBuf, RelativeIndicatorReport)>, RelativeIndicatorReport)> {
    let runs = find_runs(root)?;
    if runs.is_empty() {
        return Err(Error::config(format!("no run directories under {}", root.display())));
    }
    let mut per_run = Vec::new();
    for dir in runs {
        let run = LoadedRun::load(&dir)?;
        per_run.push((dir, run.report()?));
    }
    let reports: Vec<RelativeIndicatorReport> = per_run.iter().map(|(_, r)| r.clone()).collect();
    let mean = RelativeIndicatorReport::average(&reports)?;

    let path = root.join("report-runs.csv");
    let mut w = csv::Writer::from_path(&path).map_err(csv_err(&path))?;
    w.write_record(["run", "agent", "baseline", "metric", "relative_indicator_percent"])
        .map_err(csv_err(&path))?;
    for (dir, r) in &per_run {
        let name = dir.file_name().map_or_else(|| dir.display().to_string(), |n| n.to_string_lossy().into_owned());
        for c in &r.cells {
            w.write_record([
                name.clone(),
                c.agent.to_string(),
                c.baseline.name().to_string(),
                c.metric.name().to_string(),
                c.percent.map_or_else(|| "undefined".to_string(), |v| v.to_string()),
            ])
            .map_err(csv_err(&path))?;
        }
    }
    w.flush().map_err(|e| Error::io(&path, e))?;
    let path = root.join("report-mean.csv");
    let bytes = to_bytes(&path, |b| write_report(&mean, b))?;
    fs::write(&path, bytes).map_err(|e| Error::io(&path, e))?;
    Ok((per_run, mean))
}
