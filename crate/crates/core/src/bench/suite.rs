//! Instances × configurations, run in parallel, written as CSV.

use std::fmt;
use std::fs;
use std::io;
use std::path::{Path, PathBuf};
use std::str::FromStr;
use std::time::Instant;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::bench::strip::{generate_sp, Encoding};
use crate::error::{Error, Result};
use crate::frontend::{parse_file, Problem};
use crate::lia::{BnbConfig, BnbMode};
use crate::num::parse_delta;
use crate::omt::{solve, OmtConfig, OmtStatus};
use crate::reduce::ReductionStrategy;
use crate::DeltaRational;

#[derive(Clone, Debug, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct Settings {
    /// Seconds per run.
    #[serde(default = "default_timeout")]
    pub timeout: f64,
    #[serde(default)]
    pub max_iterations: Option<usize>,
    #[serde(default)]
    pub seed: u64,
    /// Record wall-clock times; off gives reproducible CSV bytes.
    #[serde(default = "default_true")]
    pub timing: bool,
    #[serde(default)]
    pub threads: Option<usize>,
}

fn default_timeout() -> f64 {
    60.0
}

fn default_true() -> bool {
    true
}

impl Default for Settings {
    fn default() -> Self {
        Settings { timeout: default_timeout(), max_iterations: None, seed: 0, timing: true, threads: None }
    }
}

#[derive(Clone, Debug, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct InstanceSpec {
    #[serde(default)]
    pub path: Option<PathBuf>,
    /// Generator family; only `sp` exists.
    #[serde(default)]
    pub generate: Option<String>,
    #[serde(default)]
    pub n: Option<usize>,
    #[serde(default)]
    pub seed: Option<u64>,
    #[serde(default)]
    pub encoding: Option<String>,
}

#[derive(Clone, Debug, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct ConfigSpec {
    pub name: String,
    #[serde(default = "default_reduction")]
    pub reduction: String,
    #[serde(default)]
    pub block_lemma: bool,
    #[serde(default = "default_lia")]
    pub lia: String,
}

fn default_reduction() -> String {
    "none".into()
}

fn default_lia() -> String {
    "truncated".into()
}

#[derive(Clone, Debug, Default, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct Suite {
    #[serde(default)]
    pub settings: Settings,
    #[serde(default, rename = "instance")]
    pub instances: Vec<InstanceSpec>,
    #[serde(default, rename = "config")]
    pub configs: Vec<ConfigSpec>,
}

impl Suite {
    pub fn from_toml(text: &str) -> Result<Self> {
        let s: Suite = toml::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        if s.settings.timeout.is_nan() || s.settings.timeout <= 0.0 {
            return Err(Error::Config("timeout must be positive".into()));
        }
        for c in &s.configs {
            s.settings.omt_config(c)?;
        }
        Ok(s)
    }
}

pub fn parse_lia_mode(s: &str) -> Result<BnbConfig> {
    match s {
        "full" => Ok(BnbConfig { mode: BnbMode::Full, ..BnbConfig::default() }),
        "truncated" => Ok(BnbConfig { mode: BnbMode::Truncated, ..BnbConfig::default() }),
        other => Err(Error::Config(format!("unknown lia mode `{other}`"))),
    }
}

impl Settings {
    pub fn omt_config(&self, c: &ConfigSpec) -> Result<OmtConfig> {
        if self.timeout.is_nan() || self.timeout <= 0.0 {
            return Err(Error::Config("timeout must be positive".into()));
        }
        Ok(OmtConfig {
            strategy: c.reduction.parse::<ReductionStrategy>()?,
            lia: parse_lia_mode(&c.lia)?,
            learn_block_lemma: c.block_lemma,
            time_budget: self.timeout,
            max_iterations: self.max_iterations,
            seed: self.seed,
            ..OmtConfig::default()
        })
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum RunStatus {
    Sat,
    Timeout,
    Unsat,
    Unbounded,
    Error,
}

impl fmt::Display for RunStatus {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            RunStatus::Sat => "sat",
            RunStatus::Timeout => "timeout",
            RunStatus::Unsat => "unsat",
            RunStatus::Unbounded => "unbounded",
            RunStatus::Error => "error",
        })
    }
}

impl FromStr for RunStatus {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Ok(match s {
            "sat" => RunStatus::Sat,
            "timeout" => RunStatus::Timeout,
            "unsat" => RunStatus::Unsat,
            "unbounded" => RunStatus::Unbounded,
            "error" => RunStatus::Error,
            other => return Err(Error::Config(format!("unknown run status `{other}`"))),
        })
    }
}

impl From<OmtStatus> for RunStatus {
    fn from(s: OmtStatus) -> Self {
        match s {
            OmtStatus::Optimum => RunStatus::Sat,
            OmtStatus::Unsat => RunStatus::Unsat,
            OmtStatus::Unbounded => RunStatus::Unbounded,
            OmtStatus::BudgetExhausted => RunStatus::Timeout,
        }
    }
}

/// One CSV row. `ub` is in the problem's own orientation (maximized
/// objectives are reported as maxima).
#[derive(Clone, Debug, PartialEq)]
pub struct RunRecord {
    pub instance: String,
    pub config: String,
    pub status: RunStatus,
    pub ub: Option<DeltaRational>,
    pub iterations: usize,
    pub time_s: f64,
    pub seed: u64,
}

#[derive(Serialize, Deserialize)]
struct Row {
    instance: String,
    config: String,
    status: String,
    ub: String,
    iterations: usize,
    time_s: f64,
    seed: u64,
}

pub fn write_csv<W: io::Write>(records: &[RunRecord], out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    for r in records {
        w.serialize(Row {
            instance: r.instance.clone(),
            config: r.config.clone(),
            status: r.status.to_string(),
            ub: r.ub.as_ref().map(ToString::to_string).unwrap_or_default(),
            iterations: r.iterations,
            time_s: r.time_s,
            seed: r.seed,
        })?;
    }
    if records.is_empty() {
        w.write_record(["instance", "config", "status", "ub", "iterations", "time_s", "seed"])?;
    }
    w.flush()?;
    Ok(())
}

pub fn read_csv<R: io::Read>(input: R) -> Result<Vec<RunRecord>> {
    let mut rd = csv::Reader::from_reader(input);
    let mut out = Vec::new();
    for row in rd.deserialize::<Row>() {
        let row = row?;
        let ub = if row.ub.is_empty() {
            None
        } else {
            Some(parse_delta(&row.ub).ok_or_else(|| Error::Config(format!("bad ub `{}`", row.ub)))?)
        };
        out.push(RunRecord {
            instance: row.instance,
            config: row.config,
            status: row.status.parse()?,
            ub,
            iterations: row.iterations,
            time_s: row.time_s,
            seed: row.seed,
        });
    }
    Ok(out)
}

/// Materialize one instance entry; relative paths resolve against `base`.
pub fn load_instance(spec: &InstanceSpec, base: &Path) -> Result<Problem> {
    match (&spec.path, spec.generate.as_deref()) {
        (Some(p), None) => {
            let path = if p.is_absolute() { p.clone() } else { base.join(p) };
            parse_file(&path)
        }
        (None, Some("sp")) => {
            let n = spec.n.ok_or_else(|| Error::Config("sp instance needs `n`".into()))?;
            let enc: Encoding = spec.encoding.as_deref().unwrap_or("lra").parse()?;
            Ok(generate_sp(n, spec.seed.unwrap_or(0), enc)?.1)
        }
        (None, Some(other)) => Err(Error::Config(format!("unknown generator `{other}`"))),
        _ => Err(Error::Config("instance needs exactly one of `path` or `generate`".into())),
    }
}

fn instance_name(spec: &InstanceSpec, index: usize) -> String {
    if let Some(p) = &spec.path {
        return p.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_else(|| format!("instance{index}"));
    }
    format!(
        "{}-n{}-s{}-{}",
        spec.generate.as_deref().unwrap_or("gen"),
        spec.n.unwrap_or(0),
        spec.seed.unwrap_or(0),
        spec.encoding.as_deref().unwrap_or("lra")
    )
}

pub fn run_one(problem: &Problem, instance: &str, config: &str, cfg: &OmtConfig, timing: bool) -> RunRecord {
    let start = Instant::now();
    let (status, ub, iterations) = match solve(problem, cfg) {
        Ok(out) => (out.status.into(), out.value.map(|v| problem.user_value(&v)), out.trace.num_iterations()),
        Err(_) => (RunStatus::Error, None, 0),
    };
    RunRecord {
        instance: instance.into(),
        config: config.into(),
        status,
        ub,
        iterations,
        time_s: if timing { start.elapsed().as_secs_f64() } else { 0.0 },
        seed: cfg.seed,
    }
}

/// One record per (instance, config), instance-major. A broken instance
/// yields `error` rows.
pub fn run_suite(suite: &Suite, base: &Path) -> Result<Vec<RunRecord>> {
    let configs: Vec<(String, OmtConfig)> = suite
        .configs
        .iter()
        .map(|c| Ok((c.name.clone(), suite.settings.omt_config(c)?)))
        .collect::<Result<_>>()?;
    let problems: Vec<(String, Option<Problem>)> = suite
        .instances
        .iter()
        .enumerate()
        .map(|(i, s)| (instance_name(s, i), load_instance(s, base).ok()))
        .collect();
    let jobs: Vec<(usize, usize)> =
        (0..problems.len()).flat_map(|i| (0..configs.len()).map(move |c| (i, c))).collect();
    let timing = suite.settings.timing;
    let work = || {
        jobs.par_iter()
            .map(|&(i, c)| {
                let (name, problem) = &problems[i];
                let (cname, cfg) = &configs[c];
                match problem {
                    Some(p) => run_one(p, name, cname, cfg, timing),
                    None => RunRecord {
                        instance: name.clone(),
                        config: cname.clone(),
                        status: RunStatus::Error,
                        ub: None,
                        iterations: 0,
                        time_s: 0.0,
                        seed: cfg.seed,
                    },
                }
            })
            .collect::<Vec<_>>()
    };
    match suite.settings.threads {
        Some(k) => {
            let pool = rayon::ThreadPoolBuilder::new()
                .num_threads(k)
                .build()
                .map_err(|e| Error::Config(e.to_string()))?;
            Ok(pool.install(work))
        }
        None => Ok(work()),
    }
}

/// `{metric}_{A}_vs_{B}.csv` for every ordered config pair A before B and
/// metric in time, ub, iterations.
pub fn write_scatter(records: &[RunRecord], configs: &[String], dir: &Path) -> Result<Vec<PathBuf>> {
    let mut written = Vec::new();
    let mut instances: Vec<&str> = Vec::new();
    for r in records {
        if !instances.contains(&r.instance.as_str()) {
            instances.push(&r.instance);
        }
    }
    let find = |inst: &str, cfg: &str| records.iter().find(|r| r.instance == inst && r.config == cfg);
    type Metric = fn(&RunRecord) -> String;
    let metrics: [(&str, Metric); 3] = [
        ("time", |r| r.time_s.to_string()),
        ("ub", |r| r.ub.as_ref().map(ToString::to_string).unwrap_or_default()),
        ("iterations", |r| r.iterations.to_string()),
    ];
    for (ai, a) in configs.iter().enumerate() {
        for b in &configs[ai + 1..] {
            for (metric, get) in &metrics {
                let path = dir.join(format!("{metric}_{a}_vs_{b}.csv"));
                let mut w = csv::Writer::from_writer(fs::File::create(&path)?);
                w.write_record(["instance", a.as_str(), b.as_str()])?;
                for inst in &instances {
                    let cell = |c: &str| find(inst, c).map(get).unwrap_or_default();
                    w.write_record([inst.to_string(), cell(a), cell(b)])?;
                }
                w.flush()?;
                written.push(path);
            }
        }
    }
    Ok(written)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::Rational;

    const SUITE: &str = r#"
        [settings]
        timeout = 30.0
        timing = false

        [[instance]]
        generate = "sp"
        n = 2
        seed = 1

        [[instance]]
        generate = "sp"
        n = 3
        seed = 2

        [[instance]]
        path = "missing.smt2"

        [[config]]
        name = "none"

        [[config]]
        name = "basic"
        reduction = "basic"

        [[config]]
        name = "guided"
        reduction = "guided"
        block_lemma = true
    "#;

    #[test]
    fn nine_rows_and_error_rows() {
        let suite = Suite::from_toml(SUITE).unwrap();
        let recs = run_suite(&suite, Path::new("/nonexistent")).unwrap();
        assert_eq!(recs.len(), 9);
        assert!(recs[6..].iter().all(|r| r.status == RunStatus::Error));
        for chunk in recs[..6].chunks(3) {
            assert!(chunk.iter().all(|r| r.status == RunStatus::Sat && r.ub == chunk[0].ub));
        }
    }

    #[test]
    fn csv_round_trip() {
        let recs = vec![
            RunRecord {
                instance: "a,b".into(),
                config: "guided".into(),
                status: RunStatus::Sat,
                ub: Some(DeltaRational::new(Rational::new((-7).into(), 3.into()), Rational::from_integer(1.into()))),
                iterations: 4,
                time_s: 0.1 + 0.2,
                seed: 9,
            },
            RunRecord {
                instance: "c".into(),
                config: "none".into(),
                status: RunStatus::Timeout,
                ub: None,
                iterations: 0,
                time_s: 0.0,
                seed: 0,
            },
        ];
        let mut buf = Vec::new();
        write_csv(&recs, &mut buf).unwrap();
        let text = String::from_utf8(buf.clone()).unwrap();
        assert!(text.starts_with("instance,config,status,ub,iterations,time_s,seed\n"));
        assert!(text.contains("-7/3+1d"));
        assert_eq!(read_csv(buf.as_slice()).unwrap(), recs);
    }

    #[test]
    fn bad_configs_are_rejected() {
        assert!(Suite::from_toml("[[config]]\nname = \"x\"\nreduction = \"fancy\"").is_err());
        assert!(Suite::from_toml("[[config]]\nname = \"x\"\nlia = \"half\"").is_err());
        assert!(Suite::from_toml("[settings]\ntimeout = 0.0").is_err());
        assert!(Suite::from_toml("[[config]]\nnme = \"x\"").is_err());
    }

    #[test]
    fn scatter_files() {
        let dir = std::env::temp_dir().join(format!("scatter-{}", std::process::id()));
        fs::create_dir_all(&dir).unwrap();
        let suite = Suite::from_toml(SUITE).unwrap();
        let recs = run_suite(&suite, Path::new("/nonexistent")).unwrap();
        let names: Vec<String> = suite.configs.iter().map(|c| c.name.clone()).collect();
        let files = write_scatter(&recs, &names, &dir).unwrap();
        assert_eq!(files.len(), 9);
        let text = fs::read_to_string(dir.join("iterations_none_vs_guided.csv")).unwrap();
        assert_eq!(text.lines().next(), Some("instance,none,guided"));
        assert_eq!(text.lines().count(), 4);
        fs::remove_dir_all(&dir).unwrap();
    }
}
