//! Repeated-trial comparison of the shared pool against the separate
//! baseline.

use std::io::{Read, Write};

use serde::{Deserialize, Serialize};

use crate::allocator::{allocate_separate, allocate_shared, SeparateSdn};
use crate::error::{Error, Result};
use crate::power::{savings_pct, separate_power, shared_power, ServerProfile, BUNDLED_PROFILES};
use crate::stats::{boxplot_stats, BoxplotStats};
use crate::workload::{generate_workload, usecase_spec, WorkloadSpec};

pub const REPORT_SCHEMA: u32 = 1;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TrialResult {
    #[serde(rename = "trial")]
    pub trial_index: usize,
    pub seed: u64,
    pub shared_cores: usize,
    pub separate_cores: usize,
    pub shared_watts: f64,
    pub separate_watts: f64,
    pub core_savings_pct: f64,
    pub power_savings_pct: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ReportStats {
    pub shared_cores: BoxplotStats,
    pub separate_cores: BoxplotStats,
    pub shared_watts: BoxplotStats,
    pub separate_watts: BoxplotStats,
    pub core_savings_pct: BoxplotStats,
    pub power_savings_pct: BoxplotStats,
}

impl ReportStats {
    pub fn from_trials(trials: &[TrialResult]) -> Result<Self> {
        let col =
            |f: fn(&TrialResult) -> f64| boxplot_stats(&trials.iter().map(f).collect::<Vec<_>>());
        Ok(ReportStats {
            shared_cores: col(|t| t.shared_cores as f64)?,
            separate_cores: col(|t| t.separate_cores as f64)?,
            shared_watts: col(|t| t.shared_watts)?,
            separate_watts: col(|t| t.separate_watts)?,
            core_savings_pct: col(|t| t.core_savings_pct)?,
            power_savings_pct: col(|t| t.power_savings_pct)?,
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ComparisonReport {
    pub schema: u32,
    /// `usecase-N` for presets, otherwise a caller-chosen label.
    pub label: String,
    pub spec: WorkloadSpec,
    pub profile: String,
    pub separate_sdn: SeparateSdn,
    pub base_seed: u64,
    pub trials: Vec<TrialResult>,
    pub stats: ReportStats,
}

#[derive(Debug, Clone)]
pub struct TrialConfig {
    pub label: String,
    pub separate_sdn: SeparateSdn,
}

impl Default for TrialConfig {
    fn default() -> Self {
        TrialConfig {
            label: "custom".into(),
            separate_sdn: SeparateSdn::default(),
        }
    }
}

/// One trial: generate, pack both ways, evaluate power.
pub fn run_trial(
    spec: &WorkloadSpec,
    profile: &ServerProfile,
    trial_index: usize,
    seed: u64,
    separate_sdn: SeparateSdn,
) -> Result<TrialResult> {
    let w = generate_workload(spec, seed)?;
    let shared = allocate_shared(&w)?;
    let (sdr, sdn) = allocate_separate(&w, separate_sdn)?;
    let shared_p = shared_power(&shared, profile);
    let separate_p = separate_power(&sdr, &sdn, profile);
    let shared_cores = shared.core_count();
    let separate_cores = sdr.core_count() + sdn.core_count();
    // An empty workload needs nothing either way: report zero savings.
    let or_zero = |r: Result<f64>| match r {
        Err(Error::UndefinedSavings) => Ok(0.0),
        other => other,
    };
    Ok(TrialResult {
        trial_index,
        seed,
        shared_cores,
        separate_cores,
        shared_watts: shared_p.total_watts,
        separate_watts: separate_p.total_watts,
        core_savings_pct: or_zero(savings_pct(shared_cores as f64, separate_cores as f64))?,
        power_savings_pct: or_zero(savings_pct(shared_p.total_watts, separate_p.total_watts))?,
    })
}

pub fn run_trials(
    spec: &WorkloadSpec,
    profile: &ServerProfile,
    n_trials: usize,
    base_seed: u64,
) -> Result<ComparisonReport> {
    run_trials_with(spec, profile, n_trials, base_seed, &TrialConfig::default())
}

/// Trial `t` uses seed `base_seed + t`.
pub fn run_trials_with(
    spec: &WorkloadSpec,
    profile: &ServerProfile,
    n_trials: usize,
    base_seed: u64,
    config: &TrialConfig,
) -> Result<ComparisonReport> {
    if n_trials == 0 {
        return Err(Error::NoTrials);
    }
    spec.validate()?;
    profile.validate()?;
    let trials = (0..n_trials)
        .map(|t| {
            run_trial(
                spec,
                profile,
                t,
                base_seed.wrapping_add(t as u64),
                config.separate_sdn,
            )
        })
        .collect::<Result<Vec<_>>>()?;
    let stats = ReportStats::from_trials(&trials)?;
    Ok(ComparisonReport {
        schema: REPORT_SCHEMA,
        label: config.label.clone(),
        spec: *spec,
        profile: profile.name.clone(),
        separate_sdn: config.separate_sdn,
        base_seed,
        trials,
        stats,
    })
}

/// Seed schedule used by the reproduction bundle.
pub fn reproduction_seed(usecase: u32) -> u64 {
    1000 + 100 * usecase as u64
}

/// Preset run: use case `n`, `n_trials` trials from its reproduction seed.
pub fn run_usecase(n: u32, profile: &ServerProfile, n_trials: usize) -> Result<ComparisonReport> {
    let spec = usecase_spec(n)?;
    let config = TrialConfig {
        label: format!("usecase-{n}"),
        ..TrialConfig::default()
    };
    run_trials_with(&spec, profile, n_trials, reproduction_seed(n), &config)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ReportFormat {
    Csv,
    Json,
}

impl std::str::FromStr for ReportFormat {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "csv" => Ok(ReportFormat::Csv),
            "json" => Ok(ReportFormat::Json),
            _ => Err(Error::Domain(format!("unknown format `{s}`"))),
        }
    }
}

impl ReportFormat {
    pub fn extension(self) -> &'static str {
        match self {
            ReportFormat::Csv => "csv",
            ReportFormat::Json => "json",
        }
    }
}

impl ComparisonReport {
    /// One row per trial.
    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut wtr = csv::Writer::from_writer(out);
        for t in &self.trials {
            wtr.serialize(t)?;
        }
        wtr.flush()?;
        Ok(())
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let r: ComparisonReport = serde_json::from_str(text)?;
        if r.schema != REPORT_SCHEMA {
            return Err(Error::Domain(format!(
                "unsupported report schema {}",
                r.schema
            )));
        }
        Ok(r)
    }

    pub fn export(&self, format: ReportFormat) -> Result<Vec<u8>> {
        match format {
            ReportFormat::Csv => {
                let mut buf = Vec::new();
                self.write_csv(&mut buf)?;
                Ok(buf)
            }
            ReportFormat::Json => {
                let mut s = self.to_json()?;
                s.push('\n');
                Ok(s.into_bytes())
            }
        }
    }
}

/// Files of a reproduction bundle, in write order.
#[derive(Debug, Clone, PartialEq)]
pub struct Bundle {
    pub format: ReportFormat,
    pub reports: Vec<(String, ComparisonReport)>,
    pub summary: String,
}

impl Bundle {
    /// Rendered `(file name, bytes)` pairs, reports first, then `summary.md`.
    pub fn files(&self) -> Result<Vec<(String, Vec<u8>)>> {
        let mut out = Vec::with_capacity(self.reports.len() + 1);
        for (name, r) in &self.reports {
            out.push((name.clone(), r.export(self.format)?));
        }
        out.push(("summary.md".to_string(), self.summary.clone().into_bytes()));
        Ok(out)
    }
}

/// Runs every `(usecase, bundled profile)` cell with the fixed reproduction
/// seeds and renders a markdown summary of the medians.
pub fn reproduce(usecases: &[u32], n_trials: usize, format: ReportFormat) -> Result<Bundle> {
    let mut reports = Vec::new();
    for &n in usecases {
        for name in BUNDLED_PROFILES {
            let profile = ServerProfile::bundled(name)?;
            let report = run_usecase(n, &profile, n_trials)?;
            reports.push((format!("usecase-{n}_{name}.{}", format.extension()), report));
        }
    }

    let mut summary = String::new();
    summary.push_str(
        "# Shared vs separate core pools

",
    );
    summary.push_str(&format!(
        "{n_trials} trials per cell, seeds 1000 + 100 x usecase + trial. Values are medians.

"
    ));
    summary.push_str("| use case | profile | shared cores | separate cores | core savings % | shared W | separate W | power savings % |
");
    summary.push_str(
        "|---|---|---|---|---|---|---|---|
",
    );
    for (_, r) in &reports {
        let s = &r.stats;
        summary.push_str(&format!(
            "| {} | {} | {} | {} | {:.2} | {:.1} | {:.1} | {:.2} |\n",
            r.label,
            r.profile,
            s.shared_cores.median,
            s.separate_cores.median,
            s.core_savings_pct.median,
            s.shared_watts.median,
            s.separate_watts.median,
            s.power_savings_pct.median,
        ));
    }
    Ok(Bundle {
        format,
        reports,
        summary,
    })
}

pub fn read_trials_csv<R: Read>(input: R) -> Result<Vec<TrialResult>> {
    let mut rdr = csv::Reader::from_reader(input);
    Ok(rdr
        .deserialize()
        .collect::<std::result::Result<Vec<_>, _>>()?)
}

pub fn export_report(r: &ComparisonReport, format: ReportFormat) -> Result<Vec<u8>> {
    r.export(format)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn asus() -> ServerProfile {
        ServerProfile::bundled("asus-80core").unwrap()
    }

    #[test]
    fn usecase1_dominance() {
        let r = run_trials(&usecase_spec(1).unwrap(), &asus(), 20, 1000).unwrap();
        assert_eq!(r.trials.len(), 20);
        assert!(r.trials.iter().all(|t| t.shared_cores <= t.separate_cores));
        assert_eq!(r.trials[3].seed, 1003);
    }

    #[test]
    fn single_trial_collapses_stats() {
        let r = run_trials(&usecase_spec(2).unwrap(), &asus(), 1, 5).unwrap();
        let s = r.stats.core_savings_pct;
        assert_eq!(s.min, s.max);
        assert_eq!(s.min, s.median);
    }

    #[test]
    fn zero_trials_rejected() {
        assert!(matches!(
            run_trials(&usecase_spec(2).unwrap(), &asus(), 0, 5),
            Err(Error::NoTrials)
        ));
    }

    #[test]
    fn empty_spec_trials() {
        let r = run_trials(&WorkloadSpec::empty(), &asus(), 3, 0).unwrap();
        assert!(r
            .trials
            .iter()
            .all(|t| t.shared_cores == 0 && t.power_savings_pct == 0.0));
    }

    #[test]
    fn csv_layout() {
        let r = run_trials(&usecase_spec(3).unwrap(), &asus(), 20, 9).unwrap();
        let text = String::from_utf8(r.export(ReportFormat::Csv).unwrap()).unwrap();
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines.len(), 21);
        assert_eq!(
            lines[0],
            "trial,seed,shared_cores,separate_cores,shared_watts,separate_watts,core_savings_pct,power_savings_pct"
        );
    }

    #[test]
    fn json_roundtrip() {
        let r = run_usecase(2, &asus(), 20).unwrap();
        let back = ComparisonReport::from_json(&r.to_json().unwrap()).unwrap();
        assert_eq!(back, r);
        assert!(r.to_json().unwrap().contains("\"schema\": 1"));
    }

    #[test]
    fn stats_recomputed_from_csv() {
        let r = run_usecase(1, &asus(), 20).unwrap();
        let rows = read_trials_csv(r.export(ReportFormat::Csv).unwrap().as_slice()).unwrap();
        assert_eq!(rows, r.trials);
        assert_eq!(ReportStats::from_trials(&rows).unwrap(), r.stats);
    }

    #[test]
    fn reruns_identical() {
        let a = run_usecase(3, &asus(), 10)
            .unwrap()
            .export(ReportFormat::Json)
            .unwrap();
        let b = run_usecase(3, &asus(), 10)
            .unwrap()
            .export(ReportFormat::Json)
            .unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn bundle_layout() {
        let b = reproduce(&[1], 2, ReportFormat::Csv).unwrap();
        let names: Vec<&str> = b.reports.iter().map(|(n, _)| n.as_str()).collect();
        assert_eq!(
            names,
            ["usecase-1_asus-80core.csv", "usecase-1_hpe-400core.csv"]
        );
        assert_eq!(
            b.summary
                .lines()
                .filter(|l| l.starts_with("| usecase-"))
                .count(),
            2
        );
    }
}
