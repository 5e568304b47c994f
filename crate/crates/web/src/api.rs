use corepool::experiments::{run_trials_with, TrialConfig};
use corepool::power::ServerProfile;
use corepool::{
    allocate_separate, allocate_shared, generate_workload, usecase_spec, Allocation, SeparateSdn,
    WorkloadSpec,
};
use serde::Serialize;

pub type ApiResult = Result<String, String>;

fn s<E: std::fmt::Display>(e: E) -> String {
    e.to_string()
}

#[derive(Serialize)]
struct CoreBar {
    sdr: f64,
    sdn: f64,
}

#[derive(Serialize)]
struct Packing {
    total_sdr: f64,
    total_sdn: f64,
    shared: Vec<CoreBar>,
    separate_sdr: Vec<CoreBar>,
    separate_sdn: Vec<CoreBar>,
}

fn bars(a: &Allocation) -> Vec<CoreBar> {
    a.cores
        .iter()
        .map(|c| CoreBar {
            sdr: c.total - c.sdn_fraction,
            sdn: c.sdn_fraction,
        })
        .collect()
}

fn parse_spec(text: &str) -> Result<WorkloadSpec, String> {
    WorkloadSpec::from_json(text).map_err(s)
}

fn parse_mode(text: &str) -> Result<SeparateSdn, String> {
    text.parse().map_err(s)
}

pub fn usecase(n: u32) -> ApiResult {
    serde_json::to_string(&usecase_spec(n).map_err(s)?).map_err(s)
}

pub fn bundled_profile(name: &str) -> ApiResult {
    serde_json::to_string(&ServerProfile::bundled(name).map_err(s)?).map_err(s)
}

pub fn packing(spec_json: &str, seed: u64, separate_sdn: &str) -> ApiResult {
    let spec = parse_spec(spec_json)?;
    let w = generate_workload(&spec, seed).map_err(s)?;
    let shared = allocate_shared(&w).map_err(s)?;
    let (sdr, sdn) = allocate_separate(&w, parse_mode(separate_sdn)?).map_err(s)?;
    serde_json::to_string(&Packing {
        total_sdr: w.sdr_total(),
        total_sdn: w.aggregate_sdn(),
        shared: bars(&shared),
        separate_sdr: bars(&sdr),
        separate_sdn: bars(&sdn),
    })
    .map_err(s)
}

pub fn compare(
    spec_json: &str,
    profile_json: &str,
    trials: usize,
    seed: u64,
    separate_sdn: &str,
) -> ApiResult {
    let spec = parse_spec(spec_json)?;
    let profile = ServerProfile::from_json(profile_json).map_err(s)?;
    let config = TrialConfig {
        label: "demo".into(),
        separate_sdn: parse_mode(separate_sdn)?,
    };
    let report = run_trials_with(&spec, &profile, trials, seed, &config).map_err(s)?;
    serde_json::to_string(&report).map_err(s)
}

pub fn power_curve(profile_json: &str, steps: usize) -> ApiResult {
    if steps < 2 {
        return Err("steps must be at least 2".into());
    }
    let profile = ServerProfile::from_json(profile_json).map_err(s)?;
    let points = (0..steps)
        .map(|i| {
            let load = i as f64 / (steps - 1) as f64;
            profile.power_at_load(load).map(|w| (load, w))
        })
        .collect::<Result<Vec<_>, _>>()
        .map_err(s)?;
    serde_json::to_string(&points).map_err(s)
}
