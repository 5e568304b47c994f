//! Stochastic workload generation.
//!
//! Utilizations are drawn i.i.d. uniform from each class range using a
//! ChaCha8 stream seeded with `seed_from_u64(seed)`. All SDR draws come
//! first (ids `0..sdr_count`), then the SDN draws (ids continue from
//! `sdr_count`). A draw is `lo + (hi - lo) * x` where `x` is a 53-bit
//! uniform in `[0, 1)`, so the output depends only on `(spec, seed)`.

use std::fmt;
use std::io::Write;

use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum ProcessKind {
    /// Single-threaded radio baseband process; never split across cores.
    #[serde(rename = "SDR")]
    Sdr,
    /// Data-plane switching process; divisible once aggregated.
    #[serde(rename = "SDN")]
    Sdn,
}

impl fmt::Display for ProcessKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ProcessKind::Sdr => f.write_str("SDR"),
            ProcessKind::Sdn => f.write_str("SDN"),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Process {
    pub id: u32,
    pub kind: ProcessKind,
    /// Percent of one core.
    pub utilization: f64,
}

/// Inclusive utilization range in percent, serialized as `[lo, hi]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct UtilRange(pub f64, pub f64);

impl UtilRange {
    pub fn lo(&self) -> f64 {
        self.0
    }

    pub fn hi(&self) -> f64 {
        self.1
    }

    pub fn contains(&self, u: f64) -> bool {
        self.0 <= u && u <= self.1
    }

    fn validate(&self, class: &str) -> Result<()> {
        let (lo, hi) = (self.0, self.1);
        if !(lo.is_finite() && hi.is_finite() && 0.0 <= lo && lo <= hi && hi <= 100.0) {
            return Err(Error::InvalidSpec(format!(
                "{class} range [{lo}, {hi}] must satisfy 0 <= lo <= hi <= 100"
            )));
        }
        Ok(())
    }
}

/// Per-class process counts and utilization ranges.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct WorkloadSpec {
    pub sdr_count: usize,
    pub sdr_range: UtilRange,
    pub sdn_count: usize,
    pub sdn_range: UtilRange,
}

impl WorkloadSpec {
    pub fn validate(&self) -> Result<()> {
        self.sdr_range.validate("sdr")?;
        self.sdn_range.validate("sdn")
    }

    /// Parses and validates a JSON spec document.
    pub fn from_json(text: &str) -> Result<Self> {
        let spec: WorkloadSpec = serde_json::from_str(text)?;
        spec.validate()?;
        Ok(spec)
    }

    pub fn empty() -> Self {
        WorkloadSpec {
            sdr_count: 0,
            sdr_range: UtilRange(0.0, 0.0),
            sdn_count: 0,
            sdn_range: UtilRange(0.0, 0.0),
        }
    }
}

/// The three process-mix presets used throughout the experiments.
pub fn usecase_spec(n: u32) -> Result<WorkloadSpec> {
    let (sdr_count, sdr_range, sdn_count, sdn_range) = match n {
        1 => (50, (80.0, 100.0), 30, (10.0, 30.0)),
        2 => (30, (60.0, 80.0), 50, (30.0, 50.0)),
        3 => (50, (80.0, 100.0), 50, (30.0, 50.0)),
        _ => return Err(Error::InvalidUsecase(n)),
    };
    Ok(WorkloadSpec {
        sdr_count,
        sdr_range: UtilRange(sdr_range.0, sdr_range.1),
        sdn_count,
        sdn_range: UtilRange(sdn_range.0, sdn_range.1),
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Workload {
    pub processes: Vec<Process>,
    pub spec: WorkloadSpec,
    pub seed: u64,
}

pub fn generate_workload(spec: &WorkloadSpec, seed: u64) -> Result<Workload> {
    spec.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut processes = Vec::with_capacity(spec.sdr_count + spec.sdn_count);
    let classes = [
        (ProcessKind::Sdr, spec.sdr_count, spec.sdr_range),
        (ProcessKind::Sdn, spec.sdn_count, spec.sdn_range),
    ];
    for (kind, count, range) in classes {
        for _ in 0..count {
            let x: f64 = rng.gen();
            let utilization = range.lo() + (range.hi() - range.lo()) * x;
            processes.push(Process {
                id: processes.len() as u32,
                kind,
                utilization,
            });
        }
    }
    Ok(Workload {
        processes,
        spec: *spec,
        seed,
    })
}

impl Workload {
    /// Builds a workload from explicit utilizations. Ids follow the
    /// generator's layout (SDR first). The recorded spec uses the observed
    /// min/max of each class as its range.
    pub fn from_utilizations(sdr: &[f64], sdn: &[f64]) -> Self {
        let range = |v: &[f64]| {
            if v.is_empty() {
                UtilRange(0.0, 0.0)
            } else {
                let lo = v.iter().copied().fold(f64::INFINITY, f64::min);
                let hi = v.iter().copied().fold(f64::NEG_INFINITY, f64::max);
                UtilRange(lo, hi)
            }
        };
        let processes = sdr
            .iter()
            .map(|&u| (ProcessKind::Sdr, u))
            .chain(sdn.iter().map(|&u| (ProcessKind::Sdn, u)))
            .enumerate()
            .map(|(i, (kind, utilization))| Process {
                id: i as u32,
                kind,
                utilization,
            })
            .collect();
        Workload {
            processes,
            spec: WorkloadSpec {
                sdr_count: sdr.len(),
                sdr_range: range(sdr),
                sdn_count: sdn.len(),
                sdn_range: range(sdn),
            },
            seed: 0,
        }
    }

    pub fn sdr(&self) -> impl Iterator<Item = &Process> {
        self.processes.iter().filter(|p| p.kind == ProcessKind::Sdr)
    }

    pub fn sdn(&self) -> impl Iterator<Item = &Process> {
        self.processes.iter().filter(|p| p.kind == ProcessKind::Sdn)
    }

    pub fn sdr_total(&self) -> f64 {
        self.sdr().map(|p| p.utilization).sum()
    }

    /// Aggregated SDN load `U_SDN`, in percent of one core.
    pub fn aggregate_sdn(&self) -> f64 {
        self.sdn().map(|p| p.utilization).sum()
    }

    pub fn total_utilization(&self) -> f64 {
        self.processes.iter().map(|p| p.utilization).sum()
    }

    pub fn get(&self, id: u32) -> Option<&Process> {
        // Generated and hand-built workloads keep ids equal to positions.
        match self.processes.get(id as usize) {
            Some(p) if p.id == id => Some(p),
            _ => self.processes.iter().find(|p| p.id == id),
        }
    }

    /// Writes `id,kind,utilization` rows.
    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut wtr = csv::Writer::from_writer(out);
        wtr.write_record(["id", "kind", "utilization"])?;
        for p in &self.processes {
            wtr.write_record([
                p.id.to_string(),
                p.kind.to_string(),
                p.utilization.to_string(),
            ])?;
        }
        wtr.flush()?;
        Ok(())
    }
}

/// Free-function form of [`Workload::aggregate_sdn`].
pub fn aggregate_sdn(w: &Workload) -> f64 {
    w.aggregate_sdn()
}
