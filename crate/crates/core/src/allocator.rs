//! Core-pool allocation for SDR and SDN processes.
//!
//! The shared scheme places SDR processes largest-first onto the first core
//! with room (first-fit decreasing, ties by ascending id), then pours the
//! aggregated SDN load into the leftover capacity in core-index order,
//! opening new cores while SDN load remains. The separate baseline packs
//! each class onto its own disjoint set of cores.

use std::collections::HashMap;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::workload::{Process, ProcessKind, Workload, WorkloadSpec};

/// Capacity of one core, in percent.
pub const CORE_CAPACITY: f64 = 100.0;

/// Slack for floating-point comparisons against core capacity and for
/// deciding that the SDN pour is finished.
pub const EPS: f64 = 1e-9;

const SUM_TOLERANCE: f64 = 1e-6;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Scheme {
    #[serde(rename = "SHARED")]
    Shared,
    #[serde(rename = "SEPARATE_SDR")]
    SeparateSdr,
    #[serde(rename = "SEPARATE_SDN")]
    SeparateSdn,
}

impl fmt::Display for Scheme {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Scheme::Shared => "SHARED",
            Scheme::SeparateSdr => "SEPARATE_SDR",
            Scheme::SeparateSdn => "SEPARATE_SDN",
        })
    }
}

/// How the separate baseline provisions SDN cores.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SeparateSdn {
    /// Each SDN process is an item of its own, packed first-fit decreasing.
    #[default]
    PerProcess,
    /// SDN load aggregated and spread over `ceil(U_SDN / 100)` cores.
    Fluid,
}

impl std::str::FromStr for SeparateSdn {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "per-process" | "per_process" => Ok(SeparateSdn::PerProcess),
            "fluid" => Ok(SeparateSdn::Fluid),
            _ => Err(Error::Domain(format!("unknown SDN baseline `{s}`"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CoreAssignment {
    pub index: usize,
    pub sdr_ids: Vec<u32>,
    /// Ids of SDN processes placed whole on this core. Empty when SDN load
    /// is poured as a fluid.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub sdn_ids: Vec<u32>,
    pub sdn_fraction: f64,
    /// Load already present on the core before allocation.
    #[serde(default, skip_serializing_if = "is_zero")]
    pub preload: f64,
    pub total: f64,
}

fn is_zero(x: &f64) -> bool {
    *x == 0.0
}

impl CoreAssignment {
    fn empty(index: usize, preload: f64) -> Self {
        CoreAssignment {
            index,
            sdr_ids: Vec::new(),
            sdn_ids: Vec::new(),
            sdn_fraction: 0.0,
            preload,
            total: preload,
        }
    }

    pub fn free(&self) -> f64 {
        CORE_CAPACITY - self.total
    }

    fn fits(&self, u: f64) -> bool {
        self.total + u <= CORE_CAPACITY + EPS
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WorkloadRef {
    pub seed: u64,
    pub spec: WorkloadSpec,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Allocation {
    pub scheme: Scheme,
    pub cores: Vec<CoreAssignment>,
    #[serde(rename = "workload")]
    pub workload_ref: WorkloadRef,
}

impl Allocation {
    pub fn core_count(&self) -> usize {
        self.cores.len()
    }

    pub fn utilizations(&self) -> impl Iterator<Item = f64> + '_ {
        self.cores.iter().map(|c| c.total)
    }

    pub fn total_utilization(&self) -> f64 {
        self.utilizations().sum()
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        Ok(serde_json::from_str(text)?)
    }
}

fn check_sdr(w: &Workload) -> Result<()> {
    for p in w.sdr() {
        if !(p.utilization <= CORE_CAPACITY) {
            return Err(Error::InfeasibleProcess {
                id: p.id,
                utilization: p.utilization,
            });
        }
    }
    Ok(())
}

fn decreasing<'a>(items: impl Iterator<Item = &'a Process>) -> Vec<&'a Process> {
    let mut v: Vec<&Process> = items.collect();
    v.sort_by(|a, b| {
        b.utilization
            .total_cmp(&a.utilization)
            .then(a.id.cmp(&b.id))
    });
    v
}

fn first_fit<'a>(
    cores: &mut Vec<CoreAssignment>,
    items: impl Iterator<Item = &'a Process>,
) -> Result<()> {
    for p in decreasing(items) {
        let slot = match cores.iter().position(|c| c.fits(p.utilization)) {
            Some(i) => i,
            None => {
                cores.push(CoreAssignment::empty(cores.len(), 0.0));
                cores.len() - 1
            }
        };
        let core = &mut cores[slot];
        if !core.fits(p.utilization) {
            return Err(Error::InfeasibleProcess {
                id: p.id,
                utilization: p.utilization,
            });
        }
        match p.kind {
            ProcessKind::Sdr => core.sdr_ids.push(p.id),
            ProcessKind::Sdn => {
                core.sdn_ids.push(p.id);
                core.sdn_fraction += p.utilization;
            }
        }
        core.total += p.utilization;
    }
    Ok(())
}

fn pour(cores: &mut Vec<CoreAssignment>, mut remaining: f64) {
    for core in cores.iter_mut() {
        if remaining <= EPS {
            return;
        }
        let chunk = core.free().min(remaining);
        if chunk > EPS {
            core.sdn_fraction += chunk;
            core.total += chunk;
            remaining -= chunk;
        }
    }
    while remaining > EPS {
        let chunk = remaining.min(CORE_CAPACITY);
        let mut core = CoreAssignment::empty(cores.len(), 0.0);
        core.sdn_fraction = chunk;
        core.total = chunk;
        cores.push(core);
        remaining -= chunk;
    }
}

fn workload_ref(w: &Workload) -> WorkloadRef {
    WorkloadRef {
        seed: w.seed,
        spec: w.spec,
    }
}

/// Packs SDR and aggregated SDN load into one shared pool of cores.
pub fn allocate_shared(w: &Workload) -> Result<Allocation> {
    allocate_shared_with_occupancy(w, &[])
}

/// Like [`allocate_shared`], but starting from a warm pool whose cores
/// already carry `occupancy[i]` percent of load.
pub fn allocate_shared_with_occupancy(w: &Workload, occupancy: &[f64]) -> Result<Allocation> {
    check_sdr(w)?;
    if let Some(&bad) = occupancy
        .iter()
        .find(|u| !(0.0..=CORE_CAPACITY).contains(*u))
    {
        return Err(Error::Domain(format!(
            "starting occupancy {bad} outside [0, 100]"
        )));
    }
    let mut cores: Vec<CoreAssignment> = occupancy
        .iter()
        .enumerate()
        .map(|(i, &u)| CoreAssignment::empty(i, u))
        .collect();
    first_fit(&mut cores, w.sdr())?;
    pour(&mut cores, w.aggregate_sdn());
    Ok(Allocation {
        scheme: Scheme::Shared,
        cores,
        workload_ref: workload_ref(w),
    })
}

/// Class-segregated baseline: returns `(sdr_only, sdn_only)` allocations on
/// disjoint cores.
pub fn allocate_separate(w: &Workload, sdn_mode: SeparateSdn) -> Result<(Allocation, Allocation)> {
    check_sdr(w)?;
    let mut sdr_cores = Vec::new();
    first_fit(&mut sdr_cores, w.sdr())?;

    let mut sdn_cores = Vec::new();
    match sdn_mode {
        SeparateSdn::PerProcess => {
            if let Some(p) = w.sdn().find(|p| !(p.utilization <= CORE_CAPACITY)) {
                return Err(Error::InfeasibleProcess {
                    id: p.id,
                    utilization: p.utilization,
                });
            }
            first_fit(&mut sdn_cores, w.sdn())?
        }
        SeparateSdn::Fluid => pour(&mut sdn_cores, w.aggregate_sdn()),
    }

    let r = workload_ref(w);
    Ok((
        Allocation {
            scheme: Scheme::SeparateSdr,
            cores: sdr_cores,
            workload_ref: r.clone(),
        },
        Allocation {
            scheme: Scheme::SeparateSdn,
            cores: sdn_cores,
            workload_ref: r,
        },
    ))
}

#[derive(Debug, Clone, PartialEq)]
pub enum Violation {
    OverCapacity {
        core: usize,
        total: f64,
    },
    NegativeLoad {
        core: usize,
    },
    TotalMismatch {
        core: usize,
        recorded: f64,
        computed: f64,
    },
    BadIndex {
        position: usize,
        index: usize,
    },
    UnplacedProcess {
        id: u32,
    },
    DuplicatePlacement {
        id: u32,
    },
    UnknownProcess {
        id: u32,
    },
    WrongKind {
        id: u32,
    },
    SdnTotalMismatch {
        expected: f64,
        actual: f64,
    },
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Violation::OverCapacity { core, total } => {
                write!(f, "core {core} over capacity at {total}%")
            }
            Violation::NegativeLoad { core } => write!(f, "core {core} has negative load"),
            Violation::TotalMismatch {
                core,
                recorded,
                computed,
            } => {
                write!(f, "core {core} total {recorded} != computed {computed}")
            }
            Violation::BadIndex { position, index } => {
                write!(f, "core at position {position} has index {index}")
            }
            Violation::UnplacedProcess { id } => write!(f, "process {id} not placed"),
            Violation::DuplicatePlacement { id } => write!(f, "process {id} placed more than once"),
            Violation::UnknownProcess { id } => write!(f, "process {id} not in workload"),
            Violation::WrongKind { id } => write!(f, "process {id} placed in the wrong class"),
            Violation::SdnTotalMismatch { expected, actual } => {
                write!(f, "SDN load {actual} != workload SDN {expected}")
            }
        }
    }
}

/// Checks every allocation invariant against the workload. An empty list
/// means the allocation is valid.
pub fn validate_allocation(a: &Allocation, w: &Workload) -> Vec<Violation> {
    let mut out = Vec::new();
    let mut sdr_seen: HashMap<u32, usize> = HashMap::new();
    let mut sdn_seen: HashMap<u32, usize> = HashMap::new();
    let mut sdn_sum = 0.0;

    for (pos, core) in a.cores.iter().enumerate() {
        if core.index != pos {
            out.push(Violation::BadIndex {
                position: pos,
                index: core.index,
            });
        }
        if core.sdn_fraction < 0.0 || core.preload < 0.0 {
            out.push(Violation::NegativeLoad { core: core.index });
        }
        let mut computed = core.preload + core.sdn_fraction;
        for &id in &core.sdr_ids {
            *sdr_seen.entry(id).or_default() += 1;
            match w.get(id) {
                Some(p) if p.kind == ProcessKind::Sdr => computed += p.utilization,
                Some(_) => out.push(Violation::WrongKind { id }),
                None => out.push(Violation::UnknownProcess { id }),
            }
        }
        if !core.sdn_ids.is_empty() {
            let mut placed = 0.0;
            for &id in &core.sdn_ids {
                *sdn_seen.entry(id).or_default() += 1;
                match w.get(id) {
                    Some(p) if p.kind == ProcessKind::Sdn => placed += p.utilization,
                    Some(_) => out.push(Violation::WrongKind { id }),
                    None => out.push(Violation::UnknownProcess { id }),
                }
            }
            if (placed - core.sdn_fraction).abs() > SUM_TOLERANCE {
                out.push(Violation::TotalMismatch {
                    core: core.index,
                    recorded: core.sdn_fraction,
                    computed: placed,
                });
            }
        }
        if (computed - core.total).abs() > SUM_TOLERANCE {
            out.push(Violation::TotalMismatch {
                core: core.index,
                recorded: core.total,
                computed,
            });
        }
        if core.total > CORE_CAPACITY + EPS {
            out.push(Violation::OverCapacity {
                core: core.index,
                total: core.total,
            });
        }
        sdn_sum += core.sdn_fraction;
    }

    let wants_sdr = matches!(a.scheme, Scheme::Shared | Scheme::SeparateSdr);
    let wants_sdn = matches!(a.scheme, Scheme::Shared | Scheme::SeparateSdn);

    for p in w.sdr() {
        match sdr_seen.get(&p.id).copied().unwrap_or(0) {
            0 if wants_sdr => out.push(Violation::UnplacedProcess { id: p.id }),
            0 => {}
            1 if wants_sdr => {}
            1 => out.push(Violation::WrongKind { id: p.id }),
            _ => out.push(Violation::DuplicatePlacement { id: p.id }),
        }
    }
    if !sdn_seen.is_empty() {
        for p in w.sdn() {
            match sdn_seen.get(&p.id).copied().unwrap_or(0) {
                0 => out.push(Violation::UnplacedProcess { id: p.id }),
                1 => {}
                _ => out.push(Violation::DuplicatePlacement { id: p.id }),
            }
        }
    }
    let expected = if wants_sdn { w.aggregate_sdn() } else { 0.0 };
    if (sdn_sum - expected).abs() > SUM_TOLERANCE {
        out.push(Violation::SdnTotalMismatch {
            expected,
            actual: sdn_sum,
        });
    }
    out
}

/// Default SDR item limit for [`brute_force_min_cores`].
pub const ORACLE_MAX_ITEMS: usize = 10;

/// Exact minimum core count by exhaustive search over all partitions of the
/// SDR items, with the SDN load filling remaining capacity as a fluid.
pub fn brute_force_min_cores(w: &Workload, max_items: usize) -> Result<usize> {
    let items: Vec<f64> = w.sdr().map(|p| p.utilization).collect();
    if items.len() > max_items {
        return Err(Error::OracleSize {
            items: items.len(),
            max: max_items,
        });
    }
    check_sdr(w)?;
    let total = w.total_utilization();

    fn cores_needed(bins: usize, total: f64) -> usize {
        let by_load = ((total - EPS) / CORE_CAPACITY).ceil().max(0.0) as usize;
        bins.max(by_load)
    }

    // Every set partition is visited: item k goes into any open bin or a new one.
    fn search(items: &[f64], k: usize, bins: &mut Vec<f64>, total: f64, best: &mut usize) {
        if cores_needed(bins.len(), total) >= *best {
            return;
        }
        if k == items.len() {
            *best = cores_needed(bins.len(), total);
            return;
        }
        for i in 0..bins.len() {
            if bins[i] + items[k] <= CORE_CAPACITY + EPS {
                bins[i] += items[k];
                search(items, k + 1, bins, total, best);
                bins[i] -= items[k];
            }
        }
        bins.push(items[k]);
        search(items, k + 1, bins, total, best);
        bins.pop();
    }

    let mut best = usize::MAX;
    search(&items, 0, &mut Vec::new(), total, &mut best);
    Ok(best)
}
