//! Server power profiles and total-power evaluation.
//!
//! Cores of an allocation are grouped into servers of `cores_per_server` in
//! index order. Each occupied server draws `P(load)` where `load` is the sum
//! of its core utilizations over `100 * cores_per_server` and `P` linearly
//! interpolates the profile curve. The separate scheme evaluates its SDR and
//! SDN allocations on their own servers and adds the two.

use std::io::Read;

use serde::{Deserialize, Serialize};

use crate::allocator::{Allocation, CORE_CAPACITY};
use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ServerProfile {
    pub name: String,
    pub cores_per_server: usize,
    /// `(load_fraction, watts)` knots, strictly increasing in load, from 0 to 1.
    pub curve: Vec<(f64, f64)>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub notes: Option<String>,
}

const ASUS_80: &str = include_str!("../profiles/asus-80core.json");
const HPE_400: &str = include_str!("../profiles/hpe-400core.json");

/// Names of the profiles compiled into the crate.
pub const BUNDLED_PROFILES: [&str; 2] = ["asus-80core", "hpe-400core"];

impl ServerProfile {
    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::ProfileFormat(msg));
        if self.cores_per_server == 0 {
            return bad("cores_per_server must be positive".into());
        }
        if self.curve.len() < 2 {
            return bad(format!(
                "curve needs at least 2 points, got {}",
                self.curve.len()
            ));
        }
        if let Some(&(l, w)) = self
            .curve
            .iter()
            .find(|(l, w)| !(l.is_finite() && w.is_finite() && *w >= 0.0))
        {
            return bad(format!("invalid curve point ({l}, {w})"));
        }
        if self.curve[0].0 != 0.0 {
            return bad("curve is missing the idle point at load 0".into());
        }
        if self.curve[self.curve.len() - 1].0 != 1.0 {
            return bad("curve is missing the full-load point at load 1".into());
        }
        for pair in self.curve.windows(2) {
            let ((l0, w0), (l1, w1)) = (pair[0], pair[1]);
            if l1 == l0 {
                return bad(format!("duplicate load {l0}"));
            }
            if l1 < l0 {
                return bad(format!("loads not increasing at {l0} -> {l1}"));
            }
            if w1 < w0 {
                return bad(format!("watts decrease from {w0} to {w1} at load {l1}"));
            }
        }
        Ok(())
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let p: ServerProfile = serde_json::from_str(text)?;
        p.validate()?;
        Ok(p)
    }

    /// Reads a `load,watts` CSV; name and core count come from the caller.
    pub fn from_csv<R: Read>(input: R, name: &str, cores_per_server: usize) -> Result<Self> {
        let mut rdr = csv::Reader::from_reader(input);
        let headers = rdr.headers()?.clone();
        if headers.len() != 2 || &headers[0] != "load" || &headers[1] != "watts" {
            return Err(Error::ProfileFormat(format!(
                "expected CSV header `load,watts`, got `{}`",
                headers.iter().collect::<Vec<_>>().join(",")
            )));
        }
        let curve = rdr
            .deserialize()
            .collect::<std::result::Result<Vec<(f64, f64)>, _>>()?;
        let p = ServerProfile {
            name: name.to_string(),
            cores_per_server,
            curve,
            notes: None,
        };
        p.validate()?;
        Ok(p)
    }

    pub fn bundled(name: &str) -> Result<Self> {
        let text = match name {
            "asus-80core" => ASUS_80,
            "hpe-400core" => HPE_400,
            _ => return Err(Error::UnknownProfile(name.to_string())),
        };
        Self::from_json(text)
    }

    pub fn idle_watts(&self) -> f64 {
        self.curve[0].1
    }

    pub fn max_watts(&self) -> f64 {
        self.curve[self.curve.len() - 1].1
    }

    /// Interpolated draw of one server at `load` in `[0, 1]`.
    pub fn power_at_load(&self, load: f64) -> Result<f64> {
        if !(0.0..=1.0).contains(&load) {
            return Err(Error::Domain(format!("load {load} outside [0, 1]")));
        }
        let i = self.curve.partition_point(|&(l, _)| l <= load);
        if i == self.curve.len() {
            return Ok(self.max_watts());
        }
        let (l0, w0) = self.curve[i - 1];
        let (l1, w1) = self.curve[i];
        Ok(w0 + (w1 - w0) * (load - l0) / (l1 - l0))
    }
}

pub fn load_power_profile(text: &str) -> Result<ServerProfile> {
    ServerProfile::from_json(text)
}

pub fn power_at_load(p: &ServerProfile, load: f64) -> Result<f64> {
    p.power_at_load(load)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PowerScheme {
    Shared,
    Separate,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PowerReport {
    pub scheme: PowerScheme,
    pub cores_used: usize,
    pub servers_used: usize,
    pub total_watts: f64,
    /// Draw of each occupied server, in provisioning order.
    pub server_watts: Vec<f64>,
}

fn server_watts(utils: &[f64], p: &ServerProfile) -> Vec<f64> {
    let capacity = CORE_CAPACITY * p.cores_per_server as f64;
    utils
        .chunks(p.cores_per_server)
        .map(|chunk| {
            let load = (chunk.iter().sum::<f64>() / capacity).clamp(0.0, 1.0);
            p.power_at_load(load).expect("load clamped into [0, 1]")
        })
        .collect()
}

/// Power of a single allocation.
pub fn allocation_power(a: &Allocation, p: &ServerProfile) -> PowerReport {
    let utils: Vec<f64> = a.utilizations().collect();
    let server_watts = server_watts(&utils, p);
    PowerReport {
        scheme: PowerScheme::Shared,
        cores_used: utils.len(),
        servers_used: server_watts.len(),
        total_watts: server_watts.iter().sum(),
        server_watts,
    }
}

/// Power of a shared-pool allocation.
pub fn shared_power(a: &Allocation, p: &ServerProfile) -> PowerReport {
    allocation_power(a, p)
}

/// Power of a separate `(sdr, sdn)` pair; each class occupies its own servers.
pub fn separate_power(sdr: &Allocation, sdn: &Allocation, p: &ServerProfile) -> PowerReport {
    let a = allocation_power(sdr, p);
    let b = allocation_power(sdn, p);
    let mut server_watts = a.server_watts;
    server_watts.extend(b.server_watts);
    PowerReport {
        scheme: PowerScheme::Separate,
        cores_used: a.cores_used + b.cores_used,
        servers_used: a.servers_used + b.servers_used,
        total_watts: a.total_watts + b.total_watts,
        server_watts,
    }
}

/// Either side of the comparison.
pub enum Provisioning<'a> {
    Shared(&'a Allocation),
    Separate(&'a Allocation, &'a Allocation),
}

pub fn total_power(a: Provisioning<'_>, p: &ServerProfile) -> PowerReport {
    match a {
        Provisioning::Shared(a) => shared_power(a, p),
        Provisioning::Separate(sdr, sdn) => separate_power(sdr, sdn, p),
    }
}

/// `100 * (baseline - improved) / baseline`.
pub fn savings_pct(improved: f64, baseline: f64) -> Result<f64> {
    if baseline == 0.0 {
        return Err(Error::UndefinedSavings);
    }
    Ok(100.0 * (baseline - improved) / baseline)
}

pub fn savings_percent(shared: &PowerReport, separate: &PowerReport) -> Result<f64> {
    savings_pct(shared.total_watts, separate.total_watts)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::allocator::allocate_shared;
    use crate::workload::Workload;

    fn two_point() -> ServerProfile {
        ServerProfile {
            name: "lin".into(),
            cores_per_server: 80,
            curve: vec![(0.0, 100.0), (1.0, 500.0)],
            notes: None,
        }
    }

    #[test]
    fn bundled_idle_points() {
        let asus = ServerProfile::bundled("asus-80core").unwrap();
        assert_eq!(asus.cores_per_server, 80);
        assert_eq!(asus.power_at_load(0.0).unwrap(), 100.0);
        let hpe = ServerProfile::bundled("hpe-400core").unwrap();
        assert_eq!(hpe.cores_per_server, 400);
        assert_eq!(power_at_load(&hpe, 0.0).unwrap(), 700.0);
        assert!(matches!(
            ServerProfile::bundled("nope"),
            Err(Error::UnknownProfile(_))
        ));
    }

    #[test]
    fn midpoint_and_knots() {
        let p = two_point();
        assert_eq!(p.power_at_load(0.5).unwrap(), 300.0);
        assert_eq!(p.power_at_load(1.0).unwrap(), 500.0);
        let p = ServerProfile {
            curve: vec![(0.0, 50.0), (0.1, 80.0), (0.6, 80.0), (1.0, 200.0)],
            ..two_point()
        };
        for &(l, w) in &p.curve {
            assert_eq!(p.power_at_load(l).unwrap(), w);
        }
        assert!((p.power_at_load(0.05).unwrap() - 65.0).abs() < 1e-12);
        assert!((p.power_at_load(0.8).unwrap() - 140.0).abs() < 1e-12);
    }

    #[test]
    fn load_domain() {
        assert!(two_point().power_at_load(-0.01).is_err());
        assert!(two_point().power_at_load(1.01).is_err());
        assert!(two_point().power_at_load(f64::NAN).is_err());
    }

    #[test]
    fn rejects_bad_curves() {
        let bad = [
            r#"{"name":"x","cores_per_server":8,"curve":[[0,100],[1,90]]}"#,
            r#"{"name":"x","cores_per_server":8,"curve":[[0,100],[0.5,120],[0.5,130],[1,150]]}"#,
            r#"{"name":"x","cores_per_server":8,"curve":[[0.1,100],[1,150]]}"#,
            r#"{"name":"x","cores_per_server":8,"curve":[[0,100],[0.9,150]]}"#,
            r#"{"name":"x","cores_per_server":8,"curve":[[0,100]]}"#,
            r#"{"name":"x","cores_per_server":0,"curve":[[0,100],[1,150]]}"#,
        ];
        for text in bad {
            assert!(
                matches!(load_power_profile(text), Err(Error::ProfileFormat(_))),
                "{text}"
            );
        }
    }

    #[test]
    fn csv_profile() {
        let p = ServerProfile::from_csv("load,watts\n0,60\n0.5,120\n1,200\n".as_bytes(), "c", 16)
            .unwrap();
        assert_eq!(p.curve.len(), 3);
        assert_eq!(p.power_at_load(0.25).unwrap(), 90.0);
        assert!(ServerProfile::from_csv("l,w\n0,1\n1,2\n".as_bytes(), "c", 16).is_err());
    }

    #[test]
    fn empty_allocation_draws_nothing() {
        let w = Workload::from_utilizations(&[], &[]);
        let r = shared_power(&allocate_shared(&w).unwrap(), &two_point());
        assert_eq!((r.total_watts, r.servers_used, r.cores_used), (0.0, 0, 0));
    }

    #[test]
    fn one_full_core() {
        let w = Workload::from_utilizations(&[100.0], &[]);
        let r = total_power(
            Provisioning::Shared(&allocate_shared(&w).unwrap()),
            &two_point(),
        );
        assert_eq!(r.servers_used, 1);
        assert!((r.total_watts - 105.0).abs() < 1e-12);
    }

    #[test]
    fn servers_filled_in_index_order() {
        let p = ServerProfile {
            cores_per_server: 2,
            ..two_point()
        };
        let w = Workload::from_utilizations(&[100.0, 100.0, 50.0], &[]);
        let r = shared_power(&allocate_shared(&w).unwrap(), &p);
        assert_eq!(r.servers_used, 2);
        assert_eq!(r.server_watts, vec![500.0, 200.0]);
    }

    #[test]
    fn savings() {
        assert_eq!(savings_pct(80.0, 100.0).unwrap(), 20.0);
        assert_eq!(savings_pct(100.0, 100.0).unwrap(), 0.0);
        assert!(matches!(
            savings_pct(0.0, 0.0),
            Err(Error::UndefinedSavings)
        ));
    }
}
