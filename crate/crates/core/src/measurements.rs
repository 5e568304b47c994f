//! Testbed measurement tables and the SDN utilization-vs-rate model.

use std::fmt;
use std::io::{Read, Write};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Protocol {
    #[serde(rename = "TCP")]
    Tcp,
    #[serde(rename = "UDP")]
    Udp,
}

impl fmt::Display for Protocol {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Protocol::Tcp => f.write_str("TCP"),
            Protocol::Udp => f.write_str("UDP"),
        }
    }
}

impl std::str::FromStr for Protocol {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_uppercase().as_str() {
            "TCP" => Ok(Protocol::Tcp),
            "UDP" => Ok(Protocol::Udp),
            _ => Err(Error::Domain(format!("unknown protocol `{s}`"))),
        }
    }
}

/// One row of an SDR eNodeB measurement table. `loss_or_retries` holds TCP
/// retries or UDP packet loss, depending on the protocol.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SdrMeasurement {
    pub prb: u32,
    pub protocol: Protocol,
    #[serde(rename = "bandwidth_setting_mbps")]
    pub bandwidth_setting: f64,
    #[serde(rename = "throughput_mbps")]
    pub real_throughput: f64,
    #[serde(rename = "cpu_util_pct")]
    pub cpu_utilization: f64,
    pub loss_or_retries: f64,
}

impl SdrMeasurement {
    fn check(&self) -> Result<()> {
        if !(0.0..=100.0).contains(&self.cpu_utilization) {
            return Err(Error::Domain(format!(
                "cpu utilization {} outside [0, 100]",
                self.cpu_utilization
            )));
        }
        if self.real_throughput > self.bandwidth_setting * 1.05 {
            return Err(Error::Domain(format!(
                "throughput {} exceeds offered load {}",
                self.real_throughput, self.bandwidth_setting
            )));
        }
        if self.loss_or_retries < 0.0 {
            return Err(Error::Domain("negative loss/retries".into()));
        }
        Ok(())
    }
}

// setting, TCP throughput, TCP cpu, retries, UDP throughput, UDP cpu, loss
type Row = (f64, f64, f64, f64, f64, f64, f64);

const PRB50: [Row; 12] = [
    (1.0, 1.0, 28.5, 0.0, 1.0, 29.8, 0.0),
    (5.0, 5.0, 68.3, 0.0, 5.0, 49.0, 0.0),
    (10.0, 9.8, 73.4, 0.0, 10.0, 62.8, 0.0),
    (15.0, 14.6, 76.3, 0.0, 15.0, 74.2, 0.0),
    (20.0, 19.3, 87.1, 0.0, 20.0, 84.7, 0.0),
    (25.0, 21.2, 90.3, 36.0, 20.6, 86.6, 16.0),
    (30.0, 21.2, 90.3, 58.0, 20.6, 86.1, 30.0),
    (35.0, 21.1, 90.8, 44.0, 20.3, 86.0, 41.0),
    (40.0, 21.1, 90.9, 30.0, 20.6, 86.6, 48.0),
    (45.0, 21.1, 90.9, 31.0, 20.1, 86.0, 54.0),
    (50.0, 21.2, 90.4, 40.0, 20.1, 85.1, 59.0),
    (100.0, 21.2, 90.0, 50.0, 19.5, 86.7, 80.0),
];

const PRB25: [Row; 11] = [
    (1.0, 1.0, 42.1, 0.0, 1.0, 37.4, 0.0),
    (5.0, 4.99, 50.3, 0.0, 4.99, 51.0, 0.0),
    (10.0, 9.46, 61.1, 54.0, 9.13, 62.3, 8.1),
    (15.0, 9.46, 64.4, 58.0, 9.03, 60.1, 39.0),
    (20.0, 9.46, 63.1, 57.0, 8.92, 63.3, 55.0),
    (25.0, 9.46, 64.1, 54.0, 8.82, 63.1, 64.0),
    (30.0, 9.46, 63.7, 58.0, 8.74, 63.1, 71.0),
    (35.0, 9.46, 65.0, 53.0, 7.71, 63.3, 78.0),
    (40.0, 9.46, 61.7, 59.0, 7.48, 62.9, 81.0),
    (45.0, 9.47, 59.5, 58.0, 7.21, 62.1, 84.0),
    (50.0, 9.46, 63.6, 58.0, 6.54, 63.3, 86.0),
];

/// A set of SDR measurements keyed by `(prb, protocol, bandwidth_setting)`.
#[derive(Debug, Clone, PartialEq)]
pub struct MeasurementTable {
    rows: Vec<SdrMeasurement>,
}

impl MeasurementTable {
    /// The PRB 50 and PRB 25 eNodeB tables measured on the testbed.
    pub fn embedded() -> Self {
        let mut rows = Vec::with_capacity(2 * (PRB50.len() + PRB25.len()));
        for (prb, table) in [(50, &PRB50[..]), (25, &PRB25[..])] {
            for &(bw, tcp_thr, tcp_cpu, retries, udp_thr, udp_cpu, loss) in table {
                rows.push(SdrMeasurement {
                    prb,
                    protocol: Protocol::Tcp,
                    bandwidth_setting: bw,
                    real_throughput: tcp_thr,
                    cpu_utilization: tcp_cpu,
                    loss_or_retries: retries,
                });
                rows.push(SdrMeasurement {
                    prb,
                    protocol: Protocol::Udp,
                    bandwidth_setting: bw,
                    real_throughput: udp_thr,
                    cpu_utilization: udp_cpu,
                    loss_or_retries: loss,
                });
            }
        }
        MeasurementTable { rows }
    }

    pub fn from_rows(rows: Vec<SdrMeasurement>) -> Result<Self> {
        for r in &rows {
            r.check()?;
        }
        Ok(MeasurementTable { rows })
    }

    pub fn rows(&self) -> &[SdrMeasurement] {
        &self.rows
    }

    pub fn lookup(&self, prb: u32, protocol: Protocol, bandwidth: f64) -> Result<SdrMeasurement> {
        self.rows
            .iter()
            .find(|r| r.prb == prb && r.protocol == protocol && r.bandwidth_setting == bandwidth)
            .copied()
            .ok_or_else(|| {
                let settings: Vec<String> = self
                    .rows
                    .iter()
                    .filter(|r| r.prb == prb && r.protocol == protocol)
                    .map(|r| r.bandwidth_setting.to_string())
                    .collect();
                let valid = if settings.is_empty() {
                    let mut keys: Vec<String> = self
                        .rows
                        .iter()
                        .map(|r| format!("PRB {} {}", r.prb, r.protocol))
                        .collect();
                    keys.dedup();
                    keys.join(", ")
                } else {
                    settings.join(", ")
                };
                Error::MeasurementNotFound {
                    prb,
                    protocol: protocol.to_string(),
                    bandwidth,
                    valid,
                }
            })
    }

    /// Writes the table with header
    /// `prb,protocol,bandwidth_setting_mbps,throughput_mbps,cpu_util_pct,loss_or_retries`.
    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut wtr = csv::Writer::from_writer(out);
        for r in &self.rows {
            wtr.serialize(r)?;
        }
        wtr.flush()?;
        Ok(())
    }

    pub fn read_csv<R: Read>(input: R) -> Result<Self> {
        let mut rdr = csv::Reader::from_reader(input);
        let rows = rdr
            .deserialize()
            .collect::<std::result::Result<Vec<SdrMeasurement>, _>>()?;
        Self::from_rows(rows)
    }
}

/// Looks a row up in the embedded tables.
pub fn sdr_measurement_lookup(
    prb: u32,
    protocol: Protocol,
    bandwidth_setting: f64,
) -> Result<SdrMeasurement> {
    MeasurementTable::embedded().lookup(prb, protocol, bandwidth_setting)
}

/// SDN data-plane CPU utilization as a log-linear function of data rate:
/// `utilization = intercept + slope * log10(rate_kbps)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SdnRateModel {
    pub intercept: f64,
    /// Percent per decade of data rate.
    pub slope: f64,
}

/// Mean OVS utilization anchors: 20% at 100 kbps, 175% at 10 Gbps.
pub const SDN_ANCHORS: [(f64, f64); 2] = [(100.0, 20.0), (1.0e7, 175.0)];

impl SdnRateModel {
    /// Least-squares fit over `(rate_kbps, utilization_pct)` points.
    pub fn fit(points: &[(f64, f64)]) -> Result<Self> {
        if let Some(&(rate, _)) = points.iter().find(|(r, _)| !(*r > 0.0 && r.is_finite())) {
            return Err(Error::Domain(format!("rate {rate} must be positive")));
        }
        let mut rates: Vec<f64> = points.iter().map(|p| p.0).collect();
        rates.sort_by(f64::total_cmp);
        rates.dedup();
        if rates.len() < 2 {
            return Err(Error::UnderdeterminedFit(rates.len()));
        }

        let n = points.len() as f64;
        let xs: Vec<f64> = points.iter().map(|p| p.0.log10()).collect();
        let x_mean = xs.iter().sum::<f64>() / n;
        let y_mean = points.iter().map(|p| p.1).sum::<f64>() / n;
        let (mut sxy, mut sxx) = (0.0, 0.0);
        for (x, &(_, y)) in xs.iter().zip(points) {
            sxy += (x - x_mean) * (y - y_mean);
            sxx += (x - x_mean) * (x - x_mean);
        }
        let slope = sxy / sxx;
        let intercept = y_mean - slope * x_mean;
        if slope <= 0.0 {
            return Err(Error::DegenerateFit { intercept, slope });
        }
        Ok(SdnRateModel { intercept, slope })
    }

    /// The two-point model through [`SDN_ANCHORS`].
    pub fn anchored() -> Self {
        Self::fit(&SDN_ANCHORS).expect("anchor points are well-conditioned")
    }

    /// Predicted utilization in percent of one core; may exceed 100 for
    /// multi-core load. Clamped below at zero.
    pub fn predict(&self, rate_kbps: f64) -> Result<f64> {
        if !(rate_kbps > 0.0) {
            return Err(Error::Domain(format!(
                "rate {rate_kbps} kbps must be positive"
            )));
        }
        Ok((self.intercept + self.slope * rate_kbps.log10()).max(0.0))
    }
}

pub fn fit_sdn_rate_model(points: &[(f64, f64)]) -> Result<SdnRateModel> {
    SdnRateModel::fit(points)
}

pub fn predict_sdn_utilization(model: &SdnRateModel, rate_kbps: f64) -> Result<f64> {
    model.predict(rate_kbps)
}
