use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid use case {0}: expected 1, 2 or 3")]
    InvalidUsecase(u32),

    #[error("invalid workload spec: {0}")]
    InvalidSpec(String),

    #[error(
        "no measurement for PRB {prb} / {protocol} / {bandwidth} Mbps; valid settings: {valid}"
    )]
    MeasurementNotFound {
        prb: u32,
        protocol: String,
        bandwidth: f64,
        valid: String,
    },

    #[error("rate model fit needs at least 2 distinct rates, got {0}")]
    UnderdeterminedFit(usize),

    #[error("degenerate rate model fit: slope {slope} is not positive (intercept {intercept})")]
    DegenerateFit { intercept: f64, slope: f64 },

    #[error("value out of domain: {0}")]
    Domain(String),

    #[error("process {id} needs {utilization}% of a core and cannot be placed")]
    InfeasibleProcess { id: u32, utilization: f64 },

    #[error("oracle instance too large: {items} SDR items exceeds limit {max}")]
    OracleSize { items: usize, max: usize },

    #[error("invalid power profile: {0}")]
    ProfileFormat(String),

    #[error("unknown bundled profile `{0}`")]
    UnknownProfile(String),

    #[error("savings undefined for a zero baseline")]
    UndefinedSavings,

    #[error("statistics need at least one sample")]
    EmptySample,

    #[error("at least one trial is required")]
    NoTrials,

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
