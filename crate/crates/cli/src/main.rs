use std::fs;
use std::io::{self, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{Context, Result};
use clap::error::ErrorKind;
use clap::{Args, CommandFactory, Parser, Subcommand, ValueEnum};
use corepool::experiments::{
    reproduce, run_trials_with, ComparisonReport, ReportFormat, TrialConfig,
};
use corepool::measurements::{MeasurementTable, Protocol};
use corepool::power::ServerProfile;
use corepool::{
    allocate_separate, allocate_shared, generate_workload, usecase_spec, SeparateSdn, WorkloadSpec,
};

/// Environment variable naming a directory searched for `<name>.json`
/// profiles before the bundled ones.
const PROFILE_DIR_ENV: &str = "COREPOOL_PROFILE_DIR";

#[derive(Parser)]
#[command(
    name = "corepool",
    version,
    about = "Shared CPU-core pool simulator for co-located SDN and SDR processes"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Generate a workload and write it as CSV (id,kind,utilization).
    Generate {
        #[command(flatten)]
        spec: SpecSource,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
    /// Generate a workload and write its allocation(s) as JSON.
    Allocate {
        #[command(flatten)]
        spec: SpecSource,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, value_enum, default_value_t = SchemeArg::Shared)]
        scheme: SchemeArg,
        #[arg(long, value_enum, default_value_t = SdnBaselineArg::PerProcess)]
        separate_sdn: SdnBaselineArg,
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
    /// Run repeated shared-vs-separate trials and report savings.
    Compare {
        #[command(flatten)]
        spec: SpecSource,
        #[command(flatten)]
        profile: ProfileSource,
        #[arg(long, default_value_t = 20, value_parser = clap::value_parser!(u64).range(1..))]
        trials: u64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, value_enum, default_value_t = SdnBaselineArg::PerProcess)]
        separate_sdn: SdnBaselineArg,
        #[arg(long, value_enum, default_value_t = FormatArg::Csv)]
        format: FormatArg,
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
    /// Run every use case against both bundled profiles with fixed seeds.
    Reproduce {
        #[arg(long, conflicts_with = "usecase", required_unless_present = "usecase")]
        all: bool,
        #[arg(long, value_parser = clap::value_parser!(u32).range(1..=3))]
        usecase: Option<u32>,
        #[arg(long, default_value_t = 20, value_parser = clap::value_parser!(u64).range(1..))]
        trials: u64,
        #[arg(long, value_enum, default_value_t = FormatArg::Csv)]
        format: FormatArg,
        #[arg(short, long, default_value = "reproduction")]
        output: PathBuf,
    },
    /// Sample a power profile as a `load,watts` CSV.
    PowerCurve {
        #[command(flatten)]
        profile: ProfileSource,
        #[arg(long, default_value_t = 11, value_parser = clap::value_parser!(u64).range(2..))]
        steps: u64,
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
    /// Export the SDR measurement tables, or look up one row.
    Measurements {
        /// Replace the embedded tables with a CSV in the export format.
        #[arg(long)]
        input: Option<PathBuf>,
        #[arg(long, requires_all = ["protocol", "bandwidth"])]
        prb: Option<u32>,
        #[arg(long, value_enum, requires = "prb")]
        protocol: Option<ProtocolArg>,
        #[arg(long, requires = "prb")]
        bandwidth: Option<f64>,
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
}

#[derive(Args)]
#[group(required = true, multiple = false)]
struct SpecSource {
    /// Preset process mix (1, 2 or 3).
    #[arg(long, value_parser = clap::value_parser!(u32).range(1..=3))]
    usecase: Option<u32>,
    /// JSON workload spec file.
    #[arg(long)]
    spec: Option<PathBuf>,
}

#[derive(Args)]
struct ProfileSource {
    /// Bundled profile name, a name under $COREPOOL_PROFILE_DIR, or a .json/.csv file.
    #[arg(long)]
    profile: String,
    /// Cores per server, for CSV profiles.
    #[arg(long)]
    cores: Option<usize>,
    /// Profile name, for CSV profiles (defaults to the file stem).
    #[arg(long)]
    profile_name: Option<String>,
}

#[derive(Clone, Copy, ValueEnum)]
enum SchemeArg {
    Shared,
    Separate,
}

#[derive(Clone, Copy, ValueEnum)]
enum SdnBaselineArg {
    PerProcess,
    Fluid,
}

impl From<SdnBaselineArg> for SeparateSdn {
    fn from(a: SdnBaselineArg) -> Self {
        match a {
            SdnBaselineArg::PerProcess => SeparateSdn::PerProcess,
            SdnBaselineArg::Fluid => SeparateSdn::Fluid,
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum FormatArg {
    Csv,
    Json,
}

impl From<FormatArg> for ReportFormat {
    fn from(a: FormatArg) -> Self {
        match a {
            FormatArg::Csv => ReportFormat::Csv,
            FormatArg::Json => ReportFormat::Json,
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum ProtocolArg {
    Tcp,
    Udp,
}

fn usage_error(msg: impl std::fmt::Display) -> ! {
    Cli::command()
        .error(ErrorKind::ArgumentConflict, msg)
        .exit()
}

impl SpecSource {
    fn resolve(&self) -> Result<(WorkloadSpec, String)> {
        match (&self.usecase, &self.spec) {
            (Some(n), _) => Ok((usecase_spec(*n)?, format!("usecase-{n}"))),
            (None, Some(path)) => {
                let text = fs::read_to_string(path)
                    .with_context(|| format!("reading spec {}", path.display()))?;
                let spec = WorkloadSpec::from_json(&text)
                    .with_context(|| format!("parsing spec {}", path.display()))?;
                let label = path
                    .file_stem()
                    .map(|s| s.to_string_lossy().into_owned())
                    .unwrap_or_else(|| "custom".into());
                Ok((spec, label))
            }
            (None, None) => unreachable!("clap enforces one spec source"),
        }
    }
}

impl ProfileSource {
    fn resolve(&self) -> Result<ServerProfile> {
        let arg = &self.profile;
        let path = Path::new(arg);
        let is_csv = path.extension().is_some_and(|e| e == "csv");
        if path.is_file() || is_csv {
            let text = fs::read_to_string(path)
                .with_context(|| format!("reading profile {}", path.display()))?;
            if is_csv {
                let Some(cores) = self.cores else {
                    usage_error("CSV profiles need --cores");
                };
                let name = self.profile_name.clone().unwrap_or_else(|| {
                    path.file_stem()
                        .map(|s| s.to_string_lossy().into_owned())
                        .unwrap_or_else(|| "custom".into())
                });
                return Ok(ServerProfile::from_csv(text.as_bytes(), &name, cores)?);
            }
            return ServerProfile::from_json(&text)
                .with_context(|| format!("parsing profile {}", path.display()));
        }
        if let Some(dir) = std::env::var_os(PROFILE_DIR_ENV) {
            let candidate = Path::new(&dir).join(format!("{arg}.json"));
            if candidate.is_file() {
                let text = fs::read_to_string(&candidate)?;
                return ServerProfile::from_json(&text)
                    .with_context(|| format!("parsing profile {}", candidate.display()));
            }
        }
        Ok(ServerProfile::bundled(arg)?)
    }
}

/// Writes via a temporary file in the target directory, then renames.
fn write_atomic(path: &Path, bytes: &[u8]) -> Result<()> {
    let dir = match path.parent() {
        Some(p) if !p.as_os_str().is_empty() => p,
        _ => Path::new("."),
    };
    let mut tmp = tempfile::NamedTempFile::new_in(dir)
        .with_context(|| format!("creating temporary file in {}", dir.display()))?;
    tmp.write_all(bytes)?;
    tmp.as_file().sync_all()?;
    tmp.persist(path)
        .with_context(|| format!("writing {}", path.display()))?;
    Ok(())
}

fn emit(output: Option<&Path>, bytes: &[u8]) -> Result<()> {
    match output {
        Some(path) => write_atomic(path, bytes),
        None => {
            io::stdout().write_all(bytes)?;
            Ok(())
        }
    }
}

fn summary(r: &ComparisonReport) -> String {
    let s = &r.stats;
    format!(
        "{} on {}, {} trials from seed {}\n\
         median cores: shared {} / separate {} (savings {:.2}%)\n\
         median power: shared {:.1} W / separate {:.1} W (savings {:.2}%)\n",
        r.label,
        r.profile,
        r.trials.len(),
        r.base_seed,
        s.shared_cores.median,
        s.separate_cores.median,
        s.core_savings_pct.median,
        s.shared_watts.median,
        s.separate_watts.median,
        s.power_savings_pct.median,
    )
}

fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Generate { spec, seed, output } => {
            let (spec, _) = spec.resolve()?;
            let w = generate_workload(&spec, seed)?;
            let mut buf = Vec::new();
            w.write_csv(&mut buf)?;
            emit(output.as_deref(), &buf)
        }
        Command::Allocate {
            spec,
            seed,
            scheme,
            separate_sdn,
            output,
        } => {
            let (spec, _) = spec.resolve()?;
            let w = generate_workload(&spec, seed)?;
            let mut text = match scheme {
                SchemeArg::Shared => allocate_shared(&w)?.to_json()?,
                SchemeArg::Separate => {
                    let (sdr, sdn) = allocate_separate(&w, separate_sdn.into())?;
                    format!("[\n{},\n{}\n]", sdr.to_json()?, sdn.to_json()?)
                }
            };
            text.push('\n');
            emit(output.as_deref(), text.as_bytes())
        }
        Command::Compare {
            spec,
            profile,
            trials,
            seed,
            separate_sdn,
            format,
            output,
        } => {
            let (spec, label) = spec.resolve()?;
            let profile = profile.resolve()?;
            let config = TrialConfig {
                label,
                separate_sdn: separate_sdn.into(),
            };
            let report = run_trials_with(&spec, &profile, trials as usize, seed, &config)?;
            let bytes = report.export(format.into())?;
            match output {
                Some(path) => {
                    write_atomic(&path, &bytes)?;
                    print!("{}", summary(&report));
                }
                None => {
                    io::stdout().write_all(&bytes)?;
                    eprint!("{}", summary(&report));
                }
            }
            Ok(())
        }
        Command::Reproduce {
            all,
            usecase,
            trials,
            format,
            output,
        } => {
            let usecases: Vec<u32> = if all {
                vec![1, 2, 3]
            } else {
                usecase.into_iter().collect()
            };
            let bundle = reproduce(&usecases, trials as usize, format.into())?;
            let files = bundle.files()?;
            fs::create_dir_all(&output)
                .with_context(|| format!("creating {}", output.display()))?;
            for (name, bytes) in &files {
                write_atomic(&output.join(name), bytes)?;
            }
            print!("{}", bundle.summary);
            Ok(())
        }
        Command::PowerCurve {
            profile,
            steps,
            output,
        } => {
            let profile = profile.resolve()?;
            let mut text = String::from("load,watts\n");
            for i in 0..steps {
                let load = i as f64 / (steps - 1) as f64;
                text.push_str(&format!("{},{}\n", load, profile.power_at_load(load)?));
            }
            emit(output.as_deref(), text.as_bytes())
        }
        Command::Measurements {
            input,
            prb,
            protocol,
            bandwidth,
            output,
        } => {
            let table = match input {
                Some(path) => {
                    let file = fs::File::open(&path)
                        .with_context(|| format!("opening {}", path.display()))?;
                    MeasurementTable::read_csv(file)?
                }
                None => MeasurementTable::embedded(),
            };
            let table = match (prb, protocol, bandwidth) {
                (Some(prb), Some(protocol), Some(bw)) => {
                    let protocol = match protocol {
                        ProtocolArg::Tcp => Protocol::Tcp,
                        ProtocolArg::Udp => Protocol::Udp,
                    };
                    MeasurementTable::from_rows(vec![table.lookup(prb, protocol, bw)?])?
                }
                _ => table,
            };
            let mut buf = Vec::new();
            table.write_csv(&mut buf)?;
            emit(output.as_deref(), &buf)
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(1)
        }
    }
}
