use std::collections::BTreeMap;
use std::f64::consts::{FRAC_PI_2, FRAC_PI_4, PI};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use serde::Serialize;

use freqbeam::device::{self, AcousticDrive, AomGeometry, MaterialTable};
use freqbeam::io::{
    oracle_report, parse_circuit, run_document, run_sweep, CircuitDocument, SweepSpec,
};
use freqbeam::scenarios::{
    run_biexciton_fbs, run_biexciton_fbs_prime, run_erasure, run_hom, BiexcitonConfig,
    DetectorSettings, ErasureConfig, ErasureGeometry, ScenarioResult,
};
use freqbeam::Error;

#[derive(Parser)]
#[command(
    name = "freqbeam",
    version,
    about = "Few-photon frequency-bin circuit simulator"
)]
struct Cli {
    /// Output format.
    #[arg(long, global = true, value_enum, default_value_t = Format::Json)]
    output: Format,
    /// Write to this file instead of stdout.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Seed for randomized checks.
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Json,
    Csv,
}

#[derive(Subcommand)]
enum Command {
    /// Run a circuit document.
    Run { file: PathBuf },
    /// Run one of the built-in scenarios.
    Scenario(ScenarioArgs),
    /// Scan one numeric field of a document.
    Sweep {
        file: PathBuf,
        /// JSON pointer, dotted path or component-name.field.
        #[arg(long)]
        param: String,
        #[arg(long, allow_negative_numbers = true)]
        from: f64,
        #[arg(long, allow_negative_numbers = true)]
        to: f64,
        #[arg(long)]
        steps: usize,
        /// Metric to record (repeatable); default is all.
        #[arg(long = "metric")]
        metrics: Vec<String>,
    },
    /// AOM coupling, interaction constant and bandwidth error for a crystal.
    Device {
        material: String,
        /// Interaction length, m.
        #[arg(long, default_value_t = 1e-3)]
        length: f64,
        /// Acoustic intensity, W/m².
        #[arg(long, default_value_t = 1e6)]
        intensity: f64,
        /// Report the intensity needed to reach this interaction angle.
        #[arg(long)]
        target_theta: Option<f64>,
        /// Optical frequency, Hz.
        #[arg(long, default_value_t = 3.3e14)]
        frequency_hz: f64,
        /// Optical detuning for the bandwidth estimate, Hz.
        #[arg(long, default_value_t = 1e9)]
        delta_hz: f64,
        /// Acoustic drive frequency, Hz.
        #[arg(long, default_value_t = 1e9)]
        modulation_hz: f64,
    },
    /// Compare simulator amplitudes with the permanent formula.
    Oracle {
        file: PathBuf,
        /// Also check this many Haar-random unitaries.
        #[arg(long, default_value_t = 0)]
        random: usize,
    },
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum ScenarioName {
    Erasure,
    Hom,
    BiexcitonFbs,
    BiexcitonFbsPrime,
}

#[derive(clap::Args)]
struct ScenarioArgs {
    #[arg(value_enum)]
    name: ScenarioName,
    /// AOM interaction angle; defaults to π/4 (erasure, hom) or π/2 (biexciton).
    #[arg(long, allow_negative_numbers = true)]
    theta: Option<f64>,
    /// Shift efficiency of the heralded shifter.
    #[arg(long, default_value_t = 0.8)]
    alpha: f64,
    /// Absorption per AOM pass.
    #[arg(long, default_value_t = freqbeam::components::DEFAULT_AOM_ABSORPTION)]
    absorption: f64,
    /// Doublet splitting (biexciton) or source detuning (erasure, hom), Hz.
    #[arg(long)]
    delta: Option<f64>,
    /// Biexciton shift, Hz.
    #[arg(long, default_value_t = 1e11)]
    xi: f64,
    /// Phase between the emission branches.
    #[arg(long, default_value_t = 0.0, allow_negative_numbers = true)]
    nu: f64,
    /// Base optical frequency, Hz.
    #[arg(long, default_value_t = 3.3e14)]
    omega1: f64,
    /// Detectors do not resolve frequency.
    #[arg(long)]
    blind: bool,
    /// Prism-sorted output instead of direction-correlated frequencies.
    #[arg(long)]
    prism: bool,
    #[arg(long, default_value_t = 1.0)]
    detector_efficiency: f64,
    #[arg(long, default_value_t = 0.0)]
    dark_count: f64,
}

/// Failure with the phase it happened in: 1 for input and validation
/// problems, 2 for failures while running.
struct Failure {
    code: u8,
    error: Error,
}

fn invalid(error: Error) -> Failure {
    Failure { code: 1, error }
}

fn runtime(error: Error) -> Failure {
    Failure { code: 2, error }
}

fn load(path: &Path) -> Result<CircuitDocument, Failure> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| invalid(Error::document(path.display().to_string(), e.to_string())))?;
    parse_circuit(&text)
        .map_err(|e| invalid(Error::document(path.display().to_string(), e.to_string())))
}

fn to_json<T: Serialize>(value: &T) -> String {
    serde_json::to_string_pretty(value).expect("output serializes") + "\n"
}

fn key_value_csv(rows: impl IntoIterator<Item = (String, String)>) -> String {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(["key", "value"]).expect("in-memory write");
    for (k, v) in rows {
        w.write_record([k, v]).expect("in-memory write");
    }
    String::from_utf8(w.into_inner().expect("in-memory flush")).expect("utf-8")
}

fn scenario_csv(r: &ScenarioResult) -> String {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record([
        "outcome",
        "probability",
        "fidelity",
        "concurrence",
        "distinguishability",
    ])
    .expect("in-memory write");
    let opt = |v: Option<f64>| v.map_or(String::new(), |v| v.to_string());
    for o in &r.outcomes {
        w.write_record([
            o.outcome.clone(),
            o.probability.to_string(),
            opt(o.fidelity),
            opt(o.concurrence),
            opt(o.distinguishability),
        ])
        .expect("in-memory write");
    }
    String::from_utf8(w.into_inner().expect("in-memory flush")).expect("utf-8")
}

fn scenario(args: &ScenarioArgs) -> Result<ScenarioResult, Failure> {
    match args.name {
        ScenarioName::Erasure | ScenarioName::Hom => {
            let delta = args.delta.unwrap_or(1e9);
            let config = ErasureConfig {
                omega_1: args.omega1,
                omega_2: args.omega1 - delta,
                theta: args.theta.unwrap_or(FRAC_PI_4),
                frequency_blind: args.blind,
                geometry: if args.prism {
                    ErasureGeometry::PrismSorted
                } else {
                    ErasureGeometry::DirectionCorrelated
                },
            };
            config.validate().map_err(invalid)?;
            if args.name == ScenarioName::Erasure {
                run_erasure(&config)
            } else {
                run_hom(&config)
            }
            .map_err(|e| match e {
                Error::InvalidParameter { .. } => invalid(e),
                e => runtime(e),
            })
        }
        ScenarioName::BiexcitonFbs | ScenarioName::BiexcitonFbsPrime => {
            let detector = DetectorSettings {
                efficiency: args.detector_efficiency,
                dark_count_probability: args.dark_count,
            };
            let config = BiexcitonConfig {
                phase: args.nu,
                theta: args.theta.unwrap_or(FRAC_PI_2),
                shift_efficiency: args.alpha,
                absorption: args.absorption,
                detector_u: detector,
                detector_v: detector,
                ..BiexcitonConfig::from_splittings(args.omega1, args.delta.unwrap_or(8e8), args.xi)
            };
            config.validate().map_err(invalid)?;
            if args.name == ScenarioName::BiexcitonFbs {
                run_biexciton_fbs(&config)
            } else {
                run_biexciton_fbs_prime(&config)
            }
            .map_err(runtime)
        }
    }
}

#[derive(Serialize)]
struct DeviceReport {
    material: String,
    citation: String,
    figure_of_merit: f64,
    interaction_length_m: f64,
    intensity_w_per_m2: f64,
    optical_frequency_hz: f64,
    coupling_eta_per_m: f64,
    theta: f64,
    conversion_efficiency: f64,
    interaction_r_s: f64,
    bandwidth: BTreeMap<&'static str, f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    required_intensity_w_per_m2: Option<f64>,
}

#[allow(clippy::too_many_arguments)]
fn device_report(
    material: &str,
    length: f64,
    intensity: f64,
    target_theta: Option<f64>,
    frequency_hz: f64,
    delta_hz: f64,
    modulation_hz: f64,
) -> Result<DeviceReport, Failure> {
    let table = MaterialTable::builtin();
    let m = table.get(material).map_err(invalid)?;
    let crystal = m.crystal();
    let drive = AcousticDrive {
        intensity,
        modulation_frequency: modulation_hz,
    };
    let geometry = AomGeometry {
        interaction_length: length,
    };
    let omega = 2.0 * PI * frequency_hz;
    let eta = device::coupling_eta(&crystal, &drive, omega).map_err(invalid)?;
    let r = device::interaction_r(&crystal, &drive, &geometry).map_err(invalid)?;
    let delta = 2.0 * PI * delta_hz;
    let ratio = device::bandwidth_ratio(omega, delta, r).map_err(runtime)?;
    let required = match target_theta {
        Some(t) => {
            Some(device::required_intensity(t, &crystal, &geometry, omega).map_err(invalid)?)
        }
        None => None,
    };
    Ok(DeviceReport {
        material: m.name.clone(),
        citation: m.citation.clone(),
        figure_of_merit: m.figure_of_merit(),
        interaction_length_m: length,
        intensity_w_per_m2: intensity,
        optical_frequency_hz: frequency_hz,
        coupling_eta_per_m: eta,
        theta: eta * length,
        conversion_efficiency: device::conversion_efficiency(eta * length),
        interaction_r_s: r,
        bandwidth: BTreeMap::from([
            ("delta_r", delta * r),
            ("exact_ratio", ratio.exact),
            ("first_order_ratio", ratio.first_order),
            ("first_order_error", ratio.error()),
        ]),
        required_intensity_w_per_m2: required,
    })
}

fn execute(cli: &Cli) -> Result<String, Failure> {
    let csv = cli.output == Format::Csv;
    Ok(match &cli.command {
        Command::Run { file } => {
            let doc = load(file)?;
            let result = run_document(&doc).map_err(runtime)?;
            if csv {
                key_value_csv(
                    result
                        .metrics
                        .iter()
                        .map(|(k, v)| (k.clone(), v.to_string())),
                )
            } else {
                result.to_json() + "\n"
            }
        }
        Command::Scenario(args) => {
            let result = scenario(args)?;
            if csv {
                scenario_csv(&result)
            } else {
                to_json(&result)
            }
        }
        Command::Sweep {
            file,
            param,
            from,
            to,
            steps,
            metrics,
        } => {
            let doc = load(file)?;
            let spec = SweepSpec {
                parameter: param.clone(),
                from: *from,
                to: *to,
                steps: *steps,
                metrics: metrics.clone(),
            };
            spec.validate().map_err(invalid)?;
            let table = run_sweep(&doc, &spec).map_err(|e| match e {
                Error::Document { ref path, .. } if path.starts_with("--param") => invalid(e),
                Error::InvalidParameter { .. } => invalid(e),
                e => runtime(e),
            })?;
            if csv {
                table.to_csv()
            } else {
                table.to_json() + "\n"
            }
        }
        Command::Device {
            material,
            length,
            intensity,
            target_theta,
            frequency_hz,
            delta_hz,
            modulation_hz,
        } => {
            let report = device_report(
                material,
                *length,
                *intensity,
                *target_theta,
                *frequency_hz,
                *delta_hz,
                *modulation_hz,
            )?;
            if csv {
                let value = serde_json::to_value(&report).expect("serializes");
                let mut rows = Vec::new();
                flatten("", &value, &mut rows);
                key_value_csv(rows)
            } else {
                to_json(&report)
            }
        }
        Command::Oracle { file, random } => {
            let doc = load(file)?;
            let report = oracle_report(&doc, *random, cli.seed).map_err(|e| match e {
                Error::Document { .. } => invalid(e),
                e => runtime(e),
            })?;
            if csv {
                let mut w = csv::Writer::from_writer(Vec::new());
                w.write_record(["unitary", "inputs", "amplitudes_compared", "max_abs_diff"])
                    .expect("in-memory write");
                for c in &report.checks {
                    w.write_record([
                        c.unitary.clone(),
                        c.inputs.to_string(),
                        c.amplitudes_compared.to_string(),
                        c.max_abs_diff.to_string(),
                    ])
                    .expect("in-memory write");
                }
                String::from_utf8(w.into_inner().expect("in-memory flush")).expect("utf-8")
            } else {
                to_json(&report)
            }
        }
    })
}

fn flatten(prefix: &str, value: &serde_json::Value, rows: &mut Vec<(String, String)>) {
    match value {
        serde_json::Value::Object(map) => {
            for (k, v) in map {
                let key = if prefix.is_empty() {
                    k.clone()
                } else {
                    format!("{prefix}.{k}")
                };
                flatten(&key, v, rows);
            }
        }
        serde_json::Value::String(s) => rows.push((prefix.to_string(), s.clone())),
        other => rows.push((prefix.to_string(), other.to_string())),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let outcome = execute(&cli).and_then(|text| match &cli.out {
        Some(path) => std::fs::write(path, text).map_err(|e| runtime(e.into())),
        None => {
            print!("{text}");
            Ok(())
        }
    });
    match outcome {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("error: {}", f.error);
            let mut source = std::error::Error::source(&f.error);
            while let Some(s) = source {
                eprintln!("  caused by: {s}");
                source = s.source();
            }
            ExitCode::from(f.code)
        }
    }
}
