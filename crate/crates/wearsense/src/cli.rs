//! Command implementations behind the `wearsense` binary.
//!
//! One executable, subcommand per pipeline stage, so each stage is
//! independently invokable: `parse` (capture → sightings), `simulate`
//! (scenario → artifacts on disk), `run-scenario` (simulate and check the
//! classification), `analyze` (sightings → report) and `classify`
//! (scenario spec → canonical label).
//!
//! Exit codes are stable: 0 success, 1 input/parse errors, 2 invalid
//! arguments, 3 expected-vs-actual classification mismatch.
//!
//! Timestamps on the command line are microseconds, matching the files;
//! widths and thresholds (`--bucket`, `--threshold`) are seconds.

use std::collections::BTreeSet;
use std::fmt;
use std::fs;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

use crate::analytics::{
    dwell_stats, flow_matrix, interest_profiles, occupancy, unique_devices,
    DEFAULT_INTEREST_DWELL_MICRO,
};
use crate::codec::parse_pcap;
use crate::engine::EmittedAction;
use crate::files::{load_sensor_map, read_json, read_jsonl, write_json, write_jsonl, FileError};
use crate::sim::{self, ScenarioScript, SimOutput};
use crate::taxonomy::{classify, ScenarioClassification, ScenarioSpec, TaxonomyError};
use crate::tracker::{
    assign_zones, sessionize, DeviceId, PresenceSession, SensorMap, Sighting, Tracker,
    TrackerConfig, ZoneId, DEFAULT_EPOCH_MICRO, DEFAULT_GAP_MICRO,
};

/// Stable process exit codes.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ExitStatus {
    Success,
    /// Input files missing or unparsable.
    InputError,
    /// Invalid arguments or argument combinations.
    UsageError,
    /// `run-scenario` produced a classification other than the expected one.
    Mismatch,
}

impl ExitStatus {
    pub fn code(self) -> i32 {
        match self {
            ExitStatus::Success => 0,
            ExitStatus::InputError => 1,
            ExitStatus::UsageError => 2,
            ExitStatus::Mismatch => 3,
        }
    }
}

/// A command failure with its exit status.
#[derive(Debug)]
pub struct CliError {
    pub status: ExitStatus,
    pub message: String,
}

impl CliError {
    fn input(message: impl Into<String>) -> Self {
        CliError { status: ExitStatus::InputError, message: message.into() }
    }

    fn usage(message: impl Into<String>) -> Self {
        CliError { status: ExitStatus::UsageError, message: message.into() }
    }

    fn mismatch(message: impl Into<String>) -> Self {
        CliError { status: ExitStatus::Mismatch, message: message.into() }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.message)
    }
}

impl std::error::Error for CliError {}

impl From<FileError> for CliError {
    fn from(e: FileError) -> Self {
        CliError::input(e.to_string())
    }
}

#[derive(Debug, Parser)]
#[command(
    name = "wearsense",
    version,
    about = "Passive-presence sensing: parse captures, simulate scenarios, analyze presence, classify scenario specs"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Parse a pcap capture recorded by one sensor into a sightings file.
    Parse(ParseArgs),
    /// Run a built-in scenario and write all its artifacts to a directory.
    Simulate(SimulateArgs),
    /// Run a built-in scenario and check the classification it reproduces.
    RunScenario(RunScenarioArgs),
    /// Compute a report over a sightings file.
    Analyze(AnalyzeArgs),
    /// Validate a scenario spec file and print its canonical label.
    Classify(ClassifyArgs),
}

#[derive(Debug, Args)]
pub struct ParseArgs {
    /// Input pcap capture.
    #[arg(long = "in", value_name = "FILE")]
    pub input: PathBuf,
    /// Sensor map file, one {"sensor_id","zone_id"} JSON object per line.
    #[arg(long, value_name = "FILE")]
    pub sensors: PathBuf,
    /// Sensor that recorded this capture.
    #[arg(long = "sensor-id", value_name = "ID")]
    pub sensor_id: String,
    /// Replace device identities with salted hash tokens (needs --salt).
    #[arg(long = "hash-ids", requires = "salt")]
    pub hash_ids: bool,
    /// Hex-encoded salt for identity hashing.
    #[arg(long, value_name = "HEX")]
    pub salt: Option<String>,
    /// Output sightings file.
    #[arg(long, value_name = "FILE")]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct SimulateArgs {
    /// Built-in scenario name (see `run-scenario --help` for the list).
    #[arg(long, value_name = "NAME")]
    pub scenario: String,
    /// Simulation seed; same seed, same bytes.
    #[arg(long, default_value_t = 1)]
    pub seed: u64,
    /// Output directory.
    #[arg(long, value_name = "DIR")]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct RunScenarioArgs {
    /// One of: my-seat, free-seat, optimized-advertisement, people-flow,
    /// smart-buildings.
    #[arg(long, value_name = "NAME")]
    pub scenario: String,
    /// Simulation seed.
    #[arg(long, default_value_t = 1)]
    pub seed: u64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ReportKind {
    Occupancy,
    Dwell,
    Flow,
    Unique,
    Interest,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum OutputFormat {
    /// Human-readable tables.
    Text,
    /// One JSON record per line.
    Machine,
}

#[derive(Debug, Args)]
pub struct AnalyzeArgs {
    /// Input sightings file.
    #[arg(long = "in", value_name = "FILE")]
    pub input: PathBuf,
    /// Which report to compute.
    #[arg(long, value_enum)]
    pub report: ReportKind,
    /// Zone of interest (occupancy, dwell).
    #[arg(long, value_name = "ZONE")]
    pub zone: Option<String>,
    /// Bucket width in seconds (occupancy; default 60).
    #[arg(long, value_name = "SECONDS")]
    pub bucket: Option<u64>,
    /// Window start in microseconds (required for unique).
    #[arg(long, value_name = "MICROS")]
    pub from: Option<u64>,
    /// Window end in microseconds, exclusive (required for unique).
    #[arg(long, value_name = "MICROS")]
    pub to: Option<u64>,
    /// Output format.
    #[arg(long, value_enum, default_value_t = OutputFormat::Text)]
    pub format: OutputFormat,
    /// Sensor map for zone resolution; without it every sensor id doubles
    /// as its own zone id.
    #[arg(long, value_name = "FILE")]
    pub sensors: Option<PathBuf>,
    /// Comma-separated booth zones (required for interest).
    #[arg(long, value_name = "ZONES")]
    pub booths: Option<String>,
    /// Interest dwell threshold in seconds (default 120).
    #[arg(long, value_name = "SECONDS")]
    pub threshold: Option<u64>,
}

#[derive(Debug, Args)]
pub struct ClassifyArgs {
    /// Scenario spec file (JSON).
    #[arg(long, value_name = "FILE")]
    pub spec: PathBuf,
}

/// Dispatch a parsed command line.
pub fn run(cli: Cli) -> Result<(), CliError> {
    match cli.command {
        Command::Parse(args) => cmd_parse(&args),
        Command::Simulate(args) => cmd_simulate(&args),
        Command::RunScenario(args) => cmd_run_scenario(&args),
        Command::Analyze(args) => cmd_analyze(&args),
        Command::Classify(args) => cmd_classify(&args),
    }
}

fn read_file(path: &Path) -> Result<Vec<u8>, CliError> {
    fs::read(path).map_err(|e| CliError::input(format!("{}: {e}", path.display())))
}

fn cmd_parse(args: &ParseArgs) -> Result<(), CliError> {
    let bytes = read_file(&args.input)?;
    let records = parse_pcap(&bytes).map_err(|e| CliError::input(format!("parse error: {e}")))?;
    let sensors = load_sensor_map(&args.sensors)?;
    if !sensors.contains(&args.sensor_id) {
        return Err(CliError::input(format!(
            "sensor {:?} is not in the sensor map",
            args.sensor_id
        )));
    }
    let hash_salt = match (&args.hash_ids, &args.salt) {
        (true, Some(salt)) => Some(
            hex::decode(salt).map_err(|e| CliError::usage(format!("--salt is not hex: {e}")))?,
        ),
        _ => None,
    };

    let mut tracker =
        Tracker::new(sensors, TrackerConfig { hash_salt, ..TrackerConfig::default() });
    for record in &records {
        tracker
            .ingest(record, &args.sensor_id)
            .map_err(|e| CliError::input(e.to_string()))?;
    }

    if let Err(e) = write_jsonl(&args.out, tracker.sightings()) {
        let _ = fs::remove_file(&args.out);
        return Err(e.into());
    }
    println!("frames read: {}", records.len());
    println!("sightings: {}", tracker.sightings().len());
    println!("dropped: {}", tracker.dropped());
    Ok(())
}

/// One line of the action log file.
#[derive(Serialize)]
struct ActionLogLine<'a> {
    ts_micro: u64,
    kind: &'a crate::engine::ActionKind,
    target: &'a str,
    payload: &'a str,
    rule_id: u64,
}

#[derive(Serialize)]
struct Summary<'a> {
    scenario: &'a str,
    seed: u64,
    classification: Option<String>,
    expected: Option<String>,
    frames: usize,
    sightings: usize,
    sessions: usize,
    devices: usize,
    actions: usize,
}

fn write_outputs(dir: &Path, script: &ScenarioScript, seed: u64, output: &SimOutput) -> Result<(), CliError> {
    fs::create_dir_all(dir).map_err(|e| CliError::input(format!("{}: {e}", dir.display())))?;
    fs::write(dir.join("capture.pcap"), &output.pcap)
        .map_err(|e| CliError::input(e.to_string()))?;
    write_jsonl(&dir.join("sightings.jsonl"), &output.sightings)?;
    write_jsonl(&dir.join("sensors.jsonl"), &script.sensors.entries())?;
    write_json(&dir.join("ground_truth.json"), &output.ground_truth)?;
    write_json(&dir.join("trace.json"), &output.trace)?;
    write_json(&dir.join("rules.json"), &output.rules)?;
    let action_lines: Vec<ActionLogLine> = output
        .actions()
        .iter()
        .map(|a: &EmittedAction| ActionLogLine {
            ts_micro: a.ts_micro,
            kind: &a.kind,
            target: &a.target,
            payload: &a.payload,
            rule_id: a.rule_id,
        })
        .collect();
    write_jsonl(&dir.join("actions.jsonl"), &action_lines)?;

    let devices: BTreeSet<&DeviceId> = output.sessions.iter().map(|s| &s.device_id).collect();
    let summary = Summary {
        scenario: &script.name,
        seed,
        classification: output.classification.as_ref().map(ScenarioClassification::label),
        expected: script.expected.as_ref().map(ScenarioClassification::label),
        frames: output.pcap_record_count,
        sightings: output.sightings.len(),
        sessions: output.sessions.len(),
        devices: devices.len(),
        actions: output.actions().len(),
    };
    write_json(&dir.join("summary.json"), &summary)?;
    if let Some(report) = &output.analytics_report {
        fs::write(dir.join("report.txt"), report).map_err(|e| CliError::input(e.to_string()))?;
    }
    Ok(())
}

fn cmd_simulate(args: &SimulateArgs) -> Result<(), CliError> {
    let script =
        ScenarioScript::builtin(&args.scenario).map_err(|e| CliError::usage(e.to_string()))?;
    let config = script.default_config(args.seed);
    let output = sim::run(&config, &script).map_err(|e| CliError::input(e.to_string()))?;
    write_outputs(&args.out, &script, args.seed, &output)?;
    println!("scenario: {}", script.name);
    println!("seed: {}", args.seed);
    match &output.classification {
        Some(c) => println!("classification: {}", c.label()),
        None => println!("classification: (unclassifiable)"),
    }
    println!("wrote: {}", args.out.display());
    Ok(())
}

/// Simulate `script` and compare the reconstructed classification against
/// the script's expected one. Prints both labels; a difference (or a script
/// without an expectation) is a [`ExitStatus::Mismatch`] error.
pub fn check_scenario(script: &ScenarioScript, seed: u64) -> Result<(), CliError> {
    let config = script.default_config(seed);
    let output = sim::run(&config, script).map_err(|e| CliError::input(e.to_string()))?;
    let expected = script
        .expected
        .as_ref()
        .map_or_else(|| "(none)".to_string(), ScenarioClassification::label);
    let actual = output
        .classification
        .as_ref()
        .map_or_else(|| "(unclassifiable)".to_string(), ScenarioClassification::label);
    println!("expected: {expected}");
    println!("actual:   {actual}");
    if script.expected.is_some() && expected == actual {
        Ok(())
    } else {
        Err(CliError::mismatch("classification does not match the expected label"))
    }
}

fn cmd_run_scenario(args: &RunScenarioArgs) -> Result<(), CliError> {
    let script =
        ScenarioScript::builtin(&args.scenario).map_err(|e| CliError::usage(e.to_string()))?;
    check_scenario(&script, args.seed)
}

/// Resolve sightings to sessions with the default gap and epoch. Without a
/// sensor map every sensor id doubles as its own zone id.
fn sessions_from(
    sightings: &[Sighting],
    sensors: Option<SensorMap>,
) -> Result<Vec<PresenceSession>, CliError> {
    if sightings.is_empty() {
        return Ok(Vec::new());
    }
    let sensors = match sensors {
        Some(map) => map,
        None => SensorMap::new(
            sightings.iter().map(|s| (s.sensor_id.clone(), s.sensor_id.clone())),
        )
        .expect("non-empty sightings yield sensors"),
    };
    for s in sightings {
        if !sensors.contains(&s.sensor_id) {
            return Err(CliError::input(format!(
                "sighting references unknown sensor {:?}",
                s.sensor_id
            )));
        }
    }
    let zoned = assign_zones(sightings, &sensors, DEFAULT_EPOCH_MICRO);
    let mut by_key: std::collections::BTreeMap<(&DeviceId, &ZoneId), Vec<u64>> =
        std::collections::BTreeMap::new();
    for z in &zoned {
        by_key.entry((&z.device_id, &z.zone_id)).or_default().push(z.ts_micro);
    }
    let mut sessions = Vec::new();
    for ((device, zone), timestamps) in by_key {
        sessions.extend(
            sessionize(device, zone, &timestamps, DEFAULT_GAP_MICRO)
                .expect("zoned timestamps are sorted"),
        );
    }
    sessions.sort_by(|a, b| {
        (&a.device_id, a.start_micro, &a.zone_id).cmp(&(&b.device_id, b.start_micro, &b.zone_id))
    });
    Ok(sessions)
}

fn require<T>(value: Option<T>, what: &str, report: &str) -> Result<T, CliError> {
    value.ok_or_else(|| CliError::usage(format!("--{what} is required for --report {report}")))
}

fn cmd_analyze(args: &AnalyzeArgs) -> Result<(), CliError> {
    let sightings: Vec<Sighting> = read_jsonl(&args.input)?;
    let sensors = match &args.sensors {
        Some(path) => Some(load_sensor_map(path)?),
        None => None,
    };
    let machine = args.format == OutputFormat::Machine;

    match args.report {
        ReportKind::Unique => {
            let from = require(args.from, "from", "unique")?;
            let to = require(args.to, "to", "unique")?;
            if from >= to {
                return Err(CliError::usage("--from must be less than --to"));
            }
            let count = unique_devices(&sightings, from, to);
            if machine {
                println!(
                    "{}",
                    serde_json::json!({"from_micro": from, "to_micro": to, "unique_devices": count})
                );
            } else {
                println!("{count}");
            }
        }
        ReportKind::Occupancy => {
            let zone = require(args.zone.as_deref(), "zone", "occupancy")?;
            let bucket_micro = args.bucket.unwrap_or(60) * 1_000_000;
            if bucket_micro == 0 {
                return Err(CliError::usage("--bucket must be positive"));
            }
            let sessions = sessions_from(&sightings, sensors)?;
            let (from, to) = match (args.from, args.to) {
                (Some(f), Some(t)) => (f, t),
                _ => {
                    let f = sessions.iter().map(|s| s.start_micro).min().unwrap_or(0);
                    let t = sessions.iter().map(|s| s.end_micro).max().map_or(0, |t| t + 1);
                    (args.from.unwrap_or(f), args.to.unwrap_or(t))
                }
            };
            let series = occupancy(&sessions, zone, bucket_micro, from, to);
            if machine {
                for (bucket_start, count) in &series.counts {
                    println!(
                        "{}",
                        serde_json::json!({"zone": zone, "bucket_start_micro": bucket_start, "device_count": count})
                    );
                }
            } else {
                println!("occupancy of {zone} ({}s buckets):", bucket_micro / 1_000_000);
                for (bucket_start, count) in &series.counts {
                    println!("  t={:>8}s  {count}", bucket_start / 1_000_000);
                }
            }
        }
        ReportKind::Dwell => {
            let zone = require(args.zone.as_deref(), "zone", "dwell")?;
            let sessions = sessions_from(&sightings, sensors)?;
            let stats = dwell_stats(&sessions, zone);
            if machine {
                println!(
                    "{}",
                    serde_json::json!({
                        "zone": zone,
                        "count": stats.count,
                        "total_micro": stats.total_micro,
                        "mean_micro": stats.mean_micro,
                        "max_micro": stats.max_micro,
                    })
                );
            } else {
                println!("dwell in {zone}: {} session(s)", stats.count);
                println!("  total: {}s", stats.total_micro / 1_000_000);
                match stats.mean_micro {
                    Some(mean) => println!("  mean:  {:.1}s", mean / 1e6),
                    None => println!("  mean:  -"),
                }
                match stats.max_micro {
                    Some(max) => println!("  max:   {}s", max / 1_000_000),
                    None => println!("  max:   -"),
                }
            }
        }
        ReportKind::Flow => {
            let sessions = sessions_from(&sightings, sensors)?;
            let matrix = flow_matrix(&sessions).map_err(|e| CliError::input(e.to_string()))?;
            if machine {
                for (i, from) in matrix.zones.iter().enumerate() {
                    for (j, to) in matrix.zones.iter().enumerate() {
                        if i != j {
                            println!(
                                "{}",
                                serde_json::json!({"from": from, "to": to, "count": matrix.counts[i][j]})
                            );
                        }
                    }
                }
            } else {
                println!("flow matrix ({} zones):", matrix.zones.len());
                for (i, from) in matrix.zones.iter().enumerate() {
                    for (j, to) in matrix.zones.iter().enumerate() {
                        if i != j {
                            println!("  {from} -> {to}: {}", matrix.counts[i][j]);
                        }
                    }
                }
            }
        }
        ReportKind::Interest => {
            let booths_raw = require(args.booths.as_deref(), "booths", "interest")?;
            let booth_zones: BTreeSet<ZoneId> =
                booths_raw.split(',').map(|z| z.trim().to_string()).filter(|z| !z.is_empty()).collect();
            if booth_zones.is_empty() {
                return Err(CliError::usage("--booths must name at least one zone"));
            }
            let threshold_micro = args
                .threshold
                .map(|s| s * 1_000_000)
                .unwrap_or(DEFAULT_INTEREST_DWELL_MICRO);
            if threshold_micro == 0 {
                return Err(CliError::usage("--threshold must be positive"));
            }
            let sessions = sessions_from(&sightings, sensors)?;
            for profile in interest_profiles(&sessions, &booth_zones, threshold_micro) {
                if machine {
                    println!(
                        "{}",
                        serde_json::json!({
                            "device_id": profile.device_id,
                            "interests": profile.interests,
                        })
                    );
                } else {
                    let interests: Vec<&str> =
                        profile.interests.iter().map(String::as_str).collect();
                    println!("{}: {}", profile.device_id, interests.join(", "));
                }
            }
        }
    }
    Ok(())
}

fn cmd_classify(args: &ClassifyArgs) -> Result<(), CliError> {
    let spec: ScenarioSpec = read_json(&args.spec)?;
    match classify(&spec) {
        Ok(classification) => {
            println!("{}", classification.label());
            Ok(())
        }
        Err(TaxonomyError::EmptySpec) => Err(CliError::input("scenario spec has no phases")),
        Err(TaxonomyError::InvalidSpec(violations)) => {
            for violation in &violations {
                println!("{violation}");
            }
            Err(CliError::input(format!(
                "scenario spec breaks {} rule(s)",
                violations.len()
            )))
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exit_codes_are_stable() {
        assert_eq!(ExitStatus::Success.code(), 0);
        assert_eq!(ExitStatus::InputError.code(), 1);
        assert_eq!(ExitStatus::UsageError.code(), 2);
        assert_eq!(ExitStatus::Mismatch.code(), 3);
    }

    #[test]
    fn corrupted_expectation_is_a_mismatch() {
        let mut script = ScenarioScript::builtin("people-flow").unwrap();
        script.expected =
            Some(classify(&crate::taxonomy::scenarios::my_seat()).unwrap());
        let err = check_scenario(&script, 1).unwrap_err();
        assert_eq!(err.status, ExitStatus::Mismatch);
    }

    #[test]
    fn built_in_scenarios_pass_their_check() {
        for name in ScenarioScript::builtin_names() {
            let script = ScenarioScript::builtin(name).unwrap();
            check_scenario(&script, 1).unwrap_or_else(|e| panic!("{name}: {e}"));
        }
    }

    #[test]
    fn sessions_from_uses_identity_zones_without_a_map() {
        let sightings = vec![Sighting {
            device_id: DeviceId::from_raw("x"),
            sensor_id: "s9".into(),
            ts_micro: 0,
            rssi_dbm: None,
            kind: crate::tracker::SightingKind::WifiProbe,
            attrs: None,
        }];
        let sessions = sessions_from(&sightings, None).unwrap();
        assert_eq!(sessions.len(), 1);
        assert_eq!(sessions[0].zone_id, "s9");
    }
}
