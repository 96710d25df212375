//! Deterministic agent simulator.
//!
//! Agents carry wearables that broadcast a probe request on a fixed
//! per-device cadence (15–60 s, drawn from the seed when not declared) while
//! moving through zones on scripted itineraries. The capture contains every
//! emitted probe (minus `drop_rate` losses); sighting attribution then runs
//! the real pipeline — each frame is serialized, parsed back through the
//! codec, ingested by a [`Tracker`], sessionized, and replayed into a
//! [`ScenarioEngine`] — so a run exercises codec, tracker and engine
//! end to end and returns capture bytes, sightings, sessions, ground truth
//! and the engine trace.
//!
//! Sensor attribution: the sensor(s) of the agent's current zone hear a
//! probe at the near signal level, all others at the far level, and far
//! sightings survive only above a capture floor. With the default model the
//! far band sits entirely at or below the floor, so each probe is sighted
//! exactly once and zone assignment is driven by which sensor heard it.
//!
//! Everything is a pure function of (config, script): same seed, same bytes.
//! Independent runs may execute in parallel.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::analytics::{dwell_stats, flow_matrix, interest_profiles, DEFAULT_INTEREST_DWELL_MICRO};
use crate::codec::{
    parse_probe_request, serialize_probe_request, write_pcap, CaptureRecord, LinkType, MacAddress,
    ProbeRequestFrame, Ssid,
};
use crate::engine::{
    classify_trace, ActionKind, ActionSpec, ActionTarget, DeviceFilter, EmittedAction, Event,
    EventKind, LearnerKind, Rule, RuleCondition, RuleOrigin, RunTrace, ScenarioEngine,
    DEFAULT_LEARN_K, DEFAULT_LEARN_WINDOW_MICRO,
};
use crate::taxonomy::{classify, scenarios, ScenarioClassification};
use crate::tracker::{
    DeviceId, PresenceSession, SensorMap, Sighting, SightingKind, Tracker, TrackerConfig, ZoneId,
};

/// Shortest probe cadence a wearable is given.
pub const MIN_PROBE_INTERVAL_MICRO: u64 = 15_000_000;
/// Longest probe cadence a wearable is given.
pub const MAX_PROBE_INTERVAL_MICRO: u64 = 60_000_000;

/// Rates element used in every emitted probe (1, 2, 5.5, 11 Mbps).
pub const DEFAULT_SUPPORTED_RATES: [u8; 4] = [0x02, 0x04, 0x0b, 0x16];

/// Seconds to microseconds, for readable script definitions.
pub const fn secs(n: u64) -> u64 {
    n * 1_000_000
}

/// A simulated human with a wearable.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Agent {
    pub agent_id: String,
    pub mac: MacAddress,
    /// Fixed probe cadence in microseconds, within
    /// [`MIN_PROBE_INTERVAL_MICRO`, `MAX_PROBE_INTERVAL_MICRO`]. Drawn from
    /// the seed at run start when absent.
    pub probe_interval_micro: Option<u64>,
    /// (enter time, zone), strictly increasing. The agent stays in a zone
    /// until the next entry; zones without a sensor model absence.
    pub itinerary: Vec<(u64, ZoneId)>,
    /// Application-level announcements the wearable volunteers.
    pub active_announcements: Vec<(u64, BTreeMap<String, String>)>,
}

impl Agent {
    pub fn new(agent_id: impl Into<String>, mac: MacAddress, itinerary: Vec<(u64, ZoneId)>) -> Self {
        Agent {
            agent_id: agent_id.into(),
            mac,
            probe_interval_micro: None,
            itinerary,
            active_announcements: Vec::new(),
        }
    }

    /// Zone the agent occupies at `ts_micro`; `None` before the first entry.
    pub fn zone_at(&self, ts_micro: u64) -> Option<&ZoneId> {
        self.itinerary
            .iter()
            .take_while(|(enter, _)| *enter <= ts_micro)
            .last()
            .map(|(_, zone)| zone)
    }
}

/// Received-signal model for sighting attribution.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct RssiModel {
    /// Level at the sensor of the agent's current zone.
    pub near_dbm: i8,
    /// Level at every other sensor.
    pub far_dbm: i8,
    /// Uniform jitter applied to both, in ±dB.
    pub jitter_db: i8,
    /// Far sightings below or at this level are not captured.
    pub capture_floor_dbm: i8,
}

impl Default for RssiModel {
    fn default() -> Self {
        RssiModel { near_dbm: -50, far_dbm: -85, jitter_db: 5, capture_floor_dbm: -80 }
    }
}

/// Simulation parameters. The seed fully determines all randomness.
#[derive(Debug, Clone)]
pub struct SimConfig {
    pub sensors: SensorMap,
    pub duration_micro: u64,
    pub seed: u64,
    /// Probability that an emitted probe is not captured at all, in [0, 1).
    pub drop_rate: f64,
    pub rssi: RssiModel,
    pub tracker: TrackerConfig,
}

impl SimConfig {
    pub fn new(sensors: SensorMap, duration_micro: u64, seed: u64) -> Self {
        SimConfig {
            sensors,
            duration_micro,
            seed,
            drop_rate: 0.0,
            rssi: RssiModel::default(),
            tracker: TrackerConfig::default(),
        }
    }
}

/// When and how the trigger learner runs during a scripted scenario.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TriggerLearning {
    /// Simulated time at which the learner replays the log.
    pub at_micro: u64,
    pub k: u64,
    pub window_micro: u64,
}

/// When and how interest profiling runs, and which content rules it feeds.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct InterestLearning {
    /// Simulated time at which profiling replays the completed sessions.
    pub at_micro: u64,
    pub booth_zones: BTreeSet<ZoneId>,
    pub dwell_threshold_micro: u64,
    /// Zones whose arrival, after profiling, shows personalized content and
    /// a booth recommendation on the zone's monitor.
    pub ad_zones: Vec<ZoneId>,
}

/// A scripted world: layout, cast, rules and the classification the run is
/// expected to reproduce.
#[derive(Debug, Clone)]
pub struct ScenarioScript {
    pub name: String,
    pub sensors: SensorMap,
    pub duration_micro: u64,
    pub agents: Vec<Agent>,
    pub rules: Vec<Rule>,
    /// (time, actuator, state) — the humans' side of the story, e.g.
    /// switching a light on manually.
    pub manual_actuations: Vec<(u64, String, String)>,
    pub trigger_learning: Option<TriggerLearning>,
    pub interest_learning: Option<InterestLearning>,
    /// Run observation analytics over the finished log.
    pub run_analytics: bool,
    pub expected: Option<ScenarioClassification>,
}

impl ScenarioScript {
    /// A world with agents only: no rules, no learning, no analytics.
    pub fn bare(
        name: impl Into<String>,
        sensors: SensorMap,
        duration_micro: u64,
        agents: Vec<Agent>,
    ) -> Self {
        ScenarioScript {
            name: name.into(),
            sensors,
            duration_micro,
            agents,
            rules: Vec::new(),
            manual_actuations: Vec::new(),
            trigger_learning: None,
            interest_learning: None,
            run_analytics: false,
            expected: None,
        }
    }

    /// The five built-in scenario names.
    pub fn builtin_names() -> [&'static str; 5] {
        ["my-seat", "free-seat", "optimized-advertisement", "people-flow", "smart-buildings"]
    }

    /// Look up a built-in script by name.
    pub fn builtin(name: &str) -> Result<Self, SimError> {
        match name {
            "my-seat" => Ok(builtin::my_seat()),
            "free-seat" => Ok(builtin::free_seat()),
            "optimized-advertisement" => Ok(builtin::optimized_advertisement()),
            "people-flow" => Ok(builtin::people_flow()),
            "smart-buildings" => Ok(builtin::smart_buildings()),
            other => Err(SimError::UnknownScenario(other.to_string())),
        }
    }

    /// Default run parameters for this script: its own layout and duration,
    /// no drops, default signal model and tracker.
    pub fn default_config(&self, seed: u64) -> SimConfig {
        SimConfig::new(self.sensors.clone(), self.duration_micro, seed)
    }
}

/// A true zone occupancy interval, end-exclusive.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ZoneInterval {
    pub zone_id: ZoneId,
    pub start_micro: u64,
    pub end_micro: u64,
}

/// What actually happened, independent of what the sensors saw.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize, Default)]
pub struct GroundTruth {
    /// Per-agent true zone intervals, in itinerary order (including zones
    /// without sensors).
    pub agent_zones: BTreeMap<String, Vec<ZoneInterval>>,
    /// Canonical MAC text to agent id.
    pub mac_to_agent: BTreeMap<String, String>,
    /// Expected classification label, when the script declares one.
    pub expected_label: Option<String>,
}

impl GroundTruth {
    /// Agents truly inside `zone` at `ts_micro`.
    pub fn occupancy_at(&self, zone: &str, ts_micro: u64) -> usize {
        self.agent_zones
            .values()
            .filter(|intervals| {
                intervals.iter().any(|iv| {
                    iv.zone_id == zone && iv.start_micro <= ts_micro && ts_micro < iv.end_micro
                })
            })
            .count()
    }
}

/// Everything a run produces.
#[derive(Debug, Clone)]
pub struct SimOutput {
    /// Little-endian pcap of every captured probe (link type 105).
    pub pcap: Vec<u8>,
    pub pcap_record_count: usize,
    /// Sightings as the tracker stored them (hashed ids if hashing was on).
    pub sightings: Vec<Sighting>,
    pub sessions: Vec<PresenceSession>,
    pub ground_truth: GroundTruth,
    /// Rules in force at the end of the run, configured and learned.
    pub rules: Vec<Rule>,
    pub trace: RunTrace,
    /// Classification reconstructed from the trace; absent when the run
    /// recorded no log consumption and no actions.
    pub classification: Option<ScenarioClassification>,
    /// Rendered observation report, when the script ran analytics.
    pub analytics_report: Option<String>,
}

impl SimOutput {
    pub fn actions(&self) -> &[EmittedAction] {
        &self.trace.actions
    }
}

/// Errors starting a simulation.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum SimError {
    InvalidConfig(String),
    UnknownScenario(String),
}

impl fmt::Display for SimError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SimError::InvalidConfig(msg) => write!(f, "InvalidConfig: {msg}"),
            SimError::UnknownScenario(name) => write!(f, "UnknownScenario: {name:?}"),
        }
    }
}

impl std::error::Error for SimError {}

fn validate(config: &SimConfig, script: &ScenarioScript) -> Result<(), SimError> {
    let fail = |msg: String| Err(SimError::InvalidConfig(msg));
    if !(0.0..1.0).contains(&config.drop_rate) {
        return fail(format!("drop_rate {} outside [0, 1)", config.drop_rate));
    }
    if config.duration_micro == 0 {
        return fail("duration must be positive".into());
    }
    let mut macs = BTreeSet::new();
    let mut ids = BTreeSet::new();
    for agent in &script.agents {
        if !ids.insert(&agent.agent_id) {
            return fail(format!("duplicate agent id {:?}", agent.agent_id));
        }
        if !macs.insert(agent.mac) {
            return fail(format!("duplicate MAC {}", agent.mac));
        }
        if let Some(interval) = agent.probe_interval_micro {
            if !(MIN_PROBE_INTERVAL_MICRO..=MAX_PROBE_INTERVAL_MICRO).contains(&interval) {
                return fail(format!(
                    "agent {:?} probe interval {interval} outside [{MIN_PROBE_INTERVAL_MICRO}, {MAX_PROBE_INTERVAL_MICRO}]",
                    agent.agent_id
                ));
            }
        }
        if agent.itinerary.is_empty() {
            return fail(format!("agent {:?} has an empty itinerary", agent.agent_id));
        }
        for pair in agent.itinerary.windows(2) {
            if pair[1].0 <= pair[0].0 {
                return fail(format!(
                    "agent {:?} itinerary times must strictly increase",
                    agent.agent_id
                ));
            }
        }
    }
    Ok(())
}

fn ground_truth(config: &SimConfig, script: &ScenarioScript) -> GroundTruth {
    let mut truth = GroundTruth {
        expected_label: script.expected.as_ref().map(ScenarioClassification::label),
        ..GroundTruth::default()
    };
    for agent in &script.agents {
        let mut intervals = Vec::new();
        for (index, (enter, zone)) in agent.itinerary.iter().enumerate() {
            let end = agent
                .itinerary
                .get(index + 1)
                .map_or(config.duration_micro, |(next, _)| *next);
            if *enter >= config.duration_micro {
                break;
            }
            intervals.push(ZoneInterval {
                zone_id: zone.clone(),
                start_micro: *enter,
                end_micro: end.min(config.duration_micro),
            });
        }
        truth.agent_zones.insert(agent.agent_id.clone(), intervals);
        truth.mac_to_agent.insert(agent.mac.to_string(), agent.agent_id.clone());
    }
    truth
}

/// Run a scripted simulation. See the module docs for the emission and
/// attribution model; the pipeline inside is codec → tracker → engine.
pub fn run(config: &SimConfig, script: &ScenarioScript) -> Result<SimOutput, SimError> {
    validate(config, script)?;
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);

    // Cadences first, in declaration order, so later draws cannot shift them.
    let intervals: Vec<u64> = script
        .agents
        .iter()
        .map(|agent| {
            agent.probe_interval_micro.unwrap_or_else(|| {
                rng.gen_range(MIN_PROBE_INTERVAL_MICRO..=MAX_PROBE_INTERVAL_MICRO)
            })
        })
        .collect();

    // Emission schedule: every agent probes at t = 0, I, 2I, ... < duration.
    let mut emissions: Vec<(u64, usize, u16)> = Vec::new();
    for (agent_idx, interval) in intervals.iter().enumerate() {
        let mut ts = 0u64;
        let mut seq = 0u16;
        while ts < config.duration_micro {
            emissions.push((ts, agent_idx, seq));
            seq = (seq + 1) % 4096;
            ts += interval;
        }
    }
    emissions.sort_by_key(|&(ts, agent_idx, _)| (ts, agent_idx));

    let jitter = i16::from(config.rssi.jitter_db).abs();
    let mut records: Vec<CaptureRecord> = Vec::new();
    let mut sightings: Vec<Sighting> = Vec::new();
    for &(ts, agent_idx, seq) in &emissions {
        if config.drop_rate > 0.0 && rng.gen::<f64>() < config.drop_rate {
            continue;
        }
        let agent = &script.agents[agent_idx];
        let frame = ProbeRequestFrame {
            sa: agent.mac,
            da: MacAddress::BROADCAST,
            bssid: MacAddress::BROADCAST,
            seq,
            frag: 0,
            ssid: Ssid::Wildcard,
            supported_rates: DEFAULT_SUPPORTED_RATES.to_vec(),
            rssi_dbm: None,
        };
        let payload = serialize_probe_request(&frame);
        let parsed = parse_probe_request(&payload).expect("emitted frames parse back");
        records.push(CaptureRecord {
            ts_micro: ts,
            link_type: LinkType::Ieee80211Bare,
            payload,
        });

        let zone = agent.zone_at(ts);
        for (sensor_id, sensor_zone) in config.sensors.iter() {
            let near = zone == Some(sensor_zone);
            let base = if near { config.rssi.near_dbm } else { config.rssi.far_dbm };
            let level = i16::from(base) + rng.gen_range(-jitter..=jitter);
            let rssi = level.clamp(i16::from(i8::MIN), i16::from(i8::MAX)) as i8;
            if !near && rssi <= config.rssi.capture_floor_dbm {
                continue;
            }
            sightings.push(Sighting {
                device_id: DeviceId::from_mac(&parsed.sa),
                sensor_id: sensor_id.clone(),
                ts_micro: ts,
                rssi_dbm: Some(rssi),
                kind: SightingKind::WifiProbe,
                attrs: None,
            });
        }
    }

    // Announcements are application-level messages heard in the zone the
    // agent occupies; one not made inside a sensed zone goes unheard.
    for agent in &script.agents {
        for (ts, attrs) in &agent.active_announcements {
            let Some(zone) = agent.zone_at(*ts) else { continue };
            let Some(sensor) = config.sensors.first_sensor_in(zone) else { continue };
            sightings.push(Sighting::active_announce(
                DeviceId::from_mac(&agent.mac),
                sensor.clone(),
                *ts,
                attrs.clone(),
            ));
        }
    }
    sightings.sort_by_key(|s| s.ts_micro);

    let mut tracker = Tracker::new(config.sensors.clone(), config.tracker.clone());
    for sighting in sightings {
        tracker.ingest_sighting(sighting).expect("simulated sightings are valid and ordered");
    }
    let sessions = tracker.sessions();

    // Replay into the engine: session bounds become arrivals/departures,
    // announcements become active-info events, the script supplies the
    // humans' manual actuations.
    let mut events: Vec<Event> = Vec::new();
    for session in &sessions {
        events.push(Event {
            ts_micro: session.start_micro,
            kind: EventKind::Arrival {
                device: session.device_id.clone(),
                zone: session.zone_id.clone(),
            },
        });
        events.push(Event {
            ts_micro: session.end_micro,
            kind: EventKind::Departure {
                device: session.device_id.clone(),
                zone: session.zone_id.clone(),
            },
        });
    }
    for sighting in tracker.sightings() {
        if sighting.kind == SightingKind::ActiveAnnounce {
            events.push(Event {
                ts_micro: sighting.ts_micro,
                kind: EventKind::ActiveInfo {
                    device: sighting.device_id.clone(),
                    attrs: sighting.attrs.clone().unwrap_or_default(),
                },
            });
        }
    }
    for (ts, actuator, state) in &script.manual_actuations {
        events.push(Event {
            ts_micro: *ts,
            kind: EventKind::ManualActuation { actuator: actuator.clone(), state: state.clone() },
        });
    }
    events.sort_by(|a, b| {
        let key = |e: &Event| {
            let (device, zone) = match &e.kind {
                EventKind::Arrival { device, zone } | EventKind::Departure { device, zone } => {
                    (device.to_string(), zone.clone())
                }
                EventKind::ActiveInfo { device, .. } => (device.to_string(), String::new()),
                EventKind::ManualActuation { actuator, state } => (actuator.clone(), state.clone()),
            };
            (e.ts_micro, e.kind.order_rank(), device, zone)
        };
        key(a).cmp(&key(b))
    });

    // Learning checkpoints fire before the first event at or past their time.
    let mut checkpoints: Vec<(u64, LearnerKind)> = Vec::new();
    if let Some(learning) = &script.trigger_learning {
        checkpoints.push((learning.at_micro, LearnerKind::TriggerMining));
    }
    if let Some(learning) = &script.interest_learning {
        checkpoints.push((learning.at_micro, LearnerKind::InterestProfiling));
    }
    checkpoints.sort_by_key(|&(at, _)| at);

    let mut engine = ScenarioEngine::with_rules(script.rules.clone())
        .map_err(|e| SimError::InvalidConfig(e.to_string()))?;
    let mut pending = checkpoints.into_iter().peekable();
    let run_checkpoint = |engine: &mut ScenarioEngine, kind: LearnerKind| match kind {
        LearnerKind::TriggerMining => {
            let learning = script.trigger_learning.as_ref().unwrap();
            engine.learn_and_install_triggers(learning.k, learning.window_micro);
        }
        LearnerKind::InterestProfiling => {
            let learning = script.interest_learning.as_ref().unwrap();
            let completed: Vec<PresenceSession> = sessions
                .iter()
                .filter(|s| s.end_micro <= learning.at_micro)
                .cloned()
                .collect();
            let profiles = interest_profiles(
                &completed,
                &learning.booth_zones,
                learning.dwell_threshold_micro,
            );
            let mut specs = Vec::new();
            for profile in &profiles {
                if profile.interests.is_empty() {
                    continue;
                }
                let topics =
                    profile.interests.iter().cloned().collect::<Vec<_>>().join(", ");
                let recommendation = learning
                    .booth_zones
                    .iter()
                    .find(|zone| !profile.interests.contains(*zone))
                    .cloned();
                for ad_zone in &learning.ad_zones {
                    let monitor = format!("monitor_{ad_zone}");
                    let condition = RuleCondition::OnArrival {
                        zone: ad_zone.clone(),
                        device: DeviceFilter::Device(profile.device_id.clone()),
                    };
                    specs.push((
                        condition.clone(),
                        ActionSpec {
                            kind: ActionKind::Content,
                            target: ActionTarget::Fixed { id: monitor.clone() },
                            payload: format!("ads: {topics}"),
                        },
                        profile.interests.len() as u64,
                    ));
                    if let Some(next_booth) = &recommendation {
                        specs.push((
                            condition,
                            ActionSpec {
                                kind: ActionKind::Navigation,
                                target: ActionTarget::Fixed { id: monitor },
                                payload: format!("recommended next: {next_booth}"),
                            },
                            profile.interests.len() as u64,
                        ));
                    }
                }
            }
            engine.install_synthesized_rules(specs, LearnerKind::InterestProfiling);
        }
    };

    for event in events {
        while pending.peek().is_some_and(|&(at, _)| at <= event.ts_micro) {
            let (_, kind) = pending.next().unwrap();
            run_checkpoint(&mut engine, kind);
        }
        engine.step(event).expect("events are fed in timestamp order");
    }
    for (_, kind) in pending {
        run_checkpoint(&mut engine, kind);
    }

    let analytics_report = if script.run_analytics {
        engine.mark_analytics_consumed();
        Some(render_report(&sessions, &config.sensors))
    } else {
        None
    };

    let trace = engine.trace();
    let classification = classify_trace(&trace).ok();
    Ok(SimOutput {
        pcap: write_pcap(LinkType::Ieee80211Bare, &records),
        pcap_record_count: records.len(),
        sightings: tracker.sightings().to_vec(),
        sessions,
        ground_truth: ground_truth(config, script),
        rules: engine.rules().to_vec(),
        trace,
        classification,
        analytics_report,
    })
}

fn render_report(sessions: &[PresenceSession], sensors: &SensorMap) -> String {
    let mut out = String::new();
    out.push_str("dwell per zone (count/total/max seconds):\n");
    for zone in sensors.zones() {
        let stats = dwell_stats(sessions, zone);
        out.push_str(&format!(
            "  {zone}: {} sessions, total {}, max {}\n",
            stats.count,
            stats.total_micro / 1_000_000,
            stats.max_micro.unwrap_or(0) / 1_000_000,
        ));
    }
    match flow_matrix(sessions) {
        Ok(matrix) => {
            out.push_str("transitions:\n");
            for (i, from) in matrix.zones.iter().enumerate() {
                for (j, to) in matrix.zones.iter().enumerate() {
                    if matrix.counts[i][j] > 0 {
                        out.push_str(&format!("  {from} -> {to}: {}\n", matrix.counts[i][j]));
                    }
                }
            }
        }
        Err(e) => out.push_str(&format!("transitions unavailable: {e}\n")),
    }
    out
}

/// The five built-in scenario scripts.
pub mod builtin {
    use super::*;

    fn mac(tail: [u8; 2]) -> MacAddress {
        // Locally administered range, so scripts never collide with real vendors.
        MacAddress([0x02, 0x00, 0x00, 0x00, tail[0], tail[1]])
    }

    fn sensor_map(zones: &[&str]) -> SensorMap {
        SensorMap::new(zones.iter().map(|z| (format!("sensor_{z}"), z.to_string())))
            .expect("built-in layouts are non-empty")
    }

    /// A traveller shares an electronic ticket; the environment navigates
    /// him to his reserved seat.
    pub fn my_seat() -> ScenarioScript {
        let sebastian = Agent {
            probe_interval_micro: None,
            active_announcements: vec![(
                secs(320),
                [("ticket_seat".to_string(), "32F".to_string())].into(),
            )],
            ..Agent::new(
                "sebastian",
                mac([0x0a, 0x01]),
                vec![(0, "platform_e".into()), (secs(300), "train_car".into())],
            )
        };
        ScenarioScript {
            name: "my-seat".into(),
            sensors: sensor_map(&["platform_e", "train_car"]),
            duration_micro: secs(600),
            agents: vec![sebastian],
            rules: vec![Rule {
                rule_id: 1,
                condition: RuleCondition::OnActiveInfo { key: "ticket_seat".into() },
                action: ActionSpec {
                    kind: ActionKind::Navigation,
                    target: ActionTarget::EventDevice,
                    payload: "seat {attr:ticket_seat} is on the left side".into(),
                },
                origin: RuleOrigin::Configured,
            }],
            manual_actuations: Vec::new(),
            trigger_learning: None,
            interest_learning: None,
            run_analytics: false,
            expected: Some(classify(&scenarios::my_seat()).unwrap()),
        }
    }

    /// A passenger is only sensed passively; entrance monitors steer him
    /// toward the emptier wagon.
    pub fn free_seat() -> ScenarioScript {
        let lucas = Agent::new(
            "lucas",
            mac([0x0b, 0x01]),
            vec![
                (0, "platform_b".into()),
                (secs(240), "entrance".into()),
                (secs(300), "wagon_21".into()),
            ],
        );
        let seated = (1..=3u8).map(|n| {
            Agent::new(
                format!("passenger_{n}"),
                mac([0x0b, 0x10 + n]),
                vec![(0, "wagon_21".into())],
            )
        });
        ScenarioScript {
            name: "free-seat".into(),
            sensors: sensor_map(&["platform_b", "entrance", "wagon_21"]),
            duration_micro: secs(600),
            agents: std::iter::once(lucas).chain(seated).collect(),
            rules: vec![Rule {
                rule_id: 1,
                condition: RuleCondition::OnArrival {
                    zone: "entrance".into(),
                    device: DeviceFilter::Any,
                },
                action: ActionSpec {
                    kind: ActionKind::Navigation,
                    target: ActionTarget::Fixed { id: "monitor_entrance".into() },
                    payload: "wagon 21: {occupancy:wagon_21} aboard, free seats to the right".into(),
                },
                origin: RuleOrigin::Configured,
            }],
            manual_actuations: Vec::new(),
            trigger_learning: None,
            interest_learning: None,
            run_analytics: false,
            expected: Some(classify(&scenarios::free_seat()).unwrap()),
        }
    }

    /// A fair visitor's booth dwell is profiled into interests; hall
    /// monitors then show personalized ads and recommend the next stand.
    /// Sharing interests directly jump-starts the content.
    pub fn optimized_advertisement() -> ScenarioScript {
        let maria = Agent {
            active_announcements: vec![(
                secs(1200),
                [("interests".to_string(), "service robots".to_string())].into(),
            )],
            ..Agent::new(
                "maria",
                mac([0x0c, 0x01]),
                vec![
                    (0, "booth_robotics".into()),
                    (secs(600), "booth_cloud".into()),
                    (secs(690), "corridor".into()),
                    (secs(1000), "expo_hall".into()),
                ],
            )
        };
        let visitor = Agent::new("visitor", mac([0x0c, 0x02]), vec![(0, "booth_security".into())]);
        ScenarioScript {
            name: "optimized-advertisement".into(),
            sensors: sensor_map(&[
                "booth_robotics",
                "booth_cloud",
                "booth_security",
                "corridor",
                "expo_hall",
            ]),
            duration_micro: secs(1600),
            agents: vec![maria, visitor],
            rules: vec![Rule {
                rule_id: 1,
                condition: RuleCondition::OnActiveInfo { key: "interests".into() },
                action: ActionSpec {
                    kind: ActionKind::Content,
                    target: ActionTarget::EventDevice,
                    payload: "ads: {attr:interests}".into(),
                },
                origin: RuleOrigin::Configured,
            }],
            manual_actuations: Vec::new(),
            trigger_learning: None,
            interest_learning: Some(InterestLearning {
                at_micro: secs(950),
                booth_zones: ["booth_robotics", "booth_cloud", "booth_security"]
                    .into_iter()
                    .map(String::from)
                    .collect(),
                dwell_threshold_micro: DEFAULT_INTEREST_DWELL_MICRO,
                ad_zones: vec!["expo_hall".into()],
            }),
            run_analytics: false,
            expected: Some(classify(&scenarios::optimized_advertisement()).unwrap()),
        }
    }

    /// Passenger flows through a shopping centre are measured; nothing is
    /// returned to the visitors.
    pub fn people_flow() -> ScenarioScript {
        let zones = ["mall_north", "mall_south", "food_court", "atrium"];
        let agents = (0..10usize)
            .map(|i| {
                let mut itinerary = Vec::new();
                let mut enter = 0u64;
                for visit in 0..4usize {
                    itinerary.push((enter, zones[(i + visit) % zones.len()].to_string()));
                    enter += secs(500 + ((i as u64 * 91 + visit as u64 * 53) % 400));
                }
                Agent::new(format!("shopper_{i:02}"), mac([0x0d, i as u8]), itinerary)
            })
            .collect();
        ScenarioScript {
            name: "people-flow".into(),
            sensors: sensor_map(&zones),
            duration_micro: secs(3600),
            agents,
            rules: Vec::new(),
            manual_actuations: Vec::new(),
            trigger_learning: None,
            interest_learning: None,
            run_analytics: true,
            expected: Some(classify(&scenarios::people_flow()).unwrap()),
        }
    }

    /// Five mornings of switching the entrance light on by hand; the
    /// environment learns the habit and the sixth morning the light turns
    /// on by itself.
    pub fn smart_buildings() -> ScenarioScript {
        const DAY: u64 = secs(7200);
        let morning = |day: u64| day * DAY + secs(600);
        let mut itinerary = vec![(0, "outside".to_string())];
        for day in 0..6u64 {
            let at = morning(day);
            itinerary.push((at, "entrance".into()));
            itinerary.push((at + secs(180), "corridor".into()));
            itinerary.push((at + secs(360), "office".into()));
            itinerary.push((at + secs(900), "outside".into()));
        }
        let katrin = Agent::new("katrin", mac([0x0e, 0x01]), itinerary);
        let manual_actuations = (0..5u64)
            .map(|day| (morning(day) + secs(90), "light_entrance".to_string(), "on".to_string()))
            .collect();
        ScenarioScript {
            name: "smart-buildings".into(),
            sensors: sensor_map(&["entrance", "corridor", "office"]),
            duration_micro: 6 * DAY,
            agents: vec![katrin],
            rules: Vec::new(),
            manual_actuations,
            trigger_learning: Some(TriggerLearning {
                at_micro: 5 * DAY,
                k: DEFAULT_LEARN_K,
                window_micro: DEFAULT_LEARN_WINDOW_MICRO,
            }),
            interest_learning: None,
            run_analytics: false,
            expected: Some(classify(&scenarios::smart_buildings()).unwrap()),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn one_agent_world(interval_s: u64, duration_s: u64) -> (SimConfig, ScenarioScript) {
        let sensors = SensorMap::new([("s_room", "room")]).unwrap();
        let agent = Agent {
            probe_interval_micro: Some(secs(interval_s)),
            ..Agent::new("solo", MacAddress([2, 0, 0, 0, 0, 1]), vec![(0, "room".into())])
        };
        let script = ScenarioScript::bare("solo", sensors.clone(), secs(duration_s), vec![agent]);
        (SimConfig::new(sensors, secs(duration_s), 7), script)
    }

    #[test]
    fn emission_count_matches_interval_arithmetic() {
        let (config, script) = one_agent_world(30, 120);
        let output = run(&config, &script).unwrap();
        // Emissions at 0, 30, 60, 90 s; 120 s is past the end.
        assert_eq!(output.pcap_record_count, 4);
        let records = crate::codec::parse_pcap(&output.pcap).unwrap();
        let times: Vec<u64> = records.iter().map(|r| r.ts_micro).collect();
        assert_eq!(times, vec![0, secs(30), secs(60), secs(90)]);
        assert_eq!(output.sightings.len(), 4);
    }

    #[test]
    fn same_seed_same_bytes() {
        let script = ScenarioScript::builtin("people-flow").unwrap();
        let a = run(&script.default_config(42), &script).unwrap();
        let b = run(&script.default_config(42), &script).unwrap();
        assert_eq!(a.pcap, b.pcap);
        assert_eq!(a.sightings, b.sightings);
        assert_eq!(a.trace, b.trace);

        let c = run(&script.default_config(43), &script).unwrap();
        assert_ne!(a.pcap, c.pcap);
    }

    #[test]
    fn full_drop_rate_is_rejected() {
        let (mut config, script) = one_agent_world(30, 120);
        config.drop_rate = 1.0;
        assert!(matches!(run(&config, &script), Err(SimError::InvalidConfig(_))));
    }

    #[test]
    fn unknown_scenario_name_is_rejected() {
        assert!(matches!(
            ScenarioScript::builtin("warehouse"),
            Err(SimError::UnknownScenario(name)) if name == "warehouse"
        ));
    }

    #[test]
    fn people_flow_emits_no_actions() {
        let script = ScenarioScript::builtin("people-flow").unwrap();
        let output = run(&script.default_config(1), &script).unwrap();
        assert!(output.actions().is_empty());
        assert!(output.analytics_report.is_some());
        assert_eq!(
            output.classification.unwrap().label(),
            "tag:passive; interaction:none; feedback:observation"
        );
    }

    #[test]
    fn my_seat_emits_exactly_one_navigation_to_the_announcer() {
        let script = ScenarioScript::builtin("my-seat").unwrap();
        let output = run(&script.default_config(1), &script).unwrap();
        assert_eq!(output.actions().len(), 1);
        let action = &output.actions()[0];
        assert_eq!(action.kind, ActionKind::Navigation);
        assert_eq!(action.target, "02:00:00:00:0a:01");
        assert_eq!(action.payload, "seat 32F is on the left side");
    }

    #[test]
    fn smart_buildings_sixth_morning_triggers_without_manual_actuation() {
        let script = ScenarioScript::builtin("smart-buildings").unwrap();
        let output = run(&script.default_config(1), &script).unwrap();
        let learned: Vec<&Rule> = output
            .rules
            .iter()
            .filter(|r| matches!(r.origin, RuleOrigin::Learned { .. }))
            .collect();
        assert_eq!(learned.len(), 1);

        let sixth_morning_start = 5 * secs(7200);
        let morning_six: Vec<&EmittedAction> = output
            .actions()
            .iter()
            .filter(|a| a.ts_micro >= sixth_morning_start)
            .collect();
        assert_eq!(morning_six.len(), 1);
        assert_eq!(morning_six[0].kind, ActionKind::Trigger);
        assert_eq!(morning_six[0].target, "light_entrance");
        assert!(output
            .trace
            .events
            .iter()
            .filter(|e| e.ts_micro >= sixth_morning_start)
            .all(|e| !matches!(e.kind, EventKind::ManualActuation { .. })));
    }

    #[test]
    fn lossless_runs_reproduce_ground_truth_exactly() {
        // Three agents dwelling longer than the session gap in each zone:
        // tracker sessions must mirror the itineraries, with boundaries
        // inside one probe interval.
        let zones = ["za", "zb", "zc"];
        let sensors =
            SensorMap::new(zones.iter().map(|z| (format!("s_{z}"), z.to_string()))).unwrap();
        let agents: Vec<Agent> = (0..3u8)
            .map(|i| {
                let itinerary = (0..3u64)
                    .map(|v| (secs(v * 600), zones[((i as u64 + v) % 3) as usize].to_string()))
                    .collect();
                Agent {
                    probe_interval_micro: Some(secs(20 + u64::from(i))),
                    ..Agent::new(format!("a{i}"), MacAddress([2, 0, 0, 0, 3, i]), itinerary)
                }
            })
            .collect();
        let script = ScenarioScript::bare("fidelity", sensors.clone(), secs(1800), agents.clone());
        let output = run(&SimConfig::new(sensors, secs(1800), 5), &script).unwrap();

        for agent in &agents {
            let device = DeviceId::from_mac(&agent.mac);
            let interval = agent.probe_interval_micro.unwrap();
            let sessions: Vec<&PresenceSession> =
                output.sessions.iter().filter(|s| s.device_id == device).collect();
            let truth = &output.ground_truth.agent_zones[&agent.agent_id];
            assert_eq!(sessions.len(), truth.len(), "{}", agent.agent_id);
            for (session, interval_truth) in sessions.iter().zip(truth) {
                assert_eq!(session.zone_id, interval_truth.zone_id);
                assert!(session.start_micro - interval_truth.start_micro <= interval);
                assert!(interval_truth.end_micro - session.end_micro <= interval);
            }
        }
    }

    #[test]
    fn ground_truth_tracks_itineraries() {
        let (config, script) = one_agent_world(30, 120);
        let output = run(&config, &script).unwrap();
        let truth = &output.ground_truth;
        assert_eq!(truth.mac_to_agent["02:00:00:00:00:01"], "solo");
        assert_eq!(truth.agent_zones["solo"].len(), 1);
        assert_eq!(truth.occupancy_at("room", secs(60)), 1);
        assert_eq!(truth.occupancy_at("room", secs(120)), 0);
    }
}
