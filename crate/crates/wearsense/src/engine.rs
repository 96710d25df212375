//! The environment's decision loop, event-sourced.
//!
//! [`ScenarioEngine::step`] consumes presence events in timestamp order,
//! appends every event to an observation log, and fires matching rules in
//! ascending rule-id order. Rules are either configured up front or learned:
//! [`learn_trigger_rules`] mines the log for arrivals that are habitually
//! followed by the same manual actuation and turns the habit into a trigger
//! rule — the transition from indirect to direct interaction. The engine also
//! records which consumers read the log (trigger mining, interest profiling,
//! plain analytics), and [`classify_trace`] reconstructs a scenario
//! classification from an executed run.
//!
//! Rule payloads are templates: `{attr:KEY}` resolves to the triggering
//! announcement's attribute and `{occupancy:ZONE}` to the zone's occupancy
//! at fire time.
//!
//! The event loop is single-threaded by contract: one consumer steps events
//! in timestamp order; the learner and the classifier run on immutable
//! [`RunTrace`] snapshots and may execute concurrently with later ingestion.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use serde::de::Error as _;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::taxonomy::{
    classify, FeedbackKind, InteractionMode, ScenarioClassification, ScenarioPhase, ScenarioSpec,
};
use crate::tracker::{DeviceId, ZoneId};

/// Default observation count before a habit becomes a rule: enough
/// repetitions to separate habit from coincidence.
pub const DEFAULT_LEARN_K: u64 = 5;
/// Default arrival-to-actuation window: covers walking from an entrance to
/// a room.
pub const DEFAULT_LEARN_WINDOW_MICRO: u64 = 120_000_000;

/// Something that happened in the environment.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Event {
    pub ts_micro: u64,
    #[serde(flatten)]
    pub kind: EventKind,
}

/// Event payloads. Arrivals and departures alternate per device and zone.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum EventKind {
    Arrival { device: DeviceId, zone: ZoneId },
    Departure { device: DeviceId, zone: ZoneId },
    ActiveInfo { device: DeviceId, attrs: BTreeMap<String, String> },
    ManualActuation { actuator: String, state: String },
}

impl EventKind {
    fn device(&self) -> Option<&DeviceId> {
        match self {
            EventKind::Arrival { device, .. }
            | EventKind::Departure { device, .. }
            | EventKind::ActiveInfo { device, .. } => Some(device),
            EventKind::ManualActuation { .. } => None,
        }
    }

    /// Rank used to order simultaneous events deterministically.
    pub fn order_rank(&self) -> u8 {
        match self {
            EventKind::Arrival { .. } => 0,
            EventKind::ActiveInfo { .. } => 1,
            EventKind::ManualActuation { .. } => 2,
            EventKind::Departure { .. } => 3,
        }
    }
}

/// Which devices an arrival condition applies to.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum DeviceFilter {
    Any,
    Device(DeviceId),
}

impl DeviceFilter {
    fn matches(&self, device: &DeviceId) -> bool {
        match self {
            DeviceFilter::Any => true,
            DeviceFilter::Device(d) => d == device,
        }
    }
}

// Serialized as the string "any" or a device id. "any" is never a valid
// device id (ids are MAC text, beacon triples or hex tokens).
impl Serialize for DeviceFilter {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        match self {
            DeviceFilter::Any => serializer.serialize_str("any"),
            DeviceFilter::Device(d) => serializer.serialize_str(d.as_str()),
        }
    }
}

impl<'de> Deserialize<'de> for DeviceFilter {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let text = String::deserialize(deserializer)?;
        if text.is_empty() {
            return Err(D::Error::custom("device filter must not be empty"));
        }
        Ok(if text == "any" {
            DeviceFilter::Any
        } else {
            DeviceFilter::Device(DeviceId::from_raw(text))
        })
    }
}

/// When a rule fires.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum RuleCondition {
    OnArrival { zone: ZoneId, device: DeviceFilter },
    OnActiveInfo { key: String },
}

/// Feedback a rule can produce. Observation is not an action — it is the
/// absence of one — so it has no variant here.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ActionKind {
    Navigation,
    Content,
    Trigger,
}

impl From<ActionKind> for FeedbackKind {
    fn from(kind: ActionKind) -> Self {
        match kind {
            ActionKind::Navigation => FeedbackKind::Navigation,
            ActionKind::Content => FeedbackKind::Content,
            ActionKind::Trigger => FeedbackKind::Trigger,
        }
    }
}

/// Where an action goes: a fixed device/actuator id, or whichever device
/// triggered the rule.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum ActionTarget {
    EventDevice,
    Fixed { id: String },
}

/// Action template attached to a rule; target and payload placeholders are
/// resolved when the rule fires.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ActionSpec {
    pub kind: ActionKind,
    pub target: ActionTarget,
    pub payload: String,
}

/// A concrete feedback action emitted by the engine.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FeedbackAction {
    pub kind: ActionKind,
    pub target: String,
    pub payload: String,
}

/// Where a rule came from.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RuleOrigin {
    Configured,
    /// Learned from the log, with the supporting observation count.
    Learned { observations: u64 },
}

/// A decision rule. Rules fire in ascending `rule_id` order.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Rule {
    pub rule_id: u64,
    pub condition: RuleCondition,
    pub action: ActionSpec,
    pub origin: RuleOrigin,
}

/// What triggered an emitted action.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TriggerSource {
    /// Fired by an application-level announcement (active tag).
    ActiveInfo,
    /// Fired by passively sensed presence.
    Presence,
}

/// One fired action, as recorded in the run trace.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct EmittedAction {
    pub ts_micro: u64,
    pub rule_id: u64,
    pub kind: ActionKind,
    pub target: String,
    pub payload: String,
    pub via: TriggerSource,
}

/// A mined habit: arrivals of `device` in `zone` were followed, at least
/// `observations` times, by the same manual actuation within the window.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LearnedTrigger {
    pub device: DeviceId,
    pub zone: ZoneId,
    pub actuator: String,
    pub state: String,
    pub observations: u64,
}

/// Log consumers whose runs matter for trace classification.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LearnerKind {
    /// Mining arrival-then-actuation habits into trigger rules. Counts as
    /// observation feedback: the log itself is the product being studied.
    TriggerMining,
    /// Profiling dwell into interests that parameterize content rules. The
    /// learning feeds later decisions without being feedback of its own.
    InterestProfiling,
}

/// One learner pass over the log.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct LearnerRun {
    pub kind: LearnerKind,
    /// Whether the pass produced or refreshed any rules.
    pub produced_rules: bool,
}

/// Immutable snapshot of an executed run: the observation log, every fired
/// action, learner passes, and whether analytics consumed the log.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize, Default)]
pub struct RunTrace {
    pub events: Vec<Event>,
    pub actions: Vec<EmittedAction>,
    pub learner_runs: Vec<LearnerRun>,
    pub analytics_consumed: bool,
}

/// Errors from the decision loop.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum EngineError {
    /// An event arrived with a timestamp before the last processed one.
    TimeRegression { event_ts_micro: u64, last_ts_micro: u64 },
    /// Two rules share an id.
    DuplicateRuleId(u64),
    /// The trace has no events.
    EmptyTrace,
    /// The trace has events but records no consumption and no actions, so
    /// no interaction phase can be reconstructed.
    UnclassifiableTrace,
}

impl fmt::Display for EngineError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            EngineError::TimeRegression { event_ts_micro, last_ts_micro } => write!(
                f,
                "TimeRegression: event at {event_ts_micro} after processing {last_ts_micro}"
            ),
            EngineError::DuplicateRuleId(id) => write!(f, "duplicate rule id {id}"),
            EngineError::EmptyTrace => write!(f, "EmptyTrace: nothing to classify"),
            EngineError::UnclassifiableTrace => {
                write!(f, "trace records no log consumption and no actions")
            }
        }
    }
}

impl std::error::Error for EngineError {}

/// Mine the log for trigger habits: for each (device, zone, actuator, state)
/// where at least `k` distinct arrivals are each followed within
/// `window_micro` by a manual actuation of that actuator to that state,
/// emit one [`LearnedTrigger`]. An actuation at the arrival timestamp or up
/// to the window bound (inclusive) qualifies. Output is ordered by (zone,
/// device, actuator, state).
pub fn learn_trigger_rules(log: &[Event], k: u64, window_micro: u64) -> Vec<LearnedTrigger> {
    assert!(k >= 1, "k must be at least 1");
    assert!(window_micro > 0, "window must be positive");

    let arrivals: Vec<(u64, &DeviceId, &ZoneId)> = log
        .iter()
        .filter_map(|e| match &e.kind {
            EventKind::Arrival { device, zone } => Some((e.ts_micro, device, zone)),
            _ => None,
        })
        .collect();
    let actuations: Vec<(u64, &String, &String)> = log
        .iter()
        .filter_map(|e| match &e.kind {
            EventKind::ManualActuation { actuator, state } => Some((e.ts_micro, actuator, state)),
            _ => None,
        })
        .collect();

    let mut counts: BTreeMap<(&ZoneId, &DeviceId, &String, &String), u64> = BTreeMap::new();
    for &(arrival_ts, device, zone) in &arrivals {
        let mut followed: BTreeSet<(&String, &String)> = BTreeSet::new();
        for &(actuation_ts, actuator, state) in &actuations {
            if actuation_ts >= arrival_ts && actuation_ts - arrival_ts <= window_micro {
                followed.insert((actuator, state));
            }
        }
        for (actuator, state) in followed {
            *counts.entry((zone, device, actuator, state)).or_default() += 1;
        }
    }

    counts
        .into_iter()
        .filter(|(_, observations)| *observations >= k)
        .map(|((zone, device, actuator, state), observations)| LearnedTrigger {
            device: device.clone(),
            zone: zone.clone(),
            actuator: actuator.clone(),
            state: state.clone(),
            observations,
        })
        .collect()
}

/// Resolve `{attr:KEY}` and `{occupancy:ZONE}` placeholders in a payload
/// template. Unknown placeholders are left untouched.
fn resolve_payload(
    template: &str,
    attrs: Option<&BTreeMap<String, String>>,
    occupancy: &BTreeMap<ZoneId, BTreeSet<DeviceId>>,
) -> String {
    let mut out = String::with_capacity(template.len());
    let mut rest = template;
    while let Some(open) = rest.find('{') {
        out.push_str(&rest[..open]);
        let after = &rest[open..];
        match after.find('}') {
            Some(close) => {
                let token = &after[1..close];
                let replaced = if let Some(key) = token.strip_prefix("attr:") {
                    attrs.and_then(|a| a.get(key)).cloned()
                } else {
                    token
                        .strip_prefix("occupancy:")
                        .map(|zone| occupancy.get(zone).map_or(0, BTreeSet::len).to_string())
                };
                match replaced {
                    Some(value) => out.push_str(&value),
                    None => out.push_str(&after[..=close]),
                }
                rest = &after[close + 1..];
            }
            None => {
                out.push_str(after);
                rest = "";
            }
        }
    }
    out.push_str(rest);
    out
}

/// Event-sourced engine state: rules, the append-only observation log,
/// per-zone occupancy, and the run records feeding [`classify_trace`].
#[derive(Debug, Clone, Default)]
pub struct ScenarioEngine {
    rules: Vec<Rule>,
    next_rule_id: u64,
    log: Vec<Event>,
    occupancy: BTreeMap<ZoneId, BTreeSet<DeviceId>>,
    last_ts_micro: Option<u64>,
    actions: Vec<EmittedAction>,
    learner_runs: Vec<LearnerRun>,
    analytics_consumed: bool,
}

impl ScenarioEngine {
    pub fn new() -> Self {
        Self::default()
    }

    /// Start from configured rules. Ids must be unique; rules are kept in
    /// ascending id order.
    pub fn with_rules(mut rules: Vec<Rule>) -> Result<Self, EngineError> {
        rules.sort_by_key(|r| r.rule_id);
        for pair in rules.windows(2) {
            if pair[0].rule_id == pair[1].rule_id {
                return Err(EngineError::DuplicateRuleId(pair[0].rule_id));
            }
        }
        let next_rule_id = rules.last().map_or(0, |r| r.rule_id + 1);
        Ok(ScenarioEngine { rules, next_rule_id, ..Self::default() })
    }

    pub fn rules(&self) -> &[Rule] {
        &self.rules
    }

    pub fn log(&self) -> &[Event] {
        &self.log
    }

    pub fn actions(&self) -> &[EmittedAction] {
        &self.actions
    }

    /// Devices currently present in `zone`.
    pub fn occupancy(&self, zone: &str) -> usize {
        self.occupancy.get(zone).map_or(0, BTreeSet::len)
    }

    /// Add a rule with the next free id.
    pub fn add_rule(&mut self, condition: RuleCondition, action: ActionSpec, origin: RuleOrigin) -> u64 {
        let rule_id = self.next_rule_id;
        self.next_rule_id += 1;
        self.rules.push(Rule { rule_id, condition, action, origin });
        rule_id
    }

    /// Process one event: update occupancy, fire matching rules in ascending
    /// rule-id order, and append the event to the log regardless of matches.
    pub fn step(&mut self, event: Event) -> Result<Vec<FeedbackAction>, EngineError> {
        if let Some(last) = self.last_ts_micro {
            if event.ts_micro < last {
                return Err(EngineError::TimeRegression {
                    event_ts_micro: event.ts_micro,
                    last_ts_micro: last,
                });
            }
        }
        match &event.kind {
            EventKind::Arrival { device, zone } => {
                self.occupancy.entry(zone.clone()).or_default().insert(device.clone());
            }
            EventKind::Departure { device, zone } => {
                if let Some(present) = self.occupancy.get_mut(zone) {
                    present.remove(device);
                }
            }
            _ => {}
        }

        let mut fired = Vec::new();
        for rule in &self.rules {
            let (matched, attrs, via) = match (&rule.condition, &event.kind) {
                (RuleCondition::OnArrival { zone, device }, EventKind::Arrival { device: d, zone: z }) => {
                    (zone == z && device.matches(d), None, TriggerSource::Presence)
                }
                (RuleCondition::OnActiveInfo { key }, EventKind::ActiveInfo { attrs, .. }) => {
                    (attrs.contains_key(key), Some(attrs), TriggerSource::ActiveInfo)
                }
                _ => (false, None, TriggerSource::Presence),
            };
            if !matched {
                continue;
            }
            let target = match &rule.action.target {
                ActionTarget::Fixed { id } => id.clone(),
                ActionTarget::EventDevice => event
                    .kind
                    .device()
                    .expect("matching conditions carry a device")
                    .to_string(),
            };
            let payload = resolve_payload(&rule.action.payload, attrs, &self.occupancy);
            let action = FeedbackAction { kind: rule.action.kind, target, payload };
            self.actions.push(EmittedAction {
                ts_micro: event.ts_micro,
                rule_id: rule.rule_id,
                kind: action.kind,
                target: action.target.clone(),
                payload: action.payload.clone(),
                via,
            });
            fired.push(action);
        }

        self.last_ts_micro = Some(event.ts_micro);
        self.log.push(event);
        Ok(fired)
    }

    /// Run trigger mining over the log and install what it finds as learned
    /// rules, binding each to its specific device. Rules whose condition and
    /// action are already installed are suppressed. Returns the new rules.
    pub fn learn_and_install_triggers(&mut self, k: u64, window_micro: u64) -> Vec<Rule> {
        let mined = learn_trigger_rules(&self.log, k, window_micro);
        self.learner_runs.push(LearnerRun {
            kind: LearnerKind::TriggerMining,
            produced_rules: !mined.is_empty(),
        });
        let mut installed = Vec::new();
        for trigger in mined {
            let condition = RuleCondition::OnArrival {
                zone: trigger.zone.clone(),
                device: DeviceFilter::Device(trigger.device.clone()),
            };
            let action = ActionSpec {
                kind: ActionKind::Trigger,
                target: ActionTarget::Fixed { id: trigger.actuator.clone() },
                payload: trigger.state.clone(),
            };
            let duplicate = self
                .rules
                .iter()
                .any(|r| r.condition == condition && r.action == action);
            if duplicate {
                continue;
            }
            let id = self.add_rule(
                condition,
                action,
                RuleOrigin::Learned { observations: trigger.observations },
            );
            installed.push(self.rules.iter().find(|r| r.rule_id == id).unwrap().clone());
        }
        installed
    }

    /// Install rules synthesized outside the engine (interest profiling).
    /// Duplicates of already-installed rules are suppressed. Records a
    /// learner pass whether or not anything was produced.
    pub fn install_synthesized_rules(
        &mut self,
        specs: Vec<(RuleCondition, ActionSpec, u64)>,
        kind: LearnerKind,
    ) -> Vec<u64> {
        self.learner_runs.push(LearnerRun { kind, produced_rules: !specs.is_empty() });
        let mut ids = Vec::new();
        for (condition, action, observations) in specs {
            let duplicate = self
                .rules
                .iter()
                .any(|r| r.condition == condition && r.action == action);
            if duplicate {
                continue;
            }
            ids.push(self.add_rule(condition, action, RuleOrigin::Learned { observations }));
        }
        ids
    }

    /// Note that analytics read the log.
    pub fn mark_analytics_consumed(&mut self) {
        self.analytics_consumed = true;
    }

    /// Immutable snapshot of the run so far.
    pub fn trace(&self) -> RunTrace {
        RunTrace {
            events: self.log.clone(),
            actions: self.actions.clone(),
            learner_runs: self.learner_runs.clone(),
            analytics_consumed: self.analytics_consumed,
        }
    }
}

/// Reconstruct a scenario classification from an executed run.
///
/// Phases are rebuilt from what actually happened:
/// * actions fired by announcements form a direct phase with an active tag;
///   actions fired by sensed presence form a direct phase with a passive tag;
/// * each producing learner pass forms an indirect phase — trigger mining
///   with observation feedback, interest profiling with none;
/// * a log consumed by analytics alone, with no actions ever fired and no
///   producing learner, forms a no-interaction observation phase.
pub fn classify_trace(trace: &RunTrace) -> Result<ScenarioClassification, EngineError> {
    if trace.events.is_empty() {
        return Err(EngineError::EmptyTrace);
    }
    let mut phases = Vec::new();

    let kinds_via = |via: TriggerSource| -> BTreeSet<FeedbackKind> {
        trace
            .actions
            .iter()
            .filter(|a| a.via == via)
            .map(|a| FeedbackKind::from(a.kind))
            .collect()
    };
    let active_kinds = kinds_via(TriggerSource::ActiveInfo);
    if !active_kinds.is_empty() {
        phases.push(ScenarioPhase::new(true, InteractionMode::Direct, active_kinds));
    }
    let presence_kinds = kinds_via(TriggerSource::Presence);
    if !presence_kinds.is_empty() {
        phases.push(ScenarioPhase::new(false, InteractionMode::Direct, presence_kinds));
    }

    let mut producing: Vec<LearnerKind> = trace
        .learner_runs
        .iter()
        .filter(|run| run.produced_rules)
        .map(|run| run.kind)
        .collect();
    producing.dedup();
    let learner_produced = !producing.is_empty();
    for kind in producing {
        let feedback = match kind {
            LearnerKind::TriggerMining => vec![FeedbackKind::Observation],
            LearnerKind::InterestProfiling => vec![],
        };
        phases.push(ScenarioPhase::new(false, InteractionMode::Indirect, feedback));
    }

    if trace.analytics_consumed && trace.actions.is_empty() && !learner_produced {
        phases.push(ScenarioPhase::new(false, InteractionMode::None, [FeedbackKind::Observation]));
    }

    if phases.is_empty() {
        return Err(EngineError::UnclassifiableTrace);
    }
    let spec = ScenarioSpec::new("trace", phases);
    Ok(classify(&spec).expect("reconstructed phases satisfy the phase rules"))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn device(id: &str) -> DeviceId {
        DeviceId::from_raw(id)
    }

    fn arrival(ts_s: u64, dev: &str, zone: &str) -> Event {
        Event {
            ts_micro: ts_s * 1_000_000,
            kind: EventKind::Arrival { device: device(dev), zone: zone.into() },
        }
    }

    fn actuation(ts_s: u64, actuator: &str, state: &str) -> Event {
        Event {
            ts_micro: ts_s * 1_000_000,
            kind: EventKind::ManualActuation { actuator: actuator.into(), state: state.into() },
        }
    }

    fn office_light_rule(id: u64) -> Rule {
        Rule {
            rule_id: id,
            condition: RuleCondition::OnArrival { zone: "office".into(), device: DeviceFilter::Any },
            action: ActionSpec {
                kind: ActionKind::Trigger,
                target: ActionTarget::Fixed { id: "light_office".into() },
                payload: "on".into(),
            },
            origin: RuleOrigin::Configured,
        }
    }

    #[test]
    fn arrival_fires_matching_trigger() {
        let mut engine = ScenarioEngine::with_rules(vec![office_light_rule(1)]).unwrap();
        let fired = engine.step(arrival(8, "x", "office")).unwrap();
        assert_eq!(
            fired,
            vec![FeedbackAction {
                kind: ActionKind::Trigger,
                target: "light_office".into(),
                payload: "on".into(),
            }]
        );
        assert_eq!(engine.log().len(), 1);
        assert_eq!(engine.occupancy("office"), 1);
    }

    #[test]
    fn active_info_fires_with_attr_substitution() {
        let mut engine = ScenarioEngine::new();
        engine.add_rule(
            RuleCondition::OnActiveInfo { key: "ticket_seat".into() },
            ActionSpec {
                kind: ActionKind::Navigation,
                target: ActionTarget::EventDevice,
                payload: "seat {attr:ticket_seat} is on the left side".into(),
            },
            RuleOrigin::Configured,
        );
        let event = Event {
            ts_micro: 5,
            kind: EventKind::ActiveInfo {
                device: device("x"),
                attrs: [("ticket_seat".to_string(), "32F".to_string())].into(),
            },
        };
        let fired = engine.step(event).unwrap();
        assert_eq!(fired.len(), 1);
        assert_eq!(fired[0].target, "x");
        assert_eq!(fired[0].payload, "seat 32F is on the left side");
        assert_eq!(engine.actions()[0].via, TriggerSource::ActiveInfo);
    }

    #[test]
    fn unmatched_event_grows_log_only() {
        let mut engine = ScenarioEngine::with_rules(vec![office_light_rule(1)]).unwrap();
        let fired = engine.step(arrival(1, "x", "lobby")).unwrap();
        assert!(fired.is_empty());
        assert_eq!(engine.log().len(), 1);
    }

    #[test]
    fn rules_fire_in_ascending_id_order() {
        let mut second = office_light_rule(7);
        second.action.payload = "second".into();
        let mut first = office_light_rule(3);
        first.action.payload = "first".into();
        let mut engine = ScenarioEngine::with_rules(vec![second, first]).unwrap();
        let fired = engine.step(arrival(1, "x", "office")).unwrap();
        assert_eq!(fired.iter().map(|a| a.payload.as_str()).collect::<Vec<_>>(), ["first", "second"]);
    }

    #[test]
    fn time_regression_is_rejected() {
        let mut engine = ScenarioEngine::new();
        engine.step(arrival(10, "x", "office")).unwrap();
        assert_eq!(
            engine.step(arrival(9, "x", "office")),
            Err(EngineError::TimeRegression {
                event_ts_micro: 9_000_000,
                last_ts_micro: 10_000_000
            })
        );
        // Equal timestamps are allowed.
        assert!(engine.step(arrival(10, "y", "office")).is_ok());
    }

    #[test]
    fn occupancy_tracks_arrivals_and_departures() {
        let mut engine = ScenarioEngine::new();
        engine.step(arrival(1, "x", "wagon")).unwrap();
        engine.step(arrival(2, "y", "wagon")).unwrap();
        assert_eq!(engine.occupancy("wagon"), 2);
        engine
            .step(Event {
                ts_micro: 3_000_000,
                kind: EventKind::Departure { device: device("x"), zone: "wagon".into() },
            })
            .unwrap();
        assert_eq!(engine.occupancy("wagon"), 1);
    }

    #[test]
    fn occupancy_placeholder_resolves_at_fire_time() {
        let mut engine = ScenarioEngine::new();
        engine.add_rule(
            RuleCondition::OnArrival { zone: "entrance".into(), device: DeviceFilter::Any },
            ActionSpec {
                kind: ActionKind::Navigation,
                target: ActionTarget::Fixed { id: "monitor".into() },
                payload: "{occupancy:wagon} aboard".into(),
            },
            RuleOrigin::Configured,
        );
        engine.step(arrival(1, "a", "wagon")).unwrap();
        engine.step(arrival(2, "b", "wagon")).unwrap();
        let fired = engine.step(arrival(3, "x", "entrance")).unwrap();
        assert_eq!(fired[0].payload, "2 aboard");
    }

    #[test]
    fn duplicate_rule_ids_are_rejected() {
        let rules = vec![office_light_rule(1), office_light_rule(1)];
        assert_eq!(ScenarioEngine::with_rules(rules).unwrap_err(), EngineError::DuplicateRuleId(1));
    }

    fn five_mornings() -> Vec<Event> {
        let mut log = Vec::new();
        for day in 0..5u64 {
            let base = day * 86_400;
            log.push(arrival(base + 28_800, "katrin", "entrance"));
            log.push(actuation(base + 28_830, "light_entrance", "on"));
        }
        log
    }

    #[test]
    fn five_mornings_learn_one_rule() {
        let triggers = learn_trigger_rules(&five_mornings(), 5, 120_000_000);
        assert_eq!(triggers.len(), 1);
        let t = &triggers[0];
        assert_eq!(t.device, device("katrin"));
        assert_eq!(t.zone, "entrance");
        assert_eq!(t.actuator, "light_entrance");
        assert_eq!(t.state, "on");
        assert_eq!(t.observations, 5);
    }

    #[test]
    fn four_mornings_learn_nothing() {
        let log = &five_mornings()[..8];
        assert!(learn_trigger_rules(log, 5, 120_000_000).is_empty());
    }

    #[test]
    fn actuation_outside_window_does_not_count() {
        // Replaying by hand: each arrival is followed by the actuation only
        // 200 s later, so with a 120 s window no pair qualifies.
        let mut log = Vec::new();
        for day in 0..5u64 {
            let base = day * 86_400;
            log.push(arrival(base + 28_800, "katrin", "entrance"));
            log.push(actuation(base + 29_000, "light_entrance", "on"));
        }
        assert!(learn_trigger_rules(&log, 5, 120_000_000).is_empty());

        // The same five pairs count with a window that covers 200 s.
        assert_eq!(learn_trigger_rules(&log, 5, 200_000_000).len(), 1);
    }

    #[test]
    fn one_arrival_with_many_actuations_counts_once() {
        let log = vec![
            arrival(100, "k", "hall"),
            actuation(110, "fan", "on"),
            actuation(120, "fan", "on"),
        ];
        let triggers = learn_trigger_rules(&log, 1, 120_000_000);
        assert_eq!(triggers.len(), 1);
        assert_eq!(triggers[0].observations, 1);
    }

    #[test]
    fn learned_rule_replays_mornings_without_manual_actuations() {
        let mut engine = ScenarioEngine::new();
        for event in five_mornings() {
            engine.step(event).unwrap();
        }
        let installed = engine.learn_and_install_triggers(5, 120_000_000);
        assert_eq!(installed.len(), 1);
        assert_eq!(installed[0].origin, RuleOrigin::Learned { observations: 5 });

        // Re-learning finds the same habit but suppresses the duplicate.
        assert!(engine.learn_and_install_triggers(5, 120_000_000).is_empty());

        // Morning six: the arrival alone now produces the trigger.
        let fired = engine.step(arrival(5 * 86_400 + 28_800, "katrin", "entrance")).unwrap();
        assert_eq!(fired.len(), 1);
        assert_eq!(fired[0].kind, ActionKind::Trigger);
        assert_eq!(fired[0].target, "light_entrance");
        assert_eq!(fired[0].payload, "on");
    }

    #[test]
    fn classify_trace_people_flow_shape() {
        let mut engine = ScenarioEngine::new();
        engine.step(arrival(1, "x", "mall")).unwrap();
        engine.mark_analytics_consumed();
        let classification = classify_trace(&engine.trace()).unwrap();
        assert_eq!(classification.label(), "tag:passive; interaction:none; feedback:observation");
    }

    #[test]
    fn classify_trace_smart_buildings_shape() {
        let mut engine = ScenarioEngine::new();
        for event in five_mornings() {
            engine.step(event).unwrap();
        }
        engine.learn_and_install_triggers(5, 120_000_000);
        engine.step(arrival(5 * 86_400 + 28_800, "katrin", "entrance")).unwrap();
        let classification = classify_trace(&engine.trace()).unwrap();
        assert_eq!(
            classification.label(),
            "tag:passive; interaction:indirect/direct; feedback:observation/trigger"
        );
    }

    #[test]
    fn classify_trace_active_navigation_shape() {
        let mut engine = ScenarioEngine::new();
        engine.add_rule(
            RuleCondition::OnActiveInfo { key: "ticket_seat".into() },
            ActionSpec {
                kind: ActionKind::Navigation,
                target: ActionTarget::EventDevice,
                payload: "seat {attr:ticket_seat}".into(),
            },
            RuleOrigin::Configured,
        );
        engine.step(arrival(1, "x", "platform")).unwrap();
        engine
            .step(Event {
                ts_micro: 2_000_000,
                kind: EventKind::ActiveInfo {
                    device: device("x"),
                    attrs: [("ticket_seat".to_string(), "32F".to_string())].into(),
                },
            })
            .unwrap();
        let classification = classify_trace(&engine.trace()).unwrap();
        assert_eq!(classification.label(), "tag:active; interaction:direct; feedback:navigation");
    }

    #[test]
    fn classify_trace_errors() {
        assert_eq!(classify_trace(&RunTrace::default()), Err(EngineError::EmptyTrace));

        let mut engine = ScenarioEngine::new();
        engine.step(arrival(1, "x", "mall")).unwrap();
        assert_eq!(classify_trace(&engine.trace()), Err(EngineError::UnclassifiableTrace));
    }

    #[test]
    fn determinism_identical_inputs_identical_actions() {
        let events = five_mornings();
        let run = || {
            let mut engine = ScenarioEngine::with_rules(vec![office_light_rule(1)]).unwrap();
            for e in events.clone() {
                engine.step(e).unwrap();
            }
            engine.trace()
        };
        assert_eq!(run(), run());
    }

    #[test]
    fn rule_serde_round_trips() {
        let rule = Rule {
            rule_id: 3,
            condition: RuleCondition::OnArrival {
                zone: "office".into(),
                device: DeviceFilter::Device(device("aa:bb:cc:dd:ee:ff")),
            },
            action: ActionSpec {
                kind: ActionKind::Trigger,
                target: ActionTarget::Fixed { id: "light".into() },
                payload: "on".into(),
            },
            origin: RuleOrigin::Learned { observations: 5 },
        };
        let json = serde_json::to_string(&rule).unwrap();
        assert_eq!(serde_json::from_str::<Rule>(&json).unwrap(), rule);

        let any = Rule {
            condition: RuleCondition::OnArrival { zone: "office".into(), device: DeviceFilter::Any },
            ..rule
        };
        let json = serde_json::to_string(&any).unwrap();
        assert!(json.contains("\"device\":\"any\""));
        assert_eq!(serde_json::from_str::<Rule>(&json).unwrap(), any);
    }
}
