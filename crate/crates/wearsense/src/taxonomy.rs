//! The scenario classification model.
//!
//! A smart-environment scenario is described along three axes: how the
//! human-wearable presents itself ([`TagMode`]), how the environment
//! interacts with it ([`InteractionMode`]), and what kind of feedback the
//! environment produces ([`FeedbackKind`]). Scenarios that change character
//! over time are modelled as a sequence of [`ScenarioPhase`]s; classifying a
//! spec takes the union over its phases, which is why a single scenario can
//! read `tag:passive/active` or `interaction:indirect/direct`.
//!
//! Three consistency rules tie a phase's interaction mode to its feedback:
//!
//! * **R1** — a phase is `direct` exactly when it returns feedback aimed at
//!   the human-wearable (navigation, content or trigger).
//! * **R2** — a phase with no interaction observes, and does nothing else.
//! * **R3** — an indirect phase carries at most observation. The empty set
//!   is allowed: some learning phases feed later decisions without being
//!   counted as observation feedback in their own right.
//!
//! Everything here is a pure value or a pure function; unrestricted
//! concurrent use is fine.

use std::collections::BTreeSet;
use std::fmt;

use serde::{Deserialize, Serialize};

/// How the wearable presents itself to the environment.
///
/// A passive tag is detected purely through its radio emissions; an active
/// tag additionally volunteers application-level information.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum TagMode {
    Passive,
    Active,
}

/// How the environment interacts with the human-wearable.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum InteractionMode {
    /// Information is analyzed to learn future actions; no feedback now.
    Indirect,
    /// Feedback is returned to the human-wearable immediately.
    Direct,
    /// Pure statistics; nothing ever returns to the human-wearable.
    None,
}

/// What the environment produces from the gathered information.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum FeedbackKind {
    /// Guides the human-wearable's movement.
    Navigation,
    /// Tailored information or advertising.
    Content,
    /// Analysis only; nothing is returned.
    Observation,
    /// The environment actuates something (lights, doors).
    Trigger,
}

impl TagMode {
    pub fn label(self) -> &'static str {
        match self {
            TagMode::Passive => "passive",
            TagMode::Active => "active",
        }
    }

    fn from_label(s: &str) -> Option<Self> {
        match s {
            "passive" => Some(TagMode::Passive),
            "active" => Some(TagMode::Active),
            _ => None,
        }
    }
}

impl InteractionMode {
    pub fn label(self) -> &'static str {
        match self {
            InteractionMode::Indirect => "indirect",
            InteractionMode::Direct => "direct",
            InteractionMode::None => "none",
        }
    }

    fn from_label(s: &str) -> Option<Self> {
        match s {
            "indirect" => Some(InteractionMode::Indirect),
            "direct" => Some(InteractionMode::Direct),
            "none" => Some(InteractionMode::None),
            _ => None,
        }
    }
}

impl FeedbackKind {
    pub fn label(self) -> &'static str {
        match self {
            FeedbackKind::Navigation => "navigation",
            FeedbackKind::Content => "content",
            FeedbackKind::Observation => "observation",
            FeedbackKind::Trigger => "trigger",
        }
    }

    fn from_label(s: &str) -> Option<Self> {
        match s {
            "navigation" => Some(FeedbackKind::Navigation),
            "content" => Some(FeedbackKind::Content),
            "observation" => Some(FeedbackKind::Observation),
            "trigger" => Some(FeedbackKind::Trigger),
            _ => None,
        }
    }
}

/// One phase of a scenario: whether the wearable shares application-level
/// information, how the environment interacts, and what feedback it gives.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ScenarioPhase {
    pub shares_application_info: bool,
    pub interaction: InteractionMode,
    pub feedback_kinds: BTreeSet<FeedbackKind>,
}

impl ScenarioPhase {
    pub fn new(
        shares_application_info: bool,
        interaction: InteractionMode,
        feedback_kinds: impl IntoIterator<Item = FeedbackKind>,
    ) -> Self {
        ScenarioPhase {
            shares_application_info,
            interaction,
            feedback_kinds: feedback_kinds.into_iter().collect(),
        }
    }
}

/// A named scenario as a non-empty list of phases.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ScenarioSpec {
    pub name: String,
    pub phases: Vec<ScenarioPhase>,
}

impl ScenarioSpec {
    pub fn new(name: impl Into<String>, phases: Vec<ScenarioPhase>) -> Self {
        ScenarioSpec { name: name.into(), phases }
    }
}

/// The consistency rules a phase can break.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PhaseRule {
    /// R1: `direct` interaction and wearable-directed feedback imply each other.
    DirectNeedsDirectedFeedback,
    /// R2: `none` interaction permits exactly observation.
    NoneIsObservationOnly,
    /// R3: `indirect` interaction carries at most observation.
    IndirectAtMostObservation,
}

impl PhaseRule {
    pub fn code(self) -> &'static str {
        match self {
            PhaseRule::DirectNeedsDirectedFeedback => "R1",
            PhaseRule::NoneIsObservationOnly => "R2",
            PhaseRule::IndirectAtMostObservation => "R3",
        }
    }
}

/// A broken rule in a specific phase.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Violation {
    pub phase: usize,
    pub rule: PhaseRule,
    pub detail: String,
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "phase {} violates {}: {}", self.phase, self.rule.code(), self.detail)
    }
}

/// Errors classifying a scenario spec.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum TaxonomyError {
    /// The scenario declares no phases.
    EmptySpec,
    /// One or more phases break the consistency rules.
    InvalidSpec(Vec<Violation>),
}

impl fmt::Display for TaxonomyError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            TaxonomyError::EmptySpec => write!(f, "scenario spec has no phases"),
            TaxonomyError::InvalidSpec(violations) => {
                write!(f, "scenario spec breaks {} rule(s)", violations.len())
            }
        }
    }
}

impl std::error::Error for TaxonomyError {}

const DIRECTED_KINDS: [FeedbackKind; 3] =
    [FeedbackKind::Navigation, FeedbackKind::Content, FeedbackKind::Trigger];

/// Check every phase against rules R1–R3, reporting one violation per
/// broken rule. Violations are values, not errors: a spec that validates
/// to an empty list is consistent.
pub fn validate(spec: &ScenarioSpec) -> Vec<Violation> {
    let mut violations = Vec::new();
    for (index, phase) in spec.phases.iter().enumerate() {
        let directed = DIRECTED_KINDS.iter().any(|k| phase.feedback_kinds.contains(k));
        let is_direct = phase.interaction == InteractionMode::Direct;
        if is_direct != directed {
            violations.push(Violation {
                phase: index,
                rule: PhaseRule::DirectNeedsDirectedFeedback,
                detail: if is_direct {
                    "direct interaction without navigation, content or trigger feedback".into()
                } else {
                    "navigation, content or trigger feedback without direct interaction".into()
                },
            });
        }
        if phase.interaction == InteractionMode::None {
            let only_observation = phase.feedback_kinds.len() == 1
                && phase.feedback_kinds.contains(&FeedbackKind::Observation);
            if !only_observation {
                violations.push(Violation {
                    phase: index,
                    rule: PhaseRule::NoneIsObservationOnly,
                    detail: "no interaction requires exactly observation feedback".into(),
                });
            }
        }
        if phase.interaction == InteractionMode::Indirect
            && !phase.feedback_kinds.iter().all(|k| *k == FeedbackKind::Observation)
        {
            violations.push(Violation {
                phase: index,
                rule: PhaseRule::IndirectAtMostObservation,
                detail: "indirect interaction permits at most observation feedback".into(),
            });
        }
    }
    violations
}

/// A scenario's classification: the union over its phases.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ScenarioClassification {
    pub tag_modes: BTreeSet<TagMode>,
    pub interaction_modes: BTreeSet<InteractionMode>,
    pub feedback_kinds: BTreeSet<FeedbackKind>,
}

/// Classify a valid spec: tags from the per-phase sharing flags, interaction
/// modes and feedback kinds as unions over phases.
pub fn classify(spec: &ScenarioSpec) -> Result<ScenarioClassification, TaxonomyError> {
    if spec.phases.is_empty() {
        return Err(TaxonomyError::EmptySpec);
    }
    let violations = validate(spec);
    if !violations.is_empty() {
        return Err(TaxonomyError::InvalidSpec(violations));
    }
    let mut classification = ScenarioClassification {
        tag_modes: BTreeSet::new(),
        interaction_modes: BTreeSet::new(),
        feedback_kinds: BTreeSet::new(),
    };
    for phase in &spec.phases {
        classification.tag_modes.insert(if phase.shares_application_info {
            TagMode::Active
        } else {
            TagMode::Passive
        });
        classification.interaction_modes.insert(phase.interaction);
        classification.feedback_kinds.extend(phase.feedback_kinds.iter().copied());
    }
    Ok(classification)
}

/// Error parsing a canonical classification label.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LabelParseError {
    pub message: String,
}

impl fmt::Display for LabelParseError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "invalid classification label: {}", self.message)
    }
}

impl std::error::Error for LabelParseError {}

fn join_labels<T: Copy, I: IntoIterator<Item = T>>(items: I, label: fn(T) -> &'static str) -> String {
    items.into_iter().map(label).collect::<Vec<_>>().join("/")
}

fn parse_members<T: Copy + Ord>(
    segment: &str,
    prefix: &str,
    from_label: fn(&str) -> Option<T>,
    allow_empty: bool,
) -> Result<BTreeSet<T>, LabelParseError> {
    let err = |message: String| LabelParseError { message };
    let rest = segment
        .strip_prefix(prefix)
        .ok_or_else(|| err(format!("expected segment starting with {prefix:?}")))?;
    if rest.is_empty() {
        if allow_empty {
            return Ok(BTreeSet::new());
        }
        return Err(err(format!("{prefix:?} segment must not be empty")));
    }
    let mut members = BTreeSet::new();
    let mut previous: Option<T> = None;
    for word in rest.split('/') {
        let member =
            from_label(word).ok_or_else(|| err(format!("unknown word {word:?} in {prefix:?}")))?;
        if let Some(prev) = previous {
            if member <= prev {
                return Err(err(format!("members out of canonical order at {word:?}")));
            }
        }
        previous = Some(member);
        members.insert(member);
    }
    Ok(members)
}

impl ScenarioClassification {
    /// Render the canonical label, e.g.
    /// `tag:passive/active; interaction:indirect/direct; feedback:navigation/content`.
    ///
    /// Members always appear in the fixed orders passive<active,
    /// indirect<direct<none, navigation<content<observation<trigger.
    pub fn label(&self) -> String {
        format!(
            "tag:{}; interaction:{}; feedback:{}",
            join_labels(self.tag_modes.iter().copied(), TagMode::label),
            join_labels(self.interaction_modes.iter().copied(), InteractionMode::label),
            join_labels(self.feedback_kinds.iter().copied(), FeedbackKind::label),
        )
    }

    /// Parse a canonical label; the exact inverse of [`Self::label`].
    pub fn parse_label(text: &str) -> Result<Self, LabelParseError> {
        let segments: Vec<&str> = text.split("; ").collect();
        if segments.len() != 3 {
            return Err(LabelParseError {
                message: "expected three segments separated by \"; \"".into(),
            });
        }
        let tag_modes = parse_members(segments[0], "tag:", TagMode::from_label, false)?;
        let interaction_modes =
            parse_members(segments[1], "interaction:", InteractionMode::from_label, false)?;
        let feedback_kinds =
            parse_members(segments[2], "feedback:", FeedbackKind::from_label, true)?;
        Ok(ScenarioClassification { tag_modes, interaction_modes, feedback_kinds })
    }
}

impl fmt::Display for ScenarioClassification {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.label())
    }
}

/// The five published scenario walk-throughs as ready-made specs.
pub mod scenarios {
    use super::*;

    /// A traveller shares an electronic ticket and is guided to the seat.
    pub fn my_seat() -> ScenarioSpec {
        ScenarioSpec::new(
            "my-seat",
            vec![ScenarioPhase::new(true, InteractionMode::Direct, [FeedbackKind::Navigation])],
        )
    }

    /// A passenger is detected passively and directed to free seats.
    pub fn free_seat() -> ScenarioSpec {
        ScenarioSpec::new(
            "free-seat",
            vec![ScenarioPhase::new(false, InteractionMode::Direct, [FeedbackKind::Navigation])],
        )
    }

    /// A fair visitor's booth interests are learned, then ads and booth
    /// recommendations follow her — optionally jump-started by sharing
    /// interests directly.
    pub fn optimized_advertisement() -> ScenarioSpec {
        ScenarioSpec::new(
            "optimized-advertisement",
            vec![
                ScenarioPhase::new(false, InteractionMode::Indirect, []),
                ScenarioPhase::new(
                    false,
                    InteractionMode::Direct,
                    [FeedbackKind::Navigation, FeedbackKind::Content],
                ),
                ScenarioPhase::new(
                    true,
                    InteractionMode::Direct,
                    [FeedbackKind::Navigation, FeedbackKind::Content],
                ),
            ],
        )
    }

    /// Visitor flows through a shopping centre are measured; nothing is
    /// ever returned to the visitors.
    pub fn people_flow() -> ScenarioSpec {
        ScenarioSpec::new(
            "people-flow",
            vec![ScenarioPhase::new(false, InteractionMode::None, [FeedbackKind::Observation])],
        )
    }

    /// An office learns a worker's morning light habit and then switches
    /// the light itself.
    pub fn smart_buildings() -> ScenarioSpec {
        ScenarioSpec::new(
            "smart-buildings",
            vec![
                ScenarioPhase::new(false, InteractionMode::Indirect, [FeedbackKind::Observation]),
                ScenarioPhase::new(false, InteractionMode::Direct, [FeedbackKind::Trigger]),
            ],
        )
    }

    pub fn all() -> Vec<ScenarioSpec> {
        vec![my_seat(), free_seat(), optimized_advertisement(), people_flow(), smart_buildings()]
    }
}
