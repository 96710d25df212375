//! Validate and classify the five built-in scenario specs, then show what a
//! broken spec looks like.
//!
//! ```bash
//! cargo run --example classify_scenarios
//! ```

use wearsense::taxonomy::{
    classify, scenarios, validate, FeedbackKind, InteractionMode, ScenarioPhase, ScenarioSpec,
};

fn main() {
    for spec in scenarios::all() {
        let violations = validate(&spec);
        assert!(violations.is_empty(), "built-in specs are consistent");
        let classification = classify(&spec).unwrap();
        println!("{:<26} {}", spec.name, classification.label());
    }

    // A phase that claims direct interaction but only observes breaks R1.
    let broken = ScenarioSpec::new(
        "broken",
        vec![ScenarioPhase::new(false, InteractionMode::Direct, [FeedbackKind::Observation])],
    );
    println!("\n{}:", broken.name);
    for violation in validate(&broken) {
        println!("  {violation}");
    }
}
