//! The indirect-to-direct transition, step by step: five mornings of manual
//! light switching teach the environment a trigger rule; the sixth morning
//! needs no hand on the switch.
//!
//! ```bash
//! cargo run --example learn_triggers
//! ```

use wearsense::engine::{learn_trigger_rules, EventKind, RuleOrigin};
use wearsense::sim::{run, secs, ScenarioScript};

fn main() {
    let script = ScenarioScript::builtin("smart-buildings").unwrap();
    let output = run(&script.default_config(1), &script).unwrap();

    // Replay the log the way the learner does, morning by morning.
    let day = secs(7200);
    for mornings in 4..=5u64 {
        let prefix: Vec<_> = output
            .trace
            .events
            .iter()
            .filter(|e| e.ts_micro < mornings * day)
            .cloned()
            .collect();
        let mined = learn_trigger_rules(&prefix, 5, secs(120));
        println!("after {mornings} morning(s): {} learned rule(s)", mined.len());
        for trigger in &mined {
            println!(
                "  arrival of {} in {} -> {} = {} ({} observations)",
                trigger.device, trigger.zone, trigger.actuator, trigger.state, trigger.observations
            );
        }
    }

    let learned: Vec<_> = output
        .rules
        .iter()
        .filter(|r| matches!(r.origin, RuleOrigin::Learned { .. }))
        .collect();
    println!("\nrules installed by the run: {}", learned.len());

    let sixth = 5 * day;
    println!("sixth morning:");
    for action in output.actions().iter().filter(|a| a.ts_micro >= sixth) {
        println!(
            "  t={}s  {:?} {} = {}",
            action.ts_micro / 1_000_000,
            action.kind,
            action.target,
            action.payload
        );
    }
    let manual = output
        .trace
        .events
        .iter()
        .filter(|e| e.ts_micro >= sixth)
        .filter(|e| matches!(e.kind, EventKind::ManualActuation { .. }))
        .count();
    println!("  manual actuations: {manual}");
    println!("\nclassification: {}", output.classification.unwrap().label());
}
