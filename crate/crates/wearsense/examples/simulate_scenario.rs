//! Run one of the built-in scenario scripts end to end and show what the
//! environment did.
//!
//! ```bash
//! cargo run --example simulate_scenario -- my-seat
//! ```

use wearsense::sim::{run, ScenarioScript};

fn main() {
    let name = std::env::args().nth(1).unwrap_or_else(|| "my-seat".to_string());
    let script = match ScenarioScript::builtin(&name) {
        Ok(script) => script,
        Err(e) => {
            eprintln!("{e}; known: {:?}", ScenarioScript::builtin_names());
            std::process::exit(2);
        }
    };

    let output = run(&script.default_config(1), &script).expect("built-in scripts are valid");

    println!("scenario:  {}", script.name);
    println!("frames:    {}", output.pcap_record_count);
    println!("sightings: {}", output.sightings.len());
    println!("sessions:  {}", output.sessions.len());
    println!("actions:   {}", output.actions().len());
    for action in output.actions() {
        println!(
            "  t={:>6}s  {:?} -> {}: {}",
            action.ts_micro / 1_000_000,
            action.kind,
            action.target,
            action.payload
        );
    }
    match &output.classification {
        Some(c) => println!("classification: {}", c.label()),
        None => println!("classification: (unclassifiable)"),
    }
    if let Some(expected) = &output.ground_truth.expected_label {
        println!("expected:       {expected}");
    }
}
