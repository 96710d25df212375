//! Pure observation: measure flows through a simulated shopping centre —
//! occupancy over time, dwell, zone-to-zone transitions, unique devices.
//!
//! ```bash
//! cargo run --example people_flow_analytics
//! ```

use wearsense::analytics::{dwell_stats, flow_matrix, occupancy, unique_devices};
use wearsense::sim::{run, secs, ScenarioScript};

fn main() {
    let script = ScenarioScript::builtin("people-flow").unwrap();
    let output = run(&script.default_config(11), &script).unwrap();

    println!(
        "unique devices in the first half hour: {}",
        unique_devices(&output.sightings, 0, secs(1800))
    );

    println!("\noccupancy of food_court (5 min buckets):");
    let series = occupancy(&output.sessions, "food_court", secs(300), 0, secs(3600));
    for (bucket_start, count) in &series.counts {
        let bar = "#".repeat(*count as usize);
        println!("  t={:>4}s  {count:>2} {bar}", bucket_start / 1_000_000);
    }

    println!("\ndwell per zone:");
    for zone in script.sensors.zones() {
        let stats = dwell_stats(&output.sessions, zone);
        println!(
            "  {zone:<12} {} sessions, mean {:.0}s, max {}s",
            stats.count,
            stats.mean_micro.unwrap_or(0.0) / 1e6,
            stats.max_micro.unwrap_or(0) / 1_000_000
        );
    }

    println!("\ntransitions:");
    let matrix = flow_matrix(&output.sessions).unwrap();
    for (i, from) in matrix.zones.iter().enumerate() {
        for (j, to) in matrix.zones.iter().enumerate() {
            if matrix.counts[i][j] > 0 {
                println!("  {from} -> {to}: {}", matrix.counts[i][j]);
            }
        }
    }

    // The run returned nothing to any visitor: observation only.
    assert!(output.actions().is_empty());
    println!("\nclassification: {}", output.classification.unwrap().label());
}
