//! Build a small capture in memory, write it as pcap bytes, and run it back
//! through the codec and the tracker.
//!
//! ```bash
//! cargo run --example parse_capture
//! ```

use wearsense::codec::{
    parse_pcap, serialize_probe_request, write_pcap, CaptureRecord, LinkType, MacAddress,
    ProbeRequestFrame, Ssid,
};
use wearsense::tracker::{SensorMap, Tracker, TrackerConfig};

fn probe(sa: MacAddress, seq: u16) -> Vec<u8> {
    serialize_probe_request(&ProbeRequestFrame {
        sa,
        da: MacAddress::BROADCAST,
        bssid: MacAddress::BROADCAST,
        seq,
        frag: 0,
        ssid: Ssid::Wildcard,
        supported_rates: vec![0x02, 0x04, 0x0b, 0x16],
        rssi_dbm: None,
    })
}

fn main() {
    // Two phones probing in a lobby, thirty seconds apart each.
    let phone_a = MacAddress([0x02, 0x11, 0x22, 0x33, 0x44, 0x55]);
    let phone_b = MacAddress([0x02, 0xaa, 0xbb, 0xcc, 0xdd, 0xee]);
    let records: Vec<CaptureRecord> = (0..4u64)
        .map(|n| CaptureRecord {
            ts_micro: n * 30_000_000,
            link_type: LinkType::Ieee80211Bare,
            payload: probe(if n % 2 == 0 { phone_a } else { phone_b }, n as u16),
        })
        .collect();

    let pcap = write_pcap(LinkType::Ieee80211Bare, &records);
    println!("capture: {} bytes, {} frames", pcap.len(), records.len());

    // Read it back exactly as the `parse` subcommand would.
    let sensors = SensorMap::new([("lobby_sensor", "lobby")]).unwrap();
    let mut tracker = Tracker::new(sensors, TrackerConfig::default());
    for record in parse_pcap(&pcap).expect("round-trips") {
        tracker.ingest(&record, "lobby_sensor").unwrap();
    }

    println!("sightings:");
    for sighting in tracker.sightings() {
        println!("  t={:>3}s  {}", sighting.ts_micro / 1_000_000, sighting.device_id);
    }
    for record in tracker.device_records() {
        println!(
            "device {} seen {} time(s) in {:?}",
            record.device_id, record.visit_count, record.zones_visited
        );
    }
}
