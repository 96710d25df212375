//! Passive-presence sensing for smart environments.
//!
//! Wearables betray their presence continuously: Wi-Fi modules send probe
//! requests every 15 to 60 seconds and BLE beacons advertise on a similar
//! cadence. This crate turns those emissions into identified, re-identified,
//! zone-resolved presence and lets an environment act on it:
//!
//! * [`codec`] — bit-exact parsing and serialization of pcap captures,
//!   radiotap headers, 802.11 probe-request frames and BLE advertising PDUs.
//! * [`tracker`] — sightings, zone assignment, sessionization and per-device
//!   histories, with optional salted identity hashing.
//! * [`taxonomy`] — the scenario classification model (tag mode ×
//!   interaction mode × feedback kind) and its canonical label codec.
//! * [`engine`] — an event-sourced rule engine that maps presence events to
//!   feedback actions and learns trigger rules from observed habits.
//! * [`analytics`] — occupancy, dwell, flow and interest computations over
//!   sessions and sightings.
//! * [`sim`] — a deterministic agent simulator with five built-in scenario
//!   scripts, producing capture bytes plus ground truth.
//!
//! The `wearsense` binary exposes the pipeline as subcommands (`parse`,
//! `simulate`, `run-scenario`, `analyze`, `classify`); see [`cli`]. Runnable
//! walk-throughs live in the `examples/` directory.

pub mod analytics;
pub mod cli;
pub mod codec;
pub mod engine;
pub mod files;
pub mod sim;
pub mod taxonomy;
pub mod tracker;

pub use codec::{BleAdvertisement, CaptureRecord, IBeaconPayload, LinkType, MacAddress, ProbeRequestFrame, Ssid};
pub use taxonomy::{FeedbackKind, InteractionMode, ScenarioClassification, ScenarioSpec, TagMode};
pub use tracker::{DeviceId, PresenceSession, SensorMap, Sighting, Tracker};
