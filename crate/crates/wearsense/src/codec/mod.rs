//! Wire-format codecs for the capture pipeline.
//!
//! Covers the classic pcap container, radiotap capture metadata, 802.11
//! probe-request management frames and BLE advertising PDUs (including
//! iBeacon manufacturer data). Every parser is a pure function over a byte
//! slice: it returns a value or a declared error, touches no shared state,
//! and is safe to call from any number of threads.

pub mod ble;
pub mod mac;
pub mod pcap;
pub mod probe;
pub mod radiotap;

pub use ble::{parse_ble_advertisement, AdStructure, BleAdvertisement, BleError, IBeaconPayload};
pub use mac::{MacAddress, MacParseError};
pub use pcap::{parse_pcap, write_pcap, CaptureRecord, LinkType, PcapError};
pub use probe::{parse_probe_request, serialize_probe_request, Dot11Error, ProbeRequestFrame, Ssid};
pub use radiotap::{parse_radiotap, Radiotap, RadiotapError};
