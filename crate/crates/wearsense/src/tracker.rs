//! Presence tracking: parsed emissions become sightings, sightings become
//! zone-resolved sessions, sessions become per-device histories.
//!
//! The pipeline is: [`Tracker::ingest`] turns capture records into
//! [`Sighting`]s (optionally hashing identities with a salt),
//! [`assign_zones`] resolves each device to one zone per epoch by strongest
//! signal, [`sessionize`] merges a device's sightings in one zone into
//! [`PresenceSession`]s using a maximum-gap rule, and [`device_summary`]
//! aggregates a device's sessions into a [`DeviceRecord`].
//!
//! Concurrency contract: a [`Tracker`] has exactly one ingestion stream
//! (enforced by `&mut self`); any number of readers may take consistent
//! snapshots through the `&self` accessors, which never observe a partially
//! applied sighting.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::codec::{
    parse_ble_advertisement, parse_probe_request, parse_radiotap, CaptureRecord, IBeaconPayload,
    LinkType, MacAddress,
};

/// Opaque zone label.
pub type ZoneId = String;
/// Opaque sensor label.
pub type SensorId = String;

/// Default sessionization gap: five times the longest probe interval, so a
/// single missed probe cannot split a session.
pub const DEFAULT_GAP_MICRO: u64 = 300_000_000;
/// Default zone-assignment epoch: short enough to follow walking devices,
/// long enough to pair sightings from co-located sensors.
pub const DEFAULT_EPOCH_MICRO: u64 = 10_000_000;

/// Which sensor sits in which zone. Every sensor maps to exactly one zone;
/// a zone may host several sensors.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SensorMap {
    sensors: BTreeMap<SensorId, ZoneId>,
}

/// One line of a sensor-map file.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SensorMapEntry {
    pub sensor_id: SensorId,
    pub zone_id: ZoneId,
}

impl SensorMap {
    /// Build from (sensor, zone) pairs. At least one sensor is required.
    pub fn new<S, Z>(pairs: impl IntoIterator<Item = (S, Z)>) -> Result<Self, TrackerError>
    where
        S: Into<SensorId>,
        Z: Into<ZoneId>,
    {
        let sensors: BTreeMap<SensorId, ZoneId> =
            pairs.into_iter().map(|(s, z)| (s.into(), z.into())).collect();
        if sensors.is_empty() {
            return Err(TrackerError::EmptySensorMap);
        }
        Ok(SensorMap { sensors })
    }

    pub fn zone_of(&self, sensor_id: &str) -> Option<&ZoneId> {
        self.sensors.get(sensor_id)
    }

    pub fn contains(&self, sensor_id: &str) -> bool {
        self.sensors.contains_key(sensor_id)
    }

    pub fn len(&self) -> usize {
        self.sensors.len()
    }

    pub fn is_empty(&self) -> bool {
        self.sensors.is_empty()
    }

    /// Sensors in ascending id order.
    pub fn iter(&self) -> impl Iterator<Item = (&SensorId, &ZoneId)> {
        self.sensors.iter()
    }

    /// Distinct zones, sorted.
    pub fn zones(&self) -> BTreeSet<&ZoneId> {
        self.sensors.values().collect()
    }

    /// Smallest sensor id assigned to `zone`, if any.
    pub fn first_sensor_in(&self, zone: &str) -> Option<&SensorId> {
        self.sensors.iter().find(|(_, z)| z.as_str() == zone).map(|(s, _)| s)
    }

    pub fn entries(&self) -> Vec<SensorMapEntry> {
        self.sensors
            .iter()
            .map(|(s, z)| SensorMapEntry { sensor_id: s.clone(), zone_id: z.clone() })
            .collect()
    }
}

/// A device identity: a MAC address in canonical text form, a beacon
/// identity `<uuid-hex>:<major>:<minor>`, or — with privacy hashing on — a
/// salted 32-hex-char token.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct DeviceId(String);

impl DeviceId {
    pub fn from_mac(mac: &MacAddress) -> Self {
        DeviceId(mac.to_string())
    }

    pub fn from_ibeacon(beacon: &IBeaconPayload) -> Self {
        DeviceId(format!("{}:{}:{}", beacon.uuid_hex(), beacon.major, beacon.minor))
    }

    /// Salted one-way token: the first 16 bytes of SHA-256(salt ‖ raw) in
    /// lowercase hex. Stable for a given identity and salt; distinct
    /// identities collide with negligible probability.
    pub fn hashed(raw: &str, salt: &[u8]) -> Self {
        let mut hasher = Sha256::new();
        hasher.update(salt);
        hasher.update(raw.as_bytes());
        let digest = hasher.finalize();
        DeviceId(hex::encode(&digest[..16]))
    }

    pub fn from_raw(raw: impl Into<String>) -> Self {
        DeviceId(raw.into())
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }
}

impl fmt::Display for DeviceId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

/// How a sighting was made.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SightingKind {
    WifiProbe,
    BleAdv,
    /// Application-level announcement a device volunteers (active tag).
    ActiveAnnounce,
}

/// A device seen by a sensor at a time.
///
/// `attrs` is present exactly when `kind` is [`SightingKind::ActiveAnnounce`].
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Sighting {
    pub device_id: DeviceId,
    pub sensor_id: SensorId,
    pub ts_micro: u64,
    pub rssi_dbm: Option<i8>,
    pub kind: SightingKind,
    pub attrs: Option<BTreeMap<String, String>>,
}

impl Sighting {
    pub fn active_announce(
        device_id: DeviceId,
        sensor_id: impl Into<SensorId>,
        ts_micro: u64,
        attrs: BTreeMap<String, String>,
    ) -> Self {
        Sighting {
            device_id,
            sensor_id: sensor_id.into(),
            ts_micro,
            rssi_dbm: None,
            kind: SightingKind::ActiveAnnounce,
            attrs: Some(attrs),
        }
    }
}

/// A sighting with its epoch-resolved zone.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ZonedSighting {
    pub device_id: DeviceId,
    pub zone_id: ZoneId,
    pub ts_micro: u64,
}

/// A device's continuous presence in one zone.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PresenceSession {
    pub device_id: DeviceId,
    pub zone_id: ZoneId,
    pub start_micro: u64,
    pub end_micro: u64,
    pub sighting_count: u64,
}

impl PresenceSession {
    pub fn duration_micro(&self) -> u64 {
        self.end_micro - self.start_micro
    }
}

/// A device's aggregated history.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DeviceRecord {
    pub device_id: DeviceId,
    pub first_seen_micro: u64,
    pub last_seen_micro: u64,
    /// Number of sessions.
    pub visit_count: u64,
    pub zones_visited: BTreeSet<ZoneId>,
}

/// Errors from the tracking pipeline.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum TrackerError {
    UnknownSensor(SensorId),
    /// Sightings arrived out of timestamp order across epochs, or a
    /// sessionize input was not time-sorted.
    UnsortedInput { index: usize },
    UnknownDevice(DeviceId),
    EmptySensorMap,
}

impl fmt::Display for TrackerError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            TrackerError::UnknownSensor(id) => write!(f, "UnknownSensor: {id:?}"),
            TrackerError::UnsortedInput { index } => {
                write!(f, "UnsortedInput: timestamp regression at index {index}")
            }
            TrackerError::UnknownDevice(id) => write!(f, "UnknownDevice: {id}"),
            TrackerError::EmptySensorMap => write!(f, "sensor map must contain at least one sensor"),
        }
    }
}

impl std::error::Error for TrackerError {}

/// Tracker knobs. Hashing is off by default; deployments persisting real
/// captures should turn it on so raw identities never reach disk.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TrackerConfig {
    pub gap_micro: u64,
    pub epoch_micro: u64,
    /// When set, every device identity is replaced by its salted hash token
    /// at ingestion time.
    pub hash_salt: Option<Vec<u8>>,
}

impl Default for TrackerConfig {
    fn default() -> Self {
        TrackerConfig {
            gap_micro: DEFAULT_GAP_MICRO,
            epoch_micro: DEFAULT_EPOCH_MICRO,
            hash_salt: None,
        }
    }
}

/// Single-writer presence tracker state.
#[derive(Debug, Clone)]
pub struct Tracker {
    sensors: SensorMap,
    config: TrackerConfig,
    sightings: Vec<Sighting>,
    dropped: u64,
    max_epoch: Option<u64>,
}

impl Tracker {
    pub fn new(sensors: SensorMap, config: TrackerConfig) -> Self {
        assert!(config.gap_micro > 0, "gap must be positive");
        assert!(config.epoch_micro > 0, "epoch must be positive");
        Tracker { sensors, config, sightings: Vec::new(), dropped: 0, max_epoch: None }
    }

    pub fn sensors(&self) -> &SensorMap {
        &self.sensors
    }

    pub fn config(&self) -> &TrackerConfig {
        &self.config
    }

    /// Payloads that parsed to nothing usable (wrong frame type, garbage).
    pub fn dropped(&self) -> u64 {
        self.dropped
    }

    pub fn sightings(&self) -> &[Sighting] {
        &self.sightings
    }

    /// Turn one capture record into a sighting, if its payload carries a
    /// device emission. Non-probe or unparsable payloads yield `Ok(None)`
    /// and bump the drop counter.
    pub fn ingest(
        &mut self,
        record: &CaptureRecord,
        sensor_id: &str,
    ) -> Result<Option<Sighting>, TrackerError> {
        self.ingest_with_rssi(record, sensor_id, None)
    }

    /// Like [`Tracker::ingest`], but lets the caller supply a signal
    /// strength measured out-of-band (used when the capture framing itself
    /// carries none, e.g. bare 802.11 records). A radiotap-provided RSSI
    /// wins over the supplied one.
    pub fn ingest_with_rssi(
        &mut self,
        record: &CaptureRecord,
        sensor_id: &str,
        rssi_dbm: Option<i8>,
    ) -> Result<Option<Sighting>, TrackerError> {
        if !self.sensors.contains(sensor_id) {
            return Err(TrackerError::UnknownSensor(sensor_id.to_string()));
        }
        let parsed = match record.link_type {
            LinkType::Ieee80211Bare => parse_probe_request(&record.payload)
                .ok()
                .map(|frame| (DeviceId::from_mac(&frame.sa), SightingKind::WifiProbe, rssi_dbm)),
            LinkType::Ieee80211Radiotap => parse_radiotap(&record.payload).ok().and_then(|rt| {
                parse_probe_request(&record.payload[rt.body_offset..]).ok().map(|frame| {
                    (DeviceId::from_mac(&frame.sa), SightingKind::WifiProbe, rt.rssi_dbm.or(rssi_dbm))
                })
            }),
            LinkType::BleAdv => parse_ble_advertisement(&record.payload).ok().map(|adv| {
                let device = match &adv.ibeacon {
                    Some(beacon) => DeviceId::from_ibeacon(beacon),
                    None => DeviceId::from_mac(&adv.adv_addr),
                };
                (device, SightingKind::BleAdv, rssi_dbm)
            }),
        };
        let Some((device_id, kind, rssi_dbm)) = parsed else {
            self.dropped += 1;
            return Ok(None);
        };
        let sighting = Sighting {
            device_id,
            sensor_id: sensor_id.to_string(),
            ts_micro: record.ts_micro,
            rssi_dbm,
            kind,
            attrs: None,
        };
        self.ingest_sighting(sighting).map(Some)
    }

    /// Add an already-built sighting (e.g. an active announcement or a line
    /// from a sightings file). Applies identity hashing, validates the
    /// sensor, and rejects arrivals that jump to an earlier epoch —
    /// reordering within one epoch is tolerated, across epochs it is not.
    pub fn ingest_sighting(&mut self, mut sighting: Sighting) -> Result<Sighting, TrackerError> {
        if !self.sensors.contains(&sighting.sensor_id) {
            return Err(TrackerError::UnknownSensor(sighting.sensor_id));
        }
        if let Some(salt) = &self.config.hash_salt {
            sighting.device_id = DeviceId::hashed(sighting.device_id.as_str(), salt);
        }
        let epoch = sighting.ts_micro / self.config.epoch_micro;
        if let Some(max_epoch) = self.max_epoch {
            if epoch < max_epoch {
                return Err(TrackerError::UnsortedInput { index: self.sightings.len() });
            }
        }
        self.max_epoch = Some(self.max_epoch.map_or(epoch, |m| m.max(epoch)));
        self.sightings.push(sighting.clone());
        Ok(sighting)
    }

    /// All presence sessions, ordered by (device, start, zone).
    pub fn sessions(&self) -> Vec<PresenceSession> {
        let zoned = assign_zones(&self.sightings, &self.sensors, self.config.epoch_micro);
        let mut by_device_zone: BTreeMap<(&DeviceId, &ZoneId), Vec<u64>> = BTreeMap::new();
        for z in &zoned {
            by_device_zone.entry((&z.device_id, &z.zone_id)).or_default().push(z.ts_micro);
        }
        let mut sessions = Vec::new();
        for ((device, zone), timestamps) in by_device_zone {
            let chunk = sessionize(device, zone, &timestamps, self.config.gap_micro)
                .expect("per-device zoned timestamps are sorted");
            sessions.extend(chunk);
        }
        sessions.sort_by(|a, b| {
            (&a.device_id, a.start_micro, &a.zone_id).cmp(&(&b.device_id, b.start_micro, &b.zone_id))
        });
        sessions
    }

    /// Aggregated per-device histories, ordered by device id.
    pub fn device_records(&self) -> Vec<DeviceRecord> {
        let sessions = self.sessions();
        let mut devices: Vec<&DeviceId> = sessions.iter().map(|s| &s.device_id).collect();
        devices.dedup();
        devices
            .into_iter()
            .map(|d| device_summary(d, &sessions).expect("device has sessions"))
            .collect()
    }
}

/// Resolve each device to one zone per epoch: the zone of the sensor with
/// the strongest signal among that device's sightings in the epoch bucket.
/// Ties break to the lexicographically smallest sensor id; sightings without
/// a signal lose to any sighting with one. Output is sorted by (device,
/// timestamp) and is invariant under permutations of the input.
///
/// Every sighting's sensor must be present in `sensors` (ingestion
/// guarantees this).
pub fn assign_zones(
    sightings: &[Sighting],
    sensors: &SensorMap,
    epoch_micro: u64,
) -> Vec<ZonedSighting> {
    assert!(epoch_micro > 0, "epoch must be positive");
    // (device, epoch) -> winning sensor, judged by (rssi, smaller sensor id).
    let mut winners: BTreeMap<(&DeviceId, u64), (Option<i8>, &SensorId)> = BTreeMap::new();
    for s in sightings {
        let key = (&s.device_id, s.ts_micro / epoch_micro);
        let candidate = (s.rssi_dbm, &s.sensor_id);
        match winners.get_mut(&key) {
            None => {
                winners.insert(key, candidate);
            }
            Some(best) => {
                let better = candidate.0 > best.0
                    || (candidate.0 == best.0 && candidate.1 < best.1);
                if better {
                    *best = candidate;
                }
            }
        }
    }
    let mut zoned: Vec<ZonedSighting> = sightings
        .iter()
        .map(|s| {
            let (_, sensor) = winners[&(&s.device_id, s.ts_micro / epoch_micro)];
            let zone = sensors
                .zone_of(sensor)
                .expect("sighting sensor present in sensor map");
            ZonedSighting {
                device_id: s.device_id.clone(),
                zone_id: zone.clone(),
                ts_micro: s.ts_micro,
            }
        })
        .collect();
    zoned.sort_by(|a, b| (&a.device_id, a.ts_micro).cmp(&(&b.device_id, b.ts_micro)));
    zoned
}

/// Merge one device's time-sorted sightings in one zone into sessions: a
/// new session starts whenever the gap to the previous sighting strictly
/// exceeds `gap_micro` (a gap equal to the limit stays in the session).
pub fn sessionize(
    device_id: &DeviceId,
    zone_id: &ZoneId,
    ts_micro: &[u64],
    gap_micro: u64,
) -> Result<Vec<PresenceSession>, TrackerError> {
    assert!(gap_micro > 0, "gap must be positive");
    let mut sessions = Vec::new();
    let mut current: Option<(u64, u64, u64)> = None; // (start, end, count)
    for (index, &ts) in ts_micro.iter().enumerate() {
        match current {
            None => current = Some((ts, ts, 1)),
            Some((start, end, count)) => {
                if ts < end {
                    return Err(TrackerError::UnsortedInput { index });
                }
                if ts - end > gap_micro {
                    sessions.push((start, end, count));
                    current = Some((ts, ts, 1));
                } else {
                    current = Some((start, ts, count + 1));
                }
            }
        }
    }
    sessions.extend(current);
    Ok(sessions
        .into_iter()
        .map(|(start_micro, end_micro, sighting_count)| PresenceSession {
            device_id: device_id.clone(),
            zone_id: zone_id.clone(),
            start_micro,
            end_micro,
            sighting_count,
        })
        .collect())
}

/// Aggregate one device's sessions (selected out of `sessions`) into a
/// [`DeviceRecord`]. A device with no sessions is unknown.
pub fn device_summary(
    device_id: &DeviceId,
    sessions: &[PresenceSession],
) -> Result<DeviceRecord, TrackerError> {
    let mut record: Option<DeviceRecord> = None;
    for session in sessions.iter().filter(|s| &s.device_id == device_id) {
        match &mut record {
            None => {
                record = Some(DeviceRecord {
                    device_id: device_id.clone(),
                    first_seen_micro: session.start_micro,
                    last_seen_micro: session.end_micro,
                    visit_count: 1,
                    zones_visited: [session.zone_id.clone()].into(),
                });
            }
            Some(r) => {
                r.first_seen_micro = r.first_seen_micro.min(session.start_micro);
                r.last_seen_micro = r.last_seen_micro.max(session.end_micro);
                r.visit_count += 1;
                r.zones_visited.insert(session.zone_id.clone());
            }
        }
    }
    record.ok_or_else(|| TrackerError::UnknownDevice(device_id.clone()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::codec::{serialize_probe_request, ProbeRequestFrame, Ssid};

    fn sensors() -> SensorMap {
        SensorMap::new([("s1", "zone_a"), ("s2", "zone_b")]).unwrap()
    }

    fn probe_record(sa: MacAddress, ts_micro: u64) -> CaptureRecord {
        let frame = ProbeRequestFrame {
            sa,
            da: MacAddress::BROADCAST,
            bssid: MacAddress::BROADCAST,
            seq: 7,
            frag: 0,
            ssid: Ssid::Wildcard,
            supported_rates: vec![0x02, 0x04],
            rssi_dbm: None,
        };
        CaptureRecord {
            ts_micro,
            link_type: LinkType::Ieee80211Bare,
            payload: serialize_probe_request(&frame),
        }
    }

    fn sighting(device: &str, sensor: &str, ts_micro: u64, rssi_dbm: Option<i8>) -> Sighting {
        Sighting {
            device_id: DeviceId::from_raw(device),
            sensor_id: sensor.to_string(),
            ts_micro,
            rssi_dbm,
            kind: SightingKind::WifiProbe,
            attrs: None,
        }
    }

    #[test]
    fn probe_frame_becomes_wifi_sighting() {
        let mut tracker = Tracker::new(sensors(), TrackerConfig::default());
        let mac = MacAddress([0xaa, 0xbb, 0xcc, 0xdd, 0xee, 0xff]);
        let sighting = tracker.ingest(&probe_record(mac, 5), "s1").unwrap().unwrap();
        assert_eq!(sighting.device_id.as_str(), "aa:bb:cc:dd:ee:ff");
        assert_eq!(sighting.sensor_id, "s1");
        assert_eq!(sighting.kind, SightingKind::WifiProbe);
        assert_eq!(tracker.dropped(), 0);
    }

    #[test]
    fn ibeacon_identity_wins_over_advertiser_address() {
        let mut payload = vec![0x55, 0x44, 0x33, 0x22, 0x11, 0xc0];
        payload.extend_from_slice(&[0x1a, 0xff, 0x4c, 0x00, 0x02, 0x15]);
        payload.extend_from_slice(&[0x11; 16]);
        payload.extend_from_slice(&[0x00, 0x01, 0x00, 0x02, 0xc5]);
        let record = CaptureRecord { ts_micro: 0, link_type: LinkType::BleAdv, payload };

        let mut tracker = Tracker::new(sensors(), TrackerConfig::default());
        let sighting = tracker.ingest(&record, "s1").unwrap().unwrap();
        assert_eq!(
            sighting.device_id.as_str(),
            "11111111111111111111111111111111:1:2"
        );
        assert_eq!(sighting.kind, SightingKind::BleAdv);
    }

    #[test]
    fn non_probe_frames_are_dropped_and_counted() {
        let mut tracker = Tracker::new(sensors(), TrackerConfig::default());
        let record = CaptureRecord {
            ts_micro: 0,
            link_type: LinkType::Ieee80211Bare,
            payload: vec![0x80, 0x00, 0x00, 0x00], // beacon subtype
        };
        assert_eq!(tracker.ingest(&record, "s1").unwrap(), None);
        assert_eq!(tracker.dropped(), 1);
        assert!(tracker.sightings().is_empty());
    }

    #[test]
    fn unknown_sensor_is_an_error() {
        let mut tracker = Tracker::new(sensors(), TrackerConfig::default());
        let mac = MacAddress([2, 0, 0, 0, 0, 1]);
        assert_eq!(
            tracker.ingest(&probe_record(mac, 0), "nope"),
            Err(TrackerError::UnknownSensor("nope".into()))
        );
    }

    #[test]
    fn radiotap_rssi_reaches_the_sighting() {
        let mac = MacAddress([2, 0, 0, 0, 0, 9]);
        let bare = probe_record(mac, 3).payload;
        let mut payload = vec![0x00, 0x00, 0x09, 0x00, 0x20, 0x00, 0x00, 0x00, 0xc4];
        payload.extend_from_slice(&bare);
        let record = CaptureRecord { ts_micro: 3, link_type: LinkType::Ieee80211Radiotap, payload };

        let mut tracker = Tracker::new(sensors(), TrackerConfig::default());
        let sighting = tracker.ingest(&record, "s2").unwrap().unwrap();
        assert_eq!(sighting.rssi_dbm, Some(-60));
    }

    #[test]
    fn strongest_signal_picks_the_zone() {
        let sightings = vec![
            sighting("x", "s1", 1_000_000, Some(-50)),
            sighting("x", "s2", 2_000_000, Some(-70)),
        ];
        let zoned = assign_zones(&sightings, &sensors(), DEFAULT_EPOCH_MICRO);
        assert!(zoned.iter().all(|z| z.zone_id == "zone_a"));
        assert_eq!(zoned.len(), 2);
    }

    #[test]
    fn equal_signal_ties_break_to_smaller_sensor_id() {
        let sightings = vec![
            sighting("x", "s2", 0, Some(-60)),
            sighting("x", "s1", 1, Some(-60)),
        ];
        let zoned = assign_zones(&sightings, &sensors(), DEFAULT_EPOCH_MICRO);
        assert!(zoned.iter().all(|z| z.zone_id == "zone_a"));
    }

    #[test]
    fn missing_signal_loses_to_any_signal() {
        let sightings = vec![
            sighting("x", "s1", 0, None),
            sighting("x", "s2", 1, Some(-89)),
        ];
        let zoned = assign_zones(&sightings, &sensors(), DEFAULT_EPOCH_MICRO);
        assert!(zoned.iter().all(|z| z.zone_id == "zone_b"));
    }

    #[test]
    fn single_sensor_assigns_its_zone() {
        let map = SensorMap::new([("only", "hall")]).unwrap();
        let zoned = assign_zones(&[sighting("x", "only", 0, None)], &map, 1);
        assert_eq!(zoned[0].zone_id, "hall");
    }

    #[test]
    fn zone_assignment_is_permutation_invariant() {
        let mut sightings = vec![
            sighting("x", "s1", 0, Some(-55)),
            sighting("x", "s2", 3_000_000, Some(-51)),
            sighting("y", "s2", 1_000_000, None),
        ];
        let baseline = assign_zones(&sightings, &sensors(), DEFAULT_EPOCH_MICRO);
        sightings.reverse();
        assert_eq!(assign_zones(&sightings, &sensors(), DEFAULT_EPOCH_MICRO), baseline);
    }

    #[test]
    fn sessionize_boundary_is_inclusive() {
        let device = DeviceId::from_raw("x");
        let zone: ZoneId = "a".into();
        let gap = 300_000_000;

        let one = sessionize(&device, &zone, &[0, 30_000_000, 60_000_000], gap).unwrap();
        assert_eq!(one.len(), 1);
        assert_eq!((one[0].start_micro, one[0].end_micro, one[0].sighting_count), (0, 60_000_000, 3));

        let two = sessionize(&device, &zone, &[0, 400_000_000], gap).unwrap();
        assert_eq!(two.len(), 2);

        let boundary = sessionize(&device, &zone, &[0, 300_000_000], gap).unwrap();
        assert_eq!(boundary.len(), 1);
    }

    #[test]
    fn sessionize_rejects_unsorted_input() {
        let device = DeviceId::from_raw("x");
        let zone: ZoneId = "a".into();
        assert_eq!(
            sessionize(&device, &zone, &[10, 5], 100),
            Err(TrackerError::UnsortedInput { index: 1 })
        );
    }

    #[test]
    fn device_summary_aggregates_sessions() {
        let device = DeviceId::from_raw("x");
        let session = |zone: &str, start: u64, end: u64| PresenceSession {
            device_id: device.clone(),
            zone_id: zone.into(),
            start_micro: start,
            end_micro: end,
            sighting_count: 1,
        };
        let sessions = vec![session("a", 0, 10), session("b", 20, 30), session("a", 50, 60)];
        let record = device_summary(&device, &sessions).unwrap();
        assert_eq!(record.visit_count, 3);
        assert_eq!(record.first_seen_micro, 0);
        assert_eq!(record.last_seen_micro, 60);
        assert_eq!(record.zones_visited, ["a".to_string(), "b".to_string()].into());

        let single = device_summary(&device, &sessions[..1]).unwrap();
        assert_eq!(single.visit_count, 1);
        assert_eq!(single.zones_visited.len(), 1);

        let other = DeviceId::from_raw("y");
        assert_eq!(device_summary(&other, &sessions), Err(TrackerError::UnknownDevice(other.clone())));
    }

    #[test]
    fn degenerate_single_sighting_session() {
        let device = DeviceId::from_raw("x");
        let zone: ZoneId = "a".into();
        let sessions = sessionize(&device, &zone, &[42], 100).unwrap();
        assert_eq!(sessions[0].start_micro, sessions[0].end_micro);
        let record = device_summary(&device, &sessions).unwrap();
        assert_eq!(record.first_seen_micro, record.last_seen_micro);
    }

    #[test]
    fn cross_epoch_reordering_is_rejected_at_ingest() {
        let mut tracker = Tracker::new(sensors(), TrackerConfig::default());
        tracker.ingest_sighting(sighting("x", "s1", 25_000_000, None)).unwrap();
        // Same epoch (20..30 s), earlier timestamp: tolerated.
        tracker.ingest_sighting(sighting("x", "s1", 21_000_000, None)).unwrap();
        // Earlier epoch: rejected.
        assert!(matches!(
            tracker.ingest_sighting(sighting("x", "s1", 9_000_000, None)),
            Err(TrackerError::UnsortedInput { .. })
        ));
    }

    #[test]
    fn hashing_changes_ids_but_not_session_structure() {
        let trace: Vec<Sighting> = (0..20)
            .map(|i| sighting(if i % 2 == 0 { "x" } else { "y" }, "s1", i * 40_000_000, None))
            .collect();

        let mut plain = Tracker::new(sensors(), TrackerConfig::default());
        let mut hashed = Tracker::new(
            sensors(),
            TrackerConfig { hash_salt: Some(b"pepper".to_vec()), ..TrackerConfig::default() },
        );
        for s in &trace {
            plain.ingest_sighting(s.clone()).unwrap();
            hashed.ingest_sighting(s.clone()).unwrap();
        }

        let strip = |sessions: Vec<PresenceSession>| -> Vec<(u64, u64, u64, ZoneId)> {
            let mut v: Vec<_> = sessions
                .into_iter()
                .map(|s| (s.start_micro, s.end_micro, s.sighting_count, s.zone_id))
                .collect();
            v.sort();
            v
        };
        assert_eq!(strip(plain.sessions()), strip(hashed.sessions()));

        let plain_ids: BTreeSet<_> = plain.sightings().iter().map(|s| s.device_id.clone()).collect();
        let hashed_ids: BTreeSet<_> = hashed.sightings().iter().map(|s| s.device_id.clone()).collect();
        assert_eq!(plain_ids.len(), hashed_ids.len());
        assert!(plain_ids.is_disjoint(&hashed_ids));
        assert!(hashed_ids.iter().all(|id| id.as_str().len() == 32));
    }

    #[test]
    fn hashed_ids_are_stable_per_salt() {
        let a = DeviceId::hashed("aa:bb:cc:dd:ee:ff", b"salt-1");
        let b = DeviceId::hashed("aa:bb:cc:dd:ee:ff", b"salt-1");
        let c = DeviceId::hashed("aa:bb:cc:dd:ee:ff", b"salt-2");
        assert_eq!(a, b);
        assert_ne!(a, c);
        assert_eq!(a.as_str().len(), 32);
        assert!(a.as_str().chars().all(|ch| ch.is_ascii_hexdigit() && !ch.is_ascii_uppercase()));
    }
}
