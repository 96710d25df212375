//! Observation-mode computations over sessions and sightings: occupancy,
//! dwell, movement flows, unique-device counts, and interest profiles.
//!
//! Everything here is a pure function over immutable collections, using only
//! integer microsecond arithmetic (the dwell mean is the one derived float).
//! Conventions that matter: sessions are closed intervals, query windows are
//! half-open `[from, to)`, and occupancy counts a device in every bucket its
//! session overlaps.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use crate::tracker::{DeviceId, PresenceSession, Sighting, ZoneId};

/// Default dwell needed before a booth zone counts as an interest: long
/// enough to separate a real visit from a walk-past.
pub const DEFAULT_INTEREST_DWELL_MICRO: u64 = 120_000_000;

/// Device counts per aligned time bucket for one zone.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct OccupancySeries {
    pub zone_id: ZoneId,
    pub bucket_micro: u64,
    /// (bucket start, devices present), contiguous and aligned to
    /// `bucket_micro` multiples.
    pub counts: Vec<(u64, u64)>,
}

impl OccupancySeries {
    pub fn total(&self) -> u64 {
        self.counts.iter().map(|(_, c)| c).sum()
    }
}

/// Session-duration statistics for one zone.
#[derive(Debug, Clone, PartialEq)]
pub struct DwellStats {
    pub count: u64,
    pub total_micro: u64,
    /// Absent when there are no sessions.
    pub mean_micro: Option<f64>,
    pub max_micro: Option<u64>,
}

/// Zone-to-zone transition counts. The diagonal is structurally zero:
/// consecutive sessions in the same zone (re-entry after a gap) do not
/// count as movement.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FlowMatrix {
    /// Distinct zones, sorted.
    pub zones: Vec<ZoneId>,
    /// `counts[from][to]`, indexed like `zones`.
    pub counts: Vec<Vec<u64>>,
}

impl FlowMatrix {
    fn zone_index(&self, zone: &str) -> Option<usize> {
        self.zones.iter().position(|z| z == zone)
    }

    pub fn count(&self, from: &str, to: &str) -> Option<u64> {
        Some(self.counts[self.zone_index(from)?][self.zone_index(to)?])
    }

    pub fn total(&self) -> u64 {
        self.counts.iter().flatten().sum()
    }
}

/// Booth zones a device dwelt in long enough to call an interest.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct InterestProfile {
    pub device_id: DeviceId,
    pub interests: BTreeSet<ZoneId>,
}

/// Errors from the analytics computations.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum AnalyticsError {
    /// A device's sessions overlap in time, so its zone sequence is
    /// ill-defined.
    OverlappingSessions { device_id: DeviceId },
}

impl fmt::Display for AnalyticsError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            AnalyticsError::OverlappingSessions { device_id } => {
                write!(f, "OverlappingSessions: device {device_id}")
            }
        }
    }
}

impl std::error::Error for AnalyticsError {}

/// Devices present per bucket in one zone over `[from, to)`. A device counts
/// in every bucket its session overlaps (closed-interval overlap, so a
/// session touching only a bucket's last microsecond still counts).
pub fn occupancy(
    sessions: &[PresenceSession],
    zone_id: &str,
    bucket_micro: u64,
    from_micro: u64,
    to_micro: u64,
) -> OccupancySeries {
    assert!(bucket_micro > 0, "bucket must be positive");
    let mut counts = Vec::new();
    if to_micro > from_micro {
        let mut bucket_start = from_micro / bucket_micro * bucket_micro;
        while bucket_start < to_micro {
            let bucket_end = bucket_start.saturating_add(bucket_micro - 1);
            let devices: BTreeSet<&DeviceId> = sessions
                .iter()
                .filter(|s| {
                    s.zone_id == zone_id && s.start_micro <= bucket_end && s.end_micro >= bucket_start
                })
                .map(|s| &s.device_id)
                .collect();
            counts.push((bucket_start, devices.len() as u64));
            match bucket_start.checked_add(bucket_micro) {
                Some(next) => bucket_start = next,
                None => break,
            }
        }
    }
    OccupancySeries { zone_id: zone_id.to_string(), bucket_micro, counts }
}

/// Count, total, mean and max of session durations in one zone.
pub fn dwell_stats(sessions: &[PresenceSession], zone_id: &str) -> DwellStats {
    let mut count = 0u64;
    let mut total_micro = 0u64;
    let mut max_micro = None;
    for session in sessions.iter().filter(|s| s.zone_id == zone_id) {
        let duration = session.duration_micro();
        count += 1;
        total_micro += duration;
        max_micro = Some(max_micro.map_or(duration, |m: u64| m.max(duration)));
    }
    let mean_micro = (count > 0).then(|| total_micro as f64 / count as f64);
    DwellStats { count, total_micro, mean_micro, max_micro }
}

/// Zone-to-zone transition counts: one increment per consecutive session
/// pair of a device that changes zone. Each device's sessions must not
/// overlap in time.
pub fn flow_matrix(sessions: &[PresenceSession]) -> Result<FlowMatrix, AnalyticsError> {
    let zones: Vec<ZoneId> = sessions
        .iter()
        .map(|s| s.zone_id.clone())
        .collect::<BTreeSet<_>>()
        .into_iter()
        .collect();
    let mut counts = vec![vec![0u64; zones.len()]; zones.len()];

    let mut per_device: BTreeMap<&DeviceId, Vec<&PresenceSession>> = BTreeMap::new();
    for session in sessions {
        per_device.entry(&session.device_id).or_default().push(session);
    }
    for (device, mut device_sessions) in per_device {
        device_sessions.sort_by_key(|s| (s.start_micro, s.end_micro));
        for pair in device_sessions.windows(2) {
            if pair[1].start_micro <= pair[0].end_micro {
                return Err(AnalyticsError::OverlappingSessions { device_id: device.clone() });
            }
            if pair[0].zone_id != pair[1].zone_id {
                let from = zones.binary_search(&pair[0].zone_id).unwrap();
                let to = zones.binary_search(&pair[1].zone_id).unwrap();
                counts[from][to] += 1;
            }
        }
    }
    Ok(FlowMatrix { zones, counts })
}

/// Distinct devices with at least one sighting in the half-open window
/// `[from, to)`.
pub fn unique_devices(sightings: &[Sighting], from_micro: u64, to_micro: u64) -> usize {
    assert!(from_micro < to_micro, "window must be non-empty");
    sightings
        .iter()
        .filter(|s| s.ts_micro >= from_micro && s.ts_micro < to_micro)
        .map(|s| &s.device_id)
        .collect::<BTreeSet<_>>()
        .len()
}

/// One device's interests: booth zones where its total dwell (summed over
/// sessions) reaches the threshold.
pub fn interest_profile(
    sessions: &[PresenceSession],
    device_id: &DeviceId,
    booth_zones: &BTreeSet<ZoneId>,
    dwell_threshold_micro: u64,
) -> InterestProfile {
    assert!(dwell_threshold_micro > 0, "threshold must be positive");
    let mut dwell: BTreeMap<&ZoneId, u64> = BTreeMap::new();
    for session in sessions
        .iter()
        .filter(|s| &s.device_id == device_id && booth_zones.contains(&s.zone_id))
    {
        *dwell.entry(&session.zone_id).or_default() += session.duration_micro();
    }
    InterestProfile {
        device_id: device_id.clone(),
        interests: dwell
            .into_iter()
            .filter(|(_, total)| *total >= dwell_threshold_micro)
            .map(|(zone, _)| zone.clone())
            .collect(),
    }
}

/// Interest profiles for every device appearing in `sessions`, sorted by
/// device id. Devices without qualifying dwell get an empty profile.
pub fn interest_profiles(
    sessions: &[PresenceSession],
    booth_zones: &BTreeSet<ZoneId>,
    dwell_threshold_micro: u64,
) -> Vec<InterestProfile> {
    let devices: BTreeSet<&DeviceId> = sessions.iter().map(|s| &s.device_id).collect();
    devices
        .into_iter()
        .map(|d| interest_profile(sessions, d, booth_zones, dwell_threshold_micro))
        .collect()
}
