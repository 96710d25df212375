//! Readers and writers for the pipeline's file formats.
//!
//! Record streams (sightings, sensor maps, action logs) are line-delimited
//! JSON; configuration-style documents (scenario specs, rules, ground truth,
//! run traces) are single JSON documents.

use std::fmt;
use std::fs;
use std::io;
use std::path::Path;

use serde::de::DeserializeOwned;
use serde::Serialize;

use crate::tracker::{SensorMap, SensorMapEntry, TrackerError};

/// Errors reading or writing pipeline files.
#[derive(Debug)]
pub enum FileError {
    Io(io::Error),
    /// A document or line failed to parse; `line` is 1-based and zero for
    /// whole-document formats.
    Parse { line: usize, message: String },
    /// The file parsed but its contents are invalid (e.g. an empty sensor map).
    Invalid(String),
}

impl fmt::Display for FileError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            FileError::Io(e) => write!(f, "{e}"),
            FileError::Parse { line: 0, message } => write!(f, "parse error: {message}"),
            FileError::Parse { line, message } => write!(f, "parse error on line {line}: {message}"),
            FileError::Invalid(message) => write!(f, "{message}"),
        }
    }
}

impl std::error::Error for FileError {}

impl From<io::Error> for FileError {
    fn from(e: io::Error) -> Self {
        FileError::Io(e)
    }
}

/// Write one JSON document per line.
pub fn write_jsonl<T: Serialize>(path: &Path, items: &[T]) -> Result<(), FileError> {
    let mut out = String::new();
    for item in items {
        out.push_str(&serde_json::to_string(item).expect("serializable record"));
        out.push('\n');
    }
    fs::write(path, out)?;
    Ok(())
}

/// Read one JSON document per line, skipping blank lines.
pub fn read_jsonl<T: DeserializeOwned>(path: &Path) -> Result<Vec<T>, FileError> {
    let text = fs::read_to_string(path)?;
    let mut items = Vec::new();
    for (index, line) in text.lines().enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        let item = serde_json::from_str(line)
            .map_err(|e| FileError::Parse { line: index + 1, message: e.to_string() })?;
        items.push(item);
    }
    Ok(items)
}

/// Write a pretty-printed JSON document.
pub fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<(), FileError> {
    let mut text = serde_json::to_string_pretty(value).expect("serializable document");
    text.push('\n');
    fs::write(path, text)?;
    Ok(())
}

/// Read a single JSON document.
pub fn read_json<T: DeserializeOwned>(path: &Path) -> Result<T, FileError> {
    let text = fs::read_to_string(path)?;
    serde_json::from_str(&text).map_err(|e| FileError::Parse { line: 0, message: e.to_string() })
}

/// Load a sensor map from its line-delimited file.
pub fn load_sensor_map(path: &Path) -> Result<SensorMap, FileError> {
    let entries: Vec<SensorMapEntry> = read_jsonl(path)?;
    SensorMap::new(entries.into_iter().map(|e| (e.sensor_id, e.zone_id))).map_err(|e| match e {
        TrackerError::EmptySensorMap => FileError::Invalid("sensor map file has no sensors".into()),
        other => FileError::Invalid(other.to_string()),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::tracker::{DeviceId, Sighting, SightingKind};

    #[test]
    fn jsonl_round_trip_preserves_sightings() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("sightings.jsonl");
        let sightings = vec![
            Sighting {
                device_id: DeviceId::from_raw("aa:bb:cc:dd:ee:ff"),
                sensor_id: "s1".into(),
                ts_micro: 42,
                rssi_dbm: Some(-50),
                kind: SightingKind::WifiProbe,
                attrs: None,
            },
            Sighting::active_announce(
                DeviceId::from_raw("x"),
                "s2",
                100,
                [("k".to_string(), "v".to_string())].into(),
            ),
        ];
        write_jsonl(&path, &sightings).unwrap();
        let back: Vec<Sighting> = read_jsonl(&path).unwrap();
        assert_eq!(back, sightings);

        // Nullable fields are written explicitly.
        let text = std::fs::read_to_string(&path).unwrap();
        assert!(text.lines().next().unwrap().contains("\"attrs\":null"));
    }

    #[test]
    fn jsonl_reports_the_failing_line() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("bad.jsonl");
        std::fs::write(&path, "{\"sensor_id\":\"s\",\"zone_id\":\"z\"}\nnot json\n").unwrap();
        match read_jsonl::<SensorMapEntry>(&path) {
            Err(FileError::Parse { line, .. }) => assert_eq!(line, 2),
            other => panic!("expected parse error, got {other:?}"),
        }
    }

    #[test]
    fn sensor_map_loads_and_rejects_empty() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("sensors.jsonl");
        std::fs::write(&path, "{\"sensor_id\":\"s1\",\"zone_id\":\"a\"}\n").unwrap();
        let map = load_sensor_map(&path).unwrap();
        assert_eq!(map.zone_of("s1").unwrap(), "a");

        std::fs::write(&path, "").unwrap();
        assert!(matches!(load_sensor_map(&path), Err(FileError::Invalid(_))));
    }
}
