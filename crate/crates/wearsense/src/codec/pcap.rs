//! Classic pcap capture files (the original libpcap/tcpdump format).
//!
//! Layout: a 24-byte global header (magic `0xa1b2c3d4`, version 2.4,
//! thiszone, sigfigs, snaplen, network) followed by records, each with a
//! 16-byte header (ts_sec, ts_usec, incl_len, orig_len). The byte order of
//! every multi-byte field is given by which magic variant appears first:
//! `0xa1b2c3d4` read in little-endian means a little-endian file,
//! `0xd4c3b2a1` means the opposite order. Reading accepts both orders;
//! writing always produces little-endian files.

use std::fmt;

/// The pcap magic number in file order.
pub const PCAP_MAGIC: u32 = 0xa1b2_c3d4;
/// The magic as it reads when the file uses the opposite byte order.
pub const PCAP_MAGIC_SWAPPED: u32 = 0xd4c3_b2a1;

const GLOBAL_HEADER_LEN: usize = 24;
const RECORD_HEADER_LEN: usize = 16;

/// Largest payload a single record may carry (the format's snap ceiling).
pub const MAX_RECORD_LEN: usize = 65_535;

/// Link-layer framing of a capture, from the global header's network field.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum LinkType {
    /// 105 — bare 802.11 frames.
    Ieee80211Bare,
    /// 127 — 802.11 frames prefixed with a radiotap header.
    Ieee80211Radiotap,
    /// 251 — BLE link-layer advertising PDUs.
    BleAdv,
}

impl LinkType {
    pub fn from_network(value: u32) -> Option<Self> {
        match value {
            105 => Some(LinkType::Ieee80211Bare),
            127 => Some(LinkType::Ieee80211Radiotap),
            251 => Some(LinkType::BleAdv),
            _ => None,
        }
    }

    pub fn network(self) -> u32 {
        match self {
            LinkType::Ieee80211Bare => 105,
            LinkType::Ieee80211Radiotap => 127,
            LinkType::BleAdv => 251,
        }
    }
}

/// One captured frame: a timestamp, the file's link framing and the payload
/// bytes. Payloads never exceed [`MAX_RECORD_LEN`].
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CaptureRecord {
    /// Capture time in microseconds since the epoch.
    pub ts_micro: u64,
    pub link_type: LinkType,
    pub payload: Vec<u8>,
}

/// Errors reading a pcap file.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum PcapError {
    /// The input does not begin with a pcap magic number.
    BadMagic,
    /// A record header or payload runs past the end of the input. Records
    /// decoded before the cut are preserved in the error.
    Truncated { records: Vec<CaptureRecord> },
    /// The global header names a link type this codec does not handle.
    UnsupportedLinkType(u32),
}

impl fmt::Display for PcapError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            PcapError::BadMagic => write!(f, "BadMagic: input is not a pcap capture"),
            PcapError::Truncated { records } => write!(
                f,
                "Truncated: capture cut short after {} complete record(s)",
                records.len()
            ),
            PcapError::UnsupportedLinkType(n) => {
                write!(f, "UnsupportedLinkType: network value {n}")
            }
        }
    }
}

impl std::error::Error for PcapError {}

#[derive(Clone, Copy)]
enum ByteOrder {
    Little,
    Big,
}

impl ByteOrder {
    fn read_u32(self, bytes: &[u8], offset: usize) -> u32 {
        let b: [u8; 4] = bytes[offset..offset + 4].try_into().unwrap();
        match self {
            ByteOrder::Little => u32::from_le_bytes(b),
            ByteOrder::Big => u32::from_be_bytes(b),
        }
    }
}

/// Parse an entire pcap file into its records, in file order.
///
/// A file cut mid-record yields [`PcapError::Truncated`] carrying every
/// record that was complete before the cut.
pub fn parse_pcap(bytes: &[u8]) -> Result<Vec<CaptureRecord>, PcapError> {
    if bytes.len() < 4 {
        return Err(PcapError::BadMagic);
    }
    let magic = u32::from_le_bytes(bytes[0..4].try_into().unwrap());
    let order = match magic {
        PCAP_MAGIC => ByteOrder::Little,
        PCAP_MAGIC_SWAPPED => ByteOrder::Big,
        _ => return Err(PcapError::BadMagic),
    };
    if bytes.len() < GLOBAL_HEADER_LEN {
        return Err(PcapError::Truncated { records: Vec::new() });
    }
    let network = order.read_u32(bytes, 20);
    let link_type =
        LinkType::from_network(network).ok_or(PcapError::UnsupportedLinkType(network))?;

    let mut records = Vec::new();
    let mut offset = GLOBAL_HEADER_LEN;
    while offset < bytes.len() {
        if offset + RECORD_HEADER_LEN > bytes.len() {
            return Err(PcapError::Truncated { records });
        }
        let ts_sec = order.read_u32(bytes, offset);
        let ts_usec = order.read_u32(bytes, offset + 4);
        let incl_len = order.read_u32(bytes, offset + 8) as usize;
        // orig_len at offset + 12 is informational only.
        if incl_len > MAX_RECORD_LEN || offset + RECORD_HEADER_LEN + incl_len > bytes.len() {
            return Err(PcapError::Truncated { records });
        }
        let start = offset + RECORD_HEADER_LEN;
        records.push(CaptureRecord {
            ts_micro: u64::from(ts_sec) * 1_000_000 + u64::from(ts_usec),
            link_type,
            payload: bytes[start..start + incl_len].to_vec(),
        });
        offset = start + incl_len;
    }
    Ok(records)
}

/// Serialize records into a little-endian pcap file with the given link type.
///
/// Record `link_type` fields are not consulted; the file-level link type
/// applies to every record.
pub fn write_pcap(link_type: LinkType, records: &[CaptureRecord]) -> Vec<u8> {
    let mut out = Vec::with_capacity(
        GLOBAL_HEADER_LEN + records.iter().map(|r| RECORD_HEADER_LEN + r.payload.len()).sum::<usize>(),
    );
    out.extend_from_slice(&PCAP_MAGIC.to_le_bytes());
    out.extend_from_slice(&2u16.to_le_bytes()); // version major
    out.extend_from_slice(&4u16.to_le_bytes()); // version minor
    out.extend_from_slice(&0i32.to_le_bytes()); // thiszone
    out.extend_from_slice(&0u32.to_le_bytes()); // sigfigs
    out.extend_from_slice(&(MAX_RECORD_LEN as u32).to_le_bytes()); // snaplen
    out.extend_from_slice(&link_type.network().to_le_bytes());
    for record in records {
        debug_assert!(record.payload.len() <= MAX_RECORD_LEN);
        let ts_sec = (record.ts_micro / 1_000_000) as u32;
        let ts_usec = (record.ts_micro % 1_000_000) as u32;
        let len = record.payload.len() as u32;
        out.extend_from_slice(&ts_sec.to_le_bytes());
        out.extend_from_slice(&ts_usec.to_le_bytes());
        out.extend_from_slice(&len.to_le_bytes());
        out.extend_from_slice(&len.to_le_bytes());
        out.extend_from_slice(&record.payload);
    }
    out
}
