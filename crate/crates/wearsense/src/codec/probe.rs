//! 802.11 probe-request frames (management type 0, subtype 4).
//!
//! Probe requests are the emissions that make passive Wi-Fi presence
//! sensing work: an idle station broadcasts them periodically to discover
//! access points, and the transmitter address identifies the device.
//!
//! Fixed layout: bytes 0–1 frame control (`0x40 0x00`), 2–3 duration,
//! 4–9 DA, 10–15 SA, 16–21 BSSID, 22–23 sequence control (little-endian,
//! fragment in the low 4 bits, sequence in the high 12), then tagged
//! information elements (id byte, length byte, payload).

use std::fmt;

use super::mac::MacAddress;

/// First frame-control byte of a probe request.
pub const FRAME_CONTROL_PROBE_REQ: u8 = 0x40;
/// Management header length up to the first information element.
pub const MGMT_HEADER_LEN: usize = 24;
/// Longest SSID the SSID element may carry.
pub const MAX_SSID_LEN: usize = 32;

const ELEMENT_SSID: u8 = 0;
const ELEMENT_SUPPORTED_RATES: u8 = 1;

/// SSID solicited by a probe request.
///
/// A zero-length SSID element is the wildcard probe ("any network"); a named
/// SSID is 1..=32 bytes of UTF-8. `Named` with an empty string is not
/// representable on the wire (it would decode as `Wildcard`).
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Ssid {
    Wildcard,
    Named(String),
}

/// A parsed probe request.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ProbeRequestFrame {
    /// Transmitter address — the device identity.
    pub sa: MacAddress,
    pub da: MacAddress,
    pub bssid: MacAddress,
    /// Sequence number, 0..4096.
    pub seq: u16,
    /// Fragment number, 0..16.
    pub frag: u8,
    pub ssid: Ssid,
    /// Raw supported-rates element payload, kept opaque.
    pub supported_rates: Vec<u8>,
    /// Signal strength reported by capture hardware. Carried by the radiotap
    /// header, never by the frame itself; serialization ignores it.
    pub rssi_dbm: Option<i8>,
}

/// Errors parsing a probe-request frame body.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Dot11Error {
    /// First frame-control byte was not `0x40`.
    FrameTypeMismatch(u8),
    /// Shorter than the management header, or an element overran the buffer.
    Truncated,
    /// SSID element longer than 32 bytes.
    SsidTooLong(usize),
}

impl fmt::Display for Dot11Error {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Dot11Error::FrameTypeMismatch(b) => {
                write!(f, "FrameTypeMismatch: frame control byte {b:#04x}")
            }
            Dot11Error::Truncated => write!(f, "Truncated: frame body cut short"),
            Dot11Error::SsidTooLong(n) => write!(f, "SsidTooLong: {n} bytes"),
        }
    }
}

impl std::error::Error for Dot11Error {}

fn read_mac(bytes: &[u8], offset: usize) -> MacAddress {
    MacAddress(bytes[offset..offset + 6].try_into().unwrap())
}

/// Parse a bare 802.11 probe-request frame body (radiotap already stripped).
///
/// Unknown information elements are skipped by their length byte; real probe
/// requests carry vendor elements. The first SSID and supported-rates
/// elements win if duplicated.
pub fn parse_probe_request(bytes: &[u8]) -> Result<ProbeRequestFrame, Dot11Error> {
    if bytes.is_empty() {
        return Err(Dot11Error::Truncated);
    }
    if bytes[0] != FRAME_CONTROL_PROBE_REQ {
        return Err(Dot11Error::FrameTypeMismatch(bytes[0]));
    }
    if bytes.len() < MGMT_HEADER_LEN {
        return Err(Dot11Error::Truncated);
    }

    let da = read_mac(bytes, 4);
    let sa = read_mac(bytes, 10);
    let bssid = read_mac(bytes, 16);
    let seq_ctl = u16::from_le_bytes([bytes[22], bytes[23]]);
    let frag = (seq_ctl & 0x000f) as u8;
    let seq = seq_ctl >> 4;

    let mut ssid = None;
    let mut supported_rates = None;
    let mut offset = MGMT_HEADER_LEN;
    while offset < bytes.len() {
        if offset + 2 > bytes.len() {
            return Err(Dot11Error::Truncated);
        }
        let id = bytes[offset];
        let len = bytes[offset + 1] as usize;
        let start = offset + 2;
        if start + len > bytes.len() {
            return Err(Dot11Error::Truncated);
        }
        let data = &bytes[start..start + len];
        match id {
            ELEMENT_SSID if ssid.is_none() => {
                if len > MAX_SSID_LEN {
                    return Err(Dot11Error::SsidTooLong(len));
                }
                ssid = Some(if len == 0 {
                    Ssid::Wildcard
                } else {
                    Ssid::Named(String::from_utf8_lossy(data).into_owned())
                });
            }
            ELEMENT_SUPPORTED_RATES if supported_rates.is_none() => {
                supported_rates = Some(data.to_vec());
            }
            _ => {}
        }
        offset = start + len;
    }

    Ok(ProbeRequestFrame {
        sa,
        da,
        bssid,
        seq,
        frag,
        ssid: ssid.unwrap_or(Ssid::Wildcard),
        supported_rates: supported_rates.unwrap_or_default(),
        rssi_dbm: None,
    })
}

/// Serialize a probe request to the exact layout accepted by
/// [`parse_probe_request`]. `rssi_dbm` is not written (it belongs to the
/// capture metadata, not the frame).
pub fn serialize_probe_request(frame: &ProbeRequestFrame) -> Vec<u8> {
    debug_assert!(frame.seq < 4096);
    debug_assert!(frame.frag < 16);
    let ssid_bytes: &[u8] = match &frame.ssid {
        Ssid::Wildcard => &[],
        Ssid::Named(name) => {
            debug_assert!(!name.is_empty() && name.len() <= MAX_SSID_LEN);
            name.as_bytes()
        }
    };
    let mut out = Vec::with_capacity(MGMT_HEADER_LEN + 4 + ssid_bytes.len() + frame.supported_rates.len());
    out.push(FRAME_CONTROL_PROBE_REQ);
    out.push(0x00);
    out.extend_from_slice(&[0x00, 0x00]); // duration
    out.extend_from_slice(&frame.da.octets());
    out.extend_from_slice(&frame.sa.octets());
    out.extend_from_slice(&frame.bssid.octets());
    out.extend_from_slice(&((frame.seq << 4) | u16::from(frame.frag)).to_le_bytes());
    out.push(ELEMENT_SSID);
    out.push(ssid_bytes.len() as u8);
    out.extend_from_slice(ssid_bytes);
    out.push(ELEMENT_SUPPORTED_RATES);
    out.push(frame.supported_rates.len() as u8);
    out.extend_from_slice(&frame.supported_rates);
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    /// Wildcard probe from aa:bb:cc:dd:ee:ff, seq 1, rates 1/2/5.5/11 Mbps.
    fn sample_frame_bytes() -> Vec<u8> {
        let mut bytes = vec![0x40, 0x00, 0x00, 0x00];
        bytes.extend_from_slice(&[0xff; 6]); // DA
        bytes.extend_from_slice(&[0xaa, 0xbb, 0xcc, 0xdd, 0xee, 0xff]); // SA
        bytes.extend_from_slice(&[0xff; 6]); // BSSID
        bytes.extend_from_slice(&[0x10, 0x00]); // seq 1, frag 0
        bytes.extend_from_slice(&[0x00, 0x00]); // wildcard SSID
        bytes.extend_from_slice(&[0x01, 0x04, 0x02, 0x04, 0x0b, 0x16]);
        bytes
    }

    #[test]
    fn parses_wildcard_probe() {
        let frame = parse_probe_request(&sample_frame_bytes()).unwrap();
        assert_eq!(frame.sa.to_string(), "aa:bb:cc:dd:ee:ff");
        assert_eq!(frame.da, MacAddress::BROADCAST);
        assert_eq!(frame.seq, 1);
        assert_eq!(frame.frag, 0);
        assert_eq!(frame.ssid, Ssid::Wildcard);
        assert_eq!(frame.supported_rates, vec![0x02, 0x04, 0x0b, 0x16]);
        assert_eq!(frame.rssi_dbm, None);
    }

    #[test]
    fn parses_named_ssid() {
        let mut bytes = sample_frame_bytes();
        // Replace the wildcard SSID element with "abc".
        bytes.splice(24..26, [0x00, 0x03, 0x61, 0x62, 0x63]);
        let frame = parse_probe_request(&bytes).unwrap();
        assert_eq!(frame.ssid, Ssid::Named("abc".into()));
    }

    #[test]
    fn beacon_subtype_is_rejected() {
        let mut bytes = sample_frame_bytes();
        bytes[0] = 0x80;
        assert_eq!(
            parse_probe_request(&bytes),
            Err(Dot11Error::FrameTypeMismatch(0x80))
        );
    }

    #[test]
    fn element_overrun_is_truncated() {
        let mut bytes = sample_frame_bytes();
        bytes.extend_from_slice(&[0xdd, 0x20]); // vendor element claiming 32 bytes
        assert_eq!(parse_probe_request(&bytes), Err(Dot11Error::Truncated));
    }

    #[test]
    fn oversized_ssid_is_rejected() {
        let mut bytes = sample_frame_bytes()[..24].to_vec();
        bytes.push(0x00);
        bytes.push(33);
        bytes.extend_from_slice(&[b'x'; 33]);
        assert_eq!(parse_probe_request(&bytes), Err(Dot11Error::SsidTooLong(33)));
    }

    #[test]
    fn unknown_elements_are_skipped() {
        let mut bytes = sample_frame_bytes();
        bytes.extend_from_slice(&[0xdd, 0x03, 0x00, 0x50, 0xf2]); // vendor element
        let frame = parse_probe_request(&bytes).unwrap();
        assert_eq!(frame.supported_rates, vec![0x02, 0x04, 0x0b, 0x16]);
    }

    #[test]
    fn serialization_matches_hand_encoding() {
        let frame = parse_probe_request(&sample_frame_bytes()).unwrap();
        assert_eq!(serialize_probe_request(&frame), sample_frame_bytes());
    }

    #[test]
    fn wildcard_ssid_serializes_as_empty_element() {
        let frame = ProbeRequestFrame {
            sa: MacAddress([2, 0, 0, 0, 0, 1]),
            da: MacAddress::BROADCAST,
            bssid: MacAddress::BROADCAST,
            seq: 0,
            frag: 0,
            ssid: Ssid::Wildcard,
            supported_rates: vec![],
            rssi_dbm: None,
        };
        let bytes = serialize_probe_request(&frame);
        assert_eq!(&bytes[24..26], &[0x00, 0x00]);
    }

    #[test]
    fn sequence_control_boundary() {
        let frame = ProbeRequestFrame {
            sa: MacAddress([2, 0, 0, 0, 0, 1]),
            da: MacAddress::BROADCAST,
            bssid: MacAddress::BROADCAST,
            seq: 4095,
            frag: 15,
            ssid: Ssid::Wildcard,
            supported_rates: vec![],
            rssi_dbm: None,
        };
        let bytes = serialize_probe_request(&frame);
        assert_eq!(&bytes[22..24], &[0xff, 0xff]);
        let back = parse_probe_request(&bytes).unwrap();
        assert_eq!(back.seq, 4095);
        assert_eq!(back.frag, 15);
    }
}
