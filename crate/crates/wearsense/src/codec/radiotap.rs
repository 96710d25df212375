//! Radiotap capture metadata headers.
//!
//! Radiotap prefixes each captured 802.11 frame with hardware metadata. The
//! only datum the presence pipeline needs is the antenna signal (RSSI), so
//! this parser walks just the leading fields — TSFT, flags, rate, channel,
//! FHSS, dBm antenna signal — and then skips to the encapsulated frame via
//! the declared header length. Fields past the antenna signal are never
//! walked; their presence bits do not affect the result because radiotap
//! lays fields out in ascending bit order.

use std::fmt;

/// Extract of a radiotap header: the antenna signal (if present) and the
/// offset where the encapsulated 802.11 frame begins.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Radiotap {
    pub rssi_dbm: Option<i8>,
    pub body_offset: usize,
}

/// Errors reading a radiotap header.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RadiotapError {
    /// Header version byte was not zero.
    BadVersion(u8),
    /// The header (fixed prologue, present-word chain or declared length)
    /// does not fit the buffer.
    LenOverrun { needed: usize, available: usize },
}

impl fmt::Display for RadiotapError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            RadiotapError::BadVersion(v) => write!(f, "BadVersion: radiotap version {v}"),
            RadiotapError::LenOverrun { needed, available } => {
                write!(f, "LenOverrun: header needs {needed} bytes, buffer has {available}")
            }
        }
    }
}

impl std::error::Error for RadiotapError {}

/// (present bit, field size, field alignment) for the fields walked, in the
/// order they appear in the header.
const FIELDS: [(u32, usize, usize); 6] = [
    (0, 8, 8), // TSFT
    (1, 1, 1), // flags
    (2, 1, 1), // rate
    (3, 4, 2), // channel (freq u16 + flags u16)
    (4, 2, 1), // FHSS
    (5, 1, 1), // dBm antenna signal (signed)
];

const RSSI_BIT: u32 = 5;
const EXT_BIT: u32 = 31;

fn align_up(offset: usize, align: usize) -> usize {
    (offset + align - 1) & !(align - 1)
}

/// Parse a radiotap header, returning the RSSI (when the antenna-signal
/// field is present and reachable) and the declared body offset.
pub fn parse_radiotap(bytes: &[u8]) -> Result<Radiotap, RadiotapError> {
    if bytes.len() < 8 {
        return Err(RadiotapError::LenOverrun { needed: 8, available: bytes.len() });
    }
    let version = bytes[0];
    if version != 0 {
        return Err(RadiotapError::BadVersion(version));
    }
    let declared = u16::from_le_bytes([bytes[2], bytes[3]]) as usize;
    if declared < 8 {
        return Err(RadiotapError::LenOverrun { needed: 8, available: declared });
    }
    if declared > bytes.len() {
        return Err(RadiotapError::LenOverrun { needed: declared, available: bytes.len() });
    }

    // Present words chain while bit 31 is set; fields start after the chain.
    let first_present = u32::from_le_bytes(bytes[4..8].try_into().unwrap());
    let mut words = 1usize;
    let mut last = first_present;
    while last & (1 << EXT_BIT) != 0 {
        let start = 4 + words * 4;
        if start + 4 > declared {
            return Err(RadiotapError::LenOverrun { needed: start + 4, available: declared });
        }
        last = u32::from_le_bytes(bytes[start..start + 4].try_into().unwrap());
        words += 1;
    }

    let mut offset = 4 + words * 4;
    let mut rssi_dbm = None;
    for (bit, size, align) in FIELDS {
        if first_present & (1 << bit) == 0 {
            continue;
        }
        offset = align_up(offset, align);
        if offset + size > declared {
            break; // field region exhausted; keep whatever was extracted
        }
        if bit == RSSI_BIT {
            rssi_dbm = Some(bytes[offset] as i8);
        }
        offset += size;
    }

    Ok(Radiotap { rssi_dbm, body_offset: declared })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn antenna_signal_only() {
        // version 0, pad, len 9, present = bit 5, then one signed byte.
        let bytes = [0x00, 0x00, 0x09, 0x00, 0x20, 0x00, 0x00, 0x00, 0xc4];
        let rt = parse_radiotap(&bytes).unwrap();
        assert_eq!(rt.rssi_dbm, Some(-60));
        assert_eq!(rt.body_offset, 9);
    }

    #[test]
    fn empty_present_bitmap() {
        let bytes = [0x00, 0x00, 0x08, 0x00, 0x00, 0x00, 0x00, 0x00];
        let rt = parse_radiotap(&bytes).unwrap();
        assert_eq!(rt.rssi_dbm, None);
        assert_eq!(rt.body_offset, 8);
    }

    #[test]
    fn nonzero_version_is_rejected() {
        let bytes = [0x01, 0x00, 0x08, 0x00, 0x00, 0x00, 0x00, 0x00];
        assert_eq!(parse_radiotap(&bytes), Err(RadiotapError::BadVersion(1)));
    }

    #[test]
    fn declared_length_beyond_buffer_is_rejected() {
        let bytes = [0x00, 0x00, 0x20, 0x00, 0x00, 0x00, 0x00, 0x00];
        assert_eq!(
            parse_radiotap(&bytes),
            Err(RadiotapError::LenOverrun { needed: 32, available: 8 })
        );
    }

    #[test]
    fn leading_fields_shift_the_signal_offset() {
        // TSFT (bit 0, 8 bytes, 8-aligned) + flags (bit 1) + antenna signal
        // (bit 5). Fields start at 8, TSFT occupies 8..16, flags 16, signal 17.
        let mut bytes = vec![0x00, 0x00, 18, 0x00];
        bytes.extend_from_slice(&0b100011u32.to_le_bytes());
        bytes.extend_from_slice(&[0u8; 8]); // TSFT
        bytes.push(0x02); // flags
        bytes.push(0xb0); // -80 dBm
        let rt = parse_radiotap(&bytes).unwrap();
        assert_eq!(rt.rssi_dbm, Some(-80));
        assert_eq!(rt.body_offset, 18);
    }

    #[test]
    fn chained_present_words_move_the_field_start() {
        // Two present words (bit 31 set in the first). Antenna signal present;
        // fields begin at offset 12.
        let mut bytes = vec![0x00, 0x00, 13, 0x00];
        bytes.extend_from_slice(&((1u32 << 31) | (1 << 5)).to_le_bytes());
        bytes.extend_from_slice(&0u32.to_le_bytes());
        bytes.push(0xce); // -50 dBm
        let rt = parse_radiotap(&bytes).unwrap();
        assert_eq!(rt.rssi_dbm, Some(-50));
        assert_eq!(rt.body_offset, 13);
    }

    #[test]
    fn signal_cut_off_by_declared_length_is_absent() {
        // Declared length stops before the antenna-signal byte.
        let bytes = [0x00, 0x00, 0x08, 0x00, 0x20, 0x00, 0x00, 0x00, 0xc4];
        let rt = parse_radiotap(&bytes).unwrap();
        assert_eq!(rt.rssi_dbm, None);
        assert_eq!(rt.body_offset, 8);
    }
}
