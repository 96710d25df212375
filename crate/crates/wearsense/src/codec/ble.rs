//! BLE advertising PDUs (ADV_IND payloads) and iBeacon manufacturer data.
//!
//! An ADV_IND payload is the 6-byte advertiser address (transmitted
//! least-significant byte first) followed by AD structures, each a length
//! byte (counting type + data), a type byte, and data. iBeacon payloads are
//! manufacturer-specific AD structures (type 0xFF) whose 25 data bytes begin
//! `4C 00 02 15` and carry a 16-byte proximity UUID, big-endian major and
//! minor, and a signed calibrated TX power byte.

use std::fmt;

use super::mac::MacAddress;

/// Manufacturer-data prefix identifying an iBeacon: Apple company id
/// (0x004C little-endian), subtype 0x02, subtype length 0x15.
pub const IBEACON_PREFIX: [u8; 4] = [0x4c, 0x00, 0x02, 0x15];
/// Exact manufacturer-data length of an iBeacon payload.
pub const IBEACON_DATA_LEN: usize = 25;

const AD_TYPE_MANUFACTURER: u8 = 0xff;

/// One advertising data structure.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AdStructure {
    pub ad_type: u8,
    pub data: Vec<u8>,
}

/// Decoded iBeacon manufacturer payload.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct IBeaconPayload {
    pub uuid: [u8; 16],
    pub major: u16,
    pub minor: u16,
    pub tx_power_dbm: i8,
}

impl IBeaconPayload {
    /// Lowercase hex of the proximity UUID.
    pub fn uuid_hex(&self) -> String {
        hex::encode(self.uuid)
    }
}

/// A parsed BLE advertisement.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BleAdvertisement {
    /// Advertiser address, normalized from on-air byte order.
    pub adv_addr: MacAddress,
    pub ad_structures: Vec<AdStructure>,
    /// Present iff a manufacturer AD structure matches the iBeacon prefix
    /// and length. The first match wins.
    pub ibeacon: Option<IBeaconPayload>,
}

/// Errors parsing an advertising payload.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BleError {
    /// Fewer than the 6 bytes needed for the advertiser address.
    Empty,
    /// An AD structure's length byte runs past the end of the payload.
    Truncated,
}

impl fmt::Display for BleError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            BleError::Empty => write!(f, "Empty: payload shorter than an advertiser address"),
            BleError::Truncated => write!(f, "Truncated: AD structure overruns payload"),
        }
    }
}

impl std::error::Error for BleError {}

fn decode_ibeacon(data: &[u8]) -> IBeaconPayload {
    IBeaconPayload {
        uuid: data[4..20].try_into().unwrap(),
        major: u16::from_be_bytes([data[20], data[21]]),
        minor: u16::from_be_bytes([data[22], data[23]]),
        tx_power_dbm: data[24] as i8,
    }
}

/// Parse an ADV_IND payload: advertiser address plus AD structures.
///
/// A zero length byte terminates the significant part (the remainder is
/// treated as padding).
pub fn parse_ble_advertisement(bytes: &[u8]) -> Result<BleAdvertisement, BleError> {
    if bytes.len() < 6 {
        return Err(BleError::Empty);
    }
    let mut addr: [u8; 6] = bytes[0..6].try_into().unwrap();
    addr.reverse();
    let adv_addr = MacAddress(addr);

    let mut ad_structures = Vec::new();
    let mut ibeacon = None;
    let mut offset = 6;
    while offset < bytes.len() {
        let len = bytes[offset] as usize;
        if len == 0 {
            break;
        }
        if offset + 1 + len > bytes.len() {
            return Err(BleError::Truncated);
        }
        let ad_type = bytes[offset + 1];
        let data = bytes[offset + 2..offset + 1 + len].to_vec();
        if ibeacon.is_none()
            && ad_type == AD_TYPE_MANUFACTURER
            && data.len() == IBEACON_DATA_LEN
            && data[..4] == IBEACON_PREFIX
        {
            ibeacon = Some(decode_ibeacon(&data));
        }
        ad_structures.push(AdStructure { ad_type, data });
        offset += 1 + len;
    }

    Ok(BleAdvertisement { adv_addr, ad_structures, ibeacon })
}

#[cfg(test)]
mod tests {
    use super::*;

    // On-air address bytes for c0:11:22:33:44:55 (LSB first).
    const ADV_A: [u8; 6] = [0x55, 0x44, 0x33, 0x22, 0x11, 0xc0];

    fn ibeacon_structure() -> Vec<u8> {
        let mut s = vec![0x1a, 0xff];
        s.extend_from_slice(&IBEACON_PREFIX);
        s.extend_from_slice(&[0x11; 16]);
        s.extend_from_slice(&[0x00, 0x01]); // major 1
        s.extend_from_slice(&[0x00, 0x02]); // minor 2
        s.push(0xc5); // -59 dBm
        s
    }

    #[test]
    fn address_only_payload() {
        let adv = parse_ble_advertisement(&ADV_A).unwrap();
        assert_eq!(adv.adv_addr.to_string(), "c0:11:22:33:44:55");
        assert!(adv.ad_structures.is_empty());
        assert!(adv.ibeacon.is_none());
    }

    #[test]
    fn decodes_ibeacon_payload() {
        let mut bytes = ADV_A.to_vec();
        bytes.extend_from_slice(&ibeacon_structure());
        let adv = parse_ble_advertisement(&bytes).unwrap();
        let beacon = adv.ibeacon.expect("ibeacon decoded");
        assert_eq!(beacon.uuid, [0x11; 16]);
        assert_eq!(beacon.major, 1);
        assert_eq!(beacon.minor, 2);
        assert_eq!(beacon.tx_power_dbm, -59);
        assert_eq!(adv.ad_structures.len(), 1);
    }

    #[test]
    fn overrunning_length_byte_is_truncated() {
        let mut bytes = ADV_A.to_vec();
        bytes.extend_from_slice(&[0x05, 0x09, 0x41]); // claims 5, only 2 follow
        assert_eq!(parse_ble_advertisement(&bytes), Err(BleError::Truncated));
    }

    #[test]
    fn short_payload_is_empty() {
        assert_eq!(parse_ble_advertisement(&[0x01, 0x02]), Err(BleError::Empty));
    }

    #[test]
    fn ibeacon_requires_exact_prefix_and_length() {
        // Right prefix, wrong total length (24 data bytes).
        let mut bytes = ADV_A.to_vec();
        let mut s = vec![0x19, 0xff];
        s.extend_from_slice(&IBEACON_PREFIX);
        s.extend_from_slice(&[0x00; 20]);
        bytes.extend_from_slice(&s);
        let adv = parse_ble_advertisement(&bytes).unwrap();
        assert!(adv.ibeacon.is_none());
        assert_eq!(adv.ad_structures.len(), 1);

        // Right length, wrong prefix.
        let mut bytes = ADV_A.to_vec();
        let mut s = vec![0x1a, 0xff, 0x4c, 0x00, 0x02, 0x14];
        s.extend_from_slice(&[0x00; 21]);
        bytes.extend_from_slice(&s);
        let adv = parse_ble_advertisement(&bytes).unwrap();
        assert!(adv.ibeacon.is_none());
    }

    #[test]
    fn zero_length_byte_ends_significant_part() {
        let mut bytes = ADV_A.to_vec();
        bytes.extend_from_slice(&[0x02, 0x01, 0x06]); // flags
        bytes.extend_from_slice(&[0x00, 0x00, 0x00]); // padding
        let adv = parse_ble_advertisement(&bytes).unwrap();
        assert_eq!(adv.ad_structures.len(), 1);
        assert_eq!(adv.ad_structures[0].ad_type, 0x01);
    }
}
