//! Byte-exact message codec.
//!
//! A frame is `kind_tag: u8 ∥ length: u32 BE ∥ payload`. Payload sizes per
//! kind are fixed:
//!
//! | kind                | tag  | payload bytes  |
//! |---------------------|------|----------------|
//! | `ServerPubKey`      | 0x01 | 32             |
//! | `BlindedOprfInput`  | 0x02 | 32             |
//! | `OprfEvaluation`    | 0x03 | 32             |
//! | `SessionRequest`    | 0x04 | 96             |
//! | `BlindTokenReply`   | 0x05 | 32             |
//! | `TokenPresentation` | 0x06 | 96             |
//! | `PrivateFeatures`   | 0x07 | 2 · 32 · n_f   |
//! | `RiskReply`         | 0x08 | 4 + 4          |
//! | `Status`            | 0x09 | 4              |
//!
//! Features travel as signed 256-bit fixed point (128 integer bits, 128
//! fractional bits, two's complement, big-endian). The risk score is an
//! unsigned 32-bit fraction where `u32::MAX` means 1.0.

use std::fmt;

use crate::error::{Error, Result};
use crate::group::ENCODED_LEN;
use crate::risk::AuthRequirement;

pub const HEADER_LEN: usize = 5;
pub const FEATURE_LEN: usize = 32;

/// Signed 128.128 fixed-point number.
#[derive(Clone, Copy, PartialEq, Eq, Hash)]
pub struct Fixed256(pub [u8; FEATURE_LEN]);

impl Fixed256 {
    pub const ZERO: Fixed256 = Fixed256([0; FEATURE_LEN]);

    /// Exact for every `f64` whose lowest set bit is at least `2^-128`;
    /// smaller contributions round to nearest, ties to even.
    pub fn from_f64(x: f64) -> Result<Self> {
        if !x.is_finite() {
            return Err(Error::InvalidParameter(format!(
                "feature value {x} is not finite"
            )));
        }
        if x.abs() >= 2f64.powi(127) {
            return Err(Error::Overflow);
        }
        if x == 0.0 {
            return Ok(Self::ZERO);
        }
        let bits = x.to_bits();
        let raw_exp = ((bits >> 52) & 0x7ff) as i32;
        let frac = bits & ((1u64 << 52) - 1);
        let (mantissa, exp) = if raw_exp == 0 {
            (frac, -1074)
        } else {
            (frac | (1u64 << 52), raw_exp - 1075)
        };
        let shift = exp + 128;
        let (hi, lo) = if shift >= 0 {
            shl(mantissa, shift as u32)
        } else {
            (0, round_shr(mantissa, (-shift) as u32) as u128)
        };
        let (hi, lo) = if x < 0.0 { negate(hi, lo) } else { (hi, lo) };
        let mut out = [0u8; FEATURE_LEN];
        out[..16].copy_from_slice(&hi.to_be_bytes());
        out[16..].copy_from_slice(&lo.to_be_bytes());
        Ok(Fixed256(out))
    }

    /// Nearest `f64`.
    pub fn to_f64(&self) -> f64 {
        let hi = u128::from_be_bytes(self.0[..16].try_into().expect("16 bytes"));
        let lo = u128::from_be_bytes(self.0[16..].try_into().expect("16 bytes"));
        let negative = hi >> 127 == 1;
        let (hi, lo) = if negative { negate(hi, lo) } else { (hi, lo) };
        let magnitude = if hi == 0 {
            lo as f64
        } else {
            // Keep the top 128 significant bits plus a sticky bit so the
            // final u128 -> f64 conversion rounds correctly.
            let s = 128 - hi.leading_zeros();
            let (top, sticky) = if s == 128 {
                (hi, (lo != 0) as u128)
            } else {
                (
                    (hi << (128 - s)) | (lo >> s),
                    (lo & ((1u128 << s) - 1) != 0) as u128,
                )
            };
            (top | sticky) as f64 * 2f64.powi(s as i32)
        };
        let v = magnitude * 2f64.powi(-128);
        if negative {
            -v
        } else {
            v
        }
    }
}

fn shl(m: u64, s: u32) -> (u128, u128) {
    let m = m as u128;
    match s {
        0 => (0, m),
        1..=127 => (m >> (128 - s), m << s),
        128..=255 => (m << (s - 128), 0),
        _ => (0, 0),
    }
}

fn round_shr(m: u64, r: u32) -> u64 {
    if r > 63 {
        return 0;
    }
    let q = m >> r;
    let rem = m & ((1u64 << r) - 1);
    let half = 1u64 << (r - 1);
    if rem > half || (rem == half && q & 1 == 1) {
        q + 1
    } else {
        q
    }
}

fn negate(hi: u128, lo: u128) -> (u128, u128) {
    let (lo, carry) = (!lo).overflowing_add(1);
    ((!hi).wrapping_add(carry as u128), lo)
}

impl fmt::Debug for Fixed256 {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Fixed256({})", self.to_f64())
    }
}

/// Encodes features as concatenated 32-byte fixed-point values.
pub fn encode_features(values: &[f64]) -> Result<Vec<u8>> {
    let mut out = Vec::with_capacity(values.len() * FEATURE_LEN);
    for v in values {
        out.extend_from_slice(&Fixed256::from_f64(*v)?.0);
    }
    Ok(out)
}

pub fn decode_features(bytes: &[u8]) -> Result<Vec<f64>> {
    if !bytes.len().is_multiple_of(FEATURE_LEN) {
        return Err(Error::Framing(
            "feature payload is not a multiple of 32 bytes",
        ));
    }
    Ok(bytes
        .chunks_exact(FEATURE_LEN)
        .map(|c| Fixed256(c.try_into().expect("32 bytes")).to_f64())
        .collect())
}

/// `[0, 1]` onto `0..=u32::MAX`, rounding to nearest.
pub fn encode_risk_score(r: f64) -> u32 {
    let r = if r.is_nan() { 1.0 } else { r.clamp(0.0, 1.0) };
    (r * u32::MAX as f64).round() as u32
}

pub fn decode_risk_score(v: u32) -> f64 {
    v as f64 / u32::MAX as f64
}

/// Outcome codes carried by [`Message::Status`].
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Status {
    Accepted,
    AuthenticationRejected,
    ReplayRejected,
    ProtocolError,
    Malformed,
}

impl Status {
    pub fn code(self) -> u32 {
        match self {
            Status::Accepted => 0,
            Status::AuthenticationRejected => 1,
            Status::ReplayRejected => 2,
            Status::ProtocolError => 3,
            Status::Malformed => 4,
        }
    }

    pub fn from_code(code: u32) -> Option<Self> {
        Some(match code {
            0 => Status::Accepted,
            1 => Status::AuthenticationRejected,
            2 => Status::ReplayRejected,
            3 => Status::ProtocolError,
            4 => Status::Malformed,
            _ => return None,
        })
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum MessageKind {
    ServerPubKey,
    BlindedOprfInput,
    OprfEvaluation,
    SessionRequest,
    BlindTokenReply,
    TokenPresentation,
    PrivateFeatures,
    RiskReply,
    Status,
}

impl MessageKind {
    pub const ALL: [MessageKind; 9] = [
        MessageKind::ServerPubKey,
        MessageKind::BlindedOprfInput,
        MessageKind::OprfEvaluation,
        MessageKind::SessionRequest,
        MessageKind::BlindTokenReply,
        MessageKind::TokenPresentation,
        MessageKind::PrivateFeatures,
        MessageKind::RiskReply,
        MessageKind::Status,
    ];

    pub fn tag(self) -> u8 {
        match self {
            MessageKind::ServerPubKey => 0x01,
            MessageKind::BlindedOprfInput => 0x02,
            MessageKind::OprfEvaluation => 0x03,
            MessageKind::SessionRequest => 0x04,
            MessageKind::BlindTokenReply => 0x05,
            MessageKind::TokenPresentation => 0x06,
            MessageKind::PrivateFeatures => 0x07,
            MessageKind::RiskReply => 0x08,
            MessageKind::Status => 0x09,
        }
    }

    pub fn from_tag(tag: u8) -> Option<Self> {
        Self::ALL.into_iter().find(|k| k.tag() == tag)
    }

    /// Payload size, given the feature count for `PrivateFeatures`.
    pub fn payload_len(self, n_features: usize) -> usize {
        match self {
            MessageKind::ServerPubKey
            | MessageKind::BlindedOprfInput
            | MessageKind::OprfEvaluation
            | MessageKind::BlindTokenReply => ENCODED_LEN,
            MessageKind::SessionRequest | MessageKind::TokenPresentation => 3 * ENCODED_LEN,
            MessageKind::PrivateFeatures => 2 * FEATURE_LEN * n_features,
            MessageKind::RiskReply => 8,
            MessageKind::Status => 4,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Message {
    ServerPubKey([u8; ENCODED_LEN]),
    BlindedOprfInput([u8; ENCODED_LEN]),
    OprfEvaluation([u8; ENCODED_LEN]),
    /// `(F^t, H^t, SessionID')`
    SessionRequest([[u8; ENCODED_LEN]; 3]),
    BlindTokenReply([u8; ENCODED_LEN]),
    /// `(T, H^t, SessionID)`
    TokenPresentation([[u8; ENCODED_LEN]; 3]),
    PrivateFeatures {
        profile: Vec<Fixed256>,
        live: Vec<Fixed256>,
    },
    RiskReply {
        score: u32,
        adjustment: u32,
    },
    Status(Status),
}

impl Message {
    pub fn kind(&self) -> MessageKind {
        match self {
            Message::ServerPubKey(_) => MessageKind::ServerPubKey,
            Message::BlindedOprfInput(_) => MessageKind::BlindedOprfInput,
            Message::OprfEvaluation(_) => MessageKind::OprfEvaluation,
            Message::SessionRequest(_) => MessageKind::SessionRequest,
            Message::BlindTokenReply(_) => MessageKind::BlindTokenReply,
            Message::TokenPresentation(_) => MessageKind::TokenPresentation,
            Message::PrivateFeatures { .. } => MessageKind::PrivateFeatures,
            Message::RiskReply { .. } => MessageKind::RiskReply,
            Message::Status(_) => MessageKind::Status,
        }
    }

    pub fn private_features(profile: &[f64], live: &[f64]) -> Result<Self> {
        if profile.is_empty() || profile.len() != live.len() {
            return Err(Error::LengthMismatch {
                expected: profile.len(),
                actual: live.len(),
            });
        }
        let conv = |xs: &[f64]| {
            xs.iter()
                .map(|x| Fixed256::from_f64(*x))
                .collect::<Result<Vec<_>>>()
        };
        Ok(Message::PrivateFeatures {
            profile: conv(profile)?,
            live: conv(live)?,
        })
    }

    pub fn risk_reply(score: f64, decision: AuthRequirement) -> Self {
        Message::RiskReply {
            score: encode_risk_score(score),
            adjustment: decision.code(),
        }
    }

    pub fn payload(&self) -> Vec<u8> {
        match self {
            Message::ServerPubKey(b)
            | Message::BlindedOprfInput(b)
            | Message::OprfEvaluation(b)
            | Message::BlindTokenReply(b) => b.to_vec(),
            Message::SessionRequest(parts) | Message::TokenPresentation(parts) => parts.concat(),
            Message::PrivateFeatures { profile, live } => {
                profile.iter().chain(live).flat_map(|f| f.0).collect()
            }
            Message::RiskReply { score, adjustment } => {
                let mut p = score.to_be_bytes().to_vec();
                p.extend_from_slice(&adjustment.to_be_bytes());
                p
            }
            Message::Status(s) => s.code().to_be_bytes().to_vec(),
        }
    }

    fn from_payload(kind: MessageKind, p: &[u8]) -> Result<Self> {
        let n_features = p.len() / (2 * FEATURE_LEN);
        let expected = kind.payload_len(n_features);
        if p.len() != expected || (kind == MessageKind::PrivateFeatures && n_features == 0) {
            return Err(Error::Framing("payload length does not match message kind"));
        }
        let elem = |i: usize| -> [u8; ENCODED_LEN] {
            p[i * ENCODED_LEN..(i + 1) * ENCODED_LEN]
                .try_into()
                .expect("32 bytes")
        };
        let word = |i: usize| u32::from_be_bytes(p[i * 4..i * 4 + 4].try_into().expect("4 bytes"));
        Ok(match kind {
            MessageKind::ServerPubKey => Message::ServerPubKey(elem(0)),
            MessageKind::BlindedOprfInput => Message::BlindedOprfInput(elem(0)),
            MessageKind::OprfEvaluation => Message::OprfEvaluation(elem(0)),
            MessageKind::SessionRequest => Message::SessionRequest([elem(0), elem(1), elem(2)]),
            MessageKind::BlindTokenReply => Message::BlindTokenReply(elem(0)),
            MessageKind::TokenPresentation => {
                Message::TokenPresentation([elem(0), elem(1), elem(2)])
            }
            MessageKind::PrivateFeatures => {
                let mut all = (0..2 * n_features).map(|i| Fixed256(elem(i)));
                let profile = all.by_ref().take(n_features).collect();
                let live = all.collect();
                Message::PrivateFeatures { profile, live }
            }
            MessageKind::RiskReply => Message::RiskReply {
                score: word(0),
                adjustment: word(1),
            },
            MessageKind::Status => Message::Status(
                Status::from_code(word(0)).ok_or(Error::Framing("unknown status code"))?,
            ),
        })
    }
}

/// Serializes a message into one frame.
pub fn encode(msg: &Message) -> Vec<u8> {
    let payload = msg.payload();
    let mut out = Vec::with_capacity(HEADER_LEN + payload.len());
    out.push(msg.kind().tag());
    out.extend_from_slice(&(payload.len() as u32).to_be_bytes());
    out.extend_from_slice(&payload);
    out
}

/// Parses exactly one frame; trailing or missing bytes are framing errors.
pub fn decode(bytes: &[u8]) -> Result<Message> {
    if bytes.len() < HEADER_LEN {
        return Err(Error::Framing("frame shorter than its header"));
    }
    let kind = MessageKind::from_tag(bytes[0]).ok_or(Error::Framing("unknown kind tag"))?;
    let len = u32::from_be_bytes(bytes[1..HEADER_LEN].try_into().expect("4 bytes")) as usize;
    let payload = &bytes[HEADER_LEN..];
    if payload.len() != len {
        return Err(Error::Framing("declared length does not match frame size"));
    }
    Message::from_payload(kind, payload)
}

#[cfg(test)]
mod tests {
    use proptest::prelude::*;

    use super::*;

    #[test]
    fn zero_and_one_and_a_half() {
        assert_eq!(Fixed256::from_f64(0.0).unwrap().0, [0u8; 32]);
        let f = Fixed256::from_f64(1.5).unwrap();
        let mut expected = [0u8; 32];
        expected[15] = 1; // integer part 1
        expected[16] = 0x80; // fractional part 2^127
        assert_eq!(f.0, expected);
        assert_eq!(f.to_f64(), 1.5);
    }

    #[test]
    fn negative_values_are_twos_complement() {
        let f = Fixed256::from_f64(-1.0).unwrap();
        let mut expected = [0xFF; 32];
        expected[16..].fill(0);
        assert_eq!(f.0, expected);
        assert_eq!(f.to_f64(), -1.0);
    }

    #[test]
    fn overflow_and_non_finite() {
        assert!(matches!(
            Fixed256::from_f64(2f64.powi(127)),
            Err(Error::Overflow)
        ));
        assert!(matches!(
            Fixed256::from_f64(-2f64.powi(127)),
            Err(Error::Overflow)
        ));
        assert!(Fixed256::from_f64(f64::NAN).is_err());
        let big = 2f64.powi(127) - 2f64.powi(127 - 53);
        assert_eq!(Fixed256::from_f64(big).unwrap().to_f64(), big);
    }

    #[test]
    fn sub_resolution_values_quantize() {
        let tiny = 2f64.powi(-130);
        assert_eq!(Fixed256::from_f64(tiny).unwrap(), Fixed256::ZERO);
        let q = 3.0 * 2f64.powi(-129);
        // 1.5 units rounds to the even neighbour, 2 units.
        assert_eq!(Fixed256::from_f64(q).unwrap().to_f64(), 2f64.powi(-127));
    }

    #[test]
    fn five_features_take_160_bytes_each_side() {
        let v = [1.0, 2.0, 3.0, 4.0, 5.0];
        assert_eq!(encode_features(&v).unwrap().len(), 160);
        let msg = Message::private_features(&v, &v).unwrap();
        assert_eq!(msg.payload().len(), 320);
        assert_eq!(decode_features(&encode_features(&v).unwrap()).unwrap(), v);
    }

    #[test]
    fn risk_score_endpoints() {
        assert_eq!(encode_risk_score(0.0), 0);
        assert_eq!(encode_risk_score(1.0), u32::MAX);
        assert_eq!(decode_risk_score(u32::MAX), 1.0);
    }

    fn sample_messages() -> Vec<Message> {
        vec![
            Message::ServerPubKey([1; 32]),
            Message::BlindedOprfInput([2; 32]),
            Message::OprfEvaluation([3; 32]),
            Message::SessionRequest([[4; 32], [5; 32], [6; 32]]),
            Message::BlindTokenReply([7; 32]),
            Message::TokenPresentation([[8; 32], [9; 32], [10; 32]]),
            Message::private_features(&[0.25, -3.0], &[1e-3, 42.0]).unwrap(),
            Message::risk_reply(0.5, AuthRequirement::StepUp),
            Message::Status(Status::ReplayRejected),
        ]
    }

    #[test]
    fn every_kind_round_trips() {
        for m in sample_messages() {
            assert_eq!(decode(&encode(&m)).unwrap(), m);
        }
    }

    #[test]
    fn truncation_and_extension_are_framing_errors() {
        for m in sample_messages() {
            let f = encode(&m);
            assert!(matches!(decode(&f[..f.len() - 1]), Err(Error::Framing(_))));
            let mut longer = f.clone();
            longer.push(0);
            assert!(matches!(decode(&longer), Err(Error::Framing(_))));
        }
    }

    #[test]
    fn undefined_tags_are_rejected() {
        let frame = encode(&Message::ServerPubKey([1; 32]));
        for tag in 0..=255u8 {
            let mut f = frame.clone();
            f[0] = tag;
            let known = MessageKind::from_tag(tag).is_some();
            if !known {
                assert!(matches!(
                    decode(&f),
                    Err(Error::Framing("unknown kind tag"))
                ));
            }
        }
    }

    #[test]
    fn wrong_payload_size_for_kind() {
        // A 32-byte payload under the SessionRequest tag.
        let mut f = encode(&Message::ServerPubKey([1; 32]));
        f[0] = MessageKind::SessionRequest.tag();
        assert!(decode(&f).is_err());
        // Empty feature payload.
        assert!(decode(&[0x07, 0, 0, 0, 0]).is_err());
        // Odd number of feature slots.
        let mut f = vec![0x07, 0, 0, 0, 96];
        f.extend_from_slice(&[0u8; 96]);
        assert!(decode(&f).is_err());
    }

    proptest! {
        #[test]
        fn representable_values_round_trip_exactly(x in -1e30f64..1e30) {
            prop_assert_eq!(Fixed256::from_f64(x).unwrap().to_f64(), x);
        }

        #[test]
        fn arbitrary_bits_round_trip_or_quantize(bits in any::<u64>()) {
            let x = f64::from_bits(bits);
            prop_assume!(x.is_finite() && x.abs() < 2f64.powi(127));
            let y = Fixed256::from_f64(x).unwrap().to_f64();
            prop_assert!((y - x).abs() <= 2f64.powi(-128));
        }

        #[test]
        fn frames_round_trip(tag_idx in 0usize..9, seed in any::<[u8; 32]>(), n in 1usize..6) {
            let kind = MessageKind::ALL[tag_idx];
            let mut frame = vec![kind.tag()];
            let len = kind.payload_len(n);
            frame.extend_from_slice(&(len as u32).to_be_bytes());
            frame.extend((0..len).map(|i| seed[i % 32]));
            if kind == MessageKind::Status {
                frame[5..].copy_from_slice(&[0, 0, 0, seed[0] % 5]);
            }
            let msg = decode(&frame).unwrap();
            prop_assert_eq!(encode(&msg), frame);
        }
    }
}
