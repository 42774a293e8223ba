//! Classical-channel messages and their line format.
//!
//! Each message serializes to one ASCII line
//! `MSG <kind> <sequence> <hex payload>` where the payload bytes are:
//!
//! | kind            | payload                                                            |
//! |-----------------|--------------------------------------------------------------------|
//! | `BasisAnnounce` | varint count, then bases packed MSB-first (1 = diagonal)           |
//! | `SiftIndices`   | varint count, then ascending record indices as varint deltas       |
//! | `QberSample`    | varint count, then ascending sifted positions as varint deltas     |
//! | `QberReport`    | varint count, then revealed bits packed MSB-first                  |
//! | `Abort`         | one reason byte (1 = error rate above threshold, 2 = no key), then the estimated error rate as a big-endian IEEE-754 double |
//! | `KeyParams`     | error-rate double, varint secret length, varint seed length, seed bits packed MSB-first |
//!
//! Varints are unsigned LEB128. Deltas are taken from the previous value,
//! the first from zero. An empty payload renders as `-`.

use alloc::string::String;
use alloc::vec::Vec;
use core::fmt::{self, Write as _};

use super::basis::Basis;
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum MessageKind {
    BasisAnnounce,
    SiftIndices,
    QberSample,
    QberReport,
    Abort,
    KeyParams,
}

impl MessageKind {
    pub fn name(self) -> &'static str {
        match self {
            MessageKind::BasisAnnounce => "BasisAnnounce",
            MessageKind::SiftIndices => "SiftIndices",
            MessageKind::QberSample => "QberSample",
            MessageKind::QberReport => "QberReport",
            MessageKind::Abort => "Abort",
            MessageKind::KeyParams => "KeyParams",
        }
    }

    fn from_name(s: &str) -> Result<Self> {
        Ok(match s {
            "BasisAnnounce" => MessageKind::BasisAnnounce,
            "SiftIndices" => MessageKind::SiftIndices,
            "QberSample" => MessageKind::QberSample,
            "QberReport" => MessageKind::QberReport,
            "Abort" => MessageKind::Abort,
            "KeyParams" => MessageKind::KeyParams,
            _ => return Err(Error::Decode("unknown message kind")),
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum AbortReason {
    QberAboveThreshold = 1,
    NoSecretKey = 2,
}

#[derive(Debug, Clone, PartialEq)]
pub enum MessageBody {
    BasisAnnounce(Vec<Basis>),
    SiftIndices(Vec<usize>),
    QberSample(Vec<usize>),
    QberReport(Vec<bool>),
    Abort { reason: AbortReason, qber: f64 },
    KeyParams { qber: f64, secret_length: usize, seed: Vec<bool> },
}

impl MessageBody {
    pub fn kind(&self) -> MessageKind {
        match self {
            MessageBody::BasisAnnounce(_) => MessageKind::BasisAnnounce,
            MessageBody::SiftIndices(_) => MessageKind::SiftIndices,
            MessageBody::QberSample(_) => MessageKind::QberSample,
            MessageBody::QberReport(_) => MessageKind::QberReport,
            MessageBody::Abort { .. } => MessageKind::Abort,
            MessageBody::KeyParams { .. } => MessageKind::KeyParams,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ClassicalMessage {
    pub sequence: u64,
    pub body: MessageBody,
}

fn put_varint(out: &mut Vec<u8>, mut v: u64) {
    loop {
        let byte = (v & 0x7f) as u8;
        v >>= 7;
        if v == 0 {
            out.push(byte);
            return;
        }
        out.push(byte | 0x80);
    }
}

fn put_bits(out: &mut Vec<u8>, bits: impl ExactSizeIterator<Item = bool>) {
    put_varint(out, bits.len() as u64);
    let mut byte = 0u8;
    let mut filled = 0;
    for b in bits {
        byte = (byte << 1) | u8::from(b);
        filled += 1;
        if filled == 8 {
            out.push(byte);
            byte = 0;
            filled = 0;
        }
    }
    if filled > 0 {
        out.push(byte << (8 - filled));
    }
}

fn put_ascending(out: &mut Vec<u8>, values: &[usize]) {
    put_varint(out, values.len() as u64);
    let mut prev = 0usize;
    for &v in values {
        put_varint(out, (v - prev) as u64);
        prev = v;
    }
}

struct Reader<'a> {
    bytes: &'a [u8],
    pos: usize,
}

impl Reader<'_> {
    fn byte(&mut self) -> Result<u8> {
        let b = *self.bytes.get(self.pos).ok_or(Error::Decode("payload truncated"))?;
        self.pos += 1;
        Ok(b)
    }

    fn varint(&mut self) -> Result<u64> {
        let mut v = 0u64;
        for shift in (0..64).step_by(7) {
            let b = self.byte()?;
            v |= u64::from(b & 0x7f) << shift;
            if b & 0x80 == 0 {
                return Ok(v);
            }
        }
        Err(Error::Decode("varint too long"))
    }

    fn len(&mut self) -> Result<usize> {
        let n = self.varint()? as usize;
        // Every element needs at least one bit; reject absurd counts early.
        if n > 8 * (self.bytes.len() - self.pos) {
            return Err(Error::Decode("count exceeds payload"));
        }
        Ok(n)
    }

    fn bits(&mut self) -> Result<Vec<bool>> {
        let n = self.len()?;
        let mut out = Vec::with_capacity(n);
        let mut byte = 0u8;
        for i in 0..n {
            if i % 8 == 0 {
                byte = self.byte()?;
            }
            out.push(byte & (0x80 >> (i % 8)) != 0);
        }
        Ok(out)
    }

    fn ascending(&mut self) -> Result<Vec<usize>> {
        let n = self.len()?;
        let mut out = Vec::with_capacity(n);
        let mut prev = 0u64;
        for i in 0..n {
            let d = self.varint()?;
            if i > 0 && d == 0 {
                return Err(Error::Decode("index list not strictly ascending"));
            }
            prev = prev.checked_add(d).ok_or(Error::Decode("index overflow"))?;
            out.push(prev as usize);
        }
        Ok(out)
    }

    fn f64(&mut self) -> Result<f64> {
        let mut b = [0u8; 8];
        for slot in &mut b {
            *slot = self.byte()?;
        }
        Ok(f64::from_be_bytes(b))
    }

    fn finish(&self) -> Result<()> {
        if self.pos == self.bytes.len() {
            Ok(())
        } else {
            Err(Error::Decode("trailing payload bytes"))
        }
    }
}

impl ClassicalMessage {
    pub fn kind(&self) -> MessageKind {
        self.body.kind()
    }

    pub fn payload_bytes(&self) -> Vec<u8> {
        let mut out = Vec::new();
        match &self.body {
            MessageBody::BasisAnnounce(bases) => {
                put_bits(&mut out, bases.iter().map(|&b| b == Basis::Diagonal));
            }
            MessageBody::SiftIndices(idx) | MessageBody::QberSample(idx) => put_ascending(&mut out, idx),
            MessageBody::QberReport(bits) => put_bits(&mut out, bits.iter().copied()),
            MessageBody::Abort { reason, qber } => {
                out.push(*reason as u8);
                out.extend_from_slice(&qber.to_be_bytes());
            }
            MessageBody::KeyParams { qber, secret_length, seed } => {
                out.extend_from_slice(&qber.to_be_bytes());
                put_varint(&mut out, *secret_length as u64);
                put_bits(&mut out, seed.iter().copied());
            }
        }
        out
    }

    pub fn from_payload(kind: MessageKind, sequence: u64, bytes: &[u8]) -> Result<Self> {
        let mut r = Reader { bytes, pos: 0 };
        let body = match kind {
            MessageKind::BasisAnnounce => MessageBody::BasisAnnounce(
                r.bits()?.into_iter().map(|d| if d { Basis::Diagonal } else { Basis::Rectilinear }).collect(),
            ),
            MessageKind::SiftIndices => MessageBody::SiftIndices(r.ascending()?),
            MessageKind::QberSample => MessageBody::QberSample(r.ascending()?),
            MessageKind::QberReport => MessageBody::QberReport(r.bits()?),
            MessageKind::Abort => {
                let reason = match r.byte()? {
                    1 => AbortReason::QberAboveThreshold,
                    2 => AbortReason::NoSecretKey,
                    _ => return Err(Error::Decode("unknown abort reason")),
                };
                MessageBody::Abort { reason, qber: r.f64()? }
            }
            MessageKind::KeyParams => {
                let qber = r.f64()?;
                let secret_length = r.varint()? as usize;
                MessageBody::KeyParams { qber, secret_length, seed: r.bits()? }
            }
        };
        r.finish()?;
        Ok(ClassicalMessage { sequence, body })
    }

    /// Parses one `MSG <kind> <sequence> <hex payload>` line (trailing
    /// newline optional).
    pub fn parse_line(line: &str) -> Result<Self> {
        let line = line.strip_suffix('\n').unwrap_or(line);
        let mut parts = line.split(' ');
        if parts.next() != Some("MSG") {
            return Err(Error::Decode("line must start with MSG"));
        }
        let kind = MessageKind::from_name(parts.next().ok_or(Error::Decode("missing kind"))?)?;
        let sequence = parts
            .next()
            .ok_or(Error::Decode("missing sequence"))?
            .parse::<u64>()
            .map_err(|_| Error::Decode("bad sequence number"))?;
        let hex = parts.next().ok_or(Error::Decode("missing payload"))?;
        if parts.next().is_some() {
            return Err(Error::Decode("extra fields"));
        }
        let bytes = if hex == "-" { Vec::new() } else { decode_hex(hex)? };
        Self::from_payload(kind, sequence, &bytes)
    }
}

/// Renders the line without its terminating newline.
impl fmt::Display for ClassicalMessage {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let payload = self.payload_bytes();
        write!(f, "MSG {} {} ", self.kind().name(), self.sequence)?;
        if payload.is_empty() {
            return f.write_char('-');
        }
        for b in payload {
            write!(f, "{b:02x}")?;
        }
        Ok(())
    }
}

pub(crate) fn encode_transcript(messages: &[ClassicalMessage]) -> String {
    let mut s = String::new();
    for m in messages {
        let _ = writeln!(s, "{m}");
    }
    s
}

fn decode_hex(s: &str) -> Result<Vec<u8>> {
    if !s.len().is_multiple_of(2) {
        return Err(Error::Decode("odd-length hex payload"));
    }
    let nibble = |c: u8| match c {
        b'0'..=b'9' => Ok(c - b'0'),
        b'a'..=b'f' => Ok(c - b'a' + 10),
        _ => Err(Error::Decode("payload is not lowercase hex")),
    };
    s.as_bytes().chunks(2).map(|p| Ok(nibble(p[0])? << 4 | nibble(p[1])?)).collect()
}
