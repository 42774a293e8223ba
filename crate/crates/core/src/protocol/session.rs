//! The two parties of a BBM92 session as message-driven state machines.
//!
//! Session grammar (sender in brackets):
//!
//! ```text
//! [responder] BasisAnnounce   all of its bases, one per coincidence
//! [initiator] SiftIndices     record indices where the bases agree
//! [initiator] QberSample      sifted positions sacrificed for testing
//! [responder] QberReport      its bits at exactly those positions
//! [initiator] Abort | KeyParams
//! ```
//!
//! The parties share nothing but messages. Any message that arrives out of
//! this order, or with a sequence number not above the sender's previous one,
//! is a session error. The responder's bits cross the channel only in
//! `QberReport`, and only at the sampled positions.

use alloc::string::String;
use alloc::vec::Vec;

use rand::Rng;

use super::basis::{sift, RawRecord, SiftResult};
use super::key::secret_key_length;
use super::message::{encode_transcript, AbortReason, ClassicalMessage, MessageBody};
use super::qber::{qber_from_sample, select_test_positions, MIN_SIFTED_FOR_QBER};
use super::toeplitz::toeplitz_hash;
use crate::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize), serde(default, deny_unknown_fields))]
pub struct SessionParams {
    pub sample_fraction: f64,
    /// Sessions whose estimated error rate reaches this value abort.
    pub qber_abort_threshold: f64,
    /// Reconciliation inefficiency `f ≥ 1`.
    pub ec_efficiency: f64,
}

impl Default for SessionParams {
    fn default() -> Self {
        SessionParams { sample_fraction: 0.2, qber_abort_threshold: 0.11, ec_efficiency: 1.1 }
    }
}

impl SessionParams {
    pub fn validate(&self) -> Result<()> {
        if !(self.sample_fraction > 0.0 && self.sample_fraction < 1.0) {
            return Err(Error::invalid("sample_fraction", "must lie strictly between 0 and 1"));
        }
        if !(self.qber_abort_threshold > 0.0 && self.qber_abort_threshold <= 0.5) {
            return Err(Error::invalid("qber_abort_threshold", "must lie in (0, 0.5]"));
        }
        if !(self.ec_efficiency >= 1.0) || !self.ec_efficiency.is_finite() {
            return Err(Error::invalid("ec_efficiency", "must be at least 1"));
        }
        Ok(())
    }
}

/// Outcome of a session for one party.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct KeyMaterial {
    pub qber: f64,
    pub sifted_bits: usize,
    pub revealed_bits: usize,
    pub secret_length: usize,
    pub key_bits: Vec<bool>,
    pub aborted: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SessionOutcome {
    /// The initiator's key. Reconciliation is accounted for as leakage only,
    /// so this is the key both parties hold after error correction.
    pub key: KeyMaterial,
    /// The responder's view before error correction: its key bits differ
    /// from the initiator's wherever its raw bits were in error.
    pub responder: KeyMaterial,
    pub transcript: Vec<ClassicalMessage>,
}

impl SessionOutcome {
    /// Newline-delimited `MSG ...` lines.
    pub fn transcript_text(&self) -> String {
        encode_transcript(&self.transcript)
    }
}

fn remaining_bits(bits: &[bool], tested: &[usize]) -> Vec<bool> {
    let mut out = Vec::with_capacity(bits.len() - tested.len());
    let mut t = tested.iter().peekable();
    for (i, &b) in bits.iter().enumerate() {
        if t.peek() == Some(&&i) {
            t.next();
        } else {
            out.push(b);
        }
    }
    out
}

#[derive(Debug)]
struct Outbox {
    next_sequence: u64,
    last_received: Option<u64>,
}

impl Outbox {
    fn new() -> Self {
        Outbox { next_sequence: 0, last_received: None }
    }

    fn send(&mut self, body: MessageBody) -> ClassicalMessage {
        let m = ClassicalMessage { sequence: self.next_sequence, body };
        self.next_sequence += 1;
        m
    }

    fn accept(&mut self, msg: &ClassicalMessage) -> Result<()> {
        if self.last_received.is_some_and(|last| msg.sequence <= last) {
            return Err(Error::Session("sequence number did not increase"));
        }
        self.last_received = Some(msg.sequence);
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum InitiatorState {
    AwaitBases,
    AwaitReport,
    Done,
}

/// The party that sifts, picks the test sample and decides the outcome.
#[derive(Debug)]
pub struct Initiator<'a, R: Rng + ?Sized> {
    records: &'a [RawRecord],
    params: SessionParams,
    rng: &'a mut R,
    state: InitiatorState,
    outbox: Outbox,
    sifted: SiftResult,
    tested: Vec<usize>,
    key: Option<KeyMaterial>,
}

impl<'a, R: Rng + ?Sized> Initiator<'a, R> {
    pub fn new(records: &'a [RawRecord], params: SessionParams, rng: &'a mut R) -> Self {
        Initiator {
            records,
            params,
            rng,
            state: InitiatorState::AwaitBases,
            outbox: Outbox::new(),
            sifted: SiftResult::default(),
            tested: Vec::new(),
            key: None,
        }
    }

    pub fn key(&self) -> Option<&KeyMaterial> {
        self.key.as_ref()
    }

    pub fn receive(&mut self, msg: &ClassicalMessage) -> Result<Vec<ClassicalMessage>> {
        self.outbox.accept(msg)?;
        match (self.state, &msg.body) {
            (InitiatorState::AwaitBases, MessageBody::BasisAnnounce(bases)) => {
                self.sifted = sift(self.records, bases)?;
                if self.sifted.sifted_count < MIN_SIFTED_FOR_QBER {
                    self.state = InitiatorState::Done;
                    return Err(Error::InsufficientData { have: self.sifted.sifted_count, need: MIN_SIFTED_FOR_QBER });
                }
                self.tested = select_test_positions(self.sifted.sifted_count, self.params.sample_fraction, self.rng)?;
                self.state = InitiatorState::AwaitReport;
                Ok(alloc::vec![
                    self.outbox.send(MessageBody::SiftIndices(self.sifted.kept_indices.clone())),
                    self.outbox.send(MessageBody::QberSample(self.tested.clone())),
                ])
            }
            (InitiatorState::AwaitReport, MessageBody::QberReport(revealed)) => {
                let qber = qber_from_sample(&self.sifted.bits, &self.tested, revealed)?;
                let remaining = remaining_bits(&self.sifted.bits, &self.tested);
                let secret =
                    if qber <= 0.5 { secret_key_length(remaining.len(), qber, self.params.ec_efficiency)? } else { 0 };
                let mut key = KeyMaterial {
                    qber,
                    sifted_bits: self.sifted.sifted_count,
                    revealed_bits: self.tested.len(),
                    ..KeyMaterial::default()
                };
                self.state = InitiatorState::Done;
                let reply = if qber >= self.params.qber_abort_threshold || secret == 0 {
                    key.aborted = true;
                    let reason = if qber >= self.params.qber_abort_threshold {
                        AbortReason::QberAboveThreshold
                    } else {
                        AbortReason::NoSecretKey
                    };
                    self.outbox.send(MessageBody::Abort { reason, qber })
                } else {
                    let seed: Vec<bool> = (0..remaining.len() + secret - 1).map(|_| self.rng.random()).collect();
                    key.secret_length = secret;
                    key.key_bits = toeplitz_hash(&remaining, &seed, secret)?;
                    self.outbox.send(MessageBody::KeyParams { qber, secret_length: secret, seed })
                };
                self.key = Some(key);
                Ok(alloc::vec![reply])
            }
            _ => Err(Error::Session("message out of order for initiator")),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum ResponderState {
    Start,
    AwaitSift,
    AwaitSample,
    AwaitOutcome,
    Done,
}

/// The party that announces its bases and answers the test-sample request.
#[derive(Debug)]
pub struct Responder<'a> {
    records: &'a [RawRecord],
    state: ResponderState,
    outbox: Outbox,
    sifted: SiftResult,
    tested: Vec<usize>,
    key: Option<KeyMaterial>,
}

impl<'a> Responder<'a> {
    pub fn new(records: &'a [RawRecord]) -> Self {
        Responder {
            records,
            state: ResponderState::Start,
            outbox: Outbox::new(),
            sifted: SiftResult::default(),
            tested: Vec::new(),
            key: None,
        }
    }

    pub fn key(&self) -> Option<&KeyMaterial> {
        self.key.as_ref()
    }

    /// Opens the session.
    pub fn start(&mut self) -> Result<ClassicalMessage> {
        if self.state != ResponderState::Start {
            return Err(Error::Session("responder already started"));
        }
        self.state = ResponderState::AwaitSift;
        let bases = self.records.iter().map(|r| r.basis).collect();
        Ok(self.outbox.send(MessageBody::BasisAnnounce(bases)))
    }

    pub fn receive(&mut self, msg: &ClassicalMessage) -> Result<Vec<ClassicalMessage>> {
        self.outbox.accept(msg)?;
        match (self.state, &msg.body) {
            (ResponderState::AwaitSift, MessageBody::SiftIndices(kept)) => {
                self.sifted = SiftResult::from_kept(self.records, kept)?;
                self.state = ResponderState::AwaitSample;
                Ok(Vec::new())
            }
            (ResponderState::AwaitSample, MessageBody::QberSample(positions)) => {
                let revealed = positions
                    .iter()
                    .map(|&p| self.sifted.bits.get(p).copied().ok_or(Error::Protocol("sample position out of range")))
                    .collect::<Result<Vec<bool>>>()?;
                self.tested = positions.clone();
                self.state = ResponderState::AwaitOutcome;
                Ok(alloc::vec![self.outbox.send(MessageBody::QberReport(revealed))])
            }
            (ResponderState::AwaitOutcome, MessageBody::Abort { qber, .. }) => {
                self.state = ResponderState::Done;
                self.key = Some(KeyMaterial {
                    qber: *qber,
                    sifted_bits: self.sifted.sifted_count,
                    revealed_bits: self.tested.len(),
                    aborted: true,
                    ..KeyMaterial::default()
                });
                Ok(Vec::new())
            }
            (ResponderState::AwaitOutcome, MessageBody::KeyParams { qber, secret_length, seed }) => {
                self.state = ResponderState::Done;
                let remaining = remaining_bits(&self.sifted.bits, &self.tested);
                let key_bits = toeplitz_hash(&remaining, seed, *secret_length)?;
                self.key = Some(KeyMaterial {
                    qber: *qber,
                    sifted_bits: self.sifted.sifted_count,
                    revealed_bits: self.tested.len(),
                    secret_length: *secret_length,
                    key_bits,
                    aborted: false,
                });
                Ok(Vec::new())
            }
            _ => Err(Error::Session("message out of order for responder")),
        }
    }
}

/// Runs both parties over an in-memory ordered channel.
///
/// `local` and `remote` are the two parties' records for the same
/// coincidences, aligned by index. The initiator holds `local`.
pub fn run_session<R: Rng + ?Sized>(
    local: &[RawRecord],
    remote: &[RawRecord],
    params: &SessionParams,
    rng: &mut R,
) -> Result<SessionOutcome> {
    params.validate()?;
    if local.len() != remote.len() || local.iter().zip(remote).any(|(a, b)| a.index != b.index) {
        return Err(Error::Protocol("local and remote records are not aligned"));
    }
    let mut initiator = Initiator::new(local, params.clone(), rng);
    let mut responder = Responder::new(remote);
    let mut transcript = Vec::new();

    // (message, addressed to the initiator?)
    let mut queue = alloc::collections::VecDeque::new();
    queue.push_back((responder.start()?, true));
    while let Some((msg, to_initiator)) = queue.pop_front() {
        let replies = if to_initiator { initiator.receive(&msg)? } else { responder.receive(&msg)? };
        transcript.push(msg);
        queue.extend(replies.into_iter().map(|m| (m, !to_initiator)));
    }

    let key = initiator.key().cloned().ok_or(Error::Session("session ended without an outcome"))?;
    let responder = responder.key().cloned().ok_or(Error::Session("responder saw no outcome"))?;
    Ok(SessionOutcome { key, responder, transcript })
}
