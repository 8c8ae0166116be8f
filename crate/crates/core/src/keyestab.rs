//! Key establishment between a party and the key generator.
//!
//! The default [`dealer_share`] is an ideal trusted dealer: both endpoints
//! receive the same uniform key and the ledger is billed one qubit and one
//! measurement per key bit. [`bb84_share`] is an opt-in sift-and-sample
//! simulation for when the channel statistics matter. The phase secret is
//! carried by [`share_phase`], modelled as an authenticated transfer with a
//! fixed qubit bill.

use std::collections::VecDeque;
use std::fmt;
use std::str::FromStr;
use std::sync::Arc;

use rand::Rng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::bits::Bits;
use crate::costs::{ConvertStep, CostLedger, Event, Leg, MeasureStep};
use crate::error::{Error, Result};
use crate::qotp::{KeySource, OtpKey};
use crate::scalar::Real;

/// Sifted-key error rate above which [`bb84_share`] aborts.
pub const QBER_ABORT_THRESHOLD: f64 = 0.11;

/// Raw rounds required per target key bit.
pub const BB84_ROUNDS_PER_BIT: usize = 8;

/// A phase `φ = 2πk / 2^bits` with `1 <= k < 2^bits`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct PhaseSecret {
    k: u64,
    bits: u32,
}

impl PhaseSecret {
    pub const DEFAULT_BITS: u32 = 8;

    pub fn new(k: u64, bits: u32) -> Result<Self> {
        if bits == 0 || bits > 63 || k == 0 || k >= 1u64 << bits {
            return Err(Error::InvalidPhase { k, bits });
        }
        Ok(PhaseSecret { k, bits })
    }

    /// Rounds `phi` to the nearest representable phase.
    pub fn quantize(phi: f64, bits: u32) -> Result<Self> {
        if !(1..=63).contains(&bits) {
            return Err(Error::InvalidPhase { k: 0, bits });
        }
        let scale = (1u64 << bits) as f64;
        let k = (phi.rem_euclid(std::f64::consts::TAU) / std::f64::consts::TAU * scale).round();
        Self::new(k as u64, bits)
    }

    /// φ = π, the phase of the worked example.
    pub fn pi(bits: u32) -> Result<Self> {
        if bits == 0 {
            return Err(Error::InvalidPhase { k: 0, bits });
        }
        Self::new(1u64 << (bits - 1), bits)
    }

    pub fn k(&self) -> u64 {
        self.k
    }

    pub fn bits(&self) -> u32 {
        self.bits
    }

    pub fn phi<T: Real>(&self) -> T {
        let tau = T::PI() + T::PI();
        tau * T::from_u64(self.k).expect("k fits")
            / T::from_u64(1u64 << self.bits).expect("2^bits fits")
    }

    /// Big-endian `bits`-long encoding of `k`.
    pub fn to_bits(&self) -> Bits {
        Bits::from_index(self.k as usize, self.bits as usize)
    }

    pub fn from_bits(bits: &Bits) -> Result<Self> {
        let width = bits.len() as u32;
        let k = bits.iter().fold(0u64, |acc, b| (acc << 1) | b as u64);
        Self::new(k, width)
    }
}

/// `K/N`: numerator `k` over an `N`-bit denominator `2^N`.
impl FromStr for PhaseSecret {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let bad = || Error::InvalidConfig(format!("phase {s:?} is not of the form K/N"));
        let (k, n) = s.split_once('/').ok_or_else(bad)?;
        let k = k.trim().parse::<u64>().map_err(|_| bad())?;
        let n = n.trim().parse::<u32>().map_err(|_| bad())?;
        Self::new(k, n)
    }
}

impl fmt::Display for PhaseSecret {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}/{}", self.k, self.bits)
    }
}

/// Whose key a channel carries; selects the measurement bill.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum ChannelRole {
    Signer,
    Verifier,
}

impl ChannelRole {
    fn step(self) -> MeasureStep {
        match self {
            ChannelRole::Signer => MeasureStep::SignerKeyEstablishment,
            ChannelRole::Verifier => MeasureStep::VerifierKeyEstablishment,
        }
    }
}

/// A point-to-point key channel between a party and the key generator.
#[derive(Debug)]
pub struct KeyChannel {
    endpoints: (String, String),
    role: ChannelRole,
    rng: ChaCha8Rng,
    ledger: Arc<CostLedger>,
    injected: VecDeque<Bits>,
    keys: Option<(OtpKey, OtpKey)>,
    phases: Option<(PhaseSecret, PhaseSecret)>,
}

impl KeyChannel {
    pub fn new(
        party: &str,
        skg: &str,
        role: ChannelRole,
        rng: ChaCha8Rng,
        ledger: Arc<CostLedger>,
    ) -> Self {
        KeyChannel {
            endpoints: (party.to_owned(), skg.to_owned()),
            role,
            rng,
            ledger,
            injected: VecDeque::new(),
            keys: None,
            phases: None,
        }
    }

    pub fn endpoints(&self) -> (&str, &str) {
        (&self.endpoints.0, &self.endpoints.1)
    }

    pub fn role(&self) -> ChannelRole {
        self.role
    }

    pub fn ledger(&self) -> &Arc<CostLedger> {
        &self.ledger
    }

    /// Queues fixed key bits to be handed out instead of fresh randomness.
    pub fn inject(&mut self, bits: Bits) {
        self.injected.push_back(bits);
    }

    /// The last established key as held by (party, key generator).
    pub fn keys(&self) -> Option<(&OtpKey, &OtpKey)> {
        self.keys.as_ref().map(|(a, b)| (a, b))
    }

    pub fn phases(&self) -> Option<(PhaseSecret, PhaseSecret)> {
        self.phases
    }
}

impl KeySource for KeyChannel {
    fn draw_bits(&mut self, len: usize) -> Result<Bits> {
        match self.injected.pop_front() {
            Some(bits) if bits.len() != len => Err(Error::InjectedKeyLength {
                expected: len,
                got: bits.len(),
            }),
            Some(bits) => Ok(bits),
            None => Ok(Bits::random(len, &mut self.rng)),
        }
    }
}

/// Ideal dealer: hands both endpoints the same `2n`-bit key.
pub fn dealer_share(channel: &mut KeyChannel, n: usize) -> Result<OtpKey> {
    let key = crate::qotp::keygen(n, channel)?;
    let len = key.len() as u64;
    channel.ledger.record(Event::QubitSend {
        count: len,
        leg: Leg::KeyEstablishment,
    });
    channel.ledger.record(Event::Measurement {
        count: len,
        step: channel.role.step(),
    });
    channel.keys = Some((key.clone(), key.clone()));
    Ok(key)
}

/// Intercept-resend attacker sitting on the quantum channel.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct InterceptResend;

/// Raw outcome of a sift-and-sample run, before any abort decision.
#[derive(Clone, Debug, PartialEq)]
pub struct Bb84Stats {
    pub raw_rounds: usize,
    pub sifted: usize,
    pub sampled: usize,
    pub qber: f64,
    pub alice_key: Bits,
    pub bob_key: Bits,
}

/// Random bits and bases on both sides; matching-basis rounds are kept and
/// the first half of them is disclosed to estimate the error rate.
pub fn bb84_simulate<R: Rng + ?Sized>(
    raw_rounds: usize,
    eavesdropper: Option<InterceptResend>,
    rng: &mut R,
) -> Bb84Stats {
    let mut alice = Vec::new();
    let mut bob = Vec::new();
    for _ in 0..raw_rounds {
        let (bit, basis_a, basis_b): (bool, bool, bool) = (rng.gen(), rng.gen(), rng.gen());
        let (mut sent_bit, mut sent_basis) = (bit, basis_a);
        if eavesdropper.is_some() {
            let basis_e: bool = rng.gen();
            let seen = if basis_e == sent_basis {
                sent_bit
            } else {
                rng.gen()
            };
            (sent_bit, sent_basis) = (seen, basis_e);
        }
        let got = if basis_b == sent_basis {
            sent_bit
        } else {
            rng.gen()
        };
        if basis_a == basis_b {
            alice.push(bit);
            bob.push(got);
        }
    }
    let sifted = alice.len();
    let sampled = sifted / 2;
    let errors = alice[..sampled]
        .iter()
        .zip(&bob[..sampled])
        .filter(|(a, b)| a != b)
        .count();
    let qber = if sampled == 0 {
        0.0
    } else {
        errors as f64 / sampled as f64
    };
    Bb84Stats {
        raw_rounds,
        sifted,
        sampled,
        qber,
        alice_key: Bits::new(alice[sampled..].to_vec()),
        bob_key: Bits::new(bob[sampled..].to_vec()),
    }
}

/// BB84 realization of the key step for an `n`-qubit payload (`2n` key bits).
///
/// Bills `raw_rounds` qubits and measurements to the channel's key step.
pub fn bb84_share(
    channel: &mut KeyChannel,
    n: usize,
    raw_rounds: usize,
    eavesdropper: Option<InterceptResend>,
) -> Result<(OtpKey, f64)> {
    if n == 0 {
        return Err(Error::ZeroQubits);
    }
    let target = 2 * n;
    if raw_rounds < BB84_ROUNDS_PER_BIT * target {
        return Err(Error::InsufficientSiftedBits {
            needed: BB84_ROUNDS_PER_BIT * target,
            got: raw_rounds,
        });
    }
    let stats = bb84_simulate(raw_rounds, eavesdropper, &mut channel.rng);
    channel.ledger.record(Event::QubitSend {
        count: raw_rounds as u64,
        leg: Leg::KeyEstablishment,
    });
    channel.ledger.record(Event::Measurement {
        count: raw_rounds as u64,
        step: channel.role.step(),
    });
    if stats.qber > QBER_ABORT_THRESHOLD {
        return Err(Error::QkdAborted { qber: stats.qber });
    }
    if stats.alice_key.len() < target {
        return Err(Error::InsufficientSiftedBits {
            needed: target,
            got: stats.alice_key.len(),
        });
    }
    let take = |b: &Bits| OtpKey::new(Bits::new(b.as_slice()[..target].to_vec()));
    let (a, b) = (take(&stats.alice_key), take(&stats.bob_key));
    channel.keys = Some((a.clone(), b));
    Ok((a, stats.qber))
}

/// Authenticated transfer of `φ` to the key generator over a keyed channel.
///
/// Bills `2·bits` qubits, `3·bits` measurements and `bits` conversions.
pub fn share_phase(channel: &mut KeyChannel, phi: PhaseSecret) -> Result<PhaseSecret> {
    if channel.keys.is_none() {
        return Err(Error::MissingPriorKey);
    }
    let n = phi.bits() as u64;
    channel.ledger.record(Event::QubitSend {
        count: 2 * n,
        leg: Leg::PhaseAuthentication,
    });
    channel.ledger.record(Event::Measurement {
        count: 3 * n,
        step: MeasureStep::PhaseAuthentication,
    });
    channel.ledger.record(Event::Conversion {
        count: n,
        step: ConvertStep::PhaseEncoding,
    });
    let received = PhaseSecret::from_bits(&phi.to_bits())?;
    channel.phases = Some((phi, received));
    Ok(received)
}
