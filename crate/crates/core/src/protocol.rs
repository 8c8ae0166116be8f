//! The three-phase signature protocol as explicit party state machines.
//!
//! Initializing gives each signer a pad key `T_i` and phase `φ_i` shared
//! with the key generator (SKG), and gives the verifier a pad key `T_u`.
//! Signing produces `(P, S, ID)` with `S = E_{T_i}(U(π/2, φ_i, 0)^{⊗m} P)`.
//! Verification pads `S` and `ID` with `T_u` for the SKG, which unpads,
//! reads the identity, undoes the signer's layers and pads the recovered
//! state back for the verifier, who compares it against the held copy of P.
//!
//! `T_u` is `2m` bits and pads each `m`-qubit block (`S`, `ID`, the reply)
//! with the same bits.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;
use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Binomial, Distribution};
use serde::{Deserialize, Serialize};

use crate::adversary::{pauli_tamper, Attack};
use crate::bits::Bits;
use crate::costs::{ConvertStep, CostLedger, Event, LedgerSnapshot, Leg, MeasureStep};
use crate::error::{Error, Result};
use crate::keyestab::{dealer_share, share_phase, ChannelRole, KeyChannel, PhaseSecret};
use crate::noise::{apply_noise_all, NoiseModel};
use crate::qotp::{decrypt, encrypt, OtpKey};
use crate::scalar::Real;
use crate::statevector::{
    apply_all, basis_state, fidelity, measure_all, random_product_state, random_state, tensor,
    u_gate, SingleQubitGate, StateVector,
};

/// Fidelity slack of the exact comparator.
pub const ACCEPT_EPSILON: f64 = 1e-6;

/// Largest message size a run will simulate.
pub const MAX_MESSAGE_QUBITS: usize = 12;

pub const SKG_NAME: &str = "skg";

/// Classical identity string, one bit per message qubit.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Identity(Bits);

impl Identity {
    pub fn new(bits: Bits) -> Self {
        Identity(bits)
    }

    pub fn bits(&self) -> &Bits {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    fn check_len(&self, m: usize) -> Result<()> {
        if self.len() != m {
            return Err(Error::IdentityLength {
                expected: m,
                got: self.len(),
            });
        }
        Ok(())
    }
}

impl FromStr for Identity {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        s.parse().map(Identity)
    }
}

impl fmt::Display for Identity {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.0.fmt(f)
    }
}

impl fmt::Debug for Identity {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Identity({})", self.0)
    }
}

/// A message to be signed.
#[derive(Clone, Debug, PartialEq)]
pub enum Message<T: Real = f64> {
    /// Classical bits, prepared as a basis state.
    Classical(Bits),
    Quantum(StateVector<T>),
}

impl<T: Real> Message<T> {
    pub fn to_state(&self) -> Result<StateVector<T>> {
        match self {
            Message::Classical(bits) => basis_state(bits),
            Message::Quantum(s) => Ok(s.clone()),
        }
    }

    pub fn is_classical(&self) -> bool {
        matches!(self, Message::Classical(_))
    }
}

/// `U(π/2, φ, 0)`, the signer's per-qubit gate.
pub fn signing_gate<T: Real>(phi: &PhaseSecret) -> SingleQubitGate<T> {
    u_gate(T::FRAC_PI_2(), phi.phi(), T::zero())
}

/// `(P, S, ID)` as handed from signer to verifier.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SignatureTuple<T: Real = f64> {
    pub p: StateVector<T>,
    pub s: StateVector<T>,
    pub id: StateVector<T>,
}

impl<T: Real> SignatureTuple<T> {
    pub fn num_qubits(&self) -> usize {
        self.p.num_qubits()
    }

    fn check(&self) -> Result<usize> {
        let m = self.p.num_qubits();
        for other in [&self.s, &self.id] {
            if other.num_qubits() != m {
                return Err(Error::DimensionMismatch {
                    left: m,
                    right: other.num_qubits(),
                });
            }
        }
        Ok(m)
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct SignerRecord {
    pub t_i: OtpKey,
    pub phi: PhaseSecret,
}

/// Everything the key generator knows after initializing.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize)]
pub struct SkgRegistry {
    m: usize,
    signers: BTreeMap<Identity, SignerRecord>,
    verifier: Option<OtpKey>,
}

impl SkgRegistry {
    pub fn new(m: usize) -> Self {
        SkgRegistry {
            m,
            ..Default::default()
        }
    }

    pub fn m(&self) -> usize {
        self.m
    }

    pub fn register_signer(&mut self, id: Identity, record: SignerRecord) -> Result<()> {
        id.check_len(self.m)?;
        record_key_len(&record.t_i, self.m)?;
        if self.signers.contains_key(&id) {
            return Err(Error::DuplicateIdentity(id.to_string()));
        }
        self.signers.insert(id, record);
        Ok(())
    }

    pub fn register_verifier(&mut self, t_u: OtpKey) -> Result<()> {
        record_key_len(&t_u, self.m)?;
        self.verifier = Some(t_u);
        Ok(())
    }

    pub fn signer(&self, id: &Identity) -> Option<&SignerRecord> {
        self.signers.get(id)
    }

    pub fn signers(&self) -> impl Iterator<Item = (&Identity, &SignerRecord)> {
        self.signers.iter()
    }

    pub fn verifier_key(&self) -> Option<&OtpKey> {
        self.verifier.as_ref()
    }

    /// Unpads, identifies and recovers, exposing every intermediate.
    pub fn recover<T: Real, R: Rng + ?Sized>(
        &self,
        req: &VerifyRequest<T>,
        rng: &mut R,
        ledger: &CostLedger,
    ) -> Result<Recovery<T>> {
        let m = self.m;
        let t_u = self.verifier.as_ref().ok_or(Error::MissingPriorKey)?;
        for st in [&req.s, &req.id] {
            if st.num_qubits() != m {
                return Err(Error::DimensionMismatch {
                    left: m,
                    right: st.num_qubits(),
                });
            }
        }
        let s = decrypt(&req.s, t_u)?;
        bill(ledger, MeasureStep::SkgUnpadsSignature, m);
        let id_state = decrypt(&req.id, t_u)?;
        bill(ledger, MeasureStep::SkgUnpadsIdentity, m);
        let identity = Identity(measure_all(&id_state, rng));
        bill(ledger, MeasureStep::SkgReadsIdentity, m);
        let record = self
            .signers
            .get(&identity)
            .ok_or_else(|| Error::UnknownIdentity(identity.to_string()))?;
        let unpadded = decrypt(&s, &record.t_i)?;
        bill(ledger, MeasureStep::SkgUnpadsWithTi, m);
        let recovered = apply_all(&unpadded, &signing_gate::<T>(&record.phi).adjoint());
        bill(ledger, MeasureStep::SkgAppliesUDagger, m);
        let response = encrypt(&recovered, t_u)?;
        bill(ledger, MeasureStep::SkgPadsResponse, m);
        ledger.record(Event::QubitSend {
            count: m as u64,
            leg: Leg::SkgResponse,
        });
        Ok(Recovery {
            signature: s,
            identity_state: id_state,
            identity,
            unpadded,
            recovered,
            response,
        })
    }

    /// [`recover`](Self::recover), with an unknown identity turned into a
    /// reject signal instead of an error.
    pub fn respond<T: Real, R: Rng + ?Sized>(
        &self,
        req: &VerifyRequest<T>,
        rng: &mut R,
        ledger: &CostLedger,
    ) -> Result<SkgResponse<T>> {
        match self.recover(req, rng, ledger) {
            Ok(rec) => Ok(SkgResponse::Reply(rec.response)),
            Err(Error::UnknownIdentity(id)) => Ok(SkgResponse::Reject { identity: id }),
            Err(e) => Err(e),
        }
    }
}

fn record_key_len(key: &OtpKey, m: usize) -> Result<()> {
    if key.len() != 2 * m {
        return Err(Error::InjectedKeyLength {
            expected: 2 * m,
            got: key.len(),
        });
    }
    Ok(())
}

fn bill(ledger: &CostLedger, step: MeasureStep, m: usize) {
    let (a, _) = step.coefficients();
    ledger.record(Event::Measurement {
        count: a * m as u64,
        step,
    });
}

/// SKG intermediates for one request.
#[derive(Clone, Debug, PartialEq)]
pub struct Recovery<T: Real = f64> {
    /// `D_{T_u}` of the padded signature.
    pub signature: StateVector<T>,
    /// `D_{T_u}` of the padded identity.
    pub identity_state: StateVector<T>,
    pub identity: Identity,
    /// `D_{T_i}` of the signature.
    pub unpadded: StateVector<T>,
    /// `P' = (U†)^{⊗m} D_{T_i}(S)`.
    pub recovered: StateVector<T>,
    /// `R = E_{T_u}(P')`.
    pub response: StateVector<T>,
}

#[derive(Clone, Debug, PartialEq)]
pub enum SkgResponse<T: Real = f64> {
    Reply(StateVector<T>),
    Reject { identity: String },
}

/// A signer's view: its identity and, once initialized, its key material.
#[derive(Clone, Debug, PartialEq)]
pub struct Signer {
    id: Identity,
    material: Option<SignerRecord>,
}

impl Signer {
    pub fn new(id: Identity, t_i: OtpKey, phi: PhaseSecret) -> Self {
        Signer {
            id,
            material: Some(SignerRecord { t_i, phi }),
        }
    }

    pub fn unregistered(id: Identity) -> Self {
        Signer { id, material: None }
    }

    pub fn id(&self) -> &Identity {
        &self.id
    }

    pub fn material(&self) -> Option<&SignerRecord> {
        self.material.as_ref()
    }

    /// Signs `message` and bills the signing steps and the delivery of the
    /// tuple to the verifier.
    pub fn sign<T: Real>(
        &self,
        message: &Message<T>,
        ledger: &CostLedger,
    ) -> Result<SignatureTuple<T>> {
        let rec = self.material.as_ref().ok_or(Error::UninitializedSigner)?;
        let m = self.id.len();
        let p = message.to_state()?;
        if p.num_qubits() != m {
            return Err(Error::DimensionMismatch {
                left: m,
                right: p.num_qubits(),
            });
        }
        let rotated = apply_all(&p, &signing_gate::<T>(&rec.phi));
        bill(ledger, MeasureStep::SignerAppliesU, m);
        let s = encrypt(&rotated, &rec.t_i)?;
        bill(ledger, MeasureStep::SignerPadsWithTi, m);
        let id = basis_state(self.id.bits())?;
        let convert = |step: ConvertStep| {
            ledger.record(Event::Conversion {
                count: step.coefficients().0 * m as u64,
                step,
            })
        };
        convert(ConvertStep::IdentityEncoding);
        if message.is_classical() {
            convert(ConvertStep::MessagePreparation);
        }
        ledger.record(Event::QubitSend {
            count: 3 * m as u64,
            leg: Leg::SignatureDelivery,
        });
        Ok(SignatureTuple { p, s, id })
    }
}

/// `(E_{T_u}(S), E_{T_u}(ID))` as sent from verifier to SKG.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct VerifyRequest<T: Real = f64> {
    pub s: StateVector<T>,
    pub id: StateVector<T>,
}

/// How the verifier compares the unpadded reply with its copy of P.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Comparator {
    /// Exact fidelity against `1 - ACCEPT_EPSILON`.
    Exact,
    /// Swap-test estimate from `shots` circuit runs.
    Swap { shots: u64 },
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Outcome {
    Accept,
    Reject,
}

impl fmt::Display for Outcome {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Outcome::Accept => "accept",
            Outcome::Reject => "reject",
        })
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Verdict<T: Real = f64> {
    pub outcome: Outcome,
    /// Exact fidelity of the unpadded reply with P, when a reply arrived.
    pub fidelity: Option<f64>,
    pub swap_estimate: Option<f64>,
    pub decrypted: Option<StateVector<T>>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Verifier<T: Real = f64> {
    t_u: OtpKey,
    pending: Option<StateVector<T>>,
}

impl<T: Real> Verifier<T> {
    pub fn new(t_u: OtpKey) -> Self {
        Verifier { t_u, pending: None }
    }

    pub fn key(&self) -> &OtpKey {
        &self.t_u
    }

    pub fn pending(&self) -> Option<&StateVector<T>> {
        self.pending.as_ref()
    }

    /// Keeps P and pads `S` and `ID` for the SKG.
    pub fn verify_request(
        &mut self,
        tuple: &SignatureTuple<T>,
        ledger: &CostLedger,
    ) -> Result<VerifyRequest<T>> {
        let m = tuple.check()?;
        let s = encrypt(&tuple.s, &self.t_u)?;
        bill(ledger, MeasureStep::VerifierPadsSignature, m);
        let id = encrypt(&tuple.id, &self.t_u)?;
        bill(ledger, MeasureStep::VerifierPadsIdentity, m);
        ledger.record(Event::QubitSend {
            count: 2 * m as u64,
            leg: Leg::VerificationRequest,
        });
        self.pending = Some(tuple.p.clone());
        Ok(VerifyRequest { s, id })
    }

    /// Unpads the reply and compares it with the held P.
    pub fn finalize<R: Rng + ?Sized>(
        &mut self,
        response: &SkgResponse<T>,
        comparator: Comparator,
        rng: &mut R,
        ledger: &CostLedger,
    ) -> Result<Verdict<T>> {
        let p = self.pending.take().ok_or(Error::NoPendingVerification)?;
        let r = match response {
            SkgResponse::Reject { .. } => {
                return Ok(Verdict {
                    outcome: Outcome::Reject,
                    fidelity: None,
                    swap_estimate: None,
                    decrypted: None,
                })
            }
            SkgResponse::Reply(r) => r,
        };
        let decrypted = decrypt(r, &self.t_u)?;
        bill(ledger, MeasureStep::VerifierUnpadsResponse, p.num_qubits());
        let f = fidelity(&decrypted, &p)?;
        let (accept, swap_estimate) = match comparator {
            Comparator::Exact => (f >= 1.0 - ACCEPT_EPSILON, None),
            Comparator::Swap { shots } => {
                let est = swap_test(&decrypted, &p, shots, rng)?;
                (est >= 1.0 - ACCEPT_EPSILON, Some(est))
            }
        };
        Ok(Verdict {
            outcome: if accept {
                Outcome::Accept
            } else {
                Outcome::Reject
            },
            fidelity: Some(f),
            swap_estimate,
            decrypted: Some(decrypted),
        })
    }
}

/// Probability that the swap-test ancilla reads 0, from simulating
/// H, controlled-SWAP(a, b), H on `|0⟩|a⟩|b⟩`.
pub fn swap_test_p0<T: Real>(a: &StateVector<T>, b: &StateVector<T>) -> Result<f64> {
    let m = a.num_qubits();
    if b.num_qubits() != m {
        return Err(Error::DimensionMismatch {
            left: m,
            right: b.num_qubits(),
        });
    }
    let h = SingleQubitGate::<T>::hadamard();
    let zero = basis_state::<T>(&Bits::zeros(1))?;
    let joint = tensor(&zero, &tensor(a, b));
    let mut state = crate::statevector::apply_single(&joint, &h, 1)?;

    let half = 1usize << (2 * m);
    let mask = (1usize << m) - 1;
    let mut amps = state.amplitudes().to_vec();
    for i in 0..half {
        let (hi, lo) = (i >> m, i & mask);
        if hi < lo {
            amps.swap(half + i, half + ((lo << m) | hi));
        }
    }
    state = StateVector::from_amplitudes(amps)?;
    state = crate::statevector::apply_single(&state, &h, 1)?;
    let p0: f64 = state.probabilities()[..half].iter().sum();
    Ok(p0.clamp(0.0, 1.0))
}

/// Swap-test fidelity estimate `2f - 1`, clamped to [0, 1], where `f` is
/// the observed ancilla-zero frequency over `shots` runs.
pub fn swap_test<T: Real, R: Rng + ?Sized>(
    a: &StateVector<T>,
    b: &StateVector<T>,
    shots: u64,
    rng: &mut R,
) -> Result<f64> {
    if shots == 0 {
        return Err(Error::InvalidConfig(
            "swap test needs at least one shot".into(),
        ));
    }
    let p0 = swap_test_p0(a, b)?;
    let zeros = Binomial::new(shots, p0)
        .map_err(|e| Error::InvalidConfig(e.to_string()))?
        .sample(rng);
    Ok((2.0 * zeros as f64 / shots as f64 - 1.0).clamp(0.0, 1.0))
}

/// Key material for one signer at initialization; `None` fields are drawn.
#[derive(Clone, Debug, PartialEq)]
pub struct SignerSetup {
    pub id: Identity,
    pub t_i: Option<OtpKey>,
    pub phi: Option<PhaseSecret>,
}

impl SignerSetup {
    pub fn random(id: Identity) -> Self {
        SignerSetup {
            id,
            t_i: None,
            phi: None,
        }
    }
}

#[derive(Debug)]
pub struct Initialized<T: Real = f64> {
    pub registry: SkgRegistry,
    pub signers: Vec<Signer>,
    pub verifier: Verifier<T>,
}

/// Shares `(T_i, φ_i)` with every signer and `T_u` with the verifier.
pub fn initialize<T: Real, R: Rng + ?Sized>(
    setups: &[SignerSetup],
    inject_tu: Option<OtpKey>,
    m: usize,
    n: u32,
    rng: &mut R,
    ledger: &Arc<CostLedger>,
) -> Result<Initialized<T>> {
    if m == 0 {
        return Err(Error::ZeroQubits);
    }
    let mut seen = std::collections::BTreeSet::new();
    for s in setups {
        s.id.check_len(m)?;
        if !seen.insert(&s.id) {
            return Err(Error::DuplicateIdentity(s.id.to_string()));
        }
    }
    let mut registry = SkgRegistry::new(m);
    let mut signers = Vec::with_capacity(setups.len());
    for s in setups {
        let mut ch = KeyChannel::new(
            &s.id.to_string(),
            SKG_NAME,
            ChannelRole::Signer,
            ChaCha8Rng::from_rng(&mut *rng).expect("chacha seeding is infallible"),
            ledger.clone(),
        );
        if let Some(k) = &s.t_i {
            ch.inject(k.bits().clone());
        }
        let t_i = dealer_share(&mut ch, m)?;
        let phi = match s.phi {
            Some(p) if p.bits() != n => return Err(Error::InvalidPhase { k: p.k(), bits: n }),
            Some(p) => p,
            None => PhaseSecret::new(rng.gen_range(1..1u64 << n), n)?,
        };
        let phi = share_phase(&mut ch, phi)?;
        registry.register_signer(
            s.id.clone(),
            SignerRecord {
                t_i: t_i.clone(),
                phi,
            },
        )?;
        signers.push(Signer::new(s.id.clone(), t_i, phi));
    }
    let mut ch = KeyChannel::new(
        "verifier",
        SKG_NAME,
        ChannelRole::Verifier,
        ChaCha8Rng::from_rng(&mut *rng).expect("chacha seeding is infallible"),
        ledger.clone(),
    );
    if let Some(k) = inject_tu {
        ch.inject(k.bits().clone());
    }
    let t_u = dealer_share(&mut ch, m)?;
    registry.register_verifier(t_u.clone())?;
    Ok(Initialized {
        registry,
        signers,
        verifier: Verifier::new(t_u),
    })
}

/// Where the signed message comes from.
#[derive(Clone, Debug, PartialEq)]
pub enum MessageSpec<T: Real = f64> {
    Fixed(Message<T>),
    RandomBasis,
    RandomProduct,
    RandomHaar,
}

#[derive(Clone, Debug, PartialEq)]
pub struct ProtocolConfig<T: Real = f64> {
    pub m: usize,
    pub n: u32,
    /// Signer identity; drawn at random when `None`.
    pub identity: Option<Identity>,
    /// Further registered signers, each with random key material.
    pub other_signers: Vec<Identity>,
    pub message: MessageSpec<T>,
    pub inject_ti: Option<OtpKey>,
    pub inject_tu: Option<OtpKey>,
    pub inject_phi: Option<PhaseSecret>,
    pub seed: u64,
    pub noise: Option<NoiseModel>,
    pub comparator: Comparator,
    pub attack: Option<Attack>,
    pub record_states: bool,
}

impl<T: Real> ProtocolConfig<T> {
    /// Random honest run with classical basis-state messages.
    pub fn honest(m: usize, n: u32, seed: u64) -> Self {
        ProtocolConfig {
            m,
            n,
            identity: None,
            other_signers: Vec::new(),
            message: MessageSpec::RandomBasis,
            inject_ti: None,
            inject_tu: None,
            inject_phi: None,
            seed,
            noise: None,
            comparator: Comparator::Exact,
            attack: None,
            record_states: false,
        }
    }

    /// The worked example: ID 011, P = |010⟩, T_i = 010110, T_u = 100101, φ = π.
    pub fn toy() -> Self {
        let parse = |s: &str| s.parse::<OtpKey>().expect("literal key");
        ProtocolConfig {
            identity: Some("011".parse().expect("literal id")),
            message: MessageSpec::Fixed(Message::Classical("010".parse().expect("literal bits"))),
            inject_ti: Some(parse("010110")),
            inject_tu: Some(parse("100101")),
            inject_phi: Some(PhaseSecret::pi(PhaseSecret::DEFAULT_BITS).expect("valid")),
            ..Self::honest(3, PhaseSecret::DEFAULT_BITS, 0)
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.m == 0 {
            return Err(Error::ZeroQubits);
        }
        if self.m > MAX_MESSAGE_QUBITS {
            return Err(Error::InvalidConfig(format!(
                "message size {} exceeds the simulator limit of {MAX_MESSAGE_QUBITS} qubits",
                self.m
            )));
        }
        if self.n == 0 || self.n > 63 {
            return Err(Error::InvalidConfig(format!(
                "phase length {} must be in 1..=63",
                self.n
            )));
        }
        if let Some(id) = &self.identity {
            id.check_len(self.m)?;
        }
        for key in [&self.inject_ti, &self.inject_tu].into_iter().flatten() {
            record_key_len(key, self.m)?;
        }
        if let Some(p) = self.inject_phi {
            if p.bits() != self.n {
                return Err(Error::InvalidConfig(format!(
                    "injected phase {p} has {} bits but n = {}",
                    p.bits(),
                    self.n
                )));
            }
        }
        if let MessageSpec::Fixed(msg) = &self.message {
            let got = msg.to_state()?.num_qubits();
            if got != self.m {
                return Err(Error::DimensionMismatch {
                    left: self.m,
                    right: got,
                });
            }
        }
        match &self.attack {
            Some(Attack::Forge { key, phi }) => {
                record_key_len(key, self.m)?;
                if phi.bits() != self.n {
                    return Err(Error::InvalidConfig(format!(
                        "forged phase {phi} must have {} bits",
                        self.n
                    )));
                }
            }
            Some(Attack::Tamper(v)) if v.len() != self.m => {
                return Err(Error::PauliLength {
                    expected: self.m,
                    got: v.len(),
                })
            }
            _ => {}
        }
        if let Comparator::Swap { shots: 0 } = self.comparator {
            return Err(Error::InvalidConfig(
                "swap comparator needs at least one shot".into(),
            ));
        }
        Ok(())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Party {
    Signer,
    Verifier,
    Skg,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum MessageKind {
    KeyEstablishment,
    PhaseAuthentication,
    SignatureTuple,
    VerificationRequest,
    SkgResponse,
    RejectSignal,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct TranscriptEntry {
    pub from: Party,
    pub to: Party,
    pub kind: MessageKind,
    pub qubits: u64,
}

/// Every state the walkthrough passes through.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct StateTrace<T: Real = f64> {
    pub message: StateVector<T>,
    pub rotated: StateVector<T>,
    pub signature: StateVector<T>,
    pub identity: StateVector<T>,
    pub request_signature: StateVector<T>,
    pub request_identity: StateVector<T>,
    pub recovery: Option<TraceRecovery<T>>,
    pub verifier_decrypted: Option<StateVector<T>>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct TraceRecovery<T: Real = f64> {
    pub identity: Identity,
    pub unpadded: StateVector<T>,
    pub recovered: StateVector<T>,
    pub response: StateVector<T>,
}

#[derive(Clone, Debug, Serialize)]
pub struct Transcript<T: Real = f64> {
    pub m: usize,
    pub n: u32,
    pub identity: Identity,
    pub messages: Vec<TranscriptEntry>,
    pub outcome: Outcome,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub reject_reason: Option<String>,
    pub fidelity: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub swap_estimate: Option<f64>,
    /// Computational-basis readout of the verifier's unpadded reply.
    pub measured: Option<Bits>,
    pub ledger: LedgerSnapshot,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub trace: Option<StateTrace<T>>,
    /// Whether P was prepared from classical bits.
    #[serde(skip)]
    pub classical_message: bool,
    #[serde(skip)]
    pub tuple: SignatureTuple<T>,
    #[serde(skip)]
    pub registry: SkgRegistry,
}

impl<T: Real> Transcript<T> {
    pub fn total_qubits(&self) -> u64 {
        self.messages.iter().map(|e| e.qubits).sum()
    }
}

/// Runs with a generator seeded from `config.seed`.
pub fn run_protocol<T: Real>(config: &ProtocolConfig<T>) -> Result<Transcript<T>> {
    run_protocol_with_rng(config, &mut ChaCha8Rng::seed_from_u64(config.seed))
}

/// Initialize, sign, request, respond and finalize in one go.
///
/// Noise draws come from a generator split off `rng` before anything else,
/// so a noiseless model leaves every other draw unchanged.
pub fn run_protocol_with_rng<T: Real>(
    config: &ProtocolConfig<T>,
    rng: &mut ChaCha8Rng,
) -> Result<Transcript<T>> {
    config.validate()?;
    let (m, n) = (config.m, config.n);
    let mut noise_rng = ChaCha8Rng::from_rng(&mut *rng).expect("chacha seeding is infallible");
    let mut transmit = |s: &StateVector<T>| match &config.noise {
        Some(model) => apply_noise_all(s, model, &mut noise_rng),
        None => s.clone(),
    };

    let identity = match &config.identity {
        Some(id) => id.clone(),
        None => Identity(Bits::random(m, rng)),
    };
    let message = match &config.message {
        MessageSpec::Fixed(msg) => msg.clone(),
        MessageSpec::RandomBasis => Message::Classical(Bits::random(m, rng)),
        MessageSpec::RandomProduct => Message::Quantum(random_product_state(m, rng)),
        MessageSpec::RandomHaar => Message::Quantum(random_state(m, rng)),
    };

    let mut setups = vec![SignerSetup {
        id: identity.clone(),
        t_i: config.inject_ti.clone(),
        phi: config.inject_phi,
    }];
    setups.extend(
        config
            .other_signers
            .iter()
            .cloned()
            .map(SignerSetup::random),
    );
    let ledger = Arc::new(CostLedger::new());
    let init = initialize::<T, _>(&setups, config.inject_tu.clone(), m, n, rng, &ledger)?;
    let (registry, mut verifier) = (init.registry, init.verifier);

    let mut messages = Vec::new();
    for _ in &setups {
        messages.push(entry(
            Party::Signer,
            Party::Skg,
            MessageKind::KeyEstablishment,
            2 * m,
        ));
        messages.push(entry(
            Party::Signer,
            Party::Skg,
            MessageKind::PhaseAuthentication,
            2 * n as usize,
        ));
    }
    messages.push(entry(
        Party::Verifier,
        Party::Skg,
        MessageKind::KeyEstablishment,
        2 * m,
    ));

    let signer = match &config.attack {
        Some(Attack::Forge { key, phi }) => Signer::new(identity.clone(), key.clone(), *phi),
        _ => init.signers[0].clone(),
    };
    let signed = signer.sign(&message, &ledger)?;
    let rotated = apply_all(
        &signed.p,
        &signing_gate::<T>(&signer.material().expect("initialized").phi),
    );
    let sent = match &config.attack {
        Some(Attack::Tamper(v)) => pauli_tamper(&signed, v)?,
        _ => signed.clone(),
    };
    messages.push(entry(
        Party::Signer,
        Party::Verifier,
        MessageKind::SignatureTuple,
        3 * m,
    ));
    let delivered = SignatureTuple {
        p: transmit(&sent.p),
        s: transmit(&sent.s),
        id: transmit(&sent.id),
    };

    let request = verifier.verify_request(&delivered, &ledger)?;
    messages.push(entry(
        Party::Verifier,
        Party::Skg,
        MessageKind::VerificationRequest,
        2 * m,
    ));
    let arrived = VerifyRequest {
        s: transmit(&request.s),
        id: transmit(&request.id),
    };

    let (response, recovery, reject_reason) = match registry.recover(&arrived, rng, &ledger) {
        Ok(rec) => {
            messages.push(entry(
                Party::Skg,
                Party::Verifier,
                MessageKind::SkgResponse,
                m,
            ));
            let r = transmit(&rec.response);
            (SkgResponse::Reply(r), Some(rec), None)
        }
        Err(Error::UnknownIdentity(id)) => {
            messages.push(entry(
                Party::Skg,
                Party::Verifier,
                MessageKind::RejectSignal,
                0,
            ));
            let reason = format!("identity {id} is not registered");
            (SkgResponse::Reject { identity: id }, None, Some(reason))
        }
        Err(e) => return Err(e),
    };

    let verdict = verifier.finalize(&response, config.comparator, rng, &ledger)?;
    let measured = verdict.decrypted.as_ref().map(|d| measure_all(d, rng));
    let reject_reason = reject_reason.or_else(|| {
        (verdict.outcome == Outcome::Reject).then(|| match verdict.swap_estimate {
            Some(e) => format!("swap-test estimate {e:.6} below threshold"),
            None => format!(
                "fidelity {:.6} below threshold",
                verdict.fidelity.unwrap_or(0.0)
            ),
        })
    });

    let trace = config.record_states.then(|| StateTrace {
        message: signed.p.clone(),
        rotated,
        signature: signed.s.clone(),
        identity: signed.id.clone(),
        request_signature: request.s.clone(),
        request_identity: request.id.clone(),
        recovery: recovery.as_ref().map(|r| TraceRecovery {
            identity: r.identity.clone(),
            unpadded: r.unpadded.clone(),
            recovered: r.recovered.clone(),
            response: r.response.clone(),
        }),
        verifier_decrypted: verdict.decrypted.clone(),
    });

    Ok(Transcript {
        m,
        n,
        identity,
        messages,
        outcome: verdict.outcome,
        reject_reason,
        fidelity: verdict.fidelity,
        swap_estimate: verdict.swap_estimate,
        measured,
        ledger: ledger.snapshot(),
        trace,
        classical_message: message.is_classical(),
        tuple: signed,
        registry,
    })
}

fn entry(from: Party, to: Party, kind: MessageKind, qubits: usize) -> TranscriptEntry {
    TranscriptEntry {
        from,
        to,
        kind,
        qubits: qubits as u64,
    }
}
