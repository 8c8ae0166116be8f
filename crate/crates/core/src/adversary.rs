//! Executable security claims: forgery, Pauli tampering in transit, and
//! binding an accepted run to exactly one registered signer.
//!
//! Campaigns cross-check every protocol run against a per-qubit prediction.
//! All attacks here act on product messages, so the recovered state is a
//! product of 2x2 operators applied to single qubits and its fidelity with
//! the verifier's copy factorizes over qubits. That path never touches the
//! full statevector and is independent of the protocol implementation.

use std::fmt;
use std::str::FromStr;

use num_complex::Complex;
use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::bits::Bits;
use crate::costs::CostLedger;
use crate::error::{Error, Result};
use crate::keyestab::PhaseSecret;
use crate::noise::trial_rng;
use crate::protocol::{
    run_protocol_with_rng, signing_gate, Identity, Message, MessageSpec, Outcome, ProtocolConfig,
    SignatureTuple, Signer, SkgRegistry, Transcript, ACCEPT_EPSILON,
};
use crate::qotp::{decrypt, OtpKey};
use crate::scalar::Real;
use crate::statevector::{
    apply_all, apply_single, basis_state, fidelity, random_product_state, tensor, SingleQubitGate,
    StateVector,
};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Pauli {
    I,
    X,
    Y,
    Z,
}

impl Pauli {
    pub const ALL: [Pauli; 4] = [Pauli::I, Pauli::X, Pauli::Y, Pauli::Z];

    pub fn gate<T: Real>(self) -> SingleQubitGate<T> {
        match self {
            Pauli::I => SingleQubitGate::identity(),
            Pauli::X => SingleQubitGate::pauli_x(),
            Pauli::Y => SingleQubitGate::pauli_y(),
            Pauli::Z => SingleQubitGate::pauli_z(),
        }
    }

    fn label(self) -> char {
        match self {
            Pauli::I => 'I',
            Pauli::X => 'X',
            Pauli::Y => 'Y',
            Pauli::Z => 'Z',
        }
    }
}

/// Per-qubit Pauli labels, qubit 1 first.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct PauliString(Vec<Pauli>);

impl PauliString {
    pub fn new(labels: Vec<Pauli>) -> Self {
        PauliString(labels)
    }

    pub fn identity(m: usize) -> Self {
        PauliString(vec![Pauli::I; m])
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn labels(&self) -> &[Pauli] {
        &self.0
    }

    pub fn is_trivial(&self) -> bool {
        self.0.iter().all(|p| *p == Pauli::I)
    }

    /// Uniform over the `4^m - 1` strings with at least one non-I label.
    pub fn random_nontrivial<R: Rng + ?Sized>(m: usize, rng: &mut R) -> Self {
        let code = rng.gen_range(1..1usize << (2 * m));
        PauliString((0..m).map(|q| Pauli::ALL[(code >> (2 * q)) & 3]).collect())
    }

    pub fn apply<T: Real>(&self, state: &StateVector<T>) -> Result<StateVector<T>> {
        if state.num_qubits() != self.len() {
            return Err(Error::PauliLength {
                expected: state.num_qubits(),
                got: self.len(),
            });
        }
        let mut out = state.clone();
        for (q, p) in self.0.iter().enumerate() {
            if *p != Pauli::I {
                out = apply_single(&out, &p.gate(), q + 1)?;
            }
        }
        Ok(out)
    }
}

impl FromStr for PauliString {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        if s.is_empty() {
            return Err(Error::PauliLength {
                expected: 1,
                got: 0,
            });
        }
        s.chars()
            .map(|c| match c.to_ascii_uppercase() {
                'I' => Ok(Pauli::I),
                'X' => Ok(Pauli::X),
                'Y' => Ok(Pauli::Y),
                'Z' => Ok(Pauli::Z),
                _ => Err(Error::InvalidPauli(c)),
            })
            .collect::<Result<_>>()
            .map(PauliString)
    }
}

impl fmt::Display for PauliString {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.0.iter().try_for_each(|p| write!(f, "{}", p.label()))
    }
}

impl fmt::Debug for PauliString {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "PauliString({self})")
    }
}

/// What an attacker does to a run.
#[derive(Clone, Debug, PartialEq)]
pub enum Attack {
    /// Sign under the target's identity with the forger's own material.
    Forge { key: OtpKey, phi: PhaseSecret },
    /// Apply `V` to P and S in transit.
    Tamper(PauliString),
}

/// A structurally valid tuple for `target_id`, signed with foreign material.
pub fn forge<T: Real>(
    forger_key: &OtpKey,
    forger_phi: PhaseSecret,
    target_id: &Identity,
    message: &Message<T>,
    ledger: &CostLedger,
) -> Result<SignatureTuple<T>> {
    Signer::new(target_id.clone(), forger_key.clone(), forger_phi).sign(message, ledger)
}

/// `(V·P, V·S, ID)`.
pub fn pauli_tamper<T: Real>(
    tuple: &SignatureTuple<T>,
    v: &PauliString,
) -> Result<SignatureTuple<T>> {
    Ok(SignatureTuple {
        p: v.apply(&tuple.p)?,
        s: v.apply(&tuple.s)?,
        id: tuple.id.clone(),
    })
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Evidence {
    pub identity: Identity,
    pub t_i: OtpKey,
    pub phi: PhaseSecret,
    /// Fidelity of the matching record's recovery with the signed message.
    pub fidelity: f64,
    /// Every registered identity with its recovery fidelity.
    pub candidates: Vec<(Identity, f64)>,
}

/// Tries every registered `(T_i, φ_i)` on the accepted signature and
/// returns the single record that recovers P.
pub fn undeniability_trace<T: Real>(
    transcript: &Transcript<T>,
    registry: &SkgRegistry,
) -> Result<Evidence> {
    if transcript.outcome != Outcome::Accept {
        return Err(Error::NoAcceptingRun);
    }
    let tuple = &transcript.tuple;
    let mut candidates = Vec::new();
    let mut matches = Vec::new();
    for (id, rec) in registry.signers() {
        let rec_state = apply_all(
            &decrypt(&tuple.s, &rec.t_i)?,
            &signing_gate::<T>(&rec.phi).adjoint(),
        );
        let f = fidelity(&rec_state, &tuple.p)?;
        candidates.push((id.clone(), f));
        if f >= 1.0 - ACCEPT_EPSILON {
            matches.push((id, rec, f));
        }
    }
    match matches.as_slice() {
        [] => Err(Error::NoMatchingRecord),
        [(id, rec, f)] => Ok(Evidence {
            identity: (*id).clone(),
            t_i: rec.t_i.clone(),
            phi: rec.phi,
            fidelity: *f,
            candidates,
        }),
        many => Err(Error::AmbiguousEvidence(many.len())),
    }
}

fn sandwich(g: &SingleQubitGate<f64>, a: &StateVector<f64>, b: &StateVector<f64>) -> Complex<f64> {
    let (x, y) = (a.amplitudes(), b.amplitudes());
    let gy = [
        g.m[0][0] * y[0] + g.m[0][1] * y[1],
        g.m[1][0] * y[0] + g.m[1][1] * y[1],
    ];
    x[0].conj() * gy[0] + x[1].conj() * gy[1]
}

fn pad_gate(key: &OtpKey, q: usize) -> SingleQubitGate<f64> {
    let mut g = SingleQubitGate::identity();
    if key.z_bit(q) {
        g = SingleQubitGate::pauli_z().compose(&g);
    }
    if key.x_bit(q) {
        g = SingleQubitGate::pauli_x().compose(&g);
    }
    g
}

/// Predicted fidelity between P and the SKG recovery of a signature made
/// with `(sign_key, sign_phi)` and undone with `(skg_key, skg_phi)`, with
/// an optional tamper `V` hitting S and the verifier's copy of P alike.
pub fn predicted_fidelity(
    qubits: &[StateVector<f64>],
    sign_key: &OtpKey,
    sign_phi: &PhaseSecret,
    skg_key: &OtpKey,
    skg_phi: &PhaseSecret,
    tamper: Option<&PauliString>,
) -> f64 {
    let u_sign = signing_gate::<f64>(sign_phi);
    let u_skg_dag = signing_gate::<f64>(skg_phi).adjoint();
    qubits
        .iter()
        .enumerate()
        .map(|(i, p)| {
            let q = i + 1;
            let v = tamper.map_or(Pauli::I, |t| t.labels()[i]).gate::<f64>();
            let chain = u_skg_dag
                .compose(&pad_gate(skg_key, q).adjoint())
                .compose(&v)
                .compose(&pad_gate(sign_key, q))
                .compose(&u_sign);
            let held = apply_single(p, &v, 1).expect("one qubit");
            sandwich(&chain, &held, p).norm_sqr()
        })
        .product()
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MessageFamily {
    /// Random computational-basis messages.
    Basis,
    /// Random product states, each qubit uniform on the Bloch sphere.
    Product,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum AttackKind {
    Forgery,
    Pauli,
}

impl FromStr for AttackKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "forgery" | "forge" => Ok(AttackKind::Forgery),
            "pauli" => Ok(AttackKind::Pauli),
            other => Err(Error::InvalidConfig(format!(
                "unknown attack kind {other:?}; expected forgery or pauli"
            ))),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct CampaignConfig {
    pub m: usize,
    pub n: u32,
    pub messages: MessageFamily,
    /// Use the worked example's identity, keys, phase and message.
    pub toy: bool,
    /// Fixed tamper string; otherwise a fresh non-trivial one per trial.
    pub pauli: Option<PauliString>,
    /// Fixed forger material; otherwise fresh material per trial.
    pub forge_key: Option<OtpKey>,
    pub forge_phi: Option<PhaseSecret>,
}

impl CampaignConfig {
    pub fn new(m: usize, n: u32, messages: MessageFamily) -> Self {
        CampaignConfig {
            m,
            n,
            messages,
            toy: false,
            pauli: None,
            forge_key: None,
            forge_phi: None,
        }
    }

    pub fn toy() -> Self {
        CampaignConfig {
            toy: true,
            ..Self::new(3, PhaseSecret::DEFAULT_BITS, MessageFamily::Basis)
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct TrialRecord {
    pub trial: u64,
    pub outcome: Outcome,
    pub fidelity: f64,
    pub oracle_fidelity: f64,
    pub oracle_agrees: bool,
    /// Tamper string or forger key/phase used in this trial.
    pub detail: String,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CampaignReport {
    pub attack: AttackKind,
    pub trials: u64,
    pub rejected: u64,
    pub rejection_rate: Option<f64>,
    pub mean_fidelity: Option<f64>,
    pub oracle_agreements: u64,
    pub records: Vec<TrialRecord>,
}

impl CampaignReport {
    /// Trials the attacker got through.
    pub fn accepted(&self) -> impl Iterator<Item = &TrialRecord> {
        self.records.iter().filter(|r| r.outcome == Outcome::Accept)
    }
}

struct Trial {
    config: ProtocolConfig<f64>,
    qubits: Vec<StateVector<f64>>,
    sign: (OtpKey, PhaseSecret),
    skg: (OtpKey, PhaseSecret),
    tamper: Option<PauliString>,
    detail: String,
}

fn draw_message<R: Rng + ?Sized>(
    family: MessageFamily,
    m: usize,
    rng: &mut R,
) -> Vec<StateVector<f64>> {
    (0..m)
        .map(|_| match family {
            MessageFamily::Basis => basis_state(&Bits::random(1, rng)).expect("one bit"),
            MessageFamily::Product => random_product_state(1, rng),
        })
        .collect()
}

fn draw_phase<R: Rng + ?Sized>(n: u32, rng: &mut R) -> PhaseSecret {
    PhaseSecret::new(rng.gen_range(1..1u64 << n), n).expect("in range")
}

fn setup_trial(kind: AttackKind, cfg: &CampaignConfig, t: u64, seed: u64) -> Result<Trial> {
    let mut rng = trial_rng(seed ^ 0x5157_4144_5645_5253, t);
    let (m, n) = (cfg.m, cfg.n);
    let mut config = if cfg.toy {
        ProtocolConfig::toy()
    } else {
        let mut c = ProtocolConfig::honest(m, n, 0);
        c.identity = Some(Identity::new(Bits::random(m, &mut rng)));
        c.inject_ti = Some(OtpKey::new(Bits::random(2 * m, &mut rng)));
        c.inject_phi = Some(draw_phase(n, &mut rng));
        c
    };
    config.seed = t;
    let qubits = if cfg.toy {
        "010"
            .chars()
            .map(|c| basis_state(&c.to_string().parse().expect("bit")))
            .collect::<Result<_>>()?
    } else {
        draw_message(cfg.messages, m, &mut rng)
    };
    if !cfg.toy {
        let joint = qubits[1..]
            .iter()
            .fold(qubits[0].clone(), |acc, q| tensor(&acc, q));
        config.message = MessageSpec::Fixed(Message::Quantum(joint));
    }
    let t_i = config.inject_ti.clone().expect("set above");
    let phi = config.inject_phi.expect("set above");

    let (sign, tamper, detail) = match kind {
        AttackKind::Forgery => {
            let (key, fphi) = loop {
                let key = cfg
                    .forge_key
                    .clone()
                    .unwrap_or_else(|| OtpKey::new(Bits::random(2 * m, &mut rng)));
                let fphi = cfg.forge_phi.unwrap_or_else(|| draw_phase(n, &mut rng));
                let fixed = cfg.forge_key.is_some() && cfg.forge_phi.is_some();
                if fixed || key != t_i || fphi != phi {
                    break (key, fphi);
                }
            };
            config.attack = Some(Attack::Forge {
                key: key.clone(),
                phi: fphi,
            });
            let detail = format!("key={key} phi={fphi}");
            ((key, fphi), None, detail)
        }
        AttackKind::Pauli => {
            let v = cfg
                .pauli
                .clone()
                .unwrap_or_else(|| PauliString::random_nontrivial(m, &mut rng));
            config.attack = Some(Attack::Tamper(v.clone()));
            let detail = format!("V={v}");
            ((t_i.clone(), phi), Some(v), detail)
        }
    };
    Ok(Trial {
        config,
        qubits,
        sign,
        skg: (t_i, phi),
        tamper,
        detail,
    })
}

/// Runs one attack campaign; trials run in parallel with independent
/// per-trial generators.
pub fn run_campaign(
    kind: AttackKind,
    cfg: &CampaignConfig,
    trials: u64,
    seed: u64,
) -> Result<CampaignReport> {
    if cfg.toy && cfg.m != 3 {
        return Err(Error::InvalidConfig("the worked example has m = 3".into()));
    }
    if let Some(v) = &cfg.pauli {
        if v.len() != cfg.m {
            return Err(Error::PauliLength {
                expected: cfg.m,
                got: v.len(),
            });
        }
    }
    let records = (0..trials)
        .into_par_iter()
        .map(|t| {
            let trial = setup_trial(kind, cfg, t, seed)?;
            let tr = run_protocol_with_rng(&trial.config, &mut trial_rng(seed, t))?;
            let oracle = predicted_fidelity(
                &trial.qubits,
                &trial.sign.0,
                &trial.sign.1,
                &trial.skg.0,
                &trial.skg.1,
                trial.tamper.as_ref(),
            );
            let observed = tr.fidelity.unwrap_or(0.0);
            let predicted_outcome = if oracle >= 1.0 - ACCEPT_EPSILON {
                Outcome::Accept
            } else {
                Outcome::Reject
            };
            Ok(TrialRecord {
                trial: t,
                outcome: tr.outcome,
                fidelity: observed,
                oracle_fidelity: oracle,
                oracle_agrees: predicted_outcome == tr.outcome && (oracle - observed).abs() < 1e-9,
                detail: trial.detail,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let rejected = records
        .iter()
        .filter(|r| r.outcome == Outcome::Reject)
        .count() as u64;
    let (rate, mean) = if trials == 0 {
        (None, None)
    } else {
        let mean = records.iter().map(|r| r.fidelity).sum::<f64>() / trials as f64;
        (Some(rejected as f64 / trials as f64), Some(mean))
    };
    Ok(CampaignReport {
        attack: kind,
        trials,
        rejected,
        rejection_rate: rate,
        mean_fidelity: mean,
        oracle_agreements: records.iter().filter(|r| r.oracle_agrees).count() as u64,
        records,
    })
}

/// Forgery and Pauli campaigns with the same settings.
pub fn attack_suite(cfg: &CampaignConfig, trials: u64, seed: u64) -> Result<Vec<CampaignReport>> {
    [AttackKind::Forgery, AttackKind::Pauli]
        .into_iter()
        .map(|k| run_campaign(k, cfg, trials, seed))
        .collect()
}
