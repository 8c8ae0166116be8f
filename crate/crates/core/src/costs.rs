//! Resource accounting for one protocol run.
//!
//! Qubits are counted per transmission leg. Basic measurements (unit δ)
//! and classical-to-qubit conversions (unit β) are counted per protocol
//! step, and every step has a fixed coefficient in the mapping tables
//! below, so the closed forms
//!
//! * communication: `10m + 2n` qubits
//! * computation: `(23m + 3n)δ + (3m + n)β`
//!
//! can be reconciled line by line against an instrumented run.
//!
//! Billing convention for δ: each one-time-pad pass over an `m`-qubit
//! register costs `2m` (one per key bit), each layer of `U` or `U†` costs
//! `m`, and reading out the identity register costs `m`. The final state
//! comparison is not billed.

use std::collections::BTreeMap;
use std::sync::atomic::{AtomicU64, Ordering};

use serde::Serialize;

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Phase {
    Initializing,
    Signing,
    Verification,
}

/// A quantum transmission between two parties.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Leg {
    /// QKD of `T_i` (signer/SKG) and `T_u` (verifier/SKG).
    KeyEstablishment,
    /// Authenticated transfer of the `n`-bit phase secret.
    PhaseAuthentication,
    /// Signer to verifier: `(|P⟩, |S⟩, |ID⟩)`.
    SignatureDelivery,
    /// Verifier to SKG: `E_{T_u}(|S⟩, |ID⟩)`.
    VerificationRequest,
    /// SKG to verifier: `|R⟩`.
    SkgResponse,
}

impl Leg {
    pub const ALL: [Leg; 5] = [
        Leg::KeyEstablishment,
        Leg::PhaseAuthentication,
        Leg::SignatureDelivery,
        Leg::VerificationRequest,
        Leg::SkgResponse,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Leg::KeyEstablishment => "key_establishment",
            Leg::PhaseAuthentication => "phase_authentication",
            Leg::SignatureDelivery => "signature_delivery",
            Leg::VerificationRequest => "verification_request",
            Leg::SkgResponse => "skg_response",
        }
    }

    pub fn phase(self) -> Phase {
        match self {
            Leg::KeyEstablishment | Leg::PhaseAuthentication => Phase::Initializing,
            Leg::SignatureDelivery => Phase::Signing,
            Leg::VerificationRequest | Leg::SkgResponse => Phase::Verification,
        }
    }

    /// Qubits per run as `(coefficient of m, coefficient of n)`.
    pub fn coefficients(self) -> (u64, u64) {
        match self {
            Leg::KeyEstablishment => (4, 0),
            Leg::PhaseAuthentication => (0, 2),
            Leg::SignatureDelivery => (3, 0),
            Leg::VerificationRequest => (2, 0),
            Leg::SkgResponse => (1, 0),
        }
    }
}

/// Protocol steps billed in units of δ.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum MeasureStep {
    SignerKeyEstablishment,
    VerifierKeyEstablishment,
    PhaseAuthentication,
    SignerAppliesU,
    SignerPadsWithTi,
    VerifierPadsSignature,
    VerifierPadsIdentity,
    SkgUnpadsSignature,
    SkgUnpadsIdentity,
    SkgReadsIdentity,
    SkgUnpadsWithTi,
    SkgAppliesUDagger,
    SkgPadsResponse,
    VerifierUnpadsResponse,
}

impl MeasureStep {
    pub const ALL: [MeasureStep; 14] = [
        MeasureStep::SignerKeyEstablishment,
        MeasureStep::VerifierKeyEstablishment,
        MeasureStep::PhaseAuthentication,
        MeasureStep::SignerAppliesU,
        MeasureStep::SignerPadsWithTi,
        MeasureStep::VerifierPadsSignature,
        MeasureStep::VerifierPadsIdentity,
        MeasureStep::SkgUnpadsSignature,
        MeasureStep::SkgUnpadsIdentity,
        MeasureStep::SkgReadsIdentity,
        MeasureStep::SkgUnpadsWithTi,
        MeasureStep::SkgAppliesUDagger,
        MeasureStep::SkgPadsResponse,
        MeasureStep::VerifierUnpadsResponse,
    ];

    pub fn name(self) -> &'static str {
        use MeasureStep::*;
        match self {
            SignerKeyEstablishment => "signer_key_establishment",
            VerifierKeyEstablishment => "verifier_key_establishment",
            PhaseAuthentication => "phase_authentication",
            SignerAppliesU => "signer_applies_u",
            SignerPadsWithTi => "signer_pads_with_ti",
            VerifierPadsSignature => "verifier_pads_signature",
            VerifierPadsIdentity => "verifier_pads_identity",
            SkgUnpadsSignature => "skg_unpads_signature",
            SkgUnpadsIdentity => "skg_unpads_identity",
            SkgReadsIdentity => "skg_reads_identity",
            SkgUnpadsWithTi => "skg_unpads_with_ti",
            SkgAppliesUDagger => "skg_applies_u_dagger",
            SkgPadsResponse => "skg_pads_response",
            VerifierUnpadsResponse => "verifier_unpads_response",
        }
    }

    pub fn phase(self) -> Phase {
        use MeasureStep::*;
        match self {
            SignerKeyEstablishment | VerifierKeyEstablishment | PhaseAuthentication => {
                Phase::Initializing
            }
            SignerAppliesU | SignerPadsWithTi => Phase::Signing,
            _ => Phase::Verification,
        }
    }

    /// `(coefficient of m, coefficient of n)`.
    pub fn coefficients(self) -> (u64, u64) {
        use MeasureStep::*;
        match self {
            SignerKeyEstablishment | VerifierKeyEstablishment => (2, 0),
            PhaseAuthentication => (0, 3),
            SignerAppliesU | SkgReadsIdentity | SkgAppliesUDagger => (1, 0),
            SignerPadsWithTi
            | VerifierPadsSignature
            | VerifierPadsIdentity
            | SkgUnpadsSignature
            | SkgUnpadsIdentity
            | SkgUnpadsWithTi
            | SkgPadsResponse
            | VerifierUnpadsResponse => (2, 0),
        }
    }

    fn slot(self) -> usize {
        Self::ALL.iter().position(|s| *s == self).expect("listed")
    }
}

/// Protocol steps billed in units of β.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum ConvertStep {
    /// `ID_i` to `|ID_i⟩`.
    IdentityEncoding,
    /// Both copies of a classical message prepared as qubits.
    MessagePreparation,
    /// The `n` phase bits.
    PhaseEncoding,
}

impl ConvertStep {
    pub const ALL: [ConvertStep; 3] = [
        ConvertStep::IdentityEncoding,
        ConvertStep::MessagePreparation,
        ConvertStep::PhaseEncoding,
    ];

    pub fn name(self) -> &'static str {
        match self {
            ConvertStep::IdentityEncoding => "identity_encoding",
            ConvertStep::MessagePreparation => "message_preparation",
            ConvertStep::PhaseEncoding => "phase_encoding",
        }
    }

    pub fn coefficients(self) -> (u64, u64) {
        match self {
            ConvertStep::IdentityEncoding => (1, 0),
            ConvertStep::MessagePreparation => (2, 0),
            ConvertStep::PhaseEncoding => (0, 1),
        }
    }

    fn slot(self) -> usize {
        Self::ALL.iter().position(|s| *s == self).expect("listed")
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Event {
    QubitSend { count: u64, leg: Leg },
    Measurement { count: u64, step: MeasureStep },
    Conversion { count: u64, step: ConvertStep },
}

/// Shared, monotone counters for one run.
#[derive(Debug, Default)]
pub struct CostLedger {
    qubits: [AtomicU64; 5],
    measurements: [AtomicU64; 14],
    conversions: [AtomicU64; 3],
}

impl CostLedger {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn record(&self, event: Event) {
        let (slot, count) = match event {
            Event::QubitSend { count, leg } => (&self.qubits[leg as usize], count),
            Event::Measurement { count, step } => (&self.measurements[step.slot()], count),
            Event::Conversion { count, step } => (&self.conversions[step.slot()], count),
        };
        slot.fetch_add(count, Ordering::Relaxed);
    }

    pub fn snapshot(&self) -> LedgerSnapshot {
        let load = |a: &AtomicU64| a.load(Ordering::Relaxed);
        LedgerSnapshot {
            qubits: Leg::ALL
                .iter()
                .map(|l| (*l, load(&self.qubits[*l as usize])))
                .collect(),
            measurements: MeasureStep::ALL
                .iter()
                .map(|s| (*s, load(&self.measurements[s.slot()])))
                .collect(),
            conversions: ConvertStep::ALL
                .iter()
                .map(|s| (*s, load(&self.conversions[s.slot()])))
                .collect(),
        }
    }
}

/// Point-in-time copy of a ledger; also the merge target for many runs.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize)]
pub struct LedgerSnapshot {
    pub qubits: BTreeMap<Leg, u64>,
    pub measurements: BTreeMap<MeasureStep, u64>,
    pub conversions: BTreeMap<ConvertStep, u64>,
}

impl LedgerSnapshot {
    pub fn leg(&self, leg: Leg) -> u64 {
        self.qubits.get(&leg).copied().unwrap_or(0)
    }

    pub fn phase_qubits(&self, phase: Phase) -> u64 {
        self.qubits
            .iter()
            .filter(|(l, _)| l.phase() == phase)
            .map(|(_, c)| c)
            .sum()
    }

    pub fn total_qubits(&self) -> u64 {
        self.qubits.values().sum()
    }

    pub fn phase_measurements(&self, phase: Phase) -> u64 {
        self.measurements
            .iter()
            .filter(|(s, _)| s.phase() == phase)
            .map(|(_, c)| c)
            .sum()
    }

    pub fn total_measurements(&self) -> u64 {
        self.measurements.values().sum()
    }

    pub fn total_conversions(&self) -> u64 {
        self.conversions.values().sum()
    }

    pub fn merge(&mut self, other: &LedgerSnapshot) {
        for (k, v) in &other.qubits {
            *self.qubits.entry(*k).or_default() += v;
        }
        for (k, v) in &other.measurements {
            *self.measurements.entry(*k).or_default() += v;
        }
        for (k, v) in &other.conversions {
            *self.conversions.entry(*k).or_default() += v;
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum CheckStatus {
    Pass,
    Fail,
    NotApplicable,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct FormulaCheck {
    pub name: String,
    pub formula: String,
    pub expected: u64,
    pub observed: u64,
    pub status: CheckStatus,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct FormulaReport {
    pub m: u64,
    pub n: u64,
    pub checks: Vec<FormulaCheck>,
}

impl FormulaReport {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.status != CheckStatus::Fail)
    }

    pub fn failures(&self) -> impl Iterator<Item = &FormulaCheck> {
        self.checks.iter().filter(|c| c.status == CheckStatus::Fail)
    }

    pub fn get(&self, name: &str) -> Option<&FormulaCheck> {
        self.checks.iter().find(|c| c.name == name)
    }
}

fn affine((a, b): (u64, u64), m: u64, n: u64) -> u64 {
    a * m + b * n
}

fn formula_text((a, b): (u64, u64)) -> String {
    match (a, b) {
        (0, b) => format!("{b}n"),
        (a, 0) => format!("{a}m"),
        (a, b) => format!("{a}m+{b}n"),
    }
}

/// Checks an honest single-signer run against the closed-form costs.
///
/// `classical_message` selects whether the `(3m + n)β` term applies; for
/// quantum messages the conversion check is reported as not applicable.
pub fn check_formulas(
    ledger: &LedgerSnapshot,
    m: u64,
    n: u64,
    classical_message: bool,
) -> FormulaReport {
    let mut checks = Vec::new();
    let mut push = |name: String, coeffs: (u64, u64), observed: u64, applicable: bool| {
        let expected = affine(coeffs, m, n);
        let status = match (applicable, expected == observed) {
            (false, _) => CheckStatus::NotApplicable,
            (true, true) => CheckStatus::Pass,
            (true, false) => CheckStatus::Fail,
        };
        checks.push(FormulaCheck {
            name,
            formula: formula_text(coeffs),
            expected,
            observed,
            status,
        });
    };

    for leg in Leg::ALL {
        push(
            format!("qubits.{}", leg.name()),
            leg.coefficients(),
            ledger.leg(leg),
            true,
        );
    }
    push(
        "qubits.initializing".into(),
        (4, 2),
        ledger.phase_qubits(Phase::Initializing),
        true,
    );
    push(
        "qubits.signing_and_verification".into(),
        (6, 0),
        ledger.phase_qubits(Phase::Signing) + ledger.phase_qubits(Phase::Verification),
        true,
    );
    push("qubits.total".into(), (10, 2), ledger.total_qubits(), true);

    for step in MeasureStep::ALL {
        let observed = ledger.measurements.get(&step).copied().unwrap_or(0);
        push(
            format!("measurements.{}", step.name()),
            step.coefficients(),
            observed,
            true,
        );
    }
    push(
        "measurements.initializing".into(),
        (4, 3),
        ledger.phase_measurements(Phase::Initializing),
        true,
    );
    push(
        "measurements.encryption_and_decryption".into(),
        (19, 0),
        ledger.phase_measurements(Phase::Signing) + ledger.phase_measurements(Phase::Verification),
        true,
    );
    push(
        "measurements.total".into(),
        (23, 3),
        ledger.total_measurements(),
        true,
    );

    for step in ConvertStep::ALL {
        let observed = ledger.conversions.get(&step).copied().unwrap_or(0);
        let applicable = classical_message || step != ConvertStep::MessagePreparation;
        push(
            format!("conversions.{}", step.name()),
            step.coefficients(),
            observed,
            applicable,
        );
    }
    push(
        "conversions.total".into(),
        (3, 1),
        ledger.total_conversions(),
        classical_message,
    );

    FormulaReport { m, n, checks }
}
