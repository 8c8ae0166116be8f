//! Replay of the three-qubit worked example against transcribed values.
//!
//! Identity `011`, message `|010⟩`, `T_i = 010110`, `T_u = 100101`, `φ = π`.
//! The expected states live in `data/toy_golden.json` as sparse amplitude
//! maps and are compared up to a global phase.

use std::collections::BTreeMap;

use num_complex::Complex;
use serde::{Deserialize, Serialize};

use crate::bits::Bits;
use crate::error::{Error, Result};
use crate::protocol::{run_protocol, Outcome, ProtocolConfig, Transcript};
use crate::qotp::{encrypt, OtpKey};
use crate::statevector::{basis_state, StateVector};

/// Largest phase-aligned amplitude deviation a checkpoint tolerates.
pub const TOY_TOLERANCE: f64 = 1e-9;

pub const EMBEDDED_GOLDEN: &str = include_str!("data/toy_golden.json");

/// Label -> `[re, im]` for the nonzero amplitudes.
pub type SparseState = BTreeMap<String, [f64; 2]>;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GoldenStage {
    pub name: String,
    pub states: BTreeMap<String, SparseState>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Golden {
    pub stages: Vec<GoldenStage>,
    pub outcome: String,
}

impl Golden {
    pub fn embedded() -> Self {
        Self::from_json(EMBEDDED_GOLDEN).expect("embedded golden file parses")
    }

    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| Error::InvalidConfig(format!("golden file: {e}")))
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct StateCheck {
    pub part: String,
    /// Largest amplitude deviation after aligning the global phase.
    pub deviation: f64,
    pub computed: SparseState,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CheckpointResult {
    pub name: String,
    pub passed: bool,
    pub states: Vec<StateCheck>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub detail: Option<String>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ToyReport {
    pub passed: bool,
    pub outcome: Outcome,
    /// First checkpoint that did not match.
    pub first_failure: Option<String>,
    pub checkpoints: Vec<CheckpointResult>,
}

pub fn sparse(state: &StateVector) -> SparseState {
    state
        .amplitudes()
        .iter()
        .enumerate()
        .filter(|(_, a)| a.norm() > 1e-12)
        .map(|(i, a)| {
            let round = |x: f64| if x.abs() < 1e-15 { 0.0 } else { x };
            (
                Bits::from_index(i, state.num_qubits()).to_string(),
                [round(a.re), round(a.im)],
            )
        })
        .collect()
}

/// Max amplitude distance between `computed` and `expected` once the global
/// phase is aligned on the expected state's largest entry.
pub fn phase_aligned_deviation(computed: &StateVector, expected: &SparseState) -> Result<f64> {
    let m = computed.num_qubits();
    let mut target = vec![Complex::new(0.0, 0.0); computed.dim()];
    for (label, [re, im]) in expected {
        let bits: Bits = label.parse()?;
        if bits.len() != m {
            return Err(Error::DimensionMismatch {
                left: m,
                right: bits.len(),
            });
        }
        target[bits.to_index()] = Complex::new(*re, *im);
    }
    let amps = computed.amplitudes();
    let pivot = (0..target.len())
        .max_by(|&a, &b| target[a].norm().total_cmp(&target[b].norm()))
        .expect("nonempty");
    let phase = if amps[pivot].norm() > 1e-12 {
        let ratio = target[pivot] / amps[pivot];
        ratio / ratio.norm()
    } else {
        Complex::new(1.0, 0.0)
    };
    Ok(amps
        .iter()
        .zip(&target)
        .map(|(a, t)| (a * phase - t).norm())
        .fold(0.0, f64::max))
}

fn check(
    name: &str,
    golden: &Golden,
    computed: &[(&str, &StateVector)],
) -> Result<CheckpointResult> {
    let stage = golden.stages.iter().find(|s| s.name == name);
    let Some(stage) = stage else {
        return Ok(CheckpointResult {
            name: name.into(),
            passed: false,
            states: Vec::new(),
            detail: Some("stage missing from golden file".into()),
        });
    };
    let mut states = Vec::new();
    let mut passed = true;
    let mut detail = None;
    for (part, state) in computed {
        let deviation = match stage.states.get(*part) {
            Some(expected) => phase_aligned_deviation(state, expected)?,
            None => {
                detail = Some(format!("golden stage has no state {part:?}"));
                f64::INFINITY
            }
        };
        passed &= deviation <= TOY_TOLERANCE;
        states.push(StateCheck {
            part: (*part).into(),
            deviation,
            computed: sparse(state),
        });
    }
    Ok(CheckpointResult {
        name: name.into(),
        passed,
        states,
        detail,
    })
}

/// The worked-example transcript with every intermediate state recorded.
pub fn toy_transcript() -> Result<Transcript> {
    let mut cfg = ProtocolConfig::toy();
    cfg.record_states = true;
    run_protocol(&cfg)
}

/// Runs the worked example and diffs every checkpoint against `golden`.
pub fn run_toy(golden: &Golden) -> Result<ToyReport> {
    let key: OtpKey = "010110".parse()?;
    let padded = encrypt(&basis_state(&"010".parse()?)?, &key)?;

    let tr = toy_transcript()?;
    let trace = tr.trace.as_ref().expect("states recorded");
    let rec = trace
        .recovery
        .as_ref()
        .ok_or(Error::UnknownIdentity("011".into()))?;

    let mut checkpoints = vec![
        check("pad_message", golden, &[("padded", &padded)])?,
        check("signature", golden, &[("s", &trace.signature)])?,
        check(
            "verification_request",
            golden,
            &[
                ("padded_signature", &trace.request_signature),
                ("padded_identity", &trace.request_identity),
            ],
        )?,
        check("skg_recovery", golden, &[("recovered", &rec.recovered)])?,
        check("response", golden, &[("r", &rec.response)])?,
    ];
    let outcome_ok = tr.outcome.to_string() == golden.outcome;
    checkpoints.push(CheckpointResult {
        name: "final_outcome".into(),
        passed: outcome_ok,
        states: Vec::new(),
        detail: Some(format!(
            "computed {}, expected {}",
            tr.outcome, golden.outcome
        )),
    });
    let first_failure = checkpoints
        .iter()
        .find(|c| !c.passed)
        .map(|c| c.name.clone());
    Ok(ToyReport {
        passed: first_failure.is_none(),
        outcome: tr.outcome,
        first_failure,
        checkpoints,
    })
}
