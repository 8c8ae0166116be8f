//! Stochastic Pauli noise on transmitted qubits and the Monte Carlo
//! acceptance experiment.
//!
//! Noise is simulated as quantum-jump trajectories: each transmitted qubit
//! independently suffers a Pauli error with the model's probability. Every
//! qubit consumes exactly two uniforms whatever `p` is, so runs with the same
//! seed at different `p` see the same random stream and are coupled.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::protocol::{run_protocol_with_rng, Outcome, ProtocolConfig};
use crate::scalar::Real;
use crate::statevector::{apply_single_in_place, SingleQubitGate, StateVector};

/// Acceptance rate reported for the hardware run the sweep is calibrated to.
pub const HARDWARE_ACCEPTANCE: f64 = 0.892;

/// Histogram key for trials the key generator rejected before replying.
pub const SKG_REJECT_LABEL: &str = "skg_reject";

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum NoiseKind {
    Depolarizing,
    BitFlip,
    PhaseFlip,
}

impl FromStr for NoiseKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "depolarizing" => Ok(NoiseKind::Depolarizing),
            "bit-flip" => Ok(NoiseKind::BitFlip),
            "phase-flip" => Ok(NoiseKind::PhaseFlip),
            other => Err(Error::InvalidConfig(format!(
                "unknown noise kind {other:?}; expected depolarizing, bit-flip or phase-flip"
            ))),
        }
    }
}

impl fmt::Display for NoiseKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            NoiseKind::Depolarizing => "depolarizing",
            NoiseKind::BitFlip => "bit-flip",
            NoiseKind::PhaseFlip => "phase-flip",
        })
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct NoiseModel {
    kind: NoiseKind,
    p: f64,
}

impl NoiseModel {
    pub fn new(kind: NoiseKind, p: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&p) {
            return Err(Error::InvalidProbability(p));
        }
        Ok(NoiseModel { kind, p })
    }

    pub fn kind(&self) -> NoiseKind {
        self.kind
    }

    pub fn p(&self) -> f64 {
        self.p
    }

    /// Pauli error for one qubit given its two uniforms, if any fires.
    fn draw<T: Real>(&self, fire: f64, which: f64) -> Option<SingleQubitGate<T>> {
        if fire >= self.p {
            return None;
        }
        Some(match self.kind {
            NoiseKind::BitFlip => SingleQubitGate::pauli_x(),
            NoiseKind::PhaseFlip => SingleQubitGate::pauli_z(),
            NoiseKind::Depolarizing => match (which * 3.0) as u8 {
                0 => SingleQubitGate::pauli_x(),
                1 => SingleQubitGate::pauli_y(),
                _ => SingleQubitGate::pauli_z(),
            },
        })
    }
}

/// One trajectory of the channel on the 1-based `qubit_index`.
pub fn apply_noise<T: Real, R: Rng + ?Sized>(
    state: &StateVector<T>,
    qubit_index: usize,
    model: &NoiseModel,
    rng: &mut R,
) -> Result<StateVector<T>> {
    if qubit_index == 0 || qubit_index > state.num_qubits() {
        return Err(Error::QubitOutOfRange {
            index: qubit_index,
            num_qubits: state.num_qubits(),
        });
    }
    let mut out = state.clone();
    let (fire, which): (f64, f64) = (rng.gen(), rng.gen());
    if let Some(g) = model.draw(fire, which) {
        apply_single_in_place(&mut out, &g, qubit_index)?;
    }
    Ok(out)
}

/// Applies the channel independently to every qubit of `state`.
pub fn apply_noise_all<T: Real, R: Rng + ?Sized>(
    state: &StateVector<T>,
    model: &NoiseModel,
    rng: &mut R,
) -> StateVector<T> {
    let mut out = state.clone();
    for q in 1..=state.num_qubits() {
        let (fire, which): (f64, f64) = (rng.gen(), rng.gen());
        if let Some(g) = model.draw(fire, which) {
            apply_single_in_place(&mut out, &g, q).expect("index within range");
        }
    }
    out
}

/// Per-trial generator: ChaCha8 seeded with `seed`, stream number `trial`.
pub fn trial_rng(seed: u64, trial: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(trial);
    rng
}

/// Wilson score interval for `successes` out of `trials` at ~95%.
pub fn wilson_interval(successes: u64, trials: u64) -> (f64, f64) {
    if trials == 0 {
        return (0.0, 1.0);
    }
    let z = 1.959_963_984_540_054;
    let (n, p) = (trials as f64, successes as f64 / trials as f64);
    let denom = 1.0 + z * z / n;
    let centre = (p + z * z / (2.0 * n)) / denom;
    let half = z * (p * (1.0 - p) / n + z * z / (4.0 * n * n)).sqrt() / denom;
    ((centre - half).max(0.0), (centre + half).min(1.0))
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ExperimentResult {
    pub kind: NoiseKind,
    pub p: f64,
    pub trials: u64,
    pub accepted: u64,
    pub acceptance: f64,
    pub ci_low: f64,
    pub ci_high: f64,
    /// Bob's measured comparison register, label -> count.
    pub histogram: BTreeMap<String, u64>,
}

/// Runs the full protocol `trials` times with `model` on every transmitted
/// qubit. Trial `t` uses [`trial_rng`]`(seed, t)`, so the result does not
/// depend on thread scheduling.
pub fn success_experiment<T: Real>(
    config: &ProtocolConfig<T>,
    trials: u64,
    model: NoiseModel,
    seed: u64,
) -> Result<ExperimentResult> {
    let mut cfg = config.clone();
    cfg.noise = Some(model);
    cfg.record_states = false;
    let per_trial = (0..trials)
        .into_par_iter()
        .map(|t| {
            let tr = run_protocol_with_rng(&cfg, &mut trial_rng(seed, t))?;
            let label = tr
                .measured
                .as_ref()
                .map_or_else(|| SKG_REJECT_LABEL.to_owned(), |b| b.to_string());
            Ok((tr.outcome == Outcome::Accept, label))
        })
        .collect::<Result<Vec<_>>>()?;
    let mut histogram = BTreeMap::new();
    let mut accepted = 0;
    for (ok, label) in per_trial {
        accepted += ok as u64;
        *histogram.entry(label).or_insert(0) += 1;
    }
    let (ci_low, ci_high) = wilson_interval(accepted, trials);
    Ok(ExperimentResult {
        kind: model.kind(),
        p: model.p(),
        trials,
        accepted,
        acceptance: if trials == 0 {
            0.0
        } else {
            accepted as f64 / trials as f64
        },
        ci_low,
        ci_high,
        histogram,
    })
}

/// One [`success_experiment`] per grid point, all with the same seed.
pub fn sweep<T: Real>(
    config: &ProtocolConfig<T>,
    trials: u64,
    kind: NoiseKind,
    grid: &[f64],
    seed: u64,
) -> Result<Vec<ExperimentResult>> {
    if grid.is_empty() {
        return Err(Error::InvalidConfig("noise grid is empty".into()));
    }
    grid.iter()
        .map(|&p| success_experiment(config, trials, NoiseModel::new(kind, p)?, seed))
        .collect()
}

/// First grid point whose acceptance falls below `target`.
pub fn calibration_crossing(results: &[ExperimentResult], target: f64) -> Option<f64> {
    results.iter().find(|r| r.acceptance < target).map(|r| r.p)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bits::Bits;
    use crate::statevector::{basis_state, random_state};

    fn zero() -> StateVector {
        basis_state(&Bits::zeros(1)).unwrap()
    }

    #[test]
    fn zero_probability_is_identity() {
        let mut rng = trial_rng(1, 0);
        for kind in [
            NoiseKind::Depolarizing,
            NoiseKind::BitFlip,
            NoiseKind::PhaseFlip,
        ] {
            let model = NoiseModel::new(kind, 0.0).unwrap();
            for _ in 0..50 {
                let psi: StateVector = random_state(3, &mut rng);
                assert_eq!(apply_noise_all(&psi, &model, &mut rng), psi);
                assert_eq!(apply_noise(&psi, 2, &model, &mut rng).unwrap(), psi);
            }
        }
    }

    #[test]
    fn certain_bit_flip() {
        let model = NoiseModel::new(NoiseKind::BitFlip, 1.0).unwrap();
        let out = apply_noise(&zero(), 1, &model, &mut trial_rng(0, 0)).unwrap();
        assert_eq!(out, basis_state(&"1".parse().unwrap()).unwrap());
    }

    #[test]
    fn depolarizing_flip_frequency() {
        let model = NoiseModel::new(NoiseKind::Depolarizing, 0.3).unwrap();
        let mut rng = trial_rng(2, 0);
        let n = 100_000;
        let ones = (0..n)
            .filter(|_| {
                apply_noise(&zero(), 1, &model, &mut rng)
                    .unwrap()
                    .probabilities()[1]
                    > 0.5
            })
            .count();
        let freq = ones as f64 / n as f64;
        assert!((freq - 0.2).abs() <= 0.01, "freq {freq}");
    }

    #[test]
    fn invalid_inputs() {
        assert_eq!(
            NoiseModel::new(NoiseKind::BitFlip, 1.5),
            Err(Error::InvalidProbability(1.5))
        );
        assert!(NoiseModel::new(NoiseKind::BitFlip, -0.1).is_err());
        let model = NoiseModel::new(NoiseKind::BitFlip, 0.5).unwrap();
        assert!(apply_noise(&zero(), 2, &model, &mut trial_rng(0, 0)).is_err());
        assert_eq!("bit-flip".parse::<NoiseKind>().unwrap(), NoiseKind::BitFlip);
        assert!("amplitude-damping".parse::<NoiseKind>().is_err());
    }

    #[test]
    fn wilson_bounds() {
        let (lo, hi) = wilson_interval(100, 100);
        assert!(hi == 1.0 && lo > 0.95 && lo < 1.0);
        let (lo, hi) = wilson_interval(50, 100);
        assert!((lo - 0.4038).abs() < 1e-3 && (hi - 0.5962).abs() < 1e-3);
    }

    #[test]
    fn noiseless_toy_always_accepts() {
        let cfg = ProtocolConfig::<f64>::toy();
        let model = NoiseModel::new(NoiseKind::Depolarizing, 0.0).unwrap();
        let r = success_experiment(&cfg, 500, model, 7).unwrap();
        assert_eq!(r.accepted, 500);
        assert_eq!(r.histogram.get("010"), Some(&500));
    }

    #[test]
    fn maximal_noise_degrades_and_is_deterministic() {
        let cfg = ProtocolConfig::<f64>::toy();
        let model = NoiseModel::new(NoiseKind::Depolarizing, 1.0).unwrap();
        let a = success_experiment(&cfg, 256, model, 11).unwrap();
        let b = success_experiment(&cfg, 256, model, 11).unwrap();
        assert_eq!(a, b);
        assert!(a.acceptance < 0.5, "acceptance {}", a.acceptance);
    }

    #[test]
    fn sweep_rejects_empty_grid_and_finds_crossing() {
        let cfg = ProtocolConfig::<f64>::toy();
        assert!(sweep(&cfg, 10, NoiseKind::Depolarizing, &[], 0).is_err());
        let rows = sweep(&cfg, 400, NoiseKind::Depolarizing, &[0.0, 0.05, 0.3], 3).unwrap();
        assert_eq!(rows[0].acceptance, 1.0);
        let p = calibration_crossing(&rows, HARDWARE_ACCEPTANCE);
        assert!(matches!(p, Some(x) if x > 0.0));
    }
}
