//! Acceptance suite. Each criterion prints one PASS/FAIL line; the process
//! exits nonzero if any criterion fails.
//! Wall-clock budgets count toward each verdict.

#[path = "common/oracle.rs"]
mod oracle;

use std::time::{Duration, Instant};

use qibs::adversary::{run_campaign, Attack, AttackKind, CampaignConfig, PauliString};
use qibs::costs::{check_formulas, Leg};
use qibs::keyestab::PhaseSecret;
use qibs::noise::{success_experiment, sweep, NoiseKind, NoiseModel};
use qibs::protocol::{run_protocol, Message, MessageSpec, Outcome, ACCEPT_EPSILON};
use qibs::qotp::{decrypt, encrypt, secrecy_oracle, OtpKey};
use qibs::statevector::{basis_state, fidelity, random_product_state, random_state};
use qibs::toy::{run_toy, Golden, SparseState};
use qibs::{Bits, DensityMatrix, ProtocolConfig, StateVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

type Criterion = (u32, &'static str, Duration, fn() -> Verdict);

struct Verdict {
    passed: bool,
    detail: String,
}

fn verdict(passed: bool, detail: impl Into<String>) -> Verdict {
    Verdict {
        passed,
        detail: detail.into(),
    }
}

fn sparse(entries: &[(&str, f64)]) -> SparseState {
    entries
        .iter()
        .map(|(l, a)| (l.to_string(), [*a, 0.0]))
        .collect()
}

fn set_state(g: &mut Golden, stage: &str, part: &str, state: SparseState) {
    let s = g
        .stages
        .iter_mut()
        .find(|s| s.name == stage)
        .expect("stage present");
    s.states.insert(part.into(), state);
}

fn golden_toy() -> Verdict {
    let q = 1.0 / (2.0 * 2f64.sqrt());
    let mut g = Golden::embedded();
    set_state(&mut g, "pad_message", "padded", sparse(&[("100", 1.0)]));
    set_state(
        &mut g,
        "signature",
        "s",
        sparse(&[
            ("110", q),
            ("010", -q),
            ("100", q),
            ("000", -q),
            ("111", q),
            ("011", -q),
            ("101", q),
            ("001", -q),
        ]),
    );
    set_state(
        &mut g,
        "verification_request",
        "padded_identity",
        sparse(&[("000", 1.0)]),
    );
    set_state(&mut g, "skg_recovery", "recovered", sparse(&[("010", 1.0)]));
    set_state(&mut g, "response", "r", sparse(&[("001", 1.0)]));
    g.outcome = "accept".into();
    match run_toy(&g) {
        Ok(r) => {
            let worst = r
                .checkpoints
                .iter()
                .flat_map(|c| c.states.iter().map(|s| s.deviation))
                .fold(0.0, f64::max);
            verdict(
                r.passed,
                format!(
                    "{} checkpoints, max deviation {worst:.2e}, first failure {:?}",
                    r.checkpoints.len(),
                    r.first_failure
                ),
            )
        }
        Err(e) => verdict(false, e.to_string()),
    }
}

fn qotp_round_trip() -> Verdict {
    let mut rng = ChaCha8Rng::seed_from_u64(0xA2);
    let mut worst = 1.0f64;
    for _ in 0..1000 {
        let m = rng.gen_range(1..=4);
        let p: StateVector = random_state(m, &mut rng);
        let k = OtpKey::new(Bits::random(2 * m, &mut rng));
        let back = decrypt(&encrypt(&p, &k).unwrap(), &k).unwrap();
        worst = worst.min(fidelity(&p, &back).unwrap());
    }
    verdict(
        worst >= 1.0 - 1e-9,
        format!("1000 pairs, min fidelity {worst:.15}"),
    )
}

fn qotp_secrecy() -> Verdict {
    let mut rng = ChaCha8Rng::seed_from_u64(0xA3);
    let mut worst = 0.0f64;
    let mut count = 0;
    for m in 1..=3 {
        let mut states: Vec<StateVector> = (0..1 << m)
            .map(|i| basis_state(&Bits::from_index(i, m)).unwrap())
            .collect();
        states.extend((0..8).map(|_| random_state(m, &mut rng)));
        for p in &states {
            let rho = secrecy_oracle(p).unwrap();
            worst = worst.max(rho.max_abs_diff(&DensityMatrix::maximally_mixed(m)));
            count += 1;
        }
    }
    verdict(
        worst <= 1e-9,
        format!("{count} states, max |ρ − I/2^m| {worst:.2e}"),
    )
}

fn completeness() -> Verdict {
    let cfg = ProtocolConfig::toy();
    let model = NoiseModel::new(NoiseKind::Depolarizing, 0.0).unwrap();
    let r = success_experiment(&cfg, 10_000, model, 4).unwrap();
    verdict(
        r.accepted == 10_000,
        format!(
            "{}/{} accepted, acceptance {}",
            r.accepted, r.trials, r.acceptance
        ),
    )
}

fn unforgeability() -> Verdict {
    let m = 3;
    let n = PhaseSecret::DEFAULT_BITS;
    let mut rng = ChaCha8Rng::seed_from_u64(0xA5);
    let random_phase =
        |rng: &mut ChaCha8Rng| PhaseSecret::new(rng.gen_range(1..1u64 << n), n).unwrap();
    let (mut rejected, mut agree) = (0, 0);
    let mut worst_gap = 0.0f64;
    for trial in 0..200u64 {
        let t_i = OtpKey::new(Bits::random(2 * m, &mut rng));
        let phi = random_phase(&mut rng);
        let (mut t_j, mut phi_f) = (t_i.clone(), phi);
        let which = rng.gen_range(0..3);
        if which != 1 {
            while t_j == t_i {
                t_j = OtpKey::new(Bits::random(2 * m, &mut rng));
            }
        }
        if which != 0 {
            while phi_f == phi {
                phi_f = random_phase(&mut rng);
            }
        }
        let p: StateVector = random_product_state(m, &mut rng);

        let mut cfg = ProtocolConfig::honest(m, n, trial);
        cfg.message = MessageSpec::Fixed(Message::Quantum(p.clone()));
        cfg.inject_ti = Some(t_i.clone());
        cfg.inject_phi = Some(phi);
        cfg.attack = Some(Attack::Forge {
            key: t_j.clone(),
            phi: phi_f,
        });
        let tr = run_protocol(&cfg).unwrap();

        let recovered = oracle::recovered(
            p.amplitudes(),
            &t_j.to_string(),
            phi_f.phi::<f64>(),
            &t_i.to_string(),
            phi.phi::<f64>(),
            m,
        );
        let predicted = oracle::fidelity(p.amplitudes(), &recovered);
        let observed = tr.fidelity.unwrap_or(0.0);
        let oracle_outcome = if predicted >= 1.0 - ACCEPT_EPSILON {
            Outcome::Accept
        } else {
            Outcome::Reject
        };
        worst_gap = worst_gap.max((predicted - observed).abs());
        if tr.outcome == Outcome::Reject {
            rejected += 1;
        }
        if tr.outcome == oracle_outcome && (predicted - observed).abs() < 1e-9 {
            agree += 1;
        }
    }
    verdict(
        rejected == 200 && agree == 200,
        format!("rejection {rejected}/200, oracle agreement {agree}/200, max fidelity gap {worst_gap:.2e}"),
    )
}

fn pauli_resistance() -> Verdict {
    // D_K V E_K = ±V for every single-qubit Pauli and 2-bit key, built
    // column by column from the simulator and compared to the oracle's V.
    let mut identity_ok = true;
    let mut worst = 0.0f64;
    for label in ['I', 'X', 'Y', 'Z'] {
        let dense = oracle::pauli(label);
        let vs: PauliString = label.to_string().parse().unwrap();
        for k in ["00", "01", "10", "11"] {
            let key: OtpKey = k.parse().unwrap();
            let cols: Vec<StateVector> = ["0", "1"]
                .iter()
                .map(|b| {
                    let e = encrypt(&basis_state(&b.parse().unwrap()).unwrap(), &key).unwrap();
                    decrypt(&vs.apply(&e).unwrap(), &key).unwrap()
                })
                .collect();
            let op: oracle::Mat = (0..2)
                .map(|r| (0..2).map(|c| cols[c].amplitudes()[r]).collect())
                .collect();
            let dev = [1.0, -1.0]
                .iter()
                .map(|s| oracle::max_diff(&op, &oracle::scale(&dense, oracle::cx(*s, 0.0))))
                .fold(f64::INFINITY, f64::min);
            worst = worst.max(dev);
            identity_ok &= dev <= 1e-10;
        }
    }

    let report = run_campaign(AttackKind::Pauli, &CampaignConfig::toy(), 200, 0xA6).unwrap();
    let rate = report.rejection_rate.unwrap_or(0.0);
    let mut missed: Vec<String> = report.accepted().map(|r| r.detail.clone()).collect();
    missed.sort();
    missed.dedup();
    verdict(
        identity_ok && rate == 1.0,
        format!(
            "operator identity max deviation {worst:.1e} ({}); tamper rejection {}/{} = {rate:.3}, oracle agreement {}/{}{}",
            if identity_ok { "ok" } else { "fails" },
            report.rejected,
            report.trials,
            report.oracle_agreements,
            report.trials,
            if missed.is_empty() {
                String::new()
            } else {
                format!(", accepted tampers {}", missed.join(" "))
            }
        ),
    )
}

fn cost_formulas() -> Verdict {
    let mut failures = Vec::new();
    for (m, n) in [(1usize, 1u32), (3, 8), (5, 16)] {
        let tr = run_protocol(&ProtocolConfig::honest(m, n, 7)).unwrap();
        let report = check_formulas(&tr.ledger, m as u64, n as u64, tr.classical_message);
        failures.extend(report.failures().map(|c| format!("({m},{n}) {}", c.name)));
        if (m, n) == (3, 8) {
            let legs: Vec<u64> = Leg::ALL.iter().map(|l| tr.ledger.leg(*l)).collect();
            if tr.ledger.total_qubits() != 46 || legs != [12, 16, 9, 6, 3] {
                failures.push(format!(
                    "(3,8) qubits {} legs {legs:?}",
                    tr.ledger.total_qubits()
                ));
            }
        }
    }
    let detail = if failures.is_empty() {
        "(1,1) (3,8) (5,16) reconcile; 46 = 12+16+9+6+3".to_string()
    } else {
        failures.join("; ")
    };
    verdict(failures.is_empty(), detail)
}

fn noise_monotonicity() -> Verdict {
    let cfg = ProtocolConfig::toy();
    let grid: Vec<f64> = (0..=10).map(|i| i as f64 * 0.02).collect();
    let a = sweep(&cfg, 2000, NoiseKind::Depolarizing, &grid, 0xA8).unwrap();
    let b = sweep(&cfg, 2000, NoiseKind::Depolarizing, &grid, 0xA8).unwrap();
    let zero_ok = a[0].accepted == a[0].trials;
    let mut worst_rise = f64::NEG_INFINITY;
    for i in 0..a.len() {
        for j in i + 1..a.len() {
            worst_rise = worst_rise.max(a[j].acceptance - a[i].acceptance);
        }
    }
    let monotone = worst_rise <= 0.03;
    let same = serde_json::to_vec(&a).unwrap() == serde_json::to_vec(&b).unwrap();
    let curve: Vec<String> = a.iter().map(|r| format!("{:.3}", r.acceptance)).collect();
    verdict(
        zero_ok && monotone && same,
        format!(
            "p=0 acceptance {}, max rise {worst_rise:.4}, reproducible {same}; curve [{}]",
            a[0].acceptance,
            curve.join(" ")
        ),
    )
}

fn main() {
    let criteria: [Criterion; 8] = [
        (1, "golden toy example", Duration::from_secs(1), golden_toy),
        (
            2,
            "QOTP round trip",
            Duration::from_secs(5),
            qotp_round_trip,
        ),
        (
            3,
            "QOTP perfect secrecy",
            Duration::from_secs(10),
            qotp_secrecy,
        ),
        (4, "completeness", Duration::from_secs(60), completeness),
        (5, "unforgeability", Duration::from_secs(30), unforgeability),
        (
            6,
            "Pauli-attack resistance",
            Duration::from_secs(30),
            pauli_resistance,
        ),
        (7, "cost formulas", Duration::from_secs(1), cost_formulas),
        (
            8,
            "noise monotonicity",
            Duration::from_secs(120),
            noise_monotonicity,
        ),
    ];
    let mut failed = 0;
    for (id, name, budget, run) in criteria {
        let start = Instant::now();
        let v = run();
        let elapsed = start.elapsed();
        let in_time = elapsed <= budget;
        let ok = v.passed && in_time;
        if !ok {
            failed += 1;
        }
        println!(
            "criterion {id} {name}: {} [{:.2}s of {}s{}] {}",
            if ok { "PASS" } else { "FAIL" },
            elapsed.as_secs_f64(),
            budget.as_secs(),
            if in_time { "" } else { ", over budget" },
            v.detail
        );
    }
    println!("acceptance: {} of 8 criteria passed", 8 - failed);
    if failed > 0 {
        std::process::exit(1);
    }
}
