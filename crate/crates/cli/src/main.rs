//! `qibs`: replay the worked example, run the protocol, attack it, measure
//! acceptance under noise, check cost formulas and run the email demo.
//!
//! Exit status is 0 when the outcome is what the command expects, 1 on a
//! verification mismatch and 2 on a usage or configuration error.

mod output;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use qibs::adversary::{
    run_campaign, Attack, AttackKind, CampaignConfig, MessageFamily, PauliString,
};
use qibs::costs::check_formulas;
use qibs::email::{email_demo, DEFAULT_DIGEST_BITS, DEFAULT_SENDER};
use qibs::keyestab::PhaseSecret;
use qibs::noise::{calibration_crossing, sweep, NoiseKind, NoiseModel, HARDWARE_ACCEPTANCE};
use qibs::protocol::{run_protocol, Comparator, Identity, Message, MessageSpec, Outcome};
use qibs::qotp::OtpKey;
use qibs::toy::{run_toy, Golden};
use qibs::{Bits, ProtocolConfig};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use output::Emit;

#[derive(Parser, Debug)]
#[command(
    name = "qibs",
    version,
    about = "Quantum identity-based signature simulator"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Replay the three-qubit worked example against its golden states.
    Toy(ToyArgs),
    /// Run the protocol once and print the transcript.
    Run(RunArgs),
    /// Run a forgery or Pauli-tamper campaign.
    Attack(AttackArgs),
    /// Acceptance rate against channel noise over a grid of probabilities.
    Experiment(ExperimentArgs),
    /// Sign and verify an email digest.
    EmailDemo(EmailArgs),
    /// Check an instrumented honest run against the closed-form costs.
    Costs(CostsArgs),
}

#[derive(Args, Debug)]
struct OutputArgs {
    /// Emit JSON instead of text.
    #[arg(long)]
    json: bool,
    /// Write the report to PATH instead of stdout.
    #[arg(long, value_name = "PATH")]
    out: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct ToyArgs {
    /// Golden checkpoint file to compare against instead of the embedded one.
    #[arg(long, value_name = "PATH")]
    golden: Option<PathBuf>,
    #[command(flatten)]
    output: OutputArgs,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum ComparatorArg {
    Exact,
    Swap,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum MessageArg {
    Basis,
    Product,
    Haar,
}

#[derive(Args, Debug)]
struct ProtocolArgs {
    /// Start from the worked example (m = 3, ID 011, P = |010⟩, toy keys, φ = π).
    #[arg(long)]
    toy: bool,
    /// Message size in qubits.
    #[arg(long, default_value_t = 3)]
    m: usize,
    /// Bit length of the phase secret.
    #[arg(long, default_value_t = PhaseSecret::DEFAULT_BITS)]
    n: u32,
    #[arg(long, env = "QIBS_SEED", default_value_t = 0)]
    seed: u64,
    /// Signer identity bits.
    #[arg(long, value_name = "BITS")]
    identity: Option<Identity>,
    /// Classical message bits; overrides --message-kind.
    #[arg(long, value_name = "BITS")]
    message: Option<Bits>,
    #[arg(long, value_enum, default_value_t = MessageArg::Basis)]
    message_kind: MessageArg,
    #[arg(long, value_name = "BITS")]
    inject_ti: Option<OtpKey>,
    #[arg(long, value_name = "BITS")]
    inject_tu: Option<OtpKey>,
    /// Phase as K/N, meaning 2πK / 2^N.
    #[arg(long, value_name = "K/N")]
    inject_phi: Option<PhaseSecret>,
    #[arg(long, value_enum, default_value_t = ComparatorArg::Exact)]
    comparator: ComparatorArg,
    /// Swap-test repetitions for --comparator swap.
    #[arg(long, default_value_t = 1024)]
    shots: u64,
}

impl ProtocolArgs {
    fn config(&self) -> Result<ProtocolConfig, String> {
        let mut cfg = if self.toy {
            ProtocolConfig::toy()
        } else {
            let mut c = ProtocolConfig::honest(self.m, self.n, self.seed);
            c.message = match self.message_kind {
                MessageArg::Basis => MessageSpec::RandomBasis,
                MessageArg::Product => MessageSpec::RandomProduct,
                MessageArg::Haar => MessageSpec::RandomHaar,
            };
            c
        };
        cfg.seed = self.seed;
        if let Some(id) = &self.identity {
            cfg.identity = Some(id.clone());
        }
        if let Some(bits) = &self.message {
            cfg.message = MessageSpec::Fixed(Message::Classical(bits.clone()));
        }
        if self.inject_ti.is_some() {
            cfg.inject_ti = self.inject_ti.clone();
        }
        if self.inject_tu.is_some() {
            cfg.inject_tu = self.inject_tu.clone();
        }
        if self.inject_phi.is_some() {
            cfg.inject_phi = self.inject_phi;
        }
        cfg.comparator = match self.comparator {
            ComparatorArg::Exact => Comparator::Exact,
            ComparatorArg::Swap => Comparator::Swap { shots: self.shots },
        };
        cfg.validate().map_err(|e| e.to_string())?;
        Ok(cfg)
    }
}

#[derive(Args, Debug)]
struct NoiseArgs {
    #[arg(long, default_value = "depolarizing")]
    noise_kind: NoiseKind,
}

#[derive(Args, Debug)]
struct RunArgs {
    #[command(flatten)]
    protocol: ProtocolArgs,
    #[command(flatten)]
    noise: NoiseArgs,
    /// Noise probability on every transmitted qubit.
    #[arg(long)]
    p: Option<f64>,
    /// Sign with this key instead of the registered one.
    #[arg(long, value_name = "BITS")]
    forge_key: Option<OtpKey>,
    /// Sign with this phase instead of the registered one.
    #[arg(long, value_name = "K/N")]
    forge_phi: Option<PhaseSecret>,
    /// Apply this Pauli string to P and S in transit.
    #[arg(long, value_name = "STRING")]
    pauli: Option<PauliString>,
    /// Include every intermediate state in the transcript.
    #[arg(long)]
    trace: bool,
    #[command(flatten)]
    output: OutputArgs,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum AttackArg {
    Forgery,
    Pauli,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum FamilyArg {
    Basis,
    Product,
}

#[derive(Args, Debug)]
struct AttackArgs {
    #[arg(value_enum)]
    kind: AttackArg,
    #[arg(long, default_value_t = 200)]
    trials: u64,
    /// Attack the worked example instead of random key material.
    #[arg(long)]
    toy: bool,
    #[arg(long, default_value_t = 3)]
    m: usize,
    #[arg(long, default_value_t = PhaseSecret::DEFAULT_BITS)]
    n: u32,
    #[arg(long, env = "QIBS_SEED", default_value_t = 0)]
    seed: u64,
    /// Message family for random campaigns.
    #[arg(long, value_enum, default_value_t = FamilyArg::Basis)]
    messages: FamilyArg,
    /// Fixed tamper string instead of a random non-trivial one per trial.
    #[arg(long, value_name = "STRING")]
    pauli: Option<PauliString>,
    #[arg(long, value_name = "BITS")]
    forge_key: Option<OtpKey>,
    #[arg(long, value_name = "K/N")]
    forge_phi: Option<PhaseSecret>,
    #[command(flatten)]
    output: OutputArgs,
}

#[derive(Args, Debug)]
struct ExperimentArgs {
    #[command(flatten)]
    protocol: ProtocolArgs,
    #[command(flatten)]
    noise: NoiseArgs,
    /// Noise probabilities, comma separated.
    #[arg(long, value_delimiter = ',', num_args = 1.., required = true)]
    p: Vec<f64>,
    #[arg(long, default_value_t = 1024)]
    trials: u64,
    #[command(flatten)]
    output: OutputArgs,
}

#[derive(Args, Debug)]
struct EmailArgs {
    /// Message body to sign.
    message: String,
    #[arg(long, default_value = DEFAULT_SENDER)]
    sender: String,
    /// Flip one message bit after signing.
    #[arg(long)]
    tamper: bool,
    /// Digest length in qubits.
    #[arg(long, default_value_t = DEFAULT_DIGEST_BITS)]
    m: usize,
    #[arg(long, default_value_t = PhaseSecret::DEFAULT_BITS)]
    n: u32,
    #[arg(long, env = "QIBS_SEED", default_value_t = 0)]
    seed: u64,
    #[command(flatten)]
    output: OutputArgs,
}

#[derive(Args, Debug)]
struct CostsArgs {
    #[arg(long, default_value_t = 3)]
    m: usize,
    #[arg(long, default_value_t = PhaseSecret::DEFAULT_BITS)]
    n: u32,
    #[arg(long, env = "QIBS_SEED", default_value_t = 0)]
    seed: u64,
    /// Sign a quantum (product-state) message; conversions become not applicable.
    #[arg(long)]
    quantum: bool,
    #[command(flatten)]
    output: OutputArgs,
}

enum Status {
    Ok,
    Mismatch(String),
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Toy(a) => cmd_toy(a),
        Command::Run(a) => cmd_run(a),
        Command::Attack(a) => cmd_attack(a),
        Command::Experiment(a) => cmd_experiment(a),
        Command::EmailDemo(a) => cmd_email(a),
        Command::Costs(a) => cmd_costs(a),
    };
    match result {
        Ok(Status::Ok) => ExitCode::SUCCESS,
        Ok(Status::Mismatch(why)) => {
            eprintln!("qibs: {why}");
            ExitCode::from(1)
        }
        Err(msg) => {
            eprintln!("qibs: error: {msg}");
            ExitCode::from(2)
        }
    }
}

fn emit<T: Serialize + Emit>(report: &T, out: &OutputArgs) -> Result<(), String> {
    let text = if out.json {
        let mut s = serde_json::to_string_pretty(report).map_err(|e| e.to_string())?;
        s.push('\n');
        s
    } else {
        report.text()
    };
    match &out.out {
        Some(path) => {
            std::fs::write(path, text).map_err(|e| format!("writing {}: {e}", path.display()))
        }
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn cmd_toy(a: ToyArgs) -> Result<Status, String> {
    let golden = match &a.golden {
        Some(path) => {
            let text = std::fs::read_to_string(path)
                .map_err(|e| format!("reading {}: {e}", path.display()))?;
            Golden::from_json(&text).map_err(|e| e.to_string())?
        }
        None => Golden::embedded(),
    };
    let report = run_toy(&golden).map_err(|e| e.to_string())?;
    emit(&report, &a.output)?;
    Ok(match &report.first_failure {
        None => Status::Ok,
        Some(stage) => Status::Mismatch(format!(
            "checkpoint {stage} does not match the golden value"
        )),
    })
}

/// Signer key material the forger falls back to for whichever half of the
/// forgery was not given.
fn resolve_material(cfg: &mut ProtocolConfig) {
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed ^ 0x464f_5247_4552_5900);
    if cfg.inject_ti.is_none() {
        cfg.inject_ti = Some(OtpKey::new(Bits::random(2 * cfg.m, &mut rng)));
    }
    if cfg.inject_phi.is_none() {
        let k = rng.gen_range(1..1u64 << cfg.n);
        cfg.inject_phi = PhaseSecret::new(k, cfg.n).ok();
    }
}

fn cmd_run(a: RunArgs) -> Result<Status, String> {
    let mut cfg = a.protocol.config()?;
    if let Some(p) = a.p {
        cfg.noise = Some(NoiseModel::new(a.noise.noise_kind, p).map_err(|e| e.to_string())?);
    }
    let forging = a.forge_key.is_some() || a.forge_phi.is_some();
    if forging && a.pauli.is_some() {
        return Err("choose either a forgery or a Pauli tamper, not both".into());
    }
    if forging {
        resolve_material(&mut cfg);
        cfg.attack = Some(Attack::Forge {
            key: a
                .forge_key
                .clone()
                .or_else(|| cfg.inject_ti.clone())
                .expect("resolved"),
            phi: a.forge_phi.or(cfg.inject_phi).expect("resolved"),
        });
    }
    if let Some(v) = &a.pauli {
        cfg.attack = Some(Attack::Tamper(v.clone()));
    }
    cfg.record_states = a.trace;
    cfg.validate().map_err(|e| e.to_string())?;
    let tr = run_protocol(&cfg).map_err(|e| e.to_string())?;
    emit(&tr, &a.output)?;

    let honest = match &cfg.attack {
        None => true,
        Some(Attack::Tamper(v)) => v.is_trivial(),
        Some(Attack::Forge { key, phi }) => {
            Some(key) == cfg.inject_ti.as_ref() && Some(*phi) == cfg.inject_phi
        }
    };
    let expected = if honest {
        Outcome::Accept
    } else {
        Outcome::Reject
    };
    Ok(if tr.outcome == expected {
        Status::Ok
    } else {
        Status::Mismatch(format!(
            "expected {expected}, verifier returned {}",
            tr.outcome
        ))
    })
}

fn cmd_attack(a: AttackArgs) -> Result<Status, String> {
    let kind = match a.kind {
        AttackArg::Forgery => AttackKind::Forgery,
        AttackArg::Pauli => AttackKind::Pauli,
    };
    let family = match a.messages {
        FamilyArg::Basis => MessageFamily::Basis,
        FamilyArg::Product => MessageFamily::Product,
    };
    if a.trials == 0 {
        return Err("--trials must be at least 1".into());
    }
    let mut cfg = if a.toy {
        CampaignConfig::toy()
    } else {
        CampaignConfig::new(a.m, a.n, family)
    };
    cfg.pauli = a.pauli.clone();
    cfg.forge_key = a.forge_key.clone();
    cfg.forge_phi = a.forge_phi;
    if let Some(k) = &cfg.forge_key {
        if k.len() != 2 * cfg.m {
            return Err(format!(
                "--forge-key needs {} bits, got {}",
                2 * cfg.m,
                k.len()
            ));
        }
    }
    if let Some(p) = cfg.forge_phi {
        if p.bits() != cfg.n {
            return Err(format!("--forge-phi must have {} bits", cfg.n));
        }
    }
    let report = run_campaign(kind, &cfg, a.trials, a.seed).map_err(|e| e.to_string())?;
    emit(&report, &a.output)?;
    Ok(if report.oracle_agreements == report.trials {
        Status::Ok
    } else {
        Status::Mismatch(format!(
            "{} of {} trials disagree with the oracle",
            report.trials - report.oracle_agreements,
            report.trials
        ))
    })
}

#[derive(Serialize)]
struct ExperimentReport {
    target_acceptance: f64,
    /// First grid probability with acceptance below the target.
    calibration_crossing: Option<f64>,
    rows: Vec<qibs::noise::ExperimentResult>,
}

fn cmd_experiment(a: ExperimentArgs) -> Result<Status, String> {
    if a.trials == 0 {
        return Err("--trials must be at least 1".into());
    }
    for p in &a.p {
        NoiseModel::new(a.noise.noise_kind, *p).map_err(|e| e.to_string())?;
    }
    let cfg = a.protocol.config()?;
    let rows = sweep(&cfg, a.trials, a.noise.noise_kind, &a.p, a.protocol.seed)
        .map_err(|e| e.to_string())?;
    let report = ExperimentReport {
        target_acceptance: HARDWARE_ACCEPTANCE,
        calibration_crossing: calibration_crossing(&rows, HARDWARE_ACCEPTANCE),
        rows,
    };
    emit(&report, &a.output)?;
    Ok(Status::Ok)
}

fn cmd_email(a: EmailArgs) -> Result<Status, String> {
    let report =
        email_demo(&a.sender, &a.message, a.m, a.n, a.seed, a.tamper).map_err(|e| e.to_string())?;
    emit(&report, &a.output)?;
    let expected = if a.tamper {
        Outcome::Reject
    } else {
        Outcome::Accept
    };
    Ok(if report.outcome == expected {
        Status::Ok
    } else {
        Status::Mismatch(format!(
            "expected {expected}, verifier returned {}",
            report.outcome
        ))
    })
}

fn cmd_costs(a: CostsArgs) -> Result<Status, String> {
    let mut cfg = ProtocolConfig::honest(a.m, a.n, a.seed);
    if a.quantum {
        cfg.message = MessageSpec::RandomProduct;
    }
    let tr = run_protocol(&cfg).map_err(|e| e.to_string())?;
    let report = check_formulas(&tr.ledger, a.m as u64, a.n as u64, tr.classical_message);
    emit(&report, &a.output)?;
    Ok(if report.passed() {
        Status::Ok
    } else {
        let names: Vec<_> = report.failures().map(|c| c.name.as_str()).collect();
        Status::Mismatch(format!("cost checks failed: {}", names.join(", ")))
    })
}
