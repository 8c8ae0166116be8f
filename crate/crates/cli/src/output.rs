//! Plain-text renderings of the reports. JSON goes through serde directly.

use std::fmt::Write;

use qibs::adversary::CampaignReport;
use qibs::costs::{CheckStatus, FormulaReport};
use qibs::email::EmailReport;
use qibs::toy::ToyReport;
use qibs::Transcript;

use crate::ExperimentReport;

pub trait Emit {
    fn text(&self) -> String;
}

fn opt(x: Option<f64>) -> String {
    x.map_or_else(|| "-".into(), |v| format!("{v:.6}"))
}

impl Emit for ToyReport {
    fn text(&self) -> String {
        let mut s = String::new();
        for c in &self.checkpoints {
            let worst = c.states.iter().map(|st| st.deviation).fold(0.0, f64::max);
            let mark = if c.passed { "ok" } else { "FAIL" };
            if c.states.is_empty() {
                let _ = writeln!(
                    s,
                    "{mark:4} {:22} {}",
                    c.name,
                    c.detail.as_deref().unwrap_or("")
                );
            } else {
                let _ = writeln!(s, "{mark:4} {:22} max deviation {worst:.3e}", c.name);
            }
        }
        let _ = writeln!(s, "outcome: {}", self.outcome);
        match &self.first_failure {
            None => s.push_str("all checkpoints match\n"),
            Some(name) => {
                let _ = writeln!(s, "first mismatch: {name}");
            }
        }
        s
    }
}

impl Emit for Transcript {
    fn text(&self) -> String {
        let mut s = String::new();
        let _ = writeln!(s, "identity {}  m={} n={}", self.identity, self.m, self.n);
        for e in &self.messages {
            let _ = writeln!(
                s,
                "  {:?} -> {:?}  {:?}  {} qubits",
                e.from, e.to, e.kind, e.qubits
            );
        }
        let _ = writeln!(s, "total qubits: {}", self.total_qubits());
        let _ = writeln!(s, "fidelity: {}", opt(self.fidelity));
        if let Some(est) = self.swap_estimate {
            let _ = writeln!(s, "swap-test estimate: {est:.6}");
        }
        if let Some(bits) = &self.measured {
            let _ = writeln!(s, "verifier readout: {bits}");
        }
        if let Some(why) = &self.reject_reason {
            let _ = writeln!(s, "reason: {why}");
        }
        let _ = writeln!(s, "outcome: {}", self.outcome);
        s
    }
}

impl Emit for CampaignReport {
    fn text(&self) -> String {
        let mut s = String::new();
        let _ = writeln!(s, "attack: {:?}", self.attack);
        let _ = writeln!(s, "trials: {}  rejected: {}", self.trials, self.rejected);
        let _ = writeln!(s, "rejection rate: {}", opt(self.rejection_rate));
        let _ = writeln!(s, "mean fidelity: {}", opt(self.mean_fidelity));
        let _ = writeln!(
            s,
            "oracle agreement: {}/{}",
            self.oracle_agreements, self.trials
        );
        let accepted: Vec<_> = self.accepted().map(|r| r.detail.as_str()).collect();
        if !accepted.is_empty() {
            let _ = writeln!(s, "accepted: {}", accepted.join(" "));
        }
        s
    }
}

impl Emit for ExperimentReport {
    fn text(&self) -> String {
        let mut s = String::from("kind,p,trials,accepted,acceptance,ci_low,ci_high\n");
        for r in &self.rows {
            let _ = writeln!(
                s,
                "{},{},{},{},{:.6},{:.6},{:.6}",
                r.kind, r.p, r.trials, r.accepted, r.acceptance, r.ci_low, r.ci_high
            );
        }
        s
    }
}

impl Emit for EmailReport {
    fn text(&self) -> String {
        let mut s = String::new();
        let _ = writeln!(
            s,
            "from: {} (identity {})",
            self.sender, self.sender_identity
        );
        let _ = writeln!(s, "signed digest:   {}", self.signed_digest);
        let _ = writeln!(s, "received digest: {}", self.received_digest);
        if let Some(pos) = self.flipped_bit {
            let _ = writeln!(s, "tampered: flipped message bit {pos}");
        }
        let _ = writeln!(s, "fidelity: {}", opt(self.fidelity));
        let _ = writeln!(s, "outcome: {}", self.outcome);
        s
    }
}

impl Emit for FormulaReport {
    fn text(&self) -> String {
        let mut s = String::new();
        let _ = writeln!(s, "m={} n={}", self.m, self.n);
        for c in &self.checks {
            let mark = match c.status {
                CheckStatus::Pass => "ok",
                CheckStatus::Fail => "FAIL",
                CheckStatus::NotApplicable => "n/a",
            };
            let _ = writeln!(
                s,
                "{mark:4} {:42} {:>7}  expected {:>5}  observed {:>5}",
                c.name, c.formula, c.expected, c.observed
            );
        }
        s
    }
}
