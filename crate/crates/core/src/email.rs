//! Signed-email demo: the sender signs a short digest of the message body,
//! and the recipient checks it against the digest of what arrived.
//!
//! The digest is an XOR fold, not a cryptographic hash: bit `j` of an
//! `m`-bit digest is the parity of every message bit whose position is
//! `j mod m`. Flipping any single message bit therefore flips exactly one
//! digest bit. The sender's identity is the same fold of the address.

use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::bits::Bits;
use crate::costs::CostLedger;
use crate::error::{Error, Result};
use crate::protocol::{
    initialize, Comparator, Identity, Message, Outcome, SignatureTuple, SignerSetup,
};
use crate::statevector::basis_state;

pub const DEFAULT_DIGEST_BITS: usize = 8;
pub const DEFAULT_SENDER: &str = "alice@example.com";

/// `m`-bit XOR fold of `data`, bits taken most significant first per byte.
pub fn fold_digest(data: &[u8], m: usize) -> Result<Bits> {
    if m == 0 {
        return Err(Error::ZeroQubits);
    }
    let mut out = vec![false; m];
    let bits = data
        .iter()
        .flat_map(|b| (0..8).rev().map(move |i| (b >> i) & 1 == 1));
    for (pos, bit) in bits.enumerate() {
        out[pos % m] ^= bit;
    }
    Ok(Bits::new(out))
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct EmailReport {
    pub sender: String,
    pub sender_identity: Identity,
    pub message: String,
    pub signed_digest: Bits,
    pub received_digest: Bits,
    /// Position (in message bits) flipped after signing, if tampered.
    pub flipped_bit: Option<usize>,
    pub outcome: Outcome,
    pub fidelity: Option<f64>,
}

/// Signs `message` as `sender` and verifies it at the recipient, optionally
/// flipping one message bit in transit.
pub fn email_demo(
    sender: &str,
    message: &str,
    m: usize,
    n: u32,
    seed: u64,
    tamper: bool,
) -> Result<EmailReport> {
    if message.is_empty() {
        return Err(Error::InvalidConfig(
            "email message must not be empty".into(),
        ));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let ledger = Arc::new(CostLedger::new());
    let identity = Identity::new(fold_digest(sender.as_bytes(), m)?);
    let init = initialize::<f64, _>(
        &[SignerSetup::random(identity.clone())],
        None,
        m,
        n,
        &mut rng,
        &ledger,
    )?;
    let (registry, mut verifier) = (init.registry, init.verifier);

    let signed_digest = fold_digest(message.as_bytes(), m)?;
    let tuple = init.signers[0].sign(&Message::Classical(signed_digest.clone()), &ledger)?;

    let mut received = message.as_bytes().to_vec();
    let flipped_bit = tamper.then(|| {
        let pos = rng.gen_range(0..received.len() * 8);
        received[pos / 8] ^= 0x80 >> (pos % 8);
        pos
    });
    let received_digest = fold_digest(&received, m)?;
    let at_recipient = SignatureTuple {
        p: basis_state(&received_digest)?,
        ..tuple
    };

    let request = verifier.verify_request(&at_recipient, &ledger)?;
    let response = registry.respond(&request, &mut rng, &ledger)?;
    let verdict = verifier.finalize(&response, Comparator::Exact, &mut rng, &ledger)?;
    Ok(EmailReport {
        sender: sender.into(),
        sender_identity: identity,
        message: message.into(),
        signed_digest,
        received_digest,
        flipped_bit,
        outcome: verdict.outcome,
        fidelity: verdict.fidelity,
    })
}
