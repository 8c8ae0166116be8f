//! Simulator for a quantum identity-based signature protocol: a dense
//! statevector core, the quantum one-time pad, key establishment, the
//! signer / verifier / key-generator state machines, attacks, channel
//! noise and communication-cost accounting.
//!
//! The numeric core is generic over [`Real`] (`f32` or `f64`); the aliases
//! at the crate root fix it to `f64`.

pub mod adversary;
pub mod bits;
pub mod costs;
pub mod email;
pub mod error;
pub mod keyestab;
pub mod noise;
pub mod protocol;
pub mod qotp;
pub mod scalar;
pub mod statevector;
pub mod toy;

#[cfg(test)]
#[path = "../tests/common/oracle.rs"]
mod oracle;

pub use bits::Bits;
pub use error::{Error, Result};
pub use scalar::Real;

pub type StateVector = statevector::StateVector<f64>;
pub type SingleQubitGate = statevector::SingleQubitGate<f64>;
pub type DensityMatrix = statevector::DensityMatrix<f64>;
pub type Message = protocol::Message<f64>;
pub type SignatureTuple = protocol::SignatureTuple<f64>;
pub type ProtocolConfig = protocol::ProtocolConfig<f64>;
pub type Transcript = protocol::Transcript<f64>;
pub type Verifier = protocol::Verifier<f64>;
