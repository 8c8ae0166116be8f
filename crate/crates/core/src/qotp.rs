//! Quantum one-time pad: Pauli masks selected by a shared classical key.
//!
//! Qubit `i` (1-based) is keyed by bits `K_{2i-1}` (Z mask) and `K_{2i}`
//! (X mask). Encryption applies Z then X; decryption undoes X then Z.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::bits::Bits;
use crate::error::{Error, Result};
use crate::scalar::Real;
use crate::statevector::{
    apply_single_in_place, density_of, mix, DensityMatrix, SingleQubitGate, StateVector,
};

/// Largest payload `secrecy_oracle` will enumerate (4^4 = 256 keys).
pub const SECRECY_ENUMERATION_MAX: usize = 4;

/// Anything that can hand out shared uniformly random key bits.
pub trait KeySource {
    fn draw_bits(&mut self, len: usize) -> Result<Bits>;
}

#[derive(Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct OtpKey(Bits);

impl OtpKey {
    pub fn new(bits: Bits) -> Self {
        OtpKey(bits)
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

    /// Number of qubits this key can pad.
    pub fn capacity(&self) -> usize {
        self.0.len() / 2
    }

    /// Key bit `K_j` with 1-based `j`; the only place indices are shifted.
    fn bit(&self, one_based: usize) -> bool {
        self.0
            .get(one_based - 1)
            .expect("key length checked by caller")
    }

    /// Z-mask bit `K_{2i-1}` of qubit `i`.
    pub fn z_bit(&self, qubit: usize) -> bool {
        self.bit(2 * qubit - 1)
    }

    /// X-mask bit `K_{2i}` of qubit `i`.
    pub fn x_bit(&self, qubit: usize) -> bool {
        self.bit(2 * qubit)
    }

    fn check_covers(&self, num_qubits: usize) -> Result<()> {
        if self.len() < 2 * num_qubits {
            return Err(Error::KeyTooShort {
                needed: 2 * num_qubits,
                got: self.len(),
            });
        }
        Ok(())
    }
}

impl FromStr for OtpKey {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        s.parse().map(OtpKey)
    }
}

impl fmt::Display for OtpKey {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.0.fmt(f)
    }
}

impl fmt::Debug for OtpKey {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "OtpKey({})", self.0)
    }
}

/// Draws a `2n`-bit key for an `n`-qubit payload.
pub fn keygen<S: KeySource + ?Sized>(n: usize, source: &mut S) -> Result<OtpKey> {
    if n == 0 {
        return Err(Error::ZeroQubits);
    }
    let bits = source.draw_bits(2 * n)?;
    debug_assert_eq!(bits.len(), 2 * n);
    Ok(OtpKey(bits))
}

/// `E_K(|P⟩) = ⊗ᵢ X^{K₂ᵢ} Z^{K₂ᵢ₋₁} |pᵢ⟩`.
pub fn encrypt<T: Real>(state: &StateVector<T>, key: &OtpKey) -> Result<StateVector<T>> {
    let n = state.num_qubits();
    key.check_covers(n)?;
    let (x, z) = (SingleQubitGate::pauli_x(), SingleQubitGate::pauli_z());
    let mut out = state.clone();
    for q in 1..=n {
        if key.z_bit(q) {
            apply_single_in_place(&mut out, &z, q)?;
        }
    }
    for q in 1..=n {
        if key.x_bit(q) {
            apply_single_in_place(&mut out, &x, q)?;
        }
    }
    Ok(out)
}

/// Inverse of [`encrypt`]: X masks first, then Z masks.
pub fn decrypt<T: Real>(state: &StateVector<T>, key: &OtpKey) -> Result<StateVector<T>> {
    let n = state.num_qubits();
    key.check_covers(n)?;
    let (x, z) = (SingleQubitGate::pauli_x(), SingleQubitGate::pauli_z());
    let mut out = state.clone();
    for q in 1..=n {
        if key.x_bit(q) {
            apply_single_in_place(&mut out, &x, q)?;
        }
    }
    for q in 1..=n {
        if key.z_bit(q) {
            apply_single_in_place(&mut out, &z, q)?;
        }
    }
    Ok(out)
}

/// Key-averaged ciphertext `(1/4ⁿ) Σ_K ρ(E_K(P))` over every `2n`-bit key.
pub fn secrecy_oracle<T: Real>(state: &StateVector<T>) -> Result<DensityMatrix<T>> {
    let n = state.num_qubits();
    if n > SECRECY_ENUMERATION_MAX {
        return Err(Error::EnumerationBound {
            num_qubits: n,
            max: SECRECY_ENUMERATION_MAX,
        });
    }
    let count = 1usize << (2 * n);
    let dms = (0..count)
        .map(|k| encrypt(state, &OtpKey(Bits::from_index(k, 2 * n))).map(|c| density_of(&c)))
        .collect::<Result<Vec<_>>>()?;
    mix(&dms, &vec![1.0 / count as f64; count])
}

#[cfg(test)]
use crate::oracle;

#[cfg(test)]
mod tests {
    use super::*;
    use crate::statevector::{
        apply_all, basis_state, fidelity, random_product_state, random_state, u_gate,
    };
    use num_complex::Complex;
    use proptest::prelude::{any, prop_assert, proptest};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;
    use std::f64::consts::{FRAC_1_SQRT_2, PI};

    struct Fixed(Vec<Bits>);

    impl KeySource for Fixed {
        fn draw_bits(&mut self, _len: usize) -> Result<Bits> {
            self.0.pop().ok_or(Error::MissingPriorKey)
        }
    }

    struct Seeded(ChaCha8Rng);

    impl KeySource for Seeded {
        fn draw_bits(&mut self, len: usize) -> Result<Bits> {
            Ok(Bits::random(len, &mut self.0))
        }
    }

    fn key(s: &str) -> OtpKey {
        s.parse().unwrap()
    }

    fn basis(s: &str) -> StateVector {
        basis_state(&s.parse().unwrap()).unwrap()
    }

    fn sparse(pairs: &[(&str, f64)]) -> StateVector {
        let n = pairs[0].0.len();
        let mut amps = vec![Complex::new(0.0, 0.0); 1 << n];
        for (label, v) in pairs {
            amps[usize::from_str_radix(label, 2).unwrap()] = Complex::new(*v, 0.0);
        }
        StateVector::from_amplitudes(amps).unwrap()
    }

    #[test]
    fn keygen_lengths_and_injection() {
        let mut src = Seeded(ChaCha8Rng::seed_from_u64(1));
        assert_eq!(keygen(3, &mut src).unwrap().len(), 6);
        let mut fixed = Fixed(vec!["100101".parse().unwrap(), "010110".parse().unwrap()]);
        assert_eq!(keygen(3, &mut fixed).unwrap(), key("010110"));
        assert_eq!(keygen(3, &mut fixed).unwrap(), key("100101"));
        assert_eq!(keygen(0, &mut src), Err(Error::ZeroQubits));
    }

    #[test]
    fn toy_key_masks() {
        // 010110 pads qubits as X, X, Z
        let k = key("010110");
        assert_eq!((k.z_bit(1), k.x_bit(1)), (false, true));
        assert_eq!((k.z_bit(2), k.x_bit(2)), (false, true));
        assert_eq!((k.z_bit(3), k.x_bit(3)), (true, false));
    }

    #[test]
    fn encrypt_examples() {
        assert_eq!(
            encrypt(&basis("010"), &key("010110")).unwrap(),
            basis("100")
        );
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let psi: StateVector = random_state(3, &mut rng);
        assert_eq!(encrypt(&psi, &key("000000")).unwrap(), psi);

        let q = 1.0 / (2.0 * 2f64.sqrt());
        let signed = apply_all(&basis("010"), &u_gate(PI / 2.0, PI, 0.0));
        let s = encrypt(&signed, &key("010110")).unwrap();
        let expect = sparse(&[
            ("110", q),
            ("010", -q),
            ("100", q),
            ("000", -q),
            ("111", q),
            ("011", -q),
            ("101", q),
            ("001", -q),
        ]);
        // U|1⟩ = -|+⟩, so the match is up to a global sign
        assert!(fidelity(&s, &expect).unwrap() > 1.0 - 1e-12);
    }

    #[test]
    fn decrypt_examples() {
        assert_eq!(
            decrypt(&basis("100"), &key("010110")).unwrap(),
            basis("010")
        );
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let psi: StateVector = random_state(2, &mut rng);
        assert_eq!(decrypt(&psi, &key("0000")).unwrap(), psi);

        let signed = apply_all(&basis("010"), &u_gate(PI / 2.0, PI, 0.0));
        let s = encrypt(&signed, &key("010110")).unwrap();
        let t = encrypt(&s, &key("100101")).unwrap();
        let back = decrypt(&t, &key("100101")).unwrap();
        assert!(fidelity(&back, &s).unwrap() > 1.0 - 1e-12);
    }

    #[test]
    fn short_key_is_rejected() {
        let err = Error::KeyTooShort { needed: 6, got: 4 };
        assert_eq!(encrypt(&basis("010"), &key("0101")), Err(err.clone()));
        assert_eq!(decrypt(&basis("010"), &key("0101")), Err(err));
    }

    #[test]
    fn longer_keys_use_leading_bits() {
        assert_eq!(
            encrypt(&basis("010"), &key("010110111111")).unwrap(),
            basis("100")
        );
    }

    #[test]
    fn encrypt_matches_oracle_operator() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        for m in 1..=3 {
            for k in 0..1usize << (2 * m) {
                let kb = Bits::from_index(k, 2 * m);
                let psi: StateVector = random_state(m, &mut rng);
                let got = encrypt(&psi, &OtpKey(kb.clone())).unwrap();
                let expect =
                    oracle::matvec(&oracle::otp_encrypt(&kb.to_string(), m), psi.amplitudes());
                for (a, b) in got.amplitudes().iter().zip(&expect) {
                    assert!((a - b).norm() < 1e-12);
                }
            }
        }
    }

    #[test]
    fn secrecy_examples() {
        let h = FRAC_1_SQRT_2;
        let zero = basis("0");
        let plus = sparse(&[("0", h), ("1", h)]);
        for p in [&zero, &plus] {
            let rho = secrecy_oracle(p).unwrap();
            assert!(rho.max_abs_diff(&DensityMatrix::maximally_mixed(1)) <= 1e-9);
        }
        let rho = secrecy_oracle(&basis("01")).unwrap();
        assert!(rho.max_abs_diff(&DensityMatrix::maximally_mixed(2)) <= 1e-9);
        assert_eq!(
            secrecy_oracle(&basis("00000")),
            Err(Error::EnumerationBound {
                num_qubits: 5,
                max: 4
            })
        );
    }

    #[test]
    fn secrecy_holds_for_random_states() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for m in 1..=3 {
            for _ in 0..4 {
                let p: StateVector = random_state(m, &mut rng);
                let rho = secrecy_oracle(&p).unwrap();
                assert!(rho.is_valid(1e-9));
                assert!(rho.max_abs_diff(&DensityMatrix::maximally_mixed(m)) <= 1e-9);
            }
        }
    }

    #[test]
    fn wrong_x_mask_gives_orthogonal_state() {
        let mut rng = ChaCha8Rng::seed_from_u64(6);
        for _ in 0..50 {
            let m = rng.gen_range(1..=4);
            let psi: StateVector = basis_state(&Bits::random(m, &mut rng)).unwrap();
            let k = OtpKey(Bits::random(2 * m, &mut rng));
            let mut wrong = k.bits().clone();
            let q = rng.gen_range(1..=m);
            wrong.flip(2 * q - 1);
            let out = decrypt(&encrypt(&psi, &k).unwrap(), &OtpKey(wrong)).unwrap();
            assert_eq!(fidelity(&out, &psi).unwrap(), 0.0);
        }
    }

    proptest! {
        #[test]
        fn round_trip(seed in any::<u64>(), m in 1usize..=4) {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let psi: StateVector = if seed % 2 == 0 { random_state(m, &mut rng) } else { random_product_state(m, &mut rng) };
            let k = OtpKey(Bits::random(2 * m, &mut rng));
            let back = decrypt(&encrypt(&psi, &k).unwrap(), &k).unwrap();
            prop_assert!(fidelity(&back, &psi).unwrap() >= 1.0 - 1e-9);
        }
    }
}
