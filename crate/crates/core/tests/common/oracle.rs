//! Brute-force dense-matrix oracle.
//!
//! Builds full `2^m x 2^m` operators from Kronecker products of 2x2
//! matrices written out by hand. Shares no code with the simulator, so it
//! can independently check gate application, the one-time pad, and the
//! signing/recovery operator chains.
#![allow(dead_code)]

use num_complex::Complex;

pub type C = Complex<f64>;
pub type Mat = Vec<Vec<C>>;

pub fn cx(re: f64, im: f64) -> C {
    Complex::new(re, im)
}

pub fn from_rows(m: [[C; 2]; 2]) -> Mat {
    vec![m[0].to_vec(), m[1].to_vec()]
}

pub fn identity(d: usize) -> Mat {
    (0..d)
        .map(|i| {
            (0..d)
                .map(|j| if i == j { cx(1.0, 0.0) } else { cx(0.0, 0.0) })
                .collect()
        })
        .collect()
}

pub fn pauli(label: char) -> Mat {
    let (o, z, i) = (cx(1.0, 0.0), cx(0.0, 0.0), cx(0.0, 1.0));
    match label {
        'I' => vec![vec![o, z], vec![z, o]],
        'X' => vec![vec![z, o], vec![o, z]],
        'Y' => vec![vec![z, -i], vec![i, z]],
        'Z' => vec![vec![o, z], vec![z, -o]],
        other => panic!("unknown Pauli {other}"),
    }
}

/// U(θ, φ, λ) entry by entry.
pub fn u_matrix(theta: f64, phi: f64, lambda: f64) -> Mat {
    let (s, c) = ((theta / 2.0).sin(), (theta / 2.0).cos());
    vec![
        vec![cx(c, 0.0), -Complex::from_polar(s, lambda)],
        vec![
            Complex::from_polar(s, phi),
            Complex::from_polar(c, phi + lambda),
        ],
    ]
}

pub fn kron(a: &Mat, b: &Mat) -> Mat {
    let (ra, ca, rb, cb) = (a.len(), a[0].len(), b.len(), b[0].len());
    let mut out = vec![vec![cx(0.0, 0.0); ca * cb]; ra * rb];
    for i in 0..ra {
        for j in 0..ca {
            for k in 0..rb {
                for l in 0..cb {
                    out[i * rb + k][j * cb + l] = a[i][j] * b[k][l];
                }
            }
        }
    }
    out
}

pub fn kron_all(factors: &[Mat]) -> Mat {
    factors[1..]
        .iter()
        .fold(factors[0].clone(), |acc, f| kron(&acc, f))
}

/// `I ⊗ … ⊗ g ⊗ … ⊗ I` with `g` on 1-based qubit `q` of `m`.
pub fn embed(g: &Mat, q: usize, m: usize) -> Mat {
    let factors: Vec<Mat> = (1..=m)
        .map(|i| if i == q { g.clone() } else { identity(2) })
        .collect();
    kron_all(&factors)
}

pub fn matmul(a: &Mat, b: &Mat) -> Mat {
    let (n, k, p) = (a.len(), b.len(), b[0].len());
    let mut out = vec![vec![cx(0.0, 0.0); p]; n];
    for i in 0..n {
        for j in 0..p {
            let mut s = cx(0.0, 0.0);
            for t in 0..k {
                s += a[i][t] * b[t][j];
            }
            out[i][j] = s;
        }
    }
    out
}

pub fn matvec(a: &Mat, v: &[C]) -> Vec<C> {
    a.iter()
        .map(|row| row.iter().zip(v).fold(cx(0.0, 0.0), |s, (x, y)| s + x * y))
        .collect()
}

pub fn dagger(a: &Mat) -> Mat {
    let (r, c) = (a.len(), a[0].len());
    (0..c)
        .map(|j| (0..r).map(|i| a[i][j].conj()).collect())
        .collect()
}

pub fn scale(a: &Mat, s: C) -> Mat {
    a.iter()
        .map(|row| row.iter().map(|x| x * s).collect())
        .collect()
}

pub fn max_diff(a: &Mat, b: &Mat) -> f64 {
    a.iter()
        .flatten()
        .zip(b.iter().flatten())
        .map(|(x, y)| (x - y).norm())
        .fold(0.0, f64::max)
}

/// Basis column vector for a label such as `"010"` (leftmost = qubit 1).
pub fn basis(label: &str) -> Vec<C> {
    let idx = usize::from_str_radix(label, 2).unwrap();
    let mut v = vec![cx(0.0, 0.0); 1 << label.len()];
    v[idx] = cx(1.0, 0.0);
    v
}

fn key_bit(key: &str, one_based: usize) -> bool {
    key.as_bytes()[one_based - 1] == b'1'
}

/// `⊗ᵢ X^{K₂ᵢ} Z^{K₂ᵢ₋₁}` for a key written as a `0`/`1` string.
pub fn otp_encrypt(key: &str, m: usize) -> Mat {
    let factors: Vec<Mat> = (1..=m)
        .map(|i| {
            let z = if key_bit(key, 2 * i - 1) {
                pauli('Z')
            } else {
                pauli('I')
            };
            let x = if key_bit(key, 2 * i) {
                pauli('X')
            } else {
                pauli('I')
            };
            matmul(&x, &z)
        })
        .collect();
    kron_all(&factors)
}

/// `⊗ᵢ Z^{K₂ᵢ₋₁} X^{K₂ᵢ}`.
pub fn otp_decrypt(key: &str, m: usize) -> Mat {
    dagger(&otp_encrypt(key, m))
}

/// `U(π/2, φ, 0)^{⊗m}`.
pub fn signing_unitary(phi: f64, m: usize) -> Mat {
    let u = u_matrix(std::f64::consts::FRAC_PI_2, phi, 0.0);
    kron_all(&vec![u; m])
}

/// `⊗ Vᵢ` for a Pauli label string such as `"XIZ"`.
pub fn pauli_string(labels: &str) -> Mat {
    let factors: Vec<Mat> = labels.chars().map(pauli).collect();
    kron_all(&factors)
}

pub fn fidelity(a: &[C], b: &[C]) -> f64 {
    a.iter()
        .zip(b)
        .fold(cx(0.0, 0.0), |s, (x, y)| s + x.conj() * y)
        .norm_sqr()
}

/// State SKG recovers from a signature formed with `(sign_key, sign_phi)`
/// when it decrypts with `(skg_key, skg_phi)`, applied to message `p`.
pub fn recovered(
    p: &[C],
    sign_key: &str,
    sign_phi: f64,
    skg_key: &str,
    skg_phi: f64,
    m: usize,
) -> Vec<C> {
    let sign = matmul(&otp_encrypt(sign_key, m), &signing_unitary(sign_phi, m));
    let recover = matmul(
        &dagger(&signing_unitary(skg_phi, m)),
        &otp_decrypt(skg_key, m),
    );
    matvec(&matmul(&recover, &sign), p)
}
