//! Dense statevector simulation: states, single-qubit gates, tensor
//! products, sampling, and density matrices.
//!
//! Qubit 1 is the most significant bit of a basis index, so the label
//! `"010"` names index 2 and `qubit_index = 1` addresses the leftmost
//! character.

use std::fmt;

use num_complex::Complex;
use num_traits::{One, Zero};
use rand::Rng;
use serde::ser::SerializeSeq;
use serde::{Serialize, Serializer};

use crate::bits::Bits;
use crate::error::{Error, Result};
use crate::scalar::Real;

pub type ComplexScalar<T> = Complex<T>;

fn c<T: Real>(re: f64, im: f64) -> Complex<T> {
    Complex::new(T::from_f64_lossy(re), T::from_f64_lossy(im))
}

/// 2x2 complex matrix acting on one qubit, stored row-major.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SingleQubitGate<T: Real = f64> {
    pub m: [[Complex<T>; 2]; 2],
}

impl<T: Real> SingleQubitGate<T> {
    /// Builds a gate, rejecting matrices that are not unitary.
    pub fn new(m: [[Complex<T>; 2]; 2]) -> Option<Self> {
        let g = SingleQubitGate { m };
        g.is_unitary(T::UNITARY_TOL).then_some(g)
    }

    pub fn identity() -> Self {
        let (o, z) = (Complex::one(), Complex::zero());
        SingleQubitGate {
            m: [[o, z], [z, o]],
        }
    }

    pub fn pauli_x() -> Self {
        let (o, z) = (Complex::one(), Complex::zero());
        SingleQubitGate {
            m: [[z, o], [o, z]],
        }
    }

    pub fn pauli_y() -> Self {
        let z = Complex::zero();
        SingleQubitGate {
            m: [[z, c(0.0, -1.0)], [c(0.0, 1.0), z]],
        }
    }

    pub fn pauli_z() -> Self {
        let (o, z) = (Complex::one(), Complex::zero());
        SingleQubitGate {
            m: [[o, z], [z, -o]],
        }
    }

    pub fn hadamard() -> Self {
        let h = std::f64::consts::FRAC_1_SQRT_2;
        SingleQubitGate {
            m: [[c(h, 0.0), c(h, 0.0)], [c(h, 0.0), c(-h, 0.0)]],
        }
    }

    pub fn adjoint(&self) -> Self {
        let m = &self.m;
        SingleQubitGate {
            m: [
                [m[0][0].conj(), m[1][0].conj()],
                [m[0][1].conj(), m[1][1].conj()],
            ],
        }
    }

    /// Matrix product `self * rhs` (apply `rhs` first).
    pub fn compose(&self, rhs: &Self) -> Self {
        let (a, b) = (&self.m, &rhs.m);
        let mut out = [[Complex::zero(); 2]; 2];
        for (i, row) in out.iter_mut().enumerate() {
            for (j, cell) in row.iter_mut().enumerate() {
                *cell = a[i][0] * b[0][j] + a[i][1] * b[1][j];
            }
        }
        SingleQubitGate { m: out }
    }

    pub fn is_unitary(&self, tol: f64) -> bool {
        let p = self.adjoint().compose(self);
        let id = Self::identity();
        (0..2).all(|i| (0..2).all(|j| (p.m[i][j] - id.m[i][j]).norm().as_f64() <= tol))
    }

    /// Largest entrywise distance to `other`.
    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        let mut worst = 0.0f64;
        for i in 0..2 {
            for j in 0..2 {
                worst = worst.max((self.m[i][j] - other.m[i][j]).norm().as_f64());
            }
        }
        worst
    }

    pub fn scale(&self, factor: Complex<T>) -> Self {
        let mut out = *self;
        for row in out.m.iter_mut() {
            for cell in row.iter_mut() {
                *cell = *cell * factor;
            }
        }
        out
    }
}

/// The general parameterised single-qubit gate
///
/// ```text
/// U(θ, φ, λ) = [[ cos(θ/2),          -e^{iλ} sin(θ/2)      ],
///               [ e^{iφ} sin(θ/2),    e^{i(φ+λ)} cos(θ/2)  ]]
/// ```
pub fn u_gate<T: Real>(theta: T, phi: T, lambda: T) -> SingleQubitGate<T> {
    let half = theta / (T::one() + T::one());
    let (s, co) = (half.sin(), half.cos());
    let e = |a: T| Complex::from_polar(T::one(), a);
    SingleQubitGate {
        m: [
            [Complex::new(co, T::zero()), -e(lambda) * s],
            [e(phi) * s, e(phi + lambda) * co],
        ],
    }
}

/// Normalized pure state of `num_qubits` qubits.
#[derive(Clone, PartialEq)]
pub struct StateVector<T: Real = f64> {
    num_qubits: usize,
    amps: Vec<Complex<T>>,
}

impl<T: Real> StateVector<T> {
    /// Validates length, finiteness, and normalization.
    pub fn from_amplitudes(amps: Vec<Complex<T>>) -> Result<Self> {
        let len = amps.len();
        if len < 2 || !len.is_power_of_two() {
            return Err(Error::NotPowerOfTwo(len));
        }
        if amps.iter().any(|a| !a.re.is_finite() || !a.im.is_finite()) {
            return Err(Error::NonFinite);
        }
        let norm_sqr: f64 = amps.iter().map(|a| a.norm_sqr().as_f64()).sum();
        if (norm_sqr - 1.0).abs() > T::NORM_TOL {
            return Err(Error::NotNormalized { norm_sqr });
        }
        Ok(StateVector {
            num_qubits: len.trailing_zeros() as usize,
            amps,
        })
    }

    /// Rescales arbitrary nonzero amplitudes to unit norm.
    pub fn normalized(amps: Vec<Complex<T>>) -> Result<Self> {
        let norm = amps.iter().map(|a| a.norm_sqr()).sum::<T>().sqrt();
        if norm.is_zero() || !norm.is_finite() {
            return Err(Error::NotNormalized {
                norm_sqr: (norm * norm).as_f64(),
            });
        }
        Self::from_amplitudes(amps.into_iter().map(|a| a / norm).collect())
    }

    pub fn num_qubits(&self) -> usize {
        self.num_qubits
    }

    pub fn dim(&self) -> usize {
        self.amps.len()
    }

    pub fn amplitudes(&self) -> &[Complex<T>] {
        &self.amps
    }

    pub fn amplitude(&self, label: &str) -> Option<Complex<T>> {
        let bits: Bits = label.parse().ok()?;
        (bits.len() == self.num_qubits).then(|| self.amps[bits.to_index()])
    }

    pub fn norm_sqr(&self) -> f64 {
        self.amps.iter().map(|a| a.norm_sqr().as_f64()).sum()
    }

    /// Multiplies every amplitude by `phase`, which must have unit modulus.
    pub fn with_global_phase(&self, phase: Complex<T>) -> Self {
        StateVector {
            num_qubits: self.num_qubits,
            amps: self.amps.iter().map(|a| *a * phase).collect(),
        }
    }

    /// Index of the basis state if this is one (up to phase).
    pub fn as_basis_index(&self) -> Option<usize> {
        let tol = T::NORM_TOL;
        let idx = self
            .amps
            .iter()
            .position(|a| (a.norm_sqr().as_f64() - 1.0).abs() <= tol)?;
        let rest: f64 = self
            .amps
            .iter()
            .enumerate()
            .filter(|(i, _)| *i != idx)
            .map(|(_, a)| a.norm_sqr().as_f64())
            .sum();
        (rest <= tol).then_some(idx)
    }

    pub fn probabilities(&self) -> Vec<f64> {
        self.amps.iter().map(|a| a.norm_sqr().as_f64()).collect()
    }

    /// Casts the amplitudes to another scalar type.
    pub fn cast<U: Real>(&self) -> StateVector<U> {
        StateVector {
            num_qubits: self.num_qubits,
            amps: self
                .amps
                .iter()
                .map(|a| {
                    Complex::new(
                        U::from_f64_lossy(a.re.as_f64()),
                        U::from_f64_lossy(a.im.as_f64()),
                    )
                })
                .collect(),
        }
    }
}

impl<T: Real> fmt::Debug for StateVector<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut list = f.debug_map();
        for (i, a) in self.amps.iter().enumerate() {
            if a.norm_sqr().as_f64() > 1e-24 {
                list.entry(&Bits::from_index(i, self.num_qubits).to_string(), a);
            }
        }
        list.finish()
    }
}

impl<T: Real> Serialize for StateVector<T> {
    /// `[[re, im], ...]` in basis-index order.
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        let mut seq = serializer.serialize_seq(Some(self.amps.len()))?;
        for a in &self.amps {
            seq.serialize_element(&[a.re.as_f64(), a.im.as_f64()])?;
        }
        seq.end()
    }
}

/// Computational-basis state named by `bits` (leftmost bit is qubit 1).
pub fn basis_state<T: Real>(bits: &Bits) -> Result<StateVector<T>> {
    if bits.is_empty() {
        return Err(Error::EmptyBits);
    }
    let mut amps = vec![Complex::zero(); 1 << bits.len()];
    amps[bits.to_index()] = Complex::one();
    Ok(StateVector {
        num_qubits: bits.len(),
        amps,
    })
}

/// Applies `gate` to the 1-based `qubit_index`, i.e. `I ⊗ … ⊗ gate ⊗ … ⊗ I`.
pub fn apply_single<T: Real>(
    state: &StateVector<T>,
    gate: &SingleQubitGate<T>,
    qubit_index: usize,
) -> Result<StateVector<T>> {
    let mut out = state.clone();
    apply_single_in_place(&mut out, gate, qubit_index)?;
    Ok(out)
}

pub(crate) fn apply_single_in_place<T: Real>(
    state: &mut StateVector<T>,
    gate: &SingleQubitGate<T>,
    qubit_index: usize,
) -> Result<()> {
    let n = state.num_qubits;
    if qubit_index == 0 || qubit_index > n {
        return Err(Error::QubitOutOfRange {
            index: qubit_index,
            num_qubits: n,
        });
    }
    let stride = 1usize << (n - qubit_index);
    let g = &gate.m;
    for block in (0..state.amps.len()).step_by(2 * stride) {
        for i0 in block..block + stride {
            let i1 = i0 + stride;
            let (a0, a1) = (state.amps[i0], state.amps[i1]);
            state.amps[i0] = g[0][0] * a0 + g[0][1] * a1;
            state.amps[i1] = g[1][0] * a0 + g[1][1] * a1;
        }
    }
    Ok(())
}

/// Applies the same gate to every qubit.
pub fn apply_all<T: Real>(state: &StateVector<T>, gate: &SingleQubitGate<T>) -> StateVector<T> {
    let mut out = state.clone();
    for q in 1..=out.num_qubits {
        apply_single_in_place(&mut out, gate, q).expect("index within range");
    }
    out
}

/// Kronecker product; `a` occupies the leading (more significant) qubits.
pub fn tensor<T: Real>(a: &StateVector<T>, b: &StateVector<T>) -> StateVector<T> {
    let amps = a
        .amps
        .iter()
        .flat_map(|x| b.amps.iter().map(move |y| *x * *y))
        .collect();
    StateVector {
        num_qubits: a.num_qubits + b.num_qubits,
        amps,
    }
}

/// `|⟨a|b⟩|²`, clamped to [0, 1].
pub fn fidelity<T: Real>(a: &StateVector<T>, b: &StateVector<T>) -> Result<f64> {
    if a.num_qubits != b.num_qubits {
        return Err(Error::DimensionMismatch {
            left: a.num_qubits,
            right: b.num_qubits,
        });
    }
    let overlap: Complex<T> = a
        .amps
        .iter()
        .zip(&b.amps)
        .fold(Complex::zero(), |acc, (x, y)| acc + x.conj() * *y);
    Ok(overlap.norm_sqr().as_f64().clamp(0.0, 1.0))
}

/// Samples a computational-basis outcome with probability `|amplitude|²`.
pub fn measure_all<T: Real, R: Rng + ?Sized>(state: &StateVector<T>, rng: &mut R) -> Bits {
    let r: f64 = rng.gen();
    let mut acc = 0.0;
    let mut last_nonzero = 0;
    for (i, a) in state.amps.iter().enumerate() {
        let p = a.norm_sqr().as_f64();
        if p > 0.0 {
            last_nonzero = i;
        }
        acc += p;
        if r < acc {
            return Bits::from_index(i, state.num_qubits);
        }
    }
    // rounding left the cumulative sum just below r
    Bits::from_index(last_nonzero, state.num_qubits)
}

/// Product state with each qubit drawn uniformly from the Bloch sphere.
pub fn random_product_state<T: Real, R: Rng + ?Sized>(
    num_qubits: usize,
    rng: &mut R,
) -> StateVector<T> {
    let mut state = one_qubit_bloch::<T, R>(rng);
    for _ in 1..num_qubits {
        state = tensor(&state, &one_qubit_bloch(rng));
    }
    state
}

fn one_qubit_bloch<T: Real, R: Rng + ?Sized>(rng: &mut R) -> StateVector<T> {
    let cos_theta: f64 = rng.gen_range(-1.0..=1.0);
    let theta = cos_theta.acos();
    let phi: f64 = rng.gen_range(0.0..std::f64::consts::TAU);
    StateVector {
        num_qubits: 1,
        amps: vec![
            c((theta / 2.0).cos(), 0.0),
            c(
                (theta / 2.0).sin() * phi.cos(),
                (theta / 2.0).sin() * phi.sin(),
            ),
        ],
    }
}

/// Haar-random pure state (normalized complex Gaussian vector).
pub fn random_state<T: Real, R: Rng + ?Sized>(num_qubits: usize, rng: &mut R) -> StateVector<T> {
    use rand_distr::StandardNormal;
    let amps: Vec<Complex<T>> = (0..1usize << num_qubits)
        .map(|_| {
            let re: f64 = rng.sample(StandardNormal);
            let im: f64 = rng.sample(StandardNormal);
            c(re, im)
        })
        .collect();
    StateVector::normalized(amps).expect("gaussian vector is nonzero")
}

/// Density matrix of dimension `2^m`, row-major.
#[derive(Clone, Debug, PartialEq)]
pub struct DensityMatrix<T: Real = f64> {
    dim: usize,
    entries: Vec<Complex<T>>,
}

impl<T: Real> DensityMatrix<T> {
    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn get(&self, row: usize, col: usize) -> Complex<T> {
        self.entries[row * self.dim + col]
    }

    pub fn maximally_mixed(num_qubits: usize) -> Self {
        let dim = 1 << num_qubits;
        let w = T::one() / T::from_usize(dim).expect("dimension fits");
        let mut entries = vec![Complex::zero(); dim * dim];
        for i in 0..dim {
            entries[i * dim + i] = Complex::new(w, T::zero());
        }
        DensityMatrix { dim, entries }
    }

    pub fn trace(&self) -> Complex<T> {
        (0..self.dim)
            .map(|i| self.get(i, i))
            .fold(Complex::zero(), |a, b| a + b)
    }

    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        self.entries
            .iter()
            .zip(&other.entries)
            .map(|(a, b)| (*a - *b).norm().as_f64())
            .fold(0.0, f64::max)
    }

    /// Hermitian, unit trace, and positive semidefinite within `tol`.
    pub fn is_valid(&self, tol: f64) -> bool {
        let d = self.dim;
        let hermitian = (0..d).all(|i| {
            (0..d).all(|j| (self.get(i, j) - self.get(j, i).conj()).norm().as_f64() <= tol)
        });
        let tr = self.trace();
        hermitian
            && (tr.re.as_f64() - 1.0).abs() <= tol
            && tr.im.as_f64().abs() <= tol
            && self.psd_shifted(tol)
    }

    /// Cholesky of `ρ + tol·I` succeeds iff no eigenvalue is below `-tol`.
    fn psd_shifted(&self, tol: f64) -> bool {
        let d = self.dim;
        let mut a: Vec<Complex<f64>> = self
            .entries
            .iter()
            .map(|z| Complex::new(z.re.as_f64(), z.im.as_f64()))
            .collect();
        for i in 0..d {
            a[i * d + i].re += tol;
        }
        let mut l = vec![Complex::<f64>::zero(); d * d];
        for j in 0..d {
            let mut diag = a[j * d + j].re;
            for k in 0..j {
                diag -= l[j * d + k].norm_sqr();
            }
            if diag <= 0.0 {
                return false;
            }
            let ljj = diag.sqrt();
            l[j * d + j] = Complex::new(ljj, 0.0);
            for i in j + 1..d {
                let mut s = a[i * d + j];
                for k in 0..j {
                    s -= l[i * d + k] * l[j * d + k].conj();
                }
                l[i * d + j] = s / ljj;
            }
        }
        true
    }
}

/// Outer product `|ψ⟩⟨ψ|`.
pub fn density_of<T: Real>(state: &StateVector<T>) -> DensityMatrix<T> {
    let dim = state.dim();
    let mut entries = Vec::with_capacity(dim * dim);
    for a in &state.amps {
        for b in &state.amps {
            entries.push(*a * b.conj());
        }
    }
    DensityMatrix { dim, entries }
}

/// Convex combination `Σ wᵢ ρᵢ`.
pub fn mix<T: Real>(dms: &[DensityMatrix<T>], weights: &[f64]) -> Result<DensityMatrix<T>> {
    let first = dms.first().ok_or(Error::EmptyMixture)?;
    if dms.len() != weights.len() {
        return Err(Error::InvalidConfig(format!(
            "{} density matrices but {} weights",
            dms.len(),
            weights.len()
        )));
    }
    let sum: f64 = weights.iter().sum();
    if weights.iter().any(|w| *w < 0.0 || !w.is_finite()) || (sum - 1.0).abs() > 1e-9 {
        return Err(Error::WeightSum(sum));
    }
    let dim = first.dim;
    let mut entries = vec![Complex::<T>::zero(); dim * dim];
    for (dm, &w) in dms.iter().zip(weights) {
        if dm.dim != dim {
            return Err(Error::DimensionMismatch {
                left: first.dim.trailing_zeros() as usize,
                right: dm.dim.trailing_zeros() as usize,
            });
        }
        let w = T::from_f64_lossy(w);
        for (acc, e) in entries.iter_mut().zip(&dm.entries) {
            *acc = *acc + *e * w;
        }
    }
    Ok(DensityMatrix { dim, entries })
}

#[cfg(test)]
use crate::oracle;
