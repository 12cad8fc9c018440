use num_complex::Complex64;
use std::f64::consts::FRAC_1_SQRT_2;

use crate::error::{Error, Result};

/// Largest register simulated unless a caller raises the limit explicitly.
pub const DEFAULT_MAX_QUBITS: usize = 24;

/// Hard ceiling independent of configuration.
pub const ABSOLUTE_MAX_QUBITS: usize = 30;

/// Dense amplitudes over `num_qubits` qubits. Qubit `j` is bit `j` of the
/// basis index.
#[derive(Debug, Clone, PartialEq)]
pub struct StateVector {
    amps: Vec<Complex64>,
    num_qubits: usize,
}

pub(crate) fn check_capacity(num_qubits: usize, limit: usize) -> Result<()> {
    let limit = limit.min(ABSOLUTE_MAX_QUBITS);
    if num_qubits > limit {
        return Err(Error::capacity(format!(
            "register of {num_qubits} qubits exceeds the limit of {limit} qubits ({} amplitudes requested)",
            1u64 << num_qubits.min(63)
        )));
    }
    Ok(())
}

impl StateVector {
    /// `|0...0>` on `num_qubits` qubits, subject to [`DEFAULT_MAX_QUBITS`].
    pub fn zeros(num_qubits: usize) -> Result<Self> {
        Self::zeros_with_limit(num_qubits, DEFAULT_MAX_QUBITS)
    }

    pub fn zeros_with_limit(num_qubits: usize, max_qubits: usize) -> Result<Self> {
        Self::basis_with_limit(num_qubits, 0, max_qubits)
    }

    pub fn basis(num_qubits: usize, index: usize) -> Result<Self> {
        Self::basis_with_limit(num_qubits, index, DEFAULT_MAX_QUBITS)
    }

    fn basis_with_limit(num_qubits: usize, index: usize, max_qubits: usize) -> Result<Self> {
        check_capacity(num_qubits, max_qubits)?;
        let dim = 1usize << num_qubits;
        if index >= dim {
            return Err(Error::IndexOutOfRange { index, limit: dim });
        }
        let mut amps = vec![Complex64::new(0.0, 0.0); dim];
        amps[index] = Complex64::new(1.0, 0.0);
        Ok(Self { amps, num_qubits })
    }

    /// Wraps raw amplitudes; the length must be a power of two. The vector is
    /// not renormalized.
    pub fn from_amplitudes(amps: Vec<Complex64>) -> Result<Self> {
        let dim = amps.len();
        if dim == 0 || !dim.is_power_of_two() {
            return Err(Error::input(format!(
                "amplitude count {dim} is not a power of two"
            )));
        }
        let num_qubits = dim.trailing_zeros() as usize;
        check_capacity(num_qubits, ABSOLUTE_MAX_QUBITS)?;
        Ok(Self { amps, num_qubits })
    }

    pub fn num_qubits(&self) -> usize {
        self.num_qubits
    }

    pub fn dim(&self) -> usize {
        self.amps.len()
    }

    pub fn amplitudes(&self) -> &[Complex64] {
        &self.amps
    }

    pub(crate) fn amplitudes_mut(&mut self) -> &mut [Complex64] {
        &mut self.amps
    }

    pub fn amplitude(&self, index: usize) -> Complex64 {
        self.amps[index]
    }

    pub fn norm_sqr(&self) -> f64 {
        self.amps.iter().map(Complex64::norm_sqr).sum()
    }

    /// Largest per-amplitude distance to `other`.
    pub fn max_abs_diff(&self, other: &StateVector) -> f64 {
        assert_eq!(self.dim(), other.dim(), "comparing states of different size");
        self.amps
            .iter()
            .zip(&other.amps)
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max)
    }

    fn check_qubit(&self, qubit: usize) -> Result<()> {
        if qubit >= self.num_qubits {
            return Err(Error::IndexOutOfRange {
                index: qubit,
                limit: self.num_qubits,
            });
        }
        Ok(())
    }

    pub fn apply_hadamard(&mut self, qubit: usize) -> Result<()> {
        self.check_qubit(qubit)?;
        let stride = 1usize << qubit;
        for block in self.amps.chunks_exact_mut(stride << 1) {
            let (lo, hi) = block.split_at_mut(stride);
            for (a, b) in lo.iter_mut().zip(hi.iter_mut()) {
                let (x, y) = (*a, *b);
                *a = (x + y) * FRAC_1_SQRT_2;
                *b = (x - y) * FRAC_1_SQRT_2;
            }
        }
        Ok(())
    }

    pub fn apply_x(&mut self, qubit: usize) -> Result<()> {
        self.check_qubit(qubit)?;
        let stride = 1usize << qubit;
        for block in self.amps.chunks_exact_mut(stride << 1) {
            let (lo, hi) = block.split_at_mut(stride);
            lo.swap_with_slice(hi);
        }
        Ok(())
    }

    /// Flips `target` on basis states where every `(qubit, value)` control
    /// matches. Controls with `false` fire on `|0>`.
    pub fn apply_mcx(&mut self, controls: &[(usize, bool)], target: usize) -> Result<()> {
        self.check_qubit(target)?;
        let mut mask = 0usize;
        let mut pattern = 0usize;
        for &(q, value) in controls {
            self.check_qubit(q)?;
            if q == target {
                return Err(Error::input(format!(
                    "qubit {q} is both control and target"
                )));
            }
            if mask & (1 << q) != 0 {
                return Err(Error::input(format!("control qubit {q} repeated")));
            }
            mask |= 1 << q;
            if value {
                pattern |= 1 << q;
            }
        }
        let tbit = 1usize << target;
        for idx in 0..self.amps.len() {
            if idx & tbit == 0 && idx & mask == pattern {
                self.amps.swap(idx, idx | tbit);
            }
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    const TOL: f64 = 1e-12;

    fn c(re: f64) -> Complex64 {
        Complex64::new(re, 0.0)
    }

    fn random_state(num_qubits: usize, seed: u64) -> StateVector {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let amps: Vec<Complex64> = (0..1usize << num_qubits)
            .map(|_| Complex64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)))
            .collect();
        let norm = amps.iter().map(Complex64::norm_sqr).sum::<f64>().sqrt();
        StateVector::from_amplitudes(amps.into_iter().map(|a| a / norm).collect()).unwrap()
    }

    #[test]
    fn hadamard_on_basis_states() {
        let mut s = StateVector::zeros(1).unwrap();
        s.apply_hadamard(0).unwrap();
        assert!((s.amplitude(0) - c(FRAC_1_SQRT_2)).norm() < TOL);
        assert!((s.amplitude(1) - c(FRAC_1_SQRT_2)).norm() < TOL);

        let mut s = StateVector::basis(1, 1).unwrap();
        s.apply_hadamard(0).unwrap();
        assert!((s.amplitude(0) - c(FRAC_1_SQRT_2)).norm() < TOL);
        assert!((s.amplitude(1) + c(FRAC_1_SQRT_2)).norm() < TOL);
    }

    #[test]
    fn hadamard_is_an_involution() {
        for q in 0..5 {
            let original = random_state(5, q as u64);
            let mut s = original.clone();
            s.apply_hadamard(q).unwrap();
            assert!((s.norm_sqr() - 1.0).abs() < 1e-10);
            s.apply_hadamard(q).unwrap();
            assert!(s.max_abs_diff(&original) < TOL);
        }
    }

    #[test]
    fn hadamard_acts_on_the_indexed_qubit() {
        // |q2 q1 q0> = |010>; H on qubit 1 gives (|000> - |010>)/sqrt2.
        let mut s = StateVector::basis(3, 0b010).unwrap();
        s.apply_hadamard(1).unwrap();
        assert!((s.amplitude(0b000) - c(FRAC_1_SQRT_2)).norm() < TOL);
        assert!((s.amplitude(0b010) + c(FRAC_1_SQRT_2)).norm() < TOL);
        assert!((s.norm_sqr() - 1.0).abs() < TOL);
    }

    #[test]
    fn out_of_range_qubits_are_rejected() {
        let mut s = StateVector::zeros(2).unwrap();
        assert_eq!(
            s.apply_hadamard(2),
            Err(Error::IndexOutOfRange { index: 2, limit: 2 })
        );
        assert!(s.apply_x(5).is_err());
        assert!(s.apply_mcx(&[(3, true)], 0).is_err());
        assert!(s.apply_mcx(&[(0, true)], 0).is_err());
        assert!(s.apply_mcx(&[(1, true), (1, false)], 0).is_err());
    }

    #[test]
    fn mcx_respects_control_values() {
        // controls: q0 = 1, q1 = 0; target q2
        let cases = [(0b001, 0b101), (0b011, 0b011), (0b000, 0b000), (0b101, 0b001)];
        for (input, expected) in cases {
            let mut s = StateVector::basis(3, input).unwrap();
            s.apply_mcx(&[(0, true), (1, false)], 2).unwrap();
            assert_eq!(s.amplitude(expected), c(1.0), "input {input:03b}");
        }
    }

    #[test]
    fn x_flips_and_preserves_norm() {
        let original = random_state(4, 9);
        let mut s = original.clone();
        s.apply_x(2).unwrap();
        for idx in 0..16 {
            assert_eq!(s.amplitude(idx), original.amplitude(idx ^ 0b100));
        }
        s.apply_mcx(&[(0, true), (3, false)], 1).unwrap();
        assert!((s.norm_sqr() - 1.0).abs() < 1e-10);
    }

    #[test]
    fn capacity_is_enforced() {
        let err = StateVector::zeros(DEFAULT_MAX_QUBITS + 1).unwrap_err();
        assert!(err.is_capacity());
        assert!(err.to_string().contains("25 qubits"));
        assert!(StateVector::zeros_with_limit(40, 64).unwrap_err().is_capacity());
        assert!(StateVector::from_amplitudes(vec![c(1.0); 3]).is_err());
    }
}
