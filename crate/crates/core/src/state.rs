//! Dense state vectors and exact Pauli actions on them.
//!
//! Amplitudes are indexed by computational basis states with qubit 0 as the
//! most significant bit, matching the leftmost character of the text form.

use nalgebra::DMatrix;
use num_complex::Complex64;
use rand::Rng;

use crate::error::{Error, Result};
use crate::hamiltonian::Hamiltonian;
use crate::pauli::PauliString;

/// A normalized 2^n-amplitude state.
#[derive(Debug, Clone, PartialEq)]
pub struct StateVector {
    n_qubits: usize,
    amps: Vec<Complex64>,
}

impl StateVector {
    /// |0…0⟩ on `n_qubits` qubits.
    pub fn zeros(n_qubits: usize) -> Self {
        let mut amps = vec![Complex64::ZERO; 1 << n_qubits];
        amps[0] = Complex64::ONE;
        Self { n_qubits, amps }
    }

    /// Build from raw amplitudes; the vector is normalized on entry.
    pub fn from_amplitudes(n_qubits: usize, amps: Vec<Complex64>) -> Result<Self> {
        if amps.len() != 1 << n_qubits {
            return Err(Error::Dimension(format!(
                "expected 2^{n_qubits} amplitudes, got {}",
                amps.len()
            )));
        }
        let mut s = Self { n_qubits, amps };
        let n = s.norm();
        if n < 1e-12 {
            return Err(Error::Invalid("state vector has zero norm".into()));
        }
        for a in &mut s.amps {
            *a /= n;
        }
        Ok(s)
    }

    pub fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    pub fn amplitudes(&self) -> &[Complex64] {
        &self.amps
    }

    pub fn norm(&self) -> f64 {
        self.amps.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt()
    }

    /// ⟨self|other⟩.
    pub fn inner(&self, other: &Self) -> Complex64 {
        self.amps
            .iter()
            .zip(&other.amps)
            .map(|(a, b)| a.conj() * b)
            .sum()
    }

    /// Exact action of a signed Pauli string: returns g|ψ⟩.
    pub fn apply_pauli(&self, p: &PauliString) -> Result<Self> {
        if p.n_qubits() != self.n_qubits {
            return Err(Error::Dimension(format!(
                "Pauli on {} qubits applied to {}-qubit state",
                p.n_qubits(),
                self.n_qubits
            )));
        }
        let n = self.n_qubits;
        let dim = self.amps.len();
        let mut x_mask = 0usize;
        let mut z_mask = 0usize;
        let mut y_count = 0u32;
        for q in 0..n {
            let bit = 1usize << (n - 1 - q); // qubit 0 = most significant
            if p.x_bits()[q] {
                x_mask |= bit;
            }
            if p.z_bits()[q] {
                z_mask |= bit;
            }
            if p.x_bits()[q] && p.z_bits()[q] {
                y_count += 1;
            }
        }
        let global = Complex64::i().powu(p.phase_exp() as u32 + y_count);
        let mut out = vec![Complex64::ZERO; dim];
        for (b, amp) in self.amps.iter().enumerate() {
            if amp.norm_sqr() == 0.0 {
                continue;
            }
            let target = b ^ x_mask;
            let z_parity = ((b & z_mask).count_ones() & 1) as i32;
            let sign = if z_parity == 1 { -1.0 } else { 1.0 };
            out[target] += amp * global * sign;
        }
        Ok(Self { n_qubits: n, amps: out })
    }

    /// ⟨ψ|P|ψ⟩ for a signed Pauli string.
    pub fn expectation_pauli(&self, p: &PauliString) -> Result<Complex64> {
        Ok(self.inner(&self.apply_pauli(p)?))
    }

    /// ⟨ψ|H|ψ⟩ summed term by term.
    pub fn expectation_hamiltonian(&self, h: &Hamiltonian) -> Result<f64> {
        let mut acc = 0.0;
        for t in h.terms() {
            acc += t.coeff * self.expectation_pauli(&t.pauli)?.re;
        }
        Ok(acc)
    }
}

/// A Bloch-uniform random product state (the MITE baseline initial state).
pub fn random_product_state<R: Rng>(n_qubits: usize, rng: &mut R) -> StateVector {
    let mut amps = vec![Complex64::ONE];
    for _ in 0..n_qubits {
        let cos_theta: f64 = 1.0 - 2.0 * rng.gen::<f64>();
        let half = (cos_theta.clamp(-1.0, 1.0)).acos() / 2.0;
        let phi = 2.0 * std::f64::consts::PI * rng.gen::<f64>();
        let a0 = Complex64::new(half.cos(), 0.0);
        let a1 = Complex64::from_polar(half.sin(), phi);
        let mut next = Vec::with_capacity(amps.len() * 2);
        for a in &amps {
            next.push(a * a0);
            next.push(a * a1);
        }
        amps = next;
    }
    StateVector::from_amplitudes(n_qubits, amps).expect("unit product state")
}

/// Dense 2^n × 2^n matrix of a signed Pauli string.
pub fn pauli_dense(p: &PauliString) -> Result<DMatrix<Complex64>> {
    let dim = 1usize << p.n_qubits();
    let mut m = DMatrix::zeros(dim, dim);
    for col in 0..dim {
        let mut basis = StateVector {
            n_qubits: p.n_qubits(),
            amps: vec![Complex64::ZERO; dim],
        };
        basis.amps[col] = Complex64::ONE;
        let out = basis.apply_pauli(p)?;
        for row in 0..dim {
            m[(row, col)] = out.amps[row];
        }
    }
    Ok(m)
}

/// Dense matrix of a Pauli-sum Hamiltonian.
pub fn hamiltonian_dense(h: &Hamiltonian) -> Result<DMatrix<Complex64>> {
    let dim = 1usize << h.n_qubits();
    let mut m = DMatrix::zeros(dim, dim);
    for t in h.terms() {
        m += pauli_dense(&t.pauli)? * Complex64::new(t.coeff, 0.0);
    }
    Ok(m)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha12Rng;

    #[test]
    fn pauli_actions_on_basis_states() {
        let psi = StateVector::zeros(1);
        // Z|0> = |0>
        let z: PauliString = "Z".parse().unwrap();
        assert!((psi.apply_pauli(&z).unwrap().amps[0] - Complex64::ONE).norm() < 1e-15);
        // X|0> = |1>
        let x: PauliString = "X".parse().unwrap();
        assert!((psi.apply_pauli(&x).unwrap().amps[1] - Complex64::ONE).norm() < 1e-15);
        // Y|0> = i|1>
        let y: PauliString = "Y".parse().unwrap();
        assert!((psi.apply_pauli(&y).unwrap().amps[1] - Complex64::i()).norm() < 1e-15);
        // -ZZ|01> = +|01>
        let psi01 = StateVector::from_amplitudes(
            2,
            vec![Complex64::ZERO, Complex64::ONE, Complex64::ZERO, Complex64::ZERO],
        )
        .unwrap();
        let mzz: PauliString = "-ZZ".parse().unwrap();
        assert!((psi01.apply_pauli(&mzz).unwrap().amps[1] - Complex64::ONE).norm() < 1e-15);
    }

    #[test]
    fn expectation_against_dense_matrix() {
        let mut rng = ChaCha12Rng::seed_from_u64(11);
        let h: Hamiltonian = "0.3 XY\n-0.7 ZZ\n0.2 IX".parse().unwrap();
        let hm = hamiltonian_dense(&h).unwrap();
        for _ in 0..20 {
            let amps: Vec<Complex64> = (0..4)
                .map(|_| Complex64::new(rng.gen::<f64>() - 0.5, rng.gen::<f64>() - 0.5))
                .collect();
            let psi = StateVector::from_amplitudes(2, amps).unwrap();
            let v = nalgebra::DVector::from_column_slice(psi.amplitudes());
            let dense_e = (v.adjoint() * &hm * &v)[(0, 0)].re;
            let e = psi.expectation_hamiltonian(&h).unwrap();
            assert!((e - dense_e).abs() < 1e-12);
        }
    }

    #[test]
    fn random_product_states_are_normalized_products() {
        let mut rng = ChaCha12Rng::seed_from_u64(3);
        for _ in 0..10 {
            let psi = random_product_state(4, &mut rng);
            assert!((psi.norm() - 1.0).abs() < 1e-12);
        }
    }
}
