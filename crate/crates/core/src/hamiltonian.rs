//! Pauli-sum Hamiltonians: H = Σ_p h_p P with real weights.
//!
//! Term signs are absorbed into the coefficients, so the stored strings all
//! carry a +1 sign. Duplicate strings merge, zero coefficients drop, and the
//! identity term is kept only when given explicitly.

use std::collections::HashMap;
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::pauli::PauliString;

/// One weighted term of a Pauli-sum Hamiltonian.
#[derive(Debug, Clone)]
pub struct HamiltonianTerm {
    pub coeff: f64,
    /// Sign-positive Pauli string (the sign lives in `coeff`).
    pub pauli: PauliString,
}

/// A weighted list of Pauli strings on a fixed qubit register.
#[derive(Debug, Clone)]
pub struct Hamiltonian {
    n_qubits: usize,
    terms: Vec<HamiltonianTerm>,
}

/// The candidate-generator map b: Pauli → 2^N·h_p over the Hamiltonian terms.
#[derive(Debug, Clone)]
pub struct CandidateGeneratorSet {
    entries: Vec<(PauliString, f64)>,
}

impl CandidateGeneratorSet {
    pub fn entries(&self) -> &[(PauliString, f64)] {
        &self.entries
    }

    /// Value b_p for an unsigned Pauli string, zero when absent.
    pub fn value(&self, p: &PauliString) -> f64 {
        self.entries
            .iter()
            .find(|(q, _)| q.same_bits(p))
            .map_or(0.0, |(_, v)| *v)
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }
}

impl Hamiltonian {
    /// Build from raw (coefficient, string) pairs; merges, validates, sorts.
    pub fn from_terms(n_qubits: usize, raw: Vec<(f64, PauliString)>) -> Result<Self> {
        if n_qubits == 0 {
            return Err(Error::Invalid("Hamiltonian needs at least one qubit".into()));
        }
        let mut merged: HashMap<(Vec<bool>, Vec<bool>), f64> = HashMap::new();
        let mut order: Vec<(Vec<bool>, Vec<bool>)> = Vec::new();
        for (coeff, p) in raw {
            if p.n_qubits() != n_qubits {
                return Err(Error::Dimension(format!(
                    "term {p} acts on {} qubits, expected {n_qubits}",
                    p.n_qubits()
                )));
            }
            if !coeff.is_finite() {
                return Err(Error::Invalid(format!("non-finite coefficient {coeff}")));
            }
            let signed = match p.sign() {
                Some(s) => coeff * s,
                None => {
                    return Err(Error::Invalid(format!(
                        "term {p} carries an imaginary phase; Hamiltonians must be Hermitian"
                    )))
                }
            };
            let key = (p.x_bits().to_vec(), p.z_bits().to_vec());
            match merged.get_mut(&key) {
                Some(v) => *v += signed,
                None => {
                    merged.insert(key.clone(), signed);
                    order.push(key);
                }
            }
        }
        let mut terms = Vec::new();
        for key in order {
            let coeff = merged[&key];
            if coeff != 0.0 {
                let pauli = PauliString::from_bits(key.0, key.1, 0)?;
                terms.push(HamiltonianTerm { coeff, pauli });
            }
        }
        Ok(Self { n_qubits, terms })
    }

    /// Open-boundary transverse-field Ising chain: Σ Z_iZ_{i+1} + λ Σ X_j.
    pub fn tfim(l: usize, lambda: f64) -> Result<Self> {
        if l < 2 {
            return Err(Error::Invalid(format!("tfim needs L >= 2, got {l}")));
        }
        let mut raw = Vec::new();
        for i in 0..l - 1 {
            let zz = PauliString::single_z(l, i).multiply(&PauliString::single_z(l, i + 1))?;
            raw.push((1.0, zz));
        }
        if lambda != 0.0 {
            for j in 0..l {
                raw.push((lambda, PauliString::single_x(l, j)));
            }
        }
        Self::from_terms(l, raw)
    }

    pub fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    pub fn terms(&self) -> &[HamiltonianTerm] {
        &self.terms
    }

    /// Coefficient of the identity string (zero when absent).
    pub fn identity_coeff(&self) -> f64 {
        self.terms
            .iter()
            .find(|t| t.pauli.is_identity_bits())
            .map_or(0.0, |t| t.coeff)
    }

    /// Terms with a non-identity Pauli string.
    pub fn pauli_terms(&self) -> impl Iterator<Item = &HamiltonianTerm> {
        self.terms.iter().filter(|t| !t.pauli.is_identity_bits())
    }

    /// Σ|h_p| over all terms, the L1 bound on the spectrum.
    pub fn sum_abs_coeff(&self) -> f64 {
        self.terms.iter().map(|t| t.coeff.abs()).sum()
    }

    /// The candidate generator set: entry 2^N·h_p for every stored term.
    pub fn candidate_generator_set(&self) -> CandidateGeneratorSet {
        let scale = (1u128 << self.n_qubits) as f64;
        CandidateGeneratorSet {
            entries: self
                .terms
                .iter()
                .map(|t| (t.pauli.clone(), scale * t.coeff))
                .collect(),
        }
    }

    /// Canonical one-term-per-line dump (used for digests and manifests).
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        for t in &self.terms {
            out.push_str(&format!("{} {}\n", t.coeff, t.pauli.to_string().trim_start_matches('+')));
        }
        out
    }
}

impl FromStr for Hamiltonian {
    type Err = Error;

    /// One term per line: `<coeff> <pauli>`; `#` comments and blanks ignored.
    fn from_str(text: &str) -> Result<Self> {
        let mut raw = Vec::new();
        let mut n_qubits = None;
        for (lineno, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let mut parts = line.split_whitespace();
            let coeff_text = parts.next().unwrap();
            let pauli_text = parts.next().ok_or_else(|| {
                Error::Parse(format!("line {}: expected `<coeff> <pauli>`", lineno + 1))
            })?;
            if parts.next().is_some() {
                return Err(Error::Parse(format!(
                    "line {}: trailing tokens after the Pauli string",
                    lineno + 1
                )));
            }
            // tolerate the unicode minus that papers love to paste
            let coeff: f64 = coeff_text.replace('\u{2212}', "-").parse().map_err(|_| {
                Error::Parse(format!("line {}: malformed coefficient `{coeff_text}`", lineno + 1))
            })?;
            let pauli: PauliString = pauli_text.parse()?;
            match n_qubits {
                None => n_qubits = Some(pauli.n_qubits()),
                Some(n) if n != pauli.n_qubits() => {
                    return Err(Error::Dimension(format!(
                        "line {}: term on {} qubits, previous terms on {n}",
                        lineno + 1,
                        pauli.n_qubits()
                    )));
                }
                _ => {}
            }
            raw.push((coeff, pauli));
        }
        let n = n_qubits.ok_or_else(|| Error::Parse("empty Hamiltonian file".into()))?;
        Self::from_terms(n, raw)
    }
}

/// Parse the plain-text Hamiltonian format (free-function form of `FromStr`).
pub fn parse_hamiltonian(text: &str) -> Result<Hamiltonian> {
    text.parse()
}
