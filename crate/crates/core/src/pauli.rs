//! Signed N-qubit Pauli strings in the symplectic (x|z) bit representation.
//!
//! A string is stored as two bit vectors plus an exponent of the complex unit
//! **i**, so that the operator is i^phase · σ₁⊗…⊗σ_N with σ ∈ {I, X, Y, Z}
//! read off per qubit from the (x, z) bit pair: (0,0)=I, (1,0)=X, (1,1)=Y,
//! (0,1)=Z. Hermitian strings have an even phase exponent (sign ±1); products
//! track the phase exactly, so group-element signs are never approximated.

use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};

/// One signed N-qubit Pauli operator.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct PauliString {
    n_qubits: usize,
    x_bits: Vec<bool>,
    z_bits: Vec<bool>,
    phase_exp: u8,
}

/// i-exponent of σ_a·σ_b relative to σ_{a⊕b}, per qubit.
fn mul_phase(xa: bool, za: bool, xb: bool, zb: bool) -> u8 {
    match ((xa, za), (xb, zb)) {
        ((false, false), _) | (_, (false, false)) => 0,
        (a, b) if a == b => 0,
        // cyclic XY, YZ, ZX pick up +i; the reverse order picks up -i
        ((true, false), (true, true)) => 1,  // X·Y = iZ
        ((true, true), (false, true)) => 1,  // Y·Z = iX
        ((false, true), (true, false)) => 1, // Z·X = iY
        _ => 3,
    }
}

impl PauliString {
    /// The identity on `n_qubits` qubits.
    pub fn identity(n_qubits: usize) -> Self {
        Self {
            n_qubits,
            x_bits: vec![false; n_qubits],
            z_bits: vec![false; n_qubits],
            phase_exp: 0,
        }
    }

    /// Build from raw bits and phase exponent.
    pub fn from_bits(x_bits: Vec<bool>, z_bits: Vec<bool>, phase_exp: u8) -> Result<Self> {
        if x_bits.len() != z_bits.len() {
            return Err(Error::Dimension(format!(
                "x/z bit vectors differ in length: {} vs {}",
                x_bits.len(),
                z_bits.len()
            )));
        }
        Ok(Self {
            n_qubits: x_bits.len(),
            x_bits,
            z_bits,
            phase_exp: phase_exp % 4,
        })
    }

    /// A single-qubit X at `qubit`, identity elsewhere.
    pub fn single_x(n_qubits: usize, qubit: usize) -> Self {
        let mut p = Self::identity(n_qubits);
        p.x_bits[qubit] = true;
        p
    }

    /// A single-qubit Z at `qubit`, identity elsewhere.
    pub fn single_z(n_qubits: usize, qubit: usize) -> Self {
        let mut p = Self::identity(n_qubits);
        p.z_bits[qubit] = true;
        p
    }

    pub fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    pub fn x_bits(&self) -> &[bool] {
        &self.x_bits
    }

    pub fn z_bits(&self) -> &[bool] {
        &self.z_bits
    }

    pub fn phase_exp(&self) -> u8 {
        self.phase_exp
    }

    /// Number of non-identity tensor factors.
    pub fn weight(&self) -> usize {
        (0..self.n_qubits)
            .filter(|&q| self.x_bits[q] || self.z_bits[q])
            .count()
    }

    /// True when every tensor factor is the identity (phase ignored).
    pub fn is_identity_bits(&self) -> bool {
        self.weight() == 0
    }

    /// True when the operator is Hermitian, i.e. carries a ±1 sign.
    pub fn is_hermitian(&self) -> bool {
        self.phase_exp.is_multiple_of(2)
    }

    /// +1 or −1 for Hermitian strings, `None` for ±i phases.
    pub fn sign(&self) -> Option<f64> {
        match self.phase_exp {
            0 => Some(1.0),
            2 => Some(-1.0),
            _ => None,
        }
    }

    /// The same string with phase exponent forced to 0 (sign +1).
    pub fn unsigned(&self) -> Self {
        let mut p = self.clone();
        p.phase_exp = 0;
        p
    }

    /// The string multiplied by −1.
    pub fn negated(&self) -> Self {
        let mut p = self.clone();
        p.phase_exp = (p.phase_exp + 2) % 4;
        p
    }

    /// True when the two strings have identical x/z bits, phases ignored.
    pub fn same_bits(&self, other: &Self) -> bool {
        self.x_bits == other.x_bits && self.z_bits == other.z_bits
    }

    fn check_dims(&self, other: &Self) -> Result<()> {
        if self.n_qubits != other.n_qubits {
            return Err(Error::Dimension(format!(
                "operands act on {} and {} qubits",
                self.n_qubits, other.n_qubits
            )));
        }
        Ok(())
    }

    /// Exact product a·b including the accumulated phase.
    pub fn multiply(&self, other: &Self) -> Result<Self> {
        self.check_dims(other)?;
        let n = self.n_qubits;
        let mut x = vec![false; n];
        let mut z = vec![false; n];
        let mut phase = self.phase_exp + other.phase_exp;
        for q in 0..n {
            phase += mul_phase(self.x_bits[q], self.z_bits[q], other.x_bits[q], other.z_bits[q]);
            phase %= 4;
            x[q] = self.x_bits[q] ^ other.x_bits[q];
            z[q] = self.z_bits[q] ^ other.z_bits[q];
        }
        Ok(Self {
            n_qubits: n,
            x_bits: x,
            z_bits: z,
            phase_exp: phase % 4,
        })
    }

    /// Symplectic commutation test; true iff [a, b] = 0. Phase-independent.
    pub fn commutes(&self, other: &Self) -> Result<bool> {
        self.check_dims(other)?;
        let mut acc = false;
        for q in 0..self.n_qubits {
            acc ^= (self.x_bits[q] & other.z_bits[q]) ^ (self.z_bits[q] & other.x_bits[q]);
        }
        Ok(!acc)
    }
}

impl fmt::Display for PauliString {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let prefix = match self.phase_exp {
            0 => "+",
            1 => "+i",
            2 => "-",
            _ => "-i",
        };
        write!(f, "{prefix}")?;
        for q in 0..self.n_qubits {
            let c = match (self.x_bits[q], self.z_bits[q]) {
                (false, false) => 'I',
                (true, false) => 'X',
                (true, true) => 'Y',
                (false, true) => 'Z',
            };
            write!(f, "{c}")?;
        }
        Ok(())
    }
}

impl fmt::Debug for PauliString {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "PauliString({self})")
    }
}

impl FromStr for PauliString {
    type Err = Error;

    /// Parse `[+|-]` followed by characters from IXYZ, qubit 0 leftmost.
    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        let (sign_neg, body) = match s.strip_prefix('-') {
            Some(rest) => (true, rest),
            None => (false, s.strip_prefix('+').unwrap_or(s)),
        };
        if body.is_empty() {
            return Err(Error::Parse("empty Pauli string".into()));
        }
        let mut x = Vec::with_capacity(body.len());
        let mut z = Vec::with_capacity(body.len());
        for c in body.chars() {
            let (xb, zb) = match c {
                'I' => (false, false),
                'X' => (true, false),
                'Y' => (true, true),
                'Z' => (false, true),
                _ => return Err(Error::Parse(format!("illegal Pauli character '{c}'"))),
            };
            x.push(xb);
            z.push(zb);
        }
        Self::from_bits(x, z, if sign_neg { 2 } else { 0 })
    }
}

/// Parse a textual Pauli string (free-function form of `FromStr`).
pub fn parse_pauli(text: &str) -> Result<PauliString> {
    text.parse()
}

/// Canonical text form of a Pauli string.
pub fn format_pauli(p: &PauliString) -> String {
    p.to_string()
}

#[cfg(test)]
mod tests {
    use super::*;
    use nalgebra::DMatrix;
    use num_complex::Complex64;
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha12Rng;

    type CMat = DMatrix<Complex64>;

    // Independent dense oracle: build the 2^n matrix from hard-coded 2x2 blocks.
    fn sigma(c: char) -> CMat {
        let i = Complex64::new(0.0, 1.0);
        let o = Complex64::new(0.0, 0.0);
        let l = Complex64::new(1.0, 0.0);
        match c {
            'I' => CMat::from_row_slice(2, 2, &[l, o, o, l]),
            'X' => CMat::from_row_slice(2, 2, &[o, l, l, o]),
            'Y' => CMat::from_row_slice(2, 2, &[o, -i, i, o]),
            'Z' => CMat::from_row_slice(2, 2, &[l, o, o, -l]),
            _ => unreachable!(),
        }
    }

    fn dense(p: &PauliString) -> CMat {
        let phase = Complex64::new(0.0, 1.0).powu(p.phase_exp() as u32);
        let mut m = CMat::identity(1, 1);
        for q in 0..p.n_qubits() {
            let c = match (p.x_bits()[q], p.z_bits()[q]) {
                (false, false) => 'I',
                (true, false) => 'X',
                (true, true) => 'Y',
                (false, true) => 'Z',
            };
            m = m.kronecker(&sigma(c));
        }
        m * phase
    }

    fn all_paulis(n: usize) -> Vec<PauliString> {
        let mut out = Vec::new();
        for code in 0..4usize.pow(n as u32) {
            let mut x = vec![false; n];
            let mut z = vec![false; n];
            let mut c = code;
            for q in 0..n {
                x[q] = c & 1 == 1;
                z[q] = c & 2 == 2;
                c >>= 2;
            }
            out.push(PauliString::from_bits(x, z, 0).unwrap());
        }
        out
    }

    #[test]
    fn x_times_z_is_minus_i_y() {
        let x: PauliString = "X".parse().unwrap();
        let z: PauliString = "Z".parse().unwrap();
        let p = x.multiply(&z).unwrap();
        assert_eq!(p.to_string(), "-iY");
        // dense check of the same product
        let d = dense(&x) * dense(&z);
        assert!((d - dense(&p)).norm() < 1e-14);
    }

    #[test]
    fn identity_is_neutral() {
        let g: PauliString = "-XYZI".parse().unwrap();
        let id = PauliString::identity(4);
        assert_eq!(id.multiply(&g).unwrap(), g);
        assert_eq!(g.multiply(&id).unwrap(), g);
    }

    #[test]
    fn hermitian_strings_square_to_identity() {
        let zz: PauliString = "ZZ".parse().unwrap();
        assert_eq!(zz.multiply(&zz).unwrap(), PauliString::identity(2));
        for p in all_paulis(3) {
            let sq = p.multiply(&p).unwrap();
            assert!(sq.is_identity_bits());
            assert_eq!(sq.phase_exp(), 0, "{p} squared has phase {}", sq.phase_exp());
        }
    }

    #[test]
    fn multiply_matches_dense_oracle_exhaustively_n2() {
        for a in all_paulis(2) {
            for b in all_paulis(2) {
                let p = a.multiply(&b).unwrap();
                let d = dense(&a) * dense(&b);
                assert!((d - dense(&p)).norm() < 1e-12, "{a} * {b} != {p}");
            }
        }
    }

    #[test]
    fn commutes_matches_dense_commutator_n3_exhaustive() {
        let ps = all_paulis(3);
        for a in &ps {
            for b in &ps {
                let da = dense(a);
                let db = dense(b);
                let comm = (&da * &db) - (&db * &da);
                assert_eq!(
                    a.commutes(b).unwrap(),
                    comm.norm() < 1e-12,
                    "commutation mismatch for {a}, {b}"
                );
            }
        }
    }

    #[test]
    fn commutes_matches_dense_commutator_random_n6() {
        let mut rng = ChaCha12Rng::seed_from_u64(0xC0FFEE);
        for _ in 0..1000 {
            let n = 6;
            let mk = |rng: &mut ChaCha12Rng| {
                let x: Vec<bool> = (0..n).map(|_| rng.gen()).collect();
                let z: Vec<bool> = (0..n).map(|_| rng.gen()).collect();
                PauliString::from_bits(x, z, 0).unwrap()
            };
            let a = mk(&mut rng);
            let b = mk(&mut rng);
            let da = dense(&a);
            let db = dense(&b);
            let comm = (&da * &db) - (&db * &da);
            assert_eq!(a.commutes(&b).unwrap(), comm.norm() < 1e-9);
        }
    }

    #[test]
    fn known_commutation_cases() {
        let x: PauliString = "X".parse().unwrap();
        let z: PauliString = "Z".parse().unwrap();
        assert!(!x.commutes(&z).unwrap());
        let xx: PauliString = "XX".parse().unwrap();
        let zz: PauliString = "ZZ".parse().unwrap();
        assert!(xx.commutes(&zz).unwrap());
        for g in all_paulis(3) {
            assert!(g.commutes(&g).unwrap());
        }
    }

    #[test]
    fn parse_and_format() {
        let p: PauliString = "-ZZIII".parse().unwrap();
        assert_eq!(p.n_qubits(), 5);
        assert_eq!(p.sign(), Some(-1.0));
        assert!(p.z_bits()[0] && p.z_bits()[1] && !p.z_bits()[2]);
        assert_eq!(p.to_string(), "-ZZIII");

        let q: PauliString = "XIXII".parse().unwrap();
        assert_eq!(q.to_string(), "+XIXII");
        assert_eq!(format_pauli(&parse_pauli("+XIXII").unwrap()), "+XIXII");

        assert!(parse_pauli("ZQ").is_err());
        assert!(parse_pauli("").is_err());
        assert!(parse_pauli("-").is_err());
    }

    #[test]
    fn dimension_mismatch_is_rejected() {
        let a: PauliString = "XX".parse().unwrap();
        let b: PauliString = "X".parse().unwrap();
        assert!(matches!(a.multiply(&b), Err(Error::Dimension(_))));
        assert!(matches!(a.commutes(&b), Err(Error::Dimension(_))));
    }

    proptest! {
        #[test]
        fn format_parse_roundtrip(sign in prop::bool::ANY, body in "[IXYZ]{1,8}") {
            let text = format!("{}{}", if sign { "-" } else { "+" }, body);
            let p: PauliString = text.parse().unwrap();
            prop_assert_eq!(p.to_string(), text);
        }

        #[test]
        fn multiply_is_associative(codes in prop::collection::vec(0u8..64, 3)) {
            let decode = |c: u8| {
                let mut x = vec![false; 3];
                let mut z = vec![false; 3];
                for q in 0..3 {
                    x[q] = (c >> (2 * q)) & 1 == 1;
                    z[q] = (c >> (2 * q)) & 2 == 2;
                }
                PauliString::from_bits(x, z, 0).unwrap()
            };
            let (a, b, c) = (decode(codes[0]), decode(codes[1]), decode(codes[2]));
            let ab_c = a.multiply(&b).unwrap().multiply(&c).unwrap();
            let a_bc = a.multiply(&b.multiply(&c).unwrap()).unwrap();
            prop_assert_eq!(ab_c, a_bc);
        }

        #[test]
        fn involution_restores_bits(code in 0u8..64, other in 0u8..64) {
            let decode = |c: u8| {
                let mut x = vec![false; 3];
                let mut z = vec![false; 3];
                for q in 0..3 {
                    x[q] = (c >> (2 * q)) & 1 == 1;
                    z[q] = (c >> (2 * q)) & 2 == 2;
                }
                PauliString::from_bits(x, z, 0).unwrap()
            };
            let a = decode(code);
            let b = decode(other);
            let aab = a.multiply(&a.multiply(&b).unwrap()).unwrap();
            prop_assert!(aab.same_bits(&b));
        }
    }
}
