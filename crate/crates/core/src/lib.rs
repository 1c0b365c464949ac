//! Stabilizer ground states for Pauli-sum Hamiltonians, Clifford preparation
//! circuits, and measurement-based imaginary time evolution.
//!
//! The pipeline: find the minimum-energy stabilizer group of a Hamiltonian
//! (exhaustively at small qubit counts, by genetic-algorithm clique search
//! otherwise), refine to the generator set whose state has the highest
//! overlap with the true ground state, synthesize the Clifford circuit that
//! prepares it, and feed the state into the weak-measurement evolution loop
//! with the stabilizer energy as the reset threshold.

pub mod analysis;
pub mod error;
pub mod gaopt;
pub mod gf2;
pub mod hamiltonian;
pub mod mite;
pub mod pauli;
pub mod stabsearch;
pub mod state;
pub mod tableau;

pub use error::{Error, Result};
pub use hamiltonian::{parse_hamiltonian, CandidateGeneratorSet, Hamiltonian, HamiltonianTerm};
pub use pauli::{format_pauli, parse_pauli, PauliString};
pub use stabsearch::{GeneratorSet, GroupEnergyReport, MinGroups, RefineOutcome};
pub use state::StateVector;
pub use tableau::{CliffordCircuit, Gate, Tableau};
