//! Entanglement measures for multipartite pure states.
//!
//! The crate computes the combinatorial entropy of fully entangled states
//! ([`cef`]), the entanglement combination partition
//! ([`entanglement_combination`]) and the combinatorial entropy ([`ce`]) of
//! dense state vectors over qubits or qudits, reads states from a small
//! Dirac-ket language or an amplitude table ([`ket`]), and ships a
//! randomized harness checking invariance and monotonicity properties
//! ([`verify`]).

pub mod error;
pub mod ket;
pub mod measures;
pub mod state;
pub mod verify;

pub use error::{Error, ParseError, Result};
pub use measures::{
    ce, cef, decompose, entanglement_combination, is_block_separable, BlockCef, CEReport,
    EntanglementCombination,
};
pub use state::{
    normalize, normalize_with_norm, partial_trace, reduced_pure_state, subset_entropy, subset_rank,
    tensor_product, von_neumann_entropy, DensityMatrix, Limits, PartySubset, PureState,
    SystemShape, Tolerances,
};
