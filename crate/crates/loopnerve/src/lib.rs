//! Loop-nerve homology of RNA bi-secondary structures.
//!
//! A bi-secondary structure is a pair of secondary structures (non-crossing
//! arc sets) over the same backbone. Each structure decomposes into loops;
//! the loops of the pair form a weighted simplicial complex (the nerve of
//! the loop cover), whose integer homology carries a structural invariant:
//! the rank of the second homology group counts independent pairs of
//! mutually exclusive substructures.
//!
//! The crate provides:
//!
//! * [`structures`] — dot-bracket parsing, validation, the arc poset, loop
//!   decomposition, exact counting and uniform sampling of structures;
//! * [`nerve`] — construction of the weighted loop nerve, simplex
//!   classification, neighbor graphs and structural-lemma verification;
//! * [`homology`] — integer chain complexes, Smith normal form, Betti
//!   numbers, torsion, explicit second-homology generators, and the
//!   weight-filtered spectrum with persistence bars;
//! * [`oracle`] — independent brute-force and rational-arithmetic oracles
//!   used for cross-validation;
//! * [`cli`] — the command implementations behind the `loopnerve` binary.

pub mod cli;
pub mod homology;
pub mod nerve;
pub mod oracle;
pub mod structures;
