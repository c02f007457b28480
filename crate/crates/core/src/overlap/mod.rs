//! From reads to the string matrix: k-mer matrix, candidate overlaps,
//! exact-overlap filter, containment masking and transitive reduction.

mod align;
mod kmer;
mod transitive;

use thiserror::Error;

use crate::gridsim::GridError;
use crate::spmat::SpmatError;

pub use align::{align_filter, align_pair, candidate_overlaps, prune_contained, OverlapCandidate, OverlapHit, SharedKmers};
pub use kmer::{base_code, canonical_kmers, decode_kmer, kmer_matrix, kmer_owner, KmerIndex, KmerOcc, MAX_K};
pub use transitive::{
    transitive_reduction, transitive_reduction_reference, TwoHop, ValidWalks, DEFAULT_FUZZ, DEFAULT_MAX_ROUNDS,
};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum OverlapError {
    #[error("k = {k} exceeds {limit}")]
    KTooLarge { k: usize, limit: usize },
    #[error("k must be odd and positive, got {0}")]
    InvalidK(usize),
    #[error("transitive reduction did not converge within {rounds} rounds")]
    NonConvergence { rounds: usize },
    #[error(transparent)]
    Matrix(#[from] SpmatError),
    #[error(transparent)]
    Grid(#[from] GridError),
}
