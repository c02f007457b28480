//! Contig generation on the string matrix: branch masking, components,
//! size-balanced assignment, redistribution and local walks.

mod assembly;
mod branch;
mod components;
mod induced;
mod lpt;

use thiserror::Error;

use crate::gridsim::GridError;
use crate::seqstore::{ReadId, SeqError};
use crate::spmat::SpmatError;

pub use assembly::{chain_sequence, local_assembly, local_chains, Contig, ContigChain};
pub use branch::{branch_removal, BranchRemoval};
pub use components::{connected_components, contig_sizes, ComponentVector, NONE};
pub use induced::{induced_subgraph, LocalGraph};
pub use lpt::{lpt_distributed, lpt_partition, optimal_makespan, rank_loads};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum ContigError {
    #[error("edge ({u}, {v}) joins vertices assigned to different ranks")]
    InconsistentAssignment { u: usize, v: usize },
    #[error("contig {0} has no assigned rank")]
    UnassignedContig(usize),
    #[error("walk revisits read {0} without reaching an endpoint")]
    BrokenChain(ReadId),
    #[error("read {0} has degree above two in its local graph")]
    BranchingVertex(ReadId),
    #[error("edge label indexes outside read {0}")]
    LabelOutOfRange(ReadId),
    #[error(transparent)]
    Matrix(#[from] SpmatError),
    #[error(transparent)]
    Grid(#[from] GridError),
    #[error(transparent)]
    Seq(#[from] SeqError),
}
