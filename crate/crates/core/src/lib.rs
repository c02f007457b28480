//! Long-read contig generation with distributed sparse matrices on a
//! simulated `√P × √P` processor grid. Every inter-rank byte goes through
//! [`gridsim`] and is recorded per link and per pipeline phase.

pub mod contig;
pub mod gridsim;
pub mod overlap;
pub mod pipeline;
pub mod seqstore;
pub mod spmat;
