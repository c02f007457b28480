//! Sparse matrices: local CSC/DCSC blocks, semiring products and the
//! block-distributed matrix used for every graph stage.

mod dcsc;
mod dist;
mod label;
mod local;
mod semiring;

use std::fmt::Write as _;

use thiserror::Error;

use crate::gridsim::GridError;

pub use dcsc::{Block, Dcsc};
pub use dist::{kill_vector, spgemm, DistSparseMatrix};
pub use label::{Direction, EdgeLabel, Mirror, Orientation};
pub use local::{local_spgemm, merge_add, LocalSparse};
pub use semiring::{Counting, ProductIndex, Semiring};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum SpmatError {
    #[error("entry ({row}, {col}) outside a {n_rows}x{n_cols} matrix")]
    OutOfBounds { row: usize, col: usize, n_rows: usize, n_cols: usize },
    #[error("matrix not in canonical form: {0}")]
    NotCanonical(&'static str),
    #[error("cannot multiply {left:?} by {right:?}")]
    DimensionMismatch { left: (usize, usize), right: (usize, usize) },
    #[error("operation needs a square matrix, got {n_rows}x{n_cols}")]
    NotSquare { n_rows: usize, n_cols: usize },
    #[error("operands are distributed over different grids or bands")]
    DistributionMismatch,
    #[error(transparent)]
    Grid(#[from] GridError),
}

/// Matrix Market coordinate dump (1-based) with the edge label spelled out in
/// four extra columns: direction code, overhang, pre, post.
pub fn to_matrix_market(m: &LocalSparse<EdgeLabel>) -> String {
    let mut out = String::from("%%MatrixMarket matrix coordinate integer general\n");
    out.push_str("% row col direction overhang pre post\n");
    let _ = writeln!(out, "{} {} {}", m.n_rows(), m.n_cols(), m.nnz());
    let mut entries: Vec<_> = m.iter().collect();
    entries.sort_by_key(|&(r, c, _)| (r, c));
    for (r, c, l) in entries {
        let _ = writeln!(out, "{} {} {} {} {} {}", r + 1, c + 1, l.direction.code(), l.overhang, l.pre, l.post);
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn matrix_market_dump() {
        let label = EdgeLabel { direction: Direction::Forward, overhang: 4, src_overhang: 2, pre: 1, post: 0 };
        let m = LocalSparse::from_triplets(3, 3, vec![(0, 1, label)], |_, _| {}).unwrap();
        let text = to_matrix_market(&m);
        let lines: Vec<_> = text.lines().collect();
        assert_eq!(lines[2], "3 3 1");
        assert_eq!(lines[3], "1 2 0 4 1 0");
    }
}
