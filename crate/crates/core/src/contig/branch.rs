use serde::de::DeserializeOwned;
use serde::Serialize;

use super::ContigError;
use crate::gridsim::Grid;
use crate::spmat::DistSparseMatrix;

/// Result of branch masking.
#[derive(Clone, Debug)]
pub struct BranchRemoval<T> {
    pub l: DistSparseMatrix<T>,
    /// Vertices of degree three or more, ascending.
    pub masked: Vec<usize>,
}

/// Clears the rows and columns of every vertex with degree `>= 3`, leaving a
/// union of paths and cycles.
pub fn branch_removal<T>(grid: &mut Grid, s: &DistSparseMatrix<T>) -> Result<BranchRemoval<T>, ContigError>
where
    T: Clone + Serialize + DeserializeOwned,
{
    let degree = s.row_degree(grid)?;
    let kill = degree.map(|_, &d| d >= 3);
    let masked = kill.gather().iter().enumerate().filter(|(_, &k)| k).map(|(u, _)| u).collect();
    let l = s.prune_rows_cols(grid, &kill)?;
    Ok(BranchRemoval { l, masked })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spmat::LocalSparse;

    fn graph(n: usize, edges: &[(usize, usize)]) -> LocalSparse<()> {
        let t = edges.iter().flat_map(|&(u, v)| [(u, v, ()), (v, u, ())]).collect();
        LocalSparse::from_triplets(n, n, t, |_, _| {}).unwrap()
    }

    #[test]
    fn masks_the_junction() {
        // v1..v8 as 0..7: v1-v2-v3, v3-v4-v5-v6, v3-v7-v8
        let g = graph(8, &[(0, 1), (1, 2), (2, 3), (3, 4), (4, 5), (2, 6), (6, 7)]);
        let mut grid = Grid::new(4).unwrap();
        let s = DistSparseMatrix::from_global(grid.topology(), &g);
        let out = branch_removal(&mut grid, &s).unwrap();
        assert_eq!(out.masked, vec![2]);
        assert_eq!(out.l.gather(), graph(8, &[(0, 1), (3, 4), (4, 5), (6, 7)]));
    }

    #[test]
    fn path_unchanged_and_k4_emptied() {
        let mut grid = Grid::new(9).unwrap();
        let path = graph(4, &[(0, 1), (1, 2), (2, 3)]);
        let s = DistSparseMatrix::from_global(grid.topology(), &path);
        assert_eq!(branch_removal(&mut grid, &s).unwrap().l.gather(), path);
        let k4 = graph(4, &[(0, 1), (0, 2), (0, 3), (1, 2), (1, 3), (2, 3)]);
        let s = DistSparseMatrix::from_global(grid.topology(), &k4);
        let out = branch_removal(&mut grid, &s).unwrap();
        assert_eq!(out.l.nnz(), 0);
        assert_eq!(out.masked, vec![0, 1, 2, 3]);
    }
}
