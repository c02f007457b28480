use std::collections::BTreeMap;

use super::components::{ComponentVector, NONE};
use super::ContigError;
use crate::gridsim::{alltoall_items, band_exchange, Grid, Rank};
use crate::spmat::{DistSparseMatrix, EdgeLabel, LocalSparse};

/// One rank's share of the graph: a re-indexed square CSC matrix and the
/// global id of every local vertex.
///
/// Column `c` holds the out-edges of local vertex `c`: entry `(r, c)` is the
/// label of the edge from `c` to `r`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LocalGraph {
    /// Global ids by local index, ascending.
    pub global_ids: Vec<usize>,
    pub matrix: LocalSparse<EdgeLabel>,
}

impl LocalGraph {
    pub fn n_vertices(&self) -> usize {
        self.global_ids.len()
    }

    pub fn local_of(&self, global: usize) -> Option<usize> {
        self.global_ids.binary_search(&global).ok()
    }

    /// Out-edges of local vertex `c` as `(neighbour, label)`.
    pub fn out_edges(&self, c: usize) -> impl Iterator<Item = (usize, &EdgeLabel)> {
        let (rows, vals) = self.matrix.col(c);
        rows.iter().copied().zip(vals)
    }

    pub fn degree(&self, c: usize) -> usize {
        self.matrix.col_nnz(c)
    }

    /// Global edge list `(u, v, label)`.
    pub fn global_edges(&self) -> Vec<(usize, usize, EdgeLabel)> {
        self.matrix
            .iter()
            .map(|(r, c, l)| (self.global_ids[c], self.global_ids[r], *l))
            .collect()
    }

    fn from_triples(mut triples: Vec<(usize, usize, EdgeLabel)>) -> Result<Self, ContigError> {
        triples.sort_unstable_by_key(|t| (t.0, t.1));
        let mut global_ids: Vec<usize> = triples.iter().flat_map(|t| [t.0, t.1]).collect();
        global_ids.sort_unstable();
        global_ids.dedup();
        let n = global_ids.len();
        let local = |g: usize| global_ids.binary_search(&g).expect("endpoint collected above");
        let entries = triples.iter().map(|&(u, v, l)| (local(v), local(u), l)).collect();
        let matrix = LocalSparse::from_triplets(n, n, entries, |_, _| {})?;
        Ok(LocalGraph { global_ids, matrix })
    }
}

/// Destination rank of every vertex (`par[v[u]]`), NONE for unassigned.
fn destinations(v: &ComponentVector, par: &[Rank]) -> Result<crate::gridsim::DistVec<u64>, ContigError> {
    if let Some(bad) = v.labels.pieces().iter().flatten().find(|&&c| c != NONE && c as usize >= par.len()) {
        return Err(ContigError::UnassignedContig(*bad as usize));
    }
    Ok(v.labels.map(|_, &c| if c == NONE { NONE } else { par[c as usize] as u64 }))
}

/// Redistributes `L` so that every contig lands whole on its assigned rank.
///
/// Destinations are made visible to each block by a row-band allgather
/// followed by a transpose exchange; every block then ships each nonzero to
/// the common destination of its endpoints with one all-to-all.
pub fn induced_subgraph(
    grid: &mut Grid,
    l: &DistSparseMatrix<EdgeLabel>,
    v: &ComponentVector,
    par: &[Rank],
) -> Result<Vec<LocalGraph>, ContigError> {
    let p = grid.size();
    let dest = destinations(v, par)?;
    let views = band_exchange(grid, dest.pieces())?;
    let mut outboxes: Vec<BTreeMap<Rank, Vec<(u64, u64, EdgeLabel)>>> = vec![BTreeMap::new(); p];
    for (rank, view) in views.iter().enumerate() {
        let (r0, c0) = l.block_origin(rank);
        for (lr, lc, label) in l.block(rank).iter() {
            let (du, dv) = (view.row[lr], view.col[lc]);
            let (u, w) = (r0 + lr, c0 + lc);
            if du != dv || du == NONE {
                return Err(ContigError::InconsistentAssignment { u, v: w });
            }
            outboxes[rank].entry(du as Rank).or_default().push((u as u64, w as u64, *label));
        }
    }
    alltoall_items(grid, outboxes)?
        .into_iter()
        .map(|inbox| {
            let triples = inbox
                .into_iter()
                .flat_map(|(_, items)| items)
                .map(|(u, w, l)| (u as usize, w as usize, l))
                .collect();
            LocalGraph::from_triples(triples)
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gridsim::{DistVec, Partition};
    use crate::spmat::{Direction, Mirror};

    fn label(overhang: u32) -> EdgeLabel {
        EdgeLabel { direction: Direction::Forward, overhang, src_overhang: 1, pre: 0, post: 0 }
    }

    fn path_forest(grid: &Grid) -> DistSparseMatrix<EdgeLabel> {
        // paths 0-1-2 and 3-4, vertex 5 isolated
        let mut t = Vec::new();
        for (u, w, o) in [(0, 1, 3), (1, 2, 4), (3, 4, 5)] {
            t.push((u, w, label(o)));
            t.push((w, u, label(o).mirror()));
        }
        DistSparseMatrix::from_triplets(grid.topology(), 6, 6, t, |_, _| {}).unwrap()
    }

    fn components(grid: &Grid, labels: &[u64]) -> ComponentVector {
        let part = Partition::grid_aligned(labels.len(), grid.side());
        ComponentVector { labels: DistVec::from_global(labels, part), n_contigs: 2 }
    }

    #[test]
    fn single_destination_gets_everything() {
        let mut grid = Grid::new(4).unwrap();
        let l = path_forest(&grid);
        let v = components(&grid, &[0, 0, 0, 1, 1, NONE]);
        let graphs = induced_subgraph(&mut grid, &l, &v, &[0, 0]).unwrap();
        assert_eq!(graphs[0].global_ids, vec![0, 1, 2, 3, 4]);
        let mut edges = graphs[0].global_edges();
        edges.sort_by_key(|e| (e.0, e.1));
        let mut expect: Vec<_> = l.gather().iter().map(|(r, c, x)| (r, c, *x)).collect();
        expect.sort_by_key(|e| (e.0, e.1));
        assert_eq!(edges, expect);
        assert!(graphs[1..].iter().all(|g| g.n_vertices() == 0));
    }

    #[test]
    fn split_assignment_and_column_layout() {
        let mut grid = Grid::new(4).unwrap();
        let l = path_forest(&grid);
        let v = components(&grid, &[0, 0, 0, 1, 1, NONE]);
        let graphs = induced_subgraph(&mut grid, &l, &v, &[3, 1]).unwrap();
        assert_eq!(graphs[3].global_ids, vec![0, 1, 2]);
        assert_eq!(graphs[1].global_ids, vec![3, 4]);
        // out-edges of vertex 1 live in its column
        let outs: Vec<_> = graphs[3].out_edges(1).map(|(r, l)| (r, l.overhang)).collect();
        assert_eq!(outs, vec![(0, 1), (2, 4)]);
        assert!(grid.ledger().is_conserved());
    }

    #[test]
    fn split_component_is_reported() {
        let mut grid = Grid::new(4).unwrap();
        let l = path_forest(&grid);
        let v = components(&grid, &[0, 0, 1, 1, 1, NONE]);
        let err = induced_subgraph(&mut grid, &l, &v, &[0, 1]).unwrap_err();
        assert!(matches!(err, ContigError::InconsistentAssignment { .. }));
    }
}
