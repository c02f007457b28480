use std::collections::BTreeMap;

use super::ContigError;
use crate::gridsim::{alltoall_items, band_exchange, DistVec, Grid, Partition, Rank};
use crate::spmat::DistSparseMatrix;

/// Label of vertices that belong to no contig.
pub const NONE: u64 = u64::MAX;

/// Read -> contig map over the grid-aligned vertex partition.
#[derive(Clone, Debug, PartialEq)]
pub struct ComponentVector {
    pub labels: DistVec<u64>,
    pub n_contigs: usize,
}

impl ComponentVector {
    pub fn label(&self, u: usize) -> Option<usize> {
        let l = *self.labels.get(u);
        (l != NONE).then_some(l as usize)
    }

    pub fn to_vec(&self) -> Vec<Option<usize>> {
        self.labels.gather().into_iter().map(|l| (l != NONE).then_some(l as usize)).collect()
    }
}

/// Sends `(target, value)` requests to the owners of `target`; each owner
/// lowers its entry to the smallest value received.
fn min_update(grid: &mut Grid, f: &mut DistVec<u64>, requests: Vec<BTreeMap<usize, u64>>) -> Result<(), ContigError> {
    let part = f.partition().clone();
    let mut outboxes: Vec<BTreeMap<Rank, Vec<(u64, u64)>>> = vec![BTreeMap::new(); grid.size()];
    for (src, req) in requests.into_iter().enumerate() {
        for (target, value) in req {
            outboxes[src].entry(part.owner(target)).or_default().push((target as u64, value));
        }
    }
    for (rank, inbox) in alltoall_items(grid, outboxes)?.into_iter().enumerate() {
        let start = part.start(rank);
        let piece = f.piece_mut(rank);
        for (target, value) in inbox.into_iter().flat_map(|(_, items)| items) {
            let slot = &mut piece[target as usize - start];
            *slot = (*slot).min(value);
        }
    }
    Ok(())
}

/// `out[u] = table[query[u]]` for every owned `u` whose query is not NONE,
/// by a request/reply pair of all-to-alls to the owners of the queried ids.
fn lookup(grid: &mut Grid, table: &DistVec<u64>, query: &DistVec<u64>) -> Result<DistVec<u64>, ContigError> {
    let part = table.partition().clone();
    let p = grid.size();
    let mut asks: Vec<BTreeMap<Rank, Vec<(u64, u64)>>> = vec![BTreeMap::new(); p];
    for (rank, ask) in asks.iter_mut().enumerate() {
        for (u, &q) in query.local_iter(rank) {
            if q != NONE {
                ask.entry(part.owner(q as usize)).or_default().push((u as u64, q));
            }
        }
    }
    let received = alltoall_items(grid, asks)?;
    let mut replies: Vec<BTreeMap<Rank, Vec<(u64, u64)>>> = vec![BTreeMap::new(); p];
    for (rank, inbox) in received.into_iter().enumerate() {
        for (src, items) in inbox {
            let answers = items.into_iter().map(|(u, q)| (u, *table.get(q as usize))).collect();
            replies[rank].insert(src, answers);
        }
    }
    let mut out = DistVec::filled(NONE, part.clone());
    for (rank, inbox) in alltoall_items(grid, replies)?.into_iter().enumerate() {
        let start = part.start(rank);
        for (u, value) in inbox.into_iter().flat_map(|(_, items)| items) {
            out.piece_mut(rank)[u as usize - start] = value;
        }
    }
    Ok(out)
}

/// Connected components by min-label hooking and shortcutting over the
/// distributed matrix.
///
/// Each round exchanges the parent vector along bands, hooks across edges
/// touching a vertex whose parent changed in the previous round (both the
/// vertex itself and its parent take the smaller neighbour label), then
/// jumps every vertex to its grandparent. Rounds stop when no parent moves.
/// Degree-0 vertices get [`NONE`]; the remaining labels are renumbered
/// densely in order of the smallest vertex in each component.
pub fn connected_components(grid: &mut Grid, l: &DistSparseMatrix<impl Clone>) -> Result<ComponentVector, ContigError> {
    let n = l.n_rows();
    let p = grid.size();
    let part = Partition::grid_aligned(n, grid.side());
    let degree = l.row_degree(grid)?;
    let mut f = DistVec::from_global(&(0..n as u64).collect::<Vec<_>>(), part.clone());
    let mut changed = DistVec::filled(true, part.clone());
    loop {
        let state: Vec<Vec<(u64, bool)>> = (0..p)
            .map(|r| f.piece(r).iter().copied().zip(changed.piece(r).iter().copied()).collect())
            .collect();
        let views = band_exchange(grid, &state)?;
        let mut requests: Vec<BTreeMap<usize, u64>> = vec![BTreeMap::new(); p];
        for (rank, view) in views.iter().enumerate() {
            let block = l.block(rank);
            let (r0, _) = l.block_origin(rank);
            for (lr, lc, _) in block.iter() {
                let ((fu, cu), (fv, cv)) = (view.row[lr], view.col[lc]);
                if !(cu || cv) || fv >= fu {
                    continue;
                }
                for target in [r0 + lr, fu as usize] {
                    let e = requests[rank].entry(target).or_insert(fv);
                    *e = (*e).min(fv);
                }
            }
        }
        let before = f.clone();
        min_update(grid, &mut f, requests)?;
        f = lookup(grid, &f, &f)?;
        let counts: Vec<u64> = (0..p)
            .map(|r| f.piece(r).iter().zip(before.piece(r)).filter(|(a, b)| a != b).count() as u64)
            .collect();
        changed = f.map(|u, &x| x != *before.get(u));
        if grid.allreduce_sum(&counts)? == 0 {
            break;
        }
    }

    let roots: Vec<u64> = (0..p)
        .map(|r| f.local_iter(r).filter(|&(u, &x)| x == u as u64 && *degree.get(u) > 0).count() as u64)
        .collect();
    let all_roots = grid.allgather_u64(&roots)?;
    let mut next: Vec<u64> = all_roots.iter().scan(0, |acc, &c| { let s = *acc; *acc += c; Some(s) }).collect();
    let n_contigs = all_roots.iter().sum::<u64>() as usize;
    let dense = f.map(|u, &x| {
        if x == u as u64 && *degree.get(u) > 0 {
            let r = part.owner(u);
            let id = next[r];
            next[r] += 1;
            id
        } else {
            NONE
        }
    });
    let query = f.map(|u, &x| if *degree.get(u) > 0 { x } else { NONE });
    let labels = lookup(grid, &dense, &query)?;
    Ok(ComponentVector { labels, n_contigs })
}

/// Component sizes on the contig-id block partition: local histograms
/// combined by a reduce-scatter.
pub fn contig_sizes(grid: &mut Grid, v: &ComponentVector) -> Result<DistVec<u64>, ContigError> {
    let p = grid.size();
    let part = Partition::balanced(v.n_contigs, p);
    let partials: Vec<Vec<u64>> = (0..p)
        .map(|r| {
            let mut h = vec![0u64; v.n_contigs];
            for (_, &c) in v.labels.local_iter(r) {
                if c != NONE {
                    h[c as usize] += 1;
                }
            }
            h
        })
        .collect();
    let owned = grid.reduce_scatter(&partials, &part)?;
    Ok(DistVec::from_pieces(part, owned))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spmat::LocalSparse;

    pub(crate) fn graph(n: usize, edges: &[(usize, usize)]) -> LocalSparse<()> {
        let t = edges.iter().flat_map(|&(u, v)| [(u, v, ()), (v, u, ())]).collect();
        LocalSparse::from_triplets(n, n, t, |_, _| {}).unwrap()
    }

    #[test]
    fn three_chains_after_masking() {
        // v1..v8 -> 0..7 with v3 (index 2) already masked
        let g = graph(8, &[(0, 1), (3, 4), (4, 5), (6, 7)]);
        for p in [1, 4, 9] {
            let mut grid = Grid::new(p).unwrap();
            let l = DistSparseMatrix::from_global(grid.topology(), &g);
            let cv = connected_components(&mut grid, &l).unwrap();
            assert_eq!(cv.n_contigs, 3);
            assert_eq!(cv.to_vec(), vec![Some(0), Some(0), None, Some(1), Some(1), Some(1), Some(2), Some(2)]);
            assert_eq!(contig_sizes(&mut grid, &cv).unwrap().gather(), vec![2, 3, 2]);
        }
    }

    #[test]
    fn empty_graph_has_no_contigs() {
        let mut grid = Grid::new(4).unwrap();
        let l = DistSparseMatrix::from_global(grid.topology(), &graph(5, &[]));
        let cv = connected_components(&mut grid, &l).unwrap();
        assert_eq!(cv.n_contigs, 0);
        assert!(cv.to_vec().iter().all(Option::is_none));
        assert!(contig_sizes(&mut grid, &cv).unwrap().gather().is_empty());
    }

    #[test]
    fn long_path_against_scrambled_ids() {
        // a single path visiting ids in a scrambled order
        let order: Vec<usize> = (0..40).map(|i| (i * 17) % 40).collect();
        let edges: Vec<_> = order.windows(2).map(|w| (w[0], w[1])).collect();
        let mut grid = Grid::new(16).unwrap();
        let l = DistSparseMatrix::from_global(grid.topology(), &graph(40, &edges));
        let cv = connected_components(&mut grid, &l).unwrap();
        assert_eq!(cv.n_contigs, 1);
        assert!(cv.to_vec().iter().all(|&x| x == Some(0)));
    }
}
