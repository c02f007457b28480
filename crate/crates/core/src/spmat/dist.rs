use std::borrow::Cow;
use std::collections::BTreeMap;

use serde::de::DeserializeOwned;
use serde::Serialize;

use super::dcsc::Block;
use super::label::Mirror;
use super::local::{local_spgemm, merge_add, LocalSparse};
use super::semiring::{ProductIndex, Semiring};
use super::SpmatError;
use crate::gridsim::{alltoall_items, band_exchange, decode, encode, DistVec, Grid, GridTopology, Partition, Rank};

/// Sparse matrix cut into `side x side` blocks; rank `(i, j)` stores the block
/// covering row band `i` and column band `j`, with block-local indices.
#[derive(Clone, Debug, PartialEq)]
pub struct DistSparseMatrix<T> {
    topo: GridTopology,
    n_rows: usize,
    n_cols: usize,
    row_bands: Partition,
    col_bands: Partition,
    blocks: Vec<Block<T>>,
}

impl<T: Clone> DistSparseMatrix<T> {
    pub fn empty(topo: GridTopology, n_rows: usize, n_cols: usize) -> Self {
        let side = topo.side();
        let row_bands = Partition::balanced(n_rows, side);
        let col_bands = Partition::balanced(n_cols, side);
        let blocks = (0..topo.p_total())
            .map(|r| {
                let (i, j) = topo.coords(r);
                Block::new(LocalSparse::empty(row_bands.size(i), col_bands.size(j)))
            })
            .collect();
        DistSparseMatrix { topo, n_rows, n_cols, row_bands, col_bands, blocks }
    }

    /// Scatters triplets to their blocks without communication (initial load).
    pub fn from_triplets(
        topo: GridTopology,
        n_rows: usize,
        n_cols: usize,
        triplets: Vec<(usize, usize, T)>,
        combine: impl FnMut(&mut T, T) + Clone,
    ) -> Result<Self, SpmatError> {
        let mut m = Self::empty(topo, n_rows, n_cols);
        let mut per_block: Vec<Vec<(usize, usize, T)>> = vec![Vec::new(); topo.p_total()];
        for (r, c, v) in triplets {
            if r >= n_rows || c >= n_cols {
                return Err(SpmatError::OutOfBounds { row: r, col: c, n_rows, n_cols });
            }
            let (rank, lr, lc) = m.locate(r, c);
            per_block[rank].push((lr, lc, v));
        }
        for (rank, t) in per_block.into_iter().enumerate() {
            let (i, j) = topo.coords(rank);
            let local = LocalSparse::from_triplets(m.row_bands.size(i), m.col_bands.size(j), t, combine.clone())?;
            m.blocks[rank] = Block::new(local);
        }
        Ok(m)
    }

    pub fn from_global(topo: GridTopology, global: &LocalSparse<T>) -> Self {
        let triplets = global.iter().map(|(r, c, v)| (r, c, v.clone())).collect();
        Self::from_triplets(topo, global.n_rows(), global.n_cols(), triplets, |_, _| {})
            .expect("entries of a valid matrix are in range")
    }

    /// Each rank contributes global triplets held anywhere; an all-to-all moves
    /// them to the owning block.
    pub fn redistribute(
        grid: &mut Grid,
        n_rows: usize,
        n_cols: usize,
        per_rank: Vec<Vec<(usize, usize, T)>>,
        combine: impl FnMut(&mut T, T) + Clone,
    ) -> Result<Self, SpmatError>
    where
        T: Serialize + DeserializeOwned,
    {
        let topo = grid.topology();
        let mut m = Self::empty(topo, n_rows, n_cols);
        let mut outboxes: Vec<BTreeMap<Rank, Vec<(usize, usize, T)>>> = vec![BTreeMap::new(); topo.p_total()];
        for (src, triplets) in per_rank.into_iter().enumerate() {
            for (r, c, v) in triplets {
                if r >= n_rows || c >= n_cols {
                    return Err(SpmatError::OutOfBounds { row: r, col: c, n_rows, n_cols });
                }
                let (dst, _, _) = m.locate(r, c);
                outboxes[src].entry(dst).or_default().push((r, c, v));
            }
        }
        let inboxes = alltoall_items(grid, outboxes)?;
        for (rank, inbox) in inboxes.into_iter().enumerate() {
            let (i, j) = topo.coords(rank);
            let (r0, c0) = (m.row_bands.start(i), m.col_bands.start(j));
            let local_triplets = inbox
                .into_iter()
                .flat_map(|(_, items)| items)
                .map(|(r, c, v)| (r - r0, c - c0, v))
                .collect();
            let local =
                LocalSparse::from_triplets(m.row_bands.size(i), m.col_bands.size(j), local_triplets, combine.clone())?;
            m.blocks[rank] = Block::new(local);
        }
        Ok(m)
    }

    /// Owning rank and block-local coordinates of a global entry.
    pub fn locate(&self, row: usize, col: usize) -> (Rank, usize, usize) {
        let i = self.row_bands.owner(row);
        let j = self.col_bands.owner(col);
        (self.topo.rank(i, j), row - self.row_bands.start(i), col - self.col_bands.start(j))
    }

    pub fn block(&self, rank: Rank) -> Cow<'_, LocalSparse<T>> {
        self.blocks[rank].csc()
    }

    pub fn block_storage(&self, rank: Rank) -> &Block<T> {
        &self.blocks[rank]
    }

    /// Global offsets `(first row, first col)` of the block on `rank`.
    pub fn block_origin(&self, rank: Rank) -> (usize, usize) {
        let (i, j) = self.topo.coords(rank);
        (self.row_bands.start(i), self.col_bands.start(j))
    }

    pub fn set_block(&mut self, rank: Rank, local: LocalSparse<T>) {
        let (i, j) = self.topo.coords(rank);
        assert_eq!((local.n_rows(), local.n_cols()), (self.row_bands.size(i), self.col_bands.size(j)));
        self.blocks[rank] = Block::new(local);
    }

    /// Global entries of one block.
    pub fn block_triplets(&self, rank: Rank) -> Vec<(usize, usize, T)> {
        let (r0, c0) = self.block_origin(rank);
        self.block(rank).iter().map(|(r, c, v)| (r0 + r, c0 + c, v.clone())).collect()
    }

    /// Collects the whole matrix on the caller (inspection and output only).
    pub fn gather(&self) -> LocalSparse<T> {
        let triplets = (0..self.topo.p_total()).flat_map(|r| self.block_triplets(r)).collect();
        LocalSparse::from_triplets(self.n_rows, self.n_cols, triplets, |_, _| {})
            .expect("blocks hold disjoint in-range entries")
    }

    pub fn validate(&self) -> Result<(), SpmatError> {
        for rank in 0..self.topo.p_total() {
            let b = self.block(rank);
            b.validate()?;
            let (i, j) = self.topo.coords(rank);
            if b.n_rows() != self.row_bands.size(i) || b.n_cols() != self.col_bands.size(j) {
                return Err(SpmatError::NotCanonical("block shape does not match its bands"));
            }
        }
        Ok(())
    }

    /// Rank-local filter with global indices.
    pub fn retain(&self, mut keep: impl FnMut(usize, usize, &T) -> bool) -> Self {
        let mut out = self.clone();
        for rank in 0..self.topo.p_total() {
            let (r0, c0) = self.block_origin(rank);
            let b = self.block(rank).into_owned().retain(|r, c, v| keep(r0 + r, c0 + c, v));
            out.blocks[rank] = Block::new(b);
        }
        out
    }

    /// Rank-local payload transform with global indices; `None` drops the entry.
    pub fn filter_map<U: Clone>(&self, mut f: impl FnMut(usize, usize, &T) -> Option<U>) -> DistSparseMatrix<U> {
        let blocks = (0..self.topo.p_total())
            .map(|rank| {
                let (r0, c0) = self.block_origin(rank);
                Block::new(self.block(rank).filter_map(|r, c, v| f(r0 + r, c0 + c, v)))
            })
            .collect();
        DistSparseMatrix {
            topo: self.topo,
            n_rows: self.n_rows,
            n_cols: self.n_cols,
            row_bands: self.row_bands.clone(),
            col_bands: self.col_bands.clone(),
            blocks,
        }
    }

    /// Element-wise combination with a matrix of identical shape and
    /// distribution. `f` sees every entry of `self` and the coincident entry
    /// of `other`, if any.
    pub fn zip_with<U: Clone, V: Clone>(
        &self,
        other: &DistSparseMatrix<U>,
        mut f: impl FnMut(usize, usize, &T, Option<&U>) -> Option<V>,
    ) -> Result<DistSparseMatrix<V>, SpmatError> {
        if self.row_bands != other.row_bands || self.col_bands != other.col_bands || self.topo != other.topo {
            return Err(SpmatError::DistributionMismatch);
        }
        let blocks = (0..self.topo.p_total())
            .map(|rank| {
                let (r0, c0) = self.block_origin(rank);
                let ob = other.block(rank);
                Block::new(self.block(rank).filter_map(|r, c, v| f(r0 + r, c0 + c, v, ob.get(r, c))))
            })
            .collect();
        Ok(DistSparseMatrix {
            topo: self.topo,
            n_rows: self.n_rows,
            n_cols: self.n_cols,
            row_bands: self.row_bands.clone(),
            col_bands: self.col_bands.clone(),
            blocks,
        })
    }

    /// Transpose: each rank transposes its block, mirroring payloads, and
    /// swaps it with `P(j,i)`.
    pub fn transpose(&self, grid: &mut Grid) -> Result<Self, SpmatError>
    where
        T: Mirror + Serialize + DeserializeOwned,
    {
        self.check_grid(grid)?;
        let payloads = (0..self.topo.p_total())
            .map(|rank| {
                let b = self.block(rank);
                if b.nnz() == 0 {
                    Vec::new()
                } else {
                    encode(&b.transpose_with(T::mirror))
                }
            })
            .collect();
        let received = grid.transpose_exchange(payloads)?;
        let mut out = DistSparseMatrix::empty(self.topo, self.n_cols, self.n_rows);
        for (rank, bytes) in received.into_iter().enumerate() {
            if !bytes.is_empty() {
                out.set_block(rank, decode(&bytes));
            }
        }
        Ok(out)
    }

    /// Number of stored entries in every row, as a grid-aligned vector:
    /// per-block row counts followed by a reduce-scatter.
    pub fn row_degree(&self, grid: &mut Grid) -> Result<DistVec<u64>, SpmatError> {
        self.check_grid(grid)?;
        let partials: Vec<Vec<u64>> = (0..self.topo.p_total())
            .map(|rank| {
                let mut counts = vec![0u64; self.n_rows];
                let (r0, _) = self.block_origin(rank);
                for &r in self.block(rank).row_idx() {
                    counts[r0 + r] += 1;
                }
                counts
            })
            .collect();
        let part = Partition::grid_aligned(self.n_rows, self.topo.side());
        let owned = grid.reduce_scatter(&partials, &part)?;
        Ok(DistVec::from_pieces(part, owned))
    }

    /// Clears every row and column flagged in `kill` (grid-aligned, length
    /// `n`). Indexing is unchanged.
    pub fn prune_rows_cols(&self, grid: &mut Grid, kill: &DistVec<bool>) -> Result<Self, SpmatError>
    where
        T: Serialize + DeserializeOwned,
    {
        self.check_grid(grid)?;
        if self.n_rows != self.n_cols || kill.len() != self.n_rows {
            return Err(SpmatError::NotSquare { n_rows: self.n_rows, n_cols: self.n_cols });
        }
        let views = band_exchange(grid, kill.pieces())?;
        let mut out = self.clone();
        for (rank, view) in views.into_iter().enumerate() {
            let b = self.block(rank).into_owned().retain(|r, c, _| !view.row[r] && !view.col[c]);
            out.blocks[rank] = Block::new(b);
        }
        Ok(out)
    }

    fn check_grid(&self, grid: &Grid) -> Result<(), SpmatError> {
        if grid.topology() != self.topo {
            Err(SpmatError::DistributionMismatch)
        } else {
            Ok(())
        }
    }
}

impl<T> DistSparseMatrix<T> {
    pub fn topology(&self) -> GridTopology {
        self.topo
    }

    pub fn n_rows(&self) -> usize {
        self.n_rows
    }

    pub fn n_cols(&self) -> usize {
        self.n_cols
    }

    pub fn row_bands(&self) -> &Partition {
        &self.row_bands
    }

    pub fn col_bands(&self) -> &Partition {
        &self.col_bands
    }

    pub fn nnz(&self) -> usize {
        self.blocks.iter().map(|b| match b {
            Block::Csc(m) => m.nnz(),
            Block::Dcsc(d) => d.nnz(),
        }).sum()
    }
}

/// Distributed `A * B` by SUMMA: at stage `k` block `A(i,k)` is broadcast
/// along processor row `i` and `B(k,j)` down processor column `j`; every rank
/// multiplies locally and folds into its block of the result.
pub fn spgemm<S>(
    grid: &mut Grid,
    a: &DistSparseMatrix<S::Left>,
    b: &DistSparseMatrix<S::Right>,
    semiring: &S,
) -> Result<DistSparseMatrix<S::Out>, SpmatError>
where
    S: Semiring,
    S::Left: Clone + Serialize + DeserializeOwned,
    S::Right: Clone + Serialize + DeserializeOwned,
    S::Out: Clone,
{
    if a.n_cols != b.n_rows {
        return Err(SpmatError::DimensionMismatch { left: (a.n_rows, a.n_cols), right: (b.n_rows, b.n_cols) });
    }
    a.check_grid(grid)?;
    b.check_grid(grid)?;
    let topo = a.topo;
    let side = topo.side();
    let mut out = DistSparseMatrix::<S::Out>::empty(topo, a.n_rows, b.n_cols);
    let mut acc: Vec<LocalSparse<S::Out>> = (0..topo.p_total()).map(|r| out.block(r).into_owned()).collect();
    for k in 0..side {
        let a_panels: Vec<Option<LocalSparse<S::Left>>> = (0..side)
            .map(|i| {
                let blk = a.block(topo.rank(i, k));
                if blk.nnz() == 0 {
                    return None;
                }
                let bytes = grid.row_broadcast(i, k, &encode(blk.as_ref()));
                Some(decode(&bytes))
            })
            .collect();
        let b_panels: Vec<Option<LocalSparse<S::Right>>> = (0..side)
            .map(|j| {
                let blk = b.block(topo.rank(k, j));
                if blk.nnz() == 0 {
                    return None;
                }
                let bytes = grid.col_broadcast(j, k, &encode(blk.as_ref()));
                Some(decode(&bytes))
            })
            .collect();
        for rank in 0..topo.p_total() {
            let (i, j) = topo.coords(rank);
            let (Some(ap), Some(bp)) = (&a_panels[i], &b_panels[j]) else {
                continue;
            };
            let offsets = ProductIndex {
                row: a.row_bands.start(i),
                inner: a.col_bands.start(k),
                col: b.col_bands.start(j),
            };
            let partial = local_spgemm(ap, bp, semiring, offsets)?;
            let merged = merge_add(std::mem::replace(&mut acc[rank], LocalSparse::empty(0, 0)), partial, |x, y| {
                semiring.add(x, y)
            });
            acc[rank] = merged;
        }
    }
    for (rank, m) in acc.into_iter().enumerate() {
        out.set_block(rank, m);
    }
    Ok(out)
}

/// Grid-aligned kill flags for a set of vertex ids.
pub fn kill_vector(n: usize, side: usize, ids: impl IntoIterator<Item = usize>) -> DistVec<bool> {
    let mut flags = vec![false; n];
    for id in ids {
        flags[id] = true;
    }
    DistVec::from_global(&flags, Partition::grid_aligned(n, side))
}
