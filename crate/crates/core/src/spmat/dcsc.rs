use std::borrow::Cow;

use serde::{Deserialize, Serialize};

use super::LocalSparse;

/// Doubly compressed sparse column storage: only non-empty columns get a
/// directory entry.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Dcsc<T> {
    n_rows: usize,
    n_cols: usize,
    /// Ids of the non-empty columns, increasing.
    jc: Vec<usize>,
    /// `cp[k]..cp[k + 1]` are the entries of column `jc[k]`.
    cp: Vec<usize>,
    ir: Vec<usize>,
    num: Vec<T>,
}

impl<T> Dcsc<T> {
    pub fn from_csc(m: LocalSparse<T>) -> Self {
        let (n_rows, n_cols) = (m.n_rows(), m.n_cols());
        let mut jc = Vec::new();
        let mut cp = vec![0];
        for c in 0..n_cols {
            let k = m.col_nnz(c);
            if k > 0 {
                jc.push(c);
                cp.push(cp.last().unwrap() + k);
            }
        }
        let triplets = m.into_triplets();
        let mut ir = Vec::with_capacity(triplets.len());
        let mut num = Vec::with_capacity(triplets.len());
        for (r, _, v) in triplets {
            ir.push(r);
            num.push(v);
        }
        Dcsc { n_rows, n_cols, jc, cp, ir, num }
    }

    /// Uncompresses the column directory; row indices and values are reused.
    pub fn into_csc(self) -> LocalSparse<T> {
        let mut col_ptr = vec![0; self.n_cols + 1];
        for (k, &c) in self.jc.iter().enumerate() {
            col_ptr[c + 1] = self.cp[k + 1] - self.cp[k];
        }
        for c in 0..self.n_cols {
            col_ptr[c + 1] += col_ptr[c];
        }
        LocalSparse::from_parts(self.n_rows, self.n_cols, col_ptr, self.ir, self.num)
            .expect("DCSC holds a canonical matrix")
    }

    pub fn nzc(&self) -> usize {
        self.jc.len()
    }

    pub fn nnz(&self) -> usize {
        self.ir.len()
    }
}

/// Storage of one distributed block: DCSC when fewer than half of the columns
/// are occupied, CSC otherwise.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Block<T> {
    Csc(LocalSparse<T>),
    Dcsc(Dcsc<T>),
}

impl<T: Clone> Block<T> {
    pub fn new(m: LocalSparse<T>) -> Self {
        let occupied = (0..m.n_cols()).filter(|&c| m.col_nnz(c) > 0).count();
        if occupied * 2 < m.n_cols() {
            Block::Dcsc(Dcsc::from_csc(m))
        } else {
            Block::Csc(m)
        }
    }

    pub fn csc(&self) -> Cow<'_, LocalSparse<T>> {
        match self {
            Block::Csc(m) => Cow::Borrowed(m),
            Block::Dcsc(d) => Cow::Owned(d.clone().into_csc()),
        }
    }

    pub fn into_csc(self) -> LocalSparse<T> {
        match self {
            Block::Csc(m) => m,
            Block::Dcsc(d) => d.into_csc(),
        }
    }

    pub fn nnz(&self) -> usize {
        match self {
            Block::Csc(m) => m.nnz(),
            Block::Dcsc(d) => d.nnz(),
        }
    }

    pub fn is_hypersparse(&self) -> bool {
        matches!(self, Block::Dcsc(_))
    }
}
