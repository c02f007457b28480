use serde::{Deserialize, Serialize};

use super::semiring::{ProductIndex, Semiring};
use super::SpmatError;

/// Compressed sparse column matrix (`JC` / `IR` / `VAL`).
///
/// Canonical form: `col_ptr` non-decreasing from 0 to `nnz`, row indices
/// strictly increasing inside each column.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct LocalSparse<T> {
    n_rows: usize,
    n_cols: usize,
    col_ptr: Vec<usize>,
    row_idx: Vec<usize>,
    values: Vec<T>,
}

impl<T> LocalSparse<T> {
    pub fn empty(n_rows: usize, n_cols: usize) -> Self {
        LocalSparse { n_rows, n_cols, col_ptr: vec![0; n_cols + 1], row_idx: Vec::new(), values: Vec::new() }
    }

    /// Builds from raw arrays, checking canonical form.
    pub fn from_parts(
        n_rows: usize,
        n_cols: usize,
        col_ptr: Vec<usize>,
        row_idx: Vec<usize>,
        values: Vec<T>,
    ) -> Result<Self, SpmatError> {
        let m = LocalSparse { n_rows, n_cols, col_ptr, row_idx, values };
        m.validate()?;
        Ok(m)
    }

    /// Builds from `(row, col, value)` triplets in any order; duplicates are
    /// folded with `combine`.
    pub fn from_triplets(
        n_rows: usize,
        n_cols: usize,
        mut triplets: Vec<(usize, usize, T)>,
        mut combine: impl FnMut(&mut T, T),
    ) -> Result<Self, SpmatError> {
        for &(r, c, _) in &triplets {
            if r >= n_rows || c >= n_cols {
                return Err(SpmatError::OutOfBounds { row: r, col: c, n_rows, n_cols });
            }
        }
        triplets.sort_by_key(|a| (a.1, a.0));
        let mut col_ptr = vec![0; n_cols + 1];
        let mut row_idx: Vec<usize> = Vec::with_capacity(triplets.len());
        let mut values: Vec<T> = Vec::with_capacity(triplets.len());
        let mut last: Option<(usize, usize)> = None;
        for (r, c, v) in triplets {
            if last == Some((r, c)) {
                combine(values.last_mut().unwrap(), v);
                continue;
            }
            last = Some((r, c));
            col_ptr[c + 1] += 1;
            row_idx.push(r);
            values.push(v);
        }
        for c in 0..n_cols {
            col_ptr[c + 1] += col_ptr[c];
        }
        Ok(LocalSparse { n_rows, n_cols, col_ptr, row_idx, values })
    }

    pub fn n_rows(&self) -> usize {
        self.n_rows
    }

    pub fn n_cols(&self) -> usize {
        self.n_cols
    }

    pub fn nnz(&self) -> usize {
        self.row_idx.len()
    }

    pub fn col_ptr(&self) -> &[usize] {
        &self.col_ptr
    }

    pub fn row_idx(&self) -> &[usize] {
        &self.row_idx
    }

    pub fn values(&self) -> &[T] {
        &self.values
    }

    /// Number of stored entries in column `c`.
    pub fn col_nnz(&self, c: usize) -> usize {
        self.col_ptr[c + 1] - self.col_ptr[c]
    }

    pub fn col(&self, c: usize) -> (&[usize], &[T]) {
        let r = self.col_ptr[c]..self.col_ptr[c + 1];
        (&self.row_idx[r.clone()], &self.values[r])
    }

    pub fn get(&self, row: usize, col: usize) -> Option<&T> {
        let (rows, vals) = self.col(col);
        rows.binary_search(&row).ok().map(|k| &vals[k])
    }

    /// Entries in column-major order.
    pub fn iter(&self) -> impl Iterator<Item = (usize, usize, &T)> + '_ {
        (0..self.n_cols).flat_map(move |c| {
            let (rows, vals) = self.col(c);
            rows.iter().zip(vals).map(move |(&r, v)| (r, c, v))
        })
    }

    pub fn validate(&self) -> Result<(), SpmatError> {
        let nnz = self.row_idx.len();
        if self.col_ptr.len() != self.n_cols + 1 {
            return Err(SpmatError::NotCanonical("col_ptr length"));
        }
        if self.values.len() != nnz {
            return Err(SpmatError::NotCanonical("values length"));
        }
        if self.col_ptr[0] != 0 || self.col_ptr[self.n_cols] != nnz {
            return Err(SpmatError::NotCanonical("col_ptr endpoints"));
        }
        for c in 0..self.n_cols {
            if self.col_ptr[c] > self.col_ptr[c + 1] {
                return Err(SpmatError::NotCanonical("col_ptr decreasing"));
            }
            let rows = &self.row_idx[self.col_ptr[c]..self.col_ptr[c + 1]];
            if rows.windows(2).any(|w| w[0] >= w[1]) {
                return Err(SpmatError::NotCanonical("row indices not strictly increasing"));
            }
            if rows.iter().any(|&r| r >= self.n_rows) {
                return Err(SpmatError::NotCanonical("row index out of range"));
            }
        }
        Ok(())
    }

    pub fn into_triplets(self) -> Vec<(usize, usize, T)> {
        let mut out = Vec::with_capacity(self.values.len());
        let mut values = self.values.into_iter();
        for c in 0..self.n_cols {
            for k in self.col_ptr[c]..self.col_ptr[c + 1] {
                out.push((self.row_idx[k], c, values.next().unwrap()));
            }
        }
        out
    }

    /// Keeps entries for which `keep(row, col, value)` holds.
    pub fn retain(self, mut keep: impl FnMut(usize, usize, &T) -> bool) -> Self {
        let (n_rows, n_cols) = (self.n_rows, self.n_cols);
        let mut col_ptr = vec![0; n_cols + 1];
        let mut row_idx = Vec::new();
        let mut values = Vec::new();
        let mut vals = self.values.into_iter();
        for c in 0..n_cols {
            for k in self.col_ptr[c]..self.col_ptr[c + 1] {
                let v = vals.next().unwrap();
                let r = self.row_idx[k];
                if keep(r, c, &v) {
                    row_idx.push(r);
                    values.push(v);
                }
            }
            col_ptr[c + 1] = row_idx.len();
        }
        LocalSparse { n_rows, n_cols, col_ptr, row_idx, values }
    }

    /// Maps values; entries mapped to `None` are dropped.
    pub fn filter_map<U>(&self, mut f: impl FnMut(usize, usize, &T) -> Option<U>) -> LocalSparse<U> {
        let mut col_ptr = vec![0; self.n_cols + 1];
        let mut row_idx = Vec::new();
        let mut values = Vec::new();
        for c in 0..self.n_cols {
            let (rows, vals) = self.col(c);
            for (&r, v) in rows.iter().zip(vals) {
                if let Some(u) = f(r, c, v) {
                    row_idx.push(r);
                    values.push(u);
                }
            }
            col_ptr[c + 1] = row_idx.len();
        }
        LocalSparse { n_rows: self.n_rows, n_cols: self.n_cols, col_ptr, row_idx, values }
    }

    pub fn map<U>(&self, mut f: impl FnMut(&T) -> U) -> LocalSparse<U> {
        LocalSparse {
            n_rows: self.n_rows,
            n_cols: self.n_cols,
            col_ptr: self.col_ptr.clone(),
            row_idx: self.row_idx.clone(),
            values: self.values.iter().map(&mut f).collect(),
        }
    }

    /// Transpose with a payload transform applied to every moved value.
    pub fn transpose_with(&self, mut f: impl FnMut(&T) -> T) -> Self {
        let mut counts = vec![0usize; self.n_rows + 1];
        for &r in &self.row_idx {
            counts[r + 1] += 1;
        }
        for r in 0..self.n_rows {
            counts[r + 1] += counts[r];
        }
        let col_ptr = counts.clone();
        let mut next = counts;
        let nnz = self.nnz();
        let mut row_idx = vec![0; nnz];
        let mut slots: Vec<Option<T>> = (0..nnz).map(|_| None).collect();
        for c in 0..self.n_cols {
            let (rows, vals) = self.col(c);
            for (&r, v) in rows.iter().zip(vals) {
                let at = next[r];
                next[r] += 1;
                row_idx[at] = c;
                slots[at] = Some(f(v));
            }
        }
        LocalSparse {
            n_rows: self.n_cols,
            n_cols: self.n_rows,
            col_ptr,
            row_idx,
            values: slots.into_iter().map(|s| s.unwrap()).collect(),
        }
    }
}

impl<T: Clone> LocalSparse<T> {
    pub fn transpose(&self) -> Self {
        self.transpose_with(T::clone)
    }
}

/// Gustavson column-by-column product `A * B` under `semiring`.
///
/// Index offsets translate block-local indices into global ones for the
/// semiring callbacks.
pub fn local_spgemm<S: Semiring>(
    a: &LocalSparse<S::Left>,
    b: &LocalSparse<S::Right>,
    semiring: &S,
    offsets: ProductIndex,
) -> Result<LocalSparse<S::Out>, SpmatError> {
    if a.n_cols() != b.n_rows() {
        return Err(SpmatError::DimensionMismatch { left: (a.n_rows(), a.n_cols()), right: (b.n_rows(), b.n_cols()) });
    }
    let n_rows = a.n_rows();
    let mut acc: Vec<Option<S::Out>> = (0..n_rows).map(|_| None).collect();
    let mut touched: Vec<usize> = Vec::new();
    let mut col_ptr = vec![0; b.n_cols() + 1];
    let mut row_idx = Vec::new();
    let mut values = Vec::new();
    for j in 0..b.n_cols() {
        let (b_rows, b_vals) = b.col(j);
        for (&k, bv) in b_rows.iter().zip(b_vals) {
            let (a_rows, a_vals) = a.col(k);
            for (&i, av) in a_rows.iter().zip(a_vals) {
                let at = ProductIndex { row: offsets.row + i, inner: offsets.inner + k, col: offsets.col + j };
                if !semiring.filter(av, bv, at) {
                    continue;
                }
                let product = semiring.multiply(av, bv, at);
                match &mut acc[i] {
                    Some(existing) => semiring.add(existing, product),
                    slot @ None => {
                        *slot = Some(product);
                        touched.push(i);
                    }
                }
            }
        }
        touched.sort_unstable();
        for &i in &touched {
            row_idx.push(i);
            values.push(acc[i].take().unwrap());
        }
        touched.clear();
        col_ptr[j + 1] = row_idx.len();
    }
    Ok(LocalSparse { n_rows, n_cols: b.n_cols(), col_ptr, row_idx, values })
}

/// Merges two matrices of equal shape, folding coincident entries with `add`.
pub fn merge_add<T>(a: LocalSparse<T>, b: LocalSparse<T>, mut add: impl FnMut(&mut T, T)) -> LocalSparse<T> {
    assert_eq!((a.n_rows, a.n_cols), (b.n_rows, b.n_cols));
    if b.nnz() == 0 {
        return a;
    }
    if a.nnz() == 0 {
        return b;
    }
    let (n_rows, n_cols) = (a.n_rows, a.n_cols);
    let mut col_ptr = vec![0; n_cols + 1];
    let mut row_idx = Vec::with_capacity(a.nnz() + b.nnz());
    let mut values = Vec::with_capacity(a.nnz() + b.nnz());
    let mut av = a.values.into_iter();
    let mut bv = b.values.into_iter();
    for c in 0..n_cols {
        let (mut i, ie) = (a.col_ptr[c], a.col_ptr[c + 1]);
        let (mut k, ke) = (b.col_ptr[c], b.col_ptr[c + 1]);
        while i < ie || k < ke {
            let ra = if i < ie { a.row_idx[i] } else { usize::MAX };
            let rb = if k < ke { b.row_idx[k] } else { usize::MAX };
            if ra < rb {
                row_idx.push(ra);
                values.push(av.next().unwrap());
                i += 1;
            } else if rb < ra {
                row_idx.push(rb);
                values.push(bv.next().unwrap());
                k += 1;
            } else {
                let mut x = av.next().unwrap();
                add(&mut x, bv.next().unwrap());
                row_idx.push(ra);
                values.push(x);
                i += 1;
                k += 1;
            }
        }
        col_ptr[c + 1] = row_idx.len();
    }
    LocalSparse { n_rows, n_cols, col_ptr, row_idx, values }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spmat::semiring::Counting;

    fn boolean(n_rows: usize, n_cols: usize, entries: &[(usize, usize)]) -> LocalSparse<()> {
        LocalSparse::from_triplets(n_rows, n_cols, entries.iter().map(|&(r, c)| (r, c, ())).collect(), |_, _| {})
            .unwrap()
    }

    #[test]
    fn two_by_two_product() {
        let a = boolean(2, 2, &[(0, 0), (1, 0), (1, 1)]);
        let at = a.transpose();
        let c = local_spgemm(&a, &at, &Counting::new(), ProductIndex::default()).unwrap();
        assert_eq!(c.get(0, 1), Some(&1));
        assert_eq!(c.get(1, 0), Some(&1));
        assert_eq!(c.get(1, 1), Some(&2));
    }

    #[test]
    fn empty_product_is_empty() {
        let a = boolean(3, 4, &[]);
        let c = local_spgemm(&a, &a.transpose(), &Counting::new(), ProductIndex::default()).unwrap();
        assert_eq!(c.nnz(), 0);
    }

    #[test]
    fn dimension_mismatch() {
        let a = boolean(3, 4, &[]);
        let err = local_spgemm(&a, &a, &Counting::new(), ProductIndex::default()).unwrap_err();
        assert!(matches!(err, SpmatError::DimensionMismatch { .. }));
    }

    #[test]
    fn triplets_fold_duplicates() {
        let m = LocalSparse::from_triplets(2, 2, vec![(1, 1, 2u32), (0, 1, 1), (1, 1, 5)], |a, b| *a += b).unwrap();
        m.validate().unwrap();
        assert_eq!(m.get(1, 1), Some(&7));
        assert_eq!(m.nnz(), 2);
    }

    #[test]
    fn validate_rejects_unsorted_rows() {
        let err = LocalSparse::from_parts(3, 1, vec![0, 2], vec![2, 1], vec![(), ()]).unwrap_err();
        assert!(matches!(err, SpmatError::NotCanonical(_)));
    }

    #[test]
    fn merge_add_folds() {
        let a = LocalSparse::from_triplets(3, 2, vec![(0, 0, 1u64), (2, 1, 1)], |_, _| {}).unwrap();
        let b = LocalSparse::from_triplets(3, 2, vec![(1, 0, 1u64), (2, 1, 4)], |_, _| {}).unwrap();
        let m = merge_add(a, b, |x, y| *x += y);
        m.validate().unwrap();
        assert_eq!(m.into_triplets(), vec![(0, 0, 1), (1, 0, 1), (2, 1, 5)]);
    }
}
