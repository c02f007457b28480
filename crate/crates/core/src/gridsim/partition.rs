use serde::{Deserialize, Serialize};

use super::Rank;

/// Contiguous ownership map of `[0, n)` over a fixed number of parts.
///
/// Part `r` owns `offsets[r]..offsets[r + 1]`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Partition {
    offsets: Vec<usize>,
}

impl Partition {
    /// Balanced block distribution: part sizes are `q` or `q + 1` with the
    /// larger parts first.
    pub fn balanced(n: usize, parts: usize) -> Self {
        assert!(parts > 0, "partition needs at least one part");
        let q = n / parts;
        let r = n % parts;
        let mut offsets = Vec::with_capacity(parts + 1);
        let mut acc = 0;
        offsets.push(0);
        for p in 0..parts {
            acc += q + usize::from(p < r);
            offsets.push(acc);
        }
        Partition { offsets }
    }

    /// Vector distribution aligned with a `side x side` grid: `[0, n)` is cut
    /// into `side` balanced bands (the matrix row bands) and band `b` is cut
    /// again over the ranks of processor row `b`.
    pub fn grid_aligned(n: usize, side: usize) -> Self {
        let bands = Partition::balanced(n, side);
        let mut offsets = Vec::with_capacity(side * side + 1);
        offsets.push(0);
        for b in 0..side {
            let range = bands.range(b);
            let inner = Partition::balanced(range.len(), side);
            for c in 0..side {
                offsets.push(range.start + inner.offsets[c + 1]);
            }
        }
        Partition { offsets }
    }

    pub fn from_offsets(offsets: Vec<usize>) -> Self {
        assert!(!offsets.is_empty() && offsets[0] == 0);
        assert!(offsets.windows(2).all(|w| w[0] <= w[1]));
        Partition { offsets }
    }

    pub fn parts(&self) -> usize {
        self.offsets.len() - 1
    }

    /// Size of the partitioned index space.
    pub fn len(&self) -> usize {
        *self.offsets.last().unwrap()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn range(&self, part: usize) -> std::ops::Range<usize> {
        self.offsets[part]..self.offsets[part + 1]
    }

    pub fn start(&self, part: usize) -> usize {
        self.offsets[part]
    }

    pub fn size(&self, part: usize) -> usize {
        self.offsets[part + 1] - self.offsets[part]
    }

    /// Part owning index `i`. Panics if `i` is out of range.
    pub fn owner(&self, i: usize) -> Rank {
        assert!(i < self.len(), "index {i} outside partition of {}", self.len());
        // first offset strictly greater than i, minus one
        self.offsets.partition_point(|&o| o <= i) - 1
    }

    pub fn offsets(&self) -> &[usize] {
        &self.offsets
    }
}

/// Dense vector distributed over the ranks of a partition.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DistVec<T> {
    part: Partition,
    pieces: Vec<Vec<T>>,
}

impl<T: Clone> DistVec<T> {
    pub fn from_global(values: &[T], part: Partition) -> Self {
        assert_eq!(values.len(), part.len());
        let pieces = (0..part.parts()).map(|r| values[part.range(r)].to_vec()).collect();
        DistVec { part, pieces }
    }

    pub fn filled(value: T, part: Partition) -> Self {
        let pieces = (0..part.parts()).map(|r| vec![value.clone(); part.size(r)]).collect();
        DistVec { part, pieces }
    }

    /// Reassembles the full vector (inspection and output only).
    pub fn gather(&self) -> Vec<T> {
        self.pieces.concat()
    }
}

impl<T> DistVec<T> {
    pub fn from_pieces(part: Partition, pieces: Vec<Vec<T>>) -> Self {
        assert_eq!(pieces.len(), part.parts());
        for (r, p) in pieces.iter().enumerate() {
            assert_eq!(p.len(), part.size(r), "piece {r} has the wrong length");
        }
        DistVec { part, pieces }
    }

    pub fn partition(&self) -> &Partition {
        &self.part
    }

    pub fn len(&self) -> usize {
        self.part.len()
    }

    pub fn is_empty(&self) -> bool {
        self.part.is_empty()
    }

    pub fn piece(&self, rank: Rank) -> &[T] {
        &self.pieces[rank]
    }

    pub fn piece_mut(&mut self, rank: Rank) -> &mut Vec<T> {
        &mut self.pieces[rank]
    }

    pub fn pieces(&self) -> &[Vec<T>] {
        &self.pieces
    }

    pub fn into_pieces(self) -> Vec<Vec<T>> {
        self.pieces
    }

    pub fn get(&self, i: usize) -> &T {
        let r = self.part.owner(i);
        &self.pieces[r][i - self.part.start(r)]
    }

    /// Element-wise map that keeps the distribution.
    pub fn map<U>(&self, mut f: impl FnMut(usize, &T) -> U) -> DistVec<U> {
        let pieces = self
            .pieces
            .iter()
            .enumerate()
            .map(|(r, p)| {
                let start = self.part.start(r);
                p.iter().enumerate().map(|(k, x)| f(start + k, x)).collect()
            })
            .collect();
        DistVec { part: self.part.clone(), pieces }
    }

    /// Global indices and values owned by `rank`.
    pub fn local_iter(&self, rank: Rank) -> impl Iterator<Item = (usize, &T)> {
        let start = self.part.start(rank);
        self.pieces[rank].iter().enumerate().map(move |(k, x)| (start + k, x))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn balanced_sizes_differ_by_at_most_one() {
        for n in 0..40 {
            for parts in 1..9 {
                let p = Partition::balanced(n, parts);
                let sizes: Vec<_> = (0..parts).map(|r| p.size(r)).collect();
                let max = *sizes.iter().max().unwrap();
                let min = *sizes.iter().min().unwrap();
                assert!(max - min <= 1);
                assert_eq!(p.len(), n);
                for i in 0..n {
                    assert!(p.range(p.owner(i)).contains(&i));
                }
            }
        }
    }

    #[test]
    fn grid_aligned_rows_cover_bands() {
        let side = 3;
        let n = 23;
        let p = Partition::grid_aligned(n, side);
        let bands = Partition::balanced(n, side);
        assert_eq!(p.parts(), side * side);
        for b in 0..side {
            let row = b * side..(b + 1) * side;
            assert_eq!(p.start(row.start), bands.start(b));
            assert_eq!(p.offsets()[row.end], bands.range(b).end);
        }
    }

    #[test]
    fn distvec_roundtrip() {
        let v: Vec<u32> = (0..17).collect();
        let d = DistVec::from_global(&v, Partition::grid_aligned(17, 2));
        assert_eq!(d.gather(), v);
        assert_eq!(*d.get(11), 11);
    }
}
