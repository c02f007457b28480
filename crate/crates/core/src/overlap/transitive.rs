use super::OverlapError;
use crate::gridsim::Grid;
use crate::spmat::{spgemm, Direction, DistSparseMatrix, EdgeLabel, LocalSparse, ProductIndex, Semiring};

pub const DEFAULT_FUZZ: u32 = 10;
pub const DEFAULT_MAX_ROUNDS: usize = 64;

/// Shortest two-hop overhang per walk direction, indexed by direction code.
pub type TwoHop = [Option<u32>; 4];

/// `R * R` restricted to valid bidirected walks `i -> j -> k` (the walk must
/// leave `j` in the orientation it entered) with `i != k`; values are
/// overhang sums, combined by minimum.
pub struct ValidWalks;

impl Semiring for ValidWalks {
    type Left = EdgeLabel;
    type Right = EdgeLabel;
    type Out = TwoHop;

    fn multiply(&self, a: &EdgeLabel, b: &EdgeLabel, _at: ProductIndex) -> TwoHop {
        let mut out = [None; 4];
        let dir = Direction::from_orientations(a.direction.src(), b.direction.dst());
        out[dir.code() as usize] = Some(a.overhang + b.overhang);
        out
    }

    fn add(&self, acc: &mut TwoHop, x: TwoHop) {
        for (slot, v) in acc.iter_mut().zip(x) {
            *slot = match (*slot, v) {
                (Some(a), Some(b)) => Some(a.min(b)),
                (a, b) => a.or(b),
            };
        }
    }

    fn filter(&self, a: &EdgeLabel, b: &EdgeLabel, at: ProductIndex) -> bool {
        at.row != at.col && a.direction.dst() == b.direction.src()
    }
}

fn is_transitive(label: &EdgeLabel, two_hop: Option<&TwoHop>, fuzz: u32) -> bool {
    two_hop
        .and_then(|h| h[label.direction.code() as usize])
        .is_some_and(|sum| sum <= label.overhang + fuzz)
}

/// Removes transitive edges until none is left. Each round marks every edge
/// `(i, k)` that has a valid walk `i -> j -> k` whose overhangs sum to at most
/// `w(i, k) + fuzz`, adds the mirrored marks so the matrix stays symmetric,
/// and drops them.
pub fn transitive_reduction(
    grid: &mut Grid,
    r: &DistSparseMatrix<EdgeLabel>,
    fuzz: u32,
    max_rounds: usize,
) -> Result<DistSparseMatrix<EdgeLabel>, OverlapError> {
    let mut s = r.clone();
    for _ in 0..max_rounds {
        let n = spgemm(grid, &s, &s, &ValidWalks)?;
        let marks = s.zip_with(&n, |_, _, label, hop| is_transitive(label, hop, fuzz).then_some(true))?;
        let counts: Vec<u64> = (0..grid.size()).map(|rank| marks.block_storage(rank).nnz() as u64).collect();
        let total = grid.allreduce_sum(&counts)?;
        if total == 0 {
            return Ok(s);
        }
        let mirrored = marks.transpose(grid)?;
        s = s.zip_with(&marks, |_, _, l, m| m.is_none().then_some(*l))?;
        s = s.zip_with(&mirrored, |_, _, l, m| m.is_none().then_some(*l))?;
    }
    Err(OverlapError::NonConvergence { rounds: max_rounds })
}

/// Single-process transitive reduction with an explicit triple loop over
/// valid walks; same rounds and FUZZ as the distributed version.
pub fn transitive_reduction_reference(
    r: &LocalSparse<EdgeLabel>,
    fuzz: u32,
    max_rounds: usize,
) -> Result<LocalSparse<EdgeLabel>, OverlapError> {
    let n = r.n_rows();
    let mut s = r.clone();
    for _ in 0..max_rounds {
        let mut out: Vec<Vec<(usize, EdgeLabel)>> = vec![Vec::new(); n];
        for (i, k, l) in s.iter() {
            out[i].push((k, *l));
        }
        let mut marked = std::collections::BTreeSet::new();
        for i in 0..n {
            for &(k, ik) in &out[i] {
                let hit = out[i].iter().any(|&(j, ij)| {
                    out[j].iter().any(|&(kk, jk)| {
                        kk == k
                            && ij.direction.dst() == jk.direction.src()
                            && Direction::from_orientations(ij.direction.src(), jk.direction.dst()) == ik.direction
                            && ij.overhang + jk.overhang <= ik.overhang + fuzz
                    })
                });
                if hit {
                    marked.insert((i, k));
                    marked.insert((k, i));
                }
            }
        }
        if marked.is_empty() {
            return Ok(s);
        }
        s = s.retain(|i, k, _| !marked.contains(&(i, k)));
    }
    Err(OverlapError::NonConvergence { rounds: max_rounds })
}
