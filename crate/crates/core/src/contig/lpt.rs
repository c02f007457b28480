use std::cmp::Reverse;
use std::collections::BinaryHeap;

use super::ContigError;
use crate::gridsim::{decode, encode, DistVec, Grid, Rank};

/// Longest-processing-time greedy partitioning. Contigs are taken by
/// `(size desc, id asc)` and each goes to the least-loaded rank, lowest rank on
/// ties. Returns the rank of every contig.
pub fn lpt_partition(sizes: &[u64], p: usize) -> Vec<Rank> {
    assert!(p >= 1, "at least one rank");
    let mut order: Vec<usize> = (0..sizes.len()).collect();
    order.sort_by_key(|&c| (Reverse(sizes[c]), c));
    let mut heap: BinaryHeap<Reverse<(u64, Rank)>> = (0..p).map(|r| Reverse((0, r))).collect();
    let mut par = vec![0; sizes.len()];
    for c in order {
        let Reverse((load, r)) = heap.pop().expect("heap holds one entry per rank");
        par[c] = r;
        heap.push(Reverse((load + sizes[c], r)));
    }
    par
}

/// Total size assigned to each rank.
pub fn rank_loads(sizes: &[u64], par: &[Rank], p: usize) -> Vec<u64> {
    let mut loads = vec![0; p];
    for (&s, &r) in sizes.iter().zip(par) {
        loads[r] += s;
    }
    loads
}

/// Smallest achievable makespan, by depth-first branch and bound.
pub fn optimal_makespan(sizes: &[u64], p: usize) -> u64 {
    let mut items = sizes.to_vec();
    items.sort_unstable_by(|a, b| b.cmp(a));
    let total: u64 = items.iter().sum();
    let lower = items.first().copied().unwrap_or(0).max(total.div_ceil(p as u64));
    let mut best = rank_loads(&items, &lpt_partition(&items, p), p).into_iter().max().unwrap_or(0);
    let mut loads = vec![0u64; p];
    fn go(i: usize, items: &[u64], loads: &mut [u64], best: &mut u64, lower: u64) {
        if *best == lower {
            return;
        }
        if i == items.len() {
            *best = (*best).min(loads.iter().copied().max().unwrap_or(0));
            return;
        }
        for r in 0..loads.len() {
            // ranks with equal load are interchangeable
            if loads[..r].contains(&loads[r]) || loads[r] + items[i] >= *best {
                continue;
            }
            loads[r] += items[i];
            go(i + 1, items, loads, best, lower);
            loads[r] -= items[i];
        }
    }
    go(0, &items, &mut loads, &mut best, lower);
    best
}

/// LPT run on one rank: sizes are gathered to rank 0, partitioned there and
/// the assignment is broadcast to every rank.
pub fn lpt_distributed(grid: &mut Grid, sizes: &DistVec<u64>) -> Result<Vec<Rank>, ContigError> {
    let p = grid.size();
    let gathered = grid.gather(0, (0..p).map(|r| encode(sizes.piece(r))).collect())?;
    let all: Vec<u64> = gathered.iter().flat_map(|b| decode::<Vec<u64>>(b)).collect();
    let par: Vec<u64> = lpt_partition(&all, p).into_iter().map(|r| r as u64).collect();
    let bytes = grid.broadcast(0, &encode(&par))?;
    Ok(decode::<Vec<u64>>(&bytes).into_iter().map(|r| r as Rank).collect())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn brute_force(sizes: &[u64], p: usize) -> u64 {
        let n = sizes.len();
        let mut best = u64::MAX;
        for code in 0..p.pow(n as u32) {
            let mut loads = vec![0; p];
            let mut c = code;
            for &s in sizes {
                loads[c % p] += s;
                c /= p;
            }
            best = best.min(*loads.iter().max().unwrap());
        }
        best
    }

    #[test]
    fn two_rank_example() {
        let sizes = [4, 3, 3, 2, 2];
        let par = lpt_partition(&sizes, 2);
        assert_eq!(par, vec![0, 1, 1, 0, 0]);
        assert_eq!(rank_loads(&sizes, &par, 2), vec![8, 6]);
        assert_eq!(brute_force(&sizes, 2), 7);
        assert_eq!(optimal_makespan(&sizes, 2), 7);
    }

    #[test]
    fn trivial_shapes() {
        assert_eq!(rank_loads(&[9], &lpt_partition(&[9], 4), 4), vec![9, 0, 0, 0]);
        assert_eq!(rank_loads(&[1, 2, 3], &lpt_partition(&[1, 2, 3], 1), 1), vec![6]);
        assert!(lpt_partition(&[], 3).is_empty());
    }

    #[test]
    fn branch_and_bound_matches_enumeration() {
        let sizes = [7, 5, 5, 4, 3, 3, 2, 1];
        for p in 2..=4 {
            assert_eq!(optimal_makespan(&sizes, p), brute_force(&sizes, p));
        }
    }

    #[test]
    fn distributed_broadcast_matches_sequential() {
        let mut grid = Grid::new(4).unwrap();
        let sizes = [5, 1, 8, 2, 2, 9, 4];
        let d = DistVec::from_global(&sizes, crate::gridsim::Partition::balanced(7, 4));
        assert_eq!(lpt_distributed(&mut grid, &d).unwrap(), lpt_partition(&sizes, 4));
    }
}
