use std::collections::BTreeSet;

use contigforge::gridsim::{Grid, Partition};
use contigforge::overlap::{align_filter, candidate_overlaps, kmer_matrix, prune_contained, OverlapHit};
use contigforge::pipeline::synth_genome;
use contigforge::seqstore::{reverse_complement, ReadStore};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Reads of random length and strand from a random genome.
fn sample(genome: &[u8], n: usize, lens: std::ops::RangeInclusive<usize>, seed: u64) -> ReadStore {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let seqs: Vec<Vec<u8>> = (0..n)
        .map(|_| {
            let len = rng.gen_range(lens.clone());
            let start = rng.gen_range(0..=genome.len() - len);
            let piece = &genome[start..start + len];
            if rng.gen_bool(0.5) {
                reverse_complement(piece).unwrap()
            } else {
                piece.to_vec()
            }
        })
        .collect();
    ReadStore::from_seqs(&seqs).unwrap()
}

/// Longest ungapped exact overlap between `a` and `b` on one diagonal; every
/// full diagonal overlap runs into an end of both reads.
fn longest_diagonal_overlap(a: &[u8], b: &[u8]) -> usize {
    let (la, lb) = (a.len() as isize, b.len() as isize);
    let mut best = 0;
    for d in -(lb - 1)..la {
        let (lo, hi) = (d.max(0), la.min(d + lb));
        if (lo..hi).all(|i| a[i as usize] == b[(i - d) as usize]) {
            best = best.max((hi - lo) as usize);
        }
    }
    best
}

fn overlaps_brute_force(store: &ReadStore, t: usize) -> BTreeSet<(usize, usize)> {
    let mut out = BTreeSet::new();
    for u in 0..store.len() {
        for v in u + 1..store.len() {
            let (a, b) = (store.seq(u).unwrap(), store.seq(v).unwrap());
            let best = longest_diagonal_overlap(a, b).max(longest_diagonal_overlap(a, &reverse_complement(b).unwrap()));
            if best >= t {
                out.insert((u, v));
            }
        }
    }
    out
}

fn contained_brute_force(store: &ReadStore) -> Vec<usize> {
    let inside = |small: &[u8], big: &[u8]| big.windows(small.len()).any(|w| w == small);
    (0..store.len())
        .filter(|&u| {
            let a = store.seq(u).unwrap();
            (0..store.len()).any(|v| {
                let b = store.seq(v).unwrap();
                let fits = inside(a, b) || inside(a, &reverse_complement(b).unwrap());
                v != u && fits && (a.len() < b.len() || u > v)
            })
        })
        .collect()
}

fn hits(store: &ReadStore, grid: &mut Grid, k: usize, t: usize) -> contigforge::spmat::DistSparseMatrix<OverlapHit> {
    let pieces = store.sorted().split(&Partition::grid_aligned(store.len(), grid.side()));
    let index = kmer_matrix(grid, &pieces, store.len(), k, 10_000).unwrap();
    let c = candidate_overlaps(grid, &index).unwrap();
    align_filter(grid, &c, &pieces, k, t).unwrap()
}

#[test]
fn detected_overlaps_equal_brute_force() {
    for (seed, p) in [(1u64, 1usize), (2, 4), (3, 9), (4, 16)] {
        let genome = synth_genome(900, seed);
        let store = sample(&genome, 60, 100..=100, seed);
        let mut grid = Grid::new(p).unwrap();
        let r = hits(&store, &mut grid, 15, 40).gather();
        let found: BTreeSet<(usize, usize)> = r.iter().filter(|(u, v, _)| u < v).map(|(u, v, _)| (u, v)).collect();
        let both: BTreeSet<(usize, usize)> = r.iter().map(|(u, v, _)| (u.min(v), u.max(v))).collect();
        assert!(found.len() > 100, "only {} overlaps", found.len());
        assert_eq!(found, both, "R is not symmetric");
        assert_eq!(found, overlaps_brute_force(&store, 40), "seed {seed}, P = {p}");
    }
}

#[test]
fn containment_mask_equals_brute_force() {
    for (seed, p) in [(5u64, 1usize), (6, 4), (7, 9)] {
        let genome = synth_genome(1200, seed);
        let store = sample(&genome, 70, 50..=160, seed);
        let mut grid = Grid::new(p).unwrap();
        let r = hits(&store, &mut grid, 11, 30);
        let (_, masked) = prune_contained(&mut grid, &r).unwrap();
        assert!(masked.len() > 10, "only {} contained", masked.len());
        assert_eq!(masked, contained_brute_force(&store), "seed {seed}, P = {p}");
    }
}

#[test]
fn duplicate_reads_keep_the_lower_id() {
    let genome = synth_genome(400, 8);
    let piece = &genome[100..250];
    let store = ReadStore::from_seqs(&[piece.to_vec(), reverse_complement(piece).unwrap(), piece.to_vec()]).unwrap();
    let mut grid = Grid::new(4).unwrap();
    let r = hits(&store, &mut grid, 15, 40);
    assert_eq!(prune_contained(&mut grid, &r).unwrap().1, vec![1, 2]);
}
