use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use super::OverlapError;
use crate::gridsim::{alltoall_items, DistVec, Grid, Partition, Rank};
use crate::seqstore::{ReadId, ReadStore};
use crate::spmat::{DistSparseMatrix, Mirror};

pub const MAX_K: usize = 31;

/// 2-bit code of a base (`A=0 C=1 G=2 T=3`).
#[inline]
pub fn base_code(b: u8) -> u64 {
    match b {
        b'A' => 0,
        b'C' => 1,
        b'G' => 2,
        b'T' => 3,
        _ => unreachable!("read stores hold ACGT only"),
    }
}

pub fn decode_kmer(code: u64, k: usize) -> String {
    (0..k)
        .rev()
        .map(|i| b"ACGT"[((code >> (2 * i)) & 3) as usize] as char)
        .collect()
}

/// Canonical k-mers of `seq` as `(position, code, reverse)`; `reverse` is set
/// when the read holds the reverse complement of the canonical k-mer.
pub fn canonical_kmers(seq: &[u8], k: usize) -> Vec<(u32, u64, bool)> {
    if k == 0 || seq.len() < k {
        return Vec::new();
    }
    let mask = if k == 32 { u64::MAX } else { (1u64 << (2 * k)) - 1 };
    let shift = 2 * (k - 1);
    let (mut fwd, mut rev) = (0u64, 0u64);
    let mut out = Vec::with_capacity(seq.len() - k + 1);
    for (i, &b) in seq.iter().enumerate() {
        let c = base_code(b);
        fwd = ((fwd << 2) | c) & mask;
        rev = (rev >> 2) | ((3 - c) << shift);
        if i + 1 >= k {
            let pos = (i + 1 - k) as u32;
            if fwd <= rev {
                out.push((pos, fwd, false));
            } else {
                out.push((pos, rev, true));
            }
        }
    }
    out
}

/// A canonical k-mer inside one read: its first position, the strand there,
/// and how often it occurs in the read.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct KmerOcc {
    pub pos: u32,
    pub rev: bool,
    pub count: u32,
}

impl KmerOcc {
    pub fn first(&self) -> (u32, bool) {
        (self.pos, self.rev)
    }

    fn absorb(&mut self, other: KmerOcc) {
        if (other.pos, other.rev) < (self.pos, self.rev) {
            self.pos = other.pos;
            self.rev = other.rev;
        }
        self.count += other.count;
    }
}

impl Mirror for KmerOcc {
    fn mirror(&self) -> Self {
        *self
    }
}

/// Reads x k-mers presence matrix and its column dictionary.
#[derive(Clone, Debug)]
pub struct KmerIndex {
    pub k: usize,
    /// Canonical code of every column, ascending (column id = lexicographic rank).
    pub columns: DistVec<u64>,
    pub a: DistSparseMatrix<KmerOcc>,
}

impl KmerIndex {
    pub fn n_kmers(&self) -> usize {
        self.columns.len()
    }

    pub fn column_of(&self, code: u64) -> Option<usize> {
        self.columns.gather().binary_search(&code).ok()
    }
}

/// Owner rank of a k-mer code under a range partition of the code space.
#[inline]
pub fn kmer_owner(code: u64, k: usize, p: usize) -> Rank {
    ((code as u128 * p as u128) >> (2 * k)) as Rank
}

/// Builds A from reads held on each rank. Occurrences are routed to the rank
/// owning the k-mer's code range, counted there, filtered by read frequency,
/// numbered in code order and shipped to A's blocks.
pub fn kmer_matrix(
    grid: &mut Grid,
    pieces: &[ReadStore],
    n_reads: usize,
    k: usize,
    max_kmer_freq: usize,
) -> Result<KmerIndex, OverlapError> {
    if k == 0 || k.is_multiple_of(2) {
        return Err(OverlapError::InvalidK(k));
    }
    if k > MAX_K {
        return Err(OverlapError::KTooLarge { k, limit: MAX_K });
    }
    let p = grid.size();
    let mut outboxes: Vec<BTreeMap<Rank, Vec<(u64, u64, u32, bool)>>> = vec![BTreeMap::new(); p];
    for (rank, piece) in pieces.iter().enumerate() {
        for (id, seq) in piece.iter() {
            if seq.len() < k {
                return Err(OverlapError::KTooLarge { k, limit: seq.len() });
            }
            for (pos, code, rev) in canonical_kmers(seq, k) {
                outboxes[rank].entry(kmer_owner(code, k, p)).or_default().push((code, id as u64, pos, rev));
            }
        }
    }
    let inboxes = alltoall_items(grid, outboxes)?;

    // Per owner: (code, [(read, occurrence)]) in code order, frequency-filtered.
    let mut kept: Vec<Vec<(u64, Vec<(ReadId, KmerOcc)>)>> = Vec::with_capacity(p);
    for inbox in inboxes {
        let mut items: Vec<(u64, u64, u32, bool)> = inbox.into_iter().flat_map(|(_, items)| items).collect();
        items.sort_unstable();
        let mut list: Vec<(u64, Vec<(ReadId, KmerOcc)>)> = Vec::new();
        for (code, id, pos, rev) in items {
            let occ = KmerOcc { pos, rev, count: 1 };
            match list.last_mut() {
                Some((c, reads)) if *c == code => match reads.last_mut() {
                    Some((r, o)) if *r == id as ReadId => o.absorb(occ),
                    _ => reads.push((id as ReadId, occ)),
                },
                _ => list.push((code, vec![(id as ReadId, occ)])),
            }
        }
        list.retain(|(_, reads)| reads.len() <= max_kmer_freq);
        kept.push(list);
    }
    let counts: Vec<u64> = kept.iter().map(|v| v.len() as u64).collect();
    let all_counts = grid.allgather_u64(&counts)?;
    let mut offsets = vec![0usize];
    for c in &all_counts {
        offsets.push(offsets.last().unwrap() + *c as usize);
    }
    let n_kmers = *offsets.last().unwrap();

    let mut triplets: Vec<Vec<(usize, usize, KmerOcc)>> = Vec::with_capacity(p);
    let mut columns = Vec::with_capacity(p);
    for (rank, list) in kept.into_iter().enumerate() {
        let mut t = Vec::new();
        let mut codes = Vec::with_capacity(list.len());
        for (i, (code, reads)) in list.into_iter().enumerate() {
            let col = offsets[rank] + i;
            codes.push(code);
            t.extend(reads.into_iter().map(|(read, occ)| (read, col, occ)));
        }
        triplets.push(t);
        columns.push(codes);
    }
    let a = DistSparseMatrix::redistribute(grid, n_reads, n_kmers, triplets, |acc: &mut KmerOcc, x| acc.absorb(x))?;
    Ok(KmerIndex { k, columns: DistVec::from_pieces(Partition::from_offsets(offsets), columns), a })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn canonical_forms_by_hand() {
        let ks = canonical_kmers(b"ACGTA", 3);
        let named: Vec<_> = ks.iter().map(|&(p, c, r)| (p, decode_kmer(c, 3), r)).collect();
        assert_eq!(
            named,
            vec![(0, "ACG".to_string(), false), (1, "ACG".to_string(), true), (2, "GTA".to_string(), false)]
        );
    }

    #[test]
    fn one_read_index() {
        let mut grid = Grid::new(1).unwrap();
        let store = ReadStore::from_seqs(&["ACGTA"]).unwrap();
        let idx = kmer_matrix(&mut grid, &[store], 1, 3, 8).unwrap();
        assert_eq!(idx.n_kmers(), 2);
        assert_eq!(idx.column_of(0b00_01_10), Some(0));
        let a = idx.a.gather();
        assert_eq!(a.get(0, 0), Some(&KmerOcc { pos: 0, rev: false, count: 2 }));
        assert_eq!(a.get(0, 1), Some(&KmerOcc { pos: 2, rev: false, count: 1 }));
    }

    #[test]
    fn k_validation() {
        let mut grid = Grid::new(1).unwrap();
        let store = ReadStore::from_seqs(&["ACG"]).unwrap();
        assert!(matches!(kmer_matrix(&mut grid, std::slice::from_ref(&store), 1, 5, 8), Err(OverlapError::KTooLarge { .. })));
        assert!(matches!(kmer_matrix(&mut grid, std::slice::from_ref(&store), 1, 2, 8), Err(OverlapError::InvalidK(2))));
        assert!(matches!(kmer_matrix(&mut grid, &[store], 1, 33, 8), Err(OverlapError::KTooLarge { .. })));
    }

    #[test]
    fn identical_reads_have_identical_rows() {
        let mut grid = Grid::new(4).unwrap();
        let store = ReadStore::from_seqs(&["ACGTTGCA", "ACGTTGCA", "TTTTT"]).unwrap();
        let pieces = store.split(&Partition::grid_aligned(3, 2));
        let a = kmer_matrix(&mut grid, &pieces, 3, 3, 8).unwrap().a.gather();
        let row = |r: usize| a.iter().filter(|e| e.0 == r).map(|(_, c, v)| (c, *v)).collect::<Vec<_>>();
        assert_eq!(row(0), row(1));
        assert!(!row(2).is_empty());
    }

    #[test]
    fn frequency_filter_drops_repetitive_kmers() {
        let mut grid = Grid::new(1).unwrap();
        let store = ReadStore::from_seqs(&["AAAAA", "AAAAA", "AAAAC"]).unwrap();
        let idx = kmer_matrix(&mut grid, &[store], 3, 3, 2).unwrap();
        let names: Vec<_> = idx.columns.gather().iter().map(|&c| decode_kmer(c, 3)).collect();
        assert_eq!(names, vec!["AAC"]);
    }
}
