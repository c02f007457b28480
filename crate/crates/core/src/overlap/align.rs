use serde::{Deserialize, Serialize};

use super::kmer::{KmerIndex, KmerOcc};
use super::OverlapError;
use crate::gridsim::{band_exchange, DistVec, Grid, Partition};
use crate::seqstore::{ReadId, ReadStore};
use crate::spmat::{
    spgemm, DistSparseMatrix, Direction, EdgeLabel, Mirror, Orientation, ProductIndex, Semiring,
};

/// Payload of C(u, v): number of shared k-mers and one seed.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct OverlapCandidate {
    pub count: u32,
    /// Column of the seed k-mer.
    pub kmer: usize,
    pub pos_u: u32,
    pub pos_v: u32,
    /// Whether both reads hold the seed k-mer on the same strand.
    pub same_strand: bool,
}

impl OverlapCandidate {
    fn seed_key(&self) -> (usize, u32, u32) {
        (self.kmer, self.pos_u, self.pos_v)
    }
}

impl Mirror for OverlapCandidate {
    fn mirror(&self) -> Self {
        OverlapCandidate { pos_u: self.pos_v, pos_v: self.pos_u, ..*self }
    }
}

/// `A * A^T` over shared k-mers: counts them and keeps the seed with the
/// smallest `(column, pos_u, pos_v)`. Diagonal products are filtered out.
pub struct SharedKmers;

impl Semiring for SharedKmers {
    type Left = KmerOcc;
    type Right = KmerOcc;
    type Out = OverlapCandidate;

    fn multiply(&self, a: &KmerOcc, b: &KmerOcc, at: ProductIndex) -> OverlapCandidate {
        let (pos_u, rev_u) = a.first();
        let (pos_v, rev_v) = b.first();
        OverlapCandidate { count: 1, kmer: at.inner, pos_u, pos_v, same_strand: rev_u == rev_v }
    }

    fn add(&self, acc: &mut OverlapCandidate, x: OverlapCandidate) {
        let count = acc.count + x.count;
        if x.seed_key() < acc.seed_key() {
            *acc = x;
        }
        acc.count = count;
    }

    fn filter(&self, _a: &KmerOcc, _b: &KmerOcc, at: ProductIndex) -> bool {
        at.row != at.col
    }
}

pub fn candidate_overlaps(grid: &mut Grid, index: &KmerIndex) -> Result<DistSparseMatrix<OverlapCandidate>, OverlapError> {
    let at = index.a.transpose(grid)?;
    Ok(spgemm(grid, &index.a, &at, &SharedKmers)?)
}

/// Surviving nonzero of R.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum OverlapHit {
    Dovetail(EdgeLabel),
    /// The row read contains the column read.
    Contains,
    /// The row read lies inside the column read.
    ContainedIn,
}

impl Mirror for OverlapHit {
    fn mirror(&self) -> Self {
        match self {
            OverlapHit::Dovetail(l) => OverlapHit::Dovetail(l.mirror()),
            OverlapHit::Contains => OverlapHit::ContainedIn,
            OverlapHit::ContainedIn => OverlapHit::Contains,
        }
    }
}

#[inline]
fn oriented(s: &[u8], o: Orientation, i: usize) -> u8 {
    match o {
        Orientation::Forward => s[i],
        Orientation::Reverse => match s[s.len() - 1 - i] {
            b'A' => b'T',
            b'C' => b'G',
            b'G' => b'C',
            _ => b'A',
        },
    }
}

/// Walk index of a stored index (and back: the map is an involution).
#[inline]
fn flip_index(len: usize, o: Orientation, i: usize) -> usize {
    match o {
        Orientation::Forward => i,
        Orientation::Reverse => len - 1 - i,
    }
}

/// Scores one candidate by exact extension of its seed. `u` and `v` are the
/// row and column reads; the result is the payload of R(u, v).
///
/// The seed is extended to the maximal exact match on its diagonal. The pair
/// survives only if the match runs into an end of both reads on each side
/// (a suffix-prefix overlap or a containment) and is at least `t` long. An
/// edge is split at the seed: `pre` is the base before the seed in the source
/// walk, `post` is the seed's first base in the destination walk.
pub fn align_pair(
    id_u: ReadId,
    su: &[u8],
    id_v: ReadId,
    sv: &[u8],
    cand: &OverlapCandidate,
    k: usize,
    t: usize,
) -> Option<OverlapHit> {
    let (lu, lv) = (su.len(), sv.len());
    let ov = if cand.same_strand { Orientation::Forward } else { Orientation::Reverse };
    // Frame with u forward and v in orientation `ov`; seed start in walk coordinates.
    let (pu, pv) = (cand.pos_u as usize, cand.pos_v as usize);
    if pu + k > lu || pv + k > lv {
        return None;
    }
    let wu = pu;
    let wv = match ov {
        Orientation::Forward => pv,
        Orientation::Reverse => lv - pv - k,
    };
    let fwd = Orientation::Forward;
    if (0..k).any(|x| su[wu + x] != oriented(sv, ov, wv + x)) {
        return None;
    }
    let mut left = 0;
    while left < wu.min(wv) && oriented(su, fwd, wu - left - 1) == oriented(sv, ov, wv - left - 1) {
        left += 1;
    }
    let mut right = 0;
    while wu + k + right < lu && wv + k + right < lv && su[wu + k + right] == oriented(sv, ov, wv + k + right) {
        right += 1;
    }
    let (au, av) = (wu - left, wv - left);
    let (bu, bv) = (wu + k - 1 + right, wv + k - 1 + right);
    if !(au == 0 || av == 0) || !(bu == lu - 1 || bv == lv - 1) {
        return None;
    }
    let len = bu - au + 1;
    if len < t {
        return None;
    }
    let u_inside = au == 0 && bu == lu - 1;
    let v_inside = av == 0 && bv == lv - 1;
    if u_inside && v_inside {
        return Some(if id_u > id_v { OverlapHit::ContainedIn } else { OverlapHit::Contains });
    }
    if u_inside {
        return Some(OverlapHit::ContainedIn);
    }
    if v_inside {
        return Some(OverlapHit::Contains);
    }
    // u precedes v when the overlap covers u's end; otherwise walk both flipped.
    let (o_u, o_v, s_u, s_v) = if bu == lu - 1 {
        (fwd, ov, wu, wv)
    } else {
        (Orientation::Reverse, ov.flip(), lu - wu - k, lv - wv - k)
    };
    Some(OverlapHit::Dovetail(EdgeLabel {
        direction: Direction::from_orientations(o_u, o_v),
        overhang: (lv - len) as u32,
        src_overhang: (lu - len) as u32,
        pre: flip_index(lu, o_u, s_u - 1) as u32,
        post: flip_index(lv, o_v, s_v) as u32,
    }))
}

/// Grid-aligned read pieces as sequences, ordered by id inside each piece.
pub(crate) fn band_reads(grid: &mut Grid, pieces: &[ReadStore]) -> Result<Vec<crate::gridsim::BandView<Vec<u8>>>, OverlapError> {
    let items: Vec<Vec<Vec<u8>>> = pieces
        .iter()
        .map(|p| p.sorted().iter().map(|(_, s)| s.to_vec()).collect())
        .collect();
    Ok(band_exchange(grid, &items)?)
}

/// Keeps the candidates that are exact overlaps of at least `t` bases.
///
/// Reads are grid-aligned over ranks; a row-band allgather plus a transpose
/// gives every block the reads of its row and column bands. Each pair is
/// scored from its lower id and mirrored for the other orientation, so both
/// entries are consistent.
pub fn align_filter(
    grid: &mut Grid,
    c: &DistSparseMatrix<OverlapCandidate>,
    pieces: &[ReadStore],
    k: usize,
    t: usize,
) -> Result<DistSparseMatrix<OverlapHit>, OverlapError> {
    let views = band_reads(grid, pieces)?;
    let topo = c.topology();
    let mut r = DistSparseMatrix::empty(topo, c.n_rows(), c.n_cols());
    for (rank, view) in views.iter().enumerate() {
        let (i, j) = topo.coords(rank);
        let (r0, c0) = (c.row_bands().start(i), c.col_bands().start(j));
        let block = c.block(rank).filter_map(|lr, lc, cand| {
            let (u, v) = (r0 + lr, c0 + lc);
            let (su, sv) = (&view.row[lr], &view.col[lc]);
            if u < v {
                align_pair(u, su, v, sv, cand, k, t)
            } else {
                align_pair(v, sv, u, su, &cand.mirror(), k, t).map(|h| h.mirror())
            }
        });
        r.set_block(rank, block);
    }
    Ok(r)
}

/// Masks every read that lies inside another one, then keeps the dovetail
/// labels. Vertex indexing is unchanged.
pub fn prune_contained(grid: &mut Grid, r: &DistSparseMatrix<OverlapHit>) -> Result<(DistSparseMatrix<EdgeLabel>, Vec<ReadId>), OverlapError> {
    let n = r.n_rows();
    let partials: Vec<Vec<u64>> = (0..grid.size())
        .map(|rank| {
            let mut flags = vec![0u64; n];
            for (u, _, hit) in r.block_triplets(rank) {
                if hit == OverlapHit::ContainedIn {
                    flags[u] = 1;
                }
            }
            flags
        })
        .collect();
    let part = Partition::grid_aligned(n, grid.side());
    let owned = grid.reduce_scatter(&partials, &part)?;
    let kill = DistVec::from_pieces(part, owned.into_iter().map(|v| v.into_iter().map(|c| c > 0).collect()).collect());
    let masked: Vec<ReadId> = kill.gather().iter().enumerate().filter(|(_, &k)| k).map(|(i, _)| i).collect();
    let pruned = r.prune_rows_cols(grid, &kill)?;
    let labels = pruned.filter_map(|_, _, hit| match hit {
        OverlapHit::Dovetail(l) => Some(*l),
        _ => None,
    });
    Ok((labels, masked))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cand(pos_u: u32, pos_v: u32, same_strand: bool) -> OverlapCandidate {
        OverlapCandidate { count: 1, kmer: 0, pos_u, pos_v, same_strand }
    }

    fn label(hit: Option<OverlapHit>) -> EdgeLabel {
        match hit {
            Some(OverlapHit::Dovetail(l)) => l,
            other => panic!("expected dovetail, got {other:?}"),
        }
    }

    #[test]
    fn three_read_splits() {
        let l = label(align_pair(0, b"AGAACT", 1, b"AACTGAAG", &cand(2, 0, true), 3, 4));
        assert_eq!((l.direction, l.pre, l.post, l.overhang, l.src_overhang), (Direction::Forward, 1, 0, 4, 2));
        let l = label(align_pair(1, b"AACTGAAG", 2, b"TGAAGAA", &cand(5, 2, true), 3, 5));
        assert_eq!((l.direction, l.pre, l.post, l.overhang), (Direction::Forward, 4, 2, 2));
    }

    #[test]
    fn threshold_prunes_short_overlap() {
        // AACT/ACTG share 3 bases
        assert!(align_pair(0, b"GGAACT", 1, b"ACTGGG", &cand(3, 0, true), 3, 4).is_none());
        assert!(align_pair(0, b"GGAACT", 1, b"ACTGGG", &cand(3, 0, true), 3, 3).is_some());
    }

    #[test]
    fn reverse_strand_overlap() {
        // l0 = AGAACT overlaps rc(l1) where rc(l1) = AACTGAAG
        let l1 = b"CTTCAGTT";
        let hit = label(align_pair(0, b"AGAACT", 1, l1, &cand(2, 5, false), 3, 4));
        assert_eq!(hit.direction, Direction::BothIn);
        assert_eq!((hit.pre, hit.post), (1, 7));
    }

    #[test]
    fn mirror_walks_the_other_way() {
        let direct = label(align_pair(0, b"AGAACT", 1, b"AACTGAAG", &cand(2, 0, true), 3, 4));
        let back = direct.mirror();
        assert_eq!(back.direction, Direction::Backward);
        assert_eq!((back.pre, back.post, back.overhang), (0, 1, 2));
    }

    #[test]
    fn containment_is_detected() {
        let hit = align_pair(0, b"AACT", 1, b"AGAACTG", &cand(0, 2, true), 3, 4);
        assert_eq!(hit, Some(OverlapHit::ContainedIn));
        let hit = align_pair(0, b"AGAACTG", 1, b"AACT", &cand(2, 0, true), 3, 4);
        assert_eq!(hit, Some(OverlapHit::Contains));
        let hit = align_pair(3, b"ACGTT", 5, b"ACGTT", &cand(0, 0, true), 3, 4);
        assert_eq!(hit, Some(OverlapHit::Contains));
    }

    #[test]
    fn mismatch_inside_is_rejected() {
        assert!(align_pair(0, b"AGACCTGAA", 1, b"AGATCTGAA", &cand(4, 4, true), 3, 3).is_none());
    }
}
