//! Deterministic virtual processor grid.
//!
//! Ranks are simulated inside one process. Every collective is one
//! barrier-aligned superstep: all per-rank inputs are supplied at once and all
//! outputs are returned at once, so nothing a rank computes can depend on the
//! host execution order. All network traffic goes through [`Comm::transmit`],
//! which chunks messages at `max_msg_bytes` and books them in the
//! [`CommLedger`].

mod ledger;
mod partition;

use std::collections::BTreeMap;
use std::ops::{Deref, DerefMut};

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::de::DeserializeOwned;
use serde::Serialize;
use thiserror::Error;

pub use ledger::{Collective, CommLedger, LedgerEntry, LinkCounts};
pub use partition::{DistVec, Partition};

pub type Rank = usize;

/// Default chunk limit; small so that chunking is exercised by ordinary runs.
pub const DEFAULT_MAX_MSG_BYTES: usize = 64 * 1024;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum GridError {
    #[error("grid of {0} ranks is not a perfect square")]
    NonSquareGrid(usize),
    #[error("a grid needs at least one rank")]
    ZeroRanks,
    #[error("partial vectors differ in length: expected {expected}, got {got}")]
    LengthMismatch { expected: usize, got: usize },
    #[error("expected {expected} per-rank inputs, got {got}")]
    WrongParticipantCount { expected: usize, got: usize },
    #[error("rank {0} does not exist")]
    InvalidRank(Rank),
    #[error("max_msg_bytes must be at least 1")]
    ZeroMessageLimit,
}

/// Square arrangement of `side * side` ranks in row-major order.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct GridTopology {
    p_total: usize,
    side: usize,
}

impl GridTopology {
    pub fn new(p_total: usize) -> Result<Self, GridError> {
        if p_total == 0 {
            return Err(GridError::ZeroRanks);
        }
        let side = isqrt(p_total);
        if side * side != p_total {
            return Err(GridError::NonSquareGrid(p_total));
        }
        Ok(GridTopology { p_total, side })
    }

    pub fn p_total(&self) -> usize {
        self.p_total
    }

    pub fn side(&self) -> usize {
        self.side
    }

    pub fn coords(&self, rank: Rank) -> (usize, usize) {
        debug_assert!(rank < self.p_total);
        (rank / self.side, rank % self.side)
    }

    pub fn rank(&self, row: usize, col: usize) -> Rank {
        debug_assert!(row < self.side && col < self.side);
        row * self.side + col
    }

    /// `P(j,i)` for `P(i,j)`.
    pub fn transpose_rank(&self, rank: Rank) -> Rank {
        let (i, j) = self.coords(rank);
        self.rank(j, i)
    }

    pub fn row_ranks(&self, row: usize) -> impl Iterator<Item = Rank> {
        let side = self.side;
        (0..side).map(move |c| row * side + c)
    }

    pub fn col_ranks(&self, col: usize) -> impl Iterator<Item = Rank> {
        let side = self.side;
        (0..side).map(move |r| r * side + col)
    }
}

fn isqrt(n: usize) -> usize {
    let mut s = (n as f64).sqrt() as usize;
    while s * s > n {
        s -= 1;
    }
    while (s + 1) * (s + 1) <= n {
        s += 1;
    }
    s
}

/// A world of `p` ranks with point-to-point accounting and the flat
/// collectives (all-to-all, reduce-scatter, gather, broadcast).
#[derive(Debug)]
pub struct Comm {
    p: usize,
    max_msg_bytes: usize,
    phase: String,
    ledger: CommLedger,
    schedule: ChaCha8Rng,
}

impl Comm {
    pub fn new(p: usize) -> Result<Self, GridError> {
        if p == 0 {
            return Err(GridError::ZeroRanks);
        }
        Ok(Comm {
            p,
            max_msg_bytes: DEFAULT_MAX_MSG_BYTES,
            phase: String::from("default"),
            ledger: CommLedger::default(),
            schedule: ChaCha8Rng::seed_from_u64(0),
        })
    }

    pub fn set_max_msg_bytes(&mut self, max: usize) -> Result<(), GridError> {
        if max == 0 {
            return Err(GridError::ZeroMessageLimit);
        }
        self.max_msg_bytes = max;
        Ok(())
    }

    /// Seed for the order in which ranks issue their sends inside a superstep.
    pub fn set_schedule_seed(&mut self, seed: u64) {
        self.schedule = ChaCha8Rng::seed_from_u64(seed);
    }

    pub fn size(&self) -> usize {
        self.p
    }

    pub fn max_msg_bytes(&self) -> usize {
        self.max_msg_bytes
    }

    /// Tags subsequent ledger entries.
    pub fn set_phase(&mut self, phase: &str) {
        self.phase = phase.to_string();
    }

    pub fn phase(&self) -> &str {
        &self.phase
    }

    pub fn ledger(&self) -> &CommLedger {
        &self.ledger
    }

    fn check_rank(&self, rank: Rank) -> Result<(), GridError> {
        if rank < self.p {
            Ok(())
        } else {
            Err(GridError::InvalidRank(rank))
        }
    }

    fn check_count(&self, got: usize) -> Result<(), GridError> {
        if got == self.p {
            Ok(())
        } else {
            Err(GridError::WrongParticipantCount { expected: self.p, got })
        }
    }

    fn send_order(&mut self) -> Vec<Rank> {
        let mut order: Vec<Rank> = (0..self.p).collect();
        order.shuffle(&mut self.schedule);
        order
    }

    /// Moves one message from `src` to `dst` and returns what `dst` receives.
    ///
    /// Self-sends are local copies and never touch the ledger. Empty payloads
    /// are not sent. Longer payloads are split into chunks of at most
    /// `max_msg_bytes`, each booked as one message, and reassembled.
    pub fn transmit(&mut self, op: Collective, src: Rank, dst: Rank, payload: &[u8]) -> Vec<u8> {
        if src == dst || payload.is_empty() {
            return payload.to_vec();
        }
        let mut received = Vec::with_capacity(payload.len());
        for chunk in payload.chunks(self.max_msg_bytes) {
            self.ledger
                .record_send(&self.phase, op, src, dst, chunk.len() as u64);
            received.extend_from_slice(chunk);
            self.ledger.record_delivery(chunk.len() as u64);
        }
        received
    }

    /// Personalized all-to-all. `outboxes[p][q]` is what rank `p` sends to
    /// rank `q`; the result `inboxes[q][p]` holds it. Empty messages are
    /// dropped on both sides.
    pub fn alltoall(
        &mut self,
        outboxes: Vec<BTreeMap<Rank, Vec<u8>>>,
    ) -> Result<Vec<BTreeMap<Rank, Vec<u8>>>, GridError> {
        self.check_count(outboxes.len())?;
        for out in &outboxes {
            for &dst in out.keys() {
                self.check_rank(dst)?;
            }
        }
        self.ledger.superstep();
        let mut inboxes = vec![BTreeMap::new(); self.p];
        for src in self.send_order() {
            for (&dst, payload) in &outboxes[src] {
                if payload.is_empty() {
                    continue;
                }
                let got = self.transmit(Collective::AllToAll, src, dst, payload);
                inboxes[dst].insert(src, got);
            }
        }
        Ok(inboxes)
    }

    /// Element-wise sum of equal-length partial vectors; rank `r` receives the
    /// slice of the sum it owns under `owner`.
    pub fn reduce_scatter(
        &mut self,
        partials: &[Vec<u64>],
        owner: &Partition,
    ) -> Result<Vec<Vec<u64>>, GridError> {
        self.check_count(partials.len())?;
        self.check_count(owner.parts())?;
        let n = owner.len();
        for p in partials {
            if p.len() != n {
                return Err(GridError::LengthMismatch { expected: n, got: p.len() });
            }
        }
        self.ledger.superstep();
        let mut owned: Vec<Vec<u64>> = (0..self.p).map(|r| vec![0; owner.size(r)]).collect();
        for src in self.send_order() {
            for (dst, acc) in owned.iter_mut().enumerate() {
                let segment = &partials[src][owner.range(dst)];
                if segment.is_empty() {
                    continue;
                }
                let got = self.transmit(Collective::ReduceScatter, src, dst, &encode(&segment.to_vec()));
                let seg: Vec<u64> = decode(&got);
                for (a, x) in acc.iter_mut().zip(seg) {
                    *a += x;
                }
            }
        }
        Ok(owned)
    }

    /// Every rank sends its contribution to `root`; returns them in rank order.
    pub fn gather(&mut self, root: Rank, contributions: Vec<Vec<u8>>) -> Result<Vec<Vec<u8>>, GridError> {
        self.check_rank(root)?;
        self.check_count(contributions.len())?;
        self.ledger.superstep();
        let mut out = vec![Vec::new(); self.p];
        for src in self.send_order() {
            out[src] = self.transmit(Collective::Gather, src, root, &contributions[src]);
        }
        Ok(out)
    }

    /// Flat-tree broadcast from `root`; every rank receives the same bytes.
    pub fn broadcast(&mut self, root: Rank, payload: &[u8]) -> Result<Vec<u8>, GridError> {
        self.check_rank(root)?;
        self.ledger.superstep();
        for dst in self.send_order() {
            self.transmit(Collective::Broadcast, root, dst, payload);
        }
        Ok(payload.to_vec())
    }

    /// Gather to rank 0 then broadcast: every rank learns every value.
    pub fn allgather_u64(&mut self, values: &[u64]) -> Result<Vec<u64>, GridError> {
        let gathered = self.gather(0, values.iter().map(encode).collect())?;
        let all: Vec<u64> = gathered.iter().map(|b| decode(b)).collect();
        let bytes = self.broadcast(0, &encode(&all))?;
        Ok(decode(&bytes))
    }

    pub fn allreduce_sum(&mut self, values: &[u64]) -> Result<u64, GridError> {
        Ok(self.allgather_u64(values)?.iter().sum())
    }
}

/// `Comm` plus the square topology and the row/column/transpose collectives.
#[derive(Debug)]
pub struct Grid {
    topo: GridTopology,
    comm: Comm,
}

impl Deref for Grid {
    type Target = Comm;
    fn deref(&self) -> &Comm {
        &self.comm
    }
}

impl DerefMut for Grid {
    fn deref_mut(&mut self) -> &mut Comm {
        &mut self.comm
    }
}

impl Grid {
    pub fn new(p_total: usize) -> Result<Self, GridError> {
        let topo = GridTopology::new(p_total)?;
        Ok(Grid { topo, comm: Comm::new(p_total)? })
    }

    pub fn topology(&self) -> GridTopology {
        self.topo
    }

    pub fn side(&self) -> usize {
        self.topo.side
    }

    /// Ring allgather over processor row `row`. `contributions[c]` comes from
    /// rank `(row, c)`; every rank of the row ends up with all of them, in
    /// column order. The ring moves each piece `side - 1` hops, so a row with
    /// non-empty pieces costs `side * (side - 1)` messages.
    pub fn row_allgather(&mut self, row: usize, contributions: &[Vec<u8>]) -> Result<Vec<Vec<u8>>, GridError> {
        let side = self.topo.side;
        if row >= side {
            return Err(GridError::InvalidRank(row * side));
        }
        if contributions.len() != side {
            return Err(GridError::WrongParticipantCount { expected: side, got: contributions.len() });
        }
        self.comm.ledger.superstep();
        Ok(self.ring_row(row, contributions))
    }

    fn ring_row(&mut self, row: usize, contributions: &[Vec<u8>]) -> Vec<Vec<u8>> {
        let side = self.topo.side;
        for step in 0..side.saturating_sub(1) {
            for c in 0..side {
                let piece = (c + side - step) % side;
                let src = self.topo.rank(row, c);
                let dst = self.topo.rank(row, (c + 1) % side);
                self.comm.transmit(Collective::RowAllgather, src, dst, &contributions[piece]);
            }
        }
        contributions.to_vec()
    }

    /// Allgather inside every processor row at once (one superstep).
    /// Returns, per rank, the pieces of its row in column order.
    pub fn row_allgather_all(&mut self, contributions: Vec<Vec<u8>>) -> Result<Vec<Vec<Vec<u8>>>, GridError> {
        self.comm.check_count(contributions.len())?;
        self.comm.ledger.superstep();
        let side = self.topo.side;
        let mut out = vec![Vec::new(); self.topo.p_total];
        for row in 0..side {
            let pieces: Vec<Vec<u8>> = self.topo.row_ranks(row).map(|r| contributions[r].clone()).collect();
            let gathered = self.ring_row(row, &pieces);
            for r in self.topo.row_ranks(row) {
                out[r] = gathered.clone();
            }
        }
        Ok(out)
    }

    /// Rank `(i,j)` receives the payload of rank `(j,i)`. Diagonal ranks keep
    /// their own payload without traffic.
    pub fn transpose_exchange(&mut self, payloads: Vec<Vec<u8>>) -> Result<Vec<Vec<u8>>, GridError> {
        self.comm.check_count(payloads.len())?;
        self.comm.ledger.superstep();
        let mut out = vec![Vec::new(); self.topo.p_total];
        for src in self.comm.send_order() {
            let dst = self.topo.transpose_rank(src);
            out[dst] = self.comm.transmit(Collective::Transpose, src, dst, &payloads[src]);
        }
        Ok(out)
    }

    /// Rank `(row, root_col)` sends `payload` to every rank of its row.
    pub fn row_broadcast(&mut self, row: usize, root_col: usize, payload: &[u8]) -> Vec<u8> {
        self.comm.ledger.superstep();
        let src = self.topo.rank(row, root_col);
        for dst in self.topo.row_ranks(row) {
            self.comm.transmit(Collective::RowBroadcast, src, dst, payload);
        }
        payload.to_vec()
    }

    /// Rank `(root_row, col)` sends `payload` to every rank of its column.
    pub fn col_broadcast(&mut self, col: usize, root_row: usize, payload: &[u8]) -> Vec<u8> {
        self.comm.ledger.superstep();
        let src = self.topo.rank(root_row, col);
        for dst in self.topo.col_ranks(col) {
            self.comm.transmit(Collective::ColBroadcast, src, dst, payload);
        }
        payload.to_vec()
    }
}

/// Serializes a value for the wire.
pub fn encode<T: Serialize + ?Sized>(value: &T) -> Vec<u8> {
    bincode::serialize(value).expect("in-memory serialization cannot fail")
}

/// Inverse of [`encode`]. Payloads never leave the process, so a decode
/// failure is a bug, not an input error.
pub fn decode<T: DeserializeOwned>(bytes: &[u8]) -> T {
    bincode::deserialize(bytes).expect("payload produced by encode")
}

/// Like [`encode`] but maps an empty list to an empty payload (no message).
pub fn encode_list<T: Serialize>(items: &[T]) -> Vec<u8> {
    if items.is_empty() {
        Vec::new()
    } else {
        encode(items)
    }
}

pub fn decode_list<T: DeserializeOwned>(bytes: &[u8]) -> Vec<T> {
    if bytes.is_empty() {
        Vec::new()
    } else {
        decode(bytes)
    }
}

/// Typed all-to-all over item lists: `outboxes[p]` maps destination to items.
pub fn alltoall_items<T: Serialize + DeserializeOwned>(
    comm: &mut Comm,
    outboxes: Vec<BTreeMap<Rank, Vec<T>>>,
) -> Result<Vec<Vec<(Rank, Vec<T>)>>, GridError> {
    let raw = outboxes
        .into_iter()
        .map(|out| out.into_iter().map(|(dst, items)| (dst, encode_list(&items))).collect())
        .collect();
    let inboxes = comm.alltoall(raw)?;
    Ok(inboxes
        .into_iter()
        .map(|inbox| inbox.into_iter().map(|(src, b)| (src, decode_list(&b))).collect())
        .collect())
}

/// What a rank `(i,j)` sees after a band exchange: the items of row band `i`
/// and of column band `j`.
#[derive(Clone, Debug, PartialEq)]
pub struct BandView<T> {
    pub row: Vec<T>,
    pub col: Vec<T>,
}

/// Row allgather followed by the `(i,j) <-> (j,i)` exchange.
///
/// `items[r]` are the items rank `r` holds for its owned slice of a
/// grid-aligned vector; rank `(i,j)` ends up with everything held in processor
/// row `i` (its row band) and, via `P(j,i)`, everything held in processor row
/// `j` (its column band).
pub fn band_exchange<T>(grid: &mut Grid, items: &[Vec<T>]) -> Result<Vec<BandView<T>>, GridError>
where
    T: Serialize + DeserializeOwned + Clone,
{
    let payloads = items.iter().map(|it| encode_list(it)).collect();
    let gathered = grid.row_allgather_all(payloads)?;
    let row_items: Vec<Vec<T>> = gathered
        .iter()
        .map(|pieces| pieces.iter().flat_map(|p| decode_list::<T>(p)).collect())
        .collect();
    let transposed = grid.transpose_exchange(row_items.iter().map(|it| encode_list(it)).collect())?;
    Ok(row_items
        .into_iter()
        .zip(transposed)
        .map(|(row, t)| BandView { row, col: decode_list(&t) })
        .collect())
}
