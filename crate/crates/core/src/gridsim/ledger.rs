use std::collections::BTreeMap;
use std::fmt::Write as _;

use serde::Serialize;

use super::Rank;

/// Which collective produced a ledger entry.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
pub enum Collective {
    RowAllgather,
    RowBroadcast,
    ColBroadcast,
    Transpose,
    AllToAll,
    ReduceScatter,
    Gather,
    Broadcast,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize)]
pub struct LinkCounts {
    pub msgs: u64,
    pub bytes: u64,
}

impl LinkCounts {
    fn add(&mut self, msgs: u64, bytes: u64) {
        self.msgs += msgs;
        self.bytes += bytes;
    }
}

/// One detailed ledger line: traffic of one collective in one pipeline phase
/// over one directed link.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct LedgerEntry {
    pub phase: String,
    pub op: Collective,
    pub src: Rank,
    pub dst: Rank,
    pub counts: LinkCounts,
}

/// Message and byte counters for every directed link of the virtual grid.
///
/// Only network traffic is recorded; a rank sending to itself is a local copy.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct CommLedger {
    links: BTreeMap<(Rank, Rank), LinkCounts>,
    detail: BTreeMap<(String, Collective, Rank, Rank), LinkCounts>,
    bytes_sent: u64,
    bytes_delivered: u64,
    supersteps: u64,
}

impl CommLedger {
    pub(crate) fn record_send(&mut self, phase: &str, op: Collective, src: Rank, dst: Rank, bytes: u64) {
        self.links.entry((src, dst)).or_default().add(1, bytes);
        self.detail
            .entry((phase.to_string(), op, src, dst))
            .or_default()
            .add(1, bytes);
        self.bytes_sent += bytes;
    }

    pub(crate) fn record_delivery(&mut self, bytes: u64) {
        self.bytes_delivered += bytes;
    }

    pub(crate) fn superstep(&mut self) {
        self.supersteps += 1;
    }

    pub fn bytes_sent(&self) -> u64 {
        self.bytes_sent
    }

    pub fn bytes_delivered(&self) -> u64 {
        self.bytes_delivered
    }

    pub fn is_conserved(&self) -> bool {
        self.bytes_sent == self.bytes_delivered
    }

    pub fn supersteps(&self) -> u64 {
        self.supersteps
    }

    pub fn total_msgs(&self) -> u64 {
        self.links.values().map(|c| c.msgs).sum()
    }

    pub fn link(&self, src: Rank, dst: Rank) -> LinkCounts {
        self.links.get(&(src, dst)).copied().unwrap_or_default()
    }

    pub fn links(&self) -> impl Iterator<Item = ((Rank, Rank), LinkCounts)> + '_ {
        self.links.iter().map(|(k, v)| (*k, *v))
    }

    pub fn entries(&self) -> impl Iterator<Item = LedgerEntry> + '_ {
        self.detail.iter().map(|((phase, op, src, dst), counts)| LedgerEntry {
            phase: phase.clone(),
            op: *op,
            src: *src,
            dst: *dst,
            counts: *counts,
        })
    }

    /// Bytes sent per phase, in phase-name order.
    pub fn bytes_by_phase(&self) -> BTreeMap<String, u64> {
        let mut out = BTreeMap::new();
        for ((phase, _, _, _), c) in &self.detail {
            *out.entry(phase.clone()).or_insert(0) += c.bytes;
        }
        out
    }

    /// Tab-separated dump: `src dst msgs bytes`, one line per directed link.
    pub fn to_tsv(&self) -> String {
        let mut out = String::from("src\tdst\tmsgs\tbytes\n");
        for ((src, dst), c) in &self.links {
            let _ = writeln!(out, "{src}\t{dst}\t{}\t{}", c.msgs, c.bytes);
        }
        out
    }
}
