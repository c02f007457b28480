use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};

use super::{ReadId, ReadStore, SeqError};
use crate::gridsim::{decode, encode, Grid, Rank};

/// Wire form of a batch of reads: bases packed back to back.
#[derive(Default, Serialize, Deserialize)]
struct ReadPacket {
    ids: Vec<u64>,
    lens: Vec<u32>,
    headers: Vec<String>,
    bases: Vec<u8>,
}

/// Moves every read to the rank given by `assignment`, pushing from the rank
/// that holds it. Reads without a destination are dropped unless listed in
/// `needed`, which is an error. Resident reads are copied locally.
///
/// Every returned store is sorted by read id.
pub fn exchange_reads(
    grid: &mut Grid,
    stores: &[ReadStore],
    assignment: &BTreeMap<ReadId, Rank>,
    needed: &BTreeSet<ReadId>,
) -> Result<Vec<ReadStore>, SeqError> {
    let p = grid.size();
    if stores.len() != p {
        return Err(crate::gridsim::GridError::LengthMismatch { expected: p, got: stores.len() }.into());
    }
    if let Some(&missing) = needed.iter().find(|id| !assignment.contains_key(id)) {
        return Err(SeqError::UnassignedRead(missing));
    }
    let mut outboxes: Vec<BTreeMap<Rank, Vec<u8>>> = Vec::with_capacity(p);
    for store in stores {
        let mut packets: BTreeMap<Rank, ReadPacket> = BTreeMap::new();
        for (id, seq) in store.iter() {
            let Some(&dst) = assignment.get(&id) else { continue };
            if dst >= p {
                return Err(crate::gridsim::GridError::InvalidRank(dst).into());
            }
            let pk = packets.entry(dst).or_default();
            pk.ids.push(id as u64);
            pk.lens.push(seq.len() as u32);
            pk.headers.push(store.header(id)?.to_string());
            pk.bases.extend_from_slice(seq);
        }
        outboxes.push(packets.into_iter().map(|(dst, pk)| (dst, encode(&pk))).collect());
    }
    let inboxes = grid.alltoall(outboxes)?;
    let mut result = Vec::with_capacity(p);
    for inbox in inboxes {
        let mut reads: Vec<(ReadId, String, Vec<u8>)> = Vec::new();
        for bytes in inbox.values() {
            let pk: ReadPacket = decode(bytes);
            let mut at = 0;
            for ((id, len), header) in pk.ids.into_iter().zip(pk.lens).zip(pk.headers) {
                let len = len as usize;
                reads.push((id as ReadId, header, pk.bases[at..at + len].to_vec()));
                at += len;
            }
        }
        reads.sort_by_key(|r| r.0);
        let mut store = ReadStore::new();
        for (id, header, seq) in reads {
            store.push(id, header, &seq)?;
        }
        result.push(store);
    }
    Ok(result)
}
