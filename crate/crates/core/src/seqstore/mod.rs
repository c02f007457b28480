//! Read sequences: one packed base buffer plus an offset table.

mod exchange;
mod fasta;

use std::collections::BTreeMap;

use thiserror::Error;

use crate::gridsim::{GridError, Partition};

pub use exchange::exchange_reads;
pub use fasta::{fasta_read, parse_fasta, write_fasta, FASTA_LINE_WIDTH};

/// Global read identifier (file order, 0-based).
pub type ReadId = usize;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum SeqError {
    #[error("cannot read {path}: {message}")]
    Io { path: String, message: String },
    #[error("FASTA parse error at line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error("record {record:?} has base {base:?} at position {position}")]
    Alphabet { record: String, base: char, position: usize },
    #[error("slice [{i}:{j}] outside read {read} of length {len}")]
    OutOfBounds { read: ReadId, i: usize, j: usize, len: usize },
    #[error("read {0} is not in this store")]
    UnknownRead(ReadId),
    #[error("read {0} is needed but has no destination rank")]
    UnassignedRead(ReadId),
    #[error("read {0} appears more than once")]
    DuplicateRead(ReadId),
    #[error(transparent)]
    Grid(#[from] GridError),
}

#[inline]
pub fn complement(base: u8) -> Option<u8> {
    match base {
        b'A' => Some(b'T'),
        b'C' => Some(b'G'),
        b'G' => Some(b'C'),
        b'T' => Some(b'A'),
        _ => None,
    }
}

pub fn is_nucleotide(base: u8) -> bool {
    complement(base).is_some()
}

/// Reverse complement over `{A,C,G,T}`.
pub fn reverse_complement(s: &[u8]) -> Result<Vec<u8>, SeqError> {
    s.iter()
        .enumerate()
        .rev()
        .map(|(i, &b)| {
            complement(b).ok_or(SeqError::Alphabet { record: String::new(), base: b as char, position: i })
        })
        .collect()
}

/// Reads packed back to back in one buffer.
///
/// Reads are kept in insertion order; lookups by global id go through an
/// index map.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct ReadStore {
    buffer: Vec<u8>,
    /// `(start, len)` into `buffer`, one per stored read.
    offsets: Vec<(usize, usize)>,
    ids: Vec<ReadId>,
    headers: Vec<String>,
    index: BTreeMap<ReadId, usize>,
}

impl ReadStore {
    pub fn new() -> Self {
        Self::default()
    }

    /// Appends a read after validating and upper-casing its bases.
    pub fn push(&mut self, id: ReadId, header: impl Into<String>, seq: &[u8]) -> Result<(), SeqError> {
        let header = header.into();
        if self.index.contains_key(&id) {
            return Err(SeqError::DuplicateRead(id));
        }
        let start = self.buffer.len();
        for (pos, &b) in seq.iter().enumerate() {
            let up = b.to_ascii_uppercase();
            if !is_nucleotide(up) {
                self.buffer.truncate(start);
                return Err(SeqError::Alphabet { record: record_name(&header).to_string(), base: b as char, position: pos });
            }
            self.buffer.push(up);
        }
        self.index.insert(id, self.offsets.len());
        self.offsets.push((start, seq.len()));
        self.ids.push(id);
        self.headers.push(header);
        Ok(())
    }

    /// Store with ids `0..n` from bare sequences.
    pub fn from_seqs<S: AsRef<[u8]>>(seqs: &[S]) -> Result<Self, SeqError> {
        let mut store = Self::new();
        for (i, s) in seqs.iter().enumerate() {
            store.push(i, format!("r{i}"), s.as_ref())?;
        }
        Ok(store)
    }

    pub fn len(&self) -> usize {
        self.ids.len()
    }

    pub fn is_empty(&self) -> bool {
        self.ids.is_empty()
    }

    pub fn ids(&self) -> &[ReadId] {
        &self.ids
    }

    pub fn contains(&self, id: ReadId) -> bool {
        self.index.contains_key(&id)
    }

    pub fn total_bases(&self) -> usize {
        self.buffer.len()
    }

    fn slot(&self, id: ReadId) -> Result<usize, SeqError> {
        self.index.get(&id).copied().ok_or(SeqError::UnknownRead(id))
    }

    pub fn seq(&self, id: ReadId) -> Result<&[u8], SeqError> {
        let (start, len) = self.offsets[self.slot(id)?];
        Ok(&self.buffer[start..start + len])
    }

    pub fn read_len(&self, id: ReadId) -> Result<usize, SeqError> {
        Ok(self.offsets[self.slot(id)?].1)
    }

    pub fn header(&self, id: ReadId) -> Result<&str, SeqError> {
        Ok(&self.headers[self.slot(id)?])
    }

    /// Record name: the header up to the first whitespace.
    pub fn name(&self, id: ReadId) -> Result<&str, SeqError> {
        self.header(id).map(record_name)
    }

    /// `(id, sequence)` pairs in storage order.
    pub fn iter(&self) -> impl Iterator<Item = (ReadId, &[u8])> + '_ {
        self.ids.iter().zip(&self.offsets).map(|(&id, &(s, l))| (id, &self.buffer[s..s + l]))
    }

    /// Inclusive slice `l[i:j]`; when `i > j` the bases are complemented and
    /// read from `i` down to `j`.
    pub fn slice(&self, id: ReadId, i: usize, j: usize) -> Result<Vec<u8>, SeqError> {
        let mut out = Vec::with_capacity(i.abs_diff(j) + 1);
        self.append_slice(&mut out, id, i, j)?;
        Ok(out)
    }

    /// Appends `l[i:j]` to `out`, reading straight from the packed buffer.
    pub fn append_slice(&self, out: &mut Vec<u8>, id: ReadId, i: usize, j: usize) -> Result<(), SeqError> {
        let read = self.seq(id)?;
        if i >= read.len() || j >= read.len() {
            return Err(SeqError::OutOfBounds { read: id, i, j, len: read.len() });
        }
        if i <= j {
            out.extend_from_slice(&read[i..=j]);
        } else {
            out.extend(read[j..=i].iter().rev().map(|&b| complement(b).expect("stored bases are ACGT")));
        }
        Ok(())
    }

    /// Splits the store into `parts` contiguous, balanced pieces.
    pub fn split_balanced(&self, parts: usize) -> Vec<ReadStore> {
        self.split(&Partition::balanced(self.len(), parts))
    }

    /// One piece per part of `part`, taken over storage order.
    pub fn split(&self, part: &Partition) -> Vec<ReadStore> {
        assert_eq!(part.len(), self.len(), "partition must cover the store");
        (0..part.parts())
            .map(|p| {
                let mut s = ReadStore::new();
                for slot in part.range(p) {
                    let (start, len) = self.offsets[slot];
                    s.push(self.ids[slot], self.headers[slot].clone(), &self.buffer[start..start + len])
                        .expect("source store is valid");
                }
                s
            })
            .collect()
    }

    /// Concatenation of several stores (ids must be disjoint).
    pub fn merge<'a>(stores: impl IntoIterator<Item = &'a ReadStore>) -> Result<ReadStore, SeqError> {
        let mut out = ReadStore::new();
        for s in stores {
            for (slot, (id, seq)) in s.iter().enumerate() {
                out.push(id, s.headers[slot].clone(), seq)?;
            }
        }
        Ok(out)
    }

    /// Copy with reads sorted by id.
    pub fn sorted(&self) -> ReadStore {
        let mut s = ReadStore::new();
        for (&id, &slot) in &self.index {
            let (start, len) = self.offsets[slot];
            s.push(id, self.headers[slot].clone(), &self.buffer[start..start + len]).expect("source store is valid");
        }
        s
    }
}

fn record_name(header: &str) -> &str {
    header.split_whitespace().next().unwrap_or("")
}
