use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::PipelineError;
use crate::seqstore::{reverse_complement, ReadStore};
use crate::spmat::Orientation;

/// Where a synthetic read came from.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ReadLayout {
    pub start: usize,
    pub strand: Orientation,
}

/// Uniform random genome over `ACGT`.
pub fn synth_genome(length: usize, seed: u64) -> Vec<u8> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..length).map(|_| b"ACGT"[rng.gen_range(0..4)]).collect()
}

/// Error-free reads of a fixed length at uniform random starts, each on a
/// random strand; `round(length * coverage / read_len)` of them.
pub fn synth_reads(
    reference: &[u8],
    read_len: usize,
    coverage: f64,
    seed: u64,
) -> Result<(ReadStore, Vec<ReadLayout>), PipelineError> {
    if read_len == 0 || read_len >= reference.len() {
        return Err(PipelineError::Config(format!(
            "read length {read_len} must be positive and below the genome length {}",
            reference.len()
        )));
    }
    if !coverage.is_finite() || coverage < 1.0 {
        return Err(PipelineError::Config(format!("coverage must be at least 1, got {coverage}")));
    }
    let n = (reference.len() as f64 * coverage / read_len as f64).round() as usize;
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x5eed_5eed);
    let mut store = ReadStore::new();
    let mut layout = Vec::with_capacity(n);
    for i in 0..n {
        let start = rng.gen_range(0..=reference.len() - read_len);
        let strand = if rng.gen_bool(0.5) { Orientation::Reverse } else { Orientation::Forward };
        let piece = &reference[start..start + read_len];
        let seq = match strand {
            Orientation::Forward => piece.to_vec(),
            Orientation::Reverse => reverse_complement(piece).expect("genome is ACGT"),
        };
        store
            .push(i, format!("read_{i} start={start} strand={}", strand.symbol()), &seq)
            .expect("genome is ACGT");
        layout.push(ReadLayout { start, strand });
    }
    Ok((store, layout))
}

/// Breaks in the tiling: places where consecutive reads (by start) overlap
/// by fewer than `min_overlap` bases, plus uncovered genome ends.
pub fn coverage_gaps(layout: &[ReadLayout], read_len: usize, genome_len: usize, min_overlap: usize) -> usize {
    let mut starts: Vec<usize> = layout.iter().map(|r| r.start).collect();
    starts.sort_unstable();
    let Some(&first) = starts.first() else { return 0 };
    let mut gaps = usize::from(first > 0);
    let mut reach = first + read_len;
    for &s in &starts[1..] {
        if s + min_overlap > reach && s + read_len > reach {
            gaps += 1;
        }
        reach = reach.max(s + read_len);
    }
    gaps + usize::from(reach < genome_len)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn coverage_arithmetic() {
        let g = synth_genome(1000, 1);
        let (store, layout) = synth_reads(&g, 200, 10.0, 2).unwrap();
        assert_eq!(store.len(), 50);
        assert_eq!(layout.len(), 50);
        for ((id, seq), l) in store.iter().zip(&layout) {
            let piece = &g[l.start..l.start + 200];
            match l.strand {
                Orientation::Forward => assert_eq!(seq, piece, "read {id}"),
                Orientation::Reverse => assert_eq!(seq, reverse_complement(piece).unwrap()),
            }
        }
    }

    #[test]
    fn same_seed_same_reads() {
        let g = synth_genome(500, 9);
        assert_eq!(g, synth_genome(500, 9));
        assert_ne!(g, synth_genome(500, 10));
        assert_eq!(synth_reads(&g, 50, 3.0, 4).unwrap(), synth_reads(&g, 50, 3.0, 4).unwrap());
    }

    #[test]
    fn parameter_checks() {
        let g = synth_genome(100, 1);
        assert!(synth_reads(&g, 100, 2.0, 1).is_err());
        assert!(synth_reads(&g, 10, 0.5, 1).is_err());
    }

    #[test]
    fn gap_counting() {
        let l = |start| ReadLayout { start, strand: Orientation::Forward };
        assert_eq!(coverage_gaps(&[l(0), l(5), l(10)], 10, 20, 3), 0);
        assert_eq!(coverage_gaps(&[l(0), l(9), l(20)], 10, 30, 3), 2);
        assert_eq!(coverage_gaps(&[l(2), l(8)], 10, 30, 3), 2);
    }
}
