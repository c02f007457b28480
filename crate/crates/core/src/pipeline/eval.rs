use serde::{Deserialize, Serialize};

use crate::seqstore::reverse_complement;

/// Assembly quality against a known reference.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct QualityReport {
    /// Percent of reference positions covered by at least one contig.
    pub completeness: f64,
    pub longest_contig: usize,
    pub contig_count: usize,
    /// Contigs that are not an exact substring of either reference strand.
    pub misassembled: usize,
}

impl QualityReport {
    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("report serializes");
        s.push('\n');
        s
    }
}

fn find(haystack: &[u8], needle: &[u8]) -> Option<usize> {
    if needle.is_empty() || needle.len() > haystack.len() {
        return None;
    }
    haystack.windows(needle.len()).position(|w| w == needle)
}

/// Reference interval `[start, end)` of an exact match on either strand.
pub fn locate(contig: &[u8], reference: &[u8], reference_rc: &[u8]) -> Option<(usize, usize)> {
    if let Some(p) = find(reference, contig) {
        return Some((p, p + contig.len()));
    }
    find(reference_rc, contig).map(|p| {
        let end = reference.len() - p;
        (end - contig.len(), end)
    })
}

pub fn evaluate<S: AsRef<[u8]>>(contigs: &[S], reference: &[u8]) -> QualityReport {
    let reference_rc = reverse_complement(reference).unwrap_or_default();
    let mut covered = vec![false; reference.len()];
    let mut misassembled = 0;
    for c in contigs {
        match locate(c.as_ref(), reference, &reference_rc) {
            Some((s, e)) => covered[s..e].iter_mut().for_each(|x| *x = true),
            None => misassembled += 1,
        }
    }
    let hit = covered.iter().filter(|&&x| x).count();
    QualityReport {
        completeness: if reference.is_empty() { 0.0 } else { 100.0 * hit as f64 / reference.len() as f64 },
        longest_contig: contigs.iter().map(|c| c.as_ref().len()).max().unwrap_or(0),
        contig_count: contigs.len(),
        misassembled,
    }
}
