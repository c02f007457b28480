use super::induced::LocalGraph;
use super::ContigError;
use crate::gridsim::Rank;
use crate::seqstore::{complement, ReadId, ReadStore};
use crate::spmat::{EdgeLabel, Orientation};

/// Ordered walk through one contig: reads, the orientation each is read in,
/// and the label of each step.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ContigChain {
    pub reads: Vec<ReadId>,
    pub orientations: Vec<Orientation>,
    /// `edges[i]` joins `reads[i]` to `reads[i + 1]`.
    pub edges: Vec<EdgeLabel>,
    pub circular: bool,
}

impl ContigChain {
    pub fn len(&self) -> usize {
        self.reads.len()
    }

    pub fn is_empty(&self) -> bool {
        self.reads.is_empty()
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Contig {
    pub chain: ContigChain,
    pub sequence: Vec<u8>,
    /// Rank that assembled it.
    pub rank: Rank,
}

#[derive(Clone, Copy, PartialEq, Eq)]
enum Visit {
    Unvisited,
    Interior,
    Endpoint,
}

/// Whether a walk may pass through a degree-2 vertex: it must leave in the
/// orientation it entered, so the two out-edges start on opposite strands.
fn passable(graph: &LocalGraph, c: usize) -> bool {
    let mut outs = graph.out_edges(c);
    match (outs.next(), outs.next()) {
        (Some((_, a)), Some((_, b))) => a.direction.src() != b.direction.src(),
        _ => false,
    }
}

/// Walks linear chains between terminals (degree-1 vertices and degree-2
/// vertices no walk can pass through), scanning terminals in ascending id.
/// Each edge is used once; unused edges afterwards form cycles, broken at
/// their lowest vertex and flagged circular.
pub fn local_chains(graph: &LocalGraph) -> Result<Vec<ContigChain>, ContigError> {
    let n = graph.n_vertices();
    if let Some(c) = (0..n).find(|&c| graph.degree(c) > 2) {
        return Err(ContigError::BranchingVertex(graph.global_ids[c]));
    }
    let terminal: Vec<bool> = (0..n).map(|c| graph.degree(c) == 1 || !passable(graph, c)).collect();
    let mut used = vec![[false; 2]; n];
    let mut state = vec![Visit::Unvisited; n];
    let mut chains = Vec::new();

    // Marks the edge c->x used on both endpoints.
    let edge_slot = |graph: &LocalGraph, c: usize, x: usize| graph.out_edges(c).position(|(r, _)| r == x).unwrap();

    for start in 0..n {
        if !terminal[start] || graph.degree(start) == 0 {
            continue;
        }
        for first in 0..graph.degree(start) {
            if used[start][first] {
                continue;
            }
            let (mut next, mut label) = graph.out_edges(start).nth(first).map(|(r, l)| (r, *l)).unwrap();
            used[start][first] = true;
            state[start] = Visit::Endpoint;
            let mut chain = ContigChain {
                reads: vec![graph.global_ids[start]],
                orientations: vec![label.direction.src()],
                edges: Vec::new(),
                circular: false,
            };
            let mut prev = start;
            loop {
                let back = edge_slot(graph, next, prev);
                used[next][back] = true;
                chain.edges.push(label);
                chain.reads.push(graph.global_ids[next]);
                chain.orientations.push(label.direction.dst());
                if terminal[next] {
                    state[next] = Visit::Endpoint;
                    break;
                }
                if state[next] == Visit::Interior {
                    return Err(ContigError::BrokenChain(graph.global_ids[next]));
                }
                state[next] = Visit::Interior;
                let out = 1 - back;
                if used[next][out] {
                    return Err(ContigError::BrokenChain(graph.global_ids[next]));
                }
                used[next][out] = true;
                let (r, l) = graph.out_edges(next).nth(out).map(|(r, l)| (r, *l)).unwrap();
                prev = next;
                next = r;
                label = l;
            }
            chains.push(chain);
        }
    }

    for start in 0..n {
        if graph.degree(start) != 2 || used[start][0] || used[start][1] {
            continue;
        }
        let first = graph
            .out_edges(start)
            .position(|(_, l)| l.direction.src() == Orientation::Forward)
            .unwrap_or(0);
        let (mut next, mut label) = graph.out_edges(start).nth(first).map(|(r, l)| (r, *l)).unwrap();
        used[start][first] = true;
        state[start] = Visit::Interior;
        let mut chain = ContigChain {
            reads: vec![graph.global_ids[start]],
            orientations: vec![label.direction.src()],
            edges: Vec::new(),
            circular: true,
        };
        let mut prev = start;
        while next != start {
            if state[next] != Visit::Unvisited {
                return Err(ContigError::BrokenChain(graph.global_ids[next]));
            }
            state[next] = Visit::Interior;
            let back = edge_slot(graph, next, prev);
            used[next][back] = true;
            chain.edges.push(label);
            chain.reads.push(graph.global_ids[next]);
            chain.orientations.push(label.direction.dst());
            let out = 1 - back;
            used[next][out] = true;
            let (r, l) = graph.out_edges(next).nth(out).map(|(r, l)| (r, *l)).unwrap();
            prev = next;
            next = r;
            label = l;
        }
        used[start][1 - first] = true;
        chains.push(chain);
    }
    Ok(chains)
}

#[inline]
fn walk_index(len: usize, o: Orientation, i: usize) -> isize {
    match o {
        Orientation::Forward => i as isize,
        Orientation::Reverse => (len - 1 - i) as isize,
    }
}

/// Spells a chain: `l_r[a:pre(e0)] + l_c1[post(e0):pre(e1)] + ... + l_r'[post:b]`
/// with the end points of the first and last read set by their orientation.
/// A read whose exit precedes its entry contributes a negative span, which
/// trims the bases already emitted.
pub fn chain_sequence(chain: &ContigChain, store: &ReadStore) -> Result<Vec<u8>, ContigError> {
    let q = chain.reads.len();
    let mut out = Vec::new();
    for (i, (&id, &o)) in chain.reads.iter().zip(&chain.orientations).enumerate() {
        let len = store.read_len(id)?;
        let (first, last) = match o {
            Orientation::Forward => (0, len - 1),
            Orientation::Reverse => (len - 1, 0),
        };
        let entry = if i == 0 { first } else { chain.edges[i - 1].post as usize };
        let exit = if i + 1 == q { last } else { chain.edges[i].pre as usize };
        if entry >= len || exit >= len {
            return Err(ContigError::LabelOutOfRange(id));
        }
        let span = walk_index(len, o, exit) - walk_index(len, o, entry) + 1;
        if span == 1 && o.is_reverse() {
            out.push(complement(store.seq(id)?[entry]).expect("stored bases are ACGT"));
        } else if span > 0 {
            store.append_slice(&mut out, id, entry, exit)?;
        } else {
            let trim = (-span) as usize;
            if trim > out.len() {
                return Err(ContigError::LabelOutOfRange(id));
            }
            out.truncate(out.len() - trim);
        }
    }
    Ok(out)
}

/// Assembles every chain of one rank's local graph.
pub fn local_assembly(graph: &LocalGraph, store: &ReadStore, rank: Rank) -> Result<Vec<Contig>, ContigError> {
    local_chains(graph)?
        .into_iter()
        .map(|chain| {
            let sequence = chain_sequence(&chain, store)?;
            Ok(Contig { chain, sequence, rank })
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::seqstore::reverse_complement;
    use crate::spmat::{Direction, LocalSparse, Mirror};

    fn graph(n: usize, edges: &[(usize, usize, EdgeLabel)]) -> LocalGraph {
        let mut t = Vec::new();
        for &(u, v, l) in edges {
            t.push((v, u, l));
            t.push((u, v, l.mirror()));
        }
        LocalGraph { global_ids: (0..n).collect(), matrix: LocalSparse::from_triplets(n, n, t, |_, _| {}).unwrap() }
    }

    fn lab(direction: Direction, pre: u32, post: u32) -> EdgeLabel {
        EdgeLabel { direction, overhang: 1, src_overhang: 1, pre, post }
    }

    fn three_reads() -> ReadStore {
        ReadStore::from_seqs(&["AGAACT", "AACTGAAG", "TGAAGAA"]).unwrap()
    }

    #[test]
    fn three_read_chain() {
        let g = graph(3, &[(0, 1, lab(Direction::Forward, 1, 0)), (1, 2, lab(Direction::Forward, 4, 2))]);
        let contigs = local_assembly(&g, &three_reads(), 0).unwrap();
        assert_eq!(contigs.len(), 1);
        assert_eq!(contigs[0].chain.reads, vec![0, 1, 2]);
        assert_eq!(contigs[0].sequence, b"AGAACTGAAGAA");
    }

    #[test]
    fn two_read_chain() {
        let g = graph(2, &[(0, 1, lab(Direction::Forward, 1, 0))]);
        let s = local_assembly(&g, &three_reads(), 0).unwrap();
        assert_eq!(s[0].sequence, b"AGAACTGAAG");
    }

    #[test]
    fn reverse_complement_step() {
        // l0 = AGAACT overlaps rc(l1) with rc(l1) = AACTGAAG
        let store = ReadStore::from_seqs(&["AGAACT", "CTTCAGTT"]).unwrap();
        let g = graph(2, &[(0, 1, lab(Direction::BothIn, 1, 7))]);
        let s = &local_assembly(&g, &store, 0).unwrap()[0].sequence;
        let reference = b"AGAACTGAAG";
        let rc = reverse_complement(reference).unwrap();
        assert!(s.as_slice() == reference || s == &rc, "{}", String::from_utf8_lossy(s));
    }

    #[test]
    fn walking_from_the_other_end_spells_the_reverse_complement() {
        let g = graph(3, &[(2, 1, lab(Direction::Forward, 4, 2).mirror()), (1, 0, lab(Direction::Forward, 1, 0).mirror())]);
        let chain = ContigChain {
            reads: vec![2, 1, 0],
            orientations: vec![Orientation::Reverse; 3],
            edges: vec![lab(Direction::Forward, 4, 2).mirror(), lab(Direction::Forward, 1, 0).mirror()],
            circular: false,
        };
        assert_eq!(local_chains(&g).unwrap()[0].reads, vec![0, 1, 2]);
        let s = chain_sequence(&chain, &three_reads()).unwrap();
        assert_eq!(s, reverse_complement(b"AGAACTGAAGAA").unwrap());
    }

    #[test]
    fn negative_span_trims() {
        // middle read exits before it is entered
        let store = ReadStore::from_seqs(&["AAAACCCC", "ACCCCGGG", "CCGGGTTT"]).unwrap();
        let chain = ContigChain {
            reads: vec![0, 1, 2],
            orientations: vec![Orientation::Forward; 3],
            edges: vec![lab(Direction::Forward, 5, 2), lab(Direction::Forward, 0, 0)],
            circular: false,
        };
        // l0[0:5] = AAAACC, l1[2:0] trims 1, l2[0:7]
        assert_eq!(chain_sequence(&chain, &store).unwrap(), b"AAAACCCGGGTTT");
    }

    #[test]
    fn one_base_from_a_reverse_read_is_complemented() {
        // rc(l1) = GAAGT, and the walk takes only its last base
        let store = ReadStore::from_seqs(&["AAGAAG", "ACTTC"]).unwrap();
        let chain = ContigChain {
            reads: vec![0, 1],
            orientations: vec![Orientation::Forward, Orientation::Reverse],
            edges: vec![lab(Direction::BothIn, 5, 0)],
            circular: false,
        };
        assert_eq!(chain_sequence(&chain, &store).unwrap(), b"AAGAAGT");
    }

    #[test]
    fn cycle_is_broken_at_lowest_id() {
        let f = |p, q| lab(Direction::Forward, p, q);
        let g = graph(3, &[(0, 1, f(0, 0)), (1, 2, f(0, 0)), (2, 0, f(0, 0))]);
        let chains = local_chains(&g).unwrap();
        assert_eq!(chains.len(), 1);
        assert!(chains[0].circular);
        assert_eq!(chains[0].reads, vec![0, 1, 2]);
    }

    #[test]
    fn strand_conflict_splits_at_shared_endpoint() {
        // 0 -> 1 arrives on 1+, 1 -> 2 leaves from 1-
        let g = graph(3, &[(0, 1, lab(Direction::Forward, 1, 0)), (1, 2, lab(Direction::BothOut, 0, 0))]);
        let chains = local_chains(&g).unwrap();
        let reads: Vec<_> = chains.iter().map(|c| c.reads.clone()).collect();
        assert_eq!(reads, vec![vec![0, 1], vec![1, 2]]);
    }
}
