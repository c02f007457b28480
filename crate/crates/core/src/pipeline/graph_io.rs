use std::collections::BTreeMap;
use std::fmt::Write as _;

use super::PipelineError;
use crate::contig::Contig;
use crate::seqstore::ReadStore;
use crate::spmat::{Direction, EdgeLabel, Mirror};

/// Parses a string-graph edge list: `u v direction overhang pre post`
/// separated by tabs or spaces; `#` starts a comment. Rows whose mirror is
/// absent get it derived, so the result is symmetric. The source overhang
/// comes from the read lengths in `store`.
pub fn parse_string_graph(text: &str, store: &ReadStore) -> Result<Vec<(usize, usize, EdgeLabel)>, PipelineError> {
    let mut edges: BTreeMap<(usize, usize), EdgeLabel> = BTreeMap::new();
    for (n, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let bad = |m: String| PipelineError::Config(format!("string graph line {}: {m}", n + 1));
        let f: Vec<&str> = line.split_whitespace().collect();
        if f.first() == Some(&"u") {
            continue;
        }
        if f.len() != 6 {
            return Err(bad(format!("expected 6 fields, found {}", f.len())));
        }
        let num = |s: &str| s.parse::<u64>().map_err(|_| bad(format!("not a number: {s:?}")));
        let (u, v) = (num(f[0])? as usize, num(f[1])? as usize);
        let direction: Direction = f[2].parse().map_err(bad)?;
        let (overhang, pre, post) = (num(f[3])? as u32, num(f[4])? as u32, num(f[5])? as u32);
        let (len_u, len_v) = match (store.read_len(u), store.read_len(v)) {
            (Ok(a), Ok(b)) => (a, b),
            _ => return Err(bad(format!("read {u} or {v} not in the input"))),
        };
        if u == v {
            return Err(bad("self loop".into()));
        }
        let overlap = len_v
            .checked_sub(overhang as usize)
            .filter(|&l| l > 0 && l <= len_u)
            .ok_or_else(|| bad(format!("overhang {overhang} does not fit read {v}")))?;
        let label = EdgeLabel { direction, overhang, src_overhang: (len_u - overlap) as u32, pre, post };
        if !label.is_valid_for(len_u, len_v) {
            return Err(bad("pre/post outside the reads".into()));
        }
        edges.insert((u, v), label);
    }
    let derived: Vec<_> = edges
        .iter()
        .filter(|((u, v), _)| !edges.contains_key(&(*v, *u)))
        .map(|(&(u, v), l)| ((v, u), l.mirror()))
        .collect();
    edges.extend(derived);
    Ok(edges.into_iter().map(|((u, v), l)| (u, v, l)).collect())
}

pub fn write_string_graph(edges: &[(usize, usize, EdgeLabel)]) -> String {
    let mut out = String::from("# u\tv\tdirection\toverhang\tpre\tpost\n");
    for (u, v, l) in edges {
        let _ = writeln!(out, "{u}\t{v}\t{}\t{}\t{}\t{}", l.direction, l.overhang, l.pre, l.post);
    }
    out
}

/// One row per contig: id, rank, read ids, orientations, `pre:post` per step.
pub fn chain_dump(contigs: &[Contig]) -> String {
    let mut out = String::from("contig\trank\treads\torientations\tsteps\n");
    for (k, c) in contigs.iter().enumerate() {
        let reads: Vec<String> = c.chain.reads.iter().map(|r| r.to_string()).collect();
        let orient: String = c.chain.orientations.iter().map(|o| o.symbol()).collect();
        let steps: Vec<String> = c.chain.edges.iter().map(|e| format!("{}:{}", e.pre, e.post)).collect();
        let _ = writeln!(out, "{k}\t{}\t{}\t{orient}\t{}", c.rank, reads.join(","), steps.join(","));
    }
    out
}
