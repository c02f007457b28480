//! Browser bindings. Every export takes plain numbers or text and returns a
//! JSON string; failures come back as a thrown string.

use std::collections::BTreeMap;

use contigforge::contig::{lpt_partition, optimal_makespan, rank_loads};
use contigforge::pipeline::{
    chain_dump, evaluate, parse_string_graph, run_pipeline, synth_genome, synth_reads, PipelineConfig, Report,
};
use contigforge::seqstore::parse_fasta;
use serde::Serialize;
use wasm_bindgen::prelude::*;

/// Largest contig count for which the exact makespan is computed.
const EXACT_LIMIT: usize = 14;

#[derive(Serialize)]
struct Assembly {
    report: Report,
    contig_lengths: Vec<usize>,
    /// Phase name to a P×P matrix of bytes, `links[phase][src][dst]`.
    links: BTreeMap<String, Vec<Vec<u64>>>,
}

#[derive(Serialize)]
struct Schedule {
    ranks: Vec<usize>,
    loads: Vec<u64>,
    makespan: u64,
    optimal: Option<u64>,
}

#[derive(Serialize)]
struct GraphRun {
    fasta: String,
    chains: String,
}

fn json<T: Serialize>(value: &T) -> String {
    serde_json::to_string(value).expect("plain data serializes")
}

pub fn assemble_json(
    genome_len: usize,
    read_len: usize,
    coverage: f64,
    grid: usize,
    seed: u64,
) -> Result<String, String> {
    if genome_len == 0 || genome_len > 200_000 {
        return Err("genome length must be in 1..=200000".into());
    }
    let config = PipelineConfig { grid, seed, max_kmer_freq: 64, ..Default::default() };
    config.validate().map_err(|e| e.to_string())?;
    let genome = synth_genome(genome_len, seed);
    let (store, _) = synth_reads(&genome, read_len, coverage, seed).map_err(|e| e.to_string())?;
    let output = run_pipeline(&config, &store, None).map_err(|e| e.to_string())?;
    let quality = evaluate(&output.sequences(), &genome);
    let mut links: BTreeMap<String, Vec<Vec<u64>>> = BTreeMap::new();
    for e in output.ledger.entries() {
        let m = links.entry(e.phase.clone()).or_insert_with(|| vec![vec![0; grid]; grid]);
        m[e.src][e.dst] += e.counts.bytes;
    }
    Ok(json(&Assembly {
        report: Report::new(&config, &output, Some(quality)).without_timings(),
        contig_lengths: output.sequences().iter().map(|s| s.len()).collect(),
        links,
    }))
}

pub fn schedule_json(sizes: &str, ranks: usize) -> Result<String, String> {
    if ranks == 0 {
        return Err("need at least one rank".into());
    }
    let sizes: Vec<u64> = sizes
        .split(|c: char| c == ',' || c.is_whitespace())
        .filter(|s| !s.is_empty())
        .map(|s| s.parse().map_err(|_| format!("not a size: {s}")))
        .collect::<Result<_, _>>()?;
    let par = lpt_partition(&sizes, ranks);
    let loads = rank_loads(&sizes, &par, ranks);
    let makespan = loads.iter().copied().max().unwrap_or(0);
    let optimal = (sizes.len() <= EXACT_LIMIT).then(|| optimal_makespan(&sizes, ranks));
    Ok(json(&Schedule { ranks: par, loads, makespan, optimal }))
}

pub fn graph_json(reads: &str, graph: &str, grid: usize) -> Result<String, String> {
    let config = PipelineConfig { grid, ..Default::default() };
    config.validate().map_err(|e| e.to_string())?;
    let store = parse_fasta(reads).map_err(|e| e.to_string())?;
    let edges = parse_string_graph(graph, &store).map_err(|e| e.to_string())?;
    let output = run_pipeline(&config, &store, Some(&edges)).map_err(|e| e.to_string())?;
    Ok(json(&GraphRun { fasta: output.to_fasta(), chains: chain_dump(&output.contigs) }))
}

/// Synthesize a genome, sample error-free reads and assemble them.
#[wasm_bindgen]
pub fn assemble(genome_len: u32, read_len: u32, coverage: f64, grid: u32, seed: u32) -> Result<String, JsValue> {
    assemble_json(genome_len as usize, read_len as usize, coverage, grid as usize, seed as u64)
        .map_err(|e| JsValue::from_str(&e))
}

/// Greedy LPT placement of contig sizes (comma or space separated).
#[wasm_bindgen]
pub fn schedule(sizes: &str, ranks: u32) -> Result<String, JsValue> {
    schedule_json(sizes, ranks as usize).map_err(|e| JsValue::from_str(&e))
}

/// Contigs from reads in FASTA and a string graph in TSV.
#[wasm_bindgen]
pub fn assemble_graph(reads: &str, graph: &str, grid: u32) -> Result<String, JsValue> {
    graph_json(reads, graph, grid as usize).map_err(|e| JsValue::from_str(&e))
}
