//! End-to-end driver: reads in, contigs out, with per-stage statistics,
//! timings and the communication ledger of the virtual grid.

mod eval;
mod graph_io;
mod report;
mod synth;

use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::contig::{
    branch_removal, connected_components, contig_sizes, induced_subgraph, local_assembly, lpt_distributed, rank_loads,
    Contig,
};
use crate::gridsim::{CommLedger, Grid, GridTopology, Partition, Rank};
use crate::overlap::{
    align_filter, candidate_overlaps, kmer_matrix, prune_contained, transitive_reduction, DEFAULT_FUZZ,
    DEFAULT_MAX_ROUNDS, MAX_K,
};
use crate::seqstore::{exchange_reads, write_fasta, ReadId, ReadStore};
use crate::spmat::{DistSparseMatrix, EdgeLabel};

pub use eval::{evaluate, locate, QualityReport};
pub use graph_io::{chain_dump, parse_string_graph, write_string_graph};
pub use report::{CommSummary, PhaseBytes, Report};
pub use synth::{coverage_gaps, synth_genome, synth_reads, ReadLayout};

/// Ledger phases in execution order.
pub const PHASES: [&str; 12] = [
    "kmer",
    "candidates",
    "align",
    "contained",
    "transitive",
    "branch",
    "components",
    "sizes",
    "lpt",
    "induced",
    "reads",
    "assembly",
];

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum PipelineError {
    #[error("invalid configuration: {0}")]
    Config(String),
    #[error("stage {stage} failed: {message}")]
    Stage { stage: &'static str, message: String },
}

impl PipelineError {
    fn stage(stage: &'static str) -> impl FnOnce(String) -> PipelineError {
        move |message| PipelineError::Stage { stage, message }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct PipelineConfig {
    pub k: usize,
    /// Minimum exact overlap length.
    pub t: usize,
    pub fuzz: u32,
    /// Number of virtual ranks, a perfect square.
    pub grid: usize,
    pub max_msg_bytes: usize,
    pub seed: u64,
    /// k-mers seen in more reads than this are dropped.
    pub max_kmer_freq: usize,
    pub max_tr_rounds: usize,
    /// Also emit reads left in no contig.
    pub emit_singletons: bool,
}

impl Default for PipelineConfig {
    fn default() -> Self {
        PipelineConfig {
            k: 17,
            t: 50,
            fuzz: DEFAULT_FUZZ,
            grid: 1,
            max_msg_bytes: crate::gridsim::DEFAULT_MAX_MSG_BYTES,
            seed: 7,
            max_kmer_freq: 8,
            max_tr_rounds: DEFAULT_MAX_ROUNDS,
            emit_singletons: false,
        }
    }
}

impl PipelineConfig {
    pub fn validate(&self) -> Result<(), PipelineError> {
        let fail = |m: String| Err(PipelineError::Config(m));
        if GridTopology::new(self.grid).is_err() {
            return fail(format!("grid size {} is not a positive perfect square", self.grid));
        }
        if self.k == 0 || self.k.is_multiple_of(2) {
            return fail(format!("k must be odd, got {}", self.k));
        }
        if self.k > MAX_K {
            return fail(format!("k = {} exceeds {MAX_K}", self.k));
        }
        if self.t < self.k {
            return fail(format!("t = {} is below k = {}", self.t, self.k));
        }
        if self.max_msg_bytes == 0 {
            return fail("max message size must be positive".into());
        }
        if self.max_kmer_freq == 0 {
            return fail("max k-mer frequency must be positive".into());
        }
        if self.max_tr_rounds == 0 {
            return fail("transitive reduction needs at least one round".into());
        }
        Ok(())
    }
}

/// Counts collected along the way. Edge counts are undirected.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct PipelineStats {
    pub reads: usize,
    pub bases: usize,
    pub kmers: usize,
    pub candidate_pairs: usize,
    pub overlap_edges: usize,
    pub contained_reads: usize,
    pub transitive_edges: usize,
    pub string_graph_edges: usize,
    pub branch_vertices: usize,
    pub components: usize,
    pub contigs: usize,
    pub circular_contigs: usize,
    pub singletons: usize,
    pub assembled_bases: usize,
    pub longest_contig: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct StageTiming {
    pub stage: String,
    pub millis: f64,
}

#[derive(Clone, Debug)]
pub struct PipelineOutput {
    /// Sorted by their read-id list.
    pub contigs: Vec<Contig>,
    /// Reads in no contig, ascending; filled only with `emit_singletons`.
    pub singletons: Vec<(ReadId, Vec<u8>)>,
    pub stats: PipelineStats,
    pub rank_loads: Vec<u64>,
    pub ledger: CommLedger,
    pub timings: Vec<StageTiming>,
}

impl PipelineOutput {
    /// Contig sequences followed by singletons.
    pub fn sequences(&self) -> Vec<&[u8]> {
        self.contigs
            .iter()
            .map(|c| c.sequence.as_slice())
            .chain(self.singletons.iter().map(|(_, s)| s.as_slice()))
            .collect()
    }

    /// FASTA with headers `contig_<k> len=<L> reads=<q>`.
    pub fn to_fasta(&self) -> String {
        let mut records: Vec<(String, &[u8])> = self
            .contigs
            .iter()
            .enumerate()
            .map(|(k, c)| {
                let tag = if c.chain.circular { " circular" } else { "" };
                (format!("contig_{k} len={} reads={}{tag}", c.sequence.len(), c.chain.len()), c.sequence.as_slice())
            })
            .collect();
        let base = records.len();
        for (i, (id, s)) in self.singletons.iter().enumerate() {
            records.push((format!("contig_{} len={} reads=1 read={id}", base + i, s.len()), s.as_slice()));
        }
        let mut out = Vec::new();
        write_fasta(&mut out, records.iter().map(|(h, s)| (h.as_str(), *s))).expect("writing to memory");
        String::from_utf8(out).expect("FASTA is ASCII")
    }
}

struct Stopwatch {
    #[cfg(not(target_arch = "wasm32"))]
    start: std::time::Instant,
}

impl Stopwatch {
    fn start() -> Self {
        Stopwatch {
            #[cfg(not(target_arch = "wasm32"))]
            start: std::time::Instant::now(),
        }
    }

    fn millis(&self) -> f64 {
        #[cfg(not(target_arch = "wasm32"))]
        return self.start.elapsed().as_secs_f64() * 1e3;
        #[cfg(target_arch = "wasm32")]
        0.0
    }
}

struct Run<'a> {
    grid: Grid,
    timings: Vec<StageTiming>,
    clock: Option<(&'a str, Stopwatch)>,
}

impl<'a> Run<'a> {
    fn enter(&mut self, phase: &'a str) {
        self.finish();
        self.grid.set_phase(phase);
        self.clock = Some((phase, Stopwatch::start()));
    }

    fn finish(&mut self) {
        if let Some((stage, watch)) = self.clock.take() {
            self.timings.push(StageTiming { stage: stage.to_string(), millis: watch.millis() });
        }
    }
}

fn undirected(nnz: usize) -> usize {
    nnz / 2
}

/// Runs every stage over a fresh grid. With `string_graph` set, the overlap
/// stages are skipped and the given symmetric edge list is used as S.
///
/// Read ids must be `0..n`.
pub fn run_pipeline(
    config: &PipelineConfig,
    store: &ReadStore,
    string_graph: Option<&[(usize, usize, EdgeLabel)]>,
) -> Result<PipelineOutput, PipelineError> {
    config.validate()?;
    let n = store.len();
    let sorted = store.sorted();
    if sorted.ids().iter().enumerate().any(|(i, &id)| i != id) {
        return Err(PipelineError::Config("read ids must be 0..n".into()));
    }
    let mut grid = Grid::new(config.grid).map_err(|e| PipelineError::Config(e.to_string()))?;
    grid.set_max_msg_bytes(config.max_msg_bytes).map_err(|e| PipelineError::Config(e.to_string()))?;
    grid.set_schedule_seed(config.seed);
    let topo = grid.topology();
    let p = topo.p_total();
    let pieces = sorted.split(&Partition::grid_aligned(n, topo.side()));
    let mut run = Run { grid, timings: Vec::new(), clock: None };
    let mut stats = PipelineStats { reads: n, bases: store.total_bases(), ..Default::default() };
    let mut contained: BTreeSet<ReadId> = BTreeSet::new();

    let s = match string_graph {
        Some(edges) => {
            if let Some(&(u, v, _)) = edges.iter().find(|e| e.0 >= n || e.1 >= n) {
                return Err(PipelineError::Config(format!("edge ({u}, {v}) names a read outside 0..{n}")));
            }
            DistSparseMatrix::from_triplets(topo, n, n, edges.to_vec(), |a, b| *a = b)
                .map_err(|e| PipelineError::Config(e.to_string()))?
        }
        None => {
            run.enter("kmer");
            let index = kmer_matrix(&mut run.grid, &pieces, n, config.k, config.max_kmer_freq)
                .map_err(|e| PipelineError::stage("kmer")(e.to_string()))?;
            stats.kmers = index.n_kmers();
            run.enter("candidates");
            let c = candidate_overlaps(&mut run.grid, &index)
                .map_err(|e| PipelineError::stage("candidates")(e.to_string()))?;
            stats.candidate_pairs = undirected(c.nnz());
            run.enter("align");
            let r = align_filter(&mut run.grid, &c, &pieces, config.k, config.t)
                .map_err(|e| PipelineError::stage("align")(e.to_string()))?;
            run.enter("contained");
            let (r, masked) =
                prune_contained(&mut run.grid, &r).map_err(|e| PipelineError::stage("contained")(e.to_string()))?;
            stats.overlap_edges = undirected(r.nnz());
            stats.contained_reads = masked.len();
            contained.extend(masked);
            run.enter("transitive");
            let s = transitive_reduction(&mut run.grid, &r, config.fuzz, config.max_tr_rounds)
                .map_err(|e| PipelineError::stage("transitive")(e.to_string()))?;
            stats.transitive_edges = stats.overlap_edges - undirected(s.nnz());
            s
        }
    };
    stats.string_graph_edges = undirected(s.nnz());

    run.enter("branch");
    let br = branch_removal(&mut run.grid, &s).map_err(|e| PipelineError::stage("branch")(e.to_string()))?;
    stats.branch_vertices = br.masked.len();
    run.enter("components");
    let v = connected_components(&mut run.grid, &br.l)
        .map_err(|e| PipelineError::stage("components")(e.to_string()))?;
    stats.components = v.n_contigs;
    run.enter("sizes");
    let sizes = contig_sizes(&mut run.grid, &v).map_err(|e| PipelineError::stage("sizes")(e.to_string()))?;
    run.enter("lpt");
    let par = lpt_distributed(&mut run.grid, &sizes).map_err(|e| PipelineError::stage("lpt")(e.to_string()))?;
    let loads = rank_loads(&sizes.gather(), &par, p);
    run.enter("induced");
    let graphs = induced_subgraph(&mut run.grid, &br.l, &v, &par)
        .map_err(|e| PipelineError::stage("induced")(e.to_string()))?;
    run.enter("reads");
    let assignment: BTreeMap<ReadId, Rank> =
        (0..n).filter_map(|u| v.label(u).map(|c| (u, par[c]))).collect();
    let needed: BTreeSet<ReadId> = assignment.keys().copied().collect();
    let local_reads = exchange_reads(&mut run.grid, &pieces, &assignment, &needed)
        .map_err(|e| PipelineError::stage("reads")(e.to_string()))?;
    run.enter("assembly");
    let mut contigs = Vec::new();
    for (rank, (graph, reads)) in graphs.iter().zip(&local_reads).enumerate() {
        let mut local =
            local_assembly(graph, reads, rank).map_err(|e| PipelineError::stage("assembly")(e.to_string()))?;
        contigs.append(&mut local);
    }
    contigs.sort_by(|a, b| a.chain.reads.cmp(&b.chain.reads));
    run.finish();

    let in_contig: BTreeSet<ReadId> = contigs.iter().flat_map(|c| c.chain.reads.iter().copied()).collect();
    let singletons: Vec<(ReadId, Vec<u8>)> = if config.emit_singletons {
        (0..n)
            .filter(|u| !in_contig.contains(u) && !contained.contains(u))
            .map(|u| (u, sorted.seq(u).expect("ids are 0..n").to_vec()))
            .collect()
    } else {
        Vec::new()
    };

    stats.contigs = contigs.len() + singletons.len();
    stats.circular_contigs = contigs.iter().filter(|c| c.chain.circular).count();
    stats.singletons = singletons.len();
    let lengths = contigs.iter().map(|c| c.sequence.len()).chain(singletons.iter().map(|(_, s)| s.len()));
    stats.assembled_bases = lengths.clone().sum();
    stats.longest_contig = lengths.max().unwrap_or(0);

    Ok(PipelineOutput {
        contigs,
        singletons,
        stats,
        rank_loads: loads,
        ledger: run.grid.ledger().clone(),
        timings: run.timings,
    })
}
