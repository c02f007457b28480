use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use contigforge::pipeline::{
    chain_dump, evaluate, parse_string_graph, run_pipeline, synth_genome, synth_reads, PipelineConfig,
    PipelineError, Report,
};
use contigforge::seqstore::{fasta_read, write_fasta, ReadStore};

/// Long-read contig assembly on a simulated processor grid.
#[derive(Parser)]
#[command(name = "contigforge", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Assemble contigs from reads.
    Run(RunArgs),
    /// Write a random genome and error-free reads sampled from it.
    Synth(SynthArgs),
    /// Score contigs against a reference.
    Eval(EvalArgs),
}

#[derive(Args)]
struct RunArgs {
    /// Reads in FASTA; ids follow record order.
    #[arg(long)]
    input: PathBuf,
    /// Precomputed string graph (TSV: u v direction overhang pre post); skips overlap detection.
    #[arg(long)]
    string_graph: Option<PathBuf>,
    /// Number of virtual ranks (a perfect square).
    #[arg(long, default_value_t = 1)]
    grid: usize,
    #[arg(short, default_value_t = 17)]
    k: usize,
    /// Minimum overlap length.
    #[arg(short, default_value_t = 50)]
    t: usize,
    #[arg(long, default_value_t = 10)]
    fuzz: u32,
    #[arg(long, default_value_t = 7)]
    seed: u64,
    #[arg(long, default_value_t = 65536)]
    max_msg_bytes: usize,
    /// Drop k-mers found in more reads than this.
    #[arg(long, default_value_t = 8)]
    max_kmer_freq: usize,
    #[arg(long, default_value_t = 64)]
    max_tr_rounds: usize,
    /// Also write reads that ended up in no contig.
    #[arg(long)]
    emit_singletons: bool,
    /// Contig FASTA output (stdout when absent).
    #[arg(long)]
    out: Option<PathBuf>,
    /// JSON report.
    #[arg(long)]
    report: Option<PathBuf>,
    /// Per-link communication ledger (TSV).
    #[arg(long)]
    ledger: Option<PathBuf>,
    /// Chain dump (TSV): contig, rank, reads, orientations, steps.
    #[arg(long)]
    chains: Option<PathBuf>,
    /// Reference FASTA; adds completeness and misassemblies to the report.
    #[arg(long)]
    reference: Option<PathBuf>,
}

#[derive(Args)]
struct SynthArgs {
    #[arg(long, default_value_t = 10_000)]
    length: usize,
    #[arg(long, default_value_t = 200)]
    read_len: usize,
    #[arg(long, default_value_t = 30.0)]
    coverage: f64,
    #[arg(long, default_value_t = 7)]
    seed: u64,
    /// Reads FASTA output.
    #[arg(long)]
    reads: PathBuf,
    /// Reference FASTA output.
    #[arg(long)]
    reference: PathBuf,
    /// True layout (TSV: read, start, strand).
    #[arg(long)]
    layout: Option<PathBuf>,
}

#[derive(Args)]
struct EvalArgs {
    #[arg(long)]
    contigs: PathBuf,
    #[arg(long)]
    reference: PathBuf,
}

enum Failure {
    Config(String),
    Stage(String),
}

impl From<PipelineError> for Failure {
    fn from(e: PipelineError) -> Self {
        match e {
            PipelineError::Config(_) => Failure::Config(e.to_string()),
            PipelineError::Stage { .. } => Failure::Stage(e.to_string()),
        }
    }
}

fn config_err(e: impl ToString) -> Failure {
    Failure::Config(e.to_string())
}

fn write(path: &Path, text: &str) -> Result<(), Failure> {
    fs::write(path, text).map_err(|e| Failure::Config(format!("cannot write {}: {e}", path.display())))
}

fn read_reference(path: &Path) -> Result<Vec<u8>, Failure> {
    let store = fasta_read(path).map_err(config_err)?;
    let mut seq = Vec::new();
    for (_, s) in store.iter() {
        seq.extend_from_slice(s);
    }
    Ok(seq)
}

fn run(args: RunArgs) -> Result<(), Failure> {
    let config = PipelineConfig {
        k: args.k,
        t: args.t,
        fuzz: args.fuzz,
        grid: args.grid,
        max_msg_bytes: args.max_msg_bytes,
        seed: args.seed,
        max_kmer_freq: args.max_kmer_freq,
        max_tr_rounds: args.max_tr_rounds,
        emit_singletons: args.emit_singletons,
    };
    config.validate()?;
    let store = fasta_read(&args.input).map_err(config_err)?;
    let graph = match &args.string_graph {
        Some(path) => {
            let text = fs::read_to_string(path)
                .map_err(|e| Failure::Config(format!("cannot read {}: {e}", path.display())))?;
            Some(parse_string_graph(&text, &store)?)
        }
        None => None,
    };
    let reference = args.reference.as_deref().map(read_reference).transpose()?;

    let output = run_pipeline(&config, &store, graph.as_deref())?;
    let fasta = output.to_fasta();
    match &args.out {
        Some(path) => write(path, &fasta)?,
        None => print!("{fasta}"),
    }
    let quality = reference.map(|r| evaluate(&output.sequences(), &r));
    let report = Report::new(&config, &output, quality);
    if let Some(path) = &args.report {
        write(path, &report.to_json())?;
    }
    if let Some(path) = &args.ledger {
        write(path, &output.ledger.to_tsv())?;
    }
    if let Some(path) = &args.chains {
        write(path, &chain_dump(&output.contigs))?;
    }
    eprint!("{}", report.to_text());
    Ok(())
}

fn synth(args: SynthArgs) -> Result<(), Failure> {
    if args.length == 0 {
        return Err(Failure::Config("genome length must be positive".into()));
    }
    let genome = synth_genome(args.length, args.seed);
    let (reads, layout) = synth_reads(&genome, args.read_len, args.coverage, args.seed)?;
    write(&args.reads, &fasta_text(&reads))?;
    let mut reference = Vec::new();
    let header = format!("reference length={} seed={}", args.length, args.seed);
    write_fasta(&mut reference, [(header.as_str(), genome.as_slice())]).map_err(config_err)?;
    write(&args.reference, &String::from_utf8_lossy(&reference))?;
    if let Some(path) = &args.layout {
        let mut tsv = String::from("read\tstart\tstrand\n");
        for (i, l) in layout.iter().enumerate() {
            tsv.push_str(&format!("{i}\t{}\t{}\n", l.start, l.strand.symbol()));
        }
        write(path, &tsv)?;
    }
    eprintln!("{} reads of {} bases from a {} base genome", reads.len(), args.read_len, args.length);
    Ok(())
}

fn fasta_text(store: &ReadStore) -> String {
    let mut out = Vec::new();
    let records = store.iter().map(|(id, seq)| (store.header(id).expect("id from the store"), seq));
    write_fasta(&mut out, records).expect("writing to memory");
    String::from_utf8(out).expect("FASTA is ASCII")
}

fn eval(args: EvalArgs) -> Result<(), Failure> {
    let contigs = fasta_read(&args.contigs).map_err(config_err)?;
    let reference = read_reference(&args.reference)?;
    let seqs: Vec<&[u8]> = contigs.iter().map(|(_, s)| s).collect();
    print!("{}", evaluate(&seqs, &reference).to_json());
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Run(a) => run(a),
        Command::Synth(a) => synth(a),
        Command::Eval(a) => eval(a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Config(m)) => {
            eprintln!("error: {m}");
            ExitCode::from(2)
        }
        Err(Failure::Stage(m)) => {
            eprintln!("error: {m}");
            ExitCode::from(3)
        }
    }
}
