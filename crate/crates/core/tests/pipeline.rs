use contigforge::pipeline::{
    coverage_gaps, evaluate, run_pipeline, synth_genome, synth_reads, PipelineConfig, PipelineError, Report,
};
use contigforge::seqstore::ReadStore;
use proptest::prelude::*;

fn config(grid: usize, seed: u64) -> PipelineConfig {
    PipelineConfig { grid, seed, k: 17, t: 40, max_kmer_freq: 64, ..Default::default() }
}

#[test]
fn same_seed_same_report_and_contigs() {
    let genome = synth_genome(3000, 21);
    let (store, _) = synth_reads(&genome, 150, 20.0, 21).unwrap();
    let cfg = config(4, 21);
    let a = run_pipeline(&cfg, &store, None).unwrap();
    let b = run_pipeline(&cfg, &store, None).unwrap();
    assert_eq!(a.to_fasta(), b.to_fasta());
    assert_eq!(a.ledger, b.ledger);
    let ra = Report::new(&cfg, &a, Some(evaluate(&a.sequences(), &genome)));
    let rb = Report::new(&cfg, &b, Some(evaluate(&b.sequences(), &genome)));
    assert_eq!(ra.without_timings().to_json(), rb.without_timings().to_json());
}

#[test]
fn schedule_seed_does_not_change_contigs() {
    let genome = synth_genome(3000, 22);
    let (store, _) = synth_reads(&genome, 150, 20.0, 22).unwrap();
    let a = run_pipeline(&config(9, 1), &store, None).unwrap();
    let b = run_pipeline(&config(9, 2), &store, None).unwrap();
    assert_eq!(a.to_fasta(), b.to_fasta());
    assert_eq!(a.ledger.bytes_sent(), b.ledger.bytes_sent());
}

#[test]
fn message_limit_only_changes_message_counts() {
    let genome = synth_genome(2000, 23);
    let (store, _) = synth_reads(&genome, 150, 15.0, 23).unwrap();
    let big = run_pipeline(&config(4, 3), &store, None).unwrap();
    let small = run_pipeline(&PipelineConfig { max_msg_bytes: 64, ..config(4, 3) }, &store, None).unwrap();
    assert_eq!(big.to_fasta(), small.to_fasta());
    assert_eq!(big.ledger.bytes_sent(), small.ledger.bytes_sent());
    assert!(small.ledger.total_msgs() > big.ledger.total_msgs());
    assert!(small.ledger.is_conserved());
}

#[test]
fn low_coverage_breaks_into_several_contigs() {
    let genome = synth_genome(6000, 24);
    let (store, layout) = synth_reads(&genome, 200, 3.0, 24).unwrap();
    let gaps = coverage_gaps(&layout, 200, genome.len(), 40);
    assert!(gaps >= 3, "layout has {gaps} gaps");
    let cfg = PipelineConfig { emit_singletons: true, ..config(4, 24) };
    let out = run_pipeline(&cfg, &store, None).unwrap();
    // at most two of the gaps are genome ends
    assert!(out.sequences().len() >= gaps - 1, "{} contigs for {gaps} gaps", out.sequences().len());
    assert_eq!(evaluate(&out.sequences(), &genome).misassembled, 0);
}

#[test]
fn completeness_grows_with_coverage() {
    let median = |coverage: f64| {
        let mut c: Vec<f64> = (0..5)
            .map(|seed| {
                let genome = synth_genome(4000, 100 + seed);
                let (store, _) = synth_reads(&genome, 200, coverage, seed).unwrap();
                let cfg = PipelineConfig { emit_singletons: true, ..config(1, seed) };
                evaluate(&run_pipeline(&cfg, &store, None).unwrap().sequences(), &genome).completeness
            })
            .collect();
        c.sort_by(|a, b| a.partial_cmp(b).unwrap());
        c[2]
    };
    let (low, high) = (median(2.0), median(12.0));
    assert!(low <= high, "{low} > {high}");
}

#[test]
fn stage_errors_name_the_stage() {
    let store = ReadStore::from_seqs(&["ACGTACGTACGTACGTACGTAC", "ACGTAC"]).unwrap();
    let err = run_pipeline(&PipelineConfig { k: 9, t: 9, ..Default::default() }, &store, None).unwrap_err();
    assert!(matches!(err, PipelineError::Stage { stage: "kmer", .. }), "{err}");
    assert!(err.to_string().contains("kmer"));
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(12))]

    #[test]
    fn contigs_are_reference_substrings(seed in 0u64..10_000, grid in prop::sample::select(vec![1usize, 4, 9])) {
        let genome = synth_genome(2500, seed);
        let (store, _) = synth_reads(&genome, 150, 12.0, seed).unwrap();
        let out = run_pipeline(&config(grid, seed), &store, None).unwrap();
        let q = evaluate(&out.sequences(), &genome);
        prop_assert_eq!(q.misassembled, 0);
        prop_assert!(q.completeness <= 100.0 && q.misassembled <= q.contig_count);
        prop_assert!(out.ledger.is_conserved());
    }
}
