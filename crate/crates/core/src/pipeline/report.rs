use std::fmt::Write as _;

use serde::Serialize;

use super::{PipelineConfig, PipelineOutput, PipelineStats, QualityReport, StageTiming, PHASES};

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct PhaseBytes {
    pub phase: String,
    pub bytes: u64,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct CommSummary {
    pub supersteps: u64,
    pub messages: u64,
    pub bytes: u64,
    /// In execution order; phases without traffic are listed with zero.
    pub phases: Vec<PhaseBytes>,
}

/// Run summary. Field order is the JSON key order; `timings` comes last so
/// everything before it is reproducible byte for byte.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Report {
    pub config: PipelineConfig,
    pub stats: PipelineStats,
    pub rank_loads: Vec<u64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub quality: Option<QualityReport>,
    pub communication: CommSummary,
    pub timings: Vec<StageTiming>,
}

impl Report {
    pub fn new(config: &PipelineConfig, output: &PipelineOutput, quality: Option<QualityReport>) -> Self {
        let by_phase = output.ledger.bytes_by_phase();
        let phases = PHASES
            .iter()
            .map(|&p| PhaseBytes { phase: p.to_string(), bytes: by_phase.get(p).copied().unwrap_or(0) })
            .collect();
        Report {
            config: config.clone(),
            stats: output.stats.clone(),
            rank_loads: output.rank_loads.clone(),
            quality,
            communication: CommSummary {
                supersteps: output.ledger.supersteps(),
                messages: output.ledger.total_msgs(),
                bytes: output.ledger.bytes_sent(),
                phases,
            },
            timings: output.timings.clone(),
        }
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("report serializes");
        s.push('\n');
        s
    }

    /// The same report with timings cleared.
    pub fn without_timings(&self) -> Self {
        Report { timings: Vec::new(), ..self.clone() }
    }

    pub fn to_text(&self) -> String {
        let s = &self.stats;
        let c = &self.config;
        let mut out = String::new();
        let _ = writeln!(out, "grid {}  k {}  t {}  fuzz {}  seed {}", c.grid, c.k, c.t, c.fuzz, c.seed);
        let _ = writeln!(out, "reads {} ({} bases), {} k-mers", s.reads, s.bases, s.kmers);
        let _ = writeln!(
            out,
            "overlaps {} of {} candidates, {} contained reads, {} transitive edges removed",
            s.overlap_edges, s.candidate_pairs, s.contained_reads, s.transitive_edges
        );
        let _ = writeln!(
            out,
            "string graph {} edges, {} branch vertices masked, {} components",
            s.string_graph_edges, s.branch_vertices, s.components
        );
        let _ = writeln!(
            out,
            "contigs {} ({} circular, {} singletons), {} bases, longest {}",
            s.contigs, s.circular_contigs, s.singletons, s.assembled_bases, s.longest_contig
        );
        let loads: Vec<String> = self.rank_loads.iter().map(|l| l.to_string()).collect();
        let _ = writeln!(out, "rank loads {}", loads.join(" "));
        if let Some(q) = &self.quality {
            let _ = writeln!(out, "completeness {:.2}%  misassembled {}", q.completeness, q.misassembled);
        }
        let m = &self.communication;
        let _ = writeln!(out, "communication {} supersteps, {} messages, {} bytes", m.supersteps, m.messages, m.bytes);
        for ph in &m.phases {
            let t = self.timings.iter().find(|t| t.stage == ph.phase).map_or(0.0, |t| t.millis);
            let _ = writeln!(out, "  {:<11} {:>12} bytes {:>10.2} ms", ph.phase, ph.bytes, t);
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::pipeline::{parse_string_graph, run_pipeline};
    use crate::seqstore::ReadStore;

    fn report(grid: usize) -> Report {
        let store = ReadStore::from_seqs(&["AGAACT", "AACTGAAG", "TGAAGAA"]).unwrap();
        let edges = parse_string_graph("0 1 forward 4 1 0\n1 2 forward 2 4 2\n", &store).unwrap();
        let cfg = PipelineConfig { grid, ..Default::default() };
        Report::new(&cfg, &run_pipeline(&cfg, &store, Some(&edges)).unwrap(), None)
    }

    #[test]
    fn key_order_is_fixed() {
        let json = report(4).to_json();
        let keys = ["\"config\"", "\"stats\"", "\"rank_loads\"", "\"communication\"", "\"timings\""];
        let at: Vec<usize> = keys.iter().map(|k| json.find(k).unwrap()).collect();
        assert!(at.windows(2).all(|w| w[0] < w[1]), "{json}");
        assert!(!json.contains("\"quality\""));
    }

    #[test]
    fn reproducible_without_timings() {
        assert_eq!(report(4).without_timings().to_json(), report(4).without_timings().to_json());
    }

    #[test]
    fn text_lists_every_phase() {
        let text = report(1).to_text();
        assert!(PHASES.iter().all(|p| text.contains(p)), "{text}");
    }
}
