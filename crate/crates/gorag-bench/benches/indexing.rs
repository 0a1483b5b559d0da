//! Indexing throughput: full synthetic runs and single online updates.

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};

use gorag_bench::graph_of_size;
use gorag_core::corpus::{CorpusStats, TextDoc};
use gorag_core::graph::online_index;
use gorag_core::harness::{execute_run, SynthSpec};
use gorag_core::retrieval::TerminalSet;

fn bench_full_run(c: &mut Criterion) {
    let mut group = c.benchmark_group("full_run");
    group.sample_size(10);
    for &labels in &[8usize, 16] {
        let spec = SynthSpec {
            labels,
            rounds: 2,
            train_per_label: 4,
            test_per_round: 16,
            ..SynthSpec::default()
        };
        let dir = tempfile::tempdir_in(std::env::temp_dir()).expect("temp dir");
        let output = gorag_core::harness::synth::generate(&spec);
        let dataset = dir.path().join("dataset.jsonl");
        gorag_core::corpus::write_dataset(&output.records, &dataset).unwrap();
        let config = output.to_run_config(&dataset);
        group.bench_with_input(
            BenchmarkId::from_parameter(labels),
            &config,
            |b, config| b.iter(|| execute_run(config).unwrap()),
        );
    }
    group.finish();
}

fn bench_online_index(c: &mut Criterion) {
    let mut group = c.benchmark_group("online_index");
    group.sample_size(20);
    let base = graph_of_size(10_000, 31);
    let mut stats = CorpusStats::new();
    let doc = TextDoc::new("q", "fresh0 fresh1 fresh2 fresh3", None);
    let keywords: Vec<String> = (0..4).map(|i| format!("fresh{i}")).collect();
    stats.ingest_text(&doc, &keywords).unwrap();
    let terminals = TerminalSet {
        exist: Vec::new(),
        not_exist: keywords,
    };
    let label = base
        .labels()
        .keys()
        .next()
        .expect("graph has labels")
        .clone();
    group.bench_function("four_new_keywords", |b| {
        b.iter_batched(
            || base.clone(),
            |mut graph| online_index(&mut graph, &doc, &terminals, &label, &stats).unwrap(),
            criterion::BatchSize::LargeInput,
        )
    });
    group.finish();
}

criterion_group!(benches, bench_full_run, bench_online_index);
criterion_main!(benches);
