use std::hint::black_box;

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use hues_core::colorlab::{Board, CellPos};
use hues_core::exec::Execution;
use hues_core::harness::{run_experiment, ExperimentConfig, HumanRecord, HumanResponseSet, WordList, REFERENCE_WORDS};
use hues_core::providers::MockProvider;
use hues_core::stats::{permutation_test, Point};

const MODES: [(&str, Execution); 2] = [("sequential", Execution::Sequential), ("parallel", Execution::Parallel)];

fn permutation(c: &mut Criterion) {
    let a: Vec<Point> = (0..6).map(|i| Point::new((i as f64 * 0.7).sin(), (i as f64 * 1.3).cos())).collect();
    let b: Vec<Point> =
        (0..5).map(|i| Point::new(0.4 + (i as f64 * 0.9).cos(), 0.2 + (i as f64 * 0.5).sin())).collect();
    let mut group = c.benchmark_group("permutation_test_20k");
    for (name, mode) in MODES {
        group.bench_function(BenchmarkId::from_parameter(name), |bench| {
            bench.iter(|| permutation_test(black_box(&a), black_box(&b), 20_000, 7, mode).unwrap())
        });
    }
    group.finish();
}

fn experiment(c: &mut Criterion) {
    let board = Board::synthetic();
    let words = WordList::reference();
    let mock =
        MockProvider::new(REFERENCE_WORDS.iter().enumerate().map(|(i, w)| (*w, CellPos::from_index(i * 14).unwrap())));
    let mut humans = HumanResponseSet::default();
    for (i, w) in REFERENCE_WORDS.iter().enumerate() {
        for s in 0..6 {
            let pos = CellPos::from_index((i * 14 + s * 31) % 480).unwrap();
            humans
                .insert(HumanRecord { subject: format!("s{s}"), word: w.to_string(), row: pos.row, col: pos.col })
                .unwrap();
        }
    }
    let mut group = c.benchmark_group("experiment_34_words");
    group.sample_size(10);
    for (name, mode) in MODES {
        let cfg = ExperimentConfig { execution: mode, permutations: Some(2_000), ..ExperimentConfig::default() };
        group.bench_function(BenchmarkId::from_parameter(name), |bench| {
            bench.iter(|| run_experiment(&board, &words, &mock, &humans, &cfg).unwrap())
        });
    }
    group.finish();
}

criterion_group!(benches, permutation, experiment);
criterion_main!(benches);
