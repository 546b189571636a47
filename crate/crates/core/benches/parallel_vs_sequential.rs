use std::hint::black_box;
use std::sync::Arc;

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use num_bigint::BigInt;

use regseq_core::equation::{brute_force, solve_full, Budget, EquationProblem};
use regseq_core::mann::{solve_homogeneous, MannMonoid};
use regseq_core::{Exec, Operator, SequenceHandle, SequenceSpec};

fn problem(spec: SequenceSpec, cs: &[i64]) -> EquationProblem {
    let h = Arc::new(SequenceHandle::new(spec).unwrap());
    let ops = cs.iter().map(|&c| Operator::from_i64(&[c]).unwrap()).collect();
    EquationProblem::new(h, ops, BigInt::from(0)).unwrap()
}

const MODES: [(&str, Exec); 2] = [("sequential", Exec::Sequential), ("parallel", Exec::Parallel)];

fn brute(c: &mut Criterion) {
    let p = problem(SequenceSpec::fibonacci(), &[1, 1, -1, -1]);
    let mut g = c.benchmark_group("brute_force_4vars_n24");
    g.sample_size(10);
    for (name, exec) in MODES {
        g.bench_with_input(BenchmarkId::from_parameter(name), &exec, |b, &exec| {
            b.iter(|| brute_force(black_box(&p), 24, exec).unwrap())
        });
    }
    g.finish();
}

fn full(c: &mut Criterion) {
    let p = problem(SequenceSpec::power(2), &[1, 1, -1, -1]);
    let mut g = c.benchmark_group("solve_full_4vars_pow2");
    g.sample_size(10);
    for (name, exec) in MODES {
        let budget = Budget {
            exec,
            ..Budget::default()
        };
        g.bench_with_input(BenchmarkId::from_parameter(name), &budget, |b, budget| {
            b.iter(|| solve_full(black_box(&p), budget).unwrap())
        });
    }
    g.finish();
}

fn mann(c: &mut Criterion) {
    let m = MannMonoid::new(&[2, 3]).unwrap();
    let a: Vec<BigInt> = [1, 1, -1].iter().map(|&x| BigInt::from(x)).collect();
    let mut g = c.benchmark_group("mann_homogeneous_e12");
    g.sample_size(10);
    for (name, exec) in MODES {
        g.bench_with_input(BenchmarkId::from_parameter(name), &exec, |b, &exec| {
            b.iter(|| solve_homogeneous(black_box(&a), &m, 12, exec).unwrap())
        });
    }
    g.finish();
}

criterion_group!(benches, brute, full, mann);
criterion_main!(benches);
