//! Acceptance battery. Prints one PASS/FAIL line per criterion and exits
//! nonzero if a criterion fails that is not listed in `KNOWN_FAILING`.
//!
//! Every expected value is recomputed here from scratch: sequence terms by
//! direct arithmetic, solution sets by exhaustive search.

use std::collections::{BTreeMap, BTreeSet};
use std::process::{Command, ExitCode};
use std::sync::Arc;
use std::time::{Duration, Instant};

use num_bigint::BigInt;
use num_rational::BigRational;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use regseq_cli::suite::{battery, equations, scalar_ops, sequences, table_2n_plus_n, DECIDE_EXAMPLES};
use regseq_core::axioms::{verify_ax6, AxiomBudget, AxiomOutcome};
use regseq_core::equation::{solve_full, solve_nondegenerate, Budget, EquationProblem, Validity};
use regseq_core::formula::{decide_str, DecideBudget, Verdict};
use regseq_core::mann::{solve_homogeneous, solve_unit, MannMonoid};
use regseq_core::syndetic::{cover_check, gap_runs, EnumerableSet};
use regseq_core::{classify, profile, Certificate, Exec, OperatorClass, ProofReason, SequenceHandle, SequenceSpec};

/// Criteria expected to fail, with the reason printed next to them.
const KNOWN_FAILING: &[(u32, &str)] = &[(
    8,
    "2^a+2^b has 27 consecutive elements 2..96 with gaps <= 16, so longest_run <= 5 cannot hold",
)];

fn int(v: i64) -> BigInt {
    BigInt::from(v)
}

/// First `n` terms of a reference sequence, computed directly.
fn terms(name: &str, n: usize) -> Vec<BigInt> {
    match name {
        "power2" => (0..n).map(|i| int(2).pow(i as u32)).collect(),
        "power3" => (0..n).map(|i| int(3).pow(i as u32)).collect(),
        "fibonacci" => {
            let mut v = vec![int(1), int(2)];
            while v.len() < n {
                let k = v.len();
                let next = &v[k - 1] + &v[k - 2];
                v.push(next);
            }
            v.truncate(n);
            v
        }
        "factorial" => {
            let mut v = Vec::with_capacity(n);
            let mut f = int(2);
            for i in 0..n {
                v.push(f.clone());
                f *= int(i as i64 + 3);
            }
            v
        }
        "sum_2n_3n" => (0..n).map(|i| int(2).pow(i as u32) + int(3).pow(i as u32)).collect(),
        "table_2n_plus_n" => (0..n).map(|i| int(2).pow(i as u32) + int(i as i64)).collect(),
        _ => unreachable!("unknown sequence {name}"),
    }
}

/// All tuples in `[0, n]^s` with `sum c_i r_{x_i} = z`, plus the
/// non-degenerate subset.
fn exhaustive(r: &[BigInt], cs: &[i64], z: i64, n: usize) -> (BTreeSet<Vec<usize>>, BTreeSet<Vec<usize>>) {
    let s = cs.len();
    let mut all = BTreeSet::new();
    let mut nondeg = BTreeSet::new();
    let mut t = vec![0usize; s];
    let z = int(z);
    loop {
        let vals: Vec<BigInt> = t.iter().zip(cs).map(|(&x, &c)| int(c) * &r[x]).collect();
        let sum: BigInt = vals.iter().sum();
        if sum == z {
            all.insert(t.clone());
            let distinct = t.iter().collect::<BTreeSet<_>>().len() == s;
            let vanishing = (1..(1usize << s) - 1).any(|mask| {
                (0..s)
                    .filter(|i| mask >> i & 1 == 1)
                    .map(|i| vals[i].clone())
                    .sum::<BigInt>()
                    == int(0)
            });
            if distinct && !vanishing {
                nondeg.insert(t.clone());
            }
        }
        let mut i = 0;
        loop {
            if i == s {
                return (all, nondeg);
            }
            t[i] += 1;
            if t[i] <= n {
                break;
            }
            t[i] = 0;
            i += 1;
        }
    }
}

fn handle(spec: SequenceSpec) -> Arc<SequenceHandle> {
    Arc::new(SequenceHandle::new(spec).unwrap())
}

struct Line {
    ok: bool,
    detail: String,
}

fn line(ok: bool, detail: impl Into<String>) -> Line {
    Line {
        ok,
        detail: detail.into(),
    }
}

fn operator_dichotomy() -> Line {
    let start = Instant::now();
    let ops = battery();
    let mut mismatches = Vec::new();
    let mut proved_counts = Vec::new();
    let mut bad_reason = false;
    for (name, spec) in sequences() {
        let h = handle(spec);
        let r = terms(name, 300 + 6);
        let mut proved = 0;
        for op in &ops {
            let zeros: BTreeSet<usize> = (0..=300)
                .filter(|&n| {
                    op.coeffs()
                        .iter()
                        .enumerate()
                        .map(|(i, c)| c * &r[n + i])
                        .sum::<BigInt>()
                        == int(0)
                })
                .collect();
            let class = classify(op, &h, 512).unwrap();
            let claimed: BTreeSet<usize> = match &class {
                OperatorClass::FiniteRoots { roots, .. } => roots.iter().copied().filter(|&n| n <= 300).collect(),
                OperatorClass::CofiniteZero { exceptions, .. } => {
                    (0..=300).filter(|n| !exceptions.contains(n)).collect()
                }
            };
            if claimed != zeros {
                mismatches.push(format!("{name} {:?}", op.coeffs()));
            }
            match class.certificate() {
                Certificate::Proved { reason } => {
                    proved += 1;
                    if name == "factorial" && reason == ProofReason::MinpolyDivides {
                        bad_reason = true;
                    }
                }
                Certificate::BoundedCheck { .. } => {}
            }
        }
        proved_counts.push((name, proved));
    }
    let elapsed = start.elapsed();
    let enough = proved_counts.iter().all(|&(_, p)| p >= 25);
    let ok = mismatches.is_empty() && enough && !bad_reason && elapsed < Duration::from_secs(60);
    line(
        ok,
        format!(
            "operator dichotomy: {} mismatches, proved per sequence {:?}, {:.1}s",
            mismatches.len(),
            proved_counts,
            elapsed.as_secs_f64()
        ),
    )
}

fn shift_pattern_completeness() -> Line {
    let mut failures = Vec::new();
    for (name, spec) in sequences() {
        let h = handle(spec);
        let r = terms(name, 21);
        for (eq, cs, z) in equations() {
            let p = EquationProblem::new(h.clone(), scalar_ops(&cs), int(z)).unwrap();
            let desc = solve_full(&p, &Budget::default()).unwrap();
            let (all, _) = exhaustive(&r, &cs, z, 20);
            if desc.instantiate(&h, 20).unwrap() != all {
                failures.push(format!("{name} {eq}"));
            }
        }
    }
    let h = handle(SequenceSpec::fibonacci());
    let p = EquationProblem::new(h, scalar_ops(&[1, 1, -1]), int(0)).unwrap();
    let nd = solve_nondegenerate(&p, &Budget::default()).unwrap();
    let offsets: BTreeSet<Vec<usize>> = nd.patterns.iter().map(|p| p.offsets.clone()).collect();
    let expected: BTreeSet<Vec<usize>> = [vec![0, 1, 2], vec![1, 0, 2]].into_iter().collect();
    let no_exceptions = nd
        .patterns
        .iter()
        .all(|p| matches!(&p.validity, Validity::CofiniteFrom { exceptions } if exceptions.is_empty()));
    let fib_ok = offsets == expected && no_exceptions && nd.sporadic.is_empty();
    line(
        failures.is_empty() && fib_ok,
        format!(
            "shift-pattern completeness: {} mismatching (sequence, equation) pairs, fibonacci patterns {:?}",
            failures.len(),
            offsets
        ),
    )
}

fn finiteness() -> Line {
    let mut rng = ChaCha8Rng::seed_from_u64(0x5eed);
    let seqs = sequences();
    let mut bad = Vec::new();
    let mut proved = 0;
    for i in 0..20 {
        let (name, spec) = seqs[rng.gen_range(0..seqs.len())].clone();
        let s = rng.gen_range(1..=3);
        let cs: Vec<i64> = (0..s)
            .map(|_| {
                let c = rng.gen_range(1..=5);
                if rng.gen_bool(0.5) {
                    c
                } else {
                    -c
                }
            })
            .collect();
        let z = loop {
            let z = rng.gen_range(-60..=60);
            if z != 0 {
                break z;
            }
        };
        let h = handle(spec);
        let p = EquationProblem::new(h, scalar_ops(&cs), int(z)).unwrap();
        let nd = solve_nondegenerate(&p, &Budget::default()).unwrap();
        if nd.certificate.is_proved() {
            proved += 1;
        }
        let (_, brute) = exhaustive(&terms(name, 21), &cs, z, 20);
        let found: BTreeSet<Vec<usize>> = nd.sporadic.iter().filter(|t| t.iter().all(|&x| x <= 20)).cloned().collect();
        if !nd.patterns.is_empty() || found != brute {
            bad.push(format!("#{i} {name} {cs:?}={z}"));
        }
    }
    line(
        bad.is_empty(),
        format!("finiteness for z != 0: {} of 20 problems wrong, {proved} proved, rest bounded-check", bad.len()),
    )
}

fn congruence_profiles() -> Line {
    let start = Instant::now();
    let cases = [
        ("power2", SequenceSpec::power(2), 3u64, (0usize, 2usize)),
        ("fibonacci", SequenceSpec::fibonacci(), 2, (0, 3)),
        ("factorial", SequenceSpec::Factorial, 4, (2, 1)),
    ];
    let mut got = Vec::new();
    let mut ok = true;
    for (name, spec, m, want) in cases {
        let p = profile(&handle(spec), m).unwrap();
        got.push((p.preperiod, p.period));
        let len = p.preperiod + 5 * p.period;
        let r = terms(name, len);
        let predicted = (0..len).all(|n| (&r[n] % int(m as i64)) == int(p.residue(n) as i64));
        ok &= (p.preperiod, p.period) == want && predicted;
    }
    let elapsed = start.elapsed();
    line(
        ok && elapsed < Duration::from_secs(1),
        format!("congruence profiles (pre, period) {got:?}, {:.3}s", elapsed.as_secs_f64()),
    )
}

fn ax6_violation() -> Line {
    let h = handle(table_2n_plus_n());
    let f = regseq_core::Operator::from_i64(&[2, -3, 1]).unwrap();
    let report = verify_ax6(&h, &[f.clone(), f.neg()], &AxiomBudget::default()).unwrap();
    let r = terms("table_2n_plus_n", 210);
    let fv = |n: usize| int(2) * &r[n] - int(3) * &r[n + 1] + &r[n + 2];
    match report.outcome {
        AxiomOutcome::Violation { witnesses, gaps, .. } => {
            let valid = witnesses
                .iter()
                .all(|w| w.len() == 2 && w.iter().all(|&x| x <= 200) && fv(w[0]) == fv(w[1]));
            let actual_gaps: Vec<usize> = witnesses.iter().map(|w| w[0].abs_diff(w[1])).collect();
            let increasing = actual_gaps.windows(2).all(|g| g[0] < g[1]);
            line(
                valid && increasing && witnesses.len() >= 3 && actual_gaps == gaps,
                format!("Ax.6 violation on 2^n+n: {} witnesses, gaps {gaps:?}", witnesses.len()),
            )
        }
        other => line(false, format!("Ax.6 on 2^n+n: expected a violation, got {other:?}")),
    }
}

fn decide_fragment() -> Line {
    let h = handle(SequenceSpec::power(2));
    let r = terms("power2", 64);
    let base = DecideBudget::default();
    let verdicts: Vec<Verdict> = DECIDE_EXAMPLES.iter().map(|s| decide_str(s, &h, &base).unwrap()).collect();
    let idx = |w: &BTreeMap<String, String>, k: &str| w[k].parse::<usize>().unwrap();
    let first = matches!(&verdicts[0], Verdict::False { certificate } if certificate.is_proved());
    let second = match &verdicts[1] {
        Verdict::True { witness } => &r[idx(witness, "x1")] + &r[idx(witness, "x2")] == int(12),
        _ => false,
    };
    let third = match &verdicts[2] {
        Verdict::True { witness } => {
            let x = idx(witness, "x");
            x > 1 && (&r[x] + int(2)) % int(3) == int(0)
        }
        _ => false,
    };
    let doubled = DecideBudget {
        scan: base.scan * 2,
        max_stabilization: base.max_stabilization * 2,
        max_int_range: base.max_int_range * 2,
        equation: Budget {
            max_offset: base.equation.max_offset * 2,
            max_anchor: base.equation.max_anchor * 2,
            exec: base.equation.exec,
        },
    };
    let extra = [
        "E x in R. D7(x)",
        "A x in R. D2(S(x))",
        "E x in R. f[-1, 1](x) = 3",
        "A t <= 3. D2(t) | D2(t + 1)",
        "E t <= 40. Sigma{D=[(x1+x2)]}(t) & D5(t)",
    ];
    let monotone = DECIDE_EXAMPLES.iter().chain(extra.iter()).all(|s| {
        let a = decide_str(s, &h, &base).unwrap();
        let b = decide_str(s, &h, &doubled).unwrap();
        match a {
            Verdict::Unknown { .. } => true,
            Verdict::True { .. } => b.is_true(),
            Verdict::False { .. } => b.is_false(),
        }
    });
    line(
        first && second && third && monotone,
        format!("decision fragment: examples {first}/{second}/{third}, monotone under doubled budget {monotone}"),
    )
}

fn mann_suite() -> Line {
    let start = Instant::now();
    let m = MannMonoid::new(&[2, 3]).unwrap();
    let q = [BigRational::from_integer(int(1)), BigRational::from_integer(int(-1))];
    let unit = solve_unit(&q, &m, 30, Exec::default()).unwrap();
    let got: BTreeSet<Vec<BigInt>> = unit.solutions.into_iter().collect();
    let want: BTreeSet<Vec<BigInt>> = [(2, 1), (3, 2), (4, 3), (9, 8)].iter().map(|&(a, b)| vec![int(a), int(b)]).collect();
    let unit_ok = got == want;

    let a = [int(1), int(1), int(-1)];
    let hom = solve_homogeneous(&a, &m, 20, Exec::default()).unwrap();
    let base: BTreeSet<Vec<BigInt>> = hom.base.iter().cloned().collect();
    let want_base: BTreeSet<Vec<BigInt>> = [[1, 1, 2], [1, 2, 3], [1, 3, 4], [1, 8, 9]]
        .iter()
        .map(|t| t.iter().map(|&x| int(x)).collect())
        .collect();
    let base_ok = base == want_base;

    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let sound = (0..20).all(|_| {
        let mult = int(2).pow(rng.gen_range(0..40)) * int(3).pow(rng.gen_range(0..25));
        hom.base.iter().all(|b| {
            let t: Vec<BigInt> = b.iter().map(|x| x * &mult).collect();
            &t[0] + &t[1] - &t[2] == int(0) && t.iter().all(in_23) && hom.in_family(&t)
        })
    });
    let elapsed = start.elapsed();
    line(
        unit_ok && base_ok && sound && elapsed < Duration::from_secs(30),
        format!(
            "Mann suite: unit set {unit_ok}, base families {base_ok}, 20 multipliers sound {sound}, {:.1}s",
            elapsed.as_secs_f64()
        ),
    )
}

fn in_23(x: &BigInt) -> bool {
    let mut x = x.clone();
    if x <= int(0) {
        return false;
    }
    for p in [2, 3] {
        while &x % int(p) == int(0) {
            x /= int(p);
        }
    }
    x == int(1)
}

/// Returns the line plus whether the parts not covered by the known failure hold.
fn syndetic_evidence() -> (Line, bool) {
    let n: u64 = 1 << 20;
    let sums = EnumerableSet::sums_of(handle(SequenceSpec::power(2)), 2);
    let report = gap_runs(&sums, n, 16).unwrap();

    let mut elems: Vec<u64> = (0..21).flat_map(|a| (a..21).map(move |b| (1u64 << a) + (1u64 << b))).filter(|&x| x <= n).collect();
    elems.sort_unstable();
    elems.dedup();
    let (mut best, mut cur) = (0, 0);
    for i in 0..elems.len() {
        cur = if i > 0 && elems[i] - elems[i - 1] <= 16 { cur + 1 } else { 1 };
        best = best.max(cur);
    }
    let faithful = report.longest_run == best && report.count == elems.len();

    let pow = EnumerableSet::sums_of(handle(SequenceSpec::power(2)), 1);
    let cover = cover_check(3, 4, &[pow], 1000, Exec::default()).unwrap();
    let cover_ok = match &cover {
        regseq_core::syndetic::CoverReport::Witness { witness, .. } => {
            witness % 4 == 3 && *witness <= 1000 && !witness.is_power_of_two()
        }
        _ => false,
    };
    let ok = report.longest_run <= 5 && cover_ok;
    (
        line(
            ok,
            format!(
                "syndetic evidence: longest_run {} (oracle {best}), cover-check witness {cover:?}",
                report.longest_run
            ),
        ),
        faithful && cover_ok,
    )
}

fn determinism() -> Line {
    let bin = env!("CARGO_BIN_EXE_regseq");
    let run = || Command::new(bin).arg("suite").output().expect("run regseq suite");
    let a = run();
    let b = run();
    let ok = a.status.success() && b.status.success() && a.stdout == b.stdout && !a.stdout.is_empty();
    line(ok, format!("determinism: two suite runs, {} bytes each, identical {}", a.stdout.len(), a.stdout == b.stdout))
}

fn main() -> ExitCode {
    let mut unexpected = Vec::new();
    let mut report = |id: u32, l: Line| {
        let unexpected = &mut unexpected;
        let known = KNOWN_FAILING.iter().find(|(k, _)| *k == id);
        let status = if l.ok { "PASS" } else { "FAIL" };
        match (l.ok, known) {
            (false, Some((_, why))) => println!("criterion {id}: {status} {} [known: {why}]", l.detail),
            _ => println!("criterion {id}: {status} {}", l.detail),
        }
        if !l.ok && known.is_none() {
            unexpected.push(id);
        }
    };
    report(1, operator_dichotomy());
    report(2, shift_pattern_completeness());
    report(3, finiteness());
    report(4, congruence_profiles());
    report(5, ax6_violation());
    report(6, decide_fragment());
    report(7, mann_suite());
    let (l8, faithful8) = syndetic_evidence();
    report(8, l8);
    report(9, determinism());
    if !faithful8 {
        unexpected.push(8);
    }
    if unexpected.is_empty() {
        ExitCode::SUCCESS
    } else {
        println!("unexpected failures: {unexpected:?}");
        ExitCode::FAILURE
    }
}
