use mpl_transient::bench::{bench_matrix, emit_csv, emit_json, gen_matrices, run_bench, GenSpec, CSV_HEADER};
use mpl_transient::graph::is_irreducible;
use mpl_transient::Rational;

#[test]
fn generator_is_deterministic_and_valid() {
    let spec = GenSpec { n: 6, m: 3, count: 25, seed: 42 };
    let first = gen_matrices(&spec).unwrap();
    assert_eq!(first, gen_matrices(&spec).unwrap());
    assert_ne!(first, gen_matrices(&GenSpec { seed: 43, ..spec }).unwrap());
    for a in &first {
        assert!(is_irreducible(a).unwrap());
        for i in 0..6 {
            let row: Vec<Rational> = a.row(i).iter().filter_map(|v| v.finite()).collect();
            assert_eq!(row.len(), 3);
            for v in row {
                assert!(v >= Rational::new(1, 5) && v <= Rational::from_integer(100));
                assert!(*v.denom() <= 5);
            }
        }
    }
}

#[test]
fn rejects_bad_specs() {
    assert!(gen_matrices(&GenSpec { n: 3, m: 0, count: 1, seed: 0 }).is_err());
    assert!(gen_matrices(&GenSpec { n: 3, m: 4, count: 1, seed: 0 }).is_err());
    // With one entry per row the only irreducible shape is a full cycle,
    // which rejection sampling still finds for small n.
    assert!(gen_matrices(&GenSpec { n: 3, m: 1, count: 2, seed: 0 }).is_ok());
}

#[test]
fn bench_outputs_are_stable_apart_from_timings() {
    let spec = GenSpec { n: 4, m: 2, count: 12, seed: 7 };
    let one = run_bench(&spec, 10_000, 1).unwrap();
    let many = run_bench(&spec, 10_000, 3).unwrap();
    let strip = |r: &mpl_transient::bench::BenchReport| -> Vec<_> {
        r.records.iter().map(|x| (x.id, x.n, x.m, x.k0, x.c, x.refinements, x.status.clone())).collect()
    };
    assert_eq!(strip(&one), strip(&many));
    assert!(one.records.iter().all(|r| r.status == "found"));

    let mut csv = Vec::new();
    emit_csv(&one.records, &mut csv).unwrap();
    let text = String::from_utf8(csv).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next().unwrap(), CSV_HEADER.join(","));
    assert_eq!(lines.count(), 12);

    let mut json = Vec::new();
    emit_json(&one.summary, &mut json).unwrap();
    let parsed: serde_json::Value = serde_json::from_slice(&json).unwrap();
    assert_eq!(parsed["instances"], 12);
    let counted: u64 = parsed["series"].as_array().unwrap().iter().map(|b| b["count"].as_u64().unwrap()).sum();
    assert_eq!(counted, 12);
}

#[test]
fn matches_golden_run() {
    let report = run_bench(&GenSpec { n: 5, m: 3, count: 10, seed: 11 }, 10_000, 2).unwrap();
    let mut csv = Vec::new();
    emit_csv(&report.records, &mut csv).unwrap();
    let stripped: String = String::from_utf8(csv)
        .unwrap()
        .lines()
        .map(|line| {
            let cols: Vec<&str> = line.split(',').collect();
            format!("{},{}\n", cols[..6].join(","), cols[8])
        })
        .collect();
    assert_eq!(stripped, include_str!("data/bench_golden.csv"));
}

#[test]
fn empty_run_and_fixture_record() {
    let empty = run_bench(&GenSpec { n: 3, m: 2, count: 0, seed: 1 }, 10_000, 1).unwrap();
    assert!(empty.records.is_empty());
    assert_eq!(empty.summary.n_star, None);
    let b: mpl_transient::MaxPlusMatrix = "3 3\n2 8 eps\n10 5 eps\n3 eps 9".parse().unwrap();
    let r = bench_matrix(0, 2, &b, 10_000).unwrap();
    assert_eq!((r.k0, r.c, r.status.as_str()), (2, 2, "found"));
}
