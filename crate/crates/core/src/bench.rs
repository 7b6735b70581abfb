//! Random instance generation and the power-vs-solver benchmark.
//!
//! Instances are irreducible `n × n` matrices with exactly `m` finite entries
//! per row, each a rational `p/q` with `p ∈ [1, 100]` and `q ∈ [1, 5]`.

use std::collections::BTreeMap;
use std::io::Write;
use std::time::{Duration, Instant};

use rand::seq::index::sample;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::formula::BoolFormula;
use crate::graph::is_irreducible;
use crate::maxplus::{MaxPlusMatrix, MaxPlusValue};
use crate::transient::{trans_cone, trans_smt, ConeOptions, Status, TransientResult};

const MAX_RETRIES: usize = 1000;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct GenSpec {
    pub n: usize,
    pub m: usize,
    pub count: usize,
    pub seed: u64,
}

impl GenSpec {
    pub fn validate(&self) -> Result<()> {
        if self.n == 0 {
            return Err(Error::InvalidSpec("n must be at least 1".into()));
        }
        if self.m < 1 || self.m > self.n {
            return Err(Error::InvalidSpec(format!("m = {} must lie in [1, {}]", self.m, self.n)));
        }
        Ok(())
    }
}

fn random_matrix(rng: &mut ChaCha8Rng, n: usize, m: usize) -> Result<MaxPlusMatrix> {
    let mut data = vec![MaxPlusValue::Eps; n * n];
    for i in 0..n {
        for j in sample(rng, n, m) {
            let p: i64 = rng.gen_range(1..=100);
            let q: i64 = rng.gen_range(1..=5);
            data[i * n + j] = MaxPlusValue::ratio(p, q);
        }
    }
    MaxPlusMatrix::new(n, n, data)
}

/// Deterministic under `spec.seed`.
pub fn gen_matrices(spec: &GenSpec) -> Result<Vec<MaxPlusMatrix>> {
    spec.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let mut out = Vec::with_capacity(spec.count);
    for id in 0..spec.count {
        let mut found = None;
        for _ in 0..MAX_RETRIES {
            let a = random_matrix(&mut rng, spec.n, spec.m)?;
            if is_irreducible(&a)? {
                found = Some(a);
                break;
            }
        }
        let a = found.ok_or_else(|| {
            Error::InvalidSpec(format!(
                "no irreducible matrix after {MAX_RETRIES} draws for instance {id} (n = {}, m = {})",
                spec.n, spec.m
            ))
        })?;
        out.push(a);
    }
    Ok(out)
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct BenchRecord {
    pub id: usize,
    pub n: usize,
    pub m: usize,
    pub k0: usize,
    pub c: usize,
    pub t_power_us: u128,
    pub t_smt_us: u128,
    pub refinements: usize,
    pub status: String,
}

impl BenchRecord {
    pub fn k0_plus_c(&self) -> usize {
        self.k0 + self.c
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Bucket {
    pub k0_plus_c: usize,
    pub count: usize,
    pub mean_power_us: f64,
    pub mean_smt_us: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct BenchSummary {
    pub instances: usize,
    /// Smallest `k0 + c` whose mean solver time beats the mean power time.
    pub cross_over: Option<usize>,
    /// Largest `k0 + c` observed.
    pub n_star: Option<usize>,
    pub series: Vec<Bucket>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct BenchReport {
    pub records: Vec<BenchRecord>,
    pub summary: BenchSummary,
}

fn timed<T>(f: impl FnOnce() -> Result<T>) -> Result<(T, Duration)> {
    let start = Instant::now();
    let out = f()?;
    Ok((out, start.elapsed()))
}

fn check_monotone(r: &TransientResult) -> Result<()> {
    let sums: Vec<usize> = r.refinements.iter().map(|(k, c)| k + c).collect();
    if sums.windows(2).any(|w| w[0] >= w[1]) {
        return Err(Error::Internal(format!("refinement sequence not increasing: {:?}", r.refinements)));
    }
    Ok(())
}

/// Time both methods on one matrix and check that they agree.
pub fn bench_matrix(id: usize, m: usize, a: &MaxPlusMatrix, bound: usize) -> Result<BenchRecord> {
    let n = a.rows();
    let identity = MaxPlusMatrix::identity(n)?;
    let (power, t_power) = timed(|| trans_cone(a, &identity, bound, ConeOptions::default()))?;
    let (smt, t_smt) = timed(|| trans_smt(a, &BoolFormula::True, bound))?;
    check_monotone(&smt)?;
    if power.pair() != smt.pair() || power.status != smt.status {
        return Err(Error::Disagreement(format!(
            "instance {id}\nmatrix:\n{a}power: {power:?}\nsolver: {smt:?}"
        )));
    }
    let status = match power.status {
        Status::Found => "found".to_string(),
        other => other.to_string(),
    };
    Ok(BenchRecord {
        id,
        n,
        m,
        k0: power.k0,
        c: power.c,
        t_power_us: t_power.as_micros(),
        t_smt_us: t_smt.as_micros(),
        refinements: smt.refinements.len(),
        status,
    })
}

/// Benchmark every generated instance on `jobs` worker threads.
pub fn run_bench(spec: &GenSpec, bound: usize, jobs: usize) -> Result<BenchReport> {
    let matrices = gen_matrices(spec)?;
    if let Some(first) = matrices.first() {
        // Warm-up, not recorded.
        bench_matrix(0, spec.m, first, bound)?;
    }
    let jobs = jobs.max(1).min(matrices.len().max(1));
    let mut slots: Vec<Option<Result<BenchRecord>>> = (0..matrices.len()).map(|_| None).collect();
    std::thread::scope(|scope| {
        let handles: Vec<_> = (0..jobs)
            .map(|w| {
                let matrices = &matrices;
                scope.spawn(move || {
                    (w..matrices.len())
                        .step_by(jobs)
                        .map(|id| (id, bench_matrix(id, spec.m, &matrices[id], bound)))
                        .collect::<Vec<_>>()
                })
            })
            .collect();
        for h in handles {
            for (id, r) in h.join().expect("benchmark worker panicked") {
                slots[id] = Some(r);
            }
        }
    });
    let records = slots
        .into_iter()
        .map(|r| r.expect("every instance benchmarked"))
        .collect::<Result<Vec<_>>>()?;
    let summary = summarize(&records);
    Ok(BenchReport { records, summary })
}

pub fn summarize(records: &[BenchRecord]) -> BenchSummary {
    let mut buckets: BTreeMap<usize, (usize, u128, u128)> = BTreeMap::new();
    for r in records.iter().filter(|r| r.status == "found") {
        let e = buckets.entry(r.k0_plus_c()).or_default();
        e.0 += 1;
        e.1 += r.t_power_us;
        e.2 += r.t_smt_us;
    }
    let series: Vec<Bucket> = buckets
        .into_iter()
        .map(|(k, (count, p, s))| Bucket {
            k0_plus_c: k,
            count,
            mean_power_us: p as f64 / count as f64,
            mean_smt_us: s as f64 / count as f64,
        })
        .collect();
    BenchSummary {
        instances: records.len(),
        cross_over: series.iter().find(|b| b.mean_smt_us < b.mean_power_us).map(|b| b.k0_plus_c),
        n_star: series.last().map(|b| b.k0_plus_c),
        series,
    }
}

pub const CSV_HEADER: [&str; 9] = ["id", "n", "m", "k0", "c", "k0_plus_c", "t_power_us", "t_smt_us", "refinements"];

pub fn emit_csv(records: &[BenchRecord], out: impl Write) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(CSV_HEADER)?;
    for r in records {
        w.write_record([
            r.id.to_string(),
            r.n.to_string(),
            r.m.to_string(),
            r.k0.to_string(),
            r.c.to_string(),
            r.k0_plus_c().to_string(),
            r.t_power_us.to_string(),
            r.t_smt_us.to_string(),
            r.refinements.to_string(),
        ])?;
    }
    w.flush()?;
    Ok(())
}

pub fn emit_json(summary: &BenchSummary, mut out: impl Write) -> Result<()> {
    serde_json::to_writer_pretty(&mut out, summary)?;
    writeln!(out)?;
    Ok(())
}
