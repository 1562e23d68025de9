//! Throughput of the pointwise kernels: `U_τ` with a fixed number of Newton
//! steps and the conjugate integrand `R`, over random `(z, p, τ)` points,
//! single-threaded and on the rayon pool.

use std::fmt::Write as _;
use std::hint::black_box;
use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::kernels::newton_alpha_fixed;
use crate::kernels::pointwise::conj_integrand_unchecked;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct BenchConfig {
    pub points: usize,
    pub newton_iters: usize,
    /// Timed runs per kernel and mode; the fastest is reported.
    pub repeats: usize,
    pub seed: u64,
}

impl Default for BenchConfig {
    fn default() -> Self {
        BenchConfig {
            points: 1_000_000,
            newton_iters: 10,
            repeats: 3,
            seed: 1,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Kernel {
    /// Prox factor `U_τ` of the interior branch.
    Prox,
    /// Conjugate integrand `R`.
    Conjugate,
}

impl Kernel {
    pub fn name(self) -> &'static str {
        match self {
            Kernel::Prox => "U_tau",
            Kernel::Conjugate => "R",
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct BenchRow {
    pub kernel: Kernel,
    pub parallel: bool,
    pub threads: usize,
    pub seconds: f64,
    /// Sum of outputs; equal across modes.
    pub checksum: f64,
}

/// Random inputs with `z ∈ (0, 4]`, `p ∈ [1.05, 2)`, `τ ∈ [0.1, 2)`.
pub fn bench_points(n: usize, seed: u64) -> Vec<[f64; 3]> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..n)
        .map(|_| {
            let z = 4.0 * (1.0 - rng.random::<f64>());
            [z, rng.random_range(1.05..2.0), rng.random_range(0.1..2.0)]
        })
        .collect()
}

fn eval(kernel: Kernel, iters: usize, x: &[f64; 3]) -> f64 {
    match kernel {
        Kernel::Prox => newton_alpha_fixed(x[0], x[1], x[2], iters),
        Kernel::Conjugate => conj_integrand_unchecked(x[0], x[1]).to_float(),
    }
}

/// Times one kernel over `points` in one mode.
pub fn time_kernel(kernel: Kernel, points: &[[f64; 3]], iters: usize, parallel: bool) -> (f64, f64) {
    let start = Instant::now();
    let out: Vec<f64> = if parallel {
        points.par_iter().map(|x| eval(kernel, iters, x)).collect()
    } else {
        points.iter().map(|x| eval(kernel, iters, x)).collect()
    };
    let seconds = start.elapsed().as_secs_f64();
    let out = black_box(out);
    (seconds, out.iter().sum())
}

pub fn run_bench(cfg: &BenchConfig) -> Result<Vec<BenchRow>> {
    if cfg.points == 0 || cfg.repeats == 0 {
        return Err(Error::InvalidArgument("bench needs points > 0 and repeats > 0".into()));
    }
    let points = bench_points(cfg.points, cfg.seed);
    let threads = rayon::current_num_threads();
    let mut rows = Vec::new();
    for kernel in [Kernel::Prox, Kernel::Conjugate] {
        for parallel in [false, true] {
            let mut best = f64::INFINITY;
            let mut checksum = 0.0;
            for _ in 0..cfg.repeats {
                let (t, c) = time_kernel(kernel, &points, cfg.newton_iters, parallel);
                best = best.min(t);
                checksum = c;
            }
            rows.push(BenchRow {
                kernel,
                parallel,
                threads: if parallel { threads } else { 1 },
                seconds: best,
                checksum,
            });
        }
    }
    Ok(rows)
}

/// CSV table `kernel,mode,threads,points,newton_iters,seconds,checksum`.
pub fn bench_table(rows: &[BenchRow], cfg: &BenchConfig) -> String {
    let mut s = String::from("kernel,mode,threads,points,newton_iters,seconds,checksum\n");
    for r in rows {
        let iters = if r.kernel == Kernel::Prox { cfg.newton_iters } else { 0 };
        let _ = writeln!(
            s,
            "{},{},{},{},{},{:.6},{}",
            r.kernel.name(),
            if r.parallel { "parallel" } else { "single" },
            r.threads,
            cfg.points,
            iters,
            r.seconds,
            r.checksum
        );
    }
    s
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn table_covers_both_kernels_and_modes() {
        let cfg = BenchConfig {
            points: 2000,
            repeats: 1,
            ..Default::default()
        };
        let rows = run_bench(&cfg).unwrap();
        assert_eq!(rows.len(), 4);
        let table = bench_table(&rows, &cfg);
        for needle in ["U_tau,single", "U_tau,parallel", "R,single", "R,parallel"] {
            assert!(table.contains(needle), "{table}");
        }
        assert_eq!(rows[0].checksum, rows[1].checksum);
        assert_eq!(rows[2].checksum, rows[3].checksum);
    }

    #[test]
    fn forced_iterations_reach_the_root() {
        for x in bench_points(1000, 4) {
            let a = newton_alpha_fixed(x[0], x[1], x[2], 10);
            let r = a + x[2] * x[1] * a.powf(x[1] - 1.0) - x[0];
            assert!(r.abs() < 1e-9 * (1.0 + x[0]), "{x:?}: {r}");
        }
    }
}
