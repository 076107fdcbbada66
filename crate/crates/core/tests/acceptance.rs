//! End-to-end acceptance checks. Runs as a plain binary and prints one
//! PASS/FAIL line per criterion.

mod common;

use std::process::ExitCode;
use std::time::{Duration, Instant};

use bspline_dict::{
    approximate, approximate_atoms, build_dictionary, build_esep_basis, certify_span_equality,
    check_frame_inequality, compute_scaling_system, eval_cardinal_bspline, eliminate_all,
    eliminate_fine_atom, frame_bounds, gen_blocky, gen_chirp, ChirpParams, Closure, Dictionary,
    Partition, SampledSignal, SplineSpace, StopRule, WorkingGrid,
};
use nalgebra::DVector;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

type Outcome = Result<String, String>;

fn dict(m: usize, c: f64, d: f64, b: f64, bp: f64) -> Dictionary {
    build_dictionary(m, &Partition::new(c, d, b, Closure::Closed).unwrap(), bp).unwrap()
}

fn check(ok: bool, detail: String) -> Outcome {
    if ok {
        Ok(detail)
    } else {
        Err(detail)
    }
}

fn ms(d: Duration) -> String {
    format!("{:.0} ms", d.as_secs_f64() * 1e3)
}

/// Fine step for the `r = b/b'` sweep on [0, 1]. For `r = 3`, `b = 3/16`
/// would not divide the interval, so `b' = 1/15` is used instead.
fn sweep_step(r: usize) -> f64 {
    if r == 3 {
        1.0 / 15.0
    } else {
        1.0 / 16.0
    }
}

fn cardinality() -> Outcome {
    let start = Instant::now();
    let d = dict(1, 0.0, 4.0, 1.0, 1.0 / 256.0);
    let fine = build_esep_basis(&d.fine_space());
    let elapsed = start.elapsed();
    check(
        d.len() == 1279 && fine.len() == 1024 && elapsed < Duration::from_secs(1),
        format!("K = {}, fine basis = {}, {}", d.len(), fine.len(), ms(elapsed)),
    )
}

fn span_equality() -> Outcome {
    let start = Instant::now();
    let mut failures = Vec::new();
    let mut worst: f64 = 0.0;
    for m in 1..=4 {
        for r in 1..=4 {
            let bp = sweep_step(r);
            let d = dict(m, 0.0, 1.0, r as f64 * bp, bp);
            let grid = d.working_grid(16).unwrap();
            let rep = certify_span_equality(&d, &d.fine_space(), &grid);
            worst = worst.max(rep.max_residual_fine_in_dict).max(rep.max_residual_dict_in_fine);
            let ok = rep.max_residual_fine_in_dict < 1e-6
                && rep.max_residual_dict_in_fine < 1e-6
                && rep.rank == m + d.fine_steps() - 1;
            if !ok {
                failures.push(format!("(m={m}, r={r}, rank {})", rep.rank));
            }
        }
    }
    let elapsed = start.elapsed();
    check(
        failures.is_empty() && elapsed < Duration::from_secs(30),
        format!("16 configurations, worst residual {worst:.1e}, {} {}", ms(elapsed), failures.join(" ")),
    )
}

fn elimination() -> Outcome {
    let mut worst: f64 = 0.0;
    let mut terminal: f64 = 0.0;
    for m in 1..=4 {
        let bp = 1.0 / 16.0;
        let d = dict(m, 0.0, 1.0, 2.0 * bp, bp);
        let grid = d.working_grid(16).unwrap();
        let fine = build_esep_basis(&d.fine_space());
        let sys = compute_scaling_system(&d, &fine, &grid).unwrap();
        let dm = grid.weighted_matrix(&grid.sample_all(d.atoms()));
        let fm = grid.weighted_matrix(&grid.sample_all(&fine));
        for (i, e) in eliminate_all(&sys).unwrap().into_iter().enumerate() {
            let target = fm.column(i);
            let err = (&dm * DVector::from_vec(e) - target).norm() / target.norm();
            worst = worst.max(err);
        }
        let last = d.fine_steps() as i64 - 1;
        let e = eliminate_fine_atom(&sys, last).unwrap();
        let at = d.atom_at_lattice(last).unwrap();
        let others = e.iter().enumerate().filter(|&(i, _)| i != at).map(|(_, v)| v.abs()).fold(0.0, f64::max);
        terminal = terminal.max((e[at] - 1.0 / sys.h(last, last)).abs()).max(others);
    }
    check(
        worst < 1e-8 && terminal < 1e-12,
        format!("max reconstruction error {worst:.1e}, terminal coefficient error {terminal:.1e}"),
    )
}

fn frame_inequality() -> Outcome {
    let mut violations = 0;
    let mut runs = 0;
    for m in [1, 4] {
        for r in 1..=4 {
            let bp = sweep_step(r);
            let d = dict(m, 0.0, 1.0, r as f64 * bp, bp);
            let grid = d.working_grid(16).unwrap();
            let Ok(bounds) = frame_bounds(&d, &grid) else {
                return Err(format!("no frame bounds for m={m}, r={r}"));
            };
            let result = check_frame_inequality(&d, &grid, bounds, 100, 1000 + r as u64, 1e-9);
            violations += result.violations;
            runs += result.samples;
        }
    }
    check(violations == 0, format!("{runs} random span elements, {violations} violations"))
}

fn blocky() -> Outcome {
    let bp = 1.0 / 256.0;
    let d = dict(1, 0.0, 4.0, 1.0, bp);
    let basis = build_esep_basis(&d.fine_space());
    let grid = d.working_grid(16).unwrap();
    let stop = StopRule::new(usize::MAX, 1e-6);
    let mut dict_counts = Vec::new();
    let mut basis_counts = Vec::new();
    let mut ok = true;
    let mut slowest = Duration::ZERO;
    for seed in 0..10 {
        let start = Instant::now();
        let f = gen_blocky(seed, 10, (0.0, 4.0), bp, &grid).unwrap();
        let (Ok(a), Ok(b)) = (approximate(&d, &f, &stop), approximate_atoms(&basis, &f, &stop)) else {
            return Err(format!("pursuit stagnated for seed {seed}"));
        };
        slowest = slowest.max(start.elapsed());
        ok &= a.relerr <= 1e-6 && b.relerr <= 1e-6 && a.m <= 60 && b.m >= 500;
        dict_counts.push(a.m);
        basis_counts.push(b.m);
    }
    ok &= slowest < Duration::from_secs(120);
    check(
        ok,
        format!(
            "dictionary M = {dict_counts:?}, basis M = {basis_counts:?}, slowest seed {}",
            ms(slowest)
        ),
    )
}

/// Relative error at which the chirp comparison is made. The default chirp's
/// projection onto the fine space leaves 1.1952e-2; this is the next round
/// value above that floor.
const CHIRP_TARGET: f64 = 2e-2;

fn chirp() -> Outcome {
    let (bp, b) = (1.0 / 32.0, 1.0 / 8.0);
    let d = dict(4, 0.0, 2.0, b, bp);
    let basis = build_esep_basis(&d.fine_space());
    let grid = d.working_grid(16).unwrap();
    let f = gen_chirp(&ChirpParams::default(), &grid);
    let stop = StopRule::new(usize::MAX, CHIRP_TARGET);
    let (Ok(a), Ok(bs)) = (approximate(&d, &f, &stop), approximate_atoms(&basis, &f, &stop)) else {
        return Err("pursuit stagnated".into());
    };
    let ratio = a.m as f64 / bs.m as f64;
    check(
        a.m < bs.m && ratio <= 0.8,
        format!(
            "target {CHIRP_TARGET:e}: dictionary M = {} (relerr {:.2e}), basis M = {} (relerr {:.2e}), ratio {ratio:.2}",
            a.m, a.relerr, bs.m, bs.relerr
        ),
    )
}

fn analytic_values() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    let mut worst_scaled: f64 = 0.0;
    let mut worst: f64 = 0.0;
    for m in 1..=8 {
        for _ in 0..1000 {
            let x = rng.gen_range(-0.5..m as f64 + 0.5);
            let err = (eval_cardinal_bspline(m, x).unwrap() - common::bspline_exact(m, x)).abs();
            worst = worst.max(err);
            worst_scaled = worst_scaled.max(err / (1e-12 * m as f64));
        }
    }
    let mut unity: f64 = 0.0;
    for m in 1..=8 {
        let b = 0.25;
        let space = SplineSpace::uniform(m, 0.0, 4.0, b).unwrap();
        let basis = build_esep_basis(&space);
        for i in 0..=2000 {
            let x = 4.0 * i as f64 / 2000.0;
            let sum: f64 = basis.iter().map(|a| a.eval(x)).sum();
            unity = unity.max((b * sum - 1.0).abs());
        }
    }
    check(
        worst_scaled < 1.0 && unity < 1e-10,
        format!("8000 points, max error {worst:.1e}, partition of unity error {unity:.1e}"),
    )
}

fn degenerate() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(77);
    let mut diff: f64 = 0.0;
    let mut relerr: f64 = 0.0;
    for m in 1..=4 {
        let d = dict(m, 0.0, 4.0, 1.0, 1.0);
        let basis = build_esep_basis(&d.coarse_space());
        if basis.len() != d.len() {
            return Err(format!("m={m}: {} atoms vs {} basis functions", d.len(), basis.len()));
        }
        for (a, e) in d.atoms().iter().zip(&basis) {
            for _ in 0..500 {
                let x = rng.gen_range(0.0..=4.0);
                diff = diff.max((a.eval(x) - e.eval(x)).abs());
            }
        }
        let grid = WorkingGrid::for_spacing(0.0, 4.0, 1.0, 16).unwrap();
        let coeffs: Vec<f64> = (0..basis.len()).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let samples = grid.sample_fn(|x| basis.iter().zip(&coeffs).map(|(a, c)| c * a.eval(x)).sum());
        let f = SampledSignal::new(grid, samples, "random element").unwrap();
        match approximate(&d, &f, &StopRule::new(usize::MAX, 0.0)) {
            Ok(a) => relerr = relerr.max(a.relerr),
            Err(e) => return Err(format!("m={m}: {e}")),
        }
    }
    check(
        diff < 1e-14 && relerr < 1e-10,
        format!("max pointwise difference {diff:.1e}, recovery relerr {relerr:.1e}"),
    )
}

fn main() -> ExitCode {
    let criteria: [(&str, fn() -> Outcome); 8] = [
        ("dictionary cardinality", cardinality),
        ("span equality certification", span_equality),
        ("elimination recursion fidelity", elimination),
        ("frame inequality", frame_inequality),
        ("blocky signal sparsity", blocky),
        ("chirp sparsity", chirp),
        ("analytic B-spline values", analytic_values),
        ("degenerate dictionary", degenerate),
    ];
    let mut failed = 0;
    for (i, (name, run)) in criteria.iter().enumerate() {
        match run() {
            Ok(detail) => println!("PASS {} {name}: {detail}", i + 1),
            Err(detail) => {
                failed += 1;
                println!("FAIL {} {name}: {detail}", i + 1);
            }
        }
    }
    println!("{} of {} criteria passed", criteria.len() - failed, criteria.len());
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
