mod common;

use bspline_dict::{
    build_epkb_basis, build_esep_basis, eval_bspline_knots, eval_cardinal_bspline, Atom, SplineSpace,
    WorkingGrid,
};
use nalgebra::DVector;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

#[test]
fn closed_form_matches_exact_rational_sum() {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    for m in 1..=8 {
        for _ in 0..200 {
            let x = rng.gen_range(-1.0..(m as f64 + 1.0));
            let got = eval_cardinal_bspline(m, x).unwrap();
            assert!((got - common::bspline_exact(m, x)).abs() < 1e-12 * m as f64, "m={m} x={x}");
        }
        for k in 0..=m {
            let x = k as f64;
            assert!((eval_cardinal_bspline(m, x).unwrap() - common::bspline_exact(m, x)).abs() < 1e-14);
        }
    }
}

#[test]
fn high_orders_stay_accurate() {
    // beyond the closed-form range the recursion must still match the exact sum
    for m in [9, 10, 12] {
        for i in 0..=40 {
            let x = i as f64 * m as f64 / 40.0 + 0.013;
            let got = eval_cardinal_bspline(m, x).unwrap();
            assert!((got - common::bspline_exact(m, x)).abs() < 1e-13, "m={m} x={x}");
        }
    }
}

#[test]
fn equally_spaced_knots_rescale_the_cardinal_spline() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    for m in 1..=6 {
        for _ in 0..100 {
            let b = rng.gen_range(0.05..3.0);
            let y0 = rng.gen_range(-5.0..5.0);
            let knots: Vec<f64> = (0..=m).map(|i| y0 + i as f64 * b).collect();
            let x = rng.gen_range(y0 - b..y0 + (m + 1) as f64 * b);
            let want = eval_cardinal_bspline(m, (x - y0) / b).unwrap() / b;
            let got = eval_bspline_knots(&knots, x).unwrap();
            assert!((got - want).abs() < 1e-12 * want.abs().max(1.0 / b), "m={m} b={b} x={x}");
        }
    }
}

#[test]
fn esep_basis_is_a_scaled_partition_of_unity() {
    for m in 1..=6 {
        let space = SplineSpace::uniform(m, -1.0, 2.0, 0.25).unwrap();
        let basis = build_esep_basis(&space);
        for i in 0..=600 {
            let x = -1.0 + 3.0 * i as f64 / 600.0;
            let sum: f64 = basis.iter().map(|a| a.eval(x)).sum();
            assert!((0.25 * sum - 1.0).abs() < 1e-10, "m={m} x={x}");
        }
    }
}

#[test]
fn atoms_vanish_outside_and_are_positive_inside_their_support() {
    for m in 1..=5 {
        let space = SplineSpace::uniform(m, 0.0, 3.0, 0.5).unwrap();
        for basis in [build_esep_basis(&space), build_epkb_basis(&space)] {
            for atom in &basis {
                let (lo, hi) = atom.support();
                assert!(hi > lo);
                assert_eq!(atom.eval(lo - 0.1), 0.0);
                assert_eq!(atom.eval(hi + 0.1), 0.0);
                for i in 1..10 {
                    let x = lo + (hi - lo) * i as f64 / 10.0;
                    assert!(atom.eval(x) > 0.0, "m={m} x={x}");
                }
            }
        }
    }
}

/// One-sided `j`-th difference quotients at `x`, from the left and from the
/// right.
fn one_sided_derivatives(atom: &Atom, x: f64, j: usize, h: f64) -> (f64, f64) {
    let mut left = 0.0;
    let mut right = 0.0;
    let mut binom = 1.0;
    for i in 0..=j {
        let sign = if (j - i) % 2 == 0 { 1.0 } else { -1.0 };
        right += sign * binom * atom.eval(x + (i + 1) as f64 * h);
        left += sign * binom * atom.eval(x - (j + 1 - i) as f64 * h);
        binom = binom * (j - i) as f64 / (i + 1) as f64;
    }
    let scale = h.powi(j as i32);
    (left / scale, right / scale)
}

#[test]
fn derivatives_up_to_order_m_minus_2_are_continuous_at_knots() {
    for m in 2..=5 {
        let j = m - 2;
        let atom = Atom::cardinal(m, 0.0, 1.0, (-1.0, m as f64 + 1.0));
        for knot in 1..m {
            let x = knot as f64;
            let jump = |h: f64| {
                let (l, r) = one_sided_derivatives(&atom, x, j, h);
                (l - r).abs()
            };
            let (coarse, fine) = (jump(1e-2), jump(5e-3));
            assert!(fine < 0.05, "m={m} knot={knot} jump={fine}");
            if coarse < 1e-9 {
                // symmetric knot: both one-sided quotients coincide
                assert!(fine < 1e-9);
                continue;
            }
            let ratio = fine / coarse;
            assert!((0.4..0.6).contains(&ratio), "m={m} knot={knot} ratio={ratio}");
        }
        // the next derivative does jump
        let (l, r) = one_sided_derivatives(&atom, 1.0, m - 1, 1e-4);
        assert!((l - r).abs() > 0.1, "m={m}");
    }
}

#[test]
fn dimension_and_full_gram_rank() {
    for m in 1..=5 {
        let space = SplineSpace::uniform(m, 0.0, 2.0, 0.25).unwrap();
        let grid = WorkingGrid::for_spacing(0.0, 2.0, 0.25, 16).unwrap();
        for basis in [build_esep_basis(&space), build_epkb_basis(&space)] {
            assert_eq!(basis.len(), m + 7);
            let a = grid.weighted_matrix(&grid.sample_all(&basis));
            let sv = a.svd(false, false).singular_values;
            let (max, min) = (sv.max(), sv.min());
            assert!(min * min > 1e-8 * max * max, "m={m}");
        }
    }
}

#[test]
fn coarse_space_nests_in_the_refined_space() {
    for m in 1..=4 {
        for r in [2usize, 3] {
            let b = 0.5;
            let coarse = build_esep_basis(&SplineSpace::uniform(m, 0.0, 3.0, b).unwrap());
            let fine = build_esep_basis(&SplineSpace::uniform(m, 0.0, 3.0, b / r as f64).unwrap());
            let grid = WorkingGrid::for_spacing(0.0, 3.0, b / r as f64, 16).unwrap();
            let f = grid.weighted_matrix(&grid.sample_all(&fine));
            let svd = f.clone().svd(true, true);
            for atom in grid.sample_all(&coarse) {
                let v: DVector<f64> = grid.weighted_matrix(&[atom]).column(0).into_owned();
                let x = svd.solve(&v, 1e-14).unwrap();
                let res = (&f * x - &v).norm() / v.norm();
                assert!(res < 1e-8, "m={m} r={r} res={res}");
            }
        }
    }
}
