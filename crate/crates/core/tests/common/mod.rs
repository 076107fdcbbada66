#![allow(dead_code)]

use nalgebra::{DMatrix, DVector};
use num::{BigInt, BigRational, One, Signed, ToPrimitive, Zero};

/// Truncated-power sum `(1/(m-1)!) Σ (-1)^i C(m,i) (x-i)_+^{m-1}` in exact
/// rational arithmetic, rounded once at the end.
pub fn bspline_exact(m: usize, x: f64) -> f64 {
    let x = BigRational::from_float(x).expect("finite");
    let mut sum = BigRational::zero();
    let mut binom = BigInt::one();
    for i in 0..=m {
        let t = &x - BigRational::from_integer(BigInt::from(i));
        // (t)_+^0 is the indicator of t >= 0, which keeps order 1 right-open
        if !t.is_negative() {
            let mut term = BigRational::from_integer(binom.clone());
            for _ in 0..m - 1 {
                term *= &t;
            }
            if i % 2 == 0 {
                sum += term;
            } else {
                sum -= term;
            }
        }
        binom = binom * BigInt::from(m - i) / BigInt::from(i + 1);
    }
    let mut fact = BigInt::one();
    for k in 2..m {
        fact *= BigInt::from(k);
    }
    (sum / BigRational::from_integer(fact)).to_f64().expect("representable")
}

/// Coefficients of `(1 + z + ... + z^{r-1})^m / r^m`: the fine-basis
/// expansion of the `r`-times wider cardinal atom.
pub fn two_scale_mask(m: usize, r: usize) -> Vec<f64> {
    let mut poly: Vec<u128> = vec![1];
    for _ in 0..m {
        let mut next = vec![0u128; poly.len() + r - 1];
        for (i, &p) in poly.iter().enumerate() {
            for j in 0..r {
                next[i + j] += p;
            }
        }
        poly = next;
    }
    let scale = (r as f64).powi(m as i32);
    poly.into_iter().map(|v| v as f64 / scale).collect()
}

/// Shift indices `j` with `c - m b < c + j b' < d`, by scanning a wide
/// integer range; `b = r b'` and `d - c = n b'`.
pub fn enumerate_shift_indices(m: usize, r: usize, n: usize) -> Vec<i64> {
    let lo = -(4 * (m * r + n) as i64);
    let hi = 4 * (m * r + n) as i64;
    (lo..=hi)
        .filter(|&j| j > -((m * r) as i64) && j < n as i64)
        .collect()
}

/// Least-squares residual norm of `f` against the columns `cols` of `a`.
pub fn subset_residual(a: &DMatrix<f64>, f: &DVector<f64>, cols: &[usize]) -> f64 {
    if cols.is_empty() {
        return f.norm();
    }
    let sub = a.select_columns(cols);
    let svd = sub.clone().svd(true, true);
    let x = svd.solve(f, 1e-13).expect("factors computed");
    (f - sub * x).norm()
}

/// Size of the smallest column subset (up to `max_size`) reproducing `f`
/// with relative residual below `tol`, by exhaustive search.
pub fn smallest_exact_subset(a: &DMatrix<f64>, f: &DVector<f64>, max_size: usize, tol: f64) -> Option<usize> {
    let norm = f.norm();
    if norm == 0.0 {
        return Some(0);
    }
    for size in 1..=max_size {
        let mut found = false;
        for_each_subset(a.ncols(), size, &mut |cols| {
            if !found && subset_residual(a, f, cols) <= tol * norm {
                found = true;
            }
        });
        if found {
            return Some(size);
        }
    }
    None
}

pub fn for_each_subset(n: usize, k: usize, visit: &mut dyn FnMut(&[usize])) {
    fn rec(start: usize, n: usize, k: usize, cur: &mut Vec<usize>, visit: &mut dyn FnMut(&[usize])) {
        if cur.len() == k {
            visit(cur);
            return;
        }
        for i in start..n {
            cur.push(i);
            rec(i + 1, n, k, cur, visit);
            cur.pop();
        }
    }
    rec(0, n, k, &mut Vec::with_capacity(k), visit);
}
