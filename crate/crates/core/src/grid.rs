//! Uniform working grid on `[c, d]` with composite-trapezoid inner products.
//!
//! Every function-level computation in the crate (projections, Gram
//! matrices, pursuit) happens on samples taken at the nodes of a grid with
//! step `h = b'/q`.

use nalgebra::DMatrix;

use crate::error::{Error, Result};
use crate::spline::{integer_ratio, Atom};

/// Default number of grid steps per fine knot gap.
pub const DEFAULT_GRID_Q: usize = 16;

#[derive(Clone, Debug, PartialEq)]
pub struct WorkingGrid {
    c: f64,
    d: f64,
    h: f64,
    steps: usize,
}

impl WorkingGrid {
    pub fn new(c: f64, d: f64, h: f64) -> Result<Self> {
        if !(c.is_finite() && d.is_finite() && d > c) {
            return Err(Error::InvalidInterval { c, d });
        }
        if !(h > 0.0 && h.is_finite()) {
            return Err(Error::InvalidSpacing(h));
        }
        let steps = integer_ratio(d - c, h)
            .filter(|&n| n >= 1)
            .ok_or(Error::IncompatibleSpacing { len: d - c, spacing: h })?;
        Ok(Self { c, d, h, steps })
    }

    /// Grid with step `spacing / q`.
    pub fn for_spacing(c: f64, d: f64, spacing: f64, q: usize) -> Result<Self> {
        if q == 0 {
            return Err(Error::InvalidParameter("grid factor q must be >= 1".into()));
        }
        Self::new(c, d, spacing / q as f64)
    }

    pub fn interval(&self) -> (f64, f64) {
        (self.c, self.d)
    }

    pub fn step(&self) -> f64 {
        self.h
    }

    /// Number of nodes, `(d - c)/h + 1`.
    pub fn len(&self) -> usize {
        self.steps + 1
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn point(&self, i: usize) -> f64 {
        if i == self.steps {
            self.d
        } else {
            self.c + i as f64 * self.h
        }
    }

    pub fn points(&self) -> Vec<f64> {
        (0..self.len()).map(|i| self.point(i)).collect()
    }

    pub fn weight(&self, i: usize) -> f64 {
        if i == 0 || i == self.steps {
            0.5 * self.h
        } else {
            self.h
        }
    }

    pub fn weights(&self) -> Vec<f64> {
        (0..self.len()).map(|i| self.weight(i)).collect()
    }

    pub fn sqrt_weights(&self) -> Vec<f64> {
        (0..self.len()).map(|i| self.weight(i).sqrt()).collect()
    }

    /// True when `spacing` is an integer multiple of the grid step.
    pub fn resolves(&self, spacing: f64) -> bool {
        integer_ratio(spacing, self.h).is_some_and(|n| n >= 1)
    }

    /// Trapezoid inner product of two sample vectors.
    pub fn dot(&self, a: &[f64], b: &[f64]) -> f64 {
        a.iter()
            .zip(b)
            .enumerate()
            .map(|(i, (x, y))| self.weight(i) * x * y)
            .sum()
    }

    pub fn norm(&self, a: &[f64]) -> f64 {
        self.dot(a, a).sqrt()
    }

    pub fn sample_fn(&self, f: impl Fn(f64) -> f64) -> Vec<f64> {
        (0..self.len()).map(|i| f(self.point(i))).collect()
    }

    /// Samples `atom` over the grid nodes covering its support.
    pub fn sample(&self, atom: &Atom) -> SampledAtom {
        let (lo, hi) = atom.support();
        let eps = 1e-9;
        let first = (((lo - self.c) / self.h) - eps).ceil().max(0.0) as usize;
        let last = ((((hi - self.c) / self.h) + eps).floor() as usize).min(self.steps);
        if hi < lo || first > last {
            return SampledAtom { start: 0, values: Vec::new() };
        }
        let values = (first..=last).map(|i| atom.eval(self.point(i))).collect();
        SampledAtom { start: first, values }
    }

    pub fn sample_all(&self, atoms: &[Atom]) -> Vec<SampledAtom> {
        atoms.iter().map(|a| self.sample(a)).collect()
    }

    /// Dense matrix whose columns are the atoms scaled by the square-root
    /// trapezoid weights, so that Euclidean products equal grid inner
    /// products.
    pub fn weighted_matrix(&self, atoms: &[SampledAtom]) -> DMatrix<f64> {
        let sw = self.sqrt_weights();
        let mut m = DMatrix::zeros(self.len(), atoms.len());
        for (j, a) in atoms.iter().enumerate() {
            for (off, v) in a.values.iter().enumerate() {
                let i = a.start + off;
                m[(i, j)] = sw[i] * v;
            }
        }
        m
    }
}

/// Samples of an atom on a contiguous run of grid nodes; zero elsewhere.
#[derive(Clone, Debug, PartialEq)]
pub struct SampledAtom {
    pub start: usize,
    pub values: Vec<f64>,
}

impl SampledAtom {
    pub fn end(&self) -> usize {
        self.start + self.values.len()
    }

    pub fn to_dense(&self, len: usize) -> Vec<f64> {
        let mut out = vec![0.0; len];
        out[self.start..self.end()].copy_from_slice(&self.values);
        out
    }

    pub fn max_abs_diff(&self, other: &SampledAtom, len: usize) -> f64 {
        let a = self.to_dense(len);
        let b = other.to_dense(len);
        a.iter().zip(&b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max)
    }
}
