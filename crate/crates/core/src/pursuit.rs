//! Greedy sparse approximation over B-spline dictionaries.
//!
//! Forward selection is optimized orthogonal matching pursuit (OOMP): at
//! every step the atom maximizing `|<r, φ_k>| / ‖P⊥ φ_k‖` is selected, where
//! `P⊥` projects onto the orthogonal complement of the atoms already chosen.
//! The selected atoms are orthonormalized incrementally (classical
//! Gram–Schmidt with one reorthogonalization pass), so after every step the
//! approximation is the orthogonal projection of the signal onto their span.
//!
//! Backward pruning removes, one at a time, the atom whose removal increases
//! the residual the least, as long as the error target still holds. Removal
//! works on the triangular factor of the selection, so the atoms themselves
//! are not needed again.
//!
//! All inner products are grid (trapezoid) inner products. Internally every
//! vector is scaled by the square-root weights so that they become plain
//! Euclidean products.

use crate::dictionary::Dictionary;
use crate::error::{Error, Result};
use crate::grid::WorkingGrid;
use crate::signals::SampledSignal;
use crate::spline::Atom;

/// Relative errors at or below this value count as exact.
pub const EXACT_RELERR: f64 = 1e-12;
/// Candidates whose projected norm falls below this fraction of their norm
/// are excluded.
pub const EXCLUDE_TOL: f64 = 1e-10;
/// Scores within this relative distance are ties; the lowest index wins.
pub const TIE_TOL: f64 = 1e-12;
/// Default relative error target `‖r‖/‖f‖`.
pub const DEFAULT_TARGET_RELERR: f64 = 1e-3;

/// Projected norms are recomputed from scratch once downdating has removed
/// all but this fraction of their squared value.
const REFRESH_FRACTION: f64 = 1e-6;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct StopRule {
    pub max_atoms: usize,
    pub target_relerr: f64,
}

impl Default for StopRule {
    fn default() -> Self {
        Self {
            max_atoms: usize::MAX,
            target_relerr: DEFAULT_TARGET_RELERR,
        }
    }
}

impl StopRule {
    pub fn new(max_atoms: usize, target_relerr: f64) -> Self {
        Self { max_atoms, target_relerr }
    }

    fn reached(&self, relerr: f64) -> bool {
        relerr <= self.target_relerr.max(EXACT_RELERR)
    }
}

/// Dense values on a contiguous run of grid nodes, zero elsewhere.
#[derive(Clone, Debug, Default, PartialEq)]
struct Ranged {
    start: usize,
    values: Vec<f64>,
}

impl Ranged {
    fn end(&self) -> usize {
        self.start + self.values.len()
    }

    fn dot(&self, other: &Ranged) -> f64 {
        let lo = self.start.max(other.start);
        let hi = self.end().min(other.end());
        if lo >= hi {
            return 0.0;
        }
        let a = &self.values[lo - self.start..hi - self.start];
        let b = &other.values[lo - other.start..hi - other.start];
        a.iter().zip(b).map(|(x, y)| x * y).sum()
    }

    fn dot_dense(&self, v: &[f64]) -> f64 {
        self.values
            .iter()
            .zip(&v[self.start..self.end()])
            .map(|(x, y)| x * y)
            .sum()
    }

    fn norm(&self) -> f64 {
        self.values.iter().map(|v| v * v).sum::<f64>().sqrt()
    }

    fn scale(&mut self, s: f64) {
        self.values.iter_mut().for_each(|v| *v *= s);
    }

    /// `self += alpha * other`, widening the range as needed.
    fn axpy(&mut self, alpha: f64, other: &Ranged) {
        if other.values.is_empty() {
            return;
        }
        if self.values.is_empty() {
            self.start = other.start;
        }
        let lo = self.start.min(other.start);
        let hi = self.end().max(other.end());
        if lo < self.start || hi > self.end() {
            let mut widened = vec![0.0; hi - lo];
            let off = self.start - lo;
            widened[off..off + self.values.len()].copy_from_slice(&self.values);
            self.start = lo;
            self.values = widened;
        }
        let off = other.start - self.start;
        for (dst, src) in self.values[off..off + other.values.len()].iter_mut().zip(&other.values) {
            *dst += alpha * src;
        }
    }

    fn axpy_dense(&self, alpha: f64, v: &mut [f64]) {
        for (dst, src) in v[self.start..self.end()].iter_mut().zip(&self.values) {
            *dst += alpha * src;
        }
    }

    fn combine(cs: f64, sn: f64, a: &Ranged, b: &Ranged) -> (Ranged, Ranged) {
        let mut first = Ranged::default();
        first.axpy(cs, a);
        first.axpy(sn, b);
        let mut second = Ranged::default();
        second.axpy(-sn, a);
        second.axpy(cs, b);
        (first, second)
    }
}

/// Selection, coefficients and residual of a greedy approximation.
#[derive(Clone, Debug, PartialEq)]
pub struct PursuitState {
    /// Indices of the selected atoms, in selection order.
    pub selected: Vec<usize>,
    /// Coefficients of the selected (unnormalized) atoms.
    pub coefficients: Vec<f64>,
    /// Relative error before the first and after every forward step.
    pub history: Vec<f64>,
    target: SampledSignal,
    sqrt_w: Vec<f64>,
    signal_norm: f64,
    /// Orthonormal basis of the selected span (weighted samples).
    q: Vec<Ranged>,
    /// Column `j` holds the coordinates of atom `selected[j]` in `q[0..=j]`.
    r: Vec<Vec<f64>>,
    /// `z[i] = <q_i, f>`
    z: Vec<f64>,
    residual_w: Vec<f64>,
}

impl PursuitState {
    fn empty(target: &SampledSignal) -> Self {
        let sqrt_w = target.grid().sqrt_weights();
        let residual_w: Vec<f64> = target.samples.iter().zip(&sqrt_w).map(|(f, w)| f * w).collect();
        let signal_norm = residual_w.iter().map(|v| v * v).sum::<f64>().sqrt();
        Self {
            selected: Vec::new(),
            coefficients: Vec::new(),
            history: vec![if signal_norm > 0.0 { 1.0 } else { 0.0 }],
            target: target.clone(),
            sqrt_w,
            signal_norm,
            q: Vec::new(),
            r: Vec::new(),
            z: Vec::new(),
            residual_w,
        }
    }

    /// Number of selected atoms.
    pub fn len(&self) -> usize {
        self.selected.len()
    }

    pub fn is_empty(&self) -> bool {
        self.selected.is_empty()
    }

    pub fn target(&self) -> &SampledSignal {
        &self.target
    }

    pub fn residual_norm(&self) -> f64 {
        self.residual_w.iter().map(|v| v * v).sum::<f64>().sqrt()
    }

    /// `‖r‖ / ‖f‖`; zero for a zero signal.
    pub fn relerr(&self) -> f64 {
        if self.signal_norm > 0.0 {
            self.residual_norm() / self.signal_norm
        } else {
            0.0
        }
    }

    pub fn residual(&self) -> SampledSignal {
        let samples = self
            .residual_w
            .iter()
            .zip(&self.sqrt_w)
            .map(|(r, w)| r / w)
            .collect();
        SampledSignal::new(self.target.grid().clone(), samples, "residual").expect("same grid")
    }

    /// `f^M = f - r` on the grid.
    pub fn approximation(&self) -> SampledSignal {
        let samples = self
            .target
            .samples
            .iter()
            .zip(&self.residual_w)
            .zip(&self.sqrt_w)
            .map(|((f, r), w)| f - r / w)
            .collect();
        SampledSignal::new(self.target.grid().clone(), samples, "approximation").expect("same grid")
    }

    fn push(&mut self, atom: usize, q: Ranged, column: Vec<f64>) {
        let z = q.dot_dense(&self.residual_w);
        q.axpy_dense(-z, &mut self.residual_w);
        self.selected.push(atom);
        self.q.push(q);
        self.r.push(column);
        self.z.push(z);
    }

    /// Solves the triangular system `R c = z`.
    fn solve_coefficients(&mut self) {
        let s = self.len();
        let mut c = vec![0.0; s];
        for i in (0..s).rev() {
            let mut acc = self.z[i];
            for j in (i + 1)..s {
                acc -= self.r[j][i] * c[j];
            }
            c[i] = acc / self.r[i][i];
        }
        self.coefficients = c;
    }

    /// Rows of `R^{-1}`: `inv[i][j]` for `j >= i`.
    fn inverse_factor(&self) -> Vec<Vec<f64>> {
        let s = self.len();
        let mut inv = vec![vec![0.0; s]; s];
        for col in 0..s {
            // solve R x = e_col
            for i in (0..=col).rev() {
                let mut acc = if i == col { 1.0 } else { 0.0 };
                for j in (i + 1)..=col {
                    acc -= self.r[j][i] * inv[j][col];
                }
                inv[i][col] = acc / self.r[i][i];
            }
        }
        inv
    }

    /// Removes the atom at position `pos` and retriangularizes with Givens
    /// rotations. The direction dropped from the span moves into the residual.
    fn remove(&mut self, pos: usize) {
        self.selected.remove(pos);
        self.r.remove(pos);
        let s = self.selected.len();
        for i in pos..s {
            let (a, b) = (self.r[i][i], self.r[i][i + 1]);
            let rho = a.hypot(b);
            let (cs, sn) = if rho == 0.0 { (1.0, 0.0) } else { (a / rho, b / rho) };
            for col in self.r[i..].iter_mut() {
                let (x, y) = (col[i], col[i + 1]);
                col[i] = cs * x + sn * y;
                col[i + 1] = -sn * x + cs * y;
            }
            let (x, y) = (self.z[i], self.z[i + 1]);
            self.z[i] = cs * x + sn * y;
            self.z[i + 1] = -sn * x + cs * y;
            let (qa, qb) = Ranged::combine(cs, sn, &self.q[i], &self.q[i + 1]);
            self.q[i] = qa;
            self.q[i + 1] = qb;
            self.r[i].truncate(i + 1);
        }
        let dropped = self.q.pop().expect("nonempty");
        let z = self.z.pop().expect("nonempty");
        dropped.axpy_dense(z, &mut self.residual_w);
        self.solve_coefficients();
    }
}

fn weighted_atoms(atoms: &[Atom], grid: &WorkingGrid, sqrt_w: &[f64]) -> Vec<Ranged> {
    atoms
        .iter()
        .map(|a| {
            let s = grid.sample(a);
            let values = s
                .values
                .iter()
                .enumerate()
                .map(|(i, v)| v * sqrt_w[s.start + i])
                .collect();
            Ranged { start: s.start, values }
        })
        .collect()
}

/// Component of `v` orthogonal to `q`, two passes. Returns the coordinates
/// of `v` along `q` as well.
fn orthogonalize(v: &Ranged, q: &[Ranged]) -> (Ranged, Vec<f64>) {
    let mut out = v.clone();
    let mut coords = vec![0.0; q.len()];
    for _ in 0..2 {
        for (i, qi) in q.iter().enumerate() {
            let g = qi.dot(&out);
            if g != 0.0 {
                out.axpy(-g, qi);
                coords[i] += g;
            }
        }
    }
    (out, coords)
}

fn check_domain(atoms: &[Atom], f: &SampledSignal) -> Result<()> {
    let (c, d) = f.interval();
    for a in atoms {
        let (ac, ad) = a.domain();
        if (ac - c).abs() > 1e-12 * (d - c) || (ad - d).abs() > 1e-12 * (d - c) {
            return Err(Error::GridMismatch(
                "atoms and signal live on different intervals".into(),
            ));
        }
    }
    Ok(())
}

/// OOMP forward selection over the dictionary atoms.
pub fn oomp_select(dict: &Dictionary, f: &SampledSignal, stop: &StopRule) -> Result<PursuitState> {
    if !f.grid().resolves(dict.fine_spacing()) {
        return Err(Error::GridMismatch(
            "signal grid step must divide the dictionary shift step".into(),
        ));
    }
    oomp_select_atoms(dict.atoms(), f, stop)
}

/// OOMP forward selection over an arbitrary atom list sampled on `f`'s grid.
pub fn oomp_select_atoms(atoms: &[Atom], f: &SampledSignal, stop: &StopRule) -> Result<PursuitState> {
    check_domain(atoms, f)?;
    let grid = f.grid();
    let mut state = PursuitState::empty(f);
    if state.signal_norm == 0.0 {
        return Ok(state);
    }
    let cand = weighted_atoms(atoms, grid, &state.sqrt_w);
    let norm0: Vec<f64> = cand.iter().map(Ranged::norm).collect();
    let mut proj2: Vec<f64> = norm0.iter().map(|n| n * n).collect();
    let mut base2 = proj2.clone();
    let mut admissible: Vec<bool> = norm0.iter().map(|&n| n > 0.0).collect();

    while !stop.reached(state.relerr()) && state.len() < stop.max_atoms {
        let (k, q, column) = loop {
            let mut best: Option<(usize, f64)> = None;
            for (k, atom) in cand.iter().enumerate() {
                if !admissible[k] {
                    continue;
                }
                let score = atom.dot_dense(&state.residual_w).abs() / proj2[k].sqrt();
                if best.is_none_or(|(_, s)| score > s * (1.0 + TIE_TOL)) {
                    best = Some((k, score));
                }
            }
            let Some((k, score)) = best.filter(|&(_, s)| s > EXACT_RELERR * state.signal_norm)
            else {
                state.solve_coefficients();
                return Err(Error::Stagnation {
                    relerr: state.relerr(),
                    state: Box::new(state),
                });
            };
            debug_assert!(score.is_finite());
            let (mut v, mut column) = orthogonalize(&cand[k], &state.q);
            let nu = v.norm();
            if nu < EXCLUDE_TOL * norm0[k] {
                admissible[k] = false;
                continue;
            }
            v.scale(1.0 / nu);
            column.push(nu);
            break (k, v, column);
        };
        state.push(k, q, column);
        admissible[k] = false;
        let q = state.q.last().expect("just pushed");
        for j in 0..cand.len() {
            if !admissible[j] {
                continue;
            }
            let g = cand[j].dot(q);
            if g == 0.0 {
                continue;
            }
            proj2[j] -= g * g;
            if proj2[j] < REFRESH_FRACTION * base2[j] {
                let (rest, _) = orthogonalize(&cand[j], &state.q);
                let exact = rest.norm();
                proj2[j] = exact * exact;
                base2[j] = proj2[j];
                if exact < EXCLUDE_TOL * norm0[j] {
                    admissible[j] = false;
                }
            }
        }
        state.history.push(state.relerr());
    }
    state.solve_coefficients();
    Ok(state)
}

/// Removes atoms one by one, each time the one whose removal increases the
/// residual least, while the relative error stays within the target.
pub fn backward_prune(mut state: PursuitState, stop: &StopRule) -> PursuitState {
    if state.signal_norm == 0.0 {
        return state;
    }
    state.solve_coefficients();
    while !state.is_empty() {
        let inv = state.inverse_factor();
        let res2 = state.residual_norm().powi(2);
        let mut best: Option<(usize, f64)> = None;
        for (pos, c) in state.coefficients.iter().enumerate() {
            // (Gram^{-1})_{jj} is the squared norm of row j of R^{-1}
            let g: f64 = inv[pos].iter().map(|v| v * v).sum();
            let increase = c * c / g;
            let better = match best {
                None => true,
                Some((bp, bi)) => {
                    let tol = TIE_TOL * bi.abs().max(f64::MIN_POSITIVE);
                    increase < bi - tol
                        || ((increase - bi).abs() <= tol && state.selected[pos] < state.selected[bp])
                }
            };
            if better {
                best = Some((pos, increase));
            }
        }
        let (pos, increase) = best.expect("nonempty selection");
        let relerr = (res2 + increase).sqrt() / state.signal_norm;
        if !stop.reached(relerr) {
            break;
        }
        state.remove(pos);
    }
    state
}

/// Result of [`approximate`].
#[derive(Clone, Debug, PartialEq)]
pub struct Approximation {
    pub reconstruction: SampledSignal,
    /// Number of atoms used.
    pub m: usize,
    pub relerr: f64,
    pub indices: Vec<usize>,
    pub coefficients: Vec<f64>,
}

impl From<PursuitState> for Approximation {
    fn from(state: PursuitState) -> Self {
        Self {
            reconstruction: state.approximation(),
            m: state.len(),
            relerr: state.relerr(),
            indices: state.selected,
            coefficients: state.coefficients,
        }
    }
}

/// Forward OOMP followed by backward pruning.
pub fn approximate(dict: &Dictionary, f: &SampledSignal, stop: &StopRule) -> Result<Approximation> {
    let state = oomp_select(dict, f, stop)?;
    Ok(backward_prune(state, stop).into())
}

/// [`approximate`] over an arbitrary atom list.
pub fn approximate_atoms(atoms: &[Atom], f: &SampledSignal, stop: &StopRule) -> Result<Approximation> {
    let state = oomp_select_atoms(atoms, f, stop)?;
    Ok(backward_prune(state, stop).into())
}
