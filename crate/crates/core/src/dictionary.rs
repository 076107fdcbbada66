//! Wide-support B-spline dictionaries `D_m(Δ, b')`.
//!
//! The dictionary translates the coarse prototype `φ(x) = (1/b) B(x/b)` into
//! every point of the fine shift grid `P_{b'}(c - mb, d)` and truncates to
//! `[c, d]`. Its span is the fine space `S_m(Δ')`; this module builds the
//! atoms, expresses each one in the fine ESEP basis (scaling equations),
//! runs the elimination recursion that writes every fine basis function back
//! in terms of dictionary atoms, certifies span equality numerically and
//! computes frame bounds.
//!
//! Shifts live on the lattice `c + j b'`. Dictionary atom `i` has lattice
//! index `j = i + 1 - m r`, where `r = b/b'`; fine basis function `i` has
//! lattice index `n = i + 1 - m`.

use std::fmt;
use std::str::FromStr;

use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::grid::WorkingGrid;
use crate::linalg::{column_space, lstsq, relative_residual};
use crate::spline::{build_esep_basis, integer_ratio, Atom, Partition, SplineSpace};

/// Relative residual bound for the scaling equations.
pub const SCALING_TOL: f64 = 1e-8;
/// Relative residual bound used by span certification.
pub const CERTIFY_TOL: f64 = 1e-6;
/// Rank threshold relative to the largest singular value of the weighted
/// synthesis matrix.
pub const RANK_TOL: f64 = 1e-8;
/// Smallest admissible pivot magnitude in the elimination recursion.
pub const PIVOT_TOL: f64 = 1e-10;

#[derive(Clone, Debug, PartialEq)]
pub struct Dictionary {
    m: usize,
    b: f64,
    b_prime: f64,
    c: f64,
    d: f64,
    ratio: usize,
    fine_steps: usize,
    atoms: Vec<Atom>,
}

/// Builds `D_m(Δ, b')` from the coarse partition `Δ = P_b[c, d]`.
pub fn build_dictionary(m: usize, coarse: &Partition, b_prime: f64) -> Result<Dictionary> {
    let space = SplineSpace::new(m, coarse.clone())?;
    let (c, d) = space.interval();
    let b = space.spacing();
    if !(b_prime > 0.0 && b_prime.is_finite()) {
        return Err(Error::InvalidSpacing(b_prime));
    }
    let ratio = integer_ratio(b, b_prime)
        .filter(|&r| r >= 1)
        .ok_or(Error::IncompatibleRefinement { b, b_prime })?;
    let fine_steps = coarse.steps() * ratio;
    let first = 1 - (m * ratio) as i64;
    let atoms = (first..fine_steps as i64)
        .map(|j| Atom::cardinal(m, c + j as f64 * b_prime, b, (c, d)))
        .collect();
    Ok(Dictionary {
        m,
        b,
        b_prime,
        c,
        d,
        ratio,
        fine_steps,
        atoms,
    })
}

impl Dictionary {
    pub fn order(&self) -> usize {
        self.m
    }

    /// Coarse spacing `b`; the atoms have support `m b`.
    pub fn spacing(&self) -> f64 {
        self.b
    }

    /// Fine spacing `b'` of the shift grid.
    pub fn fine_spacing(&self) -> f64 {
        self.b_prime
    }

    pub fn interval(&self) -> (f64, f64) {
        (self.c, self.d)
    }

    /// `b / b'`
    pub fn ratio(&self) -> usize {
        self.ratio
    }

    /// `p = b/b' - 1`, the number of shifted copies of the coarse basis.
    pub fn p(&self) -> usize {
        self.ratio - 1
    }

    /// Number of atoms `K = (d - c + mb)/b' - 1`.
    pub fn len(&self) -> usize {
        self.atoms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.atoms.is_empty()
    }

    pub fn atoms(&self) -> &[Atom] {
        &self.atoms
    }

    /// Number of fine gaps `(d - c)/b'`.
    pub fn fine_steps(&self) -> usize {
        self.fine_steps
    }

    /// Lattice index of the first atom, `1 - m r`.
    pub fn first_lattice_index(&self) -> i64 {
        1 - (self.m * self.ratio) as i64
    }

    pub fn lattice_index(&self, atom: usize) -> i64 {
        atom as i64 + self.first_lattice_index()
    }

    pub fn atom_at_lattice(&self, j: i64) -> Option<usize> {
        let i = j - self.first_lattice_index();
        (i >= 0 && (i as usize) < self.len()).then_some(i as usize)
    }

    pub fn shift(&self, atom: usize) -> f64 {
        self.atoms[atom].shift()
    }

    pub fn coarse_space(&self) -> SplineSpace {
        SplineSpace::uniform(self.m, self.c, self.d, self.b).expect("validated at construction")
    }

    /// The space `S_m(Δ')` the dictionary spans.
    pub fn fine_space(&self) -> SplineSpace {
        SplineSpace::uniform(self.m, self.c, self.d, self.b_prime)
            .expect("validated at construction")
    }

    /// Working grid with step `b'/q`.
    pub fn working_grid(&self, q: usize) -> Result<WorkingGrid> {
        WorkingGrid::for_spacing(self.c, self.d, self.b_prime, q)
    }
}

/// One family of the disjoint decomposition of the shift grid: the coarse
/// shifts moved by `offset_steps · b'`.
#[derive(Clone, Debug, PartialEq)]
pub struct ShiftFamily {
    pub offset_steps: usize,
    pub offset: f64,
    pub atoms: Vec<usize>,
}

/// Splits the dictionary into the coarse ESEP basis (shifts `P_b(c-mb, d)`)
/// and the `p` translated copies with shifts `P_b[c-mb, d) + i b'`.
pub fn union_decomposition(dict: &Dictionary) -> Vec<ShiftFamily> {
    let m = dict.m as i64;
    let r = dict.ratio as i64;
    let coarse_steps = (dict.fine_steps / dict.ratio) as i64;
    let lookup = |s: i64, i: i64| dict.atom_at_lattice(s * r + i).expect("shift on the grid");
    let mut families = Vec::with_capacity(dict.ratio);
    families.push(ShiftFamily {
        offset_steps: 0,
        offset: 0.0,
        atoms: ((1 - m)..coarse_steps).map(|s| lookup(s, 0)).collect(),
    });
    for i in 1..r {
        families.push(ShiftFamily {
            offset_steps: i as usize,
            offset: i as f64 * dict.b_prime,
            atoms: (-m..coarse_steps).map(|s| lookup(s, i)).collect(),
        });
    }
    families
}

/// Which of the three scaling-equation classes an atom belongs to.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ScalingClass {
    /// Support contains `c` and is shorter than `mb`.
    Left,
    /// Full-support translate of the prototype.
    Inner,
    /// Support contains `d` and is shorter than `mb`.
    Right,
}

/// Fine-basis expansion of one dictionary atom over the contiguous fine
/// lattice range `fine_lo..=fine_hi`.
#[derive(Clone, Debug, PartialEq)]
pub struct ScalingEquation {
    pub class: ScalingClass,
    pub fine_lo: i64,
    pub fine_hi: i64,
    pub coefficients: Vec<f64>,
    pub residual: f64,
}

impl ScalingEquation {
    pub fn coefficient(&self, n: i64) -> f64 {
        if n < self.fine_lo || n > self.fine_hi {
            0.0
        } else {
            self.coefficients[(n - self.fine_lo) as usize]
        }
    }
}

/// Coefficients `h[n, k]` with `φ_k = Σ_n h[n, k] φ'_n`, one equation per
/// dictionary atom.
#[derive(Clone, Debug, PartialEq)]
pub struct ScalingSystem {
    m: usize,
    ratio: usize,
    fine_steps: usize,
    equations: Vec<ScalingEquation>,
}

impl ScalingSystem {
    pub fn order(&self) -> usize {
        self.m
    }

    pub fn ratio(&self) -> usize {
        self.ratio
    }

    pub fn fine_steps(&self) -> usize {
        self.fine_steps
    }

    fn dict_first(&self) -> i64 {
        1 - (self.m * self.ratio) as i64
    }

    fn fine_first(&self) -> i64 {
        1 - self.m as i64
    }

    pub fn equations(&self) -> &[ScalingEquation] {
        &self.equations
    }

    /// Equation of the atom with lattice shift index `k`.
    pub fn equation(&self, k: i64) -> Option<&ScalingEquation> {
        let i = k - self.dict_first();
        (i >= 0).then(|| self.equations.get(i as usize)).flatten()
    }

    /// `h[n, k]`, zero outside the stored index set.
    pub fn h(&self, n: i64, k: i64) -> f64 {
        self.equation(k).map_or(0.0, |e| e.coefficient(n))
    }

    pub fn max_residual(&self) -> f64 {
        self.equations.iter().map(|e| e.residual).fold(0.0, f64::max)
    }

    /// Index set of the scaling equation for shift `k`, as fine lattice
    /// bounds.
    pub fn index_set(m: usize, ratio: usize, fine_steps: usize, k: i64) -> (ScalingClass, i64, i64) {
        let (m, r, n) = (m as i64, ratio as i64, fine_steps as i64);
        let span = m * (r - 1);
        if k < 0 {
            // J_L = P_{b'}(c - m b', k + m(b - b')]
            (ScalingClass::Left, 1 - m, k + span)
        } else if k <= n - m * r {
            // J_I = P_{b'}[k, k + m(b - b')]
            (ScalingClass::Inner, k, k + span)
        } else {
            // J_R = P_{b'}[k, d)
            (ScalingClass::Right, k, n - 1)
        }
    }

    /// Pivot of the elimination step for fine index `n`: `h[n, n]` on
    /// `[c, d)`, and `h[n, n - m(r - 1)]` on the left boundary.
    pub fn pivot(&self, n: i64) -> Result<(i64, f64)> {
        if n < self.fine_first() || n >= self.fine_steps as i64 {
            return Err(Error::FineIndexOutOfRange(n));
        }
        let k = if n >= 0 {
            n
        } else {
            n - (self.m * (self.ratio - 1)) as i64
        };
        let value = self.h(n, k);
        if value.abs() < PIVOT_TOL {
            return Err(Error::SingularPivot { fine: n, coarse: k, value });
        }
        Ok((k, value))
    }
}

/// Least-squares scaling coefficients of every dictionary atom against the
/// fine ESEP basis, each restricted to its class index set.
pub fn compute_scaling_system(
    dict: &Dictionary,
    fine_basis: &[Atom],
    grid: &WorkingGrid,
) -> Result<ScalingSystem> {
    let fine_dim = dict.fine_space().dimension();
    if fine_basis.len() != fine_dim {
        return Err(Error::InvalidParameter(format!(
            "fine basis has {} atoms, expected {fine_dim}",
            fine_basis.len()
        )));
    }
    if grid.interval() != dict.interval() || !grid.resolves(dict.fine_spacing()) {
        return Err(Error::GridMismatch(
            "grid must cover the dictionary interval and resolve b'".into(),
        ));
    }
    let fine = grid.weighted_matrix(&grid.sample_all(fine_basis));
    let coarse = grid.weighted_matrix(&grid.sample_all(dict.atoms()));
    let fine_first = 1 - dict.m as i64;
    let mut equations = Vec::with_capacity(dict.len());
    for i in 0..dict.len() {
        let k = dict.lattice_index(i);
        let (class, lo, hi) = ScalingSystem::index_set(dict.m, dict.ratio, dict.fine_steps, k);
        let cols: Vec<usize> = (lo..=hi).map(|n| (n - fine_first) as usize).collect();
        let a = fine.select_columns(&cols);
        let target: DVector<f64> = coarse.column(i).into_owned();
        let h = lstsq(&a, &target);
        let norm = target.norm();
        let residual = if norm > 0.0 {
            (&a * &h - &target).norm() / norm
        } else {
            0.0
        };
        equations.push(ScalingEquation {
            class,
            fine_lo: lo,
            fine_hi: hi,
            coefficients: h.iter().copied().collect(),
            residual,
        });
    }
    let system = ScalingSystem {
        m: dict.m,
        ratio: dict.ratio,
        fine_steps: dict.fine_steps,
        equations,
    };
    for n in fine_first..dict.fine_steps as i64 {
        system.pivot(n)?;
    }
    Ok(system)
}

fn eliminate_range(scal: &ScalingSystem, l: i64) -> Result<Vec<f64>> {
    let k_count = scal.equations.len();
    let dict_first = scal.dict_first();
    let n_fine = scal.fine_steps as i64;
    let unit = |k: i64| {
        let mut e = vec![0.0; k_count];
        e[(k - dict_first) as usize] = 1.0;
        e
    };
    if l >= 0 {
        // φ'_k = φ_k / h[k,k] - Σ_{n in [k+b', d)} (h[n,k]/h[k,k]) φ'_n,
        // evaluated at k = d - b', d - 2b', ..., l.
        let mut memo: Vec<Vec<f64>> = Vec::with_capacity((n_fine - l) as usize);
        for k in (l..n_fine).rev() {
            let (_, pivot) = scal.pivot(k)?;
            let eq = scal.equation(k).expect("k on the grid");
            let mut e = unit(k);
            e.iter_mut().for_each(|v| *v /= pivot);
            for n in (k + 1)..=eq.fine_hi {
                let w = eq.coefficient(n) / pivot;
                if w == 0.0 {
                    continue;
                }
                let prev = &memo[(n_fine - 1 - n) as usize];
                e.iter_mut().zip(prev).for_each(|(v, p)| *v -= w * p);
            }
            memo.push(e);
        }
        Ok(memo.pop().expect("at least one step"))
    } else {
        // φ'_n = (φ_k - Σ_{n' < n} h[n',k] φ'_{n'}) / h[n,k], k = n - m(b - b'),
        // evaluated upward from the leftmost fine function.
        let first = 1 - scal.m as i64;
        let mut memo: Vec<Vec<f64>> = Vec::with_capacity((l - first + 1) as usize);
        for n in first..=l {
            let (k, pivot) = scal.pivot(n)?;
            let eq = scal.equation(k).expect("k on the grid");
            let mut e = unit(k);
            for np in eq.fine_lo..n {
                let w = eq.coefficient(np);
                if w == 0.0 {
                    continue;
                }
                let prev = &memo[(np - first) as usize];
                e.iter_mut().zip(prev).for_each(|(v, p)| *v -= w * p);
            }
            e.iter_mut().for_each(|v| *v /= pivot);
            memo.push(e);
        }
        Ok(memo.pop().expect("at least one step"))
    }
}

/// Coefficients over the dictionary atoms expressing the fine basis function
/// with lattice index `l` (shift `c + l b'`).
///
/// For `l` in `[0, (d-c)/b')` the recursion runs from the right end down to
/// `l`; for the left boundary functions it runs upward from `1 - m`.
pub fn eliminate_fine_atom(scal: &ScalingSystem, l: i64) -> Result<Vec<f64>> {
    if l < scal.fine_first() || l >= scal.fine_steps as i64 {
        return Err(Error::FineIndexOutOfRange(l));
    }
    eliminate_range(scal, l)
}

/// Expansions of every fine basis function, in fine basis order.
pub fn eliminate_all(scal: &ScalingSystem) -> Result<Vec<Vec<f64>>> {
    (scal.fine_first()..scal.fine_steps as i64)
        .map(|l| eliminate_fine_atom(scal, l))
        .collect()
}

/// Two-sided energy bounds of the dictionary on its span.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct FrameBounds {
    pub lower: f64,
    pub upper: f64,
}

/// Outcome of a span-equality check.
#[derive(Clone, Debug, PartialEq)]
pub struct CertificationReport {
    pub m: usize,
    pub b: f64,
    pub b_prime: f64,
    pub k: usize,
    pub rank: usize,
    pub expected_dim: usize,
    pub max_residual_fine_in_dict: f64,
    pub max_residual_dict_in_fine: f64,
    pub frame: Option<FrameBounds>,
    pub pass: bool,
}

/// Certifies `Span D_m(Δ, b') = S_m(Δ')` against the fine ESEP basis.
pub fn certify_span_equality(
    dict: &Dictionary,
    fine_space: &SplineSpace,
    grid: &WorkingGrid,
) -> CertificationReport {
    let basis = build_esep_basis(fine_space);
    certify_against(dict, &basis, fine_space.dimension(), grid)
}

/// Certifies that the dictionary and `fine_basis` span the same space of
/// dimension `expected_dim` on `grid`.
pub fn certify_against(
    dict: &Dictionary,
    fine_basis: &[Atom],
    expected_dim: usize,
    grid: &WorkingGrid,
) -> CertificationReport {
    let dmat = grid.weighted_matrix(&grid.sample_all(dict.atoms()));
    let fmat = grid.weighted_matrix(&grid.sample_all(fine_basis));
    let (dict_range, sigma) = column_space(&dmat, RANK_TOL);
    let (fine_range, _) = column_space(&fmat, 1e-12);
    let worst = |q: &DMatrix<f64>, m: &DMatrix<f64>| {
        m.column_iter()
            .map(|col| relative_residual(q, &col.into_owned()))
            .fold(0.0, f64::max)
    };
    let fine_in_dict = worst(&dict_range, &fmat);
    let dict_in_fine = worst(&fine_range, &dmat);
    let rank = numerical_rank(&sigma);
    let pass = fine_in_dict < CERTIFY_TOL && dict_in_fine < CERTIFY_TOL && rank == expected_dim;
    CertificationReport {
        m: dict.order(),
        b: dict.spacing(),
        b_prime: dict.fine_spacing(),
        k: dict.len(),
        rank,
        expected_dim,
        max_residual_fine_in_dict: fine_in_dict,
        max_residual_dict_in_fine: dict_in_fine,
        frame: None,
        pass,
    }
}

/// Gram eigenvalues are the squared singular values of the weighted
/// synthesis matrix.
fn gram_eigenvalues(sigma: &[f64]) -> Vec<f64> {
    sigma.iter().map(|s| s * s).collect()
}

/// Number of singular values above `RANK_TOL · σ_max`; this is also the
/// rank of the Gram matrix.
fn numerical_rank(sigma: &[f64]) -> usize {
    let max = sigma.first().copied().unwrap_or(0.0);
    sigma.iter().filter(|&&s| max > 0.0 && s > RANK_TOL * max).count()
}

/// Frame bounds of the discretized dictionary: the smallest nonzero and the
/// largest eigenvalue of its Gram matrix on `grid`. These converge to the
/// bounds for the continuous inner product as the grid step shrinks.
pub fn frame_bounds(dict: &Dictionary, grid: &WorkingGrid) -> Result<FrameBounds> {
    let expected = dict.fine_space().dimension();
    let dmat = grid.weighted_matrix(&grid.sample_all(dict.atoms()));
    let (_, sigma) = column_space(&dmat, RANK_TOL);
    let eig = gram_eigenvalues(&sigma);
    let found = numerical_rank(&sigma);
    if found != expected {
        return Err(Error::RankDeficient { expected, found });
    }
    Ok(FrameBounds {
        lower: eig[found - 1],
        upper: eig[0],
    })
}

/// Summary of a randomized check of the frame inequality.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct FrameCheck {
    pub samples: usize,
    pub violations: usize,
    /// Smallest observed `Σ|<f,φ_k>|² / ‖f‖²`.
    pub min_ratio: f64,
    /// Largest observed `Σ|<f,φ_k>|² / ‖f‖²`.
    pub max_ratio: f64,
}

/// Draws `samples` seeded random elements `f = Σ c_k φ_k` of the span and
/// counts violations of `A‖f‖²(1-slack) <= Σ|<f,φ_k>|² <= B‖f‖²(1+slack)`.
pub fn check_frame_inequality(
    dict: &Dictionary,
    grid: &WorkingGrid,
    bounds: FrameBounds,
    samples: usize,
    seed: u64,
    slack: f64,
) -> FrameCheck {
    let dmat = grid.weighted_matrix(&grid.sample_all(dict.atoms()));
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut check = FrameCheck {
        samples,
        violations: 0,
        min_ratio: f64::INFINITY,
        max_ratio: 0.0,
    };
    for _ in 0..samples {
        let coeffs = DVector::from_fn(dict.len(), |_, _| rng.gen_range(-1.0..1.0));
        let f = &dmat * coeffs;
        let energy = (dmat.transpose() * &f).norm_squared();
        let norm2 = f.norm_squared();
        let ratio = energy / norm2;
        check.min_ratio = check.min_ratio.min(ratio);
        check.max_ratio = check.max_ratio.max(ratio);
        if energy < bounds.lower * norm2 * (1.0 - slack) || energy > bounds.upper * norm2 * (1.0 + slack) {
            check.violations += 1;
        }
    }
    check
}

impl CertificationReport {
    pub fn with_frame(mut self, frame: FrameBounds) -> Self {
        self.frame = Some(frame);
        self
    }
}

impl fmt::Display for CertificationReport {
    /// `key: value` lines; floats carry 17 significant digits.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let (a, b) = self
            .frame
            .map_or((f64::NAN, f64::NAN), |fb| (fb.lower, fb.upper));
        writeln!(f, "m: {}", self.m)?;
        writeln!(f, "b: {}", crate::io::fmt_f64(self.b))?;
        writeln!(f, "b_prime: {}", crate::io::fmt_f64(self.b_prime))?;
        writeln!(f, "K: {}", self.k)?;
        writeln!(f, "rank: {}", self.rank)?;
        writeln!(f, "expected_dim: {}", self.expected_dim)?;
        writeln!(
            f,
            "max_residual_fine_in_dict: {}",
            crate::io::fmt_f64(self.max_residual_fine_in_dict)
        )?;
        writeln!(
            f,
            "max_residual_dict_in_fine: {}",
            crate::io::fmt_f64(self.max_residual_dict_in_fine)
        )?;
        writeln!(f, "A: {}", crate::io::fmt_f64(a))?;
        writeln!(f, "B: {}", crate::io::fmt_f64(b))?;
        writeln!(f, "pass: {}", self.pass)
    }
}

impl FromStr for CertificationReport {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let mut fields = std::collections::HashMap::new();
        for line in s.lines().filter(|l| !l.trim().is_empty()) {
            let (key, value) = line
                .split_once(':')
                .ok_or_else(|| Error::Parse(format!("expected `key: value`, got {line:?}")))?;
            fields.insert(key.trim().to_string(), value.trim().to_string());
        }
        fn get<T: FromStr>(fields: &std::collections::HashMap<String, String>, key: &str) -> Result<T> {
            fields
                .get(key)
                .ok_or_else(|| Error::Parse(format!("missing field {key}")))?
                .parse()
                .map_err(|_| Error::Parse(format!("bad value for {key}")))
        }
        let a: f64 = get(&fields, "A")?;
        let b: f64 = get(&fields, "B")?;
        Ok(Self {
            m: get(&fields, "m")?,
            b: get(&fields, "b")?,
            b_prime: get(&fields, "b_prime")?,
            k: get(&fields, "K")?,
            rank: get(&fields, "rank")?,
            expected_dim: get(&fields, "expected_dim")?,
            max_residual_fine_in_dict: get(&fields, "max_residual_fine_in_dict")?,
            max_residual_dict_in_fine: get(&fields, "max_residual_dict_in_fine")?,
            frame: (!a.is_nan() && !b.is_nan()).then_some(FrameBounds { lower: a, upper: b }),
            pass: get(&fields, "pass")?,
        })
    }
}
