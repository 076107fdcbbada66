//! Cardinal B-splines, equidistant partitions and B-spline bases of the
//! cardinal spline space `S_m(Δ)` on a compact interval `[c, d]`.
//!
//! Two bases are provided. The ESEP basis translates the prototype
//! `φ(x) = (1/b) B(x/b)` into the shifts `P_b(c - mb, d)` and truncates to
//! `[c, d]`. The EPKB basis collapses the outer knots onto the interval ends
//! and evaluates each function with the Cox–de Boor recursion.

use crate::error::{Error, Result};

/// Relative tolerance used when checking that a length is an integer
/// multiple of a spacing.
pub const RATIO_TOL: f64 = 1e-12;

/// Above this order the truncated-power sum is replaced by the recursion.
pub const CLOSED_FORM_MAX_ORDER: usize = 8;

const SNAP_TOL: f64 = 1e-9;

/// Returns `n` when `len / step` is within [`RATIO_TOL`] of the integer `n`.
pub fn integer_ratio(len: f64, step: f64) -> Option<usize> {
    if !(step > 0.0) || !step.is_finite() || !len.is_finite() || len < 0.0 {
        return None;
    }
    let ratio = len / step;
    let n = ratio.round();
    if (ratio - n).abs() <= RATIO_TOL * n.max(1.0) {
        Some(n as usize)
    } else {
        None
    }
}

fn snap(t: f64) -> f64 {
    let r = t.round();
    if (t - r).abs() <= SNAP_TOL * r.abs().max(1.0) {
        r
    } else {
        t
    }
}

fn binomial(n: usize, k: usize) -> f64 {
    (0..k).fold(1.0, |acc, i| acc * (n - i) as f64 / (i + 1) as f64)
}

fn factorial(n: usize) -> f64 {
    (1..=n).fold(1.0, |acc, i| acc * i as f64)
}

/// Cardinal B-spline of order `m` on the knots `0, 1, ..., m`.
///
/// Orders up to [`CLOSED_FORM_MAX_ORDER`] use the truncated-power sum
/// `(1/(m-1)!) Σ (-1)^i C(m,i) (x-i)_+^(m-1)`; higher orders use the Cox–de Boor
/// recursion. Order 1 is the indicator of `[0, 1)`.
pub fn eval_cardinal_bspline(m: usize, x: f64) -> Result<f64> {
    if m == 0 {
        return Err(Error::InvalidOrder(m));
    }
    if m == 1 {
        return Ok(if (0.0..1.0).contains(&x) { 1.0 } else { 0.0 });
    }
    let mf = m as f64;
    if !(x > 0.0 && x < mf) {
        return Ok(0.0);
    }
    if m > CLOSED_FORM_MAX_ORDER {
        let knots: Vec<f64> = (0..=m).map(|i| i as f64).collect();
        return eval_bspline_knots(&knots, x);
    }
    // B is symmetric about m/2; the left half has smaller terms.
    let x = if x > mf / 2.0 { mf - x } else { x };
    let mut sum = 0.0;
    for i in 0..m {
        let t = x - i as f64;
        if t <= 0.0 {
            break;
        }
        let sign = if i % 2 == 0 { 1.0 } else { -1.0 };
        sum += sign * binomial(m, i) * t.powi(m as i32 - 1);
    }
    Ok(sum / factorial(m - 1))
}

/// Which polynomial piece to use when `x` sits on a knot.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Side {
    /// Piece on `[t_j, t_{j+1})`.
    Right,
    /// Piece on `(t_j, t_{j+1}]`, i.e. the limit from the left.
    Left,
}

/// B-spline on the knot window `y_i, ..., y_{i+m}` evaluated at `x`.
///
/// The value is normalized to unit integral, `m N(x) / (y_{i+m} - y_i)`, which
/// for equally spaced knots with gap `b` equals `(1/b) B((x - y_i)/b)`.
/// Right-continuous at knots.
pub fn eval_bspline_knots(knots: &[f64], x: f64) -> Result<f64> {
    eval_bspline_knots_side(knots, x, Side::Right)
}

/// Like [`eval_bspline_knots`] but with an explicit choice of piece at knots.
pub fn eval_bspline_knots_side(knots: &[f64], x: f64, side: Side) -> Result<f64> {
    if knots.len() < 2 {
        return Err(Error::InvalidOrder(0));
    }
    if knots.windows(2).any(|w| !(w[0] <= w[1])) {
        return Err(Error::UnsortedKnots);
    }
    let m = knots.len() - 1;
    let (lo, hi) = (knots[0], knots[m]);
    if lo == hi {
        return Err(Error::DegenerateKnots(knots.len()));
    }
    let inside = match side {
        Side::Right => x >= lo && x < hi,
        Side::Left => x > lo && x <= hi,
    };
    if !inside {
        return Ok(0.0);
    }
    let mut n: Vec<f64> = knots
        .windows(2)
        .map(|w| {
            let hit = match side {
                Side::Right => w[0] <= x && x < w[1],
                Side::Left => w[0] < x && x <= w[1],
            };
            if hit {
                1.0
            } else {
                0.0
            }
        })
        .collect();
    for k in 2..=m {
        for j in 0..=(m - k) {
            let left_den = knots[j + k - 1] - knots[j];
            let right_den = knots[j + k] - knots[j + 1];
            let left = if left_den > 0.0 {
                (x - knots[j]) / left_den * n[j]
            } else {
                0.0
            };
            let right = if right_den > 0.0 {
                (knots[j + k] - x) / right_den * n[j + 1]
            } else {
                0.0
            };
            n[j] = left + right;
        }
    }
    Ok(m as f64 * n[0] / (hi - lo))
}

/// Closure variant of an equidistant partition.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Closure {
    /// `P_b[c, d] = {c, c+b, ..., d}`
    Closed,
    /// `P_b(c, d) = {c+b, ..., d-b}`
    Open,
    /// `P_b(c, d] = {c+b, ..., d}`
    LeftOpen,
    /// `P_b[c, d) = {c, ..., d-b}`
    RightOpen,
}

/// Equidistant partition of an interval with spacing `b`.
#[derive(Clone, Debug, PartialEq)]
pub struct Partition {
    c: f64,
    d: f64,
    b: f64,
    closure: Closure,
    steps: usize,
}

impl Partition {
    pub fn new(c: f64, d: f64, b: f64, closure: Closure) -> Result<Self> {
        if !(c.is_finite() && d.is_finite() && d > c) {
            return Err(Error::InvalidInterval { c, d });
        }
        if !(b > 0.0 && b.is_finite()) {
            return Err(Error::InvalidSpacing(b));
        }
        let steps = integer_ratio(d - c, b)
            .filter(|&n| n >= 1)
            .ok_or(Error::IncompatibleSpacing {
                len: d - c,
                spacing: b,
            })?;
        Ok(Self { c, d, b, closure, steps })
    }

    pub fn c(&self) -> f64 {
        self.c
    }

    pub fn d(&self) -> f64 {
        self.d
    }

    pub fn spacing(&self) -> f64 {
        self.b
    }

    pub fn closure(&self) -> Closure {
        self.closure
    }

    /// Number of gaps `(d - c) / b`.
    pub fn steps(&self) -> usize {
        self.steps
    }

    /// Number of interior knots `N`.
    pub fn interior_count(&self) -> usize {
        self.steps - 1
    }

    pub fn with_closure(&self, closure: Closure) -> Self {
        Self { closure, ..self.clone() }
    }

    fn index_range(&self) -> std::ops::RangeInclusive<usize> {
        let n = self.steps;
        match self.closure {
            Closure::Closed => 0..=n,
            Closure::Open => 1..=n - 1,
            Closure::LeftOpen => 1..=n,
            Closure::RightOpen => 0..=n - 1,
        }
    }

    fn point(&self, i: usize) -> f64 {
        if i == self.steps {
            self.d
        } else {
            self.c + i as f64 * self.b
        }
    }

    pub fn len(&self) -> usize {
        self.index_range().count()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Enumerated points in increasing order.
    pub fn knots(&self) -> Vec<f64> {
        self.index_range().map(|i| self.point(i)).collect()
    }

    /// Interior points `x_1, ..., x_N`.
    pub fn interior_knots(&self) -> Vec<f64> {
        (1..self.steps).map(|i| self.point(i)).collect()
    }
}

/// Constructs an equidistant partition, see [`Partition::new`].
pub fn make_partition(c: f64, d: f64, b: f64, closure: Closure) -> Result<Partition> {
    Partition::new(c, d, b, closure)
}

/// `Δ ⊎ r`: shifts `x_0, ..., x_N` by `r` and keeps both end points.
pub fn partition_uplus(p: &Partition, r: f64) -> Result<Vec<f64>> {
    let gap = p.spacing();
    if !(r > 0.0 && r < gap) {
        return Err(Error::InvalidShift { r, min_gap: gap });
    }
    let closed = p.with_closure(Closure::Closed);
    let n = closed.steps();
    let mut out = Vec::with_capacity(n + 2);
    out.push(closed.c());
    out.extend((0..n).map(|i| closed.point(i) + r));
    out.push(closed.d());
    Ok(out)
}

/// The cardinal spline space `S_m(Δ)` over a closed equidistant partition.
#[derive(Clone, Debug, PartialEq)]
pub struct SplineSpace {
    m: usize,
    partition: Partition,
}

impl SplineSpace {
    pub fn new(m: usize, partition: Partition) -> Result<Self> {
        if m == 0 {
            return Err(Error::InvalidOrder(m));
        }
        if partition.steps() < m {
            return Err(Error::IntervalTooShort {
                len: partition.d() - partition.c(),
                m,
                b: partition.spacing(),
            });
        }
        let partition = partition.with_closure(Closure::Closed);
        Ok(Self { m, partition })
    }

    /// Shorthand for a space over `P_b[c, d]`.
    pub fn uniform(m: usize, c: f64, d: f64, b: f64) -> Result<Self> {
        Self::new(m, Partition::new(c, d, b, Closure::Closed)?)
    }

    pub fn order(&self) -> usize {
        self.m
    }

    pub fn partition(&self) -> &Partition {
        &self.partition
    }

    pub fn spacing(&self) -> f64 {
        self.partition.spacing()
    }

    pub fn interval(&self) -> (f64, f64) {
        (self.partition.c(), self.partition.d())
    }

    /// `m + N`
    pub fn dimension(&self) -> usize {
        self.m + self.partition.interior_count()
    }

    pub fn extended_partition(&self, kind: ExtendedKind) -> ExtendedPartition {
        let m = self.m;
        let p = &self.partition;
        let (c, d, b) = (p.c(), p.d(), p.spacing());
        let inner = p.interior_knots();
        let mut knots = Vec::with_capacity(2 * m + inner.len());
        match kind {
            ExtendedKind::Esep => {
                knots.extend((0..m).map(|i| c - (m - 1 - i) as f64 * b));
                knots.extend_from_slice(&inner);
                knots.extend((0..m).map(|i| d + i as f64 * b));
            }
            ExtendedKind::Epkb => {
                knots.extend(std::iter::repeat(c).take(m));
                knots.extend_from_slice(&inner);
                knots.extend(std::iter::repeat(d).take(m));
            }
        }
        ExtendedPartition { knots, kind }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ExtendedKind {
    /// Equally spaced extended partition.
    Esep,
    /// m-tuple knots on the border.
    Epkb,
}

/// Knot sequence `y_1 <= ... <= y_{2m+N}` determining a B-spline basis.
#[derive(Clone, Debug, PartialEq)]
pub struct ExtendedPartition {
    pub knots: Vec<f64>,
    pub kind: ExtendedKind,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum AtomVariant {
    Inner,
    LeftBoundary,
    RightBoundary,
}

#[derive(Clone, Debug, PartialEq)]
pub enum AtomShape {
    /// `(1/scale) B((x - shift)/scale)`
    Cardinal { shift: f64, scale: f64 },
    /// Unit-integral B-spline on an explicit knot window.
    Knots(Vec<f64>),
}

/// One B-spline function restricted to `[c, d]`.
#[derive(Clone, Debug, PartialEq)]
pub struct Atom {
    m: usize,
    domain: (f64, f64),
    variant: AtomVariant,
    shape: AtomShape,
}

impl Atom {
    /// Translate `φ(x - shift)` of the prototype `φ(x) = (1/b) B(x/b)`,
    /// truncated to `[c, d]`. The variant follows from where the untruncated
    /// support `[shift, shift + m b]` sits relative to the interval.
    pub fn cardinal(m: usize, shift: f64, scale: f64, domain: (f64, f64)) -> Self {
        let (c, d) = domain;
        let tol = SNAP_TOL * scale;
        let variant = if shift < c - tol {
            AtomVariant::LeftBoundary
        } else if shift + m as f64 * scale > d + tol {
            AtomVariant::RightBoundary
        } else {
            AtomVariant::Inner
        };
        Self {
            m,
            domain,
            variant,
            shape: AtomShape::Cardinal { shift, scale },
        }
    }

    pub fn from_knots(knots: Vec<f64>, domain: (f64, f64), variant: AtomVariant) -> Self {
        Self {
            m: knots.len() - 1,
            domain,
            variant,
            shape: AtomShape::Knots(knots),
        }
    }

    pub fn order(&self) -> usize {
        self.m
    }

    pub fn variant(&self) -> AtomVariant {
        self.variant
    }

    pub fn shape(&self) -> &AtomShape {
        &self.shape
    }

    pub fn domain(&self) -> (f64, f64) {
        self.domain
    }

    /// Left end of the untruncated support.
    pub fn shift(&self) -> f64 {
        match &self.shape {
            AtomShape::Cardinal { shift, .. } => *shift,
            AtomShape::Knots(k) => k[0],
        }
    }

    /// Support `[lo, hi]` within the domain.
    pub fn support(&self) -> (f64, f64) {
        let (c, d) = self.domain;
        let (lo, hi) = match &self.shape {
            AtomShape::Cardinal { shift, scale } => (*shift, shift + self.m as f64 * scale),
            AtomShape::Knots(k) => (k[0], k[self.m]),
        };
        (lo.max(c), hi.min(d))
    }

    /// Value at `x`; zero outside `[c, d]`. At `x = d` the left limit is used
    /// so the last order-1 atom is closed on the right.
    pub fn eval(&self, x: f64) -> f64 {
        let (c, d) = self.domain;
        let tol = SNAP_TOL * (d - c);
        if x < c - tol || x > d + tol {
            return 0.0;
        }
        let at_right_end = x >= d - tol;
        match &self.shape {
            AtomShape::Cardinal { shift, scale } => {
                let t = snap((x - shift) / scale);
                let v = if self.m == 1 {
                    let hit = if at_right_end {
                        t > 0.0 && t <= 1.0
                    } else {
                        (0.0..1.0).contains(&t)
                    };
                    if hit {
                        1.0
                    } else {
                        0.0
                    }
                } else {
                    eval_cardinal_bspline(self.m, t).unwrap_or(0.0)
                };
                v / scale
            }
            AtomShape::Knots(knots) => {
                let side = if at_right_end { Side::Left } else { Side::Right };
                let x = if at_right_end { d } else { x };
                eval_bspline_knots_side(knots, x, side).unwrap_or(0.0)
            }
        }
    }
}

/// ESEP basis of `S_m(Δ)`: shifts `P_b(c - mb, d)` in increasing order.
pub fn build_esep_basis(space: &SplineSpace) -> Vec<Atom> {
    let m = space.order() as i64;
    let p = space.partition();
    let n = p.steps() as i64;
    let (c, d, b) = (p.c(), p.d(), p.spacing());
    ((1 - m)..n)
        .map(|j| Atom::cardinal(m as usize, c + j as f64 * b, b, (c, d)))
        .collect()
}

/// EPKB basis of `S_m(Δ)`: consecutive knot windows of the extended
/// partition with m-fold knots at `c` and `d`.
pub fn build_epkb_basis(space: &SplineSpace) -> Vec<Atom> {
    let m = space.order();
    let ext = space.extended_partition(ExtendedKind::Epkb);
    let last_inner = space.partition().steps() - 1;
    (0..space.dimension())
        .map(|i| {
            let variant = if i + 1 < m {
                AtomVariant::LeftBoundary
            } else if i > last_inner {
                AtomVariant::RightBoundary
            } else {
                AtomVariant::Inner
            };
            Atom::from_knots(ext.knots[i..=i + m].to_vec(), space.interval(), variant)
        })
        .collect()
}
