//! Test signals on uniform grids: random blocky signals, modulated chirps,
//! approximation metrics and two-column CSV exchange.

use std::f64::consts::PI;
use std::io::{BufRead, Write};

use rand::seq::index::sample;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::grid::WorkingGrid;
use crate::io::fmt_f64;
use crate::spline::integer_ratio;

/// Default breakpoint grid of blocky signals, `2^-8`.
pub const DEFAULT_BREAKPOINT_STEP: f64 = 1.0 / 256.0;
/// Default number of blocks.
pub const DEFAULT_BLOCKS: usize = 10;

/// Samples of a function at the nodes of a uniform grid on `[c, d]`.
#[derive(Clone, Debug, PartialEq)]
pub struct SampledSignal {
    grid: WorkingGrid,
    pub samples: Vec<f64>,
    pub provenance: String,
}

impl SampledSignal {
    pub fn new(grid: WorkingGrid, samples: Vec<f64>, provenance: impl Into<String>) -> Result<Self> {
        if samples.len() != grid.len() {
            return Err(Error::GridMismatch(format!(
                "{} samples for a grid of {} nodes",
                samples.len(),
                grid.len()
            )));
        }
        Ok(Self {
            grid,
            samples,
            provenance: provenance.into(),
        })
    }

    pub fn from_fn(grid: WorkingGrid, f: impl Fn(f64) -> f64, provenance: impl Into<String>) -> Self {
        let samples = grid.sample_fn(f);
        Self {
            grid,
            samples,
            provenance: provenance.into(),
        }
    }

    pub fn zeros(grid: WorkingGrid) -> Self {
        let samples = vec![0.0; grid.len()];
        Self {
            grid,
            samples,
            provenance: "zero".into(),
        }
    }

    pub fn grid(&self) -> &WorkingGrid {
        &self.grid
    }

    pub fn interval(&self) -> (f64, f64) {
        self.grid.interval()
    }

    pub fn step(&self) -> f64 {
        self.grid.step()
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    /// Trapezoid L² norm.
    pub fn norm(&self) -> f64 {
        self.grid.norm(&self.samples)
    }

    pub fn same_grid(&self, other: &SampledSignal) -> bool {
        self.grid == other.grid
    }

    /// Writes `t,value` rows with a header line.
    pub fn write_csv<W: Write>(&self, mut out: W) -> std::io::Result<()> {
        writeln!(out, "t,value")?;
        for (i, v) in self.samples.iter().enumerate() {
            writeln!(out, "{},{}", fmt_f64(self.grid.point(i)), fmt_f64(*v))?;
        }
        Ok(())
    }

    /// Reads a two-column `t,value` table. The grid is rebuilt from the first
    /// and last abscissa and the row count; abscissae must be uniform.
    pub fn read_csv<R: BufRead>(input: R, provenance: impl Into<String>) -> Result<Self> {
        let mut ts = Vec::new();
        let mut vs = Vec::new();
        let mut lines = input.lines();
        let header = lines
            .next()
            .ok_or_else(|| Error::Parse("empty signal file".into()))??;
        if header.split(',').count() != 2 {
            return Err(Error::Parse(format!("expected a two-column header, got {header:?}")));
        }
        for (lineno, line) in lines.enumerate() {
            let line = line?;
            if line.trim().is_empty() {
                continue;
            }
            let (t, v) = line
                .split_once(',')
                .ok_or_else(|| Error::Parse(format!("line {}: expected `t,value`", lineno + 2)))?;
            let parse = |s: &str| {
                s.trim()
                    .parse::<f64>()
                    .map_err(|_| Error::Parse(format!("line {}: bad number {s:?}", lineno + 2)))
            };
            ts.push(parse(t)?);
            vs.push(parse(v)?);
        }
        if ts.len() < 2 {
            return Err(Error::Parse("need at least two samples".into()));
        }
        let (c, d) = (ts[0], ts[ts.len() - 1]);
        let h = (d - c) / (ts.len() - 1) as f64;
        let grid = WorkingGrid::new(c, d, h)?;
        let uniform = ts
            .iter()
            .enumerate()
            .all(|(i, &t)| (t - grid.point(i)).abs() <= 1e-9 * h);
        if !uniform {
            return Err(Error::Parse("abscissae are not uniformly spaced".into()));
        }
        Self::new(grid, vs, provenance)
    }
}

/// Piecewise-constant signal with `n_blocks - 1` breakpoints drawn without
/// replacement from the interior of the breakpoint grid `P_step(c, d)` and
/// block amplitudes drawn uniformly from `[-1, 1]`. Blocks are closed on the
/// left; the last block also contains `d`.
///
/// Random numbers come from ChaCha8 seeded with `seed`.
pub fn gen_blocky(
    seed: u64,
    n_blocks: usize,
    domain: (f64, f64),
    breakpoint_step: f64,
    grid: &WorkingGrid,
) -> Result<SampledSignal> {
    let (c, d) = domain;
    if grid.interval() != domain {
        return Err(Error::GridMismatch("grid does not cover the signal domain".into()));
    }
    if n_blocks == 0 {
        return Err(Error::InvalidParameter("n_blocks must be at least 1".into()));
    }
    let steps = integer_ratio(d - c, breakpoint_step).ok_or(Error::IncompatibleSpacing {
        len: d - c,
        spacing: breakpoint_step,
    })?;
    if !grid.resolves(breakpoint_step) {
        return Err(Error::GridMismatch(
            "grid step must divide the breakpoint step".into(),
        ));
    }
    let available = steps.saturating_sub(1);
    if n_blocks - 1 > available {
        return Err(Error::TooManyBlocks {
            n_blocks,
            needed: n_blocks - 1,
            available,
        });
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut cuts: Vec<usize> = sample(&mut rng, available, n_blocks - 1)
        .into_iter()
        .map(|i| i + 1)
        .collect();
    cuts.sort_unstable();
    let amplitudes: Vec<f64> = (0..n_blocks).map(|_| rng.gen_range(-1.0..=1.0)).collect();

    let per_step = integer_ratio(breakpoint_step, grid.step()).expect("checked above");
    let samples = (0..grid.len())
        .map(|i| {
            // block index = number of cuts at or left of the node
            let cell = i / per_step;
            amplitudes[cuts.partition_point(|&cut| cut <= cell)]
        })
        .collect();
    SampledSignal::new(
        grid.clone(),
        samples,
        format!("blocky(seed={seed}, blocks={n_blocks})"),
    )
}

/// Amplitude modulation of a chirp.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Envelope {
    Constant(f64),
    /// `a (1 - cos(2π (t - c)/T)) / 2`, vanishing at both ends.
    RaisedCosine(f64),
}

impl Envelope {
    pub fn eval(&self, s: f64) -> f64 {
        match *self {
            Envelope::Constant(a) => a,
            Envelope::RaisedCosine(a) => 0.5 * a * (1.0 - (2.0 * PI * s).cos()),
        }
    }
}

/// Linear chirp sweeping from `f0` to `f1` over the domain.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ChirpParams {
    pub f0: f64,
    pub f1: f64,
    pub envelope: Envelope,
}

impl Default for ChirpParams {
    fn default() -> Self {
        Self {
            f0: 1.0,
            f1: 12.0,
            envelope: Envelope::RaisedCosine(1.0),
        }
    }
}

/// Default chirp domain `[0, 2]`.
pub const DEFAULT_CHIRP_DOMAIN: (f64, f64) = (0.0, 2.0);

/// Samples `a(t) sin(2π (f0 t + (f1 - f0) t² / (2T)))` with `t` measured
/// from `c` and `T = d - c`.
pub fn gen_chirp(params: &ChirpParams, grid: &WorkingGrid) -> SampledSignal {
    let (c, d) = grid.interval();
    let span = d - c;
    let sweep = (params.f1 - params.f0) / (2.0 * span);
    SampledSignal::from_fn(
        grid.clone(),
        |x| {
            let t = x - c;
            params.envelope.eval(t / span) * (2.0 * PI * (params.f0 * t + sweep * t * t)).sin()
        },
        format!("chirp(f0={}, f1={})", params.f0, params.f1),
    )
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Metrics {
    /// `‖f - g‖ / ‖f‖` in the trapezoid norm.
    pub l2_relerr: f64,
    pub max_abs_err: f64,
}

/// Error of `g` as an approximation of `f`. A zero reference gives relative
/// error 0 when `g` is zero too, and infinity otherwise.
pub fn metrics(f: &SampledSignal, g: &SampledSignal) -> Result<Metrics> {
    if !f.same_grid(g) {
        return Err(Error::GridMismatch("signals are sampled on different grids".into()));
    }
    let diff: Vec<f64> = f.samples.iter().zip(&g.samples).map(|(a, b)| a - b).collect();
    let err = f.grid.norm(&diff);
    let norm = f.norm();
    let l2_relerr = if norm > 0.0 {
        err / norm
    } else if err == 0.0 {
        0.0
    } else {
        f64::INFINITY
    };
    let max_abs_err = diff.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    Ok(Metrics { l2_relerr, max_abs_err })
}
