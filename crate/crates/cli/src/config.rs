//! Run configuration: command-line flags layered over an optional TOML file.

use std::fmt;
use std::path::{Path, PathBuf};

use bspline_dict::{Closure, Partition, SplineSpace, DEFAULT_GRID_Q};
use clap::{Args, ValueEnum};
use serde::Deserialize;

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, ValueEnum, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Kind {
    #[default]
    Esep,
    Epkb,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SignalPreset {
    Blocky,
    Chirp,
}

/// Parses a positive real given as a decimal (`0.125`), a fraction
/// (`1/8`) or a power of two (`2^-3`).
pub fn parse_real(s: &str) -> Result<f64, String> {
    let s = s.trim();
    let value = if let Some((num, den)) = s.split_once('/') {
        let num: f64 = num.trim().parse().map_err(|_| format!("bad numerator in {s:?}"))?;
        let den: f64 = den.trim().parse().map_err(|_| format!("bad denominator in {s:?}"))?;
        num / den
    } else if let Some((base, exp)) = s.split_once('^') {
        let base: f64 = base.trim().parse().map_err(|_| format!("bad base in {s:?}"))?;
        let exp: i32 = exp.trim().parse().map_err(|_| format!("bad exponent in {s:?}"))?;
        base.powi(exp)
    } else {
        s.parse().map_err(|_| format!("not a number: {s:?}"))?
    };
    if value.is_finite() {
        Ok(value)
    } else {
        Err(format!("not a finite number: {s:?}"))
    }
}

/// Flags shared by every subcommand. All are optional so that a config
/// file can supply them; flags win over the file.
#[derive(Args, Clone, Debug, Default)]
pub struct Flags {
    /// Spline order m.
    #[arg(long)]
    pub m: Option<usize>,
    /// Interval endpoints c and d.
    #[arg(long, num_args = 2, value_names = ["C", "D"], allow_negative_numbers = true, value_parser = parse_real)]
    pub interval: Option<Vec<f64>>,
    /// Knot spacing b of the basis (coarse) partition.
    #[arg(long, value_parser = parse_real)]
    pub b: Option<f64>,
    /// Shift step b' of the dictionary (fine) partition.
    #[arg(long, value_parser = parse_real)]
    pub bprime: Option<f64>,
    /// Working-grid steps per b' (per b for `basis`).
    #[arg(long)]
    pub grid_q: Option<usize>,
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long)]
    pub max_atoms: Option<usize>,
    #[arg(long, value_parser = parse_real)]
    pub target_relerr: Option<f64>,
    /// Extended partition used for the basis.
    #[arg(long, value_enum)]
    pub kind: Option<Kind>,
    /// Output directory.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// TOML file with any of the keys m, interval, b, b_prime, grid_q, seed,
    /// max_atoms, target_relerr, kind, out, signal, preset, n_blocks.
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Two-column CSV signal (t,value) for `approx`.
    #[arg(long)]
    pub signal: Option<PathBuf>,
    /// Generated signal for `approx` when no --signal is given.
    #[arg(long, value_enum)]
    pub preset: Option<SignalPreset>,
    /// Number of blocks of the generated blocky signal.
    #[arg(long)]
    pub n_blocks: Option<usize>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct FileConfig {
    m: Option<usize>,
    interval: Option<[f64; 2]>,
    b: Option<f64>,
    b_prime: Option<f64>,
    grid_q: Option<usize>,
    seed: Option<u64>,
    max_atoms: Option<usize>,
    target_relerr: Option<f64>,
    kind: Option<Kind>,
    out: Option<PathBuf>,
    signal: Option<PathBuf>,
    preset: Option<SignalPreset>,
    n_blocks: Option<usize>,
}

/// A single diagnostic for a rejected configuration.
#[derive(Debug)]
pub struct ConfigError(pub String);

impl fmt::Display for ConfigError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl From<bspline_dict::Error> for ConfigError {
    fn from(e: bspline_dict::Error) -> Self {
        ConfigError(e.to_string())
    }
}

/// Fully merged parameters; fields a command does not need may stay unset.
#[derive(Clone, Debug, PartialEq)]
pub struct RunConfig {
    pub m: Option<usize>,
    pub interval: Option<(f64, f64)>,
    pub b: Option<f64>,
    pub b_prime: Option<f64>,
    pub grid_q: usize,
    pub seed: u64,
    pub max_atoms: usize,
    pub target_relerr: f64,
    pub kind: Kind,
    pub out: PathBuf,
    pub signal: Option<PathBuf>,
    pub preset: Option<SignalPreset>,
    pub n_blocks: usize,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            m: None,
            interval: None,
            b: None,
            b_prime: None,
            grid_q: DEFAULT_GRID_Q,
            seed: 0,
            max_atoms: usize::MAX,
            target_relerr: bspline_dict::pursuit::DEFAULT_TARGET_RELERR,
            kind: Kind::Esep,
            out: PathBuf::from("out"),
            signal: None,
            preset: None,
            n_blocks: bspline_dict::signals::DEFAULT_BLOCKS,
        }
    }
}

impl RunConfig {
    /// Layers `flags` over the config file they name (if any) over `base`.
    pub fn resolve(flags: &Flags, base: RunConfig) -> Result<Self, ConfigError> {
        let file = match &flags.config {
            Some(path) => read_file(path)?,
            None => FileConfig::default(),
        };
        let interval = match &flags.interval {
            Some(v) => Some((v[0], v[1])),
            None => file.interval.map(|[c, d]| (c, d)),
        };
        let cfg = RunConfig {
            m: flags.m.or(file.m).or(base.m),
            interval: interval.or(base.interval),
            b: flags.b.or(file.b).or(base.b),
            b_prime: flags.bprime.or(file.b_prime).or(base.b_prime),
            grid_q: flags.grid_q.or(file.grid_q).unwrap_or(base.grid_q),
            seed: flags.seed.or(file.seed).unwrap_or(base.seed),
            max_atoms: flags.max_atoms.or(file.max_atoms).unwrap_or(base.max_atoms),
            target_relerr: flags.target_relerr.or(file.target_relerr).unwrap_or(base.target_relerr),
            kind: flags.kind.or(file.kind).unwrap_or(base.kind),
            out: flags.out.clone().or(file.out).unwrap_or(base.out),
            signal: flags.signal.clone().or(file.signal).or(base.signal),
            preset: flags.preset.or(file.preset).or(base.preset),
            n_blocks: flags.n_blocks.or(file.n_blocks).unwrap_or(base.n_blocks),
        };
        cfg.check_scalars()?;
        Ok(cfg)
    }

    fn check_scalars(&self) -> Result<(), ConfigError> {
        if self.m == Some(0) {
            return Err(ConfigError("--m must be at least 1".into()));
        }
        if self.grid_q == 0 {
            return Err(ConfigError("--grid-q must be at least 1".into()));
        }
        if !(self.target_relerr >= 0.0) {
            return Err(ConfigError("--target-relerr must be non-negative".into()));
        }
        if self.max_atoms == 0 {
            return Err(ConfigError("--max-atoms must be at least 1".into()));
        }
        Ok(())
    }

    pub fn order(&self) -> Result<usize, ConfigError> {
        self.m.ok_or_else(|| missing("--m"))
    }

    pub fn domain(&self) -> Result<(f64, f64), ConfigError> {
        self.interval.ok_or_else(|| missing("--interval"))
    }

    pub fn spacing(&self) -> Result<f64, ConfigError> {
        self.b.ok_or_else(|| missing("--b"))
    }

    pub fn fine_spacing(&self) -> Result<f64, ConfigError> {
        self.b_prime.ok_or_else(|| missing("--bprime"))
    }

    pub fn coarse_partition(&self) -> Result<Partition, ConfigError> {
        let (c, d) = self.domain()?;
        Ok(Partition::new(c, d, self.spacing()?, Closure::Closed)?)
    }

    pub fn coarse_space(&self) -> Result<SplineSpace, ConfigError> {
        Ok(SplineSpace::new(self.order()?, self.coarse_partition()?)?)
    }
}

fn missing(flag: &str) -> ConfigError {
    ConfigError(format!("missing required parameter {flag}"))
}

fn read_file(path: &Path) -> Result<FileConfig, ConfigError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| ConfigError(format!("cannot read config {}: {e}", path.display())))?;
    toml::from_str(&text).map_err(|e| ConfigError(format!("invalid config {}: {e}", path.display())))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn reals_accept_fractions_and_powers() {
        assert_eq!(parse_real("0.5"), Ok(0.5));
        assert_eq!(parse_real("1/256"), Ok(1.0 / 256.0));
        assert_eq!(parse_real("2^-8"), Ok(1.0 / 256.0));
        assert!(parse_real("x").is_err());
        assert!(parse_real("1/0").is_err());
    }

    #[test]
    fn flags_override_file() {
        let dir = std::env::temp_dir().join(format!("bsdict-config-{}", std::process::id()));
        std::fs::create_dir_all(&dir).unwrap();
        let path = dir.join("run.toml");
        std::fs::write(&path, "m = 2\ninterval = [0.0, 4.0]\nb = 1.0\nseed = 5\n").unwrap();
        let flags = Flags {
            m: Some(3),
            config: Some(path),
            ..Flags::default()
        };
        let cfg = RunConfig::resolve(&flags, RunConfig::default()).unwrap();
        assert_eq!(cfg.m, Some(3));
        assert_eq!(cfg.interval, Some((0.0, 4.0)));
        assert_eq!(cfg.seed, 5);
        std::fs::remove_dir_all(dir).unwrap();
    }

    #[test]
    fn unknown_keys_are_rejected() {
        assert!(toml::from_str::<FileConfig>("bogus = 1").is_err());
    }
}
