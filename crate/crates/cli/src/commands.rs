use std::fs::{self, File};
use std::io::{BufReader, BufWriter, Write};
use std::path::Path;

use bspline_dict::io::{fmt_f64, write_csv};
use bspline_dict::{
    approximate, approximate_atoms, build_dictionary, build_epkb_basis, build_esep_basis, certify_against,
    check_frame_inequality, frame_bounds, gen_blocky, gen_chirp, Approximation, Atom, ChirpParams,
    Dictionary, Error, SampledSignal, SplineSpace, StopRule, WorkingGrid,
};

use crate::config::{ConfigError, Kind, RunConfig, SignalPreset};
use crate::svg::{self, Panel, Series};

/// How a command finished; mapped to the process exit code.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Status {
    Ok,
    CertificationFailed,
    Stagnated,
}

impl Status {
    pub fn exit_code(self) -> u8 {
        match self {
            Status::Ok => 0,
            Status::CertificationFailed => 1,
            Status::Stagnated => 3,
        }
    }
}

type CmdResult = Result<Status, ConfigError>;

fn io_err(path: &Path, e: std::io::Error) -> ConfigError {
    ConfigError(format!("{}: {e}", path.display()))
}

fn create(out: &Path, name: &str) -> Result<(BufWriter<File>, std::path::PathBuf), ConfigError> {
    fs::create_dir_all(out).map_err(|e| io_err(out, e))?;
    let path = out.join(name);
    let file = File::create(&path).map_err(|e| io_err(&path, e))?;
    Ok((BufWriter::new(file), path))
}

fn write_text(out: &Path, name: &str, text: &str) -> Result<(), ConfigError> {
    let (mut w, path) = create(out, name)?;
    w.write_all(text.as_bytes())
        .and_then(|_| w.flush())
        .map_err(|e| io_err(&path, e))
}

fn basis_atoms(space: &SplineSpace, kind: Kind) -> Vec<Atom> {
    match kind {
        Kind::Esep => build_esep_basis(space),
        Kind::Epkb => build_epkb_basis(space),
    }
}

/// Writes `x, atom_0, atom_1, ...` sampled on `grid`.
fn write_atoms_csv(out: &Path, name: &str, atoms: &[Atom], grid: &WorkingGrid) -> Result<(), ConfigError> {
    let (w, path) = create(out, name)?;
    let columns: Vec<Vec<f64>> = grid
        .sample_all(atoms)
        .iter()
        .map(|s| s.to_dense(grid.len()))
        .collect();
    let mut header = vec!["x".to_string()];
    header.extend((0..atoms.len()).map(|k| format!("atom_{k}")));
    let header: Vec<&str> = header.iter().map(String::as_str).collect();
    let rows = (0..grid.len()).map(|i| {
        let mut row = Vec::with_capacity(atoms.len() + 1);
        row.push(grid.point(i));
        row.extend(columns.iter().map(|c| c[i]));
        row
    });
    write_csv(w, &header, rows).map_err(|e| io_err(&path, e))
}

/// One series per atom over its support; atoms cut by the interval ends
/// are drawn thicker.
fn atoms_panel(title: String, atoms: &[Atom], grid: &WorkingGrid) -> Panel {
    let series = atoms
        .iter()
        .map(|atom| {
            let s = grid.sample(atom);
            let points = s
                .values
                .iter()
                .enumerate()
                .map(|(i, &v)| (grid.point(s.start + i), v))
                .collect();
            let series = Series::new(points);
            if is_truncated(atom) {
                series.thick()
            } else {
                series
            }
        })
        .collect();
    Panel { title, series }
}

fn is_truncated(atom: &Atom) -> bool {
    let (lo, hi) = atom.support();
    let (c, d) = atom.domain();
    let shift = atom.shift();
    match atom.shape() {
        bspline_dict::AtomShape::Cardinal { scale, .. } => {
            (lo - shift).abs() > 1e-12 || (hi - (shift + atom.order() as f64 * scale)).abs() > 1e-12
        }
        bspline_dict::AtomShape::Knots(_) => lo <= c || hi >= d,
    }
}

pub fn basis(cfg: &RunConfig) -> CmdResult {
    let space = cfg.coarse_space()?;
    let (c, d) = space.interval();
    let grid = WorkingGrid::for_spacing(c, d, space.spacing(), cfg.grid_q)?;
    let atoms = basis_atoms(&space, cfg.kind);
    write_atoms_csv(&cfg.out, "basis.csv", &atoms, &grid)?;
    let title = format!("{:?} basis, m = {}, b = {}", cfg.kind, space.order(), space.spacing()).to_uppercase();
    write_text(&cfg.out, "basis.svg", &svg::render(&[atoms_panel(title, &atoms, &grid)], 1))?;
    println!("wrote {} basis functions to {}", atoms.len(), cfg.out.display());
    Ok(Status::Ok)
}

fn build(cfg: &RunConfig) -> Result<(Dictionary, WorkingGrid), ConfigError> {
    let dict = build_dictionary(cfg.order()?, &cfg.coarse_partition()?, cfg.fine_spacing()?)?;
    let grid = dict.working_grid(cfg.grid_q)?;
    Ok((dict, grid))
}

pub fn dict(cfg: &RunConfig) -> CmdResult {
    let (dict, grid) = build(cfg)?;
    write_atoms_csv(&cfg.out, "dict.csv", dict.atoms(), &grid)?;
    let title = format!(
        "dictionary, m = {}, b = {}, b' = {}",
        dict.order(),
        dict.spacing(),
        dict.fine_spacing()
    );
    write_text(&cfg.out, "dict.svg", &svg::render(&[atoms_panel(title, dict.atoms(), &grid)], 1))?;
    println!("wrote {} dictionary atoms to {}", dict.len(), cfg.out.display());
    Ok(Status::Ok)
}

pub fn certify(cfg: &RunConfig) -> CmdResult {
    let (dict, grid) = build(cfg)?;
    let fine = dict.fine_space();
    let mut report = certify_against(&dict, &basis_atoms(&fine, cfg.kind), fine.dimension(), &grid);
    if let Ok(bounds) = frame_bounds(&dict, &grid) {
        report = report.with_frame(bounds);
    }
    let text = report.to_string();
    write_text(&cfg.out, "certify.txt", &text)?;
    print!("{text}");
    Ok(if report.pass { Status::Ok } else { Status::CertificationFailed })
}

/// Random span elements drawn by `frame`.
const FRAME_SAMPLES: usize = 100;
/// Relative slack of the frame inequality check.
const FRAME_SLACK: f64 = 1e-9;

pub fn frame(cfg: &RunConfig) -> CmdResult {
    let (dict, grid) = build(cfg)?;
    let mut text = format!(
        "m: {}\nb: {}\nb_prime: {}\nK: {}\n",
        dict.order(),
        fmt_f64(dict.spacing()),
        fmt_f64(dict.fine_spacing()),
        dict.len()
    );
    let pass = match frame_bounds(&dict, &grid) {
        Ok(bounds) => {
            let check = check_frame_inequality(&dict, &grid, bounds, FRAME_SAMPLES, cfg.seed, FRAME_SLACK);
            text += &format!(
                "A: {}\nB: {}\nseed: {}\nsamples: {}\nviolations: {}\nmin_ratio: {}\nmax_ratio: {}\n",
                fmt_f64(bounds.lower),
                fmt_f64(bounds.upper),
                cfg.seed,
                check.samples,
                check.violations,
                fmt_f64(check.min_ratio),
                fmt_f64(check.max_ratio)
            );
            check.violations == 0
        }
        Err(e) => {
            text += &format!("error: {e}\n");
            false
        }
    };
    text += &format!("pass: {pass}\n");
    write_text(&cfg.out, "frame.txt", &text)?;
    print!("{text}");
    Ok(if pass { Status::Ok } else { Status::CertificationFailed })
}

fn load_signal(cfg: &RunConfig, grid: &WorkingGrid, b_prime: f64) -> Result<SampledSignal, ConfigError> {
    if let Some(path) = &cfg.signal {
        let file = File::open(path).map_err(|e| io_err(path, e))?;
        let f = SampledSignal::read_csv(BufReader::new(file), path.display().to_string())?;
        if f.interval() != grid.interval() {
            return Err(ConfigError(format!(
                "signal covers [{}, {}] but the interval is [{}, {}]",
                f.interval().0,
                f.interval().1,
                grid.interval().0,
                grid.interval().1
            )));
        }
        return Ok(f);
    }
    Ok(match cfg.preset.unwrap_or(SignalPreset::Blocky) {
        SignalPreset::Blocky => gen_blocky(cfg.seed, cfg.n_blocks, grid.interval(), b_prime, grid)?,
        SignalPreset::Chirp => gen_chirp(&ChirpParams::default(), grid),
    })
}

fn run_pursuit(result: bspline_dict::Result<Approximation>) -> Result<(Approximation, bool), ConfigError> {
    match result {
        Ok(a) => Ok((a, false)),
        Err(Error::Stagnation { state, .. }) => Ok(((*state).into(), true)),
        Err(e) => Err(e.into()),
    }
}

pub fn approx(cfg: &RunConfig) -> CmdResult {
    let (dict, grid) = build(cfg)?;
    let f = load_signal(cfg, &grid, dict.fine_spacing())?;
    let stop = StopRule::new(cfg.max_atoms, cfg.target_relerr);
    let basis = basis_atoms(&dict.fine_space(), cfg.kind);
    let (from_dict, dict_stalled) = run_pursuit(approximate(&dict, &f, &stop))?;
    let (from_basis, basis_stalled) = run_pursuit(approximate_atoms(&basis, &f, &stop))?;

    let mut table = String::from("representation,n_functions_available,M_used,relerr\n");
    for (name, n, a) in [("dictionary", dict.len(), &from_dict), ("basis", basis.len(), &from_basis)] {
        table += &format!("{name},{n},{},{}\n", a.m, fmt_f64(a.relerr));
    }
    write_text(&cfg.out, "results.csv", &table)?;

    let (w, path) = create(&cfg.out, "reconstruction.csv")?;
    let rows = (0..f.len()).map(|i| {
        vec![
            f.grid().point(i),
            f.samples[i],
            from_dict.reconstruction.samples[i],
            from_basis.reconstruction.samples[i],
        ]
    });
    write_csv(w, &["t", "signal", "dictionary", "basis"], rows).map_err(|e| io_err(&path, e))?;

    let points = |s: &SampledSignal| -> Vec<(f64, f64)> {
        (0..s.len()).map(|i| (s.grid().point(i), s.samples[i])).collect()
    };
    let panels = [
        Panel {
            title: format!("dictionary: M = {} of {}", from_dict.m, dict.len()),
            series: vec![
                Series::new(points(&f)).labeled("signal"),
                Series::new(points(&from_dict.reconstruction)).labeled("approximation"),
            ],
        },
        Panel {
            title: format!("basis: M = {} of {}", from_basis.m, basis.len()),
            series: vec![
                Series::new(points(&f)).labeled("signal"),
                Series::new(points(&from_basis.reconstruction)).labeled("approximation"),
            ],
        },
    ];
    write_text(&cfg.out, "approx.svg", &svg::render(&panels, 2))?;

    print!("{table}");
    if dict_stalled || basis_stalled {
        eprintln!("pursuit stagnated before reaching the target; partial results written");
        return Ok(Status::Stagnated);
    }
    Ok(Status::Ok)
}

/// Six panels: bases on the left, dictionaries of double support on the
/// right; order 1, then order 4 with ESEP and with EPKB boundary functions.
pub fn figure1(cfg: &RunConfig) -> CmdResult {
    let (c, d) = cfg.interval.unwrap_or((0.0, 4.0));
    let b_prime = cfg.b_prime.unwrap_or(0.5);
    let b = cfg.b.unwrap_or(2.0 * b_prime);
    let mut panels = Vec::new();
    for (tag, m, kind) in [("order1", 1, Kind::Esep), ("esep", 4, Kind::Esep), ("epkb", 4, Kind::Epkb)] {
        let fine = SplineSpace::uniform(m, c, d, b_prime)?;
        let grid = WorkingGrid::for_spacing(c, d, b_prime, cfg.grid_q)?;
        let atoms = basis_atoms(&fine, kind);
        write_atoms_csv(&cfg.out, &format!("figure1_{tag}_basis.csv"), &atoms, &grid)?;
        panels.push(atoms_panel(format!("{kind:?} basis, m = {m}").to_uppercase(), &atoms, &grid));

        let run = RunConfig {
            m: Some(m),
            interval: Some((c, d)),
            b: Some(b),
            b_prime: Some(b_prime),
            ..cfg.clone()
        };
        let (dict, grid) = build(&run)?;
        write_atoms_csv(&cfg.out, &format!("figure1_{tag}_dict.csv"), dict.atoms(), &grid)?;
        panels.push(atoms_panel(
            format!("dictionary, m = {m}, support {}", m as f64 * b),
            dict.atoms(),
            &grid,
        ));
    }
    write_text(&cfg.out, "figure1.svg", &svg::render(&panels, 2))?;
    println!("wrote figure1.svg and six tables to {}", cfg.out.display());
    Ok(Status::Ok)
}
