//! Cardinal B-spline bases and wide-support B-spline dictionaries on a
//! compact interval.
//!
//! The crate builds the B-spline bases of the cardinal spline space
//! `S_m(Δ)` ([`spline`]), the redundant dictionaries `D_m(Δ, b')` obtained by
//! translating a wide prototype B-spline over a finer shift grid
//! ([`dictionary`]), checks numerically that such a dictionary spans the
//! finer space `S_m(Δ')` and computes its frame bounds, and selects sparse
//! approximations from it with optimized orthogonal matching pursuit
//! ([`pursuit`]). [`signals`] provides the test signals and error metrics.
//!
//! ```
//! use bspline_dict::{build_dictionary, certify_span_equality, Closure, Partition};
//!
//! let coarse = Partition::new(0.0, 1.0, 0.25, Closure::Closed)?;
//! let dict = build_dictionary(4, &coarse, 0.125)?;
//! assert_eq!(dict.len(), 15);
//!
//! let grid = dict.working_grid(16)?;
//! let report = certify_span_equality(&dict, &dict.fine_space(), &grid);
//! assert!(report.pass);
//! assert_eq!(report.rank, 11);
//! # Ok::<(), bspline_dict::Error>(())
//! ```

pub mod dictionary;
pub mod error;
pub mod grid;
pub mod io;
mod linalg;
pub mod pursuit;
pub mod signals;
pub mod spline;

pub use dictionary::{
    build_dictionary, certify_against, certify_span_equality, check_frame_inequality,
    compute_scaling_system, eliminate_all, eliminate_fine_atom, frame_bounds, union_decomposition,
    CertificationReport, Dictionary, FrameBounds, FrameCheck, ScalingClass, ScalingEquation,
    ScalingSystem, ShiftFamily,
};
pub use error::{Error, Result};
pub use grid::{SampledAtom, WorkingGrid, DEFAULT_GRID_Q};
pub use pursuit::{
    approximate, approximate_atoms, backward_prune, oomp_select, oomp_select_atoms, Approximation,
    PursuitState, StopRule,
};
pub use signals::{gen_blocky, gen_chirp, metrics, ChirpParams, Envelope, Metrics, SampledSignal};
pub use spline::{
    build_epkb_basis, build_esep_basis, eval_bspline_knots, eval_cardinal_bspline, make_partition,
    partition_uplus, Atom, AtomShape, AtomVariant, Closure, ExtendedKind, ExtendedPartition,
    Partition, SplineSpace,
};

#[cfg(doctest)]
mod book {
    #[doc = include_str!("../../../book/src/introduction.md")]
    mod introduction {}
    #[doc = include_str!("../../../book/src/splines.md")]
    mod splines {}
    #[doc = include_str!("../../../book/src/dictionaries.md")]
    mod dictionaries {}
    #[doc = include_str!("../../../book/src/certification.md")]
    mod certification {}
    #[doc = include_str!("../../../book/src/frames.md")]
    mod frames {}
    #[doc = include_str!("../../../book/src/pursuit.md")]
    mod pursuit {}
    #[doc = include_str!("../../../book/src/cli.md")]
    mod cli {}
}
