//! Numerical wave front sets from Fourier samples on lattices.
//!
//! A distribution is localized by a compactly supported window around a seed point,
//! its windowed spectrum is sampled on the points of a lattice inside a cone, and the
//! decay of the samples is measured against a weight scale. The crate covers the pieces
//! that pipeline needs:
//!
//! - [`weights`]: weight functions ω and sequences (M_p) with their condition checks
//! - [`lattice`]: lattices, duals, enumeration, cones and the separation test
//! - [`localize`]: windows, cut-off families, test distributions and windowed spectra
//! - [`fourier`]: Fourier series of periodic functions, partitions of unity, Poisson sums
//! - [`microlocal`]: seminorms, decay fits, family verdicts and wave front estimates
//! - [`cli`]: TOML configs and the commands behind the `wfsample` binary
//!
//! The `examples/` directory has one program per capability:
//! `weights_check`, `lattice_info`, `fourier_series`, `poisson`, `partition_of_unity`,
//! `analyze_pair`, `wavefront`, `equivalence` and `quasianalytic`.
//!
//! ```
//! use wfsample::lattice::Lattice;
//! use wfsample::localize::{TestDistribution, Window, WindowSpec};
//! use wfsample::microlocal::{estimate_wavefront, Analyzer, AnalyzerConfig, RegularityVerdict};
//! use wfsample::weights::WeightFunction;
//!
//! let window = Window::new(WindowSpec::default(), 2).unwrap();
//! let cfg = AnalyzerConfig::new(Analyzer::Roumieu(WeightFunction::gevrey(2.0).unwrap()));
//! let delta = TestDistribution::Delta { center: vec![0.0, 0.0] };
//! let est = estimate_wavefront(&delta, &[vec![0.0, 0.0]], 8, &cfg, &Lattice::integer(2), &window).unwrap();
//! assert_eq!(est.count(RegularityVerdict::Singular), 8);
//! ```

// `!(x > 0.0)` guards also reject NaN
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod error;
pub mod numerics;
pub mod weights;
pub mod lattice;
pub mod localize;
pub mod fourier;
pub mod microlocal;
pub mod cli;

pub use error::{Error, Result};
