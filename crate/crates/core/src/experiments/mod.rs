//! Sequence machinery and the Monte Carlo experiments built on it.

pub mod measure;
pub mod output;
pub mod scans;
pub mod sequence;

pub use measure::{empirical_measure, tau_vector_for, BasePoint, EmpiricalMeasure, MeasurePoint};
pub use output::{content_hash, read_csv, write_csv, RunManifest, CSV_HEADER};
pub use scans::{
    equidistribution_siegel, improvability_scan, nondivergence_scan, twisted_w_invariance, z_matrix,
    Observable, ScanSetup,
};
pub use sequence::{layered_presentation, ClosedForm, LayeredPresentation, SequenceSpec};
