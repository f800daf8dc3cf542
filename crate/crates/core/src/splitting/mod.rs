//! The four-harmonic splitting model, its critical points and their
//! continuation in `eps`.

pub mod continuation;
pub mod eigen;
pub mod model;
pub mod potential;
pub mod solver;
pub mod transversality;

pub use model::{build_model, SplittingModel};
pub use solver::{solve_full_critical_points, solve_model_critical_points, CriticalPoint, FullSolution, SolverOptions};
pub use transversality::{degeneracy_locus, sufficient_phase_condition, transversality, TransversalityData};
pub use continuation::{continuation_sweep, ContinuationOptions, ContinuationReport, SweepPoint, TrackFlag};
