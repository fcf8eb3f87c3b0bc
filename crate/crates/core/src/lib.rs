//! Spectral simulation, symmetry analysis and steady-profile classification for
//! generalized Rosenau-Kawahara-RLW type equations.

pub mod admissibility;
pub mod classifier;
pub mod error;
pub mod integrator;
pub mod io;
pub mod numerics;
pub mod oracle;
pub mod perturbed;
pub mod rkrlw;
pub mod spectral;
pub mod symmetry;
pub mod trajectory;
pub mod weak;

pub use admissibility::{check_conditions, compute_a, compute_b, nonlinear_residual, wave_speed, AdmissibilityReport, LambdaDot, NonlinearWeight};
pub use classifier::{classify, classify_roots, condition_check, construct_profile, derived_quantities, in_set_a, is_symmetric_trig, ClassificationReport, ConstraintCoefficients, Construction, InitialSamples, RootStructure, TrigProfile};
pub use error::{Error, Result};
pub use integrator::Integrator;
pub use perturbed::{PerturbedParams, PerturbedSolver};
pub use rkrlw::{GrkrlwParams, RkrlwSolver, StepOptions};
pub use spectral::{apply_k, dealias, differentiate, reflect, Field, Grid, Spectrum, SymbolParams};
pub use symmetry::{decomposition_residuals, detect_axis, track_axis, DecompositionResiduals, SymmetryReport};
pub use trajectory::{ModelParams, Trajectory};
pub use weak::{steady_certificate, weak_residual, Bump1d, SteadyCertificate, TestBump};
