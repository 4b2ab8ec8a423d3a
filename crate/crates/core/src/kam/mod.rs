//! Reducibility of analytic `SL(2, C)` cocycles close to constants, by a
//! KAM iteration that keeps every perturbation inside a cone of modes.

mod conjugation;
mod driver;
mod growth;
mod constant;
mod homological;
mod resonance;
mod step;

pub use conjugation::{conjugation_residual, doubled_grid, Conjugation, Factor};
pub use constant::{ConstantPart, Orientation};
pub use homological::{apply_homological_operator, homological_solve, without_exclusions, Component, Exclusion, DENOMINATOR_FLOOR};
pub use resonance::{classify_resonance, Branch, ResonanceReport, ResonantSite};
pub use step::{nonresonant_step, resonant_step, upper_form, KamProblem, StepDiagnostics, StepOptions, StepOutcome, StepTargets};
pub use driver::{
    energy_exponent, reduce, reduce_elliptic, reduce_hyperbolic, schrodinger_embedding, trace_residual, KamOptions,
    KamSchedule, KamTrace, NormalForm, SchrodingerEmbedding, StepKind, StepRecord,
};
pub use growth::{dyadic_checkpoints, growth_bound_check, GrowthReport, GrowthSample};
