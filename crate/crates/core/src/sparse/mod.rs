//! Sparse regression: LASSO, cross-validation and Stage-3 identification.

pub mod cv;
pub mod identify;
pub mod lasso;

pub use cv::{lasso_cv, LassoConfig, PenaltyScale};
pub use identify::{identify_system, wf_lasso_identify, IdentifyConfig, Stage3Fit};
pub use lasso::{lasso, LassoFit};
