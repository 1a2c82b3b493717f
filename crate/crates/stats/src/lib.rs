//! Statistical models over the commit panel: multinomial logit for bug
//! deltas, GLMs for churn, collinearity screening, trend tests and the
//! reuse/defect co-occurrence table.

pub mod cooccurrence;
pub mod design;
pub mod error;
pub mod glm;
pub mod multinomial;
pub mod result;
pub mod synthetic;
pub mod trend;
pub mod vif;

pub use cooccurrence::{reuse_defect_cooccurrence, Cooccurrence};
pub use design::{rq2_design, rq3_design, Aggregation, DesignMatrix, PanelDesignOptions, PredictorForm, Response};
pub use error::StatsError;
pub use glm::{fit_glm, GlmFamily, GlmOptions};
pub use multinomial::{fit_multinomial, fit_multinomial_with, MultinomialObjective, MultinomialOptions};
pub use result::{CoefficientBlock, Family, FitResult, Term};
pub use trend::{trend_summary, Direction, TrendSummary};
pub use vif::{compute_vif, screen_collinearity, ScreeningLog, Vif};
