//! Sales-volume forecasting from product listings: typed tabular data,
//! feature encoding, sales-range binning, a second-order boosted tree
//! learner, comparison baselines and an evaluation harness.

pub mod baselines;
pub mod binning;
pub mod boost;
pub mod data;
pub mod eval;
pub mod matrix;
pub mod model_io;
pub mod pipeline;
