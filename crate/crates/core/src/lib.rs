//! Simulation, estimation and statistical inference for systems of
//! interacting reinforced Bernoulli processes, plus the category
//! forward-citation index pipeline that turns patent citation data into
//! success sequences.

pub mod model;
pub mod sim;
pub mod success;
pub mod estimate;
pub mod inference;
pub mod patent;
pub mod cli;
