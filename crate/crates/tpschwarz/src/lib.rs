//! Workstation front end for the window-parallel control solver: worker
//! pools, JSON problem configs, CSV emission, and the scripted experiment
//! runners that regenerate the study data.

pub mod config;
pub mod csvout;
pub mod experiments;
pub mod pool;
pub mod scenario;

pub use tpschwarz_core;
