pub mod charfn;
pub mod classifier;
pub mod cli;
pub mod config;
pub mod criteria;
pub mod model;
pub mod numeric;
pub mod oracle;
pub mod solver;
