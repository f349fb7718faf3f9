//! Automatic scaling of virtual network function chains in a fat-tree data
//! center: state detection, LP/MILP placement models and a randomly permuted
//! ADMM solver that decomposes the relaxed model across agents.

pub mod chain_state;
pub mod lp;
pub mod milp;
pub mod rpadmm;
pub mod scaling;
pub mod scenario;
pub mod topology;
