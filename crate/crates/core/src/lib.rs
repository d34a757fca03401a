//! Checking-stack automata with reversal-bounded counters: store semantics,
//! simulation, decision procedures and machine transformations.

pub mod cli;
pub mod corpus;
pub mod csa;
pub mod flow;
pub mod lp;
pub mod machine;
pub mod sim;
pub mod store;
pub mod transforms;
pub mod views;
