//! Almost-sure termination proofs for affine probabilistic programs via linear
//! lexicographic ranking supermartingale maps.

pub mod frontend;
pub mod invariants;
pub mod bounds;
pub mod compositional;
pub mod lexrsm;
pub mod linear;
pub mod lp;
pub mod pcfg;
pub mod sim;
