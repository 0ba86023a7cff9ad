//! Matrices of linear forms, degeneracy loci and critical configurations
//! for three projections from P^4 to P^2.

pub mod critical;
pub mod exactpoly;
pub mod harness;
pub mod linalg;
pub mod linclass;
pub mod loci;
pub mod multiview;
pub mod recon;
