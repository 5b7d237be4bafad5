//! Dynamics of automorphisms and holomorphic self-maps of the polydisc.

pub mod dynamics;
pub mod funceq;
pub mod geometry;
pub mod moebius;
pub mod normalform;
pub mod polyauto;
pub mod sampling;
pub mod serde_complex;
