//! Local elliptic classes of Schubert varieties on `G/B` for simple Cartan
//! types, their Bott–Samelson and R-matrix recursions, and the duality
//! between a group and its Langlands dual.

pub mod error;
pub mod rootsys;
pub mod weyl;
pub mod elliptic;
pub mod classes;
pub mod duality;
pub mod chart;
pub mod corpus;
pub mod verify;

pub use error::{Error, Result};
pub use rootsys::{CartanLabel, Family, Lattice, LatticeVector, RootSystem};
pub use weyl::{ElementId, WeylGroup};
