//! Weighted backward shifts on directed trees.
//!
//! The crate models rooted and unrooted directed trees (finite or
//! rule-generated), computes the generalized continued fractions `c_p` and
//! resistances `r_p` of weighted rooted trees, constructs minimal-energy
//! backward-invariant unit flows, classifies chaos / mixing /
//! hypercyclicity of weighted backward shift operators on `ℓ^p` and `c₀`
//! sequence spaces, and computes boundary capacities with their
//! equilibrium flows.

pub mod capacity;
pub mod constants;
pub mod document;
pub mod dynamics;
pub mod exponent;
pub mod flows;
pub mod rules;
pub mod tree;
pub mod weights;

pub use exponent::Exponent;
pub use tree::{Tree, VertexId};
pub use weights::WeightMap;
