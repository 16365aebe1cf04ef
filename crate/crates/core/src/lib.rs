//! Accessible lasso models.
//!
//! For a design `X0` the lasso can only ever select signed models whose
//! columns, taken with their signs among `(X0, -X0)`, span a face of the
//! convex hull of those `2p` points. The crate provides
//!
//! - a coordinate-descent lasso solver with KKT verification ([`solver`]),
//! - face tests, enumeration, sampling and projection ([`geometry`]),
//! - cyclic-polytope face counts and the resulting bounds ([`combinatorics`]),
//! - selection-error simulations along the lasso path ([`sim`]).

pub mod combinatorics;
pub mod error;
pub mod geometry;
pub mod io;
pub mod lp;
pub mod sim;
pub mod solver;
pub mod types;

pub use error::{Error, Result};
pub use types::{
    decode_signed, encode_signed, validate_signed_model, AsymptoticParams, DesignMatrix, ExpandedDesign,
    LassoSolution, RegionWitness, Sign, SignedModel, SignedModelJson,
};
