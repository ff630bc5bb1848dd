//! Polytopal hybrid finite-element kernel.
//!
//! The crate implements, on 2D polytopal meshes:
//! - discrete `H^1` and boundary `H^{1/2}` seminorms for hybrid (cell + face)
//!   polynomial spaces, together with the boundary truncation operator,
//! - four discontinuous skeletal discretisations of the Poisson problem
//!   (HDG, HDG+, HHO and mixed-order HHO) with static condensation,
//! - a two-level BDDC preconditioner with coarse-face mean constraints,
//!   applied through flexible GMRES,
//! - the numerical studies tying these together: a truncation-eigenvalue
//!   study, weak-scalability runs and a convergence sanity study.
//!
//! The typical pipeline is mesh generation ([`mesh`]), space setup
//! ([`space`]), assembly of the condensed skeleton system ([`methods`]),
//! preconditioner setup ([`bddc`]) and the Krylov solve ([`krylov`]).
//! [`experiments`] drives full parameter grids and produces CSV rows.

pub mod basis;
pub mod bddc;
pub mod error;
pub mod experiments;
pub mod geometry;
pub mod krylov;
pub mod linalg;
pub mod mesh;
pub mod methods;
pub mod quadrature;
pub mod seminorms;
pub mod space;
pub mod sparse;

pub use error::{Error, Result};
pub use mesh::{
    agglomerate, build_cartesian, simplexify, voronoi_polygonal, CoarsePartition, PolytopalMesh,
};
pub use methods::{assemble_condensed, recover_bulk, CondensedSystem, Method, MethodConfig};
pub use space::{BoundaryFunction, HybridSpace, HybridVector};
