//! Local translative-packing toolkit for three-dimensional convex bodies.
//!
//! The crate builds Dirichlet-Voronoi local cells of finite point
//! configurations, encodes the combinatorics of a cell as a triangulated
//! color graph, minimizes cell volume over all configurations sharing a
//! graph, and computes truncater-based bounds on the number of translates
//! that can influence a cell. Together these pieces reproduce the computer
//! half of a local-density study: candidate optima are certified as local
//! minima of an explicit volume function under linear contact constraints,
//! and the graph/bound machinery shows the search space is finite.
//!
//! Module map:
//!
//! - [`geom`]: halfspace intersection, volumes, gauges, parallel-body
//!   (Steiner) volumes. Everything else sits on these primitives.
//! - [`catalog`]: canonical bodies (octahedron `O`, cuboctahedron `C`,
//!   tetrahedron `T`, cube `Q`, unit ball `B`), difference bodies, cores,
//!   and the two record lattices with their Voronoi cells.
//! - [`cell`]: Dirichlet-Voronoi cells of point configurations, packing
//!   validation, the cone volume formula, packing classification, and
//!   perturbation to general position.
//! - [`graph`]: triangulated color graphs, adjacency matrices, canonical
//!   forms, and translation of a colored graph into contact constraints.
//! - [`generate`]: enumeration of isomorphically distinct triangulations
//!   by vertex splitting, with growth-bound validation.
//! - [`optimize`]: constrained minimization of cell volume with frozen
//!   cell combinatorics and multistart.
//! - [`bounds`]: truncater colonies, Steiner neighbor bounds, spherical
//!   cap bounds, Gauss-Bonnet areas, and fundamental-domain minimization.
//! - [`expr`]: the small arithmetic expression grammar used for radius
//!   parameters on the command line (`sqrt(2033)/57`).

pub mod bounds;
pub mod catalog;
pub mod cell;
pub mod expr;
pub mod generate;
pub mod geom;
pub mod graph;
pub mod optimize;

pub use geom::{HalfSpace, Polytope, Vec3};
