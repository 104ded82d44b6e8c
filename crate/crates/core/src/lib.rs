//! High-order staggered Lagrangian hydrodynamics on curvilinear
//! quadrilateral meshes with `Q^m-Q^{m-1}` finite elements.

pub mod app;
pub mod basis;
pub mod config;
pub mod driver;
pub mod error;
pub mod hourglass;
pub mod hydro;
pub mod linalg;
pub mod mesh;
pub mod output;
pub mod problems;
pub mod state;
pub mod viscosity;

pub use error::{Result, SghError};
