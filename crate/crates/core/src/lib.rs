//! Quaternionic integral operators (Dirac, Teodorescu, Cauchy, Bergman projections) on
//! voxel grids, and fixed-point solvers for the stationary incompressible MHD system.

pub mod app;
pub mod energy;
pub mod error;
pub mod config;
pub mod grid;
pub mod io;
pub mod linalg;
pub mod mhd;
pub mod operators;
pub mod quaternion;
pub mod sampling;
pub mod solvers;
pub mod verify;

pub use error::Error;
pub use grid::{BoundaryData, Grid, QField, VoxelDomain};
pub use operators::OperatorSet;
pub use quaternion::Quaternion;
