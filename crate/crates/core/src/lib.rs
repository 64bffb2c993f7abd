//! Well-balanced, oscillation-free discontinuous Galerkin schemes for the
//! shallow water equations with non-flat bottom topography, in one and two
//! space dimensions.
//!
//! The spatial discretisation uses an orthonormal Legendre basis, hydrostatic
//! reconstruction at cell interfaces and a jump-driven damping term that
//! suppresses spurious oscillations near discontinuities without breaking
//! the still-water equilibrium. Time integration is classical RK4 with an
//! optional positivity-preserving limiter for wet/dry fronts.

pub mod basis;
pub mod error;
pub mod par;
pub mod physics;
pub mod solver1d;
pub mod solver2d;
pub mod timestep;

pub use error::{Error, Result};
pub use par::Execution;
pub use physics::{CharacteristicScaling, Conserved1D, Conserved2D, DryCharacteristics, ShallowWater, GRAVITY};
pub use solver1d::{
    project_initial_data, BoundaryCondition1D, DGField1D, InitialDepth, Mesh1D, SchemeOptions, Solver1D,
};
pub use solver2d::{project_initial_data_2d, BoundaryCondition2D, DGField2D, InitialDepth2D, Mesh2D, Solver2D};
pub use timestep::{default_cfl, ButcherTableau, RungeKutta, SemiDiscrete, Simulation};
