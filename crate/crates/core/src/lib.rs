//! Neumann Laplace-Beltrami spectra of spheres, disks and circles with
//! cracks, and the weighted energy monotonicity of crack-tip fields.
//!
//! * [`slitmesh`]: meshes with crack seams realised by DOF duplication.
//! * [`assembly`]: P1 stiffness, mass and weighted energies, boundary fluxes.
//! * [`eigensolve`]: smallest eigenpairs of `A x = lambda M x`.
//! * [`spectra`]: eigenvalue experiments on cracked spheres and circles.
//! * [`monotonicity`]: normalized energy profiles and their checks.
//! * [`io`]: CSV and JSON manifest outputs.

pub mod error;
pub mod exec;
pub mod monotonicity;
pub mod assembly;
pub mod eigensolve;
pub mod io;
pub mod quadrature;
pub mod slitmesh;
pub mod spectra;

pub use error::{Error, Result};
pub use exec::Execution;
