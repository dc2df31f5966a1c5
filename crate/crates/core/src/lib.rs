//! Smeared two-point functions of a massless scalar field, the density
//! matrix of a register of pointlike-coupled detectors, and the
//! reconstruction of smeared correlators from detector statistics.

pub mod detector;
pub mod io;
pub mod kernels;
pub mod multipole;
pub mod numerics;
pub mod smearing;
pub mod spacetime;
pub mod tomography;
