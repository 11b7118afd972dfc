//! Partial densities of states, Larmor-clock times and mesoscopic transport
//! for one-dimensional scattering problems.

pub mod numerics;
pub mod potential;
pub mod cli;
pub mod clock;
pub mod dos;
pub mod scatter1d;
pub mod transport;
