pub mod hilbert;
pub mod optics;
pub mod turbulence;
pub mod analysis;
pub mod harness;
pub mod cli;
