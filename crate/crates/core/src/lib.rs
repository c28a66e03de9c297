//! Numerical experiments on Schrödinger evolution over generic flat 2-tori:
//! quadratic Weyl sums, successive minima of the associated box norm, exact
//! representation counts and space-time norms of the propagator.

pub mod counting;
pub mod error;
pub mod lattice_minima;
pub mod numeric;
pub mod propagator;
pub mod quadform;
pub mod rng;
pub mod weyl_kernel;

pub use counting::{PallFactorization, PallQuery};
pub use error::{Error, Result};
pub use lattice_minima::MinimaResult;
pub use propagator::{FourierData, NormResult, RefocusResult};
pub use quadform::{ComboCount, LatticePoint, QuadForm};
pub use weyl_kernel::{CutoffProfile, KernelSample, SweepTable};
