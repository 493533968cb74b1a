//! Polynomial, transfer-function and state-space primitives.

mod norm;
mod poly;
mod ss;
mod tf;

pub use norm::{band_hinf_norm, band_hinf_norm_with, log_grid, BandNormResult, FreqBand, GRID_HI, GRID_LO, POINTS_PER_DECADE};
pub(crate) use norm::{golden_max, sweep_grid};
pub use poly::Polynomial;
pub use ss::StateSpaceLTI;
pub use tf::{classify_poles, RationalTF, RawTf, Stability, MINREAL_TOL, STABILITY_MARGIN};
