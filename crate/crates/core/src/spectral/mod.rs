//! Fourier analysis on a periodic grid: Littlewood-Paley bands,
//! Triebel-Lizorkin and Bessel-potential norms, complex powers of the
//! Laplacian, and the scans and kernel checks built on them.

mod bands;
mod checks;
mod cutoffs;
mod grid;

pub use bands::{
    band_difference_ratio, bessel_norm, fractional_laplacian, littlewood_paley, tl_norm, BandDecomposition, TLParams,
    TlNorm, ZERO_FREQUENCY_TOLERANCE,
};
pub use checks::{
    density_approximation, density_report, embedding_ratio_scan, fpp_factor_exponent, fpp_ratio_scan, kernel_decay_check,
    kernel_decay_report, scan_report, DensityApproximation, ScanConfig, ScanMode, ScanRow, KERNEL_ENVELOPE_FACTOR,
    RATIO_SPREAD_BOUND,
};
pub use cutoffs::{build_cutoffs, CutoffPair};
pub use grid::{GridField, SpectralGrid, HEADER_BYTES};
