//! The Melnikov potential and its Fourier coefficients.

pub mod dominance;
pub mod enumerate;
pub mod exponents;
pub mod harmonic;
pub mod quadrature;
pub mod series;

pub use exponents::{eps_hat, eps_prime, interval_index, MelnikovConstants, StarTable, TransitionLadder};
pub use harmonic::{harmonic, ln_l_exact, HarmonicTerm};
pub use quadrature::{melnikov_quadrature, oracle_samples, OracleSample};
pub use series::{melnikov_series, MelnikovSeries, SeriesValue};
pub use dominance::{dominance_profile, Dominance, DominanceProfile, RankedHarmonic};
