//! Deterministic recovery of bandlimited signals and momentum-limited
//! quantum states from data with a gap shorter than the uncertainty limit.
//!
//! Everything is generic over the floating point scalar ([`Real`]); the
//! aliases at the crate root pin the common `f64` and `f32` instantiations.

pub mod dense;
pub mod error;
pub mod grid;
pub mod io;
pub mod projections;
pub mod quantum;
pub mod recovery;
pub mod sampling;
pub mod scalar;
pub mod signal;
pub mod tomography;

pub use error::{Error, Result};
pub use grid::{FrequencyGrid, Interval, TimeGrid};
pub use scalar::Real;
pub use signal::{
    forward_spectrum, inner_product, inverse_signal, l2_norm, make_demo_signal, Fourier, SampledSignal,
    Spectrum,
};

pub use projections::{
    band_project, band_spill_ratio, complement_gate, concentration_ratio, eps_grid, operator_norm_sq,
    segment_compatibility, smear_response, time_gate, BandProjector, GateProjector, PowerIteration, ProjectorPair,
};
pub use quantum::{
    gate_spill_ratio, gate_state, landau_pollak_ratio, momentum_smooth, random_momentum_state, recover_state,
    smoothed_gap_profile, PhaseSpaceWindows, StateRecovery, WaveFunction,
};
pub use recovery::{
    erase, invertibility_report, noise_stability_sweep, recover_band_neumann, recover_direct, recover_neumann,
    ErasureModel, Invertibility, RecoveryReport, SolverOptions, StabilityReport,
};
pub use sampling::{
    band_approx_first_term, band_interpolate, comb_sample, comb_sample_offset, integral_equation_residual,
    periodized_spectrum, sinc_reconstruct, spectral_copy_recover, CombSamples, SpectralCopyConfig,
};
pub use tomography::{
    build_density, evolve_diagonal_series, rank1_extract, state_pipeline, tomography_solve, DensityMatrix,
    EvolutionSamples, MomentumBasis, MomentumState, TomographyResult,
};

pub use num_complex::Complex;

pub type C64 = Complex<f64>;

pub type Grid = TimeGrid<f64>;
pub type Signal = SampledSignal<f64>;
pub type Spec = Spectrum<f64>;
pub type Window = Interval<f64>;
pub type Wave = WaveFunction<f64>;

pub type Grid32 = TimeGrid<f32>;
pub type Signal32 = SampledSignal<f32>;
pub type Spec32 = Spectrum<f32>;
