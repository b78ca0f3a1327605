//! Independent full-equation solver used to check profiles, collisions,
//! conservation and the weak-residual order of the two-wave ansatz.

pub mod spectral;
pub mod tracking;
pub mod weak;

pub use spectral::{energy_balance_residual, l2, mass_drift, ConservationSample, FieldState, RunOutput, SimulationGrid, Simulator};
pub use tracking::{local_maxima, run_two_soliton, tallest_peak_speed, track_peaks, two_soliton_initial_data, Peak, TrackRecord};
pub use weak::{
    ansatz_at, max_residuals, weak_residual, weak_residual_order, AnsatzWave, TestFunction, WeakForm, WeakResidualEntry, WeakResidualReport,
};
