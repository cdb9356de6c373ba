//! Spike trains, their Fourier data and power moments, the scaling transform,
//! and clustered node configurations.

mod cluster;
mod measurement;
mod signal;

pub use cluster::{
    make_cluster_signal, validate_cluster, AmplitudeSource, ClusterReport, ClusterSpec, Condition,
    Violation,
};
pub use measurement::{
    sample_measurement, GridJson, Measurement, MeasurementGrid, MeasurementJson, Noise, NoiseModel,
};
pub use signal::{fourier_at, make_signal, moments, scale_signal, SignalJson, SpikeSignal};

pub(crate) use signal::real_moments;
