use std::f64::consts::PI;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::signal::{fourier_at, SpikeSignal};
use crate::error::{Error, Result};

/// `N` equispaced frequencies on `[−Ω, Ω]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "GridJson", into = "GridJson")]
pub struct MeasurementGrid {
    omega: f64,
    n: usize,
}

#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct GridJson {
    pub omega: f64,
    pub n: usize,
}

impl TryFrom<GridJson> for MeasurementGrid {
    type Error = Error;
    fn try_from(g: GridJson) -> Result<Self> {
        MeasurementGrid::new(g.omega, g.n)
    }
}

impl From<MeasurementGrid> for GridJson {
    fn from(g: MeasurementGrid) -> Self {
        GridJson {
            omega: g.omega,
            n: g.n,
        }
    }
}

impl MeasurementGrid {
    pub fn new(omega: f64, n: usize) -> Result<Self> {
        if !(omega.is_finite() && omega > 0.0) {
            return Err(Error::InvalidGrid(format!(
                "omega must be > 0, got {omega}"
            )));
        }
        if n < 3 {
            return Err(Error::InvalidGrid(format!(
                "need at least 3 samples, got {n}"
            )));
        }
        Ok(Self { omega, n })
    }

    pub fn omega(&self) -> f64 {
        self.omega
    }

    pub fn n_samples(&self) -> usize {
        self.n
    }

    /// `h_ω = 2Ω/(N−1)`.
    pub fn spacing(&self) -> f64 {
        2.0 * self.omega / (self.n - 1) as f64
    }

    /// `ω_k` for `k = 0..N` (0-based); `ω_0 = −Ω` and `ω_{N−1} = Ω` exactly.
    pub fn frequency(&self, k: usize) -> f64 {
        -self.omega + 2.0 * self.omega * (k as f64 / (self.n - 1) as f64)
    }

    pub fn frequencies(&self) -> Vec<f64> {
        (0..self.n).map(|k| self.frequency(k)).collect()
    }

    /// Node magnitudes must stay below `1/(2h_ω)` to be recoverable from the
    /// pencil eigenvalue phases without aliasing.
    pub fn unambiguous_half_range(&self) -> f64 {
        0.5 / self.spacing()
    }
}

/// Noise applied by [`sample_measurement`].
pub enum Noise<'a> {
    None,
    /// i.i.d. uniform on the complex disk of radius ε.
    UniformDisk,
    /// Caller-chosen perturbation `e(ω)`, radially clipped to the disk of
    /// radius ε.
    Adversarial(&'a (dyn Fn(f64) -> Complex64 + Sync)),
}

/// Serializable subset of [`Noise`] for configuration files.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum NoiseModel {
    None,
    #[default]
    UniformDisk,
}

impl NoiseModel {
    pub fn as_noise(self) -> Noise<'static> {
        match self {
            NoiseModel::None => Noise::None,
            NoiseModel::UniformDisk => Noise::UniformDisk,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "MeasurementJson", into = "MeasurementJson")]
pub struct Measurement {
    grid: MeasurementGrid,
    values: Vec<Complex64>,
    epsilon: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct MeasurementJson {
    pub grid: MeasurementGrid,
    pub values_re: Vec<f64>,
    pub values_im: Vec<f64>,
    pub epsilon: f64,
}

impl TryFrom<MeasurementJson> for Measurement {
    type Error = Error;
    fn try_from(m: MeasurementJson) -> Result<Self> {
        if m.values_re.len() != m.values_im.len() {
            return Err(Error::InvalidGrid(
                "values_re and values_im differ in length".into(),
            ));
        }
        let values = m
            .values_re
            .iter()
            .zip(&m.values_im)
            .map(|(&re, &im)| Complex64::new(re, im))
            .collect();
        Measurement::new(m.grid, values, m.epsilon)
    }
}

impl From<Measurement> for MeasurementJson {
    fn from(m: Measurement) -> Self {
        MeasurementJson {
            grid: m.grid,
            values_re: m.values.iter().map(|v| v.re).collect(),
            values_im: m.values.iter().map(|v| v.im).collect(),
            epsilon: m.epsilon,
        }
    }
}

impl Measurement {
    pub fn new(grid: MeasurementGrid, values: Vec<Complex64>, epsilon: f64) -> Result<Self> {
        if values.len() != grid.n_samples() {
            return Err(Error::InvalidGrid(format!(
                "{} values for a grid of {} samples",
                values.len(),
                grid.n_samples()
            )));
        }
        if !(epsilon >= 0.0) {
            return Err(Error::InvalidGrid(format!(
                "epsilon must be >= 0, got {epsilon}"
            )));
        }
        Ok(Self {
            grid,
            values,
            epsilon,
        })
    }

    pub fn grid(&self) -> &MeasurementGrid {
        &self.grid
    }

    pub fn values(&self) -> &[Complex64] {
        &self.values
    }

    pub fn epsilon(&self) -> f64 {
        self.epsilon
    }
}

fn clip_to_disk(e: Complex64, radius: f64) -> Complex64 {
    let r = e.norm();
    if r > radius {
        e * (radius / r)
    } else {
        e
    }
}

/// Samples `F̂` on the grid and adds noise with `max_k |e_k| ≤ ε`.
///
/// The noise stream is a pure function of `seed`.
pub fn sample_measurement(
    signal: &SpikeSignal,
    grid: &MeasurementGrid,
    epsilon: f64,
    noise: Noise<'_>,
    seed: u64,
) -> Result<Measurement> {
    if !(epsilon >= 0.0 && epsilon.is_finite()) {
        return Err(Error::InvalidGrid(format!(
            "epsilon must be >= 0, got {epsilon}"
        )));
    }
    let freqs = grid.frequencies();
    let mut values: Vec<Complex64> = freqs.iter().map(|&w| fourier_at(signal, w)).collect();
    match noise {
        Noise::None => {}
        Noise::UniformDisk => {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            for v in values.iter_mut() {
                let u: f64 = rng.random();
                let theta: f64 = rng.random::<f64>() * 2.0 * PI;
                *v += Complex64::from_polar(epsilon * u.sqrt(), theta);
            }
        }
        Noise::Adversarial(e) => {
            for (v, &w) in values.iter_mut().zip(&freqs) {
                *v += clip_to_disk(e(w), epsilon);
            }
        }
    }
    Measurement::new(*grid, values, epsilon)
}
