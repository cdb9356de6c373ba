use std::f64::consts::PI;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// A finite train of Dirac spikes `Σ a_j δ(x − x_j)` with strictly increasing
/// real nodes.
///
/// When `positive` is set every amplitude is real and strictly positive.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "SignalJson", into = "SignalJson")]
pub struct SpikeSignal {
    nodes: Vec<f64>,
    amplitudes: Vec<Complex64>,
    positive: bool,
}

/// Wire format: `{"nodes", "amplitudes_re", "amplitudes_im", "positive"}`.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SignalJson {
    pub nodes: Vec<f64>,
    pub amplitudes_re: Vec<f64>,
    pub amplitudes_im: Vec<f64>,
    pub positive: bool,
}

impl TryFrom<SignalJson> for SpikeSignal {
    type Error = Error;

    fn try_from(json: SignalJson) -> Result<Self> {
        if json.amplitudes_re.len() != json.amplitudes_im.len() {
            return Err(Error::DegenerateSignal(
                "amplitudes_re and amplitudes_im differ in length".into(),
            ));
        }
        let amps = json
            .amplitudes_re
            .iter()
            .zip(&json.amplitudes_im)
            .map(|(&re, &im)| Complex64::new(re, im))
            .collect();
        make_signal(amps, json.nodes, json.positive)
    }
}

impl From<SpikeSignal> for SignalJson {
    fn from(s: SpikeSignal) -> Self {
        SignalJson {
            amplitudes_re: s.amplitudes.iter().map(|a| a.re).collect(),
            amplitudes_im: s.amplitudes.iter().map(|a| a.im).collect(),
            nodes: s.nodes,
            positive: s.positive,
        }
    }
}

/// Builds a signal, sorting nodes ascending and permuting amplitudes in
/// lockstep.
pub fn make_signal(
    amplitudes: Vec<Complex64>,
    nodes: Vec<f64>,
    require_positive: bool,
) -> Result<SpikeSignal> {
    if amplitudes.len() != nodes.len() {
        return Err(Error::DegenerateSignal(format!(
            "{} amplitudes for {} nodes",
            amplitudes.len(),
            nodes.len()
        )));
    }
    if nodes.is_empty() {
        return Err(Error::DegenerateSignal("empty signal".into()));
    }
    if let Some(bad) = nodes.iter().position(|x| !x.is_finite()) {
        return Err(Error::DegenerateSignal(format!("node {bad} is not finite")));
    }
    if let Some(bad) = amplitudes.iter().position(|a| !a.is_finite()) {
        return Err(Error::DegenerateSignal(format!(
            "amplitude {bad} is not finite"
        )));
    }

    let mut order: Vec<usize> = (0..nodes.len()).collect();
    order.sort_by(|&i, &j| nodes[i].total_cmp(&nodes[j]));
    let sorted_nodes: Vec<f64> = order.iter().map(|&i| nodes[i]).collect();
    let sorted_amps: Vec<Complex64> = order.iter().map(|&i| amplitudes[i]).collect();

    if let Some(w) = sorted_nodes.windows(2).find(|w| w[0] >= w[1]) {
        return Err(Error::DegenerateSignal(format!(
            "duplicate node at {}",
            w[0]
        )));
    }
    if require_positive {
        for (index, a) in sorted_amps.iter().enumerate() {
            if a.im != 0.0 || a.re <= 0.0 {
                return Err(Error::NonPositiveAmplitude {
                    index,
                    value: a.to_string(),
                });
            }
        }
    }

    Ok(SpikeSignal {
        nodes: sorted_nodes,
        amplitudes: sorted_amps,
        positive: require_positive,
    })
}

impl SpikeSignal {
    /// Positive signal from real amplitudes.
    pub fn positive(amplitudes: &[f64], nodes: &[f64]) -> Result<Self> {
        make_signal(
            amplitudes.iter().map(|&a| Complex64::new(a, 0.0)).collect(),
            nodes.to_vec(),
            true,
        )
    }

    /// Signal with real (possibly signed) amplitudes.
    pub fn real(amplitudes: &[f64], nodes: &[f64]) -> Result<Self> {
        make_signal(
            amplitudes.iter().map(|&a| Complex64::new(a, 0.0)).collect(),
            nodes.to_vec(),
            false,
        )
    }

    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }

    pub fn amplitudes(&self) -> &[Complex64] {
        &self.amplitudes
    }

    pub fn is_positive(&self) -> bool {
        self.positive
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    /// Real parts of the amplitudes; `None` if any amplitude has a nonzero
    /// imaginary part.
    pub fn real_amplitudes(&self) -> Option<Vec<f64>> {
        self.amplitudes
            .iter()
            .map(|a| (a.im == 0.0).then_some(a.re))
            .collect()
    }

    /// Sub-signal made of the spikes with indices in `range` (0-based).
    pub fn slice(&self, range: std::ops::Range<usize>) -> SpikeSignal {
        SpikeSignal {
            nodes: self.nodes[range.clone()].to_vec(),
            amplitudes: self.amplitudes[range].to_vec(),
            positive: self.positive,
        }
    }

    /// Spikes whose indices fall outside `range`.
    pub fn without(&self, range: std::ops::Range<usize>) -> Option<SpikeSignal> {
        let keep: Vec<usize> = (0..self.len()).filter(|i| !range.contains(i)).collect();
        if keep.is_empty() {
            return None;
        }
        Some(SpikeSignal {
            nodes: keep.iter().map(|&i| self.nodes[i]).collect(),
            amplitudes: keep.iter().map(|&i| self.amplitudes[i]).collect(),
            positive: self.positive,
        })
    }

    /// Translates every node by `delta`.
    pub fn shifted(&self, delta: f64) -> SpikeSignal {
        SpikeSignal {
            nodes: self.nodes.iter().map(|x| x + delta).collect(),
            amplitudes: self.amplitudes.clone(),
            positive: self.positive,
        }
    }

    /// Minimal gap between consecutive nodes (infinite for a single spike).
    pub fn min_gap(&self) -> f64 {
        self.nodes
            .windows(2)
            .map(|w| w[1] - w[0])
            .fold(f64::INFINITY, f64::min)
    }
}

/// `Σ_j a_j e^{−2πi x_j s}`.
pub fn fourier_at(signal: &SpikeSignal, s: f64) -> Complex64 {
    signal
        .nodes
        .iter()
        .zip(&signal.amplitudes)
        .map(|(&x, &a)| a * Complex64::cis(-2.0 * PI * x * s))
        .sum()
}

/// Power moments `m_k = Σ_j a_j x_j^k` for `k = 0..=k_max`.
pub fn moments(signal: &SpikeSignal, k_max: usize) -> Vec<Complex64> {
    let mut out = vec![Complex64::new(0.0, 0.0); k_max + 1];
    for (&x, &a) in signal.nodes.iter().zip(&signal.amplitudes) {
        let mut term = a;
        for m in out.iter_mut() {
            *m += term;
            term *= x;
        }
    }
    out
}

/// Real power moments of a real-amplitude signal.
pub(crate) fn real_moments(nodes: &[f64], weights: &[f64], k_max: usize) -> Vec<f64> {
    let mut out = vec![0.0; k_max + 1];
    for (&x, &w) in nodes.iter().zip(weights) {
        let mut term = w;
        for m in out.iter_mut() {
            *m += term;
            term *= x;
        }
    }
    out
}

/// The scaling transform: nodes divided by `t`, amplitudes unchanged.
///
/// # Panics
/// If `t` is not strictly positive.
pub fn scale_signal(signal: &SpikeSignal, t: f64) -> SpikeSignal {
    assert!(t > 0.0, "scale factor must be positive, got {t}");
    SpikeSignal {
        nodes: signal.nodes.iter().map(|x| x / t).collect(),
        amplitudes: signal.amplitudes.clone(),
        positive: signal.positive,
    }
}
