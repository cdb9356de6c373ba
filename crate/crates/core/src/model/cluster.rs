use std::fmt;
use std::ops::Range;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::signal::SpikeSignal;
use crate::error::{Error, Result};

/// Geometry of a `(p, h, T, τ, η)`-clustered configuration plus amplitude
/// bounds.
///
/// `kappa` is the 1-based index of the first cluster node.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClusterSpec {
    pub d: usize,
    pub p: usize,
    pub h: f64,
    pub big_t: f64,
    pub tau: f64,
    pub eta: f64,
    #[serde(default = "one")]
    pub kappa: usize,
    pub m_lower: f64,
    pub m_upper: f64,
    /// Anchor the cluster so that `x_κ = −x_{κ+p−1}` instead of `x_κ = 0`.
    #[serde(default)]
    pub centered: bool,
}

fn one() -> usize {
    1
}

impl ClusterSpec {
    pub fn validate(&self) -> Result<()> {
        let fail = |msg: String| Err(Error::InvalidSpec(msg));
        if self.p < 2 || self.p > self.d {
            return fail(format!(
                "need 2 <= p <= d, got p = {}, d = {}",
                self.p, self.d
            ));
        }
        if !(self.h > 0.0 && self.h <= self.big_t && self.big_t.is_finite()) {
            return fail(format!(
                "need 0 < h <= T, got h = {}, T = {}",
                self.h, self.big_t
            ));
        }
        if !(self.tau > 0.0 && self.tau <= 1.0) {
            return fail(format!("need 0 < tau <= 1, got {}", self.tau));
        }
        if !(self.eta > 0.0 && self.eta <= 1.0) {
            return fail(format!("need 0 < eta <= 1, got {}", self.eta));
        }
        if self.kappa < 1 || self.kappa > self.d - self.p + 1 {
            return fail(format!("need 1 <= kappa <= d - p + 1, got {}", self.kappa));
        }
        if !(self.m_lower > 0.0 && self.m_lower <= self.m_upper && self.m_upper.is_finite()) {
            return fail(format!(
                "need 0 < m <= M < inf, got m = {}, M = {}",
                self.m_lower, self.m_upper
            ));
        }
        Ok(())
    }

    /// 0-based index range of the cluster nodes.
    pub fn cluster_range(&self) -> Range<usize> {
        self.kappa - 1..self.kappa - 1 + self.p
    }

    /// Width of each slot in the equal partition used for non-cluster nodes.
    fn slot_width(&self) -> f64 {
        let n = self.d - self.p;
        (self.big_t - self.cluster_extent()) / n as f64
    }

    /// `(p−1)τh`.
    pub fn cluster_extent(&self) -> f64 {
        (self.p - 1) as f64 * self.tau * self.h
    }

    /// Checks that the deterministic layout can satisfy both separation
    /// conditions; names the violated inequality otherwise.
    pub fn check_feasible(&self) -> Result<()> {
        self.validate()?;
        let extent = self.cluster_extent();
        if extent > self.h * (1.0 + 1e-12) {
            return Err(Error::InfeasibleGeometry(format!(
                "(p-1)*tau*h <= h: {extent} > {}",
                self.h
            )));
        }
        if self.d > self.p {
            if extent >= self.big_t {
                return Err(Error::InfeasibleGeometry(format!(
                    "(p-1)*tau*h < T: {extent} >= {}",
                    self.big_t
                )));
            }
            let half = 0.5 * self.slot_width();
            if half < self.eta * self.big_t * (1.0 - 1e-12) {
                return Err(Error::InfeasibleGeometry(format!(
                    "(T - (p-1)*tau*h) / (2(d-p)) >= eta*T: {half} < {}",
                    self.eta * self.big_t
                )));
            }
        }
        Ok(())
    }

    /// Largest node displacement of a single non-cluster node that keeps the
    /// layout valid.
    pub fn noncluster_slack(&self) -> f64 {
        if self.d == self.p {
            return 0.0;
        }
        (0.5 * self.slot_width() - self.eta * self.big_t).max(0.0)
    }

    /// Deterministic node layout: cluster at `0, τh, …, (p−1)τh` and the
    /// `d−p` non-cluster nodes at the midpoints of an equal partition, κ−1 of
    /// them to the left of the cluster and the rest to the right.
    pub fn layout(&self) -> Result<Vec<f64>> {
        self.check_feasible()?;
        let step = self.tau * self.h;
        let extent = self.cluster_extent();
        let before = self.kappa - 1;
        let after = self.d - self.p - before;
        let mut nodes = Vec::with_capacity(self.d);
        if self.d > self.p {
            let w = self.slot_width();
            for k in 0..before {
                nodes.push(-((before - k) as f64 - 0.5) * w);
            }
            nodes.extend((0..self.p).map(|j| j as f64 * step));
            for k in 0..after {
                nodes.push(extent + (k as f64 + 0.5) * w);
            }
        } else {
            nodes.extend((0..self.p).map(|j| j as f64 * step));
        }
        if self.centered {
            let c = 0.5 * extent;
            nodes.iter_mut().for_each(|x| *x -= c);
        }
        Ok(nodes)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AmplitudeSource {
    /// Uniform in `[m_lower, m_upper]`.
    UniformRandom,
    Fixed(Vec<f64>),
}

/// Generates a positive signal whose nodes form the clustered configuration
/// described by `spec`.
pub fn make_cluster_signal(
    spec: &ClusterSpec,
    amplitudes: &AmplitudeSource,
    seed: u64,
) -> Result<SpikeSignal> {
    let nodes = spec.layout()?;
    let amps = match amplitudes {
        AmplitudeSource::UniformRandom => {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            (0..spec.d)
                .map(|_| rng.random_range(spec.m_lower..=spec.m_upper))
                .collect()
        }
        AmplitudeSource::Fixed(a) => {
            if a.len() != spec.d {
                return Err(Error::InvalidSpec(format!(
                    "{} fixed amplitudes for d = {}",
                    a.len(),
                    spec.d
                )));
            }
            a.clone()
        }
    };
    let signal = SpikeSignal::positive(&amps, &nodes)?;
    let report = validate_cluster(signal.nodes(), spec);
    if !report.valid {
        return Err(Error::InfeasibleGeometry(report.to_string()));
    }
    Ok(signal)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Condition {
    /// `τh ≤ |x_j − x_k| ≤ h` inside the cluster.
    ClusterSpacing,
    /// `ηT ≤ |x_ℓ − x_j| ≤ T` for non-cluster `ℓ`.
    Separation,
    /// Wrong node count or ordering.
    Shape,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Violation {
    pub condition: Condition,
    /// 1-based node indices.
    pub pair: (usize, usize),
    pub distance: f64,
    pub inequality: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClusterReport {
    pub valid: bool,
    pub violations: Vec<Violation>,
}

impl fmt::Display for ClusterReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.valid {
            return write!(f, "valid clustered configuration");
        }
        let parts: Vec<String> = self
            .violations
            .iter()
            .map(|v| {
                format!(
                    "({}, {}) |dx| = {}: {}",
                    v.pair.0, v.pair.1, v.distance, v.inequality
                )
            })
            .collect();
        write!(f, "{}", parts.join("; "))
    }
}

/// Checks both separation conditions for the κ-indexed cluster.
pub fn validate_cluster(nodes: &[f64], spec: &ClusterSpec) -> ClusterReport {
    let mut violations = Vec::new();
    if nodes.len() != spec.d || spec.validate().is_err() {
        violations.push(Violation {
            condition: Condition::Shape,
            pair: (0, 0),
            distance: f64::NAN,
            inequality: format!("{} nodes for d = {} with a valid spec", nodes.len(), spec.d),
        });
        return ClusterReport {
            valid: false,
            violations,
        };
    }
    if let Some(i) = nodes.windows(2).position(|w| w[0] >= w[1]) {
        violations.push(Violation {
            condition: Condition::Shape,
            pair: (i + 1, i + 2),
            distance: nodes[i + 1] - nodes[i],
            inequality: "nodes strictly increasing".into(),
        });
    }

    let scale = nodes.iter().fold(spec.big_t, |m, x| m.max(x.abs()));
    let slack = 1e-12 * scale;
    let cluster = spec.cluster_range();
    let (lo_c, hi_c) = (spec.tau * spec.h, spec.h);
    let (lo_s, hi_s) = (spec.eta * spec.big_t, spec.big_t);

    for j in 0..nodes.len() {
        for k in j + 1..nodes.len() {
            let dist = (nodes[k] - nodes[j]).abs();
            let both_cluster = cluster.contains(&j) && cluster.contains(&k);
            let (lo, hi, condition, label) = if both_cluster {
                (lo_c, hi_c, Condition::ClusterSpacing, ("tau*h", "h"))
            } else {
                (lo_s, hi_s, Condition::Separation, ("eta*T", "T"))
            };
            if dist < lo - slack {
                violations.push(Violation {
                    condition,
                    pair: (j + 1, k + 1),
                    distance: dist,
                    inequality: format!("|x{}-x{}| >= {} = {lo}", k + 1, j + 1, label.0),
                });
            }
            if dist > hi + slack {
                violations.push(Violation {
                    condition,
                    pair: (j + 1, k + 1),
                    distance: dist,
                    inequality: format!("|x{}-x{}| <= {} = {hi}", k + 1, j + 1, label.1),
                });
            }
        }
    }
    ClusterReport {
        valid: violations.is_empty(),
        violations,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    pub(crate) fn spec(d: usize, p: usize, tau: f64, h: f64, eta: f64, t: f64) -> ClusterSpec {
        ClusterSpec {
            d,
            p,
            h,
            big_t: t,
            tau,
            eta,
            kappa: 1,
            m_lower: 0.5,
            m_upper: 2.0,
            centered: false,
        }
    }

    #[test]
    fn midpoint_layout() {
        let s = spec(3, 2, 0.5, 0.1, 0.3, 1.0);
        let f = make_cluster_signal(&s, &AmplitudeSource::UniformRandom, 7).unwrap();
        assert_eq!(f.nodes()[0], 0.0);
        assert!((f.nodes()[1] - 0.05).abs() < 1e-15);
        assert!((f.nodes()[2] - 0.525).abs() < 1e-15);
        for a in f.real_amplitudes().unwrap() {
            assert!((0.5..=2.0).contains(&a));
        }
    }

    #[test]
    fn pure_cluster() {
        let s = spec(2, 2, 1.0, 0.1, 0.3, 1.0);
        let f = make_cluster_signal(&s, &AmplitudeSource::Fixed(vec![1.0, 1.0]), 0).unwrap();
        assert_eq!(f.nodes(), &[0.0, 0.1]);
    }

    #[test]
    fn centered_and_kappa() {
        let mut s = spec(4, 2, 1.0, 0.1, 0.2, 1.0);
        s.kappa = 2;
        s.centered = true;
        let f = make_cluster_signal(&s, &AmplitudeSource::UniformRandom, 1).unwrap();
        let r = s.cluster_range();
        assert!((f.nodes()[r.start] + f.nodes()[r.end - 1]).abs() < 1e-15);
        assert!(validate_cluster(f.nodes(), &s).valid);
    }

    #[test]
    fn infeasible_geometry_named() {
        // eta*T too large for the available slots
        let s = spec(4, 2, 0.5, 0.1, 0.4, 1.0);
        match make_cluster_signal(&s, &AmplitudeSource::UniformRandom, 0) {
            Err(Error::InfeasibleGeometry(msg)) => assert!(msg.contains("eta*T")),
            other => panic!("unexpected {other:?}"),
        }
        // cluster wider than h
        let s = spec(3, 3, 0.8, 0.1, 0.3, 1.0);
        match make_cluster_signal(&s, &AmplitudeSource::UniformRandom, 0) {
            Err(Error::InfeasibleGeometry(msg)) => assert!(msg.contains("(p-1)*tau*h <= h")),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn validator_examples() {
        let s = spec(3, 2, 0.5, 0.1, 0.3, 1.0);
        assert!(validate_cluster(&[0.0, 0.05, 0.525], &s).valid);

        let s2 = spec(2, 2, 0.5, 0.1, 0.3, 1.0);
        let r = validate_cluster(&[0.0, 0.2], &s2);
        assert!(!r.valid);
        assert_eq!(r.violations[0].condition, Condition::ClusterSpacing);
        assert!(r.violations[0].inequality.contains("<= h"));

        let r = validate_cluster(&[0.0, 0.05, 0.06], &s);
        assert!(!r.valid);
        assert!(r
            .violations
            .iter()
            .any(|v| v.condition == Condition::Separation && v.inequality.contains("eta*T")));
    }

    #[test]
    fn spec_validation() {
        assert!(spec(3, 1, 0.5, 0.1, 0.3, 1.0).validate().is_err());
        assert!(spec(3, 2, 0.0, 0.1, 0.3, 1.0).validate().is_err());
        assert!(spec(3, 2, 0.5, 2.0, 0.3, 1.0).validate().is_err());
        let mut s = spec(3, 2, 0.5, 0.1, 0.3, 1.0);
        s.kappa = 3;
        assert!(s.validate().is_err());
        s.kappa = 2;
        assert!(s.validate().is_ok());
    }
}
