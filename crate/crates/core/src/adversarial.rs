//! Lower-bound witnesses: pairs of positive signals whose Fourier transforms
//! stay within ε on `[−Ω, Ω]` while their cluster nodes and amplitudes move
//! by amounts amplified by powers of `1/(Ωh)`.
//!
//! The cluster part is built by matching the first `2p−1` power moments of
//! the blown-up cluster and shifting the `(2p−1)`-th by ε̃, then inverting the
//! moment map with a Prony solve. The non-cluster part is shifted directly.
//! ε̃ is calibrated by halving until the cluster's Fourier difference is at
//! most ε/2 on a verification grid.

use std::f64::consts::{E, PI};

use nalgebra::{DMatrix, DVector, SVD};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{
    fourier_at, make_signal, real_moments, validate_cluster, ClusterSpec, SpikeSignal,
};

/// Relative moment residual accepted from the Prony inversion.
pub const PRONY_REL_TOL: f64 = 1e-10;
/// Halvings of ε̃ tried before giving up.
pub const MAX_HALVINGS: u32 = 60;
/// Default verification grid size on `[−Ω, Ω]`.
pub const DEFAULT_GRID_DENSITY: usize = 2048;

fn positive_parts(signal: &SpikeSignal) -> Result<Vec<f64>> {
    let amps = signal
        .real_amplitudes()
        .ok_or_else(|| Error::DegenerateSignal("amplitudes must be real".into()))?;
    if let Some(index) = amps.iter().position(|&a| a <= 0.0) {
        return Err(Error::NonPositiveAmplitude {
            index,
            value: amps[index].to_string(),
        });
    }
    Ok(amps)
}

/// Recovers the `p` real spikes whose first `2p` power moments are `mu`.
///
/// Solves the Hankel system for the Prony polynomial, takes its (necessarily
/// real) roots as nodes, fits weights on the `2p × p` Vandermonde system and
/// polishes the pair with Newton steps on the full moment map.
pub fn prony_from_moments(mu: &[f64]) -> Result<SpikeSignal> {
    if mu.is_empty() || !mu.len().is_multiple_of(2) {
        return Err(Error::DegenerateSignal(format!(
            "need 2p moments, got {}",
            mu.len()
        )));
    }
    let p = mu.len() / 2;
    if mu[0] == 0.0 || !mu.iter().all(|m| m.is_finite()) {
        return Err(Error::SingularMomentMatrix);
    }

    // rescale so that the nodes are O(1)
    let rho = mu[1..]
        .iter()
        .enumerate()
        .map(|(k, m)| (m.abs() / mu[0].abs()).powf(1.0 / (k + 1) as f64))
        .fold(0.0, f64::max);
    let rho = if rho > 0.0 { rho } else { 1.0 };
    let nu: Vec<f64> = mu
        .iter()
        .enumerate()
        .map(|(k, m)| m / rho.powi(k as i32))
        .collect();

    let h0 = DMatrix::from_fn(p, p, |i, j| nu[i + j]);
    let sv = h0.singular_values();
    if !(sv.min() > 1e-13 * sv.max()) {
        return Err(Error::SingularMomentMatrix);
    }
    let rhs = DVector::from_fn(p, |i, _| -nu[p + i]);
    let coeffs = h0.lu().solve(&rhs).ok_or(Error::SingularMomentMatrix)?;

    let mut nodes = real_roots(coeffs.as_slice())?;
    nodes.sort_by(f64::total_cmp);
    let spread = nodes.iter().fold(1.0f64, |m, y| m.max(y.abs()));
    if nodes.windows(2).any(|w| w[1] - w[0] <= 1e-10 * spread) {
        return Err(Error::NoRealSpikes("repeated roots".into()));
    }

    let vander = DMatrix::from_fn(2 * p, p, |k, j| nodes[j].powi(k as i32));
    let target = DVector::from_column_slice(&nu);
    let weights = SVD::new(vander, true, true)
        .solve(&target, 0.0)
        .map_err(|e| Error::NoRealSpikes(e.to_string()))?;
    let mut weights: Vec<f64> = weights.iter().copied().collect();

    newton_polish(&nu, &mut weights, &mut nodes);

    let fitted = real_moments(&nodes, &weights, 2 * p - 1);
    for (k, (&m, &f)) in nu.iter().zip(&fitted).enumerate() {
        if (m - f).abs() > PRONY_REL_TOL * m.abs().max(1.0) {
            return Err(Error::NoRealSpikes(format!(
                "moment {k} residual {:e}",
                (m - f).abs()
            )));
        }
    }

    let all_positive = weights.iter().all(|&b| b > 0.0);
    make_signal(
        weights.iter().map(|&b| Complex64::new(b, 0.0)).collect(),
        nodes.iter().map(|y| y * rho).collect(),
        all_positive,
    )
    .map_err(|e| Error::NoRealSpikes(e.to_string()))
}

/// Roots of the monic polynomial `y^p + Σ c_j y^j`, all of which must be
/// real.
fn real_roots(coeffs: &[f64]) -> Result<Vec<f64>> {
    let p = coeffs.len();
    if p == 1 {
        return Ok(vec![-coeffs[0]]);
    }
    let companion = DMatrix::from_fn(p, p, |i, j| {
        if j == p - 1 {
            -coeffs[i]
        } else if i == j + 1 {
            1.0
        } else {
            0.0
        }
    });
    let eig = companion.complex_eigenvalues();
    let mut roots = Vec::with_capacity(p);
    for z in eig.iter() {
        if z.im.abs() > 1e-9 * (1.0 + z.norm()) {
            return Err(Error::NoRealSpikes(format!("complex root {z}")));
        }
        roots.push(polish_root(coeffs, z.re));
    }
    Ok(roots)
}

fn polish_root(coeffs: &[f64], mut y: f64) -> f64 {
    for _ in 0..4 {
        // Horner for value and derivative of the monic polynomial
        let (mut v, mut dv) = (1.0, 0.0);
        for &c in coeffs.iter().rev() {
            dv = dv * y + v;
            v = v * y + c;
        }
        if dv == 0.0 {
            break;
        }
        let step = v / dv;
        if !step.is_finite() {
            break;
        }
        y -= step;
    }
    y
}

fn moment_residual(nu: &[f64], weights: &[f64], nodes: &[f64]) -> Vec<f64> {
    let fitted = real_moments(nodes, weights, nu.len() - 1);
    nu.iter().zip(&fitted).map(|(m, f)| m - f).collect()
}

fn newton_polish(nu: &[f64], weights: &mut [f64], nodes: &mut [f64]) {
    let p = nodes.len();
    let norm = |r: &[f64]| r.iter().map(|x| x * x).sum::<f64>().sqrt();
    let mut r = moment_residual(nu, weights, nodes);
    for _ in 0..6 {
        let current = norm(&r);
        if current == 0.0 {
            return;
        }
        let jac = DMatrix::from_fn(2 * p, 2 * p, |k, col| {
            if col < p {
                nodes[col].powi(k as i32)
            } else if k == 0 {
                0.0
            } else {
                let j = col - p;
                k as f64 * weights[j] * nodes[j].powi(k as i32 - 1)
            }
        });
        let Some(delta) = jac.lu().solve(&DVector::from_column_slice(&r)) else {
            return;
        };
        let new_w: Vec<f64> = (0..p).map(|j| weights[j] + delta[j]).collect();
        let new_y: Vec<f64> = (0..p).map(|j| nodes[j] + delta[p + j]).collect();
        let new_r = moment_residual(nu, &new_w, &new_y);
        if norm(&new_r) >= current {
            return;
        }
        weights.copy_from_slice(&new_w);
        nodes.copy_from_slice(&new_y);
        r = new_r;
    }
}

/// Centre and blow-up used for the cluster construction: `t = (x − c)·Ω`.
fn cluster_frame(nodes: &[f64]) -> f64 {
    0.5 * (nodes[0] + nodes[nodes.len() - 1])
}

/// Moment-matched perturbation of a positive cluster.
///
/// The cluster is centred, blown up by `omega`, its `(2p−1)`-th moment is
/// shifted by `epsilon_tilde`, the moment map is inverted, and the result is
/// mapped back. The returned signal therefore shares moments `0..=2p−2` with
/// `cluster` and its `(2p−1)`-th moment differs by `ε̃·Ω^{−(2p−1)}`.
pub fn perturb_cluster(
    cluster: &SpikeSignal,
    epsilon_tilde: f64,
    omega: f64,
) -> Result<SpikeSignal> {
    let amps = positive_parts(cluster)?;
    let p = cluster.len();
    if p < 2 {
        return Err(Error::InvalidSpec("cluster needs at least 2 spikes".into()));
    }
    if !(omega > 0.0) {
        return Err(Error::InvalidSpec(format!(
            "omega must be > 0, got {omega}"
        )));
    }
    let x = cluster.nodes();
    let centre = cluster_frame(x);
    let blown: Vec<f64> = x.iter().map(|xj| (xj - centre) * omega).collect();
    let rho = blown.iter().fold(0.0f64, |m, t| m.max(t.abs()));
    let unit: Vec<f64> = blown.iter().map(|t| t / rho).collect();

    let mut mu = real_moments(&unit, &amps, 2 * p - 1);
    mu[2 * p - 1] += epsilon_tilde / rho.powi(2 * p as i32 - 1);

    let regime = |e: Error| Error::ConstructibleRegime(e.to_string());
    let solved = prony_from_moments(&mu).map_err(regime)?;
    let weights = solved.real_amplitudes().expect("real weights");
    if let Some(j) = weights.iter().position(|&b| b <= 0.0) {
        return Err(Error::ConstructibleRegime(format!(
            "perturbed amplitude {j} is not positive ({})",
            weights[j]
        )));
    }
    let nodes: Vec<f64> = solved
        .nodes()
        .iter()
        .map(|u| u * rho / omega + centre)
        .collect();
    SpikeSignal::positive(&weights, &nodes).map_err(regime)
}

/// Shifts every non-cluster spike: `a′ = a + ε/(4(d−p))`,
/// `x′ = x + ε/(8πΩM(d−p))`.
pub fn shift_noncluster(
    noncluster: &SpikeSignal,
    epsilon: f64,
    omega: f64,
    m_upper: f64,
    d: usize,
    p: usize,
) -> Result<SpikeSignal> {
    if d <= p {
        return Err(Error::NoNonCluster);
    }
    let n = (d - p) as f64;
    if noncluster.len() != d - p {
        return Err(Error::InvalidSpec(format!(
            "{} non-cluster spikes for d - p = {}",
            noncluster.len(),
            d - p
        )));
    }
    let amps = positive_parts(noncluster)?;
    let da = epsilon / (4.0 * n);
    let dx = epsilon / (8.0 * PI * omega * m_upper * n);
    let a: Vec<f64> = amps.iter().map(|a| a + da).collect();
    let x: Vec<f64> = noncluster.nodes().iter().map(|x| x + dx).collect();
    SpikeSignal::positive(&a, &x)
}

/// True when the sorted union of `a` and `b` strictly alternates between the
/// two sets.
pub fn interleaves(a: &[f64], b: &[f64]) -> bool {
    if a.len() != b.len() {
        return false;
    }
    let mut tagged: Vec<(f64, bool)> = a
        .iter()
        .map(|&x| (x, false))
        .chain(b.iter().map(|&y| (y, true)))
        .collect();
    tagged.sort_by(|l, r| l.0.total_cmp(&r.0));
    tagged
        .windows(2)
        .all(|w| w[0].0 < w[1].0 && w[0].1 != w[1].1)
}

/// Lower-bound witness `(F, F_ε)` with its verification certificate.
///
/// Moment fields refer to the cluster parts `F^c`, `F_ε^c`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AdversarialPair {
    pub original: SpikeSignal,
    pub perturbed: SpikeSignal,
    pub epsilon: f64,
    pub epsilon_tilde: f64,
    pub omega: f64,
    /// 1-based index of the first cluster node.
    pub kappa: usize,
    pub p: usize,
    pub halvings: u32,
    pub grid_density: usize,
    /// `max |F̂_ε − F̂|` over the verification grid.
    pub sup_norm_achieved: f64,
    /// Same maximum on a grid four times denser.
    pub sup_norm_refined: f64,
    /// Cluster part of the Fourier difference on the verification grid.
    pub sup_norm_cluster: f64,
    /// `|m_k(F_ε^c) − m_k(F^c)|` for `k = 0..=2p−2`, in the centred frame
    /// blown up by Ω.
    pub moment_residuals: Vec<f64>,
    /// `Σ_j a_j |t_j|^k` of `F^c` in the same frame.
    pub moment_scales: Vec<f64>,
    /// `m_{2p−1}(F_ε^c) − m_{2p−1}(F^c)` in the same frame.
    pub cluster_moment_shift: f64,
    /// ε̃.
    pub expected_moment_shift: f64,
    pub displacement_x: f64,
    pub displacement_a: f64,
    pub cluster_displacement_x: f64,
    pub cluster_displacement_a: f64,
    pub positive: bool,
    pub interleaved: bool,
}

impl AdversarialPair {
    pub fn cluster_range(&self) -> std::ops::Range<usize> {
        self.kappa - 1..self.kappa - 1 + self.p
    }

    pub fn original_cluster(&self) -> SpikeSignal {
        self.original.slice(self.cluster_range())
    }

    pub fn perturbed_cluster(&self) -> SpikeSignal {
        self.perturbed.slice(self.cluster_range())
    }
}

fn verification_grid(omega: f64, density: usize) -> Vec<f64> {
    (0..density)
        .map(|k| -omega + 2.0 * omega * (k as f64 / (density - 1) as f64))
        .collect()
}

fn sup_difference(a: &SpikeSignal, b: &SpikeSignal, grid: &[f64]) -> f64 {
    grid.iter()
        .map(|&s| (fourier_at(a, s) - fourier_at(b, s)).norm())
        .fold(0.0, f64::max)
}

fn max_abs_diff(a: &[f64], b: &[f64]) -> f64 {
    a.iter()
        .zip(b)
        .map(|(x, y)| (x - y).abs())
        .fold(0.0, f64::max)
}

/// Builds `F_ε = F_ε^{nc} + F_ε^c` for a positive clustered `F`, calibrating
/// ε̃ by halving until the cluster's Fourier difference is at most ε/2 on a
/// grid of `grid_density` points, and certifies the result.
pub fn build_adversarial_pair(
    signal: &SpikeSignal,
    spec: &ClusterSpec,
    epsilon: f64,
    omega: f64,
    grid_density: usize,
) -> Result<AdversarialPair> {
    spec.validate()?;
    if !(epsilon > 0.0 && epsilon.is_finite()) {
        return Err(Error::InvalidSpec(format!(
            "epsilon must be > 0, got {epsilon}"
        )));
    }
    if !(omega > 0.0 && omega.is_finite()) {
        return Err(Error::InvalidSpec(format!(
            "omega must be > 0, got {omega}"
        )));
    }
    if grid_density < 2 {
        return Err(Error::InvalidSpec("grid density must be at least 2".into()));
    }
    let report = validate_cluster(signal.nodes(), spec);
    if !report.valid {
        return Err(Error::InvalidSpec(report.to_string()));
    }
    let amps = positive_parts(signal)?;
    let (d, p) = (spec.d, spec.p);
    let range = spec.cluster_range();
    let cluster = signal.slice(range.clone());

    let noncluster = match signal.without(range.clone()) {
        Some(nc) => {
            // the ε/2 bound on the non-cluster part needs every a_j ≤ M
            let m_eff = amps.iter().fold(spec.m_upper, |m, &a| m.max(a));
            Some(shift_noncluster(&nc, epsilon, omega, m_eff, d, p)?)
        }
        None => None,
    };

    let grid = verification_grid(omega, grid_density);
    let clean: Vec<Complex64> = grid.iter().map(|&s| fourier_at(&cluster, s)).collect();

    let mut accepted = None;
    for halvings in 0..=MAX_HALVINGS {
        let eps_tilde = epsilon * 0.5f64.powi(halvings as i32);
        let candidate = match perturb_cluster(&cluster, eps_tilde, omega) {
            Ok(c) => c,
            Err(Error::ConstructibleRegime(_)) => continue,
            Err(e) => return Err(e),
        };
        let sup = grid
            .iter()
            .zip(&clean)
            .map(|(&s, &f)| (fourier_at(&candidate, s) - f).norm())
            .fold(0.0, f64::max);
        if sup <= 0.5 * epsilon {
            accepted = Some((candidate, eps_tilde, halvings, sup));
            break;
        }
    }
    let (pert_cluster, epsilon_tilde, halvings, sup_cluster) =
        accepted.ok_or(Error::NoAdmissibleEpsilonTilde {
            halvings: MAX_HALVINGS,
        })?;

    let pc_amps = pert_cluster.real_amplitudes().expect("positive cluster");
    let mut all_amps = pc_amps.clone();
    let mut all_nodes = pert_cluster.nodes().to_vec();
    if let Some(nc) = &noncluster {
        all_amps.extend(nc.real_amplitudes().expect("positive non-cluster"));
        all_nodes.extend_from_slice(nc.nodes());
    }
    let perturbed = SpikeSignal::positive(&all_amps, &all_nodes)?;
    if perturbed.nodes()[range.clone()] != *pert_cluster.nodes() {
        return Err(Error::ConstructibleRegime(
            "perturbation reorders cluster and non-cluster nodes".into(),
        ));
    }

    let sup_norm_achieved = sup_difference(&perturbed, signal, &grid);
    if sup_norm_achieved > epsilon {
        return Err(Error::ConstructibleRegime(format!(
            "Fourier difference {sup_norm_achieved:e} exceeds epsilon {epsilon:e}"
        )));
    }
    let sup_norm_refined = sup_difference(
        &perturbed,
        signal,
        &verification_grid(omega, 4 * (grid_density - 1) + 1),
    );

    let c_amps = &amps[range.clone()];
    let centre = cluster_frame(cluster.nodes());
    let blow = |xs: &[f64]| -> Vec<f64> { xs.iter().map(|x| (x - centre) * omega).collect() };
    let (t_orig, t_pert) = (blow(cluster.nodes()), blow(pert_cluster.nodes()));
    let m_orig = real_moments(&t_orig, c_amps, 2 * p - 1);
    let m_pert = real_moments(&t_pert, &pc_amps, 2 * p - 1);
    let moment_residuals = (0..=2 * p - 2)
        .map(|k| (m_pert[k] - m_orig[k]).abs())
        .collect();
    let abs_t: Vec<f64> = t_orig.iter().map(|t| t.abs()).collect();
    let moment_scales = real_moments(&abs_t, c_amps, 2 * p - 2);

    let pert_amps = perturbed.real_amplitudes().expect("positive");
    Ok(AdversarialPair {
        epsilon,
        epsilon_tilde,
        omega,
        kappa: spec.kappa,
        p,
        halvings,
        grid_density,
        sup_norm_achieved,
        sup_norm_refined,
        sup_norm_cluster: sup_cluster,
        moment_residuals,
        moment_scales,
        cluster_moment_shift: m_pert[2 * p - 1] - m_orig[2 * p - 1],
        expected_moment_shift: epsilon_tilde,
        displacement_x: max_abs_diff(perturbed.nodes(), signal.nodes()),
        displacement_a: max_abs_diff(&pert_amps, &amps),
        cluster_displacement_x: max_abs_diff(pert_cluster.nodes(), cluster.nodes()),
        cluster_displacement_a: max_abs_diff(&pc_amps, c_amps),
        positive: pert_amps.iter().all(|&a| a > 0.0),
        interleaved: interleaves(cluster.nodes(), pert_cluster.nodes()),
        original: signal.clone(),
        perturbed,
    })
}

/// Row `j ↦ Π_{q≠j} (t − t_q)/(t_j − t_q)` of the inverse Vandermonde
/// applied to `(1, t, …, t^{k−1})`.
pub fn lagrange_row(t_list: &[f64], t: f64) -> Result<Vec<f64>> {
    for (i, a) in t_list.iter().enumerate() {
        if t_list[i + 1..].contains(a) {
            return Err(Error::DuplicateNodes);
        }
    }
    Ok((0..t_list.len())
        .map(|j| {
            t_list
                .iter()
                .enumerate()
                .filter(|&(q, _)| q != j)
                .map(|(_, &tq)| (t - tq) / (t_list[j] - tq))
                .product()
        })
        .collect())
}

/// For two `p`-spike clusters sharing moments `0..=2p−2`, the signed weights
/// `α` of their difference on the sorted union `t_1 < … < t_{2p}` satisfy
/// `α_j = −α_{2p} · lagrange_row(t_1..t_{2p−1}, t_{2p})_j`. Returns the
/// largest mismatch relative to `max|α|`, computed in the centred, normalized
/// frame of `original`.
pub fn lagrange_weight_identity(original: &SpikeSignal, perturbed: &SpikeSignal) -> Result<f64> {
    let a = positive_parts(original)?;
    let b = positive_parts(perturbed)?;
    let centre = cluster_frame(original.nodes());
    let scale = original
        .nodes()
        .iter()
        .chain(perturbed.nodes())
        .fold(0.0f64, |m, x| m.max((x - centre).abs()));
    let mut union: Vec<(f64, f64)> = original
        .nodes()
        .iter()
        .zip(&a)
        .map(|(x, &w)| ((x - centre) / scale, w))
        .chain(
            perturbed
                .nodes()
                .iter()
                .zip(&b)
                .map(|(y, &w)| ((y - centre) / scale, -w)),
        )
        .collect();
    union.sort_by(|l, r| l.0.total_cmp(&r.0));
    let n = union.len();
    let ts: Vec<f64> = union[..n - 1].iter().map(|u| u.0).collect();
    let row = lagrange_row(&ts, union[n - 1].0)?;
    let last = union[n - 1].1;
    let biggest = union.iter().fold(0.0f64, |m, u| m.max(u.1.abs()));
    Ok(row
        .iter()
        .zip(&union)
        .map(|(r, u)| (-last * r - u.1).abs() / biggest)
        .fold(0.0, f64::max))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TaylorRow {
    pub k: usize,
    /// `|m_k(H)| R^k`.
    pub lhs: f64,
    /// `(2ek/2p)^{2p} max_{ℓ<2p} |m_ℓ(H)| R^ℓ`.
    pub rhs: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TaylorReport {
    /// `R = min_j |t_j|^{−1}` over the blown-up support of `H`.
    pub r: Option<f64>,
    /// `ℓ < 2p` attaining the maximum on the right-hand side.
    pub argmax_ell: Option<usize>,
    pub rows: Vec<TaylorRow>,
    /// Values of `k` where the inequality fails.
    pub violations: Vec<usize>,
    pub skipped: Option<String>,
}

/// `(2ek/2p)^{2p}`.
pub fn taylor_factor(k: usize, p: usize) -> f64 {
    (2.0 * E * k as f64 / (2 * p) as f64).powi(2 * p as i32)
}

/// Evaluates the Taylor domination inequality for `H = F_ε^c − F^c`, taken in
/// the centred frame blown up by Ω, for every `k ∈ [2p, k_max]`.
pub fn taylor_domination_check(pair: &AdversarialPair, k_max: usize) -> Result<TaylorReport> {
    let p = pair.p;
    if k_max < 2 * p {
        return Err(Error::InvalidSpec(format!(
            "k_max = {k_max} < 2p = {}",
            2 * p
        )));
    }
    let orig = pair.original_cluster();
    let pert = pair.perturbed_cluster();
    let a = positive_parts(&orig)?;
    let b = positive_parts(&pert)?;
    let centre = cluster_frame(orig.nodes());
    let support: Vec<(f64, f64)> = pert
        .nodes()
        .iter()
        .zip(&b)
        .map(|(y, &w)| ((y - centre) * pair.omega, w))
        .chain(
            orig.nodes()
                .iter()
                .zip(&a)
                .map(|(x, &w)| ((x - centre) * pair.omega, -w)),
        )
        .collect();

    if support.iter().any(|&(t, _)| t == 0.0) {
        return Ok(TaylorReport {
            r: None,
            argmax_ell: None,
            rows: Vec::new(),
            violations: Vec::new(),
            skipped: Some("H has a node at the origin; R is undefined".into()),
        });
    }
    let r = support
        .iter()
        .map(|&(t, _)| 1.0 / t.abs())
        .fold(f64::INFINITY, f64::min);

    // scaled moments m_k(H) R^k = Σ β_j (t_j R)^k
    let scaled_nodes: Vec<f64> = support.iter().map(|&(t, _)| t * r).collect();
    let weights: Vec<f64> = support.iter().map(|&(_, w)| w).collect();
    let scaled = real_moments(&scaled_nodes, &weights, k_max);

    let (argmax, head) = scaled[..2 * p]
        .iter()
        .enumerate()
        .map(|(l, m)| (l, m.abs()))
        .fold(
            (0, 0.0),
            |best, cur| if cur.1 > best.1 { cur } else { best },
        );

    let mut rows = Vec::new();
    let mut violations = Vec::new();
    for (k, m) in scaled.iter().enumerate().skip(2 * p) {
        let lhs = m.abs();
        let rhs = taylor_factor(k, p) * head;
        if lhs > rhs {
            violations.push(k);
        }
        rows.push(TaylorRow { k, lhs, rhs });
    }
    Ok(TaylorReport {
        r: Some(r),
        argmax_ell: Some(argmax),
        rows,
        violations,
        skipped: None,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::moments;

    fn close(a: f64, b: f64, tol: f64) -> bool {
        (a - b).abs() <= tol
    }

    fn pair_spec(h: f64) -> ClusterSpec {
        ClusterSpec {
            d: 2,
            p: 2,
            h,
            big_t: 1.0,
            tau: 1.0,
            eta: 0.3,
            kappa: 1,
            m_lower: 0.5,
            m_upper: 2.0,
            centered: true,
        }
    }

    #[test]
    fn prony_single_spike() {
        let s = prony_from_moments(&[2.0, 1.0]).unwrap();
        assert!(close(s.nodes()[0], 0.5, 1e-15));
        assert!(close(s.real_amplitudes().unwrap()[0], 2.0, 1e-15));
    }

    #[test]
    fn prony_symmetric_pair() {
        let s = prony_from_moments(&[2.0, 0.0, 0.5, 0.0]).unwrap();
        assert!(close(s.nodes()[0], -0.5, 1e-14) && close(s.nodes()[1], 0.5, 1e-14));
        for b in s.real_amplitudes().unwrap() {
            assert!(close(b, 1.0, 1e-14));
        }
        // oracle: the candidate's own moments reproduce the input
        let m = moments(&s, 3);
        for (k, mu) in [2.0, 0.0, 0.5, 0.0].iter().enumerate() {
            assert!(close(m[k].re, *mu, 1e-14));
        }
    }

    #[test]
    fn prony_perturbed_last_moment() {
        let mu = [2.0, 0.0, 0.5, 1e-4];
        let s = prony_from_moments(&mu).unwrap();
        let m = moments(&s, 3);
        for k in 0..4 {
            assert!(
                (m[k].re - mu[k]).abs() <= 1e-10 * mu[k].abs().max(1.0),
                "k = {k}"
            );
        }
        assert!(!close(s.nodes()[0], -0.5, 1e-9));
    }

    #[test]
    fn prony_rejects_complex_and_singular() {
        // indefinite Hankel matrix: the Prony polynomial is y^2 + 1
        assert!(matches!(
            prony_from_moments(&[1.0, 0.0, -1.0, 0.0]),
            Err(Error::NoRealSpikes(_))
        ));
        // m0 = 2, all others zero: two spikes cannot produce this
        assert!(matches!(
            prony_from_moments(&[2.0, 0.0, 0.0, 0.0]),
            Err(Error::SingularMomentMatrix)
        ));
        // (1, 1, 1, 1): single spike at 1 posing as two
        assert!(matches!(
            prony_from_moments(&[1.0, 1.0, 1.0, 1.0]),
            Err(Error::SingularMomentMatrix)
        ));
    }

    #[test]
    fn perturb_identity_at_zero() {
        let fc = SpikeSignal::positive(&[1.0, 1.5], &[0.01, 0.04]).unwrap();
        let out = perturb_cluster(&fc, 0.0, 10.0).unwrap();
        for (a, b) in out.nodes().iter().zip(fc.nodes()) {
            assert!(close(*a, *b, 1e-10));
        }
        for (a, b) in out.amplitudes().iter().zip(fc.amplitudes()) {
            assert!((a - b).norm() < 1e-10);
        }
    }

    #[test]
    fn perturb_matches_moments_and_shift() {
        let fc = SpikeSignal::positive(&[1.0, 1.0], &[-0.05, 0.05]).unwrap();
        let (omega, et) = (10.0, 1e-6);
        let out = perturb_cluster(&fc, et, omega).unwrap();
        let m0 = moments(&fc, 3);
        let m1 = moments(&out, 3);
        for k in 0..3 {
            assert!((m1[k] - m0[k]).norm() < 1e-10, "k = {k}");
        }
        let shift = (m1[3] - m0[3]).re;
        let expected = et / omega.powi(3);
        assert!(
            (shift - expected).abs() <= 1e-8 * expected,
            "{shift} vs {expected}"
        );
        assert!(interleaves(fc.nodes(), out.nodes()));
    }

    #[test]
    fn perturb_off_centre_cluster() {
        let fc = SpikeSignal::positive(&[0.8, 1.7], &[0.30, 0.34]).unwrap();
        let (omega, et) = (5.0, 1e-6);
        let out = perturb_cluster(&fc, et, omega).unwrap();
        let m0 = moments(&fc, 3);
        let m1 = moments(&out, 3);
        for k in 0..3 {
            assert!((m1[k] - m0[k]).norm() <= 1e-9 * m0[k].norm().max(1.0));
        }
        let expected = et / omega.powi(3);
        assert!(((m1[3] - m0[3]).re - expected).abs() <= 1e-6 * expected);
    }

    #[test]
    fn large_shift_stays_positive_but_breaks_budget() {
        // a positive-definite moment matrix always has a positive real
        // representation; only the Fourier budget rules large shifts out
        let fc = SpikeSignal::positive(&[1.0, 1.0], &[-0.05, 0.05]).unwrap();
        let out = perturb_cluster(&fc, 10.0, 10.0).unwrap();
        assert!(out.is_positive());
        let sup = sup_difference(&out, &fc, &verification_grid(10.0, 512));
        assert!(sup > 1.0, "{sup}");
    }

    #[test]
    fn noncluster_shift_values() {
        let nc = SpikeSignal::positive(&[1.0], &[0.5]).unwrap();
        let out = shift_noncluster(&nc, 0.04, 10.0, 1.0, 3, 2).unwrap();
        assert!(close(out.real_amplitudes().unwrap()[0], 1.01, 1e-15));
        let dx = out.nodes()[0] - 0.5;
        assert!(close(dx, 0.04 / (80.0 * PI), 1e-15));
        assert!(close(dx, 1.59155e-4, 1e-9));

        // dense-grid check of the ε/2 bound
        let grid = verification_grid(10.0, 2048);
        let sup = sup_difference(&out, &nc, &grid);
        assert!(sup <= 0.02, "{sup}");

        assert!(matches!(
            shift_noncluster(&nc, 0.04, 10.0, 1.0, 2, 2),
            Err(Error::NoNonCluster)
        ));
    }

    #[test]
    fn pure_cluster_pair() {
        let f = SpikeSignal::positive(&[1.0, 1.0], &[-0.05, 0.05]).unwrap();
        let pair = build_adversarial_pair(&f, &pair_spec(0.1), 1e-5, 10.0, 2048).unwrap();
        assert!(pair.epsilon_tilde > 0.0);
        assert!(pair.displacement_x > 0.0);
        assert!(pair.sup_norm_achieved <= 1e-5);
        assert!(pair.sup_norm_cluster <= 0.5e-5);
        assert!(pair.positive && pair.interleaved);
        assert!(pair.perturbed.is_positive());
        for (r, m) in pair.moment_residuals.iter().zip(&pair.moment_scales) {
            assert!(*r <= 1e-9 * m);
        }
        let rel = (pair.cluster_moment_shift - pair.expected_moment_shift).abs()
            / pair.expected_moment_shift;
        assert!(rel <= 1e-8, "{rel}");
        let refine =
            (pair.sup_norm_refined - pair.sup_norm_achieved).abs() / pair.sup_norm_achieved;
        assert!(refine < 0.05);
    }

    #[test]
    fn pair_with_noncluster_node() {
        let spec = ClusterSpec {
            d: 3,
            p: 2,
            h: 0.02,
            big_t: 1.0,
            tau: 1.0,
            eta: 0.3,
            kappa: 1,
            m_lower: 0.5,
            m_upper: 2.0,
            centered: false,
        };
        let f = SpikeSignal::positive(&[1.0, 1.3, 0.9], &spec.layout().unwrap()).unwrap();
        let pair = build_adversarial_pair(&f, &spec, 1e-6, 10.0, 2048).unwrap();
        assert!(pair.sup_norm_achieved <= 1e-6);
        // non-cluster amplitude moved by exactly ε/4
        let a_nc = pair.perturbed.real_amplitudes().unwrap()[2];
        assert!(close(a_nc - 0.9, 0.25e-6, 1e-15));
        assert!(pair.cluster_displacement_x > pair.perturbed.nodes()[2] - f.nodes()[2]);
    }

    #[test]
    fn pair_rejects_invalid_input() {
        let f = SpikeSignal::positive(&[1.0, 1.0], &[-0.05, 0.05]).unwrap();
        // spacing 0.1 > h
        assert!(matches!(
            build_adversarial_pair(&f, &pair_spec(0.05), 1e-5, 10.0, 256),
            Err(Error::InvalidSpec(_))
        ));
    }

    #[test]
    fn huge_epsilon_exhausts_backtracking() {
        let f = SpikeSignal::positive(&[1.0, 1.0], &[-0.05, 0.05]).unwrap();
        // even 1e300 · 2^-60 makes the normalized moment matrix singular
        let err = build_adversarial_pair(&f, &pair_spec(0.1), 1e300, 10.0, 64).unwrap_err();
        assert!(matches!(
            err,
            Error::NoAdmissibleEpsilonTilde { halvings: 60 }
        ));
        assert!(err.to_string().contains("no admissible ε̃ found"));
    }

    #[test]
    fn lagrange_examples() {
        assert_eq!(lagrange_row(&[0.0, 1.0], 0.5).unwrap(), vec![0.5, 0.5]);
        assert_eq!(
            lagrange_row(&[0.3, 1.0, 2.0], 0.3).unwrap(),
            vec![1.0, 0.0, 0.0]
        );
        assert_eq!(
            lagrange_row(&[0.0, 1.0, 2.0], 3.0).unwrap(),
            vec![1.0, -3.0, 3.0]
        );
        let row = lagrange_row(&[-0.4, 0.1, 0.7, 1.3], 2.2).unwrap();
        assert!(close(row.iter().sum::<f64>(), 1.0, 1e-12));
        assert!(matches!(
            lagrange_row(&[0.0, 1.0, 0.0], 0.5),
            Err(Error::DuplicateNodes)
        ));
    }

    #[test]
    fn weight_identity_on_constructed_pair() {
        let fc = SpikeSignal::positive(&[1.0, 1.4], &[-0.05, 0.05]).unwrap();
        let out = perturb_cluster(&fc, 1e-5, 10.0).unwrap();
        let mismatch = lagrange_weight_identity(&fc, &out).unwrap();
        assert!(mismatch < 1e-6, "{mismatch}");
    }

    #[test]
    fn taylor_examples() {
        assert!(close(taylor_factor(4, 2), (2.0 * E).powi(4), 1e-9));
        let f = SpikeSignal::positive(&[1.0, 1.0], &[-0.05, 0.05]).unwrap();
        let pair = build_adversarial_pair(&f, &pair_spec(0.1), 1e-5, 10.0, 2048).unwrap();
        let rep = taylor_domination_check(&pair, 40).unwrap();
        assert!(rep.violations.is_empty(), "{:?}", rep.violations);
        assert_eq!(rep.argmax_ell, Some(3));
        assert_eq!(rep.rows.len(), 40 - 4 + 1);
        assert!(taylor_domination_check(&pair, 3).is_err());
    }
}
