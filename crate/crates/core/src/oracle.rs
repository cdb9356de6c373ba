//! Brute-force diameters of the projected positive error sets.
//!
//! Every positive `d`-spike candidate on a product grid around `F` is tested
//! against `max_s |F̂′(s) − F̂(s)| ≤ ε` on equispaced `s ∈ [−Ω, Ω]`, and the
//! spread of each coordinate over the feasible candidates is reported. The
//! result is an inner approximation: true diameters can only be larger.

use std::f64::consts::PI;
use std::io::Write;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::experiments::fit_slope;
use crate::model::SpikeSignal;
use crate::parallel::Execution;

pub const MAX_RESOLUTION: usize = 80;
pub const MAX_SPIKES: usize = 2;
pub const DEFAULT_S_SAMPLES: usize = 64;
/// Relative roundoff allowance in the feasibility test.
pub const FEASIBILITY_SLACK: f64 = 1e-12;

/// Search box half-widths around `F`, per amplitude and per node.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SearchBox {
    pub amp_halfwidths: Vec<f64>,
    pub node_halfwidths: Vec<f64>,
}

impl SearchBox {
    pub fn uniform(d: usize, amp: f64, node: f64) -> Self {
        Self {
            amp_halfwidths: vec![amp; d],
            node_halfwidths: vec![node; d],
        }
    }
}

/// How a sweep chooses the search box for each ε.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum BoxRule {
    Fixed(SearchBox),
    /// Amplitude half-width `amp_factor·ε`, node half-width
    /// `node_factor·ε/Ω`.
    ScaledByEpsilon {
        amp_factor: f64,
        node_factor: f64,
    },
}

impl BoxRule {
    pub fn resolve(&self, d: usize, epsilon: f64, omega: f64) -> SearchBox {
        match self {
            BoxRule::Fixed(b) => b.clone(),
            BoxRule::ScaledByEpsilon {
                amp_factor,
                node_factor,
            } => SearchBox::uniform(d, amp_factor * epsilon, node_factor * epsilon / omega),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OracleConfig {
    pub box_rule: BoxRule,
    pub resolution: usize,
    #[serde(default = "default_s_samples")]
    pub s_samples: usize,
    #[serde(default)]
    pub execution: Execution,
}

fn default_s_samples() -> usize {
    DEFAULT_S_SAMPLES
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DiameterEstimate {
    pub epsilon: f64,
    pub omega: f64,
    pub per_node_diam: Vec<f64>,
    pub per_amp_diam: Vec<f64>,
    pub grid_resolution: usize,
    #[serde(rename = "box")]
    pub search_box: SearchBox,
    pub amp_cells: Vec<f64>,
    pub node_cells: Vec<f64>,
    pub s_samples: usize,
    pub candidates: u64,
    pub feasible_count: u64,
    pub warnings: Vec<String>,
}

/// Grid `c + k·step`, `k = −K..=K`, `K = ⌊r/2⌋`, so `c` itself is a node.
fn axis(centre: f64, halfwidth: f64, resolution: usize) -> (Vec<f64>, f64) {
    let half = resolution / 2;
    if halfwidth == 0.0 || half == 0 {
        return (vec![centre], 0.0);
    }
    let step = halfwidth / half as f64;
    let pts = (-(half as i64)..=half as i64)
        .map(|k| {
            if k == 0 {
                centre
            } else {
                centre + k as f64 * step
            }
        })
        .collect();
    (pts, step)
}

#[derive(Clone)]
struct Extent {
    lo: Vec<f64>,
    hi: Vec<f64>,
    count: u64,
    candidates: u64,
}

impl Extent {
    fn empty(dim: usize) -> Self {
        Self {
            lo: vec![f64::INFINITY; dim],
            hi: vec![f64::NEG_INFINITY; dim],
            count: 0,
            candidates: 0,
        }
    }

    fn add(&mut self, point: &[f64]) {
        for (i, &v) in point.iter().enumerate() {
            self.lo[i] = self.lo[i].min(v);
            self.hi[i] = self.hi[i].max(v);
        }
        self.count += 1;
    }

    fn merge(mut self, other: Extent) -> Extent {
        for i in 0..self.lo.len() {
            self.lo[i] = self.lo[i].min(other.lo[i]);
            self.hi[i] = self.hi[i].max(other.hi[i]);
        }
        self.count += other.count;
        self.candidates += other.candidates;
        self
    }
}

/// Odometer decode of `index` into per-axis indices.
fn decode(mut index: usize, sizes: &[usize], out: &mut [usize]) {
    for (o, &s) in out.iter_mut().zip(sizes) {
        *o = index % s;
        index /= s;
    }
}

/// Inner-approximation diameters of `E^{+,x,j}` and `E^{+,a,j}` for `d ≤ 2`.
pub fn error_set_diameters(
    signal: &SpikeSignal,
    epsilon: f64,
    omega: f64,
    search_box: &SearchBox,
    grid_resolution: usize,
    s_samples: usize,
    execution: Execution,
) -> Result<DiameterEstimate> {
    let d = signal.len();
    if d > MAX_SPIKES {
        return Err(Error::Oracle(format!(
            "d = {d} exceeds the brute-force limit {MAX_SPIKES}"
        )));
    }
    if !(2..=MAX_RESOLUTION).contains(&grid_resolution) {
        return Err(Error::Oracle(format!(
            "grid resolution must be in 2..={MAX_RESOLUTION}, got {grid_resolution}"
        )));
    }
    if s_samples < 2 {
        return Err(Error::Oracle("need at least 2 frequency samples".into()));
    }
    if !(epsilon >= 0.0 && epsilon.is_finite()) || !(omega > 0.0 && omega.is_finite()) {
        return Err(Error::Oracle(format!(
            "invalid epsilon {epsilon} or omega {omega}"
        )));
    }
    if search_box.amp_halfwidths.len() != d || search_box.node_halfwidths.len() != d {
        return Err(Error::Oracle("search box dimension differs from d".into()));
    }
    if search_box
        .amp_halfwidths
        .iter()
        .chain(&search_box.node_halfwidths)
        .any(|w| !(*w >= 0.0 && w.is_finite()))
    {
        return Err(Error::Oracle("half-widths must be finite and >= 0".into()));
    }
    let amps = signal
        .real_amplitudes()
        .filter(|a| a.iter().all(|&v| v > 0.0))
        .ok_or_else(|| Error::Oracle("the error set is defined for positive signals".into()))?;

    let s_grid: Vec<f64> = (0..s_samples)
        .map(|k| -omega + 2.0 * omega * (k as f64 / (s_samples - 1) as f64))
        .collect();

    let mut amp_axes = Vec::with_capacity(d);
    let mut amp_cells = Vec::with_capacity(d);
    let mut node_axes = Vec::with_capacity(d);
    let mut node_cells = Vec::with_capacity(d);
    for j in 0..d {
        let (a, ca) = axis(amps[j], search_box.amp_halfwidths[j], grid_resolution);
        let (x, cx) = axis(
            signal.nodes()[j],
            search_box.node_halfwidths[j],
            grid_resolution,
        );
        amp_axes.push(a);
        amp_cells.push(ca);
        node_axes.push(x);
        node_cells.push(cx);
    }
    let min_gap = node_cells.iter().copied().fold(f64::INFINITY, f64::min);

    // phasors[j][k][s] = exp(−2πi x_{j,k} s)
    let phasors: Vec<Vec<Vec<Complex64>>> = node_axes
        .iter()
        .map(|xs| {
            xs.iter()
                .map(|&x| {
                    s_grid
                        .iter()
                        .map(|&s| Complex64::from_polar(1.0, -2.0 * PI * x * s))
                        .collect()
                })
                .collect()
        })
        .collect();

    // F̂ from the same tables: F's coordinates sit at the centre of each axis
    let centre: Vec<usize> = node_axes.iter().map(|xs| xs.len() / 2).collect();
    let reference: Vec<Complex64> = (0..s_samples)
        .map(|s| (0..d).map(|j| amps[j] * phasors[j][centre[j]][s]).sum())
        .collect();

    let node_sizes: Vec<usize> = node_axes.iter().map(Vec::len).collect();
    let amp_sizes: Vec<usize> = amp_axes.iter().map(Vec::len).collect();
    let n_outer: usize = node_sizes.iter().product();
    let n_inner: usize = amp_sizes.iter().product();
    // grid points exactly on the constraint boundary stay feasible
    let budget = epsilon * (1.0 + FEASIBILITY_SLACK);

    let partials = execution.map_indexed(n_outer, |outer| {
        let mut ext = Extent::empty(2 * d);
        let mut kx = vec![0; d];
        decode(outer, &node_sizes, &mut kx);
        let xs: Vec<f64> = (0..d).map(|j| node_axes[j][kx[j]]).collect();
        if xs
            .windows(2)
            .any(|w| w[1] - w[0] < min_gap.max(f64::MIN_POSITIVE))
        {
            return ext;
        }
        let tables: Vec<&Vec<Complex64>> = (0..d).map(|j| &phasors[j][kx[j]]).collect();
        let mut ka = vec![0; d];
        let mut point = vec![0.0; 2 * d];
        for inner in 0..n_inner {
            decode(inner, &amp_sizes, &mut ka);
            let a: Vec<f64> = (0..d).map(|j| amp_axes[j][ka[j]]).collect();
            if a.iter().any(|&v| v <= 0.0) {
                continue;
            }
            ext.candidates += 1;
            let feasible = (0..s_samples).all(|s| {
                let mut v = -reference[s];
                for j in 0..d {
                    v += a[j] * tables[j][s];
                }
                v.norm() <= budget
            });
            if feasible {
                point[..d].copy_from_slice(&a);
                point[d..].copy_from_slice(&xs);
                ext.add(&point);
            }
        }
        ext
    });
    let total = partials
        .into_iter()
        .fold(Extent::empty(2 * d), Extent::merge);

    let spread = |i: usize| {
        if total.count == 0 {
            0.0
        } else {
            total.hi[i] - total.lo[i]
        }
    };
    let per_amp_diam: Vec<f64> = (0..d).map(spread).collect();
    let per_node_diam: Vec<f64> = (d..2 * d).map(spread).collect();

    let mut warnings = Vec::new();
    if total.count <= 1 {
        warnings.push("resolution insufficient: only F is feasible".to_string());
    }
    let touches = |lo: f64, hi: f64, axis: &[f64]| {
        axis.len() > 1 && (lo <= axis[0] || hi >= axis[axis.len() - 1])
    };
    for j in (0..d).filter(|_| total.count > 0) {
        if touches(total.lo[j], total.hi[j], &amp_axes[j]) {
            warnings.push(format!("amplitude {j} reaches the search box boundary"));
        }
        if touches(total.lo[d + j], total.hi[d + j], &node_axes[j]) {
            warnings.push(format!("node {j} reaches the search box boundary"));
        }
    }

    Ok(DiameterEstimate {
        epsilon,
        omega,
        per_node_diam,
        per_amp_diam,
        grid_resolution,
        search_box: search_box.clone(),
        amp_cells,
        node_cells,
        s_samples,
        candidates: total.candidates,
        feasible_count: total.count,
        warnings,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScalingReport {
    pub estimates: Vec<DiameterEstimate>,
    /// Log–log slope of each node diameter against ε; `None` when a
    /// diameter is zero somewhere in the sweep.
    pub node_slopes: Vec<Option<f64>>,
    pub amp_slopes: Vec<Option<f64>>,
    /// Diameters never shrink by more than one grid cell as ε grows.
    pub monotone: bool,
    pub warnings: Vec<String>,
}

fn slope_of(eps: &[f64], values: &[f64]) -> Option<f64> {
    let pts: Vec<(f64, f64)> = eps.iter().copied().zip(values.iter().copied()).collect();
    fit_slope(&pts).ok().map(|fit| fit.slope)
}

/// Runs the oracle for each ε and fits log–log slopes of every diameter.
pub fn diameter_epsilon_scaling(
    signal: &SpikeSignal,
    omega: f64,
    eps_list: &[f64],
    config: &OracleConfig,
) -> Result<ScalingReport> {
    if eps_list.is_empty() || eps_list.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::Oracle(
            "epsilon list must be nonempty and increasing".into(),
        ));
    }
    let d = signal.len();
    let estimates = eps_list
        .iter()
        .map(|&eps| {
            let b = config.box_rule.resolve(d, eps, omega);
            error_set_diameters(
                signal,
                eps,
                omega,
                &b,
                config.resolution,
                config.s_samples,
                config.execution,
            )
        })
        .collect::<Result<Vec<_>>>()?;

    let mut monotone = true;
    for w in estimates.windows(2) {
        for j in 0..d {
            if w[1].per_node_diam[j] + w[1].node_cells[j].max(w[0].node_cells[j])
                < w[0].per_node_diam[j]
                || w[1].per_amp_diam[j] + w[1].amp_cells[j].max(w[0].amp_cells[j])
                    < w[0].per_amp_diam[j]
            {
                monotone = false;
            }
        }
    }
    let column =
        |f: &dyn Fn(&DiameterEstimate) -> f64| -> Vec<f64> { estimates.iter().map(f).collect() };
    let node_slopes = (0..d)
        .map(|j| slope_of(eps_list, &column(&|e| e.per_node_diam[j])))
        .collect();
    let amp_slopes = (0..d)
        .map(|j| slope_of(eps_list, &column(&|e| e.per_amp_diam[j])))
        .collect();
    let warnings = estimates
        .iter()
        .flat_map(|e| {
            e.warnings
                .iter()
                .map(move |w| format!("epsilon {}: {w}", e.epsilon))
        })
        .collect();
    Ok(ScalingReport {
        estimates,
        node_slopes,
        amp_slopes,
        monotone,
        warnings,
    })
}

/// CSV with header `epsilon,node_index,node_diam,amp_diam`.
pub fn write_diameter_csv<W: Write>(estimates: &[DiameterEstimate], out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["epsilon", "node_index", "node_diam", "amp_diam"])?;
    for e in estimates {
        for j in 0..e.per_node_diam.len() {
            w.write_record([
                e.epsilon.to_string(),
                j.to_string(),
                e.per_node_diam[j].to_string(),
                e.per_amp_diam[j].to_string(),
            ])?;
        }
    }
    w.flush()?;
    Ok(())
}
