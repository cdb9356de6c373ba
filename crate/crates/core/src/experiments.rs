//! Seeded single-trial recovery experiments, SRF sweeps, error amplification
//! summaries and log–log slope fits.

use std::fmt::Write as _;
use std::io::{Read, Write};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{
    sample_measurement, validate_cluster, ClusterSpec, MeasurementGrid, NoiseModel, SpikeSignal,
};
use crate::parallel::Execution;
use crate::pencil::recover;

/// Floor applied to ε in the amplification factors.
pub const EPSILON_FLOOR: f64 = 1e-14;
/// Drawn nodes stay within this fraction of `1/(2h_ω)`.
pub const UNAMBIGUOUS_FRACTION: f64 = 0.9;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum EpsilonRule {
    Fixed {
        epsilon: f64,
    },
    /// ε log-uniform in `[b/100, b]` with `b = c·(Ωτh)^{2p−1}`.
    RateBound {
        c: f64,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentConfig {
    pub spec: ClusterSpec,
    pub omega: f64,
    pub n_samples: usize,
    pub epsilon_rule: EpsilonRule,
    pub n_trials: usize,
    #[serde(default)]
    pub srf_sweep: Vec<f64>,
    #[serde(default)]
    pub base_seed: u64,
    #[serde(default)]
    pub noise: NoiseModel,
    /// Uniform global shift of the whole configuration in `[−t, t]`.
    #[serde(default = "default_translation")]
    pub translation: f64,
    #[serde(default = "default_quantile")]
    pub quantile: f64,
    #[serde(default)]
    pub execution: Execution,
}

fn default_translation() -> f64 {
    0.25
}

fn default_quantile() -> f64 {
    0.5
}

impl ExperimentConfig {
    pub fn validate(&self) -> Result<()> {
        self.spec.check_feasible()?;
        MeasurementGrid::new(self.omega, self.n_samples)?;
        if self.n_trials == 0 {
            return Err(Error::InvalidSpec("n_trials must be >= 1".into()));
        }
        match self.epsilon_rule {
            EpsilonRule::Fixed { epsilon } if !(epsilon >= 0.0 && epsilon.is_finite()) => {
                return Err(Error::InvalidSpec(format!("invalid epsilon {epsilon}")));
            }
            EpsilonRule::RateBound { c } if !(c > 0.0 && c.is_finite()) => {
                return Err(Error::InvalidSpec(format!(
                    "rate constant must be > 0, got {c}"
                )));
            }
            _ => {}
        }
        if !(self.translation >= 0.0 && self.translation.is_finite()) {
            return Err(Error::InvalidSpec("translation must be >= 0".into()));
        }
        if !(self.quantile > 0.0 && self.quantile < 1.0) {
            return Err(Error::InvalidSpec(format!(
                "quantile must be in (0, 1), got {}",
                self.quantile
            )));
        }
        if self.srf_sweep.iter().any(|s| !(*s > 0.0 && s.is_finite())) {
            return Err(Error::InvalidSpec("SRF values must be > 0".into()));
        }
        Ok(())
    }

    /// Copy of the configuration with `h` chosen so that the cluster gap
    /// `τh` equals `1/(Ω·srf)`.
    pub fn at_srf(&self, srf: f64) -> ExperimentConfig {
        let mut c = self.clone();
        c.spec.h = 1.0 / (self.omega * srf * self.spec.tau);
        c
    }

    /// `c·(Ωτh)^{2p−1}` for the rate rule, the fixed value otherwise.
    pub fn epsilon_bound(&self) -> f64 {
        match self.epsilon_rule {
            EpsilonRule::Fixed { epsilon } => epsilon,
            EpsilonRule::RateBound { c } => {
                c * (self.omega * self.spec.tau * self.spec.h).powi(2 * self.spec.p as i32 - 1)
            }
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum NodeClass {
    Cluster,
    NonCluster,
}

impl NodeClass {
    pub fn as_str(self) -> &'static str {
        match self {
            NodeClass::Cluster => "cluster",
            NodeClass::NonCluster => "non_cluster",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NodeOutcome {
    pub index: usize,
    pub class: NodeClass,
    pub e: f64,
    /// `e_j < min_{ℓ≠j} |x_ℓ − x_j| / 3`.
    pub succ: bool,
    pub k_x: Option<f64>,
    pub k_a: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrialRecord {
    pub seed: u64,
    pub srf: f64,
    pub epsilon: f64,
    pub truth: SpikeSignal,
    pub estimate: Option<SpikeSignal>,
    /// Error name when recovery failed.
    pub failure: Option<String>,
    pub condition_hint: Option<f64>,
    pub nodes: Vec<NodeOutcome>,
}

/// Success threshold `min_{ℓ≠j} |x_ℓ − x_j| / 3`.
pub fn success_threshold(nodes: &[f64], j: usize) -> f64 {
    nodes
        .iter()
        .enumerate()
        .filter(|&(l, _)| l != j)
        .map(|(_, x)| (x - nodes[j]).abs())
        .fold(f64::INFINITY, f64::min)
        / 3.0
}

fn draw_signal(config: &ExperimentConfig, rng: &mut ChaCha8Rng) -> Result<SpikeSignal> {
    let spec = &config.spec;
    let mut nodes = spec.layout()?;
    let slack = spec.noncluster_slack();
    let cluster = spec.cluster_range();
    for (j, x) in nodes.iter_mut().enumerate() {
        if !cluster.contains(&j) && slack > 0.0 {
            *x += rng.random_range(-slack..=slack);
        }
    }
    // recentre, then shift without leaving the unambiguous node range
    let lo = nodes.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = nodes.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let limit = UNAMBIGUOUS_FRACTION * 0.5 * (config.n_samples - 1) as f64 / (2.0 * config.omega);
    let room = limit - 0.5 * (hi - lo);
    if room <= 0.0 {
        return Err(Error::InvalidSpec(format!(
            "configuration width {} exceeds the unambiguous range ±{limit}",
            hi - lo
        )));
    }
    let t = config.translation.min(room);
    let shift = if t > 0.0 {
        rng.random_range(-t..=t)
    } else {
        0.0
    };
    let mid = 0.5 * (lo + hi);
    nodes.iter_mut().for_each(|x| *x += shift - mid);
    let amps: Vec<f64> = (0..spec.d)
        .map(|_| rng.random_range(spec.m_lower..=spec.m_upper))
        .collect();
    let signal = SpikeSignal::positive(&amps, &nodes)?;
    let report = validate_cluster(signal.nodes(), spec);
    if !report.valid {
        return Err(Error::InfeasibleGeometry(report.to_string()));
    }
    Ok(signal)
}

fn draw_epsilon(config: &ExperimentConfig, rng: &mut ChaCha8Rng) -> f64 {
    match config.epsilon_rule {
        EpsilonRule::Fixed { epsilon } => epsilon,
        EpsilonRule::RateBound { .. } => {
            let hi = config.epsilon_bound();
            let u: f64 = rng.random();
            hi * 100f64.powf(-u)
        }
    }
}

/// One randomized recovery: draw `F` and ε, sample, recover, score.
pub fn run_single_trial(config: &ExperimentConfig, seed: u64) -> Result<TrialRecord> {
    config.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let truth = draw_signal(config, &mut rng)?;
    let epsilon = draw_epsilon(config, &mut rng);
    let noise_seed: u64 = rng.random();

    let grid = MeasurementGrid::new(config.omega, config.n_samples)?;
    let y = sample_measurement(&truth, &grid, epsilon, config.noise.as_noise(), noise_seed)?;
    let srf = 1.0 / (config.omega * truth.slice(config.spec.cluster_range()).min_gap());

    let cluster = config.spec.cluster_range();
    let class = |j: usize| {
        if cluster.contains(&j) {
            NodeClass::Cluster
        } else {
            NodeClass::NonCluster
        }
    };
    let x = truth.nodes();
    let a = truth.real_amplitudes().expect("positive truth");
    let eps = epsilon.max(EPSILON_FLOOR);

    match recover(&y, config.spec.d) {
        Ok(result) => {
            let xh = result.estimate.nodes();
            let ah: Vec<f64> = result
                .estimate
                .amplitudes()
                .iter()
                .map(|b| b.norm())
                .collect();
            let nodes = (0..x.len())
                .map(|j| {
                    let e = (xh[j] - x[j]).abs();
                    let succ = e < success_threshold(x, j);
                    NodeOutcome {
                        index: j,
                        class: class(j),
                        e,
                        succ,
                        k_x: succ.then(|| e * config.omega / eps),
                        k_a: succ.then(|| (a[j] - ah[j]).abs() / eps),
                    }
                })
                .collect();
            Ok(TrialRecord {
                seed,
                srf,
                epsilon,
                truth,
                condition_hint: result.condition_hint,
                estimate: Some(result.estimate),
                failure: None,
                nodes,
            })
        }
        Err(err) => Ok(TrialRecord {
            seed,
            srf,
            epsilon,
            nodes: (0..x.len())
                .map(|j| NodeOutcome {
                    index: j,
                    class: class(j),
                    e: f64::INFINITY,
                    succ: false,
                    k_x: None,
                    k_a: None,
                })
                .collect(),
            truth,
            estimate: None,
            failure: Some(err.name().to_string()),
            condition_hint: None,
        }),
    }
}

/// Trials at seeds `base_seed..base_seed + n_trials`, in seed order.
pub fn run_batch(config: &ExperimentConfig) -> Result<Vec<TrialRecord>> {
    config.validate()?;
    let seeds: Vec<u64> = (0..config.n_trials as u64)
        .map(|i| config.base_seed.wrapping_add(i))
        .collect();
    config
        .execution
        .map_indexed(seeds.len(), |i| run_single_trial(config, seeds[i]))
        .into_iter()
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SrfBatch {
    pub srf: f64,
    pub h: f64,
    pub records: Vec<TrialRecord>,
}

/// One batch per SRF in `config.srf_sweep`; every SRF reuses the same seeds.
pub fn run_sweep(config: &ExperimentConfig) -> Result<Vec<SrfBatch>> {
    config.validate()?;
    if config.srf_sweep.is_empty() {
        return Err(Error::InvalidSpec("empty SRF sweep".into()));
    }
    config
        .srf_sweep
        .iter()
        .map(|&srf| {
            let c = config.at_srf(srf);
            Ok(SrfBatch {
                srf,
                h: c.spec.h,
                records: run_batch(&c)?,
            })
        })
        .collect()
}

/// Flat per-node row, the unit of the trial CSV.
#[derive(Debug, Clone, PartialEq)]
pub struct NodeRow {
    pub seed: u64,
    pub srf: f64,
    pub node_index: usize,
    pub node_class: NodeClass,
    pub e: f64,
    pub succ: bool,
    pub k_x: Option<f64>,
    pub k_a: Option<f64>,
}

/// Rows keyed by the nominal `srf` of the batch.
pub fn node_rows(srf: f64, records: &[TrialRecord]) -> Vec<NodeRow> {
    records
        .iter()
        .flat_map(|r| {
            r.nodes.iter().map(move |n| NodeRow {
                seed: r.seed,
                srf,
                node_index: n.index,
                node_class: n.class,
                e: n.e,
                succ: n.succ,
                k_x: n.k_x,
                k_a: n.k_a,
            })
        })
        .collect()
}

const TRIAL_HEADER: [&str; 8] = [
    "seed",
    "srf",
    "node_index",
    "node_class",
    "e_j",
    "succ",
    "K_x",
    "K_a",
];

fn opt(v: Option<f64>) -> String {
    v.map(|x| x.to_string()).unwrap_or_default()
}

pub fn write_trials_csv<W: Write>(rows: &[NodeRow], out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(TRIAL_HEADER)?;
    for r in rows {
        w.write_record([
            r.seed.to_string(),
            r.srf.to_string(),
            r.node_index.to_string(),
            r.node_class.as_str().to_string(),
            r.e.to_string(),
            r.succ.to_string(),
            opt(r.k_x),
            opt(r.k_a),
        ])?;
    }
    w.flush()?;
    Ok(())
}

pub fn read_trials_csv<R: Read>(input: R) -> Result<Vec<NodeRow>> {
    let mut r = csv::Reader::from_reader(input);
    let header = r.headers()?.clone();
    if header.iter().ne(TRIAL_HEADER.iter().copied()) {
        return Err(Error::InvalidSpec(format!(
            "unexpected trial CSV header {header:?}"
        )));
    }
    let bad = |what: &str, v: &str| Error::InvalidSpec(format!("bad {what} value {v:?}"));
    let num = |what: &str, v: &str| v.parse::<f64>().map_err(|_| bad(what, v));
    let opt_num = |what: &str, v: &str| {
        if v.is_empty() {
            Ok(None)
        } else {
            num(what, v).map(Some)
        }
    };
    let mut rows = Vec::new();
    for rec in r.records() {
        let rec = rec?;
        let f = |i: usize| rec.get(i).unwrap_or("");
        rows.push(NodeRow {
            seed: f(0).parse().map_err(|_| bad("seed", f(0)))?,
            srf: num("srf", f(1))?,
            node_index: f(2).parse().map_err(|_| bad("node_index", f(2)))?,
            node_class: match f(3) {
                "cluster" => NodeClass::Cluster,
                "non_cluster" => NodeClass::NonCluster,
                other => return Err(bad("node_class", other)),
            },
            e: num("e_j", f(4))?,
            succ: f(5).parse().map_err(|_| bad("succ", f(5)))?,
            k_x: opt_num("K_x", f(6))?,
            k_a: opt_num("K_a", f(7))?,
        });
    }
    Ok(rows)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SlopeFit {
    pub slope: f64,
    pub intercept: f64,
    pub r_squared: f64,
}

/// Ordinary least squares of `log y` on `log x`.
pub fn fit_slope(points: &[(f64, f64)]) -> Result<SlopeFit> {
    if let Some(&(x, y)) = points.iter().find(|(x, y)| !(*x > 0.0 && *y > 0.0)) {
        return Err(Error::Regression(format!(
            "log-log fit needs positive values, got ({x}, {y})"
        )));
    }
    let lx: Vec<f64> = points.iter().map(|p| p.0.ln()).collect();
    let ly: Vec<f64> = points.iter().map(|p| p.1.ln()).collect();
    let n = points.len() as f64;
    let mx = lx.iter().sum::<f64>() / n;
    let my = ly.iter().sum::<f64>() / n;
    let sxx: f64 = lx.iter().map(|x| (x - mx).powi(2)).sum();
    if points.len() < 2 || !(sxx > 0.0) {
        return Err(Error::Regression(
            "need at least 2 distinct abscissae".into(),
        ));
    }
    let sxy: f64 = lx.iter().zip(&ly).map(|(x, y)| (x - mx) * (y - my)).sum();
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let ss_tot: f64 = ly.iter().map(|y| (y - my).powi(2)).sum();
    let ss_res: f64 = lx
        .iter()
        .zip(&ly)
        .map(|(x, y)| (y - intercept - slope * x).powi(2))
        .sum();
    let r_squared = if ss_tot > 0.0 {
        1.0 - ss_res / ss_tot
    } else {
        1.0
    };
    Ok(SlopeFit {
        slope,
        intercept,
        r_squared,
    })
}

/// Linearly interpolated sample quantile.
pub fn quantile(values: &[f64], q: f64) -> Option<f64> {
    if values.is_empty() {
        return None;
    }
    let mut v = values.to_vec();
    v.sort_by(f64::total_cmp);
    let pos = q * (v.len() - 1) as f64;
    let lo = pos.floor() as usize;
    let hi = pos.ceil() as usize;
    Some(v[lo] + (pos - lo as f64) * (v[hi] - v[lo]))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SummaryRow {
    pub srf: f64,
    pub node_class: NodeClass,
    /// Quantile of `K_x` over successful nodes of the class.
    pub k_x: f64,
    pub k_a: f64,
    pub n_success: usize,
    pub n_total: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AmplificationSummary {
    pub quantile: f64,
    pub rows: Vec<SummaryRow>,
    pub cluster_kx_fit: Option<SlopeFit>,
    pub cluster_ka_fit: Option<SlopeFit>,
    pub noncluster_max_kx: Option<f64>,
    pub noncluster_max_ka: Option<f64>,
    pub notes: Vec<String>,
}

impl AmplificationSummary {
    pub fn class_rows(&self, class: NodeClass) -> impl Iterator<Item = &SummaryRow> {
        self.rows.iter().filter(move |r| r.node_class == class)
    }
}

/// Per SRF and node class: quantile of `K_x` and `K_a` over successful
/// nodes, plus slope fits of the cluster columns and maxima of the
/// non-cluster columns.
pub fn summarize_amplification(rows: &[NodeRow], q: f64) -> Result<AmplificationSummary> {
    if !(q > 0.0 && q < 1.0) {
        return Err(Error::InvalidSpec(format!(
            "quantile must be in (0, 1), got {q}"
        )));
    }
    let mut srfs: Vec<f64> = rows.iter().map(|r| r.srf).collect();
    srfs.sort_by(f64::total_cmp);
    srfs.dedup();

    let mut out = Vec::new();
    let mut notes = Vec::new();
    for &srf in &srfs {
        for class in [NodeClass::Cluster, NodeClass::NonCluster] {
            let group: Vec<&NodeRow> = rows
                .iter()
                .filter(|r| r.srf == srf && r.node_class == class)
                .collect();
            if group.is_empty() {
                continue;
            }
            let kx: Vec<f64> = group.iter().filter_map(|r| r.k_x).collect();
            let ka: Vec<f64> = group.iter().filter_map(|r| r.k_a).collect();
            match (quantile(&kx, q), quantile(&ka, q)) {
                (Some(k_x), Some(k_a)) => out.push(SummaryRow {
                    srf,
                    node_class: class,
                    k_x,
                    k_a,
                    n_success: kx.len(),
                    n_total: group.len(),
                }),
                _ => notes.push(format!(
                    "srf {srf}: every {} node failed; omitted",
                    class.as_str()
                )),
            }
        }
    }

    let fit = |f: fn(&SummaryRow) -> f64| {
        let pts: Vec<(f64, f64)> = out
            .iter()
            .filter(|r| r.node_class == NodeClass::Cluster)
            .map(|r| (r.srf, f(r)))
            .collect();
        fit_slope(&pts).ok()
    };
    let max_of = |f: fn(&SummaryRow) -> f64| {
        out.iter()
            .filter(|r| r.node_class == NodeClass::NonCluster)
            .map(f)
            .reduce(f64::max)
    };
    Ok(AmplificationSummary {
        quantile: q,
        cluster_kx_fit: fit(|r| r.k_x),
        cluster_ka_fit: fit(|r| r.k_a),
        noncluster_max_kx: max_of(|r| r.k_x),
        noncluster_max_ka: max_of(|r| r.k_a),
        rows: out,
        notes,
    })
}

/// CSV with header `srf,node_class,median_Kx,median_Ka,n_success`.
pub fn write_summary_csv<W: Write>(summary: &AmplificationSummary, out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["srf", "node_class", "median_Kx", "median_Ka", "n_success"])?;
    for r in &summary.rows {
        w.write_record([
            r.srf.to_string(),
            r.node_class.as_str().to_string(),
            r.k_x.to_string(),
            r.k_a.to_string(),
            r.n_success.to_string(),
        ])?;
    }
    w.flush()?;
    Ok(())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Factor {
    Node,
    Amplitude,
}

/// Self-contained log–log SVG of the per-SRF quantiles of one factor, with
/// the fitted cluster line.
pub fn amplification_svg(summary: &AmplificationSummary, factor: Factor) -> String {
    let (w, h, m) = (640.0, 480.0, 70.0);
    let value = |r: &SummaryRow| match factor {
        Factor::Node => r.k_x,
        Factor::Amplitude => r.k_a,
    };
    let pts: Vec<(f64, f64, NodeClass)> = summary
        .rows
        .iter()
        .filter(|r| value(r) > 0.0)
        .map(|r| (r.srf.log10(), value(r).log10(), r.node_class))
        .collect();
    let (label, fit) = match factor {
        Factor::Node => ("K_x", summary.cluster_kx_fit),
        Factor::Amplitude => ("K_a", summary.cluster_ka_fit),
    };

    let span = |vals: Vec<f64>| {
        let lo = vals.iter().copied().fold(f64::INFINITY, f64::min);
        let hi = vals.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        if !lo.is_finite() {
            (0.0, 1.0)
        } else if hi - lo < 1e-9 {
            (lo - 0.5, hi + 0.5)
        } else {
            let pad = 0.05 * (hi - lo);
            (lo - pad, hi + pad)
        }
    };
    let (x0, x1) = span(pts.iter().map(|p| p.0).collect());
    let (y0, y1) = span(pts.iter().map(|p| p.1).collect());
    let px = |x: f64| m + (x - x0) / (x1 - x0) * (w - 2.0 * m);
    let py = |y: f64| h - m - (y - y0) / (y1 - y0) * (h - 2.0 * m);

    let mut s = String::new();
    let _ = writeln!(
        s,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{w}" height="{h}" viewBox="0 0 {w} {h}" font-family="sans-serif" font-size="12">"#
    );
    let _ = writeln!(s, r#"<rect width="100%" height="100%" fill="white"/>"#);
    let _ = writeln!(
        s,
        r#"<path d="M{m} {m} V{b} H{r}" fill="none" stroke="black"/>"#,
        b = h - m,
        r = w - m
    );
    for k in x0.ceil() as i32..=x1.floor() as i32 {
        let _ = writeln!(
            s,
            r#"<text x="{:.1}" y="{:.1}" text-anchor="middle">1e{k}</text>"#,
            px(k as f64),
            h - m + 16.0
        );
    }
    for k in y0.ceil() as i32..=y1.floor() as i32 {
        let _ = writeln!(
            s,
            r#"<text x="{:.1}" y="{:.1}" text-anchor="end">1e{k}</text>"#,
            m - 6.0,
            py(k as f64) + 4.0
        );
    }
    let _ = writeln!(
        s,
        r#"<text x="{:.1}" y="{:.1}" text-anchor="middle">SRF</text>"#,
        w / 2.0,
        h - 20.0
    );
    let _ = writeln!(
        s,
        r#"<text x="20" y="{:.1}" text-anchor="middle" transform="rotate(-90 20 {:.1})">𝒦 ({label}, quantile {})</text>"#,
        h / 2.0,
        h / 2.0,
        summary.quantile
    );
    for (x, y, class) in &pts {
        let colour = match class {
            NodeClass::Cluster => "#c0392b",
            NodeClass::NonCluster => "#2c3e50",
        };
        let _ = writeln!(
            s,
            r#"<circle cx="{:.1}" cy="{:.1}" r="4" fill="{colour}"/>"#,
            px(*x),
            py(*y)
        );
    }
    if let Some(f) = fit {
        let y_at = |x: f64| f.intercept / std::f64::consts::LN_10 + f.slope * x;
        let _ = writeln!(
            s,
            r##"<line x1="{:.1}" y1="{:.1}" x2="{:.1}" y2="{:.1}" stroke="#c0392b" stroke-dasharray="6 4"/>"##,
            px(x0),
            py(y_at(x0)),
            px(x1),
            py(y_at(x1))
        );
        let _ = writeln!(
            s,
            r#"<text x="{:.1}" y="{:.1}" text-anchor="end">cluster slope {:.3} (r² {:.3})</text>"#,
            w - m,
            m - 10.0,
            f.slope,
            f.r_squared
        );
    }
    s.push_str("</svg>\n");
    s
}

#[cfg(test)]
mod tests {
    use super::*;

    fn config() -> ExperimentConfig {
        ExperimentConfig {
            spec: ClusterSpec {
                d: 3,
                p: 2,
                h: 0.05,
                big_t: 1.0,
                tau: 1.0,
                eta: 0.2,
                kappa: 1,
                m_lower: 1.0,
                m_upper: 2.0,
                centered: false,
            },
            omega: 20.0,
            n_samples: 81,
            epsilon_rule: EpsilonRule::RateBound { c: 0.1 },
            n_trials: 8,
            srf_sweep: vec![],
            base_seed: 7,
            noise: NoiseModel::UniformDisk,
            translation: 0.25,
            quantile: 0.5,
            execution: Execution::Sequential,
        }
    }

    #[test]
    fn threshold_example() {
        assert!((success_threshold(&[0.0, 0.1, 0.5], 0) - 0.1 / 3.0).abs() < 1e-15);
    }

    #[test]
    fn kx_formula() {
        let (dx, omega, eps): (f64, f64, f64) = (1e-4, 100.0, 0.01);
        assert!((dx * omega / eps - 1.0).abs() < 1e-12);
    }

    #[test]
    fn noiseless_trial_all_succeed() {
        let mut c = config();
        c.epsilon_rule = EpsilonRule::Fixed { epsilon: 0.0 };
        let r = run_single_trial(&c, 3).unwrap();
        assert!(r.failure.is_none());
        assert!(r.nodes.iter().all(|n| n.succ && n.e < 1e-9));
    }

    #[test]
    fn trial_is_deterministic() {
        let c = config();
        assert_eq!(
            run_single_trial(&c, 11).unwrap(),
            run_single_trial(&c, 11).unwrap()
        );
        let b = run_batch(&ExperimentConfig {
            n_trials: 1,
            ..c.clone()
        })
        .unwrap();
        assert_eq!(b[0], run_single_trial(&c, 7).unwrap());
    }

    #[test]
    fn rate_bound_epsilon_in_range() {
        let c = config();
        let hi = c.epsilon_bound();
        assert!((hi - 0.1).abs() < 1e-12);
        for r in run_batch(&c).unwrap() {
            assert!(r.epsilon <= hi && r.epsilon >= hi / 100.0);
        }
    }

    #[test]
    fn srf_sets_gap() {
        let c = config().at_srf(4.0);
        assert!((1.0 / (c.omega * c.spec.tau * c.spec.h) - 4.0).abs() < 1e-12);
        let r = run_single_trial(&c, 1).unwrap();
        assert!((r.srf - 4.0).abs() < 1e-9);
    }

    #[test]
    fn slope_examples() {
        let sq: Vec<(f64, f64)> = [1.0, 2.0, 4.0, 8.0].iter().map(|&x| (x, x * x)).collect();
        let f = fit_slope(&sq).unwrap();
        assert!((f.slope - 2.0).abs() < 1e-12 && (f.r_squared - 1.0).abs() < 1e-12);
        let flat: Vec<(f64, f64)> = [1.0, 3.0, 9.0].iter().map(|&x| (x, 7.0)).collect();
        assert!(fit_slope(&flat).unwrap().slope.abs() < 1e-12);
        assert!(fit_slope(&[(1.0, 1.0), (2.0, 0.0)]).is_err());
        assert!(fit_slope(&[(2.0, 1.0), (2.0, 3.0)]).is_err());
    }

    #[test]
    fn quantile_interpolates() {
        assert_eq!(quantile(&[3.0, 1.0, 2.0], 0.5), Some(2.0));
        assert_eq!(quantile(&[1.0, 2.0], 0.5), Some(1.5));
        assert_eq!(quantile(&[], 0.5), None);
    }

    #[test]
    fn csv_round_trip_and_summary() {
        let c = config();
        let rows = node_rows(2.5, &run_batch(&c).unwrap());
        let mut buf = Vec::new();
        write_trials_csv(&rows, &mut buf).unwrap();
        assert!(buf.starts_with(b"seed,srf,node_index,node_class,e_j,succ,K_x,K_a\n"));
        let back = read_trials_csv(&buf[..]).unwrap();
        assert_eq!(back, rows);

        let s = summarize_amplification(&rows, 0.5).unwrap();
        assert_eq!(s.rows.len(), 2);
        let mut out = Vec::new();
        write_summary_csv(&s, &mut out).unwrap();
        assert!(out.starts_with(b"srf,node_class,median_Kx,median_Ka,n_success\n"));
        let svg = amplification_svg(&s, Factor::Node);
        assert!(svg.starts_with("<svg") && svg.contains("SRF") && svg.contains("𝒦"));
    }

    #[test]
    fn failed_srf_omitted_with_note() {
        let row = NodeRow {
            seed: 0,
            srf: 3.0,
            node_index: 0,
            node_class: NodeClass::Cluster,
            e: f64::INFINITY,
            succ: false,
            k_x: None,
            k_a: None,
        };
        let s = summarize_amplification(&[row], 0.5).unwrap();
        assert!(s.rows.is_empty());
        assert_eq!(s.notes.len(), 1);
    }
}
