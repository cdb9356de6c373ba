//! Matrix Pencil recovery of spikes from equispaced Fourier samples.
//!
//! The pipeline is: Hankel assembly, order-`d` truncated SVD of the shifted
//! sub-matrices, the reduced `d × d` pencil, its generalized eigenvalues,
//! node extraction from the eigenvalue phases, and a Vandermonde least-squares
//! fit for the amplitudes.
//!
//! In the noiseless case each eigenvalue equals `e^{−2πi x_j h_ω}` where
//! `h_ω` is the grid spacing, so nodes are read off as
//! `x̂ = −arg(ẑ)/(2π h_ω)`.

use std::f64::consts::PI;

use nalgebra::{DMatrix, DVector, Schur};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{make_signal, Measurement, MeasurementGrid, SpikeSignal};

/// Relative floor on `σ_d(H_l)` below which the pencil is rank-deficient.
pub const RANK_FLOOR: f64 = 1e-13;
/// Eigenvalues with `|ln|ẑ|| > OFF_CIRCLE_LOG` are flagged.
pub const OFF_CIRCLE_LOG: f64 = 0.5;
/// Minimal node gap accepted by the amplitude solve.
pub const MIN_NODE_GAP: f64 = 1e-12;

/// The `(N̂+1) × (N̂+1)` Hankel matrix `H[i][j] = Y(ω_{i+j})` (0-based),
/// `N̂ = ⌊(N−1)/2⌋`.
#[derive(Debug, Clone)]
pub struct HankelPencil {
    matrix: DMatrix<Complex64>,
    n_hat: usize,
}

impl HankelPencil {
    pub fn n_hat(&self) -> usize {
        self.n_hat
    }

    pub fn matrix(&self) -> &DMatrix<Complex64> {
        &self.matrix
    }

    /// `H_u`: the first `N̂` rows.
    pub fn upper(&self) -> DMatrix<Complex64> {
        self.matrix.rows(0, self.n_hat).into_owned()
    }

    /// `H_l`: rows `2..=N̂+1`.
    pub fn lower(&self) -> DMatrix<Complex64> {
        self.matrix.rows(1, self.n_hat).into_owned()
    }
}

pub fn build_hankel(y: &Measurement) -> Result<HankelPencil> {
    let values = y.values();
    let n = values.len();
    if n < 3 {
        return Err(Error::TooFewSamples { n });
    }
    let n_hat = (n - 1) / 2;
    let matrix = DMatrix::from_fn(n_hat + 1, n_hat + 1, |i, j| values[i + j]);
    Ok(HankelPencil { matrix, n_hat })
}

/// The order-`d` reduced pencil `(Ĥ_u, Ĥ_l) = (U₂*U₁Σ₁V₁*V₂, Σ₂)`.
#[derive(Debug, Clone)]
pub struct ReducedPencil {
    pub upper: DMatrix<Complex64>,
    pub lower: DMatrix<Complex64>,
    /// `σ₁..σ_{d+1}` of `H_u` (fewer if the matrix has fewer).
    pub singular_values_upper: Vec<f64>,
    /// `σ₁..σ_{d+1}` of `H_l`.
    pub singular_values_lower: Vec<f64>,
}

struct Truncated {
    u: DMatrix<Complex64>,
    sigma: Vec<f64>,
    v: DMatrix<Complex64>,
    leading: Vec<f64>,
}

/// Relative reconstruction error above which an SVD is rejected.
const SVD_RESIDUAL_TOL: f64 = 1e-9;

/// Full complex SVD `m = U Σ V*`, singular values in decreasing order.
///
/// Backed by faer: nalgebra's complex bidiagonalization returns invalid
/// factorizations for some Hankel blocks. The product is checked against `m`.
pub(crate) fn checked_svd(
    m: &DMatrix<Complex64>,
) -> Result<(DMatrix<Complex64>, Vec<f64>, DMatrix<Complex64>)> {
    let fm = faer::Mat::<Complex64>::from_fn(m.nrows(), m.ncols(), |i, j| m[(i, j)]);
    let svd = fm.svd().map_err(|_| Error::SvdFailed {
        residual: f64::INFINITY,
    })?;
    let to_na =
        |x: faer::MatRef<'_, Complex64>| DMatrix::from_fn(x.nrows(), x.ncols(), |i, j| x[(i, j)]);
    let k = m.nrows().min(m.ncols());
    let u = to_na(svd.U()).columns(0, k).into_owned();
    let v = to_na(svd.V()).columns(0, k).into_owned();
    let diag = svd.S().column_vector();
    let sigma: Vec<f64> = (0..k).map(|i| diag[i].re).collect();

    let scale = m.norm();
    let s = DMatrix::from_diagonal(&DVector::from_iterator(
        k,
        sigma.iter().map(|&x| Complex64::new(x, 0.0)),
    ));
    let residual = (&u * s * v.adjoint() - m).norm();
    let rel = if scale > 0.0 {
        residual / scale
    } else {
        residual
    };
    if !(rel <= SVD_RESIDUAL_TOL) || sigma.windows(2).any(|w| w[1] > w[0]) {
        return Err(Error::SvdFailed { residual: rel });
    }
    Ok((u, sigma, v))
}

fn truncated_svd(m: DMatrix<Complex64>, d: usize) -> Result<Truncated> {
    let (u, all, v) = checked_svd(&m)?;
    Ok(Truncated {
        u: u.columns(0, d).into_owned(),
        sigma: all[..d].to_vec(),
        v: v.columns(0, d).into_owned(),
        leading: all[..(d + 1).min(all.len())].to_vec(),
    })
}

pub fn reduced_pencil(hp: &HankelPencil, d: usize) -> Result<ReducedPencil> {
    if d == 0 || d > hp.n_hat {
        return Err(Error::ModelOrder { d, n_hat: hp.n_hat });
    }
    let up = truncated_svd(hp.upper(), d)?;
    let lo = truncated_svd(hp.lower(), d)?;

    let top = lo.leading[0];
    if !(top > 0.0) || lo.sigma[d - 1] < RANK_FLOOR * top {
        return Err(Error::RankDeficientPencil { d });
    }

    let sigma1 = DMatrix::from_diagonal(&DVector::from_iterator(
        d,
        up.sigma.iter().map(|&s| Complex64::new(s, 0.0)),
    ));
    let upper = lo.u.adjoint() * &up.u * sigma1 * up.v.adjoint() * &lo.v;
    let lower = DMatrix::from_diagonal(&DVector::from_iterator(
        d,
        lo.sigma.iter().map(|&s| Complex64::new(s, 0.0)),
    ));
    Ok(ReducedPencil {
        upper,
        lower,
        singular_values_upper: up.leading,
        singular_values_lower: lo.leading,
    })
}

/// Eigenvalues `ẑ` of `Ĥ_l v = ẑ Ĥ_u v`, computed as the spectrum of
/// `Ĥ_u⁻¹ Ĥ_l`.
pub fn pencil_eigenvalues(
    upper: &DMatrix<Complex64>,
    lower: &DMatrix<Complex64>,
) -> Result<Vec<Complex64>> {
    let (_, sv, _) = checked_svd(upper)?;
    let smax = sv.iter().copied().fold(0.0, f64::max);
    let smin = sv.iter().copied().fold(f64::INFINITY, f64::min);
    if !(smax > 0.0) || smin <= 1e-14 * smax {
        return Err(Error::PencilInversionFailed);
    }
    let m = upper
        .clone()
        .lu()
        .solve(lower)
        .ok_or(Error::PencilInversionFailed)?;
    // complex Schur form is upper triangular: the spectrum sits on the diagonal
    let (_, t) = Schur::try_new(m, f64::EPSILON, 10_000)
        .ok_or(Error::PencilInversionFailed)?
        .unpack();
    Ok(t.diagonal().iter().copied().collect())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "kind")]
pub enum PencilWarning {
    /// `|x̂| ≥ 1/(2h_ω) − tol`: the phase may have wrapped.
    AliasingRange { node: f64, limit: f64 },
    /// `|ln|ẑ|| > 0.5`.
    OffUnitCircle { node: f64, modulus: f64 },
    /// `ẑ = 0`: the phase is undefined.
    ZeroEigenvalue,
}

#[derive(Debug, Clone, PartialEq)]
pub struct NodeEstimate {
    /// Ascending.
    pub nodes: Vec<f64>,
    /// Eigenvalues permuted to match `nodes`.
    pub eigenvalues: Vec<Complex64>,
    pub warnings: Vec<PencilWarning>,
}

/// `x̂_j = −arg(ẑ_j)/(2π h_ω)` with the principal branch, sorted ascending.
pub fn nodes_from_eigenvalues(z: &[Complex64], grid: &MeasurementGrid) -> NodeEstimate {
    let h = grid.spacing();
    let limit = grid.unambiguous_half_range();
    let tol = 1e-9 * limit;
    let mut pairs: Vec<(f64, Complex64)> = z
        .iter()
        .map(|&zj| {
            let x = -zj.arg() / (2.0 * PI * h);
            // arg(conj) flips sign; keep the exact zero for z on the positive axis
            (if x == 0.0 { 0.0 } else { x }, zj)
        })
        .collect();
    pairs.sort_by(|a, b| a.0.total_cmp(&b.0));

    let mut warnings = Vec::new();
    for &(x, zj) in &pairs {
        let r = zj.norm();
        if r == 0.0 {
            warnings.push(PencilWarning::ZeroEigenvalue);
            continue;
        }
        if x.abs() >= limit - tol {
            warnings.push(PencilWarning::AliasingRange { node: x, limit });
        }
        if r.ln().abs() > OFF_CIRCLE_LOG {
            warnings.push(PencilWarning::OffUnitCircle {
                node: x,
                modulus: r,
            });
        }
    }
    NodeEstimate {
        nodes: pairs.iter().map(|p| p.0).collect(),
        eigenvalues: pairs.iter().map(|p| p.1).collect(),
        warnings,
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct AmplitudeFit {
    pub b_hat: Vec<Complex64>,
    pub a_hat: Vec<f64>,
    pub residual: f64,
}

/// Least-squares `b̂ = argmin ‖Y − V b‖₂` with `V = (e^{−2πi x̂_j ω_k})`,
/// solved through the SVD of `V`; `â = |b̂|`.
pub fn estimate_amplitudes(y: &Measurement, nodes: &[f64]) -> Result<AmplitudeFit> {
    if nodes.is_empty() {
        return Err(Error::RankDeficientVandermonde("no nodes".into()));
    }
    let mut sorted = nodes.to_vec();
    sorted.sort_by(f64::total_cmp);
    if let Some(w) = sorted.windows(2).find(|w| w[1] - w[0] < MIN_NODE_GAP) {
        return Err(Error::RankDeficientVandermonde(format!(
            "nodes {} and {} closer than {MIN_NODE_GAP}",
            w[0], w[1]
        )));
    }
    let freqs = y.grid().frequencies();
    let v = DMatrix::from_fn(freqs.len(), nodes.len(), |k, j| {
        Complex64::cis(-2.0 * PI * nodes[j] * freqs[k])
    });
    let rhs = DVector::from_column_slice(y.values());
    let (u_v, sv, v_v) = checked_svd(&v)?;
    let smax = sv.iter().copied().fold(0.0, f64::max);
    let smin = sv.iter().copied().fold(f64::INFINITY, f64::min);
    if smin <= 1e-14 * smax {
        return Err(Error::RankDeficientVandermonde(format!(
            "condition number {:e}",
            smax / smin
        )));
    }
    let coeffs = u_v.columns(0, sv.len()).adjoint() * &rhs;
    let b = &v_v * DVector::from_iterator(sv.len(), coeffs.iter().zip(&sv).map(|(c, s)| c / *s));
    let residual = (&rhs - &v * &b).norm();
    Ok(AmplitudeFit {
        a_hat: b.iter().map(|c| c.norm()).collect(),
        b_hat: b.iter().copied().collect(),
        residual,
    })
}

/// Output of [`recover`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RecoveryResult {
    pub estimate: SpikeSignal,
    pub pencil_eigenvalues: Vec<Complex64>,
    pub b_hat: Vec<Complex64>,
    pub singular_values_upper: Vec<f64>,
    pub singular_values_lower: Vec<f64>,
    pub lsq_residual: f64,
    /// `σ_d/σ_{d+1}` of `H_u`; absent when `σ_{d+1}` is unavailable or zero.
    pub condition_hint: Option<f64>,
    pub warnings: Vec<PencilWarning>,
}

/// Runs the full Matrix Pencil pipeline for model order `d`.
pub fn recover(y: &Measurement, d: usize) -> Result<RecoveryResult> {
    let hp = build_hankel(y).map_err(Error::at("hankel"))?;
    let rp = reduced_pencil(&hp, d).map_err(Error::at("truncated svd"))?;
    let z = pencil_eigenvalues(&rp.upper, &rp.lower).map_err(Error::at("pencil eigenvalues"))?;
    let est = nodes_from_eigenvalues(&z, y.grid());
    let fit = estimate_amplitudes(y, &est.nodes).map_err(Error::at("amplitudes"))?;

    let all_positive = fit.a_hat.iter().all(|&a| a > 0.0);
    let estimate = make_signal(
        fit.a_hat.iter().map(|&a| Complex64::new(a, 0.0)).collect(),
        est.nodes.clone(),
        all_positive,
    )
    .map_err(Error::at("estimate"))?;

    let s = &rp.singular_values_upper;
    let condition_hint = s
        .get(d)
        .map(|&next| s[d - 1] / next)
        .filter(|r| r.is_finite());

    Ok(RecoveryResult {
        estimate,
        pencil_eigenvalues: est.eigenvalues,
        b_hat: fit.b_hat,
        singular_values_upper: rp.singular_values_upper,
        singular_values_lower: rp.singular_values_lower,
        lsq_residual: fit.residual,
        condition_hint,
        warnings: est.warnings,
    })
}
