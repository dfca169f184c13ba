//! Homodyne statistics, quadrature sampling and iterative
//! maximum-likelihood reconstruction.
//!
//! The quadrature eigenstate at phase `θ` has number-basis amplitudes
//! `⟨n|x_θ⟩ = ψₙ(x) e^{inθ}`, with `ψₙ` the Hermite functions of the
//! `x = (a + a†)/√2` convention, so
//! `p(x|θ) = Σ ρ_{mn} ψ_m(x) ψ_n(x) e^{i(n−m)θ}`.

use std::f64::consts::PI;

use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::fock::DensityOperator;
use crate::{Error, Result, C64};

pub const DEFAULT_TOMO_DIM: usize = 6;
pub const DEFAULT_MAX_ITERS: usize = 2000;
pub const DEFAULT_CONVERGENCE_TOL: f64 = 1e-10;
pub const DEFAULT_PHASES: usize = 12;

/// Spacing of the inverse-CDF table.
const CDF_STEP: f64 = 1e-3;
/// Density below which the sampling window stops growing.
const TAIL_DENSITY: f64 = 1e-14;
const P_FLOOR: f64 = 1e-300;

/// One homodyne outcome. The phase is kept in `[0, π)`; since
/// `x_{θ+π} = −x_θ`, folding the phase flips the sign of `x`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(from = "RawRecord")]
pub struct QuadratureRecord {
    theta: f64,
    x: f64,
}

#[derive(Deserialize)]
struct RawRecord {
    theta: f64,
    x: f64,
}

impl From<RawRecord> for QuadratureRecord {
    fn from(r: RawRecord) -> Self {
        QuadratureRecord::new(r.theta, r.x)
    }
}

impl QuadratureRecord {
    pub fn new(theta: f64, x: f64) -> Self {
        let mut t = theta.rem_euclid(2.0 * PI);
        let mut x = x;
        if t >= PI {
            t -= PI;
            x = -x;
        }
        if t >= PI {
            t = 0.0;
        }
        Self { theta: t, x }
    }

    pub fn theta(&self) -> f64 {
        self.theta
    }

    pub fn x(&self) -> f64 {
        self.x
    }
}

/// Hermite functions `ψ₀(x) .. ψ_{dim−1}(x)`, normalized with `∫ψₙ² dx = 1`.
pub fn hermite_functions(x: f64, dim: usize) -> Vec<f64> {
    let mut out = Vec::with_capacity(dim);
    if dim == 0 {
        return out;
    }
    out.push(PI.powf(-0.25) * (-x * x / 2.0).exp());
    if dim > 1 {
        out.push(2f64.sqrt() * x * out[0]);
    }
    for n in 1..dim.saturating_sub(1) {
        let nf = n as f64;
        let next = (2.0 / (nf + 1.0)).sqrt() * x * out[n] - (nf / (nf + 1.0)).sqrt() * out[n - 1];
        out.push(next);
    }
    out
}

/// `⟨n|x_θ⟩` for `n < dim`.
fn eigenstate(theta: f64, x: f64, dim: usize) -> DVector<C64> {
    let psi = hermite_functions(x, dim);
    DVector::from_iterator(dim, psi.iter().enumerate().map(|(n, &v)| C64::from_polar(v, n as f64 * theta)))
}

/// Homodyne density `p(x|θ)`.
pub fn quadrature_pdf(rho: &DensityOperator, theta: f64, x: f64) -> f64 {
    let v = eigenstate(theta, x, rho.dim());
    v.dotc(&(rho.matrix() * &v)).re.max(0.0)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PhaseSchedule {
    /// `phases` equally spaced phases `kπ/phases`, visited cyclically.
    UniformScan { phases: usize },
    /// Explicit phases, visited cyclically.
    Explicit(Vec<f64>),
}

impl Default for PhaseSchedule {
    fn default() -> Self {
        PhaseSchedule::UniformScan { phases: DEFAULT_PHASES }
    }
}

impl PhaseSchedule {
    pub fn phases(&self) -> Result<Vec<f64>> {
        let phases = match self {
            PhaseSchedule::UniformScan { phases } => (0..*phases).map(|k| k as f64 * PI / *phases as f64).collect(),
            PhaseSchedule::Explicit(list) => list.clone(),
        };
        if phases.is_empty() {
            return Err(Error::invalid("phase schedule is empty"));
        }
        if phases.iter().any(|t| !t.is_finite()) {
            return Err(Error::invalid("phases must be finite"));
        }
        Ok(phases)
    }
}

/// Inverse-CDF table for one phase.
struct QuadratureSampler {
    x0: f64,
    cdf: Vec<f64>,
}

impl QuadratureSampler {
    fn new(rho: &DensityOperator, theta: f64) -> Self {
        let d = rho.dim();
        let mut half = (2.0 * (d as f64 - 1.0) + 1.0).sqrt() + 3.0;
        while half < 60.0
            && (quadrature_pdf(rho, theta, half) > TAIL_DENSITY || quadrature_pdf(rho, theta, -half) > TAIL_DENSITY)
        {
            half += 0.5;
        }
        let n = (2.0 * half / CDF_STEP).ceil() as usize;
        let h = 2.0 * half / n as f64;
        let mut cdf = Vec::with_capacity(n + 1);
        let mut prev = quadrature_pdf(rho, theta, -half);
        let mut acc = 0.0;
        cdf.push(0.0);
        for i in 1..=n {
            let cur = quadrature_pdf(rho, theta, -half + i as f64 * h);
            acc += 0.5 * h * (prev + cur);
            cdf.push(acc);
            prev = cur;
        }
        let total = acc;
        for c in cdf.iter_mut() {
            *c /= total;
        }
        Self { x0: -half, cdf }
    }

    fn step(&self) -> f64 {
        -2.0 * self.x0 / (self.cdf.len() - 1) as f64
    }

    fn sample(&self, u: f64) -> f64 {
        let i = self.cdf.partition_point(|&c| c <= u).clamp(1, self.cdf.len() - 1);
        let (lo, hi) = (self.cdf[i - 1], self.cdf[i]);
        let frac = if hi > lo { (u - lo) / (hi - lo) } else { 0.5 };
        self.x0 + (i as f64 - 1.0 + frac) * self.step()
    }
}

/// Draws `n_samples` homodyne records from `rho`, cycling through the
/// schedule's phases. Output depends only on the inputs and `seed`.
pub fn sample_quadratures(
    rho: &DensityOperator,
    n_samples: usize,
    schedule: &PhaseSchedule,
    seed: u64,
) -> Result<Vec<QuadratureRecord>> {
    if n_samples == 0 {
        return Err(Error::invalid("need at least one sample"));
    }
    let phases = schedule.phases()?;
    let samplers: Vec<QuadratureSampler> = phases.iter().map(|&t| QuadratureSampler::new(rho, t)).collect();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    Ok((0..n_samples)
        .map(|j| {
            let k = j % phases.len();
            let u: f64 = rng.random();
            QuadratureRecord::new(phases[k], samplers[k].sample(u))
        })
        .collect())
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TomoSettings {
    pub dim: usize,
    pub max_iters: usize,
    /// Stop once the mean log-likelihood per record rises by less than this.
    pub convergence_tol: f64,
    /// Snap phases to this many equally spaced bins before fitting.
    pub phase_bins: Option<usize>,
}

impl Default for TomoSettings {
    fn default() -> Self {
        Self {
            dim: DEFAULT_TOMO_DIM,
            max_iters: DEFAULT_MAX_ITERS,
            convergence_tol: DEFAULT_CONVERGENCE_TOL,
            phase_bins: None,
        }
    }
}

impl TomoSettings {
    pub fn validate(&self) -> Result<()> {
        if self.dim == 0 {
            return Err(Error::invalid("reconstruction dim must be ≥ 1"));
        }
        if self.max_iters == 0 {
            return Err(Error::invalid("max_iters must be ≥ 1"));
        }
        if !(self.convergence_tol > 0.0) {
            return Err(Error::invalid("convergence_tol must be positive"));
        }
        if self.phase_bins == Some(0) {
            return Err(Error::invalid("phase_bins must be ≥ 1"));
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TomoDiagnostics {
    pub iterations: usize,
    /// `Σ_j ln p_j` at the returned state.
    pub final_log_likelihood: f64,
    pub converged: bool,
    pub records: usize,
    /// Mean log-likelihood per record before each update, then at the end.
    pub log_likelihood_history: Vec<f64>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Reconstruction {
    pub rho: DensityOperator,
    pub diagnostics: TomoDiagnostics,
}

/// Fits a density operator to homodyne records by iterating
/// `ρ ← N[R(ρ) ρ R(ρ)]` with `R(ρ) = (1/N) Σ_j Π_j / p_j(ρ)`.
///
/// Running out of iterations is not an error; check
/// `diagnostics.converged`.
pub fn mle_reconstruct(records: &[QuadratureRecord], settings: &TomoSettings) -> Result<Reconstruction> {
    settings.validate()?;
    if records.is_empty() {
        return Err(Error::EmptyRecords);
    }
    let d = settings.dim;
    let n = records.len();
    let bin = settings.phase_bins.map(|k| PI / k as f64);

    // Row j holds ⟨n|x_j,θ_j⟩.
    let mut v = DMatrix::<C64>::zeros(n, d);
    for (j, r) in records.iter().enumerate() {
        let rec = match bin {
            Some(w) => QuadratureRecord::new((r.theta / w).round() * w, r.x),
            None => *r,
        };
        let e = eigenstate(rec.theta, rec.x, d);
        v.row_mut(j).copy_from(&e.transpose());
    }
    let v_conj = v.map(|z| z.conj());

    let probabilities = |rho: &DMatrix<C64>| -> DVector<f64> {
        let w = &v_conj * rho;
        DVector::from_iterator(
            n,
            (0..n).map(|j| {
                let mut acc = C64::default();
                for k in 0..d {
                    acc += w[(j, k)] * v[(j, k)];
                }
                acc.re.max(P_FLOOR)
            }),
        )
    };
    let mean_ll = |p: &DVector<f64>| p.iter().map(|x| x.ln()).sum::<f64>() / n as f64;

    let mut rho = DMatrix::<C64>::identity(d, d) / C64::new(d as f64, 0.0);
    let mut history = Vec::new();
    let mut converged = false;
    let mut iterations = 0;

    for _ in 0..settings.max_iters {
        let p = probabilities(&rho);
        let ll = mean_ll(&p);
        if let Some(&prev) = history.last() {
            if ll - prev < settings.convergence_tol {
                history.push(ll);
                converged = true;
                break;
            }
        }
        history.push(ll);

        let mut scaled = v.clone();
        for (j, mut row) in scaled.row_iter_mut().enumerate() {
            row /= C64::new(p[j] * n as f64, 0.0);
        }
        let r = scaled.transpose() * &v_conj;
        let next = &r * &rho * &r;
        let tr: f64 = next.diagonal().iter().map(|z| z.re).sum();
        if !(tr > 0.0) || !tr.is_finite() {
            return Err(Error::Numerical("reconstruction collapsed to zero trace".into()));
        }
        let next = next / C64::new(tr, 0.0);
        rho = (&next + next.adjoint()) * C64::new(0.5, 0.0);
        iterations += 1;
    }

    let p = probabilities(&rho);
    let final_mean = mean_ll(&p);
    if !converged {
        history.push(final_mean);
    }
    Ok(Reconstruction {
        rho: DensityOperator::from_matrix(rho)?,
        diagnostics: TomoDiagnostics {
            iterations,
            final_log_likelihood: final_mean * n as f64,
            converged,
            records: n,
            log_likelihood_history: history,
        },
    })
}

/// Summary numbers for a signal state.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MetricsReport {
    pub dim: usize,
    pub trace: f64,
    pub populations: Vec<f64>,
    pub purity: f64,
    pub mean_photon_number: f64,
    /// `Σ_{n>3} ρ_nn`.
    pub population_above_three: f64,
}

pub fn metrics(rho: &DensityOperator) -> MetricsReport {
    let populations = rho.populations();
    MetricsReport {
        dim: rho.dim(),
        trace: rho.trace(),
        population_above_three: populations.iter().skip(4).sum(),
        purity: rho.purity(),
        mean_photon_number: rho.mean_photon_number(),
        populations,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fock::{fidelity, loss_channel, phase_rotation, squeeze_operator, FockVector};
    use approx::assert_abs_diff_eq;

    fn integrate(f: impl Fn(f64) -> f64, lo: f64, hi: f64, n: usize) -> f64 {
        let h = (hi - lo) / n as f64;
        let mut s = f(lo) + f(hi);
        for i in 1..n {
            s += f(lo + i as f64 * h) * if i % 2 == 1 { 4.0 } else { 2.0 };
        }
        s * h / 3.0
    }

    fn squeezed_vacuum(r: f64, dim: usize) -> DensityOperator {
        squeeze_operator(r, 0.0, dim)
            .unwrap()
            .apply(&FockVector::basis(0, dim).unwrap())
            .unwrap()
            .to_density()
    }

    #[test]
    fn hermite_functions_orthonormal() {
        let d = 6;
        for m in 0..d {
            for n in 0..d {
                let v = integrate(|x| { let h = hermite_functions(x, d); h[m] * h[n] }, -12.0, 12.0, 4000);
                assert_abs_diff_eq!(v, if m == n { 1.0 } else { 0.0 }, epsilon = 1e-10);
            }
        }
    }

    #[test]
    fn vacuum_pdf_is_gaussian() {
        let rho = DensityOperator::fock(0, 4).unwrap();
        for theta in [0.0, 0.7, 2.0] {
            for x in [-1.0f64, 0.0, 0.5] {
                let expected = (-x * x).exp() / PI.sqrt();
                assert_abs_diff_eq!(quadrature_pdf(&rho, theta, x), expected, epsilon = 1e-14);
            }
        }
    }

    #[test]
    fn single_photon_node() {
        let rho = DensityOperator::fock(1, 4).unwrap();
        for theta in [0.0, 1.0, 2.5] {
            assert_eq!(quadrature_pdf(&rho, theta, 0.0), 0.0);
        }
    }

    #[test]
    fn squeezed_variance_from_pdf() {
        let r = 0.5;
        let rho = squeezed_vacuum(r, 30);
        let var = integrate(|x| x * x * quadrature_pdf(&rho, 0.0, x), -8.0, 8.0, 4000);
        assert_abs_diff_eq!(var, (-2.0 * r).exp() / 2.0, epsilon = 1e-6);
    }

    #[test]
    fn pdf_normalized_for_all_phases() {
        let psi = FockVector::new(vec![
            C64::new(0.3, 0.0),
            C64::new(0.1, 0.5),
            C64::new(-0.4, 0.2),
            C64::new(0.6, 0.0),
            C64::new(0.0, -0.2),
        ])
        .unwrap()
        .normalized()
        .unwrap();
        let states = [
            DensityOperator::fock(0, 5).unwrap(),
            DensityOperator::fock(3, 5).unwrap(),
            psi.to_density(),
            loss_channel(&psi.to_density(), 0.7).unwrap(),
        ];
        for rho in &states {
            for k in 0..8 {
                let theta = k as f64 * PI / 8.0;
                let total = integrate(|x| quadrature_pdf(rho, theta, x), -10.0, 10.0, 4000);
                assert_abs_diff_eq!(total, 1.0, epsilon = 1e-6);
            }
        }
    }

    #[test]
    fn pdf_rotation_identity() {
        let psi = FockVector::new(vec![C64::new(0.5, 0.1), C64::new(0.2, -0.6), C64::new(0.0, 0.3), C64::new(0.4, 0.0)])
            .unwrap()
            .normalized()
            .unwrap();
        let rho = psi.to_density();
        for theta in [0.3, 1.2, 2.9] {
            let rotated = rho.conjugate_by(&phase_rotation(-theta, 4).unwrap()).unwrap();
            for x in [-1.3, 0.0, 0.4, 2.0] {
                assert_abs_diff_eq!(quadrature_pdf(&rho, theta, x), quadrature_pdf(&rotated, 0.0, x), epsilon = 1e-10);
            }
        }
    }

    #[test]
    fn record_phase_folding() {
        let r = QuadratureRecord::new(PI + 0.25, 1.5);
        assert_abs_diff_eq!(r.theta(), 0.25, epsilon = 1e-15);
        assert_eq!(r.x(), -1.5);
        let r = QuadratureRecord::new(-0.1, 1.0);
        assert_abs_diff_eq!(r.theta(), PI - 0.1, epsilon = 1e-14);
        assert_eq!(r.x(), -1.0);
        let parsed: QuadratureRecord = serde_json::from_str(r#"{"theta": 4.0, "x": 2.0}"#).unwrap();
        assert_abs_diff_eq!(parsed.theta(), 4.0 - PI, epsilon = 1e-15);
        assert_eq!(parsed.x(), -2.0);
    }

    #[test]
    fn sampling_is_seeded() {
        let rho = DensityOperator::fock(1, 4).unwrap();
        let a = sample_quadratures(&rho, 200, &PhaseSchedule::default(), 7).unwrap();
        let b = sample_quadratures(&rho, 200, &PhaseSchedule::default(), 7).unwrap();
        let c = sample_quadratures(&rho, 200, &PhaseSchedule::default(), 8).unwrap();
        assert_eq!(a, b);
        assert_ne!(a, c);
        assert!(sample_quadratures(&rho, 0, &PhaseSchedule::default(), 7).is_err());
        assert!(sample_quadratures(&rho, 10, &PhaseSchedule::Explicit(vec![]), 7).is_err());
    }

    #[test]
    fn vacuum_sample_variance() {
        let rho = DensityOperator::fock(0, 4).unwrap();
        let n = 100_000;
        let recs = sample_quadratures(&rho, n, &PhaseSchedule::default(), 11).unwrap();
        let mean = recs.iter().map(|r| r.x()).sum::<f64>() / n as f64;
        let var = recs.iter().map(|r| (r.x() - mean).powi(2)).sum::<f64>() / (n - 1) as f64;
        // Sample variance of a Gaussian has standard error σ²√(2/(n−1)).
        let sigma = 0.5 * (2.0 / (n - 1) as f64).sqrt();
        assert!((var - 0.5).abs() < 3.0 * sigma, "variance {var}");
    }

    #[test]
    fn empty_records_rejected() {
        assert!(matches!(mle_reconstruct(&[], &TomoSettings::default()), Err(Error::EmptyRecords)));
        let bad = TomoSettings {
            max_iters: 0,
            ..TomoSettings::default()
        };
        assert!(mle_reconstruct(&[QuadratureRecord::new(0.0, 0.0)], &bad).is_err());
    }

    #[test]
    fn vacuum_reconstruction() {
        let rho = DensityOperator::fock(0, 4).unwrap();
        let recs = sample_quadratures(&rho, 10_000, &PhaseSchedule::UniformScan { phases: 12 }, 3).unwrap();
        let out = mle_reconstruct(&recs, &TomoSettings::default()).unwrap();
        out.rho.validate().unwrap();
        assert!(out.rho.element(0, 0).re >= 0.99, "rho00 = {}", out.rho.element(0, 0).re);
        let hist = &out.diagnostics.log_likelihood_history;
        for w in hist.windows(2) {
            assert!(w[1] >= w[0] - 1e-10);
        }
    }

    #[test]
    fn phase_binning_still_fits() {
        let psi = FockVector::new(vec![C64::new(0.8, 0.0), C64::new(0.0, 0.6)]).unwrap();
        let recs = sample_quadratures(&psi.to_density(), 5000, &PhaseSchedule::UniformScan { phases: 24 }, 5).unwrap();
        let settings = TomoSettings {
            dim: 4,
            max_iters: 500,
            phase_bins: Some(6),
            ..TomoSettings::default()
        };
        let out = mle_reconstruct(&recs, &settings).unwrap();
        let f = fidelity(&out.rho, &psi.resized(4).unwrap()).unwrap();
        assert!(f > 0.9, "fidelity {f}");
    }

    #[test]
    fn metrics_examples() {
        let m = metrics(&DensityOperator::fock(3, 6).unwrap());
        assert_eq!(m.populations, vec![0.0, 0.0, 0.0, 1.0, 0.0, 0.0]);
        assert_abs_diff_eq!(m.purity, 1.0, epsilon = 1e-15);
        let mixed = metrics(&DensityOperator::maximally_mixed(4).unwrap());
        assert_abs_diff_eq!(mixed.purity, 0.25, epsilon = 1e-15);
        let lossy = metrics(&loss_channel(&DensityOperator::fock(3, 6).unwrap(), 0.78).unwrap());
        let eta: f64 = 0.78;
        let binom = [1.0, 3.0, 3.0, 1.0];
        for k in 0..4 {
            let expected = binom[k] * eta.powi(k as i32) * (1.0 - eta).powi(3 - k as i32);
            assert_abs_diff_eq!(lossy.populations[k], expected, epsilon = 1e-14);
        }
        assert_abs_diff_eq!(lossy.mean_photon_number, 3.0 * eta, epsilon = 1e-13);
    }
}
