//! Heralded state preparation from a two-mode squeezed vacuum.
//!
//! The idler is split into three arms by a `T = 1/3` then `T = 1/2`
//! beamsplitter cascade, every arm is displaced by `D(βₖ)`, and the signal
//! is conditioned on all three on/off detectors clicking. The detector
//! POVMs are diagonal in the number basis, so conditioning reduces to a
//! weighted sum over idler occupation numbers.

use std::f64::consts::SQRT_2;
use std::fmt;

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::fock::{
    beamsplitter_apply, displacement_operator, loss_channel, DensityOperator, FockVector, MultiModeState, Operator,
};
use crate::synth::DisplacementRecipe;
use crate::{Error, Result, C64};

pub const DEFAULT_DIM: usize = 6;
pub const MIN_DIM: usize = 4;

/// Population of the two highest retained levels of any mode above which
/// the truncation is flagged.
pub const TRUNCATION_POPULATION_LIMIT: f64 = 1e-4;

/// Signal mode index in the network state; idler arms follow as 1, 2, 3.
pub const SIGNAL_MODE: usize = 0;

fn default_dim() -> usize {
    DEFAULT_DIM
}

fn unit() -> f64 {
    1.0
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct HeraldConfig {
    pub q: f64,
    #[serde(with = "crate::io::complex_triple")]
    pub betas: [C64; 3],
    #[serde(default = "default_dim")]
    pub signal_dim: usize,
    #[serde(default = "default_dim")]
    pub idler_dim: usize,
    /// Transmission of the signal path up to and including homodyne detection.
    #[serde(default = "unit")]
    pub eta_signal: f64,
    #[serde(default = "unit")]
    pub eta_detector: f64,
    #[serde(default)]
    pub dark_prob: f64,
}

impl HeraldConfig {
    /// Lossless, noiseless detectors at the default truncation.
    pub fn ideal(q: f64, betas: [C64; 3]) -> Self {
        Self {
            q,
            betas,
            signal_dim: DEFAULT_DIM,
            idler_dim: DEFAULT_DIM,
            eta_signal: 1.0,
            eta_detector: 1.0,
            dark_prob: 0.0,
        }
    }

    pub fn from_recipe(recipe: &DisplacementRecipe) -> Self {
        Self::ideal(recipe.q, recipe.betas)
    }

    pub fn validate(&self) -> Result<()> {
        if !(0.0..1.0).contains(&self.q) {
            return Err(Error::invalid(format!("q must lie in [0, 1), got {}", self.q)));
        }
        for (name, v) in [("eta_signal", self.eta_signal), ("eta_detector", self.eta_detector)] {
            if !(0.0..=1.0).contains(&v) {
                return Err(Error::invalid(format!("{name} must lie in [0, 1], got {v}")));
            }
        }
        if !(0.0..1.0).contains(&self.dark_prob) {
            return Err(Error::invalid(format!("dark_prob must lie in [0, 1), got {}", self.dark_prob)));
        }
        if self.signal_dim < MIN_DIM || self.idler_dim < MIN_DIM {
            return Err(Error::invalid(format!("truncations must be at least {MIN_DIM}")));
        }
        if self.betas.iter().any(|b| !b.re.is_finite() || !b.im.is_finite()) {
            return Err(Error::invalid("displacements must be finite"));
        }
        Ok(())
    }
}

/// Click/no-click POVM of one on/off detector.
#[derive(Clone, Debug, PartialEq)]
pub struct DetectorPOVM {
    pub pi_click: Operator,
    pub pi_noclick: Operator,
}

impl DetectorPOVM {
    /// `⟨n|Π_click|n⟩`.
    pub fn click_probability(&self, n: usize) -> f64 {
        self.pi_click.element(n, n).re
    }

    /// `max |(Π_click + Π_noclick − I)_{ij}|`.
    pub fn completeness_defect(&self) -> f64 {
        let d = self.pi_click.dim();
        (self.pi_click.matrix() + self.pi_noclick.matrix() - DMatrix::<C64>::identity(d, d))
            .iter()
            .map(|c| c.norm())
            .fold(0.0, f64::max)
    }
}

/// `Π_noclick = (1 − dark)(1 − η)^n̂`, `Π_click = I − Π_noclick`.
pub fn detector_povm(eta_detector: f64, dark_prob: f64, dim: usize) -> Result<DetectorPOVM> {
    if !(0.0..=1.0).contains(&eta_detector) {
        return Err(Error::invalid(format!("detector efficiency must lie in [0, 1], got {eta_detector}")));
    }
    if !(0.0..1.0).contains(&dark_prob) {
        return Err(Error::invalid(format!("dark probability must lie in [0, 1), got {dark_prob}")));
    }
    crate::fock::FockVector::zeros(dim)?;
    let noclick: Vec<f64> = (0..dim)
        .map(|n| (1.0 - dark_prob) * (1.0 - eta_detector).powi(n as i32))
        .collect();
    let click: Vec<f64> = noclick.iter().map(|p| 1.0 - p).collect();
    Ok(DetectorPOVM {
        pi_click: Operator::diagonal(&click),
        pi_noclick: Operator::diagonal(&noclick),
    })
}

/// `√(1−q²) Σₙ qⁿ |n⟩|n⟩` with both modes truncated at `dim`.
pub fn two_mode_squeezed(q: f64, dim: usize) -> Result<MultiModeState> {
    two_mode_squeezed_with_dims(q, dim, dim)
}

pub fn two_mode_squeezed_with_dims(q: f64, signal_dim: usize, idler_dim: usize) -> Result<MultiModeState> {
    if !(0.0..1.0).contains(&q) {
        return Err(Error::invalid(format!("q must lie in [0, 1), got {q}")));
    }
    if signal_dim == 0 || idler_dim == 0 {
        return Err(Error::invalid("dimension must be positive"));
    }
    let mut amps = vec![C64::default(); signal_dim * idler_dim];
    let norm = (1.0 - q * q).sqrt();
    for n in 0..signal_dim.min(idler_dim) {
        amps[n * idler_dim + n] = C64::new(norm * q.powi(n as i32), 0.0);
    }
    MultiModeState::new(vec![signal_dim, idler_dim], amps)
}

/// Splits the idler (mode 1) of a signal–idler state into three arms and
/// displaces arm `k` by `betas[k]`. Output modes: signal, arm 1, arm 2, arm 3.
pub fn build_idler_network(state: &MultiModeState, betas: &[C64; 3]) -> Result<MultiModeState> {
    if state.num_modes() != 2 {
        return Err(Error::DimensionMismatch {
            expected: 2,
            found: state.num_modes(),
        });
    }
    let di = state.mode_dims()[1];
    let vacuum = FockVector::basis(0, di)?;
    let mut s = state.with_mode(&vacuum).with_mode(&vacuum);
    s = beamsplitter_apply(&s, 1, 2, 1.0 / 3.0)?;
    s = beamsplitter_apply(&s, 2, 3, 0.5)?;
    for (k, beta) in betas.iter().enumerate() {
        if *beta != C64::default() {
            s = s.apply_local(&displacement_operator(*beta, di)?, k + 1)?;
        }
    }
    Ok(s)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum TruncationWarning {
    /// Population in the two highest levels of a mode.
    TopLevels { mode: usize, population: f64 },
    /// Norm lost by the truncated network.
    NormDeficit { deficit: f64 },
}

impl fmt::Display for TruncationWarning {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            TruncationWarning::TopLevels { mode, population } => write!(
                f,
                "mode {mode} holds {population:.2e} in its top two levels; increase the truncation"
            ),
            TruncationWarning::NormDeficit { deficit } => {
                write!(f, "network state lost {deficit:.2e} of its norm to truncation")
            }
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct HeraldOutcome {
    /// Normalized signal state after the signal-path loss.
    pub rho: DensityOperator,
    /// Triple-coincidence probability per trial.
    pub probability: f64,
    pub warnings: Vec<TruncationWarning>,
}

impl HeraldOutcome {
    pub fn is_trustworthy(&self) -> bool {
        self.warnings.is_empty()
    }
}

/// Exact conditional signal state for a triple click.
pub fn herald(config: &HeraldConfig) -> Result<HeraldOutcome> {
    config.validate()?;
    let tmsv = two_mode_squeezed_with_dims(config.q, config.signal_dim, config.idler_dim)?;
    let network = build_idler_network(&tmsv, &config.betas)?;

    let mut warnings = Vec::new();
    for mode in 0..network.num_modes() {
        let pops = network.mode_populations(mode)?;
        let top: f64 = pops.iter().rev().take(2).sum();
        if top > TRUNCATION_POPULATION_LIMIT {
            warnings.push(TruncationWarning::TopLevels { mode, population: top });
        }
    }
    let deficit = 1.0 - network.norm_sqr();
    if deficit > TRUNCATION_POPULATION_LIMIT {
        warnings.push(TruncationWarning::NormDeficit { deficit });
    }

    let povm = detector_povm(config.eta_detector, config.dark_prob, config.idler_dim)?;
    let ds = config.signal_dim;
    let di = config.idler_dim;
    let idler_size = di * di * di;
    let weights: Vec<f64> = (0..idler_size)
        .map(|j| {
            let (n1, n2, n3) = (j / (di * di), (j / di) % di, j % di);
            (povm.click_probability(n1) * povm.click_probability(n2) * povm.click_probability(n3)).sqrt()
        })
        .collect();
    let amps = network.amps();
    let m = DMatrix::from_fn(ds, idler_size, |s, j| amps[s * idler_size + j] * weights[j]);
    let conditioned = DensityOperator::from_matrix(&m * m.adjoint())?;

    let probability = conditioned.trace();
    if !(probability > 0.0) {
        return Err(Error::NoHeraldEvent);
    }
    let rho = conditioned.normalized()?;
    let rho = loss_channel(&rho, config.eta_signal)?.hermitized();
    Ok(HeraldOutcome {
        rho,
        probability,
        warnings,
    })
}

/// Unnormalized lowest-order heralded amplitudes
/// `(β₁β₂β₃, (q/√3)e₂, (√2/3)q²e₁, (√2/3)q³)`.
pub fn perturbative_output(q: f64, betas: &[C64; 3]) -> FockVector {
    let (e1, e2, e3) = crate::synth::elementary_symmetric(betas);
    let c = SQRT_2 / 3.0;
    FockVector::new(vec![
        e3,
        e2 * (q / 3f64.sqrt()),
        e1 * (c * q * q),
        C64::new(c * q * q * q, 0.0),
    ])
    .expect("four amplitudes")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fock::{fidelity, partial_trace};
    use approx::assert_abs_diff_eq;
    use std::f64::consts::{FRAC_PI_6, PI};

    #[test]
    fn tmsv_examples() {
        let vac = two_mode_squeezed(0.0, 4).unwrap();
        assert_eq!(vac.amp(&[0, 0]), C64::new(1.0, 0.0));
        assert_abs_diff_eq!(vac.norm_sqr(), 1.0, epsilon = 1e-15);

        let s = two_mode_squeezed(0.2, 6).unwrap();
        assert_abs_diff_eq!((s.amp(&[2, 2]) / s.amp(&[0, 0])).re, 0.04, epsilon = 1e-15);
        let geometric: f64 = (0..6).map(|n| 0.04f64.powi(n)).sum::<f64>() * (1.0 - 0.04);
        assert_abs_diff_eq!(s.norm_sqr(), geometric, epsilon = 1e-15);
        assert_abs_diff_eq!(1.0 - s.norm_sqr(), 0.2f64.powi(12), epsilon = 1e-15);
        assert!(two_mode_squeezed(1.0, 4).is_err());
    }

    #[test]
    fn tmsv_signal_is_thermal() {
        let q = 0.2;
        let rho = partial_trace(&two_mode_squeezed(q, 6).unwrap(), &[0]).unwrap();
        for n in 0..6 {
            assert_abs_diff_eq!(rho.element(n, n).re, (1.0 - q * q) * q.powi(2 * n as i32), epsilon = 1e-15);
            for m in 0..6 {
                if m != n {
                    assert_eq!(rho.element(n, m), C64::default());
                }
            }
        }
    }

    #[test]
    fn single_photon_spreads_evenly() {
        let input = MultiModeState::product(&[FockVector::basis(0, 4).unwrap(), FockVector::basis(1, 4).unwrap()])
            .unwrap();
        let out = build_idler_network(&input, &[C64::default(); 3]).unwrap();
        for arm in 1..=3 {
            let pops = out.mode_populations(arm).unwrap();
            assert_abs_diff_eq!(pops[1], 1.0 / 3.0, epsilon = 1e-14);
        }
        assert_abs_diff_eq!(out.mean_photon_number(), input.mean_photon_number(), epsilon = 1e-14);
    }

    #[test]
    fn splitting_conserves_photon_number() {
        let input = two_mode_squeezed(0.3, 6).unwrap();
        let out = build_idler_network(&input, &[C64::default(); 3]).unwrap();
        assert_abs_diff_eq!(out.mean_photon_number(), input.mean_photon_number(), epsilon = 1e-13);
    }

    #[test]
    fn displaced_vacuum_arm_is_coherent() {
        let beta = C64::new(0.3, -0.2);
        let input = MultiModeState::vacuum(vec![4, 8]).unwrap();
        let out = build_idler_network(&input, &[beta, C64::default(), C64::default()]).unwrap();
        let arm = partial_trace(&out, &[1]).unwrap();
        let coh = crate::fock::coherent_state(beta, 8).unwrap();
        assert_abs_diff_eq!(arm.expectation(&coh).unwrap(), 1.0, epsilon = 1e-9);
    }

    #[test]
    fn povm_examples() {
        let ideal = detector_povm(1.0, 0.0, 5).unwrap();
        assert_eq!(ideal.click_probability(0), 0.0);
        for n in 1..5 {
            assert_eq!(ideal.click_probability(n), 1.0);
        }
        assert_abs_diff_eq!(detector_povm(0.5, 0.0, 4).unwrap().click_probability(1), 0.5, epsilon = 1e-15);
        assert_abs_diff_eq!(detector_povm(1.0, 0.01, 4).unwrap().click_probability(0), 0.01, epsilon = 1e-15);
        for (eta, dark) in [(0.0, 0.0), (0.3, 0.2), (0.9, 0.05), (1.0, 0.999)] {
            assert!(detector_povm(eta, dark, 7).unwrap().completeness_defect() <= 1e-12);
        }
        assert!(detector_povm(1.1, 0.0, 4).is_err());
        assert!(detector_povm(0.5, 1.0, 4).is_err());
    }

    #[test]
    fn perturbative_examples() {
        let q = 0.1;
        let v = perturbative_output(q, &[C64::default(); 3]);
        assert_eq!(v.amp(0), C64::default());
        assert_abs_diff_eq!(v.amp(3).re, SQRT_2 / 3.0 * q.powi(3), epsilon = 1e-18);

        let cat = perturbative_output(q, &[C64::new(SQRT_2 * q, 0.0), C64::new(-SQRT_2 * q, 0.0), C64::default()]);
        assert_abs_diff_eq!(cat.amp(1).re, -2.0 / 3f64.sqrt() * q.powi(3), epsilon = 1e-18);
        assert!(cat.amp(0).norm() < 1e-18 && cat.amp(2).norm() < 1e-18);

        let s = 0.086;
        let betas = [FRAC_PI_6, 5.0 * FRAC_PI_6, 1.5 * PI].map(|phi| C64::from_polar(s, phi));
        let qt = perturbative_output(q, &betas);
        assert!(qt.amp(1).norm() < 1e-16 && qt.amp(2).norm() < 1e-16);
        assert!((qt.amp(0) - C64::new(0.0, s * s * s)).norm() < 1e-16);
    }

    #[test]
    fn fock3_herald_is_three_photons() {
        let out = herald(&HeraldConfig::ideal(0.05, [C64::default(); 3])).unwrap();
        out.rho.validate().unwrap();
        let three = FockVector::basis(3, DEFAULT_DIM).unwrap();
        assert!(fidelity(&out.rho, &three).unwrap() >= 0.99);
        assert!(out.is_trustworthy(), "{:?}", out.warnings);
    }

    #[test]
    fn herald_rejects_bad_config() {
        let mut c = HeraldConfig::ideal(0.05, [C64::default(); 3]);
        c.signal_dim = 3;
        assert!(herald(&c).is_err());
        let mut c = HeraldConfig::ideal(0.05, [C64::default(); 3]);
        c.eta_signal = 1.5;
        assert!(herald(&c).is_err());
        assert!(matches!(
            herald(&HeraldConfig::ideal(0.0, [C64::default(); 3])),
            Err(Error::NoHeraldEvent)
        ));
    }

    #[test]
    fn large_displacement_flags_truncation() {
        let c = HeraldConfig::ideal(0.05, [C64::new(1.5, 0.0), C64::default(), C64::default()]);
        let out = herald(&c).unwrap();
        assert!(!out.is_trustworthy());
    }

    #[test]
    fn permutation_symmetry() {
        let betas = [C64::new(0.05, 0.01), C64::new(-0.02, 0.04), C64::new(0.0, -0.03)];
        let mut c = HeraldConfig::ideal(0.08, betas);
        c.eta_detector = 0.7;
        c.dark_prob = 0.01;
        let base = herald(&c).unwrap();
        c.betas = [betas[2], betas[0], betas[1]];
        let perm = herald(&c).unwrap();
        assert_abs_diff_eq!(base.probability, perm.probability, epsilon = 1e-15);
        let diff = (base.rho.matrix() - perm.rho.matrix()).iter().map(|z| z.norm()).fold(0.0, f64::max);
        assert!(diff < 1e-12);
    }

    #[test]
    fn probability_monotone_in_detector_efficiency() {
        let mut last = f64::INFINITY;
        for eta in [1.0, 0.9, 0.7, 0.5, 0.3] {
            let mut c = HeraldConfig::ideal(0.1, [C64::new(0.05, 0.0), C64::default(), C64::new(0.0, 0.05)]);
            c.eta_detector = eta;
            let p = herald(&c).unwrap().probability;
            assert!(p <= last);
            last = p;
        }
    }

    #[test]
    fn config_json_round_trip() {
        let c = HeraldConfig::ideal(0.1, [C64::new(0.1, -0.2), C64::default(), C64::new(0.0, 1.0)]);
        let text = serde_json::to_string(&c).unwrap();
        assert!(text.contains("\"betas\":[[0.1,-0.2],[0.0,0.0],[0.0,1.0]]"));
        let back: HeraldConfig = serde_json::from_str(&text).unwrap();
        assert_eq!(back, c);
    }
}
