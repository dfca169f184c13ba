//! Truncated single- and multi-mode Fock-space numerics.
//!
//! Everything is dense. Single-mode operators that come from exponentiating
//! a generator are built on a padded space of `dim + pad` levels and then
//! cropped, so the retained block is not polluted by the hard cutoff.

mod channel;
mod density;
mod fidelity;
mod multimode;
mod operator;

pub use channel::{loss_channel, loss_kraus_operators};
pub use density::DensityOperator;
pub use fidelity::{fidelity, max_fidelity_over_rotation, uhlmann_fidelity, RotatedFidelity};
pub use multimode::{beamsplitter_apply, partial_trace, MultiModeDensity, MultiModeState};
pub use operator::{
    displacement_operator, displacement_operator_padded, phase_rotation, squeeze_operator,
    squeeze_operator_padded, Operator, DEFAULT_PAD,
};

use nalgebra::DVector;

use crate::{Error, Result, C64};

/// Tolerance used when a caller promises a normalized vector.
pub(crate) const NORM_TOL: f64 = 1e-9;

/// Complex amplitudes over `|0⟩ .. |dim−1⟩` of one mode.
#[derive(Clone, Debug, PartialEq)]
pub struct FockVector {
    amps: DVector<C64>,
}

impl FockVector {
    pub fn new(amps: Vec<C64>) -> Result<Self> {
        if amps.is_empty() {
            return Err(Error::invalid("Fock vector needs at least one amplitude"));
        }
        Ok(Self {
            amps: DVector::from_vec(amps),
        })
    }

    pub(crate) fn from_dvector(amps: DVector<C64>) -> Self {
        debug_assert!(!amps.is_empty());
        Self { amps }
    }

    pub fn zeros(dim: usize) -> Result<Self> {
        check_dim(dim)?;
        Ok(Self {
            amps: DVector::zeros(dim),
        })
    }

    /// Number state `|n⟩` in a `dim`-level truncation.
    pub fn basis(n: usize, dim: usize) -> Result<Self> {
        if n >= dim {
            return Err(Error::invalid(format!("|{n}⟩ does not fit in dim {dim}")));
        }
        let mut v = Self::zeros(dim)?;
        v.amps[n] = C64::new(1.0, 0.0);
        Ok(v)
    }

    pub fn dim(&self) -> usize {
        self.amps.len()
    }

    pub fn amps(&self) -> &DVector<C64> {
        &self.amps
    }

    pub fn amp(&self, n: usize) -> C64 {
        self.amps[n]
    }

    pub fn to_vec(&self) -> Vec<C64> {
        self.amps.iter().copied().collect()
    }

    pub fn norm_sqr(&self) -> f64 {
        self.amps.iter().map(|c| c.norm_sqr()).sum()
    }

    pub fn normalize(&mut self) -> Result<()> {
        let n = self.norm_sqr().sqrt();
        if n == 0.0 || !n.is_finite() {
            return Err(Error::ZeroNorm);
        }
        self.amps.unscale_mut(n);
        Ok(())
    }

    pub fn normalized(&self) -> Result<Self> {
        let mut out = self.clone();
        out.normalize()?;
        Ok(out)
    }

    /// `⟨self|other⟩`.
    pub fn inner(&self, other: &FockVector) -> Result<C64> {
        check_same_dim(self.dim(), other.dim())?;
        Ok(self.amps.dotc(&other.amps))
    }

    /// Zero-pads or crops to `dim` levels.
    pub fn resized(&self, dim: usize) -> Result<Self> {
        check_dim(dim)?;
        let mut amps = DVector::zeros(dim);
        for n in 0..dim.min(self.dim()) {
            amps[n] = self.amps[n];
        }
        Ok(Self { amps })
    }

    /// `|ψ⟩⟨ψ|`.
    pub fn to_density(&self) -> DensityOperator {
        DensityOperator::from_pure(self)
    }

    pub(crate) fn is_normalized(&self) -> bool {
        (self.norm_sqr() - 1.0).abs() <= NORM_TOL
    }
}

/// Truncated coherent state `|α⟩`; the tail beyond `dim` is dropped and the
/// result is not renormalized, so `1 − norm²` measures the truncation loss.
pub fn coherent_state(alpha: C64, dim: usize) -> Result<FockVector> {
    check_dim(dim)?;
    let mut amps = Vec::with_capacity(dim);
    let mut c = C64::new((-alpha.norm_sqr() / 2.0).exp(), 0.0);
    amps.push(c);
    for n in 1..dim {
        c = c * alpha / (n as f64).sqrt();
        amps.push(c);
    }
    FockVector::new(amps)
}

pub(crate) fn check_dim(dim: usize) -> Result<()> {
    if dim == 0 {
        Err(Error::invalid("dimension must be positive"))
    } else {
        Ok(())
    }
}

pub(crate) fn check_same_dim(expected: usize, found: usize) -> Result<()> {
    if expected == found {
        Ok(())
    } else {
        Err(Error::DimensionMismatch { expected, found })
    }
}

/// `n choose k` in floating point; exact for the sizes used here.
pub(crate) fn binomial(n: usize, k: usize) -> f64 {
    if k > n {
        return 0.0;
    }
    let k = k.min(n - k);
    (0..k).fold(1.0, |acc, i| acc * (n - i) as f64 / (i + 1) as f64)
}
