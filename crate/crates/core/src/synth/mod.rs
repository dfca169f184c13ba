//! Target superpositions of `|0⟩..|3⟩` and the displacement amplitudes that
//! herald them.
//!
//! To lowest order the heralded amplitudes are fixed by the elementary
//! symmetric polynomials of the three displacements,
//! `(e₃, (q/√3)e₂, (√2/3)q²e₁, (√2/3)q³)`. Inverting that map means reading
//! `e₁, e₂, e₃` off the target and solving `x³ − e₁x² + e₂x − e₃ = 0`.

pub mod roots;

use std::cmp::Ordering;
use std::f64::consts::{FRAC_PI_6, PI, SQRT_2};
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::fock::{coherent_state, FockVector};
use crate::herald::perturbative_output;
use crate::{Error, Result, C64};

/// Smallest `|c₃|` the solver accepts.
pub const MIN_THREE_PHOTON_AMPLITUDE: f64 = 1e-9;

/// Displacement amplitude of the zero-three preset in units of `q`.
pub const ZERO_THREE_DISPLACEMENT_RATIO: f64 = 0.86;

/// Normalized `c₀|0⟩ + c₁|1⟩ + c₂|2⟩ + c₃|3⟩` with the global phase fixed so
/// that `c₃` is real and non-negative.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct TargetSuperposition {
    coeffs: [C64; 4],
}

impl TargetSuperposition {
    pub fn new(coeffs: [C64; 4]) -> Result<Self> {
        let norm = coeffs.iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt();
        if norm == 0.0 || !norm.is_finite() {
            return Err(Error::ZeroNorm);
        }
        let phase = if coeffs[3].norm() > 0.0 {
            coeffs[3].conj() / coeffs[3].norm()
        } else {
            C64::new(1.0, 0.0)
        };
        let mut out = coeffs.map(|c| c * phase / norm);
        if coeffs[3].norm() > 0.0 {
            out[3] = C64::new(out[3].norm(), 0.0);
        }
        Ok(Self { coeffs: out })
    }

    /// Takes the first four levels; anything above `|3⟩` must vanish.
    pub fn from_fock_vector(v: &FockVector) -> Result<Self> {
        if v.dim() < 4 {
            return Err(Error::invalid("target needs amplitudes for |0⟩..|3⟩"));
        }
        let tail: f64 = (4..v.dim()).map(|n| v.amp(n).norm_sqr()).sum();
        if tail > 1e-24 {
            return Err(Error::invalid("target has support above |3⟩"));
        }
        Self::new([v.amp(0), v.amp(1), v.amp(2), v.amp(3)])
    }

    pub fn coeffs(&self) -> [C64; 4] {
        self.coeffs
    }

    pub fn to_fock_vector(&self, dim: usize) -> Result<FockVector> {
        FockVector::new(self.coeffs.to_vec())?.resized(dim)
    }

    /// Largest coefficient-wise distance.
    pub fn distance(&self, other: &TargetSuperposition) -> f64 {
        self.coeffs
            .iter()
            .zip(other.coeffs.iter())
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max)
    }
}

/// Three displacement amplitudes (canonically ordered) and the pump
/// parameter they were computed for.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct DisplacementRecipe {
    #[serde(with = "crate::io::complex_triple")]
    pub betas: [C64; 3],
    pub q: f64,
}

/// Orders by descending real part, then descending imaginary part. Real
/// parts closer than `1e-12` (relative to the largest magnitude) count as
/// equal so conjugate pairs order deterministically.
pub fn canonical_order(mut betas: [C64; 3]) -> [C64; 3] {
    let scale = betas.iter().map(|b| b.norm()).fold(1.0, f64::max);
    let tie = 1e-12 * scale;
    betas.sort_by(|a, b| {
        if (a.re - b.re).abs() > tie {
            b.re.partial_cmp(&a.re).unwrap_or(Ordering::Equal)
        } else {
            b.im.partial_cmp(&a.im).unwrap_or(Ordering::Equal)
        }
    });
    betas
}

/// Elementary symmetric polynomials `(e₁, e₂, e₃)`.
pub fn elementary_symmetric(betas: &[C64; 3]) -> (C64, C64, C64) {
    let [b1, b2, b3] = *betas;
    (b1 + b2 + b3, b1 * b2 + b2 * b3 + b3 * b1, b1 * b2 * b3)
}

/// Displacements whose lowest-order heralded state is `target` at pump
/// parameter `q`.
pub fn solve_displacements(target: &TargetSuperposition, q: f64) -> Result<DisplacementRecipe> {
    if !(q > 0.0 && q < 1.0) {
        return Err(Error::invalid(format!("pump parameter must lie in (0, 1), got {q}")));
    }
    let [c0, c1, c2, c3] = target.coeffs;
    if c3.norm() < MIN_THREE_PHOTON_AMPLITUDE {
        return Err(Error::DegenerateTarget { c3_abs: c3.norm() });
    }
    let e1 = c2 / c3 * q;
    let e2 = c1 / c3 * (SQRT_2 / 3f64.sqrt() * q * q);
    let e3 = c0 / c3 * (SQRT_2 / 3.0 * q * q * q);
    let one = C64::new(1.0, 0.0);
    let roots = roots::polynomial_roots(&[one, -e1, e2, -e3])?;
    let betas = [roots[0], roots[1], roots[2]];
    Ok(DisplacementRecipe {
        betas: canonical_order(betas),
        q,
    })
}

/// Normalized, phase-canonical lowest-order heralded state for `betas`.
pub fn forward_map(betas: &[C64; 3], q: f64) -> Result<TargetSuperposition> {
    let raw = perturbative_output(q, betas);
    if raw.norm_sqr() == 0.0 {
        return Err(Error::ZeroState);
    }
    TargetSuperposition::new([raw.amp(0), raw.amp(1), raw.amp(2), raw.amp(3)])
}

/// Residual `|P(β)|` of each recipe amplitude against the cubic built from
/// the target, alongside the scale `max(1, |e₁|, |e₂|, |e₃|)`.
pub fn root_residuals(target: &TargetSuperposition, recipe: &DisplacementRecipe) -> ([f64; 3], f64) {
    let [c0, c1, c2, c3] = target.coeffs;
    let q = recipe.q;
    let e1 = c2 / c3 * q;
    let e2 = c1 / c3 * (SQRT_2 / 3f64.sqrt() * q * q);
    let e3 = c0 / c3 * (SQRT_2 / 3.0 * q * q * q);
    let poly = [C64::new(1.0, 0.0), -e1, e2, -e3];
    let scale = [1.0, e1.norm(), e2.norm(), e3.norm()].into_iter().fold(0.0, f64::max);
    (recipe.betas.map(|b| roots::evaluate(&poly, b).0.norm()), scale)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Parity {
    Even,
    Odd,
}

/// Normalized truncated cat state `|α⟩ + |−α⟩` (even) or `|α⟩ − |−α⟩` (odd).
pub fn target_cat(alpha: C64, parity: Parity, dim: usize) -> Result<FockVector> {
    let coh = coherent_state(alpha, dim)?;
    let keep = match parity {
        Parity::Even => 0,
        Parity::Odd => 1,
    };
    let amps = (0..dim)
        .map(|n| if n % 2 == keep { coh.amp(n) } else { C64::default() })
        .collect();
    FockVector::new(amps)?.normalized()
}

/// Normalized member `index ∈ {0, 1, 2}` of the rotation-invariant basis
/// spanned by `|α⟩, |αe^{2πi/3}⟩, |αe^{−2πi/3}⟩`: the coherent-state
/// ladder restricted to `n ≡ index (mod 3)`.
pub fn target_qutrit_basis(alpha: C64, index: usize, dim: usize) -> Result<FockVector> {
    if index > 2 {
        return Err(Error::invalid(format!("qutrit index must be 0, 1 or 2, got {index}")));
    }
    if dim < 6 {
        return Err(Error::invalid("qutrit targets need dim ≥ 6"));
    }
    let coh = coherent_state(alpha, dim)?;
    let amps = (0..dim)
        .map(|n| if n % 3 == index { coh.amp(n) } else { C64::default() })
        .collect();
    FockVector::new(amps)?.normalized()
}

/// The three demonstration states.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Preset {
    /// `|3⟩`, no displacement.
    Fock3,
    /// `|1⟩` and `|3⟩` superposition approximating an odd cat.
    CatOdd,
    /// `|0⟩` and `|3⟩` superposition with three-fold rotation symmetry.
    ZeroThree,
}

impl Preset {
    pub const ALL: [Preset; 3] = [Preset::Fock3, Preset::CatOdd, Preset::ZeroThree];

    pub fn name(self) -> &'static str {
        match self {
            Preset::Fock3 => "fock3",
            Preset::CatOdd => "cat-odd",
            Preset::ZeroThree => "zero-three",
        }
    }

    /// Displacements at pump parameter `q`, canonically ordered.
    pub fn recipe(self, q: f64) -> DisplacementRecipe {
        let betas = match self {
            Preset::Fock3 => [C64::default(); 3],
            Preset::CatOdd => [C64::new(SQRT_2 * q, 0.0), C64::new(-SQRT_2 * q, 0.0), C64::default()],
            Preset::ZeroThree => {
                let s = ZERO_THREE_DISPLACEMENT_RATIO * q;
                [
                    C64::from_polar(s, FRAC_PI_6),
                    C64::from_polar(s, 5.0 * FRAC_PI_6),
                    C64::from_polar(s, 1.5 * PI),
                ]
            }
        };
        DisplacementRecipe {
            betas: canonical_order(betas),
            q,
        }
    }

    /// Ideal lowest-order output; independent of `q`.
    pub fn target(self) -> TargetSuperposition {
        let z = C64::default();
        let c3 = C64::new(SQRT_2 / 3.0, 0.0);
        let coeffs = match self {
            Preset::Fock3 => [z, z, z, C64::new(1.0, 0.0)],
            Preset::CatOdd => [z, C64::new(-2.0 / 3f64.sqrt(), 0.0), z, c3],
            Preset::ZeroThree => [C64::new(0.0, ZERO_THREE_DISPLACEMENT_RATIO.powi(3)), z, z, c3],
        };
        TargetSuperposition::new(coeffs).expect("preset targets are non-zero")
    }
}

impl fmt::Display for Preset {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Preset {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Preset::ALL
            .into_iter()
            .find(|p| p.name() == s)
            .ok_or_else(|| Error::invalid(format!("unknown preset '{s}' (fock3, cat-odd, zero-three)")))
    }
}
