use nalgebra::DMatrix;

use super::{check_dim, check_same_dim, FockVector};
use crate::{Result, C64};

/// Extra levels used when building exponentiated operators.
pub const DEFAULT_PAD: usize = 10;

/// Dense single-mode operator on a `dim`-level truncation.
#[derive(Clone, Debug, PartialEq)]
pub struct Operator {
    matrix: DMatrix<C64>,
}

impl Operator {
    pub fn from_matrix(matrix: DMatrix<C64>) -> Result<Self> {
        if !matrix.is_square() {
            return Err(crate::Error::invalid("operator matrix must be square"));
        }
        check_dim(matrix.nrows())?;
        Ok(Self { matrix })
    }

    pub fn identity(dim: usize) -> Self {
        Self {
            matrix: DMatrix::identity(dim, dim),
        }
    }

    /// `a` with `a|n⟩ = √n |n−1⟩`.
    pub fn annihilation(dim: usize) -> Self {
        let mut m = DMatrix::zeros(dim, dim);
        for n in 1..dim {
            m[(n - 1, n)] = C64::new((n as f64).sqrt(), 0.0);
        }
        Self { matrix: m }
    }

    pub fn creation(dim: usize) -> Self {
        Self::annihilation(dim).dagger()
    }

    pub fn number(dim: usize) -> Self {
        Self {
            matrix: DMatrix::from_fn(dim, dim, |i, j| {
                if i == j {
                    C64::new(i as f64, 0.0)
                } else {
                    C64::default()
                }
            }),
        }
    }

    /// Diagonal operator with the given real entries.
    pub fn diagonal(entries: &[f64]) -> Self {
        let d = entries.len();
        Self {
            matrix: DMatrix::from_fn(d, d, |i, j| {
                if i == j {
                    C64::new(entries[i], 0.0)
                } else {
                    C64::default()
                }
            }),
        }
    }

    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn matrix(&self) -> &DMatrix<C64> {
        &self.matrix
    }

    pub fn element(&self, row: usize, col: usize) -> C64 {
        self.matrix[(row, col)]
    }

    pub fn dagger(&self) -> Self {
        Self {
            matrix: self.matrix.adjoint(),
        }
    }

    pub fn compose(&self, rhs: &Operator) -> Result<Self> {
        check_same_dim(self.dim(), rhs.dim())?;
        Ok(Self {
            matrix: &self.matrix * &rhs.matrix,
        })
    }

    pub fn apply(&self, v: &FockVector) -> Result<FockVector> {
        check_same_dim(self.dim(), v.dim())?;
        Ok(FockVector::from_dvector(&self.matrix * v.amps()))
    }

    /// Top-left `dim × dim` block.
    pub fn cropped(&self, dim: usize) -> Result<Self> {
        check_dim(dim)?;
        if dim > self.dim() {
            return Err(crate::Error::invalid(format!(
                "cannot crop a {}-level operator to {dim} levels",
                self.dim()
            )));
        }
        Ok(Self {
            matrix: self.matrix.view((0, 0), (dim, dim)).into_owned(),
        })
    }

    /// `max |(U†U − I)_{ij}|`.
    pub fn unitarity_defect(&self) -> f64 {
        let d = self.dim();
        let g = self.matrix.adjoint() * &self.matrix - DMatrix::<C64>::identity(d, d);
        g.iter().map(|c| c.norm()).fold(0.0, f64::max)
    }

    /// Same as [`Self::unitarity_defect`] but restricted to the leading
    /// `levels × levels` block, where truncation effects are negligible.
    pub fn unitarity_defect_on(&self, levels: usize) -> f64 {
        let d = self.dim();
        let g = self.matrix.adjoint() * &self.matrix - DMatrix::<C64>::identity(d, d);
        let k = levels.min(d);
        g.view((0, 0), (k, k)).iter().map(|c| c.norm()).fold(0.0, f64::max)
    }
}

fn exp_cropped(generator: DMatrix<C64>, dim: usize) -> Operator {
    let full = generator.exp();
    Operator {
        matrix: full.view((0, 0), (dim, dim)).into_owned(),
    }
}

/// `D(β) = exp(βa† − β*a)`, built with [`DEFAULT_PAD`] extra levels.
pub fn displacement_operator(beta: C64, dim: usize) -> Result<Operator> {
    displacement_operator_padded(beta, dim, DEFAULT_PAD)
}

pub fn displacement_operator_padded(beta: C64, dim: usize, pad: usize) -> Result<Operator> {
    check_dim(dim)?;
    let big = dim + pad;
    let a = Operator::annihilation(big).matrix;
    let ad = a.adjoint();
    let generator = ad * beta - a * beta.conj();
    Ok(exp_cropped(generator, dim))
}

/// `S(r, φ) = exp((r/2)(e^{−2iφ}a² − e^{2iφ}a†²))`; `φ = 0` squeezes `x`.
pub fn squeeze_operator(r: f64, phi: f64, dim: usize) -> Result<Operator> {
    squeeze_operator_padded(r, phi, dim, DEFAULT_PAD)
}

pub fn squeeze_operator_padded(r: f64, phi: f64, dim: usize, pad: usize) -> Result<Operator> {
    check_dim(dim)?;
    if !(r >= 0.0) || !r.is_finite() {
        return Err(crate::Error::invalid(format!("squeezing r must be ≥ 0, got {r}")));
    }
    let big = dim + pad;
    let a = Operator::annihilation(big).matrix;
    let a2 = &a * &a;
    let ad2 = a2.adjoint();
    let phase = C64::from_polar(1.0, -2.0 * phi);
    let generator = (a2 * phase - ad2 * phase.conj()) * C64::new(r / 2.0, 0.0);
    Ok(exp_cropped(generator, dim))
}

/// `R(θ) = exp(iθn̂)`, diagonal with entries `e^{inθ}`.
pub fn phase_rotation(theta: f64, dim: usize) -> Result<Operator> {
    check_dim(dim)?;
    Ok(Operator {
        matrix: DMatrix::from_fn(dim, dim, |i, j| {
            if i == j {
                C64::from_polar(1.0, i as f64 * theta)
            } else {
                C64::default()
            }
        }),
    })
}
