use nalgebra::{DMatrix, SymmetricEigen};

use super::{check_dim, check_same_dim, FockVector, Operator};
use crate::{Error, Result, C64};

pub const HERMITIAN_TOL: f64 = 1e-12;
pub const TRACE_TOL: f64 = 1e-10;
pub const EIGEN_FLOOR: f64 = -1e-9;

/// Density operator of one mode (or of several modes flattened into one
/// index). Traces need not be one: partial traces and conditioning produce
/// sub-normalized operators that the caller renormalizes.
#[derive(Clone, Debug, PartialEq)]
pub struct DensityOperator {
    matrix: DMatrix<C64>,
}

impl DensityOperator {
    pub fn from_matrix(matrix: DMatrix<C64>) -> Result<Self> {
        if !matrix.is_square() {
            return Err(Error::InvalidDensity("matrix is not square".into()));
        }
        check_dim(matrix.nrows())?;
        Ok(Self { matrix })
    }

    pub fn from_pure(psi: &FockVector) -> Self {
        let v = psi.amps();
        Self {
            matrix: v * v.adjoint(),
        }
    }

    pub fn fock(n: usize, dim: usize) -> Result<Self> {
        Ok(Self::from_pure(&FockVector::basis(n, dim)?))
    }

    pub fn maximally_mixed(dim: usize) -> Result<Self> {
        check_dim(dim)?;
        Ok(Self {
            matrix: DMatrix::identity(dim, dim) / C64::new(dim as f64, 0.0),
        })
    }

    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn matrix(&self) -> &DMatrix<C64> {
        &self.matrix
    }

    pub fn into_matrix(self) -> DMatrix<C64> {
        self.matrix
    }

    pub fn element(&self, row: usize, col: usize) -> C64 {
        self.matrix[(row, col)]
    }

    pub fn trace(&self) -> f64 {
        self.matrix.diagonal().iter().map(|c| c.re).sum()
    }

    pub fn normalized(&self) -> Result<Self> {
        let t = self.trace();
        if !(t > 0.0) || !t.is_finite() {
            return Err(Error::ZeroNorm);
        }
        Ok(Self {
            matrix: &self.matrix / C64::new(t, 0.0),
        })
    }

    /// Photon-number distribution `ρ_nn`.
    pub fn populations(&self) -> Vec<f64> {
        self.matrix.diagonal().iter().map(|c| c.re).collect()
    }

    pub fn purity(&self) -> f64 {
        // Tr ρ² = Σ |ρ_ij|² for Hermitian ρ.
        self.matrix.iter().map(|c| c.norm_sqr()).sum()
    }

    pub fn mean_photon_number(&self) -> f64 {
        self.populations()
            .iter()
            .enumerate()
            .map(|(n, p)| n as f64 * p)
            .sum()
    }

    pub fn hermiticity_defect(&self) -> f64 {
        (&self.matrix - self.matrix.adjoint())
            .iter()
            .map(|c| c.norm())
            .fold(0.0, f64::max)
    }

    pub fn hermitized(&self) -> Self {
        Self {
            matrix: (&self.matrix + self.matrix.adjoint()) * C64::new(0.5, 0.0),
        }
    }

    /// Eigenvalues of the Hermitian part, ascending.
    pub fn eigenvalues(&self) -> Vec<f64> {
        let mut ev: Vec<f64> = SymmetricEigen::new(self.hermitized().matrix)
            .eigenvalues
            .iter()
            .copied()
            .collect();
        ev.sort_by(f64::total_cmp);
        ev
    }

    pub fn min_eigenvalue(&self) -> f64 {
        self.eigenvalues().first().copied().unwrap_or(0.0)
    }

    /// Checks Hermiticity, unit trace and the eigenvalue floor.
    pub fn validate(&self) -> Result<()> {
        let h = self.hermiticity_defect();
        if h > HERMITIAN_TOL {
            return Err(Error::InvalidDensity(format!("not Hermitian (defect {h:.2e})")));
        }
        let t = self.trace();
        if (t - 1.0).abs() > TRACE_TOL {
            return Err(Error::InvalidDensity(format!("trace {t} ≠ 1")));
        }
        let m = self.min_eigenvalue();
        if m < EIGEN_FLOOR {
            return Err(Error::InvalidDensity(format!("negative eigenvalue {m:.3e}")));
        }
        Ok(())
    }

    /// `U ρ U†`.
    pub fn conjugate_by(&self, u: &Operator) -> Result<Self> {
        check_same_dim(self.dim(), u.dim())?;
        Ok(Self {
            matrix: u.matrix() * &self.matrix * u.matrix().adjoint(),
        })
    }

    /// `⟨ψ|ρ|ψ⟩` without normalization checks.
    pub fn expectation(&self, psi: &FockVector) -> Result<f64> {
        check_same_dim(self.dim(), psi.dim())?;
        let v = psi.amps();
        Ok(v.dotc(&(&self.matrix * v)).re)
    }

    /// Zero-pads or crops to `dim` levels.
    pub fn resized(&self, dim: usize) -> Result<Self> {
        check_dim(dim)?;
        let k = dim.min(self.dim());
        let mut m = DMatrix::zeros(dim, dim);
        m.view_mut((0, 0), (k, k))
            .copy_from(&self.matrix.view((0, 0), (k, k)));
        Ok(Self { matrix: m })
    }
}
