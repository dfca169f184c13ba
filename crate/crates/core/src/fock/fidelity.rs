use std::f64::consts::PI;

use nalgebra::{DMatrix, SymmetricEigen};

use super::{check_same_dim, DensityOperator, FockVector};
use crate::{Error, Result, C64};

/// Overlap `F = ⟨ψ|ρ|ψ⟩` of a state with a normalized pure target.
pub fn fidelity(rho: &DensityOperator, psi: &FockVector) -> Result<f64> {
    check_same_dim(rho.dim(), psi.dim())?;
    if !psi.is_normalized() {
        return Err(Error::invalid(format!(
            "target state must be normalized (norm² = {})",
            psi.norm_sqr()
        )));
    }
    rho.expectation(psi)
}

/// Uhlmann fidelity `(Tr √(√ρ σ √ρ))²` between two density operators.
pub fn uhlmann_fidelity(rho: &DensityOperator, sigma: &DensityOperator) -> Result<f64> {
    check_same_dim(rho.dim(), sigma.dim())?;
    let sqrt_rho = psd_sqrt(&rho.hermitized().into_matrix());
    let inner = &sqrt_rho * sigma.matrix() * &sqrt_rho;
    let inner = (&inner + inner.adjoint()) * C64::new(0.5, 0.0);
    let root_trace: f64 = SymmetricEigen::new(inner)
        .eigenvalues
        .iter()
        .map(|&l| l.max(0.0).sqrt())
        .sum();
    Ok(root_trace * root_trace)
}

fn psd_sqrt(m: &DMatrix<C64>) -> DMatrix<C64> {
    let eig = SymmetricEigen::new(m.clone());
    let roots = eig.eigenvalues.map(|l| C64::new(l.max(0.0).sqrt(), 0.0));
    &eig.eigenvectors * DMatrix::from_diagonal(&roots) * eig.eigenvectors.adjoint()
}

/// Best overlap over phase-space rotations of the state.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct RotatedFidelity {
    pub fidelity: f64,
    /// Rotation angle `θ` applied as `R(θ)ρR(θ)†`.
    pub theta: f64,
}

/// `max_θ ⟨ψ|R(θ)ρR(θ)†|ψ⟩`, by a coarse scan followed by golden-section
/// refinement around the best sample.
pub fn max_fidelity_over_rotation(rho: &DensityOperator, psi: &FockVector) -> Result<RotatedFidelity> {
    check_same_dim(rho.dim(), psi.dim())?;
    if !psi.is_normalized() {
        return Err(Error::invalid("target state must be normalized"));
    }
    let d = rho.dim();
    let eval = |theta: f64| -> f64 {
        let mut acc = C64::default();
        for m in 0..d {
            let left = psi.amp(m).conj() * C64::from_polar(1.0, m as f64 * theta);
            if left == C64::default() {
                continue;
            }
            for n in 0..d {
                acc += left * rho.element(m, n) * C64::from_polar(1.0, -(n as f64) * theta) * psi.amp(n);
            }
        }
        acc.re
    };

    const SCAN: usize = 720;
    let step = 2.0 * PI / SCAN as f64;
    let (best_i, _) = (0..SCAN)
        .map(|i| (i, eval(i as f64 * step)))
        .fold((0, f64::NEG_INFINITY), |acc, (i, f)| if f > acc.1 { (i, f) } else { acc });

    let (mut lo, mut hi) = ((best_i as f64 - 1.0) * step, (best_i as f64 + 1.0) * step);
    let golden = (5f64.sqrt() - 1.0) / 2.0;
    let mut x1 = hi - golden * (hi - lo);
    let mut x2 = lo + golden * (hi - lo);
    let (mut f1, mut f2) = (eval(x1), eval(x2));
    while hi - lo > 1e-12 {
        if f1 < f2 {
            lo = x1;
            x1 = x2;
            f1 = f2;
            x2 = lo + golden * (hi - lo);
            f2 = eval(x2);
        } else {
            hi = x2;
            x2 = x1;
            f2 = f1;
            x1 = hi - golden * (hi - lo);
            f1 = eval(x1);
        }
    }
    let theta = (0.5 * (lo + hi)).rem_euclid(2.0 * PI);
    Ok(RotatedFidelity {
        fidelity: eval(theta),
        theta,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fock::{loss_channel, phase_rotation};
    use approx::assert_abs_diff_eq;

    #[test]
    fn pure_overlap_examples() {
        let rho = DensityOperator::fock(3, 5).unwrap();
        let three = FockVector::basis(3, 5).unwrap();
        assert_abs_diff_eq!(fidelity(&rho, &three).unwrap(), 1.0, epsilon = 1e-15);

        let lossy = loss_channel(&rho, 0.78).unwrap();
        assert_abs_diff_eq!(fidelity(&lossy, &three).unwrap(), 0.78f64.powi(3), epsilon = 1e-12);

        let mixed = DensityOperator::maximally_mixed(5).unwrap();
        let psi = FockVector::new(vec![
            C64::new(0.1, 0.2),
            C64::new(0.3, -0.1),
            C64::new(0.5, 0.0),
            C64::new(-0.2, 0.4),
            C64::new(0.0, 0.3),
        ])
        .unwrap()
        .normalized()
        .unwrap();
        assert_abs_diff_eq!(fidelity(&mixed, &psi).unwrap(), 0.2, epsilon = 1e-12);
    }

    #[test]
    fn fidelity_dimension_mismatch() {
        let rho = DensityOperator::fock(1, 4).unwrap();
        let psi = FockVector::basis(1, 5).unwrap();
        assert!(matches!(fidelity(&rho, &psi), Err(Error::DimensionMismatch { .. })));
    }

    #[test]
    fn uhlmann_reduces_to_overlap_for_pure_states() {
        let psi = FockVector::new(vec![C64::new(0.6, 0.0), C64::new(0.0, 0.8), C64::default()]).unwrap();
        let phi = FockVector::new(vec![C64::new(0.8, 0.0), C64::default(), C64::new(0.6, 0.0)]).unwrap();
        let f = uhlmann_fidelity(&psi.to_density(), &phi.to_density()).unwrap();
        assert_abs_diff_eq!(f, psi.inner(&phi).unwrap().norm_sqr(), epsilon = 1e-10);
    }

    #[test]
    fn uhlmann_of_state_with_itself() {
        let rho = loss_channel(&DensityOperator::fock(2, 4).unwrap(), 0.6).unwrap();
        assert_abs_diff_eq!(uhlmann_fidelity(&rho, &rho).unwrap(), 1.0, epsilon = 1e-10);
    }

    #[test]
    fn rotation_search_recovers_phase() {
        let psi = FockVector::new(vec![C64::default(), C64::new(0.8, 0.0), C64::default(), C64::new(0.6, 0.0)])
            .unwrap();
        let rotated = psi.to_density().conjugate_by(&phase_rotation(0.4, 4).unwrap()).unwrap();
        let best = max_fidelity_over_rotation(&rotated, &psi).unwrap();
        assert_abs_diff_eq!(best.fidelity, 1.0, epsilon = 1e-12);
        // |1⟩,|3⟩ support: only 2θ is observable, so θ is fixed modulo π.
        let back = (best.theta + 0.4).rem_euclid(PI);
        assert!(back < 1e-6 || (PI - back) < 1e-6, "theta = {}", best.theta);
    }
}
