use nalgebra::DMatrix;

use super::{binomial, DensityOperator, Operator};
use crate::{Error, Result, C64};

/// Kraus operators `A_k = Σ_n √C(n,k) √(η^{n−k}(1−η)^k) |n−k⟩⟨n|` of the
/// pure-loss channel with transmission `eta`, for `k = 0..dim`.
pub fn loss_kraus_operators(eta: f64, dim: usize) -> Result<Vec<Operator>> {
    check_eta(eta)?;
    super::check_dim(dim)?;
    let ops = (0..dim)
        .map(|k| {
            let mut m = DMatrix::<C64>::zeros(dim, dim);
            for n in k..dim {
                let w = binomial(n, k) * eta.powi((n - k) as i32) * (1.0 - eta).powi(k as i32);
                m[(n - k, n)] = C64::new(w.sqrt(), 0.0);
            }
            Operator::from_matrix(m).expect("square")
        })
        .collect();
    Ok(ops)
}

/// Photon loss with transmission `eta`: `ρ ↦ Σ_k A_k ρ A_k†`.
pub fn loss_channel(rho: &DensityOperator, eta: f64) -> Result<DensityOperator> {
    let dim = rho.dim();
    let kraus = loss_kraus_operators(eta, dim)?;
    let mut out = DMatrix::<C64>::zeros(dim, dim);
    for a in &kraus {
        out += a.matrix() * rho.matrix() * a.matrix().adjoint();
    }
    DensityOperator::from_matrix(out)
}

fn check_eta(eta: f64) -> Result<()> {
    if (0.0..=1.0).contains(&eta) {
        Ok(())
    } else {
        Err(Error::invalid(format!("transmission must lie in [0, 1], got {eta}")))
    }
}
