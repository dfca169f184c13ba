//! Roots of complex polynomials as eigenvalues of the companion matrix.
//!
//! The companion matrix is already upper Hessenberg, so the eigenvalues come
//! from a plain single-shift complex QR iteration with Givens rotations and
//! Wilkinson shifts. Roots are then polished with a few Newton steps on the
//! original polynomial.

use nalgebra::DMatrix;

use crate::{Error, Result, C64};

const MAX_SWEEPS_PER_ROOT: usize = 200;

/// Roots of `c[0] xⁿ + c[1] xⁿ⁻¹ + … + c[n]`.
pub fn polynomial_roots(coeffs: &[C64]) -> Result<Vec<C64>> {
    let lead = coeffs
        .iter()
        .position(|c| *c != C64::default())
        .ok_or_else(|| Error::invalid("zero polynomial has no roots"))?;
    let coeffs = &coeffs[lead..];

    // Exact zero roots are split off first; the QR iteration resolves a
    // nilpotent companion block only to ~ε^(1/n).
    let trailing = coeffs.iter().rev().take_while(|c| **c == C64::default()).count();
    let reduced = &coeffs[..coeffs.len() - trailing];
    let mut roots = vec![C64::default(); trailing];

    let degree = reduced.len() - 1;
    if degree > 0 {
        let monic: Vec<C64> = reduced.iter().map(|c| c / reduced[0]).collect();
        let eig = hessenberg_eigenvalues(companion_matrix(&monic))?;
        roots.extend(eig.into_iter().map(|z| polish(&monic, z)));
    }
    Ok(roots)
}

/// Companion matrix of a monic polynomial `[1, a₁, …, aₙ]`: first row
/// `−a₁ … −aₙ`, ones on the subdiagonal.
pub fn companion_matrix(monic: &[C64]) -> DMatrix<C64> {
    let n = monic.len() - 1;
    let mut m = DMatrix::zeros(n, n);
    for j in 0..n {
        m[(0, j)] = -monic[j + 1];
    }
    for i in 1..n {
        m[(i, i - 1)] = C64::new(1.0, 0.0);
    }
    m
}

/// Horner evaluation of `p(x)` and `p'(x)`.
pub fn evaluate(coeffs: &[C64], x: C64) -> (C64, C64) {
    let mut p = C64::default();
    let mut dp = C64::default();
    for c in coeffs {
        dp = dp * x + p;
        p = p * x + c;
    }
    (p, dp)
}

fn polish(monic: &[C64], mut z: C64) -> C64 {
    let mut residual = evaluate(monic, z).0.norm();
    for _ in 0..8 {
        let (p, dp) = evaluate(monic, z);
        if dp == C64::default() || residual == 0.0 {
            break;
        }
        let candidate = z - p / dp;
        let r = evaluate(monic, candidate).0.norm();
        if !(r < residual) {
            break;
        }
        z = candidate;
        residual = r;
    }
    z
}

/// Eigenvalues of an upper Hessenberg matrix.
pub fn hessenberg_eigenvalues(mut h: DMatrix<C64>) -> Result<Vec<C64>> {
    let n = h.nrows();
    let mut eig = Vec::with_capacity(n);
    let mut hi = n;
    let mut stalled = 0usize;
    let budget = MAX_SWEEPS_PER_ROOT * n.max(1);
    let mut sweeps = 0usize;

    while hi > 0 {
        if hi == 1 {
            eig.push(h[(0, 0)]);
            break;
        }
        // Active block [lo, hi): look for the lowest negligible subdiagonal.
        let mut lo = hi - 1;
        while lo > 0 {
            let scale = h[(lo, lo)].norm() + h[(lo - 1, lo - 1)].norm();
            let scale = if scale == 0.0 { 1.0 } else { scale };
            if h[(lo, lo - 1)].norm() <= f64::EPSILON * scale {
                h[(lo, lo - 1)] = C64::default();
                break;
            }
            lo -= 1;
        }
        if lo == hi - 1 {
            eig.push(h[(hi - 1, hi - 1)]);
            hi -= 1;
            stalled = 0;
            continue;
        }

        sweeps += 1;
        if sweeps > budget {
            return Err(Error::Numerical("QR iteration did not converge".into()));
        }
        stalled += 1;
        let shift = if stalled % 11 == 0 {
            // Exceptional shift to break cycles.
            h[(hi - 1, hi - 1)] + C64::new(h[(hi - 1, hi - 2)].norm() * 0.75, 0.0)
        } else {
            wilkinson_shift(
                h[(hi - 2, hi - 2)],
                h[(hi - 2, hi - 1)],
                h[(hi - 1, hi - 2)],
                h[(hi - 1, hi - 1)],
            )
        };
        qr_step(&mut h, lo, hi, shift);
    }
    Ok(eig)
}

/// Eigenvalue of `[[a, b], [c, d]]` closer to `d`.
fn wilkinson_shift(a: C64, b: C64, c: C64, d: C64) -> C64 {
    let half_tr = (a + d) / 2.0;
    let disc = ((a - d) * (a - d) / 4.0 + b * c).sqrt();
    let l1 = half_tr + disc;
    let l2 = half_tr - disc;
    if (l1 - d).norm() <= (l2 - d).norm() {
        l1
    } else {
        l2
    }
}

/// One shifted QR step `H − μI = QR`, `H ← RQ + μI` on the block `[lo, hi)`.
fn qr_step(h: &mut DMatrix<C64>, lo: usize, hi: usize, shift: C64) {
    for i in lo..hi {
        h[(i, i)] -= shift;
    }
    let mut rotations = Vec::with_capacity(hi - lo - 1);
    for k in lo..hi - 1 {
        let a = h[(k, k)];
        let b = h[(k + 1, k)];
        let r = (a.norm_sqr() + b.norm_sqr()).sqrt();
        let (c, s) = if r == 0.0 {
            (C64::new(1.0, 0.0), C64::default())
        } else {
            (a / r, b / r)
        };
        for j in k..hi {
            let x = h[(k, j)];
            let y = h[(k + 1, j)];
            h[(k, j)] = c.conj() * x + s.conj() * y;
            h[(k + 1, j)] = -s * x + c * y;
        }
        rotations.push((c, s));
    }
    for (offset, (c, s)) in rotations.into_iter().enumerate() {
        let k = lo + offset;
        for i in lo..(k + 2).min(hi) {
            let x = h[(i, k)];
            let y = h[(i, k + 1)];
            h[(i, k)] = x * c + y * s;
            h[(i, k + 1)] = -x * s.conj() + y * c.conj();
        }
    }
    for i in lo..hi {
        h[(i, i)] += shift;
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn poly_from_roots(roots: &[C64]) -> Vec<C64> {
        let mut c = vec![C64::new(1.0, 0.0)];
        for r in roots {
            let mut next = vec![C64::default(); c.len() + 1];
            for (i, ci) in c.iter().enumerate() {
                next[i] += ci;
                next[i + 1] -= ci * r;
            }
            c = next;
        }
        c
    }

    fn assert_same_multiset(mut got: Vec<C64>, want: &[C64], tol: f64) {
        for w in want {
            let (i, d) = got
                .iter()
                .enumerate()
                .map(|(i, g)| (i, (g - w).norm()))
                .fold((0, f64::INFINITY), |a, b| if b.1 < a.1 { b } else { a });
            assert!(d < tol, "root {w} missing (closest at distance {d})");
            got.swap_remove(i);
        }
        assert!(got.is_empty());
    }

    #[test]
    fn cubic_with_known_roots() {
        let roots = [C64::new(0.3, -0.2), C64::new(-1.1, 0.5), C64::new(0.0, 2.0)];
        let got = polynomial_roots(&poly_from_roots(&roots)).unwrap();
        assert_same_multiset(got, &roots, 1e-12);
    }

    #[test]
    fn triple_zero_root() {
        let got = polynomial_roots(&[C64::new(1.0, 0.0), C64::default(), C64::default(), C64::default()]).unwrap();
        assert_eq!(got, vec![C64::default(); 3]);
    }

    #[test]
    fn real_coefficients_complex_roots() {
        // x² + 1
        let got = polynomial_roots(&[C64::new(1.0, 0.0), C64::default(), C64::new(1.0, 0.0)]).unwrap();
        assert_same_multiset(got, &[C64::new(0.0, 1.0), C64::new(0.0, -1.0)], 1e-14);
    }

    #[test]
    fn cube_roots_of_unit_imaginary() {
        // x³ − i: the zero-three recipe shape.
        let got = polynomial_roots(&[C64::new(1.0, 0.0), C64::default(), C64::default(), C64::new(0.0, -1.0)])
            .unwrap();
        let want: Vec<C64> = [1.0, 5.0, 9.0]
            .iter()
            .map(|k| C64::from_polar(1.0, k * std::f64::consts::PI / 6.0))
            .collect();
        assert_same_multiset(got, &want, 1e-13);
    }

    #[test]
    fn higher_degree() {
        let roots: Vec<C64> = (0..7).map(|k| C64::from_polar(1.0 + 0.1 * k as f64, 0.9 * k as f64)).collect();
        let got = polynomial_roots(&poly_from_roots(&roots)).unwrap();
        assert_same_multiset(got, &roots, 1e-9);
    }

    #[test]
    fn zero_polynomial_rejected() {
        assert!(polynomial_roots(&[C64::default(), C64::default()]).is_err());
    }
}
