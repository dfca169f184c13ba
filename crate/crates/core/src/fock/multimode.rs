use nalgebra::DMatrix;

use super::{binomial, check_same_dim, DensityOperator, FockVector, Operator};
use crate::{Error, Result, C64};

/// Pure state of several modes as a dense row-major tensor: mode 0 is the
/// slowest index.
#[derive(Clone, Debug, PartialEq)]
pub struct MultiModeState {
    mode_dims: Vec<usize>,
    amps: Vec<C64>,
}

impl MultiModeState {
    pub fn new(mode_dims: Vec<usize>, amps: Vec<C64>) -> Result<Self> {
        if mode_dims.is_empty() || mode_dims.iter().any(|&d| d == 0) {
            return Err(Error::invalid("every mode needs a positive truncation"));
        }
        let size: usize = mode_dims.iter().product();
        check_same_dim(size, amps.len())?;
        Ok(Self { mode_dims, amps })
    }

    pub fn vacuum(mode_dims: Vec<usize>) -> Result<Self> {
        let size: usize = mode_dims.iter().product();
        let mut amps = vec![C64::default(); size];
        if size > 0 {
            amps[0] = C64::new(1.0, 0.0);
        }
        Self::new(mode_dims, amps)
    }

    /// Tensor product of single-mode states, in order.
    pub fn product(factors: &[FockVector]) -> Result<Self> {
        let mut dims = Vec::with_capacity(factors.len());
        let mut amps = vec![C64::new(1.0, 0.0)];
        for f in factors {
            dims.push(f.dim());
            amps = amps
                .iter()
                .flat_map(|&a| f.amps().iter().map(move |&b| a * b))
                .collect();
        }
        Self::new(dims, amps)
    }

    pub fn mode_dims(&self) -> &[usize] {
        &self.mode_dims
    }

    pub fn num_modes(&self) -> usize {
        self.mode_dims.len()
    }

    pub fn amps(&self) -> &[C64] {
        &self.amps
    }

    pub fn norm_sqr(&self) -> f64 {
        self.amps.iter().map(|c| c.norm_sqr()).sum()
    }

    pub fn strides(&self) -> Vec<usize> {
        strides(&self.mode_dims)
    }

    /// Amplitude of the product basis state `|n_0, n_1, …⟩`.
    pub fn amp(&self, occupation: &[usize]) -> C64 {
        let idx: usize = occupation
            .iter()
            .zip(self.strides())
            .map(|(n, s)| n * s)
            .sum();
        self.amps[idx]
    }

    /// Appends a mode holding `state` as the new fastest index.
    pub fn with_mode(&self, state: &FockVector) -> Self {
        let mut dims = self.mode_dims.clone();
        dims.push(state.dim());
        let amps = self
            .amps
            .iter()
            .flat_map(|&a| state.amps().iter().map(move |&b| a * b))
            .collect();
        Self { mode_dims: dims, amps }
    }

    fn check_mode(&self, mode: usize) -> Result<()> {
        if mode < self.num_modes() {
            Ok(())
        } else {
            Err(Error::ModeOutOfRange {
                index: mode,
                modes: self.num_modes(),
            })
        }
    }

    /// Applies a single-mode operator to `mode`.
    pub fn apply_local(&self, op: &Operator, mode: usize) -> Result<Self> {
        self.check_mode(mode)?;
        let d = self.mode_dims[mode];
        check_same_dim(d, op.dim())?;
        let stride = self.strides()[mode];
        let block = d * stride;
        let mut out = vec![C64::default(); self.amps.len()];
        let mut slice = vec![C64::default(); d];
        for outer in (0..self.amps.len()).step_by(block) {
            for inner in 0..stride {
                let base = outer + inner;
                for (n, s) in slice.iter_mut().enumerate() {
                    *s = self.amps[base + n * stride];
                }
                for k in 0..d {
                    let mut acc = C64::default();
                    for (n, s) in slice.iter().enumerate() {
                        acc += op.element(k, n) * s;
                    }
                    out[base + k * stride] = acc;
                }
            }
        }
        Ok(Self {
            mode_dims: self.mode_dims.clone(),
            amps: out,
        })
    }

    /// Marginal photon-number distribution of one mode.
    pub fn mode_populations(&self, mode: usize) -> Result<Vec<f64>> {
        self.check_mode(mode)?;
        let d = self.mode_dims[mode];
        let stride = self.strides()[mode];
        let mut pops = vec![0.0; d];
        for (i, a) in self.amps.iter().enumerate() {
            pops[(i / stride) % d] += a.norm_sqr();
        }
        Ok(pops)
    }

    /// Expectation of the total photon number.
    pub fn mean_photon_number(&self) -> f64 {
        (0..self.num_modes())
            .map(|m| {
                self.mode_populations(m)
                    .expect("mode in range")
                    .iter()
                    .enumerate()
                    .map(|(n, p)| n as f64 * p)
                    .sum::<f64>()
            })
            .sum()
    }
}

/// Density operator over several modes, indexed like [`MultiModeState`].
#[derive(Clone, Debug, PartialEq)]
pub struct MultiModeDensity {
    mode_dims: Vec<usize>,
    matrix: DMatrix<C64>,
}

impl MultiModeDensity {
    pub fn new(mode_dims: Vec<usize>, matrix: DMatrix<C64>) -> Result<Self> {
        if mode_dims.is_empty() || mode_dims.iter().any(|&d| d == 0) {
            return Err(Error::invalid("every mode needs a positive truncation"));
        }
        let size: usize = mode_dims.iter().product();
        if matrix.nrows() != size || matrix.ncols() != size {
            return Err(Error::DimensionMismatch {
                expected: size,
                found: matrix.nrows(),
            });
        }
        Ok(Self { mode_dims, matrix })
    }

    pub fn from_pure(state: &MultiModeState) -> Self {
        let v = nalgebra::DVector::from_column_slice(state.amps());
        Self {
            mode_dims: state.mode_dims.clone(),
            matrix: &v * v.adjoint(),
        }
    }

    pub fn mode_dims(&self) -> &[usize] {
        &self.mode_dims
    }

    pub fn matrix(&self) -> &DMatrix<C64> {
        &self.matrix
    }

    /// Reduced operator on `keep` (modes listed in ascending order define
    /// the row-major layout of the result).
    pub fn partial_trace(&self, keep: &[usize]) -> Result<DensityOperator> {
        let split = Split::new(&self.mode_dims, keep)?;
        let mut out = DMatrix::<C64>::zeros(split.kept_dim, split.kept_dim);
        let size = self.matrix.nrows();
        let (kept, rest): (Vec<usize>, Vec<usize>) = (0..size).map(|i| split.locate(i)).unzip();
        for i in 0..size {
            for j in 0..size {
                if rest[i] == rest[j] {
                    out[(kept[i], kept[j])] += self.matrix[(i, j)];
                }
            }
        }
        DensityOperator::from_matrix(out)
    }
}

/// Reduced density operator of the modes in `keep`. The trace of the
/// result equals the squared norm of the input.
pub fn partial_trace(state: &MultiModeState, keep: &[usize]) -> Result<DensityOperator> {
    let split = Split::new(&state.mode_dims, keep)?;
    let rest_dim = state.amps.len() / split.kept_dim;
    let mut m = DMatrix::<C64>::zeros(split.kept_dim, rest_dim);
    for (i, a) in state.amps.iter().enumerate() {
        let (k, r) = split.locate(i);
        m[(k, r)] = *a;
    }
    DensityOperator::from_matrix(&m * m.adjoint())
}

struct Split {
    dims: Vec<usize>,
    keep: Vec<usize>,
    kept_dim: usize,
}

impl Split {
    fn new(dims: &[usize], keep: &[usize]) -> Result<Self> {
        if keep.is_empty() {
            return Err(Error::invalid("partial trace needs at least one kept mode"));
        }
        let mut keep = keep.to_vec();
        keep.sort_unstable();
        keep.dedup();
        if let Some(&bad) = keep.iter().find(|&&m| m >= dims.len()) {
            return Err(Error::ModeOutOfRange {
                index: bad,
                modes: dims.len(),
            });
        }
        let kept_dim = keep.iter().map(|&m| dims[m]).product();
        Ok(Self {
            dims: dims.to_vec(),
            keep,
            kept_dim,
        })
    }

    /// Splits a flat index into (kept index, traced index).
    fn locate(&self, flat: usize) -> (usize, usize) {
        let mut rem = flat;
        let mut digits = vec![0; self.dims.len()];
        for (m, &d) in self.dims.iter().enumerate().rev() {
            digits[m] = rem % d;
            rem /= d;
        }
        let (mut k, mut r) = (0, 0);
        for (m, &d) in self.dims.iter().enumerate() {
            if self.keep.binary_search(&m).is_ok() {
                k = k * d + digits[m];
            } else {
                r = r * d + digits[m];
            }
        }
        (k, r)
    }
}

fn strides(dims: &[usize]) -> Vec<usize> {
    let mut s = vec![1; dims.len()];
    for m in (0..dims.len().saturating_sub(1)).rev() {
        s[m] = s[m + 1] * dims[m + 1];
    }
    s
}

/// Two-mode beamsplitter with `a† → √T a† + √(1−T) b†` and
/// `b† → −√(1−T) a† + √T b†`.
///
/// The transformation is block diagonal in the pair's total photon number;
/// components that would need more levels than the truncation allows are
/// dropped, so the norm is preserved only while the pair holds fewer than
/// `dim` photons.
pub fn beamsplitter_apply(
    state: &MultiModeState,
    mode_a: usize,
    mode_b: usize,
    transmittance: f64,
) -> Result<MultiModeState> {
    state.check_mode(mode_a)?;
    state.check_mode(mode_b)?;
    if mode_a == mode_b {
        return Err(Error::invalid("beamsplitter needs two distinct modes"));
    }
    if !(0.0..=1.0).contains(&transmittance) {
        return Err(Error::invalid(format!("transmittance must lie in [0, 1], got {transmittance}")));
    }
    let d = state.mode_dims[mode_a];
    check_same_dim(d, state.mode_dims[mode_b])?;

    let blocks = BeamsplitterBlocks::new(transmittance, d);
    let strides = state.strides();
    let (sa, sb) = (strides[mode_a], strides[mode_b]);
    let size = state.amps.len();
    let mut out = vec![C64::default(); size];
    let mut slice = vec![C64::default(); d * d];

    for base in 0..size {
        // Visit each (mode_a, mode_b) slice once, from its |0,0⟩ corner.
        if (base / sa) % d != 0 || (base / sb) % d != 0 {
            continue;
        }
        for n in 0..d {
            for m in 0..d {
                slice[n * d + m] = state.amps[base + n * sa + m * sb];
            }
        }
        for total in 0..=2 * (d - 1) {
            let lo = total.saturating_sub(d - 1);
            let hi = total.min(d - 1);
            for k in lo..=hi {
                let mut acc = C64::default();
                for n in lo..=hi {
                    acc += slice[n * d + (total - n)] * blocks.coef(total, k, n);
                }
                out[base + k * sa + (total - k) * sb] = acc;
            }
        }
    }
    Ok(MultiModeState {
        mode_dims: state.mode_dims.clone(),
        amps: out,
    })
}

/// Matrix elements `⟨k, N−k| U |n, N−n⟩` for every total `N < 2d − 1`.
struct BeamsplitterBlocks {
    blocks: Vec<Vec<f64>>,
}

impl BeamsplitterBlocks {
    fn new(transmittance: f64, d: usize) -> Self {
        let t = transmittance.sqrt();
        let r = (1.0 - transmittance).sqrt();
        let blocks = (0..2 * d - 1)
            .map(|total| {
                let size = total + 1;
                let mut b = vec![0.0; size * size];
                for n in 0..=total {
                    let m = total - n;
                    // (t A + r B)^n (−r A + t B)^m, collect A^k B^(total−k).
                    for i in 0..=n {
                        let left = binomial(n, i) * t.powi(i as i32) * r.powi((n - i) as i32);
                        for j in 0..=m {
                            let right = binomial(m, j) * (-r).powi(j as i32) * t.powi((m - j) as i32);
                            b[(i + j) * size + n] += left * right;
                        }
                    }
                    for k in 0..=total {
                        let scale = (ln_factorial(k) + ln_factorial(total - k)
                            - ln_factorial(n)
                            - ln_factorial(m))
                            / 2.0;
                        b[k * size + n] *= scale.exp();
                    }
                }
                b
            })
            .collect();
        Self { blocks }
    }

    fn coef(&self, total: usize, k: usize, n: usize) -> f64 {
        self.blocks[total][k * (total + 1) + n]
    }
}

fn ln_factorial(n: usize) -> f64 {
    (2..=n).map(|i| (i as f64).ln()).sum()
}
