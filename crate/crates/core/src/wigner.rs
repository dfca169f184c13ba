//! Wigner functions of single-mode density operators.
//!
//! With `β = (x + ip)/√2` the number-basis matrix elements are
//! `W_{mn}(x,p) = (1/π)(−1)ⁿ √(n!/m!) (2β*)^{m−n} e^{−2|β|²} L_n^{(m−n)}(4|β|²)`
//! for `m ≥ n`, and their conjugates for `m < n`. The vacuum peaks at `1/π`.

use std::f64::consts::PI;
use std::io::Write;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::fock::DensityOperator;
use crate::{Error, Result, C64};

pub const DEFAULT_HALF_WIDTH: f64 = 5.0;
pub const DEFAULT_RESOLUTION: usize = 201;
pub const DEFAULT_THRESHOLD: f64 = 1e-4;
pub const DEFAULT_CUT_RANGE: f64 = 4.0;
pub const DEFAULT_CUT_SAMPLES: usize = 2001;
pub const MIN_CUT_SAMPLES: usize = 100;

/// Generalized Laguerre polynomials `L_0^{(k)}(x) .. L_{n_max}^{(k)}(x)` by
/// three-term recurrence.
pub fn laguerre_series(n_max: usize, k: usize, x: f64) -> Vec<f64> {
    let a = k as f64;
    let mut out = Vec::with_capacity(n_max + 1);
    out.push(1.0);
    if n_max >= 1 {
        out.push(1.0 + a - x);
    }
    for n in 1..n_max {
        let nf = n as f64;
        let next = ((2.0 * nf + 1.0 + a - x) * out[n] - (nf + a) * out[n - 1]) / (nf + 1.0);
        out.push(next);
    }
    out
}

/// `W(x, p)` of a Hermitian density operator.
pub fn wigner_point(rho: &DensityOperator, x: f64, p: f64) -> f64 {
    let d = rho.dim();
    let beta_conj = C64::new(x, -p) / 2f64.sqrt();
    let r2 = beta_conj.norm_sqr();
    let arg = 4.0 * r2;
    let envelope = (-2.0 * r2).exp();
    let two_beta_conj = beta_conj * 2.0;

    let mut total = 0.0;
    // Walk each diagonal offset k = m − n.
    let mut power = C64::new(1.0, 0.0);
    for k in 0..d {
        if k > 0 {
            power *= two_beta_conj;
        }
        let lag = laguerre_series(d - 1 - k, k, arg);
        // √(n!/(n+k)!) updated along n.
        let mut ratio = (1..=k).map(|i| 1.0 / (i as f64).sqrt()).product::<f64>();
        for n in 0..d - k {
            if n > 0 {
                ratio *= (n as f64 / (n + k) as f64).sqrt();
            }
            let sign = if n % 2 == 0 { 1.0 } else { -1.0 };
            let term = rho.element(n + k, n) * power * (sign * ratio * lag[n]);
            total += if k == 0 { term.re } else { 2.0 * term.re };
        }
    }
    total * envelope / PI
}

/// Rectangular phase-space window and sample counts.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct GridSpec {
    pub x_min: f64,
    pub x_max: f64,
    pub p_min: f64,
    pub p_max: f64,
    pub nx: usize,
    pub np: usize,
}

impl Default for GridSpec {
    fn default() -> Self {
        Self {
            x_min: -DEFAULT_HALF_WIDTH,
            x_max: DEFAULT_HALF_WIDTH,
            p_min: -DEFAULT_HALF_WIDTH,
            p_max: DEFAULT_HALF_WIDTH,
            nx: DEFAULT_RESOLUTION,
            np: DEFAULT_RESOLUTION,
        }
    }
}

impl GridSpec {
    pub fn validate(&self) -> Result<()> {
        if !(self.x_min < self.x_max) || !(self.p_min < self.p_max) {
            return Err(Error::invalid("grid bounds must satisfy min < max"));
        }
        if self.nx < 2 || self.np < 2 {
            return Err(Error::invalid("grid needs at least 2 samples per axis"));
        }
        Ok(())
    }

    pub fn dx(&self) -> f64 {
        (self.x_max - self.x_min) / (self.nx - 1) as f64
    }

    pub fn dp(&self) -> f64 {
        (self.p_max - self.p_min) / (self.np - 1) as f64
    }

    pub fn x(&self, i: usize) -> f64 {
        self.x_min + i as f64 * self.dx()
    }

    pub fn p(&self, j: usize) -> f64 {
        self.p_min + j as f64 * self.dp()
    }
}

/// Parses `"xmin,xmax,pmin,pmax,nx,np"`.
impl FromStr for GridSpec {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let parts: Vec<&str> = s.split(',').map(str::trim).collect();
        let bad = || Error::invalid(format!("grid must be 'xmin,xmax,pmin,pmax,nx,np', got '{s}'"));
        if parts.len() != 6 {
            return Err(bad());
        }
        let f = |i: usize| parts[i].parse::<f64>().map_err(|_| bad());
        let n = |i: usize| parts[i].parse::<usize>().map_err(|_| bad());
        let spec = GridSpec {
            x_min: f(0)?,
            x_max: f(1)?,
            p_min: f(2)?,
            p_max: f(3)?,
            nx: n(4)?,
            np: n(5)?,
        };
        spec.validate()?;
        Ok(spec)
    }
}

/// Sampled Wigner function; `values[i * np + j]` holds `W(x_i, p_j)`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct WignerGrid {
    #[serde(flatten)]
    pub spec: GridSpec,
    pub values: Vec<f64>,
}

impl WignerGrid {
    pub fn value(&self, i: usize, j: usize) -> f64 {
        self.values[i * self.spec.np + j]
    }

    /// Riemann sum `Σ W ΔxΔp`.
    pub fn integral(&self) -> f64 {
        self.values.iter().sum::<f64>() * self.spec.dx() * self.spec.dp()
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    pub fn min_value(&self) -> f64 {
        self.values.iter().copied().fold(f64::INFINITY, f64::min)
    }

    /// Riemann sum of `max(0, −W) ΔxΔp`.
    pub fn negative_volume(&self) -> f64 {
        self.values.iter().map(|v| (-v).max(0.0)).sum::<f64>() * self.spec.dx() * self.spec.dp()
    }

    /// Rows `x,p,w` after a header, `p` varying fastest.
    pub fn write_csv<W: Write>(&self, mut out: W) -> Result<()> {
        writeln!(out, "x,p,w")?;
        for i in 0..self.spec.nx {
            let x = self.spec.x(i);
            for j in 0..self.spec.np {
                writeln!(out, "{},{},{}", x, self.spec.p(j), self.value(i, j))?;
            }
        }
        Ok(())
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string(self)?)
    }
}

pub fn wigner_grid(rho: &DensityOperator, spec: &GridSpec) -> Result<WignerGrid> {
    spec.validate()?;
    let mut values = Vec::with_capacity(spec.nx * spec.np);
    for i in 0..spec.nx {
        let x = spec.x(i);
        for j in 0..spec.np {
            values.push(wigner_point(rho, x, spec.p(j)));
        }
    }
    Ok(WignerGrid { spec: *spec, values })
}

/// Straight cut through the origin.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct CutSpec {
    /// Direction in radians from the `x` axis.
    pub angle: f64,
    /// Samples run over `[−range, range]`.
    pub range: f64,
    pub samples: usize,
    pub threshold: f64,
}

impl CutSpec {
    pub fn along(angle: f64) -> Self {
        Self {
            angle,
            ..Self::default()
        }
    }
}

impl Default for CutSpec {
    fn default() -> Self {
        Self {
            angle: 0.0,
            range: DEFAULT_CUT_RANGE,
            samples: DEFAULT_CUT_SAMPLES,
            threshold: DEFAULT_THRESHOLD,
        }
    }
}

/// Values of `W` along a cut, with their signed positions.
pub fn wigner_cut(rho: &DensityOperator, cut: &CutSpec) -> Result<Vec<(f64, f64)>> {
    if cut.samples < MIN_CUT_SAMPLES {
        return Err(Error::invalid(format!("a cut needs at least {MIN_CUT_SAMPLES} samples")));
    }
    if !(cut.range > 0.0) {
        return Err(Error::invalid("cut range must be positive"));
    }
    let (s, c) = cut.angle.sin_cos();
    let step = 2.0 * cut.range / (cut.samples - 1) as f64;
    Ok((0..cut.samples)
        .map(|i| {
            let t = -cut.range + i as f64 * step;
            (t, wigner_point(rho, t * c, t * s))
        })
        .collect())
}

/// Number of maximal runs of consecutive cut samples with `W < −threshold`.
pub fn count_negative_intervals(rho: &DensityOperator, cut: &CutSpec) -> Result<usize> {
    let values = wigner_cut(rho, cut)?;
    let mut count = 0;
    let mut inside = false;
    for (_, w) in values {
        let neg = w < -cut.threshold;
        if neg && !inside {
            count += 1;
        }
        inside = neg;
    }
    Ok(count)
}

pub fn negativity_volume(rho: &DensityOperator, spec: &GridSpec) -> Result<f64> {
    Ok(wigner_grid(rho, spec)?.negative_volume())
}
