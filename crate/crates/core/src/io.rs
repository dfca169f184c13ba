//! JSON and CSV exchange formats.
//!
//! States and density operators share one layout:
//! `{"dim": d, "entries": [[re, im], ...]}` with `d` entries for a vector
//! and `d²` row-major entries for an operator.

use std::io::{BufRead, Write};

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::fock::{DensityOperator, FockVector};
use crate::herald::{HeraldOutcome, TruncationWarning};
use crate::tomo::QuadratureRecord;
use crate::{Error, Result, C64};

/// Serde adapter for `[C64; 3]` as `[[re, im], [re, im], [re, im]]`.
pub mod complex_triple {
    use serde::{Deserialize, Deserializer, Serialize, Serializer};

    use crate::C64;

    pub fn serialize<S: Serializer>(v: &[C64; 3], s: S) -> Result<S::Ok, S::Error> {
        v.map(|c| [c.re, c.im]).serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<[C64; 3], D::Error> {
        let raw = <[[f64; 2]; 3]>::deserialize(d)?;
        Ok(raw.map(|[re, im]| C64::new(re, im)))
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MatrixJson {
    pub dim: usize,
    pub entries: Vec<[f64; 2]>,
}

impl MatrixJson {
    pub fn from_density(rho: &DensityOperator) -> Self {
        let d = rho.dim();
        let mut entries = Vec::with_capacity(d * d);
        for i in 0..d {
            for j in 0..d {
                let z = rho.element(i, j);
                entries.push([z.re, z.im]);
            }
        }
        Self { dim: d, entries }
    }

    pub fn from_vector(v: &FockVector) -> Self {
        Self {
            dim: v.dim(),
            entries: v.amps().iter().map(|z| [z.re, z.im]).collect(),
        }
    }

    pub fn to_density(&self) -> Result<DensityOperator> {
        let d = self.dim;
        if d == 0 || self.entries.len() != d * d {
            return Err(Error::InvalidDensity(format!(
                "expected {} entries for dim {d}, found {}",
                d * d,
                self.entries.len()
            )));
        }
        let m = DMatrix::from_fn(d, d, |i, j| {
            let [re, im] = self.entries[i * d + j];
            C64::new(re, im)
        });
        DensityOperator::from_matrix(m)
    }

    pub fn to_vector(&self) -> Result<FockVector> {
        if self.entries.len() != self.dim {
            return Err(Error::invalid(format!(
                "expected {} entries for dim {}, found {}",
                self.dim,
                self.dim,
                self.entries.len()
            )));
        }
        FockVector::new(self.entries.iter().map(|&[re, im]| C64::new(re, im)).collect())
    }
}

pub fn density_to_json(rho: &DensityOperator) -> Result<String> {
    Ok(serde_json::to_string_pretty(&MatrixJson::from_density(rho))?)
}

/// Parses and validates a density operator.
pub fn density_from_json(text: &str) -> Result<DensityOperator> {
    let raw: MatrixJson = serde_json::from_str(text)?;
    let rho = raw.to_density()?;
    rho.validate()?;
    Ok(rho)
}

pub fn vector_to_json(v: &FockVector) -> Result<String> {
    Ok(serde_json::to_string_pretty(&MatrixJson::from_vector(v))?)
}

pub fn vector_from_json(text: &str) -> Result<FockVector> {
    let raw: MatrixJson = serde_json::from_str(text)?;
    raw.to_vector()
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct HeraldOutcomeJson {
    #[serde(flatten)]
    pub rho: MatrixJson,
    pub probability: f64,
    pub warnings: Vec<TruncationWarning>,
}

pub fn outcome_to_json(outcome: &HeraldOutcome) -> Result<String> {
    Ok(serde_json::to_string_pretty(&HeraldOutcomeJson {
        rho: MatrixJson::from_density(&outcome.rho),
        probability: outcome.probability,
        warnings: outcome.warnings.clone(),
    })?)
}

/// Quadrature records as CSV with the header `theta,x`.
pub fn write_records_csv<W: Write>(records: &[QuadratureRecord], mut out: W) -> Result<()> {
    writeln!(out, "theta,x")?;
    for r in records {
        writeln!(out, "{},{}", r.theta(), r.x())?;
    }
    Ok(())
}

pub fn read_records_csv<R: BufRead>(input: R) -> Result<Vec<QuadratureRecord>> {
    let mut records = Vec::new();
    for (lineno, line) in input.lines().enumerate() {
        let line = line?;
        let line = line.trim();
        if line.is_empty() || (lineno == 0 && line.starts_with("theta")) {
            continue;
        }
        let mut parts = line.split(',');
        let parse = |s: Option<&str>| -> Result<f64> {
            s.map(str::trim)
                .and_then(|v| v.parse::<f64>().ok())
                .filter(|v| v.is_finite())
                .ok_or_else(|| Error::invalid(format!("line {}: expected 'theta,x'", lineno + 1)))
        };
        let theta = parse(parts.next())?;
        let x = parse(parts.next())?;
        if parts.next().is_some() {
            return Err(Error::invalid(format!("line {}: too many columns", lineno + 1)));
        }
        records.push(QuadratureRecord::new(theta, x));
    }
    Ok(records)
}

pub fn records_to_json(records: &[QuadratureRecord]) -> Result<String> {
    Ok(serde_json::to_string_pretty(records)?)
}

pub fn records_from_json(text: &str) -> Result<Vec<QuadratureRecord>> {
    let raw: Vec<QuadratureRecord> = serde_json::from_str(text)?;
    Ok(raw.into_iter().map(|r| QuadratureRecord::new(r.theta(), r.x())).collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fock::coherent_state;

    #[test]
    fn density_json_layout() {
        let rho = DensityOperator::fock(1, 2).unwrap();
        let text = serde_json::to_string(&MatrixJson::from_density(&rho)).unwrap();
        assert_eq!(text, r#"{"dim":2,"entries":[[0.0,0.0],[0.0,0.0],[0.0,0.0],[1.0,0.0]]}"#);
    }

    #[test]
    fn density_round_trip() {
        let psi = coherent_state(C64::new(0.4, -0.7), 8).unwrap().normalized().unwrap();
        let rho = psi.to_density();
        let back = density_from_json(&density_to_json(&rho).unwrap()).unwrap();
        assert_eq!(back, rho);
        let v = vector_from_json(&vector_to_json(&psi).unwrap()).unwrap();
        assert_eq!(v, psi);
    }

    #[test]
    fn malformed_density_rejected() {
        assert!(density_from_json(r#"{"dim":2,"entries":[[1,0]]}"#).is_err());
        assert!(density_from_json(r#"{"dim":1,"entries":[[2,0]]}"#).is_err());
        assert!(density_from_json("not json").is_err());
    }

    #[test]
    fn records_csv_round_trip() {
        let records = vec![QuadratureRecord::new(0.1, -0.5), QuadratureRecord::new(3.0, 1.25)];
        let mut buf = Vec::new();
        write_records_csv(&records, &mut buf).unwrap();
        assert!(buf.starts_with(b"theta,x\n"));
        let back = read_records_csv(&buf[..]).unwrap();
        assert_eq!(back, records);
        assert!(read_records_csv(&b"theta,x\n0.1\n"[..]).is_err());
        assert!(read_records_csv(&b"theta,x\n0.1,abc\n"[..]).is_err());
    }
}
