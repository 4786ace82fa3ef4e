//! Unit-specific covariates (normalized N×P) and optional unit-time
//! covariates for the continuous difference-in-differences regression.

use nalgebra::DMatrix;

use crate::error::{Error, Result};
use crate::scalar::{abs, c64, Scalar};

/// Tolerance at which column normalization is verified.
const NORMALIZATION_TOL: f64 = 1e-8;

#[derive(Debug, Clone)]
pub struct CovariateSet<T: Scalar> {
    unit_covariates: DMatrix<T>,
    names: Vec<String>,
    dropped: Vec<String>,
    unit_time: Vec<(String, DMatrix<T>)>,
}

impl<T: Scalar> CovariateSet<T> {
    /// Empty set (P = 0) for `n_units` units.
    pub fn empty(n_units: usize) -> Self {
        Self {
            unit_covariates: DMatrix::zeros(n_units, 0),
            names: Vec::new(),
            dropped: Vec::new(),
            unit_time: Vec::new(),
        }
    }

    /// Normalize raw unit covariates column-by-column to mean 0, sd 1.
    /// Zero-variance columns cannot be normalized and are dropped; their
    /// names are recorded in [`CovariateSet::dropped`].
    pub fn from_raw(raw: DMatrix<T>, names: Vec<String>) -> Result<Self> {
        if names.len() != raw.ncols() {
            return Err(Error::invalid(format!(
                "{} names for {} covariate columns",
                names.len(),
                raw.ncols()
            )));
        }
        if raw.iter().any(|v| !v.is_finite()) {
            return Err(Error::invalid("covariates contain non-finite values"));
        }
        let n = raw.nrows();
        if n == 0 {
            return Err(Error::invalid("covariates need at least one unit"));
        }
        let nf: T = c64(n as f64);
        let mut kept_cols = Vec::new();
        let mut kept_names = Vec::new();
        let mut dropped = Vec::new();
        for (j, name) in names.iter().enumerate() {
            let col = raw.column(j);
            let mean = col.iter().copied().sum::<T>() / nf;
            let var = col.iter().map(|&v| (v - mean) * (v - mean)).sum::<T>() / nf;
            if var <= T::default_epsilon() * fscale(mean) {
                dropped.push(name.clone());
                continue;
            }
            let sd = var.sqrt();
            kept_cols.push(col.iter().map(|&v| (v - mean) / sd).collect::<Vec<_>>());
            kept_names.push(name.clone());
        }
        let p = kept_cols.len();
        let unit_covariates = DMatrix::from_fn(n, p, |i, j| kept_cols[j][i]);
        let set = Self { unit_covariates, names: kept_names, dropped, unit_time: Vec::new() };
        set.verify_normalized()?;
        Ok(set)
    }

    /// Attach an already-complete unit-time covariate (N×T).
    pub fn with_unit_time(mut self, name: impl Into<String>, values: DMatrix<T>) -> Result<Self> {
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::invalid("unit-time covariate contains non-finite values"));
        }
        self.unit_time.push((name.into(), values));
        Ok(self)
    }

    pub fn n_units(&self) -> usize {
        self.unit_covariates.nrows()
    }

    /// Number of unit-specific covariate columns.
    pub fn p(&self) -> usize {
        self.unit_covariates.ncols()
    }

    pub fn values(&self) -> &DMatrix<T> {
        &self.unit_covariates
    }

    pub fn names(&self) -> &[String] {
        &self.names
    }

    /// Names of zero-variance columns dropped before normalization.
    pub fn dropped(&self) -> &[String] {
        &self.dropped
    }

    pub fn unit_time(&self) -> &[(String, DMatrix<T>)] {
        &self.unit_time
    }

    /// Check every column has mean 0 and sd 1 within 1e-8.
    pub fn verify_normalized(&self) -> Result<()> {
        let n = self.n_units();
        let nf: T = c64(n as f64);
        let tol: T = c64(NORMALIZATION_TOL);
        for j in 0..self.p() {
            let col = self.unit_covariates.column(j);
            let mean = col.iter().copied().sum::<T>() / nf;
            let var = col.iter().map(|&v| (v - mean) * (v - mean)).sum::<T>() / nf;
            if abs(mean) > tol || abs(var.sqrt() - T::one()) > tol {
                return Err(Error::invalid(format!(
                    "covariate {:?} is not normalized (mean {mean}, sd {})",
                    self.names[j],
                    var.sqrt()
                )));
            }
        }
        Ok(())
    }

    /// Restrict to a subset of unit rows (after preprocessing drops units).
    pub fn select_units(&self, keep: &[usize]) -> Result<Self> {
        for &i in keep {
            if i >= self.n_units() {
                return Err(Error::invalid(format!("unit index {i} out of range")));
            }
        }
        let raw = DMatrix::from_fn(keep.len(), self.p(), |i, j| self.unit_covariates[(keep[i], j)]);
        // Re-normalize on the surviving rows.
        let mut out = Self::from_raw(raw, self.names.clone())?;
        out.dropped = self.dropped.iter().cloned().chain(out.dropped).collect();
        for (name, m) in &self.unit_time {
            let sub = DMatrix::from_fn(keep.len(), m.ncols(), |i, j| m[(keep[i], j)]);
            out.unit_time.push((name.clone(), sub));
        }
        Ok(out)
    }
}

fn fscale<T: Scalar>(mean: T) -> T {
    crate::scalar::fmax(T::one(), mean * mean)
}
