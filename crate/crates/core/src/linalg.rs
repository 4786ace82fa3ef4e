//! Shared numerical routines: singular-value soft-thresholding, truncated
//! SVD reconstruction, and two-way fixed-effect fits on partially observed
//! matrices.

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::scalar::{abs, c64, fmax, Scalar};

/// Result of a soft-thresholded SVD reconstruction.
#[derive(Debug, Clone)]
pub struct SvtResult<T: Scalar> {
    pub matrix: DMatrix<T>,
    /// Count of singular values surviving the threshold.
    pub rank: usize,
    /// Nuclear norm of the reconstruction (sum of surviving values).
    pub nuclear_norm: T,
}

/// Replace each singular value `s` by `max(s - threshold, 0)` and rebuild.
pub fn svt<T: Scalar>(m: &DMatrix<T>, threshold: T) -> Result<SvtResult<T>> {
    let svd = m.clone().svd(true, true);
    let u = svd.u.ok_or_else(|| Error::numerical("SVD did not produce U"))?;
    let v_t = svd.v_t.ok_or_else(|| Error::numerical("SVD did not produce V^T"))?;
    let mut s = svd.singular_values;
    let mut rank = 0usize;
    let mut nuclear_norm = T::zero();
    for i in 0..s.len() {
        let shrunk = s[i] - threshold;
        if shrunk > T::zero() {
            s[i] = shrunk;
            rank += 1;
            nuclear_norm += shrunk;
        } else {
            s[i] = T::zero();
        }
    }
    let mut scaled_u = u;
    for i in 0..s.len() {
        scaled_u.column_mut(i).scale_mut(s[i]);
    }
    Ok(SvtResult { matrix: scaled_u * v_t, rank, nuclear_norm })
}

/// Best rank-`rank` reconstruction of `m` (truncated SVD).
pub fn truncated_svd<T: Scalar>(m: &DMatrix<T>, rank: usize) -> Result<DMatrix<T>> {
    let k = rank.min(m.nrows().min(m.ncols()));
    let svd = m.clone().svd(true, true);
    let u = svd.u.ok_or_else(|| Error::numerical("SVD did not produce U"))?;
    let v_t = svd.v_t.ok_or_else(|| Error::numerical("SVD did not produce V^T"))?;
    let s = svd.singular_values;
    // `svd` returns singular values in decreasing order
    debug_assert!((1..s.len()).all(|i| s[i - 1] >= s[i]));
    let mut scaled_u = u.columns(0, k).into_owned();
    for i in 0..k {
        scaled_u.column_mut(i).scale_mut(s[i]);
    }
    Ok(scaled_u * v_t.rows(0, k).into_owned())
}

/// Largest singular value.
pub fn spectral_norm<T: Scalar>(m: &DMatrix<T>) -> T {
    let s = m.clone().singular_values();
    let mut best = T::zero();
    for i in 0..s.len() {
        best = fmax(best, s[i]);
    }
    best
}

/// Two-way fixed effects plus optional unit-covariate coefficients.
///
/// `gamma` absorbs the grand mean, so a prediction is
/// `gamma[i] + delta[t] + x.row(i) . beta`.
#[derive(Debug, Clone)]
pub struct TwoWayFit<T: Scalar> {
    pub gamma: DVector<T>,
    pub delta: DVector<T>,
    pub beta: DVector<T>,
}

impl<T: Scalar> TwoWayFit<T> {
    pub fn zeros(n: usize, t: usize, p: usize) -> Self {
        Self { gamma: DVector::zeros(n), delta: DVector::zeros(t), beta: DVector::zeros(p) }
    }

    pub fn predict_cell(&self, x: Option<&DMatrix<T>>, i: usize, t: usize) -> T {
        let mut v = self.gamma[i] + self.delta[t];
        if let Some(x) = x {
            for p in 0..x.ncols() {
                v += x[(i, p)] * self.beta[p];
            }
        }
        v
    }

    pub fn predict_matrix(&self, x: Option<&DMatrix<T>>, n: usize, t: usize) -> DMatrix<T> {
        DMatrix::from_fn(n, t, |i, j| self.predict_cell(x, i, j))
    }
}

/// Least-squares fit of `y ~ gamma_i + delta_t + x_i . beta` over the
/// observed cells, by alternating exact block updates. Each sweep weakly
/// decreases the squared error, and on a fully observed matrix without
/// covariates a single sweep reaches the exact double-centering solution.
pub fn fit_two_way<T: Scalar>(
    y: &DMatrix<T>,
    observed: &DMatrix<bool>,
    x: Option<&DMatrix<T>>,
    warm_start: Option<TwoWayFit<T>>,
    max_sweeps: usize,
    tol: T,
) -> Result<TwoWayFit<T>> {
    let (n, t) = y.shape();
    if observed.shape() != (n, t) {
        return Err(Error::invalid("observed mask shape mismatch"));
    }
    let p = x.map_or(0, |m| m.ncols());
    if let Some(m) = x {
        if m.nrows() != n {
            return Err(Error::invalid("covariate rows do not match panel units"));
        }
    }

    let mut row_count = vec![0usize; n];
    let mut col_count = vec![0usize; t];
    for i in 0..n {
        for j in 0..t {
            if observed[(i, j)] {
                row_count[i] += 1;
                col_count[j] += 1;
            }
        }
    }
    if let Some(i) = row_count.iter().position(|&c| c == 0) {
        return Err(Error::invalid(format!("unit {i} has no observed cells")));
    }
    if let Some(j) = col_count.iter().position(|&c| c == 0) {
        return Err(Error::invalid(format!("period {j} has no observed cells")));
    }

    // The beta normal matrix depends only on the observation pattern.
    let beta_chol = if p > 0 {
        let x = x.expect("p > 0");
        let mut xtx = DMatrix::<T>::zeros(p, p);
        for i in 0..n {
            let w: T = c64(row_count[i] as f64);
            for a in 0..p {
                for b in 0..p {
                    xtx[(a, b)] += w * x[(i, a)] * x[(i, b)];
                }
            }
        }
        Some(
            nalgebra::Cholesky::new(xtx)
                .ok_or_else(|| Error::numerical("covariate design is singular"))?,
        )
    } else {
        None
    };

    let mut fit = warm_start.unwrap_or_else(|| TwoWayFit::zeros(n, t, p));
    let scale = fmax(T::one(), y.iter().filter(|v| v.is_finite()).map(|&v| abs(v)).sum::<T>());

    for _ in 0..max_sweeps {
        let mut max_change = T::zero();

        if let (Some(chol), Some(x)) = (&beta_chol, x) {
            let mut xtr = DVector::<T>::zeros(p);
            for i in 0..n {
                let mut rsum = T::zero();
                for j in 0..t {
                    if observed[(i, j)] {
                        rsum += y[(i, j)] - fit.gamma[i] - fit.delta[j];
                    }
                }
                for a in 0..p {
                    xtr[a] += x[(i, a)] * rsum;
                }
            }
            let new_beta = chol.solve(&xtr);
            for a in 0..p {
                max_change = fmax(max_change, abs(new_beta[a] - fit.beta[a]));
            }
            fit.beta = new_beta;
        }

        for i in 0..n {
            let mut sum = T::zero();
            for j in 0..t {
                if observed[(i, j)] {
                    sum += y[(i, j)] - fit.delta[j];
                }
            }
            if let Some(x) = x {
                let mut xb = T::zero();
                for a in 0..p {
                    xb += x[(i, a)] * fit.beta[a];
                }
                sum -= xb * c64(row_count[i] as f64);
            }
            let new = sum / c64(row_count[i] as f64);
            max_change = fmax(max_change, abs(new - fit.gamma[i]));
            fit.gamma[i] = new;
        }

        for j in 0..t {
            let mut sum = T::zero();
            for i in 0..n {
                if observed[(i, j)] {
                    let mut v = y[(i, j)] - fit.gamma[i];
                    if let Some(x) = x {
                        for a in 0..p {
                            v -= x[(i, a)] * fit.beta[a];
                        }
                    }
                    sum += v;
                }
            }
            let new = sum / c64(col_count[j] as f64);
            max_change = fmax(max_change, abs(new - fit.delta[j]));
            fit.delta[j] = new;
        }

        if max_change <= tol * scale {
            break;
        }
    }
    Ok(fit)
}

/// Residual `y - fit` on observed cells, zero elsewhere.
pub fn two_way_residual<T: Scalar>(
    y: &DMatrix<T>,
    observed: &DMatrix<bool>,
    x: Option<&DMatrix<T>>,
    fit: &TwoWayFit<T>,
) -> DMatrix<T> {
    let (n, t) = y.shape();
    DMatrix::from_fn(n, t, |i, j| {
        if observed[(i, j)] {
            y[(i, j)] - fit.predict_cell(x, i, j)
        } else {
            T::zero()
        }
    })
}

/// Minimum-norm least squares via SVD (handles rank deficiency).
pub fn lstsq<T: Scalar>(x: &DMatrix<T>, y: &DVector<T>) -> Result<DVector<T>> {
    let svd = x.clone().svd(true, true);
    let smax = {
        let s = &svd.singular_values;
        let mut best = T::zero();
        for i in 0..s.len() {
            best = fmax(best, s[i]);
        }
        best
    };
    let eps = fmax(T::default_epsilon(), smax * c64::<T>(1e-12));
    let sol = svd
        .solve(y, eps)
        .map_err(Error::numerical)?;
    Ok(DVector::from_column_slice(sol.as_slice()))
}
