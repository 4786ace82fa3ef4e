//! Shared evaluation metrics: masked RMSE and the ratio-adjusted farm Gini.

use nalgebra::DMatrix;

use crate::error::{Error, Result};
use crate::panel::Mask;
use crate::scalar::{abs, c64, Scalar};

/// Root-mean-squared error over the mask's set cells.
pub fn rmse<T: Scalar>(actual: &DMatrix<T>, predicted: &DMatrix<T>, evaluate: &Mask) -> Result<T> {
    if actual.shape() != predicted.shape() {
        return Err(Error::invalid(format!(
            "actual {:?} and predicted {:?} are not conformable",
            actual.shape(),
            predicted.shape()
        )));
    }
    evaluate.check_shape(actual.nrows(), actual.ncols())?;
    let mut sum = T::zero();
    let mut count = 0usize;
    for (i, j) in evaluate.iter_missing() {
        let d = actual[(i, j)] - predicted[(i, j)];
        sum += d * d;
        count += 1;
    }
    if count == 0 {
        return Err(Error::invalid("evaluation mask has no set cells"));
    }
    Ok((sum / c64(count as f64)).sqrt())
}

/// Farm-size Gini coefficient corrected by the farms-to-adult-males ratio:
/// `1 - (F/A) * (1 - G)`, so landless adults push the measure toward 1.
///
/// G is the mean absolute pairwise difference normalized by twice the mean.
pub fn adjusted_gini<T: Scalar>(
    farm_sizes: &[T],
    n_farms: usize,
    n_adult_males: usize,
) -> Result<T> {
    if farm_sizes.is_empty() {
        return Err(Error::invalid("farm sizes are empty"));
    }
    if n_farms < 1 {
        return Err(Error::invalid("at least one farm required"));
    }
    if n_adult_males < n_farms {
        return Err(Error::invalid(format!(
            "adult males ({n_adult_males}) fewer than farms ({n_farms})"
        )));
    }
    if farm_sizes.iter().any(|&s| s < T::zero() || !s.is_finite()) {
        return Err(Error::invalid("farm sizes must be nonnegative and finite"));
    }
    let g = gini(farm_sizes)?;
    let ratio: T = c64(n_farms as f64 / n_adult_males as f64);
    Ok(T::one() - ratio * (T::one() - g))
}

/// Plain Gini via mean absolute pairwise difference.
pub fn gini<T: Scalar>(values: &[T]) -> Result<T> {
    let n = values.len();
    let nf: T = c64(n as f64);
    let mean = values.iter().copied().sum::<T>() / nf;
    if mean <= T::zero() {
        return Err(Error::invalid("values sum to zero; Gini undefined"));
    }
    let mut sum_abs = T::zero();
    for &a in values {
        for &b in values {
            sum_abs += abs(a - b);
        }
    }
    Ok(sum_abs / (c64::<T>(2.0) * nf * nf * mean))
}
