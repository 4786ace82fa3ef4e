//! Matrix-completion estimator: a low-rank matrix plus unit covariates and
//! two-way effects, fit by nuclear-norm-regularized least squares.
//!
//! The solver alternates two blocks. Given the low-rank component, the
//! effects and covariate coefficients are updated by least-squares sweeps on
//! the observed cells; given the effects, missing residual cells are filled
//! with the current low-rank values and the component is refreshed by a
//! soft-thresholded SVD. Both blocks weakly decrease the penalized
//! objective, so the objective trace is non-increasing.

use nalgebra::{DMatrix, DVector};
use rayon::prelude::*;

use crate::covariates::CovariateSet;
use crate::error::{Error, Result};
use crate::linalg::{fit_two_way, spectral_norm, svt, TwoWayFit};
use crate::panel::{Mask, PanelMatrix};
use crate::rng::{master_rng, task_rng};
use crate::scalar::{abs, c64, fmax, Scalar};

/// Default iteration cap for the alternating solver.
pub const DEFAULT_MAX_ITER: usize = 500;
/// Default relative-objective convergence tolerance.
pub const DEFAULT_TOL: f64 = 1e-6;
/// Default number of points on the regularization path.
pub const DEFAULT_GRID_LEN: usize = 20;
/// Smallest grid value relative to the largest.
const GRID_FLOOR: f64 = 1e-4;
/// Effect sweeps interleaved with each SVD update.
const EFFECT_SWEEPS: usize = 4;

/// Fitted matrix-completion model.
#[derive(Debug, Clone)]
pub struct McnnmFit<T: Scalar> {
    /// Low-rank component, N×T.
    pub l_hat: DMatrix<T>,
    /// Unit-covariate coefficients (length P).
    pub beta_hat: DVector<T>,
    /// Unit effects, absorbing the grand mean (length N).
    pub gamma_hat: DVector<T>,
    /// Time effects (length T).
    pub delta_hat: DVector<T>,
    /// Regularization strength used.
    pub lambda: T,
    /// Singular values surviving the final soft-threshold.
    pub rank: usize,
    /// Residuals on observed cells, zero elsewhere.
    pub residuals: DMatrix<T>,
    /// Complete prediction `L + X beta + gamma + delta`.
    pub y_hat: DMatrix<T>,
    /// Penalized objective after each iteration (index 0 is the start).
    pub objective_trace: Vec<T>,
    pub iterations: usize,
    pub converged: bool,
}

/// A counterfactual prediction at one masked cell.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CounterfactualCell<T> {
    pub unit: usize,
    pub period: usize,
    pub value: T,
}

/// Cross-validation settings for the regularization path.
#[derive(Debug, Clone)]
pub struct CvConfig<T: Scalar> {
    /// Decreasing nonnegative grid.
    pub lambda_grid: Vec<T>,
    pub n_folds: usize,
    pub max_iter: usize,
    pub tol: T,
    pub seed: u64,
}

impl<T: Scalar> CvConfig<T> {
    pub fn new(lambda_grid: Vec<T>, n_folds: usize, seed: u64) -> Result<Self> {
        let config = Self {
            lambda_grid,
            n_folds,
            max_iter: DEFAULT_MAX_ITER,
            tol: c64(DEFAULT_TOL),
            seed,
        };
        config.validate()?;
        Ok(config)
    }

    /// Grid of `k` log-spaced values from the data-driven maximum down to
    /// `1e-4` of it.
    pub fn with_default_grid(
        panel: &PanelMatrix<T>,
        mask: &Mask,
        covariates: &CovariateSet<T>,
        n_folds: usize,
        k: usize,
        seed: u64,
    ) -> Result<Self> {
        let grid = default_lambda_grid(panel, mask, covariates, k)?;
        Self::new(grid, n_folds, seed)
    }

    fn validate(&self) -> Result<()> {
        if self.lambda_grid.is_empty() {
            return Err(Error::invalid("lambda grid is empty"));
        }
        if self.lambda_grid.iter().any(|l| *l < T::zero() || !l.is_finite()) {
            return Err(Error::invalid("lambda grid must be nonnegative and finite"));
        }
        if !self.lambda_grid.windows(2).all(|w| w[0] > w[1]) && self.lambda_grid.len() > 1 {
            return Err(Error::invalid("lambda grid must be strictly decreasing"));
        }
        if self.n_folds < 2 {
            return Err(Error::invalid("cross-validation needs at least 2 folds"));
        }
        if self.tol <= T::zero() {
            return Err(Error::invalid("tolerance must be positive"));
        }
        Ok(())
    }
}

/// Cross-validation outcome: the selected strength and the error curve.
#[derive(Debug, Clone)]
pub struct CvOutcome<T: Scalar> {
    pub lambda_star: T,
    /// `(lambda, mean held-out squared error)` in grid order.
    pub curve: Vec<(T, T)>,
    /// Set when every grid value produced an identical error.
    pub degenerate: bool,
}

/// Observation indicator: unmasked and finite.
fn observed_cells<T: Scalar>(panel: &PanelMatrix<T>, mask: &Mask) -> Result<DMatrix<bool>> {
    mask.check_shape(panel.n_units(), panel.n_periods())?;
    let values = panel.values();
    let obs = DMatrix::from_fn(panel.n_units(), panel.n_periods(), |i, j| {
        !mask.is_missing(i, j) && values[(i, j)].is_finite()
    });
    Ok(obs)
}

/// Smallest strength at which the low-rank component vanishes, computed from
/// the top singular value of the two-way-centered observed matrix.
pub fn lambda_max<T: Scalar>(
    panel: &PanelMatrix<T>,
    mask: &Mask,
    covariates: &CovariateSet<T>,
) -> Result<T> {
    let obs = observed_cells(panel, mask)?;
    let x = x_or_none(covariates);
    let fit = fit_two_way(panel.values(), &obs, x, None, 200, c64(1e-13))?;
    let resid = crate::linalg::two_way_residual(panel.values(), &obs, x, &fit);
    let n_obs = obs.iter().filter(|&&o| o).count();
    Ok(c64::<T>(2.0) * spectral_norm(&resid) / c64(n_obs as f64))
}

/// Log-spaced decreasing grid from [`lambda_max`] down to `1e-4` of it.
/// Degenerates to `[0]` when the centered matrix has no signal at all.
pub fn default_lambda_grid<T: Scalar>(
    panel: &PanelMatrix<T>,
    mask: &Mask,
    covariates: &CovariateSet<T>,
    k: usize,
) -> Result<Vec<T>> {
    if k == 0 {
        return Err(Error::invalid("grid length must be positive"));
    }
    let lmax = lambda_max(panel, mask, covariates)?;
    if lmax <= T::zero() {
        return Ok(vec![T::zero()]);
    }
    if k == 1 {
        return Ok(vec![lmax]);
    }
    let ratio = c64::<T>(GRID_FLOOR);
    let kf: T = c64((k - 1) as f64);
    Ok((0..k)
        .map(|i| lmax * ratio.powf(c64::<T>(i as f64) / kf))
        .collect())
}

fn x_or_none<T: Scalar>(covariates: &CovariateSet<T>) -> Option<&DMatrix<T>> {
    if covariates.p() > 0 {
        Some(covariates.values())
    } else {
        None
    }
}

/// Fit the matrix-completion model at a fixed strength.
///
/// Non-convergence at `max_iter` is reported through the `converged` flag,
/// not as an error. A unit or period with no observed cells is an error.
pub fn fit_mcnnm<T: Scalar>(
    panel: &PanelMatrix<T>,
    mask: &Mask,
    covariates: &CovariateSet<T>,
    lambda: T,
    max_iter: usize,
    tol: T,
) -> Result<McnnmFit<T>> {
    if lambda < T::zero() || !lambda.is_finite() {
        return Err(Error::invalid("lambda must be nonnegative and finite"));
    }
    if covariates.p() > 0 && covariates.n_units() != panel.n_units() {
        return Err(Error::invalid("covariate rows do not match panel units"));
    }
    let (n, t) = (panel.n_units(), panel.n_periods());
    let obs = observed_cells(panel, mask)?;
    let n_obs = obs.iter().filter(|&&o| o).count();
    if n_obs == 0 {
        return Err(Error::invalid("no observed cells"));
    }
    let y = panel.values();
    let x = x_or_none(covariates);
    let threshold = lambda * c64(n_obs as f64) / c64(2.0);

    let mut l = DMatrix::<T>::zeros(n, t);
    let mut effects = TwoWayFit::zeros(n, t, covariates.p());
    let mut nuclear_norm = T::zero();
    let mut rank = 0usize;

    let objective = |l: &DMatrix<T>, effects: &TwoWayFit<T>, nn: T| -> T {
        let mut sse = T::zero();
        for i in 0..n {
            for j in 0..t {
                if obs[(i, j)] {
                    let r = y[(i, j)] - l[(i, j)] - effects.predict_cell(x, i, j);
                    sse += r * r;
                }
            }
        }
        sse / c64(n_obs as f64) + lambda * nn
    };

    let mut trace = vec![objective(&l, &effects, nuclear_norm)];
    let mut converged = false;
    let mut iterations = 0;

    for iter in 1..=max_iter {
        iterations = iter;

        // Effects block: least squares on observed cells of Y - L.
        let y_minus_l = y - &l;
        effects = fit_two_way(&y_minus_l, &obs, x, Some(effects), EFFECT_SWEEPS, tol * c64(1e-2))?;

        // Low-rank block: refill missing cells with the current component,
        // then soft-threshold the SVD.
        let z = DMatrix::from_fn(n, t, |i, j| {
            if obs[(i, j)] {
                y[(i, j)] - effects.predict_cell(x, i, j)
            } else {
                l[(i, j)]
            }
        });
        let step = svt(&z, threshold)?;
        l = step.matrix;
        nuclear_norm = step.nuclear_norm;
        rank = step.rank;

        let obj = objective(&l, &effects, nuclear_norm);
        let prev = *trace.last().expect("trace is non-empty");
        trace.push(obj);
        if abs(prev - obj) <= tol * fmax(T::one(), abs(prev)) {
            converged = true;
            break;
        }
    }

    let y_hat = &l + effects.predict_matrix(x, n, t);
    let residuals = DMatrix::from_fn(n, t, |i, j| {
        if obs[(i, j)] {
            y[(i, j)] - y_hat[(i, j)]
        } else {
            T::zero()
        }
    });

    Ok(McnnmFit {
        l_hat: l,
        beta_hat: effects.beta,
        gamma_hat: effects.gamma,
        delta_hat: effects.delta,
        lambda,
        rank,
        residuals,
        y_hat,
        objective_trace: trace,
        iterations,
        converged,
    })
}

/// Select the strength by cross-validation on control units.
///
/// Each fold hides trailing blocks of a disjoint set of control rows, with
/// per-row lengths drawn from the treated units' adoption geometry, so the
/// held-out task mirrors the real forecasting problem.
pub fn cross_validate_lambda<T: Scalar>(
    panel: &PanelMatrix<T>,
    mask: &Mask,
    covariates: &CovariateSet<T>,
    config: &CvConfig<T>,
) -> Result<CvOutcome<T>> {
    config.validate()?;
    mask.check_shape(panel.n_units(), panel.n_periods())?;
    let t = panel.n_periods();

    let control_rows: Vec<usize> =
        (0..panel.n_units()).filter(|&i| mask.row_missing_count(i) == 0).collect();
    let treated_pre_lens: Vec<usize> = (0..panel.n_units())
        .filter_map(|i| {
            let missing = mask.row_missing_count(i);
            (missing > 0).then(|| t - missing)
        })
        .collect();
    if treated_pre_lens.is_empty() {
        return Err(Error::invalid("mask has no treated rows to mimic"));
    }
    if control_rows.len() < config.n_folds {
        return Err(Error::invalid(format!(
            "{} control units cannot form {} folds",
            control_rows.len(),
            config.n_folds
        )));
    }

    // Deterministic fold assignment, then per-fold adoption draws.
    let mut shuffled = control_rows;
    use rand::seq::SliceRandom;
    shuffled.shuffle(&mut master_rng(config.seed));
    let mut fold_masks = Vec::with_capacity(config.n_folds);
    for fold in 0..config.n_folds {
        let rows: Vec<usize> =
            shuffled.iter().copied().skip(fold).step_by(config.n_folds).collect();
        let mut rng = task_rng(config.seed, fold as u64);
        let mut extra = DMatrix::from_element(panel.n_units(), t, false);
        for &row in &rows {
            use rand::Rng;
            let pre_len = treated_pre_lens[rng.random_range(0..treated_pre_lens.len())];
            for j in pre_len..t {
                extra[(row, j)] = true;
            }
        }
        fold_masks.push((Mask::from_entries(extra)?, rows));
    }

    let tasks: Vec<(usize, usize)> = (0..config.n_folds)
        .flat_map(|f| (0..config.lambda_grid.len()).map(move |g| (f, g)))
        .collect();

    let results: Vec<Result<(usize, T, usize)>> = tasks
        .par_iter()
        .map(|&(f, g)| {
            let (extra, _) = &fold_masks[f];
            let lambda = config.lambda_grid[g];
            let train_mask = mask.union(extra)?;
            let fit = fit_mcnnm(panel, &train_mask, covariates, lambda, config.max_iter, config.tol)?;
            let y = panel.values();
            let mut se = T::zero();
            let mut count = 0usize;
            for (i, j) in extra.iter_missing() {
                let d = y[(i, j)] - fit.y_hat[(i, j)];
                se += d * d;
                count += 1;
            }
            Ok((g, se, count))
        })
        .collect();

    let mut se_by_lambda = vec![T::zero(); config.lambda_grid.len()];
    let mut count_by_lambda = vec![0usize; config.lambda_grid.len()];
    for r in results {
        let (g, se, count) = r?;
        se_by_lambda[g] += se;
        count_by_lambda[g] += count;
    }

    let curve: Vec<(T, T)> = config
        .lambda_grid
        .iter()
        .zip(se_by_lambda.iter().zip(&count_by_lambda))
        .map(|(&l, (&se, &c))| (l, se / c64(c as f64)))
        .collect();

    let degenerate = curve.windows(2).all(|w| w[0].1 == w[1].1);
    let lambda_star = if degenerate {
        config.lambda_grid[0]
    } else {
        // ties break toward the larger lambda, which comes first
        let mut best = 0usize;
        for (idx, &(_, err)) in curve.iter().enumerate() {
            if err < curve[best].1 {
                best = idx;
            }
        }
        config.lambda_grid[best]
    };

    Ok(CvOutcome { lambda_star, curve, degenerate })
}

/// Predictions at the mask's set cells, keyed by (unit, period) indices.
pub fn predict_counterfactuals<T: Scalar>(
    fit: &McnnmFit<T>,
    mask: &Mask,
) -> Result<Vec<CounterfactualCell<T>>> {
    mask.check_shape(fit.y_hat.nrows(), fit.y_hat.ncols())?;
    Ok(mask
        .iter_missing()
        .map(|(unit, period)| CounterfactualCell { unit, period, value: fit.y_hat[(unit, period)] })
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::panel::{build_mask, TreatmentPlan};
    use approx::assert_relative_eq;
    use nalgebra::DMatrix;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;
    use rand_distr::{Distribution, StandardNormal};

    fn panel_from(values: DMatrix<f64>) -> PanelMatrix<f64> {
        let n = values.nrows();
        let t = values.ncols();
        PanelMatrix::new(
            values,
            (0..n).map(|i| format!("u{i}")).collect(),
            (1..=t as i64).collect(),
        )
        .unwrap()
    }

    fn low_rank_panel(n: usize, t: usize, rank: usize, noise: f64, seed: u64) -> PanelMatrix<f64> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let u: DMatrix<f64> = DMatrix::from_fn(n, rank, |_, _| StandardNormal.sample(&mut rng));
        let v: DMatrix<f64> = DMatrix::from_fn(t, rank, |_, _| StandardNormal.sample(&mut rng));
        let mut y = u * v.transpose();
        for e in y.iter_mut() {
            let z: f64 = StandardNormal.sample(&mut rng);
            *e += noise * z;
        }
        panel_from(y)
    }

    fn trailing_mask(n: usize, t: usize, treated: usize, pre_len: usize) -> Mask {
        let plan = TreatmentPlan::from_pre_lens(
            (0..n).map(|i| (i >= n - treated).then_some(pre_len)).collect(),
            &(1..=t as i64).collect::<Vec<_>>(),
        )
        .unwrap();
        build_mask(&plan, n, t).unwrap()
    }

    #[test]
    fn lambda_zero_reproduces_complete_panel() {
        let panel = low_rank_panel(8, 10, 3, 0.2, 1);
        let mask = Mask::all_observed(8, 10);
        let covs = CovariateSet::empty(8);
        let fit = fit_mcnnm(&panel, &mask, &covs, 0.0, 200, 1e-10).unwrap();
        for i in 0..8 {
            for j in 0..10 {
                assert_relative_eq!(fit.y_hat[(i, j)], panel.values()[(i, j)], epsilon = 1e-6);
            }
        }
    }

    #[test]
    fn penalty_dominance_reduces_to_two_way_fit() {
        let panel = low_rank_panel(10, 12, 2, 0.3, 2);
        let mask = trailing_mask(10, 12, 3, 6);
        let covs = CovariateSet::empty(10);
        let lmax = lambda_max(&panel, &mask, &covs).unwrap();
        let fit = fit_mcnnm(&panel, &mask, &covs, lmax * 10.0, 500, 1e-12).unwrap();
        assert_eq!(fit.rank, 0);
        assert_relative_eq!(fit.l_hat.norm(), 0.0, epsilon = 1e-12);

        let obs = observed_cells(&panel, &mask).unwrap();
        let direct = fit_two_way(panel.values(), &obs, None, None, 5000, 1e-14).unwrap();
        let pred = direct.predict_matrix(None, 10, 12);
        for i in 0..10 {
            for j in 0..12 {
                assert_relative_eq!(fit.y_hat[(i, j)], pred[(i, j)], epsilon = 1e-6);
            }
        }
    }

    #[test]
    fn objective_is_monotone_nonincreasing() {
        for seed in 0..5 {
            let panel = low_rank_panel(12, 15, 2, 0.15, seed);
            let mask = trailing_mask(12, 15, 4, 8);
            let covs = CovariateSet::empty(12);
            let lmax = lambda_max(&panel, &mask, &covs).unwrap();
            let fit = fit_mcnnm(&panel, &mask, &covs, lmax * 0.1, 100, 1e-9).unwrap();
            for w in fit.objective_trace.windows(2) {
                assert!(
                    w[1] <= w[0] + 1e-10 * w[0].abs().max(1.0),
                    "objective increased: {} -> {} (seed {seed})",
                    w[0],
                    w[1]
                );
            }
        }
    }

    #[test]
    fn held_out_recovery_beats_noise_floor() {
        // rank-2 signal, sd-0.1 noise, trailing-block missingness
        let panel = low_rank_panel(40, 40, 2, 0.1, 3);
        let mask = trailing_mask(40, 40, 20, 20);
        let covs = CovariateSet::empty(40);
        let config = CvConfig::with_default_grid(&panel, &mask, &covs, 5, 10, 9).unwrap();
        let cv = cross_validate_lambda(&panel, &mask, &covs, &config).unwrap();
        let fit = fit_mcnnm(&panel, &mask, &covs, cv.lambda_star, 500, 1e-6).unwrap();
        let err = crate::metrics::rmse(panel.values(), &fit.y_hat, &mask).unwrap();
        assert!(err < 0.15, "held-out RMSE {err}");
    }

    #[test]
    fn cv_singleton_grid_returns_it() {
        let panel = low_rank_panel(8, 10, 1, 0.1, 4);
        let mask = trailing_mask(8, 10, 2, 5);
        let covs = CovariateSet::empty(8);
        let config = CvConfig::new(vec![0.37], 2, 5).unwrap();
        let cv = cross_validate_lambda(&panel, &mask, &covs, &config).unwrap();
        assert_eq!(cv.lambda_star, 0.37);
    }

    #[test]
    fn cv_on_pure_noise_selects_largest_lambda() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let y: DMatrix<f64> = DMatrix::from_fn(16, 20, |_, _| StandardNormal.sample(&mut rng));
        let panel = panel_from(y);
        let mask = trailing_mask(16, 20, 4, 10);
        let covs = CovariateSet::empty(16);
        let config = CvConfig::with_default_grid(&panel, &mask, &covs, 4, 8, 13).unwrap();
        let cv = cross_validate_lambda(&panel, &mask, &covs, &config).unwrap();
        assert_eq!(cv.lambda_star, config.lambda_grid[0]);
    }

    #[test]
    fn cv_on_strong_signal_prefers_smaller_lambda() {
        let panel = low_rank_panel(20, 24, 1, 0.01, 6);
        let mask = trailing_mask(20, 24, 5, 12);
        let covs = CovariateSet::empty(20);
        let config = CvConfig::with_default_grid(&panel, &mask, &covs, 4, 10, 21).unwrap();
        let cv = cross_validate_lambda(&panel, &mask, &covs, &config).unwrap();
        assert!(cv.lambda_star < config.lambda_grid[0]);
        let err_at_star =
            cv.curve.iter().find(|(l, _)| *l == cv.lambda_star).unwrap().1;
        assert!(err_at_star < cv.curve[0].1);
    }

    #[test]
    fn cv_flags_identical_errors() {
        // constant panel: every lambda fits exactly, all errors are zero
        let y = DMatrix::from_fn(8, 10, |i, _| i as f64);
        let panel = panel_from(y);
        let mask = trailing_mask(8, 10, 2, 5);
        let covs = CovariateSet::empty(8);
        let config = CvConfig::new(vec![1.0, 0.1, 0.01], 2, 3).unwrap();
        let cv = cross_validate_lambda(&panel, &mask, &covs, &config).unwrap();
        assert!(cv.degenerate);
        assert_eq!(cv.lambda_star, 1.0);
    }

    #[test]
    fn counterfactuals_match_recomposition() {
        let panel = low_rank_panel(10, 12, 2, 0.1, 8);
        let mask = trailing_mask(10, 12, 3, 6);
        let mut rng = ChaCha8Rng::seed_from_u64(17);
        let raw: DMatrix<f64> = DMatrix::from_fn(10, 2, |_, _| StandardNormal.sample(&mut rng));
        let covs = CovariateSet::from_raw(raw, vec!["x1".into(), "x2".into()]).unwrap();
        let fit = fit_mcnnm(&panel, &mask, &covs, 0.05, 300, 1e-9).unwrap();
        let cells = predict_counterfactuals(&fit, &mask).unwrap();
        assert_eq!(cells.len(), mask.n_missing());
        for cell in &cells {
            let mut expect = fit.l_hat[(cell.unit, cell.period)]
                + fit.gamma_hat[cell.unit]
                + fit.delta_hat[cell.period];
            for p in 0..covs.p() {
                expect += covs.values()[(cell.unit, p)] * fit.beta_hat[p];
            }
            assert_relative_eq!(cell.value, expect, epsilon = 1e-12);
        }
    }

    #[test]
    fn empty_mask_gives_no_counterfactuals() {
        let panel = low_rank_panel(6, 8, 1, 0.1, 9);
        let mask = Mask::all_observed(6, 8);
        let covs = CovariateSet::empty(6);
        let fit = fit_mcnnm(&panel, &mask, &covs, 0.1, 100, 1e-8).unwrap();
        assert!(predict_counterfactuals(&fit, &mask).unwrap().is_empty());
    }

    #[test]
    fn nuclear_norm_shrinks_monotonically_in_lambda() {
        let panel = low_rank_panel(14, 16, 3, 0.2, 10);
        let mask = trailing_mask(14, 16, 4, 8);
        let covs = CovariateSet::empty(14);
        let grid = default_lambda_grid(&panel, &mask, &covs, 8).unwrap();
        let mut last_nn = f64::INFINITY;
        for &lambda in &grid {
            let fit = fit_mcnnm(&panel, &mask, &covs, lambda, 300, 1e-8).unwrap();
            let nn: f64 = fit.l_hat.singular_values().iter().sum();
            assert!(
                nn <= last_nn + 1e-8,
                "nuclear norm rose from {last_nn} to {nn} at lambda {lambda}"
            );
            last_nn = nn;
        }
    }

    #[test]
    fn row_permutation_equivariance() {
        let panel = low_rank_panel(9, 11, 2, 0.2, 12);
        let mask = trailing_mask(9, 11, 3, 6);
        let covs = CovariateSet::empty(9);
        let fit = fit_mcnnm(&panel, &mask, &covs, 0.02, 400, 1e-10).unwrap();

        let perm: Vec<usize> = vec![4, 0, 7, 2, 8, 1, 5, 6, 3];
        let py = DMatrix::from_fn(9, 11, |i, j| panel.values()[(perm[i], j)]);
        let pm = DMatrix::from_fn(9, 11, |i, j| mask.is_missing(perm[i], j));
        let ppanel = panel_from(py);
        let pmask = Mask::from_entries(pm).unwrap();
        let pfit = fit_mcnnm(&ppanel, &pmask, &covs, 0.02, 400, 1e-10).unwrap();

        for i in 0..9 {
            for j in 0..11 {
                assert_relative_eq!(
                    pfit.y_hat[(i, j)],
                    fit.y_hat[(perm[i], j)],
                    epsilon = 1e-8,
                    max_relative = 1e-6
                );
            }
        }
    }

    #[test]
    fn all_missing_row_is_rejected() {
        let panel = low_rank_panel(6, 8, 1, 0.1, 14);
        let mut entries = DMatrix::from_element(6, 8, false);
        for j in 1..8 {
            entries[(5, j)] = true;
        }
        // hide the one remaining cell of the row as a non-finite value
        let mask = Mask::from_entries(entries).unwrap();
        let hidden = panel.masked_with_nan(&mask).unwrap();
        let mut values = hidden.values().clone();
        values[(5, 0)] = f64::NAN;
        let broken = PanelMatrix::new(
            values,
            hidden.unit_ids().to_vec(),
            hidden.time_ids().to_vec(),
        )
        .unwrap();
        let covs = CovariateSet::empty(6);
        assert!(fit_mcnnm(&broken, &mask, &covs, 0.1, 50, 1e-8).is_err());
    }
}
