// temporary probe
use nalgebra::DMatrix;
use panelcf::covariates::CovariateSet;
use panelcf::mcnnm::*;
use panelcf::panel::{build_mask, Mask, PanelMatrix, TreatmentPlan};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

fn panel_from(values: DMatrix<f64>) -> PanelMatrix<f64> {
    let n = values.nrows();
    let t = values.ncols();
    PanelMatrix::new(values, (0..n).map(|i| format!("u{i}")).collect(), (1..=t as i64).collect()).unwrap()
}

fn low_rank_panel(n: usize, t: usize, rank: usize, noise: f64, seed: u64) -> (PanelMatrix<f64>, DMatrix<f64>) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let u: DMatrix<f64> = DMatrix::from_fn(n, rank, |_, _| StandardNormal.sample(&mut rng));
    let v: DMatrix<f64> = DMatrix::from_fn(t, rank, |_, _| StandardNormal.sample(&mut rng));
    let signal = u * v.transpose();
    let mut y = signal.clone();
    for e in y.iter_mut() {
        let z: f64 = StandardNormal.sample(&mut rng);
        *e += noise * z;
    }
    (panel_from(y), signal)
}

fn trailing_mask(n: usize, t: usize, treated: usize, pre_len: usize) -> Mask {
    let plan = TreatmentPlan::from_pre_lens(
        (0..n).map(|i| (i >= n - treated).then_some(pre_len)).collect(),
        &(1..=t as i64).collect::<Vec<_>>(),
    ).unwrap();
    build_mask(&plan, n, t).unwrap()
}

fn main() {
    // 1) rank-2 recovery: sweep grid, show held-out RMSE vs observed truth per lambda
    let (panel, _signal) = low_rank_panel(40, 40, 2, 0.1, 3);
    let mask = trailing_mask(40, 40, 20, 20);
    let covs = CovariateSet::empty(40);
    let grid = default_lambda_grid(&panel, &mask, &covs, 20).unwrap();
    println!("lambda_max = {}", grid[0]);
    for &l in &grid {
        let fit = fit_mcnnm(&panel, &mask, &covs, l, 500, 1e-6).unwrap();
        let err = panelcf::metrics::rmse(panel.values(), &fit.y_hat, &mask).unwrap();
        println!("lambda {:10.6}  rank {:2}  heldout-rmse {:.4}  iters {}", l, fit.rank, err, fit.iterations);
    }
    let config = CvConfig::with_default_grid(&panel, &mask, &covs, 5, 20, 9).unwrap();
    let cv = cross_validate_lambda(&panel, &mask, &covs, &config).unwrap();
    println!("CV curve:");
    for (l, e) in &cv.curve { println!("  lambda {:10.6}  cv-mse {:.5}", l, e); }
    println!("lambda_star = {}", cv.lambda_star);

    // 2) pure-noise CV curve
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let y: DMatrix<f64> = DMatrix::from_fn(16, 20, |_, _| StandardNormal.sample(&mut rng));
    let panel = panel_from(y);
    let mask = trailing_mask(16, 20, 4, 10);
    let covs = CovariateSet::empty(16);
    let config = CvConfig::with_default_grid(&panel, &mask, &covs, 4, 8, 13).unwrap();
    let cv = cross_validate_lambda(&panel, &mask, &covs, &config).unwrap();
    println!("noise CV curve:");
    for (l, e) in &cv.curve { println!("  lambda {:10.6}  cv-mse {:.5}", l, e); }
    println!("noise lambda_star = {}", cv.lambda_star);
}
