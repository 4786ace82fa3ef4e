//! Preprocessing pipeline for long-format outcome records: deflate, scale by
//! population, impute gaps regime-by-regime (LOCF then NOCB), log-transform,
//! and drop units without pre-period variance.

use std::collections::BTreeMap;

use nalgebra::DMatrix;

use crate::error::{Error, Result};
use crate::panel::PanelMatrix;
use crate::scalar::{c64, fmax, Scalar};

/// One long-format observation. `value: None` encodes a missing cell.
#[derive(Debug, Clone, PartialEq)]
pub struct LongRecord<T> {
    pub unit: String,
    pub time: i64,
    pub value: Option<T>,
}

/// Preprocessing settings.
///
/// The `split_time` separates the two imputation regimes; a period equal to
/// `split_time` belongs to the earlier (pre) regime. Deflator and population
/// series default to 1 when absent.
#[derive(Debug, Clone)]
pub struct PreprocessConfig<T: Scalar> {
    pub deflator: Option<BTreeMap<i64, T>>,
    pub population: Option<BTreeMap<(String, i64), T>>,
    pub split_time: i64,
    pub log_transform: bool,
}

impl<T: Scalar> PreprocessConfig<T> {
    /// Identity transform split at `split_time`.
    pub fn passthrough(split_time: i64) -> Self {
        Self { deflator: None, population: None, split_time, log_transform: false }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct PreprocessReport {
    /// Units removed because their pre-period outcomes had no variance.
    pub dropped_units: Vec<String>,
    /// Cells filled by carrying observations forward or backward.
    pub imputed_cells: usize,
}

/// Pivot long records into a complete, transformed [`PanelMatrix`].
///
/// Units are sorted lexicographically and periods ascending, so output row
/// and column order does not depend on record order.
pub fn preprocess<T: Scalar>(
    records: &[LongRecord<T>],
    config: &PreprocessConfig<T>,
) -> Result<(PanelMatrix<T>, PreprocessReport)> {
    if records.is_empty() {
        return Err(Error::invalid("no records to preprocess"));
    }
    let mut units: Vec<String> = records.iter().map(|r| r.unit.clone()).collect();
    units.sort();
    units.dedup();
    let mut times: Vec<i64> = records.iter().map(|r| r.time).collect();
    times.sort_unstable();
    times.dedup();

    let unit_idx: BTreeMap<&str, usize> =
        units.iter().enumerate().map(|(i, u)| (u.as_str(), i)).collect();
    let time_idx: BTreeMap<i64, usize> =
        times.iter().enumerate().map(|(j, &t)| (t, j)).collect();

    let (n, t_len) = (units.len(), times.len());
    let mut grid = DMatrix::from_element(n, t_len, crate::scalar::nan());
    let mut seen = DMatrix::from_element(n, t_len, false);
    for rec in records {
        let i = unit_idx[rec.unit.as_str()];
        let j = time_idx[&rec.time];
        if seen[(i, j)] {
            return Err(Error::invalid(format!(
                "duplicate record for unit {:?} at time {}",
                rec.unit, rec.time
            )));
        }
        seen[(i, j)] = true;
        if let Some(v) = rec.value {
            if !v.is_finite() {
                return Err(Error::invalid(format!(
                    "non-finite value for unit {:?} at time {}",
                    rec.unit, rec.time
                )));
            }
            grid[(i, j)] = adjust(v, &rec.unit, rec.time, config)?;
        }
    }

    // Imputation happens independently within the pre and post regimes.
    let pre_cols: Vec<usize> =
        (0..t_len).filter(|&j| times[j] <= config.split_time).collect();
    let post_cols: Vec<usize> =
        (0..t_len).filter(|&j| times[j] > config.split_time).collect();

    let mut imputed = 0usize;
    for i in 0..n {
        for (regime, cols) in [("pre", &pre_cols), ("post", &post_cols)] {
            if cols.is_empty() {
                continue;
            }
            if cols.iter().all(|&j| crate::scalar::is_nan(grid[(i, i_col(j))])) {
                return Err(Error::invalid(format!(
                    "unit {:?} has no observations in the {regime} regime",
                    units[i]
                )));
            }
            imputed += fill_regime(&mut grid, i, cols);
        }
    }

    if config.log_transform {
        for i in 0..n {
            for j in 0..t_len {
                let v = grid[(i, j)];
                if v <= T::zero() {
                    return Err(Error::invalid(format!(
                        "nonpositive value {v} for unit {:?} at time {} under log transform",
                        units[i], times[j]
                    )));
                }
                grid[(i, j)] = v.ln();
            }
        }
    }

    // Drop units whose pre-period outcomes are constant.
    let mut keep = Vec::new();
    let mut dropped_units = Vec::new();
    for i in 0..n {
        if pre_cols.is_empty() {
            keep.push(i);
            continue;
        }
        let vals: Vec<T> = pre_cols.iter().map(|&j| grid[(i, j)]).collect();
        let nf: T = c64(vals.len() as f64);
        let mean = vals.iter().copied().sum::<T>() / nf;
        let var = vals.iter().map(|&v| (v - mean) * (v - mean)).sum::<T>() / nf;
        if var <= c64::<T>(1e-12) * fmax(T::one(), mean * mean) {
            dropped_units.push(units[i].clone());
        } else {
            keep.push(i);
        }
    }
    if keep.len() < 2 {
        return Err(Error::invalid(format!(
            "fewer than two units remain after dropping constant pre-period units ({dropped_units:?})"
        )));
    }

    let values = DMatrix::from_fn(keep.len(), t_len, |i, j| grid[(keep[i], j)]);
    let kept_units: Vec<String> = keep.iter().map(|&i| units[i].clone()).collect();
    let panel = PanelMatrix::new(values, kept_units, times)?;
    debug_assert!(panel.is_complete());
    Ok((panel, PreprocessReport { dropped_units, imputed_cells: imputed }))
}

fn i_col(j: usize) -> usize {
    j
}

fn adjust<T: Scalar>(
    v: T,
    unit: &str,
    time: i64,
    config: &PreprocessConfig<T>,
) -> Result<T> {
    let mut out = v;
    if let Some(deflator) = &config.deflator {
        let d = *deflator.get(&time).ok_or_else(|| {
            Error::invalid(format!("deflator missing for time {time}"))
        })?;
        if d <= T::zero() {
            return Err(Error::invalid(format!("deflator at time {time} is not positive")));
        }
        out /= d;
    }
    if let Some(population) = &config.population {
        let p = *population
            .get(&(unit.to_string(), time))
            .ok_or_else(|| Error::invalid(format!("population missing for {unit:?} at {time}")))?;
        if p <= T::zero() {
            return Err(Error::invalid(format!(
                "population for {unit:?} at time {time} is not positive"
            )));
        }
        out /= p;
    }
    Ok(out)
}

/// LOCF within `cols`, then NOCB for any leading gap. Returns filled count.
fn fill_regime<T: Scalar>(grid: &mut DMatrix<T>, unit: usize, cols: &[usize]) -> usize {
    let mut filled = 0;
    let mut last: Option<T> = None;
    for &j in cols {
        let v = grid[(unit, j)];
        if crate::scalar::is_nan(v) {
            if let Some(l) = last {
                grid[(unit, j)] = l;
                filled += 1;
            }
        } else {
            last = Some(v);
        }
    }
    let mut next: Option<T> = None;
    for &j in cols.iter().rev() {
        let v = grid[(unit, j)];
        if crate::scalar::is_nan(v) {
            let n = next.expect("regime has at least one observation");
            grid[(unit, j)] = n;
            filled += 1;
        } else {
            next = Some(v);
        }
    }
    filled
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn rec(unit: &str, time: i64, value: Option<f64>) -> LongRecord<f64> {
        LongRecord { unit: unit.into(), time, value }
    }

    #[test]
    fn locf_then_nocb_within_regime() {
        // (missing, 5, missing, 7) -> (5, 5, 5, 7)
        let records = vec![
            rec("a", 1, None),
            rec("a", 2, Some(5.0)),
            rec("a", 3, None),
            rec("a", 4, Some(7.0)),
            rec("b", 1, Some(1.0)),
            rec("b", 2, Some(2.0)),
            rec("b", 3, Some(3.0)),
            rec("b", 4, Some(4.0)),
        ];
        let (panel, report) = preprocess(&records, &PreprocessConfig::passthrough(4)).unwrap();
        let row: Vec<f64> = (0..4).map(|j| panel.values()[(0, j)]).collect();
        assert_eq!(row, vec![5.0, 5.0, 5.0, 7.0]);
        assert_eq!(report.imputed_cells, 2);
    }

    #[test]
    fn log_of_deflated_per_capita_value() {
        // raw 100, deflator 2, population 50 -> log(1) = 0
        let mut deflator = BTreeMap::new();
        deflator.insert(1, 2.0);
        deflator.insert(2, 2.0);
        let mut population = BTreeMap::new();
        for u in ["a", "b"] {
            for t in [1, 2] {
                population.insert((u.to_string(), t), 50.0);
            }
        }
        let config = PreprocessConfig {
            deflator: Some(deflator),
            population: Some(population),
            split_time: 2,
            log_transform: true,
        };
        let records = vec![
            rec("a", 1, Some(100.0)),
            rec("a", 2, Some(200.0)),
            rec("b", 1, Some(400.0)),
            rec("b", 2, Some(100.0)),
        ];
        let (panel, _) = preprocess(&records, &config).unwrap();
        assert_relative_eq!(panel.values()[(0, 0)], 0.0, epsilon = 1e-12);
    }

    #[test]
    fn constant_pre_period_unit_removed() {
        let records = vec![
            rec("flat", 1, Some(3.0)),
            rec("flat", 2, Some(3.0)),
            rec("flat", 3, Some(9.0)),
            rec("a", 1, Some(1.0)),
            rec("a", 2, Some(2.0)),
            rec("a", 3, Some(3.0)),
            rec("b", 1, Some(4.0)),
            rec("b", 2, Some(5.0)),
            rec("b", 3, Some(6.0)),
        ];
        let (panel, report) = preprocess(&records, &PreprocessConfig::passthrough(2)).unwrap();
        assert_eq!(panel.n_units(), 2);
        assert_eq!(report.dropped_units, vec!["flat".to_string()]);
    }

    #[test]
    fn missing_whole_regime_is_an_error() {
        let records = vec![
            rec("a", 1, Some(1.0)),
            rec("a", 2, None),
            rec("b", 1, Some(4.0)),
            rec("b", 2, Some(5.0)),
        ];
        // split at 1: unit a has nothing in the post regime
        let err = preprocess(&records, &PreprocessConfig::passthrough(1)).unwrap_err();
        assert!(err.to_string().contains("post regime"));
    }

    #[test]
    fn nonpositive_under_log_is_an_error() {
        let records = vec![
            rec("a", 1, Some(-1.0)),
            rec("a", 2, Some(2.0)),
            rec("b", 1, Some(4.0)),
            rec("b", 2, Some(5.0)),
        ];
        let config = PreprocessConfig {
            deflator: None,
            population: None,
            split_time: 2,
            log_transform: true,
        };
        assert!(preprocess(&records, &config).is_err());
    }

    #[test]
    fn duplicate_record_rejected() {
        let records = vec![
            rec("a", 1, Some(1.0)),
            rec("a", 1, Some(2.0)),
            rec("b", 1, Some(4.0)),
        ];
        assert!(preprocess(&records, &PreprocessConfig::passthrough(1)).is_err());
    }

    #[test]
    fn idempotent_on_complete_untransformed_data() {
        let records: Vec<LongRecord<f64>> = (0..3)
            .flat_map(|i| {
                (1..=4).map(move |t| rec(&format!("u{i}"), t, Some((i * 4 + t as usize) as f64)))
            })
            .collect();
        let config = PreprocessConfig::passthrough(2);
        let (p1, r1) = preprocess(&records, &config).unwrap();
        let back: Vec<LongRecord<f64>> = (0..p1.n_units())
            .flat_map(|i| {
                let p = &p1;
                (0..p.n_periods()).map(move |j| LongRecord {
                    unit: p.unit_ids()[i].clone(),
                    time: p.time_ids()[j],
                    value: Some(p.values()[(i, j)]),
                })
            })
            .collect();
        let (p2, r2) = preprocess(&back, &config).unwrap();
        assert_eq!(p1, p2);
        assert_eq!(r1.imputed_cells, 0);
        assert_eq!(r2.imputed_cells, 0);
    }
}
