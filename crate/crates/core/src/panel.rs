//! Panel data model: outcome matrix, treatment plan, and missingness mask.
//!
//! An N×T outcome matrix holds one row per unit and one column per period.
//! Treated units adopt at a per-unit time `t0` (the last fully observed
//! pre-period); every later cell is a counterfactual to impute and carries a
//! set bit in the [`Mask`].

use nalgebra::DMatrix;

use crate::error::{Error, Result};
use crate::scalar::Scalar;

/// N×T outcome matrix with unit and time labels.
///
/// Entries may be non-finite (`NaN`) only when cells have been deliberately
/// hidden, e.g. by the placebo harness; preprocessing always yields a
/// complete matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct PanelMatrix<T: Scalar> {
    values: DMatrix<T>,
    unit_ids: Vec<String>,
    time_ids: Vec<i64>,
}

impl<T: Scalar> PanelMatrix<T> {
    pub fn new(values: DMatrix<T>, unit_ids: Vec<String>, time_ids: Vec<i64>) -> Result<Self> {
        let (n, t) = values.shape();
        if n < 2 || t < 2 {
            return Err(Error::invalid(format!("panel must be at least 2x2, got {n}x{t}")));
        }
        if unit_ids.len() != n {
            return Err(Error::invalid(format!(
                "{} unit ids for {} rows",
                unit_ids.len(),
                n
            )));
        }
        if time_ids.len() != t {
            return Err(Error::invalid(format!(
                "{} time ids for {} columns",
                time_ids.len(),
                t
            )));
        }
        let mut seen = std::collections::HashSet::new();
        for id in &unit_ids {
            if !seen.insert(id.as_str()) {
                return Err(Error::invalid(format!("duplicate unit id {id:?}")));
            }
        }
        if !time_ids.windows(2).all(|w| w[0] < w[1]) {
            return Err(Error::invalid("time ids must be strictly increasing"));
        }
        Ok(Self { values, unit_ids, time_ids })
    }

    pub fn n_units(&self) -> usize {
        self.values.nrows()
    }

    pub fn n_periods(&self) -> usize {
        self.values.ncols()
    }

    pub fn values(&self) -> &DMatrix<T> {
        &self.values
    }

    pub fn unit_ids(&self) -> &[String] {
        &self.unit_ids
    }

    pub fn time_ids(&self) -> &[i64] {
        &self.time_ids
    }

    pub fn unit_index(&self, unit: &str) -> Option<usize> {
        self.unit_ids.iter().position(|u| u == unit)
    }

    pub fn time_index(&self, time: i64) -> Option<usize> {
        self.time_ids.iter().position(|&t| t == time)
    }

    /// True when every entry is finite.
    pub fn is_complete(&self) -> bool {
        self.values.iter().all(|v| v.is_finite())
    }

    pub fn require_complete(&self) -> Result<()> {
        if self.is_complete() {
            Ok(())
        } else {
            Err(Error::invalid("panel contains non-finite entries"))
        }
    }

    /// Copy of the panel with the mask's set cells replaced by `NaN`.
    ///
    /// Estimators fit only on finite cells, so this is how the placebo
    /// harness guarantees hidden outcomes cannot leak into a fit.
    pub fn masked_with_nan(&self, mask: &Mask) -> Result<Self> {
        mask.check_shape(self.n_units(), self.n_periods())?;
        let mut values = self.values.clone();
        for (i, t) in mask.iter_missing() {
            values[(i, t)] = crate::scalar::nan();
        }
        Ok(Self { values, unit_ids: self.unit_ids.clone(), time_ids: self.time_ids.clone() })
    }

    /// Copy with a constant added to every masked cell (planted effects in
    /// simulations).
    pub fn with_planted_effect(&self, mask: &Mask, effect: T) -> Result<Self> {
        mask.check_shape(self.n_units(), self.n_periods())?;
        let mut values = self.values.clone();
        for (i, t) in mask.iter_missing() {
            values[(i, t)] += effect;
        }
        Ok(Self { values, unit_ids: self.unit_ids.clone(), time_ids: self.time_ids.clone() })
    }

    /// Copy restricted to the first `n_cols` columns.
    pub fn truncate_periods(&self, n_cols: usize) -> Result<Self> {
        if n_cols < 2 || n_cols > self.n_periods() {
            return Err(Error::invalid(format!(
                "cannot truncate {}-period panel to {} periods",
                self.n_periods(),
                n_cols
            )));
        }
        Ok(Self {
            values: self.values.columns(0, n_cols).into_owned(),
            unit_ids: self.unit_ids.clone(),
            time_ids: self.time_ids[..n_cols].to_vec(),
        })
    }
}

/// Per-unit adoption times. `t0` is the last observed pre-period of a
/// treated unit; control units carry `None`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TreatmentPlan {
    /// Aligned with panel rows: `Some(pre_len)` for treated units, where
    /// `pre_len` is the number of observed pre-period columns (the 1-based
    /// position of the `t0` column).
    pre_lens: Vec<Option<usize>>,
    /// Adoption time ids, aligned with `pre_lens`.
    adoption_times: Vec<Option<i64>>,
}

impl TreatmentPlan {
    /// Build from per-unit adoption time ids (`None` = control).
    pub fn new(adoption_times: Vec<Option<i64>>, time_ids: &[i64]) -> Result<Self> {
        let mut pre_lens = Vec::with_capacity(adoption_times.len());
        for (i, t0) in adoption_times.iter().enumerate() {
            match t0 {
                None => pre_lens.push(None),
                Some(t0) => {
                    let idx = time_ids.iter().position(|t| t == t0).ok_or_else(|| {
                        Error::invalid(format!("adoption time {t0} of unit {i} not in time grid"))
                    })?;
                    if idx == 0 {
                        return Err(Error::invalid(format!(
                            "unit {i} adopts at the first period {t0}; at least one earlier period is required"
                        )));
                    }
                    if idx + 1 == time_ids.len() {
                        return Err(Error::invalid(format!(
                            "unit {i} adopts at the last period {t0}; no post-period remains"
                        )));
                    }
                    pre_lens.push(Some(idx + 1));
                }
            }
        }
        let plan = Self { pre_lens, adoption_times };
        if plan.treated_count() == 0 {
            return Err(Error::invalid("treatment plan has no treated units"));
        }
        if plan.control_count() == 0 {
            return Err(Error::invalid("treatment plan has no control units"));
        }
        Ok(plan)
    }

    /// Build directly from pre-period lengths (for simulations).
    pub fn from_pre_lens(pre_lens: Vec<Option<usize>>, time_ids: &[i64]) -> Result<Self> {
        let adoption = pre_lens
            .iter()
            .map(|p| p.map(|len| time_ids[len - 1]))
            .collect();
        let plan = Self { pre_lens: pre_lens.clone(), adoption_times: adoption };
        for (i, p) in pre_lens.iter().enumerate() {
            if let Some(len) = p {
                if *len < 2 || *len >= time_ids.len() {
                    return Err(Error::invalid(format!(
                        "unit {i}: pre-period length {len} out of range for {} periods",
                        time_ids.len()
                    )));
                }
            }
        }
        if plan.treated_count() == 0 || plan.control_count() == 0 {
            return Err(Error::invalid("plan needs at least one treated and one control unit"));
        }
        Ok(plan)
    }

    pub fn n_units(&self) -> usize {
        self.pre_lens.len()
    }

    pub fn is_treated(&self, unit: usize) -> bool {
        self.pre_lens[unit].is_some()
    }

    /// Number of pre-period columns for a treated unit.
    pub fn pre_len(&self, unit: usize) -> Option<usize> {
        self.pre_lens[unit]
    }

    pub fn adoption_time(&self, unit: usize) -> Option<i64> {
        self.adoption_times[unit]
    }

    pub fn treated_indices(&self) -> Vec<usize> {
        (0..self.n_units()).filter(|&i| self.is_treated(i)).collect()
    }

    pub fn control_indices(&self) -> Vec<usize> {
        (0..self.n_units()).filter(|&i| !self.is_treated(i)).collect()
    }

    pub fn treated_count(&self) -> usize {
        self.pre_lens.iter().filter(|p| p.is_some()).count()
    }

    pub fn control_count(&self) -> usize {
        self.n_units() - self.treated_count()
    }

    /// Earliest treated pre-period length: the pooled boundary used for the
    /// shared post-period test window.
    pub fn pooled_pre_len(&self) -> usize {
        self.pre_lens.iter().flatten().copied().min().expect("plan has treated units")
    }

    /// Plan with every treated unit's adoption moved `tau` periods earlier.
    pub fn backdated(&self, tau: usize, new_pre_len: usize, time_ids: &[i64]) -> Result<Self> {
        let _ = tau;
        let pre_lens = self
            .pre_lens
            .iter()
            .map(|p| p.map(|_| new_pre_len))
            .collect::<Vec<_>>();
        Self::from_pre_lens(pre_lens, time_ids)
    }
}

/// Binary missingness matrix: a set bit marks a treated-and-post cell whose
/// no-treatment outcome is to be imputed.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Mask {
    entries: DMatrix<bool>,
}

impl Mask {
    /// Validate and wrap raw entries. Rows must be monotone (no `1 -> 0`
    /// transition: treatment is absorbing) and the first column observed.
    pub fn from_entries(entries: DMatrix<bool>) -> Result<Self> {
        for i in 0..entries.nrows() {
            let mut seen_missing = false;
            for t in 0..entries.ncols() {
                let m = entries[(i, t)];
                if seen_missing && !m {
                    return Err(Error::invalid(format!(
                        "mask row {i} reverts from missing to observed at column {t}"
                    )));
                }
                seen_missing |= m;
            }
            if entries[(i, 0)] {
                return Err(Error::invalid(format!("mask row {i} has no observed pre-period")));
            }
        }
        Ok(Self { entries })
    }

    pub fn all_observed(n_units: usize, n_periods: usize) -> Self {
        Self { entries: DMatrix::from_element(n_units, n_periods, false) }
    }

    pub fn n_units(&self) -> usize {
        self.entries.nrows()
    }

    pub fn n_periods(&self) -> usize {
        self.entries.ncols()
    }

    pub fn is_missing(&self, unit: usize, period: usize) -> bool {
        self.entries[(unit, period)]
    }

    pub fn entries(&self) -> &DMatrix<bool> {
        &self.entries
    }

    pub fn n_missing(&self) -> usize {
        self.entries.iter().filter(|&&m| m).count()
    }

    pub fn row_missing_count(&self, unit: usize) -> usize {
        self.entries.row(unit).iter().filter(|&&m| m).count()
    }

    /// Indices of missing cells in row-major order.
    pub fn iter_missing(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        let (n, t) = self.entries.shape();
        (0..n).flat_map(move |i| (0..t).map(move |j| (i, j))).filter(|&(i, j)| self.entries[(i, j)])
    }

    /// Union of two masks of identical shape.
    pub fn union(&self, other: &Mask) -> Result<Mask> {
        other.check_shape(self.n_units(), self.n_periods())?;
        let entries = DMatrix::from_fn(self.n_units(), self.n_periods(), |i, j| {
            self.entries[(i, j)] || other.entries[(i, j)]
        });
        Ok(Mask { entries })
    }

    pub(crate) fn check_shape(&self, n_units: usize, n_periods: usize) -> Result<()> {
        if self.n_units() != n_units || self.n_periods() != n_periods {
            return Err(Error::invalid(format!(
                "mask shape {}x{} does not match panel {}x{}",
                self.n_units(),
                self.n_periods(),
                n_units,
                n_periods
            )));
        }
        Ok(())
    }
}

/// Derive the missingness mask from a treatment plan: control rows are fully
/// observed; a treated row is observed through its `t0` column and missing
/// strictly after.
pub fn build_mask(plan: &TreatmentPlan, n_units: usize, n_periods: usize) -> Result<Mask> {
    if plan.n_units() != n_units {
        return Err(Error::invalid(format!(
            "plan covers {} units but the panel has {n_units}",
            plan.n_units()
        )));
    }
    let mut entries = DMatrix::from_element(n_units, n_periods, false);
    for i in 0..n_units {
        if let Some(pre_len) = plan.pre_len(i) {
            if pre_len >= n_periods {
                return Err(Error::invalid(format!(
                    "unit {i}: pre-period length {pre_len} leaves no post-period in {n_periods} columns"
                )));
            }
            if pre_len < 2 {
                return Err(Error::invalid(format!("unit {i}: fewer than two pre-periods")));
            }
            for t in pre_len..n_periods {
                entries[(i, t)] = true;
            }
        }
    }
    Mask::from_entries(entries)
}
