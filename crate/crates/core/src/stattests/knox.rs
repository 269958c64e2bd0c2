//! Knox test: counts event pairs that are close in both space and time and
//! compares the count against permutations of the event times.

use rand::seq::SliceRandom;
use rayon::prelude::*;

use super::{check_not_degenerate, for_each_pair, PairMethod};
use crate::catalog::EventCatalog;
use crate::error::{Error, Result};
use crate::rng::{derive_seed, substream};

const KNOX_SALT: u64 = 0x4b4e_4f58;

#[derive(Debug, Clone, PartialEq)]
pub struct KnoxResult {
    pub s_cut: f64,
    pub t_cut: f64,
    /// Unordered pair counts, `[space close/far][time close/far]`.
    pub contingency: [[u64; 2]; 2],
    /// Pairs close in both space and time.
    pub statistic: u64,
    /// `(1 + b) / (1 + n_perm)` where `b` permutations reached the statistic.
    pub p_value: f64,
    pub n_perm: usize,
    /// Statistic of each permutation, in replicate order.
    pub null: Vec<u64>,
}

impl KnoxResult {
    pub fn pair_total(&self) -> u64 {
        self.contingency.iter().flatten().sum()
    }
}

/// Knox test with strict cutoffs `d < s_cut`, `|dt| < t_cut`.
pub fn knox_test(
    catalog: &EventCatalog,
    s_cut: f64,
    t_cut: f64,
    n_perm: usize,
    seed: u64,
) -> Result<KnoxResult> {
    knox_test_with(catalog, s_cut, t_cut, n_perm, seed, PairMethod::Auto)
}

pub fn knox_test_with(
    catalog: &EventCatalog,
    s_cut: f64,
    t_cut: f64,
    n_perm: usize,
    seed: u64,
    method: PairMethod,
) -> Result<KnoxResult> {
    if !(s_cut > 0.0 && t_cut > 0.0 && s_cut.is_finite() && t_cut.is_finite()) {
        return Err(Error::InvalidArgument(format!(
            "Knox cutoffs must be positive, got {s_cut}, {t_cut}"
        )));
    }
    if n_perm < 99 {
        return Err(Error::InvalidArgument(format!(
            "Knox test needs at least 99 permutations, got {n_perm}"
        )));
    }
    let events = catalog.events();
    check_not_degenerate(events)?;
    let n = events.len() as u64;

    let mut close: Vec<(u32, u32)> = Vec::new();
    for_each_pair(events, s_cut, method, |i, j, d| {
        if d < s_cut {
            close.push((i as u32, j as u32));
        }
    });
    let times: Vec<f64> = events.iter().map(|e| e.t).collect();
    let count = |times: &[f64]| {
        close
            .iter()
            .filter(|&&(i, j)| (times[i as usize] - times[j as usize]).abs() < t_cut)
            .count() as u64
    };
    let statistic = count(&times);

    // Times are sorted, so pairs close in time form a sliding window.
    let mut time_close = 0u64;
    let mut lo = 0;
    for (j, &t) in times.iter().enumerate() {
        while t - times[lo] >= t_cut {
            lo += 1;
        }
        time_close += (j - lo) as u64;
    }
    let space_close = close.len() as u64;
    let total = n * (n - 1) / 2;
    let contingency = [
        [statistic, space_close - statistic],
        [
            time_close - statistic,
            total + statistic - space_close - time_close,
        ],
    ];

    let perm_seed = derive_seed(seed, KNOX_SALT);
    let null: Vec<u64> = (0..n_perm)
        .into_par_iter()
        .map(|r| {
            let mut shuffled = times.clone();
            shuffled.shuffle(&mut substream(perm_seed, r as u64));
            count(&shuffled)
        })
        .collect();
    let exceed = null.iter().filter(|&&s| s >= statistic).count();
    Ok(KnoxResult {
        s_cut,
        t_cut,
        contingency,
        statistic,
        p_value: (1 + exceed) as f64 / (1 + n_perm) as f64,
        n_perm,
        null,
    })
}

/// One-row CSV with the cutoffs, statistic, p-value and contingency table.
pub fn knox_csv(result: &KnoxResult) -> String {
    let [[cc, cf], [fc, ff]] = result.contingency;
    format!(
        "s_cut_km,t_cut_days,statistic,p_value,n_perm,close_close,close_far,far_close,far_far\n\
         {},{},{},{},{},{cc},{cf},{fc},{ff}\n",
        result.s_cut, result.t_cut, result.statistic, result.p_value, result.n_perm
    )
}
