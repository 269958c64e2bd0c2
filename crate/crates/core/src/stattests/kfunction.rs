//! Space-time K-function and its ratio to the product of the marginal
//! K-functions.
//!
//! ```text
//! K(s, t) = |S| T / (n (n - 1)) * #{ordered pairs: d <= s, |dt| <= t}
//! K(s)    = |S|   / (n (n - 1)) * #{ordered pairs: d <= s}
//! K(t)    =     T / (n (n - 1)) * #{ordered pairs: |dt| <= t}
//! ratio   = K(s, t) / (K(s) K(t))
//! ```
//!
//! Without edge correction, independence of space and time gives a ratio of
//! one up to edge effects; the permutation envelope provides the reference
//! band instead.

use std::fmt::Write as _;

use rand::seq::SliceRandom;
use rayon::prelude::*;

use super::{check_not_degenerate, for_each_pair, PairMethod};
use crate::catalog::EventCatalog;
use crate::error::{Error, Result};
use crate::inference::quantile;
use crate::rng::{derive_seed, substream};

const KFUNCTION_SALT: u64 = 0x4b46_554e;

/// Pointwise band of the ratio under time permutation.
#[derive(Debug, Clone, PartialEq)]
pub struct Envelope {
    pub replicates: usize,
    /// 2.5% quantile, `[s][t]`.
    pub lower: Vec<Vec<f64>>,
    /// 97.5% quantile, `[s][t]`.
    pub upper: Vec<Vec<f64>>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct KFunctionResult {
    pub s_grid: Vec<f64>,
    pub t_grid: Vec<f64>,
    /// `k_st[s][t]`.
    pub k_st: Vec<Vec<f64>>,
    pub k_s: Vec<f64>,
    pub k_t: Vec<f64>,
    /// NaN where `K(s) K(t) = 0`.
    pub ratio: Vec<Vec<f64>>,
    pub envelope: Option<Envelope>,
}

impl KFunctionResult {
    /// Whether the observed ratio lies above the envelope at `(si, ti)`.
    pub fn exceeds_envelope(&self, si: usize, ti: usize) -> Option<bool> {
        self.envelope
            .as_ref()
            .map(|e| self.ratio[si][ti] > e.upper[si][ti])
    }

    /// Whether the observed ratio lies within the envelope at `(si, ti)`.
    pub fn within_envelope(&self, si: usize, ti: usize) -> Option<bool> {
        self.envelope.as_ref().map(|e| {
            let r = self.ratio[si][ti];
            e.lower[si][ti] <= r && r <= e.upper[si][ti]
        })
    }
}

fn check_grid(name: &str, grid: &[f64]) -> Result<()> {
    if grid.is_empty() {
        return Err(Error::InvalidArgument(format!("{name} grid is empty")));
    }
    let ok = grid.iter().all(|v| v.is_finite() && *v > 0.0) && grid.windows(2).all(|w| w[0] < w[1]);
    if !ok {
        return Err(Error::InvalidArgument(format!(
            "{name} grid must be positive and strictly increasing"
        )));
    }
    Ok(())
}

/// Index of the first grid value `>= v`, i.e. the first cumulative bin that
/// counts `v`; `grid.len()` when `v` exceeds the grid.
fn bin(grid: &[f64], v: f64) -> usize {
    grid.partition_point(|&g| g < v)
}

/// Cumulative counts along both axes of a histogram `[s][t]`.
fn cumulate(hist: &mut [Vec<u64>]) {
    for row in hist.iter_mut() {
        for j in 1..row.len() {
            row[j] += row[j - 1];
        }
    }
    for i in 1..hist.len() {
        for j in 0..hist[i].len() {
            hist[i][j] += hist[i - 1][j];
        }
    }
}

struct Counts {
    /// Spatially close pairs `(i, j, s bin)`.
    pairs: Vec<(u32, u32, u32)>,
    k_s: Vec<f64>,
    k_t: Vec<f64>,
    scale_st: f64,
}

impl Counts {
    fn st_counts(&self, times: &[f64], t_grid: &[f64], ns: usize) -> Vec<Vec<u64>> {
        let t_max = t_grid[t_grid.len() - 1];
        let mut hist = vec![vec![0u64; t_grid.len()]; ns];
        for &(i, j, sb) in &self.pairs {
            let dt = (times[i as usize] - times[j as usize]).abs();
            if dt <= t_max {
                hist[sb as usize][bin(t_grid, dt)] += 2;
            }
        }
        cumulate(&mut hist);
        hist
    }

    fn ratio(&self, st: &[Vec<u64>]) -> (Vec<Vec<f64>>, Vec<Vec<f64>>) {
        let k_st: Vec<Vec<f64>> = st
            .iter()
            .map(|row| row.iter().map(|&c| self.scale_st * c as f64).collect())
            .collect();
        let ratio = k_st
            .iter()
            .zip(&self.k_s)
            .map(|(row, ks)| {
                row.iter()
                    .zip(&self.k_t)
                    .map(|(k, kt)| {
                        let denom = ks * kt;
                        if denom > 0.0 {
                            k / denom
                        } else {
                            f64::NAN
                        }
                    })
                    .collect()
            })
            .collect();
        (k_st, ratio)
    }
}

fn marginal_counts(
    catalog: &EventCatalog,
    s_grid: &[f64],
    t_grid: &[f64],
    method: PairMethod,
) -> Counts {
    let events = catalog.events();
    let n = events.len() as f64;
    let pairs_norm = n * (n - 1.0);
    let s_max = s_grid[s_grid.len() - 1];
    let t_max = t_grid[t_grid.len() - 1];

    let mut s_hist = vec![0u64; s_grid.len()];
    let mut pairs = Vec::new();
    for_each_pair(events, s_max, method, |i, j, d| {
        let b = bin(s_grid, d);
        s_hist[b] += 2;
        pairs.push((i as u32, j as u32, b as u32));
    });
    let mut t_hist = vec![0u64; t_grid.len()];
    for (i, a) in events.iter().enumerate() {
        for b in &events[i + 1..] {
            let dt = b.t - a.t;
            if dt > t_max {
                break;
            }
            t_hist[bin(t_grid, dt)] += 2;
        }
    }
    let cum = |h: &mut Vec<u64>| {
        for k in 1..h.len() {
            h[k] += h[k - 1];
        }
    };
    cum(&mut s_hist);
    cum(&mut t_hist);
    let area = catalog.region().area();
    let window = catalog.window();
    Counts {
        pairs,
        k_s: s_hist
            .iter()
            .map(|&c| area / pairs_norm * c as f64)
            .collect(),
        k_t: t_hist
            .iter()
            .map(|&c| window / pairs_norm * c as f64)
            .collect(),
        scale_st: area * window / pairs_norm,
    }
}

fn validated(catalog: &EventCatalog, s_grid: &[f64], t_grid: &[f64]) -> Result<()> {
    check_grid("distance", s_grid)?;
    check_grid("time", t_grid)?;
    check_not_degenerate(catalog.events())
}

/// K-functions on the grids, without an envelope.
pub fn st_kfunction(
    catalog: &EventCatalog,
    s_grid: &[f64],
    t_grid: &[f64],
) -> Result<KFunctionResult> {
    validated(catalog, s_grid, t_grid)?;
    Ok(compute(catalog, s_grid, t_grid, PairMethod::Auto))
}

fn compute(
    catalog: &EventCatalog,
    s_grid: &[f64],
    t_grid: &[f64],
    method: PairMethod,
) -> KFunctionResult {
    let counts = marginal_counts(catalog, s_grid, t_grid, method);
    let times: Vec<f64> = catalog.events().iter().map(|e| e.t).collect();
    let st = counts.st_counts(&times, t_grid, s_grid.len());
    let (k_st, ratio) = counts.ratio(&st);
    KFunctionResult {
        s_grid: s_grid.to_vec(),
        t_grid: t_grid.to_vec(),
        k_st,
        k_s: counts.k_s,
        k_t: counts.k_t,
        ratio,
        envelope: None,
    }
}

/// K-functions plus a pointwise 2.5%-97.5% envelope of the ratio from
/// `replicates` permutations of the event times. Only `K(s, t)` changes
/// under permutation; the marginals are shared.
pub fn st_kfunction_envelope(
    catalog: &EventCatalog,
    s_grid: &[f64],
    t_grid: &[f64],
    replicates: usize,
    seed: u64,
) -> Result<KFunctionResult> {
    validated(catalog, s_grid, t_grid)?;
    if replicates < 2 {
        return Err(Error::InvalidArgument(
            "envelope needs at least 2 replicates".into(),
        ));
    }
    let counts = marginal_counts(catalog, s_grid, t_grid, PairMethod::Auto);
    let times: Vec<f64> = catalog.events().iter().map(|e| e.t).collect();
    let (k_st, ratio) = counts.ratio(&counts.st_counts(&times, t_grid, s_grid.len()));
    let perm_seed = derive_seed(seed, KFUNCTION_SALT);
    let null: Vec<Vec<Vec<f64>>> = (0..replicates)
        .into_par_iter()
        .map(|r| {
            let mut shuffled = times.clone();
            shuffled.shuffle(&mut substream(perm_seed, r as u64));
            counts
                .ratio(&counts.st_counts(&shuffled, t_grid, s_grid.len()))
                .1
        })
        .collect();
    let band = |p: f64| -> Vec<Vec<f64>> {
        (0..s_grid.len())
            .map(|i| {
                (0..t_grid.len())
                    .map(|j| {
                        let mut v: Vec<f64> = null
                            .iter()
                            .map(|r| r[i][j])
                            .filter(|x| !x.is_nan())
                            .collect();
                        if v.is_empty() {
                            return f64::NAN;
                        }
                        v.sort_by(f64::total_cmp);
                        quantile(&v, p)
                    })
                    .collect()
            })
            .collect()
    };
    Ok(KFunctionResult {
        s_grid: s_grid.to_vec(),
        t_grid: t_grid.to_vec(),
        k_st,
        k_s: counts.k_s,
        k_t: counts.k_t,
        ratio,
        envelope: Some(Envelope {
            replicates,
            lower: band(0.025),
            upper: band(0.975),
        }),
    })
}

/// Long-form `s,t,ratio,band_lo,band_hi`; band columns are empty without an
/// envelope.
pub fn kfunction_csv(result: &KFunctionResult) -> String {
    let mut out = String::from("s,t,ratio,band_lo,band_hi\n");
    for (i, s) in result.s_grid.iter().enumerate() {
        for (j, t) in result.t_grid.iter().enumerate() {
            let (lo, hi) = match &result.envelope {
                Some(e) => (e.lower[i][j].to_string(), e.upper[i][j].to_string()),
                None => (String::new(), String::new()),
            };
            writeln!(out, "{s},{t},{},{lo},{hi}", result.ratio[i][j])
                .expect("writing to a String cannot fail");
        }
    }
    out
}
