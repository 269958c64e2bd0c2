//! Convergence diagnostics on post-warmup draws.

use super::{ChainOutput, PosteriorSamples};
use crate::error::{Error, Result};
use crate::hawkes::PARAM_NAMES;

/// R-hat above this triggers a warning.
pub const RHAT_WARNING: f64 = 1.05;

#[derive(Debug, Clone, PartialEq)]
pub struct ChainDiagnostics {
    /// Split-R-hat per parameter.
    pub rhat: [f64; 4],
    /// Effective sample size per parameter, over all chains.
    pub ess: [f64; 4],
    /// Mean acceptance statistic per chain.
    pub acceptance: Vec<f64>,
    pub divergences: Vec<usize>,
    /// NUTS transitions per chain that hit the maximum tree depth.
    pub max_depth_hits: Vec<usize>,
    pub step_sizes: Vec<f64>,
}

impl ChainDiagnostics {
    pub fn compute(samples: &PosteriorSamples, outputs: &[ChainOutput]) -> Result<Self> {
        let mut rhat = [0.0; 4];
        let mut ess = [0.0; 4];
        for k in 0..4 {
            let series = samples.series(k);
            rhat[k] = split_rhat(&series)?;
            ess[k] = effective_sample_size(&series)?;
        }
        Ok(ChainDiagnostics {
            rhat,
            ess,
            acceptance: outputs.iter().map(|c| c.acceptance).collect(),
            divergences: outputs.iter().map(|c| c.divergences).collect(),
            max_depth_hits: outputs.iter().map(|c| c.max_depth_hits).collect(),
            step_sizes: outputs.iter().map(|c| c.step_size).collect(),
        })
    }

    pub fn max_rhat(&self) -> f64 {
        self.rhat.iter().copied().fold(f64::NEG_INFINITY, f64::max)
    }

    pub fn warn_if_unconverged(&self) {
        for (name, r) in PARAM_NAMES.iter().zip(self.rhat) {
            if !(r < RHAT_WARNING) {
                log::warn!("split R-hat for {name} is {r:.3}");
            }
        }
        let divergent: usize = self.divergences.iter().sum();
        if divergent > 0 {
            log::warn!("{divergent} divergent transitions after warmup");
        }
        let saturated: usize = self.max_depth_hits.iter().sum();
        if saturated > 0 {
            log::warn!("{saturated} transitions hit the maximum tree depth");
        }
    }
}

fn mean(x: &[f64]) -> f64 {
    x.iter().sum::<f64>() / x.len() as f64
}

fn variance(x: &[f64]) -> f64 {
    let m = mean(x);
    x.iter().map(|v| (v - m).powi(2)).sum::<f64>() / (x.len() as f64 - 1.0)
}

fn check_chains(chains: &[Vec<f64>], min_len: usize) -> Result<usize> {
    let n = chains.first().map_or(0, Vec::len);
    if chains.is_empty() || n < min_len || chains.iter().any(|c| c.len() != n) {
        return Err(Error::Degenerate(format!(
            "diagnostics need equal-length chains of at least {min_len} draws"
        )));
    }
    Ok(n)
}

/// Potential scale reduction with every chain split in half (a trailing
/// draw of odd-length chains is dropped). Returns 1 when all draws are equal.
pub fn split_rhat(chains: &[Vec<f64>]) -> Result<f64> {
    let n = check_chains(chains, 4)?;
    let half = n / 2;
    let halves: Vec<&[f64]> = chains
        .iter()
        .flat_map(|c| [&c[..half], &c[half..2 * half]])
        .collect();
    let m = halves.len() as f64;
    let len = half as f64;
    let means: Vec<f64> = halves.iter().map(|h| mean(h)).collect();
    let within = halves.iter().map(|h| variance(h)).sum::<f64>() / m;
    let grand = mean(&means);
    let between = len * means.iter().map(|x| (x - grand).powi(2)).sum::<f64>() / (m - 1.0);
    let var_plus = (len - 1.0) / len * within + between / len;
    if within == 0.0 {
        return Ok(if var_plus == 0.0 { 1.0 } else { f64::INFINITY });
    }
    Ok((var_plus / within).sqrt())
}

/// Autocovariance of `x` at `lag`, normalized by the series length.
fn autocovariance(x: &[f64], m: f64, lag: usize) -> f64 {
    let n = x.len();
    (0..n - lag)
        .map(|i| (x[i] - m) * (x[i + lag] - m))
        .sum::<f64>()
        / n as f64
}

/// Multi-chain effective sample size with Geyer's initial monotone positive
/// sequence, clamped to `(0, total draws]`.
pub fn effective_sample_size(chains: &[Vec<f64>]) -> Result<f64> {
    let n = check_chains(chains, 4)?;
    let total = (n * chains.len()) as f64;
    let means: Vec<f64> = chains.iter().map(|c| mean(c)).collect();
    let within = chains.iter().map(|c| variance(c)).sum::<f64>() / chains.len() as f64;
    let len = n as f64;
    let between = if chains.len() > 1 {
        let g = mean(&means);
        len * means.iter().map(|x| (x - g).powi(2)).sum::<f64>() / (chains.len() as f64 - 1.0)
    } else {
        0.0
    };
    let var_plus = (len - 1.0) / len * within + between / len;
    if var_plus == 0.0 {
        return Ok(total);
    }
    let rho = |lag: usize| {
        let acov = chains
            .iter()
            .zip(&means)
            .map(|(c, &m)| autocovariance(c, m, lag))
            .sum::<f64>()
            / chains.len() as f64;
        1.0 - (within - acov) / var_plus
    };
    let mut tau = -1.0;
    let mut previous = f64::INFINITY;
    let mut lag = 0;
    while lag + 1 < n {
        let pair = (rho(lag) + rho(lag + 1)).min(previous);
        if pair <= 0.0 {
            break;
        }
        tau += 2.0 * pair;
        previous = pair;
        lag += 2;
    }
    let ess = total / tau.max(1.0 / total.log10());
    Ok(ess.clamp(f64::MIN_POSITIVE, total))
}
