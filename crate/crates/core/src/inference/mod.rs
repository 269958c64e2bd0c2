//! Bayesian inference for [`HawkesParams`].
//!
//! The sampler works in log space, `z = ln(param)`, so that every draw is
//! strictly positive. Priors are half-normal style truncated normals on the
//! natural scale; the log-Jacobian `sum z_k` is included in the target.

mod diagnostics;
mod sampler;
mod summary;
mod trace;

use std::sync::OnceLock;

use rand::Rng;
use rayon::prelude::*;
use statrs::distribution::{ContinuousCDF, Normal};
use statrs::function::erf::erfc;

use crate::background::BackgroundModel;
use crate::catalog::EventCatalog;
use crate::error::{Error, Result};
use crate::hawkes::{HawkesParams, HistoryWindow, LikelihoodContext};

pub use diagnostics::{effective_sample_size, split_rhat, ChainDiagnostics};
pub use sampler::{run_chains, ChainOutput, Method, SamplerConfig};
pub use summary::{
    parse_summary_csv, quantile, summarize, summarize_values, summary_csv, summary_text, Summary,
};
pub use trace::{export_traceplots, parse_traceplot_csv, traceplot_csv, TRACEPLOT_HEADER};

/// Normal distribution truncated to `(0, inf)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TruncatedNormal {
    loc: f64,
    scale: f64,
    /// `ln(scale * sqrt(2 pi) * P(X > 0))`.
    log_norm: f64,
}

impl TruncatedNormal {
    pub fn new(loc: f64, scale: f64) -> Result<Self> {
        if !(loc.is_finite() && scale.is_finite() && scale > 0.0) {
            return Err(Error::InvalidArgument(format!(
                "truncated normal needs finite loc and positive scale, got ({loc}, {scale})"
            )));
        }
        let mass = 0.5 * erfc(-loc / (scale * std::f64::consts::SQRT_2));
        if mass <= 0.0 {
            return Err(Error::InvalidArgument(format!(
                "truncated normal ({loc}, {scale}) has no mass above zero"
            )));
        }
        let log_norm = (scale * (2.0 * std::f64::consts::PI).sqrt()).ln() + mass.ln();
        Ok(TruncatedNormal {
            loc,
            scale,
            log_norm,
        })
    }

    pub fn loc(&self) -> f64 {
        self.loc
    }

    pub fn scale(&self) -> f64 {
        self.scale
    }

    /// `-inf` for `x <= 0`.
    pub fn log_density(&self, x: f64) -> f64 {
        if x > 0.0 {
            let u = (x - self.loc) / self.scale;
            -0.5 * u * u - self.log_norm
        } else {
            f64::NEG_INFINITY
        }
    }

    pub fn d_log_density(&self, x: f64) -> f64 {
        -(x - self.loc) / (self.scale * self.scale)
    }

    /// Inverse-CDF draw.
    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        let std = Normal::new(0.0, 1.0).expect("unit normal");
        let lower = std.cdf(-self.loc / self.scale);
        loop {
            let u = rng.random_range(lower..1.0);
            let x = self.loc + self.scale * std.inverse_cdf(u);
            if x > 0.0 && x.is_finite() {
                return x;
            }
        }
    }
}

/// One truncated-normal prior per parameter, in [`crate::hawkes::PARAM_NAMES`] order.
///
/// Scales are standard deviations.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PriorSpec {
    pub m0: TruncatedNormal,
    pub theta: TruncatedNormal,
    pub omega: TruncatedNormal,
    pub sigma: TruncatedNormal,
}

impl Default for PriorSpec {
    /// `m0 ~ N+(0, 1)`, `theta, omega, sigma ~ N+(0, 10)`.
    fn default() -> Self {
        let half = |s| TruncatedNormal::new(0.0, s).expect("valid default prior");
        PriorSpec {
            m0: half(1.0),
            theta: half(10.0),
            omega: half(10.0),
            sigma: half(10.0),
        }
    }
}

impl PriorSpec {
    pub fn as_array(&self) -> [TruncatedNormal; 4] {
        [self.m0, self.theta, self.omega, self.sigma]
    }

    pub fn log_density(&self, params: &HawkesParams) -> f64 {
        self.as_array()
            .iter()
            .zip(params.as_array())
            .map(|(p, x)| p.log_density(x))
            .sum()
    }
}

/// An unnormalized log density on `R^dim`, with gradient.
pub trait LogDensity: Sync {
    fn dim(&self) -> usize;

    /// Value and gradient at `z`. Errors and non-finite values are treated by
    /// samplers as zero density.
    fn log_density_grad(&self, z: &[f64]) -> Result<(f64, Vec<f64>)>;

    /// A starting point for a chain.
    fn initial_point(&self, rng: &mut crate::rng::StreamRng) -> Vec<f64>;
}

/// Log posterior with its gradient in `z = ln(params)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LogPosterior {
    pub value: f64,
    pub gradient: [f64; 4],
}

/// Posterior of the Hawkes parameters given a catalog and a fitted background.
/// Parameters can be frozen at fixed values; the sampler then moves only the
/// free ones.
#[derive(Debug, Clone)]
pub struct HawkesPosterior {
    context: LikelihoodContext,
    priors: PriorSpec,
    frozen: [Option<f64>; 4],
    free: Vec<usize>,
    pilot: OnceLock<Option<Vec<f64>>>,
}

/// Pilot search grid for the branching ratio.
const PILOT_THETA: [f64; 3] = [0.05, 0.2, 0.5];
/// Pilot grids for `omega` (1/day) and `sigma` (km): powers of 3.
const PILOT_OMEGA: (f64, usize) = (0.1, 10);
const PILOT_SIGMA: (f64, usize) = (0.01, 7);
/// Half-width of the uniform jitter around the pilot point, in log units.
const INIT_JITTER: f64 = 0.5;

impl HawkesPosterior {
    pub fn new(catalog: &EventCatalog, bg: &BackgroundModel, priors: PriorSpec) -> Result<Self> {
        Ok(Self::from_context(
            LikelihoodContext::new(catalog, bg)?,
            priors,
        ))
    }

    pub fn from_context(context: LikelihoodContext, priors: PriorSpec) -> Self {
        HawkesPosterior {
            context,
            priors,
            frozen: [None; 4],
            free: (0..4).collect(),
            pilot: OnceLock::new(),
        }
    }

    pub fn with_history(mut self, history: HistoryWindow) -> Self {
        self.context = self.context.with_history(history);
        self
    }

    /// Fixes parameter `index` (in [`crate::hawkes::PARAM_NAMES`] order) at
    /// `value`.
    pub fn freeze(mut self, index: usize, value: f64) -> Result<Self> {
        let min = if index == 1 { 0.0 } else { f64::MIN_POSITIVE };
        if index >= 4 || !(value.is_finite() && value >= min) {
            return Err(Error::InvalidArgument(format!(
                "cannot freeze parameter {index} at {value}"
            )));
        }
        self.frozen[index] = Some(value);
        self.free.retain(|&k| k != index);
        self.pilot = OnceLock::new();
        Ok(self)
    }

    pub fn context(&self) -> &LikelihoodContext {
        &self.context
    }

    pub fn priors(&self) -> &PriorSpec {
        &self.priors
    }

    /// Indices of the sampled parameters.
    pub fn free(&self) -> &[usize] {
        &self.free
    }

    /// Maps an unconstrained point over the free parameters to full parameters.
    pub fn params(&self, z: &[f64]) -> HawkesParams {
        let mut a = [0.0; 4];
        let mut free = z.iter();
        for (k, slot) in a.iter_mut().enumerate() {
            *slot = match self.frozen[k] {
                Some(v) => v,
                None => free
                    .next()
                    .expect("one coordinate per free parameter")
                    .exp(),
            };
        }
        HawkesParams::from_array(a)
    }

    /// Log posterior (likelihood + priors + Jacobian of all four log
    /// transforms) and its gradient in log space.
    pub fn log_posterior(&self, params: &HawkesParams) -> Result<LogPosterior> {
        let ll = self.context.log_likelihood_grad(params)?;
        let x = params.as_array();
        let priors = self.priors.as_array();
        let mut value = ll.value;
        let mut gradient = [0.0; 4];
        for k in 0..4 {
            if self.frozen[k].is_some() {
                continue;
            }
            value += priors[k].log_density(x[k]) + x[k].ln();
            gradient[k] = x[k] * (ll.natural[k] + priors[k].d_log_density(x[k])) + 1.0;
        }
        Ok(LogPosterior { value, gradient })
    }

    /// Best free-parameter point (in log space) over a coarse grid of
    /// `theta`, `omega` and `sigma`, with `m0 = 1 - theta` since the
    /// background mass equals the event count. `None` if no grid point has a
    /// finite posterior.
    pub fn pilot_point(&self) -> Option<&[f64]> {
        self.pilot
            .get_or_init(|| {
                let axis = |k: usize, grid: Vec<f64>| match self.frozen[k] {
                    Some(v) => vec![v],
                    None => grid,
                };
                let powers = |(first, n): (f64, usize)| {
                    (0..n).map(|i| first * 3f64.powi(i as i32)).collect()
                };
                let thetas = axis(1, PILOT_THETA.to_vec());
                let omegas = axis(2, powers(PILOT_OMEGA));
                let sigmas = axis(3, powers(PILOT_SIGMA));
                let mut grid = Vec::new();
                for &theta in &thetas {
                    let m0 = self.frozen[0].unwrap_or((1.0 - theta).max(0.05));
                    for &omega in &omegas {
                        for &sigma in &sigmas {
                            grid.push([m0, theta, omega, sigma]);
                        }
                    }
                }
                let values: Vec<f64> = grid
                    .par_iter()
                    .map(|a| {
                        self.log_posterior(&HawkesParams::from_array(*a))
                            .map_or(f64::NEG_INFINITY, |lp| lp.value)
                    })
                    .collect();
                let (best, value) =
                    values
                        .iter()
                        .enumerate()
                        .fold(
                            (0, f64::NEG_INFINITY),
                            |acc, (i, &v)| if v > acc.1 { (i, v) } else { acc },
                        );
                value
                    .is_finite()
                    .then(|| self.free.iter().map(|&k| grid[best][k].ln()).collect())
            })
            .as_deref()
    }
}

impl LogDensity for HawkesPosterior {
    fn dim(&self) -> usize {
        self.free.len()
    }

    fn log_density_grad(&self, z: &[f64]) -> Result<(f64, Vec<f64>)> {
        let lp = self.log_posterior(&self.params(z))?;
        Ok((
            lp.value,
            self.free.iter().map(|&k| lp.gradient[k]).collect(),
        ))
    }

    /// The pilot point jittered by up to `INIT_JITTER` per coordinate, or
    /// prior draws clamped to `[1e-3, prior scale]` if the pilot search failed.
    fn initial_point(&self, rng: &mut crate::rng::StreamRng) -> Vec<f64> {
        if let Some(pilot) = self.pilot_point() {
            return pilot
                .iter()
                .map(|z| z + rng.random_range(-INIT_JITTER..INIT_JITTER))
                .collect();
        }
        let priors = self.priors.as_array();
        self.free
            .iter()
            .map(|&k| {
                priors[k]
                    .sample(rng)
                    .clamp(1e-3, priors[k].scale().max(1e-3))
                    .ln()
            })
            .collect()
    }
}

/// Log posterior with all four parameters free.
pub fn log_posterior(
    params: &HawkesParams,
    catalog: &EventCatalog,
    bg: &BackgroundModel,
    priors: &PriorSpec,
) -> Result<LogPosterior> {
    HawkesPosterior::new(catalog, bg, *priors)?.log_posterior(params)
}

/// Retained draws, `draws[chain][iteration]`.
#[derive(Debug, Clone, PartialEq)]
pub struct PosteriorSamples {
    pub draws: Vec<Vec<HawkesParams>>,
    pub warmup: usize,
    pub seed: u64,
}

impl PosteriorSamples {
    pub fn chains(&self) -> usize {
        self.draws.len()
    }

    pub fn total_draws(&self) -> usize {
        self.draws.iter().map(Vec::len).sum()
    }

    /// `series[chain][iteration]` of parameter `index`.
    pub fn series(&self, index: usize) -> Vec<Vec<f64>> {
        self.draws
            .iter()
            .map(|c| c.iter().map(|p| p.as_array()[index]).collect())
            .collect()
    }

    /// Posterior mean of every parameter.
    pub fn mean(&self) -> Result<HawkesParams> {
        let n = self.total_draws();
        if n == 0 {
            return Err(Error::Degenerate("no posterior draws".into()));
        }
        let mut acc = [0.0; 4];
        for p in self.draws.iter().flatten() {
            for (a, v) in acc.iter_mut().zip(p.as_array()) {
                *a += v;
            }
        }
        Ok(HawkesParams::from_array(acc.map(|a| a / n as f64)))
    }
}

/// Samples the posterior with all four parameters free.
pub fn sample_posterior(
    catalog: &EventCatalog,
    bg: &BackgroundModel,
    priors: &PriorSpec,
    config: &SamplerConfig,
) -> Result<(PosteriorSamples, ChainDiagnostics)> {
    if catalog.is_empty() {
        return Err(Error::EmptyCatalog);
    }
    sample_hawkes_posterior(&HawkesPosterior::new(catalog, bg, *priors)?, config)
}

/// Samples a (possibly partly frozen) posterior.
pub fn sample_hawkes_posterior(
    posterior: &HawkesPosterior,
    config: &SamplerConfig,
) -> Result<(PosteriorSamples, ChainDiagnostics)> {
    if posterior.context().is_empty() {
        return Err(Error::EmptyCatalog);
    }
    let outputs = run_chains(posterior, config)?;
    let draws: Vec<Vec<HawkesParams>> = outputs
        .iter()
        .map(|c| c.draws.iter().map(|z| posterior.params(z)).collect())
        .collect();
    let samples = PosteriorSamples {
        draws,
        warmup: config.warmup,
        seed: config.seed,
    };
    let diagnostics = ChainDiagnostics::compute(&samples, &outputs)?;
    diagnostics.warn_if_unconverged();
    Ok((samples, diagnostics))
}
