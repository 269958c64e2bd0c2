//! Log-likelihood and its gradient.
//!
//! ```text
//! log L = sum_j log lambda_j - m0 * M - theta * sum_i (1 - exp(-omega (T - t_i)))
//! ```
//!
//! `M` is the total background mass (the event count for a fitted
//! [`BackgroundModel`]). Each triggering kernel is taken to integrate to one
//! over the region, which holds when `sigma` is small next to the region; the
//! temporal edge at `T` is treated exactly.

use rayon::prelude::*;

use super::{HawkesParams, IntensityDecomposition};
use crate::background::BackgroundModel;
use crate::catalog::{Event, EventCatalog};
use crate::error::{Error, Result};

/// Which past events enter the excitation sum of an event.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum HistoryWindow {
    /// Every strictly earlier event whose temporal factor is representable
    /// (`omega * lag < 745`; beyond that `exp` underflows to zero).
    Exact,
    /// Pairs whose combined exponent `omega * lag + d^2 / (2 sigma^2)` exceeds
    /// `exponent` are skipped. At the default of 30 the relative weight of a
    /// dropped pair is below `e^-30 ~ 1e-13`.
    Truncated { exponent: f64 },
}

impl Default for HistoryWindow {
    fn default() -> Self {
        HistoryWindow::Truncated { exponent: 30.0 }
    }
}

impl HistoryWindow {
    fn exponent(&self) -> f64 {
        match self {
            HistoryWindow::Exact => 745.0,
            HistoryWindow::Truncated { exponent } => *exponent,
        }
    }

    fn prunes_space(&self) -> bool {
        matches!(self, HistoryWindow::Truncated { .. })
    }
}

/// Value and gradient of the log-likelihood.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LogLikelihoodGradient {
    pub value: f64,
    /// `d log L / d (m0, theta, omega, sigma)`.
    pub natural: [f64; 4],
    /// Gradient with respect to `(log m0, log theta, log omega, log sigma)`,
    /// i.e. `param * natural`.
    pub unconstrained: [f64; 4],
}

/// Per-event excitation sums (without the `theta` factor) and their
/// derivatives.
#[derive(Debug, Clone, Copy, Default)]
struct Excitation {
    sum: f64,
    d_omega: f64,
    d_sigma: f64,
}

/// Precomputed inputs for repeated likelihood evaluation: the events, the
/// background at each event, and the background's total mass.
#[derive(Debug, Clone)]
pub struct LikelihoodContext {
    events: Vec<Event>,
    window: f64,
    background: Vec<f64>,
    background_mass: f64,
    history: HistoryWindow,
}

impl LikelihoodContext {
    pub fn new(catalog: &EventCatalog, bg: &BackgroundModel) -> Result<Self> {
        let background = bg.at_events(catalog.events())?;
        Self::with_background_values(catalog, background, bg.total_mass())
    }

    /// Uses explicit background values at the events, e.g. an analytic
    /// surface. `mass` is its integral over region x window.
    pub fn with_background_values(
        catalog: &EventCatalog,
        background: Vec<f64>,
        mass: f64,
    ) -> Result<Self> {
        if background.len() != catalog.len() {
            return Err(Error::InvalidArgument(format!(
                "{} background values for {} events",
                background.len(),
                catalog.len()
            )));
        }
        if !(mass.is_finite() && mass >= 0.0) {
            return Err(Error::InvalidArgument(format!("background mass {mass}")));
        }
        Ok(LikelihoodContext {
            events: catalog.events().to_vec(),
            window: catalog.window(),
            background,
            background_mass: mass,
            history: HistoryWindow::default(),
        })
    }

    pub fn with_history(mut self, history: HistoryWindow) -> Self {
        self.history = history;
        self
    }

    pub fn len(&self) -> usize {
        self.events.len()
    }

    pub fn is_empty(&self) -> bool {
        self.events.is_empty()
    }

    pub fn background(&self) -> &[f64] {
        &self.background
    }

    pub fn background_mass(&self) -> f64 {
        self.background_mass
    }

    /// Excitation sum at event `j` over strictly earlier events.
    fn excitation(&self, j: usize, omega: f64, sigma: f64, derivatives: bool) -> Excitation {
        let ej = self.events[j];
        let limit = self.history.exponent();
        let prune = self.history.prunes_space();
        let inv2s2 = 1.0 / (2.0 * sigma * sigma);
        let norm = omega * inv2s2 / std::f64::consts::PI;
        let mut acc = Excitation::default();
        for ei in self.events[..j].iter().rev() {
            let lag = ej.t - ei.t;
            let a = omega * lag;
            if a > limit {
                break;
            }
            if lag <= 0.0 {
                continue;
            }
            let (dx, dy) = (ej.x - ei.x, ej.y - ei.y);
            let d2 = dx * dx + dy * dy;
            let s = d2 * inv2s2;
            if prune && a + s > limit {
                continue;
            }
            let k = norm * (-(a + s)).exp();
            acc.sum += k;
            if derivatives {
                acc.d_omega += k * (1.0 / omega - lag);
                acc.d_sigma += k * (d2 / (sigma * sigma * sigma) - 2.0 / sigma);
            }
        }
        acc
    }

    fn excitations(&self, params: &HawkesParams, derivatives: bool) -> Vec<Excitation> {
        if params.theta == 0.0 && !derivatives {
            return vec![Excitation::default(); self.events.len()];
        }
        (0..self.events.len())
            .into_par_iter()
            .map(|j| self.excitation(j, params.omega, params.sigma, derivatives))
            .collect()
    }

    /// Temporal compensator `sum_i (1 - exp(-omega (T - t_i)))` and its
    /// omega-derivative.
    fn compensator(&self, omega: f64) -> (f64, f64) {
        let mut c = 0.0;
        let mut dc = 0.0;
        for e in &self.events {
            let rem = self.window - e.t;
            c += -(-omega * rem).exp_m1();
            dc += rem * (-omega * rem).exp();
        }
        (c, dc)
    }

    fn checked_intensity(&self, j: usize, params: &HawkesParams, exc: &Excitation) -> Result<f64> {
        let lambda = params.m0 * self.background[j] + params.theta * exc.sum;
        if lambda > 0.0 && lambda.is_finite() {
            Ok(lambda)
        } else {
            Err(Error::NonPositiveIntensity {
                index: j,
                value: lambda,
            })
        }
    }

    pub fn log_likelihood(&self, params: &HawkesParams) -> Result<f64> {
        params.validate()?;
        let exc = self.excitations(params, false);
        let mut log_sum = 0.0;
        for (j, x) in exc.iter().enumerate() {
            log_sum += self.checked_intensity(j, params, x)?.ln();
        }
        let (c, _) = self.compensator(params.omega);
        Ok(log_sum - params.m0 * self.background_mass - params.theta * c)
    }

    pub fn log_likelihood_grad(&self, params: &HawkesParams) -> Result<LogLikelihoodGradient> {
        params.validate()?;
        let exc = self.excitations(params, true);
        let mut value = 0.0;
        let mut g = [0.0; 4];
        for (j, x) in exc.iter().enumerate() {
            let lambda = self.checked_intensity(j, params, x)?;
            value += lambda.ln();
            g[0] += self.background[j] / lambda;
            g[1] += x.sum / lambda;
            g[2] += params.theta * x.d_omega / lambda;
            g[3] += params.theta * x.d_sigma / lambda;
        }
        let (c, dc) = self.compensator(params.omega);
        value -= params.m0 * self.background_mass + params.theta * c;
        g[0] -= self.background_mass;
        g[1] -= c;
        g[2] -= params.theta * dc;
        let p = params.as_array();
        let unconstrained = [g[0] * p[0], g[1] * p[1], g[2] * p[2], g[3] * p[3]];
        Ok(LogLikelihoodGradient {
            value,
            natural: g,
            unconstrained,
        })
    }

    /// Endemic/excitatory split at every event (strictly earlier history).
    pub fn decompose(&self, params: &HawkesParams) -> Result<Vec<IntensityDecomposition>> {
        params.validate()?;
        Ok(self
            .excitations(params, false)
            .iter()
            .zip(&self.background)
            .map(|(x, mu)| IntensityDecomposition::new(params.m0 * mu, params.theta * x.sum))
            .collect())
    }
}

pub fn log_likelihood(
    catalog: &EventCatalog,
    params: &HawkesParams,
    bg: &BackgroundModel,
) -> Result<f64> {
    LikelihoodContext::new(catalog, bg)?.log_likelihood(params)
}

pub fn log_likelihood_grad(
    catalog: &EventCatalog,
    params: &HawkesParams,
    bg: &BackgroundModel,
) -> Result<LogLikelihoodGradient> {
    LikelihoodContext::new(catalog, bg)?.log_likelihood_grad(params)
}

pub fn decompose_events(
    catalog: &EventCatalog,
    params: &HawkesParams,
    bg: &BackgroundModel,
) -> Result<Vec<IntensityDecomposition>> {
    LikelihoodContext::new(catalog, bg)?.decompose(params)
}
