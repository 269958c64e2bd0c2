//! The spatiotemporal Hawkes model
//!
//! ```text
//! lambda(x, y, t) = m0 * mu(x, y, t)
//!     + theta * sum_{t_i < t} omega * exp(-omega (t - t_i)) * g_sigma(x - x_i, y - y_i)
//! ```
//!
//! with `g_sigma` the isotropic Gaussian density of lengthscale `sigma`.

mod classify;
mod likelihood;
mod predict;

use serde::{Deserialize, Serialize};

use crate::background::BackgroundModel;
use crate::catalog::EventCatalog;
use crate::error::{Error, Result};

pub use classify::{
    classify_triggered, decomposition_csv, label_top_excitatory, triggered_count, EventLabel,
};
pub use likelihood::{
    decompose_events, log_likelihood, log_likelihood_grad, HistoryWindow, LikelihoodContext,
    LogLikelihoodGradient,
};
pub use predict::{predict_grid, prediction_csv, CellPrediction, CellShape, GridSpec, Prediction};

/// Parameter names in storage order.
pub const PARAM_NAMES: [&str; 4] = ["m0", "theta", "omega", "sigma"];

/// `m0` (background weight), `theta` (branching ratio), `omega` (temporal
/// decay, 1/day) and `sigma` (spatial lengthscale, km).
///
/// `theta = 0` is accepted so that the model can be reduced to an
/// inhomogeneous Poisson process; the other three must be strictly positive.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HawkesParams {
    pub m0: f64,
    pub theta: f64,
    pub omega: f64,
    pub sigma: f64,
}

impl HawkesParams {
    pub fn new(m0: f64, theta: f64, omega: f64, sigma: f64) -> Result<Self> {
        let p = HawkesParams {
            m0,
            theta,
            omega,
            sigma,
        };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<()> {
        let ok = self.as_array().iter().all(|v| v.is_finite())
            && self.m0 > 0.0
            && self.theta >= 0.0
            && self.omega > 0.0
            && self.sigma > 0.0;
        if ok {
            Ok(())
        } else {
            Err(Error::InvalidArgument(format!(
                "invalid Hawkes parameters {self:?}"
            )))
        }
    }

    pub fn as_array(&self) -> [f64; 4] {
        [self.m0, self.theta, self.omega, self.sigma]
    }

    pub fn from_array(a: [f64; 4]) -> Self {
        HawkesParams {
            m0: a[0],
            theta: a[1],
            omega: a[2],
            sigma: a[3],
        }
    }

    /// Mean temporal lag of a direct offspring, in minutes.
    pub fn decay_minutes(&self) -> f64 {
        1440.0 / self.omega
    }

    /// Peak of the excitation surface of one event (zero lag, zero
    /// distance), `theta * omega / (2 pi sigma^2)`, in events per km^2 per day.
    pub fn excitation_peak(&self) -> f64 {
        self.theta * self.omega * spatial_kernel(0.0, 0.0, self.sigma)
    }
}

/// Endemic/excitatory split of the intensity at one point.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct IntensityDecomposition {
    pub endemic: f64,
    pub excitatory: f64,
    /// `endemic / (endemic + excitatory)`; exactly 1 when `excitatory == 0`.
    pub ratio_r: f64,
}

impl IntensityDecomposition {
    pub fn new(endemic: f64, excitatory: f64) -> Self {
        let ratio_r = if excitatory == 0.0 {
            1.0
        } else {
            endemic / (endemic + excitatory)
        };
        IntensityDecomposition {
            endemic,
            excitatory,
            ratio_r,
        }
    }

    pub fn total(&self) -> f64 {
        self.endemic + self.excitatory
    }
}

/// Isotropic Gaussian density `exp(-(dx^2 + dy^2) / (2 sigma^2)) / (2 pi sigma^2)`.
pub fn spatial_kernel(dx: f64, dy: f64, sigma: f64) -> f64 {
    let s2 = sigma * sigma;
    (-(dx * dx + dy * dy) / (2.0 * s2)).exp() / (2.0 * std::f64::consts::PI * s2)
}

/// Intensity at an arbitrary point, using events strictly before `t`.
pub fn conditional_intensity(
    x: f64,
    y: f64,
    t: f64,
    catalog: &EventCatalog,
    params: &HawkesParams,
    bg: &BackgroundModel,
) -> Result<IntensityDecomposition> {
    params.validate()?;
    if t < 0.0 || t.is_nan() {
        return Err(Error::OutsideDomain { x, y, t });
    }
    let endemic = params.m0 * bg.eval(x, y, t)?;
    let excitatory = if params.theta == 0.0 {
        0.0
    } else {
        let sum: f64 = catalog
            .events()
            .iter()
            .take_while(|e| e.t < t)
            .map(|e| {
                params.omega
                    * (-params.omega * (t - e.t)).exp()
                    * spatial_kernel(x - e.x, y - e.y, params.sigma)
            })
            .sum();
        params.theta * sum
    };
    Ok(IntensityDecomposition::new(endemic, excitatory))
}

/// Expected cascade-inclusive total `n / (1 - theta)` from `n_initial` events.
pub fn expected_offspring_cascade(n_initial: f64, theta: f64) -> Result<f64> {
    if !(theta >= 0.0) {
        return Err(Error::InvalidArgument(format!(
            "theta must be >= 0, got {theta}"
        )));
    }
    if theta >= 1.0 {
        return Err(Error::Supercritical(theta));
    }
    Ok(n_initial / (1.0 - theta))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::background::{fit_background, EvalMode};
    use crate::catalog::{Event, Region};
    use approx::assert_relative_eq;

    #[test]
    fn kernel_values() {
        assert_relative_eq!(
            spatial_kernel(0.0, 0.0, 1.0),
            0.159_154_943_091_895_35,
            max_relative = 1e-15
        );
        let s = 0.3;
        assert_relative_eq!(
            spatial_kernel(s, 0.0, s),
            spatial_kernel(0.0, 0.0, s) * (-0.5f64).exp(),
            max_relative = 1e-14
        );
    }

    #[test]
    fn kernel_integrates_to_one() {
        // midpoint rule over a 10 sigma box
        let sigma = 0.7;
        let half = 5.0 * sigma;
        let k = 400;
        let h = 2.0 * half / k as f64;
        let mut s = 0.0;
        for i in 0..k {
            for j in 0..k {
                let x = -half + (i as f64 + 0.5) * h;
                let y = -half + (j as f64 + 0.5) * h;
                s += spatial_kernel(x, y, sigma) * h * h;
            }
        }
        assert!((s - 1.0).abs() < 0.01, "{s}");
    }

    #[test]
    fn params_validation() {
        assert!(HawkesParams::new(1.0, 0.0, 1.0, 1.0).is_ok());
        assert!(HawkesParams::new(0.0, 0.1, 1.0, 1.0).is_err());
        assert!(HawkesParams::new(1.0, -0.1, 1.0, 1.0).is_err());
        assert!(HawkesParams::new(1.0, 0.1, f64::NAN, 1.0).is_err());
        let p = HawkesParams::new(0.87, 0.13, 144.0, 0.126).unwrap();
        assert_eq!(HawkesParams::from_array(p.as_array()), p);
        assert!((p.decay_minutes() - 10.0).abs() < 1e-12);
    }

    #[test]
    fn cascade_totals() {
        assert!(
            (expected_offspring_cascade(100.0, 0.13).unwrap() - 114.942_528_735_632_18).abs()
                < 1e-9
        );
        assert_eq!(expected_offspring_cascade(100.0, 0.0).unwrap(), 100.0);
        assert_eq!(expected_offspring_cascade(100.0, 0.5).unwrap(), 200.0);
        assert!(matches!(
            expected_offspring_cascade(100.0, 1.0),
            Err(Error::Supercritical(_))
        ));
        assert!(expected_offspring_cascade(100.0, -0.1).is_err());
    }

    fn fixture() -> (EventCatalog, BackgroundModel) {
        let cat = EventCatalog::new(
            vec![Event::new(5.0, 5.0, 1.0), Event::new(5.0, 5.0, 2.0)],
            Region::square(10.0).unwrap(),
            10.0,
            None,
            "",
        )
        .unwrap();
        let bg = fit_background(&cat, 2.0, 5.0)
            .unwrap()
            .with_mode(EvalMode::Direct);
        (cat, bg)
    }

    #[test]
    fn empty_history_and_zero_theta() {
        let (cat, bg) = fixture();
        let p = HawkesParams::new(0.9, 0.3, 5.0, 0.2).unwrap();
        let d = conditional_intensity(5.0, 5.0, 0.5, &cat, &p, &bg).unwrap();
        assert_eq!(d.excitatory, 0.0);
        assert_eq!(d.ratio_r, 1.0);
        let p0 = HawkesParams::new(0.9, 0.0, 5.0, 0.2).unwrap();
        let d0 = conditional_intensity(5.1, 5.0, 3.0, &cat, &p0, &bg).unwrap();
        assert_eq!(d0.excitatory, 0.0);
        assert!(conditional_intensity(5.0, 5.0, -1.0, &cat, &p, &bg).is_err());
    }

    #[test]
    fn single_parent_at_one_decay_time() {
        let (cat, bg) = fixture();
        let p = HawkesParams::new(0.87, 0.13, 144.0, 0.126).unwrap();
        let t = 1.0 + 1.0 / 144.0;
        let d = conditional_intensity(5.0, 5.0, t, &cat, &p, &bg).unwrap();
        let expected = 0.13 * 144.0 * (-1f64).exp() / (2.0 * std::f64::consts::PI * 0.126 * 0.126);
        assert_relative_eq!(d.excitatory, expected, max_relative = 1e-12);
        assert!((d.excitatory - 69.038).abs() < 1e-3);
        assert_relative_eq!(d.total(), d.endemic + d.excitatory);
    }

    #[test]
    fn strict_past_and_monotone_decay() {
        let (cat, bg) = fixture();
        let p = HawkesParams::new(1.0, 0.5, 2.0, 0.3).unwrap();
        // at t = 1.0 exactly, the event at t = 1.0 does not count
        assert_eq!(
            conditional_intensity(5.0, 5.0, 1.0, &cat, &p, &bg)
                .unwrap()
                .excitatory,
            0.0
        );
        let mut prev = f64::INFINITY;
        for k in 1..20 {
            let e = conditional_intensity(5.0, 5.0, 1.0 + 0.05 * k as f64, &cat, &p, &bg)
                .unwrap()
                .excitatory;
            assert!(e < prev);
            prev = e;
        }
        let mut prev = f64::INFINITY;
        for k in 0..20 {
            let e = conditional_intensity(5.0 + 0.05 * k as f64, 5.0, 1.5, &cat, &p, &bg)
                .unwrap()
                .excitatory;
            assert!(e < prev);
            prev = e;
        }
    }
}
