//! Synthetic catalogs with known parentage.
//!
//! [`simulate`] uses the cluster (branching) construction: background events
//! from an inhomogeneous Poisson process, then each event spawns
//! `Poisson(theta)` children at `Exp(omega)` lags and Gaussian(`sigma`)
//! displacements. Children falling after the window or outside the region are
//! discarded, so near the border the realised branching ratio is slightly
//! below `theta`. [`simulate_ogata`] draws the same process by sequential
//! thinning and serves as a cross-check.

mod cluster;
mod ogata;

use std::fmt::Write as _;

use rand::Rng;
use rand_distr::{Distribution, Poisson};

use crate::background::BackgroundModel;
use crate::catalog::{Event, EventCatalog, Region};
use crate::error::{Error, Result};
use crate::hawkes::HawkesParams;
use crate::rng::StreamRng;

pub use cluster::simulate;
pub use ogata::simulate_ogata;

/// Background intensity of a simulation, before the `m0` factor.
#[derive(Debug, Clone, PartialEq)]
pub enum BackgroundSpec {
    /// Homogeneous rate in events per km^2 per day.
    Constant(f64),
    /// A fitted separable surface; its region and window must match the
    /// simulation's.
    Model(BackgroundModel),
}

/// Rounding grid applied after simulation.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Snap {
    pub spatial_m: f64,
    pub temporal_s: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SimConfig {
    pub params: HawkesParams,
    pub background: BackgroundSpec,
    pub region: Region,
    pub window: f64,
    pub seed: u64,
    pub snap: Option<Snap>,
}

impl SimConfig {
    pub fn new(
        params: HawkesParams,
        background: BackgroundSpec,
        region: Region,
        window: f64,
        seed: u64,
    ) -> Result<Self> {
        let config = SimConfig {
            params,
            background,
            region,
            window,
            seed,
            snap: None,
        };
        config.validate()?;
        Ok(config)
    }

    pub fn with_snap(mut self, snap: Snap) -> Result<Self> {
        self.snap = Some(snap);
        self.validate()?;
        Ok(self)
    }

    pub fn validate(&self) -> Result<()> {
        self.params.validate()?;
        if self.params.theta >= 1.0 {
            return Err(Error::Supercritical(self.params.theta));
        }
        self.region.validate()?;
        if !(self.window > 0.0 && self.window.is_finite()) {
            return Err(Error::InvalidArgument(format!(
                "window {} must be positive",
                self.window
            )));
        }
        if let Some(s) = self.snap {
            if !(s.spatial_m > 0.0 && s.temporal_s > 0.0) {
                return Err(Error::InvalidArgument(format!(
                    "snap resolutions must be positive: {s:?}"
                )));
            }
        }
        match &self.background {
            BackgroundSpec::Constant(rate) if !(rate.is_finite() && *rate >= 0.0) => {
                Err(Error::InvalidArgument(format!("background rate {rate}")))
            }
            BackgroundSpec::Model(bg)
                if *bg.region() != self.region || bg.window() != self.window =>
            {
                Err(Error::InvalidArgument(
                    "background model domain differs from the simulation domain".into(),
                ))
            }
            _ => Ok(()),
        }
    }
}

/// A catalog with its generating tree. `parent[i] < i` for every child.
#[derive(Debug, Clone, PartialEq)]
pub struct LabeledCatalog {
    pub catalog: EventCatalog,
    pub parent: Vec<Option<usize>>,
    pub generation: Vec<u32>,
}

impl LabeledCatalog {
    /// Sorts raw events by `(t, x, y)` and re-indexes parents.
    pub(crate) fn assemble(
        events: Vec<Event>,
        parent: Vec<Option<usize>>,
        generation: Vec<u32>,
        region: Region,
        window: f64,
        provenance: String,
    ) -> Result<Self> {
        let mut order: Vec<usize> = (0..events.len()).collect();
        order.sort_by(|&a, &b| events[a].key_cmp(&events[b]).then(a.cmp(&b)));
        let mut rank = vec![0; events.len()];
        for (new, &old) in order.iter().enumerate() {
            rank[old] = new;
        }
        let sorted: Vec<Event> = order.iter().map(|&i| events[i]).collect();
        let parent: Vec<Option<usize>> =
            order.iter().map(|&i| parent[i].map(|p| rank[p])).collect();
        let generation: Vec<u32> = order.iter().map(|&i| generation[i]).collect();
        let labeled = LabeledCatalog {
            catalog: EventCatalog::new(sorted, region, window, None, provenance)?,
            parent,
            generation,
        };
        labeled.validate()?;
        Ok(labeled)
    }

    pub fn len(&self) -> usize {
        self.catalog.len()
    }

    pub fn is_empty(&self) -> bool {
        self.catalog.is_empty()
    }

    pub fn background_count(&self) -> usize {
        self.parent.iter().filter(|p| p.is_none()).count()
    }

    /// `true` for events with a parent.
    pub fn is_offspring(&self) -> Vec<bool> {
        self.parent.iter().map(Option::is_some).collect()
    }

    /// Checks the tree invariants.
    pub fn validate(&self) -> Result<()> {
        let n = self.catalog.len();
        if self.parent.len() != n || self.generation.len() != n {
            return Err(Error::InvalidArgument("parentage length mismatch".into()));
        }
        let events = self.catalog.events();
        for i in 0..n {
            let ok = match self.parent[i] {
                None => self.generation[i] == 0,
                Some(p) => {
                    p < i
                        && events[p].t < events[i].t
                        && self.generation[i] == self.generation[p] + 1
                }
            };
            if !ok {
                return Err(Error::InvalidArgument(format!(
                    "parentage invariant broken at event {i}"
                )));
            }
        }
        Ok(())
    }
}

/// `event,parent,generation` for every offspring event; events without a
/// row are background events (generation 0).
pub fn parentage_csv(labeled: &LabeledCatalog) -> String {
    let mut out = String::from("event,parent,generation\n");
    for (i, (p, g)) in labeled.parent.iter().zip(&labeled.generation).enumerate() {
        if let Some(p) = p {
            writeln!(out, "{i},{p},{g}").expect("writing to a String cannot fail");
        }
    }
    out
}

/// Rounds coordinates to multiples of `spatial_m` metres and times to
/// multiples of `temporal_s` seconds, clamped into the domain.
///
/// A child that rounds onto or before its parent's time is moved one time
/// step after it; if that would leave the window the child and its
/// descendants are dropped.
pub fn snap(labeled: &LabeledCatalog, spatial_m: f64, temporal_s: f64) -> Result<LabeledCatalog> {
    if !(spatial_m > 0.0 && temporal_s > 0.0) {
        return Err(Error::InvalidArgument(format!(
            "snap resolutions must be positive, got {spatial_m} m and {temporal_s} s"
        )));
    }
    let region = *labeled.catalog.region();
    let window = labeled.catalog.window();
    let ds = spatial_m / 1000.0;
    let dt = temporal_s / 86_400.0;
    let round = |v: f64, step: f64, lo: f64, hi: f64| ((v / step).round() * step).clamp(lo, hi);

    let events = labeled.catalog.events();
    let mut kept: Vec<Option<usize>> = vec![None; events.len()];
    let mut out_events: Vec<Event> = Vec::with_capacity(events.len());
    let mut out_parent = Vec::with_capacity(events.len());
    let mut out_generation = Vec::with_capacity(events.len());
    for (i, e) in events.iter().enumerate() {
        let mut t = round(e.t, dt, 0.0, window);
        let parent = match labeled.parent[i] {
            None => None,
            Some(p) => match kept[p] {
                None => continue,
                Some(np) => {
                    let pt: f64 = out_events[np].t;
                    if t <= pt {
                        t = pt + dt;
                    }
                    if t > window {
                        continue;
                    }
                    Some(np)
                }
            },
        };
        kept[i] = Some(out_events.len());
        out_events.push(Event::new(
            round(e.x, ds, region.x_min, region.x_max),
            round(e.y, ds, region.y_min, region.y_max),
            t,
        ));
        out_parent.push(parent);
        out_generation.push(labeled.generation[i]);
    }
    LabeledCatalog::assemble(
        out_events,
        out_parent,
        out_generation,
        region,
        window,
        labeled.catalog.provenance().to_string(),
    )
}

fn poisson_count(rng: &mut StreamRng, mean: f64) -> Result<u64> {
    if mean <= 0.0 {
        return Ok(0);
    }
    let dist = Poisson::new(mean).map_err(|e| Error::Numerical(format!("Poisson({mean}): {e}")))?;
    Ok(dist.sample(rng) as u64)
}

/// Draws background locations and times.
pub(crate) struct BackgroundSampler<'a> {
    spec: &'a BackgroundSpec,
    region: Region,
    window: f64,
    m0: f64,
    spatial_max: f64,
    temporal_max: f64,
}

impl<'a> BackgroundSampler<'a> {
    pub(crate) fn new(config: &'a SimConfig) -> Result<Self> {
        let (spatial_max, temporal_max) = match &config.background {
            BackgroundSpec::Constant(_) => (0.0, 0.0),
            BackgroundSpec::Model(bg) => {
                let (s, t) = bg.upper_bounds();
                if !(s.is_finite() && t.is_finite() && s > 0.0 && t > 0.0) {
                    return Err(Error::Numerical(format!(
                        "no finite upper bound on the background (spatial {s}, temporal {t})"
                    )));
                }
                (s, t)
            }
        };
        Ok(BackgroundSampler {
            spec: &config.background,
            region: config.region,
            window: config.window,
            m0: config.params.m0,
            spatial_max,
            temporal_max,
        })
    }

    /// Expected number of background events.
    pub(crate) fn expected_count(&self) -> f64 {
        self.m0
            * match self.spec {
                BackgroundSpec::Constant(rate) => rate * self.region.area() * self.window,
                BackgroundSpec::Model(bg) => bg.total_mass(),
            }
    }

    /// Background rate integrated over the region at time `t`.
    pub(crate) fn rate_at(&self, t: f64) -> f64 {
        self.m0
            * match self.spec {
                BackgroundSpec::Constant(rate) => rate * self.region.area(),
                BackgroundSpec::Model(bg) => bg.temporal(t),
            }
    }

    /// Upper bound on [`Self::rate_at`].
    pub(crate) fn rate_bound(&self) -> f64 {
        match self.spec {
            BackgroundSpec::Constant(_) => self.rate_at(0.0),
            BackgroundSpec::Model(_) => self.m0 * self.temporal_max,
        }
    }

    pub(crate) fn location(&self, rng: &mut StreamRng) -> (f64, f64) {
        let r = &self.region;
        loop {
            let x = rng.random_range(r.x_min..r.x_max);
            let y = rng.random_range(r.y_min..r.y_max);
            match self.spec {
                BackgroundSpec::Constant(_) => return (x, y),
                BackgroundSpec::Model(bg) => {
                    if rng.random::<f64>() * self.spatial_max < bg.spatial(x, y) {
                        return (x, y);
                    }
                }
            }
        }
    }

    pub(crate) fn time(&self, rng: &mut StreamRng) -> f64 {
        loop {
            let t = rng.random_range(0.0..self.window);
            match self.spec {
                BackgroundSpec::Constant(_) => return t,
                BackgroundSpec::Model(bg) => {
                    if rng.random::<f64>() * self.temporal_max < bg.temporal(t) {
                        return t;
                    }
                }
            }
        }
    }

    pub(crate) fn events(&self, rng: &mut StreamRng) -> Result<Vec<Event>> {
        let n = poisson_count(rng, self.expected_count())?;
        let mut out: Vec<Event> = (0..n)
            .map(|_| {
                let (x, y) = self.location(rng);
                Event::new(x, y, self.time(rng))
            })
            .collect();
        out.sort_by(Event::key_cmp);
        Ok(out)
    }
}
