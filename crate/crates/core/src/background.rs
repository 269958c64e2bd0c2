//! Separable kernel estimate of the endemic intensity,
//! `mu(x, y, t) = mu_s(x, y) * mu_t(t)`.
//!
//! `mu_s` is a normalised sum of product Epanechnikov kernels (one factor per
//! axis, both scaled by the spatial bandwidth) and integrates to 1 over the
//! region. `mu_t` is the one-dimensional analogue scaled so that it
//! integrates to the event count over `[0, T]`. Every kernel is divided by
//! its own in-domain mass, so boundary events are not deflated and both
//! normalisations hold exactly.
//!
//! Both factors are tabulated once on regular grids (50 m, 1 hour by default)
//! and read back by bilinear/linear interpolation. The tabulated surfaces are
//! rescaled so that their trapezoidal integrals match the normalisations.
//! [`EvalMode::Direct`] sums the kernels at the query point instead and serves
//! as the exactness reference.

use std::fmt::Write as _;

use crate::catalog::{Event, EventCatalog, Region};
use crate::error::{Error, Result};

pub const DEFAULT_SPATIAL_BANDWIDTH_KM: f64 = 1.6;
pub const DEFAULT_TEMPORAL_BANDWIDTH_DAYS: f64 = 14.0;
/// Spatial bandwidths of the built-in sensitivity sweep.
pub const SWEEP_SPATIAL_KM: [f64; 3] = [0.5, 1.0, 1.6];
/// Temporal bandwidths of the built-in sensitivity sweep.
pub const SWEEP_TEMPORAL_DAYS: [f64; 4] = [0.5, 1.0, 7.0, 14.0];

/// All `(spatial, temporal)` bandwidth pairs of the sensitivity sweep.
pub fn bandwidth_sweep() -> Vec<(f64, f64)> {
    SWEEP_SPATIAL_KM
        .iter()
        .flat_map(|&s| SWEEP_TEMPORAL_DAYS.iter().map(move |&t| (s, t)))
        .collect()
}

/// `k(d) = 3/4 (1 - d^2)` on `|d| < 1`, zero elsewhere.
pub fn epanechnikov(d: f64) -> f64 {
    if d.abs() < 1.0 {
        0.75 * (1.0 - d * d)
    } else {
        0.0
    }
}

/// `int_{-inf}^{u} k(d) dd`.
fn epanechnikov_cdf(u: f64) -> f64 {
    if u <= -1.0 {
        0.0
    } else if u >= 1.0 {
        1.0
    } else {
        0.5 + 0.75 * u - 0.25 * u * u * u
    }
}

/// Scaled kernel `k(u / h) / h`.
fn scaled(u: f64, h: f64) -> f64 {
    epanechnikov(u / h) / h
}

/// Mass of a scaled kernel centred at `c` that falls inside `[lo, hi]`.
fn interval_mass(c: f64, h: f64, lo: f64, hi: f64) -> f64 {
    epanechnikov_cdf((hi - c) / h) - epanechnikov_cdf((lo - c) / h)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum EvalMode {
    #[default]
    Grid,
    Direct,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BackgroundOptions {
    pub grid_spacing_km: f64,
    pub grid_step_days: f64,
    pub mode: EvalMode,
}

impl Default for BackgroundOptions {
    fn default() -> Self {
        BackgroundOptions {
            grid_spacing_km: 0.05,
            grid_step_days: 1.0 / 24.0,
            mode: EvalMode::Grid,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
struct Axis {
    origin: f64,
    step: f64,
    cells: usize,
}

impl Axis {
    fn new(lo: f64, hi: f64, spacing: f64) -> Self {
        let cells = ((hi - lo) / spacing).ceil().max(1.0) as usize;
        Axis {
            origin: lo,
            step: (hi - lo) / cells as f64,
            cells,
        }
    }

    fn nodes(&self) -> usize {
        self.cells + 1
    }

    fn node(&self, i: usize) -> f64 {
        if i == self.cells {
            // avoid drift at the far edge
            self.origin + self.step * self.cells as f64
        } else {
            self.origin + self.step * i as f64
        }
    }

    /// Node index range whose coordinates fall within `(c - h, c + h)`.
    fn support(&self, c: f64, h: f64) -> std::ops::Range<usize> {
        let lo = ((c - h - self.origin) / self.step).floor().max(0.0) as usize;
        let hi = (((c + h - self.origin) / self.step).ceil() as usize + 1).min(self.nodes());
        lo.min(hi)..hi
    }

    /// Cell index and fractional offset for interpolation.
    fn locate(&self, v: f64) -> (usize, f64) {
        let u = ((v - self.origin) / self.step).clamp(0.0, self.cells as f64);
        let i = (u.floor() as usize).min(self.cells - 1);
        (i, u - i as f64)
    }

    /// Trapezoid weights.
    fn weight(&self, i: usize) -> f64 {
        if i == 0 || i == self.cells {
            0.5 * self.step
        } else {
            self.step
        }
    }
}

/// Fitted separable background intensity.
#[derive(Debug, Clone, PartialEq)]
pub struct BackgroundModel {
    spatial_bandwidth: f64,
    temporal_bandwidth: f64,
    region: Region,
    window: f64,
    sources: Vec<Event>,
    spatial_weight: Vec<f64>,
    temporal_weight: Vec<f64>,
    total_mass: f64,
    x_axis: Axis,
    y_axis: Axis,
    t_axis: Axis,
    /// Row-major `[iy * nx + ix]`.
    spatial_grid: Vec<f64>,
    temporal_grid: Vec<f64>,
    mode: EvalMode,
}

/// Fits with the default grids.
pub fn fit_background(
    catalog: &EventCatalog,
    spatial_bandwidth: f64,
    temporal_bandwidth: f64,
) -> Result<BackgroundModel> {
    fit_background_with(
        catalog,
        spatial_bandwidth,
        temporal_bandwidth,
        &BackgroundOptions::default(),
    )
}

pub fn fit_background_with(
    catalog: &EventCatalog,
    spatial_bandwidth: f64,
    temporal_bandwidth: f64,
    options: &BackgroundOptions,
) -> Result<BackgroundModel> {
    if catalog.is_empty() {
        return Err(Error::EmptyCatalog);
    }
    let positive = |v: f64| v.is_finite() && v > 0.0;
    if !positive(spatial_bandwidth) || !positive(temporal_bandwidth) {
        return Err(Error::InvalidArgument(format!(
            "bandwidths must be positive, got {spatial_bandwidth} km / {temporal_bandwidth} days"
        )));
    }
    if !positive(options.grid_spacing_km) || !positive(options.grid_step_days) {
        return Err(Error::InvalidArgument(
            "grid resolution must be positive".into(),
        ));
    }
    let region = *catalog.region();
    let window = catalog.window();
    let (hs, ht) = (spatial_bandwidth, temporal_bandwidth);
    let sources = catalog.events().to_vec();

    let spatial_weight: Vec<f64> = sources
        .iter()
        .map(|e| {
            let mx = interval_mass(e.x, hs, region.x_min, region.x_max);
            let my = interval_mass(e.y, hs, region.y_min, region.y_max);
            1.0 / (mx * my)
        })
        .collect();
    let temporal_weight: Vec<f64> = sources
        .iter()
        .map(|e| 1.0 / interval_mass(e.t, ht, 0.0, window))
        .collect();

    let x_axis = Axis::new(region.x_min, region.x_max, options.grid_spacing_km);
    let y_axis = Axis::new(region.y_min, region.y_max, options.grid_spacing_km);
    let t_axis = Axis::new(0.0, window, options.grid_step_days);
    let n = sources.len() as f64;

    let nx = x_axis.nodes();
    let mut spatial_grid = vec![0.0; nx * y_axis.nodes()];
    let mut kx = Vec::new();
    for (e, w) in sources.iter().zip(&spatial_weight) {
        let xr = x_axis.support(e.x, hs);
        kx.clear();
        kx.extend(xr.clone().map(|i| scaled(x_axis.node(i) - e.x, hs)));
        for iy in y_axis.support(e.y, hs) {
            let ky = scaled(y_axis.node(iy) - e.y, hs) * w / n;
            if ky == 0.0 {
                continue;
            }
            let row = &mut spatial_grid[iy * nx..(iy + 1) * nx];
            for (k, ix) in kx.iter().zip(xr.clone()) {
                row[ix] += k * ky;
            }
        }
    }
    let mut temporal_grid = vec![0.0; t_axis.nodes()];
    for (e, w) in sources.iter().zip(&temporal_weight) {
        for it in t_axis.support(e.t, ht) {
            temporal_grid[it] += scaled(t_axis.node(it) - e.t, ht) * w;
        }
    }

    // match the trapezoidal integrals to the exact normalisations
    let mut spatial_integral = 0.0;
    for iy in 0..y_axis.nodes() {
        let wy = y_axis.weight(iy);
        for ix in 0..nx {
            spatial_integral += spatial_grid[iy * nx + ix] * x_axis.weight(ix) * wy;
        }
    }
    let temporal_integral: f64 = temporal_grid
        .iter()
        .enumerate()
        .map(|(i, v)| v * t_axis.weight(i))
        .sum();
    if !(spatial_integral > 0.0 && temporal_integral > 0.0) {
        return Err(Error::Numerical(
            "background grid has no mass; grid is coarser than the bandwidth".into(),
        ));
    }
    spatial_grid.iter_mut().for_each(|v| *v /= spatial_integral);
    temporal_grid
        .iter_mut()
        .for_each(|v| *v *= n / temporal_integral);

    Ok(BackgroundModel {
        spatial_bandwidth: hs,
        temporal_bandwidth: ht,
        region,
        window,
        sources,
        spatial_weight,
        temporal_weight,
        total_mass: n,
        x_axis,
        y_axis,
        t_axis,
        spatial_grid,
        temporal_grid,
        mode: options.mode,
    })
}

impl BackgroundModel {
    pub fn spatial_bandwidth(&self) -> f64 {
        self.spatial_bandwidth
    }

    pub fn temporal_bandwidth(&self) -> f64 {
        self.temporal_bandwidth
    }

    pub fn region(&self) -> &Region {
        &self.region
    }

    pub fn window(&self) -> f64 {
        self.window
    }

    /// Number of events the model was fitted on.
    pub fn source_count(&self) -> usize {
        self.sources.len()
    }

    pub fn sources(&self) -> &[Event] {
        &self.sources
    }

    /// `int mu over region x window`; the source count unless rescaled.
    pub fn total_mass(&self) -> f64 {
        self.total_mass
    }

    pub fn mode(&self) -> EvalMode {
        self.mode
    }

    pub fn with_mode(mut self, mode: EvalMode) -> Self {
        self.mode = mode;
        self
    }

    /// Rescales the temporal factor so the model integrates to `total`.
    pub fn with_total_mass(mut self, total: f64) -> Result<Self> {
        if !(total.is_finite() && total > 0.0) {
            return Err(Error::InvalidArgument(format!(
                "total mass must be positive, got {total}"
            )));
        }
        let f = total / self.total_mass;
        self.temporal_grid.iter_mut().for_each(|v| *v *= f);
        self.total_mass = total;
        Ok(self)
    }

    /// `mu_s(x, y)` in km^-2. Zero outside the region.
    pub fn spatial(&self, x: f64, y: f64) -> f64 {
        if !self.region.contains(x, y) {
            return 0.0;
        }
        match self.mode {
            EvalMode::Direct => self.spatial_direct(x, y),
            EvalMode::Grid => {
                let (ix, fx) = self.x_axis.locate(x);
                let (iy, fy) = self.y_axis.locate(y);
                let nx = self.x_axis.nodes();
                let g = |i: usize, j: usize| self.spatial_grid[j * nx + i];
                (1.0 - fy) * ((1.0 - fx) * g(ix, iy) + fx * g(ix + 1, iy))
                    + fy * ((1.0 - fx) * g(ix, iy + 1) + fx * g(ix + 1, iy + 1))
            }
        }
    }

    /// `mu_t(t)` in events per day. Zero outside `[0, T]`.
    pub fn temporal(&self, t: f64) -> f64 {
        if !(0.0..=self.window).contains(&t) {
            return 0.0;
        }
        match self.mode {
            EvalMode::Direct => self.temporal_direct(t),
            EvalMode::Grid => {
                let (i, f) = self.t_axis.locate(t);
                (1.0 - f) * self.temporal_grid[i] + f * self.temporal_grid[i + 1]
            }
        }
    }

    fn spatial_direct(&self, x: f64, y: f64) -> f64 {
        let h = self.spatial_bandwidth;
        let sum: f64 = self
            .sources
            .iter()
            .zip(&self.spatial_weight)
            .map(|(e, w)| scaled(x - e.x, h) * scaled(y - e.y, h) * w)
            .sum();
        sum / self.sources.len() as f64
    }

    fn temporal_direct(&self, t: f64) -> f64 {
        let h = self.temporal_bandwidth;
        let sum: f64 = self
            .sources
            .iter()
            .zip(&self.temporal_weight)
            .map(|(e, w)| scaled(t - e.t, h) * w)
            .sum();
        sum * self.total_mass / self.sources.len() as f64
    }

    /// `mu(x, y, t) = mu_s(x, y) mu_t(t)`.
    pub fn eval(&self, x: f64, y: f64, t: f64) -> Result<f64> {
        if !self.region.contains(x, y) || !(0.0..=self.window).contains(&t) || t.is_nan() {
            return Err(Error::OutsideDomain { x, y, t });
        }
        Ok(self.spatial(x, y) * self.temporal(t))
    }

    /// Background at every event of a catalog.
    pub fn at_events(&self, events: &[Event]) -> Result<Vec<f64>> {
        events.iter().map(|e| self.eval(e.x, e.y, e.t)).collect()
    }

    /// Upper bounds on `mu_s` and `mu_t` over the domain, used for thinning.
    /// Exact for grid evaluation (interpolation never exceeds the nodes); the
    /// direct sum gets a 10% margin.
    pub fn upper_bounds(&self) -> (f64, f64) {
        let ms = self.spatial_grid.iter().copied().fold(0.0, f64::max);
        let mt = self.temporal_grid.iter().copied().fold(0.0, f64::max);
        match self.mode {
            EvalMode::Grid => (ms, mt),
            EvalMode::Direct => (1.1 * ms, 1.1 * mt),
        }
    }

    /// `x_km,y_km,value` raster of `mu_s`.
    pub fn spatial_grid_csv(&self) -> String {
        let mut out = String::from("x_km,y_km,value\n");
        let nx = self.x_axis.nodes();
        for iy in 0..self.y_axis.nodes() {
            for ix in 0..nx {
                writeln!(
                    out,
                    "{},{},{}",
                    self.x_axis.node(ix),
                    self.y_axis.node(iy),
                    self.spatial_grid[iy * nx + ix]
                )
                .expect("writing to a String cannot fail");
            }
        }
        out
    }

    /// `t_days,value` series of `mu_t`.
    pub fn temporal_grid_csv(&self) -> String {
        let mut out = String::from("t_days,value\n");
        for (i, v) in self.temporal_grid.iter().enumerate() {
            writeln!(out, "{},{}", self.t_axis.node(i), v)
                .expect("writing to a String cannot fail");
        }
        out
    }
}
