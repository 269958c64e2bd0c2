//! One-step-ahead expected counts on a space-time grid.
//!
//! Each cell's expected count is the integral of the intensity over the cell,
//! using only events strictly before the cell's start time. The integral is a
//! midpoint rule on a `k x k` spatial by `k` temporal sub-grid.

use std::f64::consts::PI;
use std::fmt::Write as _;

use rayon::prelude::*;

use super::{spatial_kernel, HawkesParams};
use crate::background::BackgroundModel;
use crate::catalog::{EventCatalog, Region};
use crate::error::{Error, Result};

/// Pairs with `omega * lag + d^2 / (2 sigma^2)` above this are skipped.
const NEGLIGIBLE_EXPONENT: f64 = 30.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum CellShape {
    /// Square cells tiling the grid.
    #[default]
    Square,
    /// Disc of the same area centred on each square cell.
    Ball,
}

/// A regular grid of `nx * ny` spatial cells of side `cell_km` starting at
/// `(x0, y0)`, repeated over `nt` time slots of `step_days` starting at `t0`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GridSpec {
    pub x0: f64,
    pub y0: f64,
    pub nx: usize,
    pub ny: usize,
    pub cell_km: f64,
    pub t0: f64,
    pub nt: usize,
    pub step_days: f64,
    pub shape: CellShape,
    /// Midpoint sub-grid resolution per axis.
    pub subdivisions: usize,
}

impl GridSpec {
    /// Smallest grid anchored at the region's lower corner and time 0 that
    /// covers region x window.
    pub fn covering(region: &Region, window: f64, cell_km: f64, step_days: f64) -> Result<Self> {
        if !(cell_km > 0.0 && step_days > 0.0 && window > 0.0) {
            return Err(Error::InvalidArgument(format!(
                "grid cell {cell_km} km x {step_days} days over window {window}"
            )));
        }
        let count = |len: f64, step: f64| ((len / step) - 1e-9).ceil().max(1.0) as usize;
        Ok(GridSpec {
            x0: region.x_min,
            y0: region.y_min,
            nx: count(region.width(), cell_km),
            ny: count(region.height(), cell_km),
            cell_km,
            t0: 0.0,
            nt: count(window, step_days),
            step_days,
            shape: CellShape::Square,
            subdivisions: 4,
        })
    }

    pub fn with_shape(mut self, shape: CellShape) -> Self {
        self.shape = shape;
        self
    }

    pub fn with_subdivisions(mut self, k: usize) -> Self {
        self.subdivisions = k;
        self
    }

    pub fn cell_count(&self) -> usize {
        self.nx * self.ny * self.nt
    }

    pub fn cell_center(&self, ix: usize, iy: usize) -> (f64, f64) {
        (
            self.x0 + (ix as f64 + 0.5) * self.cell_km,
            self.y0 + (iy as f64 + 0.5) * self.cell_km,
        )
    }

    pub fn slot_start(&self, it: usize) -> f64 {
        self.t0 + it as f64 * self.step_days
    }

    fn ball_radius(&self) -> f64 {
        self.cell_km / PI.sqrt()
    }

    /// Spatial cell containing `(x, y)`, if any.
    fn spatial_cell(&self, x: f64, y: f64) -> Option<(usize, usize)> {
        let fx = (x - self.x0) / self.cell_km;
        let fy = (y - self.y0) / self.cell_km;
        if fx < 0.0 || fy < 0.0 {
            return None;
        }
        let (ix, iy) = (fx as usize, fy as usize);
        if ix >= self.nx || iy >= self.ny {
            return None;
        }
        if self.shape == CellShape::Ball {
            let (cx, cy) = self.cell_center(ix, iy);
            if (x - cx).hypot(y - cy) > self.ball_radius() {
                return None;
            }
        }
        Some((ix, iy))
    }

    fn slot(&self, t: f64) -> Option<usize> {
        let f = (t - self.t0) / self.step_days;
        (f >= 0.0 && (f as usize) < self.nt).then_some(f as usize)
    }

    /// Quadrature nodes of a spatial cell as offsets from its centre, each
    /// carrying weight `area / k^2`. Ball cells use an equal-area polar grid.
    fn spatial_offsets(&self) -> Vec<(f64, f64)> {
        let k = self.subdivisions;
        let mid = |i: usize| (i as f64 + 0.5) / k as f64;
        let mut out = Vec::with_capacity(k * k);
        for a in 0..k {
            for b in 0..k {
                out.push(match self.shape {
                    CellShape::Square => {
                        ((mid(a) - 0.5) * self.cell_km, (mid(b) - 0.5) * self.cell_km)
                    }
                    CellShape::Ball => {
                        let r = self.ball_radius() * mid(a).sqrt();
                        let phi = 2.0 * PI * mid(b);
                        (r * phi.cos(), r * phi.sin())
                    }
                });
            }
        }
        out
    }

    fn validate(&self) -> Result<()> {
        if self.cell_count() == 0 || self.subdivisions == 0 {
            return Err(Error::Degenerate("prediction grid has no cells".into()));
        }
        if !(self.cell_km > 0.0 && self.step_days > 0.0) {
            return Err(Error::InvalidArgument("grid steps must be positive".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CellPrediction {
    pub ix: usize,
    pub iy: usize,
    pub it: usize,
    /// Full-model expected count.
    pub expected: f64,
    /// Background-only expected count `m0 * int mu`.
    pub background: f64,
    pub observed: u32,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Prediction {
    pub grid: GridSpec,
    /// Ordered by `(it, iy, ix)`.
    pub cells: Vec<CellPrediction>,
    /// Pearson correlation of full-model expected and observed counts.
    pub correlation: f64,
    /// Same for the background-only prediction.
    pub background_correlation: f64,
}

/// Pearson correlation; NaN when either series is constant.
fn pearson(a: impl Iterator<Item = f64> + Clone, b: impl Iterator<Item = f64> + Clone) -> f64 {
    let n = a.clone().count() as f64;
    let ma = a.clone().sum::<f64>() / n;
    let mb = b.clone().sum::<f64>() / n;
    let (mut sab, mut saa, mut sbb) = (0.0, 0.0, 0.0);
    for (x, y) in a.zip(b) {
        sab += (x - ma) * (y - mb);
        saa += (x - ma) * (x - ma);
        sbb += (y - mb) * (y - mb);
    }
    if saa == 0.0 || sbb == 0.0 {
        f64::NAN
    } else {
        sab / (saa * sbb).sqrt()
    }
}

/// Expected and observed counts on every grid cell.
pub fn predict_grid(
    catalog: &EventCatalog,
    params: &HawkesParams,
    bg: &BackgroundModel,
    grid: &GridSpec,
) -> Result<Prediction> {
    params.validate()?;
    grid.validate()?;
    let k = grid.subdivisions;
    let offsets = grid.spatial_offsets();
    let cell_area = match grid.shape {
        CellShape::Square => grid.cell_km * grid.cell_km,
        CellShape::Ball => PI * grid.ball_radius().powi(2),
    };
    let point_weight = cell_area / offsets.len() as f64;
    let dt = grid.step_days / k as f64;
    let (nx, ny) = (grid.nx, grid.ny);

    // Per spatial cell: integral of mu_s.
    let spatial_mass: Vec<f64> = (0..nx * ny)
        .map(|c| {
            let (cx, cy) = grid.cell_center(c % nx, c / nx);
            offsets
                .iter()
                .map(|(ox, oy)| bg.spatial(cx + ox, cy + oy))
                .sum::<f64>()
                * point_weight
        })
        .collect();

    let mut observed = vec![0u32; grid.cell_count()];
    for e in catalog.events() {
        if let (Some((ix, iy)), Some(it)) = (grid.spatial_cell(e.x, e.y), grid.slot(e.t)) {
            observed[(it * ny + iy) * nx + ix] += 1;
        }
    }

    let events = catalog.events();
    let reach = (2.0 * NEGLIGIBLE_EXPONENT).sqrt() * params.sigma;
    let slots: Vec<Vec<CellPrediction>> = (0..grid.nt)
        .into_par_iter()
        .map(|it| {
            let start = grid.slot_start(it);
            let taus: Vec<f64> = (0..k).map(|j| start + (j as f64 + 0.5) * dt).collect();
            let temporal_mass: f64 = taus.iter().map(|&t| bg.temporal(t)).sum::<f64>() * dt;
            // int over the slot of omega exp(-omega (tau - start)).
            let decay: f64 = taus
                .iter()
                .map(|&t| params.omega * (-params.omega * (t - start)).exp())
                .sum::<f64>()
                * dt;

            let mut excitation = vec![0.0; nx * ny];
            let first =
                events.partition_point(|e| e.t < start - NEGLIGIBLE_EXPONENT / params.omega);
            let last = events.partition_point(|e| e.t < start);
            for e in &events[first..last] {
                let lag_exponent = params.omega * (start - e.t);
                let weight = (-lag_exponent).exp();
                let cell_range = |lo: f64, origin: f64, n: usize| {
                    let a = ((lo - reach - origin) / grid.cell_km).floor().max(0.0) as usize;
                    let b = (((lo + reach - origin) / grid.cell_km).floor() + 1.0)
                        .clamp(0.0, n as f64) as usize;
                    a..b
                };
                for iy in cell_range(e.y, grid.y0, ny) {
                    for ix in cell_range(e.x, grid.x0, nx) {
                        let (cx, cy) = grid.cell_center(ix, iy);
                        let mut s = 0.0;
                        for (ox, oy) in &offsets {
                            let (px, py) = (cx + ox, cy + oy);
                            if !catalog.region().contains(px, py) {
                                continue;
                            }
                            let (dx, dy) = (px - e.x, py - e.y);
                            if lag_exponent
                                + (dx * dx + dy * dy) / (2.0 * params.sigma * params.sigma)
                                > NEGLIGIBLE_EXPONENT
                            {
                                continue;
                            }
                            s += spatial_kernel(dx, dy, params.sigma);
                        }
                        excitation[iy * nx + ix] += weight * s;
                    }
                }
            }

            (0..nx * ny)
                .map(|c| {
                    let background = params.m0 * spatial_mass[c] * temporal_mass;
                    let triggered = params.theta * decay * excitation[c] * point_weight;
                    CellPrediction {
                        ix: c % nx,
                        iy: c / nx,
                        it,
                        expected: background + triggered,
                        background,
                        observed: observed[(it * ny) * nx + c],
                    }
                })
                .collect()
        })
        .collect();
    let cells: Vec<CellPrediction> = slots.into_iter().flatten().collect();
    let obs = cells.iter().map(|c| c.observed as f64);
    let correlation = pearson(cells.iter().map(|c| c.expected), obs.clone());
    let background_correlation = pearson(cells.iter().map(|c| c.background), obs);
    Ok(Prediction {
        grid: *grid,
        cells,
        correlation,
        background_correlation,
    })
}

/// Long-form CSV `cell_x,cell_y,hour,expected,observed`; `cell_x`/`cell_y`
/// are cell centres in km and `hour` is the slot index.
pub fn prediction_csv(prediction: &Prediction) -> String {
    let mut out = String::from("cell_x,cell_y,hour,expected,observed\n");
    for c in &prediction.cells {
        let (x, y) = prediction.grid.cell_center(c.ix, c.iy);
        writeln!(out, "{x},{y},{},{},{}", c.it, c.expected, c.observed)
            .expect("writing to a String cannot fail");
    }
    out
}
