//! Enumeration of spatially close event pairs.

use crate::catalog::Event;

/// Catalogs above this size use the grid index under [`PairMethod::Auto`].
const GRID_THRESHOLD: usize = 2000;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum PairMethod {
    #[default]
    Auto,
    BruteForce,
    GridIndex,
}

/// Calls `f(i, j, d)` once for every unordered pair `i < j` with distance
/// `d <= cutoff`. Both methods visit the same pairs and compute `d` the same
/// way; only the visiting order differs.
pub fn for_each_pair(
    events: &[Event],
    cutoff: f64,
    method: PairMethod,
    mut f: impl FnMut(usize, usize, f64),
) {
    let use_grid = match method {
        PairMethod::Auto => events.len() > GRID_THRESHOLD,
        PairMethod::BruteForce => false,
        PairMethod::GridIndex => true,
    };
    if !use_grid || !(cutoff > 0.0) || !cutoff.is_finite() {
        for i in 0..events.len() {
            for j in i + 1..events.len() {
                let d = events[i].distance(&events[j]);
                if d <= cutoff {
                    f(i, j, d);
                }
            }
        }
        return;
    }

    let x0 = events.iter().map(|e| e.x).fold(f64::INFINITY, f64::min);
    let y0 = events.iter().map(|e| e.y).fold(f64::INFINITY, f64::min);
    let x1 = events.iter().map(|e| e.x).fold(f64::NEG_INFINITY, f64::max);
    let y1 = events.iter().map(|e| e.y).fold(f64::NEG_INFINITY, f64::max);
    // Cells slightly wider than the cutoff, so that any pair within the
    // cutoff lies in the same or adjacent cells despite rounding; at most
    // 4096 cells per axis.
    let cell = (cutoff * (1.0 + 1e-9)).max((x1 - x0).max(y1 - y0) / 4000.0);
    let nx = ((x1 - x0) / cell).floor() as usize + 1;
    let ny = ((y1 - y0) / cell).floor() as usize + 1;
    let cell_of = |e: &Event| {
        let cx = (((e.x - x0) / cell) as usize).min(nx - 1);
        let cy = (((e.y - y0) / cell) as usize).min(ny - 1);
        (cx, cy)
    };
    // Bucket events by cell (counting sort, stable in event index).
    let mut start = vec![0usize; nx * ny + 1];
    for e in events {
        let (cx, cy) = cell_of(e);
        start[cy * nx + cx + 1] += 1;
    }
    for c in 0..nx * ny {
        start[c + 1] += start[c];
    }
    let mut fill = start.clone();
    let mut members = vec![0usize; events.len()];
    for (i, e) in events.iter().enumerate() {
        let (cx, cy) = cell_of(e);
        members[fill[cy * nx + cx]] = i;
        fill[cy * nx + cx] += 1;
    }
    for (i, e) in events.iter().enumerate() {
        let (cx, cy) = cell_of(e);
        for ny_ in cy.saturating_sub(1)..=(cy + 1).min(ny - 1) {
            for nx_ in cx.saturating_sub(1)..=(cx + 1).min(nx - 1) {
                let c = ny_ * nx + nx_;
                for &j in &members[start[c]..start[c + 1]] {
                    if j <= i {
                        continue;
                    }
                    let d = e.distance(&events[j]);
                    if d <= cutoff {
                        f(i, j, d);
                    }
                }
            }
        }
    }
}
