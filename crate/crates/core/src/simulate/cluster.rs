use rand::Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;

use super::{poisson_count, snap, BackgroundSampler, LabeledCatalog, SimConfig};
use crate::catalog::Event;
use crate::error::Result;
use crate::rng::{derive_seed, substream, StreamRng};

const BACKGROUND_SALT: u64 = 1;
const CASCADE_SALT: u64 = 2;

/// One cascade: events in generation order with local parent indices.
struct Cascade {
    events: Vec<Event>,
    parent: Vec<Option<usize>>,
    generation: Vec<u32>,
}

/// Exp(omega) lag truncated to `(0, remaining]`.
fn truncated_lag(rng: &mut StreamRng, omega: f64, remaining: f64) -> f64 {
    let mass = -(-omega * remaining).exp_m1();
    let v = 1.0 - rng.random::<f64>();
    (-(-v * mass).ln_1p() / omega).min(remaining)
}

fn cascade(config: &SimConfig, root: Event, rng: &mut StreamRng) -> Result<Cascade> {
    let p = &config.params;
    let mut c = Cascade {
        events: vec![root],
        parent: vec![None],
        generation: vec![0],
    };
    let mut next = 0;
    while next < c.events.len() {
        let e = c.events[next];
        let remaining = config.window - e.t;
        let expected = p.theta * -(-p.omega * remaining).exp_m1();
        for _ in 0..poisson_count(rng, expected)? {
            let lag = truncated_lag(rng, p.omega, remaining);
            let x = e.x + p.sigma * rng.sample::<f64, _>(StandardNormal);
            let y = e.y + p.sigma * rng.sample::<f64, _>(StandardNormal);
            let t = e.t + lag;
            if !config.region.contains(x, y) || t <= e.t {
                continue;
            }
            c.events.push(Event::new(x, y, t));
            c.parent.push(Some(next));
            c.generation.push(c.generation[next] + 1);
        }
        next += 1;
    }
    Ok(c)
}

/// Simulates by the cluster construction. Background events use the stream
/// derived from the seed; the cascade of background event `i` (in time
/// order) uses its own substream `i`, so the result does not depend on
/// thread scheduling.
pub fn simulate(config: &SimConfig) -> Result<LabeledCatalog> {
    config.validate()?;
    let sampler = BackgroundSampler::new(config)?;
    let roots = sampler.events(&mut substream(derive_seed(config.seed, BACKGROUND_SALT), 0))?;
    let cascade_seed = derive_seed(config.seed, CASCADE_SALT);
    let cascades: Vec<Cascade> = roots
        .par_iter()
        .enumerate()
        .map(|(i, &root)| cascade(config, root, &mut substream(cascade_seed, i as u64)))
        .collect::<Result<_>>()?;

    let total: usize = cascades.iter().map(|c| c.events.len()).sum();
    let mut events = Vec::with_capacity(total);
    let mut parent = Vec::with_capacity(total);
    let mut generation = Vec::with_capacity(total);
    for c in cascades {
        let offset = events.len();
        events.extend(c.events);
        parent.extend(c.parent.into_iter().map(|p| p.map(|p| p + offset)));
        generation.extend(c.generation);
    }
    let labeled = LabeledCatalog::assemble(
        events,
        parent,
        generation,
        config.region,
        config.window,
        format!("simulated (cluster), seed {}", config.seed),
    )?;
    match config.snap {
        Some(s) => snap(&labeled, s.spatial_m, s.temporal_s),
        None => Ok(labeled),
    }
}
