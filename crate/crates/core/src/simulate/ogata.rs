use rand::Rng;
use rand_distr::StandardNormal;
use statrs::distribution::{ContinuousCDF, Normal};

use super::{snap, BackgroundSampler, LabeledCatalog, SimConfig};
use crate::catalog::Event;
use crate::error::Result;
use crate::rng::{derive_seed, substream};

const OGATA_SALT: u64 = 3;

/// Beyond this `omega * lag` a parent's weight is treated as zero.
const NEGLIGIBLE_EXPONENT: f64 = 40.0;

/// Simulates by Ogata's sequential thinning on the region-integrated
/// intensity
///
/// ```text
/// Lambda(t) = m0 * mu_t(t) + theta * sum_{t_i < t} omega exp(-omega (t - t_i)) G_i
/// ```
///
/// where `G_i` is the mass of event `i`'s Gaussian kernel inside the region.
/// Each accepted point picks the background or one parent in proportion to
/// its share of the intensity, which yields parentage labels.
pub fn simulate_ogata(config: &SimConfig) -> Result<LabeledCatalog> {
    config.validate()?;
    let p = config.params;
    let r = config.region;
    let sampler = BackgroundSampler::new(config)?;
    let mut rng = substream(derive_seed(config.seed, OGATA_SALT), 0);
    let unit = Normal::new(0.0, 1.0).expect("unit normal");
    let in_region_mass = |e: &Event| {
        let axis =
            |v: f64, lo: f64, hi: f64| unit.cdf((hi - v) / p.sigma) - unit.cdf((lo - v) / p.sigma);
        axis(e.x, r.x_min, r.x_max) * axis(e.y, r.y_min, r.y_max)
    };

    let mut events: Vec<Event> = Vec::new();
    let mut mass: Vec<f64> = Vec::new();
    let mut parent: Vec<Option<usize>> = Vec::new();
    let mut generation: Vec<u32> = Vec::new();
    // sum_i omega exp(-omega (t - t_i)) G_i at the current time.
    let mut excitation = 0.0;
    let mut t = 0.0;
    loop {
        let bound = sampler.rate_bound() + p.theta * excitation;
        if bound <= 0.0 {
            break;
        }
        let step = -(1.0 - rng.random::<f64>()).ln() / bound;
        let next = t + step;
        if next <= t {
            continue;
        }
        if next >= config.window {
            break;
        }
        excitation *= (-p.omega * step).exp();
        t = next;
        let background = sampler.rate_at(t);
        let total = background + p.theta * excitation;
        let u = rng.random::<f64>() * bound;
        if u >= total {
            continue;
        }
        let (event, from) = if u < background {
            let (x, y) = sampler.location(&mut rng);
            (Event::new(x, y, t), None)
        } else {
            let mut target = (u - background) / p.theta;
            let mut chosen = None;
            for i in (0..events.len()).rev() {
                let a = p.omega * (t - events[i].t);
                if a > NEGLIGIBLE_EXPONENT {
                    break;
                }
                let w = p.omega * (-a).exp() * mass[i];
                chosen = Some(i);
                if target < w {
                    break;
                }
                target -= w;
            }
            let Some(i) = chosen else { continue };
            let e = events[i];
            let (x, y) = loop {
                let x = e.x + p.sigma * rng.sample::<f64, _>(StandardNormal);
                let y = e.y + p.sigma * rng.sample::<f64, _>(StandardNormal);
                if r.contains(x, y) {
                    break (x, y);
                }
            };
            (Event::new(x, y, t), Some(i))
        };
        let g = in_region_mass(&event);
        excitation += p.omega * g;
        generation.push(from.map_or(0, |i| generation[i] + 1));
        parent.push(from);
        mass.push(g);
        events.push(event);
    }
    let labeled = LabeledCatalog::assemble(
        events,
        parent,
        generation,
        config.region,
        config.window,
        format!("simulated (thinning), seed {}", config.seed),
    )?;
    match config.snap {
        Some(s) => snap(&labeled, s.spatial_m, s.temporal_s),
        None => Ok(labeled),
    }
}
