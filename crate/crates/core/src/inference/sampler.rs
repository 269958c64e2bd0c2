//! Multi-chain Hamiltonian Monte Carlo with a fixed path length by default,
//! the No-U-Turn sampler (multinomial trajectory sampling with the generalized
//! U-turn criterion) as an option, and random-walk Metropolis for debugging.
//!
//! Warmup tunes the step size by dual averaging towards a target acceptance
//! rate and a diagonal inverse metric from windowed variance estimates.

use rand::Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;

use super::LogDensity;
use crate::error::{Error, Result};
use crate::rng::{substream, StreamRng};

/// Energy errors above this count as divergent transitions.
const DIVERGENCE_THRESHOLD: f64 = 1000.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Method {
    /// Fixed path of `leapfrog_steps` steps.
    #[default]
    Hmc,
    Nuts,
    RandomWalk,
}

impl std::str::FromStr for Method {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "nuts" => Ok(Method::Nuts),
            "hmc" => Ok(Method::Hmc),
            "random-walk" => Ok(Method::RandomWalk),
            other => Err(Error::InvalidArgument(format!(
                "unknown sampler {other:?} (expected nuts, hmc or random-walk)"
            ))),
        }
    }
}

impl std::fmt::Display for Method {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Method::Nuts => "nuts",
            Method::Hmc => "hmc",
            Method::RandomWalk => "random-walk",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SamplerConfig {
    pub chains: usize,
    /// Iterations per chain, warmup included.
    pub iterations: usize,
    pub warmup: usize,
    pub seed: u64,
    /// Path length of [`Method::Hmc`].
    pub leapfrog_steps: usize,
    /// Trajectories of [`Method::Nuts`] stop after `2^max_tree_depth - 1` steps.
    pub max_tree_depth: usize,
    pub target_accept: f64,
    pub method: Method,
    pub max_init_attempts: usize,
}

impl Default for SamplerConfig {
    fn default() -> Self {
        SamplerConfig {
            chains: 4,
            iterations: 200,
            warmup: 100,
            seed: 0,
            leapfrog_steps: 16,
            max_tree_depth: 10,
            target_accept: 0.8,
            method: Method::default(),
            max_init_attempts: 10,
        }
    }
}

impl SamplerConfig {
    pub fn validate(&self) -> Result<()> {
        if self.chains == 0
            || self.iterations <= self.warmup
            || self.leapfrog_steps == 0
            || !(1..=30).contains(&self.max_tree_depth)
            || self.max_init_attempts == 0
            || !(self.target_accept > 0.0 && self.target_accept < 1.0)
        {
            return Err(Error::InvalidArgument(format!(
                "invalid sampler config {self:?}"
            )));
        }
        Ok(())
    }

    pub fn kept_per_chain(&self) -> usize {
        self.iterations - self.warmup
    }
}

/// Post-warmup output of one chain, on the unconstrained scale.
#[derive(Debug, Clone, PartialEq)]
pub struct ChainOutput {
    pub draws: Vec<Vec<f64>>,
    /// Mean acceptance statistic over kept iterations.
    pub acceptance: f64,
    pub step_size: f64,
    pub inverse_metric: Vec<f64>,
    pub divergences: usize,
    /// Kept NUTS transitions that stopped at the maximum tree depth.
    pub max_depth_hits: usize,
}

/// Runs `config.chains` independent chains. Chain `c` draws from the stream
/// `(config.seed, c)`, so output does not depend on scheduling.
pub fn run_chains<T: LogDensity>(target: &T, config: &SamplerConfig) -> Result<Vec<ChainOutput>> {
    config.validate()?;
    (0..config.chains)
        .into_par_iter()
        .map(|c| {
            let mut rng = substream(config.seed, c as u64);
            let chain = Chain::start(target, config, &mut rng)?;
            match config.method {
                Method::Nuts | Method::Hmc => chain.run_hmc(config, &mut rng),
                Method::RandomWalk => chain.run_rwm(config, &mut rng),
            }
        })
        .collect()
}

/// Log density, treating errors and non-finite values as zero density.
fn evaluate<T: LogDensity>(target: &T, z: &[f64]) -> Option<(f64, Vec<f64>)> {
    match target.log_density_grad(z) {
        Ok((v, g)) if v.is_finite() && g.iter().all(|x| x.is_finite()) => Some((v, g)),
        _ => None,
    }
}

/// A point in phase space.
#[derive(Debug, Clone)]
struct Phase {
    z: Vec<f64>,
    p: Vec<f64>,
    grad: Vec<f64>,
    logp: f64,
}

/// Bookkeeping shared by every subtree of one NUTS transition.
struct Trajectory {
    h0: f64,
    eps: f64,
    leapfrogs: usize,
    metro_sum: f64,
    divergent: bool,
}

/// A finished NUTS subtree. `*_beg` is the end adjacent to the existing
/// trajectory, `*_end` the outer end.
struct Subtree {
    valid: bool,
    log_weight: f64,
    proposal: Phase,
    rho: Vec<f64>,
    p_beg: Vec<f64>,
    p_end: Vec<f64>,
    sharp_beg: Vec<f64>,
    sharp_end: Vec<f64>,
}

fn log_sum_exp(a: f64, b: f64) -> f64 {
    if a == f64::NEG_INFINITY {
        return b;
    }
    if b == f64::NEG_INFINITY {
        return a;
    }
    let m = a.max(b);
    m + ((a - m).exp() + (b - m).exp()).ln()
}

fn add(a: &[f64], b: &[f64]) -> Vec<f64> {
    a.iter().zip(b).map(|(x, y)| x + y).collect()
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Generalized no-U-turn criterion: both ends still move along `rho`.
fn no_u_turn(sharp_minus: &[f64], sharp_plus: &[f64], rho: &[f64]) -> bool {
    dot(sharp_plus, rho) > 0.0 && dot(sharp_minus, rho) > 0.0
}

struct Chain<'a, T> {
    target: &'a T,
    z: Vec<f64>,
    logp: f64,
    grad: Vec<f64>,
    inv_metric: Vec<f64>,
}

/// Dual-averaging step size adaptation.
struct DualAveraging {
    mu: f64,
    h_bar: f64,
    log_eps_bar: f64,
    count: f64,
    target: f64,
}

impl DualAveraging {
    const GAMMA: f64 = 0.05;
    const T0: f64 = 10.0;
    const KAPPA: f64 = 0.75;

    fn new(eps: f64, target: f64) -> Self {
        DualAveraging {
            mu: (10.0 * eps).ln(),
            h_bar: 0.0,
            log_eps_bar: 0.0,
            count: 0.0,
            target,
        }
    }

    /// Returns the next step size.
    fn update(&mut self, accept: f64) -> f64 {
        self.count += 1.0;
        let eta = 1.0 / (self.count + Self::T0);
        self.h_bar = (1.0 - eta) * self.h_bar + eta * (self.target - accept);
        let log_eps = self.mu - self.count.sqrt() / Self::GAMMA * self.h_bar;
        let w = self.count.powf(-Self::KAPPA);
        self.log_eps_bar = w * log_eps + (1.0 - w) * self.log_eps_bar;
        log_eps.exp()
    }

    fn final_step(&self) -> f64 {
        self.log_eps_bar.exp()
    }
}

/// Slow adaptation windows `[start, end)` for a warmup of `warmup`
/// iterations: an initial fast buffer, doubling windows, and a terminal fast
/// buffer. Warmups too short for the 75 / 25 / 50 layout use a single window
/// between 15% and 90%.
pub(crate) fn adaptation_windows(warmup: usize) -> Vec<(usize, usize)> {
    if warmup < 20 {
        return Vec::new();
    }
    let (init, term, base) = if warmup >= 150 {
        (75, 50, 25)
    } else {
        let init = (0.15 * warmup as f64) as usize;
        let term = (0.1 * warmup as f64) as usize;
        (init, term, warmup - init - term)
    };
    let slow_end = warmup - term;
    let mut windows = Vec::new();
    let mut start = init;
    let mut size = base;
    while start < slow_end {
        let mut end = start + size;
        if end + 2 * size > slow_end {
            end = slow_end;
        }
        windows.push((start, end));
        start = end;
        size *= 2;
    }
    windows
}

/// Regularized sample variance per coordinate, shrunk towards `1e-3`.
fn regularized_variance(draws: &[Vec<f64>]) -> Vec<f64> {
    let n = draws.len() as f64;
    let d = draws[0].len();
    (0..d)
        .map(|k| {
            let mean = draws.iter().map(|z| z[k]).sum::<f64>() / n;
            let var = draws.iter().map(|z| (z[k] - mean).powi(2)).sum::<f64>() / (n - 1.0);
            (n / (n + 5.0)) * var + 1e-3 * (5.0 / (n + 5.0))
        })
        .collect()
}

impl<'a, T: LogDensity> Chain<'a, T> {
    fn start(target: &'a T, config: &SamplerConfig, rng: &mut StreamRng) -> Result<Self> {
        let mut reason = String::from("no attempt made");
        for _ in 0..config.max_init_attempts {
            let z = target.initial_point(rng);
            match target.log_density_grad(&z) {
                Ok((logp, grad)) if logp.is_finite() && grad.iter().all(|g| g.is_finite()) => {
                    let d = z.len();
                    return Ok(Chain {
                        target,
                        z,
                        logp,
                        grad,
                        inv_metric: vec![1.0; d],
                    });
                }
                Ok((logp, _)) => reason = format!("log density {logp} at {z:?}"),
                Err(e) => reason = e.to_string(),
            }
        }
        Err(Error::Initialization {
            attempts: config.max_init_attempts,
            reason,
        })
    }

    fn hamiltonian(&self, logp: f64, p: &[f64]) -> f64 {
        let kinetic: f64 = p.iter().zip(&self.inv_metric).map(|(p, m)| m * p * p).sum();
        -logp + 0.5 * kinetic
    }

    fn draw_momentum(&self, rng: &mut StreamRng) -> Vec<f64> {
        self.inv_metric
            .iter()
            .map(|m| rng.sample::<f64, _>(StandardNormal) / m.sqrt())
            .collect()
    }

    fn sharp(&self, p: &[f64]) -> Vec<f64> {
        p.iter().zip(&self.inv_metric).map(|(p, m)| m * p).collect()
    }

    /// One leapfrog step; `None` if it leaves the support.
    fn step(&self, from: &Phase, eps: f64) -> Option<Phase> {
        let mut p = from.p.clone();
        for (pk, g) in p.iter_mut().zip(&from.grad) {
            *pk += 0.5 * eps * g;
        }
        let z: Vec<f64> = from
            .z
            .iter()
            .zip(&p)
            .zip(&self.inv_metric)
            .map(|((z, p), m)| z + eps * m * p)
            .collect();
        let (logp, grad) = evaluate(self.target, &z)?;
        for (pk, g) in p.iter_mut().zip(&grad) {
            *pk += 0.5 * eps * g;
        }
        Some(Phase { z, p, grad, logp })
    }

    fn current(&self, p: Vec<f64>) -> Phase {
        Phase {
            z: self.z.clone(),
            p,
            grad: self.grad.clone(),
            logp: self.logp,
        }
    }

    fn accept(&mut self, to: Phase) {
        self.z = to.z;
        self.logp = to.logp;
        self.grad = to.grad;
    }

    /// `steps` leapfrog steps from the current state.
    fn leapfrog(&self, p0: &[f64], eps: f64, steps: usize) -> Option<Phase> {
        let mut at = self.current(p0.to_vec());
        for _ in 0..steps {
            at = self.step(&at, eps)?;
        }
        Some(at)
    }

    /// One HMC transition; returns the acceptance statistic and whether the
    /// trajectory diverged.
    fn hmc_step(&mut self, eps: f64, steps: usize, rng: &mut StreamRng) -> (f64, bool) {
        let p0 = self.draw_momentum(rng);
        let h0 = self.hamiltonian(self.logp, &p0);
        let Some(end) = self.leapfrog(&p0, eps, steps) else {
            return (0.0, true);
        };
        let delta = h0 - self.hamiltonian(end.logp, &end.p);
        if !delta.is_finite() || -delta > DIVERGENCE_THRESHOLD {
            return (0.0, true);
        }
        let accept = delta.exp().min(1.0);
        if rng.random::<f64>() < accept {
            self.accept(end);
        }
        (accept, false)
    }

    /// Grows a subtree of `2^depth` steps from `edge`, which is left at the
    /// subtree's outer end.
    fn build_tree(
        &self,
        depth: usize,
        edge: &mut Phase,
        traj: &mut Trajectory,
        rng: &mut StreamRng,
    ) -> Subtree {
        if depth == 0 {
            traj.leapfrogs += 1;
            let next = self.step(edge, traj.eps);
            let h = next
                .as_ref()
                .map(|n| self.hamiltonian(n.logp, &n.p))
                .filter(|h| h.is_finite())
                .unwrap_or(f64::INFINITY);
            if h - traj.h0 > DIVERGENCE_THRESHOLD {
                traj.divergent = true;
            }
            let log_weight = traj.h0 - h;
            traj.metro_sum += log_weight.min(0.0).exp();
            if let Some(next) = next {
                *edge = next;
            }
            let sharp = self.sharp(&edge.p);
            return Subtree {
                valid: !traj.divergent,
                log_weight,
                proposal: edge.clone(),
                rho: edge.p.clone(),
                p_beg: edge.p.clone(),
                p_end: edge.p.clone(),
                sharp_beg: sharp.clone(),
                sharp_end: sharp,
            };
        }
        let inner = self.build_tree(depth - 1, edge, traj, rng);
        if !inner.valid {
            return inner;
        }
        let outer = self.build_tree(depth - 1, edge, traj, rng);
        if !outer.valid {
            return outer;
        }
        let log_weight = log_sum_exp(inner.log_weight, outer.log_weight);
        let take_outer = rng.random::<f64>() < (outer.log_weight - log_weight).exp();
        let rho = add(&inner.rho, &outer.rho);
        let valid = no_u_turn(&inner.sharp_beg, &outer.sharp_end, &rho)
            && no_u_turn(
                &inner.sharp_beg,
                &outer.sharp_beg,
                &add(&inner.rho, &outer.p_beg),
            )
            && no_u_turn(
                &inner.sharp_end,
                &outer.sharp_end,
                &add(&outer.rho, &inner.p_end),
            );
        Subtree {
            valid,
            log_weight,
            proposal: if take_outer {
                outer.proposal
            } else {
                inner.proposal
            },
            rho,
            p_beg: inner.p_beg,
            p_end: outer.p_end,
            sharp_beg: inner.sharp_beg,
            sharp_end: outer.sharp_end,
        }
    }

    /// One NUTS transition; returns the acceptance statistic, whether a
    /// divergence ended the trajectory, and whether it hit the depth limit.
    fn nuts_step(&mut self, eps: f64, max_depth: usize, rng: &mut StreamRng) -> (f64, bool, bool) {
        let p0 = self.draw_momentum(rng);
        let start = self.current(p0.clone());
        let sharp0 = self.sharp(&p0);
        let mut traj = Trajectory {
            h0: self.hamiltonian(self.logp, &p0),
            eps,
            leapfrogs: 0,
            metro_sum: 0.0,
            divergent: false,
        };
        let (mut fwd, mut bck) = (start.clone(), start.clone());
        let (mut p_fwd_bck, mut p_bck_fwd) = (p0.clone(), p0.clone());
        let (mut sharp_fwd_fwd, mut sharp_fwd_bck) = (sharp0.clone(), sharp0.clone());
        let (mut sharp_bck_fwd, mut sharp_bck_bck) = (sharp0.clone(), sharp0);
        let mut rho = p0;
        let mut log_weight = 0.0;
        let mut sample = start;
        let mut depth = 0;
        while depth < max_depth {
            let (rho_fwd, rho_bck, tree) = if rng.random::<f64>() > 0.5 {
                traj.eps = eps;
                p_bck_fwd = p_fwd_bck.clone();
                sharp_bck_fwd = sharp_fwd_bck.clone();
                let tree = self.build_tree(depth, &mut fwd, &mut traj, rng);
                p_fwd_bck = tree.p_beg.clone();
                sharp_fwd_bck = tree.sharp_beg.clone();
                sharp_fwd_fwd = tree.sharp_end.clone();
                (tree.rho.clone(), rho.clone(), tree)
            } else {
                traj.eps = -eps;
                p_fwd_bck = p_bck_fwd.clone();
                sharp_fwd_bck = sharp_bck_fwd.clone();
                let tree = self.build_tree(depth, &mut bck, &mut traj, rng);
                p_bck_fwd = tree.p_beg.clone();
                sharp_bck_fwd = tree.sharp_beg.clone();
                sharp_bck_bck = tree.sharp_end.clone();
                (rho.clone(), tree.rho.clone(), tree)
            };
            if !tree.valid {
                break;
            }
            depth += 1;
            // biased progressive sampling favours the new subtree
            if tree.log_weight > log_weight
                || rng.random::<f64>() < (tree.log_weight - log_weight).exp()
            {
                sample = tree.proposal;
            }
            log_weight = log_sum_exp(log_weight, tree.log_weight);
            rho = add(&rho_bck, &rho_fwd);
            let persist = no_u_turn(&sharp_bck_bck, &sharp_fwd_fwd, &rho)
                && no_u_turn(&sharp_bck_bck, &sharp_fwd_bck, &add(&rho_bck, &p_fwd_bck))
                && no_u_turn(&sharp_bck_fwd, &sharp_fwd_fwd, &add(&rho_fwd, &p_bck_fwd));
            if !persist {
                break;
            }
        }
        self.accept(sample);
        let accept = traj.metro_sum / traj.leapfrogs.max(1) as f64;
        (accept, traj.divergent, depth == max_depth)
    }

    /// Doubles or halves a unit step until a single leapfrog step's
    /// acceptance crosses 0.5.
    fn reasonable_step(&self, rng: &mut StreamRng) -> f64 {
        let mut eps: f64 = 1.0;
        let accept_at = |eps: f64, rng: &mut StreamRng| {
            let p0 = self.draw_momentum(rng);
            let h0 = self.hamiltonian(self.logp, &p0);
            match self.leapfrog(&p0, eps, 1) {
                Some(end) => {
                    let d = h0 - self.hamiltonian(end.logp, &end.p);
                    if d.is_finite() {
                        d.exp().min(1.0)
                    } else {
                        0.0
                    }
                }
                None => 0.0,
            }
        };
        let up = accept_at(eps, rng) > 0.5;
        for _ in 0..50 {
            let a = accept_at(eps, rng);
            if up != (a > 0.5) {
                break;
            }
            eps = if up { eps * 2.0 } else { eps * 0.5 };
        }
        eps
    }

    fn run_hmc(mut self, config: &SamplerConfig, rng: &mut StreamRng) -> Result<ChainOutput> {
        let windows = adaptation_windows(config.warmup);
        let mut eps = self.reasonable_step(rng);
        let mut adapt = DualAveraging::new(eps, config.target_accept);
        let mut window_draws: Vec<Vec<f64>> = Vec::new();
        let mut draws = Vec::with_capacity(config.kept_per_chain());
        let (mut accept_sum, mut divergences, mut max_depth_hits) = (0.0, 0, 0);
        for iter in 0..config.iterations {
            let warm = iter < config.warmup;
            let jittered = eps * rng.random_range(0.9..1.1);
            let (accept, divergent, saturated) = match config.method {
                Method::Nuts => self.nuts_step(jittered, config.max_tree_depth, rng),
                _ => {
                    let (a, d) = self.hmc_step(jittered, config.leapfrog_steps, rng);
                    (a, d, false)
                }
            };
            if warm {
                eps = adapt.update(accept);
                if let Some(&(start, end)) = windows.iter().find(|(s, e)| (*s..*e).contains(&iter))
                {
                    if iter == start {
                        window_draws.clear();
                    }
                    window_draws.push(self.z.clone());
                    if iter + 1 == end {
                        self.inv_metric = regularized_variance(&window_draws);
                        eps = self.reasonable_step(rng);
                        adapt = DualAveraging::new(eps, config.target_accept);
                    }
                }
                if iter + 1 == config.warmup {
                    eps = adapt.final_step();
                }
            } else {
                accept_sum += accept;
                divergences += usize::from(divergent);
                max_depth_hits += usize::from(saturated);
                draws.push(self.z.clone());
            }
        }
        Ok(ChainOutput {
            acceptance: accept_sum / config.kept_per_chain() as f64,
            draws,
            step_size: eps,
            inverse_metric: self.inv_metric,
            divergences,
            max_depth_hits,
        })
    }

    /// Gaussian random-walk Metropolis; the proposal scale is tuned during
    /// warmup towards 25% acceptance.
    fn run_rwm(mut self, config: &SamplerConfig, rng: &mut StreamRng) -> Result<ChainOutput> {
        let mut log_scale = (2.38 / (self.z.len() as f64).sqrt()).ln() - 2.0;
        let mut draws = Vec::with_capacity(config.kept_per_chain());
        let mut accept_sum = 0.0;
        for iter in 0..config.iterations {
            let scale = log_scale.exp();
            let proposal: Vec<f64> = self
                .z
                .iter()
                .map(|z| z + scale * rng.sample::<f64, _>(StandardNormal))
                .collect();
            let accept = match evaluate(self.target, &proposal) {
                Some((logp, grad)) => {
                    let a = (logp - self.logp).exp().min(1.0);
                    if rng.random::<f64>() < a {
                        self.z = proposal;
                        self.logp = logp;
                        self.grad = grad;
                    }
                    a
                }
                None => 0.0,
            };
            if iter < config.warmup {
                log_scale += (accept - 0.25) / (iter as f64 + 1.0).sqrt();
            } else {
                accept_sum += accept;
                draws.push(self.z.clone());
            }
        }
        Ok(ChainOutput {
            acceptance: accept_sum / config.kept_per_chain() as f64,
            draws,
            step_size: log_scale.exp(),
            inverse_metric: self.inv_metric,
            divergences: 0,
            max_depth_hits: 0,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    /// Independent normals with the given means and standard deviations.
    struct Gaussian {
        mean: Vec<f64>,
        sd: Vec<f64>,
    }

    impl LogDensity for Gaussian {
        fn dim(&self) -> usize {
            self.mean.len()
        }

        fn log_density_grad(&self, z: &[f64]) -> Result<(f64, Vec<f64>)> {
            let mut v = 0.0;
            let mut g = Vec::with_capacity(z.len());
            for ((z, m), s) in z.iter().zip(&self.mean).zip(&self.sd) {
                let u = (z - m) / s;
                v -= 0.5 * u * u;
                g.push(-u / s);
            }
            Ok((v, g))
        }

        fn initial_point(&self, rng: &mut StreamRng) -> Vec<f64> {
            self.mean
                .iter()
                .map(|m| m + rng.random_range(-2.0..2.0))
                .collect()
        }
    }

    #[test]
    fn windows_for_default_warmup() {
        assert_eq!(adaptation_windows(100), vec![(15, 90)]);
        assert_eq!(
            adaptation_windows(1000),
            vec![(75, 100), (100, 150), (150, 250), (250, 450), (450, 950)]
        );
        assert!(adaptation_windows(10).is_empty());
    }

    #[test]
    fn standard_normal_moments() {
        let target = Gaussian {
            mean: vec![0.0, 0.0],
            sd: vec![1.0, 1.0],
        };
        let config = SamplerConfig {
            iterations: 1500,
            warmup: 500,
            seed: 11,
            ..SamplerConfig::default()
        };
        let out = run_chains(&target, &config).unwrap();
        let all: Vec<f64> = out
            .iter()
            .flat_map(|c| c.draws.iter().map(|z| z[0]))
            .collect();
        let n = all.len() as f64;
        let mean = all.iter().sum::<f64>() / n;
        let var = all.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0);
        assert!(mean.abs() < 0.1, "mean {mean}");
        assert!((var - 1.0).abs() < 0.1, "var {var}");
        assert!(out.iter().all(|c| c.acceptance > 0.6));
    }

    #[test]
    fn metric_adapts_to_scales() {
        let target = Gaussian {
            mean: vec![3.0, -1.0],
            sd: vec![0.01, 5.0],
        };
        let config = SamplerConfig {
            chains: 1,
            iterations: 400,
            warmup: 300,
            seed: 5,
            ..SamplerConfig::default()
        };
        let out = run_chains(&target, &config).unwrap();
        let m = &out[0].inverse_metric;
        assert!(m[1] / m[0] > 1e4, "{m:?}");
    }

    #[test]
    fn fixed_path_hmc_moments() {
        let target = Gaussian {
            mean: vec![-1.0, 4.0],
            sd: vec![2.0, 0.5],
        };
        let config = SamplerConfig {
            iterations: 1500,
            warmup: 500,
            seed: 3,
            method: Method::Hmc,
            ..SamplerConfig::default()
        };
        let out = run_chains(&target, &config).unwrap();
        let all: Vec<f64> = out
            .iter()
            .flat_map(|c| c.draws.iter().map(|z| z[1]))
            .collect();
        let mean = all.iter().sum::<f64>() / all.len() as f64;
        assert!((mean - 4.0).abs() < 0.05, "{mean}");
        assert!(out.iter().all(|c| c.max_depth_hits == 0));
    }

    #[test]
    fn nuts_reaches_distant_mode_within_short_warmup() {
        let target = Gaussian {
            mean: vec![40.0, -25.0, 0.0],
            sd: vec![0.05, 1.0, 3.0],
        };
        let config = SamplerConfig {
            iterations: 200,
            warmup: 100,
            seed: 9,
            method: Method::Nuts,
            ..SamplerConfig::default()
        };
        let out = run_chains(&target, &config).unwrap();
        for chain in &out {
            let mean = chain.draws.iter().map(|z| z[0]).sum::<f64>() / chain.draws.len() as f64;
            assert!((mean - 40.0).abs() < 0.02, "{mean}");
            assert_eq!(chain.divergences, 0);
        }
    }

    #[test]
    fn method_round_trips_through_text() {
        for m in [Method::Nuts, Method::Hmc, Method::RandomWalk] {
            assert_eq!(m.to_string().parse::<Method>().unwrap(), m);
        }
        assert!("gibbs".parse::<Method>().is_err());
    }

    #[test]
    fn random_walk_targets_the_mean() {
        let target = Gaussian {
            mean: vec![2.0],
            sd: vec![0.5],
        };
        let config = SamplerConfig {
            iterations: 4000,
            warmup: 1000,
            seed: 2,
            method: Method::RandomWalk,
            ..SamplerConfig::default()
        };
        let out = run_chains(&target, &config).unwrap();
        let all: Vec<f64> = out
            .iter()
            .flat_map(|c| c.draws.iter().map(|z| z[0]))
            .collect();
        let mean = all.iter().sum::<f64>() / all.len() as f64;
        assert!((mean - 2.0).abs() < 0.05, "{mean}");
    }

    #[test]
    fn seeded_runs_are_identical() {
        let target = Gaussian {
            mean: vec![1.0, 2.0],
            sd: vec![1.0, 0.3],
        };
        let config = SamplerConfig {
            seed: 42,
            ..SamplerConfig::default()
        };
        let a = run_chains(&target, &config).unwrap();
        let b = run_chains(&target, &config).unwrap();
        assert_eq!(a, b);
        let serial: Vec<ChainOutput> = rayon::ThreadPoolBuilder::new()
            .num_threads(1)
            .build()
            .unwrap()
            .install(|| run_chains(&target, &config).unwrap());
        assert_eq!(a, serial);
    }

    #[test]
    fn failing_initialization_is_reported() {
        struct Nowhere;
        impl LogDensity for Nowhere {
            fn dim(&self) -> usize {
                1
            }
            fn log_density_grad(&self, _: &[f64]) -> Result<(f64, Vec<f64>)> {
                Ok((f64::NEG_INFINITY, vec![0.0]))
            }
            fn initial_point(&self, _: &mut StreamRng) -> Vec<f64> {
                vec![0.0]
            }
        }
        let err = run_chains(&Nowhere, &SamplerConfig::default()).unwrap_err();
        assert!(matches!(err, Error::Initialization { attempts: 10, .. }));
    }
}
