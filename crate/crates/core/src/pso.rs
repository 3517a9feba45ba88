//! Global-best particle swarm over a box-bounded continuous space.

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize, serde::Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SwarmConfig {
    pub particles: usize,
    pub iterations: usize,
    pub inertia: f64,
    pub cognitive: f64,
    pub social: f64,
    /// Velocity limit as a fraction of each dimension's range.
    pub velocity_clamp: f64,
    pub seed: u64,
    /// Stop once the best cost improves by less than `stall_tolerance`
    /// (relative) over this many iterations. Zero disables early exit.
    pub stall_window: usize,
    pub stall_tolerance: f64,
    pub mode: SwarmMode,
}

/// How personal and global bests are tracked.
///
/// `Global` keeps one best per particle judged on the total cost.
/// `Separable` keeps them per dimension, judged on that dimension's own
/// cost term; it is only valid when the cost is a sum of one-dimensional
/// terms. `Auto` lets the caller pick based on the problem structure.
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SwarmMode {
    Auto,
    Global,
    Separable,
}

impl Default for SwarmConfig {
    fn default() -> Self {
        Self {
            particles: 10,
            iterations: 10_000,
            inertia: 0.729,
            cognitive: 1.494,
            social: 1.494,
            velocity_clamp: 0.2,
            seed: 0,
            stall_window: 200,
            stall_tolerance: 1e-8,
            mode: SwarmMode::Auto,
        }
    }
}

impl SwarmConfig {
    pub fn validate(&self) -> Result<()> {
        if self.particles < 2 {
            return Err(Error::InvalidArgument(format!("swarm needs at least 2 particles, got {}", self.particles)));
        }
        if self.iterations == 0 {
            return Err(Error::InvalidArgument("iteration budget must be at least 1".into()));
        }
        for (name, v) in [
            ("inertia", self.inertia),
            ("cognitive", self.cognitive),
            ("social", self.social),
            ("velocity_clamp", self.velocity_clamp),
        ] {
            if !(v.is_finite() && v > 0.0) {
                return Err(Error::InvalidArgument(format!("swarm {name} must be positive, got {v}")));
            }
        }
        if !(self.stall_tolerance >= 0.0) {
            return Err(Error::InvalidArgument("stall_tolerance must be non-negative".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SwarmOutcome {
    pub best: Vec<f64>,
    pub best_cost: f64,
    /// Best cost after initialization and after every iteration.
    pub trace: Vec<f64>,
    pub iterations: usize,
}

/// Per-dimension assignment of initialization strata to particles.
fn deal_strata(seed: u64, particles: usize, dims: usize) -> Vec<Vec<usize>> {
    let mut rng = stream(seed, usize::MAX, 0);
    (0..dims)
        .map(|_| {
            let mut perm: Vec<usize> = (0..particles).collect();
            perm.shuffle(&mut rng);
            perm
        })
        .collect()
}

/// Random stream for one particle at one iteration, independent of scheduling.
fn stream(seed: u64, particle: usize, iteration: usize) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(particle as u64);
    rng.set_word_pos((iteration as u128) << 40);
    rng
}

struct Particle {
    x: Vec<f64>,
    v: Vec<f64>,
    best: Vec<f64>,
    best_cost: f64,
}

impl Particle {
    /// Initial position and velocity of particle `b`. Positions are
    /// uniform within one of `count` equal strata per dimension, with the
    /// strata dealt to particles by a seeded shuffle, so every dimension
    /// starts out covered end to end.
    fn spawn(seed: u64, b: usize, strata: &[Vec<usize>], lo: f64, hi: f64, vmax: f64) -> (Vec<f64>, Vec<f64>) {
        let mut rng = stream(seed, b, 0);
        let count = strata.first().map_or(1, Vec::len) as f64;
        let width = (hi - lo) / count;
        let x: Vec<f64> = strata
            .iter()
            .map(|perm| (lo + (perm[b] as f64 + rng.random::<f64>()) * width).min(hi))
            .collect();
        let v: Vec<f64> = (0..strata.len()).map(|_| rng.random_range(-vmax..=vmax)).collect();
        (x, v)
    }

    fn step(&mut self, guide: &[f64], rng: &mut ChaCha8Rng, cfg: &SwarmConfig, lo: f64, hi: f64, vmax: f64) {
        for d in 0..self.x.len() {
            let r1: f64 = rng.random();
            let r2: f64 = rng.random();
            let mut v = cfg.inertia * self.v[d]
                + cfg.cognitive * r1 * (self.best[d] - self.x[d])
                + cfg.social * r2 * (guide[d] - self.x[d]);
            v = v.clamp(-vmax, vmax);
            let mut x = self.x[d] + v;
            if x < lo {
                x = lo;
                v = 0.0;
            } else if x > hi {
                x = hi;
                v = 0.0;
            }
            self.x[d] = x;
            self.v[d] = v;
        }
    }
}

fn check_box(dims: usize, lo: f64, hi: f64, cfg: &SwarmConfig) -> Result<f64> {
    cfg.validate()?;
    if dims == 0 {
        return Err(Error::InvalidArgument("search space has no dimensions".into()));
    }
    if !(lo.is_finite() && hi.is_finite() && hi > lo) {
        return Err(Error::InvalidArgument(format!("degenerate search range [{lo}, {hi}]")));
    }
    Ok(cfg.velocity_clamp * (hi - lo))
}

fn stalled(trace: &[f64], cfg: &SwarmConfig) -> bool {
    let w = cfg.stall_window;
    let it = trace.len() - 1;
    if w == 0 || it < w {
        return false;
    }
    let before = trace[it - w];
    before - trace[it] <= cfg.stall_tolerance * before.abs()
}

fn cost_of<F: Fn(&[f64]) -> f64>(f: &F, x: &[f64]) -> f64 {
    let c = f(x);
    if c.is_nan() {
        f64::INFINITY
    } else {
        c
    }
}

/// Minimizes `objective` over the box `[lo, hi]` in every dimension.
pub fn minimize<F>(objective: F, dims: usize, lo: f64, hi: f64, cfg: &SwarmConfig) -> Result<SwarmOutcome>
where
    F: Fn(&[f64]) -> f64 + Sync,
{
    let vmax = check_box(dims, lo, hi, cfg)?;
    let strata = deal_strata(cfg.seed, cfg.particles, dims);

    let mut swarm: Vec<Particle> = (0..cfg.particles)
        .into_par_iter()
        .map(|b| {
            let (x, v) = Particle::spawn(cfg.seed, b, &strata, lo, hi, vmax);
            let c = cost_of(&objective, &x);
            Particle { best: x.clone(), x, v, best_cost: c }
        })
        .collect();

    let pick_best = |swarm: &[Particle]| -> usize {
        let mut k = 0;
        for (i, p) in swarm.iter().enumerate() {
            if p.best_cost < swarm[k].best_cost {
                k = i;
            }
        }
        k
    };
    let g = pick_best(&swarm);
    let mut gbest = swarm[g].best.clone();
    let mut gcost = swarm[g].best_cost;
    let mut trace = vec![gcost];
    let mut done = 0;

    for it in 1..=cfg.iterations {
        let gb = &gbest;
        swarm.par_iter_mut().enumerate().for_each(|(b, p)| {
            let mut rng = stream(cfg.seed, b, it);
            p.step(gb, &mut rng, cfg, lo, hi, vmax);
            let c = cost_of(&objective, &p.x);
            if c < p.best_cost {
                p.best_cost = c;
                p.best.copy_from_slice(&p.x);
            }
        });
        let k = pick_best(&swarm);
        if swarm[k].best_cost < gcost {
            gcost = swarm[k].best_cost;
            gbest.copy_from_slice(&swarm[k].best);
        }
        trace.push(gcost);
        done = it;
        if stalled(&trace, cfg) {
            break;
        }
    }
    Ok(SwarmOutcome { best: gbest, best_cost: gcost, trace, iterations: done })
}

/// Minimizes a cost that is a sum of one term per dimension.
///
/// `terms` fills one cost term per dimension for a candidate point; term
/// `d` must depend on coordinate `d` only. Each dimension keeps its own
/// personal and global bests, so the swarm acts as `dims` one-dimensional
/// swarms driven by shared random streams and a shared evaluation.
pub fn minimize_separable<F>(terms: F, dims: usize, lo: f64, hi: f64, cfg: &SwarmConfig) -> Result<SwarmOutcome>
where
    F: Fn(&[f64], &mut [f64]) + Sync,
{
    let vmax = check_box(dims, lo, hi, cfg)?;
    let strata = deal_strata(cfg.seed, cfg.particles, dims);
    let eval = |x: &[f64], out: &mut [f64]| {
        terms(x, out);
        out.iter_mut().filter(|c| c.is_nan()).for_each(|c| *c = f64::INFINITY);
    };
    let mut swarm: Vec<(Particle, Vec<f64>, Vec<f64>)> = (0..cfg.particles)
        .into_par_iter()
        .map(|b| {
            let (x, v) = Particle::spawn(cfg.seed, b, &strata, lo, hi, vmax);
            let mut t = vec![0.0; dims];
            eval(&x, &mut t);
            let p = Particle { best: x.clone(), x, v, best_cost: 0.0 };
            (p, t.clone(), t)
        })
        .collect();

    let mut gbest = vec![0.0; dims];
    let mut gterms = vec![f64::INFINITY; dims];
    let merge = |swarm: &[(Particle, Vec<f64>, Vec<f64>)], gbest: &mut [f64], gterms: &mut [f64]| {
        for (p, best_terms, _) in swarm {
            for d in 0..dims {
                if best_terms[d] < gterms[d] {
                    gterms[d] = best_terms[d];
                    gbest[d] = p.best[d];
                }
            }
        }
    };
    merge(&swarm, &mut gbest, &mut gterms);
    let mut trace = vec![gterms.iter().sum::<f64>()];
    let mut done = 0;

    for it in 1..=cfg.iterations {
        let gb = &gbest;
        swarm.par_iter_mut().enumerate().for_each(|(b, (p, best_terms, now))| {
            let mut rng = stream(cfg.seed, b, it);
            p.step(gb, &mut rng, cfg, lo, hi, vmax);
            eval(&p.x, now);
            for d in 0..dims {
                if now[d] < best_terms[d] {
                    best_terms[d] = now[d];
                    p.best[d] = p.x[d];
                }
            }
        });
        merge(&swarm, &mut gbest, &mut gterms);
        trace.push(gterms.iter().sum::<f64>());
        done = it;
        if stalled(&trace, cfg) {
            break;
        }
    }
    let best_cost = *trace.last().unwrap();
    Ok(SwarmOutcome { best: gbest, best_cost, trace, iterations: done })
}
