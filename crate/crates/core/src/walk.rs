//! Continuous-time random walks with generator `½Δ`.
//!
//! From `v` the walk holds for an exponential time of rate
//! `Σ_u w(uv) / (2 mu(v))` and then jumps to `u` with probability proportional
//! to `w(uv)`. Run for duration `2σ`, it samples `e^{σΔ}`:
//! `E[f(W(2σ))] = (e^{σΔ} f)(start)`.

use std::fmt::Write as _;

use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Exp1};
use rayon::prelude::*;

use crate::error::{invalid, Result};
use crate::field::{check_len, ScalarField};
use crate::glue::{Component, GluedManifold};
use crate::manifold::WeightedGraphManifold;
use crate::rng::{op, stream};

/// Samples are processed in chunks of this size and merged in index order.
const CHUNK: usize = 1024;

/// A sampled trajectory: `events[i] = (time of i-th jump, vertex entered)`.
#[derive(Clone, Debug, PartialEq)]
pub struct WalkPath {
    pub start: usize,
    pub events: Vec<(f64, usize)>,
    pub horizon: f64,
}

impl WalkPath {
    /// Position at time `t` (right-continuous).
    pub fn position_at(&self, t: f64) -> usize {
        let k = self.events.partition_point(|&(s, _)| s <= t);
        if k == 0 {
            self.start
        } else {
            self.events[k - 1].1
        }
    }

    pub fn end(&self) -> usize {
        self.events.last().map_or(self.start, |e| e.1)
    }

    pub fn jumps(&self) -> usize {
        self.events.len()
    }

    /// `time,vertex` rows, starting with `0,start`.
    pub fn to_csv(&self) -> String {
        let mut s = String::from("time,vertex\n");
        let _ = writeln!(s, "{:.11e},{}", 0.0, self.start);
        for (t, v) in &self.events {
            let _ = writeln!(s, "{t:.11e},{v}");
        }
        s
    }
}

/// A vertex set whose first entrance time is the stopping time.
#[derive(Clone, Debug, PartialEq)]
pub struct StoppingRule {
    region: Vec<bool>,
    pub description: String,
}

impl StoppingRule {
    pub fn new(host: &WeightedGraphManifold, vertices: &[usize], description: impl Into<String>) -> Result<Self> {
        let mut region = vec![false; host.len()];
        for &v in vertices {
            if v >= host.len() {
                return invalid(format!("stopping region names vertex {v}, host has {}", host.len()));
            }
            region[v] = true;
        }
        Ok(StoppingRule {
            region,
            description: description.into(),
        })
    }

    /// The non-isometric band of a glued piece: where piece and ambient
    /// dynamics may differ.
    pub fn glue_band(g: &GluedManifold, c: Component) -> Result<Self> {
        let (cyl, emb) = g.component(c)?;
        StoppingRule::new(
            cyl.graph(),
            &emb.non_isometric(),
            format!("axis distance < {} from the glue level", g.cut_offset()),
        )
    }

    pub fn contains(&self, v: usize) -> bool {
        self.region[v]
    }

    pub fn len(&self) -> usize {
        self.region.len()
    }

    pub fn is_empty(&self) -> bool {
        self.region.is_empty()
    }
}

/// Per-vertex holding rates and cumulative jump tables of `½Δ`.
#[derive(Clone, Debug)]
pub struct WalkGenerator {
    rate: Vec<f64>,
    targets: Vec<Vec<usize>>,
    cumulative: Vec<Vec<f64>>,
}

impl WalkGenerator {
    pub fn new(host: &WeightedGraphManifold) -> Self {
        let n = host.len();
        let mut rate = Vec::with_capacity(n);
        let mut targets = Vec::with_capacity(n);
        let mut cumulative = Vec::with_capacity(n);
        for v in 0..n {
            let nb = host.neighbors(v);
            let mut acc = 0.0;
            let mut cum = Vec::with_capacity(nb.len());
            for &(_, e) in nb {
                acc += host.edges()[e].w;
                cum.push(acc);
            }
            rate.push(acc / (2.0 * host.mu()[v]));
            targets.push(nb.iter().map(|&(u, _)| u).collect());
            cumulative.push(cum);
        }
        WalkGenerator {
            rate,
            targets,
            cumulative,
        }
    }

    pub fn len(&self) -> usize {
        self.rate.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rate.is_empty()
    }

    /// Total jump rate out of `v`.
    pub fn rate(&self, v: usize) -> f64 {
        self.rate[v]
    }

    /// Probability that a jump from `v` lands on `u`.
    pub fn jump_probability(&self, v: usize, u: usize) -> f64 {
        let cum = &self.cumulative[v];
        let total = *cum.last().unwrap_or(&1.0);
        self.targets[v]
            .iter()
            .enumerate()
            .filter(|(_, &t)| t == u)
            .map(|(i, _)| cum[i] - if i == 0 { 0.0 } else { cum[i - 1] })
            .sum::<f64>()
            / total
    }

    fn hold(&self, v: usize, rng: &mut ChaCha8Rng) -> f64 {
        let e: f64 = Exp1.sample(rng);
        e / self.rate[v]
    }

    fn jump(&self, v: usize, rng: &mut ChaCha8Rng) -> usize {
        let cum = &self.cumulative[v];
        let r = rng.gen::<f64>() * cum[cum.len() - 1];
        let i = cum.partition_point(|&c| c <= r).min(cum.len() - 1);
        self.targets[v][i]
    }

    /// Runs from `start` for `horizon`, stopping early on entering `stop`.
    /// Returns the path and the entrance `(time, vertex)` if it happened.
    fn run(
        &self,
        start: usize,
        horizon: f64,
        stop: Option<&StoppingRule>,
        rng: &mut ChaCha8Rng,
        record: bool,
    ) -> (WalkPath, Option<(f64, usize)>, usize) {
        let mut events = Vec::new();
        let mut t = 0.0;
        let mut v = start;
        loop {
            t += self.hold(v, rng);
            if t > horizon {
                break;
            }
            v = self.jump(v, rng);
            if record {
                events.push((t, v));
            }
            if stop.is_some_and(|r| r.contains(v)) {
                let path = WalkPath { start, events, horizon };
                return (path, Some((t, v)), v);
            }
        }
        (WalkPath { start, events, horizon }, None, v)
    }
}

fn check_horizon(horizon: f64) -> Result<()> {
    if !(horizon >= 0.0 && horizon.is_finite()) {
        return invalid(format!("walk horizon must be non-negative, got {horizon}"));
    }
    Ok(())
}

/// A path of the `½Δ` chain on `[0, horizon]`.
pub fn sample_walk(gen: &WalkGenerator, start: usize, horizon: f64, rng: &mut ChaCha8Rng) -> Result<WalkPath> {
    check_horizon(horizon)?;
    if start >= gen.len() {
        return invalid(format!("start vertex {start} is not in the host"));
    }
    Ok(gen.run(start, horizon, None, rng, true).0)
}

/// Running mean and sum of squared deviations.
#[derive(Clone, Copy, Debug, Default)]
struct Welford {
    n: f64,
    mean: f64,
    m2: f64,
}

impl Welford {
    fn push(&mut self, x: f64) {
        self.n += 1.0;
        let d = x - self.mean;
        self.mean += d / self.n;
        self.m2 += d * (x - self.mean);
    }

    fn merge(self, o: Welford) -> Welford {
        if o.n == 0.0 {
            return self;
        }
        if self.n == 0.0 {
            return o;
        }
        let n = self.n + o.n;
        let d = o.mean - self.mean;
        Welford {
            n,
            mean: self.mean + d * o.n / n,
            m2: self.m2 + o.m2 + d * d * self.n * o.n / n,
        }
    }

    fn stderr(&self) -> f64 {
        if self.n < 2.0 {
            return 0.0;
        }
        (self.m2 / (self.n - 1.0) / self.n).sqrt()
    }
}

/// Mean and standard error of `sample(i)` over `i < samples`, aggregated in a
/// schedule-independent order.
fn estimate<F: Fn(u64) -> f64 + Sync>(samples: usize, sample: F) -> Welford {
    let chunks: Vec<Welford> = (0..samples.div_ceil(CHUNK))
        .into_par_iter()
        .map(|c| {
            let mut w = Welford::default();
            for i in c * CHUNK..((c + 1) * CHUNK).min(samples) {
                w.push(sample(i as u64));
            }
            w
        })
        .collect();
    chunks.into_iter().fold(Welford::default(), Welford::merge)
}

fn sample_index(vertex: usize, i: u64) -> u64 {
    ((vertex as u64) << 32) | i
}

/// Monte Carlo `e^{σΔ} f` at the given vertices: `(estimates, standard errors)`.
pub fn mc_heat_at(
    host: &WeightedGraphManifold,
    f: &ScalarField,
    sigma: f64,
    vertices: &[usize],
    samples: usize,
    seed: u64,
) -> Result<(Vec<f64>, Vec<f64>)> {
    check_len(host.len(), f.len())?;
    check_horizon(sigma)?;
    if samples == 0 {
        return invalid("at least one sample is required");
    }
    if let Some(&v) = vertices.iter().find(|&&v| v >= host.len()) {
        return invalid(format!("vertex {v} is not in the host"));
    }
    let gen = WalkGenerator::new(host);
    let vals = f.values();
    let mut est = Vec::with_capacity(vertices.len());
    let mut err = Vec::with_capacity(vertices.len());
    for &v in vertices {
        let w = estimate(samples, |i| {
            let mut rng = stream(seed, op::MC_HEAT, sample_index(v, i));
            vals[gen.run(v, 2.0 * sigma, None, &mut rng, false).2]
        });
        est.push(w.mean);
        err.push(w.stderr());
    }
    Ok((est, err))
}

/// Monte Carlo `e^{σΔ} f` at every vertex, with standard errors.
pub fn mc_heat(
    host: &WeightedGraphManifold,
    f: &ScalarField,
    sigma: f64,
    samples: usize,
    seed: u64,
) -> Result<(ScalarField, ScalarField)> {
    let all: Vec<usize> = (0..host.len()).collect();
    let (e, s) = mc_heat_at(host, f, sigma, &all, samples, seed)?;
    Ok((ScalarField::new(e), ScalarField::new(s)))
}

/// Binomial estimate with Laplace smoothing in the error, so that zero hits
/// still report a nonzero uncertainty.
fn binomial(hits: f64, n: usize) -> (f64, f64) {
    let n = n as f64;
    let smoothed = (hits + 1.0) / (n + 2.0);
    (hits / n, (smoothed * (1.0 - smoothed) / n).sqrt())
}

/// `ℙ(T ≤ horizon)` for the first entrance time `T` of `rule`'s region:
/// `(p_hat, stderr)`.
pub fn exit_probability(
    host: &WeightedGraphManifold,
    start: usize,
    rule: &StoppingRule,
    horizon: f64,
    samples: usize,
    seed: u64,
) -> Result<(f64, f64)> {
    check_horizon(horizon)?;
    if rule.len() != host.len() {
        return invalid("stopping rule belongs to a different host");
    }
    if start >= host.len() {
        return invalid(format!("start vertex {start} is not in the host"));
    }
    if rule.contains(start) {
        return invalid(format!("start vertex {start} lies inside the stopping region"));
    }
    if samples == 0 {
        return invalid("at least one sample is required");
    }
    let gen = WalkGenerator::new(host);
    let w = estimate(samples, |i| {
        let mut rng = stream(seed, op::EXIT, sample_index(start, i));
        f64::from(u8::from(gen.run(start, horizon, Some(rule), &mut rng, false).1.is_some()))
    });
    Ok(binomial(w.mean * w.n, samples))
}

/// The ambient path of a coupled walk and its stopping time, if reached.
#[derive(Clone, Debug, PartialEq)]
pub struct CoupledPath {
    pub path: WalkPath,
    pub stopping_time: Option<f64>,
}

/// Generators needed to run coupled walks on one piece of a glued manifold.
pub struct Coupling<'a> {
    glued: &'a GluedManifold,
    piece: usize,
    piece_gen: WalkGenerator,
    ambient_gen: WalkGenerator,
    rule: StoppingRule,
}

impl<'a> Coupling<'a> {
    pub fn new(glued: &'a GluedManifold, piece: usize) -> Result<Self> {
        let c = Component::Piece(piece);
        let (cyl, _) = glued.component(c)?;
        Ok(Coupling {
            glued,
            piece,
            piece_gen: WalkGenerator::new(cyl.graph()),
            ambient_gen: WalkGenerator::new(glued.ambient()),
            rule: StoppingRule::glue_band(glued, c)?,
        })
    }

    pub fn stopping_rule(&self) -> &StoppingRule {
        &self.rule
    }

    /// Follows the piece walk through the embedding until it enters the glue
    /// band, then continues as an ambient walk from the entrance point.
    pub fn sample(&self, start: usize, horizon: f64, rng: &mut ChaCha8Rng) -> Result<CoupledPath> {
        check_horizon(horizon)?;
        let (_, emb) = self.glued.component(Component::Piece(self.piece))?;
        if start >= emb.component_len() || !emb.is_isometric(start) {
            return invalid(format!("start vertex {start} is outside the isometric embedding domain"));
        }
        let map = |v: usize| emb.get(v).expect("walk entered a removed vertex");
        let (piece_path, hit, _) = self.piece_gen.run(start, horizon, Some(&self.rule), rng, true);
        let mut events: Vec<(f64, usize)> = piece_path.events.iter().map(|&(t, v)| (t, map(v))).collect();
        let stopping_time = hit.map(|(t, _)| t);
        if let Some((t, v)) = hit {
            let tail = self.ambient_gen.run(map(v), horizon - t, None, rng, true).0;
            events.extend(tail.events.into_iter().map(|(s, u)| (t + s, u)));
        }
        Ok(CoupledPath {
            path: WalkPath {
                start: map(start),
                events,
                horizon,
            },
            stopping_time,
        })
    }
}

/// One coupled walk on piece `n` from `start` (a piece vertex).
pub fn coupled_walk(
    glued: &GluedManifold,
    n: usize,
    start: usize,
    horizon: f64,
    rng: &mut ChaCha8Rng,
) -> Result<CoupledPath> {
    Coupling::new(glued, n)?.sample(start, horizon, rng)
}

/// Monte Carlo `(e^{σΔ_ambient} f)(i(start))` through coupled walks, with the
/// fraction of walks stopped before `2σ`: `(mean, stderr, p_stop, p_stderr)`.
pub fn coupled_heat(
    coupling: &Coupling<'_>,
    f: &ScalarField,
    start: usize,
    sigma: f64,
    samples: usize,
    seed: u64,
) -> Result<(f64, f64, f64, f64)> {
    check_len(coupling.glued.ambient().len(), f.len())?;
    if samples == 0 {
        return invalid("at least one sample is required");
    }
    coupling.sample(start, 0.0, &mut stream(seed, op::COUPLED, 0))?;
    let vals = f.values();
    let pairs: Vec<(Welford, f64)> = (0..samples.div_ceil(CHUNK))
        .into_par_iter()
        .map(|c| {
            let mut w = Welford::default();
            let mut hits = 0.0;
            for i in c * CHUNK..((c + 1) * CHUNK).min(samples) {
                let mut rng = stream(seed, op::COUPLED, sample_index(start, i as u64));
                let p = coupling.sample(start, 2.0 * sigma, &mut rng).expect("start validated");
                w.push(vals[p.path.end()]);
                if p.stopping_time.is_some() {
                    hits += 1.0;
                }
            }
            (w, hits)
        })
        .collect();
    let (w, hits) = pairs
        .into_iter()
        .fold((Welford::default(), 0.0), |(a, h), (b, k)| (a.merge(b), h + k));
    let (p, pe) = binomial(hits, samples);
    Ok((w.mean, w.stderr(), p, pe))
}
