//! Sampling from the equilibrium measure and Monte Carlo statistics of
//! Birkhoff sums.
//!
//! A cylinder `x₀ … x_{T-1}` is drawn right to left: the last `L` symbols
//! from the equilibrium marginal, then each earlier symbol `a` with
//! probability `exp φ_p(a·w)` given the following `m`-word `w`. Trajectory
//! `i` of a batch uses stream `i` of the master seed, and per-block partial
//! results are combined in index order, so outputs do not depend on the
//! thread count.

use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use super::model::{pow_k, CylinderFunction, MarkovShiftModel};
use super::operator::{equilibrium_measure, require_centered, Equilibrium};
use crate::error::{Error, Result};
use crate::renewal::path_rng;

fn cdf(weights: impl Iterator<Item = f64>) -> Vec<f64> {
    let mut acc = 0.0;
    let mut out: Vec<f64> = weights
        .map(|w| {
            acc += w;
            acc
        })
        .collect();
    // The last symbol with positive weight absorbs rounding.
    if let Some(last) = (0..out.len()).rev().find(|&i| i == 0 || out[i] > out[i - 1]) {
        for v in &mut out[last..] {
            *v = f64::INFINITY;
        }
    }
    out
}

fn draw(cdf: &[f64], u: f64) -> usize {
    cdf.iter().position(|&c| u < c).unwrap_or(cdf.len() - 1)
}

/// Right-to-left sampler for one model.
#[derive(Clone, Debug)]
pub struct Sampler {
    k: usize,
    m: usize,
    base_len: usize,
    base: Vec<f64>,
    cond: Vec<Vec<f64>>,
}

impl Sampler {
    pub fn new(model: &MarkovShiftModel, eq: &Equilibrium) -> Self {
        let k = model.alphabet_size();
        let m = model.depth();
        let base_len = m.max(1);
        let base = cdf(eq.measure(base_len - 1).into_iter());
        let cond = (0..pow_k(k, m)).map(|w| cdf((0..k).map(|a| model.weight(a, w)))).collect();
        Sampler {
            k,
            m,
            base_len,
            base,
            cond,
        }
    }

    /// Emits `x_{T-1}, x_{T-2}, …, x₀` (at least `L` symbols).
    pub fn backward(&self, len: usize, rng: &mut ChaCha8Rng, mut emit: impl FnMut(usize)) {
        let k = self.k;
        let start = draw(&self.base, rng.gen());
        let mut syms = Vec::with_capacity(self.base_len);
        let mut rest = start;
        for _ in 0..self.base_len {
            syms.push(rest % k);
            rest /= k;
        }
        // syms holds x_{T-1}, x_{T-2}, … (last symbol first)
        for &s in &syms {
            emit(s);
        }
        let head = pow_k(k, self.m.saturating_sub(1));
        let mut ctx = if self.m == 0 { 0 } else { start / pow_k(k, self.base_len - self.m) };
        for _ in self.base_len..len {
            let a = draw(&self.cond[ctx], rng.gen());
            emit(a);
            if self.m > 0 {
                ctx = a * head + ctx / k;
            }
        }
    }

    /// Values `φ(σⁱx)` for `i = 0..n`, in order, for a fresh cylinder.
    pub fn observable_path(&self, phi: &CylinderFunction, n: usize, rng: &mut ChaCha8Rng) -> Vec<f64> {
        let r = phi.depth();
        let k = self.k;
        let top = pow_k(k, r);
        let mut win = 0usize;
        let mut seen = 0usize;
        let mut out = Vec::with_capacity(n);
        let vals = phi.values();
        self.backward(n + r, rng, |a| {
            win = a * top + win / k;
            seen += 1;
            if seen > r && out.len() < n {
                out.push(vals[win]);
            }
        });
        out.reverse();
        out
    }

    /// `S_n = Σ_{i<n} φ(σⁱx)` for a fresh cylinder.
    pub fn birkhoff_sum(&self, phi: &CylinderFunction, n: usize, rng: &mut ChaCha8Rng) -> f64 {
        let r = phi.depth();
        let k = self.k;
        let top = pow_k(k, r);
        let mut win = 0usize;
        let mut seen = 0usize;
        let mut sum = 0.0;
        let vals = phi.values();
        self.backward(n + r, rng, |a| {
            win = a * top + win / k;
            seen += 1;
            if seen > r && seen <= n + r {
                sum += vals[win];
            }
        });
        sum
    }
}

/// `x₀ … x_{len-1}` distributed according to the equilibrium measure.
pub fn sample_trajectory(model: &MarkovShiftModel, len: usize, seed: u64) -> Result<Vec<usize>> {
    let eq = equilibrium_measure(model)?;
    let s = Sampler::new(model, &eq);
    let mut rng = path_rng(seed, 0);
    let mut out = Vec::with_capacity(len.max(s.base_len));
    s.backward(len.max(s.base_len), &mut rng, |a| out.push(a));
    out.reverse();
    out.truncate(len);
    Ok(out)
}

const BLOCK: u64 = 256;

/// Runs `f(trial_index, rng)` for every trial and folds the per-block
/// results in index order.
fn batch<T: Send, A: Send>(
    trials: u64,
    seed: u64,
    init: impl Fn() -> A + Sync,
    f: impl Fn(&mut A, u64, &mut ChaCha8Rng) + Sync,
    merge: impl Fn(&mut A, A),
    finish: impl Fn(A) -> T,
) -> T {
    let blocks = trials.div_ceil(BLOCK);
    let parts: Vec<A> = (0..blocks)
        .into_par_iter()
        .map(|b| {
            let mut acc = init();
            for i in b * BLOCK..((b + 1) * BLOCK).min(trials) {
                let mut rng = path_rng(seed, i);
                f(&mut acc, i, &mut rng);
            }
            acc
        })
        .collect();
    let mut total = init();
    for p in parts {
        merge(&mut total, p);
    }
    finish(total)
}

/// Monte Carlo characteristic function of `S_n / √n` against the Gaussian
/// limit.
#[derive(Clone, Debug, Serialize)]
pub struct CltEstimate {
    pub t: f64,
    pub n: usize,
    pub trials: u64,
    pub seed: u64,
    pub re: f64,
    pub im: f64,
    pub target: f64,
    pub distance: f64,
    pub std_error: f64,
}

pub fn empirical_clt(
    model: &MarkovShiftModel,
    phi: &CylinderFunction,
    sigma2: f64,
    t: f64,
    n: usize,
    trials: u64,
    seed: u64,
) -> Result<CltEstimate> {
    if n == 0 || trials < 2 {
        return Err(Error::invalid("need n >= 1 and at least two trials"));
    }
    let eq = equilibrium_measure(model)?;
    require_centered(&eq, phi)?;
    let s = Sampler::new(model, &eq);
    let scale = t / (n as f64).sqrt();
    let [c, sn, c2, s2] = batch(
        trials,
        seed,
        || [0.0f64; 4],
        |acc, _, rng| {
            let x = scale * s.birkhoff_sum(phi, n, rng);
            let (si, co) = x.sin_cos();
            acc[0] += co;
            acc[1] += si;
            acc[2] += co * co;
            acc[3] += si * si;
        },
        |a, b| {
            for (x, y) in a.iter_mut().zip(b) {
                *x += y;
            }
        },
        |a| a,
    );
    let nt = trials as f64;
    let (re, im) = (c / nt, sn / nt);
    let var = (c2 / nt - re * re).max(0.0) + (s2 / nt - im * im).max(0.0);
    let target = (-t * t * sigma2 / 2.0).exp();
    Ok(CltEstimate {
        t,
        n,
        trials,
        seed,
        re,
        im,
        target,
        distance: (re - target).hypot(im),
        std_error: (var / (nt - 1.0)).sqrt(),
    })
}

/// Frequency of `|S_n / n| ≥ u`.
#[derive(Clone, Debug, Serialize)]
pub struct LdpEstimate {
    pub u: f64,
    pub n: usize,
    pub trials: u64,
    pub seed: u64,
    pub hits: u64,
    pub frequency: f64,
    pub std_error: f64,
}

pub fn empirical_ldp(
    model: &MarkovShiftModel,
    phi: &CylinderFunction,
    u: f64,
    n: usize,
    trials: u64,
    seed: u64,
) -> Result<LdpEstimate> {
    if n == 0 || trials == 0 || !(u > 0.0) {
        return Err(Error::invalid("need n >= 1, trials >= 1 and u > 0"));
    }
    let eq = equilibrium_measure(model)?;
    require_centered(&eq, phi)?;
    let s = Sampler::new(model, &eq);
    let hits = batch(
        trials,
        seed,
        || 0u64,
        |acc, _, rng| {
            if (s.birkhoff_sum(phi, n, rng) / n as f64).abs() >= u {
                *acc += 1;
            }
        },
        |a, b| *a += b,
        |a| a,
    );
    let p = hits as f64 / trials as f64;
    Ok(LdpEstimate {
        u,
        n,
        trials,
        seed,
        hits,
        frequency: p,
        std_error: (p * (1.0 - p) / trials as f64).sqrt(),
    })
}

/// Observed `N_{x,δ}` per trajectory: one plus the last `n ≤ horizon` with
/// `|S_n| ≥ n^{0.5+δ}` (`n = 0` always qualifies). A value is flagged as
/// censored when that last exceedance lies in the second half of the
/// horizon, where later exceedances beyond the horizon are not excluded.
#[derive(Clone, Debug, Serialize)]
pub struct LlnCensus {
    pub delta: f64,
    pub horizon: usize,
    pub trials: u64,
    pub seed: u64,
    pub observed: Vec<u64>,
    pub censored: Vec<bool>,
    pub max: u64,
    pub mean: f64,
}

pub fn empirical_lln(
    model: &MarkovShiftModel,
    phi: &CylinderFunction,
    delta: f64,
    horizon: usize,
    trials: u64,
    seed: u64,
) -> Result<LlnCensus> {
    if !(delta > 0.0 && delta < 0.5) || horizon == 0 || trials == 0 {
        return Err(Error::invalid("need delta in (0, 0.5), horizon >= 1 and trials >= 1"));
    }
    let eq = equilibrium_measure(model)?;
    require_centered(&eq, phi)?;
    let s = Sampler::new(model, &eq);
    let expo = 0.5 + delta;
    let rows: Vec<(u64, bool)> = batch(
        trials,
        seed,
        Vec::new,
        |acc: &mut Vec<(u64, bool)>, _, rng| {
            let vals = s.observable_path(phi, horizon, rng);
            let mut sum = 0.0;
            let mut last = 0usize;
            for (i, v) in vals.iter().enumerate() {
                sum += v;
                let n = i + 1;
                if sum.abs() >= (n as f64).powf(expo) {
                    last = n;
                }
            }
            acc.push((last as u64 + 1, 2 * last > horizon));
        },
        |a, b| a.extend(b),
        |a| a,
    );
    let observed: Vec<u64> = rows.iter().map(|r| r.0).collect();
    let censored = rows.iter().map(|r| r.1).collect();
    let max = observed.iter().copied().max().unwrap_or(0);
    let mean = observed.iter().sum::<u64>() as f64 / observed.len() as f64;
    Ok(LlnCensus {
        delta,
        horizon,
        trials,
        seed,
        observed,
        censored,
        max,
        mean,
    })
}

/// `E[S_N²] / N` estimated from independent trajectories.
#[derive(Clone, Debug, Serialize)]
pub struct VarianceEstimate {
    pub n: usize,
    pub paths: u64,
    pub seed: u64,
    pub estimate: f64,
    pub std_error: f64,
}

pub fn simulated_variance(
    model: &MarkovShiftModel,
    phi: &CylinderFunction,
    n: usize,
    paths: u64,
    seed: u64,
) -> Result<VarianceEstimate> {
    if n == 0 || paths < 2 {
        return Err(Error::invalid("need n >= 1 and at least two paths"));
    }
    let eq = equilibrium_measure(model)?;
    require_centered(&eq, phi)?;
    let s = Sampler::new(model, &eq);
    let [m1, m2] = batch(
        paths,
        seed,
        || [0.0f64; 2],
        |acc, _, rng| {
            let v = s.birkhoff_sum(phi, n, rng).powi(2) / n as f64;
            acc[0] += v;
            acc[1] += v * v;
        },
        |a, b| {
            a[0] += b[0];
            a[1] += b[1];
        },
        |a| a,
    );
    let np = paths as f64;
    let mean = m1 / np;
    let var = (m2 / np - mean * mean).max(0.0) * np / (np - 1.0);
    Ok(VarianceEstimate {
        n,
        paths,
        seed,
        estimate: mean,
        std_error: (var / np).sqrt(),
    })
}
