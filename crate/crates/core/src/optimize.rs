//! Choice of the free parameters `(ε, z₀)`.
//!
//! For a given `ε` the largest admissible `z₀` is `Z(ε)`; we back off by a
//! relative `margin` and take `z₀(ε) = 1 + (Z(ε) - 1)(1 - margin)`. The
//! one-dimensional search over `ε` runs on a logit scale of `ε / ε_max`, so
//! both ends of `(0, ε_max)` are covered logarithmically: a grid scan picks a
//! bracket, golden-section search refines it.
//!
//! The search itself is done in round-to-nearest mode at reduced precision;
//! the winning `ε` is then re-assembled and re-verified in the caller's
//! arithmetic.

use serde::Serialize;

use crate::constants::{compute_a_interval, epsilon_range, z0_range, ConstantsBundle, SystemParams};
use crate::error::{Error, Result};
use crate::precision::{Arith, Interval, Precision};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case", tag = "kind", content = "n")]
pub enum Objective {
    /// Maximise `ln √z₀`, the exponential decay rate.
    AsymptoticRate,
    /// Minimise the correlation bound at horizon `n`.
    BoundAtN(u64),
}

pub const DEFAULT_MARGIN: f64 = 1e-6;

const SEARCH_DIGITS: u32 = 40;
const GRID: usize = 480;
/// Logit range: `ε / ε_max` from about `1e-12` to `1 - 1e-12`.
const LOGIT_SPAN: f64 = 27.6;
const GOLDEN_ITERS: usize = 80;

/// Outcome of the search together with the verified bundle.
#[derive(Clone, Debug)]
pub struct Optimized {
    pub bundle: ConstantsBundle,
    pub objective: Objective,
    /// Objective value at the optimum (`ln √z₀`, or minus the log of the
    /// correlation bound up to the `‖φ‖` factor).
    pub score: f64,
    pub evaluations: usize,
}

struct Search<'a> {
    params: &'a SystemParams,
    objective: Objective,
    margin: f64,
    arith: Arith,
    a: Interval,
    eps_max: f64,
    evaluations: usize,
}

impl Search<'_> {
    fn eps_at(&self, t: f64) -> f64 {
        let s = 1.0 / (1.0 + (-t).exp());
        self.eps_max * s
    }

    /// Objective at `ε` (larger is better); `None` when `ε` is not usable.
    fn score(&mut self, eps: f64) -> Option<f64> {
        self.evaluations += 1;
        if !(eps > 0.0 && eps < self.eps_max) {
            return None;
        }
        let ar = &self.arith;
        let e = ar.num(eps);
        let zr = z0_range(self.params, &self.a, &e, ar).ok()?;
        let w = &zr.w_max * &ar.num(1.0 - self.margin);
        let l = w.log1p().ldexp(-1);
        let lf = l.mid_f64();
        if !(lf > 0.0) {
            return None;
        }
        match self.objective {
            Objective::AsymptoticRate => Some(lf),
            Objective::BoundAtN(n) => {
                let d = &(&(ar.one() - &self.a) - &e).ln() + &l.ln();
                let s = n as f64 * lf + d.mid_f64();
                s.is_finite().then_some(s)
            }
        }
    }
}

/// Searches `ε` and returns a bundle whose admissibility has been verified in
/// `arith`.
pub fn optimize_bundle(params: &SystemParams, objective: Objective, margin: f64, arith: &Arith) -> Result<Optimized> {
    if !(margin > 0.0 && margin < 1.0) {
        return Err(Error::invalid(format!("margin must lie in (0, 1), got {margin}")));
    }
    if let Objective::BoundAtN(0) = objective {
        return Err(Error::invalid("bound-at-n needs n >= 1"));
    }
    let search_arith = Arith::nearest(Precision::new(SEARCH_DIGITS)?);
    let a = compute_a_interval(params, &search_arith);
    // The conservative end from certified arithmetic keeps every trial ε
    // strictly inside the range.
    let er = epsilon_range(params, &compute_a_interval(params, arith), arith);
    let mut search = Search {
        params,
        objective,
        margin,
        arith: search_arith,
        a,
        eps_max: er.upper_f64(),
        evaluations: 0,
    };

    let ts: Vec<f64> = (0..=GRID)
        .map(|i| -LOGIT_SPAN + 2.0 * LOGIT_SPAN * i as f64 / GRID as f64)
        .collect();
    let mut best: Option<(usize, f64)> = None;
    for (i, &t) in ts.iter().enumerate() {
        if let Some(s) = search.score(search.eps_at(t)) {
            // `>=` so that ties go to the larger ε.
            if best.map_or(true, |(_, b)| s >= b) {
                best = Some((i, s));
            }
        }
    }
    let (bi, grid_score) = best.ok_or_else(|| Error::InvariantViolation("no feasible epsilon on the search grid".into()))?;

    let mut best_t = ts[bi];
    let mut best_score = grid_score;
    let (mut lo, mut hi) = (ts[bi.saturating_sub(1)], ts[(bi + 1).min(GRID)]);
    let r = (5f64.sqrt() - 1.0) / 2.0;
    let mut x1 = hi - r * (hi - lo);
    let mut x2 = lo + r * (hi - lo);
    let mut f1 = search.score(search.eps_at(x1)).unwrap_or(f64::NEG_INFINITY);
    let mut f2 = search.score(search.eps_at(x2)).unwrap_or(f64::NEG_INFINITY);
    for _ in 0..GOLDEN_ITERS {
        if f1 > f2 {
            hi = x2;
            x2 = x1;
            f2 = f1;
            x1 = hi - r * (hi - lo);
            f1 = search.score(search.eps_at(x1)).unwrap_or(f64::NEG_INFINITY);
        } else {
            lo = x1;
            x1 = x2;
            f1 = f2;
            x2 = lo + r * (hi - lo);
            f2 = search.score(search.eps_at(x2)).unwrap_or(f64::NEG_INFINITY);
        }
    }
    for (t, f) in [(x1, f1), (x2, f2)] {
        if f > best_score || (f == best_score && t > best_t) {
            best_score = f;
            best_t = t;
        }
    }

    let eps = arith.num(search.eps_at(best_t));
    let bundle = bundle_with_margin(params, &eps, margin, arith)?;
    bundle.require_admissible()?;
    Ok(Optimized {
        bundle,
        objective,
        score: best_score,
        evaluations: search.evaluations,
    })
}

/// `z₀ = 1 + (Z - 1)(1 - margin)` for the given `ε`, with `Z - 1` taken at its
/// lower end.
pub fn bundle_with_margin(params: &SystemParams, epsilon: &Interval, margin: f64, arith: &Arith) -> Result<ConstantsBundle> {
    let a = compute_a_interval(params, arith);
    let zr = z0_range(params, &a, epsilon, arith)?;
    let w = &zr.w_max.lower_point() * &arith.num(1.0 - margin);
    ConstantsBundle::assemble(params, epsilon, &w.lower_point(), arith)
}

/// The naive choice `ε = ε_max / 2`, `z₀ = (1 + Z) / 2`.
pub fn midpoint_bundle(params: &SystemParams, arith: &Arith) -> Result<ConstantsBundle> {
    let a = compute_a_interval(params, arith);
    let er = epsilon_range(params, &a, arith);
    let eps = arith.num(er.upper_f64() / 2.0);
    bundle_with_margin(params, &eps, 0.5, arith)
}
