//! The renewal chain induced by the coupling argument.
//!
//! From state `k` the chain returns to `0` with probability `γ_k` and moves to
//! `k + 1` otherwise. With `γ_k = 1 - exp(-‖φ_p‖ θ^k)` its return-time law and
//! occupation probabilities `γ*_k = P(S_k = 0)` control the decay of
//! correlations; other `γ` sequences are accepted so that closed-form chains
//! can serve as oracles.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::constants::{ConstantsBundle, SystemParams};
use crate::error::{Error, Result};
use crate::precision::{Arith, Interval};

#[derive(Clone, Debug)]
enum Gammas {
    Canonical { theta: Interval, phi_p: Interval },
    Constant(f64),
    /// Listed values, then a constant tail.
    Explicit { values: Vec<f64>, tail: f64 },
}

#[derive(Clone, Debug)]
pub struct RenewalChain {
    gammas: Gammas,
}

fn check_gamma(g: f64) -> Result<()> {
    if g > 0.0 && g <= 1.0 {
        Ok(())
    } else {
        Err(Error::invalid(format!("return probabilities must lie in (0, 1], got {g}")))
    }
}

impl RenewalChain {
    /// `γ_k = 1 - exp(-‖φ_p‖ θ^k)`.
    pub fn canonical(params: &SystemParams) -> Self {
        let ar = Arith::certified(crate::precision::Precision::default());
        RenewalChain {
            gammas: Gammas::Canonical {
                theta: params.theta(&ar),
                phi_p: params.phi_p_norm(&ar),
            },
        }
    }

    pub fn constant(gamma: f64) -> Result<Self> {
        check_gamma(gamma)?;
        Ok(RenewalChain {
            gammas: Gammas::Constant(gamma),
        })
    }

    pub fn explicit(values: Vec<f64>, tail: f64) -> Result<Self> {
        for &g in values.iter().chain([&tail]) {
            check_gamma(g)?;
        }
        Ok(RenewalChain {
            gammas: Gammas::Explicit { values, tail },
        })
    }

    pub fn is_canonical(&self) -> bool {
        matches!(self.gammas, Gammas::Canonical { .. })
    }

    /// `γ_k` in binary64.
    pub fn gamma(&self, k: usize) -> f64 {
        match &self.gammas {
            Gammas::Canonical { theta, phi_p } => {
                let x = phi_p.mid_f64() * theta.mid_f64().powi(k as i32);
                -(-x).exp_m1()
            }
            Gammas::Constant(g) => *g,
            Gammas::Explicit { values, tail } => values.get(k).copied().unwrap_or(*tail),
        }
    }

    /// `γ_0, …, γ_{k-1}`.
    pub fn gammas(&self, k: usize) -> Vec<f64> {
        (0..k).map(|i| self.gamma(i)).collect()
    }

    /// Enclosures of `(γ_k, 1 - γ_k)`.
    fn gamma_interval(&self, k: usize, arith: &Arith) -> (Interval, Interval) {
        match &self.gammas {
            Gammas::Canonical { theta, phi_p } => {
                let x = -&(&arith.adopt(phi_p) * &arith.adopt(theta).powi(k as i32));
                (-x.expm1(), x.exp())
            }
            _ => {
                let g = arith.num(self.gamma(k));
                let stay = arith.one() - &g;
                (g, stay)
            }
        }
    }

    /// Smallest return probability from index `k` on (for tail bounds of
    /// non-canonical chains).
    fn tail_gamma_from(&self, k: usize) -> f64 {
        match &self.gammas {
            Gammas::Canonical { .. } => 0.0,
            Gammas::Constant(g) => *g,
            Gammas::Explicit { values, tail } => values.iter().skip(k).copied().fold(*tail, f64::min),
        }
    }
}

/// `P(τ = k)`, the return time to `0` starting from `0`.
///
/// Both the product form `Π_{i<k-1}(1-γ_i) γ_{k-1}` and the telescoped form
/// `Π_{i<k-1}(1-γ_i) - Π_{i<k}(1-γ_i)` are evaluated; disagreement beyond
/// rounding is an invariant violation.
pub fn tau_pmf(chain: &RenewalChain, k: usize) -> Result<f64> {
    if k == 0 {
        return Err(Error::invalid("tau_pmf needs k >= 1"));
    }
    let mut survive = 1.0;
    for i in 0..k - 1 {
        survive *= 1.0 - chain.gamma(i);
    }
    let g = chain.gamma(k - 1);
    let product = survive * g;
    let telescoped = survive - survive * (1.0 - g);
    if (product - telescoped).abs() > 8.0 * f64::EPSILON * survive {
        return Err(Error::InvariantViolation(format!(
            "tau pmf forms disagree at k={k}: {product:e} vs {telescoped:e}"
        )));
    }
    Ok(product)
}

/// Occupation probabilities and return-time law up to a horizon.
#[derive(Clone, Debug, Serialize)]
pub struct RenewalTable {
    pub horizon: usize,
    /// `γ*_k` for `k = 0..=horizon`.
    pub occupation: Vec<f64>,
    /// `P(τ = k)` for `k = 1..=horizon`, stored at index `k - 1`.
    pub tau_pmf: Vec<f64>,
    /// Largest deviation of a step's total mass from one.
    pub max_mass_error: f64,
}

impl RenewalTable {
    pub fn tau(&self, k: usize) -> f64 {
        self.tau_pmf[k - 1]
    }

    /// Largest `|γ*_k - Σ_{j≤k} P(τ=j) γ*_{k-j}|` over `1 ≤ k ≤ horizon`.
    pub fn renewal_residual(&self) -> f64 {
        (1..=self.horizon)
            .map(|k| {
                let conv: f64 = (1..=k).map(|j| self.tau(j) * self.occupation[k - j]).sum();
                (self.occupation[k] - conv).abs()
            })
            .fold(0.0, f64::max)
    }
}

/// Forward recursion of the distribution of `S_k` on `{0, …, k}`.
pub fn occupation_at_zero(chain: &RenewalChain, horizon: usize) -> Result<RenewalTable> {
    if horizon == 0 {
        return Err(Error::invalid("horizon must be >= 1"));
    }
    let g = chain.gammas(horizon + 1);
    let mut dist = vec![0.0f64; horizon + 1];
    dist[0] = 1.0;
    let mut occupation = Vec::with_capacity(horizon + 1);
    occupation.push(1.0);
    let mut max_mass_error = 0.0f64;
    for k in 0..horizon {
        // States above k carry no mass at time k.
        let mut back = 0.0;
        for j in (0..=k).rev() {
            let m = dist[j];
            back += m * g[j];
            dist[j + 1] = m * (1.0 - g[j]);
        }
        dist[0] = back;
        occupation.push(back);
        let mass: f64 = dist[..=k + 1].iter().sum();
        max_mass_error = max_mass_error.max((mass - 1.0).abs());
    }
    let mut tau = Vec::with_capacity(horizon);
    let mut survive = 1.0;
    for gk in g.iter().take(horizon) {
        tau.push(survive * gk);
        survive *= 1.0 - gk;
    }
    if max_mass_error > 1e-9 {
        return Err(Error::InvariantViolation(format!("mass drift {max_mass_error:e}")));
    }
    Ok(RenewalTable {
        horizon,
        occupation,
        tau_pmf: tau,
        max_mass_error,
    })
}

/// `Σ_k P(τ=k) z^k` with its certified truncation.
#[derive(Clone, Debug)]
pub struct TauSeries {
    /// Partial sum plus tail bound.
    pub value: Interval,
    pub partial: Interval,
    pub tail: Interval,
    pub terms: usize,
}

const TAU_SERIES_MAX_TERMS: usize = 1_000_000;

/// Evaluates the return-time generating function at `z`.
///
/// For the canonical chain the tail after `K` terms is bounded by
/// `(‖φ_p‖/θ)(zθ)^{K+1}/(1-zθ)`; for other chains by
/// `Π_{i<K}(1-γ_i) z^{K+1} / (1 - (1-γ_min) z)`.
pub fn tau_series(chain: &RenewalChain, z: &Interval, rel_tol: f64, arith: &Arith) -> Result<TauSeries> {
    if !(rel_tol > 0.0) {
        return Err(Error::invalid("rel_tol must be positive"));
    }
    let z = arith.adopt(z);
    let one = arith.one();
    // Ratio of the geometric majorant, and its prefactor.
    let (ratio, pref) = match &chain.gammas {
        Gammas::Canonical { theta, phi_p } => {
            let th = arith.adopt(theta);
            (&z * &th, &arith.adopt(phi_p) / &th)
        }
        _ => (arith.zero(), arith.zero()),
    };
    if chain.is_canonical() && !ratio.certainly_lt(&one) {
        return Err(Error::DivergenceRisk(format!("z*theta = {ratio} is not below 1")));
    }

    let mut partial = arith.zero();
    let mut survive = arith.one();
    let mut zk = arith.one();
    let mut ratio_k = ratio.clone();
    for k in 1..=TAU_SERIES_MAX_TERMS {
        let (g, stay) = chain.gamma_interval(k - 1, arith);
        zk = &zk * &z;
        partial = &partial + &(&(&survive * &g) * &zk);
        survive = &survive * &stay;
        ratio_k = &ratio_k * &ratio;

        let tail = if chain.is_canonical() {
            &(&pref * &ratio_k) / &(&one - &ratio)
        } else {
            let q = &(&one - &arith.num(chain.tail_gamma_from(k))) * &z;
            if !q.certainly_lt(&one) {
                if k == 1 {
                    return Err(Error::DivergenceRisk(format!("(1-gamma)*z = {q} is not below 1")));
                }
                continue;
            }
            &(&survive * &(&zk * &z)) / &(&one - &q)
        };
        if tail.hi_f64() <= rel_tol * partial.lo_f64() {
            return Ok(TauSeries {
                value: &partial + &tail,
                partial,
                tail,
                terms: k,
            });
        }
    }
    Err(Error::NonconvergentAtPrecision {
        reason: "return-time series tail did not fall below tolerance".into(),
        required_terms: TAU_SERIES_MAX_TERMS as f64,
    })
}

/// One verdict of [`verify_key_inequality`].
#[derive(Clone, Debug, Serialize)]
pub struct Verdict {
    pub check: String,
    pub lhs: f64,
    pub rhs: f64,
    pub tolerance: f64,
    pub holds: bool,
}

#[derive(Clone, Debug, Serialize)]
pub struct KeyInequalityReport {
    pub tau_series: f64,
    pub a_plus_eps: f64,
    pub majorant: f64,
    pub n_steps: f64,
    pub occupation_series: f64,
    pub identity_rhs: f64,
    pub identity_terms: usize,
    pub max_weighted_occupation: f64,
    pub weighted_horizon: usize,
    pub verdicts: Vec<Verdict>,
}

impl KeyInequalityReport {
    pub fn all_hold(&self) -> bool {
        self.verdicts.iter().all(|v| v.holds)
    }
}

pub const IDENTITY_TOL: f64 = 1e-8;
pub const WEIGHTED_HORIZON: usize = 10_000;

/// `Σ_{k≤K} γ*_k z^k` from a table, together with the number of terms used.
/// Stops once the terms have become negligible, or at the table's horizon.
pub fn occupation_series(table: &RenewalTable, z: f64) -> (f64, usize) {
    let lz = z.ln();
    let mut sum = 0.0;
    let mut small_run = 0;
    for (k, g) in table.occupation.iter().enumerate() {
        let term = g * (k as f64 * lz).exp();
        sum += term;
        if term <= 1e-18 * sum {
            small_run += 1;
            if small_run >= 64 {
                return (sum, k + 1);
            }
        } else {
            small_run = 0;
        }
    }
    (sum, table.occupation.len())
}

/// Checks the chain of inequalities behind the correlation bound for the
/// canonical chain of `params` at `z₀`:
///
/// * the return-time series at `z₀` is at most `a + ε`;
/// * the two-piece majorant with `N = 1/U` sits between the series and `a + ε`;
/// * `Σ γ*_k z₀^k = 1 / (1 - Σ P(τ=k) z₀^k)`;
/// * `θ z₀ < 1`;
/// * `γ*_k z₀^k ≤ 1/(1 - a - ε)` for `k ≤ 10⁴`.
///
/// Failures are reported as verdicts.
pub fn verify_key_inequality(params: &SystemParams, bundle: &ConstantsBundle, arith: &Arith) -> Result<KeyInequalityReport> {
    verify_key_inequality_with(params, bundle, WEIGHTED_HORIZON, IDENTITY_TOL, arith)
}

pub fn verify_key_inequality_with(
    params: &SystemParams,
    bundle: &ConstantsBundle,
    weighted_horizon: usize,
    identity_tol: f64,
    arith: &Arith,
) -> Result<KeyInequalityReport> {
    let chain = RenewalChain::canonical(params);
    let theta = params.theta(arith);
    let phi_p = params.phi_p_norm(arith);
    let one = arith.one();
    let z0 = arith.adopt(&bundle.z0);
    let a_eps = &arith.adopt(&bundle.a) + &arith.adopt(&bundle.epsilon);
    let d = &one - &a_eps;
    let mut verdicts = Vec::new();
    let mut verdict = |check: &str, lhs: f64, rhs: f64, tolerance: f64, holds: bool| {
        verdicts.push(Verdict {
            check: check.into(),
            lhs,
            rhs,
            tolerance,
            holds,
        });
    };

    let tz = &theta * &z0;
    let tz_ok = tz.certainly_lt(&one);
    verdict("theta * z0 < 1", tz.hi_f64(), 1.0, 0.0, tz_ok);

    let series = if tz_ok {
        Some(tau_series(&chain, &z0, 1e-15, arith)?)
    } else {
        None
    };
    let tau_value = series.as_ref().map_or(f64::INFINITY, |s| s.value.hi_f64());
    let tau_ok = series.as_ref().is_some_and(|s| s.value.certainly_le(&a_eps));
    verdict("tau_series(z0) <= a + eps", tau_value, a_eps.lo_f64(), 0.0, tau_ok);

    let n_steps = arith.adopt(&bundle.n);
    let majorant = if tz_ok && n_steps.is_finite() {
        let geo = &(&(&phi_p / &theta) * &(&n_steps * &tz.ln()).exp()) / &(&one - &tz);
        let a_big = -(-&(&phi_p / &(&one - &theta))).expm1();
        &geo + &(&a_big * &(&n_steps * &bundle.w.log1p()).exp())
    } else {
        arith.num(f64::INFINITY)
    };
    let maj_ok = majorant.is_finite()
        && series.as_ref().is_some_and(|s| s.value.certainly_le(&majorant))
        && majorant.certainly_le(&a_eps);
    verdict("tau_series(z0) <= majorant(N) <= a + eps", majorant.hi_f64(), a_eps.lo_f64(), 0.0, maj_ok);

    let table = occupation_at_zero(&chain, weighted_horizon)?;
    let z0f = z0.mid_f64();
    let (occ_series, identity_terms) = occupation_series(&table, z0f);
    let identity_rhs = 1.0 / (1.0 - tau_value.min(1.0 - f64::EPSILON));
    let rel = ((occ_series - identity_rhs) / identity_rhs).abs();
    verdict(
        "sum gamma*_k z0^k = 1/(1 - tau_series(z0))",
        occ_series,
        identity_rhs,
        identity_tol,
        tau_ok && identity_terms < table.occupation.len() && rel <= identity_tol,
    );

    let lz = bundle.w.log1p().mid_f64();
    let max_weighted = table
        .occupation
        .iter()
        .enumerate()
        .map(|(k, g)| g * (k as f64 * lz).exp())
        .fold(0.0, f64::max);
    let inv_d = d.recip();
    let w_ok = d.certainly_positive() && max_weighted <= inv_d.lo_f64() * (1.0 - 1e-12);
    verdict("max_k gamma*_k z0^k <= 1/(1 - a - eps)", max_weighted, inv_d.lo_f64(), 1e-12, w_ok);

    Ok(KeyInequalityReport {
        tau_series: tau_value,
        a_plus_eps: a_eps.mid_f64(),
        majorant: majorant.hi_f64(),
        n_steps: n_steps.mid_f64(),
        occupation_series: occ_series,
        identity_rhs,
        identity_terms,
        max_weighted_occupation: max_weighted,
        weighted_horizon,
        verdicts,
    })
}

/// Generator for path `index` of a batch seeded with `seed`.
pub fn path_rng(seed: u64, index: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index);
    rng
}

fn walk(gammas: &[f64], chain: &RenewalChain, n: usize, rng: &mut ChaCha8Rng, mut visit: impl FnMut(usize, usize)) {
    let mut s = 0usize;
    visit(0, 0);
    for k in 1..=n {
        let g = gammas.get(s).copied().unwrap_or_else(|| chain.gamma(s));
        s = if rng.gen::<f64>() < g { 0 } else { s + 1 };
        visit(k, s);
    }
}

/// States `S_0 = 0, S_1, …, S_n` of one path.
pub fn sample_path(chain: &RenewalChain, n: usize, seed: u64) -> Vec<usize> {
    let gammas = chain.gammas(n + 1);
    let mut rng = path_rng(seed, 0);
    let mut out = Vec::with_capacity(n + 1);
    walk(&gammas, chain, n, &mut rng, |_, s| out.push(s));
    out
}

/// Number of paths (out of `paths`) with `S_k = 0`, for `k = 0..=horizon`.
/// Path `i` uses stream `i` of `seed`, so the counts do not depend on how the
/// work is split across threads.
pub fn monte_carlo_occupation(chain: &RenewalChain, horizon: usize, paths: u64, seed: u64) -> Vec<u64> {
    let gammas = chain.gammas(horizon + 1);
    const BLOCK: u64 = 4096;
    let blocks = paths.div_ceil(BLOCK);
    (0..blocks)
        .into_par_iter()
        .map(|b| {
            let mut counts = vec![0u64; horizon + 1];
            for i in b * BLOCK..((b + 1) * BLOCK).min(paths) {
                let mut rng = path_rng(seed, i);
                walk(&gammas, chain, horizon, &mut rng, |k, s| {
                    if s == 0 {
                        counts[k] += 1;
                    }
                });
            }
            counts
        })
        .reduce(
            || vec![0u64; horizon + 1],
            |mut a, b| {
                for (x, y) in a.iter_mut().zip(b) {
                    *x += y;
                }
                a
            },
        )
}
