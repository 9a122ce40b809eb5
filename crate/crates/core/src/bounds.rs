//! Closed-form bounds: correlation decay, CLT error, large deviations and the
//! law-of-large-numbers threshold.
//!
//! All four share the quantities
//!
//! ```text
//! L = ln √z₀,   q = 1 - z₀^{-1/2} = -expm1(-L),   D = 1 - a - ε
//! ```
//!
//! which are formed once per evaluator from `w = z₀ - 1`.

use serde::Serialize;

use crate::constants::{ConstantsBundle, SystemParams};
use crate::error::{Error, Result};
use crate::precision::{Arith, CertifiedReal, Interval};

/// Time horizon, frequency, deviation level and LLN exponent.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct BoundQuery {
    pub n: u64,
    pub t: f64,
    pub u: f64,
    pub delta: f64,
}

impl BoundQuery {
    pub fn validate(&self) -> Result<()> {
        if self.n == 0 {
            return Err(Error::invalid("n must be >= 1"));
        }
        if !self.t.is_finite() {
            return Err(Error::invalid("t must be finite"));
        }
        if !(self.u.is_finite() && self.u > 0.0) {
            return Err(Error::invalid("u must be > 0"));
        }
        check_delta(self.delta)
    }
}

fn check_delta(delta: f64) -> Result<()> {
    if !(delta > 0.0 && delta < 0.5) {
        return Err(Error::invalid(format!("delta must lie in (0, 0.5), got {delta}")));
    }
    Ok(())
}

/// A probability bound together with its vacuity flag (`value >= 1`).
#[derive(Clone, Debug)]
pub struct ProbabilityBound {
    pub value: CertifiedReal,
    pub vacuous: bool,
}

/// The truncated LLN series with its certified tail.
#[derive(Clone, Debug)]
pub struct LlnSeries {
    pub value: CertifiedReal,
    pub terms: u64,
    /// Upper bound of the analytic tail beyond `terms`, before the
    /// prefactor.
    pub tail: f64,
    pub partial: f64,
}

/// Largest number of terms the LLN series is summed to.
pub const LLN_MAX_TERMS: u64 = 200_000;

/// Relative tolerance of the LLN truncation.
pub const LLN_REL_TAIL: f64 = 1e-6;

/// Bound evaluator for one `(params, bundle)` pair.
#[derive(Clone, Debug)]
pub struct BoundEvaluator {
    arith: Arith,
    phi: Interval,
    theta: Interval,
    phi_p: Interval,
    /// `ln √z₀`
    l: Interval,
    /// `1 - z₀^{-1/2}`
    q: Interval,
    /// `1 - a - ε`
    d: Interval,
}

impl BoundEvaluator {
    /// Fails with `DegenerateBundle` when `1 - a - ε` or `z₀ - 1` is not
    /// certainly positive. Admissibility of the remaining constraints is not
    /// required here; callers that need it use
    /// [`ConstantsBundle::require_admissible`].
    pub fn new(params: &SystemParams, bundle: &ConstantsBundle, arith: &Arith) -> Result<Self> {
        let a = arith.adopt(&bundle.a);
        let eps = arith.adopt(&bundle.epsilon);
        let w = arith.adopt(&bundle.w);
        let d = &(arith.one() - &a) - &eps;
        if !d.certainly_positive() {
            return Err(Error::DegenerateBundle(format!("1 - a - eps = {d} is not positive")));
        }
        if !w.certainly_positive() {
            return Err(Error::DegenerateBundle("z0 must exceed 1".into()));
        }
        let l = w.log1p().ldexp(-1);
        let q = -(-&l).expm1();
        Ok(BoundEvaluator {
            arith: *arith,
            phi: params.phi_norm(arith),
            theta: params.theta(arith),
            phi_p: params.phi_p_norm(arith),
            l,
            q,
            d,
        })
    }

    pub fn arith(&self) -> &Arith {
        &self.arith
    }

    pub fn log_sqrt_z0(&self) -> &Interval {
        &self.l
    }

    pub fn one_minus_a_eps(&self) -> &Interval {
        &self.d
    }

    pub fn phi_norm_f64(&self) -> f64 {
        self.phi.mid_f64()
    }

    /// `‖φ‖ z₀^{-1/2} / ((1 - z₀^{-1/2})(1-a-ε) ln √z₀)`, the bound on
    /// `sup_n ‖H_n‖_∞` of the martingale decomposition.
    pub fn coboundary_envelope(&self) -> Interval {
        let qdl = &(&self.q * &self.d) * &self.l;
        &(&self.phi * &(-&self.l).exp()) / &qdl
    }

    /// `3‖φ‖ / ((1 - z₀^{-1/2})(1-a-ε) ln √z₀)`, the bound on `‖ψ_n‖_∞`.
    pub fn martingale_sup_envelope(&self) -> Interval {
        let qdl = &(&self.q * &self.d) * &self.l;
        &(&self.arith.int(3) * &self.phi) / &qdl
    }

    /// `(4n+3)‖φ‖ e^{‖φ_p‖θ/(1-θ)} ‖φ_p‖ / (1-θ)`, the bound on the
    /// Lipschitz norm of `ψ_n`.
    pub fn martingale_lip_envelope(&self, n: u64) -> Interval {
        let ar = &self.arith;
        let one_minus_theta = ar.one() - &self.theta;
        let growth = (&(&self.phi_p * &self.theta) / &one_minus_theta).exp();
        let lin = &(&ar.num(4.0 * n as f64) + &ar.int(3)) * &self.phi;
        &(&(&lin * &growth) * &self.phi_p) / &one_minus_theta
    }

    fn n_interval(&self, n: u64) -> Interval {
        self.arith.num(n as f64)
    }

    /// `‖φ‖ z₀^{-n/2} / ((ln √z₀)(1 - a - ε))`.
    pub fn correlation(&self, n: u64) -> Interval {
        let decay = (-&(&self.n_interval(n) * &self.l)).exp();
        &(&self.phi * &decay) / &(&self.l * &self.d)
    }

    /// Coefficient of `t⁴ ‖φ‖⁴ n^{-0.1}` in `C_{t,n}`.
    pub fn clt_leading_coefficient(&self) -> Interval {
        let qdl = &(&self.q * &self.d) * &self.l;
        &self.arith.int(6922) / &qdl.powi(4)
    }

    /// The three terms of `C_{t,n}` (coefficients included) and their sum.
    pub fn clt_terms(&self, t: f64, n: u64) -> [Interval; 4] {
        let ar = &self.arith;
        let t = ar.num(t);
        let t2 = t.square();
        let t4 = t2.square();
        let nn = self.n_interval(n);
        let ln_n = nn.ln();
        let point_one = ar.parse("0.1").expect("literal");
        let point_two = ar.parse("0.2").expect("literal");
        let n_pow_01 = (&point_one * &ln_n).exp();
        let n_pow_02 = (&point_two * &ln_n).exp();
        let phi2 = self.phi.square();
        let phi4 = phi2.square();
        let qdl = &(&self.q * &self.d) * &self.l;

        let first = &(&t4 * &phi4) / &(&n_pow_01 * &qdl.powi(4));
        let second = &(&(&t2 * &(-&(&nn * &self.l)).exp()) * &phi2) / &qdl;
        let one_minus_theta = ar.one() - &self.theta;
        let distortion = (&(&ar.int(2) * &self.phi_p) * &(&self.theta / &one_minus_theta)).exp();
        let third_num = &(&(&(&t2 * &nn.powi(3)) * &phi2) * &(&distortion * &self.phi_p.square()))
            * &(-&(&n_pow_02 * &self.l)).exp();
        let third_den = &(&one_minus_theta.square() * &self.d) * &self.l;
        let third = &third_num / &third_den;

        let c1 = &ar.int(6922) * &first;
        let c2 = &ar.int(6922) * &second;
        let c3 = &ar.int(64) * &third;
        let total = &(&c1 + &c2) + &c3;
        [c1, c2, c3, total]
    }

    pub fn clt_error(&self, t: f64, n: u64) -> Interval {
        let [_, _, _, total] = self.clt_terms(t, n);
        total
    }

    /// `(κ₁, κ₂)` with the LDP bound `2 exp(u κ₁ / ‖φ‖) exp(-u² n κ₂ / ‖φ‖²)`.
    pub fn ldp_coefficients(&self) -> (Interval, Interval) {
        let qdl = &(&self.q * &self.d) * &self.l;
        let sqrt_z0 = self.l.exp();
        let k1 = &qdl / &(&self.arith.int(36) * &sqrt_z0);
        let k2 = &qdl.square() / &self.arith.int(72);
        (k1, k2)
    }

    pub fn ldp(&self, u: f64, n: u64) -> Interval {
        let ar = &self.arith;
        let (k1, k2) = self.ldp_coefficients();
        let u = ar.num(u);
        let lin = &(&u * &k1) / &self.phi;
        let quad = &(&(&u.square() * &self.n_interval(n)) * &k2) / &self.phi.square();
        &ar.int(2) * &(&lin - &quad).exp()
    }

    /// Exponent prefactor `q D L / (36 ‖φ‖ √z₀)` and the series coefficient
    /// `c = q² D² L² / (72 ‖φ‖²)` of the LLN bound.
    pub fn lln_coefficients(&self) -> (Interval, Interval) {
        let (k1, k2) = self.ldp_coefficients();
        (&k1 / &self.phi, &k2 / &self.phi.square())
    }

    pub fn lln(&self, delta: f64) -> Result<LlnSeries> {
        check_delta(delta)?;
        let (pref, c) = self.lln_coefficients();
        lln_series_bound(&pref, &c, delta, &self.arith)
    }
}

/// Upper bound on `∫_M^∞ x exp(-c x^{2δ}) dx` via the incomplete gamma
/// estimate `Γ(s, y) <= y^{s-1} e^{-y} y / (y - s + 1)`, `s = 1/δ`,
/// `y = c M^{2δ}`; natural log of the bound, binary64. `None` when
/// `y <= s - 1` (summand not yet decreasing).
fn ln_tail_bound_f64(ln_c: f64, delta: f64, ln_m: f64) -> Option<f64> {
    let s = 1.0 / delta;
    let ln_y = ln_c + 2.0 * delta * ln_m;
    let y = ln_y.exp();
    if !(y > s - 1.0) || !y.is_finite() {
        return if y.is_infinite() { Some(f64::NEG_INFINITY) } else { None };
    }
    Some((s / 2.0).ln() - s * ln_c + (s - 1.0) * ln_y - y + (y / (y - s + 1.0)).ln())
}

/// `2 exp(pref) Σ_{m>=1} m exp(-c m^{2δ})` with certified truncation.
pub fn lln_series_bound(pref: &Interval, c: &Interval, delta: f64, arith: &Arith) -> Result<LlnSeries> {
    check_delta(delta)?;
    let bits = arith.bits() as f64;
    let c_lo = c.lo_f64();
    if !(c_lo > 0.0) || c_lo.log2() < -bits {
        return Err(Error::NonconvergentAtPrecision {
            reason: format!("series coefficient c = {c} underflows working precision"),
            required_terms: f64::INFINITY,
        });
    }
    let ln_c = c_lo.ln();
    let ln_partial_lower = -c.hi_f64(); // first term alone
    let target = LLN_REL_TAIL.ln() + ln_partial_lower - 2.0; // margin for f64 slop

    // Smallest M (on a geometric ladder, then bisected) meeting the target.
    let mut lo = 0.0f64; // ln M
    let mut hi = 1.0f64;
    let ok = |ln_m: f64| ln_tail_bound_f64(ln_c, delta, ln_m).is_some_and(|t| t <= target);
    while !ok(hi) {
        lo = hi;
        hi *= 2.0;
        if hi > 1e6 {
            break;
        }
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if ok(mid) {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    let ln_m = hi;
    if ln_m > (LLN_MAX_TERMS as f64).ln() {
        return Err(Error::NonconvergentAtPrecision {
            reason: format!(
                "series coefficient c = {} needs more than {LLN_MAX_TERMS} terms",
                c.to_sci(6)
            ),
            required_terms: ln_m.exp(),
        });
    }
    let terms = ln_m.exp().ceil().max(1.0) as u64;

    let two_delta = arith.num(2.0 * delta);
    let mut partial = arith.zero();
    for m in 1..=terms {
        let mm = arith.num(m as f64);
        let e = (-&(c * &(&two_delta * &mm.ln()).exp())).exp();
        partial = &partial + &(&mm * &e);
    }
    let s = arith.one() / arith.num(delta);
    let mm = arith.num(terms as f64);
    let y = c * &(&two_delta * &mm.ln()).exp();
    let y_minus = &(&y - &s) + &arith.one();
    if !y_minus.certainly_positive() {
        return Err(Error::InvariantViolation("LLN truncation before the decreasing regime".into()));
    }
    let tail = &(&(&(&s.ldexp(-1) * &c.pow(&-&s)) * &y.pow(&(&s - &arith.one()))) * &(-&y).exp())
        * &(&y / &y_minus);
    let tail_f = tail.hi_f64();
    let partial_f = partial.lo_f64();
    if !(tail_f <= LLN_REL_TAIL * partial_f) {
        return Err(Error::InvariantViolation(format!(
            "LLN tail {tail_f:e} exceeds tolerance of partial sum {partial_f:e}"
        )));
    }
    let total = &(&arith.int(2) * &pref.exp()) * &(&partial + &tail);
    Ok(LlnSeries {
        value: total.upper(),
        terms,
        tail: tail_f,
        partial: partial.mid_f64(),
    })
}

fn admissible_evaluator(params: &SystemParams, bundle: &ConstantsBundle, arith: &Arith) -> Result<BoundEvaluator> {
    bundle.require_admissible()?;
    BoundEvaluator::new(params, bundle, arith)
}

/// `‖P^n(φ - Eφ)‖_∞` bound, rounded toward +∞.
pub fn correlation_bound(params: &SystemParams, bundle: &ConstantsBundle, n: u64, arith: &Arith) -> Result<CertifiedReal> {
    Ok(admissible_evaluator(params, bundle, arith)?.correlation(n).upper())
}

/// `C_{t,n}`, rounded toward +∞.
pub fn clt_error(params: &SystemParams, bundle: &ConstantsBundle, t: f64, n: u64, arith: &Arith) -> Result<CertifiedReal> {
    if n == 0 {
        return Err(Error::invalid("n must be >= 1"));
    }
    Ok(admissible_evaluator(params, bundle, arith)?.clt_error(t, n).upper())
}

pub fn ldp_bound(params: &SystemParams, bundle: &ConstantsBundle, u: f64, n: u64, arith: &Arith) -> Result<ProbabilityBound> {
    if !(u >= 0.0 && u.is_finite()) {
        return Err(Error::invalid("u must be > 0"));
    }
    let v = admissible_evaluator(params, bundle, arith)?.ldp(u, n).upper();
    let vacuous = v.to_f64() >= 1.0;
    Ok(ProbabilityBound { value: v, vacuous })
}

pub fn lln_threshold_bound(params: &SystemParams, bundle: &ConstantsBundle, delta: f64, arith: &Arith) -> Result<LlnSeries> {
    admissible_evaluator(params, bundle, arith)?.lln(delta)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::precision::{Mode, Precision};

    fn setup() -> (SystemParams, ConstantsBundle, Arith) {
        let ar = Arith::certified(Precision::default());
        let p = SystemParams::new(0.5, 1.0, 1.0).unwrap();
        let b = ConstantsBundle::from_decimal(&p, "0.1", "1.001", &ar).unwrap();
        (p, b, ar)
    }

    #[test]
    fn correlation_ratio_is_inverse_sqrt_z0() {
        let (p, b, ar) = setup();
        let ev = BoundEvaluator::new(&p, &b, &ar).unwrap();
        for n in [0u64, 1, 10, 1000] {
            let r = ev.correlation(n + 1).mid_f64() / ev.correlation(n).mid_f64();
            assert!((r - 1.001f64.powf(-0.5)).abs() < 1e-14);
        }
    }

    #[test]
    fn clt_vanishes_at_t_zero() {
        let (p, b, ar) = setup();
        let c = clt_error(&p, &b, 0.0, 100, &ar).unwrap();
        assert!(c.value().is_zero());
    }

    #[test]
    fn ldp_tends_to_two() {
        let (p, b, ar) = setup();
        let v = ldp_bound(&p, &b, 0.0, 10, &ar).unwrap();
        assert_eq!(v.value.to_f64(), 2.0);
        assert!(v.vacuous);
    }

    #[test]
    fn degenerate_bundle_rejected() {
        let ar = Arith::certified(Precision::default());
        let p = SystemParams::new(0.5, 1.0, 1.0).unwrap();
        // eps beyond 1 - a: bundle assembles but is flagged, evaluator refuses.
        let b = ConstantsBundle::from_decimal(&p, "0.2", "1.0001", &ar).unwrap();
        assert!(matches!(BoundEvaluator::new(&p, &b, &ar), Err(Error::DegenerateBundle(_))));
        assert!(correlation_bound(&p, &b, 1, &ar).is_err());
    }

    #[test]
    fn lln_large_c_matches_direct_sum() {
        let ar = Arith::certified(Precision::default());
        let s = lln_series_bound(&ar.zero(), &ar.num(10.0), 0.25, &ar).unwrap();
        let direct: f64 = (1..=1000).map(|m| m as f64 * (-10.0 * (m as f64).sqrt()).exp()).sum();
        let v = s.value.to_f64();
        assert!(v >= 2.0 * direct);
        assert!((v - 2.0 * direct) / (2.0 * direct) < 2e-6);
        // leading term dominates
        assert!(direct < 1.05 * (-10.0f64).exp());
    }

    #[test]
    fn lln_tiny_c_reports_nonconvergence() {
        let ar = Arith::certified(Precision::default());
        let e = lln_series_bound(&ar.zero(), &ar.num(1e-40), 0.25, &ar).unwrap_err();
        match e {
            Error::NonconvergentAtPrecision { required_terms, .. } => assert!(required_terms > 1e70),
            other => panic!("unexpected {other:?}"),
        }
        let e = lln_series_bound(&ar.zero(), &ar.num(1e-300), 0.25, &ar).unwrap_err();
        assert!(matches!(e, Error::NonconvergentAtPrecision { .. }));
    }

    #[test]
    fn query_validation() {
        let q = BoundQuery { n: 10, t: 1.0, u: 0.1, delta: 0.25 };
        assert!(q.validate().is_ok());
        assert!(BoundQuery { delta: 0.5, ..q }.validate().is_err());
        assert!(BoundQuery { n: 0, ..q }.validate().is_err());
        assert!(BoundQuery { u: 0.0, ..q }.validate().is_err());
    }

    #[test]
    fn certified_dominates_nearest() {
        let (p, _, _) = setup();
        let cert = Arith::certified(Precision::default());
        let near = Arith::new(Precision::default(), Mode::Nearest);
        let bc = ConstantsBundle::from_decimal(&p, "0.1", "1.001", &cert).unwrap();
        let bn = ConstantsBundle::from_decimal(&p, "0.1", "1.001", &near).unwrap();
        let ec = BoundEvaluator::new(&p, &bc, &cert).unwrap();
        let en = BoundEvaluator::new(&p, &bn, &near).unwrap();
        assert!(en.correlation(50).mid_f64() <= ec.correlation(50).hi_f64());
        assert!(en.clt_error(1.5, 64).lo_f64() <= ec.clt_error(1.5, 64).hi_f64());
        assert!(ec.clt_error(1.5, 64).lo_f64() <= en.clt_error(1.5, 64).lo_f64());
    }
}
