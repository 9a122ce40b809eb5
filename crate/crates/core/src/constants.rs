//! System parameters and the admissible constants `a`, `ε`, `U`, `z₀`.
//!
//! `z₀` is always carried as `w = z₀ - 1` so that the tiny excesses over one
//! that occur for strongly expanding systems keep their relative accuracy.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::precision::{Arith, CertifiedReal, Interval, Mode, Precision};

/// The triple `(θ, ‖φ_p‖, ‖φ‖)` every bound is a function of.
#[derive(Clone, Debug)]
pub struct SystemParams {
    theta: Interval,
    phi_p_norm: Interval,
    phi_norm: Interval,
    pub alphabet_size: Option<usize>,
}

impl SystemParams {
    /// Builds parameters from binary64 values (taken exactly).
    pub fn new(theta: f64, phi_p_norm: f64, phi_norm: f64) -> Result<Self> {
        let a = Arith::certified(Precision::default());
        SystemParams::from_intervals(a.num(theta), a.num(phi_p_norm), a.num(phi_norm))
    }

    /// Builds parameters from enclosures, e.g. closed forms evaluated at high
    /// precision.
    pub fn from_intervals(theta: Interval, phi_p_norm: Interval, phi_norm: Interval) -> Result<Self> {
        for (name, v) in [("theta", &theta), ("phi_p_norm", &phi_p_norm), ("phi_norm", &phi_norm)] {
            if !v.is_finite() {
                return Err(Error::invalid(format!("{name} must be finite")));
            }
        }
        if !(theta.lo_f64() > 0.0 && theta.certainly_positive() && theta.hi_f64() < 1.0) {
            return Err(Error::invalid(format!("theta must lie in (0, 1), got {theta}")));
        }
        let one = Arith::certified(Precision::default()).one();
        if !one.certainly_le(&phi_p_norm) {
            return Err(Error::invalid(format!("phi_p_norm must be >= 1, got {phi_p_norm}")));
        }
        if !one.certainly_le(&phi_norm) {
            return Err(Error::invalid(format!("phi_norm must be >= 1, got {phi_norm}")));
        }
        Ok(SystemParams {
            theta,
            phi_p_norm,
            phi_norm,
            alphabet_size: None,
        })
    }

    pub fn with_alphabet_size(mut self, k: usize) -> Self {
        self.alphabet_size = Some(k);
        self
    }

    pub fn with_phi_norm(&self, phi_norm: f64) -> Result<Self> {
        let a = Arith::certified(Precision::default());
        let mut out = SystemParams::from_intervals(self.theta.clone(), self.phi_p_norm.clone(), a.num(phi_norm))?;
        out.alphabet_size = self.alphabet_size;
        Ok(out)
    }

    pub fn theta(&self, arith: &Arith) -> Interval {
        arith.adopt(&self.theta)
    }

    pub fn phi_p_norm(&self, arith: &Arith) -> Interval {
        arith.adopt(&self.phi_p_norm)
    }

    pub fn phi_norm(&self, arith: &Arith) -> Interval {
        arith.adopt(&self.phi_norm)
    }

    pub fn theta_f64(&self) -> f64 {
        self.theta.mid_f64()
    }

    pub fn phi_p_norm_f64(&self) -> f64 {
        self.phi_p_norm.mid_f64()
    }

    pub fn phi_norm_f64(&self) -> f64 {
        self.phi_norm.mid_f64()
    }
}

/// `a = 1 - exp(-‖φ_p‖ / (1 - θ))`.
pub fn compute_a_interval(params: &SystemParams, arith: &Arith) -> Interval {
    let theta = params.theta(arith);
    let pp = params.phi_p_norm(arith);
    let q = &pp / &(arith.one() - &theta);
    -(-q).expm1()
}

/// `a`, rounded toward +∞ in certified mode.
pub fn compute_a(params: &SystemParams, arith: &Arith) -> CertifiedReal {
    compute_a_interval(params, arith).upper()
}

/// The open interval `(0, ε_max)` with `ε_max = min{1 - a, 1 - θ}`.
#[derive(Clone, Debug)]
pub struct EpsilonRange {
    pub eps_max: Interval,
    /// Which of the two candidates binds.
    pub binding: &'static str,
}

impl EpsilonRange {
    /// A conservative (never too large) `ε_max` as binary64.
    pub fn upper_f64(&self) -> f64 {
        let lo = self.eps_max.lo_f64();
        match self.eps_max.mode() {
            Mode::Certified => lo * (1.0 - 4.0 * f64::EPSILON),
            Mode::Nearest => lo,
        }
    }

    pub fn contains(&self, eps: &Interval) -> bool {
        eps.certainly_positive() && eps.certainly_lt(&self.eps_max)
    }
}

pub fn epsilon_range(params: &SystemParams, a: &Interval, arith: &Arith) -> EpsilonRange {
    let theta = params.theta(arith);
    let a = arith.adopt(a);
    let one_minus_a = arith.one() - &a;
    let one_minus_theta = arith.one() - &theta;
    let binding = if one_minus_a.mid_f64() <= one_minus_theta.mid_f64() {
        "1 - a"
    } else {
        "1 - theta"
    };
    EpsilonRange {
        eps_max: one_minus_a.min(&one_minus_theta),
        binding,
    }
}

/// `U = ln(1 - ε) / (ln[θ ε (1 - ε - θ)] - ln(2‖φ_p‖))`.
pub fn compute_u_interval(params: &SystemParams, epsilon: &Interval, arith: &Arith) -> Result<Interval> {
    let theta = params.theta(arith);
    let pp = params.phi_p_norm(arith);
    let eps = arith.adopt(epsilon);
    let gap = &(arith.one() - &eps) - &theta;
    if !gap.certainly_positive() || !eps.certainly_positive() {
        return Err(Error::invalid("compute_U needs 0 < epsilon < 1 - theta"));
    }
    let num = (-&eps).log1p();
    let den = &(&(&theta * &eps) * &gap).ln() - &(&arith.int(2) * &pp).ln();
    if !den.certainly_negative() {
        return Err(Error::invalid("theta*eps*(1-eps-theta) >= 2*phi_p_norm"));
    }
    Ok(&num / &den)
}

pub fn compute_u(params: &SystemParams, epsilon: &Interval, arith: &Arith) -> Result<CertifiedReal> {
    Ok(compute_u_interval(params, epsilon, arith)?.upper())
}

/// The open interval `(1, Z)` for `z₀`, carried in log space.
#[derive(Clone, Debug)]
pub struct Z0Range {
    /// `ln` of each candidate, in the order `((a+ε/2)/a)^U`, `(θ+ε)/θ`,
    /// `(1-ε)/θ`, `e²`.
    pub log_candidates: [Interval; 4],
    /// `ln Z`.
    pub log_z: Interval,
    /// `Z - 1`.
    pub w_max: Interval,
    pub binding: usize,
}

pub const Z0_CONSTRAINTS: [&str; 4] = [
    "z0 < ((a+eps/2)/a)^U",
    "z0 < (theta+eps)/theta",
    "z0 < (1-eps)/theta",
    "z0 < e^2",
];

impl Z0Range {
    /// `Z - 1`, rounded toward −∞ in certified mode.
    pub fn w_max_lower(&self) -> CertifiedReal {
        self.w_max.lower()
    }
}

pub fn z0_range(params: &SystemParams, a: &Interval, epsilon: &Interval, arith: &Arith) -> Result<Z0Range> {
    let theta = params.theta(arith);
    let eps = arith.adopt(epsilon);
    let a = arith.adopt(a);
    let u = compute_u_interval(params, &eps, arith)?;
    let c1 = &u * &(&eps / &(&arith.int(2) * &a)).log1p();
    let c2 = (&eps / &theta).log1p();
    let c3 = (&(arith.one() - &eps) / &theta).ln();
    let c4 = arith.int(2);
    let cands = [c1, c2, c3, c4];
    let mut log_z = cands[0].clone();
    let mut binding = 0;
    for (i, c) in cands.iter().enumerate().skip(1) {
        if c.mid_f64() < log_z.mid_f64() {
            binding = i;
        }
        log_z = log_z.min(c);
    }
    let w_max = log_z.expm1();
    Ok(Z0Range {
        log_candidates: cands,
        log_z,
        w_max,
        binding,
    })
}

/// One admissibility constraint with its slack (limit minus value).
#[derive(Clone, Debug, Serialize)]
pub struct Margin {
    pub constraint: String,
    pub slack: f64,
    pub holds: bool,
}

/// Derived constants of the correlation-decay theorem with admissibility
/// certificates.
#[derive(Clone, Debug)]
pub struct ConstantsBundle {
    pub a: Interval,
    pub epsilon: Interval,
    /// `z₀ - 1`.
    pub w: Interval,
    pub z0: Interval,
    pub u: Interval,
    /// `N = 1 / U`.
    pub n: Interval,
    pub admissible: bool,
    pub margins: Vec<Margin>,
}

impl ConstantsBundle {
    /// Assembles a bundle for a chosen `ε` and `z₀ = 1 + w`, and checks every
    /// constraint. Inadmissible choices are returned with `admissible ==
    /// false` rather than rejected, so that externally stated bundles can be
    /// reported.
    pub fn assemble(params: &SystemParams, epsilon: &Interval, w: &Interval, arith: &Arith) -> Result<Self> {
        let eps = arith.adopt(epsilon);
        let w = arith.adopt(w);
        let a = compute_a_interval(params, arith);
        let er = epsilon_range(params, &a, arith);
        let theta = params.theta(arith);
        let mut margins = Vec::new();
        let mut push = |name: &str, slack: Interval| {
            let holds = slack.certainly_positive();
            margins.push(Margin {
                constraint: name.to_string(),
                slack: slack.lo_f64(),
                holds,
            });
        };
        push("eps > 0", eps.clone());
        push("eps < 1 - a", &(arith.one() - &a) - &eps);
        push("eps < 1 - theta", &(arith.one() - &theta) - &eps);
        push("z0 > 1", w.clone());
        let (u, n) = if er.contains(&eps) {
            let u = compute_u_interval(params, &eps, arith)?;
            let zr = z0_range(params, &a, &eps, arith)?;
            for (name, c) in Z0_CONSTRAINTS.iter().zip(zr.log_candidates.iter()) {
                push(name, &c.expm1() - &w);
            }
            let n = u.recip();
            (u, n)
        } else {
            for name in Z0_CONSTRAINTS {
                push(name, arith.num(f64::NAN));
            }
            (arith.num(f64::NAN), arith.num(f64::NAN))
        };
        let admissible = margins.iter().all(|m| m.holds);
        let z0 = arith.one() + &w;
        Ok(ConstantsBundle {
            a,
            epsilon: eps,
            w,
            z0,
            u,
            n,
            admissible,
            margins,
        })
    }

    /// Bundle from decimal literals for `ε` and `z₀`.
    pub fn from_decimal(params: &SystemParams, epsilon: &str, z0: &str, arith: &Arith) -> Result<Self> {
        let eps = arith.parse(epsilon)?;
        let w = &arith.parse(z0)? - &arith.one();
        ConstantsBundle::assemble(params, &eps, &w, arith)
    }

    /// `ln √z₀`.
    pub fn log_sqrt_z0(&self) -> Interval {
        self.w.log1p().ldexp(-1)
    }

    pub fn require_admissible(&self) -> Result<()> {
        if self.admissible {
            return Ok(());
        }
        let failed: Vec<_> = self
            .margins
            .iter()
            .filter(|m| !m.holds)
            .map(|m| m.constraint.as_str())
            .collect();
        Err(Error::DegenerateBundle(format!("inadmissible bundle: {}", failed.join(", "))))
    }
}
