//! Configurable-precision reals with directed rounding.
//!
//! Every bound formula in this crate is evaluated on [`Interval`]s. In
//! [`Mode::Certified`] each elementary operation rounds its lower end toward
//! −∞ and its upper end toward +∞, and transcendental results are widened by
//! a few units in the last place on top of that. The upper end of a
//! certified evaluation is therefore a valid upper bound for the exact
//! value of the formula at the given inputs. In [`Mode::Nearest`] the two
//! ends coincide and every operation rounds to nearest.
//!
//! [`CertifiedReal`] is the scalar that leaves the engine: a value, the
//! decimal precision it was computed at, and the rounding direction it
//! honors.

use std::cell::RefCell;
use std::cmp::Ordering;
use std::fmt;
use std::ops::{Add, Div, Mul, Neg, Sub};

use astro_float::{BigFloat, Consts, Radix, RoundingMode, INF_NEG, INF_POS, NAN};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Default number of significant decimal digits.
pub const DEFAULT_DIGITS: u32 = 60;

/// Minimum precision accepted for bound evaluation.
pub const MIN_BOUND_DIGITS: u32 = 30;

/// Environment variable overriding [`DEFAULT_DIGITS`].
pub const PRECISION_ENV: &str = "CHAOS_CERTS_PRECISION";

// Extra binary digits carried by transcendental kernels before the final
// rounding, and the relative widening (in ulps) applied to their results.
const GUARD_BITS: usize = 64;
const WIDEN_SHIFT: i32 = 3;

thread_local! {
    static CONSTS: RefCell<Consts> =
        RefCell::new(Consts::new().expect("constants cache"));
}

fn with_consts<R>(f: impl FnOnce(&mut Consts) -> R) -> R {
    CONSTS.with(|cc| f(&mut cc.borrow_mut()))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Rounding {
    Nearest,
    TowardPosInf,
    TowardNegInf,
}

impl Rounding {
    fn mode(self) -> RoundingMode {
        match self {
            Rounding::Nearest => RoundingMode::ToEven,
            Rounding::TowardPosInf => RoundingMode::Up,
            Rounding::TowardNegInf => RoundingMode::Down,
        }
    }
}

/// Working precision in significant decimal digits.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct Precision {
    digits: u32,
}

impl Default for Precision {
    fn default() -> Self {
        Precision {
            digits: DEFAULT_DIGITS,
        }
    }
}

impl Precision {
    pub fn new(digits: u32) -> Result<Self> {
        if digits == 0 || digits > 100_000 {
            return Err(Error::invalid(format!(
                "precision must be in 1..=100000 digits, got {digits}"
            )));
        }
        Ok(Precision { digits })
    }

    /// Reads [`PRECISION_ENV`], falling back to the default.
    pub fn from_env() -> Result<Self> {
        match std::env::var(PRECISION_ENV) {
            Ok(s) => {
                let digits = s
                    .trim()
                    .parse::<u32>()
                    .map_err(|e| Error::parse(PRECISION_ENV, e.to_string()))?;
                Precision::new(digits)
            }
            Err(_) => Ok(Precision::default()),
        }
    }

    pub fn digits(self) -> u32 {
        self.digits
    }

    /// Binary precision: `ceil(digits * log2(10))` plus eight guard bits.
    pub fn bits(self) -> usize {
        (self.digits as f64 * std::f64::consts::LOG2_10).ceil() as usize + 8
    }

    /// Rejects precisions too low for the tiny `z0 - 1` values that appear
    /// in realistic bundles.
    pub fn require_bound_grade(self) -> Result<()> {
        if self.digits < MIN_BOUND_DIGITS {
            return Err(Error::invalid(format!(
                "bound evaluation needs at least {MIN_BOUND_DIGITS} digits, got {}",
                self.digits
            )));
        }
        Ok(())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Mode {
    Nearest,
    Certified,
}

/// Arithmetic context: precision plus evaluation mode. Constructs
/// [`Interval`] leaves.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Arith {
    pub precision: Precision,
    pub mode: Mode,
}

impl Arith {
    pub fn new(precision: Precision, mode: Mode) -> Self {
        Arith { precision, mode }
    }

    pub fn certified(precision: Precision) -> Self {
        Arith::new(precision, Mode::Certified)
    }

    pub fn nearest(precision: Precision) -> Self {
        Arith::new(precision, Mode::Nearest)
    }

    pub fn bits(&self) -> usize {
        self.precision.bits()
    }

    /// Exact conversion of a binary64 value.
    pub fn num(&self, x: f64) -> Interval {
        let v = BigFloat::from_f64(x, self.bits().max(64));
        Interval::from_parts(v.clone(), v, self.bits(), self.mode)
    }

    pub fn int(&self, n: i64) -> Interval {
        let v = BigFloat::from_i64(n, self.bits().max(64));
        Interval::from_parts(v.clone(), v, self.bits(), self.mode)
    }

    pub fn zero(&self) -> Interval {
        self.int(0)
    }

    pub fn one(&self) -> Interval {
        self.int(1)
    }

    /// Parses a decimal literal; in certified mode the result encloses the
    /// exact decimal value.
    pub fn parse(&self, s: &str) -> Result<Interval> {
        let p = self.bits();
        let parse_with = |rm| with_consts(|cc| BigFloat::parse(s.trim(), Radix::Dec, p, rm, cc));
        let check = |v: &BigFloat| {
            if v.is_nan() || v.is_inf() {
                Err(Error::parse("number", format!("`{s}` is not a finite decimal")))
            } else {
                Ok(())
            }
        };
        match self.mode {
            Mode::Nearest => {
                let v = parse_with(RoundingMode::ToEven);
                check(&v)?;
                Ok(Interval::from_parts(v.clone(), v, p, self.mode))
            }
            Mode::Certified => {
                let lo = parse_with(RoundingMode::Down);
                let hi = parse_with(RoundingMode::Up);
                check(&lo)?;
                check(&hi)?;
                Ok(Interval::from_parts(lo, hi, p, self.mode))
            }
        }
    }

    pub fn pi(&self) -> Interval {
        let p = self.bits();
        match self.mode {
            Mode::Nearest => {
                let v = with_consts(|cc| cc.pi(p, RoundingMode::ToEven));
                Interval::from_parts(v.clone(), v, p, self.mode)
            }
            Mode::Certified => {
                let lo = widen_down(with_consts(|cc| cc.pi(p, RoundingMode::Down)), p);
                let hi = widen_up(with_consts(|cc| cc.pi(p, RoundingMode::Up)), p);
                Interval::from_parts(lo, hi, p, self.mode)
            }
        }
    }

    /// Re-expresses an interval (possibly computed in another context) in
    /// this one. Nearest mode collapses to the midpoint.
    pub fn adopt(&self, x: &Interval) -> Interval {
        match self.mode {
            Mode::Certified => Interval::from_parts(x.lo.clone(), x.hi.clone(), self.bits(), self.mode),
            Mode::Nearest => {
                let m = x.mid_big();
                Interval::from_parts(m.clone(), m, self.bits(), self.mode)
            }
        }
    }
}

fn rel_widen(x: &BigFloat, p: usize) -> BigFloat {
    match x.exponent() {
        Some(e) if !x.is_zero() => {
            let mut eps = x.abs();
            eps.set_exponent(e.saturating_sub(p as i32 - WIDEN_SHIFT));
            eps
        }
        _ => BigFloat::from_word(0, 64),
    }
}

fn widen_up(x: BigFloat, p: usize) -> BigFloat {
    if x.is_inf() || x.is_nan() || x.is_zero() {
        return x;
    }
    x.add(&rel_widen(&x, p), p, RoundingMode::Up)
}

fn widen_down(x: BigFloat, p: usize) -> BigFloat {
    if x.is_inf() || x.is_nan() || x.is_zero() {
        return x;
    }
    x.sub(&rel_widen(&x, p), p, RoundingMode::Down)
}

fn big_min(a: BigFloat, b: BigFloat) -> BigFloat {
    if a.is_nan() || b.is_nan() {
        return NAN;
    }
    match a.cmp(&b) {
        Some(c) if c <= 0 => a,
        _ => b,
    }
}

fn big_max(a: BigFloat, b: BigFloat) -> BigFloat {
    if a.is_nan() || b.is_nan() {
        return NAN;
    }
    match a.cmp(&b) {
        Some(c) if c >= 0 => a,
        _ => b,
    }
}

fn big_cmp(a: &BigFloat, b: &BigFloat) -> Option<Ordering> {
    a.cmp(b).map(|c| c.cmp(&0))
}

fn big_to_f64(x: &BigFloat) -> f64 {
    if x.is_nan() {
        return f64::NAN;
    }
    if x.is_inf_pos() {
        return f64::INFINITY;
    }
    if x.is_inf_neg() {
        return f64::NEG_INFINITY;
    }
    if x.is_zero() {
        return 0.0;
    }
    let mut r = x.clone();
    // 80 bits is enough for a correctly rounded decimal round trip.
    let _ = r.set_precision(128, RoundingMode::ToEven);
    r.to_string().parse::<f64>().unwrap_or(f64::NAN)
}

/// Decimal scientific rendering with `digits` significant digits, rounded
/// in the given direction.
fn big_to_sci(x: &BigFloat, digits: usize, rm: RoundingMode) -> String {
    if x.is_nan() {
        return "NaN".into();
    }
    if x.is_inf_pos() {
        return "inf".into();
    }
    if x.is_inf_neg() {
        return "-inf".into();
    }
    if x.is_zero() {
        return "0".into();
    }
    let s = x.to_string();
    let negative = s.starts_with('-');
    let body = s.trim_start_matches('-');
    let (mant, exp) = match body.split_once('e') {
        Some((m, e)) => (m, e.parse::<i64>().unwrap_or(0)),
        None => (body, 0),
    };
    let (int_part, frac_part) = mant.split_once('.').unwrap_or((mant, ""));
    let all: Vec<u8> = int_part
        .bytes()
        .chain(frac_part.bytes())
        .map(|b| b - b'0')
        .collect();
    let lead = all.iter().position(|&d| d != 0).unwrap_or(0);
    let mut exp10 = exp + int_part.len() as i64 - 1 - lead as i64;
    let sig = &all[lead..];
    let mut kept: Vec<u8> = sig.iter().take(digits).copied().collect();
    while kept.len() < digits {
        kept.push(0);
    }
    let rest = if sig.len() > digits { &sig[digits..] } else { &[][..] };
    let rest_nonzero = rest.iter().any(|&d| d != 0);
    let away = match rm {
        RoundingMode::Up => rest_nonzero && !negative,
        RoundingMode::Down => rest_nonzero && negative,
        _ => rest.first().is_some_and(|&d| d >= 5),
    };
    if away {
        let mut i = kept.len();
        loop {
            if i == 0 {
                kept.insert(0, 1);
                kept.pop();
                exp10 += 1;
                break;
            }
            i -= 1;
            if kept[i] == 9 {
                kept[i] = 0;
            } else {
                kept[i] += 1;
                break;
            }
        }
    }
    let mut out = String::new();
    if negative {
        out.push('-');
    }
    out.push((b'0' + kept[0]) as char);
    if kept.len() > 1 {
        out.push('.');
        for d in &kept[1..] {
            out.push((b'0' + d) as char);
        }
    }
    out.push_str(&format!("e{exp10}"));
    out
}

/// A closed enclosure `[lo, hi]` of a real number. In nearest mode the
/// ends are equal and carry the round-to-nearest evaluation.
#[derive(Clone, Debug)]
pub struct Interval {
    lo: BigFloat,
    hi: BigFloat,
    bits: usize,
    mode: Mode,
}

impl Interval {
    fn from_parts(lo: BigFloat, hi: BigFloat, bits: usize, mode: Mode) -> Self {
        Interval { lo, hi, bits, mode }
    }

    fn point(v: BigFloat, bits: usize, mode: Mode) -> Self {
        Interval::from_parts(v.clone(), v, bits, mode)
    }

    fn join_ctx(&self, other: &Interval) -> (usize, Mode) {
        let mode = if self.mode == Mode::Certified || other.mode == Mode::Certified {
            Mode::Certified
        } else {
            Mode::Nearest
        };
        (self.bits.max(other.bits), mode)
    }

    pub fn mode(&self) -> Mode {
        self.mode
    }

    pub fn bits(&self) -> usize {
        self.bits
    }

    pub fn lo(&self) -> &BigFloat {
        &self.lo
    }

    pub fn hi(&self) -> &BigFloat {
        &self.hi
    }

    pub fn lo_f64(&self) -> f64 {
        big_to_f64(&self.lo)
    }

    pub fn hi_f64(&self) -> f64 {
        big_to_f64(&self.hi)
    }

    pub fn mid_f64(&self) -> f64 {
        big_to_f64(&self.mid_big())
    }

    fn mid_big(&self) -> BigFloat {
        if self.mode == Mode::Nearest {
            return self.lo.clone();
        }
        let s = self.lo.add(&self.hi, self.bits, RoundingMode::ToEven);
        s.div(&BigFloat::from_word(2, 64), self.bits, RoundingMode::ToEven)
    }

    pub fn is_finite(&self) -> bool {
        !(self.lo.is_nan() || self.hi.is_nan() || self.lo.is_inf() || self.hi.is_inf())
    }

    /// Relative width `(hi - lo) / |mid|`, zero for points.
    pub fn rel_width(&self) -> f64 {
        if self.mode == Mode::Nearest {
            return 0.0;
        }
        let w = self.hi.sub(&self.lo, self.bits, RoundingMode::Up);
        let m = self.mid_big().abs();
        if m.is_zero() {
            return big_to_f64(&w);
        }
        big_to_f64(&w.div(&m, self.bits, RoundingMode::Up))
    }

    /// `true` when every point of `self` is strictly below every point of
    /// `other`.
    pub fn certainly_lt(&self, other: &Interval) -> bool {
        matches!(big_cmp(&self.hi, &other.lo), Some(Ordering::Less))
    }

    pub fn certainly_le(&self, other: &Interval) -> bool {
        matches!(big_cmp(&self.hi, &other.lo), Some(Ordering::Less | Ordering::Equal))
    }

    pub fn certainly_positive(&self) -> bool {
        self.lo.is_positive() && !self.lo.is_zero()
    }

    pub fn certainly_negative(&self) -> bool {
        self.hi.is_negative() && !self.hi.is_zero()
    }

    pub fn is_zero(&self) -> bool {
        self.lo.is_zero() && self.hi.is_zero()
    }

    /// The point `[lo, lo]`: a value certainly not above `self`.
    pub fn lower_point(&self) -> Interval {
        Interval::point(self.lo.clone(), self.bits, self.mode)
    }

    /// The point `[hi, hi]`.
    pub fn upper_point(&self) -> Interval {
        Interval::point(self.hi.clone(), self.bits, self.mode)
    }

    /// Upper end as an outward-rounded scalar.
    pub fn upper(&self) -> CertifiedReal {
        CertifiedReal::from_interval_end(self, true)
    }

    /// Lower end as an outward-rounded scalar.
    pub fn lower(&self) -> CertifiedReal {
        CertifiedReal::from_interval_end(self, false)
    }

    fn rm_lo(mode: Mode) -> RoundingMode {
        match mode {
            Mode::Certified => RoundingMode::Down,
            Mode::Nearest => RoundingMode::ToEven,
        }
    }

    fn rm_hi(mode: Mode) -> RoundingMode {
        match mode {
            Mode::Certified => RoundingMode::Up,
            Mode::Nearest => RoundingMode::ToEven,
        }
    }

    /// Applies an increasing function, computed by `f(x, precision, rm)`,
    /// to both ends; certified results are widened.
    fn monotone_inc(&self, f: impl Fn(&BigFloat, usize, RoundingMode) -> BigFloat) -> Interval {
        let p = self.bits;
        match self.mode {
            Mode::Nearest => Interval::point(f(&self.lo, p, RoundingMode::ToEven), p, self.mode),
            Mode::Certified => {
                // Kernels are exact at a zero argument, so no widening there.
                let lo = f(&self.lo, p, RoundingMode::Down);
                let lo = if self.lo.is_zero() { lo } else { widen_down(lo, p) };
                let hi = f(&self.hi, p, RoundingMode::Up);
                let hi = if self.hi.is_zero() { hi } else { widen_up(hi, p) };
                Interval::from_parts(lo, hi, p, self.mode)
            }
        }
    }

    pub fn exp(&self) -> Interval {
        self.monotone_inc(|x, p, rm| {
            if x.is_zero() {
                return BigFloat::from_word(1, 64);
            }
            with_consts(|cc| x.exp(p + GUARD_BITS, rm, cc)).round_to(p, rm)
        })
    }

    /// Natural logarithm; NaN ends when the enclosure reaches zero or below.
    pub fn ln(&self) -> Interval {
        self.monotone_inc(|x, p, rm| {
            if x.is_negative() || x.is_zero() {
                return NAN;
            }
            with_consts(|cc| x.ln(p + GUARD_BITS, rm, cc)).round_to(p, rm)
        })
    }

    /// `ln(1 + x)` with relative accuracy for tiny `x`: `1 + x` is formed
    /// exactly before the logarithm.
    pub fn log1p(&self) -> Interval {
        self.monotone_inc(|x, p, rm| {
            if x.is_zero() {
                return x.clone();
            }
            let y = x.add_full_prec(&BigFloat::from_word(1, 64));
            if y.is_negative() || y.is_zero() {
                return NAN;
            }
            with_consts(|cc| y.ln(p + GUARD_BITS, rm, cc)).round_to(p, rm)
        })
    }

    /// `exp(x) - 1` with relative accuracy for tiny `x`.
    pub fn expm1(&self) -> Interval {
        self.monotone_inc(|x, p, rm| {
            if x.is_zero() {
                return x.clone();
            }
            let extra = match x.exponent() {
                Some(e) if e < 0 => (-e) as usize,
                _ => 0,
            };
            let wp = p + GUARD_BITS + extra;
            let e = with_consts(|cc| x.exp(wp, rm, cc));
            e.sub_full_prec(&BigFloat::from_word(1, 64)).round_to(p, rm)
        })
    }

    pub fn sqrt(&self) -> Interval {
        self.monotone_inc(|x, p, rm| {
            if x.is_negative() && !x.is_zero() {
                return NAN;
            }
            x.sqrt(p + GUARD_BITS, rm).round_to(p, rm)
        })
    }

    /// Cosine. The enclosure uses `|cos'| <= 1` around the midpoint.
    pub fn cos(&self) -> Interval {
        let p = self.bits;
        let m = self.mid_big();
        let c = with_consts(|cc| m.cos(p + GUARD_BITS, RoundingMode::ToEven, cc));
        match self.mode {
            Mode::Nearest => Interval::point(c.round_to(p, RoundingMode::ToEven), p, self.mode),
            Mode::Certified => {
                let width = self.hi.sub(&self.lo, p, RoundingMode::Up);
                let mut ulp = BigFloat::from_word(1, 64);
                ulp.set_exponent(-(p as i32) + 1);
                let slack = width.add(&ulp, p, RoundingMode::Up);
                let one = BigFloat::from_word(1, 64);
                let lo = big_max(c.sub(&slack, p, RoundingMode::Down), BigFloat::neg(&one));
                let hi = big_min(c.add(&slack, p, RoundingMode::Up), one);
                Interval::from_parts(lo, hi, p, self.mode)
            }
        }
    }

    /// Exact binary64 constant in the context of `self`.
    pub fn like(&self, x: f64) -> Interval {
        let v = BigFloat::from_f64(x, self.bits.max(64));
        Interval::point(v, self.bits, self.mode)
    }

    /// Exact scaling by `2^k`.
    pub fn ldexp(&self, k: i32) -> Interval {
        let scale = |x: &BigFloat| {
            let mut y = x.clone();
            if let Some(e) = y.exponent() {
                if !y.is_zero() {
                    y.set_exponent(e + k);
                }
            }
            y
        };
        Interval::from_parts(scale(&self.lo), scale(&self.hi), self.bits, self.mode)
    }

    pub fn abs(&self) -> Interval {
        if self.lo.is_positive() || self.lo.is_zero() {
            return self.clone();
        }
        if self.hi.is_negative() && !self.hi.is_zero() {
            return -self;
        }
        let hi = big_max(self.lo.abs(), self.hi.abs());
        Interval::from_parts(BigFloat::from_word(0, 64), hi, self.bits, self.mode)
    }

    pub fn square(&self) -> Interval {
        let a = self.abs();
        &a * &a
    }

    /// Integer power by repeated squaring of enclosures.
    pub fn powi(&self, n: i32) -> Interval {
        let mut base = if n < 0 { self.recip() } else { self.clone() };
        let mut k = n.unsigned_abs();
        let mut acc = Interval::point(BigFloat::from_word(1, 64), self.bits, self.mode);
        while k > 0 {
            if k & 1 == 1 {
                acc = &acc * &base;
            }
            k >>= 1;
            if k > 0 {
                base = base.square();
            }
        }
        acc
    }

    /// `self^y` for a positive base, as `exp(y ln self)`.
    pub fn pow(&self, y: &Interval) -> Interval {
        (y * &self.ln()).exp()
    }

    pub fn recip(&self) -> Interval {
        let one = Interval::point(BigFloat::from_word(1, 64), self.bits, self.mode);
        &one / self
    }

    pub fn min(&self, other: &Interval) -> Interval {
        let (p, mode) = self.join_ctx(other);
        Interval::from_parts(
            big_min(self.lo.clone(), other.lo.clone()),
            big_min(self.hi.clone(), other.hi.clone()),
            p,
            mode,
        )
    }

    pub fn max(&self, other: &Interval) -> Interval {
        let (p, mode) = self.join_ctx(other);
        Interval::from_parts(
            big_max(self.lo.clone(), other.lo.clone()),
            big_max(self.hi.clone(), other.hi.clone()),
            p,
            mode,
        )
    }

    /// Scientific rendering of the midpoint (nearest) with `digits`
    /// significant digits.
    pub fn to_sci(&self, digits: usize) -> String {
        big_to_sci(&self.mid_big(), digits, RoundingMode::ToEven)
    }
}

trait RoundTo {
    fn round_to(self, p: usize, rm: RoundingMode) -> BigFloat;
}

impl RoundTo for BigFloat {
    fn round_to(mut self, p: usize, rm: RoundingMode) -> BigFloat {
        if self.is_nan() || self.is_inf() {
            return self;
        }
        let _ = self.set_precision(p, rm);
        self
    }
}

impl Neg for &Interval {
    type Output = Interval;
    fn neg(self) -> Interval {
        Interval::from_parts(BigFloat::neg(&self.hi), BigFloat::neg(&self.lo), self.bits, self.mode)
    }
}

impl Neg for Interval {
    type Output = Interval;
    fn neg(self) -> Interval {
        -&self
    }
}

impl Add for &Interval {
    type Output = Interval;
    fn add(self, rhs: &Interval) -> Interval {
        let (p, mode) = self.join_ctx(rhs);
        if mode == Mode::Nearest {
            return Interval::point(self.lo.add(&rhs.lo, p, RoundingMode::ToEven), p, mode);
        }
        Interval::from_parts(
            self.lo.add(&rhs.lo, p, RoundingMode::Down),
            self.hi.add(&rhs.hi, p, RoundingMode::Up),
            p,
            mode,
        )
    }
}

impl Sub for &Interval {
    type Output = Interval;
    fn sub(self, rhs: &Interval) -> Interval {
        let (p, mode) = self.join_ctx(rhs);
        if mode == Mode::Nearest {
            return Interval::point(self.lo.sub(&rhs.lo, p, RoundingMode::ToEven), p, mode);
        }
        Interval::from_parts(
            self.lo.sub(&rhs.hi, p, RoundingMode::Down),
            self.hi.sub(&rhs.lo, p, RoundingMode::Up),
            p,
            mode,
        )
    }
}

impl Mul for &Interval {
    type Output = Interval;
    fn mul(self, rhs: &Interval) -> Interval {
        let (p, mode) = self.join_ctx(rhs);
        if mode == Mode::Nearest {
            return Interval::point(self.lo.mul(&rhs.lo, p, RoundingMode::ToEven), p, mode);
        }
        let ends = [
            (&self.lo, &rhs.lo),
            (&self.lo, &rhs.hi),
            (&self.hi, &rhs.lo),
            (&self.hi, &rhs.hi),
        ];
        let mut lo = INF_POS;
        let mut hi = INF_NEG;
        for (x, y) in ends {
            lo = big_min(lo, x.mul(y, p, Interval::rm_lo(mode)));
            hi = big_max(hi, x.mul(y, p, Interval::rm_hi(mode)));
        }
        Interval::from_parts(lo, hi, p, mode)
    }
}

impl Div for &Interval {
    type Output = Interval;
    fn div(self, rhs: &Interval) -> Interval {
        let (p, mode) = self.join_ctx(rhs);
        if mode == Mode::Nearest {
            if rhs.lo.is_zero() {
                return Interval::point(NAN, p, mode);
            }
            return Interval::point(self.lo.div(&rhs.lo, p, RoundingMode::ToEven), p, mode);
        }
        let straddles = !(rhs.certainly_positive() || rhs.certainly_negative());
        if straddles {
            return Interval::from_parts(INF_NEG, INF_POS, p, mode);
        }
        let ends = [
            (&self.lo, &rhs.lo),
            (&self.lo, &rhs.hi),
            (&self.hi, &rhs.lo),
            (&self.hi, &rhs.hi),
        ];
        let mut lo = INF_POS;
        let mut hi = INF_NEG;
        for (x, y) in ends {
            lo = big_min(lo, x.div(y, p, RoundingMode::Down));
            hi = big_max(hi, x.div(y, p, RoundingMode::Up));
        }
        Interval::from_parts(lo, hi, p, mode)
    }
}

macro_rules! forward_owned {
    ($($tr:ident $f:ident),*) => {$(
        impl $tr for Interval {
            type Output = Interval;
            fn $f(self, rhs: Interval) -> Interval { (&self).$f(&rhs) }
        }
        impl $tr<&Interval> for Interval {
            type Output = Interval;
            fn $f(self, rhs: &Interval) -> Interval { (&self).$f(rhs) }
        }
        impl $tr<Interval> for &Interval {
            type Output = Interval;
            fn $f(self, rhs: Interval) -> Interval { self.$f(&rhs) }
        }
    )*};
}

forward_owned!(Add add, Sub sub, Mul mul, Div div);

impl fmt::Display for Interval {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.mode {
            Mode::Nearest => write!(f, "{}", self.to_sci(25)),
            Mode::Certified => write!(
                f,
                "[{}, {}]",
                big_to_sci(&self.lo, 25, RoundingMode::Down),
                big_to_sci(&self.hi, 25, RoundingMode::Up)
            ),
        }
    }
}

/// A scalar carrying its precision and the direction it was rounded in.
#[derive(Clone, Debug)]
pub struct CertifiedReal {
    value: BigFloat,
    precision: Precision,
    rounding: Rounding,
}

impl CertifiedReal {
    pub fn new(value: BigFloat, precision: Precision, rounding: Rounding) -> Self {
        CertifiedReal {
            value,
            precision,
            rounding,
        }
    }

    pub fn from_f64(x: f64, precision: Precision, rounding: Rounding) -> Self {
        CertifiedReal::new(BigFloat::from_f64(x, precision.bits().max(64)), precision, rounding)
    }

    /// Parses a decimal literal rounded in the requested direction.
    pub fn parse(s: &str, precision: Precision, rounding: Rounding) -> Result<Self> {
        let v = with_consts(|cc| {
            BigFloat::parse(s.trim(), Radix::Dec, precision.bits(), rounding.mode(), cc)
        });
        if v.is_nan() || v.is_inf() {
            return Err(Error::parse("number", format!("`{s}` is not a finite decimal")));
        }
        Ok(CertifiedReal::new(v, precision, rounding))
    }

    fn from_interval_end(x: &Interval, upper: bool) -> Self {
        let digits = ((x.bits.saturating_sub(8)) as f64 / std::f64::consts::LOG2_10).floor() as u32;
        let precision = Precision {
            digits: digits.max(1),
        };
        match (x.mode, upper) {
            (Mode::Nearest, _) => CertifiedReal::new(x.lo.clone(), precision, Rounding::Nearest),
            (Mode::Certified, true) => CertifiedReal::new(x.hi.clone(), precision, Rounding::TowardPosInf),
            (Mode::Certified, false) => CertifiedReal::new(x.lo.clone(), precision, Rounding::TowardNegInf),
        }
    }

    pub fn value(&self) -> &BigFloat {
        &self.value
    }

    pub fn precision(&self) -> Precision {
        self.precision
    }

    pub fn rounding(&self) -> Rounding {
        self.rounding
    }

    pub fn to_f64(&self) -> f64 {
        big_to_f64(&self.value)
    }

    pub fn is_finite(&self) -> bool {
        !(self.value.is_nan() || self.value.is_inf())
    }

    /// Scientific rendering that keeps the rounding direction: an upper
    /// bound prints rounded up.
    pub fn to_sci(&self, digits: usize) -> String {
        big_to_sci(&self.value, digits, self.rounding.mode())
    }

    /// Relative difference `|self - other| / |other|`.
    pub fn rel_diff(&self, other: &CertifiedReal) -> f64 {
        let p = self.precision.bits().max(other.precision.bits()) + 64;
        let d = self.value.sub(&other.value, p, RoundingMode::ToEven).abs();
        if other.value.is_zero() {
            return big_to_f64(&d);
        }
        big_to_f64(&d.div(&other.value.abs(), p, RoundingMode::ToEven))
    }

    pub fn partial_cmp_value(&self, other: &CertifiedReal) -> Option<Ordering> {
        big_cmp(&self.value, &other.value)
    }

    fn as_point(&self) -> Interval {
        let mode = match self.rounding {
            Rounding::Nearest => Mode::Nearest,
            _ => Mode::Certified,
        };
        Interval::point(self.value.clone(), self.precision.bits(), mode)
    }

    fn finish(&self, r: Interval) -> CertifiedReal {
        let v = match self.rounding {
            Rounding::TowardNegInf => r.lo,
            _ => r.hi,
        };
        CertifiedReal::new(v, self.precision, self.rounding)
    }
}

impl fmt::Display for CertifiedReal {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.to_sci(self.precision.digits() as usize))
    }
}

/// `ln(1 + x)`, rounded in the direction carried by `x`.
pub fn eval_log1p(x: &CertifiedReal) -> Result<CertifiedReal> {
    let minus_one = BigFloat::from_i64(-1, 64);
    if matches!(big_cmp(&x.value, &minus_one), Some(Ordering::Less | Ordering::Equal)) || x.value.is_nan() {
        return Err(Error::invalid("log1p requires x > -1"));
    }
    Ok(x.finish(x.as_point().log1p()))
}

/// `exp(x) - 1`, rounded in the direction carried by `x`.
pub fn eval_expm1(x: &CertifiedReal) -> Result<CertifiedReal> {
    if !x.is_finite() {
        return Err(Error::invalid("expm1 requires a finite argument"));
    }
    Ok(x.finish(x.as_point().expm1()))
}

/// `x^y` for `x > 0`, rounded in the direction carried by `x`.
pub fn eval_pow(x: &CertifiedReal, y: &CertifiedReal) -> Result<CertifiedReal> {
    if !x.value.is_positive() || x.value.is_zero() || !x.is_finite() || !y.is_finite() {
        return Err(Error::invalid("pow requires a finite positive base and finite exponent"));
    }
    let base = x.as_point();
    let expo = Interval::point(y.value.clone(), y.precision.bits(), base.mode);
    Ok(x.finish(base.pow(&expo)))
}
