//! Independent reference arithmetic for the integration tests: decimal fixed
//! point on big integers with 250 fractional digits. Deliberately shares no
//! code with the library's floating-point layer.

#![allow(dead_code)]

use std::ops::{Add, Div, Mul, Neg, Sub};

use num_bigint::BigInt;
use num_traits::{Signed, Zero};

const DIGITS: u32 = 250;

fn scale() -> BigInt {
    BigInt::from(10u32).pow(DIGITS)
}

#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord)]
pub struct Fx(BigInt);

impl Fx {
    pub fn int(n: i64) -> Fx {
        Fx(BigInt::from(n) * scale())
    }

    /// Parses `[-]digits[.digits][e[-]digits]`.
    pub fn dec(s: &str) -> Fx {
        let (mant, exp) = match s.find(['e', 'E']) {
            Some(i) => (&s[..i], s[i + 1..].parse::<i32>().unwrap()),
            None => (s, 0),
        };
        let neg = mant.starts_with('-');
        let mant = mant.trim_start_matches('-');
        let (ip, fp) = mant.split_once('.').unwrap_or((mant, ""));
        let digits: BigInt = format!("{ip}{fp}").parse().unwrap();
        let shift = DIGITS as i32 + exp - fp.len() as i32;
        let v = if shift >= 0 {
            digits * BigInt::from(10u32).pow(shift as u32)
        } else {
            digits / BigInt::from(10u32).pow((-shift) as u32)
        };
        Fx(if neg { -v } else { v })
    }

    /// Exact binary64 value (truncated to the fixed-point grid).
    pub fn f64(x: f64) -> Fx {
        assert!(x.is_finite());
        let bits = x.to_bits();
        let exp = ((bits >> 52) & 0x7ff) as i64;
        let frac = bits & ((1u64 << 52) - 1);
        let (mant, e) = if exp == 0 { (frac, -1074) } else { (frac | (1u64 << 52), exp - 1075) };
        let v = BigInt::from(mant) * scale();
        let v = if e >= 0 { v << e as usize } else { v >> (-e) as usize };
        Fx(if x < 0.0 { -v } else { v })
    }

    pub fn zero() -> Fx {
        Fx(BigInt::zero())
    }

    pub fn one() -> Fx {
        Fx(scale())
    }

    pub fn is_negative(&self) -> bool {
        self.0.is_negative()
    }

    pub fn abs(&self) -> Fx {
        Fx(self.0.abs())
    }

    pub fn half(&self) -> Fx {
        Fx(&self.0 / 2)
    }

    pub fn powi(&self, n: u32) -> Fx {
        let mut out = Fx::one();
        for _ in 0..n {
            out = &out * self;
        }
        out
    }

    pub fn sqrt(&self) -> Fx {
        assert!(!self.is_negative());
        Fx((&self.0 * scale()).sqrt())
    }

    /// Decimal rendering with `sig` significant digits (truncated).
    pub fn sci(&self, sig: usize) -> String {
        let s = self.0.abs().to_string();
        let neg = if self.0.is_negative() { "-" } else { "" };
        let exp = s.len() as i64 - 1 - DIGITS as i64;
        let body = &s[..sig.min(s.len())];
        format!("{neg}{}.{}e{exp}", &body[..1], &body[1..])
    }

    pub fn to_f64(&self) -> f64 {
        if self.0.is_zero() {
            return 0.0;
        }
        self.sci(30).parse().unwrap()
    }

    /// `|self - other| / |other|`.
    pub fn rel_diff(&self, other: &Fx) -> f64 {
        let d = (self - other).abs();
        (&d / &other.abs()).to_f64()
    }

    /// `Σ x^(2k+1)/(2k+1)`, for `|x| ≤ 1/2`.
    fn atanh_small(x: &Fx) -> Fx {
        let x2 = x * x;
        let mut term = x.clone();
        let mut sum = Fx::zero();
        let mut k = 1i64;
        while !term.0.is_zero() {
            sum = &sum + &Fx(&term.0 / k);
            term = &term * &x2;
            k += 2;
        }
        sum
    }

    pub fn ln2() -> Fx {
        let third = &Fx::one() / &Fx::int(3);
        let a = Fx::atanh_small(&third);
        &a + &a
    }

    pub fn ln(&self) -> Fx {
        assert!(self.0.is_positive(), "ln of non-positive");
        // self = m 2^k with m in [1, 2)
        let k = self.0.bits() as i64 - scale().bits() as i64;
        let m = if k >= 0 {
            Fx(&self.0 >> k as usize)
        } else {
            Fx(&self.0 << (-k) as usize)
        };
        let (m, k) = if m < Fx::one() { (Fx(&m.0 << 1usize), k - 1) } else { (m, k) };
        let one = Fx::one();
        let r = &(&m - &one) / &(&m + &one);
        let a = Fx::atanh_small(&r);
        &(&a + &a) + &(&Fx::int(k) * &Fx::ln2())
    }

    /// `ln(1 + x)` without forming `1 + x` first, for small `|x|`.
    pub fn log1p(&self) -> Fx {
        if self.abs() > Fx::dec("0.5") {
            return (&Fx::one() + self).ln();
        }
        let r = self / &(&Fx::int(2) + self);
        let a = Fx::atanh_small(&r);
        &a + &a
    }

    pub fn exp(&self) -> Fx {
        // exp(x) = exp(x / 2^h)^(2^h), with |x / 2^h| < 2^-30
        let mut h = 0u32;
        let mut y = self.clone();
        let small = Fx::dec("1e-9");
        while y.abs() > small {
            y = y.half();
            h += 1;
        }
        let mut term = Fx::one();
        let mut sum = Fx::zero();
        let mut k = 1i64;
        while !term.0.is_zero() {
            sum = &sum + &term;
            term = &(&term * &y) / &Fx::int(k);
            k += 1;
        }
        for _ in 0..h {
            sum = &sum * &sum;
        }
        sum
    }

    pub fn expm1(&self) -> Fx {
        if self.abs() > Fx::dec("0.5") {
            return &self.exp() - &Fx::one();
        }
        let mut term = self.clone();
        let mut sum = Fx::zero();
        let mut k = 2i64;
        while !term.0.is_zero() {
            sum = &sum + &term;
            term = &(&term * self) / &Fx::int(k);
            k += 1;
        }
        sum
    }

    pub fn pow(&self, y: &Fx) -> Fx {
        (y * &self.ln()).exp()
    }

    fn atan_inv(n: i64) -> Fx {
        // atan(1/n) = Σ (-1)^k / ((2k+1) n^(2k+1))
        let n2 = BigInt::from(n * n);
        let mut term = Fx(scale() / n);
        let mut sum = Fx::zero();
        let mut k = 0i64;
        while !term.0.is_zero() {
            let t = Fx(&term.0 / (2 * k + 1));
            sum = if k % 2 == 0 { &sum + &t } else { &sum - &t };
            term = Fx(&term.0 / &n2);
            k += 1;
        }
        sum
    }

    pub fn pi() -> Fx {
        &(&Fx::int(16) * &Fx::atan_inv(5)) - &(&Fx::int(4) * &Fx::atan_inv(239))
    }

    pub fn cos(&self) -> Fx {
        let two_pi = &Fx::pi() * &Fx::int(2);
        let k = (self / &two_pi).0 / scale();
        let x = self - &(&Fx(k * scale()) * &two_pi);
        let x2 = &x * &x;
        let mut term = Fx::one();
        let mut sum = Fx::zero();
        let mut k = 0i64;
        while !term.0.is_zero() {
            sum = &sum + &term;
            term = -&(&term * &x2) / Fx::int((2 * k + 1) * (2 * k + 2));
            k += 1;
        }
        sum
    }

    pub fn min(self, other: Fx) -> Fx {
        if self < other {
            self
        } else {
            other
        }
    }
}

impl Add for &Fx {
    type Output = Fx;
    fn add(self, o: &Fx) -> Fx {
        Fx(&self.0 + &o.0)
    }
}

impl Sub for &Fx {
    type Output = Fx;
    fn sub(self, o: &Fx) -> Fx {
        Fx(&self.0 - &o.0)
    }
}

impl Mul for &Fx {
    type Output = Fx;
    fn mul(self, o: &Fx) -> Fx {
        Fx(&self.0 * &o.0 / scale())
    }
}

impl Div for &Fx {
    type Output = Fx;
    fn div(self, o: &Fx) -> Fx {
        Fx(&self.0 * scale() / &o.0)
    }
}

impl Div<Fx> for Fx {
    type Output = Fx;
    fn div(self, o: Fx) -> Fx {
        &self / &o
    }
}

impl Neg for &Fx {
    type Output = Fx;
    fn neg(self) -> Fx {
        Fx(-&self.0)
    }
}

impl Neg for Fx {
    type Output = Fx;
    fn neg(self) -> Fx {
        Fx(-self.0)
    }
}

/// Reference evaluation of the constants and the four bounds.
pub struct Reference {
    pub theta: Fx,
    pub phi_p: Fx,
    pub phi: Fx,
    pub a: Fx,
    pub eps: Fx,
    pub z0: Fx,
    pub u_exp: Fx,
    /// `ln √z₀`
    pub l: Fx,
    /// `1 - z₀^{-1/2}`
    pub q: Fx,
    /// `1 - a - ε`
    pub d: Fx,
}

impl Reference {
    pub fn new(theta: Fx, phi_p: Fx, phi: Fx, eps: Fx, z0: Fx) -> Reference {
        let one = Fx::one();
        let a = -(-&(&phi_p / &(&one - &theta))).expm1();
        let u_exp = Reference::u_of(&theta, &phi_p, &eps);
        let l = (&z0 - &one).log1p().half();
        let q = -(-&l).expm1();
        let d = &(&one - &a) - &eps;
        Reference {
            theta,
            phi_p,
            phi,
            a,
            eps,
            z0,
            u_exp,
            l,
            q,
            d,
        }
    }

    pub fn u_of(theta: &Fx, phi_p: &Fx, eps: &Fx) -> Fx {
        let one = Fx::one();
        let num = (&one - eps).ln();
        let inner = &(theta * eps) * &(&(&one - eps) - theta);
        let den = &inner.ln() - &(&Fx::int(2) * phi_p).ln();
        &num / &den
    }

    /// `Z - 1` and the four candidate values minus one.
    pub fn z_minus_one(&self) -> (Fx, [Fx; 4]) {
        let one = Fx::one();
        let c1 = (&self.u_exp * &(&self.eps / &(&Fx::int(2) * &self.a)).log1p()).expm1();
        let c2 = &self.eps / &self.theta;
        let c3 = &(&(&one - &self.eps) / &self.theta) - &one;
        let c4 = &Fx::int(2).exp() - &one;
        let z = c1.clone().min(c2.clone()).min(c3.clone()).min(c4.clone());
        (z, [c1, c2, c3, c4])
    }

    fn qdl(&self) -> Fx {
        &(&self.q * &self.d) * &self.l
    }

    pub fn correlation(&self, n: u64) -> Fx {
        let decay = (-&(&Fx::int(n as i64) * &self.l)).exp();
        &(&self.phi * &decay) / &(&self.l * &self.d)
    }

    pub fn clt_leading_coefficient(&self) -> Fx {
        &Fx::int(6922) / &self.qdl().powi(4)
    }

    pub fn clt_error(&self, t: &Fx, n: u64) -> Fx {
        let one = Fx::one();
        let nn = Fx::int(n as i64);
        let t2 = t * t;
        let phi2 = &self.phi * &self.phi;
        let n01 = nn.pow(&Fx::dec("0.1"));
        let n02 = nn.pow(&Fx::dec("0.2"));
        let first = &(&t2 * &t2) * &(&phi2 * &phi2) / (&n01 * &self.qdl().powi(4));
        let second = &(&t2 * &(-&(&nn * &self.l)).exp()) * &phi2 / self.qdl();
        let omt = &one - &self.theta;
        let distortion = (&(&Fx::int(2) * &self.phi_p) * &(&self.theta / &omt)).exp();
        let third_num = &(&(&(&t2 * &nn.powi(3)) * &phi2) * &(&distortion * &(&self.phi_p * &self.phi_p)))
            * &(-&(&n02 * &self.l)).exp();
        let third = third_num / (&(&(&omt * &omt) * &self.d) * &self.l);
        &(&Fx::int(6922) * &(&first + &second)) + &(&Fx::int(64) * &third)
    }

    pub fn ldp_coefficients(&self) -> (Fx, Fx) {
        let k1 = &self.qdl() / &(&Fx::int(36) * &self.l.exp());
        let k2 = &(&self.qdl() * &self.qdl()) / &Fx::int(72);
        (k1, k2)
    }

    pub fn ldp(&self, u: &Fx, n: u64) -> Fx {
        let (k1, k2) = self.ldp_coefficients();
        let lin = &(u * &k1) / &self.phi;
        let quad = &(&(&(u * u) * &Fx::int(n as i64)) * &k2) / &(&self.phi * &self.phi);
        &Fx::int(2) * &(&lin - &quad).exp()
    }
}

#[test]
fn oracle_self_checks() {
    let e = Fx::one().exp();
    assert!(e.sci(30).starts_with("2.71828182845904523536028747135"));
    assert!(Fx::ln2().sci(30).starts_with("6.93147180559945309417232121458"));
    assert!(Fx::pi().sci(30).starts_with("3.14159265358979323846264338327"));
    assert!(Fx::int(10).ln().sci(20).starts_with("2.3025850929940456840"));
    let x = Fx::dec("0.3");
    assert!(x.exp().ln().rel_diff(&x) < 1e-200);
    assert!(Fx::dec("1e-12").log1p().expm1().rel_diff(&Fx::dec("1e-12")) < 1e-200);
    assert!(Fx::dec("2.0943951023931954923").cos().rel_diff(&Fx::dec("-0.5")) < 1e-18);
}
