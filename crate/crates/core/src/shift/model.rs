//! Finite-alphabet shifts with locally constant potentials, and cylinder
//! functions.
//!
//! A word `x₀ x₁ … x_{L-1}` over `{0, …, k-1}` is indexed as the base-`k`
//! number with `x₀` most significant. A function of depth `r` depends on
//! `x₀ … x_r` and is stored as a table over the `k^{r+1}` words.

use std::collections::BTreeMap;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::constants::SystemParams;
use crate::error::{Error, Result};

pub(crate) fn pow_k(k: usize, e: usize) -> usize {
    k.checked_pow(e as u32).expect("word space too large")
}

/// Symbols of the word with index `idx` and length `len`.
pub fn decode_word(idx: usize, len: usize, k: usize) -> Vec<usize> {
    let mut out = vec![0; len];
    let mut rest = idx;
    for slot in out.iter_mut().rev() {
        *slot = rest % k;
        rest /= k;
    }
    out
}

pub fn encode_word(word: &[usize], k: usize) -> usize {
    word.iter().fold(0, |acc, &s| acc * k + s)
}

fn parse_word(s: &str, k: usize, len: usize, field: &str) -> Result<usize> {
    let syms: Vec<usize> = s
        .split(',')
        .map(|t| t.trim().parse::<usize>())
        .collect::<std::result::Result<_, _>>()
        .map_err(|e| Error::parse(field, format!("word `{s}`: {e}")))?;
    if syms.len() != len {
        return Err(Error::parse(field, format!("word `{s}` has {} symbols, expected {len}", syms.len())));
    }
    if let Some(&bad) = syms.iter().find(|&&a| a >= k) {
        return Err(Error::parse(field, format!("symbol {bad} outside alphabet of size {k}")));
    }
    Ok(encode_word(&syms, k))
}

fn format_word(idx: usize, len: usize, k: usize) -> String {
    decode_word(idx, len, k)
        .iter()
        .map(|s| s.to_string())
        .collect::<Vec<_>>()
        .join(",")
}

/// A function of the first `depth + 1` coordinates.
#[derive(Clone, Debug, PartialEq)]
pub struct CylinderFunction {
    alphabet_size: usize,
    depth: usize,
    values: Vec<f64>,
}

impl CylinderFunction {
    pub fn new(alphabet_size: usize, depth: usize, values: Vec<f64>) -> Result<Self> {
        if alphabet_size == 0 {
            return Err(Error::invalid("empty alphabet"));
        }
        let n = pow_k(alphabet_size, depth + 1);
        if values.len() != n {
            return Err(Error::invalid(format!(
                "a depth-{depth} function over {alphabet_size} symbols needs {n} values, got {}",
                values.len()
            )));
        }
        Ok(CylinderFunction {
            alphabet_size,
            depth,
            values,
        })
    }

    pub fn from_fn(alphabet_size: usize, depth: usize, f: impl Fn(&[usize]) -> f64) -> Self {
        let n = pow_k(alphabet_size, depth + 1);
        let values = (0..n).map(|i| f(&decode_word(i, depth + 1, alphabet_size))).collect();
        CylinderFunction {
            alphabet_size,
            depth,
            values,
        }
    }

    pub fn constant(alphabet_size: usize, depth: usize, c: f64) -> Self {
        CylinderFunction::from_fn(alphabet_size, depth, |_| c)
    }

    pub fn alphabet_size(&self) -> usize {
        self.alphabet_size
    }

    pub fn depth(&self) -> usize {
        self.depth
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn value(&self, word: &[usize]) -> f64 {
        self.values[encode_word(&word[..=self.depth], self.alphabet_size)]
    }

    /// The same function represented at a larger depth.
    pub fn lift(&self, depth: usize) -> CylinderFunction {
        assert!(depth >= self.depth, "cannot lift to a smaller depth");
        let k = self.alphabet_size;
        let drop = pow_k(k, depth - self.depth);
        let values = (0..pow_k(k, depth + 1)).map(|i| self.values[i / drop]).collect();
        CylinderFunction {
            alphabet_size: k,
            depth,
            values,
        }
    }

    /// `f ∘ σ`, of depth `r + 1`.
    pub fn compose_shift(&self) -> CylinderFunction {
        let k = self.alphabet_size;
        let n = self.values.len();
        let values = (0..n * k).map(|i| self.values[i % n]).collect();
        CylinderFunction {
            alphabet_size: k,
            depth: self.depth + 1,
            values,
        }
    }

    pub fn map(&self, f: impl Fn(f64) -> f64) -> CylinderFunction {
        CylinderFunction {
            alphabet_size: self.alphabet_size,
            depth: self.depth,
            values: self.values.iter().map(|&v| f(v)).collect(),
        }
    }

    /// Pointwise combination after lifting both to the larger depth.
    pub fn zip(&self, other: &CylinderFunction, f: impl Fn(f64, f64) -> f64) -> CylinderFunction {
        assert_eq!(self.alphabet_size, other.alphabet_size);
        let d = self.depth.max(other.depth);
        let (a, b) = (self.lift(d), other.lift(d));
        CylinderFunction {
            alphabet_size: self.alphabet_size,
            depth: d,
            values: a.values.iter().zip(&b.values).map(|(&x, &y)| f(x, y)).collect(),
        }
    }

    pub fn sup_norm(&self) -> f64 {
        self.values.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    pub fn oscillation(&self) -> f64 {
        let (lo, hi) = self
            .values
            .iter()
            .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &v| (lo.min(v), hi.max(v)));
        hi - lo
    }

    /// Lipschitz constant for `d(x, y) = θ^{first disagreement}`: the
    /// largest spread among words sharing their first `j` symbols, divided by
    /// `θ^j`.
    pub fn lipschitz(&self, theta: f64) -> f64 {
        let k = self.alphabet_size;
        let mut lip = 0.0f64;
        for j in 0..=self.depth {
            let block = pow_k(k, self.depth + 1 - j);
            let spread = self
                .values
                .chunks(block)
                .map(|c| {
                    let (lo, hi) = c
                        .iter()
                        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &v| (lo.min(v), hi.max(v)));
                    if lo == hi {
                        0.0
                    } else {
                        hi - lo
                    }
                })
                .fold(0.0, f64::max);
            lip = lip.max(spread / theta.powi(j as i32));
        }
        lip
    }

    /// `max{1, sup|f|, Lip(f)}`.
    pub fn norm(&self, theta: f64) -> f64 {
        1f64.max(self.sup_norm()).max(self.lipschitz(theta))
    }
}

/// A normalised depth-`m` potential on the full shift over `k` symbols.
///
/// `log_weights[a·w]` is the potential on the cylinder of the
/// `(m+1)`-word `a·w`; normalisation means `Σ_a exp(log_weights[a·w]) = 1`
/// for every `m`-word `w`. A weight of `-∞` forbids the transition.
#[derive(Clone, Debug)]
pub struct MarkovShiftModel {
    alphabet_size: usize,
    depth: usize,
    theta: f64,
    log_weights: Vec<f64>,
}

/// Subtracts `ln Σ_a exp(raw(a·w))` from every `raw(a·w)`.
pub fn normalize_potential(alphabet_size: usize, depth: usize, theta: f64, raw: Vec<f64>) -> Result<MarkovShiftModel> {
    if alphabet_size == 0 {
        return Err(Error::invalid("empty alphabet"));
    }
    if !(theta > 0.0 && theta < 1.0) {
        return Err(Error::invalid(format!("theta must lie in (0, 1), got {theta}")));
    }
    let words = pow_k(alphabet_size, depth);
    if raw.len() != words * alphabet_size {
        return Err(Error::invalid(format!(
            "expected {} log-weights, got {}",
            words * alphabet_size,
            raw.len()
        )));
    }
    if raw.iter().any(|v| v.is_nan() || *v == f64::INFINITY) {
        return Err(Error::invalid("log-weights must be finite or -inf"));
    }
    let mut out = raw;
    for w in 0..words {
        let idx = |a: usize| a * words + w;
        let top = (0..alphabet_size).map(|a| out[idx(a)]).fold(f64::NEG_INFINITY, f64::max);
        if top == f64::NEG_INFINITY {
            return Err(Error::invalid(format!(
                "every transition into word {} is forbidden",
                format_word(w, depth, alphabet_size)
            )));
        }
        let lse = top + (0..alphabet_size).map(|a| (out[idx(a)] - top).exp()).sum::<f64>().ln();
        for a in 0..alphabet_size {
            out[idx(a)] -= lse;
        }
    }
    Ok(MarkovShiftModel {
        alphabet_size,
        depth,
        theta,
        log_weights: out,
    })
}

impl MarkovShiftModel {
    /// Takes already normalised weights; checks normalisation to `1e-12`.
    pub fn from_normalized(alphabet_size: usize, depth: usize, theta: f64, log_weights: Vec<f64>) -> Result<Self> {
        // Same shape and value checks as normalisation.
        normalize_potential(alphabet_size, depth, theta, log_weights.clone())?;
        let model = MarkovShiftModel {
            alphabet_size,
            depth,
            theta,
            log_weights,
        };
        let err = model.normalization_error();
        if err > 1e-12 {
            return Err(Error::invalid(format!("weights are not normalised (error {err:e})")));
        }
        Ok(model)
    }

    /// Independent symbols with probabilities `p`.
    pub fn iid(p: &[f64], theta: f64) -> Result<Self> {
        normalize_potential(p.len(), 0, theta, p.iter().map(|x| x.ln()).collect())
    }

    /// Depth-1 model with `rows[w][a] = P(x₀ = a | x₁ = w)`.
    pub fn from_rows(rows: &[Vec<f64>], theta: f64) -> Result<Self> {
        let k = rows.len();
        if rows.iter().any(|r| r.len() != k) {
            return Err(Error::invalid("transition rows must form a square matrix"));
        }
        let mut raw = vec![0.0; k * k];
        for (w, row) in rows.iter().enumerate() {
            for (a, &p) in row.iter().enumerate() {
                if !(p >= 0.0) {
                    return Err(Error::invalid("transition probabilities must be >= 0"));
                }
                raw[a * k + w] = p.ln();
            }
        }
        normalize_potential(k, 1, theta, raw)
    }

    pub fn alphabet_size(&self) -> usize {
        self.alphabet_size
    }

    pub fn depth(&self) -> usize {
        self.depth
    }

    pub fn theta(&self) -> f64 {
        self.theta
    }

    pub fn log_weights(&self) -> &[f64] {
        &self.log_weights
    }

    /// `exp φ_p(a·w)` for the `m`-word index `w`.
    pub fn weight(&self, a: usize, w: usize) -> f64 {
        self.log_weights[a * pow_k(self.alphabet_size, self.depth) + w].exp()
    }

    pub fn normalization_error(&self) -> f64 {
        let words = pow_k(self.alphabet_size, self.depth);
        (0..words)
            .map(|w| ((0..self.alphabet_size).map(|a| self.weight(a, w)).sum::<f64>() - 1.0).abs())
            .fold(0.0, f64::max)
    }

    /// The potential as a cylinder function of depth `m`.
    pub fn potential(&self) -> CylinderFunction {
        CylinderFunction {
            alphabet_size: self.alphabet_size,
            depth: self.depth,
            values: self.log_weights.clone(),
        }
    }

    /// `max{1, sup|φ_p|, Lip(φ_p)}`; infinite when some transition is
    /// forbidden.
    pub fn phi_p_norm(&self) -> f64 {
        self.potential().norm(self.theta)
    }

    /// `(θ, ‖φ_p‖, ‖φ‖)` for an observable.
    pub fn system_params(&self, phi: &CylinderFunction) -> Result<SystemParams> {
        let pp = self.phi_p_norm();
        if !pp.is_finite() {
            return Err(Error::invalid("potential has forbidden transitions; its norm is infinite"));
        }
        Ok(SystemParams::new(self.theta, pp, phi.norm(self.theta))?.with_alphabet_size(self.alphabet_size))
    }

    pub fn to_file(&self) -> ModelFile {
        let len = self.depth + 1;
        let log_weights = self
            .log_weights
            .iter()
            .enumerate()
            .map(|(i, &v)| (format_word(i, len, self.alphabet_size), v.is_finite().then_some(v)))
            .collect();
        ModelFile {
            alphabet_size: self.alphabet_size,
            depth: self.depth,
            theta: self.theta,
            log_weights,
            normalized: Some(true),
            observable: None,
        }
    }
}

/// Observable table as stored in files; missing words are zero.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ObservableFile {
    pub depth: usize,
    pub values: BTreeMap<String, f64>,
    /// Subtract the equilibrium mean after loading.
    #[serde(default)]
    pub center: bool,
}

impl ObservableFile {
    pub fn build(&self, alphabet_size: usize) -> Result<CylinderFunction> {
        let mut values = vec![0.0; pow_k(alphabet_size, self.depth + 1)];
        for (w, &v) in &self.values {
            if !v.is_finite() {
                return Err(Error::parse("observable.values", format!("value for `{w}` is not finite")));
            }
            values[parse_word(w, alphabet_size, self.depth + 1, "observable.values")?] = v;
        }
        CylinderFunction::new(alphabet_size, self.depth, values)
    }
}

/// On-disk model: words are comma-separated symbol indices; a `null`
/// weight forbids the transition.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ModelFile {
    pub alphabet_size: usize,
    pub depth: usize,
    pub theta: f64,
    pub log_weights: BTreeMap<String, Option<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub normalized: Option<bool>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub observable: Option<ObservableFile>,
}

impl ModelFile {
    pub fn build(&self) -> Result<MarkovShiftModel> {
        let k = self.alphabet_size;
        if k == 0 {
            return Err(Error::parse("alphabet_size", "must be positive"));
        }
        let n = pow_k(k, self.depth + 1);
        let mut raw = vec![None; n];
        for (w, v) in &self.log_weights {
            let i = parse_word(w, k, self.depth + 1, "log_weights")?;
            raw[i] = Some(v.unwrap_or(f64::NEG_INFINITY));
        }
        if let Some(i) = raw.iter().position(Option::is_none) {
            return Err(Error::parse(
                "log_weights",
                format!("missing word `{}`", format_word(i, self.depth + 1, k)),
            ));
        }
        let raw: Vec<f64> = raw.into_iter().map(Option::unwrap).collect();
        if !(self.theta > 0.0 && self.theta < 1.0) {
            return Err(Error::parse("theta", format!("must lie in (0, 1), got {}", self.theta)));
        }
        if self.normalized == Some(true) {
            MarkovShiftModel::from_normalized(k, self.depth, self.theta, raw)
        } else {
            normalize_potential(k, self.depth, self.theta, raw)
        }
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::Io(format!("{}: {e}", path.display())))?;
        Error::from_json(&text, "model")
    }
}
