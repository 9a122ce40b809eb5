//! Exact transfer operator on cylinder functions and everything that can be
//! computed from it: the equilibrium measure, expectations, correlation
//! decay, autocovariances and the Green–Kubo variance.

use nalgebra::DMatrix;
use serde::Serialize;

use super::model::{decode_word, encode_word, pow_k, CylinderFunction, MarkovShiftModel};
use crate::bounds::BoundEvaluator;
use crate::error::{Error, Result};

/// `(Pf)(x) = Σ_a exp(φ_p(a·x)) f(a·x)` acting on functions of depth `r`.
///
/// Each row lists the `k` words `a·x` (truncated to `r + 1` symbols) and
/// their weights.
#[derive(Clone, Debug)]
pub struct TransferOperator {
    alphabet_size: usize,
    depth: usize,
    rows: Vec<Vec<(usize, f64)>>,
}

/// The transfer operator on depth-`r` functions; needs `r ≥ m`.
pub fn transfer_matrix(model: &MarkovShiftModel, depth: usize) -> Result<TransferOperator> {
    let m = model.depth();
    if depth < m {
        return Err(Error::DepthTooSmall {
            requested: depth,
            potential: m,
        });
    }
    let k = model.alphabet_size();
    let n = pow_k(k, depth + 1);
    let head = pow_k(k, depth);
    let tail = pow_k(k, depth + 1 - m);
    let rows = (0..n)
        .map(|x| {
            (0..k)
                .map(|a| (a * head + x / k, model.weight(a, x / tail)))
                .filter(|&(_, w)| w > 0.0)
                .collect()
        })
        .collect();
    Ok(TransferOperator {
        alphabet_size: k,
        depth,
        rows,
    })
}

impl TransferOperator {
    pub fn depth(&self) -> usize {
        self.depth
    }

    pub fn dim(&self) -> usize {
        self.rows.len()
    }

    pub fn apply_values(&self, f: &[f64]) -> Vec<f64> {
        self.rows
            .iter()
            .map(|row| row.iter().map(|&(j, w)| w * f[j]).sum())
            .collect()
    }

    /// `Pf`; `f` is lifted to the operator's depth first.
    pub fn apply(&self, f: &CylinderFunction) -> CylinderFunction {
        let f = self.fit(f);
        CylinderFunction::new(self.alphabet_size, self.depth, self.apply_values(f.values())).expect("shape")
    }

    fn fit(&self, f: &CylinderFunction) -> CylinderFunction {
        assert!(f.depth() <= self.depth, "function deeper than the operator");
        f.lift(self.depth)
    }

    pub fn dense(&self) -> DMatrix<f64> {
        let n = self.dim();
        let mut m = DMatrix::zeros(n, n);
        for (i, row) in self.rows.iter().enumerate() {
            for &(j, w) in row {
                m[(i, j)] += w;
            }
        }
        m
    }
}

/// Eigenvalue moduli of a square matrix, largest first.
pub fn spectrum_moduli(m: &DMatrix<f64>) -> Vec<f64> {
    let mut out: Vec<f64> = m.clone().complex_eigenvalues().iter().map(|z| z.norm()).collect();
    out.sort_by(|a, b| b.total_cmp(a));
    out
}

/// Smallest gap `1 - |λ₂|` tolerated before a model counts as reducible or
/// periodic.
pub const SPECTRAL_GAP_TOL: f64 = 1e-10;

/// The equilibrium measure, stored through its marginal on words of length
/// `L = max(m, 1)`; longer cylinders follow from the product formula
/// `μ[x₀…x_r] = ν[x_{r-L+1}…x_r] Π_{i ≤ r-L} exp φ_p(x_i…x_{i+m})`.
#[derive(Clone, Debug)]
pub struct Equilibrium {
    alphabet_size: usize,
    potential_depth: usize,
    base_len: usize,
    base: Vec<f64>,
    log_weights: Vec<f64>,
    /// `1 - |λ₂|` of the base chain.
    pub spectral_gap: f64,
}

pub fn equilibrium_measure(model: &MarkovShiftModel) -> Result<Equilibrium> {
    let k = model.alphabet_size();
    let m = model.depth();
    let len = m.max(1);
    let n = pow_k(k, len);
    // Column-stochastic: column (x₁…x_{L-1} b) spreads to the rows x₀ x₁…x_{L-1}.
    let tail_div = pow_k(k, len - m);
    let mut q = DMatrix::<f64>::zeros(n, n);
    for x in 0..n {
        let rest = x % pow_k(k, len - 1);
        for b in 0..k {
            // φ_p(x₀ … x_m) reads the first m+1 symbols of x₀…x_{L-1} b.
            let w = model.log_weights()[(x * k + b) / tail_div].exp();
            q[(x, rest * k + b)] += w;
        }
    }
    let moduli = spectrum_moduli(&q);
    let second = moduli.get(1).copied().unwrap_or(0.0);
    let gap = 1.0 - second;
    if gap < SPECTRAL_GAP_TOL {
        return Err(Error::ReducibleModel(format!("second eigenvalue modulus {second} is within {SPECTRAL_GAP_TOL:e} of 1")));
    }
    let mut a = q - DMatrix::identity(n, n);
    for j in 0..n {
        a[(n - 1, j)] = 1.0;
    }
    let mut rhs = nalgebra::DVector::zeros(n);
    rhs[n - 1] = 1.0;
    let sol = a
        .lu()
        .solve(&rhs)
        .ok_or_else(|| Error::ReducibleModel("stationarity system is singular".into()))?;
    let base: Vec<f64> = sol.iter().map(|v| v.max(0.0)).collect();
    let total: f64 = base.iter().sum();
    Ok(Equilibrium {
        alphabet_size: k,
        potential_depth: m,
        base_len: len,
        base: base.into_iter().map(|v| v / total).collect(),
        log_weights: model.log_weights().to_vec(),
        spectral_gap: gap,
    })
}

impl Equilibrium {
    /// Measure of the cylinder `[word]`.
    pub fn cylinder(&self, word: &[usize]) -> f64 {
        let k = self.alphabet_size;
        let len = self.base_len;
        let m = self.potential_depth;
        if word.len() < len {
            let extra = len - word.len();
            let start = encode_word(word, k) * pow_k(k, extra);
            return self.base[start..start + pow_k(k, extra)].iter().sum();
        }
        let r = word.len();
        let mut p = self.base[encode_word(&word[r - len..], k)];
        for i in 0..r - len {
            p *= self.log_weights[encode_word(&word[i..i + m + 1], k)].exp();
        }
        p
    }

    /// Measures of all cylinders of length `depth + 1`, in word order.
    pub fn measure(&self, depth: usize) -> Vec<f64> {
        let k = self.alphabet_size;
        (0..pow_k(k, depth + 1))
            .map(|i| self.cylinder(&decode_word(i, depth + 1, k)))
            .collect()
    }

    pub fn expectation(&self, f: &CylinderFunction) -> f64 {
        let mu = self.measure(f.depth());
        f.values().iter().zip(&mu).filter(|(_, &p)| p > 0.0).map(|(v, p)| v * p).sum()
    }
}

/// Residuals of the identities the transfer operator must satisfy.
#[derive(Clone, Debug, Serialize)]
pub struct OperatorIdentities {
    /// `‖P1 - 1‖_∞`.
    pub constant_defect: f64,
    /// `max |E[(Pf) g] - E[f (g∘σ)]|` over random pairs.
    pub duality_defect: f64,
    pub pairs: usize,
    /// `max |μ[w] - Σ_a μ[a·w]|` over words of length `m + 1`.
    pub invariance_defect: f64,
    /// Single-symbol marginal of the equilibrium measure.
    pub marginal: Vec<f64>,
}

/// Checks `P1 = 1`, shift invariance, and duality on `pairs` random cylinder
/// functions with values in `[-1, 1]` and depths up to `m + 1`.
pub fn operator_identities(model: &MarkovShiftModel, pairs: usize, seed: u64) -> Result<OperatorIdentities> {
    use rand::Rng;
    let eq = equilibrium_measure(model)?;
    let k = model.alphabet_size();
    let m = model.depth();
    let one = CylinderFunction::constant(k, m, 1.0);
    let constant_defect = sup(&transfer_matrix(model, m)?.apply(&one).values().iter().map(|v| v - 1.0).collect::<Vec<_>>());

    let mut rng = crate::renewal::path_rng(seed, 0);
    let mut duality_defect = 0.0f64;
    for _ in 0..pairs {
        let (rf, rg) = (rng.gen_range(0..=m + 1), rng.gen_range(0..=m + 1));
        let f = CylinderFunction::new(k, rf, (0..pow_k(k, rf + 1)).map(|_| rng.gen_range(-1.0..=1.0)).collect())?;
        let g = CylinderFunction::new(k, rg, (0..pow_k(k, rg + 1)).map(|_| rng.gen_range(-1.0..=1.0)).collect())?;
        let depth = m.max(rf).max(rg + 1);
        let mu = eq.measure(depth);
        let pf = transfer_matrix(model, depth)?.apply(&f);
        let lhs = dot(&mu, pf.values(), g.lift(depth).values());
        let rhs = dot(&mu, f.lift(depth).values(), g.compose_shift().lift(depth).values());
        duality_defect = duality_defect.max((lhs - rhs).abs());
    }

    let short = eq.measure(m);
    let long = eq.measure(m + 1);
    let width = pow_k(k, m + 1);
    let invariance_defect = (0..width)
        .map(|w| (short[w] - (0..k).map(|a| long[a * width + w]).sum::<f64>()).abs())
        .fold(0.0, f64::max);

    Ok(OperatorIdentities {
        constant_defect,
        duality_defect,
        pairs,
        invariance_defect,
        marginal: eq.measure(0),
    })
}

/// `f - E f`.
pub fn center(eq: &Equilibrium, f: &CylinderFunction) -> CylinderFunction {
    let mean = eq.expectation(f);
    f.map(|v| v - mean)
}

/// Largest mean tolerated for observables that must be centred.
pub const MEAN_TOL: f64 = 1e-12;

pub(crate) fn require_centered(eq: &Equilibrium, f: &CylinderFunction) -> Result<()> {
    let mean = eq.expectation(f);
    if mean.abs() > MEAN_TOL {
        return Err(Error::NonzeroMean(mean));
    }
    Ok(())
}

fn working_depth(model: &MarkovShiftModel, phi: &CylinderFunction) -> usize {
    model.depth().max(phi.depth())
}

/// `‖Pⁿ(φ - Eφ)‖_∞`.
pub fn exact_correlation(model: &MarkovShiftModel, phi: &CylinderFunction, n: usize) -> Result<f64> {
    Ok(correlation_profile(model, phi, n)?[n])
}

/// `‖Pⁱ(φ - Eφ)‖_∞` for `i = 0..=n`.
pub fn correlation_profile(model: &MarkovShiftModel, phi: &CylinderFunction, n: usize) -> Result<Vec<f64>> {
    let eq = equilibrium_measure(model)?;
    let op = transfer_matrix(model, working_depth(model, phi))?;
    let mut f = op.fit(&center(&eq, phi)).values().to_vec();
    let mut out = Vec::with_capacity(n + 1);
    out.push(sup(&f));
    for _ in 0..n {
        f = op.apply_values(&f);
        out.push(sup(&f));
    }
    Ok(out)
}

fn sup(v: &[f64]) -> f64 {
    v.iter().fold(0.0, |m, x| m.max(x.abs()))
}

fn osc(v: &[f64]) -> f64 {
    let (lo, hi) = v
        .iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &x| (lo.min(x), hi.max(x)));
    hi - lo
}

/// Autocovariances `C_i = E[(Pⁱφ) φ]` for `i = 0..n` (centred `φ`).
pub fn autocovariances(model: &MarkovShiftModel, phi: &CylinderFunction, n: usize) -> Result<Vec<f64>> {
    let eq = equilibrium_measure(model)?;
    require_centered(&eq, phi)?;
    let op = transfer_matrix(model, working_depth(model, phi))?;
    let phi = op.fit(phi);
    let mu = eq.measure(op.depth());
    let mut f = phi.values().to_vec();
    let mut out = Vec::with_capacity(n);
    for _ in 0..n {
        out.push(dot(&mu, &f, phi.values()));
        f = op.apply_values(&f);
    }
    Ok(out)
}

fn dot(mu: &[f64], f: &[f64], g: &[f64]) -> f64 {
    mu.iter()
        .zip(f.iter().zip(g))
        .filter(|(&p, _)| p > 0.0)
        .map(|(p, (a, b))| p * a * b)
        .sum()
}

/// `E[S_N²]` for a centred observable, from autocovariances.
pub fn birkhoff_second_moment(model: &MarkovShiftModel, phi: &CylinderFunction, n: usize) -> Result<f64> {
    let c = autocovariances(model, phi, n)?;
    let nf = n as f64;
    Ok(nf * c[0] + 2.0 * (1..n).map(|i| (nf - i as f64) * c[i]).sum::<f64>())
}

/// Dobrushin coefficient `max_{x,y} ½ Σ_z |M[x,z] - M[y,z]|` of a
/// row-stochastic matrix.
pub fn dobrushin(m: &DMatrix<f64>) -> f64 {
    let n = m.nrows();
    let mut worst = 0.0f64;
    for x in 0..n {
        for y in x + 1..n {
            let d: f64 = (0..n).map(|z| (m[(x, z)] - m[(y, z)]).abs()).sum();
            worst = worst.max(0.5 * d);
        }
    }
    worst
}

/// Green–Kubo variance with a rigorous bound on the neglected tail.
#[derive(Clone, Debug, Serialize)]
pub struct GreenKubo {
    pub sigma2: f64,
    /// Bound on `|Σ² - sigma2|` from the truncated autocovariance sum.
    pub tail_bound: f64,
    pub terms: usize,
    /// Block length `b` and coefficient `δ(Pᵇ)` of the contraction
    /// certificate, when one was found.
    pub contraction: Option<(usize, f64)>,
    /// Tail bound from the correlation-decay envelope, when supplied.
    pub envelope_tail: Option<f64>,
}

const GK_MAX_TERMS: usize = 2_000_000;
const MAX_CONTRACTION_BLOCK: usize = 256;

/// Smallest power-of-two block `b` with `δ(Pᵇ) < 1`, if it is small enough
/// to find densely.
fn contraction_certificate(op: &TransferOperator) -> Option<(usize, f64)> {
    if op.dim() > 1024 {
        return None;
    }
    let mut pb = op.dense();
    let mut b = 1;
    loop {
        let d = dobrushin(&pb);
        if d < 0.5 || (b >= MAX_CONTRACTION_BLOCK && d < 1.0 - 1e-9) {
            return Some((b, d));
        }
        if b >= MAX_CONTRACTION_BLOCK {
            return None;
        }
        pb = &pb * &pb;
        b *= 2;
    }
}

/// `Σ² = Eφ² + 2 Σ_{i≥1} E[φ (φ∘σⁱ)]`, with `E[φ (φ∘σⁱ)] = E[(Pⁱφ) φ]`.
///
/// Since `Eφ = 0`, `|E[(Pⁱφ) φ]| ≤ E|φ| osc(Pⁱφ) / 2`, and the oscillation
/// contracts by `δ(Pᵇ)` every `b` steps. The sum is truncated once that
/// tail is below `rel_tol · |Σ²|`. If `envelope` is given, the tail from
/// the correlation bound `‖Pⁱφ‖_∞ ≤ B(i)` is also computed and the smaller
/// of the two is reported.
pub fn green_kubo_sigma2(
    model: &MarkovShiftModel,
    phi: &CylinderFunction,
    rel_tol: f64,
    envelope: Option<&BoundEvaluator>,
) -> Result<GreenKubo> {
    let eq = equilibrium_measure(model)?;
    require_centered(&eq, phi)?;
    let op = transfer_matrix(model, working_depth(model, phi))?;
    let phi = op.fit(phi);
    let mu = eq.measure(op.depth());
    let abs_mean: f64 = dot(&mu, &phi.values().iter().map(|v| v.abs()).collect::<Vec<_>>(), &vec![1.0; mu.len()]);
    let contraction = contraction_certificate(&op);

    // envelope: E|φ| Σ_{i>K} ‖φ‖ e^{-iL} / (L D)
    let env = envelope.map(|ev| {
        let l = ev.log_sqrt_z0().mid_f64();
        let d = ev.one_minus_a_eps().mid_f64();
        let pn = ev.phi_norm_f64();
        move |k: usize| abs_mean * pn * (-(k as f64 + 1.0) * l).exp() / (l * d * -(-l).exp_m1())
    });
    if contraction.is_none() && env.is_none() {
        return Err(Error::NonconvergentAtPrecision {
            reason: "no contraction certificate for the transfer operator and no envelope supplied".into(),
            required_terms: f64::INFINITY,
        });
    }

    let c0 = dot(&mu, phi.values(), phi.values());
    let mut sum = c0;
    let b = contraction.map_or(1, |(b, _)| b);
    // Window of the next b iterates, kept to evaluate the tail.
    let mut window: std::collections::VecDeque<Vec<f64>> = std::collections::VecDeque::new();
    let mut f = phi.values().to_vec();
    for _ in 0..b {
        f = op.apply_values(&f);
        window.push_back(f.clone());
    }
    let mut k = 0usize;
    loop {
        let tail_c = contraction.map(|(_, d)| 0.5 * abs_mean * window.iter().map(|w| osc(w)).sum::<f64>() / (1.0 - d));
        let tail_e = env.as_ref().map(|e| e(k));
        let tail = match (tail_c, tail_e) {
            (Some(a), Some(b)) => a.min(b),
            (Some(a), None) | (None, Some(a)) => a,
            (None, None) => unreachable!(),
        };
        // Σ² counts each covariance twice.
        let tail = 2.0 * tail;
        if tail <= rel_tol * sum.abs() || tail < 1e-300 {
            return Ok(GreenKubo {
                sigma2: sum,
                tail_bound: tail,
                terms: k,
                contraction,
                envelope_tail: tail_e.map(|t| 2.0 * t),
            });
        }
        if k >= GK_MAX_TERMS {
            return Err(Error::NonconvergentAtPrecision {
                reason: "Green-Kubo tail did not reach tolerance".into(),
                required_terms: GK_MAX_TERMS as f64,
            });
        }
        let next = window.pop_front().expect("window");
        sum += 2.0 * dot(&mu, &next, phi.values());
        k += 1;
        f = op.apply_values(&f);
        window.push_back(f.clone());
    }
}
