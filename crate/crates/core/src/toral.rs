//! Symmetric hyperbolic toral automorphisms and the shift parameters they
//! induce: `θ = 1/λ_d` (weakest expansion) and `‖φ_p‖ = max{1, Σ_{i≤d} ln λ_i}`.

use std::path::Path;

use nalgebra::{DMatrix, SymmetricEigen};
use serde::{Deserialize, Serialize};

use crate::constants::SystemParams;
use crate::error::{Error, Result};
use crate::precision::{Arith, Interval};

/// Distance from 1 below which an eigenvalue counts as neutral.
pub const HYPERBOLICITY_TOL: f64 = 1e-9;

/// Eigenpair residual tolerance, relative to `max(1, ρ(f))`.
pub const RESIDUAL_TOL: f64 = 1e-9;

const CAT_BLOCK: [[i64; 2]; 2] = [[2, 1], [1, 1]];

/// A validated symmetric unimodular integer matrix with its spectrum.
#[derive(Clone, Debug, Serialize)]
pub struct ToralMap {
    pub dimension: usize,
    pub matrix: Vec<Vec<i64>>,
    pub determinant: i128,
    /// Eigenvalues, largest first.
    pub eigenvalues: Vec<f64>,
    /// Largest `‖fv - λv‖ / ‖v‖` over the computed eigenpairs.
    pub max_residual: f64,
    /// Largest imaginary part returned by a general (non-symmetric)
    /// eigensolver, as an independent check that the spectrum is real.
    pub max_imaginary: f64,
}

/// `⊕_{i<d} [[2,1],[1,1]]`.
pub fn cat_sum(d: usize) -> Vec<Vec<i64>> {
    let mut m = vec![vec![0; 2 * d]; 2 * d];
    for i in 0..d {
        for (r, row) in CAT_BLOCK.iter().enumerate() {
            for (c, &v) in row.iter().enumerate() {
                m[2 * i + r][2 * i + c] = v;
            }
        }
    }
    m
}

/// The coupling factor: `[[1,0,1],[0,A_{d-1},0],[1,0,2]]` with scalar
/// corners, so the first and last coordinates are coupled around a central
/// `(2d-2)`-square block.
pub fn coupling_matrix(d: usize) -> Vec<Vec<i64>> {
    let n = 2 * d;
    let mut m = vec![vec![0; n]; n];
    let inner = cat_sum(d.saturating_sub(1));
    for (r, row) in inner.iter().enumerate() {
        for (c, &v) in row.iter().enumerate() {
            m[r + 1][c + 1] = v;
        }
    }
    m[0][0] = 1;
    m[0][n - 1] = 1;
    m[n - 1][0] = 1;
    m[n - 1][n - 1] = 2;
    m
}

pub fn mat_mul(a: &[Vec<i64>], b: &[Vec<i64>]) -> Vec<Vec<i64>> {
    let n = a.len();
    (0..n)
        .map(|i| (0..n).map(|j| (0..n).map(|k| a[i][k] * b[k][j]).sum()).collect())
        .collect()
}

/// Exact determinant by fraction-free (Bareiss) elimination.
pub fn determinant(m: &[Vec<i64>]) -> Result<i128> {
    let n = m.len();
    if n == 0 {
        return Ok(1);
    }
    let overflow = || Error::invalid("determinant overflows 128-bit integers");
    let mut a: Vec<Vec<i128>> = m.iter().map(|r| r.iter().map(|&v| v as i128).collect()).collect();
    let mut sign = 1i128;
    let mut prev = 1i128;
    for k in 0..n - 1 {
        if a[k][k] == 0 {
            match (k + 1..n).find(|&i| a[i][k] != 0) {
                Some(i) => {
                    a.swap(k, i);
                    sign = -sign;
                }
                None => return Ok(0),
            }
        }
        for i in k + 1..n {
            for j in k + 1..n {
                let t = a[i][j]
                    .checked_mul(a[k][k])
                    .and_then(|x| x.checked_sub(a[i][k].checked_mul(a[k][j])?))
                    .ok_or_else(overflow)?;
                a[i][j] = t / prev;
            }
        }
        prev = a[k][k];
    }
    Ok(sign * a[n - 1][n - 1])
}

/// `f = A_d B_d A_d` for the family with index `d ≥ 1`.
pub fn family_matrix(d: usize) -> Result<Vec<Vec<i64>>> {
    if d == 0 {
        return Err(Error::invalid("d must be >= 1"));
    }
    let a = cat_sum(d);
    Ok(mat_mul(&mat_mul(&a, &coupling_matrix(d)), &a))
}

pub fn build_family_matrix(d: usize) -> Result<ToralMap> {
    ToralMap::from_rows(family_matrix(d)?)
}

impl ToralMap {
    /// Validates symmetry, unimodularity and hyperbolicity, and computes the
    /// spectrum.
    pub fn from_rows(matrix: Vec<Vec<i64>>) -> Result<Self> {
        let n = matrix.len();
        if n == 0 || n % 2 == 1 || matrix.iter().any(|r| r.len() != n) {
            return Err(Error::invalid("matrix must be square of even dimension"));
        }
        for i in 0..n {
            for j in 0..i {
                if matrix[i][j] != matrix[j][i] {
                    return Err(Error::invalid(format!("matrix is not symmetric at ({i}, {j})")));
                }
            }
        }
        let determinant = determinant(&matrix)?;
        if determinant.abs() != 1 {
            return Err(Error::invalid(format!("determinant is {determinant}, not ±1")));
        }
        let dense = DMatrix::from_fn(n, n, |i, j| matrix[i][j] as f64);
        let eig = SymmetricEigen::new(dense.clone());
        let mut pairs: Vec<(f64, usize)> = eig.eigenvalues.iter().copied().zip(0..).collect();
        pairs.sort_by(|a, b| b.0.total_cmp(&a.0));
        let radius = pairs.iter().fold(1.0f64, |m, p| m.max(p.0.abs()));
        let max_residual = pairs
            .iter()
            .map(|&(l, i)| {
                let v = eig.eigenvectors.column(i);
                (&dense * v - v * l).norm() / v.norm()
            })
            .fold(0.0, f64::max);
        if max_residual > RESIDUAL_TOL * radius {
            return Err(Error::InvariantViolation(format!("eigenpair residual {max_residual:e} too large")));
        }
        let max_imaginary = dense.complex_eigenvalues().iter().fold(0.0f64, |m, z| m.max(z.im.abs()));
        let eigenvalues: Vec<f64> = pairs.into_iter().map(|p| p.0).collect();
        if let Some(l) = eigenvalues.iter().find(|l| (l.abs() - 1.0).abs() <= HYPERBOLICITY_TOL) {
            return Err(Error::NonHyperbolic(format!("eigenvalue {l} has modulus within {HYPERBOLICITY_TOL:e} of 1")));
        }
        let map = ToralMap {
            dimension: n,
            matrix,
            determinant,
            eigenvalues,
            max_residual,
            max_imaginary,
        };
        let unstable = map.unstable_count();
        if unstable != n / 2 {
            return Err(Error::InvariantViolation(format!("{unstable} eigenvalues exceed 1, expected {}", n / 2)));
        }
        Ok(map)
    }

    pub fn half_dimension(&self) -> usize {
        self.dimension / 2
    }

    pub fn unstable_count(&self) -> usize {
        self.eigenvalues.iter().filter(|&&l| l > 1.0).count()
    }

    pub fn is_symmetric(&self) -> bool {
        let m = &self.matrix;
        (0..self.dimension).all(|i| (0..i).all(|j| m[i][j] == m[j][i]))
    }

    /// `1 / λ_d`.
    pub fn theta(&self) -> f64 {
        1.0 / self.eigenvalues[self.half_dimension() - 1]
    }

    /// `Σ_{i≤d} ln λ_i`, the log of the unstable Jacobian.
    pub fn unstable_log_jacobian(&self) -> f64 {
        self.eigenvalues[..self.half_dimension()].iter().map(|l| l.ln()).sum()
    }

    pub fn phi_p_norm(&self) -> f64 {
        self.unstable_log_jacobian().max(1.0)
    }

    /// `|Π λ_i - det f|`.
    pub fn product_defect(&self) -> f64 {
        (self.eigenvalues.iter().product::<f64>() - self.determinant as f64).abs()
    }

    /// For each eigenvalue, the distance from `1/λ` to the nearest
    /// eigenvalue.
    pub fn pairing_defects(&self) -> Vec<f64> {
        self.eigenvalues
            .iter()
            .map(|l| {
                let inv = 1.0 / l;
                self.eigenvalues.iter().fold(f64::INFINITY, |m, &x| m.min((x - inv).abs()))
            })
            .collect()
    }

    pub fn shift_params(&self, phi_norm: f64) -> Result<SystemParams> {
        shift_params_from_map(self, phi_norm)
    }
}

pub fn shift_params_from_map(map: &ToralMap, phi_norm: f64) -> Result<SystemParams> {
    SystemParams::new(map.theta(), map.phi_p_norm(), phi_norm)
}

/// Eigenvalues `[m_j ± √(m_j² - 4)]/2`, `m_j = 9 + 6cos(2πj/d)`, `j = 1..d`,
/// largest first.
pub fn closed_form_eigs(d: usize) -> Vec<f64> {
    let mut out = Vec::with_capacity(2 * d);
    for j in 1..=d {
        let m = 9.0 + 6.0 * (2.0 * std::f64::consts::PI * j as f64 / d as f64).cos();
        let r = (m * m - 4.0).sqrt();
        out.push((m + r) / 2.0);
        out.push((m - r) / 2.0);
    }
    out.sort_by(|a, b| b.total_cmp(a));
    out
}

/// The closed-form eigenvalues as enclosures, largest first.
pub fn closed_form_eigs_interval(d: usize, ar: &Arith) -> Vec<Interval> {
    let two_pi = ar.pi().ldexp(1);
    let mut out = Vec::with_capacity(2 * d);
    for j in 1..=d {
        let c = (&(&two_pi * &ar.int(j as i64)) / &ar.int(d as i64)).cos();
        let m = &ar.int(9) + &(&ar.int(6) * &c);
        let r = (&m.square() - &ar.int(4)).sqrt();
        out.push((&m + &r).ldexp(-1));
        // (m - r)/2 = 2/(m + r), which avoids cancellation
        out.push(&ar.int(2) / &(&m + &r));
    }
    out.sort_by(|a, b| b.mid_f64().total_cmp(&a.mid_f64()));
    out
}

/// One way of reading off `(θ, ‖φ_p‖)`.
#[derive(Clone, Debug)]
pub struct Parameterization {
    pub label: &'static str,
    pub theta: Interval,
    pub phi_p_norm: Interval,
}

impl Parameterization {
    pub fn params(&self, phi_norm: f64, ar: &Arith) -> Result<SystemParams> {
        SystemParams::from_intervals(self.theta.clone(), self.phi_p_norm.clone(), ar.num(phi_norm))
    }

    /// From the numerically computed spectrum.
    pub fn numerical(map: &ToralMap, ar: &Arith) -> Self {
        Parameterization {
            label: "numerical spectrum",
            theta: ar.num(map.theta()),
            phi_p_norm: ar.num(map.phi_p_norm()),
        }
    }

    /// From the closed-form eigenvalue list of the family.
    pub fn closed_form(d: usize, ar: &Arith) -> Self {
        let eigs = closed_form_eigs_interval(d, ar);
        let theta = eigs[d - 1].recip();
        let sum = eigs[..d].iter().fold(ar.zero(), |s, l| &s + &l.ln());
        Parameterization {
            label: "closed-form spectrum",
            theta,
            phi_p_norm: sum.max(&ar.one()),
        }
    }

    /// `θ = (9 - √77)/2`, `‖φ_p‖ = d ln((15 + √221)/2)`: the values quoted
    /// for the three-block example.
    pub fn quoted(d: usize, ar: &Arith) -> Self {
        let theta = (&ar.int(9) - &ar.int(77).sqrt()).ldexp(-1);
        let phi_p = &ar.int(d as i64) * &(&ar.int(15) + &ar.int(221).sqrt()).ldexp(-1).ln();
        Parameterization {
            label: "quoted",
            theta,
            phi_p_norm: phi_p,
        }
    }
}

/// Published constants for the `d = 3` example, as decimal strings.
pub mod quoted {
    pub const A: &str = "0.9999";
    pub const EPSILON: &str = "5e-5";
    pub const Z0: &str = "1.00000000083";
    pub const CLT_COEFFICIENT: &str = "357.15265e56";
    pub const LDP_LINEAR: &str = "5.76388936e-16";
    pub const LDP_QUADRATIC: &str = "5.9800357e-30";
}

/// `1 - exp(-d ln((15 + √221)/(√77 - 7)))`.
pub fn quoted_a_expression(d: usize, ar: &Arith) -> Interval {
    let num = &ar.int(15) + &ar.int(221).sqrt();
    let den = &ar.int(77).sqrt() - &ar.int(7);
    let x = &ar.int(d as i64) * &(&num / &den).ln();
    -(-&x).expm1()
}

/// Matrix input: `{ "dimension": 2d, "rows": [[...], ...] }`.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct MatrixFile {
    pub dimension: usize,
    pub rows: Vec<Vec<i64>>,
}

impl MatrixFile {
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::Io(format!("{}: {e}", path.display())))?;
        Error::from_json(&text, "matrix")
    }

    pub fn build(&self) -> Result<ToralMap> {
        if self.dimension == 0 || self.dimension % 2 == 1 {
            return Err(Error::parse("dimension", "must be a positive even integer"));
        }
        if self.rows.len() != self.dimension {
            return Err(Error::parse("rows", format!("expected {} rows, found {}", self.dimension, self.rows.len())));
        }
        if let Some(i) = self.rows.iter().position(|r| r.len() != self.dimension) {
            return Err(Error::parse("rows", format!("row {i} does not have {} entries", self.dimension)));
        }
        ToralMap::from_rows(self.rows.clone())
    }
}
