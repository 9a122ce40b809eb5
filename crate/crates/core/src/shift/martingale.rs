//! Reverse-martingale decomposition of Birkhoff sums.
//!
//! With `H_0 = 0` and `H_{n+1} = P(φ + H_n)` (so `H_n = Σ_{i<n} P^{n-i} φ`),
//! the differences `ψ_n = φ + H_n - H_{n+1}∘σ` satisfy `Pψ_n = 0`, and
//! `Σ_{n≤N} ψ_n∘σⁿ = Σ_{n≤N} φ∘σⁿ - H_{N+1}∘σ^{N+1}` pointwise.

use rand::Rng;
use serde::Serialize;

use super::model::{decode_word, pow_k, CylinderFunction, MarkovShiftModel};
use super::operator::{equilibrium_measure, require_centered, transfer_matrix, Equilibrium};
use crate::error::Result;
use crate::renewal::path_rng;

#[derive(Clone, Debug)]
pub struct MartingaleDecomposition {
    /// Representation depth `r` of `φ` and the `H_n`; the `ψ_n` have depth
    /// `r + 1`.
    pub depth: usize,
    pub horizon: usize,
    pub phi: CylinderFunction,
    /// `H_0, …, H_{N+1}`.
    pub h: Vec<CylinderFunction>,
    /// `ψ_0, …, ψ_N`.
    pub psi: Vec<CylinderFunction>,
}

pub fn martingale_decomposition(model: &MarkovShiftModel, phi: &CylinderFunction, horizon: usize) -> Result<MartingaleDecomposition> {
    let eq = equilibrium_measure(model)?;
    require_centered(&eq, phi)?;
    let r = model.depth().max(phi.depth());
    let op = transfer_matrix(model, r)?;
    let k = model.alphabet_size();
    let phi = phi.lift(r);
    let mut h = vec![CylinderFunction::constant(k, r, 0.0)];
    for n in 0..=horizon {
        let next = op.apply(&phi.zip(&h[n], |a, b| a + b));
        h.push(next);
    }
    let phi_up = phi.lift(r + 1);
    let psi = (0..=horizon)
        .map(|n| {
            let pulled = h[n + 1].compose_shift();
            phi_up.zip(&h[n].lift(r + 1), |a, b| a + b).zip(&pulled, |a, b| a - b)
        })
        .collect();
    Ok(MartingaleDecomposition {
        depth: r,
        horizon,
        phi,
        h,
        psi,
    })
}

/// Outcome of checking the telescoping identity on long words.
#[derive(Clone, Debug, Serialize)]
pub struct TelescopingCheck {
    pub words: u64,
    pub exhaustive: bool,
    pub max_residual: f64,
}

/// Above this many words the identity is checked on a random sample.
const EXHAUSTIVE_LIMIT: usize = 1 << 16;

impl MartingaleDecomposition {
    pub fn word_len(&self) -> usize {
        self.horizon + self.depth + 2
    }

    /// `|Σ_{n≤N} ψ_n(σⁿx) - Σ_{n≤N} φ(σⁿx) + H_{N+1}(σ^{N+1}x)|` on one word
    /// of length `N + r + 2`.
    pub fn telescoping_residual(&self, word: &[usize]) -> f64 {
        let n = self.horizon;
        let lhs: f64 = (0..=n).map(|i| self.psi[i].value(&word[i..])).sum();
        let sum_phi: f64 = (0..=n).map(|i| self.phi.value(&word[i..])).sum();
        let rhs = sum_phi - self.h[n + 1].value(&word[n + 1..]);
        let scale = 1f64.max(lhs.abs()).max(sum_phi.abs());
        (lhs - rhs).abs() / scale
    }

    /// Every word when there are at most 2¹⁶ of them; otherwise `samples`
    /// uniformly random words (the identity is pointwise, so null cylinders
    /// count as well).
    pub fn check_telescoping(&self, samples: u64, seed: u64) -> TelescopingCheck {
        let k = self.phi.alphabet_size();
        let len = self.word_len();
        let total = k.checked_pow(len as u32).filter(|&t| t <= EXHAUSTIVE_LIMIT);
        match total {
            Some(t) => {
                let max_residual = (0..t)
                    .map(|i| self.telescoping_residual(&decode_word(i, len, k)))
                    .fold(0.0, f64::max);
                TelescopingCheck {
                    words: t as u64,
                    exhaustive: true,
                    max_residual,
                }
            }
            None => {
                let mut rng = path_rng(seed, 0);
                let mut word = vec![0usize; len];
                let mut max_residual = 0.0f64;
                for _ in 0..samples {
                    for s in word.iter_mut() {
                        *s = rng.gen_range(0..k);
                    }
                    max_residual = max_residual.max(self.telescoping_residual(&word));
                }
                TelescopingCheck {
                    words: samples,
                    exhaustive: false,
                    max_residual,
                }
            }
        }
    }

    /// `Σ_{n≤N} max_y |ψ_n(y) - φ(y) - H_n(y) + H_{n+1}(σy)|` over all words
    /// `y` of length `r + 2`. Summing the per-step identity along any word
    /// gives the telescoping identity, so this bounds its residual on every
    /// cylinder of every length at once.
    pub fn step_defect_sum(&self) -> f64 {
        let r = self.depth;
        let phi = self.phi.lift(r + 1);
        (0..=self.horizon)
            .map(|n| {
                let h = self.h[n].lift(r + 1);
                let pulled = self.h[n + 1].compose_shift();
                self.psi[n]
                    .values()
                    .iter()
                    .zip(phi.values())
                    .zip(h.values().iter().zip(pulled.values()))
                    .map(|((p, f), (a, b))| (p - f - a + b).abs())
                    .fold(0.0, f64::max)
            })
            .sum()
    }

    /// `max_n max_c |E[ψ_n · (1_c ∘ σ)]|` over depth-`r` cylinders `c`.
    pub fn orthogonality_defect(&self, eq: &Equilibrium) -> f64 {
        let k = self.phi.alphabet_size();
        let cyl = pow_k(k, self.depth + 1);
        let mu = eq.measure(self.depth + 1);
        let mut worst = 0.0f64;
        for psi in &self.psi {
            let mut by_tail = vec![0.0; cyl];
            for (x, (&p, &v)) in mu.iter().zip(psi.values()).enumerate() {
                if p > 0.0 {
                    by_tail[x % cyl] += p * v;
                }
            }
            worst = by_tail.iter().fold(worst, |m, v| m.max(v.abs()));
        }
        worst
    }

    pub fn sup_h(&self) -> f64 {
        self.h.iter().map(|f| f.sup_norm()).fold(0.0, f64::max)
    }

    pub fn sup_psi(&self) -> f64 {
        self.psi.iter().map(|f| f.sup_norm()).fold(0.0, f64::max)
    }

    /// `max{1, sup|ψ_n|, Lip ψ_n}` for each `n`.
    pub fn psi_norms(&self, theta: f64) -> Vec<f64> {
        self.psi.iter().map(|f| f.norm(theta)).collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::shift::operator::center;

    #[test]
    fn iid_case_has_no_coboundary() {
        let m = MarkovShiftModel::iid(&[0.5, 0.5], 0.5).unwrap();
        let phi = CylinderFunction::new(2, 0, vec![1.0, -1.0]).unwrap();
        let d = martingale_decomposition(&m, &phi, 5).unwrap();
        for h in &d.h {
            assert!(h.sup_norm() < 1e-15);
        }
        for psi in &d.psi {
            assert!(psi.values().iter().zip(phi.lift(1).values()).all(|(a, b)| (a - b).abs() < 1e-15));
        }
    }

    #[test]
    fn two_state_identities() {
        let m = MarkovShiftModel::from_rows(&[vec![0.9, 0.1], vec![0.2, 0.8]], 0.5).unwrap();
        let eq = equilibrium_measure(&m).unwrap();
        let phi = center(&eq, &CylinderFunction::from_fn(2, 0, |w| (w[0] == 0) as u8 as f64));
        let d = martingale_decomposition(&m, &phi, 8).unwrap();
        let t = d.check_telescoping(0, 1);
        assert!(t.exhaustive);
        assert!(t.max_residual < 1e-12);
        assert!(d.step_defect_sum() < 1e-13);
        assert!(d.orthogonality_defect(&eq) < 1e-14);
    }
}
