//! Second-order structure of `F∘Ψ` at the shift `γ`: the forms `V₁`, `V₂`,
//! `R₁`, `R₂`, truncated Hessian matrices, Hilbert–Schmidt tail diagnostics
//! and the Carleman–Fredholm determinant.

mod det2;
mod tail;

use std::io::Write;

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

pub use det2::{det2, det2_mc, log_det2, Det2Estimate};
pub use tail::{hs_tail, HsTailReport};

use crate::error::{Error, Result};
use crate::fbm::CmBasis;
use crate::functional::Functional;
use crate::grid::SampledPath;
use crate::taylor::TaylorContext;

pub fn v_forms(ctx: &TaylorContext, f: &SampledPath, k: &SampledPath) -> Result<(SampledPath, SampledPath)> {
    ctx.v_forms(f, k)
}

pub fn r_forms(ctx: &TaylorContext, f: &SampledPath, k: &SampledPath) -> Result<(SampledPath, SampledPath)> {
    ctx.r_forms(f, k)
}

/// Which orthonormal system indexes a matrix.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum BasisKind {
    /// `U` applied to the `L²` cosine basis, orthonormal in the Cameron–Martin space.
    CmCosine,
    /// The reweighted cosine basis of the interpolation space with smoothness `delta`.
    Interp { delta: f64 },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HessianMeta {
    pub basis: BasisKind,
    pub n: usize,
    pub hurst: f64,
    pub gamma_hash: String,
}

/// Truncated `D²(F∘Ψ)(γ)` on the first `n` elements of a basis, together with
/// its three additive pieces.
#[derive(Debug, Clone)]
pub struct HessianMatrix {
    pub a: DMatrix<f64>,
    /// Contribution `∇F(φ⁰)⟨V₁⟩`.
    pub v1_part: DMatrix<f64>,
    /// Contribution `∇F(φ⁰)⟨V₂⟩`.
    pub v2_part: DMatrix<f64>,
    /// Contribution `∇²F(φ⁰)⟨χ, χ⟩`.
    pub f_part: DMatrix<f64>,
    pub meta: HessianMeta,
}

impl HessianMatrix {
    pub fn n(&self) -> usize {
        self.meta.n
    }

    /// Eigenvalues in ascending order.
    pub fn eigenvalues(&self) -> Vec<f64> {
        let mut e: Vec<f64> = SymmetricEigen::new(self.a.clone()).eigenvalues.iter().copied().collect();
        e.sort_by(f64::total_cmp);
        e
    }

    pub fn min_eig(&self) -> f64 {
        self.eigenvalues().first().copied().unwrap_or(0.0)
    }

    pub fn frobenius(&self) -> f64 {
        self.a.norm()
    }

    pub fn asymmetry(&self) -> f64 {
        (&self.a - self.a.transpose()).amax()
    }

    /// Plain CSV, one matrix row per line, 17 significant digits.
    pub fn write_csv<W: Write>(&self, mut w: W) -> Result<()> {
        for i in 0..self.a.nrows() {
            let row: Vec<String> = (0..self.a.ncols()).map(|j| format!("{:.16e}", self.a[(i, j)])).collect();
            writeln!(w, "{}", row.join(","))?;
        }
        Ok(())
    }
}

/// Hex SHA-256 of the bit patterns of a path, used to tie artifacts to a `γ`.
pub fn path_hash(p: &SampledPath) -> String {
    let mut h = Sha256::new();
    for t in p.times() {
        h.update(t.to_bits().to_le_bytes());
    }
    for v in p.values() {
        h.update(v.to_bits().to_le_bytes());
    }
    hex::encode(h.finalize())
}

/// Per-step contraction tensors of `∇F(φ⁰)` against the flow.
struct Adjoint {
    /// `n×d`: left and right trapezoid weights for `∇σ⟨χ, dk⟩` terms.
    tl: Vec<DMatrix<f64>>,
    tr: Vec<DMatrix<f64>>,
    /// `n×n`: left and right weights for the second-derivative terms.
    sl: Vec<DMatrix<f64>>,
    sr: Vec<DMatrix<f64>>,
}

fn adjoint(ctx: &TaylorContext, g: &SampledPath) -> Adjoint {
    let n = ctx.state_dim();
    let d = ctx.noise_dim();
    let steps = ctx.grid().steps();
    let flow = ctx.flow();
    // Λ_l = Σ_{i>l} M_iᵀ g_i
    let mut lambda = vec![DVector::zeros(n); steps];
    let mut acc = DVector::zeros(n);
    for l in (0..steps).rev() {
        acc += flow.m(l + 1).transpose() * DVector::from_column_slice(g.point(l + 1));
        lambda[l] = acc.clone();
    }
    let mut out = Adjoint { tl: vec![], tr: vec![], sl: vec![], sr: vec![] };
    for l in 0..steps {
        let dg = ctx.gamma().increment(l, l + 1);
        let dt = ctx.grid().dt(l);
        for (side, idx) in [(0, l), (1, l + 1)] {
            let mu = flow.minv(idx).transpose() * &lambda[l];
            let mut t = DMatrix::zeros(n, d);
            let mut s = DMatrix::zeros(n, n);
            for m in 0..n {
                let row = mu.transpose() * &ctx.dsig[idx][m];
                t.row_mut(m).copy_from(&row);
                for mp in 0..n {
                    let sig2 = &ctx.d2sig[idx][m * n + mp] * DVector::from_column_slice(&dg);
                    let b2 = &ctx.d2beta[idx][m * n + mp] * dt;
                    s[(m, mp)] = mu.dot(&(sig2 + b2));
                }
            }
            if side == 0 {
                out.tl.push(t);
                out.sl.push(s);
            } else {
                out.tr.push(t);
                out.sr.push(s);
            }
        }
    }
    out
}

/// `D²(F∘Ψ)(γ)⟨e_a, e_b⟩ = ∇F(φ⁰)⟨(V₁ + V₂)(e_a, e_b)⟩ + ∇²F(φ⁰)⟨χ(e_a), χ(e_b)⟩`
/// on the first `n` elements of `basis`, symmetrised. The flow-form integrals
/// are contracted with `∇F(φ⁰)` through an adjoint sweep, so no per-pair path
/// is formed.
pub fn hessian_matrix(functional: &dyn Functional, ctx: &TaylorContext, basis: &CmBasis, n: usize) -> Result<HessianMatrix> {
    if n == 0 || n > basis.len() {
        return Err(Error::InvalidArgument(format!("truncation {n} outside 1..={}", basis.len())));
    }
    if basis.dim() != ctx.noise_dim() || basis.grid().as_ref() != ctx.grid().as_ref() {
        return Err(Error::GridMismatch("basis does not live on the context grid".into()));
    }
    let steps = ctx.grid().steps();
    let d = basis.dim();
    let phi0 = ctx.phi0();
    let elems: Vec<SampledPath> = (0..n).map(|a| basis.element(a)).collect();
    let chis: Vec<SampledPath> = elems.iter().map(|e| ctx.chi(e)).collect::<Result<_>>()?;
    let zero_f = functional.is_zero();
    let adj = if zero_f { None } else { Some(adjoint(ctx, &functional.grad(phi0))) };

    // P_a[l] = ½(TL_lᵀ χa_l + TR_lᵀ χa_{l+1}) ∈ ℝ^d
    let pvec: Vec<Vec<DVector<f64>>> = match &adj {
        None => vec![],
        Some(adj) => chis
            .iter()
            .map(|c| {
                (0..steps)
                    .map(|l| {
                        (adj.tl[l].transpose() * DVector::from_column_slice(c.point(l))
                            + adj.tr[l].transpose() * DVector::from_column_slice(c.point(l + 1)))
                            * 0.5
                    })
                    .collect()
            })
            .collect(),
    };

    let rows: Vec<(Vec<f64>, Vec<f64>, Vec<f64>)> = (0..n)
        .into_par_iter()
        .map(|a| {
            let mut r1 = vec![0.0; n];
            let mut r2 = vec![0.0; n];
            let mut rf = vec![0.0; n];
            for b in 0..n {
                if let Some(adj) = &adj {
                    let (mb, ib) = (b / d, b % d);
                    let img = basis.mode_image(mb);
                    let mut v1 = 0.0;
                    for l in 0..steps {
                        v1 += pvec[a][l][ib] * (img[l + 1] - img[l]);
                    }
                    let mut v2 = 0.0;
                    for l in 0..steps {
                        let (ca, cb) = (chis[a].point(l), chis[b].point(l));
                        let (ca1, cb1) = (chis[a].point(l + 1), chis[b].point(l + 1));
                        v2 += 0.5 * (bilinear(&adj.sl[l], ca, cb) + bilinear(&adj.sr[l], ca1, cb1));
                    }
                    r1[b] = v1;
                    r2[b] = v2;
                }
                rf[b] = functional.hess(phi0, &chis[a], &chis[b]);
            }
            (r1, r2, rf)
        })
        .collect();
    let mut v1_part = DMatrix::zeros(n, n);
    let mut v2_part = DMatrix::zeros(n, n);
    let mut f_part = DMatrix::zeros(n, n);
    for (a, (r1, r2, rf)) in rows.into_iter().enumerate() {
        for b in 0..n {
            v1_part[(a, b)] = r1[b];
            v2_part[(a, b)] = r2[b];
            f_part[(a, b)] = rf[b];
        }
    }
    // V₁ contains both orderings of the cross term.
    v1_part = &v1_part + v1_part.transpose();
    let sym = |m: DMatrix<f64>| (&m + m.transpose()) * 0.5;
    let v2_part = sym(v2_part);
    let f_part = sym(f_part);
    let a = &v1_part + &v2_part + &f_part;
    Ok(HessianMatrix {
        a,
        v1_part,
        v2_part,
        f_part,
        meta: HessianMeta { basis: BasisKind::CmCosine, n, hurst: basis.params().hurst, gamma_hash: path_hash(ctx.gamma()) },
    })
}

fn bilinear(s: &DMatrix<f64>, u: &[f64], v: &[f64]) -> f64 {
    let n = u.len();
    let mut out = 0.0;
    for m in 0..n {
        for mp in 0..n {
            out += u[m] * s[(m, mp)] * v[mp];
        }
    }
    out
}

#[cfg(test)]
mod tests;
