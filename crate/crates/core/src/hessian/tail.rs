use nalgebra::{DMatrix, DVector};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fbm::{cosine_mode, HurstParams};
use crate::grid::{pvar_exact, SampledPath};
use crate::stats::linear_fit;
use crate::taylor::TaylorContext;

/// Hilbert–Schmidt tail diagnostics of `R₁` on the interpolation basis.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HsTailReport {
    pub n_list: Vec<usize>,
    /// `Σ_{m,m' ≤ N} Σ_{i,i'} ‖R₁⟨f_{m,i}, f_{m',i'}⟩‖²_{p-var}` for each `N`.
    pub partial_sums: Vec<f64>,
    /// `Σ_{i,i'} ‖R₁⟨f_{m,i}, f_{m,i'}⟩‖²_{p-var}` for `m = 0, …, max N`.
    pub diagonal: Vec<f64>,
    /// Least-squares slope of `log diagonal_m` against `log(1 + m)` over `m ≥ fit_from`.
    pub fitted_tail_exponent: f64,
    pub fit_from: usize,
    /// `−(4/q − 2/p)`.
    pub reference_exponent: f64,
}

/// Partial sums and diagonal decay of `‖R₁⟨f_m, f_{m'}⟩‖²_{p-var}` over the
/// interpolation basis `f_{m,i} = √2 (1+m²)^{−1/(2q)} cos(mπ·) ε_i`.
pub fn hs_tail(ctx: &TaylorContext, params: &HurstParams, n_list: &[usize]) -> Result<HsTailReport> {
    let n_max = *n_list.iter().max().ok_or_else(|| Error::InvalidArgument("empty N list".into()))?;
    if n_max < 8 {
        return Err(Error::InvalidArgument("largest truncation must be at least 8".into()));
    }
    let (n, d) = (ctx.state_dim(), ctx.noise_dim());
    let grid = ctx.grid().clone();
    let len = grid.len();
    let steps = grid.steps();
    let times = grid.points().to_vec();
    let flow = ctx.flow();
    let delta = params.delta;
    let modes: Vec<Vec<f64>> = (0..=n_max)
        .map(|m| {
            let w = if m == 0 { 1.0 } else { (1.0 + (m * m) as f64).powf(-delta / 2.0) };
            times.iter().map(|&t| w * cosine_mode(m, t)).collect()
        })
        .collect();
    // a[i][i'][l] = M⁻¹_l ∇σ(φ⁰_l)⟨σ(φ⁰_l) ε_i⟩ ε_{i'}
    let a: Vec<Vec<Vec<DVector<f64>>>> = (0..d)
        .map(|i| {
            let per_l: Vec<DMatrix<f64>> = (0..len)
                .map(|l| {
                    let dir = ctx.sig[l].column(i).clone_owned();
                    flow.minv(l) * ctx.dsig_dir(l, dir.as_slice())
                })
                .collect();
            (0..d).map(|ip| per_l.iter().map(|m| m.column(ip).clone_owned()).collect()).collect()
        })
        .collect();

    let pairs: Vec<(usize, usize, usize, usize)> = (0..=n_max)
        .flat_map(|m| (0..=n_max).flat_map(move |mp| (0..d).flat_map(move |i| (0..d).map(move |ip| (m, mp, i, ip)))))
        .collect();
    let values: Vec<f64> = pairs
        .par_iter()
        .map(|&(m, mp, i, ip)| {
            let (f, k) = (&modes[m], &modes[mp]);
            let col = &a[i][ip];
            let mut acc = DVector::zeros(n);
            let mut vals = vec![0.0; len * n];
            for l in 0..steps {
                acc += (&col[l] * f[l] + &col[l + 1] * f[l + 1]) * (0.5 * (k[l + 1] - k[l]));
                let v = flow.m(l + 1) * &acc;
                vals[(l + 1) * n..(l + 2) * n].copy_from_slice(v.as_slice());
            }
            let path = SampledPath::new(grid.clone(), n, vals).expect("shape");
            let norm = pvar_exact(&path, params.p).map(|r| r.value).unwrap_or(f64::NAN);
            norm * norm
        })
        .collect();

    let idx = |m: usize, mp: usize, i: usize, ip: usize| ((m * (n_max + 1) + mp) * d + i) * d + ip;
    let mut partial_sums = Vec::with_capacity(n_list.len());
    for &cut in n_list {
        let mut s = 0.0;
        for m in 0..=cut {
            for mp in 0..=cut {
                for i in 0..d {
                    for ip in 0..d {
                        s += values[idx(m, mp, i, ip)];
                    }
                }
            }
        }
        partial_sums.push(s);
    }
    let diagonal: Vec<f64> =
        (0..=n_max).map(|m| (0..d).flat_map(|i| (0..d).map(move |ip| (i, ip))).map(|(i, ip)| values[idx(m, m, i, ip)]).sum()).collect();
    let fit_from = (n_max / 8).max(2);
    let (xs, ys): (Vec<f64>, Vec<f64>) =
        (fit_from..=n_max).filter(|&m| diagonal[m] > 0.0).map(|m| ((1.0 + m as f64).ln(), diagonal[m].ln())).unzip();
    let fitted_tail_exponent = if xs.len() >= 2 { linear_fit(&xs, &ys)?.slope } else { f64::NAN };
    Ok(HsTailReport {
        n_list: n_list.to_vec(),
        partial_sums,
        diagonal,
        fitted_tail_exponent,
        fit_from,
        reference_exponent: -(4.0 / params.q - 2.0 / params.p),
    })
}
