//! Column documentation for every artifact, written to `SCHEMA.md`.

use crate::config::ExperimentKind;

/// `(file, description, columns)` for each artifact of an experiment, in the
/// order they are written. JSON and SVG files list no columns.
pub fn artifacts(kind: ExperimentKind) -> &'static [(&'static str, &'static str, &'static str)] {
    use ExperimentKind::*;
    match kind {
        Simulate => &[
            ("paths.csv", "first (up to 16) sampled fBm paths", "sample,t,x_0..x_{d-1}"),
            ("increment_variance.csv", "empirical increment variance against |t−s|^{2H}", "s,t,empirical,expected,relative_error"),
        ],
        Lift => &[
            ("level1.csv", "first-level increments of the lifted sample", "i,j,e0..e{d-1} (grid indices i ≤ j)"),
            ("level2.csv", "second-level increments, tensor flattened row-major", "i,j,e0..e{d²-1}"),
            ("lift_summary.json", "Chen residual and ξ-norm of the lift", ""),
        ],
        Pvar => &[("pvar.csv", "cosine corpus against the closed form 2n^{1/p}", "n,p,closed_form,dp_value,difference")],
        Rde => &[
            ("rde_paths.csv", "extrapolated solution for one fBm driver at each ε", "eps,t,y_0..y_{n-1}"),
            ("rde_ladder.csv", "refinement ladder per ε", "eps,d1,d2,ratio,cauchy"),
        ],
        TaylorSlope => &[
            ("remainder_norms.csv", "ensemble-mean remainder norms", "order,eps,norm"),
            ("slopes.csv", "fitted log-log slopes", "order,slope,r_squared"),
            ("slopes.svg", "log remainder norm against log ε", ""),
        ],
        Hessian => &[
            ("hessian.csv", "truncated Hessian matrix, one row per line", "h_0..h_{N-1}"),
            ("eigenvalues.csv", "Hessian spectrum, ascending", "index,eigenvalue"),
            ("hs_partial_sums.csv", "partial sums of ‖R₁⟨f_m,f_m'⟩‖² over the interpolation basis", "n,partial_sum"),
            ("hs_diagonal.csv", "diagonal terms Σ_{i,i'}‖R₁⟨f_{m,i},f_{m,i'}⟩‖²", "m,value"),
            ("hessian_summary.json", "metadata, minimum eigenvalue, fitted tail exponent", ""),
            ("hs_partial_sums.svg", "partial sums against N", ""),
        ],
        Laplace => &[
            ("mc_shifted.csv", "importance-sampled Monte Carlo around γ", "eps,J_hat,se,n,log_J_hat,rel_se"),
            ("mc_plain.csv", "plain Monte Carlo", "eps,J_hat,se,n,log_J_hat,rel_se"),
            ("laplace_report.json", "γ, a, c, α₀, Hessian spectrum and the expansion fit", ""),
            ("ldp.svg", "−ε² log Ĵ(ε) against ε with the level a", ""),
        ],
        ScaleTest => &[
            ("short_time.csv", "first coordinate of V_T − V_0 and of Y^{T^H}_1 − Y_0", "sample,direct,rescaled"),
            ("short_time_ks.json", "two-sample KS statistic and p-value", ""),
        ],
        Kappa => &[("kappa.csv", "exponent ladder", "index,kappa,n1,n2")],
    }
}

pub fn schema_markdown(kinds: &[ExperimentKind]) -> String {
    let mut out = String::from("# Output schema\n\nEvery run directory also holds `manifest.json` and this file.\n");
    for &k in kinds {
        out.push_str(&format!("\n## {k}\n\n| file | contents | columns |\n|---|---|---|\n"));
        for (file, what, cols) in artifacts(k) {
            let cols = if cols.is_empty() { "—".to_string() } else { format!("`{cols}`") };
            out.push_str(&format!("| `{file}` | {what} | {cols} |\n"));
        }
    }
    out
}
