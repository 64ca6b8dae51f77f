//! Executes a resolved configuration and writes its artifacts.

use std::fs;
use std::path::{Path, PathBuf};
use std::sync::Arc;

use anyhow::{Context, Result};
use rough_laplace::fbm::{CmBasis, FbmSampler};
use rough_laplace::grid::{cosine_pvar, fmt17, pvar_exact, SampledPath, TimeGrid};
use rough_laplace::hessian::{hessian_matrix, hs_tail};
use rough_laplace::laplace::{
    expansion_constants, expansion_fit, kappa_ladder, mc_laplace, minimize_f_lambda, short_time_ensembles,
    LaplaceProblem, McConfig, McRow, OptConfig,
};
use rough_laplace::rough::{chen_residual, lift, xi_norm};
use rough_laplace::stats::{ks_two_sample, variance};
use rough_laplace::taylor::{solve_rde, taylor_remainder_slope, RdeOptions, TaylorContext};
use serde::Serialize;
use serde_json::json;

use crate::config::{ExperimentKind, ResolvedConfig};
use crate::schema::{artifacts, schema_markdown};
use crate::svg::{line_chart, Series};

#[derive(Debug, Serialize)]
struct Manifest<'a> {
    tool: &'static str,
    version: &'static str,
    config_hash: &'a str,
    config: &'a ResolvedConfig,
    artifacts: Vec<&'static str>,
    status: &'static str,
    #[serde(skip_serializing_if = "Option::is_none")]
    error: Option<String>,
}

/// Directory name for a configuration: kind plus the first 16 hex digits of its hash.
pub fn run_dir_name(cfg: &ResolvedConfig) -> String {
    format!("{}-{}", cfg.kind, &cfg.hash()[..16])
}

struct Out {
    dir: PathBuf,
}

impl Out {
    fn csv(&self, name: &str, header: &[&str], rows: impl IntoIterator<Item = Vec<String>>) -> Result<()> {
        let mut w = csv::Writer::from_path(self.dir.join(name)).with_context(|| format!("creating {name}"))?;
        w.write_record(header)?;
        for r in rows {
            w.write_record(&r)?;
        }
        w.flush()?;
        Ok(())
    }

    fn json<T: Serialize>(&self, name: &str, value: &T) -> Result<()> {
        let mut text = serde_json::to_string_pretty(value)?;
        text.push('\n');
        fs::write(self.dir.join(name), text).with_context(|| format!("writing {name}"))
    }

    fn text(&self, name: &str, body: &str) -> Result<()> {
        fs::write(self.dir.join(name), body).with_context(|| format!("writing {name}"))
    }

    fn file(&self, name: &str) -> Result<fs::File> {
        fs::File::create(self.dir.join(name)).with_context(|| format!("creating {name}"))
    }
}

fn f17(v: f64) -> String {
    fmt17(v)
}

/// Runs one experiment under `out_root`. The manifest is written before any
/// artifact with status `running` and rewritten as `complete` or `failed`.
pub fn run(cfg: &ResolvedConfig, out_root: &Path) -> Result<PathBuf> {
    let hash = cfg.hash();
    let dir = out_root.join(run_dir_name(cfg));
    fs::create_dir_all(&dir).with_context(|| format!("creating {}", dir.display()))?;
    let declared: Vec<&'static str> = artifacts(cfg.kind).iter().map(|a| a.0).collect();
    let manifest = |status: &'static str, error: Option<String>| Manifest {
        tool: "rough-laplace",
        version: env!("CARGO_PKG_VERSION"),
        config_hash: &hash,
        config: cfg,
        artifacts: declared.clone(),
        status,
        error,
    };
    let out = Out { dir: dir.clone() };
    out.json("manifest.json", &manifest("running", None))?;
    out.text("SCHEMA.md", &schema_markdown(&[cfg.kind]))?;
    match execute(cfg, &out) {
        Ok(()) => {
            out.json("manifest.json", &manifest("complete", None))?;
            Ok(dir)
        }
        Err(e) => {
            out.json("manifest.json", &manifest("failed", Some(format!("{e:#}"))))?;
            Err(e)
        }
    }
}

fn execute(cfg: &ResolvedConfig, out: &Out) -> Result<()> {
    let grid = Arc::new(TimeGrid::uniform(cfg.grid_steps)?);
    match cfg.kind {
        ExperimentKind::Simulate => simulate(cfg, out, grid),
        ExperimentKind::Lift => lift_run(cfg, out, grid),
        ExperimentKind::Pvar => pvar_run(cfg, out),
        ExperimentKind::Rde => rde_run(cfg, out, grid),
        ExperimentKind::TaylorSlope => taylor_run(cfg, out, grid),
        ExperimentKind::Hessian => hessian_run(cfg, out, grid),
        ExperimentKind::Laplace => laplace_run(cfg, out, grid),
        ExperimentKind::ScaleTest => scale_run(cfg, out),
        ExperimentKind::Kappa => kappa_run(cfg, out),
    }
}

fn simulate(cfg: &ResolvedConfig, out: &Out, grid: Arc<TimeGrid>) -> Result<()> {
    use rayon::prelude::*;
    let sampler = FbmSampler::new(grid.clone(), cfg.hurst)?;
    let paths: Vec<SampledPath> =
        (0..cfg.samples as u64).into_par_iter().map(|i| sampler.sample_indexed(cfg.d, cfg.seed, i)).collect();
    let mut header = vec!["sample".to_string(), "t".to_string()];
    header.extend((0..cfg.d).map(|k| format!("x_{k}")));
    let header: Vec<&str> = header.iter().map(String::as_str).collect();
    let rows = paths.iter().take(16).enumerate().flat_map(|(s, p)| {
        (0..p.len()).map(move |j| {
            let mut r = vec![s.to_string(), f17(p.times()[j])];
            r.extend(p.point(j).iter().map(|v| f17(*v)));
            r
        })
    });
    out.csv("paths.csv", &header, rows)?;
    let m = cfg.grid_steps;
    let pairs = [(0, m), (0, m / 2), (m / 4, 3 * m / 4), (m / 2, m / 2 + 1), (m - 1, m)];
    let rows = pairs.iter().filter(|(s, t)| s < t).map(|&(s, t)| {
        let incs: Vec<f64> = paths.iter().map(|p| p.point(t)[0] - p.point(s)[0]).collect();
        let (ts, tt) = (grid.points()[s], grid.points()[t]);
        let expected = (tt - ts).powf(2.0 * cfg.hurst);
        let emp = variance(&incs);
        vec![f17(ts), f17(tt), f17(emp), f17(expected), f17((emp - expected) / expected)]
    });
    out.csv("increment_variance.csv", &["s", "t", "empirical", "expected", "relative_error"], rows)
}

fn lift_run(cfg: &ResolvedConfig, out: &Out, grid: Arc<TimeGrid>) -> Result<()> {
    let x = FbmSampler::new(grid, cfg.hurst)?.sample_indexed(cfg.d, cfg.seed, 0);
    let rp = lift(&x, cfg.level)?;
    rp.write_level_csv(1, out.file("level1.csv")?)?;
    rp.write_level_csv(2, out.file("level2.csv")?)?;
    let xi = xi_norm(&rp, cfg.p)?;
    out.json(
        "lift_summary.json",
        &json!({ "level": cfg.level, "chen_residual": chen_residual(&rp), "xi_norm": xi.value, "xi_per_level": xi.per_level }),
    )
}

fn pvar_run(cfg: &ResolvedConfig, out: &Out) -> Result<()> {
    let mut rows = Vec::new();
    for n in 1..=16u32 {
        let g = Arc::new(TimeGrid::new((0..=n).map(|l| l as f64 / n as f64).collect())?);
        let path = SampledPath::scalar(g, |t| (n as f64 * std::f64::consts::PI * t).cos() - 1.0);
        for &p in &cfg.p_list {
            let closed = cosine_pvar(n, p)?;
            let dp = pvar_exact(&path, p)?.value;
            rows.push(vec![n.to_string(), f17(p), f17(closed), f17(dp), f17(dp - closed)]);
        }
    }
    out.csv("pvar.csv", &["n", "p", "closed_form", "dp_value", "difference"], rows)
}

fn rde_run(cfg: &ResolvedConfig, out: &Out, grid: Arc<TimeGrid>) -> Result<()> {
    let field = cfg.field.build()?;
    let x = FbmSampler::new(grid, cfg.hurst)?.sample_indexed(cfg.d, cfg.seed, 0);
    let mut paths = Vec::new();
    let mut ladder = Vec::new();
    for &eps in &cfg.eps_list {
        let sol = solve_rde(field.as_ref(), eps, &x, None, &cfg.y0, RdeOptions::default())?;
        for j in 0..sol.path.len() {
            let mut r = vec![f17(eps), f17(sol.path.times()[j])];
            r.extend(sol.path.point(j).iter().map(|v| f17(*v)));
            paths.push(r);
        }
        ladder.push(vec![f17(eps), f17(sol.ladder[0]), f17(sol.ladder[1]), f17(sol.ratio), sol.cauchy.to_string()]);
    }
    let mut header = vec!["eps".to_string(), "t".to_string()];
    header.extend((0..cfg.n).map(|k| format!("y_{k}")));
    let header: Vec<&str> = header.iter().map(String::as_str).collect();
    out.csv("rde_paths.csv", &header, paths)?;
    out.csv("rde_ladder.csv", &["eps", "d1", "d2", "ratio", "cauchy"], ladder)
}

/// A fixed smooth Cameron–Martin shift built from the first basis elements.
fn reference_shift(cfg: &ResolvedConfig, grid: Arc<TimeGrid>) -> Result<SampledPath> {
    let basis = CmBasis::new(grid, cfg.params(), cfg.d, 2)?;
    let coeffs: Vec<f64> = (0..basis.len()).map(|a| 0.3 * (-1f64).powi(a as i32) / (1 + a) as f64).collect();
    Ok(basis.path(&coeffs)?)
}

fn taylor_run(cfg: &ResolvedConfig, out: &Out, grid: Arc<TimeGrid>) -> Result<()> {
    let field = cfg.field.build()?;
    let gamma = reference_shift(cfg, grid.clone())?;
    let ctx = TaylorContext::new(field.as_ref(), gamma, &cfg.y0)?;
    let sampler = FbmSampler::new(grid, cfg.hurst)?;
    let drivers: Vec<SampledPath> = (0..cfg.drivers as u64).map(|i| sampler.sample_indexed(cfg.d, cfg.seed, i)).collect();
    let mut norms = Vec::new();
    let mut slopes = Vec::new();
    let mut series = Vec::new();
    for order in [1, 2] {
        let rep = taylor_remainder_slope(&ctx, &drivers, order, &cfg.eps_list, cfg.p)?;
        for (e, v) in rep.eps_list.iter().zip(&rep.norms) {
            norms.push(vec![order.to_string(), f17(*e), f17(*v)]);
        }
        slopes.push(vec![order.to_string(), f17(rep.slope), f17(rep.r_squared)]);
        series.push(Series {
            name: format!("m = {order}, slope {:.3}", rep.slope),
            points: rep.eps_list.iter().zip(&rep.norms).map(|(e, v)| (e.ln(), v.ln())).collect(),
        });
    }
    out.csv("remainder_norms.csv", &["order", "eps", "norm"], norms)?;
    out.csv("slopes.csv", &["order", "slope", "r_squared"], slopes)?;
    out.text("slopes.svg", &line_chart("Taylor remainder", "log ε", "log ‖remainder‖", &series))
}

fn hessian_run(cfg: &ResolvedConfig, out: &Out, grid: Arc<TimeGrid>) -> Result<()> {
    let field = cfg.field.build()?;
    let f = cfg.f.build(cfg.n)?;
    let params = cfg.params();
    let basis = CmBasis::new(grid.clone(), params, cfg.d, cfg.truncation / cfg.d)?;
    let gamma = reference_shift(cfg, grid)?;
    let ctx = TaylorContext::new(field.as_ref(), gamma, &cfg.y0)?;
    let h = hessian_matrix(f.as_ref(), &ctx, &basis, cfg.truncation)?;
    h.write_csv(out.file("hessian.csv")?)?;
    let eigs = h.eigenvalues();
    out.csv("eigenvalues.csv", &["index", "eigenvalue"], eigs.iter().enumerate().map(|(i, v)| vec![i.to_string(), f17(*v)]))?;
    let tail = hs_tail(&ctx, &params, &cfg.hs_truncations)?;
    out.csv(
        "hs_partial_sums.csv",
        &["n", "partial_sum"],
        tail.n_list.iter().zip(&tail.partial_sums).map(|(n, s)| vec![n.to_string(), f17(*s)]),
    )?;
    out.csv("hs_diagonal.csv", &["m", "value"], tail.diagonal.iter().enumerate().map(|(m, v)| vec![m.to_string(), f17(*v)]))?;
    out.json(
        "hessian_summary.json",
        &json!({
            "meta": h.meta,
            "min_eigenvalue": h.min_eig(),
            "frobenius": h.frobenius(),
            "asymmetry": h.asymmetry(),
            "hs_tail": tail,
        }),
    )?;
    let pts = tail.n_list.iter().zip(&tail.partial_sums).map(|(n, s)| (*n as f64, *s)).collect();
    out.text("hs_partial_sums.svg", &line_chart("HS partial sums of R₁", "N", "partial sum", &[Series { name: "Σ ‖R₁‖²".into(), points: pts }]))
}

fn mc_rows(table: &[McRow]) -> Vec<Vec<String>> {
    table
        .iter()
        .map(|r| vec![f17(r.eps), f17(r.j_hat), f17(r.se), r.n.to_string(), f17(r.log_j_hat), f17(r.rel_se)])
        .collect()
}

fn laplace_run(cfg: &ResolvedConfig, out: &Out, grid: Arc<TimeGrid>) -> Result<()> {
    let field = cfg.field.build()?;
    let f = cfg.f.build(cfg.n)?;
    let g = cfg.g.build(cfg.n)?;
    let basis = CmBasis::new(grid, cfg.params(), cfg.d, cfg.truncation / cfg.d)?;
    let problem = LaplaceProblem::new(field.as_ref(), f.as_ref(), g.as_ref(), &basis, &cfg.y0)?;
    let min = minimize_f_lambda(&problem, &OptConfig { seed: cfg.seed, ..OptConfig::default() })?;
    let mc = |tag: u64| McConfig { samples: cfg.samples, seed: cfg.seed.wrapping_add(tag) };
    let mut report = expansion_constants(&problem, &min, mc(1))?;
    let shifted = mc_laplace(&problem, &cfg.eps_list, Some(&min.gamma.coeffs), mc(2))?;
    let plain = mc_laplace(&problem, &cfg.eps_list, None, mc(3))?;
    report.fit = Some(expansion_fit(&shifted, report.f_lambda_min, report.c_coef, cfg.fit_degree, Some((report.alpha0, report.alpha0_se)))?);
    let header = ["eps", "J_hat", "se", "n", "log_J_hat", "rel_se"];
    out.csv("mc_shifted.csv", &header, mc_rows(&shifted))?;
    out.csv("mc_plain.csv", &header, mc_rows(&plain))?;
    out.json("laplace_report.json", &report)?;
    let level = |t: &[McRow]| t.iter().map(|r| (r.eps, -r.eps * r.eps * r.log_j_hat)).collect::<Vec<_>>();
    let a = report.f_lambda_min;
    let series = [
        Series { name: "shifted".into(), points: level(&shifted) },
        Series { name: "plain".into(), points: level(&plain) },
        Series { name: "a = F_Λ(γ)".into(), points: cfg.eps_list.iter().map(|e| (*e, a)).collect() },
    ];
    out.text("ldp.svg", &line_chart("Large-deviation level", "ε", "−ε² log Ĵ(ε)", &series))
}

fn scale_run(cfg: &ResolvedConfig, out: &Out) -> Result<()> {
    let field = cfg.field.build()?;
    let coarse = (cfg.horizon * cfg.grid_steps as f64).round() as usize;
    let (a, b) = short_time_ensembles(field.as_ref(), cfg.hurst, cfg.horizon, &cfg.y0, cfg.grid_steps, coarse, cfg.samples, cfg.seed)?;
    out.csv(
        "short_time.csv",
        &["sample", "direct", "rescaled"],
        a.iter().zip(&b).enumerate().map(|(i, (x, y))| vec![i.to_string(), f17(*x), f17(*y)]),
    )?;
    let ks = ks_two_sample(&a, &b)?;
    let eps = cfg.horizon.powf(cfg.hurst);
    out.json("short_time_ks.json", &json!({ "horizon": cfg.horizon, "eps": eps, "statistic": ks.statistic, "p_value": ks.p_value }))
}

fn kappa_run(cfg: &ResolvedConfig, out: &Out) -> Result<()> {
    let ladder = kappa_ladder(cfg.hurst, cfg.count)?;
    out.csv(
        "kappa.csv",
        &["index", "kappa", "n1", "n2"],
        ladder.entries.iter().enumerate().map(|(i, e)| vec![i.to_string(), f17(e.value), e.n1.to_string(), e.n2.to_string()]),
    )
}

