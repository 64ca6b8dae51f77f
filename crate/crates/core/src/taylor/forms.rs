//! Flow-form representations `M_t ∫₀^t M_s⁻¹ (…)` of the first and second
//! derivatives of the Itô map. All Young integrals here use the trapezoid
//! rule so that the integration by parts behind `R₁`/`R₂` holds exactly on the
//! grid.

use nalgebra::{DMatrix, DVector};

use super::context::{dvec, TaylorContext};
use crate::error::Result;
use crate::grid::SampledPath;

impl TaylorContext<'_> {
    fn minv_times(&self, l: usize, m: &DMatrix<f64>) -> DMatrix<f64> {
        self.flow.minv(l) * m
    }

    /// Trapezoid weights `½(A_l + A_{l+1}) Δz_l` for matrix integrands.
    fn trap_weights<'s>(
        &'s self,
        integrand: &'s [DMatrix<f64>],
        z: &'s SampledPath,
    ) -> impl Iterator<Item = DVector<f64>> + 's {
        (0..self.grid().steps()).map(move |l| (&integrand[l] + &integrand[l + 1]) * dvec(&z.increment(l, l + 1)) * 0.5)
    }

    /// `χ(k)_t = M_t ∫₀^t M_s⁻¹ σ(φ⁰_s) dk_s`.
    pub fn chi(&self, k: &SampledPath) -> Result<SampledPath> {
        self.check_driver(k, "direction")?;
        let p: Vec<DMatrix<f64>> = (0..k.len()).map(|l| self.minv_times(l, &self.sig[l])).collect();
        Ok(self.accumulate(self.trap_weights(&p, k)))
    }

    fn dsig_integrand(&self, c: &SampledPath) -> Vec<DMatrix<f64>> {
        (0..c.len()).map(|l| self.minv_times(l, &self.dsig_dir(l, c.point(l)))).collect()
    }

    fn v1_given(&self, f: &SampledPath, k: &SampledPath, chi_f: &SampledPath, chi_k: &SampledPath) -> SampledPath {
        let gf = self.dsig_integrand(chi_f);
        let gk = self.dsig_integrand(chi_k);
        self.accumulate(self.trap_weights(&gf, k).zip(self.trap_weights(&gk, f)).map(|(a, b)| a + b))
    }

    fn v2_given(&self, chi_f: &SampledPath, chi_k: &SampledPath) -> SampledPath {
        let len = chi_f.len();
        let q: Vec<DMatrix<f64>> =
            (0..len).map(|l| self.minv_times(l, &self.d2sig_dir(l, chi_f.point(l), chi_k.point(l)))).collect();
        let b: Vec<DVector<f64>> =
            (0..len).map(|l| self.flow.minv(l) * self.d2beta_dir(l, chi_f.point(l), chi_k.point(l))).collect();
        let dt: Vec<f64> = (0..len - 1).map(|l| self.grid().dt(l)).collect();
        self.accumulate(
            self.trap_weights(&q, &self.gamma).enumerate().map(|(l, w)| w + (&b[l] + &b[l + 1]) * (0.5 * dt[l])),
        )
    }

    /// The split `2ψ(f,k) = V₁(f,k) + V₂(f,k)`: `V₁` collects the `∇σ⟨χ, d·⟩`
    /// cross terms, `V₂` the second derivatives of the coefficients.
    pub fn v_forms(&self, f: &SampledPath, k: &SampledPath) -> Result<(SampledPath, SampledPath)> {
        let (cf, ck) = (self.chi(f)?, self.chi(k)?);
        Ok((self.v1_given(f, k, &cf, &ck), self.v2_given(&cf, &ck)))
    }

    /// `ψ(f,k) = ½(V₁ + V₂)(f,k)`, half the second derivative of `Ψ` at `γ`.
    pub fn psi(&self, f: &SampledPath, k: &SampledPath) -> Result<SampledPath> {
        let (v1, v2) = self.v_forms(f, k)?;
        Ok(v1.add(&v2)?.scale(0.5))
    }

    /// `R₁⟨f,k⟩ = M∫M⁻¹∇σ(φ⁰)⟨σ(φ⁰)f, dk⟩` and
    /// `R₂⟨f,k⟩ = M∫M⁻¹∇σ(φ⁰)⟨M∫d[M⁻¹σ(φ⁰)]f, dk⟩`.
    ///
    /// For `f₀ = k₀ = 0` these satisfy
    /// `V₁⟨f,k⟩ = R₁⟨f,k⟩ + R₁⟨k,f⟩ − R₂⟨f,k⟩ − R₂⟨k,f⟩`.
    pub fn r_forms(&self, f: &SampledPath, k: &SampledPath) -> Result<(SampledPath, SampledPath)> {
        self.check_driver(f, "first argument")?;
        self.check_driver(k, "second argument")?;
        let len = f.len();
        let n = self.state_dim();
        let a: Vec<DMatrix<f64>> = (0..len)
            .map(|l| {
                let sf = &self.sig[l] * dvec(f.point(l));
                self.minv_times(l, &self.dsig_dir(l, sf.as_slice()))
            })
            .collect();
        let p: Vec<DMatrix<f64>> = (0..len).map(|l| self.minv_times(l, &self.sig[l])).collect();
        let mut inner = DVector::zeros(n);
        let mut b = Vec::with_capacity(len);
        for l in 0..len {
            if l > 0 {
                let mid = (dvec(f.point(l - 1)) + dvec(f.point(l))) * 0.5;
                inner += (&p[l] - &p[l - 1]) * mid;
            }
            let v = self.flow.m(l) * &inner;
            b.push(self.minv_times(l, &self.dsig_dir(l, v.as_slice())));
        }
        let r1 = self.accumulate(self.trap_weights(&a, k));
        let r2 = self.accumulate(self.trap_weights(&b, k));
        Ok((r1, r2))
    }
}
