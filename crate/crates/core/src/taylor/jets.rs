//! Second-order ε-jets of one Heun step.
//!
//! Along `z = γ + ε k` with `y = φ⁰ + ε c₁ + ε² c₂` the step output is again a
//! jet whose first coefficient is `J c₁ + s₁` and whose second is `J c₂ + s₂(c₁)`.
//! The sources `s₁`, `s₂` are read off by stepping jets with vanishing
//! higher coefficients, so every Taylor term is an exact ε-derivative of the
//! discrete scheme.

use nalgebra::DVector;

use super::context::{dvec, TaylorContext};
use crate::grid::SampledPath;

type Jet = [Vec<f64>; 3];

struct Step<'s> {
    dg: &'s [f64],
    dk: &'s [f64],
    dt: f64,
    eps_drift: bool,
}

impl TaylorContext<'_> {
    fn f_jet(&self, y: &Jet, st: &Step) -> Jet {
        let (n, d) = (self.state_dim(), self.noise_dim());
        let f = self.field;
        let mut s0 = vec![0.0; n * d];
        let mut s1 = vec![0.0; n * d];
        let mut s2 = vec![0.0; n * d];
        let mut tmp = vec![0.0; n * d];
        f.sigma(&y[0], &mut s0);
        f.sigma_dy(&y[0], &y[1], &mut s1);
        f.sigma_dy(&y[0], &y[2], &mut s2);
        f.sigma_dyy(&y[0], &y[1], &y[1], &mut tmp);
        for (a, b) in s2.iter_mut().zip(&tmp) {
            *a += 0.5 * b;
        }
        let row = |m: &[f64], i: usize, z: &[f64]| -> f64 { m[i * d..(i + 1) * d].iter().zip(z).map(|(a, b)| a * b).sum() };

        let mut b0 = vec![0.0; n];
        let mut b1 = vec![0.0; n];
        let mut b2 = vec![0.0; n];
        let mut t = vec![0.0; n];
        f.beta(0.0, &y[0], &mut b0);
        f.beta_dy(0.0, &y[0], &y[1], &mut b1);
        f.beta_dy(0.0, &y[0], &y[2], &mut b2);
        f.beta_dyy(0.0, &y[0], &y[1], &y[1], &mut t);
        for i in 0..n {
            b2[i] += 0.5 * t[i];
        }
        if st.eps_drift {
            f.beta_de(0.0, &y[0], &mut t);
            for i in 0..n {
                b1[i] += t[i];
            }
            f.beta_dey(0.0, &y[0], &y[1], &mut t);
            for i in 0..n {
                b2[i] += t[i];
            }
            f.beta_dee(0.0, &y[0], &mut t);
            for i in 0..n {
                b2[i] += 0.5 * t[i];
            }
        }

        let mut out: Jet = [vec![0.0; n], vec![0.0; n], vec![0.0; n]];
        for i in 0..n {
            out[0][i] = row(&s0, i, st.dg) + b0[i] * st.dt;
            out[1][i] = row(&s1, i, st.dg) + row(&s0, i, st.dk) + b1[i] * st.dt;
            out[2][i] = row(&s2, i, st.dg) + row(&s1, i, st.dk) + b2[i] * st.dt;
        }
        out
    }

    fn heun_jet(&self, y: &Jet, st: &Step) -> Jet {
        let f0 = self.f_jet(y, st);
        let ytil: Jet = std::array::from_fn(|o| y[o].iter().zip(&f0[o]).map(|(a, b)| a + b).collect());
        let f1 = self.f_jet(&ytil, st);
        std::array::from_fn(|o| (0..y[o].len()).map(|i| y[o][i] + 0.5 * (f0[o][i] + f1[o][i])).collect())
    }

    fn jet_pass(&self, dk: Option<&SampledPath>, eps_drift: bool, c1: Option<&SampledPath>, order: usize) -> Vec<DVector<f64>> {
        let (n, d) = (self.state_dim(), self.noise_dim());
        let zero_d = vec![0.0; d];
        (0..self.grid().steps())
            .map(|j| {
                let dg = self.gamma.increment(j, j + 1);
                let dkv = dk.map(|k| k.increment(j, j + 1)).unwrap_or_else(|| zero_d.clone());
                let st = Step { dg: &dg, dk: &dkv, dt: self.grid().dt(j), eps_drift };
                let y: Jet = [
                    self.phi0.point(j).to_vec(),
                    c1.map(|c| c.point(j).to_vec()).unwrap_or_else(|| vec![0.0; n]),
                    vec![0.0; n],
                ];
                dvec(&self.heun_jet(&y, &st)[order])
            })
            .collect()
    }

    /// Sources of the first-order term along direction `dk` (none means a
    /// pure ε-drift perturbation).
    pub(crate) fn first_sources(&self, dk: Option<&SampledPath>, eps_drift: bool) -> Vec<DVector<f64>> {
        self.jet_pass(dk, eps_drift, None, 1)
    }

    /// Sources of the second-order term given the first-order solution `c1`.
    pub(crate) fn second_sources(&self, c1: &SampledPath, dk: Option<&SampledPath>, eps_drift: bool) -> Vec<DVector<f64>> {
        self.jet_pass(dk, eps_drift, Some(c1), 2)
    }
}
