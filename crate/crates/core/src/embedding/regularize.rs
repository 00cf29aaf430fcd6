//! Convolution of catalog functions against tabulated kernels by direct quadrature.

use std::sync::Arc;

use crate::error::{Error, Result};
use crate::gevrey::catalog::CatalogFunction;
use crate::gevrey::{DerivativeOracle, Provenance, SampledFunction};
use crate::mollifier::{MollifierNet, MollifierTable};
use crate::quadrature::{composite, gauss_legendre, uniform_breaks};

/// `∫ K(t) g(t) dt ≈ Σ c_i g(t_i)` with nodes sorted by `t`.
#[derive(Clone, Debug)]
pub struct KernelNodes {
    pub label: String,
    pub t: Vec<f64>,
    pub c: Vec<f64>,
    /// Bound on the error of each `c_i`.
    pub err: Vec<f64>,
    /// Bound on the kernel mass left outside the nodes.
    pub tail: f64,
}

impl KernelNodes {
    fn sorted(label: String, mut rows: Vec<(f64, f64, f64)>, tail: f64) -> Self {
        rows.sort_by(|a, b| a.0.total_cmp(&b.0));
        Self {
            label,
            t: rows.iter().map(|r| r.0).collect(),
            c: rows.iter().map(|r| r.1).collect(),
            err: rows.iter().map(|r| r.2).collect(),
            tail,
        }
    }

    /// `φ_n = n φ^n(n ·)` from the unscaled table of `φ^n`.
    pub fn from_table(table: &MollifierTable) -> Self {
        let r = if table.scale == 1.0 { table.rescale() } else { table.clone() };
        let rows = (0..r.len()).map(|i| (r.t[i], r.weights[i] * r.phi[i], r.weights[i] * r.err[i])).collect();
        Self::sorted(format!("{} m={} n={}", r.key.kind, r.key.m, r.key.n), rows, r.certificate.truncation[0])
    }

    /// The fixed kernel `e^{−t²}/√π`.
    pub fn gaussian() -> Self {
        let rule = composite(&uniform_breaks(-9.0, 9.0, 144), &gauss_legendre::<f64>(16));
        let norm = std::f64::consts::PI.sqrt();
        let rows = rule
            .x
            .iter()
            .zip(&rule.w)
            .map(|(&t, &w)| {
                let c = w * (-t * t).exp() / norm;
                (t, c, 4.0 * f64::EPSILON * c.abs())
            })
            .collect();
        // ∫_{|t|>9} e^{−t²}/√π < e^{−81}
        Self::sorted("gaussian".into(), rows, 1e-35)
    }

    /// The kernel moved to `K(t − a)`.
    pub fn shifted(&self, a: f64) -> Self {
        Self {
            label: format!("{} shifted by {a}", self.label),
            t: self.t.iter().map(|t| t + a).collect(),
            ..self.clone()
        }
    }

    pub fn mass(&self) -> f64 {
        self.c.iter().sum()
    }

    /// Nodes `t_i` with `x − t_i` inside `(lo, hi)`.
    fn window(&self, x: f64, support: Option<(f64, f64)>) -> std::ops::Range<usize> {
        match support {
            Some((lo, hi)) => {
                let a = self.t.partition_point(|&t| t <= x - hi);
                let b = self.t.partition_point(|&t| t < x - lo);
                a..b.max(a)
            }
            None => 0..self.t.len(),
        }
    }
}

/// `(ψ ∗ K)^{(α)} = ψ^{(α)} ∗ K`, optionally minus `ψ^{(α)}`.
#[derive(Clone, Debug)]
pub struct Convolved {
    pub psi: CatalogFunction,
    pub kernel: Arc<KernelNodes>,
    pub subtract: bool,
}

impl Convolved {
    pub fn new(psi: CatalogFunction, kernel: Arc<KernelNodes>) -> Self {
        Self { psi, kernel, subtract: false }
    }

    /// The oracle of `ψ ∗ K − ψ`.
    pub fn difference(psi: CatalogFunction, kernel: Arc<KernelNodes>) -> Self {
        Self { psi, kernel, subtract: true }
    }

    /// Values and error bounds for orders `0..=s`.
    pub fn derivatives_with_error(&self, x: f64, s: usize) -> Result<(Vec<f64>, Vec<f64>)> {
        let mut acc = vec![0.0; s + 1];
        let mut err = vec![0.0; s + 1];
        let mut peak = vec![0.0f64; s + 1];
        let k = &self.kernel;
        if !self.psi.is_zero() {
            for i in k.window(x, self.psi.support()) {
                let d = self.psi.derivatives(x - k.t[i], s)?;
                for a in 0..=s {
                    acc[a] += k.c[i] * d[a];
                    err[a] += k.err[i] * d[a].abs();
                    peak[a] = peak[a].max(d[a].abs());
                }
            }
            if self.subtract {
                let d: Vec<f64> = self.psi.derivatives(x, s)?;
                for a in 0..=s {
                    acc[a] -= d[a];
                }
            }
        }
        for a in 0..=s {
            err[a] += k.tail * peak[a];
        }
        Ok((acc, err))
    }
}

impl DerivativeOracle<f64> for Convolved {
    fn derivatives(&self, x: f64, s: usize) -> Result<Vec<f64>> {
        Ok(self.derivatives_with_error(x, s)?.0)
    }

    fn provenance(&self) -> Provenance {
        Provenance::Convolution
    }

    fn label(&self) -> String {
        let op = if self.subtract { " − ψ" } else { "" };
        format!("{:?} ∗ [{}]{op}", self.psi, self.kernel.label)
    }
}

fn check_inside(psi: &CatalogFunction, mu: f64) -> Result<()> {
    psi.validate()?;
    if let Some((lo, hi)) = psi.support() {
        if lo < -mu || hi > mu {
            return Err(Error::GridMismatch(format!("support [{lo}, {hi}] leaves the grid [-{mu}, {mu}]")));
        }
    }
    Ok(())
}

/// `ψ ∗ φ_n` sampled on `[-mu, mu]` for each `n`.
pub fn regularize(
    psi: &CatalogFunction,
    net: &MollifierNet,
    ns: &[u64],
    mu: f64,
    intervals: usize,
    s_max: usize,
) -> Result<Vec<(u64, SampledFunction<f64>)>> {
    check_inside(psi, mu)?;
    ns.iter()
        .map(|&n| {
            let kernel = Arc::new(KernelNodes::from_table(&*net.get(n)?));
            let f = SampledFunction::new(Arc::new(Convolved::new(psi.clone(), kernel)), mu, intervals, s_max)?;
            Ok((n, f))
        })
        .collect()
}

/// `ψ ∗ K − ψ` sampled on `[-mu, mu]`.
pub fn regularization_error(
    psi: &CatalogFunction,
    kernel: Arc<KernelNodes>,
    mu: f64,
    intervals: usize,
    s_max: usize,
) -> Result<SampledFunction<f64>> {
    check_inside(psi, mu)?;
    SampledFunction::new(Arc::new(Convolved::difference(psi.clone(), kernel)), mu, intervals, s_max)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mollifier::{GridSpec, MollifierKind};

    fn bump2() -> CatalogFunction {
        CatalogFunction::bump(2.0)
    }

    fn max_dev(f: &SampledFunction<f64>, psi: &CatalogFunction) -> f64 {
        let rows = f.table().unwrap();
        rows.iter()
            .enumerate()
            .map(|(i, r)| (r[0] - DerivativeOracle::<f64>::derivatives(psi, f.x(i), 0).unwrap()[0]).abs())
            .fold(0.0, f64::max)
    }

    #[test]
    fn deviation_shrinks_with_n() {
        let net = MollifierNet::new(MollifierKind::Pow, 2.0, GridSpec::default());
        let psi = bump2();
        let r = regularize(&psi, &net, &[8, 64], 1.5, 128, 1).unwrap();
        let (d8, d64) = (max_dev(&r[0].1, &psi), max_dev(&r[1].1, &psi));
        assert!(d64 < d8, "{d64} vs {d8}");
        assert!(d64 < 1e-4);
    }

    #[test]
    fn zero_function_gives_zeros() {
        let net = MollifierNet::new(MollifierKind::Der, 2.0, GridSpec::default());
        let r = regularize(&CatalogFunction::Constant { value: 0.0 }, &net, &[4], 1.0, 16, 2).unwrap();
        assert!(r[0].1.table().unwrap().iter().all(|row| row.iter().all(|&v| v == 0.0)));
    }

    #[test]
    fn unit_constant_keeps_unit_value() {
        let net = MollifierNet::new(MollifierKind::Pow, 2.0, GridSpec::default());
        let k = Arc::new(KernelNodes::from_table(&net.get(16).unwrap()));
        let c = Convolved::new(CatalogFunction::Constant { value: 1.0 }, k);
        let (v, e) = c.derivatives_with_error(0.0, 0).unwrap();
        assert!((v[0] - 1.0).abs() <= e[0] + 1e-13, "{} ± {}", v[0], e[0]);
    }

    #[test]
    fn support_outside_grid_is_rejected() {
        let net = MollifierNet::new(MollifierKind::Pow, 2.0, GridSpec::default());
        let psi = CatalogFunction::Bump { order: 1.5, center: 0.8, half_width: 0.5 };
        assert!(matches!(regularize(&psi, &net, &[4], 1.0, 16, 1), Err(Error::GridMismatch(_))));
    }

    #[test]
    fn gaussian_kernel_has_unit_mass() {
        assert!((KernelNodes::gaussian().mass() - 1.0).abs() < 1e-14);
    }

    #[test]
    fn linearity_and_translation() {
        let net = MollifierNet::new(MollifierKind::Der, 2.0, GridSpec::default());
        let k = Arc::new(KernelNodes::from_table(&net.get(9).unwrap()));
        let a = Convolved::new(bump2(), k.clone());
        let b = Convolved::new(CatalogFunction::Bump { order: 2.0, center: 0.25, half_width: 1.0 }, k);
        for &x in &[-0.6, 0.0, 0.3, 0.9] {
            let (va, ea) = a.derivatives_with_error(x, 2).unwrap();
            let (vb, eb) = b.derivatives_with_error(x + 0.25, 2).unwrap();
            for s in 0..=2 {
                assert!((va[s] - vb[s]).abs() <= ea[s] + eb[s] + 1e-12 * va[s].abs().max(1.0), "x={x} s={s}");
            }
        }
    }
}
