//! Gauss–Legendre nodes and composite panel rules.

use crate::scalar::Real;

/// Nodes and weights of a quadrature rule.
#[derive(Clone, Debug)]
pub struct Rule<T> {
    pub x: Vec<T>,
    pub w: Vec<T>,
}

impl<T: Real> Rule<T> {
    /// `Σ w_i f(x_i)`.
    pub fn integrate<F: FnMut(T) -> T>(&self, mut f: F) -> T {
        self.x.iter().zip(&self.w).fold(T::zero(), |acc, (&x, &w)| acc + w * f(x))
    }

    pub fn len(&self) -> usize {
        self.x.len()
    }

    pub fn is_empty(&self) -> bool {
        self.x.is_empty()
    }
}

/// `order`-point Gauss–Legendre rule on `[-1, 1]`, nodes ascending.
pub fn gauss_legendre<T: Real>(order: usize) -> Rule<T> {
    assert!(order >= 1, "rule order must be positive");
    let n = order;
    let mut x = vec![0.0f64; n];
    let mut w = vec![0.0f64; n];
    for i in 0..n.div_ceil(2) {
        let mut z = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (p, d) = legendre_with_derivative(n, z);
            dp = d;
            let dz = p / d;
            z -= dz;
            if dz.abs() < 1e-16 {
                break;
            }
        }
        let (_, d) = legendre_with_derivative(n, z);
        if d != 0.0 {
            dp = d;
        }
        let wi = 2.0 / ((1.0 - z * z) * dp * dp);
        x[i] = -z;
        x[n - 1 - i] = z;
        w[i] = wi;
        w[n - 1 - i] = wi;
    }
    if n % 2 == 1 {
        x[n / 2] = 0.0;
    }
    Rule { x: x.into_iter().map(T::of).collect(), w: w.into_iter().map(T::of).collect() }
}

fn legendre_with_derivative(n: usize, z: f64) -> (f64, f64) {
    let mut p0 = 1.0;
    let mut p1 = z;
    for k in 2..=n {
        let p2 = ((2 * k - 1) as f64 * z * p1 - (k - 1) as f64 * p0) / k as f64;
        p0 = p1;
        p1 = p2;
    }
    let d = n as f64 * (z * p1 - p0) / (z * z - 1.0);
    (p1, d)
}

/// Composite rule over consecutive breakpoints, `base` mapped onto each panel.
pub fn composite<T: Real>(breaks: &[T], base: &Rule<T>) -> Rule<T> {
    let half = T::of(0.5);
    let mut x = Vec::with_capacity(base.len() * breaks.len());
    let mut w = Vec::with_capacity(base.len() * breaks.len());
    for pair in breaks.windows(2) {
        let (a, b) = (pair[0], pair[1]);
        let c = half * (a + b);
        let h = half * (b - a);
        for (&xi, &wi) in base.x.iter().zip(&base.w) {
            x.push(c + h * xi);
            w.push(h * wi);
        }
    }
    Rule { x, w }
}

/// `panels` equal panels on `[a, b]`.
pub fn uniform_breaks<T: Real>(a: T, b: T, panels: usize) -> Vec<T> {
    let p = panels.max(1);
    (0..=p).map(|i| a + (b - a) * T::of_usize(i) / T::of_usize(p)).collect()
}

/// Breakpoints on `[a, b]` with panel width at most `h`, always including `extra` points inside.
pub fn breaks_with<T: Real>(a: T, b: T, h: T, extra: &[T]) -> Vec<T> {
    let mut pts: Vec<T> = vec![a, b];
    pts.extend(extra.iter().copied().filter(|&e| e > a && e < b));
    pts.sort_by(|p, q| p.partial_cmp(q).expect("finite breakpoints"));
    pts.dedup();
    let mut out = vec![pts[0]];
    for pair in pts.windows(2) {
        let len = pair[1] - pair[0];
        let k = (len / h).ceil().to_usize().unwrap_or(1).max(1);
        for i in 1..=k {
            out.push(pair[0] + len * T::of_usize(i) / T::of_usize(k));
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rule_integrates_polynomials_exactly() {
        for n in [1usize, 2, 5, 16, 24, 40] {
            let r: Rule<f64> = gauss_legendre(n);
            for deg in 0..(2 * n) {
                let exact = if deg % 2 == 1 { 0.0 } else { 2.0 / (deg as f64 + 1.0) };
                let got = r.integrate(|x| x.powi(deg as i32));
                assert!((got - exact).abs() < 1e-14, "n={n} deg={deg} got={got}");
            }
        }
    }

    #[test]
    fn nodes_are_sorted_and_symmetric() {
        let r: Rule<f64> = gauss_legendre(17);
        for i in 0..17 {
            assert!((r.x[i] + r.x[16 - i]).abs() < 1e-15);
            assert_eq!(r.w[i], r.w[16 - i]);
        }
        assert!(r.x.windows(2).all(|p| p[0] < p[1]));
    }

    #[test]
    fn composite_rule_handles_oscillation() {
        let base = gauss_legendre::<f64>(16);
        let r = composite(&uniform_breaks(0.0, 10.0, 20), &base);
        let got = r.integrate(|x| (7.0 * x).cos());
        assert!((got - (70.0f64).sin() / 7.0).abs() < 1e-14);
        let b = breaks_with(0.0, 3.0, 0.7, &[1.3]);
        assert!(b.contains(&1.3));
        assert!(b.windows(2).all(|p| p[1] - p[0] <= 0.7 + 1e-12));
    }

    #[test]
    fn f32_rule_is_usable() {
        let r: Rule<f32> = gauss_legendre(8);
        assert!((r.integrate(|x| x * x) - 2.0 / 3.0).abs() < 1e-6);
    }
}
