//! Gauss–Legendre rules, single and composite.

use std::f64::consts::PI;

/// Nodes and weights of the `order`-point Gauss–Legendre rule on `[-1, 1]`,
/// nodes ascending.
pub fn gauss_legendre(order: usize) -> (Vec<f64>, Vec<f64>) {
    assert!(order >= 1, "Gauss-Legendre order must be positive");
    let mut nodes = vec![0.0; order];
    let mut weights = vec![0.0; order];
    let n = order as f64;
    for i in 0..order.div_ceil(2) {
        // Tricomi initial guess, then Newton on P_n.
        let mut x = (PI * (i as f64 + 0.75) / (n + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (p, d) = legendre_with_derivative(order, x);
            dp = d;
            let dx = p / d;
            x -= dx;
            if dx.abs() < 1e-16 {
                break;
            }
        }
        let (_, d) = legendre_with_derivative(order, x);
        if d != 0.0 {
            dp = d;
        }
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        nodes[i] = -x;
        nodes[order - 1 - i] = x;
        weights[i] = w;
        weights[order - 1 - i] = w;
    }
    if order % 2 == 1 {
        nodes[order / 2] = 0.0;
    }
    (nodes, weights)
}

fn legendre_with_derivative(n: usize, x: f64) -> (f64, f64) {
    let mut p0 = 1.0;
    let mut p1 = x;
    for k in 2..=n {
        let k = k as f64;
        let p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
        p0 = p1;
        p1 = p2;
    }
    if n == 0 {
        return (1.0, 0.0);
    }
    let n = n as f64;
    let dp = n * (x * p1 - p0) / (x * x - 1.0);
    (p1, dp)
}

/// A composite rule: `panels` equal panels on `[a, b]`, each with an
/// `order`-point Gauss–Legendre rule.
#[derive(Debug, Clone)]
pub struct CompositeRule {
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
    pub order: usize,
}

impl CompositeRule {
    pub fn new(a: f64, b: f64, panels: usize, order: usize) -> Self {
        let breaks: Vec<f64> = (0..=panels)
            .map(|i| a + (b - a) * i as f64 / panels as f64)
            .collect();
        Self::with_breaks(&breaks, order)
    }

    /// Panels between consecutive entries of `breaks` (ascending).
    pub fn with_breaks(breaks: &[f64], order: usize) -> Self {
        let (x, w) = gauss_legendre(order);
        let panels = breaks.len().saturating_sub(1);
        let mut nodes = Vec::with_capacity(panels * order);
        let mut weights = Vec::with_capacity(panels * order);
        for pair in breaks.windows(2) {
            let (lo, hi) = (pair[0], pair[1]);
            let half = 0.5 * (hi - lo);
            let mid = 0.5 * (hi + lo);
            for (xi, wi) in x.iter().zip(&w) {
                nodes.push(mid + half * xi);
                weights.push(half * wi);
            }
        }
        CompositeRule { nodes, weights, order }
    }

    pub fn integrate(&self, f: impl Fn(f64) -> f64) -> f64 {
        self.nodes.iter().zip(&self.weights).map(|(&x, &w)| w * f(x)).sum()
    }
}

/// Lagrange differentiation matrix for the given interpolation nodes
/// (row-major): `D[i][j] = l_j'(x_i)`.
pub(crate) fn differentiation_matrix(x: &[f64]) -> Vec<f64> {
    let n = x.len();
    // barycentric weights
    let bw: Vec<f64> = (0..n)
        .map(|j| {
            1.0 / (0..n)
                .filter(|&k| k != j)
                .map(|k| x[j] - x[k])
                .product::<f64>()
        })
        .collect();
    let mut d = vec![0.0; n * n];
    for i in 0..n {
        let mut diag = 0.0;
        for j in 0..n {
            if i != j {
                let v = (bw[j] / bw[i]) / (x[i] - x[j]);
                d[i * n + j] = v;
                diag -= v;
            }
        }
        d[i * n + i] = diag;
    }
    d
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rule_is_exact_for_polynomials() {
        for order in [1usize, 2, 5, 16, 32] {
            let (x, w) = gauss_legendre(order);
            for deg in 0..(2 * order) {
                let exact = if deg % 2 == 0 { 2.0 / (deg as f64 + 1.0) } else { 0.0 };
                let got: f64 = x.iter().zip(&w).map(|(x, w)| w * x.powi(deg as i32)).sum();
                assert!((got - exact).abs() < 1e-13, "order {order} deg {deg}: {got} vs {exact}");
            }
        }
    }

    #[test]
    fn nodes_ascend() {
        let (x, _) = gauss_legendre(16);
        assert!(x.windows(2).all(|p| p[0] < p[1]));
    }

    #[test]
    fn composite_gaussian() {
        let rule = CompositeRule::new(-10.0, 10.0, 20, 16);
        let got = rule.integrate(|x| (-x * x).exp());
        assert!((got - PI.sqrt()).abs() < 1e-14);
    }

    #[test]
    fn differentiation_exact_on_polynomials() {
        let (x, _) = gauss_legendre(8);
        let d = differentiation_matrix(&x);
        let f: Vec<f64> = x.iter().map(|x| x.powi(5) - 2.0 * x).collect();
        for i in 0..8 {
            let got: f64 = (0..8).map(|j| d[i * 8 + j] * f[j]).sum();
            let exact = 5.0 * x[i].powi(4) - 2.0;
            assert!((got - exact).abs() < 1e-12);
        }
    }
}
