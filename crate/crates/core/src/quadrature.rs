//! Gauss–Legendre quadrature on [−1, 1].

/// Nodes and weights of an `n`-point Gauss–Legendre rule, exact for
/// polynomials of degree ≤ 2n−1.
#[derive(Debug, Clone)]
pub struct GaussLegendre {
    nodes: Vec<f64>,
    weights: Vec<f64>,
}

impl GaussLegendre {
    pub fn new(n: usize) -> Self {
        assert!(n >= 1, "quadrature rule needs at least one point");
        let mut nodes = vec![0.0; n];
        let mut weights = vec![0.0; n];
        // Newton iteration on P_n from the Chebyshev-like initial guess.
        for k in 0..n.div_ceil(2) {
            let mut x = (std::f64::consts::PI * (k as f64 + 0.75) / (n as f64 + 0.5)).cos();
            for _ in 0..100 {
                let (p, d) = legendre_with_derivative(n, x);
                let dx = p / d;
                x -= dx;
                if dx.abs() < 1e-15 {
                    break;
                }
            }
            let (_, dp) = legendre_with_derivative(n, x);
            let w = 2.0 / ((1.0 - x * x) * dp * dp);
            nodes[k] = -x.abs();
            nodes[n - 1 - k] = x.abs();
            weights[k] = w;
            weights[n - 1 - k] = w;
        }
        if n % 2 == 1 {
            let mid = n / 2;
            nodes[mid] = 0.0;
            let (_, d) = legendre_with_derivative(n, 0.0);
            weights[mid] = 2.0 / (d * d);
        }
        Self { nodes, weights }
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn points(&self) -> impl Iterator<Item = (f64, f64)> + '_ {
        self.nodes.iter().copied().zip(self.weights.iter().copied())
    }

    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn integrate<F: FnMut(f64) -> f64>(&self, mut f: F) -> f64 {
        self.points().map(|(x, w)| w * f(x)).sum()
    }
}

/// (P_n(x), P_n'(x)) by the three-term recurrence.
fn legendre_with_derivative(n: usize, x: f64) -> (f64, f64) {
    let mut p0 = 1.0;
    let mut p1 = x;
    if n == 0 {
        return (1.0, 0.0);
    }
    for j in 2..=n {
        let jf = j as f64;
        let p2 = ((2.0 * jf - 1.0) * x * p1 - (jf - 1.0) * p0) / jf;
        p0 = p1;
        p1 = p2;
    }
    let d = n as f64 * (x * p1 - p0) / (x * x - 1.0);
    (p1, d)
}

/// Per-direction point count for enriched-element integrands: resolves the
/// oscillatory wave×wave products (whose local wavenumber reaches 2k, hence
/// the budget of ten points per single-wave cycle) and the PU×polynomial
/// products of enrichment order `p`.
pub fn enriched_rule_points(p: usize, kh: f64) -> usize {
    let wave = (10.0 * kh / (2.0 * std::f64::consts::PI)).ceil() as usize + p + 2;
    (p + 6).max(wave)
}

/// Per-direction point count for classical Hermite/CR elements; their
/// integrands are polynomials of degree ≤ 6 per direction.
pub const CLASSICAL_RULE_POINTS: usize = 5;
