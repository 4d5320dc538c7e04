//! Gauss-Legendre quadrature rules of arbitrary node count.

/// Nodes and weights on [-1, 1], computed by Newton iteration from the
/// Chebyshev initial guess.
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    assert!(n >= 1);
    let mut nodes = vec![0.0; n];
    let mut weights = vec![0.0; n];
    for i in 0..n {
        let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        // Newton on P_n(x) = 0 using the standard three-term recurrence.
        for _ in 0..100 {
            let (p, dp) = legendre_and_derivative(n, x);
            let dx = p / dp;
            x -= dx;
            if dx.abs() < 1e-15 {
                break;
            }
        }
        let (_, dp) = legendre_and_derivative(n, x);
        nodes[n - 1 - i] = x;
        weights[n - 1 - i] = 2.0 / ((1.0 - x * x) * dp * dp);
    }
    (nodes, weights)
}

/// Nodes and weights transplanted to [0, 1].
pub fn gauss_legendre_unit(n: usize) -> (Vec<f64>, Vec<f64>) {
    let (x, w) = gauss_legendre(n);
    (
        x.iter().map(|t| 0.5 * (t + 1.0)).collect(),
        w.iter().map(|v| 0.5 * v).collect(),
    )
}

fn legendre_and_derivative(n: usize, x: f64) -> (f64, f64) {
    let mut p0 = 1.0;
    let mut p1 = x;
    if n == 0 {
        return (1.0, 0.0);
    }
    for k in 1..n {
        let kf = k as f64;
        let p2 = ((2.0 * kf + 1.0) * x * p1 - kf * p0) / (kf + 1.0);
        p0 = p1;
        p1 = p2;
    }
    let dp = n as f64 * (x * p1 - p0) / (x * x - 1.0);
    (p1, dp)
}

/// Table of Legendre values and derivatives: `out[r][k] = d^r/dt^r P_k(t)`,
/// for r = 0..=max_order, k = 0..n_polys.
pub fn legendre_derivative_table(t: f64, n_polys: usize, max_order: usize) -> Vec<Vec<f64>> {
    let mut out = vec![vec![0.0; n_polys]; max_order + 1];
    if n_polys == 0 {
        return out;
    }
    out[0][0] = 1.0;
    if n_polys > 1 {
        out[0][1] = t;
        if max_order >= 1 {
            out[1][1] = 1.0;
        }
    }
    // (k+1) P_{k+1} = (2k+1) t P_k - k P_{k-1}, differentiated r times:
    // (k+1) P_{k+1}^(r) = (2k+1) (t P_k^(r) + r P_k^(r-1)) - k P_{k-1}^(r).
    for k in 1..n_polys.saturating_sub(1) {
        let kf = k as f64;
        for r in 0..=max_order {
            let lower = if r >= 1 { out[r - 1][k] } else { 0.0 };
            out[r][k + 1] =
                ((2.0 * kf + 1.0) * (t * out[r][k] + r as f64 * lower) - kf * out[r][k - 1])
                    / (kf + 1.0);
        }
    }
    out
}
