//! Gauss-Legendre rules and a small adaptive 1D integrator.

/// Gauss-Legendre nodes and weights on [-1, 1].
///
/// Newton iteration on the Legendre polynomial with the usual Chebyshev
/// initial guess; exact for polynomials of degree 2n-1.
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    assert!(n >= 1);
    let mut nodes = vec![0.0; n];
    let mut weights = vec![0.0; n];
    let m = n.div_ceil(2);
    for i in 0..m {
        let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            // Legendre recurrence for P_n(x) and P_n'(x).
            let mut p0 = 1.0;
            let mut p1 = x;
            for k in 2..=n {
                let kf = k as f64;
                let p2 = ((2.0 * kf - 1.0) * x * p1 - (kf - 1.0) * p0) / kf;
                p0 = p1;
                p1 = p2;
            }
            let pn = if n == 1 { x } else { p1 };
            let pn1 = if n == 1 { 1.0 } else { p0 };
            dp = n as f64 * (x * pn - pn1) / (x * x - 1.0);
            let dx = pn / dp;
            x -= dx;
            if dx.abs() < 1e-15 {
                break;
            }
        }
        nodes[i] = -x;
        nodes[n - 1 - i] = x;
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        weights[i] = w;
        weights[n - 1 - i] = w;
    }
    if n % 2 == 1 {
        nodes[n / 2] = 0.0;
    }
    (nodes, weights)
}

/// Gauss-Legendre rule mapped to [a, b].
pub fn gauss_legendre_on(n: usize, a: f64, b: f64) -> (Vec<f64>, Vec<f64>) {
    let (xs, ws) = gauss_legendre(n);
    let mid = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    (
        xs.iter().map(|x| mid + half * x).collect(),
        ws.iter().map(|w| w * half).collect(),
    )
}

/// Fixed-order Gauss quadrature of `f` over [a, b].
pub fn integrate_gauss<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64, order: usize) -> f64 {
    let (xs, ws) = gauss_legendre_on(order, a, b);
    xs.iter().zip(&ws).map(|(x, w)| w * f(*x)).sum()
}

/// Adaptive Gauss quadrature: bisect until the order-`lo`/order-`hi`
/// estimates agree within `tol` (relative to the running magnitude).
pub fn integrate_adaptive<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64, tol: f64) -> f64 {
    fn recurse<F: Fn(f64) -> f64>(
        f: &F,
        a: f64,
        b: f64,
        tol: f64,
        scale: f64,
        depth: usize,
    ) -> f64 {
        let coarse = integrate_gauss(f, a, b, 7);
        let fine = integrate_gauss(f, a, b, 15);
        if (fine - coarse).abs() <= tol * scale.max(fine.abs()) || depth >= 40 {
            return fine;
        }
        let mid = 0.5 * (a + b);
        recurse(f, a, mid, tol, scale, depth + 1) + recurse(f, mid, b, tol, scale, depth + 1)
    }
    let scale = integrate_gauss(&|x| f(x).abs(), a, b, 15).abs();
    recurse(f, a, b, tol, scale, 0)
}
