//! Gauss-Lobatto points on [-1, 1]: the endpoints plus the roots of the
//! derivative of the Legendre polynomial of the given order, found by
//! Newton iteration. Self-contained so it stays testable in isolation.

/// (P_n(x), P'_n(x), P''_n(x)) via the ascending recurrences.
fn legendre(n: usize, x: f64) -> (f64, f64, f64) {
    let (mut p0, mut d0, mut s0) = (1.0f64, 0.0f64, 0.0f64);
    if n == 0 {
        return (p0, d0, s0);
    }
    let (mut p1, mut d1, mut s1) = (x, 1.0f64, 0.0f64);
    for k in 1..n {
        let a = (2 * k + 1) as f64;
        let p2 = (a * x * p1 - k as f64 * p0) / (k + 1) as f64;
        let d2 = d0 + a * p1;
        let s2 = s0 + a * d1;
        (p0, d0, s0) = (p1, d1, s1);
        (p1, d1, s1) = (p2, d2, s2);
    }
    (p1, d1, s1)
}

/// The n+1 Gauss-Lobatto points in ascending order. Endpoints are exact;
/// interior points satisfy |(1 - x^2) P'_n(x)| <= 1e-14.
pub fn gauss_lobatto_points(n: usize) -> Vec<f64> {
    assert!(n >= 1);
    let mut pts = Vec::with_capacity(n + 1);
    pts.push(-1.0);
    for i in 1..n {
        // Seed from the cosine distribution, then polish P'_n to zero.
        let mut x = -(std::f64::consts::PI * i as f64 / n as f64).cos();
        for _ in 0..100 {
            let (_, d, s) = legendre(n, x);
            if s == 0.0 {
                break;
            }
            let step = d / s;
            x -= step;
            if step.abs() < 1e-16 {
                break;
            }
        }
        let (_, d, _) = legendre(n, x);
        debug_assert!(
            ((1.0 - x * x) * d).abs() <= 1e-14,
            "Gauss-Lobatto residual too large at n={n}, i={i}"
        );
        pts.push(x);
    }
    pts.push(1.0);
    pts
}
