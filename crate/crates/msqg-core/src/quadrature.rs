//! Gauss-Legendre nodes and deterministic parallel reductions.

use rayon::prelude::*;

/// Nodes and weights of the `order`-point Gauss-Legendre rule on [0, 1].
///
/// Computed by Newton iteration on the Legendre polynomial; accurate to
/// machine precision for the orders used here (≤ 64).
pub fn gauss_legendre_unit(order: usize) -> Vec<(f64, f64)> {
    assert!(order >= 1);
    let n = order;
    let mut rule = Vec::with_capacity(n);
    for i in 0..n {
        // Chebyshev-based initial guess on [-1, 1].
        let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        for _ in 0..100 {
            let (p, dp) = legendre_and_derivative(n, x);
            let dx = p / dp;
            x -= dx;
            if dx.abs() < 1e-16 {
                break;
            }
        }
        let (_, dp) = legendre_and_derivative(n, x);
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        // Map from [-1, 1] to [0, 1].
        rule.push((0.5 * (x + 1.0), 0.5 * w));
    }
    rule.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap());
    rule
}

fn legendre_and_derivative(n: usize, x: f64) -> (f64, f64) {
    let mut p0 = 1.0;
    let mut p1 = x;
    for k in 2..=n {
        let k = k as f64;
        let p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
        p0 = p1;
        p1 = p2;
    }
    let dp = n as f64 * (x * p1 - p0) / (x * x - 1.0);
    (p1, dp)
}

/// Pairwise (cascade) summation; deterministic for a fixed input order.
pub fn pairwise_sum(values: &mut Vec<f64>) -> f64 {
    while values.len() > 1 {
        let mut next = Vec::with_capacity(values.len().div_ceil(2));
        for pair in values.chunks(2) {
            next.push(pair.iter().sum());
        }
        *values = next;
    }
    values.first().copied().unwrap_or(0.0)
}

/// Map `items` in parallel with fixed chunk boundaries and reduce the chunk
/// sums pairwise in index order. The result is independent of thread count.
pub fn deterministic_parallel_sum<T, F>(items: &[T], chunk: usize, f: F) -> f64
where
    T: Sync,
    F: Fn(&T) -> f64 + Sync + Send,
{
    let mut partials: Vec<f64> = items
        .par_chunks(chunk.max(1))
        .map(|c| {
            let mut vals: Vec<f64> = c.iter().map(&f).collect();
            pairwise_sum(&mut vals)
        })
        .collect();
    pairwise_sum(&mut partials)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn gauss_legendre_polynomial_exactness() {
        // order-p rule integrates degree 2p-1 exactly
        for order in [2usize, 4, 8, 16, 32] {
            let rule = gauss_legendre_unit(order);
            let total: f64 = rule.iter().map(|(_, w)| w).sum();
            assert!((total - 1.0).abs() < 1e-14);
            let deg = 2 * order - 1;
            let integral: f64 = rule.iter().map(|(x, w)| w * x.powi(deg as i32)).sum();
            let exact = 1.0 / (deg as f64 + 1.0);
            assert!((integral - exact).abs() < 1e-13, "order {order}");
        }
    }

    #[test]
    fn parallel_sum_matches_serial() {
        let items: Vec<f64> = (0..10_000).map(|i| (i as f64).sin()).collect();
        let serial: f64 = {
            let mut v = items.clone();
            pairwise_sum(&mut v)
        };
        let parallel = deterministic_parallel_sum(&items, 128, |x| *x);
        assert_eq!(serial, parallel);
    }
}
