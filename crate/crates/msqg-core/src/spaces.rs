//! Norms and seminorms: homogeneous Sobolev (dyadic and Plancherel routes),
//! Besov sup-norms over dyadic bands, L^p by dealiased collocation
//! quadrature, and the Hessian / trace-free-Hessian sup seminorms.
//!
//! All homogeneous quantities ignore the zero mode.

use crate::lp::{lp_project, occupied_bands, Projection};
use crate::{Grid, SpectralField};
use serde::{Deserialize, Serialize};

/// Which norm a [`NormReport`] carries.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum NormKind {
    HsDyadic,
    HsDirect,
    Besov,
    Lp,
    W2Inf,
    W2InfTraceFree,
}

/// A computed norm value with its parameters.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct NormReport {
    pub kind: NormKind,
    /// Smoothness index `s` (Sobolev) or `α` (Besov); unused for L^p.
    pub index: f64,
    /// Integrability exponent; `f64::INFINITY` for sup norms.
    pub p: f64,
    pub value: f64,
}

/// `‖θ‖_{Ḣ^s}` by the dyadic definition `(Σ_q (2^{sq} ‖P_q θ‖_{L²})²)^{1/2}`.
pub fn sobolev_norm_dyadic(theta: &SpectralField, s: f64) -> f64 {
    let mut acc = 0.0;
    for q in occupied_bands(&theta.grid()) {
        let band = lp_project(theta, Projection::Band(q));
        let l2 = band.l2_norm();
        let w = (s * q as f64).exp2();
        acc += (w * l2) * (w * l2);
    }
    acc.sqrt()
}

/// `‖θ‖_{Ḣ^s} = ‖Λ^s θ‖_{L²}` by direct Plancherel summation:
/// `((2π)² Σ_{k≠0} |k|^{2s} |θ̂(k)|²)^{1/2}`.
pub fn sobolev_norm_direct(theta: &SpectralField, s: f64) -> f64 {
    let grid = theta.grid();
    let mut acc = 0.0;
    for (flat, (k1, k2)) in grid.modes_iter() {
        if (k1, k2) == (0, 0) {
            continue;
        }
        let r2 = (k1 * k1 + k2 * k2) as f64;
        acc += r2.powf(s) * theta.component(0)[flat].norm_sqr();
    }
    (Grid::PERIOD * Grid::PERIOD * acc).sqrt()
}

/// L^p norm of a component by quadrature over the collocation grid after
/// zero-padded upsampling by 2x. `p = ∞` takes the max.
pub fn lp_norm(field: &SpectralField, p: f64) -> f64 {
    let grid = field.grid();
    let m = 2 * grid.n();
    let cell = (Grid::PERIOD / m as f64).powi(2);
    let mut acc: f64 = 0.0;
    let mut maxabs: f64 = 0.0;
    for c in 0..field.rank().components() {
        let phys = field.to_physical_padded(c, m);
        for v in phys {
            let a = v.norm();
            maxabs = maxabs.max(a);
            if p.is_finite() {
                acc += a.powf(p) * cell;
            }
        }
    }
    if p.is_finite() {
        acc.powf(1.0 / p)
    } else {
        maxabs
    }
}

/// Homogeneous Besov norm `sup_q 2^{αq} ‖P_q u‖_{L^p}` over occupied bands.
pub fn besov_norm(field: &SpectralField, alpha: f64, p: f64) -> f64 {
    let mut sup: f64 = 0.0;
    for q in occupied_bands(&field.grid()) {
        let band = lp_project(field, Projection::Band(q));
        let v = if p == 2.0 { band.l2_norm() } else { lp_norm(&band, p) };
        sup = sup.max((alpha * q as f64).exp2() * v);
    }
    sup
}

/// Pointwise sup norms of the Hessian and of its trace-free part
/// `∇̄²_{jℓ}ψ = ∇_j∇_ℓψ - (1/2)Δψ δ_{jℓ}`, each as `max_x max_{j,ℓ} |·|`.
pub fn hessian_seminorms(psi: &SpectralField) -> (f64, f64) {
    let grid = psi.grid();
    let m = 2 * grid.n();
    let d11 = psi.derivative(0).derivative(0);
    let d12 = psi.derivative(0).derivative(1);
    let d22 = psi.derivative(1).derivative(1);
    let h11 = d11.to_physical_padded(0, m);
    let h12 = d12.to_physical_padded(0, m);
    let h22 = d22.to_physical_padded(0, m);
    let mut w2 = 0.0f64;
    let mut w2tf = 0.0f64;
    for idx in 0..m * m {
        let (a, b, c) = (h11[idx].re, h12[idx].re, h22[idx].re);
        w2 = w2.max(a.abs()).max(b.abs()).max(c.abs());
        let half_trace = 0.5 * (a + c);
        w2tf = w2tf.max((a - half_trace).abs()).max(b.abs()).max((c - half_trace).abs());
    }
    (w2, w2tf)
}

/// Range of the ratio `Σ_q 2^{2sq} χ_q(|k|)² / |k|^{2s}` over `|k| > 0`;
/// these are the equivalence constants (squared) between the dyadic and
/// direct Ḣ^s norms for the fixed profile.
pub fn dyadic_direct_equivalence_bounds(s: f64) -> (f64, f64) {
    use crate::lp::LpProfile;
    let mut lo = f64::INFINITY;
    let mut hi = 0.0f64;
    // By dyadic self-similarity it suffices to scan one octave of radii.
    for i in 0..=2048 {
        let r = 1.0 * (1.0 + i as f64 / 2048.0); // r ∈ [1, 2]
        let mut w = 0.0;
        for q in -2..4 {
            let c = LpProfile::chi_band(q, r);
            w += (2.0 * s * q as f64).exp2() * c * c;
        }
        let ratio = w / r.powf(2.0 * s);
        lo = lo.min(ratio);
        hi = hi.max(ratio);
    }
    (lo, hi)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::Grid;

    #[test]
    fn direct_norm_frozen_values() {
        let grid = Grid::new(64).unwrap();
        // Λ^{-1/2} sin(4x₁) = (1/2) sin(4x₁);  ∫ (1/4) sin² = π²/2 on the box.
        let f = SpectralField::from_fn(grid, |x, _| (4.0 * x).sin());
        let v = sobolev_norm_direct(&f, -0.5);
        assert!((v - std::f64::consts::PI / 2f64.sqrt()).abs() < 1e-12);
        // ‖sin x₁‖_{L²} = √(2π²).
        let f = SpectralField::from_fn(grid, |x, _| x.sin());
        let v = sobolev_norm_direct(&f, 0.0);
        assert!((v - (2.0 * std::f64::consts::PI * std::f64::consts::PI).sqrt()).abs() < 1e-12);
    }

    #[test]
    fn zero_mode_ignored() {
        let grid = Grid::new(32).unwrap();
        let a = SpectralField::from_fn(grid, |x, _| x.sin());
        let b = SpectralField::from_fn(grid, |x, _| x.sin() + 3.25);
        for s in [-0.5, 0.0, 0.75] {
            assert!((sobolev_norm_dyadic(&a, s) - sobolev_norm_dyadic(&b, s)).abs() < 1e-13);
            assert!((sobolev_norm_direct(&a, s) - sobolev_norm_direct(&b, s)).abs() < 1e-13);
        }
        let zero = SpectralField::zeros(grid, crate::Rank::Scalar);
        assert_eq!(sobolev_norm_dyadic(&zero, -0.5), 0.0);
        assert_eq!(besov_norm(&zero, 1.0 / 3.0, 3.0), 0.0);
    }

    #[test]
    fn hessian_of_sine() {
        let grid = Grid::new(64).unwrap();
        let psi = SpectralField::from_fn(grid, |x, _| x.sin());
        let (w2, w2tf) = hessian_seminorms(&psi);
        assert!((w2 - 1.0).abs() < 1e-10);
        assert!((w2tf - 0.5).abs() < 1e-10);
        let zero = SpectralField::zeros(grid, crate::Rank::Scalar);
        assert_eq!(hessian_seminorms(&zero), (0.0, 0.0));
    }

    #[test]
    fn tracefree_dominated_by_full_hessian() {
        let grid = Grid::new(32).unwrap();
        let psi = SpectralField::from_fn(grid, |x, y| (2.0 * x).sin() * y.cos() + (x + 2.0 * y).cos());
        let (w2, w2tf) = hessian_seminorms(&psi);
        assert!(w2tf <= 1.5 * w2 + 1e-12);
    }

    #[test]
    fn besov_single_band_scaling() {
        let grid = Grid::new(64).unwrap();
        // sin(x₁) occupies band 0 only (χ₀(1) = 1), so the sup is the plain L^p norm.
        let f = SpectralField::from_fn(grid, |x, _| x.sin());
        let alpha = 1.0 / 3.0;
        let b = besov_norm(&f, alpha, 3.0);
        // |sin|³ is not band limited, so the collocation quadrature carries a
        // small error that shrinks with the padding factor.
        let expect = (16.0 * std::f64::consts::PI / 3.0).powf(1.0 / 3.0);
        assert!((b - expect).abs() < 1e-6, "besov {b} vs {expect}");
        // A field concentrated in a single band scales by exactly 2^{α q₀}
        // relative to its own L^p norm (here q₀ = 3 holds |k| = 8 entirely).
        let g = SpectralField::from_fn(grid, |x, _| (8.0 * x).sin());
        let b3 = besov_norm(&g, alpha, 3.0);
        assert_eq!(b3, 2.0f64.powf(alpha * 3.0) * lp_norm(&g, 3.0));
    }
}
