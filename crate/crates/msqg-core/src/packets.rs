//! Geometric-optics wave packets and the limit functionals they extract from
//! the nonlinearity: the sharpness limit for the trace-free Hessian bound and
//! the characterization limits that single out the mSQG multiplier.
//!
//! A packet is `Θ_λ = amp(λ) · P_λ[e^{iλ ξ̄·x} λ^{d/4} φ(λ^{1/2}(x - c))]`
//! with `∫φ² = 1`, `P_λ` a radial bump window around `λξ̄`, and the real
//! family `θ_λ = Θ_λ + conj Θ_λ`; the torus center `c = (π, π)` plays the
//! role of the origin. Amplitudes:
//!
//! * `Sharpness`: `λ^{1-δ}` (‖θ_λ‖_{Ḣ^{-1+δ}} ≈ const),
//! * `HalfNorm`:  `λ^{1/2-δ}` (‖θ_λ‖_{Ḣ^{-1/2+δ}} ≈ const),
//! * `HDelta`:    `λ^{-δ}` (‖θ_λ‖_{Ḣ^{δ}} ≈ const).
//!
//! For band-limited packets of this type the high-high interaction is
//! governed by the kernel value at `(λξ̄, -λξ̄)`, i.e. by `-i ∇^j m^ℓ(ξ̄)`
//! and its symmetric part; the per-case limit targets below are evaluated
//! analytically from the multiplier's angular series.

use crate::lp::LpProfile;
use crate::ops::{nonlinearity_pairing_c, VelocityTable};
use crate::{Complex, Error, Grid, MultiplierSpec, Result, SpectralField};
use serde::{Deserialize, Serialize};

/// Packet normalization variant.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum PacketVariant {
    Sharpness,
    HalfNorm,
    HDelta,
}

impl PacketVariant {
    fn amplitude(self, lambda: f64, delta: f64) -> f64 {
        match self {
            PacketVariant::Sharpness => lambda.powf(1.0 - delta),
            PacketVariant::HalfNorm => lambda.powf(0.5 - delta),
            PacketVariant::HDelta => lambda.powf(-delta),
        }
    }
}

/// Envelope profile φ in packet units `y = λ^{1/2}(x - c)`; always
/// normalized to `∫φ² = 1` by collocation quadrature.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum EnvelopeShape {
    /// `φ ∝ e^{-|y|²/(2w²)}`.
    Gaussian { width: f64 },
    /// Compactly supported bump `φ ∝ (1 + α y₁/Y) χ(|y|/Y)` with the fixed
    /// radial profile χ (support |y| ≤ Y). The odd factor gives the packet a
    /// nonzero first moment, the generic situation for the O(λ^{-1/2})
    /// error model of the limit experiments.
    SkewedBump { width: f64, alpha: f64 },
    /// `φ ∝ (1 + α y₁/w) e^{-|y|²/(2w²)}`: Gaussian frequency decay (small
    /// window clipping) with a nonzero first moment.
    SkewedGaussian { width: f64, alpha: f64 },
}

impl EnvelopeShape {
    /// Spatial radius (in packet units) that must fit inside the box.
    fn support_radius(&self) -> f64 {
        match self {
            // e^{-r²/2w²} below 1e-10 needs r ≥ w·√(2·ln 1e10) ≈ 6.79 w.
            EnvelopeShape::Gaussian { width } => 6.8 * width,
            EnvelopeShape::SkewedBump { width, .. } => *width,
            EnvelopeShape::SkewedGaussian { width, .. } => 7.3 * width,
        }
    }

    fn eval(&self, y1: f64, y2: f64) -> f64 {
        let r2 = y1 * y1 + y2 * y2;
        match self {
            EnvelopeShape::Gaussian { width } => (-r2 / (2.0 * width * width)).exp(),
            EnvelopeShape::SkewedBump { width, alpha } => {
                let r = r2.sqrt();
                (1.0 + alpha * y1 / width) * LpProfile::chi(r / width)
            }
            EnvelopeShape::SkewedGaussian { width, alpha } => {
                (1.0 + alpha * y1 / width) * (-r2 / (2.0 * width * width)).exp()
            }
        }
    }
}

/// Description of one wave packet family member.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct WavePacketSpec {
    pub lambda: f64,
    /// Unit direction ξ̄ of the carrier.
    pub direction: (f64, f64),
    pub variant: PacketVariant,
    pub delta: f64,
    pub envelope: EnvelopeShape,
    /// Frequency window support fraction: `P_λ` vanishes outside
    /// `|ξ - λξ̄| ≤ fraction·λ` and equals 1 inside half that radius.
    pub window_fraction: f64,
}

impl WavePacketSpec {
    pub fn new(lambda: f64, variant: PacketVariant, delta: f64) -> Self {
        WavePacketSpec {
            lambda,
            direction: (1.0, 0.0),
            variant,
            delta,
            envelope: EnvelopeShape::Gaussian { width: 1.8 },
            window_fraction: 1.0 / 3.0,
        }
    }

    pub fn with_direction(mut self, d: (f64, f64)) -> Self {
        let n = (d.0 * d.0 + d.1 * d.1).sqrt();
        self.direction = (d.0 / n, d.1 / n);
        self
    }

    pub fn with_envelope(mut self, env: EnvelopeShape) -> Self {
        self.envelope = env;
        self
    }
}

/// A constructed packet: the complex half, its conjugate partner and the
/// real combination, plus normalization diagnostics.
#[derive(Debug, Clone)]
pub struct Packet {
    pub plus: SpectralField,
    pub minus: SpectralField,
    pub real: SpectralField,
    /// Fraction of the pre-projection Fourier mass removed by the window.
    pub clipped_mass_fraction: f64,
    /// `‖Θ_λ‖²_{L²} / amp(λ)²`: the measured weight of `λ^{d/2}φ²(λ^{1/2}x)`
    /// (→ 1 as λ grows; reported rather than normalized away).
    pub measured_weight: f64,
}

/// Build the packet on the grid. Rejects combinations where the envelope
/// tail wraps around the torus (mass beyond |x - c| = π above 1e-10) or the
/// windowed frequency support does not fit under the dealias third.
pub fn make_packet(spec: &WavePacketSpec, grid: Grid) -> Result<Packet> {
    let lam = spec.lambda;
    if lam < 8.0 {
        return Err(Error::PacketFit(format!("lambda = {lam} below 8")));
    }
    let spatial_radius = spec.envelope.support_radius() / lam.sqrt();
    if spatial_radius > 0.95 * std::f64::consts::PI {
        return Err(Error::PacketFit(format!(
            "envelope radius {spatial_radius:.2} does not fit inside the box (lambda {lam})"
        )));
    }
    let kmax = lam * (1.0 + spec.window_fraction);
    if kmax >= grid.n() as f64 / 3.0 {
        return Err(Error::PacketFit(format!(
            "packet reaches |ξ| = {kmax:.1}, beyond n/3 = {:.1}",
            grid.n() as f64 / 3.0
        )));
    }

    let c = std::f64::consts::PI;
    let amp = spec.variant.amplitude(lam, spec.delta);
    let n = grid.n();
    // Sample the modulated envelope, then normalize ∫(λ^{1/2}φ(λ^{1/2}·))² = 1
    // by collocation quadrature.
    let sq = lam.sqrt();
    let mut envelope = vec![0.0f64; grid.modes()];
    let mut mass = 0.0;
    let cell = (Grid::PERIOD / n as f64).powi(2);
    for i in 0..n {
        for j in 0..n {
            let (x, y) = grid.point(i, j);
            let e = sq * spec.envelope.eval(sq * (x - c), sq * (y - c));
            envelope[i * n + j] = e;
            mass += e * e * cell;
        }
    }
    if mass <= 0.0 {
        return Err(Error::PacketFit("envelope vanishes on the grid".into()));
    }
    let scale = amp / mass.sqrt();
    let mut samples = vec![Complex::default(); grid.modes()];
    for i in 0..n {
        for j in 0..n {
            let (x, y) = grid.point(i, j);
            let (dx, dy) = (x - c, y - c);
            let phase = lam * (spec.direction.0 * dx + spec.direction.1 * dy);
            samples[i * n + j] = scale * envelope[i * n + j] * Complex::new(phase.cos(), phase.sin());
        }
    }
    let mut plus = SpectralField::from_physical_complex(grid, &samples);

    // Band projection: radial bump around λξ̄.
    let center = (lam * spec.direction.0, lam * spec.direction.1);
    let radius = spec.window_fraction * lam;
    let mut pre_mass = 0.0;
    let mut post_mass = 0.0;
    {
        let comp = plus.component_mut(0);
        for (flat, (k1, k2)) in grid.modes_iter() {
            let d1 = k1 as f64 - center.0;
            let d2 = k2 as f64 - center.1;
            let dist = (d1 * d1 + d2 * d2).sqrt();
            let win = LpProfile::chi(dist / radius);
            pre_mass += comp[flat].norm_sqr();
            comp[flat] *= win;
            post_mass += comp[flat].norm_sqr();
        }
    }
    let clipped = if pre_mass > 0.0 { 1.0 - post_mass / pre_mass } else { 0.0 };

    // Conjugate partner: coefficients mirrored and conjugated.
    let mut minus = SpectralField::zeros(grid, crate::Rank::Scalar);
    minus.set_hermitian(false);
    {
        let src = plus.component(0).to_vec();
        let dst = minus.component_mut(0);
        for (flat, (k1, k2)) in grid.modes_iter() {
            if let Some(mirror) = grid.mode_index(-k1, -k2) {
                dst[mirror] = src[flat].conj();
            }
        }
    }
    let mut real = plus.clone();
    {
        let dst = real.component_mut(0);
        for (d, s) in dst.iter_mut().zip(minus.component(0).iter()) {
            *d += s;
        }
    }
    real.symmetrize_hermitian();

    let measured_weight = {
        let l2 = plus.l2_norm_sq();
        l2 / (amp * amp)
    };
    Ok(Packet { plus, minus, real, clipped_mass_fraction: clipped, measured_weight })
}

/// Symmetric part of `-i ∇^j m^ℓ(ξ̄)`: the matrix governing the high-high
/// limit of the nonlinearity against a test-function Hessian.
pub fn hh_limit_matrix(m: &MultiplierSpec, xi_bar: (f64, f64)) -> [[Complex; 2]; 2] {
    let g = m.grad(xi_bar.0, xi_bar.1);
    let minus_i = Complex::new(0.0, -1.0);
    let mut s = [[Complex::default(); 2]; 2];
    for j in 0..2 {
        for l in 0..2 {
            s[j][l] = 0.5 * minus_i * (g[j][l] + g[l][j]);
        }
    }
    s
}

/// Derivatives of ψ at the box center, computed spectrally.
pub struct CenterDerivatives {
    pub value: f64,
    pub grad: (f64, f64),
    pub hessian: [[f64; 2]; 2],
}

pub fn center_derivatives(psi: &SpectralField) -> CenterDerivatives {
    let grid = psi.grid();
    let n = grid.n();
    let at_center = |f: &SpectralField| f.to_physical(0)[(n / 2) * n + n / 2].re;
    let d1 = psi.derivative(0);
    let d2 = psi.derivative(1);
    CenterDerivatives {
        value: at_center(psi),
        grad: (at_center(&d1), at_center(&d2)),
        hessian: [
            [at_center(&d1.derivative(0)), at_center(&d1.derivative(1))],
            [at_center(&d2.derivative(0)), at_center(&d2.derivative(1))],
        ],
    }
}

/// One row of a limit experiment.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct LimitRow {
    pub lambda: f64,
    pub value_re: f64,
    pub value_im: f64,
    pub target_re: f64,
    pub target_im: f64,
    pub abs_error: f64,
    pub clipped_mass_fraction: f64,
    pub measured_weight: f64,
}

/// Result of [`sharpness_limit`] / [`characterization_limit`].
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct LimitReport {
    pub rows: Vec<LimitRow>,
    pub target: (f64, f64),
    /// Richardson extrapolation of the last pair assuming an O(λ^{-1/2})
    /// leading error.
    pub extrapolated: (f64, f64),
    /// Log-log slope of |value - target| against λ (decay exponent).
    pub fitted_exponent: Option<f64>,
}

fn assemble_report(rows: Vec<LimitRow>, target: Complex) -> LimitReport {
    let extrapolated = if rows.len() >= 2 {
        let a = rows[rows.len() - 2];
        let b = rows[rows.len() - 1];
        let ratio = (b.lambda / a.lambda).sqrt();
        let ex_re = (ratio * b.value_re - a.value_re) / (ratio - 1.0);
        let ex_im = (ratio * b.value_im - a.value_im) / (ratio - 1.0);
        (ex_re, ex_im)
    } else {
        (rows[0].value_re, rows[0].value_im)
    };
    let pts: Vec<(f64, f64)> = rows
        .iter()
        .filter(|r| r.abs_error > 0.0)
        .map(|r| (r.lambda.ln(), r.abs_error.ln()))
        .collect();
    let fitted_exponent = if pts.len() >= 2 {
        let n = pts.len() as f64;
        let sx: f64 = pts.iter().map(|p| p.0).sum();
        let sy: f64 = pts.iter().map(|p| p.1).sum();
        let sxx: f64 = pts.iter().map(|p| p.0 * p.0).sum();
        let sxy: f64 = pts.iter().map(|p| p.0 * p.1).sum();
        let slope = (n * sxy - sx * sy) / (n * sxx - sx * sx);
        Some(-slope)
    } else {
        None
    };
    LimitReport { rows, target: (target.re, target.im), extrapolated, fitted_exponent }
}

fn run_limit(
    psi: &SpectralField,
    m: &MultiplierSpec,
    grid: Grid,
    lambdas: &[f64],
    mk_spec: impl Fn(f64) -> WavePacketSpec,
    target: Complex,
) -> Result<LimitReport> {
    let mut rows = Vec::with_capacity(lambdas.len());
    for &lam in lambdas {
        let packet = make_packet(&mk_spec(lam), grid)?;
        let value = nonlinearity_pairing_c(psi, &packet.real, m)?;
        rows.push(LimitRow {
            lambda: lam,
            value_re: value.re,
            value_im: value.im,
            target_re: target.re,
            target_im: target.im,
            abs_error: (value - target).norm(),
            clipped_mass_fraction: packet.clipped_mass_fraction,
            measured_weight: packet.measured_weight,
        });
    }
    Ok(assemble_report(rows, target))
}

/// Sharpness experiment: `B(ψ, θ_λ) = ∫ψ T^ℓθ_λ ∇_ℓθ_λ dx` over the
/// Ḣ^{-1+δ}-normalized family, with the analytic target
/// `Σ_{jℓ} S^{jℓ}(ξ̄) ∂_j∂_ℓψ(c)`, `S = sym(-i∇m)(ξ̄)`. For mSQG with the
/// advection convention `sign = -1` and `ξ̄ = e₁` the target is
/// `2(-1+δ) ∂₁∂₂ψ(c)`.
pub fn sharpness_limit(
    psi: &SpectralField,
    m: &MultiplierSpec,
    lambdas: &[f64],
    direction: (f64, f64),
    envelope: EnvelopeShape,
) -> Result<LimitReport> {
    if !m.is_odd() || !m.is_incompressible() {
        return Err(Error::ParityMismatch("sharpness family assumes an odd incompressible multiplier"));
    }
    let grid = psi.grid();
    let s = hh_limit_matrix(m, direction);
    let d = center_derivatives(psi);
    let mut target = Complex::default();
    for j in 0..2 {
        for l in 0..2 {
            target += s[j][l] * d.hessian[j][l];
        }
    }
    run_limit(psi, m, grid, lambdas, |lam| {
        WavePacketSpec::new(lam, PacketVariant::Sharpness, m.delta)
            .with_direction(direction)
            .with_envelope(envelope)
    }, target)
}

/// `B(ψ, Θ_λ)` for the complex half alone: the high-frequency self
/// interaction, which pairs a Schwartz-class ψ against frequencies ~2λ and
/// decays faster than any power.
pub fn self_interaction(psi: &SpectralField, m: &MultiplierSpec, spec: &WavePacketSpec) -> Result<Complex> {
    let packet = make_packet(spec, psi.grid())?;
    nonlinearity_pairing_c(psi, &packet.plus, m)
}

/// Which characterization case a limit experiment runs.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum CharacterizationCase {
    /// (a) odd, not incompressible: O(1) limit `-2i (m(ξ̄)·ξ̄) ψ(c)` on the
    /// Ḣ^δ-normalized family.
    OddCompressible,
    /// (b) odd incompressible: Hessian-level limit `Σ S^{jℓ} ∂_j∂_ℓψ(c)`.
    OddIncompressible,
    /// (c) even incompressible: `-∇_ℓψ(c)(m^ℓ(ξ̄) + m^ℓ(-ξ̄))`.
    EvenIncompressible,
    /// (d) general even: `-∇_aψ(c)(m^a(ξ̄) - ξ̄_ℓ ∇^a m^ℓ(ξ̄))`.
    GeneralEven,
}

/// Evaluate a characterization-limit experiment. The same functional
/// `B(ψ, θ_λ) = ∫ψ T^ℓθ_λ ∇_ℓθ_λ dx` is measured for every case; the packet
/// normalization and the analytic target depend on the case.
pub fn characterization_limit(
    psi: &SpectralField,
    m: &MultiplierSpec,
    xi_bar: (f64, f64),
    lambdas: &[f64],
    case: CharacterizationCase,
    envelope: EnvelopeShape,
) -> Result<LimitReport> {
    let grid = psi.grid();
    let d = center_derivatives(psi);
    let norm = (xi_bar.0 * xi_bar.0 + xi_bar.1 * xi_bar.1).sqrt();
    let xb = (xi_bar.0 / norm, xi_bar.1 / norm);
    let (variant, target) = match case {
        CharacterizationCase::OddCompressible => {
            if !m.is_odd() {
                return Err(Error::ParityMismatch("case (a) requires an odd multiplier"));
            }
            let mv = m.eval(xb.0, xb.1);
            let dot = mv[0] * xb.0 + mv[1] * xb.1;
            (PacketVariant::HDelta, Complex::new(0.0, -2.0) * dot * d.value)
        }
        CharacterizationCase::OddIncompressible => {
            if !m.is_odd() || !m.is_incompressible() {
                return Err(Error::ParityMismatch("case (b) requires an odd incompressible multiplier"));
            }
            let s = hh_limit_matrix(m, xb);
            let mut t = Complex::default();
            for j in 0..2 {
                for l in 0..2 {
                    t += s[j][l] * d.hessian[j][l];
                }
            }
            (PacketVariant::Sharpness, t)
        }
        CharacterizationCase::EvenIncompressible => {
            if !m.is_incompressible() {
                return Err(Error::ParityMismatch("case (c) requires an incompressible multiplier"));
            }
            let plus = m.eval(xb.0, xb.1);
            let minus = m.eval(-xb.0, -xb.1);
            let t = -((plus[0] + minus[0]) * d.grad.0 + (plus[1] + minus[1]) * d.grad.1);
            (PacketVariant::HalfNorm, t)
        }
        CharacterizationCase::GeneralEven => {
            if !m.is_even() {
                return Err(Error::ParityMismatch("case (d) requires an even multiplier"));
            }
            let mv = m.eval(xb.0, xb.1);
            let g = m.grad(xb.0, xb.1);
            let mut t = Complex::default();
            for a in 0..2 {
                let bracket = mv[a] - (xb.0 * g[a][0] + xb.1 * g[a][1]);
                let gpsi = if a == 0 { d.grad.0 } else { d.grad.1 };
                t -= bracket * gpsi;
            }
            (PacketVariant::HalfNorm, t)
        }
    };
    run_limit(psi, m, grid, lambdas, |lam| {
        WavePacketSpec::new(lam, variant, m.delta).with_direction(xb).with_envelope(envelope)
    }, target)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spaces::sobolev_norm_direct;

    #[test]
    fn packet_normalization_and_support() {
        let grid = Grid::new(256).unwrap();
        for &lam in &[16.0, 32.0, 48.0] {
            let spec = WavePacketSpec::new(lam, PacketVariant::Sharpness, 0.5);
            let p = make_packet(&spec, grid).unwrap();
            // Ḣ^{-1+δ} norm of the real packet stays within [1/2, 2].
            let h = sobolev_norm_direct(&p.real, -0.5);
            assert!((0.5..=2.0).contains(&h), "lambda {lam}: norm {h}");
            // Fourier support inside the window.
            let center = (lam, 0.0);
            let radius = lam / 3.0;
            for (flat, (k1, k2)) in grid.modes_iter() {
                if p.plus.component(0)[flat].norm() > 0.0 {
                    let dist = ((k1 as f64 - center.0).powi(2) + (k2 as f64 - center.1).powi(2)).sqrt();
                    assert!(dist <= radius + 1e-9);
                }
            }
            // Conjugate partner mirrors the support.
            for (flat, (k1, k2)) in grid.modes_iter() {
                if p.minus.component(0)[flat].norm() > 0.0 {
                    let dist = ((k1 as f64 + center.0).powi(2) + (k2 as f64 + center.1).powi(2)).sqrt();
                    assert!(dist <= radius + 1e-9);
                }
            }
            assert!(p.real.is_hermitian());
        }
    }

    #[test]
    fn packet_fit_rejections() {
        let grid = Grid::new(64).unwrap();
        // λ too large for the grid.
        let spec = WavePacketSpec::new(64.0, PacketVariant::Sharpness, 0.5);
        assert!(matches!(make_packet(&spec, grid), Err(Error::PacketFit(_))));
        // Envelope too wide for the box at small λ.
        let spec = WavePacketSpec::new(8.0, PacketVariant::Sharpness, 0.5)
            .with_envelope(EnvelopeShape::Gaussian { width: 8.0 });
        assert!(matches!(make_packet(&spec, grid), Err(Error::PacketFit(_))));
    }

    #[test]
    fn hh_matrix_msqg_closed_form() {
        // S(e₁) for mSQG(sign s): off-diagonal s(1-δ), zero diagonal.
        for (delta, sign) in [(0.5, 1.0), (0.25, -1.0), (0.0, 1.0)] {
            let m = MultiplierSpec::new(delta, crate::multiplier::MultiplierFamily::Msqg, sign).unwrap();
            let s = hh_limit_matrix(&m, (1.0, 0.0));
            let expect = sign * (1.0 - delta);
            assert!((s[0][1].re - expect).abs() < 1e-13);
            assert!((s[1][0].re - expect).abs() < 1e-13);
            assert!(s[0][0].norm() < 1e-13 && s[1][1].norm() < 1e-13);
            assert!(s[0][1].im.abs() < 1e-13);
        }
        // At 45° the matrix rotates to s(δ-1)·diag(1,-1): the combination
        // (∂₁-∂₂)(∂₁+∂₂)ψ of the rotated experiment.
        let m = MultiplierSpec::msqg(0.5);
        let inv = 1.0 / 2.0f64.sqrt();
        let s = hh_limit_matrix(&m, (inv, inv));
        assert!((s[0][0].re + 0.5).abs() < 1e-13, "{:?}", s);
        assert!((s[1][1].re - 0.5).abs() < 1e-13);
        assert!(s[0][1].norm() < 1e-13);
    }

    #[test]
    fn center_derivatives_of_known_function() {
        let grid = Grid::new(64).unwrap();
        let c = std::f64::consts::PI;
        // Envelope narrow enough that the periodization wrap is below roundoff.
        let psi = SpectralField::from_fn(grid, |x, y| {
            let (dx, dy) = (x - c, y - c);
            let bump = (-(dx * dx + dy * dy) / (2.0 * 0.35 * 0.35)).exp();
            dx * dy * bump
        });
        let d = center_derivatives(&psi);
        assert!(d.value.abs() < 1e-10);
        assert!(d.grad.0.abs() < 1e-8 && d.grad.1.abs() < 1e-8);
        assert!((d.hessian[0][1] - 1.0).abs() < 1e-7);
        assert!(d.hessian[0][0].abs() < 1e-7);
    }
}
