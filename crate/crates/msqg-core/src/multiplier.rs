//! Homogeneous Fourier multipliers `m^ℓ(ξ) = |ξ|^ρ h^ℓ(ω)` with the angular
//! part `h^ℓ` a finite trigonometric series in the polar angle `ω`.
//!
//! This representation covers every multiplier used by the lab (the mSQG
//! Biot-Savart symbol, angular-profile deformations of it, the compressible
//! radial control and the gradient-of-homogeneous examples) and gives exact
//! parity checks plus closed-form Cartesian gradients: with
//! `ν = (cos ω, sin ω)` and `τ = (-sin ω, cos ω)`,
//!
//! ```text
//!   ∇^j m^ℓ(ξ) = |ξ|^{ρ-1} ( ρ h^ℓ(ω) ν^j + h^ℓ'(ω) τ^j ).
//! ```

use crate::{Complex, Error, Rank, Result, SpectralField};
use serde::{Deserialize, Serialize};

/// Finite Fourier series on the circle, `h(ω) = Σ_j c_j e^{i j ω}`.
#[derive(Debug, Clone, PartialEq)]
pub struct TrigSeries {
    /// (harmonic, coefficient), sorted by harmonic, no duplicates.
    terms: Vec<(i32, Complex)>,
}

impl TrigSeries {
    pub fn new(mut terms: Vec<(i32, Complex)>) -> Self {
        terms.sort_by_key(|t| t.0);
        terms.dedup_by(|b, a| {
            if a.0 == b.0 {
                a.1 += b.1;
                true
            } else {
                false
            }
        });
        terms.retain(|t| t.1.norm() > 0.0);
        TrigSeries { terms }
    }

    pub fn zero() -> Self {
        TrigSeries { terms: Vec::new() }
    }

    pub fn constant(c: Complex) -> Self {
        TrigSeries::new(vec![(0, c)])
    }

    /// cos(nω)
    pub fn cos(n: i32) -> Self {
        let half = Complex::new(0.5, 0.0);
        TrigSeries::new(vec![(n, half), (-n, half)])
    }

    /// sin(nω)
    pub fn sin(n: i32) -> Self {
        let h = Complex::new(0.0, -0.5);
        TrigSeries::new(vec![(n, h), (-n, -h)])
    }

    pub fn terms(&self) -> &[(i32, Complex)] {
        &self.terms
    }

    pub fn eval(&self, omega: f64) -> Complex {
        let mut acc = Complex::default();
        for &(j, c) in &self.terms {
            let phase = j as f64 * omega;
            acc += c * Complex::new(phase.cos(), phase.sin());
        }
        acc
    }

    pub fn derivative(&self) -> TrigSeries {
        TrigSeries::new(
            self.terms
                .iter()
                .map(|&(j, c)| (j, c * Complex::new(0.0, j as f64)))
                .collect(),
        )
    }

    pub fn scale(&self, s: Complex) -> TrigSeries {
        TrigSeries::new(self.terms.iter().map(|&(j, c)| (j, c * s)).collect())
    }

    pub fn add(&self, other: &TrigSeries) -> TrigSeries {
        let mut terms = self.terms.clone();
        terms.extend_from_slice(&other.terms);
        TrigSeries::new(terms)
    }

    pub fn multiply(&self, other: &TrigSeries) -> TrigSeries {
        let mut terms = Vec::with_capacity(self.terms.len() * other.terms.len());
        for &(a, ca) in &self.terms {
            for &(b, cb) in &other.terms {
                terms.push((a + b, ca * cb));
            }
        }
        TrigSeries::new(terms)
    }

    /// True when every harmonic is odd, i.e. `h(ω + π) = -h(ω)`.
    pub fn only_odd_harmonics(&self) -> bool {
        self.terms.iter().all(|(j, _)| j.rem_euclid(2) == 1)
    }

    /// True when every harmonic is even, i.e. `h(ω + π) = h(ω)`.
    pub fn only_even_harmonics(&self) -> bool {
        self.terms.iter().all(|(j, _)| j.rem_euclid(2) == 0)
    }

    /// Bound for `max |h|` (sum of coefficient magnitudes).
    pub fn magnitude_bound(&self) -> f64 {
        self.terms.iter().map(|(_, c)| c.norm()).sum()
    }

    /// True when `(-1)^j c_j = conj(c_{-j})` for every harmonic, which is the
    /// real-symmetry condition `m(-ξ) = conj(m(ξ))` at the angular level.
    pub fn real_symmetric(&self) -> bool {
        for &(j, c) in &self.terms {
            let mirror = self
                .terms
                .iter()
                .find(|(jj, _)| *jj == -j)
                .map(|(_, cc)| *cc)
                .unwrap_or_default();
            let signed = if j.rem_euclid(2) == 0 { c } else { -c };
            if (signed - mirror.conj()).norm() > 1e-14 * (1.0 + c.norm()) {
                return false;
            }
        }
        true
    }
}

/// Smooth profile of the polar angle used to deform the mSQG symbol.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum AngularProfile {
    Constant(f64),
    /// cos(nω)
    Cos(u32),
    /// sin(nω)
    Sin(u32),
}

impl AngularProfile {
    fn series(self) -> TrigSeries {
        match self {
            AngularProfile::Constant(c) => TrigSeries::constant(Complex::new(c, 0.0)),
            AngularProfile::Cos(n) => TrigSeries::cos(n as i32),
            AngularProfile::Sin(n) => TrigSeries::sin(n as i32),
        }
    }
}

/// Families of homogeneous multipliers of degree `-1 + 2δ`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum MultiplierFamily {
    /// `i ε^{ℓa} ξ_a |ξ|^{2(δ-1)}`: the canonical mSQG Biot-Savart symbol.
    Msqg,
    /// `H(ω) · i ε^{ℓa} ξ_a |ξ|^{2(δ-1)}`: angular deformation of mSQG along
    /// the tangent direction. Odd and incompressible when `H` is π-periodic.
    TangentialImag(AngularProfile),
    /// `H(ω) · ε^{ℓa} ξ_a |ξ|^{2(δ-1)}`: real tangential symbol. Even and
    /// real-symmetric when `H(ω + π) = -H(ω)` (e.g. `H = cos ω`).
    TangentialReal(AngularProfile),
    /// `H(ω) · ξ^ℓ |ξ|^{2(δ-1)}`: real radial (compressible) symbol; with
    /// `H = 1` this is the pure-gradient control `ξ^ℓ |ξ|^{-2+2δ}`.
    RadialReal(AngularProfile),
    /// `∇F` with `F(ξ) = ξ₁ ξ₂² / |ξ|`: even, degree-one homogeneous
    /// (requires δ = 1); the exceptional family of the even-multiplier case.
    GradXi1Xi2Sq,
}

/// A homogeneous multiplier specification: family, δ, and overall sign.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MultiplierSpec {
    pub delta: f64,
    pub family: MultiplierFamily,
    pub sign: f64,
}

impl MultiplierSpec {
    pub fn new(delta: f64, family: MultiplierFamily, sign: f64) -> Result<Self> {
        if !(0.0..=4.0).contains(&delta) {
            return Err(Error::Config(format!("delta = {delta} outside [0, 4]")));
        }
        if sign != 1.0 && sign != -1.0 {
            return Err(Error::Config(format!("sign must be ±1, got {sign}")));
        }
        if matches!(family, MultiplierFamily::GradXi1Xi2Sq) && (delta - 1.0).abs() > 1e-12 {
            return Err(Error::Config(
                "the gradient family is degree-one homogeneous and needs delta = 1".into(),
            ));
        }
        Ok(MultiplierSpec { delta, family, sign })
    }

    /// Canonical mSQG with sign +1.
    pub fn msqg(delta: f64) -> Self {
        MultiplierSpec::new(delta, MultiplierFamily::Msqg, 1.0).expect("valid delta")
    }

    /// Homogeneity degree `ρ = -1 + 2δ`.
    pub fn homogeneity(&self) -> f64 {
        -1.0 + 2.0 * self.delta
    }

    /// Angular series of the two Cartesian components.
    pub fn angular_series(&self) -> [TrigSeries; 2] {
        let s = Complex::new(self.sign, 0.0);
        // ε^{ℓa} ξ̂_a = (sin ω, -cos ω), the clockwise unit tangent; the
        // radial direction is ν = (cos ω, sin ω).
        let et = [TrigSeries::sin(1), TrigSeries::cos(1).scale(Complex::new(-1.0, 0.0))];
        let nu = [TrigSeries::cos(1), TrigSeries::sin(1)];
        let i = Complex::new(0.0, 1.0);
        match self.family {
            MultiplierFamily::Msqg => [et[0].scale(i * s), et[1].scale(i * s)],
            MultiplierFamily::TangentialImag(p) => {
                let h = p.series();
                [h.multiply(&et[0]).scale(i * s), h.multiply(&et[1]).scale(i * s)]
            }
            MultiplierFamily::TangentialReal(p) => {
                let h = p.series();
                [h.multiply(&et[0]).scale(s), h.multiply(&et[1]).scale(s)]
            }
            MultiplierFamily::RadialReal(p) => {
                let h = p.series();
                [h.multiply(&nu[0]).scale(s), h.multiply(&nu[1]).scale(s)]
            }
            MultiplierFamily::GradXi1Xi2Sq => {
                // ∇(ξ₁ξ₂²/|ξ|) restricted to the unit circle:
                // h¹ = sin⁴ω, h² = (3/4) sin 2ω + (1/8) sin 4ω.
                let h1 = TrigSeries::constant(Complex::new(3.0 / 8.0, 0.0))
                    .add(&TrigSeries::cos(2).scale(Complex::new(-0.5, 0.0)))
                    .add(&TrigSeries::cos(4).scale(Complex::new(0.125, 0.0)));
                let h2 = TrigSeries::sin(2)
                    .scale(Complex::new(0.75, 0.0))
                    .add(&TrigSeries::sin(4).scale(Complex::new(0.125, 0.0)));
                [h1.scale(s), h2.scale(s)]
            }
        }
    }

    /// `m(-ξ) = conj(m(ξ))`, the condition for `Tθ` to be real when θ is.
    pub fn is_real_symmetric(&self) -> bool {
        let h = self.angular_series();
        h[0].real_symmetric() && h[1].real_symmetric()
    }

    /// `m(-ξ) = -m(ξ)`.
    pub fn is_odd(&self) -> bool {
        let h = self.angular_series();
        h[0].only_odd_harmonics() && h[1].only_odd_harmonics()
    }

    /// `m(-ξ) = m(ξ)`.
    pub fn is_even(&self) -> bool {
        let h = self.angular_series();
        h[0].only_even_harmonics() && h[1].only_even_harmonics()
    }

    /// `ξ · m(ξ) = 0`, i.e. the velocity field is divergence free.
    pub fn is_incompressible(&self) -> bool {
        let h = self.angular_series();
        let radial = h[0].multiply(&TrigSeries::cos(1)).add(&h[1].multiply(&TrigSeries::sin(1)));
        radial.magnitude_bound() < 1e-14
    }

    /// Evaluate `m^ℓ(ξ)` at a (real) frequency point; zero at the origin.
    pub fn eval(&self, xi1: f64, xi2: f64) -> [Complex; 2] {
        let r = (xi1 * xi1 + xi2 * xi2).sqrt();
        if r == 0.0 {
            return [Complex::default(); 2];
        }
        let omega = xi2.atan2(xi1);
        let rp = r.powf(self.homogeneity());
        let h = self.angular_series();
        [h[0].eval(omega) * rp, h[1].eval(omega) * rp]
    }

    /// Evaluate the Cartesian gradient `∇^j m^ℓ(ξ)`, indexed `[j][ℓ]`.
    pub fn grad(&self, xi1: f64, xi2: f64) -> [[Complex; 2]; 2] {
        let r = (xi1 * xi1 + xi2 * xi2).sqrt();
        if r == 0.0 {
            return [[Complex::default(); 2]; 2];
        }
        let omega = xi2.atan2(xi1);
        let rho = self.homogeneity();
        let rp = r.powf(rho - 1.0);
        let h = self.angular_series();
        let hp = [h[0].derivative(), h[1].derivative()];
        let nu = [omega.cos(), omega.sin()];
        let tau = [-omega.sin(), omega.cos()];
        let mut out = [[Complex::default(); 2]; 2];
        for l in 0..2 {
            let hv = h[l].eval(omega);
            let hd = hp[l].eval(omega);
            for j in 0..2 {
                out[j][l] = rp * (rho * hv * nu[j] + hd * tau[j]);
            }
        }
        out
    }

    /// Apply the multiplier to a scalar field, producing the velocity field
    /// `(Tθ)^ℓ` with `\hat{Tθ}^ℓ(k) = m^ℓ(k) θ̂(k)`.
    ///
    /// The symbol is evaluated on a half lattice and mirrored so that, for
    /// real-symmetric symbols, Hermitian inputs map to bitwise Hermitian
    /// outputs. Fields flagged real are rejected under symbols that violate
    /// real-symmetry.
    pub fn apply(&self, theta: &SpectralField) -> Result<SpectralField> {
        theta.expect_scalar()?;
        let real_symmetric = self.is_real_symmetric();
        if theta.is_hermitian() && !real_symmetric {
            return Err(Error::NotRealSymmetric);
        }
        let grid = theta.grid();
        let n = grid.n();
        let mut out = SpectralField::zeros(grid, Rank::Vector);
        out.set_hermitian(theta.is_hermitian());
        let src = theta.component(0);
        let (mut v0, mut v1) = (vec![Complex::default(); grid.modes()], vec![Complex::default(); grid.modes()]);
        for i in 0..n {
            let k1 = grid.wavenumber(i);
            for j in 0..n {
                let k2 = grid.wavenumber(j);
                if (k1, k2) == (0, 0) || grid.is_nyquist(i) || grid.is_nyquist(j) {
                    continue;
                }
                // Canonical half lattice: evaluate there, mirror by conjugation.
                let canonical = k1 > 0 || (k1 == 0 && k2 > 0);
                if !canonical {
                    continue;
                }
                let m = self.eval(k1 as f64, k2 as f64);
                let here = i * n + j;
                v0[here] = m[0] * src[here];
                v1[here] = m[1] * src[here];
                if let (Some(mi), Some(mj)) = (grid.index_of(-k1), grid.index_of(-k2)) {
                    let there = mi * n + mj;
                    let mm = if real_symmetric {
                        [m[0].conj(), m[1].conj()]
                    } else {
                        self.eval(-k1 as f64, -k2 as f64)
                    };
                    v0[there] = mm[0] * src[there];
                    v1[there] = mm[1] * src[there];
                }
            }
        }
        out.component_mut(0).copy_from_slice(&v0);
        out.component_mut(1).copy_from_slice(&v1);
        Ok(out)
    }
}

/// Apply a real radial symbol `f(|k|)` (with `f` sent to 0 at `k = 0`) to
/// every component of a field. Radial symbols depend on `|k|` only, so
/// Hermitian symmetry is preserved bitwise.
pub fn apply_radial(field: &SpectralField, f: impl Fn(f64) -> f64) -> SpectralField {
    let grid = field.grid();
    let n = grid.n();
    let mut out = field.clone();
    for c in 0..field.rank().components() {
        let comp = out.component_mut(c);
        for i in 0..n {
            let k1 = grid.wavenumber(i);
            for j in 0..n {
                let k2 = grid.wavenumber(j);
                let w = if (k1, k2) == (0, 0) {
                    0.0
                } else {
                    f(((k1 * k1 + k2 * k2) as f64).sqrt())
                };
                comp[i * n + j] *= w;
            }
        }
    }
    out
}

/// `Λ^s = (-Δ)^{s/2}`: multiply by `|k|^s`, zero mode to 0.
pub fn lambda_pow(field: &SpectralField, s: f64) -> SpectralField {
    apply_radial(field, |r| r.powf(s))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::Grid;

    #[test]
    fn msqg_matches_closed_form() {
        let m = MultiplierSpec::msqg(0.37);
        for &(x, y) in &[(1.0, 0.0), (3.0, -2.0), (-5.0, 4.0), (0.25, 1.75)] {
            let r2: f64 = x * x + y * y;
            let w = r2.powf(0.37 - 1.0);
            let expect = [Complex::new(0.0, y * w), Complex::new(0.0, -x * w)];
            let got = m.eval(x, y);
            for l in 0..2 {
                assert!((got[l] - expect[l]).norm() < 1e-12 * (1.0 + expect[l].norm()));
            }
        }
    }

    #[test]
    fn parities_and_incompressibility() {
        let msqg = MultiplierSpec::msqg(0.5);
        assert!(msqg.is_odd());
        assert!(!msqg.is_even());
        assert!(msqg.is_incompressible());
        assert!(msqg.is_real_symmetric());

        let grad = MultiplierSpec::new(0.5, MultiplierFamily::RadialReal(AngularProfile::Constant(1.0)), 1.0).unwrap();
        assert!(grad.is_odd());
        assert!(!grad.is_incompressible());
        assert!(!grad.is_real_symmetric());

        let even = MultiplierSpec::new(0.5, MultiplierFamily::TangentialReal(AngularProfile::Cos(1)), 1.0).unwrap();
        assert!(even.is_even());
        assert!(even.is_incompressible());
        assert!(even.is_real_symmetric());

        let gradf = MultiplierSpec::new(1.0, MultiplierFamily::GradXi1Xi2Sq, 1.0).unwrap();
        assert!(gradf.is_even());
        assert!(!gradf.is_incompressible());
        assert!(gradf.is_real_symmetric());
    }

    #[test]
    fn homogeneity_scaling() {
        let m = MultiplierSpec::msqg(0.25);
        let rho = m.homogeneity();
        let base = m.eval(2.0, 5.0);
        for &lam in &[2.0, 8.0, 31.7] {
            let scaled = m.eval(2.0 * lam, 5.0 * lam);
            for l in 0..2 {
                let expect = base[l] * lam.powf(rho);
                assert!((scaled[l] - expect).norm() < 1e-12 * (1.0 + expect.norm()));
            }
        }
    }

    #[test]
    fn gradient_matches_finite_difference() {
        let specs = [
            MultiplierSpec::msqg(0.5),
            MultiplierSpec::new(0.25, MultiplierFamily::RadialReal(AngularProfile::Constant(1.0)), 1.0).unwrap(),
            MultiplierSpec::new(1.0, MultiplierFamily::GradXi1Xi2Sq, 1.0).unwrap(),
        ];
        let h = 1e-6;
        for m in specs {
            let (x, y) = (3.0, 1.5);
            let g = m.grad(x, y);
            for l in 0..2 {
                let fd1 = (m.eval(x + h, y)[l] - m.eval(x - h, y)[l]) / (2.0 * h);
                let fd2 = (m.eval(x, y + h)[l] - m.eval(x, y - h)[l]) / (2.0 * h);
                assert!((g[0][l] - fd1).norm() < 1e-6, "{:?}", m.family);
                assert!((g[1][l] - fd2).norm() < 1e-6, "{:?}", m.family);
            }
        }
    }

    #[test]
    fn gradf_is_gradient_of_f() {
        // Finite differences of F(ξ) = ξ₁ξ₂²/|ξ| against the series.
        let m = MultiplierSpec::new(1.0, MultiplierFamily::GradXi1Xi2Sq, 1.0).unwrap();
        let f = |x: f64, y: f64| x * y * y / (x * x + y * y).sqrt();
        let h = 1e-6;
        for &(x, y) in &[(1.0, 2.0), (-3.0, 0.7), (2.2, -1.1)] {
            let fd = [(f(x + h, y) - f(x - h, y)) / (2.0 * h), (f(x, y + h) - f(x, y - h)) / (2.0 * h)];
            let got = m.eval(x, y);
            for l in 0..2 {
                assert!((got[l].re - fd[l]).abs() < 1e-6);
                assert!(got[l].im.abs() < 1e-14);
            }
        }
    }

    #[test]
    fn rejects_real_symmetry_violation_on_real_fields() {
        let grid = Grid::new(32).unwrap();
        let theta = SpectralField::from_fn(grid, |x, _| x.sin());
        let grad = MultiplierSpec::new(0.5, MultiplierFamily::RadialReal(AngularProfile::Constant(1.0)), 1.0).unwrap();
        assert!(matches!(grad.apply(&theta), Err(Error::NotRealSymmetric)));
        let mut complexified = theta;
        complexified.set_hermitian(false);
        assert!(grad.apply(&complexified).is_ok());
    }
}
