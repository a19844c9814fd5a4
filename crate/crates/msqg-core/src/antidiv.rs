//! The bilinear anti-divergence machinery: for a pair of dyadic band
//! projections `f = P_aθ`, `g = P_bθ` and an odd windowed symbol
//! `m_w = m · (1 - χ̂²_{≤q̂}) · W`, the symmetric interaction satisfies
//!
//! ```text
//!   f T_w^ℓ g + g T_w^ℓ f = ∇_j B^{jℓ}[f, g],
//!   \hat B^{jℓ}(k) = Σ_η K̂^{jℓ}(k-η, η) f̂(k-η) ĝ(η),
//!   K̂^{jℓ}(ζ, η)  = -i ∫₀¹ ∇^j m_w^ℓ(σζ - (1-σ)η) dσ,
//! ```
//!
//! an exact frequency-space identity obtained by Taylor expansion along the
//! segment from `-η` to `ζ` (oddness of `m_w` turns the sum `m_w(ζ) + m_w(η)`
//! into the difference `m_w(ζ) - m_w(-η)`). The radial window `W` equals 1 on
//! the band supports, so inserting it changes nothing on occupied modes while
//! keeping the Taylor path away from the multiplier's singularity at `ξ = 0`.
//!
//! For the mSQG symbol the integrand `∇^j m_w^ℓ` is trace-free, which makes
//! the kernel — and with it the high-high part of the double-divergence form
//! of the nonlinearity — trace-free as well.

use crate::lp::{band_support, occupied_bands, lp_project, LpProfile, Projection};
use crate::multiplier::apply_radial;
use crate::ops::VelocityTable;
use crate::quadrature::gauss_legendre_unit;
use crate::{fft, Complex, Error, Grid, MultiplierSpec, Rank, Result, SpectralField};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

/// Default cap on occupied modes per factor in the direct double sum.
pub const DEFAULT_CONVOLUTION_BUDGET: usize = 4096;

/// Which band pairing a kernel represents (relative to the outer index `q`).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Pairing {
    /// Symmetric interaction of `P_{q+1}θ` with `P_qθ`.
    SymNext,
    /// Self interaction of `P_{q+1}θ` (kernel carries the 1/2 from
    /// symmetrizing a single product).
    SelfNext,
    /// Symmetric interaction of `P_{q+1}θ` with `P_{q-1}θ`.
    SymSkip,
}

impl Pairing {
    /// (high band, low band) for outer index `q`.
    pub fn bands(self, q: i32) -> (i32, i32) {
        match self {
            Pairing::SymNext => (q + 1, q),
            Pairing::SelfNext => (q + 1, q + 1),
            Pairing::SymSkip => (q + 1, q - 1),
        }
    }

    fn is_self(self) -> bool {
        matches!(self, Pairing::SelfNext)
    }
}

/// Evaluator of `K̂^{jℓ}(ζ, η)` for one band pairing: windowed symbol
/// gradient, Gauss-Legendre in σ, angular series evaluated through powers of
/// `e^{iω} = (ξ₁ + iξ₂)/|ξ|` (no trigonometric calls in the hot loop).
#[derive(Debug, Clone)]
pub struct KernelEvaluator {
    rho: f64,
    h: [Vec<(i32, Complex)>; 2],
    hp: [Vec<(i32, Complex)>; 2],
    qhat: Option<i32>,
    lo_cut: i32,
    hi_cut: i32,
    nodes: Vec<(f64, f64)>,
    half: bool,
    /// Radii where some window factor starts or stops varying, ascending.
    breaks: Vec<f64>,
    /// Open radius intervals on which a window factor varies (Gevrey zones).
    transition_zones: Vec<(f64, f64)>,
    /// Largest angular harmonic of the symbol series (for panel refinement).
    max_harmonic: i32,
}

impl KernelEvaluator {
    /// Kernel for the pair of bands `(band_hi, band_lo)` under the cutoff
    /// complement `(1 - χ̂²_{≤q̂})` (`qhat = None` drops that factor, as in
    /// the paraproduct assembly).
    pub fn new(
        m: &MultiplierSpec,
        qhat: Option<i32>,
        band_hi: i32,
        band_lo: i32,
        sigma_order: usize,
        is_self: bool,
    ) -> Result<Self> {
        if !m.is_odd() {
            return Err(Error::ParityMismatch("anti-divergence kernels require an odd multiplier"));
        }
        let series = m.angular_series();
        let collect = |s: &crate::multiplier::TrigSeries| s.terms().to_vec();
        let h = [collect(&series[0]), collect(&series[1])];
        let hp = [collect(&series[0].derivative()), collect(&series[1].derivative())];
        let (lo, hi) = (band_hi.min(band_lo), band_hi.max(band_lo));
        let (lo_cut, hi_cut) = (lo - 1, hi + 2);
        let mut transition_zones = vec![
            ((2.0f64).powi(lo_cut - 1), (2.0f64).powi(lo_cut)),
            ((2.0f64).powi(hi_cut - 1), (2.0f64).powi(hi_cut)),
        ];
        if let Some(qh) = qhat {
            transition_zones.push(((2.0f64).powi(qh - 1), (2.0f64).powi(qh)));
        }
        transition_zones.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap());
        let mut breaks: Vec<f64> = transition_zones.iter().flat_map(|&(a, b)| [a, b]).collect();
        breaks.sort_by(|a, b| a.partial_cmp(b).unwrap());
        breaks.dedup();
        let max_harmonic = h
            .iter()
            .chain(hp.iter())
            .flat_map(|terms| terms.iter().map(|(j, _)| j.abs()))
            .max()
            .unwrap_or(0);
        Ok(KernelEvaluator {
            rho: m.homogeneity(),
            h,
            hp,
            qhat,
            lo_cut,
            hi_cut,
            nodes: gauss_legendre_unit(sigma_order),
            half: is_self,
            breaks,
            transition_zones,
            max_harmonic,
        })
    }

    /// Radial window `w(r) = (1 - χ̂²_{≤q̂}(r)) · (1 - χ̂_{≤lo}(r)) χ̂_{≤hi}(r)`
    /// and its derivative. Equals 1 on both band supports and vanishes near 0.
    #[inline]
    fn window(&self, r: f64) -> (f64, f64) {
        let a = 1.0 - LpProfile::chi_leq(self.lo_cut, r);
        let ap = -LpProfile::chi_leq_deriv(self.lo_cut, r);
        let b = LpProfile::chi_leq(self.hi_cut, r);
        let bp = LpProfile::chi_leq_deriv(self.hi_cut, r);
        let (mut w, mut wp) = (a * b, ap * b + a * bp);
        if let Some(qh) = self.qhat {
            let c = LpProfile::chi_leq(qh, r);
            let cp = LpProfile::chi_leq_deriv(qh, r);
            let f = 1.0 - c * c;
            let fprime = -2.0 * c * cp;
            wp = fprime * w + f * wp;
            w *= f;
        }
        (w, wp)
    }

    #[inline]
    fn series_eval(terms: &[(i32, Complex)], z: Complex) -> Complex {
        // z = e^{iω}; evaluate Σ c_j z^j with small integer powers.
        let mut acc = Complex::default();
        for &(j, c) in terms {
            let mut p = Complex::new(1.0, 0.0);
            let a = if j >= 0 { z } else { z.conj() };
            for _ in 0..j.unsigned_abs() {
                p *= a;
            }
            acc += c * p;
        }
        acc
    }

    /// `∇^j (m·w)^ℓ (u)`, indexed `[j][ℓ]`.
    #[inline]
    fn grad_windowed(&self, u1: f64, u2: f64) -> [[Complex; 2]; 2] {
        let r2 = u1 * u1 + u2 * u2;
        if r2 == 0.0 {
            return [[Complex::default(); 2]; 2];
        }
        let r = r2.sqrt();
        let (w, wp) = self.window(r);
        if w == 0.0 && wp == 0.0 {
            return [[Complex::default(); 2]; 2];
        }
        let (c, s) = (u1 / r, u2 / r);
        let z = Complex::new(c, s);
        let rpm1 = r.powf(self.rho - 1.0);
        let rp = rpm1 * r;
        let nu = [c, s];
        let tau = [-s, c];
        let mut out = [[Complex::default(); 2]; 2];
        for l in 0..2 {
            let hv = Self::series_eval(&self.h[l], z);
            let hd = Self::series_eval(&self.hp[l], z);
            let m_val = rp * hv;
            for j in 0..2 {
                // w ∇m + m w' ν
                let grad_m = rpm1 * (self.rho * hv * nu[j] + hd * tau[j]);
                out[j][l] = w * grad_m + m_val * wp * nu[j];
            }
        }
        out
    }

    /// Test hook for the windowed gradient.
    pub fn debug_grad_windowed(&self, u1: f64, u2: f64) -> [[Complex; 2]; 2] {
        self.grad_windowed(u1, u2)
    }

    /// `K̂^{jℓ}(ζ, η)`, indexed `[j][ℓ]`.
    ///
    /// The σ integral is split at the exact parameters where `|u_σ|` crosses
    /// a window-transition radius (`|u_σ|²` is quadratic in σ, so crossings
    /// are closed-form). Panels inside a zero zone of the window are skipped;
    /// panels inside a transition zone, where the profile is C^∞ but only
    /// Gevrey-regular, are subdivided before Gauss-Legendre is applied; the
    /// remaining panels have an analytic integrand.
    pub fn eval(&self, zeta: (f64, f64), eta: (f64, f64)) -> [[Complex; 2]; 2] {
        const TRANSITION_SPLIT: usize = 12;
        // u_σ = σ·(ζ+η) - η, so |u_σ|² = a σ² + b σ + c.
        let d = (zeta.0 + eta.0, zeta.1 + eta.1);
        let a = d.0 * d.0 + d.1 * d.1;
        let b = -2.0 * (d.0 * eta.0 + d.1 * eta.1);
        let c = eta.0 * eta.0 + eta.1 * eta.1;
        let mut cuts = vec![0.0, 1.0];
        if a > 0.0 {
            // Cut at the radius extremum so each panel has monotone |u_σ|;
            // zone classification by a panel's midpoint is only then valid
            // (paths tangent to a zone boundary produce no crossing roots).
            let vertex = -b / (2.0 * a);
            if vertex > 1e-14 && vertex < 1.0 - 1e-14 {
                cuts.push(vertex);
            }
            for &radius in &self.breaks {
                let disc = b * b - 4.0 * a * (c - radius * radius);
                if disc <= 0.0 {
                    continue;
                }
                let sq = disc.sqrt();
                for root in [(-b - sq) / (2.0 * a), (-b + sq) / (2.0 * a)] {
                    if root > 1e-14 && root < 1.0 - 1e-14 {
                        cuts.push(root);
                    }
                }
            }
            cuts.sort_by(|x, y| x.partial_cmp(y).unwrap());
            cuts.dedup_by(|x, y| (*x - *y).abs() < 1e-13);
        }

        let radius_at = |s: f64| (a * s * s + b * s + c).max(0.0).sqrt();
        let lo_zero = (2.0f64).powi(self.lo_cut - 1);
        let hi_zero = (2.0f64).powi(self.hi_cut);

        let mut acc = [[Complex::default(); 2]; 2];
        let mut add_panel = |s0: f64, s1: f64, acc: &mut [[Complex; 2]; 2]| {
            let w = s1 - s0;
            for &(x, wt) in &self.nodes {
                let sig = s0 + w * x;
                let u1 = sig * d.0 - eta.0;
                let u2 = sig * d.1 - eta.1;
                let g = self.grad_windowed(u1, u2);
                for j in 0..2 {
                    for l in 0..2 {
                        acc[j][l] += (wt * w) * g[j][l];
                    }
                }
            }
        };

        let point_at = |s: f64| (s * d.0 - eta.0, s * d.1 - eta.1);
        if std::env::var("MSQG_KERNEL_DEBUG").is_ok() {
            eprintln!("cuts: {cuts:?}");
        }
        for pair in cuts.windows(2) {
            let (s0, s1) = (pair[0], pair[1]);
            if s1 - s0 < 1e-14 {
                continue;
            }
            let rm = radius_at(0.5 * (s0 + s1));
            if rm <= lo_zero || rm >= hi_zero {
                continue; // window vanishes on this panel
            }
            // Refinement by the integrand's variation on the panel: angular
            // sweep of u_σ as seen from the origin (times the top harmonic)
            // plus the radial log-range (times the homogeneity degree). The
            // sweep is bounded through the closest-approach geometry so
            // grazing panels are refined correctly.
            let (u0, u1) = (point_at(s0), point_at(s1));
            let (r0, r1) = (radius_at(s0).max(1e-300), radius_at(s1).max(1e-300));
            let rmin = {
                let vertex = if a > 0.0 { (-b / (2.0 * a)).clamp(s0, s1) } else { s0 };
                radius_at(vertex).min(r0).min(r1).max(1e-300)
            };
            let chord = ((u1.0 - u0.0).powi(2) + (u1.1 - u0.1).powi(2)).sqrt();
            let sweep = (chord / rmin).min(std::f64::consts::PI);
            let radial_var = (r0.max(r1) / rmin).ln();
            let var = sweep * (self.max_harmonic as f64 + 2.0)
                + radial_var * (self.rho.abs() + 2.0);
            let mut splits = (var / 0.75).ceil().max(1.0) as usize;
            splits = splits.min(128);
            let in_transition = self.transition_zones.iter().any(|&(za, zb)| rm > za && rm < zb);
            if in_transition {
                splits += TRANSITION_SPLIT;
            }
            if std::env::var("MSQG_KERNEL_DEBUG").is_ok() {
                eprintln!("panel [{s0:.4},{s1:.4}] rm {rm:.3} transition {in_transition} splits {splits}");
            }
            let h = (s1 - s0) / splits as f64;
            for p in 0..splits {
                add_panel(s0 + p as f64 * h, s0 + (p + 1) as f64 * h, &mut acc);
            }
        }

        let minus_i = Complex::new(0.0, -1.0);
        let scale = if self.half { 0.5 } else { 1.0 };
        for row in &mut acc {
            for v in row {
                *v *= minus_i * scale;
            }
        }
        acc
    }
}

/// Aggregate statistics of kernel samples over a product of band annuli.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct KernelStats {
    pub max_abs: f64,
    pub max_trace: f64,
    /// Riemann sum of `Σ_{jℓ}|K̂^{jℓ}|` over the sampled product (an L¹-type
    /// proxy on the frequency side).
    pub sum_abs: f64,
    pub samples: usize,
}

/// Integer lattice points in `supp χ_band`, optionally strided (components
/// restricted to multiples of `stride`). Independent of any grid, so bands
/// beyond a collocation lattice can still be sampled.
pub fn annulus_points(band: i32, stride: i64) -> Vec<(i64, i64)> {
    let outer = (2.0f64).powi(band + 1);
    let bound = outer.ceil() as i64;
    let mut pts = Vec::new();
    let mut k1 = -bound;
    while k1 <= bound {
        let mut k2 = -bound;
        while k2 <= bound {
            let r = ((k1 * k1 + k2 * k2) as f64).sqrt();
            if LpProfile::chi_band(band, r) > 0.0 {
                pts.push((k1, k2));
            }
            k2 += stride;
        }
        k1 += stride;
    }
    pts
}

/// Stream kernel statistics over `supp χ_{band_hi} × supp χ_{band_lo}` with
/// the given component strides. Deterministic; parallel over the ζ list.
pub fn kernel_stats(
    m: &MultiplierSpec,
    qhat: Option<i32>,
    q: i32,
    pairing: Pairing,
    sigma_order: usize,
    stride: i64,
) -> Result<KernelStats> {
    let (hi, lo) = pairing.bands(q);
    let eval = KernelEvaluator::new(m, qhat, hi, lo, sigma_order, pairing.is_self())?;
    let zetas = annulus_points(hi, stride);
    let etas = annulus_points(lo, stride);
    if zetas.is_empty() || etas.is_empty() {
        return Err(Error::EmptyBand(q));
    }
    let partials: Vec<(f64, f64, f64, usize)> = zetas
        .par_chunks(64.max(zetas.len() / (8 * rayon::current_num_threads()).max(1)))
        .map(|chunk| {
            let mut max_abs = 0.0f64;
            let mut max_trace = 0.0f64;
            let mut sum_abs = 0.0f64;
            let mut count = 0usize;
            for &z in chunk {
                for &e in &etas {
                    let k = eval.eval((z.0 as f64, z.1 as f64), (e.0 as f64, e.1 as f64));
                    let mut frob = 0.0;
                    for row in &k {
                        for v in row {
                            let a = v.norm();
                            max_abs = max_abs.max(a);
                            frob += a;
                        }
                    }
                    sum_abs += frob;
                    max_trace = max_trace.max((k[0][0] + k[1][1]).norm());
                    count += 1;
                }
            }
            (max_abs, max_trace, sum_abs, count)
        })
        .collect();
    let mut stats = KernelStats { max_abs: 0.0, max_trace: 0.0, sum_abs: 0.0, samples: 0 };
    for (a, t, s, c) in partials {
        stats.max_abs = stats.max_abs.max(a);
        stats.max_trace = stats.max_trace.max(t);
        stats.sum_abs += s;
        stats.samples += c;
    }
    Ok(stats)
}

/// One stored kernel sample.
#[derive(Debug, Clone, Copy)]
pub struct KernelEntry {
    pub zeta: (i64, i64),
    pub eta: (i64, i64),
    pub value: [[Complex; 2]; 2],
}

/// Explicit table of `K̂_q^{jℓ}` over the lattice product of one band pairing.
#[derive(Debug, Clone)]
pub struct KernelTable {
    pub m: MultiplierSpec,
    pub qhat: i32,
    pub q: i32,
    pub pairing: Pairing,
    pub sigma_order: usize,
    pub grid_n: usize,
    pub entries: Vec<KernelEntry>,
}

impl KernelTable {
    /// Build the table over the grid-clipped band supports. Pair count is
    /// bounded by `budget²`.
    pub fn build(
        grid: Grid,
        m: &MultiplierSpec,
        qhat: i32,
        q: i32,
        pairing: Pairing,
        sigma_order: usize,
        budget: usize,
    ) -> Result<Self> {
        if q < qhat - 2 {
            // Kernel vanishes identically: the q̂ cutoff complement is zero on
            // the whole window. Represent that as an empty table.
            return Ok(KernelTable { m: *m, qhat, q, pairing, sigma_order, grid_n: grid.n(), entries: Vec::new() });
        }
        let (hi, lo) = pairing.bands(q);
        let eval = KernelEvaluator::new(m, Some(qhat), hi, lo, sigma_order, pairing.is_self())?;
        let zetas = band_support(&grid, hi);
        let etas = band_support(&grid, lo);
        for (label, len) in [("high", zetas.len()), ("low", etas.len())] {
            if len > budget {
                let _ = label;
                return Err(Error::ConvolutionBudget { got: len, budget });
            }
        }
        let mut entries = Vec::with_capacity(zetas.len() * etas.len());
        for &(zf, _) in &zetas {
            let z = grid.mode_at(zf);
            for &(ef, _) in &etas {
                let e = grid.mode_at(ef);
                let value = eval.eval((z.0 as f64, z.1 as f64), (e.0 as f64, e.1 as f64));
                entries.push(KernelEntry { zeta: z, eta: e, value });
            }
        }
        Ok(KernelTable { m: *m, qhat, q, pairing, sigma_order, grid_n: grid.n(), entries })
    }

    pub fn stats(&self) -> KernelStats {
        let mut st = KernelStats { max_abs: 0.0, max_trace: 0.0, sum_abs: 0.0, samples: self.entries.len() };
        for e in &self.entries {
            let mut frob = 0.0;
            for row in &e.value {
                for v in row {
                    st.max_abs = st.max_abs.max(v.norm());
                    frob += v.norm();
                }
            }
            st.sum_abs += frob;
            st.max_trace = st.max_trace.max((e.value[0][0] + e.value[1][1]).norm());
        }
        st
    }
}

/// Occupied modes of a scalar field: `(k, coefficient)` with nonzero value.
fn occupied_modes(field: &SpectralField) -> Vec<((i64, i64), Complex)> {
    let grid = field.grid();
    field
        .component(0)
        .iter()
        .enumerate()
        .filter(|(_, c)| c.norm() > 0.0)
        .map(|(flat, c)| (grid.mode_at(flat), *c))
        .collect()
}

/// Embed a field's coefficients on the doubled lattice, where all pairwise
/// mode sums are representable.
pub fn embed_double(field: &SpectralField) -> SpectralField {
    let grid = field.grid();
    let grid2 = Grid::new(2 * grid.n()).expect("doubled grid in range");
    let mut out = SpectralField::zeros(grid2, field.rank());
    out.set_hermitian(field.is_hermitian());
    for c in 0..field.rank().components() {
        let padded = fft::zero_pad(&grid, field.component(c), grid2.n());
        out.component_mut(c).copy_from_slice(&padded);
    }
    out
}

/// `B^{jℓ}[f, g]` by direct double sum over occupied modes, returned as a
/// rank-2 tensor field (components 11, 12, 21, 22) on the doubled lattice so
/// that every mode sum `ζ + η` is kept exactly.
pub fn apply_antidivergence(
    f: &SpectralField,
    g: &SpectralField,
    eval: &KernelEvaluator,
    budget: usize,
) -> Result<SpectralField> {
    f.same_grid(g)?;
    let fmodes = occupied_modes(f);
    let gmodes = occupied_modes(g);
    for len in [fmodes.len(), gmodes.len()] {
        if len > budget {
            return Err(Error::ConvolutionBudget { got: len, budget });
        }
    }
    let grid2 = Grid::new(2 * f.grid().n()).expect("doubled grid in range");
    let n2 = grid2.n();
    let chunk = 16.max(fmodes.len() / (8 * rayon::current_num_threads()).max(1));
    let partials: Vec<Vec<Complex>> = fmodes
        .par_chunks(chunk)
        .map(|chunk| {
            let mut local = vec![Complex::default(); 4 * grid2.modes()];
            for &((z1, z2), fc) in chunk {
                for &((e1, e2), gc) in &gmodes {
                    let k = eval.eval((z1 as f64, z2 as f64), (e1 as f64, e2 as f64));
                    let (s1, s2) = (z1 + e1, z2 + e2);
                    let (Some(i), Some(j)) = (grid2.index_of(s1), grid2.index_of(s2)) else {
                        continue;
                    };
                    let flat = i * n2 + j;
                    let w = fc * gc;
                    local[flat] += k[0][0] * w;
                    local[grid2.modes() + flat] += k[0][1] * w;
                    local[2 * grid2.modes() + flat] += k[1][0] * w;
                    local[3 * grid2.modes() + flat] += k[1][1] * w;
                }
            }
            local
        })
        .collect();
    let mut out = SpectralField::zeros(grid2, Rank::Tensor);
    out.set_hermitian(false);
    for part in partials {
        for (dst, src) in out.coeffs_mut().iter_mut().zip(part.iter()) {
            *dst += src;
        }
    }
    Ok(out)
}

/// Report from [`verify_divergence_form`].
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct DivergenceFormReport {
    pub q: i32,
    pub qhat: i32,
    pub residual: f64,
    pub lhs_norm: f64,
}

/// Verify `P_{q+1}θ T_{>q̂}^ℓ P_qθ + P_qθ T_{>q̂}^ℓ P_{q+1}θ = ∇_j B_q^{jℓ}`
/// with both sides represented exactly on the doubled lattice; returns the
/// relative L² residual.
pub fn verify_divergence_form(
    theta: &SpectralField,
    q: i32,
    qhat: i32,
    m: &MultiplierSpec,
    sigma_order: usize,
    budget: usize,
) -> Result<DivergenceFormReport> {
    theta.expect_scalar()?;
    if q < qhat - 2 {
        return Err(Error::Config(format!("q = {q} below qhat - 2 = {}: kernel vanishes", qhat - 2)));
    }
    let grid = theta.grid();
    let f = lp_project(theta, Projection::Band(q + 1));
    let g = lp_project(theta, Projection::Band(q));

    // LHS: products of doubled-lattice physical fields (exact convolution).
    let table = VelocityTable::new(grid, m);
    let tf = {
        let v = table.apply_unchecked(&f);
        apply_radial(&v, |r| {
            let c = LpProfile::chi_leq(qhat, r);
            1.0 - c * c
        })
    };
    let tg = {
        let v = table.apply_unchecked(&g);
        apply_radial(&v, |r| {
            let c = LpProfile::chi_leq(qhat, r);
            1.0 - c * c
        })
    };
    let grid2 = Grid::new(2 * grid.n()).expect("doubled grid in range");
    let f2 = embed_double(&f);
    let g2 = embed_double(&g);
    let tf2 = embed_double(&tf);
    let tg2 = embed_double(&tg);
    let fp = f2.to_physical(0);
    let gp = g2.to_physical(0);
    let mut lhs = [vec![Complex::default(); grid2.modes()], vec![Complex::default(); grid2.modes()]];
    for l in 0..2 {
        let tfp = tf2.to_physical(l);
        let tgp = tg2.to_physical(l);
        for i in 0..grid2.modes() {
            lhs[l][i] = fp[i] * tgp[i] + gp[i] * tfp[i];
        }
        fft::forward(&grid2, &mut lhs[l]);
    }

    // RHS: ∇_j B^{jℓ} through the σ-integrated kernel.
    let eval = KernelEvaluator::new(m, Some(qhat), q + 1, q, sigma_order, false)?;
    let b = apply_antidivergence(&f, &g, &eval, budget)?;
    let n2 = grid2.n();
    let mut lhs_sq = 0.0;
    let mut diff_sq = 0.0;
    for i in 0..n2 {
        let k1 = grid2.wavenumber(i) as f64;
        for jj in 0..n2 {
            let k2 = grid2.wavenumber(jj) as f64;
            let flat = i * n2 + jj;
            let ik = [Complex::new(0.0, k1), Complex::new(0.0, k2)];
            // Tensor components: 0 = (j0,ℓ0), 1 = (j0,ℓ1), 2 = (j1,ℓ0), 3 = (j1,ℓ1);
            // ∇_j B^{jℓ} contracts j.
            for l in 0..2 {
                let rhs = ik[0] * b.component(l)[flat] + ik[1] * b.component(2 + l)[flat];
                let d = lhs[l][flat] - rhs;
                lhs_sq += lhs[l][flat].norm_sqr();
                diff_sq += d.norm_sqr();
            }
        }
    }
    if lhs_sq == 0.0 {
        return Err(Error::EmptyBand(q));
    }
    Ok(DivergenceFormReport { q, qhat, residual: (diff_sq / lhs_sq).sqrt(), lhs_norm: lhs_sq.sqrt() })
}

/// Symmetric trace-free rank-2 tensor field (components 11, 12, 22).
#[derive(Debug, Clone)]
pub struct TraceFreeTensorField {
    grid: Grid,
    pub t11: Vec<Complex>,
    pub t12: Vec<Complex>,
    pub t22: Vec<Complex>,
}

impl TraceFreeTensorField {
    pub fn zeros(grid: Grid) -> Self {
        let z = vec![Complex::default(); grid.modes()];
        TraceFreeTensorField { grid, t11: z.clone(), t12: z.clone(), t22: z }
    }

    pub fn grid(&self) -> Grid {
        self.grid
    }

    /// Add the symmetric part of a rank-2 tensor `SpectralField`.
    pub fn accumulate_symmetrized(&mut self, tensor: &SpectralField) {
        assert_eq!(tensor.grid(), self.grid);
        let (a, b, c, d) = (tensor.component(0), tensor.component(1), tensor.component(2), tensor.component(3));
        for i in 0..self.grid.modes() {
            self.t11[i] += a[i];
            self.t12[i] += 0.5 * (b[i] + c[i]);
            self.t22[i] += d[i];
        }
    }

    /// Physical samples of the three components (real parts).
    pub fn to_physical(&self) -> [Vec<f64>; 3] {
        let mk = |c: &Vec<Complex>| {
            let mut buf = c.clone();
            fft::inverse(&self.grid, &mut buf);
            buf.iter().map(|v| v.re).collect::<Vec<f64>>()
        };
        [mk(&self.t11), mk(&self.t12), mk(&self.t22)]
    }

    /// (max pointwise |trace|, max pointwise component magnitude).
    pub fn trace_stats(&self) -> (f64, f64) {
        let [p11, p12, p22] = self.to_physical();
        let mut max_trace = 0.0f64;
        let mut max_abs = 0.0f64;
        for i in 0..p11.len() {
            max_trace = max_trace.max((p11[i] + p22[i]).abs());
            max_abs = max_abs.max(p11[i].abs()).max(p12[i].abs()).max(p22[i].abs());
        }
        (max_trace, max_abs)
    }

    /// `∇_j∇_ℓ T^{jℓ}` as a scalar field.
    pub fn double_divergence(&self) -> SpectralField {
        let grid = self.grid;
        let n = grid.n();
        let mut out = vec![Complex::default(); grid.modes()];
        for i in 0..n {
            let k1 = grid.wavenumber(i) as f64;
            for j in 0..n {
                let k2 = grid.wavenumber(j) as f64;
                let flat = i * n + j;
                out[flat] = -(k1 * k1 * self.t11[flat]
                    + 2.0 * k1 * k2 * self.t12[flat]
                    + k2 * k2 * self.t22[flat]);
            }
        }
        SpectralField::from_coeffs(grid, out, false)
    }
}

/// `ℛ^{jℓ}f = A δ^{jℓ} Δ^{-1} f + B Δ^{-2} ∇^j∇^ℓ f` with `(A, B) = (-1, 2)`:
/// inverts the second-order divergence on mean-zero fields while taking
/// symmetric trace-free values (`∇_j∇_ℓ ℛ^{jℓ} f = f`, `δ_{jℓ} ℛ^{jℓ} f = 0`).
pub fn calderon_r(f: &SpectralField) -> Result<TraceFreeTensorField> {
    f.expect_scalar()?;
    let grid = f.grid();
    let n = grid.n();
    let mut out = TraceFreeTensorField::zeros(grid);
    let src = f.component(0);
    for i in 0..n {
        let k1 = grid.wavenumber(i) as f64;
        for j in 0..n {
            let k2 = grid.wavenumber(j) as f64;
            let flat = i * n + j;
            let r2 = k1 * k1 + k2 * k2;
            if r2 == 0.0 {
                continue;
            }
            // Symbol: |k|⁻² (δ^{jℓ} - 2 k̂_j k̂_ℓ). Writing the diagonal as
            // ±(k₂² - k₁²)/|k|² makes the trace vanish bitwise.
            let w = src[flat] / r2;
            let diag = (k2 * k2 - k1 * k1) / r2;
            out.t11[flat] = w * diag;
            out.t12[flat] = w * (-2.0 * k1 * k2 / r2);
            out.t22[flat] = -(w * diag);
        }
    }
    Ok(out)
}

/// Solve the 2×2 system `A + B = 1`, `dA + B = 0` that defines ℛ in
/// dimension `d`; kept explicit so the coefficient choice is testable.
pub fn calderon_coefficients(d: usize) -> (f64, f64) {
    let d = d as f64;
    // A + B = 1, dA + B = 0  =>  A = -1/(d-1), B = d/(d-1).
    (-1.0 / (d - 1.0), d / (d - 1.0))
}

/// `∇_ℓ(θ T^ℓθ)` with exact coefficients on the doubled lattice (the oracle
/// against which the assembled double divergence is compared).
pub fn divergence_of_nonlinearity(theta: &SpectralField, m: &MultiplierSpec) -> Result<SpectralField> {
    theta.expect_scalar()?;
    let grid = theta.grid();
    let table = VelocityTable::new(grid, m);
    let v = table.apply_unchecked(theta);
    let grid2 = Grid::new(2 * grid.n()).expect("doubled grid");
    let t2 = embed_double(theta);
    let tp = t2.to_physical(0);
    let v2 = embed_double(&v);
    let mut acc = vec![Complex::default(); grid2.modes()];
    let n2 = grid2.n();
    for l in 0..2 {
        let vp = v2.to_physical(l);
        let mut prod: Vec<Complex> = tp.iter().zip(vp.iter()).map(|(a, b)| a * b).collect();
        fft::forward(&grid2, &mut prod);
        for i in 0..n2 {
            let k1 = grid2.wavenumber(i) as f64;
            for j in 0..n2 {
                let k2 = grid2.wavenumber(j) as f64;
                let k = if l == 0 { k1 } else { k2 };
                let flat = i * n2 + j;
                acc[flat] += Complex::new(0.0, k) * prod[flat];
            }
        }
    }
    Ok(SpectralField::from_coeffs(grid2, acc, false))
}

/// Assemble the symmetric trace-free anti-divergence `T̃ = T̃_{L2} + T̃_{HS}`
/// of `∇_ℓ(θT^ℓθ)` on the doubled lattice:
///
/// * low route: per band `r`, `G_r^b = p_rθ T^b L_{r-2}θ + L_{r-2}θ T^b p_rθ`
///   feeds `T̃_{L2} = ℛ[Σ_r ∇_b G_r^b]`,
/// * high route: per band, the kernels of the three pairings
///   `(p_{q+1}, p_{q+1})`, `(p_{q+1}, p_q)`, `(p_{q+1}, p_{q-1})` give
///   anti-divergences whose symmetric parts sum to `T̃_{HS}` (already
///   trace-free for mSQG).
///
/// The result satisfies `∇_j∇_ℓ T̃^{jℓ} = ∇_ℓ(θ T^ℓθ)`.
pub fn assemble_tracefree_antidivergence(
    theta: &SpectralField,
    m: &MultiplierSpec,
    sigma_order: usize,
    budget: usize,
) -> Result<TraceFreeTensorField> {
    theta.expect_scalar()?;
    if !matches!(m.family, crate::multiplier::MultiplierFamily::Msqg) {
        return Err(Error::ParityMismatch("the trace-free high-high kernel holds only for mSQG"));
    }
    let mut theta = theta.clone();
    theta.remove_mean();
    let grid = theta.grid();
    let grid2 = Grid::new(2 * grid.n()).expect("doubled grid");
    let table = VelocityTable::new(grid, m);
    let top = *occupied_bands(&grid).end();

    // Low route: f = Σ_r ∇_b G_r^b accumulated exactly on the doubled lattice.
    let mut f_low = vec![Complex::default(); grid2.modes()];
    let n2 = grid2.n();
    for r in 0..=top {
        let p = lp_project(&theta, Projection::Band(r));
        let low = lp_project(&theta, Projection::UpTo(r - 2));
        if p.max_coeff_abs() == 0.0 || low.max_coeff_abs() == 0.0 {
            continue;
        }
        let tp_low = table.apply_unchecked(&low);
        let tp_band = table.apply_unchecked(&p);
        let pp = embed_double(&p).to_physical(0);
        let lp = embed_double(&low).to_physical(0);
        for b in 0..2 {
            let tl = embed_double(&tp_low).to_physical(b);
            let tb = embed_double(&tp_band).to_physical(b);
            let mut g: Vec<Complex> = (0..grid2.modes()).map(|i| pp[i] * tl[i] + lp[i] * tb[i]).collect();
            fft::forward(&grid2, &mut g);
            for i in 0..n2 {
                let k1 = grid2.wavenumber(i) as f64;
                for j in 0..n2 {
                    let k2 = grid2.wavenumber(j) as f64;
                    let k = if b == 0 { k1 } else { k2 };
                    let flat = i * n2 + j;
                    f_low[flat] += Complex::new(0.0, k) * g[flat];
                }
            }
        }
    }
    let f_low = SpectralField::from_coeffs(grid2, f_low, false);
    let mut tensor = calderon_r(&f_low)?;

    // High route: kernels per band and pairing.
    for q in -1..=top {
        for pairing in [Pairing::SymNext, Pairing::SelfNext, Pairing::SymSkip] {
            let (hi, lo) = pairing.bands(q);
            let f = lp_project(&theta, Projection::Band(hi));
            if f.max_coeff_abs() == 0.0 {
                continue;
            }
            let g = if pairing.is_self() { f.clone() } else { lp_project(&theta, Projection::Band(lo)) };
            if g.max_coeff_abs() == 0.0 {
                continue;
            }
            let eval = KernelEvaluator::new(m, None, hi, lo, sigma_order, pairing.is_self())?;
            let b = apply_antidivergence(&f, &g, &eval, budget)?;
            tensor.accumulate_symmetrized(&b);
        }
    }
    Ok(tensor)
}

/// Quadratic polynomial `Q(y) = A + B y₁ + C y₂ + D |y|²` (trace-free Hessian
/// vanishes for exactly this family).
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct QuadPoly {
    pub a: f64,
    pub b: f64,
    pub c: f64,
    pub d: f64,
}

impl QuadPoly {
    fn value(&self, y: (f64, f64)) -> f64 {
        self.a + self.b * y.0 + self.c * y.1 + self.d * (y.0 * y.0 + y.1 * y.1)
    }

    fn grad(&self, y: (f64, f64)) -> (f64, f64) {
        (self.b + 2.0 * self.d * y.0, self.c + 2.0 * self.d * y.1)
    }
}

/// Windowed moment integrals `I(R) = ∫ F^{jℓ} ∇_j∇_ℓ(χ(y/R) Q(y)) dy` for a
/// concentrated trace-free tensor field, with the torus centered at `(π, π)`
/// acting as a window on the plane. The cutoff is the fixed radial profile
/// (`= 1` for `|y| ≤ R/2`, `= 0` for `|y| ≥ R`); all derivatives analytic.
///
/// Rejects fields whose mass fraction outside the radius-`window_radius`
/// ball exceeds 1e-6.
pub fn verify_moment_lemma(
    f: &TraceFreeTensorField,
    q: QuadPoly,
    window_radius: f64,
    r_list: &[f64],
) -> Result<Vec<(f64, f64)>> {
    let grid = f.grid();
    let n = grid.n();
    let [p11, p12, p22] = f.to_physical();
    let c = std::f64::consts::PI;
    let cell = (Grid::PERIOD / n as f64).powi(2);

    // Containment check.
    let mut mass_in = 0.0;
    let mut mass_out = 0.0;
    for i in 0..n {
        for j in 0..n {
            let (x1, x2) = grid.point(i, j);
            let y = (x1 - c, x2 - c);
            let r = (y.0 * y.0 + y.1 * y.1).sqrt();
            let a = p11[i * n + j].abs() + 2.0 * p12[i * n + j].abs() + p22[i * n + j].abs();
            if r <= window_radius {
                mass_in += a;
            } else {
                mass_out += a;
            }
        }
    }
    let frac = mass_out / (mass_in + mass_out).max(1e-300);
    if frac > 1e-6 {
        return Err(Error::MassOutsideWindow(frac));
    }

    let mut out = Vec::with_capacity(r_list.len());
    for &rr in r_list {
        let mut acc = 0.0;
        for i in 0..n {
            for j in 0..n {
                let (x1, x2) = grid.point(i, j);
                let y = (x1 - c, x2 - c);
                let r = (y.0 * y.0 + y.1 * y.1).sqrt();
                let s = r / rr;
                let chi = LpProfile::chi(s);
                let chi_r = LpProfile::chi_deriv(s) / rr;
                let chi_rr = LpProfile::chi_deriv2(s) / (rr * rr);
                // Hessian of χ(|y|/R): radial part + angular part.
                let (h11, h12, h22) = if r > 1e-12 {
                    let (c1, c2) = (y.0 / r, y.1 / r);
                    let rad = chi_rr;
                    let ang = chi_r / r;
                    (
                        rad * c1 * c1 + ang * (1.0 - c1 * c1),
                        (rad - ang) * c1 * c2,
                        rad * c2 * c2 + ang * (1.0 - c2 * c2),
                    )
                } else {
                    (chi_rr, 0.0, chi_rr)
                };
                let gchi = if r > 1e-12 {
                    (chi_r * y.0 / r, chi_r * y.1 / r)
                } else {
                    (0.0, 0.0)
                };
                let qv = q.value(y);
                let gq = q.grad(y);
                // ∇∇(χQ) = χ∇∇Q + ∇χ⊗∇Q + ∇Q⊗∇χ + Q∇∇χ.
                let g11 = chi * 2.0 * q.d + 2.0 * gchi.0 * gq.0 + qv * h11;
                let g12 = gchi.0 * gq.1 + gchi.1 * gq.0 + qv * h12;
                let g22 = chi * 2.0 * q.d + 2.0 * gchi.1 * gq.1 + qv * h22;
                let flat = i * n + j;
                acc += p11[flat] * g11 + 2.0 * p12[flat] * g12 + p22[flat] * g22;
            }
        }
        out.push((rr, acc * cell));
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::multiplier::{AngularProfile, MultiplierFamily};

    #[test]
    fn calderon_coefficients_in_2d() {
        assert_eq!(calderon_coefficients(2), (-1.0, 2.0));
    }

    #[test]
    fn calderon_r_identities() {
        let grid = Grid::new(32).unwrap();
        let f = SpectralField::from_fn(grid, |x, y| x.sin() + (2.0 * x + y).cos());
        let r = calderon_r(&f).unwrap();
        // Trace vanishes exactly in spectral space.
        for i in 0..grid.modes() {
            assert_eq!(r.t11[i] + r.t22[i], Complex::default());
        }
        // ∇∇·ℛf recovers f.
        let dd = r.double_divergence();
        let mut f0 = f.clone();
        f0.remove_mean();
        assert!(dd.coeff_distance(&f0) < 1e-13);
    }

    #[test]
    fn kernel_constant_path_matches_gradient() {
        // ζ = -η makes u_σ constant: K̂(ζ, -ζ) = -i ∇m_w(ζ), no quadrature error.
        let m = MultiplierSpec::msqg(0.5);
        let (q, qhat) = (4, 1);
        let eval = KernelEvaluator::new(&m, Some(qhat), q + 1, q, 16, false).unwrap();
        let zeta = (13.0, 5.0);
        let k = eval.eval(zeta, (-zeta.0, -zeta.1));
        // Window factors are 1 at |ζ| ≈ 13.9 ∈ [2^q⁻¹ = 8, 2^{q+2} = 64],
        // and the q̂ = 1 complement is 1 beyond |ξ| ≥ 2.
        let g = m.grad(zeta.0, zeta.1);
        let minus_i = Complex::new(0.0, -1.0);
        for j in 0..2 {
            for l in 0..2 {
                let expect = minus_i * g[j][l];
                assert!((k[j][l] - expect).norm() < 1e-13 * (1.0 + expect.norm()), "j{j} l{l}");
            }
        }
    }

    #[test]
    fn kernel_trace_free_for_msqg_not_for_radial() {
        let q = 4;
        let msqg = MultiplierSpec::msqg(0.25);
        let st = kernel_stats(&msqg, Some(1), q, Pairing::SymNext, 12, 2).unwrap();
        assert!(st.max_trace <= 1e-12 * st.max_abs, "trace {} abs {}", st.max_trace, st.max_abs);
        let radial =
            MultiplierSpec::new(0.25, MultiplierFamily::RadialReal(AngularProfile::Constant(1.0)), 1.0).unwrap();
        let st = kernel_stats(&radial, Some(1), q, Pairing::SymNext, 12, 2).unwrap();
        assert!(st.max_trace >= 1e-2 * st.max_abs);
    }

    #[test]
    fn kernel_rejects_even_multiplier() {
        let even = MultiplierSpec::new(0.5, MultiplierFamily::TangentialReal(AngularProfile::Cos(1)), 1.0).unwrap();
        assert!(matches!(
            KernelEvaluator::new(&even, None, 5, 4, 8, false),
            Err(Error::ParityMismatch(_))
        ));
    }

    #[test]
    fn sigma_quadrature_converges() {
        let m = MultiplierSpec::msqg(0.5);
        let mk = |order| KernelEvaluator::new(&m, Some(1), 5, 4, order, false).unwrap();
        let (e16, e32) = (mk(16), mk(32));
        let mut worst: f64 = 0.0;
        for &(z, e) in &[((17.0, 3.0), (9.0, -4.0)), ((24.0, -11.0), (-6.0, 12.0)), ((20.0, 20.0), (13.0, 2.0))] {
            let a = e16.eval(z, e);
            let b = e32.eval(z, e);
            let mut scale: f64 = 1e-300;
            for row in &b {
                for v in row {
                    scale = scale.max(v.norm());
                }
            }
            for j in 0..2 {
                for l in 0..2 {
                    worst = worst.max((a[j][l] - b[j][l]).norm() / scale);
                }
            }
        }
        assert!(worst <= 1e-12, "sigma order 16 vs 32 relative change {worst}");
    }

    #[test]
    fn antidivergence_single_mode_pair() {
        // f, g single modes: output is a single mode at ζ+η valued K̂(ζ,η)f̂ĝ.
        let grid = Grid::new(32).unwrap();
        let m = MultiplierSpec::msqg(0.5);
        let (zeta, eta) = ((5i64, 2i64), (3i64, -4i64));
        let mut f = SpectralField::zeros(grid, Rank::Scalar);
        f.set_hermitian(false);
        let fi = grid.mode_index(zeta.0, zeta.1).unwrap();
        f.component_mut(0)[fi] = Complex::new(0.7, 0.2);
        let mut g = SpectralField::zeros(grid, Rank::Scalar);
        g.set_hermitian(false);
        let gi = grid.mode_index(eta.0, eta.1).unwrap();
        g.component_mut(0)[gi] = Complex::new(-0.3, 1.1);
        let eval = KernelEvaluator::new(&m, Some(0), 3, 2, 16, false).unwrap();
        let b = apply_antidivergence(&f, &g, &eval, 64).unwrap();
        let grid2 = b.grid();
        let k = eval.eval((zeta.0 as f64, zeta.1 as f64), (eta.0 as f64, eta.1 as f64));
        let expect = k[0][1] * Complex::new(0.7, 0.2) * Complex::new(-0.3, 1.1);
        let flat = grid2.mode_index(zeta.0 + eta.0, zeta.1 + eta.1).unwrap();
        assert!((b.component(1)[flat] - expect).norm() < 1e-14 * expect.norm());
        // All other modes vanish.
        let total: f64 = b.coeffs().iter().map(|c| c.norm()).sum();
        let at_mode: f64 = (0..4).map(|c| b.component(c)[flat].norm()).sum();
        assert!((total - at_mode).abs() < 1e-14 * total);
        // Zero inputs give a zero tensor.
        let z = SpectralField::zeros(grid, Rank::Scalar);
        let b0 = apply_antidivergence(&z, &g, &eval, 64).unwrap();
        assert_eq!(b0.max_coeff_abs(), 0.0);
    }

    #[test]
    fn budget_guard_triggers() {
        let grid = Grid::new(64).unwrap();
        let theta = SpectralField::from_fn(grid, |x, y| (7.0 * x).sin() * (3.0 * y).cos());
        let m = MultiplierSpec::msqg(0.5);
        let f = lp_project(&theta, Projection::Band(3));
        let eval = KernelEvaluator::new(&m, None, 3, 3, 8, true).unwrap();
        assert!(matches!(
            apply_antidivergence(&f, &f, &eval, 1),
            Err(Error::ConvolutionBudget { .. })
        ));
    }

    #[test]
    fn moment_lemma_compact_and_gaussian() {
        let grid = Grid::new(64).unwrap();
        // Synthetic trace-free field concentrated at the center with Gaussian
        // tails: T = (a, b; b, -a) with Gaussian envelopes.
        let c = std::f64::consts::PI;
        let env = |x: f64, y: f64| (-(((x - c) * (x - c) + (y - c) * (y - c)) / (2.0 * 0.35 * 0.35))).exp();
        let a = SpectralField::from_fn(grid, |x, y| env(x, y) * (1.0 + 0.3 * (x - c)));
        let b = SpectralField::from_fn(grid, |x, y| env(x, y) * (0.5 - 0.2 * (y - c)));
        let mut f = TraceFreeTensorField::zeros(grid);
        f.t11.copy_from_slice(a.component(0));
        f.t22.iter_mut().zip(a.component(0)).for_each(|(t, s)| *t = -s);
        f.t12.copy_from_slice(b.component(0));

        let q = QuadPoly { a: 0.0, b: 0.0, c: 0.0, d: 1.0 };
        let rs = [1.0, 1.4, 2.0, 2.8, 4.0, 5.6, 8.0];
        let series = verify_moment_lemma(&f, q, 0.95 * c, &rs).unwrap();
        // χ ≡ 1 on the window for R ≥ 2·π√2 ≈ 8.9; by then I(R) is pure
        // roundoff, and beyond the concentration scale it decays.
        let vals: Vec<f64> = series.iter().map(|(_, v)| v.abs()).collect();
        assert!(vals.last().unwrap() < &1e-10, "tail {:?}", vals);
        for w in vals.windows(2).skip(1) {
            assert!(w[1] <= w[0] * 1.5 + 1e-12, "{vals:?}");
        }
        // Constant Q (only cutoff-derivative terms) also decays.
        let q0 = QuadPoly { a: 1.0, b: 0.0, c: 0.0, d: 0.0 };
        let series = verify_moment_lemma(&f, q0, 0.95 * c, &[2.0, 4.0, 8.0]).unwrap();
        assert!(series.last().unwrap().1.abs() < 1e-10);

        // A field with heavy mass outside the window is rejected.
        let wide = SpectralField::from_fn(grid, |x, _| 1.0 + 0.1 * x.sin());
        let mut fw = TraceFreeTensorField::zeros(grid);
        fw.t11.copy_from_slice(wide.component(0));
        fw.t22.iter_mut().zip(wide.component(0)).for_each(|(t, s)| *t = -s);
        assert!(matches!(
            verify_moment_lemma(&fw, q, 1.5, &[1.0]),
            Err(Error::MassOutsideWindow(_))
        ));
    }
}
