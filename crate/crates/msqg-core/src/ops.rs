//! The mSQG Biot-Savart operator, the pointwise nonlinearity, the weak
//! bilinear/trilinear forms, the low/high paraproduct split of the bilinear
//! form, and the truncated-Hamiltonian flux diagnostic.
//!
//! Sign conventions. The canonical bilinear form computed here is
//!
//! ```text
//!   B[ψ, θ] = ∫ ∇_ℓ ψ · θ T^ℓ θ dx,
//! ```
//!
//! which for incompressible `T` equals `-∫ ψ T^ℓθ ∇_ℓθ dx`. The geometric
//! optics experiments pair the nonlinearity directly against the test
//! function (`∫ ψ T^ℓθ ∇_ℓθ dx`, see [`nonlinearity_pairing`]), which also
//! makes sense for compressible symbols.

use crate::lp::{band_support, lp_project, occupied_bands, LpProfile, Projection};
use crate::multiplier::{apply_radial, MultiplierSpec};
use crate::{fft, Complex, Error, Grid, Rank, Result, SpectralField};
use serde::{Deserialize, Serialize};

/// Precomputed lattice table of a vector multiplier `m^ℓ(k)`.
///
/// The symbol is evaluated on a half lattice and mirrored, so real-symmetric
/// symbols map Hermitian fields to bitwise Hermitian fields; building the
/// table once makes repeated velocity evaluations cheap inside time loops.
#[derive(Debug, Clone)]
pub struct VelocityTable {
    grid: Grid,
    spec: MultiplierSpec,
    sym: [Vec<Complex>; 2],
}

impl VelocityTable {
    pub fn new(grid: Grid, spec: &MultiplierSpec) -> Self {
        let n = grid.n();
        let real_symmetric = spec.is_real_symmetric();
        let mut sym = [vec![Complex::default(); grid.modes()], vec![Complex::default(); grid.modes()]];
        for i in 0..n {
            let k1 = grid.wavenumber(i);
            for j in 0..n {
                let k2 = grid.wavenumber(j);
                if (k1, k2) == (0, 0) || grid.is_nyquist(i) || grid.is_nyquist(j) {
                    continue;
                }
                if !(k1 > 0 || (k1 == 0 && k2 > 0)) {
                    continue;
                }
                let m = spec.eval(k1 as f64, k2 as f64);
                let here = i * n + j;
                sym[0][here] = m[0];
                sym[1][here] = m[1];
                if let (Some(mi), Some(mj)) = (grid.index_of(-k1), grid.index_of(-k2)) {
                    let there = mi * n + mj;
                    let mm = if real_symmetric {
                        [m[0].conj(), m[1].conj()]
                    } else {
                        spec.eval(-k1 as f64, -k2 as f64)
                    };
                    sym[0][there] = mm[0];
                    sym[1][there] = mm[1];
                }
            }
        }
        VelocityTable { grid, spec: *spec, sym }
    }

    pub fn spec(&self) -> &MultiplierSpec {
        &self.spec
    }

    /// `T θ` without the real-symmetry guard (used internally; the guarded
    /// public entry point is [`biot_savart`]).
    pub fn apply_unchecked(&self, theta: &SpectralField) -> SpectralField {
        assert_eq!(self.grid, theta.grid());
        let mut out = SpectralField::zeros(self.grid, Rank::Vector);
        out.set_hermitian(theta.is_hermitian() && self.spec.is_real_symmetric());
        let src = theta.component(0);
        for l in 0..2 {
            let dst = out.component_mut(l);
            for (d, (s, m)) in dst.iter_mut().zip(src.iter().zip(self.sym[l].iter())) {
                *d = s * m;
            }
        }
        out
    }
}

/// The advecting velocity `T^ℓ θ` with symbol `m^ℓ`. Incompressible families
/// satisfy `∇_ℓ T^ℓ θ = 0` exactly in spectral space.
pub fn biot_savart(theta: &SpectralField, m: &MultiplierSpec) -> Result<SpectralField> {
    theta.expect_scalar()?;
    m.apply(theta)
}

/// Hard radial truncation `|k| < limit` (the 2/3-rule uses `limit = n/3`).
pub fn truncate_radial(field: &SpectralField, limit: f64) -> SpectralField {
    let grid = field.grid();
    let n = grid.n();
    let mut out = field.clone();
    for c in 0..field.rank().components() {
        let comp = out.component_mut(c);
        for i in 0..n {
            let k1 = grid.wavenumber(i);
            for j in 0..n {
                let k2 = grid.wavenumber(j);
                if ((k1 * k1 + k2 * k2) as f64).sqrt() >= limit {
                    comp[i * n + j] = Complex::default();
                }
            }
        }
    }
    out
}

/// The pointwise nonlinearity `T^ℓθ ∇_ℓθ`, computed by physical-space
/// products of spectrally differentiated factors on the native grid.
///
/// With `dealias` the inputs and the product are truncated by the 2/3 rule,
/// which makes the retained quadratic interactions alias-free.
pub fn nonlinearity(theta: &SpectralField, m: &MultiplierSpec, dealias: bool) -> Result<SpectralField> {
    let table = VelocityTable::new(theta.grid(), m);
    Ok(nonlinearity_with_table(theta, &table, dealias))
}

pub fn nonlinearity_with_table(theta: &SpectralField, table: &VelocityTable, dealias: bool) -> SpectralField {
    let grid = theta.grid();
    let limit = grid.n() as f64 / 3.0;
    let theta_tr = if dealias { truncate_radial(theta, limit) } else { theta.clone() };
    let v = table.apply_unchecked(&theta_tr);
    let g = theta_tr.gradient();
    let mut acc = vec![Complex::default(); grid.modes()];
    for l in 0..2 {
        let vp = v.to_physical(l);
        let gp = g.to_physical(l);
        for (a, (x, y)) in acc.iter_mut().zip(vp.iter().zip(gp.iter())) {
            *a += x * y;
        }
    }
    fft::forward(&grid, &mut acc);
    let mut out = SpectralField::from_coeffs(grid, acc, false);
    out.set_hermitian(theta.is_hermitian() && table.spec.is_real_symmetric());
    let out = if dealias { truncate_radial(&out, limit) } else { out };
    let mut out = out;
    // The zero mode of ∇·(θ Tθ) vanishes identically for incompressible
    // symbols; pin it so the mean is conserved bitwise.
    if table.spec.is_incompressible() {
        out.component_mut(0)[0] = Complex::default();
    }
    out.zero_nyquist();
    out
}

/// Padding factor for exact quadrature of triple products: every factor is
/// band-limited by `√2·n/2`, so `3n` resolves all triple interactions.
fn quad_m(n: usize) -> usize {
    3 * n
}

fn physical_padded(field: &SpectralField, c: usize, m: usize) -> Vec<Complex> {
    field.to_physical_padded(c, m)
}

/// `∫ f₁ f₂ f₃ dx` over the torus, by collocation on the padded lattice.
fn integral_triple(m: usize, a: &[Complex], b: &[Complex], c: &[Complex]) -> Complex {
    let cell = (Grid::PERIOD / m as f64).powi(2);
    let mut acc = Complex::default();
    for i in 0..m * m {
        acc += a[i] * b[i] * c[i];
    }
    acc * cell
}

/// The canonical bilinear form `B[ψ, θ] = ∫ ∇_ℓψ θ T^ℓθ dx` by dealiased
/// quadrature (complex-valued variant; real inputs with real-symmetric
/// symbols give a real result up to roundoff).
pub fn bilinear_form_c(psi: &SpectralField, theta: &SpectralField, m: &MultiplierSpec) -> Result<Complex> {
    psi.same_grid(theta)?;
    psi.expect_scalar()?;
    theta.expect_scalar()?;
    let grid = theta.grid();
    let mm = quad_m(grid.n());
    let table = VelocityTable::new(grid, m);
    let v = table.apply_unchecked(theta);
    let gpsi = psi.gradient();
    let tp = physical_padded(theta, 0, mm);
    let mut acc = Complex::default();
    for l in 0..2 {
        let gl = physical_padded(&gpsi, l, mm);
        let vl = physical_padded(&v, l, mm);
        acc += integral_triple(mm, &gl, &tp, &vl);
    }
    Ok(acc)
}

/// Real-valued [`bilinear_form_c`] for Hermitian inputs.
pub fn bilinear_form(psi: &SpectralField, theta: &SpectralField, m: &MultiplierSpec) -> Result<f64> {
    Ok(bilinear_form_c(psi, theta, m)?.re)
}

/// `∫ ψ T^ℓθ ∇_ℓθ dx`: the nonlinearity paired against a test function.
/// Valid for compressible symbols as well; equals `-B[ψ, θ]` when `T` is
/// incompressible.
pub fn nonlinearity_pairing_c(psi: &SpectralField, theta: &SpectralField, m: &MultiplierSpec) -> Result<Complex> {
    psi.same_grid(theta)?;
    let grid = theta.grid();
    let mm = quad_m(grid.n());
    let table = VelocityTable::new(grid, m);
    let v = table.apply_unchecked(theta);
    let g = theta.gradient();
    let pp = physical_padded(psi, 0, mm);
    let mut acc = Complex::default();
    for l in 0..2 {
        let vl = physical_padded(&v, l, mm);
        let gl = physical_padded(&g, l, mm);
        acc += integral_triple(mm, &pp, &vl, &gl);
    }
    Ok(acc)
}

pub fn nonlinearity_pairing(psi: &SpectralField, theta: &SpectralField, m: &MultiplierSpec) -> Result<f64> {
    Ok(nonlinearity_pairing_c(psi, theta, m)?.re)
}

/// Trilinear form `T[ψ, θ, φ] = ∫ ∇_ℓψ (θ T^ℓφ + φ T^ℓθ) dx`, symmetric in
/// `(θ, φ)`, with `B[ψ, θ] = ½ T[ψ, θ, θ]`.
pub fn trilinear_form(
    psi: &SpectralField,
    theta: &SpectralField,
    phi: &SpectralField,
    m: &MultiplierSpec,
) -> Result<f64> {
    psi.same_grid(theta)?;
    psi.same_grid(phi)?;
    let grid = psi.grid();
    let mm = quad_m(grid.n());
    let table = VelocityTable::new(grid, m);
    let v_phi = table.apply_unchecked(phi);
    let v_theta = table.apply_unchecked(theta);
    let gpsi = psi.gradient();
    let tp = physical_padded(theta, 0, mm);
    let pp = physical_padded(phi, 0, mm);
    let mut acc = Complex::default();
    for l in 0..2 {
        let gl = physical_padded(&gpsi, l, mm);
        let vphi = physical_padded(&v_phi, l, mm);
        let vtheta = physical_padded(&v_theta, l, mm);
        acc += integral_triple(mm, &gl, &tp, &vphi);
        acc += integral_triple(mm, &gl, &pp, &vtheta);
    }
    Ok(acc.re)
}

/// Which paraproduct bucket a `(k, q)` contribution belongs to.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum TermKind {
    LL,
    HL,
    LH,
    HH,
}

impl TermKind {
    pub fn label(self) -> &'static str {
        match self {
            TermKind::LL => "LL",
            TermKind::HL => "HL",
            TermKind::LH => "LH",
            TermKind::HH => "HH",
        }
    }
}

/// One `(kind, k, q)` contribution to the paraproduct split.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct BandContribution {
    pub kind: TermKind,
    pub k: i32,
    /// Inner band index; `None` for the LL bucket, which is per-`k` only.
    pub q: Option<i32>,
    pub value: f64,
}

/// Result of [`paraproduct_decompose`].
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ParaproductBreakdown {
    pub ll: f64,
    pub hl: f64,
    pub lh: f64,
    pub hh: f64,
    pub total: f64,
    /// Independent evaluation of `B[ψ, θ]` by direct quadrature.
    pub direct: f64,
    pub contributions: Vec<BandContribution>,
}

/// Decompose `B[ψ, θ] = Σ_k ∫ P_k∇_ℓψ · θ T^ℓθ dx` into LL/HL/LH/HH buckets
/// by the relative size of the θ frequencies.
///
/// With `p_r = P_rθ` and `L_r = P_{≤r}θ`, each `k` contributes exactly
///
/// ```text
///   ∫P_k∇ψ θTθ = LL_k + Σ_{q ≥ k-3} [ HL_q + LH_q + HH_q ],
///   LL_k = ∫P_k∇ψ (L_{k-3} T L_{k-3}),
///   HL_q = ∫P_k∇ψ (p_{q+1} T L_{q-1}),    LH_q = ∫P_k∇ψ (L_{q-1} T p_{q+1}),
///   HH_q = ∫P_k∇ψ (p_{q+1}Tp_{q+1} + p_{q+1}Tp_q + p_qTp_{q+1}
///                   + p_{q+1}Tp_{q-1} + p_{q-1}Tp_{q+1}),
/// ```
///
/// which follows from telescoping `L_{q+1}TL_{q+1} - L_qTL_q` (the
/// second-off-diagonal pairs `(p_{q+1}, p_{q-1})` belong to the high-high
/// bucket to keep the identity exact). `LL_k` vanishes identically: the
/// lattice support of `L_{k-3}TL_{k-3}` lies in `|ξ| ≤ 2^{k-2}`, disjoint
/// from the support of `P_k∇ψ`, so its Plancherel pairing is a sum over the
/// empty set.
pub fn paraproduct_decompose(
    psi: &SpectralField,
    theta: &SpectralField,
    m: &MultiplierSpec,
) -> Result<ParaproductBreakdown> {
    psi.same_grid(theta)?;
    psi.expect_scalar()?;
    theta.expect_scalar()?;
    let mut theta = theta.clone();
    theta.remove_mean();
    let grid = theta.grid();
    let mm = quad_m(grid.n());
    let cell = (Grid::PERIOD / mm as f64).powi(2);
    let table = VelocityTable::new(grid, m);
    let bands = occupied_bands(&grid);
    let (q_lo, q_hi) = (*bands.start(), *bands.end());

    // Physical representations of P_k ∇ψ on the padded lattice.
    let gpsi = psi.gradient();
    let mut psi_bands: Vec<[Vec<Complex>; 2]> = Vec::new();
    let mut k_list: Vec<i32> = Vec::new();
    for k in bands.clone() {
        let pk = lp_project(&gpsi, Projection::Band(k));
        if pk.max_coeff_abs() == 0.0 {
            continue;
        }
        psi_bands.push([physical_padded(&pk, 0, mm), physical_padded(&pk, 1, mm)]);
        k_list.push(k);
    }

    // Band projections of θ and their velocities, spectral and physical.
    let band_field = |q: i32| lp_project(&theta, Projection::Band(q));
    let low_field = |q: i32| lp_project(&theta, Projection::UpTo(q));
    let mut p_phys = std::collections::HashMap::new();
    let mut tp_phys = std::collections::HashMap::new();
    let mut l_phys = std::collections::HashMap::new();
    let mut tl_phys = std::collections::HashMap::new();
    for r in (q_lo - 3)..=(q_hi + 1) {
        let p = band_field(r);
        let v = table.apply_unchecked(&p);
        p_phys.insert(r, physical_padded(&p, 0, mm));
        tp_phys.insert(r, [physical_padded(&v, 0, mm), physical_padded(&v, 1, mm)]);
        let low = low_field(r);
        let vlow = table.apply_unchecked(&low);
        l_phys.insert(r, physical_padded(&low, 0, mm));
        tl_phys.insert(r, [physical_padded(&vlow, 0, mm), physical_padded(&vlow, 1, mm)]);
    }

    let dot = |a: &[Vec<Complex>; 2], f: &[Complex], g: &[[&[Complex]; 2]]| -> f64 {
        let mut acc = Complex::default();
        for l in 0..2 {
            for pair in g {
                let gl = pair[l];
                let al = &a[l];
                for i in 0..mm * mm {
                    acc += al[i] * f[i] * gl[i];
                }
            }
        }
        (acc * cell).re
    };

    let mut contributions = Vec::new();
    let (mut ll, mut hl, mut lh, mut hh) = (0.0, 0.0, 0.0, 0.0);

    for (ki, &k) in k_list.iter().enumerate() {
        let a = &psi_bands[ki];

        // LL_k: Plancherel pairing over supp χ_k ∩ supp (L_{k-3}TL_{k-3})^.
        // The product support lies in |ξ| ≤ 2^{k-2} < 2^{k-1}, so the
        // intersection is empty and the sum is exactly zero.
        let ll_k = {
            let prod_radius = 2.0 * (2.0f64).powi(k - 3);
            let empty = band_support(&grid, k)
                .iter()
                .all(|(flat, _)| grid.mode_abs(*flat) > prod_radius);
            assert!(empty, "LL support arithmetic violated at k = {k}");
            0.0
        };
        contributions.push(BandContribution { kind: TermKind::LL, k, q: None, value: ll_k });
        ll += ll_k;

        for q in (k - 3)..=q_hi {
            // HL: p_{q+1} T L_{q-1}
            let hl_v = match (p_phys.get(&(q + 1)), tl_phys.get(&(q - 1))) {
                (Some(p), Some(tl)) => dot(a, p, &[[&tl[0], &tl[1]]]),
                _ => 0.0,
            };
            // LH: L_{q-1} T p_{q+1}
            let lh_v = match (l_phys.get(&(q - 1)), tp_phys.get(&(q + 1))) {
                (Some(lw), Some(tp)) => dot(a, lw, &[[&tp[0], &tp[1]]]),
                _ => 0.0,
            };
            // HH: (q+1,q+1) + sym(q+1,q) + sym(q+1,q-1)
            let mut hh_v = 0.0;
            for b in [q + 1, q, q - 1] {
                let (Some(pa), Some(tpb)) = (p_phys.get(&(q + 1)), tp_phys.get(&b)) else { continue };
                let (Some(pb), Some(tpa)) = (p_phys.get(&b), tp_phys.get(&(q + 1))) else { continue };
                if b == q + 1 {
                    hh_v += dot(a, pa, &[[&tpb[0], &tpb[1]]]);
                } else {
                    hh_v += dot(a, pa, &[[&tpb[0], &tpb[1]]]);
                    hh_v += dot(a, pb, &[[&tpa[0], &tpa[1]]]);
                }
            }
            if hl_v != 0.0 {
                contributions.push(BandContribution { kind: TermKind::HL, k, q: Some(q), value: hl_v });
            }
            if lh_v != 0.0 {
                contributions.push(BandContribution { kind: TermKind::LH, k, q: Some(q), value: lh_v });
            }
            if hh_v != 0.0 {
                contributions.push(BandContribution { kind: TermKind::HH, k, q: Some(q), value: hh_v });
            }
            hl += hl_v;
            lh += lh_v;
            hh += hh_v;
        }
    }

    let direct = bilinear_form(psi, &theta, m)?;
    Ok(ParaproductBreakdown { ll, hl, lh, hh, total: ll + hl + lh + hh, direct, contributions })
}

/// Seminorm used in the numerator-normalizing denominator of [`bound_ratio`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum HessianKind {
    Full,
    TraceFree,
}

/// `|B[ψ,θ]| / (‖∇²ψ‖-type · ‖θ‖²_{Ḣ^{-1+δ}})`, the empirical constant of
/// the weak-form estimate.
pub fn bound_ratio(
    psi: &SpectralField,
    theta: &SpectralField,
    m: &MultiplierSpec,
    kind: HessianKind,
) -> Result<f64> {
    let b = bilinear_form(psi, theta, m)?;
    let (w2, w2tf) = crate::spaces::hessian_seminorms(psi);
    let semi = match kind {
        HessianKind::Full => w2,
        HessianKind::TraceFree => w2tf,
    };
    let hs = crate::spaces::sobolev_norm_direct(theta, -1.0 + m.delta);
    let denom = semi * hs * hs;
    if denom < 1e-300 {
        return Err(Error::DegenerateRatio);
    }
    Ok(b.abs() / denom)
}

/// `H(θ) = ∫ |Λ^{-1+δ}θ|² dx`, the Hamiltonian of the flow.
pub fn hamiltonian(theta: &SpectralField, delta: f64) -> f64 {
    let s = crate::spaces::sobolev_norm_direct(theta, -1.0 + delta);
    s * s
}

/// Output of [`hamiltonian_flux`].
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct FluxReport {
    pub qhat: i32,
    /// `B[ψ_q̂, θ]` with `ψ_q̂ = P²_{≤q̂} (-Δ)^{-1+δ} θ`: the instantaneous
    /// rate of change of the truncated Hamiltonian (up to a factor 2).
    pub flux: f64,
    /// Sup of the integrand built from the `P²_{≤q̂}` part of the velocity,
    /// normalized by the factor magnitudes; vanishes pointwise because
    /// `∇ψ_q̂` is orthogonal to its own rotated gradient.
    pub cancellation_residual: f64,
    /// Telescoped band contributions `δ_q B`, for q = q̂-2 .. top.
    pub per_band: Vec<(i32, f64)>,
}

/// Hamiltonian flux through frequency `2^q̂` together with the low-frequency
/// cancellation residual and the per-band `δ_q B` series.
pub fn hamiltonian_flux(theta: &SpectralField, qhat: i32, m: &MultiplierSpec) -> Result<FluxReport> {
    theta.expect_scalar()?;
    let mut theta = theta.clone();
    theta.remove_mean();
    let grid = theta.grid();
    let mm = quad_m(grid.n());
    let cell = (Grid::PERIOD / mm as f64).powi(2);
    let delta = m.delta;

    // ψ_q̂ = P²_{≤q̂} (-Δ)^{-1+δ} θ (positive-operator convention |k|^{2(δ-1)}).
    let psi = apply_radial(&theta, |r| {
        let c = LpProfile::chi_leq(qhat, r);
        c * c * r.powf(2.0 * (delta - 1.0))
    });
    let flux = bilinear_form(&psi, &theta, m)?;

    // Low-frequency part of the velocity: T_{≤q̂} θ = P²_{≤q̂} T θ. The
    // integrand ∇_ℓψ_q̂ · θ · T^ℓ_{≤q̂}θ vanishes pointwise by the ε-structure.
    let table = VelocityTable::new(grid, m);
    let v = table.apply_unchecked(&theta);
    let v_low = apply_radial(&v, |r| {
        let c = LpProfile::chi_leq(qhat, r);
        c * c
    });
    let gpsi = psi.gradient();
    let tp = physical_padded(&theta, 0, mm);
    let mut max_pointwise: f64 = 0.0;
    let mut scale: f64 = 1e-300;
    let mut low_total = Complex::default();
    {
        let g0 = physical_padded(&gpsi, 0, mm);
        let g1 = physical_padded(&gpsi, 1, mm);
        let v0 = physical_padded(&v_low, 0, mm);
        let v1 = physical_padded(&v_low, 1, mm);
        for i in 0..mm * mm {
            let dot = g0[i] * v0[i] + g1[i] * v1[i];
            let integrand = dot * tp[i];
            low_total += integrand;
            max_pointwise = max_pointwise.max(integrand.norm());
            scale = scale.max(g0[i].norm().hypot(g1[i].norm()) * v0[i].norm().hypot(v1[i].norm()) * tp[i].norm());
        }
        low_total *= cell;
    }
    let cancellation_residual = max_pointwise / scale;

    // δ_q B = ∫∇ψ_q̂ (L_{q+1}θ T_{>q̂} L_{q+1}θ - L_qθ T_{>q̂} L_qθ) dx.
    let mut per_band = Vec::new();
    let top = *occupied_bands(&grid).end();
    let mut prev: Option<Complex> = None;
    for q in (qhat - 3)..=top {
        let low = lp_project(&theta, Projection::UpTo(q + 1));
        let vq = table.apply_unchecked(&low);
        let vq_high = apply_radial(&vq, |r| {
            let c = LpProfile::chi_leq(qhat, r);
            1.0 - c * c
        });
        let lp = physical_padded(&low, 0, mm);
        let g0 = physical_padded(&gpsi, 0, mm);
        let g1 = physical_padded(&gpsi, 1, mm);
        let v0 = physical_padded(&vq_high, 0, mm);
        let v1 = physical_padded(&vq_high, 1, mm);
        let mut acc = Complex::default();
        for i in 0..mm * mm {
            acc += (g0[i] * v0[i] + g1[i] * v1[i]) * lp[i];
        }
        acc *= cell;
        if let Some(p) = prev {
            per_band.push((q, (acc - p).re));
        }
        prev = Some(acc);
    }

    let _ = low_total;
    Ok(FluxReport { qhat, flux, cancellation_residual, per_band })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::multiplier::MultiplierFamily;

    fn grid() -> Grid {
        Grid::new(64).unwrap()
    }

    #[test]
    fn biot_savart_of_single_mode() {
        // θ = sin x₁ with the canonical sign: T¹ = 0, T² = -cos x₁.
        let g = grid();
        let theta = SpectralField::from_fn(g, |x, _| x.sin());
        for delta in [0.0, 0.25, 0.5, 1.0] {
            let m = MultiplierSpec::msqg(delta);
            let v = biot_savart(&theta, &m).unwrap();
            let v1 = v.to_physical(0);
            let v2 = v.to_physical(1);
            for (i, c) in v1.iter().enumerate() {
                let (x, _) = g.point(i / g.n(), i % g.n());
                assert!(c.norm() < 1e-13);
                assert!((v2[i].re + x.cos()).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn biot_savart_divergence_free() {
        let g = grid();
        let theta = SpectralField::from_fn(g, |x, y| (3.0 * x).sin() * (2.0 * y).cos() + (x + 5.0 * y).cos());
        let m = MultiplierSpec::msqg(0.25);
        let v = biot_savart(&theta, &m).unwrap();
        let div_coeffs: Vec<Complex> = {
            let d0 = {
                let mut f = SpectralField::zeros(g, Rank::Scalar);
                f.component_mut(0).copy_from_slice(v.component(0));
                f.derivative(0)
            };
            let d1 = {
                let mut f = SpectralField::zeros(g, Rank::Scalar);
                f.component_mut(0).copy_from_slice(v.component(1));
                f.derivative(1)
            };
            d0.component(0).iter().zip(d1.component(0)).map(|(a, b)| a + b).collect()
        };
        let max = div_coeffs.iter().map(|c| c.norm()).fold(0.0, f64::max);
        assert!(max <= 1e-14 * theta.l2_norm());
    }

    #[test]
    fn nonlinearity_two_mode_closed_form() {
        // θ = sin x₁ + sin 2x₂ → T^ℓθ∇_ℓθ = s(2^{2δ-1} - 2) cos x₁ cos 2x₂.
        let g = grid();
        let theta = SpectralField::from_fn(g, |x, y| x.sin() + (2.0 * y).sin());
        for (delta, sign) in [(0.5, 1.0), (0.25, 1.0), (0.0, -1.0)] {
            let m = MultiplierSpec::new(delta, MultiplierFamily::Msqg, sign).unwrap();
            let nl = nonlinearity(&theta, &m, true).unwrap();
            let coef = sign * ((2.0f64).powf(2.0 * delta - 1.0) - 2.0);
            let expect = SpectralField::from_fn(g, |x, y| coef * x.cos() * (2.0 * y).cos());
            assert!(nl.coeff_distance(&expect) < 1e-13, "delta {delta}");
            assert!(nl.mean().norm() < 1e-15);
        }
        // A single plane wave is steady.
        let single = SpectralField::from_fn(g, |x, _| x.sin());
        let nl = nonlinearity(&single, &MultiplierSpec::msqg(0.5), true).unwrap();
        assert_eq!(nl.max_coeff_abs(), 0.0);
        // Equal-|k| two-mode data is steady as well.
        let eq = SpectralField::from_fn(g, |x, y| x.sin() + y.sin());
        let nl = nonlinearity(&eq, &MultiplierSpec::msqg(0.5), true).unwrap();
        assert!(nl.max_coeff_abs() < 1e-15);
    }

    #[test]
    fn bilinear_form_vanishing_cases() {
        let g = grid();
        let m = MultiplierSpec::msqg(0.5);
        let psi = SpectralField::from_fn(g, |x, y| (x + y).sin());
        let theta = SpectralField::from_fn(g, |x, _| x.sin());
        assert!(bilinear_form(&psi, &theta, &m).unwrap().abs() < 1e-13);
        let constant = SpectralField::from_fn(g, |_, _| 2.5);
        let theta2 = SpectralField::from_fn(g, |x, y| x.sin() + (2.0 * y).sin());
        assert!(bilinear_form(&constant, &theta2, &m).unwrap().abs() < 1e-13);
    }

    #[test]
    fn pairing_matches_closed_form() {
        // θ = sin x₁ + sin 2x₂, ψ = cos(x₁+2x₂), δ = 1/2, sign +1:
        // the nonlinearity is -cos x₁ cos 2x₂ and ∫ψ T^ℓθ∇_ℓθ dx = -π².
        let g = grid();
        let theta = SpectralField::from_fn(g, |x, y| x.sin() + (2.0 * y).sin());
        let psi = SpectralField::from_fn(g, |x, y| (x + 2.0 * y).cos());
        let m = MultiplierSpec::msqg(0.5);
        let pi2 = std::f64::consts::PI * std::f64::consts::PI;
        let a = nonlinearity_pairing(&psi, &theta, &m).unwrap();
        let b = bilinear_form(&psi, &theta, &m).unwrap();
        assert!((a + pi2).abs() < 1e-10);
        assert!((b - pi2).abs() < 1e-10);
    }

    #[test]
    fn integration_by_parts_identity() {
        // ∫ψ T^ℓθ ∇_ℓθ = -∫∇_ℓψ θT^ℓθ for incompressible T.
        let g = grid();
        let m = MultiplierSpec::msqg(0.25);
        let psi = SpectralField::from_fn(g, |x, y| (x + 2.0 * y).cos() + x.sin());
        let theta = SpectralField::from_fn(g, |x, y| x.sin() + (2.0 * y).sin() + (2.0 * x + y).cos());
        let a = nonlinearity_pairing(&psi, &theta, &m).unwrap();
        assert!(a.abs() > 1e-3, "test data must be resonant, got {a}");
        let b = bilinear_form(&psi, &theta, &m).unwrap();
        assert!((a + b).abs() <= 1e-10 * a.abs().max(b.abs()).max(1e-30), "a {a} b {b}");
    }

    #[test]
    fn trilinear_polarization_and_symmetry() {
        let g = grid();
        let m = MultiplierSpec::msqg(0.5);
        let psi = SpectralField::from_fn(g, |x, y| (x + 2.0 * y).sin());
        let theta = SpectralField::from_fn(g, |x, y| x.sin() + (3.0 * y).cos());
        let phi = SpectralField::from_fn(g, |x, y| (2.0 * x).cos() + y.sin());
        let t_tp = trilinear_form(&psi, &theta, &phi, &m).unwrap();
        let t_pt = trilinear_form(&psi, &phi, &theta, &m).unwrap();
        assert!((t_tp - t_pt).abs() < 1e-12);
        // Polarization: T[ψ,θ,φ] = ¼ (B[ψ,θ+φ] - B[ψ,θ-φ]).
        let mut sum = theta.clone();
        sum.axpy(1.0, &phi);
        let mut diff = theta.clone();
        diff.axpy(-1.0, &phi);
        let pol = 0.25 * (bilinear_form(&psi, &sum, &m).unwrap() - bilinear_form(&psi, &diff, &m).unwrap());
        assert!((t_tp - pol).abs() < 1e-11, "{t_tp} vs {pol}");
        // B = ½ T[ψ,θ,θ].
        let b = bilinear_form(&psi, &theta, &m).unwrap();
        let t_tt = trilinear_form(&psi, &theta, &theta, &m).unwrap();
        assert!((b - 0.5 * t_tt).abs() < 1e-12);
        // T[const, θ, φ] = 0.
        let c = SpectralField::from_fn(g, |_, _| 1.0);
        assert!(trilinear_form(&c, &theta, &phi, &m).unwrap().abs() < 1e-14);
    }

    #[test]
    fn bound_ratio_guards_and_invariance() {
        let g = grid();
        let m = MultiplierSpec::msqg(0.5);
        let psi = SpectralField::from_fn(g, |x, y| (x + y).sin());
        let theta = SpectralField::from_fn(g, |x, _| x.sin());
        // Numerator vanishes for a steady single mode (up to quadrature roundoff).
        assert!(bound_ratio(&psi, &theta, &m, HessianKind::Full).unwrap() < 1e-14);
        // ψ scaling leaves the ratio invariant.
        let psi = SpectralField::from_fn(g, |x, y| (x + 2.0 * y).cos());
        let theta2 = SpectralField::from_fn(g, |x, y| x.sin() + (2.0 * y).sin());
        let r1 = bound_ratio(&psi, &theta2, &m, HessianKind::TraceFree).unwrap();
        assert!(r1 > 1e-3, "ratio should be nonzero, got {r1}");
        let mut psi_scaled = psi.clone();
        psi_scaled.scale(7.5);
        let r2 = bound_ratio(&psi_scaled, &theta2, &m, HessianKind::TraceFree).unwrap();
        assert!((r1 - r2).abs() < 1e-10 * r1.abs());
        // Zero denominator rejected.
        let zero = SpectralField::zeros(g, Rank::Scalar);
        assert!(matches!(bound_ratio(&psi, &zero, &m, HessianKind::Full), Err(Error::DegenerateRatio)));
    }

    #[test]
    fn flux_zero_cases() {
        let g = grid();
        let m = MultiplierSpec::msqg(0.5);
        // Single mode: nonlinearity vanishes, flux 0 for every q̂.
        let theta = SpectralField::from_fn(g, |x, _| x.sin());
        for qhat in [0, 2, 5] {
            let rep = hamiltonian_flux(&theta, qhat, &m).unwrap();
            assert!(rep.flux.abs() < 1e-14);
        }
    }
}

