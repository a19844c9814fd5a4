//! Littlewood-Paley projections with the dyadic conventions used throughout:
//! `P_{≤q}` has radial multiplier `χ(2^{-q}|ξ|)` where the profile `χ` equals
//! 1 on `|ξ| ≤ 1/2` and vanishes for `|ξ| ≥ 1`, and `P_q = P_{≤q+1} - P_{≤q}`
//! is supported on `2^{q-1} ≤ |ξ| ≤ 2^{q+1}`.

use crate::{Grid, SpectralField};

/// The fixed C^∞ step used for every radial cutoff in the crate.
///
/// On (1/2, 1) the profile equals `g(2(1-r))` with
/// `g(t) = e^{-1/t} / (e^{-1/t} + e^{-1/(1-t)})`, which is 1 at `t = 1`
/// (r = 1/2) and 0 at `t = 0` (r = 1); all derivatives vanish at both ends,
/// and the construction is reproducible bit-for-bit.
#[derive(Debug, Clone, Copy, Default)]
pub struct LpProfile;

#[inline]
fn smooth_step(t: f64) -> f64 {
    // e^{-1/t} underflows to exactly 0.0 for t < ~1/745, which gives the
    // correct limit values at both ends without branching on NaN.
    if t <= 0.0 {
        return 0.0;
    }
    if t >= 1.0 {
        return 1.0;
    }
    let a = (-1.0 / t).exp();
    let b = (-1.0 / (1.0 - t)).exp();
    a / (a + b)
}

#[inline]
fn smooth_step_deriv(t: f64) -> f64 {
    if t <= 0.0 || t >= 1.0 {
        return 0.0;
    }
    let a = (-1.0 / t).exp();
    let b = (-1.0 / (1.0 - t)).exp();
    let s = a + b;
    a * b * (1.0 / (t * t) + 1.0 / ((1.0 - t) * (1.0 - t))) / (s * s)
}

#[inline]
fn smooth_step_deriv2(t: f64) -> f64 {
    if t <= 0.0 || t >= 1.0 {
        return 0.0;
    }
    let a = (-1.0 / t).exp();
    let b = (-1.0 / (1.0 - t)).exp();
    let s = a + b;
    let p = a * b;
    if p == 0.0 {
        return 0.0;
    }
    let t2 = t * t;
    let om = 1.0 - t;
    let om2 = om * om;
    let u = 1.0 / t2 + 1.0 / om2;
    // g' = p u / s²; differentiate with p' = p (1/t² - 1/(1-t)²),
    // u' = -2/t³ + 2/(1-t)³, s' = a/t² - b/(1-t)².
    let pp = p * (1.0 / t2 - 1.0 / om2);
    let up = -2.0 / (t2 * t) + 2.0 / (om2 * om);
    let sp = a / t2 - b / om2;
    (pp * u + p * up) / (s * s) - 2.0 * p * u * sp / (s * s * s)
}

impl LpProfile {
    /// `χ_{≤0}(r)`: 1 for r ≤ 1/2, 0 for r ≥ 1, smooth and nonincreasing.
    #[inline]
    pub fn chi(r: f64) -> f64 {
        if r <= 0.5 {
            1.0
        } else if r >= 1.0 {
            0.0
        } else {
            smooth_step(2.0 * (1.0 - r))
        }
    }

    /// d/dr of [`Self::chi`].
    #[inline]
    pub fn chi_deriv(r: f64) -> f64 {
        if r <= 0.5 || r >= 1.0 {
            0.0
        } else {
            -2.0 * smooth_step_deriv(2.0 * (1.0 - r))
        }
    }

    /// d²/dr² of [`Self::chi`].
    #[inline]
    pub fn chi_deriv2(r: f64) -> f64 {
        if r <= 0.5 || r >= 1.0 {
            0.0
        } else {
            4.0 * smooth_step_deriv2(2.0 * (1.0 - r))
        }
    }

    /// Multiplier of `P_{≤q}` at radius `r = |ξ|`.
    #[inline]
    pub fn chi_leq(q: i32, r: f64) -> f64 {
        Self::chi(scale(q) * r)
    }

    /// d/dr of the `P_{≤q}` multiplier.
    #[inline]
    pub fn chi_leq_deriv(q: i32, r: f64) -> f64 {
        let s = scale(q);
        s * Self::chi_deriv(s * r)
    }

    /// Band multiplier `χ_q(r) = χ_{≤q+1}(r) - χ_{≤q}(r)`.
    #[inline]
    pub fn chi_band(q: i32, r: f64) -> f64 {
        Self::chi_leq(q + 1, r) - Self::chi_leq(q, r)
    }

    /// d/dr of the band multiplier.
    #[inline]
    pub fn chi_band_deriv(q: i32, r: f64) -> f64 {
        Self::chi_leq_deriv(q + 1, r) - Self::chi_leq_deriv(q, r)
    }
}

#[inline]
fn scale(q: i32) -> f64 {
    // 2^{-q}
    (-q as f64).exp2()
}

/// Which Littlewood-Paley operator to apply.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Projection {
    /// `P_q`, supported on the dyadic annulus `2^{q-1} ≤ |ξ| ≤ 2^{q+1}`.
    Band(i32),
    /// `P_{≤q}`; retains the zero mode (`χ(0) = 1`).
    UpTo(i32),
}

/// Apply a Littlewood-Paley projection to every component of a field.
pub fn lp_project(field: &SpectralField, kind: Projection) -> SpectralField {
    let grid = field.grid();
    let n = grid.n();
    let mut out = field.clone();
    let ncomp = field.rank().components();
    for c in 0..ncomp {
        let comp = out.component_mut(c);
        for i in 0..n {
            let k1 = grid.wavenumber(i);
            for j in 0..n {
                let k2 = grid.wavenumber(j);
                let r = ((k1 * k1 + k2 * k2) as f64).sqrt();
                let w = match kind {
                    Projection::Band(q) => LpProfile::chi_band(q, r),
                    Projection::UpTo(q) => LpProfile::chi_leq(q, r),
                };
                comp[i * n + j] *= w;
            }
        }
    }
    out
}

/// Inclusive range of band indices `q` for which `P_q` can be nonzero on the
/// grid's lattice: the lowest nonzero mode `|k| = 1` sits in band 0, and the
/// top band is the last one whose annulus reaches the lattice corner.
pub fn occupied_bands(grid: &Grid) -> std::ops::RangeInclusive<i32> {
    let kmax = grid.max_abs_wavenumber();
    let top = (kmax.log2().ceil() as i32) + 1;
    0..=top
}

/// Flat indices (with band weights) of lattice modes inside `supp χ_q`.
pub fn band_support(grid: &Grid, q: i32) -> Vec<(usize, f64)> {
    let mut out = Vec::new();
    for (flat, (k1, k2)) in grid.modes_iter() {
        if grid.is_nyquist(flat / grid.n()) || grid.is_nyquist(flat % grid.n()) {
            continue;
        }
        let r = ((k1 * k1 + k2 * k2) as f64).sqrt();
        let w = LpProfile::chi_band(q, r);
        if w != 0.0 {
            out.push((flat, w));
        }
    }
    out
}
