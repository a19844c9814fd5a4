use crate::{fft, Complex, Error, Grid, Result};

/// Tensor rank of a field on the torus.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Rank {
    Scalar,
    Vector,
    Tensor,
}

impl Rank {
    pub fn components(self) -> usize {
        match self {
            Rank::Scalar => 1,
            Rank::Vector => 2,
            Rank::Tensor => 4,
        }
    }

    fn name(self) -> &'static str {
        match self {
            Rank::Scalar => "scalar",
            Rank::Vector => "vector",
            Rank::Tensor => "tensor",
        }
    }
}

/// Complex Fourier coefficients of a scalar/vector/tensor field, component
/// major, in FFT-wrapped wavenumber order.
///
/// `hermitian` records that the field represents a real function, i.e.
/// `coeffs(-k) = conj(coeffs(k))`. Nyquist modes are zeroed on every
/// constructor and mutation path so the symmetry survives differentiation.
#[derive(Debug, Clone)]
pub struct SpectralField {
    grid: Grid,
    rank: Rank,
    hermitian: bool,
    coeffs: Vec<Complex>,
}

impl SpectralField {
    pub fn zeros(grid: Grid, rank: Rank) -> Self {
        SpectralField {
            grid,
            rank,
            hermitian: true,
            coeffs: vec![Complex::default(); rank.components() * grid.modes()],
        }
    }

    /// Build a real scalar field from physical samples (row-major, length n²).
    pub fn from_physical(grid: Grid, samples: &[f64]) -> Self {
        assert_eq!(samples.len(), grid.modes());
        let mut buf: Vec<Complex> = samples.iter().map(|&v| Complex::new(v, 0.0)).collect();
        fft::forward(&grid, &mut buf);
        let mut f = SpectralField { grid, rank: Rank::Scalar, hermitian: true, coeffs: buf };
        f.zero_nyquist();
        f.symmetrize_hermitian();
        f
    }

    /// Build a complex scalar field from physical samples. The field is not
    /// flagged real.
    pub fn from_physical_complex(grid: Grid, samples: &[Complex]) -> Self {
        assert_eq!(samples.len(), grid.modes());
        let mut buf = samples.to_vec();
        fft::forward(&grid, &mut buf);
        let mut f = SpectralField { grid, rank: Rank::Scalar, hermitian: false, coeffs: buf };
        f.zero_nyquist();
        f
    }

    /// Build a scalar field directly from coefficients in FFT-wrapped order.
    pub fn from_coeffs(grid: Grid, coeffs: Vec<Complex>, hermitian: bool) -> Self {
        assert_eq!(coeffs.len(), grid.modes());
        let mut f = SpectralField { grid, rank: Rank::Scalar, hermitian, coeffs };
        f.zero_nyquist();
        if hermitian {
            f.symmetrize_hermitian();
        }
        f
    }

    /// Sample a real scalar function at the collocation points.
    pub fn from_fn(grid: Grid, f: impl Fn(f64, f64) -> f64) -> Self {
        let n = grid.n();
        let mut samples = vec![0.0; grid.modes()];
        for i in 0..n {
            for j in 0..n {
                let (x, y) = grid.point(i, j);
                samples[i * n + j] = f(x, y);
            }
        }
        SpectralField::from_physical(grid, &samples)
    }

    #[inline]
    pub fn grid(&self) -> Grid {
        self.grid
    }

    #[inline]
    pub fn rank(&self) -> Rank {
        self.rank
    }

    #[inline]
    pub fn is_hermitian(&self) -> bool {
        self.hermitian
    }

    pub fn set_hermitian(&mut self, flag: bool) {
        self.hermitian = flag;
    }

    pub fn component(&self, c: usize) -> &[Complex] {
        let m = self.grid.modes();
        &self.coeffs[c * m..(c + 1) * m]
    }

    pub fn component_mut(&mut self, c: usize) -> &mut [Complex] {
        let m = self.grid.modes();
        &mut self.coeffs[c * m..(c + 1) * m]
    }

    pub fn coeffs(&self) -> &[Complex] {
        &self.coeffs
    }

    pub fn coeffs_mut(&mut self) -> &mut [Complex] {
        &mut self.coeffs
    }

    pub fn expect_scalar(&self) -> Result<()> {
        if self.rank != Rank::Scalar {
            return Err(Error::RankMismatch { expected: "scalar", got: self.rank.name() });
        }
        Ok(())
    }

    pub fn same_grid(&self, other: &SpectralField) -> Result<()> {
        if self.grid != other.grid {
            return Err(Error::GridMismatch(self.grid.n(), other.grid.n()));
        }
        Ok(())
    }

    /// Zero the Nyquist row/column of every component.
    pub fn zero_nyquist(&mut self) {
        let n = self.grid.n();
        let ny = n / 2;
        let m = self.grid.modes();
        for c in 0..self.rank.components() {
            let comp = &mut self.coeffs[c * m..(c + 1) * m];
            for j in 0..n {
                comp[ny * n + j] = Complex::default();
            }
            for i in 0..n {
                comp[i * n + ny] = Complex::default();
            }
        }
    }

    /// Enforce `coeffs(-k) = conj(coeffs(k))` bitwise by averaging conjugate
    /// pairs. Self-paired modes are forced real.
    pub fn symmetrize_hermitian(&mut self) {
        let grid = self.grid;
        let n = grid.n();
        let m = grid.modes();
        for c in 0..self.rank.components() {
            let comp = &mut self.coeffs[c * m..(c + 1) * m];
            for i in 0..n {
                let k1 = grid.wavenumber(i);
                for j in 0..n {
                    let k2 = grid.wavenumber(j);
                    let (mi, mj) = match (grid.index_of(-k1), grid.index_of(-k2)) {
                        (Some(a), Some(b)) => (a, b),
                        _ => continue,
                    };
                    let here = i * n + j;
                    let mirror = mi * n + mj;
                    if here < mirror {
                        let avg = 0.5 * (comp[here] + comp[mirror].conj());
                        comp[here] = avg;
                        comp[mirror] = avg.conj();
                    } else if here == mirror {
                        comp[here] = Complex::new(comp[here].re, 0.0);
                    }
                }
            }
        }
        self.hermitian = true;
    }

    /// Physical samples of one component.
    pub fn to_physical(&self, c: usize) -> Vec<Complex> {
        let mut buf = self.component(c).to_vec();
        fft::inverse(&self.grid, &mut buf);
        buf
    }

    /// Physical samples of a real scalar field (real parts after inverse FFT).
    pub fn to_physical_real(&self) -> Vec<f64> {
        debug_assert!(self.hermitian);
        self.to_physical(0).iter().map(|c| c.re).collect()
    }

    /// Physical samples on a zero-padded `m × m` lattice (spectral upsampling).
    pub fn to_physical_padded(&self, c: usize, m: usize) -> Vec<Complex> {
        let mut buf = fft::zero_pad(&self.grid, self.component(c), m);
        fft::inverse_raw(m, &mut buf);
        buf
    }

    /// Mean value `(1/|T²|) ∫ f dx` = zero-mode coefficient.
    pub fn mean(&self) -> Complex {
        self.component(0)[0]
    }

    pub fn remove_mean(&mut self) {
        let m = self.grid.modes();
        for c in 0..self.rank.components() {
            self.coeffs[c * m] = Complex::default();
        }
    }

    /// `‖f‖_{L²}² = ∫ |f|² dx = (2π)² Σ_k |f̂(k)|²`, summed over components.
    pub fn l2_norm_sq(&self) -> f64 {
        let w = Grid::PERIOD * Grid::PERIOD;
        w * self.coeffs.iter().map(|c| c.norm_sqr()).sum::<f64>()
    }

    pub fn l2_norm(&self) -> f64 {
        self.l2_norm_sq().sqrt()
    }

    pub fn max_coeff_abs(&self) -> f64 {
        self.coeffs.iter().map(|c| c.norm()).fold(0.0, f64::max)
    }

    /// Partial derivative ∂/∂x_axis of a scalar field (axis 0 or 1).
    pub fn derivative(&self, axis: usize) -> SpectralField {
        assert!(axis < 2);
        let grid = self.grid;
        let n = grid.n();
        let mut out = self.clone();
        let comp = out.component_mut(0);
        for i in 0..n {
            let k1 = grid.wavenumber(i) as f64;
            for j in 0..n {
                let k2 = grid.wavenumber(j) as f64;
                let k = if axis == 0 { k1 } else { k2 };
                comp[i * n + j] *= Complex::new(0.0, k);
            }
        }
        out.zero_nyquist();
        out
    }

    /// Gradient of a scalar field as a vector field.
    pub fn gradient(&self) -> SpectralField {
        let d0 = self.derivative(0);
        let d1 = self.derivative(1);
        let mut out = SpectralField::zeros(self.grid, Rank::Vector);
        out.component_mut(0).copy_from_slice(d0.component(0));
        out.component_mut(1).copy_from_slice(d1.component(0));
        out.hermitian = self.hermitian;
        out
    }

    pub fn scale(&mut self, s: f64) {
        self.coeffs.iter_mut().for_each(|c| *c *= s);
    }

    /// self += s * other (matching rank and grid).
    pub fn axpy(&mut self, s: f64, other: &SpectralField) {
        assert_eq!(self.grid, other.grid);
        assert_eq!(self.rank, other.rank);
        for (a, b) in self.coeffs.iter_mut().zip(other.coeffs.iter()) {
            *a += s * b;
        }
        self.hermitian = self.hermitian && other.hermitian;
    }

    /// Max-norm of the coefficient difference against another field.
    pub fn coeff_distance(&self, other: &SpectralField) -> f64 {
        self.coeffs
            .iter()
            .zip(other.coeffs.iter())
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max)
    }
}

/// Exact L² inner product `∫ f g dx` of two scalar fields via Plancherel
/// (conjugating the first argument).
pub fn inner_product(f: &SpectralField, g: &SpectralField) -> Complex {
    assert_eq!(f.grid(), g.grid());
    let w = Grid::PERIOD * Grid::PERIOD;
    let s: Complex = f
        .component(0)
        .iter()
        .zip(g.component(0).iter())
        .map(|(a, b)| a.conj() * b)
        .sum();
    w * s
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn roundtrip_constant_and_sine() {
        let grid = Grid::new(64).unwrap();
        let f = SpectralField::from_fn(grid, |_, _| 1.0);
        let phys = f.to_physical_real();
        for v in phys {
            assert!((v - 1.0).abs() < 1e-13);
        }

        let f = SpectralField::from_fn(grid, |x, _| x.sin());
        let phys = f.to_physical_real();
        let n = grid.n();
        for i in 0..n {
            for j in 0..n {
                let (x, _) = grid.point(i, j);
                assert!((phys[i * n + j] - x.sin()).abs() < 1e-13);
            }
        }
    }

    #[test]
    fn derivative_of_sine() {
        let grid = Grid::new(64).unwrap();
        let f = SpectralField::from_fn(grid, |x, _| x.sin());
        let d = f.derivative(0);
        let phys = d.to_physical_real();
        let n = grid.n();
        for i in 0..n {
            let (x, _) = grid.point(i, 0);
            assert!((phys[i * n] - x.cos()).abs() < 1e-12);
        }
    }

    #[test]
    fn nyquist_cleared() {
        let grid = Grid::new(16).unwrap();
        let f = SpectralField::from_fn(grid, |x, y| (8.0 * x).cos() + x.sin() * y.cos());
        let ny = grid.index_of(-8).unwrap();
        let n = grid.n();
        for j in 0..n {
            assert_eq!(f.component(0)[ny * n + j], Complex::default());
        }
    }
}
