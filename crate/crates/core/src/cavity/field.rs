//! Sampled transverse field envelopes.

use ndarray::Array2;
use num_complex::Complex64;

/// A slowly varying envelope ψ(x, y) on an n×n grid of physical side
/// `window`, centered on the optical axis.
#[derive(Clone, Debug)]
pub struct ComplexField2D {
    pub n: usize,
    /// Physical side length of the grid (m).
    pub window: f64,
    pub wavelength_nm: f64,
    pub values: Array2<Complex64>,
}

impl ComplexField2D {
    pub fn zeros(n: usize, window: f64, wavelength_nm: f64) -> Self {
        Self { n, window, wavelength_nm, values: Array2::zeros((n, n)) }
    }

    pub fn from_fn(
        n: usize,
        window: f64,
        wavelength_nm: f64,
        f: impl Fn(f64, f64) -> Complex64,
    ) -> Self {
        let mut out = Self::zeros(n, window, wavelength_nm);
        for i in 0..n {
            let x = out.coord(i);
            for j in 0..n {
                let y = out.coord(j);
                out.values[(i, j)] = f(x, y);
            }
        }
        out
    }

    /// Physical coordinate of grid index `i` (first axis = x, second = y).
    pub fn coord(&self, i: usize) -> f64 {
        (i as f64 - (self.n / 2) as f64) * self.dx()
    }

    pub fn dx(&self) -> f64 {
        self.window / self.n as f64
    }

    pub fn wavenumber(&self) -> f64 {
        crate::constants::wavenumber_from_wavelength_nm(self.wavelength_nm)
    }

    /// Discrete power Σ|ψ|².
    pub fn power(&self) -> f64 {
        self.values.iter().map(|v| v.norm_sqr()).sum()
    }

    pub fn inner(&self, other: &Self) -> Complex64 {
        self.values
            .iter()
            .zip(other.values.iter())
            .map(|(a, b)| a.conj() * b)
            .sum()
    }

    /// Normalized overlap |⟨self, other⟩| / (‖self‖‖other‖).
    pub fn overlap(&self, other: &Self) -> f64 {
        let denom = (self.power() * other.power()).sqrt();
        if denom == 0.0 {
            return 0.0;
        }
        self.inner(other).norm() / denom
    }

    pub fn normalized(mut self) -> Self {
        let p = self.power().sqrt();
        if p > 0.0 {
            self.values.mapv_inplace(|v| v / p);
        }
        self
    }

    /// Second moments (σ_x², σ_y²) of the intensity distribution.
    pub fn second_moments(&self) -> (f64, f64) {
        let mut w_sum = 0.0;
        let mut mx = 0.0;
        let mut my = 0.0;
        for ((i, j), v) in self.values.indexed_iter() {
            let w = v.norm_sqr();
            w_sum += w;
            mx += w * self.coord(i);
            my += w * self.coord(j);
        }
        if w_sum == 0.0 {
            return (0.0, 0.0);
        }
        mx /= w_sum;
        my /= w_sum;
        let mut sx = 0.0;
        let mut sy = 0.0;
        for ((i, j), v) in self.values.indexed_iter() {
            let w = v.norm_sqr();
            sx += w * (self.coord(i) - mx).powi(2);
            sy += w * (self.coord(j) - my).powi(2);
        }
        (sx / w_sum, sy / w_sum)
    }

    /// A centered Gaussian blob, the deterministic start vector for the
    /// eigenmode iteration.
    pub fn gaussian_seed(n: usize, window: f64, wavelength_nm: f64) -> Self {
        let w = window / 8.0;
        Self::from_fn(n, window, wavelength_nm, |x, y| {
            Complex64::new((-(x * x + y * y) / (w * w)).exp(), 0.0)
        })
        .normalized()
    }
}
