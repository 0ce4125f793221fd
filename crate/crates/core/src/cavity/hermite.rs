//! Analytic Hermite-Gauss modes and the ring-cavity ABCD fixed point.

use num_complex::Complex64;

use super::{CavitySpec, ComplexField2D};
use crate::{Error, Result};

/// Physicists' Hermite polynomial H_m(x).
pub fn hermite_polynomial(m: usize, x: f64) -> f64 {
    let mut h0 = 1.0;
    if m == 0 {
        return h0;
    }
    let mut h1 = 2.0 * x;
    for k in 1..m {
        let h2 = 2.0 * x * h1 - 2.0 * k as f64 * h0;
        h0 = h1;
        h1 = h2;
    }
    h1
}

/// Gaussian-beam parameters of one transverse axis at a fixed plane.
#[derive(Clone, Copy, Debug)]
pub struct AxisBeam {
    /// 1/e² field radius w at the plane (m).
    pub waist: f64,
    /// Wavefront curvature radius at the plane (m); +∞ at a waist, positive
    /// for a diverging beam.
    pub curvature_radius: f64,
}

impl AxisBeam {
    pub fn at_waist(w0: f64) -> Self {
        Self { waist: w0, curvature_radius: f64::INFINITY }
    }
}

fn axis_mode(
    m: usize,
    beam: &AxisBeam,
    k: f64,
    x: f64,
) -> Complex64 {
    let w = beam.waist;
    let amp = hermite_polynomial(m, std::f64::consts::SQRT_2 * x / w)
        * (-x * x / (w * w)).exp()
        / w.sqrt();
    let phase = if beam.curvature_radius.is_finite() {
        k * x * x / (2.0 * beam.curvature_radius)
    } else {
        0.0
    };
    Complex64::from_polar(amp.abs(), phase + if amp < 0.0 { std::f64::consts::PI } else { 0.0 })
}

/// Hermite-Gauss mode of order (m, n) sampled at a single plane described by
/// its per-axis beam parameters, unit-normalized on the grid. The constant
/// Gouy phase of a fixed plane is dropped.
pub fn hermite_gauss_at_plane(
    m: usize,
    n: usize,
    beam_x: &AxisBeam,
    beam_y: &AxisBeam,
    grid_n: usize,
    window: f64,
    wavelength_nm: f64,
) -> ComplexField2D {
    let k = crate::constants::wavenumber_from_wavelength_nm(wavelength_nm);
    ComplexField2D::from_fn(grid_n, window, wavelength_nm, |x, y| {
        axis_mode(m, beam_x, k, x) * axis_mode(n, beam_y, k, y)
    })
    .normalized()
}

/// Hermite-Gauss mode of a beam with waists (w0x, w0y) at z = 0, sampled at
/// distance `z` along the axis, with curvature, width evolution, and Gouy
/// phases included (carrier e^(ikz) removed).
pub fn hermite_gauss_mode(
    m: usize,
    n: usize,
    w0_x: f64,
    w0_y: f64,
    z: f64,
    grid_n: usize,
    window: f64,
    wavelength_nm: f64,
) -> ComplexField2D {
    let lambda = wavelength_nm * 1e-9;
    let k = crate::constants::wavenumber_from_wavelength_nm(wavelength_nm);
    let axis = |order: usize, w0: f64, x: f64| -> Complex64 {
        let z_r = std::f64::consts::PI * w0 * w0 / lambda;
        let w = w0 * (1.0 + (z / z_r).powi(2)).sqrt();
        let inv_r = z / (z * z + z_r * z_r);
        let gouy = (z / z_r).atan();
        let amp = hermite_polynomial(order, std::f64::consts::SQRT_2 * x / w)
            * (-x * x / (w * w)).exp()
            * (w0 / w).sqrt();
        let phase = k * x * x * inv_r / 2.0 - (order as f64 + 0.5) * gouy;
        Complex64::from_polar(amp, phase)
    };
    ComplexField2D::from_fn(grid_n, window, wavelength_nm, |x, y| {
        axis(m, w0_x, x) * axis(n, w0_y, y)
    })
}

/// Self-consistent Gaussian beam of the ring resonator on the plane just
/// after a mirror, per transverse axis, from the round-trip ABCD fixed point.
pub fn ring_fixed_point_beam(cavity: &CavitySpec) -> Result<(AxisBeam, AxisBeam)> {
    cavity.validate()?;
    let k = crate::constants::wavenumber_from_wavelength_nm(cavity.wavelength_nm);
    let solve_axis = |sagittal: bool| -> Result<AxisBeam> {
        // accumulate (M_mirror · M_free)⁴ in ray-matrix form
        let mut t = [[1.0f64, 0.0], [0.0, 1.0]];
        for mirror in &cavity.mirrors {
            let free = [[1.0, cavity.arm_length], [0.0, 1.0]];
            let r_eff = if sagittal {
                mirror.effective_radius_x()
            } else {
                mirror.effective_radius_y()
            };
            let lens = [[1.0, 0.0], [-2.0 / r_eff, 1.0]];
            let mul = |a: [[f64; 2]; 2], b: [[f64; 2]; 2]| {
                [
                    [a[0][0] * b[0][0] + a[0][1] * b[1][0], a[0][0] * b[0][1] + a[0][1] * b[1][1]],
                    [a[1][0] * b[0][0] + a[1][1] * b[1][0], a[1][0] * b[0][1] + a[1][1] * b[1][1]],
                ]
            };
            t = mul(lens, mul(free, t));
        }
        let (a, b, c, d) = (t[0][0], t[0][1], t[1][0], t[1][1]);
        // fixed point of q ↦ (Aq + B)/(Cq + D) with q = z − i z_R
        let disc = (a - d) * (a - d) + 4.0 * b * c;
        if disc >= 0.0 || c == 0.0 {
            return Err(Error::Geometry(format!(
                "ring cavity is unstable on the {} axis (trace {})",
                if sagittal { "sagittal" } else { "tangential" },
                a + d
            )));
        }
        let sqrt_disc = Complex64::new(disc, 0.0).sqrt();
        let mut q = (Complex64::new(a - d, 0.0) + sqrt_disc) / (2.0 * c);
        if q.im > 0.0 {
            q = (Complex64::new(a - d, 0.0) - sqrt_disc) / (2.0 * c);
        }
        let inv_q = 1.0 / q;
        let w_sq = 2.0 / (k * inv_q.im);
        if w_sq <= 0.0 {
            return Err(Error::Geometry("fixed point has no confined beam".into()));
        }
        let curvature_radius = if inv_q.re.abs() < 1e-300 { f64::INFINITY } else { 1.0 / inv_q.re };
        Ok(AxisBeam { waist: w_sq.sqrt(), curvature_radius })
    };
    Ok((solve_axis(true)?, solve_axis(false)?))
}
