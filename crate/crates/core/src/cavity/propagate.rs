//! Spectral free-space propagation, mirror action, and the split-operator
//! medium transit.

use std::sync::Arc;

use ndarray::Array2;
use num_complex::Complex64;
use rustfft::{Fft, FftPlanner};

use super::{ComplexField2D, MirrorSpec};

/// Cached FFT plans for one grid side length.
pub struct FftPlans {
    n: usize,
    forward: Arc<dyn Fft<f64>>,
    inverse: Arc<dyn Fft<f64>>,
}

impl FftPlans {
    pub fn new(n: usize) -> Self {
        let mut planner = FftPlanner::new();
        Self {
            n,
            forward: planner.plan_fft_forward(n),
            inverse: planner.plan_fft_inverse(n),
        }
    }

    /// In-place 2-D FFT over both axes; `forward = false` applies the
    /// normalized inverse.
    pub fn fft2(&self, values: &mut Array2<Complex64>, forward: bool) {
        let n = self.n;
        assert_eq!(values.dim(), (n, n), "field does not match the FFT plan");
        let plan = if forward { &self.forward } else { &self.inverse };
        let mut buf = vec![Complex64::ZERO; n];
        // rows
        for mut row in values.rows_mut() {
            for (b, v) in buf.iter_mut().zip(row.iter()) {
                *b = *v;
            }
            plan.process(&mut buf);
            for (v, b) in row.iter_mut().zip(buf.iter()) {
                *v = *b;
            }
        }
        // columns
        for j in 0..n {
            for i in 0..n {
                buf[i] = values[(i, j)];
            }
            plan.process(&mut buf);
            for i in 0..n {
                values[(i, j)] = buf[i];
            }
        }
        if !forward {
            let scale = 1.0 / (n * n) as f64;
            values.mapv_inplace(|v| v * scale);
        }
    }
}

/// Spatial angular frequency of FFT bin `i` for grid side `n` and physical
/// window `window`.
#[inline]
fn k_of_bin(i: usize, n: usize, window: f64) -> f64 {
    let wrapped = if i <= n / 2 { i as f64 } else { i as f64 - n as f64 };
    2.0 * std::f64::consts::PI * wrapped / window
}

/// Free-space transfer over a distance `dz` (negative for back-propagation):
/// multiplication by exp(−i (k_x² + k_y²) dz / (2 k)) in the spectral domain.
/// Unitary on the grid, so the discrete power is conserved exactly.
pub fn fresnel_propagate(field: &ComplexField2D, dz: f64, plans: &FftPlans) -> ComplexField2D {
    if dz == 0.0 {
        return field.clone();
    }
    let n = field.n;
    let k = field.wavenumber();
    // quadratic spectral phase aliases once the increment between the largest
    // bins exceeds π across one sample
    let k_max = std::f64::consts::PI * n as f64 / field.window;
    let dk = 2.0 * std::f64::consts::PI / field.window;
    if (k_max * dk * dz.abs() / k) > std::f64::consts::PI {
        log::warn!(
            "fresnel step {dz:.3e} m aliases the spectral phase on the {n}×{n} grid \
             (window {:.3e} m); results are only valid for spectrally confined fields",
            field.window
        );
    }
    let mut out = field.clone();
    plans.fft2(&mut out.values, true);
    for i in 0..n {
        let kx = k_of_bin(i, n, field.window);
        for j in 0..n {
            let ky = k_of_bin(j, n, field.window);
            let phase = -(kx * kx + ky * ky) * dz / (2.0 * k);
            out.values[(i, j)] *= Complex64::from_polar(1.0, phase);
        }
    }
    plans.fft2(&mut out.values, false);
    out
}

/// Mirror action: quadratic phase exp(−i k (x²/R_x + y²/R_y)) inside the
/// square aperture, zero outside.
pub fn apply_mirror(field: &ComplexField2D, mirror: &MirrorSpec) -> ComplexField2D {
    let mut out = field.clone();
    let k = field.wavenumber();
    let half_aperture = mirror.aperture_side / 2.0;
    let rx = mirror.effective_radius_x();
    let ry = mirror.effective_radius_y();
    for i in 0..field.n {
        let x = field.coord(i);
        for j in 0..field.n {
            let y = field.coord(j);
            if x.abs() > half_aperture || y.abs() > half_aperture {
                out.values[(i, j)] = Complex64::ZERO;
                continue;
            }
            let mut phase = 0.0;
            if rx.is_finite() {
                phase -= k * x * x / rx;
            }
            if ry.is_finite() {
                phase -= k * y * y / ry;
            }
            if phase != 0.0 {
                out.values[(i, j)] *= Complex64::from_polar(1.0, phase);
            }
        }
    }
    out
}

/// Split-operator transit through the sliced medium:
/// K = e^(−iT δz/2) (Π_l e^(−iV(z_l) δz) e^(−iT δz)) e^(+iT δz/2),
/// applied right to left so the earliest slice acts first. `screens` holds
/// the precomputed factors e^(−iV(z_l) δz) in slice order.
pub fn medium_propagate(
    field: &ComplexField2D,
    screens: &[Array2<Complex64>],
    dz: f64,
    plans: &FftPlans,
) -> ComplexField2D {
    let mut psi = fresnel_propagate(field, -dz / 2.0, plans);
    for screen in screens {
        psi = fresnel_propagate(&psi, dz, plans);
        psi.values.zip_mut_with(screen, |v, s| *v *= s);
    }
    fresnel_propagate(&psi, dz / 2.0, plans)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn gaussian(n: usize, window: f64, lambda_nm: f64, w0: f64) -> ComplexField2D {
        ComplexField2D::from_fn(n, window, lambda_nm, |x, y| {
            Complex64::new((-(x * x + y * y) / (w0 * w0)).exp(), 0.0)
        })
    }

    #[test]
    fn zero_step_is_identity() {
        let f = gaussian(64, 4e-3, 253.7, 0.4e-3);
        let plans = FftPlans::new(64);
        let g = fresnel_propagate(&f, 0.0, &plans);
        assert_abs_diff_eq!(
            (&g.values - &f.values).map(|v| v.norm()).sum(),
            0.0,
            epsilon = 0.0
        );
    }

    #[test]
    fn propagation_conserves_power() {
        let f = gaussian(128, 6e-3, 253.7, 0.5e-3);
        let plans = FftPlans::new(128);
        let p0 = f.power();
        let g = fresnel_propagate(&f, 0.35, &plans);
        assert_abs_diff_eq!(g.power(), p0, epsilon = 1e-12 * p0);
        // back-propagation inverts exactly
        let back = fresnel_propagate(&g, -0.35, &plans);
        let err = (&back.values - &f.values).map(|v| v.norm_sqr()).sum().sqrt();
        assert!(err < 1e-12 * p0.sqrt());
    }

    #[test]
    fn gaussian_waist_follows_the_analytic_law() {
        let w0 = 0.3e-3;
        let lambda_nm = 253.7;
        let f = gaussian(256, 8e-3, lambda_nm, w0);
        let plans = FftPlans::new(256);
        let z_r = std::f64::consts::PI * w0 * w0 / (lambda_nm * 1e-9);
        for dz in [0.5 * z_r, z_r, 2.0 * z_r] {
            let g = fresnel_propagate(&f, dz, &plans);
            let (sx, sy) = g.second_moments();
            // for a fundamental Gaussian w = 2σ
            let w_measured = 2.0 * sx.sqrt();
            let w_expected = w0 * (1.0 + (dz / z_r).powi(2)).sqrt();
            assert!(
                (w_measured - w_expected).abs() / w_expected < 5e-3,
                "waist {w_measured:.6e} vs {w_expected:.6e} at dz = {dz:.3e}"
            );
            let wy = 2.0 * sy.sqrt();
            assert_abs_diff_eq!(wy, w_measured, epsilon = 1e-9);
        }
    }

    #[test]
    fn flat_open_mirror_is_identity() {
        let f = gaussian(64, 4e-3, 253.7, 0.4e-3);
        let m = MirrorSpec { radius_of_curvature: f64::INFINITY, aperture_side: f64::INFINITY };
        let g = apply_mirror(&f, &m);
        assert_abs_diff_eq!((&g.values - &f.values).map(|v| v.norm()).sum(), 0.0, epsilon = 0.0);
    }

    #[test]
    fn mirror_never_amplifies() {
        let f = gaussian(64, 4e-3, 253.7, 1.2e-3);
        let m = MirrorSpec { radius_of_curvature: 1.0, aperture_side: 1.0e-3 };
        let g = apply_mirror(&f, &m);
        assert!(g.power() <= f.power());
        assert!(g.power() < f.power());
    }

    #[test]
    fn mirror_phase_acts_as_half_radius_lens() {
        // collimated Gaussian picks up a quadratic phase with focal length
        // R_eff/2 per axis; fit the phase curvature near the axis
        let n = 256;
        let window = 8e-3;
        let f = gaussian(n, window, 253.7, 1.5e-3);
        let radius = 2.0;
        let m = MirrorSpec { radius_of_curvature: radius, aperture_side: f64::INFINITY };
        let g = apply_mirror(&f, &m);
        let k = f.wavenumber();
        // φ(x) = −k x² / R_x on the x axis (y = 0 row index n/2)
        let mut xs = Vec::new();
        let mut phases = Vec::new();
        for i in (n / 2 - 12)..(n / 2 + 12) {
            let x = g.coord(i);
            let ratio = g.values[(i, n / 2)] / f.values[(i, n / 2)];
            xs.push(x * x);
            phases.push(ratio.arg());
        }
        let (slope, _, r2) = crate::fitting::linear_fit(&xs, &phases).unwrap();
        assert!(r2 > 0.999);
        let f_fit = -k / (2.0 * slope);
        let f_expected = m.effective_radius_x() / 2.0;
        assert!(
            (f_fit - f_expected).abs() / f_expected < 0.01,
            "focal length {f_fit:.4} vs {f_expected:.4}"
        );
    }

    #[test]
    fn empty_medium_equals_free_propagation() {
        let f = gaussian(128, 6e-3, 253.7, 0.5e-3);
        let plans = FftPlans::new(128);
        let n_slices = 16;
        let length = 0.02;
        let dz = length / n_slices as f64;
        let screens = vec![Array2::from_elem((128, 128), Complex64::ONE); n_slices];
        let via_medium = medium_propagate(&f, &screens, dz, &plans);
        let direct = fresnel_propagate(&f, length, &plans);
        let err = (&via_medium.values - &direct.values).map(|v| v.norm_sqr()).sum().sqrt();
        assert!(err < 1e-12 * f.power().sqrt(), "split-operator with V = 0 deviates by {err:.3e}");
    }

    #[test]
    fn uniform_gain_slab_matches_analytic_amplification() {
        let f = gaussian(128, 6e-3, 253.7, 0.8e-3);
        let plans = FftPlans::new(128);
        let n_slices = 8;
        let length = 0.01;
        let dz = length / n_slices as f64;
        let chi_im = -2.0e-7;
        let k = f.wavenumber();
        // e^(−iVδz) with V = −(k/2)(iχ″)
        let screen_value = (Complex64::new(0.0, 0.5 * k * dz) * Complex64::new(0.0, chi_im)).exp();
        let screens = vec![Array2::from_elem((128, 128), screen_value); n_slices];
        let out = medium_propagate(&f, &screens, dz, &plans);
        let expected = f.power() * (-k * chi_im * length).exp();
        assert!(
            (out.power() - expected).abs() / expected < 1e-6,
            "power {:.8e} vs {expected:.8e}",
            out.power()
        );
    }

    #[test]
    fn printed_splitting_equals_symmetric_form() {
        // the half-step factors telescope into standard Strang splitting
        let f = gaussian(128, 6e-3, 253.7, 0.5e-3);
        let plans = FftPlans::new(128);
        let n_slices = 6;
        let length = 0.015;
        let dz = length / n_slices as f64;
        let k = f.wavenumber();
        let screens: Vec<Array2<Complex64>> = (0..n_slices)
            .map(|l| {
                Array2::from_shape_fn((128, 128), |(i, j)| {
                    let x = f.coord(i);
                    let y = f.coord(j);
                    let chi = Complex64::new(1e-7 * (x / 1e-3).sin(), -1e-7 * (y / 1e-3).cos())
                        * (l as f64 + 1.0);
                    (Complex64::new(0.0, 0.5 * k * dz) * chi).exp()
                })
            })
            .collect();
        let printed = medium_propagate(&f, &screens, dz, &plans);
        // standard symmetric composition: half-step, screen, half-step per slice
        let mut sym = f.clone();
        for screen in &screens {
            sym = fresnel_propagate(&sym, dz / 2.0, &plans);
            sym.values.zip_mut_with(screen, |v, s| *v *= s);
            sym = fresnel_propagate(&sym, dz / 2.0, &plans);
        }
        let scale = f.power().sqrt();
        let err = (&printed.values - &sym.values).map(|v| v.norm_sqr()).sum().sqrt();
        assert!(err < 1e-11 * scale, "forms differ by {err:.3e}");
    }

    #[test]
    fn medium_transit_converges_in_slice_count() {
        let f = gaussian(128, 6e-3, 253.7, 0.5e-3);
        let plans = FftPlans::new(128);
        let length = 0.01;
        let k = f.wavenumber();
        let make_screens = |n_slices: usize| -> Vec<Array2<Complex64>> {
            let dz = length / n_slices as f64;
            (0..n_slices)
                .map(|l| {
                    let z = -length / 2.0 + l as f64 * dz;
                    Array2::from_shape_fn((128, 128), |(i, j)| {
                        let x = f.coord(i);
                        let y = f.coord(j);
                        let chi = Complex64::new(
                            2e-7 * ((x + y) / 1e-3).cos(),
                            -2e-7 * (1.0 + (z / length) * (x / 1e-3).sin()),
                        );
                        (Complex64::new(0.0, 0.5 * k * dz) * chi).exp()
                    })
                })
                .collect()
        };
        let coarse = medium_propagate(&f, &make_screens(16), length / 16.0, &plans);
        let fine = medium_propagate(&f, &make_screens(32), length / 32.0, &plans);
        let err = (&coarse.values - &fine.values).map(|v| v.norm_sqr()).sum().sqrt()
            / fine.power().sqrt();
        assert!(err < 1e-4, "doubling slices still moves the field by {err:.3e}");
    }
}
