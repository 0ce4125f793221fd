//! Beam-quality factors from second-moment caustic fits.

use super::{fresnel_propagate, ComplexField2D, FftPlans};
use crate::fitting::quadratic_fit;
use crate::{Error, Result};

/// Number of caustic sampling planes.
const PLANES: usize = 9;

/// M² per transverse axis from a hyperbolic caustic fit.
///
/// The field is propagated to nine planes spanning ±2 estimated Rayleigh
/// ranges; the second moment σ²(z) of a freely propagating field is exactly
/// quadratic in z, so a parabola fit yields the waist σ₀ and far-field slope
/// √c, and M² = 4π σ₀ √c / λ. Two passes refine the plane placement around
/// the fitted waist.
pub fn beam_quality_m2(field: &ComplexField2D) -> Result<(f64, f64)> {
    let plans = FftPlans::new(field.n);
    let lambda = field.wavelength_nm * 1e-9;

    let (sx0, sy0) = field.second_moments();
    if sx0 <= 0.0 || sy0 <= 0.0 {
        return Err(Error::Fit("field carries no power".into()));
    }
    // crude Rayleigh range from the current plane assuming a diffraction-
    // limited beam (w = 2σ)
    let z_r_est = 4.0 * std::f64::consts::PI * sx0.min(sy0) / lambda;

    let pass = |center: f64, half_span: f64| -> Result<([f64; 3], [f64; 3])> {
        let mut zs = Vec::with_capacity(PLANES);
        let mut sxs = Vec::with_capacity(PLANES);
        let mut sys = Vec::with_capacity(PLANES);
        for i in 0..PLANES {
            let z = center + half_span * (2.0 * i as f64 / (PLANES as f64 - 1.0) - 1.0);
            let at_z = fresnel_propagate(field, z, &plans);
            let (sx, sy) = at_z.second_moments();
            zs.push(z);
            sxs.push(sx);
            sys.push(sy);
        }
        Ok((quadratic_fit(&zs, &sxs)?, quadratic_fit(&zs, &sys)?))
    };

    let extract = |coeff: [f64; 3]| -> Result<(f64, f64, f64)> {
        let [a, b, c] = coeff;
        if c <= 0.0 {
            return Err(Error::Fit("caustic fit has no positive far-field curvature".into()));
        }
        let z0 = -b / (2.0 * c);
        let sigma0_sq = a - b * b / (4.0 * c);
        if sigma0_sq <= 0.0 {
            return Err(Error::Fit("caustic fit has no real waist".into()));
        }
        Ok((z0, sigma0_sq.sqrt(), c.sqrt()))
    };

    let (cx, cy) = pass(0.0, 2.0 * z_r_est)?;
    let (z0x, s0x, _) = extract(cx)?;
    let (z0y, s0y, _) = extract(cy)?;

    // refine around the fitted waists with the fitted Rayleigh ranges
    let m2_of = |sigma0: f64, slope: f64| 4.0 * std::f64::consts::PI * sigma0 * slope / lambda;
    let z_r_x = 4.0 * std::f64::consts::PI * s0x * s0x / lambda;
    let z_r_y = 4.0 * std::f64::consts::PI * s0y * s0y / lambda;
    let center = 0.5 * (z0x + z0y);
    let half_span = 2.0 * z_r_x.min(z_r_y);
    let (cx, cy) = pass(center, half_span)?;
    let (_, s0x, slope_x) = extract(cx)?;
    let (_, s0y, slope_y) = extract(cy)?;
    let m2x = m2_of(s0x, slope_x);
    let m2y = m2_of(s0y, slope_y);
    // the refined estimate may only shrink towards the diffraction limit
    if !(m2x.is_finite() && m2y.is_finite()) {
        return Err(Error::Fit("caustic fit did not converge".into()));
    }
    Ok((m2x, m2y))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cavity::hermite_gauss_mode;

    #[test]
    fn fundamental_gaussian_is_diffraction_limited() {
        let f = hermite_gauss_mode(0, 0, 0.3e-3, 0.3e-3, 0.0, 256, 6e-3, 253.7);
        let (m2x, m2y) = beam_quality_m2(&f).unwrap();
        assert!((m2x - 1.0).abs() < 0.01, "M²_x = {m2x}");
        assert!((m2y - 1.0).abs() < 0.01, "M²_y = {m2y}");
    }

    #[test]
    fn higher_order_modes_scale_linearly() {
        for m in [1usize, 2, 3] {
            let f = hermite_gauss_mode(m, 0, 0.3e-3, 0.3e-3, 0.0, 256, 8e-3, 253.7);
            let (m2x, m2y) = beam_quality_m2(&f).unwrap();
            let want = (2 * m + 1) as f64;
            assert!(
                (m2x - want).abs() / want < 0.02,
                "HG({m},0): M²_x = {m2x}, expected {want}"
            );
            assert!((m2y - 1.0).abs() < 0.02, "HG({m},0): M²_y = {m2y}");
        }
    }

    #[test]
    fn curved_input_converges_to_the_same_quality() {
        // the same mode sampled away from its waist must fit the same M²
        let f = hermite_gauss_mode(1, 0, 0.3e-3, 0.3e-3, 0.4, 256, 10e-3, 253.7);
        let (m2x, _) = beam_quality_m2(&f).unwrap();
        assert!((m2x - 3.0).abs() / 3.0 < 0.02, "M²_x = {m2x}");
    }
}
