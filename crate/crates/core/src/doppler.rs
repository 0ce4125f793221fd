//! Doppler-free three-photon beam geometry and Maxwell-Boltzmann averaging.
//!
//! The probe propagates along +z of the geometry frame; the strong and weak
//! drive wave vectors lie in the x–z plane and close the triangle
//! k_p + k_s = k_w, which makes the three-photon detuning independent of the
//! atomic velocity. The spectrally broad repump is taken collinear with the
//! strong drive; its direction is immaterial at its linewidth but its Doppler
//! shift is kept.

use num_complex::Complex64;
use rayon::prelude::*;

use crate::constants::{self, ATOMIC_MASS, K_B};
use crate::{Error, Result};

/// Wave vectors (rad/m) of the four beams plus the closure residual.
#[derive(Clone, Copy, Debug)]
pub struct BeamGeometry {
    pub k_p: [f64; 3],
    pub k_s: [f64; 3],
    pub k_w: [f64; 3],
    pub k_r: [f64; 3],
    /// ‖k_p + k_s − k_w‖ (rad/m); exactly the rounding error of construction.
    pub closure_residual: f64,
}

fn norm3(v: [f64; 3]) -> f64 {
    (v[0] * v[0] + v[1] * v[1] + v[2] * v[2]).sqrt()
}

fn dot3(a: [f64; 3], b: [f64; 3]) -> f64 {
    a[0] * b[0] + a[1] * b[1] + a[2] * b[2]
}

/// Arrange the three wave vectors so that k_p + k_s = k_w exactly.
///
/// Fails when the wavenumber triangle inequality cannot be satisfied.
pub fn three_photon_geometry(
    lambda_p_nm: f64,
    lambda_s_nm: f64,
    lambda_w_nm: f64,
) -> Result<BeamGeometry> {
    for l in [lambda_p_nm, lambda_s_nm, lambda_w_nm] {
        if l <= 0.0 {
            return Err(Error::InvalidParameter(format!("wavelengths must be positive, got {l}")));
        }
    }
    let kp = constants::wavenumber_from_wavelength_nm(lambda_p_nm);
    let ks = constants::wavenumber_from_wavelength_nm(lambda_s_nm);
    let kw = constants::wavenumber_from_wavelength_nm(lambda_w_nm);
    // |k_w|² = |k_p|² + |k_s|² + 2 k_p·k_s fixes the angle between p and s
    let cos_theta = (kw * kw - kp * kp - ks * ks) / (2.0 * kp * ks);
    if !(-1.0..=1.0).contains(&cos_theta) {
        return Err(Error::Geometry(format!(
            "wavenumbers {kp:.4e}, {ks:.4e}, {kw:.4e} rad/m violate the closure triangle \
             (cos θ = {cos_theta:.4})"
        )));
    }
    let sin_theta = (1.0 - cos_theta * cos_theta).sqrt();
    let k_p = [0.0, 0.0, kp];
    let k_s = [ks * sin_theta, 0.0, ks * cos_theta];
    let k_w = [k_p[0] + k_s[0], k_p[1] + k_s[1], k_p[2] + k_s[2]];
    let res = [k_p[0] + k_s[0] - k_w[0], k_p[1] + k_s[1] - k_w[1], k_p[2] + k_s[2] - k_w[2]];
    Ok(BeamGeometry {
        k_p,
        k_s,
        k_w,
        // repump defaults to a zero-magnitude placeholder until a wavelength is set
        k_r: [0.0, 0.0, 0.0],
        closure_residual: norm3(res),
    })
}

impl BeamGeometry {
    /// Attach the repump beam, collinear with the strong drive.
    pub fn with_repump_wavelength(mut self, lambda_r_nm: f64) -> Result<Self> {
        if lambda_r_nm <= 0.0 {
            return Err(Error::InvalidParameter("repump wavelength must be positive".into()));
        }
        let ks = norm3(self.k_s);
        let kr = constants::wavenumber_from_wavelength_nm(lambda_r_nm);
        self.k_r = [self.k_s[0] / ks * kr, self.k_s[1] / ks * kr, self.k_s[2] / ks * kr];
        Ok(self)
    }

    /// The standard mercury configuration (253.7, 435.8, 546.1, 404.7 nm).
    pub fn mercury() -> Result<Self> {
        three_photon_geometry(
            constants::mercury_lines::LAMBDA_AB_NM,
            constants::mercury_lines::LAMBDA_CA_NM,
            constants::mercury_lines::LAMBDA_CD_NM,
        )?
        .with_repump_wavelength(constants::mercury_lines::LAMBDA_CE_NM)
    }

    /// A geometry with all wave vectors zeroed: atoms effectively at rest.
    pub fn at_rest() -> Self {
        BeamGeometry {
            k_p: [0.0; 3],
            k_s: [0.0; 3],
            k_w: [0.0; 3],
            k_r: [0.0; 3],
            closure_residual: 0.0,
        }
    }

    /// Orthonormal basis of the span of the wave vectors (at most two axes
    /// for the coplanar closure geometry). Velocity components outside this
    /// span never enter a detuning.
    pub fn effective_axes(&self) -> Vec<[f64; 3]> {
        let mut axes: Vec<[f64; 3]> = Vec::new();
        for k in [self.k_p, self.k_s, self.k_w, self.k_r] {
            let mut v = k;
            for a in &axes {
                let p = dot3(v, *a);
                v = [v[0] - p * a[0], v[1] - p * a[1], v[2] - p * a[2]];
            }
            let n = norm3(v);
            let scale = norm3(k);
            if scale > 0.0 && n > 1e-9 * scale {
                axes.push([v[0] / n, v[1] / n, v[2] / n]);
            }
        }
        axes
    }
}

/// Detunings (rad/s) of the four fields at a given atomic velocity.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct FieldDetunings {
    pub p: f64,
    pub s: f64,
    pub w: f64,
    pub r: f64,
}

/// First-order Doppler shift: Δ_j(v) = Δ_j − k_j · v.
pub fn shifted_detunings(base: &FieldDetunings, geometry: &BeamGeometry, v: [f64; 3]) -> FieldDetunings {
    FieldDetunings {
        p: base.p - dot3(geometry.k_p, v),
        s: base.s - dot3(geometry.k_s, v),
        w: base.w - dot3(geometry.k_w, v),
        r: base.r - dot3(geometry.k_r, v),
    }
}

/// Gauss-Hermite nodes and weights for ∫ f(t) e^(−t²) dt (physicists'
/// convention), by Newton iteration on the scaled recurrence.
pub fn gauss_hermite(n: usize) -> (Vec<f64>, Vec<f64>) {
    assert!(n >= 1, "quadrature needs at least one node");
    let mut nodes = vec![0.0; n];
    let mut weights = vec![0.0; n];
    let m = (n + 1) / 2;
    let mut z = 0.0;
    for i in 0..m {
        z = match i {
            0 => {
                let f = (2 * n + 1) as f64;
                f.sqrt() - 1.85575 * f.powf(-1.0 / 6.0)
            }
            1 => z - 1.14 * (n as f64).powf(0.426) / z,
            2 => 1.86 * z - 0.86 * nodes[0],
            3 => 1.91 * z - 0.91 * nodes[1],
            _ => 2.0 * z - nodes[i - 2],
        };
        let mut pp = 0.0;
        for _ in 0..200 {
            // orthonormal Hermite recurrence
            let mut p1 = std::f64::consts::PI.powf(-0.25);
            let mut p2 = 0.0;
            for k in 0..n {
                let p3 = p2;
                p2 = p1;
                p1 = z * (2.0 / (k as f64 + 1.0)).sqrt() * p2
                    - (k as f64 / (k as f64 + 1.0)).sqrt() * p3;
            }
            pp = (2.0 * n as f64).sqrt() * p2;
            let dz = p1 / pp;
            z -= dz;
            if dz.abs() < 1e-15 {
                break;
            }
        }
        nodes[i] = z;
        nodes[n - 1 - i] = -z;
        weights[i] = 2.0 / (pp * pp);
        weights[n - 1 - i] = weights[i];
    }
    // enforce exact symmetry for odd n
    if n % 2 == 1 {
        nodes[n / 2] = 0.0;
    }
    nodes.reverse();
    weights.reverse();
    (nodes, weights)
}

/// One-dimensional quadrature rule for a Maxwell-Boltzmann marginal.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum AxisRule {
    /// Plain Gauss-Hermite; optimal for integrands that vary on the thermal
    /// scale σ.
    GaussHermite { nodes: usize },
    /// Gauss-Legendre panels on a graded partition concentrated at v = 0,
    /// resolving resonance structure hundreds of times narrower than σ while
    /// still covering the ±6σ tails. `order` is the per-panel node count.
    Graded { order: usize },
}

/// Graded panel edges in units of σ, mirrored around zero.
const GRADED_EDGES_SIGMA: [f64; 18] = [
    0.0, 0.005, 0.01, 0.02, 0.035, 0.06, 0.1, 0.16, 0.25, 0.4, 0.6, 0.9, 1.3, 1.9, 2.7, 3.8,
    5.2, 6.5,
];

/// Gauss-Legendre nodes and weights on [−1, 1] by Newton iteration.
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    assert!(n >= 1);
    let mut nodes = vec![0.0; n];
    let mut weights = vec![0.0; n];
    let m = n.div_ceil(2);
    for i in 0..m {
        // Chebyshev-like initial guess
        let mut z = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut pp = 0.0;
        for _ in 0..100 {
            let mut p1 = 1.0;
            let mut p2 = 0.0;
            for k in 0..n {
                let p3 = p2;
                p2 = p1;
                p1 = ((2.0 * k as f64 + 1.0) * z * p2 - k as f64 * p3) / (k as f64 + 1.0);
            }
            pp = n as f64 * (z * p1 - p2) / (z * z - 1.0);
            let dz = p1 / pp;
            z -= dz;
            if dz.abs() < 1e-15 {
                break;
            }
        }
        nodes[i] = -z;
        nodes[n - 1 - i] = z;
        weights[i] = 2.0 / ((1.0 - z * z) * pp * pp);
        weights[n - 1 - i] = weights[i];
    }
    (nodes, weights)
}

fn axis_rule_nodes(rule: AxisRule, sigma: f64) -> (Vec<f64>, Vec<f64>) {
    match rule {
        AxisRule::GaussHermite { nodes } => {
            let (t, w) = gauss_hermite(nodes);
            let sqrt_pi = std::f64::consts::PI.sqrt();
            (
                t.iter().map(|&ti| std::f64::consts::SQRT_2 * sigma * ti).collect(),
                w.iter().map(|&wi| wi / sqrt_pi).collect(),
            )
        }
        AxisRule::Graded { order } => {
            let (t, w) = gauss_legendre(order.max(2));
            let pdf = |v: f64| {
                (-v * v / (2.0 * sigma * sigma)).exp()
                    / ((2.0 * std::f64::consts::PI).sqrt() * sigma)
            };
            let mut nodes = Vec::new();
            let mut weights = Vec::new();
            let mut push_panel = |a: f64, b: f64| {
                for (ti, wi) in t.iter().zip(&w) {
                    let v = 0.5 * (a + b) + 0.5 * (b - a) * ti;
                    nodes.push(v);
                    weights.push(wi * 0.5 * (b - a) * pdf(v));
                }
            };
            for pair in GRADED_EDGES_SIGMA.windows(2) {
                push_panel(-pair[1] * sigma, -pair[0] * sigma);
                push_panel(pair[0] * sigma, pair[1] * sigma);
            }
            // remove the Gaussian-tail truncation bias
            let total: f64 = weights.iter().sum();
            for w in &mut weights {
                *w /= total;
            }
            (nodes, weights)
        }
    }
}

/// Maxwell-Boltzmann velocity quadrature over the effective axes of a beam
/// geometry.
#[derive(Clone, Debug)]
pub struct VelocityQuadrature {
    nodes: Vec<[f64; 3]>,
    weights: Vec<f64>,
    pub temperature: f64,
    pub axes: usize,
}

impl VelocityQuadrature {
    /// Tensor Gauss-Hermite rule with `nodes_per_axis` points per effective
    /// axis at temperature `temperature` (K) for an atom of `mass_u` atomic
    /// mass units. Zero axes collapse to the single node v = 0.
    pub fn new(
        geometry: &BeamGeometry,
        temperature: f64,
        mass_u: f64,
        nodes_per_axis: usize,
    ) -> Result<Self> {
        Self::from_rule(geometry, temperature, mass_u, AxisRule::GaussHermite {
            nodes: nodes_per_axis,
        })
    }

    /// Tensor rule with an explicit per-axis quadrature.
    pub fn from_rule(
        geometry: &BeamGeometry,
        temperature: f64,
        mass_u: f64,
        rule: AxisRule,
    ) -> Result<Self> {
        if temperature < 0.0 || mass_u <= 0.0 {
            return Err(Error::InvalidParameter(
                "velocity quadrature needs T >= 0 and positive mass".into(),
            ));
        }
        let axes = geometry.effective_axes();
        if axes.is_empty() || temperature == 0.0 {
            return Ok(Self {
                nodes: vec![[0.0; 3]],
                weights: vec![1.0],
                temperature,
                axes: 0,
            });
        }
        let sigma = (K_B * temperature / (mass_u * ATOMIC_MASS)).sqrt();
        let (t, w) = axis_rule_nodes(rule, sigma);
        let mut nodes = vec![[0.0f64; 3]];
        let mut weights = vec![1.0f64];
        for axis in &axes {
            let mut next_nodes = Vec::with_capacity(nodes.len() * t.len());
            let mut next_weights = Vec::with_capacity(nodes.len() * t.len());
            for (node, weight) in nodes.iter().zip(&weights) {
                for (vi, wi) in t.iter().zip(&w) {
                    next_nodes.push([
                        node[0] + vi * axis[0],
                        node[1] + vi * axis[1],
                        node[2] + vi * axis[2],
                    ]);
                    next_weights.push(weight * wi);
                }
            }
            nodes = next_nodes;
            weights = next_weights;
        }
        Ok(Self { nodes, weights, temperature, axes: axes.len() })
    }

    pub fn nodes(&self) -> &[[f64; 3]] {
        &self.nodes
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }
}

/// Weighted average of a velocity-dependent sampler over the quadrature.
///
/// Nodes are evaluated in parallel; the reduction order is fixed so results
/// are bit-reproducible.
pub fn velocity_average<F>(sampler: F, quad: &VelocityQuadrature) -> Result<Complex64>
where
    F: Fn([f64; 3]) -> Result<Complex64> + Sync,
{
    let values: Result<Vec<Complex64>> =
        quad.nodes.par_iter().map(|&v| sampler(v)).collect();
    let values = values?;
    let mut acc = Complex64::ZERO;
    for (v, w) in values.iter().zip(&quad.weights) {
        acc += v * w;
    }
    Ok(acc)
}

/// Doppler full width at half maximum (Hz) of a transition at wavelength
/// `lambda_nm` for temperature `temperature` (K) and mass `mass_u` (u):
/// FWHM = (1/λ) √(8 k_B T ln 2 / m).
pub fn doppler_fwhm(lambda_nm: f64, temperature: f64, mass_u: f64) -> f64 {
    let m = mass_u * ATOMIC_MASS;
    (8.0 * K_B * temperature * std::f64::consts::LN_2 / m).sqrt() / (lambda_nm * 1e-9)
}

/// Antoine-type mercury vapor-pressure correlation, log₁₀(p/Pa) = A − B/(T+C),
/// anchored so that the number density at 300 K matches the reference value
/// 9.2×10¹³ cm⁻³ used throughout.
const VAPOR_B: f64 = 3007.129;
const VAPOR_C: f64 = -10.001;
/// Reference density at 300 K (m⁻³).
pub const VAPOR_DENSITY_ANCHOR: f64 = 9.2e19;

fn vapor_a() -> f64 {
    static A: std::sync::OnceLock<f64> = std::sync::OnceLock::new();
    *A.get_or_init(|| {
        let p_anchor = VAPOR_DENSITY_ANCHOR * K_B * 300.0;
        p_anchor.log10() + VAPOR_B / (300.0 + VAPOR_C)
    })
}

/// Mercury vapor number density (m⁻³) from the ideal-gas law and the
/// saturated vapor pressure. Valid for 273 K < T < 400 K.
pub fn vapor_density(temperature: f64) -> Result<f64> {
    if !(273.0..400.0).contains(&temperature) || temperature <= 273.0 {
        return Err(Error::InvalidParameter(format!(
            "vapor-pressure correlation is valid for 273 K < T < 400 K, got {temperature} K"
        )));
    }
    let p = 10f64.powf(vapor_a() - VAPOR_B / (temperature + VAPOR_C));
    Ok(p / (K_B * temperature))
}

/// Photon-recoil frequency shift ħω²/(2mc²) in rad/s.
pub fn recoil_shift(lambda_nm: f64, mass_u: f64) -> f64 {
    let omega = constants::angular_frequency_from_wavelength_nm(lambda_nm);
    constants::HBAR * omega * omega / (2.0 * mass_u * ATOMIC_MASS * constants::C * constants::C)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use rand::{Rng, SeedableRng};

    #[test]
    fn mercury_geometry_closes() {
        let g = BeamGeometry::mercury().unwrap();
        assert!(g.closure_residual < 1e-10 * norm3(g.k_p));
        // wavenumber magnitudes survive the construction
        assert_abs_diff_eq!(
            norm3(g.k_w),
            constants::wavenumber_from_wavelength_nm(546.1),
            epsilon = 1e-3
        );
        assert_eq!(g.effective_axes().len(), 2);
    }

    #[test]
    fn infeasible_closure_is_rejected() {
        // |k_w| above k_p + k_s: no triangle
        assert!(three_photon_geometry(500.0, 500.0, 100.0).is_err());
        // |k_w| below |k_p − k_s|: the degenerate near-antiparallel closure
        // (equal p and s wavelengths cannot produce a long-wavelength third
        // beam: |k_p + k_s| can reach 0 but never 2π/λ_w exactly)
        assert!(three_photon_geometry(500.0, 1000.0, 100000.0).is_err());
    }

    #[test]
    fn three_photon_detuning_is_velocity_independent() {
        // the individual shifts reach ±10 GHz while their closure combination
        // must cancel to rounding error: bound the drift by a few ulps of the
        // largest single-field shift
        let g = BeamGeometry::mercury().unwrap();
        let base = FieldDetunings { p: 1.0e5, s: -3.0e4, w: 7.0e4, r: 0.0 };
        let d3_rest = base.p + base.s - base.w;
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(42);
        for _ in 0..100 {
            let v = [
                rng.gen_range(-500.0..500.0),
                rng.gen_range(-500.0..500.0),
                rng.gen_range(-500.0..500.0),
            ];
            let d = shifted_detunings(&base, &g, v);
            let d3 = d.p + d.s - d.w;
            let shift_scale = (base.p - d.p).abs() + (base.s - d.s).abs() + (base.w - d.w).abs();
            let bound = 8.0 * f64::EPSILON * shift_scale.max(1.0);
            assert!(
                (d3 - d3_rest).abs() < bound,
                "Δ₃ drifted by {} against bound {bound}",
                (d3 - d3_rest).abs()
            );
        }
    }

    #[test]
    fn doppler_shift_along_probe_axis() {
        let g = BeamGeometry::mercury().unwrap();
        let base = FieldDetunings::default();
        let d = shifted_detunings(&base, &g, [0.0, 0.0, 100.0]);
        // |k_p| · 100 m/s = 2π/253.7nm · 100 ≈ 2.4766e9 rad/s, red-shifted
        assert_abs_diff_eq!(d.p, -2.4766e9, epsilon = 2e5);
        // perpendicular motion does not shift anything
        let d = shifted_detunings(&base, &g, [0.0, 123.0, 0.0]);
        assert_eq!(d, base);
        let d = shifted_detunings(&base, &g, [0.0; 3]);
        assert_eq!(d, base);
    }

    #[test]
    fn gauss_hermite_integrates_moments() {
        for n in [8, 24, 48] {
            let (t, w) = gauss_hermite(n);
            let sqrt_pi = std::f64::consts::PI.sqrt();
            let m0: f64 = w.iter().sum();
            let m2: f64 = t.iter().zip(&w).map(|(x, w)| x * x * w).sum();
            let m4: f64 = t.iter().zip(&w).map(|(x, w)| x.powi(4) * w).sum();
            assert_abs_diff_eq!(m0, sqrt_pi, epsilon = 1e-12 * sqrt_pi);
            assert_abs_diff_eq!(m2, sqrt_pi / 2.0, epsilon = 1e-11);
            assert_abs_diff_eq!(m4, 3.0 * sqrt_pi / 4.0, epsilon = 1e-10);
            // symmetry
            for i in 0..n {
                assert_abs_diff_eq!(t[i], -t[n - 1 - i], epsilon = 1e-13);
            }
        }
    }

    #[test]
    fn quadrature_reduces_to_rest_for_zero_geometry() {
        let quad =
            VelocityQuadrature::new(&BeamGeometry::at_rest(), 300.0, 200.6, 24).unwrap();
        assert_eq!(quad.len(), 1);
        let chi = velocity_average(|v| Ok(Complex64::new(v[2] + 5.0, 0.0)), &quad).unwrap();
        assert_abs_diff_eq!(chi.re, 5.0, epsilon = 0.0);
    }

    #[test]
    fn constant_sampler_passes_through() {
        let g = BeamGeometry::mercury().unwrap();
        let quad = VelocityQuadrature::new(&g, 300.0, 200.6, 16).unwrap();
        assert_eq!(quad.len(), 256);
        let total: f64 = quad.weights().iter().sum();
        assert_abs_diff_eq!(total, 1.0, epsilon = 1e-12);
        let chi = velocity_average(|_| Ok(Complex64::new(0.25, -1.5)), &quad).unwrap();
        assert_abs_diff_eq!(chi.re, 0.25, epsilon = 1e-12);
        assert_abs_diff_eq!(chi.im, -1.5, epsilon = 1e-12);
    }

    #[test]
    fn lorentzian_average_matches_analytic_voigt_width() {
        // single absorber at probe wavelength with Γ well below the Doppler
        // width; the averaged profile width must follow the Voigt relation
        let g = BeamGeometry::mercury().unwrap();
        let t = 300.0;
        let quad = VelocityQuadrature::new(&g, t, 200.6, 128).unwrap();
        let kp = norm3(g.k_p);
        let sigma_v = (K_B * t / (200.6 * ATOMIC_MASS)).sqrt();
        let fwhm_g = 2.0 * (2.0 * std::f64::consts::LN_2).sqrt() * sigma_v * kp;
        let fwhm_l = 0.25 * fwhm_g;
        let gamma_half = fwhm_l / 2.0;

        let profile = |delta: f64| -> f64 {
            velocity_average(
                |v| {
                    let shift = delta - dot3(g.k_p, v);
                    Ok(Complex64::new(
                        gamma_half * gamma_half / (shift * shift + gamma_half * gamma_half),
                        0.0,
                    ))
                },
                &quad,
            )
            .unwrap()
            .re
        };
        let peak = profile(0.0);
        // scan for the half crossing
        let mut lo = 0.0;
        let mut hi = 2.0 * fwhm_g;
        for _ in 0..60 {
            let mid = 0.5 * (lo + hi);
            if profile(mid) > peak / 2.0 {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        let fwhm_measured = lo + hi;
        // Olivero-Longbothum approximation, accurate to 0.02 %
        let fwhm_voigt = 0.5346 * fwhm_l + (0.2166 * fwhm_l * fwhm_l + fwhm_g * fwhm_g).sqrt();
        assert!(
            (fwhm_measured - fwhm_voigt).abs() / fwhm_voigt < 0.01,
            "measured {fwhm_measured:.4e}, Voigt {fwhm_voigt:.4e}"
        );
    }

    #[test]
    fn doppler_width_reference_values() {
        let fwhm = doppler_fwhm(253.7, 300.0, 200.6);
        assert!((fwhm - 1.04e9).abs() / 1.04e9 < 0.01, "got {fwhm:.4e}");
        // √T scaling
        assert_abs_diff_eq!(
            doppler_fwhm(253.7, 1200.0, 200.6) / fwhm,
            2.0,
            epsilon = 1e-12
        );
        // λ scaling against the anchor
        assert_abs_diff_eq!(
            doppler_fwhm(546.1, 300.0, 200.6),
            fwhm * 253.7 / 546.1,
            epsilon = 1e-3
        );
    }

    #[test]
    fn vapor_density_anchor_and_monotonicity() {
        let n300 = vapor_density(300.0).unwrap();
        assert!((n300 - 9.2e19).abs() / 9.2e19 < 1e-10);
        let mut prev = vapor_density(274.0).unwrap();
        for t in 275..400 {
            let n = vapor_density(t as f64).unwrap();
            assert!(n > prev, "density must increase with temperature");
            prev = n;
        }
        assert!(vapor_density(300.0).unwrap() < vapor_density(310.0).unwrap());
        assert!(vapor_density(270.0).is_err());
        assert!(vapor_density(450.0).is_err());
    }

    #[test]
    fn recoil_shift_reference_values() {
        let shift = recoil_shift(253.7, 200.6);
        // frozen from the defining formula ħω²/(2mc²)
        assert_abs_diff_eq!(shift, 9.709e4, epsilon = 2e2);
        // doubling λ quarters the shift
        assert_abs_diff_eq!(recoil_shift(507.4, 200.6), shift / 4.0, epsilon = 1e-6 * shift);
        // green line value via the wavelength-ratio law
        assert_abs_diff_eq!(
            recoil_shift(546.1, 200.6),
            shift * (253.7f64 / 546.1).powi(2),
            epsilon = 1e-6 * shift
        );
    }
}
