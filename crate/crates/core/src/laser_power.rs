//! Semiclassical stationary laser power: odd-polynomial susceptibility
//! expansions, the photon-number equation, power curves and threshold maps.

use num_complex::Complex64;

use crate::constants::{C, EPSILON_0, HBAR};
use crate::fitting;
use crate::response::MediumResponse;
use crate::{Error, Result};

/// Default spectral standard deviation of the incoherent pump light (rad/s),
/// a Doppler-broadened line at room temperature.
pub fn default_pump_spectral_width() -> f64 {
    crate::constants::hz_to_angular(440.0e6)
}

/// Instantaneous susceptibilities of the lasing transition up to order
/// 2M + 1, obtained from an odd-polynomial fit of the stationary coherence
/// against the probe Rabi frequency.
#[derive(Clone, Debug)]
pub struct SusceptibilityExpansion {
    /// χ⁽¹⁾, χ⁽³⁾, χ⁽⁵⁾, … (complex, SI units of the respective order).
    pub chi: Vec<Complex64>,
    /// Truncation order M (`chi.len() == M + 1`).
    pub order: usize,
    /// Relative overlap-volume weights V_m / V₀ used downstream.
    pub overlap_weights: Vec<f64>,
    /// RMS residual of the polynomial fit, in units of the largest |ρ̃_ab|.
    pub fit_residual: f64,
}

impl SusceptibilityExpansion {
    pub fn chi1_im(&self) -> f64 {
        self.chi[0].im
    }
    pub fn chi3_im(&self) -> f64 {
        self.chi.get(1).map(|c| c.im).unwrap_or(0.0)
    }
    pub fn chi5_im(&self) -> f64 {
        self.chi.get(2).map(|c| c.im).unwrap_or(0.0)
    }
}

/// The transversely localized laser mode makes V_m ≈ V₀ / 2^m.
pub fn default_overlap_weights(order: usize) -> Vec<f64> {
    (0..=order).map(|m| 0.5f64.powi(m as i32)).collect()
}

/// Fit (probe Rabi, stationary projected coherence) samples to an odd
/// polynomial ρ̃_ab(Ω) = Σ_m c_{2m+1} Ω^{2m+1} and convert the coefficients
/// into instantaneous susceptibilities,
/// χ^(2m+1) = N d²⁽ᵐ⁺¹⁾ c_{2m+1} / (ε₀ ħ^(2m+1)).
///
/// The overlap volumes scale both sides of the mode-projected polarization
/// identically, so they cancel in the susceptibilities themselves and only
/// reenter through the gain parameters; the weights are carried along for
/// that step.
pub fn fit_susceptibility_expansion(
    samples: &[(f64, Complex64)],
    order: usize,
    dipole_sq: f64,
    density: f64,
    overlap_weights: &[f64],
) -> Result<SusceptibilityExpansion> {
    if overlap_weights.len() != order + 1 {
        return Err(Error::InvalidParameter(format!(
            "need {} overlap weights for order {}, got {}",
            order + 1,
            order,
            overlap_weights.len()
        )));
    }
    if samples.len() < order + 2 {
        return Err(Error::Fit(format!(
            "expansion of order {} needs at least {} samples",
            order,
            order + 2
        )));
    }
    let xs: Vec<f64> = samples.iter().map(|(o, _)| *o).collect();
    let ys: Vec<Complex64> = samples.iter().map(|(_, c)| *c).collect();
    let coeffs = fitting::fit_odd_polynomial(&xs, &ys, order)?;

    // fit residual relative to the coherence scale
    let scale = ys.iter().map(|c| c.norm()).fold(f64::MIN_POSITIVE, f64::max);
    let mut sq = 0.0;
    for (&x, &y) in xs.iter().zip(&ys) {
        let model: Complex64 = coeffs
            .iter()
            .enumerate()
            .map(|(m, c)| c * x.powi(2 * m as i32 + 1))
            .sum();
        sq += (model - y).norm_sqr();
    }
    let fit_residual = (sq / xs.len() as f64).sqrt() / scale;

    let chi = coeffs
        .iter()
        .enumerate()
        .map(|(m, c)| {
            c * dipole_sq.powi(m as i32 + 1) * density
                / (EPSILON_0 * HBAR.powi(2 * m as i32 + 1))
        })
        .collect();
    Ok(SusceptibilityExpansion {
        chi,
        order,
        overlap_weights: overlap_weights.to_vec(),
        fit_residual,
    })
}

/// Resonator parameters of the semiclassical power model.
#[derive(Clone, Copy, Debug)]
pub struct CavityParams {
    /// Quality factor Q = ε₀ ω_p / σ.
    pub quality_factor: f64,
    /// Mode volume V_c (m³).
    pub mode_volume: f64,
    /// Overlap ratio V₀ / V_c of the gain region with the mode.
    pub overlap_ratio: f64,
    /// Beam waist of the lasing mode (m).
    pub waist: f64,
}

impl CavityParams {
    pub fn validate(&self) -> Result<()> {
        if self.quality_factor <= 0.0 {
            return Err(Error::InvalidParameter("quality factor must be positive".into()));
        }
        if self.mode_volume <= 0.0 || self.waist <= 0.0 {
            return Err(Error::InvalidParameter("cavity volumes and waist must be positive".into()));
        }
        if !(self.overlap_ratio > 0.0 && self.overlap_ratio <= 1.0) {
            return Err(Error::InvalidParameter(format!(
                "overlap ratio must be in (0, 1], got {}",
                self.overlap_ratio
            )));
        }
        Ok(())
    }
}

/// Coefficients of the photon-number equation ∂_t n = α n − β n² − γ n³.
#[derive(Clone, Copy, Debug)]
pub struct GainParameters {
    /// Linear net gain (s⁻¹); above threshold when positive.
    pub alpha: f64,
    /// Quadratic saturation (s⁻¹ per photon).
    pub beta: f64,
    /// Cubic saturation (s⁻¹ per photon²).
    pub gamma: f64,
}

/// Convert a susceptibility expansion into the photon-number-equation
/// coefficients: α = −ω_p/Q − ω_p (V₀/V_c) χ₁″, β = ħω_p²V₁χ₃″/(2ε₀V_c²),
/// γ = ħ²ω_p³V₂χ₅″/(4ε₀V_c³).
pub fn gain_parameters(
    expansion: &SusceptibilityExpansion,
    cavity: &CavityParams,
    omega_p: f64,
) -> Result<GainParameters> {
    cavity.validate()?;
    let v_c = cavity.mode_volume;
    let v0 = cavity.overlap_ratio * v_c;
    let weight = |m: usize| expansion.overlap_weights.get(m).copied().unwrap_or(0.0);
    let alpha = -omega_p / cavity.quality_factor
        - omega_p * (v0 / v_c) * expansion.chi1_im();
    let beta =
        HBAR * omega_p.powi(2) * (weight(1) * v0) * expansion.chi3_im() / (2.0 * EPSILON_0 * v_c.powi(2));
    let gamma = HBAR.powi(2) * omega_p.powi(3) * (weight(2) * v0) * expansion.chi5_im()
        / (4.0 * EPSILON_0 * v_c.powi(3));
    Ok(GainParameters { alpha, beta, gamma })
}

/// Stationary photon number: 0 below threshold, and
/// n_st = −β/2γ + √(β²/4γ² + α/γ) above, with the analytic γ → 0 limit α/β.
pub fn stationary_photon_number(g: &GainParameters) -> Result<f64> {
    if g.alpha <= 0.0 {
        return Ok(0.0);
    }
    if g.beta > 0.0 {
        let n_hat = g.alpha / g.beta;
        if g.gamma.abs() * n_hat * n_hat < 1e-6 * g.beta * n_hat {
            return Ok(n_hat);
        }
    }
    if g.gamma == 0.0 {
        // β ≤ 0 here: no saturation mechanism left
        return Err(Error::InvalidParameter(
            "gain without saturation: α > 0 with β ≤ 0 and γ = 0".into(),
        ));
    }
    let half = g.beta / (2.0 * g.gamma);
    let disc = half * half + g.alpha / g.gamma;
    if disc < 0.0 {
        return Err(Error::InvalidParameter(
            "photon-number equation has no real stationary point (unphysical saturation)".into(),
        ));
    }
    let n = -half + disc.sqrt();
    if !(n.is_finite() && n >= 0.0) {
        return Err(Error::InvalidParameter(
            "photon-number equation yields no nonnegative stationary point".into(),
        ));
    }
    Ok(n)
}

/// Stationary intracavity power P = ħ ω_p c π w₀² n / (2 V_c).
pub fn intracavity_power(n_photons: f64, cavity: &CavityParams, omega_p: f64) -> f64 {
    HBAR * omega_p * C * std::f64::consts::PI * cavity.waist.powi(2) * n_photons
        / (2.0 * cavity.mode_volume)
}

/// Optical pump power driving the incoherent rate r:
/// P = √2 ħ ω_p³ σ_ω A r / (√π³ c² Γ_ab).
pub fn pump_power(rate: f64, area: f64, sigma_omega: f64, omega_p: f64, gamma_ab: f64) -> f64 {
    std::f64::consts::SQRT_2 * HBAR * omega_p.powi(3) * sigma_omega * area * rate
        / (std::f64::consts::PI.powi(3).sqrt() * C * C * gamma_ab)
}

/// Settings of the saturation sampling used by the expansion fit.
#[derive(Clone, Copy, Debug)]
pub struct SaturationSampling {
    /// Number of logarithmically spaced Rabi samples.
    pub samples: usize,
    /// Ratio Ω_max/Ω_min of the sample span.
    pub span: f64,
    /// Fractional deviation of |ρ̃_ab|/Ω from linearity that defines Ω_max.
    pub deviation: f64,
    /// Scan seed (rad/s) assumed inside the linear regime.
    pub seed: f64,
    /// Upper bound of the Ω_max scan (rad/s).
    pub cap: f64,
    /// Truncation order M of the expansion.
    pub order: usize,
}

impl Default for SaturationSampling {
    fn default() -> Self {
        Self {
            samples: 8,
            span: 100.0,
            deviation: 0.2,
            seed: crate::constants::hz_to_angular(10.0e3),
            cap: crate::constants::hz_to_angular(10.0e6),
            order: 2,
        }
    }
}

/// Locate the probe Rabi frequency where |ρ̃_ab| departs from linear response
/// by the configured fraction, by doubling from the seed.
pub fn find_saturation_rabi(response: &MediumResponse, settings: &SaturationSampling) -> Result<f64> {
    let seed = settings.seed;
    let base = response.averaged_coherence(seed, 0.0)?.norm() / seed;
    if base == 0.0 {
        return Err(Error::NonConvergence(
            "stationary coherence vanishes at the scan seed".into(),
        ));
    }
    let mut omega = seed;
    while omega < settings.cap {
        let next = omega * 2.0;
        let slope = response.averaged_coherence(next, 0.0)?.norm() / next;
        if (slope / base - 1.0).abs() >= settings.deviation {
            // one bisection step sharpens the estimate
            let mid = (omega * next).sqrt();
            let slope_mid = response.averaged_coherence(mid, 0.0)?.norm() / mid;
            return Ok(if (slope_mid / base - 1.0).abs() >= settings.deviation { mid } else { next });
        }
        omega = next;
    }
    Ok(settings.cap)
}

/// Sample the stationary coherence over the sub-saturation span and fit the
/// susceptibility expansion at the current operating point of `response`.
pub fn susceptibility_expansion_at(
    response: &MediumResponse,
    settings: &SaturationSampling,
) -> Result<SusceptibilityExpansion> {
    let omega_max = find_saturation_rabi(response, settings)?;
    let omega_min = omega_max / settings.span;
    let n = settings.samples.max(settings.order + 2);
    let ratio = (omega_max / omega_min).powf(1.0 / (n as f64 - 1.0));
    let mut samples = Vec::with_capacity(n);
    for k in 0..n {
        let omega = omega_min * ratio.powi(k as i32);
        let coherence = response.averaged_coherence(omega, 0.0)?;
        samples.push((omega, coherence));
    }
    fit_susceptibility_expansion(
        &samples,
        settings.order,
        response.probe_coupling().dipole_sq(),
        response.density(),
        &default_overlap_weights(settings.order),
    )
}

/// One operating point of a pump-power sweep.
#[derive(Clone, Debug)]
pub struct PowerPoint {
    /// Incoherent pump rate r (rad/s).
    pub pump_rate: f64,
    /// Optical pump power (W).
    pub pump_power: f64,
    pub gain: GainParameters,
    pub n_photons: f64,
    /// Stationary intracavity power (W).
    pub power: f64,
    pub expansion: SusceptibilityExpansion,
}

/// Geometry of the incoherent pump beam.
#[derive(Clone, Copy, Debug)]
pub struct PumpModel {
    /// Cross-section area A (m²).
    pub area: f64,
    /// Spectral standard deviation σ_ω (rad/s).
    pub sigma_omega: f64,
}

impl Default for PumpModel {
    fn default() -> Self {
        Self { area: 4.0e-6, sigma_omega: default_pump_spectral_width() }
    }
}

/// Stationary laser power against pump power for a grid of pump rates.
pub fn power_curve(
    response: &MediumResponse,
    cavity: &CavityParams,
    pump: &PumpModel,
    pump_rates: &[f64],
    sampling: &SaturationSampling,
) -> Result<Vec<PowerPoint>> {
    cavity.validate()?;
    let transition = response.probe_transition();
    let omega_p = transition.angular_frequency();
    let gamma_ab = transition.gamma;
    let mut points = Vec::with_capacity(pump_rates.len());
    for &rate in pump_rates {
        let mut local = response.clone();
        let mut pumps = local.pumps();
        pumps.r = rate;
        local.set_pumps(pumps)?;
        let expansion = susceptibility_expansion_at(&local, sampling)?;
        let gain = gain_parameters(&expansion, cavity, omega_p)?;
        let n_photons = stationary_photon_number(&gain)?;
        points.push(PowerPoint {
            pump_rate: rate,
            pump_power: pump_power(rate, pump.area, pump.sigma_omega, omega_p, gamma_ab),
            gain,
            n_photons,
            power: intracavity_power(n_photons, cavity, omega_p),
            expansion,
        });
    }
    Ok(points)
}

/// Linear net gain α at a pump rate, from the linear susceptibility alone.
pub fn linear_gain_at(response: &MediumResponse, cavity: &CavityParams, rate: f64) -> Result<f64> {
    let mut local = response.clone();
    let mut pumps = local.pumps();
    pumps.r = rate;
    local.set_pumps(pumps)?;
    let chi = local.averaged_chi(0.0)?;
    let omega_p = local.probe_transition().angular_frequency();
    Ok(-omega_p / cavity.quality_factor - omega_p * cavity.overlap_ratio * chi.im)
}

/// One cell of a threshold map.
#[derive(Clone, Copy, Debug)]
pub struct ThresholdPoint {
    /// Strong-drive linewidth (rad/s).
    pub b_s: f64,
    /// Weak-drive linewidth (rad/s).
    pub b_w: f64,
    /// Pump rate at threshold (rad/s), if one exists in the search window.
    pub rate: Option<f64>,
    /// Optical pump power at threshold (W).
    pub power: Option<f64>,
}

/// Lowest pump rate with α(r) = 0 in `(0, r_max]`.
///
/// The net gain is not monotone in the pump — over-pumping broadens the
/// resonance and the gain turns over — so a coarse upward scan brackets the
/// first sign change before bisecting (at most 40 iterations, or earlier
/// once |α| < 10⁻⁴ |α(0)|).
pub fn threshold_rate(
    response: &MediumResponse,
    cavity: &CavityParams,
    r_max: f64,
) -> Result<Option<f64>> {
    let alpha0 = linear_gain_at(response, cavity, 0.0)?;
    if alpha0 > 0.0 {
        // already above threshold without pumping; nothing to bisect
        return Ok(Some(0.0));
    }
    let tol = 1e-4 * alpha0.abs();
    const SCAN_STEPS: usize = 16;
    let mut lo = 0.0;
    let mut bracket = None;
    for k in 1..=SCAN_STEPS {
        let r = r_max * k as f64 / SCAN_STEPS as f64;
        if linear_gain_at(response, cavity, r)? > 0.0 {
            bracket = Some(r);
            break;
        }
        lo = r;
    }
    let Some(mut hi) = bracket else {
        return Ok(None);
    };
    let mut root = hi;
    for _ in 0..40 {
        let mid = 0.5 * (lo + hi);
        let alpha = linear_gain_at(response, cavity, mid)?;
        if alpha.abs() < tol {
            return Ok(Some(mid));
        }
        if alpha < 0.0 {
            lo = mid;
        } else {
            hi = mid;
            root = mid;
        }
    }
    Ok(Some(root))
}

/// Threshold pump power over a grid of drive linewidths.
pub fn threshold_scan(
    response: &MediumResponse,
    cavity: &CavityParams,
    pump: &PumpModel,
    b_s_grid: &[f64],
    b_w_grid: &[f64],
    b_r: f64,
    r_max: f64,
) -> Result<Vec<ThresholdPoint>> {
    cavity.validate()?;
    let transition = response.probe_transition();
    let omega_p = transition.angular_frequency();
    let gamma_ab = transition.gamma;
    let mut out = Vec::with_capacity(b_s_grid.len() * b_w_grid.len());
    for &b_s in b_s_grid {
        for &b_w in b_w_grid {
            let mut local = response.clone();
            local.set_linewidths(b_s, b_w, b_r)?;
            let rate = threshold_rate(&local, cavity, r_max)?;
            out.push(ThresholdPoint {
                b_s,
                b_w,
                rate,
                power: rate
                    .map(|r| pump_power(r, pump.area, pump.sigma_omega, omega_p, gamma_ab)),
            });
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn photon_number_branches() {
        // below threshold
        let n = stationary_photon_number(&GainParameters { alpha: -1.0, beta: 1.0, gamma: 1.0 })
            .unwrap();
        assert_eq!(n, 0.0);
        // γ → 0 limit
        let n = stationary_photon_number(&GainParameters { alpha: 2.0, beta: 1.0, gamma: 0.0 })
            .unwrap();
        assert_abs_diff_eq!(n, 2.0, epsilon = 1e-12);
        // full quadratic solution
        let n = stationary_photon_number(&GainParameters { alpha: 1.0, beta: 1.0, gamma: 1.0 })
            .unwrap();
        assert_abs_diff_eq!(n, (5.0f64.sqrt() - 1.0) / 2.0, epsilon = 1e-12);
        // runaway gain is rejected
        assert!(stationary_photon_number(&GainParameters {
            alpha: 1.0,
            beta: -1.0,
            gamma: 0.0
        })
        .is_err());
    }

    #[test]
    fn photon_number_is_continuous_at_threshold() {
        for gamma in [0.0, 1e-3, 1.0] {
            let just_above = GainParameters { alpha: 1e-9, beta: 1.0, gamma };
            let n = stationary_photon_number(&just_above).unwrap();
            assert!(n < 1e-6, "limit from above must approach zero, got {n}");
            let at = GainParameters { alpha: 0.0, beta: 1.0, gamma };
            assert_eq!(stationary_photon_number(&at).unwrap(), 0.0);
        }
    }

    fn test_cavity() -> CavityParams {
        CavityParams {
            quality_factor: 198.0e6,
            mode_volume: 3.0e-7,
            overlap_ratio: 0.01,
            waist: 0.5e-3,
        }
    }

    #[test]
    fn gain_parameters_signs_and_threshold_root() {
        let omega_p = crate::constants::angular_frequency_from_wavelength_nm(253.7);
        let cavity = test_cavity();
        // zero gain medium: pure cavity decay
        let expansion = SusceptibilityExpansion {
            chi: vec![Complex64::ZERO, Complex64::ZERO, Complex64::ZERO],
            order: 2,
            overlap_weights: default_overlap_weights(2),
            fit_residual: 0.0,
        };
        let g = gain_parameters(&expansion, &cavity, omega_p).unwrap();
        assert!(g.alpha < 0.0);
        assert_abs_diff_eq!(g.alpha, -omega_p / cavity.quality_factor, epsilon = 1e-6);
        // α crosses zero exactly at χ₁″ = −V_c/(Q V₀)
        let chi_thr = -1.0 / (cavity.quality_factor * cavity.overlap_ratio);
        let expansion = SusceptibilityExpansion {
            chi: vec![Complex64::new(0.0, chi_thr), Complex64::ZERO, Complex64::ZERO],
            order: 2,
            overlap_weights: default_overlap_weights(2),
            fit_residual: 0.0,
        };
        let g = gain_parameters(&expansion, &cavity, omega_p).unwrap();
        assert!(g.alpha.abs() < 1e-9 * omega_p / cavity.quality_factor);
    }

    #[test]
    fn intracavity_power_scalings() {
        let omega_p = 7.4e15;
        let cavity = test_cavity();
        assert_eq!(intracavity_power(0.0, &cavity, omega_p), 0.0);
        let p1 = intracavity_power(1.0e6, &cavity, omega_p);
        let mut doubled = cavity;
        doubled.mode_volume *= 2.0;
        assert_abs_diff_eq!(intracavity_power(1.0e6, &doubled, omega_p), p1 / 2.0, epsilon = 1e-18);
    }

    #[test]
    fn pump_power_is_linear_in_rate() {
        let omega_p = crate::constants::angular_frequency_from_wavelength_nm(253.7);
        let gamma_ab = crate::constants::mercury_lines::gamma_ab();
        let sigma = default_pump_spectral_width();
        assert_eq!(pump_power(0.0, 4.0e-6, sigma, omega_p, gamma_ab), 0.0);
        let p1 = pump_power(1.0e6, 4.0e-6, sigma, omega_p, gamma_ab);
        let p2 = pump_power(2.0e6, 4.0e-6, sigma, omega_p, gamma_ab);
        assert_abs_diff_eq!(p2, 2.0 * p1, epsilon = 1e-12 * p2);
        // frozen from the defining formula at the standard operating point
        let p = pump_power(
            crate::constants::hz_to_angular(1.1e6),
            4.0e-6,
            sigma,
            omega_p,
            gamma_ab,
        );
        assert_abs_diff_eq!(p, 1.171, epsilon = 0.01);
    }

    #[test]
    fn expansion_fit_recovers_synthetic_nonlinearity() {
        let dipole_sq = 2.0e-59;
        let density = 9.2e19;
        // synthetic coherence with known linear and cubic parts
        let c1 = Complex64::new(1.0e-9, -2.0e-9);
        let c3 = Complex64::new(0.0, 4.0e-22);
        let omegas: Vec<f64> = (1..=9).map(|k| 1.0e4 * k as f64).collect();
        let samples: Vec<(f64, Complex64)> =
            omegas.iter().map(|&o| (o, c1 * o + c3 * o.powi(3))).collect();
        let exp = fit_susceptibility_expansion(
            &samples,
            2,
            dipole_sq,
            density,
            &default_overlap_weights(2),
        )
        .unwrap();
        let want1 = c1 * dipole_sq * density / (EPSILON_0 * HBAR);
        let want3 = c3 * dipole_sq.powi(2) * density / (EPSILON_0 * HBAR.powi(3));
        assert!((exp.chi[0] - want1).norm() < 1e-9 * want1.norm());
        assert!((exp.chi[1] - want3).norm() < 1e-6 * want3.norm());
        assert!(exp.chi[2].norm() < 1e-9 * want3.norm());
        assert!(exp.fit_residual < 1e-10);

        // purely linear data: nonlinear orders vanish
        let samples: Vec<(f64, Complex64)> = omegas.iter().map(|&o| (o, c1 * o)).collect();
        let exp = fit_susceptibility_expansion(
            &samples,
            2,
            dipole_sq,
            density,
            &default_overlap_weights(2),
        )
        .unwrap();
        assert!(exp.chi[1].norm() < 1e-10 * want3.norm());
        assert!(exp.chi[2].norm() < 1e-12 * want3.norm());
    }
}
