//! Velocity- and noise-averaged medium response.
//!
//! [`MediumResponse`] bundles a level scheme, its drive fields, pump rates,
//! phase-noise linewidths, and the optional Doppler average into one engine
//! that turns a probe detuning (and probe Rabi frequency) into a stationary
//! coherence or susceptibility. All spectrum, power, threshold, and gain-map
//! sweeps run through this type.

use num_complex::Complex64;

use crate::atom::{
    build_hamiltonian, DriveField, DriveStrength, FieldName, LevelScheme, Manifold, PumpSet,
};
use crate::constants::MERCURY_MASS_U;
use crate::doppler::{
    shifted_detunings, velocity_average, AxisRule, BeamGeometry, FieldDetunings,
    VelocityQuadrature,
};
use crate::liouvillian::{
    add_coherent, decay_channels, dissipator, extra_dephasing, phase_diffusion_liouvillian,
    steady_state_with, ProbeCoupling, SteadyStateOptions, Superoperator, XiMatrix,
};
use crate::{Error, Result};

/// Which velocity components enter the Maxwell-Boltzmann average.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum VelocityAverage {
    /// One-dimensional average along the probe axis. Transverse motion only
    /// detunes the drive beams, whose light shifts otherwise bury the narrow
    /// gain under a broad absorptive background; the probe-axis average is
    /// the standard reduction and reproduces the reference linewidths.
    ProbeAxis,
    /// Full average over the plane spanned by the beam wave vectors.
    BeamPlane,
}

/// Doppler-averaging configuration.
#[derive(Clone, Debug)]
pub struct DopplerSettings {
    pub geometry: BeamGeometry,
    /// Vapor temperature (K).
    pub temperature: f64,
    /// Atomic mass (u).
    pub mass_u: f64,
    /// Per-axis quadrature rule.
    pub rule: AxisRule,
    /// Whether the repump picks up a first-order Doppler shift. The default
    /// models flooded (effectively direction-free) repump light: a running
    /// repump wave would detune by hundreds of MHz for thermal velocity
    /// classes, re-trapping their population and quenching the gain.
    pub repump_shifted: bool,
    pub average: VelocityAverage,
}

impl DopplerSettings {
    /// The mercury beam closure at the given temperature with the default
    /// 24-node probe-axis rule and flooded repump.
    pub fn mercury(temperature: f64) -> Result<Self> {
        Ok(Self {
            geometry: BeamGeometry::mercury()?,
            temperature,
            mass_u: MERCURY_MASS_U,
            rule: AxisRule::Graded { order: 8 },
            repump_shifted: false,
            average: VelocityAverage::ProbeAxis,
        })
    }

    /// Switch to a plain Gauss-Hermite rule with the given node count.
    pub fn with_nodes(mut self, nodes_per_axis: usize) -> Self {
        self.rule = AxisRule::GaussHermite { nodes: nodes_per_axis };
        self
    }

    pub fn with_rule(mut self, rule: AxisRule) -> Self {
        self.rule = rule;
        self
    }

    pub fn with_repump_shift(mut self, shifted: bool) -> Self {
        self.repump_shifted = shifted;
        self
    }

    pub fn with_average(mut self, average: VelocityAverage) -> Self {
        self.average = average;
        self
    }

    fn effective_geometry(&self) -> BeamGeometry {
        let mut g = self.geometry;
        if !self.repump_shifted {
            g.k_r = [0.0; 3];
        }
        g
    }

    fn quadrature(&self) -> Result<VelocityQuadrature> {
        let geometry = self.effective_geometry();
        match self.average {
            VelocityAverage::BeamPlane => {
                VelocityQuadrature::from_rule(&geometry, self.temperature, self.mass_u, self.rule)
            }
            VelocityAverage::ProbeAxis => {
                let axis_geometry = BeamGeometry {
                    k_p: geometry.k_p,
                    k_s: [0.0; 3],
                    k_w: [0.0; 3],
                    k_r: [0.0; 3],
                    closure_residual: 0.0,
                };
                VelocityQuadrature::from_rule(
                    &axis_geometry,
                    self.temperature,
                    self.mass_u,
                    self.rule,
                )
            }
        }
    }
}

/// Medium response engine; see the module docs.
#[derive(Clone, Debug)]
pub struct MediumResponse {
    scheme: LevelScheme,
    drives: Vec<DriveField>,
    probe: DriveField,
    pumps: PumpSet,
    dephasing_pairs: Vec<(Manifold, Manifold, f64)>,
    density: f64,
    doppler: Option<(DopplerSettings, VelocityQuadrature)>,
    static_part: Superoperator,
    probe_coupling: ProbeCoupling,
}

/// Builder for [`MediumResponse`].
pub struct MediumResponseBuilder {
    scheme: LevelScheme,
    drives: Vec<DriveField>,
    probe_rabi: f64,
    probe_detuning: f64,
    pumps: PumpSet,
    dephasing_pairs: Vec<(Manifold, Manifold, f64)>,
    density: f64,
    doppler: Option<DopplerSettings>,
}

/// Default linear-response probe Rabi frequency (rad/s), well below both the
/// probe natural linewidth and the narrow gain feature.
pub const DEFAULT_PROBE_RABI: f64 = 2.0 * std::f64::consts::PI * 1.0e3;

impl MediumResponse {
    pub fn builder(scheme: LevelScheme) -> MediumResponseBuilder {
        MediumResponseBuilder {
            scheme,
            drives: Vec::new(),
            probe_rabi: DEFAULT_PROBE_RABI,
            probe_detuning: 0.0,
            pumps: PumpSet::default(),
            dephasing_pairs: Vec::new(),
            density: crate::doppler::VAPOR_DENSITY_ANCHOR,
            doppler: None,
        }
    }

    pub fn scheme(&self) -> &LevelScheme {
        &self.scheme
    }

    pub fn density(&self) -> f64 {
        self.density
    }

    pub fn probe_rabi(&self) -> f64 {
        match self.probe.strength {
            DriveStrength::ReducedRabi(v) => v.re,
            _ => unreachable!("probe strength is always a reduced Rabi scale"),
        }
    }

    pub fn pumps(&self) -> PumpSet {
        self.pumps
    }

    pub fn doppler_settings(&self) -> Option<&DopplerSettings> {
        self.doppler.as_ref().map(|(s, _)| s)
    }

    pub fn quadrature(&self) -> Option<&VelocityQuadrature> {
        self.doppler.as_ref().map(|(_, q)| q)
    }

    pub fn drive(&self, name: FieldName) -> Option<&DriveField> {
        self.drives.iter().find(|d| d.name == name)
    }

    pub fn probe_transition(&self) -> &crate::atom::Transition {
        self.scheme
            .transition_for_field(FieldName::Probe)
            .expect("response always has a probe transition")
    }

    /// Replace the pump rates and rebuild the incoherent generator.
    pub fn set_pumps(&mut self, pumps: PumpSet) -> Result<()> {
        self.pumps = pumps;
        self.rebuild_static()
    }

    /// Replace the phase-noise linewidths (rad/s) and rebuild.
    pub fn set_linewidths(&mut self, b_s: f64, b_w: f64, b_r: f64) -> Result<()> {
        for (name, b) in [
            (FieldName::Strong, b_s),
            (FieldName::Weak, b_w),
            (FieldName::Repump, b_r),
        ] {
            if let Some(d) = self.drives.iter_mut().find(|d| d.name == name) {
                d.linewidth = b;
            }
        }
        self.rebuild_static()
    }

    /// Replace a drive amplitude; the coherent part is rebuilt per solve, so
    /// no other state needs to change.
    pub fn set_drive_strength(&mut self, name: FieldName, strength: DriveStrength) -> Result<()> {
        let drive = self
            .drives
            .iter_mut()
            .find(|d| d.name == name)
            .ok_or_else(|| Error::InvalidParameter(format!("no drive '{}'", name.label())))?;
        drive.strength = strength;
        Ok(())
    }

    pub fn set_probe_rabi(&mut self, probe_rabi: f64) -> Result<()> {
        if probe_rabi <= 0.0 {
            return Err(Error::InvalidParameter("probe Rabi must be positive".into()));
        }
        self.probe.strength = DriveStrength::rabi(probe_rabi);
        Ok(())
    }

    pub fn set_density(&mut self, density: f64) -> Result<()> {
        if density <= 0.0 {
            return Err(Error::InvalidParameter("density must be positive".into()));
        }
        self.density = density;
        Ok(())
    }

    fn rebuild_static(&mut self) -> Result<()> {
        self.static_part = build_static_part(
            &self.scheme,
            &self.drives,
            &self.pumps,
            &self.dephasing_pairs,
        )?;
        Ok(())
    }

    fn base_detunings(&self, probe_detuning: f64) -> FieldDetunings {
        let get = |name: FieldName| {
            self.drives.iter().find(|d| d.name == name).map(|d| d.detuning).unwrap_or(0.0)
        };
        FieldDetunings {
            p: probe_detuning,
            s: get(FieldName::Strong),
            w: get(FieldName::Weak),
            r: get(FieldName::Repump),
        }
    }

    /// Full generator at explicit per-field detunings and probe Rabi scale.
    pub fn liouvillian_at(
        &self,
        detunings: &FieldDetunings,
        probe_rabi: f64,
    ) -> Result<Superoperator> {
        let mut drives: Vec<DriveField> = Vec::with_capacity(self.drives.len() + 1);
        for d in &self.drives {
            let mut d = d.clone();
            d.detuning = match d.name {
                FieldName::Strong => detunings.s,
                FieldName::Weak => detunings.w,
                FieldName::Repump => detunings.r,
                FieldName::Probe => unreachable!(),
            };
            drives.push(d);
        }
        let mut probe = self.probe.clone();
        probe.detuning = detunings.p;
        probe.strength = DriveStrength::rabi(probe_rabi);
        drives.push(probe);

        let h = build_hamiltonian(&self.scheme, &drives)?;
        let mut l = self.static_part.clone();
        add_coherent(&mut l, &h);
        Ok(l)
    }

    /// Stationary projected probe coherence at one velocity.
    pub fn coherence_at_velocity(
        &self,
        probe_rabi: f64,
        probe_detuning: f64,
        v: [f64; 3],
    ) -> Result<Complex64> {
        let base = self.base_detunings(probe_detuning);
        let detunings = match &self.doppler {
            Some((settings, _)) => shifted_detunings(&base, &settings.effective_geometry(), v),
            None => base,
        };
        let l = self.liouvillian_at(&detunings, probe_rabi)?;
        let opts = SteadyStateOptions { degeneracy_check: false, positivity_check: false };
        let state = steady_state_with(&l, &opts)?;
        Ok(self.probe_coupling.projected_coherence(&state.rho))
    }

    /// Velocity-averaged projected coherence ρ̃_ab(Ω_p, Δ_p).
    pub fn averaged_coherence(&self, probe_rabi: f64, probe_detuning: f64) -> Result<Complex64> {
        match &self.doppler {
            None => self.coherence_at_velocity(probe_rabi, probe_detuning, [0.0; 3]),
            Some((_, quad)) => velocity_average(
                |v| self.coherence_at_velocity(probe_rabi, probe_detuning, v),
                quad,
            ),
        }
    }

    /// Susceptibility of atoms at rest (no velocity average).
    pub fn chi_rest(&self, probe_detuning: f64) -> Result<Complex64> {
        let coherence =
            self.coherence_at_velocity(self.probe_rabi(), probe_detuning, [0.0; 3])?;
        self.chi_from_coherence(coherence)
    }

    /// Velocity-averaged linear susceptibility at the configured probe Rabi.
    pub fn averaged_chi(&self, probe_detuning: f64) -> Result<Complex64> {
        let coherence = self.averaged_coherence(self.probe_rabi(), probe_detuning)?;
        self.chi_from_coherence(coherence)
    }

    /// Linear susceptibility with an automatic probe-strength convergence
    /// check: the probe Rabi frequency is halved until χ changes by less than
    /// `rel_tol`. Returns the susceptibility and the probe Rabi that passed.
    pub fn averaged_chi_converged(
        &self,
        probe_detuning: f64,
        rel_tol: f64,
        max_halvings: usize,
    ) -> Result<(Complex64, f64)> {
        let mut rabi = self.probe_rabi();
        let mut chi = self
            .averaged_coherence(rabi, probe_detuning)?
            .scale_into_chi(self, rabi)?;
        for _ in 0..max_halvings {
            let half = rabi / 2.0;
            let chi_half = self
                .averaged_coherence(half, probe_detuning)?
                .scale_into_chi(self, half)?;
            if (chi_half - chi).norm() <= rel_tol * chi_half.norm().max(f64::MIN_POSITIVE) {
                return Ok((chi_half, half));
            }
            rabi = half;
            chi = chi_half;
        }
        Err(Error::NonConvergence(format!(
            "probe linear-response check still moving after {max_halvings} halvings at Δ_p = {probe_detuning:.3e}"
        )))
    }

    /// Convert a projected coherence at the configured probe Rabi into χ.
    pub fn chi_from_coherence(&self, coherence: Complex64) -> Result<Complex64> {
        coherence.scale_into_chi(self, self.probe_rabi())
    }

    pub fn probe_coupling(&self) -> &ProbeCoupling {
        &self.probe_coupling
    }

    /// Diagnostic solve at the reference point with all checks on.
    pub fn reference_state(&self) -> Result<crate::liouvillian::StationaryState> {
        let l = self.liouvillian_at(&self.base_detunings(0.0), self.probe_rabi())?;
        steady_state_with(&l, &SteadyStateOptions::default())
    }
}

/// Small extension to keep χ-scaling in one place.
trait ScaleIntoChi {
    fn scale_into_chi(self, response: &MediumResponse, probe_rabi: f64) -> Result<Complex64>;
}

impl ScaleIntoChi for Complex64 {
    fn scale_into_chi(self, response: &MediumResponse, probe_rabi: f64) -> Result<Complex64> {
        response
            .probe_coupling
            .susceptibility_from_coherence(self, probe_rabi, response.density)
    }
}

fn build_static_part(
    scheme: &LevelScheme,
    drives: &[DriveField],
    pumps: &PumpSet,
    dephasing_pairs: &[(Manifold, Manifold, f64)],
) -> Result<Superoperator> {
    let channels = decay_channels(scheme, pumps)?;
    let mut l = dissipator(&channels)?;
    let get_b = |name: FieldName| {
        drives.iter().find(|d| d.name == name).map(|d| d.linewidth).unwrap_or(0.0)
    };
    let pd = phase_diffusion_liouvillian(
        get_b(FieldName::Strong),
        get_b(FieldName::Weak),
        get_b(FieldName::Repump),
        &XiMatrix::standard(),
        scheme,
    )?;
    l.add_scaled(Complex64::ONE, &pd);
    if !dephasing_pairs.is_empty() {
        let deph = extra_dephasing(scheme, dephasing_pairs)?;
        l.add_scaled(Complex64::ONE, &deph);
    }
    Ok(l)
}

impl MediumResponseBuilder {
    /// Add the drive fields (strong, weak, repump); the probe is configured
    /// separately.
    pub fn drives(mut self, drives: Vec<DriveField>) -> Self {
        self.drives = drives;
        self
    }

    pub fn probe_rabi(mut self, probe_rabi: f64) -> Self {
        self.probe_rabi = probe_rabi;
        self
    }

    pub fn pumps(mut self, pumps: PumpSet) -> Self {
        self.pumps = pumps;
        self
    }

    pub fn density(mut self, density: f64) -> Self {
        self.density = density;
        self
    }

    pub fn doppler(mut self, settings: Option<DopplerSettings>) -> Self {
        self.doppler = settings;
        self
    }

    pub fn extra_dephasing(mut self, pairs: Vec<(Manifold, Manifold, f64)>) -> Self {
        self.dephasing_pairs = pairs;
        self
    }

    pub fn build(self) -> Result<MediumResponse> {
        if self.drives.iter().any(|d| d.name == FieldName::Probe) {
            return Err(Error::InvalidParameter(
                "configure the probe through the builder, not the drive list".into(),
            ));
        }
        if self.probe_rabi <= 0.0 {
            return Err(Error::InvalidParameter("probe Rabi must be positive".into()));
        }
        if self.density <= 0.0 {
            return Err(Error::InvalidParameter("density must be positive".into()));
        }
        for d in &self.drives {
            // fail early on fields the scheme cannot host
            let (upper, lower) = d.name.coupled_manifolds();
            if !self.scheme.has_manifold(upper) || !self.scheme.has_manifold(lower) {
                return Err(Error::InvalidParameter(format!(
                    "drive '{}' has no transition in this scheme",
                    d.name.label()
                )));
            }
        }
        let probe = DriveField::new(FieldName::Probe, DriveStrength::rabi(self.probe_rabi))
            .with_detuning(self.probe_detuning);
        let static_part =
            build_static_part(&self.scheme, &self.drives, &self.pumps, &self.dephasing_pairs)?;
        let probe_coupling = ProbeCoupling::new(&self.scheme, &probe.polarization)?;
        let doppler = match self.doppler {
            None => None,
            Some(settings) => {
                let quad = settings.quadrature()?;
                Some((settings, quad))
            }
        };
        Ok(MediumResponse {
            scheme: self.scheme,
            drives: self.drives,
            probe,
            pumps: self.pumps,
            dephasing_pairs: self.dephasing_pairs,
            density: self.density,
            doppler,
            static_part,
            probe_coupling,
        })
    }
}
