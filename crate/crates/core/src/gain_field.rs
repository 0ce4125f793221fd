//! Spatial gain distribution created by the intersecting Gaussian drive
//! beams of the three-photon geometry.
//!
//! Each grid point is treated as an independent homogeneous medium driven by
//! the local Rabi frequencies (local-intensity approximation); the repump is
//! taken spatially flooded. A bilinear lookup table over the two drive
//! amplitudes avoids one master-equation solve per voxel.

use ndarray::{Array2, Array3};
use num_complex::Complex64;
use rayon::prelude::*;

use crate::atom::{envelope_from_power, DriveStrength, FieldName};
use crate::constants::HBAR;
use crate::doppler::BeamGeometry;
use crate::response::MediumResponse;
use crate::{Error, Result};

/// A focused Gaussian drive beam.
#[derive(Clone, Debug)]
pub struct GaussianBeamSpec {
    /// 1/e² intensity waist radius at the focus (m).
    pub waist: f64,
    /// Optical power (W).
    pub power: f64,
    pub wavelength_nm: f64,
    /// Unit propagation direction.
    pub direction: [f64; 3],
    /// Focus position (m).
    pub focus: [f64; 3],
    pub polarization: [Complex64; 3],
}

impl GaussianBeamSpec {
    pub fn validate(&self) -> Result<()> {
        if self.waist <= 0.0 || self.power < 0.0 || self.wavelength_nm <= 0.0 {
            return Err(Error::InvalidParameter(
                "beam needs positive waist and wavelength and nonnegative power".into(),
            ));
        }
        let n = (self.direction.iter().map(|x| x * x).sum::<f64>()).sqrt();
        if (n - 1.0).abs() > 1e-9 {
            return Err(Error::InvalidParameter(format!(
                "beam direction must be a unit vector, |n| = {n}"
            )));
        }
        Ok(())
    }

    pub fn rayleigh_range(&self) -> f64 {
        std::f64::consts::PI * self.waist * self.waist / (self.wavelength_nm * 1e-9)
    }

    /// Field envelope ℰ₀ at the focus (V/m).
    pub fn peak_envelope(&self) -> f64 {
        envelope_from_power(self.power, self.waist)
    }

    /// Complex field envelope at a point: fundamental-Gaussian transverse
    /// profile with waist evolution, wavefront curvature, and Gouy phase
    /// (carrier removed).
    pub fn envelope_at(&self, r: [f64; 3]) -> Complex64 {
        let rel = [r[0] - self.focus[0], r[1] - self.focus[1], r[2] - self.focus[2]];
        let z = rel[0] * self.direction[0] + rel[1] * self.direction[1] + rel[2] * self.direction[2];
        let rho_sq = (rel[0] * rel[0] + rel[1] * rel[1] + rel[2] * rel[2] - z * z).max(0.0);
        let z_r = self.rayleigh_range();
        let w0 = self.waist;
        let w_sq = w0 * w0 * (1.0 + (z / z_r).powi(2));
        let magnitude = self.peak_envelope() * (w0 * w0 / w_sq).sqrt() * (-rho_sq / w_sq).exp();
        let k = crate::constants::wavenumber_from_wavelength_nm(self.wavelength_nm);
        let gouy = (z / z_r).atan();
        let curvature = if z == 0.0 { 0.0 } else { k * rho_sq * z / (2.0 * (z * z + z_r * z_r)) };
        magnitude * Complex64::from_polar(1.0, curvature - gouy)
    }

    /// |envelope| relative to the focus peak, in [0, 1].
    pub fn relative_amplitude(&self, r: [f64; 3]) -> f64 {
        let peak = self.peak_envelope();
        if peak == 0.0 {
            return 0.0;
        }
        self.envelope_at(r).norm() / peak
    }
}

/// Peak spherical Rabi components [Ω⁻¹, Ω⁰, Ω⁺¹] (rad/s) of a beam driving
/// a transition with the given upper-manifold J.
pub fn power_to_peak_rabi(
    beam: &GaussianBeamSpec,
    transition: &crate::atom::Transition,
    j_upper: i32,
) -> Result<[Complex64; 3]> {
    beam.validate()?;
    let envelope = beam.peak_envelope();
    let scale =
        transition.reduced_dipole() * envelope / (HBAR * ((2 * j_upper + 1) as f64).sqrt());
    let c = crate::atom::spherical_coefficients(&beam.polarization);
    Ok([c[0] * scale, c[1] * scale, c[2] * scale])
}

/// Uniform node grid of complex samples over a rectangular box.
#[derive(Clone, Debug)]
pub struct ComplexField3D {
    /// Node counts (nx, ny, nz), each ≥ 2.
    pub dims: [usize; 3],
    /// Physical extents [[x0, x1], [y0, y1], [z0, z1]] (m); nodes include the
    /// endpoints.
    pub extents: [[f64; 2]; 3],
    pub values: Array3<Complex64>,
}

impl ComplexField3D {
    pub fn axis_coord(&self, axis: usize, index: usize) -> f64 {
        let [lo, hi] = self.extents[axis];
        lo + (hi - lo) * index as f64 / (self.dims[axis] as f64 - 1.0)
    }

    /// Trilinear interpolation, clamped to the box.
    pub fn sample(&self, r: [f64; 3]) -> Complex64 {
        let mut idx = [0usize; 3];
        let mut frac = [0.0f64; 3];
        for axis in 0..3 {
            let [lo, hi] = self.extents[axis];
            let n = self.dims[axis];
            let t = ((r[axis] - lo) / (hi - lo) * (n as f64 - 1.0)).clamp(0.0, n as f64 - 1.0);
            let i = (t.floor() as usize).min(n - 2);
            idx[axis] = i;
            frac[axis] = t - i as f64;
        }
        let mut acc = Complex64::ZERO;
        for (dx, wx) in [(0, 1.0 - frac[0]), (1, frac[0])] {
            for (dy, wy) in [(0, 1.0 - frac[1]), (1, frac[1])] {
                for (dz, wz) in [(0, 1.0 - frac[2]), (1, frac[2])] {
                    let w = wx * wy * wz;
                    if w > 0.0 {
                        acc += self.values[(idx[0] + dx, idx[1] + dy, idx[2] + dz)] * w;
                    }
                }
            }
        }
        acc
    }

    pub fn write<P: AsRef<std::path::Path>>(&self, path: P) -> Result<()> {
        let flat: Vec<Complex64> = self.values.iter().copied().collect();
        crate::io::write_complex_grid(path, self.dims, self.extents, &flat)
    }

    pub fn read<P: AsRef<std::path::Path>>(path: P) -> Result<Self> {
        let (dims, extents, flat) = crate::io::read_complex_grid(path)?;
        let values = Array3::from_shape_vec((dims[0], dims[1], dims[2]), flat)
            .map_err(|e| Error::Dimension(e.to_string()))?;
        Ok(Self { dims, extents, values })
    }
}

/// Node grid specification for [`sample_gain_distribution`].
#[derive(Clone, Copy, Debug)]
pub struct GridSpec3 {
    pub dims: [usize; 3],
    pub extents: [[f64; 2]; 3],
}

impl GridSpec3 {
    pub fn validate(&self) -> Result<()> {
        for axis in 0..3 {
            if self.dims[axis] < 2 {
                return Err(Error::InvalidParameter("grid needs at least 2 nodes per axis".into()));
            }
            if self.extents[axis][1] <= self.extents[axis][0] {
                return Err(Error::InvalidParameter("grid extents must be increasing".into()));
            }
        }
        Ok(())
    }
}

/// Bilinear susceptibility lookup over the two drive amplitudes (component
/// magnitudes, rad/s) at fixed pump, noise, and repump settings.
#[derive(Clone, Debug)]
pub struct SusceptibilityTable {
    omega_s: Vec<f64>,
    omega_w: Vec<f64>,
    chi: Array2<Complex64>,
}

impl SusceptibilityTable {
    /// Evaluate the averaged susceptibility on an (n_s × n_w) grid spanning
    /// [0, Ω_s,max] × [0, Ω_w,max]. Entries are independent solves and run in
    /// parallel.
    pub fn build(
        response: &MediumResponse,
        omega_s_max: f64,
        omega_w_max: f64,
        n_s: usize,
        n_w: usize,
    ) -> Result<Self> {
        if n_s < 2 || n_w < 2 || omega_s_max <= 0.0 || omega_w_max <= 0.0 {
            return Err(Error::InvalidParameter(
                "susceptibility table needs at least 2x2 nodes and positive spans".into(),
            ));
        }
        let omega_s: Vec<f64> =
            (0..n_s).map(|i| omega_s_max * i as f64 / (n_s as f64 - 1.0)).collect();
        let omega_w: Vec<f64> =
            (0..n_w).map(|j| omega_w_max * j as f64 / (n_w as f64 - 1.0)).collect();
        let entries: Result<Vec<Complex64>> = (0..n_s * n_w)
            .into_par_iter()
            .map(|k| {
                let i = k / n_w;
                let j = k % n_w;
                let mut local = response.clone();
                local.set_drive_strength(
                    FieldName::Strong,
                    DriveStrength::ComponentMagnitude(omega_s[i]),
                )?;
                local.set_drive_strength(
                    FieldName::Weak,
                    DriveStrength::ComponentMagnitude(omega_w[j]),
                )?;
                local.averaged_chi(0.0)
            })
            .collect();
        let chi = Array2::from_shape_vec((n_s, n_w), entries?)
            .map_err(|e| Error::Dimension(e.to_string()))?;
        Ok(Self { omega_s, omega_w, chi })
    }

    /// Bilinear interpolation, clamped to the table range.
    pub fn lookup(&self, omega_s: f64, omega_w: f64) -> Complex64 {
        let locate = |grid: &[f64], x: f64| -> (usize, f64) {
            let n = grid.len();
            let span = grid[n - 1] - grid[0];
            let t = ((x - grid[0]) / span * (n as f64 - 1.0)).clamp(0.0, n as f64 - 1.0);
            let i = (t.floor() as usize).min(n - 2);
            (i, t - i as f64)
        };
        let (i, fx) = locate(&self.omega_s, omega_s);
        let (j, fy) = locate(&self.omega_w, omega_w);
        self.chi[(i, j)] * ((1.0 - fx) * (1.0 - fy))
            + self.chi[(i + 1, j)] * (fx * (1.0 - fy))
            + self.chi[(i, j + 1)] * ((1.0 - fx) * fy)
            + self.chi[(i + 1, j + 1)] * (fx * fy)
    }

    pub fn node_values(&self) -> (&[f64], &[f64], &Array2<Complex64>) {
        (&self.omega_s, &self.omega_w, &self.chi)
    }
}

/// The strong and weak drive beams arranged on the closure geometry, both
/// focused at the origin with a common waist.
pub fn drive_beams_from_geometry(
    geometry: &BeamGeometry,
    waist: f64,
    power_s: f64,
    power_w: f64,
) -> Result<(GaussianBeamSpec, GaussianBeamSpec)> {
    let unit = |k: [f64; 3]| -> Result<[f64; 3]> {
        let n = (k.iter().map(|x| x * x).sum::<f64>()).sqrt();
        if n == 0.0 {
            return Err(Error::Geometry("zero wave vector has no direction".into()));
        }
        Ok([k[0] / n, k[1] / n, k[2] / n])
    };
    let strong = GaussianBeamSpec {
        waist,
        power: power_s,
        wavelength_nm: crate::constants::mercury_lines::LAMBDA_CA_NM,
        direction: unit(geometry.k_s)?,
        focus: [0.0; 3],
        polarization: crate::atom::polarization_y(),
    };
    let weak = GaussianBeamSpec {
        waist,
        power: power_w,
        wavelength_nm: crate::constants::mercury_lines::LAMBDA_CD_NM,
        direction: unit(geometry.k_w)?,
        focus: [0.0; 3],
        polarization: crate::atom::polarization_y(),
    };
    Ok((strong, weak))
}

/// Sample the averaged complex susceptibility of the inhomogeneously driven
/// medium on a uniform grid.
///
/// `table` controls the lookup resolution as (n_s, n_w); `None` solves every
/// voxel directly (slow, used for validation).
pub fn sample_gain_distribution(
    response: &MediumResponse,
    strong_beam: &GaussianBeamSpec,
    weak_beam: &GaussianBeamSpec,
    grid: &GridSpec3,
    table: Option<(usize, usize)>,
) -> Result<ComplexField3D> {
    grid.validate()?;
    strong_beam.validate()?;
    weak_beam.validate()?;

    let transition_s = response.scheme().transition_for_field(FieldName::Strong)?;
    let transition_w = response.scheme().transition_for_field(FieldName::Weak)?;
    let j_c = response.scheme().manifold_j(crate::atom::Manifold::C)?;
    let peak_s = power_to_peak_rabi(strong_beam, transition_s, j_c)?;
    let peak_w = power_to_peak_rabi(weak_beam, transition_w, j_c)?;
    // component magnitude as quoted for σ± drives
    let omega_s_peak = peak_s.iter().map(|c| c.norm()).fold(0.0, f64::max);
    let omega_w_peak = peak_w.iter().map(|c| c.norm()).fold(0.0, f64::max);

    let lookup = match table {
        Some((n_s, n_w)) if omega_s_peak > 0.0 && omega_w_peak > 0.0 => Some(
            SusceptibilityTable::build(response, omega_s_peak, omega_w_peak, n_s, n_w)?,
        ),
        _ => None,
    };

    let [nx, ny, nz] = grid.dims;
    let coord = |axis: usize, i: usize| -> f64 {
        let [lo, hi] = grid.extents[axis];
        lo + (hi - lo) * i as f64 / (grid.dims[axis] as f64 - 1.0)
    };
    let values: Result<Vec<Complex64>> = (0..nx * ny * nz)
        .into_par_iter()
        .map(|flat| {
            let i = flat / (ny * nz);
            let j = (flat / nz) % ny;
            let k = flat % nz;
            let r = [coord(0, i), coord(1, j), coord(2, k)];
            let omega_s = omega_s_peak * strong_beam.relative_amplitude(r);
            let omega_w = omega_w_peak * weak_beam.relative_amplitude(r);
            match &lookup {
                Some(t) => Ok(t.lookup(omega_s, omega_w)),
                None => {
                    let mut local = response.clone();
                    local.set_drive_strength(
                        FieldName::Strong,
                        DriveStrength::ComponentMagnitude(omega_s),
                    )?;
                    local.set_drive_strength(
                        FieldName::Weak,
                        DriveStrength::ComponentMagnitude(omega_w),
                    )?;
                    local.averaged_chi(0.0)
                }
            }
        })
        .collect();
    let values = Array3::from_shape_vec((nx, ny, nz), values?)
        .map_err(|e| Error::Dimension(e.to_string()))?;
    Ok(ComplexField3D { dims: grid.dims, extents: grid.extents, values })
}

/// Aggregate statistics of a sampled gain volume.
#[derive(Clone, Copy, Debug)]
pub struct GainStatistics {
    pub min_im: f64,
    pub max_im: f64,
    /// Fraction of voxels with Im χ < 0 (gain).
    pub gain_fraction: f64,
    /// Volume integral of Im χ (m³).
    pub integral_im: f64,
    /// Intensity-like centroid of the gain region (m), when any exists.
    pub gain_centroid: [f64; 3],
}

pub fn gain_statistics(field: &ComplexField3D) -> GainStatistics {
    let mut min_im = f64::INFINITY;
    let mut max_im = f64::NEG_INFINITY;
    let mut gain_count = 0usize;
    let mut integral = 0.0;
    let mut centroid = [0.0f64; 3];
    let mut weight_sum = 0.0;
    let cell: f64 = (0..3)
        .map(|a| (field.extents[a][1] - field.extents[a][0]) / (field.dims[a] as f64 - 1.0))
        .product();
    for ((i, j, k), v) in field.values.indexed_iter() {
        let im = v.im;
        min_im = min_im.min(im);
        max_im = max_im.max(im);
        integral += im * cell;
        if im < 0.0 {
            gain_count += 1;
            let w = -im;
            centroid[0] += w * field.axis_coord(0, i);
            centroid[1] += w * field.axis_coord(1, j);
            centroid[2] += w * field.axis_coord(2, k);
            weight_sum += w;
        }
    }
    if weight_sum > 0.0 {
        for c in &mut centroid {
            *c /= weight_sum;
        }
    }
    GainStatistics {
        min_im,
        max_im,
        gain_fraction: gain_count as f64 / field.values.len() as f64,
        integral_im: integral,
        gain_centroid: centroid,
    }
}
