//! Fourier-optics model of the four-mirror ring resonator: Fresnel
//! propagation, apertured astigmatic mirrors, split-operator transits of the
//! inhomogeneous gain medium, and dominant round-trip eigenmodes.

mod arnoldi;
mod field;
mod hermite;
mod m2;
mod propagate;

pub use arnoldi::{dominant_modes, ritz_values, ArnoldiSettings, ModeResult};
pub use field::ComplexField2D;
pub use hermite::{hermite_gauss_at_plane, hermite_gauss_mode, hermite_polynomial, ring_fixed_point_beam, AxisBeam};
pub use m2::beam_quality_m2;
pub use propagate::{apply_mirror, fresnel_propagate, medium_propagate, FftPlans};

use crate::gain_field::ComplexField3D;
use crate::{Error, Result};
use num_complex::Complex64;

/// A spherical mirror at 45° incidence with a square aperture.
///
/// The tilt splits the focal power: R_x = R cos 45° in the sagittal plane
/// (x), R_y = R / cos 45° in the tangential plane (y).
#[derive(Clone, Copy, Debug)]
pub struct MirrorSpec {
    /// Radius of curvature R (m); `f64::INFINITY` for a flat mirror.
    pub radius_of_curvature: f64,
    /// Side length of the square aperture (m); `f64::INFINITY` for open.
    pub aperture_side: f64,
}

impl MirrorSpec {
    pub fn effective_radius_x(&self) -> f64 {
        self.radius_of_curvature * std::f64::consts::FRAC_1_SQRT_2
    }

    pub fn effective_radius_y(&self) -> f64 {
        self.radius_of_curvature / std::f64::consts::FRAC_1_SQRT_2
    }

    pub fn validate(&self) -> Result<()> {
        if self.radius_of_curvature <= 0.0 || self.aperture_side <= 0.0 {
            return Err(Error::InvalidParameter(
                "mirror needs positive curvature radius and aperture".into(),
            ));
        }
        Ok(())
    }
}

/// Geometry and numerics of the ring resonator.
#[derive(Clone, Debug)]
pub struct CavitySpec {
    /// Arm length L between consecutive mirrors (m).
    pub arm_length: f64,
    pub mirrors: [MirrorSpec; 4],
    /// Gain-medium length L_m (m), centered in the output arm.
    pub medium_length: f64,
    /// Split-operator slice count N.
    pub slices: usize,
    /// Cumulative per-round-trip amplitude loss factor e^(−ν), in (0, 1].
    pub loss_factor: f64,
    /// Transverse grid points per side (power of two).
    pub grid_n: usize,
    /// Physical window side (m), at least twice the aperture.
    pub window: f64,
    pub wavelength_nm: f64,
}

impl CavitySpec {
    pub fn validate(&self) -> Result<()> {
        for m in &self.mirrors {
            m.validate()?;
        }
        if !(self.arm_length > self.medium_length && self.medium_length >= 0.0) {
            return Err(Error::InvalidParameter(format!(
                "need arm length > medium length >= 0, got {} and {}",
                self.arm_length, self.medium_length
            )));
        }
        if !(self.loss_factor > 0.0 && self.loss_factor <= 1.0) {
            return Err(Error::InvalidParameter(format!(
                "loss factor must be in (0, 1], got {}",
                self.loss_factor
            )));
        }
        if !self.grid_n.is_power_of_two() || self.grid_n < 16 {
            return Err(Error::InvalidParameter(format!(
                "grid side must be a power of two >= 16, got {}",
                self.grid_n
            )));
        }
        let min_aperture =
            self.mirrors.iter().map(|m| m.aperture_side).fold(f64::INFINITY, f64::min);
        if min_aperture.is_finite() && self.window < 2.0 * min_aperture {
            return Err(Error::InvalidParameter(format!(
                "window {} is below twice the aperture {}",
                self.window, min_aperture
            )));
        }
        if self.medium_length > 0.0 && self.slices == 0 {
            return Err(Error::InvalidParameter("medium propagation needs slices >= 1".into()));
        }
        Ok(())
    }

    /// The standard test resonator: R = 100 cm, L = 20 cm, 1.38 mm square
    /// aperture, lossless, 256² grid with a window four aperture sides wide.
    pub fn reference(wavelength_nm: f64) -> Self {
        let mirror = MirrorSpec { radius_of_curvature: 1.0, aperture_side: 1.38e-3 };
        CavitySpec {
            arm_length: 0.2,
            mirrors: [mirror; 4],
            medium_length: 0.0,
            slices: 32,
            loss_factor: 1.0,
            grid_n: 256,
            window: 4.0 * mirror.aperture_side,
            wavelength_nm,
        }
    }

    pub fn blank_field(&self) -> ComplexField2D {
        ComplexField2D::zeros(self.grid_n, self.window, self.wavelength_nm)
    }
}

/// One full cavity circulation as a linear operator on transverse fields.
///
/// Empty: R = [M F(L)]⁴. Loaded: R' = e^(−ν) M F(L') K F(L') [M F(L)]³ with
/// L' = (L − L_m)/2 and K the split-operator transit of the medium. Fields
/// live on the plane just after the output mirror.
pub struct RoundTrip {
    cavity: CavitySpec,
    plans: FftPlans,
    medium: Option<MediumScreens>,
}

struct MediumScreens {
    /// Phase-amplitude screens e^(−i V(z_l) δz), one per slice.
    screens: Vec<ndarray::Array2<Complex64>>,
    dz: f64,
}

impl RoundTrip {
    pub fn empty(cavity: &CavitySpec) -> Result<Self> {
        cavity.validate()?;
        Ok(Self { cavity: cavity.clone(), plans: FftPlans::new(cavity.grid_n), medium: None })
    }

    /// Attach a gain medium sampled from a susceptibility volume. The volume
    /// is interpolated onto the cavity grid; a coarser volume is allowed and
    /// logged.
    pub fn loaded(cavity: &CavitySpec, chi: &ComplexField3D) -> Result<Self> {
        cavity.validate()?;
        if cavity.medium_length <= 0.0 {
            return Err(Error::InvalidParameter(
                "loaded round trip needs a positive medium length".into(),
            ));
        }
        let n = cavity.grid_n;
        let dz = cavity.medium_length / cavity.slices as f64;
        let k = crate::constants::wavenumber_from_wavelength_nm(cavity.wavelength_nm);
        let field = cavity.blank_field();
        if chi.dims[0] != n || chi.dims[1] != n {
            log::warn!(
                "resampling susceptibility volume {:?} onto the {}x{} cavity grid",
                chi.dims,
                n,
                n
            );
        }
        let mut screens = Vec::with_capacity(cavity.slices);
        for l in 0..cavity.slices {
            let z = -cavity.medium_length / 2.0 + l as f64 * dz;
            let mut screen = ndarray::Array2::zeros((n, n));
            for i in 0..n {
                let x = field.coord(i);
                for j in 0..n {
                    let y = field.coord(j);
                    let chi_local = chi.sample([x, y, z]);
                    // V = −(k/2) χ, screen = e^(−i V δz) = e^(+i k χ δz / 2)
                    let exponent = Complex64::new(0.0, 0.5 * k * dz) * chi_local;
                    screen[(i, j)] = exponent.exp();
                }
            }
            screens.push(screen);
        }
        Ok(Self {
            cavity: cavity.clone(),
            plans: FftPlans::new(n),
            medium: Some(MediumScreens { screens, dz }),
        })
    }

    pub fn cavity(&self) -> &CavitySpec {
        &self.cavity
    }

    pub fn apply(&self, field: &ComplexField2D) -> ComplexField2D {
        let c = &self.cavity;
        let mut psi = field.clone();
        match &self.medium {
            None => {
                for mirror in &c.mirrors {
                    psi = fresnel_propagate(&psi, c.arm_length, &self.plans);
                    psi = apply_mirror(&psi, mirror);
                }
            }
            Some(med) => {
                // three empty arms
                for mirror in c.mirrors.iter().take(3) {
                    psi = fresnel_propagate(&psi, c.arm_length, &self.plans);
                    psi = apply_mirror(&psi, mirror);
                }
                let half_arm = (c.arm_length - c.medium_length) / 2.0;
                psi = fresnel_propagate(&psi, half_arm, &self.plans);
                psi = medium_propagate(&psi, &med.screens, med.dz, &self.plans);
                psi = fresnel_propagate(&psi, half_arm, &self.plans);
                psi = apply_mirror(&psi, &c.mirrors[3]);
                if c.loss_factor != 1.0 {
                    psi.values.mapv_inplace(|v| v * c.loss_factor);
                }
            }
        }
        psi
    }
}
