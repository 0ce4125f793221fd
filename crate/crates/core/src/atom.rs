//! Atomic level schemes of mercury and Hamiltonian assembly.
//!
//! Two schemes are supported: the reduced four-level chain used to explain
//! the interacting-dark-resonance gain mechanism, and the full 13-level
//! scheme resolving the Zeeman structure of the relevant mercury states.
//! The four-level chain couples through plain |lower⟩⟨upper| operators;
//! the 13-level scheme through spherical components weighted by Wigner 3-j
//! symbols.

use ndarray::{Array1, Array2};
use num_complex::Complex64;
use std::f64::consts::FRAC_1_SQRT_2;

use crate::constants::{self, dipole_atomic_unit, mercury_lines, HBAR};
use crate::wigner::wigner_3j;
use crate::{Error, Result};

/// Zeeman manifold label, ordered as in the level diagram.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Manifold {
    A,
    B,
    C,
    D,
    E,
}

impl Manifold {
    pub const ALL: [Manifold; 5] = [Manifold::A, Manifold::B, Manifold::C, Manifold::D, Manifold::E];

    pub fn label(self) -> char {
        match self {
            Manifold::A => 'a',
            Manifold::B => 'b',
            Manifold::C => 'c',
            Manifold::D => 'd',
            Manifold::E => 'e',
        }
    }
}

/// A single atomic state |n, J, m⟩ within a manifold.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Level {
    pub manifold: Manifold,
    pub principal_n: u32,
    pub j: i32,
    pub m: i32,
}

/// One allowed dipole transition with its measured line data.
#[derive(Clone, Copy, Debug)]
pub struct Transition {
    pub upper: Manifold,
    pub lower: Manifold,
    pub wavelength_nm: f64,
    /// Natural linewidth Γ (rad/s).
    pub gamma: f64,
    /// Line strength S = ⟨upper‖d̂‖lower⟩² in a₀²e².
    pub line_strength: f64,
}

impl Transition {
    /// Reduced dipole matrix element ⟨upper‖d̂‖lower⟩ = +√S in SI units (C m).
    ///
    /// The tabulated S fixes only the magnitude; the positive root is chosen,
    /// which is unobservable in |χ| and populations.
    pub fn reduced_dipole(&self) -> f64 {
        self.line_strength.sqrt() * dipole_atomic_unit()
    }

    /// Transition angular frequency (rad/s).
    pub fn angular_frequency(&self) -> f64 {
        constants::angular_frequency_from_wavelength_nm(self.wavelength_nm)
    }
}

/// External field identity: probe (lasing), strong and weak drives, repump.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum FieldName {
    Probe,
    Strong,
    Weak,
    Repump,
}

impl FieldName {
    pub fn label(self) -> char {
        match self {
            FieldName::Probe => 'p',
            FieldName::Strong => 's',
            FieldName::Weak => 'w',
            FieldName::Repump => 'r',
        }
    }

    /// Manifold pair (upper, lower) the field couples.
    pub fn coupled_manifolds(self) -> (Manifold, Manifold) {
        match self {
            FieldName::Probe => (Manifold::A, Manifold::B),
            FieldName::Strong => (Manifold::C, Manifold::A),
            FieldName::Weak => (Manifold::C, Manifold::D),
            FieldName::Repump => (Manifold::C, Manifold::E),
        }
    }
}

/// How drive couplings attach to a scheme.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum CouplingKind {
    /// Single |lower⟩⟨upper| operator per transition (four-level chain).
    Scalar,
    /// Spherical components q ∈ {0, ±1} with 3-j weights (Zeeman-resolved).
    Spherical,
}

/// Incoherent pump rates (rad/s): `r` acts bidirectionally on the probe
/// transition, `r_cd` on the Δm = 0 sublevels of the c↔d transition.
#[derive(Clone, Copy, Debug, Default)]
pub struct PumpSet {
    pub r: f64,
    pub r_cd: f64,
}

impl PumpSet {
    pub fn validate(&self) -> Result<()> {
        if self.r < 0.0 || self.r_cd < 0.0 {
            return Err(Error::InvalidParameter(format!(
                "pump rates must be nonnegative, got r = {}, r_cd = {}",
                self.r, self.r_cd
            )));
        }
        Ok(())
    }
}

/// Atomic level scheme: ordered levels, allowed transitions, coupling rule.
///
/// Levels are sorted by manifold (a, b, c, d, e) and by ascending m within a
/// manifold, which fixes all matrix index conventions.
#[derive(Clone, Debug)]
pub struct LevelScheme {
    levels: Vec<Level>,
    transitions: Vec<Transition>,
    coupling: CouplingKind,
}

impl LevelScheme {
    /// The reduced four-level chain {a, b, c, d} with scalar couplings.
    pub fn four_level() -> Self {
        let levels = vec![
            Level { manifold: Manifold::A, principal_n: 6, j: 1, m: 0 },
            Level { manifold: Manifold::B, principal_n: 6, j: 0, m: 0 },
            Level { manifold: Manifold::C, principal_n: 7, j: 1, m: 0 },
            Level { manifold: Manifold::D, principal_n: 6, j: 2, m: 0 },
        ];
        let transitions = vec![
            Transition {
                upper: Manifold::A,
                lower: Manifold::B,
                wavelength_nm: mercury_lines::LAMBDA_AB_NM,
                gamma: mercury_lines::gamma_ab(),
                line_strength: mercury_lines::S_AB,
            },
            Transition {
                upper: Manifold::C,
                lower: Manifold::A,
                wavelength_nm: mercury_lines::LAMBDA_CA_NM,
                gamma: mercury_lines::gamma_ca(),
                line_strength: mercury_lines::S_CA,
            },
            Transition {
                upper: Manifold::C,
                lower: Manifold::D,
                wavelength_nm: mercury_lines::LAMBDA_CD_NM,
                gamma: mercury_lines::gamma_cd(),
                line_strength: mercury_lines::S_CD,
            },
        ];
        Self { levels, transitions, coupling: CouplingKind::Scalar }
    }

    /// The full 13-level mercury scheme with Zeeman structure.
    pub fn mercury() -> Self {
        let mut levels = Vec::with_capacity(13);
        for m in -1..=1 {
            levels.push(Level { manifold: Manifold::A, principal_n: 6, j: 1, m });
        }
        levels.push(Level { manifold: Manifold::B, principal_n: 6, j: 0, m: 0 });
        for m in -1..=1 {
            levels.push(Level { manifold: Manifold::C, principal_n: 7, j: 1, m });
        }
        for m in -2..=2 {
            levels.push(Level { manifold: Manifold::D, principal_n: 6, j: 2, m });
        }
        levels.push(Level { manifold: Manifold::E, principal_n: 6, j: 0, m: 0 });

        let mut transitions = LevelScheme::four_level().transitions;
        transitions.push(Transition {
            upper: Manifold::C,
            lower: Manifold::E,
            wavelength_nm: mercury_lines::LAMBDA_CE_NM,
            gamma: mercury_lines::gamma_ce(),
            line_strength: mercury_lines::S_CE,
        });
        Self { levels, transitions, coupling: CouplingKind::Spherical }
    }

    pub fn dimension(&self) -> usize {
        self.levels.len()
    }

    pub fn levels(&self) -> &[Level] {
        &self.levels
    }

    pub fn transitions(&self) -> &[Transition] {
        &self.transitions
    }

    pub fn coupling_kind(&self) -> CouplingKind {
        self.coupling
    }

    pub fn has_manifold(&self, manifold: Manifold) -> bool {
        self.levels.iter().any(|l| l.manifold == manifold)
    }

    /// Indices and levels belonging to one manifold.
    pub fn manifold_levels(&self, manifold: Manifold) -> Vec<(usize, Level)> {
        self.levels
            .iter()
            .enumerate()
            .filter(|(_, l)| l.manifold == manifold)
            .map(|(i, l)| (i, *l))
            .collect()
    }

    /// Total angular momentum J of a manifold.
    pub fn manifold_j(&self, manifold: Manifold) -> Result<i32> {
        self.levels
            .iter()
            .find(|l| l.manifold == manifold)
            .map(|l| l.j)
            .ok_or_else(|| Error::InvalidParameter(format!("no manifold '{}' in scheme", manifold.label())))
    }

    pub fn index_of(&self, manifold: Manifold, m: i32) -> Option<usize> {
        self.levels.iter().position(|l| l.manifold == manifold && l.m == m)
    }

    /// Projector ŝ_jj onto a manifold.
    pub fn projector(&self, manifold: Manifold) -> Array2<Complex64> {
        let d = self.dimension();
        let mut p = Array2::zeros((d, d));
        for (i, _) in self.manifold_levels(manifold) {
            p[(i, i)] = Complex64::ONE;
        }
        p
    }

    pub fn transition(&self, upper: Manifold, lower: Manifold) -> Option<&Transition> {
        self.transitions.iter().find(|t| t.upper == upper && t.lower == lower)
    }

    pub fn transition_for_field(&self, field: FieldName) -> Result<&Transition> {
        let (upper, lower) = field.coupled_manifolds();
        self.transition(upper, lower).ok_or_else(|| {
            Error::InvalidParameter(format!(
                "scheme has no {}↔{} transition for field '{}'",
                upper.label(),
                lower.label(),
                field.label()
            ))
        })
    }

    /// Coupling operators for one transition as (q, lowering matrix) pairs.
    ///
    /// The scalar scheme exposes a single unit operator in the q = 0 slot; the
    /// Zeeman-resolved scheme exposes the three spherical components.
    pub fn coupling_ops(&self, upper: Manifold, lower: Manifold) -> Result<Vec<(i32, Array2<Complex64>)>> {
        match self.coupling {
            CouplingKind::Scalar => {
                let d = self.dimension();
                let iu = self
                    .index_of(upper, 0)
                    .ok_or_else(|| Error::InvalidParameter(format!("no manifold '{}'", upper.label())))?;
                let il = self
                    .index_of(lower, 0)
                    .ok_or_else(|| Error::InvalidParameter(format!("no manifold '{}'", lower.label())))?;
                let mut op = Array2::zeros((d, d));
                op[(il, iu)] = Complex64::ONE;
                Ok(vec![(0, op)])
            }
            CouplingKind::Spherical => (-1..=1)
                .map(|q| Ok((q, lowering_operator(self, upper, lower, q)?)))
                .collect(),
        }
    }
}

/// Spherical lowering operator ŝ⁽q⁾ from the upper to the lower manifold.
///
/// Entries are (−1)^(J_u − m_u) √(2J_u + 1) · 3j(J_u, 1, J_l; −m_u, q, m_l)
/// at |lower⟩⟨upper| positions; everything else vanishes.
pub fn lowering_operator(
    scheme: &LevelScheme,
    upper: Manifold,
    lower: Manifold,
    q: i32,
) -> Result<Array2<Complex64>> {
    let d = scheme.dimension();
    let uppers = scheme.manifold_levels(upper);
    let lowers = scheme.manifold_levels(lower);
    if uppers.is_empty() || lowers.is_empty() {
        return Err(Error::InvalidParameter(format!(
            "unknown manifold pair {}↔{}",
            upper.label(),
            lower.label()
        )));
    }
    let mut op = Array2::zeros((d, d));
    for &(iu, lu) in &uppers {
        for &(il, ll) in &lowers {
            let w = wigner_3j(lu.j, 1, ll.j, -lu.m, q, ll.m);
            if w != 0.0 {
                let sign = if (lu.j - lu.m).rem_euclid(2) == 0 { 1.0 } else { -1.0 };
                let amp = sign * ((2 * lu.j + 1) as f64).sqrt() * w;
                op[(il, iu)] = Complex64::new(amp, 0.0);
            }
        }
    }
    Ok(op)
}

/// Spherical unit vectors ê_q in Cartesian (x, y, z) components.
pub fn spherical_unit(q: i32) -> [Complex64; 3] {
    match q {
        0 => [Complex64::ZERO, Complex64::ZERO, Complex64::ONE],
        1 => [
            Complex64::new(-FRAC_1_SQRT_2, 0.0),
            Complex64::new(0.0, -FRAC_1_SQRT_2),
            Complex64::ZERO,
        ],
        -1 => [
            Complex64::new(FRAC_1_SQRT_2, 0.0),
            Complex64::new(0.0, -FRAC_1_SQRT_2),
            Complex64::ZERO,
        ],
        _ => panic!("spherical index must be 0 or ±1"),
    }
}

/// Projection coefficients c_q = ê_q* · ε of a polarization vector onto the
/// spherical basis, indexed as [q = −1, q = 0, q = +1].
pub fn spherical_coefficients(polarization: &[Complex64; 3]) -> [Complex64; 3] {
    let mut c = [Complex64::ZERO; 3];
    for (qi, q) in (-1..=1).enumerate() {
        let e_q = spherical_unit(q);
        c[qi] = e_q[0].conj() * polarization[0]
            + e_q[1].conj() * polarization[1]
            + e_q[2].conj() * polarization[2];
    }
    c
}

pub fn polarization_x() -> [Complex64; 3] {
    [Complex64::ONE, Complex64::ZERO, Complex64::ZERO]
}

pub fn polarization_y() -> [Complex64; 3] {
    [Complex64::ZERO, Complex64::ONE, Complex64::ZERO]
}

pub fn polarization_z() -> [Complex64; 3] {
    [Complex64::ZERO, Complex64::ZERO, Complex64::ONE]
}

/// How the amplitude of a drive field is specified.
#[derive(Clone, Copy, Debug)]
pub enum DriveStrength {
    /// Reduced Rabi scale Ω̄ (rad/s, may carry a drive phase); spherical
    /// components are c_q Ω̄.
    ReducedRabi(Complex64),
    /// Magnitude of the largest spherical component (rad/s), the form in
    /// which operating points are usually quoted.
    ComponentMagnitude(f64),
    /// Optical power (W) and 1/e² intensity waist radius (m); the Rabi scale
    /// follows from the peak field of the focused Gaussian beam.
    Power { watts: f64, waist: f64 },
}

impl DriveStrength {
    pub fn rabi(value: f64) -> Self {
        DriveStrength::ReducedRabi(Complex64::new(value, 0.0))
    }
}

/// One classical drive field in the rotating frame.
#[derive(Clone, Debug)]
pub struct DriveField {
    pub name: FieldName,
    /// Detuning Δ from the driven transition (rad/s).
    pub detuning: f64,
    /// Unit polarization vector in the quantization frame (z = probe axis).
    pub polarization: [Complex64; 3],
    pub strength: DriveStrength,
    /// Phase-diffusion linewidth b (rad/s); 0 for a noiseless field.
    pub linewidth: f64,
}

impl DriveField {
    pub fn new(name: FieldName, strength: DriveStrength) -> Self {
        let polarization = match name {
            FieldName::Probe => polarization_x(),
            _ => polarization_y(),
        };
        Self { name, detuning: 0.0, polarization, strength, linewidth: 0.0 }
    }

    pub fn with_detuning(mut self, detuning: f64) -> Self {
        self.detuning = detuning;
        self
    }

    pub fn with_linewidth(mut self, linewidth: f64) -> Self {
        if linewidth < 0.0 {
            panic!("phase-diffusion linewidth must be nonnegative");
        }
        self.linewidth = linewidth;
        self
    }

    pub fn with_polarization(mut self, polarization: [Complex64; 3]) -> Self {
        self.polarization = polarization;
        self
    }

    fn polarization_norm(&self) -> f64 {
        self.polarization.iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt()
    }
}

/// Slowly varying field envelope ℰ (V/m) at the focus of a Gaussian beam of
/// the given power and waist. The peak intensity is I₀ = 2P/(πw₀²) and the
/// envelope is half the physical peak field, ℰ = √(I₀ / (2ε₀c)).
pub fn envelope_from_power(watts: f64, waist: f64) -> f64 {
    let intensity = 2.0 * watts / (std::f64::consts::PI * waist * waist);
    (intensity / (2.0 * constants::EPSILON_0 * constants::C)).sqrt()
}

/// Resolve a drive field into spherical Rabi components [Ω⁻¹, Ω⁰, Ω⁺¹]
/// (rad/s) for the transition it couples in `scheme`.
///
/// For the scalar four-level chain the single coupling amplitude is returned
/// in the q = 0 slot.
pub fn rabi_components(scheme: &LevelScheme, field: &DriveField) -> Result<[Complex64; 3]> {
    let transition = scheme.transition_for_field(field.name)?;
    if field.polarization_norm() < 1e-12 {
        return Err(Error::InvalidParameter(format!(
            "zero-norm polarization on field '{}'",
            field.name.label()
        )));
    }
    let scale = reduced_rabi_scale(scheme, field, transition)?;
    match scheme.coupling_kind() {
        CouplingKind::Scalar => Ok([Complex64::ZERO, scale, Complex64::ZERO]),
        CouplingKind::Spherical => {
            let c = spherical_coefficients(&field.polarization);
            Ok([c[0] * scale, c[1] * scale, c[2] * scale])
        }
    }
}

/// The scalar Rabi scale Ω̄ such that Ω^q = c_q Ω̄.
pub fn reduced_rabi_scale(
    scheme: &LevelScheme,
    field: &DriveField,
    transition: &Transition,
) -> Result<Complex64> {
    let j_upper = scheme.manifold_j(transition.upper)?;
    let degeneracy = match scheme.coupling_kind() {
        CouplingKind::Scalar => 1.0,
        CouplingKind::Spherical => (2 * j_upper + 1) as f64,
    };
    match field.strength {
        DriveStrength::ReducedRabi(v) => Ok(v),
        DriveStrength::ComponentMagnitude(v) => {
            let c = spherical_coefficients(&field.polarization);
            let c_max = match scheme.coupling_kind() {
                CouplingKind::Scalar => 1.0,
                CouplingKind::Spherical => c.iter().map(|x| x.norm()).fold(0.0, f64::max),
            };
            if c_max < 1e-12 {
                return Err(Error::InvalidParameter(
                    "polarization has no spherical component".into(),
                ));
            }
            Ok(Complex64::new(v / c_max, 0.0))
        }
        DriveStrength::Power { watts, waist } => {
            if watts < 0.0 || waist <= 0.0 {
                return Err(Error::InvalidParameter("power needs watts >= 0 and waist > 0".into()));
            }
            let envelope = envelope_from_power(watts, waist);
            Ok(Complex64::new(
                transition.reduced_dipole() * envelope / (HBAR * degeneracy.sqrt()),
                0.0,
            ))
        }
    }
}

/// Interaction-picture Hamiltonian in angular-frequency units (ħ factored
/// out): H = Δ_p ŝ_bb − Δ_s ŝ_cc + (Δ_w − Δ_s) ŝ_dd + (Δ_w − Δ_r) ŝ_ee
/// − Σ_q (Ω_p^q ŝ_ab^q + Ω_s^q ŝ_ca^q + Ω_w^q ŝ_cd^q + Ω_r^q ŝ_ce^q) + h.c.
///
/// Fields absent from `drives` enter with zero coupling and zero detuning.
pub fn build_hamiltonian(scheme: &LevelScheme, drives: &[DriveField]) -> Result<Array2<Complex64>> {
    let d = scheme.dimension();
    let mut h: Array2<Complex64> = Array2::zeros((d, d));

    let detuning = |name: FieldName| -> f64 {
        drives.iter().find(|f| f.name == name).map(|f| f.detuning).unwrap_or(0.0)
    };
    let delta_p = detuning(FieldName::Probe);
    let delta_s = detuning(FieldName::Strong);
    let delta_w = detuning(FieldName::Weak);
    let delta_r = detuning(FieldName::Repump);

    let add_diagonal = |h: &mut Array2<Complex64>, manifold: Manifold, value: f64| {
        if scheme.has_manifold(manifold) {
            for (i, _) in scheme.manifold_levels(manifold) {
                h[(i, i)] += Complex64::new(value, 0.0);
            }
        }
    };
    add_diagonal(&mut h, Manifold::B, delta_p);
    add_diagonal(&mut h, Manifold::C, -delta_s);
    add_diagonal(&mut h, Manifold::D, delta_w - delta_s);
    add_diagonal(&mut h, Manifold::E, delta_w - delta_r);

    for field in drives {
        let (upper, lower) = field.name.coupled_manifolds();
        if !scheme.has_manifold(upper) || !scheme.has_manifold(lower) {
            return Err(Error::Dimension(format!(
                "field '{}' drives {}↔{} which is not part of the scheme",
                field.name.label(),
                upper.label(),
                lower.label()
            )));
        }
        let omegas = rabi_components(scheme, field)?;
        for (q, op) in scheme.coupling_ops(upper, lower)? {
            let omega = omegas[(q + 1) as usize];
            if omega == Complex64::ZERO {
                continue;
            }
            for ((i, j), &s_ij) in op.indexed_iter() {
                if s_ij != Complex64::ZERO {
                    let v = -omega * s_ij;
                    h[(i, j)] += v;
                    h[(j, i)] += v.conj();
                }
            }
        }
    }
    Ok(h)
}

/// A dressed state of the driven {a, c, d} subsystem in the four-level basis
/// {a, b, c, d}, with its energy in angular-frequency units.
#[derive(Clone, Debug)]
pub struct DressedState {
    pub amplitudes: Array1<Complex64>,
    pub energy: f64,
}

/// Dressed states of the resonantly driven chain, valid to first order in
/// Ω_w/Ω_s with the probe off: the dark state |0⟩ ∝ |d⟩ − (Ω_w*/Ω_s*)|a⟩ at
/// zero energy and the doublet |±⟩ at ±|Ω_s|.
pub fn dressed_states(omega_s: Complex64, omega_w: Complex64) -> Result<[DressedState; 3]> {
    if omega_s.norm() == 0.0 {
        return Err(Error::InvalidParameter(
            "dressed-state expansion requires a nonzero strong drive".into(),
        ));
    }
    let zero = DressedState {
        amplitudes: Array1::from_vec(vec![
            -(omega_w.conj() / omega_s.conj()),
            Complex64::ZERO,
            Complex64::ZERO,
            Complex64::ONE,
        ]),
        energy: 0.0,
    };
    let inv_sqrt2 = Complex64::new(FRAC_1_SQRT_2, 0.0);
    let phase = omega_s / omega_s.norm();
    let mut doublet = Vec::with_capacity(2);
    for sign in [1.0, -1.0] {
        doublet.push(DressedState {
            amplitudes: Array1::from_vec(vec![
                inv_sqrt2,
                Complex64::ZERO,
                -inv_sqrt2 * sign / phase,
                inv_sqrt2 * omega_w / omega_s,
            ]),
            energy: sign * omega_s.norm(),
        });
    }
    let minus = doublet.pop().unwrap();
    let plus = doublet.pop().unwrap();
    Ok([zero, plus, minus])
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use num_complex::Complex64 as C64;

    #[test]
    fn scheme_shapes() {
        let four = LevelScheme::four_level();
        assert_eq!(four.dimension(), 4);
        let hg = LevelScheme::mercury();
        assert_eq!(hg.dimension(), 13);
        let sizes: Vec<usize> =
            Manifold::ALL.iter().map(|&m| hg.manifold_levels(m).len()).collect();
        assert_eq!(sizes, vec![3, 1, 3, 5, 1]);
        // ordering within a manifold: ascending m
        let d_levels = hg.manifold_levels(Manifold::D);
        let ms: Vec<i32> = d_levels.iter().map(|(_, l)| l.m).collect();
        assert_eq!(ms, vec![-2, -1, 0, 1, 2]);
    }

    #[test]
    fn four_level_probe_lowering_matches_geometry_factor() {
        let scheme = LevelScheme::four_level();
        // generic spherical construction for the J=1 → J=0 probe transition
        let op = lowering_operator(&scheme, Manifold::A, Manifold::B, 0).unwrap();
        let expected = -1.0 * 3.0_f64.sqrt() * wigner_3j(1, 1, 0, 0, 0, 0);
        let ib = scheme.index_of(Manifold::B, 0).unwrap();
        let ia = scheme.index_of(Manifold::A, 0).unwrap();
        let nonzero: Vec<_> = op.indexed_iter().filter(|(_, v)| v.norm() > 0.0).collect();
        assert_eq!(nonzero.len(), 1);
        assert_abs_diff_eq!(op[(ib, ia)].re, expected, epsilon = 1e-14);
        assert_abs_diff_eq!(expected, 1.0, epsilon = 1e-14);
        // the scalar coupling used by the chain is the same unit operator
        let ops = scheme.coupling_ops(Manifold::A, Manifold::B).unwrap();
        assert_eq!(ops.len(), 1);
        assert_abs_diff_eq!((&ops[0].1 - &op).map(|c| c.norm()).sum(), 0.0, epsilon = 1e-14);
    }

    #[test]
    fn lowering_selection_rule() {
        let hg = LevelScheme::mercury();
        for (upper, lower) in [(Manifold::C, Manifold::A), (Manifold::C, Manifold::D), (Manifold::A, Manifold::B)] {
            for q in -1..=1 {
                let op = lowering_operator(&hg, upper, lower, q).unwrap();
                for ((il, iu), v) in op.indexed_iter() {
                    if v.norm() > 0.0 {
                        let lu = hg.levels()[iu];
                        let ll = hg.levels()[il];
                        assert_eq!(lu.m, ll.m + q, "entry violates m_u = m_l + q");
                    }
                }
            }
        }
    }

    #[test]
    fn lowering_sum_rule_is_identity_on_upper_manifold() {
        let hg = LevelScheme::mercury();
        for t in hg.transitions() {
            let d = hg.dimension();
            let mut total: Array2<C64> = Array2::zeros((d, d));
            for q in -1..=1 {
                let s = lowering_operator(&hg, t.upper, t.lower, q).unwrap();
                let sdag = s.t().mapv(|c| c.conj());
                total = total + sdag.dot(&s);
            }
            for (i, level) in hg.levels().iter().enumerate() {
                let want = if level.manifold == t.upper { 1.0 } else { 0.0 };
                assert_abs_diff_eq!(total[(i, i)].re, want, epsilon = 1e-12);
                for (j, _) in hg.levels().iter().enumerate() {
                    if i != j {
                        assert_abs_diff_eq!(total[(i, j)].norm(), 0.0, epsilon = 1e-12);
                    }
                }
            }
        }
    }

    #[test]
    fn rabi_components_polarization_structure() {
        let hg = LevelScheme::mercury();
        let strong = DriveField::new(FieldName::Strong, DriveStrength::rabi(1.0));
        let c = rabi_components(&hg, &strong).unwrap();
        // ε = e_y: no π component, equal σ± magnitudes 1/√2
        assert_abs_diff_eq!(c[1].norm(), 0.0, epsilon = 1e-14);
        assert_abs_diff_eq!(c[0].norm(), FRAC_1_SQRT_2, epsilon = 1e-14);
        assert_abs_diff_eq!(c[2].norm(), FRAC_1_SQRT_2, epsilon = 1e-14);

        let axial = strong.clone().with_polarization(polarization_z());
        let c = rabi_components(&hg, &axial).unwrap();
        assert_abs_diff_eq!(c[0].norm(), 0.0, epsilon = 1e-14);
        assert_abs_diff_eq!(c[2].norm(), 0.0, epsilon = 1e-14);
        assert_abs_diff_eq!(c[1].norm(), 1.0, epsilon = 1e-14);
    }

    #[test]
    fn rabi_from_power_matches_operating_point() {
        let hg = LevelScheme::mercury();
        // 200 mW in a 2 mm waist on the strong line: σ± components at 2π×33.5 MHz
        let strong = DriveField::new(
            FieldName::Strong,
            DriveStrength::Power { watts: 0.2, waist: 2e-3 },
        );
        let c = rabi_components(&hg, &strong).unwrap();
        let target = constants::hz_to_angular(33.5e6);
        assert!((c[0].norm() - target).abs() / target < 0.01);
        assert!((c[2].norm() - target).abs() / target < 0.01);

        // 1.4 mW on the weak line: 2π×3.7 MHz
        let weak = DriveField::new(
            FieldName::Weak,
            DriveStrength::Power { watts: 1.4e-3, waist: 2e-3 },
        );
        let c = rabi_components(&hg, &weak).unwrap();
        let target = constants::hz_to_angular(3.7e6);
        assert!((c[0].norm() - target).abs() / target < 0.01);

        let dark = DriveField::new(
            FieldName::Strong,
            DriveStrength::Power { watts: 0.0, waist: 2e-3 },
        );
        let c = rabi_components(&hg, &dark).unwrap();
        assert!(c.iter().all(|x| x.norm() == 0.0));
    }

    fn four_level_reference(
        op: C64,
        os: C64,
        ow: C64,
        dp: f64,
        ds: f64,
        dw: f64,
    ) -> Array2<C64> {
        // explicit rotating-frame matrix of the chain in the basis {a, b, c, d}
        let z = C64::ZERO;
        let mut h = Array2::from_shape_vec(
            (4, 4),
            vec![
                z, op.conj(), os, z,
                op, C64::new(-dp, 0.0), z, z,
                os.conj(), z, C64::new(ds, 0.0), ow.conj(),
                z, z, ow, C64::new(ds - dw, 0.0),
            ],
        )
        .unwrap();
        h.mapv_inplace(|v| -v);
        h
    }

    #[test]
    fn four_level_hamiltonian_matches_reference_matrix() {
        let scheme = LevelScheme::four_level();
        let (op, os, ow) = (C64::new(0.3, 0.1), C64::new(2.0, -0.4), C64::new(0.5, 0.2));
        let (dp, ds, dw) = (0.7, -1.3, 0.4);
        let drives = vec![
            DriveField::new(FieldName::Probe, DriveStrength::ReducedRabi(op)).with_detuning(dp),
            DriveField::new(FieldName::Strong, DriveStrength::ReducedRabi(os)).with_detuning(ds),
            DriveField::new(FieldName::Weak, DriveStrength::ReducedRabi(ow)).with_detuning(dw),
        ];
        let h = build_hamiltonian(&scheme, &drives).unwrap();
        let want = four_level_reference(op, os, ow, dp, ds, dw);
        for ((i, j), v) in h.indexed_iter() {
            assert_abs_diff_eq!(v.re, want[(i, j)].re, epsilon = 1e-12);
            assert_abs_diff_eq!(v.im, want[(i, j)].im, epsilon = 1e-12);
        }
    }

    #[test]
    fn hamiltonian_zero_input_is_zero() {
        let scheme = LevelScheme::mercury();
        let drives = vec![
            DriveField::new(FieldName::Strong, DriveStrength::rabi(0.0)),
            DriveField::new(FieldName::Weak, DriveStrength::rabi(0.0)),
        ];
        let h = build_hamiltonian(&scheme, &drives).unwrap();
        assert_abs_diff_eq!(h.map(|c| c.norm()).sum(), 0.0, epsilon = 0.0);
    }

    #[test]
    fn hamiltonian_is_hermitian_for_random_drives() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(7);
        let hg = LevelScheme::mercury();
        for _ in 0..32 {
            let drives: Vec<DriveField> = [FieldName::Probe, FieldName::Strong, FieldName::Weak, FieldName::Repump]
                .iter()
                .map(|&name| {
                    DriveField::new(name, DriveStrength::rabi(rng.gen_range(0.0..1e8)))
                        .with_detuning(rng.gen_range(-1e8..1e8))
                })
                .collect();
            let h = build_hamiltonian(&hg, &drives).unwrap();
            let hmax = h.map(|c| c.norm()).fold(0.0, |a: f64, &b| a.max(b));
            for ((i, j), v) in h.indexed_iter() {
                assert!((v - h[(j, i)].conj()).norm() <= 1e-12 * hmax);
            }
        }
    }

    #[test]
    fn probe_polarization_has_no_axial_component() {
        // ε_p = e_x carries no q = 0 weight, so the π probe coupling vanishes
        let hg = LevelScheme::mercury();
        let probe = DriveField::new(FieldName::Probe, DriveStrength::rabi(1.0));
        let c = rabi_components(&hg, &probe).unwrap();
        assert_abs_diff_eq!(c[1].norm(), 0.0, epsilon = 1e-14);
    }

    #[test]
    fn dressed_states_reduce_to_autler_townes_doublet() {
        let os = C64::new(2.0e6, 0.0);
        let [zero, plus, minus] = dressed_states(os, C64::ZERO).unwrap();
        assert_abs_diff_eq!(zero.energy, 0.0, epsilon = 0.0);
        assert_abs_diff_eq!(plus.energy, 2.0e6, epsilon = 1e-9);
        assert_abs_diff_eq!(minus.energy, -2.0e6, epsilon = 1e-9);
        // |0⟩ = |d⟩ exactly for Ω_w = 0
        assert_abs_diff_eq!(zero.amplitudes[0].norm(), 0.0, epsilon = 0.0);
        assert_abs_diff_eq!(zero.amplitudes[3].norm(), 1.0, epsilon = 0.0);
        // |±⟩ = (|a⟩ ∓ |c⟩)/√2
        assert_abs_diff_eq!(plus.amplitudes[0].norm(), FRAC_1_SQRT_2, epsilon = 1e-12);
        assert_abs_diff_eq!(plus.amplitudes[2].re, -FRAC_1_SQRT_2, epsilon = 1e-12);
        assert_abs_diff_eq!(minus.amplitudes[2].re, FRAC_1_SQRT_2, epsilon = 1e-12);
    }

    #[test]
    fn dressed_energies_ignore_weak_drive_phase() {
        for phase in [0.0, 0.4, 2.2, -1.0] {
            let ow = C64::from_polar(0.2e6, phase);
            let states = dressed_states(C64::new(3.0e6, 0.0), ow).unwrap();
            let energies: Vec<f64> = states.iter().map(|s| s.energy).collect();
            assert_abs_diff_eq!(energies[0], 0.0, epsilon = 0.0);
            assert_abs_diff_eq!(energies[1], 3.0e6, epsilon = 1e-9);
            assert_abs_diff_eq!(energies[2], -3.0e6, epsilon = 1e-9);
        }
    }

    #[test]
    fn dressed_states_match_numerical_diagonalization() {
        // resonant chain, probe off, weak drive small: eigenpairs of the
        // driven {a, c, d} block agree with the first-order expansion (the
        // decoupled |b⟩ would otherwise mix into the zero-energy subspace)
        let os = C64::new(1.0e6, 0.0);
        let ow = C64::new(1.0e3, 0.0);
        let scheme = LevelScheme::four_level();
        let drives = vec![
            DriveField::new(FieldName::Strong, DriveStrength::rabi(os.re)),
            DriveField::new(FieldName::Weak, DriveStrength::rabi(ow.re)),
        ];
        let h = build_hamiltonian(&scheme, &drives).unwrap();
        // indices {a, c, d} = {0, 2, 3}
        let sub = [0usize, 2, 3];
        let block = Array2::from_shape_fn((3, 3), |(i, j)| h[(sub[i], sub[j])]);
        let (vals, vecs) = crate::linalg::eigh(&block).unwrap();
        let analytic = dressed_states(os, ow).unwrap();
        let rel = ow.norm() / os.norm();
        for state in &analytic {
            let (k, _) = vals
                .iter()
                .enumerate()
                .min_by(|(_, a), (_, b)| {
                    (*a - state.energy).abs().total_cmp(&(*b - state.energy).abs())
                })
                .unwrap();
            assert!(
                (vals[k] - state.energy).abs() <= 3.0 * rel * os.norm(),
                "energy mismatch beyond first order"
            );
            let analytic_norm = state.amplitudes.map(|c| c.norm_sqr()).sum().sqrt();
            let overlap: C64 = (0..3)
                .map(|i| vecs[(i, k)].conj() * state.amplitudes[sub[i]] / analytic_norm)
                .sum();
            assert!(overlap.norm() > 1.0 - 5.0 * rel, "overlap {} too small", overlap.norm());
        }
    }
}
