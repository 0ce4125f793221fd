//! Master-equation generators, stationary states, and probe susceptibility.
//!
//! Superoperators act on the column-major vectorization of the density
//! matrix, vec(ρ)[i + d·j] = ρ_ij, and are stored dense; the schemes here
//! are small enough (d ≤ 13) that sparsity buys nothing.

use ndarray::{Array1, Array2};
use num_complex::Complex64;

use crate::atom::{FieldName, LevelScheme, Manifold, PumpSet};
use crate::constants::{dipole_atomic_unit, EPSILON_0, HBAR};
use crate::linalg;
use crate::{Error, Result};

/// Dense generator of density-matrix dynamics.
#[derive(Clone, Debug)]
pub struct Superoperator {
    dim: usize,
    matrix: Array2<Complex64>,
}

#[inline]
fn vec_index(d: usize, i: usize, j: usize) -> usize {
    i + d * j
}

impl Superoperator {
    pub fn zeros(dim: usize) -> Self {
        Self { dim, matrix: Array2::zeros((dim * dim, dim * dim)) }
    }

    pub fn from_matrix(dim: usize, matrix: Array2<Complex64>) -> Result<Self> {
        if matrix.dim() != (dim * dim, dim * dim) {
            return Err(Error::Dimension(format!(
                "superoperator for {dim} levels needs a {0}x{0} matrix, got {1}x{2}",
                dim * dim,
                matrix.nrows(),
                matrix.ncols()
            )));
        }
        Ok(Self { dim, matrix })
    }

    /// Number of atomic levels d (the matrix itself is d²×d²).
    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn matrix(&self) -> &Array2<Complex64> {
        &self.matrix
    }

    /// Column-major vectorization of a density matrix.
    pub fn vectorize(rho: &Array2<Complex64>) -> Array1<Complex64> {
        let d = rho.nrows();
        Array1::from_shape_fn(d * d, |v| rho[(v % d, v / d)])
    }

    pub fn unvectorize(d: usize, v: &Array1<Complex64>) -> Array2<Complex64> {
        Array2::from_shape_fn((d, d), |(i, j)| v[vec_index(d, i, j)])
    }

    /// Accumulate coeff · A ρ B.
    pub fn add_sandwich(&mut self, coeff: Complex64, a: &Array2<Complex64>, b: &Array2<Complex64>) {
        let d = self.dim;
        let a_nz: Vec<(usize, usize, Complex64)> = a
            .indexed_iter()
            .filter(|(_, v)| **v != Complex64::ZERO)
            .map(|((i, m), v)| (i, m, *v))
            .collect();
        let b_nz: Vec<(usize, usize, Complex64)> = b
            .indexed_iter()
            .filter(|(_, v)| **v != Complex64::ZERO)
            .map(|((l, j), v)| (l, j, *v))
            .collect();
        for &(i, m, av) in &a_nz {
            for &(l, j, bv) in &b_nz {
                self.matrix[(vec_index(d, i, j), vec_index(d, m, l))] += coeff * av * bv;
            }
        }
    }

    /// Accumulate coeff · A ρ.
    pub fn add_left(&mut self, coeff: Complex64, a: &Array2<Complex64>) {
        let d = self.dim;
        for ((i, m), &av) in a.indexed_iter() {
            if av == Complex64::ZERO {
                continue;
            }
            for j in 0..d {
                self.matrix[(vec_index(d, i, j), vec_index(d, m, j))] += coeff * av;
            }
        }
    }

    /// Accumulate coeff · ρ B.
    pub fn add_right(&mut self, coeff: Complex64, b: &Array2<Complex64>) {
        let d = self.dim;
        for ((l, j), &bv) in b.indexed_iter() {
            if bv == Complex64::ZERO {
                continue;
            }
            for i in 0..d {
                self.matrix[(vec_index(d, i, j), vec_index(d, i, l))] += coeff * bv;
            }
        }
    }

    pub fn add_scaled(&mut self, coeff: Complex64, other: &Superoperator) {
        assert_eq!(self.dim, other.dim, "superoperator dimension mismatch");
        self.matrix.zip_mut_with(&other.matrix, |a, &b| *a += coeff * b);
    }

    /// Apply the generator to a density matrix.
    pub fn apply(&self, rho: &Array2<Complex64>) -> Array2<Complex64> {
        let v = Self::vectorize(rho);
        let out = self.matrix.dot(&v);
        Self::unvectorize(self.dim, &out)
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.matrix.iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt()
    }

    /// Norm of the trace functional composed with the generator; vanishes for
    /// trace-preserving dynamics.
    pub fn trace_functional_norm(&self) -> f64 {
        let d = self.dim;
        let mut norm_sq = 0.0;
        for w in 0..d * d {
            let mut acc = Complex64::ZERO;
            for i in 0..d {
                acc += self.matrix[(vec_index(d, i, i), w)];
            }
            norm_sq += acc.norm_sqr();
        }
        norm_sq.sqrt()
    }

    /// Real matrix of the generator restricted to Hermitian densities, in the
    /// orthonormal basis {E_ii} ∪ {(E_ij + E_ji)/√2, i(E_ij − E_ji)/√2}.
    ///
    /// Frobenius norms and residuals agree with the complex representation
    /// because the basis stays orthonormal.
    pub fn hermitian_basis_matrix(&self) -> Array2<f64> {
        let d = self.dim;
        let n = d * d;
        let mut buf = Vec::new();
        self.fill_hermitian_augmented(&mut buf);
        let rows = n + 1;
        Array2::from_shape_fn((n, n), |(alpha, beta)| buf[alpha + rows * beta])
    }

    /// Fill `buf` with the column-major (n+1)×n augmented system
    /// [hermitian-basis matrix; trace row] of the stationary solver; returns
    /// the Frobenius norm of the generator block.
    fn fill_hermitian_augmented(&self, buf: &mut Vec<f64>) -> f64 {
        let d = self.dim;
        let n = d * d;
        let rows = n + 1;
        buf.clear();
        buf.resize(rows * n, 0.0);
        let elems = basis_elements(d);
        let m = self.matrix.as_slice().expect("superoperator storage is contiguous");
        let mut frob_sq = 0.0;
        for (alpha, ea) in elems.iter().enumerate() {
            for (beta, eb) in elems.iter().enumerate() {
                let mut acc = Complex64::ZERO;
                for k in 0..ea.len {
                    let row = &m[ea.idx[k] * n..(ea.idx[k] + 1) * n];
                    let mut s = Complex64::ZERO;
                    for l in 0..eb.len {
                        s += eb.coeff[l] * row[eb.idx[l]];
                    }
                    acc += ea.coeff[k].conj() * s;
                }
                let v = acc.re;
                frob_sq += v * v;
                buf[alpha + rows * beta] = v;
            }
        }
        for i in 0..d {
            buf[n + rows * i] = 1.0;
        }
        frob_sq.sqrt()
    }
}

/// One orthonormal Hermitian basis element, as up to two weighted
/// vec-components.
#[derive(Clone, Copy)]
struct BasisElem {
    idx: [usize; 2],
    coeff: [Complex64; 2],
    len: usize,
}

fn basis_elements(d: usize) -> Vec<BasisElem> {
    let inv_sqrt2 = std::f64::consts::FRAC_1_SQRT_2;
    let mut elems = Vec::with_capacity(d * d);
    for i in 0..d {
        elems.push(BasisElem {
            idx: [vec_index(d, i, i), 0],
            coeff: [Complex64::ONE, Complex64::ZERO],
            len: 1,
        });
    }
    for i in 0..d {
        for j in i + 1..d {
            elems.push(BasisElem {
                idx: [vec_index(d, i, j), vec_index(d, j, i)],
                coeff: [Complex64::new(inv_sqrt2, 0.0), Complex64::new(inv_sqrt2, 0.0)],
                len: 2,
            });
            elems.push(BasisElem {
                idx: [vec_index(d, i, j), vec_index(d, j, i)],
                coeff: [Complex64::new(0.0, inv_sqrt2), Complex64::new(0.0, -inv_sqrt2)],
                len: 2,
            });
        }
    }
    elems
}

fn hermitian_coordinates_to_rho(d: usize, x: &[f64]) -> Array2<Complex64> {
    let inv_sqrt2 = std::f64::consts::FRAC_1_SQRT_2;
    let mut rho = Array2::zeros((d, d));
    for i in 0..d {
        rho[(i, i)] = Complex64::new(x[i], 0.0);
    }
    let mut k = d;
    for i in 0..d {
        for j in i + 1..d {
            let re = x[k] * inv_sqrt2;
            let im = x[k + 1] * inv_sqrt2;
            k += 2;
            rho[(i, j)] = Complex64::new(re, im);
            rho[(j, i)] = Complex64::new(re, -im);
        }
    }
    rho
}

/// Coherent part −i[H, ρ] for a Hamiltonian in angular-frequency units.
pub fn coherent_liouvillian(h: &Array2<Complex64>) -> Result<Superoperator> {
    let (rows, cols) = h.dim();
    if rows != cols {
        return Err(Error::Dimension(format!("Hamiltonian must be square, got {rows}x{cols}")));
    }
    let mut l = Superoperator::zeros(rows);
    add_coherent(&mut l, h);
    Ok(l)
}

/// Accumulate −i[H, ρ] onto an existing generator (hot path of the sweeps).
pub fn add_coherent(l: &mut Superoperator, h: &Array2<Complex64>) {
    let minus_i = Complex64::new(0.0, -1.0);
    l.add_left(minus_i, h);
    l.add_right(-minus_i, h);
}

/// One radiative decay (or thermal/pump) channel in Lindblad form.
#[derive(Clone, Debug)]
pub struct DecayChannel {
    pub lowering: Array2<Complex64>,
    /// Decay rate Γ (rad/s).
    pub rate: f64,
    /// Mean photon number n of the reservoir; n > 0 adds the reverse process.
    pub photon_number: f64,
}

/// Σ_k Γ_k (n_k+1)/2 (2ŝρŝ† − {ŝ†ŝ, ρ}) + Γ_k n_k/2 (2ŝ†ρŝ − {ŝŝ†, ρ}).
pub fn dissipator(channels: &[DecayChannel]) -> Result<Superoperator> {
    let dim = channels
        .first()
        .map(|c| c.lowering.nrows())
        .ok_or_else(|| Error::InvalidParameter("dissipator needs at least one channel".into()))?;
    let mut l = Superoperator::zeros(dim);
    for ch in channels {
        if ch.rate <= 0.0 || ch.photon_number < 0.0 {
            return Err(Error::InvalidParameter(format!(
                "decay channel needs rate > 0 and photon number >= 0, got {} and {}",
                ch.rate, ch.photon_number
            )));
        }
        if ch.lowering.nrows() != dim || ch.lowering.ncols() != dim {
            return Err(Error::Dimension("decay channel dimension mismatch".into()));
        }
        let s = &ch.lowering;
        let sdag = s.t().mapv(|c| c.conj());
        let sdag_s = sdag.dot(s);
        let s_sdag = s.dot(&sdag);
        let down = Complex64::new(ch.rate * (ch.photon_number + 1.0) / 2.0, 0.0);
        let up = Complex64::new(ch.rate * ch.photon_number / 2.0, 0.0);

        l.add_sandwich(2.0 * down, s, &sdag);
        l.add_left(-down, &sdag_s);
        l.add_right(-down, &sdag_s);
        if ch.photon_number > 0.0 {
            l.add_sandwich(2.0 * up, &sdag, s);
            l.add_left(-up, &s_sdag);
            l.add_right(-up, &s_sdag);
        }
    }
    Ok(l)
}

/// The standard channel set of a scheme: every spherical component of every
/// radiative transition decays at the tabulated Γ.
///
/// The probe transition carries the bidirectional pump as a photon number on
/// its channels, normalized so that the total upward rate out of the probe
/// ground state equals r (n = r/Γ_ab for the single-channel chain,
/// n = r/(3Γ_ab) per polarization on the Zeeman-resolved scheme). The Δm = 0
/// component of c↔d carries n = r_cd/Γ_cd, whose summed sublevel weights
/// already make r_cd the total upward rate out of the d manifold.
pub fn decay_channels(scheme: &LevelScheme, pumps: &PumpSet) -> Result<Vec<DecayChannel>> {
    pumps.validate()?;
    // Σ_q ⟨b|ŝ^q ŝ^q†|b⟩: how many unit-weight pump channels deplete b
    let mut probe_weight = 0.0;
    for (_, op) in scheme.coupling_ops(Manifold::A, Manifold::B)? {
        probe_weight += op.iter().map(|c| c.norm_sqr()).sum::<f64>();
    }
    let mut channels = Vec::new();
    for t in scheme.transitions() {
        for (q, op) in scheme.coupling_ops(t.upper, t.lower)? {
            if op.iter().all(|c| *c == Complex64::ZERO) {
                continue;
            }
            let is_probe = t.upper == Manifold::A && t.lower == Manifold::B;
            let is_cd_pi = t.upper == Manifold::C && t.lower == Manifold::D && q == 0;
            let photon_number = if is_probe {
                pumps.r / (probe_weight * t.gamma)
            } else if is_cd_pi {
                pumps.r_cd / t.gamma
            } else {
                0.0
            };
            channels.push(DecayChannel { lowering: op, rate: t.gamma, photon_number });
        }
    }
    Ok(channels)
}

/// Sign table describing which manifolds pick up each laser phase under the
/// gauge transformation that removes the stochastic phases; rows are the
/// noisy fields (s, w, r), columns the manifolds (a, b, c, d, e).
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct XiMatrix(pub [[i8; 5]; 3]);

impl XiMatrix {
    /// The table for the mercury coupling chain.
    pub fn standard() -> Self {
        XiMatrix([
            [-1, -1, 1, 1, 1], // s
            [1, 1, 1, -1, 1],  // w
            [1, 1, 1, 1, -1],  // r
        ])
    }

    pub fn validate(&self) -> Result<()> {
        for row in &self.0 {
            for &v in row {
                if v != 1 && v != -1 {
                    return Err(Error::InvalidParameter(format!(
                        "sign table entries must be ±1, got {v}"
                    )));
                }
            }
        }
        Ok(())
    }

    fn row(&self, field: FieldName) -> Option<[i8; 5]> {
        match field {
            FieldName::Strong => Some(self.0[0]),
            FieldName::Weak => Some(self.0[1]),
            FieldName::Repump => Some(self.0[2]),
            FieldName::Probe => None,
        }
    }
}

/// Phase-diffusion generator from per-level sign assignments: for each noisy
/// field k with linewidth b_k, (b_k/2)(Ξ_k ρ Ξ_k − ρ) with the diagonal sign
/// operator Ξ_k = diag(signs_k).
///
/// Populations are untouched; the coherence between levels u and v damps at
/// Σ_k b_k (1 − ξ_ku ξ_kv)/2.
pub fn phase_diffusion_from_signs(
    fields: &[(f64, Vec<i8>)],
    dim: usize,
) -> Result<Superoperator> {
    let mut l = Superoperator::zeros(dim);
    for (b, signs) in fields {
        if *b < 0.0 {
            return Err(Error::InvalidParameter(format!("linewidth must be >= 0, got {b}")));
        }
        if signs.len() != dim {
            return Err(Error::Dimension(format!(
                "sign vector length {} does not match {dim} levels",
                signs.len()
            )));
        }
        if signs.iter().any(|s| *s != 1 && *s != -1) {
            return Err(Error::InvalidParameter("sign entries must be ±1".into()));
        }
        if *b == 0.0 {
            continue;
        }
        let sign_op = Array2::from_diag(&ndarray::Array1::from_iter(
            signs.iter().map(|&s| Complex64::new(s as f64, 0.0)),
        ));
        let half_b = Complex64::new(b / 2.0, 0.0);
        l.add_sandwich(half_b, &sign_op, &sign_op);
        let identity = Array2::eye(dim);
        l.add_left(-half_b / 2.0, &identity);
        l.add_right(-half_b / 2.0, &identity);
    }
    Ok(l)
}

/// Phase-diffusion generator of a level scheme, with the manifold sign table
/// expanded onto the individual levels.
pub fn phase_diffusion_liouvillian(
    b_s: f64,
    b_w: f64,
    b_r: f64,
    xi: &XiMatrix,
    scheme: &LevelScheme,
) -> Result<Superoperator> {
    xi.validate()?;
    let d = scheme.dimension();
    let mut fields = Vec::new();
    for (field, b) in [
        (FieldName::Strong, b_s),
        (FieldName::Weak, b_w),
        (FieldName::Repump, b_r),
    ] {
        let row = xi.row(field).expect("probe carries no diffusion phase");
        let mut signs = vec![1i8; d];
        for (mi, manifold) in Manifold::ALL.iter().enumerate() {
            for (idx, _) in scheme.manifold_levels(*manifold) {
                signs[idx] = row[mi];
            }
        }
        fields.push((b, signs));
    }
    phase_diffusion_from_signs(&fields, d)
}

/// Optional user-set extra damping of the coherences between two manifolds,
/// e.g. to represent collisional dephasing. Populations are untouched.
pub fn extra_dephasing(
    scheme: &LevelScheme,
    pairs: &[(Manifold, Manifold, f64)],
) -> Result<Superoperator> {
    let d = scheme.dimension();
    let mut l = Superoperator::zeros(d);
    for &(ma, mb, rate) in pairs {
        if rate < 0.0 {
            return Err(Error::InvalidParameter("dephasing rates must be >= 0".into()));
        }
        if ma == mb {
            return Err(Error::InvalidParameter(
                "dephasing acts between two distinct manifolds".into(),
            ));
        }
        for (i, _) in scheme.manifold_levels(ma) {
            for (j, _) in scheme.manifold_levels(mb) {
                let c = Complex64::new(-rate, 0.0);
                l.matrix[(vec_index(d, i, j), vec_index(d, i, j))] += c;
                l.matrix[(vec_index(d, j, i), vec_index(d, j, i))] += c;
            }
        }
    }
    Ok(l)
}

/// Options for [`steady_state_with`].
#[derive(Clone, Copy, Debug)]
pub struct SteadyStateOptions {
    /// Estimate the null-space dimension from the singular spectrum.
    pub degeneracy_check: bool,
    /// Compute the smallest eigenvalue of the returned density matrix.
    pub positivity_check: bool,
}

impl Default for SteadyStateOptions {
    fn default() -> Self {
        Self { degeneracy_check: true, positivity_check: true }
    }
}

/// A stationary density matrix with its solver diagnostics.
#[derive(Clone, Debug)]
pub struct StationaryState {
    pub rho: Array2<Complex64>,
    /// ‖L vec(ρ)‖₂.
    pub residual: f64,
    /// residual / ‖L‖_F.
    pub relative_residual: f64,
    /// Whether the numerical null space of L has dimension > 1 (only when the
    /// degeneracy check ran).
    pub degenerate: Option<bool>,
    /// Smallest eigenvalue of ρ (only when the positivity check ran).
    pub min_eigenvalue: Option<f64>,
}

/// Relative singular-value threshold below which a direction counts as null.
const NULL_SPACE_THRESHOLD: f64 = 1e-8;
/// Residual contract of the steady-state solver.
const RESIDUAL_TOLERANCE: f64 = 1e-9;

/// Stationary state of a trace-preserving generator with full diagnostics.
pub fn steady_state(l: &Superoperator) -> Result<StationaryState> {
    steady_state_with(l, &SteadyStateOptions::default())
}

/// Stationary state as the least-squares solution of L vec(ρ) = 0 augmented
/// with the trace-normalization row.
///
/// The solve runs in the real Hermitian-basis representation, which requires
/// (and verifies) that the generator preserves Hermiticity. The fast QR path
/// falls back to a rank-revealing minimum-norm solve when the generator is
/// numerically rank-deficient beyond the expected single null direction.
pub fn steady_state_with(l: &Superoperator, opts: &SteadyStateOptions) -> Result<StationaryState> {
    let d = l.dim();
    let n = d * d;
    let rows = n + 1;

    if opts.degeneracy_check {
        // the fast sweep path skips this; pipelines validate their generator
        // once at the reference point
        verify_hermiticity_preservation(l)?;
    }

    let (x, residual, l_norm) = SOLVER_WORKSPACE.with(|cell| {
        let ws = &mut *cell.borrow_mut();
        let l_norm = l.fill_hermitian_augmented(&mut ws.system);
        ws.scratch.clear();
        ws.scratch.extend_from_slice(&ws.system);
        ws.rhs.clear();
        ws.rhs.resize(rows, 0.0);
        ws.rhs[n] = 1.0;
        let solved = linalg::least_squares_colmajor_inplace(
            rows,
            n,
            &mut ws.scratch,
            &mut ws.rhs,
            &mut ws.work,
        );
        let good = solved.is_ok() && ws.rhs[..n].iter().all(|v| v.is_finite());
        let (x, residual) = if good {
            let x = ws.rhs[..n].to_vec();
            let residual = colmajor_residual(&ws.system, rows, n, &x);
            (Some(x), residual)
        } else {
            (None, f64::INFINITY)
        };
        if residual <= RESIDUAL_TOLERANCE * l_norm {
            return Ok::<_, Error>((x.unwrap(), residual, l_norm));
        }
        // rank-deficient or ill-conditioned: rank-revealing minimum-norm solve
        let a = Array2::from_shape_fn((rows, n), |(i, j)| ws.system[i + rows * j]);
        let mut b = vec![0.0; rows];
        b[n] = 1.0;
        let (x_min, _, _) = linalg::min_norm_least_squares(&a, &b, 1e-12)?;
        let res_min = colmajor_residual(&ws.system, rows, n, &x_min);
        if x.is_none() || res_min < residual {
            Ok((x_min, res_min, l_norm))
        } else {
            Ok((x.unwrap(), residual, l_norm))
        }
    })?;

    let mut rho = hermitian_coordinates_to_rho(d, &x);
    let trace: f64 = (0..d).map(|i| rho[(i, i)].re).sum();
    if !trace.is_finite() || trace.abs() < 1e-6 {
        return Err(Error::NonConvergence(format!(
            "stationary solve returned unnormalizable trace {trace}"
        )));
    }
    rho.mapv_inplace(|c| c / trace);
    let residual = residual / trace.abs();

    if residual > RESIDUAL_TOLERANCE * l_norm {
        return Err(Error::NonConvergence(format!(
            "stationary residual {:.3e} exceeds {:.3e}",
            residual,
            RESIDUAL_TOLERANCE * l_norm
        )));
    }

    let degenerate = if opts.degeneracy_check {
        let r = l.hermitian_basis_matrix();
        let s = linalg::singular_values(&r)?;
        let smax = s[0].max(f64::MIN_POSITIVE);
        Some(s.iter().filter(|&&v| v < NULL_SPACE_THRESHOLD * smax).count() > 1)
    } else {
        None
    };
    let min_eigenvalue = if opts.positivity_check {
        Some(linalg::min_eigenvalue_hermitian(&rho)?)
    } else {
        None
    };

    Ok(StationaryState {
        rho,
        residual,
        relative_residual: residual / l_norm.max(f64::MIN_POSITIVE),
        degenerate,
        min_eigenvalue,
    })
}

#[derive(Default)]
struct SolverWorkspace {
    system: Vec<f64>,
    scratch: Vec<f64>,
    rhs: Vec<f64>,
    work: Vec<f64>,
}

thread_local! {
    static SOLVER_WORKSPACE: std::cell::RefCell<SolverWorkspace> =
        std::cell::RefCell::new(SolverWorkspace::default());
}

/// ‖R x‖ for the generator block of the column-major augmented system.
fn colmajor_residual(system: &[f64], rows: usize, n: usize, x: &[f64]) -> f64 {
    let mut out = vec![0.0; n];
    for (j, &xj) in x.iter().enumerate() {
        if xj == 0.0 {
            continue;
        }
        let col = &system[rows * j..rows * j + n];
        for (o, &c) in out.iter_mut().zip(col) {
            *o += c * xj;
        }
    }
    out.iter().map(|v| v * v).sum::<f64>().sqrt()
}

/// Spot-check that the generator maps a Hermitian test matrix to a Hermitian
/// matrix; the Hermitian-basis solve silently projects otherwise.
fn verify_hermiticity_preservation(l: &Superoperator) -> Result<()> {
    let d = l.dim();
    let probe = Array2::from_shape_fn((d, d), |(i, j)| {
        let phase = (1 + i * d + j) as f64;
        if i == j {
            Complex64::new(1.0 + (i as f64) / d as f64, 0.0)
        } else if i < j {
            Complex64::new(phase.sin(), phase.cos())
        } else {
            let p = (1 + j * d + i) as f64;
            Complex64::new(p.sin(), -p.cos())
        }
    });
    let image = l.apply(&probe);
    let scale = image.iter().map(|c| c.norm()).fold(f64::MIN_POSITIVE, f64::max);
    for i in 0..d {
        for j in i..d {
            let defect = (image[(i, j)] - image[(j, i)].conj()).norm();
            if defect > 1e-10 * scale.max(1.0) {
                return Err(Error::InvalidParameter(
                    "generator does not preserve Hermiticity; cannot solve in the Hermitian basis"
                        .into(),
                ));
            }
        }
    }
    Ok(())
}

/// Fixed-generator RK4 evolution, exact enough for validation against
/// analytic decay laws. Used by tests; not a production integrator.
pub fn evolve(l: &Superoperator, rho0: &Array2<Complex64>, t: f64, steps: usize) -> Array2<Complex64> {
    let dt = t / steps as f64;
    let mut v = Superoperator::vectorize(rho0);
    let m = &l.matrix;
    for _ in 0..steps {
        let k1 = m.dot(&v);
        let k2 = m.dot(&(&v + &(&k1 * (dt / 2.0))));
        let k3 = m.dot(&(&v + &(&k2 * (dt / 2.0))));
        let k4 = m.dot(&(&v + &(&k3 * dt)));
        v = &v + &((k1 + k2 * 2.0 + k3 * 2.0 + k4) * (dt / 6.0));
    }
    Superoperator::unvectorize(l.dim, &v)
}

/// Probe-transition coupling data needed to convert coherences into the
/// complex susceptibility.
#[derive(Clone, Debug)]
pub struct ProbeCoupling {
    ops: Vec<(i32, Array2<Complex64>)>,
    coeffs: [Complex64; 3],
    /// Effective squared dipole element d² = S (a₀e)² / (2J_upper + 1).
    dipole_sq: f64,
}

impl ProbeCoupling {
    pub fn new(scheme: &LevelScheme, polarization: &[Complex64; 3]) -> Result<Self> {
        let transition = scheme.transition_for_field(FieldName::Probe)?;
        let ops = scheme.coupling_ops(transition.upper, transition.lower)?;
        let (coeffs, degeneracy) = match scheme.coupling_kind() {
            crate::atom::CouplingKind::Scalar => {
                ([Complex64::ZERO, Complex64::ONE, Complex64::ZERO], 1.0)
            }
            crate::atom::CouplingKind::Spherical => {
                let j_upper = scheme.manifold_j(transition.upper)?;
                (
                    crate::atom::spherical_coefficients(polarization),
                    (2 * j_upper + 1) as f64,
                )
            }
        };
        let dipole_sq =
            transition.line_strength * dipole_atomic_unit().powi(2) / degeneracy;
        Ok(Self { ops, coeffs, dipole_sq })
    }

    /// Effective squared dipole element d² = S (a₀e)² / (2J_upper + 1) in
    /// (C m)².
    pub fn dipole_sq(&self) -> f64 {
        self.dipole_sq
    }

    /// Polarization-projected probe coherence Σ_q c_q Tr(ρ ŝ_ab^q); reduces to
    /// the plain upper-lower coherence ρ_ab for the four-level chain.
    pub fn projected_coherence(&self, rho: &Array2<Complex64>) -> Complex64 {
        let mut acc = Complex64::ZERO;
        for (q, op) in &self.ops {
            let c = self.coeffs[(q + 1) as usize];
            if c == Complex64::ZERO {
                continue;
            }
            let mut tr = Complex64::ZERO;
            for ((i, j), &s_ij) in op.indexed_iter() {
                if s_ij != Complex64::ZERO {
                    tr += rho[(j, i)] * s_ij;
                }
            }
            acc += c * tr;
        }
        acc
    }

    /// Linear susceptibility χ⁽¹⁾ = d² N ρ_ab / (ε₀ ħ Ω_p); Im χ > 0 is
    /// absorption, Im χ < 0 gain.
    pub fn susceptibility(
        &self,
        rho: &Array2<Complex64>,
        probe_rabi: f64,
        density: f64,
    ) -> Result<Complex64> {
        self.susceptibility_from_coherence(self.projected_coherence(rho), probe_rabi, density)
    }

    /// Same conversion when the projected coherence is already at hand.
    pub fn susceptibility_from_coherence(
        &self,
        coherence: Complex64,
        probe_rabi: f64,
        density: f64,
    ) -> Result<Complex64> {
        if probe_rabi == 0.0 {
            return Err(Error::InvalidParameter(
                "susceptibility needs a nonzero probe Rabi frequency".into(),
            ));
        }
        Ok(coherence * self.dipole_sq * density / (EPSILON_0 * HBAR * probe_rabi))
    }
}

/// One point of a probe spectrum.
#[derive(Clone, Copy, Debug)]
pub struct SusceptibilitySample {
    /// Probe detuning (rad/s).
    pub detuning: f64,
    pub chi: Complex64,
}

/// Sweep the probe detuning over a grid; points are computed independently
/// in parallel.
pub fn spectrum_scan(
    response: &crate::response::MediumResponse,
    grid: &[f64],
) -> Result<Vec<SusceptibilitySample>> {
    use rayon::prelude::*;
    if grid.is_empty() {
        return Err(Error::InvalidParameter("empty detuning grid".into()));
    }
    grid.par_iter()
        .map(|&detuning| {
            let chi = response.averaged_chi(detuning)?;
            Ok(SusceptibilitySample { detuning, chi })
        })
        .collect()
}
