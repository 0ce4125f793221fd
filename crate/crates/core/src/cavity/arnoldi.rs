//! Dominant round-trip eigenmodes by the restarted Arnoldi method.

use ndarray::Array2;
use num_complex::Complex64;

use super::{ComplexField2D, RoundTrip};
use crate::linalg;
use crate::{Error, Result};

/// Krylov-iteration controls.
#[derive(Clone, Copy, Debug)]
pub struct ArnoldiSettings {
    pub krylov_dim: usize,
    pub max_restarts: usize,
    /// Relative residual ‖Rψ − γψ‖ / |γ| required of every returned mode.
    pub tolerance: f64,
}

impl Default for ArnoldiSettings {
    fn default() -> Self {
        Self { krylov_dim: 30, max_restarts: 10, tolerance: 1e-8 }
    }
}

/// One self-consistent cavity mode.
#[derive(Clone, Debug)]
pub struct ModeResult {
    pub eigenvalue: Complex64,
    /// Per-round-trip power gain |γ|².
    pub round_trip_gain: f64,
    /// Unit-normalized transverse profile on the output-mirror plane.
    pub profile: ComplexField2D,
    /// Verified relative residual through the full operator chain.
    pub residual: f64,
}

fn dot(a: &[Complex64], b: &[Complex64]) -> Complex64 {
    a.iter().zip(b).map(|(x, y)| x.conj() * y).sum()
}

fn norm(a: &[Complex64]) -> f64 {
    a.iter().map(|x| x.norm_sqr()).sum::<f64>().sqrt()
}

struct Factorization {
    basis: Vec<Vec<Complex64>>,
    /// (m+1)×m Hessenberg matrix.
    h: Array2<Complex64>,
    /// Achieved subspace size (< requested on happy breakdown).
    size: usize,
    breakdown: bool,
}

fn arnoldi_factorization<F>(apply: &F, start: &[Complex64], m: usize) -> Factorization
where
    F: Fn(&[Complex64]) -> Vec<Complex64>,
{
    let mut basis: Vec<Vec<Complex64>> = Vec::with_capacity(m + 1);
    let mut h = Array2::zeros((m + 1, m));
    let n0 = norm(start);
    basis.push(start.iter().map(|v| v / n0).collect());
    for j in 0..m {
        let mut w = apply(&basis[j]);
        // modified Gram-Schmidt with one reorthogonalization pass
        for _ in 0..2 {
            for (i, v) in basis.iter().enumerate() {
                let c = dot(v, &w);
                if c != Complex64::ZERO {
                    for (wk, vk) in w.iter_mut().zip(v) {
                        *wk -= c * vk;
                    }
                    h[(i, j)] += c;
                }
            }
        }
        let beta = norm(&w);
        h[(j + 1, j)] = Complex64::new(beta, 0.0);
        let scale = h.column(j).iter().map(|v| v.norm()).fold(0.0, f64::max);
        if beta <= 1e-14 * scale.max(1e-300) {
            return Factorization { basis, h, size: j + 1, breakdown: true };
        }
        basis.push(w.into_iter().map(|v| v / beta).collect());
    }
    Factorization { basis, h, size: m, breakdown: false }
}

struct RitzPair {
    value: Complex64,
    /// Coefficients in the Krylov basis.
    coeffs: Vec<Complex64>,
}

fn ritz_pairs(fact: &Factorization) -> Result<Vec<RitzPair>> {
    let k = fact.size;
    let square = Array2::from_shape_fn((k, k), |(i, j)| fact.h[(i, j)]);
    let (values, vectors) = linalg::eig(&square)?;
    let mut pairs: Vec<RitzPair> = (0..k)
        .map(|idx| RitzPair {
            value: values[idx],
            coeffs: (0..k).map(|i| vectors[(i, idx)]).collect(),
        })
        .collect();
    pairs.sort_by(|a, b| b.value.norm().total_cmp(&a.value.norm()));
    Ok(pairs)
}

fn assemble(fact: &Factorization, coeffs: &[Complex64]) -> Vec<Complex64> {
    let n = fact.basis[0].len();
    let mut out = vec![Complex64::ZERO; n];
    for (c, v) in coeffs.iter().zip(&fact.basis) {
        if *c != Complex64::ZERO {
            for (o, vk) in out.iter_mut().zip(v) {
                *o += c * vk;
            }
        }
    }
    let nn = norm(&out);
    if nn > 0.0 {
        for o in &mut out {
            *o /= nn;
        }
    }
    out
}

/// The `count` largest-|γ| eigenpairs of a round-trip operator.
///
/// Restarts from the sum of the current best Ritz vectors until every
/// requested mode passes the residual bound when reapplied through the full
/// operator chain.
pub fn dominant_modes(
    op: &RoundTrip,
    count: usize,
    settings: &ArnoldiSettings,
) -> Result<Vec<ModeResult>> {
    if count == 0 || count > settings.krylov_dim {
        return Err(Error::InvalidParameter(format!(
            "requested {count} modes from a Krylov space of {}",
            settings.krylov_dim
        )));
    }
    let cavity = op.cavity();
    let seed =
        ComplexField2D::gaussian_seed(cavity.grid_n, cavity.window, cavity.wavelength_nm);
    let template = seed.clone();
    let flatten = |f: &ComplexField2D| -> Vec<Complex64> { f.values.iter().copied().collect() };
    let unflatten = |v: &[Complex64]| -> ComplexField2D {
        let mut f = template.clone();
        for (dst, src) in f.values.iter_mut().zip(v) {
            *dst = *src;
        }
        f
    };
    let apply = |v: &[Complex64]| -> Vec<Complex64> { flatten(&op.apply(&unflatten(v))) };

    let mut start = flatten(&seed);
    let mut best: Option<(f64, Vec<ModeResult>)> = None;
    for _restart in 0..=settings.max_restarts {
        let fact = arnoldi_factorization(&apply, &start, settings.krylov_dim);
        if fact.size < count {
            return Err(Error::NonConvergence(format!(
                "Krylov space collapsed at dimension {} before reaching {count} modes",
                fact.size
            )));
        }
        let pairs = ritz_pairs(&fact)?;
        let mut modes = Vec::with_capacity(count);
        let mut worst = 0.0f64;
        for pair in pairs.iter().take(count) {
            let psi = assemble(&fact, &pair.coeffs);
            let image = apply(&psi);
            let gamma = pair.value;
            let mut res_sq = 0.0;
            for (im, ps) in image.iter().zip(&psi) {
                res_sq += (im - gamma * ps).norm_sqr();
            }
            let residual = res_sq.sqrt() / gamma.norm().max(f64::MIN_POSITIVE);
            worst = worst.max(residual);
            modes.push(ModeResult {
                eigenvalue: gamma,
                round_trip_gain: gamma.norm_sqr(),
                profile: unflatten(&psi),
                residual,
            });
        }
        if worst <= settings.tolerance || fact.breakdown {
            return Ok(modes);
        }
        if best.as_ref().map(|(w, _)| worst < *w).unwrap_or(true) {
            best = Some((worst, modes));
        }
        // restart towards the wanted invariant subspace
        let mut next = vec![Complex64::ZERO; start.len()];
        for pair in pairs.iter().take(count) {
            let psi = assemble(&fact, &pair.coeffs);
            for (n, p) in next.iter_mut().zip(&psi) {
                *n += p;
            }
        }
        if norm(&next) == 0.0 {
            break;
        }
        start = next;
    }
    let (worst, _) = best.unwrap();
    Err(Error::NonConvergence(format!(
        "Arnoldi restarts exhausted; worst relative residual {worst:.3e} exceeds {:.1e}",
        settings.tolerance
    )))
}

/// Ritz values of one unrestarted factorization, largest |γ| first. Useful
/// for spectral bounds where individual eigenvectors need not converge.
pub fn ritz_values(op: &RoundTrip, krylov_dim: usize) -> Result<Vec<Complex64>> {
    let cavity = op.cavity();
    let seed =
        ComplexField2D::gaussian_seed(cavity.grid_n, cavity.window, cavity.wavelength_nm);
    let template = seed.clone();
    let apply = |v: &[Complex64]| -> Vec<Complex64> {
        let mut f = template.clone();
        for (dst, src) in f.values.iter_mut().zip(v) {
            *dst = *src;
        }
        op.apply(&f).values.iter().copied().collect()
    };
    let start: Vec<Complex64> = seed.values.iter().copied().collect();
    let fact = arnoldi_factorization(&apply, &start, krylov_dim);
    Ok(ritz_pairs(&fact)?.into_iter().map(|p| p.value).collect())
}
