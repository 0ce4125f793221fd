//! Monte-Carlo validation of the phase-diffusion generator.
//!
//! A three-level ladder {g, a, c} is driven by a clean laser on g↔a and a
//! phase-diffusing laser on a↔c. The ensemble average of stochastic
//! trajectories — each integrating the bare master equation with a Wiener
//! phase dφ = √(2b) dW on the noisy drive — must agree with the stationary
//! state of the deterministic phase-diffusion generator within statistics.
//!
//! The trajectory integrator is written out long-hand on the 3×3 density
//! matrix and never touches the superoperator machinery it validates.

use ndarray::Array2;
use num_complex::Complex64 as C64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use lwi_core::liouvillian::{
    coherent_liouvillian, dissipator, phase_diffusion_from_signs, steady_state, DecayChannel,
};

const GAMMA_A: f64 = 7.98e6; // a → g decay (rad/s)
const GAMMA_C: f64 = 5.57e7; // c → a decay (rad/s)
const OMEGA_1: f64 = 1.26e7; // clean drive g↔a
const OMEGA_2: f64 = 2.51e7; // noisy drive a↔c
const LINEWIDTH: f64 = 6.3e6; // phase-diffusion linewidth b

/// Hand-written right-hand side of the ladder master equation with the noisy
/// drive at phase φ. Basis order {g, a, c}; ħ = 1.
fn rhs(rho: &[[C64; 3]; 3], phase: f64) -> [[C64; 3]; 3] {
    let o1 = C64::new(OMEGA_1, 0.0);
    let o2 = C64::from_polar(OMEGA_2, phase);
    // H = −(Ω₁ |g⟩⟨a| + Ω₂ e^{iφ} |a⟩⟨c| + h.c.)
    let mut h = [[C64::ZERO; 3]; 3];
    h[0][1] = -o1;
    h[1][0] = -o1.conj();
    h[1][2] = -o2;
    h[2][1] = -o2.conj();

    let mut out = [[C64::ZERO; 3]; 3];
    // coherent part −i[H, ρ]
    for i in 0..3 {
        for j in 0..3 {
            let mut acc = C64::ZERO;
            for k in 0..3 {
                acc += h[i][k] * rho[k][j] - rho[i][k] * h[k][j];
            }
            out[i][j] = C64::new(0.0, -1.0) * acc;
        }
    }
    // decay a → g at Γ_a: ŝ = |g⟩⟨a|
    out[0][0] += GAMMA_A * rho[1][1];
    out[1][1] -= GAMMA_A * rho[1][1];
    for j in 0..3 {
        if j != 1 {
            out[1][j] -= 0.5 * GAMMA_A * rho[1][j];
            out[j][1] -= 0.5 * GAMMA_A * rho[j][1];
        }
    }
    // decay c → a at Γ_c: ŝ = |a⟩⟨c|
    out[1][1] += GAMMA_C * rho[2][2];
    out[2][2] -= GAMMA_C * rho[2][2];
    for j in 0..3 {
        if j != 2 {
            out[2][j] -= 0.5 * GAMMA_C * rho[2][j];
            out[j][2] -= 0.5 * GAMMA_C * rho[j][2];
        }
    }
    out
}

fn add_scaled(a: &[[C64; 3]; 3], b: &[[C64; 3]; 3], s: f64) -> [[C64; 3]; 3] {
    let mut out = [[C64::ZERO; 3]; 3];
    for i in 0..3 {
        for j in 0..3 {
            out[i][j] = a[i][j] + s * b[i][j];
        }
    }
    out
}

/// One trajectory: RK4 over piecewise-constant phase segments, then the
/// gauge transform ϱ = U ρ U† with U = exp(i φ/2 · diag(ξ)) that strips the
/// stochastic phase from the coherences (ξ = (−1, −1, +1)).
fn trajectory(seed: u64, t_final: f64, steps: usize) -> [[C64; 3]; 3] {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let dt = t_final / steps as f64;
    let mut rho = [[C64::ZERO; 3]; 3];
    rho[0][0] = C64::ONE;
    let mut phase = 0.0f64;
    for _ in 0..steps {
        let k1 = rhs(&rho, phase);
        let k2 = rhs(&add_scaled(&rho, &k1, dt / 2.0), phase);
        let k3 = rhs(&add_scaled(&rho, &k2, dt / 2.0), phase);
        let k4 = rhs(&add_scaled(&rho, &k3, dt), phase);
        for i in 0..3 {
            for j in 0..3 {
                rho[i][j] += dt / 6.0
                    * (k1[i][j] + 2.0 * k2[i][j] + 2.0 * k3[i][j] + k4[i][j]);
            }
        }
        // Wiener phase increment, exact for any dt
        let (u1, u2): (f64, f64) = (rng.gen::<f64>().max(1e-300), rng.gen());
        let gauss = (-2.0 * u1.ln()).sqrt() * (2.0 * std::f64::consts::PI * u2).cos();
        phase += (2.0 * LINEWIDTH * dt).sqrt() * gauss;
    }
    // gauge transform: level k picks e^{i ξ_k φ/2}
    let xi = [-1.0, -1.0, 1.0];
    let mut out = [[C64::ZERO; 3]; 3];
    for i in 0..3 {
        for j in 0..3 {
            out[i][j] =
                rho[i][j] * C64::from_polar(1.0, 0.5 * phase * (xi[i] - xi[j]));
        }
    }
    out
}

#[test]
fn trajectory_average_matches_phase_diffusion_steady_state() {
    // deterministic description through the library machinery
    let mut h = Array2::zeros((3, 3));
    h[(0, 1)] = C64::new(-OMEGA_1, 0.0);
    h[(1, 0)] = C64::new(-OMEGA_1, 0.0);
    h[(1, 2)] = C64::new(-OMEGA_2, 0.0);
    h[(2, 1)] = C64::new(-OMEGA_2, 0.0);
    let mut s_a = Array2::zeros((3, 3));
    s_a[(0, 1)] = C64::ONE;
    let mut s_c = Array2::zeros((3, 3));
    s_c[(1, 2)] = C64::ONE;
    let channels = vec![
        DecayChannel { lowering: s_a, rate: GAMMA_A, photon_number: 0.0 },
        DecayChannel { lowering: s_c, rate: GAMMA_C, photon_number: 0.0 },
    ];
    let mut l = dissipator(&channels).unwrap();
    l.add_scaled(C64::ONE, &coherent_liouvillian(&h).unwrap());
    let pd = phase_diffusion_from_signs(&[(LINEWIDTH, vec![-1, -1, 1])], 3).unwrap();
    l.add_scaled(C64::ONE, &pd);
    let pdm = steady_state(&l).unwrap();
    assert_eq!(pdm.degenerate, Some(false));

    // Monte-Carlo ensemble
    let n_traj = 12_000usize;
    let t_final = 2.5e-6;
    let steps = 2500;
    let samples: Vec<[[C64; 3]; 3]> = (0..n_traj)
        .into_par_iter()
        .map(|k| trajectory(0xC0FFEE + k as u64, t_final, steps))
        .collect();

    // mean and standard error per density-matrix component
    let observables: [(&str, Box<dyn Fn(&[[C64; 3]; 3]) -> f64 + Sync>); 7] = [
        ("pop g", Box::new(|r| r[0][0].re)),
        ("pop a", Box::new(|r| r[1][1].re)),
        ("pop c", Box::new(|r| r[2][2].re)),
        ("Re ga", Box::new(|r| r[0][1].re)),
        ("Im ga", Box::new(|r| r[0][1].im)),
        ("Re ac", Box::new(|r| r[1][2].re)),
        ("Im ac", Box::new(|r| r[1][2].im)),
    ];
    let targets = [
        pdm.rho[(0, 0)].re,
        pdm.rho[(1, 1)].re,
        pdm.rho[(2, 2)].re,
        pdm.rho[(0, 1)].re,
        pdm.rho[(0, 1)].im,
        pdm.rho[(1, 2)].re,
        pdm.rho[(1, 2)].im,
    ];
    for ((name, observable), target) in observables.iter().zip(targets) {
        let values: Vec<f64> = samples.iter().map(|s| observable(s)).collect();
        let mean = values.iter().sum::<f64>() / n_traj as f64;
        let var = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n_traj as f64 - 1.0);
        let se = (var / n_traj as f64).sqrt();
        let dev = (mean - target).abs();
        assert!(
            dev <= 3.0 * se.max(1e-12),
            "{name}: MC {mean:.6} vs PDM {target:.6} differs by {dev:.2e} > 3·SE = {:.2e}",
            3.0 * se
        );
    }
}
