//! Subcommand implementations: each wires the configuration into a core
//! pipeline and writes CSV/binary artifacts plus the run manifest.

use std::path::Path;

use anyhow::{bail, Context};

use lwi_core::atom::FieldName;
use lwi_core::cavity::{
    beam_quality_m2, dominant_modes, ritz_values, ArnoldiSettings, CavitySpec, MirrorSpec,
    RoundTrip,
};
use lwi_core::constants::hz_to_angular;
use lwi_core::gain_field::{drive_beams_from_geometry, sample_gain_distribution, GridSpec3};
use lwi_core::io::CsvWriter;
use lwi_core::laser_power::{
    power_curve, threshold_scan, CavityParams, PumpModel, SaturationSampling,
};
use lwi_core::liouvillian::spectrum_scan;

use crate::config::RunConfig;
use crate::manifest::ManifestBuilder;

fn linspace(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    if n == 1 {
        return vec![lo];
    }
    (0..n).map(|i| lo + (hi - lo) * i as f64 / (n as f64 - 1.0)).collect()
}

pub fn spectrum(
    cfg: &RunConfig,
    raw: &str,
    out_dir: &Path,
    doppler: Option<bool>,
    noise: Option<bool>,
) -> anyhow::Result<()> {
    let spec = cfg.spectrum.as_ref().context("config needs a [spectrum] section")?;
    if spec.points == 0 {
        bail!("empty detuning grid");
    }
    let grid: Vec<f64> = linspace(
        hz_to_angular(spec.min_detuning_hz),
        hz_to_angular(spec.max_detuning_hz),
        spec.points,
    );
    let pump_rates = spec.pump_rates.clone().unwrap_or_else(|| vec![cfg.pump_set().r]);

    let mut manifest = ManifestBuilder::new(out_dir, "spectrum", raw);
    let response = cfg.response(doppler, noise)?;
    let mut curves = Vec::with_capacity(pump_rates.len());
    for &r in &pump_rates {
        let mut local = response.clone();
        let mut pumps = local.pumps();
        pumps.r = r;
        local.set_pumps(pumps)?;
        curves.push(spectrum_scan(&local, &grid)?);
    }

    let mut params = cfg.echo(raw);
    params.push(("doppler_override".into(), format!("{doppler:?}")));
    params.push(("noise_override".into(), format!("{noise:?}")));
    params.push((
        "pump_rates_per_s".into(),
        pump_rates.iter().map(|r| format!("{r:.6e}")).collect::<Vec<_>>().join(";"),
    ));
    let mut columns = vec!["delta_p_rad_per_s".to_string()];
    for (i, _) in pump_rates.iter().enumerate() {
        columns.push(format!("re_chi_{i}"));
        columns.push(format!("im_chi_{i}"));
    }
    let column_refs: Vec<&str> = columns.iter().map(|s| s.as_str()).collect();
    let path = out_dir.join("spectrum.csv");
    let mut csv = CsvWriter::create(&path, &params, &column_refs)?;
    for (k, &delta) in grid.iter().enumerate() {
        let mut row = vec![delta];
        for curve in &curves {
            row.push(curve[k].chi.re);
            row.push(curve[k].chi.im);
        }
        csv.write_row(&row)?;
    }
    csv.finish()?;
    manifest.add_output(&path)?;
    manifest.finish()?;
    println!("wrote {}", path.display());
    Ok(())
}

pub fn noise_sweep(cfg: &RunConfig, raw: &str, out_dir: &Path) -> anyhow::Result<()> {
    let sweep = cfg.noise_sweep.as_ref().context("config needs a [noise_sweep] section")?;
    let mut manifest = ManifestBuilder::new(out_dir, "noise-sweep", raw);
    let params = cfg.echo(raw);
    let path = out_dir.join("noise_sweep.csv");

    match sweep.mode.as_str() {
        "linewidth" => {
            let lo = sweep.min_linewidth_hz.context("linewidth mode needs min_linewidth_hz")?;
            let hi = sweep.max_linewidth_hz.context("linewidth mode needs max_linewidth_hz")?;
            let n = sweep.linewidth_points.context("linewidth mode needs linewidth_points")?;
            let temps = sweep
                .temperatures_k
                .clone()
                .context("linewidth mode needs temperatures_k")?;
            let grid = linspace(lo, hi, n);
            let mut columns = vec!["b_rad_per_s".to_string()];
            for t in &temps {
                columns.push(format!("im_chi_{t}k"));
            }
            let column_refs: Vec<&str> = columns.iter().map(|s| s.as_str()).collect();
            let mut csv = CsvWriter::create(&path, &params, &column_refs)?;
            let b_r = hz_to_angular(cfg.noise.repump_linewidth_hz);
            let mut responses = Vec::new();
            for &t in &temps {
                responses.push(cfg.response_at(t, None, None)?);
            }
            for &b_hz in &grid {
                let b = hz_to_angular(b_hz);
                let mut row = vec![b];
                for response in &mut responses {
                    response.set_linewidths(b, b, b_r)?;
                    row.push(response.averaged_chi(0.0)?.im);
                }
                csv.write_row(&row)?;
            }
            csv.finish()?;
        }
        "pump" => {
            let lo = sweep.min_pump_rate.context("pump mode needs min_pump_rate")?;
            let hi = sweep.max_pump_rate.context("pump mode needs max_pump_rate")?;
            let n = sweep.pump_points.context("pump mode needs pump_points")?;
            let linewidths = sweep.linewidths_hz.clone().context("pump mode needs linewidths_hz")?;
            let grid = linspace(lo, hi, n);
            let mut columns = vec!["pump_rate_per_s".to_string()];
            for b in &linewidths {
                columns.push(format!("im_chi_b{b}hz"));
            }
            let column_refs: Vec<&str> = columns.iter().map(|s| s.as_str()).collect();
            let mut csv = CsvWriter::create(&path, &params, &column_refs)?;
            let b_r = hz_to_angular(cfg.noise.repump_linewidth_hz);
            let base = cfg.response(None, None)?;
            for &r in &grid {
                let mut row = vec![r];
                for &b_hz in &linewidths {
                    let mut local = base.clone();
                    local.set_linewidths(hz_to_angular(b_hz), hz_to_angular(b_hz), b_r)?;
                    let mut pumps = local.pumps();
                    pumps.r = r;
                    local.set_pumps(pumps)?;
                    row.push(local.averaged_chi(0.0)?.im);
                }
                csv.write_row(&row)?;
            }
            csv.finish()?;
        }
        other => bail!("unknown noise_sweep mode '{other}' (expected 'linewidth' or 'pump')"),
    }
    manifest.add_output(&path)?;
    manifest.finish()?;
    println!("wrote {}", path.display());
    Ok(())
}

fn cavity_params(cfg: &RunConfig) -> anyhow::Result<CavityParams> {
    let c = cfg.cavity_model.as_ref().context("config needs a [cavity_model] section")?;
    let params = CavityParams {
        quality_factor: c.quality_factor,
        mode_volume: c.mode_volume_m3,
        overlap_ratio: c.overlap_ratio,
        waist: c.waist_m,
    };
    params.validate()?;
    Ok(params)
}

fn pump_model(cfg: &RunConfig) -> anyhow::Result<PumpModel> {
    let c = cfg.cavity_model.as_ref().context("config needs a [cavity_model] section")?;
    Ok(PumpModel { area: c.pump_area_m2, sigma_omega: hz_to_angular(c.pump_sigma_hz) })
}

pub fn power(cfg: &RunConfig, raw: &str, out_dir: &Path) -> anyhow::Result<()> {
    let pow = cfg.power.as_ref().context("config needs a [power] section")?;
    let cavity = cavity_params(cfg)?;
    let pump = pump_model(cfg)?;
    let rates = linspace(pow.min_pump_rate, pow.max_pump_rate, pow.points);
    let sampling = SaturationSampling::default();
    let b_r = hz_to_angular(cfg.noise.repump_linewidth_hz);

    let mut manifest = ManifestBuilder::new(out_dir, "power", raw);
    for (i, set) in pow.linewidth_sets_hz.iter().enumerate() {
        let mut response = cfg.response(None, None)?;
        response.set_linewidths(hz_to_angular(set[0]), hz_to_angular(set[1]), b_r)?;
        let points = power_curve(&response, &cavity, &pump, &rates, &sampling)?;
        let mut params = cfg.echo(raw);
        params.push(("b_s_hz".into(), format!("{}", set[0])));
        params.push(("b_w_hz".into(), format!("{}", set[1])));
        let path = out_dir.join(format!("power_set{i}.csv"));
        let mut csv = CsvWriter::create(
            &path,
            &params,
            &[
                "pump_rate_per_s",
                "pump_power_w",
                "intracavity_power_w",
                "alpha_per_s",
                "beta_per_s",
                "gamma_per_s",
                "n_photons",
            ],
        )?;
        for p in &points {
            csv.write_row(&[
                p.pump_rate,
                p.pump_power,
                p.power,
                p.gain.alpha,
                p.gain.beta,
                p.gain.gamma,
                p.n_photons,
            ])?;
        }
        csv.finish()?;
        manifest.add_output(&path)?;
        println!("wrote {}", path.display());
    }
    manifest.finish()?;
    Ok(())
}

pub fn threshold(cfg: &RunConfig, raw: &str, out_dir: &Path) -> anyhow::Result<()> {
    let thr = cfg.threshold.as_ref().context("config needs a [threshold] section")?;
    let cavity = cavity_params(cfg)?;
    let pump = pump_model(cfg)?;
    let response = cfg.response(None, None)?;
    let b_s: Vec<f64> = thr.b_s_grid_hz.iter().map(|b| hz_to_angular(*b)).collect();
    let b_w: Vec<f64> = thr.b_w_grid_hz.iter().map(|b| hz_to_angular(*b)).collect();
    let b_r = hz_to_angular(cfg.noise.repump_linewidth_hz);
    let points =
        threshold_scan(&response, &cavity, &pump, &b_s, &b_w, b_r, thr.max_pump_rate)?;

    let mut manifest = ManifestBuilder::new(out_dir, "threshold", raw);
    let path = out_dir.join("threshold.csv");
    let mut csv = CsvWriter::create(
        &path,
        &cfg.echo(raw),
        &["b_s_rad_per_s", "b_w_rad_per_s", "threshold_rate_per_s", "threshold_power_w"],
    )?;
    for p in &points {
        csv.write_row(&[
            p.b_s,
            p.b_w,
            p.rate.unwrap_or(f64::NAN),
            p.power.unwrap_or(f64::NAN),
        ])?;
    }
    csv.finish()?;
    manifest.add_output(&path)?;
    manifest.finish()?;
    println!("wrote {}", path.display());
    Ok(())
}

pub fn gain3d(cfg: &RunConfig, raw: &str, out_dir: &Path) -> anyhow::Result<()> {
    let g = cfg.gain3d.as_ref().context("config needs a [gain3d] section")?;
    if cfg.scheme.kind != "mercury" {
        bail!("the gain distribution needs the mercury scheme");
    }
    let response = cfg.response(None, None)?;
    let geometry = lwi_core::doppler::BeamGeometry::mercury()?;
    let (strong, weak) =
        drive_beams_from_geometry(&geometry, g.waist_m, g.strong_power_w, g.weak_power_w)?;
    let grid = GridSpec3 {
        dims: [g.nx, g.ny, g.nz],
        extents: [
            [-g.x_half_extent_m, g.x_half_extent_m],
            [-g.y_half_extent_m, g.y_half_extent_m],
            [-g.z_half_extent_m, g.z_half_extent_m],
        ],
    };
    let table = if g.table_nodes >= 2 { Some((g.table_nodes, g.table_nodes)) } else { None };
    let field = sample_gain_distribution(&response, &strong, &weak, &grid, table)?;

    let mut manifest = ManifestBuilder::new(out_dir, "gain3d", raw);
    let volume_path = out_dir.join("gain_volume.bin");
    field.write(&volume_path)?;
    manifest.add_output(&volume_path)?;

    let stats = lwi_core::gain_field::gain_statistics(&field);
    let stats_path = out_dir.join("gain_stats.csv");
    let mut csv = CsvWriter::create(
        &stats_path,
        &cfg.echo(raw),
        &[
            "min_im_chi",
            "max_im_chi",
            "gain_fraction",
            "integral_im_chi_m3",
            "centroid_x_m",
            "centroid_y_m",
            "centroid_z_m",
        ],
    )?;
    csv.write_row(&[
        stats.min_im,
        stats.max_im,
        stats.gain_fraction,
        stats.integral_im,
        stats.gain_centroid[0],
        stats.gain_centroid[1],
        stats.gain_centroid[2],
    ])?;
    csv.finish()?;
    manifest.add_output(&stats_path)?;
    manifest.finish()?;
    println!("wrote {} and {}", volume_path.display(), stats_path.display());
    Ok(())
}

fn ring_spec(cfg: &RunConfig) -> anyhow::Result<(CavitySpec, &crate::config::RingConfig)> {
    let r = cfg.ring.as_ref().context("config needs a [ring] section")?;
    let mirror = MirrorSpec { radius_of_curvature: r.mirror_radius_m, aperture_side: r.aperture_m };
    let lambda_p = lwi_core::constants::mercury_lines::LAMBDA_AB_NM;
    let spec = CavitySpec {
        arm_length: r.arm_length_m,
        mirrors: [mirror; 4],
        medium_length: r.medium_length_m,
        slices: r.slices,
        loss_factor: r.loss_factor,
        grid_n: r.grid_n,
        window: r.window_factor * r.aperture_m,
        wavelength_nm: lambda_p,
    };
    spec.validate()?;
    Ok((spec, r))
}

pub fn cavity(cfg: &RunConfig, raw: &str, out_dir: &Path) -> anyhow::Result<()> {
    let (spec, ring) = ring_spec(cfg)?;
    let arnoldi = ArnoldiSettings {
        krylov_dim: ring.krylov_dim,
        max_restarts: ring.max_restarts,
        tolerance: 1e-8,
    };
    let mut manifest = ManifestBuilder::new(out_dir, "cavity", raw);

    // empty-resonator modes
    let empty = RoundTrip::empty(&spec)?;
    let modes = dominant_modes(&empty, ring.modes, &arnoldi)?;
    let modes_path = out_dir.join("cavity_modes.csv");
    let mut csv = CsvWriter::create(
        &modes_path,
        &cfg.echo(raw),
        &["mode_index", "re_gamma", "im_gamma", "round_trip_gain", "residual", "m2_x", "m2_y"],
    )?;
    for (i, mode) in modes.iter().enumerate() {
        let (m2x, m2y) = if i < ring.m2_modes {
            beam_quality_m2(&mode.profile)?
        } else {
            (f64::NAN, f64::NAN)
        };
        csv.write_row(&[
            i as f64,
            mode.eigenvalue.re,
            mode.eigenvalue.im,
            mode.round_trip_gain,
            mode.residual,
            m2x,
            m2y,
        ])?;
        let profile_path = out_dir.join(format!("mode{i:02}.bin"));
        lwi_core::io::write_complex_grid(
            &profile_path,
            [mode.profile.n, mode.profile.n, 1],
            [
                [-mode.profile.window / 2.0, mode.profile.window / 2.0],
                [-mode.profile.window / 2.0, mode.profile.window / 2.0],
                [0.0, 0.0],
            ],
            mode.profile.values.as_slice().unwrap(),
        )?;
        manifest.add_output(&profile_path)?;
    }
    csv.finish()?;
    manifest.add_output(&modes_path)?;
    let _ = ritz_values; // spectral-bound helper, used by the validation suite
    println!("wrote {}", modes_path.display());

    // loaded sweep over drive waists
    if !ring.waist_scan_m.is_empty() {
        let g = cfg.gain3d.as_ref().context("the waist sweep needs a [gain3d] section")?;
        let response = cfg.response(None, None)?;
        let geometry = lwi_core::doppler::BeamGeometry::mercury()?;
        let sweep_path = out_dir.join("cavity_sweep.csv");
        let mut csv = CsvWriter::create(
            &sweep_path,
            &cfg.echo(raw),
            &["waist_m", "mode_index", "re_gamma", "im_gamma", "round_trip_gain", "m2_x", "m2_y"],
        )?;
        for &w0 in &ring.waist_scan_m {
            // powers scale with the waist area so the focal Rabi stays fixed
            let scale = (w0 / g.waist_m).powi(2);
            let (strong, weak) = drive_beams_from_geometry(
                &geometry,
                w0,
                g.strong_power_w * scale,
                g.weak_power_w * scale,
            )?;
            let grid = GridSpec3 {
                dims: [g.nx, g.ny, g.nz],
                extents: [
                    [-g.x_half_extent_m, g.x_half_extent_m],
                    [-g.y_half_extent_m, g.y_half_extent_m],
                    [-g.z_half_extent_m, g.z_half_extent_m],
                ],
            };
            let table =
                if g.table_nodes >= 2 { Some((g.table_nodes, g.table_nodes)) } else { None };
            let field = sample_gain_distribution(&response, &strong, &weak, &grid, table)?;
            let loaded = RoundTrip::loaded(&spec, &field)?;
            let modes = dominant_modes(&loaded, ring.modes.max(1), &arnoldi)?;
            for (i, mode) in modes.iter().enumerate() {
                let (m2x, m2y) = if i < ring.m2_modes.max(1) {
                    beam_quality_m2(&mode.profile)?
                } else {
                    (f64::NAN, f64::NAN)
                };
                csv.write_row(&[
                    w0,
                    i as f64,
                    mode.eigenvalue.re,
                    mode.eigenvalue.im,
                    mode.round_trip_gain,
                    m2x,
                    m2y,
                ])?;
            }
            log::info!("waist {w0:.2e} m done");
        }
        csv.finish()?;
        manifest.add_output(&sweep_path)?;
        println!("wrote {}", sweep_path.display());
    }
    manifest.finish()?;
    Ok(())
}

pub fn selfcheck(seed: u64) -> anyhow::Result<()> {
    use lwi_core::atom::{
        build_hamiltonian, DriveField, DriveStrength, LevelScheme, PumpSet,
    };
    use lwi_core::liouvillian::{
        add_coherent, decay_channels, dissipator, phase_diffusion_liouvillian, steady_state_with,
        SteadyStateOptions, Superoperator, XiMatrix,
    };
    use num_complex::Complex64;

    let mut failures = 0usize;
    let mut check = |name: &str, ok: bool| {
        println!("{} {name}", if ok { "PASS" } else { "FAIL" });
        if !ok {
            failures += 1;
        }
    };

    // angular-momentum symmetry
    let mut wigner_ok = true;
    for j1 in 0..=3i32 {
        for j2 in 0..=3i32 {
            for j3 in 0..=3i32 {
                for m1 in -j1..=j1 {
                    for m2 in -j2..=j2 {
                        let m3 = -m1 - m2;
                        if m3.abs() > j3 {
                            continue;
                        }
                        let base = lwi_core::wigner::wigner_3j(j1, j2, j3, m1, m2, m3);
                        let cyclic = lwi_core::wigner::wigner_3j(j2, j3, j1, m2, m3, m1);
                        let swapped = lwi_core::wigner::wigner_3j(j2, j1, j3, m2, m1, m3);
                        let sign = if (j1 + j2 + j3) % 2 == 0 { 1.0 } else { -1.0 };
                        if (base - cyclic).abs() > 1e-12 || (swapped - sign * base).abs() > 1e-12 {
                            wigner_ok = false;
                        }
                    }
                }
            }
        }
    }
    check("wigner-3j column symmetries (all j <= 3)", wigner_ok);

    // randomized generator properties
    let mut rng_state = seed.wrapping_mul(0x9E3779B97F4A7C15).wrapping_add(1);
    let mut next = move || {
        // xorshift64*
        rng_state ^= rng_state >> 12;
        rng_state ^= rng_state << 25;
        rng_state ^= rng_state >> 27;
        rng_state.wrapping_mul(0x2545F4914F6CDD1D) as f64 / u64::MAX as f64
    };
    let mut trace_ok = true;
    let mut hermiticity_ok = true;
    for trial in 0..100 {
        let scheme = if trial % 2 == 0 { LevelScheme::mercury() } else { LevelScheme::four_level() };
        let d = scheme.dimension();
        let drives: Vec<DriveField> = [FieldName::Probe, FieldName::Strong, FieldName::Weak, FieldName::Repump]
            .iter()
            .filter(|name| scheme.has_manifold(name.coupled_manifolds().0) && scheme.has_manifold(name.coupled_manifolds().1))
            .map(|&name| {
                DriveField::new(name, DriveStrength::rabi(next() * 3.0e8))
                    .with_detuning((next() - 0.5) * 4.0e8)
                    .with_linewidth(next() * 2.0e8)
            })
            .collect();
        let pumps = PumpSet { r: next() * 5.0e6, r_cd: next() * 5.0e6 };
        let h = build_hamiltonian(&scheme, &drives).unwrap();
        let mut l = dissipator(&decay_channels(&scheme, &pumps).unwrap()).unwrap();
        add_coherent(&mut l, &h);
        let (b_s, b_w, b_r) = (
            drives.iter().find(|f| f.name == FieldName::Strong).map(|f| f.linewidth).unwrap_or(0.0),
            drives.iter().find(|f| f.name == FieldName::Weak).map(|f| f.linewidth).unwrap_or(0.0),
            drives.iter().find(|f| f.name == FieldName::Repump).map(|f| f.linewidth).unwrap_or(0.0),
        );
        let pd = phase_diffusion_liouvillian(b_s, b_w, b_r, &XiMatrix::standard(), &scheme).unwrap();
        l.add_scaled(Complex64::ONE, &pd);
        if l.trace_functional_norm() > 1e-10 * l.frobenius_norm() {
            trace_ok = false;
        }
        // Hermiticity preservation on a random Hermitian matrix
        let mut rho = lwi_core::ndarray::Array2::<Complex64>::zeros((d, d));
        for i in 0..d {
            rho[(i, i)] = Complex64::new(next(), 0.0);
            for j in i + 1..d {
                let v = Complex64::new(next() - 0.5, next() - 0.5);
                rho[(i, j)] = v;
                rho[(j, i)] = v.conj();
            }
        }
        let image = l.apply(&rho);
        let scale = image.iter().map(|c| c.norm()).fold(1e-300, f64::max);
        for i in 0..d {
            for j in 0..d {
                if (image[(i, j)] - image[(j, i)].conj()).norm() > 1e-12 * scale.max(1.0) {
                    hermiticity_ok = false;
                }
            }
        }
        let _ = Superoperator::vectorize(&rho);
        let _ = steady_state_with(&l, &SteadyStateOptions { degeneracy_check: false, positivity_check: false });
    }
    check("trace preservation over 100 random configurations (1e-10)", trace_ok);
    check("hermiticity preservation over 100 random configurations (1e-12)", hermiticity_ok);

    // beam-closure geometry
    let geometry = lwi_core::doppler::BeamGeometry::mercury().unwrap();
    let kp_norm = geometry.k_p.iter().map(|x| x * x).sum::<f64>().sqrt();
    check("three-photon wave-vector closure", geometry.closure_residual < 1e-6 * kp_norm);

    // quadrature normalization
    let quad = lwi_core::doppler::VelocityQuadrature::new(&geometry, 300.0, 200.6, 24).unwrap();
    let total: f64 = quad.weights().iter().sum();
    check("velocity quadrature weights sum to one", (total - 1.0).abs() < 1e-10);

    // reference scalar anchors
    let fwhm = lwi_core::doppler::doppler_fwhm(253.7, 300.0, 200.6);
    check("probe Doppler width anchor", (fwhm - 1.04e9).abs() / 1.04e9 < 0.01);
    let n = lwi_core::doppler::vapor_density(300.0).unwrap();
    check("vapor density anchor", (n - 9.2e19).abs() / 9.2e19 < 0.02);

    if failures > 0 {
        bail!("{failures} self-checks failed");
    }
    Ok(())
}
