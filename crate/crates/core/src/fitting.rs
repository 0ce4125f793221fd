//! Small fitting helpers: odd polynomials, straight lines, parabolas, and
//! Lorentzian line shapes.

use ndarray::Array2;
use num_complex::Complex64;

use crate::linalg;
use crate::{Error, Result};

/// Least-squares fit of complex data to an odd polynomial
/// y(x) = Σ_{k=0..=order} c_k x^(2k+1); returns the coefficients [c_0 ..].
pub fn fit_odd_polynomial(xs: &[f64], ys: &[Complex64], order: usize) -> Result<Vec<Complex64>> {
    let n_coeff = order + 1;
    if xs.len() != ys.len() {
        return Err(Error::Dimension("x and y lengths differ".into()));
    }
    if xs.len() < n_coeff + 1 {
        return Err(Error::Fit(format!(
            "odd polynomial of order {} needs at least {} samples, got {}",
            2 * order + 1,
            n_coeff + 1,
            xs.len()
        )));
    }
    // scale x to unit range for conditioning
    let x_scale = xs.iter().fold(0.0f64, |a, &b| a.max(b.abs()));
    if x_scale == 0.0 {
        return Err(Error::Fit("all abscissae vanish".into()));
    }
    let a = Array2::from_shape_fn((xs.len(), n_coeff), |(i, k)| {
        (xs[i] / x_scale).powi(2 * k as i32 + 1)
    });
    let re: Vec<f64> = ys.iter().map(|y| y.re).collect();
    let im: Vec<f64> = ys.iter().map(|y| y.im).collect();
    let sols = linalg::least_squares_multi(&a, &[&re, &im])?;
    Ok((0..n_coeff)
        .map(|k| {
            Complex64::new(sols[0][k], sols[1][k]) / x_scale.powi(2 * k as i32 + 1)
        })
        .collect())
}

/// Straight-line fit returning (slope, intercept, R²).
pub fn linear_fit(xs: &[f64], ys: &[f64]) -> Result<(f64, f64, f64)> {
    if xs.len() != ys.len() || xs.len() < 2 {
        return Err(Error::Fit("linear fit needs at least two points".into()));
    }
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxx: f64 = xs.iter().map(|x| (x - mx) * (x - mx)).sum();
    let sxy: f64 = xs.iter().zip(ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let syy: f64 = ys.iter().map(|y| (y - my) * (y - my)).sum();
    if sxx == 0.0 {
        return Err(Error::Fit("degenerate abscissae".into()));
    }
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let r2 = if syy == 0.0 { 1.0 } else { (sxy * sxy) / (sxx * syy) };
    Ok((slope, intercept, r2))
}

/// Quadratic least-squares fit y = c0 + c1 x + c2 x².
pub fn quadratic_fit(xs: &[f64], ys: &[f64]) -> Result<[f64; 3]> {
    if xs.len() != ys.len() || xs.len() < 3 {
        return Err(Error::Fit("quadratic fit needs at least three points".into()));
    }
    let x_scale = xs.iter().fold(1e-300f64, |a, &b| a.max(b.abs()));
    let a = Array2::from_shape_fn((xs.len(), 3), |(i, k)| (xs[i] / x_scale).powi(k as i32));
    let sol = linalg::least_squares(&a, ys)?;
    Ok([sol[0], sol[1] / x_scale, sol[2] / (x_scale * x_scale)])
}

/// Result of a Lorentzian line-shape fit
/// y(x) = offset + amplitude / (1 + (2(x − center)/fwhm)²).
#[derive(Clone, Copy, Debug)]
pub struct LorentzianFit {
    pub offset: f64,
    /// Signed peak height; negative for a dip.
    pub amplitude: f64,
    pub center: f64,
    pub fwhm: f64,
    /// Root-mean-square residual of the converged fit.
    pub rms_residual: f64,
}

/// Gauss-Newton fit of a Lorentzian peak or dip.
pub fn lorentzian_fit(xs: &[f64], ys: &[f64]) -> Result<LorentzianFit> {
    if xs.len() != ys.len() || xs.len() < 5 {
        return Err(Error::Fit("lorentzian fit needs at least five points".into()));
    }
    // initial guesses from the extremum against the edge baseline
    let offset0 = 0.5 * (ys[0] + ys[ys.len() - 1]);
    let (k_ext, _) = ys
        .iter()
        .enumerate()
        .max_by(|(_, a), (_, b)| (*a - offset0).abs().total_cmp(&(*b - offset0).abs()))
        .unwrap();
    let amplitude0 = ys[k_ext] - offset0;
    let center0 = xs[k_ext];
    // direct half-height width estimate
    let half = offset0 + amplitude0 / 2.0;
    let crossing = |side: i64| -> f64 {
        let mut k = k_ext as i64;
        loop {
            let next = k + side;
            if next < 0 || next >= xs.len() as i64 {
                return (xs[xs.len() - 1] - xs[0]).abs() / 4.0;
            }
            let (y0, y1) = (ys[k as usize], ys[next as usize]);
            let crossed = (y0 - half) * (y1 - half) <= 0.0;
            if crossed {
                let t = (half - y0) / (y1 - y0);
                return ((xs[next as usize] - xs[k as usize]) * t + xs[k as usize] - center0)
                    .abs();
            }
            k = next;
        }
    };
    let fwhm0 = (crossing(1) + crossing(-1)).max(f64::MIN_POSITIVE);

    let mut p = [offset0, amplitude0, center0, fwhm0];
    let n = xs.len();
    let mut last_rms = f64::INFINITY;
    for _ in 0..100 {
        let mut jac = Array2::zeros((n, 4));
        let mut resid = vec![0.0; n];
        for i in 0..n {
            let u = 2.0 * (xs[i] - p[2]) / p[3];
            let den = 1.0 + u * u;
            let model = p[0] + p[1] / den;
            resid[i] = ys[i] - model;
            jac[(i, 0)] = 1.0;
            jac[(i, 1)] = 1.0 / den;
            jac[(i, 2)] = 4.0 * p[1] * u / (p[3] * den * den);
            jac[(i, 3)] = 2.0 * p[1] * u * u / (p[3] * den * den);
        }
        let step = linalg::least_squares(&jac, &resid)?;
        for (pk, s) in p.iter_mut().zip(&step) {
            *pk += s;
        }
        p[3] = p[3].abs().max(1e-12 * fwhm0);
        let rms = (resid.iter().map(|r| r * r).sum::<f64>() / n as f64).sqrt();
        let scale = p[1].abs().max(1e-300);
        if (last_rms - rms).abs() <= 1e-12 * scale && step.iter().all(|s| s.is_finite()) {
            break;
        }
        if !rms.is_finite() {
            return Err(Error::Fit("lorentzian fit diverged".into()));
        }
        last_rms = rms;
    }
    if !p.iter().all(|v| v.is_finite()) || p[3] <= 0.0 {
        return Err(Error::Fit("lorentzian fit did not converge".into()));
    }
    Ok(LorentzianFit {
        offset: p[0],
        amplitude: p[1],
        center: p[2],
        fwhm: p[3],
        rms_residual: last_rms,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn odd_polynomial_recovers_synthetic_coefficients() {
        let c1 = Complex64::new(2.0, -0.5);
        let c3 = Complex64::new(-4.0e-3, 1.0e-3);
        let xs: Vec<f64> = (1..=12).map(|k| k as f64 * 0.37).collect();
        let ys: Vec<Complex64> = xs.iter().map(|&x| c1 * x + c3 * x.powi(3)).collect();
        let c = fit_odd_polynomial(&xs, &ys, 2).unwrap();
        assert!((c[0] - c1).norm() < 1e-10 * c1.norm());
        assert!((c[1] - c3).norm() < 1e-8 * c3.norm());
        assert!(c[2].norm() < 1e-12);
    }

    #[test]
    fn purely_linear_data_has_no_nonlinear_terms() {
        let c1 = Complex64::new(1.0, 3.0);
        let xs: Vec<f64> = (1..=10).map(|k| k as f64).collect();
        let ys: Vec<Complex64> = xs.iter().map(|&x| c1 * x).collect();
        let c = fit_odd_polynomial(&xs, &ys, 2).unwrap();
        assert!((c[0] - c1).norm() < 1e-12 * c1.norm());
        assert!(c[1].norm() < 1e-12);
        assert!(c[2].norm() < 1e-12);
    }

    #[test]
    fn linear_fit_reference() {
        let xs = [0.0, 1.0, 2.0, 3.0];
        let ys = [1.0, 3.0, 5.0, 7.0];
        let (slope, intercept, r2) = linear_fit(&xs, &ys).unwrap();
        assert_abs_diff_eq!(slope, 2.0, epsilon = 1e-12);
        assert_abs_diff_eq!(intercept, 1.0, epsilon = 1e-12);
        assert_abs_diff_eq!(r2, 1.0, epsilon = 1e-12);
    }

    #[test]
    fn lorentzian_fit_recovers_peak_and_dip() {
        let xs: Vec<f64> = (-200..=200).map(|k| k as f64 * 1e3).collect();
        for amp in [3.0e-6, -2.0e-6] {
            let (x0, w, off) = (1.7e4, 6.4e4, 5.0e-7);
            let ys: Vec<f64> = xs
                .iter()
                .map(|&x| {
                    let u = 2.0 * (x - x0) / w;
                    off + amp / (1.0 + u * u)
                })
                .collect();
            let fit = lorentzian_fit(&xs, &ys).unwrap();
            assert_abs_diff_eq!(fit.offset, off, epsilon = 1e-12);
            assert_abs_diff_eq!(fit.amplitude, amp, epsilon = 1e-10 * amp.abs());
            assert_abs_diff_eq!(fit.center, x0, epsilon = 1.0);
            assert_abs_diff_eq!(fit.fwhm, w, epsilon = 1e-6 * w);
        }
    }
}
