//! Small damped Gauss–Newton (Levenberg–Marquardt) engine for weighted
//! nonlinear least squares with analytic Jacobians.
//!
//! The model is supplied as a closure that fills a residual vector
//! r_i = (y_i − m_i(p)) / σ_i and the corresponding Jacobian
//! J_ik = ∂r_i/∂p_k. Parameters are internally scaled by their initial
//! guesses so that disparate magnitudes (e.g. rad/s frequencies next to
//! dimensionless ratios) do not skew the damping.
//!
//! Covariance: (JᵀJ)⁻¹ in the scaled space, mapped back out. When the caller
//! supplies measurement sigmas, residuals are already whitened and the
//! covariance is used as-is; when no sigmas are known (unit weights) the
//! covariance is scaled by the reduced χ² so the quoted standard errors
//! reflect the observed scatter.

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};

/// Knobs for [`least_squares`]. `Default` is suitable for the fits in this
/// crate: 200 iterations, 1e-12 relative step tolerance.
#[derive(Debug, Clone, Copy)]
pub struct FitOptions {
    pub max_iterations: usize,
    /// Convergence: relative scaled-parameter step below this ends the fit.
    pub step_tolerance: f64,
    /// Convergence: relative χ² improvement below this (on an accepted step)
    /// ends the fit.
    pub chi_square_tolerance: f64,
    /// Whether the caller whitened the residuals with real measurement
    /// sigmas. If false, the covariance is rescaled by the reduced χ².
    pub sigmas_supplied: bool,
}

impl Default for FitOptions {
    fn default() -> Self {
        FitOptions {
            max_iterations: 200,
            step_tolerance: 1e-12,
            chi_square_tolerance: 1e-12,
            sigmas_supplied: false,
        }
    }
}

/// Result of a converged fit.
#[derive(Debug, Clone)]
pub struct FitOutcome {
    pub parameters: Vec<f64>,
    /// 1σ standard errors (sqrt of the covariance diagonal).
    pub standard_errors: Vec<f64>,
    /// Full parameter covariance matrix, row-major `n_params × n_params`.
    pub covariance: Vec<Vec<f64>>,
    /// Final χ² = Σ r_i².
    pub chi_square: f64,
    /// χ² / (n_points − n_params).
    pub reduced_chi_square: f64,
    pub iterations: usize,
}

/// Minimize Σ r_i(p)² starting from `initial`.
///
/// `eval(p, r, jac)` must fill `r` (length `n_residuals`) and, when `jac` is
/// `Some`, the row-major `n_residuals × n_params` Jacobian ∂r_i/∂p_k. It may
/// return an error to veto a parameter point (e.g. a non-physical region);
/// vetoed trial steps are treated as failed and the damping increases, but a
/// veto at the initial guess aborts the fit.
pub fn least_squares<F>(
    initial: &[f64],
    n_residuals: usize,
    options: &FitOptions,
    mut eval: F,
) -> Result<FitOutcome>
where
    F: FnMut(&[f64], &mut [f64], Option<&mut [f64]>) -> Result<()>,
{
    let n_params = initial.len();
    if n_params == 0 {
        return Err(Error::InvalidArgument("fit needs at least one parameter".into()));
    }
    if n_residuals <= n_params {
        return Err(Error::IllConditioned(format!(
            "{n_residuals} residuals cannot constrain {n_params} parameters"
        )));
    }
    // Scale by the initial guess; a zero initial value gets unit scale.
    let scale: Vec<f64> = initial
        .iter()
        .map(|&p| if p.abs() > 0.0 { p.abs() } else { 1.0 })
        .collect();
    let unscale = |q: &DVector<f64>| -> Vec<f64> {
        q.iter().zip(&scale).map(|(&qi, &si)| qi * si).collect()
    };

    let mut q = DVector::from_iterator(n_params, initial.iter().zip(&scale).map(|(&p, &s)| p / s));
    let mut residuals = vec![0.0; n_residuals];
    let mut jac_flat = vec![0.0; n_residuals * n_params];

    let compute = |q: &DVector<f64>,
                   residuals: &mut [f64],
                   jac_flat: Option<&mut [f64]>,
                   eval: &mut F|
     -> Result<f64> {
        let p = unscale(q);
        eval(&p, residuals, jac_flat)?;
        let chi2: f64 = residuals.iter().map(|r| r * r).sum();
        if !chi2.is_finite() {
            return Err(Error::IllConditioned(
                "model produced non-finite residuals".into(),
            ));
        }
        Ok(chi2)
    };

    let mut chi2 = compute(&q, &mut residuals, Some(&mut jac_flat), &mut eval)?;
    let mut lambda = 1e-3;
    let mut iterations = 0;

    for iter in 1..=options.max_iterations {
        iterations = iter;
        // Scaled Jacobian: ∂r/∂q_k = ∂r/∂p_k · s_k.
        let mut jac = DMatrix::from_row_slice(n_residuals, n_params, &jac_flat);
        for (k, &s) in scale.iter().enumerate() {
            let mut col = jac.column_mut(k);
            col *= s;
        }
        let jtj = jac.transpose() * &jac;
        let r = DVector::from_column_slice(&residuals);
        let jtr = jac.transpose() * r;

        let mut accepted = false;
        for _ in 0..30 {
            // (JᵀJ + λ diag(JᵀJ)) δ = −Jᵀ r
            let mut damped = jtj.clone();
            for k in 0..n_params {
                let d = jtj[(k, k)];
                damped[(k, k)] = d + lambda * if d > 0.0 { d } else { 1.0 };
            }
            let delta = match damped.cholesky() {
                Some(ch) => ch.solve(&(-&jtr)),
                None => {
                    lambda *= 10.0;
                    continue;
                }
            };
            let q_trial = &q + &delta;
            let mut r_trial = vec![0.0; n_residuals];
            let mut j_trial = vec![0.0; n_residuals * n_params];
            match compute(&q_trial, &mut r_trial, Some(&mut j_trial), &mut eval) {
                Ok(chi2_trial) if chi2_trial <= chi2 => {
                    let step = delta.amax() / q_trial.amax().max(1e-300);
                    let improvement = (chi2 - chi2_trial) / chi2.max(1e-300);
                    q = q_trial;
                    residuals = r_trial;
                    jac_flat = j_trial;
                    chi2 = chi2_trial;
                    lambda = (lambda * 0.1).max(1e-12);
                    accepted = true;
                    if step < options.step_tolerance
                        || improvement < options.chi_square_tolerance
                    {
                        return finalize(
                            &unscale(&q),
                            &scale,
                            &jac_flat,
                            n_residuals,
                            n_params,
                            chi2,
                            iterations,
                            options,
                        );
                    }
                    break;
                }
                _ => {
                    lambda *= 10.0;
                    if lambda > 1e12 {
                        break;
                    }
                }
            }
        }
        if !accepted {
            // Damping saturated without improvement: treat the current point
            // as the minimum if the gradient is already tiny, else fail.
            let grad_norm = jtr.amax();
            if grad_norm < 1e-8 * chi2.max(1.0) {
                return finalize(
                    &unscale(&q),
                    &scale,
                    &jac_flat,
                    n_residuals,
                    n_params,
                    chi2,
                    iterations,
                    options,
                );
            }
            return Err(Error::FitDidNotConverge {
                iterations,
                chi_square: chi2,
            });
        }
    }
    Err(Error::FitDidNotConverge {
        iterations,
        chi_square: chi2,
    })
}

#[allow(clippy::too_many_arguments)]
fn finalize(
    parameters: &[f64],
    scale: &[f64],
    jac_flat: &[f64],
    n_residuals: usize,
    n_params: usize,
    chi_square: f64,
    iterations: usize,
    options: &FitOptions,
) -> Result<FitOutcome> {
    let mut jac = DMatrix::from_row_slice(n_residuals, n_params, jac_flat);
    for (k, &s) in scale.iter().enumerate() {
        let mut col = jac.column_mut(k);
        col *= s;
    }
    let jtj = jac.transpose() * &jac;
    let dof = (n_residuals - n_params) as f64;
    let reduced = chi_square / dof;
    let cov_scaled = jtj.try_inverse().ok_or_else(|| {
        Error::IllConditioned(
            "normal matrix is singular at the optimum; parameters are degenerate".into(),
        )
    })?;
    // Map back to unscaled parameters: cov_p = S · cov_q · S.
    let factor = if options.sigmas_supplied { 1.0 } else { reduced };
    let mut covariance = vec![vec![0.0; n_params]; n_params];
    for i in 0..n_params {
        for j in 0..n_params {
            covariance[i][j] = cov_scaled[(i, j)] * scale[i] * scale[j] * factor;
        }
    }
    let standard_errors = (0..n_params).map(|i| covariance[i][i].sqrt()).collect();
    Ok(FitOutcome {
        parameters: parameters.to_vec(),
        standard_errors,
        covariance,
        chi_square,
        reduced_chi_square: reduced,
        iterations,
    })
}
