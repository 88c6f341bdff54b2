//! Gaussian-process surrogate regression.
//!
//! Anisotropic squared-exponential correlation on inputs rescaled to
//! `[0,1]^d`, constant mean, responses standardized to zero mean and
//! unit variance. The signal variance is profiled out of the marginal
//! likelihood; lengthscales are chosen by multi-start pattern search on
//! the concentrated log likelihood.

use ndarray::{Array1, Array2, ArrayView1, ArrayView2, Axis};
use ndarray_linalg::cholesky::CholeskyInto;
use ndarray_linalg::triangular::SolveTriangularInplace;
use ndarray_linalg::{Diag, UPLO};
use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha12Rng;
use thiserror::Error;

pub const DEFAULT_JITTER: f64 = 1e-8;
pub const MAX_JITTER: f64 = 1e-4;
const THETA_MIN: f64 = 1e-3;
const THETA_MAX: f64 = 10.0;

#[derive(Debug, Error)]
pub enum GpError {
    #[error("covariance matrix is not positive definite after jitter escalation")]
    NonPositiveDefinite,
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("need at least 2 training points, got {0}")]
    InsufficientData(usize),
    #[error("training data contains non-finite values")]
    NonFinite,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PredictiveMoments {
    pub mu: f64,
    pub sigma: f64,
}

/// Fit controls. `bounds` fixes the rescaling box (falls back to the
/// per-column data range); `warm_start` seeds the first local search
/// with a previous lengthscale vector.
#[derive(Debug, Clone)]
pub struct FitConfig {
    pub jitter: f64,
    pub n_starts: usize,
    pub max_evals_per_start: usize,
    pub seed: u64,
    pub bounds: Option<(Vec<f64>, Vec<f64>)>,
    pub warm_start: Option<Vec<f64>>,
}

impl Default for FitConfig {
    fn default() -> Self {
        FitConfig {
            jitter: DEFAULT_JITTER,
            n_starts: 5,
            max_evals_per_start: 25,
            seed: 0,
            bounds: None,
            warm_start: None,
        }
    }
}

/// Fitted surrogate. Immutable; safe to share across threads for
/// prediction.
#[derive(Debug, Clone)]
pub struct GpModel {
    x_scaled: Array2<f64>,
    scale_lo: Vec<f64>,
    scale_span: Vec<f64>,
    y_train: Array1<f64>,
    theta: Vec<f64>,
    tau2: f64,
    jitter: f64,
    /// Lower Cholesky factor of `K = tau2 * (Corr + jitter I)`.
    chol: Array2<f64>,
    /// `K^{ -1} * y_standardized`.
    alpha: Array1<f64>,
    y_mean: f64,
    y_sd: f64,
    degenerate: bool,
    log_lik: f64,
}

pub fn correlation(x: &[f64], z: &[f64], theta: &[f64]) -> f64 {
    assert_eq!(x.len(), z.len());
    assert_eq!(x.len(), theta.len());
    let mut s = 0.0;
    for i in 0..x.len() {
        let d = x[i] - z[i];
        s += d * d / theta[i];
    }
    (-s).exp()
}

fn scaled_correlation(a: ArrayView1<f64>, b: ArrayView1<f64>, theta: &[f64]) -> f64 {
    let mut s = 0.0;
    for i in 0..theta.len() {
        let d = a[i] - b[i];
        s += d * d / theta[i];
    }
    (-s).exp()
}

fn corr_matrix(x: &Array2<f64>, theta: &[f64]) -> Array2<f64> {
    let n = x.nrows();
    let mut c = Array2::<f64>::eye(n);
    for i in 0..n {
        for j in (i + 1)..n {
            let v = scaled_correlation(x.row(i), x.row(j), theta);
            c[[i, j]] = v;
            c[[j, i]] = v;
        }
    }
    c
}

struct CholFit {
    chol_corr: Array2<f64>,
    jitter: f64,
}

/// Cholesky of `Corr + jitter I` with x10 jitter escalation.
fn chol_with_escalation(
    x: &Array2<f64>,
    theta: &[f64],
    base_jitter: f64,
) -> Result<CholFit, GpError> {
    let corr = corr_matrix(x, theta);
    let mut jitter = base_jitter;
    loop {
        let mut k = corr.clone();
        for i in 0..k.nrows() {
            k[[i, i]] += jitter;
        }
        match k.cholesky_into(UPLO::Lower) {
            Ok(l) => return Ok(CholFit { chol_corr: l, jitter }),
            Err(_) if jitter < MAX_JITTER => jitter *= 10.0,
            Err(_) => return Err(GpError::NonPositiveDefinite),
        }
    }
}

fn solve_lower(l: &Array2<f64>, rhs: &Array1<f64>) -> Array1<f64> {
    let mut b = rhs
        .clone()
        .into_shape_with_order((rhs.len(), 1))
        .expect("column reshape");
    l.solve_triangular_inplace(UPLO::Lower, Diag::NonUnit, &mut b)
        .expect("triangular solve");
    b.remove_axis(Axis(1))
}

fn solve_upper_t(l: &Array2<f64>, rhs: &Array1<f64>) -> Array1<f64> {
    // Solves L^T z = rhs given lower factor L.
    let lt = l.t().to_owned();
    let mut b = rhs
        .clone()
        .into_shape_with_order((rhs.len(), 1))
        .expect("column reshape");
    lt.solve_triangular_inplace(UPLO::Upper, Diag::NonUnit, &mut b)
        .expect("triangular solve");
    b.remove_axis(Axis(1))
}

/// Concentrated log marginal likelihood of standardized responses for a
/// fixed lengthscale vector. Returns `None` when the factorization
/// fails outright.
fn concentrated_ll(
    x: &Array2<f64>,
    y_std: &Array1<f64>,
    theta: &[f64],
    jitter: f64,
) -> Option<f64> {
    let n = x.nrows() as f64;
    let fit = chol_with_escalation(x, theta, jitter).ok()?;
    let v = solve_lower(&fit.chol_corr, y_std);
    let quad = v.dot(&v);
    if quad <= 0.0 {
        return None;
    }
    let tau2 = quad / n;
    let log_det: f64 = fit.chol_corr.diag().iter().map(|d| 2.0 * d.ln()).sum();
    Some(-0.5 * (n * tau2.ln() + log_det + n * (1.0 + (2.0 * std::f64::consts::PI).ln())))
}

/// Pattern search over log-lengthscales within `[THETA_MIN, THETA_MAX]`.
fn local_search(
    x: &Array2<f64>,
    y_std: &Array1<f64>,
    start: &[f64],
    jitter: f64,
    max_evals: usize,
) -> (Vec<f64>, f64) {
    let d = start.len();
    let lo = THETA_MIN.ln();
    let hi = THETA_MAX.ln();
    let mut z: Vec<f64> = start.iter().map(|t| t.ln().clamp(lo, hi)).collect();
    let theta_of = |z: &[f64]| z.iter().map(|v| v.exp()).collect::<Vec<f64>>();
    let mut best = concentrated_ll(x, y_std, &theta_of(&z), jitter).unwrap_or(f64::NEG_INFINITY);
    let mut evals = 1usize;
    let mut step = 1.0f64;
    while step > 0.02 && evals < max_evals {
        let mut improved = false;
        for i in 0..d {
            for sign in [1.0, -1.0] {
                let zi = (z[i] + sign * step).clamp(lo, hi);
                if zi == z[i] {
                    continue;
                }
                let mut cand = z.clone();
                cand[i] = zi;
                let ll = concentrated_ll(x, y_std, &theta_of(&cand), jitter)
                    .unwrap_or(f64::NEG_INFINITY);
                evals += 1;
                if ll > best {
                    best = ll;
                    z = cand;
                    improved = true;
                }
                if evals >= max_evals {
                    break;
                }
            }
            if evals >= max_evals {
                break;
            }
        }
        if !improved {
            step *= 0.5;
        }
    }
    (theta_of(&z), best)
}

/// Fits a GP to `(x_train, y_train)` by maximizing the concentrated log
/// marginal likelihood over the lengthscales.
pub fn fit(
    x_train: ArrayView2<f64>,
    y_train: ArrayView1<f64>,
    config: &FitConfig,
) -> Result<GpModel, GpError> {
    let n = x_train.nrows();
    let d = x_train.ncols();
    if n < 2 {
        return Err(GpError::InsufficientData(n));
    }
    if x_train.iter().any(|v| !v.is_finite()) || y_train.iter().any(|v| !v.is_finite()) {
        return Err(GpError::NonFinite);
    }

    let (scale_lo, scale_span) = match &config.bounds {
        Some((lo, hi)) => {
            assert_eq!(lo.len(), d);
            let span: Vec<f64> = lo.iter().zip(hi).map(|(l, h)| h - l).collect();
            (lo.clone(), span)
        }
        None => {
            let mut lo = vec![f64::INFINITY; d];
            let mut hi = vec![f64::NEG_INFINITY; d];
            for row in x_train.rows() {
                for (j, &v) in row.iter().enumerate() {
                    lo[j] = lo[j].min(v);
                    hi[j] = hi[j].max(v);
                }
            }
            let span: Vec<f64> = lo
                .iter()
                .zip(&hi)
                .map(|(l, h)| if h - l > 0.0 { h - l } else { 1.0 })
                .collect();
            (lo, span)
        }
    };

    let mut x_scaled = x_train.to_owned();
    for mut row in x_scaled.rows_mut() {
        for j in 0..d {
            row[j] = (row[j] - scale_lo[j]) / scale_span[j];
        }
    }

    let y_mean = y_train.mean().unwrap();
    let y_sd = if n > 1 {
        let ss: f64 = y_train.iter().map(|v| (v - y_mean) * (v - y_mean)).sum();
        (ss / (n as f64 - 1.0)).sqrt()
    } else {
        0.0
    };

    if y_sd <= 1e-12 * (1.0 + y_mean.abs()) {
        // Constant response: predictive mean is the constant, variance 0.
        return Ok(GpModel {
            x_scaled,
            scale_lo,
            scale_span,
            y_train: y_train.to_owned(),
            theta: vec![1.0; d],
            tau2: 0.0,
            jitter: config.jitter,
            chol: Array2::zeros((n, n)),
            alpha: Array1::zeros(n),
            y_mean,
            y_sd: 0.0,
            degenerate: true,
            log_lik: 0.0,
        });
    }

    let y_std: Array1<f64> = y_train.mapv(|v| (v - y_mean) / y_sd);

    // Multi-start: optional warm start plus seeded random starts in
    // log-lengthscale space.
    let mut rng = ChaCha12Rng::seed_from_u64(config.seed);
    let mut starts: Vec<Vec<f64>> = Vec::new();
    if let Some(w) = &config.warm_start {
        assert_eq!(w.len(), d);
        starts.push(w.clone());
    }
    while starts.len() < config.n_starts.max(1) {
        let t: Vec<f64> = (0..d)
            .map(|_| {
                let u: f64 = rng.random_range(0.0..1.0);
                (THETA_MIN.ln() + u * (THETA_MAX.ln() - THETA_MIN.ln())).exp()
            })
            .collect();
        starts.push(t);
    }

    let mut best_theta = starts[0].clone();
    let mut best_ll = f64::NEG_INFINITY;
    for s in &starts {
        let (theta, ll) = local_search(&x_scaled, &y_std, s, config.jitter, config.max_evals_per_start);
        if ll > best_ll {
            best_ll = ll;
            best_theta = theta;
        }
    }
    if !best_ll.is_finite() {
        return Err(GpError::NonPositiveDefinite);
    }

    let fit = chol_with_escalation(&x_scaled, &best_theta, config.jitter)?;
    let v = solve_lower(&fit.chol_corr, &y_std);
    let tau2 = v.dot(&v) / n as f64;
    let w = solve_upper_t(&fit.chol_corr, &v); // (Corr + jI)^{-1} y_std
    let alpha = w.mapv(|u| u / tau2);
    let chol = fit.chol_corr.mapv(|u| u * tau2.sqrt());

    Ok(GpModel {
        x_scaled,
        scale_lo,
        scale_span,
        y_train: y_train.to_owned(),
        theta: best_theta,
        tau2,
        jitter: fit.jitter,
        chol,
        alpha,
        y_mean,
        y_sd,
        degenerate: false,
        log_lik: best_ll,
    })
}

impl GpModel {
    pub fn dim(&self) -> usize {
        self.scale_lo.len()
    }

    pub fn n_train(&self) -> usize {
        self.x_scaled.nrows()
    }

    pub fn theta(&self) -> &[f64] {
        &self.theta
    }

    pub fn tau2(&self) -> f64 {
        self.tau2
    }

    pub fn jitter(&self) -> f64 {
        self.jitter
    }

    pub fn is_degenerate(&self) -> bool {
        self.degenerate
    }

    pub fn chol(&self) -> &Array2<f64> {
        &self.chol
    }

    pub fn alpha(&self) -> &Array1<f64> {
        &self.alpha
    }

    pub fn y_train(&self) -> &Array1<f64> {
        &self.y_train
    }

    fn scale_point(&self, x: &[f64]) -> Result<Vec<f64>, GpError> {
        if x.len() != self.dim() {
            return Err(GpError::DimensionMismatch {
                expected: self.dim(),
                got: x.len(),
            });
        }
        Ok(x.iter()
            .enumerate()
            .map(|(j, &v)| (v - self.scale_lo[j]) / self.scale_span[j])
            .collect())
    }

    pub fn predict(&self, x: &[f64]) -> Result<PredictiveMoments, GpError> {
        Ok(self.predict_batch(std::slice::from_ref(&x.to_vec()))?[0])
    }

    /// Predictive moments at many points with one batched pair of
    /// triangular solves.
    pub fn predict_batch(&self, xs: &[Vec<f64>]) -> Result<Vec<PredictiveMoments>, GpError> {
        if self.degenerate {
            let mut out = Vec::with_capacity(xs.len());
            for x in xs {
                if x.len() != self.dim() {
                    return Err(GpError::DimensionMismatch {
                        expected: self.dim(),
                        got: x.len(),
                    });
                }
                out.push(PredictiveMoments {
                    mu: self.y_mean,
                    sigma: 0.0,
                });
            }
            return Ok(out);
        }
        let n = self.n_train();
        let m = xs.len();
        let mut cross = Array2::<f64>::zeros((n, m));
        for (j, x) in xs.iter().enumerate() {
            let xs_scaled = self.scale_point(x)?;
            for i in 0..n {
                let row = self.x_scaled.row(i);
                let mut c = scaled_correlation(row, ArrayView1::from(&xs_scaled), &self.theta);
                // Reinterpolation at training inputs: carry the nugget
                // into the cross term so mu returns y_i exactly there.
                let d2: f64 = row
                    .iter()
                    .zip(&xs_scaled)
                    .map(|(a, b)| (a - b) * (a - b))
                    .sum();
                if d2 < 1e-20 {
                    c += self.jitter;
                }
                cross[[i, j]] = c;
            }
        }
        // mu = y_mean + y_sd * (tau2 * c)^T alpha
        let k = cross.mapv(|v| v * self.tau2);
        let mu_std = k.t().dot(&self.alpha);
        // sigma^2 = y_sd^2 * (tau2 * (1 + jitter) - v^T v), v = L^{-1} k
        let mut v = k;
        self.chol
            .solve_triangular_inplace(UPLO::Lower, Diag::NonUnit, &mut v)
            .expect("triangular solve");
        let prior_var = self.tau2 * (1.0 + self.jitter);
        let mut out = Vec::with_capacity(m);
        for j in 0..m {
            let vtv: f64 = v.column(j).iter().map(|u| u * u).sum();
            let s2 = (prior_var - vtv).max(0.0) * self.y_sd * self.y_sd;
            out.push(PredictiveMoments {
                mu: self.y_mean + self.y_sd * mu_std[j],
                sigma: s2.sqrt(),
            });
        }
        Ok(out)
    }

    /// Analytic gradient of the predictive mean in raw input units.
    pub fn predict_mean_gradient(&self, x: &[f64]) -> Result<Vec<f64>, GpError> {
        let d = self.dim();
        if self.degenerate {
            return Ok(vec![0.0; d]);
        }
        let xs = self.scale_point(x)?;
        let n = self.n_train();
        let mut grad = vec![0.0; d];
        for i in 0..n {
            let row = self.x_scaled.row(i);
            let ci = scaled_correlation(row, ArrayView1::from(&xs), &self.theta);
            let w = self.tau2 * ci * self.alpha[i];
            for j in 0..d {
                // d corr / d x_j, chained through the [0,1] rescaling
                grad[j] += w * (-2.0 * (xs[j] - row[j]) / self.theta[j]) / self.scale_span[j];
            }
        }
        for g in &mut grad {
            *g *= self.y_sd;
        }
        Ok(grad)
    }

    /// Log marginal likelihood of the standardized responses.
    pub fn log_likelihood(&self) -> f64 {
        if self.degenerate {
            return self.log_lik;
        }
        let n = self.n_train() as f64;
        let y_std = self.y_train.mapv(|v| (v - self.y_mean) / self.y_sd);
        let quad = y_std.dot(&self.alpha);
        let log_det: f64 = self.chol.diag().iter().map(|v| 2.0 * v.ln()).sum();
        -0.5 * (quad + log_det + n * (2.0 * std::f64::consts::PI).ln())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use ndarray::array;

    fn close(a: f64, b: f64, tol: f64) -> bool {
        (a - b).abs() <= tol
    }

    #[test]
    fn correlation_basics() {
        assert_eq!(correlation(&[0.3, 0.7], &[0.3, 0.7], &[1.0, 1.0]), 1.0);
        assert!(close(
            correlation(&[0.0], &[1.0], &[1.0]),
            (-1.0f64).exp(),
            1e-15
        ));
        let x = [0.2, 0.9];
        let z = [0.4, 0.1];
        let th = [0.3, 2.0];
        assert_eq!(correlation(&x, &z, &th), correlation(&z, &x, &th));
    }

    // 2x2 system with fixed theta=1, checked against a hand Cholesky.
    #[test]
    fn two_point_cholesky_by_hand() {
        let x = array![[0.0], [1.0]];
        // Standardization of y = (0, 1): mean 1/2, sd 1/sqrt(2).
        let y_std = array![-std::f64::consts::FRAC_1_SQRT_2, std::f64::consts::FRAC_1_SQRT_2];
        let j = 1e-8;
        let fit = chol_with_escalation(&x, &[1.0], j).unwrap();
        let r = (-1.0f64).exp();
        let l11 = (1.0 + j).sqrt();
        let l21 = r / l11;
        let l22 = (1.0 + j - l21 * l21).sqrt();
        assert!(close(fit.chol_corr[[0, 0]], l11, 1e-12));
        assert!(close(fit.chol_corr[[1, 0]], l21, 1e-12));
        assert!(close(fit.chol_corr[[1, 1]], l22, 1e-12));
        assert_eq!(fit.chol_corr[[0, 1]], 0.0);

        // Hand-computed concentrated likelihood at theta = 1.
        let v = solve_lower(&fit.chol_corr, &y_std);
        let tau2 = v.dot(&v) / 2.0;
        let log_det = 2.0 * (l11.ln() + l22.ln());
        let want = -0.5
            * (2.0 * tau2.ln() + log_det + 2.0 * (1.0 + (2.0 * std::f64::consts::PI).ln()));
        let got = concentrated_ll(&x, &y_std, &[1.0], j).unwrap();
        assert!(close(got, want, 1e-12));
    }

    #[test]
    fn constant_response_degenerate() {
        let x = array![[0.0], [0.5], [1.0]];
        let y = array![3.0, 3.0, 3.0];
        let m = fit(x.view(), y.view(), &FitConfig::default()).unwrap();
        assert!(m.is_degenerate());
        let p = m.predict(&[0.25]).unwrap();
        assert_eq!(p.mu, 3.0);
        assert_eq!(p.sigma, 0.0);
    }

    #[test]
    fn too_few_points_rejected() {
        let x = array![[0.0]];
        let y = array![1.0];
        assert!(matches!(
            fit(x.view(), y.view(), &FitConfig::default()),
            Err(GpError::InsufficientData(1))
        ));
    }

    #[test]
    fn interpolates_training_data() {
        let x = array![[0.0, 0.0], [0.3, 0.8], [0.7, 0.2], [1.0, 1.0], [0.5, 0.5]];
        let y = x.map_axis(Axis(1), |r| f64::sin(3.0 * r[0]) + r[1] * r[1]);
        let m = fit(x.view(), y.view(), &FitConfig::default()).unwrap();
        for (row, &yi) in x.rows().into_iter().zip(y.iter()) {
            let p = m.predict(row.as_slice().unwrap()).unwrap();
            assert!(
                (p.mu - yi).abs() <= 1e-6 * m.y_sd,
                "mu {} vs y {}",
                p.mu,
                yi
            );
            assert!(p.sigma <= 1e-3 * m.y_sd, "sigma {}", p.sigma);
        }
    }

    #[test]
    fn prior_reversion_far_from_data() {
        let x = array![[0.0], [0.1], [0.2]];
        let y = array![1.0, 2.0, 0.5];
        let cfg = FitConfig {
            bounds: Some((vec![0.0], vec![1.0])),
            ..FitConfig::default()
        };
        let m = fit(x.view(), y.view(), &cfg).unwrap();
        let p = m.predict(&[1e6]).unwrap();
        assert!(close(p.mu, m.y_mean, 1e-9 * (1.0 + m.y_mean.abs())));
        let prior_sd = m.y_sd * (m.tau2 * (1.0 + m.jitter())).sqrt();
        assert!(close(p.sigma, prior_sd, 1e-9 * prior_sd));
    }

    #[test]
    fn chol_reconstructs_covariance() {
        let x = array![[0.0, 0.1], [0.4, 0.9], [0.8, 0.3], [0.2, 0.6]];
        let y = array![0.0, 1.0, -0.5, 2.0];
        let m = fit(x.view(), y.view(), &FitConfig::default()).unwrap();
        let k = m.chol().dot(&m.chol().t());
        // Rebuild K = tau2 (Corr + jitter I) on the scaled inputs.
        let mut want = corr_matrix(&m.x_scaled, m.theta());
        for i in 0..want.nrows() {
            want[[i, i]] += m.jitter();
        }
        want.mapv_inplace(|v| v * m.tau2());
        let num: f64 = (&k - &want).iter().map(|v| v * v).sum::<f64>().sqrt();
        let den: f64 = want.iter().map(|v| v * v).sum::<f64>().sqrt();
        assert!(num / den <= 1e-8, "relative frobenius {}", num / den);
    }

    #[test]
    fn log_likelihood_matches_concentrated_at_optimum() {
        let x = array![[0.0], [0.25], [0.6], [1.0]];
        let y = array![0.3, -0.2, 0.9, 0.1];
        let m = fit(x.view(), y.view(), &FitConfig::default()).unwrap();
        // With tau2 profiled, the quadratic form equals n, so the full
        // likelihood must agree with the concentrated one at theta_hat.
        let y_std = y.mapv(|v| (v - m.y_mean) / m.y_sd);
        let quad = y_std.dot(m.alpha());
        assert!(close(quad, 4.0, 1e-8));
        let ll = m.log_likelihood();
        let want = concentrated_ll(&m.x_scaled, &y_std, m.theta(), DEFAULT_JITTER).unwrap();
        assert!(close(ll, want, 1e-8), "{ll} vs {want}");
    }

    #[test]
    fn fit_beats_every_start_point() {
        let x = array![[0.0, 0.0], [0.2, 0.9], [0.5, 0.4], [0.9, 0.1], [0.7, 0.8], [0.3, 0.3]];
        let y = x.map_axis(Axis(1), |r| r[0] * r[0] - r[1]);
        let cfg = FitConfig {
            seed: 7,
            ..FitConfig::default()
        };
        let m = fit(x.view(), y.view(), &cfg).unwrap();
        let y_std = y.mapv(|v| (v - m.y_mean) / m.y_sd);
        let mut rng = ChaCha12Rng::seed_from_u64(7);
        for _ in 0..5 {
            let t: Vec<f64> = (0..2)
                .map(|_| {
                    let u: f64 = rng.random_range(0.0..1.0);
                    (THETA_MIN.ln() + u * (THETA_MAX.ln() - THETA_MIN.ln())).exp()
                })
                .collect();
            let ll = concentrated_ll(&m.x_scaled, &y_std, &t, DEFAULT_JITTER).unwrap();
            assert!(m.log_lik >= ll - 1e-9, "start {t:?} beats fit");
        }
    }

    #[test]
    fn doubling_theta_never_beats_fit() {
        let x = array![[0.0], [0.2], [0.45], [0.7], [1.0]];
        let y = array![0.0, 0.9, 0.2, -0.7, 0.4];
        let m = fit(x.view(), y.view(), &FitConfig::default()).unwrap();
        let y_std = y.mapv(|v| (v - m.y_mean) / m.y_sd);
        for factor in [0.5, 2.0] {
            let t: Vec<f64> = m
                .theta()
                .iter()
                .map(|v| (v * factor).clamp(THETA_MIN, THETA_MAX))
                .collect();
            if t == m.theta() {
                continue;
            }
            let ll = concentrated_ll(&m.x_scaled, &y_std, &t, DEFAULT_JITTER)
                .unwrap_or(f64::NEG_INFINITY);
            // Pattern-search tolerance: step resolves to ~2% in log space.
            assert!(ll <= m.log_lik + 0.05, "theta*{factor} improves by too much");
        }
    }

    #[test]
    fn variance_nonnegative_on_random_points() {
        let x = array![[0.1, 0.2], [0.8, 0.4], [0.45, 0.95], [0.3, 0.6], [0.9, 0.9]];
        let y = array![1.0, -2.0, 0.4, 0.0, 3.0];
        let m = fit(x.view(), y.view(), &FitConfig::default()).unwrap();
        let mut rng = ChaCha12Rng::seed_from_u64(11);
        let pts: Vec<Vec<f64>> = (0..1000)
            .map(|_| vec![rng.random_range(0.0..1.0), rng.random_range(0.0..1.0)])
            .collect();
        for p in m.predict_batch(&pts).unwrap() {
            assert!(p.sigma >= 0.0);
            assert!(p.mu.is_finite());
        }
    }

    #[test]
    fn mean_gradient_matches_finite_differences() {
        let x = array![[0.05, 0.1], [0.85, 0.35], [0.4, 0.92], [0.33, 0.55], [0.7, 0.7], [0.15, 0.8]];
        let y = x.map_axis(Axis(1), |r| f64::cos(2.0 * r[0] + r[1]) + r[0]);
        let m = fit(x.view(), y.view(), &FitConfig::default()).unwrap();
        let mut rng = ChaCha12Rng::seed_from_u64(3);
        let h = 1e-5;
        for _ in 0..10 {
            let p = vec![
                rng.random_range(0.1..0.9),
                rng.random_range(0.1..0.9),
            ];
            let grad = m.predict_mean_gradient(&p).unwrap();
            for j in 0..2 {
                let mut hi = p.clone();
                let mut lo = p.clone();
                hi[j] += h;
                lo[j] -= h;
                let fd = (m.predict(&hi).unwrap().mu - m.predict(&lo).unwrap().mu) / (2.0 * h);
                let scale = fd.abs().max(grad[j].abs()).max(1e-8);
                assert!(
                    (grad[j] - fd).abs() / scale <= 1e-3,
                    "grad {} vs fd {}",
                    grad[j],
                    fd
                );
            }
        }
    }

    #[test]
    fn dimension_mismatch_rejected() {
        let x = array![[0.0], [1.0]];
        let y = array![0.0, 1.0];
        let m = fit(x.view(), y.view(), &FitConfig::default()).unwrap();
        assert!(matches!(
            m.predict(&[0.0, 0.0]),
            Err(GpError::DimensionMismatch { .. })
        ));
    }

    // Duplicating a training point with the same response leaves the
    // fitted point-averaged variance term no larger.
    #[test]
    fn duplicate_point_absorbed_by_jitter() {
        let x = array![[0.0], [0.5], [1.0]];
        let y = array![0.0, 1.0, 0.5];
        let m1 = fit(x.view(), y.view(), &FitConfig::default()).unwrap();
        let x2 = array![[0.0], [0.5], [1.0], [0.5]];
        let y2 = array![0.0, 1.0, 0.5, 1.0];
        let m2 = fit(x2.view(), y2.view(), &FitConfig::default()).unwrap();
        assert!(m2.tau2() <= m1.tau2() * 1.5 + 1e-9);
        let p = m2.predict(&[0.5]).unwrap();
        assert!((p.mu - 1.0).abs() <= 1e-4 * (1.0 + m2.y_sd));
    }
}
