//! Expected improvement and its constrained extension.
//!
//! At unevaluated inputs the feasibility indicator is replaced by the
//! product of per-constraint normal CDFs under independent constraint
//! surrogates; before any feasible point has been observed the
//! acquisition falls back to the feasibility probability alone.

use std::f64::consts::PI;

/// Best objective observed so far among feasible points, if any.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Incumbent {
    pub f_min: f64,
    pub feasible_exists: bool,
}

impl Incumbent {
    pub fn none() -> Self {
        Incumbent {
            f_min: f64::INFINITY,
            feasible_exists: false,
        }
    }

    pub fn feasible(f_min: f64) -> Self {
        Incumbent {
            f_min,
            feasible_exists: true,
        }
    }
}

/// Standard normal density.
pub fn normal_pdf(z: f64) -> f64 {
    (-0.5 * z * z).exp() / (2.0 * PI).sqrt()
}

/// Standard normal CDF via erfc; absolute error well below 1e-12 on
/// |z| <= 8.
pub fn normal_cdf(z: f64) -> f64 {
    0.5 * libm::erfc(-z / std::f64::consts::SQRT_2)
}

/// Closed-form expected improvement E[max(0, f_min - Y)] for
/// Y ~ Normal(mu, sigma^2). The sigma = 0 limit is the deterministic
/// improvement max(f_min - mu, 0).
pub fn expected_improvement(mu: f64, sigma: f64, f_min: f64) -> f64 {
    debug_assert!(sigma >= 0.0);
    let diff = f_min - mu;
    if sigma == 0.0 {
        return diff.max(0.0);
    }
    let z = diff / sigma;
    (diff * normal_cdf(z) + sigma * normal_pdf(z)).max(0.0)
}

/// Probability that every constraint is satisfied under independent
/// normal predictive distributions; empty constraint sets yield 1.
pub fn prob_feasible(mu_c: &[f64], sigma_c: &[f64]) -> f64 {
    debug_assert_eq!(mu_c.len(), sigma_c.len());
    let mut p = 1.0;
    for (&m, &s) in mu_c.iter().zip(sigma_c) {
        debug_assert!(s >= 0.0);
        let factor = if s == 0.0 {
            if m <= 0.0 {
                1.0
            } else {
                0.0
            }
        } else {
            normal_cdf(-m / s)
        };
        p *= factor;
    }
    p
}

/// Expected feasible improvement. With no feasible incumbent the
/// feasibility probability alone drives the search.
pub fn efi(mu: f64, sigma: f64, incumbent: Incumbent, mu_c: &[f64], sigma_c: &[f64]) -> f64 {
    let pf = prob_feasible(mu_c, sigma_c);
    if incumbent.feasible_exists {
        expected_improvement(mu, sigma, incumbent.f_min) * pf
    } else {
        pf
    }
}
