//! Angular integrals behind the meridian-plane Biot–Savart kernels.
//!
//! With `D = (r − ρ)² + ζ²` and the substitution `φ = 2ψ`, the kernels reduce
//! to integrals over `ψ ∈ [0, π/2]` against `[D + 4rρ sin²ψ]^{-3/2}`:
//!
//! ```text
//! Γ₁ =  (ζ/π) ∫ (1 − 2 sin²ψ)          / [D + 4rρ sin²ψ]^{3/2} dψ
//! Γ₂ = −(1/π) ∫ ((ρ − r) + 2r sin²ψ)   / [D + 4rρ sin²ψ]^{3/2} dψ
//! Γ₃ =  (1/π) ∫ ((r − ρ) + 2ρ sin²ψ)   / [D + 4rρ sin²ψ]^{3/2} dψ
//! ```
//!
//! For `K = 4rρ/D ≫ 1` the integrands have a boundary layer of width
//! `K^{-1/2}` at `ψ = 0`; the integration starts from panels graded
//! geometrically away from it.

use std::f64::consts::{FRAC_PI_2, PI};

use serde::Serialize;

use crate::error::{invalid, Error, Result};
use crate::quad::{integrate, integrate_vec, Estimate, Tolerance, VecEstimate};

/// Default subdivision budget per angular integral.
pub const DEFAULT_MAX_PANELS: usize = 1 << 14;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct AngularIntegralSpec {
    pub k: f64,
    pub beta: f64,
    pub tol: f64,
}

impl AngularIntegralSpec {
    pub fn new(k: f64, beta: f64, tol: f64) -> Result<Self> {
        if !(k >= 0.0 && k.is_finite()) {
            return Err(invalid(format!("modulus K must be finite and >= 0, got {k}")));
        }
        if !(beta >= 1.0 && beta.is_finite()) {
            return Err(invalid(format!("denominator power must be >= 1, got {beta}")));
        }
        if !(tol > 0.0) {
            return Err(invalid(format!("tolerance must be positive, got {tol}")));
        }
        Ok(Self { k, beta, tol })
    }
}

/// Values of the three kernels at one `(r, ρ, ζ)` with absolute error estimates.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct KernelTriple {
    pub gamma1: f64,
    pub gamma2: f64,
    pub gamma3: f64,
    pub err1: f64,
    pub err2: f64,
    pub err3: f64,
}

/// Breakpoints on `[0, π/2]` graded geometrically from `width` at zero.
pub(crate) fn boundary_layer_breaks(width: f64) -> Vec<f64> {
    let mut out = vec![0.0];
    if width < 0.25 {
        let mut x = width;
        while x < FRAC_PI_2 / 2.0 {
            out.push(x);
            x *= 2.0;
        }
    }
    out.push(FRAC_PI_2);
    out
}

/// `I(K, β) = ∫₀^{π/2} (1 + K sin²φ)^{−β/2} dφ`.
pub fn angular_integral(spec: &AngularIntegralSpec) -> Result<Estimate> {
    angular_integral_budget(spec, DEFAULT_MAX_PANELS)
}

pub fn angular_integral_budget(spec: &AngularIntegralSpec, max_panels: usize) -> Result<Estimate> {
    let AngularIntegralSpec { k, beta, tol } = *spec;
    let breaks = boundary_layer_breaks(if k > 0.0 { k.sqrt().recip() } else { 1.0 });
    let half = -0.5 * beta;
    let est = integrate(
        |phi| {
            let s = phi.sin();
            (1.0 + k * s * s).powf(half)
        },
        &breaks,
        Tolerance::absolute(tol),
        max_panels,
    );
    if est.converged {
        Ok(est)
    } else {
        Err(Error::ToleranceNotReached { estimate: est.value, error: est.error, tol })
    }
}

/// `I(K, β)` divided by the envelope `min{1, K^{−δ/2}}` (β = 1) or
/// `min{1, K^{−1/2}}` (β > 1).
pub fn angular_bound_ratio(spec: &AngularIntegralSpec, delta: f64) -> Result<f64> {
    let exponent = if spec.beta == 1.0 {
        if !(0.0..1.0).contains(&delta) {
            return Err(invalid(format!("beta = 1 needs 0 <= delta < 1, got {delta}")));
        }
        delta / 2.0
    } else {
        0.5
    };
    let envelope = if spec.k <= 1.0 { 1.0 } else { spec.k.powf(-exponent) };
    Ok(angular_integral(spec)?.value / envelope)
}

fn check_off_diagonal(r: f64, rho: f64, zeta: f64) -> Result<()> {
    if !(r >= 0.0 && rho >= 0.0 && r.is_finite() && rho.is_finite() && zeta.is_finite()) {
        return Err(invalid(format!("kernel arguments must be finite with r, rho >= 0: ({r}, {rho}, {zeta})")));
    }
    if (r - rho).powi(2) + zeta * zeta == 0.0 {
        return Err(Error::Diagonal { r });
    }
    Ok(())
}

/// Unchecked reduced-form evaluation; the caller guarantees an off-diagonal point.
pub(crate) fn kernel_estimate(r: f64, rho: f64, zeta: f64, tol: Tolerance, max_panels: usize) -> VecEstimate<3> {
    let d = (r - rho).powi(2) + zeta * zeta;
    let a = 4.0 * r * rho;
    let width = if a > d { (d / a).sqrt() } else { 1.0 };
    let breaks = boundary_layer_breaks(width);
    let mut est = integrate_vec(
        |psi| {
            let s2 = psi.sin().powi(2);
            let q = d + a * s2;
            let inv = 1.0 / (q * q.sqrt());
            [
                zeta * (1.0 - 2.0 * s2) * inv,
                -((rho - r) + 2.0 * r * s2) * inv,
                ((r - rho) + 2.0 * rho * s2) * inv,
            ]
        },
        &breaks,
        Tolerance::new(tol.abs * PI, tol.rel),
        max_panels,
    );
    for c in 0..3 {
        est.value[c] /= PI;
        est.error[c] /= PI;
    }
    est
}

fn into_triple(est: &VecEstimate<3>, tol: f64) -> Result<KernelTriple> {
    let t = KernelTriple {
        gamma1: est.value[0],
        gamma2: est.value[1],
        gamma3: est.value[2],
        err1: est.error[0],
        err2: est.error[1],
        err3: est.error[2],
    };
    if est.converged {
        Ok(t)
    } else {
        let worst = (0..3).max_by(|&i, &j| est.error[i].total_cmp(&est.error[j])).unwrap_or(0);
        Err(Error::ToleranceNotReached { estimate: est.value[worst], error: est.error[worst], tol })
    }
}

/// `Γ₁, Γ₂, Γ₃` at `(r, ρ, ζ)` to absolute tolerance `tol`, computed from
/// the reduced quarter-period form.
pub fn kernel_triple(r: f64, rho: f64, zeta: f64, tol: f64) -> Result<KernelTriple> {
    check_off_diagonal(r, rho, zeta)?;
    if !(tol > 0.0) {
        return Err(invalid(format!("tolerance must be positive, got {tol}")));
    }
    let est = kernel_estimate(r, rho, zeta, Tolerance::absolute(tol), DEFAULT_MAX_PANELS);
    into_triple(&est, tol)
}

/// The same kernels integrated directly over the full period `[0, 2π]`.
/// Slower; kept as the reference the reduced form is checked against.
pub fn kernel_triple_full_period(r: f64, rho: f64, zeta: f64, tol: f64) -> Result<KernelTriple> {
    check_off_diagonal(r, rho, zeta)?;
    let d = (r - rho).powi(2) + zeta * zeta;
    let a = 4.0 * r * rho;
    let width = if a > d { 2.0 * (d / a).sqrt() } else { 2.0 };
    let mut breaks = vec![0.0, PI, 2.0 * PI];
    let mut x = width;
    while x < PI / 2.0 {
        breaks.push(x);
        breaks.push(2.0 * PI - x);
        x *= 2.0;
    }
    let scale = 1.0 / (4.0 * PI);
    let mut est = integrate_vec(
        |phi| {
            // 1 − cosφ written as 2 sin²(φ/2) to keep the near-diagonal
            // differences free of cancellation
            let vers = 2.0 * (0.5 * phi).sin().powi(2);
            let c = 1.0 - vers;
            let q = d + 2.0 * r * rho * vers;
            let inv = 1.0 / (q * q.sqrt());
            [zeta * c * inv, -((rho - r) + r * vers) * inv, ((r - rho) + rho * vers) * inv]
        },
        &breaks,
        Tolerance::absolute(tol / scale),
        DEFAULT_MAX_PANELS,
    );
    for c in 0..3 {
        est.value[c] *= scale;
        est.error[c] *= scale;
    }
    into_triple(&est, tol)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn flat_integrand_gives_quarter_period() {
        for beta in [1.0, 2.0, 3.7] {
            let v = angular_integral(&AngularIntegralSpec::new(0.0, beta, 1e-14).unwrap()).unwrap();
            assert!((v.value - FRAC_PI_2).abs() < 1e-14);
        }
    }

    #[test]
    fn beta_two_closed_form() {
        for k in [1.0, 10.0, 1e4, 1e6] {
            let v = angular_integral(&AngularIntegralSpec::new(k, 2.0, 1e-14).unwrap()).unwrap();
            let exact = FRAC_PI_2 / (1.0f64 + k).sqrt();
            assert!(((v.value - exact) / exact).abs() < 1e-10, "K = {k}");
        }
    }

    #[test]
    fn beta_three_scales_like_inverse_root() {
        let v = angular_integral(&AngularIntegralSpec::new(1e8, 3.0, 1e-16).unwrap()).unwrap();
        assert!((v.value * 1e4 - 1.0).abs() < 1e-3);
    }

    #[test]
    fn bound_ratio_rules() {
        let s = AngularIntegralSpec::new(0.0, 1.0, 1e-12).unwrap();
        assert!((angular_bound_ratio(&s, 0.5).unwrap() - FRAC_PI_2).abs() < 1e-12);
        assert!(angular_bound_ratio(&s, 1.0).is_err());
        let big = AngularIntegralSpec::new(1e6, 1.0, 1e-12).unwrap();
        let r = angular_bound_ratio(&big, 0.9).unwrap();
        assert!(r.is_finite() && r > 0.0);
    }

    #[test]
    fn spec_validation() {
        assert!(AngularIntegralSpec::new(-1.0, 2.0, 1e-8).is_err());
        assert!(AngularIntegralSpec::new(1.0, 0.5, 1e-8).is_err());
        assert!(AngularIntegralSpec::new(1.0, 2.0, 0.0).is_err());
    }

    #[test]
    fn axis_values() {
        for (rho, zeta) in [(0.5, 0.3), (2.0, -1.0), (7.0, 4.0)] {
            let t = kernel_triple(0.0, rho, zeta, 1e-14).unwrap();
            let exact = -rho / (2.0 * (rho * rho + zeta * zeta).powf(1.5));
            assert!(((t.gamma2 - exact) / exact).abs() < 1e-12);
            assert!(t.gamma1.abs() < 1e-14 && t.gamma3.abs() < 1e-14);
        }
    }

    #[test]
    fn diagonal_is_rejected() {
        assert!(matches!(kernel_triple(2.0, 2.0, 0.0, 1e-10), Err(Error::Diagonal { .. })));
        assert!(kernel_triple(-1.0, 2.0, 0.0, 1e-10).is_err());
    }

    #[test]
    fn reduced_matches_full_period_near_diagonal() {
        for (r, rho, zeta) in [(5.0, 5.001, 0.0), (3.0, 2.0, 0.5), (100.0, 100.0, 0.01), (2.0, 40.0, -3.0)] {
            let a = kernel_triple(r, rho, zeta, 1e-13).unwrap();
            let b = kernel_triple_full_period(r, rho, zeta, 1e-13).unwrap();
            let scale = 1.0 + a.gamma2.abs() + a.gamma3.abs();
            assert!((a.gamma1 - b.gamma1).abs() < 1e-10 * scale);
            assert!((a.gamma2 - b.gamma2).abs() < 1e-10 * scale);
            assert!((a.gamma3 - b.gamma3).abs() < 1e-10 * scale);
        }
    }

    #[test]
    fn gamma3_is_gamma2_with_radii_swapped() {
        let a = kernel_triple(3.0, 1.5, 0.7, 1e-14).unwrap();
        let b = kernel_triple(1.5, 3.0, 0.7, 1e-14).unwrap();
        assert!((a.gamma3 + b.gamma2).abs() < 1e-13);
    }

    /// Printed variant `−(1/4π)∫(ρ − r cosφ) cosφ / |·|³`. It does not invert
    /// the curl: for a swirl bump the induced u_θ outside the support fails to
    /// vanish. Kept here to document why the other form is used.
    fn printed_gamma3(r: f64, rho: f64, zeta: f64) -> f64 {
        let rr = r * r + rho * rho + zeta * zeta;
        let e = integrate(
            |phi| {
                let c = phi.cos();
                let q = rr - 2.0 * r * rho * c;
                (rho - r * c) * c / (q * q.sqrt())
            },
            &[0.0, PI, 2.0 * PI],
            Tolerance::absolute(1e-14),
            DEFAULT_MAX_PANELS,
        );
        -e.value / (4.0 * PI)
    }

    #[test]
    fn printed_gamma3_differs_from_swirl_kernel() {
        let a = kernel_triple(3.0, 2.0, 0.5, 1e-14).unwrap();
        let p = printed_gamma3(3.0, 2.0, 0.5);
        assert!((a.gamma3 - p).abs() > 1e-3);
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(64))]

        #[test]
        fn parity_in_zeta(r in 0.1f64..50.0, rho in 0.1f64..50.0, zeta in 0.01f64..30.0) {
            let p = kernel_triple(r, rho, zeta, 1e-13).unwrap();
            let m = kernel_triple(r, rho, -zeta, 1e-13).unwrap();
            prop_assert!((p.gamma1 + m.gamma1).abs() < 1e-12);
            prop_assert!((p.gamma2 - m.gamma2).abs() < 1e-12);
            prop_assert!((p.gamma3 - m.gamma3).abs() < 1e-12);
        }

        #[test]
        fn crude_bounds_dominate(r in 0.1f64..50.0, rho in 0.1f64..50.0, zeta in -30.0f64..30.0) {
            prop_assume!((r - rho).abs() + zeta.abs() > 1e-3);
            let t = kernel_triple(r, rho, zeta, 1e-13).unwrap();
            let dist = ((r - rho).powi(2) + zeta * zeta).sqrt();
            prop_assert!(t.gamma1.abs() <= zeta.abs() / dist.powi(3) * (1.0 + 1e-10) + 1e-13);
            prop_assert!(t.gamma2.abs() <= (rho + r) / dist.powi(3) * (1.0 + 1e-10) + 1e-13);
            prop_assert!(t.gamma3.abs() <= (rho + r) / dist.powi(3) * (1.0 + 1e-10) + 1e-13);
        }

        #[test]
        fn angular_integral_decreases_in_k(beta in 0.5f64..4.0, k in 0.0f64..1e5, f in 1.01f64..10.0) {
            let beta = beta.max(1.0);
            let a = angular_integral(&AngularIntegralSpec::new(k, beta, 1e-14).unwrap()).unwrap();
            let b = angular_integral(&AngularIntegralSpec::new(k * f + 1e-3, beta, 1e-14).unwrap()).unwrap();
            prop_assert!(b.value < a.value);
        }
    }
}
