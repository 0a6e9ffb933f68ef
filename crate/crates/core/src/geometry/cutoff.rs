use super::MeridianPoint;
use crate::error::{invalid, Result};

/// Smooth cutoff `φ_R(r, z) = χ(r/R) χ(|z|/R)` with `χ` a quintic
/// smoothstep falling from 1 at 1/2 to 0 at 1 (C² across both joins).
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CutoffPhi {
    pub scale: f64,
}

pub fn cutoff_phi(scale: f64) -> Result<CutoffPhi> {
    if !(scale > 0.0 && scale.is_finite()) {
        return Err(invalid(format!("cutoff scale must be positive, got {scale}")));
    }
    Ok(CutoffPhi { scale })
}

/// `χ, χ', χ''` at `s >= 0`.
fn chi(s: f64) -> (f64, f64, f64) {
    if s <= 0.5 {
        return (1.0, 0.0, 0.0);
    }
    if s >= 1.0 {
        return (0.0, 0.0, 0.0);
    }
    let t = 2.0 * s - 1.0;
    let t2 = t * t;
    // 1 − S(t) = S(1 − t) for the quintic smoothstep S; this form stays in [0, 1]
    let u = 1.0 - t;
    let v = (u * u * u * (10.0 - 15.0 * u + 6.0 * u * u)).min(1.0);
    let d = -30.0 * t2 * (1.0 - t) * (1.0 - t) * 2.0;
    let dd = -60.0 * t * (1.0 - t) * (1.0 - 2.0 * t) * 4.0;
    (v, d, dd)
}

impl CutoffPhi {
    fn parts(&self, p: MeridianPoint) -> ((f64, f64, f64), (f64, f64, f64), f64) {
        let sign = if p.z < 0.0 { -1.0 } else { 1.0 };
        (chi(p.r / self.scale), chi(p.z.abs() / self.scale), sign)
    }

    pub fn value(&self, p: MeridianPoint) -> f64 {
        let ((a, _, _), (b, _, _), _) = self.parts(p);
        a * b
    }

    /// `(∂_r φ, ∂_z φ)`.
    pub fn grad(&self, p: MeridianPoint) -> (f64, f64) {
        let ((a, da, _), (b, db, _), sign) = self.parts(p);
        let inv = 1.0 / self.scale;
        (da * b * inv, a * db * sign * inv)
    }

    /// `(∂_rr φ, ∂_rz φ, ∂_zz φ)`.
    pub fn hess(&self, p: MeridianPoint) -> (f64, f64, f64) {
        let ((a, da, dda), (b, db, ddb), sign) = self.parts(p);
        let inv2 = 1.0 / (self.scale * self.scale);
        (dda * b * inv2, da * db * sign * inv2, a * ddb * inv2)
    }

    /// Frobenius norm of the 3-D Hessian; the angular direction contributes
    /// `∂_r φ / r`.
    pub fn hess_norm(&self, p: MeridianPoint) -> f64 {
        let (rr, rz, zz) = self.hess(p);
        let (gr, _) = self.grad(p);
        let ang = if p.r > 0.0 { gr / p.r } else { 0.0 };
        (rr * rr + 2.0 * rz * rz + zz * zz + ang * ang).sqrt()
    }

    pub fn grad_norm(&self, p: MeridianPoint) -> f64 {
        let (a, b) = self.grad(p);
        a.hypot(b)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn grid(scale: f64, n: usize) -> impl Iterator<Item = MeridianPoint> {
        (0..=n).flat_map(move |i| {
            (0..=2 * n).map(move |j| {
                MeridianPoint::at(1.2 * scale * i as f64 / n as f64, 1.2 * scale * (j as f64 / n as f64 - 1.0))
            })
        })
    }

    #[test]
    fn plateau_and_support() {
        let phi = cutoff_phi(8.0).unwrap();
        for p in grid(8.0, 60) {
            let v = phi.value(p);
            assert!((0.0..=1.0).contains(&v));
            if p.r <= 4.0 && p.z.abs() <= 4.0 {
                assert_eq!(v, 1.0);
            }
            if p.r >= 8.0 || p.z.abs() >= 8.0 {
                assert_eq!(v, 0.0);
            }
        }
        assert!(cutoff_phi(0.0).is_err());
    }

    #[test]
    fn derivative_bounds_scale_with_r() {
        let sup = |scale: f64| {
            let phi = cutoff_phi(scale).unwrap();
            grid(scale, 120).fold((0.0f64, 0.0f64), |(g, h), p| (g.max(phi.grad_norm(p)), h.max(phi.hess_norm(p))))
        };
        let (g4, h4) = sup(4.0);
        let (g1k, h1k) = sup(1024.0);
        assert!((g4 * 4.0 - g1k * 1024.0).abs() < 1e-6 * g4 * 4.0);
        assert!((h4 * 16.0 - h1k * 1024.0 * 1024.0).abs() < 1e-6 * h4 * 16.0);
    }

    #[test]
    fn chi_derivatives_match_differences() {
        for s in [0.55, 0.7, 0.81, 0.95] {
            let h = 1e-6;
            let (_, d, dd) = chi(s);
            let fd = (chi(s + h).0 - chi(s - h).0) / (2.0 * h);
            let fdd = (chi(s + h).1 - chi(s - h).1) / (2.0 * h);
            assert!((d - fd).abs() < 1e-7);
            assert!((dd - fdd).abs() < 1e-6);
        }
    }

    #[test]
    fn continuity_across_mesh() {
        let phi = cutoff_phi(3.0).unwrap();
        let n = 400;
        let mesh = 3.0 / n as f64;
        let sup_grad = 1.875 * 2.0 / 3.0;
        for i in 0..n {
            let a = phi.value(MeridianPoint::at(i as f64 * mesh, 0.0));
            let b = phi.value(MeridianPoint::at((i + 1) as f64 * mesh, 0.0));
            assert!((a - b).abs() < mesh * sup_grad * 1.1);
        }
    }
}
