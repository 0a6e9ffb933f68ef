//! Meridian-plane primitives: points, scalar profiles, axisymmetric velocity
//! and vorticity fields.
//!
//! Every field lives on the half-plane `r >= 0`. Profiles are evaluable in
//! `f64` and, when they are built from the closed-form catalogue
//! ([`Profile`]), also on Taylor jets, which gives exact derivatives to the
//! differential operators in [`ops`].

mod cutoff;
pub mod ops;

use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};
use crate::jet::{Derivs, Jet, Real};

pub use cutoff::{cutoff_phi, CutoffPhi};
pub use ops::{
    curl_axisym, curl_axisym_with, divergence_axisym, divergence_axisym_with, ns_residual, ns_residual_with,
    curl_field, power_law_vorticity, stream_function_field, Components, DerivMode, VorticityComponent,
};

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct MeridianPoint {
    pub r: f64,
    pub z: f64,
}

impl MeridianPoint {
    pub fn new(r: f64, z: f64) -> Result<Self> {
        if !(r >= 0.0 && r.is_finite() && z.is_finite()) {
            return Err(invalid(format!("meridian point needs finite r >= 0 and finite z, got ({r}, {z})")));
        }
        Ok(Self { r, z })
    }

    /// Unchecked constructor for internal grids known to be valid.
    pub(crate) const fn at(r: f64, z: f64) -> Self {
        Self { r, z }
    }
}

/// Closed rectangle `[r0, r1] × [z0, z1]` in the meridian plane.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct BBox {
    pub r0: f64,
    pub r1: f64,
    pub z0: f64,
    pub z1: f64,
}

impl BBox {
    pub fn contains(&self, p: MeridianPoint) -> bool {
        p.r >= self.r0 && p.r <= self.r1 && p.z >= self.z0 && p.z <= self.z1
    }

    pub fn union(&self, o: &BBox) -> BBox {
        BBox {
            r0: self.r0.min(o.r0),
            r1: self.r1.max(o.r1),
            z0: self.z0.min(o.z0),
            z1: self.z1.max(o.z1),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Support {
    Empty,
    Bounded(BBox),
    Unbounded,
}

impl Support {
    pub fn union(self, o: Support) -> Support {
        match (self, o) {
            (Support::Empty, s) | (s, Support::Empty) => s,
            (Support::Bounded(a), Support::Bounded(b)) => Support::Bounded(a.union(&b)),
            _ => Support::Unbounded,
        }
    }
}

/// A scalar function on the meridian half-plane.
pub trait ScalarProfile: Send + Sync {
    fn value(&self, p: MeridianPoint) -> f64;

    /// Third-order Taylor jet at `p`, if the profile knows its derivatives.
    fn taylor(&self, _p: MeridianPoint) -> Option<Jet> {
        None
    }

    fn support(&self) -> Support {
        Support::Unbounded
    }

    /// Value, gradient and Hessian when available analytically.
    fn derivs(&self, p: MeridianPoint) -> Option<Derivs> {
        self.taylor(p).filter(|j| j.order() >= 2).map(|j| j.derivs())
    }
}

/// Axial decay envelope `η(k)`, bounded by one and integrable.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum AxialEnvelope {
    /// `exp(−(k/width)²)`.
    Gaussian { width: f64 },
    /// `exp(1 − 1/(1 − (k/half_width)²))` on `|k| < half_width`, zero outside.
    CompactBump { half_width: f64 },
}

impl Default for AxialEnvelope {
    fn default() -> Self {
        AxialEnvelope::Gaussian { width: 1.0 }
    }
}

impl AxialEnvelope {
    pub fn validate(&self) -> Result<()> {
        let w = match *self {
            AxialEnvelope::Gaussian { width } => width,
            AxialEnvelope::CompactBump { half_width } => half_width,
        };
        if !(w > 0.0 && w.is_finite()) {
            return Err(invalid(format!("envelope width must be positive, got {w}")));
        }
        Ok(())
    }

    pub fn eval<T: Real>(&self, k: T) -> T {
        match *self {
            AxialEnvelope::Gaussian { width } => {
                let s = k * (1.0 / width);
                (-(s * s)).exp()
            }
            AxialEnvelope::CompactBump { half_width } => {
                let s = k * (1.0 / half_width);
                let s2 = s * s;
                if s2.re() >= 1.0 {
                    T::cst(0.0)
                } else {
                    ((T::cst(1.0) - s2).recip() * -1.0 + 1.0).exp()
                }
            }
        }
    }

    /// `∫_{|k| > a} η(k) dk` for `a >= 0`, by quadrature.
    pub fn tail_mass(&self, a: f64) -> f64 {
        let end = match *self {
            AxialEnvelope::Gaussian { width } => a.max(0.0) + 40.0 * width,
            AxialEnvelope::CompactBump { half_width } => half_width,
        };
        if a >= end {
            return 0.0;
        }
        let breaks: Vec<f64> = (0..=16).map(|j| a + (end - a) * j as f64 / 16.0).collect();
        let e = crate::quad::integrate(|k| self.eval(k), &breaks, crate::quad::Tolerance::new(1e-300, 1e-12), 1 << 10);
        2.0 * e.value
    }

    /// Half-width beyond which the envelope is below `eps` (or vanishes).
    pub fn effective_half_width(&self, eps: f64) -> f64 {
        match *self {
            AxialEnvelope::Gaussian { width } => width * (-eps.ln()).max(0.0).sqrt(),
            AxialEnvelope::CompactBump { half_width } => half_width,
        }
    }
}

/// Closed-form profile catalogue, evaluable on `f64` and on jets.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum Profile {
    Zero,
    /// `coef · r^pr · z^pz`.
    Monomial { coef: f64, pr: u32, pz: u32 },
    /// `amp · r^r_power · exp(−((r − r0)² + (z − z0)²)/width²)`.
    Gaussian { amp: f64, r0: f64, z0: f64, width: f64, r_power: u32 },
    /// `amp · r^r_power · exp(1 − 1/(1 − s²))` with `s` the distance to
    /// `(r0, z0)` over `radius`; zero for `s >= 1`.
    Bump { amp: f64, r0: f64, z0: f64, radius: f64, r_power: u32 },
    /// `amp · (1 + r)^(−beta) · η(z)`.
    PowerLaw { amp: f64, beta: f64, envelope: AxialEnvelope },
    Sum { terms: Vec<Profile> },
}

impl Profile {
    pub fn eval<T: Real>(&self, r: T, z: T) -> T {
        match self {
            Profile::Zero => T::cst(0.0),
            Profile::Monomial { coef, pr, pz } => r.powi(*pr as i32) * z.powi(*pz as i32) * *coef,
            Profile::Gaussian { amp, r0, z0, width, r_power } => {
                let dr = r + (-r0);
                let dz = z + (-z0);
                let e = ((dr * dr + dz * dz) * (-1.0 / (width * width))).exp();
                r.powi(*r_power as i32) * e * *amp
            }
            Profile::Bump { amp, r0, z0, radius, r_power } => {
                let dr = r + (-r0);
                let dz = z + (-z0);
                let s2 = (dr * dr + dz * dz) * (1.0 / (radius * radius));
                if s2.re() >= 1.0 {
                    T::cst(0.0)
                } else {
                    let e = ((T::cst(1.0) - s2).recip() * -1.0 + 1.0).exp();
                    r.powi(*r_power as i32) * e * *amp
                }
            }
            Profile::PowerLaw { amp, beta, envelope } => (r + 1.0).powf(-beta) * envelope.eval(z) * *amp,
            Profile::Sum { terms } => terms.iter().fold(T::cst(0.0), |acc, t| acc + t.eval(r, z)),
        }
    }

    pub fn validate(&self) -> Result<()> {
        match self {
            Profile::Gaussian { width, .. } if !(*width > 0.0) => Err(invalid("gaussian width must be positive")),
            Profile::Bump { radius, .. } if !(*radius > 0.0) => Err(invalid("bump radius must be positive")),
            Profile::PowerLaw { beta, envelope, .. } => {
                if !beta.is_finite() {
                    return Err(invalid("power-law exponent must be finite"));
                }
                envelope.validate()
            }
            Profile::Sum { terms } => terms.iter().try_for_each(Profile::validate),
            _ => Ok(()),
        }
    }

    pub fn shared(self) -> Arc<dyn ScalarProfile> {
        Arc::new(self)
    }
}

impl ScalarProfile for Profile {
    fn value(&self, p: MeridianPoint) -> f64 {
        self.eval(p.r, p.z)
    }

    fn taylor(&self, p: MeridianPoint) -> Option<Jet> {
        Some(self.eval(Jet::var_r(p.r), Jet::var_z(p.z)))
    }

    fn support(&self) -> Support {
        match self {
            Profile::Zero => Support::Empty,
            Profile::Monomial { coef, .. } | Profile::Gaussian { amp: coef, .. } | Profile::PowerLaw { amp: coef, .. }
                if *coef == 0.0 =>
            {
                Support::Empty
            }
            Profile::Bump { amp, .. } if *amp == 0.0 => Support::Empty,
            Profile::Bump { r0, z0, radius, .. } => Support::Bounded(BBox {
                r0: (r0 - radius).max(0.0),
                r1: r0 + radius,
                z0: z0 - radius,
                z1: z0 + radius,
            }),
            Profile::Sum { terms } => terms.iter().fold(Support::Empty, |s, t| s.union(t.support())),
            _ => Support::Unbounded,
        }
    }
}

/// Profile without analytic derivatives; operators fall back to finite
/// differences on it.
pub struct FnProfile<F>(pub F);

impl<F: Fn(f64, f64) -> f64 + Send + Sync> ScalarProfile for FnProfile<F> {
    fn value(&self, p: MeridianPoint) -> f64 {
        (self.0)(p.r, p.z)
    }
}

/// Axisymmetric velocity `(u_r, u_θ, u_z)` with optional pressure.
#[derive(Clone)]
pub struct AxisymField {
    pub u_r: Arc<dyn ScalarProfile>,
    pub u_theta: Arc<dyn ScalarProfile>,
    pub u_z: Arc<dyn ScalarProfile>,
    pub pressure: Option<Arc<dyn ScalarProfile>>,
    pub decay_mu: Option<f64>,
}

impl AxisymField {
    pub fn new(u_r: Arc<dyn ScalarProfile>, u_theta: Arc<dyn ScalarProfile>, u_z: Arc<dyn ScalarProfile>) -> Self {
        Self { u_r, u_theta, u_z, pressure: None, decay_mu: None }
    }

    pub fn zero() -> Self {
        Self::new(Profile::Zero.shared(), Profile::Zero.shared(), Profile::Zero.shared())
    }

    pub fn from_profiles(u_r: Profile, u_theta: Profile, u_z: Profile) -> Self {
        Self::new(u_r.shared(), u_theta.shared(), u_z.shared())
    }

    pub fn with_pressure(mut self, p: Arc<dyn ScalarProfile>) -> Self {
        self.pressure = Some(p);
        self
    }

    pub fn support(&self) -> Support {
        self.u_r.support().union(self.u_theta.support()).union(self.u_z.support())
    }

    pub fn velocity(&self, p: MeridianPoint) -> [f64; 3] {
        [self.u_r.value(p), self.u_theta.value(p), self.u_z.value(p)]
    }
}

/// What is known about `|w|` away from the probe: used to place quadrature
/// breakpoints and to bound truncation tails.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Majorant {
    /// Every component vanishes outside the box.
    Compact(BBox),
    /// `|w(ρ, k)| <= amplitude · (1 + ρ)^(−beta) · η(k)`.
    PowerLaw { amplitude: f64, beta: f64, envelope: AxialEnvelope },
}

/// Axisymmetric vorticity `(w_r, w_θ, w_z)`.
#[derive(Clone)]
pub struct VorticityField {
    pub w_r: Arc<dyn ScalarProfile>,
    pub w_theta: Arc<dyn ScalarProfile>,
    pub w_z: Arc<dyn ScalarProfile>,
    pub decay_beta: Option<f64>,
    pub majorant: Majorant,
}

impl VorticityField {
    pub fn axial_envelope(&self) -> Option<AxialEnvelope> {
        match self.majorant {
            Majorant::PowerLaw { envelope, .. } => Some(envelope),
            Majorant::Compact(_) => None,
        }
    }

    /// `a·self + b·other`; both majorants must be of the same kind (and share
    /// the envelope when power-law).
    pub fn combine(&self, a: f64, other: &VorticityField, b: f64) -> Result<VorticityField> {
        let majorant = match (self.majorant, other.majorant) {
            (Majorant::Compact(x), Majorant::Compact(y)) => Majorant::Compact(x.union(&y)),
            (
                Majorant::PowerLaw { amplitude: a1, beta: b1, envelope: e1 },
                Majorant::PowerLaw { amplitude: a2, beta: b2, envelope: e2 },
            ) if e1 == e2 => Majorant::PowerLaw { amplitude: a.abs() * a1 + b.abs() * a2, beta: b1.min(b2), envelope: e1 },
            _ => return Err(invalid("cannot combine vorticity fields with different majorant kinds")),
        };
        let mix = |x: &Arc<dyn ScalarProfile>, y: &Arc<dyn ScalarProfile>| -> Arc<dyn ScalarProfile> {
            Arc::new(Combination { a, x: x.clone(), b, y: y.clone() })
        };
        let beta = match (self.decay_beta, other.decay_beta) {
            (Some(x), Some(y)) => Some(x.min(y)),
            _ => None,
        };
        Ok(VorticityField {
            w_r: mix(&self.w_r, &other.w_r),
            w_theta: mix(&self.w_theta, &other.w_theta),
            w_z: mix(&self.w_z, &other.w_z),
            decay_beta: beta,
            majorant,
        })
    }
}

struct Combination {
    a: f64,
    x: Arc<dyn ScalarProfile>,
    b: f64,
    y: Arc<dyn ScalarProfile>,
}

impl ScalarProfile for Combination {
    fn value(&self, p: MeridianPoint) -> f64 {
        self.a * self.x.value(p) + self.b * self.y.value(p)
    }

    fn taylor(&self, p: MeridianPoint) -> Option<Jet> {
        Some(self.x.taylor(p)? * self.a + self.y.taylor(p)? * self.b)
    }

    fn support(&self) -> Support {
        self.x.support().union(self.y.support())
    }
}
