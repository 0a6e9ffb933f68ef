//! Differential operators of the steady axisymmetric system and the field
//! factories built on them.

use std::sync::Arc;

use serde::{Deserialize, Serialize};

use super::{AxialEnvelope, AxisymField, BBox, Majorant, MeridianPoint, Profile, ScalarProfile, Support, VorticityField};
use crate::error::{invalid, Error, Result};
use crate::jet::{Derivs, Jet, Real};

/// A cylindrical-component triple (`r`, `θ`, `z`).
#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct Components {
    pub r: f64,
    pub theta: f64,
    pub z: f64,
}

impl Components {
    pub fn norm(&self) -> f64 {
        (self.r * self.r + self.theta * self.theta + self.z * self.z).sqrt()
    }
}

/// How operators obtain derivatives.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum DerivMode {
    /// Analytic jets when the profile has them, central differences otherwise.
    Auto,
    /// Always central differences (used for convergence studies).
    FiniteDifference,
}

fn central(f: &dyn ScalarProfile, p: MeridianPoint, h: f64) -> Derivs {
    let at = |dr: f64, dz: f64| f.value(MeridianPoint::at(p.r + dr, p.z + dz));
    let c = at(0.0, 0.0);
    let (e, w) = (at(h, 0.0), at(-h, 0.0));
    let (n, s) = (at(0.0, h), at(0.0, -h));
    let ne = at(h, h);
    let nw = at(-h, h);
    let se = at(h, -h);
    let sw = at(-h, -h);
    let h2 = h * h;
    Derivs {
        v: c,
        r: (e - w) / (2.0 * h),
        z: (n - s) / (2.0 * h),
        rr: (e - 2.0 * c + w) / h2,
        rz: (ne - nw - se + sw) / (4.0 * h2),
        zz: (n - 2.0 * c + s) / h2,
    }
}

/// Derivatives of one component; `reach` is the stencil half-width in units
/// of `h` that must stay off the axis.
pub(crate) fn local(f: &dyn ScalarProfile, p: MeridianPoint, h: f64, mode: DerivMode, reach: f64) -> Result<Derivs> {
    if mode == DerivMode::Auto {
        if let Some(d) = f.derivs(p) {
            return Ok(d);
        }
    }
    if !(h > 0.0) {
        return Err(invalid(format!("step length must be positive, got {h}")));
    }
    if p.r <= reach * h {
        return Err(Error::AxisSingularity { r: p.r, h });
    }
    Ok(central(f, p, h))
}

/// `v/r`, replaced by its axis limit `∂_r v` at `r = 0` (valid because the
/// components involved vanish on the axis).
pub(crate) fn over_r(d: &Derivs, r: f64) -> f64 {
    if r > 0.0 {
        d.v / r
    } else {
        d.r
    }
}

/// Vorticity `(−∂_z u_θ, ∂_z u_r − ∂_r u_z, ∂_r(r u_θ)/r)`.
pub fn curl_axisym(field: &AxisymField, p: MeridianPoint, h: f64) -> Result<Components> {
    curl_axisym_with(field, p, h, DerivMode::Auto)
}

pub fn curl_axisym_with(field: &AxisymField, p: MeridianPoint, h: f64, mode: DerivMode) -> Result<Components> {
    let ut = local(field.u_theta.as_ref(), p, h, mode, 1.0)?;
    let ur = local(field.u_r.as_ref(), p, h, mode, 1.0)?;
    let uz = local(field.u_z.as_ref(), p, h, mode, 1.0)?;
    Ok(Components { r: -ut.z, theta: ur.z - uz.r, z: ut.r + over_r(&ut, p.r) })
}

/// `(1/r)(∂_r(r u_r) + ∂_z(r u_z)) = ∂_r u_r + u_r/r + ∂_z u_z`.
pub fn divergence_axisym(field: &AxisymField, p: MeridianPoint, h: f64) -> Result<f64> {
    divergence_axisym_with(field, p, h, DerivMode::Auto)
}

pub fn divergence_axisym_with(field: &AxisymField, p: MeridianPoint, h: f64, mode: DerivMode) -> Result<f64> {
    let ur = local(field.u_r.as_ref(), p, h, mode, 1.0)?;
    let uz = local(field.u_z.as_ref(), p, h, mode, 1.0)?;
    Ok(ur.r + over_r(&ur, p.r) + uz.z)
}

/// Momentum residuals of the steady axisymmetric Navier–Stokes system,
/// with `b = (u_r, u_z)` and `Δ₀ = ∂_rr + (1/r)∂_r + ∂_zz`:
///
/// ```text
/// b·∇u_r − Δ₀u_r + u_r/r² − u_θ²/r + ∂_r p
/// b·∇u_θ − Δ₀u_θ + u_θ/r² + u_r u_θ/r
/// b·∇u_z − Δ₀u_z + ∂_z p
/// ```
pub fn ns_residual(field: &AxisymField, p: MeridianPoint, h: f64) -> Result<Components> {
    ns_residual_with(field, p, h, DerivMode::Auto)
}

pub fn ns_residual_with(field: &AxisymField, p: MeridianPoint, h: f64, mode: DerivMode) -> Result<Components> {
    let pressure = field.pressure.as_ref().ok_or(Error::MissingPressure)?;
    if p.r == 0.0 {
        return Err(Error::AxisSingularity { r: p.r, h });
    }
    let ur = local(field.u_r.as_ref(), p, h, mode, 2.0)?;
    let ut = local(field.u_theta.as_ref(), p, h, mode, 2.0)?;
    let uz = local(field.u_z.as_ref(), p, h, mode, 2.0)?;
    let pr = local(pressure.as_ref(), p, h, mode, 2.0)?;
    let r = p.r;
    let adv = |d: &Derivs| ur.v * d.r + uz.v * d.z;
    let lap = |d: &Derivs| d.rr + d.r / r + d.zz;
    Ok(Components {
        r: adv(&ur) - lap(&ur) + ur.v / (r * r) - ut.v * ut.v / r + pr.r,
        theta: adv(&ut) - lap(&ut) + ut.v / (r * r) + ur.v * ut.v / r,
        z: adv(&uz) - lap(&uz) + pr.z,
    })
}

/// `−(1/r)∂_z ψ` or `(1/r)∂_r ψ`.
struct StreamVelocity {
    psi: Arc<dyn ScalarProfile>,
    bbox: BBox,
    radial: bool,
}

impl StreamVelocity {
    fn jet(&self, p: MeridianPoint) -> Option<Jet> {
        let j = self.psi.taylor(p)?;
        let inv_r = Jet::var_r(p.r).powi(-1);
        Some(if self.radial { -(j.d_dz() * inv_r) } else { j.d_dr() * inv_r })
    }
}

impl ScalarProfile for StreamVelocity {
    fn value(&self, p: MeridianPoint) -> f64 {
        if !self.bbox.contains(p) {
            return 0.0;
        }
        self.jet(p).map_or(f64::NAN, |j| j.value())
    }

    fn taylor(&self, p: MeridianPoint) -> Option<Jet> {
        if !self.bbox.contains(p) {
            return Some(Jet::constant(0.0));
        }
        self.jet(p)
    }

    fn support(&self) -> Support {
        Support::Bounded(self.bbox)
    }
}

/// Divergence-free no-swirl field `u_r = −ψ_z/r`, `u_z = ψ_r/r`, `u_θ = 0`.
///
/// `ψ` must carry analytic derivatives and be supported in a box that stays
/// away from the axis.
pub fn stream_function_field(psi: Arc<dyn ScalarProfile>) -> Result<AxisymField> {
    let bbox = match psi.support() {
        Support::Empty => return Ok(AxisymField::zero()),
        Support::Unbounded => return Err(invalid("stream function must have bounded support")),
        Support::Bounded(b) => b,
    };
    if !(bbox.r0 > 0.0) {
        return Err(invalid(format!("stream function support touches the axis (r0 = {})", bbox.r0)));
    }
    let probe = MeridianPoint::at(0.5 * (bbox.r0 + bbox.r1), 0.5 * (bbox.z0 + bbox.z1));
    if psi.taylor(probe).is_none_or(|j| j.order() < 3) {
        return Err(invalid("stream function needs third-order analytic derivatives"));
    }
    let component = |radial| -> Arc<dyn ScalarProfile> { Arc::new(StreamVelocity { psi: psi.clone(), bbox, radial }) };
    Ok(AxisymField::new(component(true), Profile::Zero.shared(), component(false)))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum VorticityComponent {
    Theta,
    RAndZ,
}

/// `w(ρ, k) = (1 + ρ)^(−β) η(k)` in the selected component(s).
pub fn power_law_vorticity(beta: f64, component: VorticityComponent, envelope: AxialEnvelope) -> Result<VorticityField> {
    if !(beta > 1.0 && beta.is_finite()) {
        return Err(invalid(format!("vorticity decay exponent must exceed 1, got {beta}")));
    }
    envelope.validate()?;
    let w = Profile::PowerLaw { amp: 1.0, beta, envelope }.shared();
    let zero = Profile::Zero.shared();
    let (w_r, w_theta, w_z) = match component {
        VorticityComponent::Theta => (zero.clone(), w, zero),
        VorticityComponent::RAndZ => (w.clone(), zero, w),
    };
    Ok(VorticityField {
        w_r,
        w_theta,
        w_z,
        decay_beta: Some(beta),
        majorant: Majorant::PowerLaw { amplitude: 1.0, beta, envelope },
    })
}

struct CurlComponent {
    field: AxisymField,
    bbox: BBox,
    h: f64,
    which: u8,
}

impl ScalarProfile for CurlComponent {
    fn value(&self, p: MeridianPoint) -> f64 {
        if !self.bbox.contains(p) {
            return 0.0;
        }
        match curl_axisym(&self.field, p, self.h) {
            Ok(c) => [c.r, c.theta, c.z][self.which as usize],
            Err(_) => f64::NAN,
        }
    }

    fn support(&self) -> Support {
        Support::Bounded(self.bbox)
    }
}

/// Vorticity of a compactly supported velocity field, evaluated lazily
/// through [`curl_axisym`] with step `h` where analytic derivatives are
/// missing.
pub fn curl_field(field: &AxisymField, h: f64) -> Result<VorticityField> {
    let bbox = match field.support() {
        Support::Bounded(b) => b,
        Support::Empty => BBox { r0: 1.0, r1: 1.0, z0: 0.0, z1: 0.0 },
        Support::Unbounded => return Err(invalid("curl_field needs a compactly supported velocity")),
    };
    let part = |which| -> Arc<dyn ScalarProfile> { Arc::new(CurlComponent { field: field.clone(), bbox, h, which }) };
    Ok(VorticityField { w_r: part(0), w_theta: part(1), w_z: part(2), decay_beta: None, majorant: Majorant::Compact(bbox) })
}
