//! Velocity reconstruction from vorticity on the meridian half-plane:
//!
//! ```text
//! u_r =  ∫∫ Γ₁ w_θ ρ dρ dk
//! u_z = −∫∫ Γ₂ w_θ ρ dρ dk
//! u_θ =  ∫∫ Γ₃ w_z ρ dρ dk − ∫∫ Γ₁ w_r ρ dρ dk
//! ```
//!
//! with kernels evaluated at `(r, ρ, z − k)`. The ρ-axis is cut at
//! `r^γ/8, r/4, r − r^δ/2, r + r^δ/2, 4r` and the truncation radius, giving
//! six regions `I₁ … I₆`. The kernels blow up like `1/dist` at `(ρ, k) = (r, z)`;
//! a square patch around that point is integrated in polar coordinates
//! (four triangles, geometric grading towards the apex), everything else by
//! adaptive tensor Gauss–Kronrod on rectangles.
//!
//! All four integrands share one kernel evaluation per node.

use std::cell::Cell;
use std::f64::consts::FRAC_PI_4;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::geometry::{BBox, Majorant, MeridianPoint, ScalarProfile, Support, VorticityField};
use crate::kernels::kernel_estimate;
use crate::quad::{integrate_2d, Rect, Tolerance};

/// Integration controls for one reconstruction.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct QuadratureSpec {
    pub gamma: f64,
    pub delta: f64,
    /// Radial truncation; `None` means `64 · max(1, r)` at each probe.
    pub rho_max: Option<f64>,
    /// Axial truncation `|k| <= z_max`; `None` means `64 · max(1, r, |z|)`.
    pub z_max: Option<f64>,
    /// Absolute accuracy target for the whole integral.
    pub tol: f64,
    /// Relative accuracy target; a component converges when either is met.
    pub rel_tol: f64,
    /// Number of geometric levels of the polar patch towards the singular point.
    pub near_diag_refinement: u32,
    /// Upper bound on the half-width of the polar patch.
    pub polar_radius: f64,
    /// Relative accuracy of each kernel evaluation.
    pub kernel_rel_tol: f64,
    /// Cell budget per region.
    pub max_cells: usize,
}

impl Default for QuadratureSpec {
    fn default() -> Self {
        Self {
            gamma: 0.0,
            delta: 1.0,
            rho_max: None,
            z_max: None,
            tol: 1e-9,
            rel_tol: 1e-7,
            near_diag_refinement: 10,
            polar_radius: 0.5,
            kernel_rel_tol: 1e-11,
            max_cells: 40_000,
        }
    }
}

impl QuadratureSpec {
    pub fn validate(&self) -> Result<()> {
        if !((0.0..=1.0).contains(&self.gamma) && (0.0..=1.0).contains(&self.delta)) {
            return Err(invalid(format!("splitting exponents must lie in [0, 1], got gamma = {}, delta = {}", self.gamma, self.delta)));
        }
        if !(self.tol > 0.0 && self.rel_tol >= 0.0) {
            return Err(invalid("quadrature tolerance must be positive"));
        }
        if !(self.polar_radius > 0.0 && self.kernel_rel_tol > 0.0 && self.max_cells > 0) {
            return Err(invalid("polar radius, kernel tolerance and cell budget must be positive"));
        }
        Ok(())
    }

    fn radii(&self, p: MeridianPoint) -> Result<(f64, f64)> {
        let scale = p.r.max(1.0);
        let rho_max = self.rho_max.unwrap_or(64.0 * scale);
        let z_max = self.z_max.unwrap_or(64.0 * scale.max(p.z.abs()));
        if !(rho_max >= 8.0 * scale && z_max >= 8.0 * scale) {
            return Err(invalid(format!(
                "truncation radii ({rho_max}, {z_max}) must be at least 8 max(1, r) = {}",
                8.0 * scale
            )));
        }
        if !(p.z.abs() + self.polar_radius < z_max) {
            return Err(invalid(format!("probe height {} lies outside the axial truncation {z_max}", p.z)));
        }
        Ok((rho_max, z_max))
    }

    /// Region boundaries `0, r^γ/8, r/4, r − r^δ/2, r + r^δ/2, 4r, ρ_max`.
    pub fn region_breaks(&self, r: f64, rho_max: f64) -> [f64; 7] {
        let h = 0.5 * r.powf(self.delta);
        [0.0, r.powf(self.gamma) / 8.0, r / 4.0, r - h, r + h, 4.0 * r, rho_max]
    }
}

/// One reconstructed scalar with its region breakdown.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct ReconstructionResult {
    pub value: f64,
    /// `I₁ … I₆`.
    pub per_region: [f64; 6],
    /// Bound on the contribution of the truncated half-plane.
    pub tail_bound: f64,
    /// Accumulated quadrature error estimate (integration plus kernel error).
    pub quad_err: f64,
    pub converged: bool,
}

impl ReconstructionResult {
    pub fn total_error(&self) -> f64 {
        self.tail_bound + self.quad_err
    }
}

/// All velocity components at one probe.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct Reconstruction {
    pub probe: MeridianPoint,
    pub u_r: ReconstructionResult,
    pub u_z: ReconstructionResult,
    pub u_theta: ReconstructionResult,
    /// `∫∫ Γ₃ w_z ρ` part of `u_θ`.
    pub u_theta_axial: ReconstructionResult,
    /// `−∫∫ Γ₁ w_r ρ` part of `u_θ`.
    pub u_theta_radial: ReconstructionResult,
    /// Cells integrated over all regions.
    pub cells: usize,
    /// Kernel evaluations that missed their tolerance.
    pub kernel_failures: usize,
}

const N: usize = 4;

struct Integrand<'a> {
    w: &'a VorticityField,
    r: f64,
    z: f64,
    need_theta: bool,
    need_r: bool,
    need_z: bool,
    kernel_tol: f64,
    kernel_failures: Cell<usize>,
}

impl Integrand<'_> {
    /// `ρ · [Γ₁ w_θ, −Γ₂ w_θ, Γ₃ w_z, −Γ₁ w_r]` at `(ρ, k)`.
    fn eval(&self, rho: f64, k: f64) -> [f64; N] {
        if rho <= 0.0 {
            return [0.0; N];
        }
        let q = MeridianPoint::at(rho, k);
        let wt = if self.need_theta { self.w.w_theta.value(q) } else { 0.0 };
        let wr = if self.need_r { self.w.w_r.value(q) } else { 0.0 };
        let wz = if self.need_z { self.w.w_z.value(q) } else { 0.0 };
        if wt == 0.0 && wr == 0.0 && wz == 0.0 {
            return [0.0; N];
        }
        let zeta = self.z - k;
        let d2 = (self.r - rho).powi(2) + zeta * zeta;
        if d2 == 0.0 {
            return [0.0; N];
        }
        let crude = (rho + self.r + zeta.abs()) / (d2 * d2.sqrt());
        let est = kernel_estimate(self.r, rho, zeta, Tolerance::new(1e-13 * crude, self.kernel_tol), 1 << 12);
        if !est.converged {
            self.kernel_failures.set(self.kernel_failures.get() + 1);
        }
        let [g1, g2, g3] = est.value;
        [rho * g1 * wt, -rho * g2 * wt, rho * g3 * wz, -rho * g1 * wr]
    }
}

fn is_zero(p: &dyn ScalarProfile) -> bool {
    p.support() == Support::Empty
}

/// Outcome of integrating one group of cells.
struct Piece {
    value: [f64; N],
    error: [f64; N],
    magnitude: [f64; N],
    cells: usize,
    converged: bool,
}

fn integrate_piece(f: &Integrand<'_>, rects: &[Rect], tol: Tolerance, max_cells: usize) -> Piece {
    if rects.is_empty() {
        return Piece { value: [0.0; N], error: [0.0; N], magnitude: [0.0; N], cells: 0, converged: true };
    }
    let e = integrate_2d(|x, y| f.eval(x, y), rects, tol, max_cells);
    Piece { value: e.value, error: e.error, magnitude: e.magnitude, cells: e.panels, converged: e.converged }
}

/// Polar patch `[r − p, r + p] × [z − p, z + p]` around the singular point.
fn integrate_patch(f: &Integrand<'_>, p: f64, levels: u32, tol: Tolerance, max_cells: usize) -> Piece {
    let mut tbreaks: Vec<f64> = (0..=levels).map(|j| 0.5f64.powi(j as i32)).collect();
    tbreaks.push(0.0);
    tbreaks.reverse();
    let mut out = Piece { value: [0.0; N], error: [0.0; N], magnitude: [0.0; N], cells: 0, converged: true };
    for q in 0..4 {
        let c = q as f64 * 2.0 * FRAC_PI_4;
        let thetas = [c - FRAC_PI_4, c, c + FRAC_PI_4];
        let rects = Rect::new(thetas[0], thetas[2], 0.0, 1.0).partition(&thetas, &tbreaks);
        let tri_tol = Tolerance::new(tol.abs / 4.0, tol.rel);
        let e = integrate_2d(
            |theta, t| {
                let (s, co) = theta.sin_cos();
                let smax = p / (theta - c).cos();
                let dist = t * smax;
                let v = f.eval(f.r + dist * co, f.z + dist * s);
                let jac = t * smax * smax;
                [v[0] * jac, v[1] * jac, v[2] * jac, v[3] * jac]
            },
            &rects,
            tri_tol,
            max_cells,
        );
        for i in 0..N {
            out.value[i] += e.value[i];
            out.error[i] += e.error[i];
            out.magnitude[i] += e.magnitude[i];
        }
        out.cells += e.panels;
        out.converged &= e.converged;
    }
    out
}

/// Breakpoints graded geometrically away from `center` in both directions.
fn graded(center: f64, first: f64, lo: f64, hi: f64) -> Vec<f64> {
    let mut out = Vec::new();
    let mut d = first;
    while center - d > lo || center + d < hi {
        out.push(center - d);
        out.push(center + d);
        d *= 2.0;
    }
    out
}

fn dyadic(lo: f64, hi: f64) -> Vec<f64> {
    let mut out = Vec::new();
    let mut x = 0.125;
    while x < hi {
        if x > lo {
            out.push(x);
        }
        x *= 2.0;
    }
    out
}

/// Tail bound for `∫∫ |Γ| |w| ρ` outside `[0, ρ_max] × [−z_max, z_max]`,
/// from the crude kernel bounds and the majorant of `w`.
fn tail_bounds(w: &VorticityField, p: MeridianPoint, rho_max: f64, z_max: f64, active: [bool; N]) -> Result<[f64; N]> {
    match w.majorant {
        Majorant::Compact(b) => {
            if b.r1 > rho_max || b.z0 < -z_max || b.z1 > z_max {
                return Err(invalid("truncation box does not cover the vorticity support"));
            }
            Ok([0.0; N])
        }
        Majorant::PowerLaw { amplitude, beta, envelope } => {
            if !(beta > 1.0) {
                return Err(Error::Divergent(format!("vorticity decays like rho^-{beta}; need beta > 1")));
            }
            let r = p.r;
            let eta_mass = envelope.tail_mass(0.0);
            // ρ > ρ_max >= 8r: dist >= 7ρ/8, so ρ|Γ₁| <= (64/49)/ρ and ρ|Γ₂,₃| <= (576/343)/ρ
            let rho_tail = |c: f64| c * amplitude * eta_mass * rho_max.powf(-beta) / beta;
            // |k| > z_max: dist >= m = z_max − |z|, and ρ|Γ| <= (r + m)(2r + m)/m³ for every ρ
            let m = z_max - p.z.abs();
            let g = (r + m) * (2.0 * r + m) / (m * m * m);
            let k_tail = g * amplitude * envelope.tail_mass(z_max) / (beta - 1.0);
            let t1 = rho_tail(64.0 / 49.0) + k_tail;
            let t23 = rho_tail(576.0 / 343.0) + k_tail;
            let pick = |on: bool, t: f64| if on { t } else { 0.0 };
            Ok([pick(active[0], t1), pick(active[1], t23), pick(active[2], t23), pick(active[3], t1)])
        }
    }
}

fn clip_box(majorant: &Majorant) -> Option<BBox> {
    match majorant {
        Majorant::Compact(b) => Some(*b),
        Majorant::PowerLaw { .. } => None,
    }
}

fn build(
    w: &VorticityField,
    p: MeridianPoint,
    spec: &QuadratureSpec,
    decomposed: bool,
) -> Result<Reconstruction> {
    spec.validate()?;
    if !(p.r > 1.0) {
        return Err(invalid(format!("reconstruction needs r > 1, got r = {}", p.r)));
    }
    let (rho_max, z_max) = spec.radii(p)?;
    let active = [
        !is_zero(w.w_theta.as_ref()),
        !is_zero(w.w_theta.as_ref()),
        !is_zero(w.w_z.as_ref()),
        !is_zero(w.w_r.as_ref()),
    ];
    let tails = tail_bounds(w, p, rho_max, z_max, active)?;
    let f = Integrand {
        w,
        r: p.r,
        z: p.z,
        need_theta: active[0],
        need_r: active[3],
        need_z: active[2],
        kernel_tol: spec.kernel_rel_tol,
        kernel_failures: Cell::new(0),
    };

    let breaks = spec.region_breaks(p.r, rho_max);
    let half = 0.5 * p.r.powf(spec.delta);
    let patch = half.min(spec.polar_radius);
    let clip = clip_box(&w.majorant);
    let (k_lo, k_hi) = match clip {
        Some(b) => (b.z0.max(-z_max), b.z1.min(z_max)),
        None => (-z_max, z_max),
    };

    // axial breakpoints: graded around the probe height, envelope scale, support edges
    let mut ys = graded(p.z, patch, k_lo, k_hi);
    ys.push(p.z - patch);
    ys.push(p.z + patch);
    if let Some(env) = w.axial_envelope() {
        let s = env.effective_half_width(f64::EPSILON);
        for j in -8..=8 {
            ys.push(s * j as f64 / 8.0);
        }
    }
    // radial breakpoints: region edges, graded around r, dyadic for power-law decay
    let mut xs = graded(p.r, patch, 0.0, rho_max);
    xs.extend(dyadic(0.0, rho_max));
    if decomposed {
        xs.extend_from_slice(&breaks[1..6]);
    }

    let patch_box = Rect::new(p.r - patch, p.r + patch, p.z - patch, p.z + patch);
    let patch_live = match clip {
        Some(b) => b.r0 < patch_box.x1 && b.r1 > patch_box.x0 && b.z0 < patch_box.y1 && b.z1 > patch_box.y0,
        None => true,
    };

    let spans: Vec<(f64, f64)> = if decomposed {
        breaks.windows(2).map(|w| (w[0], w[1])).collect()
    } else {
        vec![(0.0, rho_max)]
    };
    let n_pieces = spans.len() + 1;
    let piece_tol = Tolerance::new(spec.tol / n_pieces as f64, spec.rel_tol);

    let mut region_vals = [[0.0; N]; 6];
    let mut err = [0.0; N];
    let mut magnitude = [0.0; N];
    let mut cells = 0;
    let mut converged = true;
    for (i, &(a, b)) in spans.iter().enumerate() {
        let (a, b) = match clip {
            Some(bb) => (a.max(bb.r0), b.min(bb.r1)),
            None => (a, b),
        };
        if !(b > a) || !(k_hi > k_lo) {
            continue;
        }
        let mut rects = Rect::new(a, b, k_lo, k_hi).partition(&xs, &ys);
        if patch_live {
            // cells never straddle the patch edges, but an edge may have been
            // merged with a nearby break, so test the cell centre
            rects.retain(|c| {
                let (x, y) = (0.5 * (c.x0 + c.x1), 0.5 * (c.y0 + c.y1));
                !(x > patch_box.x0 && x < patch_box.x1 && y > patch_box.y0 && y < patch_box.y1)
            });
        }
        let piece = integrate_piece(&f, &rects, piece_tol, spec.max_cells);
        let slot = if decomposed { i } else { 3 };
        for c in 0..N {
            region_vals[slot][c] += piece.value[c];
            err[c] += piece.error[c];
            magnitude[c] += piece.magnitude[c];
        }
        cells += piece.cells;
        converged &= piece.converged;
    }
    if patch_live {
        let piece = integrate_patch(&f, patch, spec.near_diag_refinement, piece_tol, spec.max_cells);
        for c in 0..N {
            // the patch lies inside r ± r^δ/2, i.e. region I₄
            region_vals[3][c] += piece.value[c];
            err[c] += piece.error[c];
            magnitude[c] += piece.magnitude[c];
        }
        cells += piece.cells;
        converged &= piece.converged;
    }

    let result = |c: usize, sign: f64| -> ReconstructionResult {
        let per_region: [f64; 6] = std::array::from_fn(|i| sign * region_vals[i][c]);
        let value: f64 = per_region.iter().sum();
        ReconstructionResult {
            value,
            per_region,
            tail_bound: tails[c],
            // converged kernels carry relative error kernel_rel_tol (plus a
            // 1e-13 absolute floor relative to the crude bound)
            quad_err: err[c] + (spec.kernel_rel_tol + 1e-12) * magnitude[c],
            converged: converged && f.kernel_failures.get() == 0,
        }
    };
    let u_r = result(0, 1.0);
    let u_z = result(1, 1.0);
    let axial = result(2, 1.0);
    let radial = result(3, 1.0);
    let mut u_theta = axial;
    for i in 0..6 {
        u_theta.per_region[i] += radial.per_region[i];
    }
    u_theta.value = u_theta.per_region.iter().sum();
    u_theta.tail_bound += radial.tail_bound;
    u_theta.quad_err += radial.quad_err;
    Ok(Reconstruction {
        probe: p,
        u_r,
        u_z,
        u_theta,
        u_theta_axial: axial,
        u_theta_radial: radial,
        cells,
        kernel_failures: f.kernel_failures.get(),
    })
}

/// All three velocity components at `p` with the region decomposition.
pub fn reconstruct(w: &VorticityField, p: MeridianPoint, spec: &QuadratureSpec) -> Result<Reconstruction> {
    build(w, p, spec, true)
}

/// Same integrals without region breakpoints (only the singular patch is
/// kept); a cross-check for the decomposition.
pub fn reconstruct_undecomposed(w: &VorticityField, p: MeridianPoint, spec: &QuadratureSpec) -> Result<Reconstruction> {
    build(w, p, spec, false)
}

fn restricted(w: &VorticityField, theta: bool) -> VorticityField {
    let zero = crate::geometry::Profile::Zero.shared();
    if theta {
        VorticityField { w_r: zero.clone(), w_z: zero, ..w.clone() }
    } else {
        VorticityField { w_theta: zero, ..w.clone() }
    }
}

/// `u_r = ∫∫ Γ₁ w_θ ρ dρ dk`.
pub fn reconstruct_ur(w: &VorticityField, p: MeridianPoint, spec: &QuadratureSpec) -> Result<ReconstructionResult> {
    Ok(reconstruct(&restricted(w, true), p, spec)?.u_r)
}

/// `u_z = −∫∫ Γ₂ w_θ ρ dρ dk`.
pub fn reconstruct_uz(w: &VorticityField, p: MeridianPoint, spec: &QuadratureSpec) -> Result<ReconstructionResult> {
    Ok(reconstruct(&restricted(w, true), p, spec)?.u_z)
}

/// `u_θ = ∫∫ Γ₃ w_z ρ dρ dk − ∫∫ Γ₁ w_r ρ dρ dk`, with both parts.
pub fn reconstruct_utheta(
    w: &VorticityField,
    p: MeridianPoint,
    spec: &QuadratureSpec,
) -> Result<(ReconstructionResult, ReconstructionResult, ReconstructionResult)> {
    let rec = reconstruct(&restricted(w, false), p, spec)?;
    Ok((rec.u_theta, rec.u_theta_axial, rec.u_theta_radial))
}

/// Quantity traced along a radial ladder.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TraceComponent {
    Ur,
    Uz,
    Utheta,
    /// `|u_r| + |u_z|`.
    Meridional,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct DecaySample {
    pub r: f64,
    pub z: f64,
    pub value: f64,
    pub quad_err: f64,
    pub tail_bound: f64,
    pub per_region: [f64; 6],
    /// Quadrature error above 10% of the value, or quadrature not converged.
    pub flagged: bool,
}

/// Reconstructs `component` at `(r, z)` for every `r` of the ladder. The
/// absolute tolerance at each rung is `spec.tol · (r/r₀)^expected_exponent`
/// so that it follows the expected magnitude.
pub fn decay_trace(
    w: &VorticityField,
    component: TraceComponent,
    r_ladder: &[f64],
    z: f64,
    expected_exponent: f64,
    spec: &QuadratureSpec,
) -> Result<Vec<DecaySample>> {
    if r_ladder.is_empty() || r_ladder.windows(2).any(|p| !(p[1] > p[0])) {
        return Err(invalid("radial ladder must be non-empty and strictly increasing"));
    }
    if !(r_ladder[0] > 1.0) {
        return Err(invalid("radial ladder must lie in r > 1"));
    }
    let r0 = r_ladder[0];
    let theta_only = matches!(component, TraceComponent::Ur | TraceComponent::Uz | TraceComponent::Meridional);
    let field = restricted(w, theta_only);
    r_ladder
        .par_iter()
        .map(|&r| {
            let local = QuadratureSpec { tol: spec.tol * (r / r0).powf(expected_exponent), ..spec.clone() };
            let p = MeridianPoint::new(r, z)?;
            let rec = reconstruct(&field, p, &local)?;
            let (value, quad_err, tail_bound, per_region, converged) = match component {
                TraceComponent::Ur => pick(&rec.u_r),
                TraceComponent::Uz => pick(&rec.u_z),
                TraceComponent::Utheta => pick(&rec.u_theta),
                TraceComponent::Meridional => {
                    let per_region: [f64; 6] = std::array::from_fn(|i| rec.u_r.per_region[i].abs() + rec.u_z.per_region[i].abs());
                    (
                        rec.u_r.value.abs() + rec.u_z.value.abs(),
                        rec.u_r.quad_err + rec.u_z.quad_err,
                        rec.u_r.tail_bound + rec.u_z.tail_bound,
                        per_region,
                        rec.u_r.converged && rec.u_z.converged,
                    )
                }
            };
            let value = value.abs();
            Ok(DecaySample { r, z, value, quad_err, tail_bound, per_region, flagged: !converged || quad_err > 0.1 * value })
        })
        .collect()
}

fn pick(r: &ReconstructionResult) -> (f64, f64, f64, [f64; 6], bool) {
    (r.value, r.quad_err, r.tail_bound, r.per_region, r.converged)
}

/// Decay samples as CSV: `r, z, value, quad_err, tail_bound, I1 … I6, flagged`.
pub fn write_trace_csv<W: std::io::Write>(samples: &[DecaySample], out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["r", "z", "value", "quad_err", "tail_bound", "I1", "I2", "I3", "I4", "I5", "I6", "flagged"])?;
    for s in samples {
        let mut rec = vec![s.r.to_string(), s.z.to_string(), s.value.to_string(), s.quad_err.to_string(), s.tail_bound.to_string()];
        rec.extend(s.per_region.iter().map(|v| v.to_string()));
        rec.push(s.flagged.to_string());
        w.write_record(&rec)?;
    }
    w.flush()?;
    Ok(())
}
