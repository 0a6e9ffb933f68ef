//! Norms on cylinders `C_R = {|x'| < R, |z| < R}`: L^q, weak L^{q,∞},
//! normalized mean oscillations of `ln r`, and the Dirichlet energy.
//!
//! Every 3-D integral is reduced to the meridian half-plane with weight `2πr`.

use std::f64::consts::{PI, SQRT_2};

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::geometry::ops::{local, over_r};
use crate::geometry::{AxisymField, DerivMode, MeridianPoint, ScalarProfile};
use crate::quad::{integrate, integrate_2d, Rect, Tolerance};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DomainShape {
    /// `C_R`.
    Full,
    /// `C_R ∖ C_{R/2}`.
    Shell,
    /// `B_R`.
    Ball,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct CylinderDomain {
    pub scale: f64,
    pub shape: DomainShape,
}

/// Coordinates in which a domain is a union of rectangles.
#[derive(Clone, Copy, Debug, PartialEq)]
enum Chart {
    /// `(r, z)` directly.
    Meridian,
    /// `(s, θ)` with `r = s sin θ`, `z = s cos θ`.
    Polar,
}

impl Chart {
    /// Meridian point and area element at chart coordinates `(x, y)`.
    fn map(self, x: f64, y: f64) -> (MeridianPoint, f64) {
        match self {
            Chart::Meridian => (MeridianPoint::at(x, y), 1.0),
            Chart::Polar => {
                let (s, c) = y.sin_cos();
                (MeridianPoint::at((x * s).max(0.0), x * c), x)
            }
        }
    }
}

impl CylinderDomain {
    pub fn new(scale: f64, shape: DomainShape) -> Result<Self> {
        if !(scale > 0.0 && scale.is_finite()) {
            return Err(invalid(format!("domain scale must be positive, got {scale}")));
        }
        Ok(Self { scale, shape })
    }

    pub fn full(scale: f64) -> Result<Self> {
        Self::new(scale, DomainShape::Full)
    }

    pub fn contains(&self, p: MeridianPoint) -> bool {
        let r = self.scale;
        let in_cyl = |s: f64| p.r < s && p.z.abs() < s;
        match self.shape {
            DomainShape::Full => in_cyl(r),
            DomainShape::Shell => in_cyl(r) && !in_cyl(0.5 * r),
            DomainShape::Ball => p.r.hypot(p.z) < r,
        }
    }

    /// 3-D volume.
    pub fn volume(&self) -> f64 {
        let r = self.scale;
        match self.shape {
            DomainShape::Full => 2.0 * PI * r.powi(3),
            DomainShape::Shell => 2.0 * PI * r.powi(3) * (1.0 - 0.125),
            DomainShape::Ball => 4.0 / 3.0 * PI * r.powi(3),
        }
    }

    /// Radius of a ball that contains the domain (`√2 R` for the cylinders).
    pub fn enclosing_radius(&self) -> f64 {
        match self.shape {
            DomainShape::Ball => self.scale,
            _ => SQRT_2 * self.scale,
        }
    }

    /// Chart and covering rectangles; radial breaks are dyadic so that
    /// profiles varying on the unit scale are resolved at every `R`.
    fn cells(&self) -> (Chart, Vec<Rect>) {
        let r = self.scale;
        let mut radial = vec![];
        let mut x = r;
        while x > 1e-3 * r.min(1.0) {
            x *= 0.5;
            radial.push(x);
        }
        // axial breaks graded toward the midplane, eight levels deep
        let mut axial = vec![0.0];
        for x in radial.iter().take(8) {
            axial.extend([-x, *x]);
        }
        match self.shape {
            DomainShape::Full => (Chart::Meridian, Rect::new(0.0, r, -r, r).partition(&radial, &axial)),
            DomainShape::Shell => {
                let h = 0.5 * r;
                let mut cells = Rect::new(0.0, r, -r, r).partition(&radial, &axial);
                cells.retain(|c| !(0.5 * (c.x0 + c.x1) < h && (0.5 * (c.y0 + c.y1)).abs() < h));
                (Chart::Meridian, cells)
            }
            DomainShape::Ball => {
                let mut polar = vec![0.5 * PI];
                for k in 1..=8 {
                    let d = 0.5 * PI * 0.5f64.powi(k);
                    polar.extend([0.5 * PI - d, 0.5 * PI + d]);
                }
                (Chart::Polar, Rect::new(0.0, r, 0.0, PI).partition(&radial, &polar))
            }
        }
    }
}

/// Quadrature of a 3-D axisymmetric integrand over the domain.
fn integrate_domain<F: FnMut(MeridianPoint) -> f64>(
    dom: &CylinderDomain,
    mut f: F,
    tol: Tolerance,
) -> crate::quad::Estimate {
    let (chart, cells) = dom.cells();
    integrate_2d::<1, _>(
        |x, y| {
            let (p, jac) = chart.map(x, y);
            [2.0 * PI * p.r * jac * f(p)]
        },
        &cells,
        tol,
        1 << 16,
    )
    .component(0)
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct NormEstimate {
    pub value: f64,
    pub error: f64,
}

/// `(∫_dom |f|^q dx)^{1/q}`; `tol` is relative.
pub fn lq_norm_cylinder(f: &dyn ScalarProfile, q: f64, dom: &CylinderDomain, tol: f64) -> Result<NormEstimate> {
    if !(q >= 1.0 && q.is_finite()) {
        return Err(invalid(format!("L^q norm needs q >= 1, got {q}")));
    }
    if !(tol > 0.0) {
        return Err(invalid("tolerance must be positive"));
    }
    let e = integrate_domain(dom, |p| f.value(p).abs().powf(q), Tolerance::new(0.0, tol));
    if !e.value.is_finite() || !e.converged {
        return Err(Error::Divergent(format!(
            "integral of |f|^{q} over the domain did not converge (estimate {}, error {})",
            e.value, e.error
        )));
    }
    let value = e.value.powf(1.0 / q);
    // d(I^{1/q}) = I^{1/q − 1}/q · dI
    let error = if e.value > 0.0 { value * e.error / (q * e.value) } else { e.error.powf(1.0 / q) };
    Ok(NormEstimate { value, error })
}

/// Growth of `‖f‖_{L^q(C_R)}` along a ladder of scales.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct LqGrowth {
    pub q: f64,
    pub scales: Vec<f64>,
    pub norms: Vec<f64>,
    /// Log–log slope over the upper half of the ladder.
    pub exponent: f64,
    pub intercept: f64,
    /// Relative change of `‖f‖^q / R` over the fit window.
    pub drift: f64,
    /// `‖f‖^q / R` still growing markedly (logarithmic growth, `μq = 2`).
    pub boundary_case: bool,
}

pub fn lq_growth(f: &dyn ScalarProfile, q: f64, shape: DomainShape, scales: &[f64], tol: f64) -> Result<LqGrowth> {
    if scales.len() < 4 || scales.windows(2).any(|w| !(w[1] > w[0])) {
        return Err(invalid("growth fit needs at least 4 strictly increasing scales"));
    }
    let norms = scales
        .iter()
        .map(|&r| Ok(lq_norm_cylinder(f, q, &CylinderDomain::new(r, shape)?, tol)?.value))
        .collect::<Result<Vec<_>>>()?;
    let lo = scales.len() / 2;
    let xs: Vec<f64> = scales[lo..].iter().map(|r| r.ln()).collect();
    let ys: Vec<f64> = norms[lo..].iter().map(|n| n.ln()).collect();
    let (exponent, intercept) = least_squares_line(&xs, &ys);
    let level = |i: usize| norms[i].powf(q) / scales[i];
    let drift = level(scales.len() - 1) / level(lo) - 1.0;
    Ok(LqGrowth { q, scales: scales.to_vec(), norms, exponent, intercept, drift, boundary_case: drift > 0.25 })
}

fn least_squares_line(x: &[f64], y: &[f64]) -> (f64, f64) {
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum();
    let sxx: f64 = x.iter().map(|a| (a - mx).powi(2)).sum();
    let slope = sxy / sxx;
    (slope, my - slope * mx)
}

/// Levels at which the distribution function is sampled.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum LambdaGrid {
    /// Geometric grid spanning `[min |f|, max |f|]` over the domain.
    Geometric { levels: usize },
    Explicit { levels: Vec<f64> },
}

impl Default for LambdaGrid {
    fn default() -> Self {
        LambdaGrid::Geometric { levels: 200 }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct WeakLorentzEstimate {
    pub q: f64,
    /// `max_λ λ |{|f| >= λ}|^{1/q}` over the grid.
    pub value: f64,
    pub argmax: f64,
    pub lambda_grid: Vec<f64>,
    /// `|{|f| >= λ}|` at each grid level.
    pub distribution: Vec<f64>,
    /// Same maximum on the half-resolution node set.
    pub coarse_value: f64,
}

/// Weighted sample set: midpoint lattice with `m × m` points per domain cell.
/// Uniform weights keep the quadrature of level-set indicators free of the
/// bias that a Gauss-type node set would introduce.
fn sample_nodes(dom: &CylinderDomain, f: &dyn ScalarProfile, m: usize) -> Vec<(f64, f64)> {
    let (chart, cells) = dom.cells();
    let mut out = Vec::with_capacity(cells.len() * m * m);
    for c in cells {
        let (dx, dy) = ((c.x1 - c.x0) / m as f64, (c.y1 - c.y0) / m as f64);
        for i in 0..m {
            for j in 0..m {
                let (p, jac) = chart.map(c.x0 + (i as f64 + 0.5) * dx, c.y0 + (j as f64 + 0.5) * dy);
                out.push((f.value(p).abs(), dx * dy * jac * 2.0 * PI * p.r));
            }
        }
    }
    out
}

/// Measure of each superlevel set `{|f| >= λ}` from sorted samples.
fn distribution(samples: &mut [(f64, f64)], levels: &[f64]) -> Vec<f64> {
    samples.sort_by(|a, b| b.0.total_cmp(&a.0));
    let mut out = Vec::with_capacity(levels.len());
    let (mut idx, mut acc) = (0, 0.0);
    // levels are visited from the top so that the running sum only grows
    let mut order: Vec<usize> = (0..levels.len()).collect();
    order.sort_by(|&a, &b| levels[b].total_cmp(&levels[a]));
    let mut by_level = vec![0.0; levels.len()];
    for k in order {
        while idx < samples.len() && samples[idx].0 >= levels[k] {
            acc += samples[idx].1;
            idx += 1;
        }
        by_level[k] = acc;
    }
    out.extend(by_level);
    out
}

fn weak_sup(levels: &[f64], dist: &[f64], q: f64) -> (f64, f64) {
    levels.iter().zip(dist).fold((0.0, levels.first().copied().unwrap_or(0.0)), |(best, arg), (&l, &m)| {
        let v = l * m.powf(1.0 / q);
        if v > best {
            (v, l)
        } else {
            (best, arg)
        }
    })
}

/// Weak `L^{q,∞}` norm `sup_λ λ |{|f| > λ}|^{1/q}` on the λ grid. The
/// supremum over a geometric grid with ratio `ρ` under-estimates the true
/// value by at most a factor `ρ`. Level-set measures are sums of quadrature
/// weights over the nodes where `|f| >= λ`; they are recomputed on a node set
/// of half the resolution and a relative disagreement above `res_tol` is
/// reported as under-resolution.
pub fn weak_lorentz_norm(
    f: &dyn ScalarProfile,
    q: f64,
    dom: &CylinderDomain,
    grid: &LambdaGrid,
    res_tol: f64,
) -> Result<WeakLorentzEstimate> {
    if !(q >= 1.0 && q.is_finite()) {
        return Err(invalid(format!("weak norm needs q >= 1, got {q}")));
    }
    let mut fine = sample_nodes(dom, f, 64);
    let mut coarse = sample_nodes(dom, f, 32);
    let levels = match grid {
        LambdaGrid::Explicit { levels } => {
            if levels.is_empty() || levels.iter().any(|l| !(*l > 0.0 && l.is_finite())) {
                return Err(invalid("lambda grid must be non-empty and positive"));
            }
            levels.clone()
        }
        LambdaGrid::Geometric { levels } => {
            if *levels < 2 {
                return Err(invalid("geometric lambda grid needs at least 2 levels"));
            }
            let max = fine.iter().map(|s| s.0).fold(0.0, f64::max);
            if !(max > 0.0 && max.is_finite()) {
                if max == 0.0 {
                    return Ok(WeakLorentzEstimate {
                        q,
                        value: 0.0,
                        argmax: 0.0,
                        lambda_grid: vec![],
                        distribution: vec![],
                        coarse_value: 0.0,
                    });
                }
                return Err(Error::Divergent("profile is not finite on the domain".into()));
            }
            let min = fine.iter().map(|s| s.0).filter(|v| *v > 0.0).fold(max, f64::min).max(1e-12 * max);
            let n = *levels;
            (0..n).map(|i| min * (max / min).powf(i as f64 / (n - 1) as f64)).collect()
        }
    };
    let dist = distribution(&mut fine, &levels);
    let dist_coarse = distribution(&mut coarse, &levels);
    let (value, argmax) = weak_sup(&levels, &dist, q);
    let (coarse_value, _) = weak_sup(&levels, &dist_coarse, q);
    if (value - coarse_value).abs() > res_tol * value.max(f64::MIN_POSITIVE) {
        return Err(Error::UnderResolved(format!(
            "weak norm {value} changes to {coarse_value} at half resolution (tolerance {res_tol})"
        )));
    }
    Ok(WeakLorentzEstimate { q, value, argmax, lambda_grid: levels, distribution: dist, coarse_value })
}

/// Which normalized oscillation of `g = ln r` over `C_R` to return.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BmoVariant {
    /// `R^{-1} (∫ |g − ḡ|³)^{1/3}`.
    Three,
    /// `R^{-2} (∫ |g − ḡ|^{2/3})^{2/3}`, the display taken verbatim.
    TwoThirds,
    /// `R^{-3} ∫ |g − ḡ|^{12}`.
    Twelve,
    /// `R^{-2} (∫ |g − ḡ|^{3/2})^{2/3}`, the dimensionally consistent reading.
    ThreeHalves,
}

impl BmoVariant {
    pub const ALL: [BmoVariant; 4] = [BmoVariant::Three, BmoVariant::TwoThirds, BmoVariant::Twelve, BmoVariant::ThreeHalves];

    pub fn power(self) -> f64 {
        match self {
            BmoVariant::Three => 3.0,
            BmoVariant::TwoThirds => 2.0 / 3.0,
            BmoVariant::Twelve => 12.0,
            BmoVariant::ThreeHalves => 1.5,
        }
    }

    /// `(R exponent, outer root)`.
    fn normalization(self) -> (f64, f64) {
        match self {
            BmoVariant::Three => (-1.0, 1.0 / 3.0),
            BmoVariant::TwoThirds => (-2.0, 2.0 / 3.0),
            BmoVariant::Twelve => (-3.0, 1.0),
            BmoVariant::ThreeHalves => (-2.0, 2.0 / 3.0),
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            BmoVariant::Three => "p3",
            BmoVariant::TwoThirds => "p2_3",
            BmoVariant::Twelve => "p12",
            BmoVariant::ThreeHalves => "p3_2",
        }
    }
}

const BMO_TOL: Tolerance = Tolerance::new(0.0, 1e-13);

/// `ḡ = (2/R²) ∫₀^R ρ ln ρ dρ` by quadrature in `s` with `ρ = R e^{-s}`.
pub fn disk_mean_ln(scale: f64) -> Result<f64> {
    if !(scale > 0.0 && scale.is_finite()) {
        return Err(invalid(format!("scale must be positive, got {scale}")));
    }
    let l = scale.ln();
    let breaks: Vec<f64> = (0..=40).map(|j| j as f64).collect();
    let e = integrate(|s| 2.0 * (-2.0 * s).exp() * (l - s), &breaks, BMO_TOL, 1 << 12);
    Ok(e.value)
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct BmoOscillation {
    pub scale: f64,
    pub variant: BmoVariant,
    pub mean: f64,
    pub value: f64,
}

/// Normalized oscillation of `ln r` over `C_R` about its disk mean.
pub fn bmo_oscillation_ln(scale: f64, variant: BmoVariant) -> Result<BmoOscillation> {
    let mean = disk_mean_ln(scale)?;
    let p = variant.power();
    let l = scale.ln();
    // ∫_{C_R} |g − ḡ|^p dx = 2R · 2π R² ∫₀^∞ |ln R − s − ḡ|^p e^{−2s} ds
    let kink = l - mean;
    let mut breaks: Vec<f64> = (0..=60).map(|j| j as f64).collect();
    if kink > 0.0 {
        breaks.push(kink);
    }
    let e = integrate(|s| (l - s - mean).abs().powf(p) * (-2.0 * s).exp(), &breaks, BMO_TOL, 1 << 12);
    let integral = 4.0 * PI * scale.powi(3) * e.value;
    let (r_pow, root) = variant.normalization();
    Ok(BmoOscillation { scale, variant, mean, value: scale.powf(r_pow) * integral.powf(root) })
}

/// `∫_dom |∇u|²` with the cylindrical gradient
/// `|∇u_r|² + |∇u_θ|² + |∇u_z|² + u_r²/r² + u_θ²/r²`.
pub fn dirichlet_energy(field: &AxisymField, dom: &CylinderDomain, h: f64, tol: f64) -> Result<NormEstimate> {
    let support = match field.support() {
        crate::geometry::Support::Bounded(b) => Some(b),
        _ => None,
    };
    let mut failure = None;
    let e = integrate_domain(
        dom,
        |p| {
            // every derivative of a smooth compactly supported field vanishes off its support
            if support.is_some_and(|b| !b.contains(p)) {
                return 0.0;
            }
            let d = |f: &dyn ScalarProfile| local(f, p, h, DerivMode::Auto, 1.0);
            match (d(field.u_r.as_ref()), d(field.u_theta.as_ref()), d(field.u_z.as_ref())) {
                (Ok(a), Ok(b), Ok(c)) => {
                    let (ar, bt) = (over_r(&a, p.r), over_r(&b, p.r));
                    a.r * a.r + a.z * a.z + b.r * b.r + b.z * b.z + c.r * c.r + c.z * c.z + ar * ar + bt * bt
                }
                (Err(e), _, _) | (_, Err(e), _) | (_, _, Err(e)) => {
                    failure.get_or_insert(e);
                    0.0
                }
            }
        },
        Tolerance::new(tol, tol),
    );
    if let Some(e) = failure {
        return Err(e);
    }
    Ok(NormEstimate { value: e.value, error: e.error })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{FnProfile, Profile};
    use proptest::prelude::*;

    fn radial(mu: f64) -> FnProfile<impl Fn(f64, f64) -> f64 + Send + Sync> {
        FnProfile(move |r: f64, _z: f64| (1.0 + r).powf(-mu))
    }

    #[test]
    fn unit_cylinder_volume() {
        let one = FnProfile(|_: f64, _: f64| 1.0);
        let v = lq_norm_cylinder(&one, 1.0, &CylinderDomain::full(1.0).unwrap(), 1e-12).unwrap();
        assert!((v.value - 2.0 * PI).abs() < 1e-12);
        for shape in [DomainShape::Shell, DomainShape::Ball] {
            let dom = CylinderDomain::new(3.0, shape).unwrap();
            let v = lq_norm_cylinder(&one, 1.0, &dom, 1e-12).unwrap();
            assert!((v.value - dom.volume()).abs() < 1e-9 * dom.volume(), "{shape:?}");
        }
    }

    #[test]
    fn invalid_arguments() {
        assert!(CylinderDomain::full(0.0).is_err());
        let one = FnProfile(|_: f64, _: f64| 1.0);
        assert!(lq_norm_cylinder(&one, 0.5, &CylinderDomain::full(1.0).unwrap(), 1e-8).is_err());
        let singular = FnProfile(|r: f64, _: f64| r.powf(-1.5));
        assert!(matches!(
            lq_norm_cylinder(&singular, 2.0, &CylinderDomain::full(1.0).unwrap(), 1e-8),
            Err(Error::Divergent(_))
        ));
    }

    #[test]
    fn growth_exponent_is_one_over_q() {
        let scales: Vec<f64> = (4..=14).map(|k| 2f64.powi(k)).collect();
        let g = lq_growth(&radial(1.0), 2.5, DomainShape::Full, &scales, 1e-10).unwrap();
        assert!((g.exponent - 0.4).abs() < 0.02, "{}", g.exponent);
        assert!(!g.boundary_case);
        let b = lq_growth(&radial(1.0), 2.0, DomainShape::Full, &scales, 1e-10).unwrap();
        assert!(b.boundary_case, "drift {}", b.drift);
    }

    #[test]
    fn cylinder_inclusions() {
        let r = 5.0;
        let c = CylinderDomain::full(r).unwrap();
        let b = CylinderDomain::new(r, DomainShape::Ball).unwrap();
        let big = CylinderDomain::new(SQRT_2 * r * (1.0 + 1e-12), DomainShape::Ball).unwrap();
        for i in 0..60 {
            for j in 0..60 {
                let p = MeridianPoint::at(1.5 * r * i as f64 / 59.0, 1.5 * r * (2.0 * j as f64 / 59.0 - 1.0));
                if b.contains(p) {
                    assert!(c.contains(p));
                }
                if c.contains(p) {
                    assert!(big.contains(p));
                }
            }
        }
    }

    #[test]
    fn weak_norm_of_constant() {
        let c = FnProfile(|_: f64, _: f64| 3.0);
        let dom = CylinderDomain::full(2.0).unwrap();
        let w = weak_lorentz_norm(&c, 2.0, &dom, &LambdaGrid::default(), 1e-3).unwrap();
        let exact = 3.0 * dom.volume().sqrt();
        assert!((w.value - exact).abs() < 1e-10 * exact, "{} vs {exact}", w.value);
    }

    #[test]
    fn weak_norm_on_shell_matches_one_dimensional_reduction() {
        // {(1+r)^{-μ} >= λ} = {r <= s}, s = λ^{-1/μ} − 1; on C_R ∖ C_{R/2}
        // the slab |z| < R/2 is removed for r < R/2
        let (mu, q) = (1.2, 3.0);
        for r in [4.0, 16.0, 64.0] {
            let measure = |s: f64| {
                let s = s.clamp(0.0, r);
                if s <= 0.5 * r {
                    PI * s * s * r
                } else {
                    PI * 0.25 * r * r * r + PI * (s * s - 0.25 * r * r) * 2.0 * r
                }
            };
            let lambdas: Vec<f64> = (0..4000).map(|i| (1.0 + r).powf(-mu) * (1.0 + r).powf(mu * i as f64 / 3999.0)).collect();
            let exact = lambdas
                .iter()
                .map(|&l| l * measure(l.powf(-1.0 / mu) - 1.0).powf(1.0 / q))
                .fold(0.0, f64::max);
            let dom = CylinderDomain::new(r, DomainShape::Shell).unwrap();
            let w = weak_lorentz_norm(&radial(mu), q, &dom, &LambdaGrid::Explicit { levels: lambdas }, 1e-2).unwrap();
            assert!((w.value - exact).abs() < 5e-3 * exact, "R = {r}: {} vs {exact}", w.value);
        }
    }

    #[test]
    fn bmo_quantities_are_scale_invariant() {
        for v in BmoVariant::ALL {
            let a = bmo_oscillation_ln(2.0, v).unwrap();
            let b = bmo_oscillation_ln(2f64.powi(20), v).unwrap();
            assert!((a.value - b.value).abs() < 1e-9 * a.value, "{v:?}: {} vs {}", a.value, b.value);
        }
        for k in [1, 7, 20] {
            let r = 2f64.powi(k);
            assert!((disk_mean_ln(r).unwrap() - (r.ln() - 0.5)).abs() < 1e-12);
        }
    }

    #[test]
    fn bmo_p3_matches_direct_radial_quadrature() {
        // direct: ∫_{C_1} |ln r + 1/2|³ = 2 · 2π ∫₀¹ |ln ρ + 1/2|³ ρ dρ
        let kink = (-0.5f64).exp();
        let mut breaks: Vec<f64> = (0..60).map(|j| 0.5f64.powi(j)).collect();
        breaks.push(0.0);
        breaks.push(kink);
        let e = integrate(|x| if x > 0.0 { (x.ln() + 0.5).abs().powi(3) * x } else { 0.0 }, &breaks, Tolerance::new(0.0, 1e-13), 4096);
        let direct = (4.0 * PI * e.value).cbrt();
        let v = bmo_oscillation_ln(1.0, BmoVariant::Three).unwrap().value;
        assert!((v - direct).abs() < 1e-10 * direct);
    }

    #[test]
    fn rigid_swirl_energy() {
        let f = AxisymField::from_profiles(Profile::Zero, Profile::Monomial { coef: 1.0, pr: 1, pz: 0 }, Profile::Zero);
        let e = dirichlet_energy(&f, &CylinderDomain::full(1.0).unwrap(), 1e-4, 1e-12).unwrap();
        assert!((e.value - 4.0 * PI).abs() < 1e-10);
        let zero = AxisymField::zero();
        assert_eq!(dirichlet_energy(&zero, &CylinderDomain::full(2.0).unwrap(), 1e-4, 1e-10).unwrap().value, 0.0);
    }

    #[test]
    fn stream_bump_energy_converges_under_refinement() {
        let psi = Profile::Bump { amp: 1.0, r0: 1.5, z0: 0.0, radius: 1.0, r_power: 2 }.shared();
        let field = crate::geometry::stream_function_field(psi).unwrap();
        // hide the jets so that only central differences are available
        let strip = |p: std::sync::Arc<dyn ScalarProfile>| -> std::sync::Arc<dyn ScalarProfile> {
            let support = p.support();
            std::sync::Arc::new(Stripped { inner: p, support })
        };
        let fd = AxisymField::new(strip(field.u_r.clone()), strip(field.u_theta.clone()), strip(field.u_z.clone()));
        let dom = CylinderDomain::full(3.0).unwrap();
        let exact = dirichlet_energy(&field, &dom, 1e-3, 1e-11).unwrap().value;
        let err = |h: f64| (dirichlet_energy(&fd, &dom, h, 1e-11).unwrap().value - exact).abs();
        let (e1, e2) = (err(0.02), err(0.01));
        assert!((e1 / e2 - 4.0).abs() < 0.5, "{e1} {e2}");
    }

    struct Stripped {
        inner: std::sync::Arc<dyn ScalarProfile>,
        support: crate::geometry::Support,
    }

    impl ScalarProfile for Stripped {
        fn value(&self, p: MeridianPoint) -> f64 {
            self.inner.value(p)
        }
        fn support(&self) -> crate::geometry::Support {
            self.support
        }
    }

    #[test]
    fn finite_differences_at_the_axis_are_rejected() {
        let swirl = FnProfile(|r: f64, _: f64| r);
        let field = AxisymField::new(Profile::Zero.shared(), std::sync::Arc::new(swirl), Profile::Zero.shared());
        assert!(matches!(
            dirichlet_energy(&field, &CylinderDomain::full(1.0).unwrap(), 1e-3, 1e-8),
            Err(Error::AxisSingularity { .. })
        ));
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(25))]
        #[test]
        fn chebyshev_domination(mu in 0.3f64..3.0, amp in 0.1f64..10.0, q in 1.0f64..4.0, scale in 1.0f64..50.0) {
            let f = FnProfile(move |r: f64, z: f64| amp * (1.0 + r).powf(-mu) * (-(z / scale).powi(2)).exp());
            let dom = CylinderDomain::full(scale).unwrap();
            let w = weak_lorentz_norm(&f, q, &dom, &LambdaGrid::default(), 5e-2).unwrap();
            let l = lq_norm_cylinder(&f, q, &dom, 1e-10).unwrap();
            prop_assert!(w.value <= l.value * (1.0 + 1e-9), "{} > {}", w.value, l.value);
            prop_assert!(w.distribution.windows(2).all(|d| d[1] <= d[0]));
        }
    }
}
