//! Kernel decay envelopes and the grid scans that estimate their constants.
//!
//! Envelopes are normalized to constant one:
//!
//! ```text
//! gamma23:  1   / (max{ρ,r}^α · dist^(2−α))     bounds |Γ₂| + |Γ₃|
//! gamma1:   |ζ| / (max{ρ,r}^α · dist^(3−α))     bounds |Γ₁|
//! ```
//!
//! with `dist² = (r − ρ)² + ζ²`. A scan reports the supremum of
//! `|Γ| / envelope` per regime and per `K ≤ 1` / `K > 1` split; the
//! falsifiable content is that those suprema settle under refinement.

use std::fmt;
use std::io::Write;
use std::path::Path;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::kernels::{kernel_estimate, DEFAULT_MAX_PANELS};
use crate::quad::Tolerance;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum KernelKind {
    Gamma23,
    Gamma1,
}

impl fmt::Display for KernelKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            KernelKind::Gamma23 => "gamma23",
            KernelKind::Gamma1 => "gamma1",
        })
    }
}

/// Radial regime of a source point relative to the probe radius.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Regime {
    /// `ρ < r/4`
    Inner,
    /// `r/4 <= ρ < 4r`
    Near,
    /// `ρ >= 4r`
    Outer,
}

impl Regime {
    pub fn of(r: f64, rho: f64) -> Regime {
        if rho < 0.25 * r {
            Regime::Inner
        } else if rho < 4.0 * r {
            Regime::Near
        } else {
            Regime::Outer
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            Regime::Inner => "inner",
            Regime::Near => "near",
            Regime::Outer => "outer",
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct BoundEnvelope {
    pub kind: KernelKind,
    pub alpha: f64,
}

impl BoundEnvelope {
    pub fn new(kind: KernelKind, alpha: f64) -> Result<Self> {
        let env = Self { kind, alpha };
        if !(alpha >= 0.0 && alpha <= env.alpha_max(Regime::Inner)) {
            return Err(invalid(format!("alpha = {alpha} is not admissible for {kind} in any regime")));
        }
        Ok(env)
    }

    /// Largest admissible α in a regime.
    pub fn alpha_max(&self, regime: Regime) -> f64 {
        match (self.kind, regime) {
            (KernelKind::Gamma1, Regime::Inner | Regime::Outer) => 3.0,
            _ => 1.0,
        }
    }

    pub fn admits(&self, regime: Regime) -> bool {
        self.alpha >= 0.0 && self.alpha <= self.alpha_max(regime)
    }
}

fn dist2(r: f64, rho: f64, zeta: f64) -> f64 {
    (r - rho).powi(2) + zeta * zeta
}

/// `K = 4rρ / ((r − ρ)² + ζ²)`.
pub fn modulus(r: f64, rho: f64, zeta: f64) -> f64 {
    4.0 * r * rho / dist2(r, rho, zeta)
}

/// Envelope value with unit constant.
pub fn envelope_value(env: &BoundEnvelope, r: f64, rho: f64, zeta: f64) -> Result<f64> {
    let regime = Regime::of(r, rho);
    if !env.admits(regime) {
        return Err(Error::InadmissibleExponent { alpha: env.alpha, regime: regime.name() });
    }
    let d2 = dist2(r, rho, zeta);
    if d2 == 0.0 {
        return Err(Error::Diagonal { r });
    }
    let m = r.max(rho);
    let a = env.alpha;
    Ok(match env.kind {
        KernelKind::Gamma23 => 1.0 / (m.powf(a) * d2.powf(0.5 * (2.0 - a))),
        KernelKind::Gamma1 => zeta.abs() / (m.powf(a) * d2.powf(0.5 * (3.0 - a))),
    })
}

/// Global bounds `((ρ + r)/dist³, |ζ|/dist³)` for `|Γ₂|, |Γ₃|` and `|Γ₁|`.
pub fn crude_bounds(r: f64, rho: f64, zeta: f64) -> Result<(f64, f64)> {
    let d2 = dist2(r, rho, zeta);
    if d2 == 0.0 {
        return Err(Error::Diagonal { r });
    }
    let d3 = d2 * d2.sqrt();
    Ok(((rho + r) / d3, zeta.abs() / d3))
}

/// Log-spaced scan grid in `r`, `ρ/r` and `|ζ|/r` (both signs of ζ).
/// Both sides of the regime edges `ρ/r = 1/4` and `ρ/r = 4` are always added as nodes.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct LogGrid {
    pub r_min: f64,
    pub r_max: f64,
    pub n_r: usize,
    pub ratio_min: f64,
    pub ratio_max: f64,
    pub n_ratio: usize,
    pub zeta_ratio_min: f64,
    pub zeta_ratio_max: f64,
    pub n_zeta: usize,
    /// Points with `dist < diag_margin · max{r, ρ}` are skipped.
    pub diag_margin: f64,
}

impl Default for LogGrid {
    fn default() -> Self {
        Self {
            r_min: 2.0,
            r_max: 1e3,
            n_r: 8,
            ratio_min: 1e-2,
            ratio_max: 1e2,
            n_ratio: 25,
            zeta_ratio_min: 1e-3,
            zeta_ratio_max: 1.0,
            n_zeta: 25,
            diag_margin: 1e-3,
        }
    }
}

fn log_space(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    if n == 1 {
        return vec![lo];
    }
    let (a, b) = (lo.ln(), hi.ln());
    (0..n).map(|i| (a + (b - a) * i as f64 / (n - 1) as f64).exp()).collect()
}

impl LogGrid {
    pub fn validate(&self) -> Result<()> {
        let ok = |lo: f64, hi: f64, n: usize| lo > 0.0 && hi >= lo && hi.is_finite() && n >= 1;
        if !(ok(self.r_min, self.r_max, self.n_r)
            && ok(self.ratio_min, self.ratio_max, self.n_ratio)
            && ok(self.zeta_ratio_min, self.zeta_ratio_max, self.n_zeta))
        {
            return Err(invalid("scan grid needs 0 < min <= max and at least one node per axis"));
        }
        if !(self.r_min > 1.0) {
            return Err(invalid(format!("scan grid must satisfy r > 1, got r_min = {}", self.r_min)));
        }
        if !(self.diag_margin >= 0.0) {
            return Err(invalid("diagonal margin must be non-negative"));
        }
        Ok(())
    }

    /// Twofold densification keeping every old node: `n → 2n − 1`.
    pub fn refined(&self) -> LogGrid {
        let up = |n: usize| if n > 1 { 2 * n - 1 } else { 1 };
        LogGrid { n_r: up(self.n_r), n_ratio: up(self.n_ratio), n_zeta: up(self.n_zeta), ..self.clone() }
    }

    pub fn points(&self) -> Vec<[f64; 3]> {
        let rs = log_space(self.r_min, self.r_max, self.n_r);
        let mut ts = log_space(self.ratio_min, self.ratio_max, self.n_ratio);
        // regime edges as nodes on both sides: suprema sit at the edges
        // (ρ → 4r from below for the near regime, ρ → r/4 from below for
        // the inner one), which a log grid would only reach slowly
        for edge in [0.25 * (1.0 - 1e-12), 0.25, 4.0 * (1.0 - 1e-12), 4.0] {
            if edge > self.ratio_min && edge < self.ratio_max {
                ts.push(edge);
            }
        }
        ts.sort_by(f64::total_cmp);
        ts.dedup();
        let ss = log_space(self.zeta_ratio_min, self.zeta_ratio_max, self.n_zeta);
        let mut out = Vec::with_capacity(rs.len() * ts.len() * ss.len() * 2);
        for &r in &rs {
            for &t in &ts {
                for &s in &ss {
                    out.push([r, r * t, -r * s]);
                    out.push([r, r * t, r * s]);
                }
            }
        }
        out
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "type")]
pub enum ScanGrid {
    LogSpaced(LogGrid),
    Explicit { points: Vec<[f64; 3]>, diag_margin: f64 },
}

impl ScanGrid {
    fn points(&self) -> Vec<[f64; 3]> {
        match self {
            ScanGrid::LogSpaced(g) => g.points(),
            ScanGrid::Explicit { points, .. } => points.clone(),
        }
    }

    fn margin(&self) -> f64 {
        match self {
            ScanGrid::LogSpaced(g) => g.diag_margin,
            ScanGrid::Explicit { diag_margin, .. } => *diag_margin,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct ScanPoint {
    pub r: f64,
    pub rho: f64,
    pub zeta: f64,
    pub k: f64,
    pub regime: Regime,
    /// `|Γ₂| + |Γ₃|` or `|Γ₁|`.
    pub kernel: f64,
    pub envelope: f64,
    pub ratio: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CellSummary {
    pub regime: Option<Regime>,
    pub k_above_one: Option<bool>,
    pub count: usize,
    pub sup: f64,
    pub argmax: Option<[f64; 3]>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct PointFailure {
    pub r: f64,
    pub rho: f64,
    pub zeta: f64,
    pub message: String,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Stability {
    /// Relative change of each regime supremum, in the order of `regimes`.
    pub regime_changes: Vec<f64>,
    /// Relative change of each `K`-split cell, in the order of `cells`.
    /// Informational: these suprema sit on the `K = 1` contour, which is
    /// not a grid line, so they keep creeping under refinement.
    pub cell_changes: Vec<f64>,
    pub overall_change: f64,
    /// Overall and per-regime suprema moved by less than 5%.
    pub stable: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ScanReport {
    pub envelope: BoundEnvelope,
    pub grid: ScanGrid,
    pub points: Vec<ScanPoint>,
    pub regimes: Vec<CellSummary>,
    pub cells: Vec<CellSummary>,
    pub overall: CellSummary,
    pub skipped_diagonal: usize,
    pub skipped_regime: usize,
    pub failures: Vec<PointFailure>,
    /// `K <= 1` points violating `dist² >= max{r, ρ}²/2`.
    pub k_le_one_violations: usize,
    /// Points where a crude bound failed.
    pub crude_violations: usize,
    pub stability: Option<Stability>,
}

const CELLS: [(Regime, bool); 6] = [
    (Regime::Inner, false),
    (Regime::Inner, true),
    (Regime::Near, false),
    (Regime::Near, true),
    (Regime::Outer, false),
    (Regime::Outer, true),
];

enum Outcome {
    Point(ScanPoint, bool, bool),
    Diagonal,
    Gated,
    Failed(PointFailure),
}

fn scan_one(env: &BoundEnvelope, [r, rho, zeta]: [f64; 3], margin: f64, rel_tol: f64) -> Outcome {
    if !(r > 0.0 && rho > 0.0) {
        return Outcome::Failed(PointFailure { r, rho, zeta, message: "radii must be positive".into() });
    }
    let d2 = dist2(r, rho, zeta);
    let m = r.max(rho);
    if d2 == 0.0 || d2.sqrt() < margin * m {
        return Outcome::Diagonal;
    }
    let regime = Regime::of(r, rho);
    if !env.admits(regime) {
        return Outcome::Gated;
    }
    if env.kind == KernelKind::Gamma1 && zeta == 0.0 {
        // both sides vanish identically
        return Outcome::Gated;
    }
    let (crude23, crude1) = match crude_bounds(r, rho, zeta) {
        Ok(c) => c,
        Err(e) => return Outcome::Failed(PointFailure { r, rho, zeta, message: e.to_string() }),
    };
    let tol = Tolerance::new(1e-6 * rel_tol * crude23.max(crude1), rel_tol);
    let est = kernel_estimate(r, rho, zeta, tol, DEFAULT_MAX_PANELS);
    if !est.converged {
        return Outcome::Failed(PointFailure {
            r,
            rho,
            zeta,
            message: format!("kernel quadrature did not converge (error {:e})", est.error.iter().fold(0.0f64, |a, &b| a.max(b))),
        });
    }
    let [g1, g2, g3] = est.value;
    let slack = 1.0 + 1e-9;
    let crude_ok = g1.abs() <= crude1 * slack + est.error[0]
        && g2.abs() <= crude23 * slack + est.error[1]
        && g3.abs() <= crude23 * slack + est.error[2];
    let k = 4.0 * r * rho / d2;
    let k_ok = k > 1.0 || d2 >= 0.5 * m * m;
    let kernel = match env.kind {
        KernelKind::Gamma23 => g2.abs() + g3.abs(),
        KernelKind::Gamma1 => g1.abs(),
    };
    let envelope = match envelope_value(env, r, rho, zeta) {
        Ok(v) => v,
        Err(e) => return Outcome::Failed(PointFailure { r, rho, zeta, message: e.to_string() }),
    };
    Outcome::Point(ScanPoint { r, rho, zeta, k, regime, kernel, envelope, ratio: kernel / envelope }, crude_ok, k_ok)
}

fn summarize(points: &[ScanPoint], regime: Option<Regime>, k_above_one: Option<bool>) -> CellSummary {
    let mut cell = CellSummary { regime, k_above_one, count: 0, sup: 0.0, argmax: None };
    for p in points {
        if regime.is_none_or(|g| g == p.regime) && k_above_one.is_none_or(|b| b == (p.k > 1.0)) {
            cell.count += 1;
            if p.ratio > cell.sup || cell.argmax.is_none() {
                cell.sup = p.ratio;
                cell.argmax = Some([p.r, p.rho, p.zeta]);
            }
        }
    }
    cell
}

/// Supremum of `|Γ| / envelope` over the grid, per regime and `K` split.
///
/// Kernel values are computed to relative accuracy `rel_tol`. Points that
/// fail quadrature are listed and excluded.
pub fn bound_scan(kind: KernelKind, alpha: f64, grid: &ScanGrid, rel_tol: f64) -> Result<ScanReport> {
    let env = BoundEnvelope::new(kind, alpha)?;
    if let ScanGrid::LogSpaced(g) = grid {
        g.validate()?;
    }
    if !(rel_tol > 0.0) {
        return Err(invalid("scan tolerance must be positive"));
    }
    let margin = grid.margin();
    let outcomes: Vec<Outcome> = grid.points().into_par_iter().map(|p| scan_one(&env, p, margin, rel_tol)).collect();
    let mut report = ScanReport {
        envelope: env,
        grid: grid.clone(),
        points: Vec::new(),
        regimes: Vec::new(),
        cells: Vec::new(),
        overall: summarize(&[], None, None),
        skipped_diagonal: 0,
        skipped_regime: 0,
        failures: Vec::new(),
        k_le_one_violations: 0,
        crude_violations: 0,
        stability: None,
    };
    for o in outcomes {
        match o {
            Outcome::Point(p, crude_ok, k_ok) => {
                report.crude_violations += usize::from(!crude_ok);
                report.k_le_one_violations += usize::from(!k_ok);
                report.points.push(p);
            }
            Outcome::Diagonal => report.skipped_diagonal += 1,
            Outcome::Gated => report.skipped_regime += 1,
            Outcome::Failed(f) => report.failures.push(f),
        }
    }
    report.regimes =
        [Regime::Inner, Regime::Near, Regime::Outer].iter().map(|&g| summarize(&report.points, Some(g), None)).collect();
    report.cells = CELLS.iter().map(|&(g, k)| summarize(&report.points, Some(g), Some(k))).collect();
    report.overall = summarize(&report.points, None, None);
    Ok(report)
}

fn relative_change(coarse: f64, fine: f64) -> f64 {
    if coarse == fine {
        0.0
    } else {
        (fine - coarse).abs() / coarse.abs().max(fine.abs())
    }
}

/// Runs the scan on `grid` and on its twofold refinement; the returned
/// report is the fine one with the stability assessment attached. Cells
/// empty on either grid are not judged.
/// Stability is judged on the overall and per-regime suprema.
pub fn bound_scan_refined(kind: KernelKind, alpha: f64, grid: &LogGrid, rel_tol: f64) -> Result<(ScanReport, ScanReport)> {
    let coarse = bound_scan(kind, alpha, &ScanGrid::LogSpaced(grid.clone()), rel_tol)?;
    let mut fine = bound_scan(kind, alpha, &ScanGrid::LogSpaced(grid.refined()), rel_tol)?;
    let changes = |a: &[CellSummary], b: &[CellSummary]| -> Vec<f64> {
        a.iter()
            .zip(b)
            .map(|(c, f)| if c.count == 0 || f.count == 0 { 0.0 } else { relative_change(c.sup, f.sup) })
            .collect()
    };
    let regime_changes = changes(&coarse.regimes, &fine.regimes);
    let cell_changes = changes(&coarse.cells, &fine.cells);
    let overall_change = relative_change(coarse.overall.sup, fine.overall.sup);
    let stable = overall_change < 0.05 && regime_changes.iter().all(|&c| c < 0.05);
    fine.stability = Some(Stability { regime_changes, cell_changes, overall_change, stable });
    Ok((coarse, fine))
}

#[derive(Serialize)]
struct CsvRow<'a> {
    r: f64,
    rho: f64,
    zeta: f64,
    #[serde(rename = "K")]
    k: f64,
    regime: &'a str,
    kernel: f64,
    envelope: f64,
    ratio: f64,
}

/// JSON-facing summary of a scan.
#[derive(Clone, Debug, Serialize)]
pub struct ScanSummary {
    pub kind: KernelKind,
    pub alpha: f64,
    pub points: usize,
    pub skipped_diagonal: usize,
    pub skipped_regime: usize,
    pub failures: Vec<PointFailure>,
    pub k_le_one_violations: usize,
    pub crude_violations: usize,
    pub overall: CellSummary,
    pub regimes: Vec<CellSummary>,
    pub cells: Vec<CellSummary>,
    pub stability: Option<Stability>,
}

impl ScanReport {
    pub fn summary(&self) -> ScanSummary {
        ScanSummary {
            kind: self.envelope.kind,
            alpha: self.envelope.alpha,
            points: self.points.len(),
            skipped_diagonal: self.skipped_diagonal,
            skipped_regime: self.skipped_regime,
            failures: self.failures.clone(),
            k_le_one_violations: self.k_le_one_violations,
            crude_violations: self.crude_violations,
            overall: self.overall.clone(),
            regimes: self.regimes.clone(),
            cells: self.cells.clone(),
            stability: self.stability.clone(),
        }
    }

    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        for p in &self.points {
            w.serialize(CsvRow {
                r: p.r,
                rho: p.rho,
                zeta: p.zeta,
                k: p.k,
                regime: p.regime.name(),
                kernel: p.kernel,
                envelope: p.envelope,
                ratio: p.ratio,
            })?;
        }
        w.flush()?;
        Ok(())
    }

    pub fn write_files(&self, csv_path: &Path, json_path: &Path) -> Result<()> {
        self.write_csv(std::fs::File::create(csv_path)?)?;
        let json = serde_json::to_string_pretty(&self.summary())?;
        std::fs::write(json_path, json + "\n")?;
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn small_grid() -> LogGrid {
        LogGrid { n_r: 3, n_ratio: 9, n_zeta: 7, ..LogGrid::default() }
    }

    #[test]
    fn envelope_examples() {
        let g23 = BoundEnvelope::new(KernelKind::Gamma23, 0.0).unwrap();
        assert_eq!(envelope_value(&g23, 2.0, 1.0, 0.0).unwrap(), 1.0);
        let g1 = BoundEnvelope::new(KernelKind::Gamma1, 3.0).unwrap();
        assert!((envelope_value(&g1, 1.0, 10.0, 5.0).unwrap() - 0.005).abs() < 1e-15);
        let g1_two = BoundEnvelope::new(KernelKind::Gamma1, 2.0).unwrap();
        assert!(matches!(
            envelope_value(&g1_two, 1.0, 2.0, 0.5),
            Err(Error::InadmissibleExponent { regime: "near", .. })
        ));
        assert!(BoundEnvelope::new(KernelKind::Gamma23, 1.5).is_err());
    }

    #[test]
    fn crude_examples() {
        assert_eq!(crude_bounds(1.0, 1.0, 1.0).unwrap(), (2.0, 1.0));
        assert_eq!(crude_bounds(1.0, 3.0, 0.0).unwrap().1, 0.0);
        assert!(crude_bounds(1.0, 1.0, 0.0).is_err());
    }

    #[test]
    fn regime_thresholds() {
        assert_eq!(Regime::of(4.0, 0.99), Regime::Inner);
        assert_eq!(Regime::of(4.0, 1.0), Regime::Near);
        assert_eq!(Regime::of(4.0, 15.9), Regime::Near);
        assert_eq!(Regime::of(4.0, 16.0), Regime::Outer);
    }

    #[test]
    fn single_point_scan() {
        let grid = ScanGrid::Explicit { points: vec![[3.0, 1.0, 0.5]], diag_margin: 1e-3 };
        let rep = bound_scan(KernelKind::Gamma23, 0.5, &grid, 1e-10).unwrap();
        assert_eq!(rep.points.len(), 1);
        assert_eq!(rep.overall.sup, rep.points[0].ratio);
        let t = crate::kernels::kernel_triple(3.0, 1.0, 0.5, 1e-14).unwrap();
        let env = envelope_value(&rep.envelope, 3.0, 1.0, 0.5).unwrap();
        assert!((rep.overall.sup - (t.gamma2.abs() + t.gamma3.abs()) / env).abs() < 1e-8 * rep.overall.sup);
    }

    #[test]
    fn gated_scan_skips_near_regime() {
        let rep = bound_scan(KernelKind::Gamma1, 3.0, &ScanGrid::LogSpaced(small_grid()), 1e-9).unwrap();
        assert!(rep.skipped_regime > 0);
        assert!(rep.points.iter().all(|p| p.regime != Regime::Near));
        assert!(rep.overall.sup.is_finite() && rep.overall.sup > 0.0);
    }

    #[test]
    fn scan_arithmetic_invariants() {
        let rep = bound_scan(KernelKind::Gamma23, 1.0, &ScanGrid::LogSpaced(small_grid()), 1e-9).unwrap();
        assert!(rep.failures.is_empty());
        assert_eq!(rep.k_le_one_violations, 0);
        assert_eq!(rep.crude_violations, 0);
        for p in &rep.points {
            assert!(p.ratio <= rep.overall.sup);
        }
        let total: usize = rep.cells.iter().map(|c| c.count).sum();
        assert_eq!(total, rep.points.len());
    }

    #[test]
    fn refinement_keeps_old_nodes() {
        let g = small_grid();
        let coarse = g.points();
        let fine = g.refined().points();
        for p in coarse.iter().step_by(17) {
            assert!(fine.iter().any(|q| (0..3).all(|i| (p[i] - q[i]).abs() <= 1e-12 * p[i].abs().max(1.0))));
        }
    }

    #[test]
    fn scan_rejects_r_at_most_one() {
        let g = LogGrid { r_min: 1.0, ..small_grid() };
        assert!(bound_scan(KernelKind::Gamma23, 0.0, &ScanGrid::LogSpaced(g), 1e-9).is_err());
    }

    #[test]
    fn csv_header_and_rows() {
        let grid = ScanGrid::Explicit { points: vec![[3.0, 1.0, 0.5], [3.0, 20.0, -1.0]], diag_margin: 1e-3 };
        let rep = bound_scan(KernelKind::Gamma1, 0.5, &grid, 1e-10).unwrap();
        let mut buf = Vec::new();
        rep.write_csv(&mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let mut lines = text.lines();
        assert_eq!(lines.next(), Some("r,rho,zeta,K,regime,kernel,envelope,ratio"));
        assert_eq!(lines.count(), 2);
    }

    #[test]
    fn envelope_decreases_in_alpha_when_far_from_diagonal() {
        // max{ρ, r} >= dist: raising α trades dist for the larger max
        for kind in [KernelKind::Gamma23, KernelKind::Gamma1] {
            let (r, rho, zeta) = (5.0, 3.0, 1.0);
            let a = envelope_value(&BoundEnvelope::new(kind, 0.0).unwrap(), r, rho, zeta).unwrap();
            let b = envelope_value(&BoundEnvelope::new(kind, 0.5).unwrap(), r, rho, zeta).unwrap();
            let c = envelope_value(&BoundEnvelope::new(kind, 1.0).unwrap(), r, rho, zeta).unwrap();
            assert!(a > b && b > c);
        }
    }
}
