//! Exponent arithmetic: the integrability window for `(δ, q)` given the
//! decay rate `μ`, right-hand-side rates, predicted velocity decay from
//! vorticity decay, the six region exponents, and log–log decay fits.

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};

/// `(δ, q)` with the three window predicates.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct FeasibleExponents {
    pub mu: f64,
    pub delta: f64,
    pub q: f64,
    /// `q > max{6(3−δ)/(6−δ), 2/μ}`.
    pub lower_ok: bool,
    /// `q < 3`.
    pub upper_ok: bool,
    /// `2 − δ/2 − (6−2δ)/q < 0`.
    pub negativity_ok: bool,
}

impl FeasibleExponents {
    pub fn evaluate(mu: f64, delta: f64, q: f64) -> Self {
        let lower = (6.0 * (3.0 - delta) / (6.0 - delta)).max(2.0 / mu);
        FeasibleExponents {
            mu,
            delta,
            q,
            lower_ok: q > lower,
            upper_ok: q < 3.0,
            negativity_ok: 2.0 - 0.5 * delta - (6.0 - 2.0 * delta) / q < 0.0,
        }
    }

    pub fn feasible(&self) -> bool {
        self.lower_ok && self.upper_ok && self.negativity_ok
    }

    /// Predicate bits `lower | upper << 1 | negativity << 2`.
    pub fn bits(&self) -> u8 {
        self.lower_ok as u8 | (self.upper_ok as u8) << 1 | (self.negativity_ok as u8) << 2
    }
}

/// Upper end of the admissible `δ₀` interval, `min{1, (6μ−4)/(2μ−1)}`.
pub fn delta0_upper(mu: f64) -> f64 {
    ((6.0 * mu - 4.0) / (2.0 * mu - 1.0)).min(1.0)
}

/// `δ₀` at the midpoint of `(0, min{1, (6μ−4)/(2μ−1)})` and
/// `q = ½(max{6(3−δ₀)/(6−δ₀), 2/μ} + 4(3−δ₀)/(4−δ₀))`.
pub fn paper_construction(mu: f64) -> Result<FeasibleExponents> {
    if mu.is_nan() || mu <= 2.0 / 3.0 {
        return Err(Error::Infeasible(format!("mu = {mu} <= 2/3: 2/mu >= 3 leaves no room below q < 3")));
    }
    let delta = 0.5 * delta0_upper(mu);
    let lower = (6.0 * (3.0 - delta) / (6.0 - delta)).max(2.0 / mu);
    let upper = 4.0 * (3.0 - delta) / (4.0 - delta);
    let q = 0.5 * (lower + upper);
    let out = FeasibleExponents::evaluate(mu, delta, q);
    if !out.feasible() {
        return Err(Error::Infeasible(format!("construction failed its own predicates at mu = {mu}: {out:?}")));
    }
    Ok(out)
}

/// Exhaustive predicate evaluation on a `(δ, q)` grid.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct FeasibilityRegion {
    pub mu: f64,
    pub delta_grid: Vec<f64>,
    pub q_grid: Vec<f64>,
    /// Row-major over `(δ, q)`.
    pub points: Vec<FeasibleExponents>,
    pub feasible_count: usize,
}

/// Cell-centred grid of `n` points in `(lo, hi)`.
pub fn open_grid(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    (0..n).map(|i| lo + (hi - lo) * (i as f64 + 0.5) / n as f64).collect()
}

pub fn feasibility_bruteforce(mu: f64, delta_grid: &[f64], q_grid: &[f64]) -> Result<FeasibilityRegion> {
    if delta_grid.iter().any(|d| !(*d > 0.0 && *d < 1.0)) || q_grid.iter().any(|q| !(*q > 2.0 && *q < 3.0)) {
        return Err(invalid("feasibility grids must lie in (0, 1) x (2, 3)"));
    }
    let mut points = Vec::with_capacity(delta_grid.len() * q_grid.len());
    for &d in delta_grid {
        for &q in q_grid {
            points.push(FeasibleExponents::evaluate(mu, d, q));
        }
    }
    let feasible_count = points.iter().filter(|p| p.feasible()).count();
    Ok(FeasibilityRegion { mu, delta_grid: delta_grid.to_vec(), q_grid: q_grid.to_vec(), points, feasible_count })
}

impl FeasibilityRegion {
    pub fn is_empty(&self) -> bool {
        self.feasible_count == 0
    }

    pub fn area_fraction(&self) -> f64 {
        self.feasible_count as f64 / self.points.len().max(1) as f64
    }

    /// Whether a feasible grid node lies within one grid step of `(δ, q)`
    /// in both directions.
    pub fn covers(&self, delta: f64, q: f64) -> bool {
        let step = |g: &[f64]| if g.len() > 1 { (g[g.len() - 1] - g[0]) / (g.len() - 1) as f64 } else { f64::INFINITY };
        let (sd, sq) = (step(&self.delta_grid) * (1.0 + 1e-9), step(&self.q_grid) * (1.0 + 1e-9));
        self.points.iter().any(|p| p.feasible() && (p.delta - delta).abs() <= sd && (p.q - q).abs() <= sq)
    }

    /// CSV rows `mu, delta, q, lower_ok, upper_ok, negativity_ok, feasible`.
    pub fn write_csv<W: std::io::Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(["mu", "delta", "q", "lower_ok", "upper_ok", "negativity_ok", "feasible"])?;
        for p in &self.points {
            w.write_record([
                p.mu.to_string(),
                p.delta.to_string(),
                p.q.to_string(),
                (p.lower_ok as u8).to_string(),
                (p.upper_ok as u8).to_string(),
                (p.negativity_ok as u8).to_string(),
                (p.feasible() as u8).to_string(),
            ])?;
        }
        w.flush()?;
        Ok(())
    }
}

/// `(1 − 4/q, (2 − δ/2 − (6−2δ)/q) · 2/(2−δ))`.
pub fn rhs_rates(delta: f64, q: f64) -> Result<(f64, f64)> {
    if !(delta > 0.0 && delta <= 1.0 && q > 0.0) {
        return Err(invalid(format!("rhs rates need 0 < delta <= 1 and q > 0, got ({delta}, {q})")));
    }
    Ok((1.0 - 4.0 / q, (2.0 - 0.5 * delta - (6.0 - 2.0 * delta) / q) * 2.0 / (2.0 - delta)))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BetaCase {
    Gt2,
    Between,
    Eq2,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct DecayPrediction {
    pub beta: f64,
    /// Power of `(1 + r)`.
    pub exponent: f64,
    /// Extra factor `ln(1 + r)`.
    pub has_log: bool,
    pub beta_case: BetaCase,
}

/// Predicted decay of the meridional velocity for `w_θ <= C r^{-β}`.
pub fn predicted_decay(beta: f64) -> Result<DecayPrediction> {
    if !(beta > 1.0 && beta.is_finite()) {
        return Err(invalid(format!("decay prediction needs beta > 1, got {beta}")));
    }
    let (exponent, has_log, beta_case) = if beta > 2.0 {
        (-1.5 + 1.0 / (2.0 * (beta - 1.0)), false, BetaCase::Gt2)
    } else if beta < 2.0 {
        (1.0 - beta, false, BetaCase::Between)
    } else {
        (-1.0, true, BetaCase::Eq2)
    };
    Ok(DecayPrediction { beta, exponent, has_log, beta_case })
}

/// Exponents of the six region contributions.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct TermExponents {
    pub exponents: [f64; 6],
    /// Logarithmic factor on the exponent (only `I₂` at `β = 2`).
    pub log_flags: [bool; 6],
    pub max: f64,
}

pub fn term_exponents(beta: f64, alpha: f64, gamma: f64, delta: f64) -> Result<TermExponents> {
    if !(beta > 1.0) {
        return Err(invalid(format!("beta must exceed 1, got {beta}")));
    }
    if !((0.0..1.0).contains(&alpha) && (0.0..=1.0).contains(&gamma) && (0.0..=1.0).contains(&delta)) {
        return Err(invalid(format!("need 0 <= alpha < 1 and gamma, delta in [0, 1], got ({alpha}, {gamma}, {delta})")));
    }
    let i1 = -1.5 + gamma;
    let (i2, log2) = if beta > 2.0 {
        (-1.0 + gamma * (2.0 - beta), false)
    } else if beta == 2.0 {
        (-1.0, true)
    } else {
        (1.0 - beta, false)
    };
    let i3 = 2.0 - beta - alpha - delta + delta * alpha;
    let i4 = 1.0 - beta - alpha + delta * alpha;
    let i6 = 1.0 - beta;
    let exponents = [i1, i2, i3, i4, i3, i6];
    let max = exponents.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    Ok(TermExponents { exponents, log_flags: [false, log2, false, false, false, false], max })
}

/// Resolution of the `(α, γ, δ)` search grid.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SplitGrid {
    pub alpha_points: usize,
    pub gamma_points: usize,
    pub delta_points: usize,
}

impl Default for SplitGrid {
    fn default() -> Self {
        SplitGrid { alpha_points: 101, gamma_points: 201, delta_points: 101 }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct SplitOptimum {
    pub beta: f64,
    pub alpha: f64,
    pub gamma: f64,
    pub delta: f64,
    pub achieved: f64,
    /// `1/(2(β−1))` for `β > 2`, else 0.
    pub balanced_gamma: f64,
    pub predicted_exponent: f64,
    pub gamma_step: f64,
}

/// Grid minimization of the largest region exponent. Ties go to the
/// smallest `γ`, then the largest `δ`, then the largest `α`. `α` runs over
/// `[0, 1)`; `γ` and `δ` over `[0, 1]`.
pub fn optimize_split(beta: f64, grid: SplitGrid) -> Result<SplitOptimum> {
    let predicted = predicted_decay(beta)?;
    if grid.alpha_points < 1 || grid.gamma_points < 2 || grid.delta_points < 2 {
        return Err(invalid("split grid needs at least 1 alpha and 2 gamma/delta points"));
    }
    let closed = |n: usize| -> Vec<f64> { (0..n).map(|i| i as f64 / (n - 1) as f64).collect() };
    let alphas: Vec<f64> = (0..grid.alpha_points).map(|i| i as f64 / grid.alpha_points as f64).collect();
    let gammas = closed(grid.gamma_points);
    let deltas = closed(grid.delta_points);
    let mut best: Option<(f64, f64, f64, f64)> = None;
    const EPS: f64 = 1e-12;
    for &g in &gammas {
        for &d in deltas.iter().rev() {
            for &a in alphas.iter().rev() {
                let m = term_exponents(beta, a, g, d)?.max;
                // strict improvement only, so the iteration order implements the tie-breaks
                if best.is_none_or(|b| m < b.0 - EPS) {
                    best = Some((m, a, g, d));
                }
            }
        }
    }
    let (achieved, alpha, gamma, delta) = best.expect("grids are non-empty");
    let balanced_gamma = if beta > 2.0 { 1.0 / (2.0 * (beta - 1.0)) } else { 0.0 };
    Ok(SplitOptimum {
        beta,
        alpha,
        gamma,
        delta,
        achieved,
        balanced_gamma,
        predicted_exponent: predicted.exponent,
        gamma_step: 1.0 / (grid.gamma_points - 1) as f64,
    })
}

/// Largest region exponent along `α = δ = 1 − ε` at fixed `γ`.
pub fn epsilon_trend(beta: f64, gamma: f64, eps: &[f64]) -> Result<Vec<(f64, f64)>> {
    eps.iter()
        .map(|&e| {
            if !(e > 0.0 && e <= 1.0) {
                return Err(invalid(format!("epsilon must lie in (0, 1], got {e}")));
            }
            Ok((e, term_exponents(beta, 1.0 - e, gamma, 1.0 - e)?.max))
        })
        .collect()
}

/// One sample of a decay trace.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct RateSample {
    pub r: f64,
    pub value: f64,
    /// Absolute error estimate of `value`.
    pub error: f64,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DecayModel {
    /// `ln|v| = a + b ln r`.
    Power,
    /// `ln|v| = a + b ln r + c ln ln r`.
    PowerLog,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct LogCorrectedFit {
    pub slope: f64,
    pub intercept: f64,
    /// Coefficient of `ln ln r`.
    pub log_power: f64,
    pub residual: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct FitResult {
    pub slope: f64,
    pub intercept: f64,
    /// Weighted RMS residual of the power model in log space.
    pub residual: f64,
    pub with_log_correction: LogCorrectedFit,
    pub selected: DecayModel,
    pub samples_used: usize,
    pub warnings: Vec<String>,
}

impl FitResult {
    /// Slope of the selected model.
    pub fn selected_slope(&self) -> f64 {
        match self.selected {
            DecayModel::Power => self.slope,
            DecayModel::PowerLog => self.with_log_correction.slope,
        }
    }
}

/// Relative error floor used for fit weights, so that samples with tiny
/// quadrature errors do not dominate.
const WEIGHT_FLOOR: f64 = 1e-3;

fn weighted_fit(x: &DMatrix<f64>, y: &DVector<f64>, w: &DVector<f64>) -> Result<(DVector<f64>, f64)> {
    let sw = w.map(f64::sqrt);
    let xw = DMatrix::from_fn(x.nrows(), x.ncols(), |i, j| x[(i, j)] * sw[i]);
    let yw = y.component_mul(&sw);
    let coef = xw
        .clone()
        .svd(true, true)
        .solve(&yw, 1e-14)
        .map_err(|e| invalid(format!("least squares failed: {e}")))?;
    let resid = &yw - &xw * &coef;
    let rms = (resid.norm_squared() / w.sum()).sqrt();
    Ok((coef, rms))
}

/// Weighted least squares of `ln|value|` against `ln r`, with the
/// alternative `ln ln r` regressor. The log model is selected when it
/// halves the residual of a power law that does not already fit to 1e-9.
pub fn fit_decay(samples: &[RateSample]) -> Result<FitResult> {
    if samples.len() < 5 {
        return Err(Error::TooFewSamples { kept: samples.len(), needed: 5 });
    }
    if samples.windows(2).any(|s| !(s[1].r > s[0].r)) {
        return Err(invalid("sample radii must be strictly increasing"));
    }
    if !(samples[0].r > 1.0) {
        return Err(invalid(format!("fits need r > 1, got r_min = {}", samples[0].r)));
    }
    let mut warnings = Vec::new();
    let kept: Vec<&RateSample> = samples.iter().filter(|s| s.value > 0.0 && s.value.is_finite()).collect();
    if kept.len() < samples.len() {
        warnings.push(format!("dropped {} non-positive samples", samples.len() - kept.len()));
    }
    if kept.len() < 5 {
        return Err(Error::TooFewSamples { kept: kept.len(), needed: 5 });
    }
    let n = kept.len();
    let y = DVector::from_iterator(n, kept.iter().map(|s| s.value.ln()));
    let w = DVector::from_iterator(
        n,
        kept.iter().map(|s| {
            let rel = (s.error.abs() / s.value).max(0.0) + WEIGHT_FLOOR;
            1.0 / (rel * rel)
        }),
    );
    let x1 = DMatrix::from_fn(n, 2, |i, j| if j == 0 { 1.0 } else { kept[i].r.ln() });
    let x2 = DMatrix::from_fn(n, 3, |i, j| match j {
        0 => 1.0,
        1 => kept[i].r.ln(),
        _ => kept[i].r.ln().ln(),
    });
    let (c1, rms1) = weighted_fit(&x1, &y, &w)?;
    let (c2, rms2) = weighted_fit(&x2, &y, &w)?;
    let selected = if rms2 < 0.5 * rms1 && rms1 > 1e-9 { DecayModel::PowerLog } else { DecayModel::Power };
    Ok(FitResult {
        slope: c1[1],
        intercept: c1[0],
        residual: rms1,
        with_log_correction: LogCorrectedFit { slope: c2[1], intercept: c2[0], log_power: c2[2], residual: rms2 },
        selected,
        samples_used: n,
        warnings,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn construction_at_mu_one() {
        let c = paper_construction(1.0).unwrap();
        assert_eq!(c.delta, 0.5);
        let q = 0.5 * (30.0 / 11.0 + 20.0 / 7.0);
        assert!((c.q - q).abs() < 1e-15 && (c.q - 2.792).abs() < 1e-3);
        assert!((2.0 - 0.25 - 5.0 / c.q + 0.041).abs() < 1e-3);
        assert!(c.feasible());
    }

    #[test]
    fn construction_rejects_small_mu() {
        for mu in [0.6, 2.0 / 3.0, 0.0, -1.0, f64::NAN] {
            assert!(matches!(paper_construction(mu), Err(Error::Infeasible(_))), "{mu}");
        }
        for mu in [10.0, 100.0] {
            assert!(paper_construction(mu).unwrap().feasible());
        }
    }

    #[test]
    fn construction_sound_on_random_mu() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for _ in 0..200 {
            let mu = rng.gen_range(2.0 / 3.0..=10.0);
            if mu <= 2.0 / 3.0 {
                continue;
            }
            let c = paper_construction(mu).unwrap();
            assert!(c.lower_ok && c.upper_ok && c.negativity_ok, "{c:?}");
        }
    }

    #[test]
    fn bruteforce_agrees_with_threshold() {
        let d = open_grid(0.0, 1.0, 200);
        let q = open_grid(2.0, 3.0, 200);
        for mu in [0.5, 0.6, 2.0 / 3.0] {
            assert!(feasibility_bruteforce(mu, &d, &q).unwrap().is_empty(), "{mu}");
        }
        for mu in [0.68, 0.7, 1.0, 2.0] {
            let region = feasibility_bruteforce(mu, &d, &q).unwrap();
            assert!(!region.is_empty(), "{mu}");
            let c = paper_construction(mu).unwrap();
            assert!(region.covers(c.delta, c.q), "{mu}");
        }
        assert!(feasibility_bruteforce(1.0, &[1.0], &q).is_err());
    }

    #[test]
    fn region_shrinks_towards_threshold() {
        let d = open_grid(0.0, 1.0, 400);
        let q = open_grid(2.0, 3.0, 400);
        let areas: Vec<f64> =
            [0.75, 0.72, 0.7, 0.69, 0.68, 0.67].iter().map(|&m| feasibility_bruteforce(m, &d, &q).unwrap().area_fraction()).collect();
        assert!(areas.windows(2).all(|w| w[1] <= w[0]), "{areas:?}");
    }

    #[test]
    fn rhs_rate_examples() {
        assert_eq!(rhs_rates(0.3, 4.0).unwrap().0, 0.0);
        let (_, b) = rhs_rates(0.5, 2.792).unwrap();
        assert!((b - (2.0 - 0.25 - 5.0 / 2.792) * 2.0 / 1.5).abs() < 1e-15);
        assert!((b + 0.055).abs() < 2e-3);
        assert!(rhs_rates(0.0, 2.5).is_err());
    }

    #[test]
    fn prediction_table() {
        let p = predicted_decay(3.0).unwrap();
        assert_eq!((p.exponent, p.has_log, p.beta_case), (-1.25, false, BetaCase::Gt2));
        let p = predicted_decay(1.5).unwrap();
        assert_eq!((p.exponent, p.has_log), (-0.5, false));
        let p = predicted_decay(2.0).unwrap();
        assert_eq!((p.exponent, p.has_log, p.beta_case), (-1.0, true, BetaCase::Eq2));
        assert!(predicted_decay(1.0).is_err());
        let above = predicted_decay(2.0 + 1e-9).unwrap().exponent;
        let below = predicted_decay(2.0 - 1e-9).unwrap().exponent;
        assert!((above + 1.0).abs() < 1e-8 && (below + 1.0).abs() < 1e-8);
    }

    #[test]
    fn balancing_identity() {
        for beta in [2.1, 3.0, 5.0, 10.0] {
            let g = 1.0 / (2.0 * (beta - 1.0));
            let t = term_exponents(beta, 0.5, g, 0.5).unwrap();
            assert!((t.exponents[0] - t.exponents[1]).abs() <= 4.0 * f64::EPSILON, "{beta}");
        }
    }

    #[test]
    fn case_examples() {
        let t = epsilon_trend(3.0, 0.25, &[1e-1, 1e-2, 1e-4]).unwrap();
        assert!(t.windows(2).all(|w| (w[1].1 + 1.25).abs() <= (w[0].1 + 1.25).abs() + 1e-15));
        assert!((t[2].1 + 1.25).abs() < 1e-12);
        let b = term_exponents(1.5, 0.3, 0.0, 1.0).unwrap();
        assert_eq!(b.max, -0.5);
        assert_eq!(term_exponents(4.0, 0.2, 0.0, 0.4).unwrap().exponents[0], -1.5);
        assert!(term_exponents(2.0, 0.2, 0.1, 0.4).unwrap().log_flags[1]);
        assert!(term_exponents(3.0, 1.0, 0.1, 0.4).is_err());
    }

    #[test]
    fn optimizer_recovers_balancing_choice() {
        for (beta, gamma, achieved) in [(3.0, 0.25, -1.25), (5.0, 0.125, -1.375)] {
            let o = optimize_split(beta, SplitGrid::default()).unwrap();
            assert!((o.gamma - gamma).abs() <= o.gamma_step, "{o:?}");
            assert!((o.achieved - achieved).abs() < 0.02, "{o:?}");
            assert!(o.achieved >= o.predicted_exponent - o.gamma_step * beta);
        }
        let o = optimize_split(1.5, SplitGrid::default()).unwrap();
        assert_eq!((o.gamma, o.delta, o.achieved), (0.0, 1.0, -0.5));
    }

    fn synthetic(f: impl Fn(f64) -> f64) -> Vec<RateSample> {
        (0..8).map(|j| 10.0 * 2f64.powi(j)).map(|r| RateSample { r, value: f(r), error: 0.0 }).collect()
    }

    #[test]
    fn fit_exact_power_law() {
        let fit = fit_decay(&synthetic(|r| 3.0 * r.powf(-1.25))).unwrap();
        assert!((fit.slope + 1.25).abs() < 1e-6);
        assert_eq!(fit.selected, DecayModel::Power);
    }

    #[test]
    fn fit_log_corrected_law() {
        let fit = fit_decay(&synthetic(|r| 0.7 * r.ln() / r)).unwrap();
        assert_eq!(fit.selected, DecayModel::PowerLog);
        assert!((fit.selected_slope() + 1.0).abs() < 0.02);
    }

    #[test]
    fn fit_rejects_bad_input() {
        let mut s = synthetic(|r| r.powf(-2.0));
        s[2].value = 0.0;
        s[3].value = -1.0;
        s[4].value = f64::NAN;
        s[5].value = 0.0;
        assert!(matches!(fit_decay(&s), Err(Error::TooFewSamples { kept: 4, .. })));
        let mut s = synthetic(|r| r.powf(-2.0));
        s[1].value = 0.0;
        let fit = fit_decay(&s).unwrap();
        assert_eq!(fit.samples_used, 7);
        assert_eq!(fit.warnings.len(), 1);
        let mut s = synthetic(|r| r.powf(-2.0));
        s[0].r = 1.0;
        assert!(fit_decay(&s).is_err());
    }

    proptest! {
        #[test]
        fn construction_always_feasible(mu in 0.6667f64..50.0) {
            prop_assume!(mu > 2.0 / 3.0);
            let c = paper_construction(mu).unwrap();
            prop_assert!(c.feasible());
            prop_assert!(c.delta > 0.0 && c.delta < 1.0);
        }

        #[test]
        fn case_a_ordering(beta in 2.01f64..20.0, a in 0.01f64..0.99, d in 0.01f64..0.99) {
            // I₃ >= I₆ >= I₄ for α, δ in (0, 1)
            let t = term_exponents(beta, a, 1.0 / (2.0 * (beta - 1.0)), d).unwrap();
            prop_assert!(t.exponents[2] >= t.exponents[5] && t.exponents[5] >= t.exponents[3]);
        }

        #[test]
        fn fit_recovers_random_power(slope in -4.0f64..-0.2, c in 0.01f64..100.0) {
            let fit = fit_decay(&synthetic(|r| c * r.powf(slope))).unwrap();
            prop_assert!((fit.slope - slope).abs() < 1e-9);
            prop_assert_eq!(fit.selected, DecayModel::Power);
        }
    }
}
