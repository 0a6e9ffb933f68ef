//! Subcommand bodies. Each writes its files under `out` and returns whether
//! the property it checks held.

use std::fs;
use std::path::Path;

use anyhow::{Context, Result};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use meridian::biot_savart::{decay_trace, reconstruct, write_trace_csv, DecaySample};
use meridian::bounds::{bound_scan, bound_scan_refined, ScanGrid, ScanSummary};
use meridian::geometry::{
    curl_field, power_law_vorticity, stream_function_field, AxisymField, MeridianPoint, Profile, VorticityComponent,
};
use meridian::norms::{bmo_oscillation_ln, disk_mean_ln, BmoVariant};
use meridian::rates::{
    feasibility_bruteforce, fit_decay, open_grid, paper_construction, predicted_decay, DecayPrediction,
    FeasibleExponents, FitResult, RateSample,
};

use crate::config::{RoundtripCase, RunConfig};

fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    let text = serde_json::to_string_pretty(value)?;
    fs::write(path, text + "\n").with_context(|| format!("writing {}", path.display()))
}

fn tag(x: f64) -> String {
    format!("{x}").replace('-', "m")
}

#[derive(Serialize)]
struct KernelScanSummary {
    refined: bool,
    all_stable: Option<bool>,
    total_failures: usize,
    scans: Vec<ScanSummary>,
}

/// One scan per α; with `refine` the refined report is written and stability
/// decides the outcome, otherwise only quadrature failures do.
pub fn kernel_scan(cfg: &RunConfig, out: &Path) -> Result<bool> {
    let c = &cfg.kernel_scan;
    let mut scans = vec![];
    for &alpha in &c.alphas {
        let report = if c.refine {
            bound_scan_refined(c.kind, alpha, &c.grid, c.rel_tol)?.1
        } else {
            bound_scan(c.kind, alpha, &ScanGrid::LogSpaced(c.grid.clone()), c.rel_tol)?
        };
        let stem = format!("kernel_scan_{}_alpha_{}", c.kind, tag(alpha));
        report.write_files(&out.join(format!("{stem}.csv")), &out.join(format!("{stem}.json")))?;
        scans.push(report.summary());
    }
    let total_failures = scans.iter().map(|s| s.failures.len()).sum();
    let all_stable = c.refine.then(|| scans.iter().all(|s| s.stability.as_ref().is_some_and(|st| st.stable)));
    let summary = KernelScanSummary { refined: c.refine, all_stable, total_failures, scans };
    write_json(&out.join("kernel_scan_summary.json"), &summary)?;
    for s in &summary.scans {
        let change = s.stability.as_ref().map(|st| format!(", change {:.3}%", 100.0 * st.overall_change)).unwrap_or_default();
        println!("{} alpha {}: {} points, sup {:.6}, {} failures{change}", s.kind, s.alpha, s.points, s.overall.sup, s.failures.len());
    }
    Ok(total_failures == 0 && all_stable.unwrap_or(true))
}

#[derive(Serialize)]
struct DecayReport {
    beta: f64,
    component: meridian::biot_savart::TraceComponent,
    prediction: DecayPrediction,
    fit: FitResult,
    selected_slope: f64,
    slope_tolerance: f64,
    flagged_samples: usize,
    passed: bool,
}

pub fn decay(cfg: &RunConfig, out: &Path) -> Result<bool> {
    let c = &cfg.decay;
    let w = power_law_vorticity(c.beta, VorticityComponent::Theta, c.envelope)?;
    let prediction = predicted_decay(c.beta)?;
    let trace: Vec<DecaySample> = decay_trace(&w, c.component, &c.ladder(), c.z, 1.0 - c.beta, &cfg.quadrature)?;
    write_trace_csv(&trace, fs::File::create(out.join("decay_trace.csv"))?)?;
    let samples: Vec<RateSample> =
        trace.iter().map(|s| RateSample { r: s.r, value: s.value, error: s.quad_err + s.tail_bound }).collect();
    let fit = fit_decay(&samples)?;
    let selected_slope = fit.selected_slope();
    let passed = selected_slope <= prediction.exponent + c.slope_tolerance;
    let report = DecayReport {
        beta: c.beta,
        component: c.component,
        prediction,
        selected_slope,
        slope_tolerance: c.slope_tolerance,
        flagged_samples: trace.iter().filter(|s| s.flagged).count(),
        passed,
        fit,
    };
    write_json(&out.join("decay_fit.json"), &report)?;
    println!(
        "beta {}: selected {:?} slope {:.4}, predicted {}{}",
        c.beta,
        report.fit.selected,
        selected_slope,
        prediction.exponent,
        if prediction.has_log { " with log" } else { "" }
    );
    Ok(passed)
}

#[derive(Serialize)]
struct FeasibilityEntry {
    mu: f64,
    verdict: &'static str,
    construction: Option<FeasibleExponents>,
    region_nonempty: bool,
    area_fraction: f64,
    construction_inside: Option<bool>,
    consistent: bool,
}

#[derive(Serialize)]
struct FeasibilityReport {
    n_delta: usize,
    n_q: usize,
    entries: Vec<FeasibilityEntry>,
    random_checks: usize,
    random_failures: Vec<f64>,
    consistent: bool,
}

fn feasibility_entry(mu: f64, d: &[f64], q: &[f64], out: &Path) -> Result<FeasibilityEntry> {
    let region = feasibility_bruteforce(mu, d, q)?;
    region.write_csv(fs::File::create(out.join(format!("feasibility_region_mu_{}.csv", tag(mu))))?)?;
    let construction = paper_construction(mu).ok();
    let inside = construction.map(|c| region.covers(c.delta, c.q));
    let threshold = 2.0 / 3.0;
    // above the threshold the construction must exist and sit in the region;
    // at or below it the region must be empty
    let consistent = if mu > threshold { inside == Some(true) } else { region.is_empty() && construction.is_none() };
    Ok(FeasibilityEntry {
        mu,
        verdict: if construction.is_some() { "feasible" } else { "infeasible" },
        construction,
        region_nonempty: !region.is_empty(),
        area_fraction: region.area_fraction(),
        construction_inside: inside,
        consistent,
    })
}

pub fn feasibility(cfg: &RunConfig, out: &Path) -> Result<bool> {
    let c = &cfg.feasibility;
    let d = open_grid(0.0, 1.0, c.n_delta);
    let q = open_grid(2.0, 3.0, c.n_q);
    let entries = c.mus.iter().map(|&mu| feasibility_entry(mu, &d, &q, out)).collect::<Result<Vec<_>>>()?;
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let mut random_failures = vec![];
    for _ in 0..c.random_checks {
        let mu: f64 = 10.0 - rng.gen_range(0.0..10.0 - 2.0 / 3.0);
        if paper_construction(mu).is_err() {
            random_failures.push(mu);
        }
    }
    if let Some(s) = &c.sweep {
        let mut w = csv_writer(&out.join("feasibility_boundary.csv"))?;
        w.write_record(["mu", "delta", "q_min", "q_max"])?;
        for i in 0..s.n {
            let mu = s.mu_min + (s.mu_max - s.mu_min) * i as f64 / (s.n - 1) as f64;
            let region = feasibility_bruteforce(mu, &d, &q)?;
            for (di, &delta) in d.iter().enumerate() {
                let row = &region.points[di * q.len()..(di + 1) * q.len()];
                let feasible: Vec<f64> = row.iter().filter(|p| p.feasible()).map(|p| p.q).collect();
                if let (Some(lo), Some(hi)) = (feasible.first(), feasible.last()) {
                    w.write_record([mu.to_string(), delta.to_string(), lo.to_string(), hi.to_string()])?;
                }
            }
        }
        w.flush()?;
    }
    let consistent = entries.iter().all(|e| e.consistent) && random_failures.is_empty();
    for e in &entries {
        println!("mu {}: {}, region nonempty {}, area fraction {:.4}", e.mu, e.verdict, e.region_nonempty, e.area_fraction);
    }
    let report = FeasibilityReport { n_delta: c.n_delta, n_q: c.n_q, entries, random_checks: c.random_checks, random_failures, consistent };
    write_json(&out.join("feasibility.json"), &report)?;
    Ok(consistent)
}

fn csv_writer(path: &Path) -> Result<csv::Writer<fs::File>> {
    csv::Writer::from_path(path).with_context(|| format!("creating {}", path.display()))
}

#[derive(Serialize)]
struct RoundtripReport {
    case: RoundtripCase,
    probes: usize,
    /// Relative L² error per component `(u_r, u_θ, u_z)`; absolute when the
    /// exact component vanishes at every probe.
    errors: [f64; 3],
    max_abs_error: f64,
    threshold: f64,
    passed: bool,
}

pub fn roundtrip(cfg: &RunConfig, out: &Path) -> Result<bool> {
    let c = &cfg.roundtrip;
    let field = match c.case {
        RoundtripCase::NoSwirl => stream_function_field(c.profile.clone().shared())?,
        RoundtripCase::PureSwirl => AxisymField::from_profiles(Profile::Zero, c.profile.clone(), Profile::Zero),
        RoundtripCase::Zero => AxisymField::from_profiles(Profile::Zero, Profile::Zero, Profile::Zero),
    };
    let w = curl_field(&field, c.h)?;
    let lin = |range: [f64; 2], n: usize, i: usize| {
        if n == 1 {
            range[0]
        } else {
            range[0] + (range[1] - range[0]) * i as f64 / (n - 1) as f64
        }
    };
    let mut probes = vec![];
    for i in 0..c.n_r {
        for j in 0..c.n_z {
            probes.push(MeridianPoint::new(lin(c.r_range, c.n_r, i), lin(c.z_range, c.n_z, j))?);
        }
    }
    let mut w_csv = csv_writer(&out.join("roundtrip.csv"))?;
    w_csv.write_record(["r", "z", "u_r", "u_r_exact", "u_theta", "u_theta_exact", "u_z", "u_z_exact", "quad_err"])?;
    let (mut num, mut den, mut max_abs) = ([0.0f64; 3], [0.0f64; 3], 0.0f64);
    for p in probes.iter().copied() {
        let rec = reconstruct(&w, p, &cfg.quadrature)?;
        let got = [rec.u_r.value, rec.u_theta.value, rec.u_z.value];
        let exact = field.velocity(p);
        for k in 0..3 {
            num[k] += (got[k] - exact[k]).powi(2);
            den[k] += exact[k].powi(2);
            max_abs = max_abs.max((got[k] - exact[k]).abs());
        }
        let err = rec.u_r.quad_err + rec.u_theta.quad_err + rec.u_z.quad_err;
        w_csv.write_record([p.r, p.z, got[0], exact[0], got[1], exact[1], got[2], exact[2], err].map(|x| x.to_string()))?;
    }
    w_csv.flush()?;
    let errors: [f64; 3] = std::array::from_fn(|k| if den[k] > 0.0 { (num[k] / den[k]).sqrt() } else { num[k].sqrt() });
    let passed = errors.iter().all(|e| *e < c.threshold);
    println!("relative L2 errors (u_r, u_theta, u_z): {:.3e} {:.3e} {:.3e}", errors[0], errors[1], errors[2]);
    let report = RoundtripReport { case: c.case, probes: probes.len(), errors, max_abs_error: max_abs, threshold: c.threshold, passed };
    write_json(&out.join("roundtrip.json"), &report)?;
    Ok(passed)
}

#[derive(Serialize)]
struct BmoVariantSummary {
    variant: &'static str,
    min: f64,
    max: f64,
    ratio: f64,
    flat: bool,
}

#[derive(Serialize)]
struct BmoReport {
    scales: Vec<f64>,
    max_mean_error: f64,
    variants: Vec<BmoVariantSummary>,
    passed: bool,
}

pub fn bmo(cfg: &RunConfig, out: &Path) -> Result<bool> {
    let c = &cfg.bmo;
    let scales: Vec<f64> = (c.min_exp..=c.max_exp).map(|k| 2f64.powi(k)).collect();
    let mut table: Vec<Vec<f64>> = vec![];
    for &r in &scales {
        let mut row = vec![r, disk_mean_ln(r)?, r.ln() - 0.5];
        for &v in &c.variants {
            row.push(bmo_oscillation_ln(r, v)?.value);
        }
        table.push(row);
    }
    let mut w = csv_writer(&out.join("bmo.csv"))?;
    let mut header = vec!["R".to_string(), "mean".to_string(), "mean_closed_form".to_string()];
    header.extend(c.variants.iter().map(|v: &BmoVariant| v.name().to_string()));
    w.write_record(header)?;
    for row in &table {
        w.write_record(row.iter().map(|x| x.to_string()))?;
    }
    w.flush()?;
    let variants: Vec<BmoVariantSummary> = c
        .variants
        .iter()
        .enumerate()
        .map(|(i, v)| {
            let col = table.iter().map(|row| row[3 + i]);
            let min = col.clone().fold(f64::INFINITY, f64::min);
            let max = col.fold(f64::NEG_INFINITY, f64::max);
            let ratio = max / min;
            BmoVariantSummary { variant: v.name(), min, max, ratio, flat: ratio < c.ratio_limit }
        })
        .collect();
    let max_mean_error = table.iter().map(|row| (row[1] - row[2]).abs()).fold(0.0, f64::max);
    let passed = variants.iter().all(|v| v.flat);
    for v in &variants {
        println!("{}: max/min {:.12}", v.variant, v.ratio);
    }
    write_json(&out.join("bmo.json"), &BmoReport { scales, max_mean_error, variants, passed })?;
    Ok(passed)
}
