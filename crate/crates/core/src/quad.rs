//! Gauss–Kronrod panel rules with globally adaptive drivers in one and two
//! dimensions.
//!
//! Both drivers are vector valued: an integrand returns `[f64; N]` and every
//! component is integrated over the same panels. This lets one expensive
//! kernel evaluation feed several integrals at once. Panels are refined in
//! order of their largest normalized error until every component meets its
//! tolerance or the panel budget runs out.
//!
//! The per-panel error estimate follows the usual QUADPACK recipe: the raw
//! Kronrod/Gauss difference is rescaled with the `(200 e / resasc)^1.5`
//! heuristic and floored at `50 eps` times the integral of `|f|`.

use std::cmp::Ordering;
use std::collections::BinaryHeap;

/// Abscissae of the 15-point Kronrod rule on [-1, 1] (non-negative half,
/// descending; the last entry is the centre).
const XGK: [f64; 8] = [
    0.991_455_371_120_812_6,
    0.949_107_912_342_758_5,
    0.864_864_423_359_769_1,
    0.741_531_185_599_394_5,
    0.586_087_235_467_691_1,
    0.405_845_151_377_397_2,
    0.207_784_955_007_898_48,
    0.0,
];

const WGK: [f64; 8] = [
    0.022_935_322_010_529_224,
    0.063_092_092_629_978_56,
    0.104_790_010_322_250_19,
    0.140_653_259_715_525_92,
    0.169_004_726_639_267_9,
    0.190_350_578_064_785_42,
    0.204_432_940_075_298_89,
    0.209_482_141_084_727_82,
];

/// Weights of the embedded 7-point Gauss rule, at `XGK[1], XGK[3], XGK[5], XGK[7]`.
const WG: [f64; 4] = [
    0.129_484_966_168_869_7,
    0.279_705_391_489_276_64,
    0.381_830_050_505_118_9,
    0.417_959_183_673_469_4,
];

/// Full 15-point node set on [-1, 1] with Kronrod and (zero-padded) Gauss weights.
struct Nodes {
    x: [f64; 15],
    wk: [f64; 15],
    wg: [f64; 15],
}

const fn nodes() -> Nodes {
    let mut x = [0.0; 15];
    let mut wk = [0.0; 15];
    let mut wg = [0.0; 15];
    let mut j = 0;
    while j < 7 {
        x[j] = -XGK[j];
        x[14 - j] = XGK[j];
        wk[j] = WGK[j];
        wk[14 - j] = WGK[j];
        if j % 2 == 1 {
            wg[j] = WG[j / 2];
            wg[14 - j] = WG[j / 2];
        }
        j += 1;
    }
    x[7] = 0.0;
    wk[7] = WGK[7];
    wg[7] = WG[3];
    Nodes { x, wk, wg }
}

const NODES: Nodes = nodes();

/// Absolute/relative accuracy request. A component has converged when its
/// error estimate is below `max(abs, rel * |value|)` (or below the roundoff
/// floor, which no rule can beat).
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Tolerance {
    pub abs: f64,
    pub rel: f64,
}

impl Tolerance {
    pub const fn new(abs: f64, rel: f64) -> Self {
        Self { abs, rel }
    }

    pub const fn absolute(abs: f64) -> Self {
        Self { abs, rel: 0.0 }
    }

    pub const fn relative(rel: f64) -> Self {
        Self { abs: 0.0, rel }
    }

    #[inline]
    pub fn target(&self, value: f64) -> f64 {
        self.abs.max(self.rel * value.abs())
    }
}

/// Result of a scalar adaptive integration.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Estimate {
    pub value: f64,
    pub error: f64,
    pub panels: usize,
    pub converged: bool,
}

/// Result of a vector-valued adaptive integration.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct VecEstimate<const N: usize> {
    pub value: [f64; N],
    pub error: [f64; N],
    /// Estimate of `∫ |f|` per component.
    pub magnitude: [f64; N],
    pub panels: usize,
    pub converged: bool,
}

impl<const N: usize> VecEstimate<N> {
    pub fn component(&self, i: usize) -> Estimate {
        Estimate {
            value: self.value[i],
            error: self.error[i],
            panels: self.panels,
            converged: self.converged,
        }
    }

    fn zero() -> Self {
        Self {
            value: [0.0; N],
            error: [0.0; N],
            magnitude: [0.0; N],
            panels: 0,
            converged: true,
        }
    }
}

#[inline]
fn rescale_error(raw: f64, resabs: f64, resasc: f64) -> f64 {
    let mut err = raw;
    if resasc != 0.0 && err != 0.0 {
        err = resasc * (200.0 * err / resasc).powf(1.5).min(1.0);
    }
    if resabs > f64::MIN_POSITIVE / (50.0 * f64::EPSILON) {
        err = err.max(50.0 * f64::EPSILON * resabs);
    }
    err
}

#[derive(Clone, Copy, Debug)]
struct Panel<const N: usize> {
    lo: f64,
    hi: f64,
    value: [f64; N],
    error: [f64; N],
    resabs: [f64; N],
}

fn gk15<const N: usize, F: FnMut(f64) -> [f64; N]>(f: &mut F, lo: f64, hi: f64) -> Panel<N> {
    let centre = 0.5 * (lo + hi);
    let half = 0.5 * (hi - lo);
    let mut fv = [[0.0; N]; 15];
    for (k, slot) in fv.iter_mut().enumerate() {
        *slot = f(centre + half * NODES.x[k]);
    }
    let mut panel = Panel {
        lo,
        hi,
        value: [0.0; N],
        error: [0.0; N],
        resabs: [0.0; N],
    };
    for c in 0..N {
        let mut resk = 0.0;
        let mut resg = 0.0;
        let mut resabs = 0.0;
        for k in 0..15 {
            let v = fv[k][c];
            resk += NODES.wk[k] * v;
            resg += NODES.wg[k] * v;
            resabs += NODES.wk[k] * v.abs();
        }
        let mean = 0.5 * resk;
        let mut resasc = 0.0;
        for k in 0..15 {
            resasc += NODES.wk[k] * (fv[k][c] - mean).abs();
        }
        let h = half.abs();
        panel.value[c] = resk * half;
        panel.resabs[c] = resabs * h;
        panel.error[c] = rescale_error(((resk - resg) * half).abs(), resabs * h, resasc * h);
    }
    panel
}

/// Heap entry ordered by a scalar priority.
struct Ranked<T> {
    priority: f64,
    seq: usize,
    item: T,
}

impl<T> PartialEq for Ranked<T> {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}
impl<T> Eq for Ranked<T> {}
impl<T> PartialOrd for Ranked<T> {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl<T> Ord for Ranked<T> {
    fn cmp(&self, other: &Self) -> Ordering {
        self.priority
            .total_cmp(&other.priority)
            .then_with(|| other.seq.cmp(&self.seq))
    }
}

fn priority<const N: usize>(error: &[f64; N], weight: &[f64; N]) -> f64 {
    error
        .iter()
        .zip(weight)
        .map(|(e, w)| e * w)
        .fold(0.0, f64::max)
}

fn converged<const N: usize>(value: &[f64; N], error: &[f64; N], resabs: &[f64; N], tol: Tolerance) -> bool {
    (0..N).all(|c| error[c] <= tol.target(value[c]).max(100.0 * f64::EPSILON * resabs[c]))
}

fn sorted_breaks(breaks: &[f64]) -> Vec<f64> {
    let mut pts: Vec<f64> = breaks.iter().copied().filter(|x| x.is_finite()).collect();
    pts.sort_by(f64::total_cmp);
    pts.dedup_by(|a, b| (*a - *b).abs() <= 4.0 * f64::EPSILON * a.abs().max(b.abs()));
    pts
}

/// Integrate a vector-valued function over `[breaks[0], breaks[last]]`,
/// starting from the panels delimited by `breaks` (sorted internally).
pub fn integrate_vec<const N: usize, F>(mut f: F, breaks: &[f64], tol: Tolerance, max_panels: usize) -> VecEstimate<N>
where
    F: FnMut(f64) -> [f64; N],
{
    let pts = sorted_breaks(breaks);
    if pts.len() < 2 {
        return VecEstimate::zero();
    }
    let mut panels: Vec<Panel<N>> = pts.windows(2).map(|w| gk15(&mut f, w[0], w[1])).collect();
    let mut value = [0.0; N];
    let mut error = [0.0; N];
    let mut resabs = [0.0; N];
    for p in &panels {
        for c in 0..N {
            value[c] += p.value[c];
            error[c] += p.error[c];
            resabs[c] += p.resabs[c];
        }
    }
    let weight: [f64; N] = std::array::from_fn(|c| {
        let scale = tol.target(value[c]).max(100.0 * f64::EPSILON * resabs[c]);
        if scale > 0.0 { 1.0 / scale } else { 1.0 }
    });
    let mut heap: BinaryHeap<Ranked<Panel<N>>> = BinaryHeap::new();
    for (seq, p) in panels.drain(..).enumerate() {
        heap.push(Ranked { priority: priority(&p.error, &weight), seq, item: p });
    }
    let mut seq = heap.len();
    let budget = max_panels.max(pts.len() - 1);
    while !converged(&value, &error, &resabs, tol) && heap.len() < budget {
        let Some(worst) = heap.pop() else { break };
        let p = worst.item;
        let mid = 0.5 * (p.lo + p.hi);
        if !(mid > p.lo && mid < p.hi) {
            // Panel can no longer be split in floating point.
            heap.push(Ranked { priority: 0.0, seq: worst.seq, item: p });
            break;
        }
        let left = gk15(&mut f, p.lo, mid);
        let right = gk15(&mut f, mid, p.hi);
        for c in 0..N {
            value[c] += left.value[c] + right.value[c] - p.value[c];
            error[c] += left.error[c] + right.error[c] - p.error[c];
            resabs[c] += left.resabs[c] + right.resabs[c] - p.resabs[c];
        }
        for child in [left, right] {
            heap.push(Ranked { priority: priority(&child.error, &weight), seq, item: child });
            seq += 1;
        }
    }
    let mut done: Vec<Panel<N>> = heap.into_iter().map(|r| r.item).collect();
    done.sort_by(|a, b| a.lo.total_cmp(&b.lo));
    let mut out = VecEstimate::zero();
    out.panels = done.len();
    let mut resabs = [0.0; N];
    for p in &done {
        for c in 0..N {
            out.value[c] += p.value[c];
            out.error[c] += p.error[c];
            resabs[c] += p.resabs[c];
        }
    }
    out.converged = converged(&out.value, &out.error, &resabs, tol);
    out.magnitude = resabs;
    out
}

/// Scalar convenience wrapper around [`integrate_vec`].
pub fn integrate<F: FnMut(f64) -> f64>(mut f: F, breaks: &[f64], tol: Tolerance, max_panels: usize) -> Estimate {
    integrate_vec::<1, _>(|x| [f(x)], breaks, tol, max_panels).component(0)
}

/// Axis-aligned rectangle `[x0, x1] × [y0, y1]`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Rect {
    pub x0: f64,
    pub x1: f64,
    pub y0: f64,
    pub y1: f64,
}

impl Rect {
    pub const fn new(x0: f64, x1: f64, y0: f64, y1: f64) -> Self {
        Self { x0, x1, y0, y1 }
    }

    pub fn is_degenerate(&self) -> bool {
        !(self.x1 > self.x0 && self.y1 > self.y0)
    }

    /// Tensor grid of sub-rectangles delimited by the given breakpoints,
    /// clipped to `self`.
    pub fn partition(&self, xs: &[f64], ys: &[f64]) -> Vec<Rect> {
        let clip = |pts: &[f64], lo: f64, hi: f64| {
            let mut v: Vec<f64> = pts.iter().copied().filter(|p| *p > lo && *p < hi).collect();
            v.push(lo);
            v.push(hi);
            sorted_breaks(&v)
        };
        let xb = clip(xs, self.x0, self.x1);
        let yb = clip(ys, self.y0, self.y1);
        let mut out = Vec::with_capacity((xb.len() - 1) * (yb.len() - 1));
        for xw in xb.windows(2) {
            for yw in yb.windows(2) {
                out.push(Rect::new(xw[0], xw[1], yw[0], yw[1]));
            }
        }
        out
    }
}

#[derive(Clone, Copy, Debug)]
struct Cell<const N: usize> {
    rect: Rect,
    value: [f64; N],
    error: [f64; N],
    resabs: [f64; N],
    split_x: bool,
}

fn tensor_gk15<const N: usize, F: FnMut(f64, f64) -> [f64; N]>(f: &mut F, rect: Rect) -> Cell<N> {
    let cx = 0.5 * (rect.x0 + rect.x1);
    let hx = 0.5 * (rect.x1 - rect.x0);
    let cy = 0.5 * (rect.y0 + rect.y1);
    let hy = 0.5 * (rect.y1 - rect.y0);
    let mut fv = [[[0.0; N]; 15]; 15];
    for i in 0..15 {
        let x = cx + hx * NODES.x[i];
        for j in 0..15 {
            fv[i][j] = f(x, cy + hy * NODES.x[j]);
        }
    }
    let area = (hx * hy).abs();
    let mut cell = Cell {
        rect,
        value: [0.0; N],
        error: [0.0; N],
        resabs: [0.0; N],
        split_x: hx.abs() >= hy.abs(),
    };
    let mut ex_total = 0.0;
    let mut ey_total = 0.0;
    for c in 0..N {
        let (mut kk, mut gg, mut gk, mut kg, mut abs) = (0.0, 0.0, 0.0, 0.0, 0.0);
        for i in 0..15 {
            for j in 0..15 {
                let v = fv[i][j][c];
                kk += NODES.wk[i] * NODES.wk[j] * v;
                gg += NODES.wg[i] * NODES.wg[j] * v;
                gk += NODES.wg[i] * NODES.wk[j] * v;
                kg += NODES.wk[i] * NODES.wg[j] * v;
                abs += NODES.wk[i] * NODES.wk[j] * v.abs();
            }
        }
        let mean = 0.25 * kk;
        let mut resasc = 0.0;
        for i in 0..15 {
            for j in 0..15 {
                resasc += NODES.wk[i] * NODES.wk[j] * (fv[i][j][c] - mean).abs();
            }
        }
        cell.value[c] = kk * area;
        cell.resabs[c] = abs * area;
        cell.error[c] = rescale_error(((kk - gg) * area).abs(), abs * area, resasc * area);
        ex_total += (kk - gk).abs() * area;
        ey_total += (kk - kg).abs() * area;
    }
    if ex_total > 0.0 || ey_total > 0.0 {
        cell.split_x = ex_total >= ey_total;
    }
    cell
}

/// Integrate a vector-valued function of two variables over the union of
/// the given rectangles (assumed non-overlapping), refining adaptively.
pub fn integrate_2d<const N: usize, F>(mut f: F, rects: &[Rect], tol: Tolerance, max_cells: usize) -> VecEstimate<N>
where
    F: FnMut(f64, f64) -> [f64; N],
{
    let cells: Vec<Cell<N>> = rects
        .iter()
        .filter(|r| !r.is_degenerate())
        .map(|r| tensor_gk15(&mut f, *r))
        .collect();
    if cells.is_empty() {
        return VecEstimate::zero();
    }
    let mut value = [0.0; N];
    let mut error = [0.0; N];
    let mut resabs = [0.0; N];
    for c in &cells {
        for k in 0..N {
            value[k] += c.value[k];
            error[k] += c.error[k];
            resabs[k] += c.resabs[k];
        }
    }
    let weight: [f64; N] = std::array::from_fn(|k| {
        let scale = tol.target(value[k]).max(100.0 * f64::EPSILON * resabs[k]);
        if scale > 0.0 { 1.0 / scale } else { 1.0 }
    });
    let budget = max_cells.max(cells.len());
    let mut heap: BinaryHeap<Ranked<Cell<N>>> = BinaryHeap::new();
    for (seq, c) in cells.into_iter().enumerate() {
        heap.push(Ranked { priority: priority(&c.error, &weight), seq, item: c });
    }
    let mut seq = heap.len();
    while !converged(&value, &error, &resabs, tol) && heap.len() < budget {
        let Some(worst) = heap.pop() else { break };
        let c = worst.item;
        let r = c.rect;
        let (a, b) = if c.split_x {
            let m = 0.5 * (r.x0 + r.x1);
            (Rect::new(r.x0, m, r.y0, r.y1), Rect::new(m, r.x1, r.y0, r.y1))
        } else {
            let m = 0.5 * (r.y0 + r.y1);
            (Rect::new(r.x0, r.x1, r.y0, m), Rect::new(r.x0, r.x1, m, r.y1))
        };
        if a.is_degenerate() || b.is_degenerate() {
            heap.push(Ranked { priority: 0.0, seq: worst.seq, item: c });
            break;
        }
        let ca = tensor_gk15(&mut f, a);
        let cb = tensor_gk15(&mut f, b);
        for k in 0..N {
            value[k] += ca.value[k] + cb.value[k] - c.value[k];
            error[k] += ca.error[k] + cb.error[k] - c.error[k];
            resabs[k] += ca.resabs[k] + cb.resabs[k] - c.resabs[k];
        }
        for child in [ca, cb] {
            heap.push(Ranked { priority: priority(&child.error, &weight), seq, item: child });
            seq += 1;
        }
    }
    let mut done: Vec<Cell<N>> = heap.into_iter().map(|r| r.item).collect();
    done.sort_by(|p, q| {
        p.rect
            .x0
            .total_cmp(&q.rect.x0)
            .then(p.rect.y0.total_cmp(&q.rect.y0))
    });
    let mut out = VecEstimate::zero();
    out.panels = done.len();
    let mut resabs = [0.0; N];
    for c in &done {
        for k in 0..N {
            out.value[k] += c.value[k];
            out.error[k] += c.error[k];
            resabs[k] += c.resabs[k];
        }
    }
    out.converged = converged(&out.value, &out.error, &resabs, tol);
    out.magnitude = resabs;
    out
}

/// Geometric breakpoints `origin + sign * scale * ratio^j` for `j = 0..`,
/// stopping before `limit` (exclusive) is passed.
pub fn geometric_breaks(origin: f64, scale: f64, ratio: f64, limit: f64) -> Vec<f64> {
    let mut out = Vec::new();
    if scale <= 0.0 || ratio <= 1.0 {
        return out;
    }
    let dir = (limit - origin).signum();
    let span = (limit - origin).abs();
    let mut step = scale;
    while step < span && out.len() < 64 {
        out.push(origin + dir * step);
        step *= ratio;
    }
    out
}
