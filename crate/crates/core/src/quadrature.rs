//! Globally adaptive 15-point Gauss-Kronrod quadrature.
//!
//! The interval with the largest error estimate is bisected until the
//! summed estimate falls below `max(abs_tol, rel_tol * |I|)`. Error
//! estimates use the QUADPACK rescaling of `|K15 - G7|`.

use std::cmp::Ordering;
use std::collections::BinaryHeap;

use crate::error::{Error, Result};

const XGK: [f64; 8] = [
    0.991_455_371_120_812_6,
    0.949_107_912_342_758_5,
    0.864_864_423_359_769_1,
    0.741_531_185_599_394_4,
    0.586_087_235_467_691_1,
    0.405_845_151_377_397_2,
    0.207_784_955_007_898_5,
    0.0,
];

const WGK: [f64; 8] = [
    0.022_935_322_010_529_22,
    0.063_092_092_629_978_55,
    0.104_790_010_322_250_18,
    0.140_653_259_715_525_92,
    0.169_004_726_639_267_9,
    0.190_350_578_064_785_4,
    0.204_432_940_075_298_9,
    0.209_482_141_084_727_83,
];

// Gauss weights for XGK[1], XGK[3], XGK[5], XGK[7].
const WG: [f64; 4] = [
    0.129_484_966_168_869_7,
    0.279_705_391_489_276_7,
    0.381_830_050_505_118_9,
    0.417_959_183_673_469_4,
];

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadratureOptions {
    pub abs_tol: f64,
    pub rel_tol: f64,
    pub max_subintervals: usize,
}

impl Default for QuadratureOptions {
    fn default() -> Self {
        QuadratureOptions { abs_tol: 1e-10, rel_tol: 1e-12, max_subintervals: 2000 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadratureEstimate {
    pub value: f64,
    pub error: f64,
    pub subintervals: usize,
}

#[derive(Debug, Clone, Copy)]
struct Segment {
    lower: f64,
    upper: f64,
    value: f64,
    error: f64,
}

impl PartialEq for Segment {
    fn eq(&self, other: &Self) -> bool {
        self.error == other.error
    }
}

impl Eq for Segment {}

impl PartialOrd for Segment {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Segment {
    fn cmp(&self, other: &Self) -> Ordering {
        self.error.total_cmp(&other.error)
    }
}

fn rescale_error(err: f64, res_abs: f64, res_asc: f64) -> f64 {
    let mut scaled = err.abs();
    if res_asc != 0.0 && scaled != 0.0 {
        let scale = (200.0 * scaled / res_asc).powf(1.5);
        scaled = if scale < 1.0 { res_asc * scale } else { res_asc };
    }
    if res_abs > f64::MIN_POSITIVE / (50.0 * f64::EPSILON) {
        scaled = scaled.max(50.0 * f64::EPSILON * res_abs);
    }
    scaled
}

fn kronrod15<F: Fn(f64) -> f64>(f: &F, lower: f64, upper: f64) -> Result<Segment> {
    let center = 0.5 * (lower + upper);
    let half = 0.5 * (upper - lower);
    let f_center = f(center);
    if !f_center.is_finite() {
        return Err(Error::NonFinite("integrand"));
    }

    let mut res_k = f_center * WGK[7];
    let mut res_g = f_center * WG[3];
    let mut res_abs = res_k.abs();
    let mut values = [(0.0, 0.0); 7];
    for (j, v) in values.iter_mut().enumerate() {
        let dx = half * XGK[j];
        let (f1, f2) = (f(center - dx), f(center + dx));
        if !f1.is_finite() || !f2.is_finite() {
            return Err(Error::NonFinite("integrand"));
        }
        *v = (f1, f2);
        res_k += WGK[j] * (f1 + f2);
        res_abs += WGK[j] * (f1.abs() + f2.abs());
        if j % 2 == 1 {
            res_g += WG[j / 2] * (f1 + f2);
        }
    }

    let mean = 0.5 * res_k;
    let mut res_asc = WGK[7] * (f_center - mean).abs();
    for (j, (f1, f2)) in values.iter().enumerate() {
        res_asc += WGK[j] * ((f1 - mean).abs() + (f2 - mean).abs());
    }

    let abs_half = half.abs();
    Ok(Segment {
        lower,
        upper,
        value: res_k * half,
        error: rescale_error((res_k - res_g) * half, res_abs * abs_half, res_asc * abs_half),
    })
}

/// Integrates `f` over `[a, b]`; `b < a` yields the negated integral over `[b, a]`.
pub fn integrate<F>(f: F, a: f64, b: f64, opts: QuadratureOptions) -> Result<QuadratureEstimate>
where
    F: Fn(f64) -> f64,
{
    if !a.is_finite() || !b.is_finite() {
        return Err(Error::NonFinite("integration bound"));
    }
    if a == b {
        return Ok(QuadratureEstimate { value: 0.0, error: 0.0, subintervals: 0 });
    }
    if b < a {
        let est = integrate(f, b, a, opts)?;
        return Ok(QuadratureEstimate { value: -est.value, ..est });
    }

    let first = kronrod15(&f, a, b)?;
    let mut total = first.value;
    let mut total_err = first.error;
    let mut heap = BinaryHeap::new();
    heap.push(first);

    while total_err > opts.abs_tol.max(opts.rel_tol * total.abs()) {
        if heap.len() >= opts.max_subintervals {
            return Err(Error::Quadrature { lower: a, upper: b, tolerance: opts.abs_tol, estimate: total_err });
        }
        let worst = heap.pop().expect("heap holds at least one segment");
        let mid = 0.5 * (worst.lower + worst.upper);
        if mid <= worst.lower || mid >= worst.upper {
            // the interval can no longer be split in floating point
            return Err(Error::Quadrature { lower: a, upper: b, tolerance: opts.abs_tol, estimate: total_err });
        }
        let left = kronrod15(&f, worst.lower, mid)?;
        let right = kronrod15(&f, mid, worst.upper)?;
        total += left.value + right.value - worst.value;
        total_err += left.error + right.error - worst.error;
        heap.push(left);
        heap.push(right);
    }

    // re-sum from scratch; the running totals accumulate cancellation error
    let mut segments = heap.into_vec();
    segments.sort_by(|x, y| x.lower.total_cmp(&y.lower));
    let value = segments.iter().map(|s| s.value).sum();
    let error = segments.iter().map(|s| s.error).sum();
    Ok(QuadratureEstimate { value, error, subintervals: segments.len() })
}
