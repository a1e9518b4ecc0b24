//! Discrepancy function evaluation and its norms: exact L2 (pair-sum closed form),
//! exact star discrepancy, Lp by quadrature, sequence discrepancy and the Haar
//! quasi-norm of the Besov space with dominating mixed smoothness.

use std::f64::consts::PI;

use num::rational::Ratio;
use num::{BigInt, BigRational, ToPrimitive, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::ser::Serializer;
use serde::Serialize;

use crate::badic::level_order;
use crate::error::{Error, Result};
use crate::haar::{level_coefficients, level_vectors, unit_root};
use crate::pointset::PointSet;

/// Grid size above which the exact star discrepancy scan is refused.
pub const STAR_GRID_BUDGET: f64 = 1e7;

/// Exact D_P(x) for a rational point x = num/den (coordinates in [0,1]).
pub fn disc_eval(p: &PointSet, num: &[u64], den: &[u64]) -> Result<BigRational> {
    if num.len() != p.dim() || den.len() != p.dim() {
        return Err(Error::InvalidParameter("point has the wrong dimension".into()));
    }
    let mut count = BigRational::zero();
    for i in 0..p.len() {
        let z = p.point(i);
        let inside = (0..p.dim()).all(|c| (z[c] as u128) * (den[c] as u128) < (num[c] as u128) * (p.denoms()[c] as u128));
        if inside {
            let w = p.weight(i);
            count += BigRational::new(BigInt::from(*w.numer()), BigInt::from(*w.denom()));
        }
    }
    let vol = num
        .iter()
        .zip(den)
        .fold(BigRational::from_integer(BigInt::from(1)), |acc, (&a, &b)| {
            acc * BigRational::new(BigInt::from(a), BigInt::from(b))
        });
    Ok(count - vol)
}

/// D_P(x) at a real point.
pub fn disc_eval_f64(p: &PointSet, x: &[f64]) -> f64 {
    let d = p.dim();
    let mut count = 0.0;
    for i in 0..p.len() {
        let z = p.point(i);
        if (0..d).all(|c| (z[c] as f64) < x[c] * p.denoms()[c] as f64) {
            count += p.weight_f64(i);
        }
    }
    count - x.iter().product::<f64>()
}

fn ratio_to_f64(r: &BigRational) -> f64 {
    r.to_f64().unwrap_or(f64::NAN)
}

/// Exact ‖D_P‖₂² from the pair-sum formula
/// Σ a_z a_z' Π(1 − max(z_i, z'_i)) − 2^{1−d} Σ a_z Π(1 − z_i²) + 3^{−d}.
pub fn l2_disc_squared(p: &PointSet) -> Result<BigRational> {
    let (w, wden) = p
        .integer_weights()
        .ok_or_else(|| Error::Budget("weight denominators too large for exact arithmetic".into()))?;
    let d = p.dim();
    let dens: Vec<i128> = p.denoms().iter().map(|&x| x as i128).collect();
    let n = p.len();
    let cross = pair_sum_i128(p, &w, &dens).unwrap_or_else(|| pair_sum_big(p, &w, &dens));
    let den_prod = dens.iter().fold(BigInt::from(1), |acc, &x| acc * BigInt::from(x));
    let mut lin = BigInt::zero();
    for (i, &wi) in w.iter().enumerate().take(n) {
        let z = p.point(i);
        let term = (0..d).fold(BigInt::from(wi), |acc, c| {
            let dc = dens[c];
            let zc = z[c] as i128;
            acc * BigInt::from(dc * dc - zc * zc)
        });
        lin += term;
    }
    let wden_b = BigInt::from(wden);
    let first = BigRational::new(cross, &wden_b * &wden_b * &den_prod);
    let second = BigRational::new(lin * BigInt::from(2), &wden_b * &den_prod * &den_prod * BigInt::from(2).pow(d as u32));
    let third = BigRational::new(BigInt::from(1), BigInt::from(3).pow(d as u32));
    Ok(first - second + third)
}

fn pair_sum_i128(p: &PointSet, w: &[i128], dens: &[i128]) -> Option<BigInt> {
    let d = p.dim();
    let n = p.len();
    let partials: Option<Vec<i128>> = (0..n)
        .into_par_iter()
        .map(|i| {
            let zi = p.point(i);
            let mut acc: i128 = 0;
            for k in 0..n {
                let zk = p.point(k);
                let mut t = w[i].checked_mul(w[k])?;
                for c in 0..d {
                    t = t.checked_mul(dens[c] - zi[c].max(zk[c]) as i128)?;
                }
                acc = acc.checked_add(t)?;
            }
            Some(acc)
        })
        .collect();
    partials.map(|v| v.into_iter().fold(BigInt::zero(), |acc, x| acc + BigInt::from(x)))
}

fn pair_sum_big(p: &PointSet, w: &[i128], dens: &[i128]) -> BigInt {
    let d = p.dim();
    let n = p.len();
    (0..n)
        .into_par_iter()
        .map(|i| {
            let zi = p.point(i);
            let mut acc = BigInt::zero();
            for k in 0..n {
                let zk = p.point(k);
                let mut t = BigInt::from(w[i]) * BigInt::from(w[k]);
                for c in 0..d {
                    t *= BigInt::from(dens[c] - zi[c].max(zk[c]) as i128);
                }
                acc += t;
            }
            acc
        })
        .reduce(BigInt::zero, |a, b| a + b)
}

/// ‖D_P‖₂.
pub fn l2_disc(p: &PointSet) -> Result<f64> {
    Ok(ratio_to_f64(&l2_disc_squared(p)?).max(0.0).sqrt())
}

/// Exact value (numerator, denominator) converted to f64, or a float evaluation on overflow.
fn exact_or_float(num: Option<i128>, den: Option<i128>, fallback: impl FnOnce() -> f64) -> f64 {
    match (num, den) {
        (Some(a), Some(b)) if b != 0 => {
            // both fit in f64 mantissa in the common case; otherwise go through BigRational
            if a.unsigned_abs() < 1u128 << 53 && b.unsigned_abs() < 1u128 << 53 {
                a as f64 / b as f64
            } else {
                ratio_to_f64(&BigRational::new(BigInt::from(a), BigInt::from(b)))
            }
        }
        _ => fallback(),
    }
}

/// Star discrepancy sup_{x ∈ [0,1]^d} |D_P(x)|, by an exact scan of the critical grid.
pub fn star_disc(p: &PointSet) -> Result<f64> {
    let d = p.dim();
    let n = p.len();
    let grid = (n as f64 + 1.0).powi(d as i32);
    if grid > STAR_GRID_BUDGET {
        return Err(Error::Budget(format!("critical grid of {grid:.0} points exceeds {STAR_GRID_BUDGET:.0}")));
    }
    let (w, wden) = p
        .integer_weights()
        .ok_or_else(|| Error::Budget("weight denominators too large".into()))?;
    let axes: Vec<Vec<u64>> = (0..d)
        .map(|c| {
            let mut v: Vec<u64> = p.points().map(|z| z[c]).collect();
            v.push(p.denoms()[c]);
            v.sort_unstable();
            v.dedup();
            v
        })
        .collect();
    let dens: Vec<u64> = p.denoms().to_vec();
    // value of |D| candidates at grid point g with open weight sum `open` and closed sum `closed`
    let eval = |g: &[u64], open: i128, closed: i128| -> f64 {
        // vol = Π g_c / Π den_c ; count = sum / wden
        let mut vnum: Option<i128> = Some(1);
        let mut vden: Option<i128> = Some(1);
        for c in 0..d {
            vnum = vnum.and_then(|v| v.checked_mul(g[c] as i128));
            vden = vden.and_then(|v| v.checked_mul(dens[c] as i128));
        }
        let a = vnum.and_then(|v| v.checked_mul(wden));
        let under = a.zip(vden).and_then(|(a, vd)| a.checked_sub(open.checked_mul(vd)?));
        let over = a.zip(vden).and_then(|(a, vd)| closed.checked_mul(vd)?.checked_sub(a));
        let den = vden.and_then(|v| v.checked_mul(wden));
        let volf: f64 = (0..d).map(|c| g[c] as f64 / dens[c] as f64).product();
        let x = exact_or_float(under, den, || volf - open as f64 / wden as f64);
        let y = exact_or_float(over, den, || closed as f64 / wden as f64 - volf);
        x.max(y)
    };
    if d == 1 {
        let mut order: Vec<usize> = (0..n).collect();
        order.sort_by_key(|&i| p.point(i)[0]);
        let mut best: f64 = 0.0;
        let mut below = 0i128; // weight of points strictly below the current grid value
        let mut idx = 0;
        for &g in &axes[0] {
            let mut at = 0i128;
            while idx < n && p.point(order[idx])[0] < g {
                below += w[order[idx]];
                idx += 1;
            }
            let mut k = idx;
            while k < n && p.point(order[k])[0] == g {
                at += w[order[k]];
                k += 1;
            }
            best = best.max(eval(&[g], below, below + at));
        }
        return Ok(best);
    }
    if d == 2 {
        let ys = &axes[1];
        let rank = |v: u64| ys.binary_search(&v).expect("coordinate on axis");
        let mut order: Vec<usize> = (0..n).collect();
        order.sort_by_key(|&i| p.point(i)[0]);
        let mut open_hist = vec![0i128; ys.len()];
        let mut idx = 0;
        let mut best: f64 = 0.0;
        for &g1 in &axes[0] {
            while idx < n && p.point(order[idx])[0] < g1 {
                open_hist[rank(p.point(order[idx])[1])] += w[order[idx]];
                idx += 1;
            }
            let mut closed_hist = open_hist.clone();
            let mut k = idx;
            while k < n && p.point(order[k])[0] == g1 {
                closed_hist[rank(p.point(order[k])[1])] += w[order[k]];
                k += 1;
            }
            let (mut open_below, mut closed_upto) = (0i128, 0i128);
            for (r, &g2) in ys.iter().enumerate() {
                // open count: z1 < g1 and z2 < g2; closed count: z1 ≤ g1 and z2 ≤ g2
                closed_upto += closed_hist[r];
                best = best.max(eval(&[g1, g2], open_below, closed_upto));
                open_below += open_hist[r];
            }
        }
        return Ok(best);
    }
    // general d: enumerate the grid, counting by direct comparison
    let sizes: Vec<usize> = axes.iter().map(|a| a.len()).collect();
    let total: usize = sizes.iter().product();
    let best = (0..total)
        .into_par_iter()
        .map(|mut flat| {
            let mut g = vec![0u64; d];
            for c in (0..d).rev() {
                g[c] = axes[c][flat % sizes[c]];
                flat /= sizes[c];
            }
            let (mut open, mut closed) = (0i128, 0i128);
            for (i, &wi) in w.iter().enumerate().take(n) {
                let z = p.point(i);
                if (0..d).all(|c| z[c] < g[c]) {
                    open += wi;
                }
                if (0..d).all(|c| z[c] <= g[c]) {
                    closed += wi;
                }
            }
            eval(&g, open, closed)
        })
        .reduce(|| 0.0, f64::max);
    Ok(best)
}

/// Quadrature choice for [`lp_disc`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum LpMethod {
    /// Cellwise integration. For d ≤ 2 the point-coordinate grid is used with the inner
    /// integral in closed form and `resolution` Gauss nodes per smooth piece; for d ≥ 3 a
    /// midpoint rule with `resolution` nodes per axis.
    Grid { resolution: usize },
    MonteCarlo { samples: usize, seed: u64 },
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LpEstimate {
    pub value: f64,
    /// Estimated absolute error of `value`.
    pub error: f64,
}

/// Nodes and weights of the n-point Gauss–Legendre rule on [0, 1].
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    let mut nodes = vec![0.0; n];
    let mut weights = vec![0.0; n];
    for i in 0..n {
        let mut x = (PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (mut p0, mut p1) = (1.0, x);
            for k in 2..=n {
                let p2 = ((2 * k - 1) as f64 * x * p1 - (k - 1) as f64 * p0) / k as f64;
                p0 = p1;
                p1 = p2;
            }
            if n == 1 {
                p0 = 1.0;
                p1 = x;
            }
            dp = n as f64 * (x * p1 - p0) / (x * x - 1.0);
            let dx = p1 / dp;
            x -= dx;
            if dx.abs() < 1e-16 {
                break;
            }
        }
        nodes[i] = (1.0 - x) / 2.0;
        weights[i] = 1.0 / ((1.0 - x * x) * dp * dp);
    }
    (nodes, weights)
}

/// Antiderivative of |u|^p.
fn abs_pow_primitive(u: f64, p: f64) -> f64 {
    u.signum() * u.abs().powf(p + 1.0) / (p + 1.0)
}

/// ∫_{y0}^{y1} |a − x y|^p dy.
fn inner_integral(a: f64, x: f64, y0: f64, y1: f64, p: f64) -> f64 {
    let h = y1 - y0;
    if x * h < 1e-9 * (a.abs() + x).max(1e-300) || x < 1e-12 {
        return (a - x * (y0 + y1) / 2.0).abs().powf(p) * h;
    }
    (abs_pow_primitive(a - x * y0, p) - abs_pow_primitive(a - x * y1, p)) / x
}

fn lp_exact_1d(p: &PointSet, pw: f64) -> f64 {
    let den = p.denoms()[0] as f64;
    let mut pts: Vec<(u64, f64)> = (0..p.len()).map(|i| (p.point(i)[0], p.weight_f64(i))).collect();
    pts.sort_by_key(|x| x.0);
    let mut breaks: Vec<u64> = pts.iter().map(|x| x.0).collect();
    breaks.push(0);
    breaks.push(p.denoms()[0]);
    breaks.sort_unstable();
    breaks.dedup();
    let mut total = 0.0;
    let mut a = 0.0;
    let mut idx = 0;
    for win in breaks.windows(2) {
        while idx < pts.len() && pts[idx].0 <= win[0] {
            a += pts[idx].1;
            idx += 1;
        }
        let (x0, x1) = (win[0] as f64 / den, win[1] as f64 / den);
        total += abs_pow_primitive(a - x0, pw) - abs_pow_primitive(a - x1, pw);
    }
    total
}

fn lp_exact_2d(p: &PointSet, pw: f64, nodes: usize) -> (f64, f64) {
    let (dx, dy) = (p.denoms()[0], p.denoms()[1]);
    let mut xs: Vec<u64> = p.points().map(|z| z[0]).chain([0, dx]).collect();
    let mut ys: Vec<u64> = p.points().map(|z| z[1]).chain([0, dy]).collect();
    xs.sort_unstable();
    xs.dedup();
    ys.sort_unstable();
    ys.dedup();
    // weight[a][c]: total weight of points with z1 ≤ xs[a], z2 ≤ ys[c]
    let (nx, ny) = (xs.len(), ys.len());
    let mut grid = vec![0.0f64; nx * ny];
    for i in 0..p.len() {
        let z = p.point(i);
        let a = xs.binary_search(&z[0]).unwrap();
        let c = ys.binary_search(&z[1]).unwrap();
        grid[a * ny + c] += p.weight_f64(i);
    }
    for a in 0..nx {
        for c in 0..ny {
            let mut v = grid[a * ny + c];
            if a > 0 {
                v += grid[(a - 1) * ny + c];
            }
            if c > 0 {
                v += grid[a * ny + c - 1];
            }
            if a > 0 && c > 0 {
                v -= grid[(a - 1) * ny + c - 1];
            }
            grid[a * ny + c] = v;
        }
    }
    let fine = gauss_legendre(nodes);
    let coarse = gauss_legendre((nodes / 2).max(1));
    let xf: Vec<f64> = xs.iter().map(|&x| x as f64 / dx as f64).collect();
    let yf: Vec<f64> = ys.iter().map(|&y| y as f64 / dy as f64).collect();
    let results: Vec<(f64, f64)> = (0..nx - 1)
        .into_par_iter()
        .map(|a| {
            let (x0, x1) = (xf[a], xf[a + 1]);
            let mut acc_f = 0.0;
            let mut acc_c = 0.0;
            for c in 0..ny - 1 {
                let wsum = grid[a * ny + c];
                let (y0, y1) = (yf[c], yf[c + 1]);
                // kinks where the root wsum/x crosses y0 or y1
                let mut cuts = vec![x0, x1];
                for yy in [y0, y1] {
                    if yy > 0.0 {
                        let k = wsum / yy;
                        if k > x0 && k < x1 {
                            cuts.push(k);
                        }
                    }
                }
                cuts.sort_by(|u, v| u.partial_cmp(v).unwrap());
                for piece in cuts.windows(2) {
                    let (lo, hi) = (piece[0], piece[1]);
                    let len = hi - lo;
                    if len <= 0.0 {
                        continue;
                    }
                    let rule = |(xs, ws): &(Vec<f64>, Vec<f64>)| -> f64 {
                        xs.iter().zip(ws).map(|(&t, &wt)| wt * inner_integral(wsum, lo + t * len, y0, y1, pw)).sum::<f64>() * len
                    };
                    acc_f += rule(&fine);
                    acc_c += rule(&coarse);
                }
            }
            (acc_f, acc_c)
        })
        .collect();
    let f: f64 = results.iter().map(|r| r.0).sum();
    let c: f64 = results.iter().map(|r| r.1).sum();
    (f, (f - c).abs())
}

fn lp_midpoint(p: &PointSet, pw: f64, res: usize) -> f64 {
    let d = p.dim();
    let total = res.pow(d as u32);
    let pts: Vec<Vec<f64>> = (0..p.len()).map(|i| p.point_f64(i)).collect();
    let wts: Vec<f64> = (0..p.len()).map(|i| p.weight_f64(i)).collect();
    let sum: f64 = (0..total)
        .into_par_iter()
        .map(|mut flat| {
            let mut x = vec![0.0; d];
            for c in (0..d).rev() {
                x[c] = ((flat % res) as f64 + 0.5) / res as f64;
                flat /= res;
            }
            let count: f64 = pts.iter().zip(&wts).filter(|(z, _)| (0..d).all(|c| z[c] < x[c])).map(|(_, w)| w).sum();
            (count - x.iter().product::<f64>()).abs().powf(pw)
        })
        .sum();
    sum / total as f64
}

/// ‖D_P‖_p for 1 ≤ p < ∞.
pub fn lp_disc(p: &PointSet, pw: f64, method: LpMethod) -> Result<LpEstimate> {
    if !(pw >= 1.0 && pw.is_finite()) {
        return Err(Error::InvalidParameter(format!("p = {pw} outside [1, ∞)")));
    }
    let d = p.dim();
    let root = |s: f64| s.max(0.0).powf(1.0 / pw);
    match method {
        LpMethod::Grid { resolution } => {
            let resolution = resolution.max(2);
            if d == 1 {
                return Ok(LpEstimate { value: root(lp_exact_1d(p, pw)), error: 0.0 });
            }
            if d == 2 {
                let (s, e) = lp_exact_2d(p, pw, resolution);
                let v = root(s);
                // propagate the integral error through the p-th root
                let err = if s > 0.0 { v * e / (pw * s) } else { root(e) };
                return Ok(LpEstimate { value: v, error: err });
            }
            let fine = lp_midpoint(p, pw, resolution);
            let coarse = lp_midpoint(p, pw, (resolution / 2).max(1));
            Ok(LpEstimate { value: root(fine), error: (root(fine) - root(coarse)).abs() })
        }
        LpMethod::MonteCarlo { samples, seed } => {
            if samples < 2 {
                return Err(Error::InvalidParameter("need at least 2 samples".into()));
            }
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let xs: Vec<Vec<f64>> = (0..samples).map(|_| (0..d).map(|_| rng.gen::<f64>()).collect()).collect();
            let vals: Vec<f64> = xs.par_iter().map(|x| disc_eval_f64(p, x).abs().powf(pw)).collect();
            let mean = vals.iter().sum::<f64>() / samples as f64;
            let var = vals.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (samples - 1) as f64;
            let se = (var / samples as f64).sqrt();
            let v = root(mean);
            let err = if mean > 0.0 { v * se / (pw * mean) } else { root(se) };
            Ok(LpEstimate { value: v, error: err })
        }
    }
}

/// sup_x |Δ_{u,n}(x)| for the first n terms of a sequence of numerators over `den`.
pub fn seq_disc_exact(u_nums: &[u64], den: u64, n: usize) -> Result<f64> {
    if n == 0 || u_nums.len() < n {
        return Err(Error::InvalidParameter(format!("need {n} terms, have {}", u_nums.len())));
    }
    let set = PointSet::rational(1, 2, vec![den], u_nums[..n].to_vec(), Default::default())?;
    star_disc(&set)
}

/// [`seq_disc_exact`] for real sequence values (quantized to 2^32).
pub fn seq_disc(u: &[f64], n: usize) -> Result<f64> {
    let nums = crate::generators::quantize(u);
    seq_disc_exact(&nums, 1u64 << crate::generators::SEQUENCE_DENOM_BITS, n)
}

/// Both sides of the set/sequence lifting inequalities for the lifted set of `u`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LiftingReport {
    /// N · sup |D_P| of the lifted set.
    pub set_scaled: f64,
    /// max_{1 ≤ k ≤ N} k · sup |Δ_{v,k}| for v = (u_N, u_1, …, u_{N−1}).
    pub seq_scaled: f64,
    /// max_{1 ≤ k < N} k · sup |Δ_{v,k}|.
    pub seq_scaled_below_n: f64,
    pub forward_holds: bool,
    pub reverse_holds: bool,
}

/// Check N sup|D_P| ≤ max_k k sup|Δ_{v,k}| + 1 and max_{k<N} k sup|Δ_{v,k}| ≤ 2N sup|D_P|.
pub fn lifting_check(u_nums: &[u64], den: u64, n_points: usize) -> Result<LiftingReport> {
    let lifted = crate::generators::lift_sequence_exact(u_nums, den, n_points)?;
    let set_scaled = n_points as f64 * star_disc(&lifted)?;
    // the lifted set lists u_N first (its first coordinate wraps to 0)
    let mut v = vec![u_nums[n_points - 1]];
    v.extend_from_slice(&u_nums[..n_points - 1]);
    let mut seq_scaled: f64 = 0.0;
    let mut below: f64 = 0.0;
    for k in 1..=n_points {
        let s = k as f64 * seq_disc_exact(&v, den, k)?;
        seq_scaled = seq_scaled.max(s);
        if k < n_points {
            below = below.max(s);
        }
    }
    let tol = 1e-12 * (1.0 + set_scaled);
    Ok(LiftingReport {
        set_scaled,
        seq_scaled,
        seq_scaled_below_n: below,
        forward_holds: set_scaled <= seq_scaled + 1.0 + tol,
        reverse_holds: below <= 2.0 * set_scaled + tol,
    })
}

/// An exponent that may be infinite; serialized as a number or the string "inf".
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Exponent(pub f64);

impl Serialize for Exponent {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        if self.0.is_infinite() {
            s.serialize_str("inf")
        } else {
            s.serialize_f64(self.0)
        }
    }
}

/// Parse "inf"/"infinity" or a number.
pub fn parse_exponent(s: &str) -> Result<f64> {
    match s.trim().to_ascii_lowercase().as_str() {
        "inf" | "infinity" => Ok(f64::INFINITY),
        t => t.parse::<f64>().map_err(|e| Error::Parse(format!("'{s}': {e}"))),
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BesovParams {
    pub p: f64,
    pub q: f64,
    pub r: f64,
    /// Stop summing tail shells once their relative contribution drops below this.
    pub tail_tol: f64,
}

impl BesovParams {
    pub fn new(p: f64, q: f64, r: f64) -> Self {
        BesovParams { p, q, r, tail_tol: 1e-12 }
    }

    /// Enforce 1 ≤ p, q ≤ ∞, q > 1 if p = ∞, and 1/p − 1 < r < min(1/p, 1).
    pub fn validate(&self) -> Result<()> {
        let BesovParams { p, q, r, tail_tol } = *self;
        if p.is_nan() || q.is_nan() || p < 1.0 || q < 1.0 {
            return Err(Error::InvalidParameter(format!("need p, q ≥ 1 (got p = {p}, q = {q})")));
        }
        if p.is_infinite() && q <= 1.0 {
            return Err(Error::InvalidParameter("q must exceed 1 when p = ∞".into()));
        }
        let inv = 1.0 / p;
        if !(r > inv - 1.0 && r < inv.min(1.0)) {
            return Err(Error::InvalidParameter(format!(
                "r = {r} outside the window ({}, {})",
                inv - 1.0,
                inv.min(1.0)
            )));
        }
        if tail_tol.is_nan() || tail_tol <= 0.0 {
            return Err(Error::InvalidParameter("tail tolerance must be positive".into()));
        }
        Ok(())
    }
}

/// Measured norm plus diagnostics, serialized as a versioned JSON object.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct NormReport {
    pub schema: u32,
    pub kind: String,
    pub value: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub error: Option<f64>,
    pub p: Option<Exponent>,
    pub q: Option<Exponent>,
    pub r: Option<f64>,
    pub b: u64,
    pub n: Option<u32>,
    pub d: usize,
    #[serde(rename = "N")]
    pub count: usize,
    pub head: Option<f64>,
    pub tail: Option<f64>,
    pub tail_bound: Option<f64>,
    pub family: String,
}

impl NormReport {
    pub fn basic(kind: &str, value: f64, p: &PointSet) -> Self {
        NormReport {
            schema: 1,
            kind: kind.to_string(),
            value,
            error: None,
            p: None,
            q: None,
            r: None,
            b: p.base(),
            n: p.resolution(),
            d: p.dim(),
            count: p.len(),
            head: None,
            tail: None,
            tail_bound: None,
            family: p.provenance().family.clone(),
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }
}

/// (Σ_{l=1}^{b−1} |e^{2πil/b} − 1|^{−p})^{1/p}, or the maximum term when p = ∞.
fn root_gap_norm(b: u64, p: f64) -> f64 {
    let terms = (1..b).map(|l| 1.0 / (unit_root(b, l as i64) - 1.0).norm());
    if p.is_infinite() {
        terms.fold(0.0, f64::max)
    } else {
        terms.map(|t| t.powf(p)).sum::<f64>().powf(1.0 / p)
    }
}

/// Coefficient counts of (1 + x + … + x^{n−1})^s.
fn bounded_compositions(n: usize, s: usize) -> Vec<f64> {
    let mut poly = vec![1.0];
    for _ in 0..s {
        let mut next = vec![0.0; poly.len() + n.saturating_sub(1)];
        for (i, &c) in poly.iter().enumerate() {
            for k in 0..n {
                next[i + k] += c;
            }
        }
        poly = next;
    }
    poly
}

fn binomial_f64(n: usize, k: usize) -> f64 {
    (0..k).fold(1.0, |acc, i| acc * (n - i) as f64 / (i + 1) as f64)
}

/// Tail of the quasi-norm over all levels with some coordinate at level ≥ `from`, where
/// every coefficient equals the negated volume coefficient.
///
/// Returns (Σ W_j^q or max W_j, bound on the unsummed remainder). The per-level value
/// is W_j = b^{|j|(r−1)} b^{−s} 2^{−(d−s)} g_p^s with s active coordinates.
pub fn volume_tail(b: u64, d: usize, params: &BesovParams, from: u32) -> (f64, f64) {
    let BesovParams { p, q, r, tail_tol } = *params;
    let g = root_gap_norm(b, p);
    let bf = b as f64;
    let n = from as usize;
    let mut total = 0.0;
    let mut bound = 0.0;
    for s in 1..=d {
        let subsets = binomial_f64(d, s);
        let k_s = bf.powi(-(s as i32)) * 2f64.powi(-((d - s) as i32)) * g.powi(s as i32);
        if q.is_infinite() {
            // W decreases in |j|; the first shell with a coordinate at level `from` is |j| = from
            total = f64::max(total, k_s * bf.powf(n as f64 * (r - 1.0)));
            continue;
        }
        let x = bf.powf((r - 1.0) * q);
        let inner = bounded_compositions(n, s);
        let kq = subsets * k_s.powf(q);
        let mut sum = 0.0;
        let mut lambda = n;
        loop {
            let all = binomial_f64(lambda + s - 1, s - 1);
            let low = inner.get(lambda).copied().unwrap_or(0.0);
            let term = (all - low) * x.powi(lambda as i32) * kq;
            sum += term;
            let ratio = (lambda + s) as f64 / (lambda + 1) as f64 * x;
            let beyond_inner = lambda >= inner.len();
            if beyond_inner && ratio < 1.0 && term <= tail_tol * sum {
                bound += term * ratio / (1.0 - ratio);
                break;
            }
            lambda += 1;
            if lambda > 1_000_000 {
                bound = f64::INFINITY;
                break;
            }
        }
        total += sum;
    }
    (total, bound)
}

/// The Haar quasi-norm (Σ_j b^{|j|(r−1/p+1)q} (Σ_{m,l} |μ_{jml}|^p)^{q/p})^{1/q} of D_P.
pub fn besov_quasinorm(p: &PointSet, params: &BesovParams) -> Result<NormReport> {
    params.validate()?;
    let n = p
        .resolution()
        .ok_or_else(|| Error::InvalidParameter("the Haar quasi-norm needs a b-adic point set".into()))?;
    let BesovParams { p: pw, q, r, .. } = *params;
    let b = p.base() as f64;
    let inv_p = if pw.is_infinite() { 0.0 } else { 1.0 / pw };
    let levels = level_vectors(p.dim(), n as i32 - 1);
    let weighted: Vec<f64> = levels
        .par_iter()
        .map(|j| {
            let mass = level_coefficients(p, j).lp_mass(pw);
            let norm = if pw.is_infinite() { mass } else { mass.powf(inv_p) };
            b.powf(level_order(j) as f64 * (r - inv_p + 1.0)) * norm
        })
        .collect();
    let (tail, tail_bound) = volume_tail(p.base(), p.dim(), params, n);
    let (head, value) = if q.is_infinite() {
        let h = weighted.iter().copied().fold(0.0, f64::max);
        (h, h.max(tail))
    } else {
        let h: f64 = weighted.iter().map(|w| w.powf(q)).sum();
        (h, (h + tail).powf(1.0 / q))
    };
    let mut rep = NormReport::basic("besov", value, p);
    rep.p = Some(Exponent(pw));
    rep.q = Some(Exponent(q));
    rep.r = Some(r);
    rep.head = Some(head);
    rep.tail = Some(tail);
    rep.tail_bound = Some(tail_bound);
    Ok(rep)
}

/// Exact tail mass for the quasi-norm when q < ∞: closed-form geometric sums per support set.
pub fn volume_tail_closed_form(b: u64, d: usize, params: &BesovParams, from: u32) -> f64 {
    let BesovParams { p, q, r, .. } = *params;
    let g = root_gap_norm(b, p);
    let bf = b as f64;
    let x = bf.powf((r - 1.0) * q);
    let n = from as i32;
    (1..=d)
        .map(|s| {
            let k_s = bf.powi(-(s as i32)) * 2f64.powi(-((d - s) as i32)) * g.powi(s as i32);
            let all = (1.0 - x).powi(-(s as i32));
            let low = ((1.0 - x.powi(n)) / (1.0 - x)).powi(s as i32);
            binomial_f64(d, s) * k_s.powf(q) * (all - low)
        })
        .sum()
}

/// Exact l2 squared as f64 (convenience for oracles).
pub fn l2_disc_squared_f64(p: &PointSet) -> Result<f64> {
    Ok(ratio_to_f64(&l2_disc_squared(p)?))
}

/// The exact star discrepancy as a rational, for unweighted one-dimensional sets.
pub fn star_disc_1d_exact(p: &PointSet) -> Option<Ratio<i128>> {
    if p.dim() != 1 || p.weights().is_some() {
        return None;
    }
    let n = p.len() as i128;
    let den = p.denoms()[0] as i128;
    let mut xs: Vec<i128> = p.points().map(|z| z[0] as i128).collect();
    xs.sort_unstable();
    let mut best = Ratio::from_integer(0);
    let mut below = 0i128;
    let mut grid: Vec<i128> = xs.clone();
    grid.push(den);
    grid.dedup();
    let mut idx = 0;
    for g in grid {
        while idx < xs.len() && xs[idx] < g {
            below += 1;
            idx += 1;
        }
        let at = xs[idx..].iter().take_while(|&&x| x == g).count() as i128;
        let vol = Ratio::new(g, den);
        let under = vol - Ratio::new(below, n);
        let over = Ratio::new(below + at, n) - vol;
        best = best.max(under).max(over);
    }
    Some(best)
}
