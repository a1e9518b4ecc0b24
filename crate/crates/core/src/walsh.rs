//! b-adic Walsh functions, Walsh coefficients of corner indicators (exact and via the
//! Fine–Price series), Haar–Walsh inner products, and the split of the discrepancy
//! function of a digital net into a dual-net main part and a rest.

use num::complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::badic::{nrt_weight, scaled_floor};
use crate::digitalnet::{dual_net_basis, DigitalNet, ENUMERATION_BUDGET};
use crate::error::{Error, Result};
use crate::haar::unit_root;
use crate::linalg;

/// Guard against representation drift when extracting digits of reals.
const DIGIT_GUARD: f64 = 1e-15;

fn digits_lsf(mut a: u64, b: u64) -> Vec<u64> {
    let mut out = Vec::new();
    while a > 0 {
        out.push(a % b);
        a /= b;
    }
    out
}

/// Walsh index α with its digits (least significant first).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct WalshIndex {
    pub alpha: u64,
    pub base: u64,
}

impl WalshIndex {
    pub fn new(alpha: u64, base: u64) -> Self {
        WalshIndex { alpha, base }
    }

    pub fn rho(&self) -> u32 {
        nrt_weight(self.alpha, self.base)
    }

    pub fn digits(&self) -> Vec<u64> {
        digits_lsf(self.alpha, self.base)
    }

    /// Leading digit τ_{ρ−1} (0 for α = 0).
    pub fn leading(&self) -> u64 {
        self.digits().last().copied().unwrap_or(0)
    }

    /// α with its leading digit removed.
    pub fn truncated(&self) -> u64 {
        let rho = self.rho();
        if rho == 0 {
            0
        } else {
            self.alpha - self.leading() * self.base.pow(rho - 1)
        }
    }
}

/// Exponent Σ_ν α_ν c_{ν+1} mod b, where c_1 c_2 … c_ρ are the top digits of `cell` (a level-ρ index).
fn phase_exponent(alpha_digits: &[u64], cell: u128, b: u64) -> u64 {
    let rho = alpha_digits.len();
    let mut e = 0u64;
    let mut rest = cell;
    // digit c_{ρ} is the least significant digit of cell
    for nu in (0..rho).rev() {
        let c = (rest % b as u128) as u64;
        rest /= b as u128;
        e = (e + alpha_digits[nu] * c) % b;
    }
    e
}

/// wal_α at the rational point `num/den` (one coordinate).
pub fn wal_eval_exact(alpha: u64, num: u64, den: u64, b: u64) -> Complex64 {
    if alpha == 0 {
        return Complex64::new(1.0, 0.0);
    }
    let ad = digits_lsf(alpha, b);
    let cell = scaled_floor(num, den, b, ad.len() as u32).0;
    unit_root(b, phase_exponent(&ad, cell, b) as i64)
}

/// Product of wal_{t_i} over coordinates of the rational point `num/den`.
pub fn wal_eval_point(t: &[u64], num: &[u64], den: &[u64], b: u64) -> Complex64 {
    t.iter()
        .enumerate()
        .map(|(i, &ti)| wal_eval_exact(ti, num[i], den[i], b))
        .product()
}

fn level_cell(x: f64, b: u64, rho: u32) -> u128 {
    let scale = (b as f64).powi(rho as i32);
    let v = x * scale;
    (v + DIGIT_GUARD * v.max(1.0)).floor().max(0.0) as u128
}

/// wal_α(x) for real x; only the first ρ(α) digits of x matter.
pub fn wal_eval(alpha: u64, x: f64, b: u64) -> Complex64 {
    if alpha == 0 {
        return Complex64::new(1.0, 0.0);
    }
    let ad = digits_lsf(alpha, b);
    let cell = level_cell(x, b, ad.len() as u32) % (b as u128).pow(ad.len() as u32);
    unit_root(b, phase_exponent(&ad, cell, b) as i64)
}

/// Multi-dimensional wal_t at a real point.
pub fn wal_eval_multi(t: &[u64], x: &[f64], b: u64) -> Complex64 {
    t.iter().zip(x).map(|(&ti, &xi)| wal_eval(ti, xi, b)).product()
}

/// χ̂_{[0,y)}(t) = ∫_0^y conj(wal_t(x)) dx, given the level-ρ(t) cell `cells` = floor(y b^ρ)
/// and the fractional remainder y b^ρ − cells.
fn chi_hat_parts(t: u64, cells: u128, rem: f64, b: u64) -> Complex64 {
    let td = digits_lsf(t, b);
    let rho = td.len() as u32;
    let top = (b as u128).pow(rho);
    let scale = (b as f64).powi(-(rho as i32));
    // full cells below `cells`: only the last digit varies freely, every other
    // position sums to zero because the leading digit of t is nonzero
    let last = (cells % b as u128) as u64;
    let prefix = cells - last as u128;
    let prefix_phase = unit_root(b, -(phase_exponent(&td, prefix, b) as i64));
    let tau = td[rho as usize - 1];
    let partial_digit: Complex64 = (0..last).map(|x| unit_root(b, -((tau * x) as i64))).sum();
    let mut v = prefix_phase * partial_digit * scale;
    if cells < top && rem > 0.0 {
        v += unit_root(b, -(phase_exponent(&td, cells, b) as i64)) * (rem * scale);
    }
    v
}

/// Walsh coefficient of the indicator of [0, y), by exact piecewise integration.
pub fn chi_hat(t: u64, y: f64, b: u64) -> Complex64 {
    if t == 0 {
        return Complex64::new(y, 0.0);
    }
    let rho = nrt_weight(t, b);
    let scale = (b as f64).powi(rho as i32);
    let v = y * scale;
    let cells = level_cell(y, b, rho).min((b as u128).pow(rho));
    let rem = (v - cells as f64).max(0.0);
    chi_hat_parts(t, cells, rem, b)
}

/// [`chi_hat`] at a rational y = num/den.
pub fn chi_hat_exact(t: u64, num: u64, den: u64, b: u64) -> Complex64 {
    if t == 0 {
        return Complex64::new(num as f64 / den as f64, 0.0);
    }
    let rho = nrt_weight(t, b);
    let (cells, r) = scaled_floor(num, den, b, rho);
    chi_hat_parts(t, cells, r as f64 / den as f64, b)
}

/// The Fine–Price expansion of χ̂_{[0,y)}(t), truncated after `depth` terms in a.
pub fn fine_price_series(t: u64, y: f64, b: u64, depth: u32) -> Complex64 {
    let one = Complex64::new(1.0, 0.0);
    if t == 0 {
        let mut s = Complex64::new(0.5, 0.0);
        for a in 1..=depth {
            let ba = (b as f64).powi(a as i32);
            for z in 1..b {
                let coef = one / ((unit_root(b, -(z as i64)) - 1.0) * ba);
                s += coef * wal_eval(z * b.pow(a - 1), y, b);
            }
        }
        return s;
    }
    let w = WalshIndex::new(t, b);
    let rho = w.rho();
    let tau = w.leading() as i64;
    let e = unit_root(b, -tau);
    let mut s = (one / (one - e)) * wal_eval(w.truncated(), y, b).conj();
    s += (one / (e - 1.0) + 0.5) * wal_eval(t, y, b).conj();
    for a in 1..=depth {
        let ba = (b as f64).powi(a as i32);
        let shift = b.pow(rho + a - 1);
        for z in 1..b {
            let coef = one / ((unit_root(b, z as i64) - 1.0) * ba);
            s += coef * wal_eval(z * shift + t, y, b).conj();
        }
    }
    s * (b as f64).powi(-(rho as i32))
}

/// ⟨h_{jml}, wal_α⟩ = ∫ h_{jml} conj(wal_α) for a one-dimensional Haar index.
pub fn haar_walsh_inner(j: i32, m: u64, l: u32, alpha: u64, b: u64) -> Complex64 {
    if j < 0 {
        return Complex64::new(if alpha == 0 { 1.0 } else { 0.0 }, 0.0);
    }
    let w = WalshIndex::new(alpha, b);
    if w.rho() != j as u32 + 1 || w.leading() != l as u64 {
        return Complex64::new(0.0, 0.0);
    }
    let prefix = wal_eval_exact(w.truncated(), m, b.pow(j as u32), b);
    prefix.conj() * (b as f64).powi(-j)
}

/// Digitwise negation: conj(wal_u) = wal_{neg(u)}.
pub fn digit_negate(u: u64, b: u64) -> u64 {
    let mut out = 0u64;
    let mut p = 1u64;
    let mut rest = u;
    while rest > 0 {
        out += (b - rest % b) % b * p;
        rest /= b;
        p *= b;
    }
    out
}

/// ⟨χ̂_{[0,·)}(t), wal_α⟩: the Walsh coefficient of y ↦ χ̂_{[0,y)}(t), read off the
/// Fine–Price expansion.
pub fn chihat_walsh_inner(t: u64, alpha: u64, b: u64) -> Complex64 {
    let one = Complex64::new(1.0, 0.0);
    let zero = Complex64::new(0.0, 0.0);
    if t == 0 {
        if alpha == 0 {
            return Complex64::new(0.5, 0.0);
        }
        let w = WalshIndex::new(alpha, b);
        if w.truncated() != 0 {
            return zero;
        }
        let a = w.rho() as i32;
        return one / ((unit_root(b, -(w.leading() as i64)) - 1.0) * (b as f64).powi(a));
    }
    let w = WalshIndex::new(t, b);
    let rho = w.rho();
    let scale = (b as f64).powi(-(rho as i32));
    let e = unit_root(b, -(w.leading() as i64));
    // conj(wal_u) = wal_{neg(u)}, so match α against negated indices
    let target = digit_negate(alpha, b);
    if target == w.truncated() {
        return one / (one - e) * scale;
    }
    if target == t {
        return (one / (e - 1.0) + 0.5) * scale;
    }
    if target > t {
        let ext = target - t;
        let base_shift = b.pow(rho);
        if ext.is_multiple_of(base_shift) {
            let hi = WalshIndex::new(ext / base_shift, b);
            if hi.truncated() == 0 {
                let a = hi.rho() as i32;
                let z = hi.leading() as i64;
                return one / ((unit_root(b, z) - 1.0) * (b as f64).powi(a)) * scale;
            }
        }
    }
    zero
}

/// Values of Σ_{t<b^n} c_t wal_t at the grid points k/b^n, k = 0, …, b^n − 1.
pub fn walsh_synthesis(coeffs: &[Complex64], b: u64, n: u32) -> Vec<Complex64> {
    let size = (b as usize).pow(n);
    assert_eq!(coeffs.len(), size, "need b^n coefficients");
    // index t = Σ t_ν b^ν; output index k = Σ x_{ν+1} b^{n−1−ν}
    let mut a = coeffs.to_vec();
    let roots: Vec<Complex64> = (0..b).map(|e| unit_root(b, e as i64)).collect();
    let bu = b as usize;
    // transform along digit ν of t: replace t_ν by x_{ν+1}, in place
    for nu in 0..n as usize {
        let stride = bu.pow(nu as u32);
        let mut out = vec![Complex64::new(0.0, 0.0); size];
        for (idx, slot) in out.iter_mut().enumerate() {
            let x = (idx / stride) % bu;
            let base = idx - x * stride;
            let mut s = Complex64::new(0.0, 0.0);
            for tv in 0..bu {
                s += a[base + tv * stride] * roots[(tv * x) % bu];
            }
            *slot = s;
        }
        a = out;
    }
    // position ν now holds x_{ν+1}; reverse digits to get k
    let mut res = vec![Complex64::new(0.0, 0.0); size];
    for (idx, v) in a.into_iter().enumerate() {
        let mut k = 0usize;
        let mut rest = idx;
        for _ in 0..n {
            k = k * bu + rest % bu;
            rest /= bu;
        }
        res[k] = v;
    }
    res
}

/// The split D_P(y) = Θ_P(y) + R_P(y) at one point y.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ThetaSplit {
    /// Θ as the sum of χ̂ over the dual net without 0.
    pub theta_dual: Complex64,
    /// Θ from the Walsh series of the indicator truncated at b^n − 1.
    pub theta_walsh: Complex64,
    pub disc: f64,
    /// R = D − Θ (dual-sum Θ).
    pub rest: Complex64,
}

/// Precomputed dual net of a digital net for repeated Θ/R evaluation.
#[derive(Debug, Clone)]
pub struct ThetaSplitter<'a> {
    net: &'a DigitalNet,
    dual: Vec<Vec<u64>>,
}

impl<'a> ThetaSplitter<'a> {
    pub fn new(net: &'a DigitalNet) -> Result<Self> {
        let g = &net.matrices;
        let basis = dual_net_basis(g);
        let size = (g.base() as u128).checked_pow(basis.len() as u32);
        if size.is_none_or(|s| s > ENUMERATION_BUDGET as u128) {
            return Err(Error::Budget(format!("dual net of dimension {} too large", basis.len())));
        }
        let (b, n) = (g.base(), g.n());
        let mut dual = Vec::new();
        linalg::for_each_combination(&basis, g.dim() * n, b, |v| {
            if v.iter().any(|&x| x != 0) {
                dual.push(v.chunks(n).map(|blk| blk.iter().rev().fold(0u64, |acc, &x| acc * b + x)).collect());
            }
        });
        Ok(ThetaSplitter { net, dual })
    }

    /// D' (the dual net without 0).
    pub fn dual(&self) -> &[Vec<u64>] {
        &self.dual
    }

    pub fn theta_dual(&self, y: &[f64]) -> Complex64 {
        let b = self.net.matrices.base();
        self.dual
            .par_iter()
            .map(|t| t.iter().zip(y).map(|(&ti, &yi)| chi_hat(ti, yi, b)).product::<Complex64>())
            .sum()
    }

    pub fn theta_walsh(&self, y: &[f64]) -> Complex64 {
        let g = &self.net.matrices;
        let (b, n) = (g.base(), g.n() as u32);
        let size = b.pow(n);
        let tables: Vec<Vec<Complex64>> = y
            .iter()
            .map(|&yi| {
                let coeffs: Vec<Complex64> = (0..size).map(|t| chi_hat(t, yi, b)).collect();
                walsh_synthesis(&coeffs, b, n)
            })
            .collect();
        let p = &self.net.points;
        let s: Complex64 = (0..p.len())
            .map(|h| p.point(h).iter().zip(&tables).map(|(&c, tab)| tab[c as usize]).product::<Complex64>())
            .sum();
        s / p.len() as f64 - y.iter().product::<f64>()
    }

    pub fn split(&self, y: &[f64]) -> ThetaSplit {
        let theta_dual = self.theta_dual(y);
        let theta_walsh = self.theta_walsh(y);
        let disc = crate::norms::disc_eval_f64(&self.net.points, y);
        ThetaSplit { theta_dual, theta_walsh, disc, rest: Complex64::new(disc, 0.0) - theta_dual }
    }
}

/// Θ and R at a single point y.
pub fn theta_main(net: &DigitalNet, y: &[f64]) -> Result<ThetaSplit> {
    Ok(ThetaSplitter::new(net)?.split(y))
}

/// Summary of the Θ/R split over sampled points y.
#[derive(Debug, Clone, PartialEq)]
pub struct ThetaStudy {
    pub samples: usize,
    pub seed: u64,
    /// max |Θ_dual − Θ_walsh| over the samples.
    pub max_route_gap: f64,
    /// max b^n |R_P(y)| over the samples.
    pub sup_scaled_rest: f64,
}

pub fn theta_study(net: &DigitalNet, samples: usize, seed: u64) -> Result<ThetaStudy> {
    let splitter = ThetaSplitter::new(net)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let d = net.points.dim();
    let ys: Vec<Vec<f64>> = (0..samples).map(|_| (0..d).map(|_| rng.gen::<f64>()).collect()).collect();
    let scale = (net.matrices.base() as f64).powi(net.matrices.n() as i32);
    let mut gap: f64 = 0.0;
    let mut sup: f64 = 0.0;
    for y in &ys {
        let s = splitter.split(y);
        gap = gap.max((s.theta_dual - s.theta_walsh).norm());
        sup = sup.max(scale * s.rest.norm());
    }
    Ok(ThetaStudy { samples, seed, max_route_gap: gap, sup_scaled_rest: sup })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::digitalnet::GeneratingMatrices;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn close(a: Complex64, b: Complex64, tol: f64) -> bool {
        (a - b).norm() < tol
    }

    #[test]
    fn wal_examples() {
        assert_eq!(wal_eval(0, 0.37, 3), c(1.0, 0.0));
        assert!(close(wal_eval(1, 0.5, 2), c(-1.0, 0.0), 1e-15));
        assert!(close(wal_eval(1, 2.0 / 3.0, 3), unit_root(3, 2), 1e-15));
        assert!(close(wal_eval_exact(1, 2, 3, 3), unit_root(3, 2), 1e-15));
        // α = 5 = 1 + 1·4 in base 2 uses digits x_1 and x_3
        assert!(close(wal_eval(5, 0.625, 2), c(1.0, 0.0), 1e-15));
        assert!(close(wal_eval(5, 0.5, 2), c(-1.0, 0.0), 1e-15));
    }

    #[test]
    fn walsh_index_parts() {
        let w = WalshIndex::new(14, 3); // 14 = 2 + 1·3 + 1·9
        assert_eq!((w.rho(), w.leading(), w.truncated()), (3, 1, 5));
        assert_eq!(digit_negate(14, 3), 1 + 2 * 3 + 2 * 9);
        assert_eq!(digit_negate(5, 2), 5);
    }

    /// Midpoint rule on level-k cells, exact for the piecewise-linear χ̂ times piecewise-constant wal.
    fn integrate_cells(level: u32, b: u64, f: impl Fn(f64) -> Complex64) -> Complex64 {
        let cells = b.pow(level);
        (0..cells).map(|c| f((c as f64 + 0.5) / cells as f64)).sum::<Complex64>() / cells as f64
    }

    #[test]
    fn chi_hat_examples() {
        assert_eq!(chi_hat(0, 0.3, 2), c(0.3, 0.0));
        assert!(close(chi_hat(1, 1.0, 2), c(0.0, 0.0), 1e-15));
        assert!(close(chi_hat(1, 0.5, 2), c(0.5, 0.0), 1e-15));
        assert!(close(chi_hat_exact(1, 1, 2, 2), c(0.5, 0.0), 1e-15));
    }

    #[test]
    fn chi_hat_matches_cell_sum() {
        for b in [2u64, 3, 5] {
            for t in 0..b.pow(3) {
                for k in 0..=b.pow(3) {
                    let y = k as f64 / b.pow(3) as f64;
                    let want = integrate_cells(4, b, |x| if x < y { wal_eval(t, x, b).conj() } else { c(0.0, 0.0) });
                    assert!(close(chi_hat(t, y, b), want, 1e-12), "b={b} t={t} y={y}");
                    assert!(close(chi_hat_exact(t, k, b.pow(3), b), want, 1e-12));
                }
            }
        }
    }

    #[test]
    fn fine_price_examples() {
        assert!(close(fine_price_series(0, 0.5, 2, 20), c(0.5, 0.0), 1e-6));
        assert!(fine_price_series(0, 0.0, 3, 30).norm() < 1e-12);
        let y = 5.0 / 9.0;
        assert!(close(fine_price_series(2, y, 3, 12), chi_hat(2, y, 3), 1e-5));
    }

    #[test]
    fn haar_walsh_examples() {
        assert!(close(haar_walsh_inner(0, 0, 1, 1, 2), c(1.0, 0.0), 1e-15));
        assert_eq!(haar_walsh_inner(2, 1, 1, 0, 3), c(0.0, 0.0));
        assert_eq!(haar_walsh_inner(-1, 0, 1, 0, 3), c(1.0, 0.0));
    }

    #[test]
    fn haar_walsh_matches_integration() {
        for b in [2u64, 3] {
            for j in -1..=2i32 {
                let ms = if j < 0 { 1 } else { b.pow(j as u32) };
                for m in 0..ms {
                    let ls: Vec<u32> = if j < 0 { vec![1] } else { (1..b as u32).collect() };
                    for &l in &ls {
                        let idx = crate::badic::HaarIndex { j: vec![j], m: vec![m], l: vec![l] };
                        for alpha in 0..b.pow(4) {
                            let want = integrate_cells(4, b, |x| crate::haar::haar_eval_f64(&idx, &[x], b) * wal_eval(alpha, x, b).conj());
                            let got = haar_walsh_inner(j, m, l, alpha, b);
                            assert!(close(got, want, 1e-12), "b={b} j={j} m={m} l={l} alpha={alpha}");
                        }
                    }
                }
            }
        }
    }

    #[test]
    fn chihat_walsh_examples() {
        assert_eq!(chihat_walsh_inner(0, 0, 2), c(0.5, 0.0));
        assert_eq!(chihat_walsh_inner(3, 5, 2), c(0.0, 0.0));
        for a in 1..4u32 {
            for z in 1..3u64 {
                let got = chihat_walsh_inner(0, z * 3u64.pow(a - 1), 3);
                let want = c(1.0, 0.0) / ((unit_root(3, -(z as i64)) - 1.0) * 3f64.powi(a as i32));
                assert!(close(got, want, 1e-15));
            }
        }
    }

    #[test]
    fn chihat_walsh_matches_integration() {
        for b in [2u64, 3] {
            for t in 0..b.pow(2) {
                for alpha in 0..b.pow(4) {
                    let level = nrt_weight(t, b).max(nrt_weight(alpha, b)).max(1);
                    let want = integrate_cells(level + 1, b, |y| chi_hat(t, y, b) * wal_eval(alpha, y, b).conj());
                    let got = chihat_walsh_inner(t, alpha, b);
                    // the expansion has terms beyond b^4 but each level-ρ(α) coefficient is exact
                    assert!(close(got, want, 1e-12), "b={b} t={t} alpha={alpha}: {got} vs {want}");
                }
            }
        }
    }

    #[test]
    fn synthesis_is_cell_average() {
        // Σ_{t<b^n} χ̂(t) wal_t is the average of χ_{[0,y)} over each level-n cell
        for b in [2u64, 3] {
            let n = 3;
            let size = b.pow(n);
            for y in [0.0, 0.3, 0.5, 0.77, 1.0] {
                let coeffs: Vec<Complex64> = (0..size).map(|t| chi_hat(t, y, b)).collect();
                let f = walsh_synthesis(&coeffs, b, n);
                for k in 0..size {
                    let lo = k as f64 / size as f64;
                    let hi = (k + 1) as f64 / size as f64;
                    let avg = ((y.min(hi) - lo).max(0.0)) * size as f64;
                    assert!(close(f[k as usize], c(avg, 0.0), 1e-12), "b={b} y={y} k={k}");
                }
            }
        }
    }

    #[test]
    fn theta_examples() {
        let g = GeneratingMatrices::new(2, 1, vec![vec![vec![1]], vec![vec![1]]]).unwrap();
        let net = DigitalNet::new(g).unwrap();
        let s = theta_main(&net, &[1.0, 1.0]).unwrap();
        assert!(s.theta_dual.norm() < 1e-15 && s.rest.norm() < 1e-15);
        let s = theta_main(&net, &[0.5, 0.5]).unwrap();
        assert!(close(s.theta_dual, c(0.25, 0.0), 1e-15));
        assert!((s.disc - 0.25).abs() < 1e-15);
        assert!(s.rest.norm() < 1e-15);
        let s = theta_main(&net, &[0.0, 0.0]).unwrap();
        assert!(s.theta_dual.norm() < 1e-15 && s.rest.norm() < 1e-15);
    }
}
