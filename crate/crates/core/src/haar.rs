//! b-adic Haar functions and closed-form Haar coefficients of discrepancy functions.

use std::collections::HashMap;
use std::f64::consts::PI;
use std::io::Write;

use num::complex::Complex64;
use rayon::prelude::*;

use crate::badic::{level_order, locate, scaled_floor, HaarIndex};
use crate::error::{Error, Result};
use crate::pointset::PointSet;

/// Largest explicit spectrum materialized by [`disc_spectrum`].
pub const SPECTRUM_BUDGET: u128 = 5_000_000;

/// e^{2πi e/b}.
pub fn unit_root(b: u64, e: i64) -> Complex64 {
    let r = e.rem_euclid(b as i64) as f64;
    Complex64::from_polar(1.0, 2.0 * PI * r / b as f64)
}

/// Value of h_{jml} at the point `num/den`.
pub fn haar_eval(idx: &HaarIndex, num: &[u64], den: &[u64], b: u64) -> Complex64 {
    let (m, k) = locate(num, den, &idx.j, b);
    let mut v = Complex64::new(1.0, 0.0);
    for i in 0..idx.dim() {
        if idx.j[i] < 0 {
            continue;
        }
        if m[i] != idx.m[i] {
            return Complex64::new(0.0, 0.0);
        }
        v *= unit_root(b, idx.l[i] as i64 * k[i]);
    }
    v
}

/// Value of h_{jml} at a real point.
pub fn haar_eval_f64(idx: &HaarIndex, x: &[f64], b: u64) -> Complex64 {
    let mut v = Complex64::new(1.0, 0.0);
    for (i, &xi) in x.iter().enumerate().take(idx.dim()) {
        let j = idx.j[i];
        if j < 0 {
            continue;
        }
        let fine = (xi * (b as f64).powi(j + 1)).floor() as u64;
        if fine / b != idx.m[i] {
            return Complex64::new(0.0, 0.0);
        }
        v *= unit_root(b, idx.l[i] as i64 * (fine % b) as i64);
    }
    v
}

/// Haar coefficient of x_1 ⋯ x_d.
pub fn coeff_volume(idx: &HaarIndex, b: u64) -> Complex64 {
    let s = idx.s() as i32;
    let d = idx.dim() as i32;
    let pref = (b as f64).powi(-2 * idx.order() as i32 - s) / 2f64.powi(d - s);
    let denom: Complex64 = idx.eta().iter().map(|&i| unit_root(b, idx.l[i] as i64) - 1.0).product();
    Complex64::new(pref, 0.0) / denom
}

/// Σ_{r=k}^{b−1} e^{2πi l r/b} for k = 0..=b (k = b gives 0).
fn suffix_sums(b: u64, l: u32) -> Vec<Complex64> {
    let mut out = vec![Complex64::new(0.0, 0.0); b as usize + 1];
    for r in (0..b as usize).rev() {
        out[r] = out[r + 1] + unit_root(b, l as i64 * r as i64);
    }
    out
}

/// The bracket (1 − frac(b^{j+1} z)) e^{2πi k l/b} + Σ_{r>k} e^{2πi r l/b}, without the b^{−j−1} factor.
fn bracket(frac: f64, k: u64, l: u32, b: u64, suffix: &[Complex64]) -> Complex64 {
    unit_root(b, l as i64 * k as i64) * (1.0 - frac) + suffix[k as usize + 1]
}

/// Haar coefficient of x ↦ χ_{[0,x)}(z), i.e. of the indicator of {x : x > z}.
pub fn coeff_indicator(num: &[u64], den: &[u64], idx: &HaarIndex, b: u64) -> Complex64 {
    let (m, k) = locate(num, den, &idx.j, b);
    let mut v = Complex64::new(1.0, 0.0);
    for i in 0..idx.dim() {
        let j = idx.j[i];
        if j < 0 {
            v *= 1.0 - num[i] as f64 / den[i] as f64;
            continue;
        }
        if m[i] != idx.m[i] {
            return Complex64::new(0.0, 0.0);
        }
        let (_, rem) = scaled_floor(num[i], den[i], b, j as u32 + 1);
        let frac = rem as f64 / den[i] as f64;
        let suffix = suffix_sums(b, idx.l[i]);
        v *= bracket(frac, k[i] as u64, idx.l[i], b, &suffix) * (b as f64).powi(-j - 1);
    }
    v
}

/// Haar coefficient of the (weighted) discrepancy function of `p`.
pub fn disc_coefficient(p: &PointSet, idx: &HaarIndex) -> Complex64 {
    let b = p.base();
    let sum: Complex64 = (0..p.len())
        .map(|i| coeff_indicator(p.point(i), p.denoms(), idx, b) * p.weight_f64(i))
        .sum();
    sum - coeff_volume(idx, b)
}

/// All level vectors in {−1, …, jmax}^d, in lexicographic order.
pub fn level_vectors(d: usize, jmax: i32) -> Vec<Vec<i32>> {
    let mut out = vec![vec![]];
    for _ in 0..d {
        out = out
            .into_iter()
            .flat_map(|v: Vec<i32>| {
                (-1..=jmax).map(move |x| {
                    let mut w = v.clone();
                    w.push(x);
                    w
                })
            })
            .collect();
    }
    out
}

/// All l tuples in B_j, lexicographic, as full-length vectors (1 on inactive coordinates).
pub fn l_tuples(j: &[i32], b: u64) -> Vec<Vec<u32>> {
    let mut out = vec![vec![]];
    for &ji in j {
        let range: Vec<u32> = if ji < 0 { vec![1] } else { (1..b as u32).collect() };
        out = out
            .into_iter()
            .flat_map(|v: Vec<u32>| {
                range.iter().map(move |&x| {
                    let mut w = v.clone();
                    w.push(x);
                    w
                })
            })
            .collect();
    }
    out
}

/// All Haar coefficients of the discrepancy function on one level j.
///
/// Only intervals containing at least one point are stored; on every other interval
/// the coefficient equals the negated volume coefficient.
#[derive(Debug, Clone)]
pub struct LevelCoefficients {
    pub j: Vec<i32>,
    /// l tuples in the order used by the coefficient vectors.
    pub ls: Vec<Vec<u32>>,
    /// (m, coefficient per l) for occupied intervals, sorted by m.
    pub occupied: Vec<(Vec<u64>, Vec<Complex64>)>,
    /// Coefficient on intervals without points, per l.
    pub empty: Vec<Complex64>,
    /// Number of intervals without points.
    pub empty_count: u128,
}

impl LevelCoefficients {
    /// Σ_{m,l} |μ|^p, or max |μ| when p is infinite.
    pub fn lp_mass(&self, p: f64) -> f64 {
        if p.is_infinite() {
            let occ = self.occupied.iter().flat_map(|(_, v)| v.iter()).map(|c| c.norm()).fold(0.0, f64::max);
            let emp = if self.empty_count > 0 { self.empty.iter().map(|c| c.norm()).fold(0.0, f64::max) } else { 0.0 };
            return occ.max(emp);
        }
        let occ: f64 = self.occupied.iter().flat_map(|(_, v)| v.iter()).map(|c| c.norm().powf(p)).sum();
        let emp: f64 = self.empty.iter().map(|c| c.norm().powf(p)).sum();
        occ + self.empty_count as f64 * emp
    }

    /// Coefficient for interval m and l-tuple position `li`.
    pub fn get(&self, m: &[u64], li: usize) -> Complex64 {
        match self.occupied.binary_search_by(|(mm, _)| mm.as_slice().cmp(m)) {
            Ok(pos) => self.occupied[pos].1[li],
            Err(_) => self.empty[li],
        }
    }
}

/// Haar coefficients of D_P on level `j`, grouped by interval.
pub fn level_coefficients(p: &PointSet, j: &[i32]) -> LevelCoefficients {
    let b = p.base();
    let d = p.dim();
    let ls = l_tuples(j, b);
    let active: Vec<usize> = (0..d).filter(|&i| j[i] >= 0).collect();
    // per active coordinate: suffix sums for each l
    let suffix: Vec<Vec<Vec<Complex64>>> = active
        .iter()
        .map(|_| (1..b as u32).map(|l| suffix_sums(b, l)).collect())
        .collect();
    let mut buckets: HashMap<Vec<u64>, Vec<Complex64>> = HashMap::new();
    let zero = Complex64::new(0.0, 0.0);
    for z in 0..p.len() {
        let pt = p.point(z);
        let (m, k) = locate(pt, p.denoms(), j, b);
        let mut scalar = p.weight_f64(z);
        for i in 0..d {
            if j[i] < 0 {
                scalar *= 1.0 - pt[i] as f64 / p.denoms()[i] as f64;
            } else {
                scalar *= (b as f64).powi(-j[i] - 1);
            }
        }
        // tensor product over active coordinates, lexicographic in l
        let mut tensor = vec![Complex64::new(scalar, 0.0)];
        for (a, &i) in active.iter().enumerate() {
            let (_, rem) = scaled_floor(pt[i], p.denoms()[i], b, j[i] as u32 + 1);
            let frac = rem as f64 / p.denoms()[i] as f64;
            let factors: Vec<Complex64> = (1..b as u32)
                .map(|l| bracket(frac, k[i] as u64, l, b, &suffix[a][l as usize - 1]))
                .collect();
            tensor = tensor.iter().flat_map(|&t| factors.iter().map(move |&f| t * f)).collect();
        }
        let entry = buckets.entry(m).or_insert_with(|| vec![zero; ls.len()]);
        for (e, t) in entry.iter_mut().zip(&tensor) {
            *e += t;
        }
    }
    let empty: Vec<Complex64> = ls
        .iter()
        .map(|l| -coeff_volume(&HaarIndex { j: j.to_vec(), m: vec![0; d], l: l.clone() }, b))
        .collect();
    let mut occupied: Vec<(Vec<u64>, Vec<Complex64>)> = buckets
        .into_iter()
        .map(|(m, mut v)| {
            for (c, e) in v.iter_mut().zip(&empty) {
                *c += e;
            }
            (m, v)
        })
        .collect();
    occupied.sort_by(|a, b| a.0.cmp(&b.0));
    let cells: u128 = (b as u128).pow(level_order(j));
    let empty_count = cells - occupied.len() as u128;
    LevelCoefficients { j: j.to_vec(), ls, occupied, empty, empty_count }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HaarCoefficient<'a> {
    pub index: &'a HaarIndex,
    pub value: Complex64,
}

/// Haar coefficients for every index with all levels at most `jmax`.
#[derive(Debug, Clone)]
pub struct HaarSpectrum {
    pub base: u64,
    pub dim: usize,
    pub jmax: i32,
    pub source: String,
    entries: Vec<(HaarIndex, Complex64)>,
}

impl HaarSpectrum {
    pub fn from_entries(base: u64, dim: usize, jmax: i32, source: &str, mut entries: Vec<(HaarIndex, Complex64)>) -> Self {
        entries.sort_by(|a, b| a.0.cmp(&b.0));
        HaarSpectrum { base, dim, jmax, source: source.to_string(), entries }
    }

    /// The spectrum of the constant function 1.
    pub fn constant_one(base: u64, dim: usize) -> Self {
        Self::from_entries(base, dim, -1, "one", vec![(HaarIndex::constant(dim), Complex64::new(1.0, 0.0))])
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = HaarCoefficient<'_>> {
        self.entries.iter().map(|(index, value)| HaarCoefficient { index, value: *value })
    }

    pub fn get(&self, idx: &HaarIndex) -> Option<Complex64> {
        self.entries.binary_search_by(|(i, _)| i.cmp(idx)).ok().map(|p| self.entries[p].1)
    }

    /// Σ b^{|j|} |μ|² over the stored coefficients.
    pub fn parseval_sum(&self) -> f64 {
        let b = self.base as f64;
        self.entries.iter().map(|(i, v)| b.powi(i.order() as i32) * v.norm_sqr()).sum()
    }

    /// CSV with columns j_1..j_d, m_1..m_d, l_1..l_d, re, im.
    pub fn write_csv<W: Write>(&self, w: W) -> Result<()> {
        let mut out = csv::Writer::from_writer(w);
        let mut header: Vec<String> = Vec::new();
        for key in ["j", "m", "l"] {
            header.extend((1..=self.dim).map(|i| format!("{key}_{i}")));
        }
        header.push("re".into());
        header.push("im".into());
        out.write_record(&header)?;
        for (idx, v) in &self.entries {
            let mut row: Vec<String> = idx.j.iter().map(|x| x.to_string()).collect();
            row.extend(idx.m.iter().map(|x| x.to_string()));
            row.extend(idx.l.iter().map(|x| x.to_string()));
            row.push(format!("{:.17e}", v.re));
            row.push(format!("{:.17e}", v.im));
            out.write_record(&row)?;
        }
        out.flush()?;
        Ok(())
    }
}

/// Number of Haar indices with all levels at most `jmax`.
pub fn spectrum_size(d: usize, b: u64, jmax: i32) -> u128 {
    // per coordinate: 1 (level −1) + Σ_{j=0}^{jmax} b^j (b−1) = b^{jmax+1}
    let per = if jmax < 0 { 1 } else { (b as u128).saturating_pow(jmax as u32 + 1) };
    per.saturating_pow(d as u32)
}

/// Explicit Haar spectrum of D_P truncated at level `jmax`.
pub fn disc_spectrum(p: &PointSet, jmax: i32) -> Result<HaarSpectrum> {
    if jmax < -1 {
        return Err(Error::InvalidParameter("level cap must be at least -1".into()));
    }
    let b = p.base();
    let d = p.dim();
    let size = spectrum_size(d, b, jmax);
    if size > SPECTRUM_BUDGET {
        return Err(Error::Budget(format!("{size} coefficients exceed the spectrum budget")));
    }
    let entries: Vec<(HaarIndex, Complex64)> = level_vectors(d, jmax)
        .par_iter()
        .flat_map_iter(|j| {
            let lc = level_coefficients(p, j);
            let cells: Vec<Vec<u64>> = all_m(j, b);
            cells
                .into_iter()
                .flat_map(|m| {
                    lc.ls
                        .iter()
                        .enumerate()
                        .map(|(li, l)| (HaarIndex { j: j.clone(), m: m.clone(), l: l.clone() }, lc.get(&m, li)))
                        .collect::<Vec<_>>()
                })
                .collect::<Vec<_>>()
        })
        .collect();
    Ok(HaarSpectrum::from_entries(b, d, jmax, &p.provenance().family, entries))
}

pub fn all_m(j: &[i32], b: u64) -> Vec<Vec<u64>> {
    let mut out = vec![vec![]];
    for &ji in j {
        let count = if ji < 0 { 1 } else { b.pow(ji as u32) };
        out = out
            .into_iter()
            .flat_map(|v: Vec<u64>| {
                (0..count).map(move |x| {
                    let mut w = v.clone();
                    w.push(x);
                    w
                })
            })
            .collect();
    }
    out
}

/// Truncated Parseval sum Σ_{levels ≤ jmax} b^{|j|} Σ |μ|² of D_P, computed level by level
/// without materializing the spectrum.
pub fn parseval_sum(p: &PointSet, jmax: i32) -> f64 {
    let b = p.base() as f64;
    level_vectors(p.dim(), jmax)
        .par_iter()
        .map(|j| b.powi(level_order(j) as i32) * level_coefficients(p, j).lp_mass(2.0))
        .sum()
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ParsevalReport {
    pub sum: f64,
    pub reference: f64,
    pub gap: f64,
}

/// Compare the truncated Parseval sum against an exact squared L2 norm.
pub fn parseval_check(spec: &HaarSpectrum, l2_squared_reference: f64) -> ParsevalReport {
    let sum = spec.parseval_sum();
    ParsevalReport { sum, reference: l2_squared_reference, gap: l2_squared_reference - sum }
}
