//! Base-b digit expansions, b-adic intervals, weights and the digit-to-point map.
//!
//! Digit vectors are least-significant first when they describe integers and
//! most-significant first (a_1 = first digit after the point) when they are fed
//! to [`phi_map`].

use num::{BigUint, ToPrimitive};
use num::rational::Ratio;

use crate::error::{Error, Result};

/// Checked `b^e` in u64.
pub fn pow_u64(b: u64, e: u32) -> Option<u64> {
    b.checked_pow(e)
}

/// Checked `b^e` in u128.
pub fn pow_u128(b: u64, e: u32) -> Option<u128> {
    (b as u128).checked_pow(e)
}

/// `floor(num · b^e / den)` together with the remainder `num · b^e mod den`.
pub fn scaled_floor(num: u64, den: u64, b: u64, e: u32) -> (u128, u64) {
    if let Some(prod) = pow_u128(b, e).and_then(|p| p.checked_mul(num as u128)) {
        return (prod / den as u128, (prod % den as u128) as u64);
    }
    let prod = BigUint::from(num) * BigUint::from(b).pow(e);
    let den_big = BigUint::from(den);
    let q = &prod / &den_big;
    let r = (&prod % &den_big).to_u64().unwrap_or(0);
    (q.to_u128().unwrap_or(u128::MAX), r)
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct DigitVector {
    pub digits: Vec<u32>,
    pub base: u64,
}

impl DigitVector {
    pub fn new(digits: Vec<u32>, base: u64) -> Result<Self> {
        if let Some(&bad) = digits.iter().find(|&&x| x as u64 >= base) {
            return Err(Error::OutOfRange { value: bad as u64, bound: base });
        }
        Ok(DigitVector { digits, base })
    }

    pub fn zeros(n: usize, base: u64) -> Self {
        DigitVector { digits: vec![0; n], base }
    }

    pub fn len(&self) -> usize {
        self.digits.len()
    }

    pub fn is_empty(&self) -> bool {
        self.digits.is_empty()
    }
}

/// Digits of `k` in base `b`, least significant first, padded to length `n`.
pub fn digits_of(k: u64, b: u64, n: usize) -> Result<DigitVector> {
    let mut digits = Vec::with_capacity(n);
    let mut rest = k;
    for _ in 0..n {
        digits.push((rest % b) as u32);
        rest /= b;
    }
    if rest != 0 {
        let bound = pow_u64(b, n as u32).unwrap_or(u64::MAX);
        return Err(Error::OutOfRange { value: k, bound });
    }
    Ok(DigitVector { digits, base: b })
}

/// Inverse of [`digits_of`].
pub fn value_of(v: &DigitVector) -> u64 {
    v.digits.iter().rev().fold(0u64, |acc, &x| acc * v.base + x as u64)
}

/// Radical inverse r_b(i) = i_0/b + i_1/b² + …, as (numerator, exponent) over b^exponent.
pub fn bit_reversal_parts(i: u64, b: u64) -> (u64, u32) {
    let mut num = 0u64;
    let mut k = 0u32;
    let mut rest = i;
    while rest > 0 {
        num = num * b + rest % b;
        rest /= b;
        k += 1;
    }
    (num, k)
}

/// Radical inverse r_b(i) as an exact rational.
pub fn bit_reversal(i: u64, b: u64) -> Ratio<u64> {
    let (num, k) = bit_reversal_parts(i, b);
    Ratio::new(num, b.pow(k))
}

/// A b-adic interval I_{jm} in [0,1)^d; level −1 means the whole unit interval.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct BadicInterval {
    pub j: Vec<i32>,
    pub m: Vec<u64>,
    pub base: u64,
}

impl BadicInterval {
    pub fn new(j: Vec<i32>, m: Vec<u64>, base: u64) -> Result<Self> {
        check_jm(&j, &m, base)?;
        Ok(BadicInterval { j, m, base })
    }

    /// |j|, summing only levels ≥ 0.
    pub fn order(&self) -> u32 {
        level_order(&self.j)
    }

    pub fn volume(&self) -> Ratio<u128> {
        Ratio::new(1, (self.base as u128).pow(self.order()))
    }

    /// Membership of a point with coordinates `num[i]/den[i]`.
    pub fn contains(&self, num: &[u64], den: &[u64]) -> bool {
        self.j.iter().zip(&self.m).enumerate().all(|(i, (&ji, &mi))| {
            ji < 0 || scaled_floor(num[i], den[i], self.base, ji as u32).0 == mi as u128
        })
    }

    /// The b^s children, where s is the number of coordinates with level ≥ 0.
    /// Coordinates at level −1 are not subdivided; they become level 0.
    pub fn children(&self) -> Vec<BadicInterval> {
        let b = self.base;
        let mut out = vec![BadicInterval { j: vec![], m: vec![], base: b }];
        for (&ji, &mi) in self.j.iter().zip(&self.m) {
            let options: Vec<(i32, u64)> = if ji < 0 {
                vec![(0, 0)]
            } else {
                (0..b).map(|k| (ji + 1, b * mi + k)).collect()
            };
            out = out
                .into_iter()
                .flat_map(|c| {
                    options.iter().map(move |&(jj, mm)| {
                        let mut c = c.clone();
                        c.j.push(jj);
                        c.m.push(mm);
                        c
                    })
                })
                .collect();
        }
        out
    }
}

pub fn level_order(j: &[i32]) -> u32 {
    j.iter().filter(|&&x| x >= 0).map(|&x| x as u32).sum()
}

fn check_jm(j: &[i32], m: &[u64], base: u64) -> Result<()> {
    if j.len() != m.len() {
        return Err(Error::InvalidParameter("j and m differ in length".into()));
    }
    for (&ji, &mi) in j.iter().zip(m) {
        if ji < -1 {
            return Err(Error::InvalidParameter(format!("level {ji} below -1")));
        }
        let bound = if ji < 0 { 1 } else { pow_u64(base, ji as u32).unwrap_or(u64::MAX) };
        if mi >= bound {
            return Err(Error::OutOfRange { value: mi, bound });
        }
    }
    Ok(())
}

/// Haar index (j, m, l). For coordinates with j_i = −1 the entries m_i = 0, l_i = 1.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct HaarIndex {
    pub j: Vec<i32>,
    pub m: Vec<u64>,
    pub l: Vec<u32>,
}

impl HaarIndex {
    pub fn new(j: Vec<i32>, m: Vec<u64>, l: Vec<u32>, base: u64) -> Result<Self> {
        check_jm(&j, &m, base)?;
        if l.len() != j.len() {
            return Err(Error::InvalidParameter("l has the wrong length".into()));
        }
        for (&ji, &li) in j.iter().zip(&l) {
            let ok = if ji < 0 { li == 1 } else { li >= 1 && (li as u64) < base };
            if !ok {
                return Err(Error::InvalidParameter(format!("l = {li} invalid at level {ji}")));
            }
        }
        Ok(HaarIndex { j, m, l })
    }

    /// The constant function index (all levels −1).
    pub fn constant(d: usize) -> Self {
        HaarIndex { j: vec![-1; d], m: vec![0; d], l: vec![1; d] }
    }

    pub fn dim(&self) -> usize {
        self.j.len()
    }

    /// Number of coordinates with level ≥ 0.
    pub fn s(&self) -> usize {
        self.j.iter().filter(|&&x| x >= 0).count()
    }

    /// The coordinates (0-based) with level ≥ 0, in increasing order.
    pub fn eta(&self) -> Vec<usize> {
        (0..self.j.len()).filter(|&i| self.j[i] >= 0).collect()
    }

    pub fn order(&self) -> u32 {
        level_order(&self.j)
    }

    pub fn interval(&self, base: u64) -> BadicInterval {
        BadicInterval { j: self.j.clone(), m: self.m.clone(), base }
    }
}

/// Interval index m and child index k of the point `num/den` at levels `j`.
/// k_i is −1 where j_i = −1. Left endpoints belong to the child to their right.
pub fn locate(num: &[u64], den: &[u64], j: &[i32], b: u64) -> (Vec<u64>, Vec<i64>) {
    let mut m = Vec::with_capacity(j.len());
    let mut k = Vec::with_capacity(j.len());
    for (i, &ji) in j.iter().enumerate() {
        if ji < 0 {
            m.push(0);
            k.push(-1);
        } else {
            let fine = scaled_floor(num[i], den[i], b, ji as u32 + 1).0;
            let mi = fine / b as u128;
            m.push(mi as u64);
            k.push((fine - b as u128 * mi) as i64);
        }
    }
    (m, k)
}

/// NRT weight ρ(α): number of base-b digits of α (0 for α = 0).
pub fn nrt_weight(alpha: u64, b: u64) -> u32 {
    let mut rest = alpha;
    let mut h = 0;
    while rest > 0 {
        rest /= b;
        h += 1;
    }
    h
}

/// Hamming weight κ(α): number of nonzero base-b digits.
pub fn hamming_weight(alpha: u64, b: u64) -> u32 {
    let mut rest = alpha;
    let mut h = 0;
    while rest > 0 {
        if !rest.is_multiple_of(b) {
            h += 1;
        }
        rest /= b;
    }
    h
}

pub fn nrt_weight_vec(alpha: &[u64], b: u64) -> u32 {
    alpha.iter().map(|&a| nrt_weight(a, b)).sum()
}

pub fn hamming_weight_vec(alpha: &[u64], b: u64) -> u32 {
    alpha.iter().map(|&a| hamming_weight(a, b)).sum()
}

/// v_n(a): 1-based index of the last nonzero entry of (a_1, …, a_n), 0 if none.
pub fn vn_weight(a: &[u32]) -> u32 {
    a.iter().rposition(|&x| x != 0).map_or(0, |p| p as u32 + 1)
}

/// κ_n(a): number of nonzero entries.
pub fn kappa_weight(a: &[u32]) -> u32 {
    a.iter().filter(|&&x| x != 0).count() as u32
}

/// d-fold sum of [`vn_weight`].
pub fn vn_weight_multi(a: &[DigitVector]) -> u32 {
    a.iter().map(|v| vn_weight(&v.digits)).sum()
}

pub fn kappa_weight_multi(a: &[DigitVector]) -> u32 {
    a.iter().map(|v| kappa_weight(&v.digits)).sum()
}

/// Numerator of Φ_n(a) = a_1/b + … + a_n/b^n over b^n.
pub fn phi_numerator(a: &[u32], b: u64) -> u64 {
    a.iter().fold(0u64, |acc, &x| acc * b + x as u64)
}

/// Φ_n^d applied coordinatewise; returns numerators over b^n.
pub fn phi_map(a: &[DigitVector], n: usize, b: u64) -> Result<Vec<u64>> {
    a.iter()
        .map(|v| {
            if v.len() != n {
                return Err(Error::InvalidParameter(format!(
                    "digit vector of length {} where {n} expected",
                    v.len()
                )));
            }
            Ok(phi_numerator(&v.digits, b))
        })
        .collect()
}
