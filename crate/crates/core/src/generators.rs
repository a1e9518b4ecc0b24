//! Point-set families: equidistant, Kronecker, Halton, van der Corput,
//! generalized Hammersley and Chen–Skriganov nets, plus first-coordinate rescaling.

use std::fmt;
use std::str::FromStr;

use num::complex::Complex64;
use crate::badic::{bit_reversal_parts, digits_of, nrt_weight, pow_u64};
use crate::digitalnet::{DigitalNet, GeneratingMatrices, DEFAULT_POINT_BUDGET};
use crate::error::{Error, Result};
use crate::gfpoly::{hasse_derivative, is_prime, FieldPoly, PrimeField};
use crate::pointset::{PointSet, Provenance};

/// Denominator used when real sequence values are stored exactly.
pub const SEQUENCE_DENOM_BITS: u32 = 32;

/// The N midpoints (2k+1)/(2N), k = 0, …, N−1.
pub fn equidistant(n_points: u64) -> Result<PointSet> {
    if n_points == 0 {
        return Err(Error::InvalidParameter("N must be positive".into()));
    }
    let coords = (0..n_points).map(|k| 2 * k + 1).collect();
    PointSet::rational(1, 2, vec![2 * n_points], coords, Provenance::new("equidistant").with("N", n_points))
}

/// The first N terms ({θ}, {2θ}, …, {Nθ}) of the Kronecker sequence.
pub fn kronecker(theta: f64, n_points: usize) -> Vec<f64> {
    let frac = theta.rem_euclid(1.0);
    (1..=n_points)
        .map(|k| {
            let v = (k as f64 * frac).rem_euclid(1.0);
            if v >= 1.0 { 0.0 } else { v }
        })
        .collect()
}

/// Normalized Weyl sum (1/N) Σ_j e^{2πi k u_j}.
pub fn weyl_sum(u: &[f64], k: i64) -> Complex64 {
    if u.is_empty() {
        return Complex64::new(0.0, 0.0);
    }
    let s: Complex64 = u
        .iter()
        .map(|&x| {
            // reduce k·x mod 1 before the exponential to keep the phase accurate
            let ph = (k as f64 * x).rem_euclid(1.0);
            Complex64::from_polar(1.0, 2.0 * std::f64::consts::PI * ph)
        })
        .sum();
    s / u.len() as f64
}

/// Store reals in [0,1) as numerators over 2^32 (rounded to nearest).
pub fn quantize(u: &[f64]) -> Vec<u64> {
    let scale = (1u64 << SEQUENCE_DENOM_BITS) as f64;
    let top = (1u64 << SEQUENCE_DENOM_BITS) - 1;
    u.iter().map(|&x| ((x.clamp(0.0, 1.0) * scale).round() as u64).min(top)).collect()
}

/// The lifted set {(k/N mod 1, u_k) : k = 1, …, N} for a sequence of numerators over `u_den`.
pub fn lift_sequence_exact(u_nums: &[u64], u_den: u64, n_points: usize) -> Result<PointSet> {
    if n_points == 0 || u_nums.len() < n_points {
        return Err(Error::InvalidParameter(format!(
            "need at least {n_points} sequence terms, have {}",
            u_nums.len()
        )));
    }
    let n = n_points as u64;
    let coords = (1..=n).flat_map(|k| [k % n, u_nums[(k - 1) as usize]]).collect();
    PointSet::rational(2, 2, vec![n, u_den], coords, Provenance::new("lifted").with("N", n))
}

/// [`lift_sequence_exact`] for real sequence values, quantized to 2^32.
pub fn lift_sequence(u: &[f64], n_points: usize) -> Result<PointSet> {
    let nums = quantize(u);
    lift_sequence_exact(&nums, 1u64 << SEQUENCE_DENOM_BITS, n_points)
}

/// Halton–Hammersley set (i/N, r_{b_1}(i), …, r_{b_{d−1}}(i)), i = 0, …, N−1.
pub fn halton(n_points: u64, bases: &[u64]) -> Result<PointSet> {
    if n_points == 0 {
        return Err(Error::InvalidParameter("N must be positive".into()));
    }
    if bases.is_empty() {
        return Err(Error::InvalidParameter("need at least one base (d ≥ 2)".into()));
    }
    for (k, &b) in bases.iter().enumerate() {
        if !is_prime(b) {
            return Err(Error::NotPrime(b));
        }
        if bases[..k].contains(&b) {
            return Err(Error::InvalidParameter(format!("base {b} repeated")));
        }
    }
    let d = bases.len() + 1;
    let exps: Vec<u32> = bases.iter().map(|&b| nrt_weight(n_points - 1, b)).collect();
    let mut denoms = vec![n_points];
    for (&b, &k) in bases.iter().zip(&exps) {
        denoms.push(pow_u64(b, k).ok_or_else(|| Error::Budget("denominator overflow".into()))?);
    }
    let mut coords = Vec::with_capacity(d * n_points as usize);
    for i in 0..n_points {
        coords.push(i);
        for (&b, &k) in bases.iter().zip(&exps) {
            let (num, e) = bit_reversal_parts(i, b);
            coords.push(num * b.pow(k - e));
        }
    }
    let tags: Vec<String> = bases.iter().map(|b| b.to_string()).collect();
    let prov = Provenance::new("halton").with("N", n_points).with("bases", tags.join(","));
    PointSet::rational(d, bases[0], denoms, coords, prov)
}

/// First N points r_b(0), …, r_b(N−1) of the van der Corput sequence.
pub fn van_der_corput(n_points: u64, b: u64) -> Result<PointSet> {
    if n_points == 0 || b < 2 {
        return Err(Error::InvalidParameter("need N ≥ 1 and b ≥ 2".into()));
    }
    let k = nrt_weight(n_points - 1, b);
    let coords = (0..n_points)
        .map(|i| {
            let (num, e) = bit_reversal_parts(i, b);
            num * b.pow(k - e)
        })
        .collect();
    PointSet::badic(1, b, k, coords, Provenance::new("vdc").with("N", n_points))
}

/// Per-digit choice s_i = t_i (same) or b−1−t_i (complement).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct HammersleyPattern {
    same: Vec<bool>,
}

impl HammersleyPattern {
    pub fn new(same: Vec<bool>) -> Self {
        HammersleyPattern { same }
    }

    /// First `an` entries `same`, the remaining ones `complement`.
    pub fn canonical(n: usize, an: usize) -> Result<Self> {
        if an > n {
            return Err(Error::InvalidParameter(format!("a_n = {an} exceeds n = {n}")));
        }
        Ok(HammersleyPattern { same: (0..n).map(|i| i < an).collect() })
    }

    pub fn all_same(n: usize) -> Self {
        HammersleyPattern { same: vec![true; n] }
    }

    /// All 2^n patterns of length n.
    pub fn all(n: usize) -> Vec<Self> {
        (0..1u64 << n)
            .map(|mask| HammersleyPattern { same: (0..n).map(|i| mask >> i & 1 == 0).collect() })
            .collect()
    }

    pub fn len(&self) -> usize {
        self.same.len()
    }

    pub fn is_empty(&self) -> bool {
        self.same.is_empty()
    }

    pub fn is_same(&self, i: usize) -> bool {
        self.same[i]
    }

    /// a_n = #{i : s_i = t_i}.
    pub fn a_n(&self) -> usize {
        self.same.iter().filter(|&&x| x).count()
    }
}

impl fmt::Display for HammersleyPattern {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for &s in &self.same {
            f.write_str(if s { "s" } else { "c" })?;
        }
        Ok(())
    }
}

impl FromStr for HammersleyPattern {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        s.chars()
            .map(|c| match c {
                's' => Ok(true),
                'c' => Ok(false),
                other => Err(Error::Parse(format!("pattern character '{other}' is not 's' or 'c'"))),
            })
            .collect::<Result<Vec<_>>>()
            .map(HammersleyPattern::new)
    }
}

/// Generalized Hammersley set: x = t_n/b + … + t_1/b^n, y = s_1/b + … + s_n/b^n,
/// listed by t = 0, …, b^n − 1.
pub fn hammersley(b: u64, n: u32, pattern: &HammersleyPattern) -> Result<PointSet> {
    if b < 2 || n == 0 {
        return Err(Error::InvalidParameter("need b ≥ 2 and n ≥ 1".into()));
    }
    if pattern.len() != n as usize {
        return Err(Error::InvalidParameter(format!("pattern length {} differs from n = {n}", pattern.len())));
    }
    let total = pow_u64(b, n)
        .filter(|&t| t <= DEFAULT_POINT_BUDGET)
        .ok_or_else(|| Error::Budget(format!("{b}^{n} points exceed the budget")))?;
    let mut coords = Vec::with_capacity(2 * total as usize);
    for t in 0..total {
        let digits = digits_of(t, b, n as usize)?.digits;
        let y = digits.iter().enumerate().fold(0u64, |acc, (i, &ti)| {
            let s = if pattern.is_same(i) { ti as u64 } else { b - 1 - ti as u64 };
            acc * b + s
        });
        coords.push(t);
        coords.push(y);
    }
    let prov = Provenance::new("hammersley").with("pattern", pattern).with("an", pattern.a_n());
    PointSet::badic(2, b, n, coords, prov)
}

/// Generating matrices of the Chen–Skriganov net: column k of C_i is a_i(z^k), where
/// entry (ν−1)w + λ of a_i(f) is the (λ−1)-th Hasse derivative of f at β_{i,ν} = (i−1)·2d + ν − 1.
pub fn chen_skriganov_matrices(d: usize, b: u64, w: usize) -> Result<GeneratingMatrices> {
    let field = PrimeField::new(b)?;
    if d == 0 || w == 0 {
        return Err(Error::InvalidParameter("need d ≥ 1 and w ≥ 1".into()));
    }
    if b < 2 * (d * d) as u64 {
        return Err(Error::InvalidParameter(format!("base {b} below 2d² = {}", 2 * d * d)));
    }
    let n = 2 * d * w;
    let derivs: Vec<Vec<FieldPoly>> = (0..n)
        .map(|k| {
            let mono = FieldPoly::monomial(field, k);
            (0..w).map(|lam| hasse_derivative(&mono, lam)).collect()
        })
        .collect();
    let mats = (0..d)
        .map(|i| {
            let mut m = vec![vec![0u64; n]; n];
            for (k, dk) in derivs.iter().enumerate() {
                for nu in 0..2 * d {
                    let beta = (i * 2 * d + nu) as u64;
                    for (lam, poly) in dk.iter().enumerate() {
                        m[nu * w + lam][k] = poly.eval_raw(beta);
                    }
                }
            }
            m
        })
        .collect();
    GeneratingMatrices::new(b, n, mats)
}

/// The Chen–Skriganov net with n = 2dw, listed by the polynomial index r (f = Σ r_k z^k).
pub fn chen_skriganov(d: usize, b: u64, w: usize) -> Result<DigitalNet> {
    let g = chen_skriganov_matrices(d, b, w)?;
    let mut net = DigitalNet::new(g)?;
    let prov = Provenance::new("cs")
        .with("w", w)
        .with("beta", "(i-1)*2d+(nu-1)");
    net.points.set_provenance(prov);
    Ok(net)
}

/// Keep the points of a (0,n,d)-net with first coordinate below N/b^n and stretch
/// that coordinate by b^n/N.
pub fn rescale_first_coordinate(p: &PointSet, n_points: u64) -> Result<PointSet> {
    let n = p.resolution().ok_or_else(|| Error::InvalidParameter("rescaling needs a b-adic set".into()))?;
    let total = pow_u64(p.base(), n).ok_or_else(|| Error::Budget("b^n overflows".into()))?;
    if p.len() as u64 != total {
        return Err(Error::Cardinality { expected: total as usize, got: p.len() });
    }
    if n_points == 0 || n_points > total {
        return Err(Error::InvalidParameter(format!("N = {n_points} outside [1, {total}]")));
    }
    let d = p.dim();
    let kept: Vec<u64> = p
        .points()
        .filter(|pt| pt[0] < n_points)
        .flat_map(|pt| pt.iter().copied())
        .collect();
    if kept.len() / d != n_points as usize {
        return Err(Error::Cardinality { expected: n_points as usize, got: kept.len() / d });
    }
    let mut denoms = vec![total; d];
    denoms[0] = n_points;
    let mut prov = p.provenance().clone();
    prov.params.insert("rescaled_N".into(), n_points.to_string());
    PointSet::rational(d, p.base(), denoms, kept, prov)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::digitalnet::{net_quality, digital_points};

    fn pts(p: &PointSet) -> Vec<Vec<u64>> {
        p.points().map(|x| x.to_vec()).collect()
    }

    #[test]
    fn equidistant_examples() {
        let p = equidistant(1).unwrap();
        assert_eq!((p.coords(), p.denoms()), (&[1u64][..], &[2u64][..]));
        let p = equidistant(4).unwrap();
        assert_eq!(p.coords(), &[1, 3, 5, 7]);
        assert_eq!(p.denoms(), &[8]);
        assert_eq!(equidistant(3).unwrap().denoms(), &[6]);
    }

    #[test]
    fn kronecker_examples() {
        let z = kronecker(0.0, 5);
        assert!(z.iter().all(|&x| x == 0.0));
        assert!((weyl_sum(&z, 1) - Complex64::new(1.0, 0.0)).norm() < 1e-15);
        let half = kronecker(0.5, 7);
        for n in 1..=7 {
            assert!((weyl_sum(&half[..n], 2) - Complex64::new(1.0, 0.0)).norm() < 1e-12);
        }
        let golden = (5f64.sqrt() - 1.0) / 2.0;
        let u = kronecker(golden, 1000);
        let bound = 2.0 / (1000.0 * (Complex64::from_polar(1.0, 2.0 * std::f64::consts::PI * golden) - 1.0).norm());
        assert!(weyl_sum(&u, 1).norm() <= bound);
    }

    #[test]
    fn lift_examples() {
        let p = lift_sequence_exact(&[0, 0], 1, 2).unwrap();
        assert_eq!(pts(&p), vec![vec![1, 0], vec![0, 0]]);
        assert_eq!(p.point_f64(0), vec![0.5, 0.0]);
        assert_eq!(lift_sequence(&[0.3], 1).unwrap().len(), 1);
        assert!(lift_sequence(&[0.3], 2).is_err());
    }

    #[test]
    fn halton_examples() {
        let p = halton(4, &[2]).unwrap();
        assert_eq!(p.point(0), &[0, 0]);
        assert_eq!(p.point_f64(1), vec![0.25, 0.5]);
        let q = halton(4, &[3]).unwrap();
        assert_eq!(q.point_f64(2), vec![0.5, 2.0 / 3.0]);
        assert!(halton(4, &[2, 2]).is_err());
        assert!(halton(4, &[4]).is_err());
    }

    #[test]
    fn vdc_examples() {
        let p = van_der_corput(8, 2).unwrap();
        assert_eq!(p.coords(), &[0, 4, 2, 6, 1, 5, 3, 7]);
        assert_eq!(p.resolution(), Some(3));
    }

    #[test]
    fn hammersley_examples() {
        let s = hammersley(2, 1, &"s".parse().unwrap()).unwrap();
        assert_eq!(pts(&s), vec![vec![0, 0], vec![1, 1]]);
        let c = hammersley(2, 1, &"c".parse().unwrap()).unwrap();
        assert_eq!(pts(&c), vec![vec![0, 1], vec![1, 0]]);
        let ss = hammersley(2, 2, &"ss".parse().unwrap()).unwrap();
        assert_eq!(pts(&ss), vec![vec![0, 0], vec![1, 2], vec![2, 1], vec![3, 3]]);
        let ssc = hammersley(2, 3, &"ssc".parse().unwrap()).unwrap();
        assert_eq!(ssc.len(), 8);
        assert_eq!(ssc.provenance().params["an"], "2");
        assert!("sx".parse::<HammersleyPattern>().is_err());
        assert_eq!(HammersleyPattern::canonical(4, 2).unwrap().to_string(), "sscc");
    }

    #[test]
    fn hammersley_sets_are_zero_nets() {
        for b in [2u64, 3] {
            for n in 1..=4u32 {
                for pat in HammersleyPattern::all(n as usize) {
                    let p = hammersley(b, n, &pat).unwrap();
                    assert_eq!(net_quality(&p).unwrap(), 0, "b={b} pattern={pat}");
                }
            }
        }
    }

    #[test]
    fn cs_examples() {
        let net = chen_skriganov(2, 11, 1).unwrap();
        let p = &net.points;
        assert_eq!(p.len(), 14641);
        assert_eq!(p.point(0), &[0, 0]);
        assert_eq!(p.point(1), &[1464, 1464]);
        assert!(chen_skriganov(2, 7, 1).is_err());
        assert!(chen_skriganov(2, 9, 1).is_err());
        assert_eq!(net.points, {
            let mut q = digital_points(&net.matrices).unwrap();
            q.set_provenance(net.points.provenance().clone());
            q
        });
    }

    #[test]
    fn rescale_examples() {
        let h = hammersley(2, 2, &HammersleyPattern::all_same(2)).unwrap();
        assert_eq!(rescale_first_coordinate(&h, 4).unwrap().coords(), h.coords());
        let r = rescale_first_coordinate(&h, 2).unwrap();
        assert_eq!(r.len(), 2);
        let f: Vec<Vec<f64>> = (0..2).map(|i| r.point_f64(i)).collect();
        assert_eq!(f, vec![vec![0.0, 0.0], vec![0.5, 0.5]]);
        let bad = PointSet::badic(2, 2, 2, vec![0, 0, 0, 0, 0, 0, 0, 0], Provenance::default()).unwrap();
        assert!(rescale_first_coordinate(&bad, 2).is_err());
    }
}
