//! Explicit constants of the L2 lower bound, the trigonometric identities behind them,
//! and comparison of measured norms against theoretical envelopes.

use std::f64::consts::PI;

use num::{BigInt, BigRational, One, ToPrimitive};
use serde::Serialize;

use crate::haar::unit_root;
use crate::norms::{Exponent, NormReport};
use crate::pointset::PointSet;

fn factorial(k: u64) -> BigInt {
    (1..=k).fold(BigInt::one(), |acc, i| acc * BigInt::from(i))
}

fn rat(n: i64, d: i64) -> BigRational {
    BigRational::new(BigInt::from(n), BigInt::from(d))
}

fn to_f64(r: &BigRational) -> f64 {
    r.to_f64().unwrap_or(f64::NAN)
}

/// B = ((b²−1)/(12b²))^d · b³/(d−1)!.
pub fn bracket_scale(b: u64, d: u32) -> BigRational {
    assert!(d >= 1 && b >= 2);
    let b = b as i64;
    let base = rat(b * b - 1, 12 * b * b);
    let mut out = BigRational::one();
    for _ in 0..d {
        out *= &base;
    }
    out * BigRational::from_integer(BigInt::from(b * b * b)) / BigRational::from_integer(factorial(d as u64 - 1))
}

/// γ_b = B/(b(b+1)(b³−1)), the minimum of the lower-bound bracket over y ∈ (1/b, 1].
pub fn gamma(b: u64, d: u32) -> BigRational {
    let bi = b as i64;
    bracket_scale(b, d) / BigRational::from_integer(BigInt::from(bi * (bi + 1) * (bi * bi * bi - 1)))
}

/// The maximum of the bracket over y, B(4/27)(b²+b+1)²/((b−1)(b+1)³b³).
pub fn gamma_bar(b: u64, d: u32) -> BigRational {
    let bi = b as i64;
    let s = bi * bi + bi + 1;
    bracket_scale(b, d) * rat(4, 27) * BigRational::from_integer(BigInt::from(s * s))
        / BigRational::from_integer(BigInt::from((bi - 1) * (bi + 1).pow(3) * bi.pow(3)))
}

/// B(y²/(b(b²−1)) − y³/(b³−1)).
pub fn bracket(b: u64, d: u32, y: f64) -> f64 {
    let bf = b as f64;
    to_f64(&bracket_scale(b, d)) * (y * y / (bf * (bf * bf - 1.0)) - y.powi(3) / (bf.powi(3) - 1.0))
}

/// The interior maximiser (2/3)(b²+b+1)/(b(b+1)) of the bracket.
pub fn bracket_argmax(b: u64) -> f64 {
    let bf = b as f64;
    2.0 / 3.0 * (bf * bf + bf + 1.0) / (bf * (bf + 1.0))
}

/// √(γ_b/(log b)^{d−1}).
pub fn c(b: u64, d: u32) -> f64 {
    (to_f64(&gamma(b, d)) / (b as f64).ln().powi(d as i32 - 1)).sqrt()
}

/// Constant c_d with N‖D_P‖₂ ≥ c_d (log N)^{(d−1)/2} for every N-point set in [0,1)^d.
pub fn roth_constant(d: u32) -> f64 {
    c(2, d)
}

/// √(γ̄_2/(log 2)^{d−1}).
pub fn limsup_constant(d: u32) -> f64 {
    (to_f64(&gamma_bar(2, d)) / 2f64.ln().powi(d as i32 - 1)).sqrt()
}

/// Upper constant for N‖D_P‖₂/√(log N) known for the best two-dimensional sets.
pub fn upper_constant_2d() -> f64 {
    (278629.0 / (2811072.0 * 22f64.ln())).sqrt()
}

/// Upper constant 22^d/(√((d−1)!) (log 2)^{(d−1)/2}) for shifted digital nets.
pub fn upper_constant(d: u32) -> f64 {
    let fact: f64 = (1..d).map(|k| k as f64).product();
    22f64.powi(d as i32) / (fact.sqrt() * 2f64.ln().powf((d as f64 - 1.0) / 2.0))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct IdentityRow {
    pub b: u64,
    /// Σ_{l=1}^{b−1} cot²(lπ/(2b)) − (2b−1)(b−1)/3.
    pub cot_even_err: f64,
    /// Σ_{l=1}^{b−1} cot²(lπ/(2b−1)) − (2b−3)(b−1)/3.
    pub cot_odd_err: f64,
    /// Σ_{l=1}^{b−1} |e^{2πil/b} − 1|^{−2} − (b²−1)/12.
    pub root_sum_err: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct IdentityReport {
    pub rows: Vec<IdentityRow>,
    pub max_abs_err: f64,
    pub tolerance: f64,
    pub passed: bool,
}

pub fn verify_identities(bmax: u64) -> IdentityReport {
    let tolerance = 1e-9;
    let cot2 = |t: f64| {
        let c = t.cos() / t.sin();
        c * c
    };
    let rows: Vec<IdentityRow> = (2..=bmax.max(2))
        .map(|b| {
            let bf = b as f64;
            let even: f64 = (1..b).map(|l| cot2(l as f64 * PI / (2.0 * bf))).sum();
            let odd: f64 = (1..b).map(|l| cot2(l as f64 * PI / (2.0 * bf - 1.0))).sum();
            let roots: f64 = (1..b).map(|l| (unit_root(b, l as i64) - 1.0).norm_sqr().recip()).sum();
            IdentityRow {
                b,
                cot_even_err: even - (2.0 * bf - 1.0) * (bf - 1.0) / 3.0,
                cot_odd_err: odd - (2.0 * bf - 3.0) * (bf - 1.0) / 3.0,
                root_sum_err: roots - (bf * bf - 1.0) / 12.0,
            }
        })
        .collect();
    let max_abs_err = rows
        .iter()
        .flat_map(|r| [r.cot_even_err, r.cot_odd_err, r.root_sum_err])
        .fold(0.0, |m, e| f64::max(m, e.abs()));
    IdentityReport { rows, max_abs_err, tolerance, passed: max_abs_err <= tolerance }
}

/// A log exponent that may only be known symbolically.
#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(untagged)]
pub enum LogExponent {
    Value(f64),
    Symbolic(String),
}

/// Best known exponents of log N in N·(L_p discrepancy): lower bound (log N)^α, upper (log N)^β.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ExponentRow {
    pub regime: String,
    pub lower: LogExponent,
    pub upper: LogExponent,
}

pub fn exponent_row(p: f64, d: u32) -> ExponentRow {
    let half = (d as f64 - 1.0) / 2.0;
    if p.is_infinite() {
        let lower = if d <= 2 {
            LogExponent::Value(d as f64 - 1.0)
        } else {
            LogExponent::Symbolic(format!("{half} + eta_{d}"))
        };
        ExponentRow { regime: "p=inf".into(), lower, upper: LogExponent::Value(d as f64 - 1.0) }
    } else if p > 1.0 {
        ExponentRow { regime: "1<p<inf".into(), lower: LogExponent::Value(half), upper: LogExponent::Value(half) }
    } else {
        ExponentRow { regime: "p=1".into(), lower: LogExponent::Value(0.5f64.min(half)), upper: LogExponent::Value(half) }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ConstantTable {
    pub schema: u32,
    pub b: u64,
    pub d: u32,
    pub gamma: String,
    pub gamma_value: f64,
    pub c: f64,
    pub roth_constant: f64,
    pub gamma_bar: String,
    pub limsup_constant: f64,
    pub upper_constant_2d: f64,
    pub upper_constant: f64,
    pub exponents: Vec<ExponentRow>,
}

impl ConstantTable {
    pub fn new(b: u64, d: u32) -> Self {
        let g = gamma(b, d);
        ConstantTable {
            schema: 1,
            b,
            d,
            gamma: g.to_string(),
            gamma_value: to_f64(&g),
            c: c(b, d),
            roth_constant: roth_constant(d),
            gamma_bar: gamma_bar(b, d).to_string(),
            limsup_constant: limsup_constant(d),
            upper_constant_2d: upper_constant_2d(),
            upper_constant: upper_constant(d),
            exponents: [f64::INFINITY, 2.0, 1.0].iter().map(|&p| exponent_row(p, d)).collect(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SetInfo {
    pub family: String,
    pub b: u64,
    pub n: Option<u32>,
    pub d: usize,
    #[serde(rename = "N")]
    pub count: usize,
}

/// A measured norm against a rate f(N); `constant` is set only where an explicit one is known.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Envelope {
    pub kind: String,
    pub side: String,
    pub rate: String,
    pub rate_value: f64,
    pub constant: Option<f64>,
    pub measured: f64,
    /// measured / rate_value.
    pub ratio: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Assertion {
    pub name: String,
    pub passed: bool,
    pub detail: String,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BoundReport {
    pub schema: u32,
    pub set: SetInfo,
    pub norms: Vec<NormReport>,
    pub envelopes: Vec<Envelope>,
    pub assertions: Vec<Assertion>,
    pub reference: ReferenceConstants,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ReferenceConstants {
    pub roth_constant: f64,
    pub limsup_constant: f64,
    pub upper_constant_2d: f64,
    pub upper_constant: f64,
}

impl BoundReport {
    pub fn passed(&self) -> bool {
        self.assertions.iter().all(|a| a.passed)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }
}

fn exponent_value(e: &Option<Exponent>) -> Option<f64> {
    e.as_ref().map(|x| x.0)
}

/// Compare each measurement with its envelope; only the explicit L2 lower bound is asserted.
pub fn bound_report(p: &PointSet, measurements: &[NormReport]) -> BoundReport {
    let d = p.dim() as u32;
    let count = p.len() as f64;
    let log_n = count.ln();
    let half = (d as f64 - 1.0) / 2.0;
    let mut envelopes = Vec::new();
    let mut assertions = Vec::new();
    for m in measurements {
        match m.kind.as_str() {
            "l2" => {
                let cd = roth_constant(d);
                let rate_value = log_n.powf(half) / count;
                envelopes.push(Envelope {
                    kind: m.kind.clone(),
                    side: "lower".into(),
                    rate: "(log N)^((d-1)/2)/N".into(),
                    rate_value,
                    constant: Some(cd),
                    measured: m.value,
                    ratio: m.value / rate_value,
                });
                if d >= 2 && p.len() >= 2 {
                    let lhs = count * m.value / log_n.powf(half);
                    assertions.push(Assertion {
                        name: "l2_lower_bound".into(),
                        passed: lhs >= cd,
                        detail: format!("N*L2/(log N)^((d-1)/2) = {lhs:.6} vs c_d = {cd:.6}"),
                    });
                }
            }
            "star" | "lp" => {
                let pw = exponent_value(&m.p).unwrap_or(f64::INFINITY);
                let row = exponent_row(if m.kind == "star" { f64::INFINITY } else { pw }, d);
                for (side, e) in [("lower", &row.lower), ("upper", &row.upper)] {
                    if let LogExponent::Value(a) = e {
                        let rate_value = log_n.powf(*a) / count;
                        envelopes.push(Envelope {
                            kind: m.kind.clone(),
                            side: side.into(),
                            rate: format!("(log N)^{a}/N"),
                            rate_value,
                            constant: None,
                            measured: m.value,
                            ratio: m.value / rate_value,
                        });
                    }
                }
            }
            "besov" => {
                let q = exponent_value(&m.q).unwrap_or(2.0);
                let r = m.r.unwrap_or(0.0);
                let log_exp = if q.is_infinite() { 0.0 } else { (d as f64 - 1.0) / q };
                let rate_value = count.powf(r - 1.0) * log_n.powf(log_exp);
                envelopes.push(Envelope {
                    kind: m.kind.clone(),
                    side: "lower-and-upper".into(),
                    rate: "N^(r-1) (log N)^((d-1)/q)".into(),
                    rate_value,
                    constant: None,
                    measured: m.value,
                    ratio: m.value / rate_value,
                });
            }
            _ => {}
        }
    }
    BoundReport {
        schema: 1,
        set: SetInfo {
            family: p.provenance().family.clone(),
            b: p.base(),
            n: p.resolution(),
            d: p.dim(),
            count: p.len(),
        },
        norms: measurements.to_vec(),
        envelopes,
        assertions,
        reference: ReferenceConstants {
            roth_constant: roth_constant(d),
            limsup_constant: limsup_constant(d),
            upper_constant_2d: upper_constant_2d(),
            upper_constant: upper_constant(d),
        },
    }
}

/// max/min of a series of envelope ratios, the stability measure of a fitted constant.
pub fn band_ratio(ratios: &[f64]) -> f64 {
    let max = ratios.iter().copied().fold(f64::MIN, f64::max);
    let min = ratios.iter().copied().fold(f64::MAX, f64::min);
    max / min
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::generators::{hammersley, HammersleyPattern};
    use crate::norms::l2_disc;

    /// Golden-section search for extrema of the bracket on [1/b, 1].
    fn golden(f: impl Fn(f64) -> f64, mut lo: f64, mut hi: f64) -> f64 {
        let g = (5f64.sqrt() - 1.0) / 2.0;
        for _ in 0..200 {
            let a = hi - g * (hi - lo);
            let b = lo + g * (hi - lo);
            if f(a) > f(b) {
                hi = b;
            } else {
                lo = a;
            }
        }
        (lo + hi) / 2.0
    }

    #[test]
    fn constant_examples() {
        assert!((roth_constant(2) - 0.032763).abs() < 5e-6);
        assert!((roth_constant(2) - 1.0 / (8.0 * 21f64.sqrt() * 2f64.ln().sqrt())).abs() < 1e-15);
        assert_eq!(gamma(2, 2), rat(1, 1344));
        assert!((limsup_constant(2) - 0.038925).abs() < 5e-6);
        assert!((limsup_constant(2) - 7.0 / (216.0 * 2f64.ln().sqrt())).abs() < 1e-15);
        assert!((upper_constant_2d() - 0.179070).abs() < 5e-6);
        assert_eq!(gamma_bar(2, 1), bracket_scale(2, 1) * rat(4, 27) * rat(49, 216));
    }

    #[test]
    fn roth_constant_closed_form() {
        for d in 1..=6u32 {
            let fact: f64 = (1..d).map(|k| k as f64).product();
            let expected = 1.0 / (21f64.sqrt() * 2f64.powi(2 * d as i32 - 1) * fact.sqrt() * 2f64.ln().powf((d as f64 - 1.0) / 2.0));
            assert!((roth_constant(d) - expected).abs() < 1e-14 * expected.max(1e-300));
        }
    }

    #[test]
    fn c_is_nonincreasing_in_b() {
        for d in 2..=5 {
            for b in 2..50 {
                assert!(c(b + 1, d) <= c(b, d), "b={b} d={d}");
            }
        }
    }

    #[test]
    fn gamma_is_the_bracket_minimum_and_gamma_bar_the_maximum() {
        for b in [2u64, 3, 5, 7, 11] {
            for d in 1..=4 {
                let f = |y: f64| bracket(b, d, y);
                let lo = 1.0 / b as f64;
                let g = to_f64(&gamma(b, d));
                assert!((f(lo) - g).abs() < 1e-12 * g.max(1e-300) + 1e-18);
                assert!((f(1.0) - g).abs() < 1e-12 * g.max(1e-300) + 1e-18);
                let y = golden(f, lo, 1.0);
                assert!((y - bracket_argmax(b)).abs() < 1e-6);
                let gb = to_f64(&gamma_bar(b, d));
                assert!((f(y) - gb).abs() < 1e-12 * gb);
                // sampled minimum over the interval
                let min = (0..=1000).map(|k| f(lo + (1.0 - lo) * k as f64 / 1000.0)).fold(f64::MAX, f64::min);
                assert!((min - g).abs() < 1e-12 * g.max(1e-300) + 1e-18);
            }
        }
    }

    #[test]
    fn identity_examples() {
        let r = verify_identities(3);
        assert!(r.passed);
        assert_eq!(r.rows.len(), 2);
        assert!(verify_identities(101).passed);
    }

    #[test]
    fn exponent_table() {
        let row = exponent_row(f64::INFINITY, 2);
        assert_eq!(row.lower, LogExponent::Value(1.0));
        assert_eq!(row.upper, LogExponent::Value(1.0));
        assert!(matches!(exponent_row(f64::INFINITY, 3).lower, LogExponent::Symbolic(_)));
        assert_eq!(exponent_row(3.0, 4).lower, LogExponent::Value(1.5));
        assert_eq!(exponent_row(1.0, 2).lower, LogExponent::Value(0.5));
    }

    #[test]
    fn hammersley_report() {
        let p = hammersley(2, 8, &HammersleyPattern::canonical(8, 4).unwrap()).unwrap();
        let m = NormReport::basic("l2", l2_disc(&p).unwrap(), &p);
        let rep = bound_report(&p, &[m]);
        assert!(rep.passed());
        let scaled = 256.0 * rep.norms[0].value / 256f64.ln().sqrt();
        assert!((0.032763..=0.33).contains(&scaled), "{scaled}");
        let v: serde_json::Value = serde_json::from_str(&rep.to_json()).unwrap();
        for k in ["set", "norms", "envelopes", "assertions"] {
            assert!(v.get(k).is_some());
        }
    }
}
