mod common;

use mixnet::badic::nrt_weight;
use mixnet::digitalnet::{character_sum, in_dual_net};
use mixnet::generators::{hammersley, HammersleyPattern};
use mixnet::haar::{disc_spectrum, level_coefficients, parseval_check, parseval_sum, unit_root};
use mixnet::norms::{l2_disc_squared_f64, volume_tail_closed_form, BesovParams};
use mixnet::walsh::wal_eval_exact;
use mixnet::{PointSet, Provenance};
use num::complex::Complex64;
use num::rational::Ratio;

fn digits(mut t: u64, b: u64, n: usize) -> Vec<i128> {
    (0..n)
        .map(|_| {
            let d = (t % b) as i128;
            t /= b;
            d
        })
        .collect()
}

#[test]
fn parseval_single_point_at_origin() {
    let p = PointSet::badic(2, 2, 0, vec![0, 0], Provenance::default()).unwrap();
    let reference = l2_disc_squared_f64(&p).unwrap();
    assert!((reference - 11.0 / 18.0).abs() < 1e-15);
    let prm = BesovParams::new(2.0, 2.0, 0.0);
    let mut last = f64::MAX;
    for jmax in 0..=6 {
        let rep = parseval_check(&disc_spectrum(&p, jmax).unwrap(), reference);
        assert!(rep.gap >= -1e-12 && rep.gap < last);
        // every coefficient beyond the cap is a volume coefficient, so the gap is exactly the tail
        let tail = volume_tail_closed_form(2, 2, &prm, jmax as u32 + 1);
        assert!((rep.gap - tail).abs() < 1e-14, "J={jmax}: {} vs {tail}", rep.gap);
        last = rep.gap;
    }
    // at J = 6 the tail is 4^{-7}/18 − 4^{-14}/144, just above 3.4e-6
    assert!((last - (4f64.powi(-7) / 18.0 - 4f64.powi(-14) / 144.0)).abs() < 1e-15);
    assert!((parseval_sum(&p, 14) - 11.0 / 18.0).abs() < 1e-9);
}

#[test]
fn parseval_hammersley_r4() {
    let p = hammersley(2, 4, &HammersleyPattern::canonical(4, 2).unwrap()).unwrap();
    let spec = disc_spectrum(&p, 8).unwrap();
    let rep = parseval_check(&spec, l2_disc_squared_f64(&p).unwrap());
    assert!(rep.gap >= -1e-12 && rep.gap < 1e-6, "{rep:?}");
    assert!((spec.parseval_sum() - parseval_sum(&p, 8)).abs() < 1e-15);
}

#[test]
fn hammersley_case_ii_bound_and_exceptions() {
    for b in [2u64, 3] {
        let bf = b as f64;
        let gap = |l: u32| (unit_root(b, l as i64) - 1.0).norm();
        for n in 1..=5u32 {
            let ni = n as i32;
            for pat in common::hammersley_patterns(b, n) {
                let p = hammersley(b, n, &pat).unwrap();
                for j1 in 0..=ni {
                    for j2 in 0..=ni {
                        if j1 + j2 < ni - 1 {
                            continue;
                        }
                        let lc = level_coefficients(&p, &[j1, j2]);
                        let bound = 4.0 * bf.powi(-ni - j1 - j2);
                        let exact = |li: usize| {
                            let l = &lc.ls[li];
                            bf.powi(-2 * j1 - 2 * j2 - 2) / (gap(l[0]) * gap(l[1]))
                        };
                        let mut off = 0u64;
                        for (_, v) in &lc.occupied {
                            for (li, c) in v.iter().enumerate() {
                                assert!(c.norm() <= bound * (1.0 + 1e-12), "b={b} n={n} j=({j1},{j2})");
                                if (c.norm() - exact(li)).abs() > 1e-12 {
                                    off += 1;
                                }
                            }
                        }
                        for (li, c) in lc.empty.iter().enumerate() {
                            assert!(c.norm() <= bound * (1.0 + 1e-12));
                            assert!((c.norm() - exact(li)).abs() < 1e-12);
                        }
                        // only intervals holding a point may deviate: at most b^n of them
                        assert!(off <= b.pow(n) * (b - 1) * (b - 1));
                        assert!(lc.occupied.len() as u64 <= b.pow(n));
                    }
                }
            }
        }
    }
}

#[test]
fn root_of_unity_sums() {
    for b in 2..=23u64 {
        for l in 1..b {
            let w = unit_root(b, l as i64);
            let lhs: Complex64 = (1..b).map(|k| unit_root(b, (l * k) as i64) * k as f64).sum();
            let middle = Complex64::new(b as f64, 0.0) / (w - 1.0);
            let rhs: Complex64 = (0..b.saturating_sub(1))
                .flat_map(|k| (k + 1..b).map(move |r| unit_root(b, (r * l) as i64)))
                .sum();
            assert!((lhs - middle).norm() < 1e-12 && (rhs - middle).norm() < 1e-12, "b={b} l={l}");
        }
    }
}

#[test]
fn digit_sum_lemmas() {
    for b in [2u64, 3] {
        for n in 1..=4usize {
            let total = b.pow(n as u32);
            let bi = b as i128;
            let pw = |e: i32| if e >= 0 { Ratio::from_integer(bi.pow(e as u32)) } else { Ratio::new(1, bi.pow((-e) as u32)) };
            let mut x = Ratio::from_integer(0i128);
            let mut y = Ratio::from_integer(0i128);
            let mut zeta = Ratio::from_integer(0i128);
            for t in 0..total {
                let td = digits(t, b, n);
                for j in 1..=n {
                    x += pw(-(j as i32)) * td[j - 1];
                    y += pw(j as i32) * td[j - 1];
                    for i in 1..=n {
                        zeta += pw(i as i32 - j as i32) * td[i - 1] * td[j - 1];
                    }
                }
            }
            let bn = bi.pow(n as u32);
            assert_eq!(x, Ratio::new(bn - 1, 2));
            assert_eq!(y, pw(n as i32 + 1) * x);
            let nn = n as i128;
            let expected = Ratio::new(bi.pow(2 * n as u32 + 1), 4) + Ratio::new(nn * bi.pow(n as u32 + 2), 12)
                - Ratio::new(bi.pow(n as u32 + 1), 2)
                - Ratio::new(nn * bn, 12)
                + Ratio::new(bi, 4);
            assert_eq!(zeta, expected, "b={b} n={n}");
            // the mixed sum with s_j = t_j or b − 1 − t_j
            for pat in HammersleyPattern::all(n) {
                let mut mixed = Ratio::from_integer(0i128);
                for t in 0..total {
                    let td = digits(t, b, n);
                    let sd: Vec<i128> = (0..n).map(|k| if pat.is_same(k) { td[k] } else { bi - 1 - td[k] }).collect();
                    for i in 1..=n {
                        for j in 1..=n {
                            mixed += pw(i as i32 - j as i32) * td[i - 1] * sd[j - 1];
                        }
                    }
                }
                let a = pat.a_n() as i128;
                let want = Ratio::new(bi.pow(2 * n as u32 + 1), 4) - Ratio::new(bi.pow(n as u32 + 1), 2) + Ratio::new(bi, 4)
                    + Ratio::new((2 * a - nn) * (bi * bi - 1) * bn, 12);
                assert_eq!(mixed, want, "b={b} n={n} pattern={pat}");
            }
        }
    }
}

#[test]
fn walsh_gram_is_identity() {
    for b in [2u64, 3, 5] {
        let cells = b * b;
        let size = b * b;
        for a in 0..size {
            for c in 0..size {
                let s: Complex64 = (0..cells)
                    .map(|x| wal_eval_exact(a, 2 * x + 1, 2 * cells, b) * wal_eval_exact(c, 2 * x + 1, 2 * cells, b).conj())
                    .sum::<Complex64>()
                    / cells as f64;
                let want = if a == c { 1.0 } else { 0.0 };
                assert!((s - want).norm() < 1e-12, "b={b} {a} {c}");
            }
        }
    }
}

#[test]
fn character_sums_on_small_nets() {
    for net in common::random_nets(81, 5) {
        let g = &net.matrices;
        let bn = g.base().pow(g.n() as u32);
        let d = g.dim();
        let count = bn.pow(d as u32);
        for flat in 0..count {
            let t: Vec<u64> = (0..d).map(|i| flat / bn.pow(i as u32) % bn).collect();
            let s = character_sum(&net.points, &t);
            let want = if in_dual_net(g, &t) { bn as f64 } else { 0.0 };
            assert!((s.re - want).abs() < 1e-9 && s.im.abs() < 1e-9);
        }
    }
}

#[test]
fn generated_coordinates_lie_in_the_unit_cube() {
    for p in common::planar_corpus(4096).iter().chain(common::badic_corpus(4096).iter()) {
        for z in p.points() {
            assert!(z.iter().zip(p.denoms()).all(|(a, d)| a < d), "{}", common::label(p));
        }
    }
}

#[test]
fn nrt_weight_of_index_ranges() {
    for b in [2u64, 3, 5] {
        for t in 0..b.pow(4) {
            let r = nrt_weight(t, b);
            assert!(t < b.pow(r) && (r == 0 || t >= b.pow(r - 1)));
        }
    }
}
