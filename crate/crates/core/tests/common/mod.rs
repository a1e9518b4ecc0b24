#![allow(dead_code)]

use mixnet::digitalnet::{digital_points, DigitalNet, GeneratingMatrices};
use mixnet::generators::{
    chen_skriganov, equidistant, halton, hammersley, kronecker, lift_sequence, rescale_first_coordinate,
    van_der_corput, HammersleyPattern,
};
use mixnet::PointSet;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Hammersley patterns exercised for (b, n): every pattern for b = 2, n ≤ 4; otherwise
/// a_n ∈ {0, ⌊n/2⌋, n} plus an alternating pattern.
pub fn hammersley_patterns(b: u64, n: u32) -> Vec<HammersleyPattern> {
    if b == 2 && n <= 4 {
        return HammersleyPattern::all(n as usize);
    }
    let n = n as usize;
    let mut out: Vec<HammersleyPattern> = [0, n / 2, n].iter().map(|&a| HammersleyPattern::canonical(n, a).unwrap()).collect();
    out.push(HammersleyPattern::new((0..n).map(|i| i % 2 == 0).collect()));
    out.dedup();
    out
}

/// Random n×n matrices over F_b for d coordinates.
pub fn random_matrices(rng: &mut ChaCha8Rng, b: u64, n: usize, d: usize) -> GeneratingMatrices {
    let mats = (0..d).map(|_| (0..n).map(|_| (0..n).map(|_| rng.gen_range(0..b)).collect()).collect()).collect();
    GeneratingMatrices::new(b, n, mats).unwrap()
}

/// Random digital nets (b, d, n) with b^n ≤ `max_points`.
pub fn random_nets(max_points: u64, seed: u64) -> Vec<DigitalNet> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = Vec::new();
    for (b, d, nmax) in [(2u64, 2usize, 10u32), (2, 3, 4), (3, 2, 6), (5, 2, 4)] {
        for n in 1..=nmax {
            if b.pow(n) > max_points {
                break;
            }
            for _ in 0..2 {
                let g = random_matrices(&mut rng, b, n as usize, d);
                out.push(DigitalNet::new(g).unwrap());
            }
        }
    }
    out
}

/// Every b-adic set of the generator families with b^n ≤ `max_points`.
pub fn badic_corpus(max_points: u64) -> Vec<PointSet> {
    let mut out = Vec::new();
    for b in [2u64, 3, 5, 7, 11, 13] {
        for n in 1..=12u32 {
            if b.pow(n) > max_points {
                break;
            }
            for pat in hammersley_patterns(b, n) {
                out.push(hammersley(b, n, &pat).unwrap());
            }
        }
    }
    for b in [2u64, 3] {
        for k in 1..=12u32 {
            if b.pow(k) > max_points {
                break;
            }
            out.push(van_der_corput(b.pow(k), b).unwrap());
        }
    }
    for k in 0..=12u32 {
        if 2u64.pow(k + 1) > max_points {
            break;
        }
        out.push(equidistant(2u64.pow(k)).unwrap());
    }
    for k in 1..=12u32 {
        if 2u64.pow(k) > max_points {
            break;
        }
        out.push(halton(2u64.pow(k), &[2]).unwrap());
    }
    out.extend(random_nets(max_points, 17).into_iter().map(|net| net.points));
    out
}

/// Two-dimensional sets of every family with 4 ≤ N ≤ `max_points`, b-adic or not.
pub fn planar_corpus(max_points: u64) -> Vec<PointSet> {
    let mut out: Vec<PointSet> = badic_corpus(max_points).into_iter().filter(|p| p.dim() == 2 && p.len() >= 4).collect();
    let cs = chen_skriganov(2, 11, 1).unwrap();
    for n_pts in [4u64, 10, 121, 1000, 4096] {
        out.push(rescale_first_coordinate(&cs.points, n_pts).unwrap());
    }
    let h = hammersley(2, 12, &HammersleyPattern::canonical(12, 6).unwrap()).unwrap();
    for n_pts in [5u64, 77, 1500, 3001] {
        out.push(rescale_first_coordinate(&h, n_pts).unwrap());
    }
    let golden = (5f64.sqrt() - 1.0) / 2.0;
    for theta in [golden, 2f64.sqrt() - 1.0] {
        for n_pts in [4usize, 13, 100, 987, 4096] {
            out.push(lift_sequence(&kronecker(theta, n_pts), n_pts).unwrap());
        }
    }
    for n_pts in [10u64, 100, 1000, 4000] {
        out.push(halton(n_pts, &[2]).unwrap());
        out.push(halton(n_pts, &[3]).unwrap());
    }
    out
}

/// Digital nets with b^n ≤ `max_points`: all-same Hammersley sets and random nets.
pub fn digital_corpus(max_points: u64) -> Vec<DigitalNet> {
    let mut out = Vec::new();
    for b in [2u64, 3, 5, 7, 11] {
        for n in 1..=13u32 {
            if b.pow(n) > max_points {
                break;
            }
            let h = hammersley(b, n, &HammersleyPattern::all_same(n as usize)).unwrap();
            out.push(DigitalNet::from_points(h).expect("all-same Hammersley sets are digital"));
        }
    }
    out.extend(random_nets(max_points.min(1024), 29));
    out
}

pub fn label(p: &PointSet) -> String {
    let prov = p.provenance();
    let mut parts = vec![format!("b={}", p.base()), format!("d={}", p.dim()), format!("N={}", p.len())];
    parts.extend(prov.params.iter().filter(|(k, _)| k.as_str() != "N").map(|(k, v)| format!("{k}={v}")));
    format!("{}[{}]", prov.family, parts.join(" "))
}

pub fn points_of(g: &GeneratingMatrices) -> PointSet {
    digital_points(g).unwrap()
}
