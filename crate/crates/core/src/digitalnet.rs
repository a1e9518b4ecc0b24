//! Digital nets over F_b: the digital method, net quality, dual nets and the
//! NRT/Hamming minimum distance of linear subspaces of F_b^{dn}.

use num::complex::Complex64;
use rayon::prelude::*;

use crate::badic::{digits_of, kappa_weight, pow_u64, vn_weight, DigitVector};
use crate::error::{Error, Result};
use crate::gfpoly::is_prime;
use crate::linalg;
use crate::pointset::{PointSet, Provenance};
use crate::walsh;

/// Largest point count generated without an explicit override.
pub const DEFAULT_POINT_BUDGET: u64 = 200_000;
/// Largest subspace or dual net enumerated.
pub const ENUMERATION_BUDGET: u64 = 1_000_000;

/// d generating matrices C_1, …, C_d of size n×n over F_b, stored row-major.
/// Row k of C_i produces digit k+1 (after the point) of coordinate i.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GeneratingMatrices {
    b: u64,
    n: usize,
    mats: Vec<Vec<Vec<u64>>>,
}

impl GeneratingMatrices {
    pub fn new(b: u64, n: usize, mats: Vec<Vec<Vec<u64>>>) -> Result<Self> {
        if !is_prime(b) {
            return Err(Error::NotPrime(b));
        }
        if mats.is_empty() {
            return Err(Error::InvalidParameter("need at least one matrix".into()));
        }
        for m in &mats {
            if m.len() != n || m.iter().any(|row| row.len() != n) {
                return Err(Error::InvalidParameter(format!("matrices must be {n}x{n}")));
            }
            if let Some(&bad) = m.iter().flatten().find(|&&x| x >= b) {
                return Err(Error::OutOfRange { value: bad, bound: b });
            }
        }
        Ok(GeneratingMatrices { b, n, mats })
    }

    pub fn identity(n: usize) -> Vec<Vec<u64>> {
        (0..n).map(|i| (0..n).map(|k| u64::from(i == k)).collect()).collect()
    }

    pub fn anti_identity(n: usize) -> Vec<Vec<u64>> {
        (0..n).map(|i| (0..n).map(|k| u64::from(i + k == n - 1)).collect()).collect()
    }

    pub fn base(&self) -> u64 {
        self.b
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn dim(&self) -> usize {
        self.mats.len()
    }

    pub fn matrix(&self, i: usize) -> &[Vec<u64>] {
        &self.mats[i]
    }

    /// Digits (a_1, …, a_n) of coordinate i of point r, i.e. C_i · r̄.
    pub fn point_digits(&self, r: u64) -> Vec<Vec<u64>> {
        let rd: Vec<u64> = digits_of(r, self.b, self.n)
            .expect("index within b^n")
            .digits
            .iter()
            .map(|&x| x as u64)
            .collect();
        self.mats.iter().map(|c| linalg::mat_vec(c, &rd, self.b)).collect()
    }

    fn numerators(&self, r: u64) -> Vec<u64> {
        self.point_digits(r)
            .iter()
            .map(|a| a.iter().fold(0u64, |acc, &x| acc * self.b + x))
            .collect()
    }

    /// The column space of the stacked matrix as a subspace of F_b^{dn}.
    pub fn subspace(&self) -> LinearSubspace {
        let d = self.dim();
        let vectors: Vec<Vec<u64>> = (0..self.n)
            .map(|k| (0..d).flat_map(|i| (0..self.n).map(move |row| (i, row))).map(|(i, row)| self.mats[i][row][k]).collect())
            .collect();
        LinearSubspace::from_vectors(self.b, self.n, d, &vectors)
    }

    /// Recover the matrices of a digital net listed in index order r = 0, …, b^n − 1.
    /// Returns `None` when the listing is not linear in the index digits.
    pub fn recover(p: &PointSet) -> Option<Self> {
        let n = p.resolution()? as usize;
        let b = p.base();
        if !is_prime(b) || p.len() as u64 != pow_u64(b, n as u32)? || p.weights().is_some() {
            return None;
        }
        let d = p.dim();
        let digits_at = |r: usize| -> Vec<Vec<u64>> {
            p.point(r)
                .iter()
                .map(|&num| {
                    let mut v: Vec<u64> = digits_of(num, b, n).ok()?.digits.iter().map(|&x| x as u64).collect();
                    v.reverse();
                    Some(v)
                })
                .collect::<Option<Vec<_>>>()
                .unwrap_or_default()
        };
        // column k of C_i is the digit vector of point b^k
        let cols: Vec<Vec<Vec<u64>>> = (0..n).map(|k| digits_at(b.pow(k as u32) as usize)).collect();
        let mats: Vec<Vec<Vec<u64>>> = (0..d)
            .map(|i| (0..n).map(|row| (0..n).map(|k| cols[k][i][row]).collect()).collect())
            .collect();
        let g = GeneratingMatrices::new(b, n, mats).ok()?;
        let linear = (0..p.len()).into_par_iter().all(|r| g.numerators(r as u64) == p.point(r));
        linear.then_some(g)
    }
}

/// Points of the digital net, in index order r = 0, …, b^n − 1.
pub fn digital_points(g: &GeneratingMatrices) -> Result<PointSet> {
    digital_points_with_budget(g, DEFAULT_POINT_BUDGET)
}

pub fn digital_points_with_budget(g: &GeneratingMatrices, budget: u64) -> Result<PointSet> {
    let total = pow_u64(g.b, g.n as u32).filter(|&t| t <= budget).ok_or_else(|| {
        Error::Budget(format!("{}^{} points exceed the budget of {budget}", g.b, g.n))
    })?;
    let coords: Vec<u64> = (0..total).into_par_iter().flat_map_iter(|r| g.numerators(r)).collect();
    PointSet::badic(g.dim(), g.b, g.n as u32, coords, Provenance::new("digital"))
}

/// All compositions of `k` into `d` nonnegative parts, each at most `cap`.
pub fn compositions(k: usize, d: usize, cap: usize) -> Vec<Vec<usize>> {
    fn rec(k: usize, d: usize, cap: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if d == 1 {
            if k <= cap {
                cur.push(k);
                out.push(cur.clone());
                cur.pop();
            }
            return;
        }
        for first in 0..=k.min(cap) {
            cur.push(first);
            rec(k - first, d - 1, cap, cur, out);
            cur.pop();
        }
    }
    let mut out = Vec::new();
    if d > 0 {
        rec(k, d, cap, &mut Vec::new(), &mut out);
    }
    out
}

/// Whether every b-adic box with levels `j` holds exactly #P / b^{|j|} points.
pub fn is_fair(p: &PointSet, j: &[usize]) -> bool {
    let n = p.resolution().expect("b-adic set") as usize;
    let b = p.base();
    let k: usize = j.iter().sum();
    let cells = b.pow(k as u32) as usize;
    if !p.len().is_multiple_of(cells) {
        return false;
    }
    let want = (p.len() / cells) as u32;
    let shifts: Vec<u64> = j.iter().map(|&ji| b.pow((n - ji) as u32)).collect();
    let mut counts = vec![0u32; cells];
    for pt in p.points() {
        let mut idx = 0usize;
        for ((&x, &s), &ji) in pt.iter().zip(&shifts).zip(j) {
            idx = idx * b.pow(ji as u32) as usize + (x / s) as usize;
        }
        counts[idx] += 1;
        if counts[idx] > want {
            return false;
        }
    }
    true
}

/// Strict quality parameter v: the smallest v such that all boxes of order n − v are fair.
pub fn net_quality(p: &PointSet) -> Result<u32> {
    let n = p.resolution().ok_or_else(|| Error::InvalidParameter("net quality needs a b-adic set".into()))?;
    let expected = pow_u64(p.base(), n).ok_or_else(|| Error::Budget("b^n overflows".into()))? as usize;
    if p.len() != expected {
        return Err(Error::Cardinality { expected, got: p.len() });
    }
    let d = p.dim();
    // fairness at order k implies fairness at every lower order, so scan downwards
    for k in (0..=n as usize).rev() {
        let comps = compositions(k, d, n as usize);
        if comps.par_iter().all(|j| is_fair(p, j)) {
            return Ok(n - k as u32);
        }
    }
    Ok(n)
}

/// Linear independence parameter ρ(C_1, …, C_d).
pub fn lin_indep_param(g: &GeneratingMatrices) -> u32 {
    let d = g.dim();
    let mut rho = 0;
    for k in 1..=g.n {
        let ok = compositions(k, d, g.n).par_iter().all(|gam| {
            let rows: Vec<Vec<u64>> = gam
                .iter()
                .enumerate()
                .flat_map(|(i, &gi)| g.mats[i][..gi].iter().cloned())
                .collect();
            linalg::rank(&rows, g.b) == rows.len()
        });
        if !ok {
            break;
        }
        rho = k as u32;
    }
    rho
}

/// Rows of the map t̄ ↦ Σ C_iᵀ t̄_i, acting on the concatenated digit vector of t.
fn dual_map(g: &GeneratingMatrices) -> Vec<Vec<u64>> {
    let n = g.n;
    (0..n)
        .map(|col| (0..g.dim()).flat_map(|i| (0..n).map(move |row| (i, row))).map(|(i, row)| g.mats[i][row][col]).collect())
        .collect()
}

/// Basis (as concatenated least-significant-first digit vectors) of the dual net.
pub fn dual_net_basis(g: &GeneratingMatrices) -> Vec<Vec<u64>> {
    linalg::kernel(&dual_map(g), g.dim() * g.n, g.b)
}

fn tuple_of(v: &[u64], b: u64, n: usize) -> Vec<u64> {
    v.chunks(n).map(|blk| blk.iter().rev().fold(0u64, |acc, &x| acc * b + x)).collect()
}

/// The dual net D(C_1, …, C_d) as tuples t ∈ {0, …, b^n − 1}^d, including 0.
pub fn dual_net(g: &GeneratingMatrices) -> Result<Vec<Vec<u64>>> {
    let basis = dual_net_basis(g);
    let size = pow_u64(g.b, basis.len() as u32).filter(|&s| s <= ENUMERATION_BUDGET);
    if size.is_none() {
        return Err(Error::Budget(format!("dual net of dimension {} too large", basis.len())));
    }
    let mut out = Vec::new();
    linalg::for_each_combination(&basis, g.dim() * g.n, g.b, |v| out.push(tuple_of(v, g.b, g.n)));
    out.sort();
    Ok(out)
}

/// Whether t lies in the dual net.
pub fn in_dual_net(g: &GeneratingMatrices, t: &[u64]) -> bool {
    let v: Vec<u64> = t
        .iter()
        .flat_map(|&ti| digits_of(ti, g.b, g.n).map(|dv| dv.digits).unwrap_or_else(|_| vec![u32::MAX; g.n]))
        .map(|x| x as u64)
        .collect();
    if v.iter().any(|&x| x >= g.b) {
        return false;
    }
    linalg::mat_vec(&dual_map(g), &v, g.b).iter().all(|&x| x == 0)
}

/// Σ_h wal_t(x_h) over the points of `p`.
pub fn character_sum(p: &PointSet, t: &[u64]) -> Complex64 {
    (0..p.len())
        .map(|h| walsh::wal_eval_point(t, p.point(h), p.denoms(), p.base()))
        .sum()
}

/// A linear subspace of F_b^{dn}, vectors split into d blocks (a_{i,1}, …, a_{i,n}).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LinearSubspace {
    b: u64,
    n: usize,
    d: usize,
    basis: Vec<Vec<u64>>,
}

impl LinearSubspace {
    pub fn from_vectors(b: u64, n: usize, d: usize, vectors: &[Vec<u64>]) -> Self {
        let vectors: Vec<Vec<u64>> = vectors.iter().filter(|v| v.len() == d * n).cloned().collect();
        let basis = if vectors.is_empty() { Vec::new() } else { linalg::rref(&vectors, b).0 };
        LinearSubspace { b, n, d, basis }
    }

    pub fn zero(b: u64, n: usize, d: usize) -> Self {
        LinearSubspace { b, n, d, basis: Vec::new() }
    }

    pub fn full(b: u64, n: usize, d: usize) -> Self {
        let e: Vec<Vec<u64>> = (0..d * n).map(|i| (0..d * n).map(|k| u64::from(i == k)).collect()).collect();
        LinearSubspace { b, n, d, basis: e }
    }

    pub fn base(&self) -> u64 {
        self.b
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn d(&self) -> usize {
        self.d
    }

    pub fn basis(&self) -> &[Vec<u64>] {
        &self.basis
    }

    pub fn dimension(&self) -> usize {
        self.basis.len()
    }

    pub fn contains(&self, v: &[u64]) -> bool {
        let mut rows = self.basis.clone();
        rows.push(v.to_vec());
        linalg::rank(&rows, self.b) == self.basis.len()
    }

    /// Orthogonal complement under the standard inner product.
    pub fn dual_space(&self) -> LinearSubspace {
        let len = self.d * self.n;
        let k = linalg::kernel(&self.basis, len, self.b);
        LinearSubspace::from_vectors(self.b, self.n, self.d, &k)
    }

    /// Generating matrices whose column space is this subspace (needs dimension n).
    pub fn to_matrices(&self) -> Result<GeneratingMatrices> {
        if self.dimension() != self.n {
            return Err(Error::InvalidParameter(format!(
                "subspace has dimension {}, expected {}",
                self.dimension(),
                self.n
            )));
        }
        let mats = (0..self.d)
            .map(|i| (0..self.n).map(|row| (0..self.n).map(|k| self.basis[k][i * self.n + row]).collect()).collect())
            .collect();
        GeneratingMatrices::new(self.b, self.n, mats)
    }

    /// Φ_n^d of every element, as a b-adic point set of b^{dim} points.
    pub fn points(&self) -> Result<PointSet> {
        self.enumeration_size()?;
        let mut coords = Vec::new();
        linalg::for_each_combination(&self.basis, self.d * self.n, self.b, |v| {
            for blk in v.chunks(self.n) {
                coords.push(blk.iter().fold(0u64, |acc, &x| acc * self.b + x));
            }
        });
        PointSet::badic(self.d, self.b, self.n as u32, coords, Provenance::new("subspace"))
    }

    fn enumeration_size(&self) -> Result<u64> {
        pow_u64(self.b, self.dimension() as u32)
            .filter(|&s| s <= ENUMERATION_BUDGET)
            .ok_or_else(|| Error::Budget(format!("{}^{} elements exceed the enumeration budget", self.b, self.dimension())))
    }

    /// (δ_n, κ_n): minimum NRT weight and minimum Hamming weight over nonzero elements.
    /// The zero space has δ_n = κ_n = dn + 1.
    pub fn min_distance(&self) -> Result<(u32, u32)> {
        self.enumeration_size()?;
        let none = (self.d * self.n) as u32 + 1;
        let (mut delta, mut kappa) = (none, none);
        let n = self.n;
        linalg::for_each_combination(&self.basis, self.d * n, self.b, |v| {
            if v.iter().all(|&x| x == 0) {
                return;
            }
            let (mut dv, mut kv) = (0, 0);
            for blk in v.chunks(n) {
                let digits: Vec<u32> = blk.iter().map(|&x| x as u32).collect();
                dv += vn_weight(&digits);
                kv += kappa_weight(&digits);
            }
            delta = delta.min(dv);
            kappa = kappa.min(kv);
        });
        Ok((delta, kappa))
    }

    /// Split a vector into its d digit blocks.
    pub fn blocks(&self, v: &[u64]) -> Vec<DigitVector> {
        v.chunks(self.n)
            .map(|blk| DigitVector { digits: blk.iter().map(|&x| x as u32).collect(), base: self.b })
            .collect()
    }
}

/// Both sides of the duality theorem for a subspace of dimension n.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DualityReport {
    pub v_geometric: u32,
    pub v_dual: u32,
    pub delta_dual: u32,
    pub agree: bool,
}

pub fn duality_theorem_check(v: &LinearSubspace) -> Result<DualityReport> {
    if v.dimension() != v.n {
        return Err(Error::InvalidParameter(format!(
            "duality check needs dimension n = {}, got {}",
            v.n,
            v.dimension()
        )));
    }
    let v_geometric = net_quality(&v.points()?)?;
    let (delta_dual, _) = v.dual_space().min_distance()?;
    let v_dual = (v.n as i64 + 1 - delta_dual as i64).max(0) as u32;
    Ok(DualityReport { v_geometric, v_dual, delta_dual, agree: v_geometric == v_dual })
}

/// A digital net together with its generating matrices.
#[derive(Debug, Clone)]
pub struct DigitalNet {
    pub matrices: GeneratingMatrices,
    pub points: PointSet,
}

impl DigitalNet {
    pub fn new(matrices: GeneratingMatrices) -> Result<Self> {
        let points = digital_points(&matrices)?;
        Ok(DigitalNet { matrices, points })
    }

    pub fn from_points(points: PointSet) -> Option<Self> {
        GeneratingMatrices::recover(&points).map(|matrices| DigitalNet { matrices, points })
    }
}
