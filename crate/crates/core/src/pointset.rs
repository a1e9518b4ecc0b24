//! Finite point sets in [0,1)^d with exact rational coordinates and optional weights.

use std::collections::BTreeMap;
use std::io::{BufRead, Write};

use num::rational::Ratio;
use num::{Integer, ToPrimitive};

use crate::badic::pow_u64;
use crate::error::{Error, Result};

/// Where a point set came from: a family tag plus free-form parameters.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Provenance {
    pub family: String,
    pub params: BTreeMap<String, String>,
}

impl Provenance {
    pub fn new(family: &str) -> Self {
        Provenance { family: family.to_string(), params: BTreeMap::new() }
    }

    pub fn with(mut self, key: &str, value: impl ToString) -> Self {
        self.params.insert(key.to_string(), value.to_string());
        self
    }
}

/// Points stored as integer numerators, one denominator per coordinate.
///
/// When every denominator equals b^n the set is *b-adic* with resolution n, which
/// is what the Haar, Walsh and net routines require.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PointSet {
    d: usize,
    base: u64,
    resolution: Option<u32>,
    denoms: Vec<u64>,
    coords: Vec<u64>,
    weights: Option<Vec<Ratio<i64>>>,
    provenance: Provenance,
}

fn exact_log(den: u64, b: u64) -> Option<u32> {
    let mut k = 0;
    let mut p = 1u64;
    while p < den {
        p = p.checked_mul(b)?;
        k += 1;
    }
    (p == den).then_some(k)
}

impl PointSet {
    /// A b-adic set: `coords` are row-major numerators over b^n.
    pub fn badic(d: usize, b: u64, n: u32, coords: Vec<u64>, provenance: Provenance) -> Result<Self> {
        let den = pow_u64(b, n).ok_or_else(|| Error::Budget(format!("{b}^{n} overflows")))?;
        Self::check_shape(d, &coords)?;
        if let Some(&bad) = coords.iter().find(|&&c| c >= den) {
            return Err(Error::OutOfRange { value: bad, bound: den });
        }
        Ok(PointSet {
            d,
            base: b,
            resolution: Some(n),
            denoms: vec![den; d],
            coords,
            weights: None,
            provenance,
        })
    }

    /// A set with arbitrary denominators per coordinate. If every denominator is a
    /// power of `base` the set is promoted to b-adic form.
    pub fn rational(
        d: usize,
        base: u64,
        denoms: Vec<u64>,
        coords: Vec<u64>,
        provenance: Provenance,
    ) -> Result<Self> {
        Self::check_shape(d, &coords)?;
        if denoms.len() != d || denoms.contains(&0) {
            return Err(Error::InvalidParameter("need one positive denominator per coordinate".into()));
        }
        for row in coords.chunks(d) {
            for (c, &den) in row.iter().zip(&denoms) {
                if *c >= den {
                    return Err(Error::OutOfRange { value: *c, bound: den });
                }
            }
        }
        let logs: Option<Vec<u32>> = denoms.iter().map(|&x| exact_log(x, base)).collect();
        if let Some(logs) = logs {
            let n = *logs.iter().max().unwrap_or(&0);
            let mut coords = coords;
            for row in coords.chunks_mut(d) {
                for (c, &k) in row.iter_mut().zip(&logs) {
                    *c *= base.pow(n - k);
                }
            }
            return Self::badic(d, base, n, coords, provenance);
        }
        Ok(PointSet { d, base, resolution: None, denoms, coords, weights: None, provenance })
    }

    fn check_shape(d: usize, coords: &[u64]) -> Result<()> {
        if d == 0 {
            return Err(Error::InvalidParameter("dimension must be positive".into()));
        }
        if !coords.len().is_multiple_of(d) {
            return Err(Error::InvalidParameter("coordinate count not a multiple of d".into()));
        }
        Ok(())
    }

    pub fn with_weights(mut self, weights: Vec<Ratio<i64>>) -> Result<Self> {
        if weights.len() != self.len() {
            return Err(Error::Cardinality { expected: self.len(), got: weights.len() });
        }
        self.weights = Some(weights);
        Ok(self)
    }

    pub fn without_weights(mut self) -> Self {
        self.weights = None;
        self
    }

    pub fn dim(&self) -> usize {
        self.d
    }

    pub fn base(&self) -> u64 {
        self.base
    }

    /// n when all coordinates have denominator b^n.
    pub fn resolution(&self) -> Option<u32> {
        self.resolution
    }

    pub fn is_badic(&self) -> bool {
        self.resolution.is_some()
    }

    pub fn denoms(&self) -> &[u64] {
        &self.denoms
    }

    pub fn len(&self) -> usize {
        self.coords.len() / self.d
    }

    pub fn is_empty(&self) -> bool {
        self.coords.is_empty()
    }

    pub fn coords(&self) -> &[u64] {
        &self.coords
    }

    /// Numerators of point `i`.
    pub fn point(&self, i: usize) -> &[u64] {
        &self.coords[i * self.d..(i + 1) * self.d]
    }

    pub fn points(&self) -> impl Iterator<Item = &[u64]> {
        self.coords.chunks(self.d)
    }

    pub fn coord_f64(&self, i: usize, c: usize) -> f64 {
        self.coords[i * self.d + c] as f64 / self.denoms[c] as f64
    }

    pub fn point_f64(&self, i: usize) -> Vec<f64> {
        (0..self.d).map(|c| self.coord_f64(i, c)).collect()
    }

    pub fn weights(&self) -> Option<&[Ratio<i64>]> {
        self.weights.as_deref()
    }

    /// Weight a_z of point `i` (1/N when unweighted).
    pub fn weight(&self, i: usize) -> Ratio<i64> {
        match &self.weights {
            Some(w) => w[i],
            None => Ratio::new(1, self.len() as i64),
        }
    }

    pub fn weight_f64(&self, i: usize) -> f64 {
        match &self.weights {
            Some(w) => w[i].to_f64().unwrap_or(f64::NAN),
            None => 1.0 / self.len() as f64,
        }
    }

    pub fn provenance(&self) -> &Provenance {
        &self.provenance
    }

    pub fn set_provenance(&mut self, p: Provenance) {
        self.provenance = p;
    }

    /// Integer weights over a common positive denominator: (numerators, denominator).
    pub(crate) fn integer_weights(&self) -> Option<(Vec<i128>, i128)> {
        match &self.weights {
            None => Some((vec![1; self.len()], self.len() as i128)),
            Some(w) => {
                let mut l: i128 = 1;
                for r in w {
                    l = l.lcm(&(*r.denom() as i128));
                    if l > 1 << 62 {
                        return None;
                    }
                }
                Some((w.iter().map(|r| *r.numer() as i128 * (l / *r.denom() as i128)).collect(), l))
            }
        }
    }

    /// Write the point CSV: a `#` header line followed by one row of numerators per point.
    pub fn write_csv<W: Write>(&self, mut w: W) -> Result<()> {
        let mut header = format!("# base={} n={} d={} family={}", self.base, self.resolution.map_or(0, |n| n), self.d, self.provenance.family);
        if self.resolution.is_none() {
            let dens: Vec<String> = self.denoms.iter().map(|x| x.to_string()).collect();
            header.push_str(&format!(" denom={}", dens.join(",")));
        }
        if self.weights.is_some() {
            header.push_str(" weights=1");
        }
        for (k, v) in &self.provenance.params {
            if !matches!(k.as_str(), "base" | "n" | "d" | "family" | "denom" | "weights") {
                header.push_str(&format!(" {k}={v}"));
            }
        }
        writeln!(w, "{header}")?;
        let mut out = csv::WriterBuilder::new().has_headers(false).from_writer(w);
        for i in 0..self.len() {
            let mut row: Vec<String> = self.point(i).iter().map(|x| x.to_string()).collect();
            if let Some(ws) = &self.weights {
                row.push(format!("{}/{}", ws[i].numer(), ws[i].denom()));
            }
            out.write_record(&row)?;
        }
        out.flush()?;
        Ok(())
    }

    pub fn read_csv<R: BufRead>(mut r: R) -> Result<Self> {
        let mut first = String::new();
        r.read_line(&mut first)?;
        let header = first
            .trim()
            .strip_prefix('#')
            .ok_or_else(|| Error::Parse("missing '#' header line".into()))?;
        let mut kv = BTreeMap::new();
        for tok in header.split_whitespace() {
            let (k, v) = tok
                .split_once('=')
                .ok_or_else(|| Error::Parse(format!("bad header token '{tok}'")))?;
            kv.insert(k.to_string(), v.to_string());
        }
        let get = |k: &str| -> Result<u64> {
            kv.get(k)
                .ok_or_else(|| Error::Parse(format!("header lacks '{k}'")))?
                .parse::<u64>()
                .map_err(|e| Error::Parse(format!("{k}: {e}")))
        };
        let base = get("base")?;
        let n = get("n")? as u32;
        let d = get("d")? as usize;
        let weighted = kv.get("weights").is_some_and(|v| v == "1");
        let mut prov = Provenance::new(kv.get("family").map_or("unknown", |s| s.as_str()));
        for (k, v) in &kv {
            if !matches!(k.as_str(), "base" | "n" | "d" | "family" | "denom" | "weights") {
                prov.params.insert(k.clone(), v.clone());
            }
        }
        let mut coords = Vec::new();
        let mut weights = Vec::new();
        let mut rd = csv::ReaderBuilder::new()
            .has_headers(false)
            .comment(Some(b'#'))
            .trim(csv::Trim::All)
            .from_reader(r);
        for rec in rd.records() {
            let rec = rec?;
            let want = d + usize::from(weighted);
            if rec.len() != want {
                return Err(Error::Parse(format!("row with {} fields, expected {want}", rec.len())));
            }
            for f in rec.iter().take(d) {
                coords.push(f.parse::<u64>().map_err(|e| Error::Parse(format!("'{f}': {e}")))?);
            }
            if weighted {
                weights.push(parse_ratio(&rec[d])?);
            }
        }
        let set = match kv.get("denom") {
            Some(dens) => {
                let denoms = dens
                    .split(',')
                    .map(|s| s.parse::<u64>().map_err(|e| Error::Parse(format!("denom: {e}"))))
                    .collect::<Result<Vec<_>>>()?;
                PointSet::rational(d, base, denoms, coords, prov)?
            }
            None => PointSet::badic(d, base, n, coords, prov)?,
        };
        if weighted {
            set.with_weights(weights)
        } else {
            Ok(set)
        }
    }
}

fn parse_ratio(s: &str) -> Result<Ratio<i64>> {
    let bad = |e: std::num::ParseIntError| Error::Parse(format!("weight '{s}': {e}"));
    match s.split_once('/') {
        Some((a, b)) => {
            let den: i64 = b.trim().parse().map_err(bad)?;
            if den == 0 {
                return Err(Error::Parse(format!("weight '{s}' has zero denominator")));
            }
            Ok(Ratio::new(a.trim().parse().map_err(bad)?, den))
        }
        None => Ok(Ratio::from_integer(s.trim().parse().map_err(bad)?)),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn csv_round_trip() {
        let p = PointSet::badic(2, 3, 2, vec![0, 1, 4, 8, 7, 3], Provenance::new("test").with("an", 1)).unwrap();
        let mut buf = Vec::new();
        p.write_csv(&mut buf).unwrap();
        let text = String::from_utf8(buf.clone()).unwrap();
        assert!(text.starts_with("# base=3 n=2 d=2 family=test an=1\n"));
        let q = PointSet::read_csv(&buf[..]).unwrap();
        assert_eq!(p, q);
    }

    #[test]
    fn rational_round_trip_with_weights() {
        let p = PointSet::rational(1, 2, vec![6], vec![1, 3, 5], Provenance::new("x"))
            .unwrap()
            .with_weights(vec![Ratio::new(1, 2), Ratio::new(1, 4), Ratio::new(1, 4)])
            .unwrap();
        assert!(!p.is_badic());
        let mut buf = Vec::new();
        p.write_csv(&mut buf).unwrap();
        assert_eq!(PointSet::read_csv(&buf[..]).unwrap(), p);
    }

    #[test]
    fn powers_of_base_are_promoted() {
        let p = PointSet::rational(2, 2, vec![4, 8], vec![1, 3, 3, 7], Provenance::new("x")).unwrap();
        assert_eq!(p.resolution(), Some(3));
        assert_eq!(p.coords(), &[2, 3, 6, 7]);
    }

    #[test]
    fn rejects_bad_input() {
        assert!(PointSet::badic(2, 2, 1, vec![0, 2], Provenance::default()).is_err());
        assert!(PointSet::read_csv(&b"base=2\n0\n"[..]).is_err());
        assert!(PointSet::read_csv(&b"# base=2 n=1 d=2\n0\n"[..]).is_err());
    }
}
