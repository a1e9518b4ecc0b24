//! Prime fields and polynomials over them, including Hasse derivatives.

use std::fmt;

use crate::error::{Error, Result};

/// Trial-division primality test.
pub fn is_prime(b: u64) -> bool {
    if b < 2 {
        return false;
    }
    if b < 4 {
        return true;
    }
    if b.is_multiple_of(2) {
        return false;
    }
    let mut k = 3u64;
    while k * k <= b {
        if b.is_multiple_of(k) {
            return false;
        }
        k += 2;
    }
    true
}

/// The field F_b for a prime b.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct PrimeField {
    b: u64,
}

impl PrimeField {
    pub fn new(b: u64) -> Result<Self> {
        if !is_prime(b) {
            return Err(Error::NotPrime(b));
        }
        Ok(PrimeField { b })
    }

    pub fn modulus(&self) -> u64 {
        self.b
    }

    /// Element with the residue of `v`.
    pub fn elem(&self, v: u64) -> FieldElem {
        FieldElem { value: v % self.b, modulus: self.b }
    }

    pub fn zero(&self) -> FieldElem {
        self.elem(0)
    }

    pub fn one(&self) -> FieldElem {
        self.elem(1)
    }

    /// Binomial coefficient C(n, k) mod b via Pascal's rule.
    pub fn binomial(&self, n: usize, k: usize) -> u64 {
        if k > n {
            return 0;
        }
        let mut row = vec![0u64; k + 1];
        row[0] = 1;
        for i in 1..=n {
            let top = i.min(k);
            for j in (1..=top).rev() {
                row[j] = (row[j] + row[j - 1]) % self.b;
            }
        }
        row[k]
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct FieldElem {
    value: u64,
    modulus: u64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FieldOp {
    Add,
    Sub,
    Mul,
    Inv,
    Div,
}

impl FieldElem {
    pub fn value(&self) -> u64 {
        self.value
    }

    pub fn modulus(&self) -> u64 {
        self.modulus
    }

    pub fn is_zero(&self) -> bool {
        self.value == 0
    }

    fn check(&self, other: &FieldElem) -> Result<()> {
        if self.modulus != other.modulus {
            return Err(Error::ModulusMismatch(self.modulus, other.modulus));
        }
        Ok(())
    }

    fn with(&self, v: u64) -> FieldElem {
        FieldElem { value: v % self.modulus, modulus: self.modulus }
    }

    pub fn add(&self, c: &FieldElem) -> Result<FieldElem> {
        self.check(c)?;
        Ok(self.with(self.value + c.value))
    }

    pub fn sub(&self, c: &FieldElem) -> Result<FieldElem> {
        self.check(c)?;
        Ok(self.with(self.value + self.modulus - c.value))
    }

    pub fn mul(&self, c: &FieldElem) -> Result<FieldElem> {
        self.check(c)?;
        Ok(self.with(((self.value as u128 * c.value as u128) % self.modulus as u128) as u64))
    }

    pub fn neg(&self) -> FieldElem {
        self.with(self.modulus - self.value)
    }

    pub fn pow(&self, mut e: u64) -> FieldElem {
        let m = self.modulus as u128;
        let mut base = self.value as u128;
        let mut acc = 1u128 % m;
        while e > 0 {
            if e & 1 == 1 {
                acc = acc * base % m;
            }
            base = base * base % m;
            e >>= 1;
        }
        self.with(acc as u64)
    }

    /// Multiplicative inverse via Fermat's little theorem.
    pub fn inv(&self) -> Result<FieldElem> {
        if self.value == 0 {
            return Err(Error::DivisionByZero(self.modulus));
        }
        Ok(self.pow(self.modulus - 2))
    }

    pub fn div(&self, c: &FieldElem) -> Result<FieldElem> {
        self.check(c)?;
        self.mul(&c.inv()?)
    }
}

impl fmt::Display for FieldElem {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.value)
    }
}

/// Dispatch form of the field operations; `inv` ignores `c` apart from the modulus check.
pub fn ff_arith(a: &FieldElem, c: &FieldElem, op: FieldOp) -> Result<FieldElem> {
    match op {
        FieldOp::Add => a.add(c),
        FieldOp::Sub => a.sub(c),
        FieldOp::Mul => a.mul(c),
        FieldOp::Inv => {
            a.check(c)?;
            a.inv()
        }
        FieldOp::Div => a.div(c),
    }
}

/// Polynomial over F_b with coefficients `f_0, f_1, ...` in increasing degree.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct FieldPoly {
    coeffs: Vec<u64>,
    field: PrimeField,
}

impl FieldPoly {
    pub fn new(field: PrimeField, coeffs: &[u64]) -> Self {
        let mut c: Vec<u64> = coeffs.iter().map(|&v| v % field.b).collect();
        while c.last() == Some(&0) {
            c.pop();
        }
        FieldPoly { coeffs: c, field }
    }

    pub fn zero(field: PrimeField) -> Self {
        FieldPoly { coeffs: Vec::new(), field }
    }

    pub fn monomial(field: PrimeField, k: usize) -> Self {
        let mut c = vec![0; k + 1];
        c[k] = 1;
        FieldPoly::new(field, &c)
    }

    pub fn field(&self) -> PrimeField {
        self.field
    }

    pub fn coeffs(&self) -> &[u64] {
        &self.coeffs
    }

    /// Coefficient of z^k (zero past the degree).
    pub fn coeff(&self, k: usize) -> u64 {
        self.coeffs.get(k).copied().unwrap_or(0)
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    /// Degree with the convention deg(0) = 0.
    pub fn degree(&self) -> usize {
        self.coeffs.len().saturating_sub(1)
    }

    pub fn eval(&self, z: &FieldElem) -> Result<FieldElem> {
        if z.modulus != self.field.b {
            return Err(Error::ModulusMismatch(self.field.b, z.modulus));
        }
        Ok(self.field.elem(self.eval_raw(z.value)))
    }

    pub(crate) fn eval_raw(&self, z: u64) -> u64 {
        let b = self.field.b as u128;
        let z = z as u128 % b;
        self.coeffs
            .iter()
            .rev()
            .fold(0u128, |acc, &c| (acc * z + c as u128) % b) as u64
    }

    pub fn add(&self, g: &FieldPoly) -> Result<FieldPoly> {
        self.same_field(g)?;
        let len = self.coeffs.len().max(g.coeffs.len());
        let c: Vec<u64> = (0..len).map(|k| self.coeff(k) + g.coeff(k)).collect();
        Ok(FieldPoly::new(self.field, &c))
    }

    pub fn mul(&self, g: &FieldPoly) -> Result<FieldPoly> {
        self.same_field(g)?;
        if self.is_zero() || g.is_zero() {
            return Ok(FieldPoly::zero(self.field));
        }
        let b = self.field.b;
        let mut c = vec![0u64; self.coeffs.len() + g.coeffs.len() - 1];
        for (i, &x) in self.coeffs.iter().enumerate() {
            for (j, &y) in g.coeffs.iter().enumerate() {
                c[i + j] = (c[i + j] + x * y % b) % b;
            }
        }
        Ok(FieldPoly::new(self.field, &c))
    }

    fn same_field(&self, g: &FieldPoly) -> Result<()> {
        if self.field != g.field {
            return Err(Error::ModulusMismatch(self.field.b, g.field.b));
        }
        Ok(())
    }
}

/// Horner evaluation of `f` at `z`.
pub fn poly_eval(f: &FieldPoly, z: &FieldElem) -> Result<FieldElem> {
    f.eval(z)
}

/// The λ-th Hasse derivative: coefficient of z^{i−λ} is C(i, λ)·f_i mod b.
pub fn hasse_derivative(f: &FieldPoly, lambda: usize) -> FieldPoly {
    let field = f.field;
    if lambda == 0 {
        return f.clone();
    }
    if f.coeffs.len() <= lambda {
        return FieldPoly::zero(field);
    }
    let b = field.b;
    let c: Vec<u64> = (lambda..f.coeffs.len())
        .map(|i| field.binomial(i, lambda) * f.coeffs[i] % b)
        .collect();
    FieldPoly::new(field, &c)
}
