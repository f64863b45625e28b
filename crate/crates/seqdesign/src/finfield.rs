//! Arithmetic in GF(p^r) and on the projective line P¹(GF(q)).
//!
//! Elements are integer codes in `0..q`: the base-p digits of a code are the
//! coefficients of a polynomial residue, low degree first (for prime fields
//! the code is the residue itself). The modulus is the lexicographically
//! least monic irreducible polynomial of degree r, scanning candidates in
//! ascending code order, so a given q always produces the same field.
//!
//! Multiplication and inversion go through log/antilog tables built at
//! construction, which keeps them O(1) inside search inner loops.

use thiserror::Error;

/// Largest supported field order. Tables are O(q), so this caps memory.
pub const MAX_FIELD_ORDER: u64 = 1 << 16;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum FieldError {
    #[error("{0} is not a prime power (or is out of the supported range 2..=2^16)")]
    NotPrimePower(u64),
    #[error("division by zero in GF({0})")]
    DivisionByZero(u64),
}

/// An element of GF(p^r), stored as its integer code in `0..q`.
#[derive(Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct FieldElement(u32);

impl FieldElement {
    pub fn code(self) -> u32 {
        self.0
    }
}

impl std::fmt::Debug for FieldElement {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{}", self.0)
    }
}

impl std::fmt::Display for FieldElement {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{}", self.0)
    }
}

/// A point of P¹(GF(q)): either a field element or the point at infinity.
///
/// The derived ordering puts finite points (by code) before `Infinity`,
/// matching the canonical point listing.
#[derive(Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Debug)]
pub enum ProjPoint {
    Finite(FieldElement),
    Infinity,
}

impl std::fmt::Display for ProjPoint {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            ProjPoint::Finite(x) => write!(f, "{x}"),
            ProjPoint::Infinity => write!(f, "inf"),
        }
    }
}

/// A concrete finite field GF(p^r) with its modulus and arithmetic tables.
#[derive(Clone)]
pub struct FieldSpec {
    p: u64,
    r: u32,
    q: u64,
    /// Monic modulus coefficients, constant term first, including the
    /// leading 1; empty when r = 1.
    modulus: Vec<u32>,
    /// exp[i] = g^i for a fixed primitive element g, i in 0..2(q-1).
    exp: Vec<u32>,
    /// log[a] for a in 1..q; log[0] is unused.
    log: Vec<u32>,
}

impl std::fmt::Debug for FieldSpec {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("FieldSpec")
            .field("p", &self.p)
            .field("r", &self.r)
            .field("q", &self.q)
            .field("modulus", &self.modulus)
            .finish()
    }
}

/// Factors q as p^r; None when q has two distinct prime factors or q < 2.
fn factor_prime_power(q: u64) -> Option<(u64, u32)> {
    if q < 2 {
        return None;
    }
    let mut p = 2;
    while p * p <= q {
        if q.is_multiple_of(p) {
            let mut m = q;
            let mut r = 0;
            while m.is_multiple_of(p) {
                m /= p;
                r += 1;
            }
            return if m == 1 { Some((p, r)) } else { None };
        }
        p += 1;
    }
    Some((q, 1))
}

/// Remainder of polynomial division, coefficients low degree first, both
/// polynomials over GF(p) with nonzero leading coefficient in the divisor.
fn poly_rem(a: &[u32], b: &[u32], p: u64) -> Vec<u32> {
    let mut a = a.to_vec();
    let lead_inv = mod_inv(b[b.len() - 1] as u64, p);
    while a.last() == Some(&0) {
        a.pop();
    }
    while a.len() >= b.len() {
        let shift = a.len() - b.len();
        let c = (a[a.len() - 1] as u64 * lead_inv) % p;
        for (i, &bc) in b.iter().enumerate() {
            let sub = (c * bc as u64) % p;
            let cur = a[shift + i] as u64;
            a[shift + i] = ((cur + p - sub) % p) as u32;
        }
        while a.last() == Some(&0) {
            a.pop();
        }
    }
    a
}

fn mod_inv(a: u64, p: u64) -> u64 {
    // p prime, a nonzero mod p
    let mut result = 1u64;
    let mut base = a % p;
    let mut e = p - 2;
    while e > 0 {
        if e & 1 == 1 {
            result = result * base % p;
        }
        base = base * base % p;
        e >>= 1;
    }
    result
}

/// True when the monic polynomial (low-first coefficients, leading 1) has no
/// monic factor of degree 1..=deg/2. Trial division; fine at these degrees.
fn is_irreducible(coeffs: &[u32], p: u64) -> bool {
    let deg = coeffs.len() - 1;
    for d in 1..=deg / 2 {
        let count = p.pow(d as u32);
        for v in 0..count {
            let mut div: Vec<u32> = digits(v, p, d);
            div.push(1);
            if poly_rem(coeffs, &div, p).is_empty() {
                return false;
            }
        }
    }
    true
}

fn digits(mut v: u64, p: u64, len: usize) -> Vec<u32> {
    let mut out = Vec::with_capacity(len);
    for _ in 0..len {
        out.push((v % p) as u32);
        v /= p;
    }
    out
}

impl FieldSpec {
    /// Builds GF(q), factoring q and selecting the canonical modulus.
    pub fn new(q: u64) -> Result<FieldSpec, FieldError> {
        if q > MAX_FIELD_ORDER {
            return Err(FieldError::NotPrimePower(q));
        }
        let (p, r) = factor_prime_power(q).ok_or(FieldError::NotPrimePower(q))?;
        let modulus = if r == 1 {
            Vec::new()
        } else {
            (0..q)
                .map(|v| {
                    let mut c = digits(v, p, r as usize);
                    c.push(1);
                    c
                })
                .find(|c| is_irreducible(c, p))
                .expect("an irreducible polynomial of each degree exists over GF(p)")
        };
        let mut spec = FieldSpec {
            p,
            r,
            q,
            modulus,
            exp: Vec::new(),
            log: Vec::new(),
        };
        spec.build_tables();
        Ok(spec)
    }

    fn build_tables(&mut self) {
        let q = self.q as usize;
        // Find a primitive element by direct order computation.
        'cand: for g in 2..q as u32 {
            let mut exp = Vec::with_capacity(2 * (q - 1));
            let mut x = 1u32;
            for _ in 0..q - 1 {
                exp.push(x);
                x = self.mul_raw(x, g);
                if x == 1 && exp.len() < q - 1 {
                    continue 'cand;
                }
            }
            debug_assert_eq!(x, 1);
            exp.extend_from_within(..);
            let mut log = vec![0u32; q];
            for (i, &v) in exp[..q - 1].iter().enumerate() {
                log[v as usize] = i as u32;
            }
            self.exp = exp;
            self.log = log;
            return;
        }
        // q = 2 has no code >= 2; its multiplicative group is trivial.
        assert_eq!(q, 2, "no primitive element found for GF({q})");
        self.exp = vec![1, 1];
        self.log = vec![0, 0];
    }

    /// Schoolbook product of two codes reduced mod the modulus.
    fn mul_raw(&self, a: u32, b: u32) -> u32 {
        let p = self.p;
        if self.r == 1 {
            return ((a as u64 * b as u64) % p) as u32;
        }
        let r = self.r as usize;
        let da = digits(a as u64, p, r);
        let db = digits(b as u64, p, r);
        let mut prod = vec![0u32; 2 * r - 1];
        for (i, &ca) in da.iter().enumerate() {
            for (j, &cb) in db.iter().enumerate() {
                prod[i + j] = ((prod[i + j] as u64 + ca as u64 * cb as u64) % p) as u32;
            }
        }
        let mut rem = poly_rem(&prod, &self.modulus, p);
        rem.resize(r, 0);
        let mut code = 0u64;
        for &c in rem.iter().rev() {
            code = code * p + c as u64;
        }
        code as u32
    }

    pub fn p(&self) -> u64 {
        self.p
    }

    pub fn extension_degree(&self) -> u32 {
        self.r
    }

    pub fn order(&self) -> u64 {
        self.q
    }

    /// Modulus coefficients (constant term first, leading 1 included), or
    /// None for prime fields.
    pub fn modulus(&self) -> Option<&[u32]> {
        if self.r == 1 {
            None
        } else {
            Some(&self.modulus)
        }
    }

    pub fn zero(&self) -> FieldElement {
        FieldElement(0)
    }

    pub fn one(&self) -> FieldElement {
        FieldElement(1)
    }

    /// Wraps a code, panicking when it is out of range.
    pub fn element(&self, code: u64) -> FieldElement {
        assert!(code < self.q, "code {code} out of range for GF({})", self.q);
        FieldElement(code as u32)
    }

    pub fn checked_element(&self, code: u64) -> Option<FieldElement> {
        (code < self.q).then_some(FieldElement(code as u32))
    }

    pub fn add(&self, a: FieldElement, b: FieldElement) -> FieldElement {
        let p = self.p;
        if self.r == 1 {
            return FieldElement(((a.0 as u64 + b.0 as u64) % p) as u32);
        }
        if p == 2 {
            return FieldElement(a.0 ^ b.0);
        }
        self.digitwise(a, b, |x, y| (x + y) % p)
    }

    pub fn sub(&self, a: FieldElement, b: FieldElement) -> FieldElement {
        let p = self.p;
        if self.r == 1 {
            return FieldElement(((a.0 as u64 + p - b.0 as u64) % p) as u32);
        }
        if p == 2 {
            return FieldElement(a.0 ^ b.0);
        }
        self.digitwise(a, b, |x, y| (x + p - y) % p)
    }

    pub fn neg(&self, a: FieldElement) -> FieldElement {
        self.sub(self.zero(), a)
    }

    fn digitwise(&self, a: FieldElement, b: FieldElement, f: impl Fn(u64, u64) -> u64) -> FieldElement {
        let p = self.p;
        let mut code = 0u64;
        let mut pw = 1u64;
        let (mut x, mut y) = (a.0 as u64, b.0 as u64);
        for _ in 0..self.r {
            code += f(x % p, y % p) * pw;
            pw *= p;
            x /= p;
            y /= p;
        }
        FieldElement(code as u32)
    }

    pub fn mul(&self, a: FieldElement, b: FieldElement) -> FieldElement {
        if a.0 == 0 || b.0 == 0 {
            return FieldElement(0);
        }
        let i = self.log[a.0 as usize] as usize + self.log[b.0 as usize] as usize;
        FieldElement(self.exp[i])
    }

    pub fn inv(&self, a: FieldElement) -> Result<FieldElement, FieldError> {
        if a.0 == 0 {
            return Err(FieldError::DivisionByZero(self.q));
        }
        let ord = self.q as usize - 1;
        let i = (ord - self.log[a.0 as usize] as usize) % ord;
        Ok(FieldElement(self.exp[i]))
    }

    pub fn div(&self, a: FieldElement, b: FieldElement) -> Result<FieldElement, FieldError> {
        Ok(self.mul(a, self.inv(b)?))
    }

    pub fn pow(&self, a: FieldElement, mut e: u64) -> FieldElement {
        let mut result = self.one();
        let mut base = a;
        while e > 0 {
            if e & 1 == 1 {
                result = self.mul(result, base);
            }
            base = self.mul(base, base);
            e >>= 1;
        }
        result
    }

    /// All field elements in ascending code order.
    pub fn elements(&self) -> impl Iterator<Item = FieldElement> + '_ {
        (0..self.q as u32).map(FieldElement)
    }

    /// The q+1 points of P¹(GF(q)): finite points in code order, then infinity.
    pub fn proj_points(&self) -> Vec<ProjPoint> {
        let mut pts: Vec<ProjPoint> = self.elements().map(ProjPoint::Finite).collect();
        pts.push(ProjPoint::Infinity);
        pts
    }
}
