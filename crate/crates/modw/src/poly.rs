//! Multivariate polynomials over a [`Field`], with optional total-degree
//! truncation. These carry the coordinates of the reduced p-centre: one
//! generator `z_j` per complement basis vector.
//!
//! Exponent vectors are packed eight bits per variable into a `u128`, so at
//! most 16 variables are supported (far beyond desk scale).

use std::collections::BTreeMap;
use std::fmt;

use crate::field::{Elt, Field};

pub const MAX_VARS: usize = 16;

#[derive(Clone, PartialEq, Eq, Debug)]
pub struct MultiPoly {
    pub nvars: usize,
    /// exponent-packed -> nonzero coefficient
    pub terms: BTreeMap<u128, Elt>,
}

#[inline]
fn exp_get(key: u128, var: usize) -> u32 {
    ((key >> (8 * var)) & 0xff) as u32
}

#[inline]
fn exp_total(key: u128, nvars: usize) -> u32 {
    (0..nvars).map(|v| exp_get(key, v)).sum()
}

impl MultiPoly {
    pub fn zero(nvars: usize) -> MultiPoly {
        assert!(nvars <= MAX_VARS);
        MultiPoly { nvars, terms: BTreeMap::new() }
    }

    pub fn constant(nvars: usize, c: Elt) -> MultiPoly {
        let mut p = MultiPoly::zero(nvars);
        if c != 0 {
            p.terms.insert(0, c);
        }
        p
    }

    pub fn var(nvars: usize, j: usize) -> MultiPoly {
        assert!(j < nvars);
        let mut p = MultiPoly::zero(nvars);
        p.terms.insert(1u128 << (8 * j), 1);
        p
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn is_constant(&self) -> Option<Elt> {
        if self.terms.is_empty() {
            return Some(0);
        }
        if self.terms.len() == 1 {
            if let Some(&c) = self.terms.get(&0) {
                return Some(c);
            }
        }
        None
    }

    pub fn total_degree(&self) -> u32 {
        self.terms.keys().map(|&k| exp_total(k, self.nvars)).max().unwrap_or(0)
    }

    pub fn add(&self, field: &Field, other: &MultiPoly) -> MultiPoly {
        assert_eq!(self.nvars, other.nvars);
        let mut out = self.clone();
        for (&k, &c) in &other.terms {
            let entry = out.terms.entry(k).or_insert(0);
            *entry = field.add(*entry, c);
            if *entry == 0 {
                out.terms.remove(&k);
            }
        }
        out
    }

    pub fn neg(&self, field: &Field) -> MultiPoly {
        let mut out = self.clone();
        for c in out.terms.values_mut() {
            *c = field.neg(*c);
        }
        out
    }

    pub fn scale(&self, field: &Field, c: Elt) -> MultiPoly {
        if c == 0 {
            return MultiPoly::zero(self.nvars);
        }
        let mut out = self.clone();
        for v in out.terms.values_mut() {
            *v = field.mul(c, *v);
        }
        out.terms.retain(|_, v| *v != 0);
        out
    }

    /// Product, dropping terms of total degree above `cap` when given.
    pub fn mul(&self, field: &Field, other: &MultiPoly, cap: Option<u32>) -> MultiPoly {
        assert_eq!(self.nvars, other.nvars);
        let mut out = MultiPoly::zero(self.nvars);
        for (&ka, &ca) in &self.terms {
            for (&kb, &cb) in &other.terms {
                let k = ka + kb;
                if let Some(cap) = cap {
                    if exp_total(k, self.nvars) > cap {
                        continue;
                    }
                }
                let c = field.mul(ca, cb);
                let entry = out.terms.entry(k).or_insert(0);
                *entry = field.add(*entry, c);
                if *entry == 0 {
                    out.terms.remove(&k);
                }
            }
        }
        out
    }

    pub fn pow(&self, field: &Field, e: u32, cap: Option<u32>) -> MultiPoly {
        let mut acc = MultiPoly::constant(self.nvars, 1);
        for _ in 0..e {
            acc = acc.mul(field, self, cap);
        }
        acc
    }

    /// Drops terms of total degree above `d`.
    pub fn truncate(&self, d: u32) -> MultiPoly {
        let mut out = self.clone();
        out.terms.retain(|&k, _| exp_total(k, self.nvars) <= d);
        out
    }

    /// Evaluation at a point; a ring homomorphism.
    pub fn eval(&self, field: &Field, point: &[Elt]) -> Elt {
        assert_eq!(point.len(), self.nvars, "point length must match variable count");
        let mut out = 0u8;
        for (&k, &c) in &self.terms {
            let mut term = c;
            for (v, &pv) in point.iter().enumerate() {
                let e = exp_get(k, v);
                if e > 0 {
                    term = field.mul(term, field.pow(pv, e as u64));
                }
            }
            out = field.add(out, term);
        }
        out
    }

    /// The homogeneous component of total degree `d`.
    pub fn homogeneous_part(&self, d: u32) -> MultiPoly {
        let mut out = self.clone();
        out.terms.retain(|&k, _| exp_total(k, self.nvars) == d);
        out
    }

    pub fn coeff_of(&self, key: u128) -> Elt {
        self.terms.get(&key).copied().unwrap_or(0)
    }

    pub fn fmt_with(&self, field: &Field, names: &dyn Fn(usize) -> String) -> String {
        if self.is_zero() {
            return "0".into();
        }
        let mut parts = Vec::new();
        for (&k, &c) in &self.terms {
            let mut s = String::new();
            if exp_total(k, self.nvars) == 0 || c != 1 {
                s.push_str(&field.fmt_elt(c));
            }
            for v in 0..self.nvars {
                let e = exp_get(k, v);
                if e == 1 {
                    if !s.is_empty() {
                        s.push('*');
                    }
                    s.push_str(&names(v));
                } else if e > 1 {
                    if !s.is_empty() {
                        s.push('*');
                    }
                    s.push_str(&format!("{}^{}", names(v), e));
                }
            }
            parts.push(s);
        }
        parts.join(" + ")
    }
}

impl fmt::Display for MultiPoly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut parts = Vec::new();
        for (&k, &c) in &self.terms {
            let mut s = format!("{c}");
            for v in 0..self.nvars {
                let e = exp_get(k, v);
                if e > 0 {
                    s.push_str(&format!("*z{}^{}", v + 1, e));
                }
            }
            parts.push(s);
        }
        if parts.is_empty() {
            write!(f, "0")
        } else {
            write!(f, "{}", parts.join(" + "))
        }
    }
}

/// Coefficient-ring abstraction shared by the reduced (scalar) and family
/// (polynomial) straightening engines.
pub trait CoefRing: Clone + Send + Sync {
    type El: Clone + PartialEq + std::fmt::Debug + Send + Sync;
    fn zero(&self) -> Self::El;
    fn one(&self) -> Self::El;
    fn is_zero(&self, a: &Self::El) -> bool;
    fn add(&self, a: &Self::El, b: &Self::El) -> Self::El;
    fn mul(&self, a: &Self::El, b: &Self::El) -> Self::El;
    fn neg(&self, a: &Self::El) -> Self::El;
    fn from_scalar(&self, c: Elt) -> Self::El;
    fn scale(&self, a: &Self::El, c: Elt) -> Self::El {
        self.mul(a, &self.from_scalar(c))
    }
}

#[derive(Clone)]
pub struct ScalarRing(pub Field);

impl CoefRing for ScalarRing {
    type El = Elt;
    fn zero(&self) -> Elt {
        0
    }
    fn one(&self) -> Elt {
        1
    }
    fn is_zero(&self, a: &Elt) -> bool {
        *a == 0
    }
    fn add(&self, a: &Elt, b: &Elt) -> Elt {
        self.0.add(*a, *b)
    }
    fn mul(&self, a: &Elt, b: &Elt) -> Elt {
        self.0.mul(*a, *b)
    }
    fn neg(&self, a: &Elt) -> Elt {
        self.0.neg(*a)
    }
    fn from_scalar(&self, c: Elt) -> Elt {
        c
    }
}

/// Truncated polynomial coefficients in the p-centre generators.
#[derive(Clone)]
pub struct ZPolyRing {
    pub field: Field,
    pub nvars: usize,
    pub cap: u32,
}

impl CoefRing for ZPolyRing {
    type El = MultiPoly;
    fn zero(&self) -> MultiPoly {
        MultiPoly::zero(self.nvars)
    }
    fn one(&self) -> MultiPoly {
        MultiPoly::constant(self.nvars, 1)
    }
    fn is_zero(&self, a: &MultiPoly) -> bool {
        a.is_zero()
    }
    fn add(&self, a: &MultiPoly, b: &MultiPoly) -> MultiPoly {
        a.add(&self.field, b)
    }
    fn mul(&self, a: &MultiPoly, b: &MultiPoly) -> MultiPoly {
        a.mul(&self.field, b, Some(self.cap))
    }
    fn neg(&self, a: &MultiPoly) -> MultiPoly {
        a.neg(&self.field)
    }
    fn from_scalar(&self, c: Elt) -> MultiPoly {
        MultiPoly::constant(self.nvars, c)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn eval_examples() {
        let f = Field::new(3, 1).unwrap();
        let c = MultiPoly::constant(2, 2);
        assert_eq!(c.eval(&f, &[0, 1]), 2);
        let z1 = MultiPoly::var(2, 0);
        assert_eq!(z1.eval(&f, &[2, 1]), 2);
        // (z1 + z2)^3 at (1,1) over F_3: 2^3 = 8 = 2 mod 3
        let s = z1.add(&f, &MultiPoly::var(2, 1));
        let cube = s.pow(&f, 3, None);
        assert_eq!(cube.eval(&f, &[1, 1]), 2);
        // Frobenius expansion: (z1+z2)^3 = z1^3 + z2^3 in characteristic 3
        let expect = MultiPoly::var(2, 0).pow(&f, 3, None).add(&f, &MultiPoly::var(2, 1).pow(&f, 3, None));
        assert_eq!(cube, expect);
    }

    #[test]
    fn eval_is_ring_homomorphism() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let f = Field::new(5, 1).unwrap();
        for _ in 0..100 {
            let mut a = MultiPoly::zero(3);
            let mut b = MultiPoly::zero(3);
            for _ in 0..4 {
                let k = (rng.gen_range(0u32..3) as u128)
                    | ((rng.gen_range(0u32..3) as u128) << 8)
                    | ((rng.gen_range(0u32..3) as u128) << 16);
                a.terms.insert(k, f.rand_nonzero(&mut rng));
                let k2 = (rng.gen_range(0u32..3) as u128) | ((rng.gen_range(0u32..3) as u128) << 8);
                b.terms.insert(k2, f.rand_nonzero(&mut rng));
            }
            let pt: Vec<u8> = (0..3).map(|_| f.rand(&mut rng)).collect();
            let prod = a.mul(&f, &b, None);
            assert_eq!(prod.eval(&f, &pt), f.mul(a.eval(&f, &pt), b.eval(&f, &pt)));
            let sum = a.add(&f, &b);
            assert_eq!(sum.eval(&f, &pt), f.add(a.eval(&f, &pt), b.eval(&f, &pt)));
        }
    }

    #[test]
    fn truncation_compatible_with_products() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let f = Field::new(3, 1).unwrap();
        for _ in 0..50 {
            let mut a = MultiPoly::zero(2);
            let mut b = MultiPoly::zero(2);
            for _ in 0..3 {
                let k = (rng.gen_range(0u32..4) as u128) | ((rng.gen_range(0u32..4) as u128) << 8);
                a.terms.insert(k, f.rand_nonzero(&mut rng));
                let k2 = (rng.gen_range(0u32..4) as u128) | ((rng.gen_range(0u32..4) as u128) << 8);
                b.terms.insert(k2, f.rand_nonzero(&mut rng));
            }
            let d = 3;
            let full = a.mul(&f, &b, None).truncate(d);
            let trunc = a.truncate(d).mul(&f, &b.truncate(d), Some(d));
            assert_eq!(full, trunc);
        }
    }
}
