//! Finite fields `F_{p^k}` for odd primes `p`, with `p^k <= 256`.
//!
//! Elements are stored as `u8` indices `0..q`. For `k = 1` the index is the
//! residue itself; for `k > 1` it packs the coefficient vector of the element
//! with respect to the canonical root of the modulus, base `p` (constant term
//! in the lowest digit). All arithmetic is table-driven and exact.

use std::fmt;
use std::sync::Arc;

use rand::Rng;

use crate::error::{Error, Result};

/// A field element index; only meaningful relative to a [`Field`].
pub type Elt = u8;

#[derive(Clone)]
pub struct Field(Arc<Inner>);

struct Inner {
    p: u16,
    k: u8,
    q: u16,
    add: Vec<u8>,
    mul: Vec<u8>,
    neg: Vec<u8>,
    inv: Vec<u8>,
    frob: Vec<u8>,
    pth_root: Vec<u8>,
    /// Monic irreducible modulus, degree k, lowest coefficient first. Empty for k = 1.
    modulus: Vec<u8>,
}

fn is_prime(n: u64) -> bool {
    if n < 2 {
        return false;
    }
    let mut d = 2;
    while d * d <= n {
        if n % d == 0 {
            return false;
        }
        d += 1;
    }
    true
}

// -- polynomial helpers over F_p, coefficients as u16 digits --

fn poly_trim(v: &mut Vec<u16>) {
    while v.last() == Some(&0) {
        v.pop();
    }
}

fn poly_rem(mut a: Vec<u16>, b: &[u16], p: u16) -> Vec<u16> {
    // b monic
    let db = b.len() - 1;
    while a.len() > db {
        let lead = *a.last().unwrap();
        let da = a.len() - 1;
        if lead != 0 {
            for i in 0..=db {
                let idx = da - db + i;
                a[idx] = (a[idx] + p * p - lead * b[i] % p) % p;
            }
        }
        a.pop();
        poly_trim(&mut a);
        if a.is_empty() {
            break;
        }
    }
    a
}

fn poly_mul(a: &[u16], b: &[u16], p: u16) -> Vec<u16> {
    if a.is_empty() || b.is_empty() {
        return vec![];
    }
    let mut out = vec![0u16; a.len() + b.len() - 1];
    for (i, &x) in a.iter().enumerate() {
        for (j, &y) in b.iter().enumerate() {
            out[i + j] = (out[i + j] + x * y) % p;
        }
    }
    poly_trim(&mut out);
    out
}

/// Monic polynomial of degree d from a counter, lowest coefficients first.
fn monic_from_counter(mut c: u64, d: usize, p: u16) -> Vec<u16> {
    let mut v = vec![0u16; d + 1];
    for item in v.iter_mut().take(d) {
        *item = (c % p as u64) as u16;
        c /= p as u64;
    }
    v[d] = 1;
    v
}

fn is_irreducible(f: &[u16], p: u16) -> bool {
    let d = f.len() - 1;
    for deg in 1..=d / 2 {
        for c in 0..(p as u64).pow(deg as u32) {
            let g = monic_from_counter(c, deg, p);
            let mut r = poly_rem(f.to_vec(), &g, p);
            poly_trim(&mut r);
            if r.is_empty() {
                return false;
            }
        }
    }
    true
}

impl Field {
    /// Builds `F_{p^k}`. Requires `p` an odd prime `>= 3`, `k >= 1`, `p^k <= 256`.
    /// The modulus for `k > 1` is the lexicographically first monic irreducible.
    pub fn new(p: u64, k: u32) -> Result<Field> {
        if !is_prime(p) || p < 3 {
            return Err(Error::BadField(format!("p = {p} must be a prime >= 3")));
        }
        if k == 0 {
            return Err(Error::BadField("extension degree k must be >= 1".into()));
        }
        let q = p.checked_pow(k).filter(|&q| q <= 256).ok_or_else(|| {
            Error::BadField(format!("p^k = {p}^{k} exceeds the supported bound 256"))
        })?;
        let (p, q, k) = (p as u16, q as u16, k as u8);

        let modulus: Vec<u16> = if k == 1 {
            vec![]
        } else {
            let mut found = None;
            for c in 0..(p as u64).pow(k as u32) {
                let f = monic_from_counter(c, k as usize, p);
                if is_irreducible(&f, p) {
                    found = Some(f);
                    break;
                }
            }
            found.expect("an irreducible polynomial of each degree exists")
        };

        let digits = |e: u16| -> Vec<u16> {
            let mut v = Vec::with_capacity(k as usize);
            let mut e = e;
            for _ in 0..k {
                v.push(e % p);
                e /= p;
            }
            v
        };
        let undigits = |v: &[u16]| -> u16 {
            let mut e = 0u16;
            for &d in v.iter().rev() {
                e = e * p + d;
            }
            e
        };

        let qs = q as usize;
        let mut add = vec![0u8; qs * qs];
        let mut mul = vec![0u8; qs * qs];
        for a in 0..q {
            for b in 0..q {
                let da = digits(a);
                let db = digits(b);
                let sum: Vec<u16> = da.iter().zip(&db).map(|(x, y)| (x + y) % p).collect();
                add[a as usize * qs + b as usize] = undigits(&sum) as u8;
                let mut prod = if k == 1 {
                    vec![a * b % p]
                } else {
                    let mut pa = da.clone();
                    poly_trim(&mut pa);
                    let mut pb = db.clone();
                    poly_trim(&mut pb);
                    let mut pr = poly_mul(&pa, &pb, p);
                    pr = poly_rem(pr, &modulus, p);
                    pr
                };
                prod.resize(k as usize, 0);
                mul[a as usize * qs + b as usize] = undigits(&prod) as u8;
            }
        }
        let mut neg = vec![0u8; qs];
        let mut inv = vec![0u8; qs];
        let mut frob = vec![0u8; qs];
        for a in 0..q {
            let da = digits(a);
            let n: Vec<u16> = da.iter().map(|&x| (p - x) % p).collect();
            neg[a as usize] = undigits(&n) as u8;
            // a^p via repeated multiplication
            let mut f = 1u8;
            for _ in 0..p {
                f = mul[f as usize * qs + a as usize];
            }
            frob[a as usize] = f;
            if a != 0 {
                // a^(q-2)
                let mut acc = 1u8;
                let mut base = a as u8;
                let mut e = q - 2;
                while e > 0 {
                    if e & 1 == 1 {
                        acc = mul[acc as usize * qs + base as usize];
                    }
                    base = mul[base as usize * qs + base as usize];
                    e >>= 1;
                }
                inv[a as usize] = acc;
            }
        }
        let mut pth_root = vec![0u8; qs];
        for a in 0..q {
            pth_root[frob[a as usize] as usize] = a as u8;
        }
        let modulus_u8: Vec<u8> = modulus.iter().map(|&c| c as u8).collect();
        Ok(Field(Arc::new(Inner {
            p,
            k,
            q,
            add,
            mul,
            neg,
            inv,
            frob,
            pth_root,
            modulus: modulus_u8,
        })))
    }

    pub fn p(&self) -> u64 {
        self.0.p as u64
    }
    pub fn k(&self) -> u32 {
        self.0.k as u32
    }
    /// Number of elements, `p^k`.
    pub fn q(&self) -> usize {
        self.0.q as usize
    }
    pub fn modulus(&self) -> &[u8] {
        &self.0.modulus
    }

    pub fn zero(&self) -> Elt {
        0
    }
    pub fn one(&self) -> Elt {
        1
    }

    #[inline]
    pub fn add(&self, a: Elt, b: Elt) -> Elt {
        self.0.add[a as usize * self.0.q as usize + b as usize]
    }
    #[inline]
    pub fn sub(&self, a: Elt, b: Elt) -> Elt {
        self.add(a, self.neg(b))
    }
    #[inline]
    pub fn mul(&self, a: Elt, b: Elt) -> Elt {
        self.0.mul[a as usize * self.0.q as usize + b as usize]
    }
    #[inline]
    pub fn neg(&self, a: Elt) -> Elt {
        self.0.neg[a as usize]
    }
    /// Multiplicative inverse; panics on zero (callers guard).
    #[inline]
    pub fn inv(&self, a: Elt) -> Elt {
        assert!(a != 0, "inverse of zero");
        self.0.inv[a as usize]
    }
    /// The Frobenius map a -> a^p.
    #[inline]
    pub fn frob(&self, a: Elt) -> Elt {
        self.0.frob[a as usize]
    }
    /// Unique p-th root (inverse of Frobenius).
    #[inline]
    pub fn pth_root(&self, a: Elt) -> Elt {
        self.0.pth_root[a as usize]
    }

    pub fn pow(&self, a: Elt, mut e: u64) -> Elt {
        let mut acc = 1;
        let mut base = a;
        while e > 0 {
            if e & 1 == 1 {
                acc = self.mul(acc, base);
            }
            base = self.mul(base, base);
            e >>= 1;
        }
        acc
    }

    /// Embeds an integer via the prime subfield.
    pub fn from_int(&self, n: i64) -> Elt {
        let p = self.0.p as i64;
        (n.rem_euclid(p)) as u8
    }

    pub fn rand<R: Rng>(&self, rng: &mut R) -> Elt {
        rng.gen_range(0..self.0.q) as u8
    }

    pub fn rand_nonzero<R: Rng>(&self, rng: &mut R) -> Elt {
        rng.gen_range(1..self.0.q) as u8
    }

    /// Coefficients of the element over the prime subfield, lowest first.
    pub fn digits(&self, a: Elt) -> Vec<u8> {
        let p = self.0.p;
        let mut v = Vec::with_capacity(self.0.k as usize);
        let mut e = a as u16;
        for _ in 0..self.0.k {
            v.push((e % p) as u8);
            e /= p;
        }
        v
    }

    pub fn fmt_elt(&self, a: Elt) -> String {
        if self.0.k == 1 {
            format!("{a}")
        } else {
            format!("[{}]", self.digits(a).iter().map(|d| d.to_string()).collect::<Vec<_>>().join(","))
        }
    }
}

impl fmt::Debug for Field {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "F_{{{}^{}}}", self.0.p, self.0.k)
    }
}

impl PartialEq for Field {
    fn eq(&self, other: &Self) -> bool {
        self.0.p == other.0.p && self.0.k == other.0.k
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn rejects_bad_parameters() {
        assert!(Field::new(2, 1).is_err());
        assert!(Field::new(4, 1).is_err());
        assert!(Field::new(3, 0).is_err());
        assert!(Field::new(3, 6).is_err()); // 729 > 256
        assert!(Field::new(3, 5).is_ok()); // 243
    }

    #[test]
    fn prime_field_arithmetic() {
        let f = Field::new(7, 1).unwrap();
        assert_eq!(f.add(5, 4), 2);
        assert_eq!(f.mul(5, 4), 6);
        assert_eq!(f.neg(3), 4);
        assert_eq!(f.mul(f.inv(5), 5), 1);
        assert_eq!(f.pow(3, 6), 1);
    }

    #[test]
    fn extension_field_is_a_field() {
        for (p, k) in [(3u64, 2u32), (3, 4), (5, 2), (7, 2), (3, 5)] {
            let f = Field::new(p, k).unwrap();
            let q = f.q();
            for a in 1..q as u8 {
                assert_eq!(f.mul(a, f.inv(a)), 1, "inv fails at {a} in F_{p}^{k}");
            }
            // associativity spot check on all triples for small q
            if q <= 27 {
                for a in 0..q as u8 {
                    for b in 0..q as u8 {
                        for c in 0..q as u8 {
                            assert_eq!(f.mul(f.mul(a, b), c), f.mul(a, f.mul(b, c)));
                            assert_eq!(
                                f.mul(a, f.add(b, c)),
                                f.add(f.mul(a, b), f.mul(a, c))
                            );
                        }
                    }
                }
            }
        }
    }

    #[test]
    fn frobenius_is_automorphism_fixing_prime_subfield() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for (p, k) in [(3u64, 1u32), (3, 2), (5, 2), (3, 3)] {
            let f = Field::new(p, k).unwrap();
            for _ in 0..100 {
                let a = f.rand(&mut rng);
                let b = f.rand(&mut rng);
                assert_eq!(f.frob(f.add(a, b)), f.add(f.frob(a), f.frob(b)));
                assert_eq!(f.frob(f.mul(a, b)), f.mul(f.frob(a), f.frob(b)));
                assert_eq!(f.pth_root(f.frob(a)), a);
            }
            let fixed = (0..f.q() as u8).filter(|&a| f.frob(a) == a).count();
            assert_eq!(fixed as u64, p, "Frobenius must fix exactly F_p");
        }
    }
}
