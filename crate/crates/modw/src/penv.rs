//! PBW straightening engine.
//!
//! Elements of the enveloping-algebra quotients are kept in straightened
//! form: a map from exponent vectors (all entries below p, complement
//! generators first, m-generators last) to coefficients. The coefficient
//! ring is a parameter: field scalars give the reduced algebra at a
//! character eta, truncated z-polynomials give the central reduction by the
//! vanishing ideal of `chi + m-perp`, with one generator `z_j` per
//! complement basis vector.
//!
//! Rewriting moves a generator through a straightened monomial with
//! `x_j x_i = x_i x_j + [x_j, x_i]` and collapses p-th powers through
//! `x^p = x^{[p]} + r_x`, where `r_x` is the context's central reduction of
//! `xi(x) = x^p - x^{[p]}`. Each rewrite strictly decreases the pair
//! (total degree, generator index) lexicographically, so straightening
//! terminates; pair products are memoized per context.

use std::collections::{BTreeMap, HashMap};
use std::sync::{Arc, RwLock};

use rand::Rng;

use crate::datum::{Eta, NilpotentDatum};
use crate::error::{Error, Result};
use crate::field::Elt;
use crate::poly::{CoefRing, MultiPoly, ScalarRing, ZPolyRing};

pub type Exp = Box<[u8]>;
pub type Terms<E> = BTreeMap<Exp, E>;

pub struct ReductionContext<R: CoefRing> {
    pub datum: Arc<NilpotentDatum>,
    pub ring: R,
    /// Per generator: the central scalar r_i with x_i^p = x_i^{[p]} + r_i.
    reductions: Vec<R::El>,
    memo: RwLock<HashMap<(u16, Exp), Arc<Terms<R::El>>>>,
}

pub type ReducedContext = ReductionContext<ScalarRing>;
pub type FamilyContext = ReductionContext<ZPolyRing>;

impl ReductionContext<ScalarRing> {
    /// The reduced enveloping algebra at a character in `chi + m-perp`.
    pub fn reduced(datum: Arc<NilpotentDatum>, eta: &Eta) -> Result<Arc<Self>> {
        let f = datum.field().clone();
        let ad = &datum.adapted;
        for i in ad.m_range() {
            if eta.values[i] != ad.chi[i] {
                return Err(Error::Domain(
                    "eta must agree with chi on m; other coinvariants vanish".into(),
                ));
            }
        }
        let reductions: Vec<Elt> = eta.values.iter().map(|&v| f.frob(v)).collect();
        Ok(Arc::new(ReductionContext {
            datum,
            ring: ScalarRing(f),
            reductions,
            memo: RwLock::new(HashMap::new()),
        }))
    }
}

impl ReductionContext<ZPolyRing> {
    /// The central reduction by the vanishing ideal of `chi + m-perp`:
    /// complement p-th powers reduce to fresh polynomial generators,
    /// m-basis p-th powers to the chi-scalars. `cap` truncates the total
    /// z-degree; use a generous cap for exact identities.
    pub fn family(datum: Arc<NilpotentDatum>, cap: u32) -> Arc<Self> {
        let f = datum.field().clone();
        let ad = &datum.adapted;
        let nvars = ad.comp;
        let ring = ZPolyRing { field: f.clone(), nvars, cap };
        let mut reductions = Vec::with_capacity(ad.dim);
        for i in 0..ad.dim {
            if i < ad.comp {
                reductions.push(MultiPoly::var(nvars, i));
            } else {
                reductions.push(MultiPoly::constant(nvars, f.frob(ad.chi[i])));
            }
        }
        Arc::new(ReductionContext {
            datum,
            ring,
            reductions,
            memo: RwLock::new(HashMap::new()),
        })
    }
}

impl<R: CoefRing> ReductionContext<R> {
    pub fn dim(&self) -> usize {
        self.datum.adapted.dim
    }

    /// The image of xi(x_i) = x_i^p - x_i^{[p]} in this quotient.
    pub fn xi(&self, i: usize) -> R::El {
        self.reductions[i].clone()
    }

    fn p(&self) -> usize {
        self.datum.field().p() as usize
    }

    fn add_term(&self, out: &mut Terms<R::El>, e: &Exp, c: &R::El) {
        if self.ring.is_zero(c) {
            return;
        }
        match out.get_mut(e) {
            Some(v) => {
                *v = self.ring.add(v, c);
                if self.ring.is_zero(v) {
                    out.remove(e);
                }
            }
            None => {
                out.insert(e.clone(), c.clone());
            }
        }
    }

    fn add_scaled(&self, out: &mut Terms<R::El>, src: &Terms<R::El>, c: &R::El) {
        for (e, v) in src {
            let cv = self.ring.mul(c, v);
            self.add_term(out, e, &cv);
        }
    }

    /// x_i * x^e as straightened terms; the fast in-order prepend is inlined,
    /// everything else is memoized.
    fn gen_mono_mul(&self, i: usize, e: &Exp) -> Arc<Terms<R::El>> {
        let p = self.p();
        let first = e.iter().position(|&a| a > 0);
        // in-order prepend without reduction
        if let Some(j) = first {
            if i < j || (i == j && (e[i] as usize) < p - 1) {
                let mut ne = e.clone();
                ne[i] += 1;
                let mut t = Terms::new();
                t.insert(ne, self.ring.one());
                return Arc::new(t);
            }
        } else {
            let mut ne = e.clone();
            ne[i] = 1;
            let mut t = Terms::new();
            t.insert(ne, self.ring.one());
            return Arc::new(t);
        }
        if let Some(hit) = self.memo.read().unwrap().get(&(i as u16, e.clone())) {
            return hit.clone();
        }
        let ad = &self.datum.adapted;
        let j = first.unwrap();
        let mut out = Terms::new();
        if i == j {
            // p-th power collapse: x_i^p = x_i^{[p]} + r_i
            let mut rest = e.clone();
            rest[i] = 0;
            self.add_term(&mut out, &rest, &self.reductions[i]);
            for (k, &c) in ad.ppow.row(i).iter().enumerate() {
                if c != 0 {
                    let sub = self.gen_mono_mul(k, &rest);
                    self.add_scaled(&mut out, &sub, &self.ring.from_scalar(c));
                }
            }
        } else {
            // i > j: x_i x_j = x_j x_i + [x_i, x_j]
            let mut rest = e.clone();
            rest[j] -= 1;
            let sub = self.gen_mono_mul(i, &rest);
            for (se, sc) in sub.iter() {
                let moved = self.gen_mono_mul(j, se);
                self.add_scaled(&mut out, &moved, sc);
            }
            for (k, &c) in ad.bracket_basis(i, j).iter().enumerate() {
                if c != 0 {
                    let sub = self.gen_mono_mul(k, &rest);
                    self.add_scaled(&mut out, &sub, &self.ring.from_scalar(c));
                }
            }
        }
        let out = Arc::new(out);
        self.memo
            .write()
            .unwrap()
            .insert((i as u16, e.clone()), out.clone());
        out
    }

    fn apply_gen(&self, i: usize, terms: &Terms<R::El>) -> Terms<R::El> {
        let mut out = Terms::new();
        for (e, c) in terms {
            let prod = self.gen_mono_mul(i, e);
            self.add_scaled(&mut out, &prod, c);
        }
        out
    }
}

#[derive(Clone)]
pub struct PbwElement<R: CoefRing> {
    pub ctx: Arc<ReductionContext<R>>,
    pub terms: Terms<R::El>,
}

impl<R: CoefRing> PartialEq for PbwElement<R> {
    fn eq(&self, other: &Self) -> bool {
        Arc::ptr_eq(&self.ctx, &other.ctx) && self.terms == other.terms
    }
}

impl<R: CoefRing> std::fmt::Debug for PbwElement<R> {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "Pbw{:?}", self.terms)
    }
}

impl<R: CoefRing> PbwElement<R> {
    pub fn zero(ctx: &Arc<ReductionContext<R>>) -> Self {
        PbwElement { ctx: ctx.clone(), terms: Terms::new() }
    }

    pub fn one(ctx: &Arc<ReductionContext<R>>) -> Self {
        Self::monomial(ctx, &vec![0u8; ctx.dim()], ctx.ring.one())
    }

    pub fn generator(ctx: &Arc<ReductionContext<R>>, i: usize) -> Self {
        let mut e = vec![0u8; ctx.dim()];
        e[i] = 1;
        Self::monomial(ctx, &e, ctx.ring.one())
    }

    pub fn monomial(ctx: &Arc<ReductionContext<R>>, exps: &[u8], coef: R::El) -> Self {
        assert_eq!(exps.len(), ctx.dim());
        assert!(exps.iter().all(|&a| (a as usize) < ctx.p()), "exponents must stay below p");
        let mut terms = Terms::new();
        if !ctx.ring.is_zero(&coef) {
            terms.insert(exps.to_vec().into_boxed_slice(), coef);
        }
        PbwElement { ctx: ctx.clone(), terms }
    }

    /// Degree-one element from adapted Lie-algebra coordinates.
    pub fn from_lie(ctx: &Arc<ReductionContext<R>>, coords: &[u8]) -> Self {
        let mut out = Self::zero(ctx);
        for (i, &c) in coords.iter().enumerate() {
            if c != 0 {
                let mut e = vec![0u8; ctx.dim()];
                e[i] = 1;
                out = out.add(&Self::monomial(ctx, &e, ctx.ring.from_scalar(c)));
            }
        }
        out
    }

    pub fn scalar(ctx: &Arc<ReductionContext<R>>, c: R::El) -> Self {
        Self::monomial(ctx, &vec![0u8; ctx.dim()], c)
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn add(&self, other: &Self) -> Self {
        assert!(Arc::ptr_eq(&self.ctx, &other.ctx), "context mismatch");
        let mut out = self.clone();
        for (e, c) in &other.terms {
            self.ctx.add_term(&mut out.terms, e, c);
        }
        out
    }

    pub fn sub(&self, other: &Self) -> Self {
        self.add(&other.scale(&other.ctx.ring.neg(&other.ctx.ring.one())))
    }

    pub fn scale(&self, c: &R::El) -> Self {
        let mut out = Self::zero(&self.ctx);
        for (e, v) in &self.terms {
            let cv = self.ctx.ring.mul(c, v);
            self.ctx.add_term(&mut out.terms, e, &cv);
        }
        out
    }

    /// Straightened product.
    pub fn mul(&self, other: &Self) -> Result<Self> {
        if !Arc::ptr_eq(&self.ctx, &other.ctx) {
            return Err(Error::Contract("product of elements from different contexts".into()));
        }
        let ctx = &self.ctx;
        let n = ctx.dim();
        let mut out = Terms::new();
        for (ea, ca) in &self.terms {
            let mut cur = other.terms.clone();
            for i in (0..n).rev() {
                for _ in 0..ea[i] {
                    cur = ctx.apply_gen(i, &cur);
                }
            }
            ctx.add_scaled(&mut out, &cur, ca);
        }
        Ok(PbwElement { ctx: ctx.clone(), terms: out })
    }

    pub fn commutator(&self, other: &Self) -> Result<Self> {
        Ok(self.mul(other)?.sub(&other.mul(self)?))
    }

    pub fn pow(&self, e: u32) -> Result<Self> {
        let mut acc = Self::one(&self.ctx);
        for _ in 0..e {
            acc = acc.mul(self)?;
        }
        Ok(acc)
    }

    pub fn coeff(&self, exps: &[u8]) -> Option<&R::El> {
        self.terms.get(exps)
    }

    pub fn fmt_with_labels(&self) -> String
    where
        R::El: std::fmt::Debug,
    {
        if self.terms.is_empty() {
            return "0".into();
        }
        let labels = &self.ctx.datum.adapted.labels;
        let mut parts = Vec::new();
        for (e, c) in &self.terms {
            let mut s = format!("{c:?}");
            for (i, &a) in e.iter().enumerate() {
                if a == 1 {
                    s.push_str(&format!("*{}", labels[i]));
                } else if a > 1 {
                    s.push_str(&format!("*{}^{}", labels[i], a));
                }
            }
            parts.push(s);
        }
        parts.join(" + ")
    }
}

impl PbwElement<ZPolyRing> {
    /// Drops terms whose coefficient has total z-degree above `d`.
    pub fn truncate_z(&self, d: u32) -> Self {
        let mut out = Self::zero(&self.ctx);
        for (e, c) in &self.terms {
            let t = c.truncate(d);
            self.ctx.add_term(&mut out.terms, e, &t);
        }
        out
    }

    /// Maximal total z-degree appearing in the coefficients.
    pub fn z_degree(&self) -> u32 {
        self.terms.values().map(|c| c.total_degree()).max().unwrap_or(0)
    }

    /// Specializes the polynomial coefficients at eta (z_j maps to
    /// eta(x_j)^p), landing in the given reduced context.
    pub fn eval_at(&self, reduced: &Arc<ReducedContext>, eta: &Eta) -> PbwElement<ScalarRing> {
        let f = reduced.ring.0.clone();
        let point: Vec<u8> = (0..self.ctx.ring.nvars)
            .map(|j| f.frob(eta.values[j]))
            .collect();
        let mut out = PbwElement::zero(reduced);
        for (e, c) in &self.terms {
            let v = c.eval(&f, &point);
            if v != 0 {
                out = out.add(&PbwElement::monomial(reduced, e, v));
            }
        }
        out
    }
}

/// Certifies the xi-images are central: x_i^p computed by repeated
/// straightening equals x_i^{[p]} + r_i, and [x_i^p, y] = [x_i^{[p]}, y]
/// for every generator y (both sides straightened independently), so that
/// x_i^p - x_i^{[p]} commutes with everything.
pub fn centrality_check<R: CoefRing>(ctx: &Arc<ReductionContext<R>>) -> Result<()> {
    let n = ctx.dim();
    let p = ctx.datum.field().p() as u32;
    for i in 0..n {
        let xi = PbwElement::generator(ctx, i);
        let xp = xi.pow(p)?;
        let lie_pp = PbwElement::from_lie(ctx, ctx.datum.adapted.ppow.row(i));
        let expected = lie_pp.add(&PbwElement::scalar(ctx, ctx.xi(i)));
        if xp != expected {
            return Err(Error::Certification(format!(
                "x_{i}^p does not reduce to x_{i}^[p] + xi(x_{i})"
            )));
        }
        for j in 0..n {
            let xj = PbwElement::generator(ctx, j);
            let lhs = xp.commutator(&xj)?;
            let rhs = lie_pp.commutator(&xj)?;
            if lhs != rhs {
                return Err(Error::Certification(format!(
                    "xi(x_{i}) fails to commute with generator {j}"
                )));
            }
        }
    }
    Ok(())
}

/// A seeded random element supported on `terms` monomials.
pub fn rand_element<R: CoefRing, G: Rng>(
    ctx: &Arc<ReductionContext<R>>,
    rng: &mut G,
    terms: usize,
) -> PbwElement<R> {
    let f = ctx.datum.field();
    let p = f.p() as u8;
    let n = ctx.dim();
    let mut out = PbwElement::zero(ctx);
    for _ in 0..terms {
        let exps: Vec<u8> = (0..n).map(|_| rng.gen_range(0..p)).collect();
        let c = ctx.ring.from_scalar(f.rand_nonzero(rng));
        out = out.add(&PbwElement::monomial(ctx, &exps, c));
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::datum::{build_nilpotent_datum, type_a_nilpotent};
    use crate::field::Field;
    use crate::liealg::build_gl;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn gl2_datum() -> Arc<NilpotentDatum> {
        let f = Field::new(3, 1).unwrap();
        let g = Arc::new(build_gl(2, &f).unwrap());
        let (e, w) = type_a_nilpotent(&g, 2, &[2]).unwrap();
        Arc::new(build_nilpotent_datum(g, e, w).unwrap())
    }

    // adapted order for gl_2, e = E12: x1 = E11, x2/x3 span g_e, y1 = E21

    #[test]
    fn one_is_identity() {
        let d = gl2_datum();
        let ctx = ReductionContext::reduced(d.clone(), &d.eta_chi()).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let b = rand_element(&ctx, &mut rng, 5);
        let one = PbwElement::one(&ctx);
        assert_eq!(one.mul(&b).unwrap(), b);
        assert_eq!(b.mul(&one).unwrap(), b);
    }

    #[test]
    fn gl2_bracket_relation_in_quotient() {
        // E12*E21 - E21*E12 = E11 - E22 expressed in adapted coordinates
        let d = gl2_datum();
        let ctx = ReductionContext::reduced(d.clone(), &d.eta_chi()).unwrap();
        // locate adapted coordinates of ambient E12 and E21
        let e12 = d.to_adapted(&[0, 1, 0, 0]);
        let e21 = d.to_adapted(&[0, 0, 1, 0]);
        let h = d.to_adapted(&[1, 0, 0, 2]); // E11 - E22
        let a = PbwElement::from_lie(&ctx, &e12);
        let b = PbwElement::from_lie(&ctx, &e21);
        let expect = PbwElement::from_lie(&ctx, &h);
        assert_eq!(a.commutator(&b).unwrap(), expect);
    }

    #[test]
    fn cube_of_diagonal_generator() {
        // with eta(x1) = 1 (x1 = E11): x1^3 = x1^{[3]} + 1 = x1 + 1
        let d = gl2_datum();
        let eta = d.eta_from_complement(&[1, 0, 0]).unwrap();
        let ctx = ReductionContext::reduced(d.clone(), &eta).unwrap();
        let x1 = PbwElement::generator(&ctx, 0);
        let cube = x1.pow(3).unwrap();
        // E11^{[3]} = E11 = x1 in adapted coordinates
        let expect = PbwElement::generator(&ctx, 0).add(&PbwElement::one(&ctx));
        assert_eq!(cube, expect);
    }

    #[test]
    fn xi_values() {
        let d = gl2_datum();
        let ctx = ReductionContext::reduced(d.clone(), &d.eta_chi()).unwrap();
        // m-generator y1 = E21 has chi(y1) = 1, so xi(y1) = 1^3 = 1
        let m_index = d.adapted.comp;
        assert_eq!(ctx.xi(m_index), 1);
        // family mode: complement generators reduce to fresh variables
        let fam = ReductionContext::family(d.clone(), 8);
        assert_eq!(fam.xi(0), MultiPoly::var(d.adapted.comp, 0));
        let chi_cubed = d.field().frob(d.adapted.chi[m_index]);
        assert_eq!(fam.xi(m_index), MultiPoly::constant(d.adapted.comp, chi_cubed));
    }

    #[test]
    fn centrality_both_modes() {
        let d = gl2_datum();
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let eta = d.sample_eta(&mut rng);
        let ctx = ReductionContext::reduced(d.clone(), &eta).unwrap();
        centrality_check(&ctx).unwrap();
        let fam = ReductionContext::family(d.clone(), 16);
        centrality_check(&fam).unwrap();
    }

    #[test]
    fn associativity_on_random_triples() {
        let d = gl2_datum();
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let eta = d.sample_eta(&mut rng);
        let ctx = ReductionContext::reduced(d.clone(), &eta).unwrap();
        for _ in 0..25 {
            let a = rand_element(&ctx, &mut rng, 4);
            let b = rand_element(&ctx, &mut rng, 4);
            let c = rand_element(&ctx, &mut rng, 4);
            let lhs = a.mul(&b).unwrap().mul(&c).unwrap();
            let rhs = a.mul(&b.mul(&c).unwrap()).unwrap();
            assert_eq!(lhs, rhs);
        }
    }

    #[test]
    fn family_specialization_commutes_with_products() {
        let d = gl2_datum();
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let fam = ReductionContext::family(d.clone(), 32);
        for _ in 0..25 {
            let eta = d.sample_eta(&mut rng);
            let red = ReductionContext::reduced(d.clone(), &eta).unwrap();
            let a = rand_element(&fam, &mut rng, 3);
            let b = rand_element(&fam, &mut rng, 3);
            let prod_then_eval = a.mul(&b).unwrap().eval_at(&red, &eta);
            let eval_then_prod = a
                .eval_at(&red, &eta)
                .mul(&b.eval_at(&red, &eta))
                .unwrap();
            assert_eq!(prod_then_eval, eval_then_prod);
        }
    }

    #[test]
    fn truncation_examples() {
        let d = gl2_datum();
        let fam = ReductionContext::family(d.clone(), 32);
        let comp = d.adapted.comp;
        // x1^{p-1} * x1 reduces once: x1^{[3]} + z1, retained at z-degree 1
        let mut e = vec![0u8; d.dim()];
        e[0] = 2;
        let a = PbwElement::monomial(&fam, &e, MultiPoly::constant(comp, 1));
        let x1 = PbwElement::generator(&fam, 0);
        let prod = a.mul(&x1).unwrap();
        let expect = PbwElement::from_lie(&fam, d.adapted.ppow.row(0))
            .add(&PbwElement::scalar(&fam, MultiPoly::var(comp, 0)));
        assert_eq!(prod, expect);
        assert_eq!(prod.truncate_z(1), expect);
        // z1 * 1 truncated at degree 0 vanishes
        let z1 = PbwElement::scalar(&fam, MultiPoly::var(comp, 0));
        assert!(z1.truncate_z(0).is_zero());
        // large cap is the identity
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let r = rand_element(&fam, &mut rng, 4);
        assert_eq!(r.truncate_z(32), r);
    }

    #[test]
    fn context_mismatch_is_contract_violation() {
        let d = gl2_datum();
        let c1 = ReductionContext::reduced(d.clone(), &d.eta_chi()).unwrap();
        let c2 = ReductionContext::reduced(d.clone(), &d.eta_chi()).unwrap();
        let a = PbwElement::one(&c1);
        let b = PbwElement::one(&c2);
        assert!(matches!(a.mul(&b), Err(Error::Contract(_))));
    }
}
