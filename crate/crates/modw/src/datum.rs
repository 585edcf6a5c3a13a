//! Nilpotent data: a graded nilpotent `e`, the character `chi = kappa(e)`,
//! the subalgebra `m` built from a maximal totally isotropic subspace of the
//! degree minus-one piece, and an adapted ordered basis
//! `[x_1..x_d | g_e-part | m-basis]` in which all enveloping-algebra
//! computations take place.

use std::sync::Arc;

use rand::Rng;

use crate::error::{Error, Result};
use crate::field::{Elt, Field};
use crate::liealg::RestrictedLieAlgebra;
use crate::matrix::{Mat, Solver};

/// Structure data rewritten in the adapted basis order: complement vectors
/// first (the leading `d_chi` of which span a complement to `m + g_e`),
/// m-basis vectors last.
pub struct AdaptedAlgebra {
    pub field: Field,
    pub dim: usize,
    pub brackets: Vec<u8>,
    /// Row i = (adapted x_i)^{[p]} in adapted coordinates.
    pub ppow: Mat,
    /// chi values on the adapted basis.
    pub chi: Vec<u8>,
    pub weights: Vec<i64>,
    /// Number of complement vectors (= dim of the annihilator of m in g^*).
    pub comp: usize,
    pub d_chi: usize,
    /// Display names: x1..x_comp for the complement, y1..y_m for m.
    pub labels: Vec<String>,
}

impl AdaptedAlgebra {
    #[inline]
    pub fn bracket_basis(&self, i: usize, j: usize) -> &[u8] {
        let n = self.dim;
        &self.brackets[(i * n + j) * n..(i * n + j + 1) * n]
    }

    pub fn p(&self) -> u64 {
        self.field.p()
    }

    /// Indices of the m-part of the basis.
    pub fn m_range(&self) -> std::ops::Range<usize> {
        self.comp..self.dim
    }
}

pub struct NilpotentDatum {
    pub algebra: Arc<RestrictedLieAlgebra>,
    pub e: Vec<u8>,
    pub weights: Vec<i64>,
    pub chi_ambient: Vec<u8>,
    pub d_chi: usize,
    /// D(chi) = p^{d(chi)}.
    pub big_d: usize,
    pub ge_dim: usize,
    pub adapted: AdaptedAlgebra,
    /// Rows = adapted basis vectors in ambient coordinates.
    pub adapted_to_ambient: Mat,
    ambient_to_adapted: Solver,
    pub m_ambient: Vec<Vec<u8>>,
}

/// A character in `chi + m-perp`, stored by its values on the adapted basis;
/// the values on the m-part always agree with chi.
#[derive(Clone, Debug, PartialEq)]
pub struct Eta {
    pub values: Vec<u8>,
}

impl NilpotentDatum {
    pub fn field(&self) -> &Field {
        &self.adapted.field
    }

    pub fn dim(&self) -> usize {
        self.adapted.dim
    }

    pub fn m_dim(&self) -> usize {
        self.adapted.dim - self.adapted.comp
    }

    /// dim of the annihilator of m inside g^*.
    pub fn mperp_dim(&self) -> usize {
        self.adapted.comp
    }

    pub fn ggg_dim(&self) -> usize {
        (self.field().p() as usize).pow(self.adapted.comp as u32)
    }

    pub fn ue_dim(&self) -> usize {
        (self.field().p() as usize).pow(self.adapted.dim as u32)
    }

    pub fn eta_chi(&self) -> Eta {
        Eta { values: self.adapted.chi.clone() }
    }

    /// Builds eta from its values on the complement basis; m-values are chi's.
    pub fn eta_from_complement(&self, vals: &[u8]) -> Result<Eta> {
        if vals.len() != self.adapted.comp {
            return Err(Error::Contract(format!(
                "expected {} complement values, got {}",
                self.adapted.comp,
                vals.len()
            )));
        }
        let mut values = self.adapted.chi.clone();
        values[..self.adapted.comp].copy_from_slice(vals);
        Ok(Eta { values })
    }

    pub fn sample_eta<R: Rng>(&self, rng: &mut R) -> Eta {
        let f = self.field();
        let vals: Vec<u8> = (0..self.adapted.comp).map(|_| f.rand(rng)).collect();
        self.eta_from_complement(&vals).unwrap()
    }

    /// Ambient coordinates of an adapted coordinate vector.
    pub fn to_ambient(&self, adapted_coords: &[u8]) -> Vec<u8> {
        let f = self.field();
        let n = self.adapted.dim;
        let mut out = vec![0u8; n];
        for (i, &c) in adapted_coords.iter().enumerate() {
            if c != 0 {
                let row = self.adapted_to_ambient.row(i);
                for k in 0..n {
                    out[k] = f.add(out[k], f.mul(c, row[k]));
                }
            }
        }
        out
    }

    pub fn to_adapted(&self, ambient_coords: &[u8]) -> Vec<u8> {
        self.ambient_to_adapted.solve(ambient_coords).expect("basis spans g")
    }

    /// x^{[p]} of an element given in adapted coordinates.
    pub fn adapted_p_power(&self, adapted_coords: &[u8]) -> Vec<u8> {
        let amb = self.to_ambient(adapted_coords);
        self.to_adapted(&self.algebra.jacobson_p_power(&amb))
    }
}

fn span_complement_local(field: &Field, spanned: &[Vec<u8>], dim: usize) -> Vec<Vec<u8>> {
    // greedily extend the span by standard basis vectors in index order
    let mut rows: Vec<Vec<u8>> = spanned.to_vec();
    let mut rank = if rows.is_empty() {
        0
    } else {
        Mat::from_rows(field, rows.clone()).rank()
    };
    let mut out = Vec::new();
    for j in 0..dim {
        if rank == dim {
            break;
        }
        let mut v = vec![0u8; dim];
        v[j] = 1;
        rows.push(v.clone());
        let r = Mat::from_rows(field, rows.clone()).rank();
        if r > rank {
            rank = r;
            out.push(v);
        } else {
            rows.pop();
        }
    }
    out
}

/// Greedy symplectic reduction in basis order; returns a maximal totally
/// isotropic subspace of the alternating form given by `gram`.
fn isotropic_subspace(field: &Field, gram: &Mat) -> Result<Vec<Vec<u8>>> {
    let f = field;
    let t = gram.rows;
    let phi = |x: &[u8], y: &[u8]| -> Elt {
        let gy = gram.mat_vec(y);
        let mut acc = 0u8;
        for (a, b) in x.iter().zip(&gy) {
            acc = f.add(acc, f.mul(*a, *b));
        }
        acc
    };
    let mut pool: Vec<Vec<u8>> = (0..t)
        .map(|j| {
            let mut v = vec![0u8; t];
            v[j] = 1;
            v
        })
        .collect();
    let mut ell = Vec::new();
    while !pool.is_empty() {
        let v = pool.remove(0);
        let mut partner = None;
        for (idx, u) in pool.iter().enumerate() {
            if phi(&v, u) != 0 {
                partner = Some(idx);
                break;
            }
        }
        let Some(idx) = partner else {
            return Err(Error::DegenerateForm(
                "the degree minus-one form has a radical vector; cannot reduce isotropically".into(),
            ));
        };
        let u = pool.remove(idx);
        let c = phi(&v, &u);
        let cinv = f.inv(c);
        let u1: Vec<u8> = u.iter().map(|&x| f.mul(cinv, x)).collect();
        for w in pool.iter_mut() {
            // project onto the symplectic complement of (v, u1)
            let a = phi(w, &u1);
            let b = phi(w, &v);
            for k in 0..t {
                let mut val = w[k];
                val = f.sub(val, f.mul(a, v[k]));
                val = f.add(val, f.mul(b, u1[k]));
                w[k] = val;
            }
        }
        ell.push(v);
    }
    Ok(ell)
}

pub fn build_nilpotent_datum(
    algebra: Arc<RestrictedLieAlgebra>,
    e: Vec<u8>,
    weights: Vec<i64>,
) -> Result<NilpotentDatum> {
    let f = algebra.field.clone();
    let n = algebra.dim;
    if e.len() != n || weights.len() != n {
        return Err(Error::Contract("e and weights must match the algebra dimension".into()));
    }

    // grading compatibility with brackets and the p-power map
    for i in 0..n {
        for j in 0..n {
            let row = algebra.bracket_basis(i, j);
            for (k, &c) in row.iter().enumerate() {
                if c != 0 && weights[k] != weights[i] + weights[j] {
                    return Err(Error::InvalidGrading(format!(
                        "bracket [x{i}, x{j}] leaves the grading at x{k}"
                    )));
                }
            }
        }
        let pw = algebra.p_power_basis(i);
        for (k, &c) in pw.iter().enumerate() {
            if c != 0 && weights[k] != (f.p() as i64) * weights[i] {
                return Err(Error::InvalidGrading(format!(
                    "p-power of x{i} leaves the grading at x{k}"
                )));
            }
        }
    }
    for (i, &c) in e.iter().enumerate() {
        if c != 0 && weights[i] != 2 {
            return Err(Error::InvalidGrading("e does not lie in g(2)".into()));
        }
    }

    let chi = algebra.kappa(&e);
    let chi_of = |v: &[u8]| -> Elt {
        let mut acc = 0u8;
        for (a, b) in chi.iter().zip(v) {
            acc = f.add(acc, f.mul(*a, *b));
        }
        acc
    };

    // d(chi) from the rank of the alternating form chi([., .])
    let mut kform = Mat::zeros(&f, n, n);
    for i in 0..n {
        for j in 0..n {
            kform.set(i, j, chi_of(algebra.bracket_basis(i, j)));
        }
    }
    let rank = kform.rank();
    debug_assert!(rank % 2 == 0);
    let d_chi = rank / 2;

    // per-degree pieces and graded centralizer
    let mut degrees: Vec<i64> = weights.clone();
    degrees.sort_unstable();
    degrees.dedup();
    let indices_of = |deg: i64| -> Vec<usize> {
        (0..n).filter(|&i| weights[i] == deg).collect()
    };

    let whole_ge = algebra.centralizer(&e);
    let ge_dim = whole_ge.len();
    let mut ge_graded: Vec<(i64, Vec<Vec<u8>>)> = Vec::new();
    let mut ge_total = 0;
    for &deg in &degrees {
        let dom = indices_of(deg);
        let img = indices_of(deg + 2);
        // ad(e): g(deg) -> g(deg+2) in local coordinates
        let mut loc = Mat::zeros(&f, img.len(), dom.len());
        for (cj, &j) in dom.iter().enumerate() {
            let mut ej = vec![0u8; n];
            ej[j] = 1;
            let br = algebra.bracket(&e, &ej);
            for (ri, &i) in img.iter().enumerate() {
                loc.set(ri, cj, br[i]);
            }
        }
        let ker = loc.kernel_basis();
        if !ker.is_empty() && deg < 0 {
            return Err(Error::InvalidGrading(format!(
                "centralizer of e meets degree {deg}; not a Dynkin grading for e"
            )));
        }
        ge_total += ker.len();
        let lifted: Vec<Vec<u8>> = ker
            .iter()
            .map(|kv| {
                let mut v = vec![0u8; n];
                for (cj, &j) in dom.iter().enumerate() {
                    v[j] = kv[cj];
                }
                v
            })
            .collect();
        ge_graded.push((deg, lifted));
    }
    if ge_total != ge_dim {
        return Err(Error::InvalidGrading("centralizer of e is not graded".into()));
    }
    if n != 2 * d_chi + ge_dim {
        return Err(Error::Construction(format!(
            "dim g_e = {ge_dim} differs from dim g - 2 d(chi) = {}",
            n as i64 - 2 * d_chi as i64
        )));
    }

    // maximal isotropic subspace of g(-1) under Phi(x,y) = chi([x,y])
    let gm1 = indices_of(-1);
    let mut phi_gram = Mat::zeros(&f, gm1.len(), gm1.len());
    for (a, &i) in gm1.iter().enumerate() {
        for (b, &j) in gm1.iter().enumerate() {
            phi_gram.set(a, b, chi_of(algebra.bracket_basis(i, j)));
        }
    }
    let ell_local = isotropic_subspace(&f, &phi_gram)?;
    let ell: Vec<Vec<u8>> = ell_local
        .iter()
        .map(|lv| {
            let mut v = vec![0u8; n];
            for (a, &i) in gm1.iter().enumerate() {
                v[i] = lv[a];
            }
            v
        })
        .collect();

    // m = (deep negative part) + ell, listed by ascending degree
    let mut m_vectors: Vec<Vec<u8>> = Vec::new();
    for &deg in &degrees {
        if deg < -1 {
            for &i in &indices_of(deg) {
                let mut v = vec![0u8; n];
                v[i] = 1;
                m_vectors.push(v);
            }
        }
    }
    m_vectors.extend(ell.iter().cloned());
    if m_vectors.len() != d_chi {
        return Err(Error::Construction(format!(
            "dim m = {} does not equal d(chi) = {d_chi}",
            m_vectors.len()
        )));
    }

    // graded complement: per degree, first complete m (+ g_e) to choose the
    // leading d(chi) vectors, then append the g_e part
    let mut pool: Vec<Vec<u8>> = Vec::new();
    for &deg in &degrees {
        let dom = indices_of(deg);
        if dom.is_empty() {
            continue;
        }
        let localize = |v: &Vec<u8>| -> Vec<u8> { dom.iter().map(|&i| v[i]).collect() };
        let mut spanned: Vec<Vec<u8>> = Vec::new();
        for mv in &m_vectors {
            if mv.iter().enumerate().any(|(i, &c)| c != 0 && weights[i] == deg) {
                spanned.push(localize(mv));
            }
        }
        for (gdeg, vecs) in &ge_graded {
            if *gdeg == deg {
                for v in vecs {
                    spanned.push(localize(v));
                }
            }
        }
        for lv in span_complement_local(&f, &spanned, dom.len()) {
            let mut v = vec![0u8; n];
            for (a, &i) in dom.iter().enumerate() {
                v[i] = lv[a];
            }
            pool.push(v);
        }
    }
    if pool.len() != d_chi {
        return Err(Error::Construction(format!(
            "complement to m + g_e has dimension {}, expected {d_chi}",
            pool.len()
        )));
    }
    let mut ge_part: Vec<Vec<u8>> = Vec::new();
    for (_, vecs) in &ge_graded {
        ge_part.extend(vecs.iter().cloned());
    }

    let mut adapted_rows: Vec<Vec<u8>> = Vec::new();
    adapted_rows.extend(pool.iter().cloned());
    adapted_rows.extend(ge_part.iter().cloned());
    adapted_rows.extend(m_vectors.iter().cloned());
    let adapted_to_ambient = Mat::from_rows(&f, adapted_rows.clone());
    let coord_solver = Solver::new(&adapted_to_ambient.transpose());
    if coord_solver.rank() != n {
        return Err(Error::Construction("adapted basis is not a basis".into()));
    }
    let to_adapted = |v: &[u8]| -> Vec<u8> { coord_solver.solve(v).expect("basis spans") };

    let comp = n - m_vectors.len();
    let mut brackets = vec![0u8; n * n * n];
    for i in 0..n {
        for j in 0..n {
            let br = algebra.bracket(&adapted_rows[i], &adapted_rows[j]);
            brackets[(i * n + j) * n..(i * n + j + 1) * n].copy_from_slice(&to_adapted(&br));
        }
    }
    let mut ppow = Mat::zeros(&f, n, n);
    for i in 0..n {
        let pw = algebra.jacobson_p_power(&adapted_rows[i]);
        ppow.row_mut(i).copy_from_slice(&to_adapted(&pw));
    }
    let chi_adapted: Vec<u8> = adapted_rows.iter().map(|v| chi_of(v)).collect();
    let weights_adapted: Vec<i64> = adapted_rows
        .iter()
        .map(|v| {
            let mut w = None;
            for (i, &c) in v.iter().enumerate() {
                if c != 0 {
                    w = Some(weights[i]);
                }
            }
            w.unwrap_or(0)
        })
        .collect();

    let mut labels: Vec<String> = (0..comp).map(|i| format!("x{}", i + 1)).collect();
    labels.extend((0..n - comp).map(|j| format!("y{}", j + 1)));
    let adapted = AdaptedAlgebra {
        field: f.clone(),
        dim: n,
        brackets,
        ppow,
        chi: chi_adapted,
        weights: weights_adapted,
        comp,
        d_chi,
        labels,
    };

    let datum = NilpotentDatum {
        algebra,
        e,
        weights,
        chi_ambient: chi,
        d_chi,
        big_d: (f.p() as usize).pow(d_chi as u32),
        ge_dim,
        adapted,
        adapted_to_ambient,
        ambient_to_adapted: coord_solver,
        m_ambient: m_vectors,
    };
    validate_datum(&datum)?;
    Ok(datum)
}

/// The chi-axioms and the subalgebra property of m, checked exhaustively
/// over the adapted basis.
fn validate_datum(datum: &NilpotentDatum) -> Result<()> {
    let ad = &datum.adapted;
    let f = &ad.field;
    let n = ad.dim;
    let chi_of = |v: &[u8]| -> Elt {
        let mut acc = 0u8;
        for (a, b) in ad.chi.iter().zip(v) {
            acc = f.add(acc, f.mul(*a, *b));
        }
        acc
    };
    for i in ad.m_range() {
        for j in ad.m_range() {
            let br = ad.bracket_basis(i, j);
            if chi_of(br) != 0 {
                return Err(Error::Certification("chi does not vanish on [m, m]".into()));
            }
            // m must be a subalgebra
            if br[..ad.comp].iter().any(|&c| c != 0) {
                return Err(Error::Certification("m is not closed under brackets".into()));
            }
        }
        if chi_of(ad.ppow.row(i)) != 0 {
            return Err(Error::Certification("chi does not vanish on m^{[p]}".into()));
        }
        // every element of m acts ad-nilpotently
        let amb = datum.adapted_to_ambient.row(i).to_vec();
        let mut pw = datum.algebra.ad_matrix(&amb);
        let step = pw.clone();
        for _ in 0..n {
            pw = pw.mul(&step);
        }
        if !pw.is_zero() {
            return Err(Error::Certification("an m-basis vector is not ad-nilpotent".into()));
        }
    }
    Ok(())
}

/// Jordan-type nilpotent data for gl_n / sl_n: e is the sum of in-block
/// superdiagonal matrix units, weights come from the per-block strings
/// (lambda-1, lambda-3, ..., 1-lambda).
pub fn type_a_nilpotent(
    algebra: &RestrictedLieAlgebra,
    rank: usize,
    partition: &[usize],
) -> Result<(Vec<u8>, Vec<i64>)> {
    if partition.iter().sum::<usize>() != rank {
        return Err(Error::Contract(format!(
            "partition {:?} does not sum to {rank}",
            partition
        )));
    }
    if partition.iter().any(|&b| b == 0) {
        return Err(Error::Contract("partition parts must be positive".into()));
    }
    let label_index = |label: &str| -> Option<usize> {
        algebra.labels.iter().position(|l| l == label)
    };
    let mut h = Vec::with_capacity(rank);
    for &b in partition {
        for r in 0..b {
            h.push(b as i64 - 1 - 2 * r as i64);
        }
    }
    let mut e = vec![0u8; algebra.dim];
    let mut offset = 0;
    for &b in partition {
        for r in 0..b.saturating_sub(1) {
            let a = offset + r;
            let label = format!("E{}{}", a + 1, a + 2);
            let idx = label_index(&label).ok_or_else(|| {
                Error::Construction(format!("basis label {label} missing"))
            })?;
            e[idx] = 1;
        }
        offset += b;
    }
    let mut weights = vec![0i64; algebra.dim];
    for (i, label) in algebra.labels.iter().enumerate() {
        if let Some(rest) = label.strip_prefix('E') {
            let bytes: Vec<char> = rest.chars().collect();
            // single-digit row/column labels suffice at desk scale
            let a: usize = bytes[0].to_digit(10).unwrap() as usize - 1;
            let b: usize = bytes[1].to_digit(10).unwrap() as usize - 1;
            weights[i] = h[a] - h[b];
        } else {
            weights[i] = 0; // Cartan elements H_i
        }
    }
    Ok((e, weights))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::liealg::{build_gl, build_sl};

    fn datum_gl(n: usize, p: u64, partition: &[usize]) -> NilpotentDatum {
        let f = Field::new(p, 1).unwrap();
        let g = Arc::new(build_gl(n, &f).unwrap());
        let (e, w) = type_a_nilpotent(&g, n, partition).unwrap();
        build_nilpotent_datum(g, e, w).unwrap()
    }

    #[test]
    fn gl2_regular_datum() {
        let d = datum_gl(2, 3, &[2]);
        assert_eq!(d.d_chi, 1);
        assert_eq!(d.big_d, 3);
        assert_eq!(d.m_dim(), 1);
        assert_eq!(d.mperp_dim(), 3);
        assert_eq!(d.ge_dim, 2);
        assert_eq!(d.ggg_dim(), 27);
        assert_eq!(d.ue_dim(), 81);
        // m = span{E21}: the adapted m-vector has weight -2
        assert_eq!(d.adapted.weights[3], -2);
        // chi on the m generator is 1
        assert_eq!(d.adapted.chi[3], 1);
        // the first complement vector is E11 (weight 0, complements m + g_e)
        assert_eq!(d.adapted.weights[0], 0);
    }

    #[test]
    fn gl3_regular_datum() {
        let d = datum_gl(3, 3, &[3]);
        assert_eq!(d.d_chi, 3);
        assert_eq!(d.big_d, 27);
        assert_eq!(d.m_dim(), 3);
        assert_eq!(d.mperp_dim(), 6);
        assert_eq!(d.ge_dim, 3);
        assert_eq!(d.ggg_dim(), 729);
    }

    #[test]
    fn gl3_subregular_datum_exercises_isotropic_reduction() {
        let d = datum_gl(3, 3, &[2, 1]);
        assert_eq!(d.d_chi, 2);
        assert_eq!(d.big_d, 9);
        assert_eq!(d.m_dim(), 2);
        assert_eq!(d.mperp_dim(), 7);
        assert_eq!(d.ge_dim, 5);
        // g(-1) is two dimensional; ell is one dimensional inside it
        let gm1: Vec<i64> = d.weights.iter().copied().filter(|&w| w == -1).collect();
        assert_eq!(gm1.len(), 2);
        assert_eq!(d.ggg_dim(), 2187);
    }

    #[test]
    fn sl2_p5_regular_datum() {
        let f = Field::new(5, 1).unwrap();
        let g = Arc::new(build_sl(2, &f).unwrap());
        let (e, w) = type_a_nilpotent(&g, 2, &[2]).unwrap();
        let d = build_nilpotent_datum(g, e, w).unwrap();
        assert_eq!(d.d_chi, 1);
        assert_eq!(d.big_d, 5);
        assert_eq!(d.ge_dim, 1);
        assert_eq!(d.ggg_dim(), 25);
        assert_eq!(d.ue_dim(), 125);
    }

    #[test]
    fn zero_nilpotent_datum() {
        let d = datum_gl(2, 3, &[1, 1]);
        assert_eq!(d.d_chi, 0);
        assert_eq!(d.big_d, 1);
        assert_eq!(d.m_dim(), 0);
        assert_eq!(d.mperp_dim(), 4);
        assert!(d.e.iter().all(|&c| c == 0));
    }

    #[test]
    fn eta_respects_m_boundary() {
        let d = datum_gl(2, 3, &[2]);
        let eta = d.eta_from_complement(&[1, 0, 2]).unwrap();
        // m-value pinned to chi
        assert_eq!(eta.values[3], d.adapted.chi[3]);
        assert!(d.eta_from_complement(&[1, 0]).is_err());
    }

    #[test]
    fn bad_weights_are_rejected() {
        let f = Field::new(3, 1).unwrap();
        let g = Arc::new(build_gl(2, &f).unwrap());
        let (e, _) = type_a_nilpotent(&g, 2, &[2]).unwrap();
        // all-zero weights put e outside g(2)
        let r = build_nilpotent_datum(g, e, vec![0, 0, 0, 0]);
        assert!(matches!(r, Err(Error::InvalidGrading(_))));
    }
}
