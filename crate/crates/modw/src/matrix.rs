//! Dense and sparse exact matrices over a [`Field`].
//!
//! Elimination uses deterministic pivoting (first nonzero in column order,
//! scanning rows top to bottom) so every derived basis, solution and rank is
//! reproducible. Hot loops are monomorphized per characteristic; sums are
//! accumulated wide and reduced once.

use crate::error::{Error, Result};
use crate::field::{Elt, Field};

#[derive(Clone)]
pub struct Mat {
    pub rows: usize,
    pub cols: usize,
    data: Vec<u8>,
    field: Field,
}

#[inline]
fn axpy3_add(dst: &mut [u8], src: &[u8]) {
    for (d, s) in dst.iter_mut().zip(src) {
        let t = *d + *s;
        *d = t - 3 * ((t >= 3) as u8);
    }
}

#[inline]
fn axpy3_sub(dst: &mut [u8], src: &[u8]) {
    for (d, s) in dst.iter_mut().zip(src) {
        let t = *d + 3 - *s;
        *d = t - 3 * ((t >= 3) as u8);
    }
}

#[inline]
fn axpy_mod<const P: u16>(dst: &mut [u8], src: &[u8], c: u8) {
    let c = c as u16;
    for (d, s) in dst.iter_mut().zip(src) {
        *d = ((*d as u16 + c * (*s as u16)) % P) as u8;
    }
}

/// dst += c * src, elementwise in the field.
pub fn axpy(field: &Field, dst: &mut [u8], src: &[u8], c: u8) {
    if c == 0 {
        return;
    }
    if field.k() == 1 {
        match field.p() {
            3 => {
                if c == 1 {
                    axpy3_add(dst, src)
                } else {
                    axpy3_sub(dst, src)
                }
            }
            5 => axpy_mod::<5>(dst, src, c),
            7 => axpy_mod::<7>(dst, src, c),
            11 => axpy_mod::<11>(dst, src, c),
            13 => axpy_mod::<13>(dst, src, c),
            _ => {
                for (d, s) in dst.iter_mut().zip(src) {
                    *d = field.add(*d, field.mul(c, *s));
                }
            }
        }
    } else {
        for (d, s) in dst.iter_mut().zip(src) {
            *d = field.add(*d, field.mul(c, *s));
        }
    }
}

pub fn scale(field: &Field, dst: &mut [u8], c: u8) {
    if c == 1 {
        return;
    }
    for d in dst.iter_mut() {
        *d = field.mul(c, *d);
    }
}

impl Mat {
    pub fn zeros(field: &Field, rows: usize, cols: usize) -> Mat {
        Mat { rows, cols, data: vec![0; rows * cols], field: field.clone() }
    }

    pub fn identity(field: &Field, n: usize) -> Mat {
        let mut m = Mat::zeros(field, n, n);
        for i in 0..n {
            m.set(i, i, 1);
        }
        m
    }

    pub fn from_rows(field: &Field, rows: Vec<Vec<u8>>) -> Mat {
        let r = rows.len();
        let c = rows.first().map_or(0, |v| v.len());
        let mut data = Vec::with_capacity(r * c);
        for row in &rows {
            assert_eq!(row.len(), c, "ragged rows");
            data.extend_from_slice(row);
        }
        Mat { rows: r, cols: c, data, field: field.clone() }
    }

    pub fn field(&self) -> &Field {
        &self.field
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> Elt {
        self.data[i * self.cols + j]
    }
    #[inline]
    pub fn set(&mut self, i: usize, j: usize, v: Elt) {
        self.data[i * self.cols + j] = v;
    }
    #[inline]
    pub fn row(&self, i: usize) -> &[u8] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }
    #[inline]
    pub fn row_mut(&mut self, i: usize) -> &mut [u8] {
        &mut self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn is_zero(&self) -> bool {
        self.data.iter().all(|&x| x == 0)
    }

    pub fn transpose(&self) -> Mat {
        let mut t = Mat::zeros(&self.field, self.cols, self.rows);
        for i in 0..self.rows {
            for j in 0..self.cols {
                t.set(j, i, self.get(i, j));
            }
        }
        t
    }

    pub fn add(&self, other: &Mat) -> Mat {
        assert_eq!((self.rows, self.cols), (other.rows, other.cols));
        let mut out = self.clone();
        for (d, s) in out.data.iter_mut().zip(&other.data) {
            *d = self.field.add(*d, *s);
        }
        out
    }

    pub fn sub(&self, other: &Mat) -> Mat {
        assert_eq!((self.rows, self.cols), (other.rows, other.cols));
        let mut out = self.clone();
        for (d, s) in out.data.iter_mut().zip(&other.data) {
            *d = self.field.sub(*d, *s);
        }
        out
    }

    pub fn scaled(&self, c: Elt) -> Mat {
        let mut out = self.clone();
        for d in out.data.iter_mut() {
            *d = self.field.mul(c, *d);
        }
        out
    }

    pub fn mul(&self, other: &Mat) -> Mat {
        assert_eq!(self.cols, other.rows, "matmul shape");
        let f = &self.field;
        let mut out = Mat::zeros(f, self.rows, other.cols);
        if f.k() == 1 {
            let p = f.p() as u32;
            let mut acc = vec![0u32; other.cols];
            for i in 0..self.rows {
                acc.iter_mut().for_each(|a| *a = 0);
                for l in 0..self.cols {
                    let a = self.get(i, l) as u32;
                    if a != 0 {
                        let brow = other.row(l);
                        for (ac, &b) in acc.iter_mut().zip(brow) {
                            *ac += a * b as u32;
                        }
                    }
                }
                for (o, a) in out.row_mut(i).iter_mut().zip(&acc) {
                    *o = (*a % p) as u8;
                }
            }
        } else {
            for i in 0..self.rows {
                for l in 0..self.cols {
                    let a = self.get(i, l);
                    if a != 0 {
                        for j in 0..other.cols {
                            let v = f.add(out.get(i, j), f.mul(a, other.get(l, j)));
                            out.set(i, j, v);
                        }
                    }
                }
            }
        }
        out
    }

    pub fn mat_vec(&self, v: &[u8]) -> Vec<u8> {
        assert_eq!(self.cols, v.len(), "mat_vec shape");
        let f = &self.field;
        let mut out = vec![0u8; self.rows];
        for i in 0..self.rows {
            let row = self.row(i);
            if f.k() == 1 {
                let mut acc = 0u32;
                for (a, b) in row.iter().zip(v) {
                    acc += (*a as u32) * (*b as u32);
                }
                out[i] = (acc % f.p() as u32) as u8;
            } else {
                let mut acc = 0u8;
                for (a, b) in row.iter().zip(v) {
                    acc = f.add(acc, f.mul(*a, *b));
                }
                out[i] = acc;
            }
        }
        out
    }

    /// In-place row echelon form. Returns the pivot columns in order.
    /// `reduced` additionally clears above pivots and normalizes pivots to 1.
    pub fn echelonize(&mut self, reduced: bool) -> Vec<usize> {
        let f = self.field.clone();
        let mut pivots = Vec::new();
        let mut prow = 0;
        for col in 0..self.cols {
            if prow == self.rows {
                break;
            }
            let mut sel = None;
            for r in prow..self.rows {
                if self.get(r, col) != 0 {
                    sel = Some(r);
                    break;
                }
            }
            let Some(sel) = sel else { continue };
            if sel != prow {
                let (a, b) = (sel.min(prow), sel.max(prow));
                let (top, bot) = self.data.split_at_mut(b * self.cols);
                top[a * self.cols..(a + 1) * self.cols].swap_with_slice(&mut bot[..self.cols]);
            }
            let pv = self.get(prow, col);
            if pv != 1 {
                let inv = f.inv(pv);
                scale(&f, &mut self.row_mut(prow)[col..], inv);
            }
            let (head, tail) = self.data.split_at_mut((prow + 1) * self.cols);
            let src = &head[prow * self.cols..];
            for r in 0..self.rows - prow - 1 {
                let dst = &mut tail[r * self.cols..(r + 1) * self.cols];
                let c = dst[col];
                if c != 0 {
                    axpy(&f, &mut dst[col..], &src[col..], f.neg(c));
                }
            }
            pivots.push(col);
            prow += 1;
        }
        if reduced {
            for (pr, &col) in pivots.iter().enumerate().rev() {
                let (head, tail) = self.data.split_at_mut(pr * self.cols);
                let src = &tail[..self.cols];
                for r in 0..pr {
                    let dst = &mut head[r * self.cols..(r + 1) * self.cols];
                    let c = dst[col];
                    if c != 0 {
                        axpy(&f, &mut dst[col..], &src[col..], f.neg(c));
                    }
                }
            }
        }
        pivots
    }

    pub fn rank(&self) -> usize {
        self.clone().echelonize(false).len()
    }

    /// Rank computed in place, destroying the matrix (used for large systems).
    pub fn rank_destructive(mut self) -> usize {
        self.echelonize(false).len()
    }

    /// Basis of the right kernel. Deterministic: reduced echelon
    /// parameterization with free variables set in ascending column order.
    pub fn kernel_basis(&self) -> Vec<Vec<u8>> {
        let f = &self.field;
        let mut m = self.clone();
        let pivots = m.echelonize(true);
        let pivot_set: std::collections::HashSet<usize> = pivots.iter().copied().collect();
        let mut basis = Vec::new();
        for free in 0..self.cols {
            if pivot_set.contains(&free) {
                continue;
            }
            let mut v = vec![0u8; self.cols];
            v[free] = 1;
            for (pr, &pc) in pivots.iter().enumerate() {
                v[pc] = f.neg(m.get(pr, free));
            }
            basis.push(v);
        }
        basis
    }

    /// First solution of `Mx = b` in the reduced-echelon parameterization
    /// (free variables zero), or `None` when `b` is outside the column space.
    pub fn solve(&self, b: &[u8]) -> Result<Option<Vec<u8>>> {
        if b.len() != self.rows {
            return Err(Error::Contract(format!(
                "solve: rhs length {} does not match {} rows",
                b.len(),
                self.rows
            )));
        }
        let f = &self.field;
        let mut aug = Mat::zeros(f, self.rows, self.cols + 1);
        for i in 0..self.rows {
            aug.row_mut(i)[..self.cols].copy_from_slice(self.row(i));
            aug.set(i, self.cols, b[i]);
        }
        let pivots = aug.echelonize(true);
        if pivots.last() == Some(&self.cols) {
            return Ok(None); // pivot in the rhs column: inconsistent
        }
        let mut x = vec![0u8; self.cols];
        for (pr, &pc) in pivots.iter().enumerate() {
            x[pc] = aug.get(pr, self.cols);
        }
        Ok(Some(x))
    }
}

/// Reusable factorization of a matrix for repeated solves against many
/// right-hand sides: caches the reduced echelon form together with the row
/// transform that produced it.
pub struct Solver {
    rref: Mat,
    pivots: Vec<usize>,
    transform: Mat,
}

impl Solver {
    pub fn new(a: &Mat) -> Solver {
        let f = a.field().clone();
        // echelonize [A | I] jointly
        let mut aug = Mat::zeros(&f, a.rows, a.cols + a.rows);
        for i in 0..a.rows {
            aug.row_mut(i)[..a.cols].copy_from_slice(a.row(i));
            aug.set(i, a.cols + i, 1);
        }
        // run reduction with pivot search restricted to the A-block
        let mut pivots = Vec::new();
        let mut prow = 0;
        for col in 0..a.cols {
            if prow == aug.rows {
                break;
            }
            let mut sel = None;
            for r in prow..aug.rows {
                if aug.get(r, col) != 0 {
                    sel = Some(r);
                    break;
                }
            }
            let Some(sel) = sel else { continue };
            if sel != prow {
                let (x, y) = (sel.min(prow), sel.max(prow));
                let (top, bot) = aug.data.split_at_mut(y * aug.cols);
                top[x * aug.cols..(x + 1) * aug.cols].swap_with_slice(&mut bot[..aug.cols]);
            }
            let pv = aug.get(prow, col);
            if pv != 1 {
                let inv = f.inv(pv);
                scale(&f, aug.row_mut(prow), inv);
            }
            for r in 0..aug.rows {
                if r != prow {
                    let c = aug.get(r, col);
                    if c != 0 {
                        let (pr_row, other) = {
                            let ptr = aug.data.as_mut_ptr();
                            let w = aug.cols;
                            unsafe {
                                (
                                    std::slice::from_raw_parts(ptr.add(prow * w), w),
                                    std::slice::from_raw_parts_mut(ptr.add(r * w), w),
                                )
                            }
                        };
                        axpy(&f, other, pr_row, f.neg(c));
                    }
                }
            }
            pivots.push(col);
            prow += 1;
        }
        let mut rref = Mat::zeros(&f, a.rows, a.cols);
        let mut transform = Mat::zeros(&f, a.rows, a.rows);
        for i in 0..a.rows {
            rref.row_mut(i).copy_from_slice(&aug.row(i)[..a.cols]);
            transform.row_mut(i).copy_from_slice(&aug.row(i)[a.cols..]);
        }
        Solver { rref, pivots, transform }
    }

    pub fn rank(&self) -> usize {
        self.pivots.len()
    }

    pub fn solve(&self, b: &[u8]) -> Option<Vec<u8>> {
        let tb = self.transform.mat_vec(b);
        // rows past the rank must vanish for consistency
        if tb[self.pivots.len()..].iter().any(|&x| x != 0) {
            return None;
        }
        let mut x = vec![0u8; self.rref.cols];
        for (pr, &pc) in self.pivots.iter().enumerate() {
            x[pc] = tb[pr];
        }
        Some(x)
    }
}

/// Column-sparse matrix with `u8` entries, used for module action operators.
#[derive(Clone)]
pub struct SparseMat {
    pub rows: usize,
    pub cols: usize,
    pub col_data: Vec<Vec<(u32, u8)>>,
}

impl SparseMat {
    pub fn new(rows: usize, cols: usize) -> SparseMat {
        SparseMat { rows, cols, col_data: vec![Vec::new(); cols] }
    }

    pub fn from_cols(rows: usize, col_data: Vec<Vec<(u32, u8)>>) -> SparseMat {
        SparseMat { rows, cols: col_data.len(), col_data }
    }

    pub fn nnz(&self) -> usize {
        self.col_data.iter().map(|c| c.len()).sum()
    }

    pub fn col(&self, j: usize) -> &[(u32, u8)] {
        &self.col_data[j]
    }

    pub fn to_dense(&self, field: &Field) -> Mat {
        let mut m = Mat::zeros(field, self.rows, self.cols);
        for (j, col) in self.col_data.iter().enumerate() {
            for &(i, v) in col {
                m.set(i as usize, j, v);
            }
        }
        m
    }

    /// out = M * v (dense vector).
    pub fn apply(&self, field: &Field, v: &[u8]) -> Vec<u8> {
        assert_eq!(v.len(), self.cols);
        let mut out = vec![0u8; self.rows];
        self.apply_into(field, v, &mut out);
        out
    }

    pub fn apply_into(&self, field: &Field, v: &[u8], out: &mut [u8]) {
        out.iter_mut().for_each(|x| *x = 0);
        if field.k() == 1 {
            let p = field.p() as u32;
            let mut acc = vec![0u32; self.rows];
            for (j, col) in self.col_data.iter().enumerate() {
                let c = v[j] as u32;
                if c != 0 {
                    for &(i, val) in col {
                        acc[i as usize] += c * val as u32;
                    }
                }
            }
            for (o, a) in out.iter_mut().zip(&acc) {
                *o = (*a % p) as u8;
            }
        } else {
            for (j, col) in self.col_data.iter().enumerate() {
                let c = v[j];
                if c != 0 {
                    for &(i, val) in col {
                        out[i as usize] = field.add(out[i as usize], field.mul(c, val));
                    }
                }
            }
        }
    }

    /// Applies to a row-major block (`cols x width` in, `rows x width` out),
    /// accumulating wide and reducing once per output entry.
    pub fn apply_block(&self, field: &Field, block: &[u8], width: usize, out: &mut [u8]) {
        assert_eq!(block.len(), self.cols * width);
        assert_eq!(out.len(), self.rows * width);
        if field.k() == 1 {
            let p = field.p() as u32;
            let pm1 = (p - 1) * (p - 1);
            // u16 accumulation is safe while each output entry receives at most
            // `cols` contributions of size (p-1)^2 each
            if (self.cols as u32) * pm1 < 65536 {
                let mut acc = vec![0u16; self.rows * width];
                for (j, col) in self.col_data.iter().enumerate() {
                    let src = &block[j * width..(j + 1) * width];
                    for &(i, val) in col {
                        let v = val as u16;
                        let dst = &mut acc[i as usize * width..(i as usize + 1) * width];
                        for (d, s) in dst.iter_mut().zip(src) {
                            *d += v * (*s as u16);
                        }
                    }
                }
                for (o, a) in out.iter_mut().zip(&acc) {
                    *o = (*a as u32 % p) as u8;
                }
                return;
            }
            let mut acc = vec![0u32; self.rows * width];
            for (j, col) in self.col_data.iter().enumerate() {
                let src = &block[j * width..(j + 1) * width];
                for &(i, val) in col {
                    let v = val as u32;
                    let dst = &mut acc[i as usize * width..(i as usize + 1) * width];
                    for (d, s) in dst.iter_mut().zip(src) {
                        *d += v * (*s as u32);
                    }
                }
            }
            for (o, a) in out.iter_mut().zip(&acc) {
                *o = (*a % p) as u8;
            }
        } else {
            out.iter_mut().for_each(|x| *x = 0);
            for (j, col) in self.col_data.iter().enumerate() {
                let src = &block[j * width..(j + 1) * width];
                for &(i, val) in col {
                    let dst = &mut out[i as usize * width..(i as usize + 1) * width];
                    for (d, s) in dst.iter_mut().zip(src) {
                        *d = field.add(*d, field.mul(val, *s));
                    }
                }
            }
        }
    }

    /// M*N as sparse columns (used for small commutator checks).
    pub fn apply_sparse_col(&self, field: &Field, col: &[(u32, u8)], scratch: &mut Vec<u8>) -> Vec<(u32, u8)> {
        scratch.clear();
        scratch.resize(self.rows, 0);
        for &(j, c) in col {
            for &(i, v) in &self.col_data[j as usize] {
                let idx = i as usize;
                scratch[idx] = field.add(scratch[idx], field.mul(c, v));
            }
        }
        let mut out = Vec::new();
        for (i, &v) in scratch.iter().enumerate() {
            if v != 0 {
                out.push((i as u32, v));
            }
        }
        out
    }
}

/// Stacks matrices vertically.
pub fn vstack(field: &Field, mats: &[&Mat]) -> Mat {
    let cols = mats[0].cols;
    let rows: usize = mats.iter().map(|m| m.rows).sum();
    let mut out = Mat::zeros(field, rows, cols);
    let mut r = 0;
    for m in mats {
        assert_eq!(m.cols, cols);
        for i in 0..m.rows {
            out.row_mut(r).copy_from_slice(m.row(i));
            r += 1;
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn f3() -> Field {
        Field::new(3, 1).unwrap()
    }

    #[test]
    fn solve_identity_and_zero() {
        let f = f3();
        let id = Mat::identity(&f, 3);
        let b = vec![1, 2, 0];
        assert_eq!(id.solve(&b).unwrap(), Some(b.clone()));
        let z = Mat::zeros(&f, 3, 3);
        assert_eq!(z.solve(&b).unwrap(), None);
        assert_eq!(z.solve(&vec![0, 0, 0]).unwrap(), Some(vec![0, 0, 0]));
    }

    #[test]
    fn solve_two_by_two_mod_three() {
        let f = f3();
        let m = Mat::from_rows(&f, vec![vec![1, 1], vec![0, 1]]);
        let x = m.solve(&[0, 1]).unwrap().unwrap();
        assert_eq!(x, vec![2, 1]);
        assert_eq!(m.mat_vec(&x), vec![0, 1]);
    }

    #[test]
    fn kernel_examples() {
        let f = f3();
        assert!(Mat::identity(&f, 4).kernel_basis().is_empty());
        let z = Mat::zeros(&f, 3, 3);
        let k = z.kernel_basis();
        assert_eq!(k.len(), 3);
        for (i, v) in k.iter().enumerate() {
            let mut e = vec![0u8; 3];
            e[i] = 1;
            assert_eq!(*v, e);
        }
        let m = Mat::from_rows(&f, vec![vec![1, 2]]);
        let k = m.kernel_basis();
        assert_eq!(k, vec![vec![1, 1]]);
        assert_eq!(m.mat_vec(&k[0]), vec![0]);
    }

    #[test]
    fn rank_nullity_and_solve_on_random_matrices() {
        let mut rng = ChaCha8Rng::seed_from_u64(42);
        for (p, k) in [(3u64, 1u32), (5, 1), (3, 2), (7, 1)] {
            let f = Field::new(p, k).unwrap();
            for _ in 0..200 {
                let rows = rng.gen_range(1..7);
                let cols = rng.gen_range(1..7);
                let mut m = Mat::zeros(&f, rows, cols);
                for i in 0..rows {
                    for j in 0..cols {
                        m.set(i, j, f.rand(&mut rng));
                    }
                }
                let rank = m.rank();
                let ker = m.kernel_basis();
                assert_eq!(rank + ker.len(), cols, "rank-nullity");
                for v in &ker {
                    assert!(m.mat_vec(v).iter().all(|&x| x == 0));
                }
                // a consistent system: b = M x0
                let x0: Vec<u8> = (0..cols).map(|_| f.rand(&mut rng)).collect();
                let b = m.mat_vec(&x0);
                let x = m.solve(&b).unwrap().expect("consistent");
                assert_eq!(m.mat_vec(&x), b);
                // solver agrees
                let solver = Solver::new(&m);
                assert_eq!(solver.rank(), rank);
                let xs = solver.solve(&b).expect("consistent");
                assert_eq!(m.mat_vec(&xs), b);
                let rb: Vec<u8> = (0..rows).map(|_| f.rand(&mut rng)).collect();
                assert_eq!(m.solve(&rb).unwrap(), solver.solve(&rb));
            }
        }
    }

    #[test]
    fn matmul_matches_scalar_definition() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let f = Field::new(5, 1).unwrap();
        let mut a = Mat::zeros(&f, 4, 3);
        let mut b = Mat::zeros(&f, 3, 5);
        for i in 0..4 {
            for j in 0..3 {
                a.set(i, j, f.rand(&mut rng));
            }
        }
        for i in 0..3 {
            for j in 0..5 {
                b.set(i, j, f.rand(&mut rng));
            }
        }
        let c = a.mul(&b);
        for i in 0..4 {
            for j in 0..5 {
                let mut acc = 0u8;
                for l in 0..3 {
                    acc = f.add(acc, f.mul(a.get(i, l), b.get(l, j)));
                }
                assert_eq!(c.get(i, j), acc);
            }
        }
    }

    #[test]
    fn sparse_apply_matches_dense() {
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let f = f3();
        let mut cols = vec![Vec::new(); 6];
        for (_, col) in cols.iter_mut().enumerate() {
            for i in 0..5u32 {
                if rng.gen_bool(0.4) {
                    col.push((i, f.rand_nonzero(&mut rng)));
                }
            }
        }
        let s = SparseMat::from_cols(5, cols);
        let d = s.to_dense(&f);
        let v: Vec<u8> = (0..6).map(|_| f.rand(&mut rng)).collect();
        assert_eq!(s.apply(&f, &v), d.mat_vec(&v));
        // block apply
        let w = 3;
        let mut block = vec![0u8; 6 * w];
        for x in block.iter_mut() {
            *x = f.rand(&mut rng);
        }
        let mut out = vec![0u8; 5 * w];
        s.apply_block(&f, &block, w, &mut out);
        for t in 0..w {
            let col: Vec<u8> = (0..6).map(|j| block[j * w + t]).collect();
            let exp = s.apply(&f, &col);
            for i in 0..5 {
                assert_eq!(out[i * w + t], exp[i]);
            }
        }
    }
}
