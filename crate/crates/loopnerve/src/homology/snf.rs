//! Exact Smith normal form over the integers.
//!
//! The elimination runs over `i128` first and restarts over arbitrary-
//! precision integers if any intermediate value would overflow, so results
//! are exact in all cases. Pivots are chosen by least absolute value to
//! limit entry growth.

use std::cmp::Ordering;

use num::bigint::Sign;
use num::{BigInt, Integer, One, Zero};

/// Integer entry type usable by the elimination: all arithmetic is
/// checked, and `None` aborts the run (triggering the big-integer rerun).
pub trait SnfInt: Clone + Eq + std::fmt::Debug {
    fn zero() -> Self;
    fn one() -> Self;
    fn is_zero(&self) -> bool;
    fn is_negative(&self) -> bool;
    fn cmp_abs(&self, other: &Self) -> Ordering;
    fn checked_neg(&self) -> Option<Self>;
    /// `self - q * b`
    fn checked_sub_mul(&self, q: &Self, b: &Self) -> Option<Self>;
    /// Quotient rounded to the nearest integer (ties toward zero), so the
    /// remainder has magnitude at most `|b| / 2`.
    fn rounded_div(&self, b: &Self) -> Option<Self>;
    /// Whether `b` divides `self` (`b` nonzero).
    fn is_multiple_of(&self, b: &Self) -> Option<bool>;
    fn to_bigint(&self) -> BigInt;
    fn from_i64(v: i64) -> Self;
}

impl SnfInt for i128 {
    fn zero() -> Self {
        0
    }
    fn one() -> Self {
        1
    }
    fn is_zero(&self) -> bool {
        *self == 0
    }
    fn is_negative(&self) -> bool {
        *self < 0
    }
    fn cmp_abs(&self, other: &Self) -> Ordering {
        self.unsigned_abs().cmp(&other.unsigned_abs())
    }
    fn checked_neg(&self) -> Option<Self> {
        i128::checked_neg(*self)
    }
    fn checked_sub_mul(&self, q: &Self, b: &Self) -> Option<Self> {
        self.checked_sub(q.checked_mul(*b)?)
    }
    fn rounded_div(&self, b: &Self) -> Option<Self> {
        let q = self.checked_div(*b)?;
        let r = self.checked_rem(*b)?;
        if r.unsigned_abs() * 2 > b.unsigned_abs() {
            let step = if (r < 0) == (*b < 0) { 1 } else { -1 };
            q.checked_add(step)
        } else {
            Some(q)
        }
    }
    fn is_multiple_of(&self, b: &Self) -> Option<bool> {
        Some(self.checked_rem(*b)? == 0)
    }
    fn to_bigint(&self) -> BigInt {
        BigInt::from(*self)
    }
    fn from_i64(v: i64) -> Self {
        v as i128
    }
}

impl SnfInt for BigInt {
    fn zero() -> Self {
        Zero::zero()
    }
    fn one() -> Self {
        One::one()
    }
    fn is_zero(&self) -> bool {
        Zero::is_zero(self)
    }
    fn is_negative(&self) -> bool {
        self.sign() == Sign::Minus
    }
    fn cmp_abs(&self, other: &Self) -> Ordering {
        self.magnitude().cmp(other.magnitude())
    }
    fn checked_neg(&self) -> Option<Self> {
        Some(-self)
    }
    fn checked_sub_mul(&self, q: &Self, b: &Self) -> Option<Self> {
        Some(self - q * b)
    }
    fn rounded_div(&self, b: &Self) -> Option<Self> {
        let (q, r) = self.div_rem(b);
        if r.magnitude() * 2u32 > *b.magnitude() {
            if r.sign() == b.sign() {
                Some(q + 1)
            } else {
                Some(q - 1)
            }
        } else {
            Some(q)
        }
    }
    fn is_multiple_of(&self, b: &Self) -> Option<bool> {
        Some(Zero::is_zero(&(self % b)))
    }
    fn to_bigint(&self) -> BigInt {
        self.clone()
    }
    fn from_i64(v: i64) -> Self {
        BigInt::from(v)
    }
}

/// Nearest-integer division for big integers; never fails.
pub(crate) fn rounded_div(a: &BigInt, b: &BigInt) -> BigInt {
    SnfInt::rounded_div(a, b).expect("bigint division cannot fail")
}

/// A dense row-major matrix.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DenseMat<E> {
    rows: usize,
    cols: usize,
    data: Vec<E>,
}

impl<E: SnfInt> DenseMat<E> {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self { rows, cols, data: vec![E::zero(); rows * cols] }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            *m.at_mut(i, i) = E::one();
        }
        m
    }

    pub fn from_rows(rows: Vec<Vec<E>>) -> Self {
        let r = rows.len();
        let c = rows.first().map_or(0, Vec::len);
        assert!(rows.iter().all(|row| row.len() == c));
        Self { rows: r, cols: c, data: rows.into_iter().flatten().collect() }
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn at(&self, r: usize, c: usize) -> &E {
        &self.data[r * self.cols + c]
    }

    pub fn at_mut(&mut self, r: usize, c: usize) -> &mut E {
        &mut self.data[r * self.cols + c]
    }

    pub fn column(&self, c: usize) -> Vec<E> {
        (0..self.rows).map(|r| self.at(r, c).clone()).collect()
    }

    fn swap_rows(&mut self, a: usize, b: usize) {
        if a != b {
            for c in 0..self.cols {
                self.data.swap(a * self.cols + c, b * self.cols + c);
            }
        }
    }

    fn swap_cols(&mut self, a: usize, b: usize) {
        if a != b {
            for r in 0..self.rows {
                self.data.swap(r * self.cols + a, r * self.cols + b);
            }
        }
    }

    fn negate_row(&mut self, r: usize) -> Option<()> {
        for c in 0..self.cols {
            let v = self.at(r, c).checked_neg()?;
            *self.at_mut(r, c) = v;
        }
        Some(())
    }

    fn negate_col(&mut self, c: usize) -> Option<()> {
        for r in 0..self.rows {
            let v = self.at(r, c).checked_neg()?;
            *self.at_mut(r, c) = v;
        }
        Some(())
    }

    /// row[dst] -= q * row[src]
    fn row_sub_mul(&mut self, dst: usize, src: usize, q: &E) -> Option<()> {
        for c in 0..self.cols {
            let v = self.at(dst, c).checked_sub_mul(q, self.at(src, c))?;
            *self.at_mut(dst, c) = v;
        }
        Some(())
    }

    /// col[dst] -= q * col[src]
    fn col_sub_mul(&mut self, dst: usize, src: usize, q: &E) -> Option<()> {
        for r in 0..self.rows {
            let v = self.at(r, dst).checked_sub_mul(q, self.at(r, src))?;
            *self.at_mut(r, dst) = v;
        }
        Some(())
    }

    /// col[dst] += q * col[src]
    fn col_add_mul(&mut self, dst: usize, src: usize, q: &E) -> Option<()> {
        let neg = q.checked_neg()?;
        self.col_sub_mul(dst, src, &neg)
    }

    /// row[dst] += q * row[src]
    fn row_add_mul(&mut self, dst: usize, src: usize, q: &E) -> Option<()> {
        let neg = q.checked_neg()?;
        self.row_sub_mul(dst, src, &neg)
    }

    pub fn mul(&self, other: &DenseMat<E>) -> Option<DenseMat<E>> {
        assert_eq!(self.cols, other.rows);
        let mut out = DenseMat::<E>::zeros(self.rows, other.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = self.at(i, k);
                if a.is_zero() {
                    continue;
                }
                for j in 0..other.cols {
                    let b = other.at(k, j);
                    if b.is_zero() {
                        continue;
                    }
                    let neg_a = a.checked_neg()?;
                    let v = out.at(i, j).checked_sub_mul(&neg_a, b)?;
                    *out.at_mut(i, j) = v;
                }
            }
        }
        Some(out)
    }

    pub fn map_to_bigint(&self) -> DenseMat<BigInt> {
        DenseMat {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().map(SnfInt::to_bigint).collect(),
        }
    }
}

impl DenseMat<BigInt> {
    pub fn to_i128(&self) -> Option<DenseMat<i128>> {
        use num::ToPrimitive;
        let data: Option<Vec<i128>> = self.data.iter().map(|v| v.to_i128()).collect();
        Some(DenseMat { rows: self.rows, cols: self.cols, data: data? })
    }
}

struct Engine<E> {
    m: DenseMat<E>,
    u: Option<DenseMat<E>>,
    u_inv: Option<DenseMat<E>>,
    v: Option<DenseMat<E>>,
    v_inv: Option<DenseMat<E>>,
}

impl<E: SnfInt> Engine<E> {
    fn new(m: DenseMat<E>, transforms: bool) -> Self {
        let (rows, cols) = (m.rows(), m.cols());
        let mk = |n: usize| if transforms { Some(DenseMat::identity(n)) } else { None };
        Engine { m, u: mk(rows), u_inv: mk(rows), v: mk(cols), v_inv: mk(cols) }
    }

    fn swap_rows(&mut self, a: usize, b: usize) {
        self.m.swap_rows(a, b);
        if let Some(u) = &mut self.u {
            u.swap_rows(a, b);
        }
        if let Some(ui) = &mut self.u_inv {
            ui.swap_cols(a, b);
        }
    }

    fn swap_cols(&mut self, a: usize, b: usize) {
        self.m.swap_cols(a, b);
        if let Some(v) = &mut self.v {
            v.swap_cols(a, b);
        }
        if let Some(vi) = &mut self.v_inv {
            vi.swap_rows(a, b);
        }
    }

    fn row_sub_mul(&mut self, dst: usize, src: usize, q: &E) -> Option<()> {
        self.m.row_sub_mul(dst, src, q)?;
        if let Some(u) = &mut self.u {
            u.row_sub_mul(dst, src, q)?;
        }
        if let Some(ui) = &mut self.u_inv {
            ui.col_add_mul(src, dst, q)?;
        }
        Some(())
    }

    fn col_sub_mul(&mut self, dst: usize, src: usize, q: &E) -> Option<()> {
        self.m.col_sub_mul(dst, src, q)?;
        if let Some(v) = &mut self.v {
            v.col_sub_mul(dst, src, q)?;
        }
        if let Some(vi) = &mut self.v_inv {
            vi.row_add_mul(src, dst, q)?;
        }
        Some(())
    }

    fn negate_row(&mut self, r: usize) -> Option<()> {
        self.m.negate_row(r)?;
        if let Some(u) = &mut self.u {
            u.negate_row(r)?;
        }
        if let Some(ui) = &mut self.u_inv {
            ui.negate_col(r)?;
        }
        Some(())
    }

    /// Position of a nonzero entry of least absolute value in the
    /// submatrix starting at (t, t).
    fn find_pivot(&self, t: usize) -> Option<(usize, usize)> {
        let mut best: Option<(usize, usize)> = None;
        for i in t..self.m.rows() {
            for j in t..self.m.cols() {
                let e = self.m.at(i, j);
                if e.is_zero() {
                    continue;
                }
                match best {
                    None => best = Some((i, j)),
                    Some((bi, bj)) => {
                        if e.cmp_abs(self.m.at(bi, bj)) == Ordering::Less {
                            best = Some((i, j));
                        }
                    }
                }
            }
        }
        best
    }

    fn run(&mut self) -> Option<usize> {
        let steps = self.m.rows().min(self.m.cols());
        let mut t = 0;
        while t < steps {
            let Some((pi, pj)) = self.find_pivot(t) else { break };
            self.swap_rows(t, pi);
            self.swap_cols(t, pj);
            'reduce: loop {
                // clear the pivot column
                for i in t + 1..self.m.rows() {
                    if self.m.at(i, t).is_zero() {
                        continue;
                    }
                    let q = self.m.at(i, t).rounded_div(self.m.at(t, t))?;
                    if !q.is_zero() {
                        self.row_sub_mul(i, t, &q)?;
                    }
                    if !self.m.at(i, t).is_zero() {
                        // remainder is strictly smaller; promote it
                        self.swap_rows(t, i);
                        continue 'reduce;
                    }
                }
                // clear the pivot row
                for j in t + 1..self.m.cols() {
                    if self.m.at(t, j).is_zero() {
                        continue;
                    }
                    let q = self.m.at(t, j).rounded_div(self.m.at(t, t))?;
                    if !q.is_zero() {
                        self.col_sub_mul(j, t, &q)?;
                    }
                    if !self.m.at(t, j).is_zero() {
                        self.swap_cols(t, j);
                        continue 'reduce;
                    }
                }
                // enforce divisibility of the remaining submatrix
                let mut fix = None;
                'scan: for i in t + 1..self.m.rows() {
                    for j in t + 1..self.m.cols() {
                        if !self.m.at(i, j).is_multiple_of(self.m.at(t, t))? {
                            fix = Some(i);
                            break 'scan;
                        }
                    }
                }
                match fix {
                    Some(i) => {
                        // fold row i into row t and keep reducing
                        let minus_one = E::from_i64(-1);
                        self.row_sub_mul(t, i, &minus_one)?;
                        continue 'reduce;
                    }
                    None => break 'reduce,
                }
            }
            if self.m.at(t, t).is_negative() {
                self.negate_row(t)?;
            }
            t += 1;
        }
        Some(t)
    }
}

/// Smith normal form with unimodular transforms: `u * m * v` is diagonal
/// with a divisibility chain, and the inverses of `u` and `v` are
/// returned alongside.
#[derive(Clone, Debug)]
pub struct SmithForm {
    pub diag: Vec<BigInt>,
    pub rank: usize,
    pub u: DenseMat<BigInt>,
    pub v: DenseMat<BigInt>,
    pub u_inv: DenseMat<BigInt>,
    pub v_inv: DenseMat<BigInt>,
}

fn run_engine<E: SnfInt>(
    m: DenseMat<E>,
    transforms: bool,
) -> Option<(Vec<E>, usize, Engine<E>)> {
    let mut engine = Engine::new(m, transforms);
    let rank = engine.run()?;
    let diag: Vec<E> = (0..rank).map(|i| engine.m.at(i, i).clone()).collect();
    Some((diag, rank, engine))
}

/// Full Smith normal form of an integer matrix.
pub fn smith_normal_form(m: &DenseMat<BigInt>) -> SmithForm {
    let result = m
        .to_i128()
        .and_then(|mi| run_engine::<i128>(mi, true))
        .map(|(diag, rank, engine)| SmithForm {
            diag: diag.iter().map(SnfInt::to_bigint).collect(),
            rank,
            u: engine.u.as_ref().unwrap().map_to_bigint(),
            v: engine.v.as_ref().unwrap().map_to_bigint(),
            u_inv: engine.u_inv.as_ref().unwrap().map_to_bigint(),
            v_inv: engine.v_inv.as_ref().unwrap().map_to_bigint(),
        });
    let form = match result {
        Some(form) => form,
        None => {
            let (diag, rank, engine) =
                run_engine::<BigInt>(m.clone(), true).expect("bigint arithmetic cannot overflow");
            SmithForm {
                diag,
                rank,
                u: engine.u.unwrap(),
                v: engine.v.unwrap(),
                u_inv: engine.u_inv.unwrap(),
                v_inv: engine.v_inv.unwrap(),
            }
        }
    };
    #[cfg(debug_assertions)]
    verify_smith_form(m, &form);
    form
}

/// Diagonal entries and rank only; no transforms are accumulated.
pub fn smith_diagonal(m: &DenseMat<BigInt>) -> (Vec<BigInt>, usize) {
    if let Some(mi) = m.to_i128() {
        if let Some((diag, rank, _)) = run_engine::<i128>(mi, false) {
            return (diag.iter().map(SnfInt::to_bigint).collect(), rank);
        }
    }
    let (diag, rank, _) =
        run_engine::<BigInt>(m.clone(), false).expect("bigint arithmetic cannot overflow");
    (diag, rank)
}

#[cfg(debug_assertions)]
fn verify_smith_form(m: &DenseMat<BigInt>, form: &SmithForm) {
    use num::Signed;
    // u * m * v equals the diagonal matrix
    let umv = form.u.mul(m).unwrap().mul(&form.v).unwrap();
    for i in 0..umv.rows() {
        for j in 0..umv.cols() {
            let want: BigInt =
                if i == j && i < form.rank { form.diag[i].clone() } else { Zero::zero() };
            assert_eq!(*umv.at(i, j), want, "smith form residue at ({i},{j})");
        }
    }
    // transforms are mutually inverse over the integers, hence unimodular
    assert_eq!(form.u.mul(&form.u_inv).unwrap(), DenseMat::identity(form.u.rows()));
    assert_eq!(form.v.mul(&form.v_inv).unwrap(), DenseMat::identity(form.v.rows()));
    // divisibility chain
    for w in form.diag.windows(2) {
        assert!(
            Zero::is_zero(&(&w[1] % &w[0])),
            "divisibility chain broken: {:?}",
            form.diag
        );
    }
    assert!(form.diag.iter().all(|d| d.is_positive()));
}
