//! Exact rational scalars, discrete valuations, and Smith-form linear
//! algebra over a discrete valuation ring.
//!
//! All lattice computations in this crate run over the valuation ring
//! `S = { x in K : val(x) >= 0 }` of a field `K` carrying a discrete
//! valuation. The field and its valuation are bundled behind the
//! [`ValuedField`] trait; the base instance is `Q` with the `p`-adic
//! valuation, number-field instances live in [`crate::fields`].

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};
use std::cmp::Ordering;
use std::ops::Add;

use crate::{Error, Result};

pub type Rat = BigRational;

pub fn rat(n: i64) -> Rat {
    Rat::from_integer(BigInt::from(n))
}

pub fn ratio(n: i64, d: i64) -> Rat {
    Rat::new(BigInt::from(n), BigInt::from(d))
}

/// A valuation value: an integer or `+infinity` (the valuation of 0).
#[derive(Clone, Copy, PartialEq, Eq, Debug, Hash)]
pub enum Val {
    Finite(i64),
    Infinity,
}

impl Val {
    pub fn finite(self) -> Option<i64> {
        match self {
            Val::Finite(v) => Some(v),
            Val::Infinity => None,
        }
    }

    pub fn is_infinite(self) -> bool {
        matches!(self, Val::Infinity)
    }
}

impl PartialOrd for Val {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Val {
    fn cmp(&self, other: &Self) -> Ordering {
        match (self, other) {
            (Val::Infinity, Val::Infinity) => Ordering::Equal,
            (Val::Infinity, _) => Ordering::Greater,
            (_, Val::Infinity) => Ordering::Less,
            (Val::Finite(a), Val::Finite(b)) => a.cmp(b),
        }
    }
}

impl Add for Val {
    type Output = Val;
    fn add(self, rhs: Val) -> Val {
        match (self, rhs) {
            (Val::Finite(a), Val::Finite(b)) => Val::Finite(a + b),
            _ => Val::Infinity,
        }
    }
}

impl std::fmt::Display for Val {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Val::Finite(v) => write!(f, "{v}"),
            Val::Infinity => write!(f, "+inf"),
        }
    }
}

/// A checked prime number.
#[derive(Clone, Copy, PartialEq, Eq, Debug, Hash)]
pub struct Prime(u64);

impl Prime {
    pub fn new(p: u64) -> Result<Prime> {
        if is_prime(p) {
            Ok(Prime(p))
        } else {
            Err(Error::Usage(format!("{p} is not prime")))
        }
    }

    /// An odd prime `p >= 3`, the standing assumption of every construction here.
    pub fn odd(p: u64) -> Result<Prime> {
        if p >= 3 && is_prime(p) {
            Ok(Prime(p))
        } else {
            Err(Error::Usage(format!("p must be an odd prime, got {p}")))
        }
    }

    pub fn get(self) -> u64 {
        self.0
    }
}

fn is_prime(p: u64) -> bool {
    if p < 2 {
        return false;
    }
    let mut d = 2u64;
    while d * d <= p {
        if p % d == 0 {
            return false;
        }
        d += 1;
    }
    true
}

pub fn val_p_int(x: &BigInt, p: u64) -> Val {
    if x.is_zero() {
        return Val::Infinity;
    }
    let p = BigInt::from(p);
    let mut x = x.abs();
    let mut v = 0i64;
    loop {
        let (q, r) = num_integer::Integer::div_rem(&x, &p);
        if r.is_zero() {
            v += 1;
            x = q;
        } else {
            return Val::Finite(v);
        }
    }
}

/// Exponent of `p` in `x`; `+infinity` exactly for `x = 0`.
pub fn val_p(x: &Rat, p: Prime) -> Val {
    match (val_p_int(x.numer(), p.0), val_p_int(x.denom(), p.0)) {
        (Val::Infinity, _) => Val::Infinity,
        (Val::Finite(a), Val::Finite(b)) => Val::Finite(a - b),
        _ => unreachable!("denominator is nonzero"),
    }
}

/// A field with exact arithmetic and a distinguished discrete valuation.
///
/// Implementations guarantee `val(xy) = val(x) + val(y)`,
/// `val(x + y) >= min(val x, val y)` and `val(uniformizer_pow(k)) = k`.
pub trait ValuedField {
    type Elem: Clone + PartialEq + std::fmt::Debug;

    fn zero(&self) -> Self::Elem;
    fn one(&self) -> Self::Elem;
    fn from_i64(&self, n: i64) -> Self::Elem;
    fn add(&self, a: &Self::Elem, b: &Self::Elem) -> Self::Elem;
    fn sub(&self, a: &Self::Elem, b: &Self::Elem) -> Self::Elem;
    fn neg(&self, a: &Self::Elem) -> Self::Elem;
    fn mul(&self, a: &Self::Elem, b: &Self::Elem) -> Self::Elem;
    fn inv(&self, a: &Self::Elem) -> Option<Self::Elem>;
    fn is_zero(&self, a: &Self::Elem) -> bool;
    fn val(&self, a: &Self::Elem) -> Val;
    fn uniformizer_pow(&self, k: i64) -> Self::Elem;

    fn div(&self, a: &Self::Elem, b: &Self::Elem) -> Self::Elem {
        self.mul(a, &self.inv(b).expect("division by zero"))
    }

    /// Membership in the valuation ring `S`.
    fn in_ring(&self, a: &Self::Elem) -> bool {
        self.val(a) >= Val::Finite(0)
    }
}

impl<F: ValuedField> ValuedField for &F {
    type Elem = F::Elem;

    fn zero(&self) -> Self::Elem {
        (*self).zero()
    }
    fn one(&self) -> Self::Elem {
        (*self).one()
    }
    fn from_i64(&self, n: i64) -> Self::Elem {
        (*self).from_i64(n)
    }
    fn add(&self, a: &Self::Elem, b: &Self::Elem) -> Self::Elem {
        (*self).add(a, b)
    }
    fn sub(&self, a: &Self::Elem, b: &Self::Elem) -> Self::Elem {
        (*self).sub(a, b)
    }
    fn neg(&self, a: &Self::Elem) -> Self::Elem {
        (*self).neg(a)
    }
    fn mul(&self, a: &Self::Elem, b: &Self::Elem) -> Self::Elem {
        (*self).mul(a, b)
    }
    fn inv(&self, a: &Self::Elem) -> Option<Self::Elem> {
        (*self).inv(a)
    }
    fn is_zero(&self, a: &Self::Elem) -> bool {
        (*self).is_zero(a)
    }
    fn val(&self, a: &Self::Elem) -> Val {
        (*self).val(a)
    }
    fn uniformizer_pow(&self, k: i64) -> Self::Elem {
        (*self).uniformizer_pow(k)
    }
}

/// `Q` with the `p`-adic valuation; the valuation ring is `Z_(p)`.
#[derive(Clone, Copy, Debug)]
pub struct LocalQ {
    pub p: Prime,
}

impl LocalQ {
    pub fn new(p: Prime) -> Self {
        LocalQ { p }
    }
}

impl ValuedField for LocalQ {
    type Elem = Rat;

    fn zero(&self) -> Rat {
        Rat::zero()
    }
    fn one(&self) -> Rat {
        Rat::one()
    }
    fn from_i64(&self, n: i64) -> Rat {
        rat(n)
    }
    fn add(&self, a: &Rat, b: &Rat) -> Rat {
        a + b
    }
    fn sub(&self, a: &Rat, b: &Rat) -> Rat {
        a - b
    }
    fn neg(&self, a: &Rat) -> Rat {
        -a
    }
    fn mul(&self, a: &Rat, b: &Rat) -> Rat {
        a * b
    }
    fn inv(&self, a: &Rat) -> Option<Rat> {
        if a.is_zero() {
            None
        } else {
            Some(a.recip())
        }
    }
    fn is_zero(&self, a: &Rat) -> bool {
        a.is_zero()
    }
    fn val(&self, a: &Rat) -> Val {
        val_p(a, self.p)
    }
    fn uniformizer_pow(&self, k: i64) -> Rat {
        let p = BigInt::from(self.p.get());
        if k >= 0 {
            Rat::from_integer(p.pow(k as u32))
        } else {
            Rat::new(BigInt::one(), p.pow((-k) as u32))
        }
    }
}

/// Dense row-major matrix.
#[derive(Clone, PartialEq, Debug)]
pub struct Mat<T> {
    rows: usize,
    cols: usize,
    data: Vec<T>,
}

impl<T: Clone> Mat<T> {
    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> T) -> Self {
        let mut data = Vec::with_capacity(rows * cols);
        for r in 0..rows {
            for c in 0..cols {
                data.push(f(r, c));
            }
        }
        Mat { rows, cols, data }
    }

    pub fn from_rows(rows: Vec<Vec<T>>) -> Self {
        let r = rows.len();
        assert!(r > 0, "matrix needs at least one row");
        let c = rows[0].len();
        assert!(rows.iter().all(|row| row.len() == c), "ragged rows");
        Mat {
            rows: r,
            cols: c,
            data: rows.into_iter().flatten().collect(),
        }
    }

    pub fn rows(&self) -> usize {
        self.rows
    }
    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn at(&self, r: usize, c: usize) -> &T {
        &self.data[r * self.cols + c]
    }

    pub fn at_mut(&mut self, r: usize, c: usize) -> &mut T {
        &mut self.data[r * self.cols + c]
    }

    pub fn row(&self, r: usize) -> &[T] {
        &self.data[r * self.cols..(r + 1) * self.cols]
    }

    pub fn transpose(&self) -> Mat<T> {
        Mat::from_fn(self.cols, self.rows, |r, c| self.at(c, r).clone())
    }

    pub fn swap_rows(&mut self, a: usize, b: usize) {
        if a == b {
            return;
        }
        for c in 0..self.cols {
            self.data.swap(a * self.cols + c, b * self.cols + c);
        }
    }

    pub fn swap_cols(&mut self, a: usize, b: usize) {
        if a == b {
            return;
        }
        for r in 0..self.rows {
            self.data.swap(r * self.cols + a, r * self.cols + b);
        }
    }

    /// Entries flattened row-major.
    pub fn flatten(&self) -> Vec<T> {
        self.data.clone()
    }
}

pub fn mat_zero<F: ValuedField>(f: &F, rows: usize, cols: usize) -> Mat<F::Elem> {
    Mat::from_fn(rows, cols, |_, _| f.zero())
}

pub fn mat_identity<F: ValuedField>(f: &F, n: usize) -> Mat<F::Elem> {
    Mat::from_fn(n, n, |r, c| if r == c { f.one() } else { f.zero() })
}

pub fn mat_add<F: ValuedField>(f: &F, a: &Mat<F::Elem>, b: &Mat<F::Elem>) -> Mat<F::Elem> {
    assert_eq!((a.rows, a.cols), (b.rows, b.cols));
    Mat::from_fn(a.rows, a.cols, |r, c| f.add(a.at(r, c), b.at(r, c)))
}

pub fn mat_sub<F: ValuedField>(f: &F, a: &Mat<F::Elem>, b: &Mat<F::Elem>) -> Mat<F::Elem> {
    assert_eq!((a.rows, a.cols), (b.rows, b.cols));
    Mat::from_fn(a.rows, a.cols, |r, c| f.sub(a.at(r, c), b.at(r, c)))
}

pub fn mat_scale<F: ValuedField>(f: &F, a: &Mat<F::Elem>, s: &F::Elem) -> Mat<F::Elem> {
    Mat::from_fn(a.rows, a.cols, |r, c| f.mul(a.at(r, c), s))
}

pub fn mat_mul<F: ValuedField>(f: &F, a: &Mat<F::Elem>, b: &Mat<F::Elem>) -> Mat<F::Elem> {
    assert_eq!(a.cols, b.rows, "dimension mismatch in matrix product");
    Mat::from_fn(a.rows, b.cols, |r, c| {
        let mut acc = f.zero();
        for k in 0..a.cols {
            if !f.is_zero(a.at(r, k)) && !f.is_zero(b.at(k, c)) {
                acc = f.add(&acc, &f.mul(a.at(r, k), b.at(k, c)));
            }
        }
        acc
    })
}

pub fn mat_pow<F: ValuedField>(f: &F, a: &Mat<F::Elem>, k: u32) -> Mat<F::Elem> {
    assert_eq!(a.rows, a.cols);
    let mut acc = mat_identity(f, a.rows);
    for _ in 0..k {
        acc = mat_mul(f, &acc, a);
    }
    acc
}

pub fn row_mat_apply<F: ValuedField>(f: &F, x: &[F::Elem], a: &Mat<F::Elem>) -> Vec<F::Elem> {
    assert_eq!(x.len(), a.rows);
    (0..a.cols)
        .map(|c| {
            let mut acc = f.zero();
            for r in 0..a.rows {
                acc = f.add(&acc, &f.mul(&x[r], a.at(r, c)));
            }
            acc
        })
        .collect()
}

/// Smith-form data of a matrix over the valuation ring.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SmithReport {
    /// Valuations of the nonzero diagonal entries of a Smith form, ascending.
    pub elementary_divisor_valuations: Vec<i64>,
    pub rank: usize,
    /// Zero rows plus zero columns beyond the diagonalized square part.
    pub free_rank_defect: usize,
}

impl SmithReport {
    pub fn total_length(&self) -> i64 {
        self.elementary_divisor_valuations.iter().sum()
    }
}

/// Shape of a finitely generated module over the valuation ring:
/// a free part and cyclic torsion factors `S/s^e` with `e >= 1`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ModuleShape {
    pub free_rank: usize,
    /// Annihilator exponents of the nontrivial cyclic factors, ascending.
    pub torsion: Vec<i64>,
}

impl ModuleShape {
    pub fn length(&self) -> Val {
        if self.free_rank > 0 {
            Val::Infinity
        } else {
            Val::Finite(self.torsion.iter().sum())
        }
    }

    pub fn zero() -> Self {
        ModuleShape {
            free_rank: 0,
            torsion: Vec::new(),
        }
    }
}

impl std::fmt::Display for ModuleShape {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let mut parts: Vec<String> = Vec::new();
        if self.free_rank > 0 {
            parts.push(format!("S^{}", self.free_rank));
        }
        for e in &self.torsion {
            parts.push(format!("S/s^{e}"));
        }
        if parts.is_empty() {
            write!(f, "0")
        } else {
            write!(f, "{}", parts.join(" + "))
        }
    }
}

fn check_entries_in_ring<F: ValuedField>(f: &F, m: &Mat<F::Elem>) -> Result<()> {
    for r in 0..m.rows() {
        for c in 0..m.cols() {
            if !f.in_ring(m.at(r, c)) {
                return Err(Error::Domain(format!(
                    "matrix entry at ({r},{c}) has negative valuation"
                )));
            }
        }
    }
    Ok(())
}

/// Diagonalize `a` over the valuation ring via unimodular row/column
/// operations, pivoting on a minimal-valuation entry with ties broken by
/// lowest (row, column) index. Returns `(d, u, v)` with `u * a * v = d`
/// when transforms are requested; `u`, `v` are invertible over `S`.
fn smith_diagonalize<F: ValuedField>(
    f: &F,
    mut a: Mat<F::Elem>,
    track: bool,
) -> (Mat<F::Elem>, Option<Mat<F::Elem>>, Option<Mat<F::Elem>>) {
    let (m, n) = (a.rows(), a.cols());
    let mut u = if track {
        Some(mat_identity(f, m))
    } else {
        None
    };
    let mut v = if track {
        Some(mat_identity(f, n))
    } else {
        None
    };

    for k in 0..m.min(n) {
        // select pivot
        let mut best: Option<(usize, usize, i64)> = None;
        for r in k..m {
            for c in k..n {
                if let Val::Finite(w) = f.val(a.at(r, c)) {
                    if best.map_or(true, |(_, _, bw)| w < bw) {
                        best = Some((r, c, w));
                    }
                }
            }
        }
        let Some((pr, pc, _)) = best else { break };
        a.swap_rows(k, pr);
        a.swap_cols(k, pc);
        if let Some(u) = u.as_mut() {
            u.swap_rows(k, pr);
        }
        if let Some(v) = v.as_mut() {
            v.swap_cols(k, pc);
        }

        let pivot = a.at(k, k).clone();
        // clear column k; factors lie in S because the pivot has minimal valuation
        for r in k + 1..m {
            if f.is_zero(a.at(r, k)) {
                continue;
            }
            let factor = f.div(a.at(r, k), &pivot);
            for c in k..n {
                let x = f.sub(a.at(r, c), &f.mul(&factor, a.at(k, c)));
                *a.at_mut(r, c) = x;
            }
            if let Some(u) = u.as_mut() {
                for c in 0..m {
                    let x = f.sub(u.at(r, c), &f.mul(&factor, u.at(k, c)));
                    *u.at_mut(r, c) = x;
                }
            }
        }
        // clear row k
        for c in k + 1..n {
            if f.is_zero(a.at(k, c)) {
                continue;
            }
            let factor = f.div(a.at(k, c), &pivot);
            for r in k..m {
                let x = f.sub(a.at(r, c), &f.mul(&factor, a.at(r, k)));
                *a.at_mut(r, c) = x;
            }
            if let Some(v) = v.as_mut() {
                for r in 0..n {
                    let x = f.sub(v.at(r, c), &f.mul(&factor, v.at(r, k)));
                    *v.at_mut(r, c) = x;
                }
            }
        }
    }
    (a, u, v)
}

/// Smith form valuations of a matrix with entries in `S`.
pub fn smith_over_dvr<F: ValuedField>(f: &F, m: &Mat<F::Elem>) -> Result<SmithReport> {
    check_entries_in_ring(f, m)?;
    let (d, _, _) = smith_diagonalize(f, m.clone(), false);
    let mut divisors = Vec::new();
    for k in 0..d.rows().min(d.cols()) {
        match f.val(d.at(k, k)) {
            Val::Finite(w) => divisors.push(w),
            Val::Infinity => break,
        }
    }
    let rank = divisors.len();
    Ok(SmithReport {
        free_rank_defect: (d.rows() - rank) + (d.cols() - rank),
        elementary_divisor_valuations: divisors,
        rank,
    })
}

/// Jordan-Hoelder length of `coker(m : S^cols -> S^rows)`;
/// `+infinity` when a free summand survives.
pub fn module_length<F: ValuedField>(f: &F, m: &Mat<F::Elem>) -> Result<Val> {
    let report = smith_over_dvr(f, m)?;
    if report.rank < m.rows() {
        Ok(Val::Infinity)
    } else {
        Ok(Val::Finite(report.total_length()))
    }
}

/// Solve `a x = b` with `x` over the valuation ring, or report that no
/// such solution exists. Solvability is decided via the Smith form.
pub fn solve_over_dvr<F: ValuedField>(
    f: &F,
    a: &Mat<F::Elem>,
    b: &[F::Elem],
) -> Result<Option<Vec<F::Elem>>> {
    if b.len() != a.rows() {
        return Err(Error::Usage(format!(
            "solve_over_dvr: rhs length {} does not match {} rows",
            b.len(),
            a.rows()
        )));
    }
    check_entries_in_ring(f, a)?;
    for (i, x) in b.iter().enumerate() {
        if !f.in_ring(x) {
            return Err(Error::Domain(format!(
                "rhs entry {i} has negative valuation"
            )));
        }
    }
    let (d, u, v) = smith_diagonalize(f, a.clone(), true);
    let (u, v) = (u.unwrap(), v.unwrap());
    let c = row_mat_apply(f, b, &u.transpose());
    let mut y = vec![f.zero(); a.cols()];
    for i in 0..a.rows() {
        let di = if i < a.cols() { Some(d.at(i, i)) } else { None };
        match di {
            Some(di) if !f.is_zero(di) => {
                if f.is_zero(&c[i]) {
                    continue;
                }
                let q = f.div(&c[i], di);
                if !f.in_ring(&q) {
                    return Ok(None);
                }
                y[i] = q;
            }
            _ => {
                if !f.is_zero(&c[i]) {
                    return Ok(None);
                }
            }
        }
    }
    Ok(Some(row_mat_apply(f, &y, &v.transpose())))
}

/// Rows form an `S`-basis of the saturated lattice `{ x : x a = 0 }`.
pub fn left_kernel_lattice<F: ValuedField>(f: &F, a: &Mat<F::Elem>) -> Mat<F::Elem> {
    let (d, u, _) = smith_diagonalize(f, a.clone(), true);
    let u = u.unwrap();
    let mut rank = 0;
    for k in 0..d.rows().min(d.cols()) {
        if !f.is_zero(d.at(k, k)) {
            rank += 1;
        }
    }
    Mat::from_fn(d.rows() - rank, a.rows(), |r, c| u.at(rank + r, c).clone())
}

/// Exact linear solver over the plain field (valuations ignored), with the
/// elimination of a fixed basis matrix precomputed for repeated solves.
/// Columns of `basis` are the basis vectors; `solve` finds coordinates.
pub struct LinSolver<F: ValuedField> {
    f: F,
    ops: Mat<F::Elem>,
    ncols: usize,
}

impl<F: ValuedField> LinSolver<F> {
    pub fn new(f: F, basis: Mat<F::Elem>) -> Result<Self> {
        let (m, n) = (basis.rows(), basis.cols());
        if m < n {
            return Err(Error::Usage(
                "basis matrix has more columns than rows".into(),
            ));
        }
        let mut a = basis;
        let mut ops = mat_identity(&f, m);
        for col in 0..n {
            let pivot_row = (col..m).find(|&r| !f.is_zero(a.at(r, col)));
            let Some(pr) = pivot_row else {
                return Err(Error::Domain("basis vectors are linearly dependent".into()));
            };
            a.swap_rows(col, pr);
            ops.swap_rows(col, pr);
            let inv = f.inv(a.at(col, col)).unwrap();
            for c in 0..n {
                let x = f.mul(a.at(col, c), &inv);
                *a.at_mut(col, c) = x;
            }
            for c in 0..m {
                let x = f.mul(ops.at(col, c), &inv);
                *ops.at_mut(col, c) = x;
            }
            for r in 0..m {
                if r == col || f.is_zero(a.at(r, col)) {
                    continue;
                }
                let factor = a.at(r, col).clone();
                for c in 0..n {
                    let x = f.sub(a.at(r, c), &f.mul(&factor, a.at(col, c)));
                    *a.at_mut(r, c) = x;
                }
                for c in 0..m {
                    let x = f.sub(ops.at(r, c), &f.mul(&factor, ops.at(col, c)));
                    *ops.at_mut(r, c) = x;
                }
            }
        }
        Ok(LinSolver { f, ops, ncols: n })
    }

    /// Coordinates of `target` over the basis, or `None` if outside the span.
    pub fn solve(&self, target: &[F::Elem]) -> Option<Vec<F::Elem>> {
        let f = &self.f;
        let m = self.ops.rows();
        assert_eq!(target.len(), m);
        let w = row_mat_apply(f, target, &self.ops.transpose());
        if w.iter().skip(self.ncols).any(|wi| !f.is_zero(wi)) {
            return None;
        }
        Some(w[..self.ncols].to_vec())
    }
}

/// Incremental span with dependency tracking: inserting a dependent row
/// reports its coordinates over the previously inserted rows.
pub struct IncrementalSpan<F: ValuedField> {
    f: F,
    dim: usize,
    rows: Vec<Vec<F::Elem>>,
    combos: Vec<Vec<F::Elem>>,
    pivots: Vec<usize>,
    inserted: usize,
}

pub enum SpanInsert<E> {
    Independent,
    /// Coordinates over the previously inserted rows.
    Dependent(Vec<E>),
}

impl<F: ValuedField> IncrementalSpan<F> {
    pub fn new(f: F, dim: usize) -> Self {
        IncrementalSpan {
            f,
            dim,
            rows: Vec::new(),
            combos: Vec::new(),
            pivots: Vec::new(),
            inserted: 0,
        }
    }

    pub fn rank(&self) -> usize {
        self.rows.len()
    }

    pub fn insert(&mut self, row: Vec<F::Elem>) -> SpanInsert<F::Elem> {
        let f = &self.f;
        assert_eq!(row.len(), self.dim);
        let mut r = row;
        let mut combo = vec![f.zero(); self.inserted + 1];
        combo[self.inserted] = f.one();
        for (idx, &pc) in self.pivots.iter().enumerate() {
            if f.is_zero(&r[pc]) {
                continue;
            }
            let factor = r[pc].clone();
            for c in 0..self.dim {
                let x = f.sub(&r[c], &f.mul(&factor, &self.rows[idx][c]));
                r[c] = x;
            }
            for c in 0..self.combos[idx].len() {
                let x = f.sub(&combo[c], &f.mul(&factor, &self.combos[idx][c]));
                combo[c] = x;
            }
        }
        self.inserted += 1;
        match (0..self.dim).find(|&c| !f.is_zero(&r[c])) {
            None => {
                combo.pop();
                SpanInsert::Dependent(combo.into_iter().map(|x| f.neg(&x)).collect())
            }
            Some(pc) => {
                let inv = f.inv(&r[pc]).unwrap();
                for c in 0..self.dim {
                    r[c] = f.mul(&r[c], &inv);
                }
                for c in 0..combo.len() {
                    combo[c] = f.mul(&combo[c], &inv);
                }
                self.rows.push(r);
                self.combos.push(combo);
                self.pivots.push(pc);
                SpanInsert::Independent
            }
        }
    }
}

/// Express each row of `vectors` as a field-linear combination of the rows
/// of `basis`; `None` if some row lies outside the span.
pub fn express_in_rows<F: ValuedField>(
    f: &F,
    vectors: &Mat<F::Elem>,
    basis: &Mat<F::Elem>,
) -> Result<Option<Mat<F::Elem>>> {
    let solver = LinSolver::new(f, basis.transpose())?;
    let mut rows = Vec::with_capacity(vectors.rows());
    for r in 0..vectors.rows() {
        match solver.solve(vectors.row(r)) {
            Some(c) => rows.push(c),
            None => return Ok(None),
        }
    }
    Ok(Some(Mat::from_rows(rows)))
}

/// Shape of `(lattice spanned by rows of `sup`) / (lattice spanned by rows of `sub`)`.
/// Fails if `sub` is not contained in the `sup`-lattice.
pub fn lattice_quotient<F: ValuedField>(
    f: &F,
    sub: &Mat<F::Elem>,
    sup: &Mat<F::Elem>,
) -> Result<ModuleShape> {
    let c = express_in_rows(f, sub, sup)?.ok_or_else(|| {
        Error::Domain("sub-lattice is not contained in the span of the super-lattice".into())
    })?;
    check_entries_in_ring(f, &c)
        .map_err(|_| Error::Domain("sub-lattice is not contained in the super-lattice".into()))?;
    let report = smith_over_dvr(f, &c)?;
    Ok(ModuleShape {
        free_rank: sup.rows() - report.rank,
        torsion: report
            .elementary_divisor_valuations
            .iter()
            .copied()
            .filter(|&v| v > 0)
            .collect(),
    })
}

/// `S`-linear colength of the sub-lattice in the super-lattice (both given
/// by row bases of equal cardinality).
pub fn lattice_colength<F: ValuedField>(
    f: &F,
    sub: &Mat<F::Elem>,
    sup: &Mat<F::Elem>,
) -> Result<i64> {
    if sub.rows() != sup.rows() {
        return Err(Error::Usage(format!(
            "colength needs bases of equal cardinality, got {} and {}",
            sub.rows(),
            sup.rows()
        )));
    }
    let q = lattice_quotient(f, sub, sup)?;
    match q.length() {
        Val::Finite(l) => Ok(l),
        Val::Infinity => Err(Error::Domain("sub-basis is linearly dependent".into())),
    }
}
