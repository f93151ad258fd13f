//! Lattices in `S^N` (`S = Z_(p)`) defined by congruence conditions, handled
//! modulo `p^E`. A lattice `M` with `p^E S^N <= M <= S^N` is represented by
//! the Howell form of its annihilator in `(Z/p^E)^N`: over the chain ring
//! `Z/p^E` the pairing is perfect, so `M = Ann(Ann(M))`,
//! `|M| |Ann M| = p^{EN}`, and colengths read off the annihilator pivots.

use num_bigint::BigUint;
use num_traits::{One, Zero};

use crate::exact::{val_p, Mat, Prime, Rat};
use crate::{Error, Result};

/// Arithmetic modulo `p^e` in machine words; `p^e` must fit comfortably in
/// `u64` (all uses here have `p^e <= 7^6`).
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct ModPe {
    pub p: u64,
    pub e: u32,
    pub m: u64,
}

impl ModPe {
    pub fn new(p: u64, e: u32) -> Self {
        let m = p.checked_pow(e).expect("p^e overflows u64");
        assert!(m < (1 << 31), "p^e too large for word arithmetic");
        ModPe { p, e, m }
    }

    pub fn add(&self, a: u64, b: u64) -> u64 {
        (a + b) % self.m
    }

    pub fn sub(&self, a: u64, b: u64) -> u64 {
        (a + self.m - b % self.m) % self.m
    }

    pub fn mul(&self, a: u64, b: u64) -> u64 {
        a * b % self.m
    }

    /// Valuation of `a` in `[0, e]`; `e` for `a = 0`.
    pub fn val(&self, a: u64) -> u32 {
        let mut a = a % self.m;
        if a == 0 {
            return self.e;
        }
        let mut v = 0;
        while a % self.p == 0 {
            a /= self.p;
            v += 1;
        }
        v
    }

    /// Inverse of a unit.
    pub fn inv_unit(&self, a: u64) -> u64 {
        // extended Euclid on (a, m)
        let (mut r0, mut r1) = (a as i128 % self.m as i128, self.m as i128);
        let (mut s0, mut s1) = (1i128, 0i128);
        while r1 != 0 {
            let q = r0 / r1;
            r0 -= q * r1;
            std::mem::swap(&mut r0, &mut r1);
            s0 -= q * s1;
            std::mem::swap(&mut s0, &mut s1);
        }
        assert_eq!(r0, 1, "not a unit");
        s0.rem_euclid(self.m as i128) as u64
    }

    pub fn pow_p(&self, k: u32) -> u64 {
        self.p.pow(k) % self.m
    }

    /// Reduce a `p`-integral rational.
    pub fn from_rat(&self, x: &Rat) -> u64 {
        let m = BigUint::from(self.m);
        let num = x.numer();
        let den = x.denom();
        let n = ((num % num_bigint::BigInt::from(self.m)) + num_bigint::BigInt::from(self.m))
            .to_biguint()
            .unwrap()
            % &m;
        let d = (den % num_bigint::BigInt::from(self.m))
            .to_biguint()
            .unwrap()
            % &m;
        let d64: u64 = d.try_into().unwrap();
        let n64: u64 = n.try_into().unwrap();
        self.mul(n64, self.inv_unit(d64))
    }
}

/// Canonical Howell form of a submodule of `(Z/p^e)^N`, built incrementally.
/// Pivots are normalized to powers of `p` and entries above a pivot are
/// reduced below it, so equal submodules produce identical row lists.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Howell {
    pub ctx: ModPe,
    pub n: usize,
    /// Sorted by pivot column; each pivot entry is `p^a`, `a < e`.
    rows: Vec<Vec<u64>>,
    pivots: Vec<usize>,
}

impl Howell {
    pub fn new(ctx: ModPe, n: usize) -> Self {
        Howell {
            ctx,
            n,
            rows: Vec::new(),
            pivots: Vec::new(),
        }
    }

    pub fn rank(&self) -> usize {
        self.rows.len()
    }

    fn find_pivot_slot(&self, col: usize) -> std::result::Result<usize, usize> {
        self.pivots.binary_search(&col)
    }

    /// Insert the span of one row (and the tail rows required by the Howell
    /// property).
    pub fn insert(&mut self, row: &[u64]) {
        let mut work = vec![row.to_vec()];
        while let Some(mut r) = work.pop() {
            for x in r.iter_mut() {
                *x %= self.ctx.m;
            }
            let mut col = match r.iter().position(|&x| x != 0) {
                Some(c) => c,
                None => continue,
            };
            loop {
                match self.find_pivot_slot(col) {
                    Ok(slot) => {
                        let pv = self.ctx.val(self.rows[slot][col]);
                        let rv = self.ctx.val(r[col]);
                        if rv >= pv {
                            // eliminate r[col]
                            let q = self.ctx.mul(r[col] / self.ctx.pow_p(pv), 1);
                            for c in col..self.n {
                                let t = self.ctx.mul(q, self.rows[slot][c]);
                                r[c] = self.ctx.sub(r[c], t);
                            }
                        } else {
                            // r becomes the new, shorter pivot; reinsert the old row
                            let unit = r[col] / self.ctx.pow_p(rv);
                            let ui = self.ctx.inv_unit(unit);
                            for c in col..self.n {
                                r[c] = self.ctx.mul(r[c], ui);
                            }
                            let old = std::mem::replace(&mut self.rows[slot], r.clone());
                            // tail of the new pivot row stays in the span
                            if rv > 0 {
                                let scale = self.ctx.pow_p(self.ctx.e - rv);
                                let tail: Vec<u64> =
                                    r.iter().map(|&x| self.ctx.mul(x, scale)).collect();
                                work.push(tail);
                            }
                            work.push(old);
                            r = vec![0; self.n];
                        }
                    }
                    Err(slot) => {
                        // new pivot column
                        let rv = self.ctx.val(r[col]);
                        let unit = r[col] / self.ctx.pow_p(rv);
                        let ui = self.ctx.inv_unit(unit);
                        for c in col..self.n {
                            r[c] = self.ctx.mul(r[c], ui);
                        }
                        self.rows.insert(slot, r.clone());
                        self.pivots.insert(slot, col);
                        if rv > 0 {
                            let scale = self.ctx.pow_p(self.ctx.e - rv);
                            let tail: Vec<u64> =
                                r.iter().map(|&x| self.ctx.mul(x, scale)).collect();
                            work.push(tail);
                        }
                        r = vec![0; self.n];
                    }
                }
                match r.iter().position(|&x| x != 0) {
                    Some(c) => col = c,
                    None => break,
                }
            }
        }
    }

    /// Reduce entries above each pivot; after this, equal spans have equal rows.
    pub fn canonicalize(&mut self) {
        for slot in 0..self.rows.len() {
            let col = self.pivots[slot];
            let pv = self.ctx.val(self.rows[slot][col]);
            let pivot = self.ctx.pow_p(pv);
            for other in 0..self.rows.len() {
                if other == slot {
                    continue;
                }
                let q = self.rows[other][col] / pivot;
                if q != 0 {
                    for c in col..self.n {
                        let t = self.ctx.mul(q, self.rows[slot][c]);
                        self.rows[other][c] = self.ctx.sub(self.rows[other][c], t);
                    }
                }
            }
        }
    }

    /// `log_p` of the size of the spanned submodule.
    pub fn size_log_p(&self) -> u64 {
        self.rows
            .iter()
            .zip(&self.pivots)
            .map(|(r, &c)| (self.ctx.e - self.ctx.val(r[c])) as u64)
            .sum()
    }

    /// Does `x` pair to zero with every row?
    pub fn annihilates(&self, x: &[u64]) -> bool {
        self.rows.iter().all(|r| {
            let mut acc = 0u64;
            for (a, b) in r.iter().zip(x) {
                acc = self.ctx.add(acc, self.ctx.mul(*a, *b));
            }
            acc == 0
        })
    }

    pub fn rows(&self) -> &[Vec<u64>] {
        &self.rows
    }
}

/// A lattice `p^E S^N <= M <= S^N` cut out by congruences
/// `L(x) = 0 mod p^c`, represented by the Howell form of its annihilator.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CongruenceLattice {
    pub ann: Howell,
}

impl CongruenceLattice {
    pub fn new(ctx: ModPe, n: usize) -> Self {
        CongruenceLattice {
            ann: Howell::new(ctx, n),
        }
    }

    /// Impose `sum_i form[i] x_i = 0 mod p^c`.
    pub fn impose(&mut self, form: &[u64], c: u32) {
        let ctx = self.ann.ctx;
        assert!(c <= ctx.e);
        if c == 0 {
            return;
        }
        let scale = ctx.pow_p(ctx.e - c);
        let row: Vec<u64> = form.iter().map(|&x| ctx.mul(x, scale)).collect();
        self.ann.insert(&row);
    }

    pub fn finalize(&mut self) {
        self.ann.canonicalize();
    }

    /// `S`-linear colength of the lattice in `S^N`.
    pub fn colength(&self) -> u64 {
        self.ann.size_log_p()
    }

    pub fn contains(&self, x: &[u64]) -> bool {
        self.ann.annihilates(x)
    }
}

/// Sum of the Smith pivot valuations of a square word matrix mod `p^e`,
/// i.e. `val_p(det)`, provided every pivot valuation stays below `e`;
/// `None` when some elimination step finds no pivot below the cap (retry
/// with a larger `e`).
pub fn smith_val_sum_words(ctx: ModPe, n: usize, mat: &[u64]) -> Option<u64> {
    let mut a = mat.to_vec();
    assert_eq!(a.len(), n * n);
    let mut total = 0u64;
    for k in 0..n {
        let mut best: Option<(usize, usize, u32)> = None;
        for r in k..n {
            for c in k..n {
                let v = ctx.val(a[r * n + c]);
                if v < ctx.e && best.map_or(true, |(_, _, bv)| v < bv) {
                    best = Some((r, c, v));
                }
            }
        }
        let Some((pr, pc, pv)) = best else {
            return None;
        };
        // swap into place
        if pr != k {
            for c in 0..n {
                a.swap(k * n + c, pr * n + c);
            }
        }
        if pc != k {
            for r in 0..n {
                a.swap(r * n + k, r * n + pc);
            }
        }
        total += pv as u64;
        let pk = ctx.pow_p(pv);
        let punit_inv = ctx.inv_unit(a[k * n + k] / pk);
        for r in k + 1..n {
            let e = a[r * n + k];
            if e == 0 {
                continue;
            }
            let factor = ctx.mul(e / pk, punit_inv);
            if factor == 0 {
                continue;
            }
            for c in k..n {
                let t = ctx.mul(factor, a[k * n + c]);
                a[r * n + c] = ctx.sub(a[r * n + c], t);
            }
        }
    }
    Some(total)
}

/// Diagonal valuation sum of a square matrix over `Z/p^cap`, by Smith
/// elimination with bigint words: the valuation of the determinant provided
/// it is smaller than `cap`. `None` when the valuation reaches `cap`.
pub fn det_val_mod_pe(p: u64, cap: u32, m: &Mat<Rat>) -> Result<Option<u64>> {
    let n = m.rows();
    if m.cols() != n {
        return Err(Error::Usage("determinant needs a square matrix".into()));
    }
    let prime = Prime::new(p)?;
    let modulus = BigUint::from(p).pow(cap);
    let to_residue = |x: &Rat| -> Result<BigUint> {
        if val_p(x, prime) < crate::exact::Val::Finite(0) {
            return Err(Error::Domain("entry has negative valuation".into()));
        }
        let mb = num_bigint::BigInt::from(modulus.clone());
        let num = ((x.numer() % &mb) + &mb) % &mb;
        let den = ((x.denom() % &mb) + &mb) % &mb;
        let d = den.to_biguint().unwrap();
        let nn = num.to_biguint().unwrap();
        Ok(nn * mod_inverse(&d, &modulus) % &modulus)
    };
    let mut a: Vec<Vec<BigUint>> = Vec::with_capacity(n);
    for r in 0..n {
        let mut row = Vec::with_capacity(n);
        for c in 0..n {
            row.push(to_residue(m.at(r, c))?);
        }
        a.push(row);
    }
    let val_of = |x: &BigUint| -> u32 {
        if x.is_zero() {
            return cap;
        }
        let mut x = x.clone();
        let pb = BigUint::from(p);
        let mut v = 0;
        while (&x % &pb).is_zero() {
            x /= &pb;
            v += 1;
        }
        v
    };
    let mut total: u64 = 0;
    for k in 0..n {
        let mut best: Option<(usize, usize, u32)> = None;
        for r in k..n {
            for c in k..n {
                let v = val_of(&a[r][c]);
                if v < cap && best.map_or(true, |(_, _, bv)| v < bv) {
                    best = Some((r, c, v));
                }
            }
        }
        let Some((pr, pc, pv)) = best else {
            return Ok(None); // determinant valuation reaches the cap
        };
        a.swap(k, pr);
        for row in a.iter_mut() {
            row.swap(k, pc);
        }
        total += pv as u64;
        let punit = &a[k][k] / BigUint::from(p).pow(pv);
        let pinv = mod_inverse(&punit, &modulus);
        let pk = BigUint::from(p).pow(pv);
        for r in k + 1..n {
            if a[r][k].is_zero() {
                continue;
            }
            // factor = a[r][k] / pivot
            let f = (&a[r][k] / &pk) * &pinv % &modulus;
            if f.is_zero() {
                continue;
            }
            for c in k..n {
                let t = &f * &a[k][c] % &modulus;
                let cur = &a[r][c];
                a[r][c] = if *cur >= t {
                    cur - t
                } else {
                    cur + &modulus - t
                };
            }
        }
    }
    Ok(Some(total))
}

fn mod_inverse(a: &BigUint, m: &BigUint) -> BigUint {
    use num_bigint::BigInt;
    let a = BigInt::from(a.clone());
    let m = BigInt::from(m.clone());
    let (mut r0, mut r1) = (a, m.clone());
    let (mut s0, mut s1) = (BigInt::one(), BigInt::zero());
    while !r1.is_zero() {
        let q = &r0 / &r1;
        r0 -= &q * &r1;
        std::mem::swap(&mut r0, &mut r1);
        s0 -= &q * &s1;
        std::mem::swap(&mut s0, &mut s1);
    }
    assert!(r0.is_one(), "not invertible");
    (((s0 % &m) + &m) % &m).to_biguint().unwrap()
}
