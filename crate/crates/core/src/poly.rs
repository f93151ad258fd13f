//! Dense polynomials over `Q`: Euclidean arithmetic, resultants,
//! discriminants, and Sturm real-root counts.

use num_bigint::BigInt;
use num_traits::{One, Signed, Zero};

use crate::exact::{rat, Rat};

pub type Poly = Vec<Rat>;

pub fn trim(mut p: Poly) -> Poly {
    while p.len() > 1 && p.last().map_or(false, |c| c.is_zero()) {
        p.pop();
    }
    p
}

pub fn deg(p: &Poly) -> Option<usize> {
    p.iter().rposition(|c| !c.is_zero())
}

pub fn is_zero(p: &Poly) -> bool {
    deg(p).is_none()
}

pub fn add(a: &Poly, b: &Poly) -> Poly {
    let n = a.len().max(b.len());
    trim(
        (0..n)
            .map(|i| {
                let x = a.get(i).cloned().unwrap_or_else(Rat::zero);
                let y = b.get(i).cloned().unwrap_or_else(Rat::zero);
                x + y
            })
            .collect(),
    )
}

pub fn neg(a: &Poly) -> Poly {
    a.iter().map(|c| -c).collect()
}

pub fn sub(a: &Poly, b: &Poly) -> Poly {
    add(a, &neg(b))
}

pub fn mul(a: &Poly, b: &Poly) -> Poly {
    if is_zero(a) || is_zero(b) {
        return vec![Rat::zero()];
    }
    let mut out = vec![Rat::zero(); a.len() + b.len() - 1];
    for (i, x) in a.iter().enumerate() {
        if x.is_zero() {
            continue;
        }
        for (j, y) in b.iter().enumerate() {
            if !y.is_zero() {
                out[i + j] += x * y;
            }
        }
    }
    trim(out)
}

pub fn scale(a: &Poly, s: &Rat) -> Poly {
    trim(a.iter().map(|c| c * s).collect())
}

pub fn derivative(a: &Poly) -> Poly {
    if a.len() <= 1 {
        return vec![Rat::zero()];
    }
    trim(
        a.iter()
            .enumerate()
            .skip(1)
            .map(|(i, c)| c * rat(i as i64))
            .collect(),
    )
}

pub fn eval(a: &Poly, x: &Rat) -> Rat {
    let mut acc = Rat::zero();
    for c in a.iter().rev() {
        acc = acc * x + c;
    }
    acc
}

/// Euclidean division `a = q b + r` with `deg r < deg b`.
pub fn divrem(a: &Poly, b: &Poly) -> (Poly, Poly) {
    let db = deg(b).expect("division by zero polynomial");
    let lead = b[db].clone();
    let mut r = a.clone();
    let mut q = vec![Rat::zero(); a.len()];
    while let Some(dr) = deg(&r) {
        if dr < db {
            break;
        }
        let c = &r[dr] / &lead;
        q[dr - db] = c.clone();
        for i in 0..=db {
            let x = &r[dr - db + i] - &c * &b[i];
            r[dr - db + i] = x;
        }
    }
    (trim(q), trim(r))
}

/// Resultant via the Sylvester matrix.
pub fn resultant(a: &Poly, b: &Poly) -> Rat {
    let (da, db) = match (deg(a), deg(b)) {
        (Some(da), Some(db)) => (da, db),
        _ => return Rat::zero(),
    };
    if da == 0 {
        return pow_rat(&a[0], db as u32);
    }
    if db == 0 {
        return pow_rat(&b[0], da as u32);
    }
    let n = da + db;
    let mut m = vec![vec![Rat::zero(); n]; n];
    for (r, row) in m.iter_mut().enumerate().take(db) {
        for i in 0..=da {
            row[r + i] = a[da - i].clone();
        }
    }
    for r in 0..da {
        for i in 0..=db {
            m[db + r][r + i] = b[db - i].clone();
        }
    }
    det_rat(m)
}

fn pow_rat(x: &Rat, k: u32) -> Rat {
    let mut acc = Rat::one();
    for _ in 0..k {
        acc *= x;
    }
    acc
}

fn det_rat(mut m: Vec<Vec<Rat>>) -> Rat {
    let n = m.len();
    let mut det = Rat::one();
    for k in 0..n {
        let Some(pr) = (k..n).find(|&r| !m[r][k].is_zero()) else {
            return Rat::zero();
        };
        if pr != k {
            m.swap(k, pr);
            det = -det;
        }
        let pivot = m[k][k].clone();
        det *= &pivot;
        for r in k + 1..n {
            if m[r][k].is_zero() {
                continue;
            }
            let factor = &m[r][k] / &pivot;
            for c in k..n {
                let x = &m[r][c] - &factor * &m[k][c];
                m[r][c] = x;
            }
        }
    }
    det
}

/// Discriminant `(-1)^{d(d-1)/2} Res(f, f') / lc(f)`.
pub fn discriminant(f: &Poly) -> Rat {
    let d = deg(f).expect("discriminant of zero polynomial");
    let res = resultant(f, &derivative(f));
    let lc = f[d].clone();
    let sign = if (d * (d - 1) / 2) % 2 == 0 {
        Rat::one()
    } else {
        -Rat::one()
    };
    sign * res / lc
}

fn sign_at_plus_inf(p: &Poly) -> i32 {
    match deg(p) {
        None => 0,
        Some(d) => {
            if p[d].is_positive() {
                1
            } else {
                -1
            }
        }
    }
}

fn sign_at_minus_inf(p: &Poly) -> i32 {
    match deg(p) {
        None => 0,
        Some(d) => {
            let s = if p[d].is_positive() { 1 } else { -1 };
            if d % 2 == 0 {
                s
            } else {
                -s
            }
        }
    }
}

fn sign_variations(signs: &[i32]) -> usize {
    let mut count = 0;
    let mut last = 0;
    for &s in signs {
        if s == 0 {
            continue;
        }
        if last != 0 && s != last {
            count += 1;
        }
        last = s;
    }
    count
}

/// Number of distinct real roots, by a Sturm chain.
pub fn count_real_roots(f: &Poly) -> usize {
    let f = trim(f.clone());
    if deg(&f).map_or(true, |d| d == 0) {
        return 0;
    }
    // squarefree part
    let g = poly_gcd(&f, &derivative(&f));
    let (f, _) = divrem(&f, &g);
    let mut chain = vec![f.clone(), derivative(&f)];
    loop {
        let n = chain.len();
        let (_, r) = divrem(&chain[n - 2], &chain[n - 1]);
        if is_zero(&r) {
            break;
        }
        chain.push(neg(&r));
    }
    let at_minus: Vec<i32> = chain.iter().map(sign_at_minus_inf).collect();
    let at_plus: Vec<i32> = chain.iter().map(sign_at_plus_inf).collect();
    sign_variations(&at_minus) - sign_variations(&at_plus)
}

pub fn poly_gcd(a: &Poly, b: &Poly) -> Poly {
    let (mut a, mut b) = (trim(a.clone()), trim(b.clone()));
    while !is_zero(&b) {
        let (_, r) = divrem(&a, &b);
        a = std::mem::replace(&mut b, r);
    }
    // monic normalization
    match deg(&a) {
        None => a,
        Some(d) => {
            let lc = a[d].clone();
            scale(&a, &lc.recip())
        }
    }
}

/// Extended gcd: returns `(g, u, v)` with `u a + v b = g`, `g` monic.
pub fn poly_ext_gcd(a: &Poly, b: &Poly) -> (Poly, Poly, Poly) {
    let mut r0 = trim(a.clone());
    let mut r1 = trim(b.clone());
    let mut s0 = vec![Rat::one()];
    let mut s1 = vec![Rat::zero()];
    let mut t0 = vec![Rat::zero()];
    let mut t1 = vec![Rat::one()];
    while !is_zero(&r1) {
        let (q, r) = divrem(&r0, &r1);
        r0 = std::mem::replace(&mut r1, r);
        let ns = sub(&s0, &mul(&q, &s1));
        s0 = std::mem::replace(&mut s1, ns);
        let nt = sub(&t0, &mul(&q, &t1));
        t0 = std::mem::replace(&mut t1, nt);
    }
    match deg(&r0) {
        None => (r0, s0, t0),
        Some(d) => {
            let lc = r0[d].recip();
            (scale(&r0, &lc), scale(&s0, &lc), scale(&t0, &lc))
        }
    }
}

/// X^n as a polynomial.
pub fn monomial(n: usize) -> Poly {
    let mut p = vec![Rat::zero(); n + 1];
    p[n] = Rat::one();
    p
}

pub fn from_ints(coeffs: &[i64]) -> Poly {
    coeffs.iter().map(|&c| rat(c)).collect()
}

/// Substitute `x + 1` for `x`.
pub fn shift_by_one(f: &Poly) -> Poly {
    let mut out = vec![Rat::zero()];
    let xp1 = vec![Rat::one(), Rat::one()];
    for c in f.iter().rev() {
        out = mul(&out, &xp1);
        if out.is_empty() {
            out = vec![Rat::zero()];
        }
        out[0] += c;
    }
    trim(out)
}

pub fn big(n: i64) -> BigInt {
    BigInt::from(n)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exact::{val_p, Prime};
    use crate::Val;

    #[test]
    fn divrem_roundtrip() {
        let a = from_ints(&[1, 2, 0, 5]);
        let b = from_ints(&[3, 1]);
        let (q, r) = divrem(&a, &b);
        assert_eq!(add(&mul(&q, &b), &r), trim(a));
    }

    #[test]
    fn cubic_discriminants() {
        // x^3 + 3x^2 - 18x + 48: discriminant -87804 = -2^2 3^4 271
        let f = from_ints(&[48, -18, 3, 1]);
        let d = discriminant(&f);
        assert_eq!(d, rat(-87804));
        assert_eq!(val_p(&d, Prime::new(3).unwrap()), Val::Finite(4));
        assert_eq!(count_real_roots(&f), 1);

        // the minimal polynomial of pi_2 for p = 3 is totally real
        let g = from_ints(&[-3, 9, -6, 1]);
        assert_eq!(count_real_roots(&g), 3);
        assert_eq!(
            val_p(&discriminant(&g), Prime::new(3).unwrap()),
            Val::Finite(4)
        );
    }

    #[test]
    fn ext_gcd_inverts() {
        let f = from_ints(&[1, 0, 1]); // x^2 + 1
        let a = from_ints(&[1, 1]); // x + 1
        let (g, u, _) = poly_ext_gcd(&a, &f);
        assert_eq!(deg(&g), Some(0));
        // u * a == g mod f
        let (_, r) = divrem(&sub(&mul(&u, &a), &g), &f);
        assert!(is_zero(&r));
    }

    #[test]
    fn shift_matches_eval() {
        let f = from_ints(&[2, -7, 0, 4]);
        let g = shift_by_one(&f);
        for x in -3..4 {
            assert_eq!(eval(&g, &rat(x)), eval(&f, &rat(x + 1)));
        }
    }
}
