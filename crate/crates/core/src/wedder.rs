//! The Wedderburn embedding of `T wr G` into `Gamma = End_S T` as explicit
//! matrices, the order `Lambda`, the epsilon basis and its coordinates, and
//! colengths of based lattices inside `Gamma (x) K`.
//!
//! Maps act on the right throughout: an endomorphism is a `g x g` matrix
//! over `K` on the basis `(t^0, ..., t^{g-1})`, rows indexed by inputs, and
//! composition "first f, then h" is the ordinary product `f * h` acting on
//! row vectors.

use crate::exact::{lattice_colength, mat_identity, mat_mul, mat_zero, Mat, Val, ValuedField};
use crate::fields::{LfElem, Tower};
use crate::{Error, Result};

pub type Gamma = Mat<LfElem>;

/// Euclidean split `i = g*under + over` with `over in [0, g-1]`.
#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub struct IndexSplit {
    pub i: i64,
    pub g: i64,
    pub under: i64,
    pub over: i64,
}

pub fn split(i: i64, g: i64) -> Result<IndexSplit> {
    if g <= 0 {
        return Err(Error::Usage(format!("modulus must be positive, got {g}")));
    }
    Ok(IndexSplit {
        i,
        g,
        under: i.div_euclid(g),
        over: i.rem_euclid(g),
    })
}

pub fn under(i: i64, g: i64) -> i64 {
    i.div_euclid(g)
}

pub fn over(i: i64, g: i64) -> i64 {
    i.rem_euclid(g)
}

/// Binomial coefficient, zero outside `0 <= k <= n`.
pub fn binom(n: i64, k: i64) -> i64 {
    if k < 0 || k > n || n < 0 {
        return 0;
    }
    let mut acc: i128 = 1;
    let k = k.min(n - k);
    for i in 0..k {
        acc = acc * (n - i) as i128 / (i + 1) as i128;
    }
    acc as i64
}

/// The basis element `eps_{i,j}`: the single entry `s^{under(i+j)}` at
/// position `(i, over(i+j))`. Defined for every `j >= 0`.
pub fn eps(tw: &Tower, i: usize, j: i64) -> Gamma {
    assert!(i < tw.g && j >= 0);
    let g = tw.g as i64;
    let col = over(i as i64 + j, g) as usize;
    let pow = under(i as i64 + j, g);
    let mut m = mat_zero(&tw.base, tw.g, tw.g);
    *m.at_mut(i, col) = tw.base.uniformizer_pow(pow);
    m
}

/// Coordinates `a_{i,j}` of `f` over the epsilon basis: the entry of `f` at
/// `(i, over(i+j))` equals `a_{i,j} s^{under(i+j)}`.
pub fn eps_coords(tw: &Tower, f: &Gamma) -> Mat<LfElem> {
    let g = tw.g as i64;
    Mat::from_fn(tw.g, tw.g, |i, j| {
        let col = over(i as i64 + j as i64, g) as usize;
        let pw = under(i as i64 + j as i64, g);
        tw.base.mul(f.at(i, col), &tw.base.uniformizer_pow(-pw))
    })
}

pub fn from_eps_coords(tw: &Tower, a: &Mat<LfElem>) -> Gamma {
    let g = tw.g as i64;
    let mut m = mat_zero(&tw.base, tw.g, tw.g);
    for i in 0..tw.g {
        for j in 0..tw.g {
            let col = over(i as i64 + j as i64, g) as usize;
            let pw = under(i as i64 + j as i64, g);
            *m.at_mut(i, col) = tw.base.mul(a.at(i, j), &tw.base.uniformizer_pow(pw));
        }
    }
    m
}

pub fn gid(tw: &Tower) -> Gamma {
    mat_identity(&tw.base, tw.g)
}

pub fn gmul(tw: &Tower, a: &Gamma, b: &Gamma) -> Gamma {
    mat_mul(&tw.base, a, b)
}

pub fn gpow(tw: &Tower, a: &Gamma, k: u32) -> Gamma {
    let mut acc = gid(tw);
    for _ in 0..k {
        acc = gmul(tw, &acc, a);
    }
    acc
}

/// `t_ddot = sum_i eps_{i,1}`.
pub fn t_ddot(tw: &Tower) -> Gamma {
    ddot_power(tw, 1)
}

/// `t_ddot^j = sum_i eps_{i,j}`.
pub fn ddot_power(tw: &Tower, j: i64) -> Gamma {
    assert!(j >= 0);
    let mut acc = mat_zero(&tw.base, tw.g, tw.g);
    for i in 0..tw.g {
        acc = crate::exact::mat_add(&tw.base, &acc, &eps(tw, i, j));
    }
    acc
}

/// Membership in `Lambda`: all entries in `S`, strictly lower triangular
/// entries in `Ss`.
pub fn in_lambda(tw: &Tower, f: &Gamma) -> bool {
    in_ideal(tw, f, 0)
}

/// Membership in `t_ddot^k Lambda = t_dot^k Lambda`, decided on the basis
/// `(s^{-under(j-k)} eps_{i,j})`: the coordinate `a_{i,j}` needs
/// `val_s >= -under(j - k)`.
pub fn in_ideal(tw: &Tower, f: &Gamma, k: i64) -> bool {
    let a = eps_coords(tw, f);
    let g = tw.g as i64;
    for i in 0..tw.g {
        for j in 0..tw.g {
            if tw.base.val(a.at(i, j)) < Val::Finite(-under(j as i64 - k, g)) {
                return false;
            }
        }
    }
    true
}

/// The epsilon basis of `Lambda`, indexed row-major by `(i, j)`.
pub fn lambda_basis(tw: &Tower) -> Vec<Gamma> {
    let mut out = Vec::with_capacity(tw.g * tw.g);
    for i in 0..tw.g {
        for j in 0..tw.g {
            out.push(eps(tw, i, j as i64));
        }
    }
    out
}

/// The matrix-unit basis of `Gamma`, indexed row-major.
pub fn gamma_basis(tw: &Tower) -> Vec<Gamma> {
    let mut out = Vec::with_capacity(tw.g * tw.g);
    for r in 0..tw.g {
        for c in 0..tw.g {
            let mut m = mat_zero(&tw.base, tw.g, tw.g);
            *m.at_mut(r, c) = tw.base.one();
            out.push(m);
        }
    }
    out
}

pub fn flatten(f: &Gamma) -> Vec<LfElem> {
    f.flatten()
}

/// `S`-linear colength of the lattice spanned by `sub` inside the lattice
/// spanned by `sup`; containment is verified, not assumed.
pub fn colength(tw: &Tower, sub: &[Gamma], sup: &[Gamma]) -> Result<i64> {
    let sub_m = Mat::from_rows(sub.iter().map(flatten).collect());
    let sup_m = Mat::from_rows(sup.iter().map(flatten).collect());
    lattice_colength(&&tw.base, &sub_m, &sup_m)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exact::{mat_add, mat_sub, rat};
    use crate::fields::TowerKind;
    use crate::ValuedField;

    fn tower32() -> Tower {
        Tower::cyclotomic(3, 2, TowerKind::CyclotomicPi).unwrap()
    }

    #[test]
    fn split_examples() {
        let s = split(5, 3).unwrap();
        assert_eq!((s.under, s.over), (1, 2));
        let s = split(-1, 3).unwrap();
        assert_eq!((s.under, s.over), (-1, 2));
        let s = split(0, 3).unwrap();
        assert_eq!((s.under, s.over), (0, 0));
        assert!(split(1, 0).is_err());
    }

    #[test]
    fn split_negation_identities() {
        for g in [3i64, 5, 7] {
            for i in -25..25 {
                assert_eq!(under(-i, g), -1 - under(i - 1, g));
                assert_eq!(over(-i, g), g - 1 - over(i - 1, g));
                assert_eq!(i, g * under(i, g) + over(i, g));
            }
        }
    }

    #[test]
    fn eps_placement() {
        let tw = tower32();
        // eps_{2,1}: entry s at (2, 0)
        let e = eps(&tw, 2, 1);
        assert_eq!(tw.base.as_rat(e.at(2, 0)), Some(rat(3)));
        for (r, c) in [(0, 0), (0, 1), (1, 1), (2, 2), (2, 1)] {
            assert!(tw.base.is_zero(e.at(r, c)));
        }
    }

    #[test]
    fn eps_product_law_small() {
        let tw = tower32();
        for i in 0..3usize {
            for ip in 0..3usize {
                for j in 0..=6i64 {
                    for jp in 0..=6i64 {
                        let lhs = gmul(&tw, &eps(&tw, i, j), &eps(&tw, ip, jp));
                        let rhs = if ip as i64 == over(i as i64 + j, 3) {
                            eps(&tw, i, j + jp)
                        } else {
                            mat_zero(&tw.base, 3, 3)
                        };
                        assert_eq!(lhs, rhs, "eps product failed at {i},{j},{ip},{jp}");
                    }
                }
            }
        }
    }

    #[test]
    fn ddot_and_difference_to_t_dot() {
        let tw = tower32();
        let dd = t_ddot(&tw);
        // rows (0,1,0),(0,0,1),(3,0,0)
        assert_eq!(tw.base.as_rat(dd.at(0, 1)), Some(rat(1)));
        assert_eq!(tw.base.as_rat(dd.at(1, 2)), Some(rat(1)));
        assert_eq!(tw.base.as_rat(dd.at(2, 0)), Some(rat(3)));
        // ddot^0 = 1, ddot^1 = ddot, ddot^3 = s * id
        assert_eq!(ddot_power(&tw, 0), gid(&tw));
        assert_eq!(ddot_power(&tw, 1), dd);
        let s_id = crate::exact::mat_scale(&tw.base, &gid(&tw), &tw.base.uniformizer_pow(1));
        assert_eq!(ddot_power(&tw, 3), s_id);
        assert_eq!(gpow(&tw, &dd, 3), s_id);

        // t_dot - t_ddot lies in 3 Lambda and in ddot^{1+b(g-1)} Lambda = ddot^3 Lambda
        let diff = mat_sub(&tw.base, &tw.t_dot, &dd);
        let third = crate::exact::mat_scale(
            &tw.base,
            &diff,
            &tw.base.from_rat(&crate::exact::ratio(1, 3)),
        );
        assert!(in_lambda(&tw, &third));
        assert!(in_ideal(&tw, &diff, 3));
    }

    #[test]
    fn t_dot_epsilon_expansion_identity() {
        // t_dot = sum_i eps_{i,1} - s^{-1} sum_{j in [1,g-2]} e_j eps_{g-1,j+1} - e_{g-1} eps_{g-1,0}
        for (p, n) in [(3u64, 2u32), (5, 2), (3, 3)] {
            let tw = Tower::cyclotomic(p, n, TowerKind::CyclotomicPi).unwrap();
            let k = &tw.base;
            let g = tw.g;
            let mut rhs = t_ddot(&tw);
            let s_inv = k.uniformizer_pow(-1);
            for j in 1..=g.saturating_sub(2) {
                let coeff = k.neg(&k.mul(&s_inv, &tw.mu_t[j]));
                let term = crate::exact::mat_scale(k, &eps(&tw, g - 1, j as i64 + 1), &coeff);
                rhs = mat_add(k, &rhs, &term);
            }
            let term = crate::exact::mat_scale(k, &eps(&tw, g - 1, 0), &k.neg(&tw.mu_t[g - 1]));
            rhs = mat_add(k, &rhs, &term);
            assert_eq!(rhs, tw.t_dot, "expansion failed at p={p}, n={n}");
        }
    }

    #[test]
    fn ideal_membership_examples() {
        let tw = tower32();
        assert!(in_ideal(&tw, &gid(&tw), 0));
        assert!(!in_ideal(&tw, &gid(&tw), 1));
        assert!(in_ideal(&tw, &tw.t_dot, 1));
        assert!(in_lambda(&tw, &tw.sigma_dot));
        // t_dot Lambda: lower triangle including diagonal in 3S
        let mut m = mat_zero(&tw.base, 3, 3);
        *m.at_mut(0, 0) = tw.base.from_i64(3);
        *m.at_mut(1, 1) = tw.base.from_i64(3);
        *m.at_mut(2, 2) = tw.base.from_i64(3);
        *m.at_mut(0, 1) = tw.base.one();
        *m.at_mut(1, 0) = tw.base.from_i64(3);
        assert!(in_ideal(&tw, &m, 1));
        *m.at_mut(2, 2) = tw.base.one();
        assert!(!in_ideal(&tw, &m, 1));
    }

    #[test]
    fn eps_coords_roundtrip() {
        let tw = tower32();
        let a = eps_coords(&tw, &tw.sigma_dot);
        assert_eq!(from_eps_coords(&tw, &a), tw.sigma_dot);
        let b = eps_coords(&tw, &tw.t_dot);
        assert_eq!(from_eps_coords(&tw, &b), tw.t_dot);
    }

    #[test]
    fn lambda_in_gamma_colength() {
        let tw = tower32();
        let c = colength(&tw, &lambda_basis(&tw), &gamma_basis(&tw)).unwrap();
        assert_eq!(c, 3); // g(g-1)/2

        let x = lambda_basis(&tw);
        assert_eq!(colength(&tw, &x, &x).unwrap(), 0);

        // the same length from the presentation matrix of the quotient
        let pres = crate::exact::express_in_rows(
            &&tw.base,
            &Mat::from_rows(x.iter().map(flatten).collect()),
            &Mat::from_rows(gamma_basis(&tw).iter().map(flatten).collect()),
        )
        .unwrap()
        .unwrap();
        assert_eq!(
            crate::exact::module_length(&&tw.base, &pres).unwrap(),
            crate::exact::Val::Finite(3)
        );
    }

    #[test]
    fn colength_rejects_non_containment() {
        let tw = tower32();
        // Gamma is not contained in Lambda
        assert!(colength(&tw, &gamma_basis(&tw), &lambda_basis(&tw)).is_err());
    }
}
