//! Derivation-defined suborders, the order `Lambda^D` with its tie
//! description and mu-basis, the factorization of the Wedderburn embedding
//! through `Lambda^D`, and the discriminant-only isomorphism invariant.

use crate::exact::{mat_scale, mat_sub, mat_zero, val_p, Prime, Val, ValuedField};
use crate::fields::Tower;
use crate::poly;
use crate::wedder::{self, binom, eps, eps_coords, gmul, gpow, over, under, Gamma};
use crate::{Error, Result};

/// One tie `(j, l)`: `val_s( sum_{h in [0,l]} (-1)^h C(l,h) a_{h,j} ) >= bound`.
/// Only conditions with `bound >= 1` are stored; the rest hold on all of `Lambda`.
#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub struct TieCondition {
    pub j: usize,
    pub l: usize,
    pub bound: i64,
}

/// The tie description of `t_dot^gamma Lambda^D` inside `Lambda`, with the
/// row index fixed to 0.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct TieSystem {
    pub p: u64,
    pub b: i64,
    pub gamma: i64,
    pub conditions: Vec<TieCondition>,
}

/// The `S`-basis `mu^(gamma)_{l,j} = s^{1+under(bl-j-1+gamma)} sum_i C(i,l) eps_{i,j}`,
/// indexed `l`-major.
pub struct MuBasis {
    pub gamma: i64,
    pub elems: Vec<Gamma>,
}

impl MuBasis {
    pub fn at(&self, l: usize, j: usize, p: usize) -> &Gamma {
        &self.elems[l * p + j]
    }
}

/// Inner derivation `D_x(f) = f x - x f`.
pub fn derivation(tw: &Tower, x: &Gamma, f: &Gamma) -> Gamma {
    mat_sub(&tw.base, &gmul(tw, f, x), &gmul(tw, x, f))
}

/// `i`-fold derivation by the binomial expansion
/// `sum_h (-1)^h C(i,h) x^h f x^{i-h}`.
pub fn derivation_power(tw: &Tower, x: &Gamma, f: &Gamma, i: u32) -> Gamma {
    let k = &tw.base;
    let mut acc = mat_zero(k, tw.g, tw.g);
    for h in 0..=i {
        let c = binom(i as i64, h as i64);
        let sign = if h % 2 == 0 { c } else { -c };
        let term = gmul(tw, &gpow(tw, x, h), &gmul(tw, f, &gpow(tw, x, i - h)));
        acc = crate::exact::mat_add(k, &acc, &mat_scale(k, &term, &k.from_i64(sign)));
    }
    acc
}

/// A derivation-defined subring specification: commuting elements `xs` with
/// heights and lengths, relative to the ideal filtration `t_dot^k Lambda`.
pub struct DerivationSpec {
    pub xs: Vec<Gamma>,
    pub heights: Vec<u32>,
    pub lengths: Vec<u32>,
}

/// Membership of `f` in the derivation ring: every composite
/// `D_{x_1}^{i_1} o ... o D_{x_k}^{i_k} (f)` lies in
/// `t_dot^{sum i_j l_j} Lambda`.
pub fn in_derivation_ring(tw: &Tower, spec: &DerivationSpec, f: &Gamma) -> Result<bool> {
    if !wedder::in_lambda(tw, f) {
        return Err(Error::Domain("element is not in Lambda".into()));
    }
    let k = spec.xs.len();
    assert!(spec.heights.len() == k && spec.lengths.len() == k);
    let mut exps = vec![0u32; k];
    loop {
        let mut y = f.clone();
        let mut weight = 0i64;
        for (idx, &e) in exps.iter().enumerate() {
            if e > 0 {
                y = derivation_power(tw, &spec.xs[idx], &y, e);
                weight += e as i64 * spec.lengths[idx] as i64;
            }
        }
        if !wedder::in_ideal(tw, &y, weight) {
            return Ok(false);
        }
        // next exponent tuple
        let mut pos = 0;
        loop {
            if pos == k {
                return Ok(true);
            }
            if exps[pos] < spec.heights[pos] {
                exps[pos] += 1;
                break;
            }
            exps[pos] = 0;
            pos += 1;
        }
    }
}

/// The raw tie conditions of `t_dot^gamma Lambda^D` for given integers,
/// keeping only nontrivial bounds.
pub fn tie_system(p: u64, b: i64, gamma: i64) -> TieSystem {
    let g = p as i64;
    let mut conditions = Vec::new();
    for j in 0..p as usize {
        for l in 0..p as usize {
            let bound = 1 + under(b * l as i64 - j as i64 - 1 + gamma, g);
            if bound >= 1 {
                conditions.push(TieCondition { j, l, bound });
            }
        }
    }
    TieSystem {
        p,
        b,
        gamma,
        conditions,
    }
}

/// Does `f in Lambda` satisfy every tie of the system?
pub fn satisfies_ties(tw: &Tower, ties: &TieSystem, f: &Gamma) -> bool {
    let k = &tw.base;
    let a = eps_coords(tw, f);
    for cond in &ties.conditions {
        let mut acc = k.zero();
        for h in 0..=cond.l {
            let c = binom(cond.l as i64, h as i64);
            let sign = if h % 2 == 0 { c } else { -c };
            acc = k.add(&acc, &k.mul(a.at(h, cond.j), &k.from_i64(sign)));
        }
        if k.val(&acc) < Val::Finite(cond.bound) {
            return false;
        }
    }
    true
}

/// Tie system and mu-basis of `t_dot^gamma Lambda^D`.
pub fn lambda_d(tw: &Tower, gamma: i64) -> Result<(TieSystem, MuBasis)> {
    let p = tw.p.get();
    let g = tw.g as i64;
    if tw.b < 1 {
        return Err(Error::Precondition("b >= 1 required".into()));
    }
    let needed = tw.b - under(tw.b - gamma, g);
    if tw.val_s_p() < needed {
        return Err(Error::Precondition(format!(
            "val_s(p) >= b - under(b - gamma) fails: {} < {}",
            tw.val_s_p(),
            needed
        )));
    }
    let ties = tie_system(p, tw.b, gamma);
    let k = &tw.base;
    let mut elems = Vec::with_capacity(tw.g * tw.g);
    for l in 0..tw.g {
        for j in 0..tw.g {
            let sexp = 1 + under(tw.b * l as i64 - j as i64 - 1 + gamma, g);
            let mut acc = mat_zero(k, tw.g, tw.g);
            for i in 0..tw.g {
                let c = binom(i as i64, l as i64);
                if c != 0 {
                    let term = mat_scale(k, &eps(tw, i, j as i64), &k.from_i64(c));
                    acc = crate::exact::mat_add(k, &acc, &term);
                }
            }
            elems.push(mat_scale(k, &acc, &k.uniformizer_pow(sexp)));
        }
    }
    Ok((ties, MuBasis { gamma, elems }))
}

/// Report of the factorization check `T wr C_p ~ Lambda^D`.
#[derive(Clone, Debug)]
pub struct Ft16Report {
    pub p: u64,
    pub n: u32,
    pub b: i64,
    pub t_dot_in_ties: bool,
    pub sigma_dot_in_ties: bool,
    pub colength_in_lambda: i64,
    pub expected_colength_in_lambda: i64,
    pub colength_in_gamma: i64,
    pub expected_colength_in_gamma: i64,
    /// `p * val_s(Delta) / 2`, the known colength of the embedded twisted
    /// group ring in `Gamma`.
    pub xi_colength_from_discriminant: i64,
}

impl Ft16Report {
    pub fn pass(&self) -> bool {
        self.t_dot_in_ties
            && self.sigma_dot_in_ties
            && self.colength_in_lambda == self.expected_colength_in_lambda
            && self.colength_in_gamma == self.expected_colength_in_gamma
            && self.colength_in_gamma == self.xi_colength_from_discriminant
    }
}

/// Verify that the Wedderburn embedding factors through `Lambda^D` as an
/// isomorphism: generator membership gives one inclusion, the colength
/// comparison against `p val_s(Delta)/2` gives equality.
pub fn verify_ft16(tw: &Tower) -> Result<Ft16Report> {
    let p = tw.p.get();
    let (ties, mu) = lambda_d(tw, 0)?;
    let t_in = satisfies_ties(tw, &ties, &tw.t_dot);
    let s_in = satisfies_ties(tw, &ties, &tw.sigma_dot);
    let c_lambda = wedder::colength(tw, &mu.elems, &wedder::lambda_basis(tw))?;
    let c_gamma = wedder::colength(tw, &mu.elems, &wedder::gamma_basis(tw))?;
    let b = tw.b;
    let pp = p as i64;
    Ok(Ft16Report {
        p,
        n: tw.n,
        b,
        t_dot_in_ties: t_in,
        sigma_dot_in_ties: s_in,
        colength_in_lambda: c_lambda,
        expected_colength_in_lambda: b * pp * (pp - 1) / 2,
        colength_in_gamma: c_gamma,
        expected_colength_in_gamma: (1 + b) * pp * (pp - 1) / 2,
        xi_colength_from_discriminant: pp * tw.ramification.discriminant_valuation / 2,
    })
}

/// Tie-relevant data of a purely ramified cyclic degree-`p` extension of
/// `S`: only `p`, the discriminant valuation, and the derived jump `b`
/// enter the tie system.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TieData {
    pub p: u64,
    /// Minimal polynomial of the chosen uniformizer over `K`, rational
    /// coefficients (only meaningful when `S = Z_(p)`).
    pub min_poly: poly::Poly,
    pub disc_val: i64,
    pub b: i64,
}

impl TieData {
    pub fn from_tower(tw: &Tower) -> TieData {
        TieData {
            p: tw.p.get(),
            min_poly: tw
                .mu_t
                .iter()
                .map(|c| tw.base.as_rat(c).unwrap_or_else(|| c[0].clone()))
                .collect(),
            disc_val: tw.ramification.discriminant_valuation,
            b: tw.b,
        }
    }

    /// From a monic degree-`p` minimal polynomial over `Z_(p)` whose root
    /// generates the valuation ring of a cyclic purely ramified extension.
    /// `b` is read off the discriminant of the polynomial.
    pub fn from_min_poly(p: u64, min_poly: poly::Poly) -> Result<TieData> {
        let prime = Prime::odd(p)?;
        if min_poly.len() != p as usize + 1 {
            return Err(Error::Usage("minimal polynomial must have degree p".into()));
        }
        let disc = poly::discriminant(&min_poly);
        let disc_val = val_p(&disc, prime)
            .finite()
            .ok_or_else(|| Error::Domain("polynomial is not separable".into()))?;
        if disc_val % (p as i64 - 1) != 0 {
            return Err(Error::Domain(
                "discriminant valuation is not divisible by p - 1".into(),
            ));
        }
        let b = disc_val / (p as i64 - 1) - 1;
        if b < 1 {
            return Err(Error::Precondition("extension is tame (b < 1)".into()));
        }
        Ok(TieData {
            p,
            min_poly,
            disc_val,
            b,
        })
    }

    pub fn ties(&self, gamma: i64) -> TieSystem {
        tie_system(self.p, self.b, gamma)
    }
}

/// Certify `T wr C_p ~ T' wr C_p` from equal discriminants: under the bound
/// `val_s(Delta) <= p val_s(p) + p - 1` both tie systems are defined and
/// depend only on `S` and `b`. Returns whether they agree literally.
pub fn tie_isomorphism_check(a: &TieData, b: &TieData, val_s_p: i64) -> Result<bool> {
    if a.p != b.p {
        return Err(Error::Usage("towers live over different primes".into()));
    }
    if a.disc_val != b.disc_val {
        return Err(Error::Precondition(format!(
            "discriminant valuations differ: {} vs {}",
            a.disc_val, b.disc_val
        )));
    }
    let bound = a.p as i64 * val_s_p + a.p as i64 - 1;
    if a.disc_val > bound {
        return Err(Error::Precondition(format!(
            "val_s(Delta) = {} exceeds p val_s(p) + p - 1 = {bound}",
            a.disc_val
        )));
    }
    Ok(a.ties(0) == b.ties(0))
}

/// Number of real roots of the minimal polynomials: unequal counts certify
/// non-isomorphic fraction fields.
pub fn fraction_fields_distinct(a: &TieData, b: &TieData) -> bool {
    poly::count_real_roots(&a.min_poly) != poly::count_real_roots(&b.min_poly)
}

/// Solution lattice of the full tie family `(*_{i,j,l})` for a fixed row
/// index `m`, as congruence rows for the mod-`p^E` machinery. Only valid
/// over `S = Z_(p)` (degree-1 base); used to test the redundancy of the
/// `i > 0` conditions.
pub fn tie_rows_for_row_index(tw: &Tower, gamma: i64, m: usize) -> Vec<(Vec<i64>, i64)> {
    assert_eq!(tw.d, 1, "congruence rows need S = Z_(p)");
    let p = tw.g;
    let g = p as i64;
    let mut rows = Vec::new();
    for j in 0..p {
        for l in 0..p {
            let bound = 1 + under(tw.b * l as i64 - j as i64 - 1 + gamma, g);
            if bound < 1 {
                continue;
            }
            // coordinates are eps-coordinates a_{i,j}, index i*p + j
            let mut row = vec![0i64; p * p];
            for h in 0..=l {
                let c = binom(l as i64, h as i64);
                let sign = if h % 2 == 0 { c } else { -c };
                let i = over(m as i64 + h as i64, g) as usize;
                row[i * p + j] += sign;
            }
            rows.push((row, bound));
        }
    }
    rows
}
