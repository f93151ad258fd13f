//! Independent cross-checks for the cohomology computation: the classical
//! periodic complex built from the norm and `sigma - 1`, bar-resolution
//! cohomology with the cup product, and brute-force chain lifting by
//! linear solving.

use crate::cohom::{structure_constant, Resolution};
use crate::exact::{
    lattice_quotient, left_kernel_lattice, mat_identity, mat_mul, mat_sub, Mat, ModuleShape,
    ValuedField,
};
use crate::fields::{LfElem, LocalField, Tower};
use crate::wedder::Gamma;
use crate::{Error, Result};

/// A cyclic group `C_m` acting on a free `S`-module `T = S^rank` carrying a
/// ring structure generated by one element: `sigma` is the matrix of the
/// generator of the group, `mult_gen` the matrix of multiplication by the
/// ring generator, both acting on row vectors.
pub struct CyclicAction<F: ValuedField> {
    pub field: F,
    pub order: usize,
    pub rank: usize,
    pub sigma: Mat<F::Elem>,
    pub mult_gen: Mat<F::Elem>,
}

impl<F: ValuedField> CyclicAction<F> {
    pub fn new(field: F, order: usize, sigma: Mat<F::Elem>, mult_gen: Mat<F::Elem>) -> Self {
        let rank = sigma.rows();
        CyclicAction {
            field,
            order,
            rank,
            sigma,
            mult_gen,
        }
    }

    fn sigma_pows(&self) -> Vec<Mat<F::Elem>> {
        let mut out = vec![mat_identity(&self.field, self.rank)];
        for _ in 1..self.order {
            out.push(mat_mul(&self.field, out.last().unwrap(), &self.sigma));
        }
        out
    }

    fn gen_pows(&self) -> Vec<Mat<F::Elem>> {
        let mut out = vec![mat_identity(&self.field, self.rank)];
        for _ in 1..self.rank {
            out.push(mat_mul(&self.field, out.last().unwrap(), &self.mult_gen));
        }
        out
    }

    /// Product in `T` of two coordinate rows.
    pub fn t_mul(&self, gen_pows: &[Mat<F::Elem>], x: &[F::Elem], y: &[F::Elem]) -> Vec<F::Elem> {
        let f = &self.field;
        let mut acc = vec![f.zero(); self.rank];
        for (c, yc) in y.iter().enumerate() {
            if f.is_zero(yc) {
                continue;
            }
            let shifted = crate::exact::row_mat_apply(f, x, &gen_pows[c]);
            for (i, v) in shifted.iter().enumerate() {
                acc[i] = f.add(&acc[i], &f.mul(v, yc));
            }
        }
        acc
    }
}

pub fn tower_action(tw: &Tower) -> CyclicAction<&LocalField> {
    CyclicAction::new(&tw.base, tw.g, tw.sigma_dot.clone(), tw.t_dot.clone())
}

/// Ext in one degree from the classical periodic complex
/// `... <- T <-Tr- T <-(sigma - 1)- T <- 0`.
pub fn classical_ext<F: ValuedField>(act: &CyclicAction<F>, degree: u32) -> Result<ModuleShape> {
    let f = &act.field;
    let pows = act.sigma_pows();
    let mut trace = pows[0].clone();
    for m in pows.iter().skip(1) {
        trace = crate::exact::mat_add(f, &trace, m);
    }
    let diff = mat_sub(f, &act.sigma, &mat_identity(f, act.rank));

    let shape = if degree == 0 {
        let kern = left_kernel_lattice(f, &diff);
        ModuleShape {
            free_rank: kern.rows(),
            torsion: vec![],
        }
    } else if degree % 2 == 1 {
        let kern = left_kernel_lattice(f, &trace);
        lattice_quotient(f, &diff, &kern)?
    } else {
        let kern = left_kernel_lattice(f, &diff);
        lattice_quotient(f, &trace, &kern)?
    };
    Ok(shape)
}

/// A tabulated homogeneous cochain of the bar resolution: an `SG`-linear map
/// on `(i+1)`-tuples, stored by its values on tuples with last entry 1.
#[derive(Clone, Debug, PartialEq)]
pub struct BarCochain<E> {
    pub degree: usize,
    /// Indexed by tuples `(x_0, ..., x_{i-1})` in `G^i`, little-endian.
    pub values: Vec<Vec<E>>,
}

fn tuple_index(m: usize, tuple: &[usize]) -> usize {
    let mut idx = 0;
    for &x in tuple.iter().rev() {
        idx = idx * m + x;
    }
    idx
}

fn index_tuple(m: usize, len: usize, mut idx: usize) -> Vec<usize> {
    let mut out = Vec::with_capacity(len);
    for _ in 0..len {
        out.push(idx % m);
        idx /= m;
    }
    out
}

pub struct BarComplex<'a, F: ValuedField> {
    act: &'a CyclicAction<F>,
    sigma_pows: Vec<Mat<F::Elem>>,
    gen_pows: Vec<Mat<F::Elem>>,
}

impl<'a, F: ValuedField> BarComplex<'a, F> {
    pub fn new(act: &'a CyclicAction<F>) -> Self {
        BarComplex {
            act,
            sigma_pows: act.sigma_pows(),
            gen_pows: act.gen_pows(),
        }
    }

    pub fn cochain_coords(&self, degree: usize) -> usize {
        self.act.rank * self.act.order.pow(degree as u32)
    }

    fn guard(&self, degree: usize) -> Result<()> {
        let coords = self.cochain_coords(degree);
        if coords > 100_000 {
            return Err(Error::Resource(format!(
                "bar cochain space in degree {degree} has {coords} coordinates (guard 100000)"
            )));
        }
        Ok(())
    }

    /// Evaluate at a full `(i+1)`-tuple using `SG`-linearity.
    pub fn eval(&self, a: &BarCochain<F::Elem>, tuple: &[usize]) -> Vec<F::Elem> {
        let m = self.act.order;
        assert_eq!(tuple.len(), a.degree + 1);
        let last = tuple[a.degree];
        let rep: Vec<usize> = tuple[..a.degree]
            .iter()
            .map(|&x| (x + m - last) % m)
            .collect();
        let v = &a.values[tuple_index(m, &rep)];
        crate::exact::row_mat_apply(&self.act.field, v, &self.sigma_pows[last])
    }

    /// Coboundary `a d*_{i+1}` in degree `i+1`.
    pub fn coboundary(&self, a: &BarCochain<F::Elem>) -> BarCochain<F::Elem> {
        let f = &self.act.field;
        let m = self.act.order;
        let i = a.degree;
        let n_tuples = m.pow((i + 1) as u32);
        let mut values = Vec::with_capacity(n_tuples);
        for idx in 0..n_tuples {
            let mut tuple = index_tuple(m, i + 1, idx);
            tuple.push(0); // normalized last entry: the identity
            let mut acc = vec![f.zero(); self.act.rank];
            for l in 0..=i + 1 {
                let mut sub = tuple.clone();
                sub.remove(l);
                let v = self.eval(a, &sub);
                let sign_plus = (i + 1 - l) % 2 == 0;
                for (kk, x) in v.iter().enumerate() {
                    acc[kk] = if sign_plus {
                        f.add(&acc[kk], x)
                    } else {
                        f.sub(&acc[kk], x)
                    };
                }
            }
            values.push(acc);
        }
        BarCochain {
            degree: i + 1,
            values,
        }
    }

    pub fn is_cocycle(&self, a: &BarCochain<F::Elem>) -> bool {
        let f = &self.act.field;
        self.coboundary(a)
            .values
            .iter()
            .flatten()
            .all(|e| f.is_zero(e))
    }

    /// Cup product `(g_{[0,i+j]})(a u b) = (g_{[0,i]})a * (g_{[i,i+j]})b`.
    pub fn cup(
        &self,
        a: &BarCochain<F::Elem>,
        b: &BarCochain<F::Elem>,
    ) -> Result<BarCochain<F::Elem>> {
        if !self.is_cocycle(a) || !self.is_cocycle(b) {
            return Err(Error::Domain("cup product inputs must be cocycles".into()));
        }
        Ok(self.cup_unchecked(a, b))
    }

    /// Cup product without the cocycle check; the Leibniz rule holds on all
    /// cochains, only the induced map on cohomology needs cocycles.
    pub fn cup_unchecked(
        &self,
        a: &BarCochain<F::Elem>,
        b: &BarCochain<F::Elem>,
    ) -> BarCochain<F::Elem> {
        let m = self.act.order;
        let (i, j) = (a.degree, b.degree);
        let n_tuples = m.pow((i + j) as u32);
        let mut values = Vec::with_capacity(n_tuples);
        for idx in 0..n_tuples {
            let mut tuple = index_tuple(m, i + j, idx);
            tuple.push(0);
            let va = self.eval(a, &tuple[0..=i]);
            let vb = self.eval(b, &tuple[i..=i + j]);
            values.push(self.act.t_mul(&self.gen_pows, &va, &vb));
        }
        BarCochain {
            degree: i + j,
            values,
        }
    }

    /// The homotopy `c_{a,b}` witnessing graded commutativity:
    /// `h_{[0,i+j-1]} c_{a,b} = sum_m (-1)^{m(i+j-1)} (h_{[m,m+i]})a * (h_{[m+i,i+j-1]} (x) h_{[0,m]})b`.
    pub fn commutator_homotopy(
        &self,
        a: &BarCochain<F::Elem>,
        b: &BarCochain<F::Elem>,
    ) -> BarCochain<F::Elem> {
        let f = &self.act.field;
        let m_ord = self.act.order;
        let (i, j) = (a.degree, b.degree);
        assert!(i + j >= 1);
        let deg = i + j - 1;
        let n_tuples = m_ord.pow(deg as u32);
        let mut values = Vec::with_capacity(n_tuples);
        for idx in 0..n_tuples {
            let mut tuple = index_tuple(m_ord, deg, idx);
            tuple.push(0); // h_{i+j-1} = identity representative
            let mut acc = vec![f.zero(); self.act.rank];
            for mm in 0..j {
                let va = self.eval(a, &tuple[mm..=mm + i]);
                let mut arg: Vec<usize> = tuple[mm + i..=deg].to_vec();
                arg.extend_from_slice(&tuple[0..=mm]);
                let vb = self.eval(b, &arg);
                let term = self.act.t_mul(&self.gen_pows, &va, &vb);
                let sign_plus = (mm * deg) % 2 == 0;
                for (kk, x) in term.iter().enumerate() {
                    acc[kk] = if sign_plus {
                        f.add(&acc[kk], x)
                    } else {
                        f.sub(&acc[kk], x)
                    };
                }
            }
            values.push(acc);
        }
        BarCochain {
            degree: deg,
            values,
        }
    }

    fn flatten(&self, a: &BarCochain<F::Elem>) -> Vec<F::Elem> {
        a.values.iter().flatten().cloned().collect()
    }

    fn unflatten(&self, degree: usize, v: &[F::Elem]) -> BarCochain<F::Elem> {
        let r = self.act.rank;
        BarCochain {
            degree,
            values: v.chunks(r).map(|c| c.to_vec()).collect(),
        }
    }

    /// Matrix of `d*_{i+1} : CP_i -> CP_{i+1}` acting on flattened rows.
    pub fn coboundary_matrix(&self, i: usize) -> Result<Mat<F::Elem>> {
        self.guard(i + 1)?;
        let f = &self.act.field;
        let n_in = self.cochain_coords(i);
        let mut rows = Vec::with_capacity(n_in);
        for k in 0..n_in {
            let mut v = vec![f.zero(); n_in];
            v[k] = f.one();
            let unit = self.unflatten(i, &v);
            rows.push(self.flatten(&self.coboundary(&unit)));
        }
        Ok(Mat::from_rows(rows))
    }
}

/// Bar cohomology in degrees `0..=max_degree`, with a torsion generator of
/// `H^1` (when any) as a tabulated 1-cocycle.
pub struct BarCohomology<E> {
    pub modules: Vec<ModuleShape>,
    pub h1_generator: Option<BarCochain<E>>,
}

pub fn bar_cohomology<F: ValuedField>(
    act: &CyclicAction<F>,
    max_degree: usize,
) -> Result<BarCohomology<F::Elem>> {
    let bar = BarComplex::new(act);
    let f = &act.field;
    let mut d_mats = Vec::with_capacity(max_degree + 1);
    for i in 0..=max_degree {
        d_mats.push(bar.coboundary_matrix(i)?);
    }
    let mut modules = Vec::with_capacity(max_degree + 1);
    let mut h1_generator = None;
    for i in 0..=max_degree {
        let kern = left_kernel_lattice(f, &d_mats[i]);
        let shape = if i == 0 {
            ModuleShape {
                free_rank: kern.rows(),
                torsion: vec![],
            }
        } else {
            lattice_quotient(f, &d_mats[i - 1], &kern)?
        };
        if i == 1 && shape.torsion.iter().any(|&e| e > 0) {
            // pick a kernel basis vector outside the image lattice
            for r in 0..kern.rows() {
                let target = kern.row(r).to_vec();
                let sol = crate::exact::solve_over_dvr(f, &d_mats[0].transpose(), &target)?;
                if sol.is_none() {
                    h1_generator = Some(bar.unflatten(1, &target));
                    break;
                }
            }
            if h1_generator.is_none() {
                return Err(Error::Internal(
                    "H^1 is nonzero but no generator found".into(),
                ));
            }
        }
        modules.push(shape);
    }
    Ok(BarCohomology {
        modules,
        h1_generator,
    })
}

/// Evaluation of a 1-cocycle at `(sigma, 1)`: the comparison map to the
/// classical complex, landing in `ker Tr / im(sigma - 1)`.
pub fn one_cocycle_at_sigma<F: ValuedField>(
    act: &CyclicAction<F>,
    a: &BarCochain<F::Elem>,
) -> Vec<F::Elem> {
    assert_eq!(a.degree, 1);
    let bar = BarComplex::new(act);
    bar.eval(a, &[1, 0])
}

/// Is the cocycle a coboundary? Decided over `S` against `d*_i`.
pub fn is_coboundary<F: ValuedField>(
    act: &CyclicAction<F>,
    a: &BarCochain<F::Elem>,
) -> Result<bool> {
    let bar = BarComplex::new(act);
    if !bar.is_cocycle(a) {
        return Err(Error::Domain("not a cocycle".into()));
    }
    let d = bar.coboundary_matrix(a.degree - 1)?;
    let target = bar.flatten(a);
    Ok(crate::exact::solve_over_dvr(&act.field, &d.transpose(), &target)?.is_some())
}

/// Smallest `k >= 0` with `s^k (class of a) = 0` in cohomology; the
/// annihilator exponent of the class.
pub fn class_annihilator_exponent<F: ValuedField>(
    act: &CyclicAction<F>,
    a: &BarCochain<F::Elem>,
) -> Result<i64> {
    let f = &act.field;
    let mut k = 0i64;
    let mut scaled = a.clone();
    loop {
        if is_coboundary(act, &scaled)? {
            return Ok(k);
        }
        let s = f.uniformizer_pow(1);
        scaled = BarCochain {
            degree: scaled.degree,
            values: scaled
                .values
                .iter()
                .map(|v| v.iter().map(|e| f.mul(e, &s)).collect())
                .collect(),
        };
        k += 1;
        if k > 64 {
            return Err(Error::Internal(
                "class does not appear to be torsion".into(),
            ));
        }
    }
}

/// Result of the brute-force chain lift through degree 2.
pub struct LiftResult {
    /// Degree-1 component (a mu-slot element of Xi).
    pub w0: Gamma,
    /// Degree-2 component (a nu-slot element).
    pub x: Gamma,
    /// Degree-3 component.
    pub y: Gamma,
}

/// Lift a 1-cocycle `c` (coordinates over the `chi`-basis, annihilated by
/// the dualized alpha) to a chain map through degree 2 by solving the
/// commuting squares over `S`, without using the closed-form lift.
pub fn independent_lift(res: &Resolution<'_>, c: &[LfElem]) -> Result<LiftResult> {
    let tw = res.tower;
    let f = &tw.base;
    let p = tw.g;
    if c.len() != p {
        return Err(Error::Usage("cocycle must have p coordinates".into()));
    }
    // cocycle condition: c * alpha = 0 in Hom coordinates
    let ca = crate::exact::row_mat_apply(f, c, &res.alpha);
    if ca.iter().any(|e| !f.is_zero(e)) {
        return Err(Error::Domain(
            "input is not annihilated by the dualized alpha".into(),
        ));
    }
    let nmu = p * p;
    let n_unknowns = 3 * nmu;
    // precompute products with the mu-basis
    let beta_mu: Vec<Gamma> = res
        .mu
        .elems
        .iter()
        .map(|m| mat_mul(f, &res.beta, m))
        .collect();
    let mu_alpha: Vec<Gamma> = res
        .mu
        .elems
        .iter()
        .map(|m| mat_mul(f, m, &res.alpha))
        .collect();
    let alpha_mu: Vec<Gamma> = res
        .mu
        .elems
        .iter()
        .map(|m| mat_mul(f, &res.alpha, m))
        .collect();
    let mu_beta: Vec<Gamma> = res
        .mu
        .elems
        .iter()
        .map(|m| mat_mul(f, m, &res.beta))
        .collect();

    let n_rows = p + 2 * nmu;
    let mut a = crate::exact::mat_zero(f, n_rows, n_unknowns);
    let mut rhs = vec![f.zero(); n_rows];
    // rows 0..p: row 0 of W0 equals c
    for cc in 0..p {
        for m in 0..nmu {
            *a.at_mut(cc, m) = res.mu.elems[m].at(0, cc).clone();
        }
        rhs[cc] = c[cc].clone();
    }
    // rows p..p+nmu: beta X - W0 alpha = 0, entry (r, cc)
    for r in 0..p {
        for cc in 0..p {
            let row = p + r * p + cc;
            for m in 0..nmu {
                *a.at_mut(row, nmu + m) = beta_mu[m].at(r, cc).clone();
                *a.at_mut(row, m) = f.neg(mu_alpha[m].at(r, cc));
            }
        }
    }
    // rows p+nmu..: alpha Y - X beta = 0
    for r in 0..p {
        for cc in 0..p {
            let row = p + nmu + r * p + cc;
            for m in 0..nmu {
                *a.at_mut(row, 2 * nmu + m) = alpha_mu[m].at(r, cc).clone();
                *a.at_mut(row, nmu + m) = f.neg(mu_beta[m].at(r, cc));
            }
        }
    }
    let sol = crate::exact::solve_over_dvr(f, &a, &rhs)?.ok_or_else(|| {
        Error::Internal("lifting system unsolvable; contradicts exactness".into())
    })?;
    let from_coords = |z: &[LfElem]| -> Gamma {
        let mut acc = crate::exact::mat_zero(f, p, p);
        for (m, zm) in z.iter().enumerate() {
            if !f.is_zero(zm) {
                acc = crate::exact::mat_add(
                    f,
                    &acc,
                    &crate::exact::mat_scale(f, &res.mu.elems[m], zm),
                );
            }
        }
        acc
    };
    let w0 = from_coords(&sol[0..nmu]);
    let x = from_coords(&sol[nmu..2 * nmu]);
    let y = from_coords(&sol[2 * nmu..3 * nmu]);
    // sanity: commuting squares hold exactly
    if mat_mul(f, &res.beta, &x) != mat_mul(f, &w0, &res.alpha)
        || mat_mul(f, &res.alpha, &y) != mat_mul(f, &x, &res.beta)
    {
        return Err(Error::Internal(
            "solved lift fails the commuting squares".into(),
        ));
    }
    Ok(LiftResult { w0, x, y })
}

/// The induced Yoneda product with `chi_k`: the degree-2 cocycle value
/// `t^k X`, reduced against the image lattice of the dualized alpha.
/// Returns whether it agrees with the closed-form structure constant
/// modulo coboundaries.
pub fn lift_product_matches_constant(
    res: &Resolution<'_>,
    lift: &LiftResult,
    j: usize,
    k_idx: usize,
) -> Result<bool> {
    let tw = res.tower;
    let f = &tw.base;
    let c = structure_constant(tw.p.get(), tw.b, j, k_idx)?;
    let mut expect = vec![f.zero(); tw.g];
    if c.present {
        let u = crate::exact::ratio(1, crate::wedder::over(tw.b - j as i64, tw.g as i64));
        expect[0] = f.mul(&f.uniformizer_pow(c.exponent), &f.from_rat(&u));
    }
    let got = lift.x.row(k_idx).to_vec();
    let diff: Vec<LfElem> = got.iter().zip(&expect).map(|(a, b)| f.sub(a, b)).collect();
    // difference must lie in the image lattice of alpha* = S-row span of alpha
    Ok(crate::exact::solve_over_dvr(f, &res.alpha.transpose(), &diff)?.is_some())
}
