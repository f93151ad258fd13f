//! The 2-periodic projective resolution over the embedded twisted group
//! ring, its Ext groups, the closed-form chain lifts, Yoneda products, and
//! the cohomology ring presentation.
//!
//! A right-module map `Xi -> Xi` sending `1 -> w` is left multiplication by
//! `w`; composing "first f, then h" multiplies the defining elements in the
//! opposite order. The dual complex `Hom(Xi, T)` is identified with row
//! vectors over the basis `chi_k : 1 -> t^k`, on which the dualized maps
//! act by right multiplication with the defining matrices.

use crate::exact::{
    lattice_quotient, left_kernel_lattice, mat_scale, mat_zero, Mat, ModuleShape, Val, ValuedField,
};
use crate::fields::{LfElem, Tower};
use crate::ties::{self, satisfies_ties, MuBasis, TieSystem};
use crate::wedder::{ddot_power, eps, gmul, over, under, Gamma};
use crate::{Error, Result};

/// The maps of the 2-periodic resolution and the tie data of the order.
pub struct Resolution<'t> {
    pub tower: &'t Tower,
    /// `alpha: 1 -> s^{b - under(b) - 1} eps_{b_bar, p - b_bar}`.
    pub alpha: Gamma,
    /// `beta: 1 -> s^{under(b)} sum_i i eps_{i, b_bar}`.
    pub beta: Gamma,
    pub ties: TieSystem,
    pub mu: MuBasis,
    pub certificate: ResolutionCertificate,
}

/// Exactness bookkeeping from the two kernels `A` and `B`.
#[derive(Clone, Debug)]
pub struct ResolutionCertificate {
    pub alpha_beta_zero: bool,
    pub beta_alpha_zero: bool,
    /// (colength of `Img alpha` in `B`, colength of `Kern beta` in `B`); both `b(p-1)`.
    pub b_pair: (i64, i64),
    /// (colength of `Img beta` in `A`, colength of `Kern alpha` in `A`); both `bp(p-1)/2`.
    pub a_pair: (i64, i64),
}

impl ResolutionCertificate {
    pub fn pass(&self, p: i64, b: i64) -> bool {
        self.alpha_beta_zero
            && self.beta_alpha_zero
            && self.b_pair == (b * (p - 1), b * (p - 1))
            && self.a_pair == (b * p * (p - 1) / 2, b * p * (p - 1) / 2)
    }
}

fn flatten_rows(gs: &[Gamma]) -> Mat<LfElem> {
    Mat::from_rows(gs.iter().map(|g| g.flatten()).collect())
}

/// Build the resolution maps and certify exactness by colength accounting
/// inside the explicit kernels.
pub fn build_resolution(tw: &Tower) -> Result<Resolution<'_>> {
    let ft16 = ties::verify_ft16(tw)?;
    if !ft16.pass() {
        return Err(Error::Precondition(
            "the Wedderburn factorization check failed; resolution undefined".into(),
        ));
    }
    let (tie_sys, mu) = ties::lambda_d(tw, 0)?;
    let k = &tw.base;
    let p = tw.g;
    let (b, ub, ob) = (tw.b, tw.b_under, tw.b_bar as usize);

    let alpha = mat_scale(
        k,
        &eps(tw, ob, p as i64 - ob as i64),
        &k.uniformizer_pow(b - ub - 1),
    );
    let mut beta = mat_zero(k, p, p);
    for i in 0..p {
        let term = mat_scale(k, &eps(tw, i, ob as i64), &k.from_i64(i as i64));
        beta = crate::exact::mat_add(k, &beta, &term);
    }
    beta = mat_scale(k, &beta, &k.uniformizer_pow(ub));

    // alpha then beta is left multiplication by beta * alpha and conversely
    let ab = gmul(tw, &beta, &alpha);
    let ba = gmul(tw, &alpha, &beta);
    let zero = mat_zero(k, p, p);
    let alpha_beta_zero = ab == zero;
    let beta_alpha_zero = ba == zero;

    // B = Kern(1 -> beta) in Lambda, basis (eps_{ob, k})_k
    let b_basis: Vec<Gamma> = (0..p).map(|j| eps(tw, ob, j as i64)).collect();
    for w in &b_basis {
        if gmul(tw, &beta, w) != zero {
            return Err(Error::Internal(
                "claimed kernel basis of B is not killed by beta".into(),
            ));
        }
    }
    // A = Kern(1 -> alpha) in Lambda, basis (eps_{j,k})_{j >= 1}
    let mut a_basis: Vec<Gamma> = Vec::new();
    for j in 1..p {
        for kk in 0..p {
            a_basis.push(eps(tw, j, kk as i64));
        }
    }
    for w in &a_basis {
        if gmul(tw, &alpha, w) != zero {
            return Err(Error::Internal(
                "claimed kernel basis of A is not killed by alpha".into(),
            ));
        }
    }

    // kernels of left multiplication restricted to Xi, via the mu-basis
    let kern_in = |w: &Gamma| -> Mat<LfElem> {
        let rows: Vec<Vec<LfElem>> = mu.elems.iter().map(|m| gmul(tw, w, m).flatten()).collect();
        left_kernel_lattice(&k, &Mat::from_rows(rows))
    };
    let mu_rows = flatten_rows(&mu.elems);
    let to_matrix = |coords: &Mat<LfElem>| -> Mat<LfElem> {
        // rows are mu-coordinates; convert to flattened Gamma coordinates
        crate::exact::mat_mul(&k, coords, &mu_rows)
    };

    let b_rows = flatten_rows(&b_basis);
    let a_rows = flatten_rows(&a_basis);

    let kern_beta = to_matrix(&kern_in(&beta));
    let kern_alpha = to_matrix(&kern_in(&alpha));
    let img_alpha = Mat::from_rows(
        mu.elems
            .iter()
            .map(|m| gmul(tw, &alpha, m).flatten())
            .collect(),
    );
    let img_beta = Mat::from_rows(
        mu.elems
            .iter()
            .map(|m| gmul(tw, &beta, m).flatten())
            .collect(),
    );

    let colength_of = |sub: &Mat<LfElem>, sup: &Mat<LfElem>| -> Result<i64> {
        let q = lattice_quotient(&k, sub, sup)?;
        match q.length() {
            Val::Finite(l) => Ok(l),
            Val::Infinity => Err(Error::Internal("expected full-rank sublattice".into())),
        }
    };

    let certificate = ResolutionCertificate {
        alpha_beta_zero,
        beta_alpha_zero,
        b_pair: (
            colength_of(&img_alpha, &b_rows)?,
            colength_of(&kern_beta, &b_rows)?,
        ),
        a_pair: (
            colength_of(&img_beta, &a_rows)?,
            colength_of(&kern_alpha, &a_rows)?,
        ),
    };
    if !certificate.pass(p as i64, b) {
        return Err(Error::Internal(format!(
            "resolution exactness certificate failed: {certificate:?}"
        )));
    }
    Ok(Resolution {
        tower: tw,
        alpha,
        beta,
        ties: tie_sys,
        mu,
        certificate,
    })
}

/// The closed-form Ext module in one degree.
pub fn ext_formula(p: u64, b: i64, degree: u32) -> ModuleShape {
    let g = p as i64;
    let ub = b.div_euclid(g);
    let ob = b.rem_euclid(g);
    if degree == 0 {
        ModuleShape {
            free_rank: 1,
            torsion: vec![],
        }
    } else if degree % 2 == 0 {
        ModuleShape {
            free_rank: 0,
            torsion: vec![b - ub],
        }
    } else {
        let mut torsion = Vec::new();
        for _ in 0..ob {
            torsion.push(ub + 1);
        }
        for _ in 0..(g - 1 - ob) {
            if ub > 0 {
                torsion.push(ub);
            }
        }
        torsion.sort_unstable();
        ModuleShape {
            free_rank: 0,
            torsion,
        }
    }
}

/// Ext in one degree from Smith forms of the dualized complex, cross-checked
/// against the closed form.
pub fn ext_module(res: &Resolution<'_>, degree: u32) -> Result<ModuleShape> {
    let tw = res.tower;
    let k = &tw.base;
    let computed = if degree == 0 {
        let kern = left_kernel_lattice(&k, &res.beta);
        ModuleShape {
            free_rank: kern.rows(),
            torsion: vec![],
        }
    } else {
        let (out_map, in_map) = if degree % 2 == 0 {
            (&res.beta, &res.alpha)
        } else {
            (&res.alpha, &res.beta)
        };
        let kern = left_kernel_lattice(&k, out_map);
        lattice_quotient(&k, in_map, &kern)
            .map_err(|e| Error::Internal(format!("dual complex is not a complex: {e}")))?
    };
    let formula = ext_formula(tw.p.get(), tw.b, degree);
    if computed != formula {
        return Err(Error::Internal(format!(
            "Ext^{degree} mismatch: Smith route {computed:?}, closed form {formula:?}"
        )));
    }
    Ok(computed)
}

/// The chain-map lift of the degree-1 class `chi_j`, `j != b_bar`:
/// `mu_j = sum_i eps_{i,j}` on even sources and
/// `nu_j = s^{b + under(j-2b)} ( over(b-j)^{-1} eps_{over(2b-j), over(j-2b)}
///        + over(j-b)^{-1} eps_{b_bar, over(j-2b)} )` on odd sources.
pub fn lift_cocycle(res: &Resolution<'_>, j: usize) -> Result<(Gamma, Gamma)> {
    let tw = res.tower;
    let k = &tw.base;
    let g = tw.g as i64;
    let (b, ob) = (tw.b, tw.b_bar);
    if j as i64 == ob {
        return Err(Error::Usage(format!(
            "j = b_bar = {j} does not index an odd generator"
        )));
    }
    if j >= tw.g {
        return Err(Error::Usage(format!("j = {j} out of range")));
    }
    let mu_j = ddot_power(tw, j as i64);

    let jj = j as i64;
    let c1 = crate::exact::ratio(1, over(b - jj, g));
    let c2 = crate::exact::ratio(1, over(jj - b, g));
    let e1 = eps(tw, over(2 * b - jj, g) as usize, over(jj - 2 * b, g));
    let e2 = eps(tw, ob as usize, over(jj - 2 * b, g));
    let sum = crate::exact::mat_add(
        k,
        &mat_scale(k, &e1, &k.from_rat(&c1)),
        &mat_scale(k, &e2, &k.from_rat(&c2)),
    );
    let nu_j = mat_scale(k, &sum, &k.uniformizer_pow(b + under(jj - 2 * b, g)));

    // nu_j lies in Xi
    if !satisfies_ties(tw, &res.ties, &nu_j) {
        return Err(Error::Internal(format!("nu_{j} violates the ties")));
    }
    // chain map identities: nu_j beta = alpha mu_j and mu_j alpha = beta nu_j
    if gmul(tw, &res.beta, &nu_j) != gmul(tw, &mu_j, &res.alpha) {
        return Err(Error::Internal(format!("nu_{j} beta != alpha mu_{j}")));
    }
    if gmul(tw, &res.alpha, &mu_j) != gmul(tw, &nu_j, &res.beta) {
        return Err(Error::Internal(format!("mu_{j} alpha != beta nu_{j}")));
    }
    // mu_j chi_0 = chi_j: row 0 of mu_j is the coordinate row of t^j
    for c in 0..tw.g {
        let expect = if c == j { k.one() } else { k.zero() };
        if *mu_j.at(0, c) != expect {
            return Err(Error::Internal(format!("mu_{j} chi_0 != chi_{j}")));
        }
    }
    Ok((mu_j, nu_j))
}

/// The odd-times-odd structure constant
/// `chi_j * chi_k = delta_{over(j+k), over(2b)} s^{b + under(j+k-2b)} over(b-j)^{-1} chi_0`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct StructureConstant {
    pub present: bool,
    /// Exponent of `s` (meaningful only when present).
    pub exponent: i64,
    /// `over(b-j)^{-1} mod p`, in `[1, p-1]`.
    pub unit_inverse_mod_p: u64,
    /// Whether the product vanishes in `Ext^2 = S/s^{b - under(b)}`.
    pub zero_in_quotient: bool,
}

pub fn structure_constant(p: u64, b: i64, j: usize, k: usize) -> Result<StructureConstant> {
    let g = p as i64;
    let ob = b.rem_euclid(g);
    let ub = b.div_euclid(g);
    if j as i64 == ob || k as i64 == ob {
        return Err(Error::Usage("indices must avoid b_bar".into()));
    }
    if j >= p as usize || k >= p as usize {
        return Err(Error::Usage("indices out of range".into()));
    }
    let present = over(j as i64 + k as i64, g) == over(2 * b, g);
    let exponent = b + under(j as i64 + k as i64 - 2 * b, g);
    let u = over(b - j as i64, g) as u64;
    let unit_inverse_mod_p = crate::fields::pow_mod(u, p - 2, p);
    Ok(StructureConstant {
        present,
        exponent,
        unit_inverse_mod_p,
        zero_in_quotient: !present || exponent >= b - ub,
    })
}

/// Yoneda product of two odd classes at the cochain level: the value row
/// `t^k * nu_j`, which must be a multiple of `chi_0`.
pub fn odd_product_cochain(res: &Resolution<'_>, nu_j: &Gamma, k_idx: usize) -> Result<LfElem> {
    let tw = res.tower;
    let k = &tw.base;
    for c in 1..tw.g {
        if !k.is_zero(nu_j.at(k_idx, c)) {
            return Err(Error::Internal(
                "odd product cochain is not a multiple of chi_0".into(),
            ));
        }
    }
    Ok(nu_j.at(k_idx, 0).clone())
}

/// A generator of the presented cohomology ring.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct OddGenerator {
    pub j: usize,
    /// Annihilator exponent `e`: the class generates `S/s^e`; `e = 0` means
    /// the class is zero in cohomology.
    pub annihilator_exponent: i64,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct OddProduct {
    pub j: usize,
    pub k: usize,
    pub constant: StructureConstant,
}

/// Presentation of `Ext^*` as a graded commutative ring: one even degree-2
/// generator and the odd degree-1 generators with their annihilators and
/// pairwise products.
#[derive(Clone, Debug)]
pub struct RingPresentation {
    pub p: u64,
    pub b: i64,
    pub b_under: i64,
    pub b_bar: i64,
    pub even_annihilator_exponent: i64,
    pub odd_generators: Vec<OddGenerator>,
    pub odd_products: Vec<OddProduct>,
}

impl RingPresentation {
    pub fn new(p: u64, b: i64) -> Result<RingPresentation> {
        let g = p as i64;
        let ub = b.div_euclid(g);
        let ob = b.rem_euclid(g);
        let mut odd_generators = Vec::new();
        for j in 0..p as usize {
            if j as i64 == ob {
                continue;
            }
            let e = if (j as i64) < ob { ub + 1 } else { ub };
            odd_generators.push(OddGenerator {
                j,
                annihilator_exponent: e,
            });
        }
        let mut odd_products = Vec::new();
        for a in &odd_generators {
            for c in &odd_generators {
                odd_products.push(OddProduct {
                    j: a.j,
                    k: c.j,
                    constant: structure_constant(p, b, a.j, c.j)?,
                });
            }
        }
        Ok(RingPresentation {
            p,
            b,
            b_under: ub,
            b_bar: ob,
            even_annihilator_exponent: b - ub,
            odd_generators,
            odd_products,
        })
    }

    /// For `b = 1` the ring is `S[h1, h2]/(s h1, s h2, h1^2)`.
    pub fn b1_simplified(&self) -> Option<String> {
        if self.b != 1 {
            return None;
        }
        let s = if self.p == 0 {
            "s".to_string()
        } else {
            format!("{}", self.p)
        };
        Some(format!(
            "Z_({p})[h1,h2]/({s}*h1, {s}*h2, h1^2)",
            p = self.p,
            s = s
        ))
    }
}

impl std::fmt::Display for RingPresentation {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        writeln!(
            f,
            "graded commutative ring over S,  b = {}, under(b) = {}, over(b) = {}",
            self.b, self.b_under, self.b_bar
        )?;
        writeln!(
            f,
            "  even generator  e (degree 2): annihilator s^{}",
            self.even_annihilator_exponent
        )?;
        for g in &self.odd_generators {
            if g.annihilator_exponent > 0 {
                writeln!(
                    f,
                    "  odd generator h{} (degree 1): annihilator s^{}",
                    g.j, g.annihilator_exponent
                )?;
            } else {
                writeln!(f, "  odd generator h{} (degree 1): zero class", g.j)?;
            }
        }
        writeln!(
            f,
            "  e-multiplication shifts degree by 2 on all of degree >= 1"
        )?;
        for pr in &self.odd_products {
            if pr.j > pr.k {
                continue;
            }
            let c = &pr.constant;
            if !c.present {
                writeln!(f, "  h{} * h{} = 0", pr.j, pr.k)?;
            } else {
                let status = if c.zero_in_quotient {
                    " (zero in Ext^2)"
                } else {
                    " (nonzero)"
                };
                writeln!(
                    f,
                    "  h{} * h{} = {} * s^{} * e{}",
                    pr.j, pr.k, c.unit_inverse_mod_p, c.exponent, status
                )?;
            }
        }
        Ok(())
    }
}
