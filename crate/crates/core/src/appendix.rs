//! The cyclic-of-order-`p^2` experiment: the tower `Z_(p)[pi_3] | Z_(p)`
//! with its Sen element, the two-variable derivation order and the
//! `E`-operator order, valuation evidence for the congruence conjecture,
//! colength chains, and the displayed reduced generator matrices.
//!
//! Matrices live on the basis `(u^i v^j)_{i,j in [0, p-1]}` of
//! `U = Z_(p)[pi_3]` over `S = Z_(p)`, ordered `u^0 v^0, u^0 v^1, ...`;
//! the basis element `u^i v^j` has `val_u = i + p j`, so the order
//! `Lambda = { f : (U u^k) f <= U u^k }` is cut out by the entry bounds
//! `val_p(f[r][c]) >= ceil((m_r + k - m_c)/p^2)` with `k = 0`.
use crate::exact::{val_p, LinSolver, LocalQ, Mat, Prime, Rat, Val, ValuedField};
use crate::fields::{minimal_polynomial_q, pi_in, Cyclotomic, LfElem, LocalField};
use crate::modlat::{smith_val_sum_words, CongruenceLattice, ModPe};
use crate::{Error, Result};

#[path = "appendix_golden.rs"]
pub mod golden;

/// `U = Z_(p)[pi_3]` with `G = C_{p^2}` generated by the restriction of
/// `zeta_{p^3} -> zeta_{p^3}^{1+p}`, together with the Sen element
/// `v = prod_i u^{sigma^i}` and all generator matrices on the
/// `(u^i v^j)` basis.
pub struct AppendixTower {
    pub p: u64,
    /// `p^2`, the rank of `U` over `S` and the order of `G`.
    pub n: usize,
    /// `L = Q(u)` with the `u`-power representation.
    pub l: LocalField,
    /// Sen element in `u`-power coordinates.
    pub v: LfElem,
    /// Galois generator on the `u`-power basis.
    pub sigma_l: Mat<Rat>,
    /// Multiplication by `u` on the mixed basis.
    pub u_dot: Mat<Rat>,
    /// Multiplication by `v` on the mixed basis.
    pub v_dot: Mat<Rat>,
    /// The Galois generator on the mixed basis.
    pub sigma_dot: Mat<Rat>,
    /// `val_u` of the mixed basis element at each index.
    pub m_val: Vec<i64>,
    mixed_solver: LinSolver<LocalQ>,
    prime: Prime,
}

/// Default guard: exact lattice work is wired for these primes.
pub fn guard_p(p: u64, force: bool) -> Result<()> {
    if force || matches!(p, 3 | 5 | 7) {
        Ok(())
    } else {
        Err(Error::Usage(format!(
            "appendix experiment is guarded to p in {{3, 5, 7}}; got {p} (use force to override)"
        )))
    }
}

pub fn build_appendix_tower(p: u64, force: bool) -> Result<AppendixTower> {
    let prime = Prime::odd(p)?;
    guard_p(p, force)?;
    let n = (p * p) as usize;
    let amb = Cyclotomic::new(prime, 3);
    let u_amb = pi_in(&amb, 3);
    let q = LocalQ::new(prime);

    // ambient u-powers and the coordinate solver for L = Q(u)
    let mut u_pows_amb = Vec::with_capacity(n + 1);
    let mut acc = amb.one();
    for _ in 0..=n {
        u_pows_amb.push(acc.clone());
        acc = amb.mul(&acc, &u_amb);
    }
    let mu_u = minimal_polynomial_q(&amb, &u_amb);
    if mu_u.len() != n + 1 {
        return Err(Error::Internal(
            "pi_3 does not have degree p^2 over Q".into(),
        ));
    }
    let l = LocalField::new(mu_u, prime)?;
    let upow_basis = Mat::from_fn(amb.phi(), n, |r, c| u_pows_amb[c][r].clone());
    let u_solver = LinSolver::new(q, upow_basis)?;

    // sigma on L from the ambient action zeta -> zeta^{1+p}
    let sigma_exp = 1 + p;
    let u_sigma = u_solver
        .solve(&amb.galois(sigma_exp, &u_amb))
        .ok_or_else(|| Error::Internal("u^sigma escaped L".into()))?;
    let mut sigma_rows = Vec::with_capacity(n);
    let mut pow = l.one();
    for _ in 0..n {
        sigma_rows.push(pow.clone());
        pow = l.mul(&pow, &u_sigma);
    }
    let sigma_l = Mat::from_rows(sigma_rows);

    let apply_sigma = |x: &LfElem| -> LfElem { crate::exact::row_mat_apply(&q, x, &sigma_l) };

    // Sen element v = prod_{i in [0, p-1]} u^{sigma^i}
    let mut v = l.gen();
    let mut conj = l.gen();
    for _ in 1..p {
        conj = apply_sigma(&conj);
        v = l.mul(&v, &conj);
    }
    if l.val(&v) != Val::Finite(p as i64) {
        return Err(Error::Internal(
            "Sen element does not have valuation p".into(),
        ));
    }
    // Galois displacement valuations
    let du = l.sub(&apply_sigma(&l.gen()), &l.gen());
    if l.val(&du) != Val::Finite(2) {
        return Err(Error::Internal("val_u(u^sigma - u) != 2".into()));
    }
    let dv = l.sub(&apply_sigma(&v), &v);
    if l.val(&dv) != Val::Finite(1 + 2 * p as i64) {
        return Err(Error::Internal("val_u(v^sigma - v) != 1 + 2p".into()));
    }

    // mixed basis u^i v^j at index i*p + j, in u-power coordinates
    let pp = p as usize;
    let mut v_pows = Vec::with_capacity(pp);
    let mut acc = l.one();
    for _ in 0..pp {
        v_pows.push(acc.clone());
        acc = l.mul(&acc, &v);
    }
    let mut mixed: Vec<LfElem> = Vec::with_capacity(n);
    let mut m_val = Vec::with_capacity(n);
    for i in 0..pp {
        for j in 0..pp {
            let e = l.mul(&l.uniformizer_pow(i as i64), &v_pows[j]);
            if l.val(&e) != Val::Finite((i + pp * j) as i64) {
                return Err(Error::Internal(
                    "mixed basis element has wrong valuation".into(),
                ));
            }
            mixed.push(e);
            m_val.push((i + pp * j) as i64);
        }
    }
    let mixed_mat = Mat::from_fn(n, n, |r, c| mixed[c][r].clone());
    // the mixed tuple must span the same S-lattice as the u-powers
    let ctx_check = ModPe::new(p, 2);
    let words: Vec<u64> = (0..n * n)
        .map(|ix| ctx_check.from_rat(&mixed_mat.at(ix / n, ix % n).clone()))
        .collect();
    match smith_val_sum_words(ctx_check, n, &words) {
        Some(0) => {}
        other => {
            return Err(Error::Internal(format!(
                "mixed basis change has nonunit determinant (val {other:?})"
            )))
        }
    }
    let mixed_solver = LinSolver::new(q, mixed_mat)?;

    let coords = |x: &LfElem| -> Result<Vec<Rat>> {
        mixed_solver
            .solve(x)
            .ok_or_else(|| Error::Internal("element escaped the mixed basis".into()))
    };

    let mut u_rows = Vec::with_capacity(n);
    let mut v_rows = Vec::with_capacity(n);
    let mut s_rows = Vec::with_capacity(n);
    let sigma_v = apply_sigma(&v);
    for i in 0..pp {
        for j in 0..pp {
            let base = &mixed[i * pp + j];
            u_rows.push(coords(&l.mul(base, &l.gen()))?);
            v_rows.push(coords(&l.mul(base, &v))?);
            let si = {
                let mut acc = l.one();
                let su = apply_sigma(&l.gen());
                for _ in 0..i {
                    acc = l.mul(&acc, &su);
                }
                for _ in 0..j {
                    acc = l.mul(&acc, &sigma_v);
                }
                acc
            };
            s_rows.push(coords(&si)?);
        }
    }

    Ok(AppendixTower {
        p,
        n,
        l,
        v,
        sigma_l,
        u_dot: Mat::from_rows(u_rows),
        v_dot: Mat::from_rows(v_rows),
        sigma_dot: Mat::from_rows(s_rows),
        m_val,
        mixed_solver,
        prime,
    })
}

impl AppendixTower {
    /// Entry bound for membership in `u_dot^k Lambda`.
    pub fn ideal_bound(&self, r: usize, c: usize, k: i64) -> u32 {
        let n = self.n as i64;
        let need = self.m_val[r] + k - self.m_val[c];
        if need <= 0 {
            0
        } else {
            need.div_euclid(n) as u32 + u32::from(need.rem_euclid(n) != 0)
        }
    }

    /// Exact membership of a rational matrix in `u_dot^k Lambda`.
    pub fn in_ideal(&self, m: &Mat<Rat>, k: i64) -> bool {
        for r in 0..self.n {
            for c in 0..self.n {
                let bound = self.ideal_bound(r, c, k);
                if val_p(m.at(r, c), self.prime) < Val::Finite(bound as i64) {
                    return false;
                }
            }
        }
        true
    }

    pub fn mixed_coords(&self, x: &LfElem) -> Option<Vec<Rat>> {
        self.mixed_solver.solve(x)
    }
}

/// Per-automorphism valuation evidence for the displacement congruence:
/// `2(v - v^tau) + (u^tau)^p (u - u^tau) u^{p-1}
///  + ((u^tau)^{2p-1} - (u^tau)^{2p})(u - u^tau) = 0 mod u^{2p+3}`.
#[derive(Clone, Debug)]
pub struct ConjectureIReport {
    pub p: u64,
    pub threshold: i64,
    /// `(k, val_u)` for `tau = sigma^k`.
    pub per_tau: Vec<(u32, Val)>,
}

impl ConjectureIReport {
    pub fn holds(&self) -> bool {
        self.per_tau
            .iter()
            .all(|&(_, v)| v >= Val::Finite(self.threshold))
    }
}

/// Displacement-congruence evidence computed in `Z[zeta_{p^3}]` modulo
/// `p^cap_exp`. Coordinate valuations below the cap are exact and capped
/// ones only strengthen the bound, so any reported valuation below
/// `p^2 * cap_exp` is the true one and the conjunction with the threshold
/// is rigorous. This path avoids the expensive exact tower build and is
/// the default for `p = 7`.
pub fn check_conjecture_i_modular(p: u64, cap_exp: u32) -> Result<ConjectureIReport> {
    let prime = Prime::odd(p)?;
    let n = (p * p) as usize;
    let amb = Cyclotomic::new(prime, 3);
    let ctx = ModPe::new(p, cap_exp);
    let phi = amb.phi();
    // reduced multiplication tables
    let zeta_pow: Vec<Vec<u64>> = (0..amb.order())
        .map(|e| amb.zeta(e).iter().map(|c| ctx.from_rat(c)).collect())
        .collect();
    let wmulv = |a: &[u64], b: &[u64]| -> Vec<u64> {
        let mut acc = vec![0u64; 2 * phi - 1];
        for (i, &x) in a.iter().enumerate() {
            if x == 0 {
                continue;
            }
            for (j, &y) in b.iter().enumerate() {
                if y != 0 {
                    acc[i + j] = (acc[i + j] + x * y) % ctx.m;
                }
            }
        }
        let mut out: Vec<u64> = acc[..phi].to_vec();
        for (e, &c) in acc.iter().enumerate().skip(phi) {
            if c == 0 {
                continue;
            }
            for (k, &r) in zeta_pow[e % amb.order() as usize].iter().enumerate() {
                if r != 0 {
                    out[k] = (out[k] + c * r) % ctx.m;
                }
            }
        }
        out
    };
    let wgal = |a: u64, x: &[u64]| -> Vec<u64> {
        let mut out = vec![0u64; phi];
        for (e, &c) in x.iter().enumerate() {
            if c == 0 {
                continue;
            }
            for (k, &r) in zeta_pow[((e as u64 * a) % amb.order()) as usize]
                .iter()
                .enumerate()
            {
                if r != 0 {
                    out[k] = (out[k] + c * r) % ctx.m;
                }
            }
        }
        out
    };
    let wsubv = |a: &[u64], b: &[u64]| -> Vec<u64> {
        a.iter().zip(b).map(|(&x, &y)| ctx.sub(x, y)).collect()
    };
    let waddv = |a: &[u64], b: &[u64]| -> Vec<u64> {
        a.iter().zip(b).map(|(&x, &y)| ctx.add(x, y)).collect()
    };
    let wpowv = |x: &[u64], k: u64| -> Vec<u64> {
        let mut acc = vec![0u64; phi];
        acc[0] = 1;
        for _ in 0..k {
            acc = wmulv(&acc, x);
        }
        acc
    };

    // u = pi_3 mod p^cap
    let mut u = vec![0u64; phi];
    u[0] = 1;
    {
        let pm = p.pow(3);
        for j in 1..p {
            let e = crate::fields::pow_mod(j, p.pow(2), pm);
            let mut f = zeta_pow[e as usize].clone();
            f[0] = ctx.sub(f[0], 1);
            u = wmulv(&u, &f);
        }
    }

    // echelonized solve for u-power coordinates; pivots are units because
    // the u-power span is a direct summand of Z_(p)[zeta]
    let mut upows = Vec::with_capacity(n);
    {
        let mut acc = vec![0u64; phi];
        acc[0] = 1;
        for _ in 0..n {
            upows.push(acc.clone());
            acc = wmulv(&acc, &u);
        }
    }
    // columns: n unknowns; rows: phi equations
    let mut elim: Vec<Vec<u64>> = (0..phi)
        .map(|r| {
            let mut row: Vec<u64> = (0..n).map(|c| upows[c][r]).collect();
            row.extend((0..phi).map(|k| u64::from(k == r)));
            row
        })
        .collect();
    let mut pivot_rows = Vec::with_capacity(n);
    for col in 0..n {
        let pr = (0..phi)
            .find(|&r| !pivot_rows.contains(&r) && ctx.val(elim[r][col]) == 0)
            .ok_or_else(|| Error::Internal("u-power system lost a unit pivot".into()))?;
        let inv = ctx.inv_unit(elim[pr][col]);
        for x in elim[pr].iter_mut() {
            *x = ctx.mul(*x, inv);
        }
        for r in 0..phi {
            if r == pr || elim[r][col] == 0 {
                continue;
            }
            let f = elim[r][col];
            let (head, tail) = if r < pr {
                let (a, b) = elim.split_at_mut(pr);
                (&mut a[r], &b[0])
            } else {
                let (a, b) = elim.split_at_mut(r);
                (&mut b[0], &a[pr])
            };
            for (x, y) in head.iter_mut().zip(tail.iter()) {
                *x = ctx.sub(*x, ctx.mul(f, *y));
            }
        }
        pivot_rows.push(pr);
    }
    let coords = |x: &[u64]| -> Vec<u64> {
        pivot_rows
            .iter()
            .map(|&pr| {
                let mut acc = 0u64;
                for (k, &c) in x.iter().enumerate() {
                    if c != 0 {
                        acc = ctx.add(acc, ctx.mul(elim[pr][n + k], c));
                    }
                }
                acc
            })
            .collect()
    };

    // Sen element
    let sig = 1 + p;
    let mut v = u.clone();
    let mut conj = u.clone();
    for _ in 1..p {
        conj = wgal(sig, &conj);
        v = wmulv(&v, &conj);
    }

    let val_u = |x: &[u64]| -> Val {
        let cs = coords(x);
        let mut best = Val::Infinity;
        for (i, &c) in cs.iter().enumerate() {
            let vv = ctx.val(c);
            if vv < ctx.e {
                let w = Val::Finite(n as i64 * vv as i64 + i as i64);
                if w < best {
                    best = w;
                }
            }
        }
        // entries at the cap contribute at least n * cap
        if best > Val::Finite(n as i64 * ctx.e as i64) {
            Val::Finite(n as i64 * ctx.e as i64)
        } else {
            best
        }
    };

    let u_pm1 = wpowv(&u, p - 1);
    let mut per_tau = Vec::with_capacity(n);
    let mut u_tau = u.clone();
    let mut v_tau = v.clone();
    for k in 0..n as u32 {
        if k == 0 {
            per_tau.push((0, Val::Infinity));
            continue;
        }
        u_tau = wgal(sig, &u_tau);
        v_tau = wgal(sig, &v_tau);
        let du = wsubv(&u, &u_tau);
        let two = {
            let mut t = vec![0u64; phi];
            t[0] = 2 % ctx.m;
            t
        };
        let term1 = wmulv(&two, &wsubv(&v, &v_tau));
        let term2 = wmulv(&wpowv(&u_tau, p), &wmulv(&du, &u_pm1));
        let term3 = wmulv(
            &wsubv(&wpowv(&u_tau, 2 * p - 1), &wpowv(&u_tau, 2 * p)),
            &du,
        );
        let expr = waddv(&waddv(&term1, &term2), &term3);
        per_tau.push((k, val_u(&expr)));
    }
    Ok(ConjectureIReport {
        p,
        threshold: 2 * p as i64 + 3,
        per_tau,
    })
}

pub fn check_conjecture_i(at: &AppendixTower) -> ConjectureIReport {
    let l = &at.l;
    let q = LocalQ::new(at.prime);
    let p = at.p;
    let u = l.gen();
    let lpow = |x: &LfElem, k: u64| {
        let mut acc = l.one();
        for _ in 0..k {
            acc = l.mul(&acc, x);
        }
        acc
    };
    let u_pm1 = lpow(&u, p - 1);
    let mut per_tau = Vec::with_capacity(at.n);
    let mut u_tau = u.clone();
    let mut v_tau = at.v.clone();
    for k in 0..at.n as u32 {
        if k > 0 {
            u_tau = crate::exact::row_mat_apply(&q, &u_tau, &at.sigma_l);
            v_tau = crate::exact::row_mat_apply(&q, &v_tau, &at.sigma_l);
        }
        let du = l.sub(&u, &u_tau);
        let term1 = {
            let two = l.from_i64(2);
            l.mul(&two, &l.sub(&at.v, &v_tau))
        };
        let term2 = l.mul(&lpow(&u_tau, p), &l.mul(&du, &u_pm1));
        let term3 = {
            let c = l.sub(&lpow(&u_tau, 2 * p - 1), &lpow(&u_tau, 2 * p));
            l.mul(&c, &du)
        };
        let expr = l.add(&l.add(&term1, &term2), &term3);
        per_tau.push((k, l.val(&expr)));
    }
    ConjectureIReport {
        p,
        threshold: 2 * p as i64 + 3,
        per_tau,
    }
}

// ---- word-matrix machinery mod p^E ----

const LATTICE_E: u32 = 4;

fn wmul(ctx: ModPe, n: usize, a: &[u64], b: &[u64]) -> Vec<u64> {
    let mut out = vec![0u64; n * n];
    for r in 0..n {
        for k in 0..n {
            let x = a[r * n + k];
            if x == 0 {
                continue;
            }
            let row = &b[k * n..(k + 1) * n];
            let dst = &mut out[r * n..(r + 1) * n];
            for (o, y) in dst.iter_mut().zip(row) {
                *o = (*o + x * *y) % ctx.m;
            }
        }
    }
    out
}

fn wsub(ctx: ModPe, a: &[u64], b: &[u64]) -> Vec<u64> {
    a.iter().zip(b).map(|(&x, &y)| ctx.sub(x, y)).collect()
}

fn wadd(ctx: ModPe, a: &[u64], b: &[u64]) -> Vec<u64> {
    a.iter().zip(b).map(|(&x, &y)| ctx.add(x, y)).collect()
}

fn wscale(ctx: ModPe, a: &[u64], c: u64) -> Vec<u64> {
    a.iter().map(|&x| ctx.mul(x, c)).collect()
}

fn wpow(ctx: ModPe, n: usize, a: &[u64], k: u64) -> Vec<u64> {
    let mut acc = vec![0u64; n * n];
    for i in 0..n {
        acc[i * n + i] = 1;
    }
    for _ in 0..k {
        acc = wmul(ctx, n, &acc, a);
    }
    acc
}

/// Reduce a rational matrix mod `p^E`.
pub fn word_matrix(ctx: ModPe, m: &Mat<Rat>) -> Vec<u64> {
    let n = m.rows();
    let mut out = Vec::with_capacity(n * n);
    for r in 0..n {
        for c in 0..n {
            out.push(ctx.from_rat(m.at(r, c)));
        }
    }
    out
}

fn derivation_w(ctx: ModPe, n: usize, x: &[u64], f: &[u64]) -> Vec<u64> {
    wsub(ctx, &wmul(ctx, n, f, x), &wmul(ctx, n, x, f))
}

/// The non-derivation operator
/// `E(f) = 2 D_v(f) + u^p D_u(f) u^{p-1} + (u^{2p-1} - u^{2p}) D_u(f)`.
struct EOperator {
    ctx: ModPe,
    n: usize,
    u: Vec<u64>,
    v: Vec<u64>,
    u_p: Vec<u64>,
    u_pm1: Vec<u64>,
    u_high: Vec<u64>,
}

impl EOperator {
    fn new(ctx: ModPe, n: usize, p: u64, u: Vec<u64>, v: Vec<u64>) -> Self {
        let u_p = wpow(ctx, n, &u, p);
        let u_pm1 = wpow(ctx, n, &u, p - 1);
        let u_high = wsub(ctx, &wpow(ctx, n, &u, 2 * p - 1), &wpow(ctx, n, &u, 2 * p));
        EOperator {
            ctx,
            n,
            u,
            v,
            u_p,
            u_pm1,
            u_high,
        }
    }

    fn d_u(&self, f: &[u64]) -> Vec<u64> {
        derivation_w(self.ctx, self.n, &self.u, f)
    }

    fn e(&self, f: &[u64]) -> Vec<u64> {
        let ctx = self.ctx;
        let n = self.n;
        let dv = derivation_w(ctx, n, &self.v, f);
        let du = self.d_u(f);
        let t1 = wscale(ctx, &dv, 2 % ctx.m);
        let t2 = wmul(ctx, n, &self.u_p, &wmul(ctx, n, &du, &self.u_pm1));
        let t3 = wmul(ctx, n, &self.u_high, &du);
        wadd(ctx, &wadd(ctx, &t1, &t2), &t3)
    }
}

/// Impose, for every unit matrix `E_rc`, the conditions
/// `op_image(E_rc)[r'][c'] = 0 mod p^{bound(r', c', fam(i,j))}` for the whole
/// derivation family. `inner`: 0 applies `D_v`, 1 applies `E`.
fn impose_family(
    at: &AppendixTower,
    lat: &mut CongruenceLattice,
    eop: &EOperator,
    inner_is_e: bool,
    length_v: i64,
) {
    let ctx = eop.ctx;
    let n = at.n;
    let heights = at.p as usize - 1;
    // layer[unit] = current operator image of that unit matrix
    let mut layer: Vec<Vec<u64>> = (0..n * n)
        .map(|ix| {
            let mut m = vec![0u64; n * n];
            m[ix] = 1;
            m
        })
        .collect();
    for j in 0..=heights {
        if j > 0 {
            layer = layer
                .iter()
                .map(|f| {
                    if inner_is_e {
                        eop.e(f)
                    } else {
                        derivation_w(ctx, n, &eop.v, f)
                    }
                })
                .collect();
        }
        let mut cur = layer.clone();
        for i in 0..=heights {
            if i > 0 {
                cur = cur.iter().map(|f| eop.d_u(f)).collect();
            }
            let k = 2 * i as i64 + length_v * j as i64;
            for r in 0..n {
                for c in 0..n {
                    let bound = at.ideal_bound(r, c, k);
                    if bound == 0 {
                        continue;
                    }
                    assert!(bound <= ctx.e, "lattice modulus too small");
                    let form: Vec<u64> = (0..n * n).map(|unit| cur[unit][r * n + c]).collect();
                    lat.impose(&form, bound);
                }
            }
        }
    }
}

/// The order `Lambda` as a congruence lattice.
pub fn lambda_lattice(at: &AppendixTower) -> CongruenceLattice {
    let ctx = ModPe::new(at.p, LATTICE_E);
    let n = at.n;
    let mut lat = CongruenceLattice::new(ctx, n * n);
    for r in 0..n {
        for c in 0..n {
            let bound = at.ideal_bound(r, c, 0);
            if bound > 0 {
                let mut form = vec![0u64; n * n];
                form[r * n + c] = 1;
                lat.impose(&form, bound);
            }
        }
    }
    lat.finalize();
    lat
}

/// `Lambda^D = Lambda((g_u, g_v), (p-1, p-1), (2, 2p+1))` relative to
/// `u_dot Lambda`, from the given generator matrices.
pub fn lambda_d_lattice(
    at: &AppendixTower,
    gen_u: &Mat<Rat>,
    gen_v: &Mat<Rat>,
) -> CongruenceLattice {
    let ctx = ModPe::new(at.p, LATTICE_E);
    let n = at.n;
    let mut lat = CongruenceLattice::new(ctx, n * n);
    let eop = EOperator::new(
        ctx,
        n,
        at.p,
        word_matrix(ctx, gen_u),
        word_matrix(ctx, gen_v),
    );
    impose_family(at, &mut lat, &eop, false, 2 * at.p as i64 + 1);
    lat.finalize();
    lat
}

/// `Lambda^{D,E}`: the `Lambda^D` conditions from `(du, dv)` plus the
/// `E`-operator conditions with lengths `(2, 2p+3)` from `(eu, ev)`.
pub fn lambda_de_lattice(
    at: &AppendixTower,
    du: &Mat<Rat>,
    dv: &Mat<Rat>,
    eu: &Mat<Rat>,
    ev: &Mat<Rat>,
) -> CongruenceLattice {
    let ctx = ModPe::new(at.p, LATTICE_E);
    let n = at.n;
    let mut lat = CongruenceLattice::new(ctx, n * n);
    let d_op = EOperator::new(ctx, n, at.p, word_matrix(ctx, du), word_matrix(ctx, dv));
    impose_family(at, &mut lat, &d_op, false, 2 * at.p as i64 + 1);
    let e_op = EOperator::new(ctx, n, at.p, word_matrix(ctx, eu), word_matrix(ctx, ev));
    impose_family(at, &mut lat, &e_op, true, 2 * at.p as i64 + 3);
    lat.finalize();
    lat
}

/// The flattened `S`-basis of the embedded twisted group ring modulo `p^E`:
/// the matrices of `sigma^k u^i v^j`.
pub fn xi_basis_words(at: &AppendixTower, ctx: ModPe) -> Vec<Vec<u64>> {
    let n = at.n;
    let pp = at.p as usize;
    let u = word_matrix(ctx, &at.u_dot);
    let v = word_matrix(ctx, &at.v_dot);
    let s = word_matrix(ctx, &at.sigma_dot);
    let mut uv = Vec::with_capacity(pp * pp);
    for i in 0..pp as u64 {
        let ui = wpow(ctx, n, &u, i);
        for j in 0..pp as u64 {
            uv.push(wmul(ctx, n, &ui, &wpow(ctx, n, &v, j)));
        }
    }
    let mut out = Vec::with_capacity(n * n);
    let mut spow = wpow(ctx, n, &s, 0);
    for k in 0..n {
        if k > 0 {
            spow = wmul(ctx, n, &spow, &s);
        }
        for y in &uv {
            out.push(wmul(ctx, n, &spow, y));
        }
    }
    out
}

/// `ell_S(Gamma / Xi)` from the basis determinant, adaptively raising the
/// working precision.
pub fn xi_colength_from_basis(at: &AppendixTower) -> Result<u64> {
    let n2 = at.n * at.n;
    let mut e = 8u32;
    loop {
        if (at.p as u128).pow(e) >= (1u128 << 31) {
            return Err(Error::Resource(
                "basis determinant needs too much precision".into(),
            ));
        }
        let ctx = ModPe::new(at.p, e);
        let rows = xi_basis_words(at, ctx);
        let mut flat = Vec::with_capacity(n2 * n2);
        for r in &rows {
            flat.extend_from_slice(r);
        }
        if let Some(v) = smith_val_sum_words(ctx, n2, &flat) {
            return Ok(v);
        }
        e += 4;
    }
}

/// `p^2 (p^2 + (p^2 - p - 2)/2)`.
pub fn xi_colength_formula(p: u64) -> i64 {
    let p2 = (p * p) as i64;
    p2 * (p2 + (p2 - p as i64 - 2) / 2)
}

#[derive(Clone, Debug)]
pub struct ColengthChain {
    pub p: u64,
    /// `(ell(L^{D,E}/Xi), ell(L^D/L^{D,E}), ell(Lambda/L^D), ell(Gamma/Lambda))`.
    pub chain: (i64, i64, i64, i64),
    pub total: i64,
    pub formula_total: i64,
    /// Whether the embedded ring is contained in `Lambda^{D,E}` (conjecture (ii) evidence).
    pub xi_contained_in_de: bool,
    /// `ell(Gamma/Xi)` from the basis determinant, cross-checking the formula.
    pub xi_colength_basis: u64,
}

impl ColengthChain {
    pub fn pass(&self) -> bool {
        self.total == self.formula_total
            && self.xi_contained_in_de
            && self.xi_colength_basis as i64 == self.formula_total
            && self.chain.0 >= 0
    }
}

pub fn colength_chain(at: &AppendixTower) -> Result<ColengthChain> {
    let ctx = ModPe::new(at.p, LATTICE_E);
    let lam = lambda_lattice(at);
    let lam_d = lambda_d_lattice(at, &at.u_dot, &at.v_dot);
    let lam_de = lambda_de_lattice(at, &at.u_dot, &at.v_dot, &at.u_dot, &at.v_dot);
    let c_lambda = lam.colength() as i64;
    let c_d = lam_d.colength() as i64;
    let c_de = lam_de.colength() as i64;
    let xi_colength_basis = xi_colength_from_basis(at)?;
    let xi = xi_basis_words(at, ctx);
    let xi_contained_in_de = xi.iter().all(|m| lam_de.contains(m));
    let chain = (
        xi_colength_basis as i64 - c_de,
        c_de - c_d,
        c_d - c_lambda,
        c_lambda,
    );
    Ok(ColengthChain {
        p: at.p,
        chain,
        total: xi_colength_basis as i64,
        formula_total: xi_colength_formula(at.p),
        xi_contained_in_de,
        xi_colength_basis,
    })
}

/// Congruence data of one displayed reduced matrix.
#[derive(Clone, Debug)]
pub struct ReductionCheck {
    pub name: &'static str,
    /// `u_dot^k Lambda` the difference must lie in.
    pub k: i64,
    pub congruent: bool,
}

#[derive(Clone, Debug)]
pub struct ReducedMatricesReport {
    pub p: u64,
    pub checks: Vec<ReductionCheck>,
    /// Substituted generators cut out the same `Lambda^D`.
    pub same_lambda_d: bool,
    /// Substituted generators cut out the same `Lambda^{D,E}`.
    pub same_lambda_de: bool,
}

impl ReducedMatricesReport {
    pub fn pass(&self) -> bool {
        self.checks.iter().all(|c| c.congruent) && self.same_lambda_d && self.same_lambda_de
    }
}

fn int_matrix(m: &[[i64; 9]; 9]) -> Mat<Rat> {
    Mat::from_fn(9, 9, |r, c| crate::exact::rat(m[r][c]))
}

fn int_matrix25(m: &[[i64; 25]; 25]) -> Mat<Rat> {
    Mat::from_fn(25, 25, |r, c| crate::exact::rat(m[r][c]))
}

#[cfg(test)]
fn rat_matrix(m: &[[(i64, i64); 9]; 9]) -> Mat<Rat> {
    Mat::from_fn(9, 9, |r, c| crate::exact::ratio(m[r][c].0, m[r][c].1))
}

/// Verify the displayed reduced matrices: the congruences against the exact
/// generators and the substitution invariance of the derived orders.
pub fn reduced_matrices(at: &AppendixTower) -> Result<ReducedMatricesReport> {
    let p = at.p;
    let (u3, u2, v3, v2, k_u3, k_u2, k_v3, k_v2) = match p {
        3 => (
            int_matrix(&golden::U_TRIPLE_P3),
            int_matrix(&golden::U_DOUBLE_P3),
            int_matrix(&golden::V_TRIPLE_P3),
            int_matrix(&golden::V_DOUBLE_P3),
            6i64,
            3i64,
            9 + 6,
            9 + 3,
        ),
        5 => (
            int_matrix25(&golden::U_TRIPLE_P5),
            int_matrix25(&golden::U_DOUBLE_P5),
            int_matrix25(&golden::V_TRIPLE_P5),
            int_matrix25(&golden::V_DOUBLE_P5),
            31,
            5,
            25 + 15,
            25 + 5,
        ),
        _ => {
            return Err(Error::Usage(
                "reduced matrices are recorded for p in {3, 5}".into(),
            ))
        }
    };
    let diff = |a: &Mat<Rat>, b: &Mat<Rat>| {
        Mat::from_fn(a.rows(), a.cols(), |r, c| a.at(r, c) - b.at(r, c))
    };
    let checks = vec![
        ReductionCheck {
            name: "u_dot = u_triple",
            k: k_u3,
            congruent: at.in_ideal(&diff(&at.u_dot, &u3), k_u3),
        },
        ReductionCheck {
            name: "u_dot = u_double",
            k: k_u2,
            congruent: at.in_ideal(&diff(&at.u_dot, &u2), k_u2),
        },
        ReductionCheck {
            name: "v_dot = v_triple",
            k: k_v3,
            congruent: at.in_ideal(&diff(&at.v_dot, &v3), k_v3),
        },
        ReductionCheck {
            name: "v_dot = v_double",
            k: k_v2,
            congruent: at.in_ideal(&diff(&at.v_dot, &v2), k_v2),
        },
    ];
    let lam_d = lambda_d_lattice(at, &at.u_dot, &at.v_dot);
    let lam_d_sub = lambda_d_lattice(at, &u2, &v2);
    let lam_de = lambda_de_lattice(at, &at.u_dot, &at.v_dot, &at.u_dot, &at.v_dot);
    let lam_de_sub = lambda_de_lattice(at, &u2, &v2, &u3, &v3);
    Ok(ReducedMatricesReport {
        p,
        checks,
        same_lambda_d: lam_d == lam_d_sub,
        same_lambda_de: lam_de == lam_de_sub,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exact::{ratio, LocalQ, Prime};

    #[test]
    fn build_p3_golden_matrices() {
        let at = build_appendix_tower(3, false).unwrap();
        assert_eq!(at.n, 9);
        // the exact multiplication displays
        assert_eq!(at.u_dot, rat_matrix(&golden::U_DOT_P3));
        assert_eq!(at.v_dot, rat_matrix(&golden::V_DOT_P3));
        // spot values called out separately
        assert_eq!(*at.u_dot.at(6, 0), ratio(-2433, 7217));
        assert_eq!(*at.u_dot.at(6, 1), ratio(3119, 1031));
        assert_eq!(at.l.val(&at.v), Val::Finite(3));
    }

    #[test]
    fn sigma_display_is_fifth_power_of_generator() {
        // The recorded Galois matrix is the matrix of sigma^5, i.e. of the
        // restriction of zeta -> zeta^2; the multiplication matrices pin the
        // generator itself down as the restriction of zeta -> zeta^{1+p}.
        let at = build_appendix_tower(3, false).unwrap();
        let q = LocalQ::new(Prime::new(3).unwrap());
        let s5 = crate::exact::mat_pow(&q, &at.sigma_dot, 5);
        assert_eq!(s5, rat_matrix(&golden::SIGMA_DOT_P3));
        assert_eq!(*s5.at(1, 0), ratio(-24876, 7217));
    }

    #[test]
    fn guard_rejects_unwired_primes() {
        assert!(build_appendix_tower(11, false).is_err());
        assert!(build_appendix_tower(4, true).is_err());
    }

    #[test]
    fn multiplication_generators_commute() {
        let at = build_appendix_tower(3, false).unwrap();
        let q = LocalQ::new(Prime::new(3).unwrap());
        let uv = crate::exact::mat_mul(&q, &at.u_dot, &at.v_dot);
        let vu = crate::exact::mat_mul(&q, &at.v_dot, &at.u_dot);
        assert_eq!(uv, vu);
        // hence the two derivations commute on everything
        let ctx = ModPe::new(3, LATTICE_E);
        let u = word_matrix(ctx, &at.u_dot);
        let v = word_matrix(ctx, &at.v_dot);
        let mut f = vec![0u64; 81];
        for (i, x) in f.iter_mut().enumerate() {
            *x = (i as u64 * 7 + 3) % ctx.m;
        }
        let duv = derivation_w(ctx, 9, &u, &derivation_w(ctx, 9, &v, &f));
        let dvu = derivation_w(ctx, 9, &v, &derivation_w(ctx, 9, &u, &f));
        assert_eq!(duv, dvu);
    }

    #[test]
    fn conjecture_i_p3() {
        let at = build_appendix_tower(3, false).unwrap();
        let rep = check_conjecture_i(&at);
        assert_eq!(rep.per_tau.len(), 9);
        assert!(rep.holds());
        assert_eq!(rep.per_tau[0].1, Val::Infinity);
        // the word-arithmetic route reports the same valuations
        let modular = check_conjecture_i_modular(3, 4).unwrap();
        assert_eq!(rep.per_tau, modular.per_tau);
    }

    #[test]
    fn conjecture_i_p7_modular() {
        let rep = check_conjecture_i_modular(7, 4).unwrap();
        assert_eq!(rep.per_tau.len(), 49);
        assert_eq!(rep.threshold, 17);
        assert!(rep.holds());
    }

    #[test]
    fn lambda_colength_p3() {
        let at = build_appendix_tower(3, false).unwrap();
        let lam = lambda_lattice(&at);
        assert_eq!(lam.colength(), 36); // p^2 (p^2 - 1)/2
    }

    #[test]
    fn chain_p3() {
        let at = build_appendix_tower(3, false).unwrap();
        let chain = colength_chain(&at).unwrap();
        assert_eq!(chain.chain, (0, 18, 45, 36));
        assert_eq!(chain.total, 99);
        assert!(chain.pass(), "{chain:?}");
    }

    #[test]
    fn reduced_p3() {
        let at = build_appendix_tower(3, false).unwrap();
        let rep = reduced_matrices(&at).unwrap();
        assert!(rep.pass(), "{rep:?}");
    }
}
