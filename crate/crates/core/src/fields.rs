//! Cyclotomic ambient fields `Q(zeta_{p^n})`, local number fields generated
//! by a uniformizer, and the extension towers `S < T` the rest of the crate
//! computes with.
//!
//! Every extension here is purely ramified over `Z_(p)` with residue degree
//! one, so an element written in the power basis of a uniformizer `r` of a
//! degree-`d` field has valuation `min_i (d * val_p(c_i) + i)`: the
//! summands `c_i r^i` have pairwise distinct valuations.

use num_traits::{One, Zero};

use crate::exact::{
    mat_identity, mat_mul, rat, val_p, IncrementalSpan, LinSolver, LocalQ, Mat, Prime, Rat,
    SpanInsert, Val, ValuedField,
};
use crate::poly;
use crate::{Error, Result};

pub type CycElem = Vec<Rat>;

/// The cyclotomic field `Q(zeta_N)` with `N = p^n`, elements as coefficient
/// vectors of length `phi(N)` over the power basis of `zeta`.
pub struct Cyclotomic {
    pub p: u64,
    pub n: u32,
    order: u64,
    phi: usize,
    zeta_pow: Vec<Vec<Rat>>,
}

impl Cyclotomic {
    pub fn new(p: Prime, n: u32) -> Self {
        assert!(n >= 1);
        let p = p.get();
        let order = p.pow(n);
        let pn1 = p.pow(n - 1) as usize;
        let phi = pn1 * (p as usize - 1);
        // X^phi = -(X^0 + X^{p^{n-1}} + ... + X^{(p-2) p^{n-1}}) mod Phi_{p^n}
        let mut zeta_pow: Vec<Vec<Rat>> = Vec::with_capacity(order as usize);
        for e in 0..phi {
            let mut v = vec![Rat::zero(); phi];
            v[e] = Rat::one();
            zeta_pow.push(v);
        }
        for _e in phi..order as usize {
            let prev = zeta_pow.last().unwrap();
            let mut v = vec![Rat::zero(); phi];
            for (i, c) in prev.iter().enumerate() {
                if c.is_zero() {
                    continue;
                }
                if i + 1 < phi {
                    v[i + 1] += c;
                } else {
                    for k in 0..(p as usize - 1) {
                        v[k * pn1] -= c;
                    }
                }
            }
            zeta_pow.push(v);
        }
        Cyclotomic {
            p,
            n,
            order,
            phi,
            zeta_pow,
        }
    }

    pub fn phi(&self) -> usize {
        self.phi
    }

    pub fn order(&self) -> u64 {
        self.order
    }

    pub fn zero(&self) -> CycElem {
        vec![Rat::zero(); self.phi]
    }

    pub fn one(&self) -> CycElem {
        let mut v = self.zero();
        v[0] = Rat::one();
        v
    }

    pub fn from_rat(&self, r: &Rat) -> CycElem {
        let mut v = self.zero();
        v[0] = r.clone();
        v
    }

    pub fn zeta(&self, e: u64) -> CycElem {
        self.zeta_pow[(e % self.order) as usize].clone()
    }

    pub fn add(&self, a: &CycElem, b: &CycElem) -> CycElem {
        a.iter().zip(b).map(|(x, y)| x + y).collect()
    }

    pub fn sub(&self, a: &CycElem, b: &CycElem) -> CycElem {
        a.iter().zip(b).map(|(x, y)| x - y).collect()
    }

    pub fn neg(&self, a: &CycElem) -> CycElem {
        a.iter().map(|x| -x).collect()
    }

    pub fn mul(&self, a: &CycElem, b: &CycElem) -> CycElem {
        let mut acc = vec![Rat::zero(); 2 * self.phi - 1];
        for (i, x) in a.iter().enumerate() {
            if x.is_zero() {
                continue;
            }
            for (j, y) in b.iter().enumerate() {
                if !y.is_zero() {
                    acc[i + j] += x * y;
                }
            }
        }
        let mut out: Vec<Rat> = acc[..self.phi].to_vec();
        for (e, c) in acc.iter().enumerate().skip(self.phi) {
            if c.is_zero() {
                continue;
            }
            let row = &self.zeta_pow[e % self.order as usize];
            for (k, r) in row.iter().enumerate() {
                if !r.is_zero() {
                    out[k] += c * r;
                }
            }
        }
        out
    }

    pub fn scale(&self, a: &CycElem, s: &Rat) -> CycElem {
        a.iter().map(|x| x * s).collect()
    }

    pub fn pow(&self, a: &CycElem, k: u32) -> CycElem {
        let mut acc = self.one();
        for _ in 0..k {
            acc = self.mul(&acc, a);
        }
        acc
    }

    pub fn is_zero(&self, a: &CycElem) -> bool {
        a.iter().all(|c| c.is_zero())
    }

    /// Galois action `zeta -> zeta^a`; `a` must be coprime to `p`.
    pub fn galois(&self, a: u64, x: &CycElem) -> CycElem {
        assert!(a % self.p != 0, "exponent must be a unit mod p^n");
        let mut out = self.zero();
        for (e, c) in x.iter().enumerate() {
            if c.is_zero() {
                continue;
            }
            let row = &self.zeta_pow[((e as u64 * a) % self.order) as usize];
            for (k, r) in row.iter().enumerate() {
                if !r.is_zero() {
                    out[k] += c * r;
                }
            }
        }
        out
    }

    pub fn as_rational(&self, x: &CycElem) -> Option<Rat> {
        if x.iter().skip(1).all(|c| c.is_zero()) {
            Some(x[0].clone())
        } else {
            None
        }
    }
}

/// Minimal polynomial over `Q` of an ambient element, monic, found as the
/// first linear dependency among its powers.
pub fn minimal_polynomial_q(amb: &Cyclotomic, x: &CycElem) -> poly::Poly {
    let q = LocalQ::new(Prime::new(amb.p).unwrap());
    let mut span = IncrementalSpan::new(q, amb.phi());
    let mut pow = amb.one();
    loop {
        match span.insert(pow.clone()) {
            SpanInsert::Independent => {}
            SpanInsert::Dependent(c) => {
                let k = c.len();
                let mut mu = vec![Rat::zero(); k + 1];
                for (i, ci) in c.into_iter().enumerate() {
                    mu[i] = -ci;
                }
                mu[k] = Rat::one();
                return mu;
            }
        }
        pow = amb.mul(&pow, x);
    }
}

/// `pi_m` inside `Q(zeta_{p^n})`: the product of `(zeta_{p^m}^{j^{p^{m-1}}} - 1)`
/// over `j in [1, p-1]`, where `zeta_{p^m} = zeta^{p^{n-m}}`.
pub fn pi_in(amb: &Cyclotomic, m: u32) -> CycElem {
    assert!(m >= 1 && m <= amb.n);
    let p = amb.p;
    let pm = p.pow(m);
    let lift = p.pow(amb.n - m);
    let mut acc = amb.one();
    for j in 1..p {
        let e = pow_mod(j, p.pow(m - 1), pm);
        let factor = amb.sub(&amb.zeta(e * lift), &amb.one());
        acc = amb.mul(&acc, &factor);
    }
    acc
}

/// `theta_m = zeta_{p^m} - 1` inside `Q(zeta_{p^n})`.
pub fn theta_in(amb: &Cyclotomic, m: u32) -> CycElem {
    assert!(m >= 1 && m <= amb.n);
    let lift = amb.p.pow(amb.n - m);
    amb.sub(&amb.zeta(lift), &amb.one())
}

pub fn pow_mod(mut b: u64, mut e: u64, m: u64) -> u64 {
    let mut acc = 1u64 % m;
    b %= m;
    while e > 0 {
        if e & 1 == 1 {
            acc = acc * b % m;
        }
        b = b * b % m;
        e >>= 1;
    }
    acc
}

/// `pi_n` in its own ambient field `Q(zeta_{p^n})`; `pi_1 = p`.
pub fn make_pi(p: u64, n: u32) -> Result<(Cyclotomic, CycElem)> {
    let p = Prime::odd(p)?;
    if n < 1 {
        return Err(Error::Usage("level n must be >= 1".into()));
    }
    let amb = Cyclotomic::new(p, n);
    let pi = pi_in(&amb, n);
    Ok((amb, pi))
}

/// `Q[x]/(f)` where the class of `x` generates the maximal ideal of a DVR
/// purely ramified over `Z_(p)` with residue degree one. Elements are
/// coefficient vectors of fixed length `deg f` over the power basis of the
/// uniformizer, which makes the valuation a minimum over the coefficients.
#[derive(Clone, Debug)]
pub struct LocalField {
    pub p: Prime,
    min_poly: poly::Poly,
    d: usize,
    red: Vec<Vec<Rat>>,
}

pub type LfElem = Vec<Rat>;

impl LocalField {
    pub fn new(min_poly: poly::Poly, p: Prime) -> Result<Self> {
        let d = min_poly.len() - 1;
        if d < 1 || !min_poly[d].is_one() {
            return Err(Error::Usage(
                "minimal polynomial must be monic of degree >= 1".into(),
            ));
        }
        // reduction rows for X^e, e in [d, 2d-2]
        let mut red: Vec<Vec<Rat>> = Vec::new();
        if d >= 2 {
            let mut row: Vec<Rat> = (0..d).map(|i| -&min_poly[i]).collect();
            red.push(row.clone());
            for _ in d + 1..=2 * d - 2 {
                let mut next = vec![Rat::zero(); d];
                let top = row[d - 1].clone();
                for i in 1..d {
                    next[i] = row[i - 1].clone();
                }
                if !top.is_zero() {
                    for i in 0..d {
                        next[i] += &top * &-&min_poly[i];
                    }
                }
                red.push(next.clone());
                row = next;
            }
        }
        Ok(LocalField {
            p,
            min_poly,
            d,
            red,
        })
    }

    /// The rational field as a degree-1 local field with uniformizer `p`.
    pub fn rationals(p: Prime) -> Self {
        let mp = vec![-rat(p.get() as i64), Rat::one()];
        LocalField::new(mp, p).unwrap()
    }

    pub fn degree(&self) -> usize {
        self.d
    }

    pub fn min_poly(&self) -> &poly::Poly {
        &self.min_poly
    }

    /// The class of `X`, i.e. the uniformizer `s`.
    pub fn gen(&self) -> LfElem {
        if self.d == 1 {
            vec![-self.min_poly[0].clone()]
        } else {
            let mut v = vec![Rat::zero(); self.d];
            v[1] = Rat::one();
            v
        }
    }

    pub fn from_rat(&self, r: &Rat) -> LfElem {
        let mut v = vec![Rat::zero(); self.d];
        v[0] = r.clone();
        v
    }

    /// The underlying rational, when the element is one.
    pub fn as_rat(&self, x: &LfElem) -> Option<Rat> {
        if x.iter().skip(1).all(|c| c.is_zero()) {
            Some(x[0].clone())
        } else {
            None
        }
    }
}

impl ValuedField for LocalField {
    type Elem = LfElem;

    fn zero(&self) -> LfElem {
        vec![Rat::zero(); self.d]
    }

    fn one(&self) -> LfElem {
        self.from_rat(&Rat::one())
    }

    fn from_i64(&self, n: i64) -> LfElem {
        self.from_rat(&rat(n))
    }

    fn add(&self, a: &LfElem, b: &LfElem) -> LfElem {
        a.iter().zip(b).map(|(x, y)| x + y).collect()
    }

    fn sub(&self, a: &LfElem, b: &LfElem) -> LfElem {
        a.iter().zip(b).map(|(x, y)| x - y).collect()
    }

    fn neg(&self, a: &LfElem) -> LfElem {
        a.iter().map(|x| -x).collect()
    }

    fn mul(&self, a: &LfElem, b: &LfElem) -> LfElem {
        if self.d == 1 {
            return vec![&a[0] * &b[0]];
        }
        let mut acc = vec![Rat::zero(); 2 * self.d - 1];
        for (i, x) in a.iter().enumerate() {
            if x.is_zero() {
                continue;
            }
            for (j, y) in b.iter().enumerate() {
                if !y.is_zero() {
                    acc[i + j] += x * y;
                }
            }
        }
        let mut out: Vec<Rat> = acc[..self.d].to_vec();
        for (e, c) in acc.iter().enumerate().skip(self.d) {
            if c.is_zero() {
                continue;
            }
            let row = &self.red[e - self.d];
            for (k, r) in row.iter().enumerate() {
                if !r.is_zero() {
                    out[k] += c * r;
                }
            }
        }
        out
    }

    fn inv(&self, a: &LfElem) -> Option<LfElem> {
        if self.is_zero(a) {
            return None;
        }
        if self.d == 1 {
            return Some(vec![a[0].recip()]);
        }
        let (g, u, _) = poly::poly_ext_gcd(&poly::trim(a.clone()), &self.min_poly);
        debug_assert_eq!(poly::deg(&g), Some(0));
        let (_, r) = poly::divrem(&u, &self.min_poly);
        let mut out = r;
        out.resize(self.d, Rat::zero());
        Some(out)
    }

    fn is_zero(&self, a: &LfElem) -> bool {
        a.iter().all(|c| c.is_zero())
    }

    fn val(&self, a: &LfElem) -> Val {
        let mut best = Val::Infinity;
        for (i, c) in a.iter().enumerate() {
            if let Val::Finite(v) = val_p(c, self.p) {
                let w = Val::Finite(self.d as i64 * v + i as i64);
                if w < best {
                    best = w;
                }
            }
        }
        best
    }

    fn uniformizer_pow(&self, k: i64) -> LfElem {
        let g = self.gen();
        if k >= 0 {
            let mut acc = self.one();
            for _ in 0..k {
                acc = self.mul(&acc, &g);
            }
            acc
        } else {
            let gi = self.inv(&g).unwrap();
            let mut acc = self.one();
            for _ in 0..(-k) {
                acc = self.mul(&acc, &gi);
            }
            acc
        }
    }
}

#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub enum UniformizerLevel {
    S,
    T,
}

#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub enum TowerKind {
    /// `S = Z_(p)[pi_{n-1}] < T = Z_(p)[pi_n]`.
    CyclotomicPi,
    /// `S = Z_(p)[theta_{n-1}] < T = Z_(p)[theta_n]` with `theta_m = zeta_{p^m} - 1`.
    CyclotomicTheta,
}

/// Ramification data of `T|S`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct RamificationInvariants {
    /// `val_t` of the different ideal.
    pub different_valuation: i64,
    /// `val_s` of the discriminant ideal.
    pub discriminant_valuation: i64,
}

/// Closed-form parameters of the standard towers.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct ClosedFormParams {
    pub b: i64,
    pub b_under: i64,
    pub b_bar: i64,
    pub different_valuation: i64,
    pub val_s_p: i64,
}

#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub enum ParamKind {
    CyclotomicPi,
    CyclotomicTheta,
    /// Lubin-Tate tower for `f(X) = X^p + pi X`; same closed forms as the
    /// corresponding cyclotomic tower.
    LubinTatePi,
    LubinTateTheta,
}

/// The closed-form parameter table; no fields are constructed.
pub fn parameter_table(p: u64, n: u32, kind: ParamKind) -> Result<ClosedFormParams> {
    let p_ = Prime::odd(p)?;
    if n < 2 {
        return Err(Error::Usage("parameter table needs n >= 2".into()));
    }
    let p = p_.get() as i64;
    let pn1 = p.pow(n - 1);
    let pn2 = p.pow(n - 2);
    let (b, b_under, val_s_p) = match kind {
        ParamKind::CyclotomicPi | ParamKind::LubinTatePi => {
            ((pn1 - 1) / (p - 1), (pn2 - 1) / (p - 1), pn2)
        }
        ParamKind::CyclotomicTheta | ParamKind::LubinTateTheta => (pn1 - 1, pn2 - 1, pn2 * (p - 1)),
    };
    Ok(ClosedFormParams {
        b,
        b_under,
        b_bar: b - p * b_under,
        different_valuation: (p - 1) * (1 + b),
        val_s_p,
    })
}

/// A purely ramified cyclic degree-`p` tower `S < T` inside `Q(zeta_{p^n})`,
/// with the Wedderburn matrices of `t` and of the Galois generator.
pub struct Tower {
    pub p: Prime,
    pub n: u32,
    pub kind: TowerKind,
    /// `[L : K] = p`.
    pub g: usize,
    /// `[K : Q]`.
    pub d: usize,
    pub ambient: Cyclotomic,
    /// `K = Q(s)`.
    pub base: LocalField,
    pub s_amb: CycElem,
    pub t_amb: CycElem,
    /// `mu_{t,K}` coefficients, constant first, monic of degree `g`.
    pub mu_t: Vec<LfElem>,
    /// Right multiplication by `t` on the basis `(t^0, ..., t^{g-1})`;
    /// maps act on the right, rows are indexed by inputs.
    pub t_dot: Mat<LfElem>,
    /// The Galois generator `sigma: zeta -> zeta^{1 + p^{n-1}}` on the same basis.
    pub sigma_dot: Mat<LfElem>,
    pub sigma_exponent: u64,
    pub b: i64,
    pub b_under: i64,
    pub b_bar: i64,
    pub ramification: RamificationInvariants,
    t_pows: Vec<CycElem>,
    mixed_solver: LinSolver<LocalQ>,
}

impl Tower {
    pub fn cyclotomic(p: u64, n: u32, kind: TowerKind) -> Result<Tower> {
        let p = Prime::odd(p)?;
        if n < 2 {
            return Err(Error::Usage("tower level n must be >= 2".into()));
        }
        let g = p.get() as usize;
        let amb = Cyclotomic::new(p, n);
        let (t_amb, s_amb) = match kind {
            TowerKind::CyclotomicPi => (pi_in(&amb, n), pi_in(&amb, n - 1)),
            TowerKind::CyclotomicTheta => (theta_in(&amb, n), theta_in(&amb, n - 1)),
        };
        let mu_s = minimal_polynomial_q(&amb, &s_amb);
        let d = mu_s.len() - 1;
        let base = LocalField::new(mu_s, p)?;

        let q = LocalQ::new(p);
        let mut s_pows = Vec::with_capacity(d);
        let mut acc = amb.one();
        for _ in 0..d {
            s_pows.push(acc.clone());
            acc = amb.mul(&acc, &s_amb);
        }
        let mut t_pows = Vec::with_capacity(g + 1);
        let mut acc = amb.one();
        for _ in 0..=g {
            t_pows.push(acc.clone());
            acc = amb.mul(&acc, &t_amb);
        }
        // mixed basis s^a t^c, column index c*d + a
        let basis = Mat::from_fn(amb.phi(), g * d, |r, col| {
            let (c, a) = (col / d, col % d);
            amb.mul(&s_pows[a], &t_pows[c])[r].clone()
        });
        let mixed_solver = LinSolver::new(q, basis)?;

        let to_k_vec = |lam: &[Rat]| -> Vec<LfElem> {
            (0..g).map(|c| lam[c * d..(c + 1) * d].to_vec()).collect()
        };

        let lam = mixed_solver
            .solve(&t_pows[g])
            .ok_or_else(|| Error::Internal("t^g is not in the span of the mixed basis".into()))?;
        let tg_coords = to_k_vec(&lam);
        // mu_t(X) = X^g - sum_c tg_coords[c] X^c
        let mut mu_t: Vec<LfElem> = tg_coords.iter().map(|c| base.neg(c)).collect();
        mu_t.push(base.one());
        if mu_t[0] != base.neg(&base.gen()) {
            return Err(Error::Internal(
                "constant term of the minimal polynomial of t over K is not -s".into(),
            ));
        }
        for (j, e) in mu_t.iter().enumerate().take(g) {
            if base.val(e) < Val::Finite(1) {
                return Err(Error::Internal(format!(
                    "mu_t coefficient e_{j} is not divisible by s"
                )));
            }
        }

        let t_dot = Mat::from_fn(g, g, |r, c| {
            if r + 1 < g {
                if c == r + 1 {
                    base.one()
                } else {
                    base.zero()
                }
            } else {
                tg_coords[c].clone()
            }
        });

        let sigma_exponent = (1 + p.get().pow(n - 1)) % amb.order();
        let mut sigma_rows = Vec::with_capacity(g);
        for i in 0..g {
            let image = amb.galois(sigma_exponent, &t_pows[i]);
            let lam = mixed_solver
                .solve(&image)
                .ok_or_else(|| Error::Internal("Galois image does not lie in L".into()))?;
            sigma_rows.push(to_k_vec(&lam));
        }
        let sigma_dot = Mat::from_rows(sigma_rows);

        // b = -1 + val_t(t^sigma - t)
        let diff = amb.sub(&amb.galois(sigma_exponent, &t_amb), &t_amb);
        let mut tower = Tower {
            p,
            n,
            kind,
            g,
            d,
            ambient: amb,
            base,
            s_amb,
            t_amb,
            mu_t,
            t_dot,
            sigma_dot,
            sigma_exponent,
            b: 0,
            b_under: 0,
            b_bar: 0,
            ramification: RamificationInvariants {
                different_valuation: 0,
                discriminant_valuation: 0,
            },
            t_pows,
            mixed_solver,
        };
        let vt = tower
            .val_t_ambient(&diff)
            .finite()
            .ok_or_else(|| Error::Internal("t^sigma = t, extension is not ramified".into()))?;
        tower.b = vt - 1;
        if tower.b < 1 {
            return Err(Error::Precondition(
                "b >= 1 fails; the extension is tame".into(),
            ));
        }
        tower.b_under = tower.b.div_euclid(g as i64);
        tower.b_bar = tower.b.rem_euclid(g as i64);
        tower.ramification = tower.compute_ramification()?;

        // sigma must have order exactly g on L
        let mut pow = tower.sigma_dot.clone();
        for _ in 1..g {
            if pow == mat_identity(&tower.base, g) {
                return Err(Error::Internal(
                    "sigma has order smaller than g on L".into(),
                ));
            }
            pow = mat_mul(&tower.base, &pow, &tower.sigma_dot);
        }
        if pow != mat_identity(&tower.base, g) {
            return Err(Error::Internal("sigma does not have order g on L".into()));
        }
        Ok(tower)
    }

    /// Valuation of an ambient element at the chosen uniformizer, normalized
    /// so that the uniformizer itself has valuation 1.
    pub fn val_at(&self, x_amb: &CycElem, level: UniformizerLevel) -> Val {
        match level {
            UniformizerLevel::S => {
                let k = self.k_rep(x_amb).expect("element not in K");
                self.base.val(&k)
            }
            UniformizerLevel::T => self.val_t_ambient(x_amb),
        }
    }

    /// Coefficients of `x` over the `K`-basis `(t^0, ..., t^{g-1})`.
    pub fn l_rep(&self, x_amb: &CycElem) -> Option<Vec<LfElem>> {
        let lam = self.mixed_solver.solve(x_amb)?;
        Some(
            (0..self.g)
                .map(|c| lam[c * self.d..(c + 1) * self.d].to_vec())
                .collect(),
        )
    }

    /// `val_t` of an ambient element of `L`.
    pub fn val_t_ambient(&self, x_amb: &CycElem) -> Val {
        let lam = self.mixed_solver.solve(x_amb).expect("element not in L");
        let gd = (self.g * self.d) as i64;
        let mut best = Val::Infinity;
        for (idx, c) in lam.iter().enumerate() {
            if let Val::Finite(v) = val_p(c, self.p) {
                let (cpow, a) = ((idx / self.d) as i64, (idx % self.d) as i64);
                let w = Val::Finite(gd * v + self.g as i64 * a + cpow);
                if w < best {
                    best = w;
                }
            }
        }
        best
    }

    /// Coordinates in `K`, or `None` if the element is not in `K`.
    pub fn k_rep(&self, x_amb: &CycElem) -> Option<LfElem> {
        let rep = self.l_rep(x_amb)?;
        if rep.iter().skip(1).all(|c| self.base.is_zero(c)) {
            Some(rep[0].clone())
        } else {
            None
        }
    }

    pub fn k_to_ambient(&self, x: &LfElem) -> CycElem {
        let mut acc = self.ambient.zero();
        let mut s_pow = self.ambient.one();
        for c in x {
            acc = self.ambient.add(&acc, &self.ambient.scale(&s_pow, c));
            s_pow = self.ambient.mul(&s_pow, &self.s_amb);
        }
        acc
    }

    pub fn t_power_ambient(&self, i: usize) -> &CycElem {
        &self.t_pows[i]
    }

    /// `sigma^k` applied ambient-side.
    pub fn galois_power(&self, x_amb: &CycElem, k: u32) -> CycElem {
        let e = pow_mod(self.sigma_exponent, k as u64, self.ambient.order());
        self.ambient.galois(e, x_amb)
    }

    /// Relative trace `Tr_{L|K}` as an element of `K`.
    pub fn trace_l_to_k(&self, x_amb: &CycElem) -> Result<LfElem> {
        let mut acc = self.ambient.zero();
        for k in 0..self.g as u32 {
            acc = self.ambient.add(&acc, &self.galois_power(x_amb, k));
        }
        self.k_rep(&acc)
            .ok_or_else(|| Error::Internal("trace does not lie in K".into()))
    }

    /// Relative norm `Nrm_{L|K}` as an element of `K`.
    pub fn norm_l_to_k(&self, x_amb: &CycElem) -> Result<LfElem> {
        let mut acc = self.ambient.one();
        for k in 0..self.g as u32 {
            acc = self.ambient.mul(&acc, &self.galois_power(x_amb, k));
        }
        self.k_rep(&acc)
            .ok_or_else(|| Error::Internal("norm does not lie in K".into()))
    }

    fn compute_ramification(&self) -> Result<RamificationInvariants> {
        // mu'(t) = g t^{g-1} + sum_{j in [1, g-1]} j e_j t^{j-1}
        let mut dmu = self.ambient.zero();
        for j in 1..=self.g {
            let coeff_amb = self.k_to_ambient(&self.mu_t[j]);
            let term = self.ambient.mul(&coeff_amb, &self.t_pows[j - 1]);
            dmu = self
                .ambient
                .add(&dmu, &self.ambient.scale(&term, &rat(j as i64)));
        }
        let dv = self
            .val_t_ambient(&dmu)
            .finite()
            .ok_or_else(|| Error::Internal("mu'(t) = 0".into()))?;
        let norm = self.norm_l_to_k(&dmu)?;
        let disc = self
            .base
            .val(&norm)
            .finite()
            .ok_or_else(|| Error::Internal("discriminant is zero".into()))?;
        Ok(RamificationInvariants {
            different_valuation: dv,
            discriminant_valuation: disc,
        })
    }

    /// `val_s(p)`, the absolute ramification of `K`.
    pub fn val_s_p(&self) -> i64 {
        self.base
            .val(&self.base.from_i64(self.p.get() as i64))
            .finite()
            .expect("p is nonzero")
    }

    pub fn closed_form(&self) -> ClosedFormParams {
        let kind = match self.kind {
            TowerKind::CyclotomicPi => ParamKind::CyclotomicPi,
            TowerKind::CyclotomicTheta => ParamKind::CyclotomicTheta,
        };
        parameter_table(self.p.get(), self.n, kind).expect("tower parameters are valid")
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exact::ratio;

    #[test]
    fn pi_level_one_is_p() {
        let (amb, pi) = make_pi(3, 1).unwrap();
        assert_eq!(amb.as_rational(&pi), Some(rat(3)));
    }

    #[test]
    fn make_pi_rejects_bad_p() {
        assert!(make_pi(4, 2).is_err());
        assert!(make_pi(2, 2).is_err());
    }

    #[test]
    fn phi9_is_minimal_polynomial_of_zeta9() {
        let amb = Cyclotomic::new(Prime::new(3).unwrap(), 2);
        let mu = minimal_polynomial_q(&amb, &amb.zeta(1));
        assert_eq!(mu, poly::from_ints(&[1, 0, 0, 1, 0, 0, 1]));
    }

    #[test]
    fn pi2_minimal_polynomial() {
        let (amb, pi2) = make_pi(3, 2).unwrap();
        let mu = minimal_polynomial_q(&amb, &pi2);
        assert_eq!(mu, poly::from_ints(&[-3, 9, -6, 1]));
        // pi_2 = (zeta_9 - 1)(zeta_9^{-1} - 1)
        let f1 = amb.sub(&amb.zeta(1), &amb.one());
        let f2 = amb.sub(&amb.zeta(8), &amb.one());
        assert_eq!(pi2, amb.mul(&f1, &f2));
    }

    #[test]
    fn tower_3_2_golden_matrices() {
        let tw = Tower::cyclotomic(3, 2, TowerKind::CyclotomicPi).unwrap();
        assert_eq!(tw.d, 1);
        assert_eq!(tw.b, 1);
        assert_eq!((tw.b_under, tw.b_bar), (0, 1));
        let k = &tw.base;
        let as_r = |m: &Mat<LfElem>, r: usize, c: usize| k.as_rat(m.at(r, c)).unwrap();
        let expect_t = [[0, 1, 0], [0, 0, 1], [3, -9, 6]];
        let expect_s = [[1, 0, 0], [6, -5, 1], [24, -21, 4]];
        for r in 0..3 {
            for c in 0..3 {
                assert_eq!(as_r(&tw.t_dot, r, c), rat(expect_t[r][c]));
                assert_eq!(as_r(&tw.sigma_dot, r, c), rat(expect_s[r][c]));
            }
        }
        assert_eq!(tw.ramification.different_valuation, 4);
        assert_eq!(tw.ramification.discriminant_valuation, 4);
    }

    #[test]
    fn tower_3_2_traces_and_norm() {
        let tw = Tower::cyclotomic(3, 2, TowerKind::CyclotomicPi).unwrap();
        let one = tw.ambient.one();
        let t = tw.t_amb.clone();
        assert_eq!(
            tw.base.as_rat(&tw.trace_l_to_k(&one).unwrap()),
            Some(rat(3))
        );
        // Newton's identities on X^3 - 6X^2 + 9X - 3: p1 = 6, p2 = 6^2 - 2*9 = 18
        assert_eq!(tw.base.as_rat(&tw.trace_l_to_k(&t).unwrap()), Some(rat(6)));
        let t2 = tw.ambient.mul(&t, &t);
        assert_eq!(
            tw.base.as_rat(&tw.trace_l_to_k(&t2).unwrap()),
            Some(rat(18))
        );
        assert_eq!(tw.base.as_rat(&tw.norm_l_to_k(&t).unwrap()), Some(rat(3)));
        // so the trace lattice Tr(T) is (3, 6, 18) S = 3 S, which drives the
        // even classical cohomology S / Tr(T)
    }

    #[test]
    fn val_at_levels() {
        let tw = Tower::cyclotomic(3, 2, TowerKind::CyclotomicPi).unwrap();
        let p_amb = tw.ambient.from_rat(&rat(3));
        assert_eq!(tw.val_at(&p_amb, UniformizerLevel::S), Val::Finite(1));
        assert_eq!(tw.val_at(&p_amb, UniformizerLevel::T), Val::Finite(3));
        assert_eq!(tw.val_at(&tw.t_amb, UniformizerLevel::T), Val::Finite(1));
        let zero = tw.ambient.zero();
        assert_eq!(tw.val_at(&zero, UniformizerLevel::T), Val::Infinity);
    }

    #[test]
    fn b_independent_of_generator_choice() {
        let tw = Tower::cyclotomic(3, 2, TowerKind::CyclotomicPi).unwrap();
        for k in 1..3 {
            let img = tw.galois_power(&tw.t_amb, k);
            let diff = tw.ambient.sub(&img, &tw.t_amb);
            assert_eq!(tw.val_t_ambient(&diff), Val::Finite(2));
        }
    }

    #[test]
    fn parameter_table_golden() {
        let pi32 = parameter_table(3, 2, ParamKind::CyclotomicPi).unwrap();
        assert_eq!((pi32.b, pi32.b_under, pi32.b_bar), (1, 0, 1));
        assert_eq!(pi32.val_s_p, 1);
        assert_eq!(pi32.b - pi32.b_under, pi32.val_s_p);
        let th52 = parameter_table(5, 2, ParamKind::CyclotomicTheta).unwrap();
        assert_eq!(th52.b_bar, 4);
        let lt = parameter_table(3, 3, ParamKind::LubinTatePi).unwrap();
        assert_eq!((lt.b, lt.b_under, lt.b_bar), (4, 1, 1));
        assert_eq!(lt.val_s_p, 3);
    }

    #[test]
    fn constructed_towers_match_closed_forms() {
        for (p, n, kind) in [
            (3, 2, TowerKind::CyclotomicPi),
            (3, 2, TowerKind::CyclotomicTheta),
            (5, 2, TowerKind::CyclotomicPi),
            (3, 3, TowerKind::CyclotomicPi),
        ] {
            let tw = Tower::cyclotomic(p, n, kind).unwrap();
            let cf = tw.closed_form();
            assert_eq!(tw.b, cf.b, "b mismatch at p={p} n={n} {kind:?}");
            assert_eq!(tw.b_under, cf.b_under);
            assert_eq!(tw.b_bar, cf.b_bar);
            assert_eq!(tw.ramification.different_valuation, cf.different_valuation);
            assert_eq!(
                tw.ramification.discriminant_valuation,
                cf.different_valuation
            );
            assert_eq!(tw.val_s_p(), cf.val_s_p);
            // val_s(e_j) >= 1 + b - under(b + j) holds automatically for g = p
            for j in 1..tw.g {
                let bound = 1 + tw.b - (tw.b + j as i64).div_euclid(tw.g as i64);
                assert!(tw.base.val(&tw.mu_t[j]) >= Val::Finite(bound));
            }
        }
    }

    #[test]
    fn pi3_norm_down_is_pi2() {
        let tw = Tower::cyclotomic(3, 3, TowerKind::CyclotomicPi).unwrap();
        // independent route: the product of conjugates equals s = pi_2
        let norm = tw.norm_l_to_k(&tw.t_amb).unwrap();
        assert_eq!(norm, tw.base.gen());
        // and mu_{t,Q} of pi_3 is monic degree 9, X^9 mod 3, constant term -3
        let mu = minimal_polynomial_q(&tw.ambient, &tw.t_amb);
        assert_eq!(mu.len(), 10);
        assert_eq!(mu[0], rat(-3));
        let p3 = Prime::new(3).unwrap();
        for c in mu.iter().take(9) {
            assert!(val_p(c, p3) >= Val::Finite(1));
        }
    }

    #[test]
    fn local_field_valuation() {
        let p3 = Prime::new(3).unwrap();
        let k = LocalField::new(poly::from_ints(&[-3, 9, -6, 1]), p3).unwrap();
        assert_eq!(k.val(&k.gen()), Val::Finite(1));
        assert_eq!(k.val(&k.from_i64(3)), Val::Finite(3));
        assert_eq!(k.val(&k.from_rat(&ratio(1, 3))), Val::Finite(-3));
        let x = k.mul(&k.gen(), &k.gen());
        assert_eq!(k.val(&x), Val::Finite(2));
        let xi = k.inv(&x).unwrap();
        assert_eq!(k.mul(&x, &xi), k.one());
        assert_eq!(k.val(&xi), Val::Finite(-2));
    }
}
