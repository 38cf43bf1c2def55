//! Exact-rational polynomials for the uniform large-order Bessel expansions.
//!
//! `u_r`, `v_r` are Olver's polynomials; `D_r` and `M_r` are the coefficients
//! of `ν^{-r}` in
//!
//! ```text
//! log(1 + Σ u_r(t) ν^{-r})
//! log((1 + Σ v_j(t) ν^{-j}) + (α/ν) t (1 + Σ u_j(t) ν^{-j}))
//! ```
//!
//! All construction is exact; floats appear only in `eval`.

use std::collections::BTreeMap;
use std::fmt;
use std::sync::{Arc, Mutex, OnceLock};

use num::bigint::BigInt;
use num::rational::BigRational;
use num::{One, Signed, ToPrimitive, Zero};

use crate::error::{Error, Result};

pub type Rational = BigRational;

pub const DEFAULT_MAX_ORDER: usize = 12;

fn q(n: i64, d: i64) -> Rational {
    Rational::new(BigInt::from(n), BigInt::from(d))
}

/// Polynomial in `t` and `α` with exact rational coefficients.
/// Keys are `(power of t, power of α)`.
#[derive(Clone, PartialEq, Eq)]
pub struct CoeffPolynomial {
    terms: BTreeMap<(u32, u32), Rational>,
}

impl fmt::Debug for CoeffPolynomial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{self}")
    }
}

impl fmt::Display for CoeffPolynomial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return write!(f, "0");
        }
        let mut first = true;
        for (&(tp, ap), c) in &self.terms {
            if !first {
                write!(f, " + ")?;
            }
            first = false;
            write!(f, "({c})")?;
            if tp > 0 {
                write!(f, "·t^{tp}")?;
            }
            if ap > 0 {
                write!(f, "·α^{ap}")?;
            }
        }
        Ok(())
    }
}

impl CoeffPolynomial {
    pub fn zero() -> Self {
        Self { terms: BTreeMap::new() }
    }

    pub fn constant(c: Rational) -> Self {
        Self::monomial(c, 0, 0)
    }

    pub fn one() -> Self {
        Self::constant(Rational::one())
    }

    pub fn monomial(c: Rational, t_pow: u32, a_pow: u32) -> Self {
        let mut terms = BTreeMap::new();
        if !c.is_zero() {
            terms.insert((t_pow, a_pow), c);
        }
        Self { terms }
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    /// True when no term carries a power of α.
    pub fn is_t_only(&self) -> bool {
        self.terms.keys().all(|&(_, a)| a == 0)
    }

    pub fn terms(&self) -> impl Iterator<Item = ((u32, u32), &Rational)> {
        self.terms.iter().map(|(k, v)| (*k, v))
    }

    pub fn coeff(&self, t_pow: u32, a_pow: u32) -> Rational {
        self.terms.get(&(t_pow, a_pow)).cloned().unwrap_or_else(Rational::zero)
    }

    /// Coefficient of `t^p` as a polynomial in α (stored with t-power 0).
    pub fn t_coefficient(&self, p: u32) -> CoeffPolynomial {
        let terms =
            self.terms.iter().filter(|(&(tp, _), _)| tp == p).map(|(&(_, ap), c)| ((0, ap), c.clone())).collect();
        Self { terms }
    }

    /// Powers of t that carry a nonzero coefficient.
    pub fn t_powers(&self) -> Vec<u32> {
        let mut v: Vec<u32> = self.terms.keys().map(|&(t, _)| t).collect();
        v.dedup();
        v
    }

    pub fn max_alpha_degree(&self) -> u32 {
        self.terms.keys().map(|&(_, a)| a).max().unwrap_or(0)
    }

    fn add_term(&mut self, key: (u32, u32), c: Rational) {
        if c.is_zero() {
            return;
        }
        let entry = self.terms.entry(key).or_insert_with(Rational::zero);
        *entry += c;
        if entry.is_zero() {
            self.terms.remove(&key);
        }
    }

    pub fn add(&self, other: &Self) -> Self {
        let mut out = self.clone();
        for (k, c) in &other.terms {
            out.add_term(*k, c.clone());
        }
        out
    }

    pub fn sub(&self, other: &Self) -> Self {
        self.add(&other.scale(&-Rational::one()))
    }

    pub fn scale(&self, c: &Rational) -> Self {
        if c.is_zero() {
            return Self::zero();
        }
        let terms = self.terms.iter().map(|(k, v)| (*k, v * c)).collect();
        Self { terms }
    }

    pub fn mul(&self, other: &Self) -> Self {
        let mut out = Self::zero();
        for (&(t1, a1), c1) in &self.terms {
            for (&(t2, a2), c2) in &other.terms {
                out.add_term((t1 + t2, a1 + a2), c1 * c2);
            }
        }
        out
    }

    /// Multiply by `t^dt α^da`.
    pub fn shift(&self, dt: u32, da: u32) -> Self {
        let terms = self.terms.iter().map(|(&(t, a), c)| ((t + dt, a + da), c.clone())).collect();
        Self { terms }
    }

    pub fn d_dt(&self) -> Self {
        let mut out = Self::zero();
        for (&(t, a), c) in &self.terms {
            if t > 0 {
                out.add_term((t - 1, a), c * BigInt::from(t));
            }
        }
        out
    }

    /// Antiderivative in t vanishing at t = 0.
    pub fn integrate_t(&self) -> Self {
        let mut out = Self::zero();
        for (&(t, a), c) in &self.terms {
            out.add_term((t + 1, a), c / BigInt::from(t + 1));
        }
        out
    }

    /// Substitute α → −α.
    pub fn negate_alpha(&self) -> Self {
        let terms =
            self.terms.iter().map(|(&(t, a), c)| ((t, a), if a % 2 == 1 { -c.clone() } else { c.clone() })).collect();
        Self { terms }
    }

    pub fn eval_exact(&self, t: &Rational, alpha: &Rational) -> Rational {
        let mut acc = Rational::zero();
        for (&(tp, ap), c) in &self.terms {
            acc += c * pow_q(t, tp) * pow_q(alpha, ap);
        }
        acc
    }

    pub fn eval(&self, t: f64, alpha: f64) -> f64 {
        // Horner in t over α-polynomial coefficients.
        let top = self.terms.keys().map(|&(t, _)| t).max().unwrap_or(0);
        let mut by_t = vec![0.0f64; top as usize + 1];
        for (&(tp, ap), c) in &self.terms {
            by_t[tp as usize] += c.to_f64().unwrap_or(f64::NAN) * alpha.powi(ap as i32);
        }
        by_t.iter().rev().fold(0.0, |acc, &c| acc * t + c)
    }
}

fn pow_q(x: &Rational, p: u32) -> Rational {
    let mut out = Rational::one();
    for _ in 0..p {
        out *= x;
    }
    out
}

/// Format as `p/q` (or `p` for integers).
pub fn rational_to_string(x: &Rational) -> String {
    if x.denom().is_one() {
        x.numer().to_string()
    } else {
        format!("{}/{}", x.numer(), x.denom())
    }
}

/// Parse `p/q`, `p`, with optional leading sign. Zero denominators are rejected.
pub fn parse_rational(s: &str) -> Result<Rational> {
    let s = s.trim();
    let bad = || Error::Parse(format!("not a rational: {s:?}"));
    let (n, d) = match s.split_once('/') {
        Some((n, d)) => (n.trim(), d.trim()),
        None => (s, "1"),
    };
    let num: BigInt = n.parse().map_err(|_| bad())?;
    let den: BigInt = d.parse().map_err(|_| bad())?;
    if den.is_zero() {
        return Err(bad());
    }
    Ok(Rational::new(num, den))
}

/// ψ(r) = −γ + H_{r−1} for integer r ≥ 1, kept as (rational part, γ coefficient).
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ExactDigamma {
    pub rational: Rational,
    pub gamma_coeff: i64,
}

impl ExactDigamma {
    pub fn at(r: u32) -> Self {
        assert!(r >= 1, "digamma at nonpositive integer");
        let mut h = Rational::zero();
        for j in 1..r {
            h += q(1, j as i64);
        }
        Self { rational: h, gamma_coeff: -1 }
    }

    pub fn to_f64(&self) -> f64 {
        self.rational.to_f64().unwrap() + self.gamma_coeff as f64 * crate::special::EULER_GAMMA
    }
}

struct Tables {
    max_order: usize,
    u: Vec<Arc<CoeffPolynomial>>,
    v: Vec<Arc<CoeffPolynomial>>,
    d: Vec<Arc<CoeffPolynomial>>,
    m: Vec<Arc<CoeffPolynomial>>,
}

impl Tables {
    fn new() -> Self {
        let one = Arc::new(CoeffPolynomial::one());
        Self {
            max_order: DEFAULT_MAX_ORDER,
            u: vec![one.clone()],
            v: vec![one.clone()],
            d: vec![Arc::new(CoeffPolynomial::zero())],
            m: vec![Arc::new(CoeffPolynomial::zero())],
        }
    }

    fn check(&self, r: usize) -> Result<()> {
        if r > self.max_order {
            return Err(Error::OrderTooLarge { requested: r, max: self.max_order });
        }
        Ok(())
    }

    fn ensure_uv(&mut self, r: usize) {
        while self.u.len() <= r {
            let k = self.u.len() - 1;
            let uk = &self.u[k];
            // u_{k+1} = ½t²(1−t²)u_k′ + ⅛∫₀ᵗ(1−5τ²)u_k dτ
            let half_t2_1mt2 = CoeffPolynomial::monomial(q(1, 2), 2, 0).add(&CoeffPolynomial::monomial(q(-1, 2), 4, 0));
            let w = CoeffPolynomial::one().add(&CoeffPolynomial::monomial(q(-5, 1), 2, 0));
            let next = half_t2_1mt2.mul(&uk.d_dt()).add(&w.mul(uk).integrate_t().scale(&q(1, 8)));
            // v_{k+1} = u_{k+1} + t(t²−1)(½u_k + t u_k′)
            let t3mt = CoeffPolynomial::monomial(q(1, 1), 3, 0).add(&CoeffPolynomial::monomial(q(-1, 1), 1, 0));
            let inner = uk.scale(&q(1, 2)).add(&uk.d_dt().shift(1, 0));
            let vnext = next.add(&t3mt.mul(&inner));
            self.u.push(Arc::new(next));
            self.v.push(Arc::new(vnext));
        }
    }

    fn ensure_d(&mut self, r: usize) {
        self.ensure_uv(r);
        while self.d.len() <= r {
            let k = self.d.len();
            let f: Vec<CoeffPolynomial> = self.u.iter().map(|p| (**p).clone()).collect();
            let next = log_series_term(&f, &self.d, k);
            self.d.push(Arc::new(next));
        }
    }

    fn ensure_m(&mut self, r: usize) {
        self.ensure_uv(r);
        while self.m.len() <= r {
            let k = self.m.len();
            let f: Vec<CoeffPolynomial> = (0..=k)
                .map(|j| if j == 0 { CoeffPolynomial::one() } else { self.v[j].add(&self.u[j - 1].shift(1, 1)) })
                .collect();
            let next = log_series_term(&f, &self.m, k);
            self.m.push(Arc::new(next));
        }
    }
}

/// Coefficient `L_k` of `log(Σ F_j w^j)` with `F_0 = 1`, from `L_1..L_{k-1}`:
/// `L_k = F_k − (1/k) Σ_{j<k} j L_j F_{k−j}`.
fn log_series_term(f: &[CoeffPolynomial], l: &[Arc<CoeffPolynomial>], k: usize) -> CoeffPolynomial {
    let mut acc = CoeffPolynomial::zero();
    for j in 1..k {
        acc = acc.add(&l[j].mul(&f[k - j]).scale(&q(j as i64, 1)));
    }
    f[k].sub(&acc.scale(&q(1, k as i64)))
}

fn tables() -> &'static Mutex<Tables> {
    static T: OnceLock<Mutex<Tables>> = OnceLock::new();
    T.get_or_init(|| Mutex::new(Tables::new()))
}

/// Raise (never lower below what is already cached) the maximum order.
pub fn set_max_order(max: usize) {
    let mut t = tables().lock().unwrap();
    t.max_order = max.max(t.u.len() - 1);
}

pub fn max_order() -> usize {
    tables().lock().unwrap().max_order
}

pub fn olver_pair(r: usize) -> Result<(Arc<CoeffPolynomial>, Arc<CoeffPolynomial>)> {
    let mut t = tables().lock().unwrap();
    t.check(r)?;
    t.ensure_uv(r);
    Ok((t.u[r].clone(), t.v[r].clone()))
}

pub fn d_poly(r: usize) -> Result<Arc<CoeffPolynomial>> {
    if r == 0 {
        return Err(Error::InvalidArgument("d_poly needs r ≥ 1".into()));
    }
    let mut t = tables().lock().unwrap();
    t.check(r)?;
    t.ensure_d(r);
    Ok(t.d[r].clone())
}

pub fn m_poly(r: usize) -> Result<Arc<CoeffPolynomial>> {
    if r == 0 {
        return Err(Error::InvalidArgument("m_poly needs r ≥ 1".into()));
    }
    let mut t = tables().lock().unwrap();
    t.check(r)?;
    t.ensure_m(r);
    Ok(t.m[r].clone())
}

/// `x_{r,b}`: coefficient of `t^{r+2b}` in `D_r`.
pub fn x_coeff(r: usize, b: usize) -> Result<Rational> {
    Ok(d_poly(r)?.coeff((r + 2 * b) as u32, 0))
}

/// `z_{r,b}(α)`: coefficient of `t^{r+2b}` in `M_r`, a polynomial in α.
pub fn z_coeff(r: usize, b: usize) -> Result<CoeffPolynomial> {
    Ok(m_poly(r)?.t_coefficient((r + 2 * b) as u32))
}

/// `Σ_b (z_{r,b}(−α) − z_{r,b}(α))`, exactly.
pub fn z_diff_sum_exact(r: usize, alpha: &Rational) -> Result<Rational> {
    let mut acc = Rational::zero();
    let zero = Rational::zero();
    for b in 0..=r {
        let z = z_coeff(r, b)?;
        acc += z.eval_exact(&zero, &-alpha.clone()) - z.eval_exact(&zero, alpha);
    }
    Ok(acc)
}

pub fn z_diff_sum(r: usize, alpha: f64) -> Result<f64> {
    let mut acc = 0.0;
    for b in 0..=r {
        let z = z_coeff(r, b)?;
        acc += z.eval(0.0, -alpha) - z.eval(0.0, alpha);
    }
    Ok(acc)
}

/// Exact rational form of a half-integer or other finite binary float.
pub fn rational_from_f64(x: f64) -> Option<Rational> {
    Rational::from_float(x)
}

/// Coefficient tables as nested string maps, rationals written `p/q`.
pub fn dump_tables(max_r: usize) -> Result<serde_json::Value> {
    use serde_json::{json, Map, Value};
    let poly_json = |p: &CoeffPolynomial| -> Value {
        let mut m = Map::new();
        for ((tp, ap), c) in p.terms() {
            m.insert(format!("t^{tp} a^{ap}"), Value::String(rational_to_string(c)));
        }
        Value::Object(m)
    };
    let mut rows = Vec::new();
    for r in 0..=max_r {
        let (u, v) = olver_pair(r)?;
        let mut row = json!({ "r": r, "u": poly_json(&u), "v": poly_json(&v) });
        if r >= 1 {
            row["D"] = poly_json(&*d_poly(r)?);
            row["M"] = poly_json(&*m_poly(r)?);
        }
        rows.push(row);
    }
    Ok(Value::Array(rows))
}

/// Sign helper used when α is known exactly.
pub fn rational_abs(x: &Rational) -> Rational {
    x.abs()
}
