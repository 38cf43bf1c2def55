//! Scalar special functions: Γ, ψ, upper incomplete gamma.

use crate::error::{Error, Result};

pub const EULER_GAMMA: f64 = 0.577_215_664_901_532_860_606_512_090_082_402_43;

pub fn gamma(x: f64) -> f64 {
    statrs::function::gamma::gamma(x)
}

pub fn ln_gamma(x: f64) -> f64 {
    statrs::function::gamma::ln_gamma(x)
}

pub fn digamma(x: f64) -> f64 {
    statrs::function::gamma::digamma(x)
}

/// 1/Γ(x), zero at the nonpositive integers.
pub fn rgamma(x: f64) -> f64 {
    if x <= 0.0 && x == x.floor() {
        0.0
    } else {
        1.0 / gamma(x)
    }
}

/// ψ(r) for integer r ≥ 1.
pub fn digamma_int(r: u32) -> f64 {
    -EULER_GAMMA + (1..r).map(|j| 1.0 / j as f64).sum::<f64>()
}

pub fn binomial(n: usize, k: usize) -> f64 {
    if k > n {
        return 0.0;
    }
    let k = k.min(n - k);
    (0..k).fold(1.0, |acc, i| acc * (n - i) as f64 / (i + 1) as f64)
}

pub fn factorial(n: usize) -> f64 {
    (1..=n).fold(1.0, |acc, i| acc * i as f64)
}

/// Upper incomplete gamma Γ(a, x) for real a and x > 0.
pub fn upper_gamma(a: f64, x: f64) -> Result<f64> {
    if !(x > 0.0) || !a.is_finite() {
        return Err(Error::InvalidArgument(format!("upper_gamma({a}, {x})")));
    }
    if x >= a + 1.0 || a <= 0.0 {
        upper_gamma_cf(a, x)
    } else {
        Ok(gamma(a) - lower_gamma_series(a, x)?)
    }
}

fn lower_gamma_series(a: f64, x: f64) -> Result<f64> {
    let mut term = 1.0 / a;
    let mut sum = term;
    let mut ap = a;
    for _ in 0..10_000 {
        ap += 1.0;
        term *= x / ap;
        sum += term;
        if term.abs() < sum.abs() * 1e-17 {
            return Ok(sum * (-x + a * x.ln()).exp());
        }
    }
    Err(Error::NoConvergence(format!("lower gamma series a={a} x={x}")))
}

fn upper_gamma_cf(a: f64, x: f64) -> Result<f64> {
    // Modified Lentz on the Legendre continued fraction.
    const TINY: f64 = 1e-300;
    let mut b = x + 1.0 - a;
    let mut c = 1.0 / TINY;
    let mut d = 1.0 / b;
    let mut h = d;
    for i in 1..200_000 {
        let an = -(i as f64) * (i as f64 - a);
        b += 2.0;
        d = an * d + b;
        if d.abs() < TINY {
            d = TINY;
        }
        c = b + an / c;
        if c.abs() < TINY {
            c = TINY;
        }
        d = 1.0 / d;
        let del = d * c;
        h *= del;
        if (del - 1.0).abs() < 1e-16 {
            return Ok((-x + a * x.ln()).exp() * h);
        }
    }
    Err(Error::NoConvergence(format!("upper gamma continued fraction a={a} x={x}")))
}

/// Kahan–Babuška (Neumaier) compensated sum.
#[derive(Clone, Copy, Default, Debug)]
pub struct KahanSum {
    sum: f64,
    comp: f64,
}

impl KahanSum {
    pub fn add(&mut self, x: f64) {
        let t = self.sum + x;
        if self.sum.abs() >= x.abs() {
            self.comp += (self.sum - t) + x;
        } else {
            self.comp += (x - t) + self.sum;
        }
        self.sum = t;
    }

    pub fn value(&self) -> f64 {
        self.sum + self.comp
    }
}

impl std::iter::FromIterator<f64> for KahanSum {
    fn from_iter<I: IntoIterator<Item = f64>>(iter: I) -> Self {
        let mut s = KahanSum::default();
        for x in iter {
            s.add(x);
        }
        s
    }
}
