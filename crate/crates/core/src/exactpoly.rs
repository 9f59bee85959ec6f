//! Exact arithmetic foundation: univariate polynomials and rational
//! functions in the indeterminate `p` with big-rational coefficients,
//! factored products, Bernoulli numbers and the proportionality constant
//! `v(g)`.
//!
//! No floating point anywhere; all identities downstream are checked as
//! exact equalities of canonical forms.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};
use std::fmt;
use std::ops::{Add, AddAssign, Mul, MulAssign, Neg, Sub, SubAssign};

/// Exact rational scalar.
pub type Rat = BigRational;

/// Shorthand for a rational from an integer pair.
pub fn rat(num: i64, den: i64) -> Rat {
    Rat::new(BigInt::from(num), BigInt::from(den))
}

/// Shorthand for an integer rational.
pub fn rint(n: i64) -> Rat {
    Rat::from(BigInt::from(n))
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum ExactError {
    #[error("bernoulli index must be even and positive, got {0}")]
    BadBernoulliIndex(i64),
    #[error("division by the zero polynomial")]
    DivisionByZero,
}

/// Dense univariate polynomial in `p` over the rationals.
///
/// Canonical form: no trailing zero coefficients; the zero polynomial has
/// an empty coefficient list.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Default)]
pub struct PPoly {
    coeffs: Vec<Rat>,
}

impl PPoly {
    pub fn zero() -> Self {
        PPoly { coeffs: Vec::new() }
    }

    pub fn one() -> Self {
        PPoly::constant(Rat::one())
    }

    pub fn constant(c: Rat) -> Self {
        let mut poly = PPoly { coeffs: vec![c] };
        poly.normalize();
        poly
    }

    /// The indeterminate `p` itself.
    pub fn var() -> Self {
        PPoly {
            coeffs: vec![Rat::zero(), Rat::one()],
        }
    }

    /// `c * p^k`.
    pub fn monomial(c: Rat, k: usize) -> Self {
        if c.is_zero() {
            return PPoly::zero();
        }
        let mut coeffs = vec![Rat::zero(); k + 1];
        coeffs[k] = c;
        PPoly { coeffs }
    }

    /// `p^k + a`, the shape almost every factor in the closed formulas takes.
    pub fn p_power_plus(k: usize, a: i64) -> Self {
        let mut poly = PPoly::monomial(Rat::one(), k);
        poly += &PPoly::constant(rint(a));
        poly
    }

    pub fn from_coeffs(coeffs: Vec<Rat>) -> Self {
        let mut poly = PPoly { coeffs };
        poly.normalize();
        poly
    }

    /// Coefficients in increasing degree, canonical (no trailing zeros).
    pub fn coeffs(&self) -> &[Rat] {
        &self.coeffs
    }

    pub fn coeff(&self, k: usize) -> Rat {
        self.coeffs.get(k).cloned().unwrap_or_else(Rat::zero)
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    /// Degree, or `None` for the zero polynomial.
    pub fn degree(&self) -> Option<usize> {
        self.coeffs.len().checked_sub(1)
    }

    pub fn leading_coeff(&self) -> Option<&Rat> {
        self.coeffs.last()
    }

    fn normalize(&mut self) {
        while self.coeffs.last().is_some_and(Rat::is_zero) {
            self.coeffs.pop();
        }
    }

    pub fn scale(&self, c: &Rat) -> Self {
        if c.is_zero() {
            return PPoly::zero();
        }
        PPoly {
            coeffs: self.coeffs.iter().map(|a| a * c).collect(),
        }
    }

    pub fn pow(&self, e: u32) -> Self {
        let mut acc = PPoly::one();
        for _ in 0..e {
            acc = &acc * self;
        }
        acc
    }

    /// Exact evaluation at a rational point.
    pub fn eval(&self, at: &Rat) -> Rat {
        let mut acc = Rat::zero();
        for c in self.coeffs.iter().rev() {
            acc = acc * at + c;
        }
        acc
    }

    /// Exact evaluation at an integer point.
    pub fn eval_int(&self, p0: i64) -> Rat {
        self.eval(&rint(p0))
    }

    /// Euclidean division; the divisor must be nonzero.
    pub fn div_rem(&self, divisor: &PPoly) -> Result<(PPoly, PPoly), ExactError> {
        let dd = divisor.degree().ok_or(ExactError::DivisionByZero)?;
        let dlead = divisor.leading_coeff().unwrap().clone();
        let mut rem = self.clone();
        let mut quot = vec![Rat::zero(); self.coeffs.len().saturating_sub(dd)];
        while let Some(rd) = rem.degree() {
            if rd < dd {
                break;
            }
            let factor = rem.leading_coeff().unwrap() / &dlead;
            let shift = rd - dd;
            quot[shift] = factor.clone();
            let sub = divisor.scale(&factor);
            for (i, c) in sub.coeffs.iter().enumerate() {
                rem.coeffs[i + shift] -= c;
            }
            rem.normalize();
        }
        Ok((PPoly::from_coeffs(quot), rem))
    }

    /// Monic gcd via the Euclidean algorithm over the rationals.
    ///
    /// Degrees stay small throughout this crate, so coefficient growth is
    /// not a concern.
    pub fn gcd(a: &PPoly, b: &PPoly) -> PPoly {
        let mut x = a.clone();
        let mut y = b.clone();
        while !y.is_zero() {
            let (_, r) = x.div_rem(&y).expect("nonzero divisor");
            x = y;
            y = r;
        }
        x.into_monic()
    }

    fn into_monic(mut self) -> PPoly {
        if let Some(lead) = self.leading_coeff().cloned() {
            let inv = lead.recip();
            for c in &mut self.coeffs {
                *c *= &inv;
            }
        }
        self
    }
}

impl fmt::Display for PPoly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_zero() {
            return write!(f, "0");
        }
        let mut first = true;
        for (k, c) in self.coeffs.iter().enumerate().rev() {
            if c.is_zero() {
                continue;
            }
            let mag = c.abs();
            if first {
                if c.is_negative() {
                    write!(f, "-")?;
                }
                first = false;
            } else if c.is_negative() {
                write!(f, " - ")?;
            } else {
                write!(f, " + ")?;
            }
            let unit_mag = mag.is_one();
            if !unit_mag || k == 0 {
                write!(f, "{mag}")?;
            }
            match k {
                0 => {}
                1 => write!(f, "{}p", if unit_mag { "" } else { "*" })?,
                _ => write!(f, "{}p^{k}", if unit_mag { "" } else { "*" })?,
            }
        }
        Ok(())
    }
}

impl Add<&PPoly> for &PPoly {
    type Output = PPoly;
    fn add(self, rhs: &PPoly) -> PPoly {
        let mut coeffs = vec![Rat::zero(); self.coeffs.len().max(rhs.coeffs.len())];
        for (i, c) in self.coeffs.iter().enumerate() {
            coeffs[i] += c;
        }
        for (i, c) in rhs.coeffs.iter().enumerate() {
            coeffs[i] += c;
        }
        PPoly::from_coeffs(coeffs)
    }
}

impl Sub<&PPoly> for &PPoly {
    type Output = PPoly;
    fn sub(self, rhs: &PPoly) -> PPoly {
        self + &(-rhs)
    }
}

impl Neg for &PPoly {
    type Output = PPoly;
    fn neg(self) -> PPoly {
        PPoly {
            coeffs: self.coeffs.iter().map(|c| -c).collect(),
        }
    }
}

impl Mul<&PPoly> for &PPoly {
    type Output = PPoly;
    fn mul(self, rhs: &PPoly) -> PPoly {
        if self.is_zero() || rhs.is_zero() {
            return PPoly::zero();
        }
        let mut coeffs = vec![Rat::zero(); self.coeffs.len() + rhs.coeffs.len() - 1];
        for (i, a) in self.coeffs.iter().enumerate() {
            if a.is_zero() {
                continue;
            }
            for (j, b) in rhs.coeffs.iter().enumerate() {
                coeffs[i + j] += a * b;
            }
        }
        PPoly::from_coeffs(coeffs)
    }
}

impl AddAssign<&PPoly> for PPoly {
    fn add_assign(&mut self, rhs: &PPoly) {
        *self = &*self + rhs;
    }
}

impl SubAssign<&PPoly> for PPoly {
    fn sub_assign(&mut self, rhs: &PPoly) {
        *self = &*self - rhs;
    }
}

impl MulAssign<&PPoly> for PPoly {
    fn mul_assign(&mut self, rhs: &PPoly) {
        *self = &*self * rhs;
    }
}

/// A product of polynomial factors with multiplicities and a rational
/// scalar, kept unexpanded so the closed formulas display the way they
/// are usually written, e.g. `(p-1)^3 (p^3-1) (p^4-1) (p^6-1)`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FactoredPPoly {
    scalar: Rat,
    factors: Vec<(PPoly, u32)>,
}

impl FactoredPPoly {
    pub fn new(scalar: Rat) -> Self {
        FactoredPPoly {
            scalar,
            factors: Vec::new(),
        }
    }

    pub fn one() -> Self {
        FactoredPPoly::new(Rat::one())
    }

    pub fn with_factor(mut self, f: PPoly, exp: u32) -> Self {
        assert!(exp > 0, "factor exponents must be positive");
        self.factors.push((f, exp));
        self
    }

    pub fn scalar(&self) -> &Rat {
        &self.scalar
    }

    pub fn factors(&self) -> &[(PPoly, u32)] {
        &self.factors
    }

    pub fn expand(&self) -> PPoly {
        let mut acc = PPoly::constant(self.scalar.clone());
        for (f, e) in &self.factors {
            acc *= &f.pow(*e);
        }
        acc
    }

    pub fn eval(&self, at: &Rat) -> Rat {
        let mut acc = self.scalar.clone();
        for (f, e) in &self.factors {
            let v = f.eval(at);
            for _ in 0..*e {
                acc *= &v;
            }
        }
        acc
    }

    pub fn eval_int(&self, p0: i64) -> Rat {
        self.eval(&rint(p0))
    }

    pub fn mul(&self, other: &FactoredPPoly) -> FactoredPPoly {
        let mut out = self.clone();
        out.scalar *= &other.scalar;
        out.factors.extend(other.factors.iter().cloned());
        out
    }

    pub fn scale(&self, c: &Rat) -> FactoredPPoly {
        let mut out = self.clone();
        out.scalar *= c;
        out
    }
}

impl fmt::Display for FactoredPPoly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut wrote = false;
        if !self.scalar.is_one() || self.factors.is_empty() {
            write!(f, "{}", self.scalar)?;
            wrote = true;
        }
        for (poly, e) in &self.factors {
            if wrote {
                write!(f, " ")?;
            }
            write!(f, "({poly})")?;
            if *e > 1 {
                write!(f, "^{e}")?;
            }
            wrote = true;
        }
        Ok(())
    }
}

/// Rational function in `p`, stored as a reduced fraction with a
/// positive-leading-coefficient denominator.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct RatFn {
    num: PPoly,
    den: PPoly,
}

impl RatFn {
    pub fn new(num: PPoly, den: PPoly) -> Result<Self, ExactError> {
        if den.is_zero() {
            return Err(ExactError::DivisionByZero);
        }
        let mut out = RatFn { num, den };
        out.canonicalize();
        Ok(out)
    }

    pub fn zero() -> Self {
        RatFn {
            num: PPoly::zero(),
            den: PPoly::one(),
        }
    }

    pub fn one() -> Self {
        RatFn {
            num: PPoly::one(),
            den: PPoly::one(),
        }
    }

    pub fn from_poly(p: PPoly) -> Self {
        RatFn {
            num: p,
            den: PPoly::one(),
        }
    }

    pub fn from_rat(c: Rat) -> Self {
        RatFn::from_poly(PPoly::constant(c))
    }

    pub fn from_int(n: i64) -> Self {
        RatFn::from_rat(rint(n))
    }

    /// The indeterminate as a rational function.
    pub fn var() -> Self {
        RatFn::from_poly(PPoly::var())
    }

    fn canonicalize(&mut self) {
        if self.num.is_zero() {
            self.den = PPoly::one();
            return;
        }
        let g = PPoly::gcd(&self.num, &self.den);
        if g.degree().is_some_and(|d| d > 0) {
            self.num = self.num.div_rem(&g).unwrap().0;
            self.den = self.den.div_rem(&g).unwrap().0;
        }
        // Normalize so the denominator is monic with positive lead.
        let lead = self.den.leading_coeff().unwrap().clone();
        let inv = lead.recip();
        self.num = self.num.scale(&inv);
        self.den = self.den.scale(&inv);
    }

    pub fn numerator(&self) -> &PPoly {
        &self.num
    }

    pub fn denominator(&self) -> &PPoly {
        &self.den
    }

    pub fn is_zero(&self) -> bool {
        self.num.is_zero()
    }

    pub fn is_polynomial(&self) -> bool {
        self.den.degree() == Some(0)
    }

    /// The underlying polynomial, if the denominator is trivial.
    pub fn to_poly(&self) -> Option<PPoly> {
        self.is_polynomial().then(|| {
            let lead = self.den.leading_coeff().unwrap();
            self.num.scale(&lead.recip())
        })
    }

    pub fn recip(&self) -> Result<RatFn, ExactError> {
        RatFn::new(self.den.clone(), self.num.clone())
    }

    /// Evaluates at a point where the denominator does not vanish.
    pub fn eval(&self, at: &Rat) -> Option<Rat> {
        let d = self.den.eval(at);
        if d.is_zero() {
            return None;
        }
        Some(self.num.eval(at) / d)
    }
}

impl fmt::Display for RatFn {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_polynomial() {
            write!(f, "{}", self.to_poly().unwrap())
        } else {
            write!(f, "({}) / ({})", self.num, self.den)
        }
    }
}

impl Add<&RatFn> for &RatFn {
    type Output = RatFn;
    fn add(self, rhs: &RatFn) -> RatFn {
        RatFn::new(
            &(&self.num * &rhs.den) + &(&rhs.num * &self.den),
            &self.den * &rhs.den,
        )
        .expect("nonzero denominators")
    }
}

impl Sub<&RatFn> for &RatFn {
    type Output = RatFn;
    fn sub(self, rhs: &RatFn) -> RatFn {
        self + &(-rhs)
    }
}

impl Neg for &RatFn {
    type Output = RatFn;
    fn neg(self) -> RatFn {
        RatFn {
            num: -&self.num,
            den: self.den.clone(),
        }
    }
}

impl Mul<&RatFn> for &RatFn {
    type Output = RatFn;
    fn mul(self, rhs: &RatFn) -> RatFn {
        RatFn::new(&self.num * &rhs.num, &self.den * &rhs.den).expect("nonzero denominators")
    }
}

impl AddAssign<&RatFn> for RatFn {
    fn add_assign(&mut self, rhs: &RatFn) {
        *self = &*self + rhs;
    }
}

impl SubAssign<&RatFn> for RatFn {
    fn sub_assign(&mut self, rhs: &RatFn) {
        *self = &*self - rhs;
    }
}

impl MulAssign<&RatFn> for RatFn {
    fn mul_assign(&mut self, rhs: &RatFn) {
        *self = &*self * rhs;
    }
}

/// Bernoulli numbers by the convolution recursion
/// `sum_{k=0}^{n} C(n+1,k) B_k = 0` with `B_0 = 1`.
///
/// Only even positive indices are exposed; the odd ones vanish beyond
/// `B_1 = -1/2`, which the recursion uses internally.
pub fn bernoulli(n: i64) -> Result<Rat, ExactError> {
    if n <= 0 || n % 2 != 0 {
        return Err(ExactError::BadBernoulliIndex(n));
    }
    Ok(bernoulli_table(n as usize).swap_remove(n as usize))
}

fn bernoulli_table(n: usize) -> Vec<Rat> {
    let mut table: Vec<Rat> = Vec::with_capacity(n + 1);
    table.push(Rat::one());
    for m in 1..=n {
        // binom accumulates C(m+1, k) incrementally.
        let mut binom = Rat::one();
        let mut acc = Rat::zero();
        for (k, b) in table.iter().enumerate() {
            acc += &binom * b;
            binom = binom * rint((m + 1 - k) as i64) / rint((k + 1) as i64);
        }
        // At k = m the coefficient is C(m+1, m) = m+1.
        table.push(-acc / rint((m + 1) as i64));
    }
    table
}

/// `zeta(1-2k)` as an exact rational, via `-B_{2k}/(2k)`.
pub fn zeta_neg(k: u32) -> Rat {
    assert!(k >= 1, "zeta_neg expects k >= 1");
    let b = bernoulli(2 * k as i64).expect("even positive index");
    -b / rint(2 * k as i64)
}

/// The proportionality constant
/// `v(g) = (-1)^{g(g+1)/2} 2^{-g} zeta(-1) zeta(-3) ... zeta(1-2g)`.
pub fn proportionality_v(g: u32) -> Rat {
    let mut acc = Rat::one();
    for k in 1..=g {
        acc *= zeta_neg(k);
    }
    let sign = if (g * (g + 1) / 2).is_multiple_of(2) { 1 } else { -1 };
    acc * rat(sign, 1 << g)
}
