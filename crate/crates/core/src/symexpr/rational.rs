use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, Zero};

use super::poly::{gcd, integer_content, q_to_f64, Poly, Q};
use super::SymError;

/// Reduced quotient of two polynomials with integer coefficients.
///
/// Canonical form: `gcd(num, den) = 1` as polynomials, the integer contents of
/// `num` and `den` share no common factor, and the leading coefficient of `den`
/// is positive. Zero is `0/1`. Structural equality is therefore mathematical
/// equality.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct RationalExpr {
    num: Poly,
    den: Poly,
}

impl fmt::Debug for RationalExpr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({:?})/({:?})", self.num, self.den)
    }
}

impl Default for RationalExpr {
    fn default() -> Self {
        Self::zero()
    }
}

impl RationalExpr {
    pub fn zero() -> Self {
        RationalExpr { num: Poly::zero(), den: Poly::one() }
    }

    pub fn one() -> Self {
        RationalExpr { num: Poly::one(), den: Poly::one() }
    }

    pub fn from_int(n: i64) -> Self {
        Self::from_q(Q::from_integer(n.into()))
    }

    pub fn from_q(q: Q) -> Self {
        Self::from_poly(Poly::constant(q))
    }

    pub fn var(index: usize) -> Self {
        Self::from_poly(Poly::var(index))
    }

    pub fn from_poly(p: Poly) -> Self {
        Self::normalize_coprime(p, Poly::one())
    }

    /// Build `num / den`, reducing to canonical form.
    pub fn from_parts(num: Poly, den: Poly) -> Result<Self, SymError> {
        if den.is_zero() {
            return Err(SymError::DivisionByZero);
        }
        if num.is_zero() {
            return Ok(Self::zero());
        }
        let g = gcd(&num, &den);
        if g.is_one() {
            return Ok(Self::normalize_coprime(num, den));
        }
        let n = num.div_exact(&g).expect("gcd divides numerator");
        let d = den.div_exact(&g).expect("gcd divides denominator");
        Ok(Self::normalize_coprime(n, d))
    }

    /// Scalar normalization for an already coprime pair.
    fn normalize_coprime(num: Poly, den: Poly) -> Self {
        if num.is_zero() {
            return Self::zero();
        }
        let l = num.denominator_lcm().lcm(&den.denominator_lcm());
        let lq = Q::from_integer(l);
        let (mut n, mut d) = (num.scale(&lq), den.scale(&lq));
        let c = integer_content(&n).gcd(&integer_content(&d));
        let mut k = Q::new(BigInt::one(), c);
        if d.leading_coeff().is_negative() {
            k = -k;
        }
        if !k.is_one() {
            n = n.scale(&k);
            d = d.scale(&k);
        }
        RationalExpr { num: n, den: d }
    }

    pub fn numer(&self) -> &Poly {
        &self.num
    }

    pub fn denom(&self) -> &Poly {
        &self.den
    }

    pub fn is_zero(&self) -> bool {
        self.num.is_zero()
    }

    pub fn is_one(&self) -> bool {
        self.num.is_one() && self.den.is_one()
    }

    pub fn is_polynomial(&self) -> bool {
        self.den.is_constant()
    }

    pub fn as_constant(&self) -> Option<Q> {
        let n = self.num.as_constant()?;
        let d = self.den.as_constant()?;
        Some(n / d)
    }

    pub fn is_constant(&self) -> bool {
        self.num.is_constant() && self.den.is_constant()
    }

    /// Largest variable index + 1 appearing anywhere.
    pub fn var_span(&self) -> usize {
        self.num.var_span().max(self.den.var_span())
    }

    pub fn neg(&self) -> Self {
        RationalExpr { num: self.num.neg(), den: self.den.clone() }
    }

    pub fn add(&self, other: &Self) -> Self {
        if self.is_zero() {
            return other.clone();
        }
        if other.is_zero() {
            return self.clone();
        }
        if self.den == other.den {
            let n = self.num.add(&other.num);
            return Self::from_parts(n, self.den.clone()).expect("nonzero denominator");
        }
        let g = gcd(&self.den, &other.den);
        if g.is_one() {
            let n = self.num.mul(&other.den).add(&other.num.mul(&self.den));
            let d = self.den.mul(&other.den);
            return Self::from_parts(n, d).expect("nonzero denominator");
        }
        // a/(g b') + c/(g d') = (a d' + c b') / (g b' d')
        let b1 = self.den.div_exact(&g).unwrap();
        let d1 = other.den.div_exact(&g).unwrap();
        let n = self.num.mul(&d1).add(&other.num.mul(&b1));
        let d = b1.mul(&other.den);
        Self::from_parts(n, d).expect("nonzero denominator")
    }

    pub fn sub(&self, other: &Self) -> Self {
        self.add(&other.neg())
    }

    pub fn mul(&self, other: &Self) -> Self {
        if self.is_zero() || other.is_zero() {
            return Self::zero();
        }
        if let Some(c) = self.as_constant() {
            return other.scale(&c);
        }
        if let Some(c) = other.as_constant() {
            return self.scale(&c);
        }
        // Cross-cancel before multiplying so intermediate sizes stay small.
        let g1 = gcd(&self.num, &other.den);
        let g2 = gcd(&other.num, &self.den);
        let n1 = self.num.div_exact(&g1).unwrap();
        let d2 = other.den.div_exact(&g1).unwrap();
        let n2 = other.num.div_exact(&g2).unwrap();
        let d1 = self.den.div_exact(&g2).unwrap();
        Self::normalize_coprime(n1.mul(&n2), d1.mul(&d2))
    }

    pub fn scale(&self, k: &Q) -> Self {
        if k.is_zero() {
            return Self::zero();
        }
        Self::normalize_coprime(self.num.scale(k), self.den.clone())
    }

    pub fn recip(&self) -> Result<Self, SymError> {
        if self.is_zero() {
            return Err(SymError::DivisionByZero);
        }
        Ok(Self::normalize_coprime(self.den.clone(), self.num.clone()))
    }

    pub fn div(&self, other: &Self) -> Result<Self, SymError> {
        Ok(self.mul(&other.recip()?))
    }

    pub fn pow(&self, e: i32) -> Result<Self, SymError> {
        if e >= 0 {
            let e = e as u32;
            Ok(Self::normalize_coprime(self.num.pow(e), self.den.pow(e)))
        } else {
            self.recip()?.pow(-e)
        }
    }

    /// Partial derivative with respect to variable `var` (quotient rule).
    pub fn diff(&self, var: usize) -> Self {
        let dn = self.num.diff(var);
        let dd = self.den.diff(var);
        if dd.is_zero() {
            if dn.is_zero() {
                return Self::zero();
            }
            return Self::from_parts(dn, self.den.clone()).expect("nonzero denominator");
        }
        let n = dn.mul(&self.den).sub(&self.num.mul(&dd));
        Self::from_parts(n, self.den.mul(&self.den)).expect("nonzero denominator")
    }

    pub fn eval_exact(&self, point: &[Q]) -> Result<Q, SymError> {
        self.check_arity(point.len())?;
        let d = self.den.eval_exact(point);
        if d.is_zero() {
            return Err(SymError::Pole);
        }
        Ok(self.num.eval_exact(point) / d)
    }

    pub fn eval_f64(&self, point: &[f64]) -> Result<f64, SymError> {
        self.check_arity(point.len())?;
        let d = self.den.eval_f64(point);
        if d == 0.0 || !d.is_finite() {
            return Err(SymError::Pole);
        }
        Ok(self.num.eval_f64(point) / d)
    }

    fn check_arity(&self, n: usize) -> Result<(), SymError> {
        let span = self.var_span();
        if span > n {
            return Err(SymError::MissingAssignment(span - 1));
        }
        Ok(())
    }

    /// Rename variables through `map` (old index -> new index).
    pub fn remap(&self, map: &dyn Fn(usize) -> usize) -> Self {
        RationalExpr { num: self.num.remap(map), den: self.den.remap(map) }
    }

    /// Substitute a rational expression for one variable.
    pub fn substitute(&self, var: usize, value: &RationalExpr) -> Self {
        // num(value)/den(value) substituted: homogenize by powers of den(value).
        let dn = self.num.degree_in(var) as u32;
        let dd = self.den.degree_in(var) as u32;
        let top = dn.max(dd);
        let hom = |p: &Poly| -> Poly {
            let mut out = Poly::zero();
            for (m, c) in p.terms() {
                let e = m.exp(var) as u32;
                let rest = Poly::monomial(m.without(var), c.clone());
                let t = rest.mul(&value.num.pow(e)).mul(&value.den.pow(top - e));
                out = out.add(&t);
            }
            out
        };
        let n = hom(&self.num);
        let d = hom(&self.den);
        Self::from_parts(n, d).unwrap_or_else(|_| Self::zero())
    }

    /// Lowest-terms pair scaled to have monic denominator (used for linear systems).
    pub fn monomial_coefficients_over(&self, den: &Poly) -> Option<Poly> {
        // self * den must be a polynomial.
        self.num.mul(den).div_exact(&self.den)
    }
}

impl From<i64> for RationalExpr {
    fn from(n: i64) -> Self {
        RationalExpr::from_int(n)
    }
}

impl<'a> Add<&'a RationalExpr> for &'a RationalExpr {
    type Output = RationalExpr;
    fn add(self, rhs: &RationalExpr) -> RationalExpr {
        RationalExpr::add(self, rhs)
    }
}

impl<'a> Sub<&'a RationalExpr> for &'a RationalExpr {
    type Output = RationalExpr;
    fn sub(self, rhs: &RationalExpr) -> RationalExpr {
        RationalExpr::sub(self, rhs)
    }
}

impl<'a> Mul<&'a RationalExpr> for &'a RationalExpr {
    type Output = RationalExpr;
    fn mul(self, rhs: &RationalExpr) -> RationalExpr {
        RationalExpr::mul(self, rhs)
    }
}

impl Neg for &RationalExpr {
    type Output = RationalExpr;
    fn neg(self) -> RationalExpr {
        RationalExpr::neg(self)
    }
}

/// Least common multiple of a family of polynomials (monic).
pub fn poly_lcm<'a>(polys: impl IntoIterator<Item = &'a Poly>) -> Poly {
    let mut acc = Poly::one();
    for p in polys {
        if p.is_constant() {
            continue;
        }
        let g = gcd(&acc, p);
        acc = acc.mul(&p.div_exact(&g).expect("gcd divides")).monic();
    }
    acc
}

/// Float view of a rational constant, for diagnostics.
pub fn q_f64(q: &Q) -> f64 {
    q_to_f64(q)
}
