//! Sparse multivariate polynomials over Q with graded-lex term order.

use std::cmp::Ordering;
use std::collections::BTreeMap;
use std::fmt;

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};
use smallvec::SmallVec;

pub type Q = BigRational;

/// Exponent vector, indexed by variable. Trailing zeros are always trimmed so
/// that equal monomials have equal representations regardless of how many
/// variables the surrounding chart has.
#[derive(Clone, PartialEq, Eq, Hash, Default)]
pub struct Monomial(SmallVec<[u16; 8]>);

impl Monomial {
    pub fn one() -> Self {
        Monomial(SmallVec::new())
    }

    pub fn var(index: usize) -> Self {
        Self::var_pow(index, 1)
    }

    pub fn var_pow(index: usize, exp: u16) -> Self {
        let mut m = Monomial(SmallVec::from_elem(0, index + 1));
        m.0[index] = exp;
        m.trim();
        m
    }

    pub fn from_exponents(exps: &[u16]) -> Self {
        let mut m = Monomial(SmallVec::from_slice(exps));
        m.trim();
        m
    }

    fn trim(&mut self) {
        while self.0.last() == Some(&0) {
            self.0.pop();
        }
    }

    pub fn exp(&self, var: usize) -> u16 {
        self.0.get(var).copied().unwrap_or(0)
    }

    pub fn exponents(&self) -> &[u16] {
        &self.0
    }

    pub fn degree(&self) -> u32 {
        self.0.iter().map(|&e| e as u32).sum()
    }

    pub fn is_one(&self) -> bool {
        self.0.is_empty()
    }

    pub fn mul(&self, other: &Monomial) -> Monomial {
        let n = self.0.len().max(other.0.len());
        let mut out: SmallVec<[u16; 8]> = SmallVec::with_capacity(n);
        for i in 0..n {
            out.push(self.exp(i) + other.exp(i));
        }
        Monomial(out)
    }

    pub fn divides(&self, other: &Monomial) -> bool {
        self.0.iter().enumerate().all(|(i, &e)| e <= other.exp(i))
    }

    /// `other / self`, assuming `self.divides(other)`.
    pub fn quotient_of(&self, other: &Monomial) -> Monomial {
        let mut out: SmallVec<[u16; 8]> = other.0.clone();
        for (i, &e) in self.0.iter().enumerate() {
            out[i] -= e;
        }
        let mut m = Monomial(out);
        m.trim();
        m
    }

    pub fn gcd(&self, other: &Monomial) -> Monomial {
        let n = self.0.len().min(other.0.len());
        let mut m = Monomial((0..n).map(|i| self.0[i].min(other.0[i])).collect());
        m.trim();
        m
    }

    /// Exponent vector with `var` removed (set to zero).
    pub fn without(&self, var: usize) -> Monomial {
        if var >= self.0.len() {
            return self.clone();
        }
        let mut m = self.clone();
        m.0[var] = 0;
        m.trim();
        m
    }

    pub fn max_var(&self) -> Option<usize> {
        self.0.len().checked_sub(1)
    }

    pub fn remap(&self, map: &dyn Fn(usize) -> usize) -> Monomial {
        let mut out: SmallVec<[u16; 8]> = SmallVec::new();
        for (i, &e) in self.0.iter().enumerate() {
            if e == 0 {
                continue;
            }
            let j = map(i);
            if out.len() <= j {
                out.resize(j + 1, 0);
            }
            out[j] += e;
        }
        let mut m = Monomial(out);
        m.trim();
        m
    }
}

impl Ord for Monomial {
    fn cmp(&self, other: &Self) -> Ordering {
        match self.degree().cmp(&other.degree()) {
            Ordering::Equal => {}
            o => return o,
        }
        let n = self.0.len().max(other.0.len());
        for i in 0..n {
            match self.exp(i).cmp(&other.exp(i)) {
                Ordering::Equal => continue,
                o => return o,
            }
        }
        Ordering::Equal
    }
}

impl PartialOrd for Monomial {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl fmt::Debug for Monomial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:?}", self.0.as_slice())
    }
}

/// Polynomial as a sparse map from monomial to nonzero rational coefficient.
/// The largest key is the leading term under graded-lex order.
#[derive(Clone, PartialEq, Eq, Hash, Default)]
pub struct Poly {
    terms: BTreeMap<Monomial, Q>,
}

impl fmt::Debug for Poly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_map().entries(self.terms.iter().rev()).finish()
    }
}

impl Poly {
    pub fn zero() -> Self {
        Poly::default()
    }

    pub fn one() -> Self {
        Self::constant(Q::one())
    }

    pub fn constant(c: Q) -> Self {
        Self::monomial(Monomial::one(), c)
    }

    pub fn from_int(n: i64) -> Self {
        Self::constant(Q::from_integer(BigInt::from(n)))
    }

    pub fn var(index: usize) -> Self {
        Self::monomial(Monomial::var(index), Q::one())
    }

    pub fn monomial(m: Monomial, c: Q) -> Self {
        let mut terms = BTreeMap::new();
        if !c.is_zero() {
            terms.insert(m, c);
        }
        Poly { terms }
    }

    pub fn from_terms(iter: impl IntoIterator<Item = (Monomial, Q)>) -> Self {
        let mut p = Poly::zero();
        for (m, c) in iter {
            p.add_term(m, c);
        }
        p
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn is_one(&self) -> bool {
        self.terms.len() == 1 && self.terms.iter().next().is_some_and(|(m, c)| m.is_one() && c.is_one())
    }

    pub fn is_constant(&self) -> bool {
        self.terms.keys().all(Monomial::is_one)
    }

    pub fn as_constant(&self) -> Option<Q> {
        if self.is_zero() {
            Some(Q::zero())
        } else if self.is_constant() {
            self.terms.values().next().cloned()
        } else {
            None
        }
    }

    pub fn is_monomial(&self) -> bool {
        self.terms.len() == 1
    }

    pub fn num_terms(&self) -> usize {
        self.terms.len()
    }

    pub fn terms(&self) -> impl DoubleEndedIterator<Item = (&Monomial, &Q)> {
        self.terms.iter()
    }

    /// Terms in descending term order.
    pub fn terms_desc(&self) -> impl Iterator<Item = (&Monomial, &Q)> {
        self.terms.iter().rev()
    }

    pub fn coeff(&self, m: &Monomial) -> Q {
        self.terms.get(m).cloned().unwrap_or_else(Q::zero)
    }

    pub fn leading(&self) -> Option<(&Monomial, &Q)> {
        self.terms.iter().next_back()
    }

    pub fn leading_coeff(&self) -> Q {
        self.leading().map(|(_, c)| c.clone()).unwrap_or_else(Q::zero)
    }

    pub fn total_degree(&self) -> u32 {
        self.terms.keys().map(Monomial::degree).max().unwrap_or(0)
    }

    pub fn degree_in(&self, var: usize) -> u16 {
        self.terms.keys().map(|m| m.exp(var)).max().unwrap_or(0)
    }

    /// Number of variable slots touched by any monomial.
    pub fn var_span(&self) -> usize {
        self.terms.keys().map(|m| m.exponents().len()).max().unwrap_or(0)
    }

    pub fn vars(&self) -> Vec<usize> {
        let mut out = Vec::new();
        for i in 0..self.var_span() {
            if self.terms.keys().any(|m| m.exp(i) > 0) {
                out.push(i);
            }
        }
        out
    }

    pub fn add_term(&mut self, m: Monomial, c: Q) {
        if c.is_zero() {
            return;
        }
        match self.terms.entry(m) {
            std::collections::btree_map::Entry::Vacant(e) => {
                e.insert(c);
            }
            std::collections::btree_map::Entry::Occupied(mut e) => {
                *e.get_mut() += c;
                if e.get().is_zero() {
                    e.remove();
                }
            }
        }
    }

    pub fn add(&self, other: &Poly) -> Poly {
        let (big, small) = if self.terms.len() >= other.terms.len() { (self, other) } else { (other, self) };
        let mut out = big.clone();
        for (m, c) in &small.terms {
            out.add_term(m.clone(), c.clone());
        }
        out
    }

    pub fn sub(&self, other: &Poly) -> Poly {
        let mut out = self.clone();
        for (m, c) in &other.terms {
            out.add_term(m.clone(), -c.clone());
        }
        out
    }

    pub fn neg(&self) -> Poly {
        Poly { terms: self.terms.iter().map(|(m, c)| (m.clone(), -c.clone())).collect() }
    }

    pub fn scale(&self, k: &Q) -> Poly {
        if k.is_zero() {
            return Poly::zero();
        }
        Poly { terms: self.terms.iter().map(|(m, c)| (m.clone(), c * k)).collect() }
    }

    pub fn mul_monomial(&self, mono: &Monomial, k: &Q) -> Poly {
        if k.is_zero() {
            return Poly::zero();
        }
        Poly { terms: self.terms.iter().map(|(m, c)| (m.mul(mono), c * k)).collect() }
    }

    pub fn mul(&self, other: &Poly) -> Poly {
        if self.is_zero() || other.is_zero() {
            return Poly::zero();
        }
        if let Some(c) = self.as_constant() {
            return other.scale(&c);
        }
        if let Some(c) = other.as_constant() {
            return self.scale(&c);
        }
        let mut out = Poly::zero();
        for (m1, c1) in &self.terms {
            for (m2, c2) in &other.terms {
                out.add_term(m1.mul(m2), c1 * c2);
            }
        }
        out
    }

    pub fn pow(&self, mut e: u32) -> Poly {
        let mut base = self.clone();
        let mut acc = Poly::one();
        while e > 0 {
            if e & 1 == 1 {
                acc = acc.mul(&base);
            }
            e >>= 1;
            if e > 0 {
                base = base.mul(&base);
            }
        }
        acc
    }

    pub fn diff(&self, var: usize) -> Poly {
        let mut out = Poly::zero();
        for (m, c) in &self.terms {
            let e = m.exp(var);
            if e == 0 {
                continue;
            }
            let mut exps: SmallVec<[u16; 8]> = SmallVec::from_slice(m.exponents());
            exps[var] -= 1;
            out.add_term(Monomial::from_exponents(&exps), c * Q::from_integer(BigInt::from(e)));
        }
        out
    }

    pub fn eval_exact(&self, point: &[Q]) -> Q {
        let mut acc = Q::zero();
        for (m, c) in &self.terms {
            let mut t = c.clone();
            for (i, &e) in m.exponents().iter().enumerate() {
                if e > 0 {
                    t *= num_traits::pow(point[i].clone(), e as usize);
                }
            }
            acc += t;
        }
        acc
    }

    pub fn eval_f64(&self, point: &[f64]) -> f64 {
        let mut acc = 0.0;
        for (m, c) in &self.terms {
            let mut t = q_to_f64(c);
            for (i, &e) in m.exponents().iter().enumerate() {
                if e > 0 {
                    t *= point[i].powi(e as i32);
                }
            }
            acc += t;
        }
        acc
    }

    pub fn remap(&self, map: &dyn Fn(usize) -> usize) -> Poly {
        Poly::from_terms(self.terms.iter().map(|(m, c)| (m.remap(map), c.clone())))
    }

    /// Substitute `var := value` for a polynomial value.
    pub fn substitute(&self, var: usize, value: &Poly) -> Poly {
        let mut out = Poly::zero();
        let mut cache: Vec<Poly> = vec![Poly::one()];
        for (m, c) in &self.terms {
            let e = m.exp(var) as usize;
            while cache.len() <= e {
                let next = cache.last().unwrap().mul(value);
                cache.push(next);
            }
            let rest = Poly::monomial(m.without(var), c.clone());
            out = out.add(&rest.mul(&cache[e]));
        }
        out
    }

    /// Least common multiple of coefficient denominators.
    pub fn denominator_lcm(&self) -> BigInt {
        self.terms.values().fold(BigInt::one(), |acc, c| acc.lcm(c.denom()))
    }

    /// Gcd of the numerators of all coefficients (nonnegative).
    pub fn numerator_gcd(&self) -> BigInt {
        self.terms.values().fold(BigInt::zero(), |acc, c| acc.gcd(c.numer()))
    }

    /// Scale so that the leading coefficient is 1.
    pub fn monic(&self) -> Poly {
        match self.leading() {
            None => Poly::zero(),
            Some((_, c)) if c.is_one() => self.clone(),
            Some((_, c)) => self.scale(&c.recip()),
        }
    }

    /// Gcd of all exponent vectors (the largest monomial dividing every term).
    pub fn monomial_content(&self) -> Monomial {
        let mut it = self.terms.keys();
        let first = match it.next() {
            Some(m) => m.clone(),
            None => return Monomial::one(),
        };
        it.fold(first, |acc, m| acc.gcd(m))
    }

    pub fn div_monomial(&self, mono: &Monomial) -> Poly {
        Poly { terms: self.terms.iter().map(|(m, c)| (mono.quotient_of(m), c.clone())).collect() }
    }

    /// Exact division. Returns `None` if `d` does not divide `self`.
    pub fn div_exact(&self, d: &Poly) -> Option<Poly> {
        if d.is_zero() {
            return None;
        }
        if self.is_zero() {
            return Some(Poly::zero());
        }
        if let Some(c) = d.as_constant() {
            return Some(self.scale(&c.recip()));
        }
        if d.is_monomial() {
            let (dm, dc) = d.leading().unwrap();
            if !self.terms.keys().all(|m| dm.divides(m)) {
                return None;
            }
            let inv = dc.recip();
            return Some(Poly { terms: self.terms.iter().map(|(m, c)| (dm.quotient_of(m), c * &inv)).collect() });
        }
        let (dlm, dlc) = d.leading().map(|(m, c)| (m.clone(), c.clone())).unwrap();
        let inv = dlc.recip();
        let mut rem = self.clone();
        let mut quo = Poly::zero();
        while let Some((rm, rc)) = rem.leading().map(|(m, c)| (m.clone(), c.clone())) {
            if !dlm.divides(&rm) || rm.degree() < dlm.degree() {
                return None;
            }
            let qm = dlm.quotient_of(&rm);
            let qc = &rc * &inv;
            rem = rem.sub(&d.mul_monomial(&qm, &qc));
            quo.add_term(qm, qc);
        }
        Some(quo)
    }

    // --- univariate views used by the gcd ---

    /// Coefficients of `self` viewed as a polynomial in `var`, index = power.
    fn coeffs_in(&self, var: usize) -> Vec<Poly> {
        let deg = self.degree_in(var) as usize;
        let mut out = vec![Poly::zero(); deg + 1];
        for (m, c) in &self.terms {
            out[m.exp(var) as usize].add_term(m.without(var), c.clone());
        }
        out
    }

    fn from_coeffs_in(coeffs: &[Poly], var: usize) -> Poly {
        let mut out = Poly::zero();
        for (k, p) in coeffs.iter().enumerate() {
            if p.is_zero() {
                continue;
            }
            let xk = Monomial::var_pow(var, k as u16);
            for (m, c) in &p.terms {
                out.add_term(m.mul(&xk), c.clone());
            }
        }
        out
    }
}

pub fn q_to_f64(q: &Q) -> f64 {
    use num_traits::ToPrimitive;
    q.to_f64().unwrap_or_else(|| {
        // Fall back for huge numerators/denominators.
        let n = q.numer().to_f64().unwrap_or(f64::INFINITY);
        let d = q.denom().to_f64().unwrap_or(f64::INFINITY);
        n / d
    })
}

/// Greatest common divisor over Q, normalized to leading coefficient 1
/// (or zero if both inputs are zero).
pub fn gcd(a: &Poly, b: &Poly) -> Poly {
    if a.is_zero() {
        return b.monic();
    }
    if b.is_zero() {
        return a.monic();
    }
    if a.is_constant() || b.is_constant() {
        return Poly::one();
    }
    if a.is_monomial() {
        let m = a.leading().unwrap().0.gcd(&b.monomial_content());
        return Poly::monomial(m, Q::one());
    }
    if b.is_monomial() {
        let m = b.leading().unwrap().0.gcd(&a.monomial_content());
        return Poly::monomial(m, Q::one());
    }
    // Pull out monomial contents first; they are cheap and frequent.
    let ma = a.monomial_content();
    let mb = b.monomial_content();
    if !ma.is_one() || !mb.is_one() {
        let g = ma.gcd(&mb);
        let inner = gcd(&a.div_monomial(&ma), &b.div_monomial(&mb));
        return inner.mul_monomial(&g, &Q::one()).monic();
    }
    let va = a.vars();
    let vb = b.vars();
    let common: Vec<usize> = va.iter().copied().filter(|v| vb.contains(v)).collect();
    let Some(&var) = common.first() else {
        // A common divisor can only involve shared variables.
        return Poly::one();
    };
    let ca = content_in(a, var);
    let cb = content_in(b, var);
    let c = gcd(&ca, &cb);
    let pa = a.div_exact(&ca).expect("content divides");
    let pb = b.div_exact(&cb).expect("content divides");
    let g = match modular_gcd_degree(&pa, &pb, var) {
        Some(0) => Poly::one(),
        Some(d) if d == pb.degree_in(var) && pa.div_exact(&pb).is_some() => pb,
        Some(d) if d == pa.degree_in(var) && pb.div_exact(&pa).is_some() => pa,
        _ => heuristic_gcd(&integer_primitive(&pa), &integer_primitive(&pb), 0).unwrap_or_else(|| subresultant_gcd(&pa, &pb, var)),
    };
    c.mul(&g).monic()
}

/// `p` scaled to integer coefficients with trivial integer content.
fn integer_primitive(p: &Poly) -> Poly {
    let s = p.scale(&Q::from_integer(p.denominator_lcm()));
    let g = s.numerator_gcd();
    if g.is_one() || g.is_zero() {
        s
    } else {
        s.scale(&Q::new(BigInt::one(), g))
    }
}

fn max_norm(p: &Poly) -> BigInt {
    p.terms.values().map(|c| c.numer().abs()).max().unwrap_or_default()
}

/// Substitute the integer `x` for `var`.
fn eval_at(p: &Poly, var: usize, x: &BigInt) -> Poly {
    let mut pows: Vec<BigInt> = vec![BigInt::one()];
    let mut out = Poly::zero();
    for (m, c) in &p.terms {
        let e = m.exp(var) as usize;
        while pows.len() <= e {
            let next = pows.last().unwrap() * x;
            pows.push(next);
        }
        out.add_term(m.without(var), c * Q::from_integer(pows[e].clone()));
    }
    out
}

/// Rebuild a polynomial in `var` from its value at `x`, reading
/// coefficients as balanced residues mod `x`.
fn interpolate(h: &Poly, var: usize, x: &BigInt) -> Poly {
    let half = x / 2;
    let xq = Q::from_integer(x.clone());
    let mut h = h.clone();
    let mut out = Poly::zero();
    let mut k: u16 = 0;
    while !h.is_zero() {
        let mut g = Poly::zero();
        for (m, c) in &h.terms {
            let mut r = c.numer().mod_floor(x);
            if r > half {
                r -= x;
            }
            g.add_term(m.clone(), Q::from_integer(r));
        }
        for (m, c) in &g.terms {
            out.add_term(m.mul(&Monomial::var_pow(var, k)), c.clone());
        }
        h = h.sub(&g).scale(&xq.recip());
        k += 1;
    }
    out
}

/// Heuristic gcd of integer polynomials: evaluate the highest variable at a
/// large integer, recurse, and lift back. Every candidate is confirmed by
/// exact division; `None` means the heuristic gave up.
fn heuristic_gcd(a: &Poly, b: &Poly, depth: usize) -> Option<Poly> {
    let ca = a.numerator_gcd();
    let cb = b.numerator_gcd();
    let content = ca.gcd(&cb);
    let var = match (a.vars().last(), b.vars().last()) {
        (None, None) => return Some(Poly::constant(Q::from_integer(content))),
        (Some(&u), Some(&v)) => u.max(v),
        (Some(&u), None) | (None, Some(&u)) => u,
    };
    if depth > 12 {
        return None;
    }
    let a = a.scale(&Q::new(BigInt::one(), ca));
    let b = b.scale(&Q::new(BigInt::one(), cb));
    let bound: BigInt = max_norm(&a).min(max_norm(&b)) * 2 + 29;
    let mut x = bound;
    for _ in 0..6 {
        let (fa, fb) = (eval_at(&a, var, &x), eval_at(&b, var, &x));
        if !fa.is_zero() && !fb.is_zero() {
            if let Some(h) = heuristic_gcd(&fa, &fb, depth + 1) {
                let cand = integer_primitive(&interpolate(&h, var, &x));
                if !cand.is_zero() && a.div_exact(&cand).is_some() && b.div_exact(&cand).is_some() {
                    return Some(cand.scale(&Q::from_integer(content)));
                }
            }
        }
        let r = x.sqrt().sqrt();
        x = &x * 73794 * r / 27011;
    }
    None
}

const PRIME: u64 = 2_147_483_647;

fn mod_q(q: &Q) -> Option<u64> {
    let p = BigInt::from(PRIME);
    let n = ((q.numer() % &p) + &p) % &p;
    let d = ((q.denom() % &p) + &p) % &p;
    let n: u64 = n.try_into().ok()?;
    let d: u64 = d.try_into().ok()?;
    (d != 0).then(|| n * inv_mod(d) % PRIME)
}

fn pow_mod(mut b: u64, mut e: u64) -> u64 {
    let mut r = 1;
    while e > 0 {
        if e & 1 == 1 {
            r = r * b % PRIME;
        }
        b = b * b % PRIME;
        e >>= 1;
    }
    r
}

fn inv_mod(a: u64) -> u64 {
    pow_mod(a, PRIME - 2)
}

/// Coefficients in `var` of `p` with every other variable set to `point`, mod `PRIME`.
fn specialize(p: &Poly, var: usize, point: &[u64]) -> Option<Vec<u64>> {
    let mut out = vec![0u64; p.degree_in(var) as usize + 1];
    for (m, c) in &p.terms {
        let mut v = mod_q(c)?;
        for (i, &e) in m.exponents().iter().enumerate() {
            if i != var && e > 0 {
                v = v * pow_mod(point[i], e as u64) % PRIME;
            }
        }
        let k = m.exp(var) as usize;
        out[k] = (out[k] + v) % PRIME;
    }
    Some(out)
}

fn univariate_gcd_degree(mut a: Vec<u64>, mut b: Vec<u64>) -> usize {
    let trim = |v: &mut Vec<u64>| {
        while v.last() == Some(&0) {
            v.pop();
        }
    };
    trim(&mut a);
    trim(&mut b);
    while !b.is_empty() {
        let inv = inv_mod(*b.last().unwrap());
        while a.len() >= b.len() {
            let f = a.last().unwrap() * inv % PRIME;
            let shift = a.len() - b.len();
            for (k, bk) in b.iter().enumerate() {
                a[k + shift] = (a[k + shift] + PRIME - f * bk % PRIME) % PRIME;
            }
            trim(&mut a);
        }
        std::mem::swap(&mut a, &mut b);
    }
    a.len().saturating_sub(1)
}

/// Degree in `var` of the gcd of two polynomials that are primitive in
/// `var`, read off a specialization of the other variables modulo a prime.
/// A specialization never lowers the gcd degree once both leading
/// coefficients survive it, so `Some(0)` proves coprimality; a positive
/// answer is an upper bound.
fn modular_gcd_degree(a: &Poly, b: &Poly, var: usize) -> Option<u16> {
    let n = a.var_span().max(b.var_span());
    let mut best: Option<u16> = None;
    for attempt in 0..3u64 {
        let point: Vec<u64> = (0..n as u64).map(|i| (1_000_003 * (i + 1) + 7_919 * attempt * attempt + 12_345) % PRIME).collect();
        let (Some(sa), Some(sb)) = (specialize(a, var, &point), specialize(b, var, &point)) else {
            return None;
        };
        if sa.last() == Some(&0) || sb.last() == Some(&0) {
            continue;
        }
        let d = univariate_gcd_degree(sa, sb) as u16;
        best = Some(best.map_or(d, |b: u16| b.min(d)));
        if d == 0 {
            break;
        }
    }
    best
}

/// Gcd of the coefficients of `p` viewed as a polynomial in `var`.
pub fn content_in(p: &Poly, var: usize) -> Poly {
    let coeffs = p.coeffs_in(var);
    let mut g = Poly::zero();
    for c in coeffs.iter().rev() {
        if c.is_zero() {
            continue;
        }
        g = gcd(&g, c);
        if g.is_constant() {
            return Poly::one();
        }
    }
    g
}

fn primitive_part_in(p: &Poly, var: usize) -> Poly {
    if p.is_zero() {
        return Poly::zero();
    }
    let c = content_in(p, var);
    p.div_exact(&c).expect("content divides")
}

/// Pseudo-remainder of `a` by `b` in `var`: lc(b)^(deg a - deg b + 1) * a mod b.
fn prem(a: &[Poly], b: &[Poly]) -> Vec<Poly> {
    let db = b.len() - 1;
    let lcb = &b[db];
    let mut r: Vec<Poly> = a.to_vec();
    let mut e = (a.len() - 1) as i64 - db as i64 + 1;
    loop {
        while r.last().is_some_and(Poly::is_zero) {
            r.pop();
        }
        if r.len() < b.len() {
            break;
        }
        let dr = r.len() - 1;
        let lcr = r[dr].clone();
        let shift = dr - db;
        for p in r.iter_mut() {
            *p = p.mul(lcb);
        }
        for (k, bk) in b.iter().enumerate() {
            r[k + shift] = r[k + shift].sub(&lcr.mul(bk));
        }
        e -= 1;
    }
    if e > 0 {
        let f = lcb.pow(e as u32);
        for p in r.iter_mut() {
            *p = p.mul(&f);
        }
    }
    r
}

fn subresultant_gcd(a: &Poly, b: &Poly, var: usize) -> Poly {
    let mut ac = a.coeffs_in(var);
    let mut bc = b.coeffs_in(var);
    if ac.len() < bc.len() {
        std::mem::swap(&mut ac, &mut bc);
    }
    if bc.len() == 1 {
        // b is free of var and primitive, hence a unit in Q[others][var] content sense.
        return Poly::one();
    }
    let mut g = Poly::one();
    let mut h = Poly::one();
    loop {
        let delta = (ac.len() - bc.len()) as u32;
        let r = prem(&ac, &bc);
        if r.is_empty() {
            let bp = Poly::from_coeffs_in(&bc, var);
            return primitive_part_in(&bp, var);
        }
        if r.len() == 1 {
            return Poly::one();
        }
        let divisor = g.mul(&h.pow(delta));
        let next: Vec<Poly> = r
            .iter()
            .map(|p| p.div_exact(&divisor).expect("subresultant division is exact"))
            .collect();
        ac = std::mem::replace(&mut bc, next);
        g = ac.last().unwrap().clone();
        h = match delta {
            0 => h,
            1 => g.clone(),
            d => g.pow(d).div_exact(&h.pow(d - 1)).expect("subresultant division is exact"),
        };
    }
}

/// Absolute value of the integer content shared by two integer polynomials.
pub(crate) fn integer_content(p: &Poly) -> BigInt {
    p.numerator_gcd().abs()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn q(n: i64) -> Q {
        Q::from_integer(n.into())
    }

    fn x() -> Poly {
        Poly::var(0)
    }
    fn y() -> Poly {
        Poly::var(1)
    }
    fn z() -> Poly {
        Poly::var(2)
    }

    #[test]
    fn grlex_orders_by_degree_then_lex() {
        let x2 = Monomial::var_pow(0, 2);
        let xy = Monomial::var(0).mul(&Monomial::var(1));
        let y3 = Monomial::var_pow(1, 3);
        assert!(y3 > x2);
        assert!(x2 > xy);
        assert!(Monomial::var(0) > Monomial::var(1));
    }

    #[test]
    fn gcd_of_products() {
        let f = x().add(&y()).mul(&x().sub(&z()));
        let g = x().add(&y()).mul(&y().add(&Poly::one()));
        let d = gcd(&f, &g);
        assert_eq!(d, x().add(&y()));
    }

    #[test]
    fn gcd_with_squares_and_scalars() {
        let a = x().mul(&y()).sub(&Poly::from_int(2)).pow(2).scale(&q(3));
        let b = x().mul(&y()).sub(&Poly::from_int(2)).mul(&x().add(&z())).scale(&q(-5));
        assert_eq!(gcd(&a, &b), x().mul(&y()).sub(&Poly::from_int(2)));
    }

    #[test]
    fn gcd_coprime_is_one() {
        let a = x().pow(2).add(&y());
        let b = x().add(&y().pow(2));
        assert!(gcd(&a, &b).is_one());
    }

    #[test]
    fn gcd_monomial_fast_path() {
        let a = x().pow(3).mul(&y());
        let b = x().pow(2).mul(&z()).add(&x().pow(4));
        assert_eq!(gcd(&a, &b), x().pow(2));
    }

    #[test]
    fn exact_division_detects_non_divisor() {
        let a = x().pow(2).sub(&y().pow(2));
        assert_eq!(a.div_exact(&x().sub(&y())), Some(x().add(&y())));
        assert_eq!(a.div_exact(&x().add(&Poly::one())), None);
    }

    #[test]
    fn gcd_high_degree_univariate_in_several_vars() {
        // (x^3 y - z)(x + y z)^2 and (x^3 y - z)(x - 1)
        let common = x().pow(3).mul(&y()).sub(&z());
        let a = common.mul(&x().add(&y().mul(&z())).pow(2));
        let b = common.mul(&x().sub(&Poly::one()));
        assert_eq!(gcd(&a, &b), common.monic());
    }
}
