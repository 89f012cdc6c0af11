//! Tensor algebra `T(g)`, its boxed powers `T^(m)(g)`, the coproduct and the
//! adjoint and coadjoint derivations.

use std::collections::BTreeMap;
use std::fmt;

use num_traits::{One, Zero};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::diffgeo::permutations_with_sign;
use crate::liealgebra::StructureConstants;
use crate::symexpr::Q;

/// Word of 0-based basis indices; the empty word is the unit.
pub type Word = Vec<usize>;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum CoalgebraError {
    #[error("index {index} out of range for dimension {dim}")]
    IndexOutOfRange { index: usize, dim: usize },
    #[error("dimension mismatch: {0} vs {1}")]
    DimensionMismatch(usize, usize),
    #[error("expected {expected} boxed factors, got {got}")]
    FactorCount { expected: usize, got: usize },
    #[error("element is not homogeneous in word length")]
    NotHomogeneous,
    #[error("element is not invariant under the adjoint action")]
    NotInvariant,
    #[error("element does not have the declared symmetry")]
    WrongSymmetry,
    #[error("bad coefficient `{0}`")]
    BadCoefficient(String),
}

/// Rational combination of `m`-tuples of words in `e_1 … e_r`.
#[derive(Clone, PartialEq, Eq)]
pub struct TensorElement {
    dim: usize,
    m: usize,
    terms: BTreeMap<Vec<Word>, Q>,
}

impl TensorElement {
    pub fn zero(dim: usize, m: usize) -> Self {
        TensorElement { dim, m, terms: BTreeMap::new() }
    }

    /// `1 ⊠ … ⊠ 1`.
    pub fn unit(dim: usize, m: usize) -> Self {
        let mut t = Self::zero(dim, m);
        t.terms.insert(vec![Vec::new(); m], Q::one());
        t
    }

    /// `k · w` in `T(g)`.
    pub fn word(dim: usize, word: Word, k: Q) -> Result<Self, CoalgebraError> {
        Self::from_terms(dim, 1, [(vec![word], k)])
    }

    /// Basis element `e_α`.
    pub fn generator(dim: usize, alpha: usize) -> Result<Self, CoalgebraError> {
        Self::word(dim, vec![alpha], Q::one())
    }

    /// `e_{w_1} ∧ … ∧ e_{w_p}` as the unnormalized signed sum over permutations.
    pub fn wedge_word(dim: usize, word: &[usize], k: Q) -> Result<Self, CoalgebraError> {
        Self::word(dim, word.to_vec(), k)?.antisymmetrize()
    }

    pub fn from_terms(
        dim: usize,
        m: usize,
        terms: impl IntoIterator<Item = (Vec<Word>, Q)>,
    ) -> Result<Self, CoalgebraError> {
        let mut t = Self::zero(dim, m);
        for (key, k) in terms {
            if key.len() != m {
                return Err(CoalgebraError::FactorCount { expected: m, got: key.len() });
            }
            if let Some(&index) = key.iter().flatten().find(|&&i| i >= dim) {
                return Err(CoalgebraError::IndexOutOfRange { index, dim });
            }
            t.push(key, k);
        }
        Ok(t)
    }

    fn push(&mut self, key: Vec<Word>, k: Q) {
        if k.is_zero() {
            return;
        }
        let e = self.terms.entry(key.clone()).or_insert_with(Q::zero);
        *e += k;
        if e.is_zero() {
            self.terms.remove(&key);
        }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    /// Number of boxed factors.
    pub fn factors(&self) -> usize {
        self.m
    }

    pub fn terms(&self) -> &BTreeMap<Vec<Word>, Q> {
        &self.terms
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    fn check(&self, other: &Self) -> Result<(), CoalgebraError> {
        if self.dim != other.dim {
            return Err(CoalgebraError::DimensionMismatch(self.dim, other.dim));
        }
        if self.m != other.m {
            return Err(CoalgebraError::FactorCount { expected: self.m, got: other.m });
        }
        Ok(())
    }

    pub fn add(&self, other: &Self) -> Result<Self, CoalgebraError> {
        self.check(other)?;
        let mut t = self.clone();
        for (k, v) in &other.terms {
            t.push(k.clone(), v.clone());
        }
        Ok(t)
    }

    pub fn sub(&self, other: &Self) -> Result<Self, CoalgebraError> {
        self.add(&other.scale(&-Q::one()))
    }

    pub fn scale(&self, k: &Q) -> Self {
        let mut t = Self::zero(self.dim, self.m);
        for (key, v) in &self.terms {
            t.push(key.clone(), v * k);
        }
        t
    }

    /// Factorwise concatenation product of `T^(m)(g)`.
    pub fn mul(&self, other: &Self) -> Result<Self, CoalgebraError> {
        self.check(other)?;
        let mut t = Self::zero(self.dim, self.m);
        for (a, x) in &self.terms {
            for (b, y) in &other.terms {
                let key = a.iter().zip(b).map(|(u, v)| u.iter().chain(v).copied().collect()).collect();
                t.push(key, x * y);
            }
        }
        Ok(t)
    }

    /// `t₁ ⊠ … ⊠ t_k` of single-factor elements.
    pub fn boxed(parts: &[TensorElement]) -> Result<Self, CoalgebraError> {
        let dim = parts.first().map_or(0, |p| p.dim);
        let mut acc = TensorElement::unit(dim, 0);
        for p in parts {
            if p.dim != dim {
                return Err(CoalgebraError::DimensionMismatch(dim, p.dim));
            }
            let mut t = Self::zero(dim, acc.m + p.m);
            for (a, x) in &acc.terms {
                for (b, y) in &p.terms {
                    let key = a.iter().chain(b).cloned().collect();
                    t.push(key, x * y);
                }
            }
            acc = t;
        }
        Ok(acc)
    }

    /// `Δ` applied to boxed factor `f`, producing `m + 1` factors.
    pub fn coproduct_at(&self, f: usize) -> Result<Self, CoalgebraError> {
        self.split_factor(f, 2)
    }

    /// Distribute the letters of factor `f` over `k` new factors in every
    /// order-preserving way; this is the iterated coproduct on that factor.
    fn split_factor(&self, f: usize, k: usize) -> Result<Self, CoalgebraError> {
        if f >= self.m {
            return Err(CoalgebraError::FactorCount { expected: self.m, got: f + 1 });
        }
        let mut t = Self::zero(self.dim, self.m + k - 1);
        for (key, c) in &self.terms {
            let w = &key[f];
            let n = w.len();
            let total = k.pow(n as u32);
            for code in 0..total {
                let mut parts: Vec<Word> = vec![Vec::new(); k];
                let mut rest = code;
                for &letter in w {
                    parts[rest % k].push(letter);
                    rest /= k;
                }
                let mut nk: Vec<Word> = key[..f].to_vec();
                nk.extend(parts);
                nk.extend(key[f + 1..].iter().cloned());
                t.push(nk, c.clone());
            }
        }
        Ok(t)
    }

    /// `Δ`, for a single-factor element.
    pub fn coproduct(&self) -> Result<Self, CoalgebraError> {
        self.expect_single()?;
        self.split_factor(0, 2)
    }

    /// `Δ^(k)`: `k + 1` factors; `Δ^(0)` is the identity.
    pub fn coproduct_m(&self, k: usize) -> Result<Self, CoalgebraError> {
        self.expect_single()?;
        self.split_factor(0, k + 1)
    }

    /// Counit on a single-factor element: the coefficient of the unit.
    pub fn counit(&self) -> Result<Q, CoalgebraError> {
        self.expect_single()?;
        Ok(self.terms.get(&vec![Vec::new()]).cloned().unwrap_or_else(Q::zero))
    }

    /// `ε` applied to factor `f`, dropping it.
    pub fn counit_at(&self, f: usize) -> Result<Self, CoalgebraError> {
        if f >= self.m {
            return Err(CoalgebraError::FactorCount { expected: self.m, got: f + 1 });
        }
        let mut t = Self::zero(self.dim, self.m - 1);
        for (key, c) in &self.terms {
            if key[f].is_empty() {
                let mut nk = key.clone();
                nk.remove(f);
                t.push(nk, c.clone());
            }
        }
        Ok(t)
    }

    fn expect_single(&self) -> Result<(), CoalgebraError> {
        if self.m != 1 {
            return Err(CoalgebraError::FactorCount { expected: 1, got: self.m });
        }
        Ok(())
    }

    /// Derivation extending a letter map `e_β ↦ Σ_γ k_γ e_γ` across every
    /// letter of every factor.
    fn derive(&self, letter: impl Fn(usize) -> Vec<(usize, Q)>) -> Self {
        let images: Vec<Vec<(usize, Q)>> = (0..self.dim).map(&letter).collect();
        let mut t = Self::zero(self.dim, self.m);
        for (key, c) in &self.terms {
            for f in 0..key.len() {
                for p in 0..key[f].len() {
                    for (g, k) in &images[key[f][p]] {
                        let mut nk = key.clone();
                        nk[f][p] = *g;
                        t.push(nk, c * k);
                    }
                }
            }
        }
        t
    }

    /// `ad_{e_α}`, extended as a derivation over words and boxed factors.
    pub fn ad(&self, sc: &StructureConstants, alpha: usize) -> Result<Self, CoalgebraError> {
        self.check_sc(sc, alpha)?;
        let r = self.dim;
        Ok(self.derive(|b| (0..r).map(|g| (g, sc.get(alpha, b, g).clone())).filter(|(_, k)| !k.is_zero()).collect()))
    }

    /// Contragredient action on the dual basis: `e*_β ↦ −Σ_γ c_{αγ}^β e*_γ`.
    pub fn coad(&self, sc: &StructureConstants, alpha: usize) -> Result<Self, CoalgebraError> {
        self.check_sc(sc, alpha)?;
        let r = self.dim;
        Ok(self.derive(|b| (0..r).map(|g| (g, -sc.get(alpha, g, b).clone())).filter(|(_, k)| !k.is_zero()).collect()))
    }

    fn check_sc(&self, sc: &StructureConstants, alpha: usize) -> Result<(), CoalgebraError> {
        if sc.dim() != self.dim {
            return Err(CoalgebraError::DimensionMismatch(sc.dim(), self.dim));
        }
        if alpha >= self.dim {
            return Err(CoalgebraError::IndexOutOfRange { index: alpha, dim: self.dim });
        }
        Ok(())
    }

    fn homogeneous_length(&self) -> Result<usize, CoalgebraError> {
        self.expect_single()?;
        let mut lens = self.terms.keys().map(|k| k[0].len());
        let first = lens.next().unwrap_or(0);
        if lens.all(|l| l == first) {
            Ok(first)
        } else {
            Err(CoalgebraError::NotHomogeneous)
        }
    }

    fn permute_sum(&self, signed: bool) -> Result<Self, CoalgebraError> {
        let n = self.homogeneous_length()?;
        let perms = permutations_with_sign(n);
        let mut t = Self::zero(self.dim, 1);
        for (key, c) in &self.terms {
            for (perm, sign) in &perms {
                let w: Word = perm.iter().map(|&p| key[0][p]).collect();
                let k = if signed && *sign < 0 { -c.clone() } else { c.clone() };
                t.push(vec![w], k);
            }
        }
        Ok(t)
    }

    /// `Alt`: sum over all permutations, no `1/r!`.
    pub fn symmetrize(&self) -> Result<Self, CoalgebraError> {
        self.permute_sum(false)
    }

    /// Signed sum over all permutations, no `1/r!`.
    pub fn antisymmetrize(&self) -> Result<Self, CoalgebraError> {
        self.permute_sum(true)
    }

    /// Terms whose factor `f` has letters at `p` and `p + 1`, and the same
    /// terms with those two letters swapped.
    fn swap_pair(&self, f: usize, p: usize) -> (Self, Self) {
        let mut kept = Self::zero(self.dim, self.m);
        let mut swapped = Self::zero(self.dim, self.m);
        for (key, c) in &self.terms {
            if key[f].len() > p + 1 {
                kept.push(key.clone(), c.clone());
                let mut nk = key.clone();
                nk[f].swap(p, p + 1);
                swapped.push(nk, c.clone());
            }
        }
        (kept, swapped)
    }

    fn max_len(&self, f: usize) -> usize {
        self.terms.keys().map(|k| k[f].len()).max().unwrap_or(0)
    }

    fn adjacent_swaps(&self, sign: i64) -> bool {
        let s = Q::from_integer(sign.into());
        (0..self.m).all(|f| {
            (0..self.max_len(f).saturating_sub(1)).all(|p| {
                let (kept, swapped) = self.swap_pair(f, p);
                swapped == kept.scale(&s)
            })
        })
    }

    /// Every boxed factor is symmetric under permutations of its letters.
    pub fn is_symmetric(&self) -> bool {
        self.adjacent_swaps(1)
    }

    /// Every boxed factor is antisymmetric under permutations of its letters.
    pub fn is_antisymmetric(&self) -> bool {
        self.adjacent_swaps(-1)
    }

    /// Whether every generator annihilates the element.
    pub fn is_invariant(&self, sc: &StructureConstants, dual: bool) -> Result<bool, CoalgebraError> {
        for a in 0..self.dim {
            let d = if dual { self.coad(sc, a)? } else { self.ad(sc, a)? };
            if !d.is_zero() {
                return Ok(false);
            }
        }
        Ok(true)
    }

    /// Text form with 1-based letters, `v1(x)v3` within a factor and ` [x] `
    /// between factors.
    pub fn render(&self, letter: &str) -> String {
        if self.terms.is_empty() {
            return "0".into();
        }
        let mut out = String::new();
        for (i, (key, c)) in self.terms.iter().enumerate() {
            let body: Vec<String> = key
                .iter()
                .map(|w| {
                    if w.is_empty() {
                        "1".to_string()
                    } else {
                        w.iter().map(|&l| format!("{letter}{}", l + 1)).collect::<Vec<_>>().join("(x)")
                    }
                })
                .collect();
            let body = body.join(" [x] ");
            let neg = c < &Q::zero();
            let mag = if neg { -c.clone() } else { c.clone() };
            let sep = match (i, neg) {
                (0, false) => "",
                (0, true) => "-",
                (_, false) => " + ",
                (_, true) => " - ",
            };
            out.push_str(sep);
            if mag.is_one() {
                out.push_str(&body);
            } else {
                out.push_str(&format!("{mag}*{body}"));
            }
        }
        out
    }
}

impl fmt::Debug for TensorElement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.render("v"))
    }
}

/// Symmetry class declared for a Casimir element.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum CasimirKind {
    Symmetric,
    Antisymmetric,
    General,
}

/// One term of a Casimir in a system file: 1-based word, optional wedge.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct CasimirTerm {
    pub coeff: String,
    pub word: Vec<usize>,
    #[serde(default)]
    pub wedge: bool,
}

/// Ad-invariant element of `T(g)` with verified symmetry class.
#[derive(Clone, Debug, PartialEq)]
pub struct AbstractCasimir {
    element: TensorElement,
    kind: CasimirKind,
}

impl AbstractCasimir {
    pub fn new(sc: &StructureConstants, element: TensorElement, kind: CasimirKind) -> Result<Self, CoalgebraError> {
        element.expect_single()?;
        if !element.is_invariant(sc, false)? {
            return Err(CoalgebraError::NotInvariant);
        }
        let ok = match kind {
            CasimirKind::Symmetric => element.is_symmetric(),
            CasimirKind::Antisymmetric => element.is_antisymmetric(),
            CasimirKind::General => true,
        };
        if !ok {
            return Err(CoalgebraError::WrongSymmetry);
        }
        Ok(AbstractCasimir { element, kind })
    }

    pub fn element(&self) -> &TensorElement {
        &self.element
    }

    pub fn kind(&self) -> CasimirKind {
        self.kind
    }
}

/// Assemble an element from file terms.
pub fn element_from_terms(dim: usize, terms: &[CasimirTerm]) -> Result<TensorElement, CoalgebraError> {
    let mut acc = TensorElement::zero(dim, 1);
    for t in terms {
        let k = parse_q(&t.coeff)?;
        if let Some(&i) = t.word.iter().find(|&&i| i == 0 || i > dim) {
            return Err(CoalgebraError::IndexOutOfRange { index: i, dim });
        }
        let w: Word = t.word.iter().map(|i| i - 1).collect();
        let e = if t.wedge { TensorElement::wedge_word(dim, &w, k)? } else { TensorElement::word(dim, w, k)? };
        acc = acc.add(&e)?;
    }
    Ok(acc)
}

pub(crate) fn parse_q(s: &str) -> Result<Q, CoalgebraError> {
    s.trim().parse::<Q>().map_err(|_| CoalgebraError::BadCoefficient(s.to_string()))
}
