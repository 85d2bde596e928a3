//! Exact arithmetic in the square-free nilpotent algebra `R[ε₁..ε₆₄]/(εᵢ²)`
//! and polynomial evaluation over it.
//!
//! A [`WeilElement`] is a sparse table mapping square-free monomials (sets of
//! tags) to real coefficients. Multiplication drops every product monomial
//! that would repeat a tag, which is exactly the relation `εᵢ² = 0`; first
//! derivatives, mixed cube coefficients and all higher strong-difference data
//! are read off as monomial coefficients of such elements.

use std::collections::BTreeMap;
use std::fmt;

use crate::error::Error;
use crate::Result;

/// Number of distinct nilpotent tags supported (one bitmask word).
pub const TAG_CAPACITY: usize = 64;

/// Index of a formal nilpotent generator `ε_t` with `ε_t² = 0`.
#[derive(Copy, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Debug)]
pub struct Tag(u8);

impl Tag {
    pub fn new(index: usize) -> Result<Tag> {
        if index >= TAG_CAPACITY {
            return Err(Error::TagCapacity(index));
        }
        Ok(Tag(index as u8))
    }

    pub fn index(self) -> usize {
        self.0 as usize
    }
}

/// A set of tags, i.e. a square-free monomial `Π_{t∈S} ε_t`.
///
/// The empty set is the constant monomial `1`.
#[derive(Copy, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Default)]
pub struct TagSet(u64);

impl TagSet {
    pub const EMPTY: TagSet = TagSet(0);

    pub fn singleton(t: Tag) -> TagSet {
        TagSet(1u64 << t.0)
    }

    pub fn from_tags(tags: &[Tag]) -> TagSet {
        tags.iter().fold(TagSet::EMPTY, |s, &t| s.insert(t))
    }

    pub fn contains(self, t: Tag) -> bool {
        self.0 & (1u64 << t.0) != 0
    }

    #[must_use]
    pub fn insert(self, t: Tag) -> TagSet {
        TagSet(self.0 | (1u64 << t.0))
    }

    #[must_use]
    pub fn remove(self, t: Tag) -> TagSet {
        TagSet(self.0 & !(1u64 << t.0))
    }

    #[must_use]
    pub fn union(self, other: TagSet) -> TagSet {
        TagSet(self.0 | other.0)
    }

    #[must_use]
    pub fn intersection(self, other: TagSet) -> TagSet {
        TagSet(self.0 & other.0)
    }

    #[must_use]
    pub fn difference(self, other: TagSet) -> TagSet {
        TagSet(self.0 & !other.0)
    }

    pub fn is_subset_of(self, other: TagSet) -> bool {
        self.0 & !other.0 == 0
    }

    pub fn is_disjoint(self, other: TagSet) -> bool {
        self.0 & other.0 == 0
    }

    pub fn is_empty(self) -> bool {
        self.0 == 0
    }

    pub fn len(self) -> usize {
        self.0.count_ones() as usize
    }

    pub fn iter(self) -> impl Iterator<Item = Tag> {
        let bits = self.0;
        (0..TAG_CAPACITY as u8)
            .filter(move |i| bits & (1u64 << i) != 0)
            .map(Tag)
    }
}

impl fmt::Debug for TagSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_empty() {
            return write!(f, "1");
        }
        for t in self.iter() {
            write!(f, "ε{}", t.index())?;
        }
        Ok(())
    }
}

/// Fresh-tag allocator. Hands out the lowest free index first, so nested
/// evaluations are lexical and reproducible; released tags become available
/// to sibling evaluations.
#[derive(Clone, Debug)]
pub struct TagPool {
    used: TagSet,
}

impl TagPool {
    /// A pool with every tag free.
    pub fn new() -> TagPool {
        TagPool {
            used: TagSet::EMPTY,
        }
    }

    /// A pool that will never hand out any of `reserved` (e.g. the ambient
    /// tags of the data being evaluated).
    pub fn excluding(reserved: TagSet) -> TagPool {
        TagPool { used: reserved }
    }

    pub fn alloc(&mut self) -> Result<Tag> {
        let free = !self.used.0;
        if free == 0 {
            return Err(Error::TagBudget);
        }
        let idx = free.trailing_zeros() as usize;
        let t = Tag::new(idx)?;
        self.used = self.used.insert(t);
        Ok(t)
    }

    pub fn alloc_many(&mut self, k: usize) -> Result<Vec<Tag>> {
        (0..k).map(|_| self.alloc()).collect()
    }

    pub fn release(&mut self, t: Tag) {
        self.used = self.used.remove(t);
    }

    pub fn release_all(&mut self, tags: &[Tag]) {
        for &t in tags {
            self.release(t);
        }
    }

    pub fn in_use(&self) -> TagSet {
        self.used
    }
}

impl Default for TagPool {
    fn default() -> Self {
        TagPool::new()
    }
}

/// An element of `R[ε₁..ε₆₄]/(εᵢ²)`: a sparse coefficient table over
/// square-free monomials. Absent keys denote coefficient 0; every key is a
/// subset of `active_tags`.
#[derive(Clone, PartialEq)]
pub struct WeilElement {
    active: TagSet,
    coeffs: BTreeMap<TagSet, f64>,
}

impl WeilElement {
    pub fn zero() -> WeilElement {
        WeilElement {
            active: TagSet::EMPTY,
            coeffs: BTreeMap::new(),
        }
    }

    pub fn constant(c: f64) -> WeilElement {
        let mut coeffs = BTreeMap::new();
        if c != 0.0 {
            coeffs.insert(TagSet::EMPTY, c);
        }
        WeilElement {
            active: TagSet::EMPTY,
            coeffs,
        }
    }

    /// The generator `ε_t`.
    pub fn tag(t: Tag) -> WeilElement {
        let mut coeffs = BTreeMap::new();
        coeffs.insert(TagSet::singleton(t), 1.0);
        WeilElement {
            active: TagSet::singleton(t),
            coeffs,
        }
    }

    pub fn from_monomials<I: IntoIterator<Item = (TagSet, f64)>>(monomials: I) -> WeilElement {
        let mut active = TagSet::EMPTY;
        let mut coeffs = BTreeMap::new();
        for (s, c) in monomials {
            active = active.union(s);
            if c != 0.0 {
                *coeffs.entry(s).or_insert(0.0) += c;
            }
        }
        coeffs.retain(|_, c| *c != 0.0);
        WeilElement { active, coeffs }
    }

    pub fn active_tags(&self) -> TagSet {
        self.active
    }

    /// Union of tags actually occurring in nonzero monomials.
    pub fn support_tags(&self) -> TagSet {
        self.coeffs.keys().fold(TagSet::EMPTY, |s, k| s.union(*k))
    }

    /// Coefficient of the monomial `S` (0 if absent). For a single-tag
    /// element `F(0) + d·DF` this reads off `DF` at `S = {d}` and `F(0)` at
    /// `S = ∅`.
    pub fn coeff(&self, s: TagSet) -> f64 {
        self.coeffs.get(&s).copied().unwrap_or(0.0)
    }

    pub fn monomials(&self) -> impl Iterator<Item = (TagSet, f64)> + '_ {
        self.coeffs.iter().map(|(s, c)| (*s, *c))
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    pub fn is_constant(&self) -> bool {
        self.coeffs.keys().all(|s| s.is_empty())
    }

    /// Value as a real number; errors if any nilpotent part remains.
    pub fn to_real(&self) -> Result<f64> {
        let foreign = self.support_tags();
        if !foreign.is_empty() {
            return Err(Error::ForeignTags(foreign));
        }
        Ok(self.coeff(TagSet::EMPTY))
    }

    pub fn add(&self, other: &WeilElement) -> WeilElement {
        let mut coeffs = self.coeffs.clone();
        for (s, c) in &other.coeffs {
            *coeffs.entry(*s).or_insert(0.0) += c;
        }
        coeffs.retain(|_, c| *c != 0.0);
        WeilElement {
            active: self.active.union(other.active),
            coeffs,
        }
    }

    pub fn sub(&self, other: &WeilElement) -> WeilElement {
        self.add(&other.neg())
    }

    pub fn neg(&self) -> WeilElement {
        self.scale(-1.0)
    }

    pub fn scale(&self, a: f64) -> WeilElement {
        if a == 0.0 {
            return WeilElement {
                active: self.active,
                coeffs: BTreeMap::new(),
            };
        }
        let coeffs = self.coeffs.iter().map(|(s, c)| (*s, c * a)).collect();
        WeilElement {
            active: self.active,
            coeffs,
        }
    }

    /// Ring product. Every product monomial containing a repeated tag is
    /// dropped (`εᵢ² = 0`).
    pub fn mul(&self, other: &WeilElement) -> WeilElement {
        let mut coeffs: BTreeMap<TagSet, f64> = BTreeMap::new();
        for (s1, c1) in &self.coeffs {
            for (s2, c2) in &other.coeffs {
                if s1.is_disjoint(*s2) {
                    *coeffs.entry(s1.union(*s2)).or_insert(0.0) += c1 * c2;
                }
            }
        }
        coeffs.retain(|_, c| *c != 0.0);
        WeilElement {
            active: self.active.union(other.active),
            coeffs,
        }
    }

    /// Multiply by the square-free monomial `Π_{t∈s} ε_t`.
    pub fn mul_monomial(&self, s: TagSet) -> WeilElement {
        let mut coeffs = BTreeMap::new();
        for (k, c) in &self.coeffs {
            if k.is_disjoint(s) {
                coeffs.insert(k.union(s), *c);
            }
        }
        WeilElement {
            active: self.active.union(s),
            coeffs,
        }
    }

    /// Substitute 0 for `ε_t`: delete all monomials containing `t`.
    pub fn set_zero(&self, t: Tag) -> WeilElement {
        let coeffs = self
            .coeffs
            .iter()
            .filter(|(s, _)| !s.contains(t))
            .map(|(s, c)| (*s, *c))
            .collect();
        WeilElement {
            active: self.active.remove(t),
            coeffs,
        }
    }

    /// The cofactor of `ε_t`: for `x = a + ε_t·b` with `a, b` free of `t`,
    /// returns `b`.
    pub fn tag_cofactor(&self, t: Tag) -> WeilElement {
        let coeffs = self
            .coeffs
            .iter()
            .filter(|(s, _)| s.contains(t))
            .map(|(s, c)| (s.remove(t), *c))
            .collect();
        WeilElement {
            active: self.active.remove(t),
            coeffs,
        }
    }

    pub fn max_abs(&self) -> f64 {
        self.coeffs.values().fold(0.0, |m, c| m.max(c.abs()))
    }

    pub fn max_abs_diff(&self, other: &WeilElement) -> f64 {
        let mut gap = 0.0f64;
        for (s, c) in &self.coeffs {
            gap = gap.max((c - other.coeff(*s)).abs());
        }
        for (s, c) in &other.coeffs {
            if !self.coeffs.contains_key(s) {
                gap = gap.max(c.abs());
            }
        }
        gap
    }

    pub fn approx_eq(&self, other: &WeilElement, tol: f64) -> bool {
        self.max_abs_diff(other) <= tol
    }
}

impl fmt::Debug for WeilElement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.coeffs.is_empty() {
            return write!(f, "0");
        }
        let mut first = true;
        for (s, c) in &self.coeffs {
            if !first {
                write!(f, " + ")?;
            }
            first = false;
            if s.is_empty() {
                write!(f, "{c}")?;
            } else {
                write!(f, "{c}·{s:?}")?;
            }
        }
        Ok(())
    }
}

/// An element of `R^m` with Weil-algebra entries; all components share one
/// tag universe.
#[derive(Clone, PartialEq)]
pub struct WeilVector {
    comps: Vec<WeilElement>,
}

impl WeilVector {
    pub fn new(comps: Vec<WeilElement>) -> WeilVector {
        let active = comps.iter().fold(TagSet::EMPTY, |s, c| s.union(c.active));
        let comps = comps
            .into_iter()
            .map(|mut c| {
                c.active = active;
                c
            })
            .collect();
        WeilVector { comps }
    }

    pub fn zeros(m: usize) -> WeilVector {
        WeilVector {
            comps: vec![WeilElement::zero(); m],
        }
    }

    pub fn from_reals(xs: &[f64]) -> WeilVector {
        WeilVector {
            comps: xs.iter().map(|&x| WeilElement::constant(x)).collect(),
        }
    }

    pub fn dim(&self) -> usize {
        self.comps.len()
    }

    pub fn comp(&self, i: usize) -> &WeilElement {
        &self.comps[i]
    }

    pub fn comps(&self) -> &[WeilElement] {
        &self.comps
    }

    pub fn into_comps(self) -> Vec<WeilElement> {
        self.comps
    }

    pub fn support_tags(&self) -> TagSet {
        self.comps
            .iter()
            .fold(TagSet::EMPTY, |s, c| s.union(c.support_tags()))
    }

    pub fn to_reals(&self) -> Result<Vec<f64>> {
        self.comps.iter().map(|c| c.to_real()).collect()
    }

    pub fn add(&self, other: &WeilVector) -> WeilVector {
        debug_assert_eq!(self.dim(), other.dim());
        WeilVector::new(
            self.comps
                .iter()
                .zip(&other.comps)
                .map(|(a, b)| a.add(b))
                .collect(),
        )
    }

    pub fn sub(&self, other: &WeilVector) -> WeilVector {
        debug_assert_eq!(self.dim(), other.dim());
        WeilVector::new(
            self.comps
                .iter()
                .zip(&other.comps)
                .map(|(a, b)| a.sub(b))
                .collect(),
        )
    }

    pub fn scale(&self, a: f64) -> WeilVector {
        WeilVector::new(self.comps.iter().map(|c| c.scale(a)).collect())
    }

    pub fn mul_monomial(&self, s: TagSet) -> WeilVector {
        WeilVector::new(self.comps.iter().map(|c| c.mul_monomial(s)).collect())
    }

    pub fn set_zero(&self, t: Tag) -> WeilVector {
        WeilVector::new(self.comps.iter().map(|c| c.set_zero(t)).collect())
    }

    pub fn tag_cofactor(&self, t: Tag) -> WeilVector {
        WeilVector::new(self.comps.iter().map(|c| c.tag_cofactor(t)).collect())
    }

    pub fn max_abs(&self) -> f64 {
        self.comps.iter().fold(0.0, |m, c| m.max(c.max_abs()))
    }

    pub fn max_abs_diff(&self, other: &WeilVector) -> f64 {
        debug_assert_eq!(self.dim(), other.dim());
        self.comps
            .iter()
            .zip(&other.comps)
            .fold(0.0, |m, (a, b)| m.max(a.max_abs_diff(b)))
    }

    pub fn approx_eq(&self, other: &WeilVector, tol: f64) -> bool {
        self.max_abs_diff(other) <= tol
    }
}

impl fmt::Debug for WeilVector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_list().entries(&self.comps).finish()
    }
}

/// A real polynomial in `vars` variables: a sparse table from exponent
/// vectors to coefficients. This is the concrete "smooth data" of the model:
/// form coefficients, vector-field components, Christoffel symbols and the
/// maps between model spaces are all of this shape.
#[derive(Clone, PartialEq)]
pub struct PolyExpr {
    vars: usize,
    terms: BTreeMap<Vec<u32>, f64>,
}

impl PolyExpr {
    pub fn zero(vars: usize) -> PolyExpr {
        PolyExpr {
            vars,
            terms: BTreeMap::new(),
        }
    }

    pub fn constant(vars: usize, c: f64) -> PolyExpr {
        let mut terms = BTreeMap::new();
        if c != 0.0 {
            terms.insert(vec![0; vars], c);
        }
        PolyExpr { vars, terms }
    }

    /// The coordinate polynomial `x_i` (0-based index).
    pub fn var(vars: usize, i: usize) -> Result<PolyExpr> {
        if i >= vars {
            return Err(Error::Index {
                index: i + 1,
                len: vars,
            });
        }
        let mut e = vec![0u32; vars];
        e[i] = 1;
        let mut terms = BTreeMap::new();
        terms.insert(e, 1.0);
        Ok(PolyExpr { vars, terms })
    }

    pub fn from_terms<I>(vars: usize, terms: I) -> Result<PolyExpr>
    where
        I: IntoIterator<Item = (Vec<u32>, f64)>,
    {
        let mut table: BTreeMap<Vec<u32>, f64> = BTreeMap::new();
        for (e, c) in terms {
            if e.len() != vars {
                return Err(Error::Arity {
                    expected: vars,
                    got: e.len(),
                });
            }
            *table.entry(e).or_insert(0.0) += c;
        }
        table.retain(|_, c| *c != 0.0);
        Ok(PolyExpr { vars, terms: table })
    }

    pub fn vars(&self) -> usize {
        self.vars
    }

    pub fn terms(&self) -> impl Iterator<Item = (&[u32], f64)> + '_ {
        self.terms.iter().map(|(e, c)| (e.as_slice(), *c))
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn total_degree(&self) -> u32 {
        self.terms.keys().map(|e| e.iter().sum()).max().unwrap_or(0)
    }

    pub fn add(&self, other: &PolyExpr) -> PolyExpr {
        debug_assert_eq!(self.vars, other.vars);
        let mut terms = self.terms.clone();
        for (e, c) in &other.terms {
            *terms.entry(e.clone()).or_insert(0.0) += c;
        }
        terms.retain(|_, c| *c != 0.0);
        PolyExpr {
            vars: self.vars,
            terms,
        }
    }

    pub fn sub(&self, other: &PolyExpr) -> PolyExpr {
        self.add(&other.scale(-1.0))
    }

    pub fn scale(&self, a: f64) -> PolyExpr {
        if a == 0.0 {
            return PolyExpr::zero(self.vars);
        }
        let terms = self.terms.iter().map(|(e, c)| (e.clone(), c * a)).collect();
        PolyExpr {
            vars: self.vars,
            terms,
        }
    }

    pub fn mul(&self, other: &PolyExpr) -> PolyExpr {
        debug_assert_eq!(self.vars, other.vars);
        let mut terms: BTreeMap<Vec<u32>, f64> = BTreeMap::new();
        for (e1, c1) in &self.terms {
            for (e2, c2) in &other.terms {
                let e: Vec<u32> = e1.iter().zip(e2).map(|(a, b)| a + b).collect();
                *terms.entry(e).or_insert(0.0) += c1 * c2;
            }
        }
        terms.retain(|_, c| *c != 0.0);
        PolyExpr {
            vars: self.vars,
            terms,
        }
    }

    pub fn pow(&self, k: u32) -> PolyExpr {
        let mut acc = PolyExpr::constant(self.vars, 1.0);
        for _ in 0..k {
            acc = acc.mul(self);
        }
        acc
    }

    /// Formal partial derivative with respect to `x_i` (0-based).
    pub fn partial(&self, i: usize) -> PolyExpr {
        let mut terms: BTreeMap<Vec<u32>, f64> = BTreeMap::new();
        for (e, c) in &self.terms {
            if e[i] == 0 {
                continue;
            }
            let mut d = e.clone();
            d[i] -= 1;
            *terms.entry(d).or_insert(0.0) += c * e[i] as f64;
        }
        terms.retain(|_, c| *c != 0.0);
        PolyExpr {
            vars: self.vars,
            terms,
        }
    }

    pub fn eval_f64(&self, args: &[f64]) -> Result<f64> {
        if args.len() != self.vars {
            return Err(Error::Arity {
                expected: self.vars,
                got: args.len(),
            });
        }
        let mut acc = 0.0;
        for (e, c) in &self.terms {
            let mut term = *c;
            for (i, &k) in e.iter().enumerate() {
                for _ in 0..k {
                    term *= args[i];
                }
            }
            acc += term;
        }
        Ok(acc)
    }

    /// Evaluate on points of the Weil algebra; the result lives in the union
    /// of the argument tag universes.
    pub fn eval_weil(&self, args: &[WeilElement]) -> Result<WeilElement> {
        if args.len() != self.vars {
            return Err(Error::Arity {
                expected: self.vars,
                got: args.len(),
            });
        }
        let mut acc = WeilElement::zero();
        for (e, c) in &self.terms {
            let mut term = WeilElement::constant(*c);
            for (i, &k) in e.iter().enumerate() {
                for _ in 0..k {
                    term = term.mul(&args[i]);
                }
            }
            acc = acc.add(&term);
        }
        Ok(acc)
    }

    /// Substitute polynomials for the variables (polynomial composition).
    pub fn subst(&self, args: &[PolyExpr]) -> Result<PolyExpr> {
        if args.len() != self.vars {
            return Err(Error::Arity {
                expected: self.vars,
                got: args.len(),
            });
        }
        let target_vars = args.first().map_or(0, |p| p.vars);
        let mut acc = PolyExpr::zero(target_vars);
        for (e, c) in &self.terms {
            let mut term = PolyExpr::constant(target_vars, *c);
            for (i, &k) in e.iter().enumerate() {
                if k > 0 {
                    term = term.mul(&args[i].pow(k));
                }
            }
            acc = acc.add(&term);
        }
        Ok(acc)
    }
}

impl fmt::Debug for PolyExpr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return write!(f, "0");
        }
        let mut first = true;
        for (e, c) in &self.terms {
            if !first {
                write!(f, " + ")?;
            }
            first = false;
            write!(f, "{c}")?;
            for (i, &k) in e.iter().enumerate() {
                if k == 1 {
                    write!(f, "·x{}", i + 1)?;
                } else if k > 1 {
                    write!(f, "·x{}^{}", i + 1, k)?;
                }
            }
        }
        Ok(())
    }
}
