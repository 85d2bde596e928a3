//! Microcubes on `R^m` in coefficient normal form.
//!
//! A degree-`n` microcube is a table of `2^n` vectors `a_S ∈ R^m`, one per
//! subset `S ⊆ {1..n}`; its value at nilpotent arguments is
//! `Σ_S a_S Π_{i∈S} d_i`. Two microsquares that agree everywhere except in
//! the top mixed coefficient admit a strong difference, the tangent vector
//! carrying their gap; relativizing over one axis of a degree-3 cube gives
//! the three partial strong differences, whose alternating combinations sum
//! to zero (the general Jacobi identity, verified here as a residual).
//!
//! [`Microcube`] has real coefficients and is the public data type;
//! [`WeilCube`] carries Weil-algebra coefficients and is what the operator
//! pipeline (star composition, brackets, derivations) computes with.

use std::fmt;

use crate::error::Error;
use crate::weil::{PolyExpr, Tag, TagPool, TagSet, WeilElement, WeilVector};
use crate::Result;

/// A permutation of `{1..n}`, stored as 0-based images: `images[i] = σ(i+1)-1`.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct Permutation {
    images: Vec<usize>,
}

impl Permutation {
    pub fn identity(n: usize) -> Permutation {
        Permutation {
            images: (0..n).collect(),
        }
    }

    /// Build from 0-based images.
    pub fn from_images(images: Vec<usize>) -> Result<Permutation> {
        let n = images.len();
        let mut seen = vec![false; n];
        for &v in &images {
            if v >= n || seen[v] {
                return Err(Error::NotAPermutation(images.clone()));
            }
            seen[v] = true;
        }
        Ok(Permutation { images })
    }

    /// Build from 1-based images `σ(1), σ(2), …`.
    pub fn from_one_based(images: Vec<usize>) -> Result<Permutation> {
        let shifted: Vec<usize> = images
            .iter()
            .map(|&v| {
                v.checked_sub(1)
                    .ok_or_else(|| Error::NotAPermutation(images.clone()))
            })
            .collect::<Result<_>>()?;
        Permutation::from_images(shifted)
    }

    /// The permutation moving a leading block of size `a` past a block of
    /// size `b`: `σ(i) = b+i` for `i ≤ a` and `σ(a+j) = j` for `j ≤ b`.
    /// Its sign is `(-1)^{ab}`.
    pub fn block_swap(a: usize, b: usize) -> Permutation {
        let mut images = Vec::with_capacity(a + b);
        for i in 0..a {
            images.push(b + i);
        }
        for j in 0..b {
            images.push(j);
        }
        Permutation { images }
    }

    pub fn n(&self) -> usize {
        self.images.len()
    }

    /// 0-based application.
    pub fn apply(&self, i: usize) -> usize {
        self.images[i]
    }

    /// Parity of the inversion count.
    pub fn sign(&self) -> f64 {
        let n = self.images.len();
        let mut inversions = 0usize;
        for i in 0..n {
            for j in i + 1..n {
                if self.images[i] > self.images[j] {
                    inversions += 1;
                }
            }
        }
        if inversions % 2 == 0 {
            1.0
        } else {
            -1.0
        }
    }

    pub fn inverse(&self) -> Permutation {
        let mut images = vec![0; self.images.len()];
        for (i, &v) in self.images.iter().enumerate() {
            images[v] = i;
        }
        Permutation { images }
    }

    /// Function composition `self ∘ other`: `(στ)(i) = σ(τ(i))`.
    pub fn compose(&self, other: &Permutation) -> Result<Permutation> {
        if self.n() != other.n() {
            return Err(Error::PermSize {
                expected: self.n(),
                got: other.n(),
            });
        }
        Ok(Permutation {
            images: other.images.iter().map(|&i| self.images[i]).collect(),
        })
    }

    /// Image of a subset bitmask: `σ(S) = {σ(i) : i ∈ S}`.
    pub fn map_mask(&self, mask: usize) -> usize {
        let mut out = 0usize;
        for (i, &v) in self.images.iter().enumerate() {
            if mask & (1 << i) != 0 {
                out |= 1 << v;
            }
        }
        out
    }

    /// All permutations of `{1..n}` in lexicographic order of their image
    /// vectors (deterministic; `n = 0` yields the single empty permutation).
    pub fn all(n: usize) -> Vec<Permutation> {
        let mut out = Vec::new();
        let mut current = Vec::with_capacity(n);
        let mut used = vec![false; n];
        fn rec(n: usize, current: &mut Vec<usize>, used: &mut [bool], out: &mut Vec<Permutation>) {
            if current.len() == n {
                out.push(Permutation {
                    images: current.clone(),
                });
                return;
            }
            for v in 0..n {
                if !used[v] {
                    used[v] = true;
                    current.push(v);
                    rec(n, current, used, out);
                    current.pop();
                    used[v] = false;
                }
            }
        }
        rec(n, &mut current, &mut used, &mut out);
        out
    }
}

fn slot_name(mask: usize, n: usize) -> String {
    if mask == 0 {
        return "a_∅".to_string();
    }
    let mut s = String::from("a_");
    for i in 0..n {
        if mask & (1 << i) != 0 {
            s.push_str(&(i + 1).to_string());
        }
    }
    s
}

/// A microcube of degree `n` on `R^m`: `2^n` coefficient vectors indexed by
/// subset bitmask (bit `i` set ⇔ slot `i+1` in the subset).
#[derive(Clone, PartialEq)]
pub struct Microcube {
    n: usize,
    m: usize,
    coeffs: Vec<Vec<f64>>,
}

impl Microcube {
    pub fn new(n: usize, m: usize, coeffs: Vec<Vec<f64>>) -> Result<Microcube> {
        if coeffs.len() != 1 << n {
            return Err(Error::Arity {
                expected: 1 << n,
                got: coeffs.len(),
            });
        }
        for v in &coeffs {
            if v.len() != m {
                return Err(Error::Dim {
                    expected: m,
                    got: v.len(),
                });
            }
        }
        Ok(Microcube { n, m, coeffs })
    }

    pub fn zero(n: usize, m: usize) -> Microcube {
        Microcube {
            n,
            m,
            coeffs: vec![vec![0.0; m]; 1 << n],
        }
    }

    /// The cube with the given base point and axis directions; all mixed and
    /// higher coefficients zero.
    pub fn from_axes(base: &[f64], dirs: &[Vec<f64>]) -> Result<Microcube> {
        let m = base.len();
        let n = dirs.len();
        let mut cube = Microcube::zero(n, m);
        cube.coeffs[0] = base.to_vec();
        for (i, d) in dirs.iter().enumerate() {
            if d.len() != m {
                return Err(Error::Dim {
                    expected: m,
                    got: d.len(),
                });
            }
            cube.coeffs[1 << i] = d.clone();
        }
        Ok(cube)
    }

    pub fn degree(&self) -> usize {
        self.n
    }

    pub fn dim(&self) -> usize {
        self.m
    }

    pub fn coeff(&self, mask: usize) -> &[f64] {
        &self.coeffs[mask]
    }

    pub fn coeff_mut(&mut self, mask: usize) -> &mut Vec<f64> {
        &mut self.coeffs[mask]
    }

    /// Base point `γ(0,…,0)`.
    pub fn base(&self) -> &[f64] {
        &self.coeffs[0]
    }

    /// Kock–Lawvere evaluation `Σ_S a_S Π_{i∈S} args_i` in the Weil algebra.
    pub fn eval(&self, args: &[WeilElement]) -> Result<WeilVector> {
        if args.len() != self.n {
            return Err(Error::Arity {
                expected: self.n,
                got: args.len(),
            });
        }
        // prod[S] = Π_{i∈S} args_i, built from the lowest set bit.
        let mut prods: Vec<WeilElement> = Vec::with_capacity(1 << self.n);
        prods.push(WeilElement::constant(1.0));
        for mask in 1..1usize << self.n {
            let low = mask.trailing_zeros() as usize;
            let rest = mask & (mask - 1);
            prods.push(prods[rest].mul(&args[low]));
        }
        let mut comps = vec![WeilElement::zero(); self.m];
        for (mask, a) in self.coeffs.iter().enumerate() {
            for (c, &coeff) in a.iter().enumerate() {
                if coeff != 0.0 {
                    comps[c] = comps[c].add(&prods[mask].scale(coeff));
                }
            }
        }
        Ok(WeilVector::new(comps))
    }

    /// Inverse of [`eval`](Self::eval) on tag arguments: reads the table off
    /// a Weil vector that is square-free in `tags` and contains no others.
    pub fn extract(v: &WeilVector, tags: &[Tag]) -> Result<Microcube> {
        let tagset = TagSet::from_tags(tags);
        let foreign = v.support_tags().difference(tagset);
        if !foreign.is_empty() {
            return Err(Error::ForeignTags(foreign));
        }
        let n = tags.len();
        let m = v.dim();
        let mut coeffs = Vec::with_capacity(1 << n);
        for mask in 0..1usize << n {
            let monomial = mask_monomial(tags, mask);
            coeffs.push((0..m).map(|c| v.comp(c).coeff(monomial)).collect());
        }
        Microcube::new(n, m, coeffs)
    }

    /// Coefficient transport along a permutation: the new `a_S` is the old
    /// `a_{σ(S)}`. This is a right action:
    /// `permute(permute(γ,σ),τ) = permute(γ, στ)`.
    pub fn permute(&self, sigma: &Permutation) -> Result<Microcube> {
        if sigma.n() != self.n {
            return Err(Error::PermSize {
                expected: self.n,
                got: sigma.n(),
            });
        }
        let coeffs = (0..1usize << self.n)
            .map(|mask| self.coeffs[sigma.map_mask(mask)].clone())
            .collect();
        Ok(Microcube {
            n: self.n,
            m: self.m,
            coeffs,
        })
    }

    /// The argument-reindexing action
    /// `(d₁,…,dₙ) ↦ γ(d_{σ(1)},…,d_{σ(n)})`, i.e. `permute` along `σ⁻¹`.
    pub fn precompose(&self, sigma: &Permutation) -> Result<Microcube> {
        self.permute(&sigma.inverse())
    }

    /// Scale the `i`-th cube slot (1-based): multiplies `a_S` by `α` for
    /// every `S` containing `i`.
    pub fn scale_axis(&self, alpha: f64, i: usize) -> Result<Microcube> {
        if i == 0 || i > self.n {
            return Err(Error::Index {
                index: i,
                len: self.n,
            });
        }
        let bit = 1usize << (i - 1);
        let coeffs = self
            .coeffs
            .iter()
            .enumerate()
            .map(|(mask, a)| {
                if mask & bit != 0 {
                    a.iter().map(|&x| x * alpha).collect()
                } else {
                    a.clone()
                }
            })
            .collect();
        Ok(Microcube {
            n: self.n,
            m: self.m,
            coeffs,
        })
    }

    /// Strong difference of two microsquares agreeing on `D(2)` (all
    /// coefficients except the mixed one): the tangent at the shared base
    /// with direction `a_12(self) − a_12(other)`.
    pub fn strong_diff(&self, other: &Microcube, tol: f64) -> Result<TangentVector> {
        if self.n != 2 {
            return Err(Error::Degree {
                expected: 2,
                got: self.n,
            });
        }
        if other.n != 2 || other.m != self.m {
            return Err(Error::Degree {
                expected: 2,
                got: other.n,
            });
        }
        for mask in [0usize, 1, 2] {
            let gap = vec_gap(&self.coeffs[mask], &other.coeffs[mask]);
            if gap > tol {
                return Err(Error::D2Disagreement {
                    slot: slot_name(mask, 2),
                    gap,
                });
            }
        }
        Ok(TangentVector {
            base: self.coeffs[0].clone(),
            dir: sub_vec(&self.coeffs[3], &other.coeffs[3]),
        })
    }

    /// Relativized strong difference along `axis ∈ {1,2,3}` of two degree-3
    /// cubes agreeing everywhere except at `a_{jk}` (`{j,k}` the other two
    /// axes) and `a_{123}`. Viewing the cubes as microsquares over `M^{D_axis}`
    /// and taking their strong difference yields the microsquare
    /// `(d_axis, e) ↦ a_∅ + d_axis·a_axis + e·Δa_{jk} + d_axis·e·Δa_{123}`.
    pub fn rel_strong_diff(&self, other: &Microcube, axis: usize, tol: f64) -> Result<Microcube> {
        if self.n != 3 || other.n != 3 {
            return Err(Error::Degree {
                expected: 3,
                got: if self.n != 3 { self.n } else { other.n },
            });
        }
        if axis == 0 || axis > 3 {
            return Err(Error::Index {
                index: axis,
                len: 3,
            });
        }
        if other.m != self.m {
            return Err(Error::Dim {
                expected: self.m,
                got: other.m,
            });
        }
        let jk_mask = 0b111 & !(1 << (axis - 1));
        for mask in 0..8usize {
            if mask == jk_mask || mask == 0b111 {
                continue;
            }
            let gap = vec_gap(&self.coeffs[mask], &other.coeffs[mask]);
            if gap > tol {
                return Err(Error::RelAgreement {
                    slot: slot_name(mask, 3),
                    gap,
                });
            }
        }
        Microcube::new(
            2,
            self.m,
            vec![
                self.coeffs[0].clone(),
                self.coeffs[1 << (axis - 1)].clone(),
                sub_vec(&self.coeffs[jk_mask], &other.coeffs[jk_mask]),
                sub_vec(&self.coeffs[0b111], &other.coeffs[0b111]),
            ],
        )
    }

    pub fn max_abs(&self) -> f64 {
        self.coeffs
            .iter()
            .flatten()
            .fold(0.0f64, |acc, &x| acc.max(x.abs()))
    }

    pub fn max_abs_diff(&self, other: &Microcube) -> f64 {
        debug_assert_eq!(self.n, other.n);
        self.coeffs
            .iter()
            .zip(&other.coeffs)
            .fold(0.0, |acc, (a, b)| acc.max(vec_gap(a, b)))
    }

    pub fn approx_eq(&self, other: &Microcube, tol: f64) -> bool {
        self.n == other.n && self.m == other.m && self.max_abs_diff(other) <= tol
    }
}

impl fmt::Debug for Microcube {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Microcube(n={}, m={}) {{", self.n, self.m)?;
        for (mask, a) in self.coeffs.iter().enumerate() {
            write!(f, " {}={:?}", slot_name(mask, self.n), a)?;
        }
        write!(f, " }}")
    }
}

fn sub_vec(a: &[f64], b: &[f64]) -> Vec<f64> {
    a.iter().zip(b).map(|(x, y)| x - y).collect()
}

fn vec_gap(a: &[f64], b: &[f64]) -> f64 {
    a.iter()
        .zip(b)
        .fold(0.0f64, |acc, (x, y)| acc.max((x - y).abs()))
}

fn mask_monomial(tags: &[Tag], mask: usize) -> TagSet {
    let mut s = TagSet::EMPTY;
    for (i, &t) in tags.iter().enumerate() {
        if mask & (1 << i) != 0 {
            s = s.insert(t);
        }
    }
    s
}

/// A tangent vector on `R^m`: the degree-1 microcube `d ↦ base + d·dir`.
#[derive(Clone, PartialEq, Debug)]
pub struct TangentVector {
    pub base: Vec<f64>,
    pub dir: Vec<f64>,
}

impl TangentVector {
    pub fn new(base: Vec<f64>, dir: Vec<f64>) -> Result<TangentVector> {
        if base.len() != dir.len() {
            return Err(Error::Dim {
                expected: base.len(),
                got: dir.len(),
            });
        }
        Ok(TangentVector { base, dir })
    }

    pub fn zero_at(base: Vec<f64>) -> TangentVector {
        let dir = vec![0.0; base.len()];
        TangentVector { base, dir }
    }

    pub fn dim(&self) -> usize {
        self.base.len()
    }

    pub fn as_cube(&self) -> Microcube {
        Microcube {
            n: 1,
            m: self.base.len(),
            coeffs: vec![self.base.clone(), self.dir.clone()],
        }
    }

    pub fn from_cube(cube: &Microcube) -> Result<TangentVector> {
        if cube.n != 1 {
            return Err(Error::Degree {
                expected: 1,
                got: cube.n,
            });
        }
        Ok(TangentVector {
            base: cube.coeffs[0].clone(),
            dir: cube.coeffs[1].clone(),
        })
    }

    pub fn max_abs_diff(&self, other: &TangentVector) -> f64 {
        vec_gap(&self.base, &other.base).max(vec_gap(&self.dir, &other.dir))
    }
}

/// A microcube with Weil-algebra coefficients. This is the representation the
/// operator pipeline works in: star composition threads one cube through
/// another by moving block slots into coefficient tags, which leaves the
/// remaining coefficients Weil-valued.
#[derive(Clone, PartialEq)]
pub struct WeilCube {
    n: usize,
    m: usize,
    coeffs: Vec<WeilVector>,
}

impl WeilCube {
    pub fn new(n: usize, m: usize, coeffs: Vec<WeilVector>) -> Result<WeilCube> {
        if coeffs.len() != 1 << n {
            return Err(Error::Arity {
                expected: 1 << n,
                got: coeffs.len(),
            });
        }
        for v in &coeffs {
            if v.dim() != m {
                return Err(Error::Dim {
                    expected: m,
                    got: v.dim(),
                });
            }
        }
        Ok(WeilCube { n, m, coeffs })
    }

    pub fn from_real(cube: &Microcube) -> WeilCube {
        WeilCube {
            n: cube.n,
            m: cube.m,
            coeffs: cube
                .coeffs
                .iter()
                .map(|a| WeilVector::from_reals(a))
                .collect(),
        }
    }

    pub fn to_real(&self) -> Result<Microcube> {
        let coeffs = self
            .coeffs
            .iter()
            .map(|v| v.to_reals())
            .collect::<Result<Vec<_>>>()?;
        Microcube::new(self.n, self.m, coeffs)
    }

    pub fn degree(&self) -> usize {
        self.n
    }

    pub fn dim(&self) -> usize {
        self.m
    }

    pub fn coeff(&self, mask: usize) -> &WeilVector {
        &self.coeffs[mask]
    }

    /// Base point `γ(0,…,0)` (possibly Weil-valued).
    pub fn base(&self) -> &WeilVector {
        &self.coeffs[0]
    }

    /// Union of tags occurring in the coefficients.
    pub fn support_tags(&self) -> TagSet {
        self.coeffs
            .iter()
            .fold(TagSet::EMPTY, |s, v| s.union(v.support_tags()))
    }

    /// Evaluate at the given fresh tags: `Σ_S a_S Π_{i∈S} ε_{tags[i]}`.
    pub fn eval_at_tags(&self, tags: &[Tag]) -> Result<WeilVector> {
        if tags.len() != self.n {
            return Err(Error::Arity {
                expected: self.n,
                got: tags.len(),
            });
        }
        let tagset = TagSet::from_tags(tags);
        let ambient = self.support_tags();
        if !ambient.is_disjoint(tagset) {
            let clash = ambient.intersection(tagset).iter().next().unwrap();
            return Err(Error::TagCollision(clash));
        }
        let mut acc = WeilVector::zeros(self.m);
        for (mask, a) in self.coeffs.iter().enumerate() {
            acc = acc.add(&a.mul_monomial(mask_monomial(tags, mask)));
        }
        Ok(acc)
    }

    /// Read a cube table off a Weil vector with respect to `tags`, leaving
    /// all other tags inside the coefficients.
    pub fn extract(v: &WeilVector, tags: &[Tag]) -> WeilCube {
        let n = tags.len();
        let m = v.dim();
        let tagset = TagSet::from_tags(tags);
        let mut coeffs: Vec<Vec<WeilElement>> = vec![vec![WeilElement::zero(); m]; 1 << n];
        for c in 0..m {
            for (monomial, value) in v.comp(c).monomials() {
                let inside = monomial.intersection(tagset);
                let mut mask = 0usize;
                for (i, &t) in tags.iter().enumerate() {
                    if inside.contains(t) {
                        mask |= 1 << i;
                    }
                }
                let remainder = monomial.difference(tagset);
                coeffs[mask][c] =
                    coeffs[mask][c].add(&WeilElement::from_monomials([(remainder, value)]));
            }
        }
        WeilCube {
            n,
            m,
            coeffs: coeffs.into_iter().map(WeilVector::new).collect(),
        }
    }

    /// The front `p`-block of a degree-`p+q` cube with the trailing `q` slots
    /// moved into coefficient tags: slot subset `T` gets
    /// `Σ_{U ⊆ back} a_{T∪U} Π_{u∈U} ε_{e_u}`.
    pub fn front_block(&self, p: usize, e_tags: &[Tag]) -> Result<WeilCube> {
        let q = e_tags.len();
        if p + q != self.n {
            return Err(Error::Degree {
                expected: self.n,
                got: p + q,
            });
        }
        let mut coeffs = Vec::with_capacity(1 << p);
        for t_mask in 0..1usize << p {
            let mut acc = WeilVector::zeros(self.m);
            for u_mask in 0..1usize << q {
                let full = t_mask | (u_mask << p);
                acc = acc.add(&self.coeffs[full].mul_monomial(mask_monomial(e_tags, u_mask)));
            }
            coeffs.push(acc);
        }
        WeilCube::new(p, self.m, coeffs)
    }

    /// Same coefficient transport as [`Microcube::permute`].
    pub fn permute(&self, sigma: &Permutation) -> Result<WeilCube> {
        if sigma.n() != self.n {
            return Err(Error::PermSize {
                expected: self.n,
                got: sigma.n(),
            });
        }
        let coeffs = (0..1usize << self.n)
            .map(|mask| self.coeffs[sigma.map_mask(mask)].clone())
            .collect();
        Ok(WeilCube {
            n: self.n,
            m: self.m,
            coeffs,
        })
    }

    /// Argument reindexing `(d₁..dₙ) ↦ γ(d_{σ(1)}..d_{σ(n)})`.
    pub fn precompose(&self, sigma: &Permutation) -> Result<WeilCube> {
        self.permute(&sigma.inverse())
    }

    pub fn scale_axis(&self, alpha: f64, i: usize) -> Result<WeilCube> {
        if i == 0 || i > self.n {
            return Err(Error::Index {
                index: i,
                len: self.n,
            });
        }
        let bit = 1usize << (i - 1);
        let coeffs = self
            .coeffs
            .iter()
            .enumerate()
            .map(|(mask, a)| {
                if mask & bit != 0 {
                    a.scale(alpha)
                } else {
                    a.clone()
                }
            })
            .collect();
        Ok(WeilCube {
            n: self.n,
            m: self.m,
            coeffs,
        })
    }

    pub fn strong_diff(&self, other: &WeilCube, tol: f64) -> Result<WeilTangent> {
        if self.n != 2 || other.n != 2 {
            return Err(Error::Degree {
                expected: 2,
                got: if self.n != 2 { self.n } else { other.n },
            });
        }
        for mask in [0usize, 1, 2] {
            let gap = self.coeffs[mask].max_abs_diff(&other.coeffs[mask]);
            if gap > tol {
                return Err(Error::D2Disagreement {
                    slot: slot_name(mask, 2),
                    gap,
                });
            }
        }
        Ok(WeilTangent {
            base: self.coeffs[0].clone(),
            dir: self.coeffs[3].sub(&other.coeffs[3]),
        })
    }

    pub fn rel_strong_diff(&self, other: &WeilCube, axis: usize, tol: f64) -> Result<WeilCube> {
        if self.n != 3 || other.n != 3 {
            return Err(Error::Degree {
                expected: 3,
                got: if self.n != 3 { self.n } else { other.n },
            });
        }
        if axis == 0 || axis > 3 {
            return Err(Error::Index {
                index: axis,
                len: 3,
            });
        }
        let jk_mask = 0b111 & !(1 << (axis - 1));
        for mask in 0..8usize {
            if mask == jk_mask || mask == 0b111 {
                continue;
            }
            let gap = self.coeffs[mask].max_abs_diff(&other.coeffs[mask]);
            if gap > tol {
                return Err(Error::RelAgreement {
                    slot: slot_name(mask, 3),
                    gap,
                });
            }
        }
        WeilCube::new(
            2,
            self.m,
            vec![
                self.coeffs[0].clone(),
                self.coeffs[1 << (axis - 1)].clone(),
                self.coeffs[jk_mask].sub(&other.coeffs[jk_mask]),
                self.coeffs[0b111].sub(&other.coeffs[0b111]),
            ],
        )
    }

    pub fn max_abs_diff(&self, other: &WeilCube) -> f64 {
        debug_assert_eq!(self.n, other.n);
        self.coeffs
            .iter()
            .zip(&other.coeffs)
            .fold(0.0, |acc, (a, b)| acc.max(a.max_abs_diff(b)))
    }
}

impl fmt::Debug for WeilCube {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "WeilCube(n={}, m={}) {{", self.n, self.m)?;
        for (mask, a) in self.coeffs.iter().enumerate() {
            write!(f, " {}={:?}", slot_name(mask, self.n), a)?;
        }
        write!(f, " }}")
    }
}

/// A tangent vector with Weil-valued base and direction.
#[derive(Clone, PartialEq, Debug)]
pub struct WeilTangent {
    pub base: WeilVector,
    pub dir: WeilVector,
}

impl WeilTangent {
    /// Encode as the value `base + ε_d · dir`.
    pub fn to_vector(&self, d: Tag) -> WeilVector {
        self.base.add(&self.dir.mul_monomial(TagSet::singleton(d)))
    }

    /// Split a value `base + ε_d·dir` back into parts.
    pub fn from_vector(v: &WeilVector, d: Tag) -> WeilTangent {
        WeilTangent {
            base: v.set_zero(d),
            dir: v.tag_cofactor(d),
        }
    }
}

/// A polynomial map `R^m → R^{m'}`, one [`PolyExpr`] per target coordinate.
#[derive(Clone, PartialEq, Debug)]
pub struct PolyMap {
    source_dim: usize,
    target_dim: usize,
    comps: Vec<PolyExpr>,
}

impl PolyMap {
    pub fn new(source_dim: usize, comps: Vec<PolyExpr>) -> Result<PolyMap> {
        for c in &comps {
            if c.vars() != source_dim {
                return Err(Error::Arity {
                    expected: source_dim,
                    got: c.vars(),
                });
            }
        }
        Ok(PolyMap {
            source_dim,
            target_dim: comps.len(),
            comps,
        })
    }

    pub fn identity(m: usize) -> PolyMap {
        let comps = (0..m).map(|i| PolyExpr::var(m, i).unwrap()).collect();
        PolyMap {
            source_dim: m,
            target_dim: m,
            comps,
        }
    }

    pub fn source_dim(&self) -> usize {
        self.source_dim
    }

    pub fn target_dim(&self) -> usize {
        self.target_dim
    }

    pub fn component(&self, j: usize) -> &PolyExpr {
        &self.comps[j]
    }

    pub fn apply_f64(&self, x: &[f64]) -> Result<Vec<f64>> {
        self.comps.iter().map(|c| c.eval_f64(x)).collect()
    }

    pub fn apply_weil(&self, x: &WeilVector) -> Result<WeilVector> {
        if x.dim() != self.source_dim {
            return Err(Error::Dim {
                expected: self.source_dim,
                got: x.dim(),
            });
        }
        let comps = self
            .comps
            .iter()
            .map(|c| c.eval_weil(x.comps()))
            .collect::<Result<Vec<_>>>()?;
        Ok(WeilVector::new(comps))
    }

    /// Pushforward `f∘γ` of a real cube: evaluate on fresh tags, apply the
    /// map in the Weil algebra, extract. Degree is preserved.
    pub fn push_cube(&self, cube: &Microcube) -> Result<Microcube> {
        if cube.dim() != self.source_dim {
            return Err(Error::Dim {
                expected: self.source_dim,
                got: cube.dim(),
            });
        }
        let wc = WeilCube::from_real(cube);
        let mut pool = TagPool::new();
        let tags = pool.alloc_many(cube.degree())?;
        let v = wc.eval_at_tags(&tags)?;
        let w = self.apply_weil(&v)?;
        Microcube::extract(&w, &tags)
    }

    /// Pushforward of a Weil-coefficient cube; fresh tags come from `pool`.
    pub fn push_weil_cube(&self, cube: &WeilCube, pool: &mut TagPool) -> Result<WeilCube> {
        if cube.dim() != self.source_dim {
            return Err(Error::Dim {
                expected: self.source_dim,
                got: cube.dim(),
            });
        }
        let tags = pool.alloc_many(cube.degree())?;
        let v = cube.eval_at_tags(&tags)?;
        let w = self.apply_weil(&v)?;
        let out = WeilCube::extract(&w, &tags);
        pool.release_all(&tags);
        Ok(out)
    }

    pub fn push_tangent(&self, t: &TangentVector) -> Result<TangentVector> {
        TangentVector::from_cube(&self.push_cube(&t.as_cube())?)
    }

    /// Composition `self ∘ inner` by polynomial substitution.
    pub fn compose(&self, inner: &PolyMap) -> Result<PolyMap> {
        if inner.target_dim != self.source_dim {
            return Err(Error::Dim {
                expected: self.source_dim,
                got: inner.target_dim,
            });
        }
        let comps = self
            .comps
            .iter()
            .map(|c| c.subst(&inner.comps))
            .collect::<Result<Vec<_>>>()?;
        PolyMap::new(inner.source_dim, comps)
    }

    /// Jacobian entries `∂f_j/∂x_i` as polynomials, row-major `[j][i]`.
    pub fn jacobian(&self) -> Vec<Vec<PolyExpr>> {
        self.comps
            .iter()
            .map(|c| (0..self.source_dim).map(|i| c.partial(i)).collect())
            .collect()
    }

    /// True if square with `f_i = x_i + (terms in x_1..x_{i-1})`.
    pub fn is_unitriangular(&self) -> bool {
        if self.source_dim != self.target_dim {
            return false;
        }
        let jac = self.jacobian();
        for j in 0..self.target_dim {
            for i in 0..self.source_dim {
                if i == j {
                    if jac[j][i] != PolyExpr::constant(self.source_dim, 1.0) {
                        return false;
                    }
                } else if i >= j && !jac[j][i].is_zero() {
                    return false;
                }
            }
        }
        true
    }

    /// Symbolic inverse of a unitriangular map.
    pub fn unitriangular_inverse(&self) -> Result<PolyMap> {
        if !self.is_unitriangular() {
            return Err(Error::NotTriangular);
        }
        let m = self.source_dim;
        // g_i(y) = y_i − P_i(g_1(y),…,g_{i−1}(y)) where f_i = x_i + P_i.
        let mut inv: Vec<PolyExpr> = Vec::with_capacity(m);
        for i in 0..m {
            let p_i = self.comps[i].sub(&PolyExpr::var(m, i)?);
            // substitute the already-computed inverse components; variables
            // ≥ i do not occur in P_i.
            let mut args = inv.clone();
            for j in i..m {
                args.push(PolyExpr::var(m, j)?);
            }
            let g_i = PolyExpr::var(m, i)?.sub(&p_i.subst(&args)?);
            inv.push(g_i);
        }
        PolyMap::new(m, inv)
    }

    /// Check that `inv ∘ self = id` at the given sample points.
    pub fn verify_inverse(&self, inv: &PolyMap, points: &[Vec<f64>], tol: f64) -> Result<()> {
        let mut gap = 0.0f64;
        for x in points {
            let y = self.apply_f64(x)?;
            let back = inv.apply_f64(&y)?;
            gap = gap.max(vec_gap(&back, x));
        }
        if gap > tol {
            return Err(Error::InverseValidation { gap });
        }
        Ok(())
    }
}

/// The three alternating combinations of relativized strong differences of a
/// sextuple of degree-3 cubes `(γ_123, γ_132, γ_213, γ_231, γ_312, γ_321)`:
///
/// ```text
/// E1 = (γ_123 −̇₁ γ_132) −̇ (γ_231 −̇₁ γ_321)
/// E2 = (γ_231 −̇₂ γ_213) −̇ (γ_312 −̇₂ γ_132)
/// E3 = (γ_312 −̇₃ γ_321) −̇ (γ_123 −̇₃ γ_213)
/// ```
///
/// The general Jacobi identity asserts that their directions sum to zero
/// whenever all three are defined.
pub fn jacobi_expressions(six: &[Microcube; 6], tol: f64) -> Result<[TangentVector; 3]> {
    let [g123, g132, g213, g231, g312, g321] = six;
    let wrap = |expr: &'static str| {
        move |e: Error| Error::JacobiAdmissibility {
            expr,
            source: Box::new(e),
        }
    };

    let d1a = g123
        .rel_strong_diff(g132, 1, tol)
        .map_err(wrap("E1 first (γ123 −̇₁ γ132)"))?;
    let d1b = g231
        .rel_strong_diff(g321, 1, tol)
        .map_err(wrap("E1 second (γ231 −̇₁ γ321)"))?;
    let e1 = d1a
        .strong_diff(&d1b, tol)
        .map_err(wrap("E1 outer difference"))?;

    let d2a = g231
        .rel_strong_diff(g213, 2, tol)
        .map_err(wrap("E2 first (γ231 −̇₂ γ213)"))?;
    let d2b = g312
        .rel_strong_diff(g132, 2, tol)
        .map_err(wrap("E2 second (γ312 −̇₂ γ132)"))?;
    let e2 = d2a
        .strong_diff(&d2b, tol)
        .map_err(wrap("E2 outer difference"))?;

    let d3a = g312
        .rel_strong_diff(g321, 3, tol)
        .map_err(wrap("E3 first (γ312 −̇₃ γ321)"))?;
    let d3b = g123
        .rel_strong_diff(g213, 3, tol)
        .map_err(wrap("E3 second (γ123 −̇₃ γ213)"))?;
    let e3 = d3a
        .strong_diff(&d3b, tol)
        .map_err(wrap("E3 outer difference"))?;

    Ok([e1, e2, e3])
}

/// Sum of the three expression directions of [`jacobi_expressions`]; zero up
/// to float noise for admissible sextuples.
pub fn jacobi_residual(six: &[Microcube; 6], tol: f64) -> Result<Vec<f64>> {
    let [e1, e2, e3] = jacobi_expressions(six, tol)?;
    Ok(e1
        .dir
        .iter()
        .zip(&e2.dir)
        .zip(&e3.dir)
        .map(|((a, b), c)| a + b + c)
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn t(i: usize) -> Tag {
        Tag::new(i).unwrap()
    }

    fn cube1(n: usize, coeffs: &[f64]) -> Microcube {
        Microcube::new(n, 1, coeffs.iter().map(|&x| vec![x]).collect()).unwrap()
    }

    #[test]
    fn eval_reads_off_normal_form() {
        let g = cube1(2, &[0.0, 1.0, 2.0, 5.0]);
        let v = g
            .eval(&[WeilElement::tag(t(1)), WeilElement::tag(t(2))])
            .unwrap();
        assert_eq!(v.comp(0).coeff(TagSet::EMPTY), 0.0);
        assert_eq!(v.comp(0).coeff(TagSet::singleton(t(1))), 1.0);
        assert_eq!(v.comp(0).coeff(TagSet::singleton(t(2))), 2.0);
        assert_eq!(v.comp(0).coeff(TagSet::from_tags(&[t(1), t(2)])), 5.0);

        // All-zero arguments give the base point.
        let v0 = g.eval(&[WeilElement::zero(), WeilElement::zero()]).unwrap();
        assert_eq!(v0.to_reals().unwrap(), vec![0.0]);

        // Scaled argument: (3ε1, ε2) → 3ε1 + 2ε2 + 15ε1ε2.
        let v3 = g
            .eval(&[WeilElement::tag(t(1)).scale(3.0), WeilElement::tag(t(2))])
            .unwrap();
        assert_eq!(v3.comp(0).coeff(TagSet::singleton(t(1))), 3.0);
        assert_eq!(v3.comp(0).coeff(TagSet::singleton(t(2))), 2.0);
        assert_eq!(v3.comp(0).coeff(TagSet::from_tags(&[t(1), t(2)])), 15.0);
    }

    #[test]
    fn extract_inverts_eval() {
        let v = WeilVector::new(vec![WeilElement::from_monomials([
            (TagSet::EMPTY, 1.0),
            (TagSet::from_tags(&[t(1), t(2)]), 2.0),
        ])]);
        let g = Microcube::extract(&v, &[t(1), t(2)]).unwrap();
        assert_eq!(g.coeff(0), &[1.0]);
        assert_eq!(g.coeff(1), &[0.0]);
        assert_eq!(g.coeff(2), &[0.0]);
        assert_eq!(g.coeff(3), &[2.0]);

        let g2 = cube1(2, &[0.0, 1.0, 2.0, 5.0]);
        let tags = [t(4), t(7)];
        let round = Microcube::extract(
            &g2.eval(&[WeilElement::tag(tags[0]), WeilElement::tag(tags[1])])
                .unwrap(),
            &tags,
        )
        .unwrap();
        assert!(round.approx_eq(&g2, 0.0));

        // A foreign tag is contamination.
        let bad = WeilVector::new(vec![WeilElement::tag(t(9))]);
        assert!(matches!(
            Microcube::extract(&bad, &[t(1), t(2)]),
            Err(Error::ForeignTags(_))
        ));
    }

    #[test]
    fn permute_transports_coefficients() {
        let g = cube1(2, &[0.0, 1.0, 2.0, 5.0]);
        let swap = Permutation::from_one_based(vec![2, 1]).unwrap();
        let gs = g.permute(&swap).unwrap();
        assert_eq!(gs.coeff(0), &[0.0]);
        assert_eq!(gs.coeff(1), &[2.0]);
        assert_eq!(gs.coeff(2), &[1.0]);
        assert_eq!(gs.coeff(3), &[5.0]);

        let id = Permutation::identity(2);
        assert!(g.permute(&id).unwrap().approx_eq(&g, 0.0));
    }

    #[test]
    fn permute_is_a_right_action() {
        // n=3 cycle σ = (2 3 1) applied twice equals the σ² transport.
        let coeffs: Vec<Vec<f64>> = (0..8).map(|i| vec![i as f64]).collect();
        let g = Microcube::new(3, 1, coeffs).unwrap();
        let sigma = Permutation::from_one_based(vec![2, 3, 1]).unwrap();
        let twice = g.permute(&sigma).unwrap().permute(&sigma).unwrap();
        let sq = sigma.compose(&sigma).unwrap();
        assert!(twice.approx_eq(&g.permute(&sq).unwrap(), 0.0));
    }

    #[test]
    fn precompose_matches_argument_reindexing() {
        // γ^σ(d1,d2,d3) = γ(d_{σ(1)}, d_{σ(2)}, d_{σ(3)}) via Weil evaluation.
        let coeffs: Vec<Vec<f64>> = (0..8).map(|i| vec![(i * i) as f64 + 1.0]).collect();
        let g = Microcube::new(3, 1, coeffs).unwrap();
        let sigma = Permutation::from_one_based(vec![3, 1, 2]).unwrap();
        let tags = [t(1), t(2), t(3)];
        let args: Vec<WeilElement> = tags.iter().map(|&x| WeilElement::tag(x)).collect();
        let reindexed: Vec<WeilElement> = (0..3).map(|i| args[sigma.apply(i)].clone()).collect();
        let direct = g.eval(&reindexed).unwrap();
        let via_cube = g.precompose(&sigma).unwrap().eval(&args).unwrap();
        assert!(direct.approx_eq(&via_cube, 1e-14));
    }

    #[test]
    fn scale_axis_multiplies_containing_subsets() {
        let g = cube1(2, &[0.0, 1.0, 2.0, 5.0]);
        let s = g.scale_axis(3.0, 1).unwrap();
        assert_eq!(s.coeff(0), &[0.0]);
        assert_eq!(s.coeff(1), &[3.0]);
        assert_eq!(s.coeff(2), &[2.0]);
        assert_eq!(s.coeff(3), &[15.0]);

        assert!(g.scale_axis(1.0, 2).unwrap().approx_eq(&g, 0.0));

        // scale ∘ scale = scale by the product
        let a = g.scale_axis(2.0, 2).unwrap().scale_axis(-0.5, 2).unwrap();
        let b = g.scale_axis(-1.0, 2).unwrap();
        assert!(a.approx_eq(&b, 1e-15));

        assert!(g.scale_axis(1.0, 3).is_err());
    }

    #[test]
    fn strong_diff_subtracts_mixed_coefficient() {
        let g1 = cube1(2, &[0.0, 1.0, 2.0, 5.0]);
        let g2 = cube1(2, &[0.0, 1.0, 2.0, 3.0]);
        let d = g1.strong_diff(&g2, 1e-9).unwrap();
        assert_eq!(d.base, vec![0.0]);
        assert_eq!(d.dir, vec![2.0]);

        let z = g1.strong_diff(&g1, 1e-9).unwrap();
        assert_eq!(z.dir, vec![0.0]);
        assert_eq!(z.base, vec![0.0]);

        let g3 = cube1(2, &[0.0, 1.5, 2.0, 3.0]);
        match g1.strong_diff(&g3, 1e-9) {
            Err(Error::D2Disagreement { slot, gap }) => {
                assert_eq!(slot, "a_1");
                assert!((gap - 0.5).abs() < 1e-12);
            }
            other => panic!("expected D(2) disagreement, got {other:?}"),
        }
    }

    #[test]
    fn strong_diff_is_additive_in_the_mixed_slot() {
        let g1 = cube1(2, &[0.5, 1.0, 2.0, 5.0]);
        let g2 = cube1(2, &[0.5, 1.0, 2.0, 3.0]);
        let g3 = cube1(2, &[0.5, 1.0, 2.0, -4.0]);
        let d12 = g1.strong_diff(&g2, 1e-9).unwrap();
        let d23 = g2.strong_diff(&g3, 1e-9).unwrap();
        let d13 = g1.strong_diff(&g3, 1e-9).unwrap();
        for c in 0..1 {
            assert!((d12.dir[c] + d23.dir[c] - d13.dir[c]).abs() <= 1e-12);
        }
    }

    #[test]
    fn rel_strong_diff_slot_layout() {
        // axis 1: e-slot = Δa_23, mixed = Δa_123, others copied.
        let mut g1 = Microcube::zero(3, 1);
        *g1.coeff_mut(0) = vec![0.25];
        *g1.coeff_mut(1) = vec![1.0]; // a_1
        *g1.coeff_mut(0b110) = vec![4.0]; // a_23
        *g1.coeff_mut(0b111) = vec![7.0]; // a_123
        let mut g2 = g1.clone();
        *g2.coeff_mut(0b111) = vec![2.0];
        let sq = g1.rel_strong_diff(&g2, 1, 1e-9).unwrap();
        assert_eq!(sq.coeff(0), &[0.25]);
        assert_eq!(sq.coeff(1), &[1.0]);
        assert_eq!(sq.coeff(2), &[0.0]);
        assert_eq!(sq.coeff(3), &[5.0]);

        // γ1 = γ2: degenerate microsquare through the base.
        let d = g1.rel_strong_diff(&g1, 1, 1e-9).unwrap();
        assert_eq!(d.coeff(2), &[0.0]);
        assert_eq!(d.coeff(3), &[0.0]);
    }

    #[test]
    fn rel_strong_diff_axis2_matches_paired_evaluation() {
        // Re-derive the slot layout for axis 2 by evaluating over tags
        // (d2, e) with d1, d3 paired into the square monomial e.
        let mut g1 = Microcube::zero(3, 1);
        *g1.coeff_mut(0) = vec![0.5];
        *g1.coeff_mut(0b010) = vec![2.0]; // a_2
        *g1.coeff_mut(0b101) = vec![3.0]; // a_13
        *g1.coeff_mut(0b111) = vec![6.0]; // a_123
        let mut g2 = g1.clone();
        *g2.coeff_mut(0b101) = vec![1.0];
        *g2.coeff_mut(0b111) = vec![2.5];

        let sq = g1.rel_strong_diff(&g2, 2, 1e-9).unwrap();
        assert_eq!(sq.coeff(0), &[0.5]); // base
        assert_eq!(sq.coeff(1), &[2.0]); // d2-slot = a_2
        assert_eq!(sq.coeff(2), &[2.0]); // e-slot  = Δa_13 = 3 − 1
        assert_eq!(sq.coeff(3), &[3.5]); // mixed   = Δa_123 = 6 − 2.5

        // Independent route: treat the cubes as squares over M^{D_2} by
        // evaluating both at (d1, d2, d3) and comparing the d1d3-cofactors,
        // which must be exactly (Δa_13) + d2·(Δa_123).
        let (d1, d2, d3) = (t(1), t(2), t(3));
        let v1 = g1
            .eval(&[
                WeilElement::tag(d1),
                WeilElement::tag(d2),
                WeilElement::tag(d3),
            ])
            .unwrap();
        let v2 = g2
            .eval(&[
                WeilElement::tag(d1),
                WeilElement::tag(d2),
                WeilElement::tag(d3),
            ])
            .unwrap();
        let gap = v1.comp(0).sub(v2.comp(0));
        let pair_cof = gap.tag_cofactor(d1).tag_cofactor(d3);
        assert_eq!(pair_cof.coeff(TagSet::EMPTY), 2.0);
        assert_eq!(pair_cof.coeff(TagSet::singleton(d2)), 3.5);
    }

    #[test]
    fn jacobi_residual_vanishes_for_top_coefficient_spread() {
        // Identical except a_123 ∈ {1..6}: directions (1, −2, 1), residual 0.
        let mut base = Microcube::zero(3, 1);
        *base.coeff_mut(0) = vec![0.1];
        *base.coeff_mut(1) = vec![0.2];
        *base.coeff_mut(2) = vec![0.3];
        *base.coeff_mut(4) = vec![0.4];
        let mut six = Vec::new();
        for a123 in 1..=6 {
            let mut g = base.clone();
            *g.coeff_mut(0b111) = vec![a123 as f64];
            six.push(g);
        }
        let six: [Microcube; 6] = six.try_into().unwrap();
        let [e1, e2, e3] = jacobi_expressions(&six, 1e-9).unwrap();
        assert_eq!(e1.dir, vec![1.0]);
        assert_eq!(e2.dir, vec![-2.0]);
        assert_eq!(e3.dir, vec![1.0]);
        let r = jacobi_residual(&six, 1e-9).unwrap();
        assert_eq!(r, vec![0.0]);

        // All six identical: every expression is the zero tangent.
        let same: [Microcube; 6] = std::array::from_fn(|_| base.clone());
        let [f1, f2, f3] = jacobi_expressions(&same, 1e-9).unwrap();
        assert_eq!(f1.dir, vec![0.0]);
        assert_eq!(f2.dir, vec![0.0]);
        assert_eq!(f3.dir, vec![0.0]);
    }

    #[test]
    fn jacobi_expressions_vanish_for_commuting_translation_flows() {
        // Cubes built from three constant coordinate flows on R³: all mixed
        // coefficients vanish, so each expression is individually zero.
        let m = 3;
        let x = vec![0.7, -0.3, 0.2];
        let mk = |_: usize| {
            let mut g = Microcube::zero(3, m);
            *g.coeff_mut(0) = x.clone();
            for i in 0..3 {
                let mut e = vec![0.0; m];
                e[i] = 1.0;
                *g.coeff_mut(1 << i) = e;
            }
            g
        };
        let six: [Microcube; 6] = std::array::from_fn(mk);
        let [e1, e2, e3] = jacobi_expressions(&six, 1e-9).unwrap();
        for e in [e1, e2, e3] {
            assert!(e.dir.iter().all(|&v| v == 0.0));
        }
    }

    #[test]
    fn strong_differences_reject_other_degrees() {
        let point = Microcube::zero(0, 1);
        let square = Microcube::zero(2, 1);
        let cube = Microcube::zero(3, 1);
        assert!(matches!(
            point.strong_diff(&point, 1e-9),
            Err(Error::Degree { .. })
        ));
        assert!(matches!(
            cube.strong_diff(&cube, 1e-9),
            Err(Error::Degree { .. })
        ));
        assert!(matches!(
            square.rel_strong_diff(&square, 1, 1e-9),
            Err(Error::Degree { .. })
        ));
        assert!(matches!(
            cube.rel_strong_diff(&cube, 4, 1e-9),
            Err(Error::Index { .. })
        ));
    }

    #[test]
    fn jacobi_admissibility_violations_name_the_expression() {
        let mut six: [Microcube; 6] = std::array::from_fn(|_| Microcube::zero(3, 1));
        *six[0].coeff_mut(1) = vec![1.0]; // γ123 deviates in a_1
        match jacobi_expressions(&six, 1e-9) {
            Err(Error::JacobiAdmissibility { expr, .. }) => {
                assert!(expr.starts_with("E1"));
            }
            other => panic!("expected admissibility error, got {other:?}"),
        }
    }

    #[test]
    fn push_cube_applies_chain_rule() {
        // f(x) = x², tangent (2; 3) → (4; 12)
        let f = PolyMap::new(1, vec![PolyExpr::var(1, 0).unwrap().pow(2)]).unwrap();
        let g = cube1(1, &[2.0, 3.0]);
        let fg = f.push_cube(&g).unwrap();
        assert_eq!(fg.coeff(0), &[4.0]);
        assert_eq!(fg.coeff(1), &[12.0]);

        let id = PolyMap::identity(1);
        assert!(id.push_cube(&g).unwrap().approx_eq(&g, 0.0));

        // n=2: (1 + d1 + d2)² = 1 + 2d1 + 2d2 + 2d1d2
        let sq = cube1(2, &[1.0, 1.0, 1.0, 0.0]);
        let fsq = f.push_cube(&sq).unwrap();
        assert_eq!(fsq.coeff(3), &[2.0]);
    }

    #[test]
    fn map_push_commutes_with_strong_difference() {
        let f = PolyMap::new(
            2,
            vec![
                PolyExpr::var(2, 0)
                    .unwrap()
                    .pow(2)
                    .add(&PolyExpr::var(2, 1).unwrap()),
                PolyExpr::var(2, 0)
                    .unwrap()
                    .mul(&PolyExpr::var(2, 1).unwrap()),
            ],
        )
        .unwrap();
        let g1 = Microcube::new(
            2,
            2,
            vec![
                vec![0.5, -0.2],
                vec![1.0, 0.3],
                vec![-0.7, 0.9],
                vec![0.25, -1.5],
            ],
        )
        .unwrap();
        let mut g2 = g1.clone();
        *g2.coeff_mut(3) = vec![2.0, 0.5];

        let lhs = f
            .push_cube(&g1)
            .unwrap()
            .strong_diff(&f.push_cube(&g2).unwrap(), 1e-9)
            .unwrap();
        let rhs = f.push_tangent(&g1.strong_diff(&g2, 1e-9).unwrap()).unwrap();
        assert!(lhs.max_abs_diff(&rhs) <= 1e-12);
    }

    #[test]
    fn unitriangular_inverse_round_trips() {
        // f(x,y) = (x, y + x²) has inverse (x, y − x²).
        let x = PolyExpr::var(2, 0).unwrap();
        let y = PolyExpr::var(2, 1).unwrap();
        let f = PolyMap::new(2, vec![x.clone(), y.add(&x.pow(2))]).unwrap();
        assert!(f.is_unitriangular());
        let g = f.unitriangular_inverse().unwrap();
        let pts = vec![vec![0.3, -1.2], vec![1.5, 0.4], vec![-2.0, 2.0]];
        f.verify_inverse(&g, &pts, 1e-12).unwrap();
        let gf = g.compose(&f).unwrap();
        for p in &pts {
            let q = gf.apply_f64(p).unwrap();
            assert!(vec_gap(&q, p) <= 1e-12);
        }
    }

    #[test]
    fn block_swap_sign_is_minus_one_to_the_ab() {
        for (a, b) in [(1, 2), (2, 2), (0, 3), (2, 3), (1, 1)] {
            let s = Permutation::block_swap(a, b);
            let expect = if (a * b) % 2 == 0 { 1.0 } else { -1.0 };
            assert_eq!(s.sign(), expect, "block_swap({a},{b})");
        }
        // block_swap(b, a) inverts block_swap(a, b).
        let s = Permutation::block_swap(2, 3);
        assert_eq!(s.inverse(), Permutation::block_swap(3, 2));
    }

    #[test]
    fn weil_cube_front_block_threads_tail_slots_into_tags() {
        let g = cube1(2, &[0.0, 1.0, 2.0, 5.0]);
        let wc = WeilCube::from_real(&g);
        let e = t(8);
        let inner = wc.front_block(1, &[e]).unwrap();
        // slot coefficients: b_∅ = a_∅ + ε_e a_2, b_1 = a_1 + ε_e a_12
        assert_eq!(inner.coeff(0).comp(0).coeff(TagSet::EMPTY), 0.0);
        assert_eq!(inner.coeff(0).comp(0).coeff(TagSet::singleton(e)), 2.0);
        assert_eq!(inner.coeff(1).comp(0).coeff(TagSet::EMPTY), 1.0);
        assert_eq!(inner.coeff(1).comp(0).coeff(TagSet::singleton(e)), 5.0);
    }
}
