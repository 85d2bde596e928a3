//! Tangent-vector-valued differential forms and semiforms on `R^m`.
//!
//! A form of degree `p` is used here in its evaluator guise: a family
//! `K_d`, indexed by a nilpotent tag `d`, of maps from degree-`p` cubes to
//! points, base-preserving, homogeneous in every slot and alternating.
//! Dropping the alternating requirement gives a semiform; the alternation
//! operator turns semiforms back into forms. Concrete generating forms are
//! given by polynomial kernels in wedge-basis (determinant) convention;
//! derived evaluators (brackets, interior and Lie derivations) implement the
//! same [`SemiForm`] interface as composition trees and are never flattened
//! back to kernels.

use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::Error;
use crate::microcube::{Microcube, Permutation, PolyMap, TangentVector, WeilCube};
use crate::weil::{PolyExpr, Tag, TagPool, TagSet, WeilElement, WeilVector};
use crate::{factorial, Result};

/// One wedge-basis term of a kernel: `coeff(x) · dx^{i_1}∧…∧dx^{i_p} ⊗ ∂_j`
/// with a strictly increasing covariant multi-index.
#[derive(Clone, Debug)]
pub struct KernelTerm {
    /// 1-based, strictly increasing covariant indices (empty for degree 0).
    pub covariant: Vec<usize>,
    /// 1-based output coordinate.
    pub output: usize,
    pub coeff: PolyExpr,
}

/// A polynomial alternating kernel for a tangent-vector-valued `p`-form.
#[derive(Clone, Debug)]
pub struct FormKernel {
    dim: usize,
    degree: usize,
    terms: Vec<KernelTerm>,
}

impl FormKernel {
    pub fn new(dim: usize, degree: usize, terms: Vec<KernelTerm>) -> Result<FormKernel> {
        for t in &terms {
            if t.covariant.len() != degree {
                return Err(Error::InvalidSpec(format!(
                    "covariant multi-index {:?} does not have length {degree}",
                    t.covariant
                )));
            }
            if !t.covariant.windows(2).all(|w| w[0] < w[1]) {
                return Err(Error::InvalidSpec(format!(
                    "covariant multi-index {:?} is not strictly increasing",
                    t.covariant
                )));
            }
            if t.covariant.iter().any(|&i| i == 0 || i > dim) {
                return Err(Error::InvalidSpec(format!(
                    "covariant index out of range 1..={dim} in {:?}",
                    t.covariant
                )));
            }
            if t.output == 0 || t.output > dim {
                return Err(Error::InvalidSpec(format!(
                    "output index {} out of range 1..={dim}",
                    t.output
                )));
            }
            if t.coeff.vars() != dim {
                return Err(Error::Arity {
                    expected: dim,
                    got: t.coeff.vars(),
                });
            }
        }
        Ok(FormKernel { dim, degree, terms })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn degree(&self) -> usize {
        self.degree
    }

    pub fn terms(&self) -> &[KernelTerm] {
        &self.terms
    }
}

/// The evaluator interface shared by forms and all derived semiforms: a
/// family of maps `E_d : cubes → points`, evaluated in the ambient Weil
/// algebra. Implementations must preserve the base point (`E_0 = o_n`) and be
/// homogeneous in every slot; kernel-built forms are alternating as well.
pub trait SemiForm: Send + Sync {
    fn dim(&self) -> usize;

    fn degree(&self) -> usize;

    /// Evaluate `E_d(γ)`, returning `base + ε_d · direction`. The cube may
    /// carry Weil-valued coefficients; `d` must not occur in them. Fresh tags
    /// needed by composite evaluators come from `pool`.
    fn eval_weil(&self, d: Tag, cube: &WeilCube, pool: &mut TagPool) -> Result<WeilVector>;
}

/// A kernel-built form. Evaluation reads only the base point and the
/// single-slot coefficients of the argument cube:
/// `K_d(γ) = x + d · Σ_terms coeff(x) · det(a_(r)^{i_s}) · e_j`.
#[derive(Clone, Debug)]
pub struct VectorForm {
    kernel: FormKernel,
}

impl VectorForm {
    pub fn new(kernel: FormKernel) -> VectorForm {
        VectorForm { kernel }
    }

    pub fn kernel(&self) -> &FormKernel {
        &self.kernel
    }

    /// The zero form of the given degree.
    pub fn zero(dim: usize, degree: usize) -> VectorForm {
        VectorForm {
            kernel: FormKernel {
                dim,
                degree,
                terms: Vec::new(),
            },
        }
    }

    /// A vector field (degree 0) from component polynomials.
    pub fn vector_field(comps: Vec<PolyExpr>) -> Result<VectorForm> {
        let dim = comps.len();
        let terms = comps
            .into_iter()
            .enumerate()
            .map(|(j, coeff)| KernelTerm {
                covariant: vec![],
                output: j + 1,
                coeff,
            })
            .collect();
        Ok(VectorForm {
            kernel: FormKernel::new(dim, 0, terms)?,
        })
    }

    /// The identity 1-form `Σ_j dx^j ⊗ ∂_j` (sends a tangent to itself).
    pub fn identity_one_form(dim: usize) -> VectorForm {
        let terms = (1..=dim)
            .map(|j| KernelTerm {
                covariant: vec![j],
                output: j,
                coeff: PolyExpr::constant(dim, 1.0),
            })
            .collect();
        VectorForm {
            kernel: FormKernel {
                dim,
                degree: 1,
                terms,
            },
        }
    }
}

/// Determinant of a small matrix of Weil elements (permutation expansion).
fn weil_det(rows: &[Vec<&WeilElement>]) -> WeilElement {
    let p = rows.len();
    if p == 0 {
        return WeilElement::constant(1.0);
    }
    let mut acc = WeilElement::zero();
    for sigma in Permutation::all(p) {
        let mut prod = WeilElement::constant(sigma.sign());
        for (r, row) in rows.iter().enumerate() {
            prod = prod.mul(row[sigma.apply(r)]);
        }
        acc = acc.add(&prod);
    }
    acc
}

impl SemiForm for VectorForm {
    fn dim(&self) -> usize {
        self.kernel.dim
    }

    fn degree(&self) -> usize {
        self.kernel.degree
    }

    fn eval_weil(&self, d: Tag, cube: &WeilCube, _pool: &mut TagPool) -> Result<WeilVector> {
        let p = self.kernel.degree;
        if cube.degree() != p {
            return Err(Error::Degree {
                expected: p,
                got: cube.degree(),
            });
        }
        if cube.dim() != self.kernel.dim {
            return Err(Error::Dim {
                expected: self.kernel.dim,
                got: cube.dim(),
            });
        }
        if cube.support_tags().contains(d) {
            return Err(Error::TagCollision(d));
        }
        let x = cube.base();
        let dirs: Vec<&WeilVector> = (0..p).map(|r| cube.coeff(1 << r)).collect();
        let mut comps: Vec<WeilElement> = x.comps().to_vec();
        let d_monomial = TagSet::singleton(d);
        for term in &self.kernel.terms {
            let c = term.coeff.eval_weil(x.comps())?;
            let rows: Vec<Vec<&WeilElement>> = (0..p)
                .map(|r| {
                    term.covariant
                        .iter()
                        .map(|&i| dirs[r].comp(i - 1))
                        .collect()
                })
                .collect();
            let det = weil_det(&rows);
            let contrib = c.mul(&det).mul_monomial(d_monomial);
            comps[term.output - 1] = comps[term.output - 1].add(&contrib);
        }
        Ok(WeilVector::new(comps))
    }
}

/// The alternation of a degree-`n` semiform: base kept, direction replaced by
/// `weight · Σ_{σ∈S_n} ε_σ · dir E_d(γ^σ)`. All summands share the base point
/// `o_n(γ)`, so the sum is tangent-space addition at that base.
pub struct Alternated {
    inner: Arc<dyn SemiForm>,
    weight: f64,
}

impl Alternated {
    pub fn new(inner: Arc<dyn SemiForm>, weight: f64) -> Alternated {
        Alternated { inner, weight }
    }

    pub fn weight(&self) -> f64 {
        self.weight
    }
}

/// `alternate(E, w)`: the alternation operator with an explicit normalization
/// weight (`1`, `1/(p!q!)` or `1/(p!q!r!)` in practice).
pub fn alternate(inner: Arc<dyn SemiForm>, weight: f64) -> Alternated {
    Alternated::new(inner, weight)
}

/// Normalization `1/(p!q!)`.
pub fn weight_pq(p: usize, q: usize) -> f64 {
    1.0 / (factorial(p) * factorial(q))
}

/// Normalization `1/(p!q!r!)`.
pub fn weight_pqr(p: usize, q: usize, r: usize) -> f64 {
    1.0 / (factorial(p) * factorial(q) * factorial(r))
}

impl SemiForm for Alternated {
    fn dim(&self) -> usize {
        self.inner.dim()
    }

    fn degree(&self) -> usize {
        self.inner.degree()
    }

    fn eval_weil(&self, d: Tag, cube: &WeilCube, pool: &mut TagPool) -> Result<WeilVector> {
        let n = self.inner.degree();
        if cube.degree() != n {
            return Err(Error::Degree {
                expected: n,
                got: cube.degree(),
            });
        }
        let base = cube.base().clone();
        let mut dir = WeilVector::zeros(cube.dim());
        for sigma in Permutation::all(n) {
            let permuted = cube.precompose(&sigma)?;
            let v = self.inner.eval_weil(d, &permuted, pool)?;
            dir = dir.add(&v.tag_cofactor(d).scale(sigma.sign()));
        }
        Ok(base.add(&dir.scale(self.weight).mul_monomial(TagSet::singleton(d))))
    }
}

/// Evaluate a semiform on a real cube, splitting the result into a tangent.
pub fn eval_on_real(form: &dyn SemiForm, cube: &Microcube) -> Result<TangentVector> {
    if cube.dim() != form.dim() {
        return Err(Error::Dim {
            expected: form.dim(),
            got: cube.dim(),
        });
    }
    let wc = WeilCube::from_real(cube);
    let mut pool = TagPool::new();
    let d = pool.alloc()?;
    let v = form.eval_weil(d, &wc, &mut pool)?;
    let dir = v.tag_cofactor(d).to_reals()?;
    let base = v.set_zero(d).to_reals()?;
    TangentVector::new(base, dir)
}

/// Max slot-homogeneity residual of `E` over the given cubes and scalings:
/// compares the direction of `E_d` at `α·_i γ` against `α` times the
/// direction at `γ`, over every slot `i`.
pub fn check_homogeneity(e: &dyn SemiForm, cubes: &[Microcube], alphas: &[f64]) -> Result<f64> {
    let n = e.degree();
    let mut gap = 0.0f64;
    for cube in cubes {
        let t0 = eval_on_real(e, cube)?;
        for i in 1..=n {
            for &alpha in alphas {
                let scaled = cube.scale_axis(alpha, i)?;
                let t1 = eval_on_real(e, &scaled)?;
                for c in 0..e.dim() {
                    gap = gap.max((t1.dir[c] - alpha * t0.dir[c]).abs());
                }
            }
        }
    }
    Ok(gap)
}

/// Max alternation residual of `E` over the given cubes: compares the
/// direction at `γ^σ` against `ε_σ` times the direction at `γ`, over all
/// permutations of the slots.
pub fn check_alternating(e: &dyn SemiForm, cubes: &[Microcube]) -> Result<f64> {
    let n = e.degree();
    let perms = Permutation::all(n);
    let mut gap = 0.0f64;
    for cube in cubes {
        let t0 = eval_on_real(e, cube)?;
        for sigma in &perms {
            let t1 = eval_on_real(e, &cube.precompose(sigma)?)?;
            let s = sigma.sign();
            for c in 0..e.dim() {
                gap = gap.max((t1.dir[c] - s * t0.dir[c]).abs());
            }
        }
    }
    Ok(gap)
}

/// Max base-preservation residual: `E_0(γ)` must be the base point of `γ`.
pub fn check_base_preservation(e: &dyn SemiForm, cubes: &[Microcube]) -> Result<f64> {
    let mut gap = 0.0f64;
    for cube in cubes {
        let t = eval_on_real(e, cube)?;
        for c in 0..e.dim() {
            gap = gap.max((t.base[c] - cube.base()[c]).abs());
        }
    }
    Ok(gap)
}

/// A form on the source obtained by conjugating a form on the target of a
/// polynomial bijection: `K_d(γ) = f⁻¹(K'_d(f∘γ))`. By construction `K'` and
/// `K` satisfy the relatedness exchange law `K'_d(f∘γ) = f(K_d(γ))`.
pub struct PulledBackForm {
    map: PolyMap,
    map_inv: PolyMap,
    target: Arc<dyn SemiForm>,
}

impl PulledBackForm {
    pub fn map(&self) -> &PolyMap {
        &self.map
    }

    pub fn target(&self) -> &Arc<dyn SemiForm> {
        &self.target
    }
}

/// Build the pullback of `target` along `f`, validating the supplied inverse
/// on the given sample points first.
pub fn pullback_related(
    f: PolyMap,
    f_inv: PolyMap,
    target: Arc<dyn SemiForm>,
    sample_points: &[Vec<f64>],
    tol: f64,
) -> Result<PulledBackForm> {
    if f.target_dim() != target.dim() {
        return Err(Error::Dim {
            expected: target.dim(),
            got: f.target_dim(),
        });
    }
    if f_inv.source_dim() != f.target_dim() || f_inv.target_dim() != f.source_dim() {
        return Err(Error::Dim {
            expected: f.target_dim(),
            got: f_inv.source_dim(),
        });
    }
    f.verify_inverse(&f_inv, sample_points, tol)?;
    Ok(PulledBackForm {
        map: f,
        map_inv: f_inv,
        target,
    })
}

impl SemiForm for PulledBackForm {
    fn dim(&self) -> usize {
        self.map.source_dim()
    }

    fn degree(&self) -> usize {
        self.target.degree()
    }

    fn eval_weil(&self, d: Tag, cube: &WeilCube, pool: &mut TagPool) -> Result<WeilVector> {
        let pushed = self.map.push_weil_cube(cube, pool)?;
        let v = self.target.eval_weil(d, &pushed, pool)?;
        self.map_inv.apply_weil(&v)
    }
}

// ---------------------------------------------------------------------------
// File format
// ---------------------------------------------------------------------------

/// JSON shape of a polynomial: `{"terms": [{"exponents": [...], "coefficient": c}]}`.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct PolyExprSpec {
    pub terms: Vec<PolyTermSpec>,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct PolyTermSpec {
    pub exponents: Vec<u32>,
    pub coefficient: f64,
}

impl PolyExprSpec {
    pub fn to_poly(&self, vars: usize) -> Result<PolyExpr> {
        for t in &self.terms {
            if t.exponents.len() != vars {
                return Err(Error::InvalidSpec(format!(
                    "exponent vector {:?} does not have length {vars}",
                    t.exponents
                )));
            }
        }
        PolyExpr::from_terms(
            vars,
            self.terms
                .iter()
                .map(|t| (t.exponents.clone(), t.coefficient)),
        )
    }

    pub fn from_poly(p: &PolyExpr) -> PolyExprSpec {
        PolyExprSpec {
            terms: p
                .terms()
                .map(|(e, c)| PolyTermSpec {
                    exponents: e.to_vec(),
                    coefficient: c,
                })
                .collect(),
        }
    }
}

/// JSON shape of a form kernel; indices are 1-based and covariant lists must
/// be strictly increasing.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct FormSpec {
    pub dim: usize,
    pub degree: usize,
    pub terms: Vec<FormTermSpec>,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct FormTermSpec {
    pub covariant: Vec<usize>,
    pub output: usize,
    pub coeff: PolyExprSpec,
}

impl FormSpec {
    pub fn to_form(&self) -> Result<VectorForm> {
        let terms = self
            .terms
            .iter()
            .map(|t| {
                Ok(KernelTerm {
                    covariant: t.covariant.clone(),
                    output: t.output,
                    coeff: t.coeff.to_poly(self.dim)?,
                })
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(VectorForm::new(FormKernel::new(
            self.dim,
            self.degree,
            terms,
        )?))
    }

    pub fn from_json(s: &str) -> Result<FormSpec> {
        serde_json::from_str(s).map_err(|e| Error::InvalidSpec(format!("form file: {e}")))
    }
}
