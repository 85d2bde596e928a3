//! Independent classical cross-check: scalar differential forms, vector
//! fields and the coordinate Frölicher–Nijenhuis formula on decomposables,
//! all by formal polynomial differentiation. Nothing here touches the Weil
//! arithmetic or the evaluator pipeline; the point of this module is to judge
//! the engine from the outside.

use std::collections::BTreeMap;

use crate::error::Error;
use crate::forms::FormKernel;
use crate::microcube::Permutation;
use crate::weil::PolyExpr;
use crate::Result;

/// A scalar differential `p`-form with polynomial coefficients:
/// terms `coeff(x)·dx^{i_1}∧…∧dx^{i_p}` keyed by strictly increasing index
/// lists (1-based). Degrees beyond the dimension simply have no terms.
#[derive(Clone, Debug, PartialEq)]
pub struct ScalarForm {
    dim: usize,
    degree: usize,
    terms: BTreeMap<Vec<u8>, PolyExpr>,
}

impl ScalarForm {
    pub fn zero(dim: usize, degree: usize) -> ScalarForm {
        ScalarForm {
            dim,
            degree,
            terms: BTreeMap::new(),
        }
    }

    /// The constant function 1 as a 0-form.
    pub fn one(dim: usize) -> ScalarForm {
        ScalarForm::from_terms(dim, 0, [(vec![], PolyExpr::constant(dim, 1.0))]).unwrap()
    }

    pub fn from_terms<I>(dim: usize, degree: usize, terms: I) -> Result<ScalarForm>
    where
        I: IntoIterator<Item = (Vec<u8>, PolyExpr)>,
    {
        let mut table: BTreeMap<Vec<u8>, PolyExpr> = BTreeMap::new();
        for (idx, coeff) in terms {
            if idx.len() != degree {
                return Err(Error::InvalidSpec(format!(
                    "index list {idx:?} does not have length {degree}"
                )));
            }
            if !idx.windows(2).all(|w| w[0] < w[1]) {
                return Err(Error::InvalidSpec(format!(
                    "index list {idx:?} is not strictly increasing"
                )));
            }
            if idx.iter().any(|&i| i == 0 || i as usize > dim) {
                return Err(Error::InvalidSpec(format!(
                    "index out of range 1..={dim} in {idx:?}"
                )));
            }
            if coeff.vars() != dim {
                return Err(Error::Arity {
                    expected: dim,
                    got: coeff.vars(),
                });
            }
            match table.entry(idx) {
                std::collections::btree_map::Entry::Vacant(e) => {
                    e.insert(coeff);
                }
                std::collections::btree_map::Entry::Occupied(mut e) => {
                    let sum = e.get().add(&coeff);
                    *e.get_mut() = sum;
                }
            }
        }
        table.retain(|_, c| !c.is_zero());
        Ok(ScalarForm {
            dim,
            degree,
            terms: table,
        })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn degree(&self) -> usize {
        self.degree
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn terms(&self) -> impl Iterator<Item = (&[u8], &PolyExpr)> + '_ {
        self.terms.iter().map(|(k, v)| (k.as_slice(), v))
    }

    pub fn add(&self, other: &ScalarForm) -> ScalarForm {
        debug_assert_eq!(self.degree, other.degree);
        let mut table = self.terms.clone();
        for (idx, c) in &other.terms {
            match table.entry(idx.clone()) {
                std::collections::btree_map::Entry::Vacant(e) => {
                    e.insert(c.clone());
                }
                std::collections::btree_map::Entry::Occupied(mut e) => {
                    let sum = e.get().add(c);
                    *e.get_mut() = sum;
                }
            }
        }
        table.retain(|_, c| !c.is_zero());
        ScalarForm {
            dim: self.dim,
            degree: self.degree,
            terms: table,
        }
    }

    pub fn scale(&self, a: f64) -> ScalarForm {
        let terms = self
            .terms
            .iter()
            .map(|(k, c)| (k.clone(), c.scale(a)))
            .collect();
        ScalarForm {
            dim: self.dim,
            degree: self.degree,
            terms,
        }
    }

    /// Wedge product (determinant convention, no interior factorials).
    pub fn wedge(&self, other: &ScalarForm) -> ScalarForm {
        let degree = self.degree + other.degree;
        let mut out = ScalarForm::zero(self.dim, degree);
        if degree > self.dim {
            return out; // no strictly increasing lists of that length
        }
        for (i1, c1) in &self.terms {
            for (i2, c2) in &other.terms {
                if i1.iter().any(|v| i2.contains(v)) {
                    continue;
                }
                let (merged, sign) = merge_sorted(i1, i2);
                let coeff = c1.mul(c2).scale(sign);
                out =
                    out.add(&ScalarForm::from_terms(self.dim, degree, [(merged, coeff)]).unwrap());
            }
        }
        out
    }

    /// Exterior derivative by formal differentiation of the coefficients.
    pub fn exterior_d(&self) -> ScalarForm {
        let degree = self.degree + 1;
        let mut out = ScalarForm::zero(self.dim, degree);
        if degree > self.dim {
            return out;
        }
        for (idx, c) in &self.terms {
            for i in 1..=self.dim as u8 {
                if idx.contains(&i) {
                    continue;
                }
                let dc = c.partial(i as usize - 1);
                if dc.is_zero() {
                    continue;
                }
                let (merged, sign) = merge_sorted(&[i], idx);
                out = out.add(
                    &ScalarForm::from_terms(self.dim, degree, [(merged, dc.scale(sign))]).unwrap(),
                );
            }
        }
        out
    }

    /// Contraction `i_X φ` in the first slot; the contraction of a 0-form is
    /// the zero 0-form.
    pub fn contract(&self, field: &VectorField) -> ScalarForm {
        if self.degree == 0 {
            return ScalarForm::zero(self.dim, 0);
        }
        let degree = self.degree - 1;
        let mut out = ScalarForm::zero(self.dim, degree);
        for (idx, c) in &self.terms {
            for (s, &i) in idx.iter().enumerate() {
                let sign = if s % 2 == 0 { 1.0 } else { -1.0 };
                let coeff = c.mul(&field.comps[i as usize - 1]).scale(sign);
                let mut rest = idx.clone();
                rest.remove(s);
                out = out.add(&ScalarForm::from_terms(self.dim, degree, [(rest, coeff)]).unwrap());
            }
        }
        out
    }

    /// Lie derivative along a field: `L_X = d ∘ i_X + i_X ∘ d`. For a 0-form
    /// only the second term exists.
    pub fn lie_derive(&self, field: &VectorField) -> ScalarForm {
        let second = self.exterior_d().contract(field);
        if self.degree == 0 {
            return second;
        }
        self.contract(field).exterior_d().add(&second)
    }

    /// Evaluate on a base point and `degree` direction vectors
    /// (determinant convention).
    pub fn eval(&self, x: &[f64], dirs: &[Vec<f64>]) -> Result<f64> {
        if dirs.len() != self.degree {
            return Err(Error::Arity {
                expected: self.degree,
                got: dirs.len(),
            });
        }
        let mut acc = 0.0;
        for (idx, c) in &self.terms {
            let cval = c.eval_f64(x)?;
            acc += cval * det_real(idx, dirs);
        }
        Ok(acc)
    }
}

/// Sign-tracked merge of two disjoint strictly increasing index lists. Both
/// inputs are sorted, so the parity of the interleaving is the number of
/// pairs `(x ∈ a, y ∈ b)` with `y < x`.
fn merge_sorted(a: &[u8], b: &[u8]) -> (Vec<u8>, f64) {
    let inversions: usize = a
        .iter()
        .map(|&x| b.iter().filter(|&&y| y < x).count())
        .sum();
    let mut merged: Vec<u8> = a.iter().chain(b.iter()).copied().collect();
    merged.sort_unstable();
    let sign = if inversions % 2 == 0 { 1.0 } else { -1.0 };
    (merged, sign)
}

fn det_real(idx: &[u8], dirs: &[Vec<f64>]) -> f64 {
    let p = idx.len();
    if p == 0 {
        return 1.0;
    }
    let mut acc = 0.0;
    for sigma in Permutation::all(p) {
        let mut prod = sigma.sign();
        for r in 0..p {
            prod *= dirs[r][idx[sigma.apply(r)] as usize - 1];
        }
        acc += prod;
    }
    acc
}

/// A polynomial vector field on `R^m`.
#[derive(Clone, Debug, PartialEq)]
pub struct VectorField {
    dim: usize,
    comps: Vec<PolyExpr>,
}

impl VectorField {
    pub fn new(comps: Vec<PolyExpr>) -> Result<VectorField> {
        let dim = comps.len();
        for c in &comps {
            if c.vars() != dim {
                return Err(Error::Arity {
                    expected: dim,
                    got: c.vars(),
                });
            }
        }
        Ok(VectorField { dim, comps })
    }

    /// The constant coordinate field `∂_j` (1-based).
    pub fn coordinate(dim: usize, j: usize) -> Result<VectorField> {
        if j == 0 || j > dim {
            return Err(Error::Index { index: j, len: dim });
        }
        let comps = (0..dim)
            .map(|c| PolyExpr::constant(dim, if c == j - 1 { 1.0 } else { 0.0 }))
            .collect();
        Ok(VectorField { dim, comps })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn comps(&self) -> &[PolyExpr] {
        &self.comps
    }

    pub fn eval(&self, x: &[f64]) -> Result<Vec<f64>> {
        self.comps.iter().map(|c| c.eval_f64(x)).collect()
    }

    pub fn add(&self, other: &VectorField) -> VectorField {
        VectorField {
            dim: self.dim,
            comps: self
                .comps
                .iter()
                .zip(&other.comps)
                .map(|(a, b)| a.add(b))
                .collect(),
        }
    }

    pub fn scale(&self, a: f64) -> VectorField {
        VectorField {
            dim: self.dim,
            comps: self.comps.iter().map(|c| c.scale(a)).collect(),
        }
    }

    pub fn is_zero(&self) -> bool {
        self.comps.iter().all(|c| c.is_zero())
    }
}

/// Coordinate Lie bracket `[X,Y]^j = Σ_i (X^i ∂_i Y^j − Y^i ∂_i X^j)`.
pub fn lie_bracket_classical(x: &VectorField, y: &VectorField) -> Result<VectorField> {
    if x.dim != y.dim {
        return Err(Error::Dim {
            expected: x.dim,
            got: y.dim,
        });
    }
    let m = x.dim;
    let mut comps = Vec::with_capacity(m);
    for j in 0..m {
        let mut acc = PolyExpr::zero(m);
        for i in 0..m {
            acc = acc.add(&x.comps[i].mul(&y.comps[j].partial(i)));
            acc = acc.sub(&y.comps[i].mul(&x.comps[j].partial(i)));
        }
        comps.push(acc);
    }
    VectorField::new(comps)
}

/// A decomposable tangent-vector-valued form `φ ⊗ X`.
#[derive(Clone, Debug)]
pub struct DecomposableVF {
    pub form: ScalarForm,
    pub field: VectorField,
}

impl DecomposableVF {
    pub fn new(form: ScalarForm, field: VectorField) -> Result<DecomposableVF> {
        if form.dim() != field.dim() {
            return Err(Error::Dim {
                expected: form.dim(),
                got: field.dim(),
            });
        }
        Ok(DecomposableVF { form, field })
    }

    pub fn degree(&self) -> usize {
        self.form.degree()
    }
}

/// A sum of decomposables; the oracle's representation of a
/// tangent-vector-valued form.
#[derive(Clone, Debug)]
pub struct VectorValuedForm {
    dim: usize,
    degree: usize,
    pieces: Vec<DecomposableVF>,
}

impl VectorValuedForm {
    pub fn zero(dim: usize, degree: usize) -> VectorValuedForm {
        VectorValuedForm {
            dim,
            degree,
            pieces: Vec::new(),
        }
    }

    pub fn from_pieces(
        dim: usize,
        degree: usize,
        pieces: Vec<DecomposableVF>,
    ) -> Result<VectorValuedForm> {
        for p in &pieces {
            if p.form.dim() != dim {
                return Err(Error::Dim {
                    expected: dim,
                    got: p.form.dim(),
                });
            }
            if p.degree() != degree {
                return Err(Error::Degree {
                    expected: degree,
                    got: p.degree(),
                });
            }
        }
        Ok(VectorValuedForm {
            dim,
            degree,
            pieces,
        })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn degree(&self) -> usize {
        self.degree
    }

    pub fn pieces(&self) -> &[DecomposableVF] {
        &self.pieces
    }

    fn push(&mut self, form: ScalarForm, field: VectorField) {
        if form.is_zero() || field.is_zero() {
            return;
        }
        debug_assert_eq!(form.degree(), self.degree);
        self.pieces.push(DecomposableVF { form, field });
    }

    pub fn add(&self, other: &VectorValuedForm) -> VectorValuedForm {
        debug_assert_eq!(self.degree, other.degree);
        let mut pieces = self.pieces.clone();
        pieces.extend(other.pieces.iter().cloned());
        VectorValuedForm {
            dim: self.dim,
            degree: self.degree,
            pieces,
        }
    }

    pub fn scale(&self, a: f64) -> VectorValuedForm {
        VectorValuedForm {
            dim: self.dim,
            degree: self.degree,
            pieces: self
                .pieces
                .iter()
                .map(|p| DecomposableVF {
                    form: p.form.scale(a),
                    field: p.field.clone(),
                })
                .collect(),
        }
    }

    /// Evaluate at a base point on `degree` direction vectors.
    pub fn eval(&self, x: &[f64], dirs: &[Vec<f64>]) -> Result<Vec<f64>> {
        let mut out = vec![0.0; self.dim];
        for p in &self.pieces {
            let scalar = p.form.eval(x, dirs)?;
            if scalar == 0.0 {
                continue;
            }
            let fv = p.field.eval(x)?;
            for c in 0..self.dim {
                out[c] += scalar * fv[c];
            }
        }
        Ok(out)
    }
}

impl From<&FormKernel> for VectorValuedForm {
    fn from(kernel: &FormKernel) -> VectorValuedForm {
        let dim = kernel.dim();
        let degree = kernel.degree();
        let mut out = VectorValuedForm::zero(dim, degree);
        for term in kernel.terms() {
            let idx: Vec<u8> = term.covariant.iter().map(|&i| i as u8).collect();
            let form = ScalarForm::from_terms(dim, degree, [(idx, term.coeff.clone())])
                .expect("kernel terms are valid scalar-form terms");
            let field =
                VectorField::coordinate(dim, term.output).expect("kernel output index is valid");
            out.push(form, field);
        }
        out
    }
}

/// The classical Frölicher–Nijenhuis bracket on decomposables, extended
/// bilinearly:
///
/// ```text
/// [φ⊗X, ψ⊗Y] = φ∧ψ⊗[X,Y] + φ∧(L_X ψ)⊗Y − (L_Y φ)∧ψ⊗X
///            + (−1)^k (dφ∧(i_X ψ)⊗Y + (i_Y φ)∧dψ⊗X)
/// ```
pub fn fn_bracket_classical(
    k: &VectorValuedForm,
    l: &VectorValuedForm,
) -> Result<VectorValuedForm> {
    if k.dim != l.dim {
        return Err(Error::Dim {
            expected: k.dim,
            got: l.dim,
        });
    }
    let degree = k.degree + l.degree;
    let mut out = VectorValuedForm::zero(k.dim, degree);
    for a in &k.pieces {
        let kdeg = a.degree();
        let sign_k = if kdeg % 2 == 0 { 1.0 } else { -1.0 };
        for b in &l.pieces {
            let phi = &a.form;
            let x = &a.field;
            let psi = &b.form;
            let y = &b.field;

            out.push(phi.wedge(psi), lie_bracket_classical(x, y)?);
            out.push(phi.wedge(&psi.lie_derive(x)), y.clone());
            out.push(phi.lie_derive(y).wedge(psi).scale(-1.0), x.clone());
            out.push(
                phi.exterior_d().wedge(&psi.contract(x)).scale(sign_k),
                y.clone(),
            );
            out.push(
                phi.contract(y).wedge(&psi.exterior_d()).scale(sign_k),
                x.clone(),
            );
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn x_poly(m: usize, i: usize) -> PolyExpr {
        PolyExpr::var(m, i).unwrap()
    }

    #[test]
    fn classical_lie_bracket_fixtures() {
        // [x∂x, ∂x] = −∂x
        let x_field = VectorField::new(vec![x_poly(1, 0)]).unwrap();
        let dx = VectorField::new(vec![PolyExpr::constant(1, 1.0)]).unwrap();
        let b = lie_bracket_classical(&x_field, &dx).unwrap();
        assert_eq!(b.eval(&[5.0]).unwrap(), vec![-1.0]);

        // [X, X] = 0
        let bb = lie_bracket_classical(&x_field, &x_field).unwrap();
        assert!(bb.is_zero());

        // Coordinate translations commute on R².
        let d1 = VectorField::coordinate(2, 1).unwrap();
        let d2 = VectorField::coordinate(2, 2).unwrap();
        assert!(lie_bracket_classical(&d1, &d2).unwrap().is_zero());
    }

    #[test]
    fn exterior_derivative_and_contraction_fixtures() {
        // d(x dy) = dx∧dy on R².
        let xdy = ScalarForm::from_terms(2, 1, [(vec![2], x_poly(2, 0))]).unwrap();
        let d = xdy.exterior_d();
        let expect =
            ScalarForm::from_terms(2, 2, [(vec![1, 2], PolyExpr::constant(2, 1.0))]).unwrap();
        assert_eq!(d, expect);

        // i_∂x (dx∧dy) = dy.
        let dxdy =
            ScalarForm::from_terms(2, 2, [(vec![1, 2], PolyExpr::constant(2, 1.0))]).unwrap();
        let dx_field = VectorField::coordinate(2, 1).unwrap();
        let contracted = dxdy.contract(&dx_field);
        let dy = ScalarForm::from_terms(2, 1, [(vec![2], PolyExpr::constant(2, 1.0))]).unwrap();
        assert_eq!(contracted, dy);

        // φ∧φ = 0 for odd degree.
        let phi = ScalarForm::from_terms(
            2,
            1,
            [
                (vec![1], x_poly(2, 1)),
                (vec![2], PolyExpr::constant(2, 3.0)),
            ],
        )
        .unwrap();
        assert!(phi.wedge(&phi).is_zero());

        // Degree overflow beyond the dimension is the zero form.
        assert!(dxdy.wedge(&dxdy).is_zero());
        assert!(dxdy.exterior_d().is_zero());
    }

    #[test]
    fn wedge_signs_follow_the_interleaving_parity() {
        let m = 3;
        let dx1 = ScalarForm::from_terms(m, 1, [(vec![1], PolyExpr::constant(m, 1.0))]).unwrap();
        let dx2 = ScalarForm::from_terms(m, 1, [(vec![2], PolyExpr::constant(m, 1.0))]).unwrap();
        // dx²∧dx¹ = −dx¹∧dx²
        let w21 = dx2.wedge(&dx1);
        let w12 = dx1.wedge(&dx2);
        assert_eq!(w21, w12.scale(-1.0));
        // Anticommutativity on evaluation too.
        let dirs = vec![vec![1.0, 0.0, 0.0], vec![0.0, 1.0, 0.0]];
        assert_eq!(w12.eval(&[0.0; 3], &dirs).unwrap(), 1.0);
        assert_eq!(w21.eval(&[0.0; 3], &dirs).unwrap(), -1.0);
    }

    #[test]
    fn fn_bracket_classical_reduces_to_lie_bracket_on_fields() {
        let m = 2;
        let x = VectorValuedForm::from_pieces(
            m,
            0,
            vec![DecomposableVF::new(
                ScalarForm::one(m),
                VectorField::new(vec![x_poly(m, 0).mul(&x_poly(m, 1)), x_poly(m, 1)]).unwrap(),
            )
            .unwrap()],
        )
        .unwrap();
        let y = VectorValuedForm::from_pieces(
            m,
            0,
            vec![DecomposableVF::new(
                ScalarForm::one(m),
                VectorField::new(vec![PolyExpr::constant(m, 1.0), x_poly(m, 0).pow(2)]).unwrap(),
            )
            .unwrap()],
        )
        .unwrap();
        let bracket = fn_bracket_classical(&x, &y).unwrap();
        let classical = lie_bracket_classical(&x.pieces()[0].field, &y.pieces()[0].field).unwrap();
        for pt in [[0.4, -0.7], [1.2, 0.3]] {
            let lhs = bracket.eval(&pt, &[]).unwrap();
            let rhs = classical.eval(&pt).unwrap();
            for c in 0..m {
                assert!((lhs[c] - rhs[c]).abs() <= 1e-12);
            }
        }
    }

    #[test]
    fn fn_bracket_classical_constant_inputs_vanish() {
        let m = 2;
        let k = VectorValuedForm::from_pieces(
            m,
            1,
            vec![DecomposableVF::new(
                ScalarForm::from_terms(m, 1, [(vec![1], PolyExpr::constant(m, 1.0))]).unwrap(),
                VectorField::coordinate(m, 2).unwrap(),
            )
            .unwrap()],
        )
        .unwrap();
        let l = VectorValuedForm::from_pieces(
            m,
            1,
            vec![DecomposableVF::new(
                ScalarForm::from_terms(m, 1, [(vec![2], PolyExpr::constant(m, 1.0))]).unwrap(),
                VectorField::coordinate(m, 1).unwrap(),
            )
            .unwrap()],
        )
        .unwrap();
        let bracket = fn_bracket_classical(&k, &l).unwrap();
        let dirs = vec![vec![0.3, 1.0], vec![-0.5, 0.25]];
        let v = bracket.eval(&[0.6, -0.1], &dirs).unwrap();
        assert!(v.iter().all(|&c| c.abs() <= 1e-12));
    }

    #[test]
    fn fn_bracket_classical_mixed_degree_fixture() {
        // K = dx¹⊗∂₁ (k=1), L = x¹∂₂ (l=0): [K, L] = dx¹⊗∂₂.
        let m = 2;
        let k = VectorValuedForm::from_pieces(
            m,
            1,
            vec![DecomposableVF::new(
                ScalarForm::from_terms(m, 1, [(vec![1], PolyExpr::constant(m, 1.0))]).unwrap(),
                VectorField::coordinate(m, 1).unwrap(),
            )
            .unwrap()],
        )
        .unwrap();
        let l = VectorValuedForm::from_pieces(
            m,
            0,
            vec![DecomposableVF::new(
                ScalarForm::one(m),
                VectorField::new(vec![PolyExpr::zero(m), x_poly(m, 0)]).unwrap(),
            )
            .unwrap()],
        )
        .unwrap();
        let bracket = fn_bracket_classical(&k, &l).unwrap();
        // Evaluate on a direction v: expect v¹·e₂.
        for (pt, dir) in [([0.7, -0.3], [2.0, 5.0]), ([-1.0, 0.4], [0.5, -2.0])] {
            let v = bracket.eval(&pt, &[dir.to_vec()]).unwrap();
            assert!((v[0] - 0.0).abs() <= 1e-12);
            assert!((v[1] - dir[0]).abs() <= 1e-12);
        }
    }

    #[test]
    fn oracle_graded_antisymmetry_spot_check() {
        // [K,L] = −(−1)^{kl}[L,K] for a (1,1) pair with polynomial data.
        let m = 2;
        let k = VectorValuedForm::from_pieces(
            m,
            1,
            vec![DecomposableVF::new(
                ScalarForm::from_terms(m, 1, [(vec![1], x_poly(m, 1))]).unwrap(),
                VectorField::coordinate(m, 2).unwrap(),
            )
            .unwrap()],
        )
        .unwrap();
        let l = VectorValuedForm::from_pieces(
            m,
            1,
            vec![DecomposableVF::new(
                ScalarForm::from_terms(m, 1, [(vec![2], x_poly(m, 0).pow(2))]).unwrap(),
                VectorField::new(vec![x_poly(m, 1), PolyExpr::constant(m, 1.0)]).unwrap(),
            )
            .unwrap()],
        )
        .unwrap();
        let kl = fn_bracket_classical(&k, &l).unwrap();
        let lk = fn_bracket_classical(&l, &k).unwrap();
        let dirs = vec![vec![1.0, 0.5], vec![-0.3, 2.0]];
        for pt in [[0.4, -0.6], [1.1, 0.2]] {
            let a = kl.eval(&pt, &dirs).unwrap();
            let b = lk.eval(&pt, &dirs).unwrap();
            // kl degree product 1·1 odd: [K,L] = −(−1)^{1}[L,K] = [L,K]... sign = −(−1)^{kl} = +1
            for c in 0..m {
                assert!((a[c] - b[c]).abs() <= 1e-10, "antisymmetry failed at {c}");
            }
        }
    }
}
