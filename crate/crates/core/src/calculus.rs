//! The operator layer: star composition, the floor bracket and the
//! Frölicher–Nijenhuis bracket, interior derivations, linear connections and
//! Lie derivations, and the triple-composition maps behind the graded Jacobi
//! identity.
//!
//! Everything here is an operational evaluator over Weil-coefficient cubes.
//! Star composition `ψ∗φ` threads the leading block of a cube through `φ` by
//! moving the trailing slots into fresh nilpotent tags, extracting, and
//! feeding the result to `ψ`; the floor bracket is the strong difference of
//! the two composition squares; the bracket, interior and Lie derivations are
//! alternations of such semiforms.

use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::Error;
use crate::forms::{alternate, weight_pq, weight_pqr, Alternated, PolyExprSpec, SemiForm};
use crate::microcube::{Microcube, Permutation, PolyMap, TangentVector, WeilCube, WeilTangent};
use crate::weil::{PolyExpr, Tag, TagPool, WeilElement, WeilVector};
use crate::{factorial, Result, DEFAULT_TOL};

// ---------------------------------------------------------------------------
// Star composition
// ---------------------------------------------------------------------------

/// A pointed evaluator `cube ↦ point` (tags already bound inside).
trait CubeOp {
    fn degree(&self) -> usize;
    fn apply(&self, cube: &WeilCube, pool: &mut TagPool) -> Result<WeilVector>;
}

/// A semiform with its direction tag bound: `γ ↦ K_d(γ)`.
struct BoundForm<'a> {
    form: &'a dyn SemiForm,
    tag: Tag,
}

impl CubeOp for BoundForm<'_> {
    fn degree(&self) -> usize {
        self.form.degree()
    }

    fn apply(&self, cube: &WeilCube, pool: &mut TagPool) -> Result<WeilVector> {
        self.form.eval_weil(self.tag, cube, pool)
    }
}

/// `ψ∗φ`: feed the leading `deg φ` slots of the cube through `φ` and the
/// remaining `deg ψ` slots through `ψ`.
struct StarComposite<'a> {
    outer: &'a dyn CubeOp,
    inner: &'a dyn CubeOp,
}

impl CubeOp for StarComposite<'_> {
    fn degree(&self) -> usize {
        self.outer.degree() + self.inner.degree()
    }

    fn apply(&self, cube: &WeilCube, pool: &mut TagPool) -> Result<WeilVector> {
        let p = self.inner.degree();
        let q = self.outer.degree();
        if cube.degree() != p + q {
            return Err(Error::Degree {
                expected: p + q,
                got: cube.degree(),
            });
        }
        let e_tags = pool.alloc_many(q)?;
        let inner_cube = cube.front_block(p, &e_tags)?;
        let v = self.inner.apply(&inner_cube, pool)?;
        let outer_cube = WeilCube::extract(&v, &e_tags);
        pool.release_all(&e_tags);
        self.outer.apply(&outer_cube, pool)
    }
}

/// Star composition `(ψ_{d_ψ} ∗ φ_{d_φ})(γ)` on a real cube of degree
/// `deg φ + deg ψ`; the result is Weil-valued over the two bound tags.
pub fn star(
    psi: &dyn SemiForm,
    d_psi: Tag,
    phi: &dyn SemiForm,
    d_phi: Tag,
    cube: &Microcube,
) -> Result<WeilVector> {
    if psi.dim() != phi.dim() || cube.dim() != phi.dim() {
        return Err(Error::Dim {
            expected: phi.dim(),
            got: cube.dim(),
        });
    }
    let wc = WeilCube::from_real(cube);
    let mut pool = TagPool::excluding(crate::weil::TagSet::from_tags(&[d_psi, d_phi]));
    let bound_phi = BoundForm {
        form: phi,
        tag: d_phi,
    };
    let bound_psi = BoundForm {
        form: psi,
        tag: d_psi,
    };
    StarComposite {
        outer: &bound_psi,
        inner: &bound_phi,
    }
    .apply(&wc, &mut pool)
}

/// The composition square `(d1,d2) ↦ (L_{d2} ∗ K_{d1})(γ)` extracted to
/// coefficient form over `(d1, d2)`.
pub(crate) fn pair_square_weil(
    k: &dyn SemiForm,
    l: &dyn SemiForm,
    cube: &WeilCube,
    pool: &mut TagPool,
) -> Result<WeilCube> {
    let t1 = pool.alloc()?;
    let t2 = pool.alloc()?;
    let bound_k = BoundForm { form: k, tag: t1 };
    let bound_l = BoundForm { form: l, tag: t2 };
    let v = StarComposite {
        outer: &bound_l,
        inner: &bound_k,
    }
    .apply(cube, pool)?;
    let square = WeilCube::extract(&v, &[t1, t2]);
    pool.release_all(&[t1, t2]);
    Ok(square)
}

/// The twisted square `(d1,d2) ↦ (K_{d1} ∗ L_{d2})(γ^σ)` with `σ` the block
/// swap moving the `q = deg L` block past the `p = deg K` block, extracted
/// over `(d1, d2)`.
pub(crate) fn twisted_pair_square_weil(
    k: &dyn SemiForm,
    l: &dyn SemiForm,
    cube: &WeilCube,
    pool: &mut TagPool,
) -> Result<WeilCube> {
    // The swapped star reads the first q slots into L and the last p into K;
    // transporting by σ = block_swap(q, p) routes composition position j to
    // cube slot σ(j), so L sees the cube's trailing q-block and K its leading
    // p-block. This is the unique reindexing under which the two squares
    // share their axes.
    let sigma = Permutation::block_swap(l.degree(), k.degree());
    let acted = cube.permute(&sigma)?;
    let t1 = pool.alloc()?;
    let t2 = pool.alloc()?;
    let bound_l = BoundForm { form: l, tag: t2 };
    let bound_k = BoundForm { form: k, tag: t1 };
    let v = StarComposite {
        outer: &bound_k,
        inner: &bound_l,
    }
    .apply(&acted, pool)?;
    let square = WeilCube::extract(&v, &[t1, t2]);
    pool.release_all(&[t1, t2]);
    Ok(square)
}

/// Public, real-cube version of the composition square.
pub fn pair_square(k: &dyn SemiForm, l: &dyn SemiForm, cube: &Microcube) -> Result<Microcube> {
    check_pair(k, l, cube)?;
    let wc = WeilCube::from_real(cube);
    let mut pool = TagPool::new();
    pair_square_weil(k, l, &wc, &mut pool)?.to_real()
}

/// Public, real-cube version of the twisted square.
pub fn twisted_pair_square(
    k: &dyn SemiForm,
    l: &dyn SemiForm,
    cube: &Microcube,
) -> Result<Microcube> {
    check_pair(k, l, cube)?;
    let wc = WeilCube::from_real(cube);
    let mut pool = TagPool::new();
    twisted_pair_square_weil(k, l, &wc, &mut pool)?.to_real()
}

fn check_pair(k: &dyn SemiForm, l: &dyn SemiForm, cube: &Microcube) -> Result<()> {
    if k.dim() != l.dim() || cube.dim() != k.dim() {
        return Err(Error::Dim {
            expected: k.dim(),
            got: cube.dim(),
        });
    }
    if cube.degree() != k.degree() + l.degree() {
        return Err(Error::Degree {
            expected: k.degree() + l.degree(),
            got: cube.degree(),
        });
    }
    Ok(())
}

// ---------------------------------------------------------------------------
// Floor bracket and Frölicher–Nijenhuis bracket
// ---------------------------------------------------------------------------

/// The floor bracket `⌊K,L⌋`: the strong difference of the composition square
/// and the twisted square. A semiform of degree `p+q` carrying its `(p,q)`
/// block structure; base-preserving and slot-homogeneous, not alternating.
pub struct FloorBracket {
    k: Arc<dyn SemiForm>,
    l: Arc<dyn SemiForm>,
    tol: f64,
}

impl FloorBracket {
    pub fn block_degrees(&self) -> (usize, usize) {
        (self.k.degree(), self.l.degree())
    }
}

impl SemiForm for FloorBracket {
    fn dim(&self) -> usize {
        self.k.dim()
    }

    fn degree(&self) -> usize {
        self.k.degree() + self.l.degree()
    }

    fn eval_weil(&self, d: Tag, cube: &WeilCube, pool: &mut TagPool) -> Result<WeilVector> {
        let pair = pair_square_weil(&*self.k, &*self.l, cube, pool)?;
        let twisted = twisted_pair_square_weil(&*self.k, &*self.l, cube, pool)?;
        // The two squares agree on D(2) for any well-formed evaluators; a
        // failure here is an engine bug, not a user error.
        let t = pair.strong_diff(&twisted, self.tol).map_err(|e| match e {
            Error::D2Disagreement { gap, .. } => Error::InternalAgreement {
                context: "floor bracket: composition squares disagree on the axes",
                gap,
            },
            other => other,
        })?;
        Ok(t.to_vector(d))
    }
}

/// Build `⌊K,L⌋` with the given axis-agreement tolerance.
pub fn bracket_floor_with_tol(
    k: Arc<dyn SemiForm>,
    l: Arc<dyn SemiForm>,
    tol: f64,
) -> Result<FloorBracket> {
    if k.dim() != l.dim() {
        return Err(Error::Dim {
            expected: k.dim(),
            got: l.dim(),
        });
    }
    Ok(FloorBracket { k, l, tol })
}

/// Build `⌊K,L⌋` with the default tolerance.
pub fn bracket_floor(k: Arc<dyn SemiForm>, l: Arc<dyn SemiForm>) -> Result<FloorBracket> {
    bracket_floor_with_tol(k, l, DEFAULT_TOL)
}

/// The Frölicher–Nijenhuis bracket `⌈K,L⌉ = A_{p,q}(⌊K,L⌋)`: alternation of
/// the floor bracket with weight `1/(p!q!)`. At `p = q = 0` this is the Lie
/// bracket of vector fields.
pub fn fn_bracket(k: Arc<dyn SemiForm>, l: Arc<dyn SemiForm>) -> Result<Alternated> {
    let (p, q) = (k.degree(), l.degree());
    Ok(alternate(Arc::new(bracket_floor(k, l)?), weight_pq(p, q)))
}

// ---------------------------------------------------------------------------
// Interior derivation
// ---------------------------------------------------------------------------

/// The unalternated interior derivation `î_K L` for `K` of degree `k+1` and
/// `L` of degree `l ≥ 1`: evaluates `L` on the `l`-cube whose first variable
/// passes through `K`'s direction slot over the leading `(k+1)`-block.
pub struct InteriorHat {
    k: Arc<dyn SemiForm>,
    l: Arc<dyn SemiForm>,
}

impl SemiForm for InteriorHat {
    fn dim(&self) -> usize {
        self.k.dim()
    }

    fn degree(&self) -> usize {
        self.k.degree() - 1 + self.l.degree()
    }

    fn eval_weil(&self, d: Tag, cube: &WeilCube, pool: &mut TagPool) -> Result<WeilVector> {
        let k1 = self.k.degree();
        let l_deg = self.l.degree();
        if cube.degree() != k1 - 1 + l_deg {
            return Err(Error::Degree {
                expected: k1 - 1 + l_deg,
                got: cube.degree(),
            });
        }
        let tags = pool.alloc_many(l_deg)?;
        // Leading (k+1)-block of γ; trailing slots become the tags e_2..e_l.
        let inner = cube.front_block(k1, &tags[1..])?;
        let v = self.k.eval_weil(tags[0], &inner, pool)?;
        let l_cube = WeilCube::extract(&v, &tags);
        let out = self.l.eval_weil(d, &l_cube, pool)?;
        pool.release_all(&tags);
        Ok(out)
    }
}

/// Build `î_K L`; requires `deg K ≥ 1` and `deg L ≥ 1`.
pub fn interior_hat(k: Arc<dyn SemiForm>, l: Arc<dyn SemiForm>) -> Result<InteriorHat> {
    if k.dim() != l.dim() {
        return Err(Error::Dim {
            expected: k.dim(),
            got: l.dim(),
        });
    }
    if k.degree() == 0 || l.degree() == 0 {
        return Err(Error::InteriorDegree {
            k1: k.degree(),
            l: l.degree(),
        });
    }
    Ok(InteriorHat { k, l })
}

/// The interior derivation `i_K L = A_{k+1,l−1}(î_K L)`.
pub fn interior(k: Arc<dyn SemiForm>, l: Arc<dyn SemiForm>) -> Result<Alternated> {
    let k1 = k.degree();
    let l_deg = l.degree();
    let hat = interior_hat(k, l)?;
    Ok(alternate(
        Arc::new(hat),
        1.0 / (factorial(k1) * factorial(l_deg - 1)),
    ))
}

// ---------------------------------------------------------------------------
// Linear connections
// ---------------------------------------------------------------------------

/// A linear connection on `R^m` given by Christoffel data `Γ^k_{ij}(x)`:
/// completes two tangent vectors at a point to the microsquare
/// `(x, v1, v2, Γ_x(v1, v2))`.
#[derive(Clone, Debug)]
pub struct Connection {
    dim: usize,
    symmetric: bool,
    gamma: Vec<PolyExpr>, // flattened [k][i][j], 0-based
}

impl Connection {
    pub fn new(dim: usize, symmetric: bool, gamma: Vec<PolyExpr>) -> Result<Connection> {
        if gamma.len() != dim * dim * dim {
            return Err(Error::Arity {
                expected: dim * dim * dim,
                got: gamma.len(),
            });
        }
        for g in &gamma {
            if g.vars() != dim {
                return Err(Error::Arity {
                    expected: dim,
                    got: g.vars(),
                });
            }
        }
        let conn = Connection {
            dim,
            symmetric,
            gamma,
        };
        if symmetric {
            for k in 1..=dim {
                for i in 1..=dim {
                    for j in i..=dim {
                        if conn.christoffel(k, i, j) != conn.christoffel(k, j, i) {
                            return Err(Error::InvalidSpec(format!(
                                "connection flagged symmetric but Γ^{k}_{{{i}{j}}} ≠ Γ^{k}_{{{j}{i}}}"
                            )));
                        }
                    }
                }
            }
        }
        Ok(conn)
    }

    /// The flat connection (`Γ ≡ 0`).
    pub fn flat(dim: usize) -> Connection {
        Connection {
            dim,
            symmetric: true,
            gamma: vec![PolyExpr::zero(dim); dim * dim * dim],
        }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn is_symmetric(&self) -> bool {
        self.symmetric
    }

    /// `Γ^k_{ij}` with 1-based indices.
    pub fn christoffel(&self, k: usize, i: usize, j: usize) -> &PolyExpr {
        &self.gamma[((k - 1) * self.dim + (i - 1)) * self.dim + (j - 1)]
    }

    /// `Γ_x(v1, v2)^k = Σ_ij Γ^k_{ij}(x) v1^i v2^j` in the Weil algebra.
    fn gamma_weil(&self, x: &WeilVector, v1: &WeilVector, v2: &WeilVector) -> Result<WeilVector> {
        let m = self.dim;
        let mut comps = Vec::with_capacity(m);
        for k in 1..=m {
            let mut acc = WeilElement::zero();
            for i in 1..=m {
                for j in 1..=m {
                    let g = self.christoffel(k, i, j);
                    if g.is_zero() {
                        continue;
                    }
                    let gval = g.eval_weil(x.comps())?;
                    acc = acc.add(&gval.mul(v1.comp(i - 1)).mul(v2.comp(j - 1)));
                }
            }
            comps.push(acc);
        }
        Ok(WeilVector::new(comps))
    }

    /// Complete two tangents at a common base to a microsquare with edges
    /// exactly `t1, t2` and mixed coefficient `Γ_x(v1, v2)`.
    pub fn complete_square(
        &self,
        t1: &TangentVector,
        t2: &TangentVector,
        tol: f64,
    ) -> Result<Microcube> {
        if t1.dim() != self.dim || t2.dim() != self.dim {
            return Err(Error::Dim {
                expected: self.dim,
                got: t1.dim().max(t2.dim()),
            });
        }
        let gap = t1
            .base
            .iter()
            .zip(&t2.base)
            .fold(0.0f64, |g, (a, b)| g.max((a - b).abs()));
        if gap > tol {
            return Err(Error::BaseMismatch { gap });
        }
        let x = WeilVector::from_reals(&t1.base);
        let v1 = WeilVector::from_reals(&t1.dir);
        let v2 = WeilVector::from_reals(&t2.dir);
        let mixed = self.gamma_weil(&x, &v1, &v2)?.to_reals()?;
        Microcube::new(
            2,
            self.dim,
            vec![t1.base.clone(), t1.dir.clone(), t2.dir.clone(), mixed],
        )
    }

    /// Weil-valued completion used inside the Lie derivation.
    fn complete_square_weil(
        &self,
        base: &WeilVector,
        v1: &WeilVector,
        v2: &WeilVector,
    ) -> Result<WeilCube> {
        let mixed = self.gamma_weil(base, v1, v2)?;
        WeilCube::new(
            2,
            self.dim,
            vec![base.clone(), v1.clone(), v2.clone(), mixed],
        )
    }

    /// The connection on the source for which the flat connection on the
    /// target is related through the unitriangular map `f`: completing a
    /// square here and pushing through `f` gives the flat completion of the
    /// pushed edges. Concretely `Γ^k_{ij}(x) = −Σ_l [Df(x)⁻¹]_{kl} ∂_i∂_j f^l(x)`,
    /// which is symmetric in `(i, j)`.
    pub fn pullback_flat(f: &PolyMap) -> Result<Connection> {
        if !f.is_unitriangular() {
            return Err(Error::NotTriangular);
        }
        let m = f.source_dim();
        let jac = f.jacobian();
        // Df = I + N with N strictly lower triangular and nilpotent, so
        // Df⁻¹ = Σ_{t<m} (−N)^t has polynomial entries.
        let zero = PolyExpr::zero(m);
        let mut neg_n: Vec<Vec<PolyExpr>> = vec![vec![zero.clone(); m]; m];
        for r in 0..m {
            for c in 0..m {
                if r != c {
                    neg_n[r][c] = jac[r][c].scale(-1.0);
                }
            }
        }
        let ident: Vec<Vec<PolyExpr>> = (0..m)
            .map(|r| {
                (0..m)
                    .map(|c| {
                        if r == c {
                            PolyExpr::constant(m, 1.0)
                        } else {
                            zero.clone()
                        }
                    })
                    .collect()
            })
            .collect();
        let mat_mul = |a: &Vec<Vec<PolyExpr>>, b: &Vec<Vec<PolyExpr>>| -> Vec<Vec<PolyExpr>> {
            (0..m)
                .map(|r| {
                    (0..m)
                        .map(|c| {
                            let mut acc = PolyExpr::zero(m);
                            for t in 0..m {
                                acc = acc.add(&a[r][t].mul(&b[t][c]));
                            }
                            acc
                        })
                        .collect()
                })
                .collect()
        };
        let mut inv = ident.clone();
        let mut power = ident;
        for _ in 1..m {
            power = mat_mul(&power, &neg_n);
            for r in 0..m {
                for c in 0..m {
                    inv[r][c] = inv[r][c].add(&power[r][c]);
                }
            }
        }
        let mut gamma = vec![PolyExpr::zero(m); m * m * m];
        for k in 0..m {
            for i in 0..m {
                for j in i..m {
                    let mut acc = PolyExpr::zero(m);
                    for l in 0..m {
                        if inv[k][l].is_zero() {
                            continue;
                        }
                        let second = jac[l][i].partial(j);
                        acc = acc.add(&inv[k][l].mul(&second));
                    }
                    let g = acc.scale(-1.0);
                    gamma[(k * m + i) * m + j] = g.clone();
                    gamma[(k * m + j) * m + i] = g;
                }
            }
        }
        Connection::new(m, true, gamma)
    }
}

// ---------------------------------------------------------------------------
// Lie derivation
// ---------------------------------------------------------------------------

/// The unalternated Lie derivation `L̂^∇_K L`: the strong difference of the
/// composition square `(L∗K)(γ)` and its connection completion (same base and
/// edges, mixed coefficient replaced by `Γ`).
pub struct LieHat {
    k: Arc<dyn SemiForm>,
    l: Arc<dyn SemiForm>,
    conn: Arc<Connection>,
    tol: f64,
}

impl SemiForm for LieHat {
    fn dim(&self) -> usize {
        self.k.dim()
    }

    fn degree(&self) -> usize {
        self.k.degree() + self.l.degree()
    }

    fn eval_weil(&self, d: Tag, cube: &WeilCube, pool: &mut TagPool) -> Result<WeilVector> {
        let square = pair_square_weil(&*self.k, &*self.l, cube, pool)?;
        let completed =
            self.conn
                .complete_square_weil(square.base(), square.coeff(1), square.coeff(2))?;
        // Edge agreement holds by construction; assert it anyway.
        let t = square
            .strong_diff(&completed, self.tol)
            .map_err(|e| match e {
                Error::D2Disagreement { gap, .. } => Error::InternalAgreement {
                    context: "lie derivation: completion disagrees with the square edges",
                    gap,
                },
                other => other,
            })?;
        Ok(t.to_vector(d))
    }
}

/// Build `L̂^∇_K L`.
pub fn lie_hat(
    k: Arc<dyn SemiForm>,
    l: Arc<dyn SemiForm>,
    conn: Arc<Connection>,
) -> Result<LieHat> {
    if k.dim() != l.dim() || conn.dim() != k.dim() {
        return Err(Error::Dim {
            expected: k.dim(),
            got: conn.dim(),
        });
    }
    Ok(LieHat {
        k,
        l,
        conn,
        tol: DEFAULT_TOL,
    })
}

/// The Lie derivation `L^∇_K L = A_{k,l}(L̂^∇_K L)`.
pub fn lie(
    k: Arc<dyn SemiForm>,
    l: Arc<dyn SemiForm>,
    conn: Arc<Connection>,
) -> Result<Alternated> {
    let (kd, ld) = (k.degree(), l.degree());
    Ok(alternate(Arc::new(lie_hat(k, l, conn)?), weight_pq(kd, ld)))
}

/// Residuals of the symmetric-connection decomposition of the bracket:
/// `⌈K,L⌉ = L^∇_K L − (−1)^{kl} L^∇_L K` and, unalternated,
/// `⌊K,L⌋ = L̂^∇_K L − (L̂^∇_L K)^σ` with `σ` the `(k,l)` block swap.
pub struct LieDecompositionReport {
    pub alternated_gap: f64,
    pub floor_gap: f64,
}

pub fn lie_decomposition_check(
    k: Arc<dyn SemiForm>,
    l: Arc<dyn SemiForm>,
    conn: Arc<Connection>,
    cubes: &[Microcube],
) -> Result<LieDecompositionReport> {
    if !conn.is_symmetric() {
        return Err(Error::NotSymmetric);
    }
    let kd = k.degree();
    let ld = l.degree();
    let sign = if (kd * ld) % 2 == 0 { 1.0 } else { -1.0 };

    let bracket = fn_bracket(k.clone(), l.clone())?;
    let lie_kl = lie(k.clone(), l.clone(), conn.clone())?;
    let lie_lk = lie(l.clone(), k.clone(), conn.clone())?;
    let floor = bracket_floor(k.clone(), l.clone())?;
    let hat_kl = lie_hat(k.clone(), l.clone(), conn.clone())?;
    let hat_lk = lie_hat(l, k, conn)?;
    // The swapped derivation reads its first l positions into L; transporting
    // by block_swap(l, k) routes those to the bracket cube's trailing l-block.
    let swap = Permutation::block_swap(ld, kd);

    let mut alternated_gap = 0.0f64;
    let mut floor_gap = 0.0f64;
    for cube in cubes {
        let b = crate::forms::eval_on_real(&bracket, cube)?;
        let lkl = crate::forms::eval_on_real(&lie_kl, cube)?;
        let llk = crate::forms::eval_on_real(&lie_lk, cube)?;
        for c in 0..b.dir.len() {
            alternated_gap =
                alternated_gap.max((b.dir[c] - (lkl.dir[c] - sign * llk.dir[c])).abs());
        }

        let f = crate::forms::eval_on_real(&floor, cube)?;
        let hkl = crate::forms::eval_on_real(&hat_kl, cube)?;
        let hlk = crate::forms::eval_on_real(&hat_lk, &cube.permute(&swap)?)?;
        for c in 0..f.dir.len() {
            floor_gap = floor_gap.max((f.dir[c] - (hkl.dir[c] - hlk.dir[c])).abs());
        }
    }
    Ok(LieDecompositionReport {
        alternated_gap,
        floor_gap,
    })
}

// ---------------------------------------------------------------------------
// Triple composition maps and the graded Jacobi identity
// ---------------------------------------------------------------------------

/// The six arrangements of a triple star composition. `Aabc` composes the
/// forms inner-to-outer in the order `a, b, c` and reindexes the argument
/// cube so that the canonical blocks (first `deg K1` slots to `K1`, then
/// `K2`, then `K3`) are routed to the right forms.
#[derive(Copy, Clone, PartialEq, Eq, Debug)]
pub enum Arrangement {
    A123,
    A132,
    A213,
    A231,
    A312,
    A321,
}

impl Arrangement {
    pub const ALL: [Arrangement; 6] = [
        Arrangement::A123,
        Arrangement::A132,
        Arrangement::A213,
        Arrangement::A231,
        Arrangement::A312,
        Arrangement::A321,
    ];

    /// Inner-to-outer composition order as 0-based form indices.
    pub fn order(self) -> [usize; 3] {
        match self {
            Arrangement::A123 => [0, 1, 2],
            Arrangement::A132 => [0, 2, 1],
            Arrangement::A213 => [1, 0, 2],
            Arrangement::A231 => [1, 2, 0],
            Arrangement::A312 => [2, 0, 1],
            Arrangement::A321 => [2, 1, 0],
        }
    }
}

/// Block-routing permutation for a triple star: sends the star-order slot
/// groups to the canonical block positions of `K1, K2, K3`.
fn triple_block_perm(order: [usize; 3], degs: [usize; 3]) -> Permutation {
    let starts = [0, degs[0], degs[0] + degs[1]];
    let mut images = Vec::with_capacity(degs.iter().sum());
    for &which in &order {
        for t in 0..degs[which] {
            images.push(starts[which] + t);
        }
    }
    Permutation::from_images(images).expect("block routing is a permutation")
}

/// The family `φ_{abc}(d1,d2,d3)` of triple star compositions of three forms,
/// with tag `d_i` always bound to `K_i`. Evaluating on a cube of degree
/// `p+q+r` and extracting over `(d1,d2,d3)` gives a degree-3 cube whose
/// relativized strong differences realize the double brackets.
pub struct TriplePhi {
    forms: [Arc<dyn SemiForm>; 3],
}

impl TriplePhi {
    pub fn new(
        k1: Arc<dyn SemiForm>,
        k2: Arc<dyn SemiForm>,
        k3: Arc<dyn SemiForm>,
    ) -> Result<TriplePhi> {
        if k1.dim() != k2.dim() || k1.dim() != k3.dim() {
            return Err(Error::Dim {
                expected: k1.dim(),
                got: k2.dim().max(k3.dim()),
            });
        }
        Ok(TriplePhi {
            forms: [k1, k2, k3],
        })
    }

    pub fn degrees(&self) -> [usize; 3] {
        [
            self.forms[0].degree(),
            self.forms[1].degree(),
            self.forms[2].degree(),
        ]
    }

    pub fn total_degree(&self) -> usize {
        self.degrees().iter().sum()
    }

    /// The degree-3 cube of `φ_{abc}` at the given argument cube.
    pub fn phi_cube(
        &self,
        arrangement: Arrangement,
        cube: &WeilCube,
        pool: &mut TagPool,
    ) -> Result<WeilCube> {
        if cube.degree() != self.total_degree() {
            return Err(Error::Degree {
                expected: self.total_degree(),
                got: cube.degree(),
            });
        }
        let order = arrangement.order();
        // images[j] = cube slot feeding composition position j, so transport
        // by the permutation itself (as in the twisted square).
        let sigma = triple_block_perm(order, self.degrees());
        let acted = cube.permute(&sigma)?;
        let tags = pool.alloc_many(3)?;
        let bound: Vec<BoundForm> = (0..3)
            .map(|i| BoundForm {
                form: &*self.forms[i],
                tag: tags[i],
            })
            .collect();
        let inner_star = StarComposite {
            outer: &bound[order[1]],
            inner: &bound[order[0]],
        };
        let full_star = StarComposite {
            outer: &bound[order[2]],
            inner: &inner_star,
        };
        let v = full_star.apply(&acted, pool)?;
        let out = WeilCube::extract(&v, &tags);
        pool.release_all(&tags);
        Ok(out)
    }
}

/// The double bracket `⌈K1,⌈K2,K3⌉⌉` realized directly through the four
/// triple-composition cubes:
/// `(φ_123 −̇₁ φ_132) −̇ (φ_231 −̇₁ φ_321)`, before alternation.
pub struct PhiDifference {
    phi: TriplePhi,
    tol: f64,
}

impl PhiDifference {
    pub fn new(phi: TriplePhi) -> PhiDifference {
        PhiDifference {
            phi,
            tol: DEFAULT_TOL,
        }
    }
}

impl SemiForm for PhiDifference {
    fn dim(&self) -> usize {
        self.phi.forms[0].dim()
    }

    fn degree(&self) -> usize {
        self.phi.total_degree()
    }

    fn eval_weil(&self, d: Tag, cube: &WeilCube, pool: &mut TagPool) -> Result<WeilVector> {
        let c123 = self.phi.phi_cube(Arrangement::A123, cube, pool)?;
        let c132 = self.phi.phi_cube(Arrangement::A132, cube, pool)?;
        let c231 = self.phi.phi_cube(Arrangement::A231, cube, pool)?;
        let c321 = self.phi.phi_cube(Arrangement::A321, cube, pool)?;
        let internal = |e: Error| match e {
            Error::RelAgreement { gap, .. } | Error::D2Disagreement { gap, .. } => {
                Error::InternalAgreement {
                    context: "triple composition cubes disagree off the first axis",
                    gap,
                }
            }
            other => other,
        };
        let first = c123.rel_strong_diff(&c132, 1, self.tol).map_err(internal)?;
        let second = c231.rel_strong_diff(&c321, 1, self.tol).map_err(internal)?;
        let t: WeilTangent = first.strong_diff(&second, self.tol).map_err(internal)?;
        Ok(t.to_vector(d))
    }
}

/// Per-identity residuals of the graded Jacobi check on a batch of cubes.
pub struct GradedJacobiReport {
    /// `max |dir ⌈K1,⌈K2,K3⌉⌉ + (−1)^{p(q+r)} dir ⌈K2,⌈K3,K1⌉⌉ + (−1)^{r(p+q)} dir ⌈K3,⌈K1,K2⌉⌉|`.
    pub cyclic_residual: f64,
    /// Gap between `⌈K1,⌈K2,K3⌉⌉` and the alternated triple-composition
    /// difference `A_{p,q,r}((φ_123 −̇₁ φ_132) −̇ (φ_231 −̇₁ φ_321))`.
    pub phi_identity_gap: f64,
    /// Gap between `A_{p,q+r}(⌊K1, A_{q,r}⌊K2,K3⌋⌋)` and `A_{p,q,r}(⌊K1,⌊K2,K3⌋⌋)`.
    pub alternation_assoc_gap: f64,
}

pub fn graded_jacobi_check(
    k1: Arc<dyn SemiForm>,
    k2: Arc<dyn SemiForm>,
    k3: Arc<dyn SemiForm>,
    cubes: &[Microcube],
) -> Result<GradedJacobiReport> {
    let (p, q, r) = (k1.degree(), k2.degree(), k3.degree());
    let sign1 = if (p * (q + r)) % 2 == 0 { 1.0 } else { -1.0 };
    let sign2 = if (r * (p + q)) % 2 == 0 { 1.0 } else { -1.0 };

    let j1 = fn_bracket(k1.clone(), Arc::new(fn_bracket(k2.clone(), k3.clone())?))?;
    let j2 = fn_bracket(k2.clone(), Arc::new(fn_bracket(k3.clone(), k1.clone())?))?;
    let j3 = fn_bracket(k3.clone(), Arc::new(fn_bracket(k1.clone(), k2.clone())?))?;

    let phi = TriplePhi::new(k1.clone(), k2.clone(), k3.clone())?;
    let phi_alt = alternate(Arc::new(PhiDifference::new(phi)), weight_pqr(p, q, r));

    let mut cyclic = 0.0f64;
    let mut phi_gap = 0.0f64;
    for cube in cubes {
        let t1 = crate::forms::eval_on_real(&j1, cube)?;
        let t2 = crate::forms::eval_on_real(&j2, cube)?;
        let t3 = crate::forms::eval_on_real(&j3, cube)?;
        for c in 0..t1.dir.len() {
            cyclic = cyclic.max((t1.dir[c] + sign1 * t2.dir[c] + sign2 * t3.dir[c]).abs());
        }
        let tp = crate::forms::eval_on_real(&phi_alt, cube)?;
        for c in 0..t1.dir.len() {
            phi_gap = phi_gap.max((t1.dir[c] - tp.dir[c]).abs());
        }
    }
    let assoc_gap = alternation_associativity_gap(k1, k2, k3, cubes)?;
    Ok(GradedJacobiReport {
        cyclic_residual: cyclic,
        phi_identity_gap: phi_gap,
        alternation_assoc_gap: assoc_gap,
    })
}

/// Just the alternation-associativity gap (the normalization identity used in
/// the graded Jacobi proof), for the dedicated suite.
pub fn alternation_associativity_gap(
    k1: Arc<dyn SemiForm>,
    k2: Arc<dyn SemiForm>,
    k3: Arc<dyn SemiForm>,
    cubes: &[Microcube],
) -> Result<f64> {
    let (p, q, r) = (k1.degree(), k2.degree(), k3.degree());
    let lhs = alternate(
        Arc::new(bracket_floor(
            k1.clone(),
            Arc::new(alternate(
                Arc::new(bracket_floor(k2.clone(), k3.clone())?),
                weight_pq(q, r),
            )),
        )?),
        weight_pq(p, q + r),
    );
    let rhs = alternate(
        Arc::new(bracket_floor(k1, Arc::new(bracket_floor(k2, k3)?))?),
        weight_pqr(p, q, r),
    );
    let mut gap = 0.0f64;
    for cube in cubes {
        let a = crate::forms::eval_on_real(&lhs, cube)?;
        let b = crate::forms::eval_on_real(&rhs, cube)?;
        for c in 0..a.dir.len() {
            gap = gap.max((a.dir[c] - b.dir[c]).abs());
        }
    }
    Ok(gap)
}

// ---------------------------------------------------------------------------
// File format
// ---------------------------------------------------------------------------

/// JSON shape of a connection:
/// `{"dim": m, "symmetric": bool, "gamma": [{"upper": k, "lower": [i,j], "coeff": {...}}]}`.
/// Missing `(k,i,j)` entries are zero; duplicates are rejected.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ConnectionSpec {
    pub dim: usize,
    pub symmetric: bool,
    pub gamma: Vec<GammaSpec>,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct GammaSpec {
    pub upper: usize,
    pub lower: [usize; 2],
    pub coeff: PolyExprSpec,
}

impl ConnectionSpec {
    pub fn to_connection(&self) -> Result<Connection> {
        let m = self.dim;
        let mut gamma = vec![PolyExpr::zero(m); m * m * m];
        let mut seen = vec![false; m * m * m];
        for g in &self.gamma {
            let (k, i, j) = (g.upper, g.lower[0], g.lower[1]);
            if k == 0 || k > m || i == 0 || i > m || j == 0 || j > m {
                return Err(Error::InvalidSpec(format!(
                    "christoffel indices ({k},{i},{j}) out of range 1..={m}"
                )));
            }
            let idx = ((k - 1) * m + (i - 1)) * m + (j - 1);
            if seen[idx] {
                return Err(Error::InvalidSpec(format!(
                    "duplicate christoffel entry ({k},{i},{j})"
                )));
            }
            seen[idx] = true;
            gamma[idx] = g.coeff.to_poly(m)?;
        }
        Connection::new(m, self.symmetric, gamma)
    }

    pub fn from_json(s: &str) -> Result<ConnectionSpec> {
        serde_json::from_str(s).map_err(|e| Error::InvalidSpec(format!("connection file: {e}")))
    }
}
