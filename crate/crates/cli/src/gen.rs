//! Seeded generators for every constrained input the suites need: cubes,
//! polynomial kernels, unitriangular diffeomorphisms with exact inverses,
//! symmetric connections, admissible sextuples.
//!
//! All generators are deterministic functions of the supplied RNG; suites
//! derive one RNG per trial from `seed ⊕ trial_index`.

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use fncalc_core::calculus::Connection;
use fncalc_core::forms::{FormKernel, KernelTerm, VectorForm};
use fncalc_core::microcube::{Microcube, Permutation, PolyMap};
use fncalc_core::oracle::{DecomposableVF, ScalarForm, VectorField, VectorValuedForm};
use fncalc_core::weil::PolyExpr;

pub fn rng_for(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Per-trial sub-seed: `seed ⊕ trial_index`.
pub fn trial_seed(seed: u64, trial: u64) -> u64 {
    seed ^ trial
}

fn coeff(rng: &mut ChaCha8Rng, bound: f64) -> f64 {
    rng.gen_range(-bound..=bound)
}

fn vector(rng: &mut ChaCha8Rng, m: usize, bound: f64) -> Vec<f64> {
    (0..m).map(|_| coeff(rng, bound)).collect()
}

pub fn gen_point(rng: &mut ChaCha8Rng, m: usize, bound: f64) -> Vec<f64> {
    vector(rng, m, bound)
}

pub fn sample_points(rng: &mut ChaCha8Rng, m: usize, count: usize, bound: f64) -> Vec<Vec<f64>> {
    (0..count).map(|_| vector(rng, m, bound)).collect()
}

pub fn gen_microcube(rng: &mut ChaCha8Rng, n: usize, m: usize, bound: f64) -> Microcube {
    let coeffs = (0..1usize << n).map(|_| vector(rng, m, bound)).collect();
    Microcube::new(n, m, coeffs).expect("generated table is well-formed")
}

/// A random sparse polynomial of bounded total degree (1–3 terms).
pub fn gen_poly(rng: &mut ChaCha8Rng, vars: usize, max_degree: u32, bound: f64) -> PolyExpr {
    let n_terms = rng.gen_range(1..=3usize);
    let mut terms = Vec::with_capacity(n_terms);
    for _ in 0..n_terms {
        let mut remaining = max_degree;
        let mut e = vec![0u32; vars];
        for slot in e.iter_mut() {
            let k = rng.gen_range(0..=remaining);
            *slot = k;
            remaining -= k;
        }
        terms.push((e, coeff(rng, bound)));
    }
    PolyExpr::from_terms(vars, terms).expect("generated terms are well-formed")
}

/// All strictly increasing index lists of length `p` over `1..=m`.
pub fn increasing_subsets(m: usize, p: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    let mut current = Vec::with_capacity(p);
    fn rec(start: usize, m: usize, p: usize, current: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if current.len() == p {
            out.push(current.clone());
            return;
        }
        for i in start..=m {
            current.push(i);
            rec(i + 1, m, p, current, out);
            current.pop();
        }
    }
    rec(1, m, p, &mut current, &mut out);
    out
}

/// A random kernel form of the given degree (zero if `p > m`).
pub fn gen_form(
    rng: &mut ChaCha8Rng,
    m: usize,
    p: usize,
    max_degree: u32,
    bound: f64,
) -> VectorForm {
    if p > m {
        return VectorForm::zero(m, p);
    }
    let combos = increasing_subsets(m, p);
    let mut terms = Vec::new();
    for cov in &combos {
        for out in 1..=m {
            if rng.gen_bool(0.5) {
                terms.push(KernelTerm {
                    covariant: cov.clone(),
                    output: out,
                    coeff: gen_poly(rng, m, max_degree, bound),
                });
            }
        }
    }
    if terms.is_empty() {
        terms.push(KernelTerm {
            covariant: combos[0].clone(),
            output: rng.gen_range(1..=m),
            coeff: gen_poly(rng, m, max_degree, bound),
        });
    }
    VectorForm::new(FormKernel::new(m, p, terms).expect("generated kernel is valid"))
}

/// A random polynomial map `R^m → R^{m'}` (not necessarily invertible).
pub fn gen_polymap(
    rng: &mut ChaCha8Rng,
    source: usize,
    target: usize,
    max_degree: u32,
    bound: f64,
) -> PolyMap {
    let comps = (0..target)
        .map(|_| gen_poly(rng, source, max_degree, bound))
        .collect();
    PolyMap::new(source, comps).expect("generated components are well-formed")
}

/// A random unitriangular diffeomorphism `x_i ↦ x_i + poly(x_1..x_{i-1})`
/// together with its exact symbolic inverse.
pub fn gen_diffeo(rng: &mut ChaCha8Rng, m: usize, bound: f64) -> (PolyMap, PolyMap) {
    let mut comps = Vec::with_capacity(m);
    for i in 0..m {
        let mut f_i = PolyExpr::var(m, i).expect("index in range");
        if i > 0 {
            let n_terms = rng.gen_range(1..=2usize);
            let mut terms = Vec::new();
            for _ in 0..n_terms {
                let mut e = vec![0u32; m];
                let mut remaining = 2u32;
                for slot in e.iter_mut().take(i) {
                    let k = rng.gen_range(0..=remaining);
                    *slot = k;
                    remaining -= k;
                }
                terms.push((e, coeff(rng, bound)));
            }
            f_i = f_i.add(&PolyExpr::from_terms(m, terms).expect("triangular terms"));
        }
        comps.push(f_i);
    }
    let f = PolyMap::new(m, comps).expect("triangular map is well-formed");
    let inv = f
        .unitriangular_inverse()
        .expect("unitriangular by construction");
    (f, inv)
}

pub fn gen_connection(
    rng: &mut ChaCha8Rng,
    m: usize,
    symmetric: bool,
    max_degree: u32,
    bound: f64,
) -> Connection {
    let mut gamma = vec![PolyExpr::zero(m); m * m * m];
    for k in 0..m {
        for i in 0..m {
            for j in 0..m {
                if symmetric && j < i {
                    continue;
                }
                let g = gen_poly(rng, m, max_degree, bound);
                gamma[(k * m + i) * m + j] = g.clone();
                if symmetric && j > i {
                    gamma[(k * m + j) * m + i] = g;
                }
            }
        }
    }
    Connection::new(m, symmetric, gamma).expect("generated data is consistent")
}

/// A pair of microsquares agreeing on `D(2)` (only the mixed slot differs).
pub fn gen_square_pair(rng: &mut ChaCha8Rng, m: usize, bound: f64) -> (Microcube, Microcube) {
    let g1 = gen_microcube(rng, 2, m, bound);
    let mut g2 = g1.clone();
    *g2.coeff_mut(3) = vector(rng, m, bound);
    (g1, g2)
}

/// An admissible sextuple `(γ_123, γ_132, γ_213, γ_231, γ_312, γ_321)` of
/// degree-3 cubes for the general Jacobi residual.
///
/// Shared `a_∅, a_1, a_2, a_3`; the three mixed slots each take one of two
/// values following the pattern that solves the six agreement constraints:
/// `a_12 = u` on {123,132,312} and `v` on {213,231,321}; `a_13 = u'` on
/// {123,132,213} and `v'` on {231,312,321}; `a_23 = u''` on {123,213,231} and
/// `v''` on {132,312,321}; the six top coefficients are free. With
/// `degenerate` the two values of each pair coincide and the tops are equal.
pub fn gen_sextuple(
    rng: &mut ChaCha8Rng,
    m: usize,
    bound: f64,
    degenerate: bool,
) -> [Microcube; 6] {
    let base = vector(rng, m, bound);
    let a1 = vector(rng, m, bound);
    let a2 = vector(rng, m, bound);
    let a3 = vector(rng, m, bound);
    let two = |rng: &mut ChaCha8Rng| {
        let u = vector(rng, m, bound);
        let v = if degenerate {
            u.clone()
        } else {
            vector(rng, m, bound)
        };
        (u, v)
    };
    let (u12, v12) = two(rng);
    let (u13, v13) = two(rng);
    let (u23, v23) = two(rng);
    let top0 = vector(rng, m, bound);
    let tops: Vec<Vec<f64>> = if degenerate {
        vec![top0; 6]
    } else {
        let mut t = vec![top0];
        for _ in 1..6 {
            t.push(vector(rng, m, bound));
        }
        t
    };

    // cube order: 123, 132, 213, 231, 312, 321
    let pick12 = [&u12, &u12, &v12, &v12, &u12, &v12];
    let pick13 = [&u13, &u13, &u13, &v13, &v13, &v13];
    let pick23 = [&u23, &v23, &u23, &u23, &v23, &v23];

    std::array::from_fn(|c| {
        let mut g = Microcube::zero(3, m);
        *g.coeff_mut(0b000) = base.clone();
        *g.coeff_mut(0b001) = a1.clone();
        *g.coeff_mut(0b010) = a2.clone();
        *g.coeff_mut(0b100) = a3.clone();
        *g.coeff_mut(0b011) = pick12[c].clone();
        *g.coeff_mut(0b101) = pick13[c].clone();
        *g.coeff_mut(0b110) = pick23[c].clone();
        *g.coeff_mut(0b111) = tops[c].clone();
        g
    })
}

/// A random scalar `p`-form for the oracle.
pub fn gen_scalar_form(
    rng: &mut ChaCha8Rng,
    m: usize,
    p: usize,
    max_degree: u32,
    bound: f64,
) -> ScalarForm {
    if p > m {
        return ScalarForm::zero(m, p);
    }
    let combos = increasing_subsets(m, p);
    let mut terms: Vec<(Vec<u8>, PolyExpr)> = Vec::new();
    for cov in &combos {
        if rng.gen_bool(0.6) {
            terms.push((
                cov.iter().map(|&i| i as u8).collect(),
                gen_poly(rng, m, max_degree, bound),
            ));
        }
    }
    if terms.is_empty() {
        terms.push((
            combos[0].iter().map(|&i| i as u8).collect(),
            gen_poly(rng, m, max_degree, bound),
        ));
    }
    ScalarForm::from_terms(m, p, terms).expect("generated scalar form is valid")
}

pub fn gen_field(rng: &mut ChaCha8Rng, m: usize, max_degree: u32, bound: f64) -> VectorField {
    VectorField::new(
        (0..m)
            .map(|_| gen_poly(rng, m, max_degree, bound))
            .collect(),
    )
    .expect("generated field is well-formed")
}

/// A random sum of 1–2 decomposables `φ⊗X` of the given degree.
pub fn gen_decomposable(
    rng: &mut ChaCha8Rng,
    m: usize,
    p: usize,
    max_degree: u32,
    bound: f64,
) -> VectorValuedForm {
    let n_pieces = rng.gen_range(1..=2usize);
    let pieces = (0..n_pieces)
        .map(|_| {
            DecomposableVF::new(
                gen_scalar_form(rng, m, p, max_degree, bound),
                gen_field(rng, m, max_degree, bound),
            )
            .expect("dims agree")
        })
        .collect();
    VectorValuedForm::from_pieces(m, p, pieces).expect("degrees agree")
}

/// A random permutation of `{1..n}`.
pub fn gen_permutation(rng: &mut ChaCha8Rng, n: usize) -> Permutation {
    let all = Permutation::all(n);
    all[rng.gen_range(0..all.len())].clone()
}
