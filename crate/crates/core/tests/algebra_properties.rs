//! Property tests for the ring axioms of the nilpotent algebra, the
//! polynomial-evaluation homomorphism, and the coefficient-table actions.

use proptest::prelude::*;

use fncalc_core::microcube::{Microcube, Permutation};
use fncalc_core::weil::{PolyExpr, Tag, TagSet, WeilElement};

const TOL: f64 = 1e-12;

fn tag(i: usize) -> Tag {
    Tag::new(i).unwrap()
}

/// Elements over tags {0,1,2} with bounded coefficients.
fn arb_weil() -> impl Strategy<Value = WeilElement> {
    proptest::collection::vec(-2.0f64..2.0, 8).prop_map(|cs| {
        let tags = [tag(0), tag(1), tag(2)];
        let monomials = (0..8usize).map(|mask| {
            let mut s = TagSet::EMPTY;
            for (b, t) in tags.iter().enumerate() {
                if mask & (1 << b) != 0 {
                    s = s.insert(*t);
                }
            }
            (s, cs[mask])
        });
        WeilElement::from_monomials(monomials)
    })
}

/// Sparse polynomials in two variables of total degree ≤ 3.
fn arb_poly() -> impl Strategy<Value = PolyExpr> {
    proptest::collection::vec(((0u32..3, 0u32..3), -2.0f64..2.0), 1..5).prop_map(|terms| {
        PolyExpr::from_terms(2, terms.into_iter().map(|((e1, e2), c)| (vec![e1, e2], c))).unwrap()
    })
}

proptest! {
    #[test]
    fn ring_addition_commutes(a in arb_weil(), b in arb_weil()) {
        prop_assert!(a.add(&b).approx_eq(&b.add(&a), TOL));
    }

    #[test]
    fn ring_multiplication_commutes(a in arb_weil(), b in arb_weil()) {
        prop_assert!(a.mul(&b).approx_eq(&b.mul(&a), TOL));
    }

    #[test]
    fn ring_multiplication_associates(a in arb_weil(), b in arb_weil(), c in arb_weil()) {
        prop_assert!(a.mul(&b).mul(&c).approx_eq(&a.mul(&b.mul(&c)), TOL));
    }

    #[test]
    fn ring_distributes(a in arb_weil(), b in arb_weil(), c in arb_weil()) {
        let lhs = a.mul(&b.add(&c));
        let rhs = a.mul(&b).add(&a.mul(&c));
        prop_assert!(lhs.approx_eq(&rhs, TOL));
    }

    #[test]
    fn tag_part_decomposition(a in arb_weil()) {
        // a = set_zero(a, t) + ε_t · cofactor(a, t), and the t-part holds
        // exactly the monomials containing t.
        let t = tag(1);
        let rebuilt = a.set_zero(t).add(&a.tag_cofactor(t).mul(&WeilElement::tag(t)));
        prop_assert!(rebuilt.approx_eq(&a, 0.0));
        for (s, _) in a.set_zero(t).monomials() {
            prop_assert!(!s.contains(t));
        }
    }

    #[test]
    fn eval_is_a_ring_homomorphism(p in arb_poly(), q in arb_poly(), a in arb_weil(), b in arb_weil()) {
        let args = [a, b];
        let lhs = p.mul(&q).eval_weil(&args).unwrap();
        let rhs = p.eval_weil(&args).unwrap().mul(&q.eval_weil(&args).unwrap());
        // products of degree-3 polys over |coeff| ≤ 2 stay well inside 1e-9
        prop_assert!(lhs.approx_eq(&rhs, 1e-9));
        let lhs_add = p.add(&q).eval_weil(&args).unwrap();
        let rhs_add = p.eval_weil(&args).unwrap().add(&q.eval_weil(&args).unwrap());
        prop_assert!(lhs_add.approx_eq(&rhs_add, 1e-9));
    }

    #[test]
    fn taylor_exactness_on_a_single_tag(p in arb_poly(), x0 in -2.0f64..2.0, y0 in -2.0f64..2.0, c in -2.0f64..2.0) {
        // p(x0 + c·d, y0) = p(x0, y0) + c·∂₁p(x0, y0)·d
        let d = tag(5);
        let arg0 = WeilElement::constant(x0).add(&WeilElement::tag(d).scale(c));
        let v = p.eval_weil(&[arg0, WeilElement::constant(y0)]).unwrap();
        let expect0 = p.eval_f64(&[x0, y0]).unwrap();
        let expect1 = c * p.partial(0).eval_f64(&[x0, y0]).unwrap();
        prop_assert!((v.coeff(TagSet::EMPTY) - expect0).abs() <= 1e-10);
        prop_assert!((v.coeff(TagSet::singleton(d)) - expect1).abs() <= 1e-10);
        prop_assert_eq!(v.monomials().filter(|(s, _)| s.len() > 1).count(), 0);
    }
}

fn arb_cube(n: usize) -> impl Strategy<Value = Microcube> {
    proptest::collection::vec(-2.0f64..2.0, 1 << n).prop_map(move |cs| {
        Microcube::new(n, 1, cs.into_iter().map(|c| vec![c]).collect()).unwrap()
    })
}

fn arb_perm(n: usize) -> impl Strategy<Value = Permutation> {
    let count = Permutation::all(n).len();
    (0..count).prop_map(move |i| Permutation::all(n)[i].clone())
}

proptest! {
    #[test]
    fn cube_permutation_right_action(g in arb_cube(3), s in arb_perm(3), t in arb_perm(3)) {
        let step = g.permute(&s).unwrap().permute(&t).unwrap();
        let joint = g.permute(&s.compose(&t).unwrap()).unwrap();
        prop_assert!(step.approx_eq(&joint, 0.0));
    }

    #[test]
    fn cube_eval_extract_round_trip(g in arb_cube(3)) {
        let tags = [tag(2), tag(4), tag(6)];
        let args: Vec<WeilElement> = tags.iter().map(|&t| WeilElement::tag(t)).collect();
        let v = g.eval(&args).unwrap();
        let back = Microcube::extract(&v, &tags).unwrap();
        prop_assert!(back.approx_eq(&g, 0.0));
    }

    #[test]
    fn strong_diff_additive_across_three_squares(
        base in proptest::collection::vec(-2.0f64..2.0, 3),
        tops in proptest::collection::vec(-2.0f64..2.0, 3),
    ) {
        let mk = |top: f64| {
            Microcube::new(2, 1, vec![vec![base[0]], vec![base[1]], vec![base[2]], vec![top]]).unwrap()
        };
        let (g1, g2, g3) = (mk(tops[0]), mk(tops[1]), mk(tops[2]));
        let d12 = g1.strong_diff(&g2, 1e-9).unwrap();
        let d23 = g2.strong_diff(&g3, 1e-9).unwrap();
        let d13 = g1.strong_diff(&g3, 1e-9).unwrap();
        prop_assert!((d12.dir[0] + d23.dir[0] - d13.dir[0]).abs() <= 1e-12);
    }
}

#[test]
fn engine_values_are_send_and_sync() {
    // Immutable values and pure evaluators transfer freely across threads.
    fn assert_send_sync<T: Send + Sync>() {}
    assert_send_sync::<fncalc_core::weil::WeilElement>();
    assert_send_sync::<fncalc_core::weil::WeilVector>();
    assert_send_sync::<fncalc_core::weil::PolyExpr>();
    assert_send_sync::<fncalc_core::microcube::Microcube>();
    assert_send_sync::<fncalc_core::microcube::WeilCube>();
    assert_send_sync::<fncalc_core::calculus::Connection>();
    assert_send_sync::<std::sync::Arc<dyn fncalc_core::forms::SemiForm>>();
}
