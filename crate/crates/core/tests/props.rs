//! Property tests for the exact linear-algebra substrate and the action
//! layer: the algebraic laws the rest of the tower leans on.

use dvb_core::homog::{
    is_equivariant, is_equivariant_at_samples, pullback_bundle, quotient_action, recover_action,
    ScalingAction, VBSpace,
};
use dvb_core::linalg::{
    fiber_product, induced_quotient_map, is_exact_at, LinMap, QuotientPresentation, Subspace,
};
use dvb_core::matrix::Matrix;
use dvb_core::rat::{rat, ratq, Rat};
use proptest::prelude::*;

fn arb_rat() -> impl Strategy<Value = Rat> {
    (-4i64..=4, 1i64..=3).prop_map(|(p, q)| ratq(p, q))
}

fn arb_matrix(rows: usize, cols: usize) -> impl Strategy<Value = Matrix> {
    proptest::collection::vec(arb_rat(), rows * cols).prop_map(move |v| Matrix::new(rows, cols, v))
}

fn arb_dims() -> impl Strategy<Value = (usize, usize)> {
    (1usize..=4, 1usize..=4)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(100))]

    #[test]
    fn rank_nullity((r, c) in arb_dims(), m in arb_matrix(4, 4)) {
        let rows: Vec<usize> = (0..r).collect();
        let cols: Vec<usize> = (0..c).collect();
        let f = LinMap::new(m.select(&rows, &cols));
        prop_assert_eq!(f.rank() + f.kernel().dim(), f.dom);
    }

    #[test]
    fn rref_is_a_canonical_form(m in arb_matrix(3, 4), t in arb_matrix(3, 3)) {
        // row-equivalent matrices (multiply by an invertible) share the RREF
        prop_assume!(t.rank() == 3);
        let (r1, _) = m.rref();
        let (r2, _) = t.mul_mat(&m).rref();
        prop_assert_eq!(r1, r2);
    }

    #[test]
    fn fiber_product_universal_property(
        f in arb_matrix(2, 3),
        g in arb_matrix(2, 2),
        u in arb_matrix(3, 2),
    ) {
        let f = LinMap::new(f);
        let g = LinMap::new(g);
        let fp = fiber_product(&f, &g).unwrap();
        // cone from the fiber product itself must factor back to the identity
        let fac = fp.factor(
            &LinMap::new(fp.pr1.mat.clone()),
            &LinMap::new(fp.pr2.mat.clone()),
        ).unwrap();
        prop_assert_eq!(&fac, &LinMap::identity(fp.dim));
        // arbitrary cones: u into A, solve v so that f∘u = g∘v when possible
        let fu = f.compose(&LinMap::new(u.clone()));
        if let Ok(v) = g.mat.solve_matrix(&fu.mat) {
            let u = LinMap::new(u);
            let v = LinMap::new(v);
            let fac = fp.factor(&u, &v).unwrap();
            prop_assert_eq!(fp.pr1.compose(&fac), u);
            prop_assert_eq!(fp.pr2.compose(&fac), v);
            // uniqueness: the inclusion is injective, so any two factorings
            // with the same cone agree
            prop_assert!(LinMap::new(fp.incl.mat.clone()).is_injective());
        }
    }

    #[test]
    fn quotient_presentation_laws(m in arb_matrix(2, 4)) {
        let sub = Subspace::from_spanning(4, &m);
        let q = QuotientPresentation::new(4, sub.clone());
        prop_assert_eq!(q.proj.compose(&q.sec), LinMap::identity(q.dim));
        // sec∘proj is the identity modulo the subspace
        let diff = &Matrix::identity(4) - &q.sec.mat.mul_mat(&q.proj.mat);
        for col in 0..4 {
            let v: Vec<Rat> = (0..4).map(|r| diff.at(r, col).clone()).collect();
            prop_assert!(sub.contains_vec(&v));
        }
        prop_assert_eq!(q.proj.kernel(), sub);
    }

    #[test]
    fn induced_quotient_functoriality(
        d1 in arb_matrix(2, 2),
        d2 in arb_matrix(2, 2),
    ) {
        // maps preserving span(e1) in ℚ²: upper-triangular
        let tri = |m: &Matrix| {
            let mut t = m.clone();
            *t.at_mut(1, 0) = rat(0);
            LinMap::new(t)
        };
        let phi = tri(&d1);
        let phi2 = tri(&d2);
        let sub = Subspace::from_spanning(2, &Matrix::from_int_rows(&[&[1, 0]]));
        let q = QuotientPresentation::new(2, sub);
        let a = induced_quotient_map(&phi, &q, &q).unwrap();
        let b = induced_quotient_map(&phi2, &q, &q).unwrap();
        let ab = induced_quotient_map(&phi2.compose(&phi), &q, &q).unwrap();
        prop_assert_eq!(ab, b.compose(&a));
    }

    #[test]
    fn linear_cospans_are_good(
        f in arb_matrix(2, 2),
        g in arb_matrix(2, 3),
    ) {
        // the two exactness conditions of the good-cospan remark hold for
        // every linear cospan
        let f = LinMap::new(f);
        let g = LinMap::new(g);
        let fp = fiber_product(&f, &g).unwrap();
        let incl = LinMap::new(fp.incl.mat.clone());
        let diff = f.from_pair(&LinMap::new(g.mat.scale(&rat(-1))));
        prop_assert!(is_exact_at(&incl, &diff).unwrap());
        // and the tangent-level sequence (block doubling) is exact as well
        let tf = f.direct_sum(&f);
        let tg = g.direct_sum(&g);
        let tfp = fiber_product(&tf, &tg).unwrap();
        let tincl = LinMap::new(tfp.incl.mat.clone());
        let tdiff = tf.from_pair(&LinMap::new(tg.mat.scale(&rat(-1))));
        prop_assert!(is_exact_at(&tincl, &tdiff).unwrap());
    }

    #[test]
    fn action_round_trip_and_samples(weights in proptest::collection::vec(0u32..=2, 1..=4)) {
        let a = ScalingAction::diagonal(&weights);
        // recover from the sample at 2
        let b = recover_action(weights.len(), &a.evaluate(&rat(2))).unwrap();
        prop_assert_eq!(&a, &b);
        // sample sufficiency: projection-wise equivariance agrees with the
        // sample test at {0,2,3} for weight ≤ 2 actions
        let f = LinMap::identity(weights.len());
        let samples = [rat(0), rat(2), rat(3)];
        prop_assert_eq!(
            is_equivariant(&f, &a, &a).unwrap(),
            is_equivariant_at_samples(&f, &a, &a, &samples)
        );
    }

    #[test]
    fn pullback_and_quotient_commute_with_evaluate(
        h in arb_matrix(2, 2),
        lambda in arb_rat(),
    ) {
        let e = VBSpace::new(ScalingAction::diagonal(&[0, 0, 1, 1])).unwrap();
        let h = LinMap::new(h);
        let pb = pullback_bundle(&h, &e).unwrap();
        // evaluate of the pulled-back action is the restriction of the
        // ambient evaluate
        let amb = ScalingAction::trivial(2).product(&e.action);
        let lhs = pb.incl.compose(&pb.total.action.evaluate(&lambda));
        let rhs = amb.evaluate(&lambda).compose(&pb.incl);
        prop_assert_eq!(lhs, rhs);
        // quotient: evaluate descends through the presentation
        let line = Subspace::from_spanning(4, &Matrix::from_int_rows(&[&[0, 0, 1, 0]]));
        let (q, pres) = quotient_action(&e, &line).unwrap();
        let lhs = q.action.evaluate(&lambda).compose(&LinMap::new(pres.proj.mat.clone()));
        let rhs = LinMap::new(pres.proj.mat.clone()).compose(&e.action.evaluate(&lambda));
        prop_assert_eq!(lhs, rhs);
    }
}
