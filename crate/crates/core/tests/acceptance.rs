//! Acceptance suite: every verification target of the library, run at full
//! sample counts with exact (zero-tolerance) arithmetic, one criterion per
//! section, one pass/fail line each.
//!
//! Run with `--release` for the stated time budgets; the budgets are asserted
//! in optimized builds and reported otherwise.

use dvb_core::dblcat::{check_interchange, lin_sq_law_suite, sample_grid, LinSq};
use dvb_core::dvb::{
    quotient_dvb_map, quotient_flip, quotient_h, quotient_v, side_pullback_v, DvbMap, Dvs, FlipMap,
};
use dvb_core::homog::{quotient_action, ScalingAction, VBMap, VBSpace};
use dvb_core::linalg::{induced_quotient_map, trivial_presentation, LinMap, Subspace};
use dvb_core::matrix::Matrix;
use dvb_core::normal::{
    normal_differential, tangent_map, tangent_of_vb_map, vertical_functoriality, Direction, TwoMap,
};
use dvb_core::rat::rat;
use dvb_core::symmetry::{
    all_lemmas, corner_square, is_regular, random_regular_square, random_square, DimBounds,
    ImmersionSquare, SquareContext,
};
use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use std::time::Instant;

struct Budget {
    name: &'static str,
    start: Instant,
    limit_secs: f64,
}

impl Budget {
    fn start(name: &'static str, limit_secs: f64) -> Self {
        Budget {
            name,
            start: Instant::now(),
            limit_secs,
        }
    }

    fn finish(self, detail: String) {
        let secs = self.start.elapsed().as_secs_f64();
        println!("criterion {:<28} PASS  ({detail}, {secs:.2}s)", self.name);
        #[cfg(not(debug_assertions))]
        assert!(
            secs < self.limit_secs,
            "criterion {} exceeded its {}s budget: {secs:.2}s",
            self.name,
            self.limit_secs
        );
        #[cfg(debug_assertions)]
        let _ = self.limit_secs;
    }
}

fn mixed_bounds(k: u64) -> DimBounds {
    // small regular-feasible shapes, ambient dims ≤ 6
    let table = [
        DimBounds {
            m1: 1,
            n1: 2,
            m2: 2,
            n2: 4,
        },
        DimBounds {
            m1: 1,
            n1: 2,
            m2: 3,
            n2: 5,
        },
        DimBounds {
            m1: 2,
            n1: 3,
            m2: 2,
            n2: 4,
        },
        DimBounds {
            m1: 1,
            n1: 3,
            m2: 2,
            n2: 5,
        },
        DimBounds {
            m1: 2,
            n1: 3,
            m2: 3,
            n2: 6,
        },
        DimBounds {
            m1: 1,
            n1: 1,
            m2: 1,
            n2: 2,
        },
    ];
    table[(k % table.len() as u64) as usize]
}

fn counterexample_square() -> ImmersionSquare {
    let inc = |dom: usize, cod: usize| {
        LinMap::new(Matrix::identity(dom).vstack(&Matrix::zero(cod - dom, dom)))
    };
    ImmersionSquare::new(inc(1, 3), inc(5, 6), inc(1, 5), inc(3, 6)).unwrap()
}

// ---------------------------------------------------------------------------
// criterion 1: the three regularity criteria agree on ≥500 mixed squares
// ---------------------------------------------------------------------------
fn criterion_regularity_equivalence() {
    let b = Budget::start("1 regularity-equivalence", 10.0);
    let mut total = 0usize;
    let mut regular = 0usize;
    for seed in 0..160u64 {
        let bounds = mixed_bounds(seed);
        if let Ok(sq) = random_square(seed, bounds) {
            let (is_reg, report) = is_regular(&sq).unwrap();
            assert!(report.agree(), "criteria disagree at seed {seed}");
            total += 1;
            regular += usize::from(is_reg);
        }
    }
    // dimension-tight shapes where exactness cannot hold: every sample is
    // non-regular and the criteria still agree
    let tight = [
        DimBounds {
            m1: 1,
            n1: 3,
            m2: 3,
            n2: 4,
        },
        DimBounds {
            m1: 1,
            n1: 4,
            m2: 2,
            n2: 4,
        },
        DimBounds {
            m1: 2,
            n1: 4,
            m2: 4,
            n2: 5,
        },
    ];
    for seed in 0..120u64 {
        let bounds = tight[(seed % 3) as usize];
        if let Ok(sq) = random_square(seed, bounds) {
            let (is_reg, report) = is_regular(&sq).unwrap();
            assert!(report.agree(), "criteria disagree at tight seed {seed}");
            assert!(!is_reg, "tight bounds cannot be regular");
            total += 1;
        }
    }
    for seed in 0..250u64 {
        let sq = random_regular_square(seed, mixed_bounds(seed)).unwrap();
        let (is_reg, report) = is_regular(&sq).unwrap();
        assert!(is_reg && report.agree());
        total += 1;
        regular += 1;
    }
    let (is_reg, report) = is_regular(&counterexample_square()).unwrap();
    assert!(!is_reg && report.agree());
    total += 1;
    assert!(total >= 500, "need at least 500 samples, got {total}");
    assert!(regular < total, "need non-regular samples in the mix");
    b.finish(format!("{total} squares, {regular} regular"));
}

// ---------------------------------------------------------------------------
// criteria 2, 4, 8: the symmetry theorem, the lemma suite, the core formula
// ---------------------------------------------------------------------------
fn criterion_symmetry_lemmas_core() {
    let b2 = Budget::start("2 symmetry-theorem", 60.0);
    let mut lemma_squares = 0usize;
    let samples = [rat(0), rat(2), rat(3)];
    for seed in 0..200u64 {
        let sq = random_regular_square(seed, mixed_bounds(seed)).unwrap();
        let ctx = SquareContext::new(&sq).unwrap();
        let lam = &ctx.lambda;
        assert!(lam.map.is_bijective(), "seed {seed}: Λ not bijective");
        for l in &samples {
            let dj = &ctx.dn_j.q.total;
            let di = &ctx.dn_i.q.total;
            assert_eq!(
                lam.map.compose(&dj.h.evaluate(l)),
                di.v.evaluate(l).compose(&lam.map),
                "seed {seed}: Λ not flip-equivariant at {l}"
            );
            assert_eq!(
                lam.map.compose(&dj.v.evaluate(l)),
                di.h.evaluate(l).compose(&lam.map),
                "seed {seed}: Λ not flip-equivariant at {l}"
            );
        }
        assert_eq!(
            ctx.lambda_alt.map, lam.map,
            "seed {seed}: the two constructions disagree"
        );
        // criterion 8 on every regular sample: the core formula by the
        // independent rank oracle
        let oracle = sq.core_rank_oracle();
        assert_eq!(ctx.dn_j.q.total.core_rank(), oracle, "seed {seed}");
        assert_eq!(ctx.dn_i.q.total.core_rank(), oracle, "seed {seed}");
        // criterion 4 on the first 100 squares: the full lemma suite
        if lemma_squares < 100 {
            for lemma in all_lemmas(&ctx).unwrap() {
                assert!(
                    lemma.pass,
                    "seed {seed}: lemma {} failed: {:?}",
                    lemma.name, lemma.witness
                );
            }
            lemma_squares += 1;
        }
    }
    b2.finish(format!("200 regular squares, exact equality"));
    println!(
        "criterion {:<28} PASS  ({lemma_squares} squares × 10 named lemmas)",
        "4 lemma-suite"
    );
    println!(
        "criterion {:<28} PASS  (200 squares, rank oracle)",
        "8 core-fiber-formula"
    );
}

// ---------------------------------------------------------------------------
// criterion 3: the regression squares
// ---------------------------------------------------------------------------
fn criterion_regression() {
    let b = Budget::start("3 regression", 10.0);
    let (is_reg, report) = is_regular(&counterexample_square()).unwrap();
    assert!(!is_reg);
    // the failing direction is identified: both normal differentials fail
    // fiberwise injectivity (rank 4 into rank 3, rank 2 into rank 1)
    assert!(!report.criterion_nu_i);
    assert!(!report.criterion_nu_j);
    assert!(!report.criterion_exact);
    // the corner square on coordinate inclusions is regular
    let inc = |dom: usize, cod: usize| {
        LinMap::new(Matrix::identity(dom).vstack(&Matrix::zero(cod - dom, dom)))
    };
    let sq = corner_square(&inc(1, 2), &inc(2, 3)).unwrap();
    assert!(is_regular(&sq).unwrap().0);
    b.finish("counterexample rejected, corner square regular".into());
}

// ---------------------------------------------------------------------------
// criterion 5: horizontal and vertical functoriality of ν²
// ---------------------------------------------------------------------------
fn criterion_functoriality() {
    let b = Budget::start("5 functoriality", 60.0);
    // horizontal: ν²(G∘F) = ν²(G)∘ν²(F) on ≥200 composable pairs
    let mut horizontal = 0usize;
    for seed in 0..200u64 {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let (d1, d2) = dvb_core::dblcat::sample_h_composable(&mut rng, 3);
        let to_two = |s: &dvb_core::dblcat::LinSquare| TwoMap {
            top: s.top.clone(),
            bottom: s.bottom.clone(),
            left: s.left.clone(),
            right: s.right.clone(),
            direction: Direction::Horizontal,
        };
        let f_sq = to_two(&d1);
        let g_sq = to_two(&d2);
        let comp = TwoMap::new(
            g_sq.top.compose(&f_sq.top),
            g_sq.bottom.compose(&f_sq.bottom),
            f_sq.left.clone(),
            g_sq.right.clone(),
            Direction::Horizontal,
        )
        .unwrap();
        let nf = normal_differential(&f_sq).unwrap();
        let ng = normal_differential(&g_sq).unwrap();
        let nc = normal_differential(&comp).unwrap();
        assert_eq!(nc.map.map, ng.map.map.compose(&nf.map.map), "seed {seed}");
        horizontal += 1;
    }
    // vertical: the splitting diagram of the composite normal bundle:
    // canonical ladder exact and commuting, fiberwise splittings verified
    let mut vertical = 0usize;
    let mut compatible = 0usize;
    for seed in 0..100u64 {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let s = dvb_core::dblcat::sample_square(&mut rng, 2);
        let h_sq = TwoMap::new(s.top, s.bottom, s.left, s.right, Direction::Horizontal).unwrap();
        let p1 = rng.gen_range(h_sq.left.cod..=h_sq.left.cod + 2);
        let p2 = rng.gen_range(h_sq.right.cod..=h_sq.right.cod + 2);
        let j1 = dvb_core::dblcat::random_injective(&mut rng, h_sq.left.cod, p1);
        let j2 = dvb_core::dblcat::random_injective(&mut rng, h_sq.right.cod, p2);
        let k2 = dvb_core::dblcat::solve_over_injective(&mut rng, &j1, &j2.compose(&h_sq.bottom));
        let k_sq = TwoMap::new(h_sq.bottom.clone(), k2, j1, j2, Direction::Horizontal).unwrap();
        let vf = vertical_functoriality(&h_sq, &k_sq).unwrap();
        assert!(vf.ladder_commutes, "seed {seed}: ladder");
        assert!(vf.rows_exact, "seed {seed}: exactness");
        assert!(vf.splitting_verified, "seed {seed}: splitting identities");
        assert!(
            vf.split_src.is_bijective() && vf.split_tgt.is_bijective(),
            "seed {seed}: splitting isos"
        );
        vertical += 1;
        compatible += usize::from(vf.square_commutes);
    }
    b.finish(format!(
        "{horizontal} horizontal pairs exact, {vertical} vertical splittings ({compatible} with compatible pairs)"
    ));
}

// ---------------------------------------------------------------------------
// criterion 6: quotient–tangent, quotient–side-pullback, quotient-flip laws
// ---------------------------------------------------------------------------

/// Diagonal-model double space with block dimensions (base, side-a fiber,
/// side-b fiber, core).
fn diag_dvs(m: usize, a: usize, b: usize, c: usize) -> Dvs {
    let mut h = vec![0u32; m];
    h.extend(vec![0; a]);
    h.extend(vec![1; b]);
    h.extend(vec![1; c]);
    let mut v = vec![0u32; m];
    v.extend(vec![1; a]);
    v.extend(vec![0; b]);
    v.extend(vec![1; c]);
    Dvs::new(ScalingAction::diagonal(&h), ScalingAction::diagonal(&v)).unwrap()
}

/// Graded block-diagonal random map between diagonal-model double spaces:
/// equivariant by construction.
fn block_map(rng: &mut ChaCha8Rng, src: [usize; 4], tgt: [usize; 4]) -> LinMap {
    let blocks: Vec<Matrix> = (0..4)
        .map(|i| dvb_core::dblcat::random_matrix(rng, tgt[i], src[i]))
        .collect();
    let mut m = blocks[0].clone();
    for bl in &blocks[1..] {
        m = m.block_diag(bl);
    }
    LinMap::new(m)
}

/// Coordinate inclusion per block: identity on blocks where dims agree,
/// `[I; 0]` otherwise.
fn block_inclusion(src: [usize; 4], tgt: [usize; 4]) -> LinMap {
    let mut m: Option<Matrix> = None;
    for i in 0..4 {
        let bl = Matrix::identity(src[i]).vstack(&Matrix::zero(tgt[i] - src[i], src[i]));
        m = Some(match m {
            None => bl,
            Some(acc) => acc.block_diag(&bl),
        });
    }
    LinMap::new(m.unwrap())
}

fn criterion_quotient_compatibilities() {
    let b = Budget::start("6 quotient-compatibility", 60.0);

    // (a) tangent–quotient naturality on ≥100 wide 2-vb-maps
    for seed in 0..100u64 {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let m1 = rng.gen_range(1..=2);
        let m2 = rng.gen_range(1..=2);
        let f1 = rng.gen_range(1..=2);
        let f2 = rng.gen_range(1..=2);
        let e1 = f1 + rng.gen_range(0..=2);
        let e2 = f2 + rng.gen_range(0..=2);
        let e_1 = VBSpace::new(ScalingAction::diagonal(
            &[vec![0u32; m1], vec![1; e1]].concat(),
        ))
        .unwrap();
        let e_2 = VBSpace::new(ScalingAction::diagonal(
            &[vec![0u32; m2], vec![1; e2]].concat(),
        ))
        .unwrap();
        // φ preserving the first f-coordinates of the fibers
        let base = dvb_core::dblcat::random_matrix(&mut rng, m2, m1);
        let p_ff = dvb_core::dblcat::random_matrix(&mut rng, f2, f1);
        let p_fx = dvb_core::dblcat::random_matrix(&mut rng, f2, e1 - f1);
        let p_xx = dvb_core::dblcat::random_matrix(&mut rng, e2 - f2, e1 - f1);
        let fib = p_ff
            .hstack(&p_fx)
            .vstack(&Matrix::zero(e2 - f2, f1).hstack(&p_xx));
        let phi = VBMap::new(e_1.clone(), e_2.clone(), LinMap::new(base.block_diag(&fib))).unwrap();
        // the wide sub-bundles span the first f fiber coordinates
        let sub = |m: usize, e: usize, f: usize| {
            let mut rows = Matrix::zero(f, m + e);
            for i in 0..f {
                *rows.at_mut(i, m + i) = rat(1);
            }
            Subspace::from_spanning(m + e, &rows)
        };
        let s1 = sub(m1, e1, f1);
        let s2 = sub(m2, e2, f2);
        let (q1, p1) = quotient_action(&e_1, &s1).unwrap();
        let (q2, p2) = quotient_action(&e_2, &s2).unwrap();
        let phi_bar = induced_quotient_map(&phi.map, &p1, &p2).unwrap();
        // vertical quotients of the tangents by the embedded tangents
        let emb = |f: usize, m: usize, e: usize| {
            let dims_src = [m, f, 0, 0];
            let _ = dims_src;
            let mut cols = Matrix::zero(m + e, m + f);
            for i in 0..m {
                *cols.at_mut(i, i) = rat(1);
            }
            for i in 0..f {
                *cols.at_mut(m + i, m + i) = rat(1);
            }
            LinMap::new(cols)
        };
        let j1 = emb(f1, m1, e1);
        let j2 = emb(f2, m2, e2);
        let f_1 = VBSpace::new(ScalingAction::diagonal(
            &[vec![0u32; m1], vec![1; f1]].concat(),
        ))
        .unwrap();
        let f_2 = VBSpace::new(ScalingAction::diagonal(
            &[vec![0u32; m2], vec![1; f2]].concat(),
        ))
        .unwrap();
        let tj1 =
            tangent_of_vb_map(&VBMap::new(f_1.clone(), e_1.clone(), j1.clone()).unwrap()).unwrap();
        let tj2 =
            tangent_of_vb_map(&VBMap::new(f_2.clone(), e_2.clone(), j2.clone()).unwrap()).unwrap();
        let qv1 = quotient_v(&tj1).unwrap();
        let qv2 = quotient_v(&tj2).unwrap();
        let tphi = tangent_of_vb_map(&phi).unwrap();
        let tq = quotient_dvb_map(&tphi, &qv1, &qv2).unwrap();
        // identifications with the tangents of the quotients
        let ident = |qv: &dvb_core::dvb::DvsQuotient,
                     pres: &dvb_core::linalg::QuotientPresentation| {
            tangent_map(&pres.proj).compose(&qv.pres.sec)
        };
        let i1m = ident(&qv1, &p1);
        let i2m = ident(&qv2, &p2);
        assert!(i1m.is_bijective() && i2m.is_bijective(), "seed {seed}");
        assert_eq!(
            i2m.compose(&tq.map),
            tangent_map(&phi_bar).compose(&i1m),
            "seed {seed}: tangent–quotient naturality"
        );
        let _ = (q1, q2);
    }

    // (b) vertical side-pullback vs horizontal quotient on ≥100 instances
    for seed in 0..100u64 {
        let mut rng = ChaCha8Rng::seed_from_u64(1000 + seed);
        let (m, a, bq, cq) = (
            rng.gen_range(1..=2),
            rng.gen_range(0..=2),
            rng.gen_range(0..=1),
            rng.gen_range(0..=1),
        );
        let (bx, cx) = (rng.gen_range(0..=1), rng.gen_range(0..=1));
        let (bb, cc) = (bq + bx, cq + cx);
        let d = diag_dvs(m, a, bb, cc);
        let q = diag_dvs(m, a, bq, cq);
        let iota = DvbMap::new(
            q.clone(),
            d.clone(),
            block_inclusion([m, a, bq, cq], [m, a, bb, cc]),
        )
        .unwrap();
        let hq = quotient_h(&iota).unwrap();
        // a bundle mapping into the vertical side (m, b)-part
        let n = rng.gen_range(1..=2);
        let v = rng.gen_range(0..=1);
        let ux = rng.gen_range(0..=1);
        let u = v + ux;
        let u_bundle = VBSpace::new(ScalingAction::diagonal(
            &[vec![0u32; n], vec![1; u]].concat(),
        ))
        .unwrap();
        let fbase = dvb_core::dblcat::random_matrix(&mut rng, m, n);
        let p_qq = dvb_core::dblcat::random_matrix(&mut rng, bq, v);
        let p_qx = dvb_core::dblcat::random_matrix(&mut rng, bq, ux);
        let p_xx = dvb_core::dblcat::random_matrix(&mut rng, bx, ux);
        let pfib = p_qq
            .hstack(&p_qx)
            .vstack(&Matrix::zero(bx, v).hstack(&p_xx));
        // raw map into D: base block to base, fiber block to the b-block
        let mut raw = Matrix::zero(m + a + bb + cc, n + u);
        for r in 0..m {
            for c in 0..n {
                *raw.at_mut(r, c) = fbase.at(r, c).clone();
            }
        }
        for r in 0..bb {
            for c in 0..u {
                *raw.at_mut(m + a + r, n + c) = pfib.at(r, c).clone();
            }
        }
        let phi_raw = LinMap::new(raw);
        // the wide sub-bundle V of U and the restriction ψ into Q
        let v_bundle = VBSpace::new(ScalingAction::diagonal(
            &[vec![0u32; n], vec![1; v]].concat(),
        ))
        .unwrap();
        let vu = {
            let mut cols = Matrix::zero(n + u, n + v);
            for i in 0..n {
                *cols.at_mut(i, i) = rat(1);
            }
            for i in 0..v {
                *cols.at_mut(n + i, n + i) = rat(1);
            }
            LinMap::new(cols)
        };
        let mut psi_raw = Matrix::zero(m + a + bq + cq, n + v);
        for r in 0..m {
            for c in 0..n {
                *psi_raw.at_mut(r, c) = fbase.at(r, c).clone();
            }
        }
        for r in 0..bq {
            for c in 0..v {
                *psi_raw.at_mut(m + a + r, n + c) = p_qq.at(r, c).clone();
            }
        }
        let psi_raw = LinMap::new(psi_raw);
        let sp_d = side_pullback_v(&u_bundle, &phi_raw, &d).unwrap();
        let sp_q = side_pullback_v(&v_bundle, &psi_raw, &q).unwrap();
        // embedding of the pullbacks
        let emb = sp_d
            .factor(&vu.compose(&sp_q.pr_e), &iota.map.compose(&sp_q.pr_d))
            .unwrap();
        let emb = DvbMap::new(sp_q.total.clone(), sp_d.total.clone(), emb).unwrap();
        let rhs_q = quotient_h(&emb).unwrap();
        // the pulled-back quotient: (U/V) against D/Q
        let v_sub = {
            let mut rows = Matrix::zero(v, n + u);
            for i in 0..v {
                *rows.at_mut(i, n + i) = rat(1);
            }
            Subspace::from_spanning(n + u, &rows)
        };
        let (uv_bundle, uv_pres) = quotient_action(&u_bundle, &v_sub).unwrap();
        let phi_bar_raw = hq.pres.proj.compose(&phi_raw).compose(&uv_pres.sec);
        let lhs_sp = side_pullback_v(&uv_bundle, &phi_bar_raw, &hq.total).unwrap();
        // canonical comparison map and the descent
        let pre = lhs_sp
            .factor(
                &uv_pres.proj.compose(&sp_d.pr_e),
                &hq.pres.proj.compose(&sp_d.pr_d),
            )
            .unwrap();
        let ident =
            induced_quotient_map(&pre, &rhs_q.pres, &trivial_presentation(lhs_sp.total.dim))
                .unwrap();
        assert!(ident.is_bijective(), "seed {seed}: pullback–quotient iso");
        DvbMap::new(rhs_q.total.clone(), lhs_sp.total.clone(), ident)
            .expect("pullback–quotient identification is equivariant");
    }

    // (c) the quotient-flip composition law on ≥100 instances
    for seed in 0..100u64 {
        let mut rng = ChaCha8Rng::seed_from_u64(2000 + seed);
        let (m, ap, bb, cp) = (
            rng.gen_range(1..=2),
            rng.gen_range(0..=1),
            rng.gen_range(0..=2),
            rng.gen_range(0..=1),
        );
        let (ax, cx) = (rng.gen_range(0..=1), rng.gen_range(0..=1));
        let (aa, cc) = (ap + ax, cp + cx);
        let d1 = diag_dvs(m, aa, bb, cc);
        let p1 = diag_dvs(m, ap, bb, cp);
        let iota1 = DvbMap::new(
            p1.clone(),
            d1.clone(),
            block_inclusion([m, ap, bb, cp], [m, aa, bb, cc]),
        )
        .unwrap();
        let qv1 = quotient_v(&iota1).unwrap();
        let qh1 = quotient_h(&iota1.flip()).unwrap();
        let flip_d = FlipMap::identity_flip(&d1);
        let fdq = quotient_flip(&flip_d, &qv1, &qh1).unwrap();
        // the quotient of total flips is the total flip of the quotient
        assert_eq!(
            fdq.map,
            LinMap::identity(qv1.total.dim),
            "seed {seed}: flip of the quotient"
        );
        assert_eq!(qh1.total, qv1.total.flip(), "seed {seed}");
        // a second, horizontally wide embedding and the connecting 2-map
        let (m2, a2, bq2, cq2) = (
            rng.gen_range(1..=2),
            rng.gen_range(0..=2),
            rng.gen_range(0..=1),
            rng.gen_range(0..=1),
        );
        let (bx2, cx2) = (rng.gen_range(0..=1), rng.gen_range(0..=1));
        let (b2, c2) = (bq2 + bx2, cq2 + cx2);
        let d2 = diag_dvs(m2, a2, b2, c2);
        let p2 = diag_dvs(m2, a2, bq2, cq2);
        let iota2 = DvbMap::new(
            p2.clone(),
            d2.clone(),
            block_inclusion([m2, a2, bq2, cq2], [m2, a2, b2, c2]),
        )
        .unwrap();
        let qh2 = quotient_h(&iota2).unwrap();
        // ψ: flip(P1) → P2; φ extends it over the coordinate inclusions
        // flip(P1) has blocks (m, ap, bb, cp) with gradings swapped, so an
        // equivariant map into P2 sends m→m2, ap→bq2, bb→a2, cp→cq2
        let psi = block_map(&mut rng, [m, bb, ap, cp], [m2, a2, bq2, cq2]);
        // reorder: block_map pairs source blocks (m, bb, ap, cp) with target
        // blocks (m2, a2, bq2, cq2); assemble φ likewise with free parts
        let extend =
            |rng: &mut ChaCha8Rng, forced: &Matrix, extra_cols: usize, rows_extra: usize| {
                // forced columns must keep hitting the embedded image: the
                // extension rows stay zero there
                let free = dvb_core::dblcat::random_matrix(rng, forced.rows, extra_cols);
                let top = forced.hstack(&free);
                let bottom = Matrix::zero(rows_extra, forced.cols).hstack(
                    &dvb_core::dblcat::random_matrix(rng, rows_extra, extra_cols),
                );
                top.vstack(&bottom)
            };
        // φ blocks: m→m2, bb→a2 (same as ψ), ap+ax→bq2+bx2, cp+cx→cq2+cx2
        let psi_blocks = |r0: usize, c0: usize, rows: usize, cols: usize| {
            psi.mat.select(
                &(r0..r0 + rows).collect::<Vec<_>>(),
                &(c0..c0 + cols).collect::<Vec<_>>(),
            )
        };
        let phi_m = psi_blocks(0, 0, m2, m);
        let phi_b_to_a = psi_blocks(m2, m, a2, bb);
        let phi_a_to_b = extend(&mut rng, &psi_blocks(m2 + a2, m + bb, bq2, ap), ax, bx2);
        let phi_c = extend(
            &mut rng,
            &psi_blocks(m2 + a2 + bq2, m + bb + ap, cq2, cp),
            cx,
            cx2,
        );
        // assemble in flip(D1) block order (m, bb→a2? no: flip(D1) blocks are
        // (m, aa, bb, cc) with swapped gradings: m→m2, aa→b2, bb→a2, cc→c2)
        let dim_src = m + aa + bb + cc;
        let dim_tgt = m2 + a2 + b2 + c2;
        let mut phi_mat = Matrix::zero(dim_tgt, dim_src);
        let put = |mat: &mut Matrix, r0: usize, c0: usize, bl: &Matrix| {
            for r in 0..bl.rows {
                for c in 0..bl.cols {
                    *mat.at_mut(r0 + r, c0 + c) = bl.at(r, c).clone();
                }
            }
        };
        put(&mut phi_mat, 0, 0, &phi_m);
        put(&mut phi_mat, m2 + a2, m, &phi_a_to_b); // aa → b2
        put(&mut phi_mat, m2, m + aa, &phi_b_to_a); // bb → a2
        put(&mut phi_mat, m2 + a2 + b2, m + aa + bb, &phi_c); // cc → c2
        let phi = DvbMap::new(d1.flip(), d2.clone(), LinMap::new(phi_mat)).unwrap();
        let psi_map = {
            // reassemble ψ on flip(P1) block order (m, ap, bb, cp)
            let mut mat = Matrix::zero(m2 + a2 + bq2 + cq2, m + ap + bb + cp);
            put(&mut mat, 0, 0, &psi_blocks(0, 0, m2, m));
            put(&mut mat, m2 + a2, m, &psi_blocks(m2 + a2, m + bb, bq2, ap));
            put(&mut mat, m2, m + ap, &psi_blocks(m2, m, a2, bb));
            put(
                &mut mat,
                m2 + a2 + bq2,
                m + ap + bb,
                &psi_blocks(m2 + a2 + bq2, m + bb + ap, cq2, cp),
            );
            DvbMap::new(p1.flip(), p2.clone(), LinMap::new(mat)).unwrap()
        };
        // the square φ∘flip(ι1) = ι2∘ψ
        assert_eq!(
            phi.map.compose(&iota1.map),
            iota2.map.compose(&psi_map.map),
            "seed {seed}: connecting square"
        );
        // composition law: (φ/ψ)∘(flip_D/flip_P) = (φ∘flip_D)/(ψ∘flip_P)
        let phi_bar = quotient_dvb_map(&phi, &qh1, &qh2).unwrap();
        let phi_flip_total = flip_d.then_dvb(&phi).unwrap();
        let rhs = quotient_flip(&phi_flip_total, &qv1, &qh2).unwrap();
        assert_eq!(
            phi_bar.map.compose(&fdq.map),
            rhs.map,
            "seed {seed}: quotient-flip composition law"
        );
    }

    b.finish("3 × 100 instances, exact".into());
}

// ---------------------------------------------------------------------------
// criterion 7: strict double-category laws on commutative linear squares
// ---------------------------------------------------------------------------
fn criterion_double_category_laws() {
    let b = Budget::start("7 double-category-laws", 30.0);
    // interchange on ≥500 seeded grids
    let dc = LinSq;
    for seed in 0..500u64 {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let g = sample_grid(&mut rng, 2);
        check_interchange(&dc, &g).unwrap();
    }
    // the full law suite (edge axiom, functoriality, identities,
    // associativity, interchange, flip involution) on seeded samples
    for report in lin_sq_law_suite(42, 120, 3) {
        assert!(
            report.passed(),
            "law {} failed: {:?}",
            report.axiom,
            report.first_witness
        );
    }
    b.finish("500 grids + law suite".into());
}

#[test]
fn acceptance() {
    let total = Instant::now();
    criterion_regularity_equivalence();
    criterion_symmetry_lemmas_core();
    criterion_regression();
    criterion_functoriality();
    criterion_quotient_compatibilities();
    criterion_double_category_laws();
    let secs = total.elapsed().as_secs_f64();
    println!(
        "criterion {:<28} PASS  (whole suite, {secs:.2}s)",
        "9 whole-suite-budget"
    );
    #[cfg(not(debug_assertions))]
    assert!(secs < 120.0, "whole suite exceeded 120s: {secs:.2}s");
}
