//! Strict double categories with machine-checked laws, instantiated on
//! commutative squares of linear maps.
//!
//! Instances are samplers, not enumerations: laws are tested on seeded random
//! composable configurations and reported with a first witness on failure.

use crate::error::Error;
use crate::linalg::LinMap;
use crate::matrix::Matrix;
use crate::rat::rat;
use crate::Result;
use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use std::fmt::Debug;

/// A strict double category: objects, horizontal and vertical morphisms, and
/// squares with the two compositions. Edge and identity assignments follow
/// the square reading
///
/// ```text
///        top
///    o ------> o
///    |         |
///  left      right        (horizontal edges are H-morphisms,
///    v         v           vertical edges are V-morphisms)
///    o ------> o
///       bottom
/// ```
pub trait DoubleCategory {
    type Obj: Clone + PartialEq + Debug;
    type HMor: Clone + PartialEq + Debug;
    type VMor: Clone + PartialEq + Debug;
    type Square: Clone + PartialEq + Debug;

    fn h_source(&self, h: &Self::HMor) -> Self::Obj;
    fn h_range(&self, h: &Self::HMor) -> Self::Obj;
    fn v_source(&self, v: &Self::VMor) -> Self::Obj;
    fn v_range(&self, v: &Self::VMor) -> Self::Obj;

    fn h_compose(&self, later: &Self::HMor, earlier: &Self::HMor) -> Result<Self::HMor>;
    fn v_compose(&self, later: &Self::VMor, earlier: &Self::VMor) -> Result<Self::VMor>;
    fn h_identity(&self, o: &Self::Obj) -> Self::HMor;
    fn v_identity(&self, o: &Self::Obj) -> Self::VMor;

    fn top(&self, d: &Self::Square) -> Self::HMor;
    fn bottom(&self, d: &Self::Square) -> Self::HMor;
    fn left(&self, d: &Self::Square) -> Self::VMor;
    fn right(&self, d: &Self::Square) -> Self::VMor;

    /// Horizontal composition (gluing along a shared vertical edge:
    /// `left(later) = right(earlier)`).
    fn compose_h(&self, later: &Self::Square, earlier: &Self::Square) -> Result<Self::Square>;
    /// Vertical composition (gluing along a shared horizontal edge:
    /// `top(later) = bottom(earlier)`).
    fn compose_v(&self, later: &Self::Square, earlier: &Self::Square) -> Result<Self::Square>;
    /// Identity square on a horizontal morphism (identity vertical edges).
    fn identity_on_h(&self, h: &Self::HMor) -> Self::Square;
    /// Identity square on a vertical morphism.
    fn identity_on_v(&self, v: &Self::VMor) -> Self::Square;
}

/// The formally swapped double category.
pub struct Flipped<'a, D: DoubleCategory>(pub &'a D);

impl<'a, D: DoubleCategory> DoubleCategory for Flipped<'a, D> {
    type Obj = D::Obj;
    type HMor = D::VMor;
    type VMor = D::HMor;
    type Square = D::Square;

    fn h_source(&self, h: &Self::HMor) -> Self::Obj {
        self.0.v_source(h)
    }
    fn h_range(&self, h: &Self::HMor) -> Self::Obj {
        self.0.v_range(h)
    }
    fn v_source(&self, v: &Self::VMor) -> Self::Obj {
        self.0.h_source(v)
    }
    fn v_range(&self, v: &Self::VMor) -> Self::Obj {
        self.0.h_range(v)
    }
    fn h_compose(&self, later: &Self::HMor, earlier: &Self::HMor) -> Result<Self::HMor> {
        self.0.v_compose(later, earlier)
    }
    fn v_compose(&self, later: &Self::VMor, earlier: &Self::VMor) -> Result<Self::VMor> {
        self.0.h_compose(later, earlier)
    }
    fn h_identity(&self, o: &Self::Obj) -> Self::HMor {
        self.0.v_identity(o)
    }
    fn v_identity(&self, o: &Self::Obj) -> Self::VMor {
        self.0.h_identity(o)
    }
    fn top(&self, d: &Self::Square) -> Self::HMor {
        self.0.left(d)
    }
    fn bottom(&self, d: &Self::Square) -> Self::HMor {
        self.0.right(d)
    }
    fn left(&self, d: &Self::Square) -> Self::VMor {
        self.0.top(d)
    }
    fn right(&self, d: &Self::Square) -> Self::VMor {
        self.0.bottom(d)
    }
    fn compose_h(&self, later: &Self::Square, earlier: &Self::Square) -> Result<Self::Square> {
        self.0.compose_v(later, earlier)
    }
    fn compose_v(&self, later: &Self::Square, earlier: &Self::Square) -> Result<Self::Square> {
        self.0.compose_h(later, earlier)
    }
    fn identity_on_h(&self, h: &Self::HMor) -> Self::Square {
        self.0.identity_on_v(h)
    }
    fn identity_on_v(&self, v: &Self::VMor) -> Self::Square {
        self.0.identity_on_h(v)
    }
}

/// A directed 2-morphism view of a square: left edge ⇒ right edge in the
/// horizontalization, top ⇒ bottom in the verticalization.
#[derive(Clone, PartialEq, Debug)]
pub struct TwoMorphism<M> {
    pub source: M,
    pub target: M,
}

/// Reads a square as a 2-morphism in the horizontalization.
pub fn horizontalization<D: DoubleCategory>(dc: &D, d: &D::Square) -> TwoMorphism<D::VMor> {
    TwoMorphism {
        source: dc.left(d),
        target: dc.right(d),
    }
}

/// Reads a square as a 2-morphism in the verticalization.
pub fn verticalization<D: DoubleCategory>(dc: &D, d: &D::Square) -> TwoMorphism<D::HMor> {
    TwoMorphism {
        source: dc.top(d),
        target: dc.bottom(d),
    }
}

/// A commutative square of linear maps; the flat square of `LinSq`.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct LinSquare {
    pub top: LinMap,
    pub bottom: LinMap,
    pub left: LinMap,
    pub right: LinMap,
}

impl LinSquare {
    pub fn new(top: LinMap, bottom: LinMap, left: LinMap, right: LinMap) -> Result<Self> {
        if top.dom != left.dom
            || top.cod != right.dom
            || bottom.dom != left.cod
            || bottom.cod != right.cod
        {
            return Err(Error::NotComposable("square edges do not share corners"));
        }
        if right.compose(&top) != bottom.compose(&left) {
            return Err(Error::NotCommuting("linear square"));
        }
        Ok(LinSquare {
            top,
            bottom,
            left,
            right,
        })
    }
}

/// The flat double category of commutative squares of linear maps: objects
/// are dimensions, both morphism classes are linear maps.
pub struct LinSq;

impl DoubleCategory for LinSq {
    type Obj = usize;
    type HMor = LinMap;
    type VMor = LinMap;
    type Square = LinSquare;

    fn h_source(&self, h: &LinMap) -> usize {
        h.dom
    }
    fn h_range(&self, h: &LinMap) -> usize {
        h.cod
    }
    fn v_source(&self, v: &LinMap) -> usize {
        v.dom
    }
    fn v_range(&self, v: &LinMap) -> usize {
        v.cod
    }
    fn h_compose(&self, later: &LinMap, earlier: &LinMap) -> Result<LinMap> {
        if later.dom != earlier.cod {
            return Err(Error::NotComposable("horizontal morphisms"));
        }
        Ok(later.compose(earlier))
    }
    fn v_compose(&self, later: &LinMap, earlier: &LinMap) -> Result<LinMap> {
        if later.dom != earlier.cod {
            return Err(Error::NotComposable("vertical morphisms"));
        }
        Ok(later.compose(earlier))
    }
    fn h_identity(&self, o: &usize) -> LinMap {
        LinMap::identity(*o)
    }
    fn v_identity(&self, o: &usize) -> LinMap {
        LinMap::identity(*o)
    }
    fn top(&self, d: &LinSquare) -> LinMap {
        d.top.clone()
    }
    fn bottom(&self, d: &LinSquare) -> LinMap {
        d.bottom.clone()
    }
    fn left(&self, d: &LinSquare) -> LinMap {
        d.left.clone()
    }
    fn right(&self, d: &LinSquare) -> LinMap {
        d.right.clone()
    }
    fn compose_h(&self, later: &LinSquare, earlier: &LinSquare) -> Result<LinSquare> {
        if later.left != earlier.right {
            return Err(Error::NotComposable("squares do not share a vertical edge"));
        }
        LinSquare::new(
            later.top.compose(&earlier.top),
            later.bottom.compose(&earlier.bottom),
            earlier.left.clone(),
            later.right.clone(),
        )
    }
    fn compose_v(&self, later: &LinSquare, earlier: &LinSquare) -> Result<LinSquare> {
        if later.top != earlier.bottom {
            return Err(Error::NotComposable(
                "squares do not share a horizontal edge",
            ));
        }
        LinSquare::new(
            earlier.top.clone(),
            later.bottom.clone(),
            later.left.compose(&earlier.left),
            later.right.compose(&earlier.right),
        )
    }
    fn identity_on_h(&self, h: &LinMap) -> LinSquare {
        LinSquare {
            top: h.clone(),
            bottom: h.clone(),
            left: LinMap::identity(h.dom),
            right: LinMap::identity(h.cod),
        }
    }
    fn identity_on_v(&self, v: &LinMap) -> LinSquare {
        LinSquare {
            top: LinMap::identity(v.dom),
            bottom: LinMap::identity(v.cod),
            left: v.clone(),
            right: v.clone(),
        }
    }
}

/// Report of one law check.
#[derive(Clone, Debug, Serialize)]
pub struct LawReport {
    pub axiom: String,
    pub trials: usize,
    pub failures: usize,
    pub first_witness: Option<String>,
}

impl LawReport {
    pub fn passed(&self) -> bool {
        self.failures == 0
    }
}

/// Runs the full law suite on `LinSq`: edge compatibility (axiom of squares),
/// functoriality of the compositions with sources/ranges/identities,
/// associativity, interchange on 2×2 grids, and flip involutivity.
pub fn lin_sq_law_suite(seed: u64, trials: usize, max_dim: usize) -> Vec<LawReport> {
    let mut reports = Vec::new();

    let mut run =
        |axiom: &str, mut f: Box<dyn FnMut(&mut ChaCha8Rng) -> std::result::Result<(), String>>| {
            let mut failures = 0;
            let mut first = None;
            for t in 0..trials {
                let mut rng =
                    ChaCha8Rng::seed_from_u64(seed ^ (t as u64).wrapping_mul(0x9E3779B97F4A7C15));
                if let Err(w) = f(&mut rng) {
                    failures += 1;
                    if first.is_none() {
                        first = Some(format!("trial {t}: {w}"));
                    }
                }
            }
            reports.push(LawReport {
                axiom: axiom.to_string(),
                trials,
                failures,
                first_witness: first,
            });
        };

    run(
        "square-edges",
        Box::new(move |rng| {
            let dc = LinSq;
            let d = sample_square(rng, max_dim);
            // the four corner equations of the edge assignments
            if dc.h_source(&dc.top(&d)) != dc.v_source(&dc.left(&d)) {
                return Err("top/left corner".into());
            }
            if dc.h_range(&dc.top(&d)) != dc.v_source(&dc.right(&d)) {
                return Err("top/right corner".into());
            }
            if dc.h_source(&dc.bottom(&d)) != dc.v_range(&dc.left(&d)) {
                return Err("bottom/left corner".into());
            }
            if dc.h_range(&dc.bottom(&d)) != dc.v_range(&dc.right(&d)) {
                return Err("bottom/right corner".into());
            }
            Ok(())
        }),
    );

    run(
        "functoriality",
        Box::new(move |rng| {
            let dc = LinSq;
            let (d1, d2) = sample_h_composable(rng, max_dim);
            let c = dc.compose_h(&d2, &d1).map_err(|e| e.to_string())?;
            if dc.top(&c) != dc.h_compose(&dc.top(&d2), &dc.top(&d1)).unwrap() {
                return Err("top of horizontal composite".into());
            }
            if dc.bottom(&c) != dc.h_compose(&dc.bottom(&d2), &dc.bottom(&d1)).unwrap() {
                return Err("bottom of horizontal composite".into());
            }
            let h = dc.top(&d1);
            let idsq = dc.identity_on_h(&h);
            if dc.compose_v(&idsq, &idsq).map_err(|e| e.to_string())? != dc.identity_on_h(&h) {
                return Err("identity square not idempotent vertically".into());
            }
            Ok(())
        }),
    );

    run(
        "identity-units",
        Box::new(move |rng| {
            let dc = LinSq;
            let d = sample_square(rng, max_dim);
            let idl = dc.identity_on_v(&dc.left(&d));
            let idr = dc.identity_on_v(&dc.right(&d));
            if dc.compose_h(&d, &idl).map_err(|e| e.to_string())? != d {
                return Err("left identity square".into());
            }
            if dc.compose_h(&idr, &d).map_err(|e| e.to_string())? != d {
                return Err("right identity square".into());
            }
            let idt = dc.identity_on_h(&dc.top(&d));
            let idb = dc.identity_on_h(&dc.bottom(&d));
            if dc.compose_v(&d, &idt).map_err(|e| e.to_string())? != d {
                return Err("top identity square".into());
            }
            if dc.compose_v(&idb, &d).map_err(|e| e.to_string())? != d {
                return Err("bottom identity square".into());
            }
            Ok(())
        }),
    );

    run(
        "associativity",
        Box::new(move |rng| {
            let dc = LinSq;
            let (d1, d2, d3) = sample_h_composable_triple(rng, max_dim);
            let lhs = dc
                .compose_h(&d3, &dc.compose_h(&d2, &d1).map_err(|e| e.to_string())?)
                .map_err(|e| e.to_string())?;
            let rhs = dc
                .compose_h(&dc.compose_h(&d3, &d2).map_err(|e| e.to_string())?, &d1)
                .map_err(|e| e.to_string())?;
            if lhs != rhs {
                return Err("horizontal associativity".into());
            }
            Ok(())
        }),
    );

    run(
        "interchange",
        Box::new(move |rng| {
            let dc = LinSq;
            let g = sample_grid(rng, max_dim);
            check_interchange(&dc, &g).map_err(|e| e.to_string())?;
            Ok(())
        }),
    );

    run(
        "flip-involution",
        Box::new(move |rng| {
            let dc = LinSq;
            let flipped = Flipped(&dc);
            let double = Flipped(&flipped);
            let d = sample_square(rng, max_dim);
            // reading through the double flip returns the original edges
            if double.top(&d) != dc.top(&d)
                || double.left(&d) != dc.left(&d)
                || double.bottom(&d) != dc.bottom(&d)
                || double.right(&d) != dc.right(&d)
            {
                return Err("double flip changed an edge".into());
            }
            // horizontalization of the flip = verticalization of the original
            if horizontalization(&flipped, &d) != verticalization(&dc, &d) {
                return Err("flip does not exchange the directed readings".into());
            }
            Ok(())
        }),
    );

    reports
}

/// A 2×2 grid of squares composable both ways.
#[derive(Clone, Debug)]
pub struct Grid2x2<S> {
    pub nw: S,
    pub ne: S,
    pub sw: S,
    pub se: S,
}

/// Both evaluation orders of the grid must agree.
pub fn check_interchange<D: DoubleCategory>(dc: &D, g: &Grid2x2<D::Square>) -> Result<()> {
    let top_row = dc.compose_h(&g.ne, &g.nw)?;
    let bottom_row = dc.compose_h(&g.se, &g.sw)?;
    let rows_then = dc.compose_v(&bottom_row, &top_row)?;
    let left_col = dc.compose_v(&g.sw, &g.nw)?;
    let right_col = dc.compose_v(&g.se, &g.ne)?;
    let cols_then = dc.compose_h(&right_col, &left_col)?;
    if rows_then != cols_then {
        return Err(Error::NotCommuting("interchange law"));
    }
    Ok(())
}

/// Random small matrix with entries in `[-2, 2]`.
pub fn random_matrix(rng: &mut ChaCha8Rng, rows: usize, cols: usize) -> Matrix {
    Matrix::from_fn(rows, cols, |_, _| rat(rng.gen_range(-2..=2)))
}

/// Random injective map `ℚ^dom → ℚ^cod` (needs `dom ≤ cod`): a row-permuted
/// unit lower-triangular block stacked over noise, so injectivity holds by
/// construction without rejection sampling.
pub fn random_injective(rng: &mut ChaCha8Rng, dom: usize, cod: usize) -> LinMap {
    assert!(dom <= cod, "injective maps need dom <= cod");
    let mut l = Matrix::identity(dom);
    for r in 0..dom {
        for c in 0..r {
            *l.at_mut(r, c) = rat(rng.gen_range(-2..=2));
        }
    }
    let noise = random_matrix(rng, cod - dom, dom);
    let stacked = l.vstack(&noise.mul_mat(&l));
    // random row permutation
    let mut perm: Vec<usize> = (0..cod).collect();
    for i in (1..cod).rev() {
        let j = rng.gen_range(0..=i);
        perm.swap(i, j);
    }
    let rows_src: Vec<usize> = perm;
    let all: Vec<usize> = (0..dom).collect();
    LinMap::new(stacked.select(&rows_src, &all))
}

/// Solves `X ∘ v = m` for an injective `v`, adding a random part that kills
/// the image of `v`; exact by construction.
pub fn solve_over_injective(rng: &mut ChaCha8Rng, v: &LinMap, m: &LinMap) -> LinMap {
    assert_eq!(v.dom, m.dom);
    let a = v.mat.transpose();
    let xt = a
        .solve_matrix(&m.mat.transpose())
        .expect("full-row-rank system is consistent");
    let mut x = xt.transpose();
    let ann = v.mat.transpose().kernel_basis(); // rows k with k·v = 0
    if ann.rows > 0 {
        let z = random_matrix(rng, m.cod, ann.rows);
        x = &x + &z.mul_mat(&ann);
    }
    LinMap::new(x)
}

/// Seeded sampler: one commutative square with injective vertical edges and
/// otherwise random entries.
pub fn sample_square(rng: &mut ChaCha8Rng, max_dim: usize) -> LinSquare {
    let a = rng.gen_range(1..=max_dim);
    let b = rng.gen_range(1..=max_dim);
    let c = rng.gen_range(a..=a + max_dim);
    let d = rng.gen_range(b..=b + max_dim);
    let top = LinMap::new(random_matrix(rng, b, a));
    let left = random_injective(rng, a, c);
    let right = random_injective(rng, b, d);
    let bottom = solve_over_injective(rng, &left, &right.compose(&top));
    LinSquare::new(top, bottom, left, right).expect("solved square commutes")
}

/// Two horizontally composable squares (shared vertical edge).
pub fn sample_h_composable(rng: &mut ChaCha8Rng, max_dim: usize) -> (LinSquare, LinSquare) {
    let d1 = sample_square(rng, max_dim);
    let b2 = rng.gen_range(1..=max_dim);
    let d2dim = rng.gen_range(b2..=b2 + max_dim);
    let top2 = LinMap::new(random_matrix(rng, b2, d1.top.cod));
    let right2 = random_injective(rng, b2, d2dim);
    let bottom2 = solve_over_injective(rng, &d1.right, &right2.compose(&top2));
    let d2 =
        LinSquare::new(top2, bottom2, d1.right.clone(), right2).expect("solved square commutes");
    (d1, d2)
}

/// Three horizontally composable squares.
pub fn sample_h_composable_triple(
    rng: &mut ChaCha8Rng,
    max_dim: usize,
) -> (LinSquare, LinSquare, LinSquare) {
    let (d1, d2) = sample_h_composable(rng, max_dim);
    let b3 = rng.gen_range(1..=max_dim);
    let d3dim = rng.gen_range(b3..=b3 + max_dim);
    let top3 = LinMap::new(random_matrix(rng, b3, d2.top.cod));
    let right3 = random_injective(rng, b3, d3dim);
    let bottom3 = solve_over_injective(rng, &d2.right, &right3.compose(&top3));
    let d3 =
        LinSquare::new(top3, bottom3, d2.right.clone(), right3).expect("solved square commutes");
    (d1, d2, d3)
}

/// A seeded 2×2 grid composable both ways: a 3×3 lattice of corners with
/// injective vertical edges, lower horizontal edges solved row by row.
pub fn sample_grid(rng: &mut ChaCha8Rng, max_dim: usize) -> Grid2x2<LinSquare> {
    let a: Vec<usize> = (0..3).map(|_| rng.gen_range(1..=max_dim)).collect();
    let c: Vec<usize> = (0..3)
        .map(|i| rng.gen_range(a[i]..=a[i] + max_dim))
        .collect();
    let g: Vec<usize> = (0..3)
        .map(|i| rng.gen_range(c[i]..=c[i] + max_dim))
        .collect();
    // top row horizontals
    let h00 = LinMap::new(random_matrix(rng, a[1], a[0]));
    let h01 = LinMap::new(random_matrix(rng, a[2], a[1]));
    // verticals
    let v00 = random_injective(rng, a[0], c[0]);
    let v01 = random_injective(rng, a[1], c[1]);
    let v02 = random_injective(rng, a[2], c[2]);
    let v10 = random_injective(rng, c[0], g[0]);
    let v11 = random_injective(rng, c[1], g[1]);
    let v12 = random_injective(rng, c[2], g[2]);
    // middle and bottom horizontals solved through the verticals
    let h10 = solve_over_injective(rng, &v00, &v01.compose(&h00));
    let h11 = solve_over_injective(rng, &v01, &v02.compose(&h01));
    let h20 = solve_over_injective(rng, &v10, &v11.compose(&h10));
    let h21 = solve_over_injective(rng, &v11, &v12.compose(&h11));
    let nw = LinSquare::new(h00, h10.clone(), v00, v01.clone()).unwrap();
    let ne = LinSquare::new(h01, h11.clone(), v01, v02).unwrap();
    let sw = LinSquare::new(h10, h20, v10, v11.clone()).unwrap();
    let se = LinSquare::new(h11, h21, v11, v12).unwrap();
    Grid2x2 { nw, ne, sw, se }
}
