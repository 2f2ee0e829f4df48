//! Scaling actions of the multiplicative monoid `(ℚ,·)` stored as
//! weight-graded families of commuting idempotent projections, and the
//! vector bundles (weights `{0,1}`) they encode.
//!
//! An action `δ_λ = Σ_k λ^k P_k` is regular by construction: anything with
//! vanishing derivative at the identity lies in the weight-0 part.

use crate::error::Error;
use crate::linalg::{fiber_product, LinMap, QuotientPresentation, Subspace};
use crate::matrix::Matrix;
use crate::rat::{rat, Rat};
use crate::Result;
use num::traits::{One, Zero};
use std::collections::BTreeMap;

/// A weight-graded scaling action on `ℚ^dim`.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct ScalingAction {
    pub dim: usize,
    projs: BTreeMap<u32, Matrix>,
}

impl ScalingAction {
    /// Validates the complete-orthogonal-idempotent axioms. Zero projections
    /// are dropped so the stored weight set is canonical.
    pub fn new(dim: usize, projs: BTreeMap<u32, Matrix>) -> Result<Self> {
        let mut sum = Matrix::zero(dim, dim);
        for (_, p) in projs.iter() {
            if p.rows != dim || p.cols != dim {
                return Err(Error::Dimension {
                    context: "projection shape",
                    expected: dim,
                    got: p.rows,
                });
            }
            sum = &sum + p;
        }
        if sum != Matrix::identity(dim) {
            return Err(Error::BadProjections("projections do not sum to identity"));
        }
        for (i, p) in projs.iter() {
            for (j, q) in projs.iter() {
                let prod = p.mul_mat(q);
                if i == j {
                    if prod != *p {
                        return Err(Error::BadProjections("projection not idempotent"));
                    }
                } else if !prod.is_zero() {
                    return Err(Error::BadProjections(
                        "distinct projections do not annihilate",
                    ));
                }
            }
        }
        let projs = projs.into_iter().filter(|(_, p)| !p.is_zero()).collect();
        Ok(ScalingAction { dim, projs })
    }

    /// Pure weight-0 action (the identity at every `λ`): a zero-rank bundle.
    pub fn trivial(dim: usize) -> Self {
        let mut projs = BTreeMap::new();
        if dim > 0 {
            projs.insert(0, Matrix::identity(dim));
        }
        ScalingAction { dim, projs }
    }

    /// Coordinate-diagonal action: weight `w[i]` on coordinate `i`.
    pub fn diagonal(weights: &[u32]) -> Self {
        let dim = weights.len();
        let mut projs: BTreeMap<u32, Matrix> = BTreeMap::new();
        for (i, &w) in weights.iter().enumerate() {
            let p = projs.entry(w).or_insert_with(|| Matrix::zero(dim, dim));
            *p.at_mut(i, i) = rat(1);
        }
        ScalingAction { dim, projs }
    }

    pub fn weights(&self) -> Vec<u32> {
        self.projs.keys().copied().collect()
    }

    pub fn max_weight(&self) -> u32 {
        self.projs.keys().copied().max().unwrap_or(0)
    }

    pub fn projection(&self, weight: u32) -> Matrix {
        self.projs
            .get(&weight)
            .cloned()
            .unwrap_or_else(|| Matrix::zero(self.dim, self.dim))
    }

    pub fn projections(&self) -> &BTreeMap<u32, Matrix> {
        &self.projs
    }

    /// `δ_λ = Σ λ^k P_k`; `evaluate(1) = id`, `evaluate(0) = P_0`.
    pub fn evaluate(&self, lambda: &Rat) -> LinMap {
        let mut acc = Matrix::zero(self.dim, self.dim);
        for (&k, p) in self.projs.iter() {
            let mut coeff = Rat::one();
            for _ in 0..k {
                coeff *= lambda;
            }
            acc = &acc + &p.scale(&coeff);
        }
        LinMap::new(acc)
    }

    /// Image of the weight-`k` projection as a canonical subspace.
    pub fn weight_space(&self, weight: u32) -> Subspace {
        Subspace::from_spanning(self.dim, &self.projection(weight).transpose())
    }

    /// Is `sub` invariant under every weight projection?
    pub fn leaves_invariant(&self, sub: &Subspace) -> bool {
        self.projs
            .iter()
            .all(|(_, p)| (0..sub.dim()).all(|i| sub.contains_vec(&p.apply(sub.basis.row(i)))))
    }

    /// Restriction to an invariant subspace, in the subspace's canonical
    /// coordinates.
    pub fn restrict(&self, sub: &Subspace) -> Result<ScalingAction> {
        if !self.leaves_invariant(sub) {
            return Err(Error::NotInvariant("restriction target"));
        }
        let incl = sub.inclusion();
        let coords = sub.coordinates();
        let mut projs = BTreeMap::new();
        for (&k, p) in self.projs.iter() {
            projs.insert(k, coords.mat.mul_mat(p).mul_mat(&incl.mat));
        }
        ScalingAction::new(sub.dim(), projs)
    }

    /// Induced action on a quotient by an invariant subspace.
    pub fn quotient(&self, q: &QuotientPresentation) -> Result<ScalingAction> {
        if !self.leaves_invariant(&q.sub) {
            return Err(Error::NotInvariant("quotient kernel"));
        }
        let mut projs = BTreeMap::new();
        for (&k, p) in self.projs.iter() {
            projs.insert(k, q.proj.mat.mul_mat(p).mul_mat(&q.sec.mat));
        }
        ScalingAction::new(q.dim, projs)
    }

    /// Product action on the direct sum: `(δ × δ')_λ = δ_λ ⊕ δ'_λ`.
    pub fn product(&self, other: &ScalingAction) -> ScalingAction {
        let dim = self.dim + other.dim;
        let mut projs = BTreeMap::new();
        let mut keys: Vec<u32> = self.weights();
        keys.extend(other.weights());
        keys.sort_unstable();
        keys.dedup();
        for k in keys {
            let block = self.projection(k).block_diag(&other.projection(k));
            projs.insert(k, block);
        }
        ScalingAction { dim, projs }
    }
}

/// Recovers the weight decomposition from a single sample `δ_2`, via exact
/// spectral projections at eigenvalues `2^k`. Fails if the sample is not
/// diagonalizable with spectrum in the powers of two.
pub fn recover_action(dim: usize, sample_at_2: &LinMap) -> Result<ScalingAction> {
    if sample_at_2.dom != dim || sample_at_2.cod != dim {
        return Err(Error::Dimension {
            context: "recover_action sample",
            expected: dim,
            got: sample_at_2.dom,
        });
    }
    let pow2 = |k: u32| -> Rat {
        let mut v = Rat::one();
        for _ in 0..k {
            v = v * rat(2);
        }
        v
    };
    let s = &sample_at_2.mat;
    // eigenvalues are bounded by n·max|entry|, so weights beyond that bound
    // cannot occur
    let mut bound = Rat::one();
    for r in 0..dim {
        for c in 0..dim {
            let a = s.at(r, c);
            let abs = if a < &Rat::zero() {
                -a.clone()
            } else {
                a.clone()
            };
            if abs > bound {
                bound = abs;
            }
        }
    }
    bound = bound * rat(dim as i64);
    let mut weights = Vec::new();
    let mut total = 0usize;
    let mut k = 0u32;
    while total < dim {
        if pow2(k) > bound {
            return Err(Error::NotAHomogeneity(k));
        }
        let shifted = s - &Matrix::identity(dim).scale(&pow2(k));
        let nullity = dim - shifted.rank();
        if nullity > 0 {
            weights.push(k);
            total += nullity;
        }
        k += 1;
    }
    // Lagrange spectral projections: P_k = Π_{l≠k} (S − 2^l)/(2^k − 2^l)
    let mut projs = BTreeMap::new();
    for &k in &weights {
        let mut p = Matrix::identity(dim);
        for &l in &weights {
            if l == k {
                continue;
            }
            let denom = pow2(k) - pow2(l);
            let factor = (s - &Matrix::identity(dim).scale(&pow2(l))).scale(&(Rat::one() / denom));
            p = p.mul_mat(&factor);
        }
        projs.insert(k, p);
    }
    let action = ScalingAction::new(dim, projs).map_err(|_| Error::NotAHomogeneity(u32::MAX))?;
    // diagonalizability check: the reconstruction must reproduce the sample
    if action.evaluate(&rat(2)) != *sample_at_2 {
        return Err(Error::NotAHomogeneity(0));
    }
    Ok(action)
}

/// Equivariance, weight by weight: `f∘P_k = Q_k∘f` for every weight.
pub fn is_equivariant(f: &LinMap, a: &ScalingAction, b: &ScalingAction) -> Result<bool> {
    if f.dom != a.dim || f.cod != b.dim {
        return Err(Error::Dimension {
            context: "equivariance dimensions",
            expected: a.dim,
            got: f.dom,
        });
    }
    let mut keys = a.weights();
    keys.extend(b.weights());
    keys.sort_unstable();
    keys.dedup();
    Ok(keys
        .iter()
        .all(|&k| f.mat.mul_mat(&a.projection(k)) == b.projection(k).mul_mat(&f.mat)))
}

/// Equivalent sample-based test: enough samples pin down a weight-bounded
/// polynomial family (Vandermonde).
pub fn is_equivariant_at_samples(
    f: &LinMap,
    a: &ScalingAction,
    b: &ScalingAction,
    samples: &[Rat],
) -> bool {
    samples
        .iter()
        .all(|l| f.compose(&a.evaluate(l)) == b.evaluate(l).compose(f))
}

/// A vector bundle in the linear model: an ambient space with a weight-`{0,1}`
/// action. Base = weight-0 image, fiber = weight-1 image.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct VBSpace {
    pub dim: usize,
    pub action: ScalingAction,
}

impl VBSpace {
    pub fn new(action: ScalingAction) -> Result<Self> {
        if action.max_weight() > 1 {
            return Err(Error::BadProjections("bundle actions have weights 0 and 1"));
        }
        Ok(VBSpace {
            dim: action.dim,
            action,
        })
    }

    /// The manifold `ℚ^n` seen as a zero-rank bundle over itself.
    pub fn manifold(dim: usize) -> Self {
        VBSpace {
            dim,
            action: ScalingAction::trivial(dim),
        }
    }

    pub fn base(&self) -> Subspace {
        self.action.weight_space(0)
    }

    pub fn fiber(&self) -> Subspace {
        self.action.weight_space(1)
    }

    pub fn base_dim(&self) -> usize {
        self.base().dim()
    }

    pub fn fiber_rank(&self) -> usize {
        self.fiber().dim()
    }

    /// Bundle projection onto the base, in base coordinates.
    pub fn base_projection(&self) -> LinMap {
        self.base()
            .coordinates()
            .compose(&LinMap::new(self.action.projection(0)))
    }
}

/// A vb-map: an equivariant linear map between bundle spaces.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct VBMap {
    pub src: VBSpace,
    pub tgt: VBSpace,
    pub map: LinMap,
}

impl VBMap {
    pub fn new(src: VBSpace, tgt: VBSpace, map: LinMap) -> Result<Self> {
        if !is_equivariant(&map, &src.action, &tgt.action)? {
            return Err(Error::NotEquivariant("vb-map"));
        }
        Ok(VBMap { src, tgt, map })
    }

    /// Restriction to the bases, in base coordinates on both sides.
    pub fn base_map(&self) -> LinMap {
        let src_b = self.src.base();
        let tgt_b = self.tgt.base();
        tgt_b
            .coordinates()
            .compose(&self.map)
            .compose(&src_b.inclusion())
    }

    pub fn is_fiberwise_injective(&self) -> bool {
        let fib = self.src.fiber();
        self.map.compose(&fib.inclusion()).is_injective()
    }

    /// Fiberwise injective with immersed (injective) base map.
    pub fn is_immersion(&self) -> bool {
        self.is_fiberwise_injective() && self.base_map().is_injective()
    }

    pub fn compose(&self, earlier: &VBMap) -> VBMap {
        VBMap {
            src: earlier.src.clone(),
            tgt: self.tgt.clone(),
            map: self.map.compose(&earlier.map),
        }
    }
}

/// Pullback bundle `h^*E ⊆ P × E` along a map into the base of `E`, with its
/// structure maps.
#[derive(Clone, Debug)]
pub struct PullbackBundle {
    pub total: VBSpace,
    /// inclusion of the carrier into `P ⊕ E`
    pub incl: LinMap,
    /// retraction `P ⊕ E → carrier` (pivot coordinates)
    pub retract: LinMap,
    /// projection to `P`
    pub pr_base: LinMap,
    /// projection to the ambient of `E`
    pub pr_bundle: LinMap,
}

impl PullbackBundle {
    /// Unique factoring of a compatible cone `(u, w)` through the carrier.
    pub fn factor(&self, u: &LinMap, w: &LinMap) -> Result<LinMap> {
        let cone = u.into_pair(w);
        let fac = self.retract.compose(&cone);
        if self.incl.compose(&fac) != cone {
            return Err(Error::Unsolvable(
                "cone does not satisfy the pullback constraint",
            ));
        }
        Ok(fac)
    }
}

/// Pullback of the bundle `e` along `h: ℚ^p → base(e)` (given in base
/// coordinates). Carrier: pairs `(x, v)` with `h(x) = π(v)`.
pub fn pullback_bundle(h: &LinMap, e: &VBSpace) -> Result<PullbackBundle> {
    let base = e.base();
    if h.cod != base.dim() {
        return Err(Error::Dimension {
            context: "pullback base map codomain",
            expected: base.dim(),
            got: h.cod,
        });
    }
    let p = h.dom;
    // constraint: incl_base(h(x)) − P_0 v = 0 inside the ambient of e
    let lhs = base.inclusion().compose(h);
    let proj0 = LinMap::new(e.action.projection(0));
    // carrier: pairs (x, v) with incl(h(x)) = δ_0(v) inside P ⊕ ambient(E)
    let fp = fiber_product(&lhs, &proj0)?;
    let amb_action = ScalingAction::trivial(p).product(&e.action);
    let restricted = amb_action.restrict(&fp.carrier)?;
    let total = VBSpace::new(restricted)?;
    Ok(PullbackBundle {
        total,
        incl: fp.incl.clone(),
        retract: fp.retract.clone(),
        pr_base: fp.pr1.clone(),
        pr_bundle: fp.pr2.clone(),
    })
}

/// Quotient of a bundle by an action-invariant subspace (the fiber part of a
/// wide sub-bundle), with the induced action.
pub fn quotient_action(e: &VBSpace, sub: &Subspace) -> Result<(VBSpace, QuotientPresentation)> {
    if !e.action.leaves_invariant(sub) {
        return Err(Error::NotInvariant("quotient of bundle"));
    }
    let q = QuotientPresentation::new(e.dim, sub.clone());
    let action = e.action.quotient(&q)?;
    Ok((VBSpace::new(action)?, q))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rat::ratq;

    fn tangent_line() -> VBSpace {
        // Tℚ = ℚ² graded (0,1)
        VBSpace::new(ScalingAction::diagonal(&[0, 1])).unwrap()
    }

    #[test]
    fn evaluate_examples() {
        let t = tangent_line();
        assert_eq!(
            t.action.evaluate(&rat(3)).mat,
            Matrix::from_int_rows(&[&[1, 0], &[0, 3]])
        );
        assert_eq!(t.action.evaluate(&rat(1)), LinMap::identity(2));
        // double-tangent diagonal action δ^h∘δ^v on ℚ⁴ at λ=2: the composite
        // of the two standard gradings multiplies to weights (0,1,1,2)
        let diag = ScalingAction::diagonal(&[0, 1, 1, 2]);
        assert_eq!(
            diag.evaluate(&rat(2)).mat,
            Matrix::diagonal(&[rat(1), rat(2), rat(2), rat(4)])
        );
    }

    #[test]
    fn action_is_monoid_action() {
        let a = ScalingAction::diagonal(&[0, 1, 2]);
        let l = ratq(3, 2);
        let m = rat(-2);
        assert_eq!(
            a.evaluate(&l).compose(&a.evaluate(&m)),
            a.evaluate(&(l * m))
        );
    }

    #[test]
    fn recover_action_examples() {
        let s = LinMap::new(Matrix::from_int_rows(&[&[1, 0], &[0, 2]]));
        let a = recover_action(2, &s).unwrap();
        assert_eq!(a.projection(0), Matrix::from_int_rows(&[&[1, 0], &[0, 0]]));
        assert_eq!(a.projection(1), Matrix::from_int_rows(&[&[0, 0], &[0, 1]]));
        let id = LinMap::identity(3);
        let a = recover_action(3, &id).unwrap();
        assert_eq!(a.weights(), vec![0]);
        let s = LinMap::new(Matrix::diagonal(&[rat(1), rat(2), rat(2), rat(4)]));
        let a = recover_action(4, &s).unwrap();
        assert_eq!(a.weights(), vec![0, 1, 2]);
        assert_eq!(a.projection(0).rank(), 1);
        assert_eq!(a.projection(1).rank(), 2);
        assert_eq!(a.projection(2).rank(), 1);
        // spectrum off the powers of two is rejected
        let bad = LinMap::new(Matrix::from_int_rows(&[&[3, 0], &[0, 1]]));
        assert!(recover_action(2, &bad).is_err());
        // non-diagonalizable sample is rejected
        let jordan = LinMap::new(Matrix::from_int_rows(&[&[1, 1], &[0, 1]]));
        assert!(recover_action(2, &jordan).is_err());
    }

    #[test]
    fn recover_round_trips() {
        let a = ScalingAction::diagonal(&[0, 1, 1, 2]);
        let b = recover_action(4, &a.evaluate(&rat(2))).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn equivariance_examples() {
        let t = tangent_line();
        let id = LinMap::identity(2);
        assert!(is_equivariant(&id, &t.action, &t.action).unwrap());
        // tangent of a linear map g: block diagonal g⊕g between tangents
        let g = LinMap::new(Matrix::from_int_rows(&[&[7]]));
        let tg = g.direct_sum(&g);
        assert!(is_equivariant(&tg, &t.action, &t.action).unwrap());
        // swapping base and fiber is not equivariant
        let swap = LinMap::new(Matrix::from_int_rows(&[&[0, 1], &[1, 0]]));
        assert!(!is_equivariant(&swap, &t.action, &t.action).unwrap());
        // dimension mismatch errors
        let bad = LinMap::identity(3);
        assert!(is_equivariant(&bad, &t.action, &t.action).is_err());
    }

    #[test]
    fn two_sample_sufficiency() {
        // weight ≤ 2 actions: samples {0,2,3} decide equivariance
        let a = ScalingAction::diagonal(&[0, 1, 2]);
        let b = ScalingAction::diagonal(&[0, 1, 2]);
        let samples = [rat(0), rat(2), rat(3)];
        let f = LinMap::new(Matrix::from_int_rows(&[&[2, 0, 0], &[0, 3, 0], &[0, 0, 5]]));
        assert_eq!(
            is_equivariant(&f, &a, &b).unwrap(),
            is_equivariant_at_samples(&f, &a, &b, &samples)
        );
        let g = LinMap::new(Matrix::from_int_rows(&[&[0, 1, 0], &[1, 0, 0], &[0, 0, 1]]));
        assert_eq!(
            is_equivariant(&g, &a, &b).unwrap(),
            is_equivariant_at_samples(&g, &a, &b, &samples)
        );
    }

    #[test]
    fn pullback_examples() {
        let t = tangent_line();
        // identity pullback: same dimensions, intertwined by pr_bundle
        let pb = pullback_bundle(&LinMap::identity(1), &t).unwrap();
        assert_eq!(pb.total.dim, 2);
        assert!(is_equivariant(&pb.pr_bundle, &pb.total.action, &t.action).unwrap());
        assert!(pb.pr_bundle.is_bijective());
        // zero map from a line into the base: carrier dim 2
        let pb = pullback_bundle(&LinMap::zero(1, 1), &t).unwrap();
        assert_eq!(pb.total.dim, 2);
        assert_eq!(pb.total.fiber_rank(), 1);
        // inclusion of a line into a 2-dim base preserves fiber rank
        let e = VBSpace::new(ScalingAction::diagonal(&[0, 0, 1])).unwrap();
        let inc = LinMap::new(Matrix::from_int_rows(&[&[1], &[0]]));
        let pb = pullback_bundle(&inc, &e).unwrap();
        assert_eq!(pb.total.fiber_rank(), 1);
        assert_eq!(pb.total.base_dim(), 1);
    }

    #[test]
    fn quotient_action_examples() {
        let t2 = VBSpace::new(ScalingAction::diagonal(&[0, 0, 1, 1])).unwrap();
        // zero subspace: same action
        let (q, _) = quotient_action(&t2, &Subspace::zero(4)).unwrap();
        assert_eq!(q.action, t2.action);
        // one fiber line: quotient fiber rank 1
        let line = Subspace::from_spanning(4, &Matrix::from_int_rows(&[&[0, 0, 1, 0]]));
        let (q, _) = quotient_action(&t2, &line).unwrap();
        assert_eq!(q.fiber_rank(), 1);
        assert_eq!(q.base_dim(), 2);
        // whole fiber: pure weight-0 quotient
        let fiber = t2.fiber();
        let (q, _) = quotient_action(&t2, &fiber).unwrap();
        assert_eq!(q.fiber_rank(), 0);
        assert_eq!(q.action.weights(), vec![0]);
        // non-invariant subspace rejected
        let skew = Subspace::from_spanning(4, &Matrix::from_int_rows(&[&[1, 0, 1, 0]]));
        assert!(quotient_action(&t2, &skew).is_err());
    }
}
