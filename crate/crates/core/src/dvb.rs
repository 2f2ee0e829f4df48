//! Double vector spaces in the linear model: two commuting weight-`{0,1}`
//! scaling actions on one space, with flips, lifts, side-pullbacks, fiber
//! products, vb-objects and quotients realized as genuine cokernels.
//!
//! Everything is intrinsic: a derived object (pullback carrier, quotient) is
//! re-coordinatized onto a full `ℚ^k` through its canonical pivot basis, and
//! the structure maps (inclusion, retraction, projections, section) are kept
//! so that "canonical isomorphisms" can be built as explicit matrices from
//! universal properties.

use crate::error::Error;
use crate::homog::{is_equivariant, ScalingAction, VBMap, VBSpace};
use crate::linalg::{fiber_product, LinMap, QuotientPresentation, Subspace};
use crate::matrix::Matrix;
use crate::Result;

/// A double vector space: commuting horizontal and vertical bundle actions.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct Dvs {
    pub dim: usize,
    pub h: ScalingAction,
    pub v: ScalingAction,
}

impl Dvs {
    pub fn new(h: ScalingAction, v: ScalingAction) -> Result<Self> {
        if h.dim != v.dim {
            return Err(Error::Dimension {
                context: "double vector space actions",
                expected: h.dim,
                got: v.dim,
            });
        }
        if h.max_weight() > 1 || v.max_weight() > 1 {
            return Err(Error::BadProjections(
                "double space actions have weights 0 and 1",
            ));
        }
        let dim = h.dim;
        for (_, p) in h.projections() {
            for (_, q) in v.projections() {
                if p.mul_mat(q) != q.mul_mat(p) {
                    return Err(Error::BadProjections(
                        "horizontal and vertical actions do not commute",
                    ));
                }
            }
        }
        let d = Dvs { dim, h, v };
        d.check_graded_family()?;
        Ok(d)
    }

    /// The four products of weight projections must form a complete
    /// orthogonal idempotent family.
    fn check_graded_family(&self) -> Result<()> {
        let mut sum = Matrix::zero(self.dim, self.dim);
        let mut parts = Vec::new();
        for i in 0..=1u32 {
            for j in 0..=1u32 {
                let p = self.graded_projection(i, j);
                sum = &sum + &p;
                parts.push(p);
            }
        }
        if sum != Matrix::identity(self.dim) {
            return Err(Error::BadProjections(
                "graded projections do not sum to identity",
            ));
        }
        for (a, p) in parts.iter().enumerate() {
            for (b, q) in parts.iter().enumerate() {
                let prod = p.mul_mat(q);
                if a == b {
                    if prod != *p {
                        return Err(Error::BadProjections("graded projection not idempotent"));
                    }
                } else if !prod.is_zero() {
                    return Err(Error::BadProjections("graded projections not orthogonal"));
                }
            }
        }
        Ok(())
    }

    /// `P^h_i · P^v_j`.
    pub fn graded_projection(&self, hw: u32, vw: u32) -> Matrix {
        self.h.projection(hw).mul_mat(&self.v.projection(vw))
    }

    pub fn side_a(&self) -> Subspace {
        self.h.weight_space(0)
    }

    pub fn side_b(&self) -> Subspace {
        self.v.weight_space(0)
    }

    pub fn base(&self) -> Subspace {
        Subspace::from_spanning(self.dim, &self.graded_projection(0, 0).transpose())
    }

    pub fn core(&self) -> Subspace {
        Subspace::from_spanning(self.dim, &self.graded_projection(1, 1).transpose())
    }

    pub fn core_rank(&self) -> usize {
        self.core().dim()
    }

    /// Horizontal side bundle `A → M` in its own coordinates: the restriction
    /// of the vertical action to the horizontal weight-0 part.
    pub fn side_a_vb(&self) -> Result<VBSpace> {
        VBSpace::new(self.v.restrict(&self.side_a())?)
    }

    pub fn side_b_vb(&self) -> Result<VBSpace> {
        VBSpace::new(self.h.restrict(&self.side_b())?)
    }

    /// `π̂^h`: the projection onto the horizontal side bundle, in side
    /// coordinates.
    pub fn proj_side_a(&self) -> LinMap {
        self.side_a()
            .coordinates()
            .compose(&LinMap::new(self.h.projection(0)))
    }

    pub fn proj_side_b(&self) -> LinMap {
        self.side_b()
            .coordinates()
            .compose(&LinMap::new(self.v.projection(0)))
    }

    /// Total flip: the same space with the two actions exchanged.
    pub fn flip(&self) -> Dvs {
        Dvs {
            dim: self.dim,
            h: self.v.clone(),
            v: self.h.clone(),
        }
    }

    /// Direct product with diagonal actions.
    pub fn product(&self, other: &Dvs) -> Dvs {
        Dvs {
            dim: self.dim + other.dim,
            h: self.h.product(&other.h),
            v: self.v.product(&other.v),
        }
    }
}

/// A non-flipping dvb-map: equivariant for both actions.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct DvbMap {
    pub src: Dvs,
    pub tgt: Dvs,
    pub map: LinMap,
}

impl DvbMap {
    pub fn new(src: Dvs, tgt: Dvs, map: LinMap) -> Result<Self> {
        if map.dom != src.dim || map.cod != tgt.dim {
            return Err(Error::Dimension {
                context: "dvb-map shape",
                expected: src.dim,
                got: map.dom,
            });
        }
        if !is_equivariant(&map, &src.h, &tgt.h)? {
            return Err(Error::NotEquivariant("dvb-map (horizontal action)"));
        }
        if !is_equivariant(&map, &src.v, &tgt.v)? {
            return Err(Error::NotEquivariant("dvb-map (vertical action)"));
        }
        Ok(DvbMap { src, tgt, map })
    }

    pub fn identity(d: &Dvs) -> Self {
        DvbMap {
            src: d.clone(),
            tgt: d.clone(),
            map: LinMap::identity(d.dim),
        }
    }

    pub fn compose(&self, earlier: &DvbMap) -> DvbMap {
        DvbMap {
            src: earlier.src.clone(),
            tgt: self.tgt.clone(),
            map: self.map.compose(&earlier.map),
        }
    }

    /// Horizontal side-map `α`, in side coordinates of source and target.
    pub fn side_a_map(&self) -> LinMap {
        self.tgt
            .side_a()
            .coordinates()
            .compose(&self.map)
            .compose(&self.src.side_a().inclusion())
    }

    /// Vertical side-map `β`.
    pub fn side_b_map(&self) -> LinMap {
        self.tgt
            .side_b()
            .coordinates()
            .compose(&self.map)
            .compose(&self.src.side_b().inclusion())
    }

    /// Base map `f`.
    pub fn base_map(&self) -> LinMap {
        self.tgt
            .base()
            .coordinates()
            .compose(&self.map)
            .compose(&self.src.base().inclusion())
    }

    /// Same total matrix read between the flipped spaces, with the side maps
    /// exchanging roles.
    pub fn flip(&self) -> DvbMap {
        DvbMap {
            src: self.src.flip(),
            tgt: self.tgt.flip(),
            map: self.map.clone(),
        }
    }
}

/// How a flip map arose; partial flips record which product factors flip.
#[derive(Clone, PartialEq, Eq, Debug)]
pub enum FlipKind {
    Total,
    Partial(Vec<bool>),
    Identity,
}

/// A flip map: intertwines the horizontal action of the source with the
/// vertical action of the target and vice versa (checked for `Total` and
/// `Identity`; `Partial` is validated by its constructor's ambient data).
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct FlipMap {
    pub src: Dvs,
    pub tgt: Dvs,
    pub map: LinMap,
    pub kind: FlipKind,
}

impl FlipMap {
    pub fn new_total(src: Dvs, tgt: Dvs, map: LinMap) -> Result<Self> {
        FlipMap::checked(src, tgt, map, FlipKind::Total)
    }

    fn checked(src: Dvs, tgt: Dvs, map: LinMap, kind: FlipKind) -> Result<Self> {
        if map.dom != src.dim || map.cod != tgt.dim {
            return Err(Error::Dimension {
                context: "flip map shape",
                expected: src.dim,
                got: map.dom,
            });
        }
        if !is_equivariant(&map, &src.h, &tgt.v)? {
            return Err(Error::NotEquivariant("flip map (h-source vs v-target)"));
        }
        if !is_equivariant(&map, &src.v, &tgt.h)? {
            return Err(Error::NotEquivariant("flip map (v-source vs h-target)"));
        }
        Ok(FlipMap {
            src,
            tgt,
            map,
            kind,
        })
    }

    /// The tautological flip `D ⇸ flip(D)` with identity matrix.
    pub fn identity_flip(d: &Dvs) -> Self {
        FlipMap {
            src: d.clone(),
            tgt: d.flip(),
            map: LinMap::identity(d.dim),
            kind: FlipKind::Identity,
        }
    }

    /// A partial flip of a product: identity matrix, masked factors get their
    /// actions exchanged in the target.
    pub fn partial_flip(factors: &[Dvs], mask: &[bool]) -> Result<Self> {
        assert_eq!(factors.len(), mask.len());
        let src = factors
            .iter()
            .skip(1)
            .fold(factors[0].clone(), |acc, d| acc.product(d));
        let flipped: Vec<Dvs> = factors
            .iter()
            .zip(mask)
            .map(|(d, &m)| if m { d.flip() } else { d.clone() })
            .collect();
        let tgt = flipped
            .iter()
            .skip(1)
            .fold(flipped[0].clone(), |acc, d| acc.product(d));
        Ok(FlipMap {
            map: LinMap::identity(src.dim),
            src,
            tgt,
            kind: FlipKind::Partial(mask.to_vec()),
        })
    }

    pub fn inverse(&self) -> Result<FlipMap> {
        Ok(FlipMap {
            src: self.tgt.clone(),
            tgt: self.src.clone(),
            map: self.map.inverse()?,
            kind: self.kind.clone(),
        })
    }

    /// `g ∘ self` for a dvb-map `g` out of the target.
    pub fn then_dvb(&self, g: &DvbMap) -> Result<FlipMap> {
        if g.src != self.tgt {
            return Err(Error::NotComposable("flip target vs dvb-map source"));
        }
        Ok(FlipMap {
            src: self.src.clone(),
            tgt: g.tgt.clone(),
            map: g.map.compose(&self.map),
            kind: self.kind.clone(),
        })
    }

    /// `self ∘ f` for a dvb-map `f` into the source.
    pub fn after_dvb(&self, f: &DvbMap) -> Result<FlipMap> {
        if f.tgt != self.src {
            return Err(Error::NotComposable("dvb-map target vs flip source"));
        }
        Ok(FlipMap {
            src: f.src.clone(),
            tgt: self.tgt.clone(),
            map: self.map.compose(&f.map),
            kind: self.kind.clone(),
        })
    }

    /// Is the total flip-equivariance law satisfied (sampled projection-wise)?
    pub fn is_total(&self) -> bool {
        is_equivariant(&self.map, &self.src.h, &self.tgt.v).unwrap_or(false)
            && is_equivariant(&self.map, &self.src.v, &self.tgt.h).unwrap_or(false)
    }
}

/// Horizontal dvb-lift `E^h`: trivial horizontal action, `δ` vertical.
pub fn h_lift(e: &VBSpace) -> Dvs {
    Dvs {
        dim: e.dim,
        h: ScalingAction::trivial(e.dim),
        v: e.action.clone(),
    }
}

/// Vertical dvb-lift `E^v`: `δ` horizontal, trivial vertical.
pub fn v_lift(e: &VBSpace) -> Dvs {
    Dvs {
        dim: e.dim,
        h: e.action.clone(),
        v: ScalingAction::trivial(e.dim),
    }
}

/// Lift of a vb-map to the horizontal dvb-lifts.
pub fn lift_map_h(phi: &VBMap) -> DvbMap {
    DvbMap {
        src: h_lift(&phi.src),
        tgt: h_lift(&phi.tgt),
        map: phi.map.clone(),
    }
}

pub fn lift_map_v(phi: &VBMap) -> DvbMap {
    DvbMap {
        src: v_lift(&phi.src),
        tgt: v_lift(&phi.tgt),
        map: phi.map.clone(),
    }
}

/// The two canonical surmersions `π̲^h: D → A^h` and `π̲^v: D → B^v`.
pub fn canonical_surmersions(d: &Dvs) -> Result<(DvbMap, DvbMap)> {
    let a = d.side_a_vb()?;
    let b = d.side_b_vb()?;
    let pi_h = DvbMap::new(d.clone(), h_lift(&a), d.proj_side_a())?;
    let pi_v = DvbMap::new(d.clone(), v_lift(&b), d.proj_side_b())?;
    Ok((pi_h, pi_v))
}

/// Fiber product of a dvb-cospan, with its structure maps.
#[derive(Clone, Debug)]
pub struct DvsFiberProduct {
    pub total: Dvs,
    pub incl: LinMap,
    pub retract: LinMap,
    pub pr1: LinMap,
    pub pr2: LinMap,
}

pub fn fiber_product_dvs(f: &DvbMap, g: &DvbMap) -> Result<DvsFiberProduct> {
    if f.tgt != g.tgt {
        return Err(Error::Dimension {
            context: "dvb cospan target",
            expected: f.tgt.dim,
            got: g.tgt.dim,
        });
    }
    let fp = fiber_product(&f.map, &g.map)?;
    let h = f.src.h.product(&g.src.h).restrict(&fp.carrier)?;
    let v = f.src.v.product(&g.src.v).restrict(&fp.carrier)?;
    Ok(DvsFiberProduct {
        total: Dvs::new(h, v)?,
        incl: fp.incl,
        retract: fp.retract,
        pr1: fp.pr1,
        pr2: fp.pr2,
    })
}

/// A side-pullback `φ^{*,h}D` or `ψ^{*,v}D`, kept with its carrier structure.
#[derive(Clone, Debug)]
pub struct SidePullback {
    pub total: Dvs,
    /// inclusion carrier → `E ⊕ D`
    pub incl: LinMap,
    /// pivot retraction `E ⊕ D` → carrier
    pub retract: LinMap,
    pub pr_e: LinMap,
    pub pr_d: LinMap,
    e_dim: usize,
    d_dim: usize,
}

impl SidePullback {
    /// Unique factoring of a compatible cone `(u, w)` through the carrier.
    pub fn factor(&self, u: &LinMap, w: &LinMap) -> Result<LinMap> {
        assert_eq!(u.cod, self.e_dim);
        assert_eq!(w.cod, self.d_dim);
        let cone = u.into_pair(w);
        let fac = self.retract.compose(&cone);
        if self.incl.compose(&fac) != cone {
            return Err(Error::Unsolvable(
                "cone does not satisfy the pullback constraint",
            ));
        }
        Ok(fac)
    }

    /// Carrier coordinates of a map valued in `E ⊕ D` that lands on the
    /// carrier.
    pub fn into_carrier(&self, raw: &LinMap) -> Result<LinMap> {
        let fac = self.retract.compose(raw);
        if self.incl.compose(&fac) != *raw {
            return Err(Error::Unsolvable(
                "map does not land on the pullback carrier",
            ));
        }
        Ok(fac)
    }
}

fn side_pullback(e: &VBSpace, phi: &LinMap, d: &Dvs, horizontal: bool) -> Result<SidePullback> {
    if phi.dom != e.dim || phi.cod != d.dim {
        return Err(Error::Dimension {
            context: "side-pullback map shape",
            expected: e.dim,
            got: phi.dom,
        });
    }
    let side_proj = if horizontal {
        d.h.projection(0)
    } else {
        d.v.projection(0)
    };
    // the map must be valued in the side bundle…
    if side_proj.mul_mat(&phi.mat) != phi.mat {
        return Err(Error::QuotientIncompatible(
            "side-pullback map is not valued in the side bundle",
        ));
    }
    // …and be a vb-map into it (side bundle action = other action restricted)
    let side_action = if horizontal { &d.v } else { &d.h };
    for k in 0..=1u32 {
        if phi.mat.mul_mat(&e.action.projection(k)) != side_action.projection(k).mul_mat(&phi.mat) {
            return Err(Error::NotEquivariant("side-pullback map"));
        }
    }
    let fp = fiber_product(phi, &LinMap::new(side_proj))?;
    let (h_amb, v_amb) = if horizontal {
        (
            ScalingAction::trivial(e.dim).product(&d.h),
            e.action.product(&d.v),
        )
    } else {
        (
            e.action.product(&d.h),
            ScalingAction::trivial(e.dim).product(&d.v),
        )
    };
    let h = h_amb.restrict(&fp.carrier)?;
    let v = v_amb.restrict(&fp.carrier)?;
    Ok(SidePullback {
        total: Dvs::new(h, v)?,
        incl: fp.incl,
        retract: fp.retract,
        pr_e: fp.pr1,
        pr_d: fp.pr2,
        e_dim: e.dim,
        d_dim: d.dim,
    })
}

/// Horizontal side-pullback along a vb-map `φ: E → A ⊆ D` (valued in the
/// horizontal side bundle, in the coordinates of `D`).
pub fn side_pullback_h(e: &VBSpace, phi: &LinMap, d: &Dvs) -> Result<SidePullback> {
    side_pullback(e, phi, d, true)
}

/// Vertical side-pullback along a vb-map valued in the vertical side bundle.
pub fn side_pullback_v(e: &VBSpace, psi: &LinMap, d: &Dvs) -> Result<SidePullback> {
    side_pullback(e, psi, d, false)
}

/// Side-pullback of a dvb-map along a square of vb-maps: carries `(e, d)` to
/// `(γ(e), φ(d))` between the given pullbacks.
pub fn side_pullback_map(
    gamma: &LinMap,
    sp1: &SidePullback,
    sp2: &SidePullback,
    phi: &DvbMap,
) -> Result<DvbMap> {
    let u = gamma.compose(&sp1.pr_e);
    let w = phi.map.compose(&sp1.pr_d);
    let map = sp2.factor(&u, &w)?;
    DvbMap::new(sp1.total.clone(), sp2.total.clone(), map)
}

/// Horizontal sharpening `φ^h_†: D_1 → α^{*,h}D_2` of a dvb-map.
pub fn sharpen_h(phi: &DvbMap) -> Result<(SidePullback, DvbMap)> {
    let e = phi.src.side_a_vb()?;
    // α valued in the target, restricted to the source side bundle
    let alpha_raw = phi.map.compose(&phi.src.side_a().inclusion());
    let sp = side_pullback_h(&e, &alpha_raw, &phi.tgt)?;
    let pi_h = phi
        .src
        .side_a()
        .coordinates()
        .compose(&LinMap::new(phi.src.h.projection(0)));
    let emb = sp.factor(&pi_h, &phi.map)?;
    let dagger = DvbMap::new(phi.src.clone(), sp.total.clone(), emb)?;
    Ok((sp, dagger))
}

/// Vertical sharpening `φ^v_†: D_1 → β^{*,v}D_2`.
pub fn sharpen_v(phi: &DvbMap) -> Result<(SidePullback, DvbMap)> {
    let e = phi.src.side_b_vb()?;
    let beta_raw = phi.map.compose(&phi.src.side_b().inclusion());
    let sp = side_pullback_v(&e, &beta_raw, &phi.tgt)?;
    let pi_v = phi
        .src
        .side_b()
        .coordinates()
        .compose(&LinMap::new(phi.src.v.projection(0)));
    let emb = sp.factor(&pi_v, &phi.map)?;
    let dagger = DvbMap::new(phi.src.clone(), sp.total.clone(), emb)?;
    Ok((sp, dagger))
}

/// Pullback of a flip map along a vb-map into the horizontal side of its
/// source: restriction of `id × Υ`, from the horizontal pullback of the
/// source to the vertical pullback of the target.
pub fn pullback_flip_h_to_v(
    e: &VBSpace,
    phi: &LinMap,
    ups: &FlipMap,
) -> Result<(SidePullback, SidePullback, FlipMap)> {
    let sp1 = side_pullback_h(e, phi, &ups.src)?;
    let psi2 = ups.map.compose(phi);
    let sp2 = side_pullback_v(e, &psi2, &ups.tgt)?;
    let map = sp2.factor(&sp1.pr_e, &ups.map.compose(&sp1.pr_d))?;
    let flip = FlipMap::new_total(sp1.total.clone(), sp2.total.clone(), map)?;
    Ok((sp1, sp2, flip))
}

/// Pullback of a flip map along a vb-map into the vertical side of its
/// source, landing in the horizontal pullback of the target.
pub fn pullback_flip_v_to_h(
    e: &VBSpace,
    psi: &LinMap,
    ups: &FlipMap,
) -> Result<(SidePullback, SidePullback, FlipMap)> {
    let sp1 = side_pullback_v(e, psi, &ups.src)?;
    let phi2 = ups.map.compose(psi);
    let sp2 = side_pullback_h(e, &phi2, &ups.tgt)?;
    let map = sp2.factor(&sp1.pr_e, &ups.map.compose(&sp1.pr_d))?;
    let flip = FlipMap::new_total(sp1.total.clone(), sp2.total.clone(), map)?;
    Ok((sp1, sp2, flip))
}

/// A quotient of a double space, kept with its presentation.
#[derive(Clone, Debug)]
pub struct DvsQuotient {
    pub total: Dvs,
    pub pres: QuotientPresentation,
    pub quot: DvbMap,
    /// the subspace actually killed: the fiber part of the embedded image
    pub killed: Subspace,
}

fn quotient_side(iota: &DvbMap, horizontal: bool) -> Result<DvsQuotient> {
    if !iota.map.is_injective() {
        return Err(Error::NotInjective("quotient embedding"));
    }
    let side_ok = if horizontal {
        iota.side_a_map() == LinMap::identity(iota.src.side_a().dim())
            && iota.src.side_a().dim() == iota.tgt.side_a().dim()
    } else {
        iota.side_b_map() == LinMap::identity(iota.src.side_b().dim())
            && iota.src.side_b().dim() == iota.tgt.side_b().dim()
    };
    if !side_ok {
        return Err(Error::NotWide(
            "quotient embedding must fix the side bundle",
        ));
    }
    // kill the fiber part of the image over the preserved side
    let fiber_proj = if horizontal {
        iota.tgt.h.projection(1)
    } else {
        iota.tgt.v.projection(1)
    };
    let killed =
        Subspace::from_spanning(iota.tgt.dim, &fiber_proj.mul_mat(&iota.map.mat).transpose());
    let pres = QuotientPresentation::new(iota.tgt.dim, killed.clone());
    let h = iota.tgt.h.quotient(&pres)?;
    let v = iota.tgt.v.quotient(&pres)?;
    let total = Dvs::new(h, v)?;
    let quot = DvbMap::new(iota.tgt.clone(), total.clone(), pres.proj.clone())?;
    Ok(DvsQuotient {
        total,
        pres,
        quot,
        killed,
    })
}

/// Horizontal quotient (cokernel in the category of horizontal vb-objects):
/// the embedding must fix the horizontal side bundle.
pub fn quotient_h(iota: &DvbMap) -> Result<DvsQuotient> {
    quotient_side(iota, true)
}

/// Vertical quotient.
pub fn quotient_v(iota: &DvbMap) -> Result<DvsQuotient> {
    quotient_side(iota, false)
}

/// Quotient of a dvb-map between two quotient presentations; unique with
/// `(φ/ψ)∘q₁ = q₂∘φ`.
pub fn quotient_dvb_map(phi: &DvbMap, q_src: &DvsQuotient, q_tgt: &DvsQuotient) -> Result<DvbMap> {
    let induced = crate::linalg::induced_quotient_map(&phi.map, &q_src.pres, &q_tgt.pres)?;
    DvbMap::new(q_src.total.clone(), q_tgt.total.clone(), induced)
}

/// Quotient of a 2-dvb-map `(φ, ψ): ι₁ ⇒ ι₂` between the quotients of the
/// two embeddings; the square is checked before descending.
pub fn quotient_dvb_map_of_square(
    phi: &DvbMap,
    psi: &DvbMap,
    iota1: &DvbMap,
    iota2: &DvbMap,
    q_src: &DvsQuotient,
    q_tgt: &DvsQuotient,
) -> Result<DvbMap> {
    if phi.map.compose(&iota1.map) != iota2.map.compose(&psi.map) {
        return Err(Error::NotCommuting("quotient square of dvb-maps"));
    }
    quotient_dvb_map(phi, q_src, q_tgt)
}

/// Quotient of a flip map between a source quotient and a target quotient
/// (typically a vertical and a horizontal one); unique with
/// `(B/A)∘q_src = q_tgt∘B`.
pub fn quotient_flip(flip: &FlipMap, q_src: &DvsQuotient, q_tgt: &DvsQuotient) -> Result<FlipMap> {
    // well-definedness: the flip must carry the killed subspace into the
    // killed subspace
    for i in 0..q_src.killed.dim() {
        let img = flip.map.apply(q_src.killed.basis.row(i));
        if !q_tgt.killed.contains_vec(&img) {
            return Err(Error::QuotientIncompatible(
                "flip does not carry the killed subspace into the killed subspace",
            ));
        }
    }
    let map = q_tgt.pres.proj.compose(&flip.map).compose(&q_src.pres.sec);
    debug_assert_eq!(
        map.compose(&q_src.pres.proj),
        q_tgt.pres.proj.compose(&flip.map)
    );
    FlipMap::new_total(q_src.total.clone(), q_tgt.total.clone(), map)
}

/// Orientation of a vb-object reading of a double space.
#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub enum Orientation {
    Horizontal,
    Vertical,
}

/// A vector bundle `(D, κ)` with a structural scaling action `τ` whose fixed
/// locus is the embedded bundle `j: E → D`.
#[derive(Clone, Debug)]
pub struct VbObject {
    pub carrier: VBSpace,
    pub embedded: VBSpace,
    pub j: LinMap,
    pub tau: ScalingAction,
    pub orientation: Orientation,
}

impl VbObject {
    /// Checks conditions (i)–(v); errors carry the violated condition label.
    pub fn validate(&self) -> Result<()> {
        if self.carrier.action.max_weight() > 1 {
            return Err(Error::VbObject {
                condition: "i",
                detail: "carrier is not a bundle action",
            });
        }
        if !self.j.is_injective() {
            return Err(Error::VbObject {
                condition: "ii",
                detail: "embedding is not injective",
            });
        }
        if !is_equivariant(&self.j, &self.embedded.action, &self.carrier.action)? {
            return Err(Error::VbObject {
                condition: "ii",
                detail: "embedding is not a vb-map",
            });
        }
        if self.tau.max_weight() > 1 {
            return Err(Error::VbObject {
                condition: "iii",
                detail: "structural action is not weight-{0,1}",
            });
        }
        // (iii): τ acts by bundle endomorphisms, i.e. commutes with κ
        for (_, p) in self.tau.projections() {
            for (_, q) in self.carrier.action.projections() {
                if p.mul_mat(q) != q.mul_mat(p) {
                    return Err(Error::VbObject {
                        condition: "iii",
                        detail: "structural action does not commute with the bundle action",
                    });
                }
            }
        }
        // (v): the embedded bundle is pointwise fixed by τ
        if LinMap::new(self.tau.projection(0)).compose(&self.j) != self.j {
            return Err(Error::VbObject {
                condition: "v",
                detail: "embedded bundle is not fixed by the structural action",
            });
        }
        // (iv): the τ-fixed points are exactly the image of j
        if self.tau.weight_space(0) != self.j.image() {
            return Err(Error::VbObject {
                condition: "iv",
                detail: "structural fixed locus differs from the embedded image",
            });
        }
        Ok(())
    }
}

/// Reads a double space as a vb-object in the requested orientation.
pub fn vb_object_from_dvs(d: &Dvs, orientation: Orientation) -> Result<VbObject> {
    let o = match orientation {
        Orientation::Horizontal => VbObject {
            carrier: VBSpace::new(d.v.clone())?,
            embedded: d.side_a_vb()?,
            j: d.side_a().inclusion(),
            tau: d.h.clone(),
            orientation,
        },
        Orientation::Vertical => VbObject {
            carrier: VBSpace::new(d.h.clone())?,
            embedded: d.side_b_vb()?,
            j: d.side_b().inclusion(),
            tau: d.v.clone(),
            orientation,
        },
    };
    o.validate()?;
    Ok(o)
}

/// Reassembles the double space from a vb-object; inverse of
/// [`vb_object_from_dvs`] up to the canonical fiber-product identification.
pub fn dvs_from_vb_object(o: &VbObject) -> Result<Dvs> {
    o.validate()?;
    match o.orientation {
        Orientation::Horizontal => Dvs::new(o.tau.clone(), o.carrier.action.clone()),
        Orientation::Vertical => Dvs::new(o.carrier.action.clone(), o.tau.clone()),
    }
}

/// The double space structure carried by the fiber product
/// `D ×_{τ₀(D)} E`, together with the canonical projection onto `D` that
/// identifies it with [`dvs_from_vb_object`].
pub fn vb_object_fiber_product(o: &VbObject) -> Result<(Dvs, LinMap)> {
    o.validate()?;
    let tau0 = LinMap::new(o.tau.projection(0));
    let fp = fiber_product(&tau0, &o.j)?;
    // horizontal action induced by τ × id, vertical by κ × δ
    let h_amb = o.tau.product(&ScalingAction::trivial(o.embedded.dim));
    let v_amb = o.carrier.action.product(&o.embedded.action);
    let h = h_amb.restrict(&fp.carrier)?;
    let v = v_amb.restrict(&fp.carrier)?;
    let d = match o.orientation {
        Orientation::Horizontal => Dvs::new(h, v)?,
        Orientation::Vertical => Dvs::new(v, h)?,
    };
    Ok((d, fp.pr1))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn tq() -> VBSpace {
        VBSpace::new(ScalingAction::diagonal(&[0, 1])).unwrap()
    }

    fn ttq() -> Dvs {
        // double tangent of the line: canonical grading on four coordinates
        Dvs::new(
            ScalingAction::diagonal(&[0, 0, 1, 1]),
            ScalingAction::diagonal(&[0, 1, 0, 1]),
        )
        .unwrap()
    }

    #[test]
    fn flip_of_lift_exchanges_lifts() {
        let e = tq();
        assert_eq!(h_lift(&e).flip(), v_lift(&e));
        assert_eq!(v_lift(&e).flip(), h_lift(&e));
    }

    #[test]
    fn flip_is_an_involution() {
        let d = ttq();
        assert_eq!(d.flip().flip(), d);
    }

    #[test]
    fn double_tangent_flip_swaps_the_gradings() {
        let d = ttq();
        let f = d.flip();
        assert_eq!(f.h, ScalingAction::diagonal(&[0, 1, 0, 1]));
        assert_eq!(f.v, ScalingAction::diagonal(&[0, 0, 1, 1]));
    }

    #[test]
    fn sides_and_core_of_double_tangent() {
        let d = ttq();
        assert_eq!(d.side_a().dim(), 2);
        assert_eq!(d.side_b().dim(), 2);
        assert_eq!(d.base().dim(), 1);
        assert_eq!(d.core_rank(), 1);
    }

    #[test]
    fn surmersions_and_flip_relations() {
        let d = ttq();
        let (pi_h, pi_v) = canonical_surmersions(&d).unwrap();
        assert!(pi_h.map.is_surjective());
        assert!(pi_v.map.is_surjective());
        // the flip of π̲^h is π̲^v of the flipped space (symmetric sides here)
        let (fh, fv) = canonical_surmersions(&d.flip()).unwrap();
        assert_eq!(pi_h.flip().map, fv.map);
        assert_eq!(pi_v.flip().map, fh.map);
    }

    #[test]
    fn flip_conjugation_of_lifted_maps() {
        // flip ∘ φ^h ∘ flip = φ^v for a vb-map φ
        let e = tq();
        let phi = VBMap::new(
            e.clone(),
            e.clone(),
            LinMap::new(Matrix::from_int_rows(&[&[1, 0], &[0, 5]])),
        )
        .unwrap();
        let up = lift_map_h(&phi);
        let f1 = FlipMap::identity_flip(&up.src.flip()); // E^v ⇸ E^h
        let f2 = FlipMap::identity_flip(&up.tgt); // F^h ⇸ F^v
        let conj = f2.after_dvb(&up).unwrap().map.compose(&f1.map);
        assert_eq!(conj, lift_map_v(&phi).map);
    }

    #[test]
    fn identity_flip_is_total() {
        let d = ttq();
        assert!(FlipMap::identity_flip(&d).is_total());
    }

    #[test]
    fn fiber_product_of_identity_cospan() {
        let d = ttq();
        let id = DvbMap::identity(&d);
        let fp = fiber_product_dvs(&id, &id).unwrap();
        assert_eq!(fp.total.dim, d.dim);
        assert_eq!(fp.pr1, fp.pr2);
    }

    #[test]
    fn fiber_product_with_zero_space() {
        // product with a point: cospan into the zero double space
        let d = ttq();
        let zero = Dvs::new(ScalingAction::trivial(0), ScalingAction::trivial(0)).unwrap();
        let f = DvbMap::new(d.clone(), zero.clone(), LinMap::zero(4, 0)).unwrap();
        let g = DvbMap::new(zero.clone(), zero, LinMap::zero(0, 0)).unwrap();
        let fp = fiber_product_dvs(&f, &g).unwrap();
        assert_eq!(fp.total.dim, d.dim);
        assert!(LinMap::new(fp.pr1.mat.clone()).is_bijective());
    }

    #[test]
    fn side_pullback_along_identity_is_isomorphic() {
        let d = ttq();
        let a = d.side_a_vb().unwrap();
        // φ = identity onto the side bundle, valued in D
        let phi = d.side_a().inclusion();
        let sp = side_pullback_h(&a, &phi, &d).unwrap();
        assert_eq!(sp.total.dim, d.dim);
        // the projection to D is the canonical intertwiner
        let pr = DvbMap::new(sp.total.clone(), d.clone(), sp.pr_d.clone()).unwrap();
        assert!(pr.map.is_bijective());
    }

    #[test]
    fn side_pullback_dimension_formula() {
        // pullback along a vb-surmersion of sides: dim = dim E + dim D − dim A
        let d = ttq();
        let e = VBSpace::new(ScalingAction::diagonal(&[0, 1, 1])).unwrap();
        // φ: E → A ⊂ D, (x,u,v) ↦ (x, u+v) into the first two coordinates
        let phi = LinMap::new(Matrix::from_int_rows(&[
            &[1, 0, 0],
            &[0, 1, 1],
            &[0, 0, 0],
            &[0, 0, 0],
        ]));
        let sp = side_pullback_h(&e, &phi, &d).unwrap();
        assert_eq!(sp.total.dim, e.dim + d.dim - d.side_a().dim());
    }

    #[test]
    fn sharpening_triangle_commutes() {
        let d = ttq();
        let phi = DvbMap::new(
            d.clone(),
            d.clone(),
            LinMap::new(Matrix::from_int_rows(&[
                &[1, 0, 0, 0],
                &[0, 2, 0, 0],
                &[0, 0, 3, 0],
                &[0, 0, 0, 6],
            ])),
        )
        .unwrap();
        let (sp, dagger) = sharpen_h(&phi).unwrap();
        // pr ∘ φ† = φ
        assert_eq!(sp.pr_d.compose(&dagger.map), phi.map);
    }

    #[test]
    fn quotient_h_by_zero_and_by_everything() {
        let d = ttq();
        // zero sub-object: the horizontal zero object E^h embedded by the
        // horizontal zero section
        let a = d.side_a_vb().unwrap();
        let zero_section = d.side_a().inclusion();
        let iota = DvbMap::new(h_lift(&a), d.clone(), zero_section).unwrap();
        let q = quotient_h(&iota).unwrap();
        assert_eq!(q.total.dim, d.dim);
        assert!(q.quot.map.is_bijective());
        // quotient by the whole space: the zero object E^h remains
        let idq = quotient_h(&DvbMap::identity(&d)).unwrap();
        assert_eq!(idq.total.dim, d.side_a().dim());
    }

    #[test]
    fn quotient_rejects_non_wide() {
        let d = ttq();
        // the vertical zero section does not fix the horizontal side
        let b = d.side_b_vb().unwrap();
        let iota = DvbMap::new(v_lift(&b), d.clone(), d.side_b().inclusion()).unwrap();
        assert!(quotient_h(&iota).is_err());
        assert!(quotient_v(&iota).is_ok());
    }

    #[test]
    fn vb_object_round_trip() {
        use rand::Rng;
        use rand_chacha::rand_core::SeedableRng;
        use rand_chacha::ChaCha8Rng;
        let mut cases: Vec<Dvs> = vec![ttq()];
        for seed in 0..50u64 {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let dims: Vec<u32> = (0..rng.gen_range(1..=5))
                .map(|_| rng.gen_range(0..=3))
                .collect();
            // random weight pattern: each coordinate gets one of the four
            // bidegrees
            let h: Vec<u32> = dims.iter().map(|&w| w & 1).collect();
            let v: Vec<u32> = dims.iter().map(|&w| w >> 1).collect();
            if let Ok(d) = Dvs::new(ScalingAction::diagonal(&h), ScalingAction::diagonal(&v)) {
                cases.push(d);
            }
        }
        let mut trips = 0;
        for d in &cases {
            for o in [Orientation::Horizontal, Orientation::Vertical] {
                let obj = vb_object_from_dvs(d, o).unwrap();
                let back = dvs_from_vb_object(&obj).unwrap();
                assert_eq!(&back, d);
                // the fiber-product presentation projects isomorphically
                let (fp, pr) = vb_object_fiber_product(&obj).unwrap();
                assert_eq!(fp.dim, d.dim);
                assert!(pr.is_bijective());
                trips += 1;
            }
        }
        assert!(trips >= 100);
    }

    #[test]
    fn vb_object_violations_are_labelled() {
        let d = ttq();
        let mut obj = vb_object_from_dvs(&d, Orientation::Horizontal).unwrap();
        // corrupt the structural action: use one that does not fix the side
        obj.tau = d.v.clone();
        let err = obj.validate().unwrap_err();
        match err {
            Error::VbObject { .. } => {}
            e => panic!("expected a vb-object condition error, got {e}"),
        }
    }

    #[test]
    fn zero_object_is_h_lift() {
        // E^h as a horizontal vb-object embeds its own side identically: it
        // is the zero object of the horizontal category
        let e = tq();
        let d = h_lift(&e);
        let obj = vb_object_from_dvs(&d, Orientation::Horizontal).unwrap();
        assert_eq!(obj.j, LinMap::identity(2));
        assert_eq!(obj.embedded.dim, d.dim);
    }
}
