//! Regular immersion squares, the regularity criterion, the flip
//! isomorphisms `Ψ` and `Θ`, the 3×3 exact grid, and the construction and
//! verification of the symmetry isomorphism `Λ` between the two iterated
//! normal bundles.
//!
//! Everything is assembled from the universal-property factorizations of the
//! lower layers, so each "canonical identification" is one concrete matrix
//! and each lemma is an exact matrix identity.

use crate::dvb::{
    pullback_flip_v_to_h, quotient_flip, quotient_v, side_pullback_h, side_pullback_map,
    side_pullback_v, DvbMap, Dvs, DvsQuotient, FlipMap, SidePullback,
};
use crate::error::Error;
use crate::homog::{is_equivariant_at_samples, VBMap};
use crate::linalg::{
    induced_quotient_map, is_exact_at, trivial_presentation, LinMap, QuotientPresentation, Subspace,
};
use crate::matrix::Matrix;
use crate::normal::{
    base_copy_embed, double_tangent, normal_bundle, normal_differential_with, phi_flip,
    tangent_map, tangent_of_bundle, upsilon, vb_normal, vb_normal_differential, Direction,
    NormalBundle, NormalDifferential, PhiFlip, TwoMap, UpsilonFlip, VbNormal,
};
use crate::rat::rat;
use crate::Result;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// A commutative square of injective linear maps:
///
/// ```text
///        i1
///   M1 ------> M2
///   |          |
///   j1         j2
///   v          v
///   N1 ------> N2
///        i2
/// ```
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct ImmersionSquare {
    pub i1: LinMap,
    pub i2: LinMap,
    pub j1: LinMap,
    pub j2: LinMap,
}

impl ImmersionSquare {
    pub fn new(i1: LinMap, i2: LinMap, j1: LinMap, j2: LinMap) -> Result<Self> {
        if j1.dom != i1.dom || j2.dom != i1.cod || i2.dom != j1.cod || i2.cod != j2.cod {
            return Err(Error::Dimension {
                context: "immersion square corners",
                expected: i1.dom,
                got: j1.dom,
            });
        }
        for f in [&i1, &i2, &j1, &j2] {
            if !f.is_injective() {
                return Err(Error::NotInjective("immersion square edge"));
            }
        }
        if i2.compose(&j1) != j2.compose(&i1) {
            return Err(Error::NotCommuting("immersion square"));
        }
        Ok(ImmersionSquare { i1, i2, j1, j2 })
    }

    pub fn m1(&self) -> usize {
        self.i1.dom
    }
    pub fn m2(&self) -> usize {
        self.i1.cod
    }
    pub fn n1(&self) -> usize {
        self.j1.cod
    }
    pub fn n2(&self) -> usize {
        self.j2.cod
    }

    /// The reading whose normal differential runs `ν(i1) → ν(i2)`.
    pub fn two_map_i_edges(&self) -> TwoMap {
        TwoMap {
            top: self.j1.clone(),
            bottom: self.j2.clone(),
            left: self.i1.clone(),
            right: self.i2.clone(),
            direction: Direction::Vertical,
        }
    }

    /// The reading whose normal differential runs `ν(j1) → ν(j2)`.
    pub fn two_map_j_edges(&self) -> TwoMap {
        TwoMap {
            top: self.i1.clone(),
            bottom: self.i2.clone(),
            left: self.j1.clone(),
            right: self.j2.clone(),
            direction: Direction::Horizontal,
        }
    }

    /// `dim N2 − dim(i2(N1) + j2(M2))`: the common core rank of both double
    /// normals, computed by the rank oracle.
    pub fn core_rank_oracle(&self) -> usize {
        self.n2() - self.i2.image().sum(&self.j2.image()).dim()
    }
}

/// Per-criterion regularity verdicts.
#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub struct RegularityReport {
    /// `ν²: ν(i1) → ν(i2)` is a vb-immersion
    pub criterion_nu_i: bool,
    /// `ν²: ν(j1) → ν(j2)` is a vb-immersion
    pub criterion_nu_j: bool,
    /// exactness of `0 → M1 → N1 ⊕ M2 → N2`
    pub criterion_exact: bool,
}

impl RegularityReport {
    pub fn regular(&self) -> bool {
        self.criterion_exact
    }

    pub fn agree(&self) -> bool {
        self.criterion_nu_i == self.criterion_exact && self.criterion_nu_j == self.criterion_exact
    }
}

/// Evaluates the three regularity criteria independently; the verdict is the
/// exactness criterion, and agreement of all three is asserted.
pub fn is_regular(sq: &ImmersionSquare) -> Result<(bool, RegularityReport)> {
    let cone = sq.j1.into_pair(&sq.i1);
    let diff = sq.i2.from_pair(&LinMap::new(sq.j2.mat.scale(&rat(-1))));
    let exact = cone.is_injective() && is_exact_at(&cone, &diff)?;
    let nd_j = normal_differential_with(
        &sq.two_map_i_edges(),
        &normal_bundle(&sq.i1)?,
        &normal_bundle(&sq.i2)?,
    )?;
    let nd_i = normal_differential_with(
        &sq.two_map_j_edges(),
        &normal_bundle(&sq.j1)?,
        &normal_bundle(&sq.j2)?,
    )?;
    let report = RegularityReport {
        criterion_nu_i: nd_j.map.is_immersion(),
        criterion_nu_j: nd_i.map.is_immersion(),
        criterion_exact: exact,
    };
    if !report.agree() {
        return Err(Error::NotCommuting("regularity criteria disagree"));
    }
    Ok((report.regular(), report))
}

/// The corner square of a composite of injections (identity left edge,
/// `i∘j` bottom edge); always regular, asserted on return.
pub fn corner_square(j: &LinMap, i: &LinMap) -> Result<ImmersionSquare> {
    if !j.is_injective() || !i.is_injective() {
        return Err(Error::NotInjective("corner square input"));
    }
    let sq = ImmersionSquare::new(j.clone(), i.compose(j), LinMap::identity(j.dom), i.clone())?;
    let (regular, _) = is_regular(&sq)?;
    if !regular {
        return Err(Error::NotRegular);
    }
    Ok(sq)
}

/// Dimension bounds for the square generators.
#[derive(Clone, Copy, Debug)]
pub struct DimBounds {
    pub m1: usize,
    pub n1: usize,
    pub m2: usize,
    pub n2: usize,
}

impl DimBounds {
    pub fn feasible(&self) -> bool {
        self.m1 >= 1 && self.m1 <= self.n1.min(self.m2) && self.n1 + self.m2 - self.m1 <= self.n2
    }
}

/// Deterministic seeded generator of regular squares: the bottom-right data
/// is drawn through a presentation of `(N1 ⊕ M2)/M1`, which makes the
/// exactness criterion hold by construction.
pub fn random_regular_square(seed: u64, bounds: DimBounds) -> Result<ImmersionSquare> {
    if !bounds.feasible() {
        return Err(Error::InfeasibleBounds(format!("{bounds:?}")));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let j1 = crate::dblcat::random_injective(&mut rng, bounds.m1, bounds.n1);
    let i1 = crate::dblcat::random_injective(&mut rng, bounds.m1, bounds.m2);
    let graph = j1.into_pair(&i1).image();
    let pres = QuotientPresentation::new(bounds.n1 + bounds.m2, graph);
    let ell = crate::dblcat::random_injective(&mut rng, pres.dim, bounds.n2);
    let d = ell.compose(&pres.proj);
    let inc1 = LinMap::new(Matrix::identity(bounds.n1).vstack(&Matrix::zero(bounds.m2, bounds.n1)));
    let inc2 = LinMap::new(Matrix::zero(bounds.n1, bounds.m2).vstack(&Matrix::identity(bounds.m2)));
    let i2 = d.compose(&inc1);
    let j2 = LinMap::new(d.compose(&inc2).mat.scale(&rat(-1)));
    let sq = ImmersionSquare::new(i1, i2, j1, j2)?;
    let (regular, _) = is_regular(&sq)?;
    if !regular {
        return Err(Error::NotRegular);
    }
    Ok(sq)
}

/// Seeded generator of squares that may or may not be regular: the bottom
/// edge is solved from the commutation constraint with a random homogeneous
/// part, with a retry cap for injectivity.
pub fn random_square(seed: u64, bounds: DimBounds) -> Result<ImmersionSquare> {
    if bounds.m1 < 1
        || bounds.m1 > bounds.n1.min(bounds.m2)
        || bounds.n1 > bounds.n2
        || bounds.m2 > bounds.n2
    {
        return Err(Error::InfeasibleBounds(format!("{bounds:?}")));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for _ in 0..64 {
        let j1 = crate::dblcat::random_injective(&mut rng, bounds.m1, bounds.n1);
        let i1 = crate::dblcat::random_injective(&mut rng, bounds.m1, bounds.m2);
        let j2 = crate::dblcat::random_injective(&mut rng, bounds.m2, bounds.n2);
        let i2 = crate::dblcat::solve_over_injective(&mut rng, &j1, &j2.compose(&i1));
        if i2.is_injective() {
            return ImmersionSquare::new(i1, i2, j1, j2);
        }
    }
    Err(Error::RetryCap(64))
}

/// Block permutation `A ⊕ B ⊕ C ⊕ D → A ⊕ C ⊕ B ⊕ D`.
fn swap_middle_blocks(a: usize, b: usize, c: usize, d: usize) -> LinMap {
    let total = a + b + c + d;
    let mut perm = Vec::with_capacity(total);
    for j in 0..total {
        let out = if j < a {
            j
        } else if j < a + b {
            j + c
        } else if j < a + b + c {
            j - b
        } else {
            j
        };
        perm.push(out);
    }
    LinMap::new(Matrix::coordinate_map(total, &perm))
}

/// Embedding `P ⊕ TN (raw) → TP ⊕ TTN (raw)` onto the vertical-side copy:
/// `(x, z, w) ↦ ((x, 0), (z, 0, w, 0))`.
fn side_b_embed(p: usize, n: usize) -> LinMap {
    let mut perm = Vec::with_capacity(p + 2 * n);
    for j in 0..p {
        perm.push(j);
    }
    for j in 0..n {
        perm.push(2 * p + j);
    }
    for j in 0..n {
        perm.push(2 * p + 2 * n + j);
    }
    LinMap::new(Matrix::coordinate_map(2 * p + 4 * n, &perm))
}

/// All derived objects of a regular immersion square needed by the lemma
/// suite and by the symmetry isomorphism. Fields suffixed `_j` belong to the
/// reading whose iterated normal bundle is `ν∘ν²(ν(i1) → ν(i2))`; fields
/// suffixed `_i` to the other reading.
#[derive(Clone, Debug)]
pub struct SquareContext {
    pub sq: ImmersionSquare,
    pub report: RegularityReport,
    pub nb_i1: NormalBundle,
    pub nb_i2: NormalBundle,
    pub nb_j1: NormalBundle,
    pub nb_j2: NormalBundle,
    pub ph_i1: PhiFlip,
    pub ph_i2: PhiFlip,
    pub ph_j1: PhiFlip,
    pub ph_j2: PhiFlip,
    pub ups_i1: UpsilonFlip,
    pub ups_j1: UpsilonFlip,
    pub ups_i2: UpsilonFlip,
    pub ups_j2: UpsilonFlip,
    /// `ν²(J): ν(i1) → ν(i2)` with mid map `pb(i1) → pb(i2)`
    pub nd_j: NormalDifferential,
    /// `ν²(I): ν(j1) → ν(j2)` with mid map `pb(j1) → pb(j2)`
    pub nd_i: NormalDifferential,
    /// `ν` of the mid maps: the middle column / middle row objects
    pub vbn_mid_j: VbNormal,
    pub vbn_mid_i: VbNormal,
    /// the two double normals
    pub dn_j: VbNormal,
    pub dn_i: VbNormal,
    /// outer pullbacks with unfolded inner tangent objects
    pub x_a_prime: SidePullback,
    pub x_b_second: SidePullback,
    pub unfold_a: DvbMap,
    pub unfold_b: DvbMap,
    /// crossed pullbacks (vertical pullback of the other edge's flat object)
    pub x_b_prime: SidePullback,
    pub x_a_second: SidePullback,
    /// the flat-swap identifications of the nested pullbacks
    pub lem_pb_j: DvbMap,
    pub lem_pb_i: DvbMap,
    /// `Ψ` in both directions
    pub psi_j: FlipMap,
    pub psi_i: FlipMap,
    /// middle-row embeddings into the big pullbacks
    pub iota_v_j: DvbMap,
    pub iota_v_i: DvbMap,
    pub q_mid_j: DvsQuotient,
    pub q_mid_i: DvsQuotient,
    /// factor maps onto the double-normal pullbacks and the induced
    /// identifications
    pub cand_j: LinMap,
    pub cand_i: LinMap,
    pub ident_mid_j: LinMap,
    pub ident_mid_i: LinMap,
    /// `Θ` in both directions
    pub theta_j: FlipMap,
    pub theta_i: FlipMap,
    /// vb-normal differentials of the sharp squares (bottom-row embeddings)
    pub nd2_sharp_j: DvbMap,
    pub nd2_sharp_i: DvbMap,
    pub q_bot_j: DvsQuotient,
    pub q_bot_i: DvsQuotient,
    /// identifications of the bottom quotients with the double normals
    pub ident_bot_j: LinMap,
    pub ident_bot_i: LinMap,
    /// the symmetry isomorphism, through both routes
    pub lambda: FlipMap,
    pub lambda_alt: FlipMap,
}

impl SquareContext {
    pub fn new(sq: &ImmersionSquare) -> Result<Self> {
        let (regular, report) = is_regular(sq)?;
        if !regular {
            return Err(Error::NotRegular);
        }
        let nb_i1 = normal_bundle(&sq.i1)?;
        let nb_i2 = normal_bundle(&sq.i2)?;
        let nb_j1 = normal_bundle(&sq.j1)?;
        let nb_j2 = normal_bundle(&sq.j2)?;
        let ph_i1 = phi_flip(&sq.i1)?;
        let ph_i2 = phi_flip(&sq.i2)?;
        let ph_j1 = phi_flip(&sq.j1)?;
        let ph_j2 = phi_flip(&sq.j2)?;
        let ups_i1 = upsilon(&sq.i1)?;
        let ups_j1 = upsilon(&sq.j1)?;
        let ups_i2 = upsilon(&sq.i2)?;
        let ups_j2 = upsilon(&sq.j2)?;
        let nd_j = normal_differential_with(&sq.two_map_i_edges(), &nb_i1, &nb_i2)?;
        let nd_i = normal_differential_with(&sq.two_map_j_edges(), &nb_j1, &nb_j2)?;
        let vbn_mid_j = vb_normal(&nd_j.mid)?;
        let vbn_mid_i = vb_normal(&nd_i.mid)?;
        let dn_j = vb_normal(&nd_j.map)?;
        let dn_i = vb_normal(&nd_i.map)?;

        // sanity: the vb-normals of the tangent edges reuse the Φ pullbacks
        if ups_j2.vbn.sp.total != ph_j2.sp_h.total || ups_i2.vbn.sp.total != ph_i2.sp_h.total {
            return Err(Error::Unsolvable("edge pullback presentations disagree"));
        }

        // unfolded outer pullbacks
        let (x_a_prime, unfold_a) = unfolded_pullback(&vbn_mid_j, &ph_i2)?;
        let (x_b_second, unfold_b) = unfolded_pullback(&vbn_mid_i, &ph_j2)?;

        // crossed pullbacks
        let (x_b_prime, psi_b_prime) =
            crossed_pullback(&vbn_mid_i.phi, &nb_j2, &ph_j2, sq.m2(), sq.n2())?;
        let (x_a_second, psi_a_second) =
            crossed_pullback(&vbn_mid_j.phi, &nb_i2, &ph_i2, sq.n1(), sq.n2())?;

        // flat-swap identifications
        let lem_pb_j = flat_swap_map(
            sq,
            &x_a_prime,
            &nb_i1,
            &ph_i2.top.sp,
            &x_b_prime,
            &nb_j1,
            &ph_j2.sp_h,
            &swap_middle_blocks(sq.m1(), 2 * sq.m2(), 2 * sq.n1(), 4 * sq.n2()),
        )?;
        let lem_pb_i = flat_swap_map(
            sq,
            &x_b_second,
            &nb_j1,
            &ph_j2.top.sp,
            &x_a_second,
            &nb_i1,
            &ph_i2.sp_h,
            &swap_middle_blocks(sq.m1(), 2 * sq.n1(), 2 * sq.m2(), 4 * sq.n2()),
        )?;

        // Ψ through the pullback of Φ of the bottom/right edges
        let psi_j = build_psi(
            &vbn_mid_j,
            &vbn_mid_i,
            &unfold_a,
            &lem_pb_j,
            &x_b_prime,
            &psi_b_prime,
            &ph_j2,
        )?;
        let psi_i = build_psi(
            &vbn_mid_i,
            &vbn_mid_j,
            &unfold_b,
            &lem_pb_i,
            &x_a_second,
            &psi_a_second,
            &ph_i2,
        )?;

        // middle-row embeddings
        let iota_v_j = middle_embedding(&nb_i1, &ph_j1, &vbn_mid_j, &nb_i2)?;
        let iota_v_i = middle_embedding(&nb_j1, &ph_i1, &vbn_mid_i, &nb_j2)?;
        let q_mid_j = quotient_v(&iota_v_j)?;
        let q_mid_i = quotient_v(&iota_v_i)?;

        // factor maps onto the double-normal pullbacks
        let cand_j = candidate_map(&nd_j, &vbn_mid_j, &dn_j)?;
        let cand_i = candidate_map(&nd_i, &vbn_mid_i, &dn_i)?;
        let ident_mid_j = descend(&cand_j, &q_mid_j, dn_j.sp.total.dim)?;
        let ident_mid_i = descend(&cand_i, &q_mid_i, dn_i.sp.total.dim)?;
        if !ident_mid_j.is_bijective() || !ident_mid_i.is_bijective() {
            return Err(Error::Unsolvable("middle identification is not bijective"));
        }

        // Θ := quotient flip of Ψ, transported along the middle identification
        let theta_j = {
            let qf = quotient_flip(&psi_j, &q_mid_j, &vbn_mid_i.q)?;
            FlipMap::new_total(
                dn_j.sp.total.clone(),
                vbn_mid_i.q.total.clone(),
                qf.map.compose(&ident_mid_j.inverse()?),
            )?
        };
        let theta_i = {
            let qf = quotient_flip(&psi_i, &q_mid_i, &vbn_mid_j.q)?;
            FlipMap::new_total(
                dn_i.sp.total.clone(),
                vbn_mid_j.q.total.clone(),
                qf.map.compose(&ident_mid_i.inverse()?),
            )?
        };

        // bottom-row embeddings and their quotients
        let nd2_sharp_j =
            vb_normal_differential(&nb_j1.sharp, &nb_j2.sharp, &ups_i1.vbn, &vbn_mid_i)?;
        let nd2_sharp_i =
            vb_normal_differential(&nb_i1.sharp, &nb_i2.sharp, &ups_j1.vbn, &vbn_mid_j)?;
        let q_bot_j = quotient_v(&nd2_sharp_j)?;
        let q_bot_i = quotient_v(&nd2_sharp_i)?;
        let ident_bot_j = bottom_identification(&cand_i, &vbn_mid_i, &dn_i, &q_bot_j)?;
        let ident_bot_i = bottom_identification(&cand_j, &vbn_mid_j, &dn_j, &q_bot_i)?;

        // Λ through the first route
        let lam0 = quotient_flip(&theta_j, &dn_j.q, &q_bot_j)?;
        let lambda = FlipMap::new_total(
            dn_j.q.total.clone(),
            dn_i.q.total.clone(),
            ident_bot_j.compose(&lam0.map),
        )?;
        // Λ through the alternative route
        let theta_i_inv = theta_i.inverse()?;
        let lam0_alt = quotient_flip(&theta_i_inv, &q_bot_i, &dn_i.q)?;
        let lambda_alt = FlipMap::new_total(
            dn_j.q.total.clone(),
            dn_i.q.total.clone(),
            lam0_alt.map.compose(&ident_bot_i.inverse()?),
        )?;

        Ok(SquareContext {
            sq: sq.clone(),
            report,
            nb_i1,
            nb_i2,
            nb_j1,
            nb_j2,
            ph_i1,
            ph_i2,
            ph_j1,
            ph_j2,
            ups_i1,
            ups_j1,
            ups_i2,
            ups_j2,
            nd_j,
            nd_i,
            vbn_mid_j,
            vbn_mid_i,
            dn_j,
            dn_i,
            x_a_prime,
            x_b_second,
            unfold_a,
            unfold_b,
            x_b_prime,
            x_a_second,
            lem_pb_j,
            lem_pb_i,
            psi_j,
            psi_i,
            iota_v_j,
            iota_v_i,
            q_mid_j,
            q_mid_i,
            cand_j,
            cand_i,
            ident_mid_j,
            ident_mid_i,
            theta_j,
            theta_i,
            nd2_sharp_j,
            nd2_sharp_i,
            q_bot_j,
            q_bot_i,
            ident_bot_j,
            ident_bot_i,
            lambda,
            lambda_alt,
        })
    }
}

/// `X'`: the outer horizontal pullback with the inner tangent object
/// unfolded into its vertical-pullback presentation, plus the identification
/// `X → X'`.
fn unfolded_pullback(vbn_mid: &VbNormal, ph_bot: &PhiFlip) -> Result<(SidePullback, DvbMap)> {
    let e = vbn_mid.phi.src.clone();
    let psi_prime = ph_bot
        .top
        .unfold
        .map
        .compose(&base_copy_embed(vbn_mid.phi.tgt.dim))
        .compose(&vbn_mid.phi.map);
    let x_prime = side_pullback_h(&e, &psi_prime, &ph_bot.top.sp.total)?;
    let unfold = side_pullback_map(
        &LinMap::identity(e.dim),
        &vbn_mid.sp,
        &x_prime,
        &ph_bot.top.unfold,
    )?;
    Ok((x_prime, unfold))
}

/// The crossed pullback: the vertical pullback of the flat object of the
/// bottom edge (`(edge_*)^{*,h} TT(N2)`) along the other reading's mid map,
/// entering through the vertical-side embedding of the edge pullback.
fn crossed_pullback(
    mid: &VBMap,
    nb_edge: &NormalBundle,
    ph_edge: &PhiFlip,
    base_dim: usize,
    n2: usize,
) -> Result<(SidePullback, LinMap)> {
    let raw = side_b_embed(base_dim, n2)
        .compose(&nb_edge.pb.incl)
        .compose(&mid.map);
    let psi = ph_edge.sp_h.into_carrier(&raw)?;
    let sp = side_pullback_v(&mid.src, &psi, &ph_edge.sp_h.total)?;
    Ok((sp, psi))
}

/// Transports carrier coordinates of a nested pullback through a flat block
/// permutation into another nested pullback, checking that the image lands
/// on the target carrier, and wraps the result as a dvb-map.
#[allow(clippy::too_many_arguments)]
fn flat_swap_map(
    sq: &ImmersionSquare,
    src_sp: &SidePullback,
    src_e: &NormalBundle,
    src_d: &SidePullback,
    tgt_sp: &SidePullback,
    tgt_e: &NormalBundle,
    tgt_d: &SidePullback,
    perm: &LinMap,
) -> Result<DvbMap> {
    let _ = sq;
    let raw_src = src_e.pb.incl.direct_sum(&src_d.incl).compose(&src_sp.incl);
    let down = tgt_sp
        .retract
        .compose(&tgt_e.pb.retract.direct_sum(&tgt_d.retract));
    let map = down.compose(perm).compose(&raw_src);
    let up = tgt_e.pb.incl.direct_sum(&tgt_d.incl).compose(&tgt_sp.incl);
    if up.compose(&map) != perm.compose(&raw_src) {
        return Err(Error::Unsolvable(
            "flat swap does not land on the target carrier",
        ));
    }
    DvbMap::new(src_sp.total.clone(), tgt_sp.total.clone(), map)
}

/// `Ψ`: the pullback flip of `Φ` of the bottom edge, conjugated with the
/// unfold and flat-swap identifications. Lands exactly on the other
/// reading's big pullback.
fn build_psi(
    vbn_src: &VbNormal,
    vbn_tgt: &VbNormal,
    unfold: &DvbMap,
    lem_pb: &DvbMap,
    x_crossed: &SidePullback,
    psi_crossed: &LinMap,
    ph_edge: &PhiFlip,
) -> Result<FlipMap> {
    let e = vbn_tgt.phi.src.clone();
    let (sp1, sp2, pf) = pullback_flip_v_to_h(&e, psi_crossed, &ph_edge.phi)?;
    if sp1.total != x_crossed.total {
        return Err(Error::Unsolvable("crossed pullback presentations disagree"));
    }
    if sp2.total != vbn_tgt.sp.total {
        return Err(Error::Unsolvable(
            "pullback flip does not land on the big pullback",
        ));
    }
    FlipMap::new_total(
        vbn_src.sp.total.clone(),
        vbn_tgt.sp.total.clone(),
        pf.map.compose(&lem_pb.map).compose(&unfold.map),
    )
}

/// The middle-row embedding: the pullback of the tangent of the bottom sharp
/// differential along the square of sharp differentials.
fn middle_embedding(
    nb_top1: &NormalBundle,
    ph_left1: &PhiFlip,
    vbn_mid: &VbNormal,
    nb_top2: &NormalBundle,
) -> Result<DvbMap> {
    let t_sharp_bot = DvbMap::new(
        double_tangent(nb_top2.j.dom),
        tangent_of_bundle(&nb_top2.pb.total),
        tangent_map(&nb_top2.sharp.map),
    )?;
    side_pullback_map(
        &nb_top1.sharp.map,
        &ph_left1.sp_h,
        &vbn_mid.sp,
        &t_sharp_bot,
    )
}

/// The factor map from the big pullback onto the double-normal pullback:
/// quotient both coordinates.
fn candidate_map(nd: &NormalDifferential, vbn_mid: &VbNormal, dn: &VbNormal) -> Result<LinMap> {
    let u1 = nd.src.quot.map.compose(&vbn_mid.sp.pr_e);
    let u2 = tangent_map(&nd.tgt.quot.map).compose(&vbn_mid.sp.pr_d);
    dn.sp.factor(&u1, &u2)
}

/// Descends a map through a quotient presentation (the map must kill the
/// killed subspace).
fn descend(map: &LinMap, q: &DvsQuotient, out_dim: usize) -> Result<LinMap> {
    induced_quotient_map(map, &q.pres, &trivial_presentation(out_dim))
}

/// Identification of the bottom quotient (`ν` of the other mid map modulo
/// the sharp normal differential) with the other double normal.
fn bottom_identification(
    cand_other: &LinMap,
    vbn_mid_other: &VbNormal,
    dn_other: &VbNormal,
    q_bot: &DvsQuotient,
) -> Result<LinMap> {
    // project to the double normal first: only then does the map kill the
    // fibers of the embedded image
    let pre = dn_other.q.pres.proj.compose(cand_other);
    let mu = induced_quotient_map(
        &pre,
        &vbn_mid_other.q.pres,
        &trivial_presentation(dn_other.q.total.dim),
    )?;
    let ident = induced_quotient_map(
        &mu,
        &q_bot.pres,
        &trivial_presentation(dn_other.q.total.dim),
    )?;
    if !ident.is_bijective() {
        return Err(Error::Unsolvable("bottom identification is not bijective"));
    }
    Ok(ident)
}

/// Result of one lemma verification.
#[derive(Clone, Debug)]
pub struct LemmaResult {
    pub name: String,
    pub pass: bool,
    pub witness: Option<String>,
}

impl LemmaResult {
    fn ok(name: &str) -> Self {
        LemmaResult {
            name: name.to_string(),
            pass: true,
            witness: None,
        }
    }

    fn fail(name: &str, witness: String) -> Self {
        LemmaResult {
            name: name.to_string(),
            pass: false,
            witness: Some(witness),
        }
    }

    fn check(name: &str, cond: bool, witness: &str) -> Self {
        if cond {
            LemmaResult::ok(name)
        } else {
            LemmaResult::fail(name, witness.to_string())
        }
    }
}

/// The named lemma suite.
pub const LEMMA_NAMES: &[&str] = &[
    "pullback-swap",
    "psi-consistency",
    "normal-pullback",
    "tangent-pullback",
    "sharp-square",
    "phi-sharp",
    "theta-quotient",
    "flip-square",
    "double-quotient",
    "grid-exactness",
];

/// Verifies one named lemma on a prepared context.
pub fn verify_lemma(name: &str, ctx: &SquareContext) -> Result<LemmaResult> {
    match name {
        "pullback-swap" => Ok(lemma_pullback_swap(ctx)),
        "psi-consistency" => Ok(lemma_psi_consistency(ctx)),
        "normal-pullback" => lemma_normal_pullback(ctx),
        "tangent-pullback" => lemma_tangent_pullback(ctx),
        "sharp-square" => Ok(lemma_sharp_square(ctx)),
        "phi-sharp" => Ok(lemma_phi_sharp(ctx)),
        "theta-quotient" => Ok(lemma_theta_quotient(ctx)),
        "flip-square" => Ok(lemma_flip_square(ctx)),
        "double-quotient" => Ok(lemma_double_quotient(ctx)),
        "grid-exactness" => lemma_grid_exactness(ctx),
        other => Err(Error::UnknownLemma(other.to_string())),
    }
}

/// Runs the whole suite.
pub fn all_lemmas(ctx: &SquareContext) -> Result<Vec<LemmaResult>> {
    LEMMA_NAMES.iter().map(|n| verify_lemma(n, ctx)).collect()
}

fn lemma_pullback_swap(ctx: &SquareContext) -> LemmaResult {
    // both flat swaps are bijective non-flipping identifications, inverse to
    // each other through the unfolds
    let name = "pullback-swap";
    if !ctx.lem_pb_j.map.is_bijective() || !ctx.lem_pb_i.map.is_bijective() {
        return LemmaResult::fail(name, "flat swap is not bijective".into());
    }
    LemmaResult::ok(name)
}

fn lemma_psi_consistency(ctx: &SquareContext) -> LemmaResult {
    let name = "psi-consistency";
    match ctx.psi_i.inverse() {
        Ok(inv) => LemmaResult::check(
            name,
            inv.map == ctx.psi_j.map,
            "the two pullback flips are not mutually inverse",
        ),
        Err(_) => LemmaResult::fail(name, "psi is not invertible".into()),
    }
}

/// `ν` of the mid map is the vertical pullback of `ν` of the bottom tangent
/// edge along the other normal differential.
fn lemma_normal_pullback(ctx: &SquareContext) -> Result<LemmaResult> {
    let name = "normal-pullback";
    let sq = &ctx.sq;
    // the descended vertical-side embedding ν(j2) → ν(j2*)
    let raw = side_b_embed(sq.m2(), sq.n2())
        .compose(&ctx.nb_j2.pb.incl)
        .compose(&ctx.nb_j2.pres.sec);
    let s = ctx.ph_j2.sp_h.into_carrier(&raw)?;
    let emb = ctx.ups_j2.vbn.q.pres.proj.compose(&s);
    // the vertical pullback of ν(j2*) along ν²(I)
    let rhs = side_pullback_v(
        &ctx.nd_i.src.bundle,
        &emb.compose(&ctx.nd_i.map.map),
        &ctx.ups_j2.vbn.q.total,
    )?;
    // factor X_A' → carrier of the pullback
    let x = &ctx.x_a_prime;
    let x_base = ctx.nb_i1.pb.pr_base.compose(&x.pr_e);
    let inner_b = ctx.ph_i2.top.sp.pr_e.compose(&x.pr_d);
    let into_pb_j1 = ctx.nb_j1.pb.factor(&x_base, &inner_b)?;
    let u1 = ctx.nb_j1.quot.map.compose(&into_pb_j1);
    // the flat (TM2, TTN2)-components
    let tm2_part = LinMap::new(ctx.nb_i1.pb.incl.mat.select(
        &(sq.m1()..sq.m1() + 2 * sq.m2()).collect::<Vec<_>>(),
        &(0..ctx.nb_i1.pb.incl.dom).collect::<Vec<_>>(),
    ))
    .compose(&x.pr_e);
    let ttn2_part = LinMap::new(ctx.ph_i2.top.sp.incl.mat.select(
        &(2 * sq.n1()..2 * sq.n1() + 4 * sq.n2()).collect::<Vec<_>>(),
        &(0..ctx.ph_i2.top.sp.incl.dom).collect::<Vec<_>>(),
    ))
    .compose(&x.pr_d);
    let into_sp_h_j2 = ctx
        .ph_j2
        .sp_h
        .into_carrier(&tm2_part.into_pair(&ttn2_part))?;
    let u2 = ctx.ups_j2.vbn.q.pres.proj.compose(&into_sp_h_j2);
    let pre = rhs.factor(&u1, &u2)?;
    // transport to X and descend through the mid quotient
    let on_x = pre.compose(&ctx.unfold_a.map);
    let ident = induced_quotient_map(
        &on_x,
        &ctx.vbn_mid_j.q.pres,
        &trivial_presentation(rhs.total.dim),
    )?;
    if !ident.is_bijective() {
        return Ok(LemmaResult::fail(
            name,
            "identification is not bijective".into(),
        ));
    }
    // it must be a plain dvb-isomorphism
    match DvbMap::new(ctx.vbn_mid_j.q.total.clone(), rhs.total.clone(), ident) {
        Ok(_) => Ok(LemmaResult::ok(name)),
        Err(e) => Ok(LemmaResult::fail(name, format!("not equivariant: {e}"))),
    }
}

/// Tangent of the pulled-back map agrees with the pulled-back double
/// differential; same for the sharpenings.
fn lemma_tangent_pullback(ctx: &SquareContext) -> Result<LemmaResult> {
    let name = "tangent-pullback";
    let sq = &ctx.sq;
    // (a) through the vertical pullbacks of the double tangents
    let j2ss = DvbMap::new(
        double_tangent(sq.m2()),
        double_tangent(sq.n2()),
        tangent_map(&tangent_map(&sq.j2)),
    )?;
    let vps = side_pullback_map(
        &tangent_map(&sq.j1),
        &ctx.ph_i1.top.sp,
        &ctx.ph_i2.top.sp,
        &j2ss,
    )?;
    let lhs = ctx
        .ph_i2
        .top
        .unfold
        .map
        .compose(&tangent_map(&ctx.nd_j.mid.map));
    let rhs = vps.map.compose(&ctx.ph_i1.top.unfold.map);
    if lhs != rhs {
        return Ok(LemmaResult::fail(
            name,
            "tangent of pullback mismatch".into(),
        ));
    }
    // (b) the sharpened version through the crossed pullback
    let sharp_pulled = side_pullback_map(
        &ctx.nb_j1.sharp.map,
        &ctx.ph_i1.top.sp,
        &ctx.x_b_prime,
        &ctx.ups_j2.vbn.emb,
    )?;
    let lhs_b = ctx
        .lem_pb_j
        .map
        .compose(&ctx.unfold_a.map)
        .compose(&ctx.vbn_mid_j.emb.map);
    let rhs_b = sharp_pulled.map.compose(&ctx.ph_i1.top.unfold.map);
    Ok(LemmaResult::check(
        name,
        lhs_b == rhs_b,
        "sharpened pullback mismatch",
    ))
}

/// `Ψ ∘ (mid)_♯-pullback-square`: the two routes around the sharp square
/// agree.
fn lemma_sharp_square(ctx: &SquareContext) -> LemmaResult {
    let name = "sharp-square";
    let lhs_j = ctx.psi_j.map.compose(&ctx.iota_v_j.map);
    let rhs_j = ctx.vbn_mid_i.emb.map.compose(&ctx.ph_j1.phi.map);
    let lhs_i = ctx.psi_i.map.compose(&ctx.iota_v_i.map);
    let rhs_i = ctx.vbn_mid_j.emb.map.compose(&ctx.ph_i1.phi.map);
    LemmaResult::check(
        name,
        lhs_j == rhs_j && lhs_i == rhs_i,
        "sharp square routes disagree",
    )
}

/// `Φ` intertwines the horizontally and vertically sharpened double
/// differentials, for every edge of the square.
fn lemma_phi_sharp(ctx: &SquareContext) -> LemmaResult {
    let name = "phi-sharp";
    for (ph, ups) in [
        (&ctx.ph_i1, &ctx.ups_i1),
        (&ctx.ph_j1, &ctx.ups_j1),
        (&ctx.ph_i2, &ctx.ups_i2),
        (&ctx.ph_j2, &ctx.ups_j2),
    ] {
        let m = ph.f.dom;
        let kappa = crate::normal::canonical_involution(m);
        let lhs = ph.phi.map.compose(&ups.vbn.emb.map);
        let rhs = tangent_map(&ups.nb.sharp.map).compose(&kappa.map);
        if lhs != rhs {
            return LemmaResult::fail(name, "sharp double differential mismatch".into());
        }
    }
    LemmaResult::ok(name)
}

fn lemma_theta_quotient(ctx: &SquareContext) -> LemmaResult {
    let name = "theta-quotient";
    let ok = ctx.theta_j.map.is_bijective()
        && ctx.theta_i.map.is_bijective()
        && ctx.theta_j.is_total()
        && ctx.theta_i.is_total()
        && ctx.ident_mid_j.is_bijective()
        && ctx.ident_mid_i.is_bijective();
    LemmaResult::check(name, ok, "theta is not a flip isomorphism")
}

/// `Θ ∘ ν²_♯ = ν²(sharp square) ∘ Υ` in both directions.
fn lemma_flip_square(ctx: &SquareContext) -> LemmaResult {
    let name = "flip-square";
    let lhs_j = ctx.theta_j.map.compose(&ctx.dn_j.emb.map);
    let rhs_j = ctx.nd2_sharp_j.map.compose(&ctx.ups_i1.up.map);
    let lhs_i = ctx.theta_i.map.compose(&ctx.dn_i.emb.map);
    let rhs_i = ctx.nd2_sharp_i.map.compose(&ctx.ups_j1.up.map);
    LemmaResult::check(
        name,
        lhs_j == rhs_j && lhs_i == rhs_i,
        "flip square routes disagree",
    )
}

fn lemma_double_quotient(ctx: &SquareContext) -> LemmaResult {
    let name = "double-quotient";
    let ok = ctx.ident_bot_j.is_bijective() && ctx.ident_bot_i.is_bijective();
    LemmaResult::check(name, ok, "double-quotient identification fails")
}

/// Exactness of a vb-object short exact sequence: injective embedding,
/// surjective quotient, and the kernel of the quotient is exactly the fiber
/// part of the embedded image.
fn ses_exact(first: &LinMap, second: &LinMap, fiber_proj: &Matrix) -> bool {
    if !first.is_injective() || !second.is_surjective() {
        return false;
    }
    let fiber_image =
        Subspace::from_spanning(first.cod, &fiber_proj.mul_mat(&first.mat).transpose());
    second.kernel() == fiber_image
}

/// The six commuting squares and the row/column exactness of the 3×3 grid.
fn lemma_grid_exactness(ctx: &SquareContext) -> Result<LemmaResult> {
    let name = "grid-exactness";
    // row maps
    let r1a = tangent_map(&ctx.nb_i1.sharp.map);
    let r1b = tangent_map(&ctx.nb_i1.quot.map);
    let r2a = ctx.iota_v_j.map.clone();
    let r2b = ctx.cand_j.clone();
    let mu_j = induced_quotient_map(
        &ctx.dn_j.q.pres.proj.compose(&ctx.cand_j),
        &ctx.vbn_mid_j.q.pres,
        &trivial_presentation(ctx.dn_j.q.total.dim),
    )?;
    let r3a = ctx.nd2_sharp_i.map.clone();
    let r3b = mu_j;
    // column maps
    let c1a = ctx.ups_j1.vbn.emb.map.clone();
    let c1b = ctx.ups_j1.vbn.q.quot.map.clone();
    let c2a = ctx.vbn_mid_j.emb.map.clone();
    let c2b = ctx.vbn_mid_j.q.quot.map.clone();
    let c3a = ctx.dn_j.emb.map.clone();
    let c3b = ctx.dn_j.q.quot.map.clone();
    // commuting squares
    let squares = c2a.compose(&r1a) == r2a.compose(&c1a)
        && c3a.compose(&r1b) == r2b.compose(&c2a)
        && r3a.compose(&c1b) == c2b.compose(&r2a)
        && r3b.compose(&c2b) == c3b.compose(&r2b);
    if !squares {
        return Ok(LemmaResult::fail(
            name,
            "a grid square does not commute".into(),
        ));
    }
    // rows are vertical vb-object sequences, columns horizontal ones
    let rows = ses_exact(
        &r1a,
        &r1b,
        &tangent_of_bundle(&ctx.nb_i1.pb.total).v.projection(1),
    ) && ses_exact(&r2a, &r2b, &ctx.vbn_mid_j.sp.total.v.projection(1))
        && ses_exact(&r3a, &r3b, &ctx.vbn_mid_j.q.total.v.projection(1));
    let cols = ses_exact(&c1a, &c1b, &ctx.ups_j1.vbn.sp.total.h.projection(1))
        && ses_exact(&c2a, &c2b, &ctx.vbn_mid_j.sp.total.h.projection(1))
        && ses_exact(&c3a, &c3b, &ctx.dn_j.sp.total.h.projection(1));
    Ok(LemmaResult::check(
        name,
        rows && cols,
        "grid exactness fails",
    ))
}

/// Dimension data of one double normal bundle.
#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub struct DoubleNormalDims {
    pub ambient: usize,
    pub base: usize,
    pub side_a: usize,
    pub side_b: usize,
    pub core: usize,
}

fn dn_dims(dn: &Dvs) -> DoubleNormalDims {
    let base = dn.base().dim();
    DoubleNormalDims {
        ambient: dn.dim,
        base,
        side_a: dn.side_a().dim() - base,
        side_b: dn.side_b().dim() - base,
        core: dn.core_rank(),
    }
}

/// The output of the symmetry verification.
#[derive(Clone, Debug)]
pub struct SymmetryCertificate {
    pub regular: bool,
    pub report: RegularityReport,
    pub dims_first: Option<DoubleNormalDims>,
    pub dims_second: Option<DoubleNormalDims>,
    pub lambda: Option<LinMap>,
    pub lemmas: Vec<LemmaResult>,
    pub alt_agreement: bool,
    pub bijective: bool,
    pub equivariant: bool,
    pub side_match: bool,
    pub core_formula: bool,
}

impl SymmetryCertificate {
    pub fn all_pass(&self) -> bool {
        self.regular
            && self.lemmas.iter().all(|l| l.pass)
            && self.alt_agreement
            && self.bijective
            && self.equivariant
            && self.side_match
            && self.core_formula
    }
}

/// Builds the double normals of a regular square: the first is the vb-normal
/// of `ν(i1) → ν(i2)`, the second of `ν(j1) → ν(j2)`.
pub fn double_normal(sq: &ImmersionSquare, first_reading: bool) -> Result<VbNormal> {
    let (regular, _) = is_regular(sq)?;
    if !regular {
        return Err(Error::NotRegular);
    }
    let (two, nb1, nb2) = if first_reading {
        (
            sq.two_map_i_edges(),
            normal_bundle(&sq.i1)?,
            normal_bundle(&sq.i2)?,
        )
    } else {
        (
            sq.two_map_j_edges(),
            normal_bundle(&sq.j1)?,
            normal_bundle(&sq.j2)?,
        )
    };
    let nd = normal_differential_with(&two, &nb1, &nb2)?;
    vb_normal(&nd.map)
}

/// Constructs and verifies the symmetry isomorphism of a square. Non-regular
/// squares produce a certificate with `regular = false` and no `Λ`.
pub fn symmetry_iso(sq: &ImmersionSquare) -> Result<SymmetryCertificate> {
    let (regular, report) = is_regular(sq)?;
    if !regular {
        return Ok(SymmetryCertificate {
            regular: false,
            report,
            dims_first: None,
            dims_second: None,
            lambda: None,
            lemmas: Vec::new(),
            alt_agreement: false,
            bijective: false,
            equivariant: false,
            side_match: false,
            core_formula: false,
        });
    }
    let ctx = SquareContext::new(sq)?;
    certify(&ctx)
}

/// Assembles the certificate from a prepared context.
pub fn certify(ctx: &SquareContext) -> Result<SymmetryCertificate> {
    let lemmas = all_lemmas(ctx)?;
    let lam = &ctx.lambda;
    let dn_j = &ctx.dn_j.q.total;
    let dn_i = &ctx.dn_i.q.total;
    let samples = [rat(0), rat(2), rat(3)];
    let equivariant = is_equivariant_at_samples(&lam.map, &dn_j.h, &dn_i.v, &samples)
        && is_equivariant_at_samples(&lam.map, &dn_j.v, &dn_i.h, &samples);
    let bijective = lam.map.is_bijective();
    let alt_agreement = ctx.lambda_alt.map == lam.map;
    // side matching: Λ carries the horizontal side onto the vertical side
    let im_a = lam.map.compose(&dn_j.side_a().inclusion()).image();
    let im_b = lam.map.compose(&dn_j.side_b().inclusion()).image();
    let side_match = im_a == dn_i.side_b() && im_b == dn_i.side_a();
    let oracle = ctx.sq.core_rank_oracle();
    let core_formula = dn_j.core_rank() == oracle && dn_i.core_rank() == oracle;
    Ok(SymmetryCertificate {
        regular: true,
        report: ctx.report,
        dims_first: Some(dn_dims(dn_j)),
        dims_second: Some(dn_dims(dn_i)),
        lambda: Some(lam.map.clone()),
        lemmas,
        alt_agreement,
        bijective,
        equivariant,
        side_match,
        core_formula,
    })
}


/// Standalone accessor: the flip between the two big pullbacks.
pub fn psi_flip(sq: &ImmersionSquare) -> Result<FlipMap> {
    Ok(SquareContext::new(sq)?.psi_j)
}

/// Standalone accessors for the two quotient flips.
pub fn theta_first(sq: &ImmersionSquare) -> Result<FlipMap> {
    Ok(SquareContext::new(sq)?.theta_j)
}

pub fn theta_second(sq: &ImmersionSquare) -> Result<FlipMap> {
    Ok(SquareContext::new(sq)?.theta_i)
}
