//! Linear maps, canonical subspaces, quotients with chosen sections, fiber
//! products and exactness checks — the substrate everything else computes in.
//!
//! A subspace is always stored through the reduced row-echelon form of a
//! spanning set, so subspace equality is literal equality of matrices. All
//! quotients use the pivot-complement coordinate section, which makes every
//! downstream "choice of splitting" reproducible.

use crate::error::Error;
use crate::matrix::Matrix;
use crate::rat::Rat;
use crate::Result;
use num::traits::Zero;

/// A linear map `ℚ^dom → ℚ^cod`, stored as a `cod × dom` matrix.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct LinMap {
    pub dom: usize,
    pub cod: usize,
    pub mat: Matrix,
}

impl LinMap {
    pub fn new(mat: Matrix) -> Self {
        LinMap {
            dom: mat.cols,
            cod: mat.rows,
            mat,
        }
    }

    pub fn identity(n: usize) -> Self {
        LinMap::new(Matrix::identity(n))
    }

    pub fn zero(dom: usize, cod: usize) -> Self {
        LinMap::new(Matrix::zero(cod, dom))
    }

    /// `self ∘ earlier`.
    pub fn compose(&self, earlier: &LinMap) -> LinMap {
        assert_eq!(self.dom, earlier.cod, "composition dimension mismatch");
        LinMap::new(self.mat.mul_mat(&earlier.mat))
    }

    /// Block-diagonal direct sum.
    pub fn direct_sum(&self, other: &LinMap) -> LinMap {
        LinMap::new(self.mat.block_diag(&other.mat))
    }

    /// `[self | other]` on a direct-sum domain.
    pub fn from_pair(&self, other: &LinMap) -> LinMap {
        assert_eq!(self.cod, other.cod);
        LinMap::new(self.mat.hstack(&other.mat))
    }

    /// `(self, other)` into a direct-sum codomain.
    pub fn into_pair(&self, other: &LinMap) -> LinMap {
        assert_eq!(self.dom, other.dom);
        LinMap::new(self.mat.vstack(&other.mat))
    }

    pub fn rank(&self) -> usize {
        self.mat.rank()
    }

    pub fn is_injective(&self) -> bool {
        self.rank() == self.dom
    }

    pub fn is_surjective(&self) -> bool {
        self.rank() == self.cod
    }

    pub fn is_bijective(&self) -> bool {
        self.dom == self.cod && self.is_injective()
    }

    pub fn inverse(&self) -> Result<LinMap> {
        Ok(LinMap::new(self.mat.inverse()?))
    }

    /// Kernel as a canonical subspace; rank-nullity gives its dimension.
    pub fn kernel(&self) -> Subspace {
        Subspace::from_spanning(self.dom, &self.mat.kernel_basis())
    }

    /// Column space as a canonical subspace.
    pub fn image(&self) -> Subspace {
        Subspace::from_spanning(self.cod, &self.mat.transpose())
    }

    pub fn apply(&self, v: &[Rat]) -> Vec<Rat> {
        self.mat.apply(v)
    }
}

/// Subspace of `ℚ^ambient` in canonical form: the basis matrix is in RREF
/// with one basis vector per row, so `==` decides subspace equality.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct Subspace {
    pub ambient: usize,
    pub basis: Matrix,
    pivots: Vec<usize>,
}

impl Subspace {
    /// Canonicalizes a spanning set (rows of `spanning`).
    pub fn from_spanning(ambient: usize, spanning: &Matrix) -> Self {
        assert_eq!(spanning.cols, ambient, "spanning rows must live in ambient");
        let (r, pivots) = spanning.rref();
        let keep: Vec<usize> = (0..pivots.len()).collect();
        let all: Vec<usize> = (0..ambient).collect();
        Subspace {
            ambient,
            basis: r.select(&keep, &all),
            pivots,
        }
    }

    pub fn zero(ambient: usize) -> Self {
        Subspace::from_spanning(ambient, &Matrix::zero(0, ambient))
    }

    pub fn full(ambient: usize) -> Self {
        Subspace::from_spanning(ambient, &Matrix::identity(ambient))
    }

    pub fn dim(&self) -> usize {
        self.basis.rows
    }

    pub fn pivots(&self) -> &[usize] {
        &self.pivots
    }

    /// Inclusion `ℚ^dim → ℚ^ambient` whose columns are the basis vectors.
    pub fn inclusion(&self) -> LinMap {
        LinMap::new(self.basis.transpose())
    }

    /// Left inverse of the inclusion: picks the pivot coordinates. For a
    /// vector inside the subspace these are exactly its coefficients in the
    /// RREF basis.
    pub fn coordinates(&self) -> LinMap {
        let rows: Vec<usize> = self.pivots.clone();
        let mut m = Matrix::zero(self.dim(), self.ambient);
        for (i, &p) in rows.iter().enumerate() {
            *m.at_mut(i, p) = crate::rat::rat(1);
        }
        LinMap::new(m)
    }

    pub fn contains_vec(&self, v: &[Rat]) -> bool {
        // residual after removing the pivot-determined combination
        let coeffs: Vec<Rat> = self.pivots.iter().map(|&p| v[p].clone()).collect();
        let mut resid = v.to_vec();
        for (i, c) in coeffs.iter().enumerate() {
            if c.is_zero() {
                continue;
            }
            for j in 0..self.ambient {
                resid[j] = &resid[j] - &(c * self.basis.at(i, j));
            }
        }
        resid.iter().all(|x| x.is_zero())
    }

    pub fn contains(&self, other: &Subspace) -> bool {
        assert_eq!(self.ambient, other.ambient);
        (0..other.dim()).all(|i| self.contains_vec(other.basis.row(i)))
    }

    /// Factors a map with image inside this subspace through the inclusion.
    pub fn factor_through(&self, f: &LinMap) -> Result<LinMap> {
        assert_eq!(f.cod, self.ambient);
        // coordinates() is a retraction, so this is exact when the image fits
        let g = self.coordinates().compose(f);
        if self.inclusion().compose(&g) != *f {
            return Err(Error::Unsolvable("map image not inside subspace"));
        }
        Ok(g)
    }

    pub fn sum(&self, other: &Subspace) -> Subspace {
        assert_eq!(self.ambient, other.ambient);
        Subspace::from_spanning(self.ambient, &self.basis.vstack(&other.basis))
    }

    pub fn intersect(&self, other: &Subspace) -> Subspace {
        assert_eq!(self.ambient, other.ambient);
        // rows of kernel of [B1^T | B2^T] give coefficient pairs; the B1-part
        // spans the intersection
        let stacked = self.basis.transpose().hstack(&other.basis.transpose());
        let ker = stacked.kernel_basis();
        let coeff1: Vec<usize> = (0..self.dim()).collect();
        let all: Vec<usize> = (0..ker.rows).collect();
        let c1 = ker.select(&all, &coeff1);
        Subspace::from_spanning(self.ambient, &c1.mul_mat(&self.basis))
    }
}

/// Quotient `ℚ^ambient / sub` presented by a projection and the
/// pivot-complement coordinate section.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct QuotientPresentation {
    pub ambient: usize,
    pub sub: Subspace,
    pub dim: usize,
    pub proj: LinMap,
    pub sec: LinMap,
}

impl QuotientPresentation {
    pub fn new(ambient: usize, sub: Subspace) -> Self {
        assert_eq!(sub.ambient, ambient);
        let pivots = sub.pivots().to_vec();
        let free: Vec<usize> = (0..ambient).filter(|c| !pivots.contains(c)).collect();
        let dim = free.len();
        // proj(v) = (v - Σ v_{p_i} b_i) restricted to the free coordinates
        let mut proj = Matrix::zero(dim, ambient);
        for (out, &c) in free.iter().enumerate() {
            *proj.at_mut(out, c) = crate::rat::rat(1);
            for (i, &p) in pivots.iter().enumerate() {
                let v = proj.at(out, p) - sub.basis.at(i, c);
                *proj.at_mut(out, p) = v;
            }
        }
        let mut sec = Matrix::zero(ambient, dim);
        for (j, &c) in free.iter().enumerate() {
            *sec.at_mut(c, j) = crate::rat::rat(1);
        }
        QuotientPresentation {
            ambient,
            sub,
            dim,
            proj: LinMap::new(proj),
            sec: LinMap::new(sec),
        }
    }
}

/// Data of a fiber product `P = A ×_C B` inside `A ⊕ B`.
#[derive(Clone, Debug)]
pub struct FiberProduct {
    pub carrier: Subspace,
    pub dim: usize,
    /// inclusion `P → A ⊕ B`
    pub incl: LinMap,
    /// coordinate retraction `A ⊕ B → P` (left inverse of `incl`)
    pub retract: LinMap,
    pub pr1: LinMap,
    pub pr2: LinMap,
    dim_a: usize,
    dim_b: usize,
}

impl FiberProduct {
    /// Unique factoring of a cone `(u, v)` with `f∘u = g∘v` through `P`.
    pub fn factor(&self, u: &LinMap, v: &LinMap) -> Result<LinMap> {
        assert_eq!(u.cod, self.dim_a);
        assert_eq!(v.cod, self.dim_b);
        let cone = u.into_pair(v);
        let fac = self.retract.compose(&cone);
        if self.incl.compose(&fac) != cone {
            return Err(Error::Unsolvable("cone does not land in fiber product"));
        }
        Ok(fac)
    }
}

/// Fiber product of the cospan `f: A → C ← B : g`, with the universal
/// property realized by pivot-coordinate retraction.
pub fn fiber_product(f: &LinMap, g: &LinMap) -> Result<FiberProduct> {
    if f.cod != g.cod {
        return Err(Error::Dimension {
            context: "fiber product cospan codomains",
            expected: f.cod,
            got: g.cod,
        });
    }
    let diff = f.mat.hstack(&g.mat.scale(&crate::rat::rat(-1)));
    let carrier = Subspace::from_spanning(f.dom + g.dom, &diff.kernel_basis());
    let incl = carrier.inclusion();
    let retract = carrier.coordinates();
    let a_rows: Vec<usize> = (0..f.dom).collect();
    let b_rows: Vec<usize> = (f.dom..f.dom + g.dom).collect();
    let carrier_cols: Vec<usize> = (0..carrier.dim()).collect();
    let pr1 = LinMap::new(incl.mat.select(&a_rows, &carrier_cols));
    let pr2 = LinMap::new(incl.mat.select(&b_rows, &carrier_cols));
    Ok(FiberProduct {
        dim: carrier.dim(),
        incl,
        retract,
        pr1,
        pr2,
        dim_a: f.dom,
        dim_b: g.dom,
        carrier,
    })
}

/// The quotient map `φ/ψ` induced on presentations by a map `φ` carrying
/// `q1.sub` into `q2.sub`; unique with `(φ/ψ)∘q1.proj = q2.proj∘φ`.
pub fn induced_quotient_map(
    phi: &LinMap,
    q1: &QuotientPresentation,
    q2: &QuotientPresentation,
) -> Result<LinMap> {
    assert_eq!(phi.dom, q1.ambient);
    assert_eq!(phi.cod, q2.ambient);
    for i in 0..q1.sub.dim() {
        let img = phi.apply(q1.sub.basis.row(i));
        if !q2.sub.contains_vec(&img) {
            return Err(Error::QuotientIncompatible(
                "map does not carry the source subspace into the target subspace",
            ));
        }
    }
    let induced = q2.proj.compose(phi).compose(&q1.sec);
    debug_assert_eq!(
        induced.compose(&q1.proj),
        q2.proj.compose(phi),
        "induced map must intertwine the projections"
    );
    Ok(induced)
}

/// The quotient of a space by nothing: identity projection and section.
pub fn trivial_presentation(dim: usize) -> QuotientPresentation {
    QuotientPresentation::new(dim, Subspace::zero(dim))
}

/// Exactness of `A --f--> B --g--> C` at `B`: image(f) = kernel(g).
pub fn is_exact_at(f: &LinMap, g: &LinMap) -> Result<bool> {
    if f.cod != g.dom {
        return Err(Error::Dimension {
            context: "exactness middle space",
            expected: f.cod,
            got: g.dom,
        });
    }
    Ok(f.image() == g.kernel())
}
