//! Multivariate polynomial maps over `ℚ` with exact symbolic Jacobians, used
//! to linearize nonlinear squares at rational base points.

use crate::error::Error;
use crate::linalg::LinMap;
use crate::matrix::Matrix;
use crate::rat::Rat;
use crate::symmetry::ImmersionSquare;
use crate::Result;
use num::traits::Zero;
use std::collections::BTreeMap;

/// A polynomial in `arity` variables, stored sparsely by exponent vector.
#[derive(Clone, PartialEq, Eq, Debug, Default)]
pub struct Poly {
    pub arity: usize,
    terms: BTreeMap<Vec<u32>, Rat>,
}

impl Poly {
    pub fn new(arity: usize) -> Self {
        Poly {
            arity,
            terms: BTreeMap::new(),
        }
    }

    pub fn from_terms(arity: usize, terms: impl IntoIterator<Item = (Vec<u32>, Rat)>) -> Self {
        let mut p = Poly::new(arity);
        for (e, c) in terms {
            p.add_term(e, c);
        }
        p
    }

    pub fn constant(arity: usize, c: Rat) -> Self {
        Poly::from_terms(arity, [(vec![0; arity], c)])
    }

    pub fn variable(arity: usize, i: usize) -> Self {
        let mut e = vec![0; arity];
        e[i] = 1;
        Poly::from_terms(arity, [(e, crate::rat::rat(1))])
    }

    pub fn add_term(&mut self, exps: Vec<u32>, coeff: Rat) {
        assert_eq!(
            exps.len(),
            self.arity,
            "exponent vector length must match arity"
        );
        if coeff.is_zero() {
            return;
        }
        let entry = self.terms.entry(exps).or_insert_with(Rat::zero);
        *entry = &*entry + &coeff;
        if entry.is_zero() {
            // keep the representation canonical
            let key: Vec<Vec<u32>> = self
                .terms
                .iter()
                .filter(|(_, c)| c.is_zero())
                .map(|(e, _)| e.clone())
                .collect();
            for k in key {
                self.terms.remove(&k);
            }
        }
    }

    pub fn terms(&self) -> impl Iterator<Item = (&Vec<u32>, &Rat)> {
        self.terms.iter()
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn add(&self, other: &Poly) -> Poly {
        assert_eq!(self.arity, other.arity);
        let mut out = self.clone();
        for (e, c) in other.terms.iter() {
            out.add_term(e.clone(), c.clone());
        }
        out
    }

    pub fn mul(&self, other: &Poly) -> Poly {
        assert_eq!(self.arity, other.arity);
        let mut out = Poly::new(self.arity);
        for (e1, c1) in self.terms.iter() {
            for (e2, c2) in other.terms.iter() {
                let e: Vec<u32> = e1.iter().zip(e2).map(|(a, b)| a + b).collect();
                out.add_term(e, c1 * c2);
            }
        }
        out
    }

    pub fn eval(&self, point: &[Rat]) -> Result<Rat> {
        if point.len() != self.arity {
            return Err(Error::Arity {
                expected: self.arity,
                got: point.len(),
            });
        }
        let mut acc = Rat::zero();
        for (e, c) in self.terms.iter() {
            let mut term = c.clone();
            for (x, &k) in point.iter().zip(e) {
                for _ in 0..k {
                    term = &term * x;
                }
            }
            acc += term;
        }
        Ok(acc)
    }

    /// Exact partial derivative.
    pub fn diff(&self, var: usize) -> Poly {
        let mut out = Poly::new(self.arity);
        for (e, c) in self.terms.iter() {
            let k = e[var];
            if k == 0 {
                continue;
            }
            let mut e2 = e.clone();
            e2[var] = k - 1;
            out.add_term(e2, c * crate::rat::rat(k as i64));
        }
        out
    }

    /// Substitutes the component polynomials of `inner` for the variables.
    pub fn compose(&self, inner: &PolyMap) -> Poly {
        assert_eq!(self.arity, inner.components.len());
        let arity = inner.arity;
        let mut out = Poly::new(arity);
        for (e, c) in self.terms.iter() {
            let mut term = Poly::constant(arity, c.clone());
            for (i, &k) in e.iter().enumerate() {
                for _ in 0..k {
                    term = term.mul(&inner.components[i]);
                }
            }
            out = out.add(&term);
        }
        out
    }
}

/// A polynomial map `ℚ^arity → ℚ^k`.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct PolyMap {
    pub arity: usize,
    pub components: Vec<Poly>,
}

impl PolyMap {
    pub fn new(arity: usize, components: Vec<Poly>) -> Result<Self> {
        for p in &components {
            if p.arity != arity {
                return Err(Error::Arity {
                    expected: arity,
                    got: p.arity,
                });
            }
        }
        Ok(PolyMap { arity, components })
    }

    pub fn linear(map: &LinMap) -> Self {
        let components = (0..map.cod)
            .map(|r| {
                Poly::from_terms(
                    map.dom,
                    (0..map.dom).map(|c| {
                        let mut e = vec![0; map.dom];
                        e[c] = 1;
                        (e, map.mat.at(r, c).clone())
                    }),
                )
            })
            .collect();
        PolyMap {
            arity: map.dom,
            components,
        }
    }

    pub fn out_dim(&self) -> usize {
        self.components.len()
    }

    pub fn eval(&self, point: &[Rat]) -> Result<Vec<Rat>> {
        self.components.iter().map(|p| p.eval(point)).collect()
    }

    /// Exact Jacobian at a point.
    pub fn jacobian(&self, point: &[Rat]) -> Result<LinMap> {
        if point.len() != self.arity {
            return Err(Error::Arity {
                expected: self.arity,
                got: point.len(),
            });
        }
        let mut m = Matrix::zero(self.out_dim(), self.arity);
        for (r, p) in self.components.iter().enumerate() {
            for c in 0..self.arity {
                *m.at_mut(r, c) = p.diff(c).eval(point)?;
            }
        }
        Ok(LinMap::new(m))
    }

    /// Full column rank of the Jacobian at the point.
    pub fn is_immersion_at(&self, point: &[Rat]) -> Result<bool> {
        Ok(self.jacobian(point)?.rank() == self.arity)
    }

    /// `self ∘ inner`, exact polynomial composition.
    pub fn compose(&self, inner: &PolyMap) -> Result<PolyMap> {
        if self.arity != inner.out_dim() {
            return Err(Error::Arity {
                expected: self.arity,
                got: inner.out_dim(),
            });
        }
        Ok(PolyMap {
            arity: inner.arity,
            components: self.components.iter().map(|p| p.compose(inner)).collect(),
        })
    }
}

/// Linearizes a commutative square of polynomial maps at a base point of the
/// top-left space, producing the tangent-level immersion square.
///
/// Square layout matches the linear one: `top: M1→M2`, `left: M1→N1`,
/// `right: M2→N2`, `bottom: N1→N2`, commuting as polynomial identities.
pub fn linearize_square_at(
    top: &PolyMap,
    bottom: &PolyMap,
    left: &PolyMap,
    right: &PolyMap,
    point: &[Rat],
) -> Result<ImmersionSquare> {
    if right.compose(top)? != bottom.compose(left)? {
        return Err(Error::PolySquare);
    }
    let p_top = top.eval(point)?;
    let p_left = left.eval(point)?;
    let j_top = top.jacobian(point)?;
    let j_left = left.jacobian(point)?;
    let j_right = right.jacobian(&p_top)?;
    let j_bottom = bottom.jacobian(&p_left)?;
    if j_top.rank() != j_top.dom {
        return Err(Error::ImmersionFailure("top edge"));
    }
    if j_left.rank() != j_left.dom {
        return Err(Error::ImmersionFailure("left edge"));
    }
    if j_right.rank() != j_right.dom {
        return Err(Error::ImmersionFailure("right edge"));
    }
    if j_bottom.rank() != j_bottom.dom {
        return Err(Error::ImmersionFailure("bottom edge"));
    }
    ImmersionSquare::new(j_top, j_bottom, j_left, j_right)
}
