//! Positive diagonal elements over a finite space and their rank vectors.
//!
//! For finite discrete `X` the Cuntz class of a positive element of
//! `C(X) ⊗ M_k` with diagonal fibres is determined by its rank vector, so
//! `ρ: Lsc(X, N) → Cu(C(X))` and the rank map `σ` are explicit here.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};

use crate::error::{Error, Result};
use crate::extnat::Fin;
use crate::lsc::LscFun;
use crate::mover::Mover;
use crate::space::SpaceRef;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DiagonalElement {
    space: SpaceRef,
    eigen: Vec<Vec<BigRational>>,
}

impl DiagonalElement {
    /// Eigenvalue lists per point; all entries strictly positive.
    pub fn new(space: &SpaceRef, eigen: Vec<Vec<BigRational>>) -> Result<Self> {
        let n = space
            .num_points()
            .ok_or_else(|| Error::Model("diagonal elements live over finite spaces".into()))?;
        if eigen.len() != n {
            return Err(Error::Model(format!("expected {n} eigenvalue lists")));
        }
        if eigen.iter().flatten().any(|l| !l.is_positive()) {
            return Err(Error::Model("eigenvalues must be strictly positive".into()));
        }
        let mut eigen = eigen;
        for l in &mut eigen {
            l.sort();
        }
        Ok(DiagonalElement {
            space: space.clone(),
            eigen,
        })
    }

    pub fn zero(space: &SpaceRef) -> Result<Self> {
        let n = space.num_points().unwrap_or(0);
        DiagonalElement::new(space, vec![Vec::new(); n])
    }

    /// `ρ(F)`: the projection with `F(x)` unit eigenvalues at `x`.
    pub fn rho(f: &LscFun) -> Result<Self> {
        let vals = f.values();
        let mut eigen = Vec::with_capacity(vals.len());
        for v in vals {
            let k = v
                .finite()
                .ok_or_else(|| Error::Contract("ρ needs a finite-valued function".into()))?;
            eigen.push(vec![BigRational::one(); k as usize]);
        }
        DiagonalElement::new(f.space(), eigen)
    }

    pub fn eigenvalues(&self) -> &[Vec<BigRational>] {
        &self.eigen
    }

    /// `σ`: the rank vector.
    pub fn sigma(&self) -> LscFun {
        let vals: Vec<_> = self.eigen.iter().map(|l| Fin(l.len() as u64)).collect();
        LscFun::from_values(&self.space, &vals).expect("lengths match")
    }

    /// `(a - t)_+`.
    pub fn cut(&self, t: &BigRational) -> DiagonalElement {
        DiagonalElement {
            space: self.space.clone(),
            eigen: self
                .eigen
                .iter()
                .map(|l| l.iter().filter(|v| *v > t).map(|v| v - t).collect())
                .collect(),
        }
    }

    pub fn direct_sum(&self, other: &DiagonalElement) -> Result<DiagonalElement> {
        crate::space::same_space(&self.space, &other.space)?;
        let eigen = self
            .eigen
            .iter()
            .zip(&other.eigen)
            .map(|(a, b)| a.iter().chain(b).cloned().collect())
            .collect();
        DiagonalElement::new(&self.space, eigen)
    }

    /// Conjugate by the partial isometry of `s`: fibre at `x` moves to `s(x)`.
    pub fn transport(&self, s: &Mover) -> Result<DiagonalElement> {
        let n = self.eigen.len();
        let mut eigen = vec![Vec::new(); n];
        for x in 0..n {
            if self.eigen[x].is_empty() {
                continue;
            }
            let y = s.apply_point(x).ok_or_else(|| {
                Error::Contract(format!(
                    "support point {} is outside the mover's domain",
                    self.space.point_labels()[x]
                ))
            })?;
            eigen[y] = self.eigen[x].clone();
        }
        DiagonalElement::new(&self.space, eigen)
    }
}

/// The Cuntz class of a diagonal element, stored as its rank vector.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct RankVectorCuClass(pub LscFun);

impl RankVectorCuClass {
    pub fn of(a: &DiagonalElement) -> Self {
        RankVectorCuClass(a.sigma())
    }

    pub fn rank_vector(&self) -> &LscFun {
        &self.0
    }

    /// Cuntz subequivalence of diagonal elements over a discrete space.
    pub fn leq(&self, other: &RankVectorCuClass) -> Result<bool> {
        self.0.leq(&other.0)
    }
}

/// `∫_0^∞ β([(a - t)_+]) dt` evaluated piecewise between eigenvalue breakpoints.
pub fn quasitrace(a: &DiagonalElement, weights: &[BigRational]) -> BigRational {
    let mut cuts: Vec<BigRational> = a.eigen.iter().flatten().cloned().collect();
    cuts.push(BigRational::zero());
    cuts.sort();
    cuts.dedup();
    let beta = |e: &DiagonalElement| -> BigRational {
        e.eigen
            .iter()
            .zip(weights)
            .map(|(l, w)| w * BigRational::from_integer(BigInt::from(l.len())))
            .sum()
    };
    cuts.windows(2)
        .map(|p| (&p[1] - &p[0]) * beta(&a.cut(&p[0])))
        .sum()
}

/// `Σ_x w(x) · (sum of eigenvalues at x)`.
pub fn quasitrace_closed_form(a: &DiagonalElement, weights: &[BigRational]) -> BigRational {
    a.eigen
        .iter()
        .zip(weights)
        .map(|(l, w)| w * l.iter().sum::<BigRational>())
        .sum()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::space::BaseSpace;

    fn q(n: i64) -> BigRational {
        BigRational::from_integer(BigInt::from(n))
    }

    #[test]
    fn two_eigenvalues_integrate_to_their_sum() {
        let s = BaseSpace::finite(["x"]).unwrap();
        let a = DiagonalElement::new(&s, vec![vec![q(2), q(1)]]).unwrap();
        assert_eq!(quasitrace(&a, &[q(1)]), q(3));
        assert_eq!(quasitrace_closed_form(&a, &[q(1)]), q(3));
        assert_eq!(quasitrace(&DiagonalElement::zero(&s).unwrap(), &[q(1)]), q(0));
    }

    #[test]
    fn rank_of_rho_is_identity() {
        let s = BaseSpace::finite(["x", "y"]).unwrap();
        let f = LscFun::from_values(&s, &[Fin(2), Fin(0)]).unwrap();
        assert_eq!(DiagonalElement::rho(&f).unwrap().sigma(), f);
    }
}
