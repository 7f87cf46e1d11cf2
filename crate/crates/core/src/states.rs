//! Invariant states by exact linear programming.
//!
//! On a finite space a state is a weight per point, constant along orbits.
//! On a path space the states considered are the graph-harmonic vertex
//! families `t(v) = Σ_{v→w} t(w)`, inducing `μ(Z(w)) = t(end of w)`; these are
//! automatically invariant under prefix exchanges, and exchanges between
//! isolated points add the equation `t(v) = t(v')`.

use std::collections::BTreeMap;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};
use serde_json::{json, Value};

use crate::action::ActionModel;
use crate::error::{Error, Result};
use crate::extnat::{fmt_rational, ExtRational};
use crate::lp::{check_farkas, check_solution, feasible, LpResult};
use crate::lsc::LscFun;
use crate::mover::Piece;
use crate::space::{Cont, SpaceRef, Word};

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct StateWitness {
    space: SpaceRef,
    /// Per point (finite space) or per vertex (path space).
    pub weights: Vec<BigRational>,
    pub normalized_at: LscFun,
    pub faithful: bool,
}

/// A Farkas certificate for the state system.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Infeasibility {
    pub rows: Vec<String>,
    pub multipliers: Vec<BigRational>,
    a: Vec<Vec<BigRational>>,
    b: Vec<BigRational>,
}

impl Infeasibility {
    pub fn verify(&self) -> bool {
        let n = self.a.first().map_or(0, Vec::len);
        check_farkas(&self.a, &self.b, n, &self.multipliers)
    }

    pub fn to_json(&self) -> Value {
        let combo: Vec<Value> = self
            .rows
            .iter()
            .zip(&self.multipliers)
            .filter(|(_, y)| !y.is_zero())
            .map(|(r, y)| json!({ "constraint": r, "multiplier": fmt_rational(y) }))
            .collect();
        json!({ "farkas": combo })
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum StateOutcome {
    Found(StateWitness),
    Infeasible(Infeasibility),
}

struct System {
    names: Vec<String>,
    rows: Vec<Vec<BigRational>>,
    rhs: Vec<BigRational>,
    labels: Vec<String>,
}

fn int(n: i64) -> BigRational {
    BigRational::from_integer(BigInt::from(n))
}

/// Coefficients of `μ(Z(w))` in the variables.
fn cylinder_coeffs(space: &SpaceRef, w: &Word) -> Vec<BigRational> {
    if let Some(n) = space.num_points() {
        let mut c = vec![BigRational::zero(); n];
        if w.is_empty() {
            c.iter_mut().for_each(|v| *v = BigRational::one());
        } else {
            c[w.0[0] as usize] = BigRational::one();
        }
        return c;
    }
    let nv = space.vertex_count();
    let mut c = vec![BigRational::zero(); nv];
    match space.cont(w) {
        Cont::Vertex(v) => c[v as usize] = BigRational::one(),
        Cont::Whole => c.iter_mut().for_each(|v| *v = BigRational::one()),
        Cont::Leaf => unreachable!("path spaces have no leaves"),
    }
    c
}

fn homogeneous_system(model: &ActionModel) -> System {
    let space = &model.space;
    let mut sys = System {
        names: Vec::new(),
        rows: Vec::new(),
        rhs: Vec::new(),
        labels: Vec::new(),
    };
    let push = |sys: &mut System, row: Vec<BigRational>, label: String| {
        if row.iter().any(|v| !v.is_zero()) {
            sys.rows.push(row);
            sys.rhs.push(BigRational::zero());
            sys.labels.push(label);
        }
    };
    if let Some(n) = space.num_points() {
        sys.names = space.point_labels().to_vec();
        for (name, g) in &model.generators {
            for x in 0..n {
                if let Some(y) = g.apply_point(x) {
                    let mut row = vec![BigRational::zero(); n];
                    row[x] += BigRational::one();
                    row[y] -= BigRational::one();
                    let l = space.point_labels();
                    push(&mut sys, row, format!("{name}: w({}) = w({})", l[x], l[y]));
                }
            }
        }
    } else {
        let nv = space.vertex_count();
        sys.names = space.vertex_names().to_vec();
        for v in 0..nv {
            let mut row = vec![BigRational::zero(); nv];
            row[v] += BigRational::one();
            for &e in space.out_edges(v as u32) {
                row[space.edges()[e as usize].target as usize] -= BigRational::one();
            }
            push(&mut sys, row, format!("harmonic at {}", space.vertex_names()[v]));
        }
        for (name, g) in &model.generators {
            for p in g.pieces() {
                if let Piece::Point { dom, img } = p {
                    let mut row = cylinder_coeffs(space, dom);
                    for (r, c) in row.iter_mut().zip(cylinder_coeffs(space, img)) {
                        *r -= c;
                    }
                    push(
                        &mut sys,
                        row,
                        format!("{name}: μ({}) = μ({})", space.render(dom), space.render(img)),
                    );
                }
            }
        }
    }
    sys
}

fn normalization_row(f0: &LscFun) -> Result<Vec<BigRational>> {
    let space = f0.space();
    let n = space.num_points().unwrap_or_else(|| space.vertex_count());
    let mut row = vec![BigRational::zero(); n];
    for (w, v) in f0.entries() {
        let k = v
            .finite()
            .ok_or_else(|| Error::Contract("states are normalised at a finite-valued element".into()))?;
        for (r, c) in row.iter_mut().zip(cylinder_coeffs(space, w)) {
            *r += c * int(k as i64);
        }
    }
    Ok(row)
}

/// Find an invariant state `ν` with `ν(F₀) = 1`, preferring a faithful one.
pub fn find_invariant_state(model: &ActionModel, f0: &LscFun) -> Result<StateOutcome> {
    if f0.is_zero() {
        return Err(Error::Contract("cannot normalise at the zero element".into()));
    }
    let norm = normalization_row(f0)?;
    let sys = homogeneous_system(model);
    let n = sys.names.len();

    // Faithful attempt: w = 1 + v with v ≥ 0.
    let shifted: Vec<BigRational> = sys
        .rows
        .iter()
        .map(|row| -row.iter().sum::<BigRational>())
        .collect();
    if let LpResult::Feasible(v) = feasible(&sys.rows, &shifted, n) {
        let w: Vec<BigRational> = v.into_iter().map(|x| x + BigRational::one()).collect();
        let total: BigRational = w.iter().zip(&norm).map(|(a, b)| a * b).sum();
        if total.is_positive() {
            let weights = w.into_iter().map(|x| x / &total).collect();
            let st = StateWitness {
                space: model.space.clone(),
                weights,
                normalized_at: f0.clone(),
                faithful: true,
            };
            st.verify(model)?;
            return Ok(StateOutcome::Found(st));
        }
    }

    let mut rows = sys.rows.clone();
    let mut rhs = sys.rhs.clone();
    let mut labels = sys.labels.clone();
    rows.push(norm);
    rhs.push(BigRational::one());
    labels.push("normalisation ν(F₀) = 1".into());
    match feasible(&rows, &rhs, n) {
        LpResult::Feasible(w) => {
            let faithful = w.iter().all(|x| x.is_positive());
            let st = StateWitness {
                space: model.space.clone(),
                weights: w,
                normalized_at: f0.clone(),
                faithful,
            };
            st.verify(model)?;
            Ok(StateOutcome::Found(st))
        }
        LpResult::Infeasible(y) => {
            let cert = Infeasibility {
                rows: labels,
                multipliers: y,
                a: rows,
                b: rhs,
            };
            if !cert.verify() {
                return Err(Error::Inconsistency("infeasibility certificate does not verify".into()));
            }
            Ok(StateOutcome::Infeasible(cert))
        }
    }
}

impl StateWitness {
    pub fn space(&self) -> &SpaceRef {
        &self.space
    }

    pub fn cylinder_measure(&self, w: &Word) -> BigRational {
        cylinder_coeffs(&self.space, w)
            .iter()
            .zip(&self.weights)
            .map(|(c, t)| c * t)
            .sum()
    }

    /// `β(F) = ∫ F dμ`, with `∞ · 0 = 0`.
    pub fn measure(&self, f: &LscFun) -> ExtRational {
        f.entries()
            .iter()
            .fold(ExtRational::zero(), |acc, (w, v)| {
                acc + ExtRational::times(*v, &self.cylinder_measure(w))
            })
    }

    /// Re-check every defining constraint by substitution.
    pub fn verify(&self, model: &ActionModel) -> Result<()> {
        let fail = |m: String| Err(Error::Inconsistency(format!("state does not verify: {m}")));
        if self.weights.iter().any(Signed::is_negative) {
            return fail("negative weight".into());
        }
        let sys = homogeneous_system(model);
        if !check_solution(&sys.rows, &sys.rhs, &self.weights) {
            return fail("an invariance or harmonicity equation fails".into());
        }
        if self.measure(&self.normalized_at) != ExtRational::from_int(1) {
            return fail("normalisation is not 1".into());
        }
        // exchanges: μ(Z(q·u)) = μ(Z(p·u)) on sampled extensions
        for (name, g) in &model.generators {
            for p in g.pieces() {
                for ext in model.space.subtree(p.dom(), 2) {
                    let img = g.map_cylinder(&ext);
                    if let Some(img) = img {
                        if self.cylinder_measure(&ext) != self.cylinder_measure(&img) {
                            return fail(format!("{name} does not preserve μ on {}", model.space.render(&ext)));
                        }
                    }
                }
            }
        }
        Ok(())
    }

    pub fn to_json(&self) -> Value {
        let names: Vec<String> = if self.space.is_finite() {
            self.space.point_labels().to_vec()
        } else {
            self.space.vertex_names().to_vec()
        };
        let weights: BTreeMap<String, String> = names
            .into_iter()
            .zip(&self.weights)
            .map(|(n, w)| (n, fmt_rational(w)))
            .collect();
        json!({
            "weights": weights,
            "normalized_at": self.normalized_at.to_json(),
            "value": "1",
            "faithful": self.faithful,
        })
    }
}

/// The functional a state induces on all of `Lsc(X, N̄)`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Functional {
    state: StateWitness,
}

/// `β(F) = sup ν(z)` over finite-valued `z ≤ F`. The truncations `min(F, n)`
/// are cofinal among those `z`, and `ν` is linear on them, so the supremum is
/// the level-set sum with `∞ · 0 = 0`.
pub fn lift_state_to_functional(state: &StateWitness) -> Functional {
    Functional { state: state.clone() }
}

impl Functional {
    pub fn state(&self) -> &StateWitness {
        &self.state
    }

    pub fn eval(&self, f: &LscFun) -> ExtRational {
        let nf = f.normal_form();
        let mut acc = ExtRational::zero();
        for u in &nf.levels {
            acc = acc + ExtRational::times(crate::Fin(1), &self.set_measure(u.words()));
        }
        acc + ExtRational::times(crate::Inf, &self.set_measure(nf.infinite_tail.words()))
    }

    /// `β` on the truncation `min(F, n)`.
    pub fn eval_truncated(&self, f: &LscFun, n: u64) -> ExtRational {
        self.state.measure(&f.truncate(n))
    }

    fn set_measure(&self, words: &[Word]) -> BigRational {
        words.iter().map(|w| self.state.cylinder_measure(w)).sum()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::budget::Budget;
    use crate::mover::Mover;
    use crate::space::BaseSpace;

    #[test]
    fn rotation_has_uniform_state() {
        let s = BaseSpace::finite(["x1", "x2", "x3"]).unwrap();
        let r = Mover::from_point_map(&s, &[(0, 1), (1, 2), (2, 0)]).unwrap();
        let m = ActionModel::new(&s, vec![("r".into(), r)], Budget::default()).unwrap();
        let one = LscFun::constant(&s, crate::Fin(1));
        match find_invariant_state(&m, &one).unwrap() {
            StateOutcome::Found(st) => {
                assert!(st.faithful);
                assert!(st.weights.iter().all(|w| *w == BigRational::new(1.into(), 3.into())));
            }
            o => panic!("{o:?}"),
        }
    }

    #[test]
    fn functional_sums_over_orbits() {
        let s = BaseSpace::finite(["x1", "x2", "x3"]).unwrap();
        let r = Mover::from_point_map(&s, &[(0, 1), (1, 2), (2, 0)]).unwrap();
        let m = ActionModel::new(&s, vec![("r".into(), r)], Budget::default()).unwrap();
        let one = LscFun::constant(&s, crate::Fin(1));
        let StateOutcome::Found(st) = find_invariant_state(&m, &one).unwrap() else { panic!() };
        let beta = lift_state_to_functional(&st);
        let f = LscFun::from_values(&s, &[crate::Fin(2), crate::Fin(0), crate::Fin(4)]).unwrap();
        assert_eq!(beta.eval(&f), ExtRational::Fin(BigRational::from_integer(2.into())));
        assert_eq!(beta.eval(&LscFun::zero(&s)), ExtRational::zero());
        let g = LscFun::from_values(&s, &[crate::Inf, crate::Fin(0), crate::Fin(0)]).unwrap();
        assert!(!beta.eval(&g).is_finite());
        assert_eq!(beta.eval(&f), st.measure(&f));
    }

    #[test]
    fn cuntz_has_no_state() {
        let s = BaseSpace::path(["v"], [('0', 0, 0), ('1', 0, 0)]).unwrap();
        let w = |t: &str| s.parse_word(t).unwrap();
        let gens = vec![
            ("a".into(), Mover::prefix_exchange(&s, w(""), w("0")).unwrap()),
            ("b".into(), Mover::prefix_exchange(&s, w(""), w("1")).unwrap()),
        ];
        let m = ActionModel::new(&s, gens, Budget::default()).unwrap();
        let one = LscFun::constant(&s, crate::Fin(1));
        match find_invariant_state(&m, &one).unwrap() {
            StateOutcome::Infeasible(c) => assert!(c.verify()),
            o => panic!("{o:?}"),
        }
    }
}
