//! Exhaustive subequivalence for tiny instances.
//!
//! Shares no search code with [`crate::subequiv`]: movers are rebuilt from
//! generator words, cells come from a uniform-depth partition, and every
//! multiplicity vector within the bounds is enumerated (with capacity and
//! coverage pruning). Exhaustion is reported as `NoWithinBudget`, which on a
//! finite space is an exact negative answer.

use std::collections::{BTreeMap, HashSet, VecDeque};

use crate::action::ActionModel;
use crate::budget::Budget;
use crate::error::{Error, Result};
use crate::extnat::{ExtNat, Fin, Inf};
use crate::lsc::LscFun;
use crate::mover::Mover;
use crate::space::{OpenSet, Word};
use crate::subequiv::{Decision, TransportWitness, WitnessPart};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct OracleBounds {
    /// Piece depth on path spaces.
    pub depth: usize,
    /// Generator-word length on path spaces.
    pub len: usize,
}

pub const MAX_POINTS: usize = 6;
pub const MAX_VALUE: u64 = 4;
pub const MAX_DEPTH: usize = 2;
pub const MAX_LEN: usize = 3;

fn letters(model: &ActionModel) -> Vec<(String, Mover)> {
    let mut out = Vec::new();
    for (name, g) in &model.generators {
        out.push((name.clone(), g.clone()));
        let inv = g.inverse();
        if inv != *g {
            out.push((format!("{name}*"), inv));
        }
    }
    out
}

pub fn brute_force_subequiv(
    f: &LscFun,
    h: &LscFun,
    model: &ActionModel,
    bounds: OracleBounds,
) -> Result<Decision> {
    if !f.is_finite_valued() {
        return Err(Error::Contract("the oracle handles finite-valued F only".into()));
    }
    if f.max_value() > Fin(MAX_VALUE) {
        return Err(Error::Contract(format!("oracle refuses F values above {MAX_VALUE}")));
    }
    if model.is_finite() {
        let n = model.space.num_points().unwrap_or(0);
        if n > MAX_POINTS {
            return Err(Error::Contract(format!("oracle refuses more than {MAX_POINTS} points")));
        }
        finite(f, h, model)
    } else {
        if bounds.depth > MAX_DEPTH || bounds.len > MAX_LEN || bounds.depth == 0 {
            return Err(Error::Contract(format!(
                "oracle bounds must satisfy 1 ≤ depth ≤ {MAX_DEPTH} and len ≤ {MAX_LEN}"
            )));
        }
        path(f, h, model, bounds)
    }
}

fn budget_of(model: &ActionModel, bounds: OracleBounds) -> Budget {
    Budget {
        depth: bounds.depth.max(1),
        len: bounds.len.max(1),
        ..model.budget
    }
}

fn finite(f: &LscFun, h: &LscFun, model: &ActionModel) -> Result<Decision> {
    let space = &model.space;
    let n = space.num_points().unwrap_or(0);
    let ls = letters(model);
    // shortest letter path from each x to every reachable y
    let mut route: Vec<BTreeMap<usize, Vec<usize>>> = Vec::with_capacity(n);
    for x in 0..n {
        let mut seen = BTreeMap::from([(x, Vec::new())]);
        let mut queue = VecDeque::from([x]);
        while let Some(p) = queue.pop_front() {
            for (li, (_, m)) in ls.iter().enumerate() {
                if let Some(q) = m.apply_point(p) {
                    if !seen.contains_key(&q) {
                        let mut path = seen[&p].clone();
                        path.push(li);
                        seen.insert(q, path);
                        queue.push_back(q);
                    }
                }
            }
        }
        route.push(seen);
    }
    let units: Vec<usize> = (0..n)
        .flat_map(|x| std::iter::repeat_n(x, f.at(x).finite().unwrap_or(0) as usize))
        .collect();
    let mut cap: Vec<u64> = (0..n).map(|y| h.at(y).min_fin(units.len() as u64)).collect();
    let mut assign = Vec::new();
    if !assign_units(&units, &route, &mut cap, &mut assign) {
        return Ok(Decision::NoWithinBudget(model.budget));
    }
    let mut counts: BTreeMap<(usize, usize), u64> = BTreeMap::new();
    for (&x, &y) in units.iter().zip(&assign) {
        *counts.entry((x, y)).or_default() += 1;
    }
    let mut parts = Vec::new();
    for ((x, y), k) in counts {
        let (name, mover) = spell(model, &ls, &route[x][&y])?;
        parts.push(WitnessPart {
            piece: OpenSet::from_points(space, [x]),
            mover_name: name,
            mover,
            mult: Fin(k),
        });
    }
    Ok(Decision::Yes(TransportWitness { parts }))
}

fn assign_units(
    units: &[usize],
    route: &[BTreeMap<usize, Vec<usize>>],
    cap: &mut [u64],
    assign: &mut Vec<usize>,
) -> bool {
    let i = assign.len();
    let Some(&x) = units.get(i) else {
        return true;
    };
    // units of one point are interchangeable: keep targets non-decreasing
    let lo = if i > 0 && units[i - 1] == x { assign[i - 1] } else { 0 };
    for (&y, _) in route[x].range(lo..) {
        if cap[y] == 0 {
            continue;
        }
        cap[y] -= 1;
        assign.push(y);
        if assign_units(units, route, cap, assign) {
            return true;
        }
        assign.pop();
        cap[y] += 1;
    }
    false
}

/// The composite of the letters on a path, first letter applied first.
fn spell(model: &ActionModel, ls: &[(String, Mover)], path: &[usize]) -> Result<(String, Mover)> {
    let mut mover = Mover::identity(&model.space);
    let mut names: Vec<&str> = Vec::new();
    for &l in path {
        mover = ls[l].1.compose(&mover)?;
        names.push(&ls[l].0);
    }
    if names.is_empty() {
        return Ok(("1".into(), mover));
    }
    names.reverse();
    Ok((names.join("."), mover))
}

struct Effect {
    piece: Word,
    name: String,
    mover: Mover,
    cover: Vec<usize>,
    load: Vec<usize>,
}

fn path(f: &LscFun, h: &LscFun, model: &ActionModel, bounds: OracleBounds) -> Result<Decision> {
    let space = &model.space;
    let ls = letters(model);
    let mut words: Vec<Vec<usize>> = vec![Vec::new()];
    let mut frontier: Vec<Vec<usize>> = vec![Vec::new()];
    for _ in 0..bounds.len {
        let mut next = Vec::new();
        for w in &frontier {
            for l in 0..ls.len() {
                let mut v = w.clone();
                v.push(l);
                next.push(v);
            }
        }
        words.extend(next.iter().cloned());
        frontier = next;
    }
    let movers: Vec<(String, Mover)> = words
        .iter()
        .map(|w| spell(model, &ls, w))
        .collect::<Result<_>>()?;

    let depth = bounds.depth.max(f.max_depth());
    let pieces = space.nodes_up_to(depth);
    let mut raw: Vec<(Word, OpenSet, usize)> = Vec::new();
    let mut seen: HashSet<(OpenSet, OpenSet)> = HashSet::new();
    for p in &pieces {
        let pset = OpenSet::cylinder(space, p.clone());
        for (i, (_, m)) in movers.iter().enumerate() {
            if m.is_zero() || !pset.is_subset(&m.domain())? {
                continue;
            }
            let img = m.image(&pset)?;
            if seen.insert((pset.clone(), img.clone())) {
                raw.push((p.clone(), img, i));
            }
        }
    }
    let level = raw
        .iter()
        .flat_map(|(p, img, _)| std::iter::once(p.len()).chain(img.words().iter().map(Word::len)))
        .chain(f.entries().iter().map(|(w, _)| w.len()))
        .chain(h.entries().iter().map(|(w, _)| w.len()))
        .max()
        .unwrap_or(0);
    let cells = space.partition_at(level);
    let fv: Vec<u64> = cells.iter().map(|c| f.value_on(c).finite().unwrap_or(0)).collect();
    let hv: Vec<u64> = cells
        .iter()
        .map(|c| match h.value_on(c) {
            Inf => u64::MAX,
            ExtNat::Fin(k) => k,
        })
        .collect();

    let effects: Vec<Effect> = raw
        .into_iter()
        .map(|(p, img, i)| {
            let pset = OpenSet::cylinder(space, p.clone());
            Effect {
                cover: (0..cells.len()).filter(|&k| pset.contains_cylinder(&cells[k])).collect(),
                load: (0..cells.len()).filter(|&k| img.contains_cylinder(&cells[k])).collect(),
                piece: p,
                name: movers[i].0.clone(),
                mover: movers[i].1.clone(),
            }
        })
        // useless or overloading effects are pinned to 0
        .filter(|e| e.cover.iter().any(|&k| fv[k] > 0) && e.load.iter().all(|&k| hv[k] > 0))
        .collect();

    let top = f.max_value().finite().unwrap_or(0);
    // reach[i][k]: most coverage of cell k the effects i.. can still supply
    let mut reach = vec![vec![0u64; cells.len()]; effects.len() + 1];
    for i in (0..effects.len()).rev() {
        reach[i] = reach[i + 1].clone();
        for &k in &effects[i].cover {
            reach[i][k] += top;
        }
    }
    let mut bb = Enumerate {
        effects: &effects,
        reach: &reach,
        top,
        failed: HashSet::new(),
        mults: vec![0; effects.len()],
    };
    let mut deficit = fv;
    let mut cap = hv;
    if !bb.run(0, &mut deficit, &mut cap) {
        return Ok(Decision::NoWithinBudget(budget_of(model, bounds)));
    }
    let parts = effects
        .iter()
        .zip(&bb.mults)
        .filter(|(_, &m)| m > 0)
        .map(|(e, &m)| WitnessPart {
            piece: OpenSet::cylinder(space, e.piece.clone()),
            mover_name: e.name.clone(),
            mover: e.mover.clone(),
            mult: Fin(m),
        })
        .collect();
    Ok(Decision::Yes(TransportWitness { parts }))
}

struct Enumerate<'a> {
    effects: &'a [Effect],
    reach: &'a [Vec<u64>],
    top: u64,
    failed: HashSet<(usize, Vec<u64>, Vec<u64>)>,
    mults: Vec<u64>,
}

impl Enumerate<'_> {
    fn run(&mut self, i: usize, deficit: &mut Vec<u64>, cap: &mut Vec<u64>) -> bool {
        if deficit.iter().zip(&self.reach[i]).any(|(d, r)| d > r) {
            return false;
        }
        if i == self.effects.len() {
            return true;
        }
        let key = (i, deficit.clone(), cap.clone());
        if self.failed.contains(&key) {
            return false;
        }
        let e = &self.effects[i];
        let (d0, c0) = (deficit.clone(), cap.clone());
        for m in 0..=self.top {
            if m > 0 {
                if e.load.iter().any(|&k| cap[k] == 0) {
                    break;
                }
                for &k in &e.load {
                    if cap[k] != u64::MAX {
                        cap[k] -= 1;
                    }
                }
                for &k in &e.cover {
                    deficit[k] = deficit[k].saturating_sub(1);
                }
            }
            self.mults[i] = m;
            if self.run(i + 1, deficit, cap) {
                return true;
            }
        }
        self.mults[i] = 0;
        *deficit = d0;
        *cap = c0;
        self.failed.insert(key);
        false
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::space::BaseSpace;
    use crate::subequiv::apply_witness;

    #[test]
    fn refuses_large_inputs() {
        let s = BaseSpace::finite(["a", "b", "c", "d", "e", "f", "g"]).unwrap();
        let m = ActionModel::new(&s, vec![], Budget::default()).unwrap();
        let one = LscFun::constant(&s, Fin(1));
        let b = OracleBounds { depth: 1, len: 1 };
        assert!(brute_force_subequiv(&one, &one, &m, b).is_err());
    }

    #[test]
    fn o2_doubling() {
        let s = BaseSpace::path(["v"], [('0', 0, 0), ('1', 0, 0)]).unwrap();
        let w = |t: &str| s.parse_word(t).unwrap();
        let gens = vec![
            ("a".into(), Mover::prefix_exchange(&s, w(""), w("0")).unwrap()),
            ("b".into(), Mover::prefix_exchange(&s, w(""), w("1")).unwrap()),
        ];
        let m = ActionModel::new(&s, gens, Budget::default()).unwrap();
        let one = LscFun::constant(&s, Fin(1));
        let d = brute_force_subequiv(&one.scale(2), &one, &m, OracleBounds { depth: 1, len: 1 }).unwrap();
        let Decision::Yes(wit) = d else { panic!("{d:?}") };
        assert!(apply_witness(&wit, &one.scale(2), &one).unwrap().passed);
        let d = brute_force_subequiv(&one.scale(3), &LscFun::zero(&s), &m, OracleBounds { depth: 1, len: 1 }).unwrap();
        assert!(d.is_negative());
    }
}
