//! Dynamical subequivalence `F ≼ H`: cut `F` into pieces, move each piece by
//! a semigroup element, and stack the moved pieces below `H`.
//!
//! Finite spaces are decided exactly by a transport problem. Path spaces are
//! searched depth-first over pieces of bounded depth and movers of bounded
//! word length; negative answers are only unconditional when an invariant
//! state separates `F` from `H`.

use std::collections::{BTreeMap, HashMap, HashSet};
use std::sync::{Mutex, OnceLock};

use serde_json::{json, Value};

use crate::action::ActionModel;
use crate::budget::Budget;
use crate::error::{Error, Result};
use crate::extnat::{ExtNat, ExtRational, Fin, Inf};
use crate::flow::FlowNetwork;
use crate::groupoid::orbits;
use crate::lsc::{almost_refinement, LscFun};
use crate::mover::Mover;
use crate::space::{same_space, OpenSet, Word};
use crate::states::{find_invariant_state, StateOutcome, StateWitness};

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct WitnessPart {
    pub piece: OpenSet,
    pub mover_name: String,
    pub mover: Mover,
    pub mult: ExtNat,
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct TransportWitness {
    pub parts: Vec<WitnessPart>,
}

impl TransportWitness {
    pub fn to_json(&self) -> Value {
        Value::Array(
            self.parts
                .iter()
                .map(|p| json!({ "piece": p.piece.render(), "mover": p.mover_name, "mult": p.mult }))
                .collect(),
        )
    }

    pub fn has_finite_mults(&self) -> bool {
        self.parts.iter().all(|p| p.mult.is_finite())
    }

    /// `Σ mult · 1_piece`.
    pub fn cover(&self, space: &crate::space::SpaceRef) -> Result<LscFun> {
        let mut acc = LscFun::zero(space);
        for p in &self.parts {
            acc = acc.add(&LscFun::indicator(&p.piece).scale_ext(p.mult))?;
        }
        Ok(acc)
    }

    /// `Σ mult · 1_{mover(piece)}`.
    pub fn load(&self, space: &crate::space::SpaceRef) -> Result<LscFun> {
        let mut acc = LscFun::zero(space);
        for p in &self.parts {
            let img = p.mover.image(&p.piece)?;
            acc = acc.add(&LscFun::indicator(&img).scale_ext(p.mult))?;
        }
        Ok(acc)
    }

    /// Concatenation: a witness for `F + F' ≼ H + H'`.
    pub fn concat(&self, other: &TransportWitness) -> TransportWitness {
        TransportWitness {
            parts: self.parts.iter().chain(&other.parts).cloned().collect(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Certificate {
    /// The orbit carries more mass of `F` than of `H`.
    OrbitMass {
        orbit: Vec<String>,
        f_mass: ExtNat,
        h_mass: ExtNat,
    },
    /// An invariant state with `ν(F) > ν(H)`.
    State {
        state: Box<StateWitness>,
        f_value: ExtRational,
        h_value: ExtRational,
    },
}

impl Certificate {
    pub fn to_json(&self) -> Value {
        match self {
            Certificate::OrbitMass { orbit, f_mass, h_mass } => json!({
                "kind": "orbit_mass",
                "orbit": orbit,
                "f_mass": f_mass,
                "h_mass": h_mass,
            }),
            Certificate::State { state, f_value, h_value } => json!({
                "kind": "state",
                "state": state.to_json(),
                "f_value": f_value.to_string(),
                "h_value": h_value.to_string(),
            }),
        }
    }

    /// Re-check the refutation of `F ≼ H` from scratch.
    pub fn verify(&self, f: &LscFun, h: &LscFun, model: &ActionModel) -> Result<()> {
        match self {
            Certificate::OrbitMass { orbit, .. } => {
                let pts: Vec<usize> = orbit
                    .iter()
                    .map(|l| model.space.point_index(l).ok_or_else(|| Error::Inconsistency(format!("unknown point {l}"))))
                    .collect::<Result<_>>()?;
                for l in model.semigroup.letters() {
                    for &x in &pts {
                        if let Some(y) = l.mover.apply_point(x) {
                            if !pts.contains(&y) {
                                return Err(Error::Inconsistency("orbit certificate is not invariant".into()));
                            }
                        }
                    }
                }
                let fm: ExtNat = pts.iter().map(|&x| f.at(x)).sum();
                let hm: ExtNat = pts.iter().map(|&x| h.at(x)).sum();
                if fm <= hm {
                    return Err(Error::Inconsistency("orbit masses do not separate".into()));
                }
                Ok(())
            }
            Certificate::State { state, .. } => {
                state.verify(model)?;
                if state.measure(f) <= state.measure(h) {
                    return Err(Error::Inconsistency("state does not separate".into()));
                }
                Ok(())
            }
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Decision {
    Yes(TransportWitness),
    No(Certificate),
    /// The search space of the budget was exhausted without a witness.
    NoWithinBudget(Budget),
    Unknown { budget: Budget, reason: String },
}

impl Decision {
    pub fn is_yes(&self) -> bool {
        matches!(self, Decision::Yes(_))
    }

    pub fn is_negative(&self) -> bool {
        matches!(self, Decision::No(_) | Decision::NoWithinBudget(_))
    }

    pub fn label(&self) -> &'static str {
        match self {
            Decision::Yes(_) => "Yes",
            Decision::No(_) => "No",
            Decision::NoWithinBudget(_) => "NoWithinBudget",
            Decision::Unknown { .. } => "Unknown",
        }
    }

    pub fn to_json(&self) -> Value {
        match self {
            Decision::Yes(w) => json!({ "outcome": "Yes", "witness": w.to_json() }),
            Decision::No(c) => json!({ "outcome": "No", "certificate": c.to_json() }),
            Decision::NoWithinBudget(b) => json!({ "outcome": "NoWithinBudget", "budget": b.to_string() }),
            Decision::Unknown { budget, reason } => {
                json!({ "outcome": "Unknown", "budget": budget.to_string(), "reason": reason })
            }
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct WitnessReport {
    pub passed: bool,
    pub failure: Option<String>,
}

impl WitnessReport {
    fn fail(msg: String) -> Self {
        WitnessReport {
            passed: false,
            failure: Some(msg),
        }
    }
}

/// Re-evaluate `F ≤ Σ mult·1_piece` and `Σ mult·1_{mover(piece)} ≤ H`.
pub fn apply_witness(w: &TransportWitness, f: &LscFun, h: &LscFun) -> Result<WitnessReport> {
    same_space(f.space(), h.space())?;
    let space = f.space();
    for (i, p) in w.parts.iter().enumerate() {
        same_space(space, p.piece.space())?;
        if p.mult.is_zero() {
            return Ok(WitnessReport::fail(format!("part {i} has multiplicity 0")));
        }
        if let Some(c) = p.piece.difference(&p.mover.domain())?.words().first() {
            return Ok(WitnessReport::fail(format!(
                "part {i}: cylinder {:?} is outside the domain of {}",
                space.render(c),
                p.mover_name
            )));
        }
    }
    if let Some(c) = f.first_excess(&w.cover(space)?)? {
        return Ok(WitnessReport::fail(format!(
            "pieces do not cover F on cylinder {:?}",
            space.render(&c)
        )));
    }
    if let Some(c) = w.load(space)?.first_excess(h)? {
        return Ok(WitnessReport::fail(format!(
            "moved pieces exceed H on cylinder {:?}",
            space.render(&c)
        )));
    }
    Ok(WitnessReport {
        passed: true,
        failure: None,
    })
}

/// Every mover of the witness is the product its name spells.
pub fn check_names(w: &TransportWitness, model: &ActionModel) -> Result<()> {
    for p in &w.parts {
        if model.semigroup.evaluate_name(&p.mover_name)? != p.mover {
            return Err(Error::Inconsistency(format!(
                "mover {} does not match its name",
                p.mover_name
            )));
        }
    }
    Ok(())
}

fn identity_witness(f: &LscFun, model: &ActionModel) -> TransportWitness {
    let nf = f.normal_form();
    let unit = model.semigroup.unit();
    let mut parts: Vec<WitnessPart> = nf
        .levels
        .into_iter()
        .map(|u| WitnessPart {
            piece: u,
            mover_name: unit.name.clone(),
            mover: unit.mover.clone(),
            mult: Fin(1),
        })
        .collect();
    if !nf.infinite_tail.is_empty() {
        parts.push(WitnessPart {
            piece: nf.infinite_tail,
            mover_name: unit.name.clone(),
            mover: unit.mover.clone(),
            mult: Inf,
        });
    }
    TransportWitness { parts }
}

/// Decision procedures for one model, sharing an invariant state and a memo
/// of earlier answers.
pub struct Engine<'m> {
    model: &'m ActionModel,
    state: OnceLock<Option<StateWitness>>,
    memo: Mutex<HashMap<(LscFun, LscFun), Decision>>,
}

impl<'m> Engine<'m> {
    pub fn new(model: &'m ActionModel) -> Self {
        Engine {
            model,
            state: OnceLock::new(),
            memo: Mutex::new(HashMap::new()),
        }
    }

    pub fn model(&self) -> &'m ActionModel {
        self.model
    }

    /// A normalised invariant state, if the LP finds one.
    pub fn state(&self) -> Option<&StateWitness> {
        self.state
            .get_or_init(|| {
                let one = LscFun::constant(&self.model.space, Fin(1));
                match find_invariant_state(self.model, &one) {
                    Ok(StateOutcome::Found(s)) => Some(s),
                    _ => None,
                }
            })
            .as_ref()
    }

    fn state_certificate(&self, f: &LscFun, h: &LscFun) -> Option<Certificate> {
        let st = self.state()?;
        let (fv, hv) = (st.measure(f), st.measure(h));
        (fv > hv).then(|| Certificate::State {
            state: Box::new(st.clone()),
            f_value: fv,
            h_value: hv,
        })
    }

    pub fn decide(&self, f: &LscFun, h: &LscFun) -> Result<Decision> {
        same_space(f.space(), &self.model.space)?;
        same_space(h.space(), &self.model.space)?;
        let key = (f.clone(), h.clone());
        if let Some(d) = self.memo.lock().expect("memo lock").get(&key) {
            return Ok(d.clone());
        }
        let d = self.decide_uncached(f, h)?;
        if let Decision::Yes(w) = &d {
            let rep = apply_witness(w, f, h)?;
            if !rep.passed {
                return Err(Error::Inconsistency(format!(
                    "search produced an invalid witness: {}",
                    rep.failure.unwrap_or_default()
                )));
            }
        }
        if let Decision::No(c) = &d {
            c.verify(f, h, self.model)?;
        }
        self.memo.lock().expect("memo lock").entry(key).or_insert_with(|| d.clone());
        Ok(d)
    }

    fn decide_uncached(&self, f: &LscFun, h: &LscFun) -> Result<Decision> {
        if f.leq(h)? {
            return Ok(Decision::Yes(identity_witness(f, self.model)));
        }
        if self.model.is_finite() {
            return self.decide_finite(f, h);
        }
        if let Some(c) = self.state_certificate(f, h) {
            return Ok(Decision::No(c));
        }
        let inf = f.infinite_set();
        if inf.is_empty() {
            return self.decide_path(f, h);
        }
        // ∞ on U: route every cylinder of U into the region where H = ∞.
        let h_inf = h.infinite_set();
        let mut parts = Vec::new();
        for u in inf.words() {
            let hit = self.model.semigroup.elements().iter().find(|e| {
                e.mover.domain().contains_cylinder(u)
                    && e.mover
                        .image_of_cylinder(u)
                        .is_subset(&h_inf)
                        .unwrap_or(false)
            });
            match hit {
                Some(e) => parts.push(WitnessPart {
                    piece: OpenSet::cylinder(&self.model.space, u.clone()),
                    mover_name: e.name.clone(),
                    mover: e.mover.clone(),
                    mult: Inf,
                }),
                None => {
                    return Ok(Decision::Unknown {
                        budget: self.model.budget,
                        reason: format!(
                            "no mover within budget sends {:?} into the region where H is infinite",
                            self.model.space.render(u)
                        ),
                    })
                }
            }
        }
        let finite_part = LscFun::from_cylinders(
            &self.model.space,
            f.entries().iter().filter(|(_, v)| v.is_finite()).cloned().collect(),
        )?;
        Ok(match self.decide_path(&finite_part, h)? {
            Decision::Yes(w) => Decision::Yes(w.concat(&TransportWitness { parts })),
            d => d,
        })
    }

    fn decide_finite(&self, f: &LscFun, h: &LscFun) -> Result<Decision> {
        let model = self.model;
        let n = model.space.num_points().expect("finite space");
        let labels = model.space.point_labels();
        let orbs = orbits(model);
        let mut orbit_of = vec![0; n];
        for (k, o) in orbs.iter().enumerate() {
            for &x in o {
                orbit_of[x] = k;
            }
        }
        let (fv, hv) = (f.values(), h.values());

        let mut mass_fail = None;
        for o in &orbs {
            let fm: ExtNat = o.iter().map(|&x| fv[x]).sum();
            let hm: ExtNat = o.iter().map(|&x| hv[x]).sum();
            if fm > hm && mass_fail.is_none() {
                mass_fail = Some(Certificate::OrbitMass {
                    orbit: o.iter().map(|&x| labels[x].clone()).collect(),
                    f_mass: fm,
                    h_mass: hm,
                });
            }
        }

        let finite_total: u128 = fv
            .iter()
            .chain(&hv)
            .filter_map(|v| v.finite())
            .map(u128::from)
            .sum();
        let big = finite_total + 1;
        let cap = |v: ExtNat, inf: u128| v.finite().map_or(inf, u128::from);
        let (src, sink) = (2 * n, 2 * n + 1);
        let mut g = FlowNetwork::new(2 * n + 2);
        let mut supply = 0u128;
        for x in 0..n {
            let c = cap(fv[x], big);
            supply += c;
            g.add_edge(src, x, c);
            g.add_edge(n + x, sink, cap(hv[x], big * (n as u128 + 1)));
        }
        let mut handles = Vec::new();
        for x in 0..n {
            for y in 0..n {
                if orbit_of[x] == orbit_of[y] && !fv[x].is_zero() && !hv[y].is_zero() {
                    handles.push((x, y, g.add_edge(x, n + y, big * (n as u128 + 1))));
                }
            }
        }
        let flow_ok = g.max_flow(src, sink) == supply;
        if flow_ok != mass_fail.is_none() {
            return Err(Error::Inconsistency(
                "max-flow and orbit-mass criteria disagree".into(),
            ));
        }
        if let Some(c) = mass_fail {
            return Ok(Decision::No(c));
        }

        let mut best: BTreeMap<(usize, usize), usize> = BTreeMap::new();
        for (i, e) in model.semigroup.elements().iter().enumerate() {
            for x in 0..n {
                if let Some(y) = e.mover.apply_point(x) {
                    let slot = best.entry((x, y)).or_insert(i);
                    if e.name < model.semigroup.elements()[*slot].name {
                        *slot = i;
                    }
                }
            }
        }
        let mut parts = Vec::new();
        let els = model.semigroup.elements();
        for x in 0..n {
            if fv[x] == Inf {
                let y = (0..n)
                    .find(|&y| orbit_of[y] == orbit_of[x] && hv[y] == Inf)
                    .expect("mass check guarantees an infinite target");
                let e = &els[best[&(x, y)]];
                parts.push(WitnessPart {
                    piece: OpenSet::from_points(&model.space, [x]),
                    mover_name: e.name.clone(),
                    mover: e.mover.clone(),
                    mult: Inf,
                });
            }
        }
        for &(x, y, hd) in &handles {
            let amount = g.flow_on(hd);
            if amount == 0 || fv[x] == Inf {
                continue;
            }
            let e = &els[best[&(x, y)]];
            parts.push(WitnessPart {
                piece: OpenSet::from_points(&model.space, [x]),
                mover_name: e.name.clone(),
                mover: e.mover.clone(),
                mult: Fin(amount as u64),
            });
        }
        Ok(Decision::Yes(TransportWitness { parts }))
    }

    fn decide_path(&self, f: &LscFun, h: &LscFun) -> Result<Decision> {
        let model = self.model;
        let space = &model.space;
        let budget = model.budget;
        let pool = EffectPool::build(model, f, h)?;
        let fv: Vec<u64> = pool
            .cells
            .iter()
            .map(|c| f.value_on(c).finite().expect("finite F"))
            .collect();
        let hv: Vec<u64> = pool
            .cells
            .iter()
            .map(|c| h.value_on(c).finite().unwrap_or(UNBOUNDED))
            .collect();
        let weights: Option<Vec<num_rational::BigRational>> = self
            .state()
            .map(|st| pool.cells.iter().map(|c| st.cylinder_measure(c)).collect());
        // shallow pieces first: the witness found is one of least piece depth
        let top = pool.effects.iter().map(|e| e.piece.len()).max().unwrap_or(0);
        let mut stalled = false;
        for depth in 0..=top {
            let by_cell = pool.by_cell(depth);
            let mut search = Search {
                pool: &pool,
                by_cell: &by_cell,
                weights: weights.clone(),
                failed: HashSet::new(),
                nodes: 0,
                limit: budget.nodes,
                chosen: Vec::new(),
            };
            let mut deficit = fv.clone();
            let mut cap = hv.clone();
            match search.run(&mut deficit, &mut cap) {
                Some(true) => {
                    let mut counts: BTreeMap<usize, u64> = BTreeMap::new();
                    for &e in &search.chosen {
                        *counts.entry(e).or_default() += 1;
                    }
                    let parts = counts
                        .into_iter()
                        .map(|(e, k)| {
                            let eff = &pool.effects[e];
                            let el = &model.semigroup.elements()[eff.element];
                            WitnessPart {
                                piece: OpenSet::cylinder(space, eff.piece.clone()),
                                mover_name: el.name.clone(),
                                mover: el.mover.clone(),
                                mult: Fin(k),
                            }
                        })
                        .collect();
                    return Ok(Decision::Yes(TransportWitness { parts }));
                }
                Some(false) => {}
                None => stalled = true,
            }
        }
        match stalled {
            false => Ok(Decision::NoWithinBudget(budget)),
            true => Ok(Decision::Unknown {
                budget,
                reason: format!("search stopped after {} nodes", budget.nodes),
            }),
        }
    }
}

pub fn decide_subequiv(f: &LscFun, h: &LscFun, model: &ActionModel) -> Result<Decision> {
    Engine::new(model).decide(f, h)
}

const UNBOUNDED: u64 = u64::MAX;

struct Effect {
    piece: Word,
    element: usize,
    cover: Vec<usize>,
    load: Vec<usize>,
}

struct EffectPool {
    cells: Vec<Word>,
    effects: Vec<Effect>,
    /// Effect ids, best candidates first.
    order: Vec<usize>,
}

impl EffectPool {
    fn build(model: &ActionModel, f: &LscFun, h: &LscFun) -> Result<Self> {
        let space = &model.space;
        let depth = model.budget.depth.max(f.max_depth());
        let f_supp = f.support();
        let h_supp = h.support();
        let mut pieces: Vec<Word> = space
            .nodes_up_to(depth)
            .iter()
            .map(|w| space.collapse(w))
            .filter(|w| f_supp.meets_cylinder(w))
            .collect();
        pieces.sort();
        pieces.dedup();

        // (piece, image) → element with the smallest name
        let mut chosen: BTreeMap<(Word, OpenSet), usize> = BTreeMap::new();
        let els = model.semigroup.elements();
        for (i, e) in els.iter().enumerate() {
            if e.mover.is_zero() {
                continue;
            }
            let dom = e.mover.domain();
            for p in &pieces {
                if !dom.contains_cylinder(p) {
                    continue;
                }
                let img = e.mover.image_of_cylinder(p);
                if !img.is_subset(&h_supp)? {
                    continue;
                }
                let slot = chosen.entry((p.clone(), img)).or_insert(i);
                if els[i].name < els[*slot].name {
                    *slot = i;
                }
            }
        }
        let mut words: Vec<Word> = Vec::new();
        words.extend(f.entries().iter().map(|(w, _)| w.clone()));
        words.extend(h.entries().iter().map(|(w, _)| w.clone()));
        for (p, img) in chosen.keys() {
            words.push(p.clone());
            words.extend(img.words().iter().cloned());
        }
        let cells = space.common_cells(words.iter());
        let mut effects = Vec::new();
        for ((p, img), &i) in &chosen {
            let piece_set = OpenSet::cylinder(space, p.clone());
            effects.push(Effect {
                piece: p.clone(),
                element: i,
                cover: (0..cells.len()).filter(|&k| piece_set.contains_cylinder(&cells[k])).collect(),
                load: (0..cells.len()).filter(|&k| img.contains_cylinder(&cells[k])).collect(),
            });
        }
        let mut order: Vec<usize> = (0..effects.len()).collect();
        order.sort_by(|&a, &b| {
            let (ea, eb) = (&effects[a], &effects[b]);
            eb.piece
                .len()
                .cmp(&ea.piece.len())
                .then_with(|| space.render(&ea.piece).cmp(&space.render(&eb.piece)))
                .then_with(|| els[ea.element].name.cmp(&els[eb.element].name))
        });
        Ok(EffectPool {
            cells,
            effects,
            order,
        })
    }

    /// Effects covering each cell among pieces of depth at most `depth`.
    fn by_cell(&self, depth: usize) -> Vec<Vec<usize>> {
        let mut by_cell = vec![Vec::new(); self.cells.len()];
        for &e in &self.order {
            if self.effects[e].piece.len() <= depth {
                for &c in &self.effects[e].cover {
                    by_cell[c].push(e);
                }
            }
        }
        by_cell
    }
}

struct Search<'p> {
    pool: &'p EffectPool,
    by_cell: &'p [Vec<usize>],
    weights: Option<Vec<num_rational::BigRational>>,
    failed: HashSet<(Vec<u64>, Vec<u64>)>,
    nodes: usize,
    limit: usize,
    chosen: Vec<usize>,
}

impl Search<'_> {
    /// `Some(found)` on completion, `None` when the node limit is hit.
    fn run(&mut self, deficit: &mut Vec<u64>, cap: &mut Vec<u64>) -> Option<bool> {
        self.nodes += 1;
        if self.nodes > self.limit {
            return None;
        }
        let target = (0..deficit.len())
            .filter(|&c| deficit[c] > 0)
            .max_by(|&a, &b| {
                self.pool.cells[a]
                    .len()
                    .cmp(&self.pool.cells[b].len())
                    .then(b.cmp(&a))
            });
        let Some(c) = target else {
            return Some(true);
        };
        let key = (deficit.clone(), cap.clone());
        if self.failed.contains(&key) {
            return Some(false);
        }
        if let Some(w) = &self.weights {
            let need: num_rational::BigRational = deficit
                .iter()
                .zip(w)
                .map(|(d, m)| m * num_rational::BigRational::from_integer((*d).into()))
                .sum();
            let room: Option<num_rational::BigRational> = cap.iter().zip(w).try_fold(
                num_rational::BigRational::from_integer(0.into()),
                |acc, (k, m)| {
                    if *k == UNBOUNDED {
                        use num_traits::Zero;
                        if m.is_zero() {
                            Some(acc)
                        } else {
                            None
                        }
                    } else {
                        Some(acc + m * num_rational::BigRational::from_integer((*k).into()))
                    }
                },
            );
            if room.is_some_and(|r| need > r) {
                self.failed.insert(key);
                return Some(false);
            }
        }
        let by_cell = self.by_cell;
        for &e in &by_cell[c] {
            let eff = &self.pool.effects[e];
            if eff.load.iter().any(|&k| cap[k] == 0) {
                continue;
            }
            let mut touched = Vec::new();
            for &k in &eff.cover {
                if deficit[k] > 0 {
                    deficit[k] -= 1;
                    touched.push(k);
                }
            }
            for &k in &eff.load {
                if cap[k] != UNBOUNDED {
                    cap[k] -= 1;
                }
            }
            self.chosen.push(e);
            let r = self.run(deficit, cap);
            if r != Some(false) {
                return r;
            }
            self.chosen.pop();
            for &k in &touched {
                deficit[k] += 1;
            }
            for &k in &eff.load {
                if cap[k] != UNBOUNDED {
                    cap[k] += 1;
                }
            }
        }
        self.failed.insert(key);
        Some(false)
    }
}

/// A witness for `F ≼ H` from witnesses for `F ≼ G` and `G ≼ H`.
///
/// The images of `w1` are split along the pieces of `w2` by
/// [`almost_refinement`], pulled back, and moved by the composite movers.
pub fn compose_witnesses(
    w1: &TransportWitness,
    w2: &TransportWitness,
    f: &LscFun,
    g: &LscFun,
    h: &LscFun,
) -> Result<TransportWitness> {
    for (w, a, b, tag) in [(w1, f, g, "first"), (w2, g, h, "second")] {
        let rep = apply_witness(w, a, b)?;
        if !rep.passed {
            return Err(Error::Contract(format!(
                "{tag} witness does not verify: {}",
                rep.failure.unwrap_or_default()
            )));
        }
        if !w.has_finite_mults() {
            return Err(Error::Contract(format!("{tag} witness has infinite multiplicities")));
        }
    }
    let space = f.space();
    let mut xs = Vec::new();
    for p in &w1.parts {
        let img = p.mover.image(&p.piece)?;
        xs.push(LscFun::indicator(&img).scale_ext(p.mult));
    }
    let ys: Vec<LscFun> = w2
        .parts
        .iter()
        .map(|p| LscFun::indicator(&p.piece).scale_ext(p.mult))
        .collect();
    let u = almost_refinement(&xs, &xs, &ys)?;
    let mut parts = Vec::new();
    for (i, p) in w1.parts.iter().enumerate() {
        let back = p.mover.inverse();
        for (j, q) in w2.parts.iter().enumerate() {
            let uij = &u[i][j];
            if uij.is_zero() {
                continue;
            }
            let mover = q.mover.compose(&p.mover)?;
            let name = compose_names(&q.mover_name, &p.mover_name);
            for (c, v) in uij.entries() {
                let piece = back.image_of_cylinder(c);
                parts.push(WitnessPart {
                    piece,
                    mover_name: name.clone(),
                    mover: mover.clone(),
                    mult: *v,
                });
            }
        }
    }
    let out = TransportWitness { parts };
    let rep = apply_witness(&out, f, h)?;
    if !rep.passed {
        return Err(Error::Contract(format!(
            "refinement failed: {}",
            rep.failure.unwrap_or_default()
        )));
    }
    let _ = space;
    Ok(out)
}

fn compose_names(outer: &str, inner: &str) -> String {
    match (outer, inner) {
        ("1", x) | (x, "1") => x.to_string(),
        (a, b) => format!("{a}.{b}"),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::space::BaseSpace;

    fn z3() -> ActionModel {
        let s = BaseSpace::finite(["x1", "x2", "x3"]).unwrap();
        let r = Mover::from_point_map(&s, &[(0, 1), (1, 2), (2, 0)]).unwrap();
        ActionModel::new(&s, vec![("r".into(), r)], Budget::default()).unwrap()
    }

    fn o2(budget: Budget) -> ActionModel {
        let s = BaseSpace::path(["v"], [('0', 0, 0), ('1', 0, 0)]).unwrap();
        let w = |t: &str| s.parse_word(t).unwrap();
        let gens = vec![
            ("a".into(), Mover::prefix_exchange(&s, w(""), w("0")).unwrap()),
            ("b".into(), Mover::prefix_exchange(&s, w(""), w("1")).unwrap()),
        ];
        ActionModel::new(&s, gens, budget).unwrap()
    }

    #[test]
    fn orbit_mass_refutes() {
        let m = z3();
        let f = LscFun::from_values(&m.space, &[Fin(2), Fin(0), Fin(0)]).unwrap();
        let h = LscFun::from_values(&m.space, &[Fin(0), Fin(1), Fin(0)]).unwrap();
        match decide_subequiv(&f, &h, &m).unwrap() {
            Decision::No(Certificate::OrbitMass { f_mass, h_mass, .. }) => {
                assert_eq!((f_mass, h_mass), (Fin(2), Fin(1)));
            }
            d => panic!("{d:?}"),
        }
    }

    #[test]
    fn rotation_moves_mass() {
        let m = z3();
        let f = LscFun::from_values(&m.space, &[Fin(2), Fin(1), Fin(0)]).unwrap();
        let h = LscFun::from_values(&m.space, &[Fin(1), Fin(1), Fin(1)]).unwrap();
        let d = decide_subequiv(&f, &h, &m).unwrap();
        let Decision::Yes(w) = d else { panic!("{d:?}") };
        assert!(apply_witness(&w, &f, &h).unwrap().passed);
        check_names(&w, &m).unwrap();
    }

    #[test]
    fn cuntz_doubling() {
        let m = o2("depth=1,len=1".parse().unwrap());
        let one = LscFun::constant(&m.space, Fin(1));
        let d = decide_subequiv(&one.scale(2), &one, &m).unwrap();
        let Decision::Yes(w) = d else { panic!("{d:?}") };
        assert!(apply_witness(&w, &one.scale(2), &one).unwrap().passed);
    }

    #[test]
    fn witness_failure_names_cylinder() {
        let m = o2(Budget::default());
        let one = LscFun::constant(&m.space, Fin(1));
        let id = m.semigroup.unit().clone();
        let w = TransportWitness {
            parts: vec![WitnessPart {
                piece: OpenSet::full(&m.space),
                mover_name: id.name,
                mover: id.mover,
                mult: Fin(2),
            }],
        };
        let rep = apply_witness(&w, &one, &one).unwrap();
        assert!(!rep.passed);
        assert!(rep.failure.unwrap().contains("exceed H"));
        assert!(apply_witness(&TransportWitness::default(), &LscFun::zero(&m.space), &one).unwrap().passed);
    }

    #[test]
    fn composing_doublings() {
        let m = o2("depth=1,len=1".parse().unwrap());
        let one = LscFun::constant(&m.space, Fin(1));
        let Decision::Yes(w2) = decide_subequiv(&one.scale(2), &one, &m).unwrap() else { panic!() };
        let Decision::Yes(w1) = decide_subequiv(&one.scale(4), &one.scale(2), &m).unwrap() else { panic!() };
        let w = compose_witnesses(&w1, &w2, &one.scale(4), &one.scale(2), &one).unwrap();
        assert!(apply_witness(&w, &one.scale(4), &one).unwrap().passed);
        check_names(&w, &m).unwrap();
    }
}
