//! Orbit structure and the hypothesis checks: minimality, topological
//! freeness, closedness of the ideal supports, and covering numbers.

use std::collections::HashSet;
use std::fmt::Write as _;

use serde::Serialize;

use crate::action::ActionModel;
use crate::error::{Error, Result};
use crate::lsc::LscFun;
use crate::mover::Mover;
use crate::space::{OpenSet, Word};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum Status {
    Yes,
    No,
    Unknown,
}

/// Orbits of a finite model, each sorted, in order of their least point.
pub fn orbits(model: &ActionModel) -> Vec<Vec<usize>> {
    let n = model.space.num_points().unwrap_or(0);
    let mut parent: Vec<usize> = (0..n).collect();
    fn find(p: &mut [usize], x: usize) -> usize {
        let mut r = x;
        while p[r] != r {
            r = p[r];
        }
        let mut y = x;
        while p[y] != r {
            let nx = p[y];
            p[y] = r;
            y = nx;
        }
        r
    }
    for l in model.semigroup.letters() {
        for x in 0..n {
            if let Some(y) = l.mover.apply_point(x) {
                let (a, b) = (find(&mut parent, x), find(&mut parent, y));
                parent[a.max(b)] = a.min(b);
            }
        }
    }
    let mut groups: Vec<Vec<usize>> = Vec::new();
    let mut slot = vec![usize::MAX; n];
    for x in 0..n {
        let r = find(&mut parent, x);
        if slot[r] == usize::MAX {
            slot[r] = groups.len();
            groups.push(Vec::new());
        }
        groups[slot[r]].push(x);
    }
    groups
}

#[derive(Clone, Debug, Serialize, PartialEq, Eq)]
pub struct OrbitEdge {
    pub from: String,
    pub to: String,
    pub mover: String,
}

/// Edges between points (finite) or depth-`D` cylinders (path) given by
/// the generators and their inverses.
pub fn orbit_graph(model: &ActionModel) -> Vec<OrbitEdge> {
    let space = &model.space;
    let cells = space.partition_at(if space.is_finite() { 1 } else { model.budget.depth });
    let mut edges = Vec::new();
    for c in &cells {
        for l in model.semigroup.letters() {
            let img = l.mover.image_of_cylinder(c);
            if img.is_empty() {
                continue;
            }
            for d in &cells {
                if img.meets_cylinder(d) {
                    edges.push(OrbitEdge {
                        from: space.render(c),
                        to: space.render(d),
                        mover: l.name.clone(),
                    });
                }
            }
        }
    }
    edges
}

pub fn orbit_dot(model: &ActionModel) -> String {
    let space = &model.space;
    let cells = space.partition_at(if space.is_finite() { 1 } else { model.budget.depth });
    let mut out = String::from("digraph orbits {\n");
    for c in &cells {
        let _ = writeln!(out, "  {:?};", label(&space.render(c)));
    }
    for e in orbit_graph(model) {
        let _ = writeln!(
            out,
            "  {:?} -> {:?} [label={:?}];",
            label(&e.from),
            label(&e.to),
            e.mover
        );
    }
    out.push_str("}\n");
    out
}

fn label(s: &str) -> String {
    if s.is_empty() {
        "ε".into()
    } else {
        s.into()
    }
}

#[derive(Clone, Debug, Serialize, PartialEq, Eq)]
pub struct MinimalityReport {
    pub status: Status,
    /// A nonempty proper invariant open set, when not minimal.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub invariant_set: Option<Vec<String>>,
    pub note: String,
}

/// Rounds of image saturation before giving up.
const SATURATION_ROUNDS: usize = 64;

pub fn is_minimal(model: &ActionModel) -> Result<MinimalityReport> {
    if model.is_finite() {
        let orbs = orbits(model);
        if orbs.len() == 1 {
            return Ok(MinimalityReport {
                status: Status::Yes,
                invariant_set: None,
                note: "single orbit".into(),
            });
        }
        let labels = model.space.point_labels();
        return Ok(MinimalityReport {
            status: Status::No,
            invariant_set: Some(orbs[0].iter().map(|&x| labels[x].clone()).collect()),
            note: format!("{} orbits", orbs.len()),
        });
    }
    let depth = model.budget.depth;
    for c in model.space.partition_at(depth) {
        let mut u = OpenSet::cylinder(&model.space, c.clone());
        let mut stable = false;
        for _ in 0..SATURATION_ROUNDS {
            let mut next = u.clone();
            for l in model.semigroup.letters() {
                next = next.union(&l.mover.image(&u)?)?;
            }
            if next == u {
                stable = true;
                break;
            }
            u = next;
            if u.is_full() {
                break;
            }
        }
        if u.is_full() {
            continue;
        }
        if stable {
            return Ok(MinimalityReport {
                status: Status::No,
                invariant_set: Some(u.render()),
                note: format!("orbit of cylinder {:?} is a proper invariant set", model.space.render(&c)),
            });
        }
        return Ok(MinimalityReport {
            status: Status::Unknown,
            invariant_set: None,
            note: format!(
                "orbit of cylinder {:?} did not stabilise within {SATURATION_ROUNDS} rounds",
                model.space.render(&c)
            ),
        });
    }
    Ok(MinimalityReport {
        status: Status::Yes,
        invariant_set: None,
        note: format!("every depth-{depth} cylinder saturates to the whole space"),
    })
}

/// A mover fixing a region, and whether an idempotent below it covers the region.
#[derive(Clone, Debug, Serialize, PartialEq, Eq)]
pub struct GermIsotropyRecord {
    pub location: String,
    pub mover: String,
    pub trivialized: bool,
}

#[derive(Clone, Debug, Serialize, PartialEq, Eq)]
pub struct FreenessReport {
    pub status: Status,
    pub records: Vec<GermIsotropyRecord>,
    pub note: String,
}

pub fn is_topologically_free(model: &ActionModel) -> Result<FreenessReport> {
    let sg = &model.semigroup;
    let mut records = Vec::new();
    let mut violation = None;
    for e in sg.elements() {
        let fix = e.mover.fixed_interior();
        if fix.is_empty() {
            continue;
        }
        let o = sg.ideal_support(&e.mover)?;
        let bad = fix.difference(&o)?;
        let rendered = fix.render();
        let trivialized = bad.is_empty();
        records.push(GermIsotropyRecord {
            location: rendered.join(" "),
            mover: e.name.clone(),
            trivialized,
        });
        if !trivialized && violation.is_none() {
            violation = Some(GermIsotropyRecord {
                location: bad.render().join(" "),
                mover: e.name.clone(),
                trivialized: false,
            });
        }
    }
    let exact = sg.saturated();
    let (status, note) = match (violation, exact) {
        (Some(v), true) => (
            Status::No,
            format!("{} fixes {} with no idempotent below it", v.mover, v.location),
        ),
        (Some(v), false) => (
            Status::Unknown,
            format!(
                "{} fixes {} with no idempotent below it among words of length ≤ {}",
                v.mover, v.location, model.budget.len
            ),
        ),
        (None, true) => (Status::Yes, "every fixed region is covered by an idempotent".into()),
        (None, false) if single_exchange_generators(model) => (
            Status::Yes,
            "generators are single prefix exchanges on a space without isolated points".into(),
        ),
        (None, false) => (
            Status::Unknown,
            format!("no violation among words of length ≤ {}", model.budget.len),
        ),
    };
    Ok(FreenessReport { status, records, note })
}

/// Every element is then zero or one exchange, and an exchange fixing an
/// open set is an idempotent.
fn single_exchange_generators(model: &ActionModel) -> bool {
    let space = &model.space;
    let isolated = (0..space.vertex_count()).any(|v| {
        let w = if space.vertex_count() == 1 { Word::root() } else { Word(vec![v as u32]) };
        space.is_singleton(&w)
    });
    !isolated
        && model
            .generators
            .iter()
            .all(|(_, m)| m.phase() == 0 && m.pieces().len() == 1 && matches!(m.pieces()[0], crate::mover::Piece::Exch { .. }))
}

#[derive(Clone, Debug, Serialize, PartialEq, Eq)]
pub struct ClosednessReport {
    pub status: Status,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub mover: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub boundary_cylinder: Option<String>,
    pub note: String,
}

pub fn is_closed_action(model: &ActionModel) -> Result<ClosednessReport> {
    if model.is_finite() {
        return Ok(ClosednessReport {
            status: Status::Yes,
            mover: None,
            boundary_cylinder: None,
            note: "discrete space".into(),
        });
    }
    let sg = &model.semigroup;
    let depth = model.budget.depth;
    for e in sg.elements() {
        let fix = e.mover.fixed_interior();
        if fix.is_empty() {
            continue;
        }
        let o = sg.ideal_support(&e.mover)?;
        for f in fix.words() {
            let region = OpenSet::cylinder(&model.space, f.clone());
            let rest = region.difference(&o)?;
            if rest.is_empty() || rest == region {
                continue;
            }
            let level = depth.max(f.len());
            for c in expand_to(&model.space, f, level) {
                if o.meets_cylinder(&c) && rest.meets_cylinder(&c) {
                    return Ok(ClosednessReport {
                        status: Status::No,
                        mover: Some(e.name.clone()),
                        boundary_cylinder: Some(model.space.render(&c)),
                        note: format!(
                            "the idempotents below {} do not cover a clopen part of {:?} at depth {level} (words of length ≤ {})",
                            e.name,
                            model.space.render(&c),
                            model.budget.len
                        ),
                    });
                }
            }
        }
    }
    let note = if sg.saturated() {
        "every ideal support is a finite union of cylinders".to_string()
    } else {
        format!("ideal supports are clopen at depth {depth} (words of length ≤ {})", model.budget.len)
    };
    Ok(ClosednessReport {
        status: Status::Yes,
        mover: None,
        boundary_cylinder: None,
        note,
    })
}

fn expand_to(space: &crate::space::BaseSpace, w: &Word, level: usize) -> Vec<Word> {
    let mut out = Vec::new();
    let mut stack = vec![w.clone()];
    while let Some(u) = stack.pop() {
        let ch = space.children(&u);
        if u.len() >= level || ch.is_empty() {
            out.push(u);
        } else {
            for s in ch.into_iter().rev() {
                stack.push(u.child(s));
            }
        }
    }
    out
}

/// `x ≤ Σ_i θ̂_{s_i}(z_i)` with `z_i ≤ y`.
#[derive(Clone, Debug)]
pub struct Cover {
    pub m: usize,
    pub parts: Vec<(String, Mover, LscFun)>,
}

impl Cover {
    pub fn verify(&self, x: &LscFun, y: &LscFun) -> Result<()> {
        let mut total = LscFun::zero(x.space());
        for (name, s, z) in &self.parts {
            if !z.leq(y)? {
                return Err(Error::Inconsistency(format!("piece moved by {name} exceeds y")));
            }
            total = total.add(&s.push(z)?)?;
        }
        if self.parts.len() != self.m || !x.leq(&total)? {
            return Err(Error::Inconsistency("cover does not dominate x".into()));
        }
        Ok(())
    }
}

#[derive(Clone, Debug)]
pub enum CoverOutcome {
    Found(Cover),
    Unknown { searched_up_to: usize },
}

/// Largest number of translates tried.
const COVER_MAX: usize = 16;

pub fn covering_number(x: &LscFun, y: &LscFun, model: &ActionModel) -> Result<CoverOutcome> {
    if !x.is_finite_valued() {
        return Err(Error::Contract("x must be finite-valued".into()));
    }
    if y.is_zero() {
        return Err(Error::Contract("y must be nonzero".into()));
    }
    if is_minimal(model)?.status == Status::No {
        return Err(Error::Contract("covering numbers need a minimal action".into()));
    }
    let mut cands: Vec<(String, Mover, LscFun, LscFun)> = Vec::new();
    let mut seen = HashSet::new();
    for e in model.semigroup.elements() {
        let z = y.restrict(&e.mover.domain())?;
        if z.is_zero() {
            continue;
        }
        let img = e.mover.push(&z)?;
        if seen.insert(img.clone()) {
            cands.push((e.name.clone(), e.mover.clone(), z, img));
        }
    }
    let mut nodes = 0usize;
    let limit = model.budget.nodes;
    for m in 1..=COVER_MAX {
        let mut chosen = Vec::new();
        if search_cover(x, &cands, m, 0, &LscFun::zero(x.space()), &mut chosen, &mut nodes, limit)? {
            let cover = Cover {
                m,
                parts: chosen
                    .iter()
                    .map(|&i| (cands[i].0.clone(), cands[i].1.clone(), cands[i].2.clone()))
                    .collect(),
            };
            cover.verify(x, y)?;
            return Ok(CoverOutcome::Found(cover));
        }
        if nodes > limit {
            return Ok(CoverOutcome::Unknown { searched_up_to: m });
        }
    }
    Ok(CoverOutcome::Unknown { searched_up_to: COVER_MAX })
}

#[allow(clippy::too_many_arguments)]
fn search_cover(
    x: &LscFun,
    cands: &[(String, Mover, LscFun, LscFun)],
    slots: usize,
    from: usize,
    acc: &LscFun,
    chosen: &mut Vec<usize>,
    nodes: &mut usize,
    limit: usize,
) -> Result<bool> {
    *nodes += 1;
    if *nodes > limit {
        return Ok(false);
    }
    if slots == 0 {
        return x.leq(acc);
    }
    for i in from..cands.len() {
        chosen.push(i);
        let next = acc.add(&cands[i].3)?;
        if search_cover(x, cands, slots - 1, i, &next, chosen, nodes, limit)? {
            return Ok(true);
        }
        chosen.pop();
    }
    Ok(false)
}
