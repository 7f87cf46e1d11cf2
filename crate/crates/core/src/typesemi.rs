//! Classes of `Lsc(X, N̄)^≪` under two-sided subequivalence, paradoxes and
//! the Tarski alternative.

use serde_json::{json, Value};

use crate::action::ActionModel;
use crate::budget::Budget;
use crate::error::{Error, Result};
use crate::groupoid::{orbits, Status};
use crate::lsc::LscFun;
use crate::space::OpenSet;
use crate::states::{find_invariant_state, StateOutcome, StateWitness};
use crate::subequiv::{apply_witness, Decision, Engine, TransportWitness};

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TypeClass {
    pub representative: LscFun,
    /// Per-orbit masses, on finite spaces.
    pub key: Option<Vec<u64>>,
}

pub fn class_of(f: &LscFun, model: &ActionModel) -> Result<TypeClass> {
    if !f.is_finite_valued() {
        return Err(Error::Contract(
            "classes are taken of finite-valued functions only".into(),
        ));
    }
    crate::space::same_space(f.space(), &model.space)?;
    let key = model.is_finite().then(|| {
        orbits(model)
            .iter()
            .map(|o| o.iter().map(|&x| f.at(x).finite().unwrap_or(0)).sum())
            .collect()
    });
    Ok(TypeClass {
        representative: f.clone(),
        key,
    })
}

/// `[F] ≤ [H]`, as a decision.
pub fn class_leq(engine: &Engine, a: &TypeClass, b: &TypeClass) -> Result<Decision> {
    engine.decide(&a.representative, &b.representative)
}

/// Equality of classes: by key where there is one, else both directions.
pub fn class_eq(engine: &Engine, a: &TypeClass, b: &TypeClass) -> Result<Status> {
    if let (Some(x), Some(y)) = (&a.key, &b.key) {
        return Ok(if x == y { Status::Yes } else { Status::No });
    }
    let fwd = class_leq(engine, a, b)?;
    let bwd = class_leq(engine, b, a)?;
    Ok(match (&fwd, &bwd) {
        (Decision::Yes(_), Decision::Yes(_)) => Status::Yes,
        (Decision::No(_), _) | (_, Decision::No(_)) => Status::No,
        _ => Status::Unknown,
    })
}

pub fn class_add(a: &TypeClass, b: &TypeClass) -> Result<TypeClass> {
    let key = match (&a.key, &b.key) {
        (Some(x), Some(y)) => Some(x.iter().zip(y).map(|(p, q)| p + q).collect()),
        _ => None,
    };
    Ok(TypeClass {
        representative: a.representative.add(&b.representative)?,
        key,
    })
}

fn check_kl(f: &LscFun, k: u64, l: u64) -> Result<()> {
    if !(k > l && l > 0) {
        return Err(Error::Contract(format!("(k, l) = ({k}, {l}) needs k > l > 0")));
    }
    if !f.is_finite_valued() {
        return Err(Error::Contract("paradoxes are tested on finite-valued functions".into()));
    }
    if f.is_zero() {
        return Err(Error::Contract("the zero function is excluded".into()));
    }
    Ok(())
}

/// `k·F ≼ l·F`.
pub fn is_kl_paradoxical(engine: &Engine, f: &LscFun, k: u64, l: u64) -> Result<Decision> {
    check_kl(f, k, l)?;
    engine.decide(&f.scale(k), &f.scale(l))
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PairOutcome {
    pub k: u64,
    pub l: u64,
    pub decision: Decision,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ParadoxReport {
    pub element: LscFun,
    pub pairs: Vec<PairOutcome>,
    pub plain: Status,
    pub budget: Budget,
}

impl ParadoxReport {
    pub fn to_json(&self) -> Value {
        json!({
            "element": self.element.to_json(),
            "pairs": self.pairs.iter().map(|p| json!({
                "k": p.k,
                "l": p.l,
                "decision": p.decision.to_json(),
            })).collect::<Vec<_>>(),
            "plain_paradoxes": self.plain,
            "budget": self.budget.to_string(),
        })
    }
}

/// The `(k, l)` question on `F`, plus the plain-paradox check on `F` alone.
pub fn paradox_report(engine: &Engine, f: &LscFun, k: u64, l: u64, nmax: usize) -> Result<ParadoxReport> {
    let d = is_kl_paradoxical(engine, f, k, l)?;
    let probe = plain_paradox_probe(engine, std::slice::from_ref(f), nmax)?;
    Ok(ParadoxReport {
        element: f.clone(),
        pairs: vec![PairOutcome { k, l, decision: d }],
        plain: probe.status,
        budget: engine.model().budget,
    })
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum TarskiOutcome {
    StateExists(StateWitness),
    Paradoxical { n: u64, witness: TransportWitness },
    Unknown { budget: Budget, reason: String },
}

impl TarskiOutcome {
    pub fn to_json(&self) -> Value {
        match self {
            TarskiOutcome::StateExists(s) => json!({ "outcome": "StateExists", "state": s.to_json() }),
            TarskiOutcome::Paradoxical { n, witness } => json!({
                "outcome": "Paradoxical",
                "n": n,
                "witness": witness.to_json(),
            }),
            TarskiOutcome::Unknown { budget, reason } => json!({
                "outcome": "Unknown",
                "budget": budget.to_string(),
                "reason": reason,
            }),
        }
    }
}

/// A state normalised at `F`, or some `(n+1)·F ≼ n·F` with `n ≤ nmax`.
///
/// Both sides always run; finding both is reported as an inconsistency.
pub fn tarski_test(engine: &Engine, f: &LscFun, nmax: usize) -> Result<TarskiOutcome> {
    tarski_impl(engine, f, nmax, true)
}

pub(crate) fn tarski_impl(engine: &Engine, f: &LscFun, nmax: usize, search: bool) -> Result<TarskiOutcome> {
    if f.is_zero() {
        return Err(Error::Contract("the Tarski test needs a nonzero element".into()));
    }
    let model = engine.model();
    let state = match find_invariant_state(model, f)? {
        StateOutcome::Found(s) => Some(s),
        StateOutcome::Infeasible(_) => None,
    };
    let mut paradox = None;
    let mut stalled = false;
    if search {
        for n in 1..=nmax as u64 {
            match is_kl_paradoxical(engine, f, n + 1, n)? {
                Decision::Yes(w) => {
                    paradox = Some((n, w));
                    break;
                }
                Decision::Unknown { .. } => stalled = true,
                _ => {}
            }
        }
    }
    match (state, paradox) {
        (Some(_), Some((n, _))) => Err(Error::Inconsistency(format!(
            "a state normalised at F coexists with a ({}, {n}) paradox",
            n + 1
        ))),
        (Some(s), None) => Ok(TarskiOutcome::StateExists(s)),
        (None, Some((n, witness))) => {
            let rep = apply_witness(&witness, &f.scale(n + 1), &f.scale(n))?;
            if !rep.passed {
                return Err(Error::Inconsistency("paradox witness does not verify".into()));
            }
            Ok(TarskiOutcome::Paradoxical { n, witness })
        }
        (None, None) => Ok(TarskiOutcome::Unknown {
            budget: model.budget,
            reason: if stalled {
                format!("no state, and the paradox search hit its node limit for some n ≤ {nmax}")
            } else {
                format!("no state, and no (n+1, n) paradox with n ≤ {nmax}")
            },
        }),
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ProbeEntry {
    pub element: LscFun,
    /// Least `n` with `(n+1)·F ≼ n·F` found.
    pub paradox_at: Option<u64>,
    pub two_one: Option<&'static str>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ProbeReport {
    pub status: Status,
    pub entries: Vec<ProbeEntry>,
    pub nmax: usize,
}

impl ProbeReport {
    pub fn to_json(&self) -> Value {
        json!({
            "status": self.status,
            "nmax": self.nmax,
            "samples": self.entries.iter().map(|e| json!({
                "element": e.element.to_json(),
                "paradox_at": e.paradox_at,
                "two_one": e.two_one,
            })).collect::<Vec<_>>(),
        })
    }
}

/// For each sample with an `(n+1, n)` paradox, look for a `(2, 1)` one.
///
/// A sample failing within budget makes the status `Unknown`; the probe
/// never answers `No`.
pub fn plain_paradox_probe(engine: &Engine, samples: &[LscFun], nmax: usize) -> Result<ProbeReport> {
    let mut status = Status::Yes;
    let mut entries = Vec::new();
    for f in samples {
        if f.is_zero() || !f.is_finite_valued() {
            continue;
        }
        let mut paradox_at = None;
        for n in 1..=nmax as u64 {
            if is_kl_paradoxical(engine, f, n + 1, n)?.is_yes() {
                paradox_at = Some(n);
                break;
            }
        }
        let two_one = match paradox_at {
            None => None,
            Some(1) => Some("Yes"),
            Some(_) => {
                let d = is_kl_paradoxical(engine, f, 2, 1)?;
                if !d.is_yes() {
                    status = Status::Unknown;
                }
                Some(d.label())
            }
        };
        entries.push(ProbeEntry {
            element: f.clone(),
            paradox_at,
            two_one,
        });
    }
    Ok(ProbeReport {
        status,
        entries,
        nmax,
    })
}

/// The default sample: `F₀`, then the indicators of points or depth-1 cylinders.
pub fn default_samples(model: &ActionModel, f0: &LscFun) -> Vec<LscFun> {
    let space = &model.space;
    let mut out = vec![f0.clone()];
    let cells = if let Some(n) = space.num_points() {
        (0..n).map(|x| space.point(x)).collect()
    } else {
        space.partition_at(1)
    };
    for c in cells {
        let f = LscFun::indicator(&OpenSet::cylinder(space, c));
        if !out.contains(&f) {
            out.push(f);
        }
    }
    out
}
