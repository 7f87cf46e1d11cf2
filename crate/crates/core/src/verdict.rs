//! The verdict pipeline: validate the action, evaluate the hypothesis gates,
//! then settle the dichotomy for the unit `F₀` by the Tarski test.

use serde_json::{json, Value};

use crate::budget::Budget;
use crate::error::{Error, Result};
use crate::extnat::ExtRational;
use crate::groupoid::{
    is_closed_action, is_minimal, is_topologically_free, ClosednessReport, FreenessReport,
    MinimalityReport, Status,
};
use crate::model::ModelSpec;
use crate::semigroup::{validate_action, ValidationReport};
use crate::states::StateWitness;
use crate::subequiv::{apply_witness, check_names, Decision, Engine, TransportWitness};
use crate::typesemi::{default_samples, is_kl_paradoxical, plain_paradox_probe, tarski_impl, ProbeReport, TarskiOutcome};

#[derive(Clone, Debug)]
pub struct Hypotheses {
    pub minimal: MinimalityReport,
    pub topologically_free: FreenessReport,
    pub closed_action: ClosednessReport,
    pub plain_paradoxes_probe: ProbeReport,
}

impl Hypotheses {
    fn gates(&self) -> [(&'static str, Status); 4] {
        [
            ("minimal", self.minimal.status),
            ("topologically_free", self.topologically_free.status),
            ("closed_action", self.closed_action.status),
            ("plain_paradoxes_probe", self.plain_paradoxes_probe.status),
        ]
    }

    pub fn to_json(&self) -> Value {
        json!({
            "minimal": self.minimal,
            "topologically_free": self.topologically_free,
            "closed_action": self.closed_action,
            "plain_paradoxes_probe": self.plain_paradoxes_probe.to_json(),
        })
    }
}

#[derive(Clone, Debug)]
pub enum Outcome {
    StablyFinite(StateWitness),
    /// A witness for `2·F₀ ≼ F₀`.
    PurelyInfinite(TransportWitness),
    HypothesesNotMet(Vec<String>),
    Inconclusive { budget: Budget, reasons: Vec<String> },
}

impl Outcome {
    pub fn label(&self) -> &'static str {
        match self {
            Outcome::StablyFinite(_) => "StablyFinite",
            Outcome::PurelyInfinite(_) => "PurelyInfinite",
            Outcome::HypothesesNotMet(_) => "HypothesesNotMet",
            Outcome::Inconclusive { .. } => "Inconclusive",
        }
    }

    pub fn to_json(&self) -> Value {
        match self {
            Outcome::StablyFinite(s) => json!({ "kind": self.label(), "state": s.to_json() }),
            Outcome::PurelyInfinite(w) => json!({ "kind": self.label(), "k": 2, "l": 1, "witness": w.to_json() }),
            Outcome::HypothesesNotMet(r) => json!({ "kind": self.label(), "reasons": r }),
            Outcome::Inconclusive { budget, reasons } => {
                json!({ "kind": self.label(), "budget": budget.to_string(), "reasons": reasons })
            }
        }
    }
}

#[derive(Clone, Debug)]
pub struct Verdict {
    pub budget: Budget,
    pub validation: ValidationReport,
    pub hypotheses: Hypotheses,
    pub outcome: Outcome,
    pub notes: Vec<String>,
}

impl Verdict {
    pub fn to_json(&self, spec: &ModelSpec) -> Value {
        let space = spec.space();
        json!({
            "description": spec.description,
            "space": if space.is_finite() { "finite" } else { "path" },
            "budget": self.budget.to_string(),
            "unit": spec.unit.to_json(),
            "validation": self.validation,
            "hypotheses": self.hypotheses.to_json(),
            "outcome": self.outcome.to_json(),
            "notes": self.notes,
        })
    }

    pub fn summary(&self) -> String {
        let gates: Vec<String> = self
            .hypotheses
            .gates()
            .iter()
            .map(|(n, s)| format!("{n}={s:?}"))
            .collect();
        format!("{} ({})", self.outcome.label(), gates.join(", "))
    }
}

pub fn analyze(spec: &ModelSpec) -> Result<Verdict> {
    let model = &spec.model;
    let budget = model.budget;
    let engine = Engine::new(model);
    let validation = validate_action(&model.semigroup)?;
    let mut samples = default_samples(model, &spec.unit);
    for s in &spec.samples {
        if !samples.contains(s) {
            samples.push(s.clone());
        }
    }
    let hypotheses = Hypotheses {
        minimal: is_minimal(model)?,
        topologically_free: is_topologically_free(model)?,
        closed_action: is_closed_action(model)?,
        plain_paradoxes_probe: plain_paradox_probe(&engine, &samples, budget.nmax as usize)?,
    };
    let mut notes = vec![
        "closed_action stands in for the requirement that the reduced and essential crossed products agree".to_string(),
    ];
    if !model.is_finite() {
        notes.push("path-space states are drawn from graph-harmonic vertex weights".into());
        if !model.semigroup.saturated() {
            notes.push(format!(
                "semigroup enumerated up to word length {}; cylinder-level checks at depth {}",
                budget.len, budget.depth
            ));
        }
    }

    let outcome = if !validation.passed {
        let failed: Vec<String> = validation
            .checks
            .iter()
            .filter(|c| !c.passed)
            .map(|c| format!("action axiom {} fails", c.name))
            .collect();
        Outcome::HypothesesNotMet(failed)
    } else {
        let gates = hypotheses.gates();
        let failed: Vec<String> = gates
            .iter()
            .filter(|(_, s)| *s == Status::No)
            .map(|(n, _)| format!("{n} does not hold"))
            .collect();
        let open: Vec<String> = gates
            .iter()
            .filter(|(_, s)| *s == Status::Unknown)
            .map(|(n, _)| format!("{n} is undetermined within budget"))
            .collect();
        if !failed.is_empty() {
            Outcome::HypothesesNotMet(failed)
        } else if !open.is_empty() {
            Outcome::Inconclusive { budget, reasons: open }
        } else {
            dichotomy(spec, &engine, &mut notes)?
        }
    };
    verify_outcome(spec, &outcome)?;
    Ok(Verdict {
        budget,
        validation,
        hypotheses,
        outcome,
        notes,
    })
}

fn dichotomy(spec: &ModelSpec, engine: &Engine, notes: &mut Vec<String>) -> Result<Outcome> {
    let model = &spec.model;
    let f0 = &spec.unit;
    let nmax = model.budget.nmax as usize;
    // orbit masses are conserved on finite spaces, so no paradox can exist
    let search = !model.is_finite();
    if !search {
        notes.push("finite space: paradox search skipped".into());
    }
    Ok(match tarski_impl(engine, f0, nmax, search)? {
        TarskiOutcome::StateExists(s) => Outcome::StablyFinite(s),
        TarskiOutcome::Paradoxical { n: 1, witness } => Outcome::PurelyInfinite(witness),
        TarskiOutcome::Paradoxical { n, .. } => match is_kl_paradoxical(engine, f0, 2, 1)? {
            Decision::Yes(w) => Outcome::PurelyInfinite(w),
            d => Outcome::Inconclusive {
                budget: model.budget,
                reasons: vec![format!(
                    "F₀ is ({}, {n})-paradoxical but (2, 1) came out {}",
                    n + 1,
                    d.label()
                )],
            },
        },
        TarskiOutcome::Unknown { reason, .. } if !search => {
            return Err(Error::Inconsistency(format!("minimal finite model without a state: {reason}")))
        }
        TarskiOutcome::Unknown { budget, reason } => Outcome::Inconclusive {
            budget,
            reasons: vec![reason],
        },
    })
}

/// Re-check the certificate of the outcome from scratch.
pub fn verify_outcome(spec: &ModelSpec, outcome: &Outcome) -> Result<()> {
    let f0 = &spec.unit;
    match outcome {
        Outcome::StablyFinite(s) => {
            s.verify(&spec.model)?;
            if s.measure(f0) != ExtRational::from_int(1) {
                return Err(Error::Inconsistency("state is not normalised at F₀".into()));
            }
        }
        Outcome::PurelyInfinite(w) => {
            let rep = apply_witness(w, &f0.scale(2), f0)?;
            if !rep.passed {
                return Err(Error::Inconsistency(format!(
                    "(2, 1) witness does not verify: {}",
                    rep.failure.unwrap_or_default()
                )));
            }
            check_names(w, &spec.model)?;
        }
        _ => {}
    }
    Ok(())
}
