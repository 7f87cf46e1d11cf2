//! Acceptance suite. Prints one PASS/FAIL line per criterion and exits
//! nonzero if any fails.

mod common;

use std::time::{Duration, Instant};

use num_bigint::BigInt;
use num_rational::BigRational;
use rand::Rng;

use common::*;
use dyncu::groupoid::{covering_number, CoverOutcome};
use dyncu::lsc::{sup_chain, LscFun};
use dyncu::rank::{quasitrace, quasitrace_closed_form, DiagonalElement, RankVectorCuClass};
use dyncu::states::lift_state_to_functional;
use dyncu::subequiv::{check_names, Certificate};
use dyncu::typesemi::{default_samples, is_kl_paradoxical, tarski_test, TarskiOutcome};
use dyncu::{
    analyze, apply_witness, brute_force_subequiv, find_invariant_state, ActionModel, Budget, Decision, Engine,
    ExtRational, Fin, Inf, ModelSpec, OpenSet, OracleBounds, Outcome, StateOutcome, StateWitness,
};

type Check = Result<String, String>;
type Criterion = (&'static str, Box<dyn FnOnce(&mut Corpus) -> Check>);

fn q(n: i64, d: i64) -> BigRational {
    BigRational::new(BigInt::from(n), BigInt::from(d))
}

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn states_of(model: &ActionModel) -> Vec<StateWitness> {
    let one = LscFun::constant(&model.space, Fin(1));
    let mut out = Vec::new();
    if let Ok(StateOutcome::Found(s)) = find_invariant_state(model, &one) {
        out.push(s);
    }
    out
}

/// Every Yes against every state of the model: `ν(F) ≤ ν(H)`.
fn monotone(d: &Decision, f: &LscFun, h: &LscFun, states: &[StateWitness]) -> Result<usize, String> {
    if !d.is_yes() {
        return Ok(0);
    }
    for s in states {
        ensure(s.measure(f) <= s.measure(h), || format!("ν(F) > ν(H) for a Yes: F={f:?} H={h:?}"))?;
    }
    Ok(states.len())
}

struct Corpus {
    yes_checked: usize,
}

fn oracle_equivalence(corpus: &mut Corpus) -> Check {
    let start = Instant::now();
    let mut r = rng(0x5eed_0001);
    let (mut total, mut yes, mut no) = (0, 0, 0);
    let mut compare = |model: &ActionModel, f: &LscFun, h: &LscFun, bounds: OracleBounds, corpus: &mut Corpus| -> Result<(), String> {
        let engine = Engine::new(model);
        let d = engine.decide(f, h).map_err(|e| e.to_string())?;
        let o = brute_force_subequiv(f, h, model, bounds).map_err(|e| e.to_string())?;
        ensure(!matches!(d, Decision::Unknown { .. }), || format!("engine undecided on F={f:?} H={h:?}"))?;
        ensure(d.is_yes() == o.is_yes(), || {
            format!("disagreement: engine {} vs oracle {} on F={f:?} H={h:?}", d.label(), o.label())
        })?;
        for w in [&d, &o].into_iter().filter_map(|x| match x {
            Decision::Yes(w) => Some(w),
            _ => None,
        }) {
            let rep = apply_witness(w, f, h).map_err(|e| e.to_string())?;
            ensure(rep.passed, || format!("witness fails: {:?}", rep.failure))?;
            check_names(w, model).map_err(|e| e.to_string())?;
        }
        corpus.yes_checked += monotone(&d, f, h, &states_of(model))?;
        total += 1;
        if d.is_yes() {
            yes += 1;
        } else {
            no += 1;
        }
        Ok(())
    };
    let bounds = OracleBounds { depth: 2, len: 2 };
    for _ in 0..100 {
        let m = random_finite_model(&mut r);
        let f = random_fun(&mut r, &m.space, 3, 0.0);
        let h = random_fun(&mut r, &m.space, 3, 0.1);
        compare(&m, &f, &h, bounds, corpus)?;
    }
    let budget: Budget = "depth=2,len=2".parse().unwrap();
    let models = path_models(budget);
    for i in 0..100 {
        let (_, m) = &models[i % models.len()];
        let f = random_path_fun(&mut r, &m.space, 2, 3, 0.0);
        let h = random_path_fun(&mut r, &m.space, 2, 3, 0.1);
        compare(m, &f, &h, bounds, corpus)?;
    }
    let t = start.elapsed();
    ensure(t < Duration::from_secs(60), || format!("took {t:?}"))?;
    Ok(format!("{total} instances, {yes} Yes / {no} negative, 0 disagreements, {t:.2?}"))
}

fn cu_axioms() -> Check {
    let mut r = rng(0x5eed_0002);
    let spaces = [
        dyncu::BaseSpace::finite(["x1", "x2", "x3", "x4"]).unwrap(),
        cuntz2(Budget::default()).space.clone(),
        golden(Budget::default()).space.clone(),
    ];
    let mut n = 0;
    for i in 0..240 {
        let s = &spaces[i % spaces.len()];
        let x = random_fun(&mut r, s, 4, 0.15);
        let y = random_fun(&mut r, s, 4, 0.15);
        // O1: an increasing chain has a least upper bound
        let steps: Vec<LscFun> = (0..4).map(|k| x.truncate(k)).collect();
        let unbounded = x.infinite_set();
        let sup = sup_chain(&steps, &OpenSet::empty(s)).map_err(|e| e.to_string())?;
        ensure(steps.iter().all(|c| c.leq(&sup).unwrap()), || "sup is not an upper bound".into())?;
        let bound = sup.max(&y).unwrap();
        ensure(sup.leq(&bound).unwrap(), || "sup is not least".into())?;
        ensure(sup == x.truncate(3), || "sup of truncations".into())?;
        // O2: x is the supremum of a ≪-increasing sequence
        let top = x.max_value().finite().unwrap_or(0).max(
            x.entries().iter().filter_map(|(_, v)| v.finite()).max().unwrap_or(0),
        );
        let chain: Vec<LscFun> = (0..=top + 1).map(|k| x.truncate(k)).collect();
        for w in chain.windows(2) {
            ensure(w[0].way_below(&w[1]).unwrap(), || "truncations are not ≪-increasing".into())?;
        }
        ensure(sup_chain(&chain, &unbounded).unwrap() == x, || format!("x is not the sup of its truncations: {x:?}"))?;
        // O3: ≪ is compatible with addition
        let (xp, yp) = (x.truncate(r.gen_range(0..3)), y.truncate(r.gen_range(0..3)));
        if xp.way_below(&x).unwrap() && yp.way_below(&y).unwrap() {
            ensure(xp.add(&yp).unwrap().way_below(&x.add(&y).unwrap()).unwrap(), || "O3 fails".into())?;
        }
        // O4: suprema commute with addition
        let cx: Vec<LscFun> = (0..4).map(|k| x.truncate(k)).collect();
        let cy: Vec<LscFun> = (0..4).map(|k| y.truncate(k)).collect();
        let sums: Vec<LscFun> = cx.iter().zip(&cy).map(|(a, b)| a.add(b).unwrap()).collect();
        let lhs = sup_chain(&sums, &x.infinite_set().union(&y.infinite_set()).unwrap()).unwrap();
        let rhs = sup_chain(&cx, &x.infinite_set())
            .unwrap()
            .add(&sup_chain(&cy, &y.infinite_set()).unwrap())
            .unwrap();
        ensure(lhs == rhs, || "O4 fails".into())?;
        // ≪ implies ≤
        for (a, b) in [(&x, &y), (&y, &x), (&xp, &x), (&x, &x)] {
            if a.way_below(b).unwrap() {
                ensure(a.leq(b).unwrap(), || "≪ without ≤".into())?;
            }
        }
        n += 1;
    }
    Ok(format!("{n} instances"))
}

fn retract_identities() -> Check {
    let mut r = rng(0x5eed_0003);
    let mut pairs = 0;
    for i in 0..120 {
        let m = random_finite_model(&mut r);
        let s = &m.space;
        let f = random_fun(&mut r, s, 4, 0.0);
        let a = DiagonalElement::rho(&f).map_err(|e| e.to_string())?;
        ensure(a.sigma() == f, || format!("σ∘ρ ≠ id at instance {i}"))?;
        ensure(RankVectorCuClass::of(&a).rank_vector() == &f, || "rank class".into())?;
        for e in m.semigroup.elements() {
            let dom = e.mover.domain();
            // a random diagonal element supported in dom(s)
            let eigen: Vec<Vec<BigRational>> = (0..s.num_points().unwrap())
                .map(|x| {
                    if dom.contains_cylinder(&s.point(x)) {
                        (0..r.gen_range(0..3)).map(|_| q(r.gen_range(1..9), r.gen_range(1..5))).collect()
                    } else {
                        Vec::new()
                    }
                })
                .collect();
            let a = DiagonalElement::new(s, eigen).unwrap();
            let moved = a.transport(&e.mover).map_err(|x| x.to_string())?;
            let lhs = e.mover.push(&a.sigma()).map_err(|x| x.to_string())?;
            ensure(lhs == moved.sigma(), || format!("strong invariance fails for {}", e.name))?;
            let v = OpenSet::from_points(s, dom.points().into_iter().filter(|_| r.gen_bool(0.5)));
            let img = e.mover.image(&v).unwrap();
            ensure(
                e.mover.push(&LscFun::indicator(&v)).unwrap() == LscFun::indicator(&img),
                || "θ̂(1_V) ≠ 1_{s(V)}".into(),
            )?;
            pairs += 1;
        }
    }
    Ok(format!("120 functions, {pairs} (mover, diagonal) pairs"))
}

fn cuntz_model() -> Check {
    let start = Instant::now();
    let spec = shipped("cuntz2.json");
    let v = analyze(&spec).map_err(|e| e.to_string())?;
    let Outcome::PurelyInfinite(w) = &v.outcome else {
        return Err(format!("outcome {}", v.outcome.label()));
    };
    let one = &spec.unit;
    let rep = apply_witness(w, &one.scale(2), one).unwrap();
    ensure(rep.passed, || format!("witness fails: {:?}", rep.failure))?;
    ensure(w.parts.len() == 2, || format!("expected the two-prepend witness, got {} parts", w.parts.len()))?;
    match find_invariant_state(&spec.model, one).unwrap() {
        StateOutcome::Infeasible(c) => ensure(c.verify(), || "certificate fails".into())?,
        StateOutcome::Found(_) => return Err("found a state".into()),
    }
    let t = start.elapsed();
    ensure(t < Duration::from_secs(5), || format!("took {t:?}"))?;
    Ok(format!("PurelyInfinite, 2-piece witness, Farkas certificate, {t:.2?}"))
}

fn single_cycle() -> Check {
    let start = Instant::now();
    let mut notes = Vec::new();
    for (name, weight) in [("cycle1.json", q(1, 1)), ("cycle3.json", q(1, 3))] {
        let spec = shipped(name);
        let v = analyze(&spec).map_err(|e| e.to_string())?;
        let Outcome::StablyFinite(s) = &v.outcome else {
            return Err(format!("{name}: outcome {}", v.outcome.label()));
        };
        ensure(s.weights.iter().all(|w| *w == weight), || format!("{name}: weights {:?}", s.weights))?;
        let depth2 = spec.space().partition_at(2);
        let total: BigRational = depth2.iter().map(|c| s.cylinder_measure(c)).sum();
        ensure(total == q(1, 1), || format!("{name}: depth-2 cylinders carry {total}"))?;
        let engine = Engine::new(&spec.model);
        match is_kl_paradoxical(&engine, &spec.unit, 2, 1).unwrap() {
            Decision::No(c @ Certificate::State { .. }) => {
                c.verify(&spec.unit.scale(2), &spec.unit, &spec.model).map_err(|e| e.to_string())?
            }
            d => return Err(format!("{name}: (2,1) gave {}", d.label())),
        }
        notes.push(format!("{name} weights {weight}"));
    }
    let t = start.elapsed();
    ensure(t < Duration::from_secs(5), || format!("took {t:?}"))?;
    Ok(format!("{}, (2,1) refuted by the state, {t:.2?}", notes.join("; ")))
}

fn finite_cyclic() -> Check {
    for n in 2..=5 {
        let spec = shipped(&format!("z{n}.json"));
        let v = analyze(&spec).map_err(|e| e.to_string())?;
        let Outcome::StablyFinite(s) = &v.outcome else {
            return Err(format!("Z/{n}: outcome {}", v.outcome.label()));
        };
        ensure(s.weights.iter().all(|w| *w == q(1, n as i64)), || format!("Z/{n}: weights {:?}", s.weights))?;
        let engine = Engine::new(&spec.model);
        ensure(
            matches!(tarski_test(&engine, &spec.unit, 8).unwrap(), TarskiOutcome::StateExists(_)),
            || format!("Z/{n}: tarski"),
        )?;
        let x1 = LscFun::indicator(&OpenSet::from_points(spec.space(), [0]));
        match covering_number(&spec.unit, &x1, &spec.model).unwrap() {
            CoverOutcome::Found(c) => {
                ensure(c.m == n, || format!("Z/{n}: covering number {}", c.m))?;
                c.verify(&spec.unit, &x1).map_err(|e| e.to_string())?;
            }
            CoverOutcome::Unknown { .. } => return Err(format!("Z/{n}: no cover")),
        }
    }
    Ok("n = 2..5: uniform 1/n, StateExists, covering number n".into())
}

fn tarski_consistency(corpus: &mut Corpus) -> Check {
    let mut r = rng(0x5eed_0007);
    let mut cases: Vec<(ActionModel, Vec<LscFun>)> = Vec::new();
    for name in shipped_names() {
        let spec = shipped(&name);
        let mut samples = default_samples(&spec.model, &spec.unit);
        samples.extend(spec.samples.iter().cloned());
        cases.push((spec.model, samples));
    }
    let budget: Budget = "depth=2,len=2,nmax=4".parse().unwrap();
    for (_, m) in path_models(budget) {
        let samples = (0..4)
            .map(|_| random_path_fun(&mut r, &m.space, 2, 2, 0.0))
            .filter(|f| !f.is_zero())
            .collect();
        cases.push((m, samples));
    }
    for _ in 0..20 {
        let m = random_finite_model(&mut r);
        let samples = (0..3)
            .map(|_| random_fun(&mut r, &m.space, 3, 0.0))
            .filter(|f| !f.is_zero())
            .collect();
        cases.push((m, samples));
    }
    let mut tested = 0;
    for (m, samples) in &cases {
        let engine = Engine::new(m);
        let nmax = (m.budget.nmax as usize).min(4);
        for f in samples {
            let state = match find_invariant_state(m, f).unwrap() {
                StateOutcome::Found(s) => {
                    s.verify(m).map_err(|e| e.to_string())?;
                    Some(s)
                }
                StateOutcome::Infeasible(_) => None,
            };
            for n in 1..=nmax as u64 {
                let d = is_kl_paradoxical(&engine, f, n + 1, n).unwrap();
                if let Decision::Yes(w) = &d {
                    ensure(apply_witness(w, &f.scale(n + 1), &f.scale(n)).unwrap().passed, || "paradox witness".into())?;
                    ensure(state.is_none(), || format!("state and ({}, {n}) paradox for {f:?}", n + 1))?;
                }
                corpus.yes_checked += monotone(&d, &f.scale(n + 1), &f.scale(n), &states_of(m))?;
            }
            tarski_test(&engine, f, nmax).map_err(|e| e.to_string())?;
            tested += 1;
        }
    }
    Ok(format!("{tested} (F, model) pairs, 0 violations"))
}

fn monotonicity(corpus: &mut Corpus) -> Check {
    // additional Yes decisions on the shipped models with random pairs
    let mut r = rng(0x5eed_0008);
    for name in shipped_names() {
        let spec = shipped(&name);
        let m = spec.model.with_budget("depth=2,len=2".parse().unwrap()).unwrap();
        let states = states_of(&m);
        let engine = Engine::new(&m);
        for _ in 0..10 {
            let f = random_fun(&mut r, &m.space, 3, 0.0);
            let h = random_fun(&mut r, &m.space, 3, 0.0);
            let d = engine.decide(&f, &h).map_err(|e| e.to_string())?;
            corpus.yes_checked += monotone(&d, &f, &h, &states)?;
        }
    }
    ensure(corpus.yes_checked > 0, || "no (Yes, state) pairs were checked".into())?;
    Ok(format!("{} (Yes, state) pairs, 0 violations", corpus.yes_checked))
}

fn quasitrace_integral() -> Check {
    let mut r = rng(0x5eed_0009);
    let s = dyncu::BaseSpace::finite(["x1", "x2", "x3", "x4"]).unwrap();
    for _ in 0..60 {
        let eigen: Vec<Vec<BigRational>> = (0..4)
            .map(|_| (0..r.gen_range(0..4)).map(|_| q(r.gen_range(1..20), r.gen_range(1..6))).collect())
            .collect();
        let a = DiagonalElement::new(&s, eigen).unwrap();
        let w: Vec<BigRational> = (0..4).map(|_| q(r.gen_range(0..7), r.gen_range(1..4))).collect();
        ensure(quasitrace(&a, &w) == quasitrace_closed_form(&a, &w), || format!("{a:?}"))?;
        let u = OpenSet::from_points(&s, (0..4).filter(|_| r.gen_bool(0.5)));
        let p = DiagonalElement::rho(&LscFun::indicator(&u)).unwrap();
        let beta: BigRational = u.points().iter().map(|&x| w[x].clone()).sum();
        ensure(quasitrace(&p, &w) == beta, || "τ(1_U) ≠ β(1_U)".into())?;
    }
    for n in 2..=5 {
        let m = zn(n);
        let StateOutcome::Found(st) = find_invariant_state(&m, &LscFun::constant(&m.space, Fin(1))).unwrap() else {
            return Err("no state on Z/n".into());
        };
        let beta = lift_state_to_functional(&st);
        let u = OpenSet::from_points(&m.space, 0..n / 2 + 1);
        let p = DiagonalElement::rho(&LscFun::indicator(&u)).unwrap();
        ensure(
            ExtRational::Fin(quasitrace(&p, &st.weights)) == beta.eval(&LscFun::indicator(&u)),
            || format!("Z/{n}: τ(1_U) ≠ β(1_U)"),
        )?;
        ensure(!beta.eval(&LscFun::constant(&m.space, Inf)).is_finite(), || "β(∞) finite".into())?;
    }
    Ok("60 random diagonal elements plus lifted Z/n states".into())
}

fn determinism() -> Check {
    let names = shipped_names();
    for name in &names {
        let text = std::fs::read_to_string(models_dir().join(name)).unwrap();
        let mut reports = Vec::new();
        for _ in 0..2 {
            let spec = ModelSpec::parse(&text, Budget::default()).map_err(|e| e.to_string())?;
            let v = analyze(&spec).map_err(|e| e.to_string())?;
            reports.push(serde_json::to_string_pretty(&v.to_json(&spec)).unwrap());
        }
        ensure(reports[0] == reports[1], || format!("{name}: reports differ"))?;
    }
    Ok(format!("{} shipped models", names.len()))
}

fn main() {
    let mut corpus = Corpus { yes_checked: 0 };
    let criteria: Vec<Criterion> = vec![
        ("oracle equivalence", Box::new(oracle_equivalence)),
        ("Cu axioms O1-O4", Box::new(|_| cu_axioms())),
        ("retract identities", Box::new(|_| retract_identities())),
        ("two-letter shift is purely infinite", Box::new(|_| cuntz_model())),
        ("single cycle is stably finite", Box::new(|_| single_cycle())),
        ("finite cyclic groups", Box::new(|_| finite_cyclic())),
        ("Tarski consistency", Box::new(tarski_consistency)),
        ("monotonicity transfer", Box::new(monotonicity)),
        ("quasitrace integral", Box::new(|_| quasitrace_integral())),
        ("determinism", Box::new(|_| determinism())),
    ];
    let mut failed = 0;
    for (i, (name, check)) in criteria.into_iter().enumerate() {
        let res = std::panic::catch_unwind(std::panic::AssertUnwindSafe(|| check(&mut corpus)))
            .unwrap_or_else(|_| Err("panicked".into()));
        match res {
            Ok(detail) => println!("criterion {:>2} PASS  {name}: {detail}", i + 1),
            Err(why) => {
                failed += 1;
                println!("criterion {:>2} FAIL  {name}: {why}", i + 1);
            }
        }
    }
    if failed > 0 {
        std::process::exit(1);
    }
}
