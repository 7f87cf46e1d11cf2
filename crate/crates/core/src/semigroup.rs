//! The inverse semigroup generated by a list of movers.
//!
//! Elements are enumerated breadth-first by word length in the generators
//! and their inverses. An element's name records one shortest word for it:
//! `a.b` is `a ∘ b`, `g*` is the inverse of `g`, `1` the unit and `0` the
//! empty map.

use std::collections::HashMap;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::lsc::LscFun;
use crate::mover::Mover;
use crate::space::{OpenSet, SpaceRef};

#[derive(Clone, Debug)]
pub struct Element {
    pub name: String,
    pub mover: Mover,
    pub length: usize,
}

#[derive(Clone, Debug)]
pub struct InverseSemigroup {
    space: SpaceRef,
    letters: Vec<Element>,
    named: HashMap<String, Mover>,
    elements: Vec<Element>,
    index: HashMap<Mover, usize>,
    saturated: bool,
    max_len: Option<usize>,
}

/// Safety cap on the number of enumerated elements.
pub const ELEMENT_CAP: usize = 50_000;

impl InverseSemigroup {
    /// Close `generators` under composition and inverses, with words of
    /// length at most `max_len` (unbounded when `None`).
    pub fn closure(space: &SpaceRef, generators: &[(String, Mover)], max_len: Option<usize>) -> Result<Self> {
        let mut letters: Vec<Element> = Vec::new();
        let mut named = HashMap::new();
        for (name, m) in generators {
            if name.is_empty() || name.contains(['.', '*']) || name == "0" || name == "1" {
                return Err(Error::Model(format!("invalid generator name {name:?}")));
            }
            if named.contains_key(name) {
                return Err(Error::Model(format!("duplicate generator name {name:?}")));
            }
            crate::space::same_space(space, m.space())?;
            named.insert(name.clone(), m.clone());
            letters.push(Element {
                name: name.clone(),
                mover: m.clone(),
                length: 1,
            });
            let inv = m.inverse();
            if inv != *m {
                letters.push(Element {
                    name: format!("{name}*"),
                    mover: inv,
                    length: 1,
                });
            }
        }
        let mut sg = InverseSemigroup {
            space: space.clone(),
            letters,
            named,
            elements: Vec::new(),
            index: HashMap::new(),
            saturated: false,
            max_len,
        };
        sg.insert("1".into(), Mover::identity(space), 0);
        let mut frontier = vec![0usize];
        let mut len = 0;
        loop {
            if max_len.is_some_and(|k| len >= k) || frontier.is_empty() {
                break;
            }
            len += 1;
            let mut next = Vec::new();
            for &e in &frontier {
                for li in 0..sg.letters.len() {
                    let (lname, lm) = (sg.letters[li].name.clone(), sg.letters[li].mover.clone());
                    let m = lm.compose(&sg.elements[e].mover)?;
                    if sg.index.contains_key(&m) {
                        continue;
                    }
                    let name = if m.is_zero() {
                        "0".to_string()
                    } else if sg.elements[e].name == "1" {
                        lname
                    } else {
                        format!("{lname}.{}", sg.elements[e].name)
                    };
                    next.push(sg.insert(name, m, len));
                    if sg.elements.len() >= ELEMENT_CAP {
                        return Ok(sg);
                    }
                }
            }
            frontier = next;
        }
        sg.saturated = frontier.is_empty();
        Ok(sg)
    }

    fn insert(&mut self, name: String, mover: Mover, length: usize) -> usize {
        let i = self.elements.len();
        self.index.insert(mover.clone(), i);
        self.elements.push(Element { name, mover, length });
        i
    }

    pub fn space(&self) -> &SpaceRef {
        &self.space
    }

    pub fn elements(&self) -> &[Element] {
        &self.elements
    }

    /// Generators followed by their inverses, as used by the enumeration.
    pub fn letters(&self) -> &[Element] {
        &self.letters
    }

    pub fn saturated(&self) -> bool {
        self.saturated
    }

    pub fn max_len(&self) -> Option<usize> {
        self.max_len
    }

    pub fn unit(&self) -> &Element {
        &self.elements[0]
    }

    pub fn find(&self, m: &Mover) -> Option<&Element> {
        self.index.get(m).map(|&i| &self.elements[i])
    }

    pub fn by_name(&self, name: &str) -> Option<&Element> {
        self.elements.iter().find(|e| e.name == name)
    }

    pub fn idempotents(&self) -> impl Iterator<Item = &Element> {
        self.elements.iter().filter(|e| e.mover.is_idempotent())
    }

    /// Recompute a mover from its name by multiplying generators.
    pub fn evaluate_name(&self, name: &str) -> Result<Mover> {
        let mut acc = Mover::identity(&self.space);
        for tok in name.split('.') {
            let m = match tok {
                "1" => Mover::identity(&self.space),
                "0" => Mover::zero(&self.space),
                t => {
                    let (base, inv) = match t.strip_suffix('*') {
                        Some(b) => (b, true),
                        None => (t, false),
                    };
                    let g = self
                        .named
                        .get(base)
                        .ok_or_else(|| Error::Model(format!("unknown generator {base:?} in {name:?}")))?;
                    if inv {
                        g.inverse()
                    } else {
                        g.clone()
                    }
                }
            };
            acc = acc.compose(&m)?;
        }
        Ok(acc)
    }

    /// `O_{s,1}`: union of the domains of idempotents `e ≤ s` in the semigroup.
    pub fn ideal_support(&self, s: &Mover) -> Result<OpenSet> {
        let mut acc = OpenSet::empty(&self.space);
        for e in self.idempotents() {
            if e.mover.natural_leq(s)? {
                acc = acc.union(&e.mover.domain())?;
            }
        }
        Ok(acc)
    }
}

#[derive(Clone, Debug, Serialize, PartialEq, Eq)]
pub struct Check {
    pub name: String,
    pub passed: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub counterexample: Option<String>,
}

#[derive(Clone, Debug, Serialize, PartialEq, Eq)]
pub struct ValidationReport {
    pub passed: bool,
    pub checks: Vec<Check>,
}

impl ValidationReport {
    pub fn failure(name: &str, counterexample: String) -> Self {
        ValidationReport {
            passed: false,
            checks: vec![Check {
                name: name.into(),
                passed: false,
                counterexample: Some(counterexample),
            }],
        }
    }
}

/// How many elements enter the pairwise and triple-wise checks.
const SAMPLE: usize = 24;
/// Depth of the cylinders on which pointwise identities are sampled.
const SAMPLE_DEPTH: usize = 3;

/// Check the inverse-semigroup action axioms on the enumerated elements.
pub fn validate_action(sg: &InverseSemigroup) -> Result<ValidationReport> {
    let els = sg.elements();
    let sample = &els[..els.len().min(SAMPLE)];
    let mut checks = Vec::new();
    let mut record = |name: &str, cx: Option<String>| {
        checks.push(Check {
            name: name.into(),
            passed: cx.is_none(),
            counterexample: cx,
        })
    };

    let mut cx = None;
    for e in els {
        let s = &e.mover;
        let si = s.inverse();
        if s.compose(&si)?.compose(s)? != *s || si.compose(s)?.compose(&si)? != si {
            cx = Some(format!("inverse law fails for {}", e.name));
            break;
        }
    }
    record("inverse_law", cx);

    let mut cx = None;
    'outer: for a in sample {
        for b in sample {
            let lhs = a.mover.compose(&b.mover)?.inverse();
            let rhs = b.mover.inverse().compose(&a.mover.inverse())?;
            if lhs != rhs {
                cx = Some(format!("({}.{})* differs from {}*.{}*", a.name, b.name, b.name, a.name));
                break 'outer;
            }
        }
    }
    record("inverse_antihomomorphism", cx);

    let mut cx = None;
    'outer: for a in sample {
        for b in sample {
            let ab = a.mover.compose(&b.mover)?;
            for c in sample.iter().take(SAMPLE / 2) {
                if ab.compose(&c.mover)? != a.mover.compose(&b.mover.compose(&c.mover)?)? {
                    cx = Some(format!("associativity fails on ({}, {}, {})", a.name, b.name, c.name));
                    break 'outer;
                }
            }
        }
    }
    record("associativity", cx);

    let mut cx = None;
    for e in els {
        if sg.evaluate_name(&e.name)? != e.mover {
            cx = Some(format!("element {} does not equal the product of its letters", e.name));
            break;
        }
    }
    record("homomorphism", cx);

    let idem: Vec<_> = sg.idempotents().take(SAMPLE).collect();
    let mut cx = None;
    'outer: for e in &idem {
        for f in &idem {
            if e.mover.compose(&f.mover)? != f.mover.compose(&e.mover)? {
                cx = Some(format!("idempotents {} and {} do not commute", e.name, f.name));
                break 'outer;
            }
        }
    }
    record("idempotents_commute", cx);

    let mut cx = None;
    'outer: for s in sample {
        for t in sample {
            if s.mover.natural_leq(&t.mover)?
                && (!s.mover.domain().is_subset(&t.mover.domain())?
                    || !s.mover.range().is_subset(&t.mover.range())?)
            {
                cx = Some(format!("{} ≤ {} but the domains are not nested", s.name, t.name));
                break 'outer;
            }
        }
    }
    record("domain_monotone", cx);

    let mut cover = OpenSet::empty(sg.space());
    for e in els {
        cover = cover.union(&e.mover.domain())?;
    }
    record(
        "density",
        (!cover.is_full()).then(|| "domains do not cover the space".to_string()),
    );

    let mut cx = None;
    let cells = sg.space().nodes_up_to(SAMPLE_DEPTH);
    'outer: for e in els.iter().take(4 * SAMPLE) {
        let s = &e.mover;
        let dom = s.domain();
        for w in &cells {
            if !dom.contains_cylinder(w) {
                continue;
            }
            let one = LscFun::indicator(&OpenSet::cylinder(sg.space(), w.clone()));
            let img = s.push(&one)?;
            if s.inverse().push(&img)? != one {
                cx = Some(format!(
                    "{} does not invert on cylinder {:?}",
                    e.name,
                    sg.space().render(w)
                ));
                break 'outer;
            }
            if s.is_idempotent() && img != one {
                cx = Some(format!("idempotent {} moves {:?}", e.name, sg.space().render(w)));
                break 'outer;
            }
        }
    }
    record("pointwise", cx);

    let passed = checks.iter().all(|c| c.passed);
    Ok(ValidationReport { passed, checks })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::space::BaseSpace;

    #[test]
    fn cyclic_group_closure() {
        let s = BaseSpace::finite(["x1", "x2", "x3"]).unwrap();
        let r = Mover::from_point_map(&s, &[(0, 1), (1, 2), (2, 0)]).unwrap();
        let sg = InverseSemigroup::closure(&s, &[("r".into(), r)], None).unwrap();
        assert!(sg.saturated());
        assert_eq!(sg.elements().len(), 3);
        assert!(validate_action(&sg).unwrap().passed);
    }

    #[test]
    fn empty_generators_give_unit() {
        let s = BaseSpace::finite(["x1"]).unwrap();
        let sg = InverseSemigroup::closure(&s, &[], None).unwrap();
        assert_eq!(sg.elements().len(), 1);
        assert_eq!(sg.unit().name, "1");
    }

    #[test]
    fn cuntz_closure_contains_exchanges() {
        let s = BaseSpace::path(["v"], [('0', 0, 0), ('1', 0, 0)]).unwrap();
        let w = |t: &str| s.parse_word(t).unwrap();
        let gens = vec![
            ("a".to_string(), Mover::prefix_exchange(&s, w(""), w("0")).unwrap()),
            ("b".to_string(), Mover::prefix_exchange(&s, w(""), w("1")).unwrap()),
        ];
        let sg = InverseSemigroup::closure(&s, &gens, Some(2)).unwrap();
        let e01 = Mover::prefix_exchange(&s, w("0"), w("1")).unwrap();
        let e00 = Mover::prefix_exchange(&s, w("00"), w("")).unwrap();
        assert!(sg.find(&e01).is_some());
        assert!(sg.find(&e00).is_some());
        assert!(!sg.saturated());
        let el = sg.find(&e01).unwrap();
        assert_eq!(sg.evaluate_name(&el.name).unwrap(), e01);
        assert!(validate_action(&sg).unwrap().passed);
    }

    #[test]
    fn swap_has_empty_ideal_support() {
        let s = BaseSpace::finite(["x1", "x2"]).unwrap();
        let t = Mover::from_point_map(&s, &[(0, 1), (1, 0)]).unwrap();
        let sg = InverseSemigroup::closure(&s, &[("t".into(), t.clone())], None).unwrap();
        assert!(sg.ideal_support(&t).unwrap().is_empty());
        assert!(sg.ideal_support(&Mover::identity(&s)).unwrap().is_full());
    }
}
