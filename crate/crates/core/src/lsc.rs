//! `Lsc(X, N̄)`: lower-semicontinuous functions with values in `N ∪ {∞}`.
//!
//! On the zero-dimensional spaces of this crate such a function with finite
//! support description is a step function over a finite clopen partition, so
//! it is stored as a canonical antichain of `(word, value)` pairs with all
//! values positive.

use std::fmt;

use serde_json::{json, Value};

use crate::error::{Error, Result};
use crate::extnat::{ExtNat, Fin, Inf};
use crate::space::{canonicalize, covering_index, same_space, OpenSet, SpaceRef, Word};

#[derive(Clone)]
pub struct LscFun {
    space: SpaceRef,
    entries: Vec<(Word, ExtNat)>,
}

impl PartialEq for LscFun {
    fn eq(&self, other: &Self) -> bool {
        self.entries == other.entries
    }
}

impl Eq for LscFun {}

impl std::hash::Hash for LscFun {
    fn hash<H: std::hash::Hasher>(&self, state: &mut H) {
        self.entries.hash(state);
    }
}

impl fmt::Debug for LscFun {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.space.is_finite() {
            f.debug_list().entries(self.values()).finish()
        } else {
            f.debug_map()
                .entries(self.entries.iter().map(|(w, v)| (self.space.render(w), v)))
                .finish()
        }
    }
}

/// `F = Σ_i 1_{U_i}` with decreasing `U_i`, plus the set where `F = ∞`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct NormalForm {
    pub levels: Vec<OpenSet>,
    pub infinite_tail: OpenSet,
}

impl LscFun {
    pub fn zero(space: &SpaceRef) -> LscFun {
        LscFun {
            space: space.clone(),
            entries: Vec::new(),
        }
    }

    pub fn constant(space: &SpaceRef, v: ExtNat) -> LscFun {
        LscFun::from_entries(space, vec![(Word::root(), v)])
    }

    pub fn indicator(set: &OpenSet) -> LscFun {
        LscFun::from_entries(
            set.space(),
            set.words().iter().map(|w| (w.clone(), Fin(1))).collect(),
        )
    }

    /// Values indexed by the points of a finite space.
    pub fn from_values(space: &SpaceRef, values: &[ExtNat]) -> Result<LscFun> {
        let n = space
            .num_points()
            .ok_or_else(|| Error::Model("value vectors need a finite space".into()))?;
        if values.len() != n {
            return Err(Error::Model(format!(
                "expected {n} values, got {}",
                values.len()
            )));
        }
        Ok(LscFun::from_entries(
            space,
            values
                .iter()
                .enumerate()
                .map(|(x, v)| (space.point(x), *v))
                .collect(),
        ))
    }

    /// `Σ v · 1_{Z(w)}` over the given pairs; overlapping words add up.
    pub fn from_cylinders(space: &SpaceRef, pairs: Vec<(Word, ExtNat)>) -> Result<LscFun> {
        for (w, _) in &pairs {
            if !space.is_valid_word(w) {
                return Err(Error::Model(format!("invalid word {:?}", w.0)));
            }
        }
        let mut acc = LscFun::zero(space);
        for (w, v) in pairs {
            acc = acc.add(&LscFun::from_entries(space, vec![(w, v)]))?;
        }
        Ok(acc)
    }

    /// Entries must form an antichain of valid words.
    pub(crate) fn from_entries(space: &SpaceRef, entries: Vec<(Word, ExtNat)>) -> LscFun {
        let mut entries: Vec<(Word, ExtNat)> = entries.into_iter().filter(|(_, v)| !v.is_zero()).collect();
        entries.sort();
        LscFun {
            space: space.clone(),
            entries: canonicalize(space, entries),
        }
    }

    pub fn space(&self) -> &SpaceRef {
        &self.space
    }

    pub fn entries(&self) -> &[(Word, ExtNat)] {
        &self.entries
    }

    pub fn is_zero(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn is_finite_valued(&self) -> bool {
        self.entries.iter().all(|(_, v)| v.is_finite())
    }

    pub fn max_value(&self) -> ExtNat {
        self.entries.iter().map(|(_, v)| *v).max().unwrap_or(Fin(0))
    }

    pub fn max_depth(&self) -> usize {
        self.entries.iter().map(|(w, _)| w.len()).max().unwrap_or(0)
    }

    /// Value on `Z(cell)`, which must lie inside one piece of the
    /// function's partition (or outside its support).
    pub fn value_on(&self, cell: &Word) -> ExtNat {
        covering_index(&self.entries, cell)
            .map(|i| self.entries[i].1)
            .unwrap_or(Fin(0))
    }

    /// Value at point `x` of a finite space.
    pub fn at(&self, x: usize) -> ExtNat {
        self.value_on(&self.space.point(x))
    }

    pub fn values(&self) -> Vec<ExtNat> {
        (0..self.space.num_points().unwrap_or(0)).map(|x| self.at(x)).collect()
    }

    pub fn support(&self) -> OpenSet {
        OpenSet::from_words(&self.space, self.entries.iter().map(|(w, _)| w.clone()))
    }

    /// `{F ≥ k}` for finite `k ≥ 1`.
    pub fn level_set(&self, k: u64) -> OpenSet {
        OpenSet::from_words(
            &self.space,
            self.entries
                .iter()
                .filter(|(_, v)| *v >= Fin(k))
                .map(|(w, _)| w.clone()),
        )
    }

    pub fn infinite_set(&self) -> OpenSet {
        OpenSet::from_words(
            &self.space,
            self.entries
                .iter()
                .filter(|(_, v)| *v == Inf)
                .map(|(w, _)| w.clone()),
        )
    }

    pub(crate) fn combine(&self, other: &LscFun, op: impl Fn(ExtNat, ExtNat) -> ExtNat) -> Result<LscFun> {
        same_space(&self.space, &other.space)?;
        let cells = self.space.common_cells(
            self.entries
                .iter()
                .map(|(w, _)| w)
                .chain(other.entries.iter().map(|(w, _)| w)),
        );
        let entries = cells
            .into_iter()
            .map(|c| {
                let v = op(self.value_on(&c), other.value_on(&c));
                (c, v)
            })
            .collect();
        Ok(LscFun::from_entries(&self.space, entries))
    }

    pub fn add(&self, other: &LscFun) -> Result<LscFun> {
        self.combine(other, |a, b| a + b)
    }

    pub fn max(&self, other: &LscFun) -> Result<LscFun> {
        self.combine(other, Ord::max)
    }

    pub fn min(&self, other: &LscFun) -> Result<LscFun> {
        self.combine(other, Ord::min)
    }

    /// Truncated difference `max(F - H, 0)`.
    pub fn saturating_sub(&self, other: &LscFun) -> Result<LscFun> {
        self.combine(other, ExtNat::saturating_sub)
    }

    pub fn scale(&self, k: u64) -> LscFun {
        LscFun::from_entries(
            &self.space,
            self.entries.iter().map(|(w, v)| (w.clone(), v.scale(k))).collect(),
        )
    }

    /// Pointwise `min(F, n)`.
    pub fn truncate(&self, n: u64) -> LscFun {
        LscFun::from_entries(
            &self.space,
            self.entries.iter().map(|(w, v)| (w.clone(), (*v).min(Fin(n)))).collect(),
        )
    }

    /// `F` restricted to the open set `U` (zero outside).
    pub fn restrict(&self, set: &OpenSet) -> Result<LscFun> {
        self.min(&LscFun::indicator(set).scale_inf())
    }

    fn scale_inf(&self) -> LscFun {
        LscFun::from_entries(
            &self.space,
            self.entries.iter().map(|(w, _)| (w.clone(), Inf)).collect(),
        )
    }

    pub fn leq(&self, other: &LscFun) -> Result<bool> {
        same_space(&self.space, &other.space)?;
        let cells = self.space.common_cells(
            self.entries
                .iter()
                .map(|(w, _)| w)
                .chain(other.entries.iter().map(|(w, _)| w)),
        );
        Ok(cells.iter().all(|c| self.value_on(c) <= other.value_on(c)))
    }

    /// A cylinder on which `F > H`, if there is one.
    pub fn first_excess(&self, other: &LscFun) -> Result<Option<Word>> {
        same_space(&self.space, &other.space)?;
        let cells = self.space.common_cells(
            self.entries
                .iter()
                .map(|(w, _)| w)
                .chain(other.entries.iter().map(|(w, _)| w)),
        );
        Ok(cells.into_iter().find(|c| self.value_on(c) > other.value_on(c)))
    }

    /// `F ≪ H`: on these compact zero-dimensional spaces, `F` finite-valued and `F ≤ H`.
    pub fn way_below(&self, other: &LscFun) -> Result<bool> {
        Ok(self.is_finite_valued() && self.leq(other)?)
    }

    pub fn normal_form(&self) -> NormalForm {
        let top = self
            .entries
            .iter()
            .filter_map(|(_, v)| v.finite())
            .max()
            .unwrap_or(0);
        let levels = (1..=top).map(|k| self.level_set(k)).collect();
        NormalForm {
            levels,
            infinite_tail: self.infinite_set(),
        }
    }

    pub fn from_normal_form(space: &SpaceRef, nf: &NormalForm) -> Result<LscFun> {
        let mut acc = LscFun::zero(space);
        for u in &nf.levels {
            acc = acc.add(&LscFun::indicator(u))?;
        }
        acc.max(&LscFun::indicator(&nf.infinite_tail).scale_inf())
    }

    pub fn to_json(&self) -> Value {
        if self.space.is_finite() {
            json!({ "values": self.values() })
        } else {
            let cyl: Vec<Value> = self
                .entries
                .iter()
                .map(|(w, v)| json!({ "word": self.space.render(w), "value": v }))
                .collect();
            json!({ "cylinders": cyl })
        }
    }

    /// Parse `[v, …]`, `{"values": […]}` or `{"cylinders": [{"word", "value"}, …]}`.
    pub fn from_json(space: &SpaceRef, v: &Value, path: &str) -> Result<LscFun> {
        let parse_ext = |v: &Value, p: &str| -> Result<ExtNat> {
            serde_json::from_value(v.clone()).map_err(|e| Error::schema(p, e.to_string()))
        };
        if v.is_u64() || v.as_str() == Some("inf") {
            return Ok(LscFun::constant(space, parse_ext(v, path)?));
        }
        let values = match v {
            Value::Array(a) => Some(a),
            Value::Object(o) => match (o.get("values"), o.get("cylinders")) {
                (Some(Value::Array(a)), None) => Some(a),
                (None, Some(Value::Array(cyl))) => {
                    let mut pairs = Vec::new();
                    for (i, c) in cyl.iter().enumerate() {
                        let p = format!("{path}.cylinders[{i}]");
                        let word = c
                            .get("word")
                            .and_then(Value::as_str)
                            .ok_or_else(|| Error::schema(&p, "missing string field \"word\""))?;
                        let value = c
                            .get("value")
                            .ok_or_else(|| Error::schema(&p, "missing field \"value\""))?;
                        let w = space
                            .parse_word(word)
                            .map_err(|e| Error::schema(format!("{p}.word"), e.to_string()))?;
                        pairs.push((w, parse_ext(value, &format!("{p}.value"))?));
                    }
                    return LscFun::from_cylinders(space, pairs);
                }
                _ => None,
            },
            _ => None,
        };
        let Some(values) = values else {
            return Err(Error::schema(
                path,
                "expected an array of values, {\"values\": [...]} or {\"cylinders\": [...]}",
            ));
        };
        if space.num_points().is_none() {
            return Err(Error::schema(path, "value lists need a finite space; use \"cylinders\""));
        }
        let vals = values
            .iter()
            .enumerate()
            .map(|(i, x)| parse_ext(x, &format!("{path}[{i}]")))
            .collect::<Result<Vec<_>>>()?;
        LscFun::from_values(space, &vals).map_err(|e| Error::schema(path, e.to_string()))
    }
}

/// Supremum of an increasing finite chain whose values on `unbounded` are
/// declared to grow without bound.
pub fn sup_chain(chain: &[LscFun], unbounded: &OpenSet) -> Result<LscFun> {
    let Some(last) = chain.last() else {
        return Err(Error::Contract("empty chain".into()));
    };
    for (i, pair) in chain.windows(2).enumerate() {
        if !pair[0].leq(&pair[1])? {
            return Err(Error::Contract(format!(
                "chain is not increasing between positions {i} and {}",
                i + 1
            )));
        }
    }
    last.max(&LscFun::indicator(unbounded).scale_inf())
}

/// Split the `x_i` along the `y_j`: returns `u[i][j]` with
/// `f_i ≪ Σ_j u_ij ≪ x_i` and `Σ_i u_ij ≤ y_j`.
///
/// `Σ x ≤ Σ y` is only required where some `f_i` is nonzero; elsewhere every
/// `u_ij` is zero anyway.
pub fn almost_refinement(f: &[LscFun], x: &[LscFun], y: &[LscFun]) -> Result<Vec<Vec<LscFun>>> {
    if f.len() != x.len() {
        return Err(Error::Contract(format!(
            "{} approximants for {} elements",
            f.len(),
            x.len()
        )));
    }
    let Some(space) = f.first().or(y.first()).map(|g| g.space().clone()) else {
        return Ok(Vec::new());
    };
    for (i, (fi, xi)) in f.iter().zip(x).enumerate() {
        if !fi.way_below(xi)? {
            return Err(Error::Contract(format!("f[{i}] is not way-below x[{i}]")));
        }
    }
    for g in y {
        same_space(&space, g.space())?;
    }
    let cells = space.common_cells(
        f.iter()
            .chain(x)
            .chain(y)
            .flat_map(|g| g.entries().iter().map(|(w, _)| w)),
    );
    let mut out: Vec<Vec<Vec<(Word, ExtNat)>>> = vec![vec![Vec::new(); y.len()]; f.len()];
    for c in &cells {
        if f.iter().all(|fi| fi.value_on(c).is_zero()) {
            continue;
        }
        let sx: ExtNat = x.iter().map(|g| g.value_on(c)).sum();
        let sy: ExtNat = y.iter().map(|g| g.value_on(c)).sum();
        if sx > sy {
            return Err(Error::Contract(format!(
                "sum of x exceeds sum of y on cylinder {:?}",
                space.render(c)
            )));
        }
        let mut cap: Vec<ExtNat> = y.iter().map(|g| g.value_on(c)).collect();
        for (i, fi) in f.iter().enumerate() {
            let mut need = fi.value_on(c).finite().expect("f is finite-valued");
            for (j, cj) in cap.iter_mut().enumerate() {
                if need == 0 {
                    break;
                }
                let take = cj.min_fin(need);
                if take > 0 {
                    *cj = cj.saturating_sub(Fin(take));
                    need -= take;
                    out[i][j].push((c.clone(), Fin(take)));
                }
            }
            if need > 0 {
                return Err(Error::Contract(format!(
                    "capacity of y exhausted at index {i} on cylinder {:?}",
                    space.render(c)
                )));
            }
        }
    }
    Ok(out
        .into_iter()
        .map(|row| {
            row.into_iter()
                .map(|e| LscFun::from_entries(&space, e))
                .collect()
        })
        .collect())
}
