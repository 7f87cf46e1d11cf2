//! The model file format.
//!
//! ```json
//! {
//!   "schema": 1,
//!   "space": { "type": "finite", "points": ["x1", "x2", "x3"] },
//!   "generators": [
//!     { "name": "r", "type": "partial_bijection", "map": { "x1": "x2", "x2": "x3", "x3": "x1" } }
//!   ]
//! }
//! ```
//!
//! Path spaces are given as `{"type": "path", "vertices": [...], "edges":
//! [{"label": "0", "source": "v", "target": "v"}]}` and their generators as
//! `{"name": "a", "type": "prefix_exchange", "from": "", "to": "0"}` or with a
//! `"pieces": [{"from", "to"}]` list. Optional top-level keys: `description`,
//! `phase_modulus`, `budgets` (`{"depth": 2, ...}`), `unit` and `samples`
//! (functions in the `LscFun` JSON forms).

use std::collections::BTreeMap;

use serde::Deserialize;
use serde_json::Value;

use crate::action::ActionModel;
use crate::budget::Budget;
use crate::error::{Error, Result};
use crate::extnat::Fin;
use crate::lsc::LscFun;
use crate::mover::Mover;
use crate::space::{BaseSpace, SpaceRef, Word};

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawModel {
    schema: u32,
    #[serde(default)]
    description: Option<String>,
    space: RawSpace,
    generators: Vec<RawGenerator>,
    #[serde(default)]
    phase_modulus: Option<u32>,
    #[serde(default)]
    budgets: Option<RawBudget>,
    #[serde(default)]
    unit: Option<Value>,
    #[serde(default)]
    samples: Option<Vec<Value>>,
}

#[derive(Deserialize)]
#[serde(tag = "type", rename_all = "snake_case", deny_unknown_fields)]
enum RawSpace {
    Finite { points: Vec<String> },
    Path { vertices: Vec<String>, edges: Vec<RawEdge> },
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawEdge {
    label: String,
    source: String,
    target: String,
}

#[derive(Deserialize)]
#[serde(tag = "type", rename_all = "snake_case", deny_unknown_fields)]
enum RawGenerator {
    PartialBijection {
        name: String,
        map: BTreeMap<String, String>,
        #[serde(default)]
        phase: Option<u32>,
    },
    PrefixExchange {
        name: String,
        #[serde(default)]
        from: Option<String>,
        #[serde(default)]
        to: Option<String>,
        #[serde(default)]
        pieces: Option<Vec<RawExchange>>,
    },
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawExchange {
    from: String,
    to: String,
}

#[derive(Deserialize, Default)]
#[serde(deny_unknown_fields)]
struct RawBudget {
    depth: Option<u64>,
    len: Option<u64>,
    mult: Option<u64>,
    nmax: Option<u64>,
    nodes: Option<u64>,
}

impl RawBudget {
    fn overrides(&self) -> String {
        [
            ("depth", self.depth),
            ("len", self.len),
            ("mult", self.mult),
            ("nmax", self.nmax),
            ("nodes", self.nodes),
        ]
        .iter()
        .filter_map(|(k, v)| v.map(|v| format!("{k}={v}")))
        .collect::<Vec<_>>()
        .join(",")
    }
}

/// A parsed model: the action, the designated unit `F₀` and probe samples.
#[derive(Clone, Debug)]
pub struct ModelSpec {
    pub description: Option<String>,
    pub model: ActionModel,
    pub unit: LscFun,
    pub samples: Vec<LscFun>,
}

impl ModelSpec {
    /// Parse a model. `base` is the budget used for keys the file leaves out.
    pub fn parse(text: &str, base: Budget) -> Result<ModelSpec> {
        let de = &mut serde_json::Deserializer::from_str(text);
        let raw: RawModel = serde_path_to_error::deserialize(de).map_err(|e| {
            let path = e.path().to_string();
            let inner = e.into_inner();
            let msg = format!("{inner}");
            Error::schema(if path == "." || path == "?" { "$".into() } else { path }, msg)
        })?;
        if raw.schema != SCHEMA_VERSION {
            return Err(Error::schema(
                "schema",
                format!("unsupported schema version {} (expected {SCHEMA_VERSION})", raw.schema),
            ));
        }
        let space = build_space(&raw.space)?;
        let budget = base
            .with_overrides(&raw.budgets.unwrap_or_default().overrides())
            .map_err(|e| match e {
                Error::Schema { path, msg } => Error::schema(format!("budgets.{}", path.trim_start_matches("budget.")), msg),
                e => e,
            })?;
        let mut generators = Vec::new();
        for (i, g) in raw.generators.iter().enumerate() {
            let at = format!("generators[{i}]");
            let (name, mover) = build_generator(&space, g, raw.phase_modulus, &at)?;
            if generators.iter().any(|(n, _): &(String, Mover)| *n == name) {
                return Err(Error::schema(format!("{at}.name"), format!("duplicate generator {name:?}")));
            }
            generators.push((name, mover));
        }
        let model = ActionModel::new(&space, generators, budget).map_err(|e| match e {
            Error::Model(m) => Error::schema("generators", m),
            e => e,
        })?;
        let unit = match &raw.unit {
            Some(v) => LscFun::from_json(&space, v, "unit")?,
            None => LscFun::constant(&space, Fin(1)),
        };
        if unit.is_zero() || !unit.is_finite_valued() {
            return Err(Error::schema("unit", "the unit must be nonzero and finite-valued"));
        }
        let samples = raw
            .samples
            .unwrap_or_default()
            .iter()
            .enumerate()
            .map(|(i, v)| LscFun::from_json(&space, v, &format!("samples[{i}]")))
            .collect::<Result<_>>()?;
        Ok(ModelSpec {
            description: raw.description,
            model,
            unit,
            samples,
        })
    }

    pub fn with_budget(&self, budget: Budget) -> Result<ModelSpec> {
        Ok(ModelSpec {
            model: self.model.with_budget(budget)?,
            ..self.clone()
        })
    }

    pub fn space(&self) -> &SpaceRef {
        &self.model.space
    }
}

fn build_space(raw: &RawSpace) -> Result<SpaceRef> {
    match raw {
        RawSpace::Finite { points } => {
            BaseSpace::finite(points.iter().cloned()).map_err(|e| Error::schema("space.points", e.to_string()))
        }
        RawSpace::Path { vertices, edges } => {
            let mut es = Vec::with_capacity(edges.len());
            for (i, e) in edges.iter().enumerate() {
                let at = format!("space.edges[{i}]");
                let mut chars = e.label.chars();
                let (Some(c), None) = (chars.next(), chars.next()) else {
                    return Err(Error::schema(format!("{at}.label"), "labels are single characters"));
                };
                let find = |v: &str, field: &str| {
                    vertices
                        .iter()
                        .position(|x| x == v)
                        .ok_or_else(|| Error::schema(format!("{at}.{field}"), format!("unknown vertex {v:?}")))
                };
                es.push((c, find(&e.source, "source")?, find(&e.target, "target")?));
            }
            BaseSpace::path(vertices.iter().cloned(), es).map_err(|e| Error::schema("space", e.to_string()))
        }
    }
}

fn word(space: &SpaceRef, s: &str, at: &str) -> Result<Word> {
    space.parse_word(s).map_err(|e| Error::schema(at, e.to_string()))
}

fn build_generator(
    space: &SpaceRef,
    g: &RawGenerator,
    modulus: Option<u32>,
    at: &str,
) -> Result<(String, Mover)> {
    let model_err = |field: &str| {
        let p = format!("{at}.{field}");
        move |e: Error| match e {
            Error::Model(m) => Error::schema(&p, m),
            e => e,
        }
    };
    match g {
        RawGenerator::PartialBijection { name, map, phase } => {
            if !space.is_finite() {
                return Err(Error::schema(at, "partial_bijection generators need a finite space"));
            }
            let mut pairs = Vec::with_capacity(map.len());
            for (x, y) in map {
                let idx = |l: &str| {
                    space
                        .point_index(l)
                        .ok_or_else(|| Error::schema(format!("{at}.map"), format!("unknown point {l:?}")))
                };
                pairs.push((idx(x)?, idx(y)?));
            }
            let mut m = Mover::from_point_map(space, &pairs).map_err(model_err("map"))?;
            if let Some(p) = phase {
                let Some(md) = modulus else {
                    return Err(Error::schema(format!("{at}.phase"), "a phase needs a top-level phase_modulus"));
                };
                m = m.with_phase(*p, md);
            }
            Ok((name.clone(), m))
        }
        RawGenerator::PrefixExchange { name, from, to, pieces } => {
            if space.is_finite() {
                return Err(Error::schema(at, "prefix_exchange generators need a path space"));
            }
            let pairs = match (from, to, pieces) {
                (Some(f), Some(t), None) => vec![(word(space, f, &format!("{at}.from"))?, word(space, t, &format!("{at}.to"))?)],
                (None, None, Some(ps)) if !ps.is_empty() => ps
                    .iter()
                    .enumerate()
                    .map(|(i, p)| {
                        Ok((
                            word(space, &p.from, &format!("{at}.pieces[{i}].from"))?,
                            word(space, &p.to, &format!("{at}.pieces[{i}].to"))?,
                        ))
                    })
                    .collect::<Result<_>>()?,
                _ => {
                    return Err(Error::schema(
                        at,
                        "give either \"from\" and \"to\", or a nonempty \"pieces\" list",
                    ))
                }
            };
            let m = Mover::from_exchanges(space, &pairs).map_err(model_err("pieces"))?;
            Ok((name.clone(), m))
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn reads_finite_model() {
        let text = r#"{"schema":1,"space":{"type":"finite","points":["a","b"]},
            "generators":[{"name":"s","type":"partial_bijection","map":{"a":"b","b":"a"}}],
            "budgets":{"nmax":3}}"#;
        let m = ModelSpec::parse(text, Budget::default()).unwrap();
        assert_eq!(m.model.budget.nmax, 3);
        assert_eq!(m.unit, LscFun::constant(m.space(), Fin(1)));
    }

    #[test]
    fn schema_errors_carry_paths() {
        let text = r#"{"schema":1,"space":{"type":"finite","points":["a","b"]},
            "generators":[{"name":"s","type":"partial_bijection","map":{"a":"b","b":"b"}}]}"#;
        match ModelSpec::parse(text, Budget::default()) {
            Err(Error::Schema { path, msg }) => {
                assert_eq!(path, "generators[0].map");
                assert!(msg.contains("not injective"), "{msg}");
            }
            r => panic!("{r:?}"),
        }
        let text = r#"{"schema":1,"space":{"type":"finite","points":["a"]},"generators":[{"name":"s","type":"twist"}]}"#;
        assert!(matches!(ModelSpec::parse(text, Budget::default()), Err(Error::Schema { .. })));
        assert!(matches!(ModelSpec::parse("{", Budget::default()), Err(Error::Schema { .. })));
    }

    #[test]
    fn reads_path_model() {
        let text = r#"{"schema":1,"space":{"type":"path","vertices":["v"],
              "edges":[{"label":"0","source":"v","target":"v"},{"label":"1","source":"v","target":"v"}]},
            "generators":[{"name":"a","type":"prefix_exchange","from":"","to":"0"},
                          {"name":"s","type":"prefix_exchange","pieces":[{"from":"0","to":"0"},{"from":"10","to":"11"},{"from":"11","to":"10"}]}]}"#;
        let m = ModelSpec::parse(text, Budget::default()).unwrap();
        assert_eq!(m.model.generators.len(), 2);
    }
}
