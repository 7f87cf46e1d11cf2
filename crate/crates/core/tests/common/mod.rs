#![allow(dead_code)]

use std::path::PathBuf;

use dyncu::{ActionModel, BaseSpace, Budget, ExtNat, Fin, Inf, LscFun, ModelSpec, Mover, OpenSet, SpaceRef, Word};
use rand::seq::SliceRandom;
use rand::Rng;
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    rand::SeedableRng::seed_from_u64(seed)
}

pub fn models_dir() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../models")
}

pub fn shipped(name: &str) -> ModelSpec {
    let text = std::fs::read_to_string(models_dir().join(name)).expect("model file");
    ModelSpec::parse(&text, Budget::default()).expect("model parses")
}

pub fn shipped_names() -> Vec<String> {
    let mut names: Vec<String> = std::fs::read_dir(models_dir())
        .expect("models dir")
        .map(|e| e.unwrap().file_name().to_string_lossy().into_owned())
        .filter(|n| n.ends_with(".json"))
        .collect();
    names.sort();
    names
}

pub fn word(s: &SpaceRef, t: &str) -> Word {
    s.parse_word(t).unwrap()
}

pub fn zn(n: usize) -> ActionModel {
    let labels: Vec<String> = (1..=n).map(|i| format!("x{i}")).collect();
    let s = BaseSpace::finite(labels).unwrap();
    let pairs: Vec<(usize, usize)> = (0..n).map(|i| (i, (i + 1) % n)).collect();
    let r = Mover::from_point_map(&s, &pairs).unwrap();
    ActionModel::new(&s, vec![("r".into(), r)], Budget::default()).unwrap()
}

pub fn cuntz2(budget: Budget) -> ActionModel {
    let s = BaseSpace::path(["v"], [('0', 0, 0), ('1', 0, 0)]).unwrap();
    let gens = vec![
        ("a".into(), Mover::prefix_exchange(&s, word(&s, ""), word(&s, "0")).unwrap()),
        ("b".into(), Mover::prefix_exchange(&s, word(&s, ""), word(&s, "1")).unwrap()),
    ];
    ActionModel::new(&s, gens, budget).unwrap()
}

/// Two vertices: `p` with a loop `0` and an edge `1` to `q`, and `q → p` by `2`.
pub fn golden(budget: Budget) -> ActionModel {
    let s = BaseSpace::path(["p", "q"], [('0', 0, 0), ('1', 0, 1), ('2', 1, 0)]).unwrap();
    let gens = vec![
        ("a".into(), Mover::prefix_exchange(&s, word(&s, "@p"), word(&s, "0")).unwrap()),
        ("c".into(), Mover::prefix_exchange(&s, word(&s, "@q"), word(&s, "1")).unwrap()),
    ];
    ActionModel::new(&s, gens, budget).unwrap()
}

pub fn cycle3(budget: Budget) -> ActionModel {
    let s = BaseSpace::path(["u", "v", "w"], [('a', 0, 1), ('b', 1, 2), ('c', 2, 0)]).unwrap();
    let pairs = [("@u", "@v"), ("@v", "@w"), ("@w", "@u")].map(|(x, y)| (word(&s, x), word(&s, y)));
    let r = Mover::from_exchanges(&s, &pairs).unwrap();
    ActionModel::new(&s, vec![("r".into(), r)], budget).unwrap()
}

/// The shift on two letters with only the prepend-0 map.
pub fn half_cuntz(budget: Budget) -> ActionModel {
    let s = BaseSpace::path(["v"], [('0', 0, 0), ('1', 0, 0)]).unwrap();
    let gens = vec![("a".into(), Mover::prefix_exchange(&s, word(&s, ""), word(&s, "0")).unwrap())];
    ActionModel::new(&s, gens, budget).unwrap()
}

pub fn path_models(budget: Budget) -> Vec<(&'static str, ActionModel)> {
    vec![
        ("cuntz2", cuntz2(budget)),
        ("golden", golden(budget)),
        ("cycle3", cycle3(budget)),
        ("half_cuntz", half_cuntz(budget)),
    ]
}

/// `n ≤ 5` points with one or two random partial bijections.
pub fn random_finite_model(r: &mut ChaCha8Rng) -> ActionModel {
    let n = r.gen_range(1..=5);
    let labels: Vec<String> = (1..=n).map(|i| format!("x{i}")).collect();
    let s = BaseSpace::finite(labels).unwrap();
    let k = r.gen_range(1..=2);
    let mut gens = Vec::new();
    for g in 0..k {
        let mut dom: Vec<usize> = (0..n).filter(|_| r.gen_bool(0.7)).collect();
        let mut img: Vec<usize> = (0..n).collect();
        img.shuffle(r);
        dom.shuffle(r);
        let pairs: Vec<(usize, usize)> = dom.iter().copied().zip(img).collect();
        gens.push((format!("g{g}"), Mover::from_point_map(&s, &pairs).unwrap()));
    }
    ActionModel::new(&s, gens, Budget::default()).unwrap()
}

pub fn random_values(r: &mut ChaCha8Rng, n: usize, max: u64, inf_p: f64) -> Vec<ExtNat> {
    (0..n)
        .map(|_| {
            if r.gen_bool(inf_p) {
                Inf
            } else {
                Fin(r.gen_range(0..=max))
            }
        })
        .collect()
}

/// Random function on a path space: a max of up to three scaled cylinder
/// indicators at depth ≤ `depth`.
pub fn random_path_fun(r: &mut ChaCha8Rng, s: &SpaceRef, depth: usize, max: u64, inf_p: f64) -> LscFun {
    let nodes = s.nodes_up_to(depth);
    let mut f = LscFun::zero(s);
    for _ in 0..r.gen_range(0..=3) {
        let w = nodes.choose(r).unwrap().clone();
        let ind = LscFun::indicator(&OpenSet::cylinder(s, w));
        let g = if r.gen_bool(inf_p) {
            LscFun::constant(s, Inf).restrict(&ind.support()).unwrap()
        } else {
            ind.scale(r.gen_range(1..=max))
        };
        f = f.max(&g).unwrap();
    }
    f
}

pub fn random_fun(r: &mut ChaCha8Rng, s: &SpaceRef, max: u64, inf_p: f64) -> LscFun {
    match s.num_points() {
        Some(n) => LscFun::from_values(s, &random_values(r, n, max, inf_p)).unwrap(),
        None => random_path_fun(r, s, 2, max, inf_p),
    }
}
