//! Zero-dimensional compact base spaces and their clopen sets.
//!
//! Both kinds of space are presented as a finitely branching tree of
//! cylinders rooted at the whole space. A [`Word`] is a path from the root;
//! its cylinder `Z(w)` is the set of points below it.
//!
//! * A finite space has the root plus one leaf per point.
//! * The path space of a finite directed graph (every vertex emits an edge)
//!   has infinite paths as points. With a single vertex the root's children
//!   are that vertex's edges; with several vertices the root's children are
//!   the vertex cylinders, and below a vertex come edges.
//!
//! Cylinders of incomparable words are disjoint; a word whose node has a
//! single child denotes the same cylinder as that child. Canonical antichains
//! therefore always use the shortest word for each cylinder.

use std::collections::BTreeMap;
use std::fmt;
use std::sync::Arc;

use crate::error::{Error, Result};

pub type Step = u32;

/// A node of the cylinder tree, as the list of steps from the root.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Word(pub Vec<Step>);

impl Word {
    pub fn root() -> Word {
        Word(Vec::new())
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn is_prefix_of(&self, other: &Word) -> bool {
        other.0.starts_with(&self.0)
    }

    pub fn comparable(&self, other: &Word) -> bool {
        self.is_prefix_of(other) || other.is_prefix_of(self)
    }

    pub fn child(&self, step: Step) -> Word {
        let mut v = self.0.clone();
        v.push(step);
        Word(v)
    }

    pub fn concat(&self, suffix: &[Step]) -> Word {
        let mut v = self.0.clone();
        v.extend_from_slice(suffix);
        Word(v)
    }

    pub fn parent(&self) -> Option<Word> {
        if self.0.is_empty() {
            None
        } else {
            Some(Word(self.0[..self.0.len() - 1].to_vec()))
        }
    }

    /// Steps of `self` after the prefix `p`. Caller guarantees `p ≤ self`.
    pub fn suffix_after(&self, p: &Word) -> &[Step] {
        debug_assert!(p.is_prefix_of(self));
        &self.0[p.len()..]
    }

    /// `self` with the suffix `u` removed, if `self` ends with it.
    pub fn strip_suffix(&self, u: &[Step]) -> Option<Word> {
        if self.0.ends_with(u) {
            Some(Word(self.0[..self.0.len() - u.len()].to_vec()))
        } else {
            None
        }
    }
}

/// What can follow a word: determines which prefix exchanges are legal.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Cont {
    /// The root of a space whose root is not a single vertex.
    Whole,
    /// Any path leaving this vertex.
    Vertex(u32),
    /// Nothing: a point of a finite space.
    Leaf,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Edge {
    pub label: char,
    pub source: u32,
    pub target: u32,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum SpaceKind {
    Finite {
        points: Vec<String>,
    },
    Path {
        vertices: Vec<String>,
        edges: Vec<Edge>,
        out: Vec<Vec<u32>>,
        /// Vertex from which exactly one infinite path leaves.
        rigid: Vec<bool>,
    },
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct BaseSpace {
    kind: SpaceKind,
}

pub type SpaceRef = Arc<BaseSpace>;

impl BaseSpace {
    pub fn finite<S: Into<String>>(points: impl IntoIterator<Item = S>) -> Result<SpaceRef> {
        let points: Vec<String> = points.into_iter().map(Into::into).collect();
        if points.is_empty() {
            return Err(Error::Model("finite space needs at least one point".into()));
        }
        let mut sorted = points.clone();
        sorted.sort();
        sorted.dedup();
        if sorted.len() != points.len() {
            return Err(Error::Model("duplicate point label".into()));
        }
        Ok(Arc::new(BaseSpace {
            kind: SpaceKind::Finite { points },
        }))
    }

    /// Path space of a directed graph given as `(label, source, target)` edges.
    pub fn path<S: Into<String>>(
        vertices: impl IntoIterator<Item = S>,
        edges: impl IntoIterator<Item = (char, usize, usize)>,
    ) -> Result<SpaceRef> {
        let vertices: Vec<String> = vertices.into_iter().map(Into::into).collect();
        if vertices.is_empty() {
            return Err(Error::Model("graph needs at least one vertex".into()));
        }
        let n = vertices.len();
        let mut edge_list = Vec::new();
        let mut out = vec![Vec::new(); n];
        for (label, source, target) in edges {
            if source >= n || target >= n {
                return Err(Error::Model(format!("edge {label:?} has an unknown endpoint")));
            }
            if label == '@' || edge_list.iter().any(|e: &Edge| e.label == label) {
                return Err(Error::Model(format!("edge label {label:?} is reserved or repeated")));
            }
            out[source].push(edge_list.len() as u32);
            edge_list.push(Edge {
                label,
                source: source as u32,
                target: target as u32,
            });
        }
        if let Some(v) = out.iter().position(Vec::is_empty) {
            return Err(Error::Model(format!(
                "vertex {:?} emits no edge, so some cylinders would be empty",
                vertices[v]
            )));
        }
        // A vertex is rigid when every vertex reachable from it has out-degree one.
        let rigid = (0..n)
            .map(|v| {
                let mut seen = vec![false; n];
                let mut stack = vec![v];
                while let Some(u) = stack.pop() {
                    if seen[u] {
                        continue;
                    }
                    seen[u] = true;
                    if out[u].len() != 1 {
                        return false;
                    }
                    stack.push(edge_list[out[u][0] as usize].target as usize);
                }
                true
            })
            .collect();
        Ok(Arc::new(BaseSpace {
            kind: SpaceKind::Path {
                vertices,
                edges: edge_list,
                out,
                rigid,
            },
        }))
    }

    pub fn kind(&self) -> &SpaceKind {
        &self.kind
    }

    pub fn is_finite(&self) -> bool {
        matches!(self.kind, SpaceKind::Finite { .. })
    }

    pub fn num_points(&self) -> Option<usize> {
        match &self.kind {
            SpaceKind::Finite { points } => Some(points.len()),
            SpaceKind::Path { .. } => None,
        }
    }

    pub fn point_labels(&self) -> &[String] {
        match &self.kind {
            SpaceKind::Finite { points } => points,
            SpaceKind::Path { .. } => &[],
        }
    }

    /// The leaf word of point `x` of a finite space.
    pub fn point(&self, x: usize) -> Word {
        debug_assert!(self.is_finite());
        Word(vec![x as Step])
    }

    pub fn point_index(&self, label: &str) -> Option<usize> {
        self.point_labels().iter().position(|p| p == label)
    }

    fn multi_vertex(&self) -> bool {
        matches!(&self.kind, SpaceKind::Path { vertices, .. } if vertices.len() > 1)
    }

    pub fn vertex_count(&self) -> usize {
        match &self.kind {
            SpaceKind::Path { vertices, .. } => vertices.len(),
            SpaceKind::Finite { .. } => 0,
        }
    }

    pub fn vertex_names(&self) -> &[String] {
        match &self.kind {
            SpaceKind::Path { vertices, .. } => vertices,
            SpaceKind::Finite { .. } => &[],
        }
    }

    pub fn edges(&self) -> &[Edge] {
        match &self.kind {
            SpaceKind::Path { edges, .. } => edges,
            SpaceKind::Finite { .. } => &[],
        }
    }

    pub fn out_edges(&self, v: u32) -> &[u32] {
        match &self.kind {
            SpaceKind::Path { out, .. } => &out[v as usize],
            SpaceKind::Finite { .. } => &[],
        }
    }

    pub fn cont(&self, w: &Word) -> Cont {
        match &self.kind {
            SpaceKind::Finite { .. } => {
                if w.is_empty() {
                    Cont::Whole
                } else {
                    Cont::Leaf
                }
            }
            SpaceKind::Path { vertices, edges, .. } => match w.0.as_slice() {
                [] if vertices.len() == 1 => Cont::Vertex(0),
                [] => Cont::Whole,
                [v] if vertices.len() > 1 => Cont::Vertex(*v),
                [.., e] => Cont::Vertex(edges[*e as usize].target),
            },
        }
    }

    pub fn children(&self, w: &Word) -> Vec<Step> {
        match &self.kind {
            SpaceKind::Finite { points } => {
                if w.is_empty() {
                    (0..points.len() as Step).collect()
                } else {
                    Vec::new()
                }
            }
            SpaceKind::Path { vertices, out, .. } => match self.cont(w) {
                Cont::Whole => (0..vertices.len() as Step).collect(),
                Cont::Vertex(v) => out[v as usize].clone(),
                Cont::Leaf => Vec::new(),
            },
        }
    }

    pub fn child_count(&self, w: &Word) -> usize {
        match &self.kind {
            SpaceKind::Finite { points } => {
                if w.is_empty() {
                    points.len()
                } else {
                    0
                }
            }
            SpaceKind::Path { vertices, out, .. } => match self.cont(w) {
                Cont::Whole => vertices.len(),
                Cont::Vertex(v) => out[v as usize].len(),
                Cont::Leaf => 0,
            },
        }
    }

    /// Whether `Z(w)` is a single point.
    pub fn is_singleton(&self, w: &Word) -> bool {
        match &self.kind {
            SpaceKind::Finite { points } => !w.is_empty() || points.len() == 1,
            SpaceKind::Path { rigid, .. } => match self.cont(w) {
                Cont::Vertex(v) => rigid[v as usize],
                Cont::Whole | Cont::Leaf => false,
            },
        }
    }

    /// Shortest word with the same cylinder.
    pub fn collapse(&self, w: &Word) -> Word {
        let mut w = w.clone();
        while let Some(p) = w.parent() {
            if self.child_count(&p) == 1 {
                w = p;
            } else {
                break;
            }
        }
        w
    }

    /// Follow the unique continuation of `w` for `steps` steps.
    pub fn forced_extension(&self, w: &Word, steps: usize) -> Option<Word> {
        let mut w = w.clone();
        for _ in 0..steps {
            let ch = self.children(&w);
            if ch.len() != 1 {
                return None;
            }
            w = w.child(ch[0]);
        }
        Some(w)
    }

    pub fn is_valid_word(&self, w: &Word) -> bool {
        let mut cur = Word::root();
        for &s in &w.0 {
            if !self.children(&cur).contains(&s) {
                return false;
            }
            cur = cur.child(s);
        }
        true
    }

    /// The partition of `X` into the nodes at depth `d` (or shallower leaves).
    pub fn partition_at(&self, d: usize) -> Vec<Word> {
        let mut out = Vec::new();
        let mut stack = vec![Word::root()];
        while let Some(w) = stack.pop() {
            let ch = self.children(&w);
            if w.len() >= d || ch.is_empty() {
                out.push(w);
            } else {
                for s in ch.into_iter().rev() {
                    stack.push(w.child(s));
                }
            }
        }
        out
    }

    /// All nodes of depth at most `d`, in tree order.
    pub fn nodes_up_to(&self, d: usize) -> Vec<Word> {
        let mut out = Vec::new();
        let mut stack = vec![Word::root()];
        while let Some(w) = stack.pop() {
            if w.len() < d {
                for s in self.children(&w).into_iter().rev() {
                    stack.push(w.child(s));
                }
            }
            out.push(w);
        }
        out
    }

    /// `w` and its descendants down to `extra` more steps.
    pub fn subtree(&self, w: &Word, extra: usize) -> Vec<Word> {
        let mut out = Vec::new();
        let mut stack = vec![w.clone()];
        while let Some(u) = stack.pop() {
            if u.len() < w.len() + extra {
                for s in self.children(&u).into_iter().rev() {
                    stack.push(u.child(s));
                }
            }
            out.push(u);
        }
        out
    }

    /// Coarsest partition of `X` into cylinders refining every given word.
    pub fn common_cells<'a>(&self, words: impl IntoIterator<Item = &'a Word>) -> Vec<Word> {
        #[derive(Default)]
        struct Trie(BTreeMap<Step, Trie>);
        let mut trie = Trie::default();
        for w in words {
            let mut node = &mut trie;
            for &s in &w.0 {
                node = node.0.entry(s).or_default();
            }
        }
        fn walk(space: &BaseSpace, node: &Trie, w: Word, out: &mut Vec<Word>) {
            if node.0.is_empty() {
                out.push(w);
                return;
            }
            for s in space.children(&w) {
                match node.0.get(&s) {
                    Some(sub) => walk(space, sub, w.child(s), out),
                    None => out.push(w.child(s)),
                }
            }
        }
        let mut out = Vec::new();
        walk(self, &trie, Word::root(), &mut out);
        out
    }

    pub fn render(&self, w: &Word) -> String {
        match &self.kind {
            SpaceKind::Finite { points } => match w.0.as_slice() {
                [] => "*".into(),
                [x, ..] => points[*x as usize].clone(),
            },
            SpaceKind::Path {
                vertices, edges, ..
            } => {
                let steps = if self.multi_vertex() {
                    match w.0.as_slice() {
                        [] => return String::new(),
                        [v] => return format!("@{}", vertices[*v as usize]),
                        [_, rest @ ..] => rest,
                    }
                } else {
                    w.0.as_slice()
                };
                steps.iter().map(|e| edges[*e as usize].label).collect()
            }
        }
    }

    pub fn parse_word(&self, s: &str) -> Result<Word> {
        match &self.kind {
            SpaceKind::Finite { points } => {
                if s == "*" {
                    return Ok(Word::root());
                }
                points
                    .iter()
                    .position(|p| p == s)
                    .map(|x| Word(vec![x as Step]))
                    .ok_or_else(|| Error::Model(format!("unknown point {s:?}")))
            }
            SpaceKind::Path {
                vertices, edges, ..
            } => {
                if s.is_empty() {
                    return Ok(Word::root());
                }
                if let Some(name) = s.strip_prefix('@') {
                    let v = vertices
                        .iter()
                        .position(|n| n == name)
                        .ok_or_else(|| Error::Model(format!("unknown vertex {name:?}")))?;
                    return Ok(if self.multi_vertex() {
                        Word(vec![v as Step])
                    } else {
                        Word::root()
                    });
                }
                let mut steps = Vec::new();
                for c in s.chars() {
                    let e = edges
                        .iter()
                        .position(|e| e.label == c)
                        .ok_or_else(|| Error::Model(format!("unknown edge label {c:?} in {s:?}")))?;
                    steps.push(e as Step);
                }
                if self.multi_vertex() {
                    steps.insert(0, edges[steps[0] as usize].source);
                }
                let w = Word(steps);
                if !self.is_valid_word(&w) {
                    return Err(Error::Model(format!("{s:?} is not a path in the graph")));
                }
                Ok(w)
            }
        }
    }
}

pub(crate) fn same_space(a: &SpaceRef, b: &SpaceRef) -> Result<()> {
    if Arc::ptr_eq(a, b) || **a == **b {
        Ok(())
    } else {
        Err(Error::Model("operands live on different base spaces".into()))
    }
}

/// Merge complete sibling families with equal values into their parent.
/// `entries` must form an antichain of valid words.
pub(crate) fn canonicalize<V: Clone + Eq>(space: &BaseSpace, entries: Vec<(Word, V)>) -> Vec<(Word, V)> {
    struct Node<V> {
        value: Option<V>,
        children: BTreeMap<Step, Node<V>>,
    }
    impl<V> Node<V> {
        fn new() -> Self {
            Node {
                value: None,
                children: BTreeMap::new(),
            }
        }
    }
    let mut root: Node<V> = Node::new();
    for (w, v) in entries {
        let mut node = &mut root;
        for &s in &w.0 {
            node = node.children.entry(s).or_insert_with(Node::new);
        }
        node.value = Some(v);
    }
    fn merge<V: Clone + Eq>(space: &BaseSpace, node: &mut Node<V>, w: &Word) -> Option<V> {
        if node.value.is_some() {
            node.children.clear();
            return node.value.clone();
        }
        if node.children.is_empty() {
            return None;
        }
        let mut uniform: Option<Option<V>> = None;
        for (s, ch) in node.children.iter_mut() {
            let v = merge(space, ch, &w.child(*s));
            uniform = match uniform {
                None => Some(v),
                Some(u) if u == v => Some(u),
                Some(_) => Some(None),
            };
        }
        if node.children.len() == space.child_count(w) {
            if let Some(Some(v)) = uniform {
                node.children.clear();
                node.value = Some(v.clone());
                return Some(v);
            }
        }
        None
    }
    merge(space, &mut root, &Word::root());
    fn emit<V: Clone>(node: &Node<V>, w: Word, out: &mut Vec<(Word, V)>) {
        if let Some(v) = &node.value {
            out.push((w, v.clone()));
            return;
        }
        for (s, ch) in &node.children {
            emit(ch, w.child(*s), out);
        }
    }
    let mut out = Vec::new();
    emit(&root, Word::root(), &mut out);
    out
}

/// Index of the entry whose word is a prefix of `cell`, in a sorted antichain.
pub(crate) fn covering_index<V>(entries: &[(Word, V)], cell: &Word) -> Option<usize> {
    let idx = entries.partition_point(|(w, _)| w <= cell);
    if idx == 0 {
        return None;
    }
    entries[idx - 1].0.is_prefix_of(cell).then_some(idx - 1)
}

/// A clopen subset of the space: a canonical antichain of cylinders.
#[derive(Clone)]
pub struct OpenSet {
    space: SpaceRef,
    words: Vec<Word>,
}

impl PartialEq for OpenSet {
    fn eq(&self, other: &Self) -> bool {
        self.words == other.words
    }
}

impl Eq for OpenSet {}

impl std::hash::Hash for OpenSet {
    fn hash<H: std::hash::Hasher>(&self, state: &mut H) {
        self.words.hash(state);
    }
}

impl PartialOrd for OpenSet {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for OpenSet {
    fn cmp(&self, other: &Self) -> std::cmp::Ordering {
        self.words.cmp(&other.words)
    }
}

impl fmt::Debug for OpenSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_set()
            .entries(self.words.iter().map(|w| self.space.render(w)))
            .finish()
    }
}

impl OpenSet {
    pub fn empty(space: &SpaceRef) -> OpenSet {
        OpenSet {
            space: space.clone(),
            words: Vec::new(),
        }
    }

    pub fn full(space: &SpaceRef) -> OpenSet {
        OpenSet::from_words(space, [Word::root()])
    }

    pub fn cylinder(space: &SpaceRef, w: Word) -> OpenSet {
        OpenSet::from_words(space, [w])
    }

    /// Union of the given cylinders (overlaps allowed).
    pub fn from_words(space: &SpaceRef, words: impl IntoIterator<Item = Word>) -> OpenSet {
        let mut words: Vec<Word> = words.into_iter().collect();
        words.sort();
        words.dedup();
        // keep only maximal words
        let mut anti: Vec<Word> = Vec::with_capacity(words.len());
        for w in words {
            if anti.last().is_some_and(|p| p.is_prefix_of(&w)) {
                continue;
            }
            anti.push(w);
        }
        let entries = canonicalize(space, anti.into_iter().map(|w| (w, ())).collect());
        OpenSet {
            space: space.clone(),
            words: entries.into_iter().map(|(w, _)| w).collect(),
        }
    }

    pub fn from_points(space: &SpaceRef, points: impl IntoIterator<Item = usize>) -> OpenSet {
        OpenSet::from_words(space, points.into_iter().map(|x| space.point(x)))
    }

    pub fn space(&self) -> &SpaceRef {
        &self.space
    }

    pub fn words(&self) -> &[Word] {
        &self.words
    }

    pub fn is_empty(&self) -> bool {
        self.words.is_empty()
    }

    pub fn is_full(&self) -> bool {
        self.words.len() == 1 && self.words[0].is_empty()
    }

    /// `Z(w) ⊆ self`.
    pub fn contains_cylinder(&self, w: &Word) -> bool {
        let idx = self.words.partition_point(|u| u <= w);
        idx > 0 && self.words[idx - 1].is_prefix_of(w)
    }

    /// `Z(w) ∩ self ≠ ∅`.
    pub fn meets_cylinder(&self, w: &Word) -> bool {
        if self.contains_cylinder(w) {
            return true;
        }
        let idx = self.words.partition_point(|u| u < w);
        idx < self.words.len() && w.is_prefix_of(&self.words[idx])
    }

    fn combine(&self, other: &OpenSet, op: impl Fn(bool, bool) -> bool) -> Result<OpenSet> {
        same_space(&self.space, &other.space)?;
        let cells = self.space.common_cells(self.words.iter().chain(other.words.iter()));
        let kept = cells
            .into_iter()
            .filter(|c| op(self.contains_cylinder(c), other.contains_cylinder(c)));
        Ok(OpenSet::from_words(&self.space, kept))
    }

    pub fn union(&self, other: &OpenSet) -> Result<OpenSet> {
        self.combine(other, |a, b| a || b)
    }

    pub fn intersection(&self, other: &OpenSet) -> Result<OpenSet> {
        self.combine(other, |a, b| a && b)
    }

    pub fn difference(&self, other: &OpenSet) -> Result<OpenSet> {
        self.combine(other, |a, b| a && !b)
    }

    pub fn is_subset(&self, other: &OpenSet) -> Result<bool> {
        Ok(self.difference(other)?.is_empty())
    }

    pub fn complement(&self) -> OpenSet {
        OpenSet::full(&self.space)
            .difference(self)
            .expect("same space")
    }

    /// Points of a finite space, in index order.
    pub fn points(&self) -> Vec<usize> {
        let n = self.space.num_points().unwrap_or(0);
        (0..n)
            .filter(|&x| self.contains_cylinder(&self.space.point(x)))
            .collect()
    }

    pub fn render(&self) -> Vec<String> {
        if self.space.is_finite() {
            let labels = self.space.point_labels();
            self.points().into_iter().map(|x| labels[x].clone()).collect()
        } else {
            self.words.iter().map(|w| self.space.render(w)).collect()
        }
    }

    pub fn max_depth(&self) -> usize {
        self.words.iter().map(Word::len).max().unwrap_or(0)
    }
}
