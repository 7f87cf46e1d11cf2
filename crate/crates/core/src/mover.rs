//! Partial bijections of the base space.
//!
//! A mover is a finite list of pieces with pairwise disjoint domains and
//! pairwise disjoint images. A piece is either a prefix exchange
//! `Z(d·u) → Z(i·u)` between two words with the same continuation, or a map
//! between two isolated points. Every constructor canonicalises the piece
//! list, which makes it a function of the partial map alone: equality of
//! movers is equality of maps.
//!
//! Movers also carry a phase in `Z/m`. It is multiplied along with the map
//! and lets a model contain elements that act like the identity without
//! being idempotent (a group acting non-faithfully). The zero mover always
//! has phase 0.

use std::fmt;

use crate::error::{Error, Result};
use crate::lsc::LscFun;
use crate::space::{same_space, OpenSet, SpaceRef, Word};

#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Piece {
    Exch { dom: Word, img: Word },
    Point { dom: Word, img: Word },
}

impl Piece {
    pub fn dom(&self) -> &Word {
        match self {
            Piece::Exch { dom, .. } | Piece::Point { dom, .. } => dom,
        }
    }

    pub fn img(&self) -> &Word {
        match self {
            Piece::Exch { img, .. } | Piece::Point { img, .. } => img,
        }
    }

    fn swapped(&self) -> Piece {
        match self {
            Piece::Exch { dom, img } => Piece::Exch {
                dom: img.clone(),
                img: dom.clone(),
            },
            Piece::Point { dom, img } => Piece::Point {
                dom: img.clone(),
                img: dom.clone(),
            },
        }
    }
}

#[derive(Clone)]
pub struct Mover {
    space: SpaceRef,
    pieces: Vec<Piece>,
    phase: u32,
    modulus: u32,
}

impl PartialEq for Mover {
    fn eq(&self, other: &Self) -> bool {
        self.pieces == other.pieces && self.phase == other.phase
    }
}

impl Eq for Mover {}

impl std::hash::Hash for Mover {
    fn hash<H: std::hash::Hasher>(&self, state: &mut H) {
        self.pieces.hash(state);
        self.phase.hash(state);
    }
}

impl fmt::Debug for Mover {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self
            .pieces
            .iter()
            .map(|p| format!("{}->{}", self.space.render(p.dom()), self.space.render(p.img())))
            .collect();
        write!(f, "Mover[{}", parts.join(", "))?;
        if self.phase != 0 {
            write!(f, "; phase {}/{}", self.phase, self.modulus)?;
        }
        write!(f, "]")
    }
}

impl Mover {
    pub fn zero(space: &SpaceRef) -> Mover {
        Mover {
            space: space.clone(),
            pieces: Vec::new(),
            phase: 0,
            modulus: 1,
        }
    }

    pub fn identity(space: &SpaceRef) -> Mover {
        Mover::from_pieces(space, vec![raw_exch(space, Word::root(), Word::root())])
    }

    /// Identity on the open set `U`.
    pub fn idempotent_on(set: &OpenSet) -> Mover {
        Mover::identity(set.space())
            .restrict(set)
            .expect("same space")
    }

    /// The prefix exchange `Z(q·w) → Z(p·w)`. Two one-point cylinders may
    /// be exchanged whatever their end vertices.
    pub fn prefix_exchange(space: &SpaceRef, from: Word, to: Word) -> Result<Mover> {
        if !space.is_valid_word(&from) || !space.is_valid_word(&to) {
            return Err(Error::Model("prefix exchange uses an invalid word".into()));
        }
        let points = space.is_singleton(&from) && space.is_singleton(&to);
        if !points && space.cont(&from) != space.cont(&to) {
            return Err(Error::Model(format!(
                "cannot exchange {:?} for {:?}: they end at different vertices",
                space.render(&from),
                space.render(&to)
            )));
        }
        Ok(Mover::from_pieces(space, vec![raw_exch(space, from, to)]))
    }

    /// Several prefix exchanges with pairwise disjoint domains and images.
    pub fn from_exchanges(space: &SpaceRef, pairs: &[(Word, Word)]) -> Result<Mover> {
        let mut pieces = Vec::with_capacity(pairs.len());
        for (i, (from, to)) in pairs.iter().enumerate() {
            let single = Mover::prefix_exchange(space, from.clone(), to.clone())?;
            for (f2, t2) in &pairs[..i] {
                if from.comparable(f2) || to.comparable(t2) {
                    return Err(Error::Model(format!(
                        "exchanges {}->{} and {}->{} overlap",
                        space.render(f2),
                        space.render(t2),
                        space.render(from),
                        space.render(to)
                    )));
                }
            }
            pieces.extend(single.pieces);
        }
        Ok(Mover::from_pieces(space, pieces))
    }

    /// A point table on a finite space; `pairs` are point indices.
    pub fn from_point_map(space: &SpaceRef, pairs: &[(usize, usize)]) -> Result<Mover> {
        let n = space
            .num_points()
            .ok_or_else(|| Error::Model("point tables need a finite space".into()))?;
        let mut seen_dom = vec![false; n];
        let mut seen_img: Vec<Option<usize>> = vec![None; n];
        for &(x, y) in pairs {
            if x >= n || y >= n {
                return Err(Error::Model("point index out of range".into()));
            }
            if seen_dom[x] {
                return Err(Error::Model(format!(
                    "point {} is mapped twice",
                    space.point_labels()[x]
                )));
            }
            seen_dom[x] = true;
            if let Some(x0) = seen_img[y] {
                let l = space.point_labels();
                return Err(Error::Model(format!(
                    "not injective: {} and {} both map to {}",
                    l[x0], l[x], l[y]
                )));
            }
            seen_img[y] = Some(x);
        }
        Ok(Mover::from_pieces(
            space,
            pairs
                .iter()
                .map(|&(x, y)| Piece::Point {
                    dom: space.point(x),
                    img: space.point(y),
                })
                .collect(),
        ))
    }

    /// Build from pieces with disjoint domains and disjoint images.
    pub(crate) fn from_pieces(space: &SpaceRef, pieces: Vec<Piece>) -> Mover {
        Mover {
            space: space.clone(),
            pieces: canon(space, pieces),
            phase: 0,
            modulus: 1,
        }
    }

    pub fn with_phase(mut self, phase: u32, modulus: u32) -> Mover {
        let modulus = modulus.max(1);
        self.modulus = modulus;
        self.phase = if self.pieces.is_empty() { 0 } else { phase % modulus };
        self
    }

    pub fn space(&self) -> &SpaceRef {
        &self.space
    }

    pub fn pieces(&self) -> &[Piece] {
        &self.pieces
    }

    pub fn phase(&self) -> u32 {
        self.phase
    }

    pub fn is_zero(&self) -> bool {
        self.pieces.is_empty()
    }

    pub fn domain(&self) -> OpenSet {
        OpenSet::from_words(&self.space, self.pieces.iter().map(|p| p.dom().clone()))
    }

    pub fn range(&self) -> OpenSet {
        OpenSet::from_words(&self.space, self.pieces.iter().map(|p| p.img().clone()))
    }

    pub fn inverse(&self) -> Mover {
        Mover {
            space: self.space.clone(),
            pieces: canon(&self.space, self.pieces.iter().map(Piece::swapped).collect()),
            phase: (self.modulus - self.phase) % self.modulus,
            modulus: self.modulus,
        }
    }

    /// `self ∘ first`: apply `first`, then `self`.
    pub fn compose(&self, first: &Mover) -> Result<Mover> {
        same_space(&self.space, &first.space)?;
        let mut out = Vec::new();
        for ps in &first.pieces {
            for pt in &self.pieces {
                if let Some(p) = compose_pieces(&self.space, pt, ps) {
                    out.push(p);
                }
            }
        }
        let modulus = self.modulus.max(first.modulus);
        let m = Mover {
            space: self.space.clone(),
            pieces: canon(&self.space, out),
            phase: 0,
            modulus,
        };
        let phase = (self.phase + first.phase) % modulus;
        Ok(m.with_phase(phase, modulus))
    }

    /// `self` restricted to `dom ∩ U`.
    pub fn restrict(&self, set: &OpenSet) -> Result<Mover> {
        same_space(&self.space, set.space())?;
        let mut out = Vec::new();
        for w in set.words() {
            for p in &self.pieces {
                if let Some(q) = restrict_piece(&self.space, p, w) {
                    out.push(q);
                }
            }
        }
        let m = Mover {
            space: self.space.clone(),
            pieces: canon(&self.space, out),
            phase: 0,
            modulus: self.modulus,
        };
        Ok(m.with_phase(self.phase, self.modulus))
    }

    /// `s ≤ t` in the natural partial order: `s` is a restriction of `t`.
    pub fn natural_leq(&self, other: &Mover) -> Result<bool> {
        Ok(*self == other.restrict(&self.domain())?)
    }

    pub fn is_idempotent(&self) -> bool {
        self.phase == 0
            && self.pieces.iter().all(|p| match p {
                Piece::Exch { dom, img } | Piece::Point { dom, img } => dom == img,
            })
    }

    /// Image of `Z(w) ∩ dom`.
    pub fn image_of_cylinder(&self, w: &Word) -> OpenSet {
        let words = self
            .pieces
            .iter()
            .filter_map(|p| restrict_piece(&self.space, p, w))
            .map(|p| p.img().clone());
        OpenSet::from_words(&self.space, words)
    }

    pub fn image(&self, set: &OpenSet) -> Result<OpenSet> {
        same_space(&self.space, set.space())?;
        let words = set.words().iter().flat_map(|w| {
            self.pieces
                .iter()
                .filter_map(|p| restrict_piece(&self.space, p, w))
                .map(|p| p.img().clone())
        });
        Ok(OpenSet::from_words(&self.space, words.collect::<Vec<_>>()))
    }

    /// If `Z(w) ⊆ dom` and its image is a single cylinder, that cylinder.
    pub fn map_cylinder(&self, w: &Word) -> Option<Word> {
        for p in &self.pieces {
            if p.dom().is_prefix_of(w) {
                return restrict_piece(&self.space, p, w).map(|q| q.img().clone());
            }
            if w.is_prefix_of(p.dom()) {
                return None;
            }
        }
        None
    }

    /// Image of point `x` of a finite space.
    pub fn apply_point(&self, x: usize) -> Option<usize> {
        let w = self.space.point(x);
        if !self.domain().contains_cylinder(&w) {
            return None;
        }
        self.image_of_cylinder(&w).points().first().copied()
    }

    /// Push `F` (supported in `dom`) forward: `θ̂(F) = F ∘ self⁻¹` on the range.
    pub fn push(&self, f: &LscFun) -> Result<LscFun> {
        same_space(&self.space, f.space())?;
        let dom = self.domain();
        if !f.support().is_subset(&dom)? {
            return Err(Error::Contract("function is not supported in the mover's domain".into()));
        }
        let mut acc = LscFun::zero(&self.space);
        for (w, v) in f.entries() {
            let img = self.image_of_cylinder(w);
            acc = acc.add(&LscFun::indicator(&img).scale_ext(*v))?;
        }
        Ok(acc)
    }

    /// Open interior of the fixed-point set.
    pub fn fixed_interior(&self) -> OpenSet {
        OpenSet::from_words(
            &self.space,
            self.pieces
                .iter()
                .filter(|p| p.dom() == p.img())
                .map(|p| p.dom().clone()),
        )
    }

    pub fn describe(&self) -> Vec<String> {
        self.pieces
            .iter()
            .map(|p| format!("{}->{}", self.space.render(p.dom()), self.space.render(p.img())))
            .collect()
    }
}

impl LscFun {
    pub(crate) fn scale_ext(&self, v: crate::extnat::ExtNat) -> LscFun {
        match v {
            crate::extnat::Fin(k) => self.scale(k),
            crate::extnat::Inf => LscFun::from_entries(
                self.space(),
                self.entries()
                    .iter()
                    .map(|(w, _)| (w.clone(), crate::extnat::Inf))
                    .collect(),
            ),
        }
    }
}

fn raw_exch(space: &SpaceRef, dom: Word, img: Word) -> Piece {
    if space.is_singleton(&dom) {
        Piece::Point {
            dom: space.collapse(&dom),
            img: space.collapse(&img),
        }
    } else {
        Piece::Exch { dom, img }
    }
}

/// `pt ∘ ps`, if the image of `ps` meets the domain of `pt`.
fn compose_pieces(space: &SpaceRef, pt: &Piece, ps: &Piece) -> Option<Piece> {
    let (a, b) = (ps.dom(), ps.img());
    let (c, d) = (pt.dom(), pt.img());
    if !b.comparable(c) {
        return None;
    }
    match (ps, pt) {
        (Piece::Exch { .. }, Piece::Exch { .. }) => {
            if b.is_prefix_of(c) {
                Some(raw_exch(space, a.concat(c.suffix_after(b)), d.clone()))
            } else {
                Some(raw_exch(space, a.clone(), d.concat(b.suffix_after(c))))
            }
        }
        (Piece::Exch { .. }, Piece::Point { .. }) => {
            let src = if b.is_prefix_of(c) {
                a.concat(c.suffix_after(b))
            } else {
                a.clone()
            };
            Some(Piece::Point {
                dom: space.collapse(&src),
                img: d.clone(),
            })
        }
        (Piece::Point { .. }, Piece::Exch { .. }) => {
            let dst = if c.is_prefix_of(b) {
                d.concat(b.suffix_after(c))
            } else {
                d.clone()
            };
            Some(Piece::Point {
                dom: a.clone(),
                img: space.collapse(&dst),
            })
        }
        (Piece::Point { .. }, Piece::Point { .. }) => Some(Piece::Point {
            dom: a.clone(),
            img: d.clone(),
        }),
    }
}

/// The piece restricted to `Z(w)`.
fn restrict_piece(space: &SpaceRef, p: &Piece, w: &Word) -> Option<Piece> {
    let d = p.dom();
    if w.is_prefix_of(d) {
        return Some(p.clone());
    }
    if !d.is_prefix_of(w) {
        return None;
    }
    match p {
        Piece::Exch { img, .. } => Some(raw_exch(space, w.clone(), img.concat(w.suffix_after(d)))),
        Piece::Point { .. } => Some(p.clone()),
    }
}

/// Canonical piece list of the partial map described by `pieces`.
fn canon(space: &SpaceRef, pieces: Vec<Piece>) -> Vec<Piece> {
    let mut pieces = pieces;
    pieces.sort();
    pieces.dedup();
    let domain = OpenSet::from_words(space, pieces.iter().map(|p| p.dom().clone()));
    let mut out = Vec::new();
    for a in domain.words() {
        emit(space, &pieces, a, &mut out);
    }
    out
}

fn meeting<'a>(pieces: &'a [Piece], a: &'a Word) -> impl Iterator<Item = &'a Piece> + 'a {
    pieces.iter().filter(move |p| p.dom().comparable(a))
}

fn emit(space: &SpaceRef, pieces: &[Piece], a: &Word, out: &mut Vec<Piece>) {
    if space.is_singleton(a) {
        let p = meeting(pieces, a).next().expect("cylinder lies in the domain");
        let img = match p {
            Piece::Point { img, .. } => img.clone(),
            Piece::Exch { dom, img } => {
                let target = if dom.is_prefix_of(a) {
                    img.concat(a.suffix_after(dom))
                } else {
                    img.clone()
                };
                space.collapse(&target)
            }
        };
        out.push(Piece::Point {
            dom: space.collapse(a),
            img,
        });
        return;
    }
    if let Some(j) = exchange_target(space, pieces, a) {
        out.push(Piece::Exch { dom: a.clone(), img: j });
        return;
    }
    for s in space.children(a) {
        emit(space, pieces, &a.child(s), out);
    }
}

/// The word `j` such that the map agrees with `a → j` on all of `Z(a)`.
fn exchange_target(space: &SpaceRef, pieces: &[Piece], a: &Word) -> Option<Word> {
    let first = meeting(pieces, a).next()?;
    let j = match first {
        Piece::Exch { dom, img } if dom.is_prefix_of(a) => return Some(img.concat(a.suffix_after(dom))),
        p => p.img().strip_suffix(p.dom().suffix_after(a))?,
    };
    if space.cont(&j) != space.cont(a) {
        return None;
    }
    let agrees = meeting(pieces, a).all(|p| {
        let u = p.dom().suffix_after(a);
        match p {
            Piece::Exch { img, .. } => j.concat(u) == *img,
            Piece::Point { img, .. } => space.collapse(&j.concat(u)) == *img,
        }
    });
    agrees.then_some(j)
}
