//! Names, letters, finitely supported permutations and chronicles.
//!
//! Names come in three disjoint families ordered one after the other:
//! user names (ordered by spelling), the reserved fresh sequence `ν0, ν1, …`
//! handed out by [`canonical_fresh`], and placeholders `⋆, ⋆1, ⋆2, …` used
//! by the symbolic calculi.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::sync::Arc;

use thiserror::Error;

/// Errors raised by the nominal primitives.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum NominalError {
    #[error("lists have different lengths ({0} and {1})")]
    LengthMismatch(usize, usize),
    #[error("name {0} is repeated")]
    Repeated(Name),
    #[error("cannot delete the current value {0} of a chronicle")]
    DeleteCurrentValue(Name),
    #[error("current value {0} does not occur in the history")]
    CvNotInHistory(Name),
    #[error("chronicle history is empty")]
    EmptyHistory,
    #[error("current value {0} is held by two chronicles")]
    DuplicateCurrentValue(Name),
    #[error("register {index} out of range for {len} chronicles")]
    IndexOutOfRange { index: usize, len: usize },
    #[error("bad word token `{0}`")]
    BadToken(String),
}

/// An atom of the name universe.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Name {
    /// A name written by the user.
    User(Arc<str>),
    /// The `i`-th element of the reserved fresh sequence.
    Fresh(u32),
    /// A placeholder of a schematic word.
    Placeholder(u32),
}

impl Name {
    pub fn user(s: &str) -> Name {
        Name::User(Arc::from(s))
    }

    pub fn is_placeholder(&self) -> bool {
        matches!(self, Name::Placeholder(_))
    }
}

impl fmt::Display for Name {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Name::User(s) => write!(f, "{s}"),
            Name::Fresh(i) => write!(f, "ν{i}"),
            Name::Placeholder(0) => write!(f, "⋆"),
            Name::Placeholder(i) => write!(f, "⋆{i}"),
        }
    }
}

/// A letter of the finite alphabet.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Letter(pub Arc<str>);

impl Letter {
    pub fn new(s: &str) -> Letter {
        Letter(Arc::from(s))
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }
}

impl fmt::Display for Letter {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

/// One position of a word: a letter or a name. Letters sort first.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Sym {
    Letter(Letter),
    Name(Name),
}

impl fmt::Display for Sym {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Sym::Letter(l) => write!(f, "{l}"),
            Sym::Name(n @ Name::Placeholder(_)) => write!(f, "{n}"),
            Sym::Name(n) => write!(f, "${n}"),
        }
    }
}

/// A word over letters and names.
pub type Word = Vec<Sym>;

/// Parses whitespace separated tokens: bare letters and `$`-prefixed names.
pub fn parse_word(text: &str) -> Result<Word, NominalError> {
    text.split_whitespace()
        .map(|tok| {
            let ok = |s: &str| !s.is_empty() && s.chars().all(|c| c.is_ascii_alphanumeric() || c == '_' || c == '\'');
            match tok.strip_prefix('$') {
                Some(n) if ok(n) => Ok(Sym::Name(Name::user(n))),
                None if ok(tok) && tok.starts_with(|c: char| c.is_ascii_alphabetic()) => {
                    Ok(Sym::Letter(Letter::new(tok)))
                }
                _ => Err(NominalError::BadToken(tok.to_string())),
            }
        })
        .collect()
}

/// Renders a word in the syntax accepted by [`parse_word`]; `ε` when empty.
pub fn format_word(w: &[Sym]) -> String {
    if w.is_empty() {
        return "ε".to_string();
    }
    w.iter().map(|s| s.to_string()).collect::<Vec<_>>().join(" ")
}

/// Names occurring in a word, in order of first occurrence.
pub fn word_names(w: &[Sym]) -> Vec<Name> {
    let mut seen = BTreeSet::new();
    let mut out = Vec::new();
    for s in w {
        if let Sym::Name(n) = s {
            if seen.insert(n.clone()) {
                out.push(n.clone());
            }
        }
    }
    out
}

/// A finitely supported permutation of names.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct Perm {
    map: BTreeMap<Name, Name>,
}

impl Perm {
    pub fn identity() -> Perm {
        Perm::default()
    }

    /// Builds a permutation from explicit image pairs, dropping fixed points.
    /// The caller guarantees bijectivity.
    fn from_pairs(pairs: impl IntoIterator<Item = (Name, Name)>) -> Perm {
        Perm {
            map: pairs.into_iter().filter(|(a, b)| a != b).collect(),
        }
    }

    pub fn apply(&self, n: &Name) -> Name {
        self.map.get(n).cloned().unwrap_or_else(|| n.clone())
    }

    /// The names moved by the permutation.
    pub fn support(&self) -> impl Iterator<Item = &Name> {
        self.map.keys()
    }

    pub fn is_identity(&self) -> bool {
        self.map.is_empty()
    }

    /// `self ∘ other`: apply `other` first.
    pub fn compose(&self, other: &Perm) -> Perm {
        let dom: BTreeSet<Name> = self.map.keys().chain(other.map.keys()).cloned().collect();
        Perm::from_pairs(dom.into_iter().map(|n| {
            let img = self.apply(&other.apply(&n));
            (n, img)
        }))
    }

    pub fn inverse(&self) -> Perm {
        Perm::from_pairs(self.map.iter().map(|(a, b)| (b.clone(), a.clone())))
    }

    pub fn apply_all(&self, ns: &[Name]) -> Vec<Name> {
        ns.iter().map(|n| self.apply(n)).collect()
    }
}

impl fmt::Display for Perm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.map.is_empty() {
            return write!(f, "id");
        }
        let parts: Vec<String> = self.map.iter().map(|(a, b)| format!("{a}↦{b}")).collect();
        write!(f, "{{{}}}", parts.join(", "))
    }
}

/// The transposition swapping `a` and `b`.
pub fn transpose(a: &Name, b: &Name) -> Perm {
    Perm::from_pairs([(a.clone(), b.clone()), (b.clone(), a.clone())])
}

fn check_distinct(ns: &[Name]) -> Result<(), NominalError> {
    let mut seen = BTreeSet::new();
    for n in ns {
        if !seen.insert(n) {
            return Err(NominalError::Repeated(n.clone()));
        }
    }
    Ok(())
}

/// Extends `N[i] ↦ M[i]` to a permutation that is a bijection on `N ∪ M`.
///
/// Elements of `N ∪ M` left without an image are sent, in ascending order,
/// to the ascending elements left without a preimage.
pub fn perm_from_lists(n: &[Name], m: &[Name]) -> Result<Perm, NominalError> {
    if n.len() != m.len() {
        return Err(NominalError::LengthMismatch(n.len(), m.len()));
    }
    check_distinct(n)?;
    check_distinct(m)?;
    let dom: BTreeSet<&Name> = n.iter().collect();
    let cod: BTreeSet<&Name> = m.iter().collect();
    let no_image = cod.iter().filter(|x| !dom.contains(**x));
    let no_preimage = dom.iter().filter(|x| !cod.contains(**x));
    let completion = no_image.zip(no_preimage).map(|(a, b)| ((*a).clone(), (*b).clone()));
    Ok(Perm::from_pairs(
        n.iter().cloned().zip(m.iter().cloned()).chain(completion),
    ))
}

/// Applies a permutation to every name of a word; letters are fixed.
pub fn apply_perm_word(p: &Perm, w: &[Sym]) -> Word {
    w.iter()
        .map(|s| match s {
            Sym::Name(n) => Sym::Name(p.apply(n)),
            l => l.clone(),
        })
        .collect()
}

/// A name history with a designated current value.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Chronicle {
    history: Vec<Name>,
    cv: Name,
}

impl Chronicle {
    pub fn new(history: Vec<Name>, cv: Name) -> Result<Chronicle, NominalError> {
        if history.is_empty() {
            return Err(NominalError::EmptyHistory);
        }
        if !history.contains(&cv) {
            return Err(NominalError::CvNotInHistory(cv));
        }
        Ok(Chronicle { history, cv })
    }

    /// The chronicle `[n]` with current value `n`.
    pub fn single(n: Name) -> Chronicle {
        Chronicle {
            history: vec![n.clone()],
            cv: n,
        }
    }

    pub fn history(&self) -> &[Name] {
        &self.history
    }

    pub fn cv(&self) -> &Name {
        &self.cv
    }

    pub fn contains(&self, n: &Name) -> bool {
        self.history.contains(n)
    }

    /// `s@t`.
    pub fn extend(&self, t: &[Name]) -> Chronicle {
        let mut history = self.history.clone();
        history.extend_from_slice(t);
        Chronicle {
            history,
            cv: self.cv.clone(),
        }
    }

    /// `s∖t`.
    pub fn delete(&self, t: &[Name]) -> Result<Chronicle, NominalError> {
        if t.contains(&self.cv) {
            return Err(NominalError::DeleteCurrentValue(self.cv.clone()));
        }
        Ok(Chronicle {
            history: self.history.iter().filter(|n| !t.contains(n)).cloned().collect(),
            cv: self.cv.clone(),
        })
    }

    pub fn apply_perm(&self, p: &Perm) -> Chronicle {
        Chronicle {
            history: p.apply_all(&self.history),
            cv: p.apply(&self.cv),
        }
    }

    /// Replaces the current value; it must already occur in the history.
    pub fn with_cv(&self, cv: Name) -> Result<Chronicle, NominalError> {
        Chronicle::new(self.history.clone(), cv)
    }

    /// Same chronicle with its history reduced to distinct names in order of
    /// first occurrence.
    pub fn dedup(&self) -> Chronicle {
        let mut seen = BTreeSet::new();
        Chronicle {
            history: self
                .history
                .iter()
                .filter(|n| seen.insert((*n).clone()))
                .cloned()
                .collect(),
            cv: self.cv.clone(),
        }
    }
}

impl fmt::Display for Chronicle {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let h: Vec<String> = self.history.iter().map(|n| n.to_string()).collect();
        write!(f, "{}♮{}", h.join(" "), self.cv)
    }
}

/// A list of chronicles with pairwise distinct current values.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Default)]
pub struct ExtantChronicle {
    entries: Vec<Chronicle>,
}

impl ExtantChronicle {
    pub fn new(entries: Vec<Chronicle>) -> Result<ExtantChronicle, NominalError> {
        let mut seen = BTreeSet::new();
        for c in &entries {
            if !seen.insert(c.cv.clone()) {
                return Err(NominalError::DuplicateCurrentValue(c.cv.clone()));
            }
        }
        Ok(ExtantChronicle { entries })
    }

    pub fn empty() -> ExtantChronicle {
        ExtantChronicle::default()
    }

    /// The natural extant chronicle of a pre-context: entry `i` has history
    /// `C[i] … C[k]` and current value `C[i]`.
    pub fn natural(c: &[Name]) -> Result<ExtantChronicle, NominalError> {
        check_distinct(c)?;
        Ok(ExtantChronicle {
            entries: (0..c.len())
                .map(|i| Chronicle {
                    history: c[i..].to_vec(),
                    cv: c[i].clone(),
                })
                .collect(),
        })
    }

    pub fn entries(&self) -> &[Chronicle] {
        &self.entries
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn hcv(&self) -> Vec<Name> {
        self.entries.iter().map(|c| c.cv.clone()).collect()
    }

    /// Chronicle of register `i` (1-based).
    pub fn get(&self, i: usize) -> Result<&Chronicle, NominalError> {
        if i == 0 || i > self.entries.len() {
            return Err(NominalError::IndexOutOfRange {
                index: i,
                len: self.entries.len(),
            });
        }
        Ok(&self.entries[i - 1])
    }

    /// `E@t`: extends every chronicle.
    pub fn extend(&self, t: &[Name]) -> ExtantChronicle {
        ExtantChronicle {
            entries: self.entries.iter().map(|c| c.extend(t)).collect(),
        }
    }

    /// `E∖t`, element-wise.
    pub fn delete(&self, t: &[Name]) -> Result<ExtantChronicle, NominalError> {
        Ok(ExtantChronicle {
            entries: self.entries.iter().map(|c| c.delete(t)).collect::<Result<_, _>>()?,
        })
    }

    /// `E + E'`.
    pub fn plus(&self, other: &ExtantChronicle) -> Result<ExtantChronicle, NominalError> {
        let mut entries = self.entries.clone();
        entries.extend(other.entries.iter().cloned());
        ExtantChronicle::new(entries)
    }

    /// Pushes one chronicle on top.
    pub fn push(&self, c: Chronicle) -> Result<ExtantChronicle, NominalError> {
        self.plus(&ExtantChronicle { entries: vec![c] })
    }

    /// Splits off the top chronicle.
    pub fn pop(&self) -> Option<(ExtantChronicle, Chronicle)> {
        let mut entries = self.entries.clone();
        let top = entries.pop()?;
        Some((ExtantChronicle { entries }, top))
    }

    /// Pointwise extension: chronicle `i` of `self` followed by chronicle `i`
    /// of `other`, keeping the current values of `other`.
    pub fn extend_pointwise(&self, other: &ExtantChronicle) -> Result<ExtantChronicle, NominalError> {
        if self.len() != other.len() {
            return Err(NominalError::LengthMismatch(self.len(), other.len()));
        }
        let entries = self
            .entries
            .iter()
            .zip(&other.entries)
            .map(|(a, b)| {
                let mut history = a.history.clone();
                history.extend_from_slice(&b.history);
                Chronicle {
                    history,
                    cv: b.cv.clone(),
                }
            })
            .collect();
        ExtantChronicle::new(entries)
    }

    /// Replaces the list of current values.
    pub fn with_hcv(&self, cvs: &[Name]) -> Result<ExtantChronicle, NominalError> {
        if cvs.len() != self.len() {
            return Err(NominalError::LengthMismatch(self.len(), cvs.len()));
        }
        let entries = self
            .entries
            .iter()
            .zip(cvs)
            .map(|(c, v)| c.with_cv(v.clone()))
            .collect::<Result<_, _>>()?;
        ExtantChronicle::new(entries)
    }

    pub fn apply_perm(&self, p: &Perm) -> ExtantChronicle {
        ExtantChronicle {
            entries: self.entries.iter().map(|c| c.apply_perm(p)).collect(),
        }
    }

    /// Every name mentioned by some chronicle.
    pub fn names(&self) -> BTreeSet<Name> {
        self.entries.iter().flat_map(|c| c.history.iter().cloned()).collect()
    }
}

impl fmt::Display for ExtantChronicle {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.entries.iter().map(|c| c.to_string()).collect();
        write!(f, "[{}]", parts.join(", "))
    }
}

/// The least reserved fresh name not in `avoid`.
pub fn canonical_fresh(avoid: &BTreeSet<Name>) -> Name {
    (0u32..)
        .map(Name::Fresh)
        .find(|n| !avoid.contains(n))
        .expect("reserved sequence is infinite")
}

#[cfg(test)]
mod tests {
    use super::*;

    fn n(s: &str) -> Name {
        Name::user(s)
    }

    #[test]
    fn transposition_basics() {
        assert!(transpose(&n("n"), &n("n")).is_identity());
        let t = transpose(&n("n"), &n("m"));
        assert_eq!(t.apply(&n("n")), n("m"));
        assert_eq!(t.apply(&n("m")), n("n"));
        assert_eq!(t.apply(&n("k")), n("k"));
    }

    #[test]
    fn perm_from_lists_examples() {
        assert!(perm_from_lists(&[], &[]).unwrap().is_identity());
        let p = perm_from_lists(&[n("a")], &[n("b")]).unwrap();
        assert_eq!(p.apply(&n("a")), n("b"));
        assert_eq!(p.apply(&n("b")), n("a"));
        let p = perm_from_lists(&[n("a"), n("b")], &[n("b"), n("c")]).unwrap();
        assert_eq!(p.apply(&n("a")), n("b"));
        assert_eq!(p.apply(&n("b")), n("c"));
        assert_eq!(p.apply(&n("c")), n("a"));
    }

    #[test]
    fn perm_from_lists_errors() {
        assert_eq!(perm_from_lists(&[n("a")], &[]), Err(NominalError::LengthMismatch(1, 0)));
        assert_eq!(
            perm_from_lists(&[n("a"), n("a")], &[n("b"), n("c")]),
            Err(NominalError::Repeated(n("a")))
        );
        assert!(perm_from_lists(&[n("a"), n("b")], &[n("c"), n("c")]).is_err());
    }

    #[test]
    fn word_action() {
        let w = parse_word("a $n1 $n2").unwrap();
        assert_eq!(apply_perm_word(&Perm::identity(), &w), w);
        let t = transpose(&n("n1"), &n("n2"));
        let w = parse_word("$n1 $n2 $n1").unwrap();
        assert_eq!(apply_perm_word(&t, &w), parse_word("$n2 $n1 $n2").unwrap());
        let w = parse_word("a b").unwrap();
        assert_eq!(apply_perm_word(&t, &w), w);
    }

    #[test]
    fn chronicle_extension() {
        let s = Chronicle::single(n("n"));
        assert_eq!(s.extend(&[]), s);
        let s = Chronicle::new(vec![n("a"), n("b")], n("a")).unwrap();
        let t = s.extend(&[n("c")]);
        assert_eq!(t.history(), &[n("a"), n("b"), n("c")]);
        assert_eq!(t.cv(), &n("a"));
        let e = ExtantChronicle::new(vec![s.clone(), Chronicle::single(n("b2"))]).unwrap();
        let e2 = e.extend(&[n("x")]);
        assert!(e2.entries().iter().all(|c| c.history().last() == Some(&n("x"))));
        assert_eq!(e2.hcv(), e.hcv());
    }

    #[test]
    fn chronicle_deletion() {
        let s = Chronicle::new(vec![n("a"), n("b"), n("a")], n("b")).unwrap();
        let d = s.delete(&[n("a")]).unwrap();
        assert_eq!(d.history(), &[n("b")]);
        assert_eq!(d.cv(), &n("b"));
        assert_eq!(s.delete(&[]).unwrap(), s);
        assert_eq!(
            Chronicle::single(n("a")).delete(&[n("a")]),
            Err(NominalError::DeleteCurrentValue(n("a")))
        );
    }

    #[test]
    fn canonical_fresh_sequence() {
        assert_eq!(canonical_fresh(&BTreeSet::new()), Name::Fresh(0));
        let avoid: BTreeSet<Name> = [Name::Fresh(0)].into_iter().collect();
        assert_eq!(canonical_fresh(&avoid), Name::Fresh(1));
    }

    #[test]
    fn name_order_families() {
        assert!(n("zzz") < Name::Fresh(0));
        assert!(Name::Fresh(99) < Name::Placeholder(0));
        assert!(n("a") < n("b"));
    }

    #[test]
    fn natural_chronicle() {
        let e = ExtantChronicle::natural(&[n("a"), n("b"), n("c")]).unwrap();
        assert_eq!(e.to_string(), "[a b c♮a, b c♮b, c♮c]");
        assert!(ExtantChronicle::natural(&[n("a"), n("a")]).is_err());
    }

    #[test]
    fn word_syntax() {
        let w = parse_word("a b $n1 $n2").unwrap();
        assert_eq!(w.len(), 4);
        assert_eq!(format_word(&w), "a b $n1 $n2");
        assert!(parse_word("$").is_err());
        assert!(parse_word("1x").is_err());
        assert_eq!(format_word(&[]), "ε");
    }
}
