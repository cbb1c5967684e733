//! Context and language calculi.
//!
//! The context calculus annotates every subexpression with a pre-context (the
//! names in scope) and a post-context (an extant chronicle). The language
//! calculus then turns each resolved derivation into a schematic word: a word
//! over letters, names and placeholders together with freshness conditions.
//!
//! Two evaluation paths are provided. [`ctxc_derive`] and [`lngc_eval`]
//! build and evaluate explicit derivation trees; [`language_enumerate`] runs
//! the same rules over sets of partial results, pruning by length, which is
//! what makes bounded enumeration affordable.

use std::collections::{BTreeMap, BTreeSet, HashSet};
use std::fmt;

use thiserror::Error;

use crate::compiler::{binder_placeholder, binder_post, ContextTriple};
use crate::nominal::{
    apply_perm_word, format_word, perm_from_lists, transpose, Chronicle, ExtantChronicle, Name, NominalError, Perm,
    Sym, Word,
};
use crate::nre::{apply_perm_expr, check_wellformed, render, Nre};

/// Freshness conditions on placeholders.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum FreshCond {
    Neq(Name, Name),
    /// `p # S`: `p` differs from every element of `S`.
    Local(Name, Vec<Name>),
    /// `p #_i S`: `p` is fresh for the chronicle `S` of register `i`.
    Global(Name, usize, Vec<Name>),
    And(Vec<FreshCond>),
    /// The empty disjunction is falsity.
    Or(Vec<FreshCond>),
}

impl FreshCond {
    fn map_names(&self, f: &impl Fn(&Name) -> Name) -> FreshCond {
        let all = |s: &[Name]| s.iter().map(f).collect::<Vec<_>>();
        match self {
            FreshCond::Neq(a, b) => FreshCond::Neq(f(a), f(b)),
            FreshCond::Local(p, s) => FreshCond::Local(f(p), all(s)),
            FreshCond::Global(p, i, s) => FreshCond::Global(f(p), *i, all(s)),
            FreshCond::And(cs) => FreshCond::And(cs.iter().map(|c| c.map_names(f)).collect()),
            FreshCond::Or(cs) => FreshCond::Or(cs.iter().map(|c| c.map_names(f)).collect()),
        }
    }

    pub fn apply_perm(&self, p: &Perm) -> FreshCond {
        self.map_names(&|n| p.apply(n))
    }

    fn collect_names(&self, out: &mut Vec<Name>) {
        match self {
            FreshCond::Neq(a, b) => out.extend([a.clone(), b.clone()]),
            FreshCond::Local(p, s) | FreshCond::Global(p, _, s) => {
                out.push(p.clone());
                out.extend(s.iter().cloned());
            }
            FreshCond::And(cs) | FreshCond::Or(cs) => cs.iter().for_each(|c| c.collect_names(out)),
        }
    }
}

fn join_names(s: &[Name]) -> String {
    s.iter().map(|n| n.to_string()).collect::<Vec<_>>().join(" ")
}

impl fmt::Display for FreshCond {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let list = |cs: &[FreshCond], sep: &str| cs.iter().map(|c| c.to_string()).collect::<Vec<_>>().join(sep);
        match self {
            FreshCond::Neq(a, b) => write!(f, "{a} != {b}"),
            FreshCond::Local(p, s) => write!(f, "{p} # {}", join_names(s)),
            FreshCond::Global(p, i, s) => write!(f, "{p} #_{i} {}", join_names(s)),
            FreshCond::And(cs) => write!(f, "({})", list(cs, ", ")),
            FreshCond::Or(cs) if cs.is_empty() => write!(f, "⊥"),
            FreshCond::Or(cs) => write!(f, "({})", list(cs, " ∨ ")),
        }
    }
}

/// A word over letters, names and placeholders with a conjunction of
/// conditions.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct SchematicWord {
    pub word: Word,
    pub cond: Vec<FreshCond>,
}

impl SchematicWord {
    pub fn new(word: Word, cond: Vec<FreshCond>) -> SchematicWord {
        SchematicWord { word, cond }
    }

    /// The schematic word denoting the empty language.
    pub fn bottom() -> SchematicWord {
        SchematicWord {
            word: Vec::new(),
            cond: vec![FreshCond::Or(Vec::new())],
        }
    }

    pub fn is_bottom(&self) -> bool {
        self.cond
            .iter()
            .any(|c| matches!(c, FreshCond::Or(cs) if cs.is_empty()))
    }

    fn map_names(&self, f: &impl Fn(&Name) -> Name) -> SchematicWord {
        SchematicWord {
            word: self
                .word
                .iter()
                .map(|s| match s {
                    Sym::Name(n) => Sym::Name(f(n)),
                    other => other.clone(),
                })
                .collect(),
            cond: self.cond.iter().map(|c| c.map_names(f)).collect(),
        }
    }

    pub fn apply_perm(&self, p: &Perm) -> SchematicWord {
        SchematicWord {
            word: apply_perm_word(p, &self.word),
            cond: self.cond.iter().map(|c| c.apply_perm(p)).collect(),
        }
    }

    /// Placeholders in order of first occurrence in the word.
    pub fn bound_placeholders(&self) -> Vec<Name> {
        let mut out: Vec<Name> = Vec::new();
        for s in &self.word {
            if let Sym::Name(n) = s {
                if n.is_placeholder() && !out.contains(n) {
                    out.push(n.clone());
                }
            }
        }
        out
    }

    fn placeholders(&self) -> BTreeSet<Name> {
        let mut names = Vec::new();
        for c in &self.cond {
            c.collect_names(&mut names);
        }
        names.extend(self.bound_placeholders());
        names.into_iter().filter(|n| n.is_placeholder()).collect()
    }
}

impl fmt::Display for SchematicWord {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_bottom() {
            return write!(f, "[[ ∅ | ⊥ ]]");
        }
        let conds: Vec<String> = self.cond.iter().map(|c| c.to_string()).collect();
        write!(f, "[[ {} | {} ]]", format_word(&self.word), conds.join(", "))
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum LangError {
    #[error("context mismatch: {0}")]
    ContextMismatch(String),
    #[error("unresolved node: {0}")]
    Unresolved(String),
    #[error("resource limit: {0}")]
    ResourceLimit(String),
    #[error("ill-formed expression: {0}")]
    IllFormed(String),
    #[error(transparent)]
    Nominal(#[from] NominalError),
}

/// Context-calculus rule applied at a node.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CtxcRule {
    Sum1,
    Sum2,
    Cat,
    Star(usize),
    BindEq,
    BindNeq,
    Leaf,
}

impl fmt::Display for CtxcRule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CtxcRule::Sum1 => write!(f, "sum1"),
            CtxcRule::Sum2 => write!(f, "sum2"),
            CtxcRule::Cat => write!(f, "cat"),
            CtxcRule::Star(h) => write!(f, "star({h})"),
            CtxcRule::BindEq => write!(f, "bind="),
            CtxcRule::BindNeq => write!(f, "bind≠"),
            CtxcRule::Leaf => write!(f, "leaf"),
        }
    }
}

/// A context-calculus derivation with every sum and star resolved.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DerivationTree {
    pub triple: ContextTriple<Nre>,
    pub rule: CtxcRule,
    pub children: Vec<DerivationTree>,
}

/// Upper bound on the number of trees [`ctxc_derive`] will build.
pub const FOREST_LIMIT: usize = 100_000;

fn lookup(pre: &[Name], n: &Name) -> Result<usize, LangError> {
    pre.iter()
        .position(|x| x == n)
        .map(|i| i + 1)
        .ok_or_else(|| LangError::ContextMismatch(format!("`{n}` is not in the pre-context")))
}

/// Left-associated `e ∘ ⋯ ∘ e` with `h ≥ 1` factors.
fn unfold(e: &Nre, h: usize) -> Nre {
    (1..h).fold(e.clone(), |acc, _| Nre::concat(acc, e.clone()))
}

/// All derivations of `t`, unfolding each star at most `star_bound` times.
pub fn ctxc_derive(t: &ContextTriple<Nre>, star_bound: usize) -> Result<Vec<DerivationTree>, LangError> {
    let ContextTriple { pre, payload: e, post } = t;
    let node = |rule, children| DerivationTree {
        triple: t.clone(),
        rule,
        children,
    };
    let sub = |e: &Nre, post: &ExtantChronicle| {
        ctxc_derive(
            &ContextTriple {
                pre: pre.clone(),
                payload: e.clone(),
                post: post.clone(),
            },
            star_bound,
        )
    };
    let out = match e {
        Nre::One | Nre::Zero | Nre::Letter(_) => vec![node(CtxcRule::Leaf, vec![])],
        Nre::Name(n) | Nre::Under(n) => {
            lookup(pre, n)?;
            vec![node(CtxcRule::Leaf, vec![])]
        }
        Nre::Sum(l, r) => {
            let mut out: Vec<DerivationTree> = sub(l, post)?
                .into_iter()
                .map(|c| node(CtxcRule::Sum1, vec![c]))
                .collect();
            out.extend(sub(r, post)?.into_iter().map(|c| node(CtxcRule::Sum2, vec![c])));
            out
        }
        Nre::Concat(l, r) => {
            let left = sub(l, &ExtantChronicle::natural(pre)?)?;
            let right = sub(r, post)?;
            if left.len().saturating_mul(right.len()) > FOREST_LIMIT {
                return Err(LangError::ResourceLimit(format!(
                    "more than {FOREST_LIMIT} derivation trees"
                )));
            }
            let mut out = Vec::new();
            for a in &left {
                for b in &right {
                    out.push(node(CtxcRule::Cat, vec![a.clone(), b.clone()]));
                }
            }
            out
        }
        Nre::Star(body) => {
            let mut out = Vec::new();
            for h in 0..=star_bound {
                let unfolded = if h == 0 { Nre::One } else { unfold(body, h) };
                for c in sub(&unfolded, post)? {
                    out.push(node(CtxcRule::Star(h), vec![c]));
                }
                if out.len() > FOREST_LIMIT {
                    return Err(LangError::ResourceLimit(format!(
                        "more than {FOREST_LIMIT} derivation trees"
                    )));
                }
            }
            out
        }
        Nre::Binder { bind, body, close } => {
            let star = binder_placeholder(pre, e, post);
            let plain = close == bind;
            if !plain {
                lookup(pre, close)?;
            }
            let inner = ContextTriple {
                pre: pre.iter().cloned().chain([star.clone()]).collect(),
                payload: apply_perm_expr(&transpose(bind, &star), body),
                post: binder_post(post, &star, (!plain).then_some(close))?,
            };
            let rule = if plain { CtxcRule::BindEq } else { CtxcRule::BindNeq };
            ctxc_derive(&inner, star_bound)?
                .into_iter()
                .map(|c| node(rule, vec![c]))
                .collect()
        }
    };
    Ok(out)
}

/// Language-calculus rule applied at a node.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LngcRule {
    One,
    Zero,
    Letter,
    Name,
    Under,
    Cat,
    Bind,
    /// A resolved sum or star node, passing its child through.
    Pass(CtxcRule),
}

impl fmt::Display for LngcRule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            LngcRule::One => write!(f, "one"),
            LngcRule::Zero => write!(f, "zero"),
            LngcRule::Letter => write!(f, "letter"),
            LngcRule::Name => write!(f, "name"),
            LngcRule::Under => write!(f, "under"),
            LngcRule::Cat => write!(f, "cat"),
            LngcRule::Bind => write!(f, "bind"),
            LngcRule::Pass(r) => write!(f, "{r}"),
        }
    }
}

/// A derivation node annotated with its schematic word and post-context.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LngcNode {
    pub pre: Vec<Name>,
    pub sw: SchematicWord,
    pub post: ExtantChronicle,
    pub rule: LngcRule,
    pub children: Vec<LngcNode>,
}

/// `⋆ # C, ⋆ #_i ℂ(C)_i` for an underlined name with `C[i] = n`.
fn under_leaf(
    pre: &[Name],
    n: &Name,
    post: &ExtantChronicle,
    star: Name,
) -> Result<(SchematicWord, ExtantChronicle), LangError> {
    let i = lookup(pre, n)?;
    let cond = vec![
        FreshCond::Local(star.clone(), pre.to_vec()),
        FreshCond::Global(star.clone(), i, pre[i - 1..].to_vec()),
    ];
    let cvs = transpose(n, &star).apply_all(&post.hcv());
    let post = post.extend(std::slice::from_ref(&star)).with_hcv(&cvs)?;
    Ok((SchematicWord::new(vec![Sym::Name(star)], cond), post))
}

/// Concatenation of two schematic words computed in the same pre-context.
fn cat(
    pre: &[Name],
    (sw1, e1): (&SchematicWord, &ExtantChronicle),
    (sw2, e2): (&SchematicWord, &ExtantChronicle),
) -> Result<(SchematicWord, ExtantChronicle), LangError> {
    if sw1.is_bottom() || sw2.is_bottom() {
        return Ok((SchematicWord::bottom(), e1.clone()));
    }
    let pi = perm_from_lists(pre, &e1.hcv())?;
    fn update(c: &FreshCond, pi: &Perm, e1: &ExtantChronicle, k: usize) -> FreshCond {
        match c {
            FreshCond::Global(p, i, s) if *i <= k => {
                let mut wrt = e1.entries()[i - 1].history().to_vec();
                wrt.extend(pi.apply_all(s));
                FreshCond::Global(pi.apply(p), *i, wrt)
            }
            FreshCond::And(cs) => FreshCond::And(cs.iter().map(|c| update(c, pi, e1, k)).collect()),
            FreshCond::Or(cs) => FreshCond::Or(cs.iter().map(|c| update(c, pi, e1, k)).collect()),
            other => other.apply_perm(pi),
        }
    }
    let mut word = sw1.word.clone();
    word.extend(apply_perm_word(&pi, &sw2.word));
    let mut cond = sw1.cond.clone();
    cond.extend(sw2.cond.iter().map(|c| update(c, &pi, e1, pre.len())));
    let post = e1.extend_pointwise(&e2.apply_perm(&pi))?;
    Ok((SchematicWord::new(word, cond), post))
}

/// Abstracts the innermost name `n` of the pre-context `C + [n]`.
fn bind(
    pre: &[Name],
    n: &Name,
    (sw, e): (&SchematicWord, &ExtantChronicle),
    star: Name,
) -> Result<(SchematicWord, ExtantChronicle), LangError> {
    let (rest, _) = e
        .pop()
        .ok_or_else(|| LangError::ContextMismatch("binder body has an empty post-context".into()))?;
    if sw.is_bottom() {
        return Ok((SchematicWord::bottom(), rest));
    }
    let swap = transpose(n, &star);
    let body = sw.apply_perm(&swap);
    let mut cond = Vec::new();
    if !pre.is_empty() {
        cond.push(FreshCond::Local(star.clone(), pre.to_vec()));
    }
    cond.extend(body.cond);
    Ok((SchematicWord::new(body.word, cond), rest.apply_perm(&swap)))
}

struct Counter(u32);

impl Counter {
    fn next(&mut self) -> Name {
        self.0 += 1;
        Name::Placeholder(self.0)
    }
}

fn annotate(tree: &DerivationTree, counter: &mut Counter) -> Result<LngcNode, LangError> {
    let ContextTriple { pre, payload: e, post } = &tree.triple;
    let leaf = |sw: SchematicWord, post: ExtantChronicle, rule| LngcNode {
        pre: pre.clone(),
        sw,
        post,
        rule,
        children: vec![],
    };
    let child = |k: usize| {
        tree.children
            .get(k)
            .ok_or_else(|| LangError::Unresolved(format!("`{}` lacks a premise", render(e))))
    };
    match (tree.rule, e) {
        (CtxcRule::Leaf, Nre::One) => Ok(leaf(SchematicWord::new(vec![], vec![]), post.clone(), LngcRule::One)),
        (CtxcRule::Leaf, Nre::Zero) => Ok(leaf(SchematicWord::bottom(), post.clone(), LngcRule::Zero)),
        (CtxcRule::Leaf, Nre::Letter(l)) => Ok(leaf(
            SchematicWord::new(vec![Sym::Letter(l.clone())], vec![]),
            post.clone(),
            LngcRule::Letter,
        )),
        (CtxcRule::Leaf, Nre::Name(n)) => Ok(leaf(
            SchematicWord::new(vec![Sym::Name(n.clone())], vec![]),
            post.clone(),
            LngcRule::Name,
        )),
        (CtxcRule::Leaf, Nre::Under(n)) => {
            let (sw, post) = under_leaf(pre, n, post, counter.next())?;
            Ok(leaf(sw, post, LngcRule::Under))
        }
        (CtxcRule::Sum1 | CtxcRule::Sum2 | CtxcRule::Star(_), _) => {
            let c = annotate(child(0)?, counter)?;
            Ok(LngcNode {
                pre: pre.clone(),
                sw: c.sw.clone(),
                post: c.post.clone(),
                rule: LngcRule::Pass(tree.rule),
                children: vec![c],
            })
        }
        (CtxcRule::Cat, _) => {
            let l = annotate(child(0)?, counter)?;
            let r = annotate(child(1)?, counter)?;
            let (sw, post) = cat(pre, (&l.sw, &l.post), (&r.sw, &r.post))?;
            Ok(LngcNode {
                pre: pre.clone(),
                sw,
                post,
                rule: LngcRule::Cat,
                children: vec![l, r],
            })
        }
        (CtxcRule::BindEq | CtxcRule::BindNeq, _) => {
            let c = annotate(child(0)?, counter)?;
            let n = c
                .pre
                .last()
                .cloned()
                .ok_or_else(|| LangError::ContextMismatch("binder body has an empty pre-context".into()))?;
            let (sw, post) = bind(pre, &n, (&c.sw, &c.post), counter.next())?;
            Ok(LngcNode {
                pre: pre.clone(),
                sw,
                post,
                rule: LngcRule::Bind,
                children: vec![c],
            })
        }
        (CtxcRule::Leaf, _) => Err(LangError::Unresolved(render(e))),
    }
}

/// Evaluates a derivation bottom up, keeping every intermediate result.
pub fn lngc_annotate(tree: &DerivationTree) -> Result<LngcNode, LangError> {
    annotate(tree, &mut Counter(0))
}

/// The schematic word of a derivation.
pub fn lngc_eval(tree: &DerivationTree) -> Result<SchematicWord, LangError> {
    Ok(lngc_annotate(tree)?.sw)
}

fn format_pre(pre: &[Name]) -> String {
    let parts: Vec<String> = pre.iter().map(|n| n.to_string()).collect();
    format!("[{}]", parts.join(", "))
}

/// One line per node, root first, children indented.
pub fn dump_ctxc(tree: &DerivationTree) -> String {
    fn go(t: &DerivationTree, depth: usize, out: &mut String) {
        out.push_str(&format!(
            "{}{} ‡ {} ‡ {}  ({})\n",
            "  ".repeat(depth),
            format_pre(&t.triple.pre),
            render(&t.triple.payload),
            t.triple.post,
            t.rule
        ));
        for c in &t.children {
            go(c, depth + 1, out);
        }
    }
    let mut out = String::new();
    go(tree, 0, &mut out);
    out
}

/// One line per node of an evaluated derivation, root first.
pub fn dump_lngc(node: &LngcNode) -> String {
    fn go(t: &LngcNode, depth: usize, out: &mut String) {
        out.push_str(&format!(
            "{}{} ‡ {} ‡ {}  ({})\n",
            "  ".repeat(depth),
            format_pre(&t.pre),
            t.sw,
            t.post,
            t.rule
        ));
        for c in &t.children {
            go(c, depth + 1, out);
        }
    }
    let mut out = String::new();
    go(node, 0, &mut out);
    out
}

/// Every derivation of the closed expression `e` with its context tree, its
/// evaluated tree and the normal form of its schematic word.
pub fn derivation_report(e: &Nre, star_bound: usize) -> Result<String, LangError> {
    let report = check_wellformed(e);
    if !report.is_ok() {
        let msgs: Vec<String> = report.diagnostics.iter().map(|d| d.to_string()).collect();
        return Err(LangError::IllFormed(msgs.join("; ")));
    }
    let t = ContextTriple {
        pre: vec![],
        payload: e.clone(),
        post: ExtantChronicle::empty(),
    };
    let mut out = String::new();
    for (i, tree) in ctxc_derive(&t, star_bound)?.iter().enumerate() {
        let node = lngc_annotate(tree)?;
        out.push_str(&format!(
            "derivation {}
context:
",
            i + 1
        ));
        out.push_str(&dump_ctxc(tree));
        out.push_str(
            "language:
",
        );
        out.push_str(&dump_lngc(&node));
        out.push_str(&format!("normal form: {}\n", schematic_normalize(&node.sw)));
    }
    Ok(out)
}

#[derive(Debug, Clone, PartialEq, Eq)]
enum Val {
    Known(Name),
    /// A placeholder not occurring in the word: some name fresh for
    /// everything else.
    Ghost(Name),
}

fn eval_cond(c: &FreshCond, val: &impl Fn(&Name) -> Val) -> bool {
    let all_differ = |p: &Name, s: &[Name]| s.iter().all(|x| val(p) != val(x));
    match c {
        FreshCond::Neq(a, b) => val(a) != val(b),
        FreshCond::Local(p, s) | FreshCond::Global(p, _, s) => all_differ(p, s),
        FreshCond::And(cs) => cs.iter().all(|c| eval_cond(c, val)),
        FreshCond::Or(cs) => cs.iter().any(|c| eval_cond(c, val)),
    }
}

/// Does the concrete word `w` instantiate `sw`?
pub fn schematic_member(sw: &SchematicWord, w: &[Sym]) -> bool {
    if sw.word.len() != w.len() || sw.is_bottom() {
        return false;
    }
    let mut binding: BTreeMap<&Name, &Name> = BTreeMap::new();
    for (s, x) in sw.word.iter().zip(w) {
        match (s, x) {
            (Sym::Letter(a), Sym::Letter(b)) if a == b => {}
            (Sym::Name(p), Sym::Name(n)) if p.is_placeholder() => {
                if *binding.entry(p).or_insert(n) != n {
                    return false;
                }
            }
            (Sym::Name(a), Sym::Name(b)) if a == b => {}
            _ => return false,
        }
    }
    let val = |n: &Name| match binding.get(n) {
        Some(v) => Val::Known((*v).clone()),
        None if n.is_placeholder() => Val::Ghost(n.clone()),
        None => Val::Known(n.clone()),
    };
    sw.cond.iter().all(|c| eval_cond(c, &val))
}

/// Every condition as a set of unordered inequations; disjunctions are
/// ignored.
pub fn to_inequations(sw: &SchematicWord) -> BTreeSet<(Name, Name)> {
    fn go(c: &FreshCond, out: &mut BTreeSet<(Name, Name)>) {
        let mut add = |a: &Name, b: &Name| {
            if a != b {
                out.insert(if a < b {
                    (a.clone(), b.clone())
                } else {
                    (b.clone(), a.clone())
                });
            }
        };
        match c {
            FreshCond::Neq(a, b) => add(a, b),
            FreshCond::Local(p, s) | FreshCond::Global(p, _, s) => s.iter().for_each(|x| add(p, x)),
            FreshCond::And(cs) => cs.iter().for_each(|c| go(c, out)),
            FreshCond::Or(_) => {}
        }
    }
    let mut out = BTreeSet::new();
    sw.cond.iter().for_each(|c| go(c, &mut out));
    out
}

fn dedup_names(s: &[Name]) -> Vec<Name> {
    let mut out: Vec<Name> = Vec::new();
    for n in s {
        if !out.contains(n) {
            out.push(n.clone());
        }
    }
    out
}

/// Flattens conjunctions, deduplicates lists, drops vacuous conditions.
fn tidy(cs: &[FreshCond], out: &mut Vec<FreshCond>) {
    for c in cs {
        match c {
            FreshCond::And(inner) => tidy(inner, out),
            FreshCond::Local(p, s) => {
                let s = dedup_names(s);
                if !s.is_empty() {
                    out.push(FreshCond::Local(p.clone(), s));
                }
            }
            FreshCond::Global(p, i, s) => {
                let s = dedup_names(s);
                if !s.is_empty() {
                    out.push(FreshCond::Global(p.clone(), *i, s));
                }
            }
            FreshCond::Neq(a, b) => out.push(if a <= b {
                FreshCond::Neq(a.clone(), b.clone())
            } else {
                FreshCond::Neq(b.clone(), a.clone())
            }),
            FreshCond::Or(inner) => {
                let mut alts: Vec<FreshCond> = inner
                    .iter()
                    .map(|c| {
                        let mut v = Vec::new();
                        tidy(std::slice::from_ref(c), &mut v);
                        v.sort();
                        v.dedup();
                        if v.len() == 1 {
                            v.pop().unwrap()
                        } else {
                            FreshCond::And(v)
                        }
                    })
                    .collect();
                alts.sort();
                alts.dedup();
                out.push(FreshCond::Or(alts));
            }
        }
    }
}

fn sorted_conds(cs: &[FreshCond], f: &impl Fn(&Name) -> Name) -> Vec<FreshCond> {
    let mut renamed: Vec<FreshCond> = Vec::new();
    tidy(&cs.iter().map(|c| c.map_names(f)).collect::<Vec<_>>(), &mut renamed);
    renamed.sort();
    renamed.dedup();
    renamed
}

fn permutations(n: usize) -> Vec<Vec<usize>> {
    if n == 0 {
        return vec![vec![]];
    }
    let mut out = Vec::new();
    for p in permutations(n - 1) {
        for k in 0..=p.len() {
            let mut q = p.clone();
            q.insert(k, n - 1);
            out.push(q);
        }
    }
    out
}

/// Canonical form: placeholders in the word numbered by first occurrence,
/// the others numbered to make the sorted condition list least, lists
/// deduplicated, vacuous conditions dropped.
pub fn schematic_normalize(sw: &SchematicWord) -> SchematicWord {
    if sw.is_bottom() {
        return SchematicWord::bottom();
    }
    let bound = sw.bound_placeholders();
    let unbound: Vec<Name> = sw.placeholders().into_iter().filter(|p| !bound.contains(p)).collect();
    let k = bound.len() as u32;
    let base: BTreeMap<Name, Name> = bound
        .iter()
        .enumerate()
        .map(|(i, p)| (p.clone(), Name::Placeholder(i as u32)))
        .collect();
    let rename_with = |order: &[Name]| {
        let mut m = base.clone();
        for (j, p) in order.iter().enumerate() {
            m.insert(p.clone(), Name::Placeholder(k + j as u32));
        }
        move |n: &Name| m.get(n).cloned().unwrap_or_else(|| n.clone())
    };
    let best_order: Vec<Name> = if unbound.len() <= 6 {
        permutations(unbound.len())
            .into_iter()
            .map(|perm| perm.iter().map(|&i| unbound[i].clone()).collect::<Vec<_>>())
            .min_by_key(|order| sorted_conds(&sw.cond, &rename_with(order)))
            .unwrap_or_default()
    } else {
        let mut order = unbound.clone();
        for _ in 0..16 {
            let f = rename_with(&order);
            let conds = sorted_conds(&sw.cond, &f);
            let inverse: BTreeMap<Name, Name> = order.iter().map(|p| (f(p), p.clone())).collect();
            let mut seen = Vec::new();
            for c in &conds {
                let mut names = Vec::new();
                c.collect_names(&mut names);
                for n in names {
                    if let Some(orig) = inverse.get(&n) {
                        if !seen.contains(orig) {
                            seen.push(orig.clone());
                        }
                    }
                }
            }
            if seen == order {
                break;
            }
            order = seen;
        }
        order
    };
    let f = rename_with(&best_order);
    let renamed = sw.map_names(&f);
    SchematicWord {
        word: renamed.word,
        cond: sorted_conds(&sw.cond, &f),
    }
}

/// Evaluation over sets of partial results, used for bounded enumeration.
struct SetEval {
    maxlen: usize,
    /// Cap on star unfoldings; `None` iterates to a fixpoint.
    star_bound: Option<usize>,
    limit: usize,
}

type Partial = (SchematicWord, ExtantChronicle);

fn max_placeholder(p: &Partial) -> u32 {
    let mut names = Vec::new();
    for c in &p.0.cond {
        c.collect_names(&mut names);
    }
    names.extend(p.0.bound_placeholders());
    for ch in p.1.entries() {
        names.extend(ch.history().iter().cloned());
    }
    names
        .iter()
        .filter_map(|n| match n {
            Name::Placeholder(i) => Some(*i),
            _ => None,
        })
        .max()
        .unwrap_or(0)
}

fn map_post(post: &ExtantChronicle, f: &impl Fn(&Name) -> Name) -> ExtantChronicle {
    let entries = post
        .entries()
        .iter()
        .map(|ch| {
            let h = dedup_names(&ch.history().iter().map(f).collect::<Vec<_>>());
            Chronicle::new(h, f(ch.cv())).expect("injective renaming preserves validity")
        })
        .collect();
    ExtantChronicle::new(entries).expect("injective renaming preserves validity")
}

fn shift(p: &Partial, by: u32) -> Partial {
    let f = |n: &Name| match n {
        Name::Placeholder(i) => Name::Placeholder(i + by),
        other => other.clone(),
    };
    (p.0.map_names(&f), map_post(&p.1, &f))
}

fn strip_cond(c: &FreshCond, live: &impl Fn(&Name) -> bool) -> Option<FreshCond> {
    let keep = |s: &[Name]| s.iter().filter(|n| live(n)).cloned().collect::<Vec<_>>();
    match c {
        FreshCond::Neq(a, b) => (live(a) && live(b)).then(|| c.clone()),
        FreshCond::Local(p, s) => live(p).then(|| FreshCond::Local(p.clone(), keep(s))),
        FreshCond::Global(p, i, s) => live(p).then(|| FreshCond::Global(p.clone(), *i, keep(s))),
        FreshCond::And(cs) => Some(FreshCond::And(cs.iter().filter_map(|c| strip_cond(c, live)).collect())),
        FreshCond::Or(cs) => {
            let alts: Option<Vec<FreshCond>> = cs.iter().map(|c| strip_cond(c, live)).collect();
            alts.map(FreshCond::Or)
        }
    }
}

/// Drops placeholders that occur neither in the word nor in `keep`, along
/// with the conditions on them.
fn strip(sw: &SchematicWord, keep: &[Name]) -> SchematicWord {
    let bound = sw.bound_placeholders();
    let live = |n: &Name| !n.is_placeholder() || bound.contains(n) || keep.contains(n);
    SchematicWord {
        word: sw.word.clone(),
        cond: sw.cond.iter().filter_map(|c| strip_cond(c, &live)).collect(),
    }
}

/// [`strip`] for a complete schematic word: only placeholders in the word
/// are kept.
pub fn strip_unbound(sw: &SchematicWord) -> SchematicWord {
    if sw.is_bottom() {
        return SchematicWord::bottom();
    }
    strip(sw, &[])
}

/// Canonical form of a partial result: unreadable placeholders dropped,
/// lists deduplicated, placeholders renumbered by first occurrence.
fn canonical(p: &Partial) -> Partial {
    let cvs: Vec<Name> = p.1.hcv();
    let sw = strip(&p.0, &cvs);
    let bound = sw.bound_placeholders();
    let live = |n: &Name| !n.is_placeholder() || bound.contains(n) || cvs.contains(n);
    let mut order: Vec<Name> = bound.clone();
    for n in &cvs {
        if n.is_placeholder() && !order.contains(n) {
            order.push(n.clone());
        }
    }
    let map: BTreeMap<Name, Name> = order
        .iter()
        .enumerate()
        .map(|(i, n)| (n.clone(), Name::Placeholder(i as u32 + 1)))
        .collect();
    let f = |n: &Name| map.get(n).cloned().unwrap_or_else(|| n.clone());
    let word = sw.map_names(&f).word;
    let cond = sorted_conds(&sw.cond, &f);
    let entries =
        p.1.entries()
            .iter()
            .map(|ch| {
                let h: Vec<Name> = ch.history().iter().filter(|n| live(n)).map(&f).collect();
                Chronicle::new(dedup_names(&h), f(ch.cv())).expect("current values are kept")
            })
            .collect();
    let post = ExtantChronicle::new(entries).expect("renaming is injective");
    (SchematicWord { word, cond }, post)
}

impl SetEval {
    fn dedup(&self, v: Vec<Partial>) -> Result<Vec<Partial>, LangError> {
        let mut seen = HashSet::new();
        let mut out = Vec::new();
        for p in v {
            if p.0.is_bottom() || p.0.word.len() > self.maxlen {
                continue;
            }
            let c = canonical(&p);
            if seen.insert(c.clone()) {
                out.push(c);
            }
        }
        if out.len() > self.limit {
            return Err(LangError::ResourceLimit(format!(
                "more than {} partial schematic words",
                self.limit
            )));
        }
        Ok(out)
    }

    fn cat_all(&self, pre: &[Name], l: &[Partial], r: &[Partial]) -> Result<Vec<Partial>, LangError> {
        let mut out = Vec::new();
        for a in l {
            let by = max_placeholder(a);
            for b in r {
                if a.0.word.len() + b.0.word.len() > self.maxlen {
                    continue;
                }
                let b = shift(b, by);
                out.push(cat(pre, (&a.0, &a.1), (&b.0, &b.1))?);
            }
        }
        self.dedup(out)
    }

    fn eval(&self, pre: &[Name], e: &Nre, post: &ExtantChronicle) -> Result<Vec<Partial>, LangError> {
        let single = |sym: Sym| vec![(SchematicWord::new(vec![sym], vec![]), post.clone())];
        Ok(match e {
            Nre::One => vec![(SchematicWord::new(vec![], vec![]), post.clone())],
            Nre::Zero => vec![],
            Nre::Letter(l) => self.dedup(single(Sym::Letter(l.clone())))?,
            Nre::Name(n) => {
                lookup(pre, n)?;
                self.dedup(single(Sym::Name(n.clone())))?
            }
            Nre::Under(n) => self.dedup(vec![under_leaf(pre, n, post, Name::Placeholder(1))?])?,
            Nre::Sum(l, r) => {
                let mut v = self.eval(pre, l, post)?;
                v.extend(self.eval(pre, r, post)?);
                self.dedup(v)?
            }
            Nre::Concat(l, r) => {
                let left = self.eval(pre, l, &ExtantChronicle::natural(pre)?)?;
                if left.is_empty() {
                    return Ok(vec![]);
                }
                let right = self.eval(pre, r, post)?;
                self.cat_all(pre, &left, &right)?
            }
            Nre::Star(body) => {
                let s_left = self.eval(pre, body, &ExtantChronicle::natural(pre)?)?;
                let s_right = self.eval(pre, body, post)?;
                let mut out = vec![(SchematicWord::new(vec![], vec![]), post.clone())];
                out.extend(s_right.iter().cloned());
                let mut seen: HashSet<Partial> = s_left.iter().cloned().collect();
                let mut frontier = s_left.clone();
                let mut h = 1;
                while !frontier.is_empty() && self.star_bound.is_none_or(|b| h < b) {
                    h += 1;
                    out.extend(self.cat_all(pre, &frontier, &s_right)?);
                    frontier = self
                        .cat_all(pre, &frontier, &s_left)?
                        .into_iter()
                        .filter(|p| seen.insert(p.clone()))
                        .collect();
                    if seen.len() > self.limit {
                        return Err(LangError::ResourceLimit(format!(
                            "more than {} partial schematic words",
                            self.limit
                        )));
                    }
                }
                self.dedup(out)?
            }
            Nre::Binder { bind: b, body, close } => {
                let star = binder_placeholder(pre, e, post);
                let plain = close == b;
                if !plain {
                    lookup(pre, close)?;
                }
                let inner_pre: Vec<Name> = pre.iter().cloned().chain([star.clone()]).collect();
                let inner_post = binder_post(post, &star, (!plain).then_some(close))?;
                let renamed = apply_perm_expr(&transpose(b, &star), body);
                let mut out = Vec::new();
                for p in self.eval(&inner_pre, &renamed, &inner_post)? {
                    let fresh = Name::Placeholder(max_placeholder(&p) + 1);
                    out.push(bind(pre, &star, (&p.0, &p.1), fresh)?);
                }
                self.dedup(out)?
            }
        })
    }
}

/// Upper bound on partial results kept per subexpression.
pub const PARTIAL_LIMIT: usize = 200_000;

/// Normalized schematic words of length at most `maxlen` for an expression
/// in context. Stars are iterated to a fixpoint unless `star_bound` caps the
/// number of unfoldings.
pub fn schematic_words(
    t: &ContextTriple<Nre>,
    maxlen: usize,
    star_bound: Option<usize>,
) -> Result<Vec<SchematicWord>, LangError> {
    let ev = SetEval {
        maxlen,
        star_bound,
        limit: PARTIAL_LIMIT,
    };
    let mut out: Vec<SchematicWord> = ev
        .eval(&t.pre, &t.payload, &t.post)?
        .iter()
        .map(|(sw, _)| schematic_normalize(&strip_unbound(sw)))
        .collect();
    out.sort();
    out.dedup();
    Ok(out)
}

fn closed_words(e: &Nre, maxlen: usize, star_bound: Option<usize>) -> Result<Vec<SchematicWord>, LangError> {
    let report = check_wellformed(e);
    if !report.is_ok() {
        let msgs: Vec<String> = report.diagnostics.iter().map(|d| d.to_string()).collect();
        return Err(LangError::IllFormed(msgs.join("; ")));
    }
    schematic_words(
        &ContextTriple {
            pre: vec![],
            payload: e.clone(),
            post: ExtantChronicle::empty(),
        },
        maxlen,
        star_bound,
    )
}

/// Is `w` in the language of the closed expression `e`?
pub fn language_member(e: &Nre, w: &[Sym]) -> Result<bool, LangError> {
    let sws = closed_words(e, w.len(), None)?;
    Ok(sws.iter().any(|sw| schematic_member(sw, w)))
}

/// Words of length at most `maxlen` over the letters of `e` and `pool`.
pub fn language_enumerate(e: &Nre, pool: &[Name], maxlen: usize) -> Result<BTreeSet<Word>, LangError> {
    language_enumerate_with_bound(e, pool, maxlen, None)
}

/// As [`language_enumerate`] with an optional cap on star unfoldings.
pub fn language_enumerate_with_bound(
    e: &Nre,
    pool: &[Name],
    maxlen: usize,
    star_bound: Option<usize>,
) -> Result<BTreeSet<Word>, LangError> {
    let mut out = BTreeSet::new();
    for sw in closed_words(e, maxlen, star_bound)? {
        let slots = sw.bound_placeholders();
        let total = pool.len().pow(slots.len() as u32);
        for code in 0..total {
            let mut c = code;
            let assign: BTreeMap<&Name, &Name> = slots
                .iter()
                .map(|p| {
                    let n = &pool[c % pool.len()];
                    c /= pool.len();
                    (p, n)
                })
                .collect();
            let w: Word = sw
                .word
                .iter()
                .map(|s| match s {
                    Sym::Name(p) if assign.contains_key(p) => Sym::Name(assign[p].clone()),
                    other => other.clone(),
                })
                .collect();
            if schematic_member(&sw, &w) {
                out.insert(w);
            }
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::nominal::parse_word;
    use crate::nre::{parse, Alphabet};

    fn p(s: &str) -> Nre {
        parse(s, &Alphabet::SingleChars).unwrap()
    }

    fn ph(i: u32) -> Name {
        Name::Placeholder(i)
    }

    fn closed(e: &Nre) -> ContextTriple<Nre> {
        ContextTriple {
            pre: vec![],
            payload: e.clone(),
            post: ExtantChronicle::empty(),
        }
    }

    fn single_tree(s: &str) -> DerivationTree {
        let mut trees = ctxc_derive(&closed(&p(s)), 0).unwrap();
        assert_eq!(trees.len(), 1);
        trees.pop().unwrap()
    }

    #[test]
    fn one_is_a_single_node() {
        let trees = ctxc_derive(&closed(&Nre::One), 3).unwrap();
        assert_eq!(trees.len(), 1);
        assert!(trees[0].children.is_empty());
        assert_eq!(lngc_eval(&trees[0]).unwrap(), SchematicWord::new(vec![], vec![]));
    }

    #[test]
    fn star_unfoldings() {
        let n = Name::user("n");
        let t = ContextTriple {
            pre: vec![n.clone()],
            payload: Nre::star(Nre::Under(n.clone())),
            post: ExtantChronicle::natural(std::slice::from_ref(&n)).unwrap(),
        };
        let trees = ctxc_derive(&t, 2).unwrap();
        let hs: Vec<CtxcRule> = trees.iter().map(|t| t.rule).collect();
        assert_eq!(hs, vec![CtxcRule::Star(0), CtxcRule::Star(1), CtxcRule::Star(2)]);
    }

    #[test]
    fn refresh_context_tree() {
        let tree = single_tree("<$n._$n<$m.<$l.$m>$m>_$n>");
        let dump = dump_ctxc(&tree);
        assert!(dump.contains("[ν0] ‡ _$ν0 ‡ [ν0♮ν0]"));
        assert!(dump.contains("[ν0, ν1, ν2] ‡ $ν1 ‡ [ν0 ν1 ν2♮ν0, ν1 ν2♮ν2, ν2 ν1♮ν1]"));
        assert_eq!(dump.matches("(bind=)").count(), 2);
        assert_eq!(dump.matches("(bind≠)").count(), 1);
    }

    #[test]
    fn refresh_schematic_word() {
        let sw = lngc_eval(&single_tree("<$n._$n<$m.<$l.$m>$m>_$n>")).unwrap();
        let (s, s1, s2, s3, s4) = (ph(0), ph(1), ph(2), ph(3), ph(4));
        let expected = SchematicWord::new(
            vec![Sym::Name(s1.clone()), Sym::Name(s2.clone()), Sym::Name(s4.clone())],
            vec![
                FreshCond::Local(s1.clone(), vec![s.clone()]),
                FreshCond::Global(s1.clone(), 1, vec![s.clone()]),
                FreshCond::Local(s2.clone(), vec![s1.clone()]),
                FreshCond::Local(s3.clone(), vec![s1.clone(), s2.clone()]),
                FreshCond::Local(s4.clone(), vec![s1.clone()]),
                FreshCond::Global(s4.clone(), 1, vec![s.clone(), s1.clone(), s2.clone(), s3.clone()]),
            ],
        );
        assert_eq!(schematic_normalize(&sw), schematic_normalize(&expected));
        let w = |s: &str| parse_word(s).unwrap();
        assert!(schematic_member(&sw, &w("$n $m $o")));
        assert!(!schematic_member(&sw, &w("$n $m $m")));
        assert!(!schematic_member(&sw, &w("$n $m $n")));
    }

    #[test]
    fn mixed_inequations() {
        let sw = lngc_eval(&single_tree("<$n.$n<$m.$m<$l.$l>$m $m<$l._$n $l _$m>>>")).unwrap();
        let sw = schematic_normalize(&sw);
        let word: Vec<Name> = sw
            .word
            .iter()
            .map(|s| match s {
                Sym::Name(n) => n.clone(),
                _ => panic!("letter in word"),
            })
            .collect();
        assert_eq!(word, vec![ph(0), ph(1), ph(2), ph(2), ph(3), ph(4), ph(5)]);
        let letter = |c: char| ph("abcdef".find(c).unwrap() as u32);
        let expected: BTreeSet<(Name, Name)> = [
            "ab", "ac", "ad", "ae", "bc", "bd", "bf", "cd", "ce", "cf", "de", "df", "ef",
        ]
        .iter()
        .map(|s| {
            let mut cs = s.chars();
            (letter(cs.next().unwrap()), letter(cs.next().unwrap()))
        })
        .collect();
        assert_eq!(to_inequations(&sw), expected);
    }

    #[test]
    fn zero_annihilates() {
        let tree = single_tree("a0");
        assert!(lngc_eval(&tree).unwrap().is_bottom());
        assert!(language_enumerate(&p("a0"), &[], 3).unwrap().is_empty());
    }

    #[test]
    fn membership_basics() {
        let sw = SchematicWord::new(
            vec![Sym::Name(ph(1)), Sym::Name(ph(2))],
            vec![FreshCond::Neq(ph(1), ph(2))],
        );
        assert!(schematic_member(&sw, &parse_word("$x $y").unwrap()));
        assert!(!schematic_member(&sw, &parse_word("$x $x").unwrap()));
    }

    #[test]
    fn open_context_words() {
        let n = Name::user("n");
        let t = ContextTriple {
            pre: vec![n.clone()],
            payload: p("$n<$n.$n>$n"),
            post: ExtantChronicle::natural(std::slice::from_ref(&n)).unwrap(),
        };
        let sws = schematic_words(&t, 5, Some(1)).unwrap();
        assert_eq!(sws.len(), 1);
        let w = |s: &str| parse_word(s).unwrap();
        assert!(schematic_member(&sws[0], &w("$n $m $n")));
        assert!(!schematic_member(&sws[0], &w("$n $n $n")));
        assert!(!schematic_member(&sws[0], &w("$m $o $m")));
    }

    #[test]
    fn lses_language() {
        let e = p("ab<$n._$n*>");
        let w = |s: &str| parse_word(s).unwrap();
        assert!(language_member(&e, &w("a b $x $y")).unwrap());
        assert!(!language_member(&e, &w("a b $x $x")).unwrap());
    }

    #[test]
    fn successive_distinct_count() {
        let e = p("<$m.(<$n.$n>$m)*>");
        let pool: Vec<Name> = ["x", "y", "z"].iter().map(|s| Name::user(s)).collect();
        let words = language_enumerate(&e, &pool, 3).unwrap();
        assert_eq!(words.iter().filter(|w| w.len() == 3).count(), 12);
    }

    #[test]
    fn tree_and_set_paths_agree() {
        for s in ["<$n._$n<$m.<$l.$m>$m>_$n>", "(a+<$n.$n>)*b", "<$n.(_$n)*$n>"] {
            let e = p(s);
            let mut via_trees: Vec<SchematicWord> = ctxc_derive(&closed(&e), 3)
                .unwrap()
                .iter()
                .map(|t| schematic_normalize(&strip_unbound(&lngc_eval(t).unwrap())))
                .filter(|sw| !sw.is_bottom() && sw.word.len() <= 3)
                .collect();
            via_trees.sort();
            via_trees.dedup();
            let via_sets = schematic_words(&closed(&e), 3, None).unwrap();
            for sw in &via_trees {
                assert!(via_sets.contains(sw), "{s}: {sw} missing from set path");
            }
            for sw in &via_sets {
                assert!(via_trees.contains(sw), "{s}: {sw} missing from tree path");
            }
        }
    }

    #[test]
    fn normalize_is_idempotent_on_examples() {
        let sw = lngc_eval(&single_tree("<$n._$n<$m.<$l.$m>$m>_$n>")).unwrap();
        let once = schematic_normalize(&sw);
        assert_eq!(schematic_normalize(&once), once);
    }
}
