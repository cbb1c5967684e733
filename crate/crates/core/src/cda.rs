//! Chronicle deallocating automata.
//!
//! States carry a register count; `⋆` pushes a register holding a locally
//! fresh name, `close<i>` pops the top register after moving its value into
//! register `i`, and `u<i>` reads a name fresh for the current values and for
//! the chronicle of register `i`.
//!
//! Runs are explored with a visited set over canonical configurations. Only
//! membership in chronicles is ever tested, and only against names still to
//! be read, so histories are compared as sets restricted to those names.

use std::collections::{BTreeMap, BTreeSet, HashSet};
use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::nominal::{canonical_fresh, Chronicle, ExtantChronicle, Letter, Name, Sym, Word};

/// Transition labels.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Label {
    Eps,
    Letter(Letter),
    /// Read the current value of register `i`.
    Reg(usize),
    /// Allocate a new top register.
    Star,
    /// Read a name fresh for the current values and the chronicle of `i`.
    Under(usize),
    /// Pop the top register, moving its value into register `i`.
    Close(usize),
}

impl Label {
    /// Change in register count caused by the label.
    pub fn delta(&self) -> isize {
        match self {
            Label::Star => 1,
            Label::Close(_) => -1,
            _ => 0,
        }
    }

    fn index(&self) -> Option<usize> {
        match self {
            Label::Reg(i) | Label::Under(i) | Label::Close(i) => Some(*i),
            _ => None,
        }
    }

    fn consumes(&self) -> bool {
        matches!(self, Label::Letter(_) | Label::Reg(_) | Label::Under(_))
    }
}

impl fmt::Display for Label {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Label::Eps => write!(f, "eps"),
            Label::Letter(l) => write!(f, "{l}"),
            Label::Reg(i) => write!(f, "r{i}"),
            Label::Star => write!(f, "*"),
            Label::Under(i) => write!(f, "u{i}"),
            Label::Close(i) => write!(f, "close{i}"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct State {
    pub id: String,
    pub regs: usize,
    pub is_final: bool,
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord)]
pub struct Transition {
    pub from: usize,
    pub label: Label,
    pub to: usize,
}

/// An automaton; states are addressed by their position in `states`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Cda {
    pub states: Vec<State>,
    pub initial: usize,
    pub transitions: Vec<Transition>,
}

impl Cda {
    /// An automaton with a single non-final initial state.
    pub fn new(initial_id: &str, regs: usize) -> Cda {
        Cda {
            states: vec![State {
                id: initial_id.to_string(),
                regs,
                is_final: false,
            }],
            initial: 0,
            transitions: Vec::new(),
        }
    }

    pub fn add_state(&mut self, id: &str, regs: usize, is_final: bool) -> usize {
        self.states.push(State {
            id: id.to_string(),
            regs,
            is_final,
        });
        self.states.len() - 1
    }

    pub fn add_transition(&mut self, from: usize, label: Label, to: usize) {
        self.transitions.push(Transition { from, label, to });
    }

    pub fn state_index(&self, id: &str) -> Option<usize> {
        self.states.iter().position(|s| s.id == id)
    }

    pub fn max_regs(&self) -> usize {
        self.states.iter().map(|s| s.regs).max().unwrap_or(0)
    }

    pub fn letters(&self) -> BTreeSet<Letter> {
        self.transitions
            .iter()
            .filter_map(|t| match &t.label {
                Label::Letter(l) => Some(l.clone()),
                _ => None,
            })
            .collect()
    }

    /// Outgoing transitions per state.
    pub fn adjacency(&self) -> Vec<Vec<(Label, usize)>> {
        let mut adj = vec![Vec::new(); self.states.len()];
        for t in &self.transitions {
            if t.from < adj.len() {
                adj[t.from].push((t.label.clone(), t.to));
            }
        }
        adj
    }

    fn describe(&self, t: &Transition) -> String {
        let id = |i: usize| self.states.get(i).map(|s| s.id.as_str()).unwrap_or("?");
        format!("{} -{}-> {}", id(t.from), t.label, id(t.to))
    }
}

/// One failed condition found by [`validate`].
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Violation {
    pub message: String,
    /// Index of the offending transition, when there is one.
    pub transition: Option<usize>,
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.message)
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct ValidationReport {
    pub violations: Vec<Violation>,
}

impl ValidationReport {
    pub fn is_valid(&self) -> bool {
        self.violations.is_empty()
    }
}

impl fmt::Display for ValidationReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.violations.is_empty() {
            return write!(f, "valid");
        }
        let v: Vec<String> = self.violations.iter().map(|v| v.message.clone()).collect();
        write!(f, "{}", v.join("; "))
    }
}

/// Checks the structural conditions on register counts and label indices.
pub fn validate(a: &Cda) -> ValidationReport {
    validate_with_base(a, 0)
}

/// As [`validate`], for an automaton whose initial and final states hold
/// `base` registers and whose other states hold at least `base`.
pub fn validate_with_base(a: &Cda, base: usize) -> ValidationReport {
    let mut v = Vec::new();
    let mut push = |message: String, transition| v.push(Violation { message, transition });
    let mut ids = BTreeSet::new();
    for s in &a.states {
        if !ids.insert(&s.id) {
            push(format!("duplicate state id `{}`", s.id), None);
        }
        if s.regs < base {
            push(
                format!("state {} has {} registers, fewer than {base}", s.id, s.regs),
                None,
            );
        }
        if s.is_final && s.regs != base {
            push(
                format!("final state {} must have |q| = {base}, has {}", s.id, s.regs),
                None,
            );
        }
    }
    match a.states.get(a.initial) {
        None => push("initial state does not exist".to_string(), None),
        Some(s) if s.regs != base => push(
            format!("initial state {} must have |q| = {base}, has {}", s.id, s.regs),
            None,
        ),
        _ => {}
    }
    for (k, t) in a.transitions.iter().enumerate() {
        let (Some(from), Some(to)) = (a.states.get(t.from), a.states.get(t.to)) else {
            push(format!("transition {k} mentions an unknown state"), Some(k));
            continue;
        };
        let want = from.regs as isize + t.label.delta();
        if to.regs as isize != want {
            let rule = match t.label {
                Label::Star => "|q′| = |q| + 1",
                Label::Close(_) => "|q′| = |q| − 1",
                _ => "|q′| = |q|",
            };
            push(format!("{}: violates {rule}", a.describe(t)), Some(k));
        }
        if let Some(i) = t.label.index() {
            if i == 0 || i > from.regs {
                push(
                    format!("{}: index {i} outside 1..={}", a.describe(t), from.regs),
                    Some(k),
                );
            }
        }
    }
    ValidationReport { violations: v }
}

/// Automaton classes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum CdaClass {
    Cda,
    Ca,
    Da,
    A,
}

impl fmt::Display for CdaClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            CdaClass::Cda => "CDA♯",
            CdaClass::Ca => "CA♯",
            CdaClass::Da => "DA♯",
            CdaClass::A => "A♯",
        })
    }
}

/// Result of [`class_of`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ClassReport {
    pub class: CdaClass,
    /// No ε-transitions and at most one successor per state and label.
    pub deterministic: bool,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum CdaError {
    #[error("invalid automaton: {0}")]
    Invalid(String),
    #[error("resource limit: {0}")]
    ResourceLimit(String),
    #[error("malformed configuration: {0}")]
    MalformedConfig(String),
    #[error("schema violation: {0}")]
    Schema(String),
}

fn ensure_valid(a: &Cda) -> Result<(), CdaError> {
    let r = validate(a);
    if r.is_valid() {
        Ok(())
    } else {
        Err(CdaError::Invalid(r.to_string()))
    }
}

/// Chronicle automata close only the top register; deallocating automata
/// have no underlined reads; the class with freshness satisfies both.
pub fn class_of(a: &Cda) -> Result<ClassReport, CdaError> {
    ensure_valid(a)?;
    let close_below_top = a
        .transitions
        .iter()
        .any(|t| matches!(t.label, Label::Close(i) if i < a.states[t.from].regs));
    let under = a.transitions.iter().any(|t| matches!(t.label, Label::Under(_)));
    let class = match (close_below_top, under) {
        (false, false) => CdaClass::A,
        (false, true) => CdaClass::Ca,
        (true, false) => CdaClass::Da,
        (true, true) => CdaClass::Cda,
    };
    let mut seen = BTreeSet::new();
    let deterministic = a
        .transitions
        .iter()
        .all(|t| t.label != Label::Eps && seen.insert((t.from, t.label.clone())));
    Ok(ClassReport { class, deterministic })
}

/// A run configuration: state, input position and extant chronicle.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Configuration {
    pub state: usize,
    pub pos: usize,
    pub extant: ExtantChronicle,
}

fn malformed(msg: impl Into<String>) -> CdaError {
    CdaError::MalformedConfig(msg.into())
}

fn name_at(w: &[Sym], pos: usize) -> Option<&Name> {
    match w.get(pos) {
        Some(Sym::Name(n)) => Some(n),
        _ => None,
    }
}

/// Applies one transition to a configuration.
fn fire(
    label: &Label,
    to: usize,
    c: &Configuration,
    w: &[Sym],
    fresh: &Name,
    out: &mut Vec<Configuration>,
) -> Result<(), CdaError> {
    let e = &c.extant;
    let hcv = e.hcv();
    let wrap = |r: Result<ExtantChronicle, crate::nominal::NominalError>| r.map_err(|err| malformed(err.to_string()));
    match label {
        Label::Eps => out.push(Configuration {
            state: to,
            pos: c.pos,
            extant: e.clone(),
        }),
        Label::Letter(l) => {
            if w.get(c.pos) == Some(&Sym::Letter(l.clone())) {
                out.push(Configuration {
                    state: to,
                    pos: c.pos + 1,
                    extant: e.clone(),
                });
            }
        }
        Label::Reg(i) => {
            if name_at(w, c.pos) == hcv.get(i - 1) && name_at(w, c.pos).is_some() {
                out.push(Configuration {
                    state: to,
                    pos: c.pos + 1,
                    extant: e.clone(),
                });
            }
        }
        Label::Star => {
            let mut cands: Vec<Name> = Vec::new();
            for s in &w[c.pos..] {
                if let Sym::Name(n) = s {
                    if !hcv.contains(n) && !cands.contains(n) {
                        cands.push(n.clone());
                    }
                }
            }
            cands.push(fresh.clone());
            for n in cands {
                let extant = wrap(e.extend(std::slice::from_ref(&n)).push(Chronicle::single(n)))?;
                out.push(Configuration {
                    state: to,
                    pos: c.pos,
                    extant,
                });
            }
        }
        Label::Under(i) => {
            if let Some(n) = name_at(w, c.pos) {
                let chron = e.get(*i).map_err(|err| malformed(err.to_string()))?;
                if !hcv.contains(n) && !chron.contains(n) {
                    let mut cvs = hcv.clone();
                    cvs[i - 1] = n.clone();
                    let extant = wrap(e.extend(std::slice::from_ref(n)).with_hcv(&cvs))?;
                    out.push(Configuration {
                        state: to,
                        pos: c.pos + 1,
                        extant,
                    });
                }
            }
        }
        Label::Close(i) => {
            let (rest, top) = e.pop().ok_or_else(|| malformed("close with no registers"))?;
            let extant = if *i <= rest.len() {
                let mut cvs = rest.hcv();
                cvs[i - 1] = top.cv().clone();
                wrap(rest.with_hcv(&cvs))?
            } else {
                rest
            };
            out.push(Configuration {
                state: to,
                pos: c.pos,
                extant,
            });
        }
    }
    Ok(())
}

fn word_name_set(w: &[Sym]) -> BTreeSet<Name> {
    w.iter()
        .filter_map(|s| match s {
            Sym::Name(n) => Some(n.clone()),
            _ => None,
        })
        .collect()
}

/// All successors of `c` on input `w`.
pub fn step(a: &Cda, c: &Configuration, w: &[Sym]) -> Result<Vec<Configuration>, CdaError> {
    let st = a
        .states
        .get(c.state)
        .ok_or_else(|| malformed(format!("unknown state {}", c.state)))?;
    if c.extant.len() != st.regs {
        return Err(malformed(format!(
            "state {} has {} registers but the extant chronicle has {}",
            st.id,
            st.regs,
            c.extant.len()
        )));
    }
    if c.pos > w.len() {
        return Err(malformed("position past the end of the word"));
    }
    let mut avoid = word_name_set(w);
    avoid.extend(c.extant.hcv());
    let fresh = canonical_fresh(&avoid);
    let mut out = Vec::new();
    for t in a.transitions.iter().filter(|t| t.from == c.state) {
        fire(&t.label, t.to, c, w, &fresh, &mut out)?;
    }
    Ok(out)
}

type ConfigKey = (usize, usize, Vec<(Vec<Name>, Option<Name>)>);

/// Canonical key: histories restricted to names still to be read, and current
/// values outside those names forgotten.
fn config_key(c: &Configuration, suffix: &BTreeSet<Name>) -> ConfigKey {
    let regs = c
        .extant
        .entries()
        .iter()
        .map(|ch| {
            let mut h: Vec<Name> = ch.history().iter().filter(|n| suffix.contains(*n)).cloned().collect();
            h.sort();
            h.dedup();
            let cv = Some(ch.cv().clone()).filter(|n| suffix.contains(n));
            (h, cv)
        })
        .collect();
    (c.state, c.pos, regs)
}

/// Bound on consecutive non-consuming moves along one branch.
pub fn move_cap(a: &Cda, pool_size: usize) -> usize {
    10 * a.states.len() * (a.max_regs() + 1) * (pool_size + 2)
}

/// Does `a` accept `w`?
pub fn accept(a: &Cda, w: &[Sym]) -> Result<bool, CdaError> {
    ensure_valid(a)?;
    let names = word_name_set(w);
    let cap = move_cap(a, names.len());
    let suffixes: Vec<BTreeSet<Name>> = (0..=w.len()).map(|p| word_name_set(&w[p..])).collect();
    let adj = a.adjacency();
    let start = Configuration {
        state: a.initial,
        pos: 0,
        extant: ExtantChronicle::empty(),
    };
    let mut visited: HashSet<ConfigKey> = HashSet::new();
    let mut stack = vec![(start, 0usize)];
    while let Some((c, idle)) = stack.pop() {
        if !visited.insert(config_key(&c, &suffixes[c.pos])) {
            continue;
        }
        if c.pos == w.len() && a.states[c.state].is_final && c.extant.is_empty() {
            return Ok(true);
        }
        let mut avoid = names.clone();
        avoid.extend(c.extant.hcv());
        let fresh = canonical_fresh(&avoid);
        for (label, to) in &adj[c.state] {
            let mut out = Vec::new();
            fire(label, *to, &c, w, &fresh, &mut out)?;
            let idle = if label.consumes() { 0 } else { idle + 1 };
            if idle > cap {
                return Err(CdaError::ResourceLimit(format!(
                    "more than {cap} consecutive non-consuming moves"
                )));
            }
            stack.extend(out.into_iter().map(|c| (c, idle)));
        }
    }
    Ok(false)
}

/// A configuration of the prefix-driven search used by [`enumerate`]:
/// histories restricted to the pool, current values outside the pool renamed
/// to the reserved sequence in register order.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
struct PoolConfig {
    state: usize,
    regs: Vec<(BTreeSet<Name>, Name)>,
}

impl PoolConfig {
    fn canonical(state: usize, regs: Vec<(BTreeSet<Name>, Name)>, pool: &BTreeSet<Name>) -> Self {
        let mut next = 0;
        let regs = regs
            .into_iter()
            .map(|(h, cv)| {
                if pool.contains(&cv) {
                    (h, cv)
                } else {
                    next += 1;
                    (h, Name::Fresh(next - 1))
                }
            })
            .collect();
        PoolConfig { state, regs }
    }

    fn holds(&self, n: &Name) -> bool {
        self.regs.iter().any(|(_, cv)| cv == n)
    }
}

struct PoolSearch<'a> {
    a: &'a Cda,
    adj: Vec<Vec<(Label, usize)>>,
    pool: BTreeSet<Name>,
    cap: usize,
}

impl PoolSearch<'_> {
    fn closure(&self, seed: BTreeSet<PoolConfig>) -> Result<BTreeSet<PoolConfig>, CdaError> {
        let mut all = seed.clone();
        let mut frontier: Vec<PoolConfig> = seed.into_iter().collect();
        let mut rounds = 0;
        while !frontier.is_empty() {
            rounds += 1;
            if rounds > self.cap {
                return Err(CdaError::ResourceLimit(format!(
                    "more than {} consecutive non-consuming moves",
                    self.cap
                )));
            }
            let mut next = Vec::new();
            for c in &frontier {
                for (label, to) in &self.adj[c.state] {
                    for d in self.silent(c, label, *to) {
                        if all.insert(d.clone()) {
                            next.push(d);
                        }
                    }
                }
            }
            frontier = next;
        }
        Ok(all)
    }

    fn silent(&self, c: &PoolConfig, label: &Label, to: usize) -> Vec<PoolConfig> {
        match label {
            Label::Eps => vec![PoolConfig {
                state: to,
                regs: c.regs.clone(),
            }],
            Label::Star => {
                let mut out = Vec::new();
                let mut cands: Vec<Name> = self.pool.iter().filter(|n| !c.holds(n)).cloned().collect();
                let fresh = (0u32..).map(Name::Fresh).find(|n| !c.holds(n)).expect("infinite");
                cands.push(fresh);
                for n in cands {
                    let in_pool = self.pool.contains(&n);
                    let mut regs = c.regs.clone();
                    if in_pool {
                        for (h, _) in regs.iter_mut() {
                            h.insert(n.clone());
                        }
                    }
                    let h: BTreeSet<Name> = if in_pool { [n.clone()].into() } else { BTreeSet::new() };
                    regs.push((h, n));
                    out.push(PoolConfig::canonical(to, regs, &self.pool));
                }
                out
            }
            Label::Close(i) => {
                let mut regs = c.regs.clone();
                let Some((_, top)) = regs.pop() else { return vec![] };
                if *i <= regs.len() {
                    regs[i - 1].1 = top;
                }
                vec![PoolConfig::canonical(to, regs, &self.pool)]
            }
            _ => vec![],
        }
    }

    fn consume(&self, set: &BTreeSet<PoolConfig>, sym: &Sym) -> BTreeSet<PoolConfig> {
        let mut out = BTreeSet::new();
        for c in set {
            for (label, to) in &self.adj[c.state] {
                match (label, sym) {
                    (Label::Letter(l), Sym::Letter(s)) if l == s => {
                        out.insert(PoolConfig {
                            state: *to,
                            regs: c.regs.clone(),
                        });
                    }
                    (Label::Reg(i), Sym::Name(n)) if c.regs.get(i - 1).map(|r| &r.1) == Some(n) => {
                        out.insert(PoolConfig {
                            state: *to,
                            regs: c.regs.clone(),
                        });
                    }
                    (Label::Under(i), Sym::Name(n)) => {
                        let Some((hist, _)) = c.regs.get(i - 1) else { continue };
                        if c.holds(n) || hist.contains(n) {
                            continue;
                        }
                        let mut regs = c.regs.clone();
                        for (h, _) in regs.iter_mut() {
                            h.insert(n.clone());
                        }
                        regs[i - 1].1 = n.clone();
                        out.insert(PoolConfig::canonical(*to, regs, &self.pool));
                    }
                    _ => {}
                }
            }
        }
        out
    }

    fn accepting(&self, set: &BTreeSet<PoolConfig>) -> bool {
        set.iter().any(|c| c.regs.is_empty() && self.a.states[c.state].is_final)
    }
}

/// All accepted words of length at most `maxlen` over the automaton's
/// letters and `pool`.
pub fn enumerate(a: &Cda, pool: &[Name], maxlen: usize) -> Result<BTreeSet<Word>, CdaError> {
    ensure_valid(a)?;
    let pool_set: BTreeSet<Name> = pool.iter().cloned().collect();
    if pool_set.len() != pool.len() {
        return Err(CdaError::Invalid("pool has repeated names".to_string()));
    }
    let search = PoolSearch {
        a,
        adj: a.adjacency(),
        cap: move_cap(a, pool.len()),
        pool: pool_set,
    };
    let alphabet: Vec<Sym> = a
        .letters()
        .into_iter()
        .map(Sym::Letter)
        .chain(pool.iter().cloned().map(Sym::Name))
        .collect();
    let start = PoolConfig {
        state: a.initial,
        regs: Vec::new(),
    };
    let mut out = BTreeSet::new();
    let mut stack = vec![(Vec::new(), search.closure([start].into())?)];
    while let Some((w, set)) = stack.pop() {
        if search.accepting(&set) {
            out.insert(w.clone());
        }
        if w.len() == maxlen {
            continue;
        }
        for sym in &alphabet {
            let next = search.consume(&set, sym);
            if next.is_empty() {
                continue;
            }
            let mut w2 = w.clone();
            w2.push(sym.clone());
            stack.push((w2, search.closure(next)?));
        }
    }
    Ok(out)
}

/// Orders words by length, then lexicographically.
pub fn len_lex(a: &Word, b: &Word) -> std::cmp::Ordering {
    a.len().cmp(&b.len()).then_with(|| a.cmp(b))
}

/// The least word (length, then lexicographic) on which the bounded
/// languages differ, if any.
pub fn equiv_bounded(a: &Cda, b: &Cda, pool: &[Name], maxlen: usize) -> Result<Option<Word>, CdaError> {
    let la = enumerate(a, pool, maxlen)?;
    let lb = enumerate(b, pool, maxlen)?;
    Ok(la.symmetric_difference(&lb).min_by(|x, y| len_lex(x, y)).cloned())
}

/// Keeps only states on some path from the initial state to a final state;
/// the initial state is always kept.
pub fn trim(a: &Cda) -> Cda {
    let n = a.states.len();
    let mut fwd = vec![false; n];
    let mut bwd = vec![false; n];
    let mut stack = vec![a.initial];
    fwd[a.initial] = true;
    while let Some(q) = stack.pop() {
        for t in a.transitions.iter().filter(|t| t.from == q) {
            if !fwd[t.to] {
                fwd[t.to] = true;
                stack.push(t.to);
            }
        }
    }
    let mut stack: Vec<usize> = (0..n).filter(|&q| a.states[q].is_final).collect();
    for &q in &stack {
        bwd[q] = true;
    }
    while let Some(q) = stack.pop() {
        for t in a.transitions.iter().filter(|t| t.to == q) {
            if !bwd[t.from] {
                bwd[t.from] = true;
                stack.push(t.from);
            }
        }
    }
    let keep: Vec<bool> = (0..n).map(|q| q == a.initial || (fwd[q] && bwd[q])).collect();
    let mut remap = vec![usize::MAX; n];
    let mut states = Vec::new();
    for q in 0..n {
        if keep[q] {
            remap[q] = states.len();
            states.push(a.states[q].clone());
        }
    }
    let transitions = a
        .transitions
        .iter()
        .filter(|t| keep[t.from] && keep[t.to] && fwd[t.from] && bwd[t.to])
        .map(|t| Transition {
            from: remap[t.from],
            label: t.label.clone(),
            to: remap[t.to],
        })
        .collect();
    Cda {
        states,
        initial: remap[a.initial],
        transitions,
    }
}

/// Disjoint union with a fresh initial state and ε-edges to both initials.
pub fn union(a: &Cda, b: &Cda) -> Cda {
    let mut out = Cda::new("u0", 0);
    let embed = |x: &Cda, tag: &str, out: &mut Cda| -> usize {
        let base = out.states.len();
        for s in &x.states {
            out.add_state(&format!("{tag}{}", s.id), s.regs, s.is_final);
        }
        for t in &x.transitions {
            out.add_transition(base + t.from, t.label.clone(), base + t.to);
        }
        base + x.initial
    };
    let ia = embed(a, "l.", &mut out);
    let ib = embed(b, "r.", &mut out);
    out.add_transition(0, Label::Eps, ia);
    out.add_transition(0, Label::Eps, ib);
    out
}

#[derive(Serialize, Deserialize)]
struct JsonState {
    id: String,
    regs: usize,
    #[serde(rename = "final")]
    is_final: bool,
}

#[derive(Serialize, Deserialize)]
struct JsonLabel {
    kind: String,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    letter: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    index: Option<usize>,
}

#[derive(Serialize, Deserialize)]
struct JsonTransition {
    from: String,
    label: JsonLabel,
    to: String,
}

#[derive(Serialize, Deserialize)]
struct JsonCda {
    states: Vec<JsonState>,
    initial: String,
    transitions: Vec<JsonTransition>,
}

/// Serializes to the JSON interchange format.
pub fn to_json(a: &Cda) -> String {
    let label = |l: &Label| {
        let (kind, letter, index) = match l {
            Label::Eps => ("eps", None, None),
            Label::Letter(s) => ("letter", Some(s.to_string()), None),
            Label::Reg(i) => ("reg", None, Some(*i)),
            Label::Star => ("star", None, None),
            Label::Under(i) => ("under", None, Some(*i)),
            Label::Close(i) => ("close", None, Some(*i)),
        };
        JsonLabel {
            kind: kind.to_string(),
            letter,
            index,
        }
    };
    let j = JsonCda {
        states: a
            .states
            .iter()
            .map(|s| JsonState {
                id: s.id.clone(),
                regs: s.regs,
                is_final: s.is_final,
            })
            .collect(),
        initial: a.states[a.initial].id.clone(),
        transitions: a
            .transitions
            .iter()
            .map(|t| JsonTransition {
                from: a.states[t.from].id.clone(),
                label: label(&t.label),
                to: a.states[t.to].id.clone(),
            })
            .collect(),
    };
    serde_json::to_string_pretty(&j).expect("plain data serializes")
}

/// Parses the JSON interchange format.
pub fn from_json(text: &str) -> Result<Cda, CdaError> {
    let j: JsonCda = serde_json::from_str(text).map_err(|e| CdaError::Schema(e.to_string()))?;
    let mut index = BTreeMap::new();
    for (k, s) in j.states.iter().enumerate() {
        if index.insert(s.id.clone(), k).is_some() {
            return Err(CdaError::Schema(format!("duplicate state id `{}`", s.id)));
        }
    }
    let lookup = |id: &str| {
        index
            .get(id)
            .copied()
            .ok_or_else(|| CdaError::Schema(format!("unknown state id `{id}`")))
    };
    let initial = lookup(&j.initial)?;
    let mut transitions = Vec::new();
    for t in &j.transitions {
        let idx = || {
            t.label
                .index
                .ok_or_else(|| CdaError::Schema(format!("label `{}` needs an index", t.label.kind)))
        };
        let label = match t.label.kind.as_str() {
            "eps" => Label::Eps,
            "letter" => Label::Letter(Letter::new(
                t.label
                    .letter
                    .as_deref()
                    .ok_or_else(|| CdaError::Schema("label `letter` needs a letter".to_string()))?,
            )),
            "reg" => Label::Reg(idx()?),
            "star" => Label::Star,
            "under" => Label::Under(idx()?),
            "close" => Label::Close(idx()?),
            other => return Err(CdaError::Schema(format!("unknown label kind `{other}`"))),
        };
        transitions.push(Transition {
            from: lookup(&t.from)?,
            label,
            to: lookup(&t.to)?,
        });
    }
    Ok(Cda {
        states: j
            .states
            .into_iter()
            .map(|s| State {
                id: s.id,
                regs: s.regs,
                is_final: s.is_final,
            })
            .collect(),
        initial,
        transitions,
    })
}

/// Graphviz rendering with one rank per layer.
pub fn to_dot(a: &Cda) -> String {
    let mut s = String::from("digraph cda {\n  rankdir=LR;\n");
    for (k, st) in a.states.iter().enumerate() {
        let shape = if st.is_final { "doublecircle" } else { "circle" };
        let extra = if k == a.initial { ", penwidth=2" } else { "" };
        s.push_str(&format!(
            "  \"{}\" [label=\"{}|{}\", shape={shape}{extra}];\n",
            st.id, st.id, st.regs
        ));
    }
    let mut layers: BTreeMap<usize, Vec<&str>> = BTreeMap::new();
    for st in &a.states {
        layers.entry(st.regs).or_default().push(&st.id);
    }
    for (layer, ids) in &layers {
        let members: Vec<String> = ids.iter().map(|id| format!("\"{id}\";")).collect();
        s.push_str(&format!(
            "  subgraph layer{layer} {{ rank=same; {} }}\n",
            members.join(" ")
        ));
    }
    for t in &a.transitions {
        s.push_str(&format!(
            "  \"{}\" -> \"{}\" [label=\"{}\"];\n",
            a.states[t.from].id, a.states[t.to].id, t.label
        ));
    }
    s.push_str("}\n");
    s
}
