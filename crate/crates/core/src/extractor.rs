//! Automata back to expressions.
//!
//! States are grouped into layers by register count. Within a layer an
//! automaton is classical once every excursion to the layer above is seen as
//! a single edge: a `⋆` edge into the upper layer, a path there, and a
//! `close<i>` edge back down read together as `⟨n_{j+1} R⟩^{n_i}`. Layers are
//! therefore eliminated from the top down.

use std::collections::{BTreeMap, BTreeSet, VecDeque};

use thiserror::Error;

use crate::cda::{trim, validate, Cda, Label};
use crate::nominal::Name;
use crate::nre::Nre;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ExtractError {
    #[error("invalid automaton: {0}")]
    Invalid(String),
}

fn ensure_valid(a: &Cda) -> Result<(), ExtractError> {
    let r = validate(a);
    if r.is_valid() {
        Ok(())
    } else {
        Err(ExtractError::Invalid(r.to_string()))
    }
}

/// States of each layer, indexed by register count.
pub fn layers(a: &Cda) -> Vec<Vec<usize>> {
    let mut out = vec![Vec::new(); a.max_regs() + 1];
    for (q, s) in a.states.iter().enumerate() {
        out[s.regs].push(q);
    }
    out
}

fn eps_closure(a: &Cda, adj: &[Vec<(Label, usize)>], seed: BTreeSet<usize>) -> BTreeSet<usize> {
    let mut out = seed.clone();
    let mut stack: Vec<usize> = seed.into_iter().collect();
    while let Some(q) = stack.pop() {
        for (l, to) in &adj[q] {
            if *l == Label::Eps && a.states[*to].regs == a.states[q].regs && out.insert(*to) {
                stack.push(*to);
            }
        }
    }
    out
}

/// Subset construction with `⋆` and each `close<i>` treated as ordinary
/// symbols; every subset lies within one layer.
pub fn determinize_layers(a: &Cda) -> Result<Cda, ExtractError> {
    ensure_valid(a)?;
    let adj = a.adjacency();
    let start = eps_closure(a, &adj, [a.initial].into());
    let mut index: BTreeMap<BTreeSet<usize>, usize> = BTreeMap::new();
    let mut sets = vec![start.clone()];
    index.insert(start, 0);
    let mut edges = Vec::new();
    let mut queue = VecDeque::from([0usize]);
    while let Some(k) = queue.pop_front() {
        let mut by_label: BTreeMap<Label, BTreeSet<usize>> = BTreeMap::new();
        for &q in &sets[k] {
            for (l, to) in &adj[q] {
                if *l != Label::Eps {
                    by_label.entry(l.clone()).or_default().insert(*to);
                }
            }
        }
        for (l, targets) in by_label {
            let t = eps_closure(a, &adj, targets);
            let id = match index.get(&t) {
                Some(&id) => id,
                None => {
                    let id = sets.len();
                    index.insert(t.clone(), id);
                    sets.push(t);
                    queue.push_back(id);
                    id
                }
            };
            edges.push((k, l, id));
        }
    }
    let mut out = Cda {
        states: Vec::new(),
        initial: 0,
        transitions: Vec::new(),
    };
    for (k, s) in sets.iter().enumerate() {
        let any = *s.iter().next().expect("subsets are non-empty");
        let is_final = s.iter().any(|&q| a.states[q].is_final);
        out.add_state(&format!("d{k}"), a.states[any].regs, is_final);
    }
    for (from, label, to) in edges {
        out.add_transition(from, label, to);
    }
    Ok(out)
}

fn is_zero(e: &Nre) -> bool {
    matches!(e, Nre::Zero)
}

fn summands(e: &Nre, out: &mut Vec<Nre>) {
    match e {
        Nre::Sum(l, r) => {
            summands(l, out);
            summands(r, out);
        }
        Nre::Zero => {}
        other => {
            if !out.contains(other) {
                out.push(other.clone());
            }
        }
    }
}

fn sum(a: Nre, b: Nre) -> Nre {
    let mut parts = Vec::new();
    summands(&a, &mut parts);
    summands(&b, &mut parts);
    parts.into_iter().reduce(Nre::sum).unwrap_or(Nre::Zero)
}

fn concat(a: Nre, b: Nre) -> Nre {
    match (a, b) {
        (Nre::Zero, _) | (_, Nre::Zero) => Nre::Zero,
        (Nre::One, e) | (e, Nre::One) => e,
        (a, b) => Nre::concat(a, b),
    }
}

fn star(e: Nre) -> Nre {
    match e {
        Nre::Zero | Nre::One => Nre::One,
        Nre::Star(_) => e,
        e => {
            let mut parts = Vec::new();
            summands(&e, &mut parts);
            let rest: Vec<Nre> = parts.into_iter().filter(|p| *p != Nre::One).collect();
            match rest.into_iter().reduce(Nre::sum) {
                None => Nre::One,
                Some(Nre::Star(inner)) => Nre::Star(inner),
                Some(body) => Nre::star(body),
            }
        }
    }
}

/// Canonical name of register `i`.
pub fn register_name(i: usize) -> Name {
    Name::user(&format!("n{i}"))
}

/// State elimination over a graph with expression-labelled edges; returns
/// the expression of all paths from `src` to `dst`.
fn eliminate(nodes: &[usize], edges: &BTreeMap<(usize, usize), Nre>, src: usize, dst: usize) -> Nre {
    const S: usize = usize::MAX - 1;
    const T: usize = usize::MAX;
    let mut g: BTreeMap<(usize, usize), Nre> = edges.clone();
    let add = |g: &mut BTreeMap<(usize, usize), Nre>, k: (usize, usize), e: Nre| {
        let cur = g.remove(&k).unwrap_or(Nre::Zero);
        let new = sum(cur, e);
        if !is_zero(&new) {
            g.insert(k, new);
        }
    };
    add(&mut g, (S, src), Nre::One);
    add(&mut g, (dst, T), Nre::One);
    let mut remaining: BTreeSet<usize> = nodes.iter().copied().collect();
    while !remaining.is_empty() {
        let degree = |k: usize| g.keys().filter(|(a, b)| (*a == k) != (*b == k)).count();
        let k = *remaining.iter().min_by_key(|&&k| (degree(k), k)).expect("non-empty");
        remaining.remove(&k);
        let ins: Vec<(usize, Nre)> = g
            .iter()
            .filter(|((a, b), _)| *b == k && *a != k)
            .map(|((a, _), e)| (*a, e.clone()))
            .collect();
        let outs: Vec<(usize, Nre)> = g
            .iter()
            .filter(|((a, b), _)| *a == k && *b != k)
            .map(|((_, b), e)| (*b, e.clone()))
            .collect();
        let lp = star(g.get(&(k, k)).cloned().unwrap_or(Nre::Zero));
        g.retain(|(a, b), _| *a != k && *b != k);
        for (i, ein) in &ins {
            for (j, eout) in &outs {
                let path = concat(concat(ein.clone(), lp.clone()), eout.clone());
                add(&mut g, (*i, *j), path);
            }
        }
    }
    g.remove(&(S, T)).unwrap_or(Nre::Zero)
}

/// An expression over the canonical names `n1 … nH` with the language of `a`.
pub fn extract_expr(a: &Cda) -> Result<Nre, ExtractError> {
    ensure_valid(a)?;
    let a = trim(a);
    let by_layer = layers(&a);
    let top = by_layer.len() - 1;
    // For each layer, the region expressions R(s, t), filled from the top.
    let mut regions: Vec<BTreeMap<(usize, usize), Nre>> = vec![BTreeMap::new(); top + 2];
    for layer in (0..=top).rev() {
        let nodes = &by_layer[layer];
        let mut edges: BTreeMap<(usize, usize), Nre> = BTreeMap::new();
        let mut put = |k: (usize, usize), e: Nre| {
            let cur = edges.remove(&k).unwrap_or(Nre::Zero);
            let new = sum(cur, e);
            if !is_zero(&new) {
                edges.insert(k, new);
            }
        };
        let stars: Vec<(usize, usize)> = a
            .transitions
            .iter()
            .filter(|t| t.label == Label::Star && a.states[t.from].regs == layer)
            .map(|t| (t.from, t.to))
            .collect();
        let closes: Vec<(usize, usize, usize)> = a
            .transitions
            .iter()
            .filter_map(|t| match t.label {
                Label::Close(i) if a.states[t.to].regs == layer => Some((t.from, i, t.to)),
                _ => None,
            })
            .collect();
        for t in &a.transitions {
            if a.states[t.from].regs != layer {
                continue;
            }
            let atom = match &t.label {
                Label::Eps => Nre::One,
                Label::Letter(l) => Nre::Letter(l.clone()),
                Label::Reg(i) => Nre::Name(register_name(*i)),
                Label::Under(i) => Nre::Under(register_name(*i)),
                Label::Star | Label::Close(_) => continue,
            };
            put((t.from, t.to), atom);
        }
        let bound = register_name(layer + 1);
        for &(p, s) in &stars {
            for &(t, i, q) in &closes {
                let Some(r) = regions[layer + 1].get(&(s, t)) else {
                    continue;
                };
                let close = register_name(i);
                put((p, q), Nre::binder(bound.clone(), r.clone(), close));
            }
        }
        if layer == 0 {
            let finals: Vec<usize> = nodes.iter().copied().filter(|&q| a.states[q].is_final).collect();
            let sink = usize::MAX - 2;
            for f in finals {
                put((f, sink), Nre::One);
            }
            let mut all = nodes.clone();
            all.push(sink);
            return Ok(eliminate(&all, &edges, a.initial, sink));
        }
        let entries: BTreeSet<usize> = a
            .transitions
            .iter()
            .filter(|t| t.label == Label::Star && a.states[t.to].regs == layer)
            .map(|t| t.to)
            .collect();
        let exits: BTreeSet<usize> = a
            .transitions
            .iter()
            .filter(|t| matches!(t.label, Label::Close(_)) && a.states[t.from].regs == layer)
            .map(|t| t.from)
            .collect();
        for &s in &entries {
            for &t in &exits {
                let r = eliminate(nodes, &edges, s, t);
                if !is_zero(&r) {
                    regions[layer].insert((s, t), r);
                }
            }
        }
    }
    unreachable!("layer 0 always returns")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cda::{class_of, equiv_bounded, CdaClass};
    use crate::compiler::compile;
    use crate::nominal::Letter;
    use crate::nre::{check_wellformed, classify, parse, Alphabet, NreClass};

    fn pool() -> Vec<Name> {
        ["x", "y", "z"].iter().map(|s| Name::user(s)).collect()
    }

    fn round_trip(s: &str) {
        let e = parse(s, &Alphabet::SingleChars).unwrap();
        let a = compile(&e).unwrap();
        let x = extract_expr(&a).unwrap();
        assert!(check_wellformed(&x).is_ok(), "{s}");
        let b = compile(&x).unwrap();
        assert_eq!(equiv_bounded(&a, &b, &pool(), 5).unwrap(), None, "{s}");
        let d = determinize_layers(&a).unwrap();
        assert_eq!(equiv_bounded(&a, &d, &pool(), 5).unwrap(), None, "{s}");
    }

    #[test]
    fn round_trips() {
        for s in [
            "1",
            "0",
            "ab<$n._$n*>",
            "<$m.(<$n.$n>$m)*>",
            "<$n._$n<$m.<$l.$m>$m>_$n>",
            "ab<$n.(_$n<$m.$m<$l.$l>>)*>",
            "(a*b)*",
        ] {
            round_trip(s);
        }
    }

    #[test]
    fn one_extracts_to_epsilon() {
        let a = compile(&Nre::One).unwrap();
        assert_eq!(extract_expr(&a).unwrap(), Nre::One);
    }

    #[test]
    fn classes_are_preserved() {
        let cases = [
            ("ab<$n._$n*>", CdaClass::Ca, NreClass::U),
            ("<$m.(<$n.$n>$m)*>", CdaClass::Da, NreClass::P),
            ("<$n.$n*>", CdaClass::A, NreClass::B),
        ];
        for (s, cls, expected) in cases {
            let a = compile(&parse(s, &Alphabet::SingleChars).unwrap()).unwrap();
            assert_eq!(class_of(&a).unwrap().class, cls);
            assert!(classify(&extract_expr(&a).unwrap()).leq(expected));
        }
    }

    #[test]
    fn epsilon_branches_merge() {
        let mut a = Cda::new("q0", 0);
        let q1 = a.add_state("q1", 0, false);
        let q2 = a.add_state("q2", 0, false);
        let q3 = a.add_state("q3", 0, true);
        a.add_transition(0, Label::Eps, q1);
        a.add_transition(0, Label::Eps, q2);
        a.add_transition(q1, Label::Letter(Letter::new("a")), q3);
        a.add_transition(q2, Label::Letter(Letter::new("b")), q3);
        let d = determinize_layers(&a).unwrap();
        assert_eq!(d.transitions.iter().filter(|t| t.from == d.initial).count(), 2);
        assert!(d.transitions.iter().all(|t| t.label != Label::Eps));
        assert_eq!(d.states.len(), 2);
    }

    #[test]
    fn deterministic_input_is_isomorphic() {
        let a = compile(&parse("ab", &Alphabet::SingleChars).unwrap()).unwrap();
        let d = determinize_layers(&determinize_layers(&a).unwrap()).unwrap();
        let d1 = determinize_layers(&a).unwrap();
        assert_eq!(d.states.len(), d1.states.len());
        assert_eq!(d.transitions.len(), d1.transitions.len());
    }
}
