//! Expressions to automata, by induction on the expression in a context.
//!
//! A binder `⟨n e⟩^m` becomes a `⋆` edge into the automaton of the body,
//! built with `n` renamed to a reserved fresh name pushed onto the
//! pre-context, followed by `close` edges from every final state of the body.

use std::collections::BTreeSet;

use thiserror::Error;

use crate::cda::{Cda, Label};
use crate::nominal::{canonical_fresh, transpose, Chronicle, ExtantChronicle, Name, NominalError};
use crate::nre::{apply_perm_expr, check_wellformed, free_names, Nre};

/// `C ‡ payload ‡ E`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ContextTriple<P> {
    pub pre: Vec<Name>,
    pub payload: P,
    pub post: ExtantChronicle,
}

/// An automaton whose initial and final states hold `|pre|` registers.
pub type CdaInContext = ContextTriple<Cda>;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum CompileError {
    #[error("expression is not closed: free names {0:?}")]
    Open(Vec<String>),
    #[error("ill-formed expression: {0}")]
    IllFormed(String),
    #[error("no register holds `{0}` in the pre-context")]
    Lookup(String),
    #[error("context error: {0}")]
    Context(#[from] NominalError),
}

/// The name a binder of `e` in pre-context `pre` is renamed to.
pub fn binder_placeholder(pre: &[Name], e: &Nre, post: &ExtantChronicle) -> Name {
    let mut avoid: BTreeSet<Name> = pre.iter().cloned().collect();
    avoid.extend(e.names());
    avoid.extend(post.names());
    canonical_fresh(&avoid)
}

/// Post-context of the body of a binder whose bound name was renamed to
/// `star`; `close` is `None` for a plain binder.
pub fn binder_post(post: &ExtantChronicle, star: &Name, close: Option<&Name>) -> Result<ExtantChronicle, NominalError> {
    let ext = post.extend(std::slice::from_ref(star));
    match close {
        None => ext.push(Chronicle::single(star.clone())),
        Some(m) => {
            let top = Chronicle::new(vec![star.clone(), m.clone()], star.clone())?;
            let mut cvs = post.hcv();
            cvs.push(star.clone());
            let cvs = transpose(m, star).apply_all(&cvs);
            let mut entries = ext.entries().to_vec();
            entries.push(top);
            ExtantChronicle::new(entries)?.with_hcv(&cvs)
        }
    }
}

struct Builder {
    cda: Cda,
}

/// Entry and final states of a fragment.
struct Fragment {
    init: usize,
    finals: Vec<usize>,
}

impl Builder {
    fn state(&mut self, regs: usize) -> usize {
        let id = format!("q{}", self.cda.states.len());
        self.cda.add_state(&id, regs, false)
    }

    fn index_of(pre: &[Name], n: &Name) -> Result<usize, CompileError> {
        pre.iter()
            .position(|x| x == n)
            .map(|i| i + 1)
            .ok_or_else(|| CompileError::Lookup(n.to_string()))
    }

    fn build(&mut self, pre: &[Name], e: &Nre, post: &ExtantChronicle) -> Result<Fragment, CompileError> {
        let k = pre.len();
        let edge = |b: &mut Builder, label: Label| {
            let q0 = b.state(k);
            let q1 = b.state(k);
            b.cda.add_transition(q0, label, q1);
            Fragment {
                init: q0,
                finals: vec![q1],
            }
        };
        Ok(match e {
            Nre::One => {
                let q = self.state(k);
                Fragment {
                    init: q,
                    finals: vec![q],
                }
            }
            Nre::Zero => Fragment {
                init: self.state(k),
                finals: vec![],
            },
            Nre::Letter(l) => edge(self, Label::Letter(l.clone())),
            Nre::Name(n) => edge(self, Label::Reg(Self::index_of(pre, n)?)),
            Nre::Under(n) => edge(self, Label::Under(Self::index_of(pre, n)?)),
            Nre::Sum(l, r) => {
                let q = self.state(k);
                let fl = self.build(pre, l, post)?;
                let fr = self.build(pre, r, post)?;
                self.cda.add_transition(q, Label::Eps, fl.init);
                self.cda.add_transition(q, Label::Eps, fr.init);
                Fragment {
                    init: q,
                    finals: [fl.finals, fr.finals].concat(),
                }
            }
            Nre::Concat(l, r) => {
                let fl = self.build(pre, l, &ExtantChronicle::natural(pre)?)?;
                let fr = self.build(pre, r, post)?;
                for f in fl.finals {
                    self.cda.add_transition(f, Label::Eps, fr.init);
                }
                Fragment {
                    init: fl.init,
                    finals: fr.finals,
                }
            }
            Nre::Star(body) => {
                let q = self.state(k);
                let fb = self.build(pre, body, post)?;
                self.cda.add_transition(q, Label::Eps, fb.init);
                for f in fb.finals {
                    self.cda.add_transition(f, Label::Eps, q);
                }
                Fragment {
                    init: q,
                    finals: vec![q],
                }
            }
            Nre::Binder { bind, body, close } => {
                let star = binder_placeholder(pre, e, post);
                let renamed = apply_perm_expr(&transpose(bind, &star), body);
                let plain = close == bind;
                let index = if plain { k + 1 } else { Self::index_of(pre, close)? };
                let inner_post = binder_post(post, &star, (!plain).then_some(close))?;
                let mut inner_pre = pre.to_vec();
                inner_pre.push(star);
                let qs = self.state(k);
                let fb = self.build(&inner_pre, &renamed, &inner_post)?;
                let qt = self.state(k);
                self.cda.add_transition(qs, Label::Star, fb.init);
                for f in fb.finals {
                    self.cda.add_transition(f, Label::Close(index), qt);
                }
                Fragment {
                    init: qs,
                    finals: vec![qt],
                }
            }
        })
    }
}

/// Builds the automaton of `t.payload` in the given context.
pub fn compile_in_context(t: &ContextTriple<Nre>) -> Result<CdaInContext, CompileError> {
    let mut b = Builder {
        cda: Cda {
            states: Vec::new(),
            initial: 0,
            transitions: Vec::new(),
        },
    };
    let frag = b.build(&t.pre, &t.payload, &t.post)?;
    for f in frag.finals {
        b.cda.states[f].is_final = true;
    }
    b.cda.initial = frag.init;
    Ok(ContextTriple {
        pre: t.pre.clone(),
        payload: b.cda,
        post: t.post.clone(),
    })
}

/// Compiles a closed, well-formed expression.
pub fn compile(e: &Nre) -> Result<Cda, CompileError> {
    let free = free_names(e);
    if !free.is_empty() {
        return Err(CompileError::Open(free.iter().map(|n| n.to_string()).collect()));
    }
    let report = check_wellformed(e);
    if !report.is_ok() {
        let msgs: Vec<String> = report.diagnostics.iter().map(|d| d.to_string()).collect();
        return Err(CompileError::IllFormed(msgs.join("; ")));
    }
    let t = ContextTriple {
        pre: Vec::new(),
        payload: e.clone(),
        post: ExtantChronicle::empty(),
    };
    Ok(compile_in_context(&t)?.payload)
}
