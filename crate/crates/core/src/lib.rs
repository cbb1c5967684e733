//! Nominal regular expressions and chronicle deallocating automata.
//!
//! The crate covers both directions of the correspondence between the two
//! formalisms together with the symbolic language calculi used as an
//! independent semantics:
//!
//! * [`nominal`]: names, permutations, chronicles;
//! * [`nre`]: expression syntax and static analyses;
//! * [`cda`]: automata, runs and bounded language utilities;
//! * [`compiler`]: expressions to automata;
//! * [`langcalc`]: context and language calculi over schematic words;
//! * [`extractor`]: automata back to expressions;
//! * [`random`]: seeded generators for property suites.

pub mod cda;
pub mod compiler;
pub mod extractor;
pub mod langcalc;
pub mod nominal;
pub mod nre;
pub mod random;
