use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use rand::seq::SliceRandom;

use nomre::cda::{self, accept, class_of, enumerate, equiv_bounded, from_json, to_dot, to_json, Cda, CdaError};
use nomre::compiler::{compile, CompileError};
use nomre::extractor::{extract_expr, ExtractError};
use nomre::langcalc::{derivation_report, language_enumerate_with_bound, LangError};
use nomre::nominal::{apply_perm_word, format_word, parse_word, perm_from_lists, Name, NominalError, Word};
use nomre::nre::{check_wellformed, classify, parse, render, Alphabet, Nre, ParseError};
use nomre::random::rng;

#[derive(Parser)]
#[command(
    name = "nomre",
    version,
    about = "Nominal regular expressions and chronicle deallocating automata"
)]
struct Cli {
    /// Comma-separated letters; by default every ASCII letter stands alone.
    #[arg(long, global = true, value_delimiter = ',')]
    letters: Vec<String>,
    /// Comma-separated names used for bounded enumeration.
    #[arg(long, global = true, value_delimiter = ',', default_values_t = ["x".to_string(), "y".to_string(), "z".to_string()])]
    pool: Vec<String>,
    #[arg(long, global = true, default_value_t = 4)]
    maxlen: usize,
    /// Cap on star unfoldings for the symbolic semantics.
    #[arg(long = "star-bound", global = true)]
    star_bound: Option<usize>,
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,
    #[arg(long, global = true, value_enum)]
    format: Option<Format>,
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Json,
    Dot,
    Text,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Semantics {
    Cda,
    Lang,
}

#[derive(Subcommand)]
enum Cmd {
    /// Print the class of an expression and its well-formedness diagnostics.
    Check { expr: PathBuf },
    /// Compile an expression to an automaton.
    Compile {
        expr: PathBuf,
        #[arg(short, long)]
        out: Option<PathBuf>,
    },
    /// Run an automaton (or expression) on a word; exits 1 on rejection.
    Accept { input: PathBuf, word: Vec<String> },
    /// List accepted words over the letters of the input and the pool.
    Enumerate {
        input: PathBuf,
        #[arg(long, value_enum, default_value_t = Semantics::Cda)]
        semantics: Semantics,
    },
    /// Bounded language equivalence; exits 1 with a counterexample.
    Equiv { left: PathBuf, right: PathBuf },
    /// Turn an automaton into an equivalent expression.
    Extract { input: PathBuf },
    /// Dump the context and language derivations of an expression.
    Derive { expr: PathBuf },
    /// Graphviz rendering of an automaton.
    Dot { input: PathBuf },
    /// Print the class of an automaton and whether it is deterministic.
    Class { input: PathBuf },
}

#[derive(Debug)]
enum Failure {
    Usage(String),
    Parse(String),
    Invalid(String),
    Resource(String),
}

impl Failure {
    fn code(&self) -> u8 {
        match self {
            Failure::Usage(_) => 2,
            Failure::Parse(_) => 3,
            Failure::Invalid(_) => 4,
            Failure::Resource(_) => 5,
        }
    }

    fn message(&self) -> &str {
        match self {
            Failure::Usage(m) | Failure::Parse(m) | Failure::Invalid(m) | Failure::Resource(m) => m,
        }
    }
}

impl From<ParseError> for Failure {
    fn from(e: ParseError) -> Self {
        Failure::Parse(e.to_string())
    }
}

impl From<NominalError> for Failure {
    fn from(e: NominalError) -> Self {
        Failure::Parse(e.to_string())
    }
}

impl From<CompileError> for Failure {
    fn from(e: CompileError) -> Self {
        Failure::Invalid(e.to_string())
    }
}

impl From<ExtractError> for Failure {
    fn from(e: ExtractError) -> Self {
        Failure::Invalid(e.to_string())
    }
}

impl From<CdaError> for Failure {
    fn from(e: CdaError) -> Self {
        match e {
            CdaError::ResourceLimit(_) => Failure::Resource(e.to_string()),
            CdaError::Schema(_) => Failure::Parse(e.to_string()),
            CdaError::MalformedConfig(_) => Failure::Usage(e.to_string()),
            CdaError::Invalid(_) => Failure::Invalid(e.to_string()),
        }
    }
}

impl From<LangError> for Failure {
    fn from(e: LangError) -> Self {
        match e {
            LangError::ResourceLimit(_) => Failure::Resource(e.to_string()),
            _ => Failure::Invalid(e.to_string()),
        }
    }
}

/// Successful outcome: output already printed, with the exit status.
type Outcome = Result<u8, Failure>;

impl Cli {
    fn alphabet(&self) -> Alphabet {
        if self.letters.is_empty() {
            Alphabet::SingleChars
        } else {
            Alphabet::declared(self.letters.iter().map(String::as_str))
        }
    }

    fn pool(&self) -> Result<Vec<Name>, Failure> {
        let pool: Vec<Name> = self
            .pool
            .iter()
            .map(|s| Name::user(s.trim_start_matches('$')))
            .collect();
        let mut sorted = pool.clone();
        sorted.sort();
        sorted.dedup();
        if sorted.len() != pool.len() {
            return Err(Failure::Usage("pool names must be distinct".into()));
        }
        Ok(pool)
    }

    fn read(&self, path: &Path) -> Result<String, Failure> {
        fs::read_to_string(path).map_err(|e| Failure::Usage(format!("{}: {e}", path.display())))
    }

    fn expr(&self, path: &Path) -> Result<Nre, Failure> {
        Ok(parse(self.read(path)?.trim(), &self.alphabet())?)
    }

    /// An automaton file, or an expression file compiled on the fly.
    fn automaton(&self, path: &Path) -> Result<Cda, Failure> {
        let text = self.read(path)?;
        if text.trim_start().starts_with('{') {
            let a = from_json(&text)?;
            let report = cda::validate(&a);
            if !report.is_valid() {
                return Err(Failure::Invalid(report.to_string()));
            }
            Ok(a)
        } else {
            Ok(compile(&parse(text.trim(), &self.alphabet())?)?)
        }
    }

    fn run(&self) -> Outcome {
        match &self.cmd {
            Cmd::Check { expr } => {
                let e = self.expr(expr)?;
                let report = check_wellformed(&e);
                if report.is_ok() {
                    println!("class: {}, well-formed", classify(&e));
                    Ok(0)
                } else {
                    println!("class: {}, ill-formed", classify(&e));
                    for d in &report.diagnostics {
                        println!("  {d}");
                    }
                    Ok(4)
                }
            }
            Cmd::Compile { expr, out } => {
                let a = compile(&self.expr(expr)?)?;
                let text = match self.format {
                    Some(Format::Dot) => to_dot(&a),
                    _ => to_json(&a) + "\n",
                };
                match out {
                    Some(p) => fs::write(p, text).map_err(|e| Failure::Usage(format!("{}: {e}", p.display())))?,
                    None => print!("{text}"),
                }
                Ok(0)
            }
            Cmd::Accept { input, word } => {
                let a = self.automaton(input)?;
                let w = parse_word(&word.join(" "))?;
                if accept(&a, &w)? {
                    println!("accept");
                    Ok(0)
                } else {
                    println!("reject");
                    Ok(1)
                }
            }
            Cmd::Enumerate { input, semantics } => {
                let pool = self.pool()?;
                let words = match semantics {
                    Semantics::Cda => enumerate(&self.automaton(input)?, &pool, self.maxlen)?,
                    Semantics::Lang => {
                        let e = self.expr(input)?;
                        language_enumerate_with_bound(&e, &pool, self.maxlen, self.star_bound)?
                    }
                };
                let mut words: Vec<Word> = words.into_iter().collect();
                words.sort_by(cda::len_lex);
                for w in &words {
                    println!("{}", format_word(w));
                }
                Ok(0)
            }
            Cmd::Equiv { left, right } => {
                let pool = self.pool()?;
                let (a, b) = (self.automaton(left)?, self.automaton(right)?);
                if let Some(w) = equiv_bounded(&a, &b, &pool, self.maxlen)? {
                    println!("counterexample: {}", format_word(&w));
                    return Ok(1);
                }
                if let Some(w) = self.permutation_spot_check(&a, &b, &pool)? {
                    println!("counterexample: {}", format_word(&w));
                    return Ok(1);
                }
                println!("equivalent (bounded)");
                Ok(0)
            }
            Cmd::Extract { input } => {
                println!("{}", render(&extract_expr(&self.automaton(input)?)?));
                Ok(0)
            }
            Cmd::Derive { expr } => {
                print!(
                    "{}",
                    derivation_report(&self.expr(expr)?, self.star_bound.unwrap_or(1))?
                );
                Ok(0)
            }
            Cmd::Dot { input } => {
                print!("{}", to_dot(&self.automaton(input)?));
                Ok(0)
            }
            Cmd::Class { input } => {
                let r = class_of(&self.automaton(input)?)?;
                println!("class: {}, deterministic: {}", r.class, r.deterministic);
                Ok(0)
            }
        }
    }

    /// Renames the accepted words of `a` by random permutations over the pool
    /// and some fresh names and checks that both automata agree on them.
    fn permutation_spot_check(&self, a: &Cda, b: &Cda, pool: &[Name]) -> Result<Option<Word>, Failure> {
        let mut r = rng(self.seed);
        let mut universe = pool.to_vec();
        universe.extend((0..pool.len().max(1)).map(|i| Name::user(&format!("fresh{i}"))));
        for w in enumerate(a, pool, self.maxlen)? {
            let mut shuffled = universe.clone();
            shuffled.shuffle(&mut r);
            let perm = perm_from_lists(&universe, &shuffled)?;
            let v = apply_perm_word(&perm, &w);
            if accept(a, &v)? != accept(b, &v)? {
                return Ok(Some(v));
            }
        }
        Ok(None)
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match cli.run() {
        Ok(code) => ExitCode::from(code),
        Err(f) => {
            eprintln!("error: {}", f.message());
            ExitCode::from(f.code())
        }
    }
}
