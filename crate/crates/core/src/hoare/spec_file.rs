//! Triple files: a program plus `requires`/`ensures`/`witness` stanzas and a
//! sample plan.
//!
//! ```text
//! include bisection.gcl            -- or an inline `program ... = "..."`
//! requires: tol > 0 ∧ tol < b - a ∧ f(a) * f(b) < 0
//! ensures: ∃c. f(c) = 0 ∧ a < c ∧ c < b
//! witness c := root(f, lower, upper)
//! instance: f = x^2 - 2, a = 1, b = 1.5, tol = 0.0001
//! sample a in dyadic(0, 1, 10)     -- also [v, ...], grid(lo, hi, n), uniform(lo, hi)
//! samples: 64
//! seed: 0xC0FFEE
//! ulps: 4                          -- tolerance for real equalities in invariants
//! ```
//!
//! A stanza starts at a line whose first word is a keyword and runs until the
//! next such line. Repeated `requires`/`ensures` stanzas are conjoined.

use std::collections::BTreeMap;
use std::path::Path;

use super::{
    Generator, HoareError, HoareTriple, SamplePlan, Witness, DEFAULT_SAMPLES, DEFAULT_SEED,
};
use crate::lang::{parse_program, Cond, ParseError, Parser, Program, Sort, Tok};

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum SpecError {
    #[error("cannot read {path}: {message}")]
    Io { path: String, message: String },
    #[error("{0}")]
    Parse(ParseError),
    #[error("line {line}: {message}")]
    Invalid { line: usize, message: String },
    #[error(transparent)]
    Hoare(#[from] HoareError),
}

/// A parsed triple file.
#[derive(Debug, Clone, PartialEq)]
pub struct SpecFile {
    pub triple: HoareTriple,
    pub plan: SamplePlan,
    /// Whether the file fixed the seed itself.
    pub seed_given: bool,
    pub eq_ulps: u32,
}

const KEYWORDS: &[(&str, bool)] = &[
    ("program", false),
    ("include", false),
    ("witness", false),
    ("sample", false),
    ("requires", true),
    ("ensures", true),
    ("instance", true),
    ("samples", true),
    ("seed", true),
    ("ulps", true),
];

struct Stanza {
    keyword: &'static str,
    /// 1-based line of the keyword.
    line: usize,
    text: String,
}

fn strip_comment(line: &str) -> &str {
    line.find("--").map_or(line, |i| &line[..i])
}

/// Keyword starting `line`, with the rest of the line after it.
fn keyword_of(line: &str) -> Option<(&'static str, &str)> {
    let t = line.trim_start();
    let word_end = t
        .find(|c: char| !(c.is_alphanumeric() || c == '_'))
        .unwrap_or(t.len());
    let (word, rest) = t.split_at(word_end);
    let &(kw, colon) = KEYWORDS.iter().find(|(k, _)| *k == word)?;
    if colon {
        rest.trim_start().strip_prefix(':').map(|r| (kw, r))
    } else if kw == "program" {
        Some((kw, t))
    } else {
        Some((kw, rest))
    }
}

fn stanzas(src: &str) -> Result<Vec<Stanza>, SpecError> {
    let mut out: Vec<Stanza> = Vec::new();
    for (i, raw) in src.lines().enumerate() {
        let line = strip_comment(raw);
        if let Some((keyword, rest)) = keyword_of(line) {
            out.push(Stanza {
                keyword,
                line: i + 1,
                text: rest.to_string(),
            });
        } else if !line.trim().is_empty() {
            let Some(cur) = out.last_mut() else {
                return Err(SpecError::Invalid {
                    line: i + 1,
                    message: "text before the first stanza".into(),
                });
            };
            cur.text.push('\n');
            cur.text.push_str(line);
        }
    }
    Ok(out)
}

fn shift(e: ParseError, st: &Stanza) -> SpecError {
    SpecError::Parse(ParseError {
        line: e.line + st.line - 1,
        ..e
    })
}

fn with_parser<T>(
    st: &Stanza,
    f: impl FnOnce(&mut Parser) -> Result<T, ParseError>,
) -> Result<T, SpecError> {
    let mut p = Parser::new(&st.text).map_err(|e| shift(e, st))?;
    let out = f(&mut p).map_err(|e| shift(e, st))?;
    p.finish().map_err(|e| shift(e, st))?;
    Ok(out)
}

fn witness(p: &mut Parser, params: &Program) -> Result<(String, Witness), ParseError> {
    let var = p.ident()?;
    p.expect(&Tok::Assign)?;
    if p.eat_word("root") {
        p.expect(&Tok::LParen)?;
        let func = p.ident()?;
        if params.param(&func).map(|q| q.sort) != Some(Sort::Fun) {
            return Err(p.error(format!("`{func}` is not a function parameter")));
        }
        p.expect(&Tok::Comma)?;
        let lower = p.expr()?;
        p.expect(&Tok::Comma)?;
        let upper = p.expr()?;
        p.expect(&Tok::RParen)?;
        return Ok((var, Witness::Root { func, lower, upper }));
    }
    Ok((var, Witness::Value(p.expr()?)))
}

fn generator(p: &mut Parser, prog: &Program) -> Result<(String, Generator), ParseError> {
    let name = p.ident()?;
    let Some(sort) = prog.param(&name).map(|q| q.sort) else {
        return Err(p.error(format!("unknown parameter `{name}`")));
    };
    p.expect_word("in")?;
    if p.eat(&Tok::LBracket) {
        let mut xs = Vec::new();
        loop {
            xs.push(p.arg_value(sort)?);
            if p.eat(&Tok::RBracket) {
                break;
            }
            p.expect(&Tok::Comma)?;
        }
        return Ok((name, Generator::List(xs)));
    }
    let kind = match p.peek_word() {
        Some(w @ ("grid" | "uniform" | "dyadic")) => w.to_string(),
        _ => return Err(p.error("expected `[`, `grid`, `uniform` or `dyadic`")),
    };
    p.expect_word(&kind)?;
    p.expect(&Tok::LParen)?;
    let lo = p.const_real()?;
    p.expect(&Tok::Comma)?;
    let hi = p.const_real()?;
    let g = match kind.as_str() {
        "grid" => {
            p.expect(&Tok::Comma)?;
            let points = p.nat_literal()? as usize;
            Generator::Grid { lo, hi, points }
        }
        "dyadic" => {
            p.expect(&Tok::Comma)?;
            let bits = p.nat_literal()?;
            Generator::Dyadic {
                lo,
                hi,
                bits: bits.min(u32::MAX as u64) as u32,
            }
        }
        _ if sort == Sort::Nat => {
            let nat = |x: f64| {
                if x >= 0.0 && x.fract() == 0.0 {
                    Ok(x as u64)
                } else {
                    Err(p.error(format!("bound {x:?} is not a natural number")))
                }
            };
            Generator::UniformNat {
                lo: nat(lo)?,
                hi: nat(hi)?,
            }
        }
        _ => Generator::Uniform { lo, hi },
    };
    p.expect(&Tok::RParen)?;
    Ok((name, g))
}

fn conj(acc: Option<Cond>, c: Cond) -> Option<Cond> {
    Some(match acc {
        Some(a) => a.and(c),
        None => c,
    })
}

fn number(st: &Stanza) -> Result<u64, SpecError> {
    let t = st.text.trim().replace('_', "");
    let parsed = match t.strip_prefix("0x").or_else(|| t.strip_prefix("0X")) {
        Some(hex) => u64::from_str_radix(hex, 16),
        None => t.parse(),
    };
    parsed.map_err(|_| SpecError::Invalid {
        line: st.line,
        message: format!(
            "expected a natural number after `{}:`, found `{t}`",
            st.keyword
        ),
    })
}

/// Parses a triple file. `base` resolves `include` paths.
pub fn parse_spec(src: &str, base: Option<&Path>) -> Result<SpecFile, SpecError> {
    let all = stanzas(src)?;
    let mut program: Option<Program> = None;
    for st in all
        .iter()
        .filter(|s| matches!(s.keyword, "program" | "include"))
    {
        if program.is_some() {
            return Err(SpecError::Invalid {
                line: st.line,
                message: "a triple file holds exactly one program".into(),
            });
        }
        program = Some(if st.keyword == "program" {
            parse_program(&st.text).map_err(|e| shift(e, st))?
        } else {
            let rel = st.text.trim().trim_matches('"');
            let path = base.map_or_else(|| Path::new(rel).to_path_buf(), |b| b.join(rel));
            let text = std::fs::read_to_string(&path).map_err(|e| SpecError::Io {
                path: path.display().to_string(),
                message: e.to_string(),
            })?;
            parse_program(&text).map_err(|e| SpecError::Invalid {
                line: st.line,
                message: format!("in {}: {e}", path.display()),
            })?
        });
    }
    let Some(program) = program else {
        return Err(SpecError::Invalid {
            line: 1,
            message: "missing `program` or `include` stanza".into(),
        });
    };
    let mut pre = None;
    let mut post = None;
    let mut witnesses = BTreeMap::new();
    let mut plan = SamplePlan {
        samples: DEFAULT_SAMPLES,
        seed: DEFAULT_SEED,
        ..SamplePlan::default()
    };
    let mut seed_given = false;
    let mut eq_ulps = 0;
    for st in &all {
        match st.keyword {
            "requires" => pre = conj(pre, with_parser(st, Parser::cond)?),
            "ensures" => post = conj(post, with_parser(st, Parser::cond)?),
            "witness" => {
                let (var, w) = with_parser(st, |p| witness(p, &program))?;
                if witnesses.insert(var.clone(), w).is_some() {
                    return Err(SpecError::Invalid {
                        line: st.line,
                        message: format!("second witness for `{var}`"),
                    });
                }
            }
            "instance" => {
                let args = with_parser(st, |p| p.args(&program.params))?;
                plan.instances.push(args);
            }
            "sample" => {
                let (name, g) = with_parser(st, |p| generator(p, &program))?;
                plan = plan.with_generator(&name, g);
            }
            "samples" => {
                plan.samples = usize::try_from(number(st)?).map_err(|_| SpecError::Invalid {
                    line: st.line,
                    message: "sample count too large".into(),
                })?
            }
            "seed" => {
                plan.seed = number(st)?;
                seed_given = true;
            }
            "ulps" => {
                eq_ulps = u32::try_from(number(st)?).map_err(|_| SpecError::Invalid {
                    line: st.line,
                    message: "ulp tolerance too large".into(),
                })?
            }
            _ => {}
        }
    }
    let Some(post) = post else {
        return Err(SpecError::Invalid {
            line: 1,
            message: "missing `ensures:` stanza".into(),
        });
    };
    let pre = pre.unwrap_or(Cond::Bool(true));
    let triple = HoareTriple::new(pre, program, post, witnesses)?;
    Ok(SpecFile {
        triple,
        plan,
        seed_given,
        eq_ulps,
    })
}

/// Reads and parses a triple file, resolving `include` relative to it.
pub fn load_spec(path: &Path) -> Result<SpecFile, SpecError> {
    let src = std::fs::read_to_string(path).map_err(|e| SpecError::Io {
        path: path.display().to_string(),
        message: e.to_string(),
    })?;
    parse_spec(&src, path.parent())
}
