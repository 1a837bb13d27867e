use std::collections::BTreeSet;

use super::lexer::{tokenize, Pos, Tok, Token};
use super::{
    eval_expr, Arg, Builtin, CmpOp, Cond, Env, Expr, FuncDef, Funcs, Param, Program, Sort, Stmt,
    Value,
};

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
#[error("line {line}, column {col}: {message}")]
pub struct ParseError {
    pub line: usize,
    pub col: usize,
    pub message: String,
}

impl ParseError {
    fn at(pos: Pos, message: impl Into<String>) -> ParseError {
        ParseError {
            line: pos.line,
            col: pos.col,
            message: message.into(),
        }
    }
}

/// Words that never start an application argument.
const RESERVED: &[&str] = &[
    "program",
    "over",
    "state",
    "skip",
    "if",
    "then",
    "else",
    "fi",
    "while",
    "invariant",
    "variant",
    "do",
    "od",
    "and",
    "or",
    "not",
    "true",
    "false",
    "forall",
    "exists",
    "requires",
    "ensures",
    "witness",
    "instance",
    "sample",
    "samples",
    "seed",
    "include",
];

fn is_reserved(word: &str) -> bool {
    RESERVED.contains(&word)
}

/// Recursive-descent parser over a token stream.
///
/// Exposed so that file formats layered on the program syntax can reuse the
/// expression, condition and argument grammars.
pub struct Parser {
    toks: Vec<Token>,
    idx: usize,
    end: Pos,
}

impl Parser {
    pub fn new(src: &str) -> Result<Parser, ParseError> {
        let toks = tokenize(src).map_err(|e| ParseError::at(e.pos, e.message))?;
        let (mut line, mut col) = (1, 1);
        for ch in src.chars() {
            if ch == '\n' {
                line += 1;
                col = 1;
            } else {
                col += 1;
            }
        }
        Ok(Parser {
            toks,
            idx: 0,
            end: Pos { line, col },
        })
    }

    pub fn at_end(&self) -> bool {
        self.idx >= self.toks.len()
    }

    pub fn peek(&self) -> Option<&Tok> {
        self.toks.get(self.idx).map(|t| &t.tok)
    }

    fn peek_at(&self, k: usize) -> Option<&Tok> {
        self.toks.get(self.idx + k).map(|t| &t.tok)
    }

    pub fn pos(&self) -> Pos {
        self.toks.get(self.idx).map_or(self.end, |t| t.pos)
    }

    pub fn error(&self, message: impl Into<String>) -> ParseError {
        ParseError::at(self.pos(), message)
    }

    fn unexpected(&self, wanted: &str) -> ParseError {
        match self.peek() {
            Some(t) => self.error(format!("expected {wanted}, found {t}")),
            None => self.error(format!("expected {wanted}, found end of input")),
        }
    }

    fn bump(&mut self) -> Option<Tok> {
        let t = self.toks.get(self.idx).map(|t| t.tok.clone());
        self.idx += 1;
        t
    }

    pub fn eat(&mut self, tok: &Tok) -> bool {
        if self.peek() == Some(tok) {
            self.idx += 1;
            true
        } else {
            false
        }
    }

    pub fn expect(&mut self, tok: &Tok) -> Result<(), ParseError> {
        if self.eat(tok) {
            Ok(())
        } else {
            Err(self.unexpected(&format!("`{tok}`")))
        }
    }

    pub fn peek_word(&self) -> Option<&str> {
        match self.peek() {
            Some(Tok::Ident(s)) => Some(s),
            _ => None,
        }
    }

    pub fn eat_word(&mut self, word: &str) -> bool {
        if self.peek_word() == Some(word) {
            self.idx += 1;
            true
        } else {
            false
        }
    }

    pub fn expect_word(&mut self, word: &str) -> Result<(), ParseError> {
        if self.eat_word(word) {
            Ok(())
        } else {
            Err(self.unexpected(&format!("`{word}`")))
        }
    }

    pub fn ident(&mut self) -> Result<String, ParseError> {
        match self.peek() {
            Some(Tok::Ident(s)) if !is_reserved(s) => {
                let s = s.clone();
                self.idx += 1;
                Ok(s)
            }
            _ => Err(self.unexpected("an identifier")),
        }
    }

    pub fn nat_literal(&mut self) -> Result<u64, ParseError> {
        match self.peek() {
            Some(&Tok::Int(n)) => {
                self.idx += 1;
                Ok(n)
            }
            _ => Err(self.unexpected("an integer literal")),
        }
    }

    // ---- programs ----

    pub fn program(&mut self) -> Result<Program, ParseError> {
        self.expect_word("program")?;
        let name = self.ident()?;
        let quoted = self.eat(&Tok::Quote);
        self.expect(&Tok::LParen)?;
        let mut params: Vec<Param> = Vec::new();
        if !self.eat(&Tok::RParen) {
            loop {
                let pos = self.pos();
                let pname = self.ident()?;
                self.expect(&Tok::DoubleColon)?;
                let sort = self.sort()?;
                if params.iter().any(|p| p.name == pname) {
                    return Err(ParseError::at(
                        pos,
                        format!("duplicate parameter `{pname}`"),
                    ));
                }
                params.push(Param { name: pname, sort });
                if self.eat(&Tok::RParen) {
                    break;
                }
                self.expect(&Tok::Comma)?;
            }
        }
        if quoted {
            self.expect(&Tok::Quote)?;
        }
        if self.eat_word("over") {
            self.expect_word("state")?;
        }
        self.expect(&Tok::Eq)?;
        self.expect(&Tok::Quote)?;
        let body = self.stmts()?;
        self.expect(&Tok::Quote)?;
        Ok(Program::new(&name, params, body))
    }

    fn sort(&mut self) -> Result<Sort, ParseError> {
        let pos = self.pos();
        let word = match self.peek_word() {
            Some(w) => w.to_string(),
            None => return Err(self.unexpected("a sort")),
        };
        self.idx += 1;
        match word.as_str() {
            "nat" => Ok(Sort::Nat),
            "fun" => Ok(Sort::Fun),
            "vec" => self.vec_len().map(Sort::Vec),
            "real" => {
                if self.eat(&Tok::Arrow) {
                    self.expect_word("real")?;
                    Ok(Sort::Fun)
                } else if self.eat_word("vec") {
                    self.vec_len().map(Sort::Vec)
                } else {
                    Ok(Sort::Real)
                }
            }
            other => Err(ParseError::at(pos, format!("unknown sort `{other}`"))),
        }
    }

    fn vec_len(&mut self) -> Result<usize, ParseError> {
        self.expect(&Tok::LBracket)?;
        let pos = self.pos();
        let n = self.nat_literal()?;
        self.expect(&Tok::RBracket)?;
        usize::try_from(n).map_err(|_| ParseError::at(pos, "vector length too large"))
    }

    pub fn stmts(&mut self) -> Result<Stmt, ParseError> {
        let mut out = vec![self.stmt()?];
        while self.eat(&Tok::Semi) {
            out.push(self.stmt()?);
        }
        Ok(if out.len() == 1 {
            out.pop().unwrap_or(Stmt::Skip)
        } else {
            Stmt::Seq(out)
        })
    }

    fn stmt(&mut self) -> Result<Stmt, ParseError> {
        match self.peek_word() {
            Some("skip") => {
                self.idx += 1;
                Ok(Stmt::Skip)
            }
            Some("if") => {
                self.idx += 1;
                let c = self.cond()?;
                self.expect_word("then")?;
                let t = self.stmts()?;
                let e = if self.eat_word("else") {
                    self.stmts()?
                } else {
                    Stmt::Skip
                };
                self.expect_word("fi")?;
                Ok(Stmt::If(c, Box::new(t), Box::new(e)))
            }
            Some("while") => {
                let pos = self.pos();
                self.idx += 1;
                let guard = self.cond()?;
                if !self.eat_word("invariant") {
                    return Err(ParseError::at(pos, "while loop is missing its invariant"));
                }
                let invariant = self.cond()?;
                if !self.eat_word("variant") {
                    return Err(ParseError::at(pos, "while loop is missing its variant"));
                }
                let variant = self.expr()?;
                self.expect_word("do")?;
                let body = self.stmts()?;
                self.expect_word("od")?;
                Ok(Stmt::while_loop(guard, invariant, variant, body))
            }
            Some(_) => {
                let name = self.ident()?;
                if self.eat(&Tok::LBracket) {
                    let idx = self.expr()?;
                    self.expect(&Tok::RBracket)?;
                    self.expect(&Tok::Assign)?;
                    let e = self.expr()?;
                    Ok(Stmt::VecAssign(name, idx, e))
                } else {
                    self.expect(&Tok::Assign)?;
                    Ok(Stmt::Assign(name, self.expr()?))
                }
            }
            None => Err(self.unexpected("a statement")),
        }
    }

    // ---- conditions ----

    pub fn cond(&mut self) -> Result<Cond, ParseError> {
        let lhs = self.disjunction()?;
        if self.eat(&Tok::Implies) || self.eat_word("implies") {
            let rhs = self.cond()?;
            return Ok(lhs.implies(rhs));
        }
        Ok(lhs)
    }

    fn disjunction(&mut self) -> Result<Cond, ParseError> {
        let mut c = self.conjunction()?;
        while self.eat(&Tok::Or) || self.eat_word("or") {
            c = c.or(self.conjunction()?);
        }
        Ok(c)
    }

    fn conjunction(&mut self) -> Result<Cond, ParseError> {
        let mut c = self.negation()?;
        while self.eat(&Tok::And) || self.eat_word("and") {
            c = c.and(self.negation()?);
        }
        Ok(c)
    }

    fn negation(&mut self) -> Result<Cond, ParseError> {
        if self.eat(&Tok::Not) || self.eat_word("not") {
            return Ok(self.negation()?.negate());
        }
        if self.eat(&Tok::Forall) || self.eat_word("forall") {
            let var = self.ident()?;
            self.expect(&Tok::Lt)?;
            let bound = self.expr()?;
            self.expect(&Tok::Dot)?;
            let body = Box::new(self.cond()?);
            return Ok(Cond::Forall { var, bound, body });
        }
        if self.eat(&Tok::Exists) || self.eat_word("exists") {
            let var = self.ident()?;
            if self.eat(&Tok::Lt) {
                let bound = self.expr()?;
                self.expect(&Tok::Dot)?;
                let body = Box::new(self.cond()?);
                return Ok(Cond::Exists { var, bound, body });
            }
            if self.eat(&Tok::DoubleColon) {
                self.expect_word("real")?;
            }
            self.expect(&Tok::Dot)?;
            let body = Box::new(self.cond()?);
            return Ok(Cond::ExistsReal { var, body });
        }
        self.cond_atom()
    }

    fn cond_atom(&mut self) -> Result<Cond, ParseError> {
        if self.eat_word("true") {
            return Ok(Cond::Bool(true));
        }
        if self.eat_word("false") {
            return Ok(Cond::Bool(false));
        }
        if self.peek() == Some(&Tok::LParen) {
            let save = self.idx;
            self.idx += 1;
            if let Ok(c) = self.cond() {
                if self.eat(&Tok::RParen) && !self.continues_expr() {
                    return Ok(c);
                }
            }
            self.idx = save;
        }
        self.comparison()
    }

    /// True when the next token would extend an arithmetic expression.
    fn continues_expr(&self) -> bool {
        matches!(
            self.peek(),
            Some(
                Tok::Plus
                    | Tok::Minus
                    | Tok::Star
                    | Tok::Slash
                    | Tok::Caret
                    | Tok::Lt
                    | Tok::Le
                    | Tok::Gt
                    | Tok::Ge
                    | Tok::Eq
                    | Tok::Ne
            )
        )
    }

    fn cmp_op(&self) -> Option<CmpOp> {
        Some(match self.peek()? {
            Tok::Lt => CmpOp::Lt,
            Tok::Le => CmpOp::Le,
            Tok::Gt => CmpOp::Gt,
            Tok::Ge => CmpOp::Ge,
            Tok::Eq => CmpOp::Eq,
            Tok::Ne => CmpOp::Ne,
            _ => return None,
        })
    }

    fn comparison(&mut self) -> Result<Cond, ParseError> {
        let first = self.expr()?;
        let Some(op) = self.cmp_op() else {
            return Err(self.unexpected("a comparison operator"));
        };
        self.idx += 1;
        let mut rhs = self.expr()?;
        let mut c = Cond::Cmp(op, first, rhs.clone());
        // Chains such as `0 < tol < b - a` read as conjunctions.
        while let Some(op) = self.cmp_op() {
            self.idx += 1;
            let next = self.expr()?;
            c = c.and(Cond::Cmp(op, rhs, next.clone()));
            rhs = next;
        }
        Ok(c)
    }

    // ---- expressions ----

    pub fn expr(&mut self) -> Result<Expr, ParseError> {
        let mut e = self.term()?;
        loop {
            if self.eat(&Tok::Plus) {
                e = e + self.term()?;
            } else if self.eat(&Tok::Minus) {
                e = e - self.term()?;
            } else {
                return Ok(e);
            }
        }
    }

    fn term(&mut self) -> Result<Expr, ParseError> {
        let mut e = self.unary()?;
        loop {
            if self.eat(&Tok::Star) {
                e = e * self.unary()?;
            } else if self.eat(&Tok::Slash) {
                e = e / self.unary()?;
            } else {
                return Ok(e);
            }
        }
    }

    fn unary(&mut self) -> Result<Expr, ParseError> {
        if self.eat(&Tok::Minus) {
            return Ok(-self.unary()?);
        }
        self.power()
    }

    fn power(&mut self) -> Result<Expr, ParseError> {
        let base = self.application()?;
        if self.eat(&Tok::Caret) {
            let exp = self.unary()?;
            return Ok(match exp {
                Expr::Nat(k) if k <= u64::from(u32::MAX) => Expr::PowNat(Box::new(base), k as u32),
                other => Expr::Pow(Box::new(base), Box::new(other)),
            });
        }
        Ok(base)
    }

    fn starts_atom(&self) -> bool {
        match self.peek() {
            Some(Tok::Ident(w)) => !is_reserved(w),
            Some(Tok::Int(_) | Tok::Real(_) | Tok::LParen) => true,
            _ => false,
        }
    }

    fn application(&mut self) -> Result<Expr, ParseError> {
        let e = self.atom()?;
        if let Expr::Var(name) = &e {
            if self.starts_atom() {
                let arg = self.atom()?;
                return Ok(Expr::Apply(name.clone(), Box::new(arg)));
            }
        }
        Ok(e)
    }

    fn paren_arg(&mut self) -> Result<Expr, ParseError> {
        if self.peek() == Some(&Tok::LParen) {
            self.idx += 1;
            let e = self.expr()?;
            self.expect(&Tok::RParen)?;
            Ok(e)
        } else {
            self.atom()
        }
    }

    fn atom(&mut self) -> Result<Expr, ParseError> {
        let pos = self.pos();
        match self.bump() {
            Some(Tok::Int(n)) => Ok(Expr::Nat(n)),
            Some(Tok::Real(x)) => Ok(Expr::Const(x)),
            Some(Tok::LParen) => {
                if let (Some(Tok::Ident(f)), Some(Tok::Iter)) = (self.peek(), self.peek_at(1)) {
                    let func = f.clone();
                    self.idx += 2;
                    let count = self.expr()?;
                    self.expect(&Tok::RParen)?;
                    let arg = self.atom()?;
                    return Ok(Expr::Iterate {
                        func,
                        count: Box::new(count),
                        arg: Box::new(arg),
                    });
                }
                let e = self.expr()?;
                self.expect(&Tok::RParen)?;
                Ok(e)
            }
            Some(Tok::Bar) => {
                let e = self.expr()?;
                self.expect(&Tok::Bar)?;
                Ok(Expr::call(Builtin::Abs, e))
            }
            Some(Tok::BrokenBar) => {
                let e = self.expr()?;
                self.expect(&Tok::BrokenBar)?;
                Ok(Expr::call(Builtin::Abs, e))
            }
            Some(Tok::LCeil) => {
                let e = self.expr()?;
                self.expect(&Tok::RCeil)?;
                Ok(Expr::call(Builtin::Ceil, e))
            }
            Some(Tok::LFloor) => {
                let e = self.expr()?;
                self.expect(&Tok::RFloor)?;
                Ok(Expr::call(Builtin::Floor, e))
            }
            Some(Tok::Ident(word)) => self.word_atom(word, pos),
            Some(t) => Err(ParseError::at(
                pos,
                format!("expected an expression, found {t}"),
            )),
            None => Err(ParseError::at(
                pos,
                "expected an expression, found end of input",
            )),
        }
    }

    fn word_atom(&mut self, word: String, pos: Pos) -> Result<Expr, ParseError> {
        if is_reserved(&word) {
            return Err(ParseError::at(
                pos,
                format!("expected an expression, found keyword `{word}`"),
            ));
        }
        if let Some(b) = Builtin::from_name(&word) {
            return Ok(Expr::call(b, self.paren_arg()?));
        }
        match word.as_str() {
            "min" | "max" => {
                self.expect(&Tok::LParen)?;
                let a = self.expr()?;
                self.expect(&Tok::Comma)?;
                let b = self.expr()?;
                self.expect(&Tok::RParen)?;
                Ok(if word == "min" { a.min(b) } else { a.max(b) })
            }
            "nat" => Ok(self.paren_arg()?.nat_of()),
            "log" => {
                let base_pos = self.pos();
                if self.nat_literal()? != 2 {
                    return Err(ParseError::at(
                        base_pos,
                        "only base-2 logarithms are supported",
                    ));
                }
                Ok(Expr::call(Builtin::Log2, self.paren_arg()?))
            }
            "card" | "CARD" => {
                self.expect(&Tok::LParen)?;
                self.eat(&Tok::Apostrophe);
                let name = self.ident()?;
                self.expect(&Tok::RParen)?;
                Ok(Expr::Card(name))
            }
            _ => Ok(Expr::Var(word)),
        }
    }

    // ---- functions and arguments ----

    /// `λx. body`, `\x. body`, or a bare body whose single free variable is the parameter.
    pub fn function(&mut self) -> Result<FuncDef, ParseError> {
        if self.eat(&Tok::Lambda) {
            let param = self.ident()?;
            self.expect(&Tok::Dot)?;
            let body = self.expr()?;
            return Ok(FuncDef { param, body });
        }
        let pos = self.pos();
        let body = self.expr()?;
        let mut free = BTreeSet::new();
        collect_vars(&body, &mut free);
        let param = match free.len() {
            0 => "x".to_string(),
            1 => free.into_iter().next().unwrap_or_default(),
            _ => {
                return Err(ParseError::at(
                    pos,
                    "function body has several free variables; bind one with `λ`",
                ))
            }
        };
        Ok(FuncDef { param, body })
    }

    /// A single actual argument of the given sort.
    pub fn arg_value(&mut self, sort: Sort) -> Result<Arg, ParseError> {
        let pos = self.pos();
        match sort {
            Sort::Fun => self.function().map(Arg::Func),
            Sort::Vec(n) => {
                self.eat_word("Vector");
                self.expect(&Tok::LBracket)?;
                let mut xs = Vec::new();
                if !self.eat(&Tok::RBracket) {
                    loop {
                        xs.push(self.const_real()?);
                        if self.eat(&Tok::RBracket) {
                            break;
                        }
                        self.expect(&Tok::Comma)?;
                    }
                }
                if xs.len() != n {
                    return Err(ParseError::at(
                        pos,
                        format!("expected a vector of length {n}, found length {}", xs.len()),
                    ));
                }
                Ok(Arg::Value(Value::Vec(xs)))
            }
            Sort::Nat => match self.const_value()? {
                Value::Nat(n) => Ok(Arg::Value(Value::Nat(n))),
                Value::Real(x) if x >= 0.0 && x.fract() == 0.0 && x < 2f64.powi(64) => {
                    Ok(Arg::Value(Value::Nat(x as u64)))
                }
                other => Err(ParseError::at(
                    pos,
                    format!("expected a natural number, found {other}"),
                )),
            },
            Sort::Real => self.const_real().map(|x| Arg::Value(Value::Real(x))),
        }
    }

    fn const_value(&mut self) -> Result<Value, ParseError> {
        let pos = self.pos();
        let e = self.expr()?;
        eval_expr(&e, &Env::new(), &Funcs::new())
            .map_err(|err| ParseError::at(pos, format!("argument is not a constant: {err}")))
    }

    /// A closed real-valued constant expression such as `-1.5` or `2^-10`.
    pub fn const_real(&mut self) -> Result<f64, ParseError> {
        let pos = self.pos();
        self.const_value()?
            .as_f64()
            .ok_or_else(|| ParseError::at(pos, "expected a real number"))
    }

    /// `name = value, ...` with each value parsed at its parameter's sort.
    pub fn args(&mut self, params: &[Param]) -> Result<Vec<(String, Arg)>, ParseError> {
        let mut out: Vec<(String, Arg)> = Vec::new();
        if !self.starts_atom() {
            return Ok(out);
        }
        loop {
            let pos = self.pos();
            let name = self.ident()?;
            let Some(param) = params.iter().find(|p| p.name == name) else {
                return Err(ParseError::at(pos, format!("unknown parameter `{name}`")));
            };
            if out.iter().any(|(n, _)| *n == name) {
                return Err(ParseError::at(
                    pos,
                    format!("parameter `{name}` given twice"),
                ));
            }
            self.expect(&Tok::Eq)?;
            let v = self.arg_value(param.sort)?;
            out.push((name, v));
            if !self.eat(&Tok::Comma) {
                return Ok(out);
            }
        }
    }

    pub fn finish(&self) -> Result<(), ParseError> {
        if self.at_end() {
            Ok(())
        } else {
            Err(self.unexpected("end of input"))
        }
    }
}

fn collect_vars(e: &Expr, out: &mut BTreeSet<String>) {
    match e {
        Expr::Const(_) | Expr::Nat(_) | Expr::Card(_) => {}
        Expr::Var(v) => {
            out.insert(v.clone());
        }
        Expr::Neg(a) | Expr::PowNat(a, _) | Expr::Call(_, a) | Expr::Apply(_, a) => {
            collect_vars(a, out)
        }
        Expr::Binary(_, a, b) | Expr::Pow(a, b) => {
            collect_vars(a, out);
            collect_vars(b, out);
        }
        Expr::Iterate { count, arg, .. } => {
            collect_vars(count, out);
            collect_vars(arg, out);
        }
    }
}

fn whole<T>(
    src: &str,
    f: impl FnOnce(&mut Parser) -> Result<T, ParseError>,
) -> Result<T, ParseError> {
    let mut p = Parser::new(src)?;
    let out = f(&mut p)?;
    p.finish()?;
    Ok(out)
}

pub fn parse_program(src: &str) -> Result<Program, ParseError> {
    whole(src, Parser::program)
}

pub fn parse_cond(src: &str) -> Result<Cond, ParseError> {
    whole(src, Parser::cond)
}

pub fn parse_expr(src: &str) -> Result<Expr, ParseError> {
    whole(src, Parser::expr)
}

pub fn parse_function(src: &str) -> Result<FuncDef, ParseError> {
    whole(src, Parser::function)
}

/// Parses `f=x^2-2, a=1, ...` against a parameter list.
pub fn parse_arg_list(src: &str, params: &[Param]) -> Result<Vec<(String, Arg)>, ParseError> {
    whole(src, |p| p.args(params))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn v(s: &str) -> Expr {
        Expr::var(s)
    }

    #[test]
    fn skip_program() {
        let p = parse_program(r#"program p(x::real) = "skip""#).unwrap();
        assert_eq!(p.body, Stmt::Skip);
        assert_eq!(
            p.params,
            vec![Param {
                name: "x".into(),
                sort: Sort::Real
            }]
        );
    }

    #[test]
    fn precedence() {
        assert_eq!(parse_expr("a + b * c").unwrap(), v("a") + v("b") * v("c"));
        assert_eq!(parse_expr("a - b - c").unwrap(), (v("a") - v("b")) - v("c"));
        assert_eq!(parse_expr("-x^2").unwrap(), -(v("x").powi(2)));
        assert_eq!(
            parse_expr("2^iter").unwrap(),
            Expr::Pow(Box::new(Expr::Nat(2)), Box::new(v("iter")))
        );
        assert_eq!(
            parse_expr("f x^2").unwrap(),
            Expr::apply("f", v("x")).powi(2)
        );
    }

    #[test]
    fn notational_forms() {
        assert_eq!(
            parse_expr("¦c - xmid¦").unwrap(),
            parse_expr("abs(c - xmid)").unwrap()
        );
        assert_eq!(parse_expr("|x|").unwrap(), parse_expr("abs x").unwrap());
        assert_eq!(
            parse_expr("⌈log 2 ((b - a) / tol)⌉").unwrap(),
            Expr::call(
                Builtin::Ceil,
                Expr::call(Builtin::Log2, (v("b") - v("a")) / v("tol"))
            )
        );
        assert_eq!(
            parse_expr("nat(e)").unwrap(),
            Expr::call(Builtin::Floor, v("e")).max(Expr::Nat(0))
        );
        assert_eq!(parse_expr("CARD('n)").unwrap(), Expr::Card("n".into()));
        assert_eq!(
            parse_expr("(f ^^ itr) x0").unwrap(),
            Expr::Iterate {
                func: "f".into(),
                count: Box::new(v("itr")),
                arg: Box::new(v("x0"))
            }
        );
    }

    #[test]
    fn parenthesised_conditions_and_expressions() {
        let c = parse_cond("(iter = 0 ∨ 2 * (upper - lower) > tol)").unwrap();
        assert!(matches!(c, Cond::Or(..)));
        let c = parse_cond("(b - a) / tol > 1").unwrap();
        assert!(matches!(c, Cond::Cmp(CmpOp::Gt, ..)));
        let c = parse_cond("0 < tol < b - a").unwrap();
        assert_eq!(c.conjuncts().len(), 2);
    }

    #[test]
    fn quantifiers() {
        let c = parse_cond("i ≤ card(X) ∧ (∀k<i. vc k = n * X k)").unwrap();
        let parts = c.conjuncts();
        assert!(matches!(parts[1], Cond::Forall { .. }));
        let c = parse_cond("∃c. f(c) = 0 ∧ a < c").unwrap();
        assert!(matches!(c, Cond::ExistsReal { .. }));
    }

    #[test]
    fn implication_is_right_associative() {
        let c = parse_cond("p = 1 ⟶ q = 1 ⟶ r = 1").unwrap();
        match c {
            Cond::Implies(_, rhs) => assert!(matches!(*rhs, Cond::Implies(..))),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn while_without_invariant_is_rejected() {
        let err = parse_program(r#"program p() = "while true variant 0 do skip od""#).unwrap_err();
        assert!(err.message.contains("invariant"), "{err}");
        let err =
            parse_program(r#"program p() = "while true invariant true do skip od""#).unwrap_err();
        assert!(err.message.contains("variant"), "{err}");
    }

    #[test]
    fn errors_carry_positions() {
        let err = parse_program("program p(x::real) =\n  \"x := \"").unwrap_err();
        assert_eq!((err.line, err.col), (2, 9));
        let err = parse_program(r#"program p(x::complex) = "skip""#).unwrap_err();
        assert!(err.message.contains("unknown sort"), "{err}");
    }

    #[test]
    fn isabelle_style_header() {
        let p = parse_program(
            r#"program q "(f :: real ⇒ real, X :: real vec[3], n :: nat)" over state = "skip""#,
        )
        .unwrap();
        let sorts: Vec<Sort> = p.params.iter().map(|p| p.sort).collect();
        assert_eq!(sorts, vec![Sort::Fun, Sort::Vec(3), Sort::Nat]);
    }

    #[test]
    fn argument_lists() {
        let p = parse_program(r#"program q(f::fun, a::real, n::nat, X::vec[2]) = "skip""#).unwrap();
        let args = parse_arg_list("f=x^2-2, a=-1.5, n=3, X=[1, 2^-1]", &p.params).unwrap();
        assert_eq!(
            args[0].1,
            Arg::Func(FuncDef::new("x", v("x").powi(2) - Expr::Nat(2)))
        );
        assert_eq!(args[1].1, Arg::Value(Value::Real(-1.5)));
        assert_eq!(args[2].1, Arg::Value(Value::Nat(3)));
        assert_eq!(args[3].1, Arg::Value(Value::Vec(vec![1.0, 0.5])));
        assert!(parse_arg_list("X=[1]", &p.params).is_err());
        assert!(parse_arg_list("n=1.5", &p.params).is_err());
        assert!(parse_arg_list("z=1", &p.params).is_err());
        let f = parse_function("λt. (3/t + t)/2").unwrap();
        assert_eq!(f.param, "t");
        assert!(parse_function("x + y").is_err());
    }
}
