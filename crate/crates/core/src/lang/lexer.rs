use std::fmt;

/// One-based source position.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Pos {
    pub line: usize,
    pub col: usize,
}

impl fmt::Display for Pos {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}", self.line, self.col)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Tok {
    /// Integer literal without fraction or exponent.
    Int(u64),
    Real(f64),
    Ident(String),
    LParen,
    RParen,
    LBracket,
    RBracket,
    Comma,
    Semi,
    Dot,
    Colon,
    Assign,
    DoubleColon,
    Eq,
    Ne,
    Lt,
    Le,
    Gt,
    Ge,
    Plus,
    Minus,
    Star,
    Slash,
    Caret,
    /// `^^`, function iteration.
    Iter,
    Bar,
    BrokenBar,
    LCeil,
    RCeil,
    LFloor,
    RFloor,
    And,
    Or,
    Not,
    Implies,
    Forall,
    Exists,
    Lambda,
    /// Function-space arrow `⇒` or `=>`.
    Arrow,
    Quote,
    Apostrophe,
}

impl fmt::Display for Tok {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            Tok::Int(n) => return write!(f, "{n}"),
            Tok::Real(x) => return write!(f, "{x}"),
            Tok::Ident(s) => return write!(f, "`{s}`"),
            Tok::LParen => "(",
            Tok::RParen => ")",
            Tok::LBracket => "[",
            Tok::RBracket => "]",
            Tok::Comma => ",",
            Tok::Semi => ";",
            Tok::Dot => ".",
            Tok::Colon => ":",
            Tok::Assign => ":=",
            Tok::DoubleColon => "::",
            Tok::Eq => "=",
            Tok::Ne => "≠",
            Tok::Lt => "<",
            Tok::Le => "≤",
            Tok::Gt => ">",
            Tok::Ge => "≥",
            Tok::Plus => "+",
            Tok::Minus => "-",
            Tok::Star => "*",
            Tok::Slash => "/",
            Tok::Caret => "^",
            Tok::Iter => "^^",
            Tok::Bar => "|",
            Tok::BrokenBar => "¦",
            Tok::LCeil => "⌈",
            Tok::RCeil => "⌉",
            Tok::LFloor => "⌊",
            Tok::RFloor => "⌋",
            Tok::And => "∧",
            Tok::Or => "∨",
            Tok::Not => "¬",
            Tok::Implies => "⟶",
            Tok::Forall => "∀",
            Tok::Exists => "∃",
            Tok::Lambda => "λ",
            Tok::Arrow => "⇒",
            Tok::Quote => "\"",
            Tok::Apostrophe => "'",
        };
        f.write_str(s)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Token {
    pub tok: Tok,
    pub pos: Pos,
}

#[derive(Debug, Clone, PartialEq)]
pub(crate) struct LexError {
    pub pos: Pos,
    pub message: String,
}

struct Cursor<'a> {
    chars: std::iter::Peekable<std::str::CharIndices<'a>>,
    src: &'a str,
    line: usize,
    col: usize,
}

impl<'a> Cursor<'a> {
    fn pos(&self) -> Pos {
        Pos {
            line: self.line,
            col: self.col,
        }
    }

    fn peek(&mut self) -> Option<char> {
        self.chars.peek().map(|&(_, c)| c)
    }

    fn peek2(&self) -> Option<char> {
        let mut it = self.chars.clone();
        it.next();
        it.next().map(|(_, c)| c)
    }

    fn bump(&mut self) -> Option<char> {
        let (_, c) = self.chars.next()?;
        if c == '\n' {
            self.line += 1;
            self.col = 1;
        } else {
            self.col += 1;
        }
        Some(c)
    }

    fn offset(&mut self) -> usize {
        self.chars.peek().map_or(self.src.len(), |&(i, _)| i)
    }

    fn eat(&mut self, c: char) -> bool {
        if self.peek() == Some(c) {
            self.bump();
            true
        } else {
            false
        }
    }
}

pub(crate) fn tokenize(src: &str) -> Result<Vec<Token>, LexError> {
    let mut cur = Cursor {
        chars: src.char_indices().peekable(),
        src,
        line: 1,
        col: 1,
    };
    let mut out = Vec::new();
    while let Some(c) = cur.peek() {
        let pos = cur.pos();
        if c.is_whitespace() {
            cur.bump();
            continue;
        }
        if c == '-' && cur.peek2() == Some('-') {
            let mut it = cur.chars.clone();
            it.next();
            it.next();
            // `-->` is the ASCII implication arrow, not a comment.
            if it.peek().map(|&(_, c)| c) == Some('>') {
                cur.bump();
                cur.bump();
                cur.bump();
                out.push(Token {
                    tok: Tok::Implies,
                    pos,
                });
                continue;
            }
            while let Some(c) = cur.peek() {
                if c == '\n' {
                    break;
                }
                cur.bump();
            }
            continue;
        }
        if c.is_ascii_digit() {
            out.push(Token {
                tok: lex_number(&mut cur)?,
                pos,
            });
            continue;
        }
        if (c.is_alphabetic() || c == '_') && c != 'λ' {
            let start = cur.offset();
            while let Some(c) = cur.peek() {
                if (c.is_alphanumeric() || c == '_') && c != 'λ' {
                    cur.bump();
                } else {
                    break;
                }
            }
            let end = cur.offset();
            out.push(Token {
                tok: Tok::Ident(src[start..end].to_string()),
                pos,
            });
            continue;
        }
        cur.bump();
        let tok = match c {
            '(' => Tok::LParen,
            ')' => Tok::RParen,
            '[' => Tok::LBracket,
            ']' => Tok::RBracket,
            ',' => Tok::Comma,
            ';' => Tok::Semi,
            '.' => Tok::Dot,
            ':' => {
                if cur.eat('=') {
                    Tok::Assign
                } else if cur.eat(':') {
                    Tok::DoubleColon
                } else {
                    Tok::Colon
                }
            }
            '=' => {
                if cur.eat('=') {
                    if cur.eat('>') {
                        Tok::Implies
                    } else {
                        Tok::Eq
                    }
                } else if cur.eat('>') {
                    Tok::Arrow
                } else {
                    Tok::Eq
                }
            }
            '!' => {
                if cur.eat('=') {
                    Tok::Ne
                } else {
                    Tok::Not
                }
            }
            '<' => {
                if cur.eat('=') {
                    Tok::Le
                } else if cur.eat('>') {
                    Tok::Ne
                } else {
                    Tok::Lt
                }
            }
            '>' => {
                if cur.eat('=') {
                    Tok::Ge
                } else {
                    Tok::Gt
                }
            }
            '+' => Tok::Plus,
            '-' => {
                if cur.eat('>') {
                    Tok::Implies
                } else {
                    Tok::Minus
                }
            }
            '*' => Tok::Star,
            '/' => {
                if cur.eat('\\') {
                    Tok::And
                } else {
                    Tok::Slash
                }
            }
            '\\' => {
                if cur.eat('/') {
                    Tok::Or
                } else {
                    Tok::Lambda
                }
            }
            '^' => {
                if cur.eat('^') {
                    Tok::Iter
                } else {
                    Tok::Caret
                }
            }
            '|' => {
                if cur.eat('|') {
                    Tok::Or
                } else {
                    Tok::Bar
                }
            }
            '&' => {
                if cur.eat('&') {
                    Tok::And
                } else {
                    return Err(LexError {
                        pos,
                        message: "expected `&&`".into(),
                    });
                }
            }
            '¦' => Tok::BrokenBar,
            '⌈' => Tok::LCeil,
            '⌉' => Tok::RCeil,
            '⌊' => Tok::LFloor,
            '⌋' => Tok::RFloor,
            '∧' => Tok::And,
            '∨' => Tok::Or,
            '¬' => Tok::Not,
            '⟶' | '⟹' | '→' => Tok::Implies,
            '⇒' => Tok::Arrow,
            '≤' => Tok::Le,
            '≥' => Tok::Ge,
            '≠' => Tok::Ne,
            '∀' => Tok::Forall,
            '∃' => Tok::Exists,
            'λ' => Tok::Lambda,
            '"' => Tok::Quote,
            '\'' => Tok::Apostrophe,
            other => {
                return Err(LexError {
                    pos,
                    message: format!("unexpected character `{other}`"),
                })
            }
        };
        out.push(Token { tok, pos });
    }
    Ok(out)
}

fn lex_number(cur: &mut Cursor<'_>) -> Result<Tok, LexError> {
    let pos = cur.pos();
    let start = cur.offset();
    if cur.peek() == Some('0') && matches!(cur.peek2(), Some('x' | 'X')) {
        cur.bump();
        cur.bump();
        let digits = cur.offset();
        while cur.peek().is_some_and(|c| c.is_ascii_hexdigit()) {
            cur.bump();
        }
        let end = cur.offset();
        return u64::from_str_radix(&cur.src[digits..end], 16)
            .map(Tok::Int)
            .map_err(|_| LexError {
                pos,
                message: format!("malformed hex literal `{}`", &cur.src[start..end]),
            });
    }
    let mut integral = true;
    while cur.peek().is_some_and(|c| c.is_ascii_digit()) {
        cur.bump();
    }
    if cur.peek() == Some('.') && cur.peek2().is_some_and(|c| c.is_ascii_digit()) {
        integral = false;
        cur.bump();
        while cur.peek().is_some_and(|c| c.is_ascii_digit()) {
            cur.bump();
        }
    }
    if matches!(cur.peek(), Some('e' | 'E')) {
        let sign_ok = match cur.peek2() {
            Some(c) if c.is_ascii_digit() => true,
            Some('+' | '-') => {
                let mut it = cur.chars.clone();
                it.next();
                it.next();
                it.next().is_some_and(|(_, c)| c.is_ascii_digit())
            }
            _ => false,
        };
        if sign_ok {
            integral = false;
            cur.bump();
            if matches!(cur.peek(), Some('+' | '-')) {
                cur.bump();
            }
            while cur.peek().is_some_and(|c| c.is_ascii_digit()) {
                cur.bump();
            }
        }
    }
    let end = cur.offset();
    let text = &cur.src[start..end];
    let err = || LexError {
        pos,
        message: format!("malformed number `{text}`"),
    };
    if integral {
        text.parse::<u64>().map(Tok::Int).map_err(|_| err())
    } else {
        text.parse::<f64>().map(Tok::Real).map_err(|_| err())
    }
}
