//! Unimodal formula ASTs: parsing, printing, modal degree and Boolean
//! evaluation of level-0 formulas.
//!
//! Surface syntax (descending precedence): `! <> []`, `&`, `+`, `->`, `<->`,
//! with `&` left-associative and `->` right-associative. Variables are
//! `p1 p2 ...`, constants `0` and `1`.

use crate::Error;

#[derive(Clone, PartialEq, Eq, Hash)]
pub enum Formula {
    Const0,
    Const1,
    /// 1-based variable index.
    Var(u32),
    Not(Box<Formula>),
    Dia(Box<Formula>),
    /// Necessity; normalization rewrites it as `!<>!`.
    Nec(Box<Formula>),
    And(Box<Formula>, Box<Formula>),
    Or(Box<Formula>, Box<Formula>),
    Imp(Box<Formula>, Box<Formula>),
    Iff(Box<Formula>, Box<Formula>),
}

impl Formula {
    pub fn var(i: u32) -> Formula {
        assert!(i >= 1, "variable index is 1-based");
        Formula::Var(i)
    }

    #[allow(clippy::should_implement_trait)]
    pub fn not(f: Formula) -> Formula {
        Formula::Not(Box::new(f))
    }

    pub fn dia(f: Formula) -> Formula {
        Formula::Dia(Box::new(f))
    }

    pub fn nec(f: Formula) -> Formula {
        Formula::Nec(Box::new(f))
    }

    pub fn and(a: Formula, b: Formula) -> Formula {
        Formula::And(Box::new(a), Box::new(b))
    }

    pub fn or(a: Formula, b: Formula) -> Formula {
        Formula::Or(Box::new(a), Box::new(b))
    }

    pub fn imp(a: Formula, b: Formula) -> Formula {
        Formula::Imp(Box::new(a), Box::new(b))
    }

    pub fn iff(a: Formula, b: Formula) -> Formula {
        Formula::Iff(Box::new(a), Box::new(b))
    }

    /// Largest number of nested modal operators.
    pub fn modal_degree(&self) -> u32 {
        match self {
            Formula::Const0 | Formula::Const1 | Formula::Var(_) => 0,
            Formula::Not(f) => f.modal_degree(),
            Formula::Dia(f) | Formula::Nec(f) => f.modal_degree() + 1,
            Formula::And(a, b)
            | Formula::Or(a, b)
            | Formula::Imp(a, b)
            | Formula::Iff(a, b) => a.modal_degree().max(b.modal_degree()),
        }
    }

    /// Largest variable index occurring in the formula (0 if none).
    pub fn max_var(&self) -> u32 {
        match self {
            Formula::Const0 | Formula::Const1 => 0,
            Formula::Var(i) => *i,
            Formula::Not(f) | Formula::Dia(f) | Formula::Nec(f) => f.max_var(),
            Formula::And(a, b)
            | Formula::Or(a, b)
            | Formula::Imp(a, b)
            | Formula::Iff(a, b) => a.max_var().max(b.max_var()),
        }
    }

    /// Classical valuation of a level-0 formula. `assignment[i]` is the value
    /// of `p(i+1)` and must cover every variable of the formula.
    pub fn bool_eval(&self, assignment: &[bool]) -> Result<bool, Error> {
        if self.modal_degree() > 0 {
            return Err(Error::Domain(
                "bool_eval requires a modality-free formula".into(),
            ));
        }
        if self.max_var() as usize > assignment.len() {
            return Err(Error::Domain(format!(
                "assignment covers {} variables but formula uses p{}",
                assignment.len(),
                self.max_var()
            )));
        }
        Ok(self.eval_prop(assignment))
    }

    fn eval_prop(&self, assignment: &[bool]) -> bool {
        match self {
            Formula::Const0 => false,
            Formula::Const1 => true,
            Formula::Var(i) => assignment[*i as usize - 1],
            Formula::Not(f) => !f.eval_prop(assignment),
            Formula::And(a, b) => a.eval_prop(assignment) && b.eval_prop(assignment),
            Formula::Or(a, b) => a.eval_prop(assignment) || b.eval_prop(assignment),
            Formula::Imp(a, b) => !a.eval_prop(assignment) || b.eval_prop(assignment),
            Formula::Iff(a, b) => a.eval_prop(assignment) == b.eval_prop(assignment),
            Formula::Dia(_) | Formula::Nec(_) => unreachable!("checked modality-free"),
        }
    }

    fn precedence(&self) -> u8 {
        match self {
            Formula::Iff(..) => 0,
            Formula::Imp(..) => 1,
            Formula::Or(..) => 2,
            Formula::And(..) => 3,
            _ => 4,
        }
    }
}

pub fn parse(text: &str) -> Result<Formula, Error> {
    let tokens = lex(text)?;
    let mut p = Parser { tokens, pos: 0 };
    let f = p.formula()?;
    match p.peek() {
        (Token::End, _) => Ok(f),
        (tok, at) => Err(Error::Parse {
            pos: at,
            msg: format!("unexpected {tok}"),
        }),
    }
}

pub fn print(f: &Formula) -> String {
    let mut out = String::new();
    write_formula(f, &mut out);
    out
}

impl std::fmt::Display for Formula {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&print(self))
    }
}

impl std::fmt::Debug for Formula {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&print(self))
    }
}

impl std::str::FromStr for Formula {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        parse(s)
    }
}

fn write_formula(f: &Formula, out: &mut String) {
    match f {
        Formula::Const0 => out.push('0'),
        Formula::Const1 => out.push('1'),
        Formula::Var(i) => {
            out.push('p');
            out.push_str(&i.to_string());
        }
        Formula::Not(g) => {
            out.push('!');
            write_child(g, out, 4);
        }
        Formula::Dia(g) => {
            out.push_str("<>");
            write_child(g, out, 4);
        }
        Formula::Nec(g) => {
            out.push_str("[]");
            write_child(g, out, 4);
        }
        Formula::And(a, b) => {
            write_child(a, out, 3);
            out.push_str(" & ");
            // parenthesize an `&` right child to keep left association
            write_child_strict(b, out, 3);
        }
        Formula::Or(a, b) => {
            write_child(a, out, 2);
            out.push_str(" + ");
            write_child_strict(b, out, 2);
        }
        Formula::Imp(a, b) => {
            // right-associative: the left child needs parens at equal level
            write_child_strict(a, out, 1);
            out.push_str(" -> ");
            write_child(b, out, 1);
        }
        Formula::Iff(a, b) => {
            write_child(a, out, 0);
            out.push_str(" <-> ");
            write_child_strict(b, out, 0);
        }
    }
}

fn write_child(f: &Formula, out: &mut String, min_prec: u8) {
    if f.precedence() < min_prec {
        out.push('(');
        write_formula(f, out);
        out.push(')');
    } else {
        write_formula(f, out);
    }
}

fn write_child_strict(f: &Formula, out: &mut String, min_prec: u8) {
    if f.precedence() <= min_prec {
        out.push('(');
        write_formula(f, out);
        out.push(')');
    } else {
        write_formula(f, out);
    }
}

#[derive(Clone, Copy, PartialEq)]
enum Token {
    Const0,
    Const1,
    Var(u32),
    Bang,
    Dia,
    Nec,
    Amp,
    Plus,
    Arrow,
    DArrow,
    LParen,
    RParen,
    End,
}

impl std::fmt::Display for Token {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let s = match self {
            Token::Const0 => "'0'",
            Token::Const1 => "'1'",
            Token::Var(_) => "variable",
            Token::Bang => "'!'",
            Token::Dia => "'<>'",
            Token::Nec => "'[]'",
            Token::Amp => "'&'",
            Token::Plus => "'+'",
            Token::Arrow => "'->'",
            Token::DArrow => "'<->'",
            Token::LParen => "'('",
            Token::RParen => "')'",
            Token::End => "end of input",
        };
        f.write_str(s)
    }
}

fn lex(text: &str) -> Result<Vec<(Token, usize)>, Error> {
    let bytes = text.as_bytes();
    let mut out = Vec::new();
    let mut i = 0;
    while i < bytes.len() {
        let at = i;
        match bytes[i] {
            b' ' | b'\t' | b'\n' | b'\r' => i += 1,
            b'0' => {
                out.push((Token::Const0, at));
                i += 1;
            }
            b'1' => {
                out.push((Token::Const1, at));
                i += 1;
            }
            b'!' => {
                out.push((Token::Bang, at));
                i += 1;
            }
            b'&' => {
                out.push((Token::Amp, at));
                i += 1;
            }
            b'+' => {
                out.push((Token::Plus, at));
                i += 1;
            }
            b'(' => {
                out.push((Token::LParen, at));
                i += 1;
            }
            b')' => {
                out.push((Token::RParen, at));
                i += 1;
            }
            b'-' => {
                if bytes.get(i + 1) == Some(&b'>') {
                    out.push((Token::Arrow, at));
                    i += 2;
                } else {
                    return Err(Error::Parse {
                        pos: at,
                        msg: "expected '->'".into(),
                    });
                }
            }
            b'<' => {
                if bytes.get(i + 1) == Some(&b'>') {
                    out.push((Token::Dia, at));
                    i += 2;
                } else if bytes.get(i + 1) == Some(&b'-') && bytes.get(i + 2) == Some(&b'>') {
                    out.push((Token::DArrow, at));
                    i += 3;
                } else {
                    return Err(Error::Parse {
                        pos: at,
                        msg: "expected '<>' or '<->'".into(),
                    });
                }
            }
            b'[' => {
                if bytes.get(i + 1) == Some(&b']') {
                    out.push((Token::Nec, at));
                    i += 2;
                } else {
                    return Err(Error::Parse {
                        pos: at,
                        msg: "expected '[]'".into(),
                    });
                }
            }
            b'p' => {
                let start = i + 1;
                let mut end = start;
                while end < bytes.len() && bytes[end].is_ascii_digit() {
                    end += 1;
                }
                if end == start {
                    return Err(Error::Parse {
                        pos: at,
                        msg: "expected digits after 'p'".into(),
                    });
                }
                let idx: u32 = text[start..end].parse().map_err(|_| Error::Parse {
                    pos: at,
                    msg: "variable index out of range".into(),
                })?;
                if idx == 0 {
                    return Err(Error::Parse {
                        pos: at,
                        msg: "variable index 0 is invalid (indices are 1-based)".into(),
                    });
                }
                out.push((Token::Var(idx), at));
                i = end;
            }
            c => {
                return Err(Error::Parse {
                    pos: at,
                    msg: format!("unexpected character '{}'", c as char),
                });
            }
        }
    }
    out.push((Token::End, bytes.len()));
    Ok(out)
}

struct Parser {
    tokens: Vec<(Token, usize)>,
    pos: usize,
}

impl Parser {
    fn peek(&self) -> (Token, usize) {
        self.tokens[self.pos]
    }

    fn bump(&mut self) -> (Token, usize) {
        let t = self.tokens[self.pos];
        if self.pos + 1 < self.tokens.len() {
            self.pos += 1;
        }
        t
    }

    fn formula(&mut self) -> Result<Formula, Error> {
        self.iff()
    }

    fn iff(&mut self) -> Result<Formula, Error> {
        let mut f = self.imp()?;
        while self.peek().0 == Token::DArrow {
            self.bump();
            let rhs = self.imp()?;
            f = Formula::iff(f, rhs);
        }
        Ok(f)
    }

    fn imp(&mut self) -> Result<Formula, Error> {
        let lhs = self.or()?;
        if self.peek().0 == Token::Arrow {
            self.bump();
            let rhs = self.imp()?;
            Ok(Formula::imp(lhs, rhs))
        } else {
            Ok(lhs)
        }
    }

    fn or(&mut self) -> Result<Formula, Error> {
        let mut f = self.and()?;
        while self.peek().0 == Token::Plus {
            self.bump();
            let rhs = self.and()?;
            f = Formula::or(f, rhs);
        }
        Ok(f)
    }

    fn and(&mut self) -> Result<Formula, Error> {
        let mut f = self.unary()?;
        while self.peek().0 == Token::Amp {
            self.bump();
            let rhs = self.unary()?;
            f = Formula::and(f, rhs);
        }
        Ok(f)
    }

    fn unary(&mut self) -> Result<Formula, Error> {
        match self.peek().0 {
            Token::Bang => {
                self.bump();
                Ok(Formula::not(self.unary()?))
            }
            Token::Dia => {
                self.bump();
                Ok(Formula::dia(self.unary()?))
            }
            Token::Nec => {
                self.bump();
                Ok(Formula::nec(self.unary()?))
            }
            _ => self.atom(),
        }
    }

    fn atom(&mut self) -> Result<Formula, Error> {
        let (tok, at) = self.bump();
        match tok {
            Token::Const0 => Ok(Formula::Const0),
            Token::Const1 => Ok(Formula::Const1),
            Token::Var(i) => Ok(Formula::Var(i)),
            Token::LParen => {
                let f = self.formula()?;
                let (tok, at) = self.bump();
                if tok == Token::RParen {
                    Ok(f)
                } else {
                    Err(Error::Parse {
                        pos: at,
                        msg: format!("expected ')', found {tok}"),
                    })
                }
            }
            tok => Err(Error::Parse {
                pos: at,
                msg: format!("expected a formula, found {tok}"),
            }),
        }
    }
}
