//! Problem file parser and printer.
//!
//! ```text
//! # expect: proved
//! hyp 0 < x < 1
//! conclude x^2 < x
//! axiom forall x y. f(x + y) = f(x) * f(y)
//! term f(2*x)
//! ```

use std::collections::BTreeSet;
use std::fmt;
use std::str::FromStr;

use num_bigint::BigInt;
use num_traits::{One, Zero};
use thiserror::Error;

use crate::comparison::Rel;
use crate::rat::Rat;
use crate::term::Expr;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("line {line}, column {col}: {msg}")]
pub struct ParseError {
    pub line: usize,
    pub col: usize,
    pub msg: String,
}

/// Quantifier-free formula over comparisons.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum Formula {
    Atom(Expr, Rel, Expr),
    Not(Box<Formula>),
    And(Vec<Formula>),
    Or(Vec<Formula>),
    Implies(Box<Formula>, Box<Formula>),
}

impl Formula {
    pub fn functions(&self, out: &mut BTreeSet<String>) {
        match self {
            Formula::Atom(a, _, b) => {
                a.functions(out);
                b.functions(out);
            }
            Formula::Not(f) => f.functions(out),
            Formula::And(fs) | Formula::Or(fs) => fs.iter().for_each(|f| f.functions(out)),
            Formula::Implies(a, b) => {
                a.functions(out);
                b.functions(out);
            }
        }
    }

    pub fn vars(&self, out: &mut BTreeSet<String>) {
        match self {
            Formula::Atom(a, _, b) => {
                out.extend(a.vars());
                out.extend(b.vars());
            }
            Formula::Not(f) => f.vars(out),
            Formula::And(fs) | Formula::Or(fs) => fs.iter().for_each(|f| f.vars(out)),
            Formula::Implies(a, b) => {
                a.vars(out);
                b.vars(out);
            }
        }
    }

    /// Evaluate with `eval` supplying expression values; `None` if undefined.
    pub fn holds(&self, eval: &dyn Fn(&Expr) -> Option<Rat>) -> Option<bool> {
        Some(match self {
            Formula::Atom(a, r, b) => r.holds(&eval(a)?, &eval(b)?),
            Formula::Not(f) => !f.holds(eval)?,
            Formula::And(fs) => {
                let mut all = true;
                for f in fs {
                    all &= f.holds(eval)?;
                }
                all
            }
            Formula::Or(fs) => {
                let mut any = false;
                for f in fs {
                    any |= f.holds(eval)?;
                }
                any
            }
            Formula::Implies(a, b) => !a.holds(eval)? || b.holds(eval)?,
        })
    }
}

impl fmt::Display for Formula {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fn child(f: &mut fmt::Formatter<'_>, g: &Formula) -> fmt::Result {
            match g {
                Formula::Atom(..) => write!(f, "{g}"),
                _ => write!(f, "({g})"),
            }
        }
        match self {
            Formula::Atom(a, r, b) => write!(f, "{a} {r} {b}"),
            Formula::Not(g) => {
                write!(f, "not ")?;
                child(f, g)
            }
            Formula::And(gs) | Formula::Or(gs) => {
                let sep = if matches!(self, Formula::And(_)) {
                    " and "
                } else {
                    " or "
                };
                for (k, g) in gs.iter().enumerate() {
                    if k > 0 {
                        write!(f, "{sep}")?;
                    }
                    child(f, g)?;
                }
                Ok(())
            }
            Formula::Implies(a, b) => {
                child(f, a)?;
                write!(f, " -> ")?;
                child(f, b)
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AxiomDecl {
    pub vars: Vec<String>,
    pub body: Formula,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Expected {
    Proved,
    Unknown,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Expectation {
    pub verdict: Expected,
    pub depth: Option<u32>,
}

/// A parsed problem: refute `hyps` together with the negated conclusion.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct Problem {
    pub hyps: Vec<Formula>,
    pub conclusion: Option<Formula>,
    pub axioms: Vec<AxiomDecl>,
    pub terms: Vec<Expr>,
    pub expect: Option<Expectation>,
}

impl Problem {
    /// True when no uninterpreted or transcendental function is involved.
    pub fn is_arithmetic(&self) -> bool {
        let mut fs = BTreeSet::new();
        for h in &self.hyps {
            h.functions(&mut fs);
        }
        if let Some(c) = &self.conclusion {
            c.functions(&mut fs);
        }
        for t in &self.terms {
            t.functions(&mut fs);
        }
        self.axioms.is_empty()
            && fs
                .iter()
                .all(|f| matches!(f.as_str(), "abs" | "min" | "max" | "floor" | "ceil"))
    }
}

impl fmt::Display for Problem {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if let Some(e) = &self.expect {
            let v = match e.verdict {
                Expected::Proved => "proved",
                Expected::Unknown => "unknown",
            };
            match e.depth {
                Some(d) => writeln!(f, "# expect: {v} depth={d}")?,
                None => writeln!(f, "# expect: {v}")?,
            }
        }
        for h in &self.hyps {
            writeln!(f, "hyp {h}")?;
        }
        if let Some(c) = &self.conclusion {
            writeln!(f, "conclude {c}")?;
        }
        for a in &self.axioms {
            writeln!(f, "axiom forall {}. {}", a.vars.join(" "), a.body)?;
        }
        for t in &self.terms {
            writeln!(f, "term {t}")?;
        }
        Ok(())
    }
}

impl FromStr for Problem {
    type Err = ParseError;

    fn from_str(s: &str) -> Result<Problem, ParseError> {
        parse_problem(s)
    }
}

#[derive(Debug, Clone, PartialEq)]
enum Tok {
    Num(Rat),
    Ident(String),
    Op(&'static str),
}

#[derive(Debug, Clone)]
struct Token {
    tok: Tok,
    col: usize,
}

const OPS: [&str; 16] = [
    "->", "<=", ">=", "!=", "<", ">", "=", "+", "-", "*", "/", "^", "(", ")", ",", ".",
];

fn lex(line: usize, text: &str, offset: usize) -> Result<Vec<Token>, ParseError> {
    let chars: Vec<char> = text.chars().collect();
    let mut out = Vec::new();
    let mut k = 0;
    while k < chars.len() {
        let c = chars[k];
        let col = offset + k + 1;
        if c.is_whitespace() {
            k += 1;
        } else if c.is_ascii_digit() {
            let start = k;
            while k < chars.len() && chars[k].is_ascii_digit() {
                k += 1;
            }
            let mut digits: String = chars[start..k].iter().collect();
            let mut denom = BigInt::one();
            if k + 1 < chars.len() && chars[k] == '.' && chars[k + 1].is_ascii_digit() {
                k += 1;
                while k < chars.len() && chars[k].is_ascii_digit() {
                    digits.push(chars[k]);
                    denom *= 10;
                    k += 1;
                }
            }
            let n: BigInt = digits.parse().expect("digits");
            out.push(Token {
                tok: Tok::Num(Rat::new(n, denom)),
                col,
            });
        } else if c.is_alphabetic() || c == '_' {
            let start = k;
            while k < chars.len()
                && (chars[k].is_alphanumeric() || chars[k] == '_' || chars[k] == '\'')
            {
                k += 1;
            }
            out.push(Token {
                tok: Tok::Ident(chars[start..k].iter().collect()),
                col,
            });
        } else {
            let rest: String = chars[k..].iter().take(2).collect();
            match OPS.iter().find(|op| rest.starts_with(**op)) {
                Some(op) => {
                    out.push(Token {
                        tok: Tok::Op(op),
                        col,
                    });
                    k += op.len();
                }
                None => {
                    return Err(ParseError {
                        line,
                        col,
                        msg: format!("unexpected character `{c}`"),
                    })
                }
            }
        }
    }
    Ok(out)
}

struct Parser {
    toks: Vec<Token>,
    pos: usize,
    line: usize,
    end_col: usize,
}

type PResult<T> = Result<T, ParseError>;

impl Parser {
    fn new(line: usize, text: &str, offset: usize) -> PResult<Parser> {
        Ok(Parser {
            toks: lex(line, text, offset)?,
            pos: 0,
            line,
            end_col: offset + text.len() + 1,
        })
    }

    fn col(&self) -> usize {
        self.toks
            .get(self.pos)
            .map(|t| t.col)
            .unwrap_or(self.end_col)
    }

    fn err<T>(&self, msg: impl Into<String>) -> PResult<T> {
        Err(ParseError {
            line: self.line,
            col: self.col(),
            msg: msg.into(),
        })
    }

    fn peek(&self) -> Option<&Tok> {
        self.toks.get(self.pos).map(|t| &t.tok)
    }

    fn is_op(&self, op: &str) -> bool {
        matches!(self.peek(), Some(Tok::Op(o)) if *o == op)
    }

    fn is_word(&self, w: &str) -> bool {
        matches!(self.peek(), Some(Tok::Ident(s)) if s == w)
    }

    fn eat_op(&mut self, op: &str) -> bool {
        if self.is_op(op) {
            self.pos += 1;
            true
        } else {
            false
        }
    }

    fn expect_op(&mut self, op: &str) -> PResult<()> {
        if self.eat_op(op) {
            Ok(())
        } else {
            self.err(format!("expected `{op}`"))
        }
    }

    fn at_end(&self) -> bool {
        self.pos >= self.toks.len()
    }

    fn finish(&self) -> PResult<()> {
        if self.at_end() {
            Ok(())
        } else {
            self.err("unexpected trailing input")
        }
    }

    fn rel(&mut self) -> Option<Rel> {
        if let Some(Tok::Op(o)) = self.peek() {
            if let Some(r) = Rel::from_symbol(o) {
                self.pos += 1;
                return Some(r);
            }
        }
        None
    }

    fn expr(&mut self) -> PResult<Expr> {
        let mut parts = vec![self.product()?];
        loop {
            if self.eat_op("+") {
                parts.push(self.product()?);
            } else if self.eat_op("-") {
                parts.push(Expr::neg(self.product()?));
            } else {
                break;
            }
        }
        Ok(if parts.len() == 1 {
            parts.pop().unwrap()
        } else {
            Expr::Add(parts)
        })
    }

    fn product(&mut self) -> PResult<Expr> {
        let mut parts = vec![self.unary()?];
        loop {
            if self.eat_op("*") {
                parts.push(self.unary()?);
            } else if self.is_op("/") {
                let col = self.col();
                self.pos += 1;
                let d = self.unary()?;
                if d == Expr::Num(Rat::zero()) {
                    return Err(ParseError {
                        line: self.line,
                        col,
                        msg: "division by zero".into(),
                    });
                }
                match (parts.last(), &d) {
                    (Some(Expr::Num(p)), Expr::Num(q)) if p.is_integer() && q.is_integer() => {
                        let n = p / q;
                        *parts.last_mut().unwrap() = Expr::Num(n);
                    }
                    _ => parts.push(Expr::pow(d, -1)),
                }
            } else {
                break;
            }
        }
        Ok(if parts.len() == 1 {
            parts.pop().unwrap()
        } else {
            Expr::Mul(parts)
        })
    }

    fn unary(&mut self) -> PResult<Expr> {
        if self.eat_op("-") {
            Ok(Expr::neg(self.unary()?))
        } else {
            self.power()
        }
    }

    fn power(&mut self) -> PResult<Expr> {
        let base = self.atom()?;
        if !self.is_op("^") {
            return Ok(base);
        }
        self.pos += 1;
        let col = self.col();
        let bad = |p: &Parser| ParseError {
            line: p.line,
            col,
            msg: "exponent must be an integer; write x^(1/n) or root_n(x) for roots".into(),
        };
        let paren = self.eat_op("(");
        let neg = self.eat_op("-");
        let m = match self.peek() {
            Some(Tok::Num(q)) if q.is_integer() => q.to_integer(),
            _ => return Err(bad(self)),
        };
        self.pos += 1;
        let mut n = BigInt::one();
        if paren {
            if self.eat_op("/") {
                n = match self.peek() {
                    Some(Tok::Num(q)) if q.is_integer() && !q.is_zero() => q.to_integer(),
                    _ => return Err(bad(self)),
                };
                self.pos += 1;
            }
            if !self.eat_op(")") {
                return Err(bad(self));
            }
        }
        let small = |b: &BigInt| -> PResult<i64> {
            i64::try_from(b).map_err(|_| ParseError {
                line: self.line,
                col,
                msg: "exponent too large".into(),
            })
        };
        let m = small(&m)? * if neg { -1 } else { 1 };
        let n = small(&n)?;
        let g = num_integer::gcd(m, n);
        let (m, n) = if g == 0 { (m, n) } else { (m / g, n / g) };
        if n == 1 {
            return Ok(Expr::pow(base, m));
        }
        let root = Expr::app(&format!("root_{n}"), vec![base]);
        Ok(if m == 1 { root } else { Expr::pow(root, m) })
    }

    fn atom(&mut self) -> PResult<Expr> {
        match self.peek().cloned() {
            Some(Tok::Num(q)) => {
                self.pos += 1;
                Ok(Expr::Num(q))
            }
            Some(Tok::Ident(name)) => {
                self.pos += 1;
                if !self.eat_op("(") {
                    return Ok(Expr::Var(name));
                }
                let mut args = Vec::new();
                if !self.eat_op(")") {
                    loop {
                        args.push(self.expr()?);
                        if self.eat_op(")") {
                            break;
                        }
                        self.expect_op(",")?;
                    }
                }
                Ok(match name.as_str() {
                    "max" => Expr::neg(Expr::app("min", args.into_iter().map(Expr::neg).collect())),
                    "sqrt" => Expr::app("root_2", args),
                    _ => Expr::App(name, args),
                })
            }
            Some(Tok::Op("(")) => {
                self.pos += 1;
                let e = self.expr()?;
                self.expect_op(")")?;
                Ok(e)
            }
            _ => self.err("expected an expression"),
        }
    }

    fn formula(&mut self) -> PResult<Formula> {
        let lhs = self.disjunction()?;
        if self.eat_op("->") {
            let rhs = self.formula()?;
            return Ok(Formula::Implies(Box::new(lhs), Box::new(rhs)));
        }
        Ok(lhs)
    }

    fn disjunction(&mut self) -> PResult<Formula> {
        let mut parts = vec![self.conjunction()?];
        while self.is_word("or") {
            self.pos += 1;
            parts.push(self.conjunction()?);
        }
        Ok(if parts.len() == 1 {
            parts.pop().unwrap()
        } else {
            Formula::Or(parts)
        })
    }

    fn conjunction(&mut self) -> PResult<Formula> {
        let mut parts = vec![self.literal()?];
        while self.is_word("and") {
            self.pos += 1;
            parts.push(self.literal()?);
        }
        Ok(if parts.len() == 1 {
            parts.pop().unwrap()
        } else {
            Formula::And(parts)
        })
    }

    fn literal(&mut self) -> PResult<Formula> {
        if self.is_word("not") {
            self.pos += 1;
            return Ok(Formula::Not(Box::new(self.literal()?)));
        }
        if self.is_op("(") {
            let save = self.pos;
            self.pos += 1;
            if let Ok(f) = self.formula() {
                if self.eat_op(")") && self.rel_ahead().is_none() && !self.is_arith_ahead() {
                    return Ok(f);
                }
            }
            self.pos = save;
        }
        self.chain()
    }

    fn rel_ahead(&self) -> Option<Rel> {
        match self.peek() {
            Some(Tok::Op(o)) => Rel::from_symbol(o),
            _ => None,
        }
    }

    fn is_arith_ahead(&self) -> bool {
        ["+", "-", "*", "/", "^"].iter().any(|o| self.is_op(o))
    }

    fn chain(&mut self) -> PResult<Formula> {
        let mut lhs = self.expr()?;
        let mut atoms = Vec::new();
        while let Some(r) = self.rel() {
            let rhs = self.expr()?;
            atoms.push(Formula::Atom(lhs, r, rhs.clone()));
            lhs = rhs;
        }
        match atoms.len() {
            0 => self.err("expected a comparison operator"),
            1 => Ok(atoms.pop().unwrap()),
            _ => Ok(Formula::And(atoms)),
        }
    }
}

/// Parse a single expression.
pub fn parse_expr(text: &str) -> Result<Expr, ParseError> {
    let mut p = Parser::new(1, text, 0)?;
    let e = p.expr()?;
    p.finish()?;
    Ok(e)
}

/// Parse a quantifier-free formula.
pub fn parse_formula(text: &str) -> Result<Formula, ParseError> {
    let mut p = Parser::new(1, text, 0)?;
    let f = p.formula()?;
    p.finish()?;
    Ok(f)
}

fn parse_expect(rest: &str, line: usize) -> Result<Expectation, ParseError> {
    let mut words = rest.split_whitespace();
    let verdict = match words.next() {
        Some("proved") => Expected::Proved,
        Some("unknown") => Expected::Unknown,
        _ => {
            return Err(ParseError {
                line,
                col: 1,
                msg: "expected `proved` or `unknown`".into(),
            })
        }
    };
    let mut depth = None;
    for w in words {
        match w.strip_prefix("depth=").and_then(|d| d.parse().ok()) {
            Some(d) => depth = Some(d),
            None => {
                return Err(ParseError {
                    line,
                    col: 1,
                    msg: format!("bad annotation `{w}`"),
                })
            }
        }
    }
    Ok(Expectation { verdict, depth })
}

/// Parse a problem file.
pub fn parse_problem(text: &str) -> Result<Problem, ParseError> {
    let mut prob = Problem::default();
    for (k, raw) in text.lines().enumerate() {
        let line = k + 1;
        let (body, comment) = match raw.find('#') {
            Some(p) => (&raw[..p], Some(&raw[p + 1..])),
            None => (raw, None),
        };
        if let Some(rest) = comment.and_then(|c| c.trim().strip_prefix("expect:")) {
            prob.expect = Some(parse_expect(rest, line)?);
        }
        let trimmed = body.trim_start();
        if trimmed.trim().is_empty() {
            continue;
        }
        let indent = body.len() - trimmed.len();
        let (kw, rest) =
            trimmed.split_at(trimmed.find(char::is_whitespace).unwrap_or(trimmed.len()));
        let offset = indent + kw.len();
        let mut p = Parser::new(line, rest, offset)?;
        match kw {
            "hyp" => prob.hyps.push(p.formula()?),
            "conclude" => {
                if prob.conclusion.is_some() {
                    return Err(ParseError {
                        line,
                        col: indent + 1,
                        msg: "more than one conclusion".into(),
                    });
                }
                prob.conclusion = Some(p.formula()?);
            }
            "term" => prob.terms.push(p.expr()?),
            "axiom" => {
                if !p.is_word("forall") {
                    return p.err("expected `forall`");
                }
                p.pos += 1;
                let mut vars = Vec::new();
                loop {
                    match p.peek().cloned() {
                        Some(Tok::Ident(v)) => {
                            vars.push(v);
                            p.pos += 1;
                            p.eat_op(",");
                        }
                        Some(Tok::Op(".")) => {
                            p.pos += 1;
                            break;
                        }
                        _ => return p.err("expected a variable or `.`"),
                    }
                }
                prob.axioms.push(AxiomDecl {
                    vars,
                    body: p.formula()?,
                });
            }
            _ => {
                return Err(ParseError {
                    line,
                    col: indent + 1,
                    msg: format!("unknown directive `{kw}`"),
                });
            }
        }
        p.finish()?;
    }
    Ok(prob)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rat::{rat, ratq};

    #[test]
    fn problem_two() {
        let p = parse_problem("hyp x > 1\nconclude (1+y^2)*x > 1+y^2\n").unwrap();
        assert_eq!(p.hyps.len(), 1);
        let one_y2 = Expr::Add(vec![Expr::num(1), Expr::pow(Expr::var("y"), 2)]);
        assert_eq!(
            p.conclusion,
            Some(Formula::Atom(
                Expr::Mul(vec![one_y2.clone(), Expr::var("x")]),
                Rel::Gt,
                one_y2
            ))
        );
    }

    #[test]
    fn unsat_mode() {
        let p = parse_problem("hyp x > 0").unwrap();
        assert!(p.conclusion.is_none());
    }

    #[test]
    fn axiom_line() {
        let p = parse_problem("axiom forall x y. f(x+y) = f(x)*f(y)").unwrap();
        assert_eq!(p.axioms.len(), 1);
        assert_eq!(p.axioms[0].vars, vec!["x", "y"]);
    }

    #[test]
    fn sugar() {
        assert_eq!(
            parse_expr("x/y").unwrap(),
            Expr::Mul(vec![Expr::var("x"), Expr::pow(Expr::var("y"), -1)])
        );
        assert_eq!(parse_expr("3/4").unwrap(), Expr::Num(ratq(3, 4)));
        assert_eq!(parse_expr("-2").unwrap(), Expr::Num(rat(-2)));
        assert_eq!(
            parse_expr("x^(1/2)").unwrap(),
            Expr::app("root_2", vec![Expr::var("x")])
        );
        assert_eq!(
            parse_expr("x^(3/2)").unwrap(),
            Expr::pow(Expr::app("root_2", vec![Expr::var("x")]), 3)
        );
        assert_eq!(
            parse_expr("max(x, y)").unwrap(),
            Expr::neg(Expr::app(
                "min",
                vec![Expr::neg(Expr::var("x")), Expr::neg(Expr::var("y"))]
            ))
        );
    }

    #[test]
    fn errors_have_positions() {
        let e = parse_problem("hyp x > 0\nhyp x^y > 2").unwrap_err();
        assert_eq!((e.line, e.col), (2, 7));
        assert!(e.msg.contains("root_n"));
        let e = parse_problem("hyp x / 0 > 1").unwrap_err();
        assert_eq!(e.line, 1);
        assert!(parse_problem("hyp x >").is_err());
        assert!(parse_problem("frob x").is_err());
    }

    #[test]
    fn chains_and_formulas() {
        let f = parse_formula("0 < x < 1").unwrap();
        assert!(matches!(f, Formula::And(ref v) if v.len() == 2));
        let f = parse_formula("(x < y) -> f(x) < f(y)").unwrap();
        assert!(matches!(f, Formula::Implies(..)));
        let f = parse_formula("(x + 1) * 2 < y").unwrap();
        assert!(matches!(f, Formula::Atom(..)));
        let f = parse_formula("not (x <= 0 or y <= 0)").unwrap();
        assert!(matches!(f, Formula::Not(_)));
    }

    #[test]
    fn expectation() {
        let p = parse_problem("# expect: unknown depth=0\nhyp x > 0").unwrap();
        assert_eq!(
            p.expect,
            Some(Expectation {
                verdict: Expected::Unknown,
                depth: Some(0)
            })
        );
    }

    #[test]
    fn round_trip() {
        let src = "# expect: proved\nhyp 0 < x < 1\nhyp -x*y^-2 + (3/4)*z >= 2\nconclude x^(1/2) != abs(x - 1) or not (y = 2)\naxiom forall a b. a < b -> exp(a) < exp(b)\nterm max(x, 2*y)\n";
        let p = parse_problem(src).unwrap();
        let printed = p.to_string();
        assert_eq!(parse_problem(&printed).unwrap(), p, "{printed}");
    }
}
