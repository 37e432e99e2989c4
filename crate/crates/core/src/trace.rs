//! Line-oriented proof traces.
//!
//! ```text
//! trace 1
//! axiom 0 forall x. f(x) <= 1
//! term 1 x
//! step 0 blackboard one premises= defs= fact=t0 > 0
//! step 1 input hyp premises= defs= hyp=0 fact=t1 > 1
//! step 2 input hyp premises= defs= hyp=1 fact=[t1 < 0 or t2 = 1*t1]
//! split t3 3
//! case 0
//! step 9 split case premises= defs= case=0 on=t3 fact=t3 < 0
//! contradiction 9 12
//! case 1
//! ...
//! end
//! ```
//!
//! Sibling cases reuse the step and term ids that follow the split point.

use std::fmt::Write as _;

use thiserror::Error;

use crate::comparison::{Comparison, Rel, TermId};
use crate::parse::parse_expr;
use crate::proof::{Detail, Fact, Step, StepId};
use crate::rat::Rat;
use crate::solver::{Branch, End, Report};
use crate::term::{canonize, STerm};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("line {line}: {msg}")]
pub struct FormatError {
    pub line: usize,
    pub msg: String,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum TraceDetail {
    None,
    Hyp(usize),
    Instance {
        axiom: usize,
        clause: usize,
        subst: Vec<(String, STerm)>,
        targets: Vec<TermId>,
    },
    Case {
        on: String,
        case: usize,
    },
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TraceStep {
    pub id: StepId,
    pub module: String,
    pub rule: String,
    pub premises: Vec<StepId>,
    pub defs: Vec<TermId>,
    pub detail: TraceDetail,
    pub fact: Fact,
    pub line: usize,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Entry {
    Term {
        id: TermId,
        text: String,
        line: usize,
    },
    Step(TraceStep),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum BlockEnd {
    Contradiction {
        a: StepId,
        b: StepId,
        line: usize,
    },
    Split {
        on: String,
        cases: Vec<Block>,
        line: usize,
    },
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Block {
    pub entries: Vec<Entry>,
    pub end: BlockEnd,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Trace {
    pub axioms: Vec<String>,
    pub root: Block,
}

fn ids<T: ToString>(xs: &[T]) -> String {
    xs.iter()
        .map(ToString::to_string)
        .collect::<Vec<_>>()
        .join(",")
}

fn fact_text(f: &Fact) -> String {
    match f {
        Fact::Cmp(c) => c.to_string(),
        Fact::Clause(ls) => format!(
            "[{}]",
            ls.iter()
                .map(ToString::to_string)
                .collect::<Vec<_>>()
                .join(" or ")
        ),
    }
}

fn compact(s: &STerm) -> String {
    s.to_expr()
        .to_string()
        .chars()
        .filter(|c| !c.is_whitespace())
        .collect()
}

fn step_line(id: StepId, s: &Step) -> String {
    let mut out = format!(
        "step {id} {} {} premises={} defs={}",
        s.module,
        s.rule,
        ids(&s.premises),
        ids(&s.defs)
    );
    match &s.detail {
        Detail::None => {}
        Detail::Hyp(k) => {
            let _ = write!(out, " hyp={k}");
        }
        Detail::Instance {
            axiom,
            clause,
            subst,
            targets,
        } => {
            let sub: Vec<String> = subst
                .iter()
                .map(|(x, t)| format!("{x}:{}", compact(t)))
                .collect();
            let _ = write!(
                out,
                " axiom={axiom} clause={clause} targets={} subst={}",
                ids(targets),
                sub.join(";")
            );
        }
        Detail::Case { on, case } => {
            let _ = write!(out, " case={case} on={on}");
        }
    }
    let _ = write!(out, " fact={}", fact_text(&s.fact));
    out
}

fn write_branch(b: &Branch, out: &mut String) {
    for t in b.first_term.max(1)..b.bb.num_terms() {
        let _ = writeln!(out, "term {t} {}", b.bb.term(t));
    }
    for (id, s) in b.bb.steps().iter().enumerate().skip(b.first_step) {
        out.push_str(&step_line(id, s));
        out.push('\n');
    }
    match &b.end {
        End::Contradiction(x, y) => {
            let _ = writeln!(out, "contradiction {x} {y}");
        }
        End::Split { on, cases } => {
            let _ = writeln!(out, "split {on} {}", cases.len());
            for (k, c) in cases.iter().enumerate() {
                let _ = writeln!(out, "case {k}");
                write_branch(c, out);
            }
            out.push_str("end\n");
        }
    }
}

/// The trace of a proved report.
pub fn write_trace(report: &Report) -> Option<String> {
    let proof = report.proof.as_ref()?;
    let mut out = String::from("trace 1\n");
    for (k, a) in report.axioms.iter().enumerate() {
        let _ = writeln!(out, "axiom {k} {a}");
    }
    write_branch(proof, &mut out);
    Some(out)
}

// ---- parsing ----

fn err<T>(line: usize, msg: impl Into<String>) -> Result<T, FormatError> {
    Err(FormatError {
        line,
        msg: msg.into(),
    })
}

fn num<T: std::str::FromStr>(line: usize, s: &str) -> Result<T, FormatError> {
    s.parse()
        .or_else(|_| err(line, format!("bad number `{s}`")))
}

fn id_list(line: usize, s: &str) -> Result<Vec<usize>, FormatError> {
    s.split(',')
        .filter(|x| !x.is_empty())
        .map(|x| num(line, x))
        .collect()
}

fn term_ref(line: usize, s: &str) -> Result<TermId, FormatError> {
    match s.strip_prefix('t') {
        Some(n) => num(line, n),
        None => err(line, format!("bad term reference `{s}`")),
    }
}

fn rational(line: usize, s: &str) -> Result<Rat, FormatError> {
    let bad = || FormatError {
        line,
        msg: format!("bad coefficient `{s}`"),
    };
    match s.split_once('/') {
        Some((n, d)) => {
            let n = n.parse().map_err(|_| bad())?;
            let d: num_bigint::BigInt = d.parse().map_err(|_| bad())?;
            if d == num_bigint::BigInt::from(0) {
                return Err(bad());
            }
            Ok(Rat::new(n, d))
        }
        None => Ok(Rat::from_integer(s.parse().map_err(|_| bad())?)),
    }
}

pub fn parse_comparison(line: usize, s: &str) -> Result<Comparison, FormatError> {
    let parts: Vec<&str> = s.split_whitespace().collect();
    let [l, r, c] = parts.as_slice() else {
        return err(line, format!("bad comparison `{s}`"));
    };
    let lhs = term_ref(line, l)?;
    let rel = Rel::from_symbol(r).ok_or_else(|| FormatError {
        line,
        msg: format!("bad relation `{r}`"),
    })?;
    let (coeff, rhs) = match c.split_once("*t") {
        Some((k, t)) => (rational(line, k)?, num(line, t)?),
        None => (rational(line, c)?, 0),
    };
    Ok(Comparison {
        lhs,
        rel,
        coeff,
        rhs,
    })
}

fn parse_fact(line: usize, s: &str) -> Result<Fact, FormatError> {
    let Some(inner) = s.strip_prefix('[').and_then(|r| r.strip_suffix(']')) else {
        return Ok(Fact::Cmp(parse_comparison(line, s)?));
    };
    if inner.trim().is_empty() {
        return Ok(Fact::Clause(vec![]));
    }
    Ok(Fact::Clause(
        inner
            .split(" or ")
            .map(|l| parse_comparison(line, l))
            .collect::<Result<_, _>>()?,
    ))
}

fn parse_step(line: usize, rest: &str) -> Result<TraceStep, FormatError> {
    let (head, fact) = match rest.split_once(" fact=") {
        Some(x) => x,
        None => return err(line, "step without fact"),
    };
    let words: Vec<&str> = head.split_whitespace().collect();
    if words.len() < 3 {
        return err(line, "short step line");
    }
    let id = num(line, words[0])?;
    let mut st = TraceStep {
        id,
        module: words[1].to_string(),
        rule: words[2].to_string(),
        premises: vec![],
        defs: vec![],
        detail: TraceDetail::None,
        fact: parse_fact(line, fact)?,
        line,
    };
    let mut kv = std::collections::BTreeMap::new();
    for w in &words[3..] {
        let Some((k, v)) = w.split_once('=') else {
            return err(line, format!("bad field `{w}`"));
        };
        if kv.insert(k, v).is_some() {
            return err(line, format!("duplicate field `{k}`"));
        }
    }
    let field = |k: &str| {
        kv.get(k).copied().ok_or_else(|| FormatError {
            line,
            msg: format!("missing `{k}`"),
        })
    };
    st.premises = id_list(line, field("premises")?)?;
    st.defs = id_list(line, field("defs")?)?;
    if let Some(h) = kv.get("hyp") {
        st.detail = TraceDetail::Hyp(num(line, h)?);
    } else if let Some(a) = kv.get("axiom") {
        let mut subst = Vec::new();
        for pair in field("subst")?.split(';').filter(|p| !p.is_empty()) {
            let Some((x, e)) = pair.split_once(':') else {
                return err(line, format!("bad binding `{pair}`"));
            };
            let e = parse_expr(e).map_err(|e| FormatError {
                line,
                msg: e.to_string(),
            })?;
            let s = canonize(&e).map_err(|e| FormatError {
                line,
                msg: e.to_string(),
            })?;
            subst.push((x.to_string(), s));
        }
        st.detail = TraceDetail::Instance {
            axiom: num(line, a)?,
            clause: num(line, field("clause")?)?,
            subst,
            targets: id_list(line, field("targets")?)?,
        };
    } else if let Some(c) = kv.get("case") {
        st.detail = TraceDetail::Case {
            on: field("on")?.to_string(),
            case: num(line, c)?,
        };
    }
    Ok(st)
}

struct Lines<'a> {
    lines: Vec<(usize, &'a str)>,
    pos: usize,
}

impl<'a> Lines<'a> {
    fn next(&mut self) -> Option<(usize, &'a str)> {
        let l = self.lines.get(self.pos).copied();
        self.pos += 1;
        l
    }

    fn last_line(&self) -> usize {
        self.lines.last().map_or(0, |l| l.0)
    }
}

fn parse_block(ls: &mut Lines<'_>) -> Result<Block, FormatError> {
    let mut entries = Vec::new();
    while let Some((n, l)) = ls.next() {
        let (kw, rest) = l.split_once(' ').unwrap_or((l, ""));
        match kw {
            "term" => {
                let (id, text) = rest.split_once(' ').ok_or_else(|| FormatError {
                    line: n,
                    msg: "bad term line".into(),
                })?;
                entries.push(Entry::Term {
                    id: num(n, id)?,
                    text: text.to_string(),
                    line: n,
                });
            }
            "step" => entries.push(Entry::Step(parse_step(n, rest)?)),
            "contradiction" => {
                let xs: Vec<&str> = rest.split_whitespace().collect();
                let [a, b] = xs.as_slice() else {
                    return err(n, "bad contradiction");
                };
                return Ok(Block {
                    entries,
                    end: BlockEnd::Contradiction {
                        a: num(n, a)?,
                        b: num(n, b)?,
                        line: n,
                    },
                });
            }
            "split" => {
                let xs: Vec<&str> = rest.split_whitespace().collect();
                let [on, k] = xs.as_slice() else {
                    return err(n, "bad split");
                };
                let k: usize = num(n, k)?;
                let mut cases = Vec::new();
                for i in 0..k {
                    match ls.next() {
                        Some((m, c)) if c == format!("case {i}") => {
                            let _ = m;
                            cases.push(parse_block(ls)?);
                        }
                        Some((m, _)) => return err(m, format!("expected `case {i}`")),
                        None => return err(ls.last_line(), "unterminated split"),
                    }
                }
                match ls.next() {
                    Some((_, "end")) => {}
                    Some((m, _)) => return err(m, "expected `end`"),
                    None => return err(ls.last_line(), "unterminated split"),
                }
                return Ok(Block {
                    entries,
                    end: BlockEnd::Split {
                        on: on.to_string(),
                        cases,
                        line: n,
                    },
                });
            }
            other => return err(n, format!("unexpected `{other}`")),
        }
    }
    err(ls.last_line(), "trace ends without contradiction")
}

pub fn parse_trace(text: &str) -> Result<Trace, FormatError> {
    let lines: Vec<(usize, &str)> = text
        .lines()
        .enumerate()
        .map(|(k, l)| (k + 1, l.trim_end()))
        .filter(|(_, l)| !l.is_empty() && !l.starts_with('#'))
        .collect();
    let mut ls = Lines { lines, pos: 0 };
    match ls.next() {
        Some((_, "trace 1")) => {}
        Some((n, _)) => return err(n, "expected `trace 1`"),
        None => return err(0, "empty trace"),
    }
    let mut axioms = Vec::new();
    while let Some(&(n, l)) = ls.lines.get(ls.pos) {
        let Some(rest) = l.strip_prefix("axiom ") else {
            break;
        };
        ls.pos += 1;
        let (k, text) = rest.split_once(' ').ok_or_else(|| FormatError {
            line: n,
            msg: "bad axiom line".into(),
        })?;
        if num::<usize>(n, k)? != axioms.len() {
            return err(n, "axioms out of order");
        }
        axioms.push(text.to_string());
    }
    let root = parse_block(&mut ls)?;
    if let Some((n, _)) = ls.next() {
        return err(n, "text after the end of the proof");
    }
    Ok(Trace { axioms, root })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rat::ratq;

    #[test]
    fn comparisons_round_trip() {
        for c in [
            Comparison::new(3, Rel::Lt, ratq(-1, 2), 5),
            Comparison::new(2, Rel::Ne, ratq(7, 1), 0),
            Comparison::sign(4, Rel::Ge),
        ] {
            assert_eq!(parse_comparison(1, &c.to_string()).unwrap(), c);
        }
        assert!(parse_comparison(1, "t1 < 1/0").is_err());
    }

    #[test]
    fn nested_blocks() {
        let text = "trace 1\naxiom 0 forall x. f(x) <= 1\nterm 1 x\nstep 0 blackboard one premises= defs= fact=t0 > 0\n\
                    split t1 2\ncase 0\nstep 1 split case premises= defs= case=0 on=t1 fact=t1 <= 0\ncontradiction 0 1\n\
                    case 1\nstep 1 axioms instance premises=0 defs= axiom=0 clause=0 targets=1 subst=x:2*y fact=[t1 > 0 or t1 < -1]\n\
                    contradiction 0 1\nend\n";
        let t = parse_trace(text).unwrap();
        assert_eq!(t.axioms.len(), 1);
        let BlockEnd::Split { cases, .. } = &t.root.end else {
            panic!()
        };
        assert_eq!(cases.len(), 2);
        let Entry::Step(s) = &cases[1].entries[0] else {
            panic!()
        };
        assert!(matches!(&s.fact, Fact::Clause(ls) if ls.len() == 2));
        assert!(matches!(&s.detail, TraceDetail::Instance { subst, .. } if subst.len() == 1));
        assert!(
            parse_trace("trace 1\nstep 0 blackboard one premises= defs= fact=t0 > 0\n").is_err()
        );
        assert!(parse_trace(&format!("{text}junk\n")).is_err());
    }
}
