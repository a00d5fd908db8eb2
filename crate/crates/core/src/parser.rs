//! The `.kbr` text format.
//!
//! ```text
//! % line comment
//! human(a).                                   % fact(s)
//! r1: human(X) -> hasParent(X,Y), human(Y).   % existential rule
//! p(X,Y), not t(Y), not (q(X), s(X)) -> r(X). % negated atom / conjunction
//! ? hasParent(a,X).                           % query
//! ```
//!
//! Variables start with an uppercase letter, identifiers with a lowercase
//! one. Facts share a single variable scope (their variables are labelled
//! nulls). Each rule gets its own scope: on load, the variables of the k-th
//! rule are tagged with id `k`, so rules are pairwise variable-disjoint.
//! Unlabelled rules are named `r1, r2, …` after their position among rules.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt::Write as _;
use std::sync::Arc;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::logic::{Atom, AtomSet, FreshVars, Rule, Term, Var};
use crate::nonmonotonic::NmeRule;

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct KnowledgeBase {
    pub facts: AtomSet,
    pub rules: Vec<NmeRule>,
    pub queries: Vec<AtomSet>,
}

impl KnowledgeBase {
    pub fn has_negation(&self) -> bool {
        self.rules.iter().any(NmeRule::has_negation)
    }

    /// `pos()` of every rule.
    pub fn positive_rules(&self) -> Vec<Rule> {
        self.rules.iter().map(NmeRule::pos).collect()
    }

    pub fn rule(&self, id: &str) -> Option<&NmeRule> {
        self.rules.iter().find(|r| &*r.id == id)
    }

    /// A generator for variables that occur nowhere in this knowledge base.
    pub fn fresh_vars(&self) -> FreshVars {
        let mut vars = self.facts.vars();
        for r in &self.rules {
            vars.extend(r.vars());
        }
        for q in &self.queries {
            vars.extend(q.vars());
        }
        FreshVars::above(&vars)
    }

    pub fn to_json(&self) -> serde_json::Value {
        #[derive(Serialize)]
        struct Body<'a> {
            positive: &'a AtomSet,
            negative: &'a [AtomSet],
        }
        #[derive(Serialize)]
        struct JsonRule<'a> {
            id: &'a str,
            body: Body<'a>,
            head: &'a AtomSet,
        }
        let rules: Vec<_> = self
            .rules
            .iter()
            .map(|r| JsonRule {
                id: &r.id,
                body: Body {
                    positive: &r.positive,
                    negative: &r.negative,
                },
                head: &r.head,
            })
            .collect();
        serde_json::json!({
            "version": 1,
            "facts": self.facts,
            "rules": rules,
            "queries": self.queries,
        })
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct ParseOptions {
    /// Accept functional terms `f(t, …)`. Only used to re-read skolemized
    /// output of the engine.
    pub allow_functional: bool,
}

pub fn parse(text: &str) -> Result<KnowledgeBase> {
    parse_with(text, ParseOptions::default())
}

pub fn parse_with(text: &str, options: ParseOptions) -> Result<KnowledgeBase> {
    let tokens = lex(text)?;
    Parser {
        tokens,
        pos: 0,
        options,
        arities: BTreeMap::new(),
        kb: KnowledgeBase::default(),
        rule_ids: BTreeSet::new(),
    }
    .document()
}

/// Parses the body of a single query, with or without the leading `?` and
/// the trailing `.`.
pub fn parse_query(text: &str) -> Result<AtomSet> {
    let trimmed = text.trim();
    let mut src = String::new();
    if !trimmed.starts_with('?') {
        src.push_str("? ");
    }
    src.push_str(trimmed);
    if !trimmed.ends_with('.') {
        src.push('.');
    }
    let kb = parse(&src)?;
    kb.queries.into_iter().next().ok_or(Error::Syntax {
        line: 1,
        column: 1,
        message: "expected a query".into(),
    })
}

#[derive(Clone, Debug, PartialEq)]
enum Tok {
    Ident(String),
    Variable(String),
    LParen,
    RParen,
    Comma,
    Dot,
    Colon,
    Arrow,
    Question,
    Not,
    Eof,
}

#[derive(Clone, Debug)]
struct Spanned {
    tok: Tok,
    line: usize,
    column: usize,
}

fn lex(text: &str) -> Result<Vec<Spanned>> {
    let mut out = Vec::new();
    let mut chars = text.chars().peekable();
    let (mut line, mut column) = (1, 1);
    while let Some(&ch) = chars.peek() {
        let (l, c) = (line, column);
        let mut bump = |chars: &mut std::iter::Peekable<std::str::Chars>| {
            let ch = chars.next();
            if ch == Some('\n') {
                line += 1;
                column = 1;
            } else {
                column += 1;
            }
            ch
        };
        let tok = match ch {
            c if c.is_whitespace() => {
                bump(&mut chars);
                continue;
            }
            '%' => {
                while chars.peek().is_some_and(|&c| c != '\n') {
                    bump(&mut chars);
                }
                continue;
            }
            '(' => Tok::LParen,
            ')' => Tok::RParen,
            ',' => Tok::Comma,
            '.' => Tok::Dot,
            ':' => Tok::Colon,
            '?' => Tok::Question,
            '-' => {
                bump(&mut chars);
                if chars.peek() == Some(&'>') {
                    bump(&mut chars);
                    out.push(Spanned {
                        tok: Tok::Arrow,
                        line: l,
                        column: c,
                    });
                    continue;
                }
                return Err(Error::Syntax {
                    line: l,
                    column: c,
                    message: "expected `->`".into(),
                });
            }
            first if first.is_alphabetic() => {
                let mut word = String::new();
                while let Some(&w) = chars.peek() {
                    if w.is_alphanumeric() || w == '_' || w == '\'' {
                        word.push(w);
                        bump(&mut chars);
                    } else {
                        break;
                    }
                }
                let tok = if word == "not" {
                    Tok::Not
                } else if word.starts_with(char::is_uppercase) {
                    Tok::Variable(word)
                } else {
                    Tok::Ident(word)
                };
                out.push(Spanned {
                    tok,
                    line: l,
                    column: c,
                });
                continue;
            }
            other => {
                return Err(Error::Syntax {
                    line: l,
                    column: c,
                    message: format!("unexpected character `{other}`"),
                })
            }
        };
        bump(&mut chars);
        out.push(Spanned {
            tok,
            line: l,
            column: c,
        });
    }
    out.push(Spanned {
        tok: Tok::Eof,
        line,
        column,
    });
    Ok(out)
}

enum Literal {
    Positive(Atom),
    Negative(AtomSet),
}

struct Parser {
    tokens: Vec<Spanned>,
    pos: usize,
    options: ParseOptions,
    arities: BTreeMap<String, usize>,
    kb: KnowledgeBase,
    rule_ids: BTreeSet<Arc<str>>,
}

impl Parser {
    fn peek(&self) -> &Tok {
        &self.tokens[self.pos].tok
    }

    fn peek_at(&self, offset: usize) -> &Tok {
        let i = (self.pos + offset).min(self.tokens.len() - 1);
        &self.tokens[i].tok
    }

    fn error<T>(&self, message: impl Into<String>) -> Result<T> {
        let t = &self.tokens[self.pos];
        Err(Error::Syntax {
            line: t.line,
            column: t.column,
            message: message.into(),
        })
    }

    fn expect(&mut self, tok: Tok, what: &str) -> Result<()> {
        if *self.peek() == tok {
            self.pos += 1;
            Ok(())
        } else {
            self.error(format!("expected {what}, found {}", describe(self.peek())))
        }
    }

    fn document(mut self) -> Result<KnowledgeBase> {
        while *self.peek() != Tok::Eof {
            self.statement()?;
        }
        Ok(self.kb)
    }

    fn statement(&mut self) -> Result<()> {
        let line = self.tokens[self.pos].line;
        if *self.peek() == Tok::Question {
            self.pos += 1;
            let atoms = self.atom_list()?;
            self.expect(Tok::Dot, "`.`")?;
            self.kb.queries.push(atoms.into_iter().collect());
            return Ok(());
        }
        let label = match (self.peek().clone(), self.peek_at(1)) {
            (Tok::Ident(name) | Tok::Variable(name), Tok::Colon) => {
                self.pos += 2;
                Some(name)
            }
            _ => None,
        };
        let lits = self.literals()?;
        match self.peek() {
            Tok::Arrow => {
                self.pos += 1;
                let head = self.atom_list()?;
                self.expect(Tok::Dot, "`.`")?;
                self.add_rule(label, lits, head, line)
            }
            Tok::Dot if label.is_none() => {
                self.pos += 1;
                for lit in lits {
                    match lit {
                        Literal::Positive(a) => {
                            self.kb.facts.insert(a);
                        }
                        Literal::Negative(_) => {
                            return Err(Error::Syntax {
                                line,
                                column: 1,
                                message: "negation is only allowed in rule bodies".into(),
                            })
                        }
                    }
                }
                Ok(())
            }
            _ => self.error(format!("expected `->` or `.`, found {}", describe(self.peek()))),
        }
    }

    fn add_rule(
        &mut self,
        label: Option<String>,
        lits: Vec<Literal>,
        head: Vec<Atom>,
        line: usize,
    ) -> Result<()> {
        let ordinal = self.kb.rules.len() + 1;
        let id: Arc<str> = label.unwrap_or_else(|| format!("r{ordinal}")).into();
        if !self.rule_ids.insert(id.clone()) {
            return Err(Error::Syntax {
                line,
                column: 1,
                message: format!("duplicate rule id `{id}`"),
            });
        }
        let mut positive = AtomSet::new();
        let mut negative = Vec::new();
        for lit in lits {
            match lit {
                Literal::Positive(a) => {
                    positive.insert(a);
                }
                Literal::Negative(b) => negative.push(b),
            }
        }
        let rule = NmeRule::new(id, positive, negative, head.into_iter().collect());
        rule.check_safe()?;
        // rename apart: every variable of this rule gets the rule's scope id
        let scope = u32::try_from(ordinal).expect("rule count fits in u32");
        let sub = rule
            .vars()
            .into_iter()
            .map(|v| (v.clone(), Term::Var(Var::new(v.name.clone(), scope))))
            .collect();
        self.kb.rules.push(rule.rename(&sub));
        Ok(())
    }

    fn literals(&mut self) -> Result<Vec<Literal>> {
        let mut out = vec![self.literal()?];
        while *self.peek() == Tok::Comma {
            self.pos += 1;
            out.push(self.literal()?);
        }
        Ok(out)
    }

    fn literal(&mut self) -> Result<Literal> {
        if *self.peek() != Tok::Not {
            return Ok(Literal::Positive(self.atom()?));
        }
        self.pos += 1;
        if *self.peek() == Tok::LParen {
            self.pos += 1;
            let atoms = self.atom_list()?;
            self.expect(Tok::RParen, "`)`")?;
            Ok(Literal::Negative(atoms.into_iter().collect()))
        } else {
            Ok(Literal::Negative([self.atom()?].into_iter().collect()))
        }
    }

    fn atom_list(&mut self) -> Result<Vec<Atom>> {
        let mut out = vec![self.atom()?];
        while *self.peek() == Tok::Comma {
            self.pos += 1;
            out.push(self.atom()?);
        }
        Ok(out)
    }

    fn atom(&mut self) -> Result<Atom> {
        let Tok::Ident(name) = self.peek().clone() else {
            return self.error(format!("expected a predicate, found {}", describe(self.peek())));
        };
        let line = self.tokens[self.pos].line;
        self.pos += 1;
        self.expect(Tok::LParen, "`(`")?;
        let mut args = vec![self.term()?];
        while *self.peek() == Tok::Comma {
            self.pos += 1;
            args.push(self.term()?);
        }
        self.expect(Tok::RParen, "`)`")?;
        match self.arities.get(&name) {
            Some(&expected) if expected != args.len() => {
                return Err(Error::ArityMismatch {
                    predicate: name,
                    expected,
                    found: args.len(),
                    line,
                })
            }
            Some(_) => {}
            None => {
                self.arities.insert(name.clone(), args.len());
            }
        }
        Ok(Atom::new(name, args))
    }

    fn term(&mut self) -> Result<Term> {
        match self.peek().clone() {
            Tok::Variable(v) => {
                self.pos += 1;
                Ok(Term::Var(Var::new(v, 0)))
            }
            Tok::Ident(c) => {
                self.pos += 1;
                if *self.peek() != Tok::LParen {
                    return Ok(Term::Const(c.into()));
                }
                if !self.options.allow_functional {
                    return self.error("functional terms are not allowed in input");
                }
                self.pos += 1;
                let mut args = Vec::new();
                if *self.peek() != Tok::RParen {
                    args.push(self.term()?);
                    while *self.peek() == Tok::Comma {
                        self.pos += 1;
                        args.push(self.term()?);
                    }
                }
                self.expect(Tok::RParen, "`)`")?;
                Ok(Term::Func(c.into(), args))
            }
            other => self.error(format!("expected a term, found {}", describe(&other))),
        }
    }
}

fn describe(tok: &Tok) -> String {
    match tok {
        Tok::Ident(s) | Tok::Variable(s) => format!("`{s}`"),
        Tok::LParen => "`(`".into(),
        Tok::RParen => "`)`".into(),
        Tok::Comma => "`,`".into(),
        Tok::Dot => "`.`".into(),
        Tok::Colon => "`:`".into(),
        Tok::Arrow => "`->`".into(),
        Tok::Question => "`?`".into(),
        Tok::Not => "`not`".into(),
        Tok::Eof => "end of input".into(),
    }
}

fn print_term(out: &mut String, t: &Term) {
    match t {
        Term::Const(c) => out.push_str(c),
        Term::Var(v) => {
            let text = v.to_string();
            if !text.starts_with(char::is_uppercase) {
                out.push('V');
            }
            out.push_str(&text);
        }
        Term::Func(sym, args) => {
            out.push_str(sym);
            out.push('(');
            for (i, a) in args.iter().enumerate() {
                if i > 0 {
                    out.push(',');
                }
                print_term(out, a);
            }
            out.push(')');
        }
    }
}

fn print_atom(out: &mut String, a: &Atom) {
    out.push_str(&a.predicate);
    out.push('(');
    for (i, t) in a.args.iter().enumerate() {
        if i > 0 {
            out.push(',');
        }
        print_term(out, t);
    }
    out.push(')');
}

fn print_atoms(out: &mut String, atoms: &AtomSet) {
    for (i, a) in atoms.iter().enumerate() {
        if i > 0 {
            out.push_str(", ");
        }
        print_atom(out, a);
    }
}

/// Prints an atomset as a sequence of facts, one per line.
pub fn print_facts(atoms: &AtomSet) -> String {
    let mut out = String::new();
    for a in atoms {
        print_atom(&mut out, a);
        out.push_str(".\n");
    }
    out
}

pub fn print_rule(rule: &NmeRule) -> String {
    let mut out = String::new();
    let _ = write!(out, "{}: ", rule.id);
    let mut first = true;
    for a in &rule.positive {
        if !first {
            out.push_str(", ");
        }
        first = false;
        print_atom(&mut out, a);
    }
    for b in &rule.negative {
        if !first {
            out.push_str(", ");
        }
        first = false;
        out.push_str("not ");
        if b.len() == 1 {
            print_atoms(&mut out, b);
        } else {
            out.push('(');
            print_atoms(&mut out, b);
            out.push(')');
        }
    }
    out.push_str(" -> ");
    print_atoms(&mut out, &rule.head);
    out.push('.');
    out
}

/// Prints a knowledge base in the `.kbr` syntax. Parsing the output yields
/// a knowledge base isomorphic to the input.
pub fn print(kb: &KnowledgeBase) -> String {
    let mut out = print_facts(&kb.facts);
    for r in &kb.rules {
        out.push_str(&print_rule(r));
        out.push('\n');
    }
    for q in &kb.queries {
        out.push_str("? ");
        print_atoms(&mut out, q);
        out.push_str(".\n");
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_existential_rule() {
        let kb = parse("human(a). r1: human(X) -> hasParent(X,Y), human(Y).").unwrap();
        assert_eq!(kb.facts.len(), 1);
        assert_eq!(kb.rules.len(), 1);
        let r = kb.rules[0].pos();
        assert_eq!(&*r.id, "r1");
        let names = |s: std::collections::BTreeSet<Var>| {
            s.into_iter().map(|v| v.name.to_string()).collect::<Vec<_>>()
        };
        assert_eq!(names(r.frontier()), ["X"]);
        assert_eq!(names(r.existentials()), ["Y"]);
    }

    #[test]
    fn parses_negation() {
        let kb = parse("r: p(X,Y), not t(Y) -> r(X).").unwrap();
        assert_eq!(kb.rules[0].negative.len(), 1);
        assert_eq!(kb.rules[0].negative[0].iter().next().unwrap().predicate.as_ref(), "t");
        let kb = parse("p(X), not (q(X), s(X)), not t(X) -> r(X).").unwrap();
        assert_eq!(kb.rules[0].negative.len(), 2);
        assert_eq!(kb.rules[0].negative[0].len(), 2);
        assert_eq!(&*kb.rules[0].id, "r1");
    }

    #[test]
    fn reports_unclosed_parenthesis() {
        let err = parse("p(X.").unwrap_err();
        assert_eq!(
            err,
            Error::Syntax {
                line: 1,
                column: 4,
                message: "expected `)`, found `.`".into()
            }
        );
    }

    #[test]
    fn arity_and_safeness_errors() {
        assert!(matches!(
            parse("p(a).\np(a,b)."),
            Err(Error::ArityMismatch { line: 2, .. })
        ));
        let err = parse("bad: p(X), not q(Y) -> r(X).").unwrap_err();
        assert_eq!(
            err,
            Error::Unsafe {
                rule: "bad".into(),
                var: "Y".into()
            }
        );
        assert!(parse("p(X), not q(X).").is_err());
        assert!(parse("p(f(a)).").is_err());
        assert!(parse("r: p(X) -> q(X). r: q(X) -> s(X).").is_err());
    }

    #[test]
    fn rules_are_renamed_apart() {
        let kb = parse("p(X) -> q(X). q(X) -> s(X).").unwrap();
        assert!(kb.rules[0].vars().is_disjoint(&kb.rules[1].vars()));
    }

    #[test]
    fn fact_variables_share_scope() {
        let kb = parse("p(a,Y), t(Y).").unwrap();
        assert_eq!(kb.facts.vars().len(), 1);
    }

    #[test]
    fn functional_terms_in_internal_mode() {
        let opts = ParseOptions {
            allow_functional: true,
        };
        let kb = parse_with("p(a, f_r_Y(a)). q(c()).", opts).unwrap();
        assert_eq!(kb.facts.len(), 2);
        assert!(kb.facts.is_ground());
    }

    #[test]
    fn empty_document() {
        let kb = parse("% nothing here\n").unwrap();
        assert_eq!(kb, KnowledgeBase::default());
        assert_eq!(print(&kb), "");
    }

    #[test]
    fn queries() {
        let kb = parse("? p(a,X), q(X).").unwrap();
        assert_eq!(kb.queries[0].len(), 2);
        assert_eq!(parse_query("hasParent(a,X)").unwrap().len(), 1);
    }

    #[test]
    fn json_shape() {
        let kb = parse("p(a,X). r: p(X,Y), not t(Y) -> r(X). ? r(a).").unwrap();
        let j = kb.to_json();
        assert_eq!(j["version"], 1);
        assert_eq!(j["facts"][0]["pred"], "p");
        assert_eq!(j["facts"][0]["args"][0]["const"], "a");
        assert_eq!(j["facts"][0]["args"][1]["var"], "X");
        assert_eq!(j["rules"][0]["body"]["negative"][0][0]["pred"], "t");
        assert_eq!(j["queries"][0][0]["pred"], "r");
    }
}
