use std::collections::BTreeSet;
use std::fmt;
use std::sync::Arc;

use serde::ser::{SerializeMap, Serializer};
use serde::Serialize;

/// A variable. Variables written by the user in facts and queries carry
/// `id == 0`; rule variables are tagged with a per-rule scope id on load and
/// engine-minted variables receive ids from a [`FreshVars`] generator, so two
/// variables are equal only when both name and id agree.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Debug)]
pub struct Var {
    pub name: Arc<str>,
    pub id: u32,
}

impl Var {
    pub fn new(name: impl Into<Arc<str>>, id: u32) -> Self {
        Var {
            name: name.into(),
            id,
        }
    }
}

impl fmt::Display for Var {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.id == 0 {
            write!(f, "{}", self.name)
        } else {
            write!(f, "{}_{}", self.name, self.id)
        }
    }
}

#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Debug)]
pub enum Term {
    Const(Arc<str>),
    Var(Var),
    /// Skolem term `f(args)`. Only produced by skolemization, never by user
    /// input in the default parsing mode.
    Func(Arc<str>, Vec<Term>),
}

impl Term {
    pub fn constant(name: &str) -> Self {
        Term::Const(name.into())
    }

    pub fn var(name: &str) -> Self {
        Term::Var(Var::new(name, 0))
    }

    pub fn as_var(&self) -> Option<&Var> {
        match self {
            Term::Var(v) => Some(v),
            _ => None,
        }
    }

    pub fn is_var(&self) -> bool {
        matches!(self, Term::Var(_))
    }

    pub fn is_ground(&self) -> bool {
        match self {
            Term::Const(_) => true,
            Term::Var(_) => false,
            Term::Func(_, args) => args.iter().all(Term::is_ground),
        }
    }

    pub fn collect_vars(&self, out: &mut BTreeSet<Var>) {
        match self {
            Term::Const(_) => {}
            Term::Var(v) => {
                out.insert(v.clone());
            }
            Term::Func(_, args) => args.iter().for_each(|a| a.collect_vars(out)),
        }
    }

    /// Nesting depth of functional terms (0 for constants and variables).
    pub fn depth(&self) -> usize {
        match self {
            Term::Func(_, args) => 1 + args.iter().map(Term::depth).max().unwrap_or(0),
            _ => 0,
        }
    }
}

impl fmt::Display for Term {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Term::Const(c) => write!(f, "{c}"),
            Term::Var(v) => write!(f, "{v}"),
            Term::Func(sym, args) => {
                write!(f, "{sym}(")?;
                for (i, a) in args.iter().enumerate() {
                    if i > 0 {
                        write!(f, ",")?;
                    }
                    write!(f, "{a}")?;
                }
                write!(f, ")")
            }
        }
    }
}

impl Serialize for Term {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        let mut map = s.serialize_map(Some(match self {
            Term::Func(..) => 2,
            _ => 1,
        }))?;
        match self {
            Term::Const(c) => map.serialize_entry("const", &**c)?,
            Term::Var(v) => map.serialize_entry("var", &v.to_string())?,
            Term::Func(sym, args) => {
                map.serialize_entry("fn", &**sym)?;
                map.serialize_entry("args", args)?;
            }
        }
        map.end()
    }
}

/// Mints variables that are distinct from every variable of the session that
/// created the generator.
#[derive(Debug, Clone)]
pub struct FreshVars {
    next: u32,
}

impl FreshVars {
    pub fn starting_at(next: u32) -> Self {
        FreshVars { next: next.max(1) }
    }

    /// A generator whose ids lie strictly above every id occurring in `vars`.
    pub fn above<'a>(vars: impl IntoIterator<Item = &'a Var>) -> Self {
        let max = vars.into_iter().map(|v| v.id).max().unwrap_or(0);
        Self::starting_at(max + 1)
    }

    pub fn fresh(&mut self, name: &str) -> Var {
        let v = Var::new(name, self.next);
        self.next += 1;
        v
    }

    pub fn peek(&self) -> u32 {
        self.next
    }
}
