//! Predicate-argument structures as untyped lambda terms.
//!
//! Application associates left and abstraction bodies extend right, so
//! `\x\y.like x y` is λx.λy.((like x) y). Identifiers that are not bound by
//! an enclosing lambda parse as constants.

use std::collections::BTreeSet;
use std::fmt;

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum LambdaTerm {
    Var(String),
    /// A basic term. `quoted` marks `!token` forms, which print back with
    /// the `!` prefix and never equal their bare counterpart.
    Const { name: String, quoted: bool },
    Abs { binder: String, body: Box<LambdaTerm> },
    App { fun: Box<LambdaTerm>, arg: Box<LambdaTerm> },
}

impl LambdaTerm {
    pub fn var(name: impl Into<String>) -> Self {
        LambdaTerm::Var(name.into())
    }

    pub fn constant(name: impl Into<String>) -> Self {
        LambdaTerm::Const { name: name.into(), quoted: false }
    }

    pub fn abs(binder: impl Into<String>, body: LambdaTerm) -> Self {
        LambdaTerm::Abs { binder: binder.into(), body: Box::new(body) }
    }

    pub fn app(fun: LambdaTerm, arg: LambdaTerm) -> Self {
        LambdaTerm::App { fun: Box::new(fun), arg: Box::new(arg) }
    }

    /// Left-associative application to a sequence of arguments.
    pub fn apply_all(self, args: impl IntoIterator<Item = LambdaTerm>) -> Self {
        args.into_iter().fold(self, LambdaTerm::app)
    }

    /// Number of leading abstractions: `\x\y.t` has 2.
    pub fn leading_lambdas(&self) -> usize {
        match self {
            LambdaTerm::Abs { body, .. } => 1 + body.leading_lambdas(),
            _ => 0,
        }
    }

    pub fn free_vars(&self) -> BTreeSet<String> {
        let mut out = BTreeSet::new();
        self.collect_free(&mut Vec::new(), &mut out);
        out
    }

    fn collect_free(&self, bound: &mut Vec<String>, out: &mut BTreeSet<String>) {
        match self {
            LambdaTerm::Var(v) => {
                if !bound.iter().any(|b| b == v) {
                    out.insert(v.clone());
                }
            }
            LambdaTerm::Const { .. } => {}
            LambdaTerm::Abs { binder, body } => {
                bound.push(binder.clone());
                body.collect_free(bound, out);
                bound.pop();
            }
            LambdaTerm::App { fun, arg } => {
                fun.collect_free(bound, out);
                arg.collect_free(bound, out);
            }
        }
    }

    /// A term with no free variables (constants are fine).
    pub fn is_closed(&self) -> bool {
        self.free_vars().is_empty()
    }

    fn fmt_prec(&self, f: &mut fmt::Formatter<'_>, in_fun: bool, in_arg: bool) -> fmt::Result {
        match self {
            LambdaTerm::Var(v) => write!(f, "{v}"),
            LambdaTerm::Const { name, quoted } => {
                if *quoted {
                    write!(f, "!{name}")
                } else {
                    write!(f, "{name}")
                }
            }
            LambdaTerm::Abs { .. } => {
                if in_fun || in_arg {
                    write!(f, "(")?;
                }
                let mut t = self;
                while let LambdaTerm::Abs { binder, body } = t {
                    write!(f, "\\{binder}")?;
                    t = body;
                }
                write!(f, ".")?;
                t.fmt_prec(f, false, false)?;
                if in_fun || in_arg {
                    write!(f, ")")?;
                }
                Ok(())
            }
            LambdaTerm::App { fun, arg } => {
                if in_arg {
                    write!(f, "(")?;
                }
                fun.fmt_prec(f, true, false)?;
                write!(f, " ")?;
                arg.fmt_prec(f, false, true)?;
                if in_arg {
                    write!(f, ")")?;
                }
                Ok(())
            }
        }
    }
}

impl fmt::Display for LambdaTerm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.fmt_prec(f, false, false)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::parse::parse_lambda;

    #[test]
    fn print_minimal_parens() {
        let t = parse_lambda("\\x\\y.like x y").unwrap();
        assert_eq!(t.to_string(), "\\x\\y.like x y");
        let t = parse_lambda("persuade (study harry) harry mary").unwrap();
        assert_eq!(t.to_string(), "persuade (study harry) harry mary");
        let t = parse_lambda("\\p.p (\\x.f x)").unwrap();
        assert_eq!(t.to_string(), "\\p.p (\\x.f x)");
    }

    #[test]
    fn leading_lambdas_counts_binders() {
        assert_eq!(parse_lambda("\\x\\y.like x y").unwrap().leading_lambdas(), 2);
        assert_eq!(parse_lambda("sleep someone").unwrap().leading_lambdas(), 0);
    }

    #[test]
    fn unbound_identifiers_are_constants() {
        let t = parse_lambda("\\x.man x").unwrap();
        assert_eq!(
            t,
            LambdaTerm::abs("x", LambdaTerm::app(LambdaTerm::constant("man"), LambdaTerm::var("x")))
        );
        assert!(t.is_closed());
    }

    #[test]
    fn quoted_constants_distinct() {
        let a = parse_lambda("!name").unwrap();
        let b = parse_lambda("name").unwrap();
        assert_ne!(a, b);
        assert_eq!(a.to_string(), "!name");
    }
}
