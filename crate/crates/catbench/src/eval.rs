//! Normal-order beta reduction with capture-avoiding substitution, and
//! alpha-equivalence. No eta conversion is applied anywhere.

use thiserror::Error;

use crate::lambda::LambdaTerm;

/// Step budget guarding pathological predicate-argument structures; the
/// terms the engine produces are linear and reduce in far fewer steps.
pub const DEFAULT_REDUCTION_BUDGET: usize = 10_000;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum EvalError {
    #[error("beta reduction exceeded {0} steps")]
    ReductionDepthExceeded(usize),
}

struct Reducer {
    steps_left: usize,
    budget: usize,
}

impl Reducer {
    fn step(&mut self) -> Result<(), EvalError> {
        if self.steps_left == 0 {
            return Err(EvalError::ReductionDepthExceeded(self.budget));
        }
        self.steps_left -= 1;
        Ok(())
    }

    /// Weak head normal form: reduce head redexes only.
    fn whnf(&mut self, t: LambdaTerm) -> Result<LambdaTerm, EvalError> {
        match t {
            LambdaTerm::App { fun, arg } => {
                let fun = self.whnf(*fun)?;
                if let LambdaTerm::Abs { binder, body } = fun {
                    self.step()?;
                    self.whnf(substitute(*body, &binder, &arg))
                } else {
                    Ok(LambdaTerm::App { fun: Box::new(fun), arg })
                }
            }
            other => Ok(other),
        }
    }

    /// Full beta-normal form, normal order (leftmost-outermost).
    fn nf(&mut self, t: LambdaTerm) -> Result<LambdaTerm, EvalError> {
        match self.whnf(t)? {
            LambdaTerm::Abs { binder, body } => {
                Ok(LambdaTerm::abs(binder, self.nf(*body)?))
            }
            LambdaTerm::App { fun, arg } => {
                // Head is not an abstraction; normalize the pieces.
                Ok(LambdaTerm::app(self.nf(*fun)?, self.nf(*arg)?))
            }
            atom => Ok(atom),
        }
    }
}

/// Capture-avoiding substitution of `arg` for `var` in `t`. Colliding
/// binders are renamed with numbered suffixes on the original name, so
/// fresh names are stable across runs.
fn substitute(t: LambdaTerm, var: &str, arg: &LambdaTerm) -> LambdaTerm {
    match t {
        LambdaTerm::Var(v) => {
            if v == var {
                arg.clone()
            } else {
                LambdaTerm::Var(v)
            }
        }
        c @ LambdaTerm::Const { .. } => c,
        LambdaTerm::App { fun, arg: a } => LambdaTerm::app(
            substitute(*fun, var, arg),
            substitute(*a, var, arg),
        ),
        LambdaTerm::Abs { binder, body } => {
            if binder == var {
                // Shadowed; nothing to do below.
                return LambdaTerm::Abs { binder, body };
            }
            let arg_free = arg.free_vars();
            if arg_free.contains(&binder) && body.free_vars().contains(var) {
                let body_free = body.free_vars();
                let fresh = fresh_name(&binder, |n| {
                    n != var && !arg_free.contains(n) && !body_free.contains(n)
                });
                let renamed = substitute(*body, &binder, &LambdaTerm::var(fresh.clone()));
                LambdaTerm::abs(fresh, substitute(renamed, var, arg))
            } else {
                LambdaTerm::abs(binder, substitute(*body, var, arg))
            }
        }
    }
}

fn fresh_name(base: &str, ok: impl Fn(&str) -> bool) -> String {
    for i in 1.. {
        let cand = format!("{base}{i}");
        if ok(&cand) {
            return cand;
        }
    }
    unreachable!()
}

/// Reduces to full beta-normal form with the default step budget.
pub fn beta_reduce(t: &LambdaTerm) -> Result<LambdaTerm, EvalError> {
    beta_reduce_with_budget(t, DEFAULT_REDUCTION_BUDGET)
}

pub fn beta_reduce_with_budget(t: &LambdaTerm, budget: usize) -> Result<LambdaTerm, EvalError> {
    Reducer { steps_left: budget, budget }.nf(t.clone())
}

/// Equality up to consistent renaming of bound variables. Constants compare
/// by name and string flag; inputs are expected beta-normal.
pub fn alpha_equiv(a: &LambdaTerm, b: &LambdaTerm) -> bool {
    fn go(a: &LambdaTerm, b: &LambdaTerm, sa: &mut Vec<String>, sb: &mut Vec<String>) -> bool {
        match (a, b) {
            (LambdaTerm::Var(x), LambdaTerm::Var(y)) => {
                let ia = sa.iter().rposition(|n| n == x);
                let ib = sb.iter().rposition(|n| n == y);
                match (ia, ib) {
                    (Some(i), Some(j)) => i == j,
                    (None, None) => x == y,
                    _ => false,
                }
            }
            (
                LambdaTerm::Const { name: na, quoted: qa },
                LambdaTerm::Const { name: nb, quoted: qb },
            ) => na == nb && qa == qb,
            (LambdaTerm::Abs { binder: ba, body: a }, LambdaTerm::Abs { binder: bb, body: b }) => {
                sa.push(ba.clone());
                sb.push(bb.clone());
                let r = go(a, b, sa, sb);
                sa.pop();
                sb.pop();
                r
            }
            (LambdaTerm::App { fun: fa, arg: aa }, LambdaTerm::App { fun: fb, arg: ab }) => {
                go(fa, fb, sa, sb) && go(aa, ab, sa, sb)
            }
            _ => false,
        }
    }
    go(a, b, &mut Vec::new(), &mut Vec::new())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::parse::parse_lambda;

    fn lf(s: &str) -> LambdaTerm {
        parse_lambda(s).unwrap()
    }

    fn nf(s: &str) -> String {
        beta_reduce(&lf(s)).unwrap().to_string()
    }

    #[test]
    fn two_beta_steps() {
        assert_eq!(nf("(\\x\\y.(like x) y) john mary"), "like john mary");
    }

    #[test]
    fn lifted_composition_root_evaluates_flat() {
        // The composition of the raised subject with the eta-lifted verb
        // phrase, run on the identity continuation, evaluates to the flat
        // predicate-argument structure.
        let vp = "\\y.(admire john) y";
        let term = format!("(\\z.(\\f.({vp}) f) ((\\p.p sincerity) z)) (\\v.v)");
        assert_eq!(nf(&term), "admire john sincerity");
    }

    #[test]
    fn identity_tense_lf() {
        assert_eq!(nf("(\\p.p) (\\y.(bring salmon) y)"), "\\y.bring salmon y");
    }

    #[test]
    fn capture_avoidance() {
        // (\x.\y.x y) applied to a free variable y must not capture it.
        // (Free identifiers only arise mid-reduction; the parser makes
        // top-level free names constants.)
        let t = LambdaTerm::app(lf("\\x.\\y.x y"), LambdaTerm::var("y"));
        let r = beta_reduce(&t).unwrap();
        assert_eq!(r.to_string(), "\\y1.y y1");
        let expected = LambdaTerm::abs(
            "z",
            LambdaTerm::app(LambdaTerm::var("y"), LambdaTerm::var("z")),
        );
        assert!(alpha_equiv(&r, &expected));
    }

    #[test]
    fn budget_guards_divergence() {
        // (\x.x x)(\x.x x) loops forever.
        let omega = lf("(\\x.x x) (\\x.x x)");
        assert_eq!(
            beta_reduce_with_budget(&omega, 100),
            Err(EvalError::ReductionDepthExceeded(100))
        );
    }

    #[test]
    fn normal_order_reaches_nf_where_applicative_diverges() {
        // (\x.k) applied to omega still normalizes in normal order.
        let t = lf("(\\x.k) ((\\x.x x) (\\x.x x))");
        assert_eq!(beta_reduce_with_budget(&t, 100).unwrap().to_string(), "k");
    }

    #[test]
    fn reduce_is_idempotent_on_outputs() {
        for s in [
            "(\\x\\y.(like x) y) john mary",
            "(\\p.p) (\\y.(bring salmon) y)",
            "(\\lf\\p.p lf) john",
        ] {
            let once = beta_reduce(&lf(s)).unwrap();
            let twice = beta_reduce(&once).unwrap();
            assert_eq!(once, twice);
        }
    }

    #[test]
    fn alpha_equivalence_cases() {
        assert!(alpha_equiv(&lf("\\x.f x"), &lf("\\y.f y")));
        assert!(!alpha_equiv(
            &lf("persuade (study harry) harry mary"),
            &lf("promise (study mary) harry mary")
        ));
        assert!(!alpha_equiv(&lf("\\x.x"), &lf("\\x.f x")));
        assert!(!alpha_equiv(&lf("!tok"), &lf("tok")));
        // Free variables compare by name.
        assert!(!alpha_equiv(&lf("\\x.x y"), &lf("\\x.x z")));
    }

    // Confluence spot-check: an independent applicative-order reducer
    // reaches an alpha-equal normal form on strongly normalizing terms.
    fn applicative_nf(t: &LambdaTerm, steps: &mut usize) -> Option<LambdaTerm> {
        if *steps == 0 {
            return None;
        }
        match t {
            LambdaTerm::Var(_) | LambdaTerm::Const { .. } => Some(t.clone()),
            LambdaTerm::Abs { binder, body } => {
                Some(LambdaTerm::abs(binder.clone(), applicative_nf(body, steps)?))
            }
            LambdaTerm::App { fun, arg } => {
                let f = applicative_nf(fun, steps)?;
                let a = applicative_nf(arg, steps)?;
                if let LambdaTerm::Abs { binder, body } = f {
                    *steps -= 1;
                    applicative_nf(&substitute(*body, &binder, &a), steps)
                } else {
                    Some(LambdaTerm::app(f, a))
                }
            }
        }
    }

    #[test]
    fn confluence_spot_check() {
        for s in [
            "(\\x\\y.(like x) y) john mary",
            "(\\f\\g\\x.f (g x)) (\\a.p a) (\\b.q b) c",
            "(\\p.p sincerity) (\\y.(admire john) y)",
            "(\\lf\\p.p lf) (\\y.run y)",
        ] {
            let t = lf(s);
            let normal = beta_reduce(&t).unwrap();
            let mut steps = 1000;
            let applicative = applicative_nf(&t, &mut steps).unwrap();
            assert!(alpha_equiv(&normal, &applicative), "{s}");
        }
    }
}
