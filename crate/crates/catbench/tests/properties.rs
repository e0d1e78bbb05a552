//! Property tests for the core invariants: print/parse round-trips,
//! key assignment, skeleton idempotence, unification coherence, and
//! bottom-up soundness of derivation structures.

use proptest::prelude::*;

use catbench::category::{Category, FeatVal, FeatureBundle, Modality, SlashDir, SlashSpec};
use catbench::element::SourcedGrammar;
use catbench::engine::{analyze, ChartItem, Provenance, RuleId};
use catbench::eval::{alpha_equiv, beta_reduce};
use catbench::lambda::LambdaTerm;
use catbench::parse::{parse_category, parse_grammar_text, parse_lambda};
use catbench::source::source_grammar;
use catbench::unify::{unify, unify_cat, Substitution};

fn ident() -> impl Strategy<Value = String> {
    prop::sample::select(vec!["s", "np", "vp", "n", "iv", "agr", "t", "f1", "f2", "x1", "x2"])
        .prop_map(str::to_string)
}

fn featval() -> impl Strategy<Value = FeatVal> {
    prop_oneof![
        ident().prop_map(FeatVal::Const),
        ident().prop_map(FeatVal::var),
    ]
}

fn bundle() -> impl Strategy<Value = FeatureBundle> {
    prop::collection::btree_map(ident(), featval(), 0..3)
        .prop_map(|m| FeatureBundle::new(m.into_iter().collect()).unwrap())
}

fn slash() -> impl Strategy<Value = SlashSpec> {
    prop_oneof![
        (
            prop_oneof![Just(SlashDir::Left), Just(SlashDir::Right)],
            prop_oneof![
                Just(Modality::Dot),
                Just(Modality::Diamond),
                Just(Modality::Star),
                Just(Modality::Cross)
            ]
        )
            .prop_map(|(d, m)| SlashSpec::single(d, m)),
        prop_oneof![Just(SlashDir::Left), Just(SlashDir::Right)]
            .prop_map(SlashSpec::double),
    ]
}

fn category() -> impl Strategy<Value = Category> {
    let leaf = prop_oneof![
        (ident(), bundle()).prop_map(|(name, features)| Category::Basic { name, features }),
        prop::sample::select(vec!["the bucket", "by and large", "salt"])
            .prop_map(|s| Category::Singleton(s.to_string())),
        ident().prop_map(Category::meta),
    ];
    leaf.prop_recursive(3, 16, 2, |inner| {
        (inner.clone(), slash(), inner).prop_map(|(r, s, a)| Category::complex(r, s, a))
    })
}

/// Closed lambda terms: any variable left unbound by the structural
/// generator is turned into a constant, matching what the parser does.
fn lambda_term() -> impl Strategy<Value = LambdaTerm> {
    let leaf = prop_oneof![
        ident().prop_map(LambdaTerm::var),
        ident().prop_map(LambdaTerm::constant),
        ident().prop_map(|n| LambdaTerm::Const { name: n, quoted: true }),
    ];
    leaf.prop_recursive(4, 24, 2, |inner| {
        prop_oneof![
            (ident(), inner.clone()).prop_map(|(b, t)| LambdaTerm::abs(b, t)),
            (inner.clone(), inner).prop_map(|(f, a)| LambdaTerm::app(f, a)),
        ]
    })
    .prop_map(|t| close(t, &mut Vec::new()))
}

fn close(t: LambdaTerm, scope: &mut Vec<String>) -> LambdaTerm {
    match t {
        LambdaTerm::Var(v) => {
            if scope.iter().any(|b| *b == v) {
                LambdaTerm::Var(v)
            } else {
                LambdaTerm::constant(v)
            }
        }
        // A bare identifier under a same-named binder can only denote the
        // bound variable; only `!`-quoted constants escape shadowing.
        LambdaTerm::Const { name, quoted: false } if scope.iter().any(|b| *b == name) => {
            LambdaTerm::Var(name)
        }
        c @ LambdaTerm::Const { .. } => c,
        LambdaTerm::Abs { binder, body } => {
            scope.push(binder.clone());
            let body = close(*body, scope);
            scope.pop();
            LambdaTerm::abs(binder, body)
        }
        LambdaTerm::App { fun, arg } => {
            LambdaTerm::app(close(*fun, scope), close(*arg, scope))
        }
    }
}

proptest! {
    #[test]
    fn category_print_reparse_roundtrip(c in category()) {
        let printed = c.to_string();
        let back = parse_category(&printed).unwrap();
        prop_assert!(c.cat_equal(&back), "{printed}");
    }

    #[test]
    fn skeleton_is_idempotent_and_arity_preserving(c in category()) {
        let s = c.skeleton();
        prop_assert!(s.cat_equal(&s.skeleton()));
        prop_assert_eq!(c.arity(), s.arity());
    }

    #[test]
    fn lambda_print_reparse_roundtrip(t in lambda_term()) {
        let printed = t.to_string();
        let back = parse_lambda(&printed).unwrap();
        prop_assert_eq!(&t, &back, "{}", printed);
    }

    #[test]
    fn beta_reduction_idempotent_on_closed_terms(t in lambda_term()) {
        // Random closed terms here are small; give them a tight budget and
        // only check the ones that normalize.
        if let Ok(nf) = catbench::eval::beta_reduce_with_budget(&t, 200) {
            let again = catbench::eval::beta_reduce_with_budget(&nf, 200).unwrap();
            prop_assert!(alpha_equiv(&nf, &again));
        }
    }

    #[test]
    fn unification_symmetric_and_reapplicable(a in category(), b in category()) {
        let ab = unify(&a, &b);
        let ba = unify(&b, &a);
        prop_assert_eq!(ab.is_some(), ba.is_some());
        if let Some(subst) = ab {
            // The substituted pair still unifies: bindings are coherent.
            let a2 = subst.apply(&a);
            let b2 = subst.apply(&b);
            let mut again = Substitution::new();
            prop_assert!(unify_cat(&a2, &b2, &mut again));
        }
    }

    #[test]
    fn fresh_keys_unique_and_increasing(user in prop::collection::btree_set(1u64..500, 0..6), unkeyed in 1usize..6) {
        let mut text = String::new();
        for (i, k) in user.iter().enumerate() {
            text.push_str(&format!("u{i} | n :: np : u{i} <{k}, 1.0>\n"));
        }
        for i in 0..unkeyed {
            text.push_str(&format!("w{i} | n :: np : w{i}\n"));
        }
        let (g, errs) = parse_grammar_text(&text);
        prop_assert!(errs.is_empty());
        let sg = source_grammar(&g).unwrap();
        let keys: Vec<u64> = sg.elements.iter().map(|e| e.key()).collect();
        let mut unique = keys.clone();
        unique.sort();
        unique.dedup();
        prop_assert_eq!(unique.len(), keys.len(), "keys unique");
        let max_user = user.iter().max().copied().unwrap_or(0);
        let fresh: Vec<u64> = keys[user.len()..].to_vec();
        for w in fresh.windows(2) {
            prop_assert!(w[0] < w[1], "strictly increasing in file order");
        }
        for k in &fresh {
            prop_assert!(*k > max_user, "fresh keys start above user keys");
        }
    }
}

// ---------------------------------------------------------------------------
// Soundness: replaying combinator semantics bottom-up reproduces every
// derivation's predicate-argument structure.
// ---------------------------------------------------------------------------

fn replay(item: &ChartItem, g: &SourcedGrammar) -> LambdaTerm {
    match &item.prov {
        Provenance::Lex { .. } | Provenance::SingletonLeaf { .. } | Provenance::Oov { .. } => {
            item.lf.clone()
        }
        Provenance::Arule { key, parent, .. } => {
            let rule = g
                .arules()
                .find(|r| r.key == Some(*key))
                .expect("rule present in grammar");
            beta_reduce(&LambdaTerm::app(rule.rhs_lf.clone(), replay(parent, g))).unwrap()
        }
        Provenance::Combine { rule, left, right } => {
            let l = replay(left, g);
            let r = replay(right, g);
            let term = match rule {
                RuleId::A => LambdaTerm::app(l, r),
                RuleId::T => LambdaTerm::app(r, l),
                RuleId::Fb | RuleId::Fbx => compose_term(l, r),
                RuleId::Bb | RuleId::Bbx => compose_term(r, l),
            };
            beta_reduce(&term).unwrap()
        }
    }
}

fn compose_term(f: LambdaTerm, g: LambdaTerm) -> LambdaTerm {
    LambdaTerm::abs(
        "zz",
        LambdaTerm::app(f, LambdaTerm::app(g, LambdaTerm::var("zz"))),
    )
}

#[test]
fn derivation_lfs_replay_bottom_up() {
    let cases: &[(&str, &str)] = &[
        ("english_toy.txt", "Sincerity admires John"),
        ("nuuchahnulth.txt", "yaq -it -ii ʔuut'yaap suuḥaa"),
        ("chain.txt", "w0 w1 w2 w3 w4"),
        ("idioms.txt", "Harry kicked |the bucket|"),
    ];
    for (file, input) in cases {
        let path = std::path::Path::new(env!("CARGO_MANIFEST_DIR"))
            .join("grammars")
            .join(file);
        let (g, errs) = parse_grammar_text(&std::fs::read_to_string(path).unwrap());
        assert!(errs.is_empty());
        let g = source_grammar(&g).unwrap();
        let mut cfg = catbench::Config::default();
        cfg.nfparse = false;
        let derivs = analyze(input, &g, &cfg).unwrap();
        assert!(!derivs.is_empty(), "{input}");
        for d in &derivs {
            let replayed = replay(&d.root, &g);
            assert!(
                alpha_equiv(&replayed, d.lf()),
                "{input}: replayed {replayed} vs stored {}",
                d.lf()
            );
        }
    }
}
