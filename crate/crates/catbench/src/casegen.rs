//! Derives second-order case functions (type-raising relational rules) from
//! the subcategorizations of designated parts of speech, and writes them to
//! `.sc.arules` files.

use std::path::{Path, PathBuf};

use thiserror::Error;

use crate::category::{Category, Modality, SlashDir, SlashSpec};
use crate::element::{AsymRule, SourcedGrammar};
use crate::lambda::LambdaTerm;
use crate::source::atomic_write;

#[derive(Debug, Error)]
pub enum CasegenError {
    #[error("no parts of speech given")]
    EmptyPosList,
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

/// Walks the curried spine of every entry whose part of speech is listed
/// and emits one raising rule per argument slot: where the functor at the
/// slot is `R\A`, the argument raises to `R/F`; where it is `R/A`, to
/// `R\F`. The inner slot reproduces the functor verbatim, the outer slash
/// is plain, and the lf is `\lf\p.p lf`. Singleton and meta slots are
/// skipped, as are slots under double slashes. Duplicate rules (up to
/// variable names) are emitted once; names run `case-<pos>-<n>`.
///
/// Returns the rules and a list of warnings.
pub fn generate_case_functions(
    grammar: &SourcedGrammar,
    pos_list: &[String],
) -> Result<(Vec<AsymRule>, Vec<String>), CasegenError> {
    if pos_list.is_empty() {
        return Err(CasegenError::EmptyPosList);
    }
    let pos_list: Vec<String> = pos_list.iter().map(|p| p.to_ascii_lowercase()).collect();
    let mut rules: Vec<AsymRule> = Vec::new();
    let mut warnings = Vec::new();
    let mut matched_any = false;

    for pos in &pos_list {
        let mut counter = 0usize;
        for entry in grammar.entries().filter(|e| &e.pos == pos) {
            matched_any = true;
            let mut functor = entry.cat.clone();
            while let Category::Complex { result, slash, argument } = functor.clone() {
                if slash.order == crate::category::SlashOrder::Double {
                    warnings.push(format!(
                        "skipping a double-slash slot of `{}`",
                        entry.phon_text()
                    ));
                    functor = *result;
                    continue;
                }
                match *argument {
                    Category::Singleton(_) | Category::Meta { .. } => {
                        functor = *result;
                        continue;
                    }
                    _ => {}
                }
                let raised_dir = match slash.dir {
                    SlashDir::Left => SlashDir::Right,
                    SlashDir::Right => SlashDir::Left,
                };
                let rhs_cat = Category::complex(
                    (*result).clone(),
                    SlashSpec::single(raised_dir, Modality::Dot),
                    functor.clone(),
                );
                let lhs_lf = LambdaTerm::constant("lf");
                let rhs_lf = LambdaTerm::abs(
                    "lf",
                    LambdaTerm::abs(
                        "p",
                        LambdaTerm::app(LambdaTerm::var("p"), LambdaTerm::var("lf")),
                    ),
                );
                let candidate = AsymRule {
                    name: String::new(),
                    lhs_cat: (*argument).clone(),
                    lhs_lf,
                    rhs_cat,
                    rhs_lf,
                    key: None,
                    weight: 1.0,
                };
                let duplicate = rules.iter().any(|r| same_rule_shape(r, &candidate));
                if !duplicate {
                    counter += 1;
                    rules.push(AsymRule { name: format!("case-{pos}-{counter}"), ..candidate });
                }
                functor = *result;
            }
        }
    }

    if !matched_any {
        warnings.push("no entries match the given parts of speech".into());
    }
    Ok((rules, warnings))
}

/// Rules are duplicates when their categories are equal up to variable
/// renaming (names and tags ignored, structure and constants compared).
fn same_rule_shape(a: &AsymRule, b: &AsymRule) -> bool {
    cat_equal_mod_vars(&a.lhs_cat, &b.lhs_cat) && cat_equal_mod_vars(&a.rhs_cat, &b.rhs_cat)
}

fn cat_equal_mod_vars(a: &Category, b: &Category) -> bool {
    use crate::category::FeatVal;
    match (a, b) {
        (
            Category::Basic { name: an, features: af },
            Category::Basic { name: bn, features: bf },
        ) => {
            an == bn
                && af.pairs().len() == bf.pairs().len()
                && af.pairs().iter().zip(bf.pairs()).all(|((n1, v1), (n2, v2))| {
                    n1 == n2
                        && match (v1, v2) {
                            (FeatVal::Const(c1), FeatVal::Const(c2)) => c1 == c2,
                            (FeatVal::Var { .. }, FeatVal::Var { .. }) => true,
                            _ => false,
                        }
                })
        }
        (
            Category::Complex { result: ar, slash: asl, argument: aa },
            Category::Complex { result: br, slash: bsl, argument: ba },
        ) => asl == bsl && cat_equal_mod_vars(ar, br) && cat_equal_mod_vars(aa, ba),
        (Category::Singleton(x), Category::Singleton(y)) => x == y,
        (Category::Meta { .. }, Category::Meta { .. }) => true,
        _ => false,
    }
}

/// Writes generated rules as `.sc.arules` lines, parseable as grammar text.
/// The file goes next to the grammar they came from so they can be merged
/// manually; in-session the caller also adds them to the loaded grammar.
pub fn write_arules(rules: &[AsymRule], grammar_name: &str, dir: &Path) -> Result<PathBuf, CasegenError> {
    let path = dir.join(format!("{grammar_name}.sc.arules"));
    let mut text = String::new();
    for rule in rules {
        // The file is for manual merging; keys are assigned at sourcing.
        let unkeyed = AsymRule { key: None, ..rule.clone() };
        text.push_str(&unkeyed.to_string());
        text.push('\n');
    }
    atomic_write(&path, &text)?;
    Ok(path)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::parse::parse_grammar_text;
    use crate::source::source_grammar;

    fn sourced(text: &str) -> SourcedGrammar {
        let (g, errs) = parse_grammar_text(text);
        assert!(errs.is_empty(), "{errs:?}");
        source_grammar(&g).unwrap()
    }

    #[test]
    fn likes_yields_subject_and_object_rules() {
        let g = sourced("likes | v :: (s\\np[agr=3s])/np : \\x\\y.(like x) y\n");
        let (rules, warnings) = generate_case_functions(&g, &["v".into()]).unwrap();
        assert!(warnings.is_empty());
        assert_eq!(rules.len(), 2);
        // Slot 1 (outermost): object to the right raises to R\F.
        assert_eq!(rules[0].lhs_cat.to_string(), "np");
        assert_eq!(
            rules[0].rhs_cat.to_string(),
            "(s\\np[agr=3s])\\((s\\np[agr=3s])/np)"
        );
        // Slot 2: subject to the left raises to R/F.
        assert_eq!(rules[1].lhs_cat.to_string(), "np[agr=3s]");
        assert_eq!(rules[1].rhs_cat.to_string(), "s/(s\\np[agr=3s])");
        for r in &rules {
            assert_eq!(r.rhs_lf.to_string(), "\\lf\\p.p lf");
            // The raised category consumes exactly one functor slot.
            match &r.rhs_cat {
                Category::Complex { argument, .. } => assert!(argument.arity() >= 1),
                other => panic!("raised category must be complex, got {other}"),
            }
        }
        // Where the functor's result is basic, the spine grows by one slot.
        assert_eq!(rules[1].rhs_cat.arity(), rules[1].lhs_cat.arity() + 1);
    }

    #[test]
    fn verb_modalities_copied_verbatim_into_inner_slot() {
        let g = sourced("likes | v :: (s\\^np[agr=3s])/^np : \\x\\y.(like x) y\n");
        let (rules, _) = generate_case_functions(&g, &["v".into()]).unwrap();
        assert_eq!(rules[1].rhs_cat.to_string(), "s/(s\\^np[agr=3s])");
    }

    #[test]
    fn feature_variables_stay_variables() {
        let g = sourced("bring | v :: iv[agr=?d]/np : \\x\\y.(bring x) y\n");
        let (rules, _) = generate_case_functions(&g, &["v".into()]).unwrap();
        assert_eq!(rules[0].rhs_cat.to_string(), "iv[agr=?d]\\(iv[agr=?d]/np)");
    }

    #[test]
    fn identical_subcategorizations_deduplicate() {
        let g = sourced(
            "likes | v :: (s\\np)/np : \\x\\y.(like x) y\nadmires | v :: (s\\np)/np : \\x\\y.(admire x) y\n",
        );
        let (rules, _) = generate_case_functions(&g, &["v".into()]).unwrap();
        assert_eq!(rules.len(), 2);
    }

    #[test]
    fn generation_is_deterministic_and_idempotent() {
        let g = sourced("likes | v :: (s\\np[agr=3s])/np : \\x\\y.(like x) y\n");
        let (r1, _) = generate_case_functions(&g, &["v".into()]).unwrap();
        let (r2, _) = generate_case_functions(&g, &["v".into()]).unwrap();
        assert_eq!(r1, r2);
    }

    #[test]
    fn singleton_and_meta_slots_skipped() {
        let g = sourced(
            "kicked | v :: (s\\np)/\"the bucket\" : \\x\\y.die y\nand | v :: (@x\\*@x)/*@x : \\p\\q\\x.(and (p x)) (q x)\n",
        );
        let (rules, _) = generate_case_functions(&g, &["v".into()]).unwrap();
        // Only the subject slot of `kicked` yields a rule.
        assert_eq!(rules.len(), 1);
        assert_eq!(rules[0].lhs_cat.to_string(), "np");
    }

    #[test]
    fn empty_pos_list_is_an_error_and_no_match_warns() {
        let g = sourced("likes | v :: (s\\np)/np : \\x\\y.(like x) y\n");
        assert!(matches!(generate_case_functions(&g, &[]), Err(CasegenError::EmptyPosList)));
        let (rules, warnings) = generate_case_functions(&g, &["adv".into()]).unwrap();
        assert!(rules.is_empty());
        assert_eq!(warnings.len(), 1);
    }

    #[test]
    fn written_file_reparses_as_rules() {
        let g = sourced("likes | v :: (s\\np[agr=3s])/np : \\x\\y.(like x) y\n");
        let (rules, _) = generate_case_functions(&g, &["v".into()]).unwrap();
        let dir = tempfile::tempdir().unwrap();
        let path = write_arules(&rules, "toy", dir.path()).unwrap();
        assert!(path.ends_with("toy.sc.arules"));
        let text = std::fs::read_to_string(&path).unwrap();
        let (g2, errs) = parse_grammar_text(&text);
        assert!(errs.is_empty(), "{errs:?}");
        assert_eq!(g2.arules().count(), 2);
        let names: Vec<&str> = g2.arules().map(|r| r.name.as_str()).collect();
        assert_eq!(names, vec!["case-v-1", "case-v-2"]);
    }
}
