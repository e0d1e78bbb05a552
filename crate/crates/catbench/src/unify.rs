//! Term unification for categories: feature variables bind to feature
//! values, meta variables bind to whole categories. Unification keeps every
//! combination step local; no structural re-entrancy.

use std::collections::BTreeMap;

use crate::category::{Category, FeatVal, FeatureBundle};

type VarKey = (String, u64);

/// Bindings accumulated during one combination step. Acyclic; applying a
/// substitution resolves chains, so applying twice equals applying once.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Substitution {
    feats: BTreeMap<VarKey, FeatVal>,
    metas: BTreeMap<VarKey, Category>,
}

impl Substitution {
    pub fn new() -> Self {
        Substitution::default()
    }

    pub fn is_empty(&self) -> bool {
        self.feats.is_empty() && self.metas.is_empty()
    }

    pub fn feat_binding(&self, name: &str, tag: u64) -> Option<&FeatVal> {
        self.feats.get(&(name.to_string(), tag))
    }

    pub fn meta_binding(&self, name: &str, tag: u64) -> Option<&Category> {
        self.metas.get(&(name.to_string(), tag))
    }

    /// Follows variable chains to the final value of a feature term.
    fn resolve_feat(&self, v: &FeatVal) -> FeatVal {
        let mut cur = v.clone();
        let mut hops = 0;
        while let FeatVal::Var { name, tag } = &cur {
            match self.feats.get(&(name.clone(), *tag)) {
                Some(next) => {
                    cur = next.clone();
                    hops += 1;
                    debug_assert!(hops <= self.feats.len() + 1, "cyclic substitution");
                }
                None => break,
            }
        }
        cur
    }

    fn resolve_meta(&self, cat: &Category) -> Option<Category> {
        if let Category::Meta { name, tag } = cat {
            let mut cur = self.metas.get(&(name.clone(), *tag))?.clone();
            while let Category::Meta { name, tag } = &cur {
                match self.metas.get(&(name.clone(), *tag)) {
                    Some(next) => cur = next.clone(),
                    None => break,
                }
            }
            Some(cur)
        } else {
            None
        }
    }

    fn bind_feat(&mut self, name: &str, tag: u64, val: FeatVal) {
        self.feats.insert((name.to_string(), tag), val);
    }

    fn bind_meta(&mut self, name: &str, tag: u64, cat: Category) -> bool {
        // Occurs check keeps the substitution acyclic.
        let resolved = self.apply(&cat);
        if resolved.contains_meta_var(name, tag) {
            return false;
        }
        self.metas.insert((name.to_string(), tag), resolved);
        true
    }

    pub fn apply_feat(&self, v: &FeatVal) -> FeatVal {
        self.resolve_feat(v)
    }

    /// Applies the substitution throughout a category.
    pub fn apply(&self, cat: &Category) -> Category {
        match cat {
            Category::Basic { name, features } => {
                let pairs = features
                    .pairs()
                    .iter()
                    .map(|(n, v)| (n.clone(), self.resolve_feat(v)))
                    .collect();
                Category::Basic {
                    name: name.clone(),
                    features: FeatureBundle::new(pairs).expect("apply keeps names unique"),
                }
            }
            Category::Complex { result, slash, argument } => {
                Category::complex(self.apply(result), *slash, self.apply(argument))
            }
            Category::Singleton(_) => cat.clone(),
            Category::Meta { .. } => match self.resolve_meta(cat) {
                Some(bound) => self.apply(&bound),
                None => cat.clone(),
            },
        }
    }
}

/// Unifies two feature values under the current substitution.
fn unify_featval(a: &FeatVal, b: &FeatVal, subst: &mut Substitution) -> bool {
    let ra = subst.resolve_feat(a);
    let rb = subst.resolve_feat(b);
    match (&ra, &rb) {
        (FeatVal::Const(x), FeatVal::Const(y)) => x == y,
        (FeatVal::Var { name, tag }, other) => {
            if let FeatVal::Var { name: n2, tag: t2 } = other {
                if n2 == name && t2 == tag {
                    return true;
                }
            }
            subst.bind_feat(name, *tag, other.clone());
            true
        }
        (other, FeatVal::Var { name, tag }) => {
            subst.bind_feat(name, *tag, other.clone());
            true
        }
    }
}

/// Unifies two basic categories: names must be equal and every feature
/// present in both must unify. A feature present on only one side imposes
/// no constraint and survives in the merged bundle.
///
/// Returns the merged feature bundle (substitution applied) on success.
pub fn unify_basic(
    a_name: &str,
    a_feats: &FeatureBundle,
    b_name: &str,
    b_feats: &FeatureBundle,
    subst: &mut Substitution,
) -> Option<FeatureBundle> {
    if a_name != b_name {
        return None;
    }
    for (n, va) in a_feats.pairs() {
        if let Some(vb) = b_feats.get(n) {
            if !unify_featval(va, vb, subst) {
                return None;
            }
        }
    }
    let merged = a_feats.merged_with(b_feats);
    let pairs = merged
        .pairs()
        .iter()
        .map(|(n, v)| (n.clone(), subst.resolve_feat(v)))
        .collect();
    Some(FeatureBundle::new(pairs).expect("merged bundle keeps names unique"))
}

/// Unifies two categories, accumulating bindings in `subst`. Meta variables
/// unify with any whole category (consistently within one combination);
/// complex categories unify componentwise with identical slash direction,
/// order, and modality; singletons unify only with an identical singleton.
pub fn unify_cat(a: &Category, b: &Category, subst: &mut Substitution) -> bool {
    let a = match subst.resolve_meta(a) {
        Some(bound) => bound,
        None => a.clone(),
    };
    let b = match subst.resolve_meta(b) {
        Some(bound) => bound,
        None => b.clone(),
    };
    match (&a, &b) {
        (Category::Meta { name, tag }, other) | (other, Category::Meta { name, tag }) => {
            if let Category::Meta { name: n2, tag: t2 } = other {
                if n2 == name && t2 == tag {
                    return true;
                }
            }
            subst.bind_meta(name, *tag, other.clone())
        }
        (
            Category::Basic { name: an, features: af },
            Category::Basic { name: bn, features: bf },
        ) => unify_basic(an, af, bn, bf, subst).is_some(),
        (
            Category::Complex { result: ar, slash: asl, argument: aa },
            Category::Complex { result: br, slash: bsl, argument: ba },
        ) => asl == bsl && unify_cat(ar, br, subst) && unify_cat(aa, ba, subst),
        (Category::Singleton(x), Category::Singleton(y)) => x == y,
        _ => false,
    }
}

/// Convenience wrapper: unify from scratch, returning the substitution.
pub fn unify(a: &Category, b: &Category) -> Option<Substitution> {
    let mut subst = Substitution::new();
    if unify_cat(a, b, &mut subst) {
        Some(subst)
    } else {
        None
    }
}

/// Renames every feature and meta variable in a category with a fresh tag
/// drawn from `next_tag`, keeping equal variables equal within the category.
/// Grammar elements are renamed apart before each combination so variable
/// scope stays local to one element.
pub fn rename_category(cat: &Category, next_tag: &mut u64, map: &mut BTreeMap<VarKey, u64>) -> Category {
    match cat {
        Category::Basic { name, features } => {
            let pairs = features
                .pairs()
                .iter()
                .map(|(n, v)| {
                    let v = match v {
                        FeatVal::Var { name, tag } => {
                            let entry = map.entry((name.clone(), *tag)).or_insert_with(|| {
                                *next_tag += 1;
                                *next_tag
                            });
                            FeatVal::Var { name: name.clone(), tag: *entry }
                        }
                        c => c.clone(),
                    };
                    (n.clone(), v)
                })
                .collect();
            Category::Basic {
                name: name.clone(),
                features: FeatureBundle::new(pairs).expect("rename keeps names unique"),
            }
        }
        Category::Complex { result, slash, argument } => Category::complex(
            rename_category(result, next_tag, map),
            *slash,
            rename_category(argument, next_tag, map),
        ),
        Category::Singleton(_) => cat.clone(),
        Category::Meta { name, tag } => {
            let entry = map.entry((name.clone(), *tag)).or_insert_with(|| {
                *next_tag += 1;
                *next_tag
            });
            Category::Meta { name: name.clone(), tag: *entry }
        }
    }
}

/// Renames a category apart with its own fresh variable scope.
pub fn rename_apart(cat: &Category, next_tag: &mut u64) -> Category {
    rename_category(cat, next_tag, &mut BTreeMap::new())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::parse::parse_category;

    fn cat(s: &str) -> Category {
        parse_category(s).unwrap()
    }

    #[test]
    fn basic_unification_binds_and_merges() {
        // s[f1=?x1] with s[f1=v1,f2=?x2]: ?x1 binds, ?x2 survives unbound.
        let mut subst = Substitution::new();
        let a = cat("s[f1=?x1]");
        let b = cat("s[f1=v1,f2=?x2]");
        let (an, af) = match &a {
            Category::Basic { name, features } => (name.clone(), features.clone()),
            _ => panic!(),
        };
        let (bn, bf) = match &b {
            Category::Basic { name, features } => (name.clone(), features.clone()),
            _ => panic!(),
        };
        let merged = unify_basic(&an, &af, &bn, &bf, &mut subst).unwrap();
        assert_eq!(subst.feat_binding("x1", 0), Some(&FeatVal::Const("v1".into())));
        assert_eq!(subst.feat_binding("x2", 0), None);
        assert_eq!(merged.to_string(), "[f1=v1,f2=?x2]");
    }

    #[test]
    fn constant_clash_fails() {
        assert!(unify(&cat("np[agr=3s]"), &cat("np[agr=1s]")).is_none());
    }

    #[test]
    fn one_sided_feature_imposes_no_constraint() {
        let subst = unify(&cat("np"), &cat("np[case=nom]")).unwrap();
        assert!(subst.is_empty());
    }

    #[test]
    fn meta_binds_whole_category() {
        let subst = unify(&cat("@x"), &cat("s\\np")).unwrap();
        assert!(subst.meta_binding("x", 0).unwrap().cat_equal(&cat("s\\np")));
    }

    #[test]
    fn meta_consistency_within_combination() {
        // (@x\@x) with x already bound to `s` cannot take argument `s\np`.
        let mut subst = Substitution::new();
        assert!(unify_cat(&cat("@x"), &cat("s"), &mut subst));
        assert!(!unify_cat(&cat("@x"), &cat("s\\np"), &mut subst));
    }

    #[test]
    fn meta_occurs_check() {
        let mut subst = Substitution::new();
        let meta = cat("@x");
        let contains = cat("s/@x");
        assert!(!unify_cat(&meta, &contains, &mut subst));
    }

    #[test]
    fn meta_may_bind_singleton() {
        let subst = unify(&cat("@x"), &cat("\"the bucket\"")).unwrap();
        assert_eq!(subst.meta_binding("x", 0).unwrap().to_string(), "\"the bucket\"");
    }

    #[test]
    fn direction_and_modality_clash() {
        assert!(unify(&cat("s/np"), &cat("s\\np")).is_none());
        assert!(unify(&cat("s/^np"), &cat("s/np")).is_none());
        assert!(unify(&cat("s//np"), &cat("s/np")).is_none());
    }

    #[test]
    fn unify_symmetry() {
        let pairs = [
            ("s[f1=?x1]", "s[f1=v1,f2=?x2]"),
            ("np", "np[case=nom]"),
            ("@x", "s\\np"),
            ("s/np", "s\\np"),
            ("np[agr=3s]", "np[agr=1s]"),
        ];
        for (a, b) in pairs {
            let ab = unify(&cat(a), &cat(b)).is_some();
            let ba = unify(&cat(b), &cat(a)).is_some();
            assert_eq!(ab, ba, "{a} vs {b}");
        }
    }

    #[test]
    fn applying_substitution_equalizes_inputs() {
        let a = cat("s[f1=?x1,f2=v2]");
        let b = cat("s[f1=v1]");
        let subst = unify(&a, &b).unwrap();
        let a2 = subst.apply(&a);
        let b2 = subst.apply(&b);
        // After substitution shared features agree.
        match (&a2, &b2) {
            (Category::Basic { features: fa, .. }, Category::Basic { features: fb, .. }) => {
                assert_eq!(fa.get("f1"), fb.get("f1"));
            }
            _ => panic!(),
        }
    }

    #[test]
    fn rename_apart_keeps_sharing_within_category() {
        let mut next = 0;
        let c = rename_apart(&cat("(s/np[agr=?x])/np[agr=?x]"), &mut next);
        let mut tags = Vec::new();
        fn collect(c: &Category, out: &mut Vec<u64>) {
            match c {
                Category::Basic { features, .. } => {
                    for (_, v) in features.pairs() {
                        if let FeatVal::Var { tag, .. } = v {
                            out.push(*tag);
                        }
                    }
                }
                Category::Complex { result, argument, .. } => {
                    collect(result, out);
                    collect(argument, out);
                }
                _ => {}
            }
        }
        collect(&c, &mut tags);
        assert_eq!(tags.len(), 2);
        assert_eq!(tags[0], tags[1]);
        assert_ne!(tags[0], 0);
    }
}
