//! Syntactic categories: basic categories with feature bundles, complex
//! (slashed) categories, singleton string categories, and meta-categories.

use std::fmt;

/// A feature value: either a constant identifier or a variable (`?x`).
///
/// Variables carry a renaming tag so that the engine can make each grammar
/// element's variables local to one combination step. Freshly parsed values
/// have tag 0; printing ignores the tag.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum FeatVal {
    Const(String),
    Var { name: String, tag: u64 },
}

impl FeatVal {
    pub fn var(name: impl Into<String>) -> Self {
        FeatVal::Var { name: name.into(), tag: 0 }
    }
}

impl fmt::Display for FeatVal {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            FeatVal::Const(c) => write!(f, "{c}"),
            FeatVal::Var { name, .. } => write!(f, "?{name}"),
        }
    }
}

/// A bundle of `feature=value` pairs attached to a basic category.
///
/// Pairs are kept sorted by feature name, so derived equality is order-free
/// and printing is canonical. Feature names are unique within a bundle.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Default)]
pub struct FeatureBundle {
    pairs: Vec<(String, FeatVal)>,
}

impl FeatureBundle {
    pub fn empty() -> Self {
        FeatureBundle { pairs: Vec::new() }
    }

    /// Builds a bundle, rejecting duplicate feature names.
    pub fn new(mut pairs: Vec<(String, FeatVal)>) -> Result<Self, String> {
        pairs.sort_by(|a, b| a.0.cmp(&b.0));
        for w in pairs.windows(2) {
            if w[0].0 == w[1].0 {
                return Err(format!("duplicate feature name `{}`", w[0].0));
            }
        }
        Ok(FeatureBundle { pairs })
    }

    pub fn is_empty(&self) -> bool {
        self.pairs.is_empty()
    }

    pub fn pairs(&self) -> &[(String, FeatVal)] {
        &self.pairs
    }

    pub fn get(&self, name: &str) -> Option<&FeatVal> {
        self.pairs
            .binary_search_by(|(n, _)| n.as_str().cmp(name))
            .ok()
            .map(|i| &self.pairs[i].1)
    }

    /// Union of two bundles; both sides must already agree on shared names.
    pub fn merged_with(&self, other: &FeatureBundle) -> FeatureBundle {
        let mut pairs = self.pairs.clone();
        for (n, v) in &other.pairs {
            if self.get(n).is_none() {
                pairs.push((n.clone(), v.clone()));
            }
        }
        FeatureBundle::new(pairs).expect("merged bundles keep unique names")
    }
}

impl fmt::Display for FeatureBundle {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.pairs.is_empty() {
            return Ok(());
        }
        write!(f, "[")?;
        for (i, (n, v)) in self.pairs.iter().enumerate() {
            if i > 0 {
                write!(f, ",")?;
            }
            write!(f, "{n}={v}")?;
        }
        write!(f, "]")
    }
}

/// Slash direction in phonological order: `\` looks left, `/` looks right.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum SlashDir {
    Left,
    Right,
}

/// Single (`\`, `/`) or double (`\\`, `//`) slash order. Double slashes
/// take and yield potential elements of grammar and carry no modal control.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum SlashOrder {
    Single,
    Double,
}

/// Surface-syntactic modality on a slash, controlling which composition
/// rules the functor may drive.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Modality {
    /// `.` — most liberal: applications and all compositions.
    Dot,
    /// `^` — applications and harmonic composition.
    Diamond,
    /// `*` — applications only.
    Star,
    /// `+` — applications and crossing composition.
    Cross,
}

impl Modality {
    pub fn symbol(self) -> &'static str {
        match self {
            Modality::Dot => ".",
            Modality::Diamond => "^",
            Modality::Star => "*",
            Modality::Cross => "+",
        }
    }

    /// Whether this modality licenses harmonic first-order composition.
    pub fn allows_harmonic(self) -> bool {
        matches!(self, Modality::Dot | Modality::Diamond)
    }

    /// Whether this modality licenses crossing first-order composition.
    pub fn allows_crossing(self) -> bool {
        matches!(self, Modality::Dot | Modality::Cross)
    }
}

/// A slash with direction, order, and modality.
///
/// Double-order slashes always carry modality dot, stored normalized.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct SlashSpec {
    pub dir: SlashDir,
    pub order: SlashOrder,
    pub modality: Modality,
}

impl SlashSpec {
    pub fn single(dir: SlashDir, modality: Modality) -> Self {
        SlashSpec { dir, order: SlashOrder::Single, modality }
    }

    pub fn double(dir: SlashDir) -> Self {
        SlashSpec { dir, order: SlashOrder::Double, modality: Modality::Dot }
    }
}

impl fmt::Display for SlashSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self.dir {
            SlashDir::Left => "\\",
            SlashDir::Right => "/",
        };
        match self.order {
            SlashOrder::Single => {
                write!(f, "{s}")?;
                if self.modality != Modality::Dot {
                    write!(f, "{}", self.modality.symbol())?;
                }
                Ok(())
            }
            SlashOrder::Double => write!(f, "{s}{s}"),
        }
    }
}

/// A syntactic category.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum Category {
    /// Named basic category, optionally featured: `np[agr=3s]`.
    Basic { name: String, features: FeatureBundle },
    /// Function category, result written first: `s\np` is onto `s` from a
    /// left `np`.
    Complex { result: Box<Category>, slash: SlashSpec, argument: Box<Category> },
    /// A category standing for one literal surface string: `"the bucket"`.
    Singleton(String),
    /// A variable over whole categories: `@x`. Combines by application only.
    Meta { name: String, tag: u64 },
}

impl Category {
    pub fn basic(name: impl Into<String>) -> Self {
        Category::Basic { name: name.into(), features: FeatureBundle::empty() }
    }

    pub fn meta(name: impl Into<String>) -> Self {
        Category::Meta { name: name.into(), tag: 0 }
    }

    pub fn complex(result: Category, slash: SlashSpec, argument: Category) -> Self {
        Category::Complex { result: Box::new(result), slash, argument: Box::new(argument) }
    }

    /// Number of argument slots along the result spine.
    pub fn arity(&self) -> usize {
        match self {
            Category::Complex { result, .. } => 1 + result.arity(),
            _ => 0,
        }
    }

    /// Same shape with every feature bundle emptied; slashes, singletons
    /// and metas are unchanged.
    pub fn skeleton(&self) -> Category {
        match self {
            Category::Basic { name, .. } => Category::basic(name.clone()),
            Category::Complex { result, slash, argument } => {
                Category::complex(result.skeleton(), *slash, argument.skeleton())
            }
            other => other.clone(),
        }
    }

    /// Structural equality up to feature-pair order (bundles are stored
    /// sorted, so this is plain equality); variables compare by name and tag.
    pub fn cat_equal(&self, other: &Category) -> bool {
        self == other
    }

    pub fn is_basic(&self) -> bool {
        matches!(self, Category::Basic { .. })
    }

    /// True if a Meta node occurs anywhere in the category.
    pub fn contains_meta(&self) -> bool {
        match self {
            Category::Meta { .. } => true,
            Category::Complex { result, argument, .. } => {
                result.contains_meta() || argument.contains_meta()
            }
            _ => false,
        }
    }

    /// True if the given meta variable occurs in the category.
    pub fn contains_meta_var(&self, name: &str, tag: u64) -> bool {
        match self {
            Category::Meta { name: n, tag: t } => n == name && *t == tag,
            Category::Complex { result, argument, .. } => {
                result.contains_meta_var(name, tag) || argument.contains_meta_var(name, tag)
            }
            _ => false,
        }
    }

    /// True if a Singleton occupies the result position of any complex
    /// subcategory. Such categories are rejected at grammar load: singletons
    /// are domains only.
    pub fn singleton_in_result(&self) -> bool {
        match self {
            Category::Complex { result, argument, .. } => {
                matches!(**result, Category::Singleton(_))
                    || result.singleton_in_result()
                    || argument.singleton_in_result()
            }
            _ => false,
        }
    }

    /// All singleton texts occurring in the category.
    pub fn collect_singletons(&self, out: &mut Vec<String>) {
        match self {
            Category::Singleton(s) => out.push(s.clone()),
            Category::Complex { result, argument, .. } => {
                result.collect_singletons(out);
                argument.collect_singletons(out);
            }
            _ => {}
        }
    }

    fn fmt_child(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if matches!(self, Category::Complex { .. }) {
            write!(f, "({self})")
        } else {
            write!(f, "{self}")
        }
    }
}

impl fmt::Display for Category {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Category::Basic { name, features } => write!(f, "{name}{features}"),
            Category::Complex { result, slash, argument } => {
                result.fmt_child(f)?;
                write!(f, "{slash}")?;
                argument.fmt_child(f)
            }
            Category::Singleton(s) => write!(f, "\"{s}\""),
            Category::Meta { name, .. } => write!(f, "@{name}"),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::parse::parse_category;

    fn cat(s: &str) -> Category {
        parse_category(s).unwrap()
    }

    #[test]
    fn cat_equal_identity_and_feature_order() {
        assert!(cat("np[agr=3s]").cat_equal(&cat("np[agr=3s]")));
        assert!(!cat("s\\np[agr=3s]").cat_equal(&cat("s\\np[agr=1s]")));
        assert!(cat("np[a=v1,b=v2]").cat_equal(&cat("np[b=v2,a=v1]")));
    }

    #[test]
    fn arity_counts_result_spine_slots() {
        assert_eq!(cat("np").arity(), 0);
        assert_eq!(cat("(s\\np)/np").arity(), 2);
        assert_eq!(cat("(n\\n)/(s/np)").arity(), 2);
        assert_eq!(cat("\"the bucket\"").arity(), 0);
        assert_eq!(cat("@x").arity(), 0);
    }

    #[test]
    fn skeleton_strips_features_keeps_modalities() {
        assert_eq!(cat("s\\np[agr=3s]").skeleton().to_string(), "s\\np");
        assert_eq!(cat("np").skeleton().to_string(), "np");
        assert_eq!(
            cat("(s\\np[agr=3s])/^np[case=acc]").skeleton().to_string(),
            "(s\\np)/^np"
        );
    }

    #[test]
    fn skeleton_idempotent() {
        let c = cat("(s[t=pres]\\np[agr=3s])/^np[case=acc]");
        assert_eq!(c.skeleton(), c.skeleton().skeleton());
    }

    #[test]
    fn arity_recurrence() {
        let c = cat("((s\\np)/pp)/np");
        if let Category::Complex { result, .. } = &c {
            assert_eq!(c.arity(), 1 + result.arity());
        } else {
            panic!("expected complex");
        }
    }

    #[test]
    fn singleton_result_position_detected() {
        assert!(!cat("(s\\np)/\"the bucket\"").singleton_in_result());
        let bad = Category::complex(
            Category::Singleton("oops".into()),
            SlashSpec::single(SlashDir::Right, Modality::Dot),
            Category::basic("np"),
        );
        assert!(bad.singleton_in_result());
    }
}
