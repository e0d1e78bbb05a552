//! The three synthetic element kinds of a grammar text, and the grammar
//! containers before and after sourcing.

use std::fmt;

use crate::category::Category;
use crate::lambda::LambdaTerm;

/// An elementary item: `phon | pos :: category : lf`, optionally keyed.
#[derive(Debug, Clone, PartialEq)]
pub struct Entry {
    /// Phonological material, one or more items. Case is preserved here.
    pub phon: Vec<String>,
    pub pos: String,
    pub cat: Category,
    pub lf: LambdaTerm,
    pub key: Option<u64>,
    pub weight: f64,
}

impl Entry {
    /// Space-joined phonological form, used for lexical lookup.
    pub fn phon_text(&self) -> String {
        self.phon.join(" ")
    }
}

/// An asymmetric relational rule: the element bearing the category on the
/// left of `-->` at surface form also has the category on the right.
#[derive(Debug, Clone, PartialEq)]
pub struct AsymRule {
    pub name: String,
    pub lhs_cat: Category,
    pub lhs_lf: LambdaTerm,
    pub rhs_cat: Category,
    pub rhs_lf: LambdaTerm,
    pub key: Option<u64>,
    pub weight: f64,
}

/// One side of a symmetric relational rule: surface form plus its category.
#[derive(Debug, Clone, PartialEq)]
pub struct SymSide {
    pub phon: Vec<String>,
    pub cat: Category,
    pub lf: LambdaTerm,
}

/// A symmetric relational rule: either form is eligible for consideration
/// in analysis. Compiled into two entries sharing the rule name as part of
/// speech when the grammar is sourced.
#[derive(Debug, Clone, PartialEq)]
pub struct SymRule {
    pub name: String,
    pub left: SymSide,
    pub right: SymSide,
}

/// A grammar element as written in text.
#[derive(Debug, Clone, PartialEq)]
pub enum RawElement {
    Entry(Entry),
    Asym(AsymRule),
    Sym(SymRule),
}

/// A parsed textual grammar, elements in file order.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Grammar {
    pub elements: Vec<RawElement>,
}

impl Grammar {
    pub fn entries(&self) -> impl Iterator<Item = &Entry> {
        self.elements.iter().filter_map(|e| match e {
            RawElement::Entry(en) => Some(en),
            _ => None,
        })
    }

    /// Asymmetric rules in the order they were specified.
    pub fn arules(&self) -> impl Iterator<Item = &AsymRule> {
        self.elements.iter().filter_map(|e| match e {
            RawElement::Asym(r) => Some(r),
            _ => None,
        })
    }

    pub fn is_empty(&self) -> bool {
        self.elements.is_empty()
    }
}

/// A sourced grammar element: symmetric rules are gone, every element is
/// keyed and weighted.
#[derive(Debug, Clone, PartialEq)]
pub enum Element {
    Entry(Entry),
    Asym(AsymRule),
}

impl Element {
    pub fn key(&self) -> u64 {
        match self {
            Element::Entry(e) => e.key.expect("sourced entry is keyed"),
            Element::Asym(r) => r.key.expect("sourced arule is keyed"),
        }
    }

    pub fn weight(&self) -> f64 {
        match self {
            Element::Entry(e) => e.weight,
            Element::Asym(r) => r.weight,
        }
    }

    pub fn set_weight(&mut self, w: f64) {
        match self {
            Element::Entry(e) => e.weight = w,
            Element::Asym(r) => r.weight = w,
        }
    }
}

/// A grammar in source form: every entry and asymmetric rule carries a
/// unique key and a weight, in file order.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct SourcedGrammar {
    pub elements: Vec<Element>,
}

impl SourcedGrammar {
    pub fn entries(&self) -> impl Iterator<Item = &Entry> {
        self.elements.iter().filter_map(|e| match e {
            Element::Entry(en) => Some(en),
            _ => None,
        })
    }

    pub fn arules(&self) -> impl Iterator<Item = &AsymRule> {
        self.elements.iter().filter_map(|e| match e {
            Element::Asym(r) => Some(r),
            _ => None,
        })
    }

    pub fn max_key(&self) -> u64 {
        self.elements.iter().map(|e| e.key()).max().unwrap_or(0)
    }

    pub fn is_empty(&self) -> bool {
        self.elements.is_empty()
    }

    /// All singleton texts mentioned by any category in the grammar.
    pub fn singleton_texts(&self) -> Vec<String> {
        let mut out = Vec::new();
        for el in &self.elements {
            match el {
                Element::Entry(e) => e.cat.collect_singletons(&mut out),
                Element::Asym(r) => {
                    r.lhs_cat.collect_singletons(&mut out);
                    r.rhs_cat.collect_singletons(&mut out);
                }
            }
        }
        out.sort();
        out.dedup();
        out
    }
}

fn fmt_key_weight(f: &mut fmt::Formatter<'_>, key: Option<u64>, weight: f64) -> fmt::Result {
    if let Some(k) = key {
        write!(f, " <{k}, {weight:?}>")?;
    }
    Ok(())
}

impl fmt::Display for Entry {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} | {} :: {} : {}", self.phon.join(" "), self.pos, self.cat, self.lf)?;
        fmt_key_weight(f, self.key, self.weight)
    }
}

impl fmt::Display for AsymRule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "#{} {} : {} --> {} : {}",
            self.name, self.lhs_cat, self.lhs_lf, self.rhs_cat, self.rhs_lf
        )?;
        fmt_key_weight(f, self.key, self.weight)
    }
}

impl fmt::Display for SymRule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "#{} {}, {} : {} <--> {}, {} : {}",
            self.name,
            self.left.phon.join(" "),
            self.left.cat,
            self.left.lf,
            self.right.phon.join(" "),
            self.right.cat,
            self.right.lf
        )
    }
}

impl fmt::Display for RawElement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            RawElement::Entry(e) => write!(f, "{e}"),
            RawElement::Asym(r) => write!(f, "{r}"),
            RawElement::Sym(r) => write!(f, "{r}"),
        }
    }
}

impl fmt::Display for Element {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Element::Entry(e) => write!(f, "{e}"),
            Element::Asym(r) => write!(f, "{r}"),
        }
    }
}
