//! Display of derivations and the grammar reports: categorial skeleton,
//! basic-category/feature inventory, and structural dumps of elements.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use crate::category::{Category, SlashDir, SlashOrder};
use crate::element::{AsymRule, Element, Entry, SourcedGrammar};
use crate::engine::{ChartItem, Derivation, Provenance};
use crate::lambda::LambdaTerm;

/// Renders one derivation as an indented tree: span, category, the lambda
/// term (unless display is off; the root is always shown), and the
/// combinator or rule behind each node.
pub fn render_derivation(d: &Derivation, lambda_display: bool) -> String {
    let mut out = String::new();
    render_item(&d.root, 0, lambda_display, true, &mut out);
    out
}

fn render_item(item: &ChartItem, depth: usize, lambda_display: bool, is_root: bool, out: &mut String) {
    let indent = "  ".repeat(depth);
    let lf = if lambda_display || is_root {
        format!(" : {}", item.lf)
    } else {
        String::new()
    };
    let how = match &item.prov {
        Provenance::Lex { key, phon, pos } => format!("lex {phon} | {pos} <{key}>"),
        Provenance::SingletonLeaf { text } => format!("singleton \"{text}\""),
        Provenance::Oov { dir, phon } => format!(
            "oov {phon} ({})",
            if *dir == SlashDir::Left { "\\" } else { "/" }
        ),
        Provenance::Arule { name, key, .. } => format!("#{name} <{key}>"),
        Provenance::Combine { rule, .. } => rule.name().to_string(),
    };
    let _ = writeln!(
        out,
        "{indent}[{},{}] {}{lf}  ({how})",
        item.span.0, item.span.1, item.cat
    );
    match &item.prov {
        Provenance::Arule { parent, .. } => {
            render_item(parent, depth + 1, lambda_display, false, out)
        }
        Provenance::Combine { left, right, .. } => {
            render_item(left, depth + 1, lambda_display, false, out);
            render_item(right, depth + 1, lambda_display, false, out);
        }
        _ => {}
    }
}

/// Renders a numbered solution list.
pub fn render_solutions(derivs: &[Derivation], lambda_display: bool) -> String {
    if derivs.is_empty() {
        return "no solutions\n".to_string();
    }
    let mut out = String::new();
    for (i, d) in derivs.iter().enumerate() {
        let _ = writeln!(out, "solution {}: {} : {}", i + 1, d.cat(), d.lf());
        out.push_str(&render_derivation(d, lambda_display));
    }
    out
}

/// The categorial skeleton report: distinct full categories grouped under
/// their featureless print, with the elements bearing each.
pub fn skeleton_report(grammar: &SourcedGrammar) -> String {
    // skeleton print -> full category print -> bearers
    let mut groups: BTreeMap<String, BTreeMap<String, Vec<String>>> = BTreeMap::new();
    let mut add = |cat: &Category, bearer: String| {
        groups
            .entry(cat.skeleton().to_string())
            .or_default()
            .entry(cat.to_string())
            .or_default()
            .push(bearer);
    };
    for el in &grammar.elements {
        match el {
            Element::Entry(e) => add(&e.cat, format!("{}/{}", e.phon_text(), e.pos)),
            Element::Asym(r) => {
                add(&r.lhs_cat, format!("#{}", r.name));
                add(&r.rhs_cat, format!("#{}", r.name));
            }
        }
    }
    let distinct: usize = groups.values().map(|g| g.len()).sum();
    let mut out = format!(
        "{} distinct syntactic categories over {} skeletons\n",
        distinct,
        groups.len()
    );
    for (skeleton, full) in &groups {
        let _ = writeln!(out, "{skeleton}");
        for (cat, bearers) in full {
            let _ = writeln!(out, "  {cat}  <-  {}", bearers.join(", "));
        }
    }
    out
}

/// The `!` report: basic categories with their features and attested
/// values, plus singleton and meta inventories.
pub fn inventory_report(grammar: &SourcedGrammar) -> String {
    let mut basics: BTreeMap<String, BTreeMap<String, std::collections::BTreeSet<String>>> =
        BTreeMap::new();
    let mut singletons = std::collections::BTreeSet::new();
    let mut metas = std::collections::BTreeSet::new();

    fn collect(
        cat: &Category,
        basics: &mut BTreeMap<String, BTreeMap<String, std::collections::BTreeSet<String>>>,
        singletons: &mut std::collections::BTreeSet<String>,
        metas: &mut std::collections::BTreeSet<String>,
    ) {
        match cat {
            Category::Basic { name, features } => {
                let entry = basics.entry(name.clone()).or_default();
                for (f, v) in features.pairs() {
                    entry.entry(f.clone()).or_default().insert(v.to_string());
                }
            }
            Category::Complex { result, argument, .. } => {
                collect(result, basics, singletons, metas);
                collect(argument, basics, singletons, metas);
            }
            Category::Singleton(s) => {
                singletons.insert(s.clone());
            }
            Category::Meta { name, .. } => {
                metas.insert(name.clone());
            }
        }
    }

    for el in &grammar.elements {
        match el {
            Element::Entry(e) => collect(&e.cat, &mut basics, &mut singletons, &mut metas),
            Element::Asym(r) => {
                collect(&r.lhs_cat, &mut basics, &mut singletons, &mut metas);
                collect(&r.rhs_cat, &mut basics, &mut singletons, &mut metas);
            }
        }
    }

    let names: Vec<&String> = basics.keys().collect();
    let mut out = format!(
        "basic categories ({}): {}\n",
        names.len(),
        names.iter().map(|s| s.as_str()).collect::<Vec<_>>().join(", ")
    );
    for (name, feats) in &basics {
        if feats.is_empty() {
            let _ = writeln!(out, "  {name}: (no features)");
        } else {
            let rendered: Vec<String> = feats
                .iter()
                .map(|(f, vals)| {
                    format!("{f} = {{{}}}", vals.iter().cloned().collect::<Vec<_>>().join(", "))
                })
                .collect();
            let _ = writeln!(out, "  {name}: {}", rendered.join("; "));
        }
    }
    if !singletons.is_empty() {
        let quoted: Vec<String> = singletons.iter().map(|s| format!("\"{s}\"")).collect();
        let _ = writeln!(out, "singletons: {}", quoted.join(", "));
    }
    if !metas.is_empty() {
        let at: Vec<String> = metas.iter().map(|s| format!("@{s}")).collect();
        let _ = writeln!(out, "meta variables: {}", at.join(", "));
    }
    out
}

fn cat_ir(cat: &Category, out: &mut String) {
    match cat {
        Category::Basic { name, features } => {
            if features.is_empty() {
                let _ = write!(out, "(basic {name})");
            } else {
                let _ = write!(out, "(basic {name}");
                for (f, v) in features.pairs() {
                    let _ = write!(out, " ({f} {v})");
                }
                let _ = write!(out, ")");
            }
        }
        Category::Complex { result, slash, argument } => {
            let dir = if slash.dir == SlashDir::Left { "left" } else { "right" };
            let order = if slash.order == SlashOrder::Double { "double" } else { "single" };
            let _ = write!(out, "(complex ");
            cat_ir(result, out);
            let _ = write!(out, " (slash {dir} {order} {}) ", slash.modality.symbol());
            cat_ir(argument, out);
            let _ = write!(out, ")");
        }
        Category::Singleton(s) => {
            let _ = write!(out, "(singleton \"{s}\")");
        }
        Category::Meta { name, .. } => {
            let _ = write!(out, "(meta {name})");
        }
    }
}

fn lf_ir(t: &LambdaTerm, out: &mut String) {
    match t {
        LambdaTerm::Var(v) => {
            let _ = write!(out, "(var {v})");
        }
        LambdaTerm::Const { name, quoted } => {
            if *quoted {
                let _ = write!(out, "(string-const {name})");
            } else {
                let _ = write!(out, "(const {name})");
            }
        }
        LambdaTerm::Abs { binder, body } => {
            let _ = write!(out, "(abs {binder} ");
            lf_ir(body, out);
            let _ = write!(out, ")");
        }
        LambdaTerm::App { fun, arg } => {
            let _ = write!(out, "(app ");
            lf_ir(fun, out);
            let _ = write!(out, " ");
            lf_ir(arg, out);
            let _ = write!(out, ")");
        }
    }
}

fn entry_ir(e: &Entry) -> String {
    let mut out = String::new();
    let _ = write!(
        out,
        "(entry (key {}) (weight {:?}) (phon \"{}\") (pos {}) (cat ",
        e.key.map(|k| k.to_string()).unwrap_or_else(|| "-".into()),
        e.weight,
        e.phon_text(),
        e.pos
    );
    cat_ir(&e.cat, &mut out);
    let _ = write!(out, ") (lf ");
    lf_ir(&e.lf, &mut out);
    let _ = write!(out, "))");
    out
}

fn arule_ir(r: &AsymRule) -> String {
    let mut out = String::new();
    let _ = write!(
        out,
        "(arule (key {}) (weight {:?}) (name {}) (lhs ",
        r.key.map(|k| k.to_string()).unwrap_or_else(|| "-".into()),
        r.weight,
        r.name
    );
    cat_ir(&r.lhs_cat, &mut out);
    let _ = write!(out, " ");
    lf_ir(&r.lhs_lf, &mut out);
    let _ = write!(out, ") (rhs ");
    cat_ir(&r.rhs_cat, &mut out);
    let _ = write!(out, " ");
    lf_ir(&r.rhs_lf, &mut out);
    let _ = write!(out, "))");
    out
}

/// Structural dump of one sourced element.
pub fn element_ir(el: &Element) -> String {
    match el {
        Element::Entry(e) => entry_ir(e),
        Element::Asym(r) => arule_ir(r),
    }
}

/// Structural dump of a raw (unsourced) element.
pub fn raw_element_ir(el: &crate::element::RawElement) -> String {
    match el {
        crate::element::RawElement::Entry(e) => entry_ir(e),
        crate::element::RawElement::Asym(r) => arule_ir(r),
        crate::element::RawElement::Sym(r) => {
            let left = Entry {
                phon: r.left.phon.clone(),
                pos: r.name.clone(),
                cat: r.left.cat.clone(),
                lf: r.left.lf.clone(),
                key: None,
                weight: 1.0,
            };
            let right = Entry {
                phon: r.right.phon.clone(),
                pos: r.name.clone(),
                cat: r.right.cat.clone(),
                lf: r.right.lf.clone(),
                key: None,
                weight: 1.0,
            };
            format!("(sym (name {}) {} {})", r.name, entry_ir(&left), entry_ir(&right))
        }
    }
}

/// Full grammar dump, one element per line.
pub fn grammar_ir(grammar: &SourcedGrammar) -> String {
    let mut out = String::new();
    for el in &grammar.elements {
        out.push_str(&element_ir(el));
        out.push('\n');
    }
    out
}
