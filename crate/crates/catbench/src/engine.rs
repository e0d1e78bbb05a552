//! The chart analyzer: CKY over token sequences with application and
//! first-order composition, slash-modality gating, relational-rule
//! injection, normal-form filtering, MWE tokenization and OOV handling.

use std::collections::BTreeSet;
use std::sync::Arc;

use thiserror::Error;

use crate::category::{Category, Modality, SlashDir, SlashOrder, SlashSpec};
use crate::config::Config;
use crate::element::{AsymRule, SourcedGrammar};
use crate::eval::{beta_reduce_with_budget, EvalError};
use crate::lambda::LambdaTerm;
use crate::unify::{rename_category, unify_cat, Substitution};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum EngineError {
    #[error("unbalanced `|` bars in input")]
    UnbalancedMweBars,
    #[error("empty multiword expression")]
    EmptyMwe,
    #[error("no grammar loaded")]
    NoGrammarLoaded,
    #[error("chart exceeded {0} items; raise the heap hint or simplify the input")]
    ChartOverflow(usize),
    #[error(transparent)]
    Eval(#[from] EvalError),
}

/// One surface item: a plain word or a bar-enclosed multiword expression.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Token {
    pub text: String,
    pub mwe: bool,
}

/// Tokenized input. `bound_seams` holds indices `i` where items `i` and
/// `i+1` were written `a+b`: morphological boundedness marks, advisory
/// metadata that does not change licensing.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct Tokens {
    pub items: Vec<Token>,
    pub bound_seams: BTreeSet<usize>,
}

impl Tokens {
    pub fn len(&self) -> usize {
        self.items.len()
    }

    pub fn is_empty(&self) -> bool {
        self.items.is_empty()
    }

    /// Echoes the input with MWE bars and `+` seams restored.
    pub fn render(&self) -> String {
        let mut out = String::new();
        for (i, tok) in self.items.iter().enumerate() {
            if i > 0 {
                out.push_str(if self.bound_seams.contains(&(i - 1)) { "+" } else { " " });
            }
            if tok.mwe {
                out.push('|');
                out.push_str(&tok.text);
                out.push('|');
            } else {
                out.push_str(&tok.text);
            }
        }
        out
    }
}

/// Splits an input line into items. Whitespace separates; `|...|` groups a
/// multiword expression into one item; `a+b` splits into `a`, `b` with a
/// boundedness mark on the seam.
pub fn tokenize(input: &str) -> Result<Tokens, EngineError> {
    let mut tokens = Tokens::default();
    let mut rest = input.trim();
    while !rest.is_empty() {
        if let Some(after) = rest.strip_prefix('|') {
            let close = after.find('|').ok_or(EngineError::UnbalancedMweBars)?;
            let text = after[..close].split_whitespace().collect::<Vec<_>>().join(" ");
            if text.is_empty() {
                return Err(EngineError::EmptyMwe);
            }
            tokens.items.push(Token { text, mwe: true });
            rest = after[close + 1..].trim_start();
        } else {
            let end = rest.find(|c: char| c.is_whitespace() || c == '|').unwrap_or(rest.len());
            let word = &rest[..end];
            push_word(&mut tokens, word);
            rest = rest[end..].trim_start();
        }
    }
    Ok(tokens)
}

fn push_word(tokens: &mut Tokens, word: &str) {
    let pieces: Vec<&str> = word.split('+').collect();
    if pieces.len() > 1 && pieces.iter().all(|p| !p.is_empty()) {
        for (i, p) in pieces.iter().enumerate() {
            if i > 0 {
                tokens.bound_seams.insert(tokens.items.len() - 1);
            }
            tokens.items.push(Token { text: p.to_string(), mwe: false });
        }
    } else {
        tokens.items.push(Token { text: word.to_string(), mwe: false });
    }
}

/// Combinator identifiers. `A`/`T` are forward/backward application,
/// the rest first-order composition (harmonic and crossing).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum RuleId {
    A,
    T,
    Fb,
    Bb,
    Fbx,
    Bbx,
}

impl RuleId {
    pub fn name(self) -> &'static str {
        match self {
            RuleId::A => "A",
            RuleId::T => "T",
            RuleId::Fb => "FB",
            RuleId::Bb => "BB",
            RuleId::Fbx => "FBx",
            RuleId::Bbx => "BBx",
        }
    }

    pub fn is_composition(self) -> bool {
        !matches!(self, RuleId::A | RuleId::T)
    }

    pub fn is_forward_composition(self) -> bool {
        matches!(self, RuleId::Fb | RuleId::Fbx)
    }

    pub fn is_backward_composition(self) -> bool {
        matches!(self, RuleId::Bb | RuleId::Bbx)
    }

    /// Forward rules take their primary functor on the left.
    pub fn is_forward(self) -> bool {
        matches!(self, RuleId::A | RuleId::Fb | RuleId::Fbx)
    }
}

/// How a chart item came to be.
#[derive(Debug, Clone)]
pub enum Provenance {
    /// A lexical leaf injected from a grammar entry.
    Lex { key: u64, phon: String, pos: String },
    /// A leaf carrying a singleton category over its literal span.
    SingletonLeaf { text: String },
    /// An out-of-vocabulary dummy leaf.
    Oov { dir: SlashDir, phon: String },
    /// An asymmetric relational rule applied to `parent`.
    Arule { key: u64, name: String, parent: Arc<ChartItem> },
    /// A binary combination.
    Combine { rule: RuleId, left: Arc<ChartItem>, right: Arc<ChartItem> },
}

#[derive(Debug, Clone)]
pub struct ChartItem {
    pub cat: Category,
    /// Beta-normal predicate-argument structure.
    pub lf: LambdaTerm,
    /// Token span `[start, end)`.
    pub span: (usize, usize),
    pub prov: Provenance,
}

impl ChartItem {
    /// The combinator that produced this item, if it is a combination.
    pub fn rule_id(&self) -> Option<RuleId> {
        match &self.prov {
            Provenance::Combine { rule, .. } => Some(*rule),
            _ => None,
        }
    }

    /// Names of relational rules applied along the contiguous rule chain
    /// ending at this item.
    fn arule_chain(&self) -> Vec<&str> {
        let mut names = Vec::new();
        let mut cur = self;
        while let Provenance::Arule { name, parent, .. } = &cur.prov {
            names.push(name.as_str());
            cur = parent;
        }
        names
    }

    /// A canonical structural key, used for deterministic ordering.
    pub fn structure_key(&self) -> String {
        match &self.prov {
            Provenance::Lex { key, .. } => format!("L{key}"),
            Provenance::SingletonLeaf { text } => format!("S({text})"),
            Provenance::Oov { dir, .. } => {
                format!("O{}", if *dir == SlashDir::Left { "l" } else { "r" })
            }
            Provenance::Arule { key, parent, .. } => {
                format!("R{key}({})", parent.structure_key())
            }
            Provenance::Combine { rule, left, right } => format!(
                "{}({},{})",
                rule.name(),
                left.structure_key(),
                right.structure_key()
            ),
        }
    }
}

/// A complete analysis: the provenance tree of a root item spanning the
/// whole input.
#[derive(Debug, Clone)]
pub struct Derivation {
    pub root: Arc<ChartItem>,
}

impl Derivation {
    pub fn cat(&self) -> &Category {
        &self.root.cat
    }

    pub fn lf(&self) -> &LambdaTerm {
        &self.root.lf
    }

    /// Per-element usage counts: lexical leaf injections and relational
    /// rule firings, by element key.
    pub fn feature_counts(&self) -> std::collections::BTreeMap<u64, u64> {
        let mut counts = std::collections::BTreeMap::new();
        fn walk(item: &ChartItem, counts: &mut std::collections::BTreeMap<u64, u64>) {
            match &item.prov {
                Provenance::Lex { key, .. } => {
                    *counts.entry(*key).or_insert(0) += 1;
                }
                Provenance::SingletonLeaf { .. } | Provenance::Oov { .. } => {}
                Provenance::Arule { key, parent, .. } => {
                    *counts.entry(*key).or_insert(0) += 1;
                    walk(parent, counts);
                }
                Provenance::Combine { left, right, .. } => {
                    walk(left, counts);
                    walk(right, counts);
                }
            }
        }
        walk(&self.root, &mut counts);
        counts
    }
}

/// Eisner-style normal-form admissibility: under normal-form parsing, the
/// primary functor of a forward rule may not itself be the output of
/// forward composition, nor a backward rule's functor the output of
/// backward composition.
pub fn nf_admissible(rule: RuleId, left: &ChartItem, right: &ChartItem, nfparse: bool) -> bool {
    if !nfparse {
        return true;
    }
    let functor = if rule.is_forward() { left } else { right };
    match functor.rule_id() {
        Some(r) if rule.is_forward() && r.is_forward_composition() => false,
        Some(r) if !rule.is_forward() && r.is_backward_composition() => false,
        _ => true,
    }
}

struct Analyzer<'a> {
    grammar: &'a SourcedGrammar,
    config: &'a Config,
    next_tag: u64,
    item_count: usize,
}

impl<'a> Analyzer<'a> {
    fn new(grammar: &'a SourcedGrammar, config: &'a Config) -> Self {
        Analyzer { grammar, config, next_tag: 0, item_count: 0 }
    }

    fn charge(&mut self, n: usize) -> Result<(), EngineError> {
        self.item_count += n;
        if self.item_count > self.config.max_chart_items {
            return Err(EngineError::ChartOverflow(self.config.max_chart_items));
        }
        Ok(())
    }

    fn beta(&self, t: &LambdaTerm) -> Result<LambdaTerm, EngineError> {
        Ok(beta_reduce_with_budget(t, self.config.reduction_budget)?)
    }

    fn rename(&mut self, cat: &Category) -> Category {
        crate::unify::rename_apart(cat, &mut self.next_tag)
    }

    /// Leaves for one token position.
    fn leaves(&mut self, tok: &Token, pos: usize) -> Result<Vec<Arc<ChartItem>>, EngineError> {
        let mut out = Vec::new();
        let mut matched = false;
        for entry in self.grammar.entries() {
            if entry.phon_text() == tok.text {
                matched = true;
                out.push(Arc::new(ChartItem {
                    cat: entry.cat.clone(),
                    lf: self.beta(&entry.lf)?,
                    span: (pos, pos + 1),
                    prov: Provenance::Lex {
                        key: entry.key.expect("sourced entry"),
                        phon: entry.phon_text(),
                        pos: entry.pos.clone(),
                    },
                }));
            }
        }
        for text in self.grammar.singleton_texts() {
            if text == tok.text {
                out.push(Arc::new(ChartItem {
                    cat: Category::Singleton(text.clone()),
                    lf: LambdaTerm::Const { name: text.clone(), quoted: true },
                    span: (pos, pos + 1),
                    prov: Provenance::SingletonLeaf { text },
                }));
            }
        }
        if !matched && self.config.oov {
            let identity = LambdaTerm::abs("p", LambdaTerm::var("p"));
            for dir in [SlashDir::Left, SlashDir::Right] {
                let meta = Category::meta("x");
                let cat = Category::complex(
                    meta.clone(),
                    SlashSpec::single(dir, Modality::Dot),
                    meta,
                );
                out.push(Arc::new(ChartItem {
                    cat,
                    lf: identity.clone(),
                    span: (pos, pos + 1),
                    prov: Provenance::Oov { dir, phon: tok.text.clone() },
                }));
            }
        }
        self.charge(out.len())?;
        Ok(out)
    }

    /// Applies relational rules, in order, to one item. Each named rule
    /// fires at most once along a single provenance chain.
    fn arule_results(
        &mut self,
        item: &Arc<ChartItem>,
        rules: &[&AsymRule],
    ) -> Result<Vec<Arc<ChartItem>>, EngineError> {
        let mut out = Vec::new();
        let used = item.arule_chain();
        for rule in rules {
            if used.contains(&rule.name.as_str()) {
                continue;
            }
            // The rule's variables are shared across its two sides, so both
            // are renamed against one map.
            let mut map = std::collections::BTreeMap::new();
            let lhs = rename_category(&rule.lhs_cat, &mut self.next_tag, &mut map);
            let rhs = rename_category(&rule.rhs_cat, &mut self.next_tag, &mut map);
            let mut subst = Substitution::new();
            if !unify_cat(&lhs, &item.cat, &mut subst) {
                continue;
            }
            let lf = self.beta(&LambdaTerm::app(rule.rhs_lf.clone(), item.lf.clone()))?;
            out.push(Arc::new(ChartItem {
                cat: subst.apply(&rhs),
                lf,
                span: item.span,
                prov: Provenance::Arule {
                    key: rule.key.expect("sourced arule"),
                    name: rule.name.clone(),
                    parent: Arc::clone(item),
                },
            }));
        }
        self.charge(out.len())?;
        Ok(out)
    }

    /// All combinations of two adjacent items licensed by the monad's rule
    /// inventory, the slash modalities, and normal-form admissibility.
    fn combine(
        &mut self,
        left: &Arc<ChartItem>,
        right: &Arc<ChartItem>,
    ) -> Result<Vec<Arc<ChartItem>>, EngineError> {
        let mut out = Vec::new();
        let lcat = self.rename(&left.cat);
        let rcat = self.rename(&right.cat);
        let span = (left.span.0, right.span.1);

        // A (forward application): X/Y  Y  =>  X
        if let Category::Complex { result, slash, argument } = &lcat {
            if slash.dir == SlashDir::Right
                && nf_admissible(RuleId::A, left, right, self.config.nfparse)
            {
                let mut subst = Substitution::new();
                if unify_cat(argument, &rcat, &mut subst) {
                    out.push(Arc::new(ChartItem {
                        cat: subst.apply(result),
                        lf: self.beta(&LambdaTerm::app(left.lf.clone(), right.lf.clone()))?,
                        span,
                        prov: Provenance::Combine {
                            rule: RuleId::A,
                            left: Arc::clone(left),
                            right: Arc::clone(right),
                        },
                    }));
                }
            }
        }

        // T (backward application): Y  X\Y  =>  X
        if let Category::Complex { result, slash, argument } = &rcat {
            if slash.dir == SlashDir::Left
                && nf_admissible(RuleId::T, left, right, self.config.nfparse)
            {
                let mut subst = Substitution::new();
                if unify_cat(argument, &lcat, &mut subst) {
                    out.push(Arc::new(ChartItem {
                        cat: subst.apply(result),
                        lf: self.beta(&LambdaTerm::app(right.lf.clone(), left.lf.clone()))?,
                        span,
                        prov: Provenance::Combine {
                            rule: RuleId::T,
                            left: Arc::clone(left),
                            right: Arc::clone(right),
                        },
                    }));
                }
            }
        }

        if !self.config.montague {
            for rule in [RuleId::Fb, RuleId::Bb, RuleId::Fbx, RuleId::Bbx] {
                if let Some(item) = self.compose(rule, left, right, &lcat, &rcat)? {
                    out.push(item);
                }
            }
        }

        self.charge(out.len())?;
        Ok(out)
    }

    /// One first-order composition rule. Both slashes must be single-order,
    /// both functors' modalities must license the rule, and neither functor
    /// may mention a meta-category. Higher-order composition is never
    /// emitted.
    fn compose(
        &mut self,
        rule: RuleId,
        left: &Arc<ChartItem>,
        right: &Arc<ChartItem>,
        lcat: &Category,
        rcat: &Category,
    ) -> Result<Option<Arc<ChartItem>>, EngineError> {
        if !nf_admissible(rule, left, right, self.config.nfparse) {
            return Ok(None);
        }
        if lcat.contains_meta() || rcat.contains_meta() {
            return Ok(None);
        }
        let (Category::Complex { result: lr, slash: ls, argument: la },
             Category::Complex { result: rr, slash: rs, argument: ra }) = (lcat, rcat)
        else {
            return Ok(None);
        };
        if ls.order != SlashOrder::Single || rs.order != SlashOrder::Single {
            return Ok(None);
        }

        // (primary X, mid pair, secondary Z and its slash, f, g)
        let (dirs_ok, x, y_a, y_b, z, z_slash, f, g) = match rule {
            // X/Y  Y/Z  =>  X/Z
            RuleId::Fb => (
                ls.dir == SlashDir::Right && rs.dir == SlashDir::Right,
                lr, la, rr, ra, *rs, &left.lf, &right.lf,
            ),
            // Y\Z  X\Y  =>  X\Z
            RuleId::Bb => (
                ls.dir == SlashDir::Left && rs.dir == SlashDir::Left,
                rr, ra, lr, la, *ls, &right.lf, &left.lf,
            ),
            // X/Y  Y\Z  =>  X\Z
            RuleId::Fbx => (
                ls.dir == SlashDir::Right && rs.dir == SlashDir::Left,
                lr, la, rr, ra, *rs, &left.lf, &right.lf,
            ),
            // Y/Z  X\Y  =>  X/Z
            RuleId::Bbx => (
                ls.dir == SlashDir::Right && rs.dir == SlashDir::Left,
                rr, ra, lr, la, *ls, &right.lf, &left.lf,
            ),
            _ => unreachable!("applications handled elsewhere"),
        };
        if !dirs_ok {
            return Ok(None);
        }
        let licensed = match rule {
            RuleId::Fb | RuleId::Bb => ls.modality.allows_harmonic() && rs.modality.allows_harmonic(),
            _ => ls.modality.allows_crossing() && rs.modality.allows_crossing(),
        };
        if !licensed {
            return Ok(None);
        }
        let mut subst = Substitution::new();
        if !unify_cat(y_a, y_b, &mut subst) {
            return Ok(None);
        }
        let result_slash = SlashSpec {
            dir: match rule {
                RuleId::Fb | RuleId::Bbx => SlashDir::Right,
                _ => SlashDir::Left,
            },
            order: SlashOrder::Single,
            modality: z_slash.modality,
        };
        let cat = Category::complex(subst.apply(x), result_slash, subst.apply(z));
        // lf = \z.f (g z)
        let lf = LambdaTerm::abs(
            "z",
            LambdaTerm::app(f.clone(), LambdaTerm::app(g.clone(), LambdaTerm::var("z"))),
        );
        Ok(Some(Arc::new(ChartItem {
            cat,
            lf: self.beta(&lf)?,
            span: (left.span.0, right.span.1),
            prov: Provenance::Combine {
                rule,
                left: Arc::clone(left),
                right: Arc::clone(right),
            },
        })))
    }

    fn close_cell(
        &mut self,
        cell: &mut Vec<Arc<ChartItem>>,
        rules: &[&AsymRule],
    ) -> Result<(), EngineError> {
        let mut i = 0;
        while i < cell.len() {
            let item = Arc::clone(&cell[i]);
            let derived = self.arule_results(&item, rules)?;
            cell.extend(derived);
            i += 1;
        }
        Ok(())
    }

    fn run(&mut self, tokens: &Tokens) -> Result<Vec<Derivation>, EngineError> {
        let n = tokens.len();
        if n == 0 {
            return Ok(Vec::new());
        }
        let rules: Vec<&AsymRule> = self.grammar.arules().collect();
        let mut chart: Vec<Vec<Vec<Arc<ChartItem>>>> = vec![vec![Vec::new(); n + 1]; n];

        for (i, tok) in tokens.items.iter().enumerate() {
            let mut cell = self.leaves(tok, i)?;
            self.close_cell(&mut cell, &rules)?;
            chart[i][i + 1] = cell;
        }

        for width in 2..=n {
            for start in 0..=(n - width) {
                let end = start + width;
                let mut cell = Vec::new();
                for mid in (start + 1)..end {
                    let lefts = std::mem::take(&mut chart[start][mid]);
                    let rights = std::mem::take(&mut chart[mid][end]);
                    for l in &lefts {
                        for r in &rights {
                            cell.extend(self.combine(l, r)?);
                        }
                    }
                    chart[start][mid] = lefts;
                    chart[mid][end] = rights;
                }
                self.close_cell(&mut cell, &rules)?;
                chart[start][end] = cell;
            }
        }

        let mut solutions: Vec<Derivation> = chart[0][n]
            .iter()
            .map(|item| Derivation { root: Arc::clone(item) })
            .collect();
        solutions.sort_by_key(|d| (d.cat().to_string(), d.root.structure_key()));
        Ok(solutions)
    }
}

/// Injects lexical leaves for every token: grammar entries whose
/// phonological form matches the item, singleton-category leaves over
/// literal matches, and OOV dummies for unmatched items when enabled.
pub fn lexical_injections(
    tokens: &Tokens,
    grammar: &SourcedGrammar,
    config: &Config,
) -> Result<Vec<Vec<Arc<ChartItem>>>, EngineError> {
    let mut analyzer = Analyzer::new(grammar, config);
    tokens
        .items
        .iter()
        .enumerate()
        .map(|(i, tok)| analyzer.leaves(tok, i))
        .collect()
}

/// Applies the grammar's relational rules, in the order they were written,
/// to one chart item, returning the derived items.
pub fn apply_arules(
    item: &Arc<ChartItem>,
    grammar: &SourcedGrammar,
    config: &Config,
) -> Result<Vec<Arc<ChartItem>>, EngineError> {
    let mut analyzer = Analyzer::new(grammar, config);
    let rules: Vec<&AsymRule> = grammar.arules().collect();
    analyzer.arule_results(item, &rules)
}

/// All licensed combinations of two adjacent items.
pub fn combine(
    left: &Arc<ChartItem>,
    right: &Arc<ChartItem>,
    grammar: &SourcedGrammar,
    config: &Config,
) -> Result<Vec<Arc<ChartItem>>, EngineError> {
    let mut analyzer = Analyzer::new(grammar, config);
    analyzer.combine(left, right)
}

/// Analyzes an input line in the grammar: all derivations of root items
/// spanning the whole input, in deterministic order (category print, then
/// derivation structure).
pub fn analyze(
    input: &str,
    grammar: &SourcedGrammar,
    config: &Config,
) -> Result<Vec<Derivation>, EngineError> {
    let tokens = tokenize(input)?;
    analyze_tokens(&tokens, grammar, config)
}

pub fn analyze_tokens(
    tokens: &Tokens,
    grammar: &SourcedGrammar,
    config: &Config,
) -> Result<Vec<Derivation>, EngineError> {
    Analyzer::new(grammar, config).run(tokens)
}

/// Keeps derivations whose root category is a basic category with one of
/// the given names.
pub fn filter_solutions(derivs: &[Derivation], basic_cats: &[String]) -> Vec<Derivation> {
    derivs
        .iter()
        .filter(|d| match d.cat() {
            Category::Basic { name, .. } => basic_cats.iter().any(|b| b == name),
            _ => false,
        })
        .cloned()
        .collect()
}
