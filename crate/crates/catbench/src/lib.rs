//! A workbench for composition-only categorial grammar.
//!
//! Grammars are plain text: elementary items pair a surface form with a
//! syntactic category and a predicate-argument structure; relational rules
//! add derived categories or link paradigm forms. The analyzer is a CKY
//! chart over application and first-order composition, gated by slash
//! modalities, with Eisner-style normal-form filtering. Grammars source
//! into keyed, weighted element sets that train as log-linear models from
//! form–meaning supervision pairs and rank analyses by probability.
//!
//! Start with the runnable examples (`cargo run --example analyze`) or the
//! interactive session (`cargo run`).

pub mod casegen;
pub mod category;
pub mod config;
pub mod element;
pub mod engine;
pub mod eval;
pub mod extrapolate;
pub mod jobs;
pub mod lambda;
pub mod model;
pub mod parse;
pub mod report;
pub mod session;
pub mod source;
pub mod training_data;
pub mod unify;

pub use casegen::{generate_case_functions, write_arules};
pub use category::{Category, FeatVal, FeatureBundle, Modality, SlashDir, SlashOrder, SlashSpec};
pub use config::Config;
pub use element::{AsymRule, Element, Entry, Grammar, RawElement, SourcedGrammar, SymRule};
pub use engine::{analyze, filter_solutions, tokenize, Derivation, RuleId};
pub use eval::{alpha_equiv, beta_reduce};
pub use lambda::LambdaTerm;
pub use model::{gradient, rank, train, Model, TrainRun};
pub use parse::{parse_category, parse_grammar_text, parse_lambda, LineError};
pub use source::{read_src, regenerate_text, source_grammar, write_src};
pub use training_data::{parse_experiment_file, parse_supervision, ExperimentSpec, SupervisionPair};
pub use unify::{unify, unify_cat, Substitution};
