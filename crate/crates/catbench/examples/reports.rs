//! The grammar reports: categorial skeleton with bearers, and the
//! basic-category/feature/value inventory:
//! `cargo run --example reports`

use std::path::Path;

use catbench::report::{inventory_report, skeleton_report};
use catbench::source::source_grammar;

fn main() {
    let path = Path::new(env!("CARGO_MANIFEST_DIR")).join("grammars/paradigm.txt");
    let text = std::fs::read_to_string(path).expect("bundled grammar");
    let (grammar, errors) = catbench::parse_grammar_text(&text);
    assert!(errors.is_empty(), "{errors:?}");
    let grammar = source_grammar(&grammar).unwrap();

    println!("--- categorial skeleton ---");
    print!("{}", skeleton_report(&grammar));
    println!("\n--- inventory ---");
    print!("{}", inventory_report(&grammar));
    println!("\n--- regenerated text (keys and weights added) ---");
    print!("{}", catbench::regenerate_text(&grammar));
}
