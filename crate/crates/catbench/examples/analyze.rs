//! Load a grammar from text and analyze an expression:
//! `cargo run --example analyze`

use std::path::Path;

use catbench::config::Config;
use catbench::engine::analyze;
use catbench::report::render_solutions;
use catbench::source::source_grammar;

fn main() {
    let path = Path::new(env!("CARGO_MANIFEST_DIR")).join("grammars/english_toy.txt");
    let text = std::fs::read_to_string(path).expect("bundled grammar");
    let (grammar, errors) = catbench::parse_grammar_text(&text);
    for e in &errors {
        eprintln!("{e}");
    }
    let grammar = source_grammar(&grammar).expect("keys assigned");

    let input = "Sincerity admires John";
    let derivs = analyze(input, &grammar, &Config::default()).expect("analysis runs");
    println!("{input}: {} solution(s)\n", derivs.len());
    print!("{}", render_solutions(&derivs, true));
}
