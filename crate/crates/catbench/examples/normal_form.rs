//! Normal-form parsing against spurious ambiguity: a composition chain has
//! many derivations that differ only in step order, one per structure
//! survives the filter:
//! `cargo run --example normal_form`

use std::path::Path;

use catbench::config::Config;
use catbench::engine::analyze;
use catbench::source::source_grammar;

fn main() {
    let path = Path::new(env!("CARGO_MANIFEST_DIR")).join("grammars/chain.txt");
    let text = std::fs::read_to_string(path).expect("bundled grammar");
    let (grammar, _) = catbench::parse_grammar_text(&text);
    let grammar = source_grammar(&grammar).unwrap();

    let input = "w0 w1 w2 w3 w4";
    let mut cfg = Config::default();

    cfg.nfparse = false;
    let off = analyze(input, &grammar, &cfg).unwrap();
    cfg.nfparse = true;
    let on = analyze(input, &grammar, &cfg).unwrap();

    let onto_a = |ds: &[catbench::Derivation]| {
        ds.iter().filter(|d| d.cat().to_string() == "a").count()
    };
    println!("{input}");
    println!("  derivations onto a, normal form off: {}", onto_a(&off));
    println!("  derivations onto a, normal form on:  {}", onto_a(&on));
    let survivor = on.iter().find(|d| d.cat().to_string() == "a").unwrap();
    println!("  shared structure: {}", survivor.lf());
}
