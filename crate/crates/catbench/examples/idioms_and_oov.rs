//! Singleton idiom arguments (matched by `|...|` multiword tokens) and
//! out-of-vocabulary dummies:
//! `cargo run --example idioms_and_oov`

use std::path::Path;

use catbench::config::Config;
use catbench::engine::analyze;
use catbench::source::source_grammar;

fn show(input: &str, grammar: &catbench::SourcedGrammar, cfg: &Config) {
    match analyze(input, grammar, cfg) {
        Ok(derivs) => {
            println!("{input}: {} solution(s)", derivs.len());
            for d in &derivs {
                println!("  {} : {}", d.cat(), d.lf());
            }
        }
        Err(e) => println!("{input}: {e}"),
    }
}

fn main() {
    let grammars = Path::new(env!("CARGO_MANIFEST_DIR")).join("grammars");

    let text = std::fs::read_to_string(grammars.join("idioms.txt")).unwrap();
    let (g, _) = catbench::parse_grammar_text(&text);
    let g = source_grammar(&g).unwrap();
    let cfg = Config::default();
    println!("--- idiom vs literal ---");
    show("Harry kicked |the bucket|", &g, &cfg);
    show("Harry kicked the bucket", &g, &cfg);

    let text = std::fs::read_to_string(grammars.join("english_toy.txt")).unwrap();
    let (g, _) = catbench::parse_grammar_text(&text);
    let g = source_grammar(&g).unwrap();
    println!("\n--- out-of-vocabulary treatment ---");
    let mut cfg = Config::default();
    show("Sincerity blorp admires John", &g, &cfg);
    cfg.oov = true;
    println!("(oov-on)");
    show("Sincerity blorp admires John", &g, &cfg);
}
