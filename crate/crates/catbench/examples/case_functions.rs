//! Derive case functions from verbal subcategorizations and analyze with
//! them, no hand-written raising rules:
//! `cargo run --example case_functions`


use catbench::casegen::generate_case_functions;
use catbench::config::Config;
use catbench::element::Element;
use catbench::engine::analyze;
use catbench::report::render_solutions;
use catbench::source::source_grammar;

fn main() {
    let text = "\
likes | v :: (s\\^np[agr=3s])/^np : \\x\\y.like x y
Sincerity | n :: np : sincerity
John | n :: np : john
";
    let (grammar, _) = catbench::parse_grammar_text(text);
    let mut grammar = source_grammar(&grammar).unwrap();

    let (rules, warnings) = generate_case_functions(&grammar, &["v".into()]).unwrap();
    for w in &warnings {
        println!("warning: {w}");
    }
    println!("case functions from the `v` entries:");
    for r in &rules {
        println!("  {r}");
    }

    // Merge them into the session grammar (a `.sc.arules` file would
    // normally be written for manual merging; see `write_arules`).
    let mut next_key = grammar.max_key() + 1;
    for rule in &rules {
        let mut keyed = rule.clone();
        keyed.key = Some(next_key);
        next_key += 1;
        grammar.elements.push(Element::Asym(keyed));
    }

    let input = "Sincerity likes John";
    let derivs = analyze(input, &grammar, &Config::default()).unwrap();
    println!("\n{input}: {} solution(s) with case functions merged\n", derivs.len());
    print!("{}", render_solutions(&derivs, true));
}
