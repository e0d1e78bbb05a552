//! Train a deliberately ambiguous control lexicon on three supervision
//! pairs, then rank with the best candidate:
//! `cargo run --example train_and_rank`

use std::path::Path;

use catbench::config::Config;
use catbench::model::{rank, train, Model, TrainRun};
use catbench::source::source_grammar;
use catbench::training_data::{parse_experiment_line, parse_supervision};

fn main() {
    let grammars = Path::new(env!("CARGO_MANIFEST_DIR")).join("grammars");
    let out_dir = std::env::temp_dir().join("catbench-train-example");
    std::fs::create_dir_all(&out_dir).unwrap();

    let run = TrainRun {
        spec: parse_experiment_line("0 0 10 0.5 1.0 demo").unwrap(),
        grammar_path: grammars.join("control.txt"),
        supervision_path: grammars.join("control_pairs.txt"),
        candidates: 2,
        out_dir: out_dir.clone(),
    };
    let outcome = train(&run, &Config::default()).expect("training runs");
    println!("best training accuracy: {:.2}", outcome.best_accuracy);
    println!("log: {}", outcome.log_path.display());
    for p in &outcome.candidate_paths {
        println!("candidate: {}", p.display());
    }

    let text = std::fs::read_to_string(&outcome.candidate_paths[0]).unwrap();
    let (g, _) = catbench::parse_grammar_text(&text);
    let model = Model::from_grammar(source_grammar(&g).unwrap());

    let sup = std::fs::read_to_string(grammars.join("control_pairs.txt")).unwrap();
    let (pairs, _) = parse_supervision(&sup);
    println!("\nranking with the selected candidate:");
    for pair in &pairs {
        let ranked = rank(&pair.surface.render(), &model, &Config::default()).unwrap();
        println!("  {}", ranked.input);
        for (i, s) in ranked.solutions.iter().enumerate() {
            println!("    {}. p={:.4}  {}", i + 1, s.probability, s.lf);
        }
    }
}
