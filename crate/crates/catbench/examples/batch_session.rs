//! Drive a whole work cycle through the command interface: load, analyze,
//! display, report, re-text. The same commands work interactively and in
//! `@` batch files:
//! `cargo run --example batch_session`

use std::path::Path;

use catbench::session::Session;

fn main() {
    let dir = std::env::temp_dir().join("catbench-session-example");
    let ws = dir.join("workspace");
    std::fs::create_dir_all(&ws).unwrap();
    let grammars = Path::new(env!("CARGO_MANIFEST_DIR")).join("grammars");
    std::fs::copy(grammars.join("english_toy.txt"), dir.join("toy.txt")).unwrap();

    let mut session = Session::stdout(ws, dir.clone());
    for command in [
        "pass a small development cycle: edit - g - a - ,",
        "g toy.txt",
        "a Sincerity admires John",
        ",",
        "k",
        "!",
        "$ v",
        "l show-config",
        "z toy",
        "pass the re-text file now sits next to the grammar",
        "o ls",
    ] {
        println!("> {command}");
        session.execute(command);
    }
}
