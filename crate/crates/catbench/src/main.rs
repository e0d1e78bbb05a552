use std::path::PathBuf;
use std::process::ExitCode;

use clap::Parser;
use rustyline::error::ReadlineError;
use rustyline::DefaultEditor;

use catbench::session::Session;

/// A workbench for composition-only categorial grammar.
#[derive(Parser)]
#[command(name = "catbench", version)]
struct Args {
    /// Run the commands in this file (one per line), then exit.
    #[arg(long)]
    batch: Option<PathBuf>,

    /// Working directory for editable files (grammars, logs, candidates).
    #[arg(long)]
    work_dir: Option<PathBuf>,

    /// Internal: run one training job file to completion.
    #[arg(long, hide = true)]
    train_worker: Option<PathBuf>,
}

fn banner() {
    let now = chrono::Local::now();
    println!("-------------------------------------------------------------------------");
    println!("Welcome to catbench");
    println!("    A workbench for studying NL structures built by two command relations");
    println!("        catbench version:  {}", env!("CARGO_PKG_VERSION"));
    println!("        grammar source:    {}", catbench::source::SRC_HEADER);
    println!("        supervision form:  {}", catbench::training_data::SUP_HEADER);
    println!("        encoding:          UTF-8");
    println!();
    println!("    Today: {}", now.format("%B %d, %Y, %H:%M:%S"));
    println!("Type x to exit, ? to get some help");
    println!("-------------------------------------------------------------------------");
}

fn main() -> ExitCode {
    let args = Args::parse();

    if let Some(job) = &args.train_worker {
        return match catbench::jobs::run_worker(job) {
            Ok(()) => ExitCode::SUCCESS,
            Err(e) => {
                eprintln!("worker failed: {e}");
                ExitCode::FAILURE
            }
        };
    }

    let workspace = match catbench::source::ensure_workspace() {
        Ok(ws) => ws,
        Err(e) => {
            eprintln!("cannot create the workspace directory: {e}");
            return ExitCode::FAILURE;
        }
    };
    let work_dir = args.work_dir.clone().unwrap_or_else(|| PathBuf::from("."));
    let mut session = Session::stdout(workspace, work_dir);

    if let Some(file) = &args.batch {
        session.execute(&format!("@ {}", file.display()));
        return ExitCode::SUCCESS;
    }

    banner();
    let mut editor = match DefaultEditor::new() {
        Ok(ed) => ed,
        Err(e) => {
            eprintln!("cannot start the line editor: {e}");
            return ExitCode::FAILURE;
        }
    };
    println!("ready");
    loop {
        match editor.readline("> ") {
            Ok(line) => {
                if !line.trim().is_empty() {
                    let _ = editor.add_history_entry(line.trim());
                }
                session.execute(&line);
                if session.done {
                    break;
                }
            }
            Err(ReadlineError::Interrupted) => continue,
            Err(ReadlineError::Eof) => break,
            Err(e) => {
                eprintln!("input error: {e}");
                break;
            }
        }
    }
    ExitCode::SUCCESS
}
