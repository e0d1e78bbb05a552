//! The interactive session: command dispatch, batch files, logging, and
//! workspace management. The binary wraps this in a line editor; batch
//! mode drives it from command files.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::sync::{Arc, Mutex};

use crate::casegen::{generate_case_functions, write_arules};
use crate::config::{apply_processor_function, Config};
use crate::element::Element;
use crate::engine::{filter_solutions, Derivation};
use crate::jobs::Spawner;
use crate::model::{rank, Model, Ranked};
use crate::parse::{parse_element_line, parse_grammar_text};
use crate::report::{
    grammar_ir, inventory_report, raw_element_ir, render_derivation, render_solutions,
    skeleton_report,
};
use crate::source::{read_src, regenerate_text, source_grammar, write_src};
use crate::training_data::parse_experiment_lines;

const MAX_BATCH_DEPTH: usize = 16;

/// Where a log sink came from: a `>` command or a batch file.
enum SinkKind {
    Command,
    Batch,
}

struct LogSink {
    kind: SinkKind,
    file: fs::File,
    path: PathBuf,
}

struct LoadedGrammar {
    name: String,
    model: Model,
}

struct AnalysisStore {
    input: String,
    derivs: Vec<Derivation>,
}

/// A shareable in-memory console, for driving sessions from tests.
#[derive(Clone, Default)]
pub struct SharedBuf(Arc<Mutex<Vec<u8>>>);

impl SharedBuf {
    pub fn contents(&self) -> String {
        String::from_utf8_lossy(&self.0.lock().unwrap()).into_owned()
    }
}

impl Write for SharedBuf {
    fn write(&mut self, buf: &[u8]) -> std::io::Result<usize> {
        self.0.lock().unwrap().extend_from_slice(buf);
        Ok(buf.len())
    }

    fn flush(&mut self) -> std::io::Result<()> {
        Ok(())
    }
}

pub struct Session {
    grammar: Option<LoadedGrammar>,
    last_analysis: Option<AnalysisStore>,
    last_ranked: Option<Ranked>,
    pub config: Config,
    pub workspace: PathBuf,
    pub work_dir: PathBuf,
    pub history: Vec<String>,
    logs: Vec<LogSink>,
    batch_depth: usize,
    console: Box<dyn Write + Send>,
    /// Set by the `x` command; the driving loop exits.
    pub done: bool,
}

impl Session {
    pub fn new(workspace: PathBuf, work_dir: PathBuf, console: Box<dyn Write + Send>) -> Session {
        Session {
            grammar: None,
            last_analysis: None,
            last_ranked: None,
            config: Config::default(),
            workspace,
            work_dir,
            history: Vec::new(),
            logs: Vec::new(),
            batch_depth: 0,
            console,
            done: false,
        }
    }

    pub fn stdout(workspace: PathBuf, work_dir: PathBuf) -> Session {
        Session::new(workspace, work_dir, Box::new(std::io::stdout()))
    }

    pub fn with_buffer(workspace: PathBuf, work_dir: PathBuf) -> (Session, SharedBuf) {
        let buf = SharedBuf::default();
        let s = Session::new(workspace, work_dir, Box::new(buf.clone()));
        (s, buf)
    }

    /// Writes to the console and every active log sink.
    fn emit(&mut self, text: &str) {
        let _ = self.console.write_all(text.as_bytes());
        let _ = self.console.flush();
        for sink in &mut self.logs {
            let _ = sink.file.write_all(text.as_bytes());
        }
    }

    fn emitln(&mut self, text: &str) {
        self.emit(text);
        self.emit("\n");
    }

    fn resolve(&self, arg: &str) -> PathBuf {
        let p = Path::new(arg);
        if p.is_absolute() {
            p.to_path_buf()
        } else {
            self.work_dir.join(p)
        }
    }

    pub fn grammar_loaded(&self) -> bool {
        self.grammar.is_some()
    }

    /// Executes one command line.
    pub fn execute(&mut self, line: &str) {
        let line = line.trim();
        if line.is_empty() {
            return;
        }
        self.history.push(line.to_string());
        let (cmd, rest) = match line.find(char::is_whitespace) {
            Some(i) => (&line[..i], line[i..].trim_start()),
            None => (line, ""),
        };
        match cmd {
            "a" => self.cmd_analyze(rest),
            "c" => self.cmd_casegen(rest),
            "e" => self.emitln(
                "e is unsupported: there is no host-language evaluator here. \
                 Use o for shell commands or l for processor functions.",
            ),
            "g" => self.cmd_load_grammar(rest),
            "i" => self.cmd_dump_ir(rest),
            "k" => self.cmd_skeleton(),
            "l" => self.cmd_processor_function(rest),
            "o" => self.cmd_shell(rest),
            "r" => self.cmd_rank(rest),
            "t" => self.cmd_train(rest),
            "z" => self.cmd_retext(rest),
            "@" => self.cmd_batch(rest),
            "," => self.cmd_show_analyses(rest),
            "#" => self.cmd_show_ranked(rest),
            "=" => self.cmd_filter(rest),
            "!" => self.cmd_inventory(rest),
            "$" => self.cmd_by_pos(rest),
            "-" => self.cmd_element_ir(rest),
            "+" => self.emitln(
                "+ is unsupported: processor plugins are not loadable here. \
                 The built-in processor functions are available through l.",
            ),
            ">" => self.cmd_log_on(rest),
            "<" => self.cmd_log_off(),
            "/" => self.cmd_clear_workspace(),
            "?" => self.cmd_help(),
            "pass" => self.emitln(line),
            "x" => {
                self.done = true;
                self.emitln("bye");
            }
            other => {
                self.emitln(&format!("unknown command `{other}`; ? lists the commands"))
            }
        }
    }

    fn require_grammar(&mut self) -> Option<&LoadedGrammar> {
        if self.grammar.is_none() {
            self.emitln("error: no grammar loaded (use: g <file>)");
        }
        self.grammar.as_ref()
    }

    fn cmd_load_grammar(&mut self, rest: &str) {
        if rest.is_empty() {
            self.emitln("usage: g <grammar-file>");
            return;
        }
        let path = self.resolve(rest);
        let text = match fs::read_to_string(&path) {
            Ok(t) => t,
            Err(e) => {
                self.emitln(&format!("error: cannot read {}: {e}", path.display()));
                return;
            }
        };
        let (raw, errors) = parse_grammar_text(&text);
        if !errors.is_empty() {
            for e in &errors {
                self.emitln(&format!("  {e}"));
            }
            self.emitln(&format!(
                "error: {} bad line(s); grammar not loaded",
                errors.len()
            ));
            return;
        }
        let sourced = match source_grammar(&raw) {
            Ok(sg) => sg,
            Err(e) => {
                self.emitln(&format!("error: {e}"));
                return;
            }
        };
        let name = path
            .file_stem()
            .map(|s| s.to_string_lossy().into_owned())
            .unwrap_or_else(|| "grammar".into());
        let src_path = self.workspace.join(format!("{name}.src"));
        if let Err(e) = fs::create_dir_all(&self.workspace)
            .map_err(crate::source::SourceError::from)
            .and_then(|_| write_src(&sourced, &src_path))
        {
            self.emitln(&format!("warning: could not write source form: {e}"));
        }
        let n = sourced.elements.len();
        self.grammar = Some(LoadedGrammar { name, model: Model::from_grammar(sourced) });
        self.last_analysis = None;
        self.last_ranked = None;
        self.emitln(&format!(
            "grammar checked and made current: {n} element(s); source form at {}",
            src_path.display()
        ));
    }

    fn cmd_analyze(&mut self, rest: &str) {
        let Some(g) = self.require_grammar() else { return };
        let grammar = g.model.grammar.clone();
        match crate::engine::tokenize(rest) {
            Ok(tokens) => match crate::engine::analyze_tokens(&tokens, &grammar, &self.config) {
                Ok(derivs) => {
                    let input = tokens.render();
                    let n = derivs.len();
                    self.last_analysis = Some(AnalysisStore { input: input.clone(), derivs });
                    self.emitln(&format!("{input}: {n} solution(s); , displays them"));
                }
                Err(e) => self.emitln(&format!("error: {e}")),
            },
            Err(e) => self.emitln(&format!("error: {e}")),
        }
    }

    fn cmd_rank(&mut self, rest: &str) {
        let Some(g) = self.require_grammar() else { return };
        let model = g.model.clone();
        match rank(rest, &model, &self.config) {
            Ok(ranked) => {
                let mut out = format!("ranked: {}\n", ranked.input);
                for (i, s) in ranked.solutions.iter().enumerate() {
                    out.push_str(&format!(
                        "  {}. p={:.4}  {}  ({} derivation(s))\n",
                        i + 1,
                        s.probability,
                        s.lf,
                        s.derivation_count
                    ));
                }
                self.emit(&out);
                self.last_ranked = Some(ranked);
            }
            Err(e) => self.emitln(&format!("error: {e}")),
        }
    }

    fn cmd_casegen(&mut self, rest: &str) {
        let pos_list: Vec<String> = rest.split_whitespace().map(str::to_string).collect();
        let Some(g) = self.grammar.as_ref() else {
            self.emitln("error: no grammar loaded (use: g <file>)");
            return;
        };
        let name = g.name.clone();
        match generate_case_functions(&g.model.grammar, &pos_list) {
            Ok((rules, warnings)) => {
                for w in &warnings {
                    self.emitln(&format!("warning: {w}"));
                }
                let path = match write_arules(&rules, &name, &self.work_dir.clone()) {
                    Ok(p) => p,
                    Err(e) => {
                        self.emitln(&format!("error: {e}"));
                        return;
                    }
                };
                // The current session gains the rules; the grammar text
                // file stays intact. Merging is left to the analyst.
                let g = self.grammar.as_mut().expect("checked above");
                let mut next_key = g.model.grammar.max_key() + 1;
                let mut merged = 0usize;
                for rule in &rules {
                    let exists = g.model.grammar.arules().any(|r| r.name == rule.name);
                    if exists {
                        continue;
                    }
                    let mut keyed = rule.clone();
                    keyed.key = Some(next_key);
                    g.model.theta.insert(next_key, keyed.weight);
                    g.model.grammar.elements.push(Element::Asym(keyed));
                    next_key += 1;
                    merged += 1;
                }
                self.emitln(&format!(
                    "{} case function(s) generated -> {}; {merged} merged into the current session",
                    rules.len(),
                    path.display()
                ));
            }
            Err(e) => self.emitln(&format!("error: {e}")),
        }
    }

    fn cmd_skeleton(&mut self) {
        let Some(g) = self.require_grammar() else { return };
        let report = skeleton_report(&g.model.grammar);
        self.emit(&report);
    }

    fn cmd_inventory(&mut self, rest: &str) {
        let Some(g) = self.require_grammar() else { return };
        let report = inventory_report(&g.model.grammar);
        if rest.is_empty() {
            self.emit(&report);
        } else {
            let path = self.work_dir.join(format!("{rest}.log"));
            match crate::source::atomic_write(&path, &report) {
                Ok(()) => self.emitln(&format!("inventory written to {}", path.display())),
                Err(e) => self.emitln(&format!("error: {e}")),
            }
        }
    }

    fn cmd_dump_ir(&mut self, rest: &str) {
        let Some(g) = self.require_grammar() else { return };
        let name = if rest.is_empty() { g.name.clone() } else { rest.to_string() };
        let ir = grammar_ir(&g.model.grammar);
        let path = self.workspace.join(format!("{name}.ir"));
        match fs::create_dir_all(&self.workspace)
            .map_err(crate::source::SourceError::from)
            .and_then(|_| crate::source::atomic_write(&path, &ir).map_err(Into::into))
        {
            Ok(()) => self.emitln(&format!("intermediate representation at {}", path.display())),
            Err(e) => self.emitln(&format!("error: {e}")),
        }
    }

    fn cmd_element_ir(&mut self, rest: &str) {
        if rest.is_empty() {
            self.emitln("usage: - <element line>");
            return;
        }
        match parse_element_line(rest) {
            Ok(el) => {
                let ir = raw_element_ir(&el);
                self.emitln(&ir);
            }
            Err(e) => self.emitln(&format!("error: {e}")),
        }
    }

    fn cmd_processor_function(&mut self, rest: &str) {
        if rest.is_empty() {
            self.emitln("usage: l <processor-function>");
            return;
        }
        let name = rest.split_whitespace().next().unwrap_or("");
        match apply_processor_function(&mut self.config, name) {
            Ok(msg) => self.emitln(&msg),
            Err(e) => self.emitln(&format!("error: {e}")),
        }
    }

    fn cmd_shell(&mut self, rest: &str) {
        if rest.is_empty() {
            self.emitln("error: o needs a shell command");
            return;
        }
        match std::process::Command::new("sh")
            .arg("-c")
            .arg(rest)
            .current_dir(&self.work_dir)
            .stdin(std::process::Stdio::null())
            .output()
        {
            Ok(out) => {
                self.emit(&String::from_utf8_lossy(&out.stdout));
                self.emit(&String::from_utf8_lossy(&out.stderr));
                if !out.status.success() {
                    self.emitln(&format!("(exit status {})", out.status));
                }
            }
            Err(e) => self.emitln(&format!("error: {e}")),
        }
    }

    fn cmd_show_analyses(&mut self, rest: &str) {
        let Some(store) = &self.last_analysis else {
            self.emitln("error: nothing analyzed yet (use: a <expression>)");
            return;
        };
        let selected: Vec<Derivation> = if rest.is_empty() {
            store.derivs.clone()
        } else {
            let mut picked = Vec::new();
            for tok in rest.split_whitespace() {
                match tok.parse::<usize>() {
                    Ok(n) if n >= 1 && n <= store.derivs.len() => {
                        picked.push(store.derivs[n - 1].clone())
                    }
                    _ => {
                        let total = store.derivs.len();
                        self.emitln(&format!(
                            "error: no solution `{tok}` (1..{total})"
                        ));
                        return;
                    }
                }
            }
            picked
        };
        let header = format!("analyses of: {}\n", store.input);
        let body = render_solutions(&selected, self.config.lambda_display);
        self.emit(&header);
        self.emit(&body);
    }

    fn cmd_show_ranked(&mut self, rest: &str) {
        let Some(ranked) = &self.last_ranked else {
            self.emitln("error: nothing ranked yet (use: r <expression>)");
            return;
        };
        if rest.trim() == "bare" {
            let line = match ranked.solutions.first() {
                Some(top) => format!("[{} : {}]", ranked.input, top.lf),
                None => format!("[{} : ]", ranked.input),
            };
            self.emitln(&line);
            return;
        }
        let mut out = format!("ranked analyses of: {}\n", ranked.input);
        for (i, s) in ranked.solutions.iter().enumerate() {
            out.push_str(&format!(
                "solution {} p={:.4} ({} derivation(s)): {} : {}\n",
                i + 1,
                s.probability,
                s.derivation_count,
                s.best.cat(),
                s.lf
            ));
            out.push_str(&render_derivation(&s.best, self.config.lambda_display));
        }
        self.emit(&out);
    }

    fn cmd_filter(&mut self, rest: &str) {
        let Some(store) = &self.last_analysis else {
            self.emitln("error: nothing analyzed yet (use: a <expression>)");
            return;
        };
        let cats: Vec<String> = rest
            .split_whitespace()
            .map(|s| s.to_ascii_lowercase())
            .collect();
        let kept = filter_solutions(&store.derivs, &cats);
        let header = format!(
            "analyses of {} onto {}: {} solution(s)\n",
            store.input,
            cats.join(", "),
            kept.len()
        );
        let body = render_solutions(&kept, self.config.lambda_display);
        self.emit(&header);
        self.emit(&body);
    }

    fn cmd_by_pos(&mut self, rest: &str) {
        let Some(g) = self.require_grammar() else { return };
        let wanted: Vec<String> = rest
            .split_whitespace()
            .map(|s| s.to_ascii_lowercase())
            .collect();
        if wanted.is_empty() {
            self.emitln("usage: $ <pos> [<pos> ...]");
            return;
        }
        let mut out = String::new();
        for e in g.model.grammar.entries() {
            if wanted.contains(&e.pos) {
                out.push_str(&format!("{e}\n"));
            }
        }
        if out.is_empty() {
            out = "no elements with those parts of speech\n".into();
        }
        self.emit(&out);
    }

    fn cmd_retext(&mut self, rest: &str) {
        if rest.is_empty() {
            self.emitln("usage: z <source-name>");
            return;
        }
        let mut path = self.workspace.join(rest);
        if path.extension().is_none() {
            path.set_extension("src");
        }
        match read_src(&path) {
            Ok(sg) => {
                let stem = path
                    .file_stem()
                    .map(|s| s.to_string_lossy().into_owned())
                    .unwrap_or_else(|| "grammar".into());
                let out_path = self.work_dir.join(format!("{stem}.txt"));
                match crate::source::atomic_write(&out_path, &regenerate_text(&sg)) {
                    Ok(()) => self.emitln(&format!(
                        "editable grammar written to {}",
                        out_path.display()
                    )),
                    Err(e) => self.emitln(&format!("error: {e}")),
                }
            }
            Err(e) => self.emitln(&format!("error: {e}")),
        }
    }

    fn cmd_train(&mut self, rest: &str) {
        let args: Vec<&str> = rest.split_whitespace().collect();
        if args.len() != 3 && args.len() != 4 {
            self.emitln("usage: t <grammar-file> <supervision-file> <experiment-file> [candidates]");
            return;
        }
        let candidates = match args.get(3) {
            Some(n) => match n.parse::<usize>() {
                Ok(c) if c >= 1 => c,
                _ => {
                    self.emitln("error: candidate count must be a positive integer");
                    return;
                }
            },
            None => 3,
        };
        let grammar_path = self.resolve(args[0]);
        let supervision_path = self.resolve(args[1]);
        let experiments_path = self.resolve(args[2]);
        let text = match fs::read_to_string(&experiments_path) {
            Ok(t) => t,
            Err(e) => {
                self.emitln(&format!("error: cannot read {}: {e}", experiments_path.display()));
                return;
            }
        };
        let lines = parse_experiment_lines(&text);
        if lines.is_empty() {
            self.emitln("error: experiment file has no experiments");
            return;
        }
        let spawner = match Spawner::current() {
            Ok(s) => s,
            Err(e) => {
                self.emitln(&format!("error: {e}"));
                return;
            }
        };
        let handles = spawner.spawn_experiments(
            &grammar_path,
            &supervision_path,
            &lines,
            candidates,
            &self.work_dir.clone(),
        );
        let mut out = format!("{} experiment job(s):\n", handles.len());
        for h in &handles {
            let status = match (&h.pid, h.status()) {
                (Some(pid), _) => format!("detached, pid {pid}"),
                (None, s) => format!("{s:?}"),
            };
            out.push_str(&format!("  {}  [{status}]  status file {}\n", h.name, h.status_path.display()));
        }
        out.push_str("jobs run detached and survive this session; watch the status files\n");
        self.emit(&out);
    }

    fn cmd_batch(&mut self, rest: &str) {
        if rest.is_empty() {
            self.emitln("usage: @ <command-file>");
            return;
        }
        if self.batch_depth >= MAX_BATCH_DEPTH {
            self.emitln("error: batch files nested too deep");
            return;
        }
        let path = self.resolve(rest);
        let text = match fs::read_to_string(&path) {
            Ok(t) => t,
            Err(e) => {
                self.emitln(&format!("error: cannot read {}: {e}", path.display()));
                return;
            }
        };
        let stem = path
            .file_stem()
            .map(|s| s.to_string_lossy().into_owned())
            .unwrap_or_else(|| "batch".into());
        let log_path = self.work_dir.join(format!("{stem}.log"));
        let file = match fs::File::create(&log_path) {
            Ok(f) => f,
            Err(e) => {
                self.emitln(&format!("error: cannot open log {}: {e}", log_path.display()));
                return;
            }
        };
        self.logs.push(LogSink { kind: SinkKind::Batch, file, path: log_path.clone() });
        self.batch_depth += 1;
        for line in text.lines() {
            if self.done {
                break;
            }
            let line = line.trim();
            if line.is_empty() {
                continue;
            }
            // The prompt shows doubled in the log.
            self.emitln(&format!(">> {line}"));
            self.execute(line);
        }
        self.batch_depth -= 1;
        if let Some(pos) = self.logs.iter().rposition(|s| matches!(s.kind, SinkKind::Batch)) {
            self.logs.remove(pos);
        }
        self.emitln(&format!("batch {} done; log at {}", path.display(), log_path.display()));
    }

    fn cmd_log_on(&mut self, rest: &str) {
        let mut parts = rest.split_whitespace();
        let Some(name) = parts.next() else {
            self.emitln("usage: > <log-name> [force]");
            return;
        };
        let force = parts.next() == Some("force");
        if self.logs.iter().any(|s| matches!(s.kind, SinkKind::Command)) {
            self.emitln("error: logging is already on; < turns it off first");
            return;
        }
        let path = self.work_dir.join(format!("{name}.log"));
        if path.exists() && !force {
            self.emitln(&format!(
                "error: {} exists; use `> {name} force` to overwrite",
                path.display()
            ));
            return;
        }
        match fs::File::create(&path) {
            Ok(file) => {
                self.logs.push(LogSink { kind: SinkKind::Command, file, path: path.clone() });
                self.emitln(&format!("logging to {}", path.display()));
            }
            Err(e) => self.emitln(&format!("error: {e}")),
        }
    }

    fn cmd_log_off(&mut self) {
        match self.logs.iter().rposition(|s| matches!(s.kind, SinkKind::Command)) {
            Some(pos) => {
                let sink = self.logs.remove(pos);
                self.emitln(&format!("logging to {} turned off", sink.path.display()));
            }
            None => self.emitln("logging was not on"),
        }
    }

    fn cmd_clear_workspace(&mut self) {
        let ws = self.workspace.clone();
        let mut removed = 0usize;
        match fs::read_dir(&ws) {
            Ok(entries) => {
                for entry in entries.flatten() {
                    let p = entry.path();
                    let ok = if p.is_dir() {
                        fs::remove_dir_all(&p).is_ok()
                    } else {
                        fs::remove_file(&p).is_ok()
                    };
                    if ok {
                        removed += 1;
                    }
                }
                self.emitln(&format!(
                    "cleared {removed} item(s) from {}",
                    ws.display()
                ));
            }
            Err(e) => self.emitln(&format!("error: cannot read {}: {e}", ws.display())),
        }
    }

    fn cmd_help(&mut self) {
        let help = "\
commands (letters run the processor; symbols display or set up):
  a <expr>       analyze in the current grammar; MWEs in |...|, e.g. |the bucket|
  c <pos>...     generate case functions from entries with those parts of speech
  e ...          unsupported (no host-language evaluator)
  g <file>       check a grammar text and make its source current
  i [name]       dump the current grammar's intermediate representation to the workspace
  k              report the categorial skeleton of the current grammar
  l <function>   call a processor function (see: l onoff, l show-config)
  o <command>    run a shell command
  r <expr>       rank analyses of the expression in the current grammar
  t <g> <s> <e> [n]  train grammar g on supervision s per experiment file e, n candidates
  z <name>       turn a workspace .src into an editable grammar text here
  @ <file>       run commands from a file (nestable); output forced to <file>.log
  , [n]...       display stored analyses (all, or the numbered ones)
  # [bare]       display ranked analyses; bare prints only [string : likeliest]
  = <cat>...     display analyses onto the given basic categories
  ! [file]       basic categories, features and values (optionally to <file>.log)
  $ <pos>...     show the elements with the given parts of speech
  - <element>    show an element's intermediate representation without adding it
  + ...          unsupported (no processor plugins)
  > <file> [force]  log output to <file>.log; force overwrites
  <              stop logging
  /              clear the workspace directory
  ?              this help
  pass <text>    does nothing but echoes itself (batch-file commentary)
  x              exit
";
        self.emit(help);
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const TOY: &str = r"
Sincerity | n :: np[agr=3s] : sincerity
John | n :: np : john
admires | v :: (s\np[agr=3s])/np : \x\y.(admire x) y
#subj-raise np[agr=?x] : lf --> s/(s\np[agr=?x]) : \lf\p.p lf
";

    fn session_in(dir: &Path) -> (Session, SharedBuf) {
        let ws = dir.join("workspace");
        fs::create_dir_all(&ws).unwrap();
        Session::with_buffer(ws, dir.to_path_buf())
    }

    fn write_toy(dir: &Path) {
        fs::write(dir.join("toy.txt"), TOY).unwrap();
    }

    #[test]
    fn load_analyze_display_cycle() {
        let dir = tempfile::tempdir().unwrap();
        write_toy(dir.path());
        let (mut s, buf) = session_in(dir.path());
        s.execute("g toy.txt");
        assert!(s.grammar_loaded());
        assert!(dir.path().join("workspace/toy.src").exists());
        s.execute("a Sincerity admires John");
        s.execute(",");
        let out = buf.contents();
        assert!(out.contains("solution(s)"), "{out}");
        assert!(out.contains("admire john sincerity"), "{out}");
    }

    #[test]
    fn pass_echoes_itself_without_state_change() {
        let dir = tempfile::tempdir().unwrap();
        let (mut s, buf) = session_in(dir.path());
        s.execute("pass the next command generates case functions");
        assert!(buf
            .contents()
            .contains("pass the next command generates case functions"));
        assert!(!s.grammar_loaded());
        assert!(!s.done);
    }

    #[test]
    fn unknown_command_reports() {
        let dir = tempfile::tempdir().unwrap();
        let (mut s, buf) = session_in(dir.path());
        s.execute("w whatever");
        assert!(buf.contents().contains("unknown command `w`"));
    }

    #[test]
    fn casegen_merges_in_session_only() {
        let dir = tempfile::tempdir().unwrap();
        fs::write(
            dir.path().join("toy.txt"),
            "likes | v :: (s\\np[agr=3s])/np : \\x\\y.(like x) y\nSincerity | n :: np : sincerity\nJohn | n :: np : john\n",
        )
        .unwrap();
        let (mut s, buf) = session_in(dir.path());
        s.execute("g toy.txt");
        s.execute("a Sincerity likes John");
        assert!(buf.contents().contains("1 solution(s)"), "{}", buf.contents());
        s.execute("c v");
        assert!(dir.path().join("toy.sc.arules").exists());
        s.execute("a Sincerity likes John");
        s.execute(",");
        let out = buf.contents();
        assert!(out.contains("like john sincerity"), "{out}");
        // Raised derivations now exist alongside plain application.
        assert!(out.contains("#case-v-"), "{out}");
        // The grammar text file is left intact.
        let text = fs::read_to_string(dir.path().join("toy.txt")).unwrap();
        assert!(!text.contains("case-v"));
    }

    #[test]
    fn rank_and_bare_display() {
        let dir = tempfile::tempdir().unwrap();
        fs::write(
            dir.path().join("amb.txt"),
            "a | n :: np : thing\nsees | v :: (s\\np)/np : \\x\\y.(see1 x) y\nsees | v :: (s\\np)/np : \\x\\y.(see2 x) y <9, 2.0>\nb | n :: np : other\n",
        )
        .unwrap();
        let (mut s, buf) = session_in(dir.path());
        s.execute("g amb.txt");
        s.execute("r a sees b");
        s.execute("# bare");
        let out = buf.contents();
        assert!(out.contains("ranked: a sees b"), "{out}");
        assert!(out.contains("[a sees b : see2 other thing]"), "{out}");
    }

    #[test]
    fn filter_onto_basic_cats() {
        let dir = tempfile::tempdir().unwrap();
        write_toy(dir.path());
        let (mut s, buf) = session_in(dir.path());
        s.execute("g toy.txt");
        s.execute("a Sincerity");
        s.execute("= np");
        let out = buf.contents();
        assert!(out.contains("onto np: 1 solution(s)"), "{out}");
    }

    #[test]
    fn logging_duplicates_output() {
        let dir = tempfile::tempdir().unwrap();
        write_toy(dir.path());
        let (mut s, _) = session_in(dir.path());
        s.execute("g toy.txt");
        s.execute("> run1");
        s.execute("k");
        s.execute("<");
        let log = fs::read_to_string(dir.path().join("run1.log")).unwrap();
        assert!(log.contains("distinct syntactic categories"), "{log}");
        // After `<`, output no longer reaches the file.
        let len_before = fs::metadata(dir.path().join("run1.log")).unwrap().len();
        s.execute("pass not logged");
        let len_after = fs::metadata(dir.path().join("run1.log")).unwrap().len();
        assert_eq!(len_before, len_after);
    }

    #[test]
    fn batch_nesting_depth_is_limited() {
        let dir = tempfile::tempdir().unwrap();
        fs::write(dir.path().join("loop.tbc"), "@ loop.tbc\n").unwrap();
        let (mut s, buf) = session_in(dir.path());
        s.execute("@ loop.tbc");
        assert!(buf.contents().contains("nested too deep"), "{}", buf.contents());
    }

    #[test]
    fn log_force_overwrites() {
        let dir = tempfile::tempdir().unwrap();
        let (mut s, buf) = session_in(dir.path());
        fs::write(dir.path().join("x.log"), "old").unwrap();
        s.execute("> x");
        assert!(buf.contents().contains("exists"), "{}", buf.contents());
        s.execute("> x force");
        s.execute("pass hello");
        s.execute("<");
        let log = fs::read_to_string(dir.path().join("x.log")).unwrap();
        assert!(log.contains("pass hello"));
        assert!(!log.contains("old"));
    }

    #[test]
    fn batch_runs_commands_and_logs_with_doubled_prompt() {
        let dir = tempfile::tempdir().unwrap();
        write_toy(dir.path());
        fs::write(dir.path().join("cmds.tbc"), "g toy.txt\nk\nbogus one\npass done\n").unwrap();
        let (mut s, buf) = session_in(dir.path());
        s.execute("@ cmds.tbc");
        let log = fs::read_to_string(dir.path().join("cmds.log")).unwrap();
        assert!(log.contains(">> g toy.txt"));
        assert!(log.contains("distinct syntactic categories"));
        assert!(log.contains("unknown command `bogus`"));
        assert!(log.contains(">> pass done"), "errors do not stop the batch: {log}");
        assert!(buf.contents().contains("batch"), "{}", buf.contents());
    }

    #[test]
    fn nested_batch_produces_inner_log() {
        let dir = tempfile::tempdir().unwrap();
        fs::write(dir.path().join("outer.tbc"), "pass outer\n@ inner.tbc\n").unwrap();
        fs::write(dir.path().join("inner.tbc"), "pass inner\n").unwrap();
        let (mut s, _) = session_in(dir.path());
        s.execute("@ outer.tbc");
        let outer = fs::read_to_string(dir.path().join("outer.log")).unwrap();
        let inner = fs::read_to_string(dir.path().join("inner.log")).unwrap();
        assert!(outer.contains("pass outer"));
        assert!(outer.contains("pass inner"), "outer log sees nested output: {outer}");
        assert!(inner.contains("pass inner"));
    }

    #[test]
    fn clear_workspace_removes_only_workspace_files() {
        let dir = tempfile::tempdir().unwrap();
        write_toy(dir.path());
        let (mut s, _) = session_in(dir.path());
        s.execute("g toy.txt");
        assert!(dir.path().join("workspace/toy.src").exists());
        s.execute("/");
        assert!(!dir.path().join("workspace/toy.src").exists());
        assert!(dir.path().join("toy.txt").exists(), "working dir untouched");
        assert!(dir.path().join("workspace").exists(), "workspace dir itself kept");
    }

    #[test]
    fn retext_roundtrip_via_z() {
        let dir = tempfile::tempdir().unwrap();
        write_toy(dir.path());
        let (mut s, _) = session_in(dir.path());
        s.execute("g toy.txt");
        fs::remove_file(dir.path().join("toy.txt")).unwrap();
        s.execute("z toy");
        let text = fs::read_to_string(dir.path().join("toy.txt")).unwrap();
        assert!(text.contains("<1, 1.0>"), "{text}");
        let (g, errs) = parse_grammar_text(&text);
        assert!(errs.is_empty());
        assert_eq!(g.elements.len(), 4);
    }

    #[test]
    fn inventory_and_pos_listing() {
        let dir = tempfile::tempdir().unwrap();
        write_toy(dir.path());
        let (mut s, buf) = session_in(dir.path());
        s.execute("g toy.txt");
        s.execute("!");
        s.execute("$ v");
        let out = buf.contents();
        assert!(out.contains("basic categories"), "{out}");
        assert!(out.contains("admires | v"), "{out}");
    }

    #[test]
    fn element_ir_without_adding() {
        let dir = tempfile::tempdir().unwrap();
        write_toy(dir.path());
        let (mut s, buf) = session_in(dir.path());
        s.execute("g toy.txt");
        s.execute("- extra | n :: np : extra");
        let out = buf.contents();
        assert!(out.contains("(entry"), "{out}");
        s.execute("a extra");
        assert!(buf.contents().contains("0 solution(s)"), "element was not added");
    }

    #[test]
    fn help_marks_unsupported_commands() {
        let dir = tempfile::tempdir().unwrap();
        let (mut s, buf) = session_in(dir.path());
        s.execute("?");
        let help = buf.contents();
        for cmd in ["a ", "c ", "e ", "g ", "i ", "k ", "l ", "o ", "r ", "t ", "z ", "@ ", ", ", "# ", "= ", "! ", "$ ", "- ", "+ ", "> ", "< ", "/ ", "? ", "pass ", "x "] {
            assert!(help.contains(&format!("\n  {cmd}")) || help.contains(&format!("  {cmd}")), "missing {cmd} in help");
        }
        assert_eq!(help.matches("unsupported").count(), 2);
        s.execute("e print(1)");
        s.execute("+ plugin.lisp");
        let out = buf.contents();
        assert!(out.contains("e is unsupported"));
        assert!(out.contains("+ is unsupported"));
    }

    #[test]
    fn exit_command_sets_done() {
        let dir = tempfile::tempdir().unwrap();
        let (mut s, _) = session_in(dir.path());
        s.execute("x");
        assert!(s.done);
    }

    #[test]
    fn processor_functions_flow_through_l() {
        let dir = tempfile::tempdir().unwrap();
        let (mut s, buf) = session_in(dir.path());
        s.execute("l nfparse-off");
        assert!(!s.config.nfparse);
        s.execute("l oov-on");
        assert!(s.config.oov);
        s.execute("l beam-value");
        s.execute("l bogus");
        let out = buf.contents();
        assert!(out.contains("beam off exponent 1.0"), "{out}");
        assert!(out.contains("unknown processor function"), "{out}");
    }
}
