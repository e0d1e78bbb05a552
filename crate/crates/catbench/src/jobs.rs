//! Detached training workers: one process per experiment line, sharing
//! nothing, surviving the launching session. Status files in the workspace
//! record spawned/running/finished/failed per job.

use std::collections::BTreeSet;
use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Stdio};

use thiserror::Error;

use crate::config::Config;
use crate::model::{train, TrainRun};
use crate::source::atomic_write;
use crate::training_data::parse_experiment_line;

pub const JOB_HEADER: &str = "catbench-job 1";

#[derive(Debug, Error)]
pub enum JobError {
    #[error("malformed job file: {0}")]
    Malformed(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum JobStatus {
    Spawned,
    Running,
    Finished,
    Failed(String),
    Unknown(String),
}

impl JobStatus {
    pub fn is_terminal(&self) -> bool {
        matches!(self, JobStatus::Finished | JobStatus::Failed(_))
    }
}

/// A spawned (or failed-to-spawn) experiment job.
#[derive(Debug, Clone)]
pub struct JobHandle {
    pub name: String,
    pub status_path: PathBuf,
    pub log_path: PathBuf,
    pub pid: Option<u32>,
}

impl JobHandle {
    pub fn status(&self) -> JobStatus {
        read_status(&self.status_path)
    }
}

pub fn read_status(path: &Path) -> JobStatus {
    let Ok(text) = fs::read_to_string(path) else {
        return JobStatus::Unknown("no status file".into());
    };
    let text = text.trim();
    if text == "spawned" {
        JobStatus::Spawned
    } else if text.starts_with("running") {
        JobStatus::Running
    } else if text == "finished" {
        JobStatus::Finished
    } else if let Some(reason) = text.strip_prefix("failed") {
        JobStatus::Failed(reason.trim_start_matches(':').trim().to_string())
    } else {
        JobStatus::Unknown(text.to_string())
    }
}

fn write_status(path: &Path, content: &str) {
    let _ = atomic_write(path, &format!("{content}\n"));
}

/// Serializes a run for a worker process.
pub fn job_text(run: &TrainRun) -> String {
    let spec = &run.spec;
    let iters = match spec.iterations {
        crate::training_data::Iterations::Count(n) => n.to_string(),
        crate::training_data::Iterations::Extrapolate => "xp".into(),
    };
    let mut line = format!(
        "{} {} {} {:?} {:?} {}",
        spec.mem_mb, spec.heap_mb, iters, spec.learning_rate, spec.learning_rate_rate,
        spec.log_prefix
    );
    if let Some(f) = &spec.pre_function {
        line.push(' ');
        line.push_str(f);
    }
    format!(
        "{JOB_HEADER}\ngrammar\t{}\nsupervision\t{}\noutdir\t{}\ncandidates\t{}\nspec\t{}\n",
        run.grammar_path.display(),
        run.supervision_path.display(),
        run.out_dir.display(),
        run.candidates,
        line
    )
}

pub fn parse_job(text: &str) -> Result<TrainRun, JobError> {
    let mut lines = text.lines();
    if lines.next().map(str::trim) != Some(JOB_HEADER) {
        return Err(JobError::Malformed("bad header".into()));
    }
    let mut grammar = None;
    let mut supervision = None;
    let mut outdir = None;
    let mut candidates = None;
    let mut spec = None;
    for line in lines {
        if line.trim().is_empty() {
            continue;
        }
        let (k, v) = line
            .split_once('\t')
            .ok_or_else(|| JobError::Malformed(format!("bad line `{line}`")))?;
        match k {
            "grammar" => grammar = Some(PathBuf::from(v)),
            "supervision" => supervision = Some(PathBuf::from(v)),
            "outdir" => outdir = Some(PathBuf::from(v)),
            "candidates" => {
                candidates =
                    Some(v.parse().map_err(|_| JobError::Malformed("bad candidates".into()))?)
            }
            "spec" => spec = Some(parse_experiment_line(v).map_err(JobError::Malformed)?),
            other => return Err(JobError::Malformed(format!("unknown field `{other}`"))),
        }
    }
    Ok(TrainRun {
        spec: spec.ok_or_else(|| JobError::Malformed("missing spec".into()))?,
        grammar_path: grammar.ok_or_else(|| JobError::Malformed("missing grammar".into()))?,
        supervision_path: supervision
            .ok_or_else(|| JobError::Malformed("missing supervision".into()))?,
        candidates: candidates.ok_or_else(|| JobError::Malformed("missing candidates".into()))?,
        out_dir: outdir.ok_or_else(|| JobError::Malformed("missing outdir".into()))?,
    })
}

/// Spawns one detached worker per experiment line. Lines that failed to
/// parse become jobs that fail fast (status file only); spawn failures are
/// recorded the same way and do not stop the siblings.
pub struct Spawner {
    pub worker_exe: PathBuf,
    pub workspace: PathBuf,
}

impl Spawner {
    pub fn current() -> std::io::Result<Spawner> {
        Ok(Spawner {
            worker_exe: std::env::current_exe()?,
            workspace: crate::source::ensure_workspace()?,
        })
    }

    pub fn spawn_experiments(
        &self,
        grammar_path: &Path,
        supervision_path: &Path,
        lines: &[(usize, Result<crate::training_data::ExperimentSpec, String>)],
        candidates: usize,
        out_dir: &Path,
    ) -> Vec<JobHandle> {
        let mut handles = Vec::new();
        let mut taken: BTreeSet<String> = BTreeSet::new();
        for (lineno, parsed) in lines {
            let name = match parsed {
                Ok(spec) => {
                    let base = format!("{}-{}", spec.log_prefix, spec.name_suffix());
                    if taken.contains(&base) {
                        format!("{base}-l{lineno}")
                    } else {
                        base
                    }
                }
                Err(_) => format!("experiment-line-{lineno}"),
            };
            taken.insert(name.clone());
            let status_path = self.workspace.join(format!("{name}.status"));
            let log_path = out_dir.join(format!("{name}.log"));
            match parsed {
                Err(reason) => {
                    write_status(&status_path, &format!("failed: {reason}"));
                    handles.push(JobHandle { name, status_path, log_path, pid: None });
                }
                Ok(spec) => {
                    let run = TrainRun {
                        spec: spec.clone(),
                        grammar_path: absolutize(grammar_path),
                        supervision_path: absolutize(supervision_path),
                        candidates,
                        out_dir: absolutize(out_dir),
                    };
                    let job_path = self.workspace.join(format!("{name}.job"));
                    if let Err(e) = atomic_write(&job_path, &job_text(&run)) {
                        write_status(&status_path, &format!("failed: {e}"));
                        handles.push(JobHandle { name, status_path, log_path, pid: None });
                        continue;
                    }
                    write_status(&status_path, "spawned");
                    match self.spawn_worker(&job_path) {
                        Ok(pid) => {
                            handles.push(JobHandle { name, status_path, log_path, pid: Some(pid) });
                        }
                        Err(e) => {
                            write_status(&status_path, &format!("failed: spawn: {e}"));
                            handles.push(JobHandle { name, status_path, log_path, pid: None });
                        }
                    }
                }
            }
        }
        handles
    }

    fn spawn_worker(&self, job_path: &Path) -> std::io::Result<u32> {
        let mut cmd = Command::new(&self.worker_exe);
        cmd.arg("--train-worker")
            .arg(job_path)
            .stdin(Stdio::null())
            .stdout(Stdio::null())
            .stderr(Stdio::null());
        // A fresh process group detaches the worker from terminal signals,
        // so the launching session can die without taking it along.
        #[cfg(unix)]
        {
            use std::os::unix::process::CommandExt;
            cmd.process_group(0);
        }
        let child = cmd.spawn()?;
        Ok(child.id())
    }
}

fn absolutize(p: &Path) -> PathBuf {
    if p.is_absolute() {
        p.to_path_buf()
    } else {
        std::env::current_dir().map(|d| d.join(p)).unwrap_or_else(|_| p.to_path_buf())
    }
}

/// Worker entry point: runs one job file to completion, maintaining its
/// status file. Called by the binary when given `--train-worker`.
pub fn run_worker(job_path: &Path) -> Result<(), JobError> {
    let text = fs::read_to_string(job_path)?;
    let run = parse_job(&text)?;
    let status_path = job_path.with_extension("status");
    write_status(&status_path, &format!("running {}", std::process::id()));
    match train(&run, &Config::default()) {
        Ok(_) => {
            write_status(&status_path, "finished");
            Ok(())
        }
        Err(e) => {
            write_status(&status_path, &format!("failed: {e}"));
            Err(JobError::Malformed(e.to_string()))
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::training_data::{ExperimentSpec, Iterations};

    #[test]
    fn job_file_roundtrip() {
        let run = TrainRun {
            spec: ExperimentSpec {
                mem_mb: 7000,
                heap_mb: 4000,
                iterations: Iterations::Extrapolate,
                learning_rate: 1.2,
                learning_rate_rate: 1.0,
                log_prefix: "nfp".into(),
                pre_function: Some("nfparse-off".into()),
            },
            grammar_path: "/tmp/g.txt".into(),
            supervision_path: "/tmp/s.txt".into(),
            candidates: 3,
            out_dir: "/tmp/out".into(),
        };
        let text = job_text(&run);
        let back = parse_job(&text).unwrap();
        assert_eq!(run, back);
    }

    #[test]
    fn status_files_parse() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("x.status");
        write_status(&p, "running 42");
        assert_eq!(read_status(&p), JobStatus::Running);
        write_status(&p, "finished");
        assert_eq!(read_status(&p), JobStatus::Finished);
        write_status(&p, "failed: out of cheese");
        assert_eq!(read_status(&p), JobStatus::Failed("out of cheese".into()));
        assert!(matches!(read_status(&dir.path().join("nope")), JobStatus::Unknown(_)));
    }

    #[test]
    fn bad_lines_fail_fast_without_spawning() {
        let dir = tempfile::tempdir().unwrap();
        let spawner = Spawner {
            worker_exe: PathBuf::from("/nonexistent/worker"),
            workspace: dir.path().to_path_buf(),
        };
        let lines = vec![(1usize, Err("unknown pre-function `bogus-fn`".to_string()))];
        let handles = spawner.spawn_experiments(
            Path::new("/tmp/g.txt"),
            Path::new("/tmp/s.txt"),
            &lines,
            3,
            dir.path(),
        );
        assert_eq!(handles.len(), 1);
        assert!(handles[0].pid.is_none());
        assert!(matches!(handles[0].status(), JobStatus::Failed(r) if r.contains("bogus-fn")));
    }

    #[test]
    fn spawn_failure_is_contained() {
        let dir = tempfile::tempdir().unwrap();
        let spawner = Spawner {
            worker_exe: PathBuf::from("/nonexistent/worker"),
            workspace: dir.path().to_path_buf(),
        };
        let spec = crate::training_data::parse_experiment_line("0 0 2 0.5 1.0 a").unwrap();
        let lines = vec![(1usize, Ok(spec.clone())), (2usize, Ok(ExperimentSpec {
            log_prefix: "b".into(),
            ..spec
        }))];
        let handles = spawner.spawn_experiments(
            Path::new("/tmp/g.txt"),
            Path::new("/tmp/s.txt"),
            &lines,
            3,
            dir.path(),
        );
        assert_eq!(handles.len(), 2);
        for h in &handles {
            assert!(matches!(h.status(), JobStatus::Failed(_)));
        }
    }
}
