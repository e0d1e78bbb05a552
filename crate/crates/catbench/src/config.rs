//! Processor switches shared by the analyzer, the trainer, and the command
//! interface, plus the named processor-function registry.

/// Analysis and training switches. Defaults follow the processor-function
/// table: normal-form parsing on, beam off, OOV treatment off, lambda
/// display on, all monad rules in use.
#[derive(Debug, Clone, PartialEq)]
pub struct Config {
    /// Normal-form parsing: prune compositions that only reorder steps.
    pub nfparse: bool,
    /// Out-of-vocabulary treatment: dummy `@x\@x` and `@x/@x` leaves.
    pub oov: bool,
    /// Use only application in combination.
    pub montague: bool,
    /// Display lambda terms at every step of analysis.
    pub lambda_display: bool,
    /// Focus gradient updates on the keys with largest recent changes.
    pub beam: bool,
    pub beam_exponent: f64,
    /// Chart item ceiling; analyses abort with a diagnostic beyond it.
    pub max_chart_items: usize,
    pub reduction_budget: usize,
    /// Fixed epoch count used when an experiment requests extrapolation.
    pub xp_epochs: usize,
    /// Number of trailing iterates fed to the extrapolator.
    pub xp_window: usize,
}

impl Default for Config {
    fn default() -> Self {
        Config {
            nfparse: true,
            oov: false,
            montague: false,
            lambda_display: true,
            beam: false,
            beam_exponent: 1.0,
            max_chart_items: 500_000,
            reduction_budget: crate::eval::DEFAULT_REDUCTION_BUDGET,
            xp_epochs: 20,
            xp_window: 5,
        }
    }
}

impl Config {
    /// Derives the chart ceiling from an experiment's heap hint, in MB.
    /// Zero keeps the default ceiling; the hint is advisory.
    pub fn with_heap_hint(mut self, heap_mb: u64) -> Self {
        if heap_mb > 0 {
            self.max_chart_items = (heap_mb as usize).saturating_mul(2000);
        }
        self
    }
}

/// Names callable from experiment files and the `l` command.
pub const PROCESSOR_FUNCTIONS: &[&str] = &[
    "beam-on",
    "beam-off",
    "beam-value",
    "lambda-on",
    "lambda-off",
    "monad-all",
    "monad-montague",
    "nfparse-on",
    "nfparse-off",
    "onoff",
    "oov-on",
    "oov-off",
    "show-config",
];

pub fn is_processor_function(name: &str) -> bool {
    PROCESSOR_FUNCTIONS.contains(&name)
}

fn onoff(b: bool) -> &'static str {
    if b {
        "on"
    } else {
        "off"
    }
}

/// Applies a named processor function to the configuration, returning a
/// short report for display.
pub fn apply_processor_function(cfg: &mut Config, name: &str) -> Result<String, String> {
    match name {
        "beam-on" => {
            cfg.beam = true;
            Ok("beam on".into())
        }
        "beam-off" => {
            cfg.beam = false;
            Ok("beam off".into())
        }
        "beam-value" => Ok(format!(
            "beam {} exponent {:?}",
            onoff(cfg.beam),
            cfg.beam_exponent
        )),
        "lambda-on" => {
            cfg.lambda_display = true;
            Ok("lambda display on".into())
        }
        "lambda-off" => {
            cfg.lambda_display = false;
            Ok("lambda display off (final results are always shown)".into())
        }
        "monad-all" => {
            cfg.montague = false;
            Ok("all monad rules in use".into())
        }
        "monad-montague" => {
            cfg.montague = true;
            Ok("application only".into())
        }
        "nfparse-on" => {
            cfg.nfparse = true;
            Ok("normal-form parsing on".into())
        }
        "nfparse-off" => {
            cfg.nfparse = false;
            Ok("normal-form parsing off".into())
        }
        "oov-on" => {
            cfg.oov = true;
            Ok("out-of-vocabulary treatment on".into())
        }
        "oov-off" => {
            cfg.oov = false;
            Ok("out-of-vocabulary treatment off".into())
        }
        "onoff" => Ok(format!(
            "nfparse {}  beam {}  oov {}  lambda {}  monad {}",
            onoff(cfg.nfparse),
            onoff(cfg.beam),
            onoff(cfg.oov),
            onoff(cfg.lambda_display),
            if cfg.montague { "montague" } else { "all" },
        )),
        "show-config" => Ok(format!(
            "nfparse {}\nbeam {} (exponent {:?})\noov {}\nlambda display {}\nmonad {}\nchart ceiling {}\nxp epochs {} window {}",
            onoff(cfg.nfparse),
            onoff(cfg.beam),
            cfg.beam_exponent,
            onoff(cfg.oov),
            onoff(cfg.lambda_display),
            if cfg.montague { "montague" } else { "all" },
            cfg.max_chart_items,
            cfg.xp_epochs,
            cfg.xp_window,
        )),
        other => Err(format!("unknown processor function `{other}`")),
    }
}
