//! Flat `key = value` experiment configuration.
//!
//! One scalar per line, `#` starts a comment. Keys are fixed per command;
//! unknown or repeated keys are rejected with the offending line number.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Command {
    Denoise,
    Tomo,
    Exponent,
    Bench,
    Phantom,
}

impl Command {
    pub fn name(self) -> &'static str {
        match self {
            Command::Denoise => "denoise",
            Command::Tomo => "tomo",
            Command::Exponent => "exponent",
            Command::Bench => "bench",
            Command::Phantom => "phantom",
        }
    }
}

impl FromStr for Command {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        Ok(match s {
            "denoise" => Command::Denoise,
            "tomo" => Command::Tomo,
            "exponent" => Command::Exponent,
            "bench" => Command::Bench,
            "phantom" => Command::Phantom,
            _ => return Err(Error::InvalidArgument(format!("unknown command {s:?}"))),
        })
    }
}

/// One configuration key. `default: None` marks a required key.
#[derive(Clone, Copy, Debug)]
pub struct KeySpec {
    pub key: &'static str,
    pub default: Option<&'static str>,
    pub doc: &'static str,
}

const fn key(key: &'static str, default: &'static str, doc: &'static str) -> KeySpec {
    KeySpec {
        key,
        default: Some(default),
        doc,
    }
}

const COMMON: &[KeySpec] = &[
    KeySpec {
        key: "output_dir",
        default: None,
        doc: "directory receiving all outputs (created if missing)",
    },
    key("seed", "1", "seed of every random draw"),
];

const SOLVER: &[KeySpec] = &[
    key("regularizer", "tvp", "tv | tvp | tgv2 | tikhonov"),
    key("solver.lambda", "0.1", "weight of the tv / tvp / tikhonov term"),
    key("solver.lambda1", "0.1", "tgv2 weight on |grad f - v|"),
    key("solver.lambda2", "0.2", "tgv2 weight on |E v|"),
    key("solver.iterations", "500", "primal-dual iterations"),
    key("solver.theta", "1", "over-relaxation in [0, 1]"),
    key("solver.step_scale", "0.9", "tau = sigma = step_scale / |K|, in (0, 1)"),
    key("solver.opnorm_power_iters", "50", "power iterations for |K|"),
];

const RECIPE: &[KeySpec] = &[
    key("recipe.sigma1", "1.5", "pre-Laplacian Gaussian width in cells"),
    key("recipe.sigma2", "5", "post-rectification Gaussian width in cells"),
    key("recipe.c", "auto", "edge scale c > 0, or auto for 1 / percentile of the rectified Laplacian"),
    key("recipe.percentile", "0.95", "percentile used by recipe.c = auto"),
    key("recipe.delta_snap", "0.05", "exponents in (1, 1 + delta_snap) snap to 1"),
];

const DENOISE: &[KeySpec] = &[
    key("grid.size", "128", "square phantom resolution (ignored with input)"),
    key("input", "", "grayscale PNG/PGM to denoise instead of the square phantom"),
    key("noise.level", "0.1", "noise sd as a fraction of the image range"),
];

const TOMO: &[KeySpec] = &[
    key("grid.size", "128", "reconstruction grid on [-1, 1]^2"),
    key("geometry.angles", "180", "source positions on [0, 2 pi)"),
    key("geometry.detectors", "192", "flat detector cells"),
    key("geometry.source_radius", "auto", "auto = 2 x image circumradius"),
    key("geometry.detector_radius", "auto", "auto = source radius"),
    key("geometry.detector_extent", "auto", "auto = 1.05 x shadow of the image disc"),
    key("noise.primary", "0.15", "primary channel noise, fraction of sinogram range"),
    key("noise.secondary", "0.01", "secondary channel noise, fraction of sinogram range"),
    key("exponent.mode", "bimodal", "bootstrap (primary channel) | bimodal (secondary channel)"),
    key("exponent.fbp_filter", "hann", "FBP filter for the exponent map: ramlak | hann"),
    key("exponent.fbp_cutoff", "0.5", "FBP cutoff for the exponent map, fraction of Nyquist"),
    key("fbp.filter", "hann", "FBP filter of the baseline and the initial iterate"),
    key("fbp.cutoff", "1", "FBP cutoff of the baseline and the initial iterate"),
];

const EXPONENT: &[KeySpec] = &[
    key("grid.size", "128", "phantom resolution (ignored with input)"),
    key("phantom", "square", "square | tomo (ignored with input)"),
    key("input", "", "grayscale PNG/PGM to analyse instead of a phantom"),
    key("noise.level", "0", "noise sd as a fraction of the image range"),
];

const BENCH: &[KeySpec] = &[
    key("bench.points", "1000000", "random (z, p, tau) points"),
    key("bench.newton_iters", "10", "forced Newton iterations for U_tau"),
    key("bench.repeats", "3", "timed runs per row, fastest reported"),
];

const PHANTOM: &[KeySpec] = &[
    key("phantom", "square", "square | tomo"),
    key("grid.size", "128", "resolution"),
];

/// Keys accepted by `command`, in the order they are written back.
pub fn schema(command: Command) -> Vec<KeySpec> {
    let parts: &[&[KeySpec]] = match command {
        Command::Denoise => &[COMMON, DENOISE, RECIPE, SOLVER],
        Command::Tomo => &[COMMON, TOMO, RECIPE, SOLVER],
        Command::Exponent => &[COMMON, EXPONENT, RECIPE],
        Command::Bench => &[COMMON, BENCH],
        Command::Phantom => &[COMMON, PHANTOM],
    };
    parts.iter().flat_map(|p| p.iter().copied()).collect()
}

/// Human-readable key listing for one command.
pub fn schema_doc(command: Command) -> String {
    let mut s = String::new();
    for k in schema(command) {
        let default = k.default.map_or("(required)".to_string(), |d| format!("[{d}]"));
        let _ = writeln!(s, "  {:<28} {:<12} {}", k.key, default, k.doc);
    }
    s
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Source {
    Default,
    File(usize),
    Override,
}

#[derive(Clone, Debug)]
struct Entry {
    spec: KeySpec,
    value: Option<String>,
    source: Source,
}

#[derive(Clone, Debug)]
pub struct ExperimentConfig {
    command: Command,
    path: PathBuf,
    entries: Vec<Entry>,
}

impl ExperimentConfig {
    /// All defaults; no file.
    pub fn defaults(command: Command) -> Self {
        ExperimentConfig {
            command,
            path: PathBuf::from("<defaults>"),
            entries: schema(command)
                .into_iter()
                .map(|spec| Entry {
                    spec,
                    value: spec.default.map(str::to_string),
                    source: Source::Default,
                })
                .collect(),
        }
    }

    pub fn parse(command: Command, text: &str, path: impl Into<PathBuf>) -> Result<Self> {
        let mut cfg = Self::defaults(command);
        cfg.path = path.into();
        for (n, raw) in text.lines().enumerate() {
            let line = n + 1;
            let content = raw.split('#').next().unwrap_or("").trim();
            if content.is_empty() {
                continue;
            }
            let Some((k, v)) = content.split_once('=') else {
                return Err(cfg.error(line, format!("expected `key = value`, got {content:?}")));
            };
            let (k, v) = (k.trim(), v.trim());
            let idx = cfg.index_of(k).ok_or_else(|| cfg.error(line, format!("unknown key {k:?} for {}", command.name())))?;
            if let Source::File(first) = cfg.entries[idx].source {
                return Err(cfg.error(line, format!("key {k:?} repeated (first set on line {first})")));
            }
            cfg.entries[idx].value = Some(v.to_string());
            cfg.entries[idx].source = Source::File(line);
        }
        Ok(cfg)
    }

    pub fn load(command: Command, path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::parse(command, &text, path)
    }

    /// Applies a `key=value` override.
    pub fn set(&mut self, assignment: &str) -> Result<()> {
        let err = |message: String| Error::Config {
            path: PathBuf::from("--set"),
            line: 0,
            message,
        };
        let (k, v) = assignment
            .split_once('=')
            .ok_or_else(|| err(format!("expected key=value, got {assignment:?}")))?;
        let idx = self
            .index_of(k.trim())
            .ok_or_else(|| err(format!("unknown key {:?} for {}", k.trim(), self.command.name())))?;
        self.entries[idx].value = Some(v.trim().to_string());
        self.entries[idx].source = Source::Override;
        Ok(())
    }

    /// Fails if a required key has no value.
    pub fn check_required(&self) -> Result<()> {
        match self.entries.iter().find(|e| e.value.is_none()) {
            None => Ok(()),
            Some(e) => Err(self.error(0, format!("required key {:?} is missing", e.spec.key))),
        }
    }

    pub fn command(&self) -> Command {
        self.command
    }

    fn index_of(&self, key: &str) -> Option<usize> {
        self.entries.iter().position(|e| e.spec.key == key)
    }

    fn error(&self, line: usize, message: String) -> Error {
        Error::Config {
            path: self.path.clone(),
            line,
            message,
        }
    }

    fn entry(&self, key: &str) -> &Entry {
        let idx = self
            .index_of(key)
            .unwrap_or_else(|| panic!("key {key:?} is not in the {} schema", self.command.name()));
        &self.entries[idx]
    }

    /// Error attributed to the place `key` was set.
    pub fn key_error(&self, key: &str, message: impl std::fmt::Display) -> Error {
        let e = self.entry(key);
        match e.source {
            Source::File(line) => self.error(line, format!("{key}: {message}")),
            Source::Default => self.error(0, format!("{key} (default): {message}")),
            Source::Override => Error::Config {
                path: PathBuf::from("--set"),
                line: 0,
                message: format!("{key}: {message}"),
            },
        }
    }

    pub fn raw(&self, key: &str) -> Result<&str> {
        self.entry(key)
            .value
            .as_deref()
            .ok_or_else(|| self.error(0, format!("required key {key:?} is missing")))
    }

    pub fn get<V: FromStr>(&self, key: &str) -> Result<V>
    where
        V::Err: std::fmt::Display,
    {
        let raw = self.raw(key)?;
        raw.parse::<V>().map_err(|e| self.key_error(key, format!("cannot parse {raw:?}: {e}")))
    }

    /// `None` for the literal `auto`.
    pub fn get_auto<V: FromStr>(&self, key: &str) -> Result<Option<V>>
    where
        V::Err: std::fmt::Display,
    {
        if self.raw(key)? == "auto" {
            Ok(None)
        } else {
            self.get(key).map(Some)
        }
    }

    /// Every key with its effective value, in schema order.
    pub fn resolved_text(&self) -> String {
        let mut s = format!("# resolved {} configuration\n", self.command.name());
        for e in &self.entries {
            let _ = writeln!(s, "{} = {}", e.spec.key, e.value.as_deref().unwrap_or(""));
        }
        s
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_comments_and_defaults() {
        let cfg = ExperimentConfig::parse(
            Command::Denoise,
            "# a run\noutput_dir = out\n\nsolver.lambda = 0.25  # tuned\n",
            "a.cfg",
        )
        .unwrap();
        cfg.check_required().unwrap();
        assert_eq!(cfg.get::<f64>("solver.lambda").unwrap(), 0.25);
        assert_eq!(cfg.get::<usize>("grid.size").unwrap(), 128);
        assert!(cfg.resolved_text().contains("\nsolver.lambda = 0.25\n"));
    }

    #[test]
    fn errors_carry_line_numbers() {
        let unknown = ExperimentConfig::parse(Command::Denoise, "output_dir = o\nsolver.lamda = 1\n", "b.cfg");
        match unknown {
            Err(Error::Config { line, message, .. }) => {
                assert_eq!(line, 2);
                assert!(message.contains("solver.lamda"));
            }
            other => panic!("{other:?}"),
        }
        let cfg = ExperimentConfig::parse(Command::Denoise, "output_dir = o\n\nsolver.lambda = x\n", "c.cfg").unwrap();
        match cfg.get::<f64>("solver.lambda") {
            Err(Error::Config { line: 3, .. }) => {}
            other => panic!("{other:?}"),
        }
        assert!(matches!(
            ExperimentConfig::parse(Command::Bench, "seed = 1\nseed = 2\n", "d.cfg"),
            Err(Error::Config { line: 2, .. })
        ));
        assert!(matches!(
            ExperimentConfig::parse(Command::Bench, "just words\n", "e.cfg"),
            Err(Error::Config { line: 1, .. })
        ));
    }

    #[test]
    fn required_keys_and_overrides() {
        let mut cfg = ExperimentConfig::defaults(Command::Phantom);
        assert!(cfg.check_required().is_err());
        cfg.set("output_dir=x").unwrap();
        cfg.set("grid.size = 64").unwrap();
        cfg.check_required().unwrap();
        assert_eq!(cfg.get::<usize>("grid.size").unwrap(), 64);
        assert!(cfg.set("nope=1").is_err());
        assert!(cfg.set("novalue").is_err());
    }

    #[test]
    fn auto_values() {
        let cfg = ExperimentConfig::defaults(Command::Tomo);
        assert_eq!(cfg.get_auto::<f64>("geometry.source_radius").unwrap(), None);
        assert_eq!(cfg.get_auto::<f64>("noise.primary").unwrap(), Some(0.15));
    }

    #[test]
    fn every_command_documents_its_keys() {
        for c in [Command::Denoise, Command::Tomo, Command::Exponent, Command::Bench, Command::Phantom] {
            let doc = schema_doc(c);
            assert!(doc.contains("output_dir"));
            assert_eq!(c.name().parse::<Command>().unwrap(), c);
        }
    }
}
