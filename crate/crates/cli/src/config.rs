//! Run configuration: TOML file merged with command-line flags.

use std::collections::HashSet;
use std::fs;
use std::path::{Path, PathBuf};

use affect_probe::{ClassifierOptions, SplitSpec, TrainConfig};
use serde::Deserialize;

use crate::args::{Format, ProbeArgs, ProbeKind};
use crate::CliError;

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct FileConfig {
    lexicon: Option<PathBuf>,
    #[serde(default)]
    embeddings: Vec<String>,
    #[serde(default)]
    occurrences: Vec<String>,
    sample: Option<PathBuf>,
    test_sample: Option<PathBuf>,
    #[serde(default)]
    probes: Vec<ProbeKind>,
    k: Option<usize>,
    seed: Option<u64>,
    train_frac: Option<f64>,
    l2: Option<f64>,
    max_iter: Option<usize>,
    grad_tol: Option<f64>,
    out: Option<PathBuf>,
    #[serde(default)]
    formats: Vec<Format>,
    plots: Option<bool>,
    allow_test_overlap: Option<bool>,
    no_center_aggregation: Option<bool>,
    save_models: Option<bool>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Source {
    pub label: String,
    pub path: PathBuf,
}

#[derive(Debug, Clone)]
pub struct RunConfig {
    pub lexicon: PathBuf,
    pub embeddings: Vec<Source>,
    pub occurrences: Vec<Source>,
    pub sample: Option<PathBuf>,
    pub test_sample: Option<PathBuf>,
    pub probes: Vec<ProbeKind>,
    pub k: usize,
    pub split: SplitSpec,
    pub train: TrainConfig,
    pub classifier: ClassifierOptions,
    pub center_aggregation: bool,
    pub out: PathBuf,
    pub formats: Vec<Format>,
    pub plots: bool,
    pub save_models: bool,
}

fn usage(msg: impl Into<String>) -> CliError {
    CliError::Usage(msg.into())
}

fn valid_label(label: &str) -> bool {
    !label.is_empty()
        && label
            .chars()
            .all(|c| c.is_ascii_alphanumeric() || matches!(c, '_' | '-' | '.'))
}

fn parse_source(spec: &str, base: Option<&Path>) -> Result<Source, CliError> {
    let (label, path) = spec
        .split_once('=')
        .ok_or_else(|| usage(format!("expected LABEL=PATH, got `{spec}`")))?;
    if !valid_label(label) {
        return Err(usage(format!(
            "invalid label `{label}`: use letters, digits, `_`, `-` or `.`"
        )));
    }
    Ok(Source {
        label: label.to_string(),
        path: resolve(PathBuf::from(path), base),
    })
}

fn resolve(path: PathBuf, base: Option<&Path>) -> PathBuf {
    match base {
        Some(b) if path.is_relative() => b.join(path),
        _ => path,
    }
}

fn load_file(path: &Path) -> Result<FileConfig, CliError> {
    let text = fs::read_to_string(path).map_err(|e| usage(format!("{}: {e}", path.display())))?;
    toml::from_str(&text).map_err(|e| usage(format!("{}: {e}", path.display())))
}

impl RunConfig {
    /// Merges flags over the optional config file and validates the result.
    /// Paths are checked for existence; nothing is parsed.
    pub fn from_args(args: &ProbeArgs) -> Result<Self, CliError> {
        let (file, base) = match &args.config {
            Some(p) => (load_file(p)?, p.parent().map(Path::to_path_buf)),
            None => (FileConfig::default(), None),
        };
        let base = base.as_deref();

        let lexicon = args
            .lexicon
            .clone()
            .or_else(|| file.lexicon.map(|p| resolve(p, base)))
            .ok_or_else(|| usage("--lexicon is required"))?;

        let embeddings = if args.embeddings.is_empty() {
            file.embeddings.iter().map(|s| parse_source(s, base)).collect::<Result<Vec<_>, _>>()?
        } else {
            args.embeddings.iter().map(|s| parse_source(s, None)).collect::<Result<Vec<_>, _>>()?
        };
        let occurrences = if args.occurrences.is_empty() {
            file.occurrences.iter().map(|s| parse_source(s, base)).collect::<Result<Vec<_>, _>>()?
        } else {
            args.occurrences.iter().map(|s| parse_source(s, None)).collect::<Result<Vec<_>, _>>()?
        };
        if embeddings.is_empty() && occurrences.is_empty() {
            return Err(usage("at least one --embedding or --occurrences source is required"));
        }
        let mut labels = HashSet::new();
        for s in embeddings.iter().chain(&occurrences) {
            if s.label.eq_ignore_ascii_case(affect_probe::numstats::VAD_LABEL) {
                return Err(usage(format!("label `{}` is reserved for the rating space", s.label)));
            }
            if !labels.insert(s.label.as_str()) {
                return Err(usage(format!("duplicate embedding label `{}`", s.label)));
            }
        }

        let sample = args.sample.clone().or_else(|| file.sample.map(|p| resolve(p, base)));
        let test_sample = args
            .test_sample
            .clone()
            .or_else(|| file.test_sample.map(|p| resolve(p, base)));

        let requested = if args.probes.is_empty() { file.probes } else { args.probes.clone() };
        let probes: Vec<ProbeKind> = if requested.is_empty() {
            let mut p = vec![ProbeKind::Pca];
            if sample.is_some() {
                p.push(ProbeKind::Similarity);
            }
            if test_sample.is_some() {
                p.push(ProbeKind::Classifier);
            }
            p
        } else {
            let mut p = Vec::new();
            for kind in [ProbeKind::Pca, ProbeKind::Similarity, ProbeKind::Classifier] {
                if requested.contains(&kind) {
                    p.push(kind);
                }
            }
            p
        };
        if probes.contains(&ProbeKind::Similarity) && sample.is_none() {
            return Err(usage("the similarity probe needs --sample"));
        }
        if probes.contains(&ProbeKind::Classifier) && test_sample.is_none() {
            return Err(usage("the classifier probe needs --test-sample"));
        }

        let k = args.k.or(file.k).unwrap_or(2);
        if k == 0 {
            return Err(usage("--k must be at least 1"));
        }
        let seed = args.seed.or(file.seed).unwrap_or(SplitSpec::default().seed);
        let split = SplitSpec {
            train_fraction: args.train_frac.or(file.train_frac).unwrap_or(SplitSpec::default().train_fraction),
            seed,
            stratified: true,
        };
        split.validate().map_err(|e| usage(e.to_string()))?;
        let defaults = TrainConfig::default();
        let train = TrainConfig {
            l2_lambda: args.l2.or(file.l2).unwrap_or(defaults.l2_lambda),
            max_iter: args.max_iter.or(file.max_iter).unwrap_or(defaults.max_iter),
            grad_tol: args.grad_tol.or(file.grad_tol).unwrap_or(defaults.grad_tol),
            seed,
        };
        train.validate().map_err(|e| usage(e.to_string()))?;

        let out = args
            .out
            .clone()
            .or_else(|| file.out.map(|p| resolve(p, base)))
            .ok_or_else(|| usage("--out is required"))?;
        let formats = if args.formats.is_empty() { file.formats } else { args.formats.clone() };

        let config = RunConfig {
            lexicon,
            embeddings,
            occurrences,
            sample,
            test_sample,
            probes,
            k,
            split,
            train,
            classifier: ClassifierOptions {
                allow_test_overlap: args.allow_test_overlap || file.allow_test_overlap.unwrap_or(false),
                ..ClassifierOptions::default()
            },
            center_aggregation: !(args.no_center_aggregation || file.no_center_aggregation.unwrap_or(false)),
            out,
            formats,
            plots: args.plots || file.plots.unwrap_or(false),
            save_models: args.save_models || file.save_models.unwrap_or(false),
        };
        config.check_paths()?;
        Ok(config)
    }

    fn check_paths(&self) -> Result<(), CliError> {
        let mut paths: Vec<&Path> = vec![&self.lexicon];
        paths.extend(self.embeddings.iter().chain(&self.occurrences).map(|s| s.path.as_path()));
        if self.probes.contains(&ProbeKind::Similarity) {
            paths.extend(self.sample.as_deref());
        }
        if self.probes.contains(&ProbeKind::Classifier) {
            paths.extend(self.test_sample.as_deref());
        }
        for p in paths {
            if !p.is_file() {
                return Err(usage(format!("{}: no such file", p.display())));
            }
        }
        Ok(())
    }

    pub fn wants(&self, format: Format) -> bool {
        format == Format::Csv || self.formats.contains(&format)
    }
}
