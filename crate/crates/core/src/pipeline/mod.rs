//! End-to-end stages with resumable, content-addressed artifacts.
//!
//! Every stage writes into `<workdir>/<stage>/<key>/`, where the key hashes
//! the stage's own settings together with its upstream keys and input file
//! hashes. Runs that share a prefix of settings (a dimension sweep, or DWE
//! and CEDWE over the same contexts) therefore share the expensive stages.

mod artifact;
mod pairs_file;
mod report;

use std::collections::BTreeMap;
use std::fs;
use std::io::{BufReader, BufWriter};
use std::path::{Path, PathBuf};
use std::str::FromStr;
use std::sync::OnceLock;
use std::time::Instant;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::context::{linear_sentence_pairs, sentence_pairs, ContextConfig, HopWeight, SentencePairs};
use crate::cooccur::{class_counts, CooccurrenceBuilder, CooccurrenceMatrix};
use crate::corpus::{
    assemble_documents, build_vocab, parse_conllu, read_labels, LabeledDocument, Labels, ParsedSentence,
    Stopwords, TokenCounts, Vocabulary,
};
use crate::embedding::EmbeddingMatrix;
use crate::error::{Error, Result};
use crate::eval::{accuracy, doc_embedding, train_logreg, FeatureSet, LogRegModel, LogRegParams};
use crate::ppmi::{class_extend, class_probabilities, ppmi, PpmiMatrix};
use crate::svd::{truncated_svd, SvdParams};

pub use artifact::{derive_key, hash_bytes, hash_file, verify, FileHash, Manifest, WorkdirLock};
pub use report::{compare_report, read_metrics, write_metrics, Ablation, Comparison, MethodSummary, RunMetrics};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Method {
    /// PPMI over linear-window contexts.
    PpmiLc,
    Dwe,
    Cedwe,
}

impl Method {
    pub fn name(self) -> &'static str {
        match self {
            Method::PpmiLc => "ppmi_lc",
            Method::Dwe => "dwe",
            Method::Cedwe => "cedwe",
        }
    }
}

impl FromStr for Method {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "ppmi_lc" => Ok(Method::PpmiLc),
            "dwe" => Ok(Method::Dwe),
            "cedwe" => Ok(Method::Cedwe),
            _ => Err(Error::config(format!("unknown method `{s}` (ppmi_lc, dwe, cedwe)"))),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Stage {
    Vocab,
    Pairs,
    Cooc,
    Ppmi,
    Extend,
    Svd,
    Train,
    Eval,
    Report,
}

impl Stage {
    pub const ALL: [Stage; 9] = [
        Stage::Vocab,
        Stage::Pairs,
        Stage::Cooc,
        Stage::Ppmi,
        Stage::Extend,
        Stage::Svd,
        Stage::Train,
        Stage::Eval,
        Stage::Report,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Stage::Vocab => "vocab",
            Stage::Pairs => "pairs",
            Stage::Cooc => "cooc",
            Stage::Ppmi => "ppmi",
            Stage::Extend => "extend",
            Stage::Svd => "svd",
            Stage::Train => "train",
            Stage::Eval => "eval",
            Stage::Report => "report",
        }
    }

    /// Stages that run once per seed.
    pub fn is_seeded(self) -> bool {
        matches!(self, Stage::Svd | Stage::Train | Stage::Eval)
    }
}

impl FromStr for Stage {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        Stage::ALL
            .into_iter()
            .find(|st| st.name() == s)
            .ok_or_else(|| Error::config(format!("unknown stage `{s}`")))
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Paths {
    pub train_corpus: PathBuf,
    pub train_labels: PathBuf,
    pub test_corpus: PathBuf,
    pub test_labels: PathBuf,
    /// One word per line; the bundled English list when absent.
    #[serde(default)]
    pub stopwords: Option<PathBuf>,
    pub workdir: PathBuf,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct VocabParams {
    pub max_size: usize,
    pub min_count: u64,
}

impl Default for VocabParams {
    /// Keeps words seen more than ten times.
    fn default() -> Self {
        VocabParams {
            max_size: 50_000,
            min_count: 11,
        }
    }
}

fn default_dim() -> usize {
    300
}
fn default_window() -> usize {
    10
}
fn default_seeds() -> Vec<u64> {
    vec![0]
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub method: Method,
    #[serde(default = "default_dim")]
    pub dim: usize,
    /// Linear window, used by `ppmi_lc` only.
    #[serde(default = "default_window")]
    pub window: usize,
    #[serde(default = "default_seeds")]
    pub seeds: Vec<u64>,
    pub paths: Paths,
    #[serde(default)]
    pub vocab: VocabParams,
    /// Dependency contexts, used by `dwe` and `cedwe`.
    #[serde(default)]
    pub contexts: ContextConfig,
    #[serde(default)]
    pub svd: SvdParams,
    #[serde(default)]
    pub logreg: LogRegParams,
}

impl RunConfig {
    pub fn new(method: Method, paths: Paths) -> Self {
        RunConfig {
            method,
            dim: default_dim(),
            window: default_window(),
            seeds: default_seeds(),
            paths,
            vocab: VocabParams::default(),
            contexts: ContextConfig::default(),
            svd: SvdParams::default(),
            logreg: LogRegParams::default(),
        }
    }

    pub fn from_toml(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| Error::config(e.to_string()))
    }

    /// Reads a config file; relative paths resolve against its directory.
    pub fn load(path: &Path) -> Result<Self> {
        let mut cfg = Self::from_toml(&fs::read_to_string(path)?)?;
        let base = path.parent().unwrap_or(Path::new("."));
        let p = &mut cfg.paths;
        for f in [
            &mut p.train_corpus,
            &mut p.train_labels,
            &mut p.test_corpus,
            &mut p.test_labels,
            &mut p.workdir,
        ] {
            if f.is_relative() {
                *f = base.join(&*f);
            }
        }
        if let Some(s) = p.stopwords.as_mut().filter(|s| s.is_relative()) {
            *s = base.join(&*s);
        }
        Ok(cfg)
    }

    pub fn to_toml(&self) -> Result<String> {
        toml::to_string(self).map_err(|e| Error::config(e.to_string()))
    }

    pub fn validate(&self) -> Result<()> {
        if self.dim == 0 {
            return Err(Error::config("dim must be at least 1"));
        }
        if self.seeds.is_empty() {
            return Err(Error::config("seeds is empty"));
        }
        if self.vocab.max_size == 0 {
            return Err(Error::config("vocab.max_size must be at least 1"));
        }
        match self.method {
            Method::PpmiLc if self.window == 0 => Err(Error::config("window must be at least 1 for ppmi_lc")),
            Method::PpmiLc => Ok(()),
            Method::Dwe | Method::Cedwe => self.contexts.validate(),
        }
    }

    /// Short label of the context configuration, e.g. `3-hop+K`.
    pub fn contexts_label(&self) -> String {
        if self.method == Method::PpmiLc {
            return format!("window-{}", self.window);
        }
        let c = &self.contexts;
        let mut s = format!("{}-hop", c.n_hops);
        if c.use_keywords {
            s.push_str("+K");
            if c.keyword_weight != 1.0 {
                s.push_str(&format!("({})", c.keyword_weight));
            }
        }
        if c.hop_weight == HopWeight::Constant {
            s.push_str("/const");
        }
        s
    }

    fn contexts_fingerprint(&self) -> Result<String> {
        match self.method {
            Method::PpmiLc => Ok(format!("window={}", self.window)),
            _ => toml::to_string(&self.contexts).map_err(|e| Error::config(e.to_string())),
        }
    }
}

struct InputHashes {
    train_corpus: String,
    train_labels: String,
    test_corpus: String,
    test_labels: String,
    stopwords: String,
}

/// Artifact keys of one configuration and seed.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct StageKeys {
    pub vocab: String,
    pub pairs: String,
    pub cooc: String,
    pub ppmi: String,
    pub extend: Option<String>,
    pub svd: String,
    pub train: String,
    pub eval: String,
}

impl StageKeys {
    pub fn get(&self, stage: Stage) -> Option<&str> {
        Some(match stage {
            Stage::Vocab => &self.vocab,
            Stage::Pairs => &self.pairs,
            Stage::Cooc => &self.cooc,
            Stage::Ppmi => &self.ppmi,
            Stage::Extend => return self.extend.as_deref(),
            Stage::Svd => &self.svd,
            Stage::Train => &self.train,
            Stage::Eval => &self.eval,
            Stage::Report => "all",
        })
    }
}

pub struct Pipeline {
    cfg: RunConfig,
    inputs: InputHashes,
    train: OnceLock<Vec<ParsedSentence>>,
    test: OnceLock<Vec<ParsedSentence>>,
}

const VOCAB_FILE: &str = "vocab.tsv";
const PAIRS_FILE: &str = "pairs.bin";
const COOC_FILE: &str = "cooc.bin";
const PPMI_FILE: &str = "ppmi.bin";
const EXTENDED_FILE: &str = "extended.bin";
const WORD_CLASS_FILE: &str = "word_class.tsv";
const EMBEDDINGS_FILE: &str = "embeddings.txt";
const SIGMA_FILE: &str = "sigma.txt";
const MODEL_FILE: &str = "model.txt";
const METRICS_TSV: &str = "metrics.tsv";
const METRICS_TXT: &str = "metrics.txt";
const REPORT_TXT: &str = "report.txt";

fn read_corpus(path: &Path) -> Result<Vec<ParsedSentence>> {
    let f = fs::File::open(path)?;
    let (sentences, report) = parse_conllu(BufReader::new(f))?;
    if report.invalid_total() > 0 {
        log::warn!(
            "{}: dropped {} of {} sentences with invalid trees: {:?}",
            path.display(),
            report.invalid_total(),
            report.sentences_read,
            report.invalid
        );
    }
    Ok(sentences)
}

fn read_labels_file(path: &Path) -> Result<Labels> {
    read_labels(BufReader::new(fs::File::open(path)?))
}

fn manifest(stage: Stage, key: &str, config_hash: String, inputs: Vec<FileHash>) -> Manifest {
    Manifest {
        stage: stage.name().to_string(),
        key: key.to_string(),
        config_hash,
        wall_time_secs: 0.0,
        rows: 0,
        cols: 0,
        nnz: 0,
        inputs,
        outputs: Vec::new(),
        extra: BTreeMap::new(),
    }
}

fn features(docs: &[LabeledDocument], e: &EmbeddingMatrix, vocab: &Vocabulary) -> FeatureSet {
    let rows: Vec<_> = docs
        .par_iter()
        .map(|d| {
            let tokens: Vec<&str> = d.tokens().map(|t| t.surface.as_str()).collect();
            doc_embedding(&tokens, e, vocab)
        })
        .collect();
    let mut m = nalgebra::DMatrix::zeros(docs.len(), e.dim());
    for (i, r) in rows.iter().enumerate() {
        m.set_row(i, &r.transpose());
    }
    FeatureSet {
        doc_ids: docs.iter().map(|d| d.doc_id.clone()).collect(),
        features: m,
        labels: docs.iter().map(|d| d.class_id).collect(),
    }
}

impl Pipeline {
    pub fn new(cfg: RunConfig) -> Result<Self> {
        cfg.validate()?;
        let p = &cfg.paths;
        let inputs = InputHashes {
            train_corpus: hash_file(&p.train_corpus)?,
            train_labels: hash_file(&p.train_labels)?,
            test_corpus: hash_file(&p.test_corpus)?,
            test_labels: hash_file(&p.test_labels)?,
            stopwords: match &p.stopwords {
                Some(s) => hash_file(s)?,
                None => "english".to_string(),
            },
        };
        Ok(Pipeline {
            cfg,
            inputs,
            train: OnceLock::new(),
            test: OnceLock::new(),
        })
    }

    pub fn config(&self) -> &RunConfig {
        &self.cfg
    }

    pub fn workdir(&self) -> &Path {
        &self.cfg.paths.workdir
    }

    pub fn keys(&self, seed: u64) -> Result<StageKeys> {
        let c = &self.cfg;
        let h = &self.inputs;
        let vocab_cfg = hash_bytes(format!("{:?}|{}", c.vocab, h.stopwords).as_bytes());
        let vocab = derive_key(&["vocab", &vocab_cfg, &h.train_corpus]);
        let pairs = derive_key(&["pairs", &hash_bytes(c.contexts_fingerprint()?.as_bytes()), &vocab]);
        let cooc = derive_key(&["cooc", &pairs]);
        let ppmi = derive_key(&["ppmi", &cooc]);
        let extend = (c.method == Method::Cedwe).then(|| derive_key(&["extend", &ppmi, &h.train_labels]));
        let svd_cfg = hash_bytes(format!("{}|{:?}|{}", c.dim, c.svd, seed).as_bytes());
        let svd = derive_key(&["svd", &svd_cfg, extend.as_deref().unwrap_or(&ppmi), &vocab]);
        let lr_cfg = hash_bytes(format!("{:?}|{}", c.logreg, seed).as_bytes());
        let train = derive_key(&["train", &lr_cfg, &svd, &h.train_labels]);
        let eval = derive_key(&["eval", &train, &h.test_corpus, &h.test_labels]);
        Ok(StageKeys {
            vocab,
            pairs,
            cooc,
            ppmi,
            extend,
            svd,
            train,
            eval,
        })
    }

    /// Stages of this configuration in execution order.
    pub fn stages(&self) -> Vec<Stage> {
        Stage::ALL
            .into_iter()
            .filter(|&s| s != Stage::Extend || self.cfg.method == Method::Cedwe)
            .collect()
    }

    fn dir(&self, stage: Stage, key: &str) -> PathBuf {
        artifact::stage_dir(self.workdir(), stage.name(), key)
    }

    fn upstream(&self, stage: Stage, keys: &StageKeys) -> Result<(Manifest, PathBuf)> {
        let key = keys
            .get(stage)
            .ok_or_else(|| Error::config(format!("stage `{}` does not apply to {}", stage.name(), self.cfg.method.name())))?;
        let m = verify(self.workdir(), stage.name(), key)?;
        Ok((m, self.dir(stage, key)))
    }

    fn train_sentences(&self) -> Result<&[ParsedSentence]> {
        if self.train.get().is_none() {
            let s = read_corpus(&self.cfg.paths.train_corpus)?;
            let _ = self.train.set(s);
        }
        Ok(self.train.get().unwrap())
    }

    fn test_sentences(&self) -> Result<&[ParsedSentence]> {
        if self.test.get().is_none() {
            let s = read_corpus(&self.cfg.paths.test_corpus)?;
            let _ = self.test.set(s);
        }
        Ok(self.test.get().unwrap())
    }

    fn load_vocab(&self, keys: &StageKeys) -> Result<Vocabulary> {
        let (_, dir) = self.upstream(Stage::Vocab, keys)?;
        Vocabulary::read_tsv(BufReader::new(fs::File::open(dir.join(VOCAB_FILE))?))
    }

    fn load_embeddings(&self, keys: &StageKeys) -> Result<EmbeddingMatrix> {
        let (_, dir) = self.upstream(Stage::Svd, keys)?;
        EmbeddingMatrix::load_text(&dir.join(EMBEDDINGS_FILE))
    }

    fn input(path: &Path, sha256: &str) -> FileHash {
        FileHash {
            path: path.display().to_string(),
            sha256: sha256.to_string(),
        }
    }

    /// Runs one stage under the workdir lock. Seeded stages use `seed`.
    pub fn run_stage(&self, stage: Stage, seed: u64) -> Result<Manifest> {
        let _lock = WorkdirLock::acquire(self.workdir())?;
        self.run_stage_locked(stage, seed)
    }

    fn run_stage_locked(&self, stage: Stage, seed: u64) -> Result<Manifest> {
        let keys = self.keys(seed)?;
        let key = keys
            .get(stage)
            .ok_or_else(|| Error::config(format!("stage `{}` does not apply to {}", stage.name(), self.cfg.method.name())))?
            .to_string();
        let start = Instant::now();
        let mut w = artifact::StageWriter::create(self.workdir(), stage.name(), &key)?;
        let h = &self.inputs;
        let p = &self.cfg.paths;
        let m = match stage {
            Stage::Vocab => {
                let stop = match &p.stopwords {
                    Some(s) => Stopwords::from_path(s)?,
                    None => Stopwords::english(),
                };
                let mut counts = TokenCounts::default();
                for s in self.train_sentences()? {
                    for t in &s.tokens {
                        counts.add(&t.surface, 1);
                    }
                }
                let vocab = build_vocab(&counts, self.cfg.vocab.max_size, self.cfg.vocab.min_count, &stop)?;
                let mut buf = Vec::new();
                vocab.write_tsv(&mut buf)?;
                w.write(VOCAB_FILE, &buf)?;
                let mut m = manifest(
                    stage,
                    &key,
                    hash_bytes(format!("{:?}", self.cfg.vocab).as_bytes()),
                    vec![Self::input(&p.train_corpus, &h.train_corpus)],
                );
                m.rows = vocab.len() as u64;
                m
            }
            Stage::Pairs => {
                let vocab = self.load_vocab(&keys)?;
                let sentences = self.train_sentences()?;
                let per_sentence: Vec<SentencePairs> = match self.cfg.method {
                    Method::PpmiLc => sentences
                        .par_iter()
                        .map(|s| {
                            let toks: Vec<&str> = s.tokens.iter().map(|t| t.surface.as_str()).collect();
                            linear_sentence_pairs(&toks, self.cfg.window, &vocab)
                        })
                        .collect(),
                    _ => sentences
                        .par_iter()
                        .map(|s| sentence_pairs(s, &vocab, &self.cfg.contexts))
                        .collect(),
                };
                let samples: u64 = per_sentence.iter().map(|s| s.samples).sum();
                let n_pairs: usize = per_sentence.iter().map(|s| s.pairs.len()).sum();
                let out = w.output(PAIRS_FILE);
                pairs_file::write(
                    BufWriter::new(fs::File::create(out)?),
                    vocab.len(),
                    samples,
                    per_sentence.iter().flat_map(|s| s.pairs.iter().copied()),
                    n_pairs,
                )?;
                let mut m = manifest(
                    stage,
                    &key,
                    hash_bytes(self.cfg.contexts_fingerprint()?.as_bytes()),
                    vec![Self::input(&p.train_corpus, &h.train_corpus)],
                );
                m.rows = n_pairs as u64;
                m.extra.insert("pair_count".into(), samples.to_string());
                m.extra.insert("contexts".into(), self.cfg.contexts_label());
                m
            }
            Stage::Cooc => {
                let (pm, dir) = self.upstream(Stage::Pairs, &keys)?;
                let (dim, samples, pairs) = pairs_file::read(BufReader::new(fs::File::open(dir.join(PAIRS_FILE))?), &dir)?;
                let mut b = CooccurrenceBuilder::new(dim);
                b.extend(pairs)?;
                b.add_samples(samples);
                let x = b.finish();
                x.save(&w.output(COOC_FILE))?;
                let mut m = manifest(stage, &key, String::new(), pm.outputs.clone());
                m.rows = x.dim() as u64;
                m.cols = x.dim() as u64;
                m.nnz = x.nnz() as u64;
                m
            }
            Stage::Ppmi => {
                let (cm, dir) = self.upstream(Stage::Cooc, &keys)?;
                let x = CooccurrenceMatrix::load(&dir.join(COOC_FILE))?;
                let y = ppmi(&x)?;
                y.save(&w.output(PPMI_FILE))?;
                let mut m = manifest(stage, &key, String::new(), cm.outputs.clone());
                m.rows = y.nrows() as u64;
                m.cols = y.ncols() as u64;
                m.nnz = y.nnz() as u64;
                m
            }
            Stage::Extend => {
                let (pm, dir) = self.upstream(Stage::Ppmi, &keys)?;
                let vocab = self.load_vocab(&keys)?;
                let y = PpmiMatrix::load(&dir.join(PPMI_FILE))?;
                let labels = read_labels_file(&p.train_labels)?;
                let docs = assemble_documents(self.train_sentences()?.to_vec(), &labels)?;
                let wc = class_counts(&docs, &vocab, labels.n_classes())?;
                let ext = class_extend(&y, &class_probabilities(&wc))?;
                ext.save(&w.output(EXTENDED_FILE))?;
                let mut buf = Vec::new();
                wc.write_tsv(&mut buf, &vocab)?;
                w.write(WORD_CLASS_FILE, &buf)?;
                let mut inputs = pm.outputs.clone();
                inputs.push(Self::input(&p.train_labels, &h.train_labels));
                let mut m = manifest(stage, &key, String::new(), inputs);
                m.rows = ext.nrows() as u64;
                m.cols = ext.ncols() as u64;
                m.nnz = ext.nnz() as u64;
                m
            }
            Stage::Svd => {
                let (src_stage, file) = match self.cfg.method {
                    Method::Cedwe => (Stage::Extend, EXTENDED_FILE),
                    _ => (Stage::Ppmi, PPMI_FILE),
                };
                let (um, dir) = self.upstream(src_stage, &keys)?;
                let vocab = self.load_vocab(&keys)?;
                let x = PpmiMatrix::load(&dir.join(file))?;
                let r = truncated_svd(x.matrix(), self.cfg.dim, seed, self.cfg.svd)?;
                let e = EmbeddingMatrix::from_svd(&vocab, &r)?;
                e.save_text(&w.output(EMBEDDINGS_FILE))?;
                let sigma: String = r.sigma.iter().map(|s| format!("{s}\n")).collect();
                w.write(SIGMA_FILE, sigma.as_bytes())?;
                let mut m = manifest(
                    stage,
                    &key,
                    hash_bytes(format!("{}|{:?}|{seed}", self.cfg.dim, self.cfg.svd).as_bytes()),
                    um.outputs.clone(),
                );
                m.rows = e.len() as u64;
                m.cols = e.dim() as u64;
                m.extra.insert("seed".into(), seed.to_string());
                m
            }
            Stage::Train => {
                let vocab = self.load_vocab(&keys)?;
                let e = self.load_embeddings(&keys)?;
                let labels = read_labels_file(&p.train_labels)?;
                let docs = assemble_documents(self.train_sentences()?.to_vec(), &labels)?;
                let set = features(&docs, &e, &vocab);
                let model = train_logreg(&set.features, &set.labels, self.cfg.logreg, seed)?;
                if !model.converged {
                    log::warn!(
                        "logistic regression stopped after {} iterations, gradient norm {:.3e}",
                        model.iterations,
                        model.grad_norm
                    );
                }
                let mut buf = Vec::new();
                model.write_text(&mut buf)?;
                w.write(MODEL_FILE, &buf)?;
                let mut m = manifest(
                    stage,
                    &key,
                    hash_bytes(format!("{:?}|{seed}", self.cfg.logreg).as_bytes()),
                    vec![Self::input(&p.train_labels, &h.train_labels)],
                );
                m.rows = set.len() as u64;
                m.cols = e.dim() as u64;
                m.extra.insert("iterations".into(), model.iterations.to_string());
                m.extra.insert("objective".into(), model.objective.to_string());
                m.extra.insert("converged".into(), model.converged.to_string());
                m
            }
            Stage::Eval => {
                let vocab = self.load_vocab(&keys)?;
                let e = self.load_embeddings(&keys)?;
                let (_, train_dir) = self.upstream(Stage::Train, &keys)?;
                let model = LogRegModel::read_text(BufReader::new(fs::File::open(train_dir.join(MODEL_FILE))?))?;
                let labels = read_labels_file(&p.test_labels)?;
                let docs = assemble_documents(self.test_sentences()?.to_vec(), &labels)?;
                let set = features(&docs, &e, &vocab);
                let acc = accuracy(&model, &set.features, &set.labels)?;
                let mut wall = start.elapsed().as_secs_f64();
                let mut pair_count = 0;
                for s in self.stages() {
                    if s >= Stage::Eval {
                        break;
                    }
                    let (um, _) = self.upstream(s, &keys)?;
                    wall += um.wall_time_secs;
                    if s == Stage::Pairs {
                        pair_count = um.extra_u64("pair_count").unwrap_or(0);
                    }
                }
                let metrics = RunMetrics {
                    method: self.cfg.method.name().to_string(),
                    contexts: self.cfg.contexts_label(),
                    dimension: self.cfg.dim,
                    seed,
                    accuracy: acc,
                    pair_count,
                    wall_time: wall,
                };
                let mut buf = Vec::new();
                write_metrics(&mut buf, std::slice::from_ref(&metrics))?;
                w.write(METRICS_TSV, &buf)?;
                w.write(METRICS_TXT, metrics.key_values().as_bytes())?;
                let mut m = manifest(
                    stage,
                    &key,
                    String::new(),
                    vec![
                        Self::input(&p.test_corpus, &h.test_corpus),
                        Self::input(&p.test_labels, &h.test_labels),
                    ],
                );
                m.rows = set.len() as u64;
                m.extra.insert("accuracy".into(), acc.to_string());
                m
            }
            Stage::Report => {
                let runs = self.all_metrics()?;
                if runs.is_empty() {
                    return Err(Error::StaleArtifact {
                        stage: "eval".into(),
                        reason: "no evaluated runs in the workdir".into(),
                    });
                }
                let cmp = compare_report(&runs);
                w.write(REPORT_TXT, cmp.to_string().as_bytes())?;
                let mut buf = Vec::new();
                write_metrics(&mut buf, &runs)?;
                w.write(METRICS_TSV, &buf)?;
                let mut m = manifest(stage, &key, String::new(), Vec::new());
                m.rows = runs.len() as u64;
                m
            }
        };
        let m = w.commit(m, start.elapsed())?;
        log::info!("{} done in {:.2}s ({})", stage.name(), m.wall_time_secs, key);
        Ok(m)
    }

    /// All evaluated runs in the workdir, ordered by artifact key.
    pub fn all_metrics(&self) -> Result<Vec<RunMetrics>> {
        let eval_root = self.workdir().join(Stage::Eval.name());
        let mut keys: Vec<String> = match fs::read_dir(&eval_root) {
            Ok(rd) => rd
                .filter_map(|e| e.ok())
                .map(|e| e.file_name().to_string_lossy().into_owned())
                .filter(|k| !k.starts_with('.'))
                .collect(),
            Err(_) => Vec::new(),
        };
        keys.sort();
        let mut runs = Vec::new();
        for k in keys {
            verify(self.workdir(), Stage::Eval.name(), &k)?;
            let f = fs::File::open(eval_root.join(&k).join(METRICS_TSV))?;
            runs.extend(read_metrics(BufReader::new(f))?);
        }
        Ok(runs)
    }

    /// Metrics of this configuration at `seed`, once evaluated.
    pub fn metrics(&self, seed: u64) -> Result<RunMetrics> {
        let keys = self.keys(seed)?;
        let (_, dir) = self.upstream(Stage::Eval, &keys)?;
        let rows = read_metrics(BufReader::new(fs::File::open(dir.join(METRICS_TSV))?))?;
        rows.into_iter()
            .next()
            .ok_or_else(|| Error::Empty("metrics file".into()))
    }

    pub fn embeddings(&self, seed: u64) -> Result<(EmbeddingMatrix, Vocabulary)> {
        let keys = self.keys(seed)?;
        Ok((self.load_embeddings(&keys)?, self.load_vocab(&keys)?))
    }

    pub fn artifact_path(&self, stage: Stage, seed: u64) -> Result<PathBuf> {
        let keys = self.keys(seed)?;
        let key = keys
            .get(stage)
            .ok_or_else(|| Error::config(format!("stage `{}` does not apply", stage.name())))?;
        Ok(self.dir(stage, key))
    }

    /// Word-class counts of the training split under this vocabulary.
    pub fn word_class_counts(&self, seed: u64) -> Result<crate::cooccur::WordClassMatrix> {
        let keys = self.keys(seed)?;
        let vocab = self.load_vocab(&keys)?;
        let labels = read_labels_file(&self.cfg.paths.train_labels)?;
        let docs = assemble_documents(self.train_sentences()?.to_vec(), &labels)?;
        class_counts(&docs, &vocab, labels.n_classes())
    }

    /// Document features of the training and test splits.
    pub fn feature_sets(&self, seed: u64) -> Result<(FeatureSet, FeatureSet)> {
        let keys = self.keys(seed)?;
        let vocab = self.load_vocab(&keys)?;
        let e = self.load_embeddings(&keys)?;
        let p = &self.cfg.paths;
        let train = assemble_documents(self.train_sentences()?.to_vec(), &read_labels_file(&p.train_labels)?)?;
        let test = assemble_documents(self.test_sentences()?.to_vec(), &read_labels_file(&p.test_labels)?)?;
        Ok((features(&train, &e, &vocab), features(&test, &e, &vocab)))
    }

    /// Runs every stage for every seed, then the report. Stages whose
    /// artifacts verify are reused unless `force` is set.
    pub fn run_all(&self, force: bool) -> Result<Comparison> {
        let _lock = WorkdirLock::acquire(self.workdir())?;
        let mut done = std::collections::HashSet::new();
        for &seed in &self.cfg.seeds {
            let keys = self.keys(seed)?;
            for stage in self.stages() {
                let key = keys.get(stage).unwrap();
                if stage == Stage::Report || !done.insert((stage, key.to_string())) {
                    continue;
                }
                if !force && verify(self.workdir(), stage.name(), key).is_ok() {
                    continue;
                }
                self.run_stage_locked(stage, seed)?;
            }
        }
        self.run_stage_locked(Stage::Report, self.cfg.seeds[0])?;
        Ok(compare_report(&self.all_metrics()?))
    }
}
