use std::fs;
use std::io::{BufWriter, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use dwe::eval::{chi_square_select, nearest_neighbors, write_features};
use dwe::pipeline::{Method, Pipeline, RunConfig, Stage};
use dwe::synthetic::SyntheticSpec;
use dwe::Result;

#[derive(Parser)]
#[command(name = "dwe", version, about = "Dependency-based and class-enhanced word embeddings")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Clone)]
struct Common {
    /// Run config (TOML).
    #[arg(long, short)]
    config: PathBuf,
    /// Use this single seed instead of the configured list.
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    method: Option<String>,
    #[arg(long)]
    dim: Option<usize>,
}

#[derive(Subcommand)]
enum Command {
    /// Build the vocabulary from the training corpus.
    Vocab(Common),
    /// Extract weighted word-context pairs.
    Pairs(Common),
    /// Aggregate pairs into the co-occurrence matrix.
    Cooc(Common),
    /// PPMI transform.
    Ppmi(Common),
    /// Class-probability row extension (cedwe only).
    Extend(Common),
    /// Truncated SVD and embeddings, per seed.
    Svd(Common),
    /// Train the classifier on averaged embeddings, per seed.
    Train(Common),
    /// Test accuracy, per seed.
    Eval(Common),
    /// Comparison table over every evaluated run in the workdir.
    Report(Common),
    /// Run all stages, reusing verified artifacts.
    RunAll {
        #[command(flatten)]
        common: Common,
        /// Recompute stages even when their artifacts verify.
        #[arg(long)]
        force: bool,
    },
    /// Nearest neighbors of a word by cosine similarity.
    Neighbors {
        #[command(flatten)]
        common: Common,
        word: String,
        #[arg(long, short, default_value_t = 10)]
        k: usize,
    },
    /// Write document features and chi-square class words with vectors.
    Export {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        out: PathBuf,
        #[arg(long, default_value_t = 100)]
        top_k: usize,
    },
    /// Generate a synthetic parsed, labeled corpus with a train/test split.
    Synth {
        #[arg(long)]
        out: PathBuf,
        #[arg(long)]
        docs_per_class: Option<usize>,
        #[arg(long)]
        seed: Option<u64>,
    },
}

fn pipeline(c: &Common) -> Result<Pipeline> {
    let mut cfg = RunConfig::load(&c.config)?;
    if let Some(s) = c.seed {
        cfg.seeds = vec![s];
    }
    if let Some(m) = &c.method {
        cfg.method = m.parse::<Method>()?;
    }
    if let Some(d) = c.dim {
        cfg.dim = d;
    }
    Pipeline::new(cfg)
}

fn stage(c: &Common, stage: Stage) -> Result<()> {
    let p = pipeline(c)?;
    let seeds = if stage.is_seeded() {
        p.config().seeds.clone()
    } else {
        vec![p.config().seeds[0]]
    };
    for seed in seeds {
        let m = p.run_stage(stage, seed)?;
        println!(
            "{} {} rows={} cols={} nnz={} wall_time={:.3}s",
            m.stage, m.key, m.rows, m.cols, m.nnz, m.wall_time_secs
        );
    }
    if stage == Stage::Report {
        let dir = p.artifact_path(Stage::Report, 0)?;
        print!("{}", fs::read_to_string(dir.join("report.txt"))?);
    }
    Ok(())
}

fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Vocab(c) => stage(&c, Stage::Vocab),
        Command::Pairs(c) => stage(&c, Stage::Pairs),
        Command::Cooc(c) => stage(&c, Stage::Cooc),
        Command::Ppmi(c) => stage(&c, Stage::Ppmi),
        Command::Extend(c) => stage(&c, Stage::Extend),
        Command::Svd(c) => stage(&c, Stage::Svd),
        Command::Train(c) => stage(&c, Stage::Train),
        Command::Eval(c) => stage(&c, Stage::Eval),
        Command::Report(c) => stage(&c, Stage::Report),
        Command::RunAll { common, force } => {
            let p = pipeline(&common)?;
            let cmp = p.run_all(force)?;
            print!("{cmp}");
            Ok(())
        }
        Command::Neighbors { common, word, k } => {
            let p = pipeline(&common)?;
            let (e, vocab) = p.embeddings(p.config().seeds[0])?;
            for (id, sim) in nearest_neighbors(&e, &vocab, &word.to_lowercase(), k)? {
                println!("{}\t{sim:.4}", vocab.word(id));
            }
            Ok(())
        }
        Command::Export { common, out, top_k } => {
            let p = pipeline(&common)?;
            let seed = p.config().seeds[0];
            fs::create_dir_all(&out)?;
            let (train, test) = p.feature_sets(seed)?;
            write_features(BufWriter::new(fs::File::create(out.join("train.features"))?), &train)?;
            write_features(BufWriter::new(fs::File::create(out.join("test.features"))?), &test)?;
            let (e, vocab) = p.embeddings(seed)?;
            let wc = p.word_class_counts(seed)?;
            let mut f = BufWriter::new(fs::File::create(out.join("class_words.tsv"))?);
            for w in chi_square_select(&wc, top_k) {
                let v: Vec<String> = e.matrix().row(w.word).iter().map(|x| x.to_string()).collect();
                writeln!(f, "{}\t{}\t{}\t{}", vocab.word(w.word), w.best_class, w.statistic, v.join(","))?;
            }
            f.flush()?;
            println!("wrote {}", out.display());
            Ok(())
        }
        Command::Synth {
            out,
            docs_per_class,
            seed,
        } => {
            let mut spec = SyntheticSpec::default();
            if let Some(n) = docs_per_class {
                spec.docs_per_class = n;
            }
            if let Some(s) = seed {
                spec.seed = s;
            }
            let paths = spec.generate().write_split(&out)?;
            let mut cfg = RunConfig::new(Method::Dwe, paths);
            cfg.paths.train_corpus = "train.conllu".into();
            cfg.paths.train_labels = "train.labels".into();
            cfg.paths.test_corpus = "test.conllu".into();
            cfg.paths.test_labels = "test.labels".into();
            cfg.paths.workdir = "work".into();
            fs::write(out.join("config.toml"), cfg.to_toml()?)?;
            println!("wrote {}", out.display());
            Ok(())
        }
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}
