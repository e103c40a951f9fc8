use std::io::Write as _;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use metaforge::bio::{bio_to_record, BioOptions};
use metaforge::diag::Diagnostic;
use metaforge::fusion::{parse_samples, train_decision_matrix, write_samples};
use metaforge::harness::{
    apply_noise, evaluate, fusion_samples, generate_corpus, parse_label_pairs, run_fusion_experiment,
    ExperimentConfig, LayoutProfile,
};
use metaforge::ingest::{read_file, write_image_modal, write_text_modal};
use metaforge::metagraph::ExportFormat;
use metaforge::pipeline::{
    build_trees, fuse_stage, graph_stage, reconcile_stage, run_pipeline, PipelineConfig, TripleSource,
};
use metaforge::text_metrics::{NormalizeOptions, ReconcileConfig, Threshold};
use metaforge::{Error, ErrorKind, Result};

mod settings;

use settings::Settings;

#[derive(Parser)]
#[command(
    name = "forge",
    version,
    about = "Reconcile, fuse and structure multi-modal document element extractions"
)]
struct Cli {
    /// Seed for corpus generation and experiments.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// TOML file with defaults: thresholds, depth, jobs, formats, class aliases.
    #[arg(long, global = true, value_name = "FILE")]
    config: Option<PathBuf>,
    /// Do not print warnings.
    #[arg(short, long, global = true)]
    quiet: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct MatchArgs {
    /// Accept matches at most this many edits away (default 3).
    #[arg(long, value_name = "N")]
    threshold: Option<usize>,
    /// Accept matches at most this fraction of the OCR length away instead.
    #[arg(long, value_name = "RHO", conflicts_with = "threshold")]
    relative: Option<f64>,
    /// Compare strings as they are, without whitespace normalization.
    #[arg(long)]
    raw: bool,
    /// Ignore letter case when comparing.
    #[arg(long)]
    fold_case: bool,
    /// Treat full-width ASCII variants as their half-width forms.
    #[arg(long)]
    fold_width: bool,
}

#[derive(Args)]
struct ModalInputs {
    /// Text-modal TSV: doc_id class pi si text.
    #[arg(long)]
    text: PathBuf,
    /// Image-modal TSV: doc_id page class prob x y w d ocr_text.
    #[arg(long)]
    image: PathBuf,
}

#[derive(Subcommand)]
enum Command {
    /// Match every image element to its nearest text element.
    Reconcile {
        #[command(flatten)]
        inputs: ModalInputs,
        #[command(flatten)]
        matching: MatchArgs,
        #[arg(short, long)]
        output: PathBuf,
    },
    /// Train the decision matrix from text/image/gold class samples.
    TrainFusion {
        samples: PathBuf,
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
    /// Fuse both modalities into one element table.
    Fuse {
        #[command(flatten)]
        inputs: ModalInputs,
        /// Match table from `reconcile`; recomputed when absent.
        #[arg(long)]
        matches: Option<PathBuf>,
        /// Decision matrix from `train-fusion`; untrained when absent.
        #[arg(long)]
        matrix: Option<PathBuf>,
        #[command(flatten)]
        matching: MatchArgs,
        #[arg(short, long)]
        output: PathBuf,
    },
    /// Build one structure tree per document of a fused table.
    Tree {
        fused: PathBuf,
        /// A `.json` file for a single document, else a directory that gets
        /// `<doc_id>.dst.json` per document.
        #[arg(short, long)]
        output: PathBuf,
        #[arg(long)]
        max_depth: Option<u8>,
        /// Verify the weight ordering properties; violations fail the run.
        #[arg(long)]
        check: bool,
        /// Print an indented outline of every tree.
        #[arg(long)]
        outline: bool,
    },
    /// Generate the metaknowledge graph of a tree.
    Graph {
        dst: PathBuf,
        /// Triples TSV: subject predicate object pi si.
        #[arg(long, conflicts_with = "no_triples")]
        triples: Option<PathBuf>,
        /// Skip triples entirely instead of extracting them from the text.
        #[arg(long)]
        no_triples: bool,
        /// Reference list with `[n]` entries.
        #[arg(long)]
        refs: Option<PathBuf>,
        /// Output file; the format follows the extension (.json, .dot, .cypher).
        #[arg(short, long, required = true)]
        output: Vec<PathBuf>,
    },
    /// Generate a synthetic corpus with gold labels.
    GenCorpus {
        #[arg(short = 'n', long, default_value_t = 10)]
        docs: usize,
        /// `default`, `minimal` or a TOML layout file.
        #[arg(long, default_value = "default")]
        profile: String,
        /// Experiment TOML whose noise tables and OCR rate corrupt the predictions.
        #[arg(long)]
        noise: Option<PathBuf>,
        /// Directory for gold.tsv, text.tsv, image.tsv and samples.tsv.
        #[arg(short, long)]
        output: PathBuf,
    },
    /// Score `gold<TAB>prediction` label pairs.
    Eval {
        pairs: PathBuf,
        /// Print the report as JSON.
        #[arg(long)]
        json: bool,
    },
    /// Run a fusion experiment described by a TOML file.
    Experiment {
        #[arg(value_name = "EXPERIMENT")]
        file: PathBuf,
        /// Results table; stdout when absent.
        #[arg(short, long)]
        output: Option<PathBuf>,
        /// Also write the trained decision matrix.
        #[arg(long)]
        matrix_out: Option<PathBuf>,
    },
    /// Run reconcile, fuse, tree and graph end to end.
    Pipeline {
        #[command(flatten)]
        inputs: ModalInputs,
        /// Directory of `<doc_id>.tsv` triple files.
        #[arg(long)]
        triples_dir: Option<PathBuf>,
        /// Directory of `<doc_id>.txt` reference lists.
        #[arg(long)]
        refs_dir: Option<PathBuf>,
        #[arg(long)]
        matrix: Option<PathBuf>,
        #[command(flatten)]
        matching: MatchArgs,
        #[arg(long)]
        max_depth: Option<u8>,
        /// Graph formats: graph-json, dot, cypher (default all).
        #[arg(long = "format", value_delimiter = ',')]
        formats: Vec<String>,
        /// Worker threads for per-document stages.
        #[arg(long)]
        jobs: Option<usize>,
        #[arg(short, long)]
        output: PathBuf,
    },
    /// Convert a BIO-tagged token file into text-modal records.
    Bio {
        input: PathBuf,
        #[arg(long)]
        doc_id: String,
        /// Inserted between tokens; pass "" for character-level input.
        #[arg(long, default_value = " ")]
        joiner: String,
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
}

struct Ctx {
    settings: Settings,
    seed: Option<u64>,
    quiet: bool,
}

impl Ctx {
    fn seed(&self) -> Option<u64> {
        self.seed.or(self.settings.seed)
    }

    fn reconcile(&self, m: &MatchArgs) -> ReconcileConfig {
        let s = &self.settings;
        let threshold = match (m.relative, m.threshold) {
            (Some(r), _) => Threshold::Relative(r),
            (None, Some(n)) => Threshold::Absolute(n),
            (None, None) => match (s.relative, s.threshold) {
                (Some(r), _) => Threshold::Relative(r),
                (None, n) => Threshold::Absolute(n.unwrap_or(3)),
            },
        };
        let mut normalize = if m.raw || s.normalize == Some(false) {
            NormalizeOptions::none()
        } else {
            NormalizeOptions::default()
        };
        normalize.fold_case |= m.fold_case;
        normalize.fold_width |= m.fold_width;
        ReconcileConfig { threshold, normalize }
    }

    fn max_depth(&self, flag: Option<u8>) -> u8 {
        flag.or(self.settings.max_depth)
            .unwrap_or(metaforge::dst::DEFAULT_MAX_DEPTH)
    }

    fn warn(&self, diagnostics: &[Diagnostic]) {
        if !self.quiet {
            for d in diagnostics {
                eprintln!("{d}");
            }
        }
    }
}

fn write_out(path: &Path, content: &str) -> Result<()> {
    std::fs::write(path, content).map_err(|e| Error::io(path, e))
}

fn emit(path: Option<&Path>, content: &str) -> Result<()> {
    match path {
        Some(p) => write_out(p, content),
        None => match std::io::stdout().write_all(content.as_bytes()) {
            // a closed reader such as `head` is not a failure
            Err(e) if e.kind() == std::io::ErrorKind::BrokenPipe => Ok(()),
            r => r.map_err(|e| Error::io("<stdout>", e)),
        },
    }
}

fn create_dir(path: &Path) -> Result<()> {
    std::fs::create_dir_all(path).map_err(|e| Error::io(path, e))
}

fn load_profile(name: &str) -> Result<LayoutProfile> {
    if name.ends_with(".toml") {
        let p = Path::new(name);
        if !p.is_file() {
            return Err(Error::Usage(format!("layout file {name} does not exist")));
        }
        Ok(toml::from_str(&read_file(p)?)?)
    } else {
        LayoutProfile::named(name)
    }
}

fn run(cli: Cli) -> Result<()> {
    let ctx = Ctx {
        settings: Settings::load(cli.config.as_deref())?,
        seed: cli.seed,
        quiet: cli.quiet,
    };
    let taxonomy = ctx.settings.taxonomy()?;
    match cli.command {
        Command::Reconcile {
            inputs,
            matching,
            output,
        } => reconcile_stage(
            &inputs.text,
            &inputs.image,
            &taxonomy,
            &ctx.reconcile(&matching),
            &output,
        ),
        Command::TrainFusion { samples, output } => {
            let parsed = parse_samples(&read_file(&samples)?, &samples.display().to_string(), &taxonomy)?;
            let matrix = train_decision_matrix(&parsed, taxonomy.k())?;
            emit(output.as_deref(), &matrix.to_text())
        }
        Command::Fuse {
            inputs,
            matches,
            matrix,
            matching,
            output,
        } => {
            let diags = fuse_stage(
                &inputs.text,
                &inputs.image,
                matches.as_deref(),
                matrix.as_deref(),
                &taxonomy,
                &ctx.reconcile(&matching),
                &output,
            )?;
            ctx.warn(&diags);
            Ok(())
        }
        Command::Tree {
            fused,
            output,
            max_depth,
            check,
            outline,
        } => {
            let (trees, diags) = build_trees(&fused, &taxonomy, ctx.max_depth(max_depth))?;
            ctx.warn(&diags);
            let single = output.extension().is_some_and(|e| e == "json");
            if single && trees.len() != 1 {
                return Err(Error::Usage(format!(
                    "{} holds {} documents; give a directory instead of {}",
                    fused.display(),
                    trees.len(),
                    output.display()
                )));
            }
            let mut violations = 0;
            for t in &trees {
                if check {
                    for v in t.check_properties() {
                        eprintln!("violation[{}]: {v}", t.doc_id());
                        violations += 1;
                    }
                }
                if outline {
                    emit(None, &t.to_outline())?;
                }
            }
            if violations > 0 {
                return Err(Error::Validation(format!(
                    "{violations} tree property violations"
                )));
            }
            if single {
                write_out(&output, &trees[0].to_json())
            } else {
                create_dir(&output)?;
                for t in &trees {
                    write_out(&output.join(format!("{}.dst.json", t.doc_id())), &t.to_json())?;
                }
                Ok(())
            }
        }
        Command::Graph {
            dst,
            triples,
            no_triples,
            refs,
            output,
        } => {
            let outputs = output
                .into_iter()
                .map(|p| Ok((ExportFormat::from_path(&p)?, p)))
                .collect::<Result<Vec<_>>>()?;
            let source = match (&triples, no_triples) {
                (Some(p), _) => TripleSource::File(p),
                (None, true) => TripleSource::None,
                (None, false) => TripleSource::Heuristic,
            };
            let diags = graph_stage(&dst, source, refs.as_deref(), &outputs)?;
            ctx.warn(&diags);
            Ok(())
        }
        Command::GenCorpus {
            docs,
            profile,
            noise,
            output,
        } => {
            let seed = ctx.seed().unwrap_or(0);
            let gold = generate_corpus(docs, &load_profile(&profile)?, seed)?;
            let noisy = match &noise {
                Some(p) => {
                    let mut model = ExperimentConfig::from_toml_str(&read_file(p)?)?.noise_model()?;
                    model.seed = seed;
                    apply_noise(&gold, &model)?
                }
                None => gold.clone(),
            };
            create_dir(&output)?;
            write_out(&output.join("gold.tsv"), &write_text_modal(&gold))?;
            write_out(&output.join("text.tsv"), &write_text_modal(&noisy))?;
            write_out(&output.join("image.tsv"), &write_image_modal(&noisy))?;
            write_out(
                &output.join("samples.tsv"),
                &write_samples(&fusion_samples(&gold, &noisy)),
            )
        }
        Command::Eval { pairs, json } => {
            let (pred, gold) = parse_label_pairs(&read_file(&pairs)?, &pairs.display().to_string())?;
            let report = evaluate(&pred, &gold)?;
            if json {
                emit(None, &(serde_json::to_string_pretty(&report)? + "\n"))
            } else {
                emit(None, &report.to_tsv())
            }
        }
        Command::Experiment {
            file,
            output,
            matrix_out,
        } => {
            let mut cfg = ExperimentConfig::from_toml_str(&read_file(&file)?)?;
            if let Some(seed) = ctx.seed() {
                cfg.seed = seed;
            }
            let result = run_fusion_experiment(&cfg)?;
            if let Some(p) = &matrix_out {
                write_out(p, &result.matrix.to_text())?;
            }
            emit(output.as_deref(), &result.to_tsv())
        }
        Command::Pipeline {
            inputs,
            triples_dir,
            refs_dir,
            matrix,
            matching,
            max_depth,
            formats,
            jobs,
            output,
        } => {
            let mut cfg = PipelineConfig::new(&inputs.text, &inputs.image, &output);
            cfg.triples_dir = triples_dir;
            cfg.refs_dir = refs_dir;
            cfg.matrix = matrix;
            cfg.reconcile = ctx.reconcile(&matching);
            cfg.max_depth = ctx.max_depth(max_depth);
            cfg.taxonomy = taxonomy;
            cfg.jobs = jobs.or(ctx.settings.jobs);
            let names = if formats.is_empty() {
                ctx.settings.formats.clone().unwrap_or_default()
            } else {
                formats
            };
            if !names.is_empty() {
                cfg.formats = names.iter().map(|n| n.parse()).collect::<Result<_>>()?;
            }
            let report = run_pipeline(&cfg)?;
            ctx.warn(&report.diagnostics);
            let listing: String = report
                .artifacts
                .iter()
                .map(|p| format!("{}\n", p.display()))
                .collect();
            emit(None, &listing)
        }
        Command::Bio {
            input,
            doc_id,
            joiner,
            output,
        } => {
            let options = BioOptions {
                joiner,
                ..BioOptions::default()
            };
            let doc = bio_to_record(
                &doc_id,
                &read_file(&input)?,
                &input.display().to_string(),
                &taxonomy,
                &options,
            )?;
            emit(output.as_deref(), &write_text_modal(&[doc]))
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 2 } else { 0 });
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(match e.kind() {
                ErrorKind::Validation => 1,
                ErrorKind::Usage => 2,
                ErrorKind::Internal => 3,
            })
        }
    }
}
