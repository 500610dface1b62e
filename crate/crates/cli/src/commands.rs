use std::io::{self, BufWriter, Write};
use std::path::Path;

use cis2kit::cis2::{
    enumerate_label_space, parse_label, ConversionLine, ConversionRecord, ConvertOptions,
    Converter, DimensionRelationMap, RelationSource,
};
use cis2kit::metrics::{
    accuracy_report, evaluate_generation, exact_match_accuracy, format_generation_table,
    random_baseline, RulePart,
};
use cis2kit::model::{
    import_csv, x_side_agreement_rate, ColumnMap, ParseOptions, RelationVocabulary,
};
use cis2kit::similarity::{fit_idf, load_embedding_table, SimilarityBackend};
use cis2kit::tasks::seeded_split;
use cis2kit::{
    config, io as kio, parallel, Cis2Label, Error, RelationToken, Result, StoryEntry, TaskBuilder,
};
use serde_json::json;

use crate::{
    BaselineArgs, BuildTaskArgs, Cli, Command, ConvertArgs, ConvertOpts, EnumerateArgs,
    EvalBleuArgs, EvalCis2Args, ImportArgs, LabelFormat, PartArg, SampleFormat, SimilarityArg,
    SplitArgs, VocabArgs,
};

pub enum Outcome {
    Clean,
    EntryErrors(usize),
}

/// Per-entry error log. In strict mode the first error aborts the run.
struct ErrorSink {
    strict: bool,
    out: Box<dyn Write + Send>,
    count: usize,
}

impl ErrorSink {
    fn new(strict: bool, path: Option<&Path>) -> Result<Self> {
        let out: Box<dyn Write + Send> = match path {
            Some(p) => Box::new(kio::create(p)?),
            None => Box::new(io::stderr()),
        };
        Ok(Self {
            strict,
            out,
            count: 0,
        })
    }

    fn push(&mut self, context: &str, err: Error) -> Result<()> {
        if self.strict {
            return Err(err);
        }
        self.count += 1;
        writeln!(self.out, "{context}{err}").map_err(|e| io_err("<error log>", e))
    }

    fn outcome(mut self) -> Result<Outcome> {
        self.out.flush().map_err(|e| io_err("<error log>", e))?;
        Ok(match self.count {
            0 => Outcome::Clean,
            n => Outcome::EntryErrors(n),
        })
    }
}

fn io_err(what: &str, e: io::Error) -> Error {
    Error::Io {
        path: what.into(),
        source: e,
    }
}

fn output(path: Option<&Path>) -> Result<Box<dyn Write>> {
    Ok(match path {
        Some(p) => Box::new(kio::create(p)?),
        None => Box::new(BufWriter::new(io::stdout().lock())),
    })
}

fn write_lines<I, S>(path: Option<&Path>, lines: I) -> Result<()>
where
    I: IntoIterator<Item = S>,
    S: AsRef<str>,
{
    let mut out = output(path)?;
    for line in lines {
        writeln!(out, "{}", line.as_ref()).map_err(|e| io_err("<output>", e))?;
    }
    out.flush().map_err(|e| io_err("<output>", e))
}

fn write_json(path: &Path, value: &serde_json::Value) -> Result<()> {
    write_lines(Some(path), [serde_json::to_string_pretty(value)?])
}

pub fn run(cli: Cli) -> Result<Outcome> {
    let threads = (cli.threads > 0).then_some(cli.threads);
    let mut sink = ErrorSink::new(cli.strict, cli.error_log.as_deref())?;
    parallel::with_threads(threads, move || {
        match &cli.command {
            Command::Import(a) => import(a, &mut sink)?,
            Command::BuildTask(a) => build_task(a, &mut sink)?,
            Command::Convert(a) => convert(a, &mut sink)?,
            Command::EvalBleu(a) => eval_bleu(a)?,
            Command::EvalCis2(a) => eval_cis2(a)?,
            Command::Baseline(a) => baseline(a)?,
            Command::EnumerateLabels(a) => enumerate_labels(a)?,
            Command::Split(a) => split(a)?,
        }
        sink.outcome()
    })
}

impl VocabArgs {
    fn load(&self) -> Result<RelationVocabulary> {
        let Some(path) = &self.vocabulary else {
            return Ok(RelationVocabulary::default());
        };
        let text =
            std::fs::read_to_string(path).map_err(|e| io_err(&path.display().to_string(), e))?;
        let tokens = text
            .lines()
            .map(str::trim)
            .filter(|l| !l.is_empty() && !l.starts_with('#'))
            .map(RelationToken::new)
            .collect::<Result<Vec<_>>>()?;
        Ok(RelationVocabulary::new(tokens))
    }
}

fn relation_map(spec: Option<&str>) -> Result<Option<DimensionRelationMap>> {
    spec.map(DimensionRelationMap::from_spec).transpose()
}

fn converter(opts: &ConvertOpts, entries: &[StoryEntry]) -> Result<Converter> {
    let backend = match opts.similarity {
        SimilarityArg::TokenF1 => SimilarityBackend::TokenF1,
        SimilarityArg::Tfidf => SimilarityBackend::TfidfCosine(fit_idf(
            entries.iter().flat_map(|e| e.sentences.iter()),
        )?),
        SimilarityArg::Embedding => {
            let path = opts
                .embeddings
                .as_deref()
                .ok_or_else(|| Error::Config("--similarity embedding needs --embeddings".into()))?;
            SimilarityBackend::EmbeddingCosine(load_embedding_table(path)?)
        }
    };
    let relation_source = match relation_map(opts.relation_map.as_deref())? {
        Some(map) => RelationSource::Dimension(map),
        None => RelationSource::Rule,
    };
    Ok(Converter::new(backend)
        .with_vocabulary(opts.vocab.load()?)
        .with_options(ConvertOptions {
            relation_source,
            min_similarity: opts.min_similarity,
        }))
}

fn import(a: &ImportArgs, sink: &mut ErrorSink) -> Result<()> {
    let mut columns = ColumnMap::default();
    if let Some(path) = &a.column_map {
        columns = columns.with_pairs(config::read_file(path)?)?;
    }
    let pairs = a
        .columns
        .iter()
        .map(|c| config::parse_pair(c))
        .collect::<Result<Vec<_>>>()?;
    columns = columns.with_pairs(pairs)?;
    let options = ParseOptions {
        vocabulary: a.vocab.load()?,
        match_threshold: a.match_threshold,
    };
    let outcome = import_csv(kio::open(&a.input)?, &columns, &options)?;
    for (row, err) in outcome.errors {
        sink.push(&format!("row {row}: "), err)?;
    }
    kio::write_jsonl(output(a.output.as_deref())?, &outcome.entries)?;
    eprintln!(
        "{}",
        json!({
            "rows": outcome.rows,
            "imported": outcome.entries.len(),
            "x_side_agreement": x_side_agreement_rate(&outcome.entries),
        })
    );
    Ok(())
}

fn build_task(a: &BuildTaskArgs, sink: &mut ErrorSink) -> Result<()> {
    let entries = kio::read_entries(&a.input)?;
    let mut builder = TaskBuilder::new(converter(&a.convert, &entries)?);
    builder.mask_dimension_prefix = !a.no_mask_prefix;
    let (samples, report) = builder.build_dataset(&entries, a.task);
    for (id, message) in &report.errors {
        sink.push("", Error::Config(format!("{id}: {message}")))?;
    }
    match a.format {
        SampleFormat::Jsonl => kio::write_jsonl(output(a.output.as_deref())?, &samples)?,
        SampleFormat::Tsv => write_lines(a.output.as_deref(), samples.iter().map(|s| s.to_tsv()))?,
    }
    let summary = json!({
        "task": a.task,
        "input": entries.len(),
        "output": samples.len(),
        "dropped": report.counts,
    });
    eprintln!("{summary}");
    if let Some(path) = &a.report {
        write_json(path, &summary)?;
    }
    Ok(())
}

fn convert(a: &ConvertArgs, sink: &mut ErrorSink) -> Result<()> {
    let entries = kio::read_entries(&a.input)?;
    let conv = converter(&a.convert, &entries)?;
    let results: Vec<Result<_>> = match &a.predictions {
        Some(path) => {
            let predictions = kio::read_all_lines(path)?;
            if predictions.len() != entries.len() {
                return Err(Error::LengthMismatch {
                    left: predictions.len(),
                    right: entries.len(),
                });
            }
            parallel::map_indexed(&entries, |i, e| conv.convert_prediction(e, &predictions[i]))
        }
        None => parallel::map_ordered(&entries, |e| conv.convert_gold_entry(e)),
    };

    let mut unparseable = 0;
    for r in &results {
        if let Err(e) = r {
            if a.predictions.is_some() && e.is_unparseable_prediction() {
                unparseable += 1;
            } else {
                sink.push("", clone_for_log(e))?;
            }
        }
    }
    match a.format {
        LabelFormat::Jsonl => {
            let records: Vec<_> = entries
                .iter()
                .zip(&results)
                .map(|(e, r)| ConversionRecord::new(e, r))
                .collect();
            kio::write_jsonl(output(a.output.as_deref())?, &records)?;
        }
        LabelFormat::Text => write_lines(
            a.output.as_deref(),
            results.iter().map(|r| {
                r.as_ref()
                    .map_or_else(|_| String::new(), |c| c.label.to_string())
            }),
        )?,
    }
    eprintln!(
        "{}",
        json!({
            "entries": entries.len(),
            "converted": results.iter().filter(|r| r.is_ok()).count(),
            "unparseable": unparseable,
        })
    );
    Ok(())
}

/// Errors are not `Clone`; the log only needs the message.
fn clone_for_log(e: &Error) -> Error {
    Error::Config(e.to_string())
}

fn aligned_predictions(entries: &Path, predictions: &Path) -> Result<Vec<(StoryEntry, String)>> {
    let entries = kio::read_entries(entries)?;
    let hyps = kio::read_all_lines(predictions)?;
    if hyps.len() != entries.len() {
        return Err(Error::LengthMismatch {
            left: hyps.len(),
            right: entries.len(),
        });
    }
    Ok(entries.into_iter().zip(hyps).collect())
}

fn eval_bleu(a: &EvalBleuArgs) -> Result<()> {
    let samples = aligned_predictions(&a.entries, &a.predictions)?;
    let (text, value) = match a.part {
        Some(part) => {
            let (part, label) = match part {
                PartArg::Specific => (RulePart::Specific, "specific"),
                PartArg::General => (RulePart::General, "general"),
            };
            let report = evaluate_generation(&samples, part)?;
            (
                report.to_text(&format!("{} BLEU ({label})", a.name)),
                json!({ "name": a.name, label: report }),
            )
        }
        None => {
            let spec = evaluate_generation(&samples, RulePart::Specific)?;
            let general = evaluate_generation(&samples, RulePart::General)?;
            let value = json!({ "name": a.name, "specific": spec, "general": general });
            (
                format_generation_table(&[(a.name.clone(), spec, general)]),
                value,
            )
        }
    };
    write_lines(None, [text.trim_end()])?;
    if let Some(path) = &a.output {
        write_json(path, &value)?;
    }
    Ok(())
}

fn read_labels(path: &Path, relations: &[RelationToken]) -> Result<Vec<Result<Cis2Label>>> {
    kio::read_all_lines(path)?
        .iter()
        .enumerate()
        .map(|(i, line)| {
            let line = line.trim();
            if line.starts_with('{') {
                let parsed: ConversionLine =
                    serde_json::from_str(line).map_err(|e| Error::Format {
                        line: i + 1,
                        message: e.to_string(),
                    })?;
                Ok(match parsed.label {
                    Some(l) => parse_label(&l, relations),
                    None => Err(Error::LabelSyntax {
                        text: String::new(),
                        reason: "no label",
                    }),
                })
            } else {
                Ok(parse_label(line, relations))
            }
        })
        .collect()
}

fn label_relations(map: Option<&str>, vocab: &VocabArgs) -> Result<Vec<RelationToken>> {
    let mut tokens = vocab.load()?.tokens().to_vec();
    if let Some(map) = relation_map(map)? {
        tokens.extend(map.relations());
    }
    Ok(RelationVocabulary::new(tokens).tokens().to_vec())
}

fn eval_cis2(a: &EvalCis2Args) -> Result<()> {
    let relations = label_relations(a.relation_map.as_deref(), &a.vocab)?;
    let predicted: Vec<Option<Cis2Label>> = read_labels(&a.predicted, &relations)?
        .into_iter()
        .map(Result::ok)
        .collect();
    let reference = read_labels(&a.reference, &relations)?
        .into_iter()
        .enumerate()
        .map(|(i, r)| {
            r.map_err(|e| Error::Format {
                line: i + 1,
                message: format!("reference label: {e}"),
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let accuracy = exact_match_accuracy(&predicted, &reference)?;
    let unparseable = predicted.iter().filter(|p| p.is_none()).count();
    let mut value = json!({
        "accuracy": accuracy,
        "n": reference.len(),
        "unparseable": unparseable,
    });
    let mut text = format!(
        "accuracy: {accuracy:.4} (n={}, unparseable={unparseable})",
        reference.len()
    );
    if let Some(path) = &a.entries {
        let entries = kio::read_entries(path)?;
        let dims: Vec<_> = entries.iter().map(|e| e.dimension).collect();
        let report = accuracy_report(&predicted, &reference, &dims)?;
        text = format!("{text}\n{}", report.to_text("per dimension").trim_end());
        value["report"] = serde_json::to_value(&report)?;
    }
    write_lines(None, [text])?;
    if let Some(path) = &a.output {
        write_json(path, &value)?;
    }
    Ok(())
}

fn baseline(a: &BaselineArgs) -> Result<()> {
    let entries = kio::read_entries(&a.input)?;
    let relation_source = match relation_map(a.relation_map.as_deref())? {
        Some(map) => RelationSource::Dimension(map),
        None => RelationSource::Rule,
    };
    let conv = Converter::new(SimilarityBackend::TokenF1).with_options(ConvertOptions {
        relation_source,
        min_similarity: None,
    });
    let labels = random_baseline(&entries, a.seed, &conv)?;
    write_lines(a.output.as_deref(), labels.iter().map(|l| l.to_string()))
}

fn enumerate_labels(a: &EnumerateArgs) -> Result<()> {
    let map = DimensionRelationMap::from_spec(&a.relation_map)?;
    let labels = enumerate_label_space(&map.relations());
    write_lines(a.output.as_deref(), labels.iter().map(|l| l.to_string()))
}

fn split(a: &SplitArgs) -> Result<()> {
    let entries = kio::read_entries(&a.input)?;
    let (train, dev) = seeded_split(entries.len(), a.dev_fraction, a.seed);
    let pick = |idx: &[usize]| idx.iter().map(|&i| entries[i].clone()).collect::<Vec<_>>();
    kio::write_jsonl(kio::create(&a.train_out)?, &pick(&train))?;
    kio::write_jsonl(kio::create(&a.dev_out)?, &pick(&dev))?;
    eprintln!(
        "{}",
        json!({ "train": train.len(), "dev": dev.len(), "seed": a.seed })
    );
    Ok(())
}
