use std::collections::BTreeSet;
use std::num::NonZeroUsize;
use std::path::{Path, PathBuf};
use std::sync::{Arc, RwLock};

use anyhow::{bail, Context, Result};
use dsr_core::agreement::{agreement_report, aggregate_scores, DEFAULT_SD_THRESHOLD};
use dsr_core::analytics::{
    attribute_log_odds, bin_high_low, compare_bins, histogram, label_spans, pairwise_themes, target_deltas,
    threshold_labels, AnalyticsConfig, AttributePredicate, CategoryLexicon, LabeledSpan, RegardLabel,
};
use dsr_core::scorer::{augment_debias, embed_test, evaluate_scores, train, ScorerConfig, TrainingBatch};
use dsr_core::spaneval::evaluate_spans;
use dsr_core::{Corpus, Dimension, ScoredSpan};
use serde_json::{json, Value};

use super::manifest::{sibling, Recorder};
use super::*;
use crate::export::{export_graph, graph_from_json, histogram_csv, GraphFormat};
use crate::formats::{
    self, read_annotations, read_checkpoint, read_config, read_corpus, read_embeddings, read_lexicon,
    read_predictions, read_word_list, write_checkpoint, write_corpus, write_embeddings, Checkpoint, ConfigFile,
};
use crate::report;
use crate::service::{self, AnnotationStore};

const DEFAULT_BINS: usize = 20;

/// Runs a parsed command line.
pub fn run(cli: Cli) -> Result<()> {
    let file = match &cli.config {
        Some(path) => read_config(path)?,
        None => ConfigFile::default(),
    };
    let ctx = Ctx { file, path: cli.config };
    match cli.command {
        Command::Agreement(a) => agreement(&ctx, a),
        Command::Aggregate(a) => aggregate(&ctx, a),
        Command::EvalSpans(a) => eval_spans(&ctx, a),
        Command::Embed(a) => embed(&ctx, a),
        Command::Train(a) => train_head(&ctx, a),
        Command::EvalScores(a) => eval_scores(&ctx, a),
        Command::Augment(a) => augment(&ctx, a),
        Command::AnalyzeLogodds(a) => logodds(&ctx, a, false),
        Command::AnalyzeComposite(a) => logodds(&ctx, a, true),
        Command::AnalyzeTargets(a) => targets(&ctx, a),
        Command::AnalyzePairwise(a) => pairwise(&ctx, a),
        Command::Histogram(a) => hist(&ctx, a),
        Command::Serve(a) => serve(&ctx, a),
        Command::ExportGraph(a) => export(&ctx, a),
    }
}

struct Ctx {
    file: ConfigFile,
    path: Option<PathBuf>,
}

impl Ctx {
    fn recorder(&self, subcommand: &str) -> Recorder {
        let mut r = Recorder::new(subcommand);
        if let Some(p) = &self.path {
            r.input(p);
        }
        r
    }

    fn scorer(&self) -> Result<ScorerConfig> {
        let mut c = ScorerConfig::default();
        self.file.apply_scorer(&mut c)?;
        Ok(c)
    }

    fn analytics(&self, sigma: Option<f64>) -> Result<AnalyticsConfig> {
        let mut c = AnalyticsConfig::default();
        self.file.apply_analytics(&mut c)?;
        if let Some(s) = sigma {
            c.sigma = s;
        }
        c.validate()?;
        Ok(c)
    }

    fn value<T>(&self, flag: Option<T>, key: &str, default: T) -> Result<T>
    where
        T: std::str::FromStr,
        T::Err: std::fmt::Display,
    {
        match flag {
            Some(v) => Ok(v),
            None => Ok(self.file.get(key)?.unwrap_or(default)),
        }
    }
}

fn write(path: &Path, contents: &str) -> Result<()> {
    formats::write_file(path, contents)?;
    Ok(())
}

fn lexicon(path: Option<&Path>, rec: &mut Recorder) -> Result<CategoryLexicon> {
    match path {
        Some(p) => {
            rec.input(p);
            Ok(read_lexicon(p)?)
        }
        None => Ok(CategoryLexicon::default()),
    }
}

fn corpus(path: &Path, rec: &mut Recorder) -> Result<Corpus> {
    rec.input(path);
    Ok(read_corpus(path)?)
}

fn agreement(ctx: &Ctx, a: AgreementArgs) -> Result<()> {
    let mut rec = ctx.recorder("agreement");
    rec.input(&a.annotations);
    let events = read_annotations(&a.annotations)?;
    let r = agreement_report(&events)?;
    write(&a.out, &report::to_pretty(&report::agreement_json(&r)))?;
    print!("{}", report::agreement_table(&r));
    rec.output(&a.out);
    rec.finish(&a.out)?;
    Ok(())
}

fn aggregate(ctx: &Ctx, a: AggregateArgs) -> Result<()> {
    let mut rec = ctx.recorder("aggregate");
    let c = corpus(&a.corpus, &mut rec)?;
    rec.input(&a.annotations);
    let events = read_annotations(&a.annotations)?;
    let sd = ctx.value(a.sd_threshold, "sd_threshold", DEFAULT_SD_THRESHOLD)?;
    rec.config("sd_threshold", sd);
    let agg = aggregate_scores(&c, &events, sd)?;
    let flagged_path = sibling(&a.out, "flagged.json");
    let n_flagged = agg.flagged.len();
    let flagged = report::flagged_json(&agg);
    let out = Corpus::new(c.name.clone(), c.texts().to_vec(), agg.spans)?;
    write_corpus(&out, &a.out)?;
    write(&flagged_path, &report::to_pretty(&flagged))?;
    println!("kept {} spans, flagged {} units", out.spans().len(), n_flagged);
    rec.output(&a.out);
    rec.output(&flagged_path);
    rec.finish(&a.out)?;
    Ok(())
}

fn eval_spans(ctx: &Ctx, a: EvalSpansArgs) -> Result<()> {
    let mut rec = ctx.recorder("eval-spans");
    let gold = corpus(&a.corpus, &mut rec)?;
    rec.input(&a.predictions);
    let predicted = read_predictions(&a.predictions, &gold)?;
    let gold_spans: Vec<_> = gold.spans().iter().map(|s| s.span.clone()).collect();
    let r = evaluate_spans(gold.texts(), &gold_spans, &predicted)?;
    let name = a.name.unwrap_or_else(|| formats::name_of(&a.predictions));
    let mut body = report::eval_json(&r);
    body["run"] = json!(name);
    write(&a.out, &report::to_pretty(&body))?;
    print!("{}", report::eval_table(&name, &r));
    rec.output(&a.out);
    rec.finish(&a.out)?;
    Ok(())
}

fn embed(ctx: &Ctx, a: EmbedArgs) -> Result<()> {
    let mut rec = ctx.recorder("embed");
    let c = corpus(&a.corpus, &mut rec)?;
    let mut config = ctx.scorer()?;
    if let Some(h) = a.h {
        config.h = h;
    }
    if let Some(t) = a.text_max {
        config.text_max = t;
    }
    config.validate()?;
    rec.config("h", config.h);
    rec.config("text_max", config.text_max);
    let embedded = c
        .texts()
        .iter()
        .map(|t| embed_test(t, &config).with_context(|| format!("text `{}`", t.id)))
        .collect::<Result<Vec<_>>>()?;
    write_embeddings(&embedded, &a.out)?;
    rec.output(&a.out);
    rec.finish(&a.out)?;
    Ok(())
}

/// Embeddings for every labelled text, checked against the text they claim
/// to embed.
fn training_batch(
    embeddings: &Path,
    labels: &Corpus,
    config: &mut ScorerConfig,
    h_fixed: bool,
) -> Result<TrainingBatch> {
    let embedded = read_embeddings(embeddings, h_fixed.then_some(config.h))?;
    if !h_fixed {
        if let Some(first) = embedded.first() {
            config.h = first.h;
        }
    }
    for e in &embedded {
        if let Some(text) = labels.text(&e.text_id) {
            e.validate_against(text)
                .with_context(|| format!("embeddings of `{}`", e.text_id))?;
        }
        if e.n_tokens() > config.text_max {
            bail!(
                "text `{}` has {} tokens, more than text_max = {}",
                e.text_id,
                e.n_tokens(),
                config.text_max
            );
        }
    }
    let scored: Vec<ScoredSpan> = labels.spans().iter().filter(|s| s.is_scored()).cloned().collect();
    if scored.is_empty() {
        bail!("`{}` has no scored spans", labels.name);
    }
    Ok(TrainingBatch::from_spans(&embedded, &scored, config)?)
}

fn train_head(ctx: &Ctx, a: TrainArgs) -> Result<()> {
    let mut rec = ctx.recorder("train");
    let labels = corpus(&a.labels, &mut rec)?;
    rec.input(&a.embeddings);
    let mut config = ctx.scorer()?;
    if let Some(v) = a.seed {
        config.seed = v;
    }
    if let Some(v) = a.epochs {
        config.epochs = v;
    }
    if let Some(v) = a.lr {
        config.lr = v;
    }
    if let Some(v) = a.hidden {
        config.hidden = v;
    }
    if let Some(v) = &a.batch_size {
        config.batch_size = formats::parse_batch_size(v)?;
    }
    let h_fixed = ctx.file.entries().contains_key("h");
    let batch = training_batch(&a.embeddings, &labels, &mut config, h_fixed)?;
    config.validate()?;
    let (head, history) = train(&batch, &config)?;

    rec.config("h", config.h);
    rec.config("hidden", config.hidden);
    rec.config("lr", config.lr);
    rec.config("epochs", config.epochs);
    rec.config("seed", config.seed);
    rec.config("batch_size", config.batch_size.map_or(0, NonZeroUsize::get));

    let history_path = sibling(&a.out, "history.csv");
    let mut csv = String::from("epoch,loss,best\n");
    for (i, (loss, best)) in history.per_epoch.iter().zip(&history.best).enumerate() {
        csv.push_str(&format!("{},{loss},{best}\n", i + 1));
    }
    write_checkpoint(&Checkpoint { config, head }, &a.out)?;
    write(&history_path, &csv)?;
    if let (Some(last), Some(best)) = (history.last(), history.best.last()) {
        println!("{} spans, final loss {last:.6}, best {best:.6}", batch.len());
    }
    rec.output(&a.out);
    rec.output(&history_path);
    rec.finish(&a.out)?;
    Ok(())
}

fn eval_scores(ctx: &Ctx, a: EvalScoresArgs) -> Result<()> {
    let mut rec = ctx.recorder("eval-scores");
    rec.input(&a.model);
    let Checkpoint { mut config, head } = read_checkpoint(&a.model)?;
    let labels = corpus(&a.labels, &mut rec)?;
    rec.input(&a.embeddings);
    let batch = training_batch(&a.embeddings, &labels, &mut config, true)?;
    let fits = evaluate_scores(&head, &batch)?;
    write(&a.out, &report::to_pretty(&report::score_fit_json(&fits)))?;
    print!("{}", report::score_fit_table(&fits));
    rec.output(&a.out);
    rec.finish(&a.out)?;
    Ok(())
}

fn augment(ctx: &Ctx, a: AugmentArgs) -> Result<()> {
    let mut rec = ctx.recorder("augment");
    let c = corpus(&a.corpus, &mut rec)?;
    rec.input(&a.char_lexicon);
    rec.input(&a.topic_lexicon);
    let char_lex = read_word_list(&a.char_lexicon)?;
    let topic_lex = read_word_list(&a.topic_lexicon)?;
    rec.config("include_source", a.include_source);

    let mut texts = Vec::new();
    let mut spans = Vec::new();
    let mut n_variants = 0;
    for (text, text_spans) in c.spans_by_text() {
        if a.include_source {
            texts.push(text.clone());
            spans.extend(text_spans.iter().map(|s| (*s).clone()));
        }
        let owned: Vec<ScoredSpan> = text_spans.into_iter().cloned().collect();
        for v in augment_debias(text, &owned, &char_lex, &topic_lex)? {
            texts.push(v.text);
            spans.extend(v.spans);
            n_variants += 1;
        }
    }
    let out = Corpus::new(format!("{}-augmented", c.name), texts, spans)?;
    write_corpus(&out, &a.out)?;
    println!("wrote {n_variants} variants");
    rec.output(&a.out);
    rec.finish(&a.out)?;
    Ok(())
}

fn labeled(spans: &[&ScoredSpan], sigma: f64) -> Vec<LabeledSpan> {
    spans
        .iter()
        .filter(|s| s.is_scored())
        .map(|s| LabeledSpan {
            surface: s.span.surface.clone(),
            kind: s.span.kind,
            labels: threshold_labels(&s.regard, sigma),
        })
        .collect()
}

/// The two span populations being compared: High vs Low bins of a document
/// label, or the corpus vs the pooled other corpora.
fn populations(
    c: &Corpus,
    label: Option<&str>,
    others: &[PathBuf],
    sigma: f64,
    rec: &mut Recorder,
) -> Result<(Vec<LabeledSpan>, Vec<LabeledSpan>)> {
    if let Some(label) = label {
        let (high, low) = bin_high_low(c.texts(), label)?;
        let high: BTreeSet<&str> = high.into_iter().map(|t| t.id.as_str()).collect();
        let low: BTreeSet<&str> = low.into_iter().map(|t| t.id.as_str()).collect();
        let pick = |set: &BTreeSet<&str>| -> Vec<&ScoredSpan> {
            c.spans().iter().filter(|s| set.contains(s.span.text_id.as_str())).collect()
        };
        return Ok((labeled(&pick(&high), sigma), labeled(&pick(&low), sigma)));
    }
    let mut out = Vec::new();
    for p in others {
        out.extend(label_spans(&corpus(p, rec)?, sigma));
    }
    Ok((label_spans(c, sigma), out))
}

fn attribute_entry(
    name: &str,
    spans_in: &[LabeledSpan],
    spans_out: &[LabeledSpan],
    predicate: &AttributePredicate,
    lexicon: &CategoryLexicon,
    haldane: bool,
) -> Value {
    match attribute_log_odds(spans_in, spans_out, predicate, lexicon, haldane) {
        Ok(r) => report::log_odds_json(name, &r),
        Err(e) => json!({ "attribute": name, "error": e.to_string() }),
    }
}

fn print_attributes(entries: &[Value]) {
    println!("{:<34}{:>10}{:>12}", "Attribute", "log odds", "p");
    for e in entries {
        let name = e["attribute"].as_str().unwrap_or_default();
        match (e["log_odds"].as_f64(), e["test"]["p"].as_f64()) {
            (Some(lo), Some(p)) => {
                let stars = e["test"]["stars"].as_str().unwrap_or_default();
                println!("{name:<34}{lo:>10.3}{p:>12.4} {stars}");
            }
            _ => println!("{name:<34}{:>10}{:>12}", "-", "-"),
        }
    }
}

fn logodds(ctx: &Ctx, a: LogOddsArgs, composite: bool) -> Result<()> {
    let subcommand = if composite { "analyze-composite" } else { "analyze-logodds" };
    let out_path = a.out.clone().unwrap_or_else(|| {
        PathBuf::from(if composite { "composite.json" } else { "logodds.json" })
    });
    let mut rec = ctx.recorder(subcommand);
    let c = corpus(&a.corpus, &mut rec)?;
    let mut config = ctx.analytics(a.sigma)?;
    if a.no_haldane {
        config.haldane = false;
    }
    let lex = lexicon(a.lexicon.as_deref(), &mut rec)?;
    let (spans_in, spans_out) = populations(&c, a.label.as_deref(), &a.others, config.sigma, &mut rec)?;
    rec.config("sigma", config.sigma);
    rec.config("haldane", config.haldane);
    if let Some(l) = &a.label {
        rec.config("label", l.as_str());
    }

    let mut entries = Vec::new();
    let mut attr = |name: String, p: AttributePredicate| {
        entries.push(attribute_entry(&name, &spans_in, &spans_out, &p, &lex, config.haldane));
    };
    if composite {
        for (i, x) in RegardLabel::ALL.iter().enumerate() {
            for y in &RegardLabel::ALL[i + 1..] {
                // both poles of one dimension can never co-occur
                if i / 2 != (*y as usize) / 2 {
                    attr(format!("{x}+{y}"), AttributePredicate::Joint(*x, *y));
                }
            }
        }
        for cat in lex.categories() {
            for l in RegardLabel::ALL {
                attr(
                    format!("{l}|{}", cat.name),
                    AttributePredicate::Conditional {
                        label: l,
                        category: cat.name.clone(),
                    },
                );
            }
        }
    } else {
        for l in RegardLabel::ALL {
            attr(l.to_string(), AttributePredicate::Label(l));
        }
    }

    let mut body = json!({
        "sigma": config.sigma,
        "haldane": config.haldane,
        "n_in": spans_in.len(),
        "n_out": spans_out.len(),
        "attributes": entries,
    });
    if composite {
        if let Some(label) = &a.label {
            body["bins"] = report::bins_json(&compare_bins(&c, label, &lex)?);
        }
    }
    write(&out_path, &report::to_pretty(&body))?;
    print_attributes(body["attributes"].as_array().map(Vec::as_slice).unwrap_or_default());
    rec.output(&out_path);
    rec.finish(&out_path)?;
    Ok(())
}

fn targets(ctx: &Ctx, a: TargetsArgs) -> Result<()> {
    let mut rec = ctx.recorder("analyze-targets");
    let c = corpus(&a.corpus, &mut rec)?;
    let others = a
        .others
        .iter()
        .map(|p| corpus(p, &mut rec))
        .collect::<Result<Vec<_>>>()?;
    let mut config = ctx.analytics(None)?;
    if let Some(v) = a.min_count {
        config.min_target_count = v;
    }
    if let Some(v) = a.top {
        config.top_k_targets = v;
    }
    config.validate()?;
    rec.config("min_target_count", config.min_target_count);
    rec.config("top_k_targets", config.top_k_targets);
    let rows = target_deltas(&c, &others.iter().collect::<Vec<_>>(), &config);
    write(&a.out, &report::to_pretty(&report::targets_json(&rows)))?;
    println!("{:<24}{:>8}{:>8}{:>10}", "Target", "n_in", "n_out", "delta");
    for r in &rows {
        println!("{:<24}{:>8}{:>8}{:>10.3}", r.target, r.n_in, r.n_out, r.delta);
    }
    rec.output(&a.out);
    rec.finish(&a.out)?;
    Ok(())
}

fn pairwise(ctx: &Ctx, a: PairwiseArgs) -> Result<()> {
    let mut rec = ctx.recorder("analyze-pairwise");
    let c = corpus(&a.corpus, &mut rec)?;
    let mut config = ctx.analytics(a.sigma)?;
    if let Some(v) = a.top {
        config.top_k_pairs = v;
    }
    config.validate()?;
    let lex = lexicon(a.lexicon.as_deref(), &mut rec)?;
    let format = a
        .format
        .or_else(|| GraphFormat::from_extension(&a.out))
        .unwrap_or(GraphFormat::Dot);
    rec.config("sigma", config.sigma);
    rec.config("top_k_pairs", config.top_k_pairs);
    let graph = pairwise_themes(&c, &lex, &config);
    write(&a.out, &export_graph(&graph, format))?;
    println!("{} nodes, {} edges", graph.nodes.len(), graph.edges.len());
    rec.output(&a.out);
    rec.finish(&a.out)?;
    Ok(())
}

fn hist(ctx: &Ctx, a: HistogramArgs) -> Result<()> {
    let mut rec = ctx.recorder("histogram");
    let c = corpus(&a.corpus, &mut rec)?;
    let bins = ctx.value(a.bins, "bins", DEFAULT_BINS)?;
    let dims = if a.dim.is_empty() {
        Dimension::ALL.to_vec()
    } else {
        a.dim
            .iter()
            .map(|d| Dimension::parse(d).with_context(|| format!("unknown dimension `{d}`")))
            .collect::<Result<Vec<_>>>()?
    };
    rec.config("bins", bins);
    rec.config("dims", dims.iter().map(|d| d.code()).collect::<Vec<_>>());
    let mut csv = String::new();
    for d in dims {
        let scores: Vec<f64> = c
            .spans()
            .iter()
            .filter(|s| s.is_scored())
            .filter_map(|s| s.regard.get(d))
            .collect();
        let h = histogram(&scores, bins).with_context(|| format!("dimension {}", d.code()))?;
        let part = histogram_csv(&h, d);
        // one header for the whole file
        let body = if csv.is_empty() { &part[..] } else { part.split_once('\n').map_or("", |(_, b)| b) };
        csv.push_str(body);
    }
    write(&a.out, &csv)?;
    rec.output(&a.out);
    rec.finish(&a.out)?;
    Ok(())
}

fn serve(ctx: &Ctx, a: ServeArgs) -> Result<()> {
    let mut rec = ctx.recorder("serve");
    let mut store = AnnotationStore::open(&a.log)?;
    if let Some(p) = &a.corpus {
        store.load_corpus(corpus(p, &mut rec)?)?;
    }
    rec.config("addr", a.addr.to_string());
    let store = Arc::new(RwLock::new(store));
    let runtime = tokio::runtime::Runtime::new().context("starting the runtime")?;
    runtime.block_on(service::serve(a.addr, store))?;
    rec.output(&a.log);
    rec.finish(&a.log)?;
    Ok(())
}

fn export(ctx: &Ctx, a: ExportGraphArgs) -> Result<()> {
    let mut rec = ctx.recorder("export-graph");
    rec.input(&a.graph);
    let text = std::fs::read_to_string(&a.graph).with_context(|| format!("reading {}", a.graph.display()))?;
    let graph = graph_from_json(&text)?;
    write(&a.out, &export_graph(&graph, a.format))?;
    rec.output(&a.out);
    rec.finish(&a.out)?;
    Ok(())
}
