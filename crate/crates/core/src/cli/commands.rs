use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use super::{Command, DfArgs, EvalArgs, GenerateArgs, IngestArgs, MixArgs, TrainArgs};
use crate::artifact::ArtifactHeader;
use crate::corpus::{
    load_pairs, synthesize_corpora, write_pairs, ContextResponsePair, CorpusEntry, CorpusId, CorpusRegistry,
    Stopwords, SyntheticSpec, TokenizerConfig, Vocabulary, UNK,
};
use crate::eval::{
    build_report, perplexity, read_responses, write_responses, ReportInputs, ResponseFile, ResponseSet,
    ScoreUnit, ScoringTable, SystemInput, TestSetInput, RESPONSES_KIND, RESPONSES_VERSION,
};
use crate::mixing::{concatenate_sizes, interleave_sizes, MixMode, MixedDataset};
use crate::model::{
    encode_corpora, generate, load_checkpoint, save_checkpoint, train, CheckpointMeta, LossWeights, Method,
    TrainConfig,
};
use crate::stats::{
    build_freq_tables, compute_alpha_df, compute_df, compute_tfidf, fmt_value, read_df_tsv, write_df_tsv, LoadedDf,
};
use crate::{Error, Result};

pub(super) fn dispatch(command: Command) -> Result<()> {
    match command {
        Command::Ingest(a) => ingest(&a),
        Command::Mix(a) => mix(&a),
        Command::Df(a) => df(&a),
        Command::Train(a) => train_cmd(&a),
        Command::Generate(a) => generate_cmd(&a),
        Command::Eval(a) => eval(&a),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Split {
    Train,
    Test,
}

impl Split {
    fn parse(s: &str) -> Result<Self> {
        match s {
            "train" => Ok(Split::Train),
            "test" => Ok(Split::Test),
            _ => Err(Error::InvalidArgument(format!("split must be train or test, got {s:?}"))),
        }
    }

    fn as_str(self) -> &'static str {
        match self {
            Split::Train => "train",
            Split::Test => "test",
        }
    }
}

fn name_path(spec: &str) -> Result<(String, PathBuf)> {
    spec.split_once('=')
        .map(|(n, p)| (n.to_string(), PathBuf::from(p)))
        .ok_or_else(|| Error::InvalidArgument(format!("expected NAME=PATH, got {spec:?}")))
}

fn parse_synthetic(spec: &str) -> Result<(usize, usize)> {
    let parsed = spec
        .split_once(['x', 'X'])
        .and_then(|(n, p)| Some((n.parse().ok()?, p.parse().ok()?)));
    match parsed {
        Some((n, p)) if n > 0 && p > 0 => Ok((n, p)),
        _ => Err(Error::InvalidArgument(format!("expected DOMAINSxPAIRS, got {spec:?}"))),
    }
}

fn pair_header(registry_seed: u64, vocab: &str, corpus: &str, split: Split) -> ArtifactHeader {
    ArtifactHeader::new("pairs", 1)
        .with("corpus", corpus)
        .with("seed", registry_seed)
        .with("split", split.as_str())
        .with("vocab", vocab)
}

fn ingest(a: &IngestArgs) -> Result<()> {
    let tokenizer = TokenizerConfig {
        lowercase: !a.no_lowercase,
        strip_punctuation: !a.keep_punctuation,
    };
    let stopwords = match &a.stopwords {
        Some(p) => Stopwords::load(p)?,
        None => Stopwords::bundled(),
    };

    let (ids, train_sets, test_sets): (Vec<CorpusId>, Vec<Vec<ContextResponsePair>>, Vec<Option<Vec<ContextResponsePair>>>) =
        if let Some(spec) = &a.synthetic {
            let (n, pairs) = parse_synthetic(spec)?;
            let test_pairs = a.test_pairs.unwrap_or((pairs / 4).max(1));
            let mut synth = SyntheticSpec::standard(n, pairs + test_pairs, a.seed);
            synth.keyword_ratio = a.keyword_ratio;
            let names: Vec<String> = synth.domains.iter().map(|d| d.name.clone()).collect();
            let ids = CorpusRegistry::corpus_ids(&names)?;
            let mut train = Vec::new();
            let mut test = Vec::new();
            for mut c in synthesize_corpora(&synth)? {
                let held = c.split_off(pairs);
                train.push(c);
                test.push((!held.is_empty()).then_some(held));
            }
            (ids, train, test)
        } else {
            if a.corpus.is_empty() {
                return Err(Error::InvalidArgument("give --synthetic or at least one --corpus".into()));
            }
            let specs: Vec<(String, PathBuf)> = a.corpus.iter().map(|s| name_path(s)).collect::<Result<_>>()?;
            let names: Vec<String> = specs.iter().map(|(n, _)| n.clone()).collect();
            let ids = CorpusRegistry::corpus_ids(&names)?;
            let mut tests: BTreeMap<String, PathBuf> = BTreeMap::new();
            for s in &a.test {
                let (n, p) = name_path(s)?;
                if !names.contains(&n) {
                    return Err(Error::InvalidArgument(format!("--test names unknown corpus {n:?}")));
                }
                if tests.insert(n.clone(), p).is_some() {
                    return Err(Error::Spec(format!("duplicate test file for {n:?}")));
                }
            }
            let mut train = Vec::new();
            let mut test = Vec::new();
            for (id, (_, path)) in ids.iter().zip(&specs) {
                let loaded = load_pairs(path, id, tokenizer)?;
                println!("{}: {} train pairs, {} skipped", id.name, loaded.pairs.len(), loaded.skipped);
                train.push(loaded.pairs);
                test.push(match tests.get(&id.name) {
                    Some(p) => {
                        let loaded = load_pairs(p, id, tokenizer)?;
                        println!("{}: {} test pairs, {} skipped", id.name, loaded.pairs.len(), loaded.skipped);
                        Some(loaded.pairs)
                    }
                    None => None,
                });
            }
            (ids, train, test)
        };

    let vocabulary = Vocabulary::build(
        train_sets.iter().flatten().chain(test_sets.iter().flatten().flatten()),
        a.max_vocab,
    );
    let vocab = vocabulary.hash();
    std::fs::create_dir_all(&a.out).map_err(|e| Error::io(&a.out, e))?;
    let mut corpora = Vec::new();
    for ((id, train), test) in ids.into_iter().zip(&train_sets).zip(&test_sets) {
        let train_file = format!("{}.train.jsonl", id.name);
        write_pairs(&a.out.join(&train_file), train, &id.name, &pair_header(a.seed, &vocab, &id.name, Split::Train))?;
        let test_file = match test {
            Some(pairs) => {
                let f = format!("{}.test.jsonl", id.name);
                write_pairs(&a.out.join(&f), pairs, &id.name, &pair_header(a.seed, &vocab, &id.name, Split::Test))?;
                Some(f)
            }
            None => None,
        };
        corpora.push(CorpusEntry {
            id,
            train_pairs: train.len(),
            test_pairs: test.as_ref().map_or(0, Vec::len),
            train_file: Some(train_file),
            test_file,
        });
    }
    let registry = CorpusRegistry {
        corpora,
        vocabulary,
        stopwords,
        tokenizer,
        seed: a.seed,
    };
    let path = a.out.join("registry.json");
    registry.save(&path)?;
    println!(
        "wrote {} ({} corpora, {} vocabulary entries, vocab {vocab})",
        path.display(),
        registry.num_corpora(),
        registry.vocabulary.len()
    );
    Ok(())
}

/// Loads one split of every corpus, in corpus order.
fn load_split(registry: &CorpusRegistry, path: &Path, split: Split) -> Result<Vec<Vec<ContextResponsePair>>> {
    let vocab = registry.vocab_hash();
    registry
        .corpora
        .iter()
        .map(|c| {
            let file = match split {
                Split::Train => &c.train_file,
                Split::Test => &c.test_file,
            };
            let file = file.as_ref().ok_or_else(|| {
                Error::InvalidArgument(format!("corpus {} has no {} pairs", c.id.name, split.as_str()))
            })?;
            let file_path = CorpusRegistry::resolve(path, file);
            let loaded = load_pairs(&file_path, &c.id, registry.tokenizer)?;
            if let Some(h) = &loaded.header {
                h.expect_vocab(&vocab, &file_path.display().to_string())?;
            }
            Ok(loaded.pairs)
        })
        .collect()
}

/// Replaces out-of-vocabulary tokens by `<unk>`.
fn restrict_to_vocab(vocab: &Vocabulary, corpora: &[Vec<ContextResponsePair>]) -> Vec<Vec<ContextResponsePair>> {
    let unk = vocab.token(UNK).expect("reserved token").to_string();
    let map = |ts: &[String]| -> Vec<String> {
        ts.iter()
            .map(|t| if vocab.contains(t) { t.clone() } else { unk.clone() })
            .collect()
    };
    corpora
        .iter()
        .map(|c| {
            c.iter()
                .map(|p| ContextResponsePair::new(map(&p.context), map(&p.response), p.corpus))
                .collect()
        })
        .collect()
}

fn default_mix(method: Method, sizes: &[usize], seed: u64) -> Result<MixedDataset> {
    if method == Method::Concatenated {
        let order: Vec<usize> = (0..sizes.len()).collect();
        concatenate_sizes(sizes, &order).map(|m| MixedDataset { seed, ..m })
    } else {
        interleave_sizes(sizes, seed, false)
    }
}

fn mix(a: &MixArgs) -> Result<()> {
    let registry = CorpusRegistry::load(&a.registry)?;
    let mode: MixMode = a.mode.parse()?;
    let sizes: Vec<usize> = registry.corpora.iter().map(|c| c.train_pairs).collect();
    let mixed = match mode {
        MixMode::Concatenated => {
            let order = match &a.order {
                Some(names) => names
                    .split(',')
                    .map(|n| {
                        registry
                            .corpus(n.trim())
                            .map(|c| c.index)
                            .ok_or_else(|| Error::InvalidArgument(format!("unknown corpus {n:?}")))
                    })
                    .collect::<Result<Vec<_>>>()?,
                None => (0..sizes.len()).collect(),
            };
            MixedDataset {
                seed: a.seed,
                ..concatenate_sizes(&sizes, &order)?
            }
        }
        MixMode::Interleaved => {
            if a.order.is_some() {
                return Err(Error::InvalidArgument("--order applies to concatenated mode only".into()));
            }
            interleave_sizes(&sizes, a.seed, a.cycle)?
        }
    };
    let header = ArtifactHeader::new("mix", 1).with("vocab", registry.vocab_hash());
    mixed.write(&a.out, header)?;
    println!("wrote {} ({} entries, {mode})", a.out.display(), mixed.len());
    Ok(())
}

fn df(a: &DfArgs) -> Result<()> {
    let registry = CorpusRegistry::load(&a.registry)?;
    let scope = Split::parse(&a.scope)?;
    let pairs = restrict_to_vocab(&registry.vocabulary, &load_split(&registry, &a.registry, scope)?);
    let tables = build_freq_tables(&pairs)?;
    let df = compute_df(&tables)?;
    let alpha = compute_alpha_df(&df, a.alpha)?;
    let names = registry.names();
    let header = ArtifactHeader::new("df", 1)
        .with("scope", scope.as_str())
        .with("seed", a.seed)
        .with("vocab", registry.vocab_hash());
    write_df_tsv(&a.out, &df, &alpha, &names, header)?;
    println!("wrote {} ({} words, scope {})", a.out.display(), df.words().len(), scope.as_str());

    if let Some(out) = &a.tfidf_out {
        let tfidf = compute_tfidf(&tables)?;
        let mut text = ArtifactHeader::new("tfidf", 1)
            .with("scope", scope.as_str())
            .with("seed", a.seed)
            .with("vocab", registry.vocab_hash())
            .render();
        text.push_str("word\tcorpus\ttfidf\tpercent\n");
        for (r, &c) in tfidf.corpora.iter().enumerate() {
            let mut rows: Vec<(&String, f64)> = tfidf.percent[r].iter().map(|(w, &p)| (w, p)).collect();
            rows.sort_by(|x, y| y.1.total_cmp(&x.1).then_with(|| x.0.cmp(y.0)));
            for (w, p) in rows {
                let _ = writeln!(text, "{w}\t{}\t{}\t{}", names[c], fmt_value(tfidf.raw[r][w]), fmt_value(p));
            }
        }
        std::fs::write(out, text).map_err(|e| Error::io(out, e))?;
        println!("wrote {}", out.display());
    }
    Ok(())
}

/// Reads a DF table and checks it against the registry's vocabulary and
/// corpus names.
fn load_df_for(registry: &CorpusRegistry, path: &Path) -> Result<LoadedDf> {
    let loaded = read_df_tsv(path)?;
    loaded
        .header
        .expect_vocab(&registry.vocab_hash(), &path.display().to_string())?;
    for (&id, name) in loaded.df.corpora().iter().zip(&loaded.names) {
        if registry.corpus(name).map(|c| c.index) != Some(id) {
            return Err(Error::InvalidArgument(format!(
                "{}: corpus {name:?} (id {id}) is not in the registry",
                path.display()
            )));
        }
    }
    Ok(loaded)
}

fn train_cmd(a: &TrainArgs) -> Result<()> {
    let method: Method = a.method.parse()?;
    let registry = CorpusRegistry::load(&a.registry)?;
    let vocab_hash = registry.vocab_hash();
    if method == Method::Weighted && a.df_table.is_none() {
        return Err(Error::MissingDfTable);
    }
    let df = a.df_table.as_ref().map(|p| load_df_for(&registry, p)).transpose()?;
    let pairs = load_split(&registry, &a.registry, Split::Train)?;
    let encoded = encode_corpora(&registry.vocabulary, &pairs);
    let sizes: Vec<usize> = encoded.iter().map(Vec::len).collect();

    let mixed = match &a.mix {
        Some(p) => {
            let (m, header) = MixedDataset::read(p)?;
            header.expect_vocab(&vocab_hash, &p.display().to_string())?;
            let expected = if method == Method::Concatenated {
                MixMode::Concatenated
            } else {
                MixMode::Interleaved
            };
            if matches!(method, Method::Concatenated | Method::Interleaved) && m.mode != expected {
                return Err(Error::InvalidArgument(format!("{method} training needs a {expected} order")));
            }
            m
        }
        None => default_mix(method, &sizes, a.seed)?,
    };

    let config = TrainConfig {
        method,
        dim: a.dim,
        corpus_dim: a.corpus_dim,
        learning_rate: a.lr,
        clip: a.clip,
        epochs: a.epochs,
        batch_size: a.batch_size,
        seed: a.seed,
        init_scale: a.init_scale,
        end_token_weight: a.end_weight,
        reshuffle_each_epoch: a.reshuffle,
        ..TrainConfig::default()
    };
    let weights = match (&df, method) {
        (Some(d), Method::Weighted) => Some(LossWeights::from_df(
            &d.df,
            &registry.vocabulary,
            registry.num_corpora(),
            a.end_weight,
        )?),
        _ => None,
    };
    let out = train(&encoded, registry.vocabulary.len(), &mixed, &config, weights.as_ref())?;

    let mut meta = CheckpointMeta::new(out.params.dims, method, a.seed, &vocab_hash);
    let extra = [
        ("epochs", a.epochs.to_string()),
        ("learning_rate", a.lr.to_string()),
        ("clip", a.clip.to_string()),
        ("batch_size", a.batch_size.to_string()),
        ("mix", mixed.mode.to_string()),
        ("initial_loss", fmt_value(out.log.initial_loss)),
        ("final_loss", fmt_value(out.log.final_loss)),
    ];
    meta.extra.extend(extra.into_iter().map(|(k, v)| (k.to_string(), v)));
    if let Some(d) = &df {
        meta.extra.insert("df_scope".into(), d.header.get("scope").unwrap_or("-").to_string());
        meta.extra.insert("end_weight".into(), a.end_weight.to_string());
    }
    save_checkpoint(&a.out, &meta, &out.params)?;
    println!(
        "{method}: loss {:.4} -> {:.4} over {} epochs; wrote {}",
        out.log.initial_loss,
        out.log.final_loss,
        a.epochs,
        a.out.display()
    );
    Ok(())
}

fn generate_cmd(a: &GenerateArgs) -> Result<()> {
    let registry = CorpusRegistry::load(&a.registry)?;
    let ckpt = load_checkpoint(&a.checkpoint)?;
    let vocab_hash = registry.vocab_hash();
    if ckpt.meta.vocab_hash != vocab_hash {
        return Err(Error::VocabMismatch {
            expected: vocab_hash,
            found: ckpt.meta.vocab_hash.clone(),
            context: a.checkpoint.display().to_string(),
        });
    }
    if ckpt.params.dims.vocab != registry.vocabulary.len() || ckpt.params.dims.corpora != registry.num_corpora() {
        return Err(Error::InvalidArgument("checkpoint dimensions do not match the registry".into()));
    }
    let method = ckpt.meta.method()?;
    if method.needs_label_at_generation() && !a.labels {
        return Err(Error::MissingCorpusEmbedding);
    }
    if a.labels && !method.needs_label_at_generation() {
        return Err(Error::InvalidArgument(format!("{method} models take no corpus labels")));
    }
    let split = Split::parse(&a.split)?;
    let pairs = load_split(&registry, &a.registry, split)?;
    let encoded = encode_corpora(&registry.vocabulary, &pairs);

    let name = a.name.clone().unwrap_or_else(|| method.to_string());
    let mut header = ArtifactHeader::new(RESPONSES_KIND, RESPONSES_VERSION)
        .with("method", method)
        .with("seed", ckpt.meta.seed)
        .with("split", split.as_str())
        .with("system", &name)
        .with("vocab", &vocab_hash);
    let mut sets = Vec::new();
    for (c, entry) in registry.corpora.iter().enumerate() {
        let mut responses = Vec::with_capacity(encoded[c].len());
        for p in &encoded[c] {
            let label = a.labels.then_some(p.corpus);
            let ids = generate(&ckpt.params, &p.context, method, label, a.max_len)?;
            responses.push(registry.vocabulary.decode(&ids));
        }
        let examples: Vec<_> = encoded[c].iter().map(|p| p.example()).collect();
        let ppl = perplexity(&ckpt.params, &examples, method)?;
        header = header.with(&format!("ppl.{}", entry.id.name), fmt_value(ppl));
        sets.push(ResponseSet {
            corpus: entry.id.name.clone(),
            responses,
        });
    }
    let count: usize = sets.iter().map(|s| s.responses.len()).sum();
    write_responses(&a.out, &ResponseFile { header, sets })?;
    println!("wrote {} ({count} responses, {name})", a.out.display());
    Ok(())
}

fn eval(a: &EvalArgs) -> Result<()> {
    let registry = CorpusRegistry::load(&a.registry)?;
    let vocab_hash = registry.vocab_hash();
    let unit: ScoreUnit = a.unit.parse()?;
    let split = Split::parse(&a.split)?;
    if a.responses.is_empty() && !a.references {
        return Err(Error::InvalidArgument("give --responses or --references".into()));
    }
    let stopwords = match &a.stopwords {
        Some(p) => Stopwords::load(p)?,
        None => registry.stopwords.clone(),
    };
    let refs = load_split(&registry, &a.registry, split)?;
    let test_sets: Vec<TestSetInput> = registry
        .corpora
        .iter()
        .zip(&refs)
        .map(|(c, pairs)| TestSetInput {
            name: c.id.name.clone(),
            references: pairs.iter().map(|p| p.response.clone()).collect(),
        })
        .collect();

    let mut systems = Vec::new();
    if a.references {
        systems.push(SystemInput {
            name: "reference".into(),
            method: None,
            vocab_hash: vocab_hash.clone(),
            responses: test_sets.iter().map(|t| t.references.clone()).collect(),
            perplexity: vec![None; test_sets.len()],
        });
    }
    for path in &a.responses {
        let file = read_responses(path)?;
        let found = file.header.require("vocab")?.to_string();
        let name = file
            .header
            .get("system")
            .or(file.header.get("method"))
            .unwrap_or("system")
            .to_string();
        if systems.iter().any(|s: &SystemInput| s.name == name) {
            return Err(Error::InvalidArgument(format!("duplicate system name {name:?}")));
        }
        let mut responses = Vec::new();
        let mut ppl = Vec::new();
        for t in &test_sets {
            let set = file.set(&t.name).ok_or_else(|| {
                Error::InvalidArgument(format!("{} has no responses for {}", path.display(), t.name))
            })?;
            responses.push(set.responses.clone());
            ppl.push(file.perplexity(&t.name));
        }
        systems.push(SystemInput {
            name,
            method: file.header.get("method").map(str::to_string),
            vocab_hash: found,
            responses,
            perplexity: ppl,
        });
    }

    let tables: Vec<LoadedDf> = a.df.iter().map(|p| load_df_for(&registry, p)).collect::<Result<_>>()?;
    let provenances: Vec<String> = tables
        .iter()
        .map(|t| t.header.get("scope").unwrap_or("df").to_string())
        .collect();
    for (i, p) in provenances.iter().enumerate() {
        if provenances[..i].contains(p) {
            return Err(Error::InvalidArgument(format!("two DF tables with provenance {p:?}")));
        }
    }
    let alphas: Vec<String> = tables.iter().map(|t| t.alpha.alpha.to_string()).collect();
    let scoring_tables: Vec<ScoringTable> = tables
        .iter()
        .zip(&provenances)
        .map(|(t, p)| ScoringTable {
            provenance: p,
            table: &t.alpha,
            vocab_hash: t.header.get("vocab").unwrap_or(""),
        })
        .collect();
    let scoring: Vec<(usize, String)> = registry.corpora.iter().map(|c| (c.id.index, c.id.name.clone())).collect();

    let mut metadata = BTreeMap::new();
    metadata.insert("alpha".to_string(), alphas.join(","));
    metadata.insert("seed".to_string(), a.seed.to_string());
    metadata.insert("split".to_string(), split.as_str().to_string());
    let report = build_report(&ReportInputs {
        vocab_hash: &vocab_hash,
        systems: &systems,
        test_sets: &test_sets,
        tables: &scoring_tables,
        scoring: &scoring,
        stopwords: &stopwords,
        unit,
        metadata,
    })?;
    report.write(&a.out)?;
    println!(
        "wrote {} ({} systems x {} test sets)",
        a.out.display(),
        report.rows.len(),
        report.test_sets.len()
    );
    Ok(())
}
