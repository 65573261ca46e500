use std::path::{Path, PathBuf};
use std::time::Duration;

use adaptmt::bpe::{self, BpeModel};
use adaptmt::corpus::{load_bitext, load_monotext, save_bitext, save_monotext, save_origins, write_lines};
use adaptmt::fda::{self, FdaConfig, Truncation};
use adaptmt::manifest::Manifest;
use adaptmt::metrics::{self, bootstrap_significance};
use adaptmt::pipeline::{self, AdaptationPlan, RatioFilterConfig, TranslatorSpec};
use adaptmt::{Monotext, Result, TokenizerConfig};
use serde::Serialize;
use serde_json::json;

use crate::{
    AdaptArgs, BpeCodecArgs, BpeLearnArgs, BuildHybridArgs, Cli, Command, EvaluateArgs, FdaArgs,
    FdaSelectArgs, FilterRatioArgs, GlobalArgs, RatioArgs, SignificanceArgs, TranslatorLimits,
};

pub fn run(cli: &Cli) -> Result<()> {
    let g = &cli.global;
    let tok = TokenizerConfig {
        lowercase: g.lowercase,
        ..TokenizerConfig::default()
    };
    match &cli.command {
        Command::FdaSelect(a) => fda_select(a, g, &tok),
        Command::FilterRatio(a) => filter_ratio(a, g, &tok),
        Command::BuildHybrid(a) => build_hybrid(a, g, &tok),
        Command::BpeLearn(a) => bpe_learn(a, g, &tok),
        Command::BpeApply(a) => bpe_codec("bpe-apply", a, g, &tok),
        Command::BpeDecode(a) => bpe_codec("bpe-decode", a, g, &tok),
        Command::Evaluate(a) => evaluate(a, g, &tok),
        Command::Significance(a) => significance(a, g, cli.seed, &tok),
        Command::Adapt(a) => adapt(a, g, &tok),
    }
}

fn manifest(command: &str, global: &GlobalArgs, args: impl Serialize) -> Manifest {
    Manifest::new(command, json!({ "global": global, "args": args }))
}

fn with_inputs<'a>(mut m: Manifest, paths: impl IntoIterator<Item = &'a PathBuf>) -> Result<Manifest> {
    for p in paths {
        m = m.input(p)?;
    }
    Ok(m)
}

fn with_outputs<'a>(mut m: Manifest, paths: impl IntoIterator<Item = &'a PathBuf>) -> Result<Manifest> {
    for p in paths {
        m = m.output(p)?;
    }
    Ok(m)
}

/// Writes the manifest to `--manifest-path`, else next to the primary output
/// when that is a file.
fn finish(m: Manifest, global: &GlobalArgs, primary: Option<&Path>) -> Result<()> {
    let path = global.manifest_path.clone().or_else(|| {
        primary.filter(|p| p.as_os_str() != "-").map(|p| {
            let mut s = p.as_os_str().to_owned();
            s.push(".manifest.json");
            PathBuf::from(s)
        })
    });
    match path {
        Some(p) => m.write(p),
        None => Ok(()),
    }
}

fn fda_config(a: &FdaArgs, size: usize) -> Result<FdaConfig> {
    let config = FdaConfig {
        max_order: a.order,
        decay_base: a.decay,
        selection_size: size,
    };
    config.validate()?;
    Ok(config)
}

fn ratio_config(a: &RatioArgs) -> Result<RatioFilterConfig> {
    let config = RatioFilterConfig {
        lower: a.lower,
        upper: a.upper,
    };
    config.validate()?;
    Ok(config)
}

fn translator(spec: &str, limits: &TranslatorLimits) -> Result<TranslatorSpec> {
    Ok(spec
        .parse::<TranslatorSpec>()?
        .with_limits(Duration::from_secs(limits.timeout), limits.batch_size))
}

fn truncation_warning(t: &Truncation) -> String {
    let msg = format!(
        "requested {} sentences but the pool has only {}; selected all of them",
        t.requested, t.available
    );
    eprintln!("adaptmt: warning: {msg}");
    msg
}

fn write_indices(path: &Path, indices: &[usize]) -> Result<()> {
    write_lines(path, indices.iter().map(usize::to_string))
}

fn fda_select(a: &FdaSelectArgs, g: &GlobalArgs, tok: &TokenizerConfig) -> Result<()> {
    let config = fda_config(&a.fda, a.size)?;
    let seed = load_monotext(&a.seed, tok)?;
    let pool = load_monotext(&a.pool, tok)?;
    let profile = fda::build_seed_profile(&seed, &config)?;
    let selection = fda::select(&pool, &profile, &config)?;

    write_lines(&a.out, selection.indices.iter().map(|&i| pool.sentences[i].raw()))?;
    if let Some(p) = &a.indices {
        write_indices(p, &selection.indices)?;
    }
    let mut m = with_inputs(manifest("fda-select", g, a), [&a.seed, &a.pool])?;
    m = with_outputs(m, std::iter::once(&a.out).chain(&a.indices))?.counts(json!({
        "seed_sentences": seed.len(),
        "seed_features": profile.len(),
        "pool": pool.len(),
        "selected": selection.indices.len(),
    }));
    if let Some(t) = &selection.truncated {
        m = m.warn(truncation_warning(t));
    }
    finish(m, g, Some(&a.out))
}

fn filter_ratio(a: &FilterRatioArgs, g: &GlobalArgs, tok: &TokenizerConfig) -> Result<()> {
    let config = ratio_config(&a.ratio)?;
    let bitext = load_bitext(&a.src, &a.tgt, tok)?;
    let (kept, stats) = pipeline::ratio_filter(&bitext, &config)?;
    save_bitext(&kept, &a.out_src, &a.out_tgt)?;
    eprintln!(
        "input={} kept={} removed={} empty_target={}",
        stats.input, stats.kept, stats.removed, stats.empty_target
    );
    let m = with_inputs(manifest("filter-ratio", g, a), [&a.src, &a.tgt])?;
    let m = with_outputs(m, [&a.out_src, &a.out_tgt])?.counts(stats);
    finish(m, g, Some(&a.out_tgt))
}

fn build_hybrid(a: &BuildHybridArgs, g: &GlobalArgs, tok: &TokenizerConfig) -> Result<()> {
    let filter = ratio_config(&a.ratio)?;
    let back = translator(&a.back, &a.limits)?;
    let authentic = load_bitext(&a.src, &a.tgt, tok)?;
    let (hybrid, report) = pipeline::build_hybrid(&authentic, &back, &filter, tok)?;
    save_bitext(&hybrid, &a.out_src, &a.out_tgt)?;
    if let Some(p) = &a.origins {
        save_origins(&hybrid, p)?;
    }
    eprintln!(
        "authentic_in={} synthetic_in={} authentic_removed={} synthetic_removed={} total_out={}",
        report.authentic_in,
        report.synthetic_in,
        report.authentic_removed,
        report.synthetic_removed,
        report.total_out
    );
    let m = with_inputs(manifest("build-hybrid", g, a), [&a.src, &a.tgt])?;
    let m = with_outputs(m, [&a.out_src, &a.out_tgt].into_iter().chain(&a.origins))?.counts(report);
    finish(m, g, Some(&a.out_tgt))
}

fn bpe_learn(a: &BpeLearnArgs, g: &GlobalArgs, tok: &TokenizerConfig) -> Result<()> {
    let mut sentences = Vec::new();
    for p in &a.input {
        sentences.extend(load_monotext(p, tok)?.sentences);
    }
    let corpus = Monotext::new(sentences);
    let model = bpe::learn_bpe(&corpus, a.merges)?;
    model.save(&a.out)?;
    if model.merges().len() < a.merges {
        eprintln!(
            "adaptmt: note: learned {} of {} merges; no pair occurs twice",
            model.merges().len(),
            a.merges
        );
    }
    let m = with_inputs(manifest("bpe-learn", g, a), &a.input)?;
    let m = with_outputs(m, [&a.out])?.counts(json!({
        "sentences": corpus.len(),
        "merges": model.merges().len(),
    }));
    finish(m, g, Some(&a.out))
}

fn bpe_codec(command: &str, a: &BpeCodecArgs, g: &GlobalArgs, tok: &TokenizerConfig) -> Result<()> {
    let model = BpeModel::load(&a.model)?;
    let input = load_monotext(&a.input, tok)?;
    let output = if command == "bpe-apply" {
        bpe::apply_bpe_corpus(&input, &model)
    } else {
        bpe::decode_bpe_corpus(&input, &model)?
    };
    save_monotext(&output, &a.out)?;
    let m = with_inputs(manifest(command, g, a), [&a.model, &a.input])?;
    let m = with_outputs(m, [&a.out])?.counts(json!({ "sentences": output.len() }));
    finish(m, g, Some(&a.out))
}

fn evaluate(a: &EvaluateArgs, g: &GlobalArgs, tok: &TokenizerConfig) -> Result<()> {
    let pairs = metrics::align(load_monotext(&a.hyp, tok)?, load_monotext(&a.r#ref, tok)?)?;
    let report = metrics::evaluate(&pairs)?;
    print!("{}", report.key_values());
    eprint!("{}", report.table());
    let m = with_inputs(manifest("evaluate", g, a), [&a.hyp, &a.r#ref])?.counts(json!({
        "segments": report.segment_count,
        "key_values": report.key_values(),
    }));
    finish(m, g, None)
}

fn significance(a: &SignificanceArgs, g: &GlobalArgs, seed: u64, tok: &TokenizerConfig) -> Result<()> {
    let reference = load_monotext(&a.r#ref, tok)?;
    let baseline = metrics::align(load_monotext(&a.baseline, tok)?, reference.clone())?;
    let system = metrics::align(load_monotext(&a.system, tok)?, reference)?;
    let r = bootstrap_significance(&baseline, &system, a.metric, a.resamples, seed)?;
    let f = |x| a.metric.format(x);
    let text = format!(
        "metric={}\nbaseline={}\nsystem={}\ndelta={}\np_value={:.4}\nresamples={}\nseed={}\n",
        r.metric,
        f(r.baseline_score),
        f(r.system_score),
        f(r.delta),
        r.p_value,
        r.resamples,
        seed
    );
    print!("{text}");
    let m = manifest("significance", g, json!({ "args": a, "seed": seed }));
    let m = with_inputs(m, [&a.baseline, &a.system, &a.r#ref])?.counts(r);
    finish(m, g, None)
}

fn adapt(a: &AdaptArgs, g: &GlobalArgs, tok: &TokenizerConfig) -> Result<()> {
    let plan = AdaptationPlan {
        test_source: load_monotext(&a.test, tok)?,
        mono_pool: load_monotext(&a.pool, tok)?,
        selection_size: a.size,
        fda_config: fda_config(&a.fda, a.size)?,
        forward_translator: translator(&a.forward, &a.limits)?,
        back_translator: translator(&a.back, &a.limits)?,
        tokenizer: *tok,
    };
    let out = pipeline::adapt_to_test(&plan)?;
    save_bitext(&out.corpus, &a.out_src, &a.out_tgt)?;
    if let Some(p) = &a.seed_out {
        save_monotext(&out.seed, p)?;
    }
    if let Some(p) = &a.indices {
        write_indices(p, &out.selected)?;
    }
    let mut m = with_inputs(manifest("adapt", g, a), [&a.test, &a.pool])?;
    m = with_outputs(
        m,
        [&a.out_src, &a.out_tgt]
            .into_iter()
            .chain(&a.seed_out)
            .chain(&a.indices),
    )?
    .counts(json!({
        "test": plan.test_source.len(),
        "pool": plan.mono_pool.len(),
        "selected": out.selected.len(),
        "pairs": out.corpus.len(),
    }));
    if let Some(t) = &out.truncated {
        m = m.warn(truncation_warning(t));
    }
    if let Some(cmd) = &a.finetune_cmd {
        let timeout = Duration::from_secs(a.limits.timeout);
        pipeline::run_finetune_hook(cmd, &a.out_src, &a.out_tgt, timeout)?;
    }
    finish(m, g, Some(&a.out_tgt))
}
