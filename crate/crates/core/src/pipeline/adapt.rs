use std::path::Path;
use std::time::Duration;

use super::translate::{run_shell, substitute, translate};
use super::TranslatorSpec;
use crate::corpus::{Bitext, Monotext, Origin, TokenizerConfig};
use crate::error::{Error, Result};
use crate::fda::{self, FdaConfig, Truncation};

/// Inputs for building a fine-tuning corpus tailored to one test set.
#[derive(Debug, Clone)]
pub struct AdaptationPlan {
    /// Source-language test set.
    pub test_source: Monotext,
    /// Target-language monolingual pool to select from.
    pub mono_pool: Monotext,
    pub selection_size: usize,
    /// `selection_size` here is ignored in favour of the plan's.
    pub fda_config: FdaConfig,
    pub forward_translator: TranslatorSpec,
    pub back_translator: TranslatorSpec,
    pub tokenizer: TokenizerConfig,
}

#[derive(Debug, Clone)]
pub struct AdaptationOutput {
    /// Back-translated selection paired with the selected sentences.
    pub corpus: Bitext,
    /// Machine translation of the test set used as the selection seed.
    pub seed: Monotext,
    /// Pool indices in selection order.
    pub selected: Vec<usize>,
    pub truncated: Option<Truncation>,
}

fn phase<T>(name: &'static str, r: Result<T>) -> Result<T> {
    r.map_err(|e| Error::Phase {
        phase: name,
        source: Box::new(e),
    })
}

/// Pre-translates the test set, selects pool sentences close to it and back-translates them.
pub fn adapt_to_test(plan: &AdaptationPlan) -> Result<AdaptationOutput> {
    if plan.selection_size == 0 {
        return Err(Error::InvalidConfig("selection size must be at least 1".into()));
    }
    let seed = phase(
        "pre-translation",
        translate(&plan.test_source, &plan.forward_translator, &plan.tokenizer),
    )?;

    let config = FdaConfig {
        selection_size: plan.selection_size,
        ..plan.fda_config
    };
    let selection = phase(
        "data selection",
        fda::build_seed_profile(&seed, &config).and_then(|p| fda::select(&plan.mono_pool, &p, &config)),
    )?;
    let selected = Monotext::new(
        selection
            .indices
            .iter()
            .map(|&i| plan.mono_pool.sentences[i].clone())
            .collect(),
    );

    let back = phase(
        "back-translation",
        translate(&selected, &plan.back_translator, &plan.tokenizer),
    )?;
    let corpus = phase("back-translation", Bitext::zip(back, selected, Origin::Synthetic))?;
    Ok(AdaptationOutput {
        corpus,
        seed,
        selected: selection.indices,
        truncated: selection.truncated,
    })
}

/// Runs a user-supplied trainer with `{source}` and `{target}` replaced by the corpus paths.
pub fn run_finetune_hook(template: &str, source: &Path, target: &Path, timeout: Duration) -> Result<()> {
    let command = substitute(template, &[("{source}", source), ("{target}", target)]);
    phase("fine-tuning", run_shell(&command, timeout))
}
