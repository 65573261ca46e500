use std::collections::HashMap;
use std::fmt;
use std::io::Read;
use std::path::{Path, PathBuf};
use std::process::{Command, Stdio};
use std::str::FromStr;
use std::time::{Duration, Instant};

use crate::corpus::{self, Monotext, Sentence, TokenizerConfig};
use crate::error::{Error, Result};

pub const DEFAULT_BATCH_SIZE: usize = 10_000;
pub const DEFAULT_TIMEOUT: Duration = Duration::from_secs(3600);

/// How to obtain translations. Every translator must return exactly one
/// output line per input line, in order.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum TranslatorSpec {
    /// Shell command template with `{input}` and `{output}` file placeholders.
    ExternalCommand {
        template: String,
        timeout: Duration,
        batch_size: usize,
    },
    PretranslatedFile {
        path: PathBuf,
    },
    IdentityMock,
    /// Token-by-token lookup in a two-column lexicon file; unknown tokens pass through.
    DictionaryMock {
        path: PathBuf,
    },
}

impl TranslatorSpec {
    pub fn command(template: impl Into<String>) -> Self {
        TranslatorSpec::ExternalCommand {
            template: template.into(),
            timeout: DEFAULT_TIMEOUT,
            batch_size: DEFAULT_BATCH_SIZE,
        }
    }

    /// Overrides timeout and batch size of an external command; no-op for other kinds.
    pub fn with_limits(self, timeout: Duration, batch: usize) -> Self {
        match self {
            TranslatorSpec::ExternalCommand { template, .. } => TranslatorSpec::ExternalCommand {
                template,
                timeout,
                batch_size: batch,
            },
            other => other,
        }
    }
}

impl fmt::Display for TranslatorSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            TranslatorSpec::ExternalCommand { template, .. } => write!(f, "cmd:{template}"),
            TranslatorSpec::PretranslatedFile { path } => write!(f, "file:{}", path.display()),
            TranslatorSpec::IdentityMock => f.write_str("identity"),
            TranslatorSpec::DictionaryMock { path } => write!(f, "dict:{}", path.display()),
        }
    }
}

/// Parses `identity`, `dict:PATH`, `file:PATH` or `cmd:TEMPLATE`.
impl FromStr for TranslatorSpec {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        if s == "identity" {
            return Ok(TranslatorSpec::IdentityMock);
        }
        match s.split_once(':') {
            Some(("dict", p)) if !p.is_empty() => Ok(TranslatorSpec::DictionaryMock { path: p.into() }),
            Some(("file", p)) if !p.is_empty() => Ok(TranslatorSpec::PretranslatedFile { path: p.into() }),
            Some(("cmd", t)) if !t.is_empty() => Ok(TranslatorSpec::command(t)),
            _ => Err(Error::InvalidConfig(format!(
                "unknown translator {s:?} (expected identity, dict:PATH, file:PATH or cmd:TEMPLATE)"
            ))),
        }
    }
}

pub fn load_lexicon(path: &Path) -> Result<HashMap<String, String>> {
    let mut lexicon = HashMap::new();
    for (i, line) in corpus::read_lines(path)?.iter().enumerate() {
        let mut fields = line.split_whitespace();
        match (fields.next(), fields.next(), fields.next()) {
            (None, ..) => {}
            (Some(src), Some(tgt), None) => {
                lexicon.insert(src.to_owned(), tgt.to_owned());
            }
            _ => {
                return Err(Error::Format(format!(
                    "{}:{}: expected `source target`",
                    path.display(),
                    i + 1
                )))
            }
        }
    }
    Ok(lexicon)
}

pub fn translate(
    input: &Monotext,
    translator: &TranslatorSpec,
    config: &TokenizerConfig,
) -> Result<Monotext> {
    match translator {
        TranslatorSpec::IdentityMock => Ok(input.clone()),
        TranslatorSpec::DictionaryMock { path } => {
            let lexicon = load_lexicon(path)?;
            Ok(input
                .iter()
                .map(|s| {
                    Sentence::from_tokens(s.tokens().iter().map(|t| lexicon.get(t).unwrap_or(t).clone()))
                })
                .collect())
        }
        TranslatorSpec::PretranslatedFile { path } => {
            let output = corpus::load_monotext(path, config)?;
            check_contract(input.len(), output.len())?;
            Ok(output)
        }
        TranslatorSpec::ExternalCommand {
            template,
            timeout,
            batch_size,
        } => {
            if *batch_size == 0 {
                return Err(Error::InvalidConfig(
                    "translator batch size must be positive".into(),
                ));
            }
            let dir = tempfile::tempdir().map_err(|e| Error::io(std::env::temp_dir(), e))?;
            let mut out = Vec::with_capacity(input.len());
            for (b, batch) in input.sentences.chunks(*batch_size).enumerate() {
                let in_path = dir.path().join(format!("batch{b}.in"));
                let out_path = dir.path().join(format!("batch{b}.out"));
                corpus::write_lines(&in_path, batch.iter().map(Sentence::raw))?;
                let command = substitute(template, &[("{input}", &in_path), ("{output}", &out_path)]);
                run_shell(&command, *timeout)?;
                let translated = corpus::load_monotext(&out_path, config)?;
                check_contract(batch.len(), translated.len())?;
                out.extend(translated.sentences);
            }
            Ok(Monotext::new(out))
        }
    }
}

fn check_contract(expected: usize, actual: usize) -> Result<()> {
    if expected == actual {
        Ok(())
    } else {
        Err(Error::ContractViolation { expected, actual })
    }
}

fn shell_quote(path: &Path) -> String {
    format!("'{}'", path.display().to_string().replace('\'', r"'\''"))
}

pub(crate) fn substitute(template: &str, vars: &[(&str, &Path)]) -> String {
    vars.iter()
        .fold(template.to_owned(), |acc, (k, p)| acc.replace(k, &shell_quote(p)))
}

/// Runs `command` through `sh -c`, failing on nonzero exit or timeout.
pub(crate) fn run_shell(command: &str, timeout: Duration) -> Result<()> {
    let mut child = Command::new("sh")
        .arg("-c")
        .arg(command)
        .stdin(Stdio::null())
        .stdout(Stdio::null())
        .stderr(Stdio::piped())
        .spawn()
        .map_err(|e| Error::CommandFailed {
            command: command.to_owned(),
            status: "spawn failed".into(),
            stderr: e.to_string(),
        })?;
    let mut stderr = child.stderr.take().expect("piped stderr");
    let reader = std::thread::spawn(move || {
        let mut buf = String::new();
        let _ = stderr.read_to_string(&mut buf);
        buf
    });

    let deadline = Instant::now() + timeout;
    let status = loop {
        match child.try_wait() {
            Ok(Some(status)) => break status,
            Ok(None) if Instant::now() >= deadline => {
                let _ = child.kill();
                let _ = child.wait();
                return Err(Error::Timeout {
                    command: command.to_owned(),
                    seconds: timeout.as_secs(),
                });
            }
            Ok(None) => std::thread::sleep(Duration::from_millis(5)),
            Err(e) => {
                return Err(Error::CommandFailed {
                    command: command.to_owned(),
                    status: "wait failed".into(),
                    stderr: e.to_string(),
                })
            }
        }
    };
    let stderr = reader.join().unwrap_or_default();
    if status.success() {
        Ok(())
    } else {
        Err(Error::CommandFailed {
            command: command.to_owned(),
            status: status.to_string(),
            stderr: stderr.trim_end().to_owned(),
        })
    }
}
