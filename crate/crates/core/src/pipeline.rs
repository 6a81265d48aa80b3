//! From an input file to proof targets: instrumenting source programs,
//! running the external verifier toolchain, and cutting the resulting
//! SMT-LIB script into obligations.

use std::io::ErrorKind;
use std::path::{Path, PathBuf};
use std::process::Command as Process;

use thiserror::Error;

use crate::backtranslate::{extend_name_map, to_prove_label, NameMap, ProtectionError};
use crate::dafny::{instrument, DafnyError};
use crate::sexpr::{parse_script, Command, ParseError};
use crate::vc::{extract_obligation, find_ipm_targets, segment_script, Obligation, VcError};

pub const DEFAULT_DAFNY_CMD: &str = "dafny /compile:0 /noVerify /print:{output} {input}";
pub const DEFAULT_BOOGIE_CMD: &str = "boogie /proverLog:{output} /timeLimit:1 {input}";

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PipelineOptions {
    /// Skip the toolchain and read `<stem>.smt2` next to a source input.
    pub from_smt: bool,
    pub dafny_cmd: String,
    pub boogie_cmd: String,
    /// Where to write the instrumented source; beside the input by default.
    pub emit_instrumented: Option<PathBuf>,
}

impl Default for PipelineOptions {
    fn default() -> Self {
        PipelineOptions {
            from_smt: false,
            dafny_cmd: DEFAULT_DAFNY_CMD.to_string(),
            boogie_cmd: DEFAULT_BOOGIE_CMD.to_string(),
            emit_instrumented: None,
        }
    }
}

#[derive(Debug, Error)]
pub enum PipelineError {
    #[error("{}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("{}:{error}", path.display())]
    Source { path: PathBuf, #[source] error: DafnyError },
    #[error("{}:{error}", path.display())]
    Smt { path: PathBuf, error: ParseError },
    #[error("{}: {error}", path.display())]
    Vc { path: PathBuf, error: VcError },
    #[error("{}: block {block}: {error}", path.display())]
    Names {
        path: PathBuf,
        block: usize,
        error: ProtectionError,
    },
    #[error("`{binary}` not found; install it, point {flag} at it, or pass --from-smt with a ready SMT-LIB file")]
    ToolMissing { binary: String, flag: &'static str },
    #[error("`{command}` failed ({status}):\n{stderr}")]
    ToolFailed {
        command: String,
        status: String,
        stderr: String,
    },
    #[error("{}: no {{:ipm}} proof targets found", path.display())]
    NoTargets { path: PathBuf },
    #[error("{}: expected a .dfy or .smt2 file", path.display())]
    UnsupportedInput { path: PathBuf },
}

/// One obligation to prove interactively.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Target {
    pub obligation: Obligation,
    pub names: NameMap,
    /// Source text of the annotated formula.
    pub label: Option<String>,
}

/// Everything a proof session needs from the input.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PipelineOutput {
    pub smt_path: PathBuf,
    pub options: Vec<Command>,
    pub prelude: Vec<Command>,
    pub targets: Vec<Target>,
}

fn read(path: &Path) -> Result<String, PipelineError> {
    std::fs::read_to_string(path).map_err(|source| PipelineError::Io {
        path: path.to_path_buf(),
        source,
    })
}

fn with_suffix(path: &Path, suffix: &str) -> PathBuf {
    let stem = path.file_stem().unwrap_or_default().to_string_lossy();
    path.with_file_name(format!("{stem}{suffix}"))
}

/// Runs one toolchain command template.
fn run_tool(template: &str, input: &Path, output: &Path, flag: &'static str) -> Result<(), PipelineError> {
    let args: Vec<String> = template
        .split_whitespace()
        .map(|a| {
            a.replace("{input}", &input.display().to_string())
                .replace("{output}", &output.display().to_string())
        })
        .collect();
    let Some((program, rest)) = args.split_first() else {
        return Err(PipelineError::ToolMissing {
            binary: String::new(),
            flag,
        });
    };
    log::info!("running {}", args.join(" "));
    let out = Process::new(program).args(rest).output().map_err(|e| match e.kind() {
        ErrorKind::NotFound | ErrorKind::PermissionDenied => PipelineError::ToolMissing {
            binary: program.clone(),
            flag,
        },
        _ => PipelineError::Io {
            path: PathBuf::from(program),
            source: e,
        },
    })?;
    if !output.exists() {
        return Err(PipelineError::ToolFailed {
            command: args.join(" "),
            status: out.status.to_string(),
            stderr: String::from_utf8_lossy(&out.stderr).into_owned()
                + &String::from_utf8_lossy(&out.stdout),
        });
    }
    Ok(())
}

/// Turns an input file into proof targets.
pub fn drive_pipeline(path: &Path, opts: &PipelineOptions) -> Result<PipelineOutput, PipelineError> {
    match path.extension().and_then(|e| e.to_str()) {
        Some("smt2") => load_smt(path),
        Some("dfy") => {
            let src = read(path)?;
            let instrumented = instrument(&src).map_err(|error| PipelineError::Source {
                path: path.to_path_buf(),
                error,
            })?;
            let ipm_path = opts
                .emit_instrumented
                .clone()
                .unwrap_or_else(|| with_suffix(path, ".ipm.dfy"));
            std::fs::write(&ipm_path, &instrumented).map_err(|source| PipelineError::Io {
                path: ipm_path.clone(),
                source,
            })?;
            log::info!("instrumented source written to {}", ipm_path.display());
            let smt_path = if opts.from_smt {
                with_suffix(path, ".smt2")
            } else {
                let bpl = with_suffix(&ipm_path, ".bpl");
                let smt = with_suffix(&ipm_path, ".smt2");
                run_tool(&opts.dafny_cmd, &ipm_path, &bpl, "--dafny-cmd")?;
                run_tool(&opts.boogie_cmd, &bpl, &smt, "--boogie-cmd")?;
                smt
            };
            let out = load_smt(&smt_path)?;
            if out.targets.is_empty() {
                return Err(PipelineError::NoTargets {
                    path: path.to_path_buf(),
                });
            }
            Ok(out)
        }
        _ => Err(PipelineError::UnsupportedInput {
            path: path.to_path_buf(),
        }),
    }
}

/// Reads an SMT-LIB script and extracts its proof targets.
pub fn load_smt(path: &Path) -> Result<PipelineOutput, PipelineError> {
    let text = read(path)?;
    let mut out = targets_from_smt(&text).map_err(|e| match e {
        PipelineError::Smt { error, .. } => PipelineError::Smt {
            path: path.to_path_buf(),
            error,
        },
        PipelineError::Vc { error, .. } => PipelineError::Vc {
            path: path.to_path_buf(),
            error,
        },
        PipelineError::Names { block, error, .. } => PipelineError::Names {
            path: path.to_path_buf(),
            block,
            error,
        },
        PipelineError::NoTargets { .. } => PipelineError::NoTargets {
            path: path.to_path_buf(),
        },
        other => other,
    })?;
    out.smt_path = path.to_path_buf();
    Ok(out)
}

/// Extracts proof targets from SMT-LIB text, in file order.
pub fn targets_from_smt(text: &str) -> Result<PipelineOutput, PipelineError> {
    let path = PathBuf::from("<input>");
    let commands = parse_script(text).map_err(|error| PipelineError::Smt {
        path: path.clone(),
        error,
    })?;
    let split = segment_script(&commands).map_err(|error| PipelineError::Vc {
        path: path.clone(),
        error,
    })?;
    let obligations = split
        .blocks
        .iter()
        .map(extract_obligation)
        .collect::<Result<Vec<_>, _>>()
        .map_err(|error| PipelineError::Vc {
            path: path.clone(),
            error,
        })?;
    let mut targets = Vec::new();
    for ob in find_ipm_targets(obligations) {
        let mut names = NameMap::new();
        for t in ob.raw_hypotheses.iter().chain(std::iter::once(&ob.raw_goal)) {
            extend_name_map(&mut names, t).map_err(|error| PipelineError::Names {
                path: path.clone(),
                block: ob.block,
                error,
            })?;
        }
        let label = to_prove_label(&ob.raw_goal);
        targets.push(Target {
            obligation: ob,
            names,
            label,
        });
    }
    if targets.is_empty() {
        return Err(PipelineError::NoTargets { path });
    }
    Ok(PipelineOutput {
        smt_path: path,
        options: split.options,
        prelude: split.prelude,
        targets,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn fixture(name: &str) -> PathBuf {
        Path::new(env!("CARGO_MANIFEST_DIR")).join("fixtures").join(name)
    }

    #[test]
    fn triangle_fixture_has_one_target() {
        let out = load_smt(&fixture("triangle_sum_even.smt2")).unwrap();
        assert_eq!(out.targets.len(), 1);
        let t = &out.targets[0];
        assert_eq!(t.label.as_deref(), Some("x * (x + 1) % 2 == 0"));
        assert_eq!(t.names.resolve("x"), Some("x#0@@1"));
    }

    #[test]
    fn two_targets_in_file_order() {
        let out = load_smt(&fixture("two_targets.smt2")).unwrap();
        assert_eq!(out.targets.len(), 2);
        assert!(out.targets[0].obligation.block < out.targets[1].obligation.block);
    }

    #[test]
    fn stock_script_has_no_targets() {
        let err = load_smt(&fixture("triangle_sum_even.stock.smt2")).unwrap_err();
        assert!(matches!(err, PipelineError::NoTargets { .. }), "{err}");
    }

    #[test]
    fn source_without_annotation_is_rejected() {
        let dir = tempfile::tempdir().unwrap();
        let src = dir.path().join("p.dfy");
        std::fs::copy(fixture("placeholder.dfy"), &src).unwrap();
        std::fs::copy(fixture("triangle_sum_even.stock.smt2"), dir.path().join("p.smt2")).unwrap();
        let opts = PipelineOptions {
            from_smt: true,
            ..PipelineOptions::default()
        };
        let err = drive_pipeline(&src, &opts).unwrap_err();
        assert!(matches!(err, PipelineError::NoTargets { .. }), "{err}");
        assert!(dir.path().join("p.ipm.dfy").exists());
    }

    #[test]
    fn missing_toolchain_is_named() {
        let dir = tempfile::tempdir().unwrap();
        let src = dir.path().join("t.dfy");
        std::fs::copy(fixture("triangle_sum_even.dfy"), &src).unwrap();
        let opts = PipelineOptions {
            dafny_cmd: "definitely-not-dafny-xyz {input} {output}".into(),
            ..PipelineOptions::default()
        };
        let err = drive_pipeline(&src, &opts).unwrap_err();
        let msg = err.to_string();
        assert!(msg.contains("definitely-not-dafny-xyz") && msg.contains("--from-smt"), "{msg}");
    }

    #[test]
    fn toolchain_templates_are_substituted() {
        let dir = tempfile::tempdir().unwrap();
        let src = dir.path().join("t.dfy");
        std::fs::copy(fixture("triangle_sum_even.dfy"), &src).unwrap();
        let smt = fixture("triangle_sum_even.smt2");
        let opts = PipelineOptions {
            dafny_cmd: "cp {input} {output}".into(),
            boogie_cmd: format!("cp {} {{output}}", smt.display()),
            ..PipelineOptions::default()
        };
        let out = drive_pipeline(&src, &opts).unwrap();
        assert_eq!(out.targets.len(), 1);
        assert!(dir.path().join("t.ipm.bpl").exists());
    }
}
