//! The `mrl` command line.

use std::ffi::OsString;
use std::io::{Read, Write};
use std::path::PathBuf;

use clap::{Parser, Subcommand, ValueEnum};

use crate::ambiguity::{Checker, DEFAULT_BOUND};
use crate::dsl::{parse_file, Definition, SourceFile, Value};
use crate::lens::{evaluate, typecheck_with, Direction, EvalError, Typed};
use crate::mre::{alpha_rename, readable_names, LensTypeEnv, Mre, RegexTypeEnv, RegexValueEnv};
use crate::mrras::compile;
use crate::oracle::{enumerate_regex, sorted_shortlex};
use crate::sre::mre_to_sre;

pub const EXIT_OK: u8 = 0;
pub const EXIT_REJECT: u8 = 1;
pub const EXIT_ERROR: u8 = 2;

const BOUND_VAR: &str = "MRL_ORACLE_BOUND";

#[derive(Parser, Debug)]
#[command(name = "mrl", version, about = "Match-reference regexes and lenses")]
struct Args {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand, Debug)]
enum Cmd {
    /// Decide whether input belongs to a regex.
    Match {
        file: PathBuf,
        /// Definition to use; defaults to the one marked main.
        name: Option<String>,
        /// Input string; read from stdin when absent.
        #[arg(long, short)]
        input: Option<String>,
        /// Match every line separately.
        #[arg(long)]
        lines: bool,
        /// Print the rules of the accepting run.
        #[arg(long)]
        explain: bool,
    },
    /// Type-check a lens and print its type.
    Check {
        file: PathBuf,
        name: Option<String>,
        /// Longest string the ambiguity cross-check enumerates.
        #[arg(long)]
        bound: Option<usize>,
    },
    /// Run a lens left to right on stdin.
    Get(EvalArgs),
    /// Run a lens right to left on stdin.
    Put(EvalArgs),
    /// Translate a regex and print the result.
    Compile {
        file: PathBuf,
        name: Option<String>,
        #[arg(long, value_enum, default_value = "mrras")]
        emit: Emit,
    },
    /// Print every string of a regex up to a length.
    Oracle {
        file: PathBuf,
        name: Option<String>,
        #[arg(long, default_value_t = 6)]
        max_len: usize,
    },
}

#[derive(clap::Args, Debug)]
struct EvalArgs {
    file: PathBuf,
    name: Option<String>,
    /// Apply the lens to every line separately.
    #[arg(long)]
    lines: bool,
    #[arg(long)]
    bound: Option<usize>,
}

#[derive(ValueEnum, Clone, Copy, Debug)]
enum Emit {
    Sre,
    Mrras,
    Dot,
}

/// A failure with its exit status and message.
struct Fail(u8, String);

impl Fail {
    fn error(msg: impl Into<String>) -> Self {
        Fail(EXIT_ERROR, msg.into())
    }
}

type CmdResult = Result<u8, Fail>;

fn io_err(e: std::io::Error) -> Fail {
    Fail::error(format!("i/o error: {e}"))
}

fn load(path: &PathBuf) -> Result<SourceFile, Fail> {
    let text = std::fs::read_to_string(path).map_err(|e| Fail::error(format!("{}: {e}", path.display())))?;
    parse_file(&text).map_err(|e| Fail::error(format!("{}:{e}", path.display())))
}

fn pick<'a>(file: &'a SourceFile, name: Option<&str>) -> Result<&'a Definition, Fail> {
    match name {
        Some(n) => file.get(n).ok_or_else(|| Fail::error(format!("no definition named `{n}`"))),
        None => file.main().ok_or_else(|| Fail::error("no name given and no definition is marked main")),
    }
}

fn regex_def(file: &SourceFile, name: Option<&str>) -> Result<Mre, Fail> {
    let def = pick(file, name)?;
    match &def.value {
        Value::Regex(r) => Ok(r.clone()),
        Value::Lens(_) => Err(Fail::error(format!("`{}` is a lens, expected a regex", def.name))),
    }
}

fn checker(flag: Option<usize>) -> Result<Checker, Fail> {
    let bound = match (flag, std::env::var(BOUND_VAR)) {
        (Some(b), _) => b,
        (None, Ok(v)) => v.trim().parse().map_err(|_| Fail::error(format!("{BOUND_VAR} is not a number: {v:?}")))?,
        (None, Err(_)) => DEFAULT_BOUND,
    };
    Ok(Checker::new(bound))
}

fn typed_lens(file: &SourceFile, name: Option<&str>, bound: Option<usize>) -> Result<Typed, Fail> {
    let def = pick(file, name)?;
    let Value::Lens(l) = &def.value else {
        return Err(Fail::error(format!("`{}` is a regex, expected a lens", def.name)));
    };
    typecheck_with(checker(bound)?, &LensTypeEnv::new(), &RegexTypeEnv::new(), l)
        .map_err(|e| Fail::error(format!("`{}` is not well-typed: {e}", def.name)))
}

fn read_all(stdin: &mut dyn Read) -> Result<String, Fail> {
    let mut s = String::new();
    stdin.read_to_string(&mut s).map_err(io_err)?;
    Ok(s)
}

/// Splits input into lines without their terminators.
fn split_lines(s: &str) -> Vec<&str> {
    let body = s.strip_suffix('\n').unwrap_or(s);
    if s.is_empty() {
        Vec::new()
    } else {
        body.split('\n').collect()
    }
}

#[allow(clippy::too_many_arguments)]
fn cmd_match(
    file: &SourceFile,
    name: Option<&str>,
    input: Option<String>,
    lines: bool,
    explain: bool,
    stdin: &mut dyn Read,
    out: &mut dyn Write,
    err: &mut dyn Write,
) -> CmdResult {
    let r = regex_def(file, name)?;
    let m = compile(&r).map_err(|e| Fail::error(e.to_string()))?;
    let text = match input {
        Some(s) => s,
        None => read_all(stdin)?,
    };
    let items = if lines { split_lines(&text) } else { vec![text.as_str()] };
    let mut status = EXIT_OK;
    for (n, w) in items.iter().enumerate() {
        match m.match_witness(w) {
            Some(trace) => {
                if explain {
                    let rules: Vec<String> = trace
                        .steps
                        .iter()
                        .map(|s| if s.consumed.is_empty() { format!("{:?}", s.rule) } else { format!("{:?}({:?})", s.rule, s.consumed) })
                        .collect();
                    writeln!(out, "{}", rules.join(" ")).map_err(io_err)?;
                }
            }
            None => {
                if lines {
                    writeln!(err, "line {}: rejected", n + 1).map_err(io_err)?;
                } else {
                    writeln!(err, "rejected").map_err(io_err)?;
                }
                status = EXIT_REJECT;
            }
        }
    }
    Ok(status)
}

fn cmd_eval(args: &EvalArgs, dir: Direction, stdin: &mut dyn Read, out: &mut dyn Write) -> CmdResult {
    let file = load(&args.file)?;
    let t = typed_lens(&file, args.name.as_deref(), args.bound)?;
    let text = read_all(stdin)?;
    let run = |s: &str| -> Result<String, Fail> {
        evaluate(&t, dir, s, &LensTypeEnv::new(), &RegexTypeEnv::new(), &RegexValueEnv::new()).map_err(|e| {
            let code = match e {
                EvalError::ParseFailure { .. } => EXIT_REJECT,
                _ => EXIT_ERROR,
            };
            Fail(code, e.to_string())
        })
    };
    if args.lines {
        let mut buf = String::new();
        for (n, line) in split_lines(&text).into_iter().enumerate() {
            let done = run(line).map_err(|Fail(code, msg)| Fail(code, format!("line {}: {msg}", n + 1)))?;
            buf.push_str(&done);
            buf.push('\n');
        }
        out.write_all(buf.as_bytes()).map_err(io_err)?;
    } else {
        out.write_all(run(&text)?.as_bytes()).map_err(io_err)?;
    }
    Ok(EXIT_OK)
}

fn dispatch(args: Args, stdin: &mut dyn Read, out: &mut dyn Write, err: &mut dyn Write) -> CmdResult {
    match args.cmd {
        Cmd::Match { file, name, input, lines, explain } => {
            let f = load(&file)?;
            cmd_match(&f, name.as_deref(), input, lines, explain, stdin, out, err)
        }
        Cmd::Check { file, name, bound } => {
            let f = load(&file)?;
            let t = typed_lens(&f, name.as_deref(), bound)?;
            let sides = readable_names(&[&t.ty.source, &t.ty.target]);
            writeln!(out, "{}\n<=>\n{}", sides[0], sides[1]).map_err(io_err)?;
            Ok(EXIT_OK)
        }
        Cmd::Get(a) => cmd_eval(&a, Direction::Get, stdin, out),
        Cmd::Put(a) => cmd_eval(&a, Direction::Put, stdin, out),
        Cmd::Compile { file, name, emit } => {
            let f = load(&file)?;
            let r = regex_def(&f, name.as_deref())?;
            let m = compile(&r).map_err(|e| Fail::error(e.to_string()))?;
            let text = match emit {
                Emit::Sre => {
                    let sre = mre_to_sre(&alpha_rename(&r)).map_err(|e| Fail::error(e.to_string()))?;
                    serde_json::to_string_pretty(&sre).map_err(|e| Fail::error(e.to_string()))?
                }
                Emit::Mrras => serde_json::to_string_pretty(&m.to_json()).map_err(|e| Fail::error(e.to_string()))?,
                Emit::Dot => m.to_dot(),
            };
            writeln!(out, "{}", text.trim_end()).map_err(io_err)?;
            Ok(EXIT_OK)
        }
        Cmd::Oracle { file, name, max_len } => {
            let f = load(&file)?;
            let r = regex_def(&f, name.as_deref())?;
            let lang = enumerate_regex(&r, &RegexValueEnv::new(), max_len).map_err(|e| Fail::error(e.to_string()))?;
            for s in sorted_shortlex(&lang) {
                let shown = if s.is_empty() { "<eps>" } else { s.as_str() };
                writeln!(out, "{shown}").map_err(io_err)?;
            }
            Ok(EXIT_OK)
        }
    }
}

/// Runs the command line and returns the exit status.
pub fn run<I, T>(args: I, stdin: &mut dyn Read, out: &mut dyn Write, err: &mut dyn Write) -> u8
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let args = match Args::try_parse_from(args) {
        Ok(a) => a,
        Err(e) => {
            let _ = write!(err, "{e}");
            return if e.use_stderr() { EXIT_ERROR } else { EXIT_OK };
        }
    };
    match dispatch(args, stdin, out, err) {
        Ok(code) => code,
        Err(Fail(code, msg)) => {
            let _ = writeln!(err, "mrl: {msg}");
            code
        }
    }
}
