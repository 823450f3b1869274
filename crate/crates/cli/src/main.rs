mod args;
mod commands;

use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::sync::Mutex;

use clap::error::ErrorKind;
use clap::Parser;

use args::Cli;

pub const EXIT_VALIDATION: u8 = 2;
pub const EXIT_USAGE: u8 = 64;
pub const EXIT_NO_INPUT: u8 = 66;

static WARNINGS: Mutex<Vec<String>> = Mutex::new(Vec::new());

/// Collects library warnings so they end up in the report.
struct Capture;

impl log::Log for Capture {
    fn enabled(&self, metadata: &log::Metadata) -> bool {
        metadata.level() <= log::Level::Warn
    }

    fn log(&self, record: &log::Record) {
        if self.enabled(record.metadata()) {
            WARNINGS.lock().unwrap_or_else(|e| e.into_inner()).push(record.args().to_string());
        }
    }

    fn flush(&self) {}
}

pub fn take_warnings() -> Vec<String> {
    std::mem::take(&mut *WARNINGS.lock().unwrap_or_else(|e| e.into_inner()))
}

#[derive(Debug)]
pub enum Failure {
    Lib(crlscore::Error),
    Usage(String),
    Io { path: PathBuf, source: std::io::Error },
}

impl From<crlscore::Error> for Failure {
    fn from(e: crlscore::Error) -> Self {
        Failure::Lib(e)
    }
}

impl Failure {
    fn exit_code(&self) -> u8 {
        match self {
            Failure::Lib(e) if e.is_not_found() => EXIT_NO_INPUT,
            Failure::Io { source, .. } if source.kind() == std::io::ErrorKind::NotFound => EXIT_NO_INPUT,
            _ => EXIT_VALIDATION,
        }
    }

    fn line(&self) -> String {
        let (kind, msg) = match self {
            Failure::Lib(e) => (e.kind(), e.to_string()),
            Failure::Usage(m) => ("usage", m.clone()),
            Failure::Io { path, source } => ("io", format!("cannot access {}: {source}", path.display())),
        };
        format!("crlscore: error[{kind}]: {}", msg.replace(['\n', '\r'], " "))
    }
}

pub fn read_file(path: &Path) -> Result<String, Failure> {
    std::fs::read_to_string(path).map_err(|source| Failure::Io { path: path.to_path_buf(), source })
}

pub fn write_out(out: Option<&Path>, text: &str) -> Result<(), Failure> {
    match out {
        Some(path) => std::fs::write(path, text).map_err(|source| Failure::Io { path: path.to_path_buf(), source }),
        None => {
            let mut stdout = std::io::stdout().lock();
            stdout
                .write_all(text.as_bytes())
                .and_then(|_| stdout.flush())
                .map_err(|source| Failure::Io { path: PathBuf::from("<stdout>"), source })
        }
    }
}

fn cap_threads() {
    let Ok(value) = std::env::var("CRLSCORE_THREADS") else { return };
    match value.trim().parse::<usize>() {
        Ok(n) if n > 0 => {
            let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
        }
        _ => eprintln!("crlscore: warning: ignoring CRLSCORE_THREADS={value:?}"),
    }
}

fn main() -> ExitCode {
    let _ = log::set_logger(&Capture).map(|_| log::set_max_level(log::LevelFilter::Warn));
    cap_threads();
    let argv: Vec<String> = std::env::args().collect();
    let cli = match Cli::try_parse_from(&argv) {
        Ok(cli) => cli,
        Err(e) => {
            return match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => {
                    let _ = e.print();
                    ExitCode::SUCCESS
                }
                ErrorKind::DisplayHelpOnMissingArgumentOrSubcommand => {
                    eprintln!("crlscore: error[usage]: missing subcommand; run crlscore --help");
                    ExitCode::from(EXIT_USAGE)
                }
                kind => {
                    let first = e.to_string().lines().next().unwrap_or("invalid arguments").trim_start_matches("error: ").to_string();
                    eprintln!("crlscore: error[usage]: {first}");
                    let code = match kind {
                        ErrorKind::InvalidSubcommand => EXIT_USAGE,
                        _ => EXIT_VALIDATION,
                    };
                    ExitCode::from(code)
                }
            };
        }
    };
    match commands::run(cli.command, argv[1..].to_vec()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("{}", f.line());
            ExitCode::from(f.exit_code())
        }
    }
}
