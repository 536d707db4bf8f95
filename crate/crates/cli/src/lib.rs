//! Command-line front end: expansion, reduction, simulation, counters and
//! bisimilarity checking, with an optional JSON-lines run report.

use std::io::Write;
use std::path::{Path, PathBuf};
use std::time::Instant;

use clap::{Args, Parser, Subcommand};
use num_bigint::BigUint;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use sha2::{Digest, Sha256};

use pdbisim_core::bisim::{approx_distinguish_with_budget, escalating_bisim, Verdict};
use pdbisim_core::counters::{canonical_counter, counter_value, CounterSpec, CounterWord};
use pdbisim_core::lts::{Config, Pda};
use pdbisim_core::macro_text::expand_macros;
use pdbisim_core::pda_text::{emit_pda, parse_pda};
use pdbisim_core::reduction::{
    bits_to_string, build_reduction, simulate_machine, DtmEncoding, DtmSpec, TransducerMachine,
};
use pdbisim_core::{samples, Error};

pub const EXIT_BISIMILAR: i32 = 0;
pub const EXIT_NOT_BISIMILAR: i32 = 1;
pub const EXIT_UNKNOWN: i32 = 2;
pub const EXIT_USAGE: i32 = 64;
pub const EXIT_DATA: i32 = 65;
pub const EXIT_SOFTWARE: i32 = 70;

const DEFAULT_SEED: u64 = 0x5eed;
/// Smallest cap tried when escalating.
const START_CAP: usize = 16;

#[derive(Parser, Debug)]
#[command(name = "pdbisim", version, about = "Pushdown bisimilarity: reductions and checking")]
struct Cli {
    #[command(flatten)]
    global: Global,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Debug, Clone)]
struct Global {
    /// Largest stack height explored.
    #[arg(long, global = true, default_value_t = 128)]
    cap: usize,
    /// Bound the game to this many rounds instead of solving it.
    #[arg(long, global = true)]
    rounds: Option<u32>,
    /// Configuration or game-position budget.
    #[arg(long, global = true, default_value_t = 10_000_000)]
    budget: usize,
    #[arg(long, global = true, default_value_t = DEFAULT_SEED)]
    seed: u64,
    /// Print a JSON run report as the last line of output.
    #[arg(long, global = true)]
    report: bool,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Expand a macro file into the PDA text format.
    Expand {
        file: PathBuf,
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
    /// Build the pushdown system for a transducer machine.
    Reduce {
        machine: PathBuf,
        #[arg(short, value_parser = clap::value_parser!(u32).range(1..))]
        k: u32,
        #[arg(short, value_parser = clap::value_parser!(u32).range(1..))]
        n: u32,
        #[arg(long)]
        normed: bool,
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
    /// Decide bisimilarity of two configurations.
    Check {
        pda: PathBuf,
        #[arg(long)]
        left: String,
        #[arg(long)]
        right: String,
    },
    /// Run a transducer machine from `1^ℓ`.
    Simulate {
        machine: PathBuf,
        #[arg(long, default_value_t = 1000)]
        max_steps: usize,
    },
    /// Encode a space-bounded Turing machine as a transducer machine.
    DtmEncode {
        dtm: PathBuf,
        #[arg(short, value_parser = clap::value_parser!(u32).range(1..))]
        k: u32,
        #[arg(short, value_parser = clap::value_parser!(u32).range(1..))]
        n: u32,
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
    /// Counter utilities.
    Counter {
        #[command(subcommand)]
        op: CounterOp,
    },
    /// Reduce and check the two bundled toy machines at k = 1, n = 1.
    Demo {
        #[arg(long)]
        normed: bool,
    },
}

#[derive(Subcommand, Debug)]
enum CounterOp {
    /// Print the canonical counter of a value.
    Gen { level: u32, n: u32, value: BigUint },
    /// Print the value of a counter word.
    Value { level: u32, n: u32, word: Vec<String> },
    /// Print the counter of a value drawn with `--seed`.
    Random { level: u32, n: u32 },
}

#[derive(Serialize, Default)]
struct Counts {
    #[serde(skip_serializing_if = "Option::is_none")]
    states: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    rules: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    explored: Option<usize>,
}

#[derive(Serialize)]
struct Input {
    path: String,
    sha256: String,
}

/// One line of the run report.
#[derive(Serialize, Default)]
struct RunReport {
    command: Vec<String>,
    inputs: Vec<Input>,
    #[serde(skip_serializing_if = "Option::is_none")]
    verdict: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    artifact: Option<String>,
    counts: Counts,
    exit_code: i32,
    wall_ms: u128,
}

/// A failure with its exit code.
struct Fail(i32, String);

impl From<Error> for Fail {
    fn from(e: Error) -> Self {
        let code = match e {
            Error::Budget { .. } => EXIT_SOFTWARE,
            Error::LengthMismatch { .. }
            | Error::Magnitude { .. }
            | Error::EnumerationBound { .. }
            | Error::SpaceBound { .. }
            | Error::OutOfRange { .. } => EXIT_USAGE,
            _ => EXIT_DATA,
        };
        Fail(code, e.to_string())
    }
}

struct Run<'a> {
    out: &'a mut dyn Write,
    global: Global,
    report: RunReport,
}

impl Run<'_> {
    fn say(&mut self, line: impl AsRef<str>) -> Result<(), Fail> {
        writeln!(self.out, "{}", line.as_ref()).map_err(|e| Fail(EXIT_SOFTWARE, e.to_string()))
    }

    fn read(&mut self, path: &Path) -> Result<String, Fail> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Fail(EXIT_DATA, format!("{}: {e}", path.display())))?;
        self.report.inputs.push(Input {
            path: path.display().to_string(),
            sha256: format!("{:x}", Sha256::digest(text.as_bytes())),
        });
        Ok(text)
    }

    /// Parses with `parse`, prefixing errors with the file name.
    fn load<T>(&mut self, path: &Path, parse: impl FnOnce(&str) -> pdbisim_core::Result<T>) -> Result<T, Fail> {
        let text = self.read(path)?;
        parse(&text).map_err(|e| {
            let Fail(code, msg) = Fail::from(e);
            Fail(code, format!("{}:{msg}", path.display()))
        })
    }

    fn write_artifact(&mut self, path: Option<&Path>, text: &str) -> Result<(), Fail> {
        match path {
            Some(p) => {
                std::fs::write(p, text).map_err(|e| Fail(EXIT_SOFTWARE, format!("{}: {e}", p.display())))?;
                self.report.artifact = Some(p.display().to_string());
                Ok(())
            }
            None => {
                let out = text.strip_suffix('\n').unwrap_or(text).to_string();
                self.say(out)
            }
        }
    }

    fn count_pda(&mut self, pda: &Pda) {
        self.report.counts.states = Some(pda.states().len());
        self.report.counts.rules = Some(pda.rules().len());
    }

    /// Checks a pair and prints the verdict, returning the exit code.
    fn check(&mut self, label: Option<&str>, pda: &Pda, left: &Config, right: &Config) -> Result<Verdict, Fail> {
        let g = self.global.clone();
        let verdict = match g.rounds {
            Some(r) => approx_distinguish_with_budget(pda, left, right, r, g.budget)?,
            None => {
                let out = escalating_bisim(pda, left, right, START_CAP.min(g.cap), g.cap, g.budget)?;
                let explored = self.report.counts.explored.unwrap_or(0) + out.explored;
                self.report.counts.explored = Some(explored);
                out.verdict
            }
        };
        let line = match label {
            Some(l) => format!("{l}: {verdict}"),
            None => verdict.to_string(),
        };
        self.say(line)?;
        if let Verdict::NotBisimilar { witness, .. } = &verdict {
            let moves: Vec<String> = witness.iter().map(|m| m.to_string()).collect();
            self.say(format!("  witness: {}", moves.join(" ")))?;
        }
        Ok(verdict)
    }

    fn dispatch(&mut self, command: Command) -> Result<i32, Fail> {
        match command {
            Command::Expand { file, output } => {
                let pda = self.load(&file, expand_macros)?;
                self.count_pda(&pda);
                self.write_artifact(output.as_deref(), &emit_pda(&pda))?;
                Ok(0)
            }
            Command::Reduce {
                machine,
                k,
                n,
                normed,
                output,
            } => {
                let tm = self.load(&machine, TransducerMachine::parse)?;
                let inst = build_reduction(&tm, k, n, normed)?;
                self.count_pda(&inst.pda);
                self.write_artifact(output.as_deref(), &emit_pda(&inst.pda))?;
                if output.is_some() {
                    self.say(format!("left: {}", inst.left))?;
                    self.say(format!("right: {}", inst.right))?;
                    self.say(format!(
                        "states: {} rules: {}",
                        inst.pda.states().len(),
                        inst.pda.rules().len()
                    ))?;
                }
                Ok(0)
            }
            Command::Check { pda, left, right } => {
                let pda = self.load(&pda, parse_pda)?;
                let parse = |s: &str| Config::parse(s).map_err(Fail::from);
                let (left, right) = (parse(&left)?, parse(&right)?);
                self.count_pda(&pda);
                let verdict = self.check(None, &pda, &left, &right)?;
                self.report.verdict = Some(verdict.to_string());
                Ok(match verdict {
                    Verdict::Bisimilar { .. } => EXIT_BISIMILAR,
                    Verdict::NotBisimilar { .. } => EXIT_NOT_BISIMILAR,
                    Verdict::Unknown { .. } => EXIT_UNKNOWN,
                })
            }
            Command::Simulate { machine, max_steps } => {
                let tm = self.load(&machine, TransducerMachine::parse)?;
                let run = simulate_machine(&tm, max_steps)?;
                for (i, z) in run.trace.iter().enumerate() {
                    self.say(format!("z{i} = {}", bits_to_string(z)))?;
                }
                self.say(format!("status: {}", run.status))?;
                self.say(format!("last: {}", bits_to_string(run.last())))?;
                self.say(format!("ends-in-zero: {}", run.ends_in_zero()))?;
                self.report.verdict = Some(run.status.to_string());
                Ok(0)
            }
            Command::DtmEncode { dtm, k, n, output } => {
                let spec = self.load(&dtm, DtmSpec::parse)?;
                let enc = DtmEncoding::new(&spec, k, n)?;
                let tm = enc.machine()?;
                self.write_artifact(output.as_deref(), &tm.emit())?;
                if output.is_some() {
                    self.say(format!(
                        "ell: {} block: {} delay: {} states: {}/{}",
                        enc.ell(),
                        enc.block(),
                        enc.delay(),
                        tm.t1().states().len(),
                        tm.t2().states().len()
                    ))?;
                }
                Ok(0)
            }
            Command::Counter { op } => {
                match op {
                    CounterOp::Gen { level, n, value } => {
                        self.say(canonical_counter(level, n, &value)?.to_string())?;
                    }
                    CounterOp::Value { level, n, word } => {
                        let w = CounterWord::parse(&word.join(" "))?;
                        self.say(counter_value(w.symbols(), level, n)?.to_string())?;
                    }
                    CounterOp::Random { level, n } => {
                        let cap = CounterSpec::new(level, n).capacity()?;
                        let cap = u64::try_from(&cap).map_err(|_| Fail::from(Error::Magnitude { max_bits: 64 }))?;
                        let mut rng = ChaCha8Rng::seed_from_u64(self.global.seed);
                        let v = BigUint::from(rng.gen_range(0..cap));
                        self.say(format!("{v}: {}", canonical_counter(level, n, &v)?))?;
                    }
                }
                Ok(0)
            }
            Command::Demo { normed } => {
                let cases = [
                    ("bisimilar-instance", samples::bisimilar_machine()?, true),
                    ("non-bisimilar-instance", samples::non_bisimilar_machine()?, false),
                ];
                let mut code = 0;
                for (label, tm, expect) in cases {
                    let inst = build_reduction(&tm, 1, 1, normed)?;
                    let verdict = self.check(Some(label), &inst.pda, &inst.left, &inst.right)?;
                    let ok = if expect {
                        verdict.is_bisimilar()
                    } else {
                        verdict.is_not_bisimilar()
                    };
                    if !ok {
                        code = EXIT_SOFTWARE;
                    }
                }
                Ok(code)
            }
        }
    }
}

/// Runs the command line `argv` (program name first), writing to `out`.
/// Diagnostics go to standard error. Returns the exit code.
pub fn run_cli<I, T>(argv: I, out: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let argv: Vec<std::ffi::OsString> = argv.into_iter().map(Into::into).collect();
    let cli = match Cli::try_parse_from(&argv) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { 0 };
            let _ = e.print();
            return code;
        }
    };
    let start = Instant::now();
    let global = cli.global.clone();
    let mut run = Run {
        out,
        global: global.clone(),
        report: RunReport {
            command: argv.iter().skip(1).map(|a| a.to_string_lossy().into_owned()).collect(),
            ..RunReport::default()
        },
    };
    let code = match run.dispatch(cli.command) {
        Ok(code) => code,
        Err(Fail(code, msg)) => {
            eprintln!("error: {msg}");
            code
        }
    };
    if global.report {
        run.report.exit_code = code;
        run.report.wall_ms = start.elapsed().as_millis();
        let line = serde_json::to_string(&run.report).expect("serializable");
        let _ = writeln!(run.out, "{line}");
    }
    code
}
