use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::Result;
use clap::{Parser, Subcommand, ValueEnum};
use hcpdq::bench::{run_point, to_csv, verdicts};
use hcpdq::commands::{self, exit_code};
use hcpdq::{Backend, SEED_ENV};
use hcpdq_core::he::HeParams;
use hcpdq_core::pdq::AnswerMode;
use hcpdq_core::Execution;

#[derive(Parser)]
#[command(
    name = "hcpdq",
    version,
    about = "Homomorphic sparse-vector compression and private database queries"
)]
struct Cli {
    /// Seed for key generation and encryption randomness.
    #[arg(long, global = true, env = SEED_ENV, default_value_t = 0)]
    seed: u64,
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Clone, Copy, ValueEnum)]
enum Mode {
    /// Mask with the values, then compress.
    Mask,
    /// Compress against the precomputed value-weighted matrix.
    CleartextDb,
}

#[derive(Clone, Copy, ValueEnum)]
enum Vary {
    S,
    N,
}

#[derive(Subcommand)]
enum Cmd {
    /// Generate a key pair with the rotations the compressor needs.
    Keygen {
        #[arg(long, value_enum, default_value = "sim")]
        backend: Backend,
        /// Ring dimension (slot count).
        #[arg(long, default_value_t = 8192)]
        n: usize,
        #[arg(long, default_value_t = 65537)]
        p: u64,
        /// Multiplicative depth; defaults to what PDQ (simulator) or compression (BGV) needs.
        #[arg(long)]
        levels: Option<u32>,
        /// Sparsity bound the rotation keys are generated for.
        #[arg(long, default_value_t = 16)]
        s: usize,
        #[arg(long)]
        out: PathBuf,
    },
    /// Compress a sparse vector given as JSON.
    Compress {
        #[arg(long)]
        keys: PathBuf,
        #[arg(long)]
        input: PathBuf,
        #[arg(long, default_value_t = 16)]
        s: usize,
        #[arg(long)]
        out: PathBuf,
    },
    /// Decompress an answer back to sparse-vector JSON.
    Decompress {
        #[arg(long)]
        keys: PathBuf,
        #[arg(long)]
        input: PathBuf,
        /// Length N of the original vector.
        #[arg(long)]
        len: usize,
        #[arg(long, default_value_t = 16)]
        s: usize,
        #[arg(long)]
        out: PathBuf,
    },
    /// Serve PDQ over TCP.
    Serve {
        #[arg(long, default_value_t = 7878)]
        port: u16,
        #[arg(long, default_value = "127.0.0.1")]
        host: String,
        /// JSON lines or HCDB binary database.
        #[arg(long)]
        db: PathBuf,
        #[arg(long, default_value_t = 65537)]
        p: u64,
        #[arg(long, value_enum, default_value = "mask")]
        mode: Mode,
        /// Dump every frame to this file.
        #[arg(long)]
        record: Option<PathBuf>,
    },
    /// Query a PDQ server; prints one JSON result per condition.
    Query {
        #[arg(long, default_value = "127.0.0.1:7878")]
        addr: String,
        #[arg(long)]
        keys: PathBuf,
        #[arg(long, default_value_t = 16)]
        s: usize,
        /// Key(s) to look up.
        #[arg(long = "x", required = true)]
        x: Vec<u64>,
        #[arg(long)]
        record: Option<PathBuf>,
    },
    /// Measure compression over a grid of s or N values and write CSV.
    Bench {
        #[arg(long, value_enum, default_value = "s")]
        vary: Vary,
        #[arg(long, value_enum, default_value = "sim")]
        backend: Backend,
        /// Values of the varied parameter; defaults to 8..128 for s and 2^13..2^17 for N.
        #[arg(long, value_delimiter = ',')]
        values: Vec<usize>,
        /// The fixed parameter: N when varying s (default 16384), s when varying N (default 16).
        #[arg(long)]
        fixed: Option<usize>,
        #[arg(long, default_value_t = 8192)]
        n: usize,
        /// Plaintext modulus; defaults to 65537, or 147457 when some N exceeds 65536.
        #[arg(long)]
        p: Option<u64>,
        #[arg(long, default_value_t = 3)]
        levels: u32,
        /// Run blocks sequentially.
        #[arg(long)]
        sequential: bool,
        /// Write 0 in the timing columns so output is reproducible.
        #[arg(long)]
        omit_timing: bool,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

fn run(cli: Cli) -> Result<()> {
    let seed = cli.seed;
    match cli.cmd {
        Cmd::Keygen {
            backend,
            n,
            p,
            levels,
            s,
            out,
        } => {
            let rot = commands::keygen(&commands::KeygenArgs {
                backend,
                n,
                p,
                levels,
                s,
                out: out.clone(),
                seed,
            })?;
            println!(
                "wrote keys to {} ({} rotation keys)",
                out.display(),
                rot.key_count()
            );
        }
        Cmd::Compress {
            keys,
            input,
            s,
            out,
        } => {
            let summary = commands::compress(&commands::CompressArgs {
                keys,
                input,
                s,
                out,
                seed,
            })?;
            println!("{summary}");
        }
        Cmd::Decompress {
            keys,
            input,
            len,
            s,
            out,
        } => {
            let v = commands::decompress(&commands::DecompressArgs {
                keys,
                input,
                len,
                s,
                out,
            })?;
            println!("recovered {} nonzero entries", v.nnz());
        }
        Cmd::Serve {
            port,
            host,
            db,
            p,
            mode,
            record,
        } => {
            let mode = match mode {
                Mode::Mask => AnswerMode::MaskThenComp,
                Mode::CleartextDb => AnswerMode::CleartextDb,
            };
            commands::run_server(&commands::ServeArgs {
                bind: format!("{host}:{port}"),
                db,
                p,
                mode,
                record,
            })?;
        }
        Cmd::Query {
            addr,
            keys,
            s,
            x,
            record,
        } => {
            let results = commands::run_query(&commands::QueryArgs {
                addr,
                keys,
                s,
                conditions: x,
                record,
                seed,
            })?;
            for r in results {
                println!("{}", serde_json::to_string(&r)?);
            }
        }
        Cmd::Bench {
            vary,
            backend,
            values,
            fixed,
            n,
            p,
            levels,
            sequential,
            omit_timing,
            out,
        } => {
            let grid: Vec<(usize, usize)> = match vary {
                Vary::S => {
                    let len = fixed.unwrap_or(16384);
                    let ss = if values.is_empty() {
                        vec![8, 16, 32, 64, 128]
                    } else {
                        values
                    };
                    ss.into_iter().map(|s| (len, s)).collect()
                }
                Vary::N => {
                    let s = fixed.unwrap_or(16);
                    let ns = if values.is_empty() {
                        (13..=17).map(|k| 1 << k).collect()
                    } else {
                        values
                    };
                    ns.into_iter().map(|len| (len, s)).collect()
                }
            };
            let max_len = grid.iter().map(|g| g.0).max().unwrap_or(0) as u64;
            let p = p.unwrap_or(if max_len >= 65537 { 147457 } else { 65537 });
            let he = HeParams::new(n, p, levels)?;
            let exec = if sequential {
                Execution::Sequential
            } else {
                Execution::Parallel
            };
            let rows = grid
                .into_iter()
                .map(|(len, s)| run_point(backend, len, s, he, seed, exec))
                .collect::<Result<Vec<_>>>()?;
            let csv = to_csv(&rows, omit_timing);
            match out {
                Some(path) => std::fs::write(&path, &csv)?,
                None => print!("{csv}"),
            }
            for v in verdicts(&rows) {
                eprintln!(
                    "{} {}: {}",
                    if v.pass { "PASS" } else { "FAIL" },
                    v.name,
                    v.detail
                );
            }
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(exit_code(&e) as u8)
        }
    }
}
