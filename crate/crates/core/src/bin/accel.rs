use std::net::SocketAddr;
use std::path::PathBuf;
use std::process::ExitCode;
use std::sync::Arc;
use std::time::Duration;

use accel::bench::{self, fuzz::equivalence_fuzz, load, mock::MockUpstream, stack::LocalStack};
use accel::exec::ExecLimits;
use accel::invoker::{http, Invoker, InvokerConfig};
use accel::upstream::HttpUpstream;
use clap::{Args, Parser, Subcommand};

#[derive(Parser)]
#[command(name = "accel", version, about = "Trace-tree accelerator for serverless functions")]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Args, Clone)]
struct InvokerArgs {
    #[arg(long, env = "ACCEL_TRACE_AFTER", default_value_t = 100)]
    trace_after: usize,
    #[arg(long, env = "ACCEL_MAX_BOUNCES", default_value_t = 3)]
    max_bounces: u32,
    #[arg(long, env = "ACCEL_INSTRUCTION_LIMIT", default_value_t = 10_000_000)]
    instruction_limit: u64,
    /// Arena limit in bytes.
    #[arg(long, env = "ACCEL_MEMORY_LIMIT", default_value_t = 128 << 20)]
    memory_limit: usize,
    #[arg(long, env = "ACCEL_POOL_SIZE", default_value_t = 6)]
    pool_size: usize,
}

impl InvokerArgs {
    fn config(&self) -> InvokerConfig {
        InvokerConfig {
            trace_after: self.trace_after.max(1),
            max_bounces: self.max_bounces,
            limits: ExecLimits {
                max_instructions: self.instruction_limit,
                max_bytes: self.memory_limit,
            },
            pool_size: self.pool_size,
            ..InvokerConfig::default()
        }
    }
}

#[derive(Subcommand)]
enum Cmd {
    /// Run the invoker HTTP service.
    Serve {
        #[arg(long, env = "ACCEL_PORT", default_value_t = 8080)]
        port: u16,
        /// Base URL for guest `get` and `post` calls.
        #[arg(long, env = "ACCEL_UPSTREAM", default_value = "http://127.0.0.1:8081")]
        upstream: String,
        /// Register NAME=FILE at startup. Repeatable.
        #[arg(long = "function", value_name = "NAME=FILE")]
        functions: Vec<String>,
        #[command(flatten)]
        invoker: InvokerArgs,
    },
    /// Run the mock upstream service.
    Mock {
        #[arg(long, env = "ACCEL_MOCK_PORT", default_value_t = 8081)]
        port: u16,
        #[arg(long, default_value_t = 1)]
        delay_ms: u64,
    },
    /// Drive a benchmark with closed-loop load and report latency.
    Bench {
        name: String,
        #[arg(long, default_value_t = 10)]
        streams: usize,
        /// Seconds.
        #[arg(long, default_value_t = 60)]
        duration: u64,
        #[arg(long, default_value_t = 1)]
        seed: u64,
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long)]
        csv: Option<PathBuf>,
        /// An already running invoker. Without it, a mock and an invoker are
        /// started in-process.
        #[arg(long)]
        target: Option<String>,
        #[arg(long, default_value_t = 1)]
        mock_delay_ms: u64,
        #[command(flatten)]
        invoker: InvokerArgs,
    },
    /// Compare the accelerated invoker with a container-only one.
    Fuzz {
        /// A benchmark name or `all`.
        name: String,
        #[arg(short, default_value_t = 500)]
        n: usize,
        #[arg(long, default_value_t = 1)]
        seed: u64,
        #[command(flatten)]
        invoker: InvokerArgs,
    },
}

fn benchmarks(name: &str) -> Result<Vec<bench::BenchmarkDef>, String> {
    if name == "all" {
        return Ok(bench::all());
    }
    bench::by_name(name)
        .map(|d| vec![d])
        .ok_or_else(|| format!("unknown benchmark `{name}`; expected one of {}", bench::NAMES.join(", ")))
}

fn run(cli: Cli) -> Result<bool, Box<dyn std::error::Error>> {
    match cli.cmd {
        Cmd::Serve {
            port,
            upstream,
            functions,
            invoker,
        } => {
            let inv = Arc::new(Invoker::new(invoker.config(), Arc::new(HttpUpstream::new(upstream))));
            for f in functions {
                let (name, file) = f.split_once('=').ok_or("expected NAME=FILE")?;
                let source = std::fs::read_to_string(file)?;
                let status = inv.register(name, &source)?;
                log::info!("registered {name} in {:?} mode", status.mode);
            }
            let rt = tokio::runtime::Runtime::new()?;
            rt.block_on(http::serve(inv, SocketAddr::from(([0, 0, 0, 0], port))))?;
            Ok(true)
        }
        Cmd::Mock { port, delay_ms } => {
            let m = Arc::new(MockUpstream::new(Duration::from_millis(delay_ms)));
            let rt = tokio::runtime::Runtime::new()?;
            rt.block_on(bench::mock::serve(m, SocketAddr::from(([0, 0, 0, 0], port))))?;
            Ok(true)
        }
        Cmd::Bench {
            name,
            streams,
            duration,
            seed,
            out,
            csv,
            target,
            mock_delay_ms,
            invoker,
        } => {
            let [def] = <[_; 1]>::try_from(benchmarks(&name)?).map_err(|_| "bench runs one benchmark")?;
            let _stack;
            let base_url = match target {
                Some(url) => {
                    let agent: ureq::Agent = ureq::Agent::config_builder().build().into();
                    agent
                        .put(format!("{}/function/{}", url.trim_end_matches('/'), def.name))
                        .send(def.source.as_bytes())?;
                    url
                }
                None => {
                    let stack = LocalStack::start(invoker.config(), Duration::from_millis(mock_delay_ms))?;
                    stack.invoker.register(def.name, &def.source)?;
                    let url = stack.invoker_url.clone();
                    _stack = stack;
                    url
                }
            };
            let report = load::run_load(
                &def,
                &load::LoadConfig {
                    base_url,
                    streams,
                    duration: Duration::from_secs(duration),
                    seed,
                },
            );
            print!("{}", report.render());
            if let Some(path) = out {
                std::fs::write(path, serde_json::to_string_pretty(&report)?)?;
            }
            if let Some(path) = csv {
                std::fs::write(path, report.to_csv())?;
            }
            Ok(true)
        }
        Cmd::Fuzz { name, n, seed, invoker } => {
            let mut ok = true;
            for def in benchmarks(&name)? {
                let v = equivalence_fuzz(&def, n, seed, invoker.config())?;
                println!("{}", serde_json::to_string(&v)?);
                ok &= v.passed();
            }
            Ok(ok)
        }
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("info")).init();
    match run(Cli::parse()) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::FAILURE,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}
