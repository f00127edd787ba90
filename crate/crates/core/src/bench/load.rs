//! Closed-loop HTTP load generator.
//!
//! Each stream is a thread that sends the next request as soon as the previous
//! response arrives. Samples are bucketed per second of wall time.

use std::time::{Duration, Instant};

use serde::Serialize;

use super::{BenchmarkDef, Generator};
use crate::invoker::http::SERVED_BY;

#[derive(Debug, Clone)]
pub struct LoadConfig {
    /// Invoker base URL, such as `http://127.0.0.1:8080`.
    pub base_url: String,
    pub streams: usize,
    pub duration: Duration,
    pub seed: u64,
}

#[derive(Debug, Clone, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct Sample {
    pub stream: usize,
    /// Start time relative to the run start.
    pub start_ms: f64,
    pub latency_ms: f64,
    pub status: u16,
    pub served_by: String,
}

#[derive(Debug, Clone, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct Bucket {
    pub second: u64,
    pub count: usize,
    pub mean_ms: f64,
    /// Half-width of the 95% confidence interval of the mean.
    pub ci95_ms: f64,
    pub max_ms: f64,
    pub executor_share: f64,
}

#[derive(Debug, Clone, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct Phases {
    /// Latency of the first (cold) request.
    pub cold_ms: Option<f64>,
    /// When the first executor response started.
    pub switch_at_ms: Option<f64>,
}

#[derive(Debug, Clone, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct LatencyReport {
    pub benchmark: String,
    pub streams: usize,
    pub duration_s: f64,
    pub requests: usize,
    pub errors: usize,
    pub throughput_rps: f64,
    pub phases: Phases,
    pub pre_switch_median_ms: Option<f64>,
    pub post_switch_median_ms: Option<f64>,
    pub buckets: Vec<Bucket>,
    #[serde(skip)]
    pub samples: Vec<Sample>,
}

fn median(mut v: Vec<f64>) -> Option<f64> {
    if v.is_empty() {
        return None;
    }
    v.sort_by(f64::total_cmp);
    let m = v.len() / 2;
    Some(if v.len().is_multiple_of(2) { (v[m - 1] + v[m]) / 2.0 } else { v[m] })
}

impl LatencyReport {
    fn build(benchmark: &str, streams: usize, elapsed: Duration, mut samples: Vec<Sample>, errors: usize) -> Self {
        samples.sort_by(|a, b| a.start_ms.total_cmp(&b.start_ms));
        let switch_at_ms = samples.iter().find(|s| s.served_by == "executor").map(|s| s.start_ms);
        let pre = samples
            .iter()
            .filter(|s| matches!(s.served_by.as_str(), "tracer" | "interpreter"))
            .filter(|s| switch_at_ms.is_none_or(|t| s.start_ms < t))
            .map(|s| s.latency_ms)
            .collect();
        let post = samples
            .iter()
            .filter(|s| s.served_by == "executor")
            .map(|s| s.latency_ms)
            .collect();
        let seconds = elapsed.as_secs_f64().ceil() as u64;
        let buckets = (0..seconds.max(1))
            .map(|sec| {
                let xs: Vec<&Sample> = samples
                    .iter()
                    .filter(|s| (s.start_ms / 1000.0) as u64 == sec)
                    .collect();
                let n = xs.len();
                let mean = if n == 0 { 0.0 } else { xs.iter().map(|s| s.latency_ms).sum::<f64>() / n as f64 };
                let var = if n < 2 {
                    0.0
                } else {
                    xs.iter().map(|s| (s.latency_ms - mean).powi(2)).sum::<f64>() / (n - 1) as f64
                };
                Bucket {
                    second: sec,
                    count: n,
                    mean_ms: mean,
                    ci95_ms: if n < 2 { 0.0 } else { 1.96 * (var / n as f64).sqrt() },
                    max_ms: xs.iter().map(|s| s.latency_ms).fold(0.0, f64::max),
                    executor_share: if n == 0 {
                        0.0
                    } else {
                        xs.iter().filter(|s| s.served_by == "executor").count() as f64 / n as f64
                    },
                }
            })
            .collect();
        LatencyReport {
            benchmark: benchmark.to_string(),
            streams,
            duration_s: elapsed.as_secs_f64(),
            requests: samples.len(),
            errors,
            throughput_rps: samples.len() as f64 / elapsed.as_secs_f64().max(1e-9),
            phases: Phases {
                cold_ms: samples.first().map(|s| s.latency_ms),
                switch_at_ms,
            },
            pre_switch_median_ms: median(pre),
            post_switch_median_ms: median(post),
            buckets,
            samples,
        }
    }

    /// True if latency after the switch to the executor is strictly lower
    /// than before it.
    pub fn dips_again(&self) -> bool {
        matches!((self.pre_switch_median_ms, self.post_switch_median_ms), (Some(a), Some(b)) if b < a)
    }

    pub fn render(&self) -> String {
        let fmt = |v: Option<f64>| v.map_or("-".to_string(), |x| format!("{x:.2}"));
        let mut out = format!(
            "{}: {} requests over {:.1}s with {} streams ({:.0} req/s, {} errors)\n\
             cold {} ms, switch at {} ms, median before {} ms, after {} ms\n\
             {:>4} {:>6} {:>9} {:>8} {:>9} {:>6}\n",
            self.benchmark,
            self.requests,
            self.duration_s,
            self.streams,
            self.throughput_rps,
            self.errors,
            fmt(self.phases.cold_ms),
            fmt(self.phases.switch_at_ms),
            fmt(self.pre_switch_median_ms),
            fmt(self.post_switch_median_ms),
            "sec",
            "count",
            "mean ms",
            "±95%",
            "max ms",
            "exec",
        );
        for b in &self.buckets {
            out.push_str(&format!(
                "{:>4} {:>6} {:>9.2} {:>8.2} {:>9.2} {:>5.0}%\n",
                b.second,
                b.count,
                b.mean_ms,
                b.ci95_ms,
                b.max_ms,
                b.executor_share * 100.0
            ));
        }
        out
    }

    /// One row per request, for plotting.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("stream,start_ms,latency_ms,status,served_by\n");
        for s in &self.samples {
            out.push_str(&format!(
                "{},{:.3},{:.3},{},{}\n",
                s.stream, s.start_ms, s.latency_ms, s.status, s.served_by
            ));
        }
        out
    }
}

/// Drives `def` on a running invoker with closed-loop streams.
pub fn run_load(def: &BenchmarkDef, cfg: &LoadConfig) -> LatencyReport {
    let url = format!("{}/function/{}", cfg.base_url.trim_end_matches('/'), def.name);
    let t0 = Instant::now();
    let deadline = t0 + cfg.duration;
    let results: Vec<(Vec<Sample>, usize)> = std::thread::scope(|scope| {
        let handles: Vec<_> = (0..cfg.streams)
            .map(|stream| {
                let url = url.clone();
                let seed = cfg.seed.wrapping_add(stream as u64);
                scope.spawn(move || {
                    let agent = ureq::Agent::config_builder()
                        .http_status_as_error(false)
                        .timeout_global(Some(Duration::from_secs(30)))
                        .build()
                        .new_agent();
                    let mut gen = Generator::new(def, seed);
                    let mut samples = Vec::new();
                    let mut errors = 0;
                    while Instant::now() < deadline {
                        let body = gen.body().to_string();
                        let start = Instant::now();
                        let resp = agent
                            .post(&url)
                            .header("content-type", "application/json")
                            .send(body.as_bytes());
                        let mut resp = match resp {
                            Ok(r) => r,
                            Err(e) => {
                                log::debug!("stream {stream}: {e}");
                                errors += 1;
                                std::thread::sleep(Duration::from_millis(10));
                                continue;
                            }
                        };
                        let _ = resp.body_mut().read_to_vec();
                        let latency = start.elapsed();
                        let status = resp.status().as_u16();
                        if status >= 500 {
                            errors += 1;
                        }
                        let served_by = resp
                            .headers()
                            .get(SERVED_BY)
                            .and_then(|v| v.to_str().ok())
                            .unwrap_or("unknown")
                            .to_string();
                        samples.push(Sample {
                            stream,
                            start_ms: (start - t0).as_secs_f64() * 1000.0,
                            latency_ms: latency.as_secs_f64() * 1000.0,
                            status,
                            served_by,
                        });
                    }
                    (samples, errors)
                })
            })
            .collect();
        handles.into_iter().map(|h| h.join().expect("load stream")).collect()
    });
    let errors = results.iter().map(|r| r.1).sum();
    let samples = results.into_iter().flat_map(|r| r.0).collect();
    LatencyReport::build(def.name, cfg.streams, t0.elapsed(), samples, errors)
}
