//! Recovering full tweet objects from stored ids.
//!
//! A [`HydrationClient`] performs one batch lookup; [`hydrate`] drives the
//! batching and the retry contract. Ids the backend does not return are
//! reported as [`Hydrated::Absent`] (deleted or protected tweets).

use std::collections::{BTreeMap, HashMap};
use std::path::Path;
use std::sync::{Arc, Mutex};
use std::time::{Duration, Instant};

use thiserror::Error;

pub const ENDPOINT_VAR: &str = "MASKSHIFT_HYDRATE_ENDPOINT";
pub const TOKEN_VAR: &str = "MASKSHIFT_HYDRATE_TOKEN";

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum HydrateError {
    /// Network or server failure; the request may be retried.
    #[error("transport failure: {0}")]
    Transport(String),
    /// The backend rejected the credentials; retrying cannot help.
    #[error("credentials rejected: {0}")]
    Credentials(String),
    #[error("hydration backend misconfigured: {0}")]
    Config(String),
}

impl HydrateError {
    pub fn is_retryable(&self) -> bool {
        matches!(self, HydrateError::Transport(_))
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Hydrated {
    /// The raw JSON object for the tweet, one line.
    Found(String),
    Absent,
}

pub trait HydrationClient {
    /// Looks up one batch. Ids missing from the returned map are treated as
    /// definitively not found.
    fn lookup(&self, ids: &[String]) -> Result<HashMap<String, String>, HydrateError>;

    fn batch_size(&self) -> usize {
        100
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct RetryPolicy {
    pub attempts: u32,
    pub initial_backoff: Duration,
}

impl Default for RetryPolicy {
    fn default() -> Self {
        Self {
            attempts: 3,
            initial_backoff: Duration::from_secs(1),
        }
    }
}

impl RetryPolicy {
    /// Delay before retry number `retry` (0-based): doubles each time.
    pub fn backoff(&self, retry: u32) -> Duration {
        self.initial_backoff * 2u32.saturating_pow(retry)
    }
}

pub fn hydrate(
    ids: &[String],
    client: &dyn HydrationClient,
    policy: RetryPolicy,
) -> Result<BTreeMap<String, Hydrated>, HydrateError> {
    hydrate_with(ids, client, policy, std::thread::sleep)
}

/// [`hydrate`] with an injectable sleep, used by tests to observe backoff.
pub fn hydrate_with(
    ids: &[String],
    client: &dyn HydrationClient,
    policy: RetryPolicy,
    mut sleep: impl FnMut(Duration),
) -> Result<BTreeMap<String, Hydrated>, HydrateError> {
    let mut out = BTreeMap::new();
    for batch in ids.chunks(client.batch_size().max(1)) {
        let mut attempt = 0;
        let found = loop {
            match client.lookup(batch) {
                Ok(found) => break found,
                Err(e) if e.is_retryable() && attempt + 1 < policy.attempts => {
                    log::warn!("hydration attempt {} failed: {e}", attempt + 1);
                    sleep(policy.backoff(attempt));
                    attempt += 1;
                }
                Err(e) => return Err(e),
            }
        };
        let mut found = found;
        for id in batch {
            let entry = match found.remove(id) {
                Some(raw) => Hydrated::Found(raw),
                None => Hydrated::Absent,
            };
            out.insert(id.clone(), entry);
        }
    }
    Ok(out)
}

/// Serves lookups from a local JSONL file keyed by each object's `id`.
#[derive(Debug, Clone, Default)]
pub struct FixtureBackend {
    records: HashMap<String, String>,
}

impl FixtureBackend {
    pub fn from_lines<I, S>(lines: I) -> Result<Self, HydrateError>
    where
        I: IntoIterator<Item = S>,
        S: AsRef<str>,
    {
        let mut records = HashMap::new();
        for (idx, line) in lines.into_iter().enumerate() {
            let line = line.as_ref().trim();
            if line.is_empty() {
                continue;
            }
            let v: serde_json::Value = serde_json::from_str(line)
                .map_err(|e| HydrateError::Config(format!("fixture line {}: {e}", idx + 1)))?;
            let id = v
                .get("id")
                .and_then(|id| id.as_str())
                .ok_or_else(|| HydrateError::Config(format!("fixture line {}: no id", idx + 1)))?;
            records.insert(id.to_string(), line.to_string());
        }
        Ok(Self { records })
    }

    pub fn open(path: &Path) -> Result<Self, HydrateError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| HydrateError::Config(format!("{}: {e}", path.display())))?;
        Self::from_lines(text.lines())
    }
}

impl HydrationClient for FixtureBackend {
    fn lookup(&self, ids: &[String]) -> Result<HashMap<String, String>, HydrateError> {
        Ok(ids
            .iter()
            .filter_map(|id| self.records.get(id).map(|r| (id.clone(), r.clone())))
            .collect())
    }
}

/// Minimum spacing between requests, shared by every clone.
#[derive(Debug, Clone)]
pub struct RateLimit {
    min_interval: Duration,
    last: Arc<Mutex<Option<Instant>>>,
}

impl RateLimit {
    pub fn new(min_interval: Duration) -> Self {
        Self {
            min_interval,
            last: Arc::new(Mutex::new(None)),
        }
    }

    /// Blocks until the budget allows another request.
    pub fn acquire(&self) {
        let mut last = self.last.lock().unwrap_or_else(|p| p.into_inner());
        if let Some(prev) = *last {
            let elapsed = prev.elapsed();
            if elapsed < self.min_interval {
                std::thread::sleep(self.min_interval - elapsed);
            }
        }
        *last = Some(Instant::now());
    }
}

/// Batch lookup over HTTP: `GET {endpoint}?ids=a,b,c` with a bearer token.
/// The response body is a JSON array of tweet objects.
pub struct HttpBackend {
    endpoint: String,
    token: String,
    agent: ureq::Agent,
    limit: RateLimit,
}

impl HttpBackend {
    pub fn new(endpoint: impl Into<String>, token: impl Into<String>, limit: RateLimit) -> Self {
        Self {
            endpoint: endpoint.into(),
            token: token.into(),
            agent: ureq::AgentBuilder::new()
                .timeout(Duration::from_secs(30))
                .build(),
            limit,
        }
    }

    /// Reads the endpoint and token from the environment.
    pub fn from_env(limit: RateLimit) -> Result<Self, HydrateError> {
        let var = |name: &str| {
            std::env::var(name)
                .ok()
                .filter(|v| !v.is_empty())
                .ok_or_else(|| HydrateError::Config(format!("{name} is not set")))
        };
        Ok(Self::new(var(ENDPOINT_VAR)?, var(TOKEN_VAR)?, limit))
    }
}

impl HydrationClient for HttpBackend {
    fn lookup(&self, ids: &[String]) -> Result<HashMap<String, String>, HydrateError> {
        self.limit.acquire();
        let resp = self
            .agent
            .get(&self.endpoint)
            .query("ids", &ids.join(","))
            .set("Authorization", &format!("Bearer {}", self.token))
            .call();
        let resp = match resp {
            Ok(r) => r,
            Err(ureq::Error::Status(code @ (401 | 403), _)) => {
                return Err(HydrateError::Credentials(format!("HTTP {code}")))
            }
            Err(ureq::Error::Status(code, _)) => {
                return Err(HydrateError::Transport(format!("HTTP {code}")))
            }
            Err(e) => return Err(HydrateError::Transport(e.to_string())),
        };
        let text = resp
            .into_string()
            .map_err(|e| HydrateError::Transport(format!("reading response: {e}")))?;
        let body: Vec<serde_json::Value> = serde_json::from_str(&text)
            .map_err(|e| HydrateError::Transport(format!("bad response body: {e}")))?;
        Ok(body
            .into_iter()
            .filter_map(|obj| {
                let id = obj.get("id")?.as_str()?.to_string();
                Some((id, obj.to_string()))
            })
            .collect())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::cell::Cell;

    fn ids(v: &[&str]) -> Vec<String> {
        v.iter().map(|s| s.to_string()).collect()
    }

    fn fixture() -> FixtureBackend {
        FixtureBackend::from_lines([
            r#"{"id":"1","full_text":"mask"}"#,
            r#"{"id":"2","full_text":"masks"}"#,
        ])
        .unwrap()
    }

    #[test]
    fn fixture_backend_marks_missing_absent() {
        let out = hydrate(&ids(&["1", "2", "3"]), &fixture(), RetryPolicy::default()).unwrap();
        assert_eq!(out.len(), 3);
        assert!(matches!(out["1"], Hydrated::Found(_)));
        assert!(matches!(out["2"], Hydrated::Found(_)));
        assert_eq!(out["3"], Hydrated::Absent);
    }

    #[test]
    fn empty_id_list() {
        let out = hydrate(&[], &fixture(), RetryPolicy::default()).unwrap();
        assert!(out.is_empty());
    }

    struct Flaky {
        failures_left: Cell<u32>,
        inner: FixtureBackend,
        error: HydrateError,
    }

    impl HydrationClient for Flaky {
        fn lookup(&self, ids: &[String]) -> Result<HashMap<String, String>, HydrateError> {
            if self.failures_left.get() > 0 {
                self.failures_left.set(self.failures_left.get() - 1);
                return Err(self.error.clone());
            }
            self.inner.lookup(ids)
        }
    }

    #[test]
    fn two_transport_failures_then_success() {
        let client = Flaky {
            failures_left: Cell::new(2),
            inner: fixture(),
            error: HydrateError::Transport("reset".into()),
        };
        let mut sleeps = Vec::new();
        let out = hydrate_with(&ids(&["1", "9"]), &client, RetryPolicy::default(), |d| {
            sleeps.push(d)
        })
        .unwrap();
        assert!(matches!(out["1"], Hydrated::Found(_)));
        assert_eq!(out["9"], Hydrated::Absent);
        assert_eq!(sleeps, [Duration::from_secs(1), Duration::from_secs(2)]);
    }

    #[test]
    fn three_transport_failures_exhaust_retries() {
        let client = Flaky {
            failures_left: Cell::new(3),
            inner: fixture(),
            error: HydrateError::Transport("reset".into()),
        };
        let err = hydrate_with(&ids(&["1"]), &client, RetryPolicy::default(), |_| {}).unwrap_err();
        assert!(err.is_retryable());
    }

    #[test]
    fn credential_rejection_is_not_retried() {
        let client = Flaky {
            failures_left: Cell::new(1),
            inner: fixture(),
            error: HydrateError::Credentials("HTTP 401".into()),
        };
        let mut slept = 0;
        let err = hydrate_with(&ids(&["1"]), &client, RetryPolicy::default(), |_| slept += 1)
            .unwrap_err();
        assert_eq!(err, HydrateError::Credentials("HTTP 401".into()));
        assert_eq!(slept, 0);
    }
}
