use std::collections::HashMap;
use std::path::{Path, PathBuf};
use std::sync::Mutex;
use std::time::Duration;

use chrono::Utc;

use super::{parse_issue, token_env_var, IssueRecord, ItsError};
use crate::linker::TrackerKind;

pub const DEFAULT_CACHE_TTL: Duration = Duration::from_secs(24 * 60 * 60);
pub const DEFAULT_CONCURRENCY: usize = 4;

#[derive(Debug, Clone, PartialEq)]
pub struct HttpResponse {
    pub status: u16,
    pub body: String,
}

/// The network seam. Non-2xx statuses are responses, not errors.
pub trait Transport: Send + Sync {
    fn get(&self, url: &str, headers: &[(String, String)]) -> Result<HttpResponse, String>;
}

pub struct UreqTransport {
    agent: ureq::Agent,
}

impl Default for UreqTransport {
    fn default() -> Self {
        let agent = ureq::Agent::config_builder()
            .http_status_as_error(false)
            .timeout_global(Some(Duration::from_secs(30)))
            .build()
            .into();
        Self { agent }
    }
}

impl Transport for UreqTransport {
    fn get(&self, url: &str, headers: &[(String, String)]) -> Result<HttpResponse, String> {
        let mut req = self.agent.get(url).header("Accept", "application/json");
        for (k, v) in headers {
            req = req.header(k.as_str(), v.as_str());
        }
        let mut resp = req.call().map_err(|e| e.to_string())?;
        let status = resp.status().as_u16();
        let body = resp.body_mut().read_to_string().map_err(|e| e.to_string())?;
        Ok(HttpResponse { status, body })
    }
}

/// Where a tracker's REST API lives.
///
/// For GitHub the base names the repository, for example
/// `https://api.github.com/repos/apache/commons-lang`.
#[derive(Debug, Clone, PartialEq)]
pub struct TrackerEndpoint {
    pub tracker: TrackerKind,
    pub base_url: String,
}

impl TrackerEndpoint {
    pub fn issue_url(&self, key: &str) -> String {
        let base = self.base_url.trim_end_matches('/');
        match self.tracker {
            TrackerKind::Bugzilla => format!("{base}/rest/bug/{key}"),
            TrackerKind::Github => format!("{base}/issues/{key}"),
            TrackerKind::Jira => format!("{base}/rest/api/2/issue/{key}"),
        }
    }

    fn auth_headers(&self, token: Option<String>) -> Vec<(String, String)> {
        let Some(token) = token else { return Vec::new() };
        match self.tracker {
            TrackerKind::Bugzilla => vec![("X-BUGZILLA-API-KEY".into(), token)],
            TrackerKind::Github | TrackerKind::Jira => vec![("Authorization".into(), format!("Bearer {token}"))],
        }
    }
}

fn file_stem(tracker: TrackerKind, key: &str) -> String {
    let safe: String = key
        .chars()
        .map(|c| if c.is_ascii_alphanumeric() || c == '-' { c } else { '_' })
        .collect();
    format!("{}_{safe}", tracker.as_str())
}

/// Fetched records on disk, trusted until `ttl` after fetching.
#[derive(Debug, Clone)]
pub struct DiskCache {
    dir: PathBuf,
    ttl: Duration,
}

impl DiskCache {
    pub fn new(dir: impl Into<PathBuf>, ttl: Duration) -> Self {
        Self { dir: dir.into(), ttl }
    }

    fn path(&self, tracker: TrackerKind, key: &str) -> PathBuf {
        self.dir.join(format!("{}.json", file_stem(tracker, key)))
    }

    pub fn load(&self, tracker: TrackerKind, key: &str) -> Option<IssueRecord> {
        let text = std::fs::read_to_string(self.path(tracker, key)).ok()?;
        let record: IssueRecord = serde_json::from_str(&text).ok()?;
        let age = (Utc::now() - record.fetched_at).to_std().unwrap_or_default();
        (age <= self.ttl).then_some(record)
    }

    pub fn store(&self, record: &IssueRecord) -> Result<(), ItsError> {
        std::fs::create_dir_all(&self.dir).map_err(|e| ItsError::Io(format!("{}: {e}", self.dir.display())))?;
        let path = self.path(record.tracker, &record.key);
        let json = serde_json::to_string_pretty(record).map_err(|e| ItsError::Io(e.to_string()))?;
        std::fs::write(&path, json).map_err(|e| ItsError::Io(format!("{}: {e}", path.display())))
    }
}

enum Source {
    /// Recorded responses named `{tracker}_{key}.json`; a missing file
    /// stands for a 404.
    Fixtures(PathBuf),
    Live {
        endpoint: TrackerEndpoint,
        transport: Box<dyn Transport>,
    },
}

/// Fetches issues for one tracker, with an in-run memo and an optional
/// disk cache in front of the network.
pub struct Gateway {
    tracker: TrackerKind,
    source: Source,
    memo: Mutex<HashMap<String, Result<IssueRecord, ItsError>>>,
    disk: Option<DiskCache>,
    attempts: usize,
    backoff: Duration,
    concurrency: usize,
}

impl Gateway {
    fn with_source(tracker: TrackerKind, source: Source) -> Self {
        Self {
            tracker,
            source,
            memo: Mutex::new(HashMap::new()),
            disk: None,
            attempts: 3,
            backoff: Duration::from_millis(500),
            concurrency: DEFAULT_CONCURRENCY,
        }
    }

    pub fn fixtures(tracker: TrackerKind, dir: impl AsRef<Path>) -> Self {
        Self::with_source(tracker, Source::Fixtures(dir.as_ref().to_path_buf()))
    }

    pub fn live(endpoint: TrackerEndpoint, transport: Box<dyn Transport>) -> Self {
        Self::with_source(endpoint.tracker, Source::Live { endpoint, transport })
    }

    pub fn with_disk_cache(mut self, cache: DiskCache) -> Self {
        self.disk = Some(cache);
        self
    }

    /// Rate-limited requests are tried `attempts` times, waiting `backoff`,
    /// then twice that, and so on.
    pub fn with_retry(mut self, attempts: usize, backoff: Duration) -> Self {
        self.attempts = attempts.max(1);
        self.backoff = backoff;
        self
    }

    pub fn with_concurrency(mut self, limit: usize) -> Self {
        self.concurrency = limit.max(1);
        self
    }

    pub fn tracker(&self) -> TrackerKind {
        self.tracker
    }

    pub fn fetch(&self, key: &str) -> Result<IssueRecord, ItsError> {
        if let Some(hit) = self.memo.lock().expect("memo lock").get(key) {
            return hit.clone();
        }
        let result = self.fetch_uncached(key);
        // Transient failures may succeed on a later call.
        if !matches!(result, Err(ItsError::Temporary { .. }) | Err(ItsError::Transport(_))) {
            self.memo.lock().expect("memo lock").insert(key.to_string(), result.clone());
        }
        result
    }

    fn fetch_uncached(&self, key: &str) -> Result<IssueRecord, ItsError> {
        match &self.source {
            Source::Fixtures(dir) => {
                let path = dir.join(format!("{}.json", file_stem(self.tracker, key)));
                let body = match std::fs::read_to_string(&path) {
                    Ok(body) => body,
                    Err(e) if e.kind() == std::io::ErrorKind::NotFound => {
                        return Err(ItsError::NotFound { key: key.to_string() })
                    }
                    Err(e) => return Err(ItsError::Io(format!("{}: {e}", path.display()))),
                };
                parse_issue(self.tracker, key, &body, Utc::now())
            }
            Source::Live { endpoint, transport } => {
                if let Some(record) = self.disk.as_ref().and_then(|d| d.load(self.tracker, key)) {
                    return Ok(record);
                }
                let record = self.request(endpoint, transport.as_ref(), key)?;
                if let Some(disk) = &self.disk {
                    if let Err(e) = disk.store(&record) {
                        log::warn!("could not cache {key}: {e}");
                    }
                }
                Ok(record)
            }
        }
    }

    fn request(&self, endpoint: &TrackerEndpoint, transport: &dyn Transport, key: &str) -> Result<IssueRecord, ItsError> {
        let env_var = token_env_var(self.tracker);
        let headers = endpoint.auth_headers(std::env::var(env_var).ok().filter(|t| !t.is_empty()));
        let url = endpoint.issue_url(key);
        let mut wait = self.backoff;
        for attempt in 1..=self.attempts {
            let resp = transport.get(&url, &headers).map_err(ItsError::Transport)?;
            match resp.status {
                200..=299 => return parse_issue(self.tracker, key, &resp.body, Utc::now()),
                404 => return Err(ItsError::NotFound { key: key.to_string() }),
                401 | 403 => return Err(ItsError::Auth { status: resp.status, env_var }),
                429 | 503 if attempt < self.attempts => {
                    log::info!("{url}: HTTP {}, retrying in {wait:?}", resp.status);
                    std::thread::sleep(wait);
                    wait *= 2;
                }
                429 | 503 => {
                    return Err(ItsError::Temporary {
                        key: key.to_string(),
                        attempts: self.attempts,
                        status: resp.status,
                    })
                }
                status => return Err(ItsError::Http { key: key.to_string(), status }),
            }
        }
        unreachable!("the final attempt always returns")
    }

    /// Fetch every distinct key, at most `concurrency` at a time. Results
    /// follow the first appearance of each key.
    pub fn fetch_all(&self, keys: &[String]) -> Vec<(String, Result<IssueRecord, ItsError>)> {
        let mut distinct: Vec<String> = Vec::new();
        for k in keys {
            if !distinct.contains(k) {
                distinct.push(k.clone());
            }
        }
        let next = Mutex::new(0usize);
        let results: Mutex<Vec<Option<Result<IssueRecord, ItsError>>>> = Mutex::new(vec![None; distinct.len()]);
        std::thread::scope(|scope| {
            for _ in 0..self.concurrency.min(distinct.len()) {
                scope.spawn(|| loop {
                    let i = {
                        let mut n = next.lock().expect("queue lock");
                        let i = *n;
                        *n += 1;
                        i
                    };
                    if i >= distinct.len() {
                        break;
                    }
                    let r = self.fetch(&distinct[i]);
                    results.lock().expect("results lock")[i] = Some(r);
                });
            }
        });
        distinct
            .into_iter()
            .zip(results.into_inner().expect("results lock"))
            .map(|(k, r)| (k, r.expect("every key fetched")))
            .collect()
    }
}
