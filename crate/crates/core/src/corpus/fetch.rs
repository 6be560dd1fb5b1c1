//! Minimal Bugzilla REST client for enhancement-type issues.
//!
//! Requests go through a [`Transport`], so the parsing and paging logic can
//! be exercised against recorded responses. A live HTTP transport is
//! available with the `http` feature.

use std::collections::BTreeMap;
use std::path::PathBuf;

use serde::{Deserialize, Serialize};

use super::RequirementRecord;
use crate::{Error, Result};

pub const FETCH_FIELDS: &str = "id,summary,product,priority,type,depends_on,see_also";

pub trait Transport {
    fn get(&self, url: &str) -> Result<String>;
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct FetchConfig {
    /// REST base, e.g. `https://bugzilla.mozilla.org/rest`.
    pub endpoint: String,
    pub product: String,
    pub issue_type: String,
    pub page_size: usize,
    pub max_records: usize,
}

impl Default for FetchConfig {
    fn default() -> Self {
        FetchConfig {
            endpoint: "https://bugzilla.mozilla.org/rest".into(),
            product: "Firefox".into(),
            issue_type: "enhancement".into(),
            page_size: 500,
            max_records: 5000,
        }
    }
}

impl FetchConfig {
    pub fn page_url(&self, offset: usize) -> String {
        format!(
            "{}/bug?product={}&type={}&include_fields={}&limit={}&offset={}",
            self.endpoint.trim_end_matches('/'),
            encode(&self.product),
            encode(&self.issue_type),
            FETCH_FIELDS,
            self.page_size,
            offset
        )
    }
}

fn encode(s: &str) -> String {
    s.bytes()
        .map(|b| match b {
            b'A'..=b'Z' | b'a'..=b'z' | b'0'..=b'9' | b'-' | b'_' | b'.' | b'~' => {
                (b as char).to_string()
            }
            _ => format!("%{b:02X}"),
        })
        .collect()
}

#[derive(Deserialize)]
struct BugList {
    bugs: Vec<Bug>,
}

#[derive(Deserialize)]
struct Bug {
    id: u64,
    #[serde(default)]
    summary: String,
    #[serde(default)]
    product: String,
    #[serde(default)]
    priority: String,
    #[serde(default, rename = "type")]
    issue_type: String,
    #[serde(default)]
    depends_on: Vec<u64>,
    #[serde(default)]
    see_also: Vec<String>,
}

/// Extracts a bug id from a `see_also` entry, which is either a bare id or
/// a `show_bug.cgi?id=N` URL on the same tracker. Links to other trackers
/// yield `None`.
pub fn see_also_id(entry: &str, endpoint: &str) -> Option<String> {
    let entry = entry.trim();
    if !entry.is_empty() && entry.bytes().all(|b| b.is_ascii_digit()) {
        return Some(entry.to_string());
    }
    let host = |url: &str| {
        url.split("://")
            .nth(1)
            .and_then(|rest| rest.split('/').next())
            .map(str::to_ascii_lowercase)
    };
    if host(entry)? != host(endpoint)? {
        return None;
    }
    let (_, query) = entry.split_once("show_bug.cgi?")?;
    query
        .split('&')
        .find_map(|kv| kv.strip_prefix("id="))
        .filter(|id| !id.is_empty() && id.bytes().all(|b| b.is_ascii_digit()))
        .map(str::to_string)
}

/// Parses one `GET /bug` response body.
pub fn parse_bug_list(body: &str, endpoint: &str) -> Result<Vec<RequirementRecord>> {
    let list: BugList = serde_json::from_str(body)?;
    Ok(list
        .bugs
        .into_iter()
        .map(|bug| {
            let id = bug.id.to_string();
            let mut rec = RequirementRecord::new(id.clone(), bug.summary);
            rec.product = bug.product;
            rec.priority = bug.priority;
            rec.issue_type = bug.issue_type;
            rec.depends_on = bug
                .depends_on
                .iter()
                .map(u64::to_string)
                .filter(|d| *d != id)
                .collect();
            rec.see_also = bug
                .see_also
                .iter()
                .filter_map(|s| see_also_id(s, endpoint))
                .filter(|s| *s != id)
                .collect();
            rec
        })
        .collect())
}

/// Pages through the endpoint until a short page or `max_records`.
/// Records are returned sorted by id with duplicates removed.
pub fn fetch_records(
    config: &FetchConfig,
    transport: &dyn Transport,
) -> Result<Vec<RequirementRecord>> {
    if config.page_size == 0 {
        return Err(Error::InvalidArgument("page_size must be positive".into()));
    }
    let mut by_id = BTreeMap::new();
    let mut offset = 0;
    while offset < config.max_records {
        let body = transport.get(&config.page_url(offset))?;
        let page = parse_bug_list(&body, &config.endpoint)?;
        let n = page.len();
        for rec in page {
            by_id.entry(rec.id.clone()).or_insert(rec);
        }
        offset += config.page_size;
        if n < config.page_size {
            break;
        }
    }
    Ok(by_id.into_values().take(config.max_records).collect())
}

/// Serves recorded responses keyed by exact URL, or a single body for any
/// URL.
#[derive(Clone, Debug, Default)]
pub struct FixtureTransport {
    pages: BTreeMap<String, String>,
    fallback: Option<String>,
}

impl FixtureTransport {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn with_page(mut self, url: impl Into<String>, body: impl Into<String>) -> Self {
        self.pages.insert(url.into(), body.into());
        self
    }

    pub fn single(body: impl Into<String>) -> Self {
        FixtureTransport {
            pages: BTreeMap::new(),
            fallback: Some(body.into()),
        }
    }

    pub fn from_file(path: impl Into<PathBuf>) -> Result<Self> {
        Ok(Self::single(std::fs::read_to_string(path.into())?))
    }
}

impl Transport for FixtureTransport {
    fn get(&self, url: &str) -> Result<String> {
        self.pages
            .get(url)
            .or(self.fallback.as_ref())
            .cloned()
            .ok_or_else(|| Error::Transport(format!("no recorded response for {url}")))
    }
}

#[cfg(feature = "http")]
pub struct HttpTransport;

#[cfg(feature = "http")]
impl Transport for HttpTransport {
    fn get(&self, url: &str) -> Result<String> {
        let mut response = ureq::get(url)
            .header("Accept", "application/json")
            .call()
            .map_err(|e| Error::Transport(e.to_string()))?;
        response
            .body_mut()
            .read_to_string()
            .map_err(|e| Error::Transport(e.to_string()))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn url_has_fields_and_paging() {
        let cfg = FetchConfig {
            page_size: 2,
            ..FetchConfig::default()
        };
        assert_eq!(
            cfg.page_url(4),
            "https://bugzilla.mozilla.org/rest/bug?product=Firefox&type=enhancement\
             &include_fields=id,summary,product,priority,type,depends_on,see_also&limit=2&offset=4"
        );
    }

    #[test]
    fn see_also_parsing() {
        let ep = "https://bugzilla.mozilla.org/rest";
        assert_eq!(
            see_also_id("https://bugzilla.mozilla.org/show_bug.cgi?id=1234", ep).as_deref(),
            Some("1234")
        );
        assert_eq!(see_also_id("https://github.com/foo/bar/issues/3", ep), None);
        assert_eq!(
            see_also_id("https://bugs.webkit.org/show_bug.cgi?id=5", ep),
            None
        );
        assert_eq!(see_also_id("77", ep).as_deref(), Some("77"));
    }
}
