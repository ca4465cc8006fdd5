//! Typed client for the review service's JSON API.

use conceal_core::labels::{LabelInput, LabelRecord};
use conceal_core::report::ReportBundle;
use conceal_core::review::{LabelHistory, Perspectives, SamplePage, SampleQuery};
use serde::de::DeserializeOwned;
use serde::Deserialize;
use url::Url;

#[derive(Debug, thiserror::Error)]
pub enum ClientError {
    #[error("invalid server url: {0}")]
    Url(#[from] url::ParseError),
    #[error("server url {0} cannot carry a path")]
    NotABase(Url),
    #[error("request failed: {0}")]
    Http(#[from] reqwest::Error),
    #[error("server answered {status} ({kind}): {message}")]
    Api { status: u16, kind: String, message: String },
}

impl ClientError {
    pub fn status(&self) -> Option<u16> {
        match self {
            ClientError::Api { status, .. } => Some(*status),
            ClientError::Http(e) => e.status().map(|s| s.as_u16()),
            _ => None,
        }
    }

    pub fn kind(&self) -> Option<&str> {
        match self {
            ClientError::Api { kind, .. } => Some(kind),
            _ => None,
        }
    }
}

#[derive(Deserialize)]
struct ErrorBody {
    kind: String,
    error: String,
}

#[derive(Debug, Clone)]
pub struct ReviewClient {
    base: Url,
    http: reqwest::Client,
}

impl ReviewClient {
    pub fn new(base: &str) -> Result<ReviewClient, ClientError> {
        let base = Url::parse(base)?;
        if base.cannot_be_a_base() {
            return Err(ClientError::NotABase(base));
        }
        Ok(ReviewClient {
            base,
            http: reqwest::Client::new(),
        })
    }

    pub fn base(&self) -> &Url {
        &self.base
    }

    /// Each segment is percent-encoded on its own, so ids with `/` stay intact.
    fn url(&self, segments: &[&str]) -> Url {
        let mut url = self.base.clone();
        {
            let mut path = url.path_segments_mut().expect("checked in new");
            path.pop_if_empty();
            path.extend(segments);
        }
        url
    }

    async fn decode<T: DeserializeOwned>(resp: reqwest::Response) -> Result<T, ClientError> {
        let status = resp.status();
        if status.is_success() {
            return Ok(resp.json().await?);
        }
        let text = resp.text().await?;
        let (kind, message) = match serde_json::from_str::<ErrorBody>(&text) {
            Ok(b) => (b.kind, b.error),
            Err(_) => ("unknown".to_string(), text),
        };
        Err(ClientError::Api {
            status: status.as_u16(),
            kind,
            message,
        })
    }

    pub async fn list_sample(&self, query: &SampleQuery) -> Result<SamplePage, ClientError> {
        let mut url = self.url(&["api", "sample"]);
        {
            let mut q = url.query_pairs_mut();
            if let Some(s) = query.stratum {
                q.append_pair("stratum", &s.to_string());
            }
            if let Some(l) = query.labeled {
                q.append_pair("labeled", if l { "true" } else { "false" });
            }
            if let Some(p) = query.page {
                q.append_pair("page", &p.to_string());
            }
            if let Some(n) = query.page_size {
                q.append_pair("page_size", &n.to_string());
            }
        }
        if url.query() == Some("") {
            url.set_query(None);
        }
        Self::decode(self.http.get(url).send().await?).await
    }

    pub async fn perspectives(&self, id: &str) -> Result<Perspectives, ClientError> {
        let url = self.url(&["api", "emails", id, "perspectives"]);
        Self::decode(self.http.get(url).send().await?).await
    }

    pub async fn labels(&self, id: &str) -> Result<LabelHistory, ClientError> {
        let url = self.url(&["api", "emails", id, "labels"]);
        Self::decode(self.http.get(url).send().await?).await
    }

    pub async fn post_label(&self, id: &str, label: &LabelInput) -> Result<LabelRecord, ClientError> {
        let url = self.url(&["api", "emails", id, "labels"]);
        Self::decode(self.http.post(url).json(label).send().await?).await
    }

    pub async fn stats(&self) -> Result<ReportBundle, ClientError> {
        let url = self.url(&["api", "stats"]);
        Self::decode(self.http.get(url).send().await?).await
    }
}
