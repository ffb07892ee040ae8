//! Typed client for the simulation service.

use futures::stream::{self, Stream, StreamExt};
use reqwest::{Method, RequestBuilder, StatusCode};
use serde::de::DeserializeOwned;
use serde::Serialize;
use thiserror::Error;
use vinesim_core::bench::BenchmarkTable;
use vinesim_core::calibration::{CalibrationReport, Catalog};
use vinesim_core::protocol::{
    CreateSessionRequest, ErrorBody, Health, PreviewRequest, PreviewResponse, RunRequest, SessionCreated,
    SessionMessage, ShapeView, Snapshot, SolveRequest,
};
use vinesim_core::scenario::RunRecord;

#[derive(Debug, Error)]
pub enum ClientError {
    /// The service answered with an error body.
    #[error("{kind} error ({status}): {message}")]
    Api {
        status: StatusCode,
        kind: String,
        message: String,
    },
    #[error("transport: {0}")]
    Transport(#[from] reqwest::Error),
    #[error("bad response: {0}")]
    Decode(String),
}

impl ClientError {
    /// `kind` of an API error, `transport` or `decode` otherwise.
    pub fn kind(&self) -> &str {
        match self {
            ClientError::Api { kind, .. } => kind,
            ClientError::Transport(_) => "transport",
            ClientError::Decode(_) => "decode",
        }
    }
}

pub type Result<T> = std::result::Result<T, ClientError>;

#[derive(Debug, Clone)]
pub struct Client {
    base: String,
    http: reqwest::Client,
}

impl Client {
    /// `base` is the service root, e.g. `http://127.0.0.1:7878`.
    pub fn new(base: impl Into<String>) -> Self {
        Self {
            base: base.into().trim_end_matches('/').to_string(),
            http: reqwest::Client::new(),
        }
    }

    pub fn base(&self) -> &str {
        &self.base
    }

    fn req(&self, method: Method, path: &str) -> RequestBuilder {
        self.http.request(method, format!("{}{path}", self.base))
    }

    async fn send<T: DeserializeOwned>(&self, rb: RequestBuilder) -> Result<T> {
        let resp = check(rb.send().await?).await?;
        let bytes = resp.bytes().await?;
        serde_json::from_slice(&bytes).map_err(|e| ClientError::Decode(e.to_string()))
    }

    async fn get<T: DeserializeOwned>(&self, path: &str) -> Result<T> {
        self.send(self.req(Method::GET, path)).await
    }

    async fn post<B: Serialize + ?Sized, T: DeserializeOwned>(&self, path: &str, body: &B) -> Result<T> {
        self.send(self.req(Method::POST, path).json(body)).await
    }

    pub async fn health(&self) -> Result<Health> {
        self.get("/v1/health").await
    }

    pub async fn catalog(&self) -> Result<Catalog> {
        self.get("/v1/catalog").await
    }

    /// A catalog entry or dataset, as raw JSON.
    pub async fn catalog_item(&self, key: &str) -> Result<serde_json::Value> {
        self.get(&format!("/v1/catalog/{key}")).await
    }

    pub async fn calibrate(&self) -> Result<CalibrationReport> {
        self.post("/v1/calibrate", &serde_json::json!({})).await
    }

    pub async fn bench(&self) -> Result<BenchmarkTable> {
        self.get("/v1/bench").await
    }

    pub async fn run(&self, req: &RunRequest) -> Result<RunRecord> {
        self.post("/v1/scenarios/run", req).await
    }

    pub async fn solve(&self, req: &SolveRequest) -> Result<ShapeView> {
        self.post("/v1/solve", req).await
    }

    pub async fn create_session(&self, req: &CreateSessionRequest) -> Result<SessionCreated> {
        self.post("/v1/sessions", req).await
    }

    pub async fn sessions(&self) -> Result<Vec<String>> {
        self.get("/v1/sessions").await
    }

    pub async fn snapshot(&self, id: &str) -> Result<Snapshot> {
        self.get(&format!("/v1/sessions/{id}")).await
    }

    /// Sends one or more newline-separated command lines; returns one reply
    /// per line.
    pub async fn command(&self, id: &str, lines: &str) -> Result<Vec<SessionMessage>> {
        let rb = self
            .req(Method::POST, &format!("/v1/sessions/{id}/commands"))
            .header(reqwest::header::CONTENT_TYPE, "text/plain")
            .body(lines.to_string());
        self.send(rb).await
    }

    pub async fn preview(&self, id: &str, req: &PreviewRequest) -> Result<PreviewResponse> {
        self.post(&format!("/v1/sessions/{id}/preview"), req).await
    }

    pub async fn close(&self, id: &str) -> Result<()> {
        check(self.req(Method::DELETE, &format!("/v1/sessions/{id}")).send().await?).await?;
        Ok(())
    }

    /// Live session messages, starting with `hello`. Ends after `closed`.
    pub async fn stream(&self, id: &str) -> Result<impl Stream<Item = Result<SessionMessage>> + Unpin> {
        let resp = check(
            self.req(Method::GET, &format!("/v1/sessions/{id}/stream"))
                .send()
                .await?,
        )
        .await?;
        Ok(ndjson(resp.bytes_stream()))
    }
}

async fn check(resp: reqwest::Response) -> Result<reqwest::Response> {
    let status = resp.status();
    if status.is_success() {
        return Ok(resp);
    }
    let text = resp.text().await.unwrap_or_default();
    let (kind, message) = match serde_json::from_str::<ErrorBody>(&text) {
        Ok(b) => (b.kind, b.error),
        Err(_) => ("http".to_string(), text),
    };
    Err(ClientError::Api { status, kind, message })
}

/// Splits a byte stream into lines and decodes each as a message.
fn ndjson<S, B, E>(bytes: S) -> impl Stream<Item = Result<SessionMessage>> + Unpin
where
    S: Stream<Item = std::result::Result<B, E>> + Unpin,
    B: AsRef<[u8]>,
    E: Into<ClientError>,
{
    let state = (bytes, Vec::<u8>::new(), false);
    Box::pin(stream::unfold(state, |(mut bytes, mut buf, mut done)| async move {
        loop {
            if let Some(pos) = buf.iter().position(|b| *b == b'\n') {
                let line: Vec<u8> = buf.drain(..=pos).collect();
                if line.iter().all(u8::is_ascii_whitespace) {
                    continue;
                }
                let msg = serde_json::from_slice(&line).map_err(|e| ClientError::Decode(e.to_string()));
                return Some((msg, (bytes, buf, done)));
            }
            if done {
                return None;
            }
            match bytes.next().await {
                Some(Ok(chunk)) => buf.extend_from_slice(chunk.as_ref()),
                Some(Err(e)) => return Some((Err(e.into()), (bytes, buf, true))),
                None => {
                    // unterminated last line
                    done = true;
                    buf.push(b'\n');
                }
            }
        }
    }))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[tokio::test]
    async fn splits_lines_across_chunks() {
        let chunks: Vec<std::result::Result<&[u8], ClientError>> = vec![
            Ok(br#"{"type":"closed","#),
            Ok(b"\"reason\":\"a\"}\n\n{\"type\":\"closed\",\"reason\":\"b\"}"),
        ];
        let out: Vec<_> = ndjson(stream::iter(chunks)).collect().await;
        assert_eq!(out.len(), 2);
        assert!(matches!(&out[1], Ok(SessionMessage::Closed { reason }) if reason == "b"));
    }

    #[tokio::test]
    async fn bad_line_is_a_decode_error() {
        let chunks: Vec<std::result::Result<&[u8], ClientError>> = vec![Ok(b"nope\n")];
        let out: Vec<_> = ndjson(stream::iter(chunks)).collect().await;
        assert!(matches!(out[0], Err(ClientError::Decode(_))));
    }
}
