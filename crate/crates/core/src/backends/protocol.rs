//! Newline-delimited JSON messages exchanged with external proposal models.
//!
//! Request:
//! `{"v":1,"role":"subgoal","domain":"rf","k":N,"spec":{"examples":[{"inputs":[..],"remaining_output":"..","bindings":[[name,value],..]}]}}`
//!
//! Response: `{"v":1,"proposals":[{"text":"..","logp":-1.23},..]}`.
//! Unknown fields are ignored in both directions.

use std::io::{self, BufRead, Write};

use log::warn;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::domain::{Domain, Spec};
use crate::search::{Proposal, Role};
use crate::split::DomainKind;

pub const VERSION: u32 = 1;

#[derive(Debug, Error)]
pub enum ProtocolError {
    #[error("malformed message: {0}")]
    Json(#[from] serde_json::Error),
    #[error("unsupported protocol version {0}")]
    Version(u32),
    #[error("proposal {index} has log-probability {logp} > 0")]
    PositiveLogp { index: usize, logp: f64 },
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct WireExample {
    pub inputs: Vec<String>,
    pub remaining_output: String,
    pub bindings: Vec<(String, String)>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct WireSpec {
    pub examples: Vec<WireExample>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Request {
    pub v: u32,
    pub role: Role,
    pub domain: DomainKind,
    pub k: usize,
    pub spec: WireSpec,
}

impl Request {
    pub fn new<D: Domain>(role: Role, k: usize, spec: &Spec<D>) -> Self {
        Request {
            v: VERSION,
            role,
            domain: D::KIND,
            k,
            spec: WireSpec {
                examples: spec
                    .examples
                    .iter()
                    .map(|e| WireExample {
                        inputs: D::render_input(&e.input),
                        remaining_output: D::render_value(&e.output),
                        bindings: D::render_bindings(&e.state),
                    })
                    .collect(),
            },
        }
    }

    pub fn to_line(&self) -> String {
        serde_json::to_string(self).expect("request serializes")
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WireProposal {
    pub text: String,
    pub logp: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Response {
    pub v: u32,
    pub proposals: Vec<WireProposal>,
}

impl Response {
    pub fn to_line(&self) -> String {
        serde_json::to_string(self).expect("response serializes")
    }
}

/// Parses and validates one response line, keeping at most `k` proposals
/// in descending log-probability order.
pub fn parse_response(line: &str, k: usize) -> Result<Vec<Proposal>, ProtocolError> {
    let response: Response = serde_json::from_str(line)?;
    if response.v != VERSION {
        return Err(ProtocolError::Version(response.v));
    }
    if let Some((index, p)) = response
        .proposals
        .iter()
        .enumerate()
        .find(|(_, p)| !(p.logp <= 0.0))
    {
        return Err(ProtocolError::PositiveLogp {
            index,
            logp: p.logp,
        });
    }
    let mut out: Vec<Proposal> = response
        .proposals
        .into_iter()
        .map(|p| Proposal::new(p.text, p.logp))
        .collect();
    out.sort_by(|a, b| b.logp.total_cmp(&a.logp));
    out.truncate(k);
    Ok(out)
}

/// Behavior of the loopback test server.
#[derive(Debug, Clone, Default)]
pub struct EchoConfig {
    /// Fixed proposals (log-probability 0) returned for every request.
    /// When empty, the single proposal is the request itself, re-serialized.
    pub replies: Vec<String>,
    /// 1-based numbers of responses to replace by a line that is not valid JSON.
    pub malformed: Vec<usize>,
}

/// Answers requests line by line until the reader is exhausted. Lines that
/// are not valid requests get a response with no proposals.
pub fn serve(
    reader: impl BufRead,
    mut writer: impl Write,
    config: &EchoConfig,
) -> io::Result<usize> {
    let mut served = 0;
    for line in reader.lines() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        served += 1;
        if config.malformed.contains(&served) {
            writeln!(writer, "{{\"v\":1,\"proposals\":[{{\"text\":")?;
            writer.flush()?;
            continue;
        }
        let proposals = match serde_json::from_str::<Request>(&line) {
            Ok(request) if config.replies.is_empty() => vec![WireProposal {
                text: request.to_line(),
                logp: 0.0,
            }],
            Ok(request) => config
                .replies
                .iter()
                .take(request.k)
                .map(|t| WireProposal {
                    text: t.clone(),
                    logp: 0.0,
                })
                .collect(),
            Err(e) => {
                warn!("ignoring bad request: {e}");
                Vec::new()
            }
        };
        let response = Response {
            v: VERSION,
            proposals,
        };
        writeln!(writer, "{}", response.to_line())?;
        writer.flush()?;
    }
    Ok(served)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::deepcoder::DcValue;
    use crate::domain::{Dc, Rf};

    #[test]
    fn request_layout_is_exact() {
        let spec: Spec<Dc> =
            Spec::new([(vec![DcValue::List(vec![5, 3, -4])], DcValue::List(vec![9]))]);
        let line = Request::new(Role::Synthesizer, 3, &spec).to_line();
        assert_eq!(
            line,
            r#"{"v":1,"role":"synthesizer","domain":"dc","k":3,"spec":{"examples":[{"inputs":["[5, 3, -4]"],"remaining_output":"[9]","bindings":[["x0","[5, 3, -4]"]]}]}}"#
        );
        let spec: Spec<Rf> = Spec::new([("a b".to_string(), "b".to_string())]);
        let line = Request::new(Role::Subgoal, 1, &spec).to_line();
        assert_eq!(
            line,
            r#"{"v":1,"role":"subgoal","domain":"rf","k":1,"spec":{"examples":[{"inputs":["a b"],"remaining_output":"b","bindings":[]}]}}"#
        );
    }

    #[test]
    fn responses_are_validated() {
        let ok = r#"{"v":1,"proposals":[{"text":"a","logp":-2.0},{"text":"b","logp":-0.5,"extra":1}],"note":"x"}"#;
        let p = parse_response(ok, 5).unwrap();
        assert_eq!(p[0].text, "b");
        assert_eq!(parse_response(ok, 1).unwrap().len(), 1);
        let positive = r#"{"v":1,"proposals":[{"text":"a","logp":0.5}]}"#;
        assert!(matches!(
            parse_response(positive, 5),
            Err(ProtocolError::PositiveLogp { .. })
        ));
        assert!(matches!(
            parse_response(r#"{"v":2,"proposals":[]}"#, 5),
            Err(ProtocolError::Version(2))
        ));
        assert!(parse_response("{\"v\":1,", 5).is_err());
    }

    #[test]
    fn echo_server_round_trip() {
        let spec: Spec<Rf> = Spec::new([("a b".to_string(), "b".to_string())]);
        let req = Request::new(Role::Combined, 2, &spec).to_line();
        let input = format!("{req}\n\nnot json\n{req}\n");
        let mut out = Vec::new();
        let config = EchoConfig {
            malformed: vec![3],
            ..Default::default()
        };
        assert_eq!(serve(input.as_bytes(), &mut out, &config).unwrap(), 3);
        let lines: Vec<&str> = std::str::from_utf8(&out).unwrap().lines().collect();
        assert_eq!(parse_response(lines[0], 2).unwrap()[0].text, req);
        assert!(parse_response(lines[1], 2).unwrap().is_empty());
        assert!(parse_response(lines[2], 2).is_err());
    }
}
