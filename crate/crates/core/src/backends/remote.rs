//! Client side of the wire protocol.

use std::io::{self, BufRead, BufReader, Read, Write};
use std::marker::PhantomData;
use std::net::TcpStream;
use std::process::{Child, Command, Stdio};
use std::str::FromStr;
use std::sync::mpsc::{self, Receiver, RecvTimeoutError};
use std::sync::Mutex;
use std::thread;
use std::time::Duration;

use log::{debug, warn};
use thiserror::Error;

use super::protocol::{parse_response, ProtocolError, Request};
use crate::domain::{Domain, Spec};
use crate::search::{Backend, Proposal, Role};

#[derive(Debug, Error)]
pub enum RemoteError {
    #[error("bad endpoint {0:?}: expected tcp:HOST:PORT or exec:COMMAND [ARGS...]")]
    Endpoint(String),
    #[error("i/o: {0}")]
    Io(#[from] io::Error),
    #[error("no response within {0:?}")]
    Timeout(Duration),
    #[error("endpoint closed the connection")]
    Closed,
    #[error(transparent)]
    Protocol(#[from] ProtocolError),
}

/// Where a model server lives: a TCP address, or a command whose standard
/// streams carry the protocol.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Endpoint {
    Tcp(String),
    Exec(Vec<String>),
}

impl FromStr for Endpoint {
    type Err = RemoteError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        if let Some(addr) = s.strip_prefix("tcp:") {
            if addr.rsplit_once(':').is_some() {
                return Ok(Endpoint::Tcp(addr.to_owned()));
            }
        } else if let Some(cmd) = s.strip_prefix("exec:") {
            let argv: Vec<String> = cmd.split_whitespace().map(str::to_owned).collect();
            if !argv.is_empty() {
                return Ok(Endpoint::Exec(argv));
            }
        }
        Err(RemoteError::Endpoint(s.to_owned()))
    }
}

struct Connection {
    writer: Box<dyn Write + Send>,
    lines: Receiver<io::Result<String>>,
    child: Option<Child>,
}

impl Drop for Connection {
    fn drop(&mut self) {
        if let Some(child) = &mut self.child {
            let _ = child.kill();
            let _ = child.wait();
        }
    }
}

fn pump(source: impl Read + Send + 'static) -> Receiver<io::Result<String>> {
    let (tx, rx) = mpsc::channel();
    thread::spawn(move || {
        for line in BufReader::new(source).lines() {
            if tx.send(line).is_err() {
                break;
            }
        }
    });
    rx
}

impl Connection {
    fn open(endpoint: &Endpoint) -> Result<Connection, RemoteError> {
        match endpoint {
            Endpoint::Tcp(addr) => {
                let stream = TcpStream::connect(addr)?;
                stream.set_nodelay(true)?;
                let lines = pump(stream.try_clone()?);
                Ok(Connection {
                    writer: Box::new(stream),
                    lines,
                    child: None,
                })
            }
            Endpoint::Exec(argv) => {
                let mut child = Command::new(&argv[0])
                    .args(&argv[1..])
                    .stdin(Stdio::piped())
                    .stdout(Stdio::piped())
                    .spawn()?;
                let stdin = child.stdin.take().expect("piped stdin");
                let stdout = child.stdout.take().expect("piped stdout");
                Ok(Connection {
                    writer: Box::new(stdin),
                    lines: pump(stdout),
                    child: Some(child),
                })
            }
        }
    }

    fn exchange(&mut self, line: &str, timeout: Duration) -> Result<String, RemoteError> {
        self.writer.write_all(line.as_bytes())?;
        self.writer.write_all(b"\n")?;
        self.writer.flush()?;
        match self.lines.recv_timeout(timeout) {
            Ok(line) => Ok(line?),
            Err(RecvTimeoutError::Timeout) => Err(RemoteError::Timeout(timeout)),
            Err(RecvTimeoutError::Disconnected) => Err(RemoteError::Closed),
        }
    }
}

/// Forwards proposal requests to an external server. Requests on one
/// backend are serialized over a single lazily opened connection; transport
/// failures drop the connection so the next request reconnects. Any failure
/// yields no proposals and a warning.
pub struct RemoteBackend<D> {
    endpoint: Endpoint,
    role: Role,
    timeout: Duration,
    conn: Mutex<Option<Connection>>,
    _domain: PhantomData<D>,
}

impl<D: Domain> RemoteBackend<D> {
    pub fn new(endpoint: Endpoint, role: Role, timeout: Duration) -> Self {
        RemoteBackend {
            endpoint,
            role,
            timeout,
            conn: Mutex::new(None),
            _domain: PhantomData,
        }
    }

    /// One request/response exchange.
    pub fn request(&self, spec: &Spec<D>, k: usize) -> Result<Vec<Proposal>, RemoteError> {
        let line = Request::new(self.role, k, spec).to_line();
        let mut guard = self.conn.lock().unwrap_or_else(|e| e.into_inner());
        if guard.is_none() {
            *guard = Some(Connection::open(&self.endpoint)?);
        }
        let conn = guard.as_mut().expect("just opened");
        let reply = match conn.exchange(&line, self.timeout) {
            Ok(reply) => reply,
            Err(e) => {
                // a late or partial reply would desynchronize the stream
                *guard = None;
                return Err(e);
            }
        };
        drop(guard);
        debug!("remote reply: {reply}");
        Ok(parse_response(&reply, k)?)
    }
}

impl<D: Domain> Backend<D> for RemoteBackend<D> {
    fn role(&self) -> Role {
        self.role
    }

    fn propose(&self, spec: &Spec<D>, k: usize) -> Vec<Proposal> {
        if k == 0 {
            return Vec::new();
        }
        match self.request(spec, k) {
            Ok(p) => p,
            Err(e) => {
                warn!("dropping response from {:?}: {e}", self.endpoint);
                Vec::new()
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::backends::protocol::{serve, EchoConfig};
    use crate::domain::Rf;
    use std::net::TcpListener;

    fn spawn_server(config: EchoConfig) -> String {
        let listener = TcpListener::bind("127.0.0.1:0").unwrap();
        let addr = listener.local_addr().unwrap().to_string();
        thread::spawn(move || {
            for stream in listener.incoming() {
                let stream = stream.unwrap();
                let config = config.clone();
                thread::spawn(move || {
                    let reader = BufReader::new(stream.try_clone().unwrap());
                    let _ = serve(reader, stream, &config);
                });
            }
        });
        format!("tcp:{addr}")
    }

    #[test]
    fn endpoints_parse() {
        assert_eq!(
            "tcp:127.0.0.1:9000".parse::<Endpoint>().unwrap(),
            Endpoint::Tcp("127.0.0.1:9000".into())
        );
        assert_eq!(
            "exec:pbe protocol-echo".parse::<Endpoint>().unwrap(),
            Endpoint::Exec(vec!["pbe".into(), "protocol-echo".into()])
        );
        assert!("http://x".parse::<Endpoint>().is_err());
        assert!("exec:".parse::<Endpoint>().is_err());
    }

    #[test]
    fn tcp_echo_and_malformed_replies() {
        let endpoint = spawn_server(EchoConfig {
            replies: vec![
                "Const('a')".into(),
                "Const('b')".into(),
                "Const('c')".into(),
            ],
            malformed: vec![2],
        })
        .parse()
        .unwrap();
        let backend = RemoteBackend::<Rf>::new(endpoint, Role::Combined, Duration::from_secs(5));
        let spec: Spec<Rf> = Spec::new([("x".to_string(), "ab".to_string())]);
        let first = backend.propose(&spec, 2);
        assert_eq!(first.len(), 2);
        assert_eq!(first[0].text, "Const('a')");
        assert!(backend.propose(&spec, 2).is_empty());
        assert_eq!(backend.propose(&spec, 2).len(), 2);
    }

    #[test]
    fn unreachable_endpoint_gives_nothing() {
        let listener = TcpListener::bind("127.0.0.1:0").unwrap();
        let addr = listener.local_addr().unwrap();
        drop(listener);
        let backend = RemoteBackend::<Rf>::new(
            Endpoint::Tcp(addr.to_string()),
            Role::Combined,
            Duration::from_millis(200),
        );
        let spec: Spec<Rf> = Spec::new([("x".to_string(), "a".to_string())]);
        assert!(backend.propose(&spec, 1).is_empty());
    }
}
