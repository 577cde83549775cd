//! Client side of the external-oracle protocol.
//!
//! One backend process serves every clone of an [`ExternalOracle`]; queries
//! issued concurrently from several threads are multiplexed by id and a
//! reader thread routes each answer back to its caller.

use std::collections::HashMap;
use std::io::{BufRead, BufReader, Read, Write};
use std::process::{Child, Command, Stdio};
use std::sync::atomic::{AtomicU64, Ordering};
use std::sync::{Arc, Mutex};
use std::thread;
use std::time::{Duration, Instant};

use crossbeam_channel::{bounded, Receiver, RecvTimeoutError, Sender};
use log::{debug, warn};

use super::protocol::{decode, encode, Request, Response};
use super::{is_valid_witness, Oracle, OracleAnswer, OracleQuery};
use crate::error::OracleError;
use crate::problem::ExplanationProblem;

const HANDSHAKE_TIMEOUT: Duration = Duration::from_secs(30);
const POLL: Duration = Duration::from_millis(1);

/// How to launch a backend.
#[derive(Debug, Clone, PartialEq)]
pub struct ExternalConfig {
    pub program: String,
    pub args: Vec<String>,
    /// Per-query deadline; `None` waits indefinitely.
    pub timeout: Option<Duration>,
}

impl ExternalConfig {
    pub fn new(program: impl Into<String>) -> Self {
        Self {
            program: program.into(),
            args: Vec::new(),
            timeout: None,
        }
    }

    /// Splits a command line on whitespace: program first, then arguments.
    pub fn from_command_line(line: &str) -> Result<Self, OracleError> {
        let mut words = line.split_whitespace().map(str::to_owned);
        let program = words
            .next()
            .ok_or_else(|| OracleError::Unsupported("empty external oracle command".into()))?;
        Ok(Self {
            program,
            args: words.collect(),
            timeout: None,
        })
    }

    pub fn with_timeout(mut self, timeout: Duration) -> Self {
        self.timeout = Some(timeout);
        self
    }
}

type Reply = Result<Response, OracleError>;

#[derive(Default)]
struct Routing {
    pending: HashMap<u64, Sender<Reply>>,
    dead: Option<OracleError>,
}

struct Connection {
    writer: Mutex<Box<dyn Write + Send>>,
    routing: Arc<Mutex<Routing>>,
    next_id: AtomicU64,
    child: Option<Mutex<Child>>,
}

impl Connection {
    fn send(&self, request: &Request) -> Result<(), OracleError> {
        let mut w = self.writer.lock().unwrap();
        w.write_all(encode(request).as_bytes())
            .and_then(|_| w.flush())
            .map_err(|e| OracleError::BackendExited(format!("write failed: {e}")))
    }

    fn register(&self) -> Result<(u64, Receiver<Reply>), OracleError> {
        let id = self.next_id.fetch_add(1, Ordering::Relaxed);
        let (tx, rx) = bounded(4);
        let mut routing = self.routing.lock().unwrap();
        if let Some(e) = &routing.dead {
            return Err(e.clone());
        }
        routing.pending.insert(id, tx);
        Ok((id, rx))
    }

    fn forget(&self, id: u64) {
        self.routing.lock().unwrap().pending.remove(&id);
    }
}

impl Drop for Connection {
    fn drop(&mut self) {
        let _ = self.send(&Request::Quit);
        if let Some(child) = &self.child {
            let mut child = child.lock().unwrap();
            let deadline = Instant::now() + Duration::from_millis(500);
            while Instant::now() < deadline {
                if let Ok(Some(_)) = child.try_wait() {
                    return;
                }
                thread::sleep(Duration::from_millis(5));
            }
            let _ = child.kill();
            let _ = child.wait();
        }
    }
}

fn reader_loop(input: impl Read, routing: Arc<Mutex<Routing>>, hello: Sender<Reply>) {
    let mut input = BufReader::new(input);
    let mut line = String::new();
    let fatal = loop {
        line.clear();
        match input.read_line(&mut line) {
            Ok(0) => break OracleError::BackendExited("backend closed its output".into()),
            Ok(_) => {}
            Err(e) => break OracleError::BackendExited(format!("read failed: {e}")),
        }
        if line.trim().is_empty() {
            continue;
        }
        let response = match decode::<Response>(&line) {
            Ok(r) => r,
            Err(e) => break OracleError::Protocol(e),
        };
        let (id, reply) = match response {
            Response::Hello { .. } => {
                let _ = hello.try_send(Ok(response));
                continue;
            }
            Response::Answer { id, .. } => (id, Ok(response)),
            Response::Error { id: Some(id), message } => (id, Err(OracleError::Backend(message))),
            Response::Error { id: None, message } => {
                warn!("external oracle: {message}");
                continue;
            }
        };
        let tx = routing.lock().unwrap().pending.get(&id).cloned();
        match tx {
            Some(tx) => {
                let _ = tx.try_send(reply);
            }
            None => debug!("external oracle: dropping answer for unknown id {id}"),
        }
    };
    let mut routing = routing.lock().unwrap();
    for (_, tx) in routing.pending.drain() {
        let _ = tx.try_send(Err(fatal.clone()));
    }
    let _ = hello.try_send(Err(fatal.clone()));
    routing.dead = Some(fatal);
}

/// Session over an external backend. Clones share the backend.
#[derive(Clone)]
pub struct ExternalOracle {
    problem: ExplanationProblem,
    conn: Arc<Connection>,
    timeout: Option<Duration>,
}

impl std::fmt::Debug for ExternalOracle {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("ExternalOracle")
            .field("timeout", &self.timeout)
            .finish_non_exhaustive()
    }
}

impl ExternalOracle {
    /// Launches the backend and performs the handshake.
    pub fn spawn(config: &ExternalConfig, problem: ExplanationProblem) -> Result<Self, OracleError> {
        let mut child = Command::new(&config.program)
            .args(&config.args)
            .stdin(Stdio::piped())
            .stdout(Stdio::piped())
            .stderr(Stdio::inherit())
            .spawn()
            .map_err(|e| OracleError::BackendExited(format!("cannot start {:?}: {e}", config.program)))?;
        let stdin = child.stdin.take().expect("stdin is piped");
        let stdout = child.stdout.take().expect("stdout is piped");
        Self::attach(stdout, stdin, Some(child), problem, config.timeout)
    }

    /// Speaks the protocol over an arbitrary stream pair.
    pub fn connect(
        input: impl Read + Send + 'static,
        output: impl Write + Send + 'static,
        problem: ExplanationProblem,
        timeout: Option<Duration>,
    ) -> Result<Self, OracleError> {
        Self::attach(input, output, None, problem, timeout)
    }

    fn attach(
        input: impl Read + Send + 'static,
        output: impl Write + Send + 'static,
        child: Option<Child>,
        problem: ExplanationProblem,
        timeout: Option<Duration>,
    ) -> Result<Self, OracleError> {
        let routing = Arc::new(Mutex::new(Routing::default()));
        let (hello_tx, hello_rx) = bounded(1);
        let reader_routing = Arc::clone(&routing);
        thread::Builder::new()
            .name("dxp-oracle-reader".into())
            .spawn(move || reader_loop(input, reader_routing, hello_tx))
            .map_err(|e| OracleError::Backend(format!("cannot start reader thread: {e}")))?;
        let conn = Arc::new(Connection {
            writer: Mutex::new(Box::new(output)),
            routing,
            next_id: AtomicU64::new(1),
            child: child.map(Mutex::new),
        });
        conn.send(&Request::Hello)?;
        let reply = hello_rx
            .recv_timeout(HANDSHAKE_TIMEOUT)
            .map_err(|_| OracleError::Handshake("no hello from backend".into()))??;
        let Response::Hello { features, classes } = reply else {
            unreachable!("only hello replies are routed to the handshake");
        };
        if features != problem.num_features() || classes != problem.num_classes() {
            return Err(OracleError::Handshake(format!(
                "backend serves {features} features / {classes} classes, problem has {} / {}",
                problem.num_features(),
                problem.num_classes()
            )));
        }
        Ok(Self { problem, conn, timeout })
    }

    fn convert(&self, query: &OracleQuery, reply: Response) -> Result<OracleAnswer, OracleError> {
        match reply {
            Response::Answer {
                found: Some(true),
                witness,
                ..
            } => {
                let witness = witness.filter(|w| {
                    let ok = is_valid_witness(&self.problem, query.ball, &query.fixed, w);
                    if !ok {
                        warn!("external oracle returned an invalid witness; ignoring it");
                    }
                    ok
                });
                Ok(OracleAnswer::Found { witness })
            }
            Response::Answer { found: Some(false), .. } => Ok(OracleAnswer::NotFound),
            Response::Answer { found: None, .. } => Ok(OracleAnswer::Cancelled),
            other => Err(OracleError::Protocol(format!("unexpected reply {other:?}"))),
        }
    }

    /// Sends `cancel` and waits for the backend to acknowledge the id.
    fn abandon(&self, id: u64, rx: &Receiver<Reply>) -> Result<(), OracleError> {
        self.conn.send(&Request::Cancel { id })?;
        match rx.recv() {
            Ok(Err(e @ (OracleError::BackendExited(_) | OracleError::Protocol(_)))) => Err(e),
            _ => Ok(()),
        }
    }

    fn wait(&self, query: &OracleQuery, id: u64, rx: &Receiver<Reply>) -> Result<OracleAnswer, OracleError> {
        let deadline = self.timeout.map(|t| Instant::now() + t);
        loop {
            if query.cancel.is_cancelled() {
                self.abandon(id, rx)?;
                return Ok(OracleAnswer::Cancelled);
            }
            if deadline.is_some_and(|d| Instant::now() >= d) {
                self.abandon(id, rx)?;
                return Err(OracleError::Timeout(self.timeout.unwrap()));
            }
            match rx.recv_timeout(POLL) {
                Ok(reply) => return self.convert(query, reply?),
                Err(RecvTimeoutError::Timeout) => {}
                Err(RecvTimeoutError::Disconnected) => {
                    return Err(OracleError::BackendExited("reply channel closed".into()))
                }
            }
        }
    }
}

impl Oracle for ExternalOracle {
    fn problem(&self) -> &ExplanationProblem {
        &self.problem
    }

    fn find_adv_ex(&mut self, query: &OracleQuery) -> Result<OracleAnswer, OracleError> {
        if query.cancel.is_cancelled() {
            return Ok(OracleAnswer::Cancelled);
        }
        let (id, rx) = self.conn.register()?;
        let request = Request::Check {
            id,
            epsilon: query.ball.epsilon(),
            norm: query.ball.norm(),
            fixed: query.fixed.to_one_based(),
            instance: self.problem.point().to_vec(),
            label: self.problem.label(),
        };
        let result = self.conn.send(&request).and_then(|_| self.wait(query, id, &rx));
        self.conn.forget(id);
        result
    }
}
