//! Reference backend: the exhaustive oracle behind the wire protocol.
//!
//! Every `check` runs on its own thread so that `cancel` messages are read
//! while queries are in flight.

use std::collections::HashMap;
use std::io::{BufRead, Write};
use std::sync::{Arc, Mutex};
use std::thread::{self, JoinHandle};
use std::time::Duration;

use log::{debug, warn};

use super::exhaustive::exhaustive_find;
use super::protocol::{decode, encode, Request, Response};
use super::{CancelToken, OracleAnswer, OracleQuery, DEFAULT_ENUMERATION_CAP};
use crate::error::{Error, Result};
use crate::features::FeatureSet;
use crate::models::ModelFile;
use crate::norm::Ball;
use crate::problem::{ExplanationProblem, Instance};

#[derive(Debug, Clone)]
pub struct ServerOptions {
    /// Artificial latency added to every check; cancellation cuts it short.
    pub delay: Duration,
    pub cap: u64,
}

impl Default for ServerOptions {
    fn default() -> Self {
        Self {
            delay: Duration::ZERO,
            cap: DEFAULT_ENUMERATION_CAP,
        }
    }
}

type SharedWriter<W> = Arc<Mutex<W>>;

fn reply<W: Write>(writer: &SharedWriter<W>, response: &Response) {
    let mut w = writer.lock().unwrap();
    if let Err(e) = w.write_all(encode(response).as_bytes()).and_then(|_| w.flush()) {
        debug!("serve: cannot write reply: {e}");
    }
}

struct Check {
    id: u64,
    epsilon: f64,
    norm: crate::norm::Norm,
    fixed: Vec<usize>,
    instance: Vec<f64>,
    label: usize,
}

fn decide(file: &ModelFile, check: &Check, cancel: &CancelToken, opts: &ServerOptions) -> Response {
    let id = check.id;
    let fail = |message: String| Response::Error { id: Some(id), message };
    if !opts.delay.is_zero() && cancel.sleep(opts.delay) {
        return Response::Answer {
            id,
            found: None,
            witness: None,
        };
    }
    let instance = Instance {
        point: check.instance.clone(),
        label: check.label,
    };
    let problem = match ExplanationProblem::new(file.model.clone(), file.space.clone(), instance) {
        Ok(p) => p,
        Err(e) => return fail(e.to_string()),
    };
    let ball = match Ball::new(check.norm, check.epsilon) {
        Ok(b) => b,
        Err(e) => return fail(e.to_string()),
    };
    let fixed = match FeatureSet::from_one_based(&check.fixed, problem.num_features()) {
        Ok(f) => f,
        Err(e) => return fail(e.to_string()),
    };
    let query = OracleQuery {
        ball,
        fixed,
        cancel: cancel.clone(),
    };
    match exhaustive_find(&problem, &query, opts.cap) {
        Ok(OracleAnswer::Found { witness }) => Response::Answer {
            id,
            found: Some(true),
            witness,
        },
        Ok(OracleAnswer::NotFound) => Response::Answer {
            id,
            found: Some(false),
            witness: None,
        },
        Ok(OracleAnswer::Cancelled) => Response::Answer {
            id,
            found: None,
            witness: None,
        },
        Err(e) => fail(e.to_string()),
    }
}

/// Serves requests from `input` until `quit` or end of input, then waits
/// for the checks still running.
pub fn serve<R, W>(file: &ModelFile, input: R, output: W, opts: &ServerOptions) -> Result<()>
where
    R: BufRead,
    W: Write + Send + 'static,
{
    let file = Arc::new(file.clone());
    let writer: SharedWriter<W> = Arc::new(Mutex::new(output));
    let in_flight: Arc<Mutex<HashMap<u64, CancelToken>>> = Arc::default();
    let mut workers: Vec<JoinHandle<()>> = Vec::new();
    for line in input.lines() {
        let line = line.map_err(|e| Error::io("<stdin>", e))?;
        if line.trim().is_empty() {
            continue;
        }
        workers.retain(|h| !h.is_finished());
        let request = match decode::<Request>(&line) {
            Ok(r) => r,
            Err(message) => {
                warn!("serve: {message}");
                reply(&writer, &Response::Error { id: None, message });
                continue;
            }
        };
        match request {
            Request::Hello => reply(
                &writer,
                &Response::Hello {
                    features: file.model.num_features(),
                    classes: file.model.num_classes(),
                },
            ),
            Request::Check {
                id,
                epsilon,
                norm,
                fixed,
                instance,
                label,
            } => {
                let check = Check {
                    id,
                    epsilon,
                    norm,
                    fixed,
                    instance,
                    label,
                };
                let token = CancelToken::new();
                in_flight.lock().unwrap().insert(id, token.clone());
                let (file, writer, in_flight, opts) = (
                    Arc::clone(&file),
                    Arc::clone(&writer),
                    Arc::clone(&in_flight),
                    opts.clone(),
                );
                workers.push(thread::spawn(move || {
                    let response = decide(&file, &check, &token, &opts);
                    in_flight.lock().unwrap().remove(&check.id);
                    reply(&writer, &response);
                }));
            }
            Request::Cancel { id } => match in_flight.lock().unwrap().get(&id) {
                Some(token) => token.cancel(),
                None => debug!("serve: cancel for unknown or finished id {id}"),
            },
            Request::Quit => break,
        }
    }
    for h in workers {
        let _ = h.join();
    }
    Ok(())
}
