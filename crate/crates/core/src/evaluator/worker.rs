//! Client side of the worker protocol: one JSON object per line over the
//! child's stdin/stdout, one response line per request line.

use std::io::{BufRead, BufReader, Write};
use std::process::{Child, ChildStdin, Command, Stdio};
use std::sync::mpsc::{self, Receiver, RecvTimeoutError};
use std::sync::{Condvar, Mutex};
use std::time::Duration;

use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use super::{EvalErrorCode, EvalFailure, Evaluator};
use crate::fitness::InstanceResult;
use crate::instance::Instance;
use crate::search::{DuplicatePolicy, SearchLimits};

pub const PROTOCOL_VERSION: &str = "1";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct WorkerConfig {
    /// Program and arguments that start one worker process.
    pub command: Vec<String>,
    /// Seconds allowed for the handshake and for loading a program.
    pub setup_timeout_seconds: f64,
    /// Most worker processes running evaluations at once.
    pub pool_size: usize,
}

impl Default for WorkerConfig {
    fn default() -> Self {
        WorkerConfig { command: Vec::new(), setup_timeout_seconds: 30.0, pool_size: 1 }
    }
}

enum CallError {
    Timeout,
    Crashed(String),
}

struct WorkerProcess {
    child: Child,
    stdin: ChildStdin,
    lines: Receiver<std::io::Result<String>>,
}

impl WorkerProcess {
    fn spawn(config: &WorkerConfig) -> Result<Self, EvalFailure> {
        let (program, args) = config
            .command
            .split_first()
            .ok_or_else(|| EvalFailure::new(EvalErrorCode::Unsupported, "worker command is empty"))?;
        let mut child = Command::new(program)
            .args(args)
            .stdin(Stdio::piped())
            .stdout(Stdio::piped())
            .stderr(Stdio::inherit())
            .spawn()
            .map_err(|e| EvalFailure::new(EvalErrorCode::Unsupported, format!("starting worker `{program}`: {e}")))?;
        let stdin = child.stdin.take().expect("piped stdin");
        let stdout = child.stdout.take().expect("piped stdout");
        let (tx, lines) = mpsc::channel();
        std::thread::spawn(move || {
            for line in BufReader::new(stdout).lines() {
                let stop = line.is_err();
                if tx.send(line).is_err() || stop {
                    break;
                }
            }
        });
        let mut worker = WorkerProcess { child, stdin, lines };
        let setup = Duration::from_secs_f64(config.setup_timeout_seconds);
        let reply = worker
            .call(&json!({"op": "handshake", "version": PROTOCOL_VERSION}), setup)
            .map_err(|e| worker.fail(e, "handshake"))?;
        let version = reply.get("version").and_then(Value::as_str).unwrap_or("");
        if reply.get("ok") != Some(&Value::Bool(true)) || version != PROTOCOL_VERSION {
            worker.kill();
            return Err(EvalFailure::new(
                EvalErrorCode::Protocol,
                format!("worker speaks protocol `{version}`, expected `{PROTOCOL_VERSION}`"),
            ));
        }
        Ok(worker)
    }

    fn call(&mut self, request: &Value, timeout: Duration) -> Result<Value, CallError> {
        let mut line = request.to_string();
        line.push('\n');
        self.stdin
            .write_all(line.as_bytes())
            .and_then(|_| self.stdin.flush())
            .map_err(|e| CallError::Crashed(format!("writing request: {e}")))?;
        match self.lines.recv_timeout(timeout) {
            Ok(Ok(text)) => serde_json::from_str(&text).map_err(|e| {
                CallError::Crashed(format!("unparsable response `{}`: {e}", text.chars().take(120).collect::<String>()))
            }),
            Ok(Err(e)) => Err(CallError::Crashed(format!("reading response: {e}"))),
            Err(RecvTimeoutError::Timeout) => Err(CallError::Timeout),
            Err(RecvTimeoutError::Disconnected) => Err(CallError::Crashed("worker exited".into())),
        }
    }

    /// Kill the process and describe what went wrong.
    fn fail(&mut self, error: CallError, during: &str) -> EvalFailure {
        self.kill();
        match error {
            CallError::Timeout => {
                EvalFailure::new(EvalErrorCode::Timeout, format!("worker unresponsive during {during}"))
            }
            CallError::Crashed(m) => {
                EvalFailure::new(EvalErrorCode::Runtime, format!("worker crashed during {during}: {m}"))
            }
        }
    }

    fn kill(&mut self) {
        let _ = self.child.kill();
        let _ = self.child.wait();
    }

    fn load(&mut self, code: &str, config: &WorkerConfig) -> Result<(), EvalFailure> {
        let reply = self
            .call(&json!({"op": "load", "code": code}), Duration::from_secs_f64(config.setup_timeout_seconds))
            .map_err(|e| self.fail(e, "load"))?;
        check_ok(&reply)
    }
}

impl Drop for WorkerProcess {
    fn drop(&mut self) {
        let _ = self.stdin.write_all(b"{\"op\":\"shutdown\"}\n");
        let _ = self.stdin.flush();
        if !matches!(self.child.try_wait(), Ok(Some(_))) {
            std::thread::sleep(Duration::from_millis(5));
            self.kill();
        }
    }
}

fn error_code(name: &str) -> EvalErrorCode {
    match name {
        "SYNTAX" => EvalErrorCode::Syntax,
        "FORBIDDEN_CONSTRUCT" => EvalErrorCode::ForbiddenConstruct,
        "BAD_SIGNATURE" => EvalErrorCode::BadSignature,
        "RUNTIME" => EvalErrorCode::Runtime,
        "NON_NUMERIC_SCORE" => EvalErrorCode::NonNumericScore,
        "TIMEOUT" => EvalErrorCode::Timeout,
        _ => EvalErrorCode::Protocol,
    }
}

fn check_ok(reply: &Value) -> Result<(), EvalFailure> {
    match reply.get("ok").and_then(Value::as_bool) {
        Some(true) => Ok(()),
        Some(false) => Err(EvalFailure::new(
            error_code(reply.get("error_code").and_then(Value::as_str).unwrap_or("")),
            reply.get("message").and_then(Value::as_str).unwrap_or("").to_string(),
        )),
        None => Err(EvalFailure::new(EvalErrorCode::Protocol, format!("response lacks `ok`: {reply}"))),
    }
}

fn parse_result(reply: &Value, instance: &Instance, limits: &SearchLimits) -> Result<InstanceResult, EvalFailure> {
    check_ok(reply)?;
    let protocol =
        |field: &str| EvalFailure::new(EvalErrorCode::Protocol, format!("evaluate response lacks `{field}`"));
    let uint = |field: &str| reply.get(field).and_then(Value::as_u64).ok_or_else(|| protocol(field));
    let solved = reply.get("solved").and_then(Value::as_bool).ok_or_else(|| protocol("solved"))?;
    let objective = uint("objective_value")?;
    let moves_count = uint("moves_count")?;
    let evaluated_nodes = uint("evaluated_nodes")?;
    let elapsed_seconds =
        reply.get("elapsed_seconds").and_then(Value::as_f64).ok_or_else(|| protocol("elapsed_seconds"))?;
    let expected = if solved { moves_count } else { u64::from(limits.max_moves_penalty) };
    if objective != expected {
        return Err(EvalFailure::new(
            EvalErrorCode::Protocol,
            format!("objective_value {objective} inconsistent with solved={solved}, moves_count={moves_count}"),
        ));
    }
    Ok(InstanceResult {
        instance_seed: instance.seed(),
        moves: u32::try_from(objective).map_err(|_| protocol("objective_value"))?,
        lower_bound: instance.lower_bound(),
        solved,
        evaluated_nodes,
        elapsed_seconds,
    })
}

/// Evaluates programs in external worker processes, reusing idle ones.
///
/// A worker that outlives `timeout_seconds × 1.5` on one instance is killed
/// and the instance counts as unsolved; a worker that dies marks the
/// program invalid. Either way a fresh process is started next time.
pub struct WorkerEvaluator {
    config: WorkerConfig,
    idle: Mutex<Vec<WorkerProcess>>,
    busy: Mutex<usize>,
    freed: Condvar,
}

struct Slot<'a>(&'a WorkerEvaluator);

impl Drop for Slot<'_> {
    fn drop(&mut self) {
        *self.0.busy.lock().expect("worker slot lock") -= 1;
        self.0.freed.notify_one();
    }
}

impl WorkerEvaluator {
    pub fn new(config: WorkerConfig) -> Self {
        WorkerEvaluator { config, idle: Mutex::new(Vec::new()), busy: Mutex::new(0), freed: Condvar::new() }
    }

    fn acquire(&self) -> Slot<'_> {
        let limit = self.config.pool_size.max(1);
        let mut busy = self.busy.lock().expect("worker slot lock");
        while *busy >= limit {
            busy = self.freed.wait(busy).expect("worker slot lock");
        }
        *busy += 1;
        Slot(self)
    }

    fn checkout(&self) -> Result<WorkerProcess, EvalFailure> {
        let idle = self.idle.lock().expect("worker pool lock").pop();
        match idle {
            Some(w) => Ok(w),
            None => WorkerProcess::spawn(&self.config),
        }
    }

    fn checkin(&self, worker: WorkerProcess) {
        self.idle.lock().expect("worker pool lock").push(worker);
    }
}

impl Evaluator for WorkerEvaluator {
    fn evaluate(
        &self,
        code: &str,
        instances: &[Instance],
        limits: &SearchLimits,
        policy: DuplicatePolicy,
    ) -> Result<Vec<InstanceResult>, EvalFailure> {
        let _slot = self.acquire();
        let mut worker = self.checkout()?;
        if let Err(e) = worker.load(code, &self.config) {
            if !matches!(e.code, EvalErrorCode::Runtime | EvalErrorCode::Timeout) {
                self.checkin(worker);
            }
            return Err(e);
        }
        let hard_limit = Duration::from_secs_f64(limits.timeout_seconds * 1.5);
        let mut results = Vec::with_capacity(instances.len());
        for instance in instances {
            let request = json!({
                "op": "evaluate",
                "instance": instance.to_record(None),
                "limits": limits,
                "policy": policy,
            });
            match worker.call(&request, hard_limit) {
                Ok(reply) => match parse_result(&reply, instance, limits) {
                    Ok(r) => results.push(r),
                    Err(e) => {
                        if e.code == EvalErrorCode::Protocol {
                            worker.kill();
                        } else {
                            self.checkin(worker);
                        }
                        return Err(e);
                    }
                },
                Err(CallError::Timeout) => {
                    log::warn!("worker exceeded the hard limit on instance {}; killed", instance.seed());
                    worker.kill();
                    results.push(InstanceResult {
                        instance_seed: instance.seed(),
                        moves: limits.max_moves_penalty,
                        lower_bound: instance.lower_bound(),
                        solved: false,
                        evaluated_nodes: 0,
                        elapsed_seconds: hard_limit.as_secs_f64(),
                    });
                    worker = WorkerProcess::spawn(&self.config)?;
                    worker.load(code, &self.config)?;
                }
                Err(e) => return Err(worker.fail(e, "evaluate")),
            }
        }
        self.checkin(worker);
        Ok(results)
    }
}
