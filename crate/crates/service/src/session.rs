//! One task per live session. The task owns the simulator and ticks it at
//! the session rate; handlers talk to it over a command channel and read
//! its output from a broadcast channel.

use std::time::Duration;

use tokio::sync::{broadcast, mpsc, oneshot};
use tokio::time::MissedTickBehavior;
use vinesim_core::calibration::CalibratedModel;
use vinesim_core::protocol::{PreviewRequest, PreviewResponse, SessionCore, SessionMessage, Snapshot};
use vinesim_core::scenario::ScenarioError;
use vinesim_core::VineError;

const COMMAND_BUFFER: usize = 64;
const STREAM_BUFFER: usize = 1024;

pub enum SessionCmd {
    Lines(String, oneshot::Sender<Vec<SessionMessage>>),
    Preview(PreviewRequest, oneshot::Sender<Result<PreviewResponse, ScenarioError>>),
    Peek(oneshot::Sender<Result<Snapshot, VineError>>),
    Close,
}

#[derive(Clone)]
pub struct SessionHandle {
    pub hello: SessionMessage,
    pub commands: mpsc::Sender<SessionCmd>,
    pub stream: broadcast::Sender<SessionMessage>,
}

impl SessionHandle {
    pub fn spawn(id: &str, core: SessionCore, model: &'static CalibratedModel) -> Self {
        let (commands, rx) = mpsc::channel(COMMAND_BUFFER);
        let (stream, _) = broadcast::channel(STREAM_BUFFER);
        let hello = core.hello(id);
        tokio::spawn(run(core, model, rx, stream.clone()));
        Self {
            hello,
            commands,
            stream,
        }
    }
}

async fn run(
    mut core: SessionCore,
    model: &'static CalibratedModel,
    mut rx: mpsc::Receiver<SessionCmd>,
    out: broadcast::Sender<SessionMessage>,
) {
    let mut ticker = tokio::time::interval(Duration::from_secs_f64(1.0 / core.rate_hz()));
    ticker.set_missed_tick_behavior(MissedTickBehavior::Delay);
    // no receiver is not an error, nobody is watching yet
    let emit = |m: SessionMessage| {
        let _ = out.send(m);
    };
    loop {
        tokio::select! {
            _ = ticker.tick() => core.tick().into_iter().for_each(emit),
            cmd = rx.recv() => match cmd {
                None | Some(SessionCmd::Close) => break,
                Some(SessionCmd::Lines(text, reply)) => {
                    let replies: Vec<SessionMessage> = text
                        .lines()
                        .filter(|l| !l.trim().is_empty())
                        .map(|l| core.handle_line(l))
                        .collect();
                    if replies.is_empty() {
                        let empty = SessionMessage::Error { id: None, message: "empty command".into() };
                        emit(empty.clone());
                        let _ = reply.send(vec![empty]);
                        continue;
                    }
                    replies.iter().cloned().for_each(emit);
                    let _ = reply.send(replies);
                }
                Some(SessionCmd::Preview(req, reply)) => {
                    let _ = reply.send(core.preview(&req, model));
                }
                Some(SessionCmd::Peek(reply)) => {
                    let _ = reply.send(core.peek());
                }
            },
        }
    }
    emit(SessionMessage::Closed {
        reason: "session closed".into(),
    });
    tracing::debug!("session task finished");
}
