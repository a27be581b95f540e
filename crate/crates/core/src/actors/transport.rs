use std::collections::VecDeque;
use std::sync::Arc;

use super::server::{Server, ServerConnection};
use crate::error::{Error, Result};
use crate::group::PrimeOrderGroup;

/// Frame-level duplex channel as seen from the client.
pub trait Transport {
    fn send(&mut self, frame: &[u8]) -> Result<()>;
    fn receive(&mut self) -> Result<Vec<u8>>;
}

impl<T: Transport + ?Sized> Transport for &mut T {
    fn send(&mut self, frame: &[u8]) -> Result<()> {
        (**self).send(frame)
    }

    fn receive(&mut self) -> Result<Vec<u8>> {
        (**self).receive()
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Direction {
    ClientToServer,
    ServerToClient,
}

/// Every frame that crossed a transport, in order.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Transcript {
    frames: Vec<(Direction, Vec<u8>)>,
}

impl Transcript {
    pub fn push(&mut self, dir: Direction, frame: &[u8]) {
        self.frames.push((dir, frame.to_vec()));
    }

    pub fn frames(&self) -> &[(Direction, Vec<u8>)] {
        &self.frames
    }

    /// Direction byte (0 = client→server, 1 = server→client) then the frame.
    pub fn to_bytes(&self) -> Vec<u8> {
        let mut out = Vec::new();
        for (dir, f) in &self.frames {
            out.push(match dir {
                Direction::ClientToServer => 0,
                Direction::ServerToClient => 1,
            });
            out.extend_from_slice(f);
        }
        out
    }

    /// True if `needle` occurs inside any single frame.
    pub fn contains(&self, needle: &[u8]) -> bool {
        !needle.is_empty()
            && self
                .frames
                .iter()
                .any(|(_, f)| f.windows(needle.len()).any(|w| w == needle))
    }

    pub fn total_bytes(&self) -> usize {
        self.frames.iter().map(|(_, f)| f.len()).sum()
    }
}

/// In-process transport that feeds frames straight into a server connection.
pub struct LoopbackTransport<G: PrimeOrderGroup> {
    conn: ServerConnection<G>,
    inbox: VecDeque<Vec<u8>>,
    transcript: Transcript,
}

impl<G: PrimeOrderGroup> LoopbackTransport<G> {
    /// Opens a connection; the server greeting is queued immediately.
    pub fn connect(server: &Arc<Server<G>>) -> Self {
        let conn = server.connect();
        let greeting = conn.greeting();
        let mut transcript = Transcript::default();
        transcript.push(Direction::ServerToClient, &greeting);
        Self {
            conn,
            inbox: VecDeque::from([greeting]),
            transcript,
        }
    }

    pub fn transcript(&self) -> &Transcript {
        &self.transcript
    }

    pub fn into_transcript(self) -> Transcript {
        self.transcript
    }

    pub fn connection(&self) -> &ServerConnection<G> {
        &self.conn
    }

    pub fn connection_mut(&mut self) -> &mut ServerConnection<G> {
        &mut self.conn
    }
}

impl<G: PrimeOrderGroup> Transport for LoopbackTransport<G> {
    fn send(&mut self, frame: &[u8]) -> Result<()> {
        self.transcript.push(Direction::ClientToServer, frame);
        for reply in self.conn.handle(frame) {
            self.transcript.push(Direction::ServerToClient, &reply);
            self.inbox.push_back(reply);
        }
        Ok(())
    }

    fn receive(&mut self) -> Result<Vec<u8>> {
        self.inbox
            .pop_front()
            .ok_or_else(|| Error::Transport("no frame pending".into()))
    }
}
