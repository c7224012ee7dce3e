//! Request/response exchange of single JSON lines with a peer process or a
//! TCP endpoint, bounded by a wall-clock timeout per reply.

use std::io::{self, BufRead, BufReader, Write};
use std::net::TcpStream;
use std::process::{Child, ChildStdin, Command, Stdio};
use std::sync::mpsc::{self, Receiver, RecvTimeoutError};
use std::thread;
use std::time::{Duration, Instant};

use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum LineError {
    #[error("no reply within {0:?}")]
    Timeout(Duration),
    #[error("peer closed the stream")]
    Closed,
    #[error("{0}")]
    Io(String),
}

impl From<io::Error> for LineError {
    fn from(e: io::Error) -> Self {
        LineError::Io(e.to_string())
    }
}

enum Transport {
    Child {
        child: Child,
        stdin: Option<ChildStdin>,
        lines: Receiver<io::Result<String>>,
    },
    Tcp {
        reader: BufReader<TcpStream>,
        writer: TcpStream,
    },
}

pub struct LineChannel {
    transport: Transport,
    timeout: Duration,
}

/// `host:port` (or `[v6]:port`) as opposed to a command line.
pub fn looks_like_address(target: &str) -> bool {
    let Some((host, port)) = target.rsplit_once(':') else {
        return false;
    };
    let host_ok = if host.starts_with('[') {
        host.ends_with(']')
    } else {
        !host.is_empty()
            && host
                .chars()
                .all(|c| c.is_ascii_alphanumeric() || c == '.' || c == '-')
    };
    host_ok && port.parse::<u16>().is_ok()
}

impl LineChannel {
    /// Connects to an address or spawns a command, by the shape of `target`.
    pub fn open(target: &str, timeout: Duration) -> Result<Self, LineError> {
        if looks_like_address(target) {
            Self::connect(target, timeout)
        } else {
            Self::spawn(target, timeout)
        }
    }

    /// Runs `command` through `sh -c` and talks over its stdin/stdout.
    pub fn spawn(command: &str, timeout: Duration) -> Result<Self, LineError> {
        let mut child = Command::new("sh")
            .arg("-c")
            .arg(command)
            .stdin(Stdio::piped())
            .stdout(Stdio::piped())
            .stderr(Stdio::inherit())
            .spawn()
            .map_err(|e| LineError::Io(format!("spawn {command:?}: {e}")))?;
        let stdin = child.stdin.take();
        let stdout = child.stdout.take().expect("piped stdout");
        let (tx, lines) = mpsc::channel();
        thread::spawn(move || {
            for line in BufReader::new(stdout).lines() {
                if tx.send(line).is_err() {
                    break;
                }
            }
        });
        Ok(Self {
            transport: Transport::Child { child, stdin, lines },
            timeout,
        })
    }

    pub fn connect(addr: &str, timeout: Duration) -> Result<Self, LineError> {
        let writer = TcpStream::connect(addr).map_err(|e| LineError::Io(format!("{addr}: {e}")))?;
        writer.set_read_timeout(Some(timeout))?;
        writer.set_nodelay(true)?;
        let reader = BufReader::new(writer.try_clone()?);
        Ok(Self {
            transport: Transport::Tcp { reader, writer },
            timeout,
        })
    }

    pub fn timeout(&self) -> Duration {
        self.timeout
    }

    /// Sends one line (a newline is appended) and waits for one reply line.
    pub fn request(&mut self, line: &str) -> Result<String, LineError> {
        let mut msg = Vec::with_capacity(line.len() + 1);
        msg.extend_from_slice(line.as_bytes());
        msg.push(b'\n');
        match &mut self.transport {
            Transport::Child { stdin, lines, .. } => {
                let w = stdin.as_mut().ok_or(LineError::Closed)?;
                w.write_all(&msg)?;
                w.flush()?;
                match lines.recv_timeout(self.timeout) {
                    Ok(reply) => Ok(reply?),
                    Err(RecvTimeoutError::Timeout) => Err(LineError::Timeout(self.timeout)),
                    Err(RecvTimeoutError::Disconnected) => Err(LineError::Closed),
                }
            }
            Transport::Tcp { reader, writer } => {
                writer.write_all(&msg)?;
                writer.flush()?;
                let mut reply = String::new();
                match reader.read_line(&mut reply) {
                    Ok(0) => Err(LineError::Closed),
                    Ok(_) => Ok(reply.trim_end_matches(['\n', '\r']).to_string()),
                    Err(e) if matches!(e.kind(), io::ErrorKind::WouldBlock | io::ErrorKind::TimedOut) => {
                        Err(LineError::Timeout(self.timeout))
                    }
                    Err(e) => Err(e.into()),
                }
            }
        }
    }
}

impl Drop for LineChannel {
    fn drop(&mut self) {
        if let Transport::Child { child, stdin, .. } = &mut self.transport {
            // closing stdin tells the peer the session is over
            drop(stdin.take());
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
