//! Lamp output: the RGB-LED wire protocol and colour sinks.
//!
//! Every colour travels as a 5-octet frame:
//!
//! ```text
//! offset  0     1   2   3   4
//!         0x7E  R   G   B   CK      CK = (R + G + B) mod 256
//! ```
//!
//! There is no escaping; a receiver hunts for 0x7E and validates the
//! checksum, dropping one octet and resyncing on failure.

use std::collections::VecDeque;
use std::io::{self, Write};
use std::time::Duration;

use thiserror::Error;

use crate::chroma::RgbColor;

pub const SYNC: u8 = 0x7E;
pub const FRAME_LEN: usize = 5;
pub const DEFAULT_BAUD: u32 = 115_200;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum FrameError {
    #[error("frame must be {FRAME_LEN} octets, got {0}")]
    BadLength(usize),
    #[error("bad sync octet 0x{0:02X}")]
    BadSync(u8),
    #[error("bad checksum: expected {expected}, found {found}")]
    BadChecksum { expected: u8, found: u8 },
}

#[derive(Debug, Error)]
pub enum SinkError {
    #[error("port {path} unavailable: {reason}")]
    PortUnavailable { path: String, reason: String },
    #[error("write timed out")]
    WriteTimeout,
    #[error(transparent)]
    Io(#[from] io::Error),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct LampFrame([u8; FRAME_LEN]);

impl LampFrame {
    pub fn bytes(&self) -> &[u8; FRAME_LEN] {
        &self.0
    }
}

pub fn checksum(r: u8, g: u8, b: u8) -> u8 {
    r.wrapping_add(g).wrapping_add(b)
}

pub fn encode_frame(c: RgbColor) -> LampFrame {
    LampFrame([SYNC, c.r, c.g, c.b, checksum(c.r, c.g, c.b)])
}

pub fn decode_frame(bytes: &[u8]) -> Result<RgbColor, FrameError> {
    let [sync, r, g, b, ck] =
        <[u8; FRAME_LEN]>::try_from(bytes).map_err(|_| FrameError::BadLength(bytes.len()))?;
    if sync != SYNC {
        return Err(FrameError::BadSync(sync));
    }
    let expected = checksum(r, g, b);
    if ck != expected {
        return Err(FrameError::BadChecksum {
            expected,
            found: ck,
        });
    }
    Ok(RgbColor::new(r, g, b))
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SinkCapability {
    pub name: String,
    /// Lossy sinks prefer dropping stale colours over blocking the producer.
    pub lossy: bool,
}

/// Destination for the colour stream. Colours arrive in order.
pub trait ColorSink {
    fn capability(&self) -> SinkCapability;

    fn deliver(&mut self, color: RgbColor) -> Result<(), SinkError>;

    fn flush(&mut self) -> Result<(), SinkError> {
        Ok(())
    }
}

/// In-process lamp: decodes the wire bytes it is given and remembers the
/// last `capacity` colours.
pub struct SimulatorSink {
    capacity: usize,
    history: VecDeque<RgbColor>,
    pending: Vec<u8>,
    frames: usize,
    checksum_errors: usize,
    discarded_octets: usize,
    dump: Option<Box<dyn Write + Send>>,
}

impl std::fmt::Debug for SimulatorSink {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("SimulatorSink")
            .field("capacity", &self.capacity)
            .field("frames", &self.frames)
            .field("checksum_errors", &self.checksum_errors)
            .finish()
    }
}

pub fn simulator_sink(log_capacity: usize) -> SimulatorSink {
    SimulatorSink::new(log_capacity)
}

impl SimulatorSink {
    pub fn new(capacity: usize) -> Self {
        SimulatorSink {
            capacity,
            history: VecDeque::with_capacity(capacity.min(4096)),
            pending: Vec::new(),
            frames: 0,
            checksum_errors: 0,
            discarded_octets: 0,
            dump: None,
        }
    }

    /// Also writes one `R G B` line per decoded frame.
    pub fn with_dump(mut self, out: Box<dyn Write + Send>) -> Self {
        self.dump = Some(out);
        self
    }

    /// Feeds raw wire bytes. Partial frames are kept until completed.
    pub fn receive_bytes(&mut self, bytes: &[u8]) -> io::Result<()> {
        self.pending.extend_from_slice(bytes);
        let mut start = 0;
        while self.pending.len() - start >= FRAME_LEN {
            if self.pending[start] != SYNC {
                start += 1;
                self.discarded_octets += 1;
                continue;
            }
            match decode_frame(&self.pending[start..start + FRAME_LEN]) {
                Ok(c) => {
                    start += FRAME_LEN;
                    self.accept(c)?;
                }
                Err(_) => {
                    self.checksum_errors += 1;
                    self.discarded_octets += 1;
                    start += 1;
                }
            }
        }
        self.pending.drain(..start);
        Ok(())
    }

    fn accept(&mut self, c: RgbColor) -> io::Result<()> {
        self.frames += 1;
        if self.capacity > 0 {
            if self.history.len() == self.capacity {
                self.history.pop_front();
            }
            self.history.push_back(c);
        }
        if let Some(out) = self.dump.as_mut() {
            writeln!(out, "{} {} {}", c.r, c.g, c.b)?;
        }
        Ok(())
    }

    pub fn last_color(&self) -> Option<RgbColor> {
        self.history.back().copied()
    }

    pub fn frame_count(&self) -> usize {
        self.frames
    }

    pub fn checksum_error_count(&self) -> usize {
        self.checksum_errors
    }

    pub fn discarded_octets(&self) -> usize {
        self.discarded_octets
    }

    pub fn history(&self) -> impl Iterator<Item = &RgbColor> {
        self.history.iter()
    }
}

impl ColorSink for SimulatorSink {
    fn capability(&self) -> SinkCapability {
        SinkCapability {
            name: "simulator".into(),
            lossy: false,
        }
    }

    fn deliver(&mut self, color: RgbColor) -> Result<(), SinkError> {
        self.receive_bytes(encode_frame(color).bytes())?;
        Ok(())
    }

    fn flush(&mut self) -> Result<(), SinkError> {
        if let Some(out) = self.dump.as_mut() {
            out.flush()?;
        }
        Ok(())
    }
}

/// Writes lamp frames to a byte stream, normally a serial port.
pub struct SerialSink<W> {
    name: String,
    out: W,
}

impl<W: Write> SerialSink<W> {
    pub fn from_writer(name: impl Into<String>, out: W) -> Self {
        SerialSink {
            name: name.into(),
            out,
        }
    }

    pub fn into_inner(self) -> W {
        self.out
    }
}

impl<W: Write> ColorSink for SerialSink<W> {
    fn capability(&self) -> SinkCapability {
        SinkCapability {
            name: self.name.clone(),
            lossy: true,
        }
    }

    fn deliver(&mut self, color: RgbColor) -> Result<(), SinkError> {
        self.out
            .write_all(encode_frame(color).bytes())
            .map_err(|e| {
                if e.kind() == io::ErrorKind::TimedOut {
                    SinkError::WriteTimeout
                } else {
                    SinkError::Io(e)
                }
            })
    }

    fn flush(&mut self) -> Result<(), SinkError> {
        Ok(self.out.flush()?)
    }
}

/// Opens a serial port at `baud`, 8 data bits, no parity, 1 stop bit.
pub fn serial_sink(
    port_path: &str,
    baud: u32,
) -> Result<SerialSink<Box<dyn serialport::SerialPort>>, SinkError> {
    let port = serialport::new(port_path, baud)
        .data_bits(serialport::DataBits::Eight)
        .parity(serialport::Parity::None)
        .stop_bits(serialport::StopBits::One)
        .timeout(Duration::from_millis(200))
        .open()
        .map_err(|e| SinkError::PortUnavailable {
            path: port_path.to_string(),
            reason: e.to_string(),
        })?;
    Ok(SerialSink::from_writer(format!("serial:{port_path}"), port))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn encode_examples() {
        assert_eq!(
            encode_frame(RgbColor::new(0, 0, 0)).bytes(),
            &[0x7E, 0, 0, 0, 0]
        );
        assert_eq!(
            encode_frame(RgbColor::new(255, 255, 255)).bytes(),
            &[0x7E, 255, 255, 255, 253]
        );
        assert_eq!(
            encode_frame(RgbColor::new(255, 0, 0)).bytes(),
            &[0x7E, 255, 0, 0, 255]
        );
    }

    #[test]
    fn decode_errors() {
        assert_eq!(
            decode_frame(&[0x00, 0, 0, 0, 0]),
            Err(FrameError::BadSync(0))
        );
        assert_eq!(
            decode_frame(&[0x7E, 1, 2, 3, 7]),
            Err(FrameError::BadChecksum {
                expected: 6,
                found: 7
            })
        );
        assert_eq!(decode_frame(&[0x7E, 1, 2]), Err(FrameError::BadLength(3)));
    }

    #[test]
    fn simulator_tracks_history() {
        let mut sim = simulator_sink(2);
        for c in [
            RgbColor::new(1, 2, 3),
            RgbColor::new(4, 5, 6),
            RgbColor::new(7, 8, 9),
        ] {
            sim.deliver(c).unwrap();
        }
        assert_eq!(sim.frame_count(), 3);
        assert_eq!(sim.last_color(), Some(RgbColor::new(7, 8, 9)));
        assert_eq!(sim.history().count(), 2);
        assert_eq!(sim.checksum_error_count(), 0);
    }

    #[test]
    fn simulator_resyncs_after_corruption() {
        let mut sim = simulator_sink(8);
        let mut bytes = Vec::new();
        bytes.extend_from_slice(&[0x00, 0x13]);
        bytes.extend_from_slice(&[0x7E, 10, 20, 30, 61]); // bad: sum is 60
        bytes.extend_from_slice(encode_frame(RgbColor::new(9, 9, 9)).bytes());
        // Split delivery exercises the partial-frame buffer.
        sim.receive_bytes(&bytes[..4]).unwrap();
        sim.receive_bytes(&bytes[4..]).unwrap();
        assert_eq!(sim.frame_count(), 1);
        assert_eq!(sim.checksum_error_count(), 1);
        assert_eq!(sim.last_color(), Some(RgbColor::new(9, 9, 9)));
    }

    #[derive(Clone, Default)]
    struct Shared(std::sync::Arc<std::sync::Mutex<Vec<u8>>>);

    impl Write for Shared {
        fn write(&mut self, buf: &[u8]) -> io::Result<usize> {
            self.0.lock().unwrap().extend_from_slice(buf);
            Ok(buf.len())
        }
        fn flush(&mut self) -> io::Result<()> {
            Ok(())
        }
    }

    #[test]
    fn simulator_text_dump() {
        let buf = Shared::default();
        let mut sim = simulator_sink(0).with_dump(Box::new(buf.clone()));
        sim.deliver(RgbColor::new(255, 0, 12)).unwrap();
        sim.deliver(RgbColor::new(0, 1, 2)).unwrap();
        sim.flush().unwrap();
        assert_eq!(
            String::from_utf8(buf.0.lock().unwrap().clone()).unwrap(),
            "255 0 12\n0 1 2\n"
        );
        assert_eq!(sim.last_color(), None);
    }

    #[test]
    fn serial_sink_writes_frames() {
        let mut sink = SerialSink::from_writer("mem", Vec::new());
        sink.deliver(RgbColor::new(255, 255, 255)).unwrap();
        sink.deliver(RgbColor::new(0, 0, 0)).unwrap();
        assert!(sink.capability().lossy);
        assert_eq!(
            sink.into_inner(),
            vec![0x7E, 255, 255, 255, 253, 0x7E, 0, 0, 0, 0]
        );
    }

    struct TimesOut;

    impl Write for TimesOut {
        fn write(&mut self, _: &[u8]) -> io::Result<usize> {
            Err(io::Error::new(io::ErrorKind::TimedOut, "slow lamp"))
        }
        fn flush(&mut self) -> io::Result<()> {
            Ok(())
        }
    }

    #[test]
    fn serial_write_timeout() {
        let mut sink = SerialSink::from_writer("slow", TimesOut);
        assert!(matches!(
            sink.deliver(RgbColor::default()),
            Err(SinkError::WriteTimeout)
        ));
    }

    #[test]
    fn missing_port_is_unavailable() {
        let err = serial_sink("/dev/does-not-exist-lamp", DEFAULT_BAUD)
            .err()
            .unwrap();
        assert!(matches!(err, SinkError::PortUnavailable { .. }));
    }
}
