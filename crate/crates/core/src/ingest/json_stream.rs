//! Incremental splitter for a top-level JSON array or a stream of
//! whitespace/newline separated JSON values. Only one value is buffered at a
//! time.

use std::io::BufRead;

use serde_json::Value;

use super::IngestError;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum State {
    Start,
    Array { first: bool },
    Sequence,
    Done,
}

pub(crate) struct JsonValues<R> {
    reader: R,
    offset: u64,
    state: State,
    buf: Vec<u8>,
}

impl<R: BufRead> JsonValues<R> {
    pub(crate) fn new(reader: R) -> Self {
        Self {
            reader,
            offset: 0,
            state: State::Start,
            buf: Vec::new(),
        }
    }

    fn err(&self, message: impl Into<String>) -> IngestError {
        IngestError::JsonStructure {
            offset: self.offset,
            message: message.into(),
        }
    }

    fn peek(&mut self) -> Result<Option<u8>, IngestError> {
        Ok(self.reader.fill_buf()?.first().copied())
    }

    fn bump(&mut self) {
        self.reader.consume(1);
        self.offset += 1;
    }

    fn skip_ws(&mut self) -> Result<(), IngestError> {
        loop {
            let chunk = self.reader.fill_buf()?;
            if chunk.is_empty() {
                return Ok(());
            }
            let n = chunk.iter().take_while(|b| b.is_ascii_whitespace()).count();
            let exhausted = n == chunk.len();
            self.reader.consume(n);
            self.offset += n as u64;
            if !exhausted {
                return Ok(());
            }
        }
    }

    /// Copy the next complete value into `buf`.
    fn read_raw_value(&mut self) -> Result<(), IngestError> {
        self.buf.clear();
        let start = self.offset;
        let first = self.peek()?.ok_or_else(|| self.err("unexpected end of input"))?;
        let mut depth = 0usize;
        let mut in_string = false;
        let mut escaped = false;
        let scalar = !matches!(first, b'{' | b'[' | b'"');
        loop {
            let chunk = self.reader.fill_buf()?;
            if chunk.is_empty() {
                if scalar && !self.buf.is_empty() {
                    return Ok(());
                }
                return Err(IngestError::JsonStructure {
                    offset: start,
                    message: "unterminated value".into(),
                });
            }
            let mut used = 0;
            let mut complete = false;
            for &b in chunk {
                if scalar {
                    if b.is_ascii_whitespace() || matches!(b, b',' | b']' | b'}') {
                        complete = true;
                        break;
                    }
                    used += 1;
                    continue;
                }
                used += 1;
                if in_string {
                    if escaped {
                        escaped = false;
                    } else if b == b'\\' {
                        escaped = true;
                    } else if b == b'"' {
                        in_string = false;
                        if depth == 0 {
                            complete = true;
                            break;
                        }
                    }
                    continue;
                }
                match b {
                    b'"' => in_string = true,
                    b'{' | b'[' => depth += 1,
                    b'}' | b']' => {
                        depth = depth.saturating_sub(1);
                        if depth == 0 {
                            complete = true;
                            break;
                        }
                    }
                    _ => {}
                }
            }
            self.buf.extend_from_slice(&chunk[..used]);
            self.reader.consume(used);
            self.offset += used as u64;
            if complete {
                return Ok(());
            }
        }
    }

    fn parse_value(&mut self) -> Result<Value, IngestError> {
        let start = self.offset;
        self.read_raw_value()?;
        serde_json::from_slice(&self.buf).map_err(|e| IngestError::JsonStructure {
            offset: start,
            message: e.to_string(),
        })
    }

    fn step(&mut self) -> Result<Option<Value>, IngestError> {
        loop {
            match self.state {
                State::Done => return Ok(None),
                State::Start => {
                    self.skip_ws()?;
                    match self.peek()? {
                        None => self.state = State::Done,
                        Some(b'[') => {
                            self.bump();
                            self.state = State::Array { first: true };
                        }
                        Some(_) => self.state = State::Sequence,
                    }
                }
                State::Array { first } => {
                    self.skip_ws()?;
                    match self.peek()? {
                        None => return Err(self.err("unterminated array")),
                        Some(b']') => {
                            self.bump();
                            return self.finish_array();
                        }
                        Some(b',') if !first => {
                            self.bump();
                            self.skip_ws()?;
                            if matches!(self.peek()?, Some(b']') | None) {
                                return Err(self.err("expected value after ','"));
                            }
                        }
                        Some(_) if !first => return Err(self.err("expected ',' or ']'")),
                        Some(_) => {}
                    }
                    self.state = State::Array { first: false };
                    return self.parse_value().map(Some);
                }
                State::Sequence => {
                    self.skip_ws()?;
                    if self.peek()?.is_none() {
                        self.state = State::Done;
                        return Ok(None);
                    }
                    return self.parse_value().map(Some);
                }
            }
        }
    }

    fn finish_array(&mut self) -> Result<Option<Value>, IngestError> {
        self.state = State::Done;
        self.skip_ws()?;
        if self.peek()?.is_some() {
            return Err(self.err("trailing content after array"));
        }
        Ok(None)
    }
}

impl<R: BufRead> Iterator for JsonValues<R> {
    type Item = Result<Value, IngestError>;

    fn next(&mut self) -> Option<Self::Item> {
        match self.step() {
            Ok(v) => v.map(Ok),
            Err(e) => {
                self.state = State::Done;
                Some(Err(e))
            }
        }
    }
}
