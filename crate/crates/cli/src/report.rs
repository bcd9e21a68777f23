use std::process::ExitCode;

use clap::ValueEnum;
use serde_json::Value;

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq)]
pub enum Format {
    Text,
    Json,
    Dot,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Code {
    Ok = 0,
    Violation = 1,
    Unknown = 2,
    Usage = 3,
}

impl From<Code> for ExitCode {
    fn from(c: Code) -> Self {
        ExitCode::from(c as u8)
    }
}

#[derive(Debug)]
pub struct Failure {
    pub code: Code,
    pub message: String,
}

impl Failure {
    pub fn new(code: Code, message: impl Into<String>) -> Self {
        Self {
            code,
            message: message.into(),
        }
    }

    pub fn usage(message: impl Into<String>) -> Self {
        Self::new(Code::Usage, message)
    }
}

pub type Outcome = Result<Report, Failure>;

pub struct Report {
    pub code: Code,
    pub json: Value,
    pub text: String,
    pub dot: Option<String>,
}

impl Report {
    pub fn new(code: Code, json: Value, text: impl Into<String>) -> Self {
        Self {
            code,
            json,
            text: text.into(),
            dot: None,
        }
    }

    pub fn with_dot(mut self, dot: String) -> Self {
        self.dot = Some(dot);
        self
    }

    pub fn render(&self, f: Format) -> String {
        match f {
            Format::Json => {
                let mut s = serde_json::to_string_pretty(&self.json).expect("reports are plain JSON");
                s.push('\n');
                s
            }
            Format::Dot => self.dot.clone().unwrap_or_else(|| self.text.clone()),
            Format::Text => {
                let mut s = self.text.clone();
                if !s.ends_with('\n') {
                    s.push('\n');
                }
                s
            }
        }
    }
}
