use alloc::string::String;

/// Outcome of a computable assumption check.
#[derive(Debug, Clone, PartialEq)]
pub struct Certificate {
    pub name: &'static str,
    /// The measured quantity (a minimum, a margin, a gap ...).
    pub value: f64,
    pub pass: bool,
    pub detail: String,
}

impl Certificate {
    pub fn new(name: &'static str, value: f64, pass: bool, detail: impl Into<String>) -> Self {
        Certificate { name, value, pass, detail: detail.into() }
    }
}
