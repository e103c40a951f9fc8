use std::fmt;

/// A non-fatal finding reported by a pipeline stage.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Diagnostic {
    pub stage: &'static str,
    pub doc_id: String,
    pub message: String,
}

impl Diagnostic {
    pub fn new(stage: &'static str, doc_id: impl Into<String>, message: impl Into<String>) -> Self {
        Diagnostic {
            stage,
            doc_id: doc_id.into(),
            message: message.into(),
        }
    }
}

impl fmt::Display for Diagnostic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "warning[{}] {}: {}", self.stage, self.doc_id, self.message)
    }
}
