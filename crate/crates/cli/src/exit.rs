use std::fmt;

/// Process exit codes. Each outcome class has exactly one code.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum Exit {
    Ok = 0,
    /// Unexpected failure, e.g. an output file could not be written.
    Internal = 1,
    /// Bad input: missing file, schema, ingestion, parse or validation error.
    Input = 2,
    /// The language model failed: transport, missing mock script or a
    /// reply in the wrong format.
    Llm = 3,
    /// Nothing was produced: every MR failed to convert, or a document
    /// yielded no MR.
    NothingProduced = 4,
    /// At least one EMR verdict is Fail.
    TestFailure = 5,
    /// The SUT adapter failed.
    Adapter = 6,
    /// At least one EMR cannot run because a function has no binding.
    NotExecutable = 7,
}

impl Exit {
    pub fn code(self) -> u8 {
        self as u8
    }
}

#[derive(Debug)]
pub struct CliError {
    pub exit: Exit,
    pub message: String,
}

impl CliError {
    pub fn new(exit: Exit, message: impl Into<String>) -> Self {
        CliError {
            exit,
            message: message.into(),
        }
    }

    pub fn internal(e: impl fmt::Display) -> Self {
        CliError::new(Exit::Internal, e.to_string())
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.message)
    }
}

impl From<emrkit_llm::LlmError> for CliError {
    fn from(e: emrkit_llm::LlmError) -> Self {
        use emrkit_llm::LlmError as E;
        let exit = match &e {
            E::Transport { .. } | E::MissingScript { .. } | E::ResponseFormat { .. } => Exit::Llm,
            E::Io { .. }
            | E::UnsupportedFormat { .. }
            | E::EmptyDocument
            | E::Template { .. }
            | E::FewShot { .. }
            | E::Scripts(_)
            | E::Config(_)
            | E::SingleShotRefused => Exit::Input,
        };
        CliError::new(exit, e.to_string())
    }
}

impl From<emrkit_grader::GradeError> for CliError {
    fn from(e: emrkit_grader::GradeError) -> Self {
        CliError::new(Exit::Input, e.to_string())
    }
}

impl From<emrkit_sut::SutError> for CliError {
    fn from(e: emrkit_sut::SutError) -> Self {
        let exit = match e {
            emrkit_sut::SutError::Transport(_)
            | emrkit_sut::SutError::FingerprintMismatch { .. }
            | emrkit_sut::SutError::CassetteExhausted { .. } => Exit::Adapter,
            _ => Exit::Input,
        };
        CliError::new(exit, e.to_string())
    }
}
