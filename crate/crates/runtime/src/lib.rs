//! Evaluation of executable metamorphic relations.
//!
//! [`evaluate_emr`] runs one EMR against one source input: `Input(1)` is
//! executed first, every `CREATE(Input(k), e)` copies `e` and executes it on
//! a fresh SUT session, and each boolean statement is checked under every
//! loop binding. [`run_suite`] does this for every (EMR, input) pair.

pub mod eval;
pub mod followup;
pub mod shop;
pub mod stubs;
pub mod suite;
pub mod value;

use emrkit_sut::SutError;
use thiserror::Error;

pub use eval::{
    eval_bool, evaluate_emr, unbound_functions, FailingBinding, LoopBinding, Verdict, VerdictValue,
    MAX_REPORTED_FAILURES,
};
pub use followup::{create_followup, Transform};
pub use shop::{builtin_inputs, shop_stubs};
pub use stubs::{StubBindings, StubFn};
pub use suite::{run_suite, EmrReport, Failure, NamedInput, PairError, PairResult, SuiteReport};
pub use value::Value;

#[derive(Debug, Error)]
pub enum RuntimeError {
    #[error("line {line}: type mismatch: {message}")]
    TypeMismatch { line: u32, message: String },
    #[error("no binding for '{0}'")]
    MissingStub(String),
    #[error("'{name}' failed: {message}")]
    Stub { name: String, message: String },
    #[error("line {line}: undefined variable '{name}'")]
    UndefinedVariable { name: String, line: u32 },
    #[error("line {line}: Input({index}) has not been created")]
    UndefinedInput { index: i64, line: u32 },
    #[error("position {position} is out of range for a sequence of length {len}")]
    PositionOutOfRange { position: i64, len: usize },
    #[error("adapter failure: {0}")]
    Adapter(#[from] SutError),
}

impl RuntimeError {
    pub fn is_adapter_failure(&self) -> bool {
        matches!(self, RuntimeError::Adapter(_))
    }
}
