use std::collections::BTreeMap;

use emrkit_core::{Block, Construct, EmrAst, Expr, ExprKind, Statement, StatementKind, BUILTIN_METHODS};
use emrkit_sut::{Action, ActionSequence, Output, Session, SessionFactory, SutError};
use serde::{Deserialize, Serialize};

use crate::stubs::StubBindings;
use crate::value::Value;
use crate::RuntimeError;

/// Failing bindings kept per verdict; the total is always counted.
pub const MAX_REPORTED_FAILURES: usize = 50;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum VerdictValue {
    Pass,
    Fail,
    Inapplicable,
    NotExecutable,
}

impl VerdictValue {
    pub const ALL: [VerdictValue; 4] = [
        VerdictValue::Pass,
        VerdictValue::Fail,
        VerdictValue::Inapplicable,
        VerdictValue::NotExecutable,
    ];

    pub fn name(self) -> &'static str {
        match self {
            VerdictValue::Pass => "Pass",
            VerdictValue::Fail => "Fail",
            VerdictValue::Inapplicable => "Inapplicable",
            VerdictValue::NotExecutable => "NotExecutable",
        }
    }
}

impl std::fmt::Display for VerdictValue {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct LoopBinding {
    pub name: String,
    pub value: String,
}

/// One loop-variable assignment under which an assertion did not hold.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FailingBinding {
    /// Source line of the failing statement.
    pub line: u32,
    pub bindings: Vec<LoopBinding>,
    /// `Some(true)` for an IMPLIES whose antecedent held; `None` for a plain
    /// boolean statement.
    pub antecedent: Option<bool>,
    pub consequent: bool,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Verdict {
    pub value: VerdictValue,
    pub failing_bindings: Vec<FailingBinding>,
    /// Total number of failing bindings, including ones not kept.
    pub failures: usize,
    /// Functions with no binding; non-empty exactly for NotExecutable.
    pub stubs: Vec<String>,
    /// How many times an antecedent held.
    pub antecedents_held: usize,
}

impl Verdict {
    fn not_executable(stubs: Vec<String>) -> Verdict {
        Verdict {
            value: VerdictValue::NotExecutable,
            failing_bindings: Vec::new(),
            failures: 0,
            stubs,
            antecedents_held: 0,
        }
    }
}

/// Functions the EMR calls that neither the runtime nor `stubs` provide,
/// in order of first appearance.
pub fn unbound_functions(ast: &EmrAst, stubs: &StubBindings) -> Vec<String> {
    let mut out: Vec<String> = Vec::new();
    for e in ast.exprs() {
        e.walk(&mut |x| {
            let name = match &x.kind {
                ExprKind::Call { name, .. } => name,
                ExprKind::Method { name, .. } if !BUILTIN_METHODS.contains(&name.as_str()) => name,
                _ => return,
            };
            if !stubs.contains(name) && !out.contains(name) {
                out.push(name.clone());
            }
        });
    }
    out
}

/// Runs `ast` with `source_input` as `Input(1)`. Each input, the source
/// included, executes on its own fresh session from `factory`.
pub fn evaluate_emr(
    ast: &EmrAst,
    source_input: &ActionSequence,
    factory: &dyn SessionFactory,
    stubs: &StubBindings,
) -> Result<Verdict, RuntimeError> {
    let missing = unbound_functions(ast, stubs);
    if !missing.is_empty() {
        return Ok(Verdict::not_executable(missing));
    }
    let mut ev = Evaluator::new(Some(factory), stubs);
    let mut source = source_input.clone();
    source.index = 1;
    source.renumber();
    match ev.register(source).and_then(|_| ev.block(&ast.body).map(|_| ())) {
        Ok(()) => Ok(ev.verdict()),
        Err(RuntimeError::MissingStub(name)) => Ok(Verdict::not_executable(vec![name])),
        Err(e) => Err(e),
    }
}

/// Evaluates a boolean expression under `env` with no SUT attached.
pub fn eval_bool(expr: &Expr, env: &BTreeMap<String, Value>) -> Result<bool, RuntimeError> {
    let stubs = StubBindings::new();
    let mut ev = Evaluator::new(None, &stubs);
    ev.scopes[0] = env.iter().map(|(k, v)| (k.clone(), v.clone())).collect();
    ev.truth(expr, "expression")
}

enum Flow {
    Next,
    Continue,
}

struct Evaluator<'a> {
    factory: Option<&'a dyn SessionFactory>,
    stubs: &'a StubBindings,
    inputs: BTreeMap<i64, ActionSequence>,
    outputs: BTreeMap<i64, Vec<Output>>,
    scopes: Vec<Vec<(String, Value)>>,
    loops: Vec<(String, Value)>,
    held: usize,
    failures: usize,
    failing: Vec<FailingBinding>,
}

fn mismatch(e: &Expr, message: impl Into<String>) -> RuntimeError {
    RuntimeError::TypeMismatch {
        line: e.pos.line,
        message: message.into(),
    }
}

fn index_of(v: &Value, at: &Expr, what: &str) -> Result<usize, RuntimeError> {
    match v {
        Value::Int(i) if *i >= 0 => Ok(*i as usize),
        Value::Int(i) => Err(RuntimeError::PositionOutOfRange { position: *i, len: 0 }),
        other => Err(mismatch(at, format!("{what} must be an integer, found {}", other.type_name()))),
    }
}

fn at<T: Clone>(items: &[T], i: usize) -> Result<T, RuntimeError> {
    items.get(i).cloned().ok_or(RuntimeError::PositionOutOfRange {
        position: i as i64,
        len: items.len(),
    })
}

fn results_of(o: &Output) -> Vec<Value> {
    o.results()
        .map(|r| r.iter().map(Value::from_json).collect())
        .unwrap_or_default()
}

impl<'a> Evaluator<'a> {
    fn new(factory: Option<&'a dyn SessionFactory>, stubs: &'a StubBindings) -> Self {
        Evaluator {
            factory,
            stubs,
            inputs: BTreeMap::new(),
            outputs: BTreeMap::new(),
            scopes: vec![Vec::new()],
            loops: Vec::new(),
            held: 0,
            failures: 0,
            failing: Vec::new(),
        }
    }

    fn verdict(self) -> Verdict {
        let value = if self.failures > 0 {
            VerdictValue::Fail
        } else if self.held > 0 {
            VerdictValue::Pass
        } else {
            VerdictValue::Inapplicable
        };
        Verdict {
            value,
            failing_bindings: self.failing,
            failures: self.failures,
            stubs: Vec::new(),
            antecedents_held: self.held,
        }
    }

    fn session(&self) -> Result<Session, RuntimeError> {
        let factory = self
            .factory
            .ok_or_else(|| RuntimeError::Adapter(SutError::Config("no SUT attached".into())))?;
        Ok(factory.open()?)
    }

    /// Executes `seq` on a fresh session and records it under its index.
    fn register(&mut self, seq: ActionSequence) -> Result<(), RuntimeError> {
        let outputs = self.session()?.execute_sequence(&seq)?.outputs;
        let k = seq.index as i64;
        self.inputs.insert(k, seq);
        self.outputs.insert(k, outputs);
        Ok(())
    }

    fn lookup(&self, name: &str, e: &Expr) -> Result<Value, RuntimeError> {
        self.scopes
            .iter()
            .rev()
            .flat_map(|s| s.iter().rev())
            .find(|(n, _)| n == name)
            .map(|(_, v)| v.clone())
            .ok_or_else(|| RuntimeError::UndefinedVariable {
                name: name.to_string(),
                line: e.pos.line,
            })
    }

    fn declare(&mut self, name: &str, v: Value) {
        self.scopes.last_mut().expect("scope").push((name.to_string(), v));
    }

    fn block(&mut self, block: &Block) -> Result<Flow, RuntimeError> {
        self.scopes.push(Vec::new());
        let flow = self.statements(&block.statements);
        self.scopes.pop();
        flow
    }

    fn statements(&mut self, stmts: &[Statement]) -> Result<Flow, RuntimeError> {
        for s in stmts {
            if let Flow::Continue = self.statement(s)? {
                return Ok(Flow::Continue);
            }
        }
        Ok(Flow::Next)
    }

    fn statement(&mut self, s: &Statement) -> Result<Flow, RuntimeError> {
        match &s.kind {
            StatementKind::ForEach { var, iterable, body, .. } => {
                let items = self.iterate(iterable)?;
                for item in items {
                    self.scopes.push(vec![(var.clone(), item.clone())]);
                    self.loops.push((var.clone(), item));
                    let r = self.block(body);
                    self.loops.pop();
                    self.scopes.pop();
                    r?;
                }
                Ok(Flow::Next)
            }
            StatementKind::If { condition, body } => {
                if self.truth(condition, "if condition")? {
                    self.block(body)
                } else {
                    Ok(Flow::Next)
                }
            }
            StatementKind::VarDecl { name, init, .. } => {
                let v = self.eval(init)?;
                self.declare(name, v);
                Ok(Flow::Next)
            }
            StatementKind::Continue => Ok(Flow::Continue),
            StatementKind::Expr(e) => {
                self.assertion(s, e)?;
                Ok(Flow::Next)
            }
        }
    }

    /// A boolean expression statement is an assertion. IMPLIES counts its own
    /// antecedent; any other boolean statement is asserted unconditionally.
    fn assertion(&mut self, s: &Statement, e: &Expr) -> Result<(), RuntimeError> {
        let construct = e.as_construct().map(|(c, _)| c);
        let v = self.eval(e)?;
        let Value::Bool(b) = v else { return Ok(()) };
        let antecedent = match construct {
            Some(Construct::Create) => return Ok(()),
            Some(Construct::Implies) => {
                if b {
                    return Ok(());
                }
                Some(true)
            }
            _ => {
                self.held += 1;
                if b {
                    return Ok(());
                }
                None
            }
        };
        self.failures += 1;
        if self.failing.len() < MAX_REPORTED_FAILURES {
            self.failing.push(FailingBinding {
                line: s.line,
                bindings: self
                    .loops
                    .iter()
                    .map(|(name, v)| LoopBinding {
                        name: name.clone(),
                        value: v.to_string(),
                    })
                    .collect(),
                antecedent,
                consequent: false,
            });
        }
        Ok(())
    }

    fn iterate(&mut self, e: &Expr) -> Result<Vec<Value>, RuntimeError> {
        match self.eval(e)? {
            Value::List(items) => Ok(items),
            Value::Seq(s) => Ok(s.actions.into_iter().map(Value::Action).collect()),
            Value::Output(o) => Ok(results_of(&o)),
            Value::Json(serde_json::Value::Array(a)) => Ok(a.iter().map(Value::from_json).collect()),
            other => Err(mismatch(e, format!("cannot iterate over {}", other.type_name()))),
        }
    }

    fn truth(&mut self, e: &Expr, what: &str) -> Result<bool, RuntimeError> {
        match self.eval(e)? {
            Value::Bool(b) => Ok(b),
            other => Err(mismatch(e, format!("{what} must be boolean, found {}", other.type_name()))),
        }
    }

    fn eval(&mut self, e: &Expr) -> Result<Value, RuntimeError> {
        Ok(match &e.kind {
            ExprKind::Ident(name) => self.lookup(name, e)?,
            ExprKind::Int(i) => Value::Int(*i),
            ExprKind::Str(s) => Value::Str(s.clone()),
            ExprKind::Bool(b) => Value::Bool(*b),
            ExprKind::Not(x) => Value::Bool(!self.truth(x, "NOT argument")?),
            ExprKind::And(a, b) => Value::Bool(self.truth(a, "&& operand")? && self.truth(b, "&& operand")?),
            ExprKind::Or(a, b) => Value::Bool(self.truth(a, "|| operand")? || self.truth(b, "|| operand")?),
            ExprKind::Construct { construct, args } => self.construct(e, *construct, args)?,
            ExprKind::Call { name, args } => {
                let vals = args.iter().map(|a| self.eval(a)).collect::<Result<Vec<_>, _>>()?;
                self.call_stub(name, &vals)?
            }
            ExprKind::Method { receiver, name, args, .. } => {
                let mut vals = vec![self.eval(receiver)?];
                for a in args {
                    vals.push(self.eval(a)?);
                }
                match builtin(name, &vals) {
                    Some(r) => r.map_err(|m| match m {
                        BuiltinError::Range(r) => r,
                        BuiltinError::Type(msg) => mismatch(e, msg),
                    })?,
                    None => self.call_stub(name, &vals)?,
                }
            }
        })
    }

    fn call_stub(&self, name: &str, args: &[Value]) -> Result<Value, RuntimeError> {
        let f = self
            .stubs
            .get(name)
            .ok_or_else(|| RuntimeError::MissingStub(name.to_string()))?;
        f(args).map_err(|message| RuntimeError::Stub {
            name: name.to_string(),
            message,
        })
    }

    fn arity(e: &Expr, c: Construct, args: &[Expr]) -> Result<(), RuntimeError> {
        if c.arities().contains(&args.len()) {
            Ok(())
        } else {
            Err(mismatch(e, format!("{} cannot take {} arguments", c.name(), args.len())))
        }
    }

    fn input_index(&mut self, e: &Expr) -> Result<i64, RuntimeError> {
        match self.eval(e)? {
            Value::Int(k) => Ok(k),
            Value::Seq(s) if s.index > 0 => Ok(s.index as i64),
            other => Err(mismatch(e, format!("expected an input index, found {}", other.type_name()))),
        }
    }

    fn construct(&mut self, e: &Expr, c: Construct, args: &[Expr]) -> Result<Value, RuntimeError> {
        Self::arity(e, c, args)?;
        match c {
            Construct::Not => Ok(Value::Bool(!self.truth(&args[0], "NOT argument")?)),
            Construct::And => Ok(Value::Bool(
                self.truth(&args[0], "AND argument 1")? && self.truth(&args[1], "AND argument 2")?,
            )),
            Construct::Or => Ok(Value::Bool(
                self.truth(&args[0], "OR argument 1")? || self.truth(&args[1], "OR argument 2")?,
            )),
            Construct::Implies => {
                if self.truth(&args[0], "IMPLIES argument 1")? {
                    self.held += 1;
                    Ok(Value::Bool(self.truth(&args[1], "IMPLIES argument 2")?))
                } else {
                    Ok(Value::Bool(true))
                }
            }
            Construct::Input => {
                let k = self.input_index(&args[0])?;
                self.inputs
                    .get(&k)
                    .map(|s| Value::Seq(s.clone()))
                    .ok_or(RuntimeError::UndefinedInput { index: k, line: e.pos.line })
            }
            Construct::Output => {
                let k = self.input_index(&args[0])?;
                let outputs = self
                    .outputs
                    .get(&k)
                    .ok_or(RuntimeError::UndefinedInput { index: k, line: e.pos.line })?;
                if args.len() == 1 {
                    return Ok(Value::List(outputs.iter().cloned().map(Value::Output).collect()));
                }
                let outputs = outputs.clone();
                let pos = self.eval(&args[1])?;
                let pos = index_of(&pos, &args[1], "Output position")?;
                Ok(Value::Output(at(&outputs, pos)?))
            }
            Construct::Create => {
                let k = match args[0].as_construct() {
                    Some((Construct::Input, [ix])) => match ix.kind {
                        ExprKind::Int(k) if k >= 2 => k,
                        _ => return Err(mismatch(e, "CREATE must target Input(k) with a literal k of 2 or higher")),
                    },
                    _ => return Err(mismatch(e, "CREATE expects Input(k) as its first argument")),
                };
                let mut copy = match self.eval(&args[1])? {
                    Value::Seq(s) => s,
                    Value::Action(a) => ActionSequence::new(0, vec![a]),
                    Value::List(items) => {
                        let actions = items
                            .into_iter()
                            .map(|v| match v {
                                Value::Action(a) => Ok(a),
                                other => Err(mismatch(e, format!("CREATE cannot copy a list of {}", other.type_name()))),
                            })
                            .collect::<Result<Vec<Action>, _>>()?;
                        ActionSequence::new(0, actions)
                    }
                    other => return Err(mismatch(e, format!("CREATE cannot copy {}", other.type_name()))),
                };
                copy.index = k as usize;
                copy.renumber();
                self.register(copy)?;
                Ok(Value::Bool(true))
            }
        }
    }
}

enum BuiltinError {
    Type(String),
    Range(RuntimeError),
}

impl From<RuntimeError> for BuiltinError {
    fn from(e: RuntimeError) -> Self {
        BuiltinError::Range(e)
    }
}

fn int_arg(v: &Value, method: &str) -> Result<usize, BuiltinError> {
    match v {
        Value::Int(i) if *i >= 0 => Ok(*i as usize),
        Value::Int(i) => Err(BuiltinError::Range(RuntimeError::PositionOutOfRange { position: *i, len: 0 })),
        other => Err(BuiltinError::Type(format!(
            "{method} expects an integer, found {}",
            other.type_name()
        ))),
    }
}

fn str_arg<'v>(v: &'v Value, method: &str) -> Result<&'v str, BuiltinError> {
    v.as_str()
        .ok_or_else(|| BuiltinError::Type(format!("{method} expects a string, found {}", v.type_name())))
}

fn same(a: &Value, b: &Value) -> bool {
    a.to_json() == b.to_json()
}

/// Built-in methods by receiver type. `None` when `name` is not built in
/// for this receiver, so a stub may take it.
fn builtin(name: &str, vals: &[Value]) -> Option<Result<Value, BuiltinError>> {
    use serde_json::Value as Json;
    let (recv, args) = vals.split_first().expect("receiver");
    let r = match (name, recv, args) {
        ("equals", a, [b]) => Ok(Value::Bool(same(a, b))),

        ("actions", Value::Seq(s), []) => Ok(Value::List(s.actions.iter().cloned().map(Value::Action).collect())),
        ("size", Value::Seq(s), []) => Ok(Value::Int(s.actions.len() as i64)),
        ("isEmpty", Value::Seq(s), []) => Ok(Value::Bool(s.actions.is_empty())),
        ("get", Value::Seq(s), [i]) => int_arg(i, name).and_then(|i| Ok(Value::Action(at(&s.actions, i)?))),

        ("size", Value::List(l), []) => Ok(Value::Int(l.len() as i64)),
        ("isEmpty", Value::List(l), []) => Ok(Value::Bool(l.is_empty())),
        ("get", Value::List(l), [i]) => int_arg(i, name).and_then(|i| Ok(at(l, i)?)),
        ("contains", Value::List(l), [x]) => Ok(Value::Bool(l.iter().any(|v| same(v, x)))),

        ("getPosition", Value::Action(a), []) => Ok(Value::Int(a.position as i64)),
        ("getKind", Value::Action(a), []) => Ok(Value::Str(a.kind.clone())),
        ("getParameter", Value::Action(a), [n]) => {
            str_arg(n, name).map(|n| a.param(n).map_or(Value::Null, Value::from_json))
        }
        ("hasParameter", Value::Action(a), [n]) => str_arg(n, name).map(|n| Value::Bool(a.param(n).is_some())),

        ("getStatus", Value::Output(o), []) => Ok(Value::Str(o.status.clone())),
        ("getResults", Value::Output(o), []) => Ok(Value::List(results_of(o))),
        ("size" | "getSummarySize", Value::Output(o), []) => Ok(Value::Int(o.summary_size as i64)),
        ("isEmpty", Value::Output(o), []) => Ok(Value::Bool(o.summary_size == 0)),
        ("getPayload", Value::Output(o), []) => Ok(Value::from_json(&o.payload)),
        ("contains", Value::Output(o), [x]) => Ok(Value::Bool(results_of(o).iter().any(|v| same(v, x)))),

        ("size", Value::Str(s), []) => Ok(Value::Int(s.chars().count() as i64)),
        ("isEmpty", Value::Str(s), []) => Ok(Value::Bool(s.is_empty())),
        ("contains", Value::Str(s), [x]) => str_arg(x, name).map(|x| Value::Bool(s.contains(x))),

        ("size", Value::Json(Json::Array(a)), []) => Ok(Value::Int(a.len() as i64)),
        ("isEmpty", Value::Json(Json::Array(a)), []) => Ok(Value::Bool(a.is_empty())),
        ("get", Value::Json(Json::Array(a)), [i]) => {
            int_arg(i, name).and_then(|i| Ok(Value::from_json(&at(a, i)?)))
        }
        ("get", Value::Json(Json::Object(m)), [k]) => {
            str_arg(k, name).map(|k| m.get(k).map_or(Value::Null, Value::from_json))
        }
        _ if BUILTIN_METHODS.contains(&name) => {
            return Some(Err(BuiltinError::Type(format!(
                "{name} is not defined for {} with {} arguments",
                recv.type_name(),
                args.len()
            ))))
        }
        _ => return None,
    };
    Some(r)
}
