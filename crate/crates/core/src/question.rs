//! Question and test-case model, the JSON question document, and the
//! student-facing view of a question.

use std::collections::HashSet;
use std::fmt;
use std::time::Duration;

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Language a question is answered in.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum GradedLanguage {
    Python3,
    Cpp14,
}

impl GradedLanguage {
    pub fn tag(self) -> &'static str {
        match self {
            GradedLanguage::Python3 => "python3",
            GradedLanguage::Cpp14 => "cpp14",
        }
    }

    pub fn from_tag(tag: &str) -> Option<Self> {
        match tag {
            "python3" => Some(GradedLanguage::Python3),
            "cpp14" => Some(GradedLanguage::Cpp14),
            _ => None,
        }
    }

    /// File name the student's answer is written to inside a workspace.
    pub fn student_file(self) -> &'static str {
        match self {
            GradedLanguage::Python3 => "student.py",
            GradedLanguage::Cpp14 => "student.cpp",
        }
    }
}

impl fmt::Display for GradedLanguage {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.tag())
    }
}

#[derive(Debug, Error)]
pub enum QuestionError {
    #[error("malformed question document: {0}")]
    Json(#[from] serde_json::Error),
    #[error("unknown language tag `{0}` (expected python3 or cpp14)")]
    UnknownLanguage(String),
    #[error("no tests")]
    NoTests,
    #[error("duplicate test id `{0}`")]
    DuplicateTestId(String),
    #[error("test id `{0:?}` is empty or contains `|` or a line break")]
    InvalidTestId(String),
    #[error("test `{0}` is flagged both example and hidden")]
    ExampleAndHidden(String),
    #[error("test `{test}`: probe `{probe}` is not available for {language} questions")]
    ProbeLanguageMismatch {
        test: String,
        probe: &'static str,
        language: GradedLanguage,
    },
    #[error("test `{test}`: {reason}")]
    InvalidTest { test: String, reason: String },
    #[error("total marks must be positive, got {0}")]
    NonPositiveTotal(f64),
    #[error("penalty regime: {0}")]
    InvalidPenalty(String),
    #[error("resource limits: {0}")]
    InvalidLimits(String),
}

/// Per-attempt penalty percentages. Attempt `n` (1-indexed) uses entry `n`;
/// attempts past the end reuse the final entry.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PenaltyRegime(Vec<u8>);

impl PenaltyRegime {
    pub fn new(percentages: Vec<u8>) -> Result<Self, QuestionError> {
        if percentages.is_empty() {
            return Err(QuestionError::InvalidPenalty("must have at least one entry".into()));
        }
        if let Some(p) = percentages.iter().find(|p| **p > 100) {
            return Err(QuestionError::InvalidPenalty(format!("{p} is outside [0, 100]")));
        }
        Ok(PenaltyRegime(percentages))
    }

    pub fn percentages(&self) -> &[u8] {
        &self.0
    }

    /// Penalty for a 1-indexed check attempt. Attempt 0 (precheck) is free.
    pub fn penalty_for(&self, attempt_number: u32) -> u8 {
        if attempt_number == 0 {
            return 0;
        }
        let idx = (attempt_number as usize).min(self.0.len()) - 1;
        self.0[idx]
    }
}

impl Default for PenaltyRegime {
    fn default() -> Self {
        PenaltyRegime(vec![0, 0, 10, 20, 30, 40, 50])
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ResourceLimits {
    pub compile_timeout: Duration,
    pub run_timeout: Duration,
    /// Address-space cap for the run phase, in bytes.
    pub memory_cap: u64,
    /// Cap on each captured stream, in bytes.
    pub output_cap: usize,
}

impl Default for ResourceLimits {
    fn default() -> Self {
        ResourceLimits {
            compile_timeout: Duration::from_secs(30),
            run_timeout: Duration::from_secs(5),
            memory_cap: 512 * MIB,
            output_cap: 64 * 1024,
        }
    }
}

const MIB: u64 = 1024 * 1024;

impl ResourceLimits {
    fn validate(&self) -> Result<(), QuestionError> {
        if self.compile_timeout.is_zero() || self.run_timeout.is_zero() {
            return Err(QuestionError::InvalidLimits("timeouts must be positive".into()));
        }
        if self.memory_cap == 0 || self.output_cap == 0 {
            return Err(QuestionError::InvalidLimits("caps must be positive".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct DocLink {
    pub label: String,
    pub url: String,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct TestFlags {
    pub example: bool,
    pub precheck: bool,
    pub hidden: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TestKind {
    Io,
    Introspection,
    Heuristic,
}

#[derive(Debug, Clone, PartialEq)]
pub struct TestCase {
    pub id: String,
    pub marks: f64,
    pub flags: TestFlags,
    pub payload: TestPayload,
    /// Position in the document; execution and display follow it.
    pub display_order: usize,
}

impl TestCase {
    pub fn kind(&self) -> TestKind {
        match self.payload {
            TestPayload::Io(_) => TestKind::Io,
            TestPayload::Introspection(_) => TestKind::Introspection,
            TestPayload::Heuristic(_) => TestKind::Heuristic,
        }
    }

    /// Text shown in the "input" column of a results table.
    pub fn display_input(&self) -> String {
        match &self.payload {
            TestPayload::Io(io) => match &io.call {
                IoCall::Function { function, args } => format!("{function}({})", args.join(", ")),
                IoCall::Stdin(text) => text.clone(),
            },
            TestPayload::Introspection(check) => check.describe(),
            TestPayload::Heuristic(h) => h.describe(),
        }
    }

    /// Text shown in the "expected" column of a results table.
    pub fn display_expected(&self) -> String {
        match &self.payload {
            TestPayload::Io(io) => io.expected.clone(),
            TestPayload::Introspection(check) => check.expected_display(),
            TestPayload::Heuristic(_) => "True".to_string(),
        }
    }

    /// Literal texts that must never reach a student when this test is hidden.
    pub fn secret_literals(&self) -> Vec<String> {
        let mut out = Vec::new();
        if let TestPayload::Io(io) = &self.payload {
            match &io.call {
                IoCall::Function { args, .. } => {
                    out.push(self.display_input());
                    for arg in args {
                        out.push(arg.clone());
                        out.extend(quoted_contents(arg));
                    }
                }
                IoCall::Stdin(text) => out.push(text.clone()),
            }
            out.push(io.expected.clone());
        }
        out.retain(|s| !s.trim().is_empty());
        out
    }
}

/// Contents of single- or double-quoted segments in a literal, e.g. the words
/// of a list-of-strings argument.
fn quoted_contents(literal: &str) -> Vec<String> {
    let mut out = Vec::new();
    let mut chars = literal.char_indices();
    while let Some((start, c)) = chars.next() {
        if c != '\'' && c != '"' {
            continue;
        }
        let mut escaped = false;
        for (i, d) in chars.by_ref() {
            if escaped {
                escaped = false;
            } else if d == '\\' {
                escaped = true;
            } else if d == c {
                out.push(literal[start + 1..i].to_string());
                break;
            }
        }
    }
    out
}

#[derive(Debug, Clone, PartialEq)]
pub enum TestPayload {
    Io(IoTest),
    Introspection(IntrospectionCheck),
    Heuristic(SourceHeuristic),
}

#[derive(Debug, Clone, PartialEq)]
pub struct IoTest {
    pub call: IoCall,
    pub expected: String,
    pub compare: Compare,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum IoCall {
    /// Call `function` with literal arguments written in the graded language.
    Function { function: String, args: Vec<String> },
    /// Run the submission as a program with this standard input.
    Stdin(String),
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
#[serde(tag = "mode", rename_all = "snake_case")]
pub enum Compare {
    #[default]
    ExactText,
    NumericTolerance {
        tol: f64,
    },
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "probe", rename_all = "snake_case", deny_unknown_fields)]
pub enum IntrospectionCheck {
    SymbolDefined {
        name: String,
    },
    Arity {
        name: String,
        n: u32,
    },
    ReturnType {
        name: String,
        sample_args: Vec<String>,
        expected_type: String,
    },
    CallableWith {
        name: String,
        param_types: Vec<String>,
    },
    ReturnsTypeCpp {
        name: String,
        param_types: Vec<String>,
        return_type: String,
    },
    DerivesFrom {
        #[serde(rename = "class")]
        class_name: String,
        base: String,
    },
    HasAttribute {
        #[serde(rename = "class")]
        class_name: String,
        attr: String,
        #[serde(rename = "type")]
        type_name: String,
    },
    HasMethod {
        #[serde(rename = "class")]
        class_name: String,
        method: String,
        param_types: Vec<String>,
        return_type: String,
    },
}

impl IntrospectionCheck {
    pub fn probe_name(&self) -> &'static str {
        match self {
            IntrospectionCheck::SymbolDefined { .. } => "symbol_defined",
            IntrospectionCheck::Arity { .. } => "arity",
            IntrospectionCheck::ReturnType { .. } => "return_type",
            IntrospectionCheck::CallableWith { .. } => "callable_with",
            IntrospectionCheck::ReturnsTypeCpp { .. } => "returns_type_cpp",
            IntrospectionCheck::DerivesFrom { .. } => "derives_from",
            IntrospectionCheck::HasAttribute { .. } => "has_attribute",
            IntrospectionCheck::HasMethod { .. } => "has_method",
        }
    }

    pub fn allowed_in(&self, language: GradedLanguage) -> bool {
        use IntrospectionCheck::*;
        match language {
            GradedLanguage::Python3 => matches!(self, SymbolDefined { .. } | Arity { .. } | ReturnType { .. }),
            GradedLanguage::Cpp14 => !matches!(self, Arity { .. } | ReturnType { .. }),
        }
    }

    fn describe(&self) -> String {
        use IntrospectionCheck::*;
        match self {
            SymbolDefined { name } => format!("\"{name}\" is defined"),
            Arity { name, .. } => format!("number of parameters of {name}"),
            ReturnType { name, sample_args, .. } => {
                format!("type({name}({})).__name__", sample_args.join(", "))
            }
            CallableWith { name, param_types } => format!("{name}({})", param_types.join(", ")),
            ReturnsTypeCpp { name, param_types, .. } => {
                format!("return type of {name}({})", param_types.join(", "))
            }
            DerivesFrom { class_name, base } => format!("{class_name} derives from {base}"),
            HasAttribute { class_name, attr, .. } => format!("type of {class_name}::{attr}"),
            HasMethod {
                class_name,
                method,
                param_types,
                ..
            } => format!("return type of {class_name}::{method}({})", param_types.join(", ")),
        }
    }

    fn expected_display(&self) -> String {
        use IntrospectionCheck::*;
        match self {
            SymbolDefined { .. } | DerivesFrom { .. } => "True".to_string(),
            Arity { n, .. } => n.to_string(),
            ReturnType { expected_type, .. } => expected_type.clone(),
            CallableWith { .. } => "callable".to_string(),
            ReturnsTypeCpp { return_type, .. } | HasMethod { return_type, .. } => return_type.clone(),
            HasAttribute { type_name, .. } => type_name.clone(),
        }
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Recursion {
    #[default]
    Ignore,
    Forbidden,
    Required,
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SourceHeuristic {
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub required_substrings: Vec<String>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub forbidden_substrings: Vec<String>,
    #[serde(default)]
    pub recursion: Recursion,
    #[serde(default, skip_serializing_if = "String::is_empty")]
    pub target_name: String,
}

impl SourceHeuristic {
    fn describe(&self) -> String {
        let mut parts = Vec::new();
        for s in &self.required_substrings {
            parts.push(format!("uses {s:?}"));
        }
        for s in &self.forbidden_substrings {
            parts.push(format!("does not use {s:?}"));
        }
        match self.recursion {
            Recursion::Ignore => {}
            Recursion::Forbidden => parts.push(format!("{} is not recursive", self.target_name)),
            Recursion::Required => parts.push(format!("{} is recursive", self.target_name)),
        }
        parts.join(" and ")
    }
}

/// A validated question. Immutable after parsing.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "QuestionDocument", into = "QuestionDocument")]
pub struct Question {
    pub id: String,
    pub title: String,
    pub statement: String,
    pub language: GradedLanguage,
    pub preload: String,
    pub model_answer: Option<String>,
    pub tests: Vec<TestCase>,
    pub penalty_regime: PenaltyRegime,
    pub limits: ResourceLimits,
    pub doc_links: Vec<DocLink>,
}

impl Question {
    pub fn total_marks(&self) -> f64 {
        total_marks(self)
    }

    pub fn test(&self, id: &str) -> Option<&TestCase> {
        self.tests.iter().find(|t| t.id == id)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("question serializes")
    }
}

/// Parse and validate a question document.
pub fn parse_question(doc: &str) -> Result<Question, QuestionError> {
    let raw: QuestionDocument = serde_json::from_str(doc)?;
    Question::try_from(raw)
}

pub fn total_marks(q: &Question) -> f64 {
    q.tests.iter().map(|t| t.marks).sum()
}

// Wire format.

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct QuestionDocument {
    id: String,
    title: String,
    #[serde(default)]
    statement: String,
    language: String,
    #[serde(default)]
    preload: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    model_answer: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    penalty_regime: Option<Vec<u8>>,
    #[serde(default)]
    limits: LimitsDocument,
    #[serde(default)]
    doc_links: Vec<DocLink>,
    tests: Vec<TestDocument>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct LimitsDocument {
    #[serde(default = "default_compile_s")]
    compile_timeout_s: f64,
    #[serde(default = "default_run_s")]
    run_timeout_s: f64,
    #[serde(default = "default_memory_mb")]
    memory_mb: u64,
    #[serde(default = "default_output_kb")]
    output_kb: u64,
}

fn default_compile_s() -> f64 {
    ResourceLimits::default().compile_timeout.as_secs_f64()
}
fn default_run_s() -> f64 {
    ResourceLimits::default().run_timeout.as_secs_f64()
}
fn default_memory_mb() -> u64 {
    ResourceLimits::default().memory_cap / MIB
}
fn default_output_kb() -> u64 {
    ResourceLimits::default().output_cap as u64 / 1024
}

impl Default for LimitsDocument {
    fn default() -> Self {
        ResourceLimits::default().into()
    }
}

impl From<ResourceLimits> for LimitsDocument {
    fn from(l: ResourceLimits) -> Self {
        LimitsDocument {
            compile_timeout_s: l.compile_timeout.as_secs_f64(),
            run_timeout_s: l.run_timeout.as_secs_f64(),
            memory_mb: l.memory_cap / MIB,
            output_kb: l.output_cap as u64 / 1024,
        }
    }
}

impl TryFrom<LimitsDocument> for ResourceLimits {
    type Error = QuestionError;

    fn try_from(d: LimitsDocument) -> Result<Self, Self::Error> {
        let secs = |v: f64, what: &str| {
            if v.is_finite() && v > 0.0 {
                Ok(Duration::from_secs_f64(v))
            } else {
                Err(QuestionError::InvalidLimits(format!("{what} must be positive")))
            }
        };
        let limits = ResourceLimits {
            compile_timeout: secs(d.compile_timeout_s, "compile_timeout_s")?,
            run_timeout: secs(d.run_timeout_s, "run_timeout_s")?,
            memory_cap: d.memory_mb * MIB,
            output_cap: (d.output_kb * 1024) as usize,
        };
        limits.validate()?;
        Ok(limits)
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct TestDocument {
    id: String,
    marks: f64,
    kind: TestKind,
    #[serde(default)]
    flags: Vec<FlagDocument>,
    payload: serde_json::Value,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
enum FlagDocument {
    Example,
    Precheck,
    Hidden,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct IoDocument {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    call: Option<CallDocument>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    stdin: Option<String>,
    expected: String,
    #[serde(default)]
    compare: Compare,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct CallDocument {
    function: String,
    #[serde(default)]
    args: Vec<String>,
}

impl TryFrom<QuestionDocument> for Question {
    type Error = QuestionError;

    fn try_from(doc: QuestionDocument) -> Result<Self, Self::Error> {
        let language = GradedLanguage::from_tag(&doc.language)
            .ok_or_else(|| QuestionError::UnknownLanguage(doc.language.clone()))?;
        if doc.tests.is_empty() {
            return Err(QuestionError::NoTests);
        }
        let mut seen = HashSet::new();
        let mut tests = Vec::with_capacity(doc.tests.len());
        for (display_order, t) in doc.tests.into_iter().enumerate() {
            if t.id.is_empty() || t.id.contains(['|', '\n', '\r']) {
                return Err(QuestionError::InvalidTestId(t.id));
            }
            if !seen.insert(t.id.clone()) {
                return Err(QuestionError::DuplicateTestId(t.id));
            }
            tests.push(parse_test(t, display_order, language)?);
        }
        let total: f64 = tests.iter().map(|t| t.marks).sum();
        if total.is_nan() || total <= 0.0 {
            return Err(QuestionError::NonPositiveTotal(total));
        }
        let penalty_regime = match doc.penalty_regime {
            Some(p) => PenaltyRegime::new(p)?,
            None => PenaltyRegime::default(),
        };
        Ok(Question {
            id: doc.id,
            title: doc.title,
            statement: doc.statement,
            language,
            preload: doc.preload,
            model_answer: doc.model_answer,
            tests,
            penalty_regime,
            limits: doc.limits.try_into()?,
            doc_links: doc.doc_links,
        })
    }
}

fn parse_test(t: TestDocument, display_order: usize, language: GradedLanguage) -> Result<TestCase, QuestionError> {
    let invalid = |reason: String| QuestionError::InvalidTest {
        test: t.id.clone(),
        reason,
    };
    if !(t.marks.is_finite() && t.marks >= 0.0) {
        return Err(invalid(format!("marks must be a non-negative number, got {}", t.marks)));
    }
    let mut flags = TestFlags::default();
    for f in &t.flags {
        match f {
            FlagDocument::Example => flags.example = true,
            FlagDocument::Precheck => flags.precheck = true,
            FlagDocument::Hidden => flags.hidden = true,
        }
    }
    if flags.example && flags.hidden {
        return Err(QuestionError::ExampleAndHidden(t.id));
    }
    let payload = match t.kind {
        TestKind::Io => {
            let io: IoDocument =
                serde_json::from_value(t.payload.clone()).map_err(|e| invalid(format!("io payload: {e}")))?;
            let call = match (io.call, io.stdin) {
                (Some(c), None) => {
                    if c.function.trim().is_empty() {
                        return Err(invalid("call.function is empty".into()));
                    }
                    IoCall::Function {
                        function: c.function,
                        args: c.args,
                    }
                }
                (None, Some(s)) => IoCall::Stdin(s),
                _ => return Err(invalid("io payload needs exactly one of `call` or `stdin`".into())),
            };
            match io.compare {
                Compare::ExactText if io.expected.is_empty() => {
                    return Err(invalid("expected must be non-empty for exact_text".into()))
                }
                Compare::NumericTolerance { tol } => {
                    if !(tol.is_finite() && tol > 0.0) {
                        return Err(invalid("numeric tolerance must be positive".into()));
                    }
                    match io.expected.trim().parse::<f64>() {
                        Ok(v) if v.is_finite() => {}
                        _ => return Err(invalid(format!("expected {:?} is not a finite number", io.expected))),
                    }
                }
                _ => {}
            }
            TestPayload::Io(IoTest {
                call,
                expected: io.expected,
                compare: io.compare,
            })
        }
        TestKind::Introspection => {
            let check: IntrospectionCheck = serde_json::from_value(t.payload.clone())
                .map_err(|e| invalid(format!("introspection payload: {e}")))?;
            if !check.allowed_in(language) {
                return Err(QuestionError::ProbeLanguageMismatch {
                    test: t.id,
                    probe: check.probe_name(),
                    language,
                });
            }
            TestPayload::Introspection(check)
        }
        TestKind::Heuristic => {
            let h: SourceHeuristic =
                serde_json::from_value(t.payload.clone()).map_err(|e| invalid(format!("heuristic payload: {e}")))?;
            if h.required_substrings.is_empty() && h.forbidden_substrings.is_empty() && h.recursion == Recursion::Ignore
            {
                return Err(invalid("heuristic has no conditions".into()));
            }
            if h.recursion != Recursion::Ignore && h.target_name.is_empty() {
                return Err(invalid("recursion condition needs target_name".into()));
            }
            if h.required_substrings
                .iter()
                .chain(&h.forbidden_substrings)
                .any(String::is_empty)
            {
                return Err(invalid("empty substring condition".into()));
            }
            TestPayload::Heuristic(h)
        }
    };
    Ok(TestCase {
        id: t.id,
        marks: t.marks,
        flags,
        payload,
        display_order,
    })
}

impl From<Question> for QuestionDocument {
    fn from(q: Question) -> Self {
        QuestionDocument {
            id: q.id,
            title: q.title,
            statement: q.statement,
            language: q.language.tag().to_string(),
            preload: q.preload,
            model_answer: q.model_answer,
            penalty_regime: Some(q.penalty_regime.0),
            limits: q.limits.into(),
            doc_links: q.doc_links,
            tests: q.tests.into_iter().map(TestDocument::from).collect(),
        }
    }
}

impl From<TestCase> for TestDocument {
    fn from(t: TestCase) -> Self {
        let kind = t.kind();
        let mut flags = Vec::new();
        if t.flags.example {
            flags.push(FlagDocument::Example);
        }
        if t.flags.precheck {
            flags.push(FlagDocument::Precheck);
        }
        if t.flags.hidden {
            flags.push(FlagDocument::Hidden);
        }
        let payload = match t.payload {
            TestPayload::Io(io) => {
                let (call, stdin) = match io.call {
                    IoCall::Function { function, args } => (Some(CallDocument { function, args }), None),
                    IoCall::Stdin(s) => (None, Some(s)),
                };
                serde_json::to_value(IoDocument {
                    call,
                    stdin,
                    expected: io.expected,
                    compare: io.compare,
                })
            }
            TestPayload::Introspection(c) => serde_json::to_value(c),
            TestPayload::Heuristic(h) => serde_json::to_value(h),
        }
        .expect("payload serializes");
        TestDocument {
            id: t.id,
            marks: t.marks,
            kind,
            flags,
            payload,
        }
    }
}

/// What a student sees before attempting a question.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QuestionView {
    pub id: String,
    pub title: String,
    pub statement: String,
    pub language: GradedLanguage,
    pub preload: String,
    pub doc_links: Vec<DocLink>,
    pub total_marks: f64,
    pub penalty_regime: Vec<u8>,
    pub examples: Vec<ExampleRow>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ExampleRow {
    pub test_id: String,
    pub input: String,
    pub expected: String,
}

pub fn student_view(q: &Question) -> QuestionView {
    QuestionView {
        id: q.id.clone(),
        title: q.title.clone(),
        statement: q.statement.clone(),
        language: q.language,
        preload: q.preload.clone(),
        doc_links: q.doc_links.clone(),
        total_marks: q.total_marks(),
        penalty_regime: q.penalty_regime.percentages().to_vec(),
        examples: q
            .tests
            .iter()
            .filter(|t| t.flags.example)
            .map(|t| ExampleRow {
                test_id: t.id.clone(),
                input: t.display_input(),
                expected: t.display_expected(),
            })
            .collect(),
    }
}
