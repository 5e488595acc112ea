//! C++14 harness generation.
//!
//! A naive unit test that calls a function the submission does not define (or
//! defines with another signature) is a compile error, and a compile error
//! costs the student every mark. The generated harness avoids that by asking
//! the compiler questions it can answer without failing: each probe is a
//! substitution-failure-based trait that evaluates to `true` or `false`, and
//! each functional call is only instantiated through an overload that exists
//! when the call is well formed.
//!
//! Free-function probes form a ladder, each rung requiring the previous one:
//!
//! 1. the name is declared: callable with some number of arguments, or with
//!    one of the parameter lists probed for it,
//! 2. it is callable with the given parameter types,
//! 3. that call returns exactly the given type.
//!
//! Class probes check inheritance, a data member's declared type, and a
//! method's return type for given parameter types. Every class named by a
//! probe is forward-declared after the submission so the probe compiles even
//! when the class is missing; an incomplete class fails every class probe.
//!
//! The submission is included textually with `main` renamed, so programs can
//! still be driven through standard input.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt::Write as _;

use super::{AdapterError, HarnessPlan};
use crate::question::{Compare, GradedLanguage, IntrospectionCheck, IoCall, Question, TestCase, TestPayload};
use crate::sandbox::{Phase, SandboxRequest};

pub const HARNESS_FILE: &str = "harness.cpp";
/// Name the submission's `main` is compiled under inside the harness.
pub const STUDENT_MAIN: &str = "cr_student_main";

const PRELUDE: &str = r#"// Generated grading harness.
#include <cmath>
#include <cstdio>
#include <iomanip>
#include <iostream>
#include <iterator>
#include <sstream>
#include <string>
#include <type_traits>
#include <utility>
#include <unistd.h>

namespace cr {
template <class...> struct voider { using type = void; };
template <class... T> using void_t = typename voider<T...>::type;

struct absent {};
struct void_result {};

// Makes an argument expression depend on a template parameter so lookup of
// the called name is deferred to instantiation.
template <class Tag> struct dep {
  template <class V> static V&& pass(V&& v) { return std::forward<V>(v); }
};

template <std::size_t I> struct slot {};
template <class Slot> struct any_arg {
  template <class T> operator T&() const;
};

// (call, void_result{}) yields the call's value, or void_result for void calls.
template <class T>
typename std::decay<T>::type operator,(T&& v, void_result) { return std::forward<T>(v); }

template <class T, class = void> struct is_complete : std::false_type {};
template <class T> struct is_complete<T, void_t<decltype(sizeof(T))>> : std::true_type {};

template <class D, class B, bool = is_complete<D>::value && is_complete<B>::value>
struct derives : std::false_type {};
template <class D, class B>
struct derives<D, B, true>
    : std::integral_constant<bool, std::is_base_of<B, D>::value && !std::is_same<B, D>::value> {};

struct channel {
  std::FILE* out = nullptr;
  channel() {
    std::fflush(stdout);
    int fd = dup(1);
    if (fd >= 0 && dup2(2, 1) >= 0) out = fdopen(fd, "w");
    if (!out) out = stdout;
  }
  static channel& get() {
    static channel c;
    return c;
  }
};
struct channel_opener {
  channel_opener() { channel::get(); }
};
static channel_opener open_channel_first;

inline std::string escape(const std::string& s) {
  std::string r;
  for (char c : s) {
    if (c == '\\') r += "\\\\";
    else if (c == '\n') r += "\\n";
    else if (c == '\r') r += "\\r";
    else r += c;
  }
  return r.size() > 2000 ? r.substr(0, 2000) : r;
}

inline void emit(const char* id, const char* status) {
  std::fprintf(channel::get().out, "CR|%s|%s\n", id, status);
  std::fflush(channel::get().out);
}
inline void emit(const char* id, const char* status, const std::string& detail) {
  std::fprintf(channel::get().out, "CR|%s|%s|%s\n", id, status, escape(detail).c_str());
  std::fflush(channel::get().out);
}
inline void emit_probe(const char* id, bool passed, const char* why) {
  if (passed) emit(id, "PASS");
  else emit(id, "FAIL", why);
}

template <int N> struct rank : rank<N - 1> {};
template <> struct rank<0> {};

template <class T> std::string show(const T& v);

template <class T>
auto show_impl(const T& v, rank<6>) -> typename std::enable_if<std::is_same<T, bool>::value, std::string>::type {
  return v ? "true" : "false";
}
template <class T>
auto show_impl(const T& v, rank<6>) -> typename std::enable_if<std::is_same<T, std::string>::value, std::string>::type {
  return v;
}
inline std::string show_impl(const absent&, rank<6>) { return "(no matching call)"; }
inline std::string show_impl(const void_result&, rank<6>) { return "(void)"; }
template <class T>
auto show_impl(const T& v, rank<5>) -> typename std::enable_if<std::is_floating_point<T>::value, std::string>::type {
  std::ostringstream os;
  os << std::setprecision(15) << v;
  return os.str();
}
template <class T>
auto show_impl(const T& v, rank<4>) -> decltype(std::declval<std::ostream&>() << v, std::string()) {
  std::ostringstream os;
  os << v;
  return os.str();
}
template <class T>
auto show_impl(const T& v, rank<3>) -> decltype(std::begin(v), std::end(v), std::string()) {
  std::string r = "[";
  bool first = true;
  for (const auto& item : v) {
    if (!first) r += ", ";
    r += show(item);
    first = false;
  }
  return r + "]";
}
template <class T> std::string show_impl(const T&, rank<0>) { return "(unprintable)"; }
template <class T> std::string show(const T& v) { return show_impl(v, rank<6>{}); }

template <class T>
auto as_number(const T& v, double& out, rank<1>)
    -> typename std::enable_if<std::is_arithmetic<T>::value && !std::is_same<T, bool>::value, bool>::type {
  out = static_cast<double>(v);
  return true;
}
template <class T> bool as_number(const T&, double&, rank<0>) { return false; }

inline std::string rstrip(std::string s) {
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.pop_back();
  return s;
}

inline void judge_exact(const char* id, const absent&, const std::string&) {
  emit(id, "FAIL", "the call does not match any function in the submission");
}
template <class T> void judge_exact(const char* id, const T& got, const std::string& expected) {
  std::string text = show(got);
  if (text == expected) emit(id, "PASS");
  else emit(id, "FAIL", "got=" + text);
}

inline void judge_near(const char* id, const absent&, double, double) {
  emit(id, "FAIL", "the call does not match any function in the submission");
}
template <class T> void judge_near(const char* id, const T& got, double expected, double tol) {
  double value = 0;
  if (as_number(got, value, rank<1>{}) && std::fabs(value - expected) <= tol) emit(id, "PASS");
  else emit(id, "FAIL", "got=" + show(got));
}

inline void judge_program(const char* id, const absent&, const std::string&, const std::string&, double) {
  emit(id, "FAIL", "the submission has no main() taking no arguments");
}
template <class T>
void judge_program(const char* id, const T&, const std::string& output, const std::string& expected, double tol) {
  bool ok;
  if (tol > 0) {
    std::istringstream in(output);
    double value = 0;
    ok = static_cast<bool>(in >> value) && std::fabs(value - std::stod(expected)) <= tol;
  } else {
    ok = rstrip(output) == rstrip(expected);
  }
  if (ok) emit(id, "PASS");
  else emit(id, "FAIL", "got=" + output);
}
}  // namespace cr

#define CR_MAX_ARITY 6

// Traits answering questions about a free function `fname` that may not exist.
#define CR_FUNCTION_PROBES(fname)                                                            \
  namespace cr_fn_##fname {                                                                  \
  template <class Seq, class = void> struct cr_takes : std::false_type {};                  \
  template <std::size_t... I>                                                                \
  struct cr_takes<std::index_sequence<I...>,                                                 \
                  cr::void_t<decltype(fname(cr::any_arg<cr::slot<I>>{}...))>>                \
      : std::true_type {};                                                                   \
  template <std::size_t N>                                                                   \
  struct cr_exists_upto : std::integral_constant<bool, cr_takes<std::make_index_sequence<N>>::value || \
                                                           cr_exists_upto<N - 1>::value> {};  \
  template <> struct cr_exists_upto<0> : cr_takes<std::index_sequence<>> {};                \
  constexpr bool cr_exists = cr_exists_upto<CR_MAX_ARITY>::value;                            \
  template <class Sig, class = void> struct cr_callable : std::false_type {};                \
  template <class... P>                                                                      \
  struct cr_callable<void(P...), cr::void_t<decltype(fname(std::declval<P>()...))>>         \
      : std::true_type {};                                                                   \
  template <class Sig, class R, bool = cr_callable<Sig>::value>                              \
  struct cr_returns : std::false_type {};                                                    \
  template <class R, class... P>                                                             \
  struct cr_returns<void(P...), R, true>                                                     \
      : std::is_same<decltype(fname(std::declval<P>()...)), R> {};                          \
  }
"#;

/// One introspection check to emit, keyed by the test id it reports under.
#[derive(Debug, Clone, Copy)]
pub struct ProbeSpec<'a> {
    pub test_id: &'a str,
    pub check: &'a IntrospectionCheck,
}

fn is_identifier(s: &str) -> bool {
    let mut chars = s.chars();
    matches!(chars.next(), Some(c) if c.is_ascii_alphabetic() || c == '_')
        && chars.all(|c| c.is_ascii_alphanumeric() || c == '_')
}

fn cpp_str(s: &str) -> String {
    let mut out = String::with_capacity(s.len() + 2);
    out.push('"');
    for b in s.bytes() {
        match b {
            b'\\' => out.push_str("\\\\"),
            b'"' => out.push_str("\\\""),
            b'\n' => out.push_str("\\n"),
            b'\r' => out.push_str("\\r"),
            b'\t' => out.push_str("\\t"),
            b'?' => out.push_str("\\?"),
            0x20..=0x7e => out.push(b as char),
            _ => {
                write!(out, "\\{b:03o}").unwrap();
            }
        }
    }
    out.push('"');
    out
}

fn sig(params: &[String]) -> String {
    format!("void({})", params.join(", "))
}

#[derive(Default)]
struct Builder {
    /// Probed free functions and the parameter lists probed for each.
    functions: BTreeMap<String, BTreeSet<String>>,
    classes: BTreeSet<String>,
    definitions: String,
    main_body: String,
    probe_count: usize,
}

impl Builder {
    fn require_identifier(&self, test: &str, name: &str) -> Result<(), AdapterError> {
        if is_identifier(name) {
            Ok(())
        } else {
            Err(AdapterError::InvalidIdentifier {
                test: test.to_string(),
                name: name.to_string(),
            })
        }
    }

    fn require_type(&self, test: &str, ty: &str) -> Result<(), AdapterError> {
        if ty.trim().is_empty() || ty.contains(['\n', ';', '{', '}', '#']) {
            return Err(AdapterError::InvalidType {
                test: test.to_string(),
                ty: ty.to_string(),
            });
        }
        Ok(())
    }

    fn probe(&mut self, spec: ProbeSpec<'_>) -> Result<(), AdapterError> {
        use IntrospectionCheck::*;
        let id = spec.test_id;
        let (value, why) = match spec.check {
            SymbolDefined { name } => {
                self.require_identifier(id, name)?;
                self.functions.entry(name.clone()).or_default();
                (format!("cr_fn_{name}::cr_found"), format!("{name} is not declared"))
            }
            CallableWith { name, param_types } => {
                self.require_identifier(id, name)?;
                for p in param_types {
                    self.require_type(id, p)?;
                }
                self.functions.entry(name.clone()).or_default().insert(sig(param_types));
                (
                    format!(
                        "(cr_fn_{name}::cr_found && cr_fn_{name}::cr_callable<{}>::value)",
                        sig(param_types)
                    ),
                    format!("{name} cannot be called with ({})", param_types.join(", ")),
                )
            }
            ReturnsTypeCpp {
                name,
                param_types,
                return_type,
            } => {
                self.require_identifier(id, name)?;
                for p in param_types.iter().chain([return_type]) {
                    self.require_type(id, p)?;
                }
                self.functions.entry(name.clone()).or_default().insert(sig(param_types));
                (
                    format!(
                        "(cr_fn_{name}::cr_found && cr_fn_{name}::cr_returns<{}, {return_type}>::value)",
                        sig(param_types)
                    ),
                    format!("{name}({}) does not return {return_type}", param_types.join(", ")),
                )
            }
            DerivesFrom { class_name, base } => {
                self.require_identifier(id, class_name)?;
                self.require_identifier(id, base)?;
                self.classes.insert(class_name.clone());
                self.classes.insert(base.clone());
                (
                    format!("cr::derives<{class_name}, {base}>::value"),
                    format!("{class_name} does not derive from {base}"),
                )
            }
            HasAttribute {
                class_name,
                attr,
                type_name,
            } => {
                self.require_identifier(id, class_name)?;
                self.require_identifier(id, attr)?;
                self.require_type(id, type_name)?;
                self.classes.insert(class_name.clone());
                let ns = self.next_probe_namespace();
                let member = format!("std::declval<T&>().{attr}");
                writeln!(
                    self.definitions,
                    "namespace {ns} {{\n\
                     template <class T, class = void> struct check : std::false_type {{}};\n\
                     template <class T> struct check<T, cr::void_t<decltype({member})>>\n    \
                     : std::is_same<decltype({member}), {type_name}> {{}};\n\
                     }}"
                )
                .unwrap();
                (
                    format!("(cr::is_complete<{class_name}>::value && {ns}::check<{class_name}>::value)"),
                    format!("{class_name} has no accessible attribute {attr} of type {type_name}"),
                )
            }
            HasMethod {
                class_name,
                method,
                param_types,
                return_type,
            } => {
                self.require_identifier(id, class_name)?;
                self.require_identifier(id, method)?;
                for p in param_types.iter().chain([return_type]) {
                    self.require_type(id, p)?;
                }
                self.classes.insert(class_name.clone());
                let ns = self.next_probe_namespace();
                let args: Vec<String> = param_types.iter().map(|p| format!("std::declval<{p}>()")).collect();
                let call = format!("std::declval<T&>().{method}({})", args.join(", "));
                writeln!(
                    self.definitions,
                    "namespace {ns} {{\n\
                     template <class T, class = void> struct check : std::false_type {{}};\n\
                     template <class T> struct check<T, cr::void_t<decltype({call})>>\n    \
                     : std::is_same<decltype({call}), {return_type}> {{}};\n\
                     }}"
                )
                .unwrap();
                (
                    format!("(cr::is_complete<{class_name}>::value && {ns}::check<{class_name}>::value)"),
                    format!(
                        "{class_name} has no accessible method {method}({}) returning {return_type}",
                        param_types.join(", ")
                    ),
                )
            }
            Arity { .. } | ReturnType { .. } => {
                return Err(AdapterError::UnsupportedProbe {
                    test: id.to_string(),
                    probe: spec.check.probe_name(),
                    language: GradedLanguage::Cpp14,
                })
            }
        };
        writeln!(
            self.main_body,
            "  cr::emit_probe({}, {value}, {});",
            cpp_str(id),
            cpp_str(&why)
        )
        .unwrap();
        Ok(())
    }

    fn next_probe_namespace(&mut self) -> String {
        self.probe_count += 1;
        format!("cr_probe_{}", self.probe_count)
    }

    /// A struct whose `call<void>(0)` performs the call when it is well formed
    /// and returns `cr::absent` otherwise.
    fn guarded_call(&mut self, target: &str, args: &[String]) -> String {
        let ns = self.next_probe_namespace();
        let mut dep_args: Vec<String> = args.iter().map(|a| format!("cr::dep<D>::pass({a})")).collect();
        dep_args.push("Pad{}...".to_string());
        let call = format!("({target}({}), cr::void_result{{}})", dep_args.join(", "));
        writeln!(
            self.definitions,
            "struct {ns} {{\n  \
             template <class D, class... Pad> static auto call(int) -> decltype({call}) {{ return {call}; }}\n  \
             template <class D> static cr::absent call(...) {{ return {{}}; }}\n\
             }};"
        )
        .unwrap();
        ns
    }

    fn io(&mut self, t: &TestCase, io: &crate::question::IoTest) -> Result<(), AdapterError> {
        let id = cpp_str(&t.id);
        let tol = match io.compare {
            Compare::NumericTolerance { tol } => Some(tol),
            Compare::ExactText => None,
        };
        match &io.call {
            IoCall::Function { function, args } => {
                self.require_identifier(&t.id, function)?;
                let ns = self.guarded_call(function, args);
                let judge = match tol {
                    Some(tol) => format!(
                        "cr::judge_near({id}, got, {:?}, {tol:?})",
                        expected_number(t, &io.expected)?
                    ),
                    None => format!("cr::judge_exact({id}, got, {})", cpp_str(&io.expected)),
                };
                writeln!(
                    self.main_body,
                    "  {{\n    auto got = {ns}::call<void>(0);\n    {judge};\n  }}"
                )
                .unwrap();
            }
            IoCall::Stdin(text) => {
                let ns = self.guarded_call(STUDENT_MAIN, &[]);
                let tol = match tol {
                    Some(tol) => {
                        expected_number(t, &io.expected)?;
                        tol
                    }
                    None => 0.0,
                };
                writeln!(
                    self.main_body,
                    "  {{\n    \
                     std::istringstream cr_in({});\n    \
                     std::ostringstream cr_out;\n    \
                     std::cin.clear();\n    \
                     auto* cr_saved_in = std::cin.rdbuf(cr_in.rdbuf());\n    \
                     auto* cr_saved_out = std::cout.rdbuf(cr_out.rdbuf());\n    \
                     auto ran = {ns}::call<void>(0);\n    \
                     std::cout.rdbuf(cr_saved_out);\n    \
                     std::cin.rdbuf(cr_saved_in);\n    \
                     cr::judge_program({id}, ran, cr_out.str(), {}, {tol:?});\n  \
                     }}",
                    cpp_str(text),
                    cpp_str(&io.expected)
                )
                .unwrap();
            }
        }
        Ok(())
    }

    fn finish(self, student_file: &str) -> String {
        let mut out = String::from(PRELUDE);
        writeln!(
            out,
            "\n#define main {STUDENT_MAIN}\n#include {}\n#undef main\n",
            cpp_str(student_file)
        )
        .unwrap();
        // A macro sharing a probed name would otherwise rewrite the probes.
        for name in self.functions.keys().chain(&self.classes) {
            writeln!(out, "#ifdef {name}\n#undef {name}\n#endif").unwrap();
        }
        for class in &self.classes {
            writeln!(out, "class {class};").unwrap();
        }
        for (f, signatures) in &self.functions {
            // An overload set makes the any-argument probe ambiguous, so a
            // name also counts as found when any probed signature is callable.
            let mut found = vec!["cr_exists".to_string()];
            found.extend(signatures.iter().map(|s| format!("cr_callable<{s}>::value")));
            writeln!(
                out,
                "CR_FUNCTION_PROBES({f})\nnamespace cr_fn_{f} {{\nconstexpr bool cr_found = {};\n}}",
                found.join(" || ")
            )
            .unwrap();
        }
        out.push_str(&self.definitions);
        out.push_str("\nint main() {\n");
        out.push_str(&self.main_body);
        out.push_str("  std::fflush(cr::channel::get().out);\n  return 0;\n}\n");
        out
    }
}

fn expected_number(t: &TestCase, expected: &str) -> Result<f64, AdapterError> {
    expected.trim().parse::<f64>().map_err(|_| AdapterError::InvalidType {
        test: t.id.clone(),
        ty: expected.to_string(),
    })
}

/// A self-contained probe unit that includes `student.cpp` and prints one
/// protocol line per check.
pub fn generate_cpp_probe_source(checks: &[ProbeSpec<'_>]) -> Result<String, AdapterError> {
    let mut b = Builder::default();
    for spec in checks {
        b.probe(*spec)?;
    }
    Ok(b.finish(GradedLanguage::Cpp14.student_file()))
}

/// Harness source covering probes and io tests in the given order.
pub fn cpp_harness_source(tests: &[&TestCase]) -> Result<String, AdapterError> {
    let mut b = Builder::default();
    for t in tests {
        match &t.payload {
            TestPayload::Heuristic(_) => {}
            TestPayload::Introspection(check) => b.probe(ProbeSpec { test_id: &t.id, check })?,
            TestPayload::Io(io) => b.io(t, io)?,
        }
    }
    Ok(b.finish(GradedLanguage::Cpp14.student_file()))
}

pub fn generate_cpp_harness(q: &Question, code: &str, tests: &[&TestCase]) -> Result<HarnessPlan, AdapterError> {
    if q.language != GradedLanguage::Cpp14 {
        return Err(AdapterError::WrongLanguage {
            expected: GradedLanguage::Cpp14,
            got: q.language,
        });
    }
    let student = GradedLanguage::Cpp14.student_file().to_string();
    let harness = cpp_harness_source(tests)?;
    let requests = vec![
        SandboxRequest {
            language: GradedLanguage::Cpp14,
            files: BTreeMap::from([(student.clone(), code.to_string())]),
            phase: Phase::SyntaxCheck,
            entry: student,
            limits: q.limits,
        },
        SandboxRequest {
            language: GradedLanguage::Cpp14,
            files: BTreeMap::from([(HARNESS_FILE.to_string(), harness)]),
            phase: Phase::Compile,
            entry: HARNESS_FILE.to_string(),
            limits: q.limits,
        },
        SandboxRequest {
            language: GradedLanguage::Cpp14,
            files: BTreeMap::new(),
            phase: Phase::Run,
            entry: HARNESS_FILE.to_string(),
            limits: q.limits,
        },
    ];
    Ok(HarnessPlan {
        requests,
        protocol_tests: tests
            .iter()
            .filter(|t| !matches!(t.payload, TestPayload::Heuristic(_)))
            .map(|t| t.id.clone())
            .collect(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn identifiers() {
        assert!(is_identifier("doubler"));
        assert!(is_identifier("_x1"));
        assert!(!is_identifier("1x"));
        assert!(!is_identifier("a b"));
        assert!(!is_identifier(""));
        assert!(!is_identifier("std::max"));
    }

    #[test]
    fn string_literals_escape_everything_odd() {
        assert_eq!(cpp_str("a\"b\\c\n"), r#""a\"b\\c\n""#);
        assert_eq!(cpp_str("é"), r#""\303\251""#);
        assert_eq!(cpp_str("??="), r#""\?\?=""#);
    }

    #[test]
    fn probe_source_has_ladder_and_no_direct_call() {
        let exists = IntrospectionCheck::SymbolDefined { name: "doubler".into() };
        let callable = IntrospectionCheck::CallableWith {
            name: "doubler".into(),
            param_types: vec!["int".into()],
        };
        let src = generate_cpp_probe_source(&[
            ProbeSpec {
                test_id: "t1",
                check: &exists,
            },
            ProbeSpec {
                test_id: "t2",
                check: &callable,
            },
        ])
        .unwrap();
        assert_eq!(src.matches("CR_FUNCTION_PROBES(doubler)").count(), 1);
        assert!(src.contains("cr_fn_doubler::cr_found && cr_fn_doubler::cr_callable<void(int)>::value"));
        assert!(src.contains("constexpr bool cr_found = cr_exists || cr_callable<void(int)>::value;"));
        assert!(src.contains("#include \"student.cpp\""));
    }

    #[test]
    fn python_only_probe_rejected() {
        let arity = IntrospectionCheck::Arity { name: "f".into(), n: 1 };
        let err = generate_cpp_probe_source(&[ProbeSpec {
            test_id: "t",
            check: &arity,
        }])
        .unwrap_err();
        assert!(matches!(err, AdapterError::UnsupportedProbe { probe: "arity", .. }));
    }

    #[test]
    fn bad_names_rejected() {
        let c = IntrospectionCheck::SymbolDefined { name: "a;b".into() };
        assert!(matches!(
            generate_cpp_probe_source(&[ProbeSpec {
                test_id: "t",
                check: &c
            }]),
            Err(AdapterError::InvalidIdentifier { .. })
        ));
    }
}
