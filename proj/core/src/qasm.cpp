#include "qcut/qasm.hpp"

#include <cctype>
#include <charconv>
#include <cstdio>
#include <numbers>
#include <optional>
#include <sstream>
#include <vector>

#include "qcut/error.hpp"

namespace qcut {

namespace {

struct Statement {
  std::string text;
  std::size_t line;
};

[[noreturn]] void parse_fail(std::size_t line, const std::string& what) {
  fail(ErrorKind::Parse, "line " + std::to_string(line) + ": " + what);
}

// Splits source text into ';'-terminated statements, tracking line numbers
// and dropping // comments.
std::vector<Statement> split_statements(const std::string& text) {
  std::vector<Statement> out;
  std::string current;
  std::size_t line = 1;
  std::size_t start_line = 1;
  for (std::size_t i = 0; i < text.size(); ++i) {
    const char c = text[i];
    if (c == '/' && i + 1 < text.size() && text[i + 1] == '/') {
      while (i < text.size() && text[i] != '\n') ++i;
      --i;
      continue;
    }
    if (c == '\n') {
      ++line;
      if (current.empty()) start_line = line;
      continue;
    }
    if (c == ';') {
      out.push_back({current, start_line});
      current.clear();
      start_line = line;
      continue;
    }
    if (current.empty() && std::isspace(static_cast<unsigned char>(c))) {
      start_line = line;
      continue;
    }
    current.push_back(c);
  }
  for (char c : current)
    if (!std::isspace(static_cast<unsigned char>(c)))
      parse_fail(start_line, "unterminated statement");
  return out;
}

std::string strip(const std::string& s) {
  std::size_t b = 0;
  std::size_t e = s.size();
  while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
  while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
  return s.substr(b, e - b);
}

bool starts_with(const std::string& s, const char* prefix) {
  return s.rfind(prefix, 0) == 0;
}

long parse_integer(const std::string& s, std::size_t line) {
  long value = 0;
  const auto [ptr, ec] =
      std::from_chars(s.data(), s.data() + s.size(), value);
  if (ec != std::errc{} || ptr != s.data() + s.size())
    parse_fail(line, "expected integer, got '" + s + "'");
  return value;
}

// Angle expression: decimal literal, or [k*]pi[/m], optionally negated.
double parse_angle(std::string expr, std::size_t line) {
  expr = strip(expr);
  if (expr.empty()) parse_fail(line, "empty angle expression");
  double sign = 1.0;
  if (expr[0] == '-' || expr[0] == '+') {
    if (expr[0] == '-') sign = -1.0;
    expr = strip(expr.substr(1));
  }
  const std::size_t pi_pos = expr.find("pi");
  if (pi_pos != std::string::npos) {
    double mult = 1.0;
    if (pi_pos > 0) {
      std::string head = strip(expr.substr(0, pi_pos));
      if (head.empty() || head.back() != '*')
        parse_fail(line, "malformed pi expression '" + expr + "'");
      head = strip(head.substr(0, head.size() - 1));
      mult = static_cast<double>(parse_integer(head, line));
    }
    double div = 1.0;
    std::string tail = strip(expr.substr(pi_pos + 2));
    if (!tail.empty()) {
      if (tail[0] != '/')
        parse_fail(line, "malformed pi expression '" + expr + "'");
      tail = strip(tail.substr(1));
      div = static_cast<double>(parse_integer(tail, line));
      if (div == 0.0) parse_fail(line, "division by zero in angle");
    }
    return sign * mult * std::numbers::pi / div;
  }
  double value = 0.0;
  const auto [ptr, ec] =
      std::from_chars(expr.data(), expr.data() + expr.size(), value);
  if (ec != std::errc{} || ptr != expr.data() + expr.size())
    parse_fail(line, "bad angle literal '" + expr + "'");
  return sign * value;
}

// Operand of the form q[i].
std::size_t parse_operand(const std::string& token, std::size_t line,
                          std::size_t wire_count) {
  const std::string t = strip(token);
  if (t.size() < 4 || t[0] != 'q' || t[1] != '[' || t.back() != ']')
    parse_fail(line, "expected operand of the form q[i], got '" + t + "'");
  const long idx = parse_integer(t.substr(2, t.size() - 3), line);
  if (idx < 0 || static_cast<std::size_t>(idx) >= wire_count)
    fail(ErrorKind::Validation,
         "line " + std::to_string(line) + ": wire index " +
             std::to_string(idx) + " outside register of size " +
             std::to_string(wire_count));
  return static_cast<std::size_t>(idx);
}

std::vector<std::string> split_on_comma(const std::string& s) {
  std::vector<std::string> parts;
  std::string cur;
  for (char c : s) {
    if (c == ',') {
      parts.push_back(cur);
      cur.clear();
    } else {
      cur.push_back(c);
    }
  }
  parts.push_back(cur);
  return parts;
}

}  // namespace

Circuit parse_qasm_subset(const std::string& text) {
  Circuit circuit;
  bool have_qreg = false;

  for (const Statement& st : split_statements(text)) {
    const std::string body = strip(st.text);
    if (body.empty()) continue;
    if (starts_with(body, "OPENQASM") || starts_with(body, "include")) continue;

    if (starts_with(body, "qreg")) {
      if (have_qreg) parse_fail(st.line, "duplicate qreg declaration");
      const std::string rest = strip(body.substr(4));
      if (rest.size() < 4 || rest[0] != 'q' || rest[1] != '[' ||
          rest.back() != ']')
        parse_fail(st.line, "malformed qreg declaration");
      const long n = parse_integer(rest.substr(2, rest.size() - 3), st.line);
      if (n <= 0) parse_fail(st.line, "register size must be positive");
      if (static_cast<std::size_t>(n) > kMaxWires)
        fail(ErrorKind::Capacity,
             "line " + std::to_string(st.line) + ": register size " +
                 std::to_string(n) + " exceeds supported maximum " +
                 std::to_string(kMaxWires));
      circuit.wire_count = static_cast<std::size_t>(n);
      have_qreg = true;
      continue;
    }

    if (!have_qreg) parse_fail(st.line, "gate before qreg declaration");

    // Gate name runs up to the first '(' or whitespace.
    std::size_t name_end = 0;
    while (name_end < body.size() && body[name_end] != '(' &&
           !std::isspace(static_cast<unsigned char>(body[name_end])))
      ++name_end;
    const std::string name = body.substr(0, name_end);
    std::string rest = body.substr(name_end);

    double angle = 0.0;
    bool has_angle = false;
    std::string t = strip(rest);
    if (!t.empty() && t[0] == '(') {
      const std::size_t close = t.find(')');
      if (close == std::string::npos) parse_fail(st.line, "missing ')'");
      angle = parse_angle(t.substr(1, close - 1), st.line);
      has_angle = true;
      t = strip(t.substr(close + 1));
    }
    const std::vector<std::string> operands = split_on_comma(t);

    auto expect_operands = [&](std::size_t n) {
      if (operands.size() != n || strip(operands[0]).empty())
        parse_fail(st.line, "gate '" + name + "' expects " +
                                std::to_string(n) + " operand(s)");
    };
    auto expect_angle = [&](bool needed) {
      if (needed != has_angle)
        parse_fail(st.line, needed
                                ? "gate '" + name + "' needs an angle"
                                : "gate '" + name + "' takes no angle");
    };

    if (name == "h" || name == "x") {
      expect_angle(false);
      expect_operands(1);
      const std::size_t w = parse_operand(operands[0], st.line, circuit.wire_count);
      circuit.gates.push_back(name == "h" ? Gate::h(w) : Gate::x(w));
    } else if (name == "rx" || name == "ry" || name == "rz") {
      expect_angle(true);
      expect_operands(1);
      const std::size_t w = parse_operand(operands[0], st.line, circuit.wire_count);
      if (name == "rx") circuit.gates.push_back(Gate::rx(angle, w));
      if (name == "ry") circuit.gates.push_back(Gate::ry(angle, w));
      if (name == "rz") circuit.gates.push_back(Gate::rz(angle, w));
    } else if (name == "cz" || name == "cx") {
      expect_angle(false);
      expect_operands(2);
      const std::size_t a = parse_operand(operands[0], st.line, circuit.wire_count);
      const std::size_t b = parse_operand(operands[1], st.line, circuit.wire_count);
      if (a == b)
        fail(ErrorKind::Validation, "line " + std::to_string(st.line) +
                                        ": duplicate operand wire");
      circuit.gates.push_back(name == "cz" ? Gate::cz(a, b) : Gate::cnot(a, b));
    } else {
      parse_fail(st.line, "unknown statement '" + name + "'");
    }
  }

  if (!have_qreg) fail(ErrorKind::Parse, "missing qreg declaration");
  circuit.observable = Observable::all_z(circuit.wire_count);
  validate(circuit);
  return circuit;
}

std::string emit_qasm(const Circuit& circuit) {
  validate(circuit);
  std::ostringstream out;
  out << "OPENQASM 2.0;\n";
  out << "include \"qelib1.inc\";\n";
  out << "qreg q[" << circuit.wire_count << "];\n";
  char buf[64];
  for (const Gate& g : circuit.gates) {
    out << to_string(g.kind);
    if (gate_is_rotation(g.kind)) {
      std::snprintf(buf, sizeof buf, "%.17g", g.angle);
      out << '(' << buf << ')';
    }
    out << " q[" << g.wires[0] << ']';
    if (g.wires.size() == 2) out << ",q[" << g.wires[1] << ']';
    out << ";\n";
  }
  return out.str();
}

}  // namespace qcut
