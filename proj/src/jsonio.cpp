#include "advq/jsonio.hpp"

#include "advq/error.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>

namespace advq::jsonio {

Value& Value::set(const std::string& key, Value val) {
  if (!std::holds_alternative<Object>(v_))
    throw Error(Error::Kind::Usage, "jsonio", "set() on non-object");
  std::get<Object>(v_).emplace_back(key, std::move(val));
  return *this;
}

Value& Value::push(Value val) {
  if (!std::holds_alternative<Array>(v_))
    throw Error(Error::Kind::Usage, "jsonio", "push() on non-array");
  std::get<Array>(v_).push_back(std::move(val));
  return *this;
}

std::string format_double(double d) {
  if (std::isnan(d)) return "null";
  if (std::isinf(d)) return d > 0 ? "1e999" : "-1e999";
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", d);
  std::string s(buf);
  // Keep a numeric token recognizable as floating point.
  if (s.find_first_of(".eE") == std::string::npos) s += ".0";
  return s;
}

namespace {

void write_escaped(std::string& out, const std::string& s) {
  out += '"';
  for (char c : s) {
    switch (c) {
      case '"': out += "\\\""; break;
      case '\\': out += "\\\\"; break;
      case '\n': out += "\\n"; break;
      case '\t': out += "\\t"; break;
      case '\r': out += "\\r"; break;
      default:
        if (static_cast<unsigned char>(c) < 0x20) {
          char buf[8];
          std::snprintf(buf, sizeof(buf), "\\u%04x", c);
          out += buf;
        } else {
          out += c;
        }
    }
  }
  out += '"';
}

void newline_indent(std::string& out, int indent, int depth) {
  if (indent <= 0) return;
  out += '\n';
  out.append(static_cast<std::size_t>(indent) * depth, ' ');
}

} // namespace

void Value::write(std::string& out, int indent, int depth) const {
  if (std::holds_alternative<std::nullptr_t>(v_)) {
    out += "null";
  } else if (std::holds_alternative<bool>(v_)) {
    out += std::get<bool>(v_) ? "true" : "false";
  } else if (std::holds_alternative<double>(v_)) {
    out += format_double(std::get<double>(v_));
  } else if (std::holds_alternative<std::int64_t>(v_)) {
    out += std::to_string(std::get<std::int64_t>(v_));
  } else if (std::holds_alternative<std::string>(v_)) {
    write_escaped(out, std::get<std::string>(v_));
  } else if (std::holds_alternative<Array>(v_)) {
    const Array& a = std::get<Array>(v_);
    if (a.empty()) {
      out += "[]";
      return;
    }
    out += '[';
    for (std::size_t i = 0; i < a.size(); ++i) {
      if (i) out += ',';
      newline_indent(out, indent, depth + 1);
      a[i].write(out, indent, depth + 1);
    }
    newline_indent(out, indent, depth);
    out += ']';
  } else {
    const Object& o = std::get<Object>(v_);
    if (o.empty()) {
      out += "{}";
      return;
    }
    out += '{';
    for (std::size_t i = 0; i < o.size(); ++i) {
      if (i) out += ',';
      newline_indent(out, indent, depth + 1);
      write_escaped(out, o[i].first);
      out += indent > 0 ? ": " : ":";
      o[i].second.write(out, indent, depth + 1);
    }
    newline_indent(out, indent, depth);
    out += '}';
  }
}

std::string Value::dump(int indent) const {
  std::string out;
  write(out, indent, 0);
  out += '\n';
  return out;
}

void write_file(const std::string& path, const Value& v) {
  std::ofstream f(path, std::ios::binary);
  if (!f)
    throw Error(Error::Kind::Usage, "jsonio", "cannot open for write: " + path);
  const std::string s = v.dump();
  f.write(s.data(), static_cast<std::streamsize>(s.size()));
  if (!f)
    throw Error(Error::Kind::Usage, "jsonio", "write failed: " + path);
}

} // namespace advq::jsonio
