#pragma once

#include <cstdint>
#include <memory>
#include <string>
#include <utility>
#include <variant>
#include <vector>

// Output-side JSON with insertion-ordered object keys and floats printed
// with 17 significant digits, so identical runs produce identical bytes.
// Input files are parsed with nlohmann::json elsewhere.

namespace advq::jsonio {

class Value;
using Array = std::vector<Value>;
using Object = std::vector<std::pair<std::string, Value>>;

class Value {
 public:
  Value() : v_(nullptr) {}
  Value(std::nullptr_t) : v_(nullptr) {}
  Value(bool b) : v_(b) {}
  Value(double d) : v_(d) {}
  Value(int i) : v_(static_cast<std::int64_t>(i)) {}
  Value(long i) : v_(static_cast<std::int64_t>(i)) {}
  Value(long long i) : v_(static_cast<std::int64_t>(i)) {}
  Value(unsigned long i) : v_(static_cast<std::int64_t>(i)) {}
  Value(const char* s) : v_(std::string(s)) {}
  Value(std::string s) : v_(std::move(s)) {}
  Value(Array a) : v_(std::move(a)) {}
  Value(Object o) : v_(std::move(o)) {}

  static Value object() { return Value(Object{}); }
  static Value array() { return Value(Array{}); }

  // Object append; keys are emitted in insertion order.
  Value& set(const std::string& key, Value val);
  // Array append.
  Value& push(Value val);

  std::string dump(int indent = 2) const;

 private:
  std::variant<std::nullptr_t, bool, double, std::int64_t, std::string, Array,
               Object>
      v_;

  void write(std::string& out, int indent, int depth) const;
};

std::string format_double(double d);
void write_file(const std::string& path, const Value& v);

} // namespace advq::jsonio
