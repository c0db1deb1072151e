#include "advq/boolfn.hpp"

#include "advq/error.hpp"
#include "advq/jsonio.hpp"

#include <json.hpp>

#include <algorithm>
#include <fstream>

namespace advq::boolfn {

using nlohmann::json;

BooleanFunction BooleanFunction::fromEntries(
    int n, const std::vector<std::pair<std::string, int>>& entries) {
  if (n < 0 || n > 20)
    throw Error(Error::Kind::Validation, "boolfn",
                "n out of range: " + std::to_string(n));
  BooleanFunction f;
  f.n_ = n;
  for (const auto& [x, v] : entries) {
    if (static_cast<int>(x.size()) != n)
      throw Error(Error::Kind::Validation, "boolfn",
                  "entry '" + x + "' does not have " + std::to_string(n) +
                      " bits");
    if (x.find_first_not_of("01") != std::string::npos)
      throw Error(Error::Kind::Validation, "boolfn",
                  "entry '" + x + "' contains a non-bit character");
    if (v != 0 && v != 1)
      throw Error(Error::Kind::Validation, "boolfn",
                  "value for '" + x + "' must be 0 or 1");
    if (f.index_.count(x))
      throw Error(Error::Kind::Validation, "boolfn",
                  "duplicate domain entry '" + x + "'");
    f.index_.emplace(x, f.domain_.size());
    f.domain_.push_back(x);
    f.values_.push_back(v);
  }
  return f;
}

bool BooleanFunction::contains(const std::string& x) const {
  return index_.count(x) > 0;
}

int BooleanFunction::value(const std::string& x) const {
  auto it = index_.find(x);
  if (it == index_.end())
    throw Error(Error::Kind::Domain, "boolfn", "input '" + x + "' not in D");
  return values_[it->second];
}

std::optional<int> BooleanFunction::tryValue(const std::string& x) const {
  auto it = index_.find(x);
  if (it == index_.end()) return std::nullopt;
  return values_[it->second];
}

std::size_t BooleanFunction::domainIndex(const std::string& x) const {
  auto it = index_.find(x);
  if (it == index_.end())
    throw Error(Error::Kind::Domain, "boolfn", "input '" + x + "' not in D");
  return it->second;
}

bool BooleanFunction::isTotal() const {
  return domain_.size() == (std::size_t(1) << n_);
}

bool BooleanFunction::isConstant() const {
  if (domain_.empty()) return true;
  return std::all_of(values_.begin(), values_.end(),
                     [&](int v) { return v == values_[0]; });
}

BooleanFunction load(const std::string& path) {
  std::ifstream in(path);
  if (!in)
    throw Error(Error::Kind::Parse, "boolfn", "cannot open file: " + path);
  json j;
  try {
    in >> j;
  } catch (const json::exception& e) {
    throw Error(Error::Kind::Parse, "boolfn",
                "malformed JSON in " + path + ": " + e.what());
  }
  if (!j.is_object() || !j.contains("n") || !j.contains("entries") ||
      !j["n"].is_number_integer() || !j["entries"].is_array())
    throw Error(Error::Kind::Parse, "boolfn",
                "expected {\"n\": int, \"entries\": [...]} in " + path);
  std::vector<std::pair<std::string, int>> entries;
  for (const auto& e : j["entries"]) {
    if (!e.is_object() || !e.contains("x") || !e.contains("f") ||
        !e["x"].is_string() || !e["f"].is_number_integer())
      throw Error(Error::Kind::Parse, "boolfn",
                  "entry must be {\"x\": string, \"f\": 0|1} in " + path);
    entries.emplace_back(e["x"].get<std::string>(), e["f"].get<int>());
  }
  return BooleanFunction::fromEntries(j["n"].get<int>(), entries);
}

void save(const BooleanFunction& f, const std::string& path) {
  jsonio::Value doc = jsonio::Value::object();
  doc.set("n", f.n());
  jsonio::Value entries = jsonio::Value::array();
  for (const auto& x : f.domain()) {
    jsonio::Value e = jsonio::Value::object();
    e.set("x", x);
    e.set("f", f.value(x));
    entries.push(std::move(e));
  }
  doc.set("entries", std::move(entries));
  jsonio::write_file(path, doc);
}

std::pair<std::vector<std::string>, std::vector<std::string>> partition(
    const BooleanFunction& f) {
  std::vector<std::string> f0, f1;
  for (const auto& x : f.domain()) (f.value(x) ? f1 : f0).push_back(x);
  return {f0, f1};
}

BooleanFunction compose(const BooleanFunction& f, const BooleanFunction& g,
                        int bitCap) {
  if (!f.isTotal() || !g.isTotal())
    throw Error(Error::Kind::Validation, "boolfn",
                "compose requires total functions on their cubes");
  const long long bits = 1LL * f.n() * g.n();
  if (bits > bitCap)
    throw Error(Error::Kind::Validation, "boolfn",
                "compose dimension " + std::to_string(bits) +
                    " exceeds cap " + std::to_string(bitCap));
  const int n = f.n(), m = g.n();
  std::vector<std::pair<std::string, int>> entries;
  for (const auto& x : allBitstrings(n * m)) {
    std::string inner(n, '0');
    for (int i = 0; i < n; ++i)
      inner[i] = char('0' + g.value(x.substr(std::size_t(i) * m, m)));
    entries.emplace_back(x, f.value(inner));
  }
  return BooleanFunction::fromEntries(n * m, entries);
}

std::vector<std::string> allBitstrings(int n) {
  std::vector<std::string> out;
  out.reserve(std::size_t(1) << n);
  for (std::size_t v = 0; v < (std::size_t(1) << n); ++v) {
    std::string s(n, '0');
    for (int j = 0; j < n; ++j)
      if (v & (std::size_t(1) << (n - 1 - j))) s[j] = '1';
    out.push_back(s);
  }
  return out;
}

namespace {
BooleanFunction totalFromRule(int n, int (*rule)(const std::string&)) {
  std::vector<std::pair<std::string, int>> entries;
  for (const auto& x : allBitstrings(n)) entries.emplace_back(x, rule(x));
  return BooleanFunction::fromEntries(n, entries);
}
} // namespace

BooleanFunction ident1() {
  return totalFromRule(1, [](const std::string& x) { return x[0] == '1' ? 1 : 0; });
}

BooleanFunction orN(int n) {
  return totalFromRule(n, [](const std::string& x) {
    return x.find('1') != std::string::npos ? 1 : 0;
  });
}

BooleanFunction andN(int n) {
  return totalFromRule(n, [](const std::string& x) {
    return x.find('0') == std::string::npos ? 1 : 0;
  });
}

BooleanFunction parityN(int n) {
  return totalFromRule(n, [](const std::string& x) {
    return int(std::count(x.begin(), x.end(), '1')) & 1;
  });
}

BooleanFunction maj3() {
  return totalFromRule(3, [](const std::string& x) {
    return std::count(x.begin(), x.end(), '1') >= 2 ? 1 : 0;
  });
}

} // namespace advq::boolfn
