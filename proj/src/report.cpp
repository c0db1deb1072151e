#include "advq/report.hpp"

namespace advq::report {

void GapReport::finalize() {
  pass = true;
  for (const auto& r : rows) pass = pass && r.pass;
}

jsonio::Value toJson(const GapReport& r) {
  jsonio::Value doc = jsonio::Value::object();
  doc.set("name", r.name);
  if (!r.input.empty()) doc.set("input", r.input);
  doc.set("direction",
          r.direction == GapReport::Direction::Upper ? "upper" : "lower");
  doc.set("W", r.W);
  jsonio::Value rows = jsonio::Value::array();
  for (const auto& row : r.rows) {
    jsonio::Value v = jsonio::Value::object();
    v.set("parameter", row.parameter);
    v.set("measured", row.measured);
    v.set("bound", row.bound);
    v.set("pass", row.pass);
    rows.push(std::move(v));
  }
  doc.set("rows", std::move(rows));
  doc.set("pass", r.pass);
  return doc;
}

} // namespace advq::report
