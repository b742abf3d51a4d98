#include <algorithm>
#include <cmath>
#include <cstdio>
#include <sstream>

#include <json.hpp>

#include "monolab/detail/overloaded.hpp"
#include "monolab/harness.hpp"

namespace monolab {

namespace {

using ojson = nlohmann::ordered_json;
using detail::overloaded;

ojson number_json(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  return v;
}

ojson field_json(const Field& f) {
  return std::visit(overloaded{
                        [](std::monostate) { return ojson(nullptr); },
                        [](bool b) { return ojson(b); },
                        [](std::int64_t i) { return ojson(i); },
                        [](double d) { return number_json(d); },
                        [](const std::string& s) { return ojson(s); },
                        [](const std::vector<double>& v) {
                          ojson a = ojson::array();
                          for (double d : v) a.push_back(number_json(d));
                          return a;
                        },
                    },
                    f);
}

std::string fmt(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::string csv_cell(const Field& f) {
  return std::visit(overloaded{
                        [](std::monostate) { return std::string(); },
                        [](bool b) { return std::string(b ? "true" : "false"); },
                        [](std::int64_t i) { return std::to_string(i); },
                        [](double d) { return fmt(d); },
                        [](const std::string& s) {
                          if (s.find_first_of(",\"\n") == std::string::npos) return s;
                          std::string q = "\"";
                          for (char c : s) {
                            if (c == '"') q += '"';
                            q += c;
                          }
                          return q + "\"";
                        },
                        [](const std::vector<double>& v) {
                          std::string out;
                          for (std::size_t i = 0; i < v.size(); ++i) {
                            if (i) out += ';';
                            out += fmt(v[i]);
                          }
                          return out;
                        },
                    },
                    f);
}

}  // namespace

Record& Record::set(std::string key, Field value) {
  for (auto& [k, v] : fields) {
    if (k == key) {
      v = std::move(value);
      return *this;
    }
  }
  fields.emplace_back(std::move(key), std::move(value));
  return *this;
}

const Field* Record::find(const std::string& key) const {
  for (const auto& [k, v] : fields) {
    if (k == key) return &v;
  }
  return nullptr;
}

double Record::number(const std::string& key) const {
  const Field* f = find(key);
  if (!f) throw std::out_of_range("record has no field '" + key + "'");
  if (const auto* d = std::get_if<double>(f)) return *d;
  if (const auto* i = std::get_if<std::int64_t>(f)) return static_cast<double>(*i);
  if (const auto* b = std::get_if<bool>(f)) return *b ? 1.0 : 0.0;
  throw std::out_of_range("field '" + key + "' is not numeric");
}

std::string Record::text(const std::string& key) const {
  const Field* f = find(key);
  if (!f) throw std::out_of_range("record has no field '" + key + "'");
  if (const auto* s = std::get_if<std::string>(f)) return *s;
  return csv_cell(*f);
}

bool Record::flag(const std::string& key) const {
  const Field* f = find(key);
  if (!f) throw std::out_of_range("record has no field '" + key + "'");
  if (const auto* b = std::get_if<bool>(f)) return *b;
  throw std::out_of_range("field '" + key + "' is not a flag");
}

std::string Report::to_json(bool with_timings) const {
  ojson doc;
  doc["schema"] = 1;
  ojson tasks_json = ojson::array();
  for (std::size_t i = 0; i < tasks.size(); ++i) {
    const auto& t = tasks[i];
    ojson o;
    o["index"] = i;
    o["type"] = t.type;
    o["ok"] = t.ok;
    o["records"] = t.records;
    if (!t.error.empty()) o["error"] = t.error;
    if (with_timings) o["elapsed_ms"] = t.elapsed_ms;
    tasks_json.push_back(std::move(o));
  }
  doc["tasks"] = std::move(tasks_json);
  ojson recs = ojson::array();
  for (const auto& r : records) {
    ojson o = ojson::object();
    for (const auto& [k, v] : r.fields) o[k] = field_json(v);
    recs.push_back(std::move(o));
  }
  doc["records"] = std::move(recs);
  return doc.dump(2) + "\n";
}

std::string Report::to_csv() const {
  std::vector<std::string> cols;
  for (const auto& r : records) {
    for (const auto& [k, v] : r.fields) {
      if (std::find(cols.begin(), cols.end(), k) == cols.end()) cols.push_back(k);
    }
  }
  std::ostringstream out;
  for (std::size_t i = 0; i < cols.size(); ++i) out << (i ? "," : "") << cols[i];
  out << "\n";
  for (const auto& r : records) {
    for (std::size_t i = 0; i < cols.size(); ++i) {
      if (i) out << ",";
      if (const Field* f = r.find(cols[i])) out << csv_cell(*f);
    }
    out << "\n";
  }
  return out.str();
}

bool Report::all_ok() const {
  return std::all_of(tasks.begin(), tasks.end(), [](const TaskOutcome& t) { return t.ok; });
}

}  // namespace monolab
