#include "qmix/report.hpp"

#include <json.hpp>

#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <sstream>

namespace qmix {

using json = nlohmann::ordered_json;

const char* to_string(Provenance p) {
  switch (p) {
    case Provenance::analytic:
      return "analytic";
    case Provenance::simulated:
      return "simulated";
    case Provenance::reference:
      return "reference";
  }
  return "unknown";
}

double round12(double x) {
  if (!std::isfinite(x)) return x;
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.12g", x);
  return std::strtod(buf, nullptr);
}

namespace {

std::string fmt12(double x) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.12g", x);
  return buf;
}

json number(double x) {
  if (!std::isfinite(x)) return nullptr;
  return round12(x);
}

}  // namespace

void RunReport::input(const std::string& key, InputValue v) { inputs_.emplace_back(key, std::move(v)); }

void RunReport::value(const std::string& name, double v, Provenance p, double standard_error) {
  values_.push_back({name, Eigen::MatrixXd::Constant(1, 1, v), true, p, standard_error});
}

void RunReport::matrix(const std::string& name, const Eigen::MatrixXd& m, Provenance p) {
  values_.push_back({name, m, false, p, -1.0});
}

void RunReport::check(const std::string& name, bool pass, double measured, double expected, double tolerance) {
  checks_.push_back({name, pass, measured, expected, tolerance});
}

void RunReport::note(const std::string& text) { notes_.push_back(text); }

bool RunReport::all_pass() const {
  for (const auto& c : checks_) {
    if (!c.pass) return false;
  }
  return true;
}

std::string RunReport::to_json() const {
  json doc;
  doc["case"] = case_;
  json inputs = json::object();
  for (const auto& [k, v] : inputs_) {
    std::visit(
        [&](const auto& x) {
          if constexpr (std::is_same_v<std::decay_t<decltype(x)>, double>) {
            inputs[k] = number(x);
          } else {
            inputs[k] = x;
          }
        },
        v);
  }
  doc["inputs"] = inputs;
  json values = json::array();
  for (const auto& v : values_) {
    json item;
    item["name"] = v.name;
    item["provenance"] = to_string(v.provenance);
    if (v.scalar) {
      item["value"] = number(v.data(0, 0));
      item["standard_error"] = v.standard_error >= 0.0 ? number(v.standard_error) : json(nullptr);
    } else {
      json rows = json::array();
      for (Eigen::Index i = 0; i < v.data.rows(); ++i) {
        json row = json::array();
        for (Eigen::Index j = 0; j < v.data.cols(); ++j) row.push_back(number(v.data(i, j)));
        rows.push_back(row);
      }
      item["value"] = rows;
      item["standard_error"] = nullptr;
    }
    values.push_back(item);
  }
  doc["values"] = values;
  json checks = json::array();
  for (const auto& c : checks_) {
    checks.push_back({{"name", c.name},
                      {"pass", c.pass},
                      {"measured", number(c.measured)},
                      {"expected", number(c.expected)},
                      {"tolerance", number(c.tolerance)}});
  }
  doc["checks"] = checks;
  doc["notes"] = notes_;
  doc["all_pass"] = all_pass();
  return doc.dump(2) + "\n";
}

std::string RunReport::to_csv() const {
  std::ostringstream os;
  os << "section,name,value,provenance,standard_error,extra\n";
  auto quote = [](const std::string& s) {
    if (s.find_first_of(",\"\n") == std::string::npos) return s;
    std::string q = "\"";
    for (char ch : s) {
      if (ch == '"') q += '"';
      q += ch;
    }
    return q + "\"";
  };
  os << "case," << quote(case_) << ",,,,\n";
  for (const auto& [k, v] : inputs_) {
    os << "input," << quote(k) << ",";
    std::visit(
        [&](const auto& x) {
          if constexpr (std::is_same_v<std::decay_t<decltype(x)>, double>) {
            os << fmt12(x);
          } else if constexpr (std::is_same_v<std::decay_t<decltype(x)>, std::string>) {
            os << quote(x);
          } else {
            os << x;
          }
        },
        v);
    os << ",,,\n";
  }
  for (const auto& v : values_) {
    for (Eigen::Index i = 0; i < v.data.rows(); ++i) {
      for (Eigen::Index j = 0; j < v.data.cols(); ++j) {
        std::string name = v.name;
        if (!v.scalar) name += "[" + std::to_string(i) + "][" + std::to_string(j) + "]";
        os << "value," << quote(name) << "," << fmt12(v.data(i, j)) << "," << to_string(v.provenance) << ",";
        if (v.scalar && v.standard_error >= 0.0) os << fmt12(v.standard_error);
        os << ",\n";
      }
    }
  }
  for (const auto& c : checks_) {
    os << "check," << quote(c.name) << "," << fmt12(c.measured) << ",,," << (c.pass ? "pass" : "fail")
       << " expected=" << fmt12(c.expected) << " tol=" << fmt12(c.tolerance) << "\n";
  }
  for (const auto& n : notes_) os << "note," << quote(n) << ",,,,\n";
  os << "result,all_pass," << (all_pass() ? "true" : "false") << ",,,\n";
  return os.str();
}

}  // namespace qmix
