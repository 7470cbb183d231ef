#include "qmix/io.hpp"

#include <json.hpp>

#include <fstream>
#include <sstream>

namespace qmix {

using json = nlohmann::json;

namespace {

[[noreturn]] void fail(const std::string& source, const std::string& path, const std::string& what) {
  throw ParseError(source + ": " + path + ": " + what);
}

double number_at(const json& v, const std::string& source, const std::string& path) {
  if (!v.is_number()) fail(source, path, "expected a number");
  return v.get<double>();
}

Eigen::MatrixXd grid_at(const json& v, Index d, const std::string& source, const std::string& path) {
  if (!v.is_array() || static_cast<Index>(v.size()) != d) {
    fail(source, path, "expected " + std::to_string(d) + " rows");
  }
  Eigen::MatrixXd out(d, d);
  for (Index i = 0; i < d; ++i) {
    const std::string row_path = path + "[" + std::to_string(i) + "]";
    const json& row = v[static_cast<std::size_t>(i)];
    if (!row.is_array() || static_cast<Index>(row.size()) != d) {
      fail(source, row_path, "expected " + std::to_string(d) + " entries");
    }
    for (Index j = 0; j < d; ++j) {
      out(i, j) = number_at(row[static_cast<std::size_t>(j)], source, row_path + "[" + std::to_string(j) + "]");
    }
  }
  return out;
}

HermitianMatrix operator_at(const json& v, Index d, const std::string& source, const std::string& path) {
  if (!v.is_object()) fail(source, path, "expected an object with \"re\"/\"im\" or \"bloch\"");
  if (v.contains("bloch")) {
    if (d != 2) fail(source, path + ".bloch", "Bloch vectors need dim 2");
    const json& b = v["bloch"];
    if (!b.is_array() || b.size() != 3) fail(source, path + ".bloch", "expected three numbers");
    Eigen::Vector3d r;
    for (int a = 0; a < 3; ++a) r(a) = number_at(b[a], source, path + ".bloch[" + std::to_string(a) + "]");
    if (r.norm() > 1.0 + 1e-12) fail(source, path + ".bloch", "vector longer than 1");
    double w = 1.0;
    if (v.contains("weight")) w = number_at(v["weight"], source, path + ".weight");
    HermitianMatrix h = HermitianMatrix::identity(2);
    for (int a = 0; a < 3; ++a) h += pauli(a) * r(a);
    return h * (0.5 * w);
  }
  if (!v.contains("re")) fail(source, path, "missing \"re\" (or \"bloch\")");
  const Eigen::MatrixXd re = grid_at(v["re"], d, source, path + ".re");
  Eigen::MatrixXd im = Eigen::MatrixXd::Zero(d, d);
  if (v.contains("im")) im = grid_at(v["im"], d, source, path + ".im");
  CMatrix m(d, d);
  m.real() = re;
  m.imag() = im;
  try {
    return HermitianMatrix(m);
  } catch (const Error& e) {
    fail(source, path, e.what());
  }
}

}  // namespace

OperatorDocument parse_operator_document(const std::string& text, const std::string& list_key,
                                         const std::string& source) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::parse_error& e) {
    // Report the line and column of the byte offset.
    std::size_t line = 1, col = 1;
    for (std::size_t i = 0; i + 1 < e.byte && i < text.size(); ++i) {
      if (text[i] == '\n') {
        ++line;
        col = 1;
      } else {
        ++col;
      }
    }
    throw ParseError(source + ":" + std::to_string(line) + ":" + std::to_string(col) + ": syntax error: " + e.what());
  }
  if (!doc.is_object()) fail(source, "$", "top level must be an object");
  if (!doc.contains("dim")) fail(source, "dim", "missing");
  const json& dv = doc["dim"];
  if (!dv.is_number_integer() || dv.get<long long>() < 1) fail(source, "dim", "expected a positive integer");
  OperatorDocument out;
  out.dim = dv.get<Index>();
  if (out.dim > dimension_cap()) fail(source, "dim", "exceeds the dimension cap");
  if (!doc.contains(list_key)) fail(source, list_key, "missing");
  const json& list = doc[list_key];
  if (!list.is_array() || list.empty()) fail(source, list_key, "expected a non-empty list");
  for (std::size_t i = 0; i < list.size(); ++i) {
    out.operators.push_back(operator_at(list[i], out.dim, source, list_key + "[" + std::to_string(i) + "]"));
  }
  if (doc.contains("labels")) {
    const json& labels = doc["labels"];
    if (!labels.is_array() || labels.size() != list.size()) {
      fail(source, "labels", "expected one label per entry of " + list_key);
    }
    for (std::size_t i = 0; i < labels.size(); ++i) {
      if (!labels[i].is_string()) fail(source, "labels[" + std::to_string(i) + "]", "expected a string");
      out.labels.push_back(labels[i].get<std::string>());
    }
  }
  return out;
}

std::string read_text_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ParseError(path + ": cannot open file");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::vector<DensityMatrix> read_mixture_file(const std::string& path) {
  const OperatorDocument doc = parse_operator_document(read_text_file(path), "components", path);
  std::vector<DensityMatrix> out;
  for (std::size_t i = 0; i < doc.operators.size(); ++i) {
    try {
      out.emplace_back(doc.operators[i]);
    } catch (const Error& e) {
      fail(path, "components[" + std::to_string(i) + "]", std::string("not a density matrix: ") + e.what());
    }
  }
  return out;
}

Povm read_povm_file(const std::string& path) {
  OperatorDocument doc = parse_operator_document(read_text_file(path), "elements", path);
  try {
    return Povm(std::move(doc.operators));
  } catch (const Error& e) {
    fail(path, "elements", std::string("not a POVM: ") + e.what());
  }
}

}  // namespace qmix
