#pragma once

#include <Eigen/Dense>

#include <string>
#include <variant>
#include <vector>

namespace qmix {

enum class Provenance { analytic, simulated, reference };

const char* to_string(Provenance p);

/// Structured result of one CLI run. Every number carries a provenance
/// label; the set of fields depends only on the case, never on values.
class RunReport {
 public:
  using InputValue = std::variant<long long, double, std::string>;

  explicit RunReport(std::string case_name) : case_(std::move(case_name)) {}

  void input(const std::string& key, InputValue v);
  /// Scalar value; a negative standard error means "not applicable".
  void value(const std::string& name, double v, Provenance p, double standard_error = -1.0);
  void matrix(const std::string& name, const Eigen::MatrixXd& m, Provenance p);
  void check(const std::string& name, bool pass, double measured, double expected, double tolerance);
  void note(const std::string& text);

  const std::string& name() const { return case_; }
  bool all_pass() const;

  /// Numbers printed with 12 significant digits.
  std::string to_json() const;
  /// One row per scalar: section,name,value,provenance,standard_error,extra.
  std::string to_csv() const;

 private:
  struct Value {
    std::string name;
    Eigen::MatrixXd data;  // 1x1 for scalars
    bool scalar;
    Provenance provenance;
    double standard_error;
  };
  struct Check {
    std::string name;
    bool pass;
    double measured, expected, tolerance;
  };
  std::string case_;
  std::vector<std::pair<std::string, InputValue>> inputs_;
  std::vector<Value> values_;
  std::vector<Check> checks_;
  std::vector<std::string> notes_;
};

/// Rounds to 12 significant digits.
double round12(double x);

}  // namespace qmix
