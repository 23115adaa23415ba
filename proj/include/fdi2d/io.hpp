#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "fdi2d/model.hpp"
#include "fdi2d/polymat.hpp"
#include "fdi2d/sim.hpp"

namespace fdi2d::io {

using json = nlohmann::json;

class ParseError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

json matrix_to_json(const Matrix& m);
// `cols_hint` gives the column count of an empty (0-row) matrix.
Matrix matrix_from_json(const json& j, const std::string& what, Eigen::Index cols_hint = 0);

json model_to_json(const FmiiModel& m);
FmiiModel model_from_json(const json& j);

json filter_to_json(const DetectionFilter& f);
DetectionFilter filter_from_json(const json& j);

struct ScenarioDocument {
  Scenario scenario;
  std::optional<std::uint64_t> seed;
};
ScenarioDocument scenario_from_json(const json& j, const FmiiModel& m);

json polymatrix_to_json(const BivarPolyMatrix& p);
BivarPolyMatrix polymatrix_from_json(const json& j);

json thresholds_to_json(const ThresholdSpec& t, const std::vector<std::string>& names, std::uint64_t seed);
ThresholdSpec thresholds_from_json(const json& j);

json read_json_file(const std::string& path);
void write_json_file(const std::string& path, const json& j);

}  // namespace fdi2d::io
