#pragma once

// Dataset emission.  Numbers are written in their shortest round-trip
// decimal form and every file carries the resolved run configuration, so
// identical inputs give byte-identical files.

#include <json.hpp>

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "sunshadow/brake.hpp"
#include "sunshadow/core.hpp"
#include "sunshadow/manifolds.hpp"
#include "sunshadow/propagate.hpp"
#include "sunshadow/ssmap.hpp"

namespace sunshadow::io {

using Json = nlohmann::ordered_json;

inline constexpr int kSchemaVersion = 1;

std::string format_double(double x);

Json to_json(const PhysParams& p);

// Overlays the keys of `j` onto `base` and validates the result.  Unknown
// keys and mistyped values throw ConfigInvalid.
PhysParams params_from_json(const Json& j, PhysParams base = {});

// Everything that determines an output: the command, its resolved
// parameters and the physical constants.
struct RunConfig {
  std::string command;
  PhysParams params;
  Json options = Json::object();
  std::uint64_t seed = 0;

  Json to_json() const;
};

// Writes `# key: value` header lines holding the config, then the column row.
class CsvWriter {
 public:
  CsvWriter(std::ostream& os, const RunConfig& cfg, const std::vector<std::string>& columns);

  CsvWriter& cell(double x);
  CsvWriter& cell(long long x);
  CsvWriter& cell(int x) { return cell(static_cast<long long>(x)); }
  CsvWriter& cell(std::size_t x) { return cell(static_cast<long long>(x)); }
  CsvWriter& cell(const std::string& s);
  void end_row();

 private:
  std::ostream& os_;
  bool first_ = true;
};

void write_grid(std::ostream& os, const RunConfig& cfg, const std::vector<ssmap::ScanNode>& nodes);

void write_branch(std::ostream& os, const RunConfig& cfg, const manifolds::Branch& b);

struct OrbitPoint {
  int n = 0;
  ssmap::SectionPoint point;
  int winding = 0;  // of the application that produced the point; 0 for n = 0
};
void write_orbit(std::ostream& os, const RunConfig& cfg, const std::vector<OrbitPoint>& orbit);

void write_trajectory(std::ostream& os, const RunConfig& cfg, const std::vector<propagate::StepRecord>& steps);

Json to_json(const brake::BrakeSolution& s);
Json to_json(const ssmap::FixedPoint& fp);
Json to_json(const ssmap::AreaResult& a);

// Pretty JSON document with `config` first, then the payload fields.
void write_json(std::ostream& os, const RunConfig& cfg, const Json& payload);

}  // namespace sunshadow::io
