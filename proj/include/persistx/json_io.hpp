#pragma once

#include <string>

#include <json.hpp>

#include "persistx/model.hpp"
#include "persistx/operator.hpp"
#include "persistx/oracle.hpp"
#include "persistx/simulate.hpp"

namespace persistx {

using Json = nlohmann::ordered_json;

/// Parses JSON text; syntax errors become ConfigError with the 1-based line.
Json parse_json_text(const std::string& text);
Json read_json_file(const std::string& path);
std::string read_text_file(const std::string& path);
void write_text_file(const std::string& path, const std::string& text);

/// Line of the first occurrence of `"token"` in `text`, 0 if absent.  Used to
/// point semantic config errors at the offending entry.
std::size_t locate_token(const std::string& text, const std::string& token);

/// {"kind": "uniform", "lo": -1, "hi": 1} | {"kind": "gaussian", "sd": 1} |
/// {"kind": "exponential"} | {"kind": "rademacher"}, or the shell string form.
InnovationDistribution innovation_from_json(const Json& j);
Json to_json(const InnovationDistribution& f);

/// {"kind": "point", "x0": [...]} | {"kind": "iid"} (the innovation law) |
/// {"kind": "iid", "law": {...}} | {"kind": "stationary"} (uses a1).
InitialDistribution initial_from_json(const Json& j, const InnovationDistribution& innovation,
                                      std::span<const double> coeffs);
Json to_json(const InitialDistribution& init);

/// {"process": "ar"|"ma", "order": p, "coeffs": [...], "innovation": {...},
///  "initial": {...} (AR only, default iid), "convention": "ge"|"gt"}
ProcessModel model_from_json(const Json& j);
Json to_json(const ProcessModel& m);

Json to_json(const PersistenceEstimate& e);
Json to_json(const ExponentFit& f);
Json to_json(const SpectralResult& r, bool with_eigenfunction = false);
Json to_json(const RegimeReport& r);
Json to_json(const SweepPoint& p);

/// Two-space indented dump; doubles use the shortest representation that
/// round-trips exactly.
std::string dump(const Json& j);

/// "%.17g", for CSV output.
std::string format_double(double x);

} // namespace persistx
