#pragma once

#include <string>
#include <vector>

#include <Eigen/Dense>

#include "json.hpp"

#include "bary/models.hpp"
#include "bary/straighten.hpp"
#include "bary/symops.hpp"
#include "bary/volbounds.hpp"

namespace bary {

/// nlohmann::json keeps object keys sorted, which the report format relies on.
using Json = nlohmann::json;

/// Deterministic JSON text: sorted keys, doubles at 17 significant digits
/// (%.17g), non-finite doubles as null, two-space indentation when pretty.
std::string dump_json(const Json& j, bool pretty = true);

/// Array of flat objects (or a single object) as CSV with a header of the
/// sorted union of keys. Nested values are embedded as compact JSON.
std::string dump_csv(const Json& rows);

/// Aligned-column text for an array of flat objects; "key  value" lines for
/// an object, nested objects flattened to dotted keys.
std::string dump_text(const Json& j);

/// Writes to a temporary file beside `path`, then renames it into place.
void write_atomic(const std::string& path, const std::string& contents);

Json to_json(const Eigen::VectorXd& v);
Json to_json(const Eigen::MatrixXd& m);
Json to_json(const Point& p);
Json to_json(const SymOp& a);
Json to_json(const BcgReport& r);
Json to_json(const JacobianReport& r);
Json to_json(const JacScanSample& s);
Json to_json(const JacScanSummary& s, bool with_records);
Json to_json(const BoundReport& r);
Json to_json(const SigmaRow& r);
Json to_json(const BochnerResult& r);

Eigen::VectorXd vector_from_json(const Json& j);

}  // namespace bary
