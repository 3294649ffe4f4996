#pragma once

#include <nlohmann/json.hpp>
#include <string>

#include "hodgekit/harmonic.hpp"

namespace hodgekit {

using Json = nlohmann::json;

// ASCII cochain/chain files. Header "cochain <p> <N>" (or "chain", or
// "sparse-cochain <p> <N> <k>"), then values in canonical simplex order.
// Values are written with 17 significant digits so round trips are bit-exact.
void write_cochain(const Cochain& a, const std::string& path,
                   const std::string& header_word = "cochain");
Cochain read_cochain(const std::string& path, std::string* header_word = nullptr);

// VTK legacy ASCII unstructured grid with the Whitney interpolant of a
// 1-cochain sampled at top-cell barycenters, plus the raw per-edge values on
// line cells.
void write_vtk(const SimplicialComplex& c, const Cochain& h, const std::string& path);

// Whitney 1-form proxy vector of h at the barycenter of top simplex i.
Vector whitney_vector_at_barycenter(const SimplicialComplex& c, const Cochain& h, int i);

Json to_json(const SolveReport& r);
Json to_json(const Diagnostics& d);
Json to_json(const HarmonicResult& r);
Json to_json(const ComparisonReport& r);
Json to_json(const ComplexSummary& s);

// Minimal structural validator for the subset of JSON Schema used by the
// checked-in report schemas: type, properties, required, items, enum.
bool validate_schema(const Json& value, const Json& schema, std::string* error = nullptr);

}  // namespace hodgekit
