#ifndef KH_IO_HPP
#define KH_IO_HPP

#include <string>

#include "kh/tower.hpp"

#include <nlohmann/json_fwd.hpp>

namespace kh {

using Json = nlohmann::ordered_json;

// Versioned document schemas. Parsers reject documents whose "version"
// field is absent or names a different schema; serializers emit keys in a
// fixed order so output is byte-stable across runs.

Json serialize_diagram(const Diagram& d);
Diagram parse_diagram(const Json& j);

/// The diagram fixes each term's circle count, so emitted label vectors
/// have the full length.
Json serialize_chain(const Diagram& d, const ChainVector& c);
ChainVector parse_chain(const Json& j);

Json serialize_movie(const Movie& m);
Movie parse_movie(const Json& j);

Json serialize_tower(const TowerSpec& t);
TowerSpec parse_tower(const Json& j);

/// Cycles serialize against the stage diagrams of t (cycle i lives on
/// stage i+1).
Json serialize_certificate(const TowerSpec& t, const SurvivalCertificate& c);
SurvivalCertificate parse_certificate(const Json& j);

Json serialize_dims(const BigradedDims& dims);

Json serialize_survival_report(const SurvivalReport& r);
Json serialize_capoff_report(const CapoffReport& r);

/// Parse any of the document types from a file on disk, dispatching on the
/// extension-independent "version" field.
Json load_json_file(const std::string& path);
void save_json_file(const std::string& path, const Json& j);

}  // namespace kh

#endif
