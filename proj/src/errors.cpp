#include "memetrace/errors.hpp"

namespace memetrace {

LineError::LineError(std::size_t line, const std::string& what)
    : Error("line " + std::to_string(line) + ": " + what), line_(line), reason_(what) {}

MissingArtifact::MissingArtifact(const std::string& artifact, const std::string& producer)
    : Error("missing artifact '" + artifact + "' (produced by stage '" + producer + "')"),
      artifact_(artifact) {}

} // namespace memetrace
