#include "wellcap/kind.hpp"

#include "wellcap/errors.hpp"

namespace wellcap {

ModelKind parse_model_kind(std::string_view text) {
  if (text == "A" || text == "a" || text == "spatial") return ModelKind::spatial;
  if (text == "B" || text == "b" || text == "spatio_temporal")
    return ModelKind::spatio_temporal;
  if (text == "C" || text == "c" || text == "expanded") return ModelKind::expanded;
  throw DomainError("unknown model kind '" + std::string(text) +
                    "' (expected A, B or C)");
}

std::string to_string(ModelKind kind) {
  switch (kind) {
    case ModelKind::spatial:
      return "A";
    case ModelKind::spatio_temporal:
      return "B";
    case ModelKind::expanded:
      return "C";
  }
  return "?";
}

}  // namespace wellcap
