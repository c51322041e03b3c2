#pragma once

#include <string>
#include <string_view>

namespace wellcap {

/// The three production-capacity regressions.
///
///  - spatial (A): block intercepts and slopes, slopes regressed on block water use.
///  - spatio_temporal (B): block and time intercepts, slope gamma_t + delta_b * E_b.
///  - expanded (C): slope split into block/time water and sand intensity terms.
enum class ModelKind { spatial, spatio_temporal, expanded };

/// Accepts "A"/"B"/"C" or the enumerator names.
ModelKind parse_model_kind(std::string_view text);

/// Single-letter tag ("A", "B", "C").
std::string to_string(ModelKind kind);

inline bool has_time_effects(ModelKind kind) {
  return kind != ModelKind::spatial;
}

}  // namespace wellcap
