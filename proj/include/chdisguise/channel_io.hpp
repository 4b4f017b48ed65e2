#pragma once

// Channel JSON:
//   {"dim": 2, "kraus": [{"re": [[..],[..]], "im": [[..],[..]]}, ...]}
// Matrices are row-major lists of rows. Output is canonical: compact, keys
// sorted, floating-point numbers with 17 significant digits, so a written
// file re-reads and re-writes to identical bytes.

#include <filesystem>
#include <string>

#include <json.hpp>

#include "chdisguise/channels.hpp"

namespace chdisguise {

inline constexpr double kDefaultLoadTpTol = 1e-6;

/// Throws ValidationError on schema violations or when the Kraus sum differs
/// from the identity by more than tp_tol in any entry.
KrausChannel channel_from_json(const nlohmann::json& doc, double tp_tol = kDefaultLoadTpTol);
KrausChannel load_channel(const std::filesystem::path& path, double tp_tol = kDefaultLoadTpTol);

nlohmann::json channel_to_json(const KrausChannel& ch);

/// Compact serialization with sorted keys and %.17g floats.
std::string canonical_json(const nlohmann::json& doc);

}  // namespace chdisguise
