#pragma once

#include <string>
#include <string_view>

#include "bugloc/types.hpp"

namespace bugloc::codestruct {

/// Best-effort structural extraction from one Java source file. Tolerant by
/// contract: never fails, returns whatever was recognized, even for
/// syntactically invalid input.
FileStructure parse_structure(const SnapshotFile& file);

FileStructure parse_structure(std::string_view path, std::string_view content);

/// Comments and string/char literals replaced by spaces, newlines kept.
/// Exposed for the scorers that match identifiers in source text.
std::string mask_comments_and_literals(std::string_view content);

}  // namespace bugloc::codestruct
