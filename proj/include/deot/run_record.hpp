#pragma once

#include <filesystem>
#include <string>
#include <string_view>

#include "deot/orchestrator.hpp"

namespace deot {

inline constexpr std::string_view kRunRecordSchema = "deot.run/1";

/// Self-describing JSON document for a run record.
std::string to_document(const RunRecord& record);
/// Throws MalformedFile or VersionMismatch.
RunRecord from_document(std::string_view document);

/// Writes <dir>/<run_id>.json and returns its path. Throws Error(IoError).
std::filesystem::path persist(const RunRecord& record, const std::filesystem::path& dir);
RunRecord load(const std::filesystem::path& path);

enum class GraphFormat { Dot, StructuredDocument };
std::string export_graph(const RunRecord& record, GraphFormat format);

}  // namespace deot
