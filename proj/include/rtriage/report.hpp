#pragma once

#include <rtriage/matcher.hpp>

#include <nlohmann/json.hpp>

#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>

namespace rtriage::report {

inline constexpr std::size_t kDefaultPageSize = 10;
inline constexpr std::string_view kJsonFileName = "report.json";
inline constexpr std::string_view kHtmlFileName = "report.html";

struct ReportDocument {
  std::string json_bytes;
  std::string html_bytes;
  std::uint64_t json_size_kib{0};
};

/// Canonical document; key order is fixed (see docs/report-schema.md).
nlohmann::ordered_json to_json_value(const matcher::AnalysisResult& result);
std::string to_json(const matcher::AnalysisResult& result);

/// Self-contained page; the first page of unmatched files is rendered
/// statically and inline script pages through the embedded data.
std::string to_html(const matcher::AnalysisResult& result, std::size_t page_size = kDefaultPageSize);

ReportDocument render(const matcher::AnalysisResult& result, std::size_t page_size = kDefaultPageSize);

/// Writes report.json and report.html into `dir`, creating it if needed.
void write_report(const ReportDocument& doc, const std::filesystem::path& dir);

/// RFC 3986 percent-encoding of each '/'-separated segment.
std::string percent_encode_path(std::string_view path);

/// max(1, ceil(items / page_size)).
std::size_t page_count(std::size_t items, std::size_t page_size);

/// ceil(bytes / 1024).
std::uint64_t size_kib(std::uint64_t bytes) noexcept;

} // namespace rtriage::report
