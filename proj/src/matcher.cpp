#include <rtriage/matcher.hpp>

#include <rtriage/error.hpp>

#include <fmt/format.h>

#include <algorithm>
#include <chrono>
#include <exception>
#include <map>
#include <set>
#include <tuple>

namespace rtriage::matcher {

std::uint64_t percent_rounded(std::uint64_t part, std::uint64_t total) noexcept {
  if (total == 0) return 0;
  return (200 * part + total) / (2 * total);
}

Classification classify_file(std::span<const std::size_t> hits_per_store) noexcept {
  return std::any_of(hits_per_store.begin(), hits_per_store.end(), [](std::size_t n) { return n > 0; })
             ? Classification::Matched
             : Classification::Unmatched;
}

bool AnalysisResult::same_tables(const AnalysisResult& o) const {
  return config.source_name == o.config.source_name && config.examiner == o.config.examiner &&
         config.include_rsrc_projection == o.config.include_rsrc_projection && started_at == o.started_at &&
         databases == o.databases && unmatched == o.unmatched && read_errors == o.read_errors &&
         walk_issues == o.walk_issues && os_rows == o.os_rows && package_rows == o.package_rows &&
         counters == o.counters;
}

namespace {

// Hash failures are per file; lookup failures mean a store is unusable and
// propagate.
void process_one(const vfs::Source& source, const vfs::FileEntry& entry, std::span<const hashdb::Store* const> stores,
                 FileOutcome& out) {
  try {
    out.md5 = hashdb::hash_entry(source, entry);
  } catch (const Error& e) {
    out.error = e.what();
    return;
  }
  out.hits.reserve(stores.size());
  for (const auto* store : stores) out.hits.push_back(store->lookup(out.md5, entry.data_size));
}

} // namespace

std::vector<FileOutcome> process_serial(const vfs::Source& source, std::span<const vfs::FileEntry> files,
                                        std::span<const hashdb::Store* const> stores) {
  std::vector<FileOutcome> out(files.size());
  for (std::size_t i = 0; i < files.size(); ++i) process_one(source, files[i], stores, out[i]);
  return out;
}

std::vector<FileOutcome> process_parallel(const vfs::Source& source, std::span<const vfs::FileEntry> files,
                                          std::span<const hashdb::Store* const> stores, unsigned workers) {
  if (workers == 0) raise(ErrorCode::InvalidArgument, "parallelism must be at least 1");
  std::vector<FileOutcome> out(files.size());
  std::exception_ptr failure;
  const auto n = static_cast<std::int64_t>(files.size());

#pragma omp parallel for schedule(dynamic, 8) num_threads(static_cast<int>(workers))
  for (std::int64_t i = 0; i < n; ++i) {
    try {
      process_one(source, files[static_cast<std::size_t>(i)], stores, out[static_cast<std::size_t>(i)]);
    } catch (...) {
#pragma omp critical(rtriage_matcher_failure)
      if (!failure) failure = std::current_exception();
    }
  }

  if (failure) std::rethrow_exception(failure);
  return out;
}

namespace {

struct PackageAcc {
  std::uint64_t occurrences = 0;
  std::set<std::string> fingerprints; // md5 + ':' + size
  std::vector<std::string> files;
};

using OsKey = std::tuple<std::size_t, std::string, std::string>; // store index, name, version

} // namespace

AnalysisResult analyze(const vfs::Source& source, std::span<const hashdb::Store* const> stores,
                       const AnalysisConfig& config) {
  if (stores.empty()) raise(ErrorCode::NoStores, "at least one store must be attached");
  if (config.parallelism == 0) raise(ErrorCode::InvalidArgument, "parallelism must be at least 1");
  {
    std::set<std::string_view> names;
    for (const auto* s : stores)
      if (!names.insert(s->name()).second)
        raise(ErrorCode::InvalidArgument, fmt::format("store name '{}' attached twice", s->name()));
  }

  AnalysisResult result;
  result.config = config;
  result.started_at = config.started_at.value_or(
      std::chrono::time_point_cast<std::chrono::seconds>(std::chrono::system_clock::now()));
  for (const auto* s : stores) result.databases.push_back(s->descriptor());

  vfs::WalkOptions opts;
  opts.include_rsrc_projection = config.include_rsrc_projection;
  std::vector<vfs::FileEntry> files;
  source.walk(opts, [&](const vfs::WalkEvent& ev) {
    if (const auto* issue = std::get_if<vfs::WalkIssue>(&ev)) {
      if (issue->kind != vfs::IssueKind::IoError) return;
      if (issue->relative_path.empty()) raise(ErrorCode::IoError, issue->message);
      result.walk_issues.push_back(*issue);
      return;
    }
    const auto& entry = std::get<vfs::FileEntry>(ev);
    if (!entry.is_file()) return;
    ++result.counters.files_walked;
    if (entry.data_size == 0) {
      ++result.counters.zero_size_skipped;
      return;
    }
    files.push_back(entry);
  });

  const auto outcomes = config.parallelism == 1 ? process_serial(source, files, stores)
                                                : process_parallel(source, files, stores, config.parallelism);

  std::map<std::pair<std::size_t, hashdb::PackageId>, PackageAcc> packages;
  std::map<OsKey, std::uint64_t> os_counts;

  for (std::size_t i = 0; i < files.size(); ++i) {
    const auto& entry = files[i];
    const auto& outcome = outcomes[i];
    if (outcome.error) {
      result.read_errors.push_back({entry.relative_path, *outcome.error});
      continue;
    }
    std::vector<std::size_t> counts;
    for (const auto& h : outcome.hits) counts.push_back(h.size());
    if (classify_file(counts) == Classification::Unmatched) {
      result.unmatched.push_back({entry.relative_path, entry.data_size, outcome.md5});
      continue;
    }
    ++result.counters.matched_instances;
    const std::string fp_key = fmt::format("{}:{}", outcome.md5, entry.data_size);
    for (std::size_t s = 0; s < outcome.hits.size(); ++s) {
      std::set<std::pair<std::string, std::string>> oses;
      for (const auto& hit : outcome.hits[s]) {
        auto& acc = packages[{s, hit.package_id}];
        ++acc.occurrences;
        acc.fingerprints.insert(fp_key);
        if (acc.files.empty() || acc.files.back() != entry.relative_path) acc.files.push_back(entry.relative_path);
        oses.emplace(hit.os_name, hit.os_version);
      }
      for (const auto& [name, version] : oses) ++os_counts[{s, name, version}];
    }
  }
  result.counters.read_errors = result.read_errors.size();
  result.counters.unmatched = result.unmatched.size();

  const auto& c = result.counters;
  if (c.matched_instances + c.unmatched + c.read_errors != c.files_walked - c.zero_size_skipped)
    raise(ErrorCode::InvalidArgument, "internal error: file partition does not add up");

  for (const auto& [key, count] : os_counts) {
    const auto& [s, name, version] = key;
    result.os_rows.push_back({name, version, count, stores[s]->name()});
  }
  std::map<std::string_view, std::size_t> store_rank;
  for (std::size_t s = 0; s < stores.size(); ++s) store_rank[stores[s]->name()] = s;
  std::stable_sort(result.os_rows.begin(), result.os_rows.end(), [&](const auto& a, const auto& b) {
    return std::forward_as_tuple(b.occurrences, a.os_name, a.os_version, store_rank[a.store_name]) <
           std::forward_as_tuple(a.occurrences, b.os_name, b.os_version, store_rank[b.store_name]);
  });

  for (auto& [key, acc] : packages) {
    const auto& [s, id] = key;
    const auto* store = stores[s];
    const auto rec = store->package(id);
    if (!rec) raise(ErrorCode::InvalidStore, fmt::format("package {} vanished from '{}'", value_of(id), store->name()));
    const auto os = store->operating_system(rec->os_ref);
    PackageRow row;
    row.store_name = store->name();
    row.package_id = id;
    row.name = rec->name;
    row.version = rec->version;
    row.language = rec->language;
    row.os_name = os ? os->name : std::string();
    row.os_version = os ? os->version : std::string();
    row.occurrences = acc.occurrences;
    row.fingerprint_count = store->fingerprint_count(id);
    row.occurrence_ratio_percent = percent_rounded(acc.occurrences, row.fingerprint_count);
    row.coverage_percent = percent_rounded(acc.fingerprints.size(), row.fingerprint_count);
    row.matched_files = std::move(acc.files);
    result.package_rows.push_back(std::move(row));
  }
  std::stable_sort(result.package_rows.begin(), result.package_rows.end(), [&](const auto& a, const auto& b) {
    const auto ra = store_rank[a.store_name];
    const auto rb = store_rank[b.store_name];
    return std::forward_as_tuple(ra, b.occurrences, a.name, a.version, value_of(a.package_id)) <
           std::forward_as_tuple(rb, a.occurrences, b.name, b.version, value_of(b.package_id));
  });

  return result;
}

} // namespace rtriage::matcher
