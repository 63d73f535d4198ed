#include <rtriage/cli.hpp>

#include <rtriage/error.hpp>
#include <rtriage/fixtures.hpp>
#include <rtriage/hashdb.hpp>
#include <rtriage/hfs_volume.hpp>
#include <rtriage/matcher.hpp>
#include <rtriage/report.hpp>
#include <rtriage/vfs.hpp>

#include <CLI11.hpp>
#include <fmt/format.h>
#include <fmt/ostream.h>

#include <algorithm>
#include <array>
#include <cstdlib>
#include <fstream>
#include <iterator>
#include <ostream>

namespace rtriage::cli {

Environment Environment::from_process() {
  Environment env;
  if (const char* v = std::getenv(kStoreEnvVar); v && *v) env.default_store = v;
  return env;
}

namespace {

namespace fs = std::filesystem;

struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

void print_stats(std::ostream& out, const hashdb::IngestStats& s, bool diff) {
  fmt::print(out, "files_seen: {}\n", s.files_seen);
  fmt::print(out, "fingerprints_inserted: {}\n", s.fingerprints_inserted);
  fmt::print(out, "links_created: {}\n", s.links_created);
  fmt::print(out, "links_existing: {}\n", s.links_existing);
  fmt::print(out, "zero_size_skipped: {}\n", s.zero_size_skipped);
  fmt::print(out, "read_errors: {}\n", s.read_errors);
  if (diff) fmt::print(out, "suppressed_as_baseline: {}\n", s.suppressed_as_baseline);
}

std::string date_or_dash(hfs::HfsDate d) { return d.raw == 0 ? "-" : format_rfc3339(hfs::to_timestamp(d)); }

void print_ls_line(std::ostream& out, const hfs::CatalogRecord& rec) {
  if (rec.is_file()) {
    const auto& f = *rec.file;
    fmt::print(out, "{}\tfile\t{}\t{}\t{}\t{}\t{}\n", rec.name, f.data_size, f.rsrc_size, f.type_code.str(),
               f.creator_code.str(), date_or_dash(f.modified));
  } else {
    fmt::print(out, "{}\tfolder\t-\t-\t-\t-\t{}\n", rec.name, date_or_dash(rec.folder->modified));
  }
}

hfs::Volume open_image(const std::string& path) { return hfs::open_volume(fs::path(path)); }

int hfs_ls(std::ostream& out, const std::string& image, const std::string& path) {
  const auto volume = open_image(image);
  const auto rec = volume.lookup(path);
  if (rec.is_file()) {
    print_ls_line(out, rec);
    return kExitOk;
  }
  for (const auto& child : volume.list_children(rec.id)) print_ls_line(out, child);
  return kExitOk;
}

int hfs_tree(std::ostream& out, const std::string& image) {
  const auto source = vfs::open_source(image, vfs::KindHint::Hfs);
  fmt::print(out, "{}/\n", source.volume()->mdb().volume_name);
  int status = kExitOk;
  source.walk({}, [&](const vfs::WalkEvent& ev) {
    if (const auto* issue = std::get_if<vfs::WalkIssue>(&ev)) {
      if (issue->kind == vfs::IssueKind::IoError) status = kExitFailure;
      return;
    }
    const auto& e = std::get<vfs::FileEntry>(ev);
    const auto depth = static_cast<std::size_t>(std::count(e.relative_path.begin(), e.relative_path.end(), '/'));
    fmt::print(out, "{:{}}{}{}\n", "", 2 * (depth + 1), e.name, e.is_file() ? "" : "/");
  });
  return status;
}

int hfs_cat(std::ostream& out, const std::string& image, const std::string& path, const std::string& fork) {
  const auto volume = open_image(image);
  const auto rec = volume.lookup(path);
  if (!rec.is_file()) raise(ErrorCode::InvalidArgument, fmt::format("'{}' is a folder", path));
  const hfs::ForkReader reader(volume, rec, fork == "rsrc" ? hfs::Fork::Resource : hfs::Fork::Data);
  std::array<std::uint8_t, 64 * 1024> buf;
  std::uint64_t offset = 0;
  while (offset < reader.size()) {
    const auto n = reader.read(offset, buf);
    if (n == 0) break;
    out.write(reinterpret_cast<const char*>(buf.data()), static_cast<std::streamsize>(n));
    offset += n;
  }
  return kExitOk;
}

int hfs_extract(std::ostream& out, std::ostream& err, const std::string& image, const std::string& outdir,
                bool rsrc) {
  const auto source = vfs::open_source(image, vfs::KindHint::Hfs);
  const fs::path root(outdir);
  fs::create_directories(root);
  std::uint64_t folders = 0, files = 0, bytes = 0, errors = 0;
  vfs::WalkOptions opts;
  opts.include_rsrc_projection = rsrc;
  source.walk(opts, [&](const vfs::WalkEvent& ev) {
    if (const auto* issue = std::get_if<vfs::WalkIssue>(&ev)) {
      fmt::print(err, "warning: {}: {}\n", issue->relative_path, issue->message);
      if (issue->kind == vfs::IssueKind::IoError) ++errors;
      return;
    }
    const auto& e = std::get<vfs::FileEntry>(ev);
    const auto target = root / fs::path(e.relative_path);
    if (!e.is_file()) {
      fs::create_directories(target);
      ++folders;
      return;
    }
    try {
      auto stream = source.open_entry(e);
      std::ofstream f(target, std::ios::binary | std::ios::trunc);
      if (!f) raise(ErrorCode::IoError, fmt::format("cannot create '{}'", target.string()));
      std::array<std::uint8_t, 64 * 1024> buf;
      while (const auto n = stream->read(buf)) {
        f.write(reinterpret_cast<const char*>(buf.data()), static_cast<std::streamsize>(n));
        bytes += n;
      }
      f.close();
      if (!f) raise(ErrorCode::IoError, fmt::format("short write to '{}'", target.string()));
      ++files;
    } catch (const Error& ex) {
      fmt::print(err, "error: {}: {}\n", e.relative_path, ex.what());
      ++errors;
    }
  });
  fmt::print(out, "folders: {}\nfiles: {}\nbytes: {}\nerrors: {}\n", folders, files, bytes, errors);
  return errors == 0 ? kExitOk : kExitFailure;
}

int db_info(std::ostream& out, const std::string& path) {
  const auto store = hashdb::Store::open(path);
  const auto c = store.counts();
  fmt::print(out, "name: {}\nversion_label: {}\n", store.descriptor().name, store.descriptor().version_label);
  fmt::print(out, "operating_systems: {}\npackages: {}\nfingerprints: {}\nlinks: {}\n", c.operating_systems,
             c.packages, c.fingerprints, c.links);
  return kExitOk;
}

vfs::Source open_any_source(const std::string& path) { return vfs::open_source(path, vfs::KindHint::Auto); }

struct AnalyzeArgs {
  std::string source;
  std::vector<std::string> dbs;
  std::string source_name;
  std::string examiner;
  std::string out;
  std::size_t page_size = report::kDefaultPageSize;
  unsigned jobs = 1;
  bool rsrc = false;
  std::string timestamp;
};

int analyze(std::ostream& out, const AnalyzeArgs& a, const Environment& env) {
  auto dbs = a.dbs;
  if (dbs.empty() && env.default_store) dbs.push_back(*env.default_store);
  if (dbs.empty()) throw UsageError(fmt::format("analyze: at least one --db is required (or set {})", kStoreEnvVar));

  matcher::AnalysisConfig config;
  config.source_name = a.source_name;
  config.examiner = a.examiner;
  config.include_rsrc_projection = a.rsrc;
  config.parallelism = a.jobs;
  if (!a.timestamp.empty()) {
    config.started_at = parse_rfc3339(a.timestamp);
    if (!config.started_at) throw UsageError(fmt::format("--timestamp: not an RFC 3339 date: '{}'", a.timestamp));
  }

  std::vector<hashdb::Store> stores;
  stores.reserve(dbs.size());
  for (const auto& d : dbs) stores.push_back(hashdb::Store::open(d));
  std::vector<const hashdb::Store*> refs;
  for (const auto& s : stores) refs.push_back(&s);

  const auto source = open_any_source(a.source);
  const auto result = matcher::analyze(source, refs, config);
  const auto doc = report::render(result, a.page_size);
  report::write_report(doc, a.out);

  const auto& c = result.counters;
  fmt::print(out, "files_walked: {}\nzero_size_skipped: {}\nread_errors: {}\nmatched_instances: {}\nunmatched: {}\n",
             c.files_walked, c.zero_size_skipped, c.read_errors, c.matched_instances, c.unmatched);
  fmt::print(out, "os_detections: {}\npackages: {}\n", result.os_rows.size(), result.package_rows.size());
  fmt::print(out, "json: {}\nhtml: {}\n", (fs::path(a.out) / report::kJsonFileName).string(),
             (fs::path(a.out) / report::kHtmlFileName).string());
  return kExitOk;
}

int build_fixture(std::ostream& out, const std::string& spec_path, const std::string& image_path,
                  std::uint64_t seed) {
  std::ifstream in(spec_path);
  if (!in) raise(ErrorCode::IoError, fmt::format("cannot open '{}'", spec_path));
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(in);
  } catch (const nlohmann::json::exception& e) {
    raise(ErrorCode::InvalidArgument, fmt::format("{}: {}", spec_path, e.what()));
  }
  const auto spec = fixtures::spec_from_json(j);
  const auto image = fixtures::build_hfs_image(spec, seed);
  std::ofstream f(image_path, std::ios::binary | std::ios::trunc);
  f.write(reinterpret_cast<const char*>(image.data()), static_cast<std::streamsize>(image.size()));
  f.close();
  if (!f) raise(ErrorCode::IoError, fmt::format("cannot write '{}'", image_path));
  fmt::print(out, "files: {}\nbytes: {}\n", fixtures::count_files(spec), image.size());
  return kExitOk;
}

} // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err, const Environment& env) {
  CLI::App app{"Triage of classic Mac OS media against reference fingerprint stores", "retro-triage"};
  app.require_subcommand(1);
  app.set_help_all_flag("--help-all", "Show help for every subcommand");

  // hfs
  auto* hfs_cmd = app.add_subcommand("hfs", "Inspect and extract classic HFS images");
  hfs_cmd->require_subcommand(1);
  std::string image, path = "/", outdir, fork = "data";
  bool rsrc = false;

  auto* ls = hfs_cmd->add_subcommand("ls", "List a folder (or describe a file)");
  ls->add_option("image", image, "HFS image or partitioned disk image")->required();
  ls->add_option("path", path, "Path inside the volume")->capture_default_str();

  auto* tree = hfs_cmd->add_subcommand("tree", "Print the whole catalog as a tree");
  tree->add_option("image", image, "HFS image")->required();

  auto* cat = hfs_cmd->add_subcommand("cat", "Write a fork's bytes to standard output");
  cat->add_option("image", image, "HFS image")->required();
  cat->add_option("path", path, "File path inside the volume")->required();
  cat->add_option("--fork", fork, "Fork to read")->check(CLI::IsMember({"data", "rsrc"}))->capture_default_str();

  auto* extract = hfs_cmd->add_subcommand("extract", "Materialise the volume tree in a host directory");
  extract->add_option("image", image, "HFS image")->required();
  extract->add_option("outdir", outdir, "Destination directory")->required();
  extract->add_flag("--rsrc", rsrc, "Write resource forks under .rsrc/ folders");

  // db
  auto* db_cmd = app.add_subcommand("db", "Administer a fingerprint store");
  db_cmd->require_subcommand(1);
  std::string store_path, name, version, version_label, language, kind = "application", source, csv;
  std::int64_t os_id = 0, package_id = 0, baseline_id = 0;

  auto* init = db_cmd->add_subcommand("init", "Create an empty store");
  init->add_option("store", store_path, "Store file to create")->required();
  init->add_option("--name", name, "Store name shown in reports")->required();
  init->add_option("--version-label", version_label, "Free-form version label");

  auto* info = db_cmd->add_subcommand("info", "Show the descriptor and row counts");
  info->add_option("store", store_path, "Store file")->required();

  auto* add_os = db_cmd->add_subcommand("add-os", "Register an operating system");
  add_os->add_option("store", store_path, "Store file")->required();
  add_os->add_option("--name", name, "OS name")->required();
  add_os->add_option("--version", version, "OS version")->required();

  auto* add_pkg = db_cmd->add_subcommand("add-package", "Register a package");
  add_pkg->add_option("store", store_path, "Store file")->required();
  add_pkg->add_option("--name", name, "Package name")->required();
  add_pkg->add_option("--version", version, "Package version")->required();
  add_pkg->add_option("--language", language, "Package language");
  add_pkg->add_option("--os", os_id, "OS id returned by add-os")->required();
  add_pkg->add_option("--kind", kind, "Package kind")
      ->check(CLI::IsMember({"os-baseline", "application"}))
      ->capture_default_str();

  auto* ingest = db_cmd->add_subcommand("ingest", "Fingerprint a source into a package");
  ingest->add_option("store", store_path, "Store file")->required();
  ingest->add_option("--package", package_id, "Package id")->required();
  ingest->add_option("source", source, "HFS image or directory")->required();
  ingest->add_flag("--rsrc", rsrc, "Also fingerprint resource forks through .rsrc/ projections");

  auto* ingest_diff = db_cmd->add_subcommand("ingest-diff", "Fingerprint a post-install source minus a baseline");
  ingest_diff->add_option("store", store_path, "Store file")->required();
  ingest_diff->add_option("--package", package_id, "Package id")->required();
  ingest_diff->add_option("--baseline", baseline_id, "Baseline package id")->required();
  ingest_diff->add_option("source", source, "HFS image or directory")->required();
  ingest_diff->add_flag("--rsrc", rsrc, "Also fingerprint resource forks through .rsrc/ projections");

  auto* import_rds = db_cmd->add_subcommand("import-rds", "Import an RDS-style CSV file atomically");
  import_rds->add_option("store", store_path, "Store file")->required();
  import_rds->add_option("csv", csv, "CSV file")->required();

  // analyze
  AnalyzeArgs an;
  auto* analyze_cmd = app.add_subcommand("analyze", "Match a source against stores and write the reports");
  analyze_cmd->add_option("source", an.source, "HFS image or directory")->required();
  analyze_cmd->add_option("--db", an.dbs, fmt::format("Store file, repeatable (default: ${})", kStoreEnvVar));
  analyze_cmd->add_option("--source-name", an.source_name, "Data source name for the report")->required();
  analyze_cmd->add_option("--examiner", an.examiner, "Examiner name for the report")->required();
  analyze_cmd->add_option("--out", an.out, "Output directory")->required();
  analyze_cmd->add_option("--page-size", an.page_size, "Unmatched rows per page")
      ->check(CLI::PositiveNumber)
      ->capture_default_str();
  analyze_cmd->add_option("--jobs", an.jobs, "Hashing workers")->check(CLI::PositiveNumber)->capture_default_str();
  analyze_cmd->add_flag("--rsrc", an.rsrc, "Include resource forks through .rsrc/ projections");
  analyze_cmd->add_option("--timestamp", an.timestamp, "Pin the analysis date (RFC 3339)")->group("");

  // fixtures (hidden)
  auto* fixtures_cmd = app.add_subcommand("fixtures", "Build synthetic HFS images")->group("");
  fixtures_cmd->require_subcommand(1);
  std::string spec_path;
  std::uint64_t seed = 0;
  auto* build = fixtures_cmd->add_subcommand("build", "Build an image from a JSON tree spec");
  build->add_option("spec", spec_path, "JSON spec")->required();
  build->add_option("image", image, "Output image")->required();
  build->add_option("--seed", seed, "Noise seed")->capture_default_str();

  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kExitOk : kExitUsage;
  }

  try {
    if (ls->parsed()) return hfs_ls(out, image, path);
    if (tree->parsed()) return hfs_tree(out, image);
    if (cat->parsed()) return hfs_cat(out, image, path, fork);
    if (extract->parsed()) return hfs_extract(out, err, image, outdir, rsrc);

    if (init->parsed()) {
      const auto store = hashdb::Store::init(store_path, {name, version_label});
      fmt::print(out, "name: {}\nversion_label: {}\n", store.descriptor().name, store.descriptor().version_label);
      return kExitOk;
    }
    if (info->parsed()) return db_info(out, store_path);
    if (add_os->parsed()) {
      auto store = hashdb::Store::open(store_path, hashdb::OpenMode::ReadWrite);
      fmt::print(out, "os_id: {}\n", hashdb::value_of(store.add_os(name, version)));
      return kExitOk;
    }
    if (add_pkg->parsed()) {
      auto store = hashdb::Store::open(store_path, hashdb::OpenMode::ReadWrite);
      const auto id = store.add_package(name, version, language, hashdb::OsId{os_id}, *hashdb::parse_package_kind(kind));
      fmt::print(out, "package_id: {}\n", hashdb::value_of(id));
      return kExitOk;
    }
    if (ingest->parsed() || ingest_diff->parsed()) {
      auto store = hashdb::Store::open(store_path, hashdb::OpenMode::ReadWrite);
      const auto src = open_any_source(source);
      vfs::WalkOptions opts;
      opts.include_rsrc_projection = rsrc;
      const bool diff = ingest_diff->parsed();
      const auto stats = diff ? store.ingest_diff(hashdb::PackageId{package_id}, src,
                                                  hashdb::PackageId{baseline_id}, opts)
                              : store.ingest_source(hashdb::PackageId{package_id}, src, opts);
      print_stats(out, stats, diff);
      return kExitOk;
    }
    if (import_rds->parsed()) {
      auto store = hashdb::Store::open(store_path, hashdb::OpenMode::ReadWrite);
      print_stats(out, store.import_rds(fs::path(csv)), false);
      return kExitOk;
    }
    if (analyze_cmd->parsed()) return analyze(out, an, env);
    if (build->parsed()) return build_fixture(out, spec_path, image, seed);
  } catch (const UsageError& e) {
    fmt::print(err, "error: {}\nRun with --help for more information.\n", e.what());
    return kExitUsage;
  } catch (const Error& e) {
    fmt::print(err, "error: {}\n", e.what());
    return kExitFailure;
  } catch (const fs::filesystem_error& e) {
    fmt::print(err, "error: IoError: {}\n", e.what());
    return kExitFailure;
  }
  return kExitUsage;
}

} // namespace rtriage::cli
