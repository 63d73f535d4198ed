#include "support.hpp"

#include <rtriage/digest.hpp>
#include <rtriage/error.hpp>

#include <fmt/format.h>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <map>
#include <random>
#include <set>
#include <sstream>
#include <stdexcept>

namespace rtriage::testing {

TempDir::TempDir() {
  std::string tmpl = (fs::temp_directory_path() / "rtriage-XXXXXX").string();
  if (!mkdtemp(tmpl.data())) throw std::runtime_error("mkdtemp failed");
  path_ = tmpl;
}

TempDir::~TempDir() {
  std::error_code ec;
  fs::remove_all(path_, ec);
}

void write_file(const fs::path& path, std::string_view content) {
  fs::create_directories(path.parent_path());
  std::ofstream f(path, std::ios::binary | std::ios::trunc);
  f.write(content.data(), static_cast<std::streamsize>(content.size()));
  if (!f) throw std::runtime_error("write failed: " + path.string());
}

std::string read_file(const fs::path& path) {
  std::ifstream f(path, std::ios::binary);
  std::ostringstream ss;
  ss << f.rdbuf();
  return ss.str();
}

std::string as_string(const Bytes& b) { return std::string(b.begin(), b.end()); }
Bytes as_bytes(std::string_view s) { return Bytes(s.begin(), s.end()); }

std::shared_ptr<const MemorySource> image_of(const fixtures::FixtureSpec& spec, std::uint64_t seed) {
  return std::make_shared<MemorySource>(fixtures::build_hfs_image(spec, seed));
}

vfs::Source fixture_source(const fixtures::FixtureSpec& spec, std::uint64_t seed) {
  return vfs::open_hfs_source(image_of(spec, seed), "fixture");
}

FaultySource::FaultySource(std::shared_ptr<const ByteSource> inner, std::uint64_t begin, std::uint64_t end)
    : inner_(std::move(inner)), begin_(begin), end_(end) {}

void FaultySource::read_at(std::uint64_t offset, std::span<std::uint8_t> out) const {
  if (offset < end_ && offset + out.size() > begin_) raise(ErrorCode::IoError, "injected read failure");
  inner_->read_at(offset, out);
}

std::string md5sum_of(const fs::path& file) {
  const std::string cmd = fmt::format("md5sum '{}'", file.string());
  FILE* p = popen(cmd.c_str(), "r");
  if (!p) throw std::runtime_error("popen failed");
  char buf[64] = {};
  const auto n = fread(buf, 1, 32, p);
  pclose(p);
  return std::string(buf, n);
}

namespace {

std::vector<std::string> components(const std::string& p) {
  std::vector<std::string> out;
  std::size_t start = 0;
  while (true) {
    const auto slash = p.find('/', start);
    out.push_back(p.substr(start, slash - start));
    if (slash == std::string::npos) break;
    start = slash + 1;
  }
  return out;
}

} // namespace

bool walk_order_less(const std::string& a, const std::string& b) { return components(a) < components(b); }

OracleTables brute_force(const std::vector<OracleFile>& files, const std::vector<const hashdb::Store*>& stores) {
  struct Link {
    std::size_t store;
    std::int64_t package;
    std::string md5;
    std::uint64_t size;
    std::string filename;
  };
  std::vector<Link> links;
  std::map<std::pair<std::size_t, std::int64_t>, hashdb::PackageRec> packages;
  std::map<std::pair<std::size_t, std::int64_t>, hashdb::OperatingSystemRec> oses;
  for (std::size_t s = 0; s < stores.size(); ++s) {
    for (const auto& os : stores[s]->operating_systems()) oses[{s, hashdb::value_of(os.os_id)}] = os;
    for (const auto& p : stores[s]->packages()) {
      packages[{s, hashdb::value_of(p.package_id)}] = p;
      for (const auto& l : stores[s]->links(p.package_id))
        links.push_back({s, hashdb::value_of(p.package_id), l.fingerprint.md5, l.fingerprint.size, l.filename});
    }
  }

  auto sorted = files;
  std::stable_sort(sorted.begin(), sorted.end(),
                   [](const OracleFile& a, const OracleFile& b) { return walk_order_less(a.path, b.path); });

  struct Acc {
    std::uint64_t occ = 0;
    std::set<std::pair<std::string, std::uint64_t>> fps;
    std::vector<std::string> files;
  };
  std::map<std::pair<std::size_t, std::int64_t>, Acc> acc;
  std::map<std::tuple<std::size_t, std::string, std::string>, std::uint64_t> os_occ;
  OracleTables t;

  for (const auto& f : sorted) {
    if (f.content.empty()) continue;
    const std::string md5 = md5_hex(f.content);
    const std::uint64_t size = f.content.size();
    bool matched = false;
    for (std::size_t s = 0; s < stores.size(); ++s) {
      std::set<std::pair<std::int64_t, std::string>> hits;
      for (const auto& l : links)
        if (l.store == s && l.md5 == md5 && l.size == size) hits.insert({l.package, l.filename});
      std::set<std::pair<std::string, std::string>> hit_oses;
      for (const auto& [pkg, filename] : hits) {
        matched = true;
        auto& a = acc[{s, pkg}];
        ++a.occ;
        a.fps.insert({md5, size});
        if (std::find(a.files.begin(), a.files.end(), f.path) == a.files.end()) a.files.push_back(f.path);
        const auto& os = oses.at({s, hashdb::value_of(packages.at({s, pkg}).os_ref)});
        hit_oses.insert({os.name, os.version});
      }
      for (const auto& [n, v] : hit_oses) ++os_occ[{s, n, v}];
    }
    if (matched)
      ++t.matched;
    else
      t.unmatched.push_back({f.path, size, md5});
  }

  for (const auto& [k, n] : os_occ)
    t.os_rows.push_back({std::get<1>(k), std::get<2>(k), n, stores[std::get<0>(k)]->name()});
  std::sort(t.os_rows.begin(), t.os_rows.end(), [&](const auto& a, const auto& b) {
    if (a.occurrences != b.occurrences) return a.occurrences > b.occurrences;
    if (a.os_name != b.os_name) return a.os_name < b.os_name;
    if (a.os_version != b.os_version) return a.os_version < b.os_version;
    auto rank = [&](const std::string& name) {
      for (std::size_t s = 0; s < stores.size(); ++s)
        if (stores[s]->name() == name) return s;
      return stores.size();
    };
    return rank(a.store_name) < rank(b.store_name);
  });

  for (const auto& [k, a] : acc) {
    const auto& p = packages.at(k);
    const auto& os = oses.at({k.first, hashdb::value_of(p.os_ref)});
    std::set<std::pair<std::string, std::uint64_t>> fp_all;
    for (const auto& l : links)
      if (l.store == k.first && l.package == k.second) fp_all.insert({l.md5, l.size});
    const double count = static_cast<double>(fp_all.size());
    matcher::PackageRow row;
    row.store_name = stores[k.first]->name();
    row.package_id = p.package_id;
    row.name = p.name;
    row.version = p.version;
    row.language = p.language;
    row.os_name = os.name;
    row.os_version = os.version;
    row.occurrences = a.occ;
    row.fingerprint_count = fp_all.size();
    row.occurrence_ratio_percent = static_cast<std::uint64_t>(std::round(100.0 * a.occ / count));
    row.coverage_percent = static_cast<std::uint64_t>(std::round(100.0 * a.fps.size() / count));
    row.matched_files = a.files;
    t.package_rows.push_back(row);
  }
  std::sort(t.package_rows.begin(), t.package_rows.end(), [&](const auto& a, const auto& b) {
    std::size_t ra = 0, rb = 0;
    for (std::size_t s = 0; s < stores.size(); ++s) {
      if (stores[s]->name() == a.store_name) ra = s;
      if (stores[s]->name() == b.store_name) rb = s;
    }
    if (ra != rb) return ra < rb;
    if (a.occurrences != b.occurrences) return a.occurrences > b.occurrences;
    if (a.name != b.name) return a.name < b.name;
    if (a.version != b.version) return a.version < b.version;
    return hashdb::value_of(a.package_id) < hashdb::value_of(b.package_id);
  });
  return t;
}

SyntheticCase make_synthetic_case(std::uint64_t seed, const fs::path& dir, std::size_t max_files) {
  std::mt19937_64 rng(seed);
  auto pick = [&](std::uint64_t n) { return static_cast<std::size_t>(rng() % n); };

  std::vector<std::string> pool(10 + pick(40));
  for (auto& content : pool) {
    content.resize(1 + pick(1500));
    for (auto& c : content) c = static_cast<char>(rng());
  }

  static const char* const kDirs[] = {"", "System", "System/Fonts", "Apps", "Apps/Tools", "Users/me", "Users/me/Docs"};
  SyntheticCase sc;
  const std::size_t n = 1 + pick(max_files);
  for (std::size_t i = 0; i < n; ++i) {
    const std::string d = kDirs[pick(std::size(kDirs))];
    const std::string path = (d.empty() ? "" : d + "/") + fmt::format("f{:03} {}", i, pick(4) == 0 ? "x" : "y");
    std::string content;
    const auto roll = pick(10);
    if (roll == 0) {
      content.clear();
    } else if (roll < 3) {
      content = fmt::format("unique {} {}", seed, i);
    } else {
      content = pool[pick(pool.size())];
    }
    sc.files.push_back({path, content});
    write_file(dir / "src" / path, content);
  }

  const std::size_t store_count = 1 + pick(2);
  for (std::size_t s = 0; s < store_count; ++s) {
    auto store = std::make_unique<hashdb::Store>(hashdb::Store::init(
        dir / fmt::format("store{}.db", s), {fmt::format("store{}", s), fmt::format("v{}", seed)}));
    std::vector<hashdb::OsId> oses;
    const std::size_t os_count = 1 + pick(3);
    for (std::size_t o = 0; o < os_count; ++o)
      oses.push_back(store->add_os(fmt::format("OS {}", o), fmt::format("{}.{}", 9 + o, pick(3))));
    const std::size_t pkg_count = 1 + pick(5);
    for (std::size_t p = 0; p < pkg_count; ++p) {
      const auto kind = p == 0 ? hashdb::PackageKind::OsBaseline : hashdb::PackageKind::Application;
      const auto id = store->add_package(fmt::format("Pkg {}", pick(3)), fmt::format("{}", p), p % 2 ? "fr" : "en",
                                         oses[pick(oses.size())], kind);
      const std::size_t link_count = 1 + pick(pool.size());
      for (std::size_t l = 0; l < link_count; ++l) {
        const auto& content = pool[pick(pool.size())];
        const hashdb::Fingerprint fp{md5_hex(content), content.size()};
        store->link_file(id, fp, fmt::format("file{}", pick(6)), fmt::format("p{}/file{}", p, l));
        // Same hash, different size: must never match.
        if (pick(8) == 0) store->link_file(id, {fp.md5, fp.size + 1}, "decoy", fmt::format("p{}/decoy{}", p, l));
      }
    }
    sc.stores.push_back(std::move(store));
  }
  return sc;
}

} // namespace rtriage::testing
