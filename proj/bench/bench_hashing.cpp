#include <rtriage/digest.hpp>
#include <rtriage/hashdb.hpp>
#include <rtriage/matcher.hpp>
#include <rtriage/vfs.hpp>

#include <benchmark/benchmark.h>

#include <fmt/format.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <memory>
#include <random>

namespace {

namespace fs = std::filesystem;
using namespace rtriage;

// One shared corpus: 2,000 files of 4 KiB, half of them known to the store.
struct Corpus {
  fs::path root;
  std::unique_ptr<hashdb::Store> store;
  std::unique_ptr<vfs::Source> source;
  std::vector<vfs::FileEntry> files;

  Corpus() {
    char tmpl[] = "/tmp/rtriage-bench-XXXXXX";
    root = mkdtemp(tmpl);
    store = std::make_unique<hashdb::Store>(hashdb::Store::init(root / "s.db", {"bench", "1"}));
    const auto os = store->add_os("OS", "1");
    const auto pkg = store->add_package("P", "1", "en", os, hashdb::PackageKind::Application);
    std::mt19937_64 rng(7);
    store->transaction([&] {
      for (int i = 0; i < 2000; ++i) {
        std::string content(4096, '\0');
        for (auto& c : content) c = static_cast<char>(rng());
        const auto path = root / "src" / fmt::format("d{:02}", i % 20) / fmt::format("f{:04}", i);
        fs::create_directories(path.parent_path());
        std::ofstream(path, std::ios::binary) << content;
        if (i % 2 == 0) store->link_file(pkg, {md5_hex(content), content.size()}, "f", path.filename().string());
      }
    });
    source = std::make_unique<vfs::Source>(vfs::open_source(root / "src"));
    for (const auto& e : vfs::entries_of(source->walk({})))
      if (e.is_file()) files.push_back(e);
  }
  ~Corpus() { fs::remove_all(root); }
};

Corpus& corpus() {
  static Corpus c;
  return c;
}

void BM_HashLookupSerial(benchmark::State& state) {
  auto& c = corpus();
  const std::vector<const hashdb::Store*> stores{c.store.get()};
  for (auto _ : state) benchmark::DoNotOptimize(matcher::process_serial(*c.source, c.files, stores));
  state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(c.files.size()));
}

void BM_HashLookupParallel(benchmark::State& state) {
  auto& c = corpus();
  const std::vector<const hashdb::Store*> stores{c.store.get()};
  const auto workers = static_cast<unsigned>(state.range(0));
  for (auto _ : state) benchmark::DoNotOptimize(matcher::process_parallel(*c.source, c.files, stores, workers));
  state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(c.files.size()));
}

} // namespace

BENCHMARK(BM_HashLookupSerial)->UseRealTime()->Unit(benchmark::kMillisecond);
BENCHMARK(BM_HashLookupParallel)->Arg(1)->Arg(2)->Arg(4)->Arg(8)->UseRealTime()->Unit(benchmark::kMillisecond);

BENCHMARK_MAIN();
