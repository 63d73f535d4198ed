#include <rtriage/report.hpp>

#include <rtriage/error.hpp>

#include <fmt/format.h>

#include <algorithm>
#include <fstream>

namespace rtriage::report {

using nlohmann::ordered_json;

std::uint64_t size_kib(std::uint64_t bytes) noexcept { return (bytes + 1023) / 1024; }

std::size_t page_count(std::size_t items, std::size_t page_size) {
  if (page_size == 0) raise(ErrorCode::InvalidArgument, "page size must be at least 1");
  return std::max<std::size_t>(1, (items + page_size - 1) / page_size);
}

std::string percent_encode_path(std::string_view path) {
  static constexpr char kHex[] = "0123456789ABCDEF";
  std::string out;
  out.reserve(path.size());
  for (const char ch : path) {
    const auto c = static_cast<unsigned char>(ch);
    const bool unreserved = (c >= 'A' && c <= 'Z') || (c >= 'a' && c <= 'z') || (c >= '0' && c <= '9') || c == '-' ||
                            c == '.' || c == '_' || c == '~';
    if (unreserved || c == '/') {
      out += ch;
    } else {
      out += '%';
      out += kHex[c >> 4];
      out += kHex[c & 0xF];
    }
  }
  return out;
}

ordered_json to_json_value(const matcher::AnalysisResult& r) {
  ordered_json databases = ordered_json::array();
  for (const auto& d : r.databases) databases.push_back({{"name", d.name}, {"version", d.version_label}});

  ordered_json unmatched = ordered_json::array();
  for (const auto& u : r.unmatched) unmatched.push_back({{"path", u.relative_path}, {"size", u.size}, {"md5", u.md5}});

  ordered_json read_errors = ordered_json::array();
  for (const auto& e : r.read_errors) read_errors.push_back({{"path", e.relative_path}, {"message", e.message}});

  ordered_json walk_issues = ordered_json::array();
  for (const auto& w : r.walk_issues) walk_issues.push_back({{"path", w.relative_path}, {"message", w.message}});

  ordered_json os_rows = ordered_json::array();
  for (const auto& o : r.os_rows)
    os_rows.push_back({{"os_name", o.os_name},
                       {"os_version", o.os_version},
                       {"occurrences", o.occurrences},
                       {"database", o.store_name}});

  ordered_json packages = ordered_json::array();
  for (const auto& p : r.package_rows)
    packages.push_back({{"database", p.store_name},
                        {"package_id", hashdb::value_of(p.package_id)},
                        {"name", p.name},
                        {"version", p.version},
                        {"language", p.language},
                        {"os_name", p.os_name},
                        {"os_version", p.os_version},
                        {"occurrence_ratio_percent", p.occurrence_ratio_percent},
                        {"coverage_percent", p.coverage_percent},
                        {"occurrences", p.occurrences},
                        {"fingerprint_count", p.fingerprint_count},
                        {"matched_files", p.matched_files}});

  const auto& c = r.counters;
  ordered_json doc;
  doc["analysis"] = {{"date", format_rfc3339(r.started_at)},
                     {"examiner", r.config.examiner},
                     {"source_name", r.config.source_name},
                     {"include_rsrc_projection", r.config.include_rsrc_projection},
                     {"databases", std::move(databases)}};
  doc["counters"] = {{"files_walked", c.files_walked},
                     {"zero_size_skipped", c.zero_size_skipped},
                     {"read_errors", c.read_errors},
                     {"matched_instances", c.matched_instances},
                     {"unmatched", c.unmatched}};
  doc["unmatched"] = std::move(unmatched);
  doc["read_errors"] = std::move(read_errors);
  doc["walk_issues"] = std::move(walk_issues);
  doc["os_detections"] = std::move(os_rows);
  doc["packages"] = std::move(packages);
  return doc;
}

std::string to_json(const matcher::AnalysisResult& result) {
  // Invalid UTF-8 in names is replaced rather than aborting the report.
  return to_json_value(result).dump(2, ' ', false, ordered_json::error_handler_t::replace) + "\n";
}

namespace {

std::string escape_html(std::string_view s) {
  std::string out;
  out.reserve(s.size());
  for (const char c : s) {
    switch (c) {
      case '&': out += "&amp;"; break;
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '"': out += "&quot;"; break;
      case '\'': out += "&#39;"; break;
      default: out += c;
    }
  }
  return out;
}

// '<' can only occur inside JSON strings, where a unicode escape is equivalent, so
// the block can never close the surrounding script element.
std::string script_safe(std::string_view json) {
  std::string out;
  out.reserve(json.size());
  for (const char c : json) {
    if (c == '<')
      out += "\\u003c";
    else
      out += c;
  }
  return out;
}

constexpr std::string_view kStyle = R"css(
body { font-family: sans-serif; margin: 2em; color: #222; }
table { border-collapse: collapse; margin: 0.5em 0 1.5em; }
th, td { border: 1px solid #bbb; padding: 0.25em 0.6em; text-align: left; vertical-align: top; }
th { background: #eee; }
td.num { text-align: right; }
.bar { display: inline-block; width: 8em; height: 0.8em; background: #ddd; margin-right: 0.4em; }
.bar > span { display: block; height: 100%; background: #4a7; }
.pager { margin-bottom: 2em; }
.note { font-style: italic; }
)css";

constexpr std::string_view kScript = R"js(
(function () {
  var data = JSON.parse(document.getElementById('report-data').textContent);
  var pageSize = Number(document.getElementById('unmatched').getAttribute('data-page-size'));
  var rows = data.unmatched;
  var pages = Math.max(1, Math.ceil(rows.length / pageSize));
  var current = 0;
  function encodePath(p) {
    return p.split('/').map(function (s) {
      return encodeURIComponent(s).replace(/[!'()*]/g, function (c) {
        return '%' + c.charCodeAt(0).toString(16).toUpperCase();
      });
    }).join('/');
  }
  function render() {
    var body = document.querySelector('#unmatched tbody');
    while (body.firstChild) body.removeChild(body.firstChild);
    rows.slice(current * pageSize, (current + 1) * pageSize).forEach(function (r) {
      var tr = document.createElement('tr');
      [encodePath(r.path), String(r.size), r.md5].forEach(function (v, i) {
        var td = document.createElement('td');
        if (i === 1) td.className = 'num';
        td.textContent = v;
        tr.appendChild(td);
      });
      body.appendChild(tr);
    });
    document.getElementById('page-label').textContent = 'Page ' + (current + 1) + ' / ' + pages;
    document.getElementById('prev').disabled = current === 0;
    document.getElementById('next').disabled = current >= pages - 1;
  }
  document.getElementById('prev').addEventListener('click', function () {
    if (current > 0) { current--; render(); }
  });
  document.getElementById('next').addEventListener('click', function () {
    if (current < pages - 1) { current++; render(); }
  });
  Array.prototype.forEach.call(document.querySelectorAll('button.toggle'), function (b) {
    b.addEventListener('click', function () {
      var target = document.getElementById(b.getAttribute('data-target'));
      target.hidden = !target.hidden;
    });
  });
  render();
})();
)js";

std::string render_html(const matcher::AnalysisResult& r, std::string_view json, std::size_t page_size) {
  const std::size_t pages = page_count(r.unmatched.size(), page_size);
  const auto source = escape_html(r.config.source_name);
  std::string h;
  auto out = std::back_inserter(h);

  fmt::format_to(out, "<!DOCTYPE html>\n<html lang=\"fr\">\n<head>\n<meta charset=\"utf-8\">\n");
  fmt::format_to(out, "<title>Rapport d'analyse de la source {}</title>\n<style>{}</style>\n</head>\n<body>\n", source,
                 kStyle);
  fmt::format_to(out, "<h1>Rapport d'analyse de la source {}</h1>\n", source);
  fmt::format_to(out,
                 "<p class=\"note\">Pour cette analyse, seuls ont été conservés les fichiers qui ne sont pas de "
                 "taille nulle.</p>\n");
  fmt::format_to(out, "<p><a id=\"json-link\" href=\"{}\">Lien vers JSON ({} Ko)</a></p>\n", kJsonFileName,
                 size_kib(json.size()));

  fmt::format_to(out, "<h2>Informations concernant l'analyse :</h2>\n<table id=\"analysis\">\n");
  fmt::format_to(out, "<tr><th>Date</th><td>{}</td></tr>\n", format_rfc3339(r.started_at));
  fmt::format_to(out, "<tr><th>Nom de la data source</th><td>{}</td></tr>\n", source);
  fmt::format_to(out, "<tr><th>Nom de l'examineur</th><td>{}</td></tr>\n", escape_html(r.config.examiner));
  fmt::format_to(out, "<tr><th>Resource fork projection</th><td>{}</td></tr>\n</table>\n",
                 r.config.include_rsrc_projection ? "yes" : "no");

  fmt::format_to(out, "<h3>Informations sur la(s) base(s) de données :</h3>\n<ul id=\"databases\">\n");
  for (const auto& d : r.databases)
    fmt::format_to(out, "<li>Base de données : {} | version : {}</li>\n", escape_html(d.name),
                   escape_html(d.version_label));
  fmt::format_to(out, "</ul>\n");

  const auto& c = r.counters;
  fmt::format_to(out, "<h3>Counters</h3>\n<table id=\"counters\">\n");
  const std::pair<std::string_view, std::uint64_t> counters[] = {{"files_walked", c.files_walked},
                                                                 {"zero_size_skipped", c.zero_size_skipped},
                                                                 {"read_errors", c.read_errors},
                                                                 {"matched_instances", c.matched_instances},
                                                                 {"unmatched", c.unmatched}};
  for (const auto& [name, value] : counters)
    fmt::format_to(out, "<tr><th>{}</th><td class=\"num\" data-counter=\"{}\">{}</td></tr>\n", name, name, value);
  fmt::format_to(out, "</table>\n");

  fmt::format_to(out, "<h2>Liste des fichiers sans correspondance :</h2>\n");
  fmt::format_to(out, "<table id=\"unmatched\" data-page-size=\"{}\">\n", page_size);
  fmt::format_to(out, "<thead><tr><th>Nom du fichier</th><th>Taille</th><th>Hash MD5</th></tr></thead>\n<tbody>\n");
  for (std::size_t i = 0; i < std::min(page_size, r.unmatched.size()); ++i) {
    const auto& u = r.unmatched[i];
    fmt::format_to(out, "<tr><td>{}</td><td class=\"num\">{}</td><td>{}</td></tr>\n",
                   percent_encode_path(u.relative_path), u.size, u.md5);
  }
  fmt::format_to(out, "</tbody>\n</table>\n");
  fmt::format_to(out,
                 "<div class=\"pager\"><button id=\"prev\" disabled>Précédent</button> "
                 "<span id=\"page-label\">Page 1 / {}</span> <button id=\"next\"{}>Suivant</button></div>\n",
                 pages, pages > 1 ? "" : " disabled");

  if (!r.read_errors.empty() || !r.walk_issues.empty()) {
    fmt::format_to(out, "<h2>Read errors</h2>\n<table id=\"read-errors\">\n");
    fmt::format_to(out, "<thead><tr><th>Path</th><th>Message</th></tr></thead>\n<tbody>\n");
    for (const auto& e : r.read_errors)
      fmt::format_to(out, "<tr><td>{}</td><td>{}</td></tr>\n", percent_encode_path(e.relative_path),
                     escape_html(e.message));
    for (const auto& w : r.walk_issues)
      fmt::format_to(out, "<tr><td>{}/</td><td>{}</td></tr>\n", percent_encode_path(w.relative_path),
                     escape_html(w.message));
    fmt::format_to(out, "</tbody>\n</table>\n");
  }

  fmt::format_to(out, "<h2>OS détectés par des correspondances sur la source :</h2>\n<table id=\"os-detections\">\n");
  fmt::format_to(out, "<thead><tr><th>Nom de l'OS</th><th>Version</th><th># occurrences</th>"
                      "<th>Base de données</th></tr></thead>\n<tbody>\n");
  for (const auto& o : r.os_rows)
    fmt::format_to(out, "<tr><td>{}</td><td>{}</td><td class=\"num\">{}</td><td>{}</td></tr>\n",
                   escape_html(o.os_name), escape_html(o.os_version), o.occurrences, escape_html(o.store_name));
  fmt::format_to(out, "</tbody>\n</table>\n");

  fmt::format_to(out, "<h2>Correspondances avec des packages connus :</h2>\n");
  for (std::size_t s = 0; s < r.databases.size(); ++s) {
    const auto& store = r.databases[s].name;
    fmt::format_to(out, "<h3>Correspondances détectées dans la base de données : {}</h3>\n", escape_html(store));
    fmt::format_to(out, "<table class=\"packages\" data-database=\"{}\">\n", escape_html(store));
    fmt::format_to(out, "<thead><tr><th>ID</th><th>Nom du package</th><th>Version</th><th>Langue</th><th>OS</th>"
                        "<th>% de correspondance</th><th># occurrences</th><th>Détails</th></tr></thead>\n<tbody>\n");
    for (const auto& p : r.package_rows) {
      if (p.store_name != store) continue;
      const auto id = hashdb::value_of(p.package_id);
      const auto target = fmt::format("files-{}-{}", s, id);
      const auto os = p.os_version.empty() ? p.os_name : fmt::format("{} {}", p.os_name, p.os_version);
      fmt::format_to(out, "<tr><td>{}</td><td>{}</td><td>{}</td><td>{}</td><td>{}</td>", id, escape_html(p.name),
                     escape_html(p.version), escape_html(p.language), escape_html(os));
      fmt::format_to(out,
                     "<td><span class=\"bar\"><span style=\"width: {}%\"></span></span>"
                     "<span class=\"pct\">{}%</span></td>",
                     std::min<std::uint64_t>(p.occurrence_ratio_percent, 100), p.occurrence_ratio_percent);
      fmt::format_to(out,
                     "<td class=\"num\">{}</td><td><button class=\"toggle\" data-target=\"{}\">"
                     "Afficher/Masquer les fichiers</button></td></tr>\n",
                     p.occurrences, target);
      fmt::format_to(out, "<tr class=\"files\" id=\"{}\" hidden><td colspan=\"8\"><ul>\n", target);
      for (const auto& f : p.matched_files) fmt::format_to(out, "<li>{}</li>\n", percent_encode_path(f));
      fmt::format_to(out, "</ul></td></tr>\n");
    }
    fmt::format_to(out, "</tbody>\n</table>\n");
  }

  fmt::format_to(out, "<script type=\"application/json\" id=\"report-data\">{}</script>\n", script_safe(json));
  fmt::format_to(out, "<script>{}</script>\n</body>\n</html>\n", kScript);
  return h;
}

} // namespace

std::string to_html(const matcher::AnalysisResult& result, std::size_t page_size) {
  return render_html(result, to_json(result), page_size);
}

ReportDocument render(const matcher::AnalysisResult& result, std::size_t page_size) {
  ReportDocument doc;
  doc.json_bytes = to_json(result);
  doc.json_size_kib = size_kib(doc.json_bytes.size());
  doc.html_bytes = render_html(result, doc.json_bytes, page_size);
  return doc;
}

void write_report(const ReportDocument& doc, const std::filesystem::path& dir) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) raise(ErrorCode::IoError, fmt::format("cannot create '{}': {}", dir.string(), ec.message()));
  for (const auto& [name, bytes] : {std::pair{kJsonFileName, &doc.json_bytes}, std::pair{kHtmlFileName, &doc.html_bytes}}) {
    const auto path = dir / name;
    std::ofstream f(path, std::ios::binary | std::ios::trunc);
    f.write(bytes->data(), static_cast<std::streamsize>(bytes->size()));
    f.close();
    if (!f) raise(ErrorCode::IoError, fmt::format("cannot write '{}'", path.string()));
  }
}

} // namespace rtriage::report
