#include "coedit/networks.hpp"

#include "coedit/error.hpp"
#include "coedit/util.hpp"

#include <json.hpp>

#include <charconv>
#include <fstream>

namespace coedit {

std::vector<EdgeRow> edge_rows(const std::vector<TemporalEdge> &edges) {
  std::vector<EdgeRow> rows;
  rows.reserve(edges.size());
  for (const auto &e : edges) rows.push_back({e.source, e.target, e.timestamp, e.weight});
  return rows;
}

std::vector<EdgeRow> edge_rows(const StaticGraph &g) {
  std::vector<EdgeRow> rows;
  for (const auto &[key, w] : g.edges) rows.push_back({key.first, key.second, std::nullopt, w});
  return rows;
}

std::vector<EdgeRow> edge_rows(const CommitDag &dag) {
  std::vector<EdgeRow> rows;
  for (const auto &[a, b] : dag.edges) rows.push_back({a, b, std::nullopt, 1.0});
  return rows;
}

std::vector<EdgeRow> edge_rows(const std::vector<LineEditDag> &dags) {
  std::vector<EdgeRow> rows;
  for (const auto &d : dags) {
    for (const auto &[a, b] : d.edges) rows.push_back({a, b, d.node(b)->timestamp, 1.0});
  }
  return rows;
}

ExportFormat export_format_from_string(const std::string &s) {
  if (s == "csv") return ExportFormat::Csv;
  if (s == "html") return ExportFormat::Html;
  throw Error(ErrorKind::InvalidArgument, "unknown export format '" + s + "'");
}

std::string render_csv(const std::vector<EdgeRow> &rows) {
  std::string out = "source,target,timestamp,weight\n";
  for (const auto &r : rows) {
    out += csv_field(r.source);
    out += ',';
    out += csv_field(r.target);
    out += ',';
    if (r.timestamp) out += std::to_string(*r.timestamp);
    out += ',';
    out += format_double(r.weight);
    out += '\n';
  }
  return out;
}

namespace {

constexpr const char *kHtmlHead = R"html(<!DOCTYPE html>
<html><head><meta charset="utf-8"><title>)html";

// A small spring embedder; no external scripts so the file works offline.
constexpr const char *kHtmlBody = R"html(</title>
<style>
body{font-family:sans-serif;margin:0}
svg{width:100vw;height:92vh;display:block}
line{stroke:#999;stroke-opacity:.7}
circle{fill:#3b6ea5;stroke:#fff;stroke-width:1.5}
text{font-size:11px;fill:#333}
#info{padding:6px 10px;font-size:13px}
</style></head><body>
<div id="info"></div>
<svg id="view"><defs><marker id="arrow" viewBox="0 -4 8 8" refX="14" markerWidth="7" markerHeight="7" orient="auto"><path d="M0,-4L8,0L0,4" fill="#999"/></marker></defs></svg>
<script id="graph-data" type="application/json">)html";

constexpr const char *kHtmlTail = R"html(</script>
<script>
(function(){
const data = JSON.parse(document.getElementById('graph-data').textContent);
const svg = document.getElementById('view');
const W = svg.clientWidth || 960, H = svg.clientHeight || 640;
const ids = new Map();
data.edges.forEach(e => { [e.source, e.target].forEach(n => { if (!ids.has(n)) ids.set(n, ids.size); }); });
const nodes = Array.from(ids.keys()).map((id, i) => ({id, x: W/2 + 200*Math.cos(i), y: H/2 + 200*Math.sin(i), vx: 0, vy: 0}));
const links = data.edges.map(e => ({s: nodes[ids.get(e.source)], t: nodes[ids.get(e.target)], w: e.weight}));
document.getElementById('info').textContent = nodes.length + ' nodes, ' + links.length + ' edges';
for (let it = 0; it < 300; ++it) {
  const k = 1 - it / 300;
  for (let i = 0; i < nodes.length; ++i) for (let j = i + 1; j < nodes.length; ++j) {
    const a = nodes[i], b = nodes[j];
    let dx = a.x - b.x, dy = a.y - b.y, d2 = dx*dx + dy*dy + 0.01;
    const f = 800 / d2;
    a.vx += dx*f; a.vy += dy*f; b.vx -= dx*f; b.vy -= dy*f;
  }
  links.forEach(l => {
    const dx = l.t.x - l.s.x, dy = l.t.y - l.s.y, d = Math.sqrt(dx*dx + dy*dy) + 0.01;
    const f = (d - 80) * 0.02;
    l.s.vx += dx/d*f; l.s.vy += dy/d*f; l.t.vx -= dx/d*f; l.t.vy -= dy/d*f;
  });
  nodes.forEach(n => {
    n.vx += (W/2 - n.x) * 0.002; n.vy += (H/2 - n.y) * 0.002;
    n.x += Math.max(-20, Math.min(20, n.vx)) * k; n.y += Math.max(-20, Math.min(20, n.vy)) * k;
    n.vx *= 0.5; n.vy *= 0.5;
  });
}
const NS = 'http://www.w3.org/2000/svg';
links.forEach(l => {
  const e = document.createElementNS(NS, 'line');
  e.setAttribute('x1', l.s.x); e.setAttribute('y1', l.s.y);
  e.setAttribute('x2', l.t.x); e.setAttribute('y2', l.t.y);
  e.setAttribute('stroke-width', 1 + Math.log1p(l.w));
  if (data.directed) e.setAttribute('marker-end', 'url(#arrow)');
  svg.appendChild(e);
});
nodes.forEach(n => {
  const c = document.createElementNS(NS, 'circle');
  c.setAttribute('cx', n.x); c.setAttribute('cy', n.y); c.setAttribute('r', 6);
  const t = document.createElementNS(NS, 'title'); t.textContent = n.id; c.appendChild(t);
  svg.appendChild(c);
  const label = document.createElementNS(NS, 'text');
  label.setAttribute('x', n.x + 8); label.setAttribute('y', n.y + 4); label.textContent = n.id;
  svg.appendChild(label);
});
})();
</script></body></html>
)html";


} // namespace

std::string render_html(const std::vector<EdgeRow> &rows, bool directed, const std::string &title) {
  nlohmann::json data;
  data["directed"] = directed;
  auto edges = nlohmann::json::array();
  for (const auto &r : rows) {
    nlohmann::json e = {{"source", r.source}, {"target", r.target}, {"weight", r.weight}};
    if (r.timestamp) e["timestamp"] = *r.timestamp;
    edges.push_back(std::move(e));
  }
  data["edges"] = std::move(edges);
  // "</" inside the JSON would terminate the script element
  std::string json = data.dump();
  std::string safe;
  for (std::size_t i = 0; i < json.size(); ++i) {
    if (json[i] == '<' && i + 1 < json.size() && json[i + 1] == '/') safe += "<\\";
    else safe.push_back(json[i]);
  }
  return std::string(kHtmlHead) + html_escape(title) + kHtmlBody + safe + kHtmlTail;
}

void export_graph(const std::vector<EdgeRow> &rows, bool directed, ExportFormat format,
                  const std::filesystem::path &out, const std::string &title) {
  std::ofstream f(out, std::ios::binary | std::ios::trunc);
  if (!f) throw Error(ErrorKind::InvalidArgument, "cannot write " + out.string());
  f << (format == ExportFormat::Csv ? render_csv(rows) : render_html(rows, directed, title));
  if (!f) throw Error(ErrorKind::InvalidArgument, "write failed for " + out.string());
}

std::vector<EdgeRow> parse_edge_csv(std::string_view text) {
  auto table = parse_csv(text);
  if (table.empty()) return {};
  const auto &header = table.front();
  if (header != std::vector<std::string>{"source", "target", "timestamp", "weight"})
    throw Error(ErrorKind::InvalidArgument, "not an edge list: unexpected header");
  std::vector<EdgeRow> rows;
  for (std::size_t i = 1; i < table.size(); ++i) {
    const auto &row = table[i];
    if (row.size() != 4)
      throw Error(ErrorKind::InvalidArgument, "edge list row " + std::to_string(i) + " malformed");
    EdgeRow r;
    r.source = row[0];
    r.target = row[1];
    if (!row[2].empty()) r.timestamp = std::stoll(row[2]);
    auto [p, ec] = std::from_chars(row[3].data(), row[3].data() + row[3].size(), r.weight);
    if (ec != std::errc())
      throw Error(ErrorKind::InvalidArgument, "bad weight '" + row[3] + "'");
    rows.push_back(std::move(r));
  }
  return rows;
}

StaticGraph graph_from_rows(const std::vector<EdgeRow> &rows, bool directed) {
  StaticGraph g;
  g.directed = directed;
  for (const auto &r : rows) g.add_edge(r.source, r.target, r.weight);
  return g;
}

} // namespace coedit
