#include "fractrace/io.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>
#include <vector>

#include <nlohmann/json.hpp>

#include "fractrace/error.hpp"

namespace fractrace {
namespace {

using nlohmann::json;

std::vector<std::string> SplitCsv(const std::string& line) {
  std::vector<std::string> out;
  std::string cell;
  std::istringstream is(line);
  while (std::getline(is, cell, ',')) out.push_back(cell);
  if (!line.empty() && line.back() == ',') out.emplace_back();
  return out;
}

double ParseNumber(const std::string& s, int line) {
  try {
    std::size_t used = 0;
    const double v = std::stod(s, &used);
    if (used != s.size()) throw std::invalid_argument(s);
    return v;
  } catch (const std::exception&) {
    throw Error(ErrorCode::kInput, "line " + std::to_string(line) +
                                       ": not a number: '" + s + "'");
  }
}

Word ParseWord(const std::string& s, int line) {
  std::vector<int> letters;
  if (s.empty()) return Word();
  std::istringstream is(s);
  std::string part;
  while (std::getline(is, part, '.')) {
    const double v = ParseNumber(part, line);
    if (v < 1 || v != static_cast<int>(v)) {
      throw Error(ErrorCode::kInput,
                  "line " + std::to_string(line) + ": bad address letter");
    }
    letters.push_back(static_cast<int>(v) - 1);
  }
  return Word(std::move(letters));
}

json CoordJson(Coord c, int dim) {
  return dim == 2 ? json::array({c.x, c.y}) : json::array({c.x});
}

Coord CoordFromJson(const json& j) {
  if (!j.is_array() || j.empty() || j.size() > 2) {
    throw Error(ErrorCode::kInput, "point must be an array of 1 or 2 numbers");
  }
  Coord c;
  c.x = j[0].get<double>();
  if (j.size() == 2) c.y = j[1].get<double>();
  return c;
}

}  // namespace

std::string FormatNumber(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

void WriteMeasureCsv(std::ostream& out, const DiscreteMeasure& mu, int dim) {
  out << (dim == 2 ? "x,y,weight,address,anchor_x,anchor_y\n"
                   : "x,weight,address,anchor_x\n");
  for (const Atom& a : mu.atoms()) {
    const Coord c = a.point.coords;
    out << FormatNumber(c.x);
    if (dim == 2) out << ',' << FormatNumber(c.y);
    out << ',' << FormatNumber(a.weight) << ',';
    if (a.point.address) {
      out << a.point.address->word.ToString() << ','
          << FormatNumber(a.point.address->anchor.x);
      if (dim == 2) out << ',' << FormatNumber(a.point.address->anchor.y);
    } else {
      out << "-,";
      if (dim == 2) out << ',';
    }
    out << '\n';
  }
}

DiscreteMeasure ReadMeasureCsv(std::istream& in, int dim) {
  const std::size_t columns = dim == 2 ? 6 : 4;
  std::string line;
  int number = 0;
  DiscreteMeasure mu;
  while (std::getline(in, line)) {
    ++number;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty() || line[0] == '#') continue;
    if (number == 1 && line.rfind("x,", 0) == 0) continue;
    const std::vector<std::string> cells = SplitCsv(line);
    if (cells.size() != columns && cells.size() != columns - (dim == 2 ? 3 : 2)) {
      throw Error(ErrorCode::kInput, "line " + std::to_string(number) + ": expected " +
                                         std::to_string(columns) + " columns");
    }
    Point p;
    p.coords.x = ParseNumber(cells[0], number);
    std::size_t k = 1;
    if (dim == 2) p.coords.y = ParseNumber(cells[k++], number);
    const double w = ParseNumber(cells[k++], number);
    if (cells.size() == columns && cells[k] != "-") {
      Itinerary it;
      it.word = ParseWord(cells[k], number);
      it.anchor.x = ParseNumber(cells[k + 1], number);
      if (dim == 2) it.anchor.y = ParseNumber(cells[k + 2], number);
      p.address = std::move(it);
    }
    mu.Add(p, w);
  }
  return mu;
}

void SaveMeasureCsv(const std::filesystem::path& path, const DiscreteMeasure& mu,
                    int dim) {
  std::ostringstream os;
  WriteMeasureCsv(os, mu, dim);
  WriteFile(path, os.str());
}

DiscreteMeasure LoadMeasureCsv(const std::filesystem::path& path, int dim) {
  std::istringstream is(ReadFile(path));
  return ReadMeasureCsv(is, dim);
}

void SaveLevelMeasures(const std::filesystem::path& dir, const LevelMeasures& lm,
                       const SelfSimilarSystem& system) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) throw Error(ErrorCode::kInput, "cannot create " + dir.string());
  json manifest;
  manifest["system"] = system.name();
  manifest["system_hash"] = system.DefinitionHash();
  manifest["dim"] = system.dim();
  manifest["max_level"] = lm.max_level();
  manifest["metric_slack"] = lm.metric_slack;
  manifest["atom_slack"] = lm.atom_slack;
  json files = json::array();
  for (std::size_t i = 0; i < lm.levels.size(); ++i) {
    const std::string name = "level_" + std::to_string(i) + ".csv";
    SaveMeasureCsv(dir / name, lm.levels[i], system.dim());
    files.push_back(name);
  }
  manifest["levels"] = files;
  WriteFile(dir / "manifest.json", manifest.dump(2) + "\n");
}

LevelMeasures LoadLevelMeasures(const std::filesystem::path& dir,
                                const SelfSimilarSystem& system) {
  json manifest;
  try {
    manifest = json::parse(ReadFile(dir / "manifest.json"));
  } catch (const json::exception& e) {
    throw Error(ErrorCode::kInput, "manifest: " + std::string(e.what()));
  }
  if (manifest.value("system_hash", "") != system.DefinitionHash()) {
    throw Error(ErrorCode::kInput, "level measures in " + dir.string() +
                                       " belong to a different system");
  }
  LevelMeasures lm;
  lm.metric_slack = manifest.value("metric_slack", 0.0);
  lm.atom_slack = manifest.value("atom_slack", 0.0);
  for (const json& f : manifest.at("levels")) {
    lm.levels.push_back(LoadMeasureCsv(dir / f.get<std::string>(), system.dim()));
  }
  return lm;
}

std::string TraceCoefficientsToJson(const TraceCoefficients& tc, int dim) {
  json j;
  json discrete = json::array();
  for (const DiscreteCoefficient& d : tc.discrete) {
    discrete.push_back({{"b", CoordJson(d.b.coords, dim)}, {"r", d.r}, {"c", d.c}});
  }
  j["discrete"] = discrete;
  j["c_inf"] = tc.c_inf;
  j["unit_value"] = tc.unit_value;
  return j.dump(2);
}

TraceCoefficients ParseTraceCoefficients(std::string_view text) {
  TraceCoefficients tc;
  try {
    const json j = json::parse(text);
    for (const json& d : j.at("discrete")) {
      tc.discrete.push_back(
          {Point(CoordFromJson(d.at("b"))), d.at("r").get<int>(), d.at("c").get<double>()});
    }
    tc.c_inf = j.value("c_inf", 0.0);
    tc.unit_value = j.value("unit_value", 0.0);
  } catch (const json::exception& e) {
    throw Error(ErrorCode::kInput, "trace coefficients: " + std::string(e.what()));
  }
  return tc;
}

std::string ReadFile(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::kInput, "cannot read " + path.string());
  std::ostringstream os;
  os << in.rdbuf();
  return os.str();
}

void WriteFile(const std::filesystem::path& path, std::string_view text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorCode::kInput, "cannot write " + path.string());
  out << text;
  if (!out) throw Error(ErrorCode::kInput, "write failed for " + path.string());
}

}  // namespace fractrace
