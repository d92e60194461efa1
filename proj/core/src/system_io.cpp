#include "fractrace/system_io.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>

#include "fractrace/error.hpp"

#define TOML_EXCEPTIONS 1
#include "toml.hpp"

namespace fractrace {
namespace {

double AsDouble(const toml::node& node, const std::string& what) {
  if (auto v = node.value<double>()) return *v;
  throw Error(ErrorCode::kInput, "expected a number for " + what);
}

Coord ParseCoord(const toml::node* node, int dim, const std::string& what) {
  const toml::array* arr = node ? node->as_array() : nullptr;
  if (!arr || static_cast<int>(arr->size()) != dim) {
    throw Error(ErrorCode::kInput,
                what + " must be an array of " + std::to_string(dim) + " numbers");
  }
  Coord c;
  c.x = AsDouble(*arr->get(0), what);
  if (dim == 2) c.y = AsDouble(*arr->get(1), what);
  return c;
}

std::vector<Coord> ParseCoordList(const toml::node* node, int dim,
                                  const std::string& what) {
  std::vector<Coord> out;
  if (!node) return out;
  const toml::array* arr = node->as_array();
  if (!arr) throw Error(ErrorCode::kInput, what + " must be an array");
  for (const toml::node& item : *arr) out.push_back(ParseCoord(&item, dim, what));
  return out;
}

std::string Num(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  std::string s = buf;
  if (s.find_first_of(".eEn") == std::string::npos) s += ".0";
  return s;
}

std::string CoordText(Coord c, int dim) {
  return dim == 1 ? "[" + Num(c.x) + "]"
                  : "[" + Num(c.x) + ", " + Num(c.y) + "]";
}

}  // namespace

SystemDefinition ParseSystemToml(std::string_view text) {
  toml::table table;
  try {
    table = toml::parse(text);
  } catch (const toml::parse_error& e) {
    throw Error(ErrorCode::kInput, std::string("TOML parse error: ") +
                                       std::string(e.description()));
  }
  SystemDefinition def;
  def.name = table["name"].value_or(std::string("custom"));
  def.dim = static_cast<int>(table["dim"].value_or(1));
  if (def.dim != 1 && def.dim != 2) {
    throw Error(ErrorCode::kInput, "dim must be 1 or 2");
  }
  def.region = ParseCoordList(table.get("region"), def.dim, "region");
  def.base_point = ParseCoord(table.get("base_point"), def.dim, "base_point");
  if (table.contains("generic_point")) {
    def.generic_point =
        ParseCoord(table.get("generic_point"), def.dim, "generic_point");
  }
  if (auto d = table["diam"].value<double>()) def.diam = *d;
  def.declared_branch_set =
      ParseCoordList(table.get("branch_set"), def.dim, "branch_set");

  const toml::array* maps = table["map"].as_array();
  if (!maps) throw Error(ErrorCode::kInput, "missing [[map]] entries");
  for (const toml::node& node : *maps) {
    const toml::table* m = node.as_table();
    if (!m) throw Error(ErrorCode::kInput, "[[map]] must be a table");
    const toml::array* lin = (*m)["linear"].as_array();
    const Coord offset = ParseCoord(m->get("offset"), def.dim, "map.offset");
    if (def.dim == 1) {
      if (!lin || lin->size() != 1) {
        throw Error(ErrorCode::kInput, "1D map.linear must hold one number");
      }
      def.maps.push_back(ContractionMap::Affine1D(
          AsDouble(*lin->get(0), "map.linear"), offset.x));
    } else {
      if (!lin || lin->size() != 4) {
        throw Error(ErrorCode::kInput, "2D map.linear must hold four numbers");
      }
      std::array<double, 4> a{};
      for (int k = 0; k < 4; ++k) a[k] = AsDouble(*lin->get(k), "map.linear");
      def.maps.emplace_back(a, offset);
    }
  }

  if (const toml::array* cells = table["cell"].as_array()) {
    for (const toml::node& node : *cells) {
      const toml::table* c = node.as_table();
      if (!c) throw Error(ErrorCode::kInput, "[[cell]] must be a table");
      Cell cell;
      const auto branch = (*c)["branch"].value<int64_t>();
      if (!branch) throw Error(ErrorCode::kInput, "cell.branch missing");
      cell.branch = static_cast<int>(*branch) - 1;
      if (def.dim == 1) {
        const toml::array* iv = (*c)["interval"].as_array();
        if (!iv || iv->size() != 2) {
          throw Error(ErrorCode::kInput, "cell.interval must be [lo, hi]");
        }
        cell.lo = AsDouble(*iv->get(0), "cell.interval");
        cell.hi = AsDouble(*iv->get(1), "cell.interval");
      } else {
        const auto tri = ParseCoordList(c->get("triangle"), 2, "cell.triangle");
        if (tri.size() != 3) {
          throw Error(ErrorCode::kInput, "cell.triangle needs three vertices");
        }
        cell.triangle = {tri[0], tri[1], tri[2]};
      }
      def.cells.push_back(cell);
    }
  }
  if (def.cells.empty()) throw Error(ErrorCode::kInput, "missing [[cell]] entries");
  return def;
}

std::string SystemToToml(const SystemDefinition& def) {
  std::ostringstream out;
  out << "name = \"" << def.name << "\"\n";
  out << "dim = " << def.dim << "\n";
  out << "region = [";
  for (std::size_t i = 0; i < def.region.size(); ++i) {
    out << (i ? ", " : "") << CoordText(def.region[i], def.dim);
  }
  out << "]\n";
  out << "base_point = " << CoordText(def.base_point, def.dim) << "\n";
  if (def.generic_point) {
    out << "generic_point = " << CoordText(*def.generic_point, def.dim) << "\n";
  }
  if (def.diam) out << "diam = " << Num(*def.diam) << "\n";
  if (!def.declared_branch_set.empty()) {
    out << "branch_set = [";
    for (std::size_t i = 0; i < def.declared_branch_set.size(); ++i) {
      out << (i ? ", " : "") << CoordText(def.declared_branch_set[i], def.dim);
    }
    out << "]\n";
  }
  for (const ContractionMap& m : def.maps) {
    out << "\n[[map]]\n";
    if (def.dim == 1) {
      out << "linear = [" << Num(m.linear()[0]) << "]\n";
    } else {
      out << "linear = [" << Num(m.linear()[0]) << ", " << Num(m.linear()[1])
          << ", " << Num(m.linear()[2]) << ", " << Num(m.linear()[3]) << "]\n";
    }
    out << "offset = " << CoordText(m.offset(), def.dim) << "\n";
  }
  for (const Cell& c : def.cells) {
    out << "\n[[cell]]\nbranch = " << c.branch + 1 << "\n";
    if (def.dim == 1) {
      out << "interval = [" << Num(c.lo) << ", " << Num(c.hi) << "]\n";
    } else {
      out << "triangle = [" << CoordText(c.triangle[0], 2) << ", "
          << CoordText(c.triangle[1], 2) << ", " << CoordText(c.triangle[2], 2)
          << "]\n";
    }
  }
  return out.str();
}

SystemPtr LoadSystem(const std::string& name_or_path) {
  if (SystemPtr builtin = BuiltinSystem(name_or_path)) return builtin;
  std::ifstream in(name_or_path);
  if (!in) {
    throw Error(ErrorCode::kInput,
                "unknown system '" + name_or_path +
                    "' (not a built-in name and not a readable file)");
  }
  std::stringstream buffer;
  buffer << in.rdbuf();
  return MakeSystem(ParseSystemToml(buffer.str()));
}

}  // namespace fractrace
