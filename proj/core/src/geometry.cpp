#include "fractrace/geometry.hpp"

#include <algorithm>
#include <cmath>

#include "fractrace/error.hpp"

namespace fractrace {

std::string_view ErrorCodeName(ErrorCode code) {
  switch (code) {
    case ErrorCode::kInput: return "InputError";
    case ErrorCode::kCellAmbiguity: return "CellAmbiguity";
    case ErrorCode::kBranchSetNotFinite: return "BranchSetNotFinite";
    case ErrorCode::kPostcriticalNotFinite: return "PostcriticalNotFinite";
    case ErrorCode::kOrbitMeetsBranchSet: return "OrbitMeetsBranchSet";
    case ErrorCode::kSupportExplosion: return "SupportExplosion";
    case ErrorCode::kMassMismatch: return "MassMismatch";
    case ErrorCode::kDegenerateInput: return "DegenerateInput";
    case ErrorCode::kLevelMismatch: return "LevelMismatch";
    case ErrorCode::kInsufficientMembers: return "InsufficientMembers";
    case ErrorCode::kAtomInExclusionWindow: return "AtomInExclusionWindow";
    case ErrorCode::kNotTracial: return "NotTracial";
    case ErrorCode::kUnequalOrbitMasses: return "UnequalOrbitMasses";
    case ErrorCode::kNegativeResidual: return "NegativeResidual";
    case ErrorCode::kBetaTooSmall: return "BetaTooSmall";
  }
  return "UnknownError";
}

double Distance(Coord a, Coord b) { return std::hypot(a.x - b.x, a.y - b.y); }

double Norm(Coord a) { return std::hypot(a.x, a.y); }

Word Word::Prepend(int letter) const {
  std::vector<int> out;
  out.reserve(letters_.size() + 1);
  out.push_back(letter);
  out.insert(out.end(), letters_.begin(), letters_.end());
  return Word(std::move(out));
}

Word Word::Concat(const Word& tail) const {
  std::vector<int> out = letters_;
  out.insert(out.end(), tail.letters_.begin(), tail.letters_.end());
  return Word(std::move(out));
}

Word Word::DropFront(std::size_t k) const {
  if (k >= letters_.size()) return Word();
  return Word(std::vector<int>(letters_.begin() + static_cast<long>(k),
                               letters_.end()));
}

std::string Word::ToString() const {
  std::string s;
  for (std::size_t i = 0; i < letters_.size(); ++i) {
    if (i > 0) s += '.';
    s += std::to_string(letters_[i] + 1);
  }
  return s;
}

std::vector<Word> AllWords(int alphabet_size, int length) {
  std::vector<Word> words{Word()};
  for (int k = 0; k < length; ++k) {
    std::vector<Word> next;
    next.reserve(words.size() * static_cast<std::size_t>(alphabet_size));
    for (const Word& w : words) {
      for (int j = 0; j < alphabet_size; ++j) {
        std::vector<int> letters = w.letters();
        letters.push_back(j);
        next.emplace_back(std::move(letters));
      }
    }
    words = std::move(next);
  }
  return words;
}

ContractionMap::ContractionMap(std::array<double, 4> linear, Coord offset)
    : linear_(linear), offset_(offset) {
  // Singular values of [[a b][c d]].
  const double a = linear[0], b = linear[1], c = linear[2], d = linear[3];
  const double s1 = a * a + b * b + c * c + d * d;
  const double det = a * d - b * c;
  const double disc = std::sqrt(std::max(0.0, s1 * s1 - 4.0 * det * det));
  upper_ = std::sqrt(0.5 * (s1 + disc));
  lower_ = std::sqrt(std::max(0.0, 0.5 * (s1 - disc)));
}

ContractionMap ContractionMap::Affine1D(double slope, double offset) {
  ContractionMap m({slope, 0.0, 0.0, 0.0}, Coord{offset, 0.0});
  m.upper_ = std::abs(slope);
  m.lower_ = std::abs(slope);
  return m;
}

ContractionMap ContractionMap::FromTriangles(std::array<Coord, 3> from,
                                             std::array<Coord, 3> to) {
  // Solve L (from_k - from_0) = to_k - to_0 for k = 1, 2.
  const Coord u1 = from[1] - from[0], u2 = from[2] - from[0];
  const Coord v1 = to[1] - to[0], v2 = to[2] - to[0];
  const double det = u1.x * u2.y - u2.x * u1.y;
  if (std::abs(det) < 1e-300) {
    throw Error(ErrorCode::kInput, "degenerate source triangle");
  }
  // L = V U^{-1}
  const double i11 = u2.y / det, i12 = -u2.x / det;
  const double i21 = -u1.y / det, i22 = u1.x / det;
  std::array<double, 4> lin{v1.x * i11 + v2.x * i21, v1.x * i12 + v2.x * i22,
                            v1.y * i11 + v2.y * i21, v1.y * i12 + v2.y * i22};
  const Coord l0{lin[0] * from[0].x + lin[1] * from[0].y,
                 lin[2] * from[0].x + lin[3] * from[0].y};
  return ContractionMap(lin, to[0] - l0);
}

Coord ContractionMap::operator()(Coord p) const {
  return {linear_[0] * p.x + linear_[1] * p.y + offset_.x,
          linear_[2] * p.x + linear_[3] * p.y + offset_.y};
}

double ContractionMap::determinant() const {
  return linear_[0] * linear_[3] - linear_[1] * linear_[2];
}

Coord ContractionMap::Inverse(Coord p) const {
  const Coord q = p - offset_;
  const bool one_d = linear_[1] == 0.0 && linear_[2] == 0.0 &&
                     linear_[3] == 0.0;
  if (one_d) return {q.x / linear_[0], 0.0};
  const double det = determinant();
  return {(linear_[3] * q.x - linear_[1] * q.y) / det,
          (-linear_[2] * q.x + linear_[0] * q.y) / det};
}

std::vector<std::size_t> ClusterNear(const std::vector<Coord>& coords,
                                     double eps) {
  const std::size_t n = coords.size();
  std::vector<std::size_t> order(n);
  for (std::size_t i = 0; i < n; ++i) order[i] = i;
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return coords[a].x < coords[b].x ||
           (coords[a].x == coords[b].x && a < b);
  });
  // Union-find over sorted neighbours within eps in x.
  std::vector<std::size_t> parent(n);
  for (std::size_t i = 0; i < n; ++i) parent[i] = i;
  auto find = [&](std::size_t i) {
    while (parent[i] != i) i = parent[i] = parent[parent[i]];
    return i;
  };
  for (std::size_t a = 0; a < n; ++a) {
    for (std::size_t b = a + 1; b < n; ++b) {
      const Coord p = coords[order[a]], q = coords[order[b]];
      if (q.x - p.x > eps) break;
      if (Distance(p, q) <= eps) {
        std::size_t ra = find(order[a]), rb = find(order[b]);
        if (ra != rb) parent[std::max(ra, rb)] = std::min(ra, rb);
      }
    }
  }
  // Representative = smallest index in the cluster.
  std::vector<std::size_t> rep(n);
  for (std::size_t i = 0; i < n; ++i) rep[i] = find(i);
  std::vector<std::size_t> smallest(n, n);
  for (std::size_t i = 0; i < n; ++i) smallest[rep[i]] = std::min(smallest[rep[i]], i);
  for (std::size_t i = 0; i < n; ++i) rep[i] = smallest[rep[i]];
  return rep;
}

bool InTriangle(Coord p, const std::array<Coord, 3>& tri, double tolerance) {
  // Signed distance to each edge line, oriented inward.
  const double area = (tri[1].x - tri[0].x) * (tri[2].y - tri[0].y) -
                      (tri[2].x - tri[0].x) * (tri[1].y - tri[0].y);
  const double orient = area >= 0 ? 1.0 : -1.0;
  for (int k = 0; k < 3; ++k) {
    const Coord a = tri[k];
    const Coord b = tri[(k + 1) % 3];
    const Coord e = b - a;
    const double len = Norm(e);
    const double cross = e.x * (p.y - a.y) - e.y * (p.x - a.x);
    if (orient * cross / len < -tolerance) return false;
  }
  return true;
}

}  // namespace fractrace
