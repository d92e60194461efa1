#pragma once

#include <array>
#include <compare>
#include <cstddef>
#include <initializer_list>
#include <optional>
#include <string>
#include <vector>

namespace fractrace {

// Ambient coordinates. One-dimensional systems leave `y` at zero, so the
// Euclidean distance below is the ordinary metric in both cases.
struct Coord {
  double x = 0.0;
  double y = 0.0;

  friend Coord operator+(Coord a, Coord b) { return {a.x + b.x, a.y + b.y}; }
  friend Coord operator-(Coord a, Coord b) { return {a.x - b.x, a.y - b.y}; }
  friend Coord operator*(double s, Coord a) { return {s * a.x, s * a.y}; }
  friend bool operator==(Coord, Coord) = default;
  friend auto operator<=>(Coord, Coord) = default;
};

double Distance(Coord a, Coord b);
double Norm(Coord a);

// A word (j_1, ..., j_k) over the alphabet {0, ..., N-1}. Letters are stored
// zero-based; ToString() prints them one-based.
class Word {
 public:
  Word() = default;
  Word(std::initializer_list<int> letters) : letters_(letters) {}
  explicit Word(std::vector<int> letters) : letters_(std::move(letters)) {}

  std::size_t size() const { return letters_.size(); }
  bool empty() const { return letters_.empty(); }
  int operator[](std::size_t i) const { return letters_[i]; }
  const std::vector<int>& letters() const { return letters_; }

  // (j) followed by this word.
  Word Prepend(int letter) const;
  // This word followed by `tail`.
  Word Concat(const Word& tail) const;
  // Drops the first k letters.
  Word DropFront(std::size_t k) const;

  std::string ToString() const;

  friend bool operator==(const Word&, const Word&) = default;
  friend auto operator<=>(const Word&, const Word&) = default;

 private:
  std::vector<int> letters_;
};

// All words of length n over an alphabet of size N, lexicographic order.
std::vector<Word> AllWords(int alphabet_size, int length);

// Symbolic provenance of a point: coords == gamma_word(anchor) exactly in
// exact arithmetic.
struct Itinerary {
  Word word;
  Coord anchor;

  friend bool operator==(const Itinerary&, const Itinerary&) = default;
};

struct Point {
  Coord coords;
  std::optional<Itinerary> address;
  // Branch points carry a second expression b = gamma_i(a) = gamma_j(a).
  std::optional<Itinerary> address2;

  Point() = default;
  Point(double x) : coords{x, 0.0} {}  // NOLINT: 1D convenience
  Point(double x, double y) : coords{x, y} {}
  Point(Coord c) : coords(c) {}  // NOLINT
  Point(Coord c, Itinerary it) : coords(c), address(std::move(it)) {}
};

// Affine map x -> A x + t on R^2 (1D maps use only a11 and t.x).
class ContractionMap {
 public:
  ContractionMap() = default;
  ContractionMap(std::array<double, 4> linear, Coord offset);
  static ContractionMap Affine1D(double slope, double offset);
  // The unique affine map sending p0, p1, p2 to q0, q1, q2.
  static ContractionMap FromTriangles(std::array<Coord, 3> from,
                                      std::array<Coord, 3> to);

  Coord operator()(Coord p) const;
  Coord Inverse(Coord p) const;

  const std::array<double, 4>& linear() const { return linear_; }
  Coord offset() const { return offset_; }
  double determinant() const;

  // Exact two-sided Lipschitz constants (singular values of the linear part).
  double upper_bound() const { return upper_; }
  double lower_bound() const { return lower_; }

 private:
  std::array<double, 4> linear_{1.0, 0.0, 0.0, 1.0};
  Coord offset_;
  double upper_ = 1.0;
  double lower_ = 1.0;
};

// Clusters coordinates closer than `eps` (single linkage after a sort on x).
// Returns, for every input index, the index of its cluster's first member.
std::vector<std::size_t> ClusterNear(const std::vector<Coord>& coords,
                                     double eps);

// Point-in-triangle with an absolute tolerance measured in distance units.
bool InTriangle(Coord p, const std::array<Coord, 3>& tri, double tolerance);

}  // namespace fractrace
